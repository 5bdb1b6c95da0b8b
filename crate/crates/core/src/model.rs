//! Finite SSP instances.
//!
//! A model is a finite set of states with the termination state at index 0,
//! a nonempty list of controls per state, and for every (state, control) pair
//! a list of outcome branches. Each branch merges one disturbance value into
//! its probability, successor state and stage cost.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::error::{Result, SspError};
use crate::policy::StationaryPolicy;

pub type StateId = usize;

/// Index of the termination state in every model.
pub const TERMINAL: StateId = 0;

/// Tolerance on the sum of branch probabilities for one (state, control).
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeBranch {
    pub probability: f64,
    pub next: StateId,
    pub cost: f64,
}

impl OutcomeBranch {
    pub fn new(probability: f64, next: StateId, cost: f64) -> Self {
        Self {
            probability,
            next,
            cost,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Control {
    pub label: String,
    pub branches: Vec<OutcomeBranch>,
}

impl Control {
    pub fn new(label: impl Into<String>, branches: Vec<OutcomeBranch>) -> Self {
        Self {
            label: label.into(),
            branches,
        }
    }

    /// True when every branch has zero stage cost.
    pub fn is_cost_free(&self) -> bool {
        self.branches.iter().all(|b| b.cost == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SspModel {
    name: String,
    labels: Vec<String>,
    controls: Vec<Vec<Control>>,
}

impl SspModel {
    /// Assembles a model without checking it. Use [`SspModel::new`] unless the
    /// caller intends to inspect the [`ValidationReport`] itself.
    pub fn from_parts(
        name: impl Into<String>,
        labels: Vec<String>,
        controls: Vec<Vec<Control>>,
    ) -> Self {
        Self {
            name: name.into(),
            labels,
            controls,
        }
    }

    /// Assembles and validates a model.
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        controls: Vec<Vec<Control>>,
    ) -> Result<Self> {
        let model = Self::from_parts(name, labels, controls);
        let report = model.validate();
        if report.is_valid() {
            Ok(model)
        } else {
            Err(SspError::Validation(report))
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.labels.len()
    }

    pub fn label(&self, x: StateId) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state_by_label(&self, label: &str) -> Option<StateId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn state(&self, label: &str) -> Result<StateId> {
        self.state_by_label(label)
            .ok_or_else(|| SspError::UnknownState(label.to_string()))
    }

    pub fn controls(&self, x: StateId) -> &[Control] {
        &self.controls[x]
    }

    pub fn control(&self, x: StateId, u: usize) -> &Control {
        &self.controls[x][u]
    }

    pub fn control_by_label(&self, x: StateId, label: &str) -> Option<usize> {
        self.controls[x].iter().position(|c| c.label == label)
    }

    /// Largest stage cost over all branches (0 for an empty model).
    pub fn max_stage_cost(&self) -> f64 {
        self.controls
            .iter()
            .flatten()
            .flat_map(|c| c.branches.iter())
            .map(|b| b.cost)
            .fold(0.0, f64::max)
    }

    /// Number of stationary policies, saturating at `usize::MAX`.
    pub fn num_stationary_policies(&self) -> usize {
        self.controls
            .iter()
            .fold(1usize, |acc, cs| acc.saturating_mul(cs.len()))
    }

    /// Every (state, control) check, collected rather than failing fast.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.labels.len();
        if n == 0 {
            violations.push(Violation::new(None, None, ViolationKind::NoStates));
            return ValidationReport { violations };
        }
        if self.controls.len() != n {
            violations.push(Violation::new(None, None, ViolationKind::ShapeMismatch));
            return ValidationReport { violations };
        }
        for x in 0..n {
            if self.controls[x].is_empty() {
                violations.push(Violation::new(Some(x), None, ViolationKind::NoControls));
            }
            for (u, control) in self.controls[x].iter().enumerate() {
                let at = |kind| Violation::new(Some(x), Some(u), kind);
                if control.branches.is_empty() {
                    violations.push(at(ViolationKind::NoBranches));
                    continue;
                }
                let mut total = 0.0;
                for b in &control.branches {
                    if !(b.probability > 0.0 && b.probability <= 1.0) {
                        violations.push(at(ViolationKind::BadProbability(b.probability)));
                    }
                    if !b.cost.is_finite() {
                        violations.push(at(ViolationKind::NonFiniteCost(b.cost)));
                    } else if b.cost < 0.0 {
                        violations.push(at(ViolationKind::NegativeCost(b.cost)));
                    }
                    if b.next >= n {
                        violations.push(at(ViolationKind::UnknownSuccessor(b.next)));
                    }
                    if x == TERMINAL {
                        if b.next != TERMINAL {
                            violations.push(at(ViolationKind::TerminationNotAbsorbing));
                        }
                        if b.cost != 0.0 {
                            violations.push(at(ViolationKind::TerminationNotCostFree));
                        }
                    }
                    total += b.probability;
                }
                if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
                    violations.push(at(ViolationKind::ProbabilitySum(total)));
                }
            }
        }
        ValidationReport { violations }
    }

    /// States reachable from `x0` through positive-probability branches,
    /// restricted to the policy's choices when one is supplied. Sorted.
    pub fn reachable(&self, x0: StateId, policy: Option<&StationaryPolicy>) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([x0]);
        seen[x0] = true;
        while let Some(x) = queue.pop_front() {
            let controls: Box<dyn Iterator<Item = &Control>> = match policy {
                Some(mu) => Box::new(std::iter::once(self.control(x, mu.control(x)))),
                None => Box::new(self.controls[x].iter()),
            };
            for c in controls {
                for b in &c.branches {
                    if b.probability > 0.0 && !seen[b.next] {
                        seen[b.next] = true;
                        queue.push_back(b.next);
                    }
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter_map(|(x, &s)| s.then_some(x))
            .collect()
    }

    /// Copy of the model with per-branch costs rewritten.
    pub(crate) fn map_costs(&self, name: String, f: impl Fn(StateId, f64) -> f64) -> Self {
        let controls = self
            .controls
            .iter()
            .enumerate()
            .map(|(x, cs)| {
                cs.iter()
                    .map(|c| Control {
                        label: c.label.clone(),
                        branches: c
                            .branches
                            .iter()
                            .map(|b| OutcomeBranch {
                                cost: f(x, b.cost),
                                ..b.clone()
                            })
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        Self {
            name,
            labels: self.labels.clone(),
            controls,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    NoStates,
    ShapeMismatch,
    NoControls,
    NoBranches,
    BadProbability(f64),
    ProbabilitySum(f64),
    NegativeCost(f64),
    NonFiniteCost(f64),
    UnknownSuccessor(StateId),
    TerminationNotAbsorbing,
    TerminationNotCostFree,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NoStates => write!(f, "model has no states"),
            ViolationKind::ShapeMismatch => write!(f, "control table does not match state list"),
            ViolationKind::NoControls => write!(f, "state has no controls"),
            ViolationKind::NoBranches => write!(f, "control has no outcome branches"),
            ViolationKind::BadProbability(p) => write!(f, "branch probability {p} outside (0, 1]"),
            ViolationKind::ProbabilitySum(s) => {
                write!(f, "probabilities do not sum to 1 (sum {s})")
            }
            ViolationKind::NegativeCost(c) => write!(f, "negative stage cost {c}"),
            ViolationKind::NonFiniteCost(c) => write!(f, "non-finite stage cost {c}"),
            ViolationKind::UnknownSuccessor(s) => write!(f, "successor index {s} out of range"),
            ViolationKind::TerminationNotAbsorbing => write!(f, "termination not absorbing"),
            ViolationKind::TerminationNotCostFree => write!(f, "termination not cost-free"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub state: Option<StateId>,
    pub control: Option<usize>,
    pub kind: ViolationKind,
}

impl Violation {
    fn new(state: Option<StateId>, control: Option<usize>, kind: ViolationKind) -> Self {
        Self {
            state,
            control,
            kind,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.state, self.control) {
            (Some(x), Some(u)) => write!(f, "state {x}, control {u}: {}", self.kind),
            (Some(x), None) => write!(f, "state {x}: {}", self.kind),
            _ => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&ViolationKind) -> bool) -> bool {
        self.violations.iter().any(|v| pred(&v.kind))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Incremental construction by label. Successors are referred to by label and
/// resolved in [`ModelBuilder::build`], so states may be used before they are
/// declared.
/// A control label with its `(probability, successor label, cost)` branches.
type PendingControl = (String, Vec<(f64, String, f64)>);

#[derive(Debug, Default)]
pub struct ModelBuilder {
    name: String,
    labels: Vec<String>,
    pending: Vec<Vec<PendingControl>>,
}

impl ModelBuilder {
    /// Starts a model whose termination state is labelled `terminal`.
    pub fn new(name: impl Into<String>, terminal: impl Into<String>) -> Self {
        let terminal = terminal.into();
        Self {
            name: name.into(),
            labels: vec![terminal.clone()],
            pending: vec![vec![("stay".into(), vec![(1.0, terminal, 0.0)])]],
        }
    }

    pub fn state(mut self, label: impl Into<String>) -> Self {
        self.labels.push(label.into());
        self.pending.push(Vec::new());
        self
    }

    /// Adds a control to the state labelled `state`; branches are
    /// `(probability, next label, cost)`.
    pub fn control(
        mut self,
        state: &str,
        label: impl Into<String>,
        branches: &[(f64, &str, f64)],
    ) -> Self {
        let x = self
            .labels
            .iter()
            .position(|l| l == state)
            .unwrap_or_else(|| panic!("state `{state}` not declared"));
        self.pending[x].push((
            label.into(),
            branches
                .iter()
                .map(|&(p, next, c)| (p, next.to_string(), c))
                .collect(),
        ));
        self
    }

    pub fn build(self) -> Result<SspModel> {
        let index = |l: &str| {
            self.labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| SspError::UnknownState(l.to_string()))
        };
        let mut controls = Vec::with_capacity(self.pending.len());
        for cs in &self.pending {
            let mut row = Vec::with_capacity(cs.len());
            for (label, branches) in cs {
                let branches = branches
                    .iter()
                    .map(|(p, next, c)| Ok(OutcomeBranch::new(*p, index(next)?, *c)))
                    .collect::<Result<Vec<_>>>()?;
                row.push(Control::new(label.clone(), branches));
            }
            controls.push(row);
        }
        SspModel::new(self.name, self.labels, controls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn cycle_fixture_is_valid() {
        let (model, _) = fixtures::cycle_fixture();
        assert!(model.validate().is_valid());
    }

    #[test]
    fn costly_termination_is_reported() {
        let (model, _) = fixtures::cycle_fixture();
        let mut controls: Vec<Vec<Control>> =
            model.states().map(|x| model.controls(x).to_vec()).collect();
        controls[TERMINAL][0].branches[0].cost = 1.0;
        let bad = SspModel::from_parts("bad", model.labels().to_vec(), controls);
        let report = bad.validate();
        assert!(report.has(|k| *k == ViolationKind::TerminationNotCostFree));
        assert!(report.to_string().contains("termination not cost-free"));
        assert_eq!(report.violations[0].state, Some(TERMINAL));
    }

    #[test]
    fn short_probability_mass_is_reported() {
        let bad = ModelBuilder::new("short", "t")
            .state("s1")
            .control("s1", "a", &[(0.5, "t", 1.0), (0.4, "s1", 0.0)])
            .build();
        match bad {
            Err(SspError::Validation(report)) => {
                assert!(report.to_string().contains("probabilities do not sum to 1"));
                assert_eq!(report.violations[0].state, Some(1));
                assert_eq!(report.violations[0].control, Some(0));
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn negative_and_missing_controls_are_reported() {
        let labels = vec!["t".to_string(), "s1".to_string(), "s2".to_string()];
        let stay = Control::new("stay", vec![OutcomeBranch::new(1.0, 0, 0.0)]);
        let controls = vec![
            vec![stay],
            vec![Control::new("a", vec![OutcomeBranch::new(1.0, 0, -1.0)])],
            vec![],
        ];
        let report = SspModel::from_parts("bad", labels, controls).validate();
        assert!(report.has(|k| matches!(k, ViolationKind::NegativeCost(_))));
        assert!(report.has(|k| *k == ViolationKind::NoControls));
    }

    #[test]
    fn reachability_on_cycle() {
        let (model, _) = fixtures::cycle_fixture();
        let s1 = model.state("s1").unwrap();
        let b = StationaryPolicy::from_labels(&model, &[("s1", "b")]).unwrap();
        assert_eq!(model.reachable(s1, Some(&b)), vec![s1]);
        assert_eq!(model.reachable(s1, None), vec![TERMINAL, s1]);
        assert_eq!(model.reachable(TERMINAL, None), vec![TERMINAL]);
    }
}
