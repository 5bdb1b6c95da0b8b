use crate::error::{Result, SspError};
use crate::model::{SspModel, StateId};

/// A control index per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StationaryPolicy {
    choice: Vec<usize>,
}

impl StationaryPolicy {
    /// Checks feasibility against `model`.
    pub fn new(model: &SspModel, choice: Vec<usize>) -> Result<Self> {
        let policy = Self { choice };
        policy.check(model)?;
        Ok(policy)
    }

    /// Picks the first control everywhere.
    pub fn first(model: &SspModel) -> Self {
        Self {
            choice: vec![0; model.num_states()],
        }
    }

    /// Builds a policy from `(state label, control label)` pairs; states not
    /// listed use their first control.
    pub fn from_labels(model: &SspModel, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut choice = vec![0; model.num_states()];
        for &(state, control) in pairs {
            let x = model.state(state)?;
            choice[x] = model
                .control_by_label(x, control)
                .ok_or_else(|| SspError::Infeasible {
                    state: state.to_string(),
                    control: control.to_string(),
                })?;
        }
        Ok(Self { choice })
    }

    pub fn control(&self, x: StateId) -> usize {
        self.choice[x]
    }

    pub fn choices(&self) -> &[usize] {
        &self.choice
    }

    pub fn check(&self, model: &SspModel) -> Result<()> {
        if self.choice.len() != model.num_states() {
            return Err(SspError::parameter(format!(
                "policy covers {} states, model has {}",
                self.choice.len(),
                model.num_states()
            )));
        }
        for (x, &u) in self.choice.iter().enumerate() {
            if u >= model.controls(x).len() {
                return Err(SspError::Infeasible {
                    state: model.label(x).to_string(),
                    control: format!("#{u}"),
                });
            }
        }
        Ok(())
    }

    /// Every stationary policy of `model` in lexicographic order of control
    /// indices (last state varies fastest).
    pub fn enumerate(model: &SspModel) -> impl Iterator<Item = StationaryPolicy> + '_ {
        let sizes: Vec<usize> = model.states().map(|x| model.controls(x).len()).collect();
        let total = model.num_stationary_policies();
        (0..total).map(move |mut code| {
            let mut choice = vec![0; sizes.len()];
            for x in (0..sizes.len()).rev() {
                choice[x] = code % sizes[x];
                code /= sizes[x];
            }
            StationaryPolicy { choice }
        })
    }
}

/// An eventually-stationary policy `{μ_0, …, μ_{m-1}, μ, μ, …}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    prefix: Vec<StationaryPolicy>,
    tail: StationaryPolicy,
}

impl Policy {
    pub fn new(prefix: Vec<StationaryPolicy>, tail: StationaryPolicy) -> Self {
        Self { prefix, tail }
    }

    pub fn stationary(mu: StationaryPolicy) -> Self {
        Self {
            prefix: Vec::new(),
            tail: mu,
        }
    }

    /// Decision rule used at stage `k`.
    pub fn at(&self, k: usize) -> &StationaryPolicy {
        self.prefix.get(k).unwrap_or(&self.tail)
    }

    /// The policy `{μ_k, μ_{k+1}, …}`.
    pub fn tail_from(&self, k: usize) -> Policy {
        Policy {
            prefix: self.prefix.iter().skip(k).cloned().collect(),
            tail: self.tail.clone(),
        }
    }

    pub fn prefix(&self) -> &[StationaryPolicy] {
        &self.prefix
    }

    pub fn tail(&self) -> &StationaryPolicy {
        &self.tail
    }

    pub fn check(&self, model: &SspModel) -> Result<()> {
        self.prefix.iter().try_for_each(|mu| mu.check(model))?;
        self.tail.check(model)
    }
}

impl From<StationaryPolicy> for Policy {
    fn from(mu: StationaryPolicy) -> Self {
        Policy::stationary(mu)
    }
}
