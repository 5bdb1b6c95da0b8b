//! Bellman operator `T`, policy operator `T_μ`, value iteration, greedy
//! extraction, policy evaluation and residuals.
//!
//! All operators use Jacobi semantics: every backup of a sweep reads the
//! previous iterate.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SspError};
use crate::ext::{self, INF};
use crate::model::{SspModel, StateId, TERMINAL};
use crate::policy::StationaryPolicy;
use crate::structure;
use crate::value::ValueFunction;

/// Models with at least this many states are swept in parallel.
const PAR_SWEEP_MIN_STATES: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct ViOptions {
    pub tol_abs: f64,
    pub max_sweeps: usize,
    /// `None` means `1e12 × max(max stage cost, 1) × state count`.
    pub divergence_threshold: Option<f64>,
}

impl Default for ViOptions {
    fn default() -> Self {
        Self {
            tol_abs: 1e-10,
            max_sweeps: 100_000,
            divergence_threshold: None,
        }
    }
}

impl ViOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_abs = tol;
        self
    }

    pub fn with_max_sweeps(mut self, n: usize) -> Self {
        self.max_sweeps = n;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.tol_abs > 0.0) {
            return Err(SspError::parameter("tol_abs must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(SspError::parameter("max_sweeps must be at least 1"));
        }
        Ok(())
    }

    fn threshold(&self, model: &SspModel) -> f64 {
        self.divergence_threshold
            .unwrap_or_else(|| 1e12 * model.max_stage_cost().max(1.0) * model.num_states() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub sweep: usize,
    /// Sup-norm change over states finite after the sweep.
    pub change: f64,
    pub infinite: Vec<StateId>,
    /// Whether the new iterate dominates the previous one componentwise.
    pub nondecreasing: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ViTrace {
    pub records: Vec<SweepRecord>,
}

impl ViTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sweeps(&self) -> usize {
        self.records.last().map_or(0, |r| r.sweep)
    }

    pub fn all_nondecreasing(&self) -> bool {
        self.records.iter().all(|r| r.nondecreasing)
    }
}

/// Expected one-stage cost plus discounted continuation for control `u` at `x`.
pub fn q_value(model: &SspModel, j: &ValueFunction, x: StateId, u: usize, discount: f64) -> f64 {
    model
        .control(x, u)
        .branches
        .iter()
        .map(|b| ext::mul(b.probability, b.cost + ext::mul(discount, j[b.next])))
        .sum()
}

fn backup_with(model: &SspModel, j: &ValueFunction, x: StateId, discount: f64) -> f64 {
    if x == TERMINAL {
        return 0.0;
    }
    (0..model.controls(x).len())
        .map(|u| q_value(model, j, x, u, discount))
        .fold(INF, f64::min)
}

/// `(TJ)(x)`.
pub fn bellman_backup(model: &SspModel, j: &ValueFunction, x: StateId) -> f64 {
    backup_with(model, j, x, 1.0)
}

fn sweep(model: &SspModel, j: &ValueFunction, discount: f64) -> ValueFunction {
    let n = model.num_states();
    let values = if n >= PAR_SWEEP_MIN_STATES {
        (0..n)
            .into_par_iter()
            .map(|x| backup_with(model, j, x, discount))
            .collect()
    } else {
        (0..n).map(|x| backup_with(model, j, x, discount)).collect()
    };
    ValueFunction::new(values)
}

/// `TJ` at every state.
pub fn apply_t(model: &SspModel, j: &ValueFunction) -> ValueFunction {
    sweep(model, j, 1.0)
}

/// `T_μ J` at every state.
pub fn apply_t_mu(
    model: &SspModel,
    mu: &StationaryPolicy,
    j: &ValueFunction,
) -> Result<ValueFunction> {
    mu.check(model)?;
    Ok(policy_sweep(model, mu, j))
}

fn policy_sweep(model: &SspModel, mu: &StationaryPolicy, j: &ValueFunction) -> ValueFunction {
    ValueFunction::new(
        model
            .states()
            .map(|x| {
                if x == TERMINAL {
                    0.0
                } else {
                    q_value(model, j, x, mu.control(x), 1.0)
                }
            })
            .collect(),
    )
}

/// Value iteration `J_{k+1} = T J_k` from `j0`.
///
/// Stops when the sup-norm change over finite-valued states drops below
/// `tol_abs` and the set of infinite states equals the previous sweep's.
/// States whose optimal cost is infinite (decided structurally) and states
/// that keep growing past the divergence threshold are reported as `+∞`.
pub fn value_iteration(
    model: &SspModel,
    j0: &ValueFunction,
    opts: &ViOptions,
) -> Result<(ValueFunction, ViTrace)> {
    let finite = structure::finite_cost_states(model, &structure::all_controls(model));
    iterate(model, j0, opts, &finite, |j| apply_t(model, j))
}

/// Value iteration for the problem whose continuation values are weighted
/// by `discount ∈ (0, 1)`.
pub fn discounted_value_iteration(
    model: &SspModel,
    j0: &ValueFunction,
    discount: f64,
    opts: &ViOptions,
) -> Result<(ValueFunction, ViTrace)> {
    if !(discount > 0.0 && discount < 1.0) {
        return Err(SspError::parameter(format!(
            "discount {discount} outside (0, 1)"
        )));
    }
    let finite = vec![true; model.num_states()];
    iterate(model, j0, opts, &finite, |j| sweep(model, j, discount))
}

fn iterate(
    model: &SspModel,
    j0: &ValueFunction,
    opts: &ViOptions,
    finite: &[bool],
    step: impl Fn(&ValueFunction) -> ValueFunction,
) -> Result<(ValueFunction, ViTrace)> {
    opts.check()?;
    if j0.len() != model.num_states() {
        return Err(SspError::parameter(
            "initial function does not cover the model",
        ));
    }
    if !j0.vanishes_at_terminal() {
        return Err(SspError::parameter(
            "initial function must be nonnegative and vanish at the termination state",
        ));
    }
    let threshold = opts.threshold(model);
    let mut j = j0.clone();
    let mut previous_infinite = j.infinite_states();
    let mut trace = ViTrace::default();
    for k in 1..=opts.max_sweeps {
        let mut next = step(&j);
        for x in model.states() {
            if !finite[x] || (next[x].is_finite() && next[x] > threshold && next[x] > j[x]) {
                next[x] = INF;
            }
        }
        let change = next.distance_on(&j, next.finite_states());
        let infinite = next.infinite_states();
        let nondecreasing = j.le(&next, 0.0);
        let stable = infinite == previous_infinite;
        trace.records.push(SweepRecord {
            sweep: k,
            change,
            infinite: infinite.clone(),
            nondecreasing,
        });
        j = next;
        if change < opts.tol_abs && stable {
            return Ok((j, trace));
        }
        previous_infinite = infinite;
    }
    Err(SspError::NonConvergence {
        trace: Box::new(trace),
    })
}

/// A policy attaining the minimum of every backup; ties go to the lowest
/// control index.
pub fn greedy(model: &SspModel, j: &ValueFunction) -> StationaryPolicy {
    let choice = model
        .states()
        .map(|x| {
            let mut best = 0;
            let mut best_q = INF;
            for u in 0..model.controls(x).len() {
                let q = q_value(model, j, x, u, 1.0);
                if q < best_q {
                    best = u;
                    best_q = q;
                }
            }
            best
        })
        .collect();
    StationaryPolicy::new(model, choice).expect("greedy choice is feasible by construction")
}

/// Tolerance on the sweep change used by [`evaluate_policy`].
pub const EVALUATION_TOL: f64 = 1e-12;

/// `J_μ`, the least nonnegative solution of `J = T_μ J`, by monotone
/// iteration from zero. States from which `μ` incurs infinite cost are set
/// to `+∞` up front.
///
/// The iterate is then refined by a direct solve over the finite states
/// outside `μ`'s cost-free closed classes (which are exactly 0), since the
/// iteration stops with an error of order `change / (1 − ρ)`.
pub fn evaluate_policy(model: &SspModel, mu: &StationaryPolicy) -> Result<ValueFunction> {
    mu.check(model)?;
    let allowed = structure::policy_controls(mu);
    let finite = structure::finite_cost_states(model, &allowed);
    let opts = ViOptions::default().with_tol(EVALUATION_TOL);
    let (mut j, _) = iterate(
        model,
        &ValueFunction::zeros(model.num_states()),
        &opts,
        &finite,
        |j| policy_sweep(model, mu, j),
    )?;
    let free = structure::cost_free_end_components(model, &allowed);
    let unknown: Vec<bool> = model.states().map(|x| finite[x] && !free[x]).collect();
    if let Some(exact) = solve_transient(model, mu, &unknown) {
        let agrees = model.states().all(|x| {
            !unknown[x] || (exact[x] >= 0.0 && (exact[x] - j[x]).abs() <= REFINE_TOL * (1.0 + j[x]))
        });
        if agrees {
            for x in model.states().filter(|&x| unknown[x]) {
                j[x] = exact[x];
            }
        }
    }
    Ok(j)
}

/// Largest relative disagreement for which the direct solve replaces the
/// iterate in [`evaluate_policy`].
const REFINE_TOL: f64 = 1e-6;

/// Solves `(I − P_μ) J = g_μ` over `unknown`, with every other state taken
/// as 0. Successors of unknown states must be unknown or zero-valued.
fn solve_transient(
    model: &SspModel,
    mu: &StationaryPolicy,
    unknown: &[bool],
) -> Option<ValueFunction> {
    let index: Vec<Option<usize>> = {
        let mut next = 0;
        model
            .states()
            .map(|x| {
                (x != TERMINAL && unknown[x]).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let m = index.iter().flatten().count();
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut g = DVector::<f64>::zeros(m);
    for x in model.states() {
        let Some(i) = index[x] else { continue };
        for b in &model.control(x, mu.control(x)).branches {
            g[i] += b.probability * b.cost;
            if let Some(k) = index[b.next] {
                a[(i, k)] -= b.probability;
            }
        }
    }
    let solution = if m == 0 { g } else { a.lu().solve(&g)? };
    let mut j = ValueFunction::constant(model.num_states(), f64::NAN);
    j[TERMINAL] = 0.0;
    for x in model.states() {
        if let Some(i) = index[x] {
            j[x] = solution[i];
        }
    }
    Some(j)
}

/// `J_μ` by a direct linear solve `(I − P_μ) J = g_μ` over the states from
/// which `μ` terminates with certainty; every other state is left as NaN.
pub fn evaluate_policy_linear(model: &SspModel, mu: &StationaryPolicy) -> Result<ValueFunction> {
    mu.check(model)?;
    let certain = structure::certain_termination_states(model, &structure::policy_controls(mu));
    solve_transient(model, mu, &certain)
        .ok_or_else(|| SspError::contract("singular system on the certain-termination set"))
}

/// `max_x |J(x) − (TJ)(x)|` over `domain` (all states when `None`).
pub fn residual(model: &SspModel, j: &ValueFunction, domain: Option<&[StateId]>) -> f64 {
    worst_residual(model, j, domain).1
}

/// Worst state and its residual.
pub fn worst_residual(
    model: &SspModel,
    j: &ValueFunction,
    domain: Option<&[StateId]>,
) -> (Option<StateId>, f64) {
    let states: Vec<StateId> = match domain {
        Some(d) => d.to_vec(),
        None => model.states().collect(),
    };
    let mut worst = (None, 0.0);
    for x in states {
        let r = ext::distance(j[x], bellman_backup(model, j, x));
        if worst.0.is_none() || r > worst.1 {
            worst = (Some(x), r);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cycle() -> (SspModel, StateId) {
        let (model, _) = fixtures::cycle_fixture();
        let s1 = model.state("s1").unwrap();
        (model, s1)
    }

    fn at_s1(model: &SspModel, v: f64) -> ValueFunction {
        ValueFunction::from_fn(model, |_| v)
    }

    #[test]
    fn backups_on_cycle() {
        let (model, s1) = cycle();
        assert_eq!(bellman_backup(&model, &at_s1(&model, 0.0), s1), 0.0);
        assert_eq!(bellman_backup(&model, &at_s1(&model, 5.0), s1), 1.0);
        assert_eq!(bellman_backup(&model, &at_s1(&model, 5.0), TERMINAL), 0.0);
        assert_eq!(apply_t(&model, &at_s1(&model, 0.0)), at_s1(&model, 0.0));
    }

    #[test]
    fn policy_operator_on_cycle() {
        let (model, s1) = cycle();
        let a = StationaryPolicy::from_labels(&model, &[("s1", "a")]).unwrap();
        let b = StationaryPolicy::from_labels(&model, &[("s1", "b")]).unwrap();
        let zero = at_s1(&model, 0.0);
        assert_eq!(apply_t_mu(&model, &b, &zero).unwrap()[s1], 0.0);
        assert_eq!(apply_t_mu(&model, &a, &zero).unwrap()[s1], 1.0);
        assert_eq!(
            apply_t_mu(&model, &a, &at_s1(&model, INF)).unwrap()[s1],
            1.0
        );
        assert_eq!(
            apply_t_mu(&model, &b, &at_s1(&model, INF)).unwrap()[s1],
            INF
        );
        let grid = fixtures::stopping_grid(4).0;
        let bogus = StationaryPolicy::new(&grid, vec![0, 4]).unwrap();
        assert!(apply_t_mu(&model, &bogus, &zero).is_err());
    }

    #[test]
    fn value_iteration_on_cycle() {
        let (model, s1) = cycle();
        let opts = ViOptions::default();
        let (j, trace) = value_iteration(&model, &at_s1(&model, 0.0), &opts).unwrap();
        assert_eq!(j[s1], 0.0);
        assert!(trace.all_nondecreasing());
        let (j, trace) = value_iteration(&model, &at_s1(&model, 5.0), &opts).unwrap();
        assert_eq!(j[s1], 1.0);
        assert_eq!(trace.records[0].change, 4.0);
        assert_eq!(trace.sweeps(), 2);
    }

    #[test]
    fn perturbed_cycle_ramps_monotonically() {
        let (model, s1) = cycle();
        let perturbed = crate::perturbation::perturb(&model, 0.1).unwrap();
        let (j, trace) =
            value_iteration(&perturbed, &at_s1(&model, 0.0), &ViOptions::default()).unwrap();
        assert!((j[s1] - 1.1).abs() < 1e-15);
        assert!(trace.all_nondecreasing());
        // 0.1, 0.2, ..., then capped at 1.1
        assert!(trace.records.len() >= 11);
        assert!((trace.records[0].change - 0.1).abs() < 1e-15);
    }

    #[test]
    fn value_iteration_rejects_bad_start() {
        let (model, _) = cycle();
        let bad = ValueFunction::new(vec![1.0, 0.0]);
        assert!(matches!(
            value_iteration(&model, &bad, &ViOptions::default()),
            Err(SspError::Parameter(_))
        ));
    }

    #[test]
    fn value_iteration_reports_exhaustion() {
        let (model, _) = cycle();
        let perturbed = crate::perturbation::perturb(&model, 0.01).unwrap();
        let opts = ViOptions::default().with_max_sweeps(5);
        match value_iteration(&perturbed, &ValueFunction::zeros(2), &opts) {
            Err(SspError::NonConvergence { trace }) => assert_eq!(trace.len(), 5),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn greedy_tie_break_and_choices() {
        let (model, s1) = cycle();
        assert_eq!(
            model
                .control(s1, greedy(&model, &at_s1(&model, 0.0)).control(s1))
                .label,
            "b"
        );
        assert_eq!(
            model
                .control(s1, greedy(&model, &at_s1(&model, 1.0)).control(s1))
                .label,
            "a"
        );
        let delta = 0.1;
        let perturbed = crate::perturbation::perturb(&model, delta).unwrap();
        let jd = at_s1(&model, 1.0 + delta);
        assert_eq!(
            perturbed
                .control(s1, greedy(&perturbed, &jd).control(s1))
                .label,
            "a"
        );
    }

    #[test]
    fn policy_evaluation_on_fixtures() {
        let (model, s1) = cycle();
        let a = StationaryPolicy::from_labels(&model, &[("s1", "a")]).unwrap();
        let b = StationaryPolicy::from_labels(&model, &[("s1", "b")]).unwrap();
        assert_eq!(evaluate_policy(&model, &a).unwrap()[s1], 1.0);
        assert_eq!(evaluate_policy(&model, &b).unwrap()[s1], 0.0);

        let (countdown, _) = fixtures::countdown_chain(3);
        let only = StationaryPolicy::first(&countdown);
        let j = evaluate_policy(&countdown, &only).unwrap();
        assert_eq!(j.values(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn linear_solve_matches_iteration_where_termination_is_certain() {
        let model = crate::model::ModelBuilder::new("geo", "t")
            .state("s1")
            .state("s2")
            .control(
                "s1",
                "a",
                &[(0.5, "s1", 1.0), (0.25, "s2", 2.0), (0.25, "t", 0.5)],
            )
            .control("s2", "a", &[(0.75, "s1", 1.0), (0.25, "t", 3.0)])
            .build()
            .unwrap();
        let mu = StationaryPolicy::first(&model);
        let iterated = evaluate_policy(&model, &mu).unwrap();
        let solved = evaluate_policy_linear(&model, &mu).unwrap();
        assert!(iterated.distance(&solved) < 1e-10);
    }

    #[test]
    fn residuals_on_cycle() {
        let (model, _) = cycle();
        assert_eq!(residual(&model, &at_s1(&model, 0.5), None), 0.0);
        assert_eq!(residual(&model, &at_s1(&model, 1.5), None), 0.5);
        assert_eq!(residual(&model, &at_s1(&model, INF), None), INF);
    }

    #[test]
    fn positively_homogeneous_functions_solve_truncated_example1() {
        let fx = fixtures::example1_chain(0.5, 1.0, 4).unwrap();
        for gamma in [0.5, 1.0, 2.0] {
            let j = fx.homogeneous(gamma);
            let tj = apply_t(&fx.model, &j);
            for &x in &fx.interior {
                assert_eq!(tj[x], j[x]);
            }
            assert_eq!(residual(&fx.model, &j, Some(&fx.interior)), 0.0);
        }
    }

    #[test]
    fn zero_cost_model_never_flags_divergence() {
        let fx = fixtures::example1_chain(0.5, 1.0, 30).unwrap();
        let (j, _) =
            value_iteration(&fx.model, &fx.homogeneous(1.0), &ViOptions::default()).unwrap();
        assert!(j.iter().all(f64::is_finite));
    }
}
