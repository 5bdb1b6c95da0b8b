//! The δ-perturbed problem: every stage cost away from `t` is raised by δ,
//! which makes improper behavior infinitely costly. Its optimum `Ĵ_δ` is
//! finite exactly where a proper policy exists and decreases to `Ĵ`, the
//! optimal cost over proper policies, as δ ↓ 0.

use rayon::prelude::*;
use serde::Serialize;

use crate::bellman::{self, ViOptions};
use crate::error::{Result, SspError};
use crate::ext::{self, INF};
use crate::model::{SspModel, StateId, TERMINAL};
use crate::policy::StationaryPolicy;
use crate::properness;
use crate::value::ValueFunction;

pub const DEFAULT_SCHEDULE: [f64; 7] = [1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001];

/// Slack allowed when checking `J_μ ≤ Ĵ_δ` for an extracted policy.
const EXTRACT_TOL: f64 = 1e-8;

pub fn perturb(model: &SspModel, delta: f64) -> Result<SspModel> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(SspError::parameter(format!(
            "perturbation {delta} must be positive"
        )));
    }
    Ok(model.map_costs(model.name().to_string(), |x, cost| {
        if x == TERMINAL {
            cost
        } else {
            cost + delta
        }
    }))
}

/// `Ĵ_δ`: value iteration from zero on the perturbed model.
pub fn solve_perturbed(model: &SspModel, delta: f64) -> Result<ValueFunction> {
    let perturbed = perturb(model, delta)?;
    let (j, _) = bellman::value_iteration(
        &perturbed,
        &ValueFunction::zeros(model.num_states()),
        &ViOptions::default(),
    )?;
    Ok(j)
}

/// Which parameter a [`SweepResult`] tabulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Delta,
    Alpha,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub schedule: Vec<f64>,
    pub values: Vec<ValueFunction>,
    /// Extrapolated limit (δ sweep) or last value (α homotopy).
    pub limit: ValueFunction,
    /// Value at the last schedule entry, before any extrapolation.
    pub raw_last: ValueFunction,
    /// Per state: whether the values move monotonically in the expected
    /// direction (nondecreasing in δ, nondecreasing in α).
    pub monotone: Vec<bool>,
}

impl SweepResult {
    pub fn is_monotone(&self) -> bool {
        self.monotone.iter().all(|m| *m)
    }

    pub fn value_at(&self, i: usize, x: StateId) -> f64 {
        self.values[i][x]
    }
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(SspError::parameter("empty δ schedule"));
    }
    if schedule.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(SspError::parameter("δ schedule entries must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SspError::parameter(
            "δ schedule must be strictly decreasing",
        ));
    }
    Ok(())
}

/// Linear extrapolation to δ = 0 through the two smallest schedule points,
/// clamped to `[0, Ĵ_{δ_min}]`.
fn extrapolate(d1: f64, v1: f64, d2: f64, v2: f64) -> f64 {
    if v1.is_infinite() || v2.is_infinite() {
        return INF;
    }
    let slope = (v1 - v2) / (d1 - d2);
    (v2 - d2 * slope).clamp(0.0, v2)
}

/// Solves every δ in `schedule` (strictly decreasing) and extrapolates the
/// per-state limit.
pub fn delta_sweep(model: &SspModel, schedule: &[f64]) -> Result<SweepResult> {
    check_schedule(schedule)?;
    let values = schedule
        .par_iter()
        .map(|&d| solve_perturbed(model, d))
        .collect::<Result<Vec<_>>>()?;
    let last = values.len() - 1;
    let limit = if last == 0 {
        values[0].clone()
    } else {
        ValueFunction::new(
            model
                .states()
                .map(|x| {
                    extrapolate(
                        schedule[last - 1],
                        values[last - 1][x],
                        schedule[last],
                        values[last][x],
                    )
                })
                .collect(),
        )
    };
    let monotone = model
        .states()
        .map(|x| {
            values
                .windows(2)
                .all(|w| ext::le_tol(w[1][x], w[0][x], 0.0))
        })
        .collect();
    Ok(SweepResult {
        kind: SweepKind::Delta,
        schedule: schedule.to_vec(),
        raw_last: values[last].clone(),
        values,
        limit,
        monotone,
    })
}

/// Greedy policy for `Ĵ_δ` on the perturbed model. It must be proper at
/// every state of the effective domain and its unperturbed cost must not
/// exceed `Ĵ_δ` there.
pub fn proper_policy_extract(model: &SspModel, delta: f64) -> Result<StationaryPolicy> {
    let perturbed = perturb(model, delta)?;
    let j_delta = solve_perturbed(model, delta)?;
    let mu = bellman::greedy(&perturbed, &j_delta);
    let report = properness::classify(model, &mu)?;
    for x in j_delta.finite_states() {
        if !report.is_proper_at(x) {
            return Err(SspError::contract(format!(
                "extracted policy is improper at `{}` inside the effective domain",
                model.label(x)
            )));
        }
        if !ext::le_tol(report.states[x].cost, j_delta[x], EXTRACT_TOL) {
            return Err(SspError::contract(format!(
                "extracted policy costs {} > Ĵ_δ = {} at `{}`",
                report.states[x].cost,
                j_delta[x],
                model.label(x)
            )));
        }
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn perturbation_shifts_non_terminal_costs() {
        let (model, _) = fixtures::cycle_fixture();
        let p = perturb(&model, 0.1).unwrap();
        let costs: Vec<f64> = p.controls(1).iter().map(|c| c.branches[0].cost).collect();
        assert_eq!(costs, vec![1.1, 0.1]);
        assert_eq!(p.controls(TERMINAL)[0].branches[0].cost, 0.0);
        assert!(p.validate().is_valid());
        assert!(perturb(&model, 0.0).is_err());
        assert!(perturb(&model, -1.0).is_err());

        let t_only = fixtures::terminal_only();
        assert_eq!(perturb(&t_only, 0.5).unwrap(), t_only);
    }

    #[test]
    fn perturbed_optimum_closed_forms() {
        let (model, _) = fixtures::cycle_fixture();
        assert_eq!(solve_perturbed(&model, 0.1).unwrap()[1], 1.0 + 0.1);
        assert_eq!(solve_perturbed(&model, 0.5).unwrap()[1], 1.5);
        let (countdown, _) = fixtures::countdown_chain(5);
        let d = 0.25;
        let j = solve_perturbed(&countdown, d).unwrap();
        for x in 1..=5 {
            assert!((j[x] - x as f64 * (1.0 + d)).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_on_cycle_is_affine() {
        let (model, _) = fixtures::cycle_fixture();
        let sweep = delta_sweep(&model, &[1.0, 0.5, 0.1, 0.01]).unwrap();
        let got: Vec<f64> = (0..4).map(|i| sweep.value_at(i, 1)).collect();
        assert_eq!(got, vec![2.0, 1.5, 1.0 + 0.1, 1.0 + 0.01]);
        assert!((sweep.limit[1] - 1.0).abs() < 1e-9);
        assert!(sweep.is_monotone());
        assert_eq!(sweep.raw_last[1], 1.01);
    }

    #[test]
    fn sweep_without_proper_policy_stays_infinite() {
        let model = fixtures::unreachable_fixture();
        let s2 = model.state("s2").unwrap();
        let sweep = delta_sweep(&model, &[0.5, 0.1]).unwrap();
        assert!(sweep.values.iter().all(|v| v[s2] == INF));
        assert_eq!(sweep.limit[s2], INF);
    }

    #[test]
    fn schedule_must_decrease() {
        let (model, _) = fixtures::cycle_fixture();
        assert!(delta_sweep(&model, &[0.1, 0.5]).is_err());
        assert!(delta_sweep(&model, &[]).is_err());
        assert!(delta_sweep(&model, &[0.1, -0.1]).is_err());
    }

    #[test]
    fn extraction_picks_proper_controls() {
        let (model, _) = fixtures::cycle_fixture();
        for d in [1.0, 0.1, 0.001] {
            let mu = proper_policy_extract(&model, d).unwrap();
            assert_eq!(model.control(1, mu.control(1)).label, "a");
        }
        let (grid, _) = fixtures::stopping_grid(10);
        let mu = proper_policy_extract(&grid, 0.01).unwrap();
        let j = bellman::evaluate_policy(&grid, &mu).unwrap();
        assert_eq!(mu.control(1), 1);
        assert_eq!(j[1], 0.1);
    }
}
