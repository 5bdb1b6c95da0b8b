//! Properness of policies: exact state distributions, non-termination
//! probabilities `r_k`, expected steps to termination, per-state
//! classification, the effective domain and uniform properness.
//!
//! A policy is proper at `x` when both its expected cost and its expected
//! number of steps to reach `t` from `x` are finite. The two conditions are
//! independent and are reported separately.

use serde::Serialize;

use crate::bellman::{self, ViOptions};
use crate::error::{Result, SspError};
use crate::ext::{self, INF};
use crate::model::{SspModel, StateId, TERMINAL};
use crate::perturbation;
use crate::policy::{Policy, StationaryPolicy};
use crate::structure;
use crate::value::ValueFunction;

/// Sweep-change tolerance for the expected-steps iteration.
pub const STEPS_TOL: f64 = 1e-12;

fn propagate(model: &SspModel, mu: &StationaryPolicy, dist: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; dist.len()];
    for (x, &mass) in dist.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for b in &model.control(x, mu.control(x)).branches {
            next[b.next] += mass * b.probability;
        }
    }
    next
}

fn point_mass(model: &SspModel, x0: StateId) -> Vec<f64> {
    let mut dist = vec![0.0; model.num_states()];
    dist[x0] = 1.0;
    dist
}

/// Distributions of `x_0, …, x_k` under `pi` from `x0`.
pub fn distributions(model: &SspModel, pi: &Policy, x0: StateId, k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(point_mass(model, x0));
    for stage in 0..k {
        let next = propagate(model, pi.at(stage), &out[stage]);
        out.push(next);
    }
    out
}

/// Exact distribution of `x_k` under `pi` from `x0`.
pub fn step_distribution(model: &SspModel, pi: &Policy, x0: StateId, k: usize) -> Vec<f64> {
    let mut dist = point_mass(model, x0);
    for stage in 0..k {
        dist = propagate(model, pi.at(stage), &dist);
    }
    dist
}

/// `r_k = P(x_k ≠ t)` for `k = 0..=horizon`.
pub fn nontermination_probs(
    model: &SspModel,
    pi: &Policy,
    x0: StateId,
    horizon: usize,
) -> Vec<f64> {
    distributions(model, pi, x0, horizon)
        .iter()
        .map(|d| d.iter().skip(1).sum())
        .collect()
}

/// `E{J(x_k)}` for `k = 0..=horizon`, with `0 · ∞ = 0`.
pub fn expected_values(
    model: &SspModel,
    pi: &Policy,
    x0: StateId,
    j: &ValueFunction,
    horizon: usize,
) -> Vec<f64> {
    distributions(model, pi, x0, horizon)
        .iter()
        .map(|d| d.iter().enumerate().map(|(x, &p)| ext::mul(p, j[x])).sum())
        .collect()
}

/// Expected cost accumulated over the first `horizon` stages.
pub fn horizon_cost(model: &SspModel, pi: &Policy, x0: StateId, horizon: usize) -> f64 {
    let dists = distributions(model, pi, x0, horizon);
    (0..horizon)
        .map(|k| {
            let mu = pi.at(k);
            dists[k]
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(x, &p)| {
                    p * model
                        .control(x, mu.control(x))
                        .branches
                        .iter()
                        .map(|b| b.probability * b.cost)
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum()
}

/// Expected number of steps to reach `t` under `mu` from every state.
///
/// States from which termination is not certain get `+∞` directly; the rest
/// are computed by the monotone iteration `N ← 1_{x≠t} + Σ p·N(next)` from 0.
pub fn expected_steps(model: &SspModel, mu: &StationaryPolicy) -> Result<ValueFunction> {
    mu.check(model)?;
    let certain = structure::certain_termination_states(model, &structure::policy_controls(mu));
    let opts = ViOptions::default();
    let mut steps = ValueFunction::from_fn(model, |x| if certain[x] { 0.0 } else { INF });
    for _ in 0..opts.max_sweeps {
        let mut change: f64 = 0.0;
        let next = ValueFunction::from_fn(model, |x| {
            if !certain[x] {
                return INF;
            }
            1.0 + model
                .control(x, mu.control(x))
                .branches
                .iter()
                .map(|b| b.probability * steps[b.next])
                .sum::<f64>()
        });
        for x in model.states().filter(|&x| certain[x]) {
            if !next[x].is_finite() {
                return Err(SspError::contract(format!(
                    "expected steps diverge at `{}` although termination is certain",
                    model.label(x)
                )));
            }
            change = change.max((next[x] - steps[x]).abs());
        }
        steps = next;
        if change < STEPS_TOL {
            return Ok(steps);
        }
    }
    Err(SspError::contract(
        "expected-steps iteration did not settle",
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateProperness {
    pub state: String,
    pub proper: bool,
    pub finite_steps: bool,
    pub finite_cost: bool,
    #[serde(serialize_with = "crate::io::serialize_ext")]
    pub expected_steps: f64,
    #[serde(serialize_with = "crate::io::serialize_ext")]
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropernessReport {
    pub states: Vec<StateProperness>,
    /// States where the policy is proper; each `(μ, x)` is a witnessed member
    /// of the set of proper policy/state pairs.
    pub proper_states: Vec<StateId>,
}

impl PropernessReport {
    pub fn is_proper_at(&self, x: StateId) -> bool {
        self.states[x].proper
    }

    pub fn proper_flags(&self) -> Vec<bool> {
        self.states.iter().map(|s| s.proper).collect()
    }
}

pub fn classify(model: &SspModel, mu: &StationaryPolicy) -> Result<PropernessReport> {
    let steps = expected_steps(model, mu)?;
    let cost = bellman::evaluate_policy(model, mu)?;
    let states: Vec<StateProperness> = model
        .states()
        .map(|x| {
            let finite_steps = steps[x].is_finite();
            let finite_cost = cost[x].is_finite();
            StateProperness {
                state: model.label(x).to_string(),
                proper: finite_steps && finite_cost,
                finite_steps,
                finite_cost,
                expected_steps: steps[x],
                cost: cost[x],
            }
        })
        .collect();
    let proper_states = (0..states.len()).filter(|&x| states[x].proper).collect();
    Ok(PropernessReport {
        states,
        proper_states,
    })
}

/// States where some proper policy exists: the finite set of the perturbed
/// optimum, probed at `delta_probe` and `delta_probe / 2`, which must agree.
pub fn effective_domain(model: &SspModel, delta_probe: f64) -> Result<Vec<StateId>> {
    if !(delta_probe > 0.0) {
        return Err(SspError::parameter("delta_probe must be positive"));
    }
    let first = perturbation::solve_perturbed(model, delta_probe)?.finite_states();
    let second = perturbation::solve_perturbed(model, delta_probe / 2.0)?.finite_states();
    if first != second {
        return Err(SspError::contract(
            "finite set of the perturbed optimum depends on the perturbation",
        ));
    }
    Ok(first)
}

/// `(bound < ∞, bound)` where `bound` is the largest expected number of steps
/// over `domain`.
pub fn uniform_properness(
    model: &SspModel,
    mu: &StationaryPolicy,
    domain: &[StateId],
) -> Result<(bool, f64)> {
    let steps = expected_steps(model, mu)?;
    let bound = domain.iter().map(|&x| steps[x]).fold(0.0, f64::max);
    Ok((bound.is_finite(), bound))
}

/// True iff every state reachable from `x` under `mu` has a positive
/// probability path to `t`. Independent of [`expected_steps`]: a forward
/// search followed by a backward search, no fixpoint over strategies.
pub fn graph_oracle(model: &SspModel, mu: &StationaryPolicy, x: StateId) -> bool {
    let reach = model.reachable(x, Some(mu));
    let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); model.num_states()];
    for y in model.states() {
        for b in &model.control(y, mu.control(y)).branches {
            if b.probability > 0.0 {
                reverse[b.next].push(y);
            }
        }
    }
    let mut leads_to_t = vec![false; model.num_states()];
    leads_to_t[TERMINAL] = true;
    let mut stack = vec![TERMINAL];
    while let Some(y) = stack.pop() {
        for &z in &reverse[y] {
            if !leads_to_t[z] {
                leads_to_t[z] = true;
                stack.push(z);
            }
        }
    }
    reach.into_iter().all(|y| leads_to_t[y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cycle_policies() -> (SspModel, StationaryPolicy, StationaryPolicy) {
        let (model, _) = fixtures::cycle_fixture();
        let a = StationaryPolicy::from_labels(&model, &[("s1", "a")]).unwrap();
        let b = StationaryPolicy::from_labels(&model, &[("s1", "b")]).unwrap();
        (model, a, b)
    }

    #[test]
    fn distributions_on_fixtures() {
        let (model, a, _) = cycle_policies();
        assert_eq!(
            step_distribution(&model, &a.clone().into(), 1, 1),
            vec![1.0, 0.0]
        );
        assert_eq!(
            step_distribution(&model, &a.into(), TERMINAL, 7),
            vec![1.0, 0.0]
        );

        let fx = fixtures::example1_chain(0.5, 1.0, 4).unwrap();
        let pi: Policy = StationaryPolicy::first(&fx.model).into();
        let d = step_distribution(&fx.model, &pi, fx.root, 2);
        let four = fx.model.state("4").unwrap();
        assert_eq!(d[TERMINAL], 0.75);
        assert_eq!(d[four], 0.25);
        assert_eq!(d.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn nontermination_sequences() {
        let (countdown, _) = fixtures::countdown_chain(3);
        let pi: Policy = StationaryPolicy::first(&countdown).into();
        let r = nontermination_probs(&countdown, &pi, 3, 5);
        assert_eq!(r, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            nontermination_probs(&countdown, &pi, TERMINAL, 3),
            vec![0.0; 4]
        );

        let fx = fixtures::example1_chain(0.5, 1.0, 6).unwrap();
        let pi: Policy = StationaryPolicy::first(&fx.model).into();
        let r = nontermination_probs(&fx.model, &pi, fx.root, 6);
        for (k, rk) in r.iter().enumerate() {
            assert_eq!(*rk, 0.5f64.powi(k as i32));
        }
    }

    #[test]
    fn expected_steps_on_fixtures() {
        let (countdown, _) = fixtures::countdown_chain(4);
        let n = expected_steps(&countdown, &StationaryPolicy::first(&countdown)).unwrap();
        assert_eq!(n.values(), &[0.0, 1.0, 2.0, 3.0, 4.0]);

        let (model, a, b) = cycle_policies();
        assert_eq!(expected_steps(&model, &a).unwrap()[1], 1.0);
        assert_eq!(expected_steps(&model, &b).unwrap()[1], INF);

        // deep truncation approximates the untruncated geometric series Σ α^k = 2
        let fx = fixtures::example1_chain(0.5, 1.0, 40).unwrap();
        let n = expected_steps(&fx.model, &StationaryPolicy::first(&fx.model)).unwrap();
        assert!((n[fx.root] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn classification_separates_the_two_conditions() {
        let (model, a, b) = cycle_policies();
        let ra = classify(&model, &a).unwrap();
        assert!(ra.is_proper_at(1));
        assert_eq!(ra.states[1].expected_steps, 1.0);
        assert_eq!(ra.states[1].cost, 1.0);
        let rb = classify(&model, &b).unwrap();
        assert!(!rb.is_proper_at(1));
        assert!(rb.states[1].finite_cost);
        assert!(!rb.states[1].finite_steps);
        assert!(rb.is_proper_at(TERMINAL));
        assert_eq!(rb.proper_states, vec![TERMINAL]);

        let (countdown, _) = fixtures::countdown_chain(5);
        let r = classify(&countdown, &StationaryPolicy::first(&countdown)).unwrap();
        assert!(r.proper_flags().iter().all(|p| *p));
    }

    #[test]
    fn effective_domains() {
        let (model, _, _) = cycle_policies();
        assert_eq!(effective_domain(&model, 0.1).unwrap(), vec![0, 1]);
        let trap = fixtures::unreachable_fixture();
        let s2 = trap.state("s2").unwrap();
        assert!(!effective_domain(&trap, 0.1).unwrap().contains(&s2));
        let (countdown, _) = fixtures::countdown_chain(6);
        assert_eq!(effective_domain(&countdown, 0.1).unwrap().len(), 7);
        assert!(effective_domain(&countdown, 0.0).is_err());
    }

    #[test]
    fn uniform_bounds() {
        let (model, a, b) = cycle_policies();
        assert_eq!(
            uniform_properness(&model, &a, &[0, 1]).unwrap(),
            (true, 1.0)
        );
        assert_eq!(uniform_properness(&model, &b, &[1]).unwrap(), (false, INF));
        for n in [10, 50] {
            let (countdown, _) = fixtures::countdown_chain(n);
            let all: Vec<_> = countdown.states().collect();
            let mu = StationaryPolicy::first(&countdown);
            assert_eq!(
                uniform_properness(&countdown, &mu, &all).unwrap(),
                (true, n as f64)
            );
        }
    }

    #[test]
    fn oracle_on_cycle() {
        let (model, a, b) = cycle_policies();
        assert!(!graph_oracle(&model, &b, 1));
        assert!(graph_oracle(&model, &a, 1));
        assert!(graph_oracle(&model, &b, TERMINAL));
    }

    #[test]
    fn tail_cost_decays_for_proper_policy() {
        let model = crate::model::ModelBuilder::new("geo", "t")
            .state("s1")
            .control("s1", "a", &[(0.5, "s1", 1.0), (0.5, "t", 1.0)])
            .build()
            .unwrap();
        let mu = StationaryPolicy::first(&model);
        let j = bellman::evaluate_policy(&model, &mu).unwrap();
        let e = expected_values(&model, &mu.into(), 1, &j, 20);
        assert!((e[0] - 2.0).abs() < 1e-11);
        for k in 1..e.len() {
            assert!((e[k] - e[k - 1] * 0.5).abs() < 1e-12);
        }
        assert!(e[20] < 1e-5);
    }

    #[test]
    fn horizon_cost_matches_policy_cost() {
        let (countdown, _) = fixtures::countdown_chain(3);
        let pi: Policy = StationaryPolicy::first(&countdown).into();
        assert_eq!(horizon_cost(&countdown, &pi, 3, 10), 3.0);
        assert_eq!(horizon_cost(&countdown, &pi, 3, 2), 2.0);
    }
}
