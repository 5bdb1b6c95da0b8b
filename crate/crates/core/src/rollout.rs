//! Seeded Monte Carlo rollouts.
//!
//! Run `i` draws from its own ChaCha stream (master seed, stream `i`), so the
//! estimates do not depend on how runs are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SspError};
use crate::model::{SspModel, StateId, TERMINAL};
use crate::policy::Policy;
use crate::value::ValueFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "crate::io::serialize_ext")]
    pub mean: f64,
    #[serde(serialize_with = "crate::io::serialize_ext")]
    pub std_error: f64,
}

impl Estimate {
    /// Mean and standard error of the sample mean.
    pub fn from_samples(samples: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
        for s in samples {
            if s.is_infinite() {
                return Estimate {
                    mean: f64::INFINITY,
                    std_error: f64::INFINITY,
                };
            }
            n += 1.0;
            let d = s - mean;
            mean += d / n;
            m2 += d * (s - mean);
        }
        let std_error = if n > 1.0 {
            (m2 / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Estimate { mean, std_error }
    }

    /// `|mean − exact| ≤ k · std_error`, with a floor of `1e-12` so that
    /// deterministic outcomes (zero spread) compare exactly.
    pub fn within(&self, exact: f64, k: f64) -> bool {
        if exact.is_infinite() || self.mean.is_infinite() {
            return exact == self.mean;
        }
        (self.mean - exact).abs() <= k * self.std_error + 1e-12
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RolloutEstimates {
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Cost accumulated over stages `0..horizon`.
    pub cost: Estimate,
    /// `P(x_k ≠ t)` for `k = 0..=horizon`.
    pub nontermination: Vec<Estimate>,
    /// `E{J(x_k)}` for `k = 0..=horizon`, when a function was supplied.
    pub expected_value: Option<Vec<Estimate>>,
}

struct Path {
    cost: f64,
    states: Vec<StateId>,
}

fn simulate(
    model: &SspModel,
    pi: &Policy,
    x0: StateId,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> Path {
    let mut states = Vec::with_capacity(horizon + 1);
    let mut x = x0;
    let mut cost = 0.0;
    states.push(x);
    for k in 0..horizon {
        if x == TERMINAL {
            states.push(x);
            continue;
        }
        let branches = &model.control(x, pi.at(k).control(x)).branches;
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = branches.last().expect("validated control has branches");
        for b in branches {
            acc += b.probability;
            if draw < acc {
                chosen = b;
                break;
            }
        }
        cost += chosen.cost;
        x = chosen.next;
        states.push(x);
    }
    Path { cost, states }
}

pub fn rollout(
    model: &SspModel,
    pi: &Policy,
    x0: StateId,
    horizon: usize,
    n_runs: usize,
    seed: u64,
    j: Option<&ValueFunction>,
) -> Result<RolloutEstimates> {
    if horizon == 0 || n_runs == 0 {
        return Err(SspError::parameter(
            "horizon and run count must be at least 1",
        ));
    }
    if x0 >= model.num_states() {
        return Err(SspError::parameter(format!(
            "start state {x0} out of range"
        )));
    }
    pi.check(model)?;
    let paths: Vec<Path> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64);
            simulate(model, pi, x0, horizon, &mut rng)
        })
        .collect();
    let cost = Estimate::from_samples(paths.iter().map(|p| p.cost));
    let nontermination = (0..=horizon)
        .map(|k| {
            Estimate::from_samples(paths.iter().map(|p| {
                if p.states[k] == TERMINAL {
                    0.0
                } else {
                    1.0
                }
            }))
        })
        .collect();
    let expected_value = j.map(|j| {
        (0..=horizon)
            .map(|k| Estimate::from_samples(paths.iter().map(|p| j[p.states[k]])))
            .collect()
    });
    Ok(RolloutEstimates {
        runs: n_runs,
        horizon,
        seed,
        cost,
        nontermination,
        expected_value,
    })
}
