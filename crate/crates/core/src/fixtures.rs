//! Reference instances with known answers, plus a seeded random generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SspError};
use crate::model::{Control, ModelBuilder, OutcomeBranch, SspModel, StateId, TERMINAL};
use crate::policy::StationaryPolicy;
use crate::truncate::{self, CountableGenerator, GeneratedBranch};
use crate::value::ValueFunction;

/// Expected answers for a fixture.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureCertificate {
    pub jstar: ValueFunction,
    pub jhat: ValueFunction,
    /// Per listed policy, whether it is proper at each state.
    pub properness: Vec<(StationaryPolicy, Vec<bool>)>,
    pub note: String,
}

/// `t` alone.
pub fn terminal_only() -> SspModel {
    ModelBuilder::new("terminal-only", "t")
        .build()
        .expect("terminal-only model is valid")
}

/// States `{t, s1}`; at `s1`, control `a` moves to `t` at cost 1 and control
/// `b` stays at `s1` for free. `J*(s1) = 0` (via the improper `b`),
/// `Ĵ(s1) = 1`, and every value in `[0, 1]` solves Bellman's equation at `s1`.
pub fn cycle_fixture() -> (SspModel, FixtureCertificate) {
    let model = ModelBuilder::new("cycle", "t")
        .state("s1")
        .control("s1", "a", &[(1.0, "t", 1.0)])
        .control("s1", "b", &[(1.0, "s1", 0.0)])
        .build()
        .expect("cycle fixture is valid");
    let a = StationaryPolicy::from_labels(&model, &[("s1", "a")]).expect("a exists");
    let b = StationaryPolicy::from_labels(&model, &[("s1", "b")]).expect("b exists");
    let cert = FixtureCertificate {
        jstar: ValueFunction::new(vec![0.0, 0.0]),
        jhat: ValueFunction::new(vec![0.0, 1.0]),
        properness: vec![(a, vec![true, true]), (b, vec![true, false])],
        note: "fixed-point set at s1 is [0, 1]".into(),
    };
    (model, cert)
}

/// The cycle fixture plus a state `s2` whose only control is a free
/// self-loop, so no proper policy exists there.
pub fn unreachable_fixture() -> SspModel {
    ModelBuilder::new("cycle-with-trap", "t")
        .state("s1")
        .state("s2")
        .control("s1", "a", &[(1.0, "t", 1.0)])
        .control("s1", "b", &[(1.0, "s1", 0.0)])
        .control("s2", "stay", &[(1.0, "s2", 0.0)])
        .build()
        .expect("trap fixture is valid")
}

/// `s1` hops to `t` for free, `s2` hops to `s1` at cost 1.
pub fn lump_example() -> SspModel {
    ModelBuilder::new("lump-example", "t")
        .state("s1")
        .state("s2")
        .control("s1", "go", &[(1.0, "t", 0.0)])
        .control("s2", "go", &[(1.0, "s1", 1.0)])
        .build()
        .expect("lump example is valid")
}

/// Deterministic chain `x → x − 1` at cost 1 on states `0..=n`, `t = 0`.
pub fn countdown_chain(n: usize) -> (SspModel, FixtureCertificate) {
    let labels: Vec<String> = (0..=n).map(|x| x.to_string()).collect();
    let controls = (0..=n)
        .map(|x| {
            if x == 0 {
                vec![Control::new(
                    "stay",
                    vec![OutcomeBranch::new(1.0, TERMINAL, 0.0)],
                )]
            } else {
                vec![Control::new(
                    "down",
                    vec![OutcomeBranch::new(1.0, x - 1, 1.0)],
                )]
            }
        })
        .collect();
    let model = SspModel::new(format!("countdown-{n}"), labels, controls)
        .expect("countdown chain is valid");
    let identity = ValueFunction::new((0..=n).map(|x| x as f64).collect());
    let cert = FixtureCertificate {
        jstar: identity.clone(),
        jhat: identity,
        properness: vec![(StationaryPolicy::first(&model), vec![true; n + 1])],
        note: format!("J* = Ĵ = x, expected steps = x, uniform bound {n}"),
    };
    (model, cert)
}

/// Countdown as a generator over the nonnegative integers.
pub struct Countdown;

impl CountableGenerator for Countdown {
    type Token = u64;

    fn label(&self, token: &u64) -> String {
        token.to_string()
    }

    fn is_terminal(&self, token: &u64) -> bool {
        *token == 0
    }

    fn expand(&self, token: &u64) -> Vec<(String, Vec<GeneratedBranch<u64>>)> {
        vec![(
            "down".into(),
            vec![GeneratedBranch::new(1.0, token - 1, 1.0)],
        )]
    }
}

/// Finite control grid `u ∈ {0, 1/m, …, 1}` at a single state: `u > 0`
/// stops at cost `u`, `u = 0` stays for free. `J*(s1) = 0` is attained only
/// by the improper "stay", while `Ĵ(s1) = 1/m`.
pub fn stopping_grid(m: usize) -> (SspModel, FixtureCertificate) {
    assert!(m >= 1, "grid needs at least one positive control");
    let stay = Control::new("0", vec![OutcomeBranch::new(1.0, 1, 0.0)]);
    let stops = (1..=m).map(|k| {
        let u = k as f64 / m as f64;
        Control::new(
            format!("{k}/{m}"),
            vec![OutcomeBranch::new(1.0, TERMINAL, u)],
        )
    });
    let controls = vec![
        vec![Control::new(
            "stay",
            vec![OutcomeBranch::new(1.0, TERMINAL, 0.0)],
        )],
        std::iter::once(stay).chain(stops).collect(),
    ];
    let model = SspModel::new(
        format!("stopping-grid-{m}"),
        vec!["t".into(), "s1".into()],
        controls,
    )
    .expect("stopping grid is valid");
    let smallest = StationaryPolicy::new(&model, vec![0, 1]).expect("u = 1/m exists");
    let stay = StationaryPolicy::first(&model);
    let cert = FixtureCertificate {
        jstar: ValueFunction::new(vec![0.0, 0.0]),
        jhat: ValueFunction::new(vec![0.0, 1.0 / m as f64]),
        properness: vec![(stay, vec![true, false]), (smallest, vec![true, true])],
        note: format!("fixed-point set at s1 is [0, 1/{m}]"),
    };
    (model, cert)
}

/// The multiplicative chain `x → x/α` (probability α) or `→ t`
/// (probability 1 − α), all costs zero. Tokens are the exponent `k` of
/// `x0 / α^k`; `u32::MAX` stands for the destination.
pub struct Example1Generator {
    pub alpha: f64,
    pub x0: f64,
}

impl Example1Generator {
    pub const DESTINATION: u32 = u32::MAX;

    pub fn point(&self, k: u32) -> f64 {
        self.x0 / self.alpha.powi(k as i32)
    }
}

impl CountableGenerator for Example1Generator {
    type Token = u32;

    fn label(&self, token: &u32) -> String {
        format!("{}", self.point(*token))
    }

    fn is_terminal(&self, token: &u32) -> bool {
        *token == Self::DESTINATION
    }

    fn expand(&self, token: &u32) -> Vec<(String, Vec<GeneratedBranch<u32>>)> {
        vec![(
            "only".into(),
            vec![
                GeneratedBranch::new(self.alpha, token + 1, 0.0),
                GeneratedBranch::new(1.0 - self.alpha, Self::DESTINATION, 0.0),
            ],
        )]
    }
}

#[derive(Clone, Debug)]
pub struct Example1 {
    pub model: SspModel,
    pub interior: Vec<StateId>,
    pub root: StateId,
    /// The real number each state stands for (0 at `t`).
    pub points: Vec<f64>,
    pub certificate: FixtureCertificate,
}

impl Example1 {
    /// `γ|x|`, a solution of Bellman's equation on the interior for any γ.
    pub fn homogeneous(&self, gamma: f64) -> ValueFunction {
        ValueFunction::new(self.points.iter().map(|x| gamma * x.abs()).collect())
    }
}

/// Depth-limited window of the multiplicative chain started at `x0`.
pub fn example1_chain(alpha: f64, x0: f64, depth: usize) -> Result<Example1> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SspError::parameter(format!("alpha {alpha} outside (0, 1)")));
    }
    if x0 == 0.0 || !x0.is_finite() {
        return Err(SspError::parameter("x0 must be finite and nonzero"));
    }
    if depth < 2 {
        return Err(SspError::parameter("depth must be at least 2"));
    }
    let gen = Example1Generator { alpha, x0 };
    let window = truncate::truncate(&gen, &[0], depth)?;
    let points = window
        .tokens
        .iter()
        .map(|t| t.map_or(0.0, |k| gen.point(k)))
        .collect();
    let n = window.model.num_states();
    let only = StationaryPolicy::first(&window.model);
    let model = window
        .model
        .with_name(format!("example1-a{alpha}-x{x0}-d{depth}"));
    Ok(Example1 {
        model,
        interior: window.interior,
        root: 1,
        points,
        certificate: FixtureCertificate {
            jstar: ValueFunction::zeros(n),
            jhat: ValueFunction::zeros(n),
            properness: vec![(only, vec![true; n])],
            note: "γ|x| solves Bellman's equation on the interior for every γ > 0".into(),
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSspParams {
    pub seed: u64,
    /// Number of states besides `t`.
    pub n_states: usize,
    pub max_controls: usize,
    pub max_branches: usize,
    /// Chance that a control of an exit-capable state has a branch to `t`.
    pub p_edge_to_t: f64,
    pub cost_max: f64,
}

impl Default for RandomSspParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n_states: 5,
            max_controls: 2,
            max_branches: 3,
            p_edge_to_t: 0.5,
            cost_max: 2.0,
        }
    }
}

/// Random valid model, identical for identical parameters.
///
/// Only a random subset of states may move to `t` directly, so both proper
/// and improper policies show up. Costs are multiples of 1/16 (a quarter of
/// them zero) and branch weights are small integers.
pub fn random_ssp(params: &RandomSspParams) -> Result<SspModel> {
    let RandomSspParams {
        seed,
        n_states,
        max_controls,
        max_branches,
        p_edge_to_t,
        cost_max,
    } = *params;
    if n_states == 0 || max_controls == 0 || max_branches == 0 {
        return Err(SspError::parameter("random model sizes must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p_edge_to_t) {
        return Err(SspError::parameter("p_edge_to_t must lie in [0, 1]"));
    }
    if !(cost_max >= 0.0 && cost_max.is_finite()) {
        return Err(SspError::parameter(
            "cost_max must be finite and nonnegative",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost_steps = (cost_max * 16.0).floor() as u32;
    let exits: Vec<bool> = (0..n_states).map(|_| rng.gen_bool(0.5)).collect();
    let mut labels = vec!["t".to_string()];
    labels.extend((1..=n_states).map(|i| format!("s{i}")));
    let mut controls = vec![vec![Control::new(
        "stay",
        vec![OutcomeBranch::new(1.0, TERMINAL, 0.0)],
    )]];
    for x in 1..=n_states {
        let k = rng.gen_range(1..=max_controls);
        let row = (0..k)
            .map(|u| {
                let nb = rng.gen_range(1..=max_branches);
                let to_t = exits[x - 1] && rng.gen_bool(p_edge_to_t);
                let weights: Vec<u32> = (0..nb).map(|_| rng.gen_range(1..=4)).collect();
                let total: u32 = weights.iter().sum();
                let branches = weights
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| {
                        let next = if i == 0 && to_t {
                            TERMINAL
                        } else {
                            rng.gen_range(1..=n_states)
                        };
                        let cost = if rng.gen_bool(0.25) {
                            0.0
                        } else {
                            rng.gen_range(0..=cost_steps) as f64 / 16.0
                        };
                        OutcomeBranch::new(w as f64 / total as f64, next, cost)
                    })
                    .collect();
                Control::new(format!("u{u}"), branches)
            })
            .collect();
        controls.push(row);
    }
    SspModel::new(format!("random-{seed}"), labels, controls)
}

/// Corpus used by the property suites: `count` models with at most
/// `max_total_states` states (including `t`), seeds `base_seed..`.
pub fn random_corpus(count: usize, max_total_states: usize, base_seed: u64) -> Vec<SspModel> {
    (0..count as u64)
        .map(|i| {
            let seed = base_seed + i;
            let mut sizer = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let params = RandomSspParams {
                seed,
                n_states: sizer.gen_range(1..max_total_states.max(2)),
                ..Default::default()
            };
            random_ssp(&params).expect("corpus parameters are valid")
        })
        .collect()
}
