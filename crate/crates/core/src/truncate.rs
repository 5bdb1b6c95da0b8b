//! Finite windows onto models with countably many states.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use crate::error::{Result, SspError};
use crate::model::{Control, OutcomeBranch, SspModel, StateId, PROBABILITY_SUM_TOL, TERMINAL};

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedBranch<T> {
    pub probability: f64,
    pub next: T,
    pub cost: f64,
}

impl<T> GeneratedBranch<T> {
    pub fn new(probability: f64, next: T, cost: f64) -> Self {
        Self {
            probability,
            next,
            cost,
        }
    }
}

/// A model described by a successor procedure over state tokens.
pub trait CountableGenerator {
    type Token: Clone + Eq + Hash;

    fn label(&self, token: &Self::Token) -> String;

    /// Tokens mapped onto the termination state.
    fn is_terminal(&self, token: &Self::Token) -> bool;

    /// Controls available at `token` with their outcome branches.
    fn expand(&self, token: &Self::Token) -> Vec<(String, Vec<GeneratedBranch<Self::Token>>)>;
}

#[derive(Clone, Debug)]
pub struct Truncation<T> {
    pub model: SspModel,
    /// States whose successors all belong to the model, sorted.
    pub interior: Vec<StateId>,
    /// Token of each state (`None` for `t`).
    pub tokens: Vec<Option<T>>,
}

fn check_branches<G: CountableGenerator>(
    gen: &G,
    token: &G::Token,
    control: &str,
    branches: &[GeneratedBranch<G::Token>],
) -> Result<()> {
    let fail = |reason: String| SspError::Generator {
        token: gen.label(token),
        reason: format!("control `{control}`: {reason}"),
    };
    if branches.is_empty() {
        return Err(fail("no outcome branches".into()));
    }
    let mut total = 0.0;
    for b in branches {
        if !(b.probability > 0.0 && b.probability <= 1.0) {
            return Err(fail(format!(
                "branch probability {} outside (0, 1]",
                b.probability
            )));
        }
        if !(b.cost.is_finite() && b.cost >= 0.0) {
            return Err(fail(format!(
                "stage cost {} is not finite and nonnegative",
                b.cost
            )));
        }
        total += b.probability;
    }
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(fail(format!("probabilities do not sum to 1 (sum {total})")));
    }
    Ok(())
}

/// Keeps every token reachable from `roots` in at most `depth` transitions.
///
/// Tokens first reached after exactly `depth` transitions are boundary
/// states: they keep their controls, but every control moves to `t` at zero
/// cost. All other states are interior.
pub fn truncate<G: CountableGenerator>(
    gen: &G,
    roots: &[G::Token],
    depth: usize,
) -> Result<Truncation<G::Token>> {
    if depth == 0 {
        return Err(SspError::parameter("truncation depth must be at least 1"));
    }
    let mut labels = vec!["t".to_string()];
    let mut tokens: Vec<Option<G::Token>> = vec![None];
    let mut index: HashMap<G::Token, StateId> = HashMap::new();
    let mut levels = vec![0usize];
    let mut queue = VecDeque::new();

    let mut intern = |token: &G::Token,
                      level: usize,
                      labels: &mut Vec<String>,
                      tokens: &mut Vec<Option<G::Token>>,
                      levels: &mut Vec<usize>,
                      queue: &mut VecDeque<StateId>| {
        if gen.is_terminal(token) {
            return TERMINAL;
        }
        if let Some(&x) = index.get(token) {
            return x;
        }
        let x = labels.len();
        labels.push(gen.label(token));
        tokens.push(Some(token.clone()));
        levels.push(level);
        index.insert(token.clone(), x);
        queue.push_back(x);
        x
    };

    for root in roots {
        intern(root, 0, &mut labels, &mut tokens, &mut levels, &mut queue);
    }

    let mut rows: Vec<Vec<Control>> = vec![vec![Control::new(
        "stay",
        vec![OutcomeBranch::new(1.0, TERMINAL, 0.0)],
    )]];
    let mut interior = Vec::new();
    while let Some(x) = queue.pop_front() {
        let token = tokens[x]
            .clone()
            .expect("non-terminal states carry a token");
        let expanded = gen.expand(&token);
        if expanded.is_empty() {
            return Err(SspError::Generator {
                token: gen.label(&token),
                reason: "no controls".into(),
            });
        }
        let boundary = levels[x] >= depth;
        let mut row = Vec::with_capacity(expanded.len());
        for (label, branches) in expanded {
            check_branches(gen, &token, &label, &branches)?;
            let branches = if boundary {
                vec![OutcomeBranch::new(1.0, TERMINAL, 0.0)]
            } else {
                branches
                    .iter()
                    .map(|b| {
                        let next = intern(
                            &b.next,
                            levels[x] + 1,
                            &mut labels,
                            &mut tokens,
                            &mut levels,
                            &mut queue,
                        );
                        OutcomeBranch::new(b.probability, next, b.cost)
                    })
                    .collect()
            };
            row.push(Control::new(label, branches));
        }
        if !boundary {
            interior.push(x);
        }
        rows.push(row);
    }
    // rows were pushed in queue order, which is index order
    let model = SspModel::new("truncation", labels, rows)?;
    interior.sort_unstable();
    Ok(Truncation {
        model,
        interior,
        tokens,
    })
}
