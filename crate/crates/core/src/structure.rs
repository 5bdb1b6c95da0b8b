//! Graph-level analysis of finite models: which states can be driven to a
//! target set with probability one, and which states sit in cost-free end
//! components. These sets decide exactly where value functions are infinite,
//! so the iterative solvers never have to chase a divergent sequence.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::model::{SspModel, StateId, TERMINAL};
use crate::policy::StationaryPolicy;

/// Controls the analysis may use at each state.
pub type ControlSets = Vec<Vec<usize>>;

pub fn all_controls(model: &SspModel) -> ControlSets {
    model
        .states()
        .map(|x| (0..model.controls(x).len()).collect())
        .collect()
}

pub fn policy_controls(mu: &StationaryPolicy) -> ControlSets {
    mu.choices().iter().map(|&u| vec![u]).collect()
}

/// States from which some strategy over `allowed` reaches `target` with
/// probability one. With a single control per state this is the set of
/// states of a Markov chain that hit `target` almost surely.
pub fn almost_sure_reach(model: &SspModel, allowed: &ControlSets, target: &[bool]) -> Vec<bool> {
    let n = model.num_states();
    let mut region = vec![true; n];
    loop {
        // controls that keep the process inside the current region
        let safe: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                allowed[x]
                    .iter()
                    .copied()
                    .filter(|&u| model.control(x, u).branches.iter().all(|b| region[b.next]))
                    .collect()
            })
            .collect();
        // backward positive-probability attractor of the target using safe controls
        let mut attract: Vec<bool> = (0..n).map(|x| target[x] && region[x]).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for x in 0..n {
                if attract[x] || !region[x] {
                    continue;
                }
                let hits = safe[x].iter().any(|&u| {
                    model
                        .control(x, u)
                        .branches
                        .iter()
                        .any(|b| b.probability > 0.0 && attract[b.next])
                });
                if hits {
                    attract[x] = true;
                    changed = true;
                }
            }
        }
        if attract == region {
            return region;
        }
        region = attract;
    }
}

/// States lying in an end component built only from cost-free controls in
/// `allowed`: the process can remain there forever without paying anything.
pub fn cost_free_end_components(model: &SspModel, allowed: &ControlSets) -> Vec<bool> {
    let n = model.num_states();
    let mut active: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            allowed[x]
                .iter()
                .copied()
                .filter(|&u| model.control(x, u).is_cost_free())
                .collect()
        })
        .collect();
    loop {
        let mut graph = DiGraph::<StateId, ()>::with_capacity(n, 0);
        let nodes: Vec<_> = (0..n).map(|x| graph.add_node(x)).collect();
        for x in 0..n {
            for &u in &active[x] {
                for b in &model.control(x, u).branches {
                    graph.add_edge(nodes[x], nodes[b.next], ());
                }
            }
        }
        let mut component = vec![0usize; n];
        for (i, scc) in tarjan_scc(&graph).into_iter().enumerate() {
            for node in scc {
                component[graph[node]] = i;
            }
        }
        let alive: Vec<bool> = active.iter().map(|a| !a.is_empty()).collect();
        let mut changed = false;
        for x in 0..n {
            let before = active[x].len();
            active[x].retain(|&u| {
                model
                    .control(x, u)
                    .branches
                    .iter()
                    .all(|b| component[b.next] == component[x] && alive[b.next])
            });
            changed |= active[x].len() != before;
        }
        if !changed {
            return active.iter().map(|a| !a.is_empty()).collect();
        }
    }
}

/// States whose optimal cost over strategies restricted to `allowed` is
/// finite: those that can reach `t` or a cost-free end component almost
/// surely.
pub fn finite_cost_states(model: &SspModel, allowed: &ControlSets) -> Vec<bool> {
    let mut target = cost_free_end_components(model, allowed);
    target[TERMINAL] = true;
    almost_sure_reach(model, allowed, &target)
}

/// States from which termination is certain under some strategy over
/// `allowed` (under the policy itself for single-control sets).
pub fn certain_termination_states(model: &SspModel, allowed: &ControlSets) -> Vec<bool> {
    let mut target = vec![false; model.num_states()];
    target[TERMINAL] = true;
    almost_sure_reach(model, allowed, &target)
}
