//! Fixed-point verification and the function classes that decide which
//! fixed point value iteration is drawn to.
//!
//! * `Ŵ`: functions `J ≥ Ĵ` whose expected value along every proper
//!   trajectory vanishes, `E{J(x_k)} → 0`. Only stationary policies can be
//!   checked, so a positive verdict is labelled [`Verdict::EvidenceOnly`].
//! * `𝒲*`: functions with `J* ≤ J ≤ c·J*` for some `c > 0`.
//! * `ℬ`: functions vanishing at `t` and bounded over the effective domain.
//! * `Ŵ_b`: members of `ℬ` with `Ĵ ≤ J`.

use serde::Serialize;

use crate::bellman::{self, ViOptions};
use crate::error::{Result, SspError};
use crate::ext::{self, INF};
use crate::model::{Control, OutcomeBranch, SspModel, StateId, TERMINAL};
use crate::perturbation::{self, SweepKind, SweepResult, DEFAULT_SCHEDULE};
use crate::policy::{Policy, StationaryPolicy};
use crate::properness;
use crate::value::ValueFunction;

/// Values at or below this are treated as zero when lumping.
pub const ZERO_TOL: f64 = 1e-12;

/// Residual tolerance for the fixed points reported by [`gap_report`].
pub const FIXED_POINT_TOL: f64 = 1e-8;

/// Largest agreement gap between the δ-limit and the cost of the extracted
/// proper policy for the latter to be taken as `Ĵ`.
const POLISH_TOL: f64 = 1e-6;

/// Cap on the number of stationary policies enumerated by the `Ŵ` check.
const MAX_ENUMERATED_POLICIES: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub passed: bool,
    pub worst_state: Option<String>,
    #[serde(serialize_with = "crate::io::serialize_ext")]
    pub residual: f64,
    pub tol: f64,
}

pub fn verify_fixed_point(
    model: &SspModel,
    j: &ValueFunction,
    tol: f64,
    domain: Option<&[StateId]>,
) -> FixedPointReport {
    let (worst, residual) = bellman::worst_residual(model, j, domain);
    FixedPointReport {
        passed: residual <= tol,
        worst_state: worst.map(|x| model.label(x).to_string()),
        residual,
        tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FunctionClass {
    /// `Ŵ`
    #[serde(rename = "W_hat")]
    Regular,
    /// `𝒲*`
    #[serde(rename = "W_star")]
    Bridge,
    /// `ℬ`
    #[serde(rename = "B")]
    Bounded,
    /// `Ŵ_b`
    #[serde(rename = "W_hat_b")]
    BoundedRegular,
}

impl FunctionClass {
    pub const ALL: [FunctionClass; 4] = [
        FunctionClass::Regular,
        FunctionClass::Bridge,
        FunctionClass::Bounded,
        FunctionClass::BoundedRegular,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    /// Every checked case passed, but the class quantifies over cases that
    /// cannot be enumerated.
    EvidenceOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `J(t) ≠ 0` or a negative value.
    NotInClass { state: String },
    /// `J(x)` falls below the lower bound (`Ĵ` or `J*`).
    BelowBound {
        state: String,
        #[serde(serialize_with = "crate::io::serialize_ext")]
        value: f64,
        #[serde(serialize_with = "crate::io::serialize_ext")]
        bound: f64,
    },
    /// `J(x) > 0` where `J*(x) = 0`, so no multiple of `J*` dominates `J`.
    Unbridgeable { state: String },
    /// `J` is unbounded (infinite) over the effective domain.
    Unbounded { state: String },
    /// A proper (policy, start) pair along which `E{J(x_k)}` does not vanish.
    NoDecay {
        policy: Vec<String>,
        start: String,
        #[serde(serialize_with = "crate::io::serialize_ext_vec")]
        expectations: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub class: FunctionClass,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    /// Least `c` with `J ≤ c·J*` (`𝒲*` only; `None` when unconstrained).
    pub constant: Option<f64>,
    /// `sup` of `J` over the effective domain (`ℬ`, `Ŵ_b`).
    #[serde(serialize_with = "crate::io::serialize_ext_opt")]
    pub sup: Option<f64>,
    /// Number of (policy, start) pairs checked for decay (`Ŵ` only).
    pub pairs_checked: usize,
}

impl MembershipReport {
    fn new(class: FunctionClass) -> Self {
        Self {
            class,
            verdict: Verdict::Member,
            witnesses: Vec::new(),
            constant: None,
            sup: None,
            pairs_checked: 0,
        }
    }

    fn reject(mut self, witness: Witness) -> Self {
        self.verdict = Verdict::NonMember;
        self.witnesses.push(witness);
        self
    }

    pub fn is_member(&self) -> bool {
        self.verdict != Verdict::NonMember
    }
}

/// Inputs needed by the membership checks.
#[derive(Clone, Debug, Default)]
pub struct MembershipContext {
    pub jhat: Option<ValueFunction>,
    pub jstar: Option<ValueFunction>,
    /// Effective domain `X̂`.
    pub domain: Option<Vec<StateId>>,
    /// Stage `K` at which `E{J(x_K)}` must be below `tol`.
    pub horizon: usize,
    pub tol: f64,
}

impl MembershipContext {
    fn jhat(&self) -> Result<&ValueFunction> {
        self.jhat
            .as_ref()
            .ok_or_else(|| SspError::parameter("membership check needs Ĵ"))
    }

    fn jstar(&self) -> Result<&ValueFunction> {
        self.jstar
            .as_ref()
            .ok_or_else(|| SspError::parameter("membership check needs J*"))
    }

    fn domain(&self) -> Result<&[StateId]> {
        self.domain
            .as_deref()
            .ok_or_else(|| SspError::parameter("membership check needs the effective domain"))
    }
}

fn class_violation(model: &SspModel, j: &ValueFunction) -> Option<Witness> {
    if j[TERMINAL] != 0.0 {
        return Some(Witness::NotInClass {
            state: model.label(TERMINAL).to_string(),
        });
    }
    model
        .states()
        .find(|&x| !(j[x] >= 0.0))
        .map(|x| Witness::NotInClass {
            state: model.label(x).to_string(),
        })
}

fn below(model: &SspModel, j: &ValueFunction, bound: &ValueFunction, tol: f64) -> Option<Witness> {
    model
        .states()
        .find(|&x| !ext::le_tol(bound[x], j[x], tol))
        .map(|x| Witness::BelowBound {
            state: model.label(x).to_string(),
            value: j[x],
            bound: bound[x],
        })
}

pub fn membership(
    model: &SspModel,
    j: &ValueFunction,
    class: FunctionClass,
    ctx: &MembershipContext,
) -> Result<MembershipReport> {
    let report = MembershipReport::new(class);
    if let Some(w) = class_violation(model, j) {
        return Ok(report.reject(w));
    }
    match class {
        FunctionClass::Regular => regular(model, j, ctx, report),
        FunctionClass::Bridge => bridge(model, j, ctx, report),
        FunctionClass::Bounded => bounded(model, j, ctx, report),
        FunctionClass::BoundedRegular => {
            let jhat = ctx.jhat()?;
            let report = bounded(model, j, ctx, report)?;
            if !report.is_member() {
                return Ok(report);
            }
            Ok(match below(model, j, jhat, ctx.tol) {
                Some(w) => report.reject(w),
                None => report,
            })
        }
    }
}

fn regular(
    model: &SspModel,
    j: &ValueFunction,
    ctx: &MembershipContext,
    mut report: MembershipReport,
) -> Result<MembershipReport> {
    let jhat = ctx.jhat()?;
    if let Some(w) = below(model, j, jhat, ctx.tol) {
        return Ok(report.reject(w));
    }
    if model.num_stationary_policies() > MAX_ENUMERATED_POLICIES {
        return Err(SspError::parameter(format!(
            "too many stationary policies to enumerate (more than {MAX_ENUMERATED_POLICIES})"
        )));
    }
    let domain = jhat.finite_states();
    for mu in StationaryPolicy::enumerate(model) {
        let proper = properness::classify(model, &mu)?;
        let pi = Policy::stationary(mu.clone());
        for &x0 in domain.iter().filter(|&&x| proper.is_proper_at(x)) {
            report.pairs_checked += 1;
            let expectations = properness::expected_values(model, &pi, x0, j, ctx.horizon);
            let last = *expectations.last().expect("horizon table is nonempty");
            if !(last <= ctx.tol) {
                return Ok(report.reject(Witness::NoDecay {
                    policy: model
                        .states()
                        .map(|x| model.control(x, mu.control(x)).label.clone())
                        .collect(),
                    start: model.label(x0).to_string(),
                    expectations,
                }));
            }
        }
    }
    report.verdict = Verdict::EvidenceOnly;
    Ok(report)
}

fn bridge(
    model: &SspModel,
    j: &ValueFunction,
    ctx: &MembershipContext,
    mut report: MembershipReport,
) -> Result<MembershipReport> {
    let jstar = ctx.jstar()?;
    if let Some(w) = below(model, j, jstar, ctx.tol) {
        return Ok(report.reject(w));
    }
    let mut constant: Option<f64> = None;
    for x in model.states() {
        let (v, s) = (j[x], jstar[x]);
        if s.is_infinite() {
            continue;
        }
        if s <= ctx.tol {
            if v > ctx.tol {
                return Ok(report.reject(Witness::Unbridgeable {
                    state: model.label(x).to_string(),
                }));
            }
            continue;
        }
        if v.is_infinite() {
            return Ok(report.reject(Witness::Unbridgeable {
                state: model.label(x).to_string(),
            }));
        }
        let ratio = v / s;
        constant = Some(constant.map_or(ratio, |c: f64| c.max(ratio)));
    }
    report.constant = constant;
    Ok(report)
}

fn bounded(
    model: &SspModel,
    j: &ValueFunction,
    ctx: &MembershipContext,
    mut report: MembershipReport,
) -> Result<MembershipReport> {
    let domain = ctx.domain()?;
    let sup = domain.iter().map(|&x| j[x]).fold(0.0, f64::max);
    report.sup = Some(sup);
    if sup.is_infinite() {
        let x = *domain
            .iter()
            .find(|&&x| j[x].is_infinite())
            .expect("an infinite entry exists");
        return Ok(report.reject(Witness::Unbounded {
            state: model.label(x).to_string(),
        }));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateRecord {
    pub name: String,
    pub fixed_point: FixedPointReport,
    pub memberships: Vec<(FunctionClass, Verdict)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub jstar: ValueFunction,
    pub jhat: ValueFunction,
    /// `Ĵ − J*` with `∞ − ∞ = 0`.
    pub gap: ValueFunction,
    /// Effective domain of `J*`.
    pub xstar: Vec<StateId>,
    /// Effective domain of `Ĵ`.
    pub xhat: Vec<StateId>,
    pub jstar_check: FixedPointReport,
    pub jhat_check: FixedPointReport,
    /// Raw δ-sweep behind `Ĵ`.
    pub sweep: SweepResult,
    pub candidates: Vec<CandidateRecord>,
}

impl GapReport {
    pub fn verified(&self) -> bool {
        self.jstar_check.passed && self.jhat_check.passed
    }

    pub fn context(&self, horizon: usize, tol: f64) -> MembershipContext {
        MembershipContext {
            jhat: Some(self.jhat.clone()),
            jstar: Some(self.jstar.clone()),
            domain: Some(self.xhat.clone()),
            horizon,
            tol,
        }
    }

    /// Verifies `j` as a fixed point and records its class memberships.
    pub fn add_candidate(
        &mut self,
        model: &SspModel,
        name: impl Into<String>,
        j: &ValueFunction,
        horizon: usize,
    ) -> Result<&CandidateRecord> {
        let fixed_point = verify_fixed_point(model, j, FIXED_POINT_TOL, None);
        let ctx = self.context(horizon, FIXED_POINT_TOL);
        let memberships = FunctionClass::ALL
            .iter()
            .map(|&c| Ok((c, membership(model, j, c, &ctx)?.verdict)))
            .collect::<Result<Vec<_>>>()?;
        self.candidates.push(CandidateRecord {
            name: name.into(),
            fixed_point,
            memberships,
        });
        Ok(self.candidates.last().expect("just pushed"))
    }
}

/// `Ĵ` from a δ-sweep. When the greedy policy at the smallest δ is proper
/// and its exact cost agrees with the extrapolated limit, that cost is used,
/// since it is computed without extrapolation error.
pub fn proper_optimum(model: &SspModel, schedule: &[f64]) -> Result<(ValueFunction, SweepResult)> {
    let sweep = perturbation::delta_sweep(model, schedule)?;
    let delta_min = *schedule.last().expect("schedule checked nonempty");
    let mu = perturbation::proper_policy_extract(model, delta_min)?;
    let cost = bellman::evaluate_policy(model, &mu)?;
    let xhat = sweep.limit.finite_states();
    let agrees = xhat
        .iter()
        .all(|&x| cost[x].is_finite() && (cost[x] - sweep.limit[x]).abs() <= POLISH_TOL);
    let jhat = if agrees {
        ValueFunction::from_fn(model, |x| {
            if sweep.limit[x].is_finite() {
                cost[x]
            } else {
                INF
            }
        })
    } else {
        sweep.limit.clone()
    };
    Ok((jhat, sweep))
}

pub fn gap_report(model: &SspModel) -> Result<GapReport> {
    let (jstar, _) = bellman::value_iteration(
        model,
        &ValueFunction::zeros(model.num_states()),
        &ViOptions::default(),
    )?;
    let (jhat, sweep) = proper_optimum(model, &DEFAULT_SCHEDULE)?;
    let gap = ValueFunction::new(
        model
            .states()
            .map(|x| {
                if jhat[x].is_infinite() && jstar[x].is_infinite() {
                    0.0
                } else {
                    jhat[x] - jstar[x]
                }
            })
            .collect(),
    );
    Ok(GapReport {
        xstar: jstar.finite_states(),
        xhat: jhat.finite_states(),
        jstar_check: verify_fixed_point(model, &jstar, FIXED_POINT_TOL, None),
        jhat_check: verify_fixed_point(model, &jhat, FIXED_POINT_TOL, None),
        jstar,
        jhat,
        gap,
        sweep,
        candidates: Vec::new(),
    })
}

/// Parameters whose function passes [`verify_fixed_point`].
pub fn candidate_family_scan<P>(
    model: &SspModel,
    family: impl IntoIterator<Item = (P, ValueFunction)>,
    tol: f64,
    domain: Option<&[StateId]>,
) -> Vec<P> {
    family
        .into_iter()
        .filter(|(_, j)| verify_fixed_point(model, j, tol, domain).passed)
        .map(|(p, _)| p)
        .collect()
}

/// A lumped model and, for each of its states, the state it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Lumped {
    pub model: SspModel,
    pub origin: Vec<StateId>,
}

/// Merges every state with `J*(x) = 0` into `t`.
///
/// Transitions into merged states are redirected to `t`; merged states
/// disappear. The result must have `J̃*(x) > 0` at every surviving `x ≠ t`.
pub fn lump(model: &SspModel, jstar: &ValueFunction) -> Result<Lumped> {
    if jstar.len() != model.num_states() {
        return Err(SspError::parameter("J* does not cover the model"));
    }
    if bellman::residual(model, jstar, None) > FIXED_POINT_TOL {
        return Err(SspError::parameter("J* is not a fixed point of T"));
    }
    let merged: Vec<bool> = model
        .states()
        .map(|x| x == TERMINAL || jstar[x] <= ZERO_TOL)
        .collect();
    let origin: Vec<StateId> = std::iter::once(TERMINAL)
        .chain(model.states().filter(|&x| !merged[x]))
        .collect();
    let mut new_index = vec![TERMINAL; model.num_states()];
    for (i, &x) in origin.iter().enumerate() {
        new_index[x] = i;
    }
    let labels = origin.iter().map(|&x| model.label(x).to_string()).collect();
    let controls = origin
        .iter()
        .map(|&x| {
            model
                .controls(x)
                .iter()
                .map(|c| {
                    Control::new(
                        c.label.clone(),
                        c.branches
                            .iter()
                            .map(|b| OutcomeBranch::new(b.probability, new_index[b.next], b.cost))
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    let lumped = SspModel::new(format!("{}-lumped", model.name()), labels, controls)?;
    let (tilde, _) = bellman::value_iteration(
        &lumped,
        &ValueFunction::zeros(lumped.num_states()),
        &ViOptions::default(),
    )?;
    if let Some(x) = lumped.states().skip(1).find(|&x| tilde[x] <= ZERO_TOL) {
        return Err(SspError::contract(format!(
            "lumped model still has zero optimal cost at `{}`",
            lumped.label(x)
        )));
    }
    Ok(Lumped {
        model: lumped,
        origin,
    })
}

/// Solves the `α`-discounted problems for a strictly increasing sequence of
/// discount factors in `(0, 1)`, each by value iteration from zero.
pub fn discount_homotopy(model: &SspModel, alphas: &[f64]) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(SspError::parameter("empty discount sequence"));
    }
    if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(SspError::parameter("discount factors must lie in (0, 1)"));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SspError::parameter(
            "discount factors must be strictly increasing",
        ));
    }
    let zero = ValueFunction::zeros(model.num_states());
    let values = alphas
        .iter()
        .map(|&a| {
            bellman::discounted_value_iteration(model, &zero, a, &ViOptions::default()).map(|r| r.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = model
        .states()
        .map(|x| {
            values
                .windows(2)
                .all(|w| ext::le_tol(w[0][x], w[1][x], 0.0))
        })
        .collect();
    let last = values.last().expect("nonempty").clone();
    Ok(SweepResult {
        kind: SweepKind::Alpha,
        schedule: alphas.to_vec(),
        limit: last.clone(),
        raw_last: last,
        values,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn at_s1(model: &SspModel, v: f64) -> ValueFunction {
        ValueFunction::from_fn(model, |_| v)
    }

    #[test]
    fn fixed_point_verification_on_cycle() {
        let (model, _) = fixtures::cycle_fixture();
        assert!(verify_fixed_point(&model, &at_s1(&model, 0.7), 1e-12, None).passed);
        let bad = verify_fixed_point(&model, &at_s1(&model, 2.0), 1e-12, None);
        assert!(!bad.passed);
        assert_eq!(bad.residual, 1.0);
        assert_eq!(bad.worst_state.as_deref(), Some("s1"));
    }

    #[test]
    fn zero_solves_example1() {
        let fx = fixtures::example1_chain(0.5, 1.0, 10).unwrap();
        let zero = ValueFunction::zeros(fx.model.num_states());
        assert!(verify_fixed_point(&fx.model, &zero, 0.0, None).passed);
    }

    #[test]
    fn family_scan_on_cycle() {
        let (model, _) = fixtures::cycle_fixture();
        let family = [0.0, 0.25, 0.5, 1.0, 1.5].map(|t| (t, at_s1(&model, t)));
        assert_eq!(
            candidate_family_scan(&model, family, 1e-12, None),
            vec![0.0, 0.25, 0.5, 1.0]
        );
    }

    #[test]
    fn membership_on_cycle() {
        let (model, _) = fixtures::cycle_fixture();
        let report = gap_report(&model).unwrap();
        let ctx = report.context(10, 1e-9);
        let jhat = report.jhat.clone();
        let w = membership(&model, &jhat, FunctionClass::Regular, &ctx).unwrap();
        assert_eq!(w.verdict, Verdict::EvidenceOnly);
        let wb = membership(&model, &jhat, FunctionClass::BoundedRegular, &ctx).unwrap();
        assert_eq!(wb.verdict, Verdict::Member);
        assert_eq!(wb.sup, Some(1.0));
        // J* lies below Ĵ, so it is outside Ŵ and Ŵ_b
        let low = membership(&model, &report.jstar, FunctionClass::Regular, &ctx).unwrap();
        assert_eq!(low.verdict, Verdict::NonMember);
        assert!(matches!(low.witnesses[0], Witness::BelowBound { .. }));
        // J = Ĵ > 0 = J* at s1, so no multiple of J* dominates it
        let bridge = membership(&model, &jhat, FunctionClass::Bridge, &ctx).unwrap();
        assert_eq!(bridge.verdict, Verdict::NonMember);
    }

    #[test]
    fn membership_needs_context() {
        let (model, _) = fixtures::cycle_fixture();
        let j = at_s1(&model, 1.0);
        let empty = MembershipContext::default();
        for class in FunctionClass::ALL {
            assert!(matches!(
                membership(&model, &j, class, &empty),
                Err(SspError::Parameter(_))
            ));
        }
    }

    #[test]
    fn bridge_constant_on_countdown() {
        let (model, cert) = fixtures::countdown_chain(5);
        let ctx = MembershipContext {
            jstar: Some(cert.jstar.clone()),
            ..Default::default()
        };
        let r = membership(&model, &cert.jstar.scaled(2.0), FunctionClass::Bridge, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Member);
        assert_eq!(r.constant, Some(2.0));
    }

    #[test]
    fn unbounded_functions_leave_b() {
        let (model, _) = fixtures::cycle_fixture();
        let ctx = MembershipContext {
            domain: Some(vec![0, 1]),
            ..Default::default()
        };
        let r = membership(&model, &at_s1(&model, INF), FunctionClass::Bounded, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::NonMember);
        let off = ValueFunction::new(vec![1.0, 1.0]);
        let r = membership(&model, &off, FunctionClass::Bounded, &ctx).unwrap();
        assert!(matches!(r.witnesses[0], Witness::NotInClass { .. }));
    }

    #[test]
    fn gap_reports() {
        let (model, _) = fixtures::cycle_fixture();
        let r = gap_report(&model).unwrap();
        assert_eq!((r.jstar[1], r.jhat[1], r.gap[1]), (0.0, 1.0, 1.0));
        assert!(r.verified());

        let (countdown, _) = fixtures::countdown_chain(4);
        let r = gap_report(&countdown).unwrap();
        assert!(r.gap.iter().all(|g| g == 0.0));
        assert_eq!(r.xstar, r.xhat);
    }

    #[test]
    fn lumping_cycle_leaves_terminal_only() {
        let (model, cert) = fixtures::cycle_fixture();
        let lumped = lump(&model, &cert.jstar).unwrap();
        assert_eq!(lumped.model.num_states(), 1);
        assert_eq!(lumped.origin, vec![TERMINAL]);
    }

    #[test]
    fn lumping_keeps_countdown() {
        let (model, cert) = fixtures::countdown_chain(3);
        let lumped = lump(&model, &cert.jstar).unwrap();
        assert_eq!(lumped.model.labels(), model.labels());
    }

    #[test]
    fn lumping_rejects_non_fixed_points() {
        let (model, _) = fixtures::cycle_fixture();
        assert!(lump(&model, &at_s1(&model, 3.0)).is_err());
    }

    #[test]
    fn homotopy_on_fixtures() {
        let (model, _) = fixtures::cycle_fixture();
        let h = discount_homotopy(&model, &[0.9, 0.99]).unwrap();
        assert_eq!(h.values[0][1], 0.0);
        assert_eq!(h.values[1][1], 0.0);

        let (countdown, _) = fixtures::countdown_chain(2);
        let alphas = [0.5, 0.9, 0.99];
        let h = discount_homotopy(&countdown, &alphas).unwrap();
        for (i, a) in alphas.iter().enumerate() {
            assert_eq!(h.values[i][1], 1.0);
            assert!((h.values[i][2] - (1.0 + a)).abs() < 1e-12);
        }
        assert!(h.is_monotone());
        assert!(discount_homotopy(&countdown, &[0.9, 0.5]).is_err());
        assert!(discount_homotopy(&countdown, &[1.0]).is_err());
    }
}
