use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use ssp_core::analysis::{self, FunctionClass, MembershipReport};
use ssp_core::bellman::{self, ViOptions};
use ssp_core::ext::display;
use ssp_core::fixtures::{self, RandomSspParams};
use ssp_core::io::{self, ModelFile};
use ssp_core::perturbation;
use ssp_core::properness;
use ssp_core::rollout;
use ssp_core::{Policy, Result, SspError, SspModel, StateId, ValueFunction, TERMINAL};

use crate::{Artifacts, Command, Domain, Fixture, EXIT_OK, EXIT_VALIDATION};

type Outcome = (i32, String);

fn pretty(value: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn load(path: &Path) -> Result<ModelFile> {
    io::load_model(path)
}

fn out_path(out: &crate::Out) -> Option<&Path> {
    out.out.as_deref()
}

/// `J(x)=v` for the first few states besides `t`.
fn describe(model: &SspModel, name: &str, j: &ValueFunction) -> String {
    const SHOWN: usize = 6;
    let mut parts: Vec<String> = model
        .states()
        .filter(|&x| x != TERMINAL)
        .take(SHOWN)
        .map(|x| format!("{name}({})={}", model.label(x), display(j[x])))
        .collect();
    let hidden = model.num_states().saturating_sub(1 + SHOWN);
    if hidden > 0 {
        parts.push(format!("(+{hidden} more)"));
    }
    parts.join(" ")
}

pub(crate) fn execute(command: Command, artifacts: &mut Artifacts) -> Result<Outcome> {
    match command {
        Command::Validate { model, out } => validate(&model, out_path(&out), artifacts),
        Command::Solve {
            model,
            init,
            tol,
            max_sweeps,
            trace,
            out,
        } => {
            let opts = ViOptions::default()
                .with_tol(tol)
                .with_max_sweeps(max_sweeps);
            solve(
                &model,
                &init,
                &opts,
                trace.as_deref(),
                out_path(&out),
                artifacts,
            )
        }
        Command::Evaluate { model, policy, out } => {
            let file = load(&model)?;
            let mu = io::load_stationary_policy(&file.model, &policy)?;
            let j = bellman::evaluate_policy(&file.model, &mu)?;
            artifacts.primary(
                out_path(&out),
                pretty(&io::value_function_to_json(&file.model, &j))?,
            )?;
            Ok((EXIT_OK, describe(&file.model, "J_mu", &j)))
        }
        Command::Classify { model, policy, out } => {
            let file = load(&model)?;
            let mu = io::load_stationary_policy(&file.model, &policy)?;
            let report = properness::classify(&file.model, &mu)?;
            let all: Vec<StateId> = file.model.states().collect();
            let (uniform, bound) = properness::uniform_properness(&file.model, &mu, &all)?;
            let json = json!({
                "states": serde_json::to_value(&report.states)?,
                "uniformly_proper": uniform,
                "steps_bound": io::ext_json(bound),
            });
            artifacts.primary(out_path(&out), pretty(&json)?)?;
            Ok((
                EXIT_OK,
                format!(
                    "proper at {} of {} states",
                    report.proper_states.len(),
                    file.model.num_states()
                ),
            ))
        }
        Command::Sweep {
            model,
            deltas,
            json,
            out,
        } => {
            let file = load(&model)?;
            let sweep = perturbation::delta_sweep(&file.model, &deltas)?;
            artifacts.primary(out_path(&out), io::sweep_csv(&file.model, &sweep)?)?;
            if let Some(p) = json {
                artifacts.extra(&p, &pretty(&io::sweep_json(&file.model, &sweep))?)?;
            }
            let trend = if sweep.is_monotone() {
                "monotone"
            } else {
                "NOT monotone"
            };
            Ok((
                EXIT_OK,
                format!(
                    "{}; {trend} in δ",
                    describe(&file.model, "limit", &sweep.limit)
                ),
            ))
        }
        Command::Verify {
            model,
            values,
            domain,
            tol,
            out,
        } => verify(&model, &values, domain, tol, out_path(&out), artifacts),
        Command::Gap {
            model,
            candidate,
            horizon,
            out,
        } => gap(&model, &candidate, horizon, out_path(&out), artifacts),
        Command::Lump { model, out } => {
            let file = load(&model)?;
            let jstar = solve_from_zero(&file.model)?;
            let lumped = analysis::lump(&file.model, &jstar)?;
            artifacts.primary(out_path(&out), io::model_to_json(&lumped.model, None)?)?;
            Ok((
                EXIT_OK,
                format!(
                    "merged {} states into t; {} states remain",
                    file.model.num_states() - lumped.model.num_states(),
                    lumped.model.num_states()
                ),
            ))
        }
        Command::Homotopy { model, alphas, out } => {
            let file = load(&model)?;
            let sweep = analysis::discount_homotopy(&file.model, &alphas)?;
            artifacts.primary(out_path(&out), io::sweep_csv(&file.model, &sweep)?)?;
            Ok((
                EXIT_OK,
                format!(
                    "{} at α={}",
                    describe(&file.model, "J_α", &sweep.limit),
                    sweep.schedule.last().expect("nonempty")
                ),
            ))
        }
        Command::Rollout {
            model,
            policy,
            start,
            runs,
            seed,
            horizon,
            values,
            csv,
            out,
        } => {
            let file = load(&model)?;
            let pi = io::load_policy(&file.model, &policy)?;
            let x0 = file.model.state(&start)?;
            let j = values
                .map(|p| io::load_value_function(&file.model, p))
                .transpose()?;
            rollout_command(
                &file.model,
                &pi,
                x0,
                (runs, seed, horizon),
                j.as_ref(),
                csv.as_deref(),
                out_path(&out),
                artifacts,
            )
        }
        Command::Fixture { fixture } => fixture_command(fixture, artifacts),
    }
}

fn validate(path: &Path, out: Option<&Path>, artifacts: &mut Artifacts) -> Result<Outcome> {
    let report = match load(path) {
        Ok(file) => file.model.validate(),
        Err(SspError::Validation(report)) => report,
        Err(e) => return Err(e),
    };
    artifacts.primary(out, pretty(&io::validation_json(&report))?)?;
    if report.is_valid() {
        Ok((EXIT_OK, "valid".into()))
    } else {
        Ok((
            EXIT_VALIDATION,
            format!(
                "invalid: {} violation(s): {report}",
                report.violations.len()
            ),
        ))
    }
}

fn solve_from_zero(model: &SspModel) -> Result<ValueFunction> {
    let zero = ValueFunction::zeros(model.num_states());
    Ok(bellman::value_iteration(model, &zero, &ViOptions::default())?.0)
}

fn initial_function(model: &SspModel, init: &str) -> Result<ValueFunction> {
    match init.split_once(':') {
        None if init == "zero" => Ok(ValueFunction::zeros(model.num_states())),
        Some(("perturbed", delta)) => {
            let delta: f64 = delta
                .parse()
                .map_err(|_| SspError::parameter(format!("bad perturbation `{delta}`")))?;
            perturbation::solve_perturbed(model, delta)
        }
        Some(("file", path)) => io::load_value_function(model, path),
        _ => Err(SspError::parameter(format!(
            "--init must be `zero`, `perturbed:<δ>` or `file:<path>`, got `{init}`"
        ))),
    }
}

fn solve(
    path: &Path,
    init: &str,
    opts: &ViOptions,
    trace_path: Option<&Path>,
    out: Option<&Path>,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let file = load(path)?;
    let j0 = initial_function(&file.model, init)?;
    let (j, trace) = match bellman::value_iteration(&file.model, &j0, opts) {
        Ok(result) => result,
        Err(SspError::NonConvergence { trace }) => {
            if let Some(p) = trace_path {
                artifacts.extra(p, &io::trace_csv(&trace)?)?;
            }
            return Err(SspError::NonConvergence { trace });
        }
        Err(e) => return Err(e),
    };
    artifacts.primary(out, pretty(&io::value_function_to_json(&file.model, &j))?)?;
    if let Some(p) = trace_path {
        artifacts.extra(p, &io::trace_csv(&trace)?)?;
    }
    Ok((
        EXIT_OK,
        format!(
            "converged in {} sweeps: {}",
            trace.sweeps(),
            describe(&file.model, "J", &j)
        ),
    ))
}

fn verify(
    path: &Path,
    values: &Path,
    domain: Domain,
    tol: f64,
    out: Option<&Path>,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let file = load(path)?;
    let j = io::load_value_function(&file.model, values)?;
    let states = match domain {
        Domain::All => None,
        Domain::Interior => Some(
            file.interior
                .as_deref()
                .ok_or_else(|| SspError::parameter("model file lists no interior states"))?,
        ),
    };
    let report = analysis::verify_fixed_point(&file.model, &j, tol, states);
    artifacts.primary(out, pretty(&serde_json::to_value(&report)?)?)?;
    let worst = report.worst_state.as_deref().unwrap_or("-");
    if report.passed {
        Ok((
            EXIT_OK,
            format!(
                "fixed point: residual {} at `{worst}`",
                display(report.residual)
            ),
        ))
    } else {
        Ok((
            EXIT_VALIDATION,
            format!(
                "not a fixed point: residual {} at `{worst}` exceeds {tol:e}",
                display(report.residual)
            ),
        ))
    }
}

fn gap(
    path: &Path,
    candidates: &[PathBuf],
    horizon: usize,
    out: Option<&Path>,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let file = load(path)?;
    let model = &file.model;
    let mut report = analysis::gap_report(model)?;
    if !report.verified() {
        return Err(SspError::contract(
            "computed J* or Ĵ failed its own fixed-point check",
        ));
    }
    let mut memberships: Vec<(String, Vec<MembershipReport>)> = Vec::new();
    for path in candidates {
        let j = io::load_value_function(model, path)?;
        let name = path.display().to_string();
        report.add_candidate(model, name.clone(), &j, horizon)?;
        let ctx = report.context(horizon, analysis::FIXED_POINT_TOL);
        let detail = FunctionClass::ALL
            .iter()
            .map(|&c| analysis::membership(model, &j, c, &ctx))
            .collect::<Result<Vec<_>>>()?;
        memberships.push((name, detail));
    }
    let mut json = io::gap_report_json(model, &report)?;
    if !memberships.is_empty() {
        json["memberships"] = memberships
            .iter()
            .map(|(name, m)| Ok(json!({"candidate": name, "reports": serde_json::to_value(m)?})))
            .collect::<Result<Vec<_>>>()?
            .into();
    }
    artifacts.primary(out, pretty(&json)?)?;
    let summary = model
        .states()
        .filter(|&x| x != TERMINAL)
        .take(6)
        .map(|x| {
            let l = model.label(x);
            format!(
                "J*({l})={} Ĵ({l})={}",
                display(report.jstar[x]),
                display(report.jhat[x])
            )
        })
        .collect::<Vec<_>>()
        .join(" ");
    Ok((EXIT_OK, summary))
}

#[allow(clippy::too_many_arguments)]
fn rollout_command(
    model: &SspModel,
    pi: &Policy,
    x0: StateId,
    (runs, seed, horizon): (usize, u64, usize),
    j: Option<&ValueFunction>,
    csv: Option<&Path>,
    out: Option<&Path>,
    artifacts: &mut Artifacts,
) -> Result<Outcome> {
    let est = rollout::rollout(model, pi, x0, horizon, runs, seed, j)?;
    let r = properness::nontermination_probs(model, pi, x0, horizon);
    let horizon_cost = properness::horizon_cost(model, pi, x0, horizon);
    let cost = if pi.prefix().is_empty() {
        Some(bellman::evaluate_policy(model, pi.tail())?[x0])
    } else {
        None
    };
    let json = json!({
        "model": model.name(),
        "start": model.label(x0),
        "estimates": serde_json::to_value(&est)?,
        "exact": {
            "cost": cost.map(io::ext_json),
            "horizon_cost": io::ext_json(horizon_cost),
            "nontermination": r.iter().map(|v| io::ext_json(*v)).collect::<Vec<_>>(),
        },
    });
    artifacts.primary(out, pretty(&json)?)?;
    if let Some(p) = csv {
        let mut text = String::from("k,r_k,estimate,std_error\n");
        for (k, (exact, e)) in r.iter().zip(&est.nontermination).enumerate() {
            text.push_str(&format!(
                "{k},{},{},{}\n",
                display(*exact),
                display(e.mean),
                display(e.std_error)
            ));
        }
        artifacts.extra(p, &text)?;
    }
    Ok((
        EXIT_OK,
        format!(
            "cost {} ± {} over {horizon} stages (exact {}), {runs} runs",
            display(est.cost.mean),
            display(est.cost.std_error),
            display(horizon_cost)
        ),
    ))
}

fn fixture_command(fixture: Fixture, artifacts: &mut Artifacts) -> Result<Outcome> {
    let (model, interior, out, values) = match fixture {
        Fixture::Cycle(out) => (fixtures::cycle_fixture().0, None, out, None),
        Fixture::Countdown { n, out } => {
            if n == 0 {
                return Err(SspError::parameter("countdown needs n ≥ 1"));
            }
            (fixtures::countdown_chain(n).0, None, out, None)
        }
        Fixture::StoppingGrid { m, out } => {
            if m == 0 {
                return Err(SspError::parameter("stopping grid needs m ≥ 1"));
            }
            (fixtures::stopping_grid(m).0, None, out, None)
        }
        Fixture::Example1 {
            alpha,
            x0,
            depth,
            values_out,
            gamma,
            out,
        } => {
            if !(gamma > 0.0) || !gamma.is_finite() {
                return Err(SspError::parameter("gamma must be positive"));
            }
            let fx = fixtures::example1_chain(alpha, x0, depth)?;
            let values = values_out.map(|p| (p, fx.homogeneous(gamma)));
            (fx.model, Some(fx.interior), out, values)
        }
        Fixture::LumpExample(out) => (fixtures::lump_example(), None, out, None),
        Fixture::Trap(out) => (fixtures::unreachable_fixture(), None, out, None),
        Fixture::Random {
            seed,
            states,
            controls,
            branches,
            p_exit,
            cost_max,
            out,
        } => {
            let params = RandomSspParams {
                seed,
                n_states: states,
                max_controls: controls,
                max_branches: branches,
                p_edge_to_t: p_exit,
                cost_max,
            };
            (fixtures::random_ssp(&params)?, None, out, None)
        }
    };
    artifacts.primary(
        out_path(&out),
        io::model_to_json(&model, interior.as_deref())?,
    )?;
    if let Some((path, j)) = values {
        artifacts.extra(&path, &pretty(&io::value_function_to_json(&model, &j))?)?;
    }
    Ok((
        EXIT_OK,
        format!("{}: {} states", model.name(), model.num_states()),
    ))
}
