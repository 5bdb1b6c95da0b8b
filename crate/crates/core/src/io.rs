//! File formats: model, value-function and policy JSON; CSV tables.
//!
//! Model files look like
//!
//! ```json
//! {
//!   "name": "cycle",
//!   "states": ["t", "s1"],
//!   "controls": [["stay"], ["a", "b"]],
//!   "branches": [
//!     [[{"p": 1.0, "next": "t", "cost": 0.0}]],
//!     [[{"p": 1.0, "next": "t", "cost": 1.0}], [{"p": 1.0, "next": "s1", "cost": 0.0}]]
//!   ]
//! }
//! ```
//!
//! The first state is the termination state. `next` may be a label or an
//! index. An optional `interior` list names the states whose residuals are
//! meaningful in a truncated model.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::analysis::GapReport;
use crate::bellman::ViTrace;
use crate::error::{Result, SspError};
use crate::ext;
use crate::model::{Control, OutcomeBranch, SspModel, StateId, ValidationReport};
use crate::perturbation::{SweepKind, SweepResult};
use crate::policy::{Policy, StationaryPolicy};
use crate::value::ValueFunction;

pub fn serialize_ext<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

pub fn serialize_ext_opt<S: Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => serialize_ext(v, s),
        None => s.serialize_none(),
    }
}

pub fn serialize_ext_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| ext_json(*x)))
}

/// JSON form of an extended value: a number, or the string `"inf"`.
pub fn ext_json(v: f64) -> Value {
    if v.is_infinite() {
        Value::String("inf".into())
    } else {
        serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
    }
}

fn ext_from_json(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) if s == "inf" || s == "Infinity" => Some(f64::INFINITY),
        _ => None,
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum NextRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Deserialize, Serialize)]
struct BranchRecord {
    p: f64,
    next: NextRef,
    cost: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct ModelRecord {
    name: String,
    states: Vec<String>,
    controls: Vec<Vec<String>>,
    branches: Vec<Vec<Vec<BranchRecord>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interior: Option<Vec<String>>,
}

/// A model together with the optional interior set of a truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub model: SspModel,
    pub interior: Option<Vec<StateId>>,
}

pub fn model_from_json(text: &str) -> Result<ModelFile> {
    let record: ModelRecord = serde_json::from_str(text)?;
    let n = record.states.len();
    if record.controls.len() != n || record.branches.len() != n {
        return Err(SspError::parameter(
            "`states`, `controls` and `branches` must have one entry per state",
        ));
    }
    let resolve = |r: &NextRef| -> Result<StateId> {
        match r {
            NextRef::Index(i) if *i < n => Ok(*i),
            NextRef::Index(i) => Err(SspError::UnknownState(format!("#{i}"))),
            NextRef::Label(l) => record
                .states
                .iter()
                .position(|s| s == l)
                .ok_or_else(|| SspError::UnknownState(l.clone())),
        }
    };
    let mut controls = Vec::with_capacity(n);
    for (x, (labels, rows)) in record.controls.iter().zip(&record.branches).enumerate() {
        if labels.len() != rows.len() {
            return Err(SspError::parameter(format!(
                "state `{}` lists {} controls but {} branch lists",
                record.states[x],
                labels.len(),
                rows.len()
            )));
        }
        let row = labels
            .iter()
            .zip(rows)
            .map(|(label, branches)| {
                let branches = branches
                    .iter()
                    .map(|b| Ok(OutcomeBranch::new(b.p, resolve(&b.next)?, b.cost)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Control::new(label.clone(), branches))
            })
            .collect::<Result<Vec<_>>>()?;
        controls.push(row);
    }
    let interior = match &record.interior {
        None => None,
        Some(labels) => Some(
            labels
                .iter()
                .map(|l| resolve(&NextRef::Label(l.clone())))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let model = SspModel::new(record.name, record.states, controls)?;
    Ok(ModelFile { model, interior })
}

pub fn model_to_json(model: &SspModel, interior: Option<&[StateId]>) -> Result<String> {
    let record = ModelRecord {
        name: model.name().to_string(),
        states: model.labels().to_vec(),
        controls: model
            .states()
            .map(|x| model.controls(x).iter().map(|c| c.label.clone()).collect())
            .collect(),
        branches: model
            .states()
            .map(|x| {
                model
                    .controls(x)
                    .iter()
                    .map(|c| {
                        c.branches
                            .iter()
                            .map(|b| BranchRecord {
                                p: b.probability,
                                next: NextRef::Label(model.label(b.next).to_string()),
                                cost: b.cost,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        interior: interior.map(|xs| xs.iter().map(|&x| model.label(x).to_string()).collect()),
    };
    Ok(serde_json::to_string_pretty(&record)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    model_from_json(&fs::read_to_string(path)?)
}

pub fn save_model(
    path: impl AsRef<Path>,
    model: &SspModel,
    interior: Option<&[StateId]>,
) -> Result<()> {
    write_text(path, &model_to_json(model, interior)?)
}

/// Writes `text` with a trailing newline.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let mut out = text.to_string();
    if !out.ends_with('\n') {
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn value_function_to_json(model: &SspModel, j: &ValueFunction) -> Value {
    Value::Object(
        model
            .states()
            .map(|x| (model.label(x).to_string(), ext_json(j[x])))
            .collect::<Map<_, _>>(),
    )
}

/// Reads a label → value mapping; every state must be present.
pub fn value_function_from_json(model: &SspModel, value: &Value) -> Result<ValueFunction> {
    let map = value
        .as_object()
        .ok_or_else(|| SspError::parameter("value file must be a JSON object"))?;
    for key in map.keys() {
        model.state(key)?;
    }
    model
        .states()
        .map(|x| {
            let label = model.label(x);
            let v = map
                .get(label)
                .ok_or_else(|| SspError::parameter(format!("no value for state `{label}`")))?;
            let v = ext_from_json(v)
                .ok_or_else(|| SspError::parameter(format!("bad value for state `{label}`")))?;
            if !(v >= 0.0) {
                return Err(SspError::parameter(format!("negative value at `{label}`")));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()
        .map(ValueFunction::new)
}

pub fn load_value_function(model: &SspModel, path: impl AsRef<Path>) -> Result<ValueFunction> {
    let value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    value_function_from_json(model, &value)
}

pub fn policy_to_json(model: &SspModel, mu: &StationaryPolicy) -> Value {
    Value::Object(
        model
            .states()
            .map(|x| {
                (
                    model.label(x).to_string(),
                    Value::String(model.control(x, mu.control(x)).label.clone()),
                )
            })
            .collect::<Map<_, _>>(),
    )
}

fn stationary_from_json(model: &SspModel, value: &Value) -> Result<StationaryPolicy> {
    let map = value
        .as_object()
        .ok_or_else(|| SspError::parameter("policy must be a JSON object"))?;
    let pairs = map
        .iter()
        .map(|(state, control)| {
            control
                .as_str()
                .map(|c| (state.as_str(), c))
                .ok_or_else(|| {
                    SspError::parameter(format!("control for `{state}` must be a string"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    StationaryPolicy::from_labels(model, &pairs)
}

/// Either a stationary policy (state → control) or
/// `{"prefix": [...], "tail": {...}}`. Unlisted states use their first control.
pub fn policy_from_json(model: &SspModel, value: &Value) -> Result<Policy> {
    match (value.get("prefix"), value.get("tail")) {
        (Some(prefix), Some(tail)) if model.state_by_label("tail").is_none() => {
            let prefix = prefix
                .as_array()
                .ok_or_else(|| SspError::parameter("`prefix` must be an array"))?
                .iter()
                .map(|v| stationary_from_json(model, v))
                .collect::<Result<Vec<_>>>()?;
            Ok(Policy::new(prefix, stationary_from_json(model, tail)?))
        }
        _ => Ok(Policy::stationary(stationary_from_json(model, value)?)),
    }
}

pub fn load_policy(model: &SspModel, path: impl AsRef<Path>) -> Result<Policy> {
    let value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    policy_from_json(model, &value)
}

/// The stationary part of a policy file; a nonempty prefix is rejected.
pub fn load_stationary_policy(
    model: &SspModel,
    path: impl AsRef<Path>,
) -> Result<StationaryPolicy> {
    let pi = load_policy(model, path)?;
    if !pi.prefix().is_empty() {
        return Err(SspError::parameter("expected a stationary policy"));
    }
    Ok(pi.tail().clone())
}

fn csv_string(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| SspError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `sweep,residual,n_infinite`.
pub fn trace_csv(trace: &ViTrace) -> Result<String> {
    csv_string(
        &["sweep".into(), "residual".into(), "n_infinite".into()],
        trace.records.iter().map(|r| {
            vec![
                r.sweep.to_string(),
                ext::display(r.change),
                r.infinite.len().to_string(),
            ]
        }),
    )
}

/// `k,r_k`.
pub fn nontermination_csv(r: &[f64]) -> Result<String> {
    csv_string(
        &["k".into(), "r_k".into()],
        r.iter()
            .enumerate()
            .map(|(k, v)| vec![k.to_string(), ext::display(*v)]),
    )
}

/// `state,<param 1>,…,<param n>[,limit]`; the limit column is written for δ
/// sweeps only.
pub fn sweep_csv(model: &SspModel, sweep: &SweepResult) -> Result<String> {
    let prefix = match sweep.kind {
        SweepKind::Delta => "delta=",
        SweepKind::Alpha => "alpha=",
    };
    let mut header = vec!["state".to_string()];
    header.extend(sweep.schedule.iter().map(|p| format!("{prefix}{p}")));
    if sweep.kind == SweepKind::Delta {
        header.push("limit".into());
    }
    csv_string(
        &header,
        model.states().map(|x| {
            let mut row = vec![model.label(x).to_string()];
            row.extend(sweep.values.iter().map(|v| ext::display(v[x])));
            if sweep.kind == SweepKind::Delta {
                row.push(ext::display(sweep.limit[x]));
            }
            row
        }),
    )
}

pub fn sweep_json(model: &SspModel, sweep: &SweepResult) -> Value {
    serde_json::json!({
        "kind": sweep.kind,
        "schedule": sweep.schedule,
        "values": sweep.values.iter().map(|v| value_function_to_json(model, v)).collect::<Vec<_>>(),
        "limit": value_function_to_json(model, &sweep.limit),
        "raw_last": value_function_to_json(model, &sweep.raw_last),
        "monotone": model
            .states()
            .map(|x| (model.label(x).to_string(), Value::Bool(sweep.monotone[x])))
            .collect::<Map<_, _>>(),
    })
}

fn labels_of(model: &SspModel, states: &[StateId]) -> Value {
    states
        .iter()
        .map(|&x| Value::String(model.label(x).to_string()))
        .collect()
}

/// `{"valid": …, "violations": [{"state", "control", "message"}]}`.
pub fn validation_json(report: &ValidationReport) -> Value {
    serde_json::json!({
        "valid": report.is_valid(),
        "violations": report
            .violations
            .iter()
            .map(|v| serde_json::json!({
                "state": v.state,
                "control": v.control,
                "message": v.kind.to_string(),
            }))
            .collect::<Vec<_>>(),
    })
}

pub fn gap_report_json(model: &SspModel, report: &GapReport) -> Result<Value> {
    Ok(serde_json::json!({
        "model": model.name(),
        "verified": report.verified(),
        "jstar": value_function_to_json(model, &report.jstar),
        "jhat": value_function_to_json(model, &report.jhat),
        "gap": value_function_to_json(model, &report.gap),
        "xstar": labels_of(model, &report.xstar),
        "xhat": labels_of(model, &report.xhat),
        "jstar_check": serde_json::to_value(&report.jstar_check)?,
        "jhat_check": serde_json::to_value(&report.jhat_check)?,
        "sweep": sweep_json(model, &report.sweep),
        "candidates": serde_json::to_value(&report.candidates)?,
    }))
}
