//! Machine-readable reports: a JSON document plus the scalar metrics that
//! make up the CSV form.

use std::path::Path;

use qavcap_core::lab::{CovarianceCheck, DeFinettiCheck, ErrorOperator, Theorem3Report};
use qavcap_core::linalg::{self, Mat};
use qavcap_core::solver::{Adversary, SeparationReport, SolverConfig, SolverReport, Symmetrizability, SymmetrizabilityCertificate};
use qavcap_core::DensityMatrix;
use serde_json::{json, Map, Value};

use crate::io::{self, matrix_to_json};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    /// Rows of the CSV form, in order.
    pub metrics: Vec<(String, Value)>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => io::to_json(&self.json),
            Format::Csv => io::to_csv(&self.metrics),
        }
    }
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), Error> {
    let text = report.render(format);
    match path {
        Some(p) => io::write_file(p, &text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            })
        }
    }
}

pub fn matrix(m: &Mat) -> Value {
    serde_json::to_value(matrix_to_json(m)).expect("finite matrix")
}

pub fn state(rho: &DensityMatrix) -> Value {
    matrix(rho.matrix())
}

fn float(x: f64) -> Value {
    json!(x)
}

fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

fn metrics(pairs: &[(&str, Value)]) -> Vec<(String, Value)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn config(cfg: &SolverConfig) -> Value {
    json!({
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
        "inner_tol": cfg.inner_tol,
        "seed": cfg.seed,
        "restarts": cfg.restarts,
    })
}

pub fn adversary(a: &Adversary) -> Value {
    match a {
        Adversary::None => json!({"type": "none"}),
        Adversary::Members { labels, weights, minimizing } => json!({
            "type": "members",
            "labels": labels,
            "weights": weights,
            "minimizing": minimizing,
        }),
        Adversary::Hull {
            labels,
            weights,
            active,
            active_weights,
        } => json!({
            "type": "hull",
            "labels": labels,
            "weights": weights,
            "active": active,
            "active_weights": active_weights,
        }),
        Adversary::JammerStates {
            states,
            weights,
            worst,
            worst_is_mixed,
        } => json!({
            "type": "jammer_states",
            "states": states.iter().map(state).collect::<Vec<_>>(),
            "weights": weights,
            "worst": state(worst),
            "worst_is_mixed": worst_is_mixed,
        }),
    }
}

fn solver_json(r: &SolverReport) -> Value {
    json!({
        "value": r.value,
        "gap": r.gap,
        "upper_bound": r.upper_bound(),
        "iterations": r.iterations,
        "converged": r.converged,
        "optimizer": state(&r.optimizer),
        "adversary": adversary(&r.adversary),
        "history": r.history,
        "note": r.note,
    })
}

pub fn solver(command: &str, r: &SolverReport, cfg: &SolverConfig) -> Report {
    let mut doc = solver_json(r);
    doc["command"] = json!(command);
    doc["config"] = config(cfg);
    let mut rows = vec![
        ("value", float(r.value)),
        ("gap", float(r.gap)),
        ("upper_bound", float(r.upper_bound())),
        ("iterations", json!(r.iterations)),
        ("converged", json!(r.converged)),
    ];
    if let Adversary::JammerStates { worst_is_mixed, .. } = &r.adversary {
        rows.push(("worst_is_mixed", json!(worst_is_mixed)));
    }
    Report {
        json: doc,
        metrics: metrics(&rows),
    }
}

pub fn certificate(s: &Symmetrizability) -> Value {
    match &s.certificate {
        SymmetrizabilityCertificate::Symmetrizer(u) => json!({
            "type": "symmetrizer",
            "U": u.rows(),
        }),
        SymmetrizabilityCertificate::Witness(w) => json!({
            "type": "farkas_witness",
            "w": w,
        }),
    }
}

pub fn symmetrizability(s: &Symmetrizability) -> Report {
    Report {
        json: json!({
            "command": "symmetrizable",
            "symmetrizable": s.symmetrizable,
            "certificate": certificate(s),
        }),
        metrics: metrics(&[("symmetrizable", json!(s.symmetrizable))]),
    }
}

pub fn separation(r: &SeparationReport, cfg: &SolverConfig) -> Report {
    let (deterministic, compound, fqavc) = r.triple();
    Report {
        json: json!({
            "command": "separation-report",
            "symmetrizable": r.symmetrizability.symmetrizable,
            "certificate": certificate(&r.symmetrizability),
            "deterministic_value": deterministic,
            "compound_value": compound,
            "fqavc_ea_value": fqavc,
            "separation": r.separation,
            "compound": solver_json(&r.compound),
            "fqavc_ea": solver_json(&r.fqavc_ea),
            "config": config(cfg),
        }),
        metrics: metrics(&[
            ("symmetrizable", json!(r.symmetrizability.symmetrizable)),
            ("compound_value", float(compound)),
            ("fqavc_ea_value", float(fqavc)),
            ("separation", json!(r.separation)),
        ]),
    }
}

pub fn error_operator(f: &ErrorOperator, symmetrized: bool) -> Report {
    let e = linalg::eigh(f.matrix());
    Report {
        json: json!({
            "command": "error-operator",
            "n": f.n(),
            "d_S": f.d_s(),
            "symmetrized": symmetrized,
            "F": matrix(f.matrix()),
            "min_eigenvalue": e.min(),
            "max_eigenvalue": e.max(),
        }),
        metrics: metrics(&[
            ("n", json!(f.n())),
            ("d_S", json!(f.d_s())),
            ("min_eigenvalue", float(e.min())),
            ("max_eigenvalue", float(e.max())),
        ]),
    }
}

pub fn worst_jammer(f: &ErrorOperator, value: f64, sigma: &DensityMatrix, symmetrized: bool) -> Report {
    Report {
        json: json!({
            "command": "worst-jammer",
            "n": f.n(),
            "d_S": f.d_s(),
            "symmetrized": symmetrized,
            "error": value,
            "sigma": state(sigma),
        }),
        metrics: metrics(&[("error", float(value))]),
    }
}

pub struct DeFinettiOutcome<'a> {
    pub d: usize,
    pub n: usize,
    pub check: &'a DeFinettiCheck,
    pub symmetric_factor: f64,
    pub tau: &'a DensityMatrix,
    pub monte_carlo: Option<(usize, f64)>,
}

pub fn definetti(o: &DeFinettiOutcome<'_>) -> Report {
    let mut doc = object(vec![
        ("command", json!("definetti-check")),
        ("d", json!(o.d)),
        ("n", json!(o.n)),
        ("holds", json!(o.check.holds)),
        ("margin", float(o.check.margin)),
        ("factor", float(o.check.factor)),
        ("symmetric_factor", float(o.symmetric_factor)),
        ("tau", state(o.tau)),
    ]);
    let mut rows = vec![
        ("holds", json!(o.check.holds)),
        ("margin", float(o.check.margin)),
        ("factor", float(o.check.factor)),
        ("symmetric_factor", float(o.symmetric_factor)),
    ];
    if let Some((samples, distance)) = o.monte_carlo {
        doc["monte_carlo"] = json!({"samples": samples, "trace_distance": distance});
        rows.push(("monte_carlo_trace_distance", float(distance)));
    }
    Report {
        json: doc,
        metrics: metrics(&rows),
    }
}

pub fn theorem3(r: &Theorem3Report, covariance: Option<&CovarianceCheck>) -> Report {
    let mut doc = json!({
        "command": "theorem3-check",
        "n": r.n,
        "d_S": r.d_s,
        "factor": r.factor,
        "symmetric_factor": r.symmetric_factor,
        "lhs": r.lhs,
        "tau_error": r.tau_error,
        "rhs": r.rhs,
        "epsilon_comp": r.epsilon_comp,
        "epsilon_prime": r.epsilon_prime,
        "deterministic_worst": r.deterministic_worst,
        "worst_jammer": state(&r.worst_jammer),
        "worst_product_state": state(&r.worst_product_state),
        "lhs_le_rhs": r.bound_holds,
        "mixture_holds": r.mixture_holds,
    });
    let mut rows = vec![
        ("lhs", float(r.lhs)),
        ("tau_error", float(r.tau_error)),
        ("rhs", float(r.rhs)),
        ("epsilon_comp", float(r.epsilon_comp)),
        ("epsilon_prime", float(r.epsilon_prime)),
        ("deterministic_worst", float(r.deterministic_worst)),
        ("lhs_le_rhs", json!(r.bound_holds)),
        ("mixture_holds", json!(r.mixture_holds)),
    ];
    if let Some(c) = covariance {
        doc["covariance"] = json!({
            "passed": c.passed,
            "trials": c.trials,
            "max_deviation": c.max_deviation,
        });
        rows.push(("covariance_passed", json!(c.passed)));
        rows.push(("covariance_max_deviation", float(c.max_deviation)));
    }
    Report {
        json: doc,
        metrics: metrics(&rows),
    }
}

/// Summary of an input that loaded and passed every invariant check.
pub fn validation(kind: &str, fields: Vec<(&str, Value)>) -> Report {
    let mut all = vec![("command", json!("validate")), ("kind", json!(kind)), ("valid", json!(true))];
    let rows: Vec<(&str, Value)> = fields.iter().filter(|(_, v)| !v.is_array()).cloned().collect();
    all.extend(fields);
    let mut csv = vec![("valid", json!(true))];
    csv.extend(rows);
    Report {
        json: object(all),
        metrics: metrics(&csv),
    }
}
