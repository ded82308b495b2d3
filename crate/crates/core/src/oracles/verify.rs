use rayon::prelude::*;
use serde::Serialize;

use super::catalog::{catalog, Relation};
use super::beta;
use crate::frames::ExtremizeOptions;
use crate::kernel::{FractionalOrder, QuadratureSpec};
use crate::operators::eval_ik;
use crate::Result;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub s: f64,
    pub dim: usize,
    /// Replaces the normalization constant used by the operators.
    pub cs_override: Option<f64>,
    /// Multiplies every catalog tolerance.
    pub tol_scale: f64,
    pub quadrature: QuadratureSpec<f64>,
    pub extremize: ExtremizeOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            s: 0.75,
            dim: 2,
            cs_override: None,
            tol_scale: 1.0,
            quadrature: QuadratureSpec::default(),
            extremize: ExtremizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRecord {
    pub check: String,
    pub point: Vec<f64>,
    pub k: usize,
    pub sign: String,
    pub relation: String,
    pub target: f64,
    pub computed: Option<f64>,
    pub error: Option<String>,
    pub pass: bool,
    pub rule: String,
}

fn scaled(r: Relation, f: f64) -> Relation {
    match r {
        Relation::Equals { value, tol } => Relation::Equals { value, tol: tol * f },
        Relation::AtMost { value, tol } => Relation::AtMost { value, tol: tol * f },
        Relation::AtLeast { value, tol } => Relation::AtLeast { value, tol: tol * f },
    }
}

fn relation_name(r: &Relation) -> &'static str {
    match r {
        Relation::Equals { .. } => "==",
        Relation::AtMost { .. } => "<=",
        Relation::AtLeast { .. } => ">=",
    }
}

/// Runs every catalog identity through the operator pipeline, plus the
/// constant checks.
pub fn verify_suite(opts: &VerifyOptions) -> Result<Vec<VerifyRecord>> {
    let s = opts.s;
    let order = match opts.cs_override {
        Some(c) => FractionalOrder::with_constant(s, c)?,
        None => FractionalOrder::new(s)?,
    };
    let mut records = Vec::new();

    // beta(1-s, s) sin(pi s) = pi
    let b = beta(1.0 - s, s)?;
    let lhs = b * (std::f64::consts::PI * s).sin();
    records.push(VerifyRecord {
        check: "beta_reflection".into(),
        point: vec![],
        k: 0,
        sign: String::new(),
        relation: "==".into(),
        target: std::f64::consts::PI,
        computed: Some(lhs),
        error: None,
        pass: (lhs - std::f64::consts::PI).abs() <= 1e-10 * opts.tol_scale,
        rule: "reflection formula".into(),
    });
    // C_s beta(1-s, s) = Gamma(1 + 2s), independent of how C_s is coded
    let g = statrs::function::gamma::gamma(1.0 + 2.0 * s);
    let cb = order.cs() * b;
    records.push(VerifyRecord {
        check: "cs_beta_gamma".into(),
        point: vec![],
        k: 0,
        sign: String::new(),
        relation: "==".into(),
        target: g,
        computed: Some(cb),
        error: None,
        pass: (cb - g).abs() <= 1e-10 * opts.tol_scale.max(1.0) * g,
        rule: "Gamma(1/2 + s) Gamma(1 + s) duplication".into(),
    });

    let entries = catalog(s, opts.dim)?;
    let jobs: Vec<_> = entries
        .iter()
        .flat_map(|e| e.known.iter().map(move |kv| (e, kv)))
        .collect();
    let mut field_records: Vec<VerifyRecord> = jobs
        .par_iter()
        .map(|(e, kv)| {
            let rel = scaled(kv.relation, opts.tol_scale);
            let r = eval_ik(
                &e.field,
                &kv.point,
                kv.k,
                kv.sign,
                &order,
                &opts.quadrature,
                &opts.extremize,
            );
            let (computed, error, pass) = match r {
                Ok(v) => (Some(v.value), None, rel.holds(v.value)),
                Err(err) => (None, Some(err.to_string()), false),
            };
            VerifyRecord {
                check: e.name.clone(),
                point: kv.point.clone(),
                k: kv.k,
                sign: kv.sign.as_str().into(),
                relation: relation_name(&rel).into(),
                target: rel.target(),
                computed,
                error,
                pass,
                rule: kv.rule.clone(),
            }
        })
        .collect();
    records.append(&mut field_records);
    Ok(records)
}
