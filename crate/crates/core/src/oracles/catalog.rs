use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{
    barrier_constant, cs_constant, make_barrier, make_counterexample, make_entire_eigenfunction,
    Counterexample,
};
use crate::frames::Sign;
use crate::quadrature::integrate_relative;
use crate::{Error, Result, ScalarField};

/// How a computed value must relate to the known one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Relation {
    Equals { value: f64, tol: f64 },
    AtMost { value: f64, tol: f64 },
    AtLeast { value: f64, tol: f64 },
}

impl Relation {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Relation::Equals { value, tol } => (v - value).abs() <= tol,
            Relation::AtMost { value, tol } => v <= value + tol,
            Relation::AtLeast { value, tol } => v >= value - tol,
        }
    }

    pub fn target(&self) -> f64 {
        match *self {
            Relation::Equals { value, .. }
            | Relation::AtMost { value, .. }
            | Relation::AtLeast { value, .. } => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnownValue {
    pub point: Vec<f64>,
    pub k: usize,
    #[serde(serialize_with = "ser_sign")]
    pub sign: Sign,
    #[serde(flatten)]
    pub relation: Relation,
    /// How the value is obtained.
    pub rule: String,
}

fn ser_sign<S: serde::Serializer>(s: &Sign, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(s.as_str())
}

#[derive(Debug, Clone)]
pub struct OracleEntry {
    pub name: String,
    pub definition: String,
    pub dim: usize,
    pub s: f64,
    pub field: ScalarField<f64>,
    pub known: Vec<KnownValue>,
}

#[derive(Serialize)]
struct EntryDump<'a> {
    name: &'a str,
    definition: &'a str,
    dim: usize,
    s: f64,
    definition_hash: String,
    known_values: &'a [KnownValue],
}

impl OracleEntry {
    /// SHA-256 of the name, definition, dimension and order.
    pub fn definition_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        h.update([0]);
        h.update(self.definition.as_bytes());
        h.update([0]);
        h.update((self.dim as u64).to_le_bytes());
        h.update(self.s.to_le_bytes());
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(EntryDump {
            name: &self.name,
            definition: &self.definition,
            dim: self.dim,
            s: self.s,
            definition_hash: self.definition_hash(),
            known_values: &self.known,
        })
        .expect("serializable")
    }
}

/// `C_s int_1^inf (1 + e^-t) t^(-1-2s) dt`, by 1-D quadrature of the
/// exponential part.
pub fn sector_value(s: f64) -> Result<f64> {
    let r = integrate_relative(|t: f64| (-t).exp() * t.powf(-1.0 - 2.0 * s), 1.0, 60.0, 1e-13, 2000)?;
    Ok(cs_constant(s) * (1.0 / (2.0 * s) + r.value))
}

fn axis_point(n: usize, i: usize, v: f64) -> Vec<f64> {
    let mut p = vec![0.0; n];
    p[i] = v;
    p
}

/// Catalog of oracle fields in dimension `n` at order `s`.
pub fn catalog(s: f64, n: usize) -> Result<Vec<OracleEntry>> {
    if n == 0 {
        return Err(Error::BadDims("dimension must be positive".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} not in (0, 1)")));
    }
    let tol = 1e-3;
    let cs = cs_constant(s);
    let cb = barrier_constant(s)?;
    let origin = vec![0.0; n];
    let mut out = Vec::new();

    for r in [1.0, 2.0] {
        let mut known = Vec::new();
        let inner = axis_point(n, 0, 0.3 * r);
        for k in 1..=n {
            for sign in [Sign::Sup, Sign::Inf] {
                for p in [&origin, &inner] {
                    known.push(KnownValue {
                        point: p.clone(),
                        k,
                        sign,
                        relation: Relation::Equals {
                            value: -(k as f64) * cb,
                            tol: tol * cb * k as f64,
                        },
                        rule: "barrier identity: every direction gives -C_s beta(1-s,s)".into(),
                    });
                }
            }
        }
        out.push(OracleEntry {
            name: format!("barrier_r{r}"),
            definition: format!("({r}^2 - |x|^2)_+^s"),
            dim: n,
            s,
            field: make_barrier(r, origin.clone(), 1.0, s),
            known,
        });
    }

    let e5 = make_counterexample::<f64>(Counterexample::UpperAnnulus, n)?;
    let mut known = vec![KnownValue {
        point: origin.clone(),
        k: 1,
        sign: Sign::Sup,
        relation: Relation::Equals { value: 0.0, tol },
        rule: "u <= 0 = u(0), and the directions orthogonal to e_N see only zeros".into(),
    }];
    for m in [2.0, 4.0] {
        known.push(KnownValue {
            point: axis_point(n, n - 1, 1.0 / m),
            k: 1,
            sign: Sign::Sup,
            relation: Relation::AtMost {
                value: -cs / (2.0 * s) * (1.0 - 1.0 / (m * m)).powf(-s),
                tol,
            },
            rule: "one side of every line leaves the ball into the -1 region".into(),
        });
    }
    if n == 1 {
        // the only direction is e_N, so the origin value equals the far contribution
        known.remove(0);
    }
    out.push(OracleEntry {
        name: Counterexample::UpperAnnulus.name().into(),
        definition: Counterexample::UpperAnnulus.definition().into(),
        dim: n,
        s,
        field: e5,
        known,
    });

    if n >= 2 {
        let lm = make_counterexample::<f64>(Counterexample::LineModified, n)?;
        let mut known = vec![KnownValue {
            point: origin.clone(),
            k: n,
            sign: Sign::Sup,
            relation: Relation::Equals { value: 0.0, tol },
            rule: "canonical directions see only zeros".into(),
        }];
        for m in [2.0, 4.0] {
            known.push(KnownValue {
                point: axis_point(n, n - 1, 1.0 / m),
                k: n,
                sign: Sign::Sup,
                relation: Relation::AtMost {
                    value: -((n - 1) as f64) * cs / (2.0 * s) * (1.0 - 1.0 / (m * m)).powf(-s),
                    tol,
                },
                rule: "at most one frame vector lies on the e_N axis".into(),
            });
        }
        out.push(OracleEntry {
            name: Counterexample::LineModified.name().into(),
            definition: Counterexample::LineModified.definition().into(),
            dim: n,
            s,
            field: lm,
            known,
        });

        out.push(OracleEntry {
            name: Counterexample::HalflineExp.name().into(),
            definition: Counterexample::HalflineExp.definition().into(),
            dim: n,
            s,
            field: make_counterexample(Counterexample::HalflineExp, n)?,
            known: vec![KnownValue {
                point: origin.clone(),
                k: 1,
                sign: Sign::Sup,
                relation: Relation::Equals {
                    value: cs / (2.0 * s),
                    tol,
                },
                rule: "sup over xi_N -> 0+ of C_s int_1^inf exp(-t xi_N) t^(-1-2s) dt; not attained"
                    .into(),
            }],
        });

        out.push(OracleEntry {
            name: Counterexample::PlaneSectorExp.name().into(),
            definition: Counterexample::PlaneSectorExp.definition().into(),
            dim: n,
            s,
            field: make_counterexample(Counterexample::PlaneSectorExp, n)?,
            known: vec![KnownValue {
                point: origin.clone(),
                k: 2,
                sign: Sign::Sup,
                relation: Relation::Equals {
                    value: sector_value(s)?,
                    tol,
                },
                rule: "limit of the two-direction sum as the frame tilts onto the axes; not attained"
                    .into(),
            }],
        });

        let inside: Vec<Vec<f64>> = vec![
            origin.clone(),
            axis_point(n, 0, 0.5),
            axis_point(n, n - 1, -0.7),
        ];
        out.push(OracleEntry {
            name: Counterexample::Cross.name().into(),
            definition: Counterexample::Cross.definition().into(),
            dim: n,
            s,
            field: make_counterexample(Counterexample::Cross, n)?,
            known: inside
                .iter()
                .map(|p| KnownValue {
                    point: p.clone(),
                    k: n,
                    sign: Sign::Inf,
                    relation: Relation::AtMost { value: 0.0, tol },
                    rule: "canonical directions stay inside the zero cross".into(),
                })
                .collect(),
        });

        out.push(OracleEntry {
            name: Counterexample::RadialBump.name().into(),
            definition: Counterexample::RadialBump.definition().into(),
            dim: n,
            s,
            field: make_counterexample(Counterexample::RadialBump, n)?,
            known: vec![KnownValue {
                point: axis_point(n, 0, 0.5),
                k: 1,
                sign: Sign::Inf,
                relation: Relation::AtMost { value: 0.0, tol },
                rule: "directions orthogonal to x only see smaller values".into(),
            }],
        });

        let (w, alpha) = make_entire_eigenfunction::<f64>(1.0, 1, n, s)?;
        let pts = [axis_point(n, 0, 1.0), axis_point(n, n - 1, 0.5)];
        out.push(OracleEntry {
            name: "entire_gaussian".into(),
            definition: format!("exp(-{alpha} |x|^2)"),
            dim: n,
            s,
            known: pts
                .iter()
                .map(|p| {
                    let r2: f64 = p.iter().map(|v| v * v).sum();
                    KnownValue {
                        point: p.clone(),
                        k: 1,
                        sign: Sign::Inf,
                        relation: Relation::Equals {
                            value: -(-alpha * r2).exp(),
                            tol,
                        },
                        rule: "I_1^- w = -mu w with mu = 1".into(),
                    }
                })
                .collect(),
            field: w,
        });
    }
    Ok(out)
}

/// Pretty JSON dump of a catalog.
pub fn catalog_json(entries: &[OracleEntry]) -> String {
    let v: Vec<serde_json::Value> = entries.iter().map(|e| e.to_json()).collect();
    serde_json::to_string_pretty(&v).expect("serializable")
}
