use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use crate::field::{FarField, FieldFn};
use crate::{Error, Result, ScalarField};

pub const FORMAT_VERSION: u32 = 1;

const MARGIN: usize = 4;

/// Regular lattice covering a domain with four spare layers on every side.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    h: f64,
    origin: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
}

impl Lattice {
    /// The domain anchor is always a node.
    pub fn covering(dom: &DomainSpec, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        let (lo, hi) = dom.bounding_box();
        let a = dom.anchor();
        let n = a.len();
        let mut origin = vec![0.0; n];
        let mut shape = vec![0; n];
        for i in 0..n {
            let below = ((a[i] - lo[i]) / h).ceil() as usize + MARGIN;
            let above = ((hi[i] - a[i]) / h).ceil() as usize + MARGIN;
            origin[i] = a[i] - below as f64 * h;
            shape[i] = below + above + 1;
        }
        Ok(Self::from_parts(h, origin, shape))
    }

    pub fn from_parts(h: f64, origin: Vec<f64>, shape: Vec<usize>) -> Self {
        let mut strides = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        Lattice {
            h,
            origin,
            shape,
            strides,
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi(&self, mut idx: usize) -> Vec<usize> {
        let mut m = vec![0; self.dim()];
        for (mi, st) in m.iter_mut().zip(&self.strides) {
            *mi = idx / st;
            idx %= st;
        }
        m
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi(idx)
            .iter()
            .zip(&self.origin)
            .map(|(m, o)| o + *m as f64 * self.h)
            .collect()
    }

    /// Multilinear interpolation of lattice `values` at `x`; zero outside
    /// the lattice.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = 0usize;
        let mut frac = [0.0f64; 3];
        for i in 0..n {
            let t = (x[i] - self.origin[i]) / self.h;
            let f = t.floor();
            if f < 0.0 || f as usize + 1 >= self.shape[i] {
                return 0.0;
            }
            base += f as usize * self.strides[i];
            frac[i] = t - f;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut off = 0;
            for (i, fr) in frac.iter().enumerate() {
                if corner >> i & 1 == 1 {
                    w *= fr;
                    off += self.strides[i];
                } else {
                    w *= 1.0 - fr;
                }
            }
            if w != 0.0 {
                acc += w * values[base + off];
            }
        }
        acc
    }
}

/// Provenance carried by solver outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub s: f64,
    pub k: usize,
    pub sign: String,
    /// Serialized configuration that produced the field.
    pub config: String,
}

/// Lattice values with `u = 0` outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    lattice: Lattice,
    domain: DomainSpec,
    /// One value per lattice node; exterior nodes hold 0.
    values: Vec<f64>,
    interior: Vec<usize>,
    meta: Option<GridMeta>,
}

impl GridField {
    pub fn zeros(dom: &DomainSpec, h: f64) -> Result<Self> {
        let lattice = Lattice::covering(dom, h)?;
        Ok(Self::on_lattice(lattice, dom.clone()))
    }

    pub(crate) fn on_lattice(lattice: Lattice, domain: DomainSpec) -> Self {
        let interior = (0..lattice.len())
            .filter(|&i| domain.contains(&lattice.coords(i)))
            .collect();
        GridField {
            values: vec![0.0; lattice.len()],
            lattice,
            domain,
            interior,
            meta: None,
        }
    }

    /// Samples `f` at the interior nodes.
    pub fn sample(dom: &DomainSpec, h: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut g = Self::zeros(dom, h)?;
        for j in 0..g.interior.len() {
            let i = g.interior[j];
            g.values[i] = f(&g.lattice.coords(i));
        }
        g.check_finite()?;
        Ok(g)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.lattice.h
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn meta(&self) -> Option<&GridMeta> {
        self.meta.as_ref()
    }

    pub fn set_meta(&mut self, meta: GridMeta) {
        self.meta = Some(meta);
    }

    /// Lattice indices of interior nodes, ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// All lattice values (exterior nodes are 0).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.interior.iter().map(|&i| self.values[i]).collect()
    }

    /// Overwrites interior values; `v` follows [`Self::interior`].
    pub fn set_interior_values(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.interior.len() {
            return Err(Error::BadDims(format!(
                "{} values for {} interior nodes",
                v.len(),
                self.interior.len()
            )));
        }
        for (j, &i) in self.interior.iter().enumerate() {
            self.values[i] = v[j];
        }
        self.check_finite()
    }

    pub fn node_coords(&self, idx: usize) -> Vec<f64> {
        self.lattice.coords(idx)
    }

    pub fn sup_norm(&self) -> f64 {
        self.interior
            .iter()
            .map(|&i| self.values[i].abs())
            .fold(0.0, f64::max)
    }

    /// Interpolated value; exactly 0 outside the domain.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        if x.len() != self.dim() || !self.domain.contains(x) {
            return 0.0;
        }
        self.lattice.interpolate(&self.values, x)
    }

    fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("non-finite grid value".into()))
        }
    }

    /// Wraps a copy as a [`ScalarField`] for the pointwise operators.
    pub fn to_field(&self) -> ScalarField<f64> {
        ScalarField::new(GridBacked {
            grid: self.clone(),
            bound: self.sup_norm(),
        })
    }

    /// Writes the versioned text format:
    ///
    /// ```text
    /// # gridfield v1
    /// # dim = 2
    /// # spacing = 0.015625
    /// # origin = -1.03125,-1.03125
    /// # shape = 133,133
    /// # domain = {json}
    /// # domain_hash = <sha256>
    /// # meta = {json}            (optional)
    /// x0,x1,value
    /// ...                        (interior nodes only)
    /// ```
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        writeln!(w, "# gridfield v{FORMAT_VERSION}").map_err(io)?;
        writeln!(w, "# dim = {}", self.dim()).map_err(io)?;
        writeln!(w, "# spacing = {}", self.h()).map_err(io)?;
        writeln!(w, "# origin = {}", join(self.lattice.origin())).map_err(io)?;
        let shape: Vec<String> = self.lattice.shape.iter().map(|v| v.to_string()).collect();
        writeln!(w, "# shape = {}", shape.join(",")).map_err(io)?;
        let dom = serde_json::to_string(&self.domain).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(w, "# domain = {dom}").map_err(io)?;
        writeln!(w, "# domain_hash = {}", self.domain.hash()).map_err(io)?;
        if let Some(m) = &self.meta {
            let m = serde_json::to_string(m).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w, "# meta = {m}").map_err(io)?;
        }
        let names: Vec<String> = (0..self.dim()).map(|i| format!("x{i}")).collect();
        writeln!(w, "{},value", names.join(",")).map_err(io)?;
        for &i in &self.interior {
            let mut row = self.lattice.coords(i);
            row.push(self.values[i]);
            writeln!(w, "{}", join(&row)).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let bad = |m: &str| Error::Format(m.to_string());
        let mut header = std::collections::BTreeMap::new();
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| bad("empty input"))?
            .map_err(|e| Error::Io(e.to_string()))?;
        if first.trim() != format!("# gridfield v{FORMAT_VERSION}") {
            return Err(bad(&format!("unsupported header {first:?}")));
        }
        let mut rows = Vec::new();
        let mut seen_columns = false;
        for line in lines {
            let line = line.map_err(|e| Error::Io(e.to_string()))?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('#') {
                let (k, v) = rest.split_once('=').ok_or_else(|| bad(t))?;
                header.insert(k.trim().to_string(), v.trim().to_string());
            } else if !seen_columns {
                seen_columns = true;
            } else {
                let row = t
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(&format!("{e}: {t}")))?;
                rows.push(row);
            }
        }
        let get = |k: &str| header.get(k).ok_or_else(|| bad(&format!("missing {k}")));
        let dim: usize = get("dim")?.parse().map_err(|_| bad("dim"))?;
        let h: f64 = get("spacing")?.parse().map_err(|_| bad("spacing"))?;
        let origin = get("origin")?
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("origin"))?;
        let shape = get("shape")?
            .split(',')
            .map(|c| c.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("shape"))?;
        if origin.len() != dim || shape.len() != dim {
            return Err(bad("dimension mismatch in header"));
        }
        let domain: DomainSpec =
            serde_json::from_str(get("domain")?).map_err(|e| bad(&e.to_string()))?;
        if domain.hash() != *get("domain_hash")? {
            return Err(bad("domain hash mismatch"));
        }
        let meta = match header.get("meta") {
            Some(m) => Some(serde_json::from_str(m).map_err(|e| bad(&e.to_string()))?),
            None => None,
        };
        let lattice = Lattice::from_parts(h, origin, shape);
        let mut g = GridField::on_lattice(lattice, domain);
        g.meta = meta;
        if rows.len() != g.interior.len() {
            return Err(bad(&format!(
                "{} rows for {} interior nodes",
                rows.len(),
                g.interior.len()
            )));
        }
        for (j, row) in rows.iter().enumerate() {
            if row.len() != dim + 1 {
                return Err(bad("row width"));
            }
            let i = g.interior[j];
            let c = g.lattice.coords(i);
            if c.iter().zip(row).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs())) {
                return Err(bad("node coordinates do not match the lattice"));
            }
            g.values[i] = row[dim];
        }
        g.check_finite()?;
        Ok(g)
    }
}

struct GridBacked {
    grid: GridField,
    bound: f64,
}

impl FieldFn<f64> for GridBacked {
    fn eval(&self, x: &[f64]) -> f64 {
        self.grid.value_at(x)
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn far_field(&self) -> FarField<f64> {
        FarField::Constant {
            value: 0.0,
            center: self.grid.domain.anchor().to_vec(),
            radius: self.grid.domain.outer_radius(),
        }
    }

    fn smooth_at(&self, x: &[f64]) -> bool {
        self.grid.domain.contains(x)
    }

    fn lattice_step(&self) -> Option<f64> {
        Some(self.grid.h())
    }

    fn name(&self) -> String {
        format!("grid(h={})", self.grid.h())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> DomainSpec {
        DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn anchor_is_a_node_and_exterior_is_zero() {
        let g = GridField::sample(&disk(), 0.125, |_| 1.0).unwrap();
        assert!(g.interior().iter().any(|&i| g.node_coords(i) == vec![0.0, 0.0]));
        assert_eq!(g.value_at(&[0.0, 1.0]), 0.0);
        assert_eq!(g.value_at(&[2.0, 0.0]), 0.0);
        assert_eq!(g.value_at(&[0.0, 0.0]), 1.0);
        let outside = (0..g.lattice().len()).filter(|i| !g.interior().contains(i));
        assert!(outside.into_iter().all(|i| g.values()[i] == 0.0));
    }

    #[test]
    fn interpolation_is_exact_for_affine_data_away_from_the_boundary() {
        let g = GridField::sample(&disk(), 0.1, |x| 2.0 * x[0] - x[1] + 0.5).unwrap();
        let v = g.value_at(&[0.123, -0.234]);
        assert!((v - (2.0 * 0.123 + 0.234 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let mut g = GridField::sample(&disk(), 0.25, |x| (x[0] * 3.0).sin() + x[1] / 7.0).unwrap();
        g.set_meta(GridMeta {
            s: 0.75,
            k: 1,
            sign: "sup".into(),
            config: "{}".into(),
        });
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let back = GridField::read_from(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn read_rejects_tampering() {
        let g = GridField::sample(&disk(), 0.5, |_| 1.0).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let bad = text.replace("# gridfield v1", "# gridfield v9");
        assert!(GridField::read_from(bad.as_bytes()).is_err());
        let lines: Vec<&str> = text.lines().collect();
        let short = lines[..lines.len() - 1].join("\n");
        assert!(GridField::read_from(short.as_bytes()).is_err());
    }
}
