use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Uniformly convex domain `∩_j B_R(y_j)` (open).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    kind: DomainKind,
    radius: f64,
    centers: Vec<Vec<f64>>,
    /// Interior reference point used for boundary sampling and the
    /// enclosing ball.
    anchor: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Ball,
    Ellipse,
    BallList,
}

impl DomainSpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::BadDims("empty center".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        Ok(DomainSpec {
            kind: DomainKind::Ball,
            radius,
            anchor: center.clone(),
            centers: vec![center],
        })
    }

    /// `∩_j B_R(y_j)`. The centers' mean must lie inside.
    pub fn ball_list(centers: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        let n = centers.first().map(|c| c.len()).unwrap_or(0);
        if n == 0 || centers.iter().any(|c| c.len() != n) {
            return Err(Error::BadDims("centers must share a positive dimension".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        let mut anchor = vec![0.0; n];
        for c in &centers {
            for i in 0..n {
                anchor[i] += c[i] / centers.len() as f64;
            }
        }
        let d = DomainSpec {
            kind: DomainKind::BallList,
            radius,
            centers,
            anchor,
        };
        if !d.contains(&d.anchor) {
            return Err(Error::InvalidParameter("empty or degenerate ball intersection".into()));
        }
        Ok(d)
    }

    /// Planar ellipse with semi-axes `a >= b`, approximated from outside by
    /// `m` balls of radius `a^2/b` tangent to it, so the result is
    /// uniformly convex and contains the ellipse.
    pub fn ellipse(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a >= b && b > 0.0) || m < 3 {
            return Err(Error::InvalidParameter("need a >= b > 0 and m >= 3".into()));
        }
        let r = a * a / b;
        let centers = (0..m)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                let (px, py) = (a * t.cos(), b * t.sin());
                // outward normal of the ellipse at (px, py)
                let (nx, ny) = (px / (a * a), py / (b * b));
                let nn = (nx * nx + ny * ny).sqrt();
                vec![px - r * nx / nn, py - r * ny / nn]
            })
            .collect();
        let mut d = Self::ball_list(centers, r)?;
        d.kind = DomainKind::Ellipse;
        d.anchor = vec![0.0, 0.0];
        Ok(d)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Open membership.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        let r2 = self.radius * self.radius;
        self.centers.iter().all(|c| dist2(x, c) < r2)
    }

    /// Distance to the complement; zero outside.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .map(|c| self.radius - dist2(x, c).sqrt())
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Nearest boundary point for `x` inside: the radial projection onto the
    /// sphere that realizes the distance.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let (c, _) = self
            .centers
            .iter()
            .map(|c| (c, self.radius - dist2(x, c).sqrt()))
            .fold((&self.centers[0], f64::INFINITY), |b, v| if v.1 < b.1 { v } else { b });
        let d = dist2(x, c).sqrt();
        if d == 0.0 {
            let mut z = c.clone();
            z[0] += self.radius;
            return z;
        }
        x.iter()
            .zip(c)
            .map(|(xi, ci)| ci + self.radius * (xi - ci) / d)
            .collect()
    }

    /// Line parameters `(t_minus, t_plus)` where `x ∓ t xi` leaves the domain.
    /// `x` must be inside and `xi` a unit vector.
    pub fn exit_times(&self, x: &[f64], xi: &[f64]) -> (f64, f64) {
        let mut tp = f64::INFINITY;
        let mut tm = f64::INFINITY;
        for c in &self.centers {
            let mut b = 0.0;
            let mut q = 0.0;
            for i in 0..x.len() {
                let d = x[i] - c[i];
                b += d * xi[i];
                q += d * d;
            }
            let disc = (b * b - q + self.radius * self.radius).max(0.0).sqrt();
            tp = tp.min(-b + disc);
            tm = tm.min(b + disc);
        }
        (tm.max(0.0), tp.max(0.0))
    }

    /// Boundary points along `count` directions from the anchor (2-D:
    /// uniform angles, 1-D: two points, 3-D: a Fibonacci sphere).
    pub fn boundary_samples(&self, count: usize) -> Vec<Vec<f64>> {
        let dirs = sample_directions(self.dim(), count);
        dirs.iter()
            .map(|w| {
                let (_, tp) = self.exit_times(&self.anchor, w);
                self.anchor.iter().zip(w).map(|(a, wi)| a + tp * wi).collect()
            })
            .collect()
    }

    pub fn diam(&self) -> f64 {
        if self.kind == DomainKind::Ball {
            return 2.0 * self.radius;
        }
        let pts = self.boundary_samples(720);
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max(dist2(&pts[i], &pts[j]));
            }
        }
        best.sqrt()
    }

    /// Radius of a ball around the anchor containing the domain.
    pub fn outer_radius(&self) -> f64 {
        if self.kind == DomainKind::Ball {
            return self.radius;
        }
        self.boundary_samples(720)
            .iter()
            .map(|p| dist2(p, &self.anchor).sqrt())
            .fold(0.0, f64::max)
            * (1.0 + 1e-9)
    }

    /// Radius of a ball around the anchor inside the domain.
    pub fn inner_radius(&self) -> f64 {
        self.distance(&self.anchor)
    }

    /// Axis-aligned box `(lo, hi)` containing the domain.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let (tm, tp) = self.exit_times_support(&e);
            lo[i] = self.anchor[i] - tm;
            hi[i] = self.anchor[i] + tp;
        }
        (lo, hi)
    }

    /// Support function values of the domain along `±e` relative to the anchor.
    fn exit_times_support(&self, e: &[f64]) -> (f64, f64) {
        // support of an intersection is bounded by the smallest ball support;
        // sample the boundary for the exact extent
        let pts = self.boundary_samples(if self.kind == DomainKind::Ball { 2 } else { 2048 });
        let mut hi: f64 = 0.0;
        let mut lo: f64 = 0.0;
        for p in &pts {
            let v: f64 = p.iter().zip(&self.anchor).zip(e).map(|((a, b), c)| (a - b) * c).sum();
            hi = hi.max(v);
            lo = lo.max(-v);
        }
        if self.kind == DomainKind::Ball {
            return (self.radius, self.radius);
        }
        (lo * (1.0 + 1e-9) + 1e-12, hi * (1.0 + 1e-9) + 1e-12)
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self.kind {
            DomainKind::Ball => format!("ball(center={:?}, R={})", self.centers[0], self.radius),
            DomainKind::Ellipse => format!(
                "ellipse({} balls of R={})",
                self.centers.len(),
                self.radius
            ),
            DomainKind::BallList => format!(
                "ball_intersection({} balls of R={})",
                self.centers.len(),
                self.radius
            ),
        }
    }

    /// SHA-256 over the exact bit patterns of the representation.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{:?}", self.kind).as_bytes());
        h.update(self.radius.to_bits().to_le_bytes());
        for c in &self.centers {
            h.update([0xff]);
            for v in c {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        for v in &self.anchor {
            h.update(v.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn sample_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / count.max(4) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci sphere on the first three coordinates
            let m = count.max(8);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * j as f64;
                    let mut v = vec![0.0; n];
                    v[0] = r * t.cos();
                    v[1] = r * t.sin();
                    v[2] = z;
                    v
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ball_basics() {
        let b = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.5, 0.5]));
        assert!(!b.contains(&[1.0, 0.0]));
        assert!((b.distance(&[0.5, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(b.distance(&[2.0, 0.0]), 0.0);
        assert_eq!(b.diam(), 2.0);
        let z = b.project(&[0.3, 0.4]);
        assert!((z[0] - 0.6).abs() < 1e-15 && (z[1] - 0.8).abs() < 1e-15);
        let (tm, tp) = b.exit_times(&[0.5, 0.0], &[1.0, 0.0]);
        assert!((tp - 0.5).abs() < 1e-15 && (tm - 1.5).abs() < 1e-15);
    }

    #[test]
    fn ellipse_contains_the_ellipse_and_is_close_to_it() {
        let d = DomainSpec::ellipse(1.0, 0.6, 64).unwrap();
        for j in 0..100 {
            let t = j as f64 * 0.0628;
            let p = [0.999 * t.cos(), 0.999 * 0.6 * t.sin()];
            assert!(d.contains(&p));
        }
        assert!(!d.contains(&[1.05, 0.0]));
        assert!(!d.contains(&[0.0, 0.66]));
        assert!((d.diam() - 2.0).abs() < 0.05);
        assert!((d.outer_radius() - 1.0).abs() < 0.05);
    }

    #[test]
    fn hash_is_stable_and_discriminates() {
        let a = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let b = DomainSpec::ball(vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
    }

    proptest! {
        #[test]
        fn distance_positive_iff_inside(x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let d = DomainSpec::ball_list(vec![vec![0.3, 0.0], vec![-0.3, 0.0]], 1.0).unwrap();
            prop_assert_eq!(d.distance(&[x, y]) > 0.0, d.contains(&[x, y]));
        }

        #[test]
        fn distance_is_one_lipschitz(x in -1.0f64..1.0, y in -1.0f64..1.0, dx in -0.1f64..0.1, dy in -0.1f64..0.1) {
            let d = DomainSpec::ellipse(1.0, 0.7, 24).unwrap();
            let a = d.distance(&[x, y]);
            let b = d.distance(&[x + dx, y + dy]);
            prop_assert!((a - b).abs() <= (dx * dx + dy * dy).sqrt() + 1e-12);
        }
    }
}
