//! Post-processing of grid solutions: boundary decay exponents, discrete
//! Hölder seminorms and Hopf constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::solver::domain::dist2;
use crate::solver::GridField;
use crate::{Error, Result};

pub const MIN_BAND_NODES: usize = 20;
pub const RANDOM_PAIRS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Slope of `log u` against `log d`.
    pub gamma: f64,
    /// `u ~ c_fit * d^gamma`.
    pub c_fit: f64,
    /// Coefficient of determination of the fit.
    pub quality: f64,
    pub nodes: usize,
    pub band: (f64, f64),
}

/// Least-squares fit of `log u = log c + gamma log d` over interior nodes with
/// `2h <= d <= 0.1 diam` and `u > 0`.
pub fn boundary_exponent(u: &GridField) -> Result<ExponentFit> {
    let dom = u.domain();
    let band = (2.0 * u.h(), 0.1 * dom.diam());
    let mut pts = Vec::new();
    for &i in u.interior() {
        let x = u.node_coords(i);
        let d = dom.distance(&x);
        let v = u.values()[i];
        if d >= band.0 && d <= band.1 && v > 0.0 {
            pts.push((d.ln(), v.ln()));
        }
    }
    if pts.len() < MIN_BAND_NODES {
        return Err(Error::InsufficientBand(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientBand(pts.len()));
    }
    let gamma = sxy / sxx;
    let quality = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(ExponentFit {
        gamma,
        c_fit: (my - gamma * mx).exp(),
        quality,
        nodes: pts.len(),
        band,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub value: f64,
    pub pairs: usize,
    /// Distance of the pair attaining the max.
    pub binding_distance: f64,
}

/// Max of `|u(x) - u(y)| / |x - y|^alpha` over lattice neighbour pairs
/// (including exterior neighbours, where `u = 0`), node to boundary
/// projection pairs within `4h` of the boundary, and `RANDOM_PAIRS`
/// seeded random interior pairs.
pub fn holder_seminorm(u: &GridField, alpha: f64, seed: u64) -> Result<HolderEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1]")));
    }
    let mut est = HolderEstimate {
        alpha,
        value: 0.0,
        pairs: 0,
        binding_distance: 0.0,
    };
    let mut take = |du: f64, dist: f64| {
        est.pairs += 1;
        if dist > 0.0 {
            let q = du.abs() / dist.powf(alpha);
            if q > est.value {
                est.value = q;
                est.binding_distance = dist;
            }
        }
    };

    let lat = u.lattice();
    let n = lat.dim();
    let h = lat.h();
    let vals = u.values();
    let offsets: Vec<Vec<isize>> = (0..3usize.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let o = (c % 3) as isize - 1;
                    c /= 3;
                    o
                })
                .collect()
        })
        .filter(|o: &Vec<isize>| o.iter().any(|&v| v != 0))
        .collect();
    for &i in u.interior() {
        let m = lat.multi(i);
        'next: for o in &offsets {
            let mut j = 0usize;
            for a in 0..n {
                let c = m[a] as isize + o[a];
                if c < 0 || c >= lat.shape()[a] as isize {
                    continue 'next;
                }
                j += c as usize * lat.strides()[a];
            }
            let len = h * (o.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt();
            take(vals[i] - vals[j], len);
        }
        let x = lat.coords(i);
        let d = u.domain().distance(&x);
        if d < 4.0 * h {
            take(vals[i], d);
        }
    }

    let interior = u.interior();
    if interior.len() > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_PAIRS {
            let a = interior[rng.gen_range(0..interior.len())];
            let b = interior[rng.gen_range(0..interior.len())];
            if a != b {
                let d = dist2(&lat.coords(a), &lat.coords(b)).sqrt();
                take(vals[a] - vals[b], d);
            }
        }
    }
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfEstimate {
    /// `min u / d^s` over interior nodes.
    pub constant: f64,
    /// Distance to the boundary at the minimizing node.
    pub at_distance: f64,
}

/// Discrete Hopf constant `min_x u(x) / d(x)^s`. Fails on negative values.
pub fn hopf_constant(u: &GridField, s: f64) -> Result<HopfEstimate> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} outside (0, 1)")));
    }
    let scale = u.sup_norm().max(1.0);
    let mut out = HopfEstimate {
        constant: f64::INFINITY,
        at_distance: 0.0,
    };
    for &i in u.interior() {
        let v = u.values()[i];
        if v < -1e-12 * scale {
            return Err(Error::NegativeValues(v));
        }
        let d = u.domain().distance(&u.node_coords(i));
        let q = v.max(0.0) / d.powf(s);
        if q < out.constant {
            out = HopfEstimate {
                constant: q,
                at_distance: d,
            };
        }
    }
    if u.interior().is_empty() {
        out.constant = 0.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::DomainSpec;
    use proptest::prelude::*;

    fn barrier(h: f64, s: f64) -> GridField {
        let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        GridField::sample(&dom, h, |x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).powf(s)).unwrap()
    }

    #[test]
    fn barrier_exponent_is_close_to_s() {
        let f = boundary_exponent(&barrier(1.0 / 64.0, 0.75)).unwrap();
        assert!((f.gamma - 0.75).abs() < 0.05, "{f:?}");
        assert!(f.quality > 0.99);
    }

    #[test]
    fn empty_band_is_reported() {
        let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let u = GridField::zeros(&dom, 0.125).unwrap();
        assert!(matches!(boundary_exponent(&u), Err(Error::InsufficientBand(0))));
    }

    #[test]
    fn holder_at_one_grows_and_at_s_stays_bounded() {
        let s = 0.75;
        let c1 = holder_seminorm(&barrier(1.0 / 16.0, s), 1.0, 1).unwrap().value;
        let c2 = holder_seminorm(&barrier(1.0 / 64.0, s), 1.0, 1).unwrap().value;
        assert!(c2 > 1.3 * c1, "{c1} {c2}");
        let a1 = holder_seminorm(&barrier(1.0 / 16.0, s), s, 1).unwrap().value;
        let a2 = holder_seminorm(&barrier(1.0 / 64.0, s), s, 1).unwrap().value;
        assert!(a2 < 1.2 * a1 && a2 < 2.0, "{a1} {a2}");
    }

    #[test]
    fn hopf_constants() {
        let b = hopf_constant(&barrier(1.0 / 32.0, 0.75), 0.75).unwrap();
        assert!(b.constant >= 1.0, "{b:?}");
        let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let bump = |h: f64| {
            GridField::sample(&dom, h, |x| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2 < 1.0 { (-1.0 / (1.0 - r2)).exp() } else { 0.0 }
            })
            .unwrap()
        };
        let c1 = hopf_constant(&bump(1.0 / 16.0), 0.75).unwrap().constant;
        let c2 = hopf_constant(&bump(1.0 / 64.0), 0.75).unwrap().constant;
        assert!(c2 < 0.1 * c1, "{c1} {c2}");
        let neg = GridField::sample(&dom, 0.25, |_| -1.0).unwrap();
        assert!(matches!(hopf_constant(&neg, 0.75), Err(Error::NegativeValues(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn exponent_is_invariant_under_scaling(c in 0.1f64..10.0, s in 0.3f64..0.9) {
            let u = barrier(1.0 / 32.0, s);
            let dom = u.domain().clone();
            let v = GridField::sample(&dom, 1.0 / 32.0, |x| c * (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).powf(s)).unwrap();
            let a = boundary_exponent(&u).unwrap();
            let b = boundary_exponent(&v).unwrap();
            prop_assert!((a.gamma - b.gamma).abs() < 1e-9);
            prop_assert!((b.c_fit / a.c_fit - c).abs() < 1e-6 * c);
        }

        // all pair distances stay below 1 on a ball of radius 1/2
        #[test]
        fn seminorm_is_nondecreasing_in_alpha_for_short_pairs(a in 0.1f64..0.9, da in 0.01f64..0.1) {
            let dom = DomainSpec::ball(vec![0.0, 0.0], 0.45).unwrap();
            let u = GridField::sample(&dom, 1.0 / 32.0, |x| (0.2025 - x[0] * x[0] - x[1] * x[1]).max(0.0).sqrt()).unwrap();
            let lo = holder_seminorm(&u, a, 3).unwrap().value;
            let hi = holder_seminorm(&u, a + da, 3).unwrap().value;
            prop_assert!(hi >= lo);
        }
    }
}
