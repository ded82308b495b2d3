//! Closed-form fields, constants and known values used as ground truth.

mod catalog;
mod verify;

pub use catalog::{catalog, catalog_json, sector_value, KnownValue, OracleEntry, Relation};
pub use verify::{verify_suite, VerifyOptions, VerifyRecord};

use crate::field::{
    plane_crossing, sphere_crossings, FarField, FnField, Kink, KinkKind,
};
use crate::quadrature::integrate_relative;
use crate::{Error, Real, Result, ScalarField};

/// `beta(a, b) = int_0^1 t^(-b) (1-t)^(-a) dt` for `a, b < 1`.
///
/// Each half is integrated after the substitution that removes its endpoint
/// singularity: on `[0, 1/2]`, `t = v^(1/(1-b))` turns the integrand into
/// `(1 - v^(1/(1-b)))^(-a) / (1-b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a < 1.0 && b < 1.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::NonIntegrable(format!(
            "beta({a}, {b}) needs both arguments below 1"
        )));
    }
    let half = |p: f64, q: f64| -> Result<f64> {
        // int_0^{1/2} t^(-p) (1-t)^(-q) dt
        let e = 1.0 / (1.0 - p);
        let top = 0.5f64.powf(1.0 - p);
        let r = integrate_relative(
            |v: f64| (1.0 - v.powf(e)).powf(-q),
            0.0,
            top,
            1e-13,
            4000,
        )?;
        Ok(r.value * e)
    };
    Ok(half(b, a)? + half(a, b)?)
}

/// Normalization `C_s = C_{1,s}` of the one-dimensional fractional Laplacian.
pub fn cs_constant(s: f64) -> f64 {
    crate::kernel::normalization(s)
}

/// `C_s beta(1-s, s)`, the magnitude of the barrier identity.
pub fn barrier_constant(s: f64) -> Result<f64> {
    Ok(cs_constant(s) * beta(1.0 - s, s)?)
}

/// `v(x) = M (R^2 - |x - c|^2)_+^s`. Inside `B_R(c)` every directional
/// derivative equals `-M C_s beta(1-s, s)`.
pub fn make_barrier<T: Real>(r: T, center: Vec<T>, m: T, s: T) -> ScalarField<T> {
    let c = center.clone();
    let c2 = center.clone();
    let c3 = center.clone();
    let r2 = r * r;
    FnField::new("barrier", m.abs() * r2.powf(s), move |x: &[T]| {
        let d: T = x.iter().zip(&c).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
        if d < r2 {
            m * (r2 - d).powf(s)
        } else {
            T::zero()
        }
    })
    .with_kinks(move |x, xi| match sphere_crossings(x, xi, &c2, r) {
        Some((a, b)) => vec![Kink::new(a, KinkKind::Singular), Kink::new(b, KinkKind::Singular)],
        None => Vec::new(),
    })
    .with_smooth(move |x| {
        let d: T = x.iter().zip(&c3).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
        d != r2
    })
    .with_far_field(FarField::Constant {
        value: T::zero(),
        center,
        radius: r,
    })
    .build()
}

/// Named piecewise fields with known extremal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Counterexample {
    /// `-1` on `{|x| > 1, x_N > 0}`, `0` elsewhere.
    UpperAnnulus,
    /// As [`Counterexample::UpperAnnulus`] but also `0` on the `e_N` axis.
    LineModified,
    /// `exp(-x_N)` on `{|x| > 1, x_N > 0}`, `0` elsewhere.
    HalflineExp,
    /// `exp(-x_N)` on the set `{x_1 = .. = x_{N-2} = 0, x_{N-1}^2 + x_N^2 > 1,
    /// x_N > 0}`, `0` elsewhere. Coincides with [`Counterexample::HalflineExp`]
    /// when `N = 2`.
    PlaneSectorExp,
    /// `1` where every `|x_i| > 1`, `0` elsewhere.
    Cross,
    /// `exp(-1/(1 - |x|^2))` in the unit ball, `0` outside.
    RadialBump,
}

impl Counterexample {
    pub const ALL: [Counterexample; 6] = [
        Counterexample::UpperAnnulus,
        Counterexample::LineModified,
        Counterexample::HalflineExp,
        Counterexample::PlaneSectorExp,
        Counterexample::Cross,
        Counterexample::RadialBump,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Counterexample::UpperAnnulus => "upper_annulus",
            Counterexample::LineModified => "line_modified",
            Counterexample::HalflineExp => "halfline_exp",
            Counterexample::PlaneSectorExp => "plane_sector_exp",
            Counterexample::Cross => "cross",
            Counterexample::RadialBump => "radial_bump",
        }
    }

    pub fn definition(&self) -> &'static str {
        match self {
            Counterexample::UpperAnnulus => "0 if |x| <= 1 or x_N <= 0; -1 otherwise",
            Counterexample::LineModified => {
                "0 if |x| <= 1 or x_N <= 0 or x_1^2+..+x_{N-1}^2 = 0; -1 otherwise"
            }
            Counterexample::HalflineExp => "0 if |x| <= 1 or x_N <= 0; exp(-x_N) otherwise",
            Counterexample::PlaneSectorExp => {
                "exp(-x_N) if x_1=..=x_{N-2}=0 and x_{N-1}^2+x_N^2 > 1 and x_N > 0; 0 otherwise"
            }
            Counterexample::Cross => "0 if some |x_i| <= 1; 1 otherwise",
            Counterexample::RadialBump => "exp(-1/(1-|x|^2)) if |x| < 1; 0 otherwise",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

fn norm2<T: Real>(x: &[T]) -> T {
    x.iter().map(|v| *v * *v).sum()
}

fn unit_sphere_and_floor<T: Real>(x: &[T], xi: &[T]) -> Vec<Kink<T>> {
    let n = x.len();
    let origin = vec![T::zero(); n];
    let mut k = Vec::new();
    if let Some((a, b)) = sphere_crossings(x, xi, &origin, T::one()) {
        k.push(Kink::new(a, KinkKind::Jump));
        k.push(Kink::new(b, KinkKind::Jump));
    }
    let mut e_n = vec![T::zero(); n];
    e_n[n - 1] = T::one();
    if let Some(t) = plane_crossing(x, xi, &e_n, T::zero()) {
        k.push(Kink::new(t, KinkKind::Jump));
    }
    k
}

/// Builds one of the [`Counterexample`] fields in dimension `n`.
pub fn make_counterexample<T: Real>(which: Counterexample, n: usize) -> Result<ScalarField<T>> {
    if n == 0 {
        return Err(Error::BadDims("dimension must be positive".into()));
    }
    if which == Counterexample::PlaneSectorExp && n < 2 {
        return Err(Error::BadDims("plane_sector_exp needs N >= 2".into()));
    }
    let name = which.name();
    let field = match which {
        Counterexample::UpperAnnulus => FnField::new(name, T::one(), move |x: &[T]| {
            if norm2(x) <= T::one() || x[n - 1] <= T::zero() {
                T::zero()
            } else {
                -T::one()
            }
        })
        .with_kinks(unit_sphere_and_floor)
        .with_smooth(move |x| {
            let r = norm2(x);
            r < T::one() || (r > T::one() && x[n - 1] != T::zero())
        })
        .build(),
        Counterexample::LineModified => FnField::new(name, T::one(), move |x: &[T]| {
            let lateral: T = x[..n - 1].iter().map(|v| *v * *v).sum();
            if norm2(x) <= T::one() || x[n - 1] <= T::zero() || lateral == T::zero() {
                T::zero()
            } else {
                -T::one()
            }
        })
        .with_kinks(unit_sphere_and_floor)
        .with_smooth(move |x| {
            let r = norm2(x);
            let lateral: T = x[..n - 1].iter().map(|v| *v * *v).sum();
            r < T::one() || (r > T::one() && x[n - 1] != T::zero() && lateral != T::zero())
        })
        .build(),
        Counterexample::HalflineExp => FnField::new(name, T::one(), move |x: &[T]| {
            if norm2(x) <= T::one() || x[n - 1] <= T::zero() {
                T::zero()
            } else {
                (-x[n - 1]).exp()
            }
        })
        .with_kinks(unit_sphere_and_floor)
        .with_smooth(move |x| {
            let r = norm2(x);
            r < T::one() || (r > T::one() && x[n - 1] != T::zero())
        })
        .build(),
        Counterexample::PlaneSectorExp => FnField::new(name, T::one(), move |x: &[T]| {
            let off_plane = x[..n - 2].iter().any(|v| *v != T::zero());
            let a = x[n - 2];
            let b = x[n - 1];
            if !off_plane && a * a + b * b > T::one() && b > T::zero() {
                (-b).exp()
            } else {
                T::zero()
            }
        })
        .with_kinks(move |x, xi| {
            // crossings of the unit circle and the floor inside the (N-1, N) plane
            let mut k = Vec::new();
            let (a0, b0) = (x[n - 2], x[n - 1]);
            let (da, db) = (xi[n - 2], xi[n - 1]);
            let qa = da * da + db * db;
            if qa > T::zero() {
                let qb = a0 * da + b0 * db;
                let qc = a0 * a0 + b0 * b0 - T::one();
                let disc = qb * qb - qa * qc;
                if disc >= T::zero() {
                    let r = disc.sqrt();
                    k.push(Kink::new((-qb - r) / qa, KinkKind::Jump));
                    k.push(Kink::new((-qb + r) / qa, KinkKind::Jump));
                }
            }
            if db != T::zero() {
                k.push(Kink::new(-b0 / db, KinkKind::Jump));
            }
            k
        })
        .with_smooth(move |x| {
            if n > 2 && x[..n - 2].iter().any(|v| *v != T::zero()) {
                // off the plane the field vanishes nearby only if N = 2
                return false;
            }
            let r = x[n - 2] * x[n - 2] + x[n - 1] * x[n - 1];
            r < T::one() || (r > T::one() && x[n - 1] != T::zero())
        })
        .build(),
        Counterexample::Cross => FnField::new(name, T::one(), move |x: &[T]| {
            if x.iter().any(|v| v.abs() <= T::one()) {
                T::zero()
            } else {
                T::one()
            }
        })
        .with_kinks(move |x, xi| {
            let mut k = Vec::new();
            for i in 0..n {
                if xi[i] != T::zero() {
                    k.push(Kink::new((T::one() - x[i]) / xi[i], KinkKind::Jump));
                    k.push(Kink::new((-T::one() - x[i]) / xi[i], KinkKind::Jump));
                }
            }
            k
        })
        .with_smooth(|x| x.iter().all(|v| v.abs() != T::one()))
        .build(),
        Counterexample::RadialBump => FnField::new(name, (-T::one()).exp(), move |x: &[T]| {
            let r = norm2(x);
            if r < T::one() {
                (-T::one() / (T::one() - r)).exp()
            } else {
                T::zero()
            }
        })
        .smooth_everywhere()
        .with_far_field(FarField::Constant {
            value: T::zero(),
            center: vec![T::zero(); n],
            radius: T::one(),
        })
        .build(),
    };
    Ok(field)
}

/// `J(s) = int_0^inf (1 - exp(-t^2)) t^(-1-2s) dt` by quadrature.
///
/// On `[0, 1]` the substitution `t = v^(1/(2-2s))` makes the integrand
/// bounded; on `[1, inf)` the exponential part is cut at `t = 12`.
pub fn gaussian_kernel_integral(s: f64) -> Result<f64> {
    let p = 1.0 / (2.0 - 2.0 * s);
    let g = |t: f64| {
        if t == 0.0 {
            1.0
        } else {
            -(-t * t).exp_m1() / (t * t)
        }
    };
    let inner = integrate_relative(|v: f64| g(v.powf(p)) * p, 0.0, 1.0, 1e-13, 4000)?;
    let outer = integrate_relative(
        |t: f64| (-t * t).exp() * t.powf(-1.0 - 2.0 * s),
        1.0,
        12.0,
        1e-13,
        4000,
    )?;
    Ok(inner.value + 1.0 / (2.0 * s) - outer.value)
}

/// Gaussian `w = exp(-alpha |x|^2)` on `R^n` with `I_k^- w + mu w = 0` away
/// from the origin, where `alpha^s = mu / (2 k C_s J(s))`.
pub fn make_entire_eigenfunction<T: Real>(
    mu: f64,
    k: usize,
    n: usize,
    s: f64,
) -> Result<(ScalarField<T>, f64)> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter("mu must be positive".into()));
    }
    if k == 0 || k >= n {
        return Err(Error::BadDims(format!("need 1 <= k < N, got k={k}, N={n}")));
    }
    let j = gaussian_kernel_integral(s)?;
    let alpha = (mu / (2.0 * k as f64 * cs_constant(s) * j)).powf(1.0 / s);
    let a = T::lit(alpha);
    let field = FnField::new("entire_gaussian", T::one(), move |x: &[T]| (-a * norm2(x)).exp())
        .smooth_everywhere()
        .build();
    Ok((field, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn beta_examples() {
        assert!((beta(0.5, 0.5).unwrap() - PI).abs() < 1e-12);
        assert!((beta(0.25, 0.75).unwrap() - PI * 2f64.sqrt()).abs() < 1e-12);
        // frozen high-precision values
        assert!((beta(0.45, 0.55).unwrap() - 3.180753001191456).abs() < 1e-12);
        assert!((beta(0.1, 0.9).unwrap() - 10.16640738463052).abs() < 1e-10);
        assert!(beta(1.0, 0.2).is_err());
        assert!(beta(0.2, 1.5).is_err());
    }

    #[test]
    fn beta_negative_arguments_match_polynomial_integral() {
        // int_0^1 t (1-t) dt = 1/6
        assert!((beta(-1.0, -1.0).unwrap() - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn cs_frozen_values() {
        assert!((cs_constant(0.5) - 1.0 / PI).abs() < 1e-14);
        assert!((cs_constant(0.55) - 0.329005693451068).abs() < 1e-13);
        assert!((cs_constant(0.75) - 0.299206710301075).abs() < 1e-13);
        assert!((cs_constant(0.9) - 0.164904938818303).abs() < 1e-13);
    }

    #[test]
    fn barrier_constant_equals_gamma_one_plus_two_s() {
        use statrs::function::gamma::gamma;
        for s in [0.3, 0.55, 0.75, 0.9] {
            let b = barrier_constant(s).unwrap();
            assert!((b - gamma(1.0 + 2.0 * s)).abs() < 1e-11, "s={s}");
        }
    }

    #[test]
    fn gaussian_integral_matches_closed_form() {
        use statrs::function::gamma::gamma;
        for s in [0.3, 0.55, 0.75, 0.9] {
            let j = gaussian_kernel_integral(s).unwrap();
            let exact = gamma(1.0 - s) / (2.0 * s);
            assert!((j - exact).abs() < 1e-11, "s={s}: {j} vs {exact}");
        }
        assert!((gaussian_kernel_integral(0.75).unwrap() - 2.417073272147939).abs() < 1e-12);
    }

    #[test]
    fn entire_eigenfunction_alpha() {
        let (_, a) = make_entire_eigenfunction::<f64>(1.0, 1, 2, 0.75).unwrap();
        assert!((a - 0.6113338995358346).abs() < 1e-12);
        // mu -> 2^{2s} mu gives alpha -> 4 alpha
        let (_, a2) = make_entire_eigenfunction::<f64>(2f64.powf(1.5), 1, 2, 0.75).unwrap();
        assert!((a2 / a - 4.0).abs() < 1e-12);
        let (_, tiny) = make_entire_eigenfunction::<f64>(1e-9, 1, 2, 0.75).unwrap();
        assert!(tiny < 1e-10);
        assert!(make_entire_eigenfunction::<f64>(1.0, 2, 2, 0.75).is_err());
    }

    #[test]
    fn counterexample_indicator_logic() {
        let a = make_counterexample::<f64>(Counterexample::UpperAnnulus, 2).unwrap();
        assert_eq!(a.eval(&[0.0, 1.0]), 0.0);
        assert_eq!(a.eval(&[0.0, 1.0 + 1e-12]), -1.0);
        assert_eq!(a.eval(&[3.0, 0.0]), 0.0);
        assert_eq!(a.eval(&[3.0, -1.0]), 0.0);
        let l = make_counterexample::<f64>(Counterexample::LineModified, 2).unwrap();
        assert_eq!(l.eval(&[0.0, 2.0]), 0.0);
        assert_eq!(l.eval(&[0.1, 2.0]), -1.0);
        let h = make_counterexample::<f64>(Counterexample::HalflineExp, 2).unwrap();
        assert_eq!(h.eval(&[0.0, 2.0]), (-2.0f64).exp());
        let p = make_counterexample::<f64>(Counterexample::PlaneSectorExp, 3).unwrap();
        assert_eq!(p.eval(&[0.0, 0.0, 2.0]), (-2.0f64).exp());
        assert_eq!(p.eval(&[0.1, 0.0, 2.0]), 0.0);
        let c = make_counterexample::<f64>(Counterexample::Cross, 2).unwrap();
        assert_eq!(c.eval(&[1.5, 1.5]), 1.0);
        assert_eq!(c.eval(&[1.0, 5.0]), 0.0);
        let b = make_counterexample::<f64>(Counterexample::RadialBump, 2).unwrap();
        assert_eq!(b.eval(&[0.0, 0.0]), (-1.0f64).exp());
        assert_eq!(b.eval(&[1.0, 0.0]), 0.0);
        assert!(make_counterexample::<f64>(Counterexample::PlaneSectorExp, 1).is_err());
    }

    #[test]
    fn barrier_values_and_support() {
        let b = make_barrier(2.0, vec![1.0, 0.0], 3.0, 0.5);
        assert!((b.eval(&[1.0f64, 0.0]) - 6.0).abs() < 1e-15);
        assert_eq!(b.eval(&[3.0, 0.0]), 0.0);
        assert!(b.is_dirichlet());
        assert_eq!(b.kinks(&[1.0, 0.0], &[1.0, 0.0]).len(), 2);
    }
}
