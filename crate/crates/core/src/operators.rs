//! Pointwise extremal operators `I_k^±`, batched evaluation and
//! discontinuity probes.

use rayon::prelude::*;

use crate::frames::{extremize, ExtremizeOptions, ExtremizeResult, Sign};
use crate::kernel::{Estimate, FractionalOrder, QuadratureSpec};
use crate::{Error, Real, Result, ScalarField};

/// `I_k^± u(x)` with the best frame found.
pub fn eval_ik_detailed<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    k: usize,
    sign: Sign,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
    opts: &ExtremizeOptions,
) -> Result<ExtremizeResult<T>> {
    if !u.smooth_at(x) {
        return Err(Error::PointRejected(format!(
            "{} is not C^2 near {:?}",
            u.name(),
            x.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
        )));
    }
    extremize(u, x, k, sign, order, q, opts)
}

/// `I_k^± u(x)`.
pub fn eval_ik<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    k: usize,
    sign: Sign,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
    opts: &ExtremizeOptions,
) -> Result<Estimate<T>> {
    eval_ik_detailed(u, x, k, sign, order, q, opts).map(|r| Estimate {
        value: r.value,
        error: r.error,
    })
}

/// [`eval_ik`] at every point; output order follows `points`.
pub fn eval_field<T: Real>(
    u: &ScalarField<T>,
    points: &[Vec<T>],
    k: usize,
    sign: Sign,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
    opts: &ExtremizeOptions,
) -> Vec<Result<Estimate<T>>> {
    points
        .par_iter()
        .map(|x| eval_ik(u, x, k, sign, order, q, opts))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<T> {
    pub value_at_x0: T,
    /// Values along the approaching sequence, in order.
    pub path: Vec<T>,
    /// Largest value over the second half of the path.
    pub limsup_estimate: T,
    /// `value_at_x0 - limsup_estimate`.
    pub gap: T,
    pub threshold: T,
    pub discontinuous: bool,
}

/// Compares `I_k^± u(x0)` with the values along `approach`. A discontinuity
/// is flagged when the gap exceeds three times `tolerance`.
#[allow(clippy::too_many_arguments)]
pub fn discontinuity_probe<T: Real>(
    u: &ScalarField<T>,
    x0: &[T],
    approach: &[Vec<T>],
    k: usize,
    sign: Sign,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
    opts: &ExtremizeOptions,
    tolerance: T,
) -> Result<ProbeReport<T>> {
    if approach.is_empty() {
        return Err(Error::InvalidParameter("empty approach sequence".into()));
    }
    let at = eval_ik(u, x0, k, sign, order, q, opts)?;
    let path = eval_field(u, approach, k, sign, order, q, opts)
        .into_iter()
        .map(|r| r.map(|e| e.value))
        .collect::<Result<Vec<T>>>()?;
    let tail = &path[path.len() / 2..];
    let limsup = tail.iter().copied().fold(T::neg_infinity(), T::max);
    let gap = at.value - limsup;
    let threshold = T::lit(3.0) * tolerance;
    Ok(ProbeReport {
        value_at_x0: at.value,
        path,
        limsup_estimate: limsup,
        gap,
        threshold,
        discontinuous: gap > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{make_counterexample, Counterexample};

    #[test]
    fn constant_field_is_zero() {
        let u = ScalarField::constant(2.0f64);
        let o = FractionalOrder::new(0.6).unwrap();
        let q = QuadratureSpec::default();
        let opts = ExtremizeOptions::quick();
        for sign in [Sign::Sup, Sign::Inf] {
            for k in 1..=2 {
                let v = eval_ik(&u, &[0.1, 0.2], k, sign, &o, &q, &opts).unwrap();
                assert!(v.value.abs() < 1e-10);
            }
        }
        let pts = vec![vec![0.0, 0.0], vec![3.0, -1.0], vec![0.5, 0.5]];
        let vals = eval_field(&u, &pts, 1, Sign::Sup, &o, &q, &opts);
        assert_eq!(vals.len(), 3);
        assert!(vals.iter().all(|v| v.as_ref().unwrap().value.abs() < 1e-10));
    }

    #[test]
    fn points_on_the_sphere_are_rejected() {
        let u = make_counterexample::<f64>(Counterexample::UpperAnnulus, 2).unwrap();
        let o = FractionalOrder::new(0.75).unwrap();
        let r = eval_ik(
            &u,
            &[0.0, 1.0],
            1,
            Sign::Sup,
            &o,
            &QuadratureSpec::default(),
            &ExtremizeOptions::quick(),
        );
        assert!(matches!(r, Err(Error::PointRejected(_))));
    }
}
