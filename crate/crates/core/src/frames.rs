//! Orthonormal `k`-frames in `R^N`, charts onto them, and a multi-start
//! derivative-free extremizer of `xi -> sum_i I_{xi_i} u(x)`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::kernel::{i_xi, FractionalOrder, QuadratureSpec};
use crate::{Error, Real, Result, ScalarField};

/// Ordered orthonormal set `{xi_1, .., xi_k}`; rows of a `k x N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    k: usize,
    n: usize,
    rows: Vec<T>,
}

impl<T: Real> Frame<T> {
    /// Checks orthonormality of the given rows.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map(|r| r.len()).unwrap_or(0);
        if k == 0 || k > n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::BadDims(format!("{k} rows of length {n}")));
        }
        let f = Frame {
            k,
            n,
            rows: rows.into_iter().flatten().collect(),
        };
        let slack = T::lit(1e-12).max(T::lit(100.0) * T::epsilon());
        if f.gram_deviation() > slack {
            return Err(Error::InvalidParameter("rows are not orthonormal".into()));
        }
        Ok(f)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.rows.chunks(self.n)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.rows
    }

    /// Max entry of `|G - I|` for the Gram matrix `G` of the rows.
    pub fn gram_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.k {
            for j in 0..self.k {
                let g: T = self.row(i).iter().zip(self.row(j)).map(|(a, b)| *a * *b).sum();
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.rows.iter().zip(&other.rows) {
            match a.partial_cmp(b) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        Ordering::Equal
    }
}

/// `{e_1, .., e_k}` in `R^n`.
pub fn canonical_frame<T: Real>(k: usize, n: usize) -> Result<Frame<T>> {
    check_dims(k, n)?;
    let mut rows = vec![T::zero(); k * n];
    for i in 0..k {
        rows[i * n + i] = T::one();
    }
    Ok(Frame { k, n, rows })
}

fn check_dims(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::BadDims(format!("need 1 <= k <= N, got k={k}, N={n}")))
    } else {
        Ok(())
    }
}

/// Parametrization of the set of orthonormal `k`-frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Products of plane rotations; `kN - k(k+1)/2` angles.
    Givens,
    /// A `k x N` matrix orthonormalized by Gram–Schmidt; `kN` entries.
    Matrix,
}

impl Chart {
    /// Givens for `k` in `{1, N}`, matrix otherwise. Single Givens angles
    /// cannot rotate a partial frame inside its own span, the matrix chart can.
    pub fn for_dims(k: usize, n: usize) -> Chart {
        if k == 1 || k == n {
            Chart::Givens
        } else {
            Chart::Matrix
        }
    }

    pub fn param_count(&self, k: usize, n: usize) -> usize {
        match self {
            Chart::Givens => k * n - k * (k + 1) / 2,
            Chart::Matrix => k * n,
        }
    }
}

/// Frame from chart parameters.
///
/// For the Givens chart, `Q = G_1 G_2 .. G_k` where `G_i` is the product of
/// rotations in the planes `(i, j)`, `j > i`, and `xi_i = Q e_i`.
pub fn frame_from_chart<T: Real>(params: &[T], k: usize, n: usize, chart: Chart) -> Result<Frame<T>> {
    check_dims(k, n)?;
    let expected = chart.param_count(k, n);
    if params.len() != expected {
        return Err(Error::BadDims(format!(
            "{chart:?} chart for k={k}, N={n} takes {expected} parameters, got {}",
            params.len()
        )));
    }
    match chart {
        Chart::Givens => {
            // columns of Q, stored column-major
            let mut q = vec![T::zero(); n * n];
            for i in 0..n {
                q[i * n + i] = T::one();
            }
            let mut p = params.iter();
            for i in 0..k {
                for j in i + 1..n {
                    let th = *p.next().unwrap();
                    let (sn, cs) = th.sin_cos();
                    for r in 0..n {
                        let ci = q[i * n + r];
                        let cj = q[j * n + r];
                        q[i * n + r] = cs * ci + sn * cj;
                        q[j * n + r] = -sn * ci + cs * cj;
                    }
                }
            }
            q.truncate(k * n);
            Ok(Frame { k, n, rows: q })
        }
        Chart::Matrix => {
            let mut rows = params.to_vec();
            let scale = params.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if scale == T::zero() {
                return Err(Error::DegenerateChart);
            }
            for _pass in 0..2 {
                for i in 0..k {
                    for j in 0..i {
                        let d: T = (0..n).map(|c| rows[i * n + c] * rows[j * n + c]).sum();
                        for c in 0..n {
                            let v = rows[j * n + c];
                            rows[i * n + c] -= d * v;
                        }
                    }
                    let nrm: T = (0..n).map(|c| rows[i * n + c] * rows[i * n + c]).sum::<T>().sqrt();
                    if !(nrm > T::lit(1e-10).max(T::lit(100.0) * T::epsilon()) * scale) {
                        return Err(Error::DegenerateChart);
                    }
                    for c in 0..n {
                        rows[i * n + c] /= nrm;
                    }
                }
            }
            Ok(Frame { k, n, rows })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Sup,
    Inf,
}

impl Sign {
    /// True when `a` is strictly better than `b`.
    fn better<T: Real>(&self, a: T, b: T) -> bool {
        match self {
            Sign::Sup => a > b,
            Sign::Inf => a < b,
        }
    }

    pub fn flip(&self) -> Sign {
        match self {
            Sign::Sup => Sign::Inf,
            Sign::Inf => Sign::Sup,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Sign::Sup => "sup",
            Sign::Inf => "inf",
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" | "+" | "plus" => Ok(Sign::Sup),
            "inf" | "-" | "minus" => Ok(Sign::Inf),
            _ => Err(Error::InvalidParameter(format!("unknown sign {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremizeOptions {
    /// Number of local searches (`M_0`).
    pub starts: usize,
    /// Random chart points sampled before choosing starts.
    pub coarse_samples: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Objective evaluations allowed per local search.
    pub max_evals: usize,
    pub chart: Option<Chart>,
    pub seed: u64,
}

impl Default for ExtremizeOptions {
    fn default() -> Self {
        ExtremizeOptions {
            starts: 32,
            coarse_samples: 128,
            initial_step: 0.25,
            min_step: 1e-6,
            max_evals: 2000,
            chart: None,
            seed: 0x5eed,
        }
    }
}

impl ExtremizeOptions {
    /// A light configuration for objectives known to be frame-independent.
    pub fn quick() -> Self {
        ExtremizeOptions {
            starts: 4,
            coarse_samples: 8,
            initial_step: 0.25,
            min_step: 1e-3,
            max_evals: 200,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremizeStatus {
    /// Every local search shrank its step below `min_step`.
    Converged,
    /// Some search ran out of evaluations.
    ToleranceLimited,
}

/// Best value found. No claim is made that the extremum is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremizeResult<T> {
    pub value: T,
    /// Summed quadrature error of the reported frame.
    pub error: T,
    pub frame: Frame<T>,
    pub status: ExtremizeStatus,
    /// Objective evaluations.
    pub samples: usize,
}

struct Objective<'a, T: Real> {
    u: &'a ScalarField<T>,
    x: &'a [T],
    k: usize,
    n: usize,
    chart: Chart,
    order: &'a FractionalOrder<T>,
    q: &'a QuadratureSpec<T>,
}

#[derive(Clone)]
struct Candidate<T: Real> {
    params: Vec<T>,
    frame: Frame<T>,
    value: T,
    error: T,
}

impl<T: Real> Objective<'_, T> {
    fn eval(&self, params: &[T]) -> Result<Candidate<T>> {
        let frame = frame_from_chart(params, self.k, self.n, self.chart)?;
        let (value, error) = frame_sum(self.u, self.x, &frame, self.order, self.q)?;
        Ok(Candidate {
            params: params.to_vec(),
            frame,
            value,
            error,
        })
    }
}

/// `sum_i I_{xi_i} u(x)` and its summed error.
pub fn frame_sum<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    frame: &Frame<T>,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
) -> Result<(T, T)> {
    let mut v = T::zero();
    let mut e = T::zero();
    for xi in frame.rows() {
        let r = i_xi(u, x, xi, order, q)?;
        v += r.value;
        e += r.error;
    }
    Ok((v, e))
}

fn prefer<T: Real>(sign: Sign, a: &Candidate<T>, b: &Candidate<T>) -> bool {
    if sign.better(a.value, b.value) {
        true
    } else if a.value == b.value {
        a.frame.lex_cmp(&b.frame) == Ordering::Less
    } else {
        false
    }
}

/// Chart parameters of frames every search should consider: the canonical
/// frame and its images under coordinate permutations when cheap.
fn anchor_params<T: Real>(k: usize, n: usize, chart: Chart) -> Vec<Vec<T>> {
    let half_pi = T::FRAC_PI_2();
    match chart {
        Chart::Givens => {
            let p = chart.param_count(k, n);
            let mut out = vec![vec![T::zero(); p]];
            // rotate e_1 onto each other axis (first angle of each plane (1, j))
            for j in 0..(n - 1).min(p) {
                let mut v = vec![T::zero(); p];
                v[j] = half_pi;
                out.push(v);
            }
            out
        }
        Chart::Matrix => {
            // one start per k-subset of coordinate axes
            let mut out = Vec::new();
            let mut idx: Vec<usize> = (0..k).collect();
            loop {
                let mut v = vec![T::zero(); k * n];
                for (i, &a) in idx.iter().enumerate() {
                    v[i * n + a] = T::one();
                }
                out.push(v);
                let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
                    break;
                };
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
            out
        }
    }
}

fn random_params<T: Real>(rng: &mut ChaCha8Rng, k: usize, n: usize, chart: Chart) -> Vec<T> {
    let p = chart.param_count(k, n);
    (0..p)
        .map(|_| match chart {
            Chart::Givens => T::lit(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)),
            Chart::Matrix => T::lit(rng.gen_range(-1.0..1.0)),
        })
        .collect()
}

/// Compass search from `start`. Returns the best candidate, evaluations
/// used, and whether the step fell below `min_step`.
fn compass<T: Real>(
    obj: &Objective<'_, T>,
    start: Candidate<T>,
    sign: Sign,
    opts: &ExtremizeOptions,
) -> Result<(Candidate<T>, usize, bool)> {
    let mut best = start;
    let mut step = opts.initial_step;
    let mut evals = 0;
    let p = best.params.len();
    if p == 0 {
        return Ok((best, 0, true));
    }
    while step >= opts.min_step {
        let mut improved = false;
        'dirs: for i in 0..p {
            for dir in [1.0, -1.0] {
                if evals >= opts.max_evals {
                    return Ok((best, evals, false));
                }
                let mut trial = best.params.clone();
                trial[i] += T::lit(dir * step);
                evals += 1;
                let c = match obj.eval(&trial) {
                    Ok(c) => c,
                    Err(Error::DegenerateChart) => continue,
                    Err(e) => return Err(e),
                };
                if sign.better(c.value, best.value) {
                    best = c;
                    improved = true;
                    break 'dirs;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, evals, true))
}

/// Sup or inf over orthonormal `k`-frames of `sum_i I_{xi_i} u(x)`.
pub fn extremize<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    k: usize,
    sign: Sign,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
    opts: &ExtremizeOptions,
) -> Result<ExtremizeResult<T>> {
    let n = x.len();
    check_dims(k, n)?;
    let chart = opts.chart.unwrap_or_else(|| Chart::for_dims(k, n));
    let obj = Objective {
        u,
        x,
        k,
        n,
        chart,
        order,
        q,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pool: Vec<Vec<T>> = anchor_params(k, n, chart);
    for _ in 0..opts.coarse_samples {
        pool.push(random_params(&mut rng, k, n, chart));
    }
    let evaluated: Vec<Result<Candidate<T>>> = pool.par_iter().map(|p| obj.eval(p)).collect();
    let mut coarse = Vec::with_capacity(evaluated.len());
    for c in evaluated {
        match c {
            Ok(c) => coarse.push(c),
            Err(Error::DegenerateChart) => {}
            Err(e) => return Err(e),
        }
    }
    let coarse_evals = pool.len();
    if coarse.is_empty() {
        return Err(Error::DegenerateChart);
    }

    // anchors always start a search; remaining starts go to the best samples
    let n_anchor = anchor_params::<T>(k, n, chart).len().min(coarse.len());
    let mut starts: Vec<Candidate<T>> = coarse[..n_anchor].to_vec();
    let mut rest: Vec<Candidate<T>> = coarse[n_anchor..].to_vec();
    rest.sort_by(|a, b| {
        if prefer(sign, a, b) {
            Ordering::Less
        } else if prefer(sign, b, a) {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    });
    let extra = opts.starts.saturating_sub(starts.len());
    starts.extend(rest.iter().take(extra).cloned());
    let coarse_best = coarse
        .iter()
        .skip(1)
        .fold(coarse[0].clone(), |b, c| if prefer(sign, c, &b) { c.clone() } else { b });

    let searched: Vec<Result<(Candidate<T>, usize, bool)>> = starts
        .into_par_iter()
        .map(|s| compass(&obj, s, sign, opts))
        .collect();
    let mut best = coarse_best;
    let mut evals = coarse_evals;
    let mut converged = true;
    for r in searched {
        let (c, e, ok) = r?;
        evals += e;
        converged &= ok;
        if prefer(sign, &c, &best) {
            best = c;
        }
    }
    Ok(ExtremizeResult {
        value: best.value,
        error: best.error,
        frame: best.frame,
        status: if converged {
            ExtremizeStatus::Converged
        } else {
            ExtremizeStatus::ToleranceLimited
        },
        samples: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_examples() {
        let f = canonical_frame::<f64>(1, 2).unwrap();
        assert_eq!(f.as_slice(), &[1.0, 0.0]);
        let f = canonical_frame::<f64>(2, 2).unwrap();
        assert_eq!(f.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let f = canonical_frame::<f64>(2, 3).unwrap();
        assert_eq!(f.as_slice(), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(canonical_frame::<f64>(3, 2), Err(Error::BadDims(_))));
        assert!(matches!(canonical_frame::<f64>(0, 2), Err(Error::BadDims(_))));
    }

    #[test]
    fn givens_chart_examples() {
        let f = frame_from_chart(&[0.0f64], 1, 2, Chart::Givens).unwrap();
        assert_eq!(f.as_slice(), &[1.0, 0.0]);
        let f = frame_from_chart(&[std::f64::consts::FRAC_PI_2], 1, 2, Chart::Givens).unwrap();
        assert!((f.row(0)[0]).abs() < 1e-16 && (f.row(0)[1] - 1.0).abs() < 1e-16);
        assert!(frame_from_chart(&[0.0f64, 1.0], 1, 2, Chart::Givens).is_err());
    }

    #[test]
    fn matrix_chart_rejects_rank_deficiency() {
        let e = frame_from_chart(&[1.0f64, 0.0, 0.0, 2.0, 0.0, 0.0], 2, 3, Chart::Matrix);
        assert_eq!(e.unwrap_err(), Error::DegenerateChart);
        let e = frame_from_chart(&[0.0f64; 6], 2, 3, Chart::Matrix);
        assert_eq!(e.unwrap_err(), Error::DegenerateChart);
    }

    #[test]
    fn chart_choice() {
        assert_eq!(Chart::for_dims(1, 3), Chart::Givens);
        assert_eq!(Chart::for_dims(2, 3), Chart::Matrix);
        assert_eq!(Chart::for_dims(3, 3), Chart::Givens);
        assert_eq!(anchor_params::<f64>(2, 4, Chart::Matrix).len(), 6);
        assert_eq!(Chart::for_dims(2, 4), Chart::Matrix);
        assert_eq!(Chart::Givens.param_count(2, 3), 3);
    }

    proptest! {
        #[test]
        fn givens_frames_are_orthonormal(
            n in 1usize..5,
            kk in 1usize..5,
            seed in any::<u64>(),
        ) {
            let k = kk.min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p: Vec<f64> = random_params(&mut rng, k, n, Chart::Givens);
            let f = frame_from_chart(&p, k, n, Chart::Givens).unwrap();
            prop_assert!(f.gram_deviation() < 1e-12);
        }

        #[test]
        fn matrix_frames_are_orthonormal(
            n in 1usize..5,
            kk in 1usize..5,
            seed in any::<u64>(),
        ) {
            let k = kk.min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p: Vec<f64> = random_params(&mut rng, k, n, Chart::Matrix);
            match frame_from_chart(&p, k, n, Chart::Matrix) {
                Ok(f) => prop_assert!(f.gram_deviation() < 1e-12),
                Err(e) => prop_assert_eq!(e, Error::DegenerateChart),
            }
        }

        #[test]
        fn single_angle_reaches_every_unit_vector_in_the_plane(th in -std::f64::consts::PI..std::f64::consts::PI) {
            let f = frame_from_chart(&[th], 1, 2, Chart::Givens).unwrap();
            prop_assert!((f.row(0)[0] - th.cos()).abs() < 1e-15);
            prop_assert!((f.row(0)[1] - th.sin()).abs() < 1e-15);
        }
    }
}
