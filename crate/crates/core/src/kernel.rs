//! Second differences and the singular line integral
//! `I_xi u(x) = C_s int_0^inf delta(u, x, t xi) t^(-1-2s) dt`.
//!
//! The integral is split into three pieces:
//!
//! * a core `[0, t_c]` where `delta = A t^2 + B t^4` is fitted from three
//!   samples and integrated in closed form,
//! * a body `[t_c, T]` integrated by adaptive Gauss–Kronrod on a partition
//!   graded toward zero, with breakpoints at declared kinks and a geometric
//!   mesh past `rho`,
//! * a tail `[T, inf)` that is exact when the field is constant outside a
//!   ball and bounded otherwise.
//!
//! Grid-backed fields use the lattice rule of [`LatticeRule`] instead.

use crate::field::{exit_parameter, FarField, KinkKind, ScalarField};
use crate::quadrature::{gauss_legendre, graded_mesh, integrate_partition};
use crate::{Error, Real, Result};

/// Fractional order `s` with its cached normalization constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder<T> {
    s: T,
    cs: T,
}

impl<T: Real> FractionalOrder<T> {
    pub fn new(s: T) -> Result<Self> {
        let sf = s.as_f64();
        if !(sf > 0.0 && sf < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {sf} not in (0, 1)")));
        }
        Ok(FractionalOrder {
            s,
            cs: T::lit(normalization(sf)),
        })
    }

    /// Same order with a caller-chosen constant. Used to check that the
    /// identity suite detects a wrong normalization.
    pub fn with_constant(s: T, cs: T) -> Result<Self> {
        let mut o = Self::new(s)?;
        o.cs = cs;
        Ok(o)
    }

    #[inline]
    pub fn s(&self) -> T {
        self.s
    }

    #[inline]
    pub fn cs(&self) -> T {
        self.cs
    }
}

/// `C_{1,s} = 4^s Γ(s + 1/2) / (sqrt(pi) |Γ(-s)|)`, written with
/// `|Γ(-s)| = Γ(1 - s) / s` so that only positive arguments reach Γ.
pub fn normalization(s: f64) -> f64 {
    use statrs::function::gamma::gamma;
    4f64.powf(s) * gamma(s + 0.5) * s / (std::f64::consts::PI.sqrt() * gamma(1.0 - s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMode {
    /// Analytic when the far field is constant, truncated otherwise.
    #[default]
    Auto,
    /// Exact tail; requires a constant far field.
    Analytic,
    /// Integrate up to `t_max` and bound the rest by the field bound.
    Truncated,
}

/// Quadrature settings for [`i_xi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    /// Near/far split radius.
    pub rho: T,
    /// Grading exponent toward `t = 0`; raised to at least `max(2, 2/(2-2s))`.
    pub grading: T,
    /// Initial number of graded cells on `[0, rho]`.
    pub cells: usize,
    pub tail_mode: TailMode,
    pub t_max: T,
    /// Absolute error target for the returned value.
    pub tol: T,
    /// Cell budget of the adaptive integrator.
    pub max_cells: usize,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        let tol = if T::epsilon() > T::lit(1e-10) { 1e-3 } else { 1e-8 };
        QuadratureSpec {
            rho: T::one(),
            grading: T::one(),
            cells: 16,
            tail_mode: TailMode::Auto,
            t_max: T::lit(1e10),
            tol: T::lit(tol),
            max_cells: 20_000,
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_rho(mut self, rho: T) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > T::zero()) {
            return Err(Error::InvalidParameter("rho must be positive".into()));
        }
        if !(self.t_max > self.rho) {
            return Err(Error::InvalidParameter("t_max must exceed rho".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.grading < T::one() {
            return Err(Error::InvalidParameter("grading must be >= 1".into()));
        }
        if self.cells == 0 || self.max_cells < 2 {
            return Err(Error::InvalidParameter("cell counts too small".into()));
        }
        Ok(())
    }
}

/// Value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

/// `u(x + y) + u(x - y) - 2 u(x)`.
pub fn delta<T: Real>(u: &ScalarField<T>, x: &[T], y: &[T]) -> T {
    let p: Vec<T> = x.iter().zip(y).map(|(a, b)| *a + *b).collect();
    let m: Vec<T> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
    u.eval(&p) + u.eval(&m) - T::lit(2.0) * u.eval(x)
}

fn check_direction<T: Real>(x: &[T], xi: &[T]) -> Result<()> {
    if x.len() != xi.len() || x.is_empty() {
        return Err(Error::BadDims(format!(
            "point has {} coordinates, direction {}",
            x.len(),
            xi.len()
        )));
    }
    let n2: T = xi.iter().map(|v| *v * *v).sum();
    let slack = T::lit(1e-12).max(T::lit(10.0) * T::epsilon());
    if (n2.sqrt() - T::one()).abs() > slack {
        return Err(Error::InvalidParameter(format!(
            "direction not unit: |xi| = {}",
            n2.sqrt()
        )));
    }
    Ok(())
}

/// Evaluates `t -> delta(u, x, t xi)` with reused buffers.
struct LineProbe<'a, T: Real> {
    u: &'a ScalarField<T>,
    x: &'a [T],
    xi: &'a [T],
    u0: T,
    plus: Vec<T>,
    minus: Vec<T>,
}

impl<'a, T: Real> LineProbe<'a, T> {
    fn new(u: &'a ScalarField<T>, x: &'a [T], xi: &'a [T], u0: T) -> Self {
        LineProbe {
            u,
            x,
            xi,
            u0,
            plus: x.to_vec(),
            minus: x.to_vec(),
        }
    }

    #[inline]
    fn delta(&mut self, t: T) -> T {
        for i in 0..self.x.len() {
            self.plus[i] = self.x[i] + t * self.xi[i];
            self.minus[i] = self.x[i] - t * self.xi[i];
        }
        self.u.eval(&self.plus) + self.u.eval(&self.minus) - T::lit(2.0) * self.u0
    }
}

struct Piece<T> {
    value: T,
    error: T,
}

/// Closed-form integral over `[0, tc]` of the fit `A t^2 + B t^4` against
/// `t^(-1-2s)`.
fn core_piece<T: Real>(probe: &mut LineProbe<'_, T>, tc: T, s: T, bound: T) -> Result<Piece<T>> {
    let two = T::lit(2.0);
    let half = tc * T::lit(0.5);
    let quarter = tc * T::lit(0.25);
    let d1 = probe.delta(tc);
    let d2 = probe.delta(half);
    let d4 = probe.delta(quarter);
    let a1 = d1 / (tc * tc);
    let a2 = d2 / (half * half);
    let a4 = d4 / (quarter * quarter);

    let noise = T::lit(1e3) * T::epsilon() * (probe.u0.abs() + bound);
    let growth = T::lit(1.25);
    if d4.abs() > noise && a4.abs() > growth * a2.abs() && a2.abs() > growth * a1.abs() {
        return Err(Error::NonIntegrableSingularity);
    }

    let b_tc2 = (a1 - a2) * T::lit(4.0 / 3.0);
    let a = a2 - (a1 - a2) / T::lit(3.0);
    let p = tc.powf(two - two * s);
    let value = p * (a / (two - two * s) + b_tc2 / (T::lit(4.0) - two * s));
    let predicted = a + b_tc2 / T::lit(16.0);
    // rounding level of each sample, from the magnitudes actually combined
    let scale = T::lit(4.0) * T::epsilon() * (T::lit(4.0) * probe.u0.abs() + d1.abs());
    let r2 = scale / (half * half);
    let r4 = scale / (quarter * quarter);
    let mismatch = ((a4 - predicted).abs() - r4).max(T::zero());
    let error = (mismatch + r2) * p / (two - two * s);
    Ok(Piece { value, error })
}

struct FarEnd<T> {
    end: T,
    tail: Piece<T>,
}

fn far_end<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    xi: &[T],
    u0: T,
    s: T,
    q: &QuadratureSpec<T>,
) -> Result<FarEnd<T>> {
    let two = T::lit(2.0);
    let far = u.far_field();
    let analytic = match (q.tail_mode, &far) {
        (TailMode::Analytic, FarField::Bounded) => {
            return Err(Error::InvalidParameter(
                "analytic tail needs a constant far field".into(),
            ))
        }
        (TailMode::Truncated, _) => false,
        (_, FarField::Constant { .. }) => true,
        (_, FarField::Bounded) => false,
    };
    if analytic {
        if let FarField::Constant {
            value,
            center,
            radius,
        } = far
        {
            let end = exit_parameter(x, xi, &center, radius);
            return Ok(FarEnd {
                end,
                tail: Piece {
                    // filled in once the body start is known
                    value: two * (value - u0),
                    error: T::zero(),
                },
            });
        }
    }
    let end = q.t_max;
    let w = end.powf(-two * s) / (two * s);
    Ok(FarEnd {
        end,
        tail: Piece {
            value: -two * u0,
            error: two * u.bound() * w,
        },
    })
}

/// Sorted positive kink distances with their kinds, merged over `±t`.
fn positive_kinks<T: Real>(u: &ScalarField<T>, x: &[T], xi: &[T]) -> Vec<(T, KinkKind)> {
    let mut k: Vec<(T, KinkKind)> = u
        .kinks(x, xi)
        .into_iter()
        .filter(|k| k.tau.is_finite() && k.tau != T::zero())
        .map(|k| (k.tau.abs(), k.kind))
        .collect();
    k.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    k
}

fn effective_grading<T: Real>(q: &QuadratureSpec<T>, s: T) -> T {
    let two = T::lit(2.0);
    q.grading.max(two).max(two / (two - two * s))
}

/// Core radius. Fit error grows like `tc^(6-2s)` and rounding like
/// `eps tc^(-2s)`, which balance near `eps^(1/6)`.
fn core_radius<T: Real>(rho: T, first_kink: Option<T>) -> T {
    let mut tc = rho * T::lit(0.5) * T::epsilon().powf(T::lit(1.0 / 6.0));
    if let Some(k) = first_kink {
        tc = tc.min(k * T::lit(0.25));
    }
    tc
}

fn body_breakpoints<T: Real>(
    tc: T,
    rho: T,
    end: T,
    kinks: &[(T, KinkKind)],
    q: &QuadratureSpec<T>,
    s: T,
) -> Vec<T> {
    let g = effective_grading(q, s);
    let mut pts = vec![tc, end];
    let near_end = rho.min(end);
    if near_end > tc {
        pts.extend(
            graded_mesh(T::zero(), near_end, q.cells, g, T::one())
                .into_iter()
                .filter(|t| *t > tc && *t < near_end),
        );
        pts.push(near_end);
    }
    let mut t = rho * T::lit(2.0);
    while t < end {
        if t > tc {
            pts.push(t);
        }
        t *= T::lit(2.0);
    }
    pts.extend(kinks.iter().map(|k| k.0).filter(|t| *t > tc && *t < end));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tiny = T::lit(4.0) * T::epsilon();
    pts.dedup_by(|b, a| (*b - *a).abs() <= tiny * a.abs());
    pts
}

/// `I_xi u(x)` with an absolute error estimate.
pub fn i_xi<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    xi: &[T],
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    check_direction(x, xi)?;
    q.validate()?;
    if let Some(h) = u.lattice_step() {
        return lattice_i_xi(u, x, xi, h, order);
    }
    i_xi_split_inner(u, u, x, xi, None, order, q)
}

/// Split evaluation: `phi` on `[0, rho]`, `u` on `[rho, inf)`, with the
/// center value taken from `u`.
pub fn i_xi_split<T: Real>(
    u: &ScalarField<T>,
    phi: &ScalarField<T>,
    x: &[T],
    xi: &[T],
    rho: T,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    check_direction(x, xi)?;
    q.validate()?;
    if !(rho > T::zero()) {
        return Err(Error::InvalidParameter("rho must be positive".into()));
    }
    i_xi_split_inner(u, phi, x, xi, Some(rho), order, q)
}

fn i_xi_split_inner<T: Real>(
    u: &ScalarField<T>,
    phi: &ScalarField<T>,
    x: &[T],
    xi: &[T],
    split: Option<T>,
    order: &FractionalOrder<T>,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    let s = order.s();
    let two = T::lit(2.0);
    let cs = order.cs();
    let u0 = u.eval(x);
    let rho = split.unwrap_or(q.rho);
    let budget = q.tol / cs;

    let far = far_end(u, x, xi, u0, s, q)?;
    let u_kinks = positive_kinks(u, x, xi);
    let phi_kinks = if split.is_some() {
        positive_kinks(phi, x, xi)
    } else {
        u_kinks.clone()
    };

    // Only phi matters below rho in the split form.
    let near_limit = if split.is_some() { rho } else { far.end.max(rho) };
    let first = phi_kinks
        .iter()
        .map(|k| k.0)
        .find(|t| *t < near_limit);
    let mut phi_probe = LineProbe::new(phi, x, xi, u0);
    // Shrink the core while its error estimate dominates the budget; keep
    // the best radius seen since rounding grows as the core shrinks.
    let mut tc = core_radius(rho, first);
    let mut core = core_piece(&mut phi_probe, tc, s, phi.bound())?;
    let mut trial = tc;
    for _ in 0..10 {
        if core.error <= budget * T::lit(0.1) {
            break;
        }
        trial *= T::lit(0.25);
        let c = core_piece(&mut phi_probe, trial, s, phi.bound())?;
        if c.error < core.error {
            core = c;
            tc = trial;
        }
    }

    let f = |t: T| t.powf(-T::one() - two * s);
    let (end, tail) = if split.is_some() || far.end > tc {
        (far.end.max(tc), far.tail)
    } else {
        (tc, far.tail)
    };
    let tail_value = tail.value * end.powf(-two * s) / (two * s);
    let tail_error = tail.error;

    let remaining = budget - core.error - tail_error;
    if !(remaining > T::zero()) {
        return Err(Error::TolNotMet {
            estimate: ((core.error + tail_error) * cs).as_f64(),
            tol: q.tol.as_f64(),
        });
    }

    let (body_value, body_error) = match split {
        None => {
            let pts = body_breakpoints(tc, rho, end, &u_kinks, q, s);
            let r = integrate_partition(|t| phi_probe.delta(t) * f(t), &pts, remaining, q.max_cells)?;
            (r.value, r.error)
        }
        Some(rho) => {
            let near_pts = body_breakpoints(tc, rho, rho, &phi_kinks, q, s);
            let near = integrate_partition(
                |t| phi_probe.delta(t) * f(t),
                &near_pts,
                remaining * T::lit(0.5),
                q.max_cells,
            )?;
            let mut u_probe = LineProbe::new(u, x, xi, u0);
            let (far_value, far_error) = if end > rho {
                let far_pts = body_breakpoints(rho, rho, end, &u_kinks, q, s);
                let r = integrate_partition(
                    |t| u_probe.delta(t) * f(t),
                    &far_pts,
                    remaining * T::lit(0.5),
                    q.max_cells,
                )?;
                (r.value, r.error)
            } else {
                (T::zero(), T::zero())
            };
            (near.value + far_value, near.error + far_error)
        }
    };
    // When the far end falls inside the near region of a split evaluation
    // the analytic tail starts at rho.
    let tail_value = match split {
        Some(rho) if far.end < rho => tail.value * rho.powf(-two * s) / (two * s),
        _ => tail_value,
    };

    Ok(Estimate {
        value: cs * (core.value + body_value + tail_value),
        error: cs * (core.error + body_error + tail_error),
    })
}

/// Product-integration weights along a lattice line of spacing `h`.
///
/// `g = delta / t^2` is interpolated piecewise linearly between the samples
/// `t_m = m h` (constant `g_1` on `[0, h]`), which gives
///
/// ```text
/// int_0^{M h} delta t^(-1-2s) dt = h^(-2s) sum_m w_m delta(m h)
/// ```
///
/// with nonnegative `w_m`. Past `M h` the field is assumed constant.
#[derive(Debug, Clone)]
pub struct LatticeRule {
    s: f64,
    interior: Vec<f64>,
    terminal: Vec<f64>,
}

impl LatticeRule {
    /// Rule for lines with up to `m_max` samples.
    pub fn new(s: f64, m_max: usize) -> Self {
        let (gx, gw) = gauss_legendre(12);
        let e = 1.0 - 2.0 * s;
        // A_m = int_m^{m+1} (m+1-t) t^e dt, B_m = int_m^{m+1} (t-m) t^e dt
        let ab = |m: usize| -> (f64, f64) {
            let mf = m as f64;
            let mut a = 0.0;
            let mut b = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                let t = mf + 0.5 * (x + 1.0);
                let p = 0.5 * w * t.powf(e);
                a += (mf + 1.0 - t) * p;
                b += (t - mf) * p;
            }
            (a, b)
        };
        let m_max = m_max.max(1);
        let mut interior = Vec::with_capacity(m_max);
        let mut terminal = Vec::with_capacity(m_max);
        let mut prev_b = 0.0;
        for m in 1..=m_max {
            let (a, b) = ab(m);
            let first = if m == 1 { 1.0 / (2.0 - 2.0 * s) } else { 0.0 };
            let m2 = (m * m) as f64;
            interior.push((first + a + prev_b) / m2);
            terminal.push((first + prev_b) / m2);
            prev_b = b;
        }
        LatticeRule {
            s,
            interior,
            terminal,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn max_samples(&self) -> usize {
        self.interior.len()
    }

    /// Weight of sample `m` (1-based) on a line with `last` samples.
    #[inline]
    pub fn weight(&self, m: usize, last: usize) -> f64 {
        if m == last {
            self.terminal[m - 1]
        } else {
            self.interior[m - 1]
        }
    }

    /// `int_{M h}^inf t^(-1-2s) dt` divided by `h^(-2s)`.
    #[inline]
    pub fn tail(&self, last: usize) -> f64 {
        (last as f64).powf(-2.0 * self.s) / (2.0 * self.s)
    }
}

fn lattice_i_xi<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    xi: &[T],
    h: T,
    order: &FractionalOrder<T>,
) -> Result<Estimate<T>> {
    let end = match u.far_field() {
        FarField::Constant { center, radius, .. } => exit_parameter(x, xi, &center, radius),
        FarField::Bounded => {
            return Err(Error::InvalidParameter(
                "grid-backed field needs a constant far field".into(),
            ))
        }
    };
    let fine = lattice_sum(u, x, xi, h, end, order)?;
    let coarse = lattice_sum(u, x, xi, h * T::lit(2.0), end, order)?;
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

fn lattice_sum<T: Real>(
    u: &ScalarField<T>,
    x: &[T],
    xi: &[T],
    h: T,
    end: T,
    order: &FractionalOrder<T>,
) -> Result<T> {
    let s = order.s().as_f64();
    let u0 = u.eval(x);
    let last = ((end / h).ceil().to_usize().unwrap_or(1)).max(1);
    let rule = LatticeRule::new(s, last);
    let mut probe = LineProbe::new(u, x, xi, u0);
    let mut acc = 0.0;
    for m in 1..=last {
        let d = probe.delta(h * T::from_usize(m).unwrap()).as_f64();
        acc += rule.weight(m, last) * d;
    }
    let v_far = match u.far_field() {
        FarField::Constant { value, .. } => value.as_f64(),
        FarField::Bounded => 0.0,
    };
    acc += (2.0 * v_far - 2.0 * u0.as_f64()) * rule.tail(last);
    let hs = h.as_f64().powf(-2.0 * s);
    Ok(order.cs() * T::lit(acc * hs))
}
