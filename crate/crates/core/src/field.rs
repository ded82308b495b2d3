//! Bounded scalar fields on `R^N`, with the line metadata the kernel needs:
//! kink locations along a line, far-field behaviour and smoothness.

use std::fmt;
use std::sync::Arc;

use crate::Real;

/// Kind of non-smoothness of `t -> u(x + t xi)` at a declared kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KinkKind {
    /// Jump discontinuity.
    Jump,
    /// Continuous with a jump in the derivative.
    Corner,
    /// Continuous with an unbounded derivative, e.g. `(r - t)^s`.
    Singular,
}

/// Signed line parameter `t` where `t -> u(x + t xi)` is not smooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink<T> {
    pub tau: T,
    pub kind: KinkKind,
}

impl<T> Kink<T> {
    pub fn new(tau: T, kind: KinkKind) -> Self {
        Kink { tau, kind }
    }
}

/// Behaviour of a field far from the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum FarField<T> {
    /// `u = value` outside the closed ball `B(center, radius)`.
    Constant { value: T, center: Vec<T>, radius: T },
    /// Only the global bound is known.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    ClosedForm,
    GridBacked,
}

/// A bounded function on `R^N`.
///
/// Implementors must guarantee `|eval(x)| <= bound()` everywhere.
pub trait FieldFn<T: Real>: Send + Sync {
    fn eval(&self, x: &[T]) -> T;

    fn bound(&self) -> T;

    /// Kinks of `t -> u(x + t xi)` for `t` of either sign.
    fn kinks(&self, _x: &[T], _xi: &[T]) -> Vec<Kink<T>> {
        Vec::new()
    }

    fn far_field(&self) -> FarField<T> {
        FarField::Bounded
    }

    /// Whether `u` is `C^2` in a neighbourhood of `x`.
    fn smooth_at(&self, _x: &[T]) -> bool {
        true
    }

    /// Lattice spacing for grid-backed fields.
    fn lattice_step(&self) -> Option<T> {
        None
    }

    fn name(&self) -> String {
        "field".into()
    }
}

/// Shared handle to a [`FieldFn`].
#[derive(Clone)]
pub struct ScalarField<T: Real> {
    inner: Arc<dyn FieldFn<T>>,
}

impl<T: Real> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.inner.name())
            .field("bound", &self.inner.bound())
            .finish()
    }
}

impl<T: Real> ScalarField<T> {
    pub fn new<F: FieldFn<T> + 'static>(f: F) -> Self {
        ScalarField { inner: Arc::new(f) }
    }

    pub fn from_arc(inner: Arc<dyn FieldFn<T>>) -> Self {
        ScalarField { inner }
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        self.inner.eval(x)
    }

    pub fn bound(&self) -> T {
        self.inner.bound()
    }

    pub fn kinks(&self, x: &[T], xi: &[T]) -> Vec<Kink<T>> {
        self.inner.kinks(x, xi)
    }

    pub fn far_field(&self) -> FarField<T> {
        self.inner.far_field()
    }

    pub fn smooth_at(&self, x: &[T]) -> bool {
        self.inner.smooth_at(x)
    }

    pub fn lattice_step(&self) -> Option<T> {
        self.inner.lattice_step()
    }

    pub fn name(&self) -> String {
        self.inner.name()
    }

    pub fn kind(&self) -> FieldKind {
        if self.lattice_step().is_some() {
            FieldKind::GridBacked
        } else {
            FieldKind::ClosedForm
        }
    }

    /// True when the field vanishes identically outside a bounded set.
    pub fn is_dirichlet(&self) -> bool {
        matches!(self.far_field(), FarField::Constant { value, .. } if value == T::zero())
    }

    /// `u ≡ c`.
    pub fn constant(c: T) -> Self {
        FnField::new("constant", c.abs(), move |_: &[T]| c)
            .smooth_everywhere()
            .build()
    }

    /// `u(x) = <a, x> + b`, only bounded on the box `[-extent, extent]^N`; the
    /// reported bound covers that box.
    pub fn affine(a: Vec<T>, b: T, extent: T) -> Self {
        let bound = a.iter().map(|v| v.abs()).sum::<T>() * extent + b.abs();
        FnField::new("affine", bound, move |x: &[T]| {
            a.iter().zip(x).map(|(a, x)| *a * *x).sum::<T>() + b
        })
        .smooth_everywhere()
        .build()
    }

    /// `-u`.
    pub fn negated(&self) -> Self {
        self.scaled_values(-T::one())
    }

    /// `c * u`.
    pub fn scaled_values(&self, c: T) -> Self {
        ScalarField::new(ValueScaled {
            inner: self.clone(),
            c,
        })
    }

    /// `x -> u(lambda x)` with `lambda > 0`.
    pub fn dilated(&self, lambda: T) -> Self {
        ScalarField::new(Dilated {
            inner: self.clone(),
            lambda,
        })
    }
}

type EvalFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type KinkFn<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<Kink<T>> + Send + Sync>;
type SmoothFn<T> = Arc<dyn Fn(&[T]) -> bool + Send + Sync>;

/// Closure-backed field builder.
pub struct FnField<T: Real> {
    name: String,
    bound: T,
    f: EvalFn<T>,
    kinks: Option<KinkFn<T>>,
    smooth: Option<SmoothFn<T>>,
    far: FarField<T>,
}

impl<T: Real> FnField<T> {
    pub fn new(name: &str, bound: T, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        FnField {
            name: name.into(),
            bound,
            f: Arc::new(f),
            kinks: None,
            smooth: None,
            far: FarField::Bounded,
        }
    }

    pub fn with_kinks(
        mut self,
        k: impl Fn(&[T], &[T]) -> Vec<Kink<T>> + Send + Sync + 'static,
    ) -> Self {
        self.kinks = Some(Arc::new(k));
        self
    }

    pub fn with_smooth(mut self, p: impl Fn(&[T]) -> bool + Send + Sync + 'static) -> Self {
        self.smooth = Some(Arc::new(p));
        self
    }

    pub fn smooth_everywhere(self) -> Self {
        self.with_smooth(|_| true)
    }

    pub fn with_far_field(mut self, far: FarField<T>) -> Self {
        self.far = far;
        self
    }

    pub fn build(self) -> ScalarField<T> {
        ScalarField::new(self)
    }
}

impl<T: Real> FieldFn<T> for FnField<T> {
    fn eval(&self, x: &[T]) -> T {
        (self.f)(x)
    }
    fn bound(&self) -> T {
        self.bound
    }
    fn kinks(&self, x: &[T], xi: &[T]) -> Vec<Kink<T>> {
        self.kinks.as_ref().map(|k| k(x, xi)).unwrap_or_default()
    }
    fn far_field(&self) -> FarField<T> {
        self.far.clone()
    }
    fn smooth_at(&self, x: &[T]) -> bool {
        self.smooth.as_ref().map(|p| p(x)).unwrap_or(true)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

struct ValueScaled<T: Real> {
    inner: ScalarField<T>,
    c: T,
}

impl<T: Real> FieldFn<T> for ValueScaled<T> {
    fn eval(&self, x: &[T]) -> T {
        self.c * self.inner.eval(x)
    }
    fn bound(&self) -> T {
        self.c.abs() * self.inner.bound()
    }
    fn kinks(&self, x: &[T], xi: &[T]) -> Vec<Kink<T>> {
        self.inner.kinks(x, xi)
    }
    fn far_field(&self) -> FarField<T> {
        match self.inner.far_field() {
            FarField::Constant {
                value,
                center,
                radius,
            } => FarField::Constant {
                value: self.c * value,
                center,
                radius,
            },
            FarField::Bounded => FarField::Bounded,
        }
    }
    fn smooth_at(&self, x: &[T]) -> bool {
        self.inner.smooth_at(x)
    }
    fn lattice_step(&self) -> Option<T> {
        self.inner.lattice_step()
    }
    fn name(&self) -> String {
        format!("{}*{}", self.c, self.inner.name())
    }
}

struct Dilated<T: Real> {
    inner: ScalarField<T>,
    lambda: T,
}

impl<T: Real> Dilated<T> {
    fn map(&self, x: &[T]) -> Vec<T> {
        x.iter().map(|v| *v * self.lambda).collect()
    }
}

impl<T: Real> FieldFn<T> for Dilated<T> {
    fn eval(&self, x: &[T]) -> T {
        self.inner.eval(&self.map(x))
    }
    fn bound(&self) -> T {
        self.inner.bound()
    }
    fn kinks(&self, x: &[T], xi: &[T]) -> Vec<Kink<T>> {
        // u(l(x + t xi)) = u(lx + (l t) xi)
        self.inner
            .kinks(&self.map(x), xi)
            .into_iter()
            .map(|k| Kink::new(k.tau / self.lambda, k.kind))
            .collect()
    }
    fn far_field(&self) -> FarField<T> {
        match self.inner.far_field() {
            FarField::Constant {
                value,
                center,
                radius,
            } => FarField::Constant {
                value,
                center: center.iter().map(|c| *c / self.lambda).collect(),
                radius: radius / self.lambda,
            },
            FarField::Bounded => FarField::Bounded,
        }
    }
    fn smooth_at(&self, x: &[T]) -> bool {
        self.inner.smooth_at(&self.map(x))
    }
    fn lattice_step(&self) -> Option<T> {
        self.inner.lattice_step().map(|h| h / self.lambda)
    }
    fn name(&self) -> String {
        format!("{}(x*{})", self.inner.name(), self.lambda)
    }
}

/// Line parameters `t` where `|x + t xi - c| = r`, sorted. `xi` is a unit vector.
pub fn sphere_crossings<T: Real>(x: &[T], xi: &[T], c: &[T], r: T) -> Option<(T, T)> {
    let mut b = T::zero();
    let mut q = T::zero();
    for i in 0..x.len() {
        let d = x[i] - c[i];
        b += d * xi[i];
        q += d * d;
    }
    let disc = b * b - (q - r * r);
    if disc < T::zero() {
        return None;
    }
    let root = disc.sqrt();
    Some((-b - root, -b + root))
}

/// Line parameter where `<x + t xi, n> = level`, if the line is not parallel.
pub fn plane_crossing<T: Real>(x: &[T], xi: &[T], n: &[T], level: T) -> Option<T> {
    let mut a = T::zero();
    let mut b = T::zero();
    for i in 0..x.len() {
        a += x[i] * n[i];
        b += xi[i] * n[i];
    }
    if b == T::zero() {
        None
    } else {
        Some((level - a) / b)
    }
}

/// Parameter beyond which `x ± t xi` both lie outside `B(c, r)`.
pub fn exit_parameter<T: Real>(x: &[T], xi: &[T], c: &[T], r: T) -> T {
    let mut b = T::zero();
    let mut q = T::zero();
    for i in 0..x.len() {
        let d = x[i] - c[i];
        b += d * xi[i];
        q += d * d;
    }
    let disc = b * b - q + r * r;
    if disc <= T::zero() {
        T::zero()
    } else {
        b.abs() + disc.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_crossing_from_center() {
        let (a, b) = sphere_crossings(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], 2.0).unwrap();
        assert_eq!((a, b), (-2.0, 2.0));
        assert!(sphere_crossings(&[0.0, 3.0], &[1.0, 0.0], &[0.0, 0.0], 2.0).is_none());
    }

    #[test]
    fn exit_parameter_covers_both_sides() {
        let x = [0.5f64, 0.0];
        let t = exit_parameter(&x, &[1.0, 0.0], &[0.0, 0.0], 1.0);
        assert!((t - 1.5).abs() < 1e-15);
        assert_eq!(exit_parameter(&[5.0f64, 0.0], &[0.0, 1.0], &[0.0, 0.0], 1.0), 0.0);
    }

    #[test]
    fn dilation_moves_kinks_and_far_field() {
        let f = FnField::new("ind", 1.0, |x: &[f64]| if x[0] > 1.0 { 1.0 } else { 0.0 })
            .with_kinks(|x, xi| {
                plane_crossing(x, xi, &[1.0], 1.0)
                    .map(|t| vec![Kink::new(t, KinkKind::Jump)])
                    .unwrap_or_default()
            })
            .with_far_field(FarField::Constant {
                value: 0.0,
                center: vec![2.0],
                radius: 4.0,
            })
            .build();
        let g = f.dilated(2.0);
        assert_eq!(g.eval(&[0.6]), 1.0);
        assert_eq!(g.kinks(&[0.0], &[1.0])[0].tau, 0.5);
        match g.far_field() {
            FarField::Constant { center, radius, .. } => {
                assert_eq!(center, vec![1.0]);
                assert_eq!(radius, 2.0);
            }
            _ => panic!(),
        }
        assert!(g.negated().is_dirichlet());
        assert_eq!(g.negated().eval(&[0.6]), -1.0);
    }

    #[test]
    fn constant_and_affine() {
        let c = ScalarField::constant(3.0f32);
        assert_eq!(c.eval(&[1.0, 2.0]), 3.0);
        assert_eq!(c.kind(), FieldKind::ClosedForm);
        let a = ScalarField::affine(vec![1.0, -2.0], 0.5, 10.0f64);
        assert_eq!(a.eval(&[1.0, 1.0]), -0.5);
        assert_eq!(a.bound(), 30.5);
    }
}
