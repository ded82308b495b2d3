//! Nonlocal extremal operators assembled from one-dimensional fractional
//! derivatives.
//!
//! For a bounded field `u` on `R^N`, the directional operator
//!
//! ```text
//! I_xi u(x) = C_s * int_0^inf (u(x + t xi) + u(x - t xi) - 2 u(x)) / t^(1+2s) dt
//! ```
//!
//! is the 1-D fractional derivative of order `2s` along `xi`. The extremal
//! operators `I_k^+` / `I_k^-` take the sup / inf of the sum of `k` such
//! derivatives over orthonormal `k`-frames.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] – second differences and the singular line integral.
//! * [`frames`] – orthonormal frames, charts and the frame extremizer.
//! * [`operators`] – pointwise `I_k^±`, batches and discontinuity probes.
//! * [`oracles`] – closed-form fields and constants used as ground truth.
//! * [`solver`] – exterior Dirichlet problems on convex domains.
//! * [`eigen`] – principal eigenvalue brackets and eigenfunctions.
//! * [`analysis`] – boundary exponents, Hölder seminorms, Hopf constants.
//!
//! The pointwise layer is generic over [`Real`]; grid-backed numerics
//! (solver, eigen, analysis) run in `f64`.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod eigen;
mod error;
pub mod field;
pub mod frames;
pub mod kernel;
pub mod operators;
pub mod oracles;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use field::{FarField, FieldFn, FieldKind, Kink, KinkKind, ScalarField};
pub use frames::{Chart, ExtremizeOptions, ExtremizeResult, ExtremizeStatus, Frame, Sign};
pub use kernel::{Estimate, FractionalOrder, QuadratureSpec, TailMode};
pub use solver::{DomainSpec, GridField, SolveReport, SolverConfig};

use std::fmt::{Debug, Display};

/// Floating point scalar used by the pointwise layer.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type ScalarField64 = ScalarField<f64>;
pub type ScalarField32 = ScalarField<f32>;
pub type Frame64 = Frame<f64>;
pub type Frame32 = Frame<f32>;
pub type FractionalOrder64 = FractionalOrder<f64>;
pub type QuadratureSpec64 = QuadratureSpec<f64>;
pub type Estimate64 = Estimate<f64>;
pub type ExtremizeResult64 = ExtremizeResult<f64>;
