//! Exterior Dirichlet problems `I_k^± u + c u = f` in a convex domain with
//! `u = 0` outside.

mod discrete;
pub(crate) mod domain;
mod gmres;
mod grid;

pub use discrete::{DirectionSet, Discretization, HowardOutcome};
pub use domain::{DomainKind, DomainSpec};
pub use gmres::{gmres, GmresOutcome};
pub use grid::{GridField, GridMeta, Lattice, FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::frames::Sign;
use crate::oracles::barrier_constant;
use crate::{Error, Result, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Policy iteration with GMRES policy evaluation.
    #[default]
    Howard,
    /// Explicit damped fixed point `u + w dt (I u + c u - f)`.
    PseudoTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Grid spacing.
    pub h: f64,
    pub direction_count: usize,
    pub direction_set: DirectionSet,
    /// Random rotation of the uniform direction set.
    pub rotation_seed: Option<u64>,
    pub scheme: Scheme,
    /// Pseudo-time step; the largest monotone step when absent.
    pub dt: Option<f64>,
    /// Relaxation factor in (0, 1] for the pseudo-time scheme.
    pub damping: f64,
    pub tol_residual: f64,
    pub max_sweeps: usize,
    pub max_policy_iterations: usize,
    pub gmres_restart: usize,
    pub max_inner_iterations: usize,
    /// Uniform Cauchy tolerance of the outer iteration, relative to the
    /// iterate's sup norm.
    pub outer_tol: f64,
    pub max_outer: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 1.0 / 32.0,
            direction_count: 8,
            direction_set: DirectionSet::Lattice,
            rotation_seed: None,
            scheme: Scheme::Howard,
            dt: None,
            damping: 1.0,
            tol_residual: 1e-8,
            max_sweeps: 200_000,
            max_policy_iterations: 60,
            gmres_restart: 60,
            max_inner_iterations: 50_000,
            outer_tol: 1e-7,
            max_outer: 5_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.h > 0.0) {
            return bad("h must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must be in (0, 1]");
        }
        if !(self.tol_residual > 0.0) || !(self.outer_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if matches!(self.dt, Some(d) if !(d > 0.0)) {
            return bad("dt must be positive");
        }
        Ok(())
    }

    pub fn discretize(&self, dom: &DomainSpec, k: usize, sign: Sign, s: f64) -> Result<Discretization> {
        self.validate()?;
        Discretization::new(
            dom,
            self.h,
            k,
            sign,
            s,
            self.direction_count,
            self.direction_set,
            self.rotation_seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub scheme: Scheme,
    /// Policies for Howard, sweeps for pseudo-time.
    pub iterations: usize,
    /// GMRES iterations summed over policies.
    pub inner_iterations: usize,
    /// `||I u + c u - f||_inf` over interior nodes.
    pub residual: f64,
    pub monotonicity_violations: usize,
    /// `max(|u| - v)` for the barrier envelope `v`; absent when `c` has a
    /// positive part.
    pub envelope_excess: Option<f64>,
    pub nodes: usize,
    pub h: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Barrier envelope `||f|| / (k C_s beta) (R^2 - |x - a|^2)^s` at the nodes,
/// with `B_R(a)` containing the domain.
pub fn barrier_envelope(disc: &Discretization, f_sup: f64) -> Result<Vec<f64>> {
    let dom = disc.template().domain();
    let r = dom.outer_radius();
    let a = dom.anchor().to_vec();
    let s = disc.s();
    let m = f_sup / (disc.k() as f64 * barrier_constant(s)?);
    Ok(disc.sample(|x| {
        let d2: f64 = x.iter().zip(&a).map(|(p, q)| (p - q) * (p - q)).sum();
        m * (r * r - d2).max(0.0).powf(s)
    }))
}

/// Solves on a prepared discretization; `f` and `c` are node values.
pub fn solve_discrete(
    disc: &Discretization,
    f: &[f64],
    c: &[f64],
    warm: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = disc.len();
    if f.len() != n || c.len() != n || warm.is_some_and(|w| w.len() != n) {
        return Err(Error::BadDims(format!("expected {n} node values")));
    }
    let dom = disc.template().domain();
    let s = disc.s();
    let limit = disc.cs() * disc.k() as f64 / s * dom.diam().powf(-2.0 * s);
    let c_plus = c.iter().fold(0.0f64, |a, v| a.max(*v));
    if c_plus >= limit {
        return Err(Error::CZeroOrderTooLarge { c_plus, limit });
    }
    let u0 = warm.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let (u, iterations, inner, residual, violations) = match cfg.scheme {
        Scheme::Howard => {
            let out = disc.howard(
                f,
                c,
                &u0,
                cfg.tol_residual,
                cfg.max_policy_iterations,
                cfg.gmres_restart,
                cfg.max_inner_iterations,
            )?;
            let violations = if disc.min_dominance() - c_plus > 0.0 { 0 } else { 1 };
            (out.u, out.policies, out.inner_iterations, out.residual, violations)
        }
        Scheme::PseudoTime => {
            let dt_max = 1.0 / disc.max_diagonal(c);
            let dt = cfg.dt.unwrap_or(dt_max);
            if dt > dt_max * (1.0 + 1e-12) {
                return Err(Error::MonotonicityViolated(dt / dt_max));
            }
            let mut u = u0;
            let mut sweeps = 0;
            let mut violations = 0;
            let residual = loop {
                let r = sup(&disc.residual(&u, f, c));
                if r <= cfg.tol_residual {
                    break r;
                }
                if sweeps >= cfg.max_sweeps {
                    return Err(Error::NotConverged {
                        iterations: sweeps,
                        residual: r,
                    });
                }
                for _ in 0..16 {
                    let (next, bad) = disc.sweep(&u, f, c, dt, cfg.damping);
                    violations += bad;
                    u = next;
                    sweeps += 1;
                }
            };
            (u, sweeps, 0, residual, violations)
        }
    };
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotConverged {
            iterations,
            residual: f64::NAN,
        });
    }
    let envelope_excess = if c_plus <= 0.0 {
        let v = barrier_envelope(disc, sup(f))?;
        Some(u.iter().zip(&v).map(|(a, b)| a.abs() - b).fold(f64::NEG_INFINITY, f64::max))
    } else {
        None
    };
    Ok((
        u,
        SolveReport {
            scheme: cfg.scheme,
            iterations,
            inner_iterations: inner,
            residual,
            monotonicity_violations: violations,
            envelope_excess,
            nodes: n,
            h: disc.template().h(),
        },
    ))
}

fn meta(s: f64, k: usize, sign: Sign, cfg: &SolverConfig) -> GridMeta {
    GridMeta {
        s,
        k,
        sign: sign.as_str().into(),
        config: serde_json::to_string(cfg).expect("serializable"),
    }
}

/// Solves `I_k^± u + c u = f` in `dom`, `u = 0` outside.
pub fn solve_dirichlet(
    f: &ScalarField<f64>,
    c: &ScalarField<f64>,
    dom: &DomainSpec,
    k: usize,
    sign: Sign,
    s: f64,
    cfg: &SolverConfig,
) -> Result<(GridField, SolveReport)> {
    let disc = cfg.discretize(dom, k, sign, s)?;
    let fv = disc.sample(|x| f.eval(x));
    let cv = disc.sample(|x| c.eval(x));
    let (u, report) = solve_discrete(&disc, &fv, &cv, None, cfg)?;
    let mut g = disc.to_grid(&u)?;
    g.set_meta(meta(s, k, sign, cfg));
    Ok((g, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterStep {
    pub iteration: usize,
    pub sup_norm: f64,
    /// `||w_n - w_(n-1)||_inf`
    pub increment: f64,
    pub residual: f64,
}

/// Blow-up level for the outer iteration.
pub fn divergence_threshold(f_sup: f64, dom: &DomainSpec, s: f64) -> Result<f64> {
    Ok(1e3 * f_sup.max(1e-300) * dom.diam().powf(2.0 * s) / barrier_constant(s)?)
}

/// Outer iteration `w_1 = 0`, `I w_(n+1) = f - mu w_n` on a prepared
/// discretization. `observe` sees each step and may stop the run early by
/// returning `false`.
pub fn outer_discrete(
    disc: &Discretization,
    f: &[f64],
    mu: f64,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&OuterStep, &[f64]) -> bool,
) -> Result<(Vec<f64>, Vec<OuterStep>)> {
    let n = disc.len();
    let zero = vec![0.0; n];
    let dom = disc.template().domain();
    let threshold = divergence_threshold(sup(f), dom, disc.s())?;
    let mut w = zero.clone();
    let mut trace = Vec::new();
    for it in 1..=cfg.max_outer.max(1) {
        let rhs: Vec<f64> = f.iter().zip(&w).map(|(a, b)| a - mu * b).collect();
        let (next, rep) = solve_discrete(disc, &rhs, &zero, Some(&w), cfg)?;
        let inc = next.iter().zip(&w).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
        let norm = sup(&next);
        let step = OuterStep {
            iteration: it,
            sup_norm: norm,
            increment: inc,
            residual: rep.residual,
        };
        trace.push(step.clone());
        w = next;
        if norm > threshold {
            return Err(Error::Diverged {
                iteration: it,
                norm,
            });
        }
        if mu == 0.0 || inc <= cfg.outer_tol * norm.max(1e-300) || !observe(&step, &w) {
            return Ok((w, trace));
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_outer,
        residual: trace.last().map(|t| t.increment).unwrap_or(f64::NAN),
    })
}

/// `w_(n+1)` solves `I_k^± w_(n+1) = f - mu w_n`, starting from `w_1 = 0`.
#[allow(clippy::too_many_arguments)]
pub fn outer_zero_order(
    f: &ScalarField<f64>,
    mu: f64,
    dom: &DomainSpec,
    k: usize,
    sign: Sign,
    s: f64,
    cfg: &SolverConfig,
) -> Result<(GridField, Vec<OuterStep>)> {
    let disc = cfg.discretize(dom, k, sign, s)?;
    let fv = disc.sample(|x| f.eval(x));
    let (w, trace) = outer_discrete(&disc, &fv, mu, cfg, |_, _| true)?;
    let mut g = disc.to_grid(&w)?;
    g.set_meta(meta(s, k, sign, cfg));
    Ok((g, trace))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `max(u_sub - u_super)` over the nodes (0 outside by construction).
    pub max_violation: f64,
    pub ordered: bool,
    /// Smallest `I u_sub + c u_sub - f`; must be `>= -tol`.
    pub sub_residual_min: f64,
    /// Largest `I u_super + c u_super - f`; must be `<= tol`.
    pub super_residual_max: f64,
    pub tol: f64,
}

/// Certifies the sub/supersolution inequalities on the grid, then checks
/// `u_sub <= u_super + tol`.
#[allow(clippy::too_many_arguments)]
pub fn comparison_probe(
    u_sub: &GridField,
    u_super: &GridField,
    f: &ScalarField<f64>,
    c: &ScalarField<f64>,
    dom: &DomainSpec,
    k: usize,
    sign: Sign,
    s: f64,
    cfg: &SolverConfig,
    tol: f64,
) -> Result<ComparisonReport> {
    if u_sub.lattice() != u_super.lattice() || u_sub.domain() != dom || u_super.domain() != dom {
        return Err(Error::BadDims("fields must share the domain and lattice".into()));
    }
    let cfg = SolverConfig {
        h: u_sub.h(),
        ..cfg.clone()
    };
    let disc = cfg.discretize(dom, k, sign, s)?;
    if disc.template().lattice() != u_sub.lattice() {
        return Err(Error::BadDims("lattice does not match the domain cover".into()));
    }
    let fv = disc.sample(|x| f.eval(x));
    let cv = disc.sample(|x| c.eval(x));
    let a = u_sub.interior_values();
    let b = u_super.interior_values();
    let ra = disc.residual(&a, &fv, &cv);
    let rb = disc.residual(&b, &fv, &cv);
    let sub_min = ra.iter().copied().fold(f64::INFINITY, f64::min);
    let super_max = rb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if sub_min < -tol {
        return Err(Error::NotCertified(format!(
            "subsolution residual {sub_min:e} < -{tol:e}"
        )));
    }
    if super_max > tol {
        return Err(Error::NotCertified(format!(
            "supersolution residual {super_max:e} > {tol:e}"
        )));
    }
    let max_violation = a
        .iter()
        .zip(&b)
        .map(|(p, q)| p - q)
        .fold(0.0f64, f64::max);
    Ok(ComparisonReport {
        max_violation,
        ordered: max_violation <= tol,
        sub_residual_min: sub_min,
        super_residual_max: super_max,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::make_barrier;

    fn disk() -> DomainSpec {
        DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    fn cfg(h: f64) -> SolverConfig {
        SolverConfig {
            h,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let z = ScalarField::constant(0.0);
        let (u, rep) = solve_dirichlet(&z, &z, &disk(), 1, Sign::Sup, 0.75, &cfg(0.125)).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
        assert_eq!(rep.monotonicity_violations, 0);
    }

    #[test]
    fn one_dimensional_barrier_is_recovered() {
        let s = 0.75;
        let cb = barrier_constant(s).unwrap();
        let dom = DomainSpec::ball(vec![0.0], 1.0).unwrap();
        let f = ScalarField::constant(-cb);
        let z = ScalarField::constant(0.0);
        let exact = make_barrier(1.0, vec![0.0], 1.0, s);
        let mut errs = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0] {
            let (u, rep) = solve_dirichlet(&f, &z, &dom, 1, Sign::Sup, s, &cfg(h)).unwrap();
            assert!(rep.residual <= 1e-8);
            let e = u
                .interior()
                .iter()
                .map(|&i| (u.values()[i] - exact.eval(&u.node_coords(i))).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[1] < errs[0], "{errs:?}");
        assert!(errs[1] < 0.05, "{errs:?}");
    }

    #[test]
    fn pseudo_time_matches_howard() {
        let f = ScalarField::constant(-1.0);
        let z = ScalarField::constant(0.0);
        let dom = DomainSpec::ball(vec![0.0], 1.0).unwrap();
        let a = solve_dirichlet(&f, &z, &dom, 1, Sign::Sup, 0.6, &cfg(1.0 / 16.0)).unwrap().0;
        let pt = SolverConfig {
            scheme: Scheme::PseudoTime,
            ..cfg(1.0 / 16.0)
        };
        let (b, rep) = solve_dirichlet(&f, &z, &dom, 1, Sign::Sup, 0.6, &pt).unwrap();
        assert_eq!(rep.monotonicity_violations, 0);
        let d = a
            .values()
            .iter()
            .zip(b.values())
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(d < 1e-7, "{d}");
    }

    #[test]
    fn oversized_dt_and_zero_order_are_rejected() {
        let f = ScalarField::constant(-1.0);
        let z = ScalarField::constant(0.0);
        let dom = DomainSpec::ball(vec![0.0], 1.0).unwrap();
        let pt = SolverConfig {
            scheme: Scheme::PseudoTime,
            dt: Some(1.0),
            ..cfg(1.0 / 16.0)
        };
        assert!(matches!(
            solve_dirichlet(&f, &z, &dom, 1, Sign::Sup, 0.6, &pt),
            Err(Error::MonotonicityViolated(_))
        ));
        let big = ScalarField::constant(10.0);
        assert!(matches!(
            solve_dirichlet(&f, &big, &dom, 1, Sign::Sup, 0.6, &cfg(1.0 / 16.0)),
            Err(Error::CZeroOrderTooLarge { .. })
        ));
    }

    #[test]
    fn outer_with_zero_mu_is_a_single_solve() {
        let f = ScalarField::constant(-1.0);
        let dom = DomainSpec::ball(vec![0.0], 1.0).unwrap();
        let (_, trace) = outer_zero_order(&f, 0.0, &dom, 1, Sign::Sup, 0.75, &cfg(1.0 / 16.0)).unwrap();
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn identical_fields_compare_with_zero_violation() {
        let f = ScalarField::constant(-1.0);
        let z = ScalarField::constant(0.0);
        let dom = disk();
        let c = cfg(0.125);
        let (u, _) = solve_dirichlet(&f, &z, &dom, 1, Sign::Sup, 0.75, &c).unwrap();
        let r = comparison_probe(&u, &u, &f, &z, &dom, 1, Sign::Sup, 0.75, &c, 1e-6).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert!(r.ordered);
    }
}
