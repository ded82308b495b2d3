//! Principal eigenvalue brackets by bisection on the behaviour of the outer
//! iteration, and principal eigenfunctions by normalized inverse iteration.

use serde::Serialize;

use crate::frames::Sign;
use crate::oracles::barrier_constant;
use crate::solver::{
    outer_discrete, solve_discrete, DomainSpec, GridField, GridMeta, SolverConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenBounds {
    /// `C_s beta(1-s, s) / R_2^(2s)`.
    pub lower: f64,
    /// Radius of a ball containing the domain.
    pub outer_radius: f64,
    /// Radius of a ball inside the domain.
    pub inner_radius: f64,
    pub upper_note: String,
}

/// Constructive lower bound for `mu_1^+` from the barrier on an enclosing
/// ball.
pub fn eigen_bounds(dom: &DomainSpec, s: f64) -> Result<EigenBounds> {
    let r2 = dom.outer_radius();
    Ok(EigenBounds {
        lower: barrier_constant(s)? / r2.powf(2.0 * s),
        outer_radius: r2,
        inner_radius: dom.inner_radius(),
        upper_note: format!(
            "finite upper bound of the form c / R_1^(2s) with R_1 = {}; the constant is not explicit",
            dom.inner_radius()
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(default)]
pub struct EigenConfig {
    pub solver: SolverConfig,
    /// Relative bracket width at which bisection stops.
    pub tol_mu: f64,
    /// Initial upper end as a multiple of the lower bound.
    pub cap_factor: f64,
    pub max_doublings: usize,
    pub max_bisections: usize,
    /// Outer steps allowed per probe.
    pub max_probe_steps: usize,
    pub max_power_iterations: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            solver: SolverConfig::default(),
            tol_mu: 1e-2,
            cap_factor: 4.0,
            max_doublings: 4,
            max_bisections: 40,
            max_probe_steps: 400,
            max_power_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    ConvergedPositive,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionStep {
    pub mu: f64,
    pub outcome: ProbeOutcome,
    pub outer_steps: usize,
    /// Last increment ratio `|w_(n+1) - w_n| / |w_n - w_(n-1)|`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenEstimate {
    pub mu_lo: f64,
    pub mu_hi: f64,
    /// True when the eigenvalue is `+inf` and nothing was iterated.
    pub infinite: bool,
    pub lower_bound: f64,
    pub s: f64,
    pub k: usize,
    pub sign: String,
    pub domain_hash: String,
    pub trace: Vec<BisectionStep>,
}

impl EigenEstimate {
    pub fn width(&self) -> f64 {
        self.mu_hi - self.mu_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mu_lo + self.mu_hi)
    }
}

/// Runs the outer iteration with `f = -1` at `mu` and decides whether it
/// settles or blows up. Three consecutive increment ratios on the same side
/// of 1 decide early.
fn probe(
    disc: &crate::solver::Discretization,
    mu: f64,
    cfg: &EigenConfig,
) -> Result<BisectionStep> {
    let f = vec![-1.0; disc.len()];
    let solver = SolverConfig {
        max_outer: cfg.max_probe_steps,
        ..cfg.solver.clone()
    };
    let mut incs: Vec<f64> = Vec::new();
    let mut verdict = None;
    let out = outer_discrete(disc, &f, mu, &solver, |step, w| {
        incs.push(step.increment);
        if w.iter().any(|v| *v < 0.0) {
            verdict = Some(ProbeOutcome::Diverged);
            return false;
        }
        let n = incs.len();
        if n >= 6 {
            let q: Vec<f64> = (n - 3..n).map(|i| incs[i] / incs[i - 1]).collect();
            let hi = q.iter().copied().fold(f64::MIN, f64::max);
            let lo = q.iter().copied().fold(f64::MAX, f64::min);
            if lo > 1.0 {
                verdict = Some(ProbeOutcome::Diverged);
                return false;
            }
            if hi < 1.0 && hi - lo < 0.1 * (1.0 - hi) {
                verdict = Some(ProbeOutcome::ConvergedPositive);
                return false;
            }
        }
        true
    });
    let ratio = match incs.len() {
        0 | 1 => 0.0,
        n => incs[n - 1] / incs[n - 2],
    };
    let outcome = match out {
        Ok(_) => verdict.unwrap_or(ProbeOutcome::ConvergedPositive),
        Err(Error::Diverged { .. }) => ProbeOutcome::Diverged,
        Err(Error::NotConverged { .. }) if !incs.is_empty() => {
            if ratio >= 1.0 {
                ProbeOutcome::Diverged
            } else {
                ProbeOutcome::ConvergedPositive
            }
        }
        Err(e) => return Err(e),
    };
    Ok(BisectionStep {
        mu,
        outcome,
        outer_steps: incs.len(),
        ratio,
    })
}

/// Brackets `mu_k^±` on the grid by bisection.
pub fn estimate_mu(
    dom: &DomainSpec,
    k: usize,
    sign: Sign,
    s: f64,
    cfg: &EigenConfig,
) -> Result<EigenEstimate> {
    let n = dom.dim();
    let bounds = eigen_bounds(dom, s)?;
    let mut est = EigenEstimate {
        mu_lo: 0.0,
        mu_hi: f64::INFINITY,
        infinite: false,
        lower_bound: bounds.lower,
        s,
        k,
        sign: sign.as_str().into(),
        domain_hash: dom.hash(),
        trace: Vec::new(),
    };
    if k == 0 || k > n {
        return Err(Error::BadDims(format!("k = {k} with N = {n}")));
    }
    if sign == Sign::Inf && k < n {
        est.mu_lo = f64::INFINITY;
        est.infinite = true;
        return Ok(est);
    }
    if !(cfg.tol_mu > 0.0) {
        return Err(Error::InvalidParameter("tol_mu must be positive".into()));
    }
    let disc = cfg.solver.discretize(dom, k, sign, s)?;
    let mut hi = cfg.cap_factor * bounds.lower;
    let mut found = false;
    for _ in 0..=cfg.max_doublings {
        let step = probe(&disc, hi, cfg)?;
        let diverged = step.outcome == ProbeOutcome::Diverged;
        est.trace.push(step);
        if diverged {
            found = true;
            break;
        }
        est.mu_lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Err(Error::BracketNotFound { cap: est.mu_lo });
    }
    est.mu_hi = hi;
    for _ in 0..cfg.max_bisections {
        if est.mu_hi - est.mu_lo <= cfg.tol_mu * est.mu_hi {
            break;
        }
        let mid = 0.5 * (est.mu_lo + est.mu_hi);
        let step = probe(&disc, mid, cfg)?;
        match step.outcome {
            ProbeOutcome::ConvergedPositive => est.mu_lo = mid,
            ProbeOutcome::Diverged => est.mu_hi = mid,
        }
        est.trace.push(step);
    }
    Ok(est)
}

#[derive(Debug, Clone)]
pub struct Eigenfunction {
    /// Normalized so that the largest value is 1.
    pub field: GridField,
    /// Eigenvalue from the normalization constants of the iteration.
    pub mu: f64,
    /// `||I psi + mu psi||_inf` over interior nodes.
    pub residual: f64,
    pub iterations: usize,
    /// Smallest value over nodes at distance at least `4h` from the boundary.
    pub min_interior: f64,
}

/// Principal eigenfunction of `I_1^+` by the normalized iteration
/// `I w_(n+1) = -z_n`, `z_(n+1) = w_(n+1) / ||w_(n+1)||`, starting from
/// `z_1 = 1`. `mu_hat` seeds the stopping test only.
pub fn principal_eigenfunction(
    dom: &DomainSpec,
    s: f64,
    mu_hat: f64,
    cfg: &EigenConfig,
) -> Result<Eigenfunction> {
    if !(mu_hat > 0.0) {
        return Err(Error::InvalidParameter("mu_hat must be positive".into()));
    }
    let inner = SolverConfig {
        tol_residual: 0.1 * cfg.solver.tol_residual,
        ..cfg.solver.clone()
    };
    let disc = inner.discretize(dom, 1, Sign::Sup, s)?;
    let n = disc.len();
    let zero = vec![0.0; n];
    let mut z = vec![1.0; n];
    let mut w = zero.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_power_iterations {
        let rhs: Vec<f64> = z.iter().map(|v| -v).collect();
        w = solve_discrete(&disc, &rhs, &zero, Some(&w), &inner)?.0;
        let norm = w.iter().fold(0.0f64, |a, v| a.max(*v));
        if !(norm > 0.0) {
            return Err(Error::NotConverged {
                iterations: it,
                residual: f64::NAN,
            });
        }
        let mu = 1.0 / norm;
        z = w.iter().map(|v| v / norm).collect();
        let iz = disc.apply(&z);
        residual = iz.iter().zip(&z).fold(0.0f64, |a, (p, q)| a.max((p + mu * q).abs()));
        if residual <= cfg.solver.tol_residual {
            let mut field = disc.to_grid(&z)?;
            field.set_meta(GridMeta {
                s,
                k: 1,
                sign: "sup".into(),
                config: serde_json::to_string(&cfg.solver).expect("serializable"),
            });
            let h = field.h();
            let min_interior = field
                .interior()
                .iter()
                .filter(|&&i| dom.distance(&field.node_coords(i)) >= 4.0 * h)
                .map(|&i| field.values()[i])
                .fold(f64::INFINITY, f64::min);
            return Ok(Eigenfunction {
                field,
                mu,
                residual,
                iterations: it,
                min_interior,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_power_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(h: f64) -> EigenConfig {
        EigenConfig {
            solver: SolverConfig {
                h,
                ..SolverConfig::default()
            },
            ..EigenConfig::default()
        }
    }

    #[test]
    fn bounds_scale_with_the_radius() {
        let s = 0.75;
        let b1 = eigen_bounds(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), s).unwrap();
        let b2 = eigen_bounds(&DomainSpec::ball(vec![0.0, 0.0], 2.0).unwrap(), s).unwrap();
        assert!((b1.lower - 1.329340388179137).abs() < 1e-9);
        assert!((b2.lower - 0.469992801493313).abs() < 1e-9);
    }

    #[test]
    fn inf_with_k_below_n_is_infinite() {
        let e = estimate_mu(
            &DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(),
            1,
            Sign::Inf,
            0.75,
            &quick(0.25),
        )
        .unwrap();
        assert!(e.infinite && e.mu_lo.is_infinite() && e.trace.is_empty());
    }

    #[test]
    fn one_dimensional_bracket_sits_above_the_lower_bound() {
        let dom = DomainSpec::ball(vec![0.0], 1.0).unwrap();
        let e = estimate_mu(&dom, 1, Sign::Sup, 0.75, &quick(1.0 / 32.0)).unwrap();
        assert!(e.mu_lo <= e.mu_hi);
        assert!(e.mu_lo >= e.lower_bound - 0.05, "{e:?}");
        assert!(e.width() <= 1e-2 * e.mu_hi + 1e-12);
        let psi = principal_eigenfunction(&dom, 0.75, e.midpoint(), &quick(1.0 / 32.0)).unwrap();
        assert!(psi.mu >= e.mu_lo - 0.05 && psi.mu <= e.mu_hi + 0.05, "{} {e:?}", psi.mu);
        assert!((psi.field.sup_norm() - 1.0).abs() < 1e-15);
        assert!(psi.min_interior > 0.0);
    }
}
