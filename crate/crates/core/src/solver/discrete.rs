//! Lattice discretization of `I_k^±` on a convex domain with zero exterior
//! data.
//!
//! Along each direction the line integral uses [`LatticeRule`] with samples
//! `x ± m t xi`, where `t` is the direction's step. Lattice directions step
//! from node to node; uniform directions interpolate multilinearly. Either
//! way every sample is a nonnegative combination of node values, so the
//! operator has nonnegative off-diagonal coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use super::gmres::gmres;
use super::grid::GridField;
use crate::frames::Sign;
use crate::kernel::LatticeRule;
use crate::oracles::cs_constant;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSet {
    /// Primitive integer vectors ordered by length; samples are nodes.
    #[default]
    Lattice,
    /// Angles `theta_0 + j pi / M`, sampled by interpolation.
    Uniform,
}

#[derive(Debug, Clone)]
enum Samples {
    Exact(isize),
    /// Per `m`: (offset, weight) pairs for `+xi` and `-xi`.
    Interp {
        plus: Vec<Vec<(isize, f64)>>,
        minus: Vec<Vec<(isize, f64)>>,
    },
}

#[derive(Debug, Clone)]
struct Stencil {
    unit: Vec<f64>,
    step: f64,
    /// `C_s step^(-2s)`
    scale: f64,
    samples: Samples,
}

/// Everything about the discrete problem that does not depend on the data.
#[derive(Debug, Clone)]
pub struct Discretization {
    template: GridField,
    s: f64,
    cs: f64,
    k: usize,
    sign: Sign,
    stencils: Vec<Stencil>,
    frames: Vec<Vec<usize>>,
    weights: Vec<f64>,
    /// Interior sample counts per (node, direction).
    reach: Vec<(u32, u32)>,
    /// Diagonal coefficient per (node, direction), positive.
    diag: Vec<f64>,
    /// Extra weight on the first `+` / `-` sample where the other side
    /// leaves the domain within one step.
    adj: Vec<[f64; 2]>,
}

impl Discretization {
    #[allow(clippy::too_many_arguments, clippy::type_complexity)]
    pub fn new(
        dom: &DomainSpec,
        h: f64,
        k: usize,
        sign: Sign,
        s: f64,
        directions: usize,
        set: DirectionSet,
        rotation_seed: Option<u64>,
    ) -> Result<Self> {
        let n = dom.dim();
        if !(1..=2).contains(&n) {
            return Err(Error::BadDims(format!("grid solver supports N in {{1, 2}}, got {n}")));
        }
        if k == 0 || k > n {
            return Err(Error::BadDims(format!("k = {k} with N = {n}")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {s} not in (0, 1)")));
        }
        let template = GridField::zeros(dom, h)?;
        let cs = cs_constant(s);
        let lat = template.lattice().clone();
        let strides: Vec<isize> = lat.strides().iter().map(|v| *v as isize).collect();

        let (units, frames, exact): (Vec<Vec<f64>>, Vec<Vec<usize>>, Vec<Option<Vec<i64>>>) =
            if n == 1 {
                (vec![vec![1.0]], vec![vec![0]], vec![Some(vec![1])])
            } else {
                match set {
                    DirectionSet::Lattice => lattice_directions(directions, k)?,
                    DirectionSet::Uniform => {
                        let theta0 = rotation_seed
                            .map(|seed| {
                                ChaCha8Rng::seed_from_u64(seed)
                                    .gen_range(0.0..std::f64::consts::PI / directions.max(1) as f64)
                            })
                            .unwrap_or(0.0);
                        uniform_directions(directions, k, theta0)?
                    }
                }
            };

        // longest possible line inside the domain, in steps of h
        let diam = dom.diam();
        let m_cap = (diam / h).ceil() as usize + 4;

        let mut stencils = Vec::with_capacity(units.len());
        for (unit, ex) in units.iter().zip(&exact) {
            let st = match ex {
                Some(v) => {
                    let len = v.iter().map(|c| (c * c) as f64).sum::<f64>().sqrt();
                    let off: isize = v.iter().zip(&strides).map(|(c, s)| *c as isize * s).sum();
                    Stencil {
                        unit: unit.clone(),
                        step: h * len,
                        scale: cs * (h * len).powf(-2.0 * s),
                        samples: Samples::Exact(off),
                    }
                }
                None => {
                    let build = |sgn: f64| -> Vec<Vec<(isize, f64)>> {
                        (1..=m_cap)
                            .map(|m| {
                                let disp: Vec<f64> = unit.iter().map(|u| sgn * u * m as f64).collect();
                                interp_offsets(&disp, &strides)
                            })
                            .collect()
                    };
                    Stencil {
                        unit: unit.clone(),
                        step: h,
                        scale: cs * h.powf(-2.0 * s),
                        samples: Samples::Interp {
                            plus: build(1.0),
                            minus: build(-1.0),
                        },
                    }
                }
            };
            stencils.push(st);
        }

        let rule = LatticeRule::new(s, m_cap + 2);
        let weights: Vec<f64> = (1..=m_cap + 1).map(|m| rule.weight(m, m + 1)).collect();
        let mut prefix = vec![0.0; m_cap + 2];
        for m in 1..=m_cap + 1 {
            prefix[m] = prefix[m - 1] + weights[m - 1];
        }
        // S(M) = sum_{m<M} c_m + t_M + tail(M)
        let total = |big_m: usize| prefix[big_m - 1] + rule.weight(big_m, big_m) + rule.tail(big_m);

        let first = 1.0 / (2.0 - 2.0 * s);
        let interior = template.interior().to_vec();
        let nd = stencils.len();
        let per_node: Vec<Vec<((u32, u32), f64, [f64; 2])>> = interior
            .par_iter()
            .map(|&i| {
                let x = lat.coords(i);
                stencils
                    .iter()
                    .map(|st| {
                        let walk = |sgn: f64| -> u32 {
                            let mut m = 0usize;
                            loop {
                                let inside = match st.samples {
                                    Samples::Exact(off) => {
                                        let j = i as isize + sgn as isize * (m as isize + 1) * off;
                                        template_is_interior(&template, j)
                                    }
                                    Samples::Interp { .. } => {
                                        let t = (m + 1) as f64 * st.step * sgn;
                                        let p: Vec<f64> =
                                            x.iter().zip(&st.unit).map(|(a, u)| a + t * u).collect();
                                        dom.contains(&p)
                                    }
                                };
                                if !inside || m + 1 > m_cap {
                                    return m as u32;
                                }
                                m += 1;
                            }
                        };
                        let (p, q) = (walk(1.0), walk(-1.0));
                        let big_m = p.max(q) as usize + 1;
                        if p > 0 && q > 0 {
                            return ((p, q), st.scale * 2.0 * total(big_m), [0.0, 0.0]);
                        }
                        // a side exits before its first sample: resolve the
                        // exit exactly on [0, step]
                        let (tm, tp) = dom.exit_times(&x, &st.unit);
                        let side = |count: u32, t: f64| {
                            (count == 0).then(|| (t / st.step).clamp(1e-12, 1.0))
                        };
                        let w = near_weights(s, side(p, tp), side(q, tm));
                        let adj = [
                            if p > 0 { st.scale * (w[1] - first) } else { 0.0 },
                            if q > 0 { st.scale * (w[2] - first) } else { 0.0 },
                        ];
                        let dg = st.scale * (2.0 * (total(big_m) - first) - w[0]);
                        ((p, q), dg, adj)
                    })
                    .collect()
            })
            .collect();
        let mut reach = Vec::with_capacity(interior.len() * nd);
        let mut diag = Vec::with_capacity(interior.len() * nd);
        let mut adj = Vec::with_capacity(interior.len() * nd);
        for row in per_node {
            for (r, d, a) in row {
                reach.push(r);
                diag.push(d);
                adj.push(a);
            }
        }

        Ok(Discretization {
            template,
            s,
            cs,
            k,
            sign,
            stencils,
            frames,
            weights,
            reach,
            diag,
            adj,
        })
    }

    pub fn template(&self) -> &GridField {
        &self.template
    }

    pub fn len(&self) -> usize {
        self.template.interior().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn cs(&self) -> f64 {
        self.cs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn direction_count(&self) -> usize {
        self.stencils.len()
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Unit vectors of each frame.
    pub fn frame_vectors(&self, p: usize) -> Vec<Vec<f64>> {
        self.frames[p].iter().map(|&d| self.stencils[d].unit.clone()).collect()
    }

    /// Samples a function at the interior nodes.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
        let lat = self.template.lattice();
        self.template
            .interior()
            .par_iter()
            .map(|&i| f(&lat.coords(i)))
            .collect()
    }

    /// Interior vector as a grid field.
    pub fn to_grid(&self, u: &[f64]) -> Result<GridField> {
        let mut g = self.template.clone();
        g.set_interior_values(u)?;
        Ok(g)
    }

    /// Full-lattice array with zeros outside.
    fn scatter(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.template.lattice().len()];
        for (j, &i) in self.template.interior().iter().enumerate() {
            full[i] = u[j];
        }
        full
    }

    /// Weighted neighbour sum (without the diagonal) of direction `d` at
    /// interior node `j`, scaled by `C_s step^(-2s)`.
    #[inline]
    fn off(&self, full: &[f64], j: usize, d: usize) -> f64 {
        let i = self.template.interior()[j] as isize;
        let st = &self.stencils[d];
        let (p, q) = self.reach[j * self.stencils.len() + d];
        let adj = self.adj[j * self.stencils.len() + d];
        let mut acc = 0.0;
        let mut first = [0.0; 2];
        match &st.samples {
            Samples::Exact(off) => {
                for m in 1..=p as usize {
                    let v = full[(i + m as isize * off) as usize];
                    acc += self.weights[m - 1] * v;
                    if m == 1 {
                        first[0] = v;
                    }
                }
                for m in 1..=q as usize {
                    let v = full[(i - m as isize * off) as usize];
                    acc += self.weights[m - 1] * v;
                    if m == 1 {
                        first[1] = v;
                    }
                }
            }
            Samples::Interp { plus, minus } => {
                for m in 1..=p as usize {
                    let v: f64 = plus[m - 1].iter().map(|(o, w)| w * full[(i + o) as usize]).sum();
                    acc += self.weights[m - 1] * v;
                    if m == 1 {
                        first[0] = v;
                    }
                }
                for m in 1..=q as usize {
                    let v: f64 = minus[m - 1].iter().map(|(o, w)| w * full[(i + o) as usize]).sum();
                    acc += self.weights[m - 1] * v;
                    if m == 1 {
                        first[1] = v;
                    }
                }
            }
        }
        st.scale * acc + adj[0] * first[0] + adj[1] * first[1]
    }

    #[inline]
    fn diag_of(&self, j: usize, d: usize) -> f64 {
        self.diag[j * self.stencils.len() + d]
    }

    /// `I_xi u` at node `j` for every direction.
    fn directional(&self, full: &[f64], u: &[f64], j: usize) -> Vec<f64> {
        (0..self.stencils.len())
            .map(|d| self.off(full, j, d) - self.diag_of(j, d) * u[j])
            .collect()
    }

    fn frame_values(&self, dir: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let dir = dir.to_vec();
        self.frames.iter().map(move |fr| fr.iter().map(|&d| dir[d]).sum())
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self.sign {
            Sign::Sup => a > b,
            Sign::Inf => a < b,
        }
    }

    /// Extremal frame value and its index at every node.
    fn extremal(&self, u: &[f64]) -> Vec<(f64, usize)> {
        let full = self.scatter(u);
        (0..self.len())
            .into_par_iter()
            .map(|j| {
                let dir = self.directional(&full, u, j);
                let mut best = (f64::NAN, 0);
                for (p, v) in self.frame_values(&dir).enumerate() {
                    if p == 0 || self.better(v, best.0) {
                        best = (v, p);
                    }
                }
                best
            })
            .collect()
    }

    /// `I_k^± u` at the interior nodes.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.extremal(u).into_iter().map(|(v, _)| v).collect()
    }

    /// `I_k^± u + c u - f` at the interior nodes.
    pub fn residual(&self, u: &[f64], f: &[f64], c: &[f64]) -> Vec<f64> {
        self.apply(u)
            .into_iter()
            .enumerate()
            .map(|(j, v)| v + c[j] * u[j] - f[j])
            .collect()
    }

    /// Largest total diagonal weight over nodes and frames, net of `c`.
    pub fn max_diagonal(&self, c: &[f64]) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|j| {
                self.frames
                    .iter()
                    .map(|fr| fr.iter().map(|&d| self.diag_of(j, d)).sum::<f64>() - c[j])
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Smallest per-node margin of diagonal dominance over frames, in the
    /// same units as `c`.
    pub fn min_dominance(&self) -> f64 {
        let ones = vec![1.0; self.len()];
        let full = self.scatter(&ones);
        (0..self.len())
            .into_par_iter()
            .map(|j| {
                self.frames
                    .iter()
                    .map(|fr| fr.iter().map(|&d| self.diag_of(j, d) - self.off(&full, j, d)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// One explicit step `u + w dt (I_k^± u + c u - f)`, evaluated in
    /// positive-coefficient form so that it is order preserving whenever
    /// `dt (diag - c) <= 1` at every node and frame. Returns the number of
    /// (node, frame) pairs violating that bound alongside the new iterate.
    pub fn sweep(&self, u: &[f64], f: &[f64], c: &[f64], dt: f64, damping: f64) -> (Vec<f64>, usize) {
        let full = self.scatter(u);
        let out: Vec<(f64, usize)> = (0..self.len())
            .into_par_iter()
            .map(|j| {
                let mut best = f64::NAN;
                let mut bad = 0;
                for (p, fr) in self.frames.iter().enumerate() {
                    let mut off = 0.0;
                    let mut dg = 0.0;
                    for &d in fr {
                        off += self.off(&full, j, d);
                        dg += self.diag_of(j, d);
                    }
                    let self_coef = 1.0 - dt * (dg - c[j]);
                    if self_coef < 0.0 {
                        bad += 1;
                    }
                    let v = dt * off + self_coef * u[j];
                    if p == 0 || self.better(v, best) {
                        best = v;
                    }
                }
                let stepped = best - dt * f[j];
                ((1.0 - damping) * u[j] + damping * stepped, bad)
            })
            .collect();
        let bad = out.iter().map(|o| o.1).sum();
        (out.into_iter().map(|o| o.0).collect(), bad)
    }

    /// Policy iteration. Each policy is evaluated with GMRES; the inner
    /// solve targets a fraction of `tol` in the sup norm.
    #[allow(clippy::too_many_arguments)]
    pub fn howard(
        &self,
        f: &[f64],
        c: &[f64],
        u0: &[f64],
        tol: f64,
        max_policies: usize,
        restart: usize,
        max_inner: usize,
    ) -> Result<HowardOutcome> {
        let n = self.len();
        let mut u = u0.to_vec();
        let mut policy: Vec<usize> = Vec::new();
        let mut inner_total = 0;
        let mut last_res = f64::INFINITY;
        for it in 0..max_policies {
            let ext = self.extremal(&u);
            let r = ext
                .iter()
                .enumerate()
                .fold(0.0f64, |a, (j, (v, _))| a.max((v + c[j] * u[j] - f[j]).abs()));
            last_res = r;
            if r <= tol {
                return Ok(HowardOutcome {
                    u,
                    policies: it,
                    inner_iterations: inner_total,
                    residual: r,
                });
            }
            if it == 0 {
                policy = ext.iter().map(|e| e.1).collect();
            } else {
                let cur = self.apply_policy(&u, &policy);
                for (j, (v, p)) in ext.into_iter().enumerate() {
                    // switch only on a strict improvement so ties never cycle
                    let gain = match self.sign {
                        Sign::Sup => v - cur[j],
                        Sign::Inf => cur[j] - v,
                    };
                    if gain > 1e-13 * (v.abs() + cur[j].abs()) {
                        policy[j] = p;
                    }
                }
            }
            let inv_diag: Vec<f64> = (0..n)
                .map(|j| {
                    let dg: f64 = self.frames[policy[j]].iter().map(|&d| self.diag_of(j, d)).sum();
                    1.0 / (c[j] - dg)
                })
                .collect();
            let max_diag = inv_diag.iter().fold(0.0f64, |a, v| a.max(1.0 / v.abs()));
            let apply = |v: &[f64], out: &mut [f64]| {
                let full = self.scatter(v);
                out.par_iter_mut().enumerate().for_each(|(j, o)| {
                    let mut acc = c[j] * v[j];
                    for &d in &self.frames[policy[j]] {
                        acc += self.off(&full, j, d) - self.diag_of(j, d) * v[j];
                    }
                    *o = acc;
                });
            };
            // inexact policy evaluation: tighten with the outer residual
            let target = (0.25 * tol).max(0.02 * r) / max_diag;
            let out = gmres(apply, &inv_diag, f, &mut u, restart, max_inner, target);
            inner_total += out.iterations;
            if !out.converged {
                return Err(Error::NotConverged {
                    iterations: inner_total,
                    residual: out.residual * max_diag,
                });
            }
        }
        Err(Error::NotConverged {
            iterations: max_policies,
            residual: last_res,
        })
    }

    /// The policy-`p` linear operator applied to `u` (no `c` term).
    pub fn apply_policy(&self, u: &[f64], policy: &[usize]) -> Vec<f64> {
        let full = self.scatter(u);
        (0..self.len())
            .into_par_iter()
            .map(|j| {
                self.frames[policy[j]]
                    .iter()
                    .map(|&d| self.off(&full, j, d) - self.diag_of(j, d) * u[j])
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct HowardOutcome {
    pub u: Vec<f64>,
    pub policies: usize,
    pub inner_iterations: usize,
    pub residual: f64,
}

/// Coefficients of `(u(x), u(x + t xi), u(x - t xi))` in
/// `int_0^t delta(tau) tau^(-1-2s) dtau / t^(-2s)` when one side (or both)
/// leaves the domain before its first sample. `exit_*` is the exit
/// parameter in units of `t` for a side without a first sample.
///
/// Each side is linear between `u(x)` and its first sample, or between
/// `u(x)` and 0 at its exit and 0 after. `delta` is then piecewise linear
/// and integrated exactly, except on `[0, rho]` (`rho` the first break)
/// where `delta / tau^2` is frozen at its value at `rho`.
pub(crate) fn near_weights(s: f64, exit_plus: Option<f64>, exit_minus: Option<f64>) -> [f64; 3] {
    let side = |exit: Option<f64>, sigma: f64, slot: usize| -> [f64; 3] {
        let mut c = [0.0; 3];
        match exit {
            None => {
                c[0] = 1.0 - sigma;
                c[slot] = sigma;
            }
            Some(b) if sigma < b => c[0] = 1.0 - sigma / b,
            Some(_) => {}
        }
        c
    };
    let delta = |sigma: f64| -> [f64; 3] {
        let a = side(exit_plus, sigma, 1);
        let b = side(exit_minus, sigma, 2);
        [a[0] + b[0] - 2.0, a[1] + b[1], a[2] + b[2]]
    };
    let bp = exit_plus.unwrap_or(1.0);
    let bm = exit_minus.unwrap_or(1.0);
    let rho = bp.min(bm);
    let mut out = delta(rho).map(|v| v * rho.powf(-2.0 * s) / (2.0 - 2.0 * s));
    let mut breaks = vec![rho, bp, bm, 1.0];
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (wa, wb) = linear_piece(s, a, b);
        let (da, db) = (delta(a), delta(b));
        for k in 0..3 {
            out[k] += wa * da[k] + wb * db[k];
        }
    }
    out
}

/// Weights of the end values for `int_a^b l(t) t^(-1-2s) dt` with `l`
/// linear.
fn linear_piece(s: f64, a: f64, b: f64) -> (f64, f64) {
    let len = b - a;
    if len < 1e-6 * a {
        let w = 0.5 * len * (0.5 * (a + b)).powf(-1.0 - 2.0 * s);
        return (w, w);
    }
    let e = (a.powf(-2.0 * s) - b.powf(-2.0 * s)) / (2.0 * s);
    let f = if (s - 0.5).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(1.0 - 2.0 * s) - a.powf(1.0 - 2.0 * s)) / (1.0 - 2.0 * s)
    };
    ((b * e - f) / len, (f - a * e) / len)
}

fn template_is_interior(g: &GridField, j: isize) -> bool {
    if j < 0 || j as usize >= g.lattice().len() {
        return false;
    }
    g.interior().binary_search(&(j as usize)).is_ok()
}

fn interp_offsets(disp: &[f64], strides: &[isize]) -> Vec<(isize, f64)> {
    let n = disp.len();
    let mut base = 0isize;
    let mut frac = [0.0f64; 3];
    for i in 0..n {
        let f = disp[i].floor();
        base += f as isize * strides[i];
        frac[i] = disp[i] - f;
    }
    let mut out = Vec::with_capacity(1 << n);
    for corner in 0..(1usize << n) {
        let mut w = 1.0;
        let mut off = base;
        for i in 0..n {
            if corner >> i & 1 == 1 {
                w *= frac[i];
                off += strides[i];
            } else {
                w *= 1.0 - frac[i];
            }
        }
        if w > 0.0 {
            out.push((off, w));
        }
    }
    out
}

type DirectionTable = (Vec<Vec<f64>>, Vec<Vec<usize>>, Vec<Option<Vec<i64>>>);

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// First `m` primitive planar integer directions with entries in [-3, 3].
fn lattice_directions(m: usize, k: usize) -> Result<DirectionTable> {
    let mut v: Vec<(i64, i64)> = Vec::new();
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            let canonical = a > 0 || (a == 0 && b > 0);
            if canonical && gcd(a, b) == 1 {
                v.push((a, b));
            }
        }
    }
    v.sort_by(|p, q| {
        let lp = p.0 * p.0 + p.1 * p.1;
        let lq = q.0 * q.0 + q.1 * q.1;
        let ap = (p.1 as f64).atan2(p.0 as f64).rem_euclid(std::f64::consts::PI);
        let aq = (q.1 as f64).atan2(q.0 as f64).rem_euclid(std::f64::consts::PI);
        lp.cmp(&lq).then(ap.total_cmp(&aq))
    });
    if m == 0 || m > v.len() {
        return Err(Error::InvalidParameter(format!(
            "lattice direction count must be in 1..={}",
            v.len()
        )));
    }
    v.truncate(m);
    let units = v
        .iter()
        .map(|(a, b)| {
            let l = ((a * a + b * b) as f64).sqrt();
            vec![*a as f64 / l, *b as f64 / l]
        })
        .collect();
    let frames = if k == 1 {
        (0..m).map(|d| vec![d]).collect()
    } else {
        let mut fr = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if v[i].0 * v[j].0 + v[i].1 * v[j].1 == 0 {
                    fr.push(vec![i, j]);
                }
            }
        }
        fr
    };
    if frames.is_empty() {
        return Err(Error::InvalidParameter("no orthogonal pair in the direction set".into()));
    }
    let exact = v.iter().map(|(a, b)| Some(vec![*a, *b])).collect();
    Ok((units, frames, exact))
}

fn uniform_directions(m: usize, k: usize, theta0: f64) -> Result<DirectionTable> {
    if m == 0 || (k == 2 && m % 2 == 1) {
        return Err(Error::InvalidParameter(
            "uniform direction count must be positive, and even for k = 2".into(),
        ));
    }
    let units: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let t = theta0 + std::f64::consts::PI * j as f64 / m as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let frames = if k == 1 {
        (0..m).map(|d| vec![d]).collect()
    } else {
        (0..m / 2).map(|j| vec![j, j + m / 2]).collect()
    };
    Ok((units, frames, vec![None; m]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> DomainSpec {
        DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn lattice_directions_pair_up() {
        let (u, fr, _) = lattice_directions(8, 2).unwrap();
        assert_eq!(u.len(), 8);
        assert_eq!(fr.len(), 4);
        for f in &fr {
            let d: f64 = u[f[0]].iter().zip(&u[f[1]]).map(|(a, b)| a * b).sum();
            assert!(d.abs() < 1e-15);
        }
    }

    #[test]
    fn near_weights_reduce_to_the_lattice_rule() {
        let s = 0.7;
        let w = near_weights(s, Some(1.0), Some(1.0));
        let first = 1.0 / (2.0 - 2.0 * s);
        assert!((w[0] + 2.0 * first).abs() < 1e-14, "{w:?}");
        assert_eq!((w[1], w[2]), (0.0, 0.0));
    }

    #[test]
    fn near_weights_are_monotone_and_blow_up_at_the_wall() {
        let s = 0.75;
        let mut prev = 0.0;
        for e in [0.9, 0.5, 0.1, 0.01, 1e-4] {
            let w = near_weights(s, Some(e), None);
            assert!(w[0] < 0.0 && w[1] == 0.0 && w[2] >= 0.0, "{w:?}");
            assert!(w[0] < prev);
            prev = w[0];
        }
        // exit -> 0: diagonal ~ exit^(-2s) / (2s) from the exterior half-line
        let e: f64 = 1e-6;
        let w = near_weights(s, Some(e), None);
        let lead = e.powf(-2.0 * s) / (2.0 * s);
        let ratio = -w[0] / lead;
        assert!((1.0..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn interp_weights_sum_to_one() {
        let w = interp_offsets(&[0.3, -1.7], &[10, 1]);
        let s: f64 = w.iter().map(|p| p.1).sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(interp_offsets(&[2.0, -1.0], &[10, 1]), vec![(19, 1.0)]);
    }

    #[test]
    fn constant_inside_is_superharmonic_and_dominance_is_positive() {
        let d = Discretization::new(&disk(), 0.125, 1, Sign::Sup, 0.75, 8, DirectionSet::Lattice, None)
            .unwrap();
        let ones = vec![1.0; d.len()];
        assert!(d.apply(&ones).iter().all(|v| *v < 0.0));
        assert!(d.min_dominance() > 0.0);
    }

    #[test]
    fn zero_data_gives_zero() {
        for set in [DirectionSet::Lattice, DirectionSet::Uniform] {
            let d = Discretization::new(&disk(), 0.125, 2, Sign::Inf, 0.6, 8, set, Some(3)).unwrap();
            let z = vec![0.0; d.len()];
            let out = d.howard(&z, &z, &z, 1e-10, 10, 30, 1000).unwrap();
            assert!(out.u.iter().all(|v| *v == 0.0));
        }
    }
}
