//! Restarted GMRES with diagonal (Jacobi) left preconditioning.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    /// 2-norm of the preconditioned residual at exit.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` starting from `x`. `apply(v, out)` writes `A v`;
/// `inv_diag` holds `1 / A_ii`. Stops when the preconditioned residual
/// drops below `tol` in the 2-norm.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    restart: usize,
    max_iter: usize,
    tol: f64,
) -> GmresOutcome {
    let n = b.len();
    let m = restart.max(1);
    let mut total = 0;
    let mut w = vec![0.0; n];
    let mut r = vec![0.0; n];
    loop {
        apply(x, &mut w);
        for i in 0..n {
            r[i] = (b[i] - w[i]) * inv_diag[i];
        }
        let beta = norm(&r);
        if beta <= tol || beta == 0.0 {
            return GmresOutcome {
                iterations: total,
                residual: beta,
                converged: true,
            };
        }
        if total >= max_iter {
            return GmresOutcome {
                iterations: total,
                residual: beta,
                converged: false,
            };
        }
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut hcol: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            apply(&v[j], &mut w);
            for i in 0..n {
                w[i] *= inv_diag[i];
            }
            let mut h = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                h[i] = dot(&w, vi);
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= h[i] * vk;
                }
            }
            h[j + 1] = norm(&w);
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let d = h[j].hypot(h[j + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (h[j] / d, h[j + 1] / d) };
            cs.push(c);
            sn.push(s);
            h[j] = d;
            let hn = h[j + 1];
            h[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            hcol.push(h);
            used = j + 1;
            total += 1;
            if g[j + 1].abs() <= tol || hn == 0.0 || total >= max_iter {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // back substitution on the triangular system
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for k in i + 1..used {
                acc -= hcol[k][i] * y[k];
            }
            y[i] = acc / hcol[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[k]) {
                *xi += yk * vi;
            }
        }
    }
}
