//! Small dense solvers: a tableau simplex and non-negative least squares.

use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Unbounded,
}

/// Maximise `c^T x` subject to `A x <= b`, `x >= 0`, with `b >= 0` so the
/// origin is feasible. Bland's rule, so no cycling.
pub fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let rows = a.len();
    let vars = c.len();
    assert!(b.iter().all(|v| *v >= 0.0), "origin must be feasible");
    let width = vars + rows + 1;
    let mut t = vec![vec![0.0; width]; rows + 1];
    for (i, row) in a.iter().enumerate() {
        t[i][..vars].copy_from_slice(row);
        t[i][vars + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..vars {
        t[rows][j] = -c[j];
    }
    let mut basis: Vec<usize> = (vars..vars + rows).collect();
    let eps = 1e-12;
    loop {
        let Some(enter) = (0..width - 1).find(|&j| t[rows][j] < -eps) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            if t[i][enter] > eps {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = ratio < best - eps
                    || (ratio <= best + eps && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best = ratio.min(best);
                    leave = Some(i);
                }
            }
        }
        let Some(p) = leave else {
            return LpOutcome::Unbounded;
        };
        let piv = t[p][enter];
        for v in t[p].iter_mut() {
            *v /= piv;
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p {
                let f = row[enter];
                if f != 0.0 {
                    for (x, y) in row.iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                }
            }
        }
        basis[p] = enter;
    }
    let mut x = vec![0.0; vars];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < vars {
            x[bv] = t[i][width - 1];
        }
    }
    LpOutcome::Optimal {
        value: t[rows][width - 1],
        x,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub coefficients: Vec<f64>,
    /// `sum_k c_k v_k - target`.
    pub residual: Vec<f64>,
    /// KKT conditions hold to the requested tolerance.
    pub kkt: bool,
}

fn combine(vectors: &[&[f64]], c: &[f64], n: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for (v, ci) in vectors.iter().zip(c) {
        linalg::axpy(&mut y, *ci, v);
    }
    y
}

fn kkt_holds(vectors: &[&[f64]], c: &[f64], r: &[f64], tol: f64) -> bool {
    vectors.iter().zip(c).all(|(v, ci)| {
        let g = linalg::dot(v, r);
        g >= -tol && (*ci <= 0.0 || g.abs() <= tol)
    })
}

/// Least squares restricted to the columns in `support`, `None` when those
/// columns are numerically dependent.
fn restricted_ls(vectors: &[&[f64]], support: &[usize], target: &[f64]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut g = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for (a, &i) in support.iter().enumerate() {
        rhs[a] = linalg::dot(vectors[i], target);
        for (b, &j) in support.iter().enumerate() {
            g[a * k + b] = linalg::dot(vectors[i], vectors[j]);
        }
    }
    linalg::spd_solve(&g, k, &rhs)
}

/// Lawson-Hanson active set method.
fn lawson_hanson(vectors: &[&[f64]], target: &[f64], n: usize, tol: f64) -> Vec<f64> {
    let k = vectors.len();
    let mut c = vec![0.0; k];
    let mut passive: Vec<usize> = Vec::new();
    for _ in 0..(3 * k + 10) {
        let r = linalg::sub(&combine(vectors, &c, n), target);
        let candidate = (0..k)
            .filter(|i| !passive.contains(i))
            .map(|i| (i, -linalg::dot(vectors[i], &r)))
            .filter(|(_, w)| *w > tol)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((enter, _)) = candidate else {
            break;
        };
        passive.push(enter);
        loop {
            let Some(z) = restricted_ls(vectors, &passive, target) else {
                passive.pop();
                return c;
            };
            if z.iter().all(|v| *v > 0.0) {
                for (p, &i) in passive.iter().enumerate() {
                    c[i] = z[p];
                }
                break;
            }
            let mut step = 1.0f64;
            for (p, &i) in passive.iter().enumerate() {
                if z[p] <= 0.0 {
                    step = step.min(c[i] / (c[i] - z[p]));
                }
            }
            for (p, &i) in passive.iter().enumerate() {
                c[i] += step * (z[p] - c[i]);
            }
            passive.retain(|&i| c[i] > tol * 1e-3);
            for i in 0..k {
                if !passive.contains(&i) {
                    c[i] = 0.0;
                }
            }
            if passive.is_empty() {
                break;
            }
        }
    }
    c
}

/// `min_{c >= 0} |sum_k c_k v_k - target|^2`. The active-set method runs
/// first; when its point fails the KKT check, projected gradient with step
/// `1/L` is run as well and the better of the two points is returned
/// together with its KKT status.
pub fn nnls(vectors: &[&[f64]], target: &[f64], max_iter: usize, tol: f64) -> NnlsSolution {
    let n = target.len();
    let k = vectors.len();
    let refs: Vec<&[f64]> = vectors.to_vec();
    let kkt_tol = tol.max(1e-12) * (1.0 + linalg::norm(target));
    let polished = lawson_hanson(&refs, target, n, tol * 1e-3);
    let residual = linalg::sub(&combine(&refs, &polished, n), target);
    if kkt_holds(&refs, &polished, &residual, kkt_tol) {
        return NnlsSolution {
            coefficients: polished,
            residual,
            kkt: true,
        };
    }
    let mut g = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            g[a * k + b] = linalg::dot(vectors[a], vectors[b]);
        }
    }
    let lipschitz = linalg::sym_eigenvalues(&g, k)
        .last()
        .copied()
        .unwrap_or(1.0)
        .max(1e-300);
    let mut c = vec![0.0; k];
    for _ in 0..max_iter {
        let r = linalg::sub(&combine(&refs, &c, n), target);
        let mut moved = 0.0f64;
        for (i, ci) in c.iter_mut().enumerate() {
            let next = (*ci - linalg::dot(vectors[i], &r) / lipschitz).max(0.0);
            moved = moved.max((next - *ci).abs());
            *ci = next;
        }
        if moved <= tol * 1e-2 {
            break;
        }
    }
    let objective = |c: &[f64]| linalg::norm(&linalg::sub(&combine(&refs, c, n), target));
    let best = if objective(&polished) <= objective(&c) {
        polished
    } else {
        c
    };
    let residual = linalg::sub(&combine(&refs, &best, n), target);
    let kkt = kkt_holds(&refs, &best, &residual, kkt_tol);
    NnlsSolution {
        coefficients: best,
        residual,
        kkt,
    }
}
