//! Small dense numerics: Jacobi eigenvalues, one-sided Jacobi singular
//! values, Householder null vectors and Cholesky solves.
//!
//! Square matrices are row-major `Vec<f64>` of length `n * n`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Sum of outer products of the given rows.
pub fn gram_of_rows<'a>(rows: impl IntoIterator<Item = &'a [f64]>, n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n * n];
    for r in rows {
        for i in 0..n {
            let ri = r[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..n {
                s[i * n + j] += ri * r[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            s[i * n + j] = s[j * n + i];
        }
    }
    s
}

pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching eigenvectors
/// (eigenvector `k` is `vecs[k]`).
pub fn sym_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += m[i * n + j] * m[i * n + j];
                }
            }
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[k * n + p];
                        let mkq = m[k * n + q];
                        m[k * n + p] = c * mkp - s * mkq;
                        m[k * n + q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[p * n + k];
                        let mqk = m[q * n + k];
                        m[p * n + k] = c * mpk - s * mqk;
                        m[q * n + k] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let vecs = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    (vals, vecs)
}

pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    sym_eigen(a, n).0
}

/// Singular values (descending) of the matrix whose rows are `rows`,
/// each of length `n`, by one-sided Jacobi. Small singular values are
/// accurate to roughly machine precision times the largest one.
pub fn singular_values(rows: &[&[f64]], n: usize) -> Vec<f64> {
    let k = rows.len();
    // columns of the k x n matrix
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                let cp = &mut lo[p];
                let cq = &mut hi[0];
                for i in 0..k {
                    let a = cp[i];
                    let b = cq[i];
                    cp[i] = c * a - s * b;
                    cq[i] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank with threshold `tau * max(rows, n) * sigma_max`.
pub fn numerical_rank(rows: &[&[f64]], n: usize, tau: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let sv = singular_values(rows, n);
    let smax = sv[0];
    if smax == 0.0 {
        return 0;
    }
    let thresh = tau * (rows.len().max(n) as f64) * smax;
    sv.iter().filter(|&&s| s > thresh).count()
}

/// Unit vector orthogonal to `k < n` vectors of length `n` (the last
/// column of a full Householder QR of their column matrix), together with
/// the smallest |R_jj|, which measures how independent the inputs are.
pub fn null_vector(rows: &[&[f64]], n: usize) -> (Vec<f64>, f64) {
    let k = rows.len();
    assert!(k < n, "null_vector needs fewer vectors than the dimension");
    // working copy, column-major n x k
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut min_r = f64::INFINITY;
    for j in 0..k {
        let x: Vec<f64> = a[j][j..].to_vec();
        let nx = norm(&x);
        let mut v = x.clone();
        let alpha = if x[0] >= 0.0 { -nx } else { nx };
        v[0] -= alpha;
        let nv = norm(&v);
        min_r = min_r.min(nx);
        if nv > 0.0 {
            for vi in v.iter_mut() {
                *vi /= nv;
            }
            for col in a.iter_mut().skip(j) {
                let d = dot(&v, &col[j..]);
                for (ci, vi) in col[j..].iter_mut().zip(&v) {
                    *ci -= 2.0 * d * vi;
                }
            }
        }
        reflectors.push(v);
    }
    let mut e = vec![0.0; n];
    e[n - 1] = 1.0;
    for j in (0..k).rev() {
        let v = &reflectors[j];
        let d = dot(v, &e[j..]);
        for (ei, vi) in e[j..].iter_mut().zip(v) {
            *ei -= 2.0 * d * vi;
        }
    }
    let ne = norm(&e);
    for ei in e.iter_mut() {
        *ei /= ne;
    }
    (e, if k == 0 { f64::INFINITY } else { min_r })
}

/// Lower Cholesky factor of an SPD matrix, or `None` if a pivot is not
/// positive.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Solve `A x = b` for SPD `A` with one step of iterative refinement.
pub fn spd_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(a, n)?;
    let mut x = cholesky_solve(&l, n, b);
    let r: Vec<f64> = mat_vec(a, n, &x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| bi - ax)
        .collect();
    let dx = cholesky_solve(&l, n, &r);
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi += di;
    }
    Some(x)
}

/// Thin QR of the `k x n` matrix with the given rows, by Gram-Schmidt with
/// reorthogonalisation over the columns. Returns the rows of `Q` and the
/// row-major upper triangular `R`, or `None` when a column is dependent.
pub fn thin_qr(rows: &[&[f64]], n: usize) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let k = rows.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r = vec![0.0; n * n];
    for c in 0..n {
        let mut v: Vec<f64> = rows.iter().map(|row| row[c]).collect();
        let original = norm(&v);
        for _ in 0..2 {
            for (j, qj) in q.iter().enumerate() {
                let d = dot(qj, &v);
                r[j * n + c] += d;
                axpy(&mut v, -d, qj);
            }
        }
        let nv = norm(&v);
        if nv <= 1e-14 * original.max(f64::MIN_POSITIVE) * k as f64 || nv == 0.0 {
            return None;
        }
        r[c * n + c] = nv;
        q.push(scale(&v, 1.0 / nv));
    }
    let q_rows = (0..k)
        .map(|i| q.iter().map(|col| col[i]).collect())
        .collect();
    Some((q_rows, r))
}

/// Solves `R x = b` for row-major upper triangular `R`.
pub fn upper_solve(r: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= r[i * n + k] * x[k];
        }
        x[i] = s / r[i * n + i];
    }
    x
}

pub fn determinant_spd(a: &[f64], n: usize) -> f64 {
    match cholesky(a, n) {
        Some(l) => (0..n).map(|i| l[i * n + i] * l[i * n + i]).product(),
        None => 0.0,
    }
}

pub fn binomial(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    let k = k.min(m - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (m - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Advance `idx` to the next `k`-combination of `0..m` in lexicographic
/// order. Returns false after the last one.
pub fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
