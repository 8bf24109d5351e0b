//! Slice helpers for small dense vectors in R^N.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

/// A unit vector orthogonal to the unit vector `e`.
pub fn orthogonal_unit(e: &[f64]) -> Vec<f64> {
    let k = (0..e.len()).min_by(|&a, &b| e[a].abs().total_cmp(&e[b].abs())).unwrap_or(0);
    let mut v: Vec<f64> = e.iter().map(|x| -e[k] * x).collect();
    v[k] += 1.0;
    normalized(&v)
}

/// |u|²|v|² − (u·v)² computed as Σ_{i<j}(u_i v_j − u_j v_i)², which is
/// non-negative without cancellation.
pub fn wedge_norm_sq(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            let w = u[i] * v[j] - u[j] * v[i];
            s += w * w;
        }
    }
    s
}

/// Solves the pinned second-difference system tridiag(-1, 2, -1) x = b in
/// place, independently for each of the `dim` interleaved components.
pub fn solve_laplacian(b: &mut [f64], dim: usize) {
    let n = b.len() / dim;
    if n == 0 {
        return;
    }
    // Thomas algorithm; the modified super-diagonal is shared by all components.
    let mut c = vec![0.0; n];
    let mut denom = 2.0;
    c[0] = -1.0 / denom;
    for k in 0..dim {
        b[k] /= denom;
    }
    for i in 1..n {
        denom = 2.0 + c[i - 1];
        c[i] = -1.0 / denom;
        for k in 0..dim {
            b[i * dim + k] = (b[i * dim + k] + b[(i - 1) * dim + k]) / denom;
        }
    }
    for i in (0..n - 1).rev() {
        for k in 0..dim {
            b[i * dim + k] -= c[i] * b[(i + 1) * dim + k];
        }
    }
}

/// Applies tridiag(-1, 2, -1) to interleaved components (zero Dirichlet ends).
pub fn apply_laplacian(x: &[f64], dim: usize) -> Vec<f64> {
    let n = x.len() / dim;
    let mut out = vec![0.0; x.len()];
    for i in 0..n {
        for k in 0..dim {
            let mut v = 2.0 * x[i * dim + k];
            if i > 0 {
                v -= x[(i - 1) * dim + k];
            }
            if i + 1 < n {
                v -= x[(i + 1) * dim + k];
            }
            out[i * dim + k] = v;
        }
    }
    out
}

/// Gaussian elimination with partial pivoting for a small dense system.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_solve_inverts_apply() {
        let x: Vec<f64> = (0..30).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        let mut b = apply_laplacian(&x, 3);
        solve_laplacian(&mut b, 3);
        for (u, v) in x.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }

    #[test]
    fn wedge_matches_cross_in_plane() {
        let u = [1.0, 2.0];
        let v = [-3.0, 0.5];
        let cross = u[0] * v[1] - u[1] * v[0];
        assert!((wedge_norm_sq(&u, &v) - cross * cross).abs() < 1e-14);
        let lhs = norm_sq(&u) * norm_sq(&v) - dot(&u, &v).powi(2);
        assert!((wedge_norm_sq(&u, &v) - lhs).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_unit_is_orthonormal() {
        for e in [vec![1.0, 0.0], vec![0.6, 0.8], normalized(&[1.0, -2.0, 0.5])] {
            let f = orthogonal_unit(&e);
            assert!(dot(&e, &f).abs() < 1e-15);
            assert!((norm(&f) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dense_solve() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let x = solve_dense(a, vec![3.0, 5.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
