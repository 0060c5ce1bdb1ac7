//! Small numerical kernels shared across modules.

use crate::C64;

/// `exp(z) - 1` without cancellation for small `|z|`.
pub fn cexpm1(z: C64) -> C64 {
    if z.norm() < 1e-5 {
        return z * (1.0 + z * (0.5 + z / 6.0));
    }
    let half_sin = (z.im / 2.0).sin();
    C64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin,
        z.re.exp() * z.im.sin(),
    )
}

/// Moments `m[k] = int_0^1 s^k exp(z s) ds` for `k = 0..=kmax`.
///
/// Power series where the forward recurrence would lose digits, otherwise
/// the recurrence `m[k] = (e^z - k m[k-1]) / z` seeded with `expm1(z)/z`.
pub fn exp_moments(z: C64, kmax: usize) -> Vec<C64> {
    let r = z.norm();
    let mut out = Vec::with_capacity(kmax + 1);
    if r <= (kmax + 1) as f64 {
        for k in 0..=kmax {
            out.push(moment_series(z, k));
        }
        return out;
    }
    let ez = z.exp();
    out.push(cexpm1(z) / z);
    for k in 1..=kmax {
        let prev = out[k - 1];
        out.push((ez - prev * k as f64) / z);
    }
    out
}

fn moment_series(z: C64, k: usize) -> C64 {
    // sum_m z^m / (m! (k + m + 1))
    let mut term = C64::new(1.0, 0.0);
    let mut sum = C64::new(0.0, 0.0);
    for m in 0..400 {
        let add = term / (k + m + 1) as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() && m as f64 > z.norm() {
            break;
        }
        term *= z / (m + 1) as f64;
    }
    sum
}

/// Solves a tridiagonal system by the Thomas algorithm. `lower[0]` and
/// `upper[last]` are ignored.
pub fn solve_tridiagonal(lower: &[C64], diag: &[C64], upper: &[C64], rhs: &[C64]) -> Vec<C64> {
    let n = diag.len();
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / m;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Solves a small dense complex system by Gaussian elimination with
/// partial pivoting; `None` when singular.
pub fn solve_dense(mut m: Vec<Vec<C64>>, mut b: Vec<C64>) -> Option<Vec<C64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[piv][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Determinant of a dense complex matrix by elimination.
pub fn det_dense(mut m: Vec<Vec<C64>>) -> C64 {
    let n = m.len();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        if m[piv][col].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_moment(z: C64, k: usize) -> C64 {
        let (x, w) = gauss_legendre(60);
        x.iter()
            .zip(&w)
            .map(|(t, wt)| {
                let s = 0.5 * (t + 1.0);
                0.5 * wt * s.powi(k as i32) * (z * s).exp()
            })
            .sum()
    }

    #[test]
    fn moments_match_quadrature_across_regimes() {
        for z in [
            C64::new(0.0, 0.0),
            C64::new(1e-9, 0.0),
            C64::new(0.3, -2.0),
            C64::new(-6.0, 1.0),
            C64::new(0.0, 25.0),
            C64::new(-15.0, -3.0),
        ] {
            let m = exp_moments(z, 4);
            for k in 0..=4 {
                let b = brute_moment(z, k);
                assert!((m[k] - b).norm() < 1e-12 * (1.0 + b.norm()), "z={z} k={k}");
            }
        }
    }

    #[test]
    fn expm1_small_and_large() {
        let z = C64::new(1e-7, -2e-7);
        assert!((cexpm1(z) - z * (1.0 + z / 2.0)).norm() < 1e-20);
        let z = C64::new(1.2, 0.7);
        assert!((cexpm1(z) - (z.exp() - 1.0)).norm() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_and_dense_agree() {
        let c = |r: f64| C64::new(r, 0.1 * r);
        let lower = vec![c(0.0), c(1.0), c(-0.5)];
        let diag = vec![c(4.0), c(5.0), c(3.0)];
        let upper = vec![c(1.0), c(2.0), c(0.0)];
        let rhs = vec![c(1.0), c(2.0), c(3.0)];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let dense = vec![
            vec![diag[0], upper[0], c(0.0)],
            vec![lower[1], diag[1], upper[1]],
            vec![c(0.0), lower[2], diag[2]],
        ];
        let y = solve_dense(dense.clone(), rhs).unwrap();
        for k in 0..3 {
            assert!((x[k] - y[k]).norm() < 1e-14);
        }
        let d = det_dense(dense);
        let expect =
            diag[0] * (diag[1] * diag[2] - upper[1] * lower[2]) - upper[0] * lower[1] * diag[2];
        assert!((d - expect).norm() < 1e-13);
    }
}
