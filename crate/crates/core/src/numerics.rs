//! Small numerical helpers: Gauss–Legendre quadrature, quintic Hermite
//! interpolation, tridiagonal solves and symmetric tridiagonal eigenvalues.

use crate::error::{Error, Result};

const GL8: [(f64, f64); 8] = [
    (-0.9602898564975362, 0.10122853629037669),
    (-0.7966664774136267, 0.22238103445337434),
    (-0.525532409916329, 0.31370664587788705),
    (-0.18343464249564978, 0.36268378337836177),
    (0.18343464249564978, 0.36268378337836177),
    (0.525532409916329, 0.31370664587788705),
    (0.7966664774136267, 0.22238103445337434),
    (0.9602898564975362, 0.10122853629037669),
];

/// Eight-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL8.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Nodes and weights of the eight-point rule on `[-1, 1]`.
pub fn gl8_rule() -> &'static [(f64, f64); 8] {
    &GL8
}

/// Integration matrix `S[j][l] = int_{-1}^{x_j} l_l(x) dx` of the Lagrange
/// basis on the eight Gauss–Legendre nodes `x_j`.
pub fn gl8_cumulative() -> [[f64; 8]; 8] {
    let lagrange = |l: usize, x: f64| {
        let mut v = 1.0;
        for (i, &(xi, _)) in GL8.iter().enumerate() {
            if i != l {
                v *= (x - xi) / (GL8[l].0 - xi);
            }
        }
        v
    };
    let mut s = [[0.0; 8]; 8];
    for (j, row) in s.iter_mut().enumerate() {
        for (l, entry) in row.iter_mut().enumerate() {
            *entry = gauss_legendre(|x| lagrange(l, x), -1.0, GL8[j].0);
        }
    }
    s
}

/// Quintic Hermite interpolation on `[x0, x0 + h]` from values, first and
/// second derivatives at both ends, evaluated at `x0 + s h`.
pub fn hermite5(s: f64, h: f64, f0: [f64; 3], f1: [f64; 3]) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    f0[0] * h0 + h * f0[1] * h1 + h * h * f0[2] * h2 + h * h * f1[2] * h3 + h * f1[1] * h4 + f1[0] * h5
}

/// Index `i` with `xs[i] <= x < xs[i+1]`, clamped to the valid range.
/// `xs` must be strictly increasing with at least two entries.
pub fn bracket_index(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    match xs.partition_point(|&v| v <= x) {
        0 => 0,
        i if i >= n => n - 2,
        i => i - 1,
    }
}

/// Solves a tridiagonal system by the Thomas algorithm. `sub[i]` couples row
/// `i` to `i-1` (`sub[0]` unused), `sup[i]` couples row `i` to `i+1`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::NonConvergence("singular tridiagonal system".into()));
    }
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::NonConvergence("singular tridiagonal system".into()));
        }
        c[i] = if i + 1 < n { sup[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `off` (`off[i]` couples `i` and `i+1`).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { f64::EPSILON * (off[i - 1].abs() + 1e-300) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection,
/// followed by inverse iteration for the eigenvector.
pub fn smallest_symmetric_tridiagonal(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    // inverse iteration with a shift just below the eigenvalue
    let shift = lambda - 1e-10 * lambda.abs().max(1e-12);
    let sub: Vec<f64> = std::iter::once(0.0).chain(off.iter().copied()).collect();
    let mut sup: Vec<f64> = off.to_vec();
    sup.push(0.0);
    let shifted: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut v = vec![1.0; n];
    for it in 0..50 {
        let mut w = solve_tridiagonal(&sub, &shifted, &sup, &v)?;
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonConvergence("inverse iteration".into()));
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let change: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if it > 0 && change < 1e-12 {
            break;
        }
    }
    // canonical sign: largest component positive
    let imax = (0..n)
        .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
        .unwrap_or(0);
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok((lambda, v))
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_and_hermite() {
        let v = gauss_legendre(|x| x.exp(), 0.0, 1.0);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-15);
        let f = |x: f64| [x.sin(), x.cos(), -x.sin()];
        let (a, h) = (0.3, 0.1);
        let y = hermite5(0.37, h, f(a), f(a + h));
        assert!((y - (a + 0.37 * h).sin()).abs() < 1e-10);
    }

    #[test]
    fn cumulative_matrix_integrates_polynomials() {
        let s = gl8_cumulative();
        for (j, row) in s.iter().enumerate() {
            let x = GL8[j].0;
            let v: f64 = row.iter().zip(GL8.iter()).map(|(w, (xl, _))| w * xl.powi(5)).sum();
            assert!((v - (x.powi(6) - 1.0) / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tridiagonal_eigen() {
        // -u'' on (0,1) with Dirichlet ends: smallest eigenvalue ~ pi^2
        let n = 400;
        let h = 1.0 / (n + 1) as f64;
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let (l, v) = smallest_symmetric_tridiagonal(&diag, &off).unwrap();
        let exact = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        assert!((l - exact).abs() < 1e-8 * exact, "{l} {exact}");
        assert!(v.iter().all(|&x| x > 0.0));
        let x = solve_tridiagonal(&[0.0, 1.0, 1.0], &[4.0, 4.0, 4.0], &[1.0, 1.0, 0.0], &[5.0, 6.0, 5.0])
            .unwrap();
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-14);
        }
    }
}
