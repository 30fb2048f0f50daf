//! Brute-force cross-checks: finite-difference eigensolves for the asymptotic
//! and full linear problems, implicit time marching of the linearized mode,
//! and a front-speed measurement on the planar nonlinear equation.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{ls_slope, smallest_symmetric_tridiagonal, solve_tridiagonal};
use crate::wave::WaveSolution;

/// Cell-centered uniform grid on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
}

impl FdGrid {
    pub fn cell_centered(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 100 || !(b > a) {
            return Err(Error::Parameter(format!("grid needs n >= 100 and b > a, got n = {n}, [{a}, {b}]")));
        }
        let h = (b - a) / n as f64;
        Ok(FdGrid {
            a,
            b,
            n,
            h,
            nodes: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
        })
    }

    /// Face `i` sits between cells `i - 1` and `i`.
    pub fn face(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }
}

/// Smallest eigenvalue and eigenvector of the asymptotic problem on `[0, L]`
/// in the variable `t = sqrt(zeta)`, where it reads
/// `-(t^beta v_t)_t + 4 b(t^2) t^beta v = 4 sigma t^beta v`, `beta = 2/(m-2) - 1`.
/// Flux-zero at `t = 0`, `v = 0` at `t = sqrt(L)`. The vector is returned in
/// `v` units at the cell centers, positive.
pub fn fd_hotzone_eigen(m: f64, big_b: f64, l: f64, n: usize) -> Result<(f64, FdGrid, Vec<f64>)> {
    if !(m > 2.0 && big_b > 0.0 && l > 0.0) {
        return Err(Error::Parameter(format!("need m > 2, B > 0, L > 0; got {m}, {big_b}, {l}")));
    }
    let grid = FdGrid::cell_centered(0.0, l.sqrt(), n)?;
    let beta = 2.0 / (m - 2.0) - 1.0;
    let gamma = beta + 2.0 * m / (m - 2.0);
    let h = grid.h;
    let moment = |e: f64, i: usize| (grid.face(i + 1).powf(e + 1.0) - grid.face(i).powf(e + 1.0)) / (e + 1.0);
    let mass: Vec<f64> = (0..n).map(|i| moment(beta, i)).collect();
    let pot: Vec<f64> = (0..n).map(|i| 4.0 * big_b * moment(gamma, i)).collect();
    let flux = |i: usize| grid.face(i).powf(beta) / h;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        let left = if i == 0 { 0.0 } else { flux(i) };
        let right = if i + 1 == n { 2.0 * flux(n) } else { flux(i + 1) };
        diag[i] = (left + right + pot[i]) / mass[i];
        if i + 1 < n {
            off[i] = -flux(i + 1) / (mass[i] * mass[i + 1]).sqrt();
        }
    }
    let (lambda, w) = smallest_symmetric_tridiagonal(&diag, &off)?;
    let v: Vec<f64> = w.iter().zip(&mass).map(|(w, m)| w / m.sqrt()).collect();
    Ok((lambda / 4.0, grid, v))
}

/// `sigma0` estimate of the asymptotic problem on `[0, L]` with `n` cells.
pub fn fd_hotzone_sigma0(m: f64, big_b: f64, l: f64, n: usize) -> Result<f64> {
    if n < 1000 {
        return Err(Error::Parameter(format!("n = {n} below 1000")));
    }
    Ok(fd_hotzone_eigen(m, big_b, l, n)?.0)
}

/// Estimates on `n`, `2n`, `4n` cells with the observed order and the
/// twice-extrapolated value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub values: [f64; 3],
    pub order: f64,
    pub extrapolated: f64,
}

pub fn richardson<F: Fn(usize) -> Result<f64>>(f: F, n: usize) -> Result<Extrapolation> {
    let values = [f(n)?, f(2 * n)?, f(4 * n)?];
    let order = ((values[0] - values[1]) / (values[1] - values[2])).abs().log2();
    let r1 = values[1] + (values[1] - values[0]) / 3.0;
    let r2 = values[2] + (values[2] - values[1]) / 3.0;
    Ok(Extrapolation {
        values,
        order,
        extrapolated: r2 + (r2 - r1) / 15.0,
    })
}

/// Truncated domain of the full linear problem: `t = ln((p - eps)/eps)` from
/// `t_min` on the cold side, and `x` up to `x_max` on the hot side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullDomain {
    pub t_min: f64,
    pub x_max: f64,
}

impl FullDomain {
    /// Cold end at `t = -40`; hot end where the local decay rate
    /// `k p^(1/(m-2))` has accumulated 40, or the resolved end of the profile.
    pub fn auto(wave: &WaveSolution, k: f64) -> Self {
        let x_right = wave.x_right();
        let mut x_max = x_right;
        if k > 0.0 {
            let dx = 1e-3;
            let mut acc = 0.0;
            let mut x = 0.0;
            while x < x_right {
                acc += k * wave.eval(x).p.powf(wave.params.inv_m2()) * dx;
                x += dx;
                if acc > 40.0 {
                    break;
                }
            }
            x_max = x.min(x_right);
        }
        FullDomain { t_min: -40.0, x_max }
    }
}

/// Symmetric tridiagonal form of the full linear operator on a grid uniform
/// in a mapped coordinate `y`: `y = t` on the cold side, then linear in `x`.
#[derive(Debug, Clone)]
pub struct FullOperator {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// `ln` of the mass weight at each node, for mapping back to `u`.
    pub log_mass: Vec<f64>,
}

struct Sample {
    x: f64,
    p: f64,
    dp: f64,
    ddp: f64,
    dg: f64,
    /// `dx/dy`.
    jac: f64,
}

impl FullOperator {
    pub fn build(wave: &WaveSolution, k: f64, domain: FullDomain, n: usize) -> Result<Self> {
        if wave.epsilon <= 0.0 {
            return Err(Error::Parameter("full operator needs epsilon > 0".into()));
        }
        if n < 100 {
            return Err(Error::Parameter(format!("n = {n} below 100")));
        }
        let eps = wave.epsilon;
        let m = wave.m();
        let c = wave.c;
        let t_theta = ((wave.params.theta - eps) / eps).ln();
        // switch point: equal shares of y on both sides
        let share = |t: f64| {
            let lp = wave.layer_at(t);
            (domain.x_max - wave.x_of_t(t)) / lp.dx_dt - (t - domain.t_min)
        };
        let (mut lo, mut hi) = (domain.t_min + 1.0, t_theta);
        if share(hi) > 0.0 {
            lo = hi;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if share(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_s = lo;
        let x_s = wave.x_of_t(t_s);
        let d_s = wave.layer_at(t_s).dx_dt;
        let y_max = t_s + (domain.x_max - x_s) / d_s;
        if !(domain.x_max > x_s) {
            return Err(Error::Parameter(format!("x_max = {} left of the switch point", domain.x_max)));
        }
        let sample = |y: f64| -> Sample {
            if y <= t_s {
                let lp = wave.layer_at(y);
                Sample {
                    x: f64::NAN,
                    p: eps * lp.q,
                    dp: lp.dq,
                    ddp: lp.ddq / eps,
                    dg: 0.0,
                    jac: lp.dx_dt,
                }
            } else {
                let x = x_s + d_s * (y - t_s);
                let pt = wave.eval(x);
                Sample {
                    x,
                    p: pt.p,
                    dp: pt.dp,
                    ddp: pt.ddp,
                    dg: pt.dg,
                    jac: d_s,
                }
            }
        };
        // nodes y_1..y_n interior, Dirichlet at y_0 = t_min and y_{n+1} = y_max
        let h = (y_max - domain.t_min) / (n + 1) as f64;
        let half: Vec<Sample> = (0..=2 * (n + 1)).map(|j| sample(domain.t_min + 0.5 * h * j as f64)).collect();
        // Phi = int c/p dx on the half grid
        let mut phi = vec![0.0; half.len()];
        for j in 1..half.len() {
            let f0 = c * half[j - 1].jac / half[j - 1].p;
            let f1 = c * half[j].jac / half[j].p;
            phi[j] = phi[j - 1] + 0.25 * h * (f0 + f1);
        }
        let e1 = (4.0 - m) / (m - 2.0);
        let e2 = 2.0 / (m - 2.0);
        let em = m / (m - 2.0);
        // ln of the face coefficient P/x_y and of the mass x_y W
        let log_face = |j: usize| e2 * half[j].p.ln() - phi[j] - half[j].jac.ln();
        let log_mass_at = |j: usize| half[j].jac.ln() + e1 * half[j].p.ln() - phi[j];
        let mut y = Vec::with_capacity(n);
        let mut xs = Vec::with_capacity(n);
        let mut ps = Vec::with_capacity(n);
        let mut dps = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n - 1);
        let mut log_mass = Vec::with_capacity(n);
        for i in 1..=n {
            let j = 2 * i;
            let s = &half[j];
            let lm = log_mass_at(j);
            let lf = (log_face(j - 1) - lm).exp() + (log_face(j + 1) - lm).exp();
            let q = k * k * s.p.powf(em) - s.ddp - s.dg;
            diag.push(lf / (h * h) + q);
            if i < n {
                off.push(-(log_face(j + 1) - 0.5 * (lm + log_mass_at(j + 2))).exp() / (h * h));
            }
            y.push(domain.t_min + i as f64 * h);
            xs.push(if s.x.is_nan() { wave.x_of_t(domain.t_min + i as f64 * h) } else { s.x });
            ps.push(s.p);
            dps.push(s.dp);
            log_mass.push(lm);
        }
        Ok(FullOperator {
            y,
            x: xs,
            p: ps,
            dp: dps,
            diag,
            off,
            log_mass,
        })
    }

    /// Converts a symmetrized vector to `u`, scaled to unit maximum.
    pub fn to_u(&self, w: &[f64]) -> Vec<f64> {
        let lm0 = self.log_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let u: Vec<f64> = w
            .iter()
            .zip(&self.log_mass)
            .map(|(w, lm)| w * (-0.5 * (lm - lm0)).exp())
            .collect();
        let top = u.iter().fold(0.0f64, |a, b| if b.abs() > a.abs() { *b } else { a });
        u.iter().map(|v| v / top).collect()
    }
}

/// Smallest eigenvalue of the truncated full linear problem with `n` nodes.
pub fn fd_full_smallest(epsilon: f64, k: f64, wave: &WaveSolution, domain: FullDomain, n: usize) -> Result<f64> {
    if (wave.epsilon - epsilon).abs() > 1e-15 * epsilon {
        return Err(Error::Parameter(format!("wave built for eps = {}, not {epsilon}", wave.epsilon)));
    }
    let op = FullOperator::build(wave, k, domain, n)?;
    Ok(smallest_symmetric_tridiagonal(&op.diag, &op.off)?.0)
}

/// Decay rate of the `k`-th Fourier mode under implicit Euler time marching,
/// fitted over the second half of `[0, t_end]`. The datum is `p'` on the cold
/// side, damped by `exp(-x/delta)` on the hot side.
pub fn relaxation_rate(epsilon: f64, k: f64, wave: &WaveSolution, t_end: f64) -> Result<f64> {
    relaxation_rate_on(epsilon, k, wave, t_end, FullDomain::auto(wave, k), 20000, 4000)
}

pub fn relaxation_rate_on(
    epsilon: f64,
    k: f64,
    wave: &WaveSolution,
    t_end: f64,
    domain: FullDomain,
    n: usize,
    steps: usize,
) -> Result<f64> {
    if (wave.epsilon - epsilon).abs() > 1e-15 * epsilon || !(t_end > 0.0) {
        return Err(Error::Parameter("relaxation needs a matching wave and t_end > 0".into()));
    }
    let op = FullOperator::build(wave, k, domain, n)?;
    let delta = if k > 0.0 { wave.params.delta_of_k(k) } else { f64::INFINITY };
    let lm0 = op.log_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = (0..n)
        .map(|i| {
            let damp = if op.x[i] > 0.0 { (-op.x[i] / delta).exp() } else { 1.0 };
            op.dp[i] * damp * (0.5 * (op.log_mass[i] - lm0)).exp()
        })
        .collect();
    let dt = t_end / steps as f64;
    let sub: Vec<f64> = std::iter::once(0.0).chain(op.off.iter().map(|o| dt * o)).collect();
    let mut sup: Vec<f64> = op.off.iter().map(|o| dt * o).collect();
    sup.push(0.0);
    let diag: Vec<f64> = op.diag.iter().map(|d| 1.0 + dt * d).collect();
    let mut times = Vec::new();
    let mut logs = Vec::new();
    let mut log_scale = 0.0;
    for step in 1..=steps {
        w = solve_tridiagonal(&sub, &diag, &sup, &w)?;
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        w.iter_mut().for_each(|v| *v /= norm);
        log_scale += norm.ln();
        if 2 * step >= steps {
            times.push(step as f64 * dt);
            logs.push(log_scale);
        }
    }
    let diffs: Vec<f64> = logs.windows(2).map(|p| p[1] - p[0]).collect();
    let tol = 1e-12;
    let dec = diffs.iter().all(|d| *d <= tol);
    let inc = diffs.iter().all(|d| *d >= -tol);
    if !(dec || inc) {
        return Err(Error::Inconclusive(t_end));
    }
    let r = -ls_slope(&times, &logs);
    Ok((r * dt).exp_m1() / dt)
}

/// Planar front speed of the nonlinear equation
/// `mu_t + c_f mu_x = mu mu_xx + mu_x^2/(m-2) + G(mu)`.
#[derive(Debug, Clone)]
pub struct FrontRun {
    /// Measured speed `c_f - dX/dt` of the `theta` level set.
    pub speed: f64,
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    /// Final position of the `theta` level set.
    pub x_theta: f64,
}

/// Options for [`nonlinear_front`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontOptions {
    /// Width of the initial `tanh` step.
    pub width: f64,
    /// Finest spacing, used around the front foot.
    pub h_fine: f64,
    pub dt: f64,
}

impl Default for FrontOptions {
    fn default() -> Self {
        FrontOptions {
            width: 1.0,
            h_fine: 5e-4,
            dt: 0.02,
        }
    }
}

fn graded_grid(x_min: f64, x_max: f64, fine_lo: f64, fine_hi: f64, h_fine: f64, h_max: f64) -> Vec<f64> {
    let mut right = vec![fine_lo];
    let mut h = h_fine;
    let mut x = fine_lo;
    while x < x_max {
        let step = if x < fine_hi { h_fine } else {
            h = (h * 1.02).min(h_max);
            h
        };
        x = (x + step).min(x_max);
        right.push(x);
    }
    let mut left = Vec::new();
    let mut h = h_fine;
    let mut x = fine_lo;
    while x > x_min {
        h = (h * 1.02).min(h_max);
        x = (x - h).max(x_min);
        left.push(x);
    }
    left.reverse();
    left.extend(right);
    left
}

fn march(params: &ModelParams, c_f: f64, x: &[f64], mu: &mut [f64], t_end: f64, dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let reaction = params.reaction();
    let (eps, theta) = (params.epsilon, params.theta);
    let a = params.inv_m2();
    let n = x.len();
    let steps = (t_end / dt).round() as usize;
    let mut times = Vec::new();
    let mut fronts = Vec::new();
    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for step in 1..=steps {
        diag[0] = 1.0;
        sup[0] = 0.0;
        rhs[0] = eps;
        diag[n - 1] = 1.0;
        sub[n - 1] = 0.0;
        rhs[n - 1] = 1.0;
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            let dxx_l = 2.0 / (hl * (hl + hr));
            let dxx_r = 2.0 / (hr * (hl + hr));
            let grad = (mu[i + 1] - mu[i - 1]) / (hl + hr);
            let vel = a * grad - c_f;
            let (dl, dr) = (-1.0 / (hl + hr), 1.0 / (hl + hr));
            sub[i] = -dt * (mu[i] * dxx_l + vel * dl);
            sup[i] = -dt * (mu[i] * dxx_r + vel * dr);
            diag[i] = 1.0 + dt * mu[i] * (dxx_l + dxx_r);
            rhs[i] = mu[i] + dt * reaction.value(mu[i].clamp(0.0, 1.0));
        }
        let next = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        mu.copy_from_slice(&next);
        let i = mu.iter().position(|&v| v >= theta).ok_or_else(|| Error::Integration {
            at: step as f64 * dt,
            reason: "front left the domain".into(),
        })?;
        if i == 0 || i + 2 >= n {
            return Err(Error::Integration {
                at: step as f64 * dt,
                reason: "front left the domain".into(),
            });
        }
        let xf = x[i - 1] + (theta - mu[i - 1]) / (mu[i] - mu[i - 1]) * (x[i] - x[i - 1]);
        times.push(step as f64 * dt);
        fronts.push(xf);
    }
    Ok((times, fronts))
}

/// Measures the planar front speed from a smoothed step, in two passes: a
/// rest-frame pass for a rough speed and a co-moving pass on a graded grid.
pub fn nonlinear_front(params: &ModelParams, t_end: f64, opts: FrontOptions) -> Result<FrontRun> {
    params.validate()?;
    let eps = params.epsilon;
    let step = |x: f64, x0: f64| eps + (1.0 - eps) * 0.5 * (1.0 + ((x - x0) / opts.width).tanh());
    // rough pass
    let x1 = graded_grid(-30.0, 30.0, -30.0, 30.0, 0.01, 0.05);
    let mut mu1: Vec<f64> = x1.iter().map(|&x| step(x, 0.0)).collect();
    let (t1, f1) = march(params, 0.0, &x1, &mut mu1, 40.0, opts.dt)?;
    let half = t1.len() / 2;
    let c1 = -ls_slope(&t1[half..], &f1[half..]);
    if !(c1 > 0.0) {
        return Err(Error::NonConvergence(format!("rough front speed {c1}")));
    }
    // co-moving pass: the foot sits about theta/((m-2)c) left of the level set
    let lead = params.theta / ((params.m - 2.0) * c1);
    let x2 = graded_grid(-lead - 8.0, 50.0, -lead - 1.5, -lead + 1.5, opts.h_fine, 0.02);
    let mut mu2: Vec<f64> = x2.iter().map(|&x| step(x, 0.0)).collect();
    let (t2, f2) = march(params, c1, &x2, &mut mu2, t_end, opts.dt)?;
    let half = t2.len() / 2;
    let drift = ls_slope(&t2[half..], &f2[half..]);
    Ok(FrontRun {
        speed: c1 - drift,
        x: x2,
        mu: mu2,
        x_theta: *f2.last().unwrap(),
    })
}

/// Asymptotic speed of the `theta` level set.
pub fn nonlinear_front_speed(epsilon: f64, params: &ModelParams, t_end: f64) -> Result<f64> {
    Ok(nonlinear_front(&params.with_epsilon(epsilon), t_end, FrontOptions::default())?.speed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = FdGrid::cell_centered(0.0, 1.0, 100).unwrap();
        assert_eq!(g.nodes.len(), 100);
        assert!((g.nodes[0] - 0.005).abs() < 1e-15);
        assert!(FdGrid::cell_centered(0.0, 1.0, 99).is_err());
        assert!(fd_hotzone_sigma0(3.5, 1.0, 30.0, 500).is_err());
    }

    #[test]
    fn hotzone_fd_converges_at_second_order() {
        let ex = richardson(|n| fd_hotzone_sigma0(4.0, 1.0, 30.0, n), 1000).unwrap();
        assert!((ex.order - 2.0).abs() < 0.3, "{ex:?}");
        let (_, _, v) = fd_hotzone_eigen(4.0, 1.0, 30.0, 1000).unwrap();
        assert!(v.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn graded_grid_is_monotone() {
        let g = graded_grid(-10.0, 20.0, -2.0, 1.0, 1e-3, 0.05);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g[0], -10.0);
        assert_eq!(*g.last().unwrap(), 20.0);
    }
}
