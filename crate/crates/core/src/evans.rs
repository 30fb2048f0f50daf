//! Principal eigenvalue `s(eps, k)` of the full linear problem
//!
//! `-p u'' + (c - 2p'/(m-2)) u' + (k^2 p^(m/(m-2)) - p'' - G'(p)) u = s u`
//!
//! from a maximal-decay branch launched on the cold side and a stable branch
//! launched on the burned side, matched in `zeta = x/delta` through the
//! determinant of their unit directions.

use rayon::prelude::*;

use crate::coldzone::{characteristic_rates, exit_conditions};
use crate::error::{Error, Result};
use crate::hotzone::{principal_sigma, HotProblem};
use crate::model::{regime_contains, ModelParams};
use crate::ode::{Control, Dopri5};
use crate::wave::{WaveSolution, T_START};

/// Coordinate in which a branch direction is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    /// `t = ln((p - eps)/eps)`, derivative `dv/dt`.
    Layer,
    /// `x`, derivative `dv/dx`.
    X,
    /// `zeta = x/delta`, derivative `dv/dzeta`.
    Zeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchState {
    pub position: f64,
    /// Unit vector `(v, v')`.
    pub direction: [f64; 2],
    /// Accumulated `ln |(v, v')|` dropped by renormalization.
    pub log_mag: f64,
    pub coordinate: Coordinate,
}

impl BranchState {
    fn new(position: f64, y: [f64; 2], log_mag: f64, coordinate: Coordinate) -> Self {
        let n = y[0].hypot(y[1]);
        BranchState {
            position,
            direction: [y[0] / n, y[1] / n],
            log_mag: log_mag + n.ln(),
            coordinate,
        }
    }

    /// Re-expresses the derivative component after `d/dnew = factor d/dold`.
    fn convert(&self, position: f64, factor: f64, coordinate: Coordinate) -> Self {
        Self::new(
            position,
            [self.direction[0], self.direction[1] * factor],
            self.log_mag,
            coordinate,
        )
    }
}

/// How the cold side of the left branch is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftMode {
    /// Integrate the full equation from the maximal-decay launch.
    Integrate,
    /// Start at `x_eps` from the three-term cold-zone expansion.
    Expansion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvansEvaluation {
    pub epsilon: f64,
    pub delta: f64,
    pub sigma: f64,
    /// `det[Y_l, Y_r]` of the unit directions at `zeta0`.
    pub e: f64,
    pub zeta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub epsilon: f64,
    pub k: f64,
    pub delta: f64,
    pub sigma_bar: f64,
    pub s: f64,
    /// `s / k^(1 - 1/(m-1)) = (m-2) c_eps sigma_bar`.
    pub gamma_estimate: f64,
    /// Centered difference of `E` in `sigma` at the root.
    pub simplicity: f64,
}

/// Everything the branch integrations share for one `(eps, k)`.
#[derive(Debug, Clone)]
pub struct EvansSetup<'a> {
    pub wave: &'a WaveSolution,
    pub params: ModelParams,
    pub k: f64,
    pub delta: f64,
    /// Principal eigenvalue of the asymptotic problem.
    pub sigma0: f64,
    pub zeta0: f64,
    pub mode: LeftMode,
}

/// Options for [`solve_s`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Bisection width in `sigma`.
    pub tol: f64,
    /// Scan window `[lo sigma0, hi sigma0]`.
    pub window: (f64, f64),
    pub scan_points: usize,
    /// Reject points outside the frequency regime.
    pub enforce_regime: bool,
    pub mode: LeftMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            window: (0.25, 4.0),
            scan_points: 16,
            enforce_regime: true,
            mode: LeftMode::Integrate,
        }
    }
}

fn ode() -> Dopri5 {
    Dopri5::with_tol(1e-10, 1e-12)
}

/// Principal eigenvalue of the asymptotic problem attached to `c0`.
pub fn hot_sigma0(m: f64, c0: f64) -> Result<f64> {
    Ok(principal_sigma(&HotProblem::from_speed(m, c0)?, 1e-10)?.sigma0)
}

impl<'a> EvansSetup<'a> {
    pub fn new(wave: &'a WaveSolution, params: &ModelParams, k: f64) -> Result<Self> {
        let sigma0 = hot_sigma0(params.m, wave.c0)?;
        Self::with_sigma0(wave, params, k, sigma0)
    }

    pub fn with_sigma0(wave: &'a WaveSolution, params: &ModelParams, k: f64, sigma0: f64) -> Result<Self> {
        if wave.epsilon <= 0.0 || !(k > 0.0) {
            return Err(Error::Parameter(format!("need eps > 0 and k > 0, got {}, {k}", wave.epsilon)));
        }
        let hot = HotProblem::from_speed(params.m, wave.c0)?;
        Ok(EvansSetup {
            wave,
            params: *params,
            k,
            delta: params.delta_of_k(k),
            sigma0,
            zeta0: hot.matching_point(sigma0),
            mode: LeftMode::Integrate,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.wave.epsilon
    }

    /// `s = (m-2) c_eps sigma / delta`.
    pub fn s_of_sigma(&self, sigma: f64) -> f64 {
        (self.params.m - 2.0) * self.wave.c * sigma / self.delta
    }

    fn zeta_rhs(&self, s: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let (m, c, k, d) = (self.params.m, self.wave.c, self.k, self.delta);
        let em = m / (m - 2.0);
        move |z, y| {
            let pt = self.wave.eval(z * d);
            let drift = c - 2.0 * pt.dp / (m - 2.0);
            let pot = k * k * pt.p.powf(em) - pt.ddp - pt.dg - s;
            [y[1], d * d / pt.p * (drift * y[1] / d + pot * y[0])]
        }
    }

    fn layer_rhs(&self, s: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let (m, eps, c, k) = (self.params.m, self.wave.epsilon, self.wave.c, self.k);
        let em = m / (m - 2.0);
        move |t, y| {
            let lp = self.wave.layer_at(t);
            let p = eps * lp.q;
            let d = lp.dx_dt;
            let drift = c - 2.0 * lp.dq / (m - 2.0);
            let pot = k * k * p.powf(em) - lp.ddq / eps - s;
            [y[1], (lp.dx_dt_log + d / p * drift) * y[1] + d * d / p * pot * y[0]]
        }
    }
}

/// Integrates with per-step renormalization, recording samples if asked.
fn projective<F: Fn(f64, &[f64; 2]) -> [f64; 2]>(
    f: &F,
    start: BranchState,
    end: f64,
    coordinate: Coordinate,
    mut record: Option<&mut Vec<(f64, f64, f64)>>,
) -> Result<BranchState> {
    let mut log_mag = start.log_mag;
    if let Some(r) = record.as_deref_mut() {
        r.push((start.position, start.direction[0], log_mag));
    }
    let (x, y) = ode().integrate(f, start.position, start.direction, end, |x, y| {
        let n = y[0].hypot(y[1]);
        y[0] /= n;
        y[1] /= n;
        log_mag += n.ln();
        if let Some(r) = record.as_deref_mut() {
            r.push((x, y[0], log_mag));
        }
        Control::Continue
    })?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            at: x,
            reason: "branch overflow".into(),
        });
    }
    Ok(BranchState::new(x, y, log_mag, coordinate))
}

/// Samples `(zeta, v direction component, log magnitude)` along a branch.
type Trace = Vec<(f64, f64, f64)>;

fn left_branch_traced(setup: &EvansSetup, sigma: f64, mut trace: Option<&mut Trace>) -> Result<BranchState> {
    let wave = setup.wave;
    let eps = wave.epsilon;
    let s = setup.s_of_sigma(sigma);
    let x_eps = wave.landmarks().x_eps;
    let zeta_eps = x_eps / setup.delta;
    if !(zeta_eps < setup.zeta0) {
        return Err(Error::Regime { epsilon: eps, k: setup.k });
    }
    let at_eps = match setup.mode {
        LeftMode::Integrate => {
            let t_eps = wave.t_of_x(x_eps)?;
            let launch = launch_direction(setup, s)?;
            let d0 = wave.layer_at(T_START).dx_dt;
            let start = BranchState::new(T_START, [launch[0], launch[1] * d0], 0.0, Coordinate::Layer);
            let mut layer_trace = Vec::new();
            let end = projective(
                &setup.layer_rhs(s),
                start,
                t_eps,
                Coordinate::Layer,
                trace.as_ref().map(|_| &mut layer_trace),
            )?;
            if let Some(tr) = trace.as_deref_mut() {
                for (t, v, l) in layer_trace {
                    tr.push((wave.x_of_t(t) / setup.delta, v, l));
                }
                tr.pop();
            }
            let d = wave.layer_at(t_eps).dx_dt;
            end.convert(zeta_eps, setup.delta / d, Coordinate::Zeta)
        }
        LeftMode::Expansion => {
            let (v, slope) = exit_conditions(s, setup.k, wave, &setup.params)?;
            BranchState::new(zeta_eps, [v, slope * setup.delta / eps], 0.0, Coordinate::Zeta)
        }
    };
    projective(&setup.zeta_rhs(s), at_eps, setup.zeta0, Coordinate::Zeta, trace)
}

/// Unit launch direction `(1, r+)` in `x` units at the maximal-decay rate.
pub fn launch_direction(setup: &EvansSetup, s: f64) -> Result<[f64; 2]> {
    let w = setup.wave;
    let (_, rp) = characteristic_rates(w.epsilon, setup.k, s, w.c, setup.params.m)?;
    let n = 1.0f64.hypot(rp);
    Ok([1.0 / n, rp / n])
}

/// Slope `v_xi / v` of the integrated maximal-decay branch at `x_eps`, in
/// layer units `xi = x/eps`; the exact counterpart of the expansion slope.
pub fn integrated_exit_slope(setup: &EvansSetup, sigma: f64) -> Result<f64> {
    let wave = setup.wave;
    let s = setup.s_of_sigma(sigma);
    let t_eps = wave.t_of_x(wave.landmarks().x_eps)?;
    let launch = launch_direction(setup, s)?;
    let d0 = wave.layer_at(T_START).dx_dt;
    let start = BranchState::new(T_START, [launch[0], launch[1] * d0], 0.0, Coordinate::Layer);
    let end = projective(&setup.layer_rhs(s), start, t_eps, Coordinate::Layer, None)?;
    let d = wave.layer_at(t_eps).dx_dt;
    Ok(wave.epsilon * end.direction[1] / (d * end.direction[0]))
}

/// Maximal-decay branch carried to `zeta0`.
pub fn left_branch(setup: &EvansSetup, sigma: f64) -> Result<BranchState> {
    left_branch_traced(setup, sigma, None)
}

/// Stable rate `r-` of `-r^2 + c r + (k^2 - s - G'(1)) = 0`.
pub fn right_rate(c: f64, k: f64, s: f64, dg1: f64) -> Result<f64> {
    let disc = c * c + 4.0 * (k * k - s - dg1);
    if disc < 0.0 {
        return Err(Error::ComplexRates(disc));
    }
    Ok(0.5 * (c - disc.sqrt()))
}

fn right_branch_traced(setup: &EvansSetup, sigma: f64, trace: Option<&mut Trace>) -> Result<BranchState> {
    let wave = setup.wave;
    let s = setup.s_of_sigma(sigma);
    let dg1 = wave.reaction().at_tail(0.0).1;
    let r = right_rate(wave.c, setup.k, s, dg1)?;
    let zr = wave.x_right() / setup.delta;
    let start = BranchState::new(zr, [1.0, r * setup.delta], 0.0, Coordinate::Zeta);
    projective(&setup.zeta_rhs(s), start, setup.zeta0, Coordinate::Zeta, trace)
}

/// Stable branch from the burned side carried to `zeta0`.
pub fn right_branch(setup: &EvansSetup, sigma: f64) -> Result<BranchState> {
    right_branch_traced(setup, sigma, None)
}

/// Determinant of two unit directions, `a_v b_v' - a_v' b_v`.
pub fn miss_distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Evans function at `sigma`. Both branches keep the orientation of their
/// launch (`v > 0` at the far ends), which makes `E` continuous in `sigma`.
pub fn evans(setup: &EvansSetup, sigma: f64) -> Result<EvansEvaluation> {
    let (l, r) = rayon::join(|| left_branch(setup, sigma), || right_branch(setup, sigma));
    let e = miss_distance(&l?.direction, &r?.direction);
    Ok(EvansEvaluation {
        epsilon: setup.epsilon(),
        delta: setup.delta,
        sigma,
        e,
        zeta0: setup.zeta0,
    })
}

fn evans_value(setup: &EvansSetup, sigma: f64) -> Result<f64> {
    Ok(evans(setup, sigma)?.e)
}

/// Evans root nearest above the bottom of the scan window, bisected to
/// `opts.tol` and polished by one secant step.
pub fn solve_s_with(wave: &WaveSolution, params: &ModelParams, k: f64, sigma0: f64, opts: &SolveOptions) -> Result<DispersionPoint> {
    let eps = wave.epsilon;
    if opts.enforce_regime && !regime_contains(eps, k, params) {
        return Err(Error::Regime { epsilon: eps, k });
    }
    let mut setup = EvansSetup::with_sigma0(wave, params, k, sigma0)?;
    setup.mode = opts.mode;
    let (a, b) = opts.window;
    let n = opts.scan_points.max(2);
    // the maximal-decay rate turns complex beyond s = c^2/(4 eps) + k^2 eps^(m/(m-2))
    let s_cap = wave.c * wave.c / (4.0 * eps) + k * k * eps.powf(params.m / (params.m - 2.0));
    let hi = (b * sigma0).min(0.999 * s_cap / setup.s_of_sigma(1.0));
    let lo = a * sigma0;
    if !(hi > lo) {
        return Err(Error::RootNotFound(format!("empty scan window at eps = {eps}, k = {k}")));
    }
    let grid: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&s| evans_value(&setup, s))
        .collect::<Result<Vec<_>>>()?;
    let i = (0..n - 1)
        .find(|&i| values[i].signum() != values[i + 1].signum())
        .ok_or_else(|| {
            Error::RootNotFound(format!(
                "no sign change of E on [{}, {}] at eps = {eps}, k = {k}",
                grid[0],
                grid[n - 1]
            ))
        })?;
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    let (mut flo, mut fhi) = (values[i], values[i + 1]);
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        let fm = evans_value(&setup, mid)?;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            flo = 0.0;
            fhi = 0.0;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let sigma_bar = if fhi != flo { lo - flo * (hi - lo) / (fhi - flo) } else { 0.5 * (lo + hi) };
    let h = 1e-4 * sigma_bar;
    let (ep, em) = rayon::join(|| evans_value(&setup, sigma_bar + h), || evans_value(&setup, sigma_bar - h));
    let simplicity = (ep? - em?) / (2.0 * h);
    let s = setup.s_of_sigma(sigma_bar);
    Ok(DispersionPoint {
        epsilon: eps,
        k,
        delta: setup.delta,
        sigma_bar,
        s,
        gamma_estimate: (params.m - 2.0) * wave.c * sigma_bar,
        simplicity,
    })
}

/// Principal eigenvalue `s(eps, k)` with default options.
pub fn solve_s(epsilon: f64, k: f64, wave: &WaveSolution, params: &ModelParams, tol: f64) -> Result<DispersionPoint> {
    if (wave.epsilon - epsilon).abs() > 1e-15 * epsilon {
        return Err(Error::Parameter(format!("wave built for eps = {}, not {epsilon}", wave.epsilon)));
    }
    let opts = SolveOptions {
        tol,
        ..SolveOptions::default()
    };
    solve_s_with(wave, params, k, hot_sigma0(params.m, wave.c0)?, &opts)
}

/// True when `E` keeps one sign on `points` samples of `(0, 0.95 sigma_bar]`.
pub fn smallest_eigenvalue_scan_n(point: &DispersionPoint, wave: &WaveSolution, params: &ModelParams, points: usize) -> Result<bool> {
    let setup = EvansSetup::new(wave, params, point.k)?;
    let top = 0.95 * point.sigma_bar;
    let values: Vec<f64> = (1..=points)
        .into_par_iter()
        .map(|i| evans_value(&setup, top * i as f64 / points as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(values.windows(2).all(|w| w[0].signum() == w[1].signum()))
}

pub fn smallest_eigenvalue_scan(point: &DispersionPoint, wave: &WaveSolution, params: &ModelParams) -> Result<bool> {
    smallest_eigenvalue_scan_n(point, wave, params, 50)
}

/// Eigenfunction samples with `u` scaled to unit maximum. The far tails
/// underflow in `u`, so `ln |u|` and the sign are kept as well.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub zeta: Vec<f64>,
    pub u: Vec<f64>,
    pub log_abs_u: Vec<f64>,
    pub sign: Vec<f64>,
}

/// Joins the left branch to the right branch at `zeta0`.
pub fn eigenfunction(point: &DispersionPoint, wave: &WaveSolution, params: &ModelParams) -> Result<Eigenfunction> {
    let setup = EvansSetup::new(wave, params, point.k)?;
    let mut left = Vec::new();
    let mut right = Vec::new();
    let l = left_branch_traced(&setup, point.sigma_bar, Some(&mut left))?;
    let r = right_branch_traced(&setup, point.sigma_bar, Some(&mut right))?;
    // canonical orientation: positive at zeta0 on both sides
    let (sl, sr) = (l.direction[0].signum(), r.direction[0].signum());
    // ln |u| at zeta0 must agree on both sides
    let shift = (l.log_mag + l.direction[0].abs().ln()) - (r.log_mag + r.direction[0].abs().ln());
    let mut pts: Vec<(f64, f64, f64)> = left.iter().map(|&(z, v, lm)| (z, sl * v, lm)).collect();
    pts.pop();
    pts.extend(right.iter().rev().map(|&(z, v, lm)| (z, sr * v, lm + shift)));
    let logs: Vec<f64> = pts.iter().map(|&(_, v, lm)| lm + v.abs().ln()).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_abs_u: Vec<f64> = logs.iter().map(|l| l - top).collect();
    let sign: Vec<f64> = pts.iter().map(|p| if p.1 > 0.0 { 1.0 } else if p.1 < 0.0 { -1.0 } else { 0.0 }).collect();
    Ok(Eigenfunction {
        zeta: pts.iter().map(|p| p.0).collect(),
        u: log_abs_u.iter().zip(&sign).map(|(l, s)| s * l.exp()).collect(),
        log_abs_u,
        sign,
    })
}

/// True when the joined eigenfunction is positive at every sample.
pub fn eigenfunction_positivity(point: &DispersionPoint, wave: &WaveSolution, params: &ModelParams) -> Result<bool> {
    let f = eigenfunction(point, wave, params)?;
    Ok(f.sign.iter().all(|&s| s > 0.0))
}

/// Sweep rows in input order, with the fitted `gamma0` from the last tier.
#[derive(Debug, Clone)]
pub struct DispersionTable {
    pub rows: Vec<std::result::Result<DispersionPoint, Error>>,
    /// Median `gamma_estimate` over the points with the smallest `eps`.
    pub gamma_fit: Option<f64>,
    /// `(m-2) c0 sigma0` from the asymptotic problem.
    pub gamma0: f64,
}

/// Solves every `(eps, k)` in parallel. `waves` holds one profile per
/// distinct `eps`; errors are kept per row.
pub fn dispersion_sweep(points: &[(f64, f64)], waves: &[WaveSolution], params: &ModelParams, opts: &SolveOptions) -> Result<DispersionTable> {
    let c0 = match waves.first() {
        Some(w) => w.c0,
        None => crate::wave::limit_speed(params)?,
    };
    let sigma0 = hot_sigma0(params.m, c0)?;
    let rows: Vec<_> = points
        .par_iter()
        .map(|&(eps, k)| {
            let wave = waves
                .iter()
                .find(|w| w.epsilon == eps)
                .ok_or_else(|| Error::Parameter(format!("no wave for eps = {eps}")))?;
            solve_s_with(wave, &params.with_epsilon(eps), k, sigma0, opts)
        })
        .collect();
    let last = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut tier: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .filter(|p| p.epsilon == last)
        .map(|p| p.gamma_estimate)
        .collect();
    tier.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gamma_fit = match tier.len() {
        0 => None,
        n if n % 2 == 1 => Some(tier[n / 2]),
        n => Some(0.5 * (tier[n / 2 - 1] + tier[n / 2])),
    };
    Ok(DispersionTable {
        rows,
        gamma_fit,
        gamma0: (params.m - 2.0) * c0 * sigma0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::solve_wave;
    use proptest::prelude::*;

    fn m4_wave() -> (WaveSolution, ModelParams) {
        let p = ModelParams::default().with_m(4.0).with_epsilon(1e-3);
        (solve_wave(&p).unwrap(), p)
    }

    #[test]
    fn right_rate_solves_quadratic() {
        let (c, k, s, dg1) = (0.3, 2.0, 0.5, 0.1);
        let r = right_rate(c, k, s, dg1).unwrap();
        assert!((-r * r + c * r + (k * k - s - dg1)).abs() < 1e-14);
        assert!(r < 0.0);
        assert!(matches!(right_rate(0.1, 0.0, 1.0, 0.0), Err(Error::ComplexRates(_))));
    }

    #[test]
    fn burned_state_is_a_stable_zero() {
        let (w, p) = m4_wave();
        let (g, dg) = w.reaction().at_tail(0.0);
        assert_eq!(g, 0.0);
        assert!((dg + p.g0 * (1.0 - p.theta).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn coordinate_conversion_keeps_the_slope() {
        let b = BranchState::new(1.0, [3.0, 4.0], 0.5, Coordinate::X);
        assert!((b.log_mag - (0.5 + 5f64.ln())).abs() < 1e-15);
        let z = b.convert(2.0, 0.25, Coordinate::Zeta);
        let slope = |s: &BranchState| s.direction[1] / s.direction[0];
        assert!((slope(&z) - 0.25 * slope(&b)).abs() < 1e-15);
        assert_eq!(z.coordinate, Coordinate::Zeta);
    }

    #[test]
    fn launch_direction_decays_toward_cold_side() {
        let (w, p) = m4_wave();
        let setup = EvansSetup::new(&w, &p, 30.0).unwrap();
        let s = setup.s_of_sigma(setup.sigma0);
        let d = launch_direction(&setup, s).unwrap();
        let (_, rp) = characteristic_rates(1e-3, 30.0, s, w.c, 4.0).unwrap();
        assert!((d[1] / d[0] - rp).abs() < 1e-12 * rp);
        assert!(d[0] > 0.0 && d[1] > 0.0);
    }

    #[test]
    fn evans_changes_sign_at_root() {
        let (w, p) = m4_wave();
        let opts = SolveOptions {
            enforce_regime: false,
            ..SolveOptions::default()
        };
        let d = solve_s_with(&w, &p, 30.0, hot_sigma0(4.0, w.c0).unwrap(), &opts).unwrap();
        let setup = EvansSetup::new(&w, &p, 30.0).unwrap();
        let lo = evans(&setup, d.sigma_bar * 0.98).unwrap().e;
        let hi = evans(&setup, d.sigma_bar * 1.02).unwrap().e;
        assert!(lo * hi < 0.0);
        assert!(evans(&setup, d.sigma_bar).unwrap().e.abs() < 1e-3 * lo.abs().min(hi.abs()));
    }

    #[test]
    fn regime_is_enforced_by_default() {
        let (w, p) = m4_wave();
        assert!(solve_s(1e-3, 30.0, &w, &p, 1e-8).is_err());
    }

    proptest! {
        #[test]
        fn miss_distance_is_bounded_and_antisymmetric(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let u = [a.cos(), a.sin()];
            let v = [b.cos(), b.sin()];
            let e = miss_distance(&u, &v);
            prop_assert!(e.abs() <= 1.0 + 1e-15);
            prop_assert!((e + miss_distance(&v, &u)).abs() < 1e-15);
            prop_assert!(miss_distance(&u, &u).abs() < 1e-15);
        }
    }
}
