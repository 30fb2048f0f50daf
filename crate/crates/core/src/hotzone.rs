//! Asymptotic eigenproblem of the linear zone,
//!
//! `-zeta v'' - v'/(m-2) + b(zeta) v = sigma v`, `b = B zeta^(m/(m-2))`,
//!
//! with `C^1` regularity at `zeta = 0` and decay at infinity. Regular
//! solutions are launched from a power series at `zeta_bar`, carried across
//! the singular region in `ln zeta` and then integrated in `zeta`.

use crate::error::{Error, Result};
use crate::ode::{Control, Dopri5};

/// Default launch point of the regular solution.
pub const ZETA_BAR: f64 = 1e-6;
/// Default number of series terms.
pub const N_TERMS: usize = 20;
/// End of the logarithmic integration region.
const ZETA_LOG: f64 = 1e-2;
/// Normalized miss distance below which a solution is declared decaying.
const DECAY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HotProblem {
    pub m: f64,
    /// `B = ((m-2) c0)^(2/(m-2))`.
    pub big_b: f64,
    /// Limit speed, when the problem comes from a wave.
    pub c0: Option<f64>,
}

/// Behaviour of a regular solution at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    BlowUpPlus,
    Decay,
    BlowUpMinus,
}

#[derive(Debug, Clone)]
pub struct HotSolution {
    pub sigma: f64,
    pub zeta: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub fate: Fate,
    /// Smallest positive zero, if any.
    pub first_zero: Option<f64>,
}

/// Principal eigenvalue of the asymptotic problem.
#[derive(Debug, Clone)]
pub struct PrincipalEigen {
    pub sigma0: f64,
    /// `(m-2) c0 sigma0`, when `c0` is known.
    pub gamma0: Option<f64>,
    pub eigenfunction: HotSolution,
}

impl HotProblem {
    pub fn new(m: f64, big_b: f64) -> Result<Self> {
        if !(m > 2.0) || !(big_b > 0.0) {
            return Err(Error::Parameter(format!("need m > 2 and B > 0, got m = {m}, B = {big_b}")));
        }
        Ok(HotProblem { m, big_b, c0: None })
    }

    /// Problem attached to a wave of limit speed `c0`.
    pub fn from_speed(m: f64, c0: f64) -> Result<Self> {
        let mut p = Self::new(m, ((m - 2.0) * c0).powf(2.0 / (m - 2.0)))?;
        p.c0 = Some(c0);
        Ok(p)
    }

    fn alpha(&self) -> f64 {
        1.0 / (self.m - 2.0)
    }

    pub fn b(&self, zeta: f64) -> f64 {
        self.big_b * zeta.powf(self.m / (self.m - 2.0))
    }

    /// First point where `b = sigma`.
    pub fn zeta_sigma(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            0.0
        } else {
            (sigma / self.big_b).powf((self.m - 2.0) / self.m)
        }
    }

    /// Natural length `B^(-(m-2)/(2(m-1)))` of the problem.
    pub fn length_scale(&self) -> f64 {
        self.big_b.powf(-(self.m - 2.0) / (2.0 * (self.m - 1.0)))
    }

    /// Leading WKB decay rate `sqrt(B) zeta^(1/(m-2))`.
    pub fn wkb_rate(&self, zeta: f64) -> f64 {
        self.big_b.sqrt() * zeta.powf(self.alpha())
    }

    /// `int_0^zeta sqrt(B) t^(1/(m-2)) dt`.
    pub fn wkb_integral(&self, zeta: f64) -> f64 {
        let a = self.alpha();
        self.big_b.sqrt() * zeta.powf(1.0 + a) / (1.0 + a)
    }

    /// Abscissa where the WKB integral reaches `level`, at least `4 max(1, zeta_sigma)`.
    pub fn default_zeta_max(&self, sigma: f64, level: f64) -> f64 {
        let a = self.alpha();
        let z = (level * (1.0 + a) / self.big_b.sqrt()).powf(1.0 / (1.0 + a));
        z.max(4.0 * self.zeta_sigma(sigma).max(1.0))
    }

    /// Matching abscissa `2 max(1, zeta_sigma)`.
    pub fn matching_point(&self, sigma: f64) -> f64 {
        2.0 * self.zeta_sigma(sigma).max(1.0)
    }

    fn rhs(&self, sigma: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let a = self.alpha();
        move |z, y| [y[1], ((self.b(z) - sigma) * y[0] - a * y[1]) / z]
    }

    fn rhs_log(&self, sigma: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let a = self.alpha();
        move |tau, y| {
            let z = tau.exp();
            [z * y[1], (self.b(z) - sigma) * y[0] - a * y[1]]
        }
    }
}

/// Regular solution and its derivative at `zeta_bar` from the series
/// `sum a_n zeta^n` of `zeta w'' + w'/(m-2) + sigma w = 0` plus the first
/// correction `d zeta^p` from `b`.
pub fn series_launch(sigma: f64, zeta_bar: f64, m: f64, big_b: f64, n_terms: usize) -> Result<(f64, f64)> {
    if !(zeta_bar > 0.0 && zeta_bar <= 1e-3) {
        return Err(Error::Parameter(format!("launch point {zeta_bar} outside (0, 1e-3]")));
    }
    if n_terms < 5 {
        return Err(Error::Truncation(format!("{n_terms} series terms, need at least 5")));
    }
    let a = 1.0 / (m - 2.0);
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut v = 1.0;
    let mut dv = 0.0;
    let mut last = 0.0;
    for n in 0..n_terms {
        let nf = n as f64;
        coef *= -sigma / ((nf + 1.0) * (nf + a));
        dv += coef * (nf + 1.0) * pow;
        pow *= zeta_bar;
        last = coef * pow;
        v += last;
    }
    if last.abs() > 1e-14 * v.abs().max(1e-300) && last != 0.0 {
        return Err(Error::Truncation(format!(
            "last series term {last:e} at zeta = {zeta_bar:e}"
        )));
    }
    let p = 1.0 + m / (m - 2.0);
    let d = big_b / (p * (p - 1.0 + a));
    v += d * zeta_bar.powf(p);
    dv += d * p * zeta_bar.powf(p - 1.0);
    Ok((v, dv))
}

/// Series coefficients `a_0 .. a_n` of the `b`-free regular solution.
pub fn series_coefficients(sigma: f64, m: f64, n: usize) -> Vec<f64> {
    let a = 1.0 / (m - 2.0);
    let mut out = vec![1.0];
    for k in 0..n {
        let kf = k as f64;
        let next = -sigma * out[k] / ((kf + 1.0) * (kf + a));
        out.push(next);
    }
    out
}

fn ode() -> Dopri5 {
    Dopri5::with_tol(1e-10, 1e-14)
}

/// Regular solution from the launch point up to `zeta_end`, with the observer
/// called on every accepted step in `zeta`. Returns the final state.
fn regular_solution<O>(problem: &HotProblem, sigma: f64, zeta_end: f64, mut observer: O) -> Result<(f64, [f64; 2])>
where
    O: FnMut(f64, &[f64; 2]) -> Control,
{
    let y0 = {
        let (v, dv) = series_launch(sigma, ZETA_BAR, problem.m, problem.big_b, N_TERMS)?;
        [v, dv]
    };
    if observer(ZETA_BAR, &y0) == Control::Stop {
        return Ok((ZETA_BAR, y0));
    }
    let ode = ode();
    let mut stopped = false;
    let (tau, y) = ode.integrate(
        &problem.rhs_log(sigma),
        ZETA_BAR.ln(),
        y0,
        ZETA_LOG.min(zeta_end).ln(),
        |tau, y| {
            if observer(tau.exp(), y) == Control::Stop {
                stopped = true;
                Control::Stop
            } else {
                Control::Continue
            }
        },
    )?;
    if stopped || zeta_end <= ZETA_LOG {
        return Ok((tau.exp(), y));
    }
    ode.integrate(&problem.rhs(sigma), ZETA_LOG, y, zeta_end, |z, y| observer(z, y))
}

/// Values `(v, v')` of the regular solution at increasing abscissas.
pub fn regular_at(problem: &HotProblem, sigma: f64, points: &[f64]) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::with_capacity(points.len());
    let ode = ode();
    let mut z = ZETA_BAR;
    let (v, dv) = series_launch(sigma, ZETA_BAR, problem.m, problem.big_b, N_TERMS)?;
    let mut y = [v, dv];
    for &p in points {
        if p <= ZETA_BAR {
            let (v, dv) = series_launch(sigma, p.max(1e-300).min(ZETA_BAR), problem.m, problem.big_b, N_TERMS)
                .unwrap_or((1.0, -(problem.m - 2.0) * sigma));
            out.push(if p <= 0.0 { [1.0, -(problem.m - 2.0) * sigma] } else { [v, dv] });
            continue;
        }
        if z < ZETA_LOG {
            let end = p.min(ZETA_LOG);
            y = ode
                .integrate(&problem.rhs_log(sigma), z.ln(), y, end.ln(), |_, _| Control::Continue)?
                .1;
            z = end;
        }
        if p > z {
            y = ode.integrate(&problem.rhs(sigma), z, y, p, |_, _| Control::Continue)?.1;
            z = p;
        }
        out.push(y);
    }
    Ok(out)
}

/// Stable solution on `[zeta0, zeta_max]` normalized by `v(zeta0) = 1`,
/// integrated backward from a WKB launch at `zeta_max`. Samples ascend in zeta.
pub fn stable_right_branch(sigma: f64, zeta0: f64, problem: &HotProblem, zeta_max: f64) -> Result<HotSolution> {
    if !(zeta0 > 0.0 && zeta_max > zeta0) {
        return Err(Error::Parameter(format!("need 0 < zeta0 < zeta_max, got {zeta0}, {zeta_max}")));
    }
    let slope = -((problem.b(zeta_max) - sigma).max(0.0) / zeta_max).sqrt();
    let norm = (1.0 + slope * slope).sqrt();
    let mut samples = vec![(zeta_max, [1.0 / norm, slope / norm], 0.0)];
    let mut log_mag = 0.0;
    ode().integrate(&problem.rhs(sigma), zeta_max, samples[0].1, zeta0, |z, y| {
        let n = (y[0] * y[0] + y[1] * y[1]).sqrt();
        y[0] /= n;
        y[1] /= n;
        log_mag += n.ln();
        samples.push((z, *y, log_mag));
        Control::Continue
    })?;
    let (_, y0, l0) = *samples.last().unwrap();
    let v0 = y0[0];
    let mut zeta = Vec::with_capacity(samples.len());
    let mut v = Vec::with_capacity(samples.len());
    let mut dv = Vec::with_capacity(samples.len());
    for &(z, y, l) in samples.iter().rev() {
        let scale = (l - l0).exp() / v0;
        zeta.push(z);
        v.push(y[0] * scale);
        dv.push(y[1] * scale);
    }
    v[0] = 1.0;
    Ok(HotSolution {
        sigma,
        zeta,
        v,
        dv,
        fate: Fate::Decay,
        first_zero: None,
    })
}

/// Normalized determinant of `(v, v')` against the stable direction at `zeta_m`.
fn miss_distance(y: &[f64; 2], stable: &HotSolution) -> f64 {
    let (vs, dvs) = (stable.v[0], stable.dv[0]);
    (y[0] * dvs - y[1] * vs) / ((y[0].hypot(y[1])) * vs.hypot(dvs))
}

/// Integrates the regular solution for `sigma` and classifies its fate.
pub fn integrate_and_classify(sigma: f64, problem: &HotProblem, zeta_max: f64) -> Result<HotSolution> {
    let zs = problem.zeta_sigma(sigma);
    if zeta_max < 4.0 * zs.max(1.0) {
        return Err(Error::Parameter(format!(
            "zeta_max = {zeta_max} below 4 max(1, zeta_sigma)"
        )));
    }
    let zm = problem.matching_point(sigma);
    let mut zeta = Vec::new();
    let mut v = Vec::new();
    let mut dv = Vec::new();
    let mut first_zero = None;
    let (_, ym) = regular_solution(problem, sigma, zm, |z, y| {
        if first_zero.is_none() && !v.is_empty() && y[0] <= 0.0 {
            let (z0, v0): (f64, f64) = (*zeta.last().unwrap(), *v.last().unwrap());
            first_zero = Some(z0 + (z - z0) * v0 / (v0 - y[0]));
        }
        zeta.push(z);
        v.push(y[0]);
        dv.push(y[1]);
        Control::Continue
    })?;
    let stable = stable_right_branch(sigma, zm, problem, zeta_max)?;
    let miss = miss_distance(&ym, &stable);
    if miss.abs() < DECAY_TOL {
        let scale = ym[0];
        for i in 1..stable.zeta.len() {
            zeta.push(stable.zeta[i]);
            v.push(stable.v[i] * scale);
            dv.push(stable.dv[i] * scale);
        }
        return Ok(HotSolution {
            sigma,
            zeta,
            v,
            dv,
            fate: Fate::Decay,
            first_zero,
        });
    }
    let mut fate = None;
    ode().integrate(&problem.rhs(sigma), zm, ym, zeta_max, |z, y| {
        if first_zero.is_none() && y[0] <= 0.0 {
            let (z0, v0): (f64, f64) = (*zeta.last().unwrap(), *v.last().unwrap());
            first_zero = Some(z0 + (z - z0) * v0 / (v0 - y[0]));
        }
        zeta.push(z);
        v.push(y[0]);
        dv.push(y[1]);
        if z >= zs {
            if y[0] > 0.0 && y[1] >= 0.0 {
                fate = Some(Fate::BlowUpPlus);
            } else if y[0] < 0.0 && y[1] <= 0.0 {
                fate = Some(Fate::BlowUpMinus);
            }
        }
        if fate.is_some() {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    match fate {
        Some(fate) => Ok(HotSolution {
            sigma,
            zeta,
            v,
            dv,
            fate,
            first_zero,
        }),
        None => Err(Error::Inconclusive(zeta_max)),
    }
}

/// Fate of the regular solution with the default integration length.
pub fn fate(sigma: f64, problem: &HotProblem) -> Result<Fate> {
    Ok(integrate_and_classify(sigma, problem, problem.default_zeta_max(sigma, 60.0))?.fate)
}

/// `sigma0` by bisection on the transition out of `BlowUpPlus`.
pub fn principal_sigma(problem: &HotProblem, tol: f64) -> Result<PrincipalEigen> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while fate(hi, problem)? == Fate::BlowUpPlus {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::RootNotFound("no upper bracket for sigma0".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if fate(mid, problem)? == Fate::BlowUpPlus {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma0 = 0.5 * (lo + hi);
    Ok(PrincipalEigen {
        sigma0,
        gamma0: problem.c0.map(|c0| (problem.m - 2.0) * c0 * sigma0),
        eigenfunction: eigenfunction(sigma0, problem)?,
    })
}

/// Regular solution up to the matching point joined to the stable branch beyond.
pub fn eigenfunction(sigma: f64, problem: &HotProblem) -> Result<HotSolution> {
    let zm = problem.matching_point(sigma);
    let mut zeta = Vec::new();
    let mut v = Vec::new();
    let mut dv = Vec::new();
    let (_, ym) = regular_solution(problem, sigma, zm, |z, y| {
        zeta.push(z);
        v.push(y[0]);
        dv.push(y[1]);
        Control::Continue
    })?;
    let stable = stable_right_branch(sigma, zm, problem, problem.default_zeta_max(sigma, 60.0))?;
    for i in 1..stable.zeta.len() {
        zeta.push(stable.zeta[i]);
        v.push(stable.v[i] * ym[0]);
        dv.push(stable.dv[i] * ym[0]);
    }
    let first_zero = zeta.iter().zip(&v).find(|(_, &vv)| vv <= 0.0).map(|(&z, _)| z);
    Ok(HotSolution {
        sigma,
        zeta,
        v,
        dv,
        fate: Fate::Decay,
        first_zero,
    })
}

/// Samples `(zeta, v, v')` of `L0^-1 f` for the `sigma = 0` operator.
#[derive(Debug, Clone)]
pub struct ResolventSolution {
    pub zeta: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

/// Decaying, `C^1`-at-zero solution of `-zeta v'' - v'/(m-2) + b v = f`:
///
/// `v = vbar int_zeta^inf (vbar^2 s^(1/(m-2)))^-1 int_0^s vbar t^(1/(m-2)-1) f dt ds`,
///
/// with `vbar` the regular solution at `sigma = 0`, evaluated on a grid
/// uniform in `w = zeta^(1/(m-2))`.
pub fn apply_l0_inverse<F: Fn(f64) -> f64>(f: F, problem: &HotProblem, zeta_max: f64, n: usize) -> Result<ResolventSolution> {
    let a = 1.0 / (problem.m - 2.0);
    let w_max = zeta_max.powf(a);
    let dw = w_max / n as f64;
    let ws: Vec<f64> = (0..=n).map(|i| i as f64 * dw).collect();
    let zeta: Vec<f64> = ws.iter().map(|w| w.powf(1.0 / a)).collect();
    let vbar = regular_at(problem, 0.0, &zeta)?;
    // inner integral in w: (1/a) int_0^w vbar f dw
    let mut inner = vec![0.0; n + 1];
    for i in 1..=n {
        let g0 = vbar[i - 1][0] * f(zeta[i - 1]);
        let g1 = vbar[i][0] * f(zeta[i]);
        inner[i] = inner[i - 1] + 0.5 * dw * (g0 + g1) / a;
    }
    let outer_integrand = |i: usize| {
        if i == 0 {
            0.0
        } else {
            inner[i] * ws[i].powf(1.0 / a - 2.0) / (a * vbar[i][0] * vbar[i][0])
        }
    };
    let mut outer = vec![0.0; n + 1];
    for i in (0..n).rev() {
        outer[i] = outer[i + 1] + 0.5 * dw * (outer_integrand(i) + outer_integrand(i + 1));
    }
    let mut v = vec![0.0; n + 1];
    let mut dv = vec![0.0; n + 1];
    for i in 0..=n {
        v[i] = vbar[i][0] * outer[i];
        dv[i] = if i == 0 {
            -(problem.m - 2.0) * f(0.0) / vbar[0][0]
        } else {
            vbar[i][1] * outer[i] - inner[i] / (vbar[i][0] * ws[i])
        };
    }
    Ok(ResolventSolution { zeta, v, dv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn series_coefficients_closed_forms() {
        let a = series_coefficients(1.0, 4.0, 3);
        assert!((a[1] + 2.0).abs() < 1e-15);
        assert!((a[2] - 2.0 / 3.0).abs() < 1e-15);
        let z = series_coefficients(0.0, 3.5, 10);
        assert!(z[1..].iter().all(|&c| c == 0.0));
        let s = series_coefficients(0.7, 3.5, 1);
        assert!((s[1] + 1.5 * 0.7).abs() < 1e-15);
        assert!(series_launch(1.0, 1e-6, 3.5, 1.0, 3).is_err());
        assert!(series_launch(1.0, 1e-1, 3.5, 1.0, 20).is_err());
    }

    #[test]
    fn launch_matches_ode_residual() {
        // the launched pair must continue into a solution: compare against a
        // launch at a ten times larger point integrated back
        let p = HotProblem::new(3.5, 1.0).unwrap();
        let (v1, d1) = series_launch(0.8, 1e-5, 3.5, 1.0, 20).unwrap();
        let y = ode()
            .integrate(&p.rhs_log(0.8), 1e-5f64.ln(), [v1, d1], 1e-6f64.ln(), |_, _| Control::Continue)
            .unwrap()
            .1;
        let (v0, d0) = series_launch(0.8, 1e-6, 3.5, 1.0, 20).unwrap();
        assert!((y[0] - v0).abs() < 1e-12 && (y[1] - d0).abs() < 1e-9);
    }

    #[test]
    fn fates_at_extremes() {
        let p = HotProblem::new(3.5, 1.0).unwrap();
        assert_eq!(fate(0.0, &p).unwrap(), Fate::BlowUpPlus);
        let e = principal_sigma(&p, 1e-10).unwrap();
        let big = integrate_and_classify(3.0 * e.sigma0, &p, p.default_zeta_max(3.0 * e.sigma0, 60.0)).unwrap();
        assert_eq!(big.fate, Fate::BlowUpMinus);
        assert!(big.first_zero.is_some());
        let at = integrate_and_classify(e.sigma0, &p, p.default_zeta_max(e.sigma0, 60.0));
        assert!(matches!(at.map(|s| s.fate), Ok(Fate::Decay) | Ok(Fate::BlowUpPlus) | Ok(Fate::BlowUpMinus)));
        assert!(matches!(
            integrate_and_classify(1.0, &p, 1.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn eigenfunction_positive_and_decreasing() {
        let p = HotProblem::new(3.5, 1.0).unwrap();
        let e = principal_sigma(&p, 1e-10).unwrap();
        let f = &e.eigenfunction;
        assert!(f.v.iter().all(|&v| v > 0.0));
        assert!(f.dv.iter().all(|&d| d < 0.0));
        assert!(f.v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn stable_branch_wkb() {
        let p = HotProblem::new(4.0, 1.0).unwrap();
        let br = stable_right_branch(0.5, 1.0, &p, 40.0).unwrap();
        assert_eq!(br.v[0], 1.0);
        // log v decreases like -(2/3) zeta^(3/2) for m = 4, B = 1
        let pick = |z: f64| br.zeta.iter().position(|&x| x >= z).unwrap();
        let (i, j) = (pick(10.0), pick(20.0));
        let drop = br.v[i].ln() - br.v[j].ln();
        let wkb = p.wkb_integral(br.zeta[j]) - p.wkb_integral(br.zeta[i]);
        assert!((drop / wkb - 1.0).abs() < 0.02, "{drop} {wkb}");
        let k = pick(30.0);
        let slope = br.dv[k] / br.v[k];
        assert!((slope / -p.wkb_rate(br.zeta[k]) - 1.0).abs() < 0.02);
    }

    #[test]
    fn scaling_law() {
        let m = 3.5;
        let base = principal_sigma(&HotProblem::new(m, 1.0).unwrap(), 1e-11).unwrap().sigma0;
        for b in [0.5, 2.0] {
            let s = principal_sigma(&HotProblem::new(m, b).unwrap(), 1e-11).unwrap().sigma0;
            let scaled = s * b.powf(-(m - 2.0) / (2.0 * (m - 1.0)));
            assert!((scaled / base - 1.0).abs() < 1e-8, "{b} {scaled} {base}");
        }
    }

    #[test]
    fn sigma_monotonicity() {
        let p = HotProblem::new(3.5, 1.0).unwrap();
        let s0 = principal_sigma(&p, 1e-9).unwrap().sigma0;
        let pts: Vec<f64> = (1..40).map(|i| 0.05 * i as f64).collect();
        let a = regular_at(&p, 0.3 * s0, &pts).unwrap();
        let b = regular_at(&p, 0.8 * s0, &pts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(y[0] < x[0]);
        }
    }

    #[test]
    fn resolvent_of_bump() {
        let p = HotProblem::new(3.5, 1.0).unwrap();
        let f = |z: f64| (-(z - 1.0) * (z - 1.0) * 4.0).exp();
        let sol = apply_l0_inverse(f, &p, p.default_zeta_max(0.0, 40.0), 20000).unwrap();
        let a = 1.0 / 1.5;
        assert!((sol.dv[0] + 1.5 * f(0.0)).abs() < 1e-4 * 1.5 * f(0.0));
        assert!((sol.dv[1] / sol.dv[0] - 1.0).abs() < 1e-3);
        let n = sol.zeta.len();
        let scale = sol.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sol.v[n - 1].abs() < 1e-8 * scale);
        // residual by centered differences in w = zeta^a
        let w: Vec<f64> = sol.zeta.iter().map(|z| z.powf(a)).collect();
        let fmax = 1.0;
        for i in (200..n - 200).step_by(97) {
            let ddv_w = (sol.dv[i + 1] - sol.dv[i - 1]) / (w[i + 1] - w[i - 1]);
            let z = sol.zeta[i];
            let ddv = ddv_w * a * z.powf(a - 1.0);
            let res = -z * ddv - a * sol.dv[i] + p.b(z) * sol.v[i] - f(z);
            assert!(res.abs() < 1e-5 * fmax, "{z} {res}");
        }
        let zero = apply_l0_inverse(|_| 0.0, &p, 10.0, 1000).unwrap();
        assert!(zero.v.iter().all(|&v| v == 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn launch_is_near_one(sigma in 0.0f64..5.0, m in 2.5f64..6.0) {
            let (v, dv) = series_launch(sigma, 1e-6, m, 1.0, 20).unwrap();
            prop_assert!((v - 1.0).abs() < 1e-5 * (1.0 + sigma));
            prop_assert!((dv + (m - 2.0) * sigma).abs() < 1e-4 * (1.0 + sigma * sigma));
        }
    }
}
