//! Planar travelling wave `-p p'' + (c - p'/(m-2)) p' = G(p)` connecting
//! `epsilon` at `-inf` to `1` at `+inf`.
//!
//! Profiles live in the frame where the kink of the limit profile `p0` sits
//! at `x = 0` and `p(x_theta) = theta`, `x_theta = theta / ((m-2) c0)`.
//!
//! Below the threshold the profile is known through its first integral
//! `p' = U(p)` and is parametrised by `t = ln((p - eps)/eps)`, which resolves
//! the boundary layer and the linear zone with a single uniform grid. Above
//! the threshold it is the stable manifold of the burned state, integrated
//! backward from the tail in the variable `w = 1 - p`.

use crate::error::{Error, Result};
use crate::model::{ModelParams, ReactionTerm};
use crate::numerics::{bracket_index, gauss_legendre, hermite5};
use crate::ode::{Control, Dopri5};

/// Left end of the layer grid in `t = ln((p - eps)/eps)`.
const T_MIN: f64 = -60.0;
/// Spacing of the layer grid in `t`.
const DT: f64 = 0.02;
/// `1 - p` at the right end of the hot profile.
const TAIL_W: f64 = 1e-11;
/// Maximal-decay launch point of the cold zone, in `t`.
pub const T_START: f64 = -50.0;

/// Phase-plane slope `U(p) = (m-2) c [1 - (eps/p)^(1/(m-2))]` below the threshold.
pub fn phase_slope(p: f64, c: f64, epsilon: f64, m: f64) -> Result<f64> {
    if !(p >= epsilon) {
        return Err(Error::Domain {
            value: p,
            domain: "[epsilon, theta]",
        });
    }
    let k = 1.0 / (m - 2.0);
    Ok(-(m - 2.0) * c * (-k * ((p - epsilon) / epsilon).ln_1p()).exp_m1())
}

/// `p'' = c eps^(1/(m-2)) U(p) / p^(1 + 1/(m-2))` below the threshold.
pub fn second_derivative(p: f64, c: f64, epsilon: f64, m: f64) -> Result<f64> {
    let u = phase_slope(p, c, epsilon, m)?;
    let k = 1.0 / (m - 2.0);
    Ok(c * epsilon.powf(k) * u / p.powf(1.0 + k))
}

/// `U` in the layer variable `t`, with `p = eps (1 + e^t)`.
fn slope_of_t(t: f64, c: f64, m: f64) -> f64 {
    let k = 1.0 / (m - 2.0);
    -(m - 2.0) * c * (-k * t.exp().ln_1p()).exp_m1()
}

/// Right-hand side of the hot-side wave equation in `(p, p')`.
fn hot_rhs(c: f64, m: f64, reaction: &ReactionTerm) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    let k = 1.0 / (m - 2.0);
    move |_, y| {
        let (p, dp) = (y[0], y[1]);
        [dp, ((c - k * dp) * dp - reaction.value(p)) / p]
    }
}

/// Right-hand side in `(w, w')` with `w = 1 - p`.
fn tail_rhs(c: f64, m: f64, reaction: &ReactionTerm) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    let k = 1.0 / (m - 2.0);
    move |_, y| {
        let (w, dw) = (y[0], y[1]);
        let g = reaction.at_tail(w).0;
        [dw, ((c + k * dw) * dw + g) / (1.0 - w)]
    }
}

/// Stable rate `lambda < 0` of `w'' - c w' + G'(1) w = 0` at the burned state.
pub fn tail_rate(c: f64, reaction: &ReactionTerm) -> f64 {
    let g1 = reaction.at_tail(0.0).1;
    0.5 * (c - (c * c - 4.0 * g1).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    Overshoot,
    Undershoot,
}

fn classify_shot(alpha: f64, c: f64, m: f64, reaction: &ReactionTerm) -> Result<Shot> {
    if alpha <= 0.0 {
        return Ok(Shot::Undershoot);
    }
    let theta = reaction.theta();
    let rhs = hot_rhs(c, m, reaction);
    let ode = Dopri5::with_tol(1e-10, 1e-12);
    let mut verdict = None;
    let x_max = 1e4 * (1.0 + 1.0 / c);
    let (_, y) = ode.integrate(&rhs, 0.0, [theta, alpha], x_max, |_, y| {
        if y[0] > 1.0 {
            verdict = Some(Shot::Overshoot);
            Control::Stop
        } else if y[1] <= 0.0 {
            verdict = Some(Shot::Undershoot);
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    Ok(verdict.unwrap_or(if y[0] >= 1.0 - 1e-9 {
        Shot::Overshoot
    } else {
        Shot::Undershoot
    }))
}

/// Matched slope `alpha0(c)` at `p = theta` for which the hot-side Cauchy
/// problem reaches the burned state, by bisection between undershooting and
/// overshooting slopes in `[0, 10 (m-2) c]`.
pub fn shoot_alpha0(c: f64, reaction: &ReactionTerm, m: f64, tol: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("wave speed {c} must be positive")));
    }
    let mut lo = 0.0;
    let mut hi = 10.0 * (m - 2.0) * c;
    if classify_shot(hi, c, m, reaction)? != Shot::Overshoot {
        return Err(Error::Shooting(format!(
            "slope {hi} does not overshoot the burned state"
        )));
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        match classify_shot(mid, c, m, reaction)? {
            Shot::Overshoot => hi = mid,
            Shot::Undershoot => lo = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hot-side profile sampled on ascending abscissas, stored through `w = 1 - p`.
#[derive(Debug, Clone)]
struct HotProfile {
    xs: Vec<f64>,
    /// `(w, w', w'', w''')` at every node.
    ws: Vec<[f64; 4]>,
    rate: f64,
}

struct Separatrix {
    alpha: f64,
    /// Nodes from the tail (`x = 0`) backward to the threshold crossing.
    nodes: Vec<(f64, [f64; 2])>,
}

fn separatrix(c: f64, m: f64, reaction: &ReactionTerm, record: bool) -> Result<Separatrix> {
    let theta = reaction.theta();
    let lam = tail_rate(c, reaction);
    let lam_plus = c - lam;
    let rhs = tail_rhs(c, m, reaction);
    let ode = Dopri5::with_tol(1e-12, 1e-30).h_max(0.05 / (lam_plus - lam));
    let target = 1.0 - theta;
    let y0 = [TAIL_W, lam * TAIL_W];
    let mut nodes = vec![(0.0, y0)];
    let mut crossed = false;
    // past the critical speed the manifold creeps into (theta, 0) instead
    let x_far = -(40.0 / -lam + 2e3 * (1.0 + 1.0 / c));
    ode.integrate(&rhs, 0.0, y0, x_far, |x, y| {
        nodes.push((x, *y));
        if y[0] >= target {
            crossed = true;
            Control::Stop
        } else if y[1] >= 0.0 {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if !crossed {
        if record {
            return Err(Error::Shooting("separatrix never reaches the threshold".into()));
        }
        return Ok(Separatrix {
            alpha: 0.0,
            nodes: Vec::new(),
        });
    }
    let last = nodes.len() - 1;
    let (xp, yp) = nodes[last - 1];
    let (xl, _) = nodes[last];
    let (xe, ye) = ode.locate(&rhs, xp, &yp, xl - xp, |y| y[0] - target);
    nodes[last] = (xe, ye);
    let alpha = -ye[1];
    if !record {
        nodes.clear();
    }
    Ok(Separatrix { alpha, nodes })
}

/// `alpha0(c)` from the stable manifold of the burned state, integrated
/// backward to the threshold. Independent of [`shoot_alpha0`].
pub fn separatrix_alpha0(c: f64, reaction: &ReactionTerm, m: f64) -> Result<f64> {
    Ok(separatrix(c, m, reaction, false)?.alpha)
}

impl HotProfile {
    fn build(c: f64, m: f64, reaction: &ReactionTerm, x_theta: f64) -> Result<(f64, Self)> {
        let sep = separatrix(c, m, reaction, true)?;
        let shift = x_theta - sep.nodes.last().unwrap().0;
        let rhs = tail_rhs(c, m, reaction);
        let k = 1.0 / (m - 2.0);
        let mut xs = Vec::with_capacity(sep.nodes.len());
        let mut ws = Vec::with_capacity(sep.nodes.len());
        for &(x, [w, dw]) in sep.nodes.iter().rev() {
            let ddw = rhs(0.0, &[w, dw])[1];
            // third derivative from differentiating the wave equation in p
            let (p, dp, ddp) = (1.0 - w, -dw, -ddw);
            let dg = reaction.at_tail(w).1;
            let dddp = ((c - 2.0 * k * dp) * ddp - dg * dp - ddp * dp) / p;
            xs.push(x + shift);
            ws.push([w, dw, ddw, -dddp]);
        }
        // pin the threshold crossing exactly
        xs[0] = x_theta;
        Ok((
            sep.alpha,
            HotProfile {
                xs,
                ws,
                rate: tail_rate(c, reaction),
            },
        ))
    }

    fn x_end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// `(w, w')` at `x >= x_theta`.
    fn eval(&self, x: f64) -> (f64, f64) {
        if x >= self.x_end() {
            let last = self.ws.last().unwrap();
            let w = last[0] * (self.rate * (x - self.x_end())).exp();
            return (w, self.rate * w);
        }
        let i = bracket_index(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (a, b) = (self.ws[i], self.ws[i + 1]);
        let w = hermite5(s, h, [a[0], a[1], a[2]], [b[0], b[1], b[2]]);
        let dw = hermite5(s, h, [a[1], a[2], a[3]], [b[1], b[2], b[3]]);
        (w, dw)
    }
}

/// Cold side of the profile.
#[derive(Debug, Clone)]
enum ColdSide {
    /// Boundary layer parametrised by `t = ln((p - eps)/eps)`.
    Layer {
        epsilon: f64,
        ts: Vec<f64>,
        xs: Vec<f64>,
    },
    /// `p0 = 0` left of the kink, linear up to the threshold.
    FreeBoundary,
}

/// Profile value and derivatives at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePoint {
    pub p: f64,
    pub dp: f64,
    pub ddp: f64,
    /// `1 - p`, accurate in the burned tail.
    pub w: f64,
    /// `G'(p)`.
    pub dg: f64,
}

/// Cold-side data in layer units: `q = p/eps` as a function of `xi = x/eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerPoint {
    pub q: f64,
    /// `dq/dxi = p'`.
    pub dq: f64,
    /// `d2q/dxi2 = eps p''`.
    pub ddq: f64,
    /// `dx/dt`.
    pub dx_dt: f64,
    /// `d ln(dx/dt) / dt`.
    pub dx_dt_log: f64,
}

/// Travelling wave `(c_eps, p_eps)` with its landmarks.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    pub params: ModelParams,
    /// `epsilon` of this profile; zero for the limit profile.
    pub epsilon: f64,
    pub c: f64,
    pub c0: f64,
    /// Matched slope at the threshold.
    pub alpha0: f64,
    pub x_theta: f64,
    pub x_eps: f64,
    /// `A = c0 / ((m-2) c0)^(1/(m-2))`.
    pub big_a: f64,
    pub grid: Vec<f64>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub ddp: Vec<f64>,
    reaction: ReactionTerm,
    cold: ColdSide,
    hot: HotProfile,
}

/// Boundary-layer and linear-zone landmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmarks {
    pub x_eps: f64,
    pub xi_eps: f64,
    pub a: f64,
    pub big_a: f64,
}

fn bisect_speed<F: Fn(f64) -> Result<f64>>(f: F) -> Result<f64> {
    // f is increasing in c
    let mut hi = 1.0;
    let mut lo = 0.5;
    let mut n = 0;
    while f(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > 60 {
            return Err(Error::Shooting("no upper bracket for the wave speed".into()));
        }
    }
    if lo == 0.5 {
        lo = hi;
        while f(lo)? > 0.0 {
            hi = lo;
            lo *= 0.5;
            n += 1;
            if n > 60 {
                return Err(Error::Shooting("no lower bracket for the wave speed".into()));
            }
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Limit speed `c0`, solving `(m-2) c0 = alpha0(c0)`.
pub fn limit_speed(params: &ModelParams) -> Result<f64> {
    let reaction = params.reaction();
    let m = params.m;
    bisect_speed(|c| Ok((m - 2.0) * c - separatrix_alpha0(c, &reaction, m)?))
}

/// Wave speed for a given `epsilon`, solving
/// `(m-2) c [1 - (eps/theta)^(1/(m-2))] = alpha0(c)`.
pub fn wave_speed(params: &ModelParams) -> Result<f64> {
    let reaction = params.reaction();
    let m = params.m;
    let factor = -(params.inv_m2() * (params.epsilon / params.theta).ln()).exp_m1();
    bisect_speed(|c| Ok((m - 2.0) * c * factor - separatrix_alpha0(c, &reaction, m)?))
}

fn dxdt(t: f64, epsilon: f64, c: f64, m: f64) -> f64 {
    epsilon * t.exp() / slope_of_t(t, c, m)
}

/// Constructs `(c_eps, p_eps)` for `0 < epsilon < theta`.
pub fn solve_wave(params: &ModelParams) -> Result<WaveSolution> {
    params.validate()?;
    let c0 = limit_speed(params)?;
    solve_wave_with_c0(params, c0)
}

/// As [`solve_wave`], reusing a known limit speed.
pub fn solve_wave_with_c0(params: &ModelParams, c0: f64) -> Result<WaveSolution> {
    params.validate()?;
    let (m, eps, theta) = (params.m, params.epsilon, params.theta);
    let reaction = params.reaction();
    let c = wave_speed(params)?;
    let x_theta = theta / ((m - 2.0) * c0);
    let (alpha0, hot) = HotProfile::build(c, m, &reaction, x_theta)?;

    let t_theta = ((theta - eps) / eps).ln();
    let n = ((t_theta - T_MIN) / DT).ceil() as usize;
    let dt = (t_theta - T_MIN) / n as f64;
    let ts: Vec<f64> = (0..=n).map(|i| T_MIN + i as f64 * dt).collect();
    let mut xs = vec![0.0; n + 1];
    xs[n] = x_theta;
    for i in (0..n).rev() {
        xs[i] = xs[i + 1] - gauss_legendre(|t| dxdt(t, eps, c, m), ts[i], ts[i + 1]);
    }
    let cold = ColdSide::Layer {
        epsilon: eps,
        ts: ts.clone(),
        xs: xs.clone(),
    };

    let mut grid = Vec::new();
    let mut pv = Vec::new();
    let mut dpv = Vec::new();
    let mut ddpv = Vec::new();
    let k = params.inv_m2();
    for (i, &t) in ts.iter().enumerate() {
        let p = eps * (1.0 + t.exp());
        let u = slope_of_t(t, c, m);
        grid.push(xs[i]);
        pv.push(p);
        dpv.push(u);
        ddpv.push(c * eps.powf(k) * u / p.powf(1.0 + k));
    }
    let mut wave = WaveSolution {
        params: *params,
        epsilon: eps,
        c,
        c0,
        alpha0,
        x_theta,
        x_eps: eps.powf(1.0 - params.a()),
        big_a: c0 / ((m - 2.0) * c0).powf(k),
        grid,
        p: pv,
        dp: dpv,
        ddp: ddpv,
        reaction,
        cold,
        hot,
    };
    wave.append_hot_samples();
    Ok(wave)
}

/// The `epsilon -> 0` limit `(c0, p0)`; `p0` vanishes left of the kink at 0.
pub fn solve_limit_wave(params: &ModelParams) -> Result<WaveSolution> {
    let m = params.m;
    let reaction = params.reaction();
    let c0 = limit_speed(params)?;
    let x_theta = params.theta / ((m - 2.0) * c0);
    let (alpha0, hot) = HotProfile::build(c0, m, &reaction, x_theta)?;
    let mut wave = WaveSolution {
        params: *params,
        epsilon: 0.0,
        c: c0,
        c0,
        alpha0,
        x_theta,
        x_eps: 0.0,
        big_a: c0 / ((m - 2.0) * c0).powf(params.inv_m2()),
        grid: Vec::new(),
        p: Vec::new(),
        dp: Vec::new(),
        ddp: Vec::new(),
        reaction,
        cold: ColdSide::FreeBoundary,
        hot,
    };
    let n = 2000;
    for i in 0..=n {
        let x = -x_theta + 2.0 * x_theta * i as f64 / n as f64;
        let pt = wave.eval(x);
        wave.grid.push(x);
        wave.p.push(pt.p);
        wave.dp.push(pt.dp);
        wave.ddp.push(pt.ddp);
    }
    wave.append_hot_samples();
    Ok(wave)
}

impl WaveSolution {
    fn append_hot_samples(&mut self) {
        for i in 1..self.hot.xs.len() {
            let x = self.hot.xs[i];
            let pt = self.eval(x);
            self.grid.push(x);
            self.p.push(pt.p);
            self.dp.push(pt.dp);
            self.ddp.push(pt.ddp);
        }
    }

    pub fn m(&self) -> f64 {
        self.params.m
    }

    pub fn reaction(&self) -> &ReactionTerm {
        &self.reaction
    }

    /// Right end of the resolved hot profile, where `1 - p` is about 1e-11.
    pub fn x_right(&self) -> f64 {
        self.hot.x_end()
    }

    /// Abscissa of the maximal-decay launch point, `p - eps = eps e^-50`.
    pub fn x_start(&self) -> f64 {
        self.x_of_t(T_START)
    }

    /// Abscissa where `p = eps (1 + e^t)` on the cold side.
    pub fn x_of_t(&self, t: f64) -> f64 {
        match &self.cold {
            ColdSide::Layer { epsilon, ts, xs } => {
                let i = bracket_index(ts, t);
                xs[i] + gauss_legendre(|s| dxdt(s, *epsilon, self.c, self.m()), ts[i], t)
            }
            ColdSide::FreeBoundary => 0.0,
        }
    }

    /// Abscissa where the profile takes the value `p` (cold side only).
    pub fn x_of_p(&self, p: f64) -> Result<f64> {
        if p > self.params.theta || p <= self.epsilon {
            return Err(Error::Domain {
                value: p,
                domain: "(epsilon, theta]",
            });
        }
        match &self.cold {
            ColdSide::Layer { epsilon, .. } => Ok(self.x_of_t(((p - epsilon) / epsilon).ln())),
            ColdSide::FreeBoundary => Ok(p / ((self.m() - 2.0) * self.c0)),
        }
    }

    /// Layer variable `t = ln((p - eps)/eps)` at a cold-side abscissa.
    pub fn t_of_x(&self, x: f64) -> Result<f64> {
        match &self.cold {
            ColdSide::Layer { epsilon, ts, xs } if x <= self.x_theta => {
                Ok(self.cold_t(*epsilon, ts, xs, x))
            }
            _ => Err(Error::Domain {
                value: x,
                domain: "cold side of a profile with epsilon > 0",
            }),
        }
    }

    /// Closed-form profile data at layer variable `t` (requires `epsilon > 0`).
    pub fn layer_at(&self, t: f64) -> LayerPoint {
        let (eps, c, m) = (self.epsilon, self.c, self.m());
        let k = 1.0 / (m - 2.0);
        let q = 1.0 + t.exp();
        let u = slope_of_t(t, c, m);
        let dx_dt = dxdt(t, eps, c, m);
        LayerPoint {
            q,
            dq: u,
            ddq: c * u / q.powf(1.0 + k),
            dx_dt,
            dx_dt_log: 1.0 - c * dx_dt / (eps * q.powf(1.0 + k)),
        }
    }

    fn cold_t(&self, epsilon: f64, ts: &[f64], xs: &[f64], x: f64) -> f64 {
        let (c, m) = (self.c, self.m());
        if x <= xs[0] {
            return ts[0] + (x - xs[0]) / dxdt(ts[0], epsilon, c, m);
        }
        let i = bracket_index(xs, x);
        let mut t = ts[i] + (x - xs[i]) / (xs[i + 1] - xs[i]) * (ts[i + 1] - ts[i]);
        for _ in 0..8 {
            let f = xs[i] + gauss_legendre(|s| dxdt(s, epsilon, c, m), ts[i], t) - x;
            let step = f / dxdt(t, epsilon, c, m);
            t -= step;
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }

    /// Profile value and derivatives at `x`.
    pub fn eval(&self, x: f64) -> WavePoint {
        let m = self.m();
        if x <= self.x_theta {
            return match &self.cold {
                ColdSide::Layer { epsilon, ts, xs } => {
                    let eps = *epsilon;
                    let t = self.cold_t(eps, ts, xs, x);
                    let p = eps * (1.0 + t.exp());
                    let u = slope_of_t(t, self.c, m);
                    let k = 1.0 / (m - 2.0);
                    WavePoint {
                        p,
                        dp: u,
                        ddp: self.c * eps.powf(k) * u / p.powf(1.0 + k),
                        w: 1.0 - p,
                        dg: 0.0,
                    }
                }
                ColdSide::FreeBoundary => {
                    let slope = (m - 2.0) * self.c0;
                    let (p, dp) = if x <= 0.0 { (0.0, 0.0) } else { (slope * x, slope) };
                    WavePoint {
                        p,
                        dp,
                        ddp: 0.0,
                        w: 1.0 - p,
                        dg: 0.0,
                    }
                }
            };
        }
        let (w, dw) = self.hot.eval(x);
        let p = 1.0 - w;
        let dp = -dw;
        let (g, dg) = self.reaction.at_tail(w);
        let ddp = ((self.c - dp / (m - 2.0)) * dp - g) / p;
        WavePoint { p, dp, ddp, w, dg }
    }

    pub fn landmarks(&self) -> Landmarks {
        landmarks(self, &self.params)
    }
}

/// `x_eps = eps^(1-a)`, `xi_eps = x_eps / eps`, `a` and the asymptote constant `A`.
pub fn landmarks(wave: &WaveSolution, params: &ModelParams) -> Landmarks {
    let a = params.a();
    let x_eps = wave.epsilon.powf(1.0 - a);
    Landmarks {
        x_eps,
        xi_eps: if wave.epsilon > 0.0 { x_eps / wave.epsilon } else { f64::INFINITY },
        a,
        big_a: wave.big_a,
    }
}

/// Measured structural properties of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveInvariants {
    pub monotone: bool,
    /// `0 < p' < (m-2) c` at every sample.
    pub slope_bounded: bool,
    /// Largest relative gap between a differentiated `p(x)` and `U(p)` on `p <= theta`.
    pub first_integral_error: f64,
    /// Fitted `d ln(p - eps)/dx` at the cold end over `c/eps`.
    pub left_rate_ratio: f64,
}

/// Central difference of `p(x)` with one Richardson step.
fn numeric_slope(wave: &WaveSolution, x: f64, h: f64) -> f64 {
    let d = |h: f64| (wave.eval(x + h).p - wave.eval(x - h).p) / (2.0 * h);
    let (d1, d2) = (d(h), d(0.5 * h));
    d2 + (d2 - d1) / 3.0
}

pub fn check_invariants(wave: &WaveSolution) -> Result<WaveInvariants> {
    let (m, c, eps, theta) = (wave.m(), wave.c, wave.epsilon, wave.params.theta);
    // far in the cold tail p - eps drops below one ulp of eps, so p itself may repeat
    let monotone = wave.grid.windows(2).all(|w| w[1] > w[0]) && wave.p.windows(2).all(|w| w[1] >= w[0]);
    let top = (m - 2.0) * c;
    let slope_bounded = wave.dp.iter().all(|&d| d > 0.0 && d < top);
    let mut first_integral_error: f64 = 0.0;
    for i in (0..wave.grid.len()).step_by(7) {
        let p = wave.p[i];
        if p > theta || p < 2.0 * eps {
            continue;
        }
        let u = phase_slope(p, c, eps, m)?;
        let h = 1e-3 * p / u;
        if wave.grid[i] + h > wave.x_theta {
            continue;
        }
        let d = numeric_slope(wave, wave.grid[i], h);
        first_integral_error = first_integral_error.max((d / u - 1.0).abs());
    }
    // ln(p - eps) against x over the first layer units
    let xs: Vec<f64> = (0..20).map(|i| wave.x_of_t(T_START + 0.25 * i as f64)).collect();
    let ys: Vec<f64> = (0..20).map(|i| T_START + 0.25 * i as f64 + eps.ln()).collect();
    let left_rate_ratio = crate::numerics::ls_slope(&xs, &ys) / (c / eps);
    Ok(WaveInvariants {
        monotone,
        slope_bounded,
        first_integral_error,
        left_rate_ratio,
    })
}

/// `sup |p_eps - p0|` over the common resolved range, sampled every `dx`.
pub fn sup_distance(a: &WaveSolution, b: &WaveSolution, dx: f64) -> f64 {
    let lo = a.grid[0].max(b.grid[0]).max(-5.0);
    let hi = a.x_right().min(b.x_right());
    let n = ((hi - lo) / dx).ceil() as usize;
    (0..=n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            (a.eval(x).p - b.eval(x).p).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(phase_slope(0.01, 1.0, 0.01, 4.0).unwrap(), 0.0);
        assert!((phase_slope(0.04, 1.0, 0.01, 4.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(phase_slope(0.005, 1.0, 0.01, 4.0).is_err());
        assert_eq!(second_derivative(0.01, 1.0, 0.01, 4.0).unwrap(), 0.0);
        // U -> (m-2) c as eps -> 0
        let u = phase_slope(0.3, 0.7, 1e-14, 3.5).unwrap();
        assert!((u - 1.5 * 0.7).abs() < 1e-7);
        // U increasing in p
        let mut prev = 0.0;
        for i in 1..100 {
            let u = phase_slope(0.01 + 0.004 * i as f64, 1.0, 0.01, 3.5).unwrap();
            assert!(u > prev && u < 1.5);
            prev = u;
        }
    }

    #[test]
    fn shooting_classification() {
        let r = ReactionTerm::default_family(0.5, 1.0);
        assert_eq!(classify_shot(0.0, 1.0, 3.5, &r).unwrap(), Shot::Undershoot);
        assert_eq!(classify_shot(15.0, 1.0, 3.5, &r).unwrap(), Shot::Overshoot);
    }

    #[test]
    fn shooting_matches_separatrix() {
        let r = ReactionTerm::default_family(0.5, 1.0);
        let a = shoot_alpha0(0.1, &r, 3.5, 1e-12).unwrap();
        let b = separatrix_alpha0(0.1, &r, 3.5).unwrap();
        assert!((a - b).abs() < 1e-6 * b, "{a} {b}");
    }

    #[test]
    fn profile_invariants_and_convergence() {
        let base = ModelParams::default();
        let c0 = limit_speed(&base).unwrap();
        let limit = solve_limit_wave(&base).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        for eps in [1e-2, 1e-3, 1e-4] {
            let w = solve_wave_with_c0(&base.with_epsilon(eps), c0).unwrap();
            let inv = check_invariants(&w).unwrap();
            assert!(inv.monotone && inv.slope_bounded, "{inv:?}");
            assert!(inv.first_integral_error < 1e-8, "{inv:?}");
            assert!((inv.left_rate_ratio - 1.0).abs() < 0.01, "{inv:?}");
            let gap = sup_distance(&w, &limit, 1e-3);
            if let Some((c, g)) = prev {
                assert!(w.c < c && w.c > c0 && gap < g);
            }
            prev = Some((w.c, gap));
        }
    }

    #[test]
    fn landmarks_follow_definition() {
        let p = ModelParams::default().with_epsilon(1e-4);
        let w = solve_wave(&p).unwrap();
        let l = w.landmarks();
        assert!((l.a - 0.63).abs() < 1e-12);
        assert!((l.x_eps.log10() + 1.48).abs() < 1e-9);
        assert!((l.xi_eps - l.x_eps / 1e-4).abs() < 1e-9 * l.xi_eps);
    }

    #[test]
    fn parameter_errors() {
        let p = ModelParams::default().with_epsilon(0.6);
        assert!(matches!(solve_wave(&p), Err(Error::Parameter(_))));
        let r = ReactionTerm::default_family(0.5, 1.0);
        assert!(shoot_alpha0(-1.0, &r, 3.5, 1e-10).is_err());
    }
}
