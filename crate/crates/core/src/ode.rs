//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};

/// What the observer asks the integrator to do after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    /// Largest admissible step magnitude; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Dopri5 {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// One embedded step; returns the fifth-order solution and the scaled
    /// error norm (accept when `<= 1`).
    pub fn step<F, const N: usize>(&self, f: &F, x: f64, y: &[f64; N], h: f64) -> ([f64; N], f64)
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let k1 = f(x, y);
        let k2 = f(x + C2 * h, &axpy(y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + C5 * h,
            &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &axpy(
                y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y5 = axpy(
            y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(x + h, &y5);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        (y5, err)
    }

    /// Integrates from `x0` to `x1` (either direction). After each accepted
    /// step the observer sees the new state, may rescale it in place, and may
    /// stop the integration. Returns the final abscissa and state.
    pub fn integrate<F, O, const N: usize>(
        &self,
        f: &F,
        x0: f64,
        y0: [f64; N],
        x1: f64,
        mut observer: O,
    ) -> Result<(f64, [f64; N])>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &mut [f64; N]) -> Control,
    {
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let span = (x1 - x0).abs();
        let mut x = x0;
        let mut y = y0;
        if span == 0.0 {
            return Ok((x, y));
        }
        let mut h = self.h_init.min(self.h_max).min(span);
        let mut steps = 0usize;
        loop {
            let remaining = (x1 - x).abs();
            if remaining <= 1e-15 * span.max(x1.abs()) {
                return Ok((x1, y));
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            let (yn, err) = self.step(f, x, &y, dir * hs);
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Integration {
                    at: x,
                    reason: "step budget exhausted".into(),
                });
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + dir * hs };
                y = yn;
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Integration {
                        at: x,
                        reason: "non-finite state".into(),
                    });
                }
                if observer(x, &mut y) == Control::Stop {
                    return Ok((x, y));
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (hs * fac).min(self.h_max);
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-15 * x.abs().max(1e-300) {
                    return Err(Error::Integration {
                        at: x,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
    }

    /// Integrates and records the state at every requested abscissa
    /// (monotone in the direction of integration; the first must be `x0`).
    pub fn integrate_to_points<F, const N: usize>(
        &self,
        f: &F,
        y0: [f64; N],
        points: &[f64],
    ) -> Result<Vec<[f64; N]>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = Vec::with_capacity(points.len());
        let mut y = y0;
        out.push(y);
        for w in points.windows(2) {
            let (_, yn) = self.integrate(f, w[0], y, w[1], |_, _| Control::Continue)?;
            y = yn;
            out.push(y);
        }
        Ok(out)
    }

    /// Locates `g(y(x)) = 0` inside the step from `(x, y)` of signed length `h`
    /// by secant iteration on single embedded steps.
    pub fn locate<F, G, const N: usize>(
        &self,
        f: &F,
        x: f64,
        y: &[f64; N],
        h: f64,
        g: G,
    ) -> (f64, [f64; N])
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        G: Fn(&[f64; N]) -> f64,
    {
        let mut lo = 0.0;
        let mut glo = g(y);
        let mut hi = h;
        let mut yhi = self.step(f, x, y, h).0;
        let mut ghi = g(&yhi);
        for _ in 0..60 {
            let t = hi - ghi * (hi - lo) / (ghi - glo);
            let t = if t.is_finite() && (t - lo) * (t - hi) < 0.0 {
                t
            } else {
                0.5 * (lo + hi)
            };
            let yt = self.step(f, x, y, t).0;
            let gt = g(&yt);
            if gt == 0.0 || (hi - lo).abs() < 1e-15 * (x.abs() + h.abs()) {
                return (x + t, yt);
            }
            if gt.signum() == glo.signum() {
                lo = t;
                glo = gt;
            } else {
                hi = t;
                ghi = gt;
                yhi = yt;
            }
        }
        (x + hi, yhi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_oscillator() {
        let ode = Dopri5::with_tol(1e-12, 1e-14);
        let (_, y) = ode
            .integrate(&|_, y: &[f64; 1]| [-2.0 * y[0]], 0.0, [1.0], 3.0, |_, _| Control::Continue)
            .unwrap();
        assert!((y[0] - (-6.0f64).exp()).abs() < 1e-13);
        let (_, y) = ode
            .integrate(
                &|_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                [0.0, 1.0],
                -2.0,
                |_, _| Control::Continue,
            )
            .unwrap();
        assert!((y[0] - (-2.0f64).sin()).abs() < 1e-11);
    }

    #[test]
    fn observer_stops_and_locates() {
        let ode = Dopri5::with_tol(1e-12, 1e-14);
        let f = |_: f64, y: &[f64; 1]| [1.0 + 0.0 * y[0]];
        let (x, _) = ode.integrate(&f, 0.0, [0.0], 10.0, |_, y| {
            if y[0] > 2.0 {
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .unwrap();
        assert!(x > 2.0 && x <= 10.0);
        let (xr, yr) = ode.locate(&|_, y: &[f64; 1]| [y[0]], 0.0, &[1.0], 0.2, |y| y[0] - 1.1);
        // root of the single-step interpolant, so only one-step accurate
        assert!((xr - 1.1f64.ln()).abs() < 1e-9, "{xr}");
        assert!((yr[0] - 1.1).abs() < 1e-12);
    }

    #[test]
    fn records_points() {
        let ode = Dopri5::with_tol(1e-12, 1e-14);
        let pts = [0.0, 0.5, 1.0];
        let ys = ode
            .integrate_to_points(&|_, y: &[f64; 1]| [y[0]], [1.0], &pts)
            .unwrap();
        assert!((ys[2][0] - 1f64.exp()).abs() < 1e-11);
    }
}
