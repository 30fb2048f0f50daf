//! Model parameters, the ignition reaction term and the frequency regime.
//!
//! The unknown is `mu = T^(m-2)`, scaled so that the cold state is `epsilon`
//! and the burned state is `1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Conductivity exponent.
    pub m: f64,
    /// Scaled temperature ratio of the cold side.
    pub epsilon: f64,
    /// Ignition threshold.
    pub theta: f64,
    /// Reaction amplitude.
    pub g0: f64,
    /// Regime exponent.
    pub eta: f64,
    /// Minimum wavenumber of the regime.
    pub k0: f64,
    /// Cap on `delta = k^(1/(m-1) - 1)`.
    pub delta0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            m: 3.5,
            epsilon: 1e-3,
            theta: 0.5,
            g0: 1.0,
            eta: 0.1,
            k0: 10.0,
            delta0: 0.2,
        }
    }
}

impl ModelParams {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.m > 2.0) || !self.m.is_finite() {
            return bad(format!("m = {} must exceed 2", self.m));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta = {} must lie in (0, 1)", self.theta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.theta) {
            return bad(format!(
                "epsilon = {} must lie in (0, theta = {})",
                self.epsilon, self.theta
            ));
        }
        if !(self.g0 > 0.0) {
            return bad(format!("g0 = {} must be positive", self.g0));
        }
        if !(self.eta > 0.0) {
            return bad(format!("eta = {} must be positive", self.eta));
        }
        if !(self.k0 > 0.0) {
            return bad(format!("k0 = {} must be positive", self.k0));
        }
        if !(self.delta0 > 0.0) {
            return bad(format!("delta0 = {} must be positive", self.delta0));
        }
        Ok(())
    }

    /// `1/(m-2)`, the exponent relating `mu` to the temperature.
    pub fn inv_m2(&self) -> f64 {
        1.0 / (self.m - 2.0)
    }

    /// Exponent of the transversal diffusion coefficient, `m/(m-2)`.
    pub fn transverse_exponent(&self) -> f64 {
        self.m / (self.m - 2.0)
    }

    /// Dispersion exponent `1 - 1/(m-1)`.
    pub fn dispersion_exponent(&self) -> f64 {
        1.0 - 1.0 / (self.m - 1.0)
    }

    /// Cold-zone exit exponent `a = (m-2)/(m-1) (1 + eta/2)`.
    pub fn a(&self) -> f64 {
        (self.m - 2.0) / (self.m - 1.0) * (1.0 + 0.5 * self.eta)
    }

    /// Returns `delta = k^-(1 - 1/(m-1))`.
    pub fn delta_of_k(&self, k: f64) -> f64 {
        k.powf(-self.dispersion_exponent())
    }

    pub fn k_of_delta(&self, delta: f64) -> f64 {
        delta.powf(-1.0 / self.dispersion_exponent())
    }

    pub fn reaction(&self) -> ReactionTerm {
        ReactionTerm::default_family(self.theta, self.g0)
    }

    pub const KEYS: [&'static str; 7] = ["m", "epsilon", "theta", "g0", "eta", "k0", "delta0"];

    /// Sets one parameter by name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "m" => self.m = value,
            "epsilon" => self.epsilon = value,
            "theta" => self.theta = value,
            "g0" => self.g0 = value,
            "eta" => self.eta = value,
            "k0" => self.k0 = value,
            "delta0" => self.delta0 = value,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// `(key, value)` pairs in file order.
    pub fn entries(&self) -> [(&'static str, f64); 7] {
        [
            ("m", self.m),
            ("epsilon", self.epsilon),
            ("theta", self.theta),
            ("g0", self.g0),
            ("eta", self.eta),
            ("k0", self.k0),
            ("delta0", self.delta0),
        ]
    }
}

/// Parses `key = value` lines with `#` comments.
pub fn parse_config(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("line {}: `{}` is not a number", n + 1, value.trim())))?;
        out.push((key.to_string(), value));
    }
    Ok(out)
}

/// Applies a config file on top of `base`; unknown keys are errors.
pub fn params_from_config(text: &str, base: ModelParams) -> Result<ModelParams> {
    let mut p = base;
    for (k, v) in parse_config(text)? {
        p.set(&k, v)?;
    }
    Ok(p)
}

/// `G(mu) = g0 (mu - theta)^2 (1 - mu)` above the threshold, zero below.
pub fn g_default(mu: f64, theta: f64, g0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain {
            value: mu,
            domain: "[0, 1]",
        });
    }
    Ok(default_value(mu, theta, g0).0)
}

fn default_value(mu: f64, theta: f64, g0: f64) -> (f64, f64) {
    if mu <= theta {
        return (0.0, 0.0);
    }
    let d = mu - theta;
    let g = g0 * d * d * (1.0 - mu);
    let dg = g0 * (2.0 * d * (1.0 - mu) - d * d);
    (g, dg)
}

type ReactionFn = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// An ignition-type reaction term together with its derivative.
#[derive(Clone)]
pub struct ReactionTerm {
    theta: f64,
    eval: Arc<ReactionFn>,
    /// Evaluation in terms of `w = 1 - mu`, accurate near the burned state.
    tail: Option<Arc<ReactionFn>>,
}

impl fmt::Debug for ReactionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionTerm")
            .field("theta", &self.theta)
            .finish_non_exhaustive()
    }
}

impl ReactionTerm {
    pub fn default_family(theta: f64, g0: f64) -> Self {
        ReactionTerm {
            theta,
            eval: Arc::new(move |mu| default_value(mu, theta, g0)),
            tail: Some(Arc::new(move |w| {
                let d = 1.0 - theta - w;
                if d <= 0.0 {
                    return (0.0, 0.0);
                }
                (g0 * d * d * w, g0 * (2.0 * d * w - d * d))
            })),
        }
    }

    /// Wraps a closure returning `(G(mu), G'(mu))`.
    pub fn from_fn<F>(theta: f64, f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        ReactionTerm {
            theta,
            eval: Arc::new(f),
            tail: None,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `G(mu)`; the formula is extended past `[0, 1]` so that shooting can
    /// overshoot the burned state.
    pub fn value(&self, mu: f64) -> f64 {
        (self.eval)(mu).0
    }

    pub fn derivative(&self, mu: f64) -> f64 {
        (self.eval)(mu).1
    }

    /// `(G, G')` evaluated at `mu = 1 - w`.
    pub fn at_tail(&self, w: f64) -> (f64, f64) {
        match &self.tail {
            Some(t) => t(w),
            None => (self.eval)(1.0 - w),
        }
    }

    pub fn value_checked(&self, mu: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain {
                value: mu,
                domain: "[0, 1]",
            });
        }
        Ok(self.value(mu))
    }

    /// Checks the ignition structure on a uniform grid of `n` samples.
    pub fn check_ignition(&self, n: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        for i in 0..=n {
            let mu = i as f64 / n as f64;
            let (g, dg) = (self.eval)(mu);
            if !g.is_finite() || !dg.is_finite() {
                return fail(format!("G or G' not finite at {mu}"));
            }
            if mu <= self.theta && g != 0.0 {
                return fail(format!("G({mu}) = {g} below the threshold"));
            }
            if mu > self.theta && mu < 1.0 && !(g > 0.0) {
                return fail(format!("G({mu}) = {g} not positive"));
            }
        }
        if self.value(1.0) != 0.0 {
            return fail("G(1) != 0".into());
        }
        if !(self.derivative(1.0) < 0.0) {
            return fail("G'(1) must be negative".into());
        }
        Ok(())
    }
}

/// Maps a temperature reaction term `f(T)` (with derivative) to
/// `G(mu) = (m-2) mu f(mu^(1/(m-2)))`. `t_theta` is the temperature threshold.
pub fn g_from_f<F>(f: F, t_theta: f64, m: f64) -> Result<ReactionTerm>
where
    F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
{
    if !(m > 2.0) {
        return Err(Error::Parameter(format!("m = {m} must exceed 2")));
    }
    let k = 1.0 / (m - 2.0);
    let theta = t_theta.powf(m - 2.0);
    Ok(ReactionTerm::from_fn(theta, move |mu: f64| {
        if mu <= 0.0 {
            return (0.0, 0.0);
        }
        let t = mu.powf(k);
        let (fv, df) = f(t);
        // dT/dmu = T / ((m-2) mu)
        ((m - 2.0) * mu * fv, (m - 2.0) * fv + t * df)
    }))
}

/// Temperature reaction term whose transform is the default `G` family.
pub fn default_temperature_reaction(
    theta: f64,
    g0: f64,
    m: f64,
) -> impl Fn(f64) -> (f64, f64) + Send + Sync + 'static {
    move |t: f64| {
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        let mu = t.powf(m - 2.0);
        let (g, dg) = default_value(mu, theta, g0);
        let scale = (m - 2.0) * mu;
        let f = g / scale;
        // f = G/((m-2) mu); df/dT = (G' - G/mu) / ((m-2) mu) * dmu/dT
        let dmu_dt = (m - 2.0) * mu / t;
        let df = (dg - g / mu) / scale * dmu_dt;
        (f, df)
    }
}

/// `(epsilon, k)` lies in the open frequency set `k0 < k < eps^(eta - 1/(m-2))`.
pub fn regime_contains(epsilon: f64, k: f64, params: &ModelParams) -> bool {
    let upper = epsilon.powf(params.eta - params.inv_m2());
    k > params.k0 && k < upper
}

/// The same regime in `(epsilon, delta)` variables, capped by `delta0`.
pub fn delta_regime_contains(epsilon: f64, delta: f64, params: &ModelParams) -> bool {
    let m = params.m;
    let lower = epsilon.powf((1.0 - params.eta * (m - 2.0)) / (m - 1.0));
    lower < delta && delta < params.delta0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_reaction_values() {
        assert_eq!(g_default(0.5, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(g_default(1.0, 0.5, 1.0).unwrap(), 0.0);
        assert!((g_default(0.75, 0.5, 1.0).unwrap() - 0.015625).abs() < 1e-16);
        assert!(matches!(g_default(1.5, 0.5, 1.0), Err(Error::Domain { .. })));
        assert!(g_default(-0.1, 0.5, 1.0).is_err());
        let r = ReactionTerm::default_family(0.3, 2.0);
        assert!((r.derivative(1.0) + 2.0 * 0.7 * 0.7).abs() < 1e-14);
        r.check_ignition(1000).unwrap();
    }

    #[test]
    fn transform_of_temperature_terms() {
        let zero = g_from_f(|_| (0.0, 0.0), 0.5, 3.5).unwrap();
        for i in 0..=10 {
            assert_eq!(zero.value(i as f64 / 10.0), 0.0);
        }
        // m = 3: G(mu) = mu f(mu)
        let f = |t: f64| (t * t, 2.0 * t);
        let g = g_from_f(f, 0.0, 3.0).unwrap();
        assert!((g.value(0.7) - 0.7 * 0.49).abs() < 1e-14);
        // m = 4: f(T) = T^2 gives G(mu) = 2 mu^2
        let g = g_from_f(f, 0.0, 4.0).unwrap();
        assert!((g.value(0.6) - 2.0 * 0.36).abs() < 1e-14);
        assert!((g.derivative(0.6) - 4.0 * 0.6).abs() < 1e-12);
        assert!(g_from_f(f, 0.5, 2.0).is_err());
    }

    #[test]
    fn default_family_round_trips_through_transform() {
        let p = ModelParams::default();
        let t_theta = p.theta.powf(1.0 / (p.m - 2.0));
        let g = g_from_f(default_temperature_reaction(p.theta, p.g0, p.m), t_theta, p.m).unwrap();
        assert!((g.theta() - p.theta).abs() < 1e-14);
        g.check_ignition(2000).unwrap();
        let reference = p.reaction();
        for i in 0..=100 {
            let mu = i as f64 / 100.0;
            assert!((g.value(mu) - reference.value(mu)).abs() < 1e-14);
            assert!((g.derivative(mu) - reference.derivative(mu)).abs() < 1e-12);
        }
    }

    #[test]
    fn config_parsing() {
        let p = params_from_config("# comment\nm = 4\n  epsilon=1e-4 # trailing\n\n", ModelParams::default()).unwrap();
        assert_eq!(p.m, 4.0);
        assert_eq!(p.epsilon, 1e-4);
        assert_eq!(p.theta, 0.5);
        assert!(matches!(params_from_config("mm = 4", ModelParams::default()), Err(Error::Config(_))));
        assert!(matches!(params_from_config("m 4", ModelParams::default()), Err(Error::Config(_))));
        assert!(matches!(params_from_config("m = four", ModelParams::default()), Err(Error::Config(_))));
        for (k, v) in ModelParams::default().entries() {
            let mut q = ModelParams::default();
            q.set(k, v + 1.0).unwrap();
            assert_ne!(q, ModelParams::default());
        }
    }

    #[test]
    fn regime_boundaries() {
        let p = ModelParams::default();
        assert!(!regime_contains(1e-6, p.k0, &p));
        assert!(regime_contains(1e-6, 100.0, &p));
        let upper = 1e-6f64.powf(p.eta - p.inv_m2());
        assert!((upper - 2511.886).abs() < 1e-2);
        assert!(!regime_contains(1e-6, upper, &p));
        assert!(!delta_regime_contains(1e-6, p.delta0, &p));
        assert!(!delta_regime_contains(1e-3, 0.05, &p));
        assert!(delta_regime_contains(1e-30, 0.05, &p));
    }

    #[test]
    fn exponent_a() {
        let p = ModelParams::default();
        assert!((p.a() - 0.63).abs() < 1e-14);
        let q = ModelParams { eta: 1e-12, ..p };
        assert!((q.a() - 0.6).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn default_reaction_is_ignition(mu in 0.0f64..=1.0) {
            let g = g_default(mu, 0.5, 1.0).unwrap();
            prop_assert!(g >= 0.0);
            if mu <= 0.5 {
                prop_assert_eq!(g.to_bits(), 0.0f64.to_bits());
            }
        }

        #[test]
        fn regimes_agree(le in -12.0f64..-1.0, lk in 0.5f64..4.0) {
            let p = ModelParams::default();
            let eps = 10f64.powf(le);
            let k = 10f64.powf(lk);
            let delta = p.delta_of_k(k);
            if delta < p.delta0 {
                prop_assert_eq!(regime_contains(eps, k, &p), delta_regime_contains(eps, delta, &p));
            }
        }
    }
}
