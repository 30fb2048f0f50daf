//! Boundary-layer expansion `v = v0 + eps v1 + eps v2` of the maximal-decay
//! perturbation in layer coordinates `xi = x / eps`, where the linearized
//! problem reads `L v = eps h v` with
//!
//! `L = -q d2 + (c - 2 q'/(m-2)) d - q''`, `h = s - k^2 eps^(m/(m-2)) q^(m/(m-2))`.
//!
//! Functions live on a grid that is uniform in the layer variable
//! `t = ln(q - 1)`. Each cell carries eight Gauss–Legendre nodes so that the
//! nested Duhamel integrals are evaluated with spectral accuracy per cell.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{gl8_cumulative, gl8_rule};
use crate::wave::{WaveSolution, T_START};

/// Extra cells left of the launch point over which the Duhamel recursion
/// forgets its zero initial value.
const T_BURN: f64 = -90.0;
/// Default number of cells between the launch point and the exit.
pub const DEFAULT_CELLS: usize = 4000;

/// Rates `(r-, r+)` of `-eps r^2 + c r + (k^2 eps^(m/(m-2)) - s) = 0`.
pub fn characteristic_rates(epsilon: f64, k: f64, s: f64, c: f64, m: f64) -> Result<(f64, f64)> {
    let disc = c * c + 4.0 * epsilon * (k * k * epsilon.powf(m / (m - 2.0)) - s);
    if disc < 0.0 {
        return Err(Error::ComplexRates(disc));
    }
    let root = disc.sqrt();
    Ok(((c - root) / (2.0 * epsilon), (c + root) / (2.0 * epsilon)))
}

#[derive(Debug, Clone, Copy)]
struct Node {
    q: f64,
    dq: f64,
    ddq: f64,
    /// `dxi/dt`.
    dxi: f64,
    /// `dPhi/dt` with `Phi = int c/q dxi`.
    dphi: f64,
}

/// Function sampled at cell endpoints and at the Gauss nodes of every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ColdFn {
    pub ends: Vec<f64>,
    pub nodes: Vec<[f64; 8]>,
}

impl ColdFn {
    fn zeros(cells: usize) -> Self {
        ColdFn {
            ends: vec![0.0; cells + 1],
            nodes: vec![[0.0; 8]; cells],
        }
    }

    fn zip(&self, other: &ColdFn, f: impl Fn(f64, f64) -> f64) -> ColdFn {
        ColdFn {
            ends: self.ends.iter().zip(&other.ends).map(|(a, b)| f(*a, *b)).collect(),
            nodes: self
                .nodes
                .iter()
                .zip(&other.nodes)
                .map(|(a, b)| std::array::from_fn(|j| f(a[j], b[j])))
                .collect(),
        }
    }

    fn scale(&self, k: f64) -> ColdFn {
        self.zip(self, |a, _| k * a)
    }

    /// Value at the exit (right end of the grid).
    pub fn exit(&self) -> f64 {
        *self.ends.last().unwrap()
    }
}

/// Solution of `L f = g` together with `f' = df/dxi`.
#[derive(Debug, Clone)]
pub struct Duhamel {
    pub f: ColdFn,
    pub df: ColdFn,
}

/// Layer grid of one wave between `t = -90` and the exit `xi_eps`.
#[derive(Debug, Clone)]
pub struct ColdGrid {
    pub epsilon: f64,
    pub c: f64,
    pub m: f64,
    /// Cell endpoints in `t`.
    pub ts: Vec<f64>,
    /// `xi` at the cell endpoints.
    pub xis: Vec<f64>,
    /// First endpoint at the maximal-decay launch point.
    pub start: usize,
    pub xi_eps: f64,
    step: f64,
    ends: Vec<Node>,
    nodes: Vec<[Node; 8]>,
    node_t: Vec<[f64; 8]>,
    cumulative: [[f64; 8]; 8],
}

impl ColdGrid {
    /// Grid with `cells` cells between the launch point and `xi_eps = x_eps / eps`.
    pub fn new(wave: &WaveSolution, cells: usize) -> Result<Self> {
        if !(wave.epsilon > 0.0) {
            return Err(Error::Parameter("the layer grid needs epsilon > 0".into()));
        }
        let eps = wave.epsilon;
        let t_exit = wave.t_of_x(wave.x_eps)?;
        let step = (t_exit - T_START) / cells as f64;
        let burn = ((T_START - T_BURN) / step).ceil() as usize;
        let total = burn + cells;
        let ts: Vec<f64> = (0..=total)
            .map(|i| T_START + (i as f64 - burn as f64) * step)
            .collect();
        let node_at = |t: f64| {
            let lp = wave.layer_at(t);
            let dxi = lp.dx_dt / eps;
            Node {
                q: lp.q,
                dq: lp.dq,
                ddq: lp.ddq,
                dxi,
                dphi: wave.c / lp.q * dxi,
            }
        };
        let rule = gl8_rule();
        let ends: Vec<Node> = ts.iter().map(|&t| node_at(t)).collect();
        let mut nodes = Vec::with_capacity(total);
        let mut node_t = Vec::with_capacity(total);
        for i in 0..total {
            let mid = 0.5 * (ts[i] + ts[i + 1]);
            let tj: [f64; 8] = std::array::from_fn(|j| mid + 0.5 * step * rule[j].0);
            nodes.push(std::array::from_fn(|j| node_at(tj[j])));
            node_t.push(tj);
        }
        let xi_eps = wave.x_eps / eps;
        let mut xis = vec![xi_eps; total + 1];
        for i in (0..total).rev() {
            let w: f64 = (0..8).map(|j| rule[j].1 * nodes[i][j].dxi).sum();
            xis[i] = xis[i + 1] - 0.5 * step * w;
        }
        Ok(ColdGrid {
            epsilon: eps,
            c: wave.c,
            m: wave.m(),
            ts,
            xis,
            start: burn,
            xi_eps,
            step,
            ends,
            nodes,
            node_t,
            cumulative: gl8_cumulative(),
        })
    }

    pub fn cells(&self) -> usize {
        self.nodes.len()
    }

    /// Samples a function of `(t, q, q', q'')` on the grid.
    pub fn sample(&self, f: impl Fn(f64, f64, f64, f64) -> f64) -> ColdFn {
        ColdFn {
            ends: self
                .ts
                .iter()
                .zip(&self.ends)
                .map(|(&t, n)| f(t, n.q, n.dq, n.ddq))
                .collect(),
            nodes: self
                .node_t
                .iter()
                .zip(&self.nodes)
                .map(|(tj, nj)| std::array::from_fn(|j| f(tj[j], nj[j].q, nj[j].dq, nj[j].ddq)))
                .collect(),
        }
    }

    /// `q'` on the grid.
    pub fn dq(&self) -> ColdFn {
        self.sample(|_, _, dq, _| dq)
    }

    /// `q''` on the grid.
    pub fn ddq(&self) -> ColdFn {
        self.sample(|_, _, _, ddq| ddq)
    }

    /// `xi` on the grid.
    pub fn xi(&self) -> ColdFn {
        let mut out = ColdFn::zeros(self.cells());
        out.ends = self.xis.clone();
        for i in 0..self.cells() {
            for j in 0..8 {
                let acc: f64 = (0..8)
                    .map(|l| self.cumulative[j][l] * self.nodes[i][l].dxi)
                    .sum();
                out.nodes[i][j] = self.xis[i] + 0.5 * self.step * acc;
            }
        }
        out
    }

    /// Maximal-decay solution of `L f = g` with `f(xi_eps) = 0`:
    ///
    /// `f = q' int_xi^xi_eps ( int_-inf^z exp(Phi(eta) - Phi(z)) g / (q q') d eta ) dz`.
    pub fn duhamel(&self, g: &ColdFn) -> Duhamel {
        let n = self.cells();
        let h2 = 0.5 * self.step;
        let rule = gl8_rule();
        let s = &self.cumulative;
        let mut inner = ColdFn::zeros(n);
        for i in 0..n {
            let nd = &self.nodes[i];
            let mut dphi = [0.0; 8];
            let mut r = [0.0; 8];
            for j in 0..8 {
                dphi[j] = h2 * (0..8).map(|l| s[j][l] * nd[l].dphi).sum::<f64>();
            }
            for l in 0..8 {
                r[l] = dphi[l].exp() * g.nodes[i][l] / (nd[l].q * nd[l].dq) * nd[l].dxi;
            }
            let i0 = inner.ends[i];
            for j in 0..8 {
                let acc: f64 = (0..8).map(|l| s[j][l] * r[l]).sum();
                inner.nodes[i][j] = (-dphi[j]).exp() * (i0 + h2 * acc);
            }
            let cell_phi = h2 * (0..8).map(|l| rule[l].1 * nd[l].dphi).sum::<f64>();
            let acc: f64 = (0..8).map(|l| rule[l].1 * r[l]).sum();
            inner.ends[i + 1] = (-cell_phi).exp() * (i0 + h2 * acc);
        }
        let mut outer = ColdFn::zeros(n);
        for i in (0..n).rev() {
            let nd = &self.nodes[i];
            let integrand: [f64; 8] = std::array::from_fn(|l| inner.nodes[i][l] * nd[l].dxi);
            let f1 = outer.ends[i + 1];
            for j in 0..8 {
                let acc: f64 = (0..8).map(|l| (rule[l].1 - s[j][l]) * integrand[l]).sum();
                outer.nodes[i][j] = f1 + h2 * acc;
            }
            let acc: f64 = (0..8).map(|l| rule[l].1 * integrand[l]).sum();
            outer.ends[i] = f1 + h2 * acc;
        }
        let dq = self.dq();
        let ddq = self.ddq();
        let f = dq.zip(&outer, |a, b| a * b);
        let df = ddq
            .zip(&outer, |a, b| a * b)
            .zip(&dq.zip(&inner, |a, b| a * b), |a, b| a - b);
        Duhamel { f, df }
    }

    /// `L f` from samples of `f`, `f'` at cell endpoints, differentiating `f'`
    /// with a fourth-order centered stencil in `t`. Interior endpoints only
    /// (the two outermost on each side are set to zero).
    pub fn apply_operator(&self, f: &[f64], df: &[f64]) -> Vec<f64> {
        let n = self.ts.len();
        let k = 1.0 / (self.m - 2.0);
        let mut out = vec![0.0; n];
        for i in 2..n.saturating_sub(2) {
            let d_t = (df[i - 2] - 8.0 * df[i - 1] + 8.0 * df[i + 1] - df[i + 2]) / (12.0 * self.step);
            let e = &self.ends[i];
            let ddf = d_t / e.dxi;
            out[i] = -e.q * ddf + (self.c - 2.0 * k * e.dq) * df[i] - e.ddq * f[i];
        }
        out
    }

    /// `h = s - k^2 eps^(m/(m-2)) q^(m/(m-2))`.
    pub fn h(&self, s: f64, k: f64) -> ColdFn {
        let e = self.m / (self.m - 2.0);
        let kappa = k * k * self.epsilon.powf(e);
        self.sample(|_, q, _, _| s - kappa * q.powf(e))
    }
}

/// Three-term expansion of the maximal-decay perturbation.
#[derive(Debug, Clone)]
pub struct ColdExpansion {
    /// `xi` on `[xi_start, xi_eps]`.
    pub xi: Vec<f64>,
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub dv0: Vec<f64>,
    pub dv1: Vec<f64>,
    pub dv2: Vec<f64>,
    pub h: Vec<f64>,
    pub s: f64,
    pub sigma: f64,
    pub k: f64,
    pub epsilon: f64,
    /// `v(xi_eps) = 1`.
    pub exit_value: f64,
    /// `v'(xi_eps) = v0' + eps v1' + eps v2'`.
    pub exit_slope: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

impl ColdExpansion {
    /// `(||v0||, ||eps v1||, ||eps v2||)` in sup norm.
    pub fn norms(&self) -> (f64, f64, f64) {
        (
            sup(&self.v0),
            self.epsilon * sup(&self.v1),
            self.epsilon * sup(&self.v2),
        )
    }

    /// `max |h/s - 1|` over the grid.
    pub fn h_uniformity(&self) -> f64 {
        self.h.iter().fold(0.0, |a, h| a.max((h / self.s - 1.0).abs()))
    }
}

/// `s = (m-2) c sigma k^(1 - 1/(m-1))`.
pub fn s_of_sigma(sigma: f64, c: f64, k: f64, m: f64) -> f64 {
    (m - 2.0) * c * sigma * k.powf(1.0 - 1.0 / (m - 1.0))
}

struct Terms {
    v0: Duhamel,
    v1: Duhamel,
    w1: Duhamel,
    w2: Duhamel,
    h: ColdFn,
}

fn expansion_terms(grid: &ColdGrid, s: f64, k: f64) -> Terms {
    let eps = grid.epsilon;
    let norm = grid.dq().exit();
    let v0 = Duhamel {
        f: grid.dq().scale(1.0 / norm),
        df: grid.ddq().scale(1.0 / norm),
    };
    let h = grid.h(s, k);
    let v1 = grid.duhamel(&h.zip(&v0.f, |a, b| a * b));
    // v2 = M^-1 L^-1 (eps h v1) with M^-1 ~ Id + eps L^-1 h
    let w1 = grid.duhamel(&h.zip(&v1.f, |a, b| eps * a * b));
    let w2 = grid.duhamel(&h.zip(&w1.f, |a, b| eps * a * b));
    Terms { v0, v1, w1, w2, h }
}

/// Builds the expansion on an existing grid.
pub fn build_expansion_on(grid: &ColdGrid, s: f64, k: f64, params: &ModelParams) -> Result<ColdExpansion> {
    let eps = grid.epsilon;
    let terms = expansion_terms(grid, s, k);
    let from = grid.start;
    let cut = |f: &ColdFn| f.ends[from..].to_vec();
    let v2 = terms.w1.f.zip(&terms.w2.f, |a, b| a + b);
    let dv2 = terms.w1.df.zip(&terms.w2.df, |a, b| a + b);
    let exit_slope = terms.v0.df.exit() + eps * terms.v1.df.exit() + eps * dv2.exit();
    let kexp = 1.0 - 1.0 / (params.m - 1.0);
    let exp = ColdExpansion {
        xi: grid.xis[from..].to_vec(),
        v0: cut(&terms.v0.f),
        v1: cut(&terms.v1.f),
        v2: cut(&v2),
        dv0: cut(&terms.v0.df),
        dv1: cut(&terms.v1.df),
        dv2: cut(&dv2),
        h: cut(&terms.h),
        s,
        sigma: s / ((params.m - 2.0) * grid.c * k.powf(kexp)),
        k,
        epsilon: eps,
        exit_value: terms.v0.f.exit() + eps * terms.v1.f.exit() + eps * v2.exit(),
        exit_slope,
    };
    let (n0, n1, n2) = exp.norms();
    if !(n2 <= n1 && n1 <= n0) {
        return Err(Error::Regime {
            epsilon: eps,
            k,
        });
    }
    Ok(exp)
}

/// Expansion for the eigenvalue candidate `s` at wavenumber `k`.
pub fn build_expansion(s: f64, k: f64, wave: &WaveSolution, params: &ModelParams) -> Result<ColdExpansion> {
    let grid = ColdGrid::new(wave, DEFAULT_CELLS)?;
    build_expansion_on(&grid, s, k, params)
}

/// Exit pair `(v(xi_eps), v'(xi_eps)) = (1, slope)` in layer units.
pub fn exit_conditions(s: f64, k: f64, wave: &WaveSolution, params: &ModelParams) -> Result<(f64, f64)> {
    let e = build_expansion(s, k, wave, params)?;
    Ok((e.exit_value, e.exit_slope))
}

/// `d(slope)/d sigma` on a given grid, by differentiating every term of the
/// expansion in `s` and using `ds/dsigma = (m-2) c k^(1 - 1/(m-1))`.
pub fn exit_sigma_derivative_on(grid: &ColdGrid, sigma: f64, k: f64, params: &ModelParams) -> f64 {
    let eps = grid.epsilon;
    let ds = s_of_sigma(1.0, grid.c, k, params.m);
    let s = sigma * ds;
    let t = expansion_terms(grid, s, k);
    let d_v1 = grid.duhamel(&t.v0.f);
    let d_w1 = grid.duhamel(
        &t.v1
            .f
            .zip(&t.h.zip(&d_v1.f, |a, b| a * b), |a, b| eps * (a + b)),
    );
    let d_w2 = grid.duhamel(
        &t.w1
            .f
            .zip(&t.h.zip(&d_w1.f, |a, b| a * b), |a, b| eps * (a + b)),
    );
    ds * eps * (d_v1.df.exit() + d_w1.df.exit() + d_w2.df.exit())
}

pub fn exit_sigma_derivative(sigma: f64, k: f64, wave: &WaveSolution, params: &ModelParams) -> Result<f64> {
    let grid = ColdGrid::new(wave, DEFAULT_CELLS)?;
    Ok(exit_sigma_derivative_on(&grid, sigma, k, params))
}

/// Leading term `-(m-2) eps k^(1 - 1/(m-1))` of the exit-slope derivative.
pub fn leading_sigma_derivative(epsilon: f64, k: f64, m: f64) -> f64 {
    -(m - 2.0) * epsilon * k.powf(1.0 - 1.0 / (m - 1.0))
}
