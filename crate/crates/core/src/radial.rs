//! Radial grids on the half-axis, sampled radial profiles, the operators
//! `T_l = -d²/dr² + l(l+1)/r²`, the Green kernel of `T_l` and the two
//! half-axis scalar products.
//!
//! The default grid is the softplus map `r = c·ln(1 + eˣ)` on a uniform `x`
//! grid: geometric near the origin (ratio `e^{Δx}`) and uniform with spacing
//! `c·Δx` in the tail. Full-range integrals use the trapezoid rule in `x`,
//! which is spectrally accurate for integrands that are smooth in `r`; the
//! part of the `x`-axis below the first node is summed exactly as a virtual
//! tail and folded onto the first two nodes by linear extrapolation in `r`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fornberg_weights, gauss_legendre, least_squares, locate, stencil_start};

const FD_WIDTH: usize = 7;
const FD_WIDTH_LOW: usize = 5;
const CELL_WIDTH: usize = 6;
const INTERP_WIDTH: usize = 8;
const FIT_NODES: usize = 8;

/// Parameters of the default graded grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    /// Truncation radius.
    pub r_max: f64,
    /// Number of nodes.
    pub nodes: usize,
    /// First node.
    pub r_min: f64,
    /// Softplus length scale `c`; the tail spacing is `c·Δx`.
    pub scale: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            r_max: 40.0,
            nodes: 2048,
            r_min: 1e-4,
            scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Stencil<const N: usize> {
    start: usize,
    w: [f64; N],
}

impl<const N: usize> Stencil<N> {
    #[inline]
    fn apply(&self, f: &[f64]) -> f64 {
        let s = &f[self.start..self.start + N];
        let mut acc = 0.0;
        for k in 0..N {
            acc += self.w[k] * s[k];
        }
        acc
    }
}

/// Increasing positive nodes on `(0, r_max]` with quadrature and
/// differentiation tables.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
    d1: Vec<Stencil<FD_WIDTH>>,
    d2: Vec<Stencil<FD_WIDTH>>,
    d2_low: Vec<Stencil<FD_WIDTH_LOW>>,
    cells: Vec<Stencil<CELL_WIDTH>>,
    head: Stencil<CELL_WIDTH>,
    fit: [[f64; FIT_NODES]; 4],
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.weights == other.weights
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn inverse_softplus(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl RadialGrid {
    /// The default graded grid.
    pub fn mapped(params: &GridParams) -> Result<Self> {
        let GridParams {
            r_max,
            nodes: n,
            r_min,
            scale: c,
        } = *params;
        if !(n >= 16 && r_min > 0.0 && r_max > r_min && c > 0.0) {
            return Err(Error::Config(format!("invalid radial grid parameters {params:?}")));
        }
        let x0 = inverse_softplus(r_min / c);
        let x1 = inverse_softplus(r_max / c);
        let dx = (x1 - x0) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| c * softplus(x0 + i as f64 * dx)).collect();
        nodes[0] = r_min;
        nodes[n - 1] = r_max;
        let mut weights: Vec<f64> = (0..n).map(|i| dx * c * logistic(x0 + i as f64 * dx)).collect();
        weights[n - 1] *= 0.5;
        // Virtual trapezoid nodes below the first one.
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 1.. {
            let x = x0 - k as f64 * dx;
            let w = dx * c * logistic(x);
            if w < 1e-40 {
                break;
            }
            s1 += w;
            s2 += w * c * softplus(x);
        }
        let (r0, r1) = (nodes[0], nodes[1]);
        let slope = (s2 - r0 * s1) / (r1 - r0);
        weights[0] += s1 - slope;
        weights[1] += slope;
        let mut grid = Self::build(nodes, r_max)?;
        grid.weights = weights;
        Ok(grid)
    }

    /// Grid on arbitrary increasing nodes; full-range weights come from the
    /// composite sixth-order cell rule.
    pub fn from_nodes(nodes: Vec<f64>, r_max: f64) -> Result<Self> {
        let mut grid = Self::build(nodes, r_max)?;
        let n = grid.nodes.len();
        let mut w = vec![0.0; n];
        for st in std::iter::once(&grid.head).chain(grid.cells.iter()) {
            for k in 0..CELL_WIDTH {
                w[st.start + k] += st.w[k];
            }
        }
        grid.weights = w;
        Ok(grid)
    }

    fn build(nodes: Vec<f64>, r_max: f64) -> Result<Self> {
        let n = nodes.len();
        if n < 16 {
            return Err(Error::Config("radial grid needs at least 16 nodes".into()));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) || !nodes.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("radial nodes must be positive, finite and strictly increasing".into()));
        }
        if r_max < nodes[n - 1] {
            return Err(Error::Config("r_max lies inside the grid".into()));
        }
        let mk = |i: usize, width: usize, deriv: usize| -> (usize, Vec<f64>) {
            let start = stencil_start(n, i, width);
            let w = fornberg_weights(nodes[i], &nodes[start..start + width], deriv);
            (start, w[deriv].clone())
        };
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        let mut d2_low = Vec::with_capacity(n);
        for i in 0..n {
            let (s, w) = mk(i, FD_WIDTH, 1);
            d1.push(Stencil { start: s, w: w.try_into().unwrap() });
            let (s, w) = mk(i, FD_WIDTH, 2);
            d2.push(Stencil { start: s, w: w.try_into().unwrap() });
            let (s, w) = mk(i, FD_WIDTH_LOW, 2);
            d2_low.push(Stencil { start: s, w: w.try_into().unwrap() });
        }
        let (gx, gw) = gauss_legendre(4);
        let cell_rule = |a: f64, b: f64, start: usize| -> Stencil<CELL_WIDTH> {
            let mut w = [0.0; CELL_WIDTH];
            let half = 0.5 * (b - a);
            for (t, wt) in gx.iter().zip(&gw) {
                let z = a + half * (t + 1.0);
                let c = fornberg_weights(z, &nodes[start..start + CELL_WIDTH], 0);
                for k in 0..CELL_WIDTH {
                    w[k] += half * wt * c[0][k];
                }
            }
            Stencil { start, w }
        };
        let head = cell_rule(0.0, nodes[0], 0);
        let cells = (0..n - 1)
            .map(|i| {
                let start = (i.saturating_sub(CELL_WIDTH / 2 - 1)).min(n - CELL_WIDTH);
                cell_rule(nodes[i], nodes[i + 1], start)
            })
            .collect();
        // Least-squares cubic through the first FIT_NODES samples, in the
        // scaled variable t = r / r_last for conditioning.
        let scale = nodes[FIT_NODES - 1];
        let rows: Vec<Vec<f64>> = nodes[..FIT_NODES]
            .iter()
            .map(|&r| (0..4).map(|j| (r / scale).powi(j)).collect())
            .collect();
        let mut fit = [[0.0; FIT_NODES]; 4];
        for i in 0..FIT_NODES {
            let mut e = vec![0.0; FIT_NODES];
            e[i] = 1.0;
            let coef = least_squares(&rows, &e).ok_or_else(|| Error::Config("degenerate endpoint fit".into()))?;
            for j in 0..4 {
                fit[j][i] = coef[j] / scale.powi(j as i32);
            }
        }
        Ok(RadialGrid {
            nodes,
            weights: Vec::new(),
            r_max,
            d1,
            d2,
            d2_low,
            cells,
            head,
            fit,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Spacing of the last cell, the coarsest spacing on the default grid.
    pub fn tail_spacing(&self) -> f64 {
        let n = self.nodes.len();
        self.nodes[n - 1] - self.nodes[n - 2]
    }

    /// Node indices away from the one-sided difference closures.
    pub fn interior(&self) -> std::ops::Range<usize> {
        FD_WIDTH / 2..self.nodes.len() - FD_WIDTH / 2
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other) || self == other
    }

    /// `Σ w_i f_i` over the grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        self.d1.iter().map(|s| s.apply(f)).collect()
    }

    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        self.d2.iter().map(|s| s.apply(f)).collect()
    }

    fn second_derivative_low(&self, f: &[f64]) -> Vec<f64> {
        self.d2_low.iter().map(|s| s.apply(f)).collect()
    }

    /// `F_i = ∫_0^{r_i} f dr` with local sixth-order interpolants; the piece
    /// below the first node is extrapolated.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(f.len());
        let mut acc = self.head.apply(f);
        out.push(acc);
        for cell in &self.cells {
            acc += cell.apply(f);
            out.push(acc);
        }
        out
    }

    /// `G_i = ∫_{r_i}^{r_last} f dr`.
    pub fn cumulative_from_right(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        for i in (0..n - 1).rev() {
            acc += self.cells[i].apply(f);
            out[i] = acc;
        }
        out
    }

    /// `G_i = ∫_{r_i}^{r_last} h(r) r^{-p} dr` for each profile in `hs`, with
    /// `h` interpolated locally and the power treated exactly. Suited to
    /// integrands that are singular at the origin while `h` is smooth.
    pub fn cumulative_from_right_weighted(&self, hs: &[&[f64]], p: i32) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        let (gx, gw) = gauss_legendre(8);
        let cells: Vec<Stencil<CELL_WIDTH>> = (0..n - 1)
            .map(|i| {
                let start = self.cells[i].start;
                let (a, b) = (self.nodes[i], self.nodes[i + 1]);
                let half = 0.5 * (b - a);
                let mut w = [0.0; CELL_WIDTH];
                for (t, wt) in gx.iter().zip(&gw) {
                    let z = a + half * (t + 1.0);
                    let c = fornberg_weights(z, &self.nodes[start..start + CELL_WIDTH], 0);
                    let scale = half * wt * z.powi(-p);
                    for k in 0..CELL_WIDTH {
                        w[k] += scale * c[0][k];
                    }
                }
                Stencil { start, w }
            })
            .collect();
        hs.iter()
            .map(|h| {
                let mut out = vec![0.0; n];
                let mut acc = 0.0;
                for i in (0..n - 1).rev() {
                    acc += cells[i].apply(h);
                    out[i] = acc;
                }
                out
            })
            .collect()
    }

    /// Cubic Taylor coefficients `[u(0), u'(0), u''(0), u'''(0)]` from the
    /// least-squares fit to the first nodes.
    pub fn fit_endpoint(&self, f: &[f64]) -> EndpointData {
        let c: Vec<f64> = (0..4)
            .map(|j| self.fit[j].iter().zip(&f[..FIT_NODES]).map(|(a, b)| a * b).sum())
            .collect();
        EndpointData {
            value: c[0],
            slope: c[1],
            curvature: 2.0 * c[2],
            third: 6.0 * c[3],
        }
    }

    /// Local interpolation weights for value, first and second derivative at
    /// `r` inside `[r_0, r_last]`.
    fn interp_weights(&self, r: f64) -> (usize, Vec<Vec<f64>>) {
        let n = self.nodes.len();
        let cell = locate(&self.nodes, r);
        let start = (cell + 1).saturating_sub(INTERP_WIDTH / 2).min(n - INTERP_WIDTH);
        let w = fornberg_weights(r, &self.nodes[start..start + INTERP_WIDTH], 2);
        (start, w)
    }
}

/// Taylor data of a profile at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EndpointData {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
    pub third: f64,
}

impl EndpointData {
    fn eval(&self, r: f64) -> [f64; 3] {
        [
            self.value + r * (self.slope + r * (0.5 * self.curvature + r * self.third / 6.0)),
            self.slope + r * (self.curvature + 0.5 * r * self.third),
            self.curvature + r * self.third,
        ]
    }
}

/// Behaviour of a profile beyond `r_max`, used to close integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decay {
    /// Faster than any power; integrands must be negligible at `r_max`.
    Exponential,
    /// `~ r^{-k}`; tails are added analytically.
    Power(f64),
    /// Oscillatory or unknown; no tail correction and no check.
    Unknown,
}

/// Finite-difference error estimate attached to derived profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyNote {
    pub estimate: f64,
    pub flagged: bool,
}

const FD_ACCURACY_LIMIT: f64 = 1e-6;

/// A radial profile sampled on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    endpoint: EndpointData,
    decay: Decay,
    accuracy: Option<AccuracyNote>,
}

impl RadialFunction {
    pub fn from_samples(grid: Arc<RadialGrid>, values: Vec<f64>, decay: Decay) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at node {bad}")));
        }
        let endpoint = grid.fit_endpoint(&values);
        Ok(RadialFunction {
            grid,
            values,
            endpoint,
            decay,
            accuracy: None,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Arc<RadialGrid>, decay: Decay, f: F) -> Self {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::from_samples(grid.clone(), values, decay).expect("sample count matches grid")
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self::from_fn(grid, Decay::Exponential, |_| 0.0)
    }

    /// Replace the fitted endpoint data by known values.
    pub fn with_endpoint(mut self, endpoint: EndpointData) -> Self {
        self.endpoint = endpoint;
        self
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = decay;
        self
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn endpoint(&self) -> EndpointData {
        self.endpoint
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn accuracy(&self) -> Option<AccuracyNote> {
        self.accuracy
    }

    pub fn derivative(&self) -> Vec<f64> {
        self.grid.derivative(&self.values)
    }

    pub fn second_derivative(&self) -> Vec<f64> {
        self.grid.second_derivative(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    fn check_grid(&self, other: &RadialFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Grid("profiles live on different radial grids".into()))
        }
    }

    /// `a·self + b·other`; the decay class is the slower of the two.
    pub fn combine(&self, a: f64, other: &RadialFunction, b: f64) -> Result<RadialFunction> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let decay = slower_decay(self.decay, other.decay);
        RadialFunction::from_samples(self.grid.clone(), values, decay)
    }

    pub fn scaled(&self, a: f64) -> RadialFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out.endpoint = EndpointData {
            value: a * self.endpoint.value,
            slope: a * self.endpoint.slope,
            curvature: a * self.endpoint.curvature,
            third: a * self.endpoint.third,
        };
        out
    }

    /// Value and first two derivatives at an arbitrary radius. Below the
    /// first node the endpoint Taylor polynomial is used; beyond `r_max`
    /// the decay class decides.
    pub fn eval_with_derivatives(&self, r: f64) -> [f64; 3] {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        if r < nodes[0] {
            return self.endpoint.eval(r);
        }
        if r > nodes[n - 1] {
            return match self.decay {
                Decay::Power(k) => {
                    let r_last = nodes[n - 1];
                    let u = self.values[n - 1] * (r_last / r).powf(k);
                    [u, -k * u / r, k * (k + 1.0) * u / (r * r)]
                }
                _ => [0.0; 3],
            };
        }
        let (start, w) = self.grid.interp_weights(r);
        let s = &self.values[start..start + INTERP_WIDTH];
        let mut out = [0.0; 3];
        for d in 0..3 {
            out[d] = w[d].iter().zip(s).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_with_derivatives(r)[0]
    }
}

fn slower_decay(a: Decay, b: Decay) -> Decay {
    match (a, b) {
        (Decay::Unknown, _) | (_, Decay::Unknown) => Decay::Unknown,
        (Decay::Power(x), Decay::Power(y)) => Decay::Power(x.min(y)),
        (Decay::Power(x), _) | (_, Decay::Power(x)) => Decay::Power(x),
        _ => Decay::Exponential,
    }
}

/// `T_l^{-1}(r, s)`, the Green kernel of `T_l` with regular behaviour at the
/// origin and decay at infinity.
pub fn tl_inverse_kernel(l: usize, r: f64, s: f64) -> f64 {
    let li = l as i32;
    let (lo, hi) = if r >= s { (s, r) } else { (r, s) };
    lo.powi(li + 1) / hi.powi(li) / (2 * l + 1) as f64
}

/// `T_l u = -u'' + l(l+1) u / r²`.
pub fn apply_tl(l: usize, u: &RadialFunction) -> RadialFunction {
    let grid = u.grid();
    let ll = (l * (l + 1)) as f64;
    let d2 = u.second_derivative();
    let d2_low = grid.second_derivative_low(u.values());
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(u.values())
        .zip(&d2)
        .map(|((&r, &v), &dd)| -dd + ll * v / (r * r))
        .collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let est = grid
        .interior()
        .map(|i| (d2[i] - d2_low[i]).abs())
        .fold(0.0f64, f64::max)
        / scale;
    let decay = match u.decay() {
        Decay::Power(k) => Decay::Power(k + 2.0),
        d => d,
    };
    let mut out = RadialFunction::from_samples(grid.clone(), values, decay).expect("finite samples");
    let flagged = est > FD_ACCURACY_LIMIT;
    if flagged {
        log::warn!("T_{l}: finite-difference error estimate {est:.2e} exceeds {FD_ACCURACY_LIMIT:.0e}; refine the grid");
    }
    out.accuracy = Some(AccuracyNote { estimate: est, flagged });
    out
}

/// `u(r) = ∫ T_l^{-1}(r, s) f(s) ds`, written as two cumulative integrals.
pub fn apply_tl_inverse(l: usize, f: &RadialFunction) -> RadialFunction {
    let grid = f.grid();
    let li = l as i32;
    let nodes = grid.nodes();
    let inner: Vec<f64> = nodes.iter().zip(f.values()).map(|(&s, &v)| s.powi(li + 1) * v).collect();
    let outer: Vec<f64> = nodes.iter().zip(f.values()).map(|(&s, &v)| v / s.powi(li)).collect();
    let lower = grid.cumulative(&inner);
    let mut upper = grid.cumulative_from_right(&outer);
    if let Decay::Power(k) = f.decay() {
        let n = nodes.len();
        let p = k + l as f64;
        if p > 1.0 {
            let tail = outer[n - 1] * nodes[n - 1] / (p - 1.0);
            upper.iter_mut().for_each(|v| *v += tail);
        }
    }
    let c = 1.0 / (2 * l + 1) as f64;
    let values = nodes
        .iter()
        .zip(lower.iter().zip(&upper))
        .map(|(&r, (lo, up))| c * (lo / r.powi(li) + r.powi(li + 1) * up))
        .collect();
    let decay = match f.decay() {
        Decay::Unknown => Decay::Unknown,
        _ => Decay::Power(l as f64),
    };
    RadialFunction::from_samples(grid.clone(), values, decay).expect("finite samples")
}

const TRUNCATION_LIMIT: f64 = 1e-12;

fn close_integral(grid: &RadialGrid, integrand: &[f64], decay: Decay, extra_power: f64) -> Result<f64> {
    let n = integrand.len();
    let body = grid.integrate(integrand);
    match decay {
        Decay::Exponential => {
            let peak = integrand.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let last = integrand[n - 1].abs();
            if last > TRUNCATION_LIMIT * peak {
                return Err(Error::Accuracy(format!(
                    "integrand at r_max is {:.2e} of its peak; extend the grid",
                    last / peak
                )));
            }
            Ok(body)
        }
        Decay::Power(p) => {
            let p = p + extra_power;
            if p <= 1.0 {
                return Err(Error::Domain(format!("integrand decays like r^-{p}, not integrable")));
            }
            Ok(body + integrand[n - 1] * grid.r_max() / (p - 1.0))
        }
        Decay::Unknown => Ok(body),
    }
}

fn product_decay(a: Decay, b: Decay) -> Decay {
    match (a, b) {
        (Decay::Exponential, _) | (_, Decay::Exponential) => Decay::Exponential,
        (Decay::Power(x), Decay::Power(y)) => Decay::Power(x + y),
        _ => Decay::Unknown,
    }
}

/// `(u, v) = ∫_0^∞ u v dr`.
pub fn inner_plain(u: &RadialFunction, v: &RadialFunction) -> Result<f64> {
    u.check_grid(v)?;
    let integrand: Vec<f64> = u.values.iter().zip(&v.values).map(|(a, b)| a * b).collect();
    close_integral(&u.grid, &integrand, product_decay(u.decay, v.decay), 0.0)
}

/// Relative size of `u(0)` that still counts as vanishing.
pub const ORIGIN_TOLERANCE: f64 = 1e-6;

fn check_vanishing_at_origin(u: &RadialFunction) -> Result<()> {
    let scale = u.max_abs();
    if u.endpoint.value.abs() > ORIGIN_TOLERANCE * scale {
        return Err(Error::Domain(format!(
            "profile does not vanish at the origin (u(0) = {:.3e})",
            u.endpoint.value
        )));
    }
    Ok(())
}

/// `⟨u, v⟩_l = ∫_0^∞ (u' v' + l(l+1) u v / r²) dr`.
pub fn inner_angle(l: usize, u: &RadialFunction, v: &RadialFunction) -> Result<f64> {
    u.check_grid(v)?;
    check_vanishing_at_origin(u)?;
    check_vanishing_at_origin(v)?;
    let ll = (l * (l + 1)) as f64;
    let du = u.derivative();
    let dv = v.derivative();
    let integrand: Vec<f64> = u
        .grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| du[i] * dv[i] + ll * u.values[i] * v.values[i] / (r * r))
        .collect();
    close_integral(&u.grid, &integrand, product_decay(u.decay, v.decay), 2.0)
}
