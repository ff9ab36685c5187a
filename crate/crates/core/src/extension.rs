//! The one-parameter family of self-adjoint extensions `Ť_{1κ}` of the l = 1
//! radial operator, its generalised eigenfunctions and the spectral
//! transform pair that diagonalises it.
//!
//! For finite κ the extension acts as `Ť_{1κ} u = T_1 u - (2/r) u'(0)` on
//! profiles with `u(0) = 0` and `3u''(0) = 4κ u'(0)`. Its continuum kernel is
//!
//! `p(λ, r) = 2/(√(2π) λ²) · [-λ sin(ζ + λr) - (cos(ζ + λr) - cos ζ)/r]`
//!
//! with phase `ζ = -atan2(κ, λ)`. For κ < 0 there is one bound state
//! `q(r) = C (κ e^{κr} + (1 - e^{κr})/r)`, `C = √(-2/κ³)`, with eigenvalue
//! `-κ²`. The Friedrichs member (κ = ∞) is the free kernel
//! `p_{1λ}(r) = -√(2/π) r j_1(λr)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::radial::{apply_tl, AccuracyNote, Decay, RadialFunction, RadialGrid, ORIGIN_TOLERANCE};
use crate::special::{oscillatory_tail, spherical_jn};

const SERIES_SWITCH: f64 = 0.5;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Extension parameter: a finite κ (inverse length) or the Friedrichs case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtensionParam {
    Finite(f64),
    Free,
}

impl ExtensionParam {
    pub fn kappa(&self) -> Option<f64> {
        match self {
            ExtensionParam::Finite(k) => Some(*k),
            ExtensionParam::Free => None,
        }
    }

    pub fn has_discrete(&self) -> bool {
        matches!(self, ExtensionParam::Finite(k) if *k < 0.0)
    }

    /// `(sin ζ, cos ζ)` at spectral parameter λ.
    fn phase(&self, lambda: f64) -> (f64, f64) {
        match self {
            ExtensionParam::Finite(k) => {
                let h = lambda.hypot(*k);
                (-k / h, lambda / h)
            }
            ExtensionParam::Free => (-1.0, 0.0),
        }
    }

    /// Large-λ limit of the phase.
    fn asymptotic_phase(&self) -> f64 {
        match self {
            ExtensionParam::Finite(_) => 0.0,
            ExtensionParam::Free => -FRAC_PI_2,
        }
    }
}

impl std::fmt::Display for ExtensionParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtensionParam::Finite(k) => write!(f, "kappa={k}"),
            ExtensionParam::Free => write!(f, "kappa=inf"),
        }
    }
}

/// Phase shift `ζ = -atan2(κ, λ)`, so that `e^{2iζ} = (λ - iκ)/(λ + iκ)`.
pub fn phase_shift(lambda: f64, kappa: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("spectral parameter must be positive, got {lambda}")));
    }
    Ok(-kappa.atan2(lambda))
}

/// Continuum kernel from precomputed `(sin ζ, cos ζ)`.
#[inline]
fn p_with_phase(lambda: f64, sz: f64, cz: f64, r: f64) -> f64 {
    let x = lambda * r;
    let pref = 2.0 * INV_SQRT_2PI / lambda;
    if x < SERIES_SWITCH {
        // -Σ_{n≥1} n sin(ζ + nπ/2) xⁿ/(n+1)!
        let cyc = [sz, cz, -sz, -cz];
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..40 {
            term *= x / (n + 1) as f64;
            let add = n as f64 * cyc[n % 4] * term;
            sum += add;
            if term.abs() < 1e-18 {
                break;
            }
        }
        -pref * sum
    } else {
        let (sx, cx) = x.sin_cos();
        let s = sz * cx + cz * sx;
        let c = cz * cx - sz * sx;
        pref * (-s - (c - cz) / x)
    }
}

/// `p^κ_{1λ}(r)` for finite κ.
pub fn eval_p_kappa(lambda: f64, kappa: f64, r: f64) -> f64 {
    let (sz, cz) = ExtensionParam::Finite(kappa).phase(lambda);
    p_with_phase(lambda, sz, cz, r)
}

/// Continuum kernel of any family member.
pub fn eval_p(param: ExtensionParam, lambda: f64, r: f64) -> f64 {
    let (sz, cz) = param.phase(lambda);
    p_with_phase(lambda, sz, cz, r)
}

/// Regular kernel `p_{lλ}(r) = (-1)^l √(2/π) r j_l(λr)` of `T_l`.
pub fn eval_p_free(l: usize, lambda: f64, r: f64) -> f64 {
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    sign * 2.0 * INV_SQRT_2PI * r * spherical_jn(l, lambda * r)
}

/// Bound state `q_κ` (κ < 0), normalised to `⟨q, q⟩_1 = 1`.
pub fn eval_q(kappa: f64, r: f64) -> Result<f64> {
    if !(kappa < 0.0) {
        return Err(Error::Domain(format!("bound state exists only for kappa < 0, got {kappa}")));
    }
    let c = (-2.0 / kappa.powi(3)).sqrt();
    let y = kappa * r;
    if y.abs() < SERIES_SWITCH {
        // κ Σ_{n≥1} n yⁿ/(n+1)!
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..40 {
            term *= y / (n + 1) as f64;
            sum += n as f64 * term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        Ok(c * kappa * sum)
    } else {
        Ok(c * (kappa * y.exp() - y.exp_m1() / r))
    }
}

/// Exact Taylor data of the continuum kernel at the origin.
pub fn p_endpoint(param: ExtensionParam, lambda: f64) -> (f64, f64) {
    let (sz, cz) = param.phase(lambda);
    (-cz * INV_SQRT_2PI, 4.0 * lambda * sz * INV_SQRT_2PI / 3.0)
}

/// `Ť_{1κ} u = T_1 u - (2/r) u'(0)` using the fitted slope; the Friedrichs
/// member is plain `T_1`.
pub fn apply_t1_kappa(param: ExtensionParam, u: &RadialFunction) -> Result<RadialFunction> {
    let scale = u.max_abs();
    let e = u.endpoint();
    if e.value.abs() > ORIGIN_TOLERANCE * scale {
        return Err(Error::Domain(format!(
            "extension domain requires u(0) = 0, fitted u(0) = {:.3e}",
            e.value
        )));
    }
    let t = apply_tl(1, u);
    match param {
        ExtensionParam::Free => Ok(t),
        ExtensionParam::Finite(_) => {
            let slope = e.slope;
            let values = u
                .grid()
                .nodes()
                .iter()
                .zip(t.values())
                .map(|(&r, &v)| v - 2.0 * slope / r)
                .collect();
            RadialFunction::from_samples(u.grid().clone(), values, t.decay())
        }
    }
}

/// Residuals of the boundary condition at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResidual {
    /// `|3u'' - 4κu'| / (|3u''| + |4κu'| + |u'|)`.
    pub kappa_restored: f64,
    /// The dimensionless variant `|3u'' - 4u'| / (|3u''| + |4u'|)`, reported
    /// for reference only.
    pub literal: f64,
}

pub fn check_boundary_condition(u: &RadialFunction, kappa: f64) -> BoundaryResidual {
    let e = u.endpoint();
    boundary_residual(e.slope, e.curvature, kappa)
}

/// Same as [`check_boundary_condition`] for explicit Taylor data.
pub fn boundary_residual(slope: f64, curvature: f64, kappa: f64) -> BoundaryResidual {
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let a = 3.0 * curvature;
    let b = 4.0 * kappa * slope;
    BoundaryResidual {
        kappa_restored: ratio((a - b).abs(), a.abs() + b.abs() + slope.abs()),
        literal: ratio((a - 4.0 * slope).abs(), a.abs() + 4.0 * slope.abs()),
    }
}

/// Relative L² eigen-residual `‖Ť p - λ² p‖ / ‖λ² p‖` over interior nodes.
pub fn eigen_residual(param: ExtensionParam, lambda: f64, grid: &Arc<RadialGrid>) -> Result<f64> {
    let p = RadialFunction::from_fn(grid, Decay::Unknown, |r| eval_p(param, lambda, r));
    let t = apply_t1_kappa(param, &p)?;
    let l2 = lambda * lambda;
    let w = grid.weights();
    let (mut num, mut den) = (0.0, 0.0);
    for i in grid.interior() {
        let target = l2 * p.values()[i];
        num += w[i] * (t.values()[i] - target).powi(2);
        den += w[i] * target * target;
    }
    Ok((num / den).sqrt())
}

/// Relative eigen-residual of the bound state, `‖Ť q + κ² q‖ / ‖κ² q‖`.
pub fn discrete_eigen_residual(kappa: f64, grid: &Arc<RadialGrid>) -> Result<f64> {
    eval_q(kappa, 1.0)?;
    let q = bound_state(kappa, grid)?;
    let t = apply_t1_kappa(ExtensionParam::Finite(kappa), &q)?;
    let k2 = kappa * kappa;
    let w = grid.weights();
    let (mut num, mut den) = (0.0, 0.0);
    for i in grid.interior() {
        let target = -k2 * q.values()[i];
        num += w[i] * (t.values()[i] - target).powi(2);
        den += w[i] * target * target;
    }
    Ok((num / den).sqrt())
}

/// The bound state sampled on a grid, tagged with its `1/r` decay.
pub fn bound_state(kappa: f64, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
    eval_q(kappa, 1.0)?;
    Ok(RadialFunction::from_fn(grid, Decay::Power(1.0), |r| eval_q(kappa, r).expect("kappa < 0")))
}

/// Discretisation of the spectral axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaParams {
    /// Number of midpoint nodes on `(0, λ_max]`.
    pub count: usize,
    /// Upper end; `None` selects `π / (4 h)` with `h` the tail spacing of the
    /// radial grid.
    pub lambda_max: Option<f64>,
    /// The fitted large-λ model is summed out to `tail_extension · λ_max`
    /// before the analytic remainder takes over.
    pub tail_extension: usize,
}

impl Default for LambdaParams {
    fn default() -> Self {
        LambdaParams {
            count: 4096,
            lambda_max: None,
            tail_extension: 4,
        }
    }
}

/// A family member together with a midpoint λ-grid and cached phases.
#[derive(Debug, Clone)]
pub struct SpectralFamily {
    param: ExtensionParam,
    step: f64,
    count: usize,
    tail_extension: usize,
    lambdas: Vec<f64>,
    phases: Vec<(f64, f64)>,
    exec: Execution,
}

impl SpectralFamily {
    pub fn new(param: ExtensionParam, count: usize, lambda_max: f64, tail_extension: usize) -> Result<Self> {
        if count < 8 || !(lambda_max > 0.0) || tail_extension < 1 {
            return Err(Error::Config(format!(
                "invalid spectral grid: count {count}, lambda_max {lambda_max}, tail_extension {tail_extension}"
            )));
        }
        if let ExtensionParam::Finite(k) = param {
            if !k.is_finite() {
                return Err(Error::Config("finite kappa expected".into()));
            }
        }
        let step = lambda_max / count as f64;
        let total = count * tail_extension;
        let lambdas: Vec<f64> = (0..total).map(|j| (j as f64 + 0.5) * step).collect();
        let phases = lambdas.iter().map(|&l| param.phase(l)).collect();
        Ok(SpectralFamily {
            param,
            step,
            count,
            tail_extension,
            lambdas,
            phases,
            exec: Execution::default(),
        })
    }

    /// Family whose λ-range matches what the radial grid resolves.
    pub fn for_grid(param: ExtensionParam, grid: &RadialGrid, params: &LambdaParams) -> Result<Self> {
        let lambda_max = params
            .lambda_max
            .unwrap_or_else(|| PI / (4.0 * grid.tail_spacing()));
        Self::new(param, params.count, lambda_max, params.tail_extension)
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Twice the nodes at the same spacing, so `λ_max` doubles.
    pub fn refined(&self) -> Result<Self> {
        Ok(Self::new(self.param, 2 * self.count, 2.0 * self.lambda_max(), self.tail_extension)?.with_execution(self.exec))
    }

    pub fn param(&self) -> ExtensionParam {
        self.param
    }

    pub fn has_discrete(&self) -> bool {
        self.param.has_discrete()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas[..self.count]
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lambda_max(&self) -> f64 {
        self.step * self.count as f64
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// `p(λ_j, r)` on the grid nodes.
    pub fn kernel(&self, j: usize, r: f64) -> f64 {
        let (sz, cz) = self.phases[j];
        p_with_phase(self.lambdas[j], sz, cz, r)
    }

    /// `ζ(λ_j)`.
    pub fn zeta(&self, j: usize) -> f64 {
        let (sz, cz) = self.phases[j];
        sz.atan2(cz)
    }
}

/// Large-λ model `û(λ) ≈ Σ_k c_k λ^{-(k+2)}`, `k = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TailModel {
    pub coeffs: [f64; 3],
}

impl TailModel {
    /// Least-squares fit over `[λ_max / 2, λ_max]`.
    pub fn fit(lambdas: &[f64], values: &[f64], lambda_max: f64) -> TailModel {
        let rows: Vec<(Vec<f64>, f64)> = lambdas
            .iter()
            .zip(values)
            .filter(|(&l, _)| l >= 0.5 * lambda_max)
            .map(|(&l, &v)| ((0..3).map(|k| (lambda_max / l).powi(k + 2)).collect(), v))
            .collect();
        if rows.len() < 3 || rows.iter().all(|(_, v)| *v == 0.0) {
            return TailModel::default();
        }
        let a: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r.clone()).collect();
        let b: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
        match crate::numerics::least_squares(&a, &b) {
            Some(c) => TailModel {
                coeffs: [c[0] * lambda_max.powi(2), c[1] * lambda_max.powi(3), c[2] * lambda_max.powi(4)],
            },
            None => TailModel::default(),
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let inv = 1.0 / lambda;
        inv * inv * (self.coeffs[0] + inv * (self.coeffs[1] + inv * self.coeffs[2]))
    }

    /// `∫_L^∞ λ^{2p} û(λ)² dλ` for `p = 0, 1`.
    fn moment(&self, lower: f64, p: i32) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let e = (a + b + 4) as i32 - 2 * p;
                s += self.coeffs[a] * self.coeffs[b] * lower.powi(1 - e) / (e - 1) as f64;
            }
        }
        s
    }
}

/// Spectral coordinates of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoefficients {
    pub u_hat: Vec<f64>,
    pub u_hat_d: Option<f64>,
    pub tail: TailModel,
    pub accuracy: Option<AccuracyNote>,
}

const TRUNCATION_TOLERANCE: f64 = 1e-8;

impl SpectralCoefficients {
    pub fn zeros(fam: &SpectralFamily) -> Self {
        SpectralCoefficients {
            u_hat: vec![0.0; fam.count],
            u_hat_d: fam.has_discrete().then_some(0.0),
            tail: TailModel::default(),
            accuracy: None,
        }
    }

    fn check(&self, fam: &SpectralFamily) -> Result<()> {
        if self.u_hat.len() != fam.count {
            return Err(Error::Grid(format!(
                "{} coefficients for a lambda grid of {}",
                self.u_hat.len(),
                fam.count
            )));
        }
        if self.u_hat_d.is_some() != fam.has_discrete() {
            return Err(Error::Domain("discrete coefficient must be present exactly when kappa < 0".into()));
        }
        Ok(())
    }

    /// `∫ û² dλ + û_d²`, which equals `⟨u, u⟩_1`.
    pub fn norm_squared(&self, fam: &SpectralFamily) -> Result<f64> {
        self.check(fam)?;
        let body: f64 = self.u_hat.iter().map(|v| v * v).sum::<f64>() * fam.step;
        let d = self.u_hat_d.map_or(0.0, |d| d * d);
        Ok(body + self.tail.moment(fam.lambda_max(), 0) + d)
    }

    /// `∫ λ² û² dλ - κ² û_d²`, which equals `⟨u, Ť_{1κ} u⟩_1`.
    pub fn form_value(&self, fam: &SpectralFamily) -> Result<f64> {
        self.check(fam)?;
        let body: f64 = fam
            .lambdas()
            .iter()
            .zip(&self.u_hat)
            .map(|(l, v)| l * l * v * v)
            .sum::<f64>()
            * fam.step;
        let d = match (self.u_hat_d, fam.param.kappa()) {
            (Some(d), Some(k)) => -k * k * d * d,
            _ => 0.0,
        };
        Ok(body + self.tail.moment(fam.lambda_max(), 1) + d)
    }
}

/// `û(λ) = ∫ p(λ, r) T_1 u(r) dr`, `û_d = ∫ q(r) T_1 u(r) dr`.
pub fn forward_transform(u: &RadialFunction, fam: &SpectralFamily) -> Result<SpectralCoefficients> {
    let grid = u.grid();
    let t = apply_tl(1, u);
    let f: Vec<f64> = t.values().iter().zip(grid.weights()).map(|(v, w)| v * w).collect();
    let nodes = grid.nodes();
    let u_hat = fam.exec.map_range(fam.count, |j| {
        let (sz, cz) = fam.phases[j];
        let l = fam.lambdas[j];
        nodes.iter().zip(&f).map(|(&r, &fw)| p_with_phase(l, sz, cz, r) * fw).sum()
    });
    let u_hat_d = match fam.param {
        ExtensionParam::Finite(k) if k < 0.0 => {
            let mut s = 0.0;
            for (&r, &fw) in nodes.iter().zip(&f) {
                s += eval_q(k, r)? * fw;
            }
            Some(s)
        }
        _ => None,
    };
    let n = nodes.len();
    let mass: f64 = f.iter().map(|v| v.abs()).sum();
    let estimate = if mass > 0.0 {
        t.values()[n - 1].abs() * grid.r_max() / mass
    } else {
        0.0
    };
    let flagged = estimate > TRUNCATION_TOLERANCE;
    if flagged {
        log::warn!("forward transform: truncated tail of T_1 u is {estimate:.2e} of its mass");
    }
    let tail = TailModel::fit(fam.lambdas(), &u_hat, fam.lambda_max());
    Ok(SpectralCoefficients {
        u_hat,
        u_hat_d,
        tail,
        accuracy: Some(AccuracyNote { estimate, flagged }),
    })
}

/// Closed form of `∫_L^∞ c λ^{-k} p(λ, r) dλ` with the phase frozen at its
/// large-λ limit `ζ∞`.
fn far_tail(k: usize, lower: f64, r: f64, zeta_inf: f64) -> f64 {
    let (s, c) = zeta_inf.sin_cos();
    let x = lower * r;
    let kf = k as f64;
    let i1 = oscillatory_tail(k + 1, x);
    let i2 = oscillatory_tail(k + 2, x);
    // sin(ζ + t) = s cos t + c sin t ; cos(ζ + t) = c cos t - s sin t
    let term1 = -r.powi(k as i32) * (s * i1.re + c * i1.im);
    let term2 = -r.powi(k as i32) * (c * i2.re - s * i2.im) + c / r * lower.powf(-kf - 1.0) / (kf + 1.0);
    2.0 * INV_SQRT_2PI * (term1 + term2)
}

/// `u(r) = ∫ û(λ) p(λ, r) dλ + û_d q(r)` on the nodes of `grid`.
pub fn inverse_transform(c: &SpectralCoefficients, fam: &SpectralFamily, grid: &Arc<RadialGrid>) -> Result<RadialFunction> {
    c.check(fam)?;
    let total = fam.count * fam.tail_extension;
    let ext: Vec<f64> = (fam.count..total).map(|j| c.tail.eval(fam.lambdas[j])).collect();
    let upper = total as f64 * fam.step;
    let zeta_inf = fam.param.asymptotic_phase();
    let has_tail = c.tail.coeffs.iter().any(|&v| v != 0.0);
    let kappa = fam.param.kappa();
    let values = fam.exec.map_slice(grid.nodes(), |&r| {
        let mut s = 0.0;
        for j in 0..fam.count {
            let (sz, cz) = fam.phases[j];
            s += c.u_hat[j] * p_with_phase(fam.lambdas[j], sz, cz, r);
        }
        if has_tail {
            for (j, m) in (fam.count..total).zip(&ext) {
                let (sz, cz) = fam.phases[j];
                s += m * p_with_phase(fam.lambdas[j], sz, cz, r);
            }
        }
        s *= fam.step;
        if has_tail {
            for (k, &ck) in c.tail.coeffs.iter().enumerate() {
                if ck != 0.0 {
                    s += ck * far_tail(k + 2, upper, r, zeta_inf);
                }
            }
        }
        if let (Some(d), Some(k)) = (c.u_hat_d, kappa) {
            s += d * eval_q(k, r).expect("kappa < 0 when a discrete coefficient exists");
        }
        s
    });
    RadialFunction::from_samples(grid.clone(), values, Decay::Unknown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{inner_angle, GridParams};

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::mapped(&GridParams::default()).unwrap())
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_shift(2.0, 0.0).unwrap(), 0.0);
        assert!((phase_shift(1.0, 1e12).unwrap() + FRAC_PI_2).abs() < 1e-11);
        assert!((phase_shift(3.0, 3.0).unwrap() + PI / 4.0).abs() < 1e-15);
        assert!(phase_shift(0.0, 1.0).is_err());
        let mut prev = phase_shift(1e-3, 2.0).unwrap();
        for i in 1..1000 {
            let z = phase_shift(1e-3 + i as f64 * 0.01, 2.0).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }

    fn p_direct(lambda: f64, kappa: f64, r: f64) -> f64 {
        let z = -kappa.atan2(lambda);
        2.0 * INV_SQRT_2PI / (lambda * lambda) * (-lambda * (z + lambda * r).sin() - ((z + lambda * r).cos() - z.cos()) / r)
    }

    #[test]
    fn series_matches_closed_form() {
        for &(l, k) in &[(1.0, 0.5), (3.0, -2.0), (0.2, 5.0)] {
            for &x in &[0.3, 0.45, 0.499] {
                let r = x / l;
                let a = eval_p_kappa(l, k, r);
                let b = p_direct(l, k, r);
                assert!((a - b).abs() < 1e-14, "{a} {b}");
            }
            let x0 = SERIES_SWITCH;
            let a = eval_p_kappa(l, k, x0 / l * (1.0 - 1e-13));
            let b = eval_p_kappa(l, k, x0 / l * (1.0 + 1e-13));
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_taylor_data() {
        let (l, k) = (1.7, 0.8);
        assert_eq!(eval_p_kappa(l, k, 0.0), 0.0);
        let z = phase_shift(l, k).unwrap();
        let h = 1e-5;
        let d1 = (eval_p_kappa(l, k, h) - eval_p_kappa(l, k, -h)) / (2.0 * h);
        assert!((d1 + z.cos() * INV_SQRT_2PI).abs() < 1e-8, "{d1}");
        let d2 = (eval_p_kappa(l, k, h) - 2.0 * eval_p_kappa(l, k, 0.0) + eval_p_kappa(l, k, -h)) / (h * h);
        assert!((d2 - 4.0 * l * z.sin() * INV_SQRT_2PI / 3.0).abs() < 1e-6, "{d2}");
        let (s, c) = p_endpoint(ExtensionParam::Finite(k), l);
        assert!(boundary_residual(s, c, k).kappa_restored < 1e-14);
    }

    #[test]
    fn free_kernel_agrees_with_l1_formula() {
        for &lambda in &[0.3, 1.0, 7.0] {
            for &r in &[1e-3, 0.4, 2.0, 30.0] {
                let x = lambda * r;
                let want = 2.0 * INV_SQRT_2PI / (lambda * lambda) * (lambda * x.cos() - x.sin() / r);
                let got = eval_p_free(1, lambda, r);
                assert!((got - want).abs() < 1e-12 * want.abs().max(1e-3), "{lambda} {r}");
                assert!((eval_p(ExtensionParam::Free, lambda, r) - got).abs() < 1e-12);
            }
        }
        assert_eq!(eval_p_free(2, 1.0, 0.0), 0.0);
    }

    #[test]
    fn free_kernel_eigenfunction_of_tl() {
        let g = grid();
        for l in 1..4 {
            let lambda = 1.3;
            let p = RadialFunction::from_fn(&g, Decay::Unknown, |r| eval_p_free(l, lambda, r));
            let t = apply_tl(l, &p);
            let worst = g
                .interior()
                .map(|i| (t.values()[i] - lambda * lambda * p.values()[i]).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-8 * lambda * lambda, "l={l}: {worst}");
        }
    }

    #[test]
    fn bound_state_properties() {
        assert!(eval_q(0.5, 1.0).is_err());
        assert!(eval_q(0.0, 1.0).is_err());
        let g = grid();
        for &k in &[-1.0f64, -2.0] {
            let c = (-2.0 / k.powi(3)).sqrt();
            let r = 1e-3;
            let taylor = c * k * k / 2.0 * r + c * k.powi(3) / 3.0 * r * r;
            assert!((eval_q(k, r).unwrap() - taylor).abs() < 0.2 * c * k.powi(4) * r.powi(3));
            let q = bound_state(k, &g).unwrap();
            let n = inner_angle(1, &q, &q).unwrap();
            assert!((n - 1.0).abs() < 1e-8, "{n}");
            let res = discrete_eigen_residual(k, &g).unwrap();
            assert!(res < 1e-8, "{res}");
            let bc = check_boundary_condition(&q, k).kappa_restored;
            assert!(bc < 1e-6, "{bc}");
        }
    }

    #[test]
    fn extension_domain_checks() {
        let g = grid();
        let bad = RadialFunction::from_fn(&g, Decay::Exponential, |r| (-r).exp());
        assert!(matches!(apply_t1_kappa(ExtensionParam::Finite(1.0), &bad), Err(Error::Domain(_))));
        let u = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * r * (-r).exp());
        let a = apply_t1_kappa(ExtensionParam::Finite(1.0), &u).unwrap();
        let b = apply_tl(1, &u);
        let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).collect();
        let norm: Vec<f64> = b.values().iter().map(|y| y * y).collect();
        let rel = (g.integrate(&diff) / g.integrate(&norm)).sqrt();
        assert!(rel < 1e-7, "{rel}");
    }

    #[test]
    fn eigen_residuals_small() {
        let g = grid();
        for &k in &[-2.0, 0.5, 5.0] {
            for &l in &[0.5, 2.0] {
                let res = eigen_residual(ExtensionParam::Finite(k), l, &g).unwrap();
                assert!(res < 1e-7, "k={k} l={l}: {res}");
            }
        }
    }

    #[test]
    fn free_kernel_fails_finite_condition() {
        let g = grid();
        let p = RadialFunction::from_fn(&g, Decay::Unknown, |r| eval_p_free(1, 1.0, r));
        assert!(p.endpoint().slope.abs() < 1e-10);
        assert!(check_boundary_condition(&p, 1.0).kappa_restored > 0.5);
    }

    #[test]
    fn zero_transforms() {
        let g = grid();
        let fam = SpectralFamily::for_grid(ExtensionParam::Finite(-1.0), &g, &LambdaParams { count: 256, ..Default::default() }).unwrap();
        let c = forward_transform(&RadialFunction::zeros(&g), &fam).unwrap();
        assert!(c.u_hat.iter().all(|&v| v == 0.0));
        assert_eq!(c.u_hat_d, Some(0.0));
        let back = inverse_transform(&SpectralCoefficients::zeros(&fam), &fam, &g).unwrap();
        assert!(back.is_zero());
    }

    #[test]
    fn tail_model_recovers_exact_power_law() {
        let lambdas: Vec<f64> = (0..200).map(|j| 1.0 + j as f64 * 0.2).collect();
        let v: Vec<f64> = lambdas.iter().map(|l| 2.0 / (l * l) - 0.5 / (l * l * l) + 3.0 / l.powi(4)).collect();
        let m = TailModel::fit(&lambdas, &v, 40.0);
        assert!((m.coeffs[0] - 2.0).abs() < 1e-8 && (m.coeffs[1] + 0.5).abs() < 1e-6 && (m.coeffs[2] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn far_tail_matches_direct_sum() {
        // Compare the closed form with brute-force midpoint summation over
        // a long but finite range plus its own closed form beyond it.
        let r = 0.7;
        let param = ExtensionParam::Free;
        let (lo, hi, dl) = (30.0, 3000.0, 0.01);
        let n = ((hi - lo) / dl) as usize;
        let direct: f64 = (0..n)
            .map(|j| {
                let l = lo + (j as f64 + 0.5) * dl;
                eval_p(param, l, r) / (l * l)
            })
            .sum::<f64>()
            * dl;
        let closed = far_tail(2, lo, r, -FRAC_PI_2) - far_tail(2, hi, r, -FRAC_PI_2);
        assert!((direct - closed).abs() < 1e-9, "{direct} {closed}");
    }
}
