//! The quadratic form `Q(A) = ∫ (∂_k A_j)² d³x`, its boundary-subtracted
//! extension `Q_κ`, and the square-root kernel `Q_κ^{1/2}(r, s)`.
//!
//! Two independent evaluations of `Q` are provided. [`form_q`] assembles the
//! radial forms `Σ ⟨u, T_l u⟩_l + Σ (w, T_l w)`. [`gradient_energy`]
//! integrates `Σ_j |∇A_j|²` directly: with `A = Σ f_Z Z`, the angular
//! integral of `Σ_j |∇_Ω A_j|²` couples `Υ` and `Ψ` through
//! `Δ_Ω Υ = (2 + l̃²) Υ - 2 l̃ Ψ`, `Δ_Ω Ψ = l̃² Ψ - 2 l̃ Υ`, so the radial
//! density is
//!
//! `|f_Υ'|² + |f_Ψ'|² + |f_Φ'|² + [(2 + l̃²)|f_Υ|² - 4 l̃ Re(conj(f_Υ) f_Ψ) + l̃²|f_Ψ|² + l̃²|f_Φ|²] / r²`.


use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{eval_q, forward_transform, SpectralFamily};
use crate::fieldops::TransverseField;
use crate::numerics::gauss_legendre;
use crate::radial::{apply_tl, inner_angle, inner_plain, RadialFunction};
use crate::sphere::{cdot, AngularQuadrature, SphericalIndex, VshKind, VshTable};

/// Coefficient of the `1/r` surface subtraction.
pub const SURFACE_POLE: f64 = 5.0 / 3.0;
/// Coefficient multiplying `κ` in the surface subtraction.
pub const SURFACE_KAPPA: f64 = 44.0 / 27.0;

/// Outcome of a form evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadFormResult {
    pub value: f64,
    /// `(r, partial value)` pairs. Empty for direct assemblies.
    pub extrapolation_table: Vec<(f64, f64)>,
    pub converged: bool,
    pub diagnostics: Option<LimitDiagnostics>,
}

/// Extra output of [`form_q_kappa_limit`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    pub kappa: f64,
    /// `lim ρ V(ρ)`, the `1/ρ` coefficient of the volume integral.
    pub volume_pole: f64,
    /// `(5/3) lim S(ρ)`, the coefficient it must cancel against.
    pub surface_pole: f64,
    /// Richardson limit of `S(ρ) = ∫_{∂B_ρ} |A|²`.
    pub surface_limit: f64,
    /// Difference of the last two extrapolants.
    pub richardson_error: f64,
    /// Magnitude the error is judged against: the larger of `|value|` and
    /// `V(r_0)`.
    pub richardson_scale: f64,
}

/// Parameters of the shrinking-ball limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitParams {
    pub r0: f64,
    pub levels: usize,
    pub order: usize,
    pub tolerance: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams {
            r0: 0.5,
            levels: 10,
            order: 2,
            tolerance: 1e-6,
        }
    }
}

/// Profiles below this fraction of the field's largest value are skipped by
/// [`form_q`].
const NEGLIGIBLE: f64 = 1e-13;

fn complex_parts(p: &crate::fieldops::ComplexProfile) -> [&RadialFunction; 2] {
    [&p.re, &p.im]
}

/// `Q(A)` by radial assembly. Fails for fields with a non-vanishing
/// `u'(0)`, which need [`form_q_kappa_limit`].
pub fn form_q(field: &TransverseField) -> Result<QuadFormResult> {
    if let Some(idx) = field.singular_channels().first() {
        let slope = field.channel(*idx).expect("listed channel").u.slope();
        return Err(Error::Domain(format!(
            "u_{{{},{}}} has u'(0) = {:.3e}; the field is singular at the origin",
            idx.l,
            idx.m,
            slope.norm()
        )));
    }
    // Round-off channels left by a decomposition carry no energy but would
    // trip the per-profile origin checks.
    let floor = NEGLIGIBLE * field.max_abs();
    let mut value = 0.0;
    for (idx, ch) in field.channels() {
        for part in complex_parts(&ch.u) {
            if part.max_abs() > floor {
                value += inner_angle(idx.l, part, &apply_tl(idx.l, part))?;
            }
        }
        for part in complex_parts(&ch.w) {
            if part.max_abs() > floor {
                value += inner_plain(part, &apply_tl(idx.l, part))?;
            }
        }
    }
    Ok(QuadFormResult {
        value,
        extrapolation_table: Vec::new(),
        converged: true,
        diagnostics: None,
    })
}

/// Radial density `r² ∫ Σ_j |∇A_j|² dΩ` at radius `r`.
fn gradient_density(field: &TransverseField, r: f64) -> f64 {
    let mut g = 0.0;
    for &idx in field.channels().keys() {
        let (f, df) = field.channel_amplitudes(idx, r).expect("channel exists");
        let lt2 = (idx.l * (idx.l + 1)) as f64;
        let lt = lt2.sqrt();
        let radial: f64 = df.iter().map(|z| z.norm_sqr()).sum();
        let angular = (2.0 + lt2) * f[0].norm_sqr() - 4.0 * lt * (f[0].conj() * f[1]).re
            + lt2 * (f[1].norm_sqr() + f[2].norm_sqr());
        g += r * r * radial + angular;
    }
    g
}

const PANEL_WIDTH: f64 = 0.25;
const PANEL_ORDER: usize = 16;

/// `∫_a^b r² ∫ Σ|∇A_j|² dΩ dr` by Gauss–Legendre panels in `ln r`.
fn volume_segment(field: &TransverseField, a: f64, b: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (ta, tb) = (a.ln(), b.ln());
    let panels = ((tb - ta) / PANEL_WIDTH).ceil().max(1.0) as usize;
    let h = (tb - ta) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let t0 = ta + k as f64 * h;
        for (x, w) in gl.0.iter().zip(&gl.1) {
            let r = (t0 + 0.5 * h * (x + 1.0)).exp();
            total += 0.5 * h * w * r * gradient_density(field, r);
        }
    }
    total
}

/// `V(ρ) = ∫_{|x| > ρ} Σ_j |∇A_j|² d³x`, truncated at the grid's `r_max`.
pub fn volume_integral(field: &TransverseField, rho: f64) -> f64 {
    let gl = gauss_legendre(PANEL_ORDER);
    volume_segment(field, rho, field.grid().r_max(), &gl)
}

/// `Q(A)` as the direct gradient integral. The ball below the first grid
/// node is omitted; for regular fields it contributes `O(r_min³)`.
pub fn gradient_energy(field: &TransverseField) -> f64 {
    volume_integral(field, field.grid().nodes()[0])
}

/// `S(ρ) = ∫_{∂B_ρ} |A|² dS`, by angular quadrature of the field at radius `ρ`.
pub fn surface_norm(field: &TransverseField, rho: f64) -> f64 {
    let quad = AngularQuadrature::for_l_max(field.l_max());
    let table = VshTable::new(field.l_max(), quad.nodes());
    let mut samples = vec![[Complex64::new(0.0, 0.0); 3]; quad.len()];
    for &idx in field.channels().keys() {
        let (f, _) = field.channel_amplitudes(idx, rho).expect("channel exists");
        accumulate(&mut samples, &table, idx, f);
    }
    rho * rho * quadrature_norm(&quad, &samples)
}

/// `lim_{ρ→0} S(ρ)`: the angular integral of `|lim r A|²`, where
/// `lim r A = Σ u'(0) (l̃ Υ + Ψ)` over channels with a non-zero slope.
pub fn surface_limit(field: &TransverseField) -> f64 {
    let quad = AngularQuadrature::for_l_max(field.l_max());
    let table = VshTable::new(field.l_max(), quad.nodes());
    let mut samples = vec![[Complex64::new(0.0, 0.0); 3]; quad.len()];
    for (&idx, ch) in field.channels() {
        let a = ch.u.slope();
        accumulate(&mut samples, &table, idx, [a * idx.ltilde(), a, Complex64::new(0.0, 0.0)]);
    }
    quadrature_norm(&quad, &samples)
}

fn accumulate(samples: &mut [[Complex64; 3]], table: &VshTable, idx: SphericalIndex, f: [Complex64; 3]) {
    for (k, kind) in VshKind::ALL.iter().enumerate() {
        if f[k] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (s, z) in samples.iter_mut().zip(table.get(*kind, idx)) {
            for c in 0..3 {
                s[c] += z[c] * f[k];
            }
        }
    }
}

fn quadrature_norm(quad: &AngularQuadrature, samples: &[[Complex64; 3]]) -> f64 {
    samples.iter().zip(quad.weights()).map(|(v, w)| w * cdot(v, v).re).sum()
}

/// Richardson table for samples at `ρ_k = 2^{-k} ρ_0` with an error
/// expansion in integer powers of `ρ`. Returns the last two extrapolants.
fn richardson(values: &[f64], order: usize) -> (f64, f64) {
    let mut table: Vec<Vec<f64>> = vec![values.to_vec()];
    for j in 1..=order {
        let prev = &table[j - 1];
        let factor = (1u64 << j) as f64 - 1.0;
        let next: Vec<f64> = (1..prev.len()).map(|k| prev[k] + (prev[k] - prev[k - 1]) / factor).collect();
        table.push(next);
    }
    let last = &table[order];
    let n = last.len();
    (last[n - 1], if n > 1 { last[n - 2] } else { f64::NAN })
}

/// `Q_κ(A) = lim_{ρ→0} [V(ρ) - (5/(3ρ) + (44/27) κ) S(ρ)]` by shrinking
/// balls and Richardson extrapolation.
pub fn form_q_kappa_limit(field: &TransverseField, kappa: f64, params: &LimitParams) -> Result<QuadFormResult> {
    if !kappa.is_finite() {
        return Err(Error::Domain("κ must be finite".into()));
    }
    if params.levels < params.order + 1 || params.r0 <= 0.0 {
        return Err(Error::Config("need r0 > 0 and more levels than the Richardson order".into()));
    }
    let rho_min = params.r0 / (1u64 << params.levels) as f64;
    if rho_min < field.grid().nodes()[0] {
        return Err(Error::Grid(format!(
            "smallest ball radius {rho_min:.3e} lies below the first grid node"
        )));
    }
    let gl = gauss_legendre(PANEL_ORDER);
    let r_max = field.grid().r_max();
    let rhos: Vec<f64> = (0..=params.levels).map(|k| params.r0 / (1u64 << k) as f64).collect();
    let mut volumes = Vec::with_capacity(rhos.len());
    let mut v = volume_segment(field, rhos[0], r_max, &gl);
    volumes.push(v);
    for k in 1..rhos.len() {
        v += volume_segment(field, rhos[k], rhos[k - 1], &gl);
        volumes.push(v);
    }
    let surfaces: Vec<f64> = rhos.iter().map(|&r| surface_norm(field, r)).collect();
    let partial: Vec<f64> = rhos
        .iter()
        .zip(volumes.iter().zip(&surfaces))
        .map(|(&r, (&v, &s))| v - (SURFACE_POLE / r + SURFACE_KAPPA * kappa) * s)
        .collect();
    let (value, previous) = richardson(&partial, params.order);
    let scaled_volume: Vec<f64> = rhos.iter().zip(&volumes).map(|(r, v)| r * v).collect();
    let (volume_pole, _) = richardson(&scaled_volume, params.order);
    let (surface_lim, _) = richardson(&surfaces, params.order);
    let richardson_error = (value - previous).abs();
    let scale = value.abs().max(volumes[0].abs()).max(f64::MIN_POSITIVE);
    let converged = value.is_finite() && richardson_error <= params.tolerance * scale;
    Ok(QuadFormResult {
        value,
        extrapolation_table: rhos.into_iter().zip(partial).collect(),
        converged,
        diagnostics: Some(LimitDiagnostics {
            kappa,
            volume_pole,
            surface_pole: SURFACE_POLE * surface_lim,
            surface_limit: surface_lim,
            richardson_error,
            richardson_scale: scale,
        }),
    })
}

/// `⟨u, Ť_{1κ} u⟩_1` from the spectral expansion.
pub fn form_q_kappa_spectral(u: &RadialFunction, fam: &SpectralFamily) -> Result<f64> {
    if u.is_zero() {
        return Ok(0.0);
    }
    forward_transform(u, fam)?.form_value(fam)
}

/// One value of `Q_κ^{1/2}(r, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub r: f64,
    pub s: f64,
    pub value: Complex64,
}

/// Default damping width for the square-root kernel: a quarter of the
/// λ cutoff, so the window is `e^{-16}` at the cutoff.
pub fn default_window(fam: &SpectralFamily) -> f64 {
    fam.lambda_max() / 4.0
}

/// `∫ p(r) p(s) λ e^{-(λ/λ_w)²} dλ - iκ q(r) q(s)`, the discrete term
/// present only for `κ < 0`.
pub fn eval_sqrt_kernel(fam: &SpectralFamily, r: f64, s: f64, window: f64) -> Result<KernelSample> {
    let m = sqrt_kernel_matrix(fam, &[r], &[s], window)?;
    Ok(KernelSample { r, s, value: m[0][0] })
}

/// `Q_κ^{1/2}(r_i, s_k)` for all pairs, parallel over rows.
pub fn sqrt_kernel_matrix(fam: &SpectralFamily, rs: &[f64], ss: &[f64], window: f64) -> Result<Vec<Vec<Complex64>>> {
    if rs.iter().chain(ss).any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("kernel arguments must be positive".into()));
    }
    if !(window > 0.0) {
        return Err(Error::Domain("window width must be positive".into()));
    }
    let exec = fam.execution();
    let n = fam.lambdas().len();
    let weights: Vec<f64> = fam
        .lambdas()
        .iter()
        .map(|&l| l * (-(l / window).powi(2)).exp() * fam.step())
        .collect();
    let table = |xs: &[f64]| -> Vec<Vec<f64>> { exec.map_slice(xs, |&x| (0..n).map(|j| fam.kernel(j, x)).collect()) };
    let pr = table(rs);
    let ps = table(ss);
    let discrete = match fam.param().kappa() {
        Some(k) if k < 0.0 => {
            let qr: Vec<f64> = rs.iter().map(|&r| eval_q(k, r)).collect::<Result<_>>()?;
            let qs: Vec<f64> = ss.iter().map(|&s| eval_q(k, s)).collect::<Result<_>>()?;
            Some((k, qr, qs))
        }
        _ => None,
    };
    let rows = exec.map_range(rs.len(), |i| {
        (0..ss.len())
            .map(|k| {
                // Summation in a fixed order keeps K(r, s) = K(s, r) bitwise.
                let re: f64 = (0..n).map(|j| pr[i][j] * ps[k][j] * weights[j]).sum();
                let im = discrete.as_ref().map_or(0.0, |(kappa, qr, qs)| -kappa * qr[i] * qs[k]);
                Complex64::new(re, im)
            })
            .collect()
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::extension::{bound_state, ExtensionParam};
    use crate::fieldops::ComplexProfile;
    use crate::radial::{Decay, GridParams, RadialGrid};

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::mapped(&GridParams::default()).unwrap())
    }

    fn idx(l: usize, m: i64) -> SphericalIndex {
        SphericalIndex::new(l, m).unwrap()
    }

    #[test]
    fn zero_field() {
        let tf = TransverseField::new(grid(), 2);
        assert_eq!(form_q(&tf).unwrap().value, 0.0);
        assert_eq!(gradient_energy(&tf), 0.0);
    }

    #[test]
    fn w_mode_two_pipelines() {
        let g = grid();
        let w = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * r * (-r).exp());
        let tf = TransverseField::new(g.clone(), 1).with_w(idx(1, 1), w).unwrap();
        let radial = form_q(&tf).unwrap().value;
        let direct = gradient_energy(&tf);
        // (w, T_1 w) = ∫ (w'² + 2 w²/r²) dr = 1/4 + 1/2.
        assert!((radial - 0.75).abs() < 1e-8, "{radial}");
        assert!((direct - 0.75).abs() < 1e-8, "{direct}");
    }

    #[test]
    fn u_mode_two_pipelines() {
        let g = grid();
        let u = RadialFunction::from_fn(&g, Decay::Exponential, |r| r.powi(3) * (-r).exp());
        let u2 = RadialFunction::from_fn(&g, Decay::Exponential, |r| r.powi(3) * (-r * r).exp());
        let mut tf = TransverseField::new(g.clone(), 2).with_u(idx(1, 0), u).unwrap();
        tf.insert(idx(2, -1), ComplexProfile::new(u2.scaled(0.3), u2.scaled(-0.7)).unwrap(), ComplexProfile::zeros(&g))
            .unwrap();
        let radial = form_q(&tf).unwrap().value;
        let direct = gradient_energy(&tf);
        assert!(radial > 0.0);
        assert!((radial - direct).abs() < 1e-7 * radial, "{radial} {direct}");
    }

    #[test]
    fn singular_field_rejected_by_form_q() {
        let g = grid();
        let u = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * (-r).exp());
        let tf = TransverseField::singular_l1([0.0, 0.0, 1.0], &u).unwrap();
        assert!(matches!(form_q(&tf), Err(Error::Domain(_))));
    }

    #[test]
    fn limit_matches_form_on_regular_fields() {
        let g = grid();
        let u = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * r * (-r).exp());
        let tf = TransverseField::singular_l1([0.2, 0.5, 1.0], &u).unwrap();
        let q = form_q(&tf).unwrap().value;
        for kappa in [-1.0, 0.0, 1.0] {
            let lim = form_q_kappa_limit(&tf, kappa, &LimitParams::default()).unwrap();
            assert!(lim.converged);
            assert!((lim.value - q).abs() < 1e-6 * q, "{} {q}", lim.value);
        }
    }

    #[test]
    fn singular_limit_is_affine_in_kappa() {
        let g = grid();
        let u = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * (-r).exp());
        let tf = TransverseField::singular_l1([0.0, 0.6, 0.8], &u).unwrap();
        let a = form_q_kappa_limit(&tf, 1.0, &LimitParams::default()).unwrap();
        let b = form_q_kappa_limit(&tf, -1.0, &LimitParams::default()).unwrap();
        assert!(a.converged && b.converged, "{:?}", a.diagnostics);
        let oracle = surface_limit(&tf);
        assert!((oracle - 3.0).abs() < 1e-6, "{oracle}");
        let expected = SURFACE_KAPPA * (-2.0) * oracle;
        assert!(((a.value - b.value) - expected).abs() < 1e-4 * expected.abs());
        let d = a.diagnostics.unwrap();
        assert!((d.volume_pole - d.surface_pole).abs() < 1e-4 * d.surface_pole, "{d:?}");
    }

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let vals: Vec<f64> = (0..6).map(|k| {
            let r = 0.5 / (1 << k) as f64;
            2.0 + 3.0 * r - 5.0 * r * r
        }).collect();
        let (v, p) = richardson(&vals, 2);
        assert!((v - 2.0).abs() < 1e-13 && (p - 2.0).abs() < 1e-13);
    }

    #[test]
    fn spectral_form_on_bound_state() {
        let g = grid();
        let q = bound_state(-1.5, &g).unwrap();
        let fam = SpectralFamily::new(ExtensionParam::Finite(-1.5), 2048, 39.5, 4).unwrap();
        let v = form_q_kappa_spectral(&q, &fam).unwrap();
        assert!((v + 2.25).abs() < 1e-3, "{v}");
        assert_eq!(form_q_kappa_spectral(&RadialFunction::zeros(&g), &fam).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_kernel_symmetry_and_phase() {
        let pos = SpectralFamily::new(ExtensionParam::Finite(1.0), 1024, 39.5, 4).unwrap();
        let neg = SpectralFamily::new(ExtensionParam::Finite(-1.0), 1024, 39.5, 4).unwrap();
        let pts = [0.3, 1.1, 2.7];
        for fam in [&pos, &neg] {
            let m = sqrt_kernel_matrix(fam, &pts, &pts, default_window(fam)).unwrap();
            for i in 0..3 {
                for k in 0..3 {
                    assert_eq!(m[i][k], m[k][i]);
                }
            }
        }
        assert_eq!(eval_sqrt_kernel(&pos, 0.3, 1.1, 10.0).unwrap().value.im, 0.0);
        assert!(eval_sqrt_kernel(&neg, 0.3, 1.1, 10.0).unwrap().value.im != 0.0);
        assert!(eval_sqrt_kernel(&neg, 0.0, 1.1, 10.0).is_err());
    }
}
