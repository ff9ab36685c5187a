//! Vector fields on the product grid (radial nodes × angular quadrature) and
//! their transverse parametrisation.
//!
//! A divergence-free field is written per `(l, m)`, `l >= 1`, as
//!
//! `A = l̃ u/r² Υ + u'/r Ψ + w/r Φ`
//!
//! and [`decompose`] recovers `(u, w)` from samples. With
//! `a_Z(r) = ∫ conj(Z)·A dΩ`, `w = r a_Φ` and `u` is obtained from the Green
//! kernel of `T_l` with the `Ψ` derivative moved onto the kernel:
//!
//! `u(r) = [r^{-l} ∫_0^r s^{l+1} (l̃ a_Υ + (l+1) a_Ψ) ds
//!        + r^{l+1} ∫_r^∞ s^{-l} (l̃ a_Υ - l a_Ψ) ds] / (2l+1)`.
//!
//! Both integrals vanish identically on gradients `∇(v Y_lm)`, which is what
//! makes the extraction a transverse projector.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::radial::{Decay, RadialFunction, RadialGrid, ORIGIN_TOLERANCE};
use crate::sphere::{cdot, eval_vsh, AngularPoint, AngularQuadrature, SphericalIndex, Vec3c, VshKind, VshTable};

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// A complex radial profile stored as two real profiles.
#[derive(Debug, Clone)]
pub struct ComplexProfile {
    pub re: RadialFunction,
    pub im: RadialFunction,
}

impl ComplexProfile {
    pub fn real(re: RadialFunction) -> Self {
        let im = RadialFunction::zeros(re.grid()).with_decay(re.decay());
        ComplexProfile { re, im }
    }

    pub fn new(re: RadialFunction, im: RadialFunction) -> Result<Self> {
        if !re.grid().same_as(im.grid()) {
            return Err(Error::Grid("real and imaginary parts on different grids".into()));
        }
        Ok(ComplexProfile { re, im })
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self::real(RadialFunction::zeros(grid))
    }

    /// `c · f` for a real profile `f`.
    pub fn from_scaled(f: &RadialFunction, c: Complex64) -> Self {
        ComplexProfile {
            re: f.scaled(c.re),
            im: f.scaled(c.im),
        }
    }

    fn from_values(grid: &Arc<RadialGrid>, values: &[Complex64], decay: Decay) -> Result<Self> {
        let re = RadialFunction::from_samples(grid.clone(), values.iter().map(|v| v.re).collect(), decay)?;
        let im = RadialFunction::from_samples(grid.clone(), values.iter().map(|v| v.im).collect(), decay)?;
        Ok(ComplexProfile { re, im })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.re.grid()
    }

    pub fn value(&self, i: usize) -> Complex64 {
        Complex64::new(self.re.values()[i], self.im.values()[i])
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.re.values().iter().zip(self.im.values()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    pub fn derivative(&self) -> Vec<Complex64> {
        self.re.derivative().into_iter().zip(self.im.derivative()).map(|(a, b)| Complex64::new(a, b)).collect()
    }

    pub fn eval_with_derivatives(&self, r: f64) -> [Complex64; 3] {
        let a = self.re.eval_with_derivatives(r);
        let b = self.im.eval_with_derivatives(r);
        [0, 1, 2].map(|k| Complex64::new(a[k], b[k]))
    }

    /// Endpoint slope `u'(0)`.
    pub fn slope(&self) -> Complex64 {
        Complex64::new(self.re.endpoint().slope, self.im.endpoint().slope)
    }

    pub fn max_abs(&self) -> f64 {
        self.re.values().iter().zip(self.im.values()).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn max_abs_difference(&self, other: &ComplexProfile) -> f64 {
        (0..self.re.values().len())
            .map(|i| (self.value(i) - other.value(i)).norm())
            .fold(0.0, f64::max)
    }
}

/// The `(u, w)` pair of one `(l, m)` channel.
#[derive(Debug, Clone)]
pub struct Channel {
    pub u: ComplexProfile,
    pub w: ComplexProfile,
}

/// Divergence-free field in the `(u_lm, w_lm)` parametrisation.
#[derive(Debug, Clone)]
pub struct TransverseField {
    grid: Arc<RadialGrid>,
    l_max: usize,
    channels: BTreeMap<SphericalIndex, Channel>,
}

impl TransverseField {
    pub fn new(grid: Arc<RadialGrid>, l_max: usize) -> Self {
        TransverseField {
            grid,
            l_max,
            channels: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn channels(&self) -> &BTreeMap<SphericalIndex, Channel> {
        &self.channels
    }

    pub fn channel(&self, idx: SphericalIndex) -> Option<&Channel> {
        self.channels.get(&idx)
    }

    pub fn is_zero(&self) -> bool {
        self.channels.values().all(|c| c.u.is_zero() && c.w.is_zero())
    }

    /// Largest profile value over all channels.
    pub fn max_abs(&self) -> f64 {
        self.channels.values().fold(0.0, |m, c| m.max(c.u.max_abs()).max(c.w.max_abs()))
    }

    /// Channels whose `u'(0)` is non-zero relative to the whole field.
    pub fn singular_channels(&self) -> Vec<SphericalIndex> {
        let scale = self.max_abs();
        self.channels
            .iter()
            .filter(|(_, c)| c.u.slope().norm() > ORIGIN_TOLERANCE * scale)
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn is_singular(&self) -> bool {
        !self.singular_channels().is_empty()
    }

    pub fn insert(&mut self, idx: SphericalIndex, u: ComplexProfile, w: ComplexProfile) -> Result<()> {
        let idx = SphericalIndex::new(idx.l, idx.m)?;
        if idx.l == 0 || idx.l > self.l_max {
            return Err(Error::Index(format!("transverse channels need 1 <= l <= {}, got l = {}", self.l_max, idx.l)));
        }
        if !u.grid().same_as(&self.grid) || !w.grid().same_as(&self.grid) {
            return Err(Error::Grid("channel profiles must live on the field's grid".into()));
        }
        self.channels.insert(idx, Channel { u, w });
        Ok(())
    }

    /// Insert a channel with real `u` and vanishing `w`.
    pub fn with_u(mut self, idx: SphericalIndex, u: RadialFunction) -> Result<Self> {
        let w = ComplexProfile::zeros(&self.grid);
        self.insert(idx, ComplexProfile::real(u), w)?;
        Ok(self)
    }

    /// Insert a channel with real `w` and vanishing `u`.
    pub fn with_w(mut self, idx: SphericalIndex, w: RadialFunction) -> Result<Self> {
        let u = ComplexProfile::zeros(&self.grid);
        self.insert(idx, u, ComplexProfile::real(w))?;
        Ok(self)
    }

    /// Real l = 1 field whose `u` channels are `profile` times the spherical
    /// components of `direction`; near the origin it behaves like
    /// `A_0/|x|` when `profile'(0) != 0`.
    pub fn singular_l1(direction: [f64; 3], profile: &RadialFunction) -> Result<Self> {
        let grid = profile.grid().clone();
        let mut tf = TransverseField::new(grid.clone(), 1);
        for (m, c) in spherical_components(direction) {
            if c != C0 {
                tf.insert(
                    SphericalIndex::new(1, m)?,
                    ComplexProfile::from_scaled(profile, c),
                    ComplexProfile::zeros(&grid),
                )?;
            }
        }
        Ok(tf)
    }

    /// Largest pointwise deviation between the two parametrisations, relative
    /// to the largest profile value of `self`.
    pub fn relative_difference(&self, other: &TransverseField) -> f64 {
        let zero = ComplexProfile::zeros(&self.grid);
        let mut keys: Vec<SphericalIndex> = self.channels.keys().chain(other.channels.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in keys {
            let a = self.channels.get(&k);
            let b = other.channels.get(&k);
            let (au, aw) = a.map_or((&zero, &zero), |c| (&c.u, &c.w));
            let (bu, bw) = b.map_or((&zero, &zero), |c| (&c.u, &c.w));
            diff = diff.max(au.max_abs_difference(bu)).max(aw.max_abs_difference(bw));
            scale = scale.max(au.max_abs()).max(aw.max_abs());
        }
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    /// VSH coefficients `(f_Υ, f_Ψ, f_Φ)` of one channel at radius `r` and
    /// their radial derivatives.
    pub fn channel_amplitudes(&self, idx: SphericalIndex, r: f64) -> Option<([Complex64; 3], [Complex64; 3])> {
        let ch = self.channels.get(&idx)?;
        let lt = idx.ltilde();
        let [u, du, ddu] = ch.u.eval_with_derivatives(r);
        let [w, dw, _] = ch.w.eval_with_derivatives(r);
        let r2 = r * r;
        let f = [u * (lt / r2), du / r, w / r];
        let df = [(du / r2 - u * (2.0 / (r2 * r))) * lt, ddu / r - du / r2, dw / r - w / r2];
        Some((f, df))
    }

    /// Field value at a Cartesian point.
    pub fn eval_at(&self, x: [f64; 3]) -> Vec3c {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let pt = AngularPoint::colatitude((x[2] / r).clamp(-1.0, 1.0).acos(), x[1].atan2(x[0]));
        let mut out = [C0; 3];
        for &idx in self.channels.keys() {
            let (f, _) = self.channel_amplitudes(idx, r).expect("channel exists");
            for (k, kind) in VshKind::ALL.iter().enumerate() {
                let z = eval_vsh(*kind, idx, pt).expect("l >= 1");
                for c in 0..3 {
                    out[c] += f[k] * z[c];
                }
            }
        }
        out
    }
}

/// Spherical components `c_m` of a real direction vector, such that
/// `Σ_m c_m Y_1m` is proportional to `direction · r̂` and the conjugate-pair
/// condition `c_{-m} = (-1)^m conj(c_m)` holds.
pub fn spherical_components(d: [f64; 3]) -> [(i64, Complex64); 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        (-1, Complex64::new(d[0] * s, d[1] * s)),
        (0, Complex64::new(d[2], 0.0)),
        (1, Complex64::new(-d[0] * s, d[1] * s)),
    ]
}

/// Cartesian samples on the radial × angular product grid, stored radius-major.
#[derive(Debug, Clone)]
pub struct SampledVectorField {
    grid: Arc<RadialGrid>,
    quad: Arc<AngularQuadrature>,
    values: Vec<Vec3c>,
    singular: bool,
}

impl SampledVectorField {
    pub fn from_values(grid: Arc<RadialGrid>, quad: Arc<AngularQuadrature>, values: Vec<Vec3c>) -> Result<Self> {
        if values.len() != grid.len() * quad.len() {
            return Err(Error::Grid(format!(
                "{} samples for a {}×{} product grid",
                values.len(),
                grid.len(),
                quad.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("non-finite field sample".into()));
        }
        Ok(SampledVectorField {
            grid,
            quad,
            values,
            singular: false,
        })
    }

    pub fn zeros(grid: Arc<RadialGrid>, quad: Arc<AngularQuadrature>) -> Self {
        let n = grid.len() * quad.len();
        SampledVectorField {
            grid,
            quad,
            values: vec![[C0; 3]; n],
            singular: false,
        }
    }

    pub fn from_fn<F>(grid: Arc<RadialGrid>, quad: Arc<AngularQuadrature>, f: F) -> Result<Self>
    where
        F: Fn(f64, AngularPoint) -> Vec3c,
    {
        let mut values = Vec::with_capacity(grid.len() * quad.len());
        for &r in grid.nodes() {
            for &p in quad.nodes() {
                values.push(f(r, p));
            }
        }
        Self::from_values(grid, quad, values)
    }

    /// Tag the field as carrying an `A_0/|x|` singularity at the origin.
    pub fn with_singular_tag(mut self, singular: bool) -> Self {
        self.singular = singular;
        self
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn quadrature(&self) -> &Arc<AngularQuadrature> {
        &self.quad
    }

    pub fn values(&self) -> &[Vec3c] {
        &self.values
    }

    /// Sample at radial node `i`, angular node `j`.
    pub fn at(&self, i: usize, j: usize) -> Vec3c {
        self.values[i * self.quad.len() + j]
    }

    fn shell(&self, i: usize) -> &[Vec3c] {
        let n = self.quad.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// `‖A‖² = ∫ |A|² d³x` by product quadrature.
    pub fn norm_squared(&self) -> f64 {
        let wa = self.quad.weights();
        let nodes = self.grid.nodes();
        let wr = self.grid.weights();
        (0..self.grid.len())
            .map(|i| {
                let s: f64 = self.shell(i).iter().zip(wa).map(|(v, w)| w * cdot(v, v).re).sum();
                wr[i] * nodes[i] * nodes[i] * s
            })
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `‖self - other‖`.
    pub fn distance(&self, other: &SampledVectorField) -> Result<f64> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
            .collect();
        let d = SampledVectorField {
            grid: self.grid.clone(),
            quad: self.quad.clone(),
            values,
            singular: false,
        };
        Ok(d.norm())
    }

    fn check_compatible(&self, other: &SampledVectorField) -> Result<()> {
        if !self.grid.same_as(&other.grid) || self.quad.len() != other.quad.len() {
            return Err(Error::Grid("fields sampled on different product grids".into()));
        }
        Ok(())
    }

    /// `a_Z(r_i) = ∫ conj(Z)·A dΩ` for all `(kind, l, m)` with `l <= l_max`,
    /// indexed `[kind][linear(l, m)][i]`.
    fn projections(&self, l_max: usize, exec: Execution) -> [Vec<Vec<Complex64>>; 3] {
        let table = VshTable::new(l_max, self.quad.nodes());
        let w = self.quad.weights();
        let labels: Vec<SphericalIndex> = SphericalIndex::range(0, l_max).collect();
        let per_idx = exec.map_slice(&labels, |&idx| {
            let mut out: [Vec<Complex64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            for kind in VshKind::ALL {
                if idx.l < kind.min_l() {
                    out[kind as usize] = vec![C0; self.grid.len()];
                    continue;
                }
                let z = table.get(kind, idx);
                out[kind as usize] = (0..self.grid.len())
                    .map(|i| self.shell(i).iter().zip(z).zip(w).map(|((a, zz), &wk)| cdot(zz, a) * wk).sum())
                    .collect();
            }
            out
        });
        let mut res: [Vec<Vec<Complex64>>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for out in per_idx {
            let [a, b, c] = out;
            res[0].push(a);
            res[1].push(b);
            res[2].push(c);
        }
        res
    }
}

/// Samples of the gradient field `∇(Σ v_lm(r) Y_lm)`.
#[derive(Debug, Clone)]
pub struct LongitudinalField {
    grid: Arc<RadialGrid>,
    channels: BTreeMap<SphericalIndex, ComplexProfile>,
}

impl LongitudinalField {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        LongitudinalField {
            grid,
            channels: BTreeMap::new(),
        }
    }

    pub fn with_potential(mut self, idx: SphericalIndex, v: ComplexProfile) -> Result<Self> {
        let idx = SphericalIndex::new(idx.l, idx.m)?;
        if !v.grid().same_as(&self.grid) {
            return Err(Error::Grid("potential must live on the field's grid".into()));
        }
        self.channels.insert(idx, v);
        Ok(self)
    }

    /// `∇(v Y) = v' Υ + (l̃ v / r) Ψ`.
    pub fn sample(&self, quad: &Arc<AngularQuadrature>) -> SampledVectorField {
        let l_max = self.channels.keys().map(|k| k.l).max().unwrap_or(0);
        let table = VshTable::new(l_max, quad.nodes());
        let nodes = self.grid.nodes();
        let na = quad.len();
        let mut values = vec![[C0; 3]; self.grid.len() * na];
        for (&idx, v) in &self.channels {
            let dv = v.derivative();
            let ups = table.get(VshKind::Upsilon, idx);
            let psi = table.get(VshKind::Psi, idx);
            let lt = idx.ltilde();
            for (i, &r) in nodes.iter().enumerate() {
                let a = dv[i];
                let b = v.value(i) * (lt / r);
                for j in 0..na {
                    let cell = &mut values[i * na + j];
                    for c in 0..3 {
                        cell[c] += ups[j][c] * a + psi[j][c] * b;
                    }
                }
            }
        }
        SampledVectorField {
            grid: self.grid.clone(),
            quad: quad.clone(),
            values,
            singular: false,
        }
    }
}

/// Cartesian samples of a transverse field.
pub fn reconstruct(tf: &TransverseField, quad: &Arc<AngularQuadrature>, exec: Execution) -> SampledVectorField {
    let grid = tf.grid.clone();
    let table = VshTable::new(tf.l_max, quad.nodes());
    let na = quad.len();
    let nodes = grid.nodes();
    let chans: Vec<(SphericalIndex, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> = tf
        .channels
        .iter()
        .map(|(&idx, ch)| (idx, ch.u.values(), ch.u.derivative(), ch.w.values()))
        .collect();
    let shells = exec.map_range(grid.len(), |i| {
        let r = nodes[i];
        let mut shell = vec![[C0; 3]; na];
        for (idx, u, du, w) in &chans {
            let lt = idx.ltilde();
            let fy = u[i] * (lt / (r * r));
            let fp = du[i] / r;
            let ff = w[i] / r;
            let (ty, tp, tf_) = (
                table.get(VshKind::Upsilon, *idx),
                table.get(VshKind::Psi, *idx),
                table.get(VshKind::Phi, *idx),
            );
            for j in 0..na {
                for c in 0..3 {
                    shell[j][c] += ty[j][c] * fy + tp[j][c] * fp + tf_[j][c] * ff;
                }
            }
        }
        shell
    });
    let singular = tf.is_singular();
    SampledVectorField {
        grid,
        quad: quad.clone(),
        values: shells.into_iter().flatten().collect(),
        singular,
    }
}

/// How [`decompose`] treats a field that is not transverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transversality {
    /// Fail when the divergence residual exceeds the threshold.
    Require { threshold: f64 },
    /// Extract the transverse part regardless.
    Project,
}

/// Default divergence threshold for [`Transversality::Require`].
pub const DIVERGENCE_THRESHOLD: f64 = 1e-6;

/// Transverse `(u_lm, w_lm)` for `1 <= l <= l_max`. Channels whose profiles
/// vanish identically are omitted. Extracted profiles carry no decay class,
/// so integrals over them stop at `r_max`.
pub fn decompose(f: &SampledVectorField, l_max: usize, mode: Transversality, exec: Execution) -> Result<TransverseField> {
    if let Transversality::Require { threshold } = mode {
        let residual = divergence_residual(f);
        if residual > threshold {
            return Err(Error::Transversality { residual, threshold });
        }
    }
    let grid = f.grid.clone();
    let proj = f.projections(l_max, exec);
    let nodes = grid.nodes();
    let labels: Vec<SphericalIndex> = SphericalIndex::range(1, l_max).collect();
    let chans = exec.map_slice(&labels, |&idx| -> Result<Option<Channel>> {
        let lin = idx.linear();
        let (ay, ap, af) = (&proj[0][lin], &proj[1][lin], &proj[2][lin]);
        let w: Vec<Complex64> = nodes.iter().zip(af).map(|(&r, &a)| a * r).collect();
        let l = idx.l as i32;
        let lf = idx.l as f64;
        let lt = idx.ltilde();
        // The outer integrand behaves like s^{-l-1} times a smooth function
        // for fields with the A_0/|x| singularity, so the power is split off
        // and integrated exactly.
        let inner: Vec<Complex64> = (0..nodes.len())
            .map(|i| (ay[i] * lt + ap[i] * (lf + 1.0)) * nodes[i].powi(l + 1))
            .collect();
        let outer: Vec<Complex64> = (0..nodes.len()).map(|i| (ay[i] * lt - ap[i] * lf) * nodes[i]).collect();
        let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<_>>();
        let im = |v: &[Complex64]| v.iter().map(|z| z.im).collect::<Vec<_>>();
        let lower_re = grid.cumulative(&re(&inner));
        let lower_im = grid.cumulative(&im(&inner));
        let (ore, oim) = (re(&outer), im(&outer));
        let upper = grid.cumulative_from_right_weighted(&[&ore, &oim], l + 1);
        let (upper_re, upper_im) = (&upper[0], &upper[1]);
        let c = 1.0 / (2.0 * lf + 1.0);
        let u: Vec<Complex64> = (0..nodes.len())
            .map(|i| {
                let r = nodes[i];
                let lo = Complex64::new(lower_re[i], lower_im[i]);
                let up = Complex64::new(upper_re[i], upper_im[i]);
                (lo / r.powi(l) + up * r.powi(l + 1)) * c
            })
            .collect();
        if u.iter().chain(&w).all(|z| *z == C0) {
            return Ok(None);
        }
        Ok(Some(Channel {
            u: ComplexProfile::from_values(&grid, &u, Decay::Unknown)?,
            w: ComplexProfile::from_values(&grid, &w, Decay::Unknown)?,
        }))
    });
    let mut tf = TransverseField::new(grid, l_max);
    for (idx, ch) in labels.into_iter().zip(chans) {
        if let Some(ch) = ch? {
            tf.channels.insert(idx, ch);
        }
    }
    Ok(tf)
}

/// Relative L² norm of `∇·A` over interior radial nodes, evaluated per
/// `(l, m)` from `(r² a_Υ)'/r² - l̃ a_Ψ / r` for all degrees the quadrature
/// resolves. Returns 0 for the zero field.
pub fn divergence_residual(f: &SampledVectorField) -> f64 {
    let l_max = f.quad.resolved_l_max().unwrap_or(0);
    let proj = f.projections(l_max, Execution::Serial);
    let grid = &f.grid;
    let nodes = grid.nodes();
    let w = grid.weights();
    let (mut num, mut den) = (0.0, 0.0);
    for idx in SphericalIndex::range(0, l_max) {
        let lin = idx.linear();
        let lt = idx.ltilde();
        let r2a: Vec<Complex64> = nodes.iter().zip(&proj[0][lin]).map(|(&r, &a)| a * (r * r)).collect();
        let re: Vec<f64> = r2a.iter().map(|z| z.re).collect();
        let im: Vec<f64> = r2a.iter().map(|z| z.im).collect();
        let dre = grid.derivative(&re);
        let dim = grid.derivative(&im);
        for i in grid.interior() {
            let r = nodes[i];
            let radial = Complex64::new(dre[i], dim[i]) / (r * r);
            let tangential = proj[1][lin][i] * (lt / r);
            num += w[i] * r * r * (radial - tangential).norm_sqr();
            den += w[i] * r * r * (radial.norm_sqr() + tangential.norm_sqr());
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Orthogonal projection onto the transverse subspace resolved by the field's
/// angular quadrature.
pub fn project_transverse(f: &SampledVectorField, exec: Execution) -> SampledVectorField {
    let l_max = f.quad.resolved_l_max().unwrap_or(0).max(1);
    let tf = decompose(f, l_max, Transversality::Project, exec).expect("projection mode does not fail");
    let mut out = reconstruct(&tf, &f.quad, exec);
    out.singular = f.singular;
    out
}

/// Sampled l = 1 field with the `A_0/|x|` behaviour at the origin when
/// `profile'(0) != 0`.
pub fn make_singular_test_field(
    direction: [f64; 3],
    profile: &RadialFunction,
    quad: &Arc<AngularQuadrature>,
) -> Result<SampledVectorField> {
    let tf = TransverseField::singular_l1(direction, profile)?;
    Ok(reconstruct(&tf, quad, Execution::default()))
}
