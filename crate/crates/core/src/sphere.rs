//! Scalar and vector spherical harmonics on the unit sphere, product
//! Gauss–Legendre × trapezoid quadrature and the angular Laplacian action on
//! the vector harmonics.
//!
//! Conventions: complex harmonics with the Condon–Shortley phase, polar angle
//! measured as colatitude (`z = cos θ`). The three vector harmonics at
//! `(l, m)` are
//!
//! * `Υ = r̂ Y`
//! * `Ψ = r ∇Y / l̃`
//! * `Φ = r̂ × Ψ = (x × ∇) Y / l̃`
//!
//! with `l̃ = √(l(l+1))`. `Φ` is evaluated through the angular momentum
//! ladder (`x × ∇ = i L`), which stays regular at the poles, and `Ψ = Φ × r̂`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;

pub type Vec3c = [Complex64; 3];

const C0: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// How the polar angle of an input/output angular coordinate is measured.
///
/// `Colatitude` is the internal convention. `Chart` uses `z = sin ψ`,
/// `(x, y) = cos ψ (cos φ, sin φ)`; for `ψ ∈ [0, π]` it covers only the upper
/// hemisphere (twice), so it is accepted on input and only points with
/// `z >= 0` can be written back in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarConvention {
    #[default]
    Colatitude,
    Chart,
}

/// A direction on the unit sphere, stored as colatitude `theta ∈ [0, π]` and
/// azimuth `phi ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularPoint {
    pub theta: f64,
    pub phi: f64,
}

fn wrap_azimuth(phi: f64) -> f64 {
    let p = phi.rem_euclid(2.0 * PI);
    if p >= 2.0 * PI {
        0.0
    } else {
        p
    }
}

impl AngularPoint {
    pub fn colatitude(theta: f64, phi: f64) -> Self {
        AngularPoint {
            theta: theta.clamp(0.0, PI),
            phi: wrap_azimuth(phi),
        }
    }

    pub fn from_chart(psi: f64, phi: f64) -> Self {
        let (s, c) = psi.sin_cos();
        let theta = s.clamp(-1.0, 1.0).acos();
        let phi = if c < 0.0 { phi + PI } else { phi };
        AngularPoint::colatitude(theta, phi)
    }

    pub fn from_convention(conv: PolarConvention, psi: f64, phi: f64) -> Self {
        match conv {
            PolarConvention::Colatitude => AngularPoint::colatitude(psi, phi),
            PolarConvention::Chart => AngularPoint::from_chart(psi, phi),
        }
    }

    /// `(psi, phi)` in the requested convention.
    pub fn to_convention(&self, conv: PolarConvention) -> Result<(f64, f64)> {
        match conv {
            PolarConvention::Colatitude => Ok((self.theta, self.phi)),
            PolarConvention::Chart => {
                if self.theta > FRAC_PI_2 + 1e-15 {
                    Err(Error::Domain(format!(
                        "direction with colatitude {} lies below the chart's hemisphere",
                        self.theta
                    )))
                } else {
                    Ok(((FRAC_PI_2 - self.theta).max(0.0), self.phi))
                }
            }
        }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Angular momentum indices `(l, m)` with `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SphericalIndex {
    pub l: usize,
    pub m: i64,
}

impl SphericalIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::Index(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(SphericalIndex { l, m })
    }

    /// `l̃ = √(l(l+1))`.
    pub fn ltilde(&self) -> f64 {
        ((self.l * (self.l + 1)) as f64).sqrt()
    }

    /// Position in the `(l, m)` enumeration `l² + l + m`.
    pub fn linear(&self) -> usize {
        ((self.l * self.l + self.l) as i64 + self.m) as usize
    }

    /// All indices with `l_min <= l <= l_max` in `(l, m)` order.
    pub fn range(l_min: usize, l_max: usize) -> impl Iterator<Item = SphericalIndex> {
        (l_min..=l_max).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| SphericalIndex { l, m }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VshKind {
    Upsilon,
    Psi,
    Phi,
}

impl VshKind {
    pub const ALL: [VshKind; 3] = [VshKind::Upsilon, VshKind::Psi, VshKind::Phi];

    pub fn min_l(self) -> usize {
        match self {
            VshKind::Upsilon => 0,
            VshKind::Psi | VshKind::Phi => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VshKind::Upsilon => "upsilon",
            VshKind::Psi => "psi",
            VshKind::Phi => "phi",
        }
    }
}

/// All `Y_lm(θ, φ)` with `l <= l_max`, indexed by [`SphericalIndex::linear`].
pub fn ylm_table(l_max: usize, pt: AngularPoint) -> Vec<Complex64> {
    let n = (l_max + 1) * (l_max + 1);
    let mut out = vec![C0; n];
    let (st, ct) = pt.theta.sin_cos();
    // Fully normalised associated Legendre functions, Condon–Shortley phase.
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * st;
        }
        let e = Complex64::from_polar(1.0, m as f64 * pt.phi);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mut store = |l: usize, p: f64| {
            let y = e * p;
            out[l * l + l + m] = y;
            if m > 0 {
                out[l * l + l - m] = y.conj() * sign;
            }
        };
        store(m, pmm);
        if m == l_max {
            break;
        }
        let mf = m as f64;
        let mut p_lm2 = pmm;
        let mut p_lm1 = (2.0 * mf + 3.0).sqrt() * ct * pmm;
        store(m + 1, p_lm1);
        for l in m + 2..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p = a * (ct * p_lm1 - b * p_lm2);
            store(l, p);
            p_lm2 = p_lm1;
            p_lm1 = p;
        }
    }
    out
}

/// Scalar harmonic `Y_lm`.
pub fn eval_ylm(idx: SphericalIndex, pt: AngularPoint) -> Result<Complex64> {
    let idx = SphericalIndex::new(idx.l, idx.m)?;
    Ok(ylm_table(idx.l, pt)[idx.linear()])
}

/// The three vector harmonics at one `(l, m)`, given that degree's scalar
/// harmonics `y_l[m + l]`.
fn vsh_from_degree(l: usize, m: i64, y_l: &[Complex64], rhat: [f64; 3]) -> [Vec3c; 3] {
    let y = y_l[(m + l as i64) as usize];
    let ups = [y * rhat[0], y * rhat[1], y * rhat[2]];
    if l == 0 {
        return [ups, [C0; 3], [C0; 3]];
    }
    let lf = l as f64;
    let mf = m as f64;
    let up = if m < l as i64 {
        y_l[(m + 1 + l as i64) as usize] * ((lf - mf) * (lf + mf + 1.0)).sqrt()
    } else {
        C0
    };
    let dn = if m > -(l as i64) {
        y_l[(m - 1 + l as i64) as usize] * ((lf + mf) * (lf - mf + 1.0)).sqrt()
    } else {
        C0
    };
    let lx = (up + dn) * 0.5;
    let ly = (up - dn) / (2.0 * I);
    let lz = y * mf;
    let f = I / (lf * (lf + 1.0)).sqrt();
    let phi = [lx * f, ly * f, lz * f];
    // Ψ = Φ × r̂
    let psi = [
        phi[1] * rhat[2] - phi[2] * rhat[1],
        phi[2] * rhat[0] - phi[0] * rhat[2],
        phi[0] * rhat[1] - phi[1] * rhat[0],
    ];
    [ups, psi, phi]
}

/// Vector spherical harmonic of the given kind.
pub fn eval_vsh(kind: VshKind, idx: SphericalIndex, pt: AngularPoint) -> Result<Vec3c> {
    let idx = SphericalIndex::new(idx.l, idx.m)?;
    if idx.l < kind.min_l() {
        return Err(Error::Index(format!("{} harmonic requires l >= 1", kind.name())));
    }
    let table = ylm_table(idx.l, pt);
    let l = idx.l;
    let y_l = &table[l * l..(l + 1) * (l + 1)];
    let all = vsh_from_degree(l, idx.m, y_l, pt.unit_vector());
    Ok(match kind {
        VshKind::Upsilon => all[0],
        VshKind::Psi => all[1],
        VshKind::Phi => all[2],
    })
}

/// Hermitian product `Σ_k conj(a_k) b_k`.
pub fn cdot(a: &Vec3c, b: &Vec3c) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

/// Tensor-product rule on S²: Gauss–Legendre in `cos θ`, uniform in `φ`.
#[derive(Debug, Clone)]
pub struct AngularQuadrature {
    nodes: Vec<AngularPoint>,
    weights: Vec<f64>,
    n_theta: usize,
    n_phi: usize,
}

impl AngularQuadrature {
    pub fn gauss_product(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::Config("angular quadrature needs at least one node per direction".into()));
        }
        let (x, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.clamp(-1.0, 1.0).acos();
            for k in 0..n_phi {
                nodes.push(AngularPoint::colatitude(theta, k as f64 * dphi));
                weights.push(wi * dphi);
            }
        }
        Ok(AngularQuadrature {
            nodes,
            weights,
            n_theta,
            n_phi,
        })
    }

    /// Rule integrating products of vector harmonics with `l <= l_max` exactly.
    /// Their Cartesian components have harmonic degree up to `l_max + 1`, so
    /// the rule must be exact to degree `2 l_max + 2`.
    pub fn for_l_max(l_max: usize) -> Self {
        Self::gauss_product(l_max + 2, 2 * l_max + 3).expect("non-empty rule")
    }

    /// Rule with `order` Gauss nodes and `2 order - 1` azimuthal nodes.
    pub fn with_order(order: usize) -> Result<Self> {
        Self::gauss_product(order, (2 * order).saturating_sub(1).max(1))
    }

    pub fn nodes(&self) -> &[AngularPoint] {
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

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    /// Highest harmonic degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        (2 * self.n_theta - 1).min(self.n_phi.saturating_sub(1))
    }

    /// Largest `l_max` for which [`vsh_gram`] is exact on this rule.
    pub fn resolved_l_max(&self) -> Option<usize> {
        let d = self.exact_degree();
        if d >= 2 {
            Some((d - 2) / 2)
        } else {
            None
        }
    }

    pub fn integrate<F: Fn(AngularPoint) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| f(p) * w).sum()
    }
}

/// Values of every vector harmonic with `l <= l_max` at every node of a
/// quadrature. Indexed by [`SphericalIndex::linear`] and node position.
#[derive(Debug, Clone)]
pub struct VshTable {
    l_max: usize,
    n_nodes: usize,
    values: [Vec<Vec3c>; 3],
}

impl VshTable {
    pub fn new(l_max: usize, nodes: &[AngularPoint]) -> Self {
        let n_idx = (l_max + 1) * (l_max + 1);
        let n_nodes = nodes.len();
        let mut values = [
            vec![[C0; 3]; n_idx * n_nodes],
            vec![[C0; 3]; n_idx * n_nodes],
            vec![[C0; 3]; n_idx * n_nodes],
        ];
        for (j, pt) in nodes.iter().enumerate() {
            let table = ylm_table(l_max, *pt);
            let rhat = pt.unit_vector();
            for l in 0..=l_max {
                let y_l = &table[l * l..(l + 1) * (l + 1)];
                for m in -(l as i64)..=l as i64 {
                    let lin = ((l * l + l) as i64 + m) as usize;
                    let v = vsh_from_degree(l, m, y_l, rhat);
                    for k in 0..3 {
                        values[k][lin * n_nodes + j] = v[k];
                    }
                }
            }
        }
        VshTable {
            l_max,
            n_nodes,
            values,
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Samples of one harmonic at every node.
    pub fn get(&self, kind: VshKind, idx: SphericalIndex) -> &[Vec3c] {
        let k = kind as usize;
        let lin = idx.linear();
        &self.values[k][lin * self.n_nodes..(lin + 1) * self.n_nodes]
    }
}

/// Gram matrix of all vector harmonics with `l <= l_max` under a quadrature.
#[derive(Debug, Clone)]
pub struct Gram {
    pub labels: Vec<(VshKind, SphericalIndex)>,
    pub entries: Vec<Complex64>,
}

impl Gram {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim() + j]
    }

    /// `max_ij |G_ij - δ_ij|`.
    pub fn identity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).norm());
            }
        }
        worst
    }
}

/// Labels of all vector harmonics with `l <= l_max`, ordered by `(l, m)` and
/// then kind.
pub fn vsh_labels(l_max: usize) -> Vec<(VshKind, SphericalIndex)> {
    let mut labels = Vec::new();
    for idx in SphericalIndex::range(0, l_max) {
        for kind in VshKind::ALL {
            if idx.l >= kind.min_l() {
                labels.push((kind, idx));
            }
        }
    }
    labels
}

pub fn vsh_gram(l_max: usize, quad: &AngularQuadrature) -> Gram {
    let labels = vsh_labels(l_max);
    let table = VshTable::new(l_max, quad.nodes());
    let w = quad.weights();
    let n = labels.len();
    let mut entries = vec![C0; n * n];
    for i in 0..n {
        let a = table.get(labels[i].0, labels[i].1);
        for j in i..n {
            let b = table.get(labels[j].0, labels[j].1);
            let g: Complex64 = a.iter().zip(b).zip(w).map(|((x, y), &wk)| cdot(x, y) * wk).sum();
            entries[i * n + j] = g;
            entries[j * n + i] = g.conj();
        }
    }
    Gram { labels, entries }
}

/// Action of the (positive) angular Laplacian `Δ_Ω = -Δ_{S²}`, applied to
/// Cartesian components, on one vector harmonic, as coefficients over the
/// vector harmonics of the same `(l, m)`.
pub fn angular_laplacian_action(kind: VshKind, idx: SphericalIndex) -> Vec<(VshKind, f64)> {
    let lt = idx.ltilde();
    let l2 = (idx.l * (idx.l + 1)) as f64;
    match kind {
        VshKind::Upsilon if idx.l == 0 => vec![(VshKind::Upsilon, 2.0)],
        VshKind::Upsilon => vec![(VshKind::Upsilon, 2.0 + l2), (VshKind::Psi, -2.0 * lt)],
        VshKind::Psi => vec![(VshKind::Upsilon, -2.0 * lt), (VshKind::Psi, l2)],
        VshKind::Phi => vec![(VshKind::Phi, l2)],
    }
}

/// Largest deviation, relative to `1 + |expected|`, between finite-difference
/// `Δ_Ω` of every VSH with `l <= l_max` and its mixing-coefficient action,
/// sampled at a few generic points away from the poles.
pub fn laplacian_action_defect(l_max: usize, h: f64) -> f64 {
    const POINTS: [(f64, f64); 3] = [(1.0, 0.7), (0.4, 2.1), (2.3, -1.2)];
    let mut worst: f64 = 0.0;
    for idx in SphericalIndex::range(0, l_max) {
        for kind in VshKind::ALL {
            if idx.l < kind.min_l() {
                continue;
            }
            for (t, p) in POINTS {
                let fd = fd_angular_laplacian(|a| eval_vsh(kind, idx, a).expect("valid index"), t, p, h);
                let mut want = [C0; 3];
                for (k2, c) in angular_laplacian_action(kind, idx) {
                    let v = eval_vsh(k2, idx, AngularPoint::colatitude(t, p)).expect("valid index");
                    for i in 0..3 {
                        want[i] += v[i] * c;
                    }
                }
                for i in 0..3 {
                    worst = worst.max((fd[i] - want[i]).norm() / (1.0 + want[i].norm()));
                }
            }
        }
    }
    worst
}

/// `Δ_Ω f` at `(θ, φ)` by sixth-order central differences of step `h` in
/// both angles. The point must stay at least `3h` away from the poles.
pub fn fd_angular_laplacian<F>(f: F, theta: f64, phi: f64, h: f64) -> Vec3c
where
    F: Fn(AngularPoint) -> Vec3c,
{
    const D1: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    const D2: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
    let mut ft = [[C0; 3]; 7];
    let mut fp = [[C0; 3]; 7];
    for s in 0..7 {
        let off = (s as f64 - 3.0) * h;
        ft[s] = f(AngularPoint {
            theta: theta + off,
            phi,
        });
        fp[s] = f(AngularPoint {
            theta,
            phi: phi + off,
        });
    }
    let (st, ct) = theta.sin_cos();
    let mut out = [C0; 3];
    for c in 0..3 {
        let mut d1 = C0;
        let mut d2 = C0;
        let mut dpp = C0;
        for s in 0..7 {
            d1 += ft[s][c] * D1[s];
            d2 += ft[s][c] * D2[s];
            dpp += fp[s][c] * D2[s];
        }
        let d1 = d1 / (60.0 * h);
        let d2 = d2 / (180.0 * h * h);
        let dpp = dpp / (180.0 * h * h);
        out[c] = -(d2 + d1 * (ct / st) + dpp / (st * st));
    }
    out
}
