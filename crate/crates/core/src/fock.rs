//! Finite-mode Fock algebra on polynomial × Gaussian states.
//!
//! Every mode carries a Gaussian parameter `γ`: `γ = λ` for a continuous
//! mode, `γ = -iκ` for the discrete mode of an extension with `κ < 0`. A
//! state is `P(u) exp(-½ Σ γ_i u_i²)` and is stored through `P` alone. The
//! mode Hamiltonian `-∂² + γ² u²` (which is `-∂² + λ²u²` or `-∂² - κ²u²`),
//! the creator `b = γu - ∂` and the annihilator `a = γu + ∂` act on `P` as
//!
//! - `a P = ∂P`
//! - `b P = 2γ u P - ∂P`
//! - `H P = -∂²P + 2γ u ∂P + γ P`
//!
//! so the vacuum has eigenvalue `Σ γ_i`, `[a_i, b_j] = 2γ_i δ_ij`, and every
//! creator raises the eigenvalue by `2γ_i`. All operations are exact up to
//! floating-point rounding of the coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::SpectralFamily;

pub const MAX_MODES: usize = 16;
pub const MAX_DEGREE: usize = 8;

/// Relative tolerance of the eigenvector ratio test.
pub const EIGEN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Continuous { lambda: f64 },
    Discrete { kappa: f64 },
}

impl Mode {
    pub fn gamma(&self) -> Complex64 {
        match *self {
            Mode::Continuous { lambda } => Complex64::new(lambda, 0.0),
            Mode::Discrete { kappa } => Complex64::new(0.0, -kappa),
        }
    }
}

/// A finite set of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSystem {
    modes: Vec<Mode>,
    max_degree: usize,
}

impl ModeSystem {
    /// Continuous modes at `lambdas` followed by one discrete mode per entry
    /// of `kappas`.
    pub fn new(lambdas: &[f64], kappas: &[f64]) -> Result<Self> {
        if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::Domain("mode frequencies must be positive and finite".into()));
        }
        let mut sorted = lambdas.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("mode frequencies must be distinct".into()));
        }
        if kappas.iter().any(|&k| !(k < 0.0) || !k.is_finite()) {
            return Err(Error::Domain("discrete modes exist only for finite κ < 0".into()));
        }
        let modes: Vec<Mode> = lambdas
            .iter()
            .map(|&lambda| Mode::Continuous { lambda })
            .chain(kappas.iter().map(|&kappa| Mode::Discrete { kappa }))
            .collect();
        if modes.len() > MAX_MODES {
            return Err(Error::Capacity(format!("{} modes exceed the cap of {MAX_MODES}", modes.len())));
        }
        Ok(ModeSystem {
            modes,
            max_degree: MAX_DEGREE,
        })
    }

    /// `count` continuous modes taken evenly from the family's λ grid, plus
    /// the discrete mode when the family has one.
    pub fn sampled(fam: &SpectralFamily, count: usize) -> Result<Self> {
        let ls = fam.lambdas();
        if count == 0 || count > ls.len() {
            return Err(Error::Domain(format!("cannot sample {count} modes from {} frequencies", ls.len())));
        }
        let stride = ls.len() / count;
        let lambdas: Vec<f64> = (0..count).map(|k| ls[k * stride + stride / 2]).collect();
        let kappas: Vec<f64> = match fam.param().kappa() {
            Some(k) if k < 0.0 => vec![k],
            _ => vec![],
        };
        Self::new(&lambdas, &kappas)
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Self {
        self.max_degree = max_degree;
        self
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `Σ γ_i`, the vacuum eigenvalue.
    pub fn vacuum_energy(&self) -> Complex64 {
        self.modes.iter().map(Mode::gamma).sum()
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.modes.len() {
            return Err(Error::Index(format!("mode {i} out of range 0..{}", self.modes.len())));
        }
        Ok(())
    }
}

/// Polynomial prefactor of a state. Monomials are keyed by their exponent
/// vectors; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeState {
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl ModeState {
    pub fn zero() -> Self {
        ModeState::default()
    }

    pub fn constant(sys: &ModeSystem, c: Complex64) -> Self {
        let mut s = ModeState::zero();
        s.add(vec![0; sys.len()], c);
        s
    }

    /// The monomial `Π u_i^{k_i}`.
    pub fn monomial(sys: &ModeSystem, exponents: &[u8]) -> Result<Self> {
        if exponents.len() != sys.len() {
            return Err(Error::Index(format!("{} exponents for {} modes", exponents.len(), sys.len())));
        }
        let degree: usize = exponents.iter().map(|&k| k as usize).sum();
        if degree > sys.max_degree {
            return Err(Error::Capacity(format!("degree {degree} exceeds the cap of {}", sys.max_degree)));
        }
        let mut s = ModeState::zero();
        s.add(exponents.to_vec(), Complex64::new(1.0, 0.0));
        Ok(s)
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.iter().map(|&e| e as usize).sum()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, exponents: &[u8]) -> Complex64 {
        self.terms.get(exponents).copied().unwrap_or_default()
    }

    fn add(&mut self, key: Vec<u8>, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_default();
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = ModeState::zero();
        for (k, v) in &self.terms {
            out.add(k.clone(), v * c);
        }
        out
    }

    pub fn plus(&self, other: &ModeState) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add(k.clone(), *v);
        }
        out
    }

    pub fn minus(&self, other: &ModeState) -> Self {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.norm()))
    }

    fn derivative(&self, i: usize) -> Self {
        let mut out = ModeState::zero();
        for (k, v) in &self.terms {
            if k[i] > 0 {
                let mut key = k.clone();
                key[i] -= 1;
                out.add(key, v * k[i] as f64);
            }
        }
        out
    }

    fn times_u(&self, i: usize) -> Self {
        let mut out = ModeState::zero();
        for (k, v) in &self.terms {
            let mut key = k.clone();
            key[i] += 1;
            out.add(key, *v);
        }
        out
    }
}

impl fmt::Display for ModeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", v.re, v.im)?;
            for (i, &e) in k.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·u{i}")?,
                    _ => write!(f, "·u{i}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

/// The Gaussian vacuum: unit prefactor.
pub fn vacuum_state(sys: &ModeSystem) -> ModeState {
    ModeState::constant(sys, Complex64::new(1.0, 0.0))
}

pub fn apply_annihilate(sys: &ModeSystem, i: usize, state: &ModeState) -> Result<ModeState> {
    sys.check_mode(i)?;
    Ok(state.derivative(i))
}

pub fn apply_create(sys: &ModeSystem, i: usize, state: &ModeState) -> Result<ModeState> {
    sys.check_mode(i)?;
    if state.degree() + 1 > sys.max_degree {
        return Err(Error::Capacity(format!("degree would exceed the cap of {}", sys.max_degree)));
    }
    let g = sys.modes[i].gamma();
    Ok(state.times_u(i).scaled(g * 2.0).minus(&state.derivative(i)))
}

pub fn apply_hamiltonian(sys: &ModeSystem, state: &ModeState) -> ModeState {
    let mut out = ModeState::zero();
    for (i, mode) in sys.modes.iter().enumerate() {
        let g = mode.gamma();
        let d = state.derivative(i);
        let term = d.times_u(i).scaled(g * 2.0).minus(&d.derivative(i)).plus(&state.scaled(g));
        out = out.plus(&term);
    }
    out
}

/// Symmetric coefficient tensor `σ_n` over mode indices, stored sparsely by
/// index tuple.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockCoefficients {
    order: usize,
    entries: BTreeMap<Vec<usize>, Complex64>,
}

impl FockCoefficients {
    pub fn new(order: usize) -> Self {
        FockCoefficients {
            order,
            entries: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, Complex64> {
        &self.entries
    }

    pub fn set(&mut self, indices: &[usize], value: Complex64) -> Result<()> {
        if indices.len() != self.order {
            return Err(Error::Index(format!("σ_{} needs {} indices, got {}", self.order, self.order, indices.len())));
        }
        self.entries.insert(indices.to_vec(), value);
        Ok(())
    }

    pub fn with(mut self, indices: &[usize], value: Complex64) -> Result<Self> {
        self.set(indices, value)?;
        Ok(self)
    }

    pub fn get(&self, indices: &[usize]) -> Complex64 {
        self.entries.get(indices).copied().unwrap_or_default()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|(k, v)| permutations(k).iter().all(|p| (self.get(p) - v).norm() <= 1e-14 * v.norm()))
    }

    /// Average over all index permutations.
    pub fn symmetrized(&self) -> Self {
        let mut out = FockCoefficients::new(self.order);
        for (k, v) in &self.entries {
            let perms = permutations(k);
            let share = v / perms.len() as f64;
            for p in perms {
                *out.entries.entry(p).or_default() += share;
            }
        }
        out.entries.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        out
    }
}

/// All orderings of `k`, repeated entries included once per position.
fn permutations(k: &[usize]) -> Vec<Vec<usize>> {
    if k.len() <= 1 {
        return vec![k.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..k.len() {
        let mut rest = k.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

/// `Σ σ(i_1..i_n) b_{i_1} ⋯ b_{i_n}` applied to the vacuum. A non-symmetric
/// `σ` is symmetrized first.
pub fn build_n_particle(sys: &ModeSystem, sigma: &FockCoefficients) -> Result<ModeState> {
    if sigma.order > sys.max_degree {
        return Err(Error::Capacity(format!("order {} exceeds the degree cap of {}", sigma.order, sys.max_degree)));
    }
    let sigma = if sigma.is_symmetric() {
        sigma.clone()
    } else {
        log::warn!("σ_{} is not symmetric under index permutations; symmetrizing", sigma.order);
        sigma.symmetrized()
    };
    // The creators commute, so tuples that are permutations of one another
    // produce the same product and are grouped by their sorted form.
    let mut grouped: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
    for (k, v) in &sigma.entries {
        for &i in k {
            sys.check_mode(i)?;
        }
        let mut key = k.clone();
        key.sort_unstable();
        *grouped.entry(key).or_default() += v;
    }
    let mut out = if sigma.order == 0 {
        vacuum_state(sys).scaled(sigma.get(&[]))
    } else {
        ModeState::zero()
    };
    for (k, v) in grouped {
        if k.is_empty() {
            continue;
        }
        let mut s = vacuum_state(sys);
        for &i in &k {
            s = apply_create(sys, i, &s)?;
        }
        out = out.plus(&s.scaled(v));
    }
    Ok(out)
}

/// Result of the eigenvector ratio test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub is_eigen: bool,
    pub eigenvalue: Option<Complex64>,
    /// `max|H P - c P| / max|H P|`.
    pub residual: f64,
}

pub fn eigen_check(sys: &ModeSystem, state: &ModeState) -> EigenCheck {
    if state.is_zero() {
        return EigenCheck {
            is_eigen: false,
            eigenvalue: None,
            residual: f64::NAN,
        };
    }
    let h = apply_hamiltonian(sys, state);
    let (key, pivot) = state.terms.iter().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).expect("non-empty");
    let c = h.coefficient(key) / pivot;
    let diff = h.minus(&state.scaled(c));
    let scale = h.max_abs().max(c.norm() * state.max_abs()).max(f64::MIN_POSITIVE);
    let residual = diff.max_abs() / scale;
    let is_eigen = residual <= EIGEN_TOLERANCE;
    EigenCheck {
        is_eigen,
        eigenvalue: is_eigen.then_some(c),
        residual,
    }
}
