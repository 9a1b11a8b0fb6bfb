//! Antisymmetric two-fermion pure states and their particle entanglement.
//!
//! A state `Σ_ab w_ab |a⟩|b⟩` is stored as its full antisymmetric
//! coefficient matrix `W` over the canonical spin-orbital order. The
//! one-particle reduced density matrix is then `ρ = W W†`, whose spectrum
//! comes in equal pairs `λᵢ/2`; the `λᵢ` are the Schmidt coefficients.
//!
//! Both measures are computed through two independent routes (trace formula
//! on `ρ` and Schmidt sum) and the routes are required to agree.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

#[allow(unused_imports)] // shadowed by inherent methods when std is in the graph
use num_traits::Float;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::spbasis::SpinOrbital;
use crate::{Error, Result};

pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-12;
pub const PAIRING_TOLERANCE: f64 = 1e-9;
/// Eigenvalues of `ρ` in `[-CLAMP_TOLERANCE, 0)` are treated as zero.
pub const CLAMP_TOLERANCE: f64 = 1e-12;
pub const LINEAR_ROUTE_TOLERANCE: f64 = 1e-10;
pub const VN_ROUTE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFermionState {
    w: DMatrix<Complex64>,
}

impl TwoFermionState {
    /// Validates `w` (square, even dimension, antisymmetric, normalized)
    /// and stores its exactly antisymmetrized copy.
    pub fn from_matrix(w: DMatrix<Complex64>) -> Result<Self> {
        let w = antisymmetrized(w)?;
        let norm2 = norm_squared(&w);
        if (norm2 - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(TwoFermionState { w })
    }

    /// Like [`from_matrix`](Self::from_matrix) but rescales to unit norm.
    pub fn normalized(w: DMatrix<Complex64>) -> Result<Self> {
        let w = antisymmetrized(w)?;
        let norm2 = norm_squared(&w);
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::ZeroSuperposition);
        }
        Ok(TwoFermionState { w: w.unscale(norm2.sqrt()) })
    }

    /// The Slater determinant `(|p⟩|q⟩ − |q⟩|p⟩)/√2` over `dim` spin-orbitals.
    pub fn from_slater(p: SpinOrbital, q: SpinOrbital, dim: usize) -> Result<Self> {
        if p == q {
            return Err(Error::PauliExclusion);
        }
        let needed = p.index().max(q.index()) + 1;
        if needed > dim {
            return Err(Error::DimensionMismatch { expected: needed, found: dim });
        }
        let mut w = DMatrix::zeros(dim, dim);
        let amp = core::f64::consts::FRAC_1_SQRT_2;
        w[(p.index(), q.index())] = Complex64::new(amp, 0.0);
        w[(q.index(), p.index())] = Complex64::new(-amp, 0.0);
        Ok(TwoFermionState { w })
    }

    /// Normalized linear combination `Σ cₖ |ψₖ⟩`.
    pub fn superpose(terms: &[(Complex64, &TwoFermionState)]) -> Result<Self> {
        let dim = match terms.first() {
            Some((_, s)) => s.dim(),
            None => return Err(Error::ZeroSuperposition),
        };
        let mut w = DMatrix::zeros(dim, dim);
        for (c, s) in terms {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
            }
            w += &s.w * *c;
        }
        let norm2 = norm_squared(&w);
        if norm2 <= f64::EPSILON * f64::EPSILON {
            return Err(Error::ZeroSuperposition);
        }
        Ok(TwoFermionState { w: w.unscale(norm2.sqrt()) })
    }

    /// Real-coefficient [`superpose`](Self::superpose).
    pub fn superpose_real(coefficients: &[f64], states: &[TwoFermionState]) -> Result<Self> {
        if coefficients.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: coefficients.len() });
        }
        let terms: Vec<(Complex64, &TwoFermionState)> = coefficients
            .iter()
            .zip(states)
            .map(|(c, s)| (Complex64::new(*c, 0.0), s))
            .collect();
        Self::superpose(&terms)
    }

    /// Number of spin-orbitals `D`.
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn coefficients(&self) -> &DMatrix<Complex64> {
        &self.w
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &TwoFermionState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.w.iter().zip(other.w.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// `W → uWuᵀ`, the action of `u ⊗ u` for a single-particle unitary `u`.
    pub fn transform(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Self::from_matrix(u * &self.w * u.transpose())
    }
}

fn antisymmetrized(w: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if w.nrows() != w.ncols() {
        return Err(Error::DimensionMismatch { expected: w.nrows(), found: w.ncols() });
    }
    if w.nrows() % 2 != 0 {
        return Err(Error::InvalidParameter(alloc::format!("odd spin-orbital dimension {}", w.nrows())));
    }
    let sym = &w + w.transpose();
    let asym = sym.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if asym > ANTISYMMETRY_TOLERANCE {
        return Err(Error::NotAntisymmetric(asym));
    }
    Ok((&w - w.transpose()).scale(0.5))
}

fn norm_squared(w: &DMatrix<Complex64>) -> f64 {
    w.iter().map(|z| z.norm_sqr()).sum()
}

/// One-particle reduced density matrix `ρ = W W†`.
pub fn reduced_density(state: &TwoFermionState) -> DMatrix<Complex64> {
    &state.w * state.w.adjoint()
}

/// Spectrum of `ρ`, descending, with tiny negatives clamped to zero.
fn density_spectrum(rho: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = rho.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    for v in values.iter_mut() {
        if *v < -CLAMP_TOLERANCE {
            return Err(Error::NegativeEigenvalue(*v));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(values)
}

/// Schmidt coefficients `λᵢ`, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    coefficients: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Pairs adjacent entries of a descending `ρ` spectrum.
    fn from_density_spectrum(values: &[f64]) -> Result<Self> {
        let mut coefficients = Vec::with_capacity(values.len() / 2);
        for pair in values.chunks(2) {
            let gap = (pair[0] - pair[1]).abs();
            if gap > PAIRING_TOLERANCE {
                return Err(Error::PairingFailure(gap));
            }
            coefficients.push(pair[0] + pair[1]);
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(total));
        }
        Ok(SchmidtSpectrum { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Number of coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > tol).count()
    }

    /// `1 − Σλᵢ²`.
    pub fn linear_entropy(&self) -> f64 {
        1.0 - self.coefficients.iter().map(|l| l * l).sum::<f64>()
    }

    /// `−Σλᵢ ln λᵢ` with `0 ln 0 = 0`.
    pub fn von_neumann_entropy(&self) -> f64 {
        -self.coefficients.iter().map(|&l| xlnx(l)).sum::<f64>()
    }
}

fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

pub fn schmidt_spectrum(state: &TwoFermionState) -> Result<SchmidtSpectrum> {
    SchmidtSpectrum::from_density_spectrum(&density_spectrum(&reduced_density(state))?)
}

/// Both measures of one state, cross-checked between routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entanglement {
    pub linear: f64,
    pub von_neumann: f64,
}

pub fn entanglement(state: &TwoFermionState) -> Result<Entanglement> {
    let rho = reduced_density(state);
    let values = density_spectrum(&rho)?;
    let spectrum = SchmidtSpectrum::from_density_spectrum(&values)?;

    let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
    let linear_trace = 1.0 - 2.0 * purity;
    let linear = spectrum.linear_entropy();
    let difference = (linear_trace - linear).abs();
    if difference > LINEAR_ROUTE_TOLERANCE {
        return Err(Error::MeasureMismatch { measure: "linear entropy", difference });
    }

    let vn_trace = -values.iter().map(|&v| xlnx(v)).sum::<f64>() - LN_2;
    let von_neumann = spectrum.von_neumann_entropy();
    let difference = (vn_trace - von_neumann).abs();
    if difference > VN_ROUTE_TOLERANCE {
        return Err(Error::MeasureMismatch { measure: "von Neumann entropy", difference });
    }

    Ok(Entanglement { linear: linear.max(0.0), von_neumann: von_neumann.max(0.0) })
}

/// `ε_L = 1 − 2 Tr ρ² = 1 − Σλᵢ²`.
pub fn linear_entanglement(state: &TwoFermionState) -> Result<f64> {
    entanglement(state).map(|e| e.linear)
}

/// `ε_vN = −Tr ρ ln ρ − ln 2 = −Σλᵢ ln λᵢ`.
pub fn vn_entanglement(state: &TwoFermionState) -> Result<f64> {
    entanglement(state).map(|e| e.von_neumann)
}

/// `ln Ω` with `Ω = ⌊m̃/2⌋`: the largest `ε_vN` reachable by combining
/// Slater determinants built from `m̃` distinct spin-orbitals.
pub fn slater_span_bound(m_tilde: usize) -> Result<f64> {
    if m_tilde < 2 {
        return Err(Error::InvalidParameter(alloc::format!("need at least 2 spin-orbitals, got {m_tilde}")));
    }
    Ok(((m_tilde / 2) as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelBounds {
    pub linear: f64,
    pub von_neumann: f64,
}

/// Entanglement ceilings for the oscillator level with `n₁ + n₂ = n`:
/// `(n/(n+1), ln(n+1))`.
pub fn level_bounds(n: usize) -> LevelBounds {
    let n = n as f64;
    LevelBounds { linear: n / (n + 1.0), von_neumann: (n + 1.0).ln() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn slater(p: SpinOrbital, q: SpinOrbital) -> TwoFermionState {
        TwoFermionState::from_slater(p, q, 4).unwrap()
    }

    #[test]
    fn slater_has_two_entries() {
        let s = slater(SpinOrbital::up(0), SpinOrbital::up(1));
        let nonzero: Vec<_> = s.coefficients().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 2);
        assert_abs_diff_eq!(s.coefficients()[(0, 2)].re, 0.5_f64.sqrt());
        assert_abs_diff_eq!(s.coefficients()[(2, 0)].re, -(0.5_f64.sqrt()));
    }

    #[test]
    fn pauli_exclusion() {
        let p = SpinOrbital::up(0);
        assert_eq!(TwoFermionState::from_slater(p, p, 4), Err(Error::PauliExclusion));
    }

    #[test]
    fn slater_states_are_unentangled() {
        let s = slater(SpinOrbital::up(0), SpinOrbital::down(1));
        let e = entanglement(&s).unwrap();
        assert_abs_diff_eq!(e.linear, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.von_neumann, 0.0, epsilon = 1e-14);
        let spectrum = density_spectrum(&reduced_density(&s)).unwrap();
        for (got, want) in spectrum.iter().zip([0.5, 0.5, 0.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_superposition_rejected() {
        let s = slater(SpinOrbital::up(0), SpinOrbital::down(1));
        let terms = [(Complex64::new(1.0, 0.0), &s), (Complex64::new(-1.0, 0.0), &s)];
        assert_eq!(TwoFermionState::superpose(&terms), Err(Error::ZeroSuperposition));
        assert_eq!(TwoFermionState::superpose(&[]), Err(Error::ZeroSuperposition));
    }

    #[test]
    fn level_one_pair_states() {
        // |ψ₂⟩ = |0+,1−⟩, |ψ₃⟩ = |0−,1+⟩
        let psi2 = slater(SpinOrbital::up(0), SpinOrbital::down(1));
        let psi3 = slater(SpinOrbital::down(0), SpinOrbital::up(1));
        let plus = TwoFermionState::superpose_real(&[1.0, 1.0], &[psi2.clone(), psi3.clone()]).unwrap();
        let values = density_spectrum(&reduced_density(&plus)).unwrap();
        for v in values {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        }
        let minus = TwoFermionState::superpose_real(&[-1.0, 1.0], &[psi2, psi3]).unwrap();
        let e = entanglement(&minus).unwrap();
        assert_abs_diff_eq!(e.linear, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e.von_neumann, LN_2, epsilon = 1e-14);
    }

    #[test]
    fn non_antisymmetric_input_rejected() {
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(TwoFermionState::from_matrix(w), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn unnormalized_input_rejected() {
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 1)] = Complex64::new(1.0, 0.0);
        w[(1, 0)] = Complex64::new(-1.0, 0.0);
        assert!(matches!(TwoFermionState::from_matrix(w.clone()), Err(Error::NotNormalized(_))));
        assert!(TwoFermionState::normalized(w).is_ok());
    }

    #[test]
    fn bounds() {
        assert_abs_diff_eq!(slater_span_bound(4).unwrap(), LN_2);
        assert_eq!(slater_span_bound(2).unwrap(), 0.0);
        assert_eq!(slater_span_bound(5).unwrap(), LN_2);
        assert!(slater_span_bound(1).is_err());
        let b = level_bounds(1);
        assert_eq!((b.linear, b.von_neumann), (0.5, LN_2));
        assert_eq!(level_bounds(0), LevelBounds { linear: 0.0, von_neumann: 0.0 });
        let b = level_bounds(5);
        assert_abs_diff_eq!(b.linear, 5.0 / 6.0);
        assert_abs_diff_eq!(b.von_neumann, 6.0_f64.ln());
        for n in 0..10 {
            assert_eq!(slater_span_bound(2 * (n + 1)).unwrap(), level_bounds(n).von_neumann);
        }
    }
}
