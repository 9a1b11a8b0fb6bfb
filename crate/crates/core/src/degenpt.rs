//! Degenerate first-order perturbation theory on a non-interacting level.
//!
//! A level of `H₀` is spanned by Slater determinants `|ψⱼ⟩`. The interaction
//! restricted to that span, `H̃ᵢⱼ = ⟨ψᵢ|V|ψⱼ⟩`, has eigenvectors that are the
//! `λ → 0` limits of the exact eigenstates. Where `H̃` itself stays
//! degenerate the eigenbasis is fixed by re-diagonalizing total `S_z`, then
//! `S²`, then spatial parity inside each cluster.
//!
//! Basis layout per level: for each mode pair `n₁ < n₂` (larger `n₁` first)
//! the spin combinations `(+,+), (+,−), (−,+), (−,−)`, then the singlet
//! determinant `|n+, n−⟩` for each pair `n₁ = n₂`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is in the graph
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::entangle::{self, level_bounds, Entanglement, TwoFermionState};
use crate::linalg::{fix_phase, max_abs_diff, sorted_symmetric_eigen};
use crate::spbasis::{SpatialBasis, Spin, SpinOrbital};
use crate::twobody::{SlaterState, TwoBody};
use crate::{Error, Result};

/// Relative gap (in units of the spectral range of `H̃`) below which
/// eigenvalues are treated as one degenerate cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-9;
/// Absolute tolerance for grouping symmetry eigenvalues (integers or
/// half-integers).
const LABEL_TOLERANCE: f64 = 1e-6;
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Smallest projected norm accepted when spanning an unresolved subspace.
const SPAN_TOLERANCE: f64 = 1e-3;
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// A degenerate eigenspace of `H₀` in its Slater-determinant basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateLevel {
    pub label: usize,
    pub basis: Vec<SlaterState>,
    pub unperturbed_energy: f64,
    /// Largest deviation of a member's `H₀` energy from `unperturbed_energy`.
    pub energy_spread: f64,
    /// Spin-orbitals needed to represent the members.
    pub dim: usize,
    pub has_parity: bool,
}

impl DegenerateLevel {
    pub fn degeneracy(&self) -> usize {
        self.basis.len()
    }

    /// Members as coefficient matrices over `self.dim` spin-orbitals.
    pub fn states(&self) -> Result<Vec<TwoFermionState>> {
        self.basis.iter().map(|s| s.to_state(self.dim)).collect()
    }

    /// Distinct spin-orbitals appearing in the members (`m̃`).
    pub fn distinct_orbitals(&self) -> usize {
        let mut orbitals: Vec<SpinOrbital> = self.basis.iter().flat_map(|s| [s.first, s.second]).collect();
        orbitals.sort();
        orbitals.dedup();
        orbitals.len()
    }
}

/// Builds the level labelled `n`. For the oscillator that is `n₁ + n₂ = n`;
/// a numeric basis only knows levels 0 and 1 unless others were declared.
pub fn enumerate_level(basis: &dyn SpatialBasis, n: usize) -> Result<DegenerateLevel> {
    let mut pairs = basis.level_pairs(n).ok_or(Error::UnknownLevelStructure(n))?;
    pairs.sort_by(|x, y| {
        let (xs, ys) = (x.0 == x.1, y.0 == y.1);
        xs.cmp(&ys).then(if xs { x.0.cmp(&y.0) } else { y.0.cmp(&x.0) })
    });
    pairs.dedup();

    let mut members = Vec::new();
    for &(n1, n2) in &pairs {
        if n1 == n2 {
            members.push(SlaterState::new(SpinOrbital::up(n1), SpinOrbital::down(n1))?);
        } else {
            for (s1, s2) in [(Spin::Up, Spin::Up), (Spin::Up, Spin::Down), (Spin::Down, Spin::Up), (Spin::Down, Spin::Down)] {
                members.push(SlaterState::new(SpinOrbital::new(n1, s1), SpinOrbital::new(n2, s2))?);
            }
        }
    }

    let energies = pairs
        .iter()
        .map(|&(a, b)| Ok(basis.eigenvalue(a)? + basis.eigenvalue(b)?))
        .collect::<Result<Vec<f64>>>()?;
    let unperturbed_energy = energies.iter().sum::<f64>() / energies.len() as f64;
    let energy_spread = energies.iter().fold(0.0_f64, |m, e| m.max((e - unperturbed_energy).abs()));
    let max_mode = pairs.iter().map(|p| p.1).max().unwrap_or(0);

    Ok(DegenerateLevel {
        label: n,
        basis: members,
        unperturbed_energy,
        energy_spread,
        dim: 2 * (max_mode + 1),
        has_parity: basis.has_parity(),
    })
}

/// `H̃ᵢⱼ = ⟨ψᵢ|V|ψⱼ⟩` over a level's basis (per unit `λ`).
#[derive(Debug, Clone, PartialEq)]
pub struct HTilde {
    pub matrix: DMatrix<f64>,
    pub level: usize,
}

pub fn build_htilde(level: &DegenerateLevel, twobody: &mut TwoBody<'_>) -> Result<HTilde> {
    let m = level.degeneracy();
    let mut matrix = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            matrix[(i, j)] = twobody.slater_element(&level.basis[i], &level.basis[j])?;
        }
    }
    let asym = max_abs_diff(&matrix, &matrix.transpose());
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    let matrix = (&matrix + matrix.transpose()).scale(0.5);
    Ok(HTilde { matrix, level: level.label })
}

/// An eigenvector of `H̃` with its labels and entanglement.
#[derive(Debug, Clone, PartialEq)]
pub struct ZerothOrderState {
    /// `c_kj` over the level basis, largest component positive.
    pub coefficients: Vec<f64>,
    /// Eigenvalue of `H̃`: first-order energy shift per unit `λ`.
    pub energy_shift: f64,
    pub sz: f64,
    /// Total spin `S` when the state is an `S²` eigenstate.
    pub spin: Option<u32>,
    /// Spatial parity when defined.
    pub parity: Option<i8>,
    pub eps_l: f64,
    pub eps_vn: f64,
    /// Degeneracy left after all symmetry tie-breaks.
    pub unresolved: bool,
}

impl ZerothOrderState {
    pub fn entanglement(&self) -> Entanglement {
        Entanglement { linear: self.eps_l, von_neumann: self.eps_vn }
    }

    /// Whether both measures sit under the oscillator ceilings of level `n`.
    pub fn within_level_bounds(&self, n: usize) -> bool {
        let bounds = level_bounds(n);
        self.eps_l <= bounds.linear + BOUND_TOLERANCE && self.eps_vn <= bounds.von_neumann + BOUND_TOLERANCE
    }
}

pub fn zeroth_order_states(htilde: &HTilde, level: &DegenerateLevel) -> Result<Vec<ZerothOrderState>> {
    resolve_zeroth_order(&htilde.matrix, &level.states()?, level.has_parity)
}

/// Diagonalizes `h` over an arbitrary orthonormal set of two-fermion `kets`
/// and applies the symmetry tie-breaks. `use_parity` enables the final
/// parity step (meaningful only for even potentials).
pub fn resolve_zeroth_order(
    h: &DMatrix<f64>,
    kets: &[TwoFermionState],
    use_parity: bool,
) -> Result<Vec<ZerothOrderState>> {
    let m = kets.len();
    if h.nrows() != m || h.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: h.nrows() });
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let asym = max_abs_diff(h, &h.transpose());
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }

    let symmetry = SymmetryOperators::new(kets)?;
    let mut operators = vec![&symmetry.sz, &symmetry.s2];
    if use_parity {
        operators.push(&symmetry.parity);
    }

    let (values, vectors) = sorted_symmetric_eigen(h.clone());
    let range = values[m - 1] - values[0];
    let mut out = Vec::with_capacity(m);
    let mut start = 0;
    for (cluster, end) in cluster_ends(&values, CLUSTER_TOLERANCE * range).into_iter().enumerate() {
        let block = vectors.columns(start, end - start).into_owned();
        start = end;
        for (subspace, unresolved) in refine(block, &operators) {
            for column in subspace.column_iter() {
                let mut v: DVector<f64> = column.into_owned();
                fix_phase(&mut v);
                out.push((cluster, state_for(h, &v, kets, &symmetry, use_parity, unresolved)?));
            }
        }
    }

    out.sort_by(|(ca, a), (cb, b)| {
        ca.cmp(cb)
            .then(a.sz.total_cmp(&b.sz))
            .then(a.spin.cmp(&b.spin))
            .then(a.parity.cmp(&b.parity))
    });
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

fn state_for(
    h: &DMatrix<f64>,
    v: &DVector<f64>,
    kets: &[TwoFermionState],
    symmetry: &SymmetryOperators,
    use_parity: bool,
    unresolved: bool,
) -> Result<ZerothOrderState> {
    let rayleigh = |op: &DMatrix<f64>| (v.transpose() * op * v)[(0, 0)];
    let sz = rayleigh(&symmetry.sz);
    let s2 = rayleigh(&symmetry.s2);
    let spin_number = ((-1.0 + (1.0 + 4.0 * s2.max(0.0)).sqrt()) / 2.0).round();
    let spin = ((spin_number * (spin_number + 1.0) - s2).abs() < LABEL_TOLERANCE).then_some(spin_number as u32);
    let parity = if use_parity {
        let p = rayleigh(&symmetry.parity);
        [1i8, -1].into_iter().find(|s| (p - *s as f64).abs() < LABEL_TOLERANCE)
    } else {
        None
    };
    let coefficients: Vec<f64> = v.iter().copied().collect();
    let state = TwoFermionState::superpose_real(&coefficients, kets)?;
    let e = entangle::entanglement(&state)?;
    Ok(ZerothOrderState {
        coefficients,
        energy_shift: rayleigh(h),
        sz: if (sz - sz.round()).abs() < LABEL_TOLERANCE { sz.round() + 0.0 } else { sz },
        spin,
        parity,
        eps_l: e.linear,
        eps_vn: e.von_neumann,
        unresolved,
    })
}

/// End indices (exclusive) of runs of ascending `values` whose consecutive
/// gaps are at most `tol`.
fn cluster_ends(values: &[f64], tol: f64) -> Vec<usize> {
    let mut ends = Vec::new();
    for i in 1..values.len() {
        if values[i] - values[i - 1] > tol {
            ends.push(i);
        }
    }
    ends.push(values.len());
    ends
}

/// Splits the column space of `block` by the eigenvalues of each operator
/// in turn. Returns leaf subspaces with an "unresolved" flag.
fn refine(block: DMatrix<f64>, operators: &[&DMatrix<f64>]) -> Vec<(DMatrix<f64>, bool)> {
    if block.ncols() <= 1 {
        return vec![(block, false)];
    }
    let Some((op, rest)) = operators.split_first() else {
        return vec![(canonical_span(&block), true)];
    };
    let projected = block.transpose() * *op * &block;
    let projected = (&projected + projected.transpose()).scale(0.5);
    let (values, rotation) = sorted_symmetric_eigen(projected);
    let rotated = &block * rotation;
    let mut leaves = Vec::new();
    let mut start = 0;
    for end in cluster_ends(&values, LABEL_TOLERANCE) {
        leaves.extend(refine(rotated.columns(start, end - start).into_owned(), rest));
        start = end;
    }
    leaves
}

/// Orthonormal basis of the column span of `block` obtained by
/// Gram–Schmidt on the projected unit vectors `P e₁, P e₂, …`. Depends only
/// on the subspace, not on how the eigensolver happened to span it.
fn canonical_span(block: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, k) = block.shape();
    let projector = block * block.transpose();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    for j in 0..m {
        if basis.len() == k {
            break;
        }
        let mut v = projector.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dot(&v);
                v.axpy(-overlap, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > SPAN_TOLERANCE {
            basis.push(v / norm);
        }
    }
    if basis.len() < k {
        return block.clone();
    }
    DMatrix::from_columns(&basis)
}

/// `S_z`, `S²` and parity as matrices over a set of kets.
struct SymmetryOperators {
    sz: DMatrix<f64>,
    s2: DMatrix<f64>,
    parity: DMatrix<f64>,
}

impl SymmetryOperators {
    fn new(kets: &[TwoFermionState]) -> Result<Self> {
        let dim = kets[0].dim();
        if let Some(k) = kets.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: k.dim() });
        }
        let one = Complex64::new(1.0, 0.0);
        let mut sz = DMatrix::zeros(dim, dim);
        let mut raise = DMatrix::zeros(dim, dim);
        let mut parity = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let orbital = SpinOrbital::from_index(i);
            sz[(i, i)] = one * orbital.spin.sz();
            parity[(i, i)] = one * if orbital.mode % 2 == 0 { 1.0 } else { -1.0 };
            if orbital.spin == Spin::Down {
                raise[(i - 1, i)] = one;
            }
        }
        let lower = raise.transpose();
        let sum = |o: &DMatrix<Complex64>, w: &DMatrix<Complex64>| o * w + w * o.transpose();

        let mut images_sz = Vec::with_capacity(kets.len());
        let mut images_s2 = Vec::with_capacity(kets.len());
        let mut images_p = Vec::with_capacity(kets.len());
        for k in kets {
            let w = k.coefficients();
            let z = sum(&sz, w);
            let zz = sum(&sz, &z);
            let up_down = sum(&raise, &sum(&lower, w));
            let down_up = sum(&lower, &sum(&raise, w));
            images_s2.push(zz + (up_down + down_up).scale(0.5));
            images_sz.push(z);
            images_p.push(&parity * w * parity.transpose());
        }
        let gram = |images: &[DMatrix<Complex64>]| {
            DMatrix::from_fn(kets.len(), kets.len(), |i, j| {
                kets[i].coefficients().iter().zip(images[j].iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
            })
        };
        Ok(SymmetryOperators { sz: gram(&images_sz), s2: gram(&images_s2), parity: gram(&images_p) })
    }
}

/// The five-state closed form for the level `n₁ + n₂ = 2`.
///
/// With the basis `|0+,2+⟩, |0+,2−⟩, |0−,2+⟩, |0−,2−⟩, |1+,1−⟩` the
/// restricted interaction has the pattern
///
/// ```text
/// a 0  0 0  0
/// 0 b  c 0  d
/// 0 c  b 0 -d
/// 0 0  0 a  0
/// 0 d -d 0  e
/// ```
///
/// and the two singlet eigenvectors are `(−r, r, 1)/√(2r² + 1)` on states
/// 2, 3, 5 with `r = r₁` or `r₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveLevelClosedForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub c1: f64,
    pub c2: f64,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Denominators `C₂ ± dR` smaller than this make the closed form singular.
pub const CLOSED_FORM_SINGULARITY: f64 = 1e-12;

pub fn closed_form_r(b: f64, c: f64, d: f64, e: f64) -> Result<FiveLevelClosedForm> {
    let c1 = -b * c + c * c + 2.0 * d * d + c * e;
    let c2 = d * (b + 3.0 * c - e);
    let radicand = b * b + c * c + 8.0 * d * d + 2.0 * c * e + e * e - 2.0 * b * (c + e);
    if radicand < -1e-12 {
        return Err(Error::InvalidParameter(alloc::format!("negative discriminant {radicand}")));
    }
    let r = radicand.max(0.0).sqrt();
    for denominator in [c2 + d * r, c2 - d * r] {
        if denominator.abs() < CLOSED_FORM_SINGULARITY {
            return Err(Error::ClosedFormSingular(denominator));
        }
    }
    Ok(FiveLevelClosedForm {
        a: f64::NAN,
        b,
        c,
        d,
        e,
        c1,
        c2,
        r,
        r1: (c1 + c * r) / (c2 + d * r),
        r2: (c1 - c * r) / (c2 - d * r),
    })
}

impl FiveLevelClosedForm {
    /// Reads `a..e` off a 5×5 `H̃`, checking the zero/sign pattern.
    pub fn from_htilde(h: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if h.nrows() != 5 || h.ncols() != 5 {
            return Err(Error::DimensionMismatch { expected: 5, found: h.nrows() });
        }
        let (a, b, c, d, e) = (h[(0, 0)], h[(1, 1)], h[(1, 2)], h[(1, 4)], h[(4, 4)]);
        let expected = five_level_pattern(a, b, c, d, e);
        let deviation = max_abs_diff(h, &expected);
        if deviation > tol {
            return Err(Error::InvalidParameter(alloc::format!(
                "matrix deviates from the five-state pattern by {deviation:e}"
            )));
        }
        let mut form = closed_form_r(b, c, d, e)?;
        form.a = a;
        Ok(form)
    }

    /// Normalized eigenvector over the five-state basis for branch ratio `r`.
    pub fn eigenvector(r: f64) -> [f64; 5] {
        let norm = (2.0 * r * r + 1.0).sqrt();
        [0.0, -r / norm, r / norm, 0.0, 1.0 / norm]
    }

    /// Eigenvalue of `H̃` belonging to branch ratio `r`.
    pub fn eigenvalue(&self, r: f64) -> f64 {
        self.e - 2.0 * r * self.d
    }

    /// Recovers `r` from coefficients of the form `(0, −r, r, 0, 1)·k`.
    pub fn branch_ratio(coefficients: &[f64]) -> Option<f64> {
        if coefficients.len() != 5 {
            return None;
        }
        let c = coefficients;
        let tol = 1e-9;
        if c[4].abs() < tol || c[0].abs() > tol || c[3].abs() > tol || (c[1] + c[2]).abs() > tol {
            return None;
        }
        Some(c[2] / c[4])
    }
}

/// The 5×5 matrix with the `a, b, c, d, e` pattern.
pub fn five_level_pattern(a: f64, b: f64, c: f64, d: f64, e: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        5,
        &[
            a, 0.0, 0.0, 0.0, 0.0, //
            0.0, b, c, 0.0, d, //
            0.0, c, b, 0.0, -d, //
            0.0, 0.0, 0.0, a, 0.0, //
            0.0, d, -d, 0.0, e,
        ],
    )
}

/// `(ε_L, ε_vN)` of `(−r|ψ₂⟩ + r|ψ₃⟩ + |ψ₅⟩)/√(2r² + 1)`:
/// `ε_L = 1 − (2r⁴ + 1)/(2r² + 1)²`,
/// `ε_vN = ln(2r² + 1) − 4r²/(2r² + 1)·ln|r|`, both zero at `r = 0`.
pub fn entanglement_of_r(r: f64) -> Entanglement {
    let r2 = r * r;
    let norm = 2.0 * r2 + 1.0;
    let linear = 1.0 - (2.0 * r2 * r2 + 1.0) / (norm * norm);
    let von_neumann = if r == 0.0 { 0.0 } else { norm.ln() - 4.0 * r2 / norm * r.abs().ln() };
    Entanglement { linear, von_neumann }
}

/// Matrix elements of the first excited level of a generic `U`, written
/// with the ground `|0⟩` and first excited `|1⟩` single-particle modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourLevelElements {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FourLevelElements {
    pub fn compute(twobody: &mut TwoBody<'_>) -> Result<Self> {
        let direct = twobody.spatial_integral(0, 1, 0, 1)?;
        let exchange = twobody.spatial_integral(0, 1, 1, 0)?;
        let exchange_rev = twobody.spatial_integral(1, 0, 0, 1)?;
        let direct_rev = twobody.spatial_integral(1, 0, 1, 0)?;
        Ok(FourLevelElements {
            a: 0.5 * (direct - exchange - exchange_rev + direct_rev),
            b: 0.5 * (direct + direct_rev),
            c: -0.5 * (exchange + exchange_rev),
        })
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        DMatrix::from_row_slice(4, 4, &[a, 0.0, 0.0, 0.0, 0.0, b, c, 0.0, 0.0, c, b, 0.0, 0.0, 0.0, 0.0, a])
    }
}

/// `a..e` of the level `n₁ + n₂ = 2` from spatial integrals over modes 0, 1, 2.
pub fn five_level_elements(twobody: &mut TwoBody<'_>) -> Result<[f64; 5]> {
    let mut v = |a, b, c, d| twobody.spatial_integral(a, b, c, d);
    let a = 0.5 * (v(0, 2, 0, 2)? - v(0, 2, 2, 0)? - v(2, 0, 0, 2)? + v(2, 0, 2, 0)?);
    let b = 0.5 * (v(0, 2, 0, 2)? + v(2, 0, 2, 0)?);
    let c = -0.5 * (v(0, 2, 2, 0)? + v(2, 0, 0, 2)?);
    let d = 0.5 * (v(0, 2, 1, 1)? + v(2, 0, 1, 1)?);
    let e = v(1, 1, 1, 1)?;
    Ok([a, b, c, d, e])
}
