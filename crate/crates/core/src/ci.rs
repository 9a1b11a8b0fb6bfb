//! Brute-force configuration interaction on a truncated Slater basis.
//!
//! Used as an oracle for the perturbative predictions: the full
//! Hamiltonian `H₀ + λV` is diagonalized for a set of small `λ`, the
//! eigenstates that belong to a chosen level are tracked by their weight in
//! that level's Slater span, and their entanglement is extrapolated to
//! `λ → 0`.
//!
//! `H` conserves total `S_z` (and parity for even `U`), so it is
//! diagonalized block by block. That keeps the members of exactly
//! degenerate spin multiplets from mixing across `S_z`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is in the graph
use num_traits::Float;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::degenpt::{DegenerateLevel, ZerothOrderState};
use crate::entangle::{self, TwoFermionState};
use crate::linalg::{check_symmetric, sorted_symmetric_eigen};
use crate::spbasis::SpinOrbital;
use crate::twobody::{SlaterState, TwoBody};
use crate::{Error, Result};

/// Residual above which a three-point linear fit is flagged.
pub const POOR_FIT_TOLERANCE: f64 = 1e-4;

/// Default `λ` grid for sweeps.
pub const DEFAULT_LAMBDAS: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

/// All determinants over modes `0..=n_max`, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct CiBasis {
    n_max: usize,
    states: Vec<SlaterState>,
    index: BTreeMap<(usize, usize), usize>,
}

impl CiBasis {
    pub fn new(n_max: usize) -> Self {
        let dim = 2 * (n_max + 1);
        let mut states = Vec::with_capacity(dim * (dim - 1) / 2);
        let mut index = BTreeMap::new();
        for p in 0..dim {
            for q in p + 1..dim {
                index.insert((p, q), states.len());
                states.push(SlaterState { first: SpinOrbital::from_index(p), second: SpinOrbital::from_index(q) });
            }
        }
        CiBasis { n_max, states, index }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn states(&self) -> &[SlaterState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Spin-orbitals spanned.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Index of `state` and the sign relating it to the stored determinant.
    pub fn locate(&self, state: &SlaterState) -> Option<(usize, f64)> {
        let (p, q) = (state.first.index(), state.second.index());
        if p < q {
            self.index.get(&(p, q)).map(|&i| (i, 1.0))
        } else {
            self.index.get(&(q, p)).map(|&i| (i, -1.0))
        }
    }

    /// Antisymmetric state for a coefficient vector over this basis.
    pub fn to_state(&self, coefficients: &[f64]) -> Result<TwoFermionState> {
        let dim = self.dim();
        let mut w = DMatrix::<Complex64>::zeros(dim, dim);
        let amp = core::f64::consts::FRAC_1_SQRT_2;
        for (s, &c) in self.states.iter().zip(coefficients) {
            let (p, q) = (s.first.index(), s.second.index());
            w[(p, q)] += Complex64::new(amp * c, 0.0);
            w[(q, p)] -= Complex64::new(amp * c, 0.0);
        }
        TwoFermionState::from_matrix(w)
    }
}

/// Eigenpair of the full Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    pub vector: DVector<f64>,
}

/// `H₀` and the interaction matrix over a [`CiBasis`], assembled once.
#[derive(Debug, Clone)]
pub struct CiProblem {
    basis: CiBasis,
    h0: DVector<f64>,
    interaction: DMatrix<f64>,
    blocks: Vec<Vec<usize>>,
}

impl CiProblem {
    pub fn new(basis: CiBasis, twobody: &mut TwoBody<'_>) -> Result<Self> {
        let spatial = twobody.basis();
        let n = basis.len();
        let mut h0 = DVector::zeros(n);
        let mut interaction = DMatrix::zeros(n, n);
        for (i, si) in basis.states.iter().enumerate() {
            h0[i] = spatial.eigenvalue(si.first.mode)? + spatial.eigenvalue(si.second.mode)?;
            for (j, sj) in basis.states.iter().enumerate() {
                interaction[(i, j)] = twobody.slater_element(si, sj)?;
            }
        }
        check_symmetric(&interaction, 1e-12)?;

        let parity = spatial.has_parity();
        let mut groups: BTreeMap<(i32, usize), Vec<usize>> = BTreeMap::new();
        for (i, s) in basis.states.iter().enumerate() {
            let sz = s.sz().round() as i32;
            let p = if parity { (s.first.mode + s.second.mode) % 2 } else { 0 };
            groups.entry((sz, p)).or_default().push(i);
        }
        Ok(CiProblem { basis, h0, interaction, blocks: groups.into_values().collect() })
    }

    pub fn basis(&self) -> &CiBasis {
        &self.basis
    }

    /// `H₀ + λV` as a dense matrix.
    pub fn hamiltonian(&self, lambda: f64) -> Result<DMatrix<f64>> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidLambda(lambda));
        }
        let mut h = self.interaction.scale(lambda);
        for i in 0..self.h0.len() {
            h[(i, i)] += self.h0[i];
        }
        Ok(h)
    }

    /// All eigenpairs, block by block, sorted by energy.
    pub fn eigenstates(&self, lambda: f64) -> Result<Vec<Eigenpair>> {
        let h = self.hamiltonian(lambda)?;
        let n = self.basis.len();
        let mut out = Vec::with_capacity(n);
        for block in &self.blocks {
            let sub = DMatrix::from_fn(block.len(), block.len(), |i, j| h[(block[i], block[j])]);
            let (values, vectors) = sorted_symmetric_eigen(sub);
            for (k, energy) in values.into_iter().enumerate() {
                let mut vector = DVector::zeros(n);
                for (row, &i) in block.iter().enumerate() {
                    vector[i] = vectors[(row, k)];
                }
                out.push(Eigenpair { energy, vector });
            }
        }
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(out)
    }

    pub fn energies(&self, lambda: f64) -> Result<Vec<f64>> {
        Ok(self.eigenstates(lambda)?.into_iter().map(|e| e.energy).collect())
    }
}

/// `H₀ + λV` over `basis`.
pub fn build_full_hamiltonian(basis: &CiBasis, twobody: &mut TwoBody<'_>, lambda: f64) -> Result<DMatrix<f64>> {
    CiProblem::new(basis.clone(), twobody)?.hamiltonian(lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub lambda: f64,
    /// Index of the predicted zeroth-order state this eigenstate tracks.
    pub state_index: usize,
    pub energy: f64,
    pub eps_l: f64,
    pub eps_vn: f64,
    /// `|⟨predicted_k|ψ⟩|` for every predicted state `k`.
    pub overlaps: Vec<f64>,
    pub overlap_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub level: usize,
    /// Descending.
    pub lambdas: Vec<f64>,
    /// Ordered by `λ` (descending), then `state_index`.
    pub records: Vec<SweepRecord>,
    /// `(ε_L, ε_vN)` of each predicted state.
    pub predicted: Vec<(f64, f64)>,
}

impl SweepResult {
    pub fn records_for(&self, state_index: usize) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(move |r| r.state_index == state_index)
    }
}

/// Tracks the eigenstates of `level` along `lambdas` and compares them with
/// `predicted` (the zeroth-order states of that level).
pub fn lambda_sweep(
    problem: &CiProblem,
    level: &DegenerateLevel,
    predicted: &[ZerothOrderState],
    lambdas: &[f64],
) -> Result<SweepResult> {
    let basis = &problem.basis;
    let m = level.degeneracy();
    if predicted.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: predicted.len() });
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if let Some(&bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::InvalidLambda(bad));
    }

    let mut level_slots = Vec::with_capacity(m);
    for s in &level.basis {
        let slot = basis.locate(s).ok_or(Error::ModeOutOfRange {
            mode: s.first.mode.max(s.second.mode),
            available: basis.n_max + 1,
        })?;
        level_slots.push(slot);
    }
    let predicted_vectors: Vec<DVector<f64>> = predicted
        .iter()
        .map(|z| {
            let mut v = DVector::zeros(basis.len());
            for (&(i, sign), c) in level_slots.iter().zip(&z.coefficients) {
                v[i] = sign * c;
            }
            v
        })
        .collect();

    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();

    let mut records = Vec::new();
    for &lambda in &sorted {
        let eigen = problem.eigenstates(lambda)?;
        let mut weighted: Vec<(f64, usize)> = eigen
            .iter()
            .enumerate()
            .map(|(k, e)| (level_slots.iter().map(|&(i, _)| e.vector[i] * e.vector[i]).sum(), k))
            .collect();
        weighted.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let last_in = weighted[m - 1].0;
        let first_out = weighted.get(m).map_or(0.0, |w| w.0);
        if last_in <= 0.5 || first_out >= 0.5 {
            return Err(Error::TrackingAmbiguity(lambda));
        }
        let mut selected: Vec<usize> = weighted[..m].iter().map(|w| w.1).collect();
        selected.sort();

        let lo = eigen[selected[0]].energy;
        let hi = eigen[selected[m - 1]].energy;
        let spread = hi - lo;
        let below = selected[0].checked_sub(1).map(|k| lo - eigen[k].energy);
        let above = eigen.get(selected[m - 1] + 1).map(|e| e.energy - hi);
        let interleaved = selected.windows(2).any(|w| w[1] != w[0] + 1);
        let gap = below.into_iter().chain(above).fold(f64::INFINITY, f64::min);
        if interleaved || gap <= spread {
            return Err(Error::SpectralOverlap { lambda, gap, spread });
        }

        let mut taken = vec![false; m];
        let mut at_lambda = Vec::with_capacity(m);
        for &k in &selected {
            let v = &eigen[k].vector;
            let overlaps: Vec<f64> = predicted_vectors.iter().map(|u| u.dot(v).abs()).collect();
            let (state_index, overlap_max) = overlaps
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, o)| if o > best.1 { (i, o) } else { best });
            if taken[state_index] {
                return Err(Error::TrackingAmbiguity(lambda));
            }
            taken[state_index] = true;
            let e = entangle::entanglement(&basis.to_state(v.as_slice())?)?;
            at_lambda.push(SweepRecord {
                lambda,
                state_index,
                energy: eigen[k].energy,
                eps_l: e.linear,
                eps_vn: e.von_neumann,
                overlaps,
                overlap_max,
            });
        }
        at_lambda.sort_by_key(|r| r.state_index);
        records.extend(at_lambda);
    }

    Ok(SweepResult {
        level: level.label,
        lambdas: sorted,
        records,
        predicted: predicted.iter().map(|z| (z.eps_l, z.eps_vn)).collect(),
    })
}

/// Linear `λ → 0` fit of one tracked state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub state_index: usize,
    pub limit_eps_l: f64,
    pub limit_eps_vn: f64,
    pub slope_eps_l: f64,
    pub slope_eps_vn: f64,
    pub poor_fit: bool,
}

/// Least-squares line through the three smallest `λ` of each state.
pub fn extrapolate(sweep: &SweepResult) -> Result<Vec<Extrapolation>> {
    if sweep.lambdas.len() < 2 {
        return Err(Error::InvalidParameter("extrapolation needs at least two lambda values".into()));
    }
    let mut out = Vec::with_capacity(sweep.predicted.len());
    for state_index in 0..sweep.predicted.len() {
        let mut points: Vec<&SweepRecord> = sweep.records_for(state_index).collect();
        points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        points.truncate(3);
        let x: Vec<f64> = points.iter().map(|r| r.lambda).collect();
        let (limit_eps_l, slope_eps_l, res_l) = fit_line(&x, &points.iter().map(|r| r.eps_l).collect::<Vec<_>>());
        let (limit_eps_vn, slope_eps_vn, res_vn) = fit_line(&x, &points.iter().map(|r| r.eps_vn).collect::<Vec<_>>());
        out.push(Extrapolation {
            state_index,
            limit_eps_l,
            limit_eps_vn,
            slope_eps_l,
            slope_eps_vn,
            poor_fit: res_l.max(res_vn) > POOR_FIT_TOLERANCE,
        });
    }
    Ok(out)
}

/// `(intercept, slope, max |residual|)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = x.iter().zip(y).fold(0.0_f64, |m, (a, b)| m.max((b - intercept - slope * a).abs()));
    (intercept, slope, residual)
}
