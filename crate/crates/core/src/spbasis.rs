//! Single-particle spatial modes of the confining potential `U(x)`.
//!
//! Two bases are provided: the analytic harmonic oscillator and a
//! finite-difference solver for tabulated potentials. Both expose their
//! modes sampled on a quadrature rule through [`SpatialBasis`], which is all
//! the two-body code needs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is in the graph
use num_traits::Float;

use crate::linalg::{Quadrature, SymTridiagonal};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// `S_z` eigenvalue in units of ħ.
    pub fn sz(self) -> f64 {
        match self {
            Spin::Up => 0.5,
            Spin::Down => -0.5,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Spin::Up => '+',
            Spin::Down => '-',
        }
    }
}

/// A single-particle state `|n, ±⟩`.
///
/// The derived ordering (mode first, then up before down) is the canonical
/// order that fixes every determinant sign in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinOrbital {
    pub mode: usize,
    pub spin: Spin,
}

impl SpinOrbital {
    pub fn new(mode: usize, spin: Spin) -> Self {
        SpinOrbital { mode, spin }
    }

    pub fn up(mode: usize) -> Self {
        SpinOrbital::new(mode, Spin::Up)
    }

    pub fn down(mode: usize) -> Self {
        SpinOrbital::new(mode, Spin::Down)
    }

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        2 * self.mode + self.spin as usize
    }

    pub fn from_index(index: usize) -> Self {
        let spin = if index % 2 == 0 { Spin::Up } else { Spin::Down };
        SpinOrbital::new(index / 2, spin)
    }
}

impl core::fmt::Display for SpinOrbital {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "|{},{}>", self.mode, self.spin.symbol())
    }
}

/// Spatial single-particle basis sampled on a quadrature rule.
pub trait SpatialBasis {
    /// Single-particle energy of mode `n`.
    fn eigenvalue(&self, n: usize) -> Result<f64>;

    /// Number of modes held, `None` if unbounded.
    fn mode_count(&self) -> Option<usize>;

    /// Rule used for every spatial integral over this basis.
    fn quadrature(&self) -> &Quadrature;

    /// Mode `n` evaluated at the quadrature nodes.
    fn sample_mode(&self, n: usize) -> Result<Vec<f64>>;

    /// `⟨a|x|c⟩`.
    fn position(&self, a: usize, c: usize) -> Result<f64>;

    /// `⟨a|x²|c⟩`.
    fn position_squared(&self, a: usize, c: usize) -> Result<f64>;

    /// Mode pairs `(n₁ ≤ n₂)` spanning the non-interacting level labelled
    /// `level`, or `None` when that depends on a spectrum the basis cannot
    /// predict.
    fn level_pairs(&self, level: usize) -> Option<Vec<(usize, usize)>>;

    /// Spatial parity of mode `n` for an even potential.
    fn parity(&self, n: usize) -> i8 {
        if n % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Whether `U` is even, so that modes have definite parity `(−1)ⁿ`.
    fn has_parity(&self) -> bool {
        false
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        match self.mode_count() {
            Some(available) if n >= available => Err(Error::ModeOutOfRange { mode: n, available }),
            _ => Ok(()),
        }
    }
}

/// Default number of Gauss–Legendre nodes for oscillator integrals.
pub const HARMONIC_QUADRATURE_NODES: usize = 400;

/// Eigenmodes of `U(x) = ½ω²x²` for a unit-mass particle.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    omega: f64,
    quadrature: Quadrature,
}

impl HarmonicBasis {
    pub fn new(omega: f64) -> Result<Self> {
        Self::with_quadrature_nodes(omega, HARMONIC_QUADRATURE_NODES)
    }

    /// Uses an `nodes`-point Gauss–Legendre rule on `[-10/√ω, 10/√ω]`.
    pub fn with_quadrature_nodes(omega: f64, nodes: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if nodes < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 quadrature nodes, got {nodes}")));
        }
        let half_width = 10.0 / omega.sqrt();
        Ok(HarmonicBasis {
            omega,
            quadrature: Quadrature::gauss_legendre(nodes, -half_width, half_width),
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `φₙ(x)`, evaluated by the recurrence on the normalized functions so
    /// large `n` neither overflows nor needs factorials.
    pub fn hermite_mode(&self, n: usize, x: f64) -> f64 {
        let xi = self.omega.sqrt() * x;
        let mut prev = (self.omega / PI).powf(0.25) * (-0.5 * xi * xi).exp();
        if n == 0 {
            return prev;
        }
        let mut cur = 2.0.sqrt() * xi * prev;
        for k in 2..=n {
            let k = k as f64;
            let next = (2.0 / k).sqrt() * xi * cur - ((k - 1.0) / k).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        cur
    }
}

impl SpatialBasis for HarmonicBasis {
    fn eigenvalue(&self, n: usize) -> Result<f64> {
        Ok(self.omega * (n as f64 + 0.5))
    }

    fn mode_count(&self) -> Option<usize> {
        None
    }

    fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    fn sample_mode(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.quadrature.nodes.iter().map(|&x| self.hermite_mode(n, x)).collect())
    }

    fn position(&self, a: usize, c: usize) -> Result<f64> {
        let scale = (0.5 / self.omega).sqrt();
        Ok(if a == c + 1 {
            scale * (a as f64).sqrt()
        } else if c == a + 1 {
            scale * (c as f64).sqrt()
        } else {
            0.0
        })
    }

    fn position_squared(&self, a: usize, c: usize) -> Result<f64> {
        let scale = 0.5 / self.omega;
        let lo = a.min(c) as f64;
        Ok(if a == c {
            scale * (2.0 * lo + 1.0)
        } else if a.abs_diff(c) == 2 {
            scale * ((lo + 1.0) * (lo + 2.0)).sqrt()
        } else {
            0.0
        })
    }

    fn has_parity(&self) -> bool {
        true
    }

    fn level_pairs(&self, level: usize) -> Option<Vec<(usize, usize)>> {
        Some((0..=level / 2).map(|n1| (n1, level - n1)).collect())
    }
}

/// Uniform 1D grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidParameter(format!("grid bounds [{x_min}, {x_max}] are not increasing")));
        }
        if n_points < 5 {
            return Err(Error::InvalidParameter(format!("grid needs at least 5 points, got {n_points}")));
        }
        Ok(Grid { x_min, x_max, n_points })
    }

    /// The symmetric grid `[-10/√ω, 10/√ω]` with 2001 points used for
    /// oscillator cross-checks.
    pub fn oscillator_default(omega: f64) -> Result<Self> {
        let half_width = 10.0 / omega.sqrt();
        Grid::new(-half_width, half_width, 2001)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points).map(|i| self.x_min + h * i as f64).collect()
    }
}

/// Largest admissible eigenfunction magnitude next to the grid boundary.
pub const BOUNDARY_DECAY_TOLERANCE: f64 = 1e-8;

/// Lowest eigenpairs of `-½ d²/dx² + U(x)` on a grid.
#[derive(Debug, Clone)]
pub struct NumericBasis {
    grid: Grid,
    potential: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Vec<f64>>,
    quadrature: Quadrature,
    declared_levels: Vec<Vec<(usize, usize)>>,
    even: bool,
}

impl NumericBasis {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential_samples(&self) -> &[f64] {
        &self.potential
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenfunction `k` on the grid nodes.
    pub fn eigenfunction(&self, k: usize) -> Result<&[f64]> {
        self.check_mode(k)?;
        Ok(&self.eigenfunctions[k])
    }

    /// Declares which mode pairs form degenerate level `level` (for
    /// potentials whose spectrum is degenerate by construction).
    pub fn declare_level(&mut self, level: usize, pairs: Vec<(usize, usize)>) -> Result<()> {
        for &(a, b) in &pairs {
            self.check_mode(a.max(b))?;
        }
        if self.declared_levels.len() <= level {
            self.declared_levels.resize(level + 1, Vec::new());
        }
        self.declared_levels[level] = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        Ok(())
    }

    fn matrix_element(&self, a: usize, c: usize, power: i32) -> Result<f64> {
        self.check_mode(a.max(c))?;
        let q = &self.quadrature;
        Ok(q.nodes
            .iter()
            .zip(&q.weights)
            .zip(self.eigenfunctions[a].iter().zip(&self.eigenfunctions[c]))
            .map(|((x, w), (fa, fc))| w * fa * fc * x.powi(power))
            .sum())
    }
}

/// Solves for the lowest `k_max` eigenpairs with second-order finite
/// differences and Dirichlet end points.
///
/// Eigenfunctions are orthonormal under the trapezoidal rule and signed so
/// that the first non-negligible value from the left is positive.
pub fn solve_potential(grid: Grid, potential_samples: Vec<f64>, k_max: usize) -> Result<NumericBasis> {
    if potential_samples.len() != grid.n_points {
        return Err(Error::DimensionMismatch { expected: grid.n_points, found: potential_samples.len() });
    }
    if let Some(bad) = potential_samples.iter().find(|u| !u.is_finite()) {
        return Err(Error::InvalidParameter(format!("potential sample {bad} is not finite")));
    }
    let interior = grid.n_points - 2;
    if k_max == 0 || k_max > interior {
        return Err(Error::InvalidParameter(format!("k_max = {k_max} outside 1..={interior}")));
    }
    let h = grid.spacing();
    let kinetic = 0.5 / (h * h);
    let tri = SymTridiagonal {
        diag: potential_samples[1..grid.n_points - 1].iter().map(|u| 2.0 * kinetic + u).collect(),
        off: vec![-kinetic; interior - 1],
    };
    let quadrature = Quadrature::trapezoid(grid.x_min, grid.x_max, grid.n_points);

    let mut eigenvalues = Vec::with_capacity(k_max);
    let mut eigenfunctions: Vec<Vec<f64>> = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let value = tri.eigenvalue(k);
        let mut f = vec![0.0; grid.n_points];
        f[1..grid.n_points - 1].copy_from_slice(&tri.eigenvector(value));
        for prev in &eigenfunctions {
            let overlap = weighted_dot(&quadrature.weights, prev, &f);
            f.iter_mut().zip(prev).for_each(|(x, p)| *x -= overlap * p);
        }
        let norm = weighted_dot(&quadrature.weights, &f, &f).sqrt();
        f.iter_mut().for_each(|x| *x /= norm);

        let edge = f[1].abs().max(f[grid.n_points - 2].abs());
        if edge > BOUNDARY_DECAY_TOLERANCE {
            return Err(Error::BoundaryDecay { mode: k, value: edge });
        }
        let peak = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if let Some(first) = f.iter().find(|x| x.abs() > 1e-10 * peak) {
            if *first < 0.0 {
                f.iter_mut().for_each(|x| *x = -*x);
            }
        }
        eigenvalues.push(value);
        eigenfunctions.push(f);
    }

    let n = grid.n_points;
    let even = (grid.x_min + grid.x_max).abs() <= 1e-12 * (grid.x_max - grid.x_min)
        && (0..n / 2).all(|i| {
            let (u, v) = (potential_samples[i], potential_samples[n - 1 - i]);
            (u - v).abs() <= 1e-12 * (1.0 + u.abs())
        });
    Ok(NumericBasis {
        even,
        grid,
        potential: potential_samples,
        eigenvalues,
        eigenfunctions,
        quadrature,
        declared_levels: Vec::new(),
    })
}

/// [`solve_potential`] with `U` given as a function.
pub fn solve_potential_fn(grid: Grid, potential: impl Fn(f64) -> f64, k_max: usize) -> Result<NumericBasis> {
    let samples = grid.nodes().into_iter().map(potential).collect();
    solve_potential(grid, samples, k_max)
}

fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(w, (a, b))| w * a * b).sum()
}

impl SpatialBasis for NumericBasis {
    fn eigenvalue(&self, n: usize) -> Result<f64> {
        self.check_mode(n)?;
        Ok(self.eigenvalues[n])
    }

    fn mode_count(&self) -> Option<usize> {
        Some(self.eigenvalues.len())
    }

    fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    fn sample_mode(&self, n: usize) -> Result<Vec<f64>> {
        self.check_mode(n)?;
        Ok(self.eigenfunctions[n].clone())
    }

    fn position(&self, a: usize, c: usize) -> Result<f64> {
        self.matrix_element(a, c, 1)
    }

    fn position_squared(&self, a: usize, c: usize) -> Result<f64> {
        self.matrix_element(a, c, 2)
    }

    fn has_parity(&self) -> bool {
        self.even
    }

    // The ground level and the first excited level only depend on the
    // ordering of the spectrum; anything higher must be declared.
    fn level_pairs(&self, level: usize) -> Option<Vec<(usize, usize)>> {
        if let Some(pairs) = self.declared_levels.get(level).filter(|p| !p.is_empty()) {
            return Some(pairs.clone());
        }
        match level {
            0 => Some(vec![(0, 0)]),
            1 => Some(vec![(0, 1)]),
            _ => None,
        }
    }
}
