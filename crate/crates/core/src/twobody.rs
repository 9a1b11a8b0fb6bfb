//! Two-body matrix elements of an even interaction `V(x₁ − x₂)`.
//!
//! Spatial integrals `⟨ab|V|cd⟩ = ∫∫ φa(x₁)φb(x₂) V(x₁−x₂) φc(x₁)φd(x₂)`
//! are evaluated per interaction kind:
//!
//! - contact: `½δ(x₁−x₂)` collapses to the 1D integral `½∫φaφbφcφd`;
//! - harmonic: `½ω²(x₁−x₂)²` expands into position moments of the basis;
//! - gaussian and tabulated: tensor-product quadrature, computed as one
//!   inner sum per `(a, c)` pair that is reused for every `(b, d)`.
//!
//! [`TwoBody`] owns a per-run cache keyed by the canonical quartet. It takes
//! `&mut self`, so each worker holds its own evaluator; every integral is
//! evaluated from its canonical quartet, so results do not depend on call order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is in the graph
use num_traits::Float;

use crate::entangle::TwoFermionState;
use crate::spbasis::{SpatialBasis, SpinOrbital};
use crate::{Error, Result};

/// Maximum allowed `|V(u) − V(−u)|` in a tabulated interaction.
pub const EVENNESS_TOLERANCE: f64 = 1e-10;

/// Default number of cached spatial integrals.
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum InteractionSpec {
    /// `½δ(x₁ − x₂)`.
    Delta,
    /// `½ω²(x₁ − x₂)²`.
    Harmonic { omega: f64 },
    /// `A·exp(−(x₁ − x₂)²/(2s²))`.
    Gaussian { amplitude: f64, width: f64 },
    Tabulated(TabulatedInteraction),
}

impl InteractionSpec {
    pub fn harmonic(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("interaction omega must be positive, got {omega}")));
        }
        Ok(InteractionSpec::Harmonic { omega })
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        if !amplitude.is_finite() || !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian needs finite amplitude and positive width, got ({amplitude}, {width})"
            )));
        }
        Ok(InteractionSpec::Gaussian { amplitude, width })
    }

    /// `V(u)` as a regular function; `None` for the contact interaction.
    pub fn evaluate(&self, u: f64) -> Option<f64> {
        match self {
            InteractionSpec::Delta => None,
            InteractionSpec::Harmonic { omega } => Some(0.5 * omega * omega * u * u),
            InteractionSpec::Gaussian { amplitude, width } => {
                Some(amplitude * (-u * u / (2.0 * width * width)).exp())
            }
            InteractionSpec::Tabulated(t) => Some(t.evaluate(u)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InteractionSpec::Delta => "delta",
            InteractionSpec::Harmonic { .. } => "harmonic",
            InteractionSpec::Gaussian { .. } => "gaussian",
            InteractionSpec::Tabulated(_) => "tabulated",
        }
    }
}

/// `V(u)` sampled on a uniform grid and interpolated linearly; zero outside
/// its support. A table starting at `u = 0` is mirrored to negative `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedInteraction {
    start: f64,
    step: f64,
    values: Vec<f64>,
    mirrored: bool,
}

impl TabulatedInteraction {
    pub fn new(u: &[f64], v: &[f64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
        }
        if u.len() < 2 {
            return Err(Error::InvalidParameter("interaction table needs at least 2 rows".into()));
        }
        if let Some(bad) = u.iter().chain(v).find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("interaction table holds non-finite value {bad}")));
        }
        let step = (u[u.len() - 1] - u[0]) / (u.len() - 1) as f64;
        if step <= 0.0 {
            return Err(Error::InvalidParameter("interaction grid must be increasing".into()));
        }
        for (i, x) in u.iter().enumerate() {
            let expected = u[0] + step * i as f64;
            if (x - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                return Err(Error::InvalidParameter(format!("interaction grid is not uniform at u = {x}")));
            }
        }
        let table = TabulatedInteraction { start: u[0], step, values: v.to_vec(), mirrored: u[0] >= -0.5 * step };
        if table.mirrored {
            if u[0].abs() > 1e-9 * step.max(1.0) {
                return Err(Error::InvalidParameter("one-sided interaction table must start at u = 0".into()));
            }
        } else {
            let mut asym = 0.0_f64;
            for (x, value) in u.iter().zip(v) {
                if -x >= table.start && -x <= table.end() {
                    asym = asym.max((value - table.interpolate(-x)).abs());
                }
            }
            if asym > EVENNESS_TOLERANCE {
                return Err(Error::NotEven(asym));
            }
        }
        Ok(table)
    }

    fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    /// Largest `|u|` at which the table defines `V`.
    pub fn support_radius(&self) -> f64 {
        if self.mirrored {
            self.end()
        } else {
            (-self.start).min(self.end())
        }
    }

    fn interpolate(&self, u: f64) -> f64 {
        let t = (u - self.start) / self.step;
        let last = self.values.len() - 1;
        if t <= 0.0 {
            return self.values[0];
        }
        let i = (t.floor() as usize).min(last - 1);
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let u = if self.mirrored { u.abs() } else { u };
        if u < self.start || u > self.end() {
            0.0
        } else {
            self.interpolate(u)
        }
    }
}

/// A Slater determinant `(|p⟩|q⟩ − |q⟩|p⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlaterState {
    pub first: SpinOrbital,
    pub second: SpinOrbital,
}

impl SlaterState {
    pub fn new(first: SpinOrbital, second: SpinOrbital) -> Result<Self> {
        if first == second {
            return Err(Error::PauliExclusion);
        }
        Ok(SlaterState { first, second })
    }

    /// Total `S_z`.
    pub fn sz(&self) -> f64 {
        self.first.spin.sz() + self.second.spin.sz()
    }

    pub fn modes(&self) -> (usize, usize) {
        (self.first.mode, self.second.mode)
    }

    pub fn to_state(&self, dim: usize) -> Result<TwoFermionState> {
        TwoFermionState::from_slater(self.first, self.second, dim)
    }
}

impl core::fmt::Display for SlaterState {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "|{}{},{}{}>",
            self.first.mode,
            self.first.spin.symbol(),
            self.second.mode,
            self.second.spin.symbol()
        )
    }
}

/// Emitted when a tabulated interaction does not cover every separation the
/// basis can reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub quartet: [usize; 4],
    /// `∫∫_{|x₁−x₂|>u_max} |φaφc(x₁)| |φbφd(x₂)|`, the largest seen so far.
    pub tail_mass: f64,
}

/// Integral evaluator bound to one basis and one interaction.
pub struct TwoBody<'a> {
    basis: &'a dyn SpatialBasis,
    interaction: &'a InteractionSpec,
    modes: BTreeMap<usize, Vec<f64>>,
    folded: BTreeMap<(usize, usize), Folded>,
    cache: BTreeMap<[usize; 4], f64>,
    cache_capacity: usize,
    truncation: Option<TruncationWarning>,
}

/// `g(x_j) = Σ_i w_i φa(x_i)φc(x_i) V(x_i − x_j)` and, for truncated
/// tables, the matching tail weight.
struct Folded {
    potential: Vec<f64>,
    tail: Option<Vec<f64>>,
}

impl<'a> TwoBody<'a> {
    pub fn new(basis: &'a dyn SpatialBasis, interaction: &'a InteractionSpec) -> Self {
        TwoBody {
            basis,
            interaction,
            modes: BTreeMap::new(),
            folded: BTreeMap::new(),
            cache: BTreeMap::new(),
            cache_capacity: DEFAULT_CACHE_CAPACITY,
            truncation: None,
        }
    }

    pub fn with_cache_capacity(mut self, capacity: usize) -> Self {
        self.cache_capacity = capacity;
        self
    }

    pub fn basis(&self) -> &'a dyn SpatialBasis {
        self.basis
    }

    pub fn interaction(&self) -> &'a InteractionSpec {
        self.interaction
    }

    pub fn cached_integrals(&self) -> usize {
        self.cache.len()
    }

    pub fn truncation_warning(&self) -> Option<TruncationWarning> {
        self.truncation
    }

    /// `⟨ab|V|cd⟩`.
    pub fn spatial_integral(&mut self, a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
        let key = canonical_quartet(a, b, c, d);
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let [a, b, c, d] = key;
        let value = if self.basis.has_parity() && (a + b + c + d) % 2 == 1 {
            0.0
        } else {
            match self.interaction {
                InteractionSpec::Delta => self.contact(a, b, c, d)?,
                InteractionSpec::Harmonic { omega } => self.harmonic_moments(*omega, a, b, c, d)?,
                InteractionSpec::Gaussian { .. } | InteractionSpec::Tabulated(_) => self.folded_integral(a, b, c, d)?,
            }
        };
        if self.cache.len() < self.cache_capacity {
            self.cache.insert(key, value);
        }
        Ok(value)
    }

    /// `⟨ab|V|cd⟩` by tensor-product quadrature regardless of kind (the
    /// contact interaction has no regular kernel and is rejected).
    pub fn quadrature_integral(&mut self, a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
        if matches!(self.interaction, InteractionSpec::Delta) {
            return Err(Error::InvalidParameter("contact interaction has no 2D kernel".into()));
        }
        let [a, b, c, d] = canonical_quartet(a, b, c, d);
        self.folded_integral(a, b, c, d)
    }

    /// `⟨i|V|j⟩` between Slater determinants: direct minus exchange, with
    /// spin Kronecker deltas. Zero across different `S_z` without evaluation.
    pub fn slater_element(&mut self, i: &SlaterState, j: &SlaterState) -> Result<f64> {
        if i.sz() != j.sz() {
            return Ok(0.0);
        }
        let (p, q, r, s) = (i.first, i.second, j.first, j.second);
        let mut value = 0.0;
        if p.spin == r.spin && q.spin == s.spin {
            value += self.spatial_integral(p.mode, q.mode, r.mode, s.mode)?;
        }
        if p.spin == s.spin && q.spin == r.spin {
            value -= self.spatial_integral(p.mode, q.mode, s.mode, r.mode)?;
        }
        Ok(value)
    }

    fn mode(&mut self, n: usize) -> Result<&[f64]> {
        if !self.modes.contains_key(&n) {
            let samples = self.basis.sample_mode(n)?;
            self.modes.insert(n, samples);
        }
        Ok(&self.modes[&n])
    }

    fn pair_density(&mut self, a: usize, c: usize) -> Result<Vec<f64>> {
        let fa = self.mode(a)?.to_vec();
        let fc = self.mode(c)?;
        Ok(fa.iter().zip(fc).map(|(x, y)| x * y).collect())
    }

    fn contact(&mut self, a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
        let ac = self.pair_density(a, c)?;
        let bd = self.pair_density(b, d)?;
        let q = self.basis.quadrature();
        Ok(0.5 * q.weights.iter().zip(ac.iter().zip(&bd)).map(|(w, (x, y))| w * x * y).sum::<f64>())
    }

    fn harmonic_moments(&mut self, omega: f64, a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
        let basis = self.basis;
        basis.check_mode(a.max(b).max(c).max(d))?;
        let delta = |m: usize, n: usize| if m == n { 1.0 } else { 0.0 };
        let direct = basis.position_squared(a, c)? * delta(b, d) + delta(a, c) * basis.position_squared(b, d)?;
        let cross = basis.position(a, c)? * basis.position(b, d)?;
        Ok(0.5 * omega * omega * (direct - 2.0 * cross))
    }

    fn folded_integral(&mut self, a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
        self.fold(a, c)?;
        let bd = self.pair_density(b, d)?;
        let weights = &self.basis.quadrature().weights;
        let folded = &self.folded[&(a, c)];
        let value = weights
            .iter()
            .zip(bd.iter().zip(&folded.potential))
            .map(|(w, (f, g))| w * f * g)
            .sum();
        if let Some(tail) = &folded.tail {
            let mass: f64 = weights.iter().zip(bd.iter().zip(tail)).map(|(w, (f, t))| w * f.abs() * t).sum();
            if mass > 1e-12 && self.truncation.is_none_or(|t| mass > t.tail_mass) {
                self.truncation = Some(TruncationWarning { quartet: [a, b, c, d], tail_mass: mass });
            }
        }
        Ok(value)
    }

    fn fold(&mut self, a: usize, c: usize) -> Result<()> {
        if self.folded.contains_key(&(a, c)) {
            return Ok(());
        }
        let ac = self.pair_density(a, c)?;
        let q = self.basis.quadrature();
        let interaction = self.interaction;
        let support = match interaction {
            InteractionSpec::Tabulated(t) => Some(t.support_radius()),
            _ => None,
        };
        let extent = q.nodes[q.len() - 1] - q.nodes[0];
        let truncated = support.filter(|r| *r < extent);

        let mut potential = Vec::with_capacity(q.len());
        let mut tail = truncated.map(|_| Vec::with_capacity(q.len()));
        for &xj in &q.nodes {
            let mut g = 0.0;
            let mut t = 0.0;
            for ((xi, wi), f) in q.nodes.iter().zip(&q.weights).zip(&ac) {
                let u = xi - xj;
                g += wi * f * interaction.evaluate(u).unwrap_or(0.0);
                if let Some(radius) = truncated {
                    if u.abs() > radius {
                        t += wi * f.abs();
                    }
                }
            }
            potential.push(g);
            if let Some(tail) = tail.as_mut() {
                tail.push(t);
            }
        }
        self.folded.insert((a, c), Folded { potential, tail });
        Ok(())
    }
}

/// Representative of the orbit of `(a,b,c,d)` under `a↔c`, `b↔d` (real
/// modes) and `(a,c)↔(b,d)` (even `V`).
fn canonical_quartet(a: usize, b: usize, c: usize, d: usize) -> [usize; 4] {
    let first = (a.min(c), a.max(c));
    let second = (b.min(d), b.max(d));
    let (p, q) = if first <= second { (first, second) } else { (second, first) };
    [p.0, q.0, p.1, q.1]
}

/// One-off `⟨ab|V|cd⟩` without a persistent cache.
pub fn spatial_integral(
    basis: &dyn SpatialBasis,
    interaction: &InteractionSpec,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> Result<f64> {
    TwoBody::new(basis, interaction).spatial_integral(a, b, c, d)
}

/// One-off `⟨i|V|j⟩` between Slater determinants.
pub fn slater_element(
    i: &SlaterState,
    j: &SlaterState,
    interaction: &InteractionSpec,
    basis: &dyn SpatialBasis,
) -> Result<f64> {
    TwoBody::new(basis, interaction).slater_element(i, j)
}
