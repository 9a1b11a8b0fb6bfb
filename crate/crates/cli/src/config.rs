use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use degent_core::ci::DEFAULT_LAMBDAS;
use degent_core::spbasis::{solve_potential, Grid, HarmonicBasis, NumericBasis, SpatialBasis};
use degent_core::twobody::{InteractionSpec, TabulatedInteraction, DEFAULT_CACHE_CAPACITY};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Environment variable overriding the two-body integral cache capacity.
pub const CACHE_SIZE_VAR: &str = "DEGENT_CACHE_SIZE";

/// Largest level label and CI cutoff accepted on the command line.
pub const MAX_LEVEL: usize = 40;

pub const DEFAULT_LEVEL: usize = 1;
pub const DEFAULT_CI_CUTOFF: usize = 12;
pub const DEFAULT_BOUNDS_RANGE: (usize, usize) = (0, 10);
pub const DEFAULT_R_RANGE: (f64, f64) = (0.0, 4.0);
pub const DEFAULT_R_STEPS: usize = 401;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Harmonic(f64),
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InteractionChoice {
    Delta,
    Harmonic(f64),
    Gaussian { amplitude: f64, width: f64 },
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn number(text: &str, what: &str) -> Result<f64> {
    let value: f64 = text.trim().parse().map_err(|_| CliError::Config(format!("{what}: cannot parse '{text}'")))?;
    if !value.is_finite() {
        return Err(CliError::Config(format!("{what}: value must be finite, got '{text}'")));
    }
    Ok(value)
}

fn positive(text: &str, what: &str) -> Result<f64> {
    let value = number(text, what)?;
    if value <= 0.0 {
        return Err(CliError::Config(format!("{what}: value must be positive, got {value}")));
    }
    Ok(value)
}

impl FromStr for PotentialSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().split_once(':') {
            Some(("harmonic", omega)) => Ok(PotentialSpec::Harmonic(positive(omega, "harmonic potential omega")?)),
            Some(("table", path)) if !path.is_empty() => Ok(PotentialSpec::Table(PathBuf::from(path))),
            _ => Err(CliError::Config(format!("unknown potential '{s}' (expected harmonic:<omega> or table:<path>)"))),
        }
    }
}

impl FromStr for InteractionChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "delta" {
            return Ok(InteractionChoice::Delta);
        }
        match s.split_once(':') {
            Some(("harmonic", omega)) => Ok(InteractionChoice::Harmonic(positive(omega, "harmonic interaction omega")?)),
            Some(("gaussian", params)) => {
                let (a, w) = params
                    .split_once(',')
                    .ok_or_else(|| CliError::Config(format!("gaussian interaction needs <amplitude>,<width>, got '{params}'")))?;
                Ok(InteractionChoice::Gaussian {
                    amplitude: number(a, "gaussian amplitude")?,
                    width: positive(w, "gaussian width")?,
                })
            }
            Some(("table", path)) if !path.is_empty() => Ok(InteractionChoice::Table(PathBuf::from(path))),
            _ => Err(CliError::Config(format!(
                "unknown interaction '{s}' (expected delta, harmonic:<omega>, gaussian:<A>,<s> or table:<path>)"
            ))),
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown output format '{other}' (expected csv or json)"))),
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Harmonic(omega) => write!(f, "harmonic:{omega}"),
            PotentialSpec::Table(path) => write!(f, "table:{}", path.display()),
        }
    }
}

impl fmt::Display for InteractionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InteractionChoice::Delta => write!(f, "delta"),
            InteractionChoice::Harmonic(omega) => write!(f, "harmonic:{omega}"),
            InteractionChoice::Gaussian { amplitude, width } => write!(f, "gaussian:{amplitude},{width}"),
            InteractionChoice::Table(path) => write!(f, "table:{}", path.display()),
        }
    }
}

/// Reads a two-column numeric table. Columns are separated by whitespace
/// and/or a comma; `#` starts a comment.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != 2 {
            return Err(CliError::Config(format!(
                "{}:{}: expected 2 columns, found {}",
                path.display(),
                k + 1,
                fields.len()
            )));
        }
        let what = format!("{}:{}", path.display(), k + 1);
        xs.push(number(fields[0], &what)?);
        ys.push(number(fields[1], &what)?);
    }
    if xs.len() < 5 {
        return Err(CliError::Config(format!("{}: table needs at least 5 rows, found {}", path.display(), xs.len())));
    }
    Ok((xs, ys))
}

/// Grid spanned by tabulated abscissae, which must be uniform.
fn table_grid(path: &Path, xs: &[f64]) -> Result<Grid> {
    let grid = Grid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    let h = grid.spacing();
    for (i, x) in xs.iter().enumerate() {
        let expected = grid.x_min + h * i as f64;
        if (x - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            return Err(CliError::Config(format!("{}: grid is not uniform at x = {x}", path.display())));
        }
    }
    Ok(grid)
}

pub enum Basis {
    Harmonic(HarmonicBasis),
    Numeric(NumericBasis),
}

impl Basis {
    /// Builds the single-particle basis holding at least `modes` modes.
    pub fn build(spec: &PotentialSpec, modes: usize) -> Result<Self> {
        match spec {
            PotentialSpec::Harmonic(omega) => Ok(Basis::Harmonic(HarmonicBasis::new(*omega)?)),
            PotentialSpec::Table(path) => {
                let (xs, us) = read_table(path)?;
                let grid = table_grid(path, &xs)?;
                Ok(Basis::Numeric(solve_potential(grid, us, modes)?))
            }
        }
    }

    pub fn as_dyn(&self) -> &dyn SpatialBasis {
        match self {
            Basis::Harmonic(b) => b,
            Basis::Numeric(b) => b,
        }
    }
}

impl InteractionChoice {
    pub fn build(&self) -> Result<InteractionSpec> {
        Ok(match self {
            InteractionChoice::Delta => InteractionSpec::Delta,
            InteractionChoice::Harmonic(omega) => InteractionSpec::harmonic(*omega)?,
            InteractionChoice::Gaussian { amplitude, width } => InteractionSpec::gaussian(*amplitude, *width)?,
            InteractionChoice::Table(path) => {
                let (u, v) = read_table(path)?;
                InteractionSpec::Tabulated(TabulatedInteraction::new(&u, &v)?)
            }
        })
    }
}

/// Cache capacity from the environment, or the library default.
pub fn cache_capacity() -> Result<usize> {
    match std::env::var(CACHE_SIZE_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_CACHE_CAPACITY),
        Err(e) => Err(CliError::Config(format!("{CACHE_SIZE_VAR}: {e}"))),
        Ok(text) => text
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{CACHE_SIZE_VAR} must be a non-negative integer, got '{text}'"))),
    }
}

/// Flat key-value run file. Every key is optional; flags override it.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub potential: Option<String>,
    pub interaction: Option<String>,
    pub n: Option<usize>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub lambdas: Option<Vec<f64>>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub steps: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(ConfigFile::default()), ConfigFile::load)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTarget {
    pub path: PathBuf,
    pub format: Format,
}

/// Resolves where and how to write the file output. The format defaults to
/// JSON for a `.json` extension and CSV otherwise.
pub fn output_target(path: Option<PathBuf>, format: Option<&str>) -> Result<Option<OutputTarget>> {
    let format = format.map(Format::from_str).transpose()?;
    Ok(path.map(|path| {
        let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        });
        OutputTarget { path, format }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelConfig {
    pub potential: PotentialSpec,
    pub interaction: InteractionChoice,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcurveConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub potential: PotentialSpec,
    pub interaction: InteractionChoice,
    pub n: usize,
    pub n_max: usize,
    pub lambdas: Vec<f64>,
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn physics(potential: Option<String>, interaction: Option<String>) -> Result<(PotentialSpec, InteractionChoice)> {
    let potential = potential.as_deref().map_or(Ok(PotentialSpec::Harmonic(1.0)), str::parse)?;
    let interaction = interaction.as_deref().map_or(Ok(InteractionChoice::Delta), str::parse)?;
    Ok((potential, interaction))
}

fn check_level(n: usize, what: &str) -> Result<usize> {
    if n > MAX_LEVEL {
        return Err(CliError::Config(format!("{what} must be at most {MAX_LEVEL}, got {n}")));
    }
    Ok(n)
}

impl LevelConfig {
    pub fn resolve(file: &ConfigFile, potential: Option<String>, interaction: Option<String>, n: Option<usize>) -> Result<Self> {
        let (potential, interaction) =
            physics(pick(potential, file.potential.clone()), pick(interaction, file.interaction.clone()))?;
        let n = check_level(pick(n, file.n).unwrap_or(DEFAULT_LEVEL), "n")?;
        Ok(LevelConfig { potential, interaction, n })
    }
}

impl BoundsConfig {
    pub fn resolve(file: &ConfigFile, n_min: Option<usize>, n_max: Option<usize>) -> Result<Self> {
        let n_min = pick(n_min, file.n_min).unwrap_or(DEFAULT_BOUNDS_RANGE.0);
        let n_max = pick(n_max, file.n_max).unwrap_or(DEFAULT_BOUNDS_RANGE.1);
        if n_min > n_max {
            return Err(CliError::Config(format!("n_min ({n_min}) exceeds n_max ({n_max})")));
        }
        if n_max > 1_000_000 {
            return Err(CliError::Config(format!("n_max must be at most 1000000, got {n_max}")));
        }
        Ok(BoundsConfig { n_min, n_max })
    }
}

impl RcurveConfig {
    pub fn resolve(file: &ConfigFile, r_min: Option<f64>, r_max: Option<f64>, steps: Option<usize>) -> Result<Self> {
        let r_min = pick(r_min, file.r_min).unwrap_or(DEFAULT_R_RANGE.0);
        let r_max = pick(r_max, file.r_max).unwrap_or(DEFAULT_R_RANGE.1);
        let steps = pick(steps, file.steps).unwrap_or(DEFAULT_R_STEPS);
        if !(r_min.is_finite() && r_max.is_finite() && r_max > r_min) {
            return Err(CliError::Config(format!("r range [{r_min}, {r_max}] must be finite and increasing")));
        }
        if !(2..=1_000_000).contains(&steps) {
            return Err(CliError::Config(format!("steps must lie in 2..=1000000, got {steps}")));
        }
        Ok(RcurveConfig { r_min, r_max, steps })
    }
}

/// Parses a comma-separated list of couplings.
pub fn parse_lambdas(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|t| positive(t, "lambda")).collect()
}

impl SweepConfig {
    pub fn resolve(
        file: &ConfigFile,
        potential: Option<String>,
        interaction: Option<String>,
        n: Option<usize>,
        n_max: Option<usize>,
        lambdas: Option<Vec<f64>>,
    ) -> Result<Self> {
        let (potential, interaction) =
            physics(pick(potential, file.potential.clone()), pick(interaction, file.interaction.clone()))?;
        let n = check_level(pick(n, file.n).unwrap_or(DEFAULT_LEVEL), "n")?;
        let n_max = check_level(pick(n_max, file.n_max).unwrap_or(DEFAULT_CI_CUTOFF), "n_max")?;
        if n_max < n {
            return Err(CliError::Config(format!("CI cutoff n_max ({n_max}) is below the level n ({n})")));
        }
        let lambdas = pick(lambdas, file.lambdas.clone()).unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
        if lambdas.is_empty() {
            return Err(CliError::Config("lambda grid is empty".into()));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(CliError::Config(format!("lambda must be positive and finite, got {bad}")));
        }
        Ok(SweepConfig { potential, interaction, n, n_max, lambdas })
    }
}
