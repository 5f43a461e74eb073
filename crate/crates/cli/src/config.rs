//! One TOML file describes an experiment: which family members to visit,
//! the bump and its support ball, sampling budgets, search grids, and where
//! results go.
//!
//! Every knob has a default sized for minutes on one desk machine, so a
//! minimal file — or an empty one — is already runnable. Parsing is strict:
//! unknown keys are rejected rather than silently ignored, because a typoed
//! budget that falls back to a default is the kind of bug that wastes an
//! afternoon.

use phlab_core::{BumpMap, MIN_K};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable that overrides `[output] dir` when set and nonempty.
pub const OUTPUT_DIR_ENV: &str = "PHLAB_OUTPUT_DIR";

/// Default Monte-Carlo orbit count. Shared by the config defaults and the
/// `lyapunov` subcommand flags so the two cannot drift apart.
pub const DEFAULT_N_SEEDS: usize = 64;
/// Default iterations accumulated per orbit.
pub const DEFAULT_N_ITERS: usize = 20_000;
/// Default discarded steps before accumulation starts.
pub const DEFAULT_WARMUP: usize = 100;
/// Default master seed for all random streams.
pub const DEFAULT_MASTER_SEED: u64 = 1729;
/// Default certifier sample count over the bump support.
pub const DEFAULT_CERT_POINTS: usize = 1000;
/// Default boundary directions per cone family.
pub const DEFAULT_CERT_DIRS: usize = 64;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Full experiment description. The struct round-trips losslessly through
/// TOML (floats are written in shortest-round-trip form), which the tests
/// pin down — a config logged next to a result re-runs that result exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySection,
    pub bump: BumpSection,
    pub ball: BallSection,
    pub monte_carlo: MonteCarloSection,
    pub quadrature: QuadratureSection,
    pub certifier: CertifierSection,
    pub return_time: ReturnTimeSection,
    pub search: SearchSection,
    pub r0: R0Section,
    pub output: OutputSection,
}

/// Inclusive range of family parameters visited by `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySection {
    pub k_min: i64,
    pub k_max: i64,
}

impl Default for FamilySection {
    fn default() -> Self {
        FamilySection { k_min: 5, k_max: 20 }
    }
}

/// Twist amplitude and the untouched shell width of the bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BumpSection {
    pub amplitude: f64,
    pub margin: f64,
}

impl Default for BumpSection {
    fn default() -> Self {
        BumpSection { amplitude: 0.3, margin: 0.1 }
    }
}

/// Where the bump lives on the torus: chart center and radius. The default
/// center sits in the displaced box `(0, 2/3) × (0, 1) × (5/6, 1)`, which
/// the linear map moves entirely off itself — that disjointness is what
/// makes the return-time bound usable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallSection {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Default for BallSection {
    fn default() -> Self {
        BallSection {
            center: [1.0 / 3.0, 0.5, 11.0 / 12.0],
            radius: 0.08,
        }
    }
}

/// Orbit budgets for exponent estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub n_seeds: usize,
    pub n_iters: usize,
    pub warmup: usize,
    pub master_seed: u64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        MonteCarloSection {
            n_seeds: DEFAULT_N_SEEDS,
            n_iters: DEFAULT_N_ITERS,
            warmup: DEFAULT_WARMUP,
            master_seed: DEFAULT_MASTER_SEED,
        }
    }
}

/// Midpoint-rule resolution for the bump integral I(h).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub cells_per_axis: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        QuadratureSection { cells_per_axis: 64 }
    }
}

/// Sampling density of the cone certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifierSection {
    pub n_points: usize,
    pub n_dirs: usize,
}

impl Default for CertifierSection {
    fn default() -> Self {
        CertifierSection {
            n_points: DEFAULT_CERT_POINTS,
            n_dirs: DEFAULT_CERT_DIRS,
        }
    }
}

/// Budget for detecting the first return of the support ball to itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReturnTimeSection {
    pub n_max: usize,
    pub n_samples: usize,
}

impl Default for ReturnTimeSection {
    fn default() -> Self {
        ReturnTimeSection { n_max: 64, n_samples: 2048 }
    }
}

/// Candidate grid for the positive-exponent witness search. Candidates are
/// visited smallest `k` first. The default list reflects the measured
/// trade-off: the Birkhoff gain from the bump is `|det P|·r³·(−I(h))`
/// — about 3.4e−5 at full amplitude and radius 0.08 — while the linear
/// central exponent is only about −1/k, so the crossover sits in the tens
/// of thousands and the confidence interval first clears zero near
/// k = 80 000 at the default Monte-Carlo budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub k_candidates: Vec<i64>,
    pub amplitudes: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            k_candidates: vec![20_000, 40_000, 80_000],
            amplitudes: vec![1.0],
            radii: vec![0.08],
        }
    }
}

/// Stopping rule for the zero-crossing bisection: accept a midpoint once
/// its confidence interval straddles zero *and* is narrower than `ci_floor`
/// (half-width). The floor should sit a little above the standard error the
/// Monte-Carlo budget actually delivers, else the bisection exhausts its
/// budget without ever declaring convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct R0Section {
    pub ci_floor: f64,
    pub max_bisections: usize,
}

impl Default for R0Section {
    fn default() -> Self {
        R0Section { ci_floor: 2e-5, max_bisections: 24 }
    }
}

/// Where `sweep` writes its CSV/JSON/plot files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

impl ExperimentConfig {
    /// Parse and validate a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Serialize back to TOML. Floats are emitted in shortest form that
    /// parses back to the identical bit pattern.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_toml_string()).map_err(|source| ConfigError::Unwritable {
            path: path.to_path_buf(),
            source,
        })
    }

    /// The directory results go to: the config value, unless the
    /// [`OUTPUT_DIR_ENV`] environment variable overrides it.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.dir.clone(),
        }
    }

    /// The swept family parameters, ascending.
    pub fn ks(&self) -> Vec<i64> {
        (self.family.k_min..=self.family.k_max).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
            ConfigError::Invalid { field, reason: reason.into() }
        }

        if self.family.k_min < MIN_K {
            return Err(invalid(
                "family.k_min",
                format!("{} is below the smallest admissible parameter {MIN_K}", self.family.k_min),
            ));
        }
        if self.family.k_max < self.family.k_min {
            return Err(invalid(
                "family.k_max",
                format!("{} is below k_min = {}", self.family.k_max, self.family.k_min),
            ));
        }
        // Delegate the amplitude/margin window to the construction itself.
        BumpMap::new(self.bump.amplitude, self.bump.margin)
            .map_err(|e| invalid("bump", e.to_string()))?;
        if !self.ball.center.iter().all(|c| c.is_finite()) {
            return Err(invalid("ball.center", "coordinates must be finite"));
        }
        if !(self.ball.radius > 0.0 && self.ball.radius < 0.5) {
            return Err(invalid(
                "ball.radius",
                format!("{} must lie in (0, 0.5); the chart is never injective past that", self.ball.radius),
            ));
        }
        if self.monte_carlo.n_seeds < 2 {
            return Err(invalid("monte_carlo.n_seeds", "standard errors need at least two seeds"));
        }
        if self.monte_carlo.n_iters == 0 {
            return Err(invalid("monte_carlo.n_iters", "need at least one accumulation step"));
        }
        if self.quadrature.cells_per_axis < 2 {
            return Err(invalid("quadrature.cells_per_axis", "need at least 2 cells per axis"));
        }
        if self.certifier.n_points == 0 {
            return Err(invalid("certifier.n_points", "need at least one sample point"));
        }
        if self.certifier.n_dirs < 4 {
            return Err(invalid("certifier.n_dirs", "need at least 4 boundary directions"));
        }
        if self.return_time.n_max == 0 {
            return Err(invalid("return_time.n_max", "need at least one iterate"));
        }
        if self.return_time.n_samples == 0 {
            return Err(invalid("return_time.n_samples", "need at least one sample"));
        }
        for &k in &self.search.k_candidates {
            if k < MIN_K {
                return Err(invalid(
                    "search.k_candidates",
                    format!("{k} is below the smallest admissible parameter {MIN_K}"),
                ));
            }
        }
        for &a in &self.search.amplitudes {
            BumpMap::new(a, self.bump.margin)
                .map_err(|e| invalid("search.amplitudes", e.to_string()))?;
        }
        for &r in &self.search.radii {
            if !(r > 0.0 && r < 0.5) {
                return Err(invalid("search.radii", format!("{r} must lie in (0, 0.5)")));
            }
        }
        if !(self.r0.ci_floor > 0.0 && self.r0.ci_floor.is_finite()) {
            return Err(invalid("r0.ci_floor", "must be a positive finite half-width"));
        }
        if self.r0.max_bisections == 0 {
            return Err(invalid("r0.max_bisections", "need at least one bisection step"));
        }
        Ok(())
    }
}
