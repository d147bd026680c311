//! Flag/config-file resolution, the echoed run config, and error-to-exit-code
//! mapping.
//!
//! The config file is plain `key = value` text (keys are the long flag
//! names, `#` starts a comment); flags override file values. Every report
//! embeds a [`RunConfig`] echo from which the run can be reproduced.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use subgauss::dependence::{CovarianceModel, DependenceError, SlowlyVarying};
use subgauss::experiments::{geometric_grid, ExperimentError, FitMode};
use subgauss::hermite::parse::ParseError;
use subgauss::hermite::AlgebraError;
use subgauss::simulate::SimulationError;

pub struct CliError {
    pub message: String,
    /// 1 = runtime/model error, 2 = usage/parse error.
    pub code: u8,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self { message, code: 2 }
    }

    pub fn runtime(message: String) -> Self {
        Self { message, code: 1 }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<DependenceError> for CliError {
    fn from(e: DependenceError) -> Self {
        let code = match e {
            DependenceError::HurstOutOfRange { .. }
            | DependenceError::NonPositiveCoefficient { .. }
            | DependenceError::CovarianceBound { .. }
            | DependenceError::ConstantPolynomial
            | DependenceError::Algebra(_) => 2,
            DependenceError::NotShortRange { .. }
            | DependenceError::ToleranceUnreachable { .. } => 1,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        let code = match e {
            SimulationError::ConfigInvalid { .. } => 2,
            SimulationError::EmbeddingFailed { .. }
            | SimulationError::NotPositiveDefinite { .. } => 1,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::DegenerateGrid { .. }
            | ExperimentError::Precondition(_)
            | ExperimentError::TooFewReplications { .. } => CliError::usage(e.to_string()),
            ExperimentError::NonpositiveVariance { .. } => CliError::runtime(e.to_string()),
            ExperimentError::Dependence(inner) => inner.into(),
            ExperimentError::Simulation(inner) => inner.into(),
            ExperimentError::Algebra(inner) => inner.into(),
        }
    }
}

/// Covariance model as named on the command line; kept in string-ish form so
/// the config echo reproduces the invocation exactly.
pub struct ModelSpec {
    pub family: String,
    pub hurst: f64,
    pub slowly_varying: Option<String>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<CovarianceModel, CliError> {
        match self.family.as_str() {
            "fgn" => Ok(CovarianceModel::fgn(self.hurst)?),
            "power-law" | "power_law" => {
                let sv =
                    parse_slowly_varying(self.slowly_varying.as_deref().unwrap_or("constant:1"))?;
                Ok(CovarianceModel::power_law(self.hurst, sv)?)
            }
            other => Err(CliError::usage(format!(
                "unknown family '{other}' (expected fgn or power-law)"
            ))),
        }
    }
}

fn parse_slowly_varying(text: &str) -> Result<SlowlyVarying, CliError> {
    let (kind, value) = text.split_once(':').ok_or_else(|| {
        CliError::usage(format!(
            "slowly varying spec '{text}' must be constant:<c> or log:<c>"
        ))
    })?;
    let c: f64 = value
        .parse()
        .map_err(|_| CliError::usage(format!("bad slowly varying coefficient '{value}'")))?;
    match kind {
        "constant" | "const" => Ok(SlowlyVarying::Constant(c)),
        "log" | "logarithmic" => Ok(SlowlyVarying::Logarithmic(c)),
        other => Err(CliError::usage(format!(
            "unknown slowly varying kind '{other}' (expected constant or log)"
        ))),
    }
}

/// Geometric grid spec `start:stop:points`.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "grid '{text}' must be start:stop:points"
        )));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| CliError::usage(format!("bad grid component '{p}'")))
        })
        .collect::<Result<_, _>>()?;
    Ok(geometric_grid(nums[0], nums[1], nums[2])?)
}

/// Inclusive rank range `lo:hi`.
pub fn parse_m_range(text: &str) -> Result<Vec<usize>, CliError> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("m range '{text}' must be lo:hi")))?;
    let lo: usize = lo
        .parse()
        .map_err(|_| CliError::usage(format!("bad rank '{lo}'")))?;
    let hi: usize = hi
        .parse()
        .map_err(|_| CliError::usage(format!("bad rank '{hi}'")))?;
    if lo < 1 || hi < lo {
        return Err(CliError::usage(format!(
            "m range '{text}' must satisfy 1 ≤ lo ≤ hi"
        )));
    }
    Ok((lo..=hi).collect())
}

/// Linear Hurst grid `lo:hi:points`.
pub fn parse_hurst_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "hurst grid '{text}' must be lo:hi:points"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::usage(format!("bad hurst '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::usage(format!("bad hurst '{}'", parts[1])))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| CliError::usage(format!("bad point count '{}'", parts[2])))?;
    if points < 1 || hi < lo {
        return Err(CliError::usage(format!("degenerate hurst grid '{text}'")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Resolved option sources: command-line flags override the config file.
pub struct Settings {
    file: HashMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut file = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::usage(format!(
                        "config {} line {}: expected key = value",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                file.insert(key.trim().replace('_', "-"), value.trim().to_string());
            }
        }
        Ok(Self { file })
    }

    pub fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.file.get(key).cloned())
    }

    pub fn require_string(&self, flag: Option<String>, key: &str) -> Result<String, CliError> {
        self.string(flag, key)
            .ok_or_else(|| CliError::usage(format!("--{key} is required")))
    }

    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::usage(format!("config value {key} = '{raw}' invalid: {e}"))),
            None => Ok(None),
        }
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| CliError::usage(format!("--{key} is required")))
    }

    /// Stochastic commands must be seeded; no silent nondeterminism.
    pub fn require_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        self.get(flag, "seed")?
            .ok_or_else(|| CliError::usage("--seed is required for stochastic runs".into()))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.file.get(key).map(PathBuf::from)
    }

    pub fn model(
        &self,
        family: Option<String>,
        hurst: Option<f64>,
        slowly_varying: Option<String>,
    ) -> Result<ModelSpec, CliError> {
        Ok(ModelSpec {
            family: self
                .string(family, "family")
                .unwrap_or_else(|| "fgn".into()),
            hurst: self.require(hurst, "hurst")?,
            slowly_varying: self.string(slowly_varying, "slowly-varying"),
        })
    }

    /// Resolve `exact`/`mc` mode; Monte Carlo requires replications and a seed.
    pub fn fit_mode(
        &self,
        mode: &str,
        r: Option<usize>,
        seed: Option<u64>,
    ) -> Result<(FitMode, Option<usize>, Option<u64>), CliError> {
        match mode {
            "exact" => {
                // a seed may still arrive (and is echoed) but is unused
                Ok((FitMode::Exact, self.get(r, "r")?, self.get(seed, "seed")?))
            }
            "mc" | "monte-carlo" | "monte_carlo" => {
                let r = self.require(r, "r")?;
                let seed = self.require_seed(seed)?;
                Ok((
                    FitMode::MonteCarlo {
                        replications: r,
                        master_seed: seed,
                    },
                    Some(r),
                    Some(seed),
                ))
            }
            other => Err(CliError::usage(format!(
                "unknown mode '{other}' (expected exact or mc)"
            ))),
        }
    }
}

/// Echo of the resolved run parameters, embedded in every report. Field
/// order is fixed so identical invocations serialize byte-identically.
#[derive(Serialize, Deserialize, Default)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hurst: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slowly_varying: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_range: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hurst_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_power: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_out: Option<String>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn poly(mut self, text: &str) -> Self {
        self.poly = Some(text.to_string());
        self
    }

    pub fn p(mut self, text: &str) -> Self {
        self.p = Some(text.to_string());
        self
    }

    pub fn q(mut self, text: &str) -> Self {
        self.q = Some(text.to_string());
        self
    }

    pub fn rank(mut self, rank: usize) -> Self {
        self.rank = Some(rank);
        self
    }

    pub fn case(mut self, case: &str) -> Self {
        self.case = Some(case.to_string());
        self
    }

    pub fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn hurst(mut self, hurst: f64) -> Self {
        self.hurst = Some(hurst);
        self
    }

    pub fn model(mut self, spec: &ModelSpec) -> Self {
        self.family = Some(spec.family.clone());
        self.hurst = Some(spec.hurst);
        self.slowly_varying = spec.slowly_varying.clone();
        self
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn r(mut self, r: usize) -> Self {
        self.r = Some(r);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn grid(mut self, grid: &str) -> Self {
        self.grid = Some(grid.to_string());
        self
    }

    pub fn mode(mut self, mode: &str) -> Self {
        self.mode = Some(mode.to_string());
        self
    }

    pub fn m_range(mut self, text: &str) -> Self {
        self.m_range = Some(text.to_string());
        self
    }

    pub fn hurst_grid(mut self, text: &str) -> Self {
        self.hurst_grid = Some(text.to_string());
        self
    }

    pub fn max_power(mut self, p: u32) -> Self {
        self.max_power = Some(p);
        self
    }

    pub fn slope_tol(mut self, tol: f64) -> Self {
        self.slope_tol = Some(tol);
        self
    }

    pub fn format(mut self, format: &str) -> Self {
        self.format = Some(format.to_string());
        self
    }

    pub fn data_out(mut self, path: &Path) -> Self {
        self.data_out = Some(path.display().to_string());
        self
    }
}
