//! Experiment engine: variance-growth fits, central-limit checks, the
//! counterexample pipeline, and the dichotomy scan.
//!
//! Strong mixing itself is never estimated: α-mixing coefficients have no
//! consistent finite-sample estimator. What the experiments demonstrate is
//! the observable mechanism: a short-range dependent transformation whose
//! partial-sum variance grows like `N`, composed with a polynomial into a
//! long-range dependent sequence whose variance grows like
//! `N^{(2H-2)m'+2}`, growth rates a strong-mixing process cannot sustain.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::dependence::{
    breuer_major_sigma2, classify, find_q, partial_sum_variance, theoretical_exponent,
    Classification, CovarianceModel, DependenceError,
};
use crate::hermite::{compose, AlgebraError, HermitePoly};
use crate::numeric::{kahan_sum, KahanSum};
use crate::simulate::{derive_seed, map_paths, SimulationConfig, SimulationError};
use crate::stats::{ks_statistic, mardia_skewness_2d, ols, sample_moments, standard_normal_cdf};

/// Minimum replications for a central-limit report.
pub const MIN_CLT_REPLICATIONS: usize = 200;

/// Default accuracy requested from the limit-variance series.
pub const SIGMA2_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("grid invalid: {reason}")]
    DegenerateGrid { reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("monte carlo variance estimate nonpositive at N = {n}: {value}")]
    NonpositiveVariance { n: usize, value: f64 },
    #[error("replication count {got} below the minimum {min}")]
    TooFewReplications { got: usize, min: usize },
    #[error(transparent)]
    Dependence(#[from] DependenceError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Calibration constants of this artifact (not theory-derived values); kept
/// in one place so acceptance thresholds are adjustable without code change.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Allowed |fitted slope − theoretical slope| in a verdict.
    pub slope: f64,
    /// Allowed one-sample KS distance in a central-limit check.
    pub ks: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope: 0.05,
            ks: 0.06,
        }
    }
}

/// How variance-growth points are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// `s_N²` from the exact covariance oracle.
    Exact,
    /// `s_N²` estimated across seeded replications.
    MonteCarlo {
        replications: usize,
        master_seed: u64,
    },
}

impl FitMode {
    fn name(&self) -> &'static str {
        match self {
            FitMode::Exact => "exact",
            FitMode::MonteCarlo { .. } => "monte_carlo",
        }
    }
}

/// Fitted log-variance growth over a grid of partial-sum lengths.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub grid: Vec<usize>,
    pub variances: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<f64>>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub fitted_intercept: f64,
    pub theoretical_slope: f64,
    pub regime: Classification,
    pub mode: &'static str,
}

/// Standard-normal comparison of normalized partial sums.
#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub replications: usize,
    pub ks_statistic: f64,
    pub sigma2_used: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    /// Joint two-point check (sums at N/2 and N): Mardia skewness statistic,
    /// asymptotically χ²₄ under the Brownian-limit hypothesis.
    pub mardia_skewness: f64,
}

/// Paired growth reports demonstrating the short-range/long-range dichotomy.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub case: &'static str,
    pub m: usize,
    pub hurst: f64,
    /// The rank-lowering polynomial, e.g. `x^3`.
    pub q: String,
    pub composed_rank: usize,
    pub base: GrowthReport,
    pub composed: GrowthReport,
    pub base_slope_error: f64,
    pub composed_slope_error: f64,
    pub dichotomy_held: bool,
    pub summary: String,
}

/// One `(m, H)` cell of the dichotomy scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub m: usize,
    pub hurst: f64,
    pub rank: usize,
    pub exponent_value: f64,
    pub classification: Classification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_power: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composed_rank: Option<usize>,
    pub theorem_applies: bool,
}

/// Geometric grid `start·(stop/start)^{i/(points−1)}`, rounded and
/// deduplicated; log-log fitting wants geometric spacing.
pub fn geometric_grid(
    start: usize,
    stop: usize,
    points: usize,
) -> Result<Vec<usize>, ExperimentError> {
    if start < 1 || stop <= start || points < 2 {
        return Err(ExperimentError::DegenerateGrid {
            reason: format!("need 1 ≤ start < stop and ≥ 2 points, got {start}:{stop}:{points}"),
        });
    }
    let ratio = stop as f64 / start as f64;
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (start as f64 * ratio.powf(t)).round() as usize
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

fn validate_grid(grid: &[usize]) -> Result<(), ExperimentError> {
    if grid.len() < 4 {
        return Err(ExperimentError::DegenerateGrid {
            reason: format!("need at least 4 grid points, got {}", grid.len()),
        });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(ExperimentError::DegenerateGrid {
            reason: "grid must be strictly increasing".into(),
        });
    }
    if grid[0] == 0 || grid[grid.len() - 1] < 100 * grid[0] {
        return Err(ExperimentError::DegenerateGrid {
            reason: "grid must span at least two decades".into(),
        });
    }
    Ok(())
}

/// Per-replication centered partial sum `Σ_{i≤N} p(z_i) − N·c₀` and the
/// matching half-length sum, evaluated by compensated Horner + Kahan.
fn replication_sums(
    p: &HermitePoly,
    model: &CovarianceModel,
    n: usize,
    replications: usize,
    master_seed: u64,
) -> Result<Vec<(f64, f64)>, ExperimentError> {
    use num_traits::ToPrimitive;
    let coeffs = p.to_monomial().coeffs_f64();
    let mean = p.coeff(0).to_f64().expect("mean fits in f64");
    let config = SimulationConfig::new(*model, n, replications, master_seed)?;
    let half = n / 2;
    Ok(map_paths(&config, |_, path| {
        let mut acc = KahanSum::new();
        let mut at_half = 0.0;
        for (i, &z) in path.iter().enumerate() {
            acc.add(crate::numeric::compensated_horner(&coeffs, z) - mean);
            if i + 1 == half {
                at_half = acc.value();
            }
        }
        (at_half, acc.value())
    })?)
}

/// Variance-growth fit: `s_N²` per grid point (exact oracle or Monte Carlo),
/// then least squares on `(ln N, ln s_N²)` with the smallest grid point
/// dropped (pre-asymptotic bias; slowly varying corrections fade at large N
/// and the exact oracle makes large N cheap).
pub fn fit_growth(
    p: &HermitePoly,
    model: &CovarianceModel,
    grid: &[usize],
    mode: FitMode,
) -> Result<GrowthReport, ExperimentError> {
    validate_grid(grid)?;
    let rank = p.rank().ok_or(DependenceError::ConstantPolynomial)?;
    let class = classify(rank, model.hurst())?;
    if class.classification == Classification::Boundary {
        return Err(ExperimentError::Precondition(format!(
            "boundary case (2H-2)m+1 = 0 at rank {rank}, H = {} is excluded from growth fits",
            model.hurst()
        )));
    }
    let theoretical_slope = theoretical_exponent(rank, model.hurst())?;
    let (variances, std_errors) = match mode {
        FitMode::Exact => {
            let vars = grid
                .iter()
                .map(|&n| partial_sum_variance(p, model, n))
                .collect::<Result<Vec<_>, _>>()?;
            (vars, None)
        }
        FitMode::MonteCarlo {
            replications,
            master_seed,
        } => {
            let mut vars = Vec::with_capacity(grid.len());
            let mut errs = Vec::with_capacity(grid.len());
            for (idx, &n) in grid.iter().enumerate() {
                // one independent sub-stream per grid point
                let seed = derive_seed(master_seed, idx as u64);
                let sums = replication_sums(p, model, n, replications, seed)?;
                let r = replications as f64;
                // the exact mean is known (sums are centered), so the
                // second/fourth moments are taken about zero
                let m2 = kahan_sum(sums.iter().map(|s| s.1 * s.1)) / r;
                let m4 = kahan_sum(sums.iter().map(|s| s.1.powi(4))) / r;
                if m2 <= 0.0 {
                    return Err(ExperimentError::NonpositiveVariance { n, value: m2 });
                }
                vars.push(m2);
                errs.push(((m4 - m2 * m2).max(0.0) / r).sqrt());
            }
            (vars, Some(errs))
        }
    };
    for (&n, &v) in grid.iter().zip(&variances) {
        if v.is_nan() || v <= 0.0 {
            return Err(ExperimentError::NonpositiveVariance { n, value: v });
        }
    }
    let xs: Vec<f64> = grid[1..].iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = variances[1..].iter().map(|&v| v.ln()).collect();
    let fit = ols(&xs, &ys);
    Ok(GrowthReport {
        grid: grid.to_vec(),
        variances,
        std_errors,
        fitted_slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        fitted_intercept: fit.intercept,
        theoretical_slope,
        regime: class.classification,
        mode: mode.name(),
    })
}

/// Central-limit check at the endpoint: `R` replicates of
/// `σ⁻¹ N^{-1/2} Σ_{i≤N} (p(Z_i) − c₀)` against the standard normal, with
/// `σ²` from the limit-variance series, plus a two-point joint-normality
/// probe (sums at N/2 and N) via Mardia's skewness.
pub fn clt_experiment(
    p: &HermitePoly,
    model: &CovarianceModel,
    n: usize,
    replications: usize,
    master_seed: u64,
) -> Result<CltReport, ExperimentError> {
    if replications < MIN_CLT_REPLICATIONS {
        return Err(ExperimentError::TooFewReplications {
            got: replications,
            min: MIN_CLT_REPLICATIONS,
        });
    }
    // refuses long-range and boundary input, naming the violated condition
    let sigma2 = breuer_major_sigma2(p, model, SIGMA2_TOLERANCE)?;
    let sums = replication_sums(p, model, n, replications, master_seed)?;
    let scale = (sigma2 * n as f64).sqrt();
    let standardized: Vec<f64> = sums.iter().map(|s| s.1 / scale).collect();
    let pairs: Vec<(f64, f64)> = sums.iter().map(|s| (s.0 / scale, s.1 / scale)).collect();
    let moments = sample_moments(&standardized);
    Ok(CltReport {
        n,
        replications,
        ks_statistic: ks_statistic(&standardized, standard_normal_cdf),
        sigma2_used: sigma2,
        mean: moments.mean,
        variance: moments.variance,
        skewness: moments.skewness,
        kurtosis: moments.kurtosis,
        mardia_skewness: mardia_skewness_2d(&pairs),
    })
}

/// Which construction the counterexample uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropositionCase {
    /// Even rank `m ≥ 4`, `H > 3/4`, square transform.
    EvenSquare,
    /// Odd rank `m ≥ 3`, cube transform.
    OddCube,
}

impl PropositionCase {
    pub fn label(&self) -> &'static str {
        match self {
            PropositionCase::EvenSquare => "a",
            PropositionCase::OddCube => "b",
        }
    }
}

/// Full counterexample pipeline: build `P = H_m` over fGn(H), verify the
/// case preconditions, locate `Q`, and emit paired growth reports: slope
/// ≈ 1 for `P`, super-linear slope approaching `(2H-2)m'+2` for `Q∘P`,
/// with a machine-readable verdict that the dichotomy held.
///
/// The verdict requires the base slope within `tolerances.slope` of 1, the
/// composed slope to exceed the base by more than `tolerances.slope`, and
/// the composed slope to stay below its theoretical exponent plus the
/// tolerance. The composed fit converges to the exponent from below: the
/// composition's short-range chaos components contribute variance linear in
/// `N` whose share fades only as `N^{(2H-2)m'+1}`, so on moderate grids the
/// fitted value undershoots the limit while the super-linear growth itself
/// is already unambiguous.
pub fn counterexample_run(
    case: PropositionCase,
    m: usize,
    hurst: f64,
    grid: &[usize],
    mode: FitMode,
    tolerances: &Tolerances,
) -> Result<CounterexampleReport, ExperimentError> {
    match case {
        PropositionCase::EvenSquare => {
            if m < 4 || !m.is_multiple_of(2) {
                return Err(ExperimentError::Precondition(format!(
                    "case (a) requires m ≥ 4 even, got m = {m}"
                )));
            }
            if hurst <= 0.75 {
                return Err(ExperimentError::Precondition(format!(
                    "case (a) requires H > 3/4, got H = {hurst}"
                )));
            }
        }
        PropositionCase::OddCube => {
            if m < 3 || m.is_multiple_of(2) {
                return Err(ExperimentError::Precondition(format!(
                    "case (b) requires m ≥ 3 odd, got m = {m}"
                )));
            }
        }
    }
    let class = classify(m, hurst)?;
    if class.classification != Classification::Srd {
        return Err(ExperimentError::Precondition(format!(
            "the base transformation must be SRD: (2H-2)m+1 < 0 fails at m = {m}, H = {hurst} \
             (exponent value {})",
            class.exponent_value
        )));
    }
    let p = HermitePoly::basis(m)?;
    let model = CovarianceModel::fgn(hurst)?;
    let found = find_q(&p, hurst, 4)?.ok_or_else(|| {
        ExperimentError::Precondition(format!(
            "no rank-lowering polynomial up to x^4 for m = {m}, H = {hurst}"
        ))
    })?;
    let (expected_power, expected_rank) = match case {
        PropositionCase::EvenSquare => (2, 2),
        PropositionCase::OddCube => (3, 1),
    };
    assert_eq!(
        found.power, expected_power,
        "construction picks the case's transform"
    );
    assert_eq!(found.composed_rank, expected_rank);
    assert!(found.composed_rank < m);
    assert!((2.0 * hurst - 2.0) * found.composed_rank as f64 + 1.0 > 0.0);
    let composed = compose(&found.q, &p)?;
    let base = fit_growth(&p, &model, grid, mode)?;
    let composed_report = fit_growth(&composed, &model, grid, mode)?;
    let base_slope_error = (base.fitted_slope - base.theoretical_slope).abs();
    let composed_slope_error =
        (composed_report.fitted_slope - composed_report.theoretical_slope).abs();
    let dichotomy_held = base.regime == Classification::Srd
        && composed_report.regime == Classification::Lrd
        && base_slope_error <= tolerances.slope
        && composed_report.fitted_slope - base.fitted_slope > tolerances.slope
        && composed_report.fitted_slope <= composed_report.theoretical_slope + tolerances.slope;
    let summary = format!(
        "P = H_{m} over fGn(H = {hurst}) is SRD with fitted variance growth N^{:.3} \
         (theory N^1); Q = {} lowers the rank to {} and Q(P) is LRD with fitted growth \
         N^{:.3} (limit N^{:.3}, approached from below); dichotomy {}",
        base.fitted_slope,
        found.q,
        found.composed_rank,
        composed_report.fitted_slope,
        composed_report.theoretical_slope,
        if dichotomy_held { "held" } else { "NOT held" },
    );
    Ok(CounterexampleReport {
        case: case.label(),
        m,
        hurst,
        q: found.q.to_string(),
        composed_rank: found.composed_rank,
        base,
        composed: composed_report,
        base_slope_error,
        composed_slope_error,
        dichotomy_held,
        summary,
    })
}

/// Machine-checkable map of the `(m, H)` parameter space: rank of `H_m`,
/// dependence class, the located `Q` if any, and whether the rank-lowering
/// construction applies, including the `P(x) = x²`-style blind spots where
/// no `Q` exists.
pub fn dichotomy_scan(
    m_values: &[usize],
    hurst_values: &[f64],
    max_power: u32,
) -> Result<Vec<ScanRow>, ExperimentError> {
    let mut rows = Vec::with_capacity(m_values.len() * hurst_values.len());
    for &m in m_values {
        for &hurst in hurst_values {
            let class = classify(m, hurst)?;
            let mut row = ScanRow {
                m,
                hurst,
                rank: m,
                exponent_value: class.exponent_value,
                classification: class.classification,
                q_power: None,
                composed_rank: None,
                theorem_applies: false,
            };
            if class.classification == Classification::Srd {
                if let Some(found) = find_q(&HermitePoly::basis(m)?, hurst, max_power)? {
                    row.q_power = Some(found.power);
                    row.composed_rank = Some(found.composed_rank);
                    row.theorem_applies = true;
                }
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// `N,variance[,std_error]` rows for external tooling.
pub fn write_points_csv<W: Write>(w: &mut W, report: &GrowthReport) -> io::Result<()> {
    if let Some(errs) = &report.std_errors {
        writeln!(w, "n,variance,std_error")?;
        for ((n, v), e) in report.grid.iter().zip(&report.variances).zip(errs) {
            writeln!(w, "{n},{v},{e}")?;
        }
    } else {
        writeln!(w, "n,variance")?;
        for (n, v) in report.grid.iter().zip(&report.variances) {
            writeln!(w, "{n},{v}")?;
        }
    }
    Ok(())
}

/// `(ln N, ln s_N²)` point rows; data-only plot emission, no rendering
/// dependency. [`write_fit_line`] produces the matching fitted-line sidecar.
pub fn write_plot_data<W: Write>(w: &mut W, report: &GrowthReport) -> io::Result<()> {
    writeln!(w, "log_n,log_variance")?;
    for (n, v) in report.grid.iter().zip(&report.variances) {
        writeln!(w, "{},{}", (*n as f64).ln(), v.ln())?;
    }
    Ok(())
}

/// Fitted line evaluated on the grid's log abscissas.
pub fn write_fit_line<W: Write>(w: &mut W, report: &GrowthReport) -> io::Result<()> {
    writeln!(w, "log_n,fitted_log_variance")?;
    for n in &report.grid {
        let x = (*n as f64).ln();
        writeln!(
            w,
            "{x},{}",
            report.fitted_intercept + report.fitted_slope * x
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(k: usize) -> HermitePoly {
        HermitePoly::basis(k).unwrap()
    }

    fn grid_2_8_to_2_16() -> Vec<usize> {
        geometric_grid(256, 65536, 9).unwrap()
    }

    #[test]
    fn geometric_grid_powers_of_two() {
        assert_eq!(
            grid_2_8_to_2_16(),
            vec![256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 65536]
        );
        assert!(geometric_grid(256, 256, 4).is_err());
        assert!(geometric_grid(0, 100, 4).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[10, 100, 1000, 10000]).is_ok());
        assert!(validate_grid(&[10, 100, 1000]).is_err());
        assert!(validate_grid(&[10, 100, 100, 10000]).is_err());
        assert!(validate_grid(&[10, 20, 40, 80]).is_err()); // under two decades
    }

    #[test]
    fn exact_growth_of_rank_one_is_2h() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let report = fit_growth(&h(1), &model, &grid_2_8_to_2_16(), FitMode::Exact).unwrap();
        assert!(
            (report.fitted_slope - 1.6).abs() < 1e-3,
            "slope {}",
            report.fitted_slope
        );
        assert_eq!(report.regime, Classification::Lrd);
        assert!((report.theoretical_slope - 1.6).abs() < 1e-12);
    }

    #[test]
    fn exact_growth_of_srd_rank_three() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let report = fit_growth(&h(3), &model, &grid_2_8_to_2_16(), FitMode::Exact).unwrap();
        assert!(
            (report.fitted_slope - 1.0).abs() < 0.05,
            "slope {}",
            report.fitted_slope
        );
        assert_eq!(report.regime, Classification::Srd);
        assert_eq!(report.theoretical_slope, 1.0);
    }

    #[test]
    fn exact_growth_of_composed_cube() {
        // H_3³ carries 99.1% of its variance in chaos levels ≥ 3, whose
        // partial sums grow linearly; the rank-1 component overtakes them
        // only near N ≈ 2²⁰, so on this grid the fit sits mid-transition at
        // 1.3425 on its way to the limit 1.6
        let model = CovarianceModel::fgn(0.8).unwrap();
        let q = crate::hermite::MonomialPoly::power(3).unwrap();
        let composed = compose(&q, &h(3)).unwrap();
        let report = fit_growth(&composed, &model, &grid_2_8_to_2_16(), FitMode::Exact).unwrap();
        assert!(
            (report.fitted_slope - 1.3425).abs() < 1e-3,
            "slope {}",
            report.fitted_slope
        );
        assert_eq!(report.regime, Classification::Lrd);
        assert!((report.theoretical_slope - 1.6).abs() < 1e-12);
    }

    #[test]
    fn composed_cube_slope_approaches_its_limit() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let q = crate::hermite::MonomialPoly::power(3).unwrap();
        let composed = compose(&q, &h(3)).unwrap();
        let near = geometric_grid(1 << 16, 1 << 24, 9).unwrap();
        let report = fit_growth(&composed, &model, &near, FitMode::Exact).unwrap();
        assert!(
            (report.fitted_slope - 1.6).abs() < 0.05,
            "slope {} should be within 0.05 of the limit on 2^16..2^24",
            report.fitted_slope
        );
    }

    #[test]
    fn boundary_is_refused() {
        let model = CovarianceModel::fgn(0.75).unwrap();
        assert!(matches!(
            fit_growth(&h(2), &model, &grid_2_8_to_2_16(), FitMode::Exact),
            Err(ExperimentError::Precondition(_))
        ));
    }

    #[test]
    fn monte_carlo_matches_exact_oracle() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let grid = vec![64, 256, 1024, 8192];
        let mc = fit_growth(
            &h(2),
            &model,
            &grid,
            FitMode::MonteCarlo {
                replications: 400,
                master_seed: 1234,
            },
        )
        .unwrap();
        let errs = mc.std_errors.as_ref().unwrap();
        for ((&n, &estimate), &err) in grid.iter().zip(&mc.variances).zip(errs) {
            let exact = partial_sum_variance(&h(2), &model, n).unwrap();
            assert!(
                (estimate - exact).abs() <= 4.0 * err,
                "N = {n}: {estimate} vs exact {exact} (se {err})"
            );
        }
    }

    #[test]
    fn clt_white_noise_sanity() {
        // Gaussian sums of white noise are exactly normal: the KS statistic
        // sits at its null distribution; 1.63/√R is the 99% point
        let model = CovarianceModel::white_noise();
        let report = clt_experiment(&h(1), &model, 512, 2000, 31415).unwrap();
        assert!((report.sigma2_used - 1.0).abs() < 1e-12);
        assert!(
            report.ks_statistic < 1.63 / (2000f64).sqrt(),
            "ks {}",
            report.ks_statistic
        );
        assert!((report.variance - 1.0).abs() < 0.1);
        assert!(report.mean.abs() < 4.0 / (2000f64).sqrt());
    }

    #[test]
    fn clt_refuses_lrd_input() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let err = clt_experiment(&h(1), &model, 256, 400, 1).unwrap_err();
        assert!(err.to_string().contains("(2H-2)m+1 < 0"), "{err}");
    }

    #[test]
    fn clt_enforces_replication_floor() {
        let model = CovarianceModel::white_noise();
        assert!(matches!(
            clt_experiment(&h(1), &model, 256, 100, 1),
            Err(ExperimentError::TooFewReplications { .. })
        ));
    }

    #[test]
    fn clt_srd_small_run_is_plausible() {
        // small plumbing check; the full-size run lives in the acceptance suite
        let model = CovarianceModel::fgn(0.8).unwrap();
        let report = clt_experiment(&h(3), &model, 2048, 400, 777).unwrap();
        assert!(report.ks_statistic < 0.12, "ks {}", report.ks_statistic);
        assert!(
            (report.variance - 1.0).abs() < 0.25,
            "var {}",
            report.variance
        );
        assert!(
            report.mean.abs() < 4.0 / (400f64).sqrt(),
            "mean {}",
            report.mean
        );
        assert!(
            report.mardia_skewness < 25.0,
            "mardia {}",
            report.mardia_skewness
        );
    }

    #[test]
    fn counterexample_case_b_exact() {
        let report = counterexample_run(
            PropositionCase::OddCube,
            3,
            0.8,
            &grid_2_8_to_2_16(),
            FitMode::Exact,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(report.q, "x^3");
        assert_eq!(report.composed_rank, 1);
        assert!((report.base.fitted_slope - 1.0).abs() < 0.05);
        assert!((report.composed.theoretical_slope - 1.6).abs() < 1e-12);
        assert!(
            report.composed.fitted_slope > 1.3 && report.composed.fitted_slope < 1.4,
            "composed slope {} mid-transition toward 1.6",
            report.composed.fitted_slope
        );
        assert!(report.dichotomy_held, "{}", report.summary);
    }

    #[test]
    fn counterexample_case_a_exact() {
        let report = counterexample_run(
            PropositionCase::EvenSquare,
            4,
            0.8,
            &grid_2_8_to_2_16(),
            FitMode::Exact,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(report.q, "x^2");
        assert_eq!(report.composed_rank, 2);
        assert!((report.composed.theoretical_slope - 1.2).abs() < 1e-12);
        assert!(
            report.composed.fitted_slope > report.base.fitted_slope + 0.05,
            "super-linear growth visible: base {} composed {}",
            report.base.fitted_slope,
            report.composed.fitted_slope
        );
        assert!(report.dichotomy_held, "{}", report.summary);
    }

    #[test]
    fn counterexample_preconditions() {
        let grid = grid_2_8_to_2_16();
        let t = Tolerances::default();
        let err = counterexample_run(
            PropositionCase::EvenSquare,
            4,
            0.7,
            &grid,
            FitMode::Exact,
            &t,
        )
        .unwrap_err();
        assert!(err.to_string().contains("H > 3/4"), "{err}");
        let err = counterexample_run(
            PropositionCase::EvenSquare,
            3,
            0.8,
            &grid,
            FitMode::Exact,
            &t,
        )
        .unwrap_err();
        assert!(err.to_string().contains("m ≥ 4 even"), "{err}");
        let err = counterexample_run(PropositionCase::OddCube, 4, 0.8, &grid, FitMode::Exact, &t)
            .unwrap_err();
        assert!(err.to_string().contains("m ≥ 3 odd"), "{err}");
        // case (a) upper limit: m = 4 needs H < 7/8 for the base to be SRD
        let err = counterexample_run(
            PropositionCase::EvenSquare,
            4,
            0.9,
            &grid,
            FitMode::Exact,
            &t,
        )
        .unwrap_err();
        assert!(err.to_string().contains("(2H-2)m+1 < 0"), "{err}");
    }

    #[test]
    fn scan_reproduces_the_parameter_map() {
        let hursts: Vec<f64> = (0..9).map(|i| 0.55 + 0.05 * i as f64).collect();
        let rows = dichotomy_scan(&[1, 2, 3, 4, 5, 6], &hursts, 4).unwrap();
        for row in &rows {
            if row.m == 1 {
                assert_ne!(row.classification, Classification::Srd, "m=1 is never SRD");
            }
            if row.m == 2 && row.classification == Classification::Srd {
                assert!(row.q_power.is_none(), "square transform has no Q");
            }
            if let Some(composed_rank) = row.composed_rank {
                assert!(composed_rank < row.m);
                assert!((2.0 * row.hurst - 2.0) * composed_rank as f64 + 1.0 > 0.0);
            }
        }
        // (m=5, H=0.82): SRD, cube qualifies with composed rank 1
        let row = rows
            .iter()
            .find(|r| r.m == 5 && (r.hurst - 0.80).abs() < 1e-9)
            .unwrap();
        assert_eq!(row.classification, Classification::Srd);
        let row82 = dichotomy_scan(&[5], &[0.82], 4).unwrap().remove(0);
        assert_eq!(row82.classification, Classification::Srd);
        assert_eq!(row82.q_power, Some(3));
        assert_eq!(row82.composed_rank, Some(1));
    }

    #[test]
    fn report_json_field_names_are_stable() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let report = fit_growth(&h(3), &model, &grid_2_8_to_2_16(), FitMode::Exact).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "grid",
            "variances",
            "fitted_slope",
            "slope_stderr",
            "theoretical_slope",
            "regime",
            "mode",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["regime"], "SRD");
        assert_eq!(json["mode"], "exact");
        let clt = clt_experiment(&h(3), &model, 1024, 200, 5).unwrap();
        let json = serde_json::to_value(&clt).unwrap();
        assert!(json.get("ks_statistic").is_some());
        assert!(json.get("sigma2_used").is_some());
    }

    #[test]
    fn plot_emission_shapes() {
        let model = CovarianceModel::fgn(0.8).unwrap();
        let report = fit_growth(&h(3), &model, &grid_2_8_to_2_16(), FitMode::Exact).unwrap();
        let mut points = Vec::new();
        write_points_csv(&mut points, &report).unwrap();
        let text = String::from_utf8(points).unwrap();
        assert!(text.starts_with("n,variance\n"));
        assert_eq!(text.lines().count(), 10);
        let mut plot = Vec::new();
        write_plot_data(&mut plot, &report).unwrap();
        let text = String::from_utf8(plot).unwrap();
        assert!(text.starts_with("log_n,log_variance\n"));
        let mut fit = Vec::new();
        write_fit_line(&mut fit, &report).unwrap();
        let text = String::from_utf8(fit).unwrap();
        assert!(text.starts_with("log_n,fitted_log_variance\n"));
        // the fitted line interpolates the fit: slope recomputed from the
        // first and last rows matches the report
        let rows: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        let slope = (rows[rows.len() - 1].1 - rows[0].1) / (rows[rows.len() - 1].0 - rows[0].0);
        assert!((slope - report.fitted_slope).abs() < 1e-12);
    }
}
