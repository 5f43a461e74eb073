//! Drivers above the core library: per-`k` sweep rows, the smallest-`k`
//! search for a positive central exponent, and a confidence-aware bisection
//! for the ball radius where that exponent crosses zero.
//!
//! Sweeps fail *soft* per row: one pathological `k` annotates its own row
//! and the run continues. Rows are independent jobs and are assembled in
//! ascending `k` whatever order they finish in; every number in a row is
//! reproducible by calling the underlying library operation with the inputs
//! recorded in the config.

use crate::config::ExperimentConfig;
use phlab_core::cocycle::DEFAULT_DEPTH;
use phlab_core::stats::Z_95;
use phlab_core::{
    ball_inside_f_box, certify_perturbed, cone_constants, corollary_lower_bound, estimate_c,
    integral_of_log_hu, lyapunov_mc, return_time, sigma_estimate, solve_spectrum, AdaptedChart,
    BumpMap, Bundle, CocycleError, ConeCertificate, GridSpec, Interval, LocalizedBump,
    LyapunovEstimate, PerturbedDiffeo, QuadratureSpec, SpectralData, TorusPoint,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One line of the sweep table. Every derived column is optional: a row
/// that fails partway keeps what it already computed, and `error` records
/// why the rest is missing. `sigma_c_ci_lo`/`sigma_c_ci_hi` bound the 95%
/// confidence interval of the central exponent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: i64,
    pub lambda_s: Option<f64>,
    pub lambda_c: Option<f64>,
    pub lambda_u: Option<f64>,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub c1_distance: Option<f64>,
    pub i_h: Option<f64>,
    pub n_r: Option<usize>,
    pub c_estimate: Option<f64>,
    pub lower_bound: Option<f64>,
    pub sigma_c: Option<f64>,
    pub sigma_c_ci_lo: Option<f64>,
    pub sigma_c_ci_hi: Option<f64>,
    pub sigma_u: Option<f64>,
    pub certified: Option<bool>,
    pub error: Option<String>,
}

impl SweepRow {
    /// Column names in emission order. Kept beside the struct so the CSV
    /// header and the field order cannot drift apart silently; a test pins
    /// the two together.
    pub const COLUMNS: [&'static str; 19] = [
        "k",
        "lambda_s",
        "lambda_c",
        "lambda_u",
        "theta",
        "beta",
        "gamma",
        "epsilon",
        "c1_distance",
        "i_h",
        "n_r",
        "c_estimate",
        "lower_bound",
        "sigma_c",
        "sigma_c_ci_lo",
        "sigma_c_ci_hi",
        "sigma_u",
        "certified",
        "error",
    ];
}

/// The perturbed map for one `(k, amplitude, radius)` triple, or the reason
/// it cannot be built.
fn diffeo_for(
    spectral: &SpectralData,
    amplitude: f64,
    radius: f64,
    config: &ExperimentConfig,
) -> Result<(PerturbedDiffeo, AdaptedChart), String> {
    let bump = BumpMap::new(amplitude, config.bump.margin).map_err(|e| format!("bump: {e}"))?;
    let center = config.ball.center;
    let center = TorusPoint::new(center[0], center[1], center[2]);
    let chart = AdaptedChart::new(spectral, center, radius).map_err(|e| format!("chart: {e}"))?;
    Ok((PerturbedDiffeo::with_bump(LocalizedBump::new(bump, chart)), chart))
}

/// A bundle stretch estimate reduced to what the table needs, with the
/// cross-check downgrade folded in: when the two internal estimators
/// disagree, the spectrum-average value is still reported (it is the better
/// estimator of the two) and the disagreement becomes a warning string
/// instead of a hole in the table.
struct SigmaCell {
    value: f64,
    std_error: f64,
    ci: Interval,
    warning: Option<String>,
}

fn sigma_cell(
    f: &PerturbedDiffeo,
    bundle: Bundle,
    config: &ExperimentConfig,
) -> Result<SigmaCell, String> {
    let mc = &config.monte_carlo;
    match sigma_estimate(f, bundle, mc.n_seeds, mc.n_iters, mc.warmup, mc.master_seed) {
        Ok(est) => Ok(SigmaCell {
            value: est.value,
            std_error: est.std_error,
            ci: est.ci,
            warning: None,
        }),
        Err(
            err @ CocycleError::EstimatorDisagreement {
                spectrum, spectrum_se, ..
            },
        ) => Ok(SigmaCell {
            value: spectrum,
            std_error: spectrum_se,
            ci: Interval {
                lo: spectrum - Z_95 * spectrum_se,
                hi: spectrum + Z_95 * spectrum_se,
            },
            warning: Some(err.to_string()),
        }),
        Err(other) => Err(other.to_string()),
    }
}

/// Compute one sweep row. Public because single rows are useful on their
/// own — every column is exactly what `sweep_k` would have produced.
pub fn sweep_row(k: i64, config: &ExperimentConfig) -> SweepRow {
    let mut row = SweepRow { k, ..SweepRow::default() };
    let mut notes: Vec<String> = Vec::new();

    let spectral = match solve_spectrum(k) {
        Ok(sd) => sd,
        Err(e) => {
            row.error = Some(format!("spectrum: {e}"));
            return row;
        }
    };
    row.lambda_s = Some(spectral.lambda_s);
    row.lambda_c = Some(spectral.lambda_c);
    row.lambda_u = Some(spectral.lambda_u);
    row.theta = Some(spectral.theta);

    let constants = cone_constants(&spectral);
    row.beta = Some(constants.beta);
    row.gamma = Some(constants.gamma);
    row.epsilon = Some(constants.epsilon);

    let (f, chart) = match diffeo_for(&spectral, config.bump.amplitude, config.ball.radius, config)
    {
        Ok(pair) => pair,
        Err(reason) => {
            row.error = Some(reason);
            return row;
        }
    };

    let cert = certify_perturbed(&f, &constants, GridSpec {
        n_points: config.certifier.n_points,
        n_dirs: config.certifier.n_dirs,
    });
    row.c1_distance = cert.c1_distance;
    row.certified = Some(cert.verdict);

    let bump = BumpMap::new(config.bump.amplitude, config.bump.margin).expect("validated above");
    let integral = match integral_of_log_hu(&bump, QuadratureSpec::Midpoint {
        cells_per_axis: config.quadrature.cells_per_axis,
    }) {
        Ok(est) => {
            row.i_h = Some(est.value);
            Some(est)
        }
        Err(e) => {
            notes.push(format!("quadrature: {e}"));
            None
        }
    };

    // The volume bound needs the support ball inside the displaced box;
    // everything else in the row is still meaningful without that.
    if ball_inside_f_box(&chart) {
        let rt = return_time(&chart, config.return_time.n_max, config.return_time.n_samples);
        let n_r = rt.bound_exponent();
        row.n_r = Some(n_r);
        match estimate_c(&f, config.certifier.n_points, DEFAULT_DEPTH) {
            Ok(c_est) => {
                row.c_estimate = Some(c_est.value);
                if let Some(integral) = &integral {
                    row.lower_bound = Some(corollary_lower_bound(&chart, integral, n_r, c_est.value));
                }
            }
            Err(e) => notes.push(format!("projection constant: {e}")),
        }
    } else {
        notes.push("support ball leaves the displaced box; volume bound omitted".to_string());
    }

    match sigma_cell(&f, Bundle::Central, config) {
        Ok(cell) => {
            row.sigma_c = Some(cell.value);
            row.sigma_c_ci_lo = Some(cell.ci.lo);
            row.sigma_c_ci_hi = Some(cell.ci.hi);
            if let Some(w) = cell.warning {
                notes.push(format!("central: {w}"));
            }
        }
        Err(reason) => notes.push(format!("central: {reason}")),
    }
    match sigma_cell(&f, Bundle::Unstable, config) {
        Ok(cell) => {
            row.sigma_u = Some(cell.value);
            if let Some(w) = cell.warning {
                notes.push(format!("unstable: {w}"));
            }
        }
        Err(reason) => notes.push(format!("unstable: {reason}")),
    }

    if !notes.is_empty() {
        row.error = Some(notes.join("; "));
    }
    row
}

/// One row per `k` in the configured range, ascending. Rows are independent
/// jobs; each one's arithmetic is internally ordered, so the table is
/// identical for any worker count.
pub fn sweep_k(config: &ExperimentConfig) -> Vec<SweepRow> {
    config
        .ks()
        .into_par_iter()
        .map(|k| sweep_row(k, config))
        .collect()
}

/// A parameter triple whose measured central exponent is positive with 95%
/// confidence, along with the estimate and the cone certificate at those
/// parameters.
#[derive(Debug, Clone, Serialize)]
pub struct PositiveExample {
    pub k: i64,
    pub amplitude: f64,
    pub radius: f64,
    /// Linear central exponent at this `k` — negative, which is the point.
    pub log_lambda_c: f64,
    pub estimate: LyapunovEstimate,
    pub certificate: ConeCertificate,
}

/// What happened at one rejected candidate, kept for the search trace.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub k: i64,
    pub amplitude: f64,
    pub radius: f64,
    pub sigma_c: Option<f64>,
    pub ci: Option<Interval>,
    pub note: String,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("no candidate separated its central exponent from zero; {} tried", trace.len())]
    NotFound { trace: Vec<CandidateReport> },
}

/// Search the configured grid for the smallest `k` whose perturbed central
/// exponent is positive with confidence. Candidates are visited in
/// ascending `k` (then amplitude, then radius, in config order); the first
/// hit is returned together with its certificate.
pub fn find_positive_example(config: &ExperimentConfig) -> Result<PositiveExample, SearchError> {
    let mut ks = config.search.k_candidates.clone();
    ks.sort_unstable();
    ks.dedup();

    let mc = &config.monte_carlo;
    let mut trace = Vec::new();
    for &k in &ks {
        let spectral = match solve_spectrum(k) {
            Ok(sd) => sd,
            Err(e) => {
                for &amplitude in &config.search.amplitudes {
                    for &radius in &config.search.radii {
                        trace.push(CandidateReport {
                            k,
                            amplitude,
                            radius,
                            sigma_c: None,
                            ci: None,
                            note: format!("spectrum: {e}"),
                        });
                    }
                }
                continue;
            }
        };
        let log_lambda_c = spectral.lambda_c.ln();
        for &amplitude in &config.search.amplitudes {
            for &radius in &config.search.radii {
                let (f, _chart) = match diffeo_for(&spectral, amplitude, radius, config) {
                    Ok(pair) => pair,
                    Err(reason) => {
                        trace.push(CandidateReport {
                            k,
                            amplitude,
                            radius,
                            sigma_c: None,
                            ci: None,
                            note: reason,
                        });
                        continue;
                    }
                };
                let estimate = lyapunov_mc(&f, mc.n_seeds, mc.n_iters, mc.warmup, mc.master_seed);
                let ci = estimate.cis[1];
                if ci.strictly_above(0.0) && log_lambda_c < 0.0 {
                    let constants = cone_constants(&spectral);
                    let certificate = certify_perturbed(&f, &constants, GridSpec {
                        n_points: config.certifier.n_points,
                        n_dirs: config.certifier.n_dirs,
                    });
                    return Ok(PositiveExample {
                        k,
                        amplitude,
                        radius,
                        log_lambda_c,
                        estimate,
                        certificate,
                    });
                }
                trace.push(CandidateReport {
                    k,
                    amplitude,
                    radius,
                    sigma_c: Some(estimate.exponents[1]),
                    ci: Some(ci),
                    note: format!(
                        "central CI [{:.3e}, {:.3e}] does not separate above zero",
                        ci.lo, ci.hi
                    ),
                });
            }
        }
    }
    Err(SearchError::NotFound { trace })
}

/// One radius probed by the bisection, with the measured central exponent.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusEvaluation {
    pub radius: f64,
    pub sigma_c: f64,
    pub std_error: f64,
    pub ci: Interval,
}

/// Increasing-in-radius diagnostic on five interior radii. Violations are
/// reported, never fatal: the zero-crossing argument needs continuity of
/// the exponent in the radius, not monotonicity.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub evaluations: Vec<RadiusEvaluation>,
    pub violations: Vec<String>,
}

/// Result of the zero-crossing bisection.
#[derive(Debug, Clone, Serialize)]
pub struct R0Result {
    pub k: i64,
    pub amplitude: f64,
    /// The accepted radius: the central exponent's CI here straddles zero.
    pub r0: f64,
    pub sigma_c: f64,
    pub std_error: f64,
    pub ci: Interval,
    /// Analytic exponent at radius 0 (the lower bracket endpoint).
    pub log_lambda_c: f64,
    /// Tightest radii whose exponent sign was *statistically resolved*:
    /// `bracket[0]` measured (or known) below zero, `bracket[1]` above.
    pub bracket: [f64; 2],
    /// True when the stop rule was met: CI straddling zero with half-width
    /// under the configured floor. False means the bisection budget ran out
    /// and `r0` is the best midpoint seen.
    pub converged: bool,
    pub evaluations: Vec<RadiusEvaluation>,
    pub monotonicity: MonotonicityReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum BisectionError {
    /// The endpoints do not statistically bracket a sign change.
    #[error("bracket invalid: {0}")]
    BracketInvalid(String),
    /// The bisection budget ran out before any midpoint's CI straddled
    /// zero — every probe resolved to one side, so there is no defensible
    /// crossing radius to report.
    #[error("bisection budget exhausted without a zero-straddling midpoint: {0}")]
    Unresolved(String),
    /// The triple cannot be built at all (bad `k`, amplitude, or radius).
    #[error("{0}")]
    Setup(String),
}

/// Locate a radius `r0 ∈ (0, r_hi)` at which the perturbed central exponent
/// crosses zero, by bisection on the radius with a confidence-aware stop:
/// a midpoint is accepted once its 95% CI straddles zero and is narrower
/// than the configured floor.
///
/// The zero-radius endpoint needs no simulation — the map is linear there
/// and its central exponent is exactly `log λᶜ < 0`. The `r_hi` endpoint
/// must measure strictly positive, else the bracket is rejected.
///
/// Every radius is probed with the *same* master seed ("common random
/// numbers"), so estimates at nearby radii are positively correlated and
/// their differences are far less noisy than the individual intervals —
/// that sharpens both the bisection and the monotonicity diagnostic.
pub fn find_r0(
    k: i64,
    amplitude: f64,
    r_hi: f64,
    config: &ExperimentConfig,
) -> Result<R0Result, BisectionError> {
    let spectral = solve_spectrum(k).map_err(|e| BisectionError::Setup(format!("spectrum: {e}")))?;
    let log_lambda_c = spectral.lambda_c.ln();

    let mut warnings = Vec::new();
    let mut evaluate = |radius: f64| -> Result<RadiusEvaluation, BisectionError> {
        let (f, _chart) =
            diffeo_for(&spectral, amplitude, radius, config).map_err(BisectionError::Setup)?;
        let cell = sigma_cell(&f, Bundle::Central, config).map_err(BisectionError::Setup)?;
        if let Some(w) = cell.warning {
            warnings.push(format!("r = {radius}: {w}"));
        }
        Ok(RadiusEvaluation {
            radius,
            sigma_c: cell.value,
            std_error: cell.std_error,
            ci: cell.ci,
        })
    };

    let hi_eval = evaluate(r_hi)?;
    if !hi_eval.ci.strictly_above(0.0) {
        return Err(BisectionError::BracketInvalid(format!(
            "central exponent at r = {r_hi} has CI [{:.3e}, {:.3e}], not strictly above zero",
            hi_eval.ci.lo, hi_eval.ci.hi
        )));
    }
    // λᶜ < 1 for every family member, so the lower endpoint is always
    // resolved; the guard documents the bracket's other half.
    if log_lambda_c >= 0.0 {
        return Err(BisectionError::BracketInvalid(format!(
            "linear central exponent {log_lambda_c} is not negative"
        )));
    }

    let mut evaluations = vec![hi_eval];
    let (mut lo, mut hi) = (0.0f64, r_hi);
    let mut bracket = [0.0, r_hi];
    let mut best: Option<RadiusEvaluation> = None;
    let mut converged = false;

    for _ in 0..config.r0.max_bisections {
        let mid = 0.5 * (lo + hi);
        let eval = evaluate(mid)?;
        evaluations.push(eval.clone());
        if eval.ci.strictly_above(0.0) {
            hi = mid;
            bracket[1] = mid;
        } else if eval.ci.strictly_below(0.0) {
            lo = mid;
            bracket[0] = mid;
        } else {
            // The interval straddles zero: this midpoint is a candidate
            // crossing. Stop if it is sharp enough; otherwise keep halving,
            // steering by the point estimate (the bracket is not updated on
            // such unresolved steps).
            let replace = best
                .as_ref()
                .is_none_or(|b| eval.sigma_c.abs() < b.sigma_c.abs());
            if replace {
                best = Some(eval.clone());
            }
            if eval.ci.half_width() <= config.r0.ci_floor {
                converged = true;
                best = Some(eval);
                break;
            }
            if eval.sigma_c >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    let best = best.ok_or_else(|| {
        BisectionError::Unresolved(format!(
            "{} bisections narrowed the radius to [{lo}, {hi}]",
            config.r0.max_bisections
        ))
    })?;

    // Diagnostic pass: the exponent should grow with the radius (more
    // volume under the bump means more averaged dampening of the unstable
    // stretch, all of it handed to the central line). Probed on five evenly
    // spaced interior radii; decreases beyond combined noise are recorded.
    let mut mono_evals = Vec::with_capacity(5);
    for i in 1..=5 {
        let radius = r_hi * i as f64 / 6.0;
        mono_evals.push(evaluate(radius)?);
    }
    let mut violations = Vec::new();
    for pair in mono_evals.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let slack = 3.0 * (a.std_error.hypot(b.std_error));
        if b.sigma_c < a.sigma_c - slack {
            violations.push(format!(
                "sigma_c({}) = {:.6e} exceeds sigma_c({}) = {:.6e} by more than {slack:.1e}",
                a.radius, a.sigma_c, b.radius, b.sigma_c
            ));
        }
    }

    Ok(R0Result {
        k,
        amplitude,
        r0: best.radius,
        sigma_c: best.sigma_c,
        std_error: best.std_error,
        ci: best.ci,
        log_lambda_c,
        bracket,
        converged,
        evaluations,
        monotonicity: MonotonicityReport {
            evaluations: mono_evals,
            violations,
        },
        warnings,
    })
}

/// True when the row's certificate precondition was met, for tests and
/// reporting: the measured C¹ distance sits under the certified budget.
pub fn precondition_met(row: &SweepRow) -> Option<bool> {
    match (row.c1_distance, row.epsilon) {
        (Some(c1), Some(eps)) => Some(c1 < eps),
        _ => None,
    }
}
