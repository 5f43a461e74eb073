//! Orbit-level machinery for the perturbed torus maps: iteration and
//! derivative cocycles, Benettin QR estimation of the Lyapunov spectrum,
//! direction-resolved stretch functionals (σᶜ, σᵘ), ball return times, the
//! projection constant `C`, and the closed-form exponent lower bound.
//!
//! # The map and its cocycle
//!
//! [`PerturbedDiffeo`] is `f = A_k ∘ h`, the hyperbolic toral automorphism
//! composed with a volume-preserving bump supported in a small adapted ball
//! ([`LocalizedBump`]). All derivative work happens in **adapted
//! coordinates**, where the linear part is exactly `Λ = diag(λ_s, λ_c, λ_u)`
//! and the bump derivative `Dh` differs from the identity only inside the
//! ball. The conjugation by the constant eigenbasis changes no Lyapunov
//! exponent and makes the unperturbed cocycle diagonal, which turns the
//! linear case into an exact oracle for every estimator in this module.
//!
//! A structural fact used throughout: the first adapted coordinate is left
//! untouched by the bump (`Dh` has first row `(1,0,0)`), so the adapted
//! `(c,u)`-plane `{v₀ = 0}` is *exactly* invariant under the cocycle and its
//! inverse — in floating point too, since the preserved component is a
//! product of exact zeros. The unstable and central directions of the
//! perturbed map therefore live in that plane and can be tracked without
//! leaving it.
//!
//! # Direction reconstruction without re-simulation
//!
//! Forward distances explode like `λ_u^m` (≈ 10³⁵ at `k = 5`, `m = 50`), so
//! `f^m(f^{−m}(w))` never reproduces `w` in floating point. The trackers
//! here never do that: they record the orbit segment once and transport a
//! single direction along the *stored* points, renormalizing each step.
//! Push-forward along a backward segment converges to the unstable line;
//! pull-back along a forward segment converges to the central line (the
//! backward-dominant direction inside the invariant plane). Both converge
//! at rate `(λ_c/λ_u)^depth`, far below double precision at the default
//! depth.

use crate::linalg::{gram_schmidt, Mat3, TorusPoint, Vec3};
use crate::perturbation::{IntegralEstimate, LocalizedBump};
use crate::sampling;
use crate::spectral::{family_matrix, inverse_matrix, AdaptedChart, SpectralData};
use crate::stats::{Accumulator, Interval};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Transport depth for [`unstable_direction`] / [`central_direction`];
/// direction error ~ `(λ_c/λ_u)^depth` is far below f64 resolution here.
pub const DEFAULT_DEPTH: usize = 50;

/// Point-cloud size for the direct-jacobian stretch integrals.
pub const DEFAULT_CLOUD: usize = 2048;

/// Iterations discarded before Benettin accumulation starts, so the
/// orthonormal frame can lock onto the invariant splitting. Without this
/// the O(1/T) alignment transient dominates the tiny standard errors of
/// near-linear runs.
pub const DEFAULT_WARMUP: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum CocycleError {
    /// The two σ estimators differ by more than three combined standard
    /// errors (plus a 1e−9 absolute floor that keeps exact-oracle runs with
    /// vanishing variance from tripping on representation noise).
    #[error(
        "stretch estimators disagree on the {bundle:?} bundle: \
         spectrum-average {spectrum:.9} ± {spectrum_se:.3e} \
         vs direct-jacobian {direct:.9} ± {direct_se:.3e}"
    )]
    EstimatorDisagreement {
        bundle: Bundle,
        spectrum: f64,
        spectrum_se: f64,
        direct: f64,
        direct_se: f64,
    },
    /// The bump's unstable-diagonal component was not positive at a sampled
    /// point; the logarithmic functionals are undefined there. Unreachable
    /// for amplitudes below the construction ceiling — kept as
    /// defense-in-depth.
    #[error("non-positive unstable derivative component {h_u} at chart point {at:?}")]
    NonPositiveHu { at: [f64; 3], h_u: f64 },
}

/// Which invariant line a stretch functional integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bundle {
    Central,
    Unstable,
}

/// The composed map `f = A_k ∘ h` (or plain `A_k` when unperturbed),
/// together with its derivative cocycle. Immutable and freely shareable
/// across threads.
#[derive(Debug, Clone)]
pub struct PerturbedDiffeo {
    spectral: SpectralData,
    matrix: Mat3,
    matrix_inv: Mat3,
    lambda: Mat3,
    localized: Option<LocalizedBump>,
}

impl PerturbedDiffeo {
    #[must_use]
    pub fn linear(spectral: SpectralData) -> Self {
        PerturbedDiffeo {
            spectral,
            matrix: family_matrix(spectral.k),
            matrix_inv: inverse_matrix(spectral.k),
            lambda: Mat3::diagonal(spectral.lambda_s, spectral.lambda_c, spectral.lambda_u),
            localized: None,
        }
    }

    /// The perturbed map; the base automorphism is the one the bump's chart
    /// was built from, so the two can never disagree.
    #[must_use]
    pub fn with_bump(localized: LocalizedBump) -> Self {
        let mut f = PerturbedDiffeo::linear(localized.chart.spectral);
        f.localized = Some(localized);
        f
    }

    #[must_use]
    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    #[must_use]
    pub fn localized(&self) -> Option<&LocalizedBump> {
        self.localized.as_ref()
    }

    /// One step `w ↦ A_k(h(w))` on the torus. The integer matrix acts on
    /// the lift and commutes with the mod-1 reduction.
    #[must_use]
    pub fn step(&self, w: &TorusPoint) -> TorusPoint {
        let moved = match &self.localized {
            Some(lb) => lb.apply(w),
            None => *w,
        };
        TorusPoint::from_lift(self.matrix * moved.lift())
    }

    /// Closed-form inverse `w ↦ h⁻¹(A_k⁻¹(w))`.
    #[must_use]
    pub fn inverse_step(&self, w: &TorusPoint) -> TorusPoint {
        let back = TorusPoint::from_lift(self.matrix_inv * w.lift());
        match &self.localized {
            Some(lb) => lb.apply_inverse(&back),
            None => back,
        }
    }

    /// Derivative at `w` in ambient coordinates: `A_k · Dh(w)`.
    #[must_use]
    pub fn dstep(&self, w: &TorusPoint) -> Mat3 {
        match &self.localized {
            Some(lb) => self.matrix * lb.jacobian(w),
            None => self.matrix,
        }
    }

    /// Derivative at `w` in adapted coordinates: `Λ · Dh_chart(w)`.
    /// Exactly `Λ` (diagonal) wherever the bump is inactive.
    #[must_use]
    pub fn dstep_adapted(&self, w: &TorusPoint) -> Mat3 {
        match &self.localized {
            Some(lb) => self.lambda * lb.chart_jacobian(w),
            None => self.lambda,
        }
    }
}

/// Benettin QR estimate of the three Lyapunov exponents along one orbit,
/// returned in descending order.
///
/// An orthonormal frame drawn from `frame_seed` is pushed through the
/// adapted cocycle with modified-Gram-Schmidt re-orthonormalization every
/// step; the exponents are the time averages of the log diagonal factors
/// over the `n_iters` steps following `warmup` discarded alignment steps.
/// Per-step renormalization keeps every magnitude O(λ_u), so the
/// accumulation cannot overflow.
#[must_use]
pub fn benettin_spectrum(
    f: &PerturbedDiffeo,
    w0: &TorusPoint,
    n_iters: usize,
    warmup: usize,
    frame_seed: u64,
) -> [f64; 3] {
    assert!(n_iters >= 1, "need at least one accumulation step");
    let mut rng = sampling::stream(frame_seed, 0);
    let mut q = loop {
        let mut entries = [[0.0; 3]; 3];
        for row in &mut entries {
            for e in row.iter_mut() {
                *e = 2.0 * rng.gen::<f64>() - 1.0;
            }
        }
        if let Some((q, _)) = gram_schmidt(&Mat3(entries)) {
            break q;
        }
    };

    let mut w = *w0;
    for _ in 0..warmup {
        let (next, _) = gram_schmidt(&(f.dstep_adapted(&w) * q))
            .expect("invertible cocycle cannot collapse an orthonormal frame");
        q = next;
        w = f.step(&w);
    }

    let mut sums = [0.0f64; 3];
    for _ in 0..n_iters {
        let (next, r) = gram_schmidt(&(f.dstep_adapted(&w) * q))
            .expect("invertible cocycle cannot collapse an orthonormal frame");
        for (s, d) in sums.iter_mut().zip(r) {
            *s += d.ln();
        }
        q = next;
        w = f.step(&w);
    }

    let mut exponents = sums.map(|s| s / n_iters as f64);
    exponents.sort_by(|a, b| b.partial_cmp(a).expect("finite exponents"));
    exponents
}

/// Monte-Carlo aggregate of [`benettin_spectrum`] over independent uniform
/// starting points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Mean exponents across seeds, descending.
    pub exponents: [f64; 3],
    pub std_errors: [f64; 3],
    pub cis: [Interval; 3],
    /// One descending triple per seed, indexed by seed.
    pub per_seed: Vec<[f64; 3]>,
    pub n_seeds: usize,
    pub n_iters: usize,
    pub warmup: usize,
    pub master_seed: u64,
}

/// Estimate the Lyapunov spectrum from `n_seeds` independent orbits with
/// uniform random starting points. Seed `i` draws its starting point and
/// frame from RNG stream `i` of `master_seed`, and aggregation is keyed by
/// seed index, so the result is identical for any thread count.
#[must_use]
pub fn lyapunov_mc(
    f: &PerturbedDiffeo,
    n_seeds: usize,
    n_iters: usize,
    warmup: usize,
    master_seed: u64,
) -> LyapunovEstimate {
    assert!(n_seeds >= 2, "need at least two seeds for a standard error");
    let per_seed: Vec<[f64; 3]> = (0..n_seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = sampling::stream(master_seed, i as u64);
            let p = sampling::uniform_torus_point(&mut rng);
            let w0 = TorusPoint::new(p[0], p[1], p[2]);
            let frame_seed = rng.gen::<u64>();
            benettin_spectrum(f, &w0, n_iters, warmup, frame_seed)
        })
        .collect();

    let mut exponents = [0.0; 3];
    let mut std_errors = [0.0; 3];
    let mut cis = [Interval { lo: 0.0, hi: 0.0 }; 3];
    for c in 0..3 {
        let acc = Accumulator::from_slice(&per_seed.iter().map(|t| t[c]).collect::<Vec<_>>());
        exponents[c] = acc.mean();
        std_errors[c] = acc.std_error();
        cis[c] = acc.ci95();
    }
    LyapunovEstimate {
        exponents,
        std_errors,
        cis,
        per_seed,
        n_seeds,
        n_iters,
        warmup,
        master_seed,
    }
}

/// Unit vector (adapted coordinates) spanning the unstable line at `w`:
/// the linear map's unstable axis transported forward along the stored
/// backward orbit segment of length `depth`, renormalized each step.
#[must_use]
pub fn unstable_direction(f: &PerturbedDiffeo, w: &TorusPoint, depth: usize) -> Vec3 {
    let mut segment = Vec::with_capacity(depth);
    let mut p = *w;
    for _ in 0..depth {
        p = f.inverse_step(&p);
        segment.push(p);
    }
    let mut v = Vec3::axis(2);
    for q in segment.iter().rev() {
        v = (f.dstep_adapted(q) * v)
            .normalized()
            .expect("invertible cocycle cannot annihilate a direction");
    }
    v
}

/// Unit vector (adapted coordinates) spanning the central line at `w`: the
/// linear map's central axis pulled back along the stored forward orbit
/// segment, renormalized each step. Pull-back suppresses the unstable
/// component by `(λ_c/λ_u)^depth`, leaving the backward-dominant direction
/// of the invariant `(c,u)`-plane — the central line.
#[must_use]
pub fn central_direction(f: &PerturbedDiffeo, w: &TorusPoint, depth: usize) -> Vec3 {
    let mut segment = Vec::with_capacity(depth);
    let mut p = *w;
    for _ in 0..depth {
        segment.push(p);
        p = f.step(&p);
    }
    let mut v = Vec3::axis(1);
    for q in segment.iter().rev() {
        let m = f.dstep_adapted(q);
        v = (m.inverse().expect("volume-preserving derivative is invertible") * v)
            .normalized()
            .expect("invertible cocycle cannot annihilate a direction");
    }
    v
}

/// Which estimator produced a [`SigmaEstimate`]'s primary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaMethod {
    /// Mean of the matching Benettin exponent across seeds.
    SpectrumAverage,
    /// Space average of the log stretch along the reconstructed bundle.
    DirectJacobian,
}

/// Integral of the log derivative stretch along one invariant bundle,
/// estimated two independent ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub bundle: Bundle,
    /// Provenance of `value` (the primary estimator).
    pub method: SigmaMethod,
    pub value: f64,
    pub std_error: f64,
    pub ci: Interval,
    /// The other estimator's value, kept for reporting.
    pub cross_check: f64,
    pub cross_check_std_error: f64,
    pub n_seeds: usize,
    pub n_iters: usize,
    pub n_cloud: usize,
    pub depth: usize,
}

/// Estimate `σ = ∫ log ‖Df|_bundle‖ dm` for the central or unstable line.
///
/// Two estimators are computed and cross-checked:
///
/// * **Spectrum average** (primary): the matching component of
///   [`lyapunov_mc`] — for volume measure the space average of the almost-
///   everywhere exponent equals the integral of the log stretch along the
///   invariant bundle.
/// * **Direct jacobian**: reconstruct the bundle direction at each point of
///   a uniform cloud ([`unstable_direction`] / [`central_direction`] at
///   [`DEFAULT_DEPTH`]) and average the one-step log stretch. This is an
///   unbiased plain Monte-Carlo integral of the very functional σ denotes.
///
/// Both are finite-sample estimates, so instead of claiming exactness the
/// run fails loudly with [`CocycleError::EstimatorDisagreement`] when they
/// differ by more than three combined standard errors (plus a 1e−9 floor
/// for the zero-variance linear case).
pub fn sigma_estimate(
    f: &PerturbedDiffeo,
    bundle: Bundle,
    n_seeds: usize,
    n_iters: usize,
    warmup: usize,
    master_seed: u64,
) -> Result<SigmaEstimate, CocycleError> {
    let spectrum = lyapunov_mc(f, n_seeds, n_iters, warmup, master_seed);
    let component = match bundle {
        Bundle::Unstable => 0,
        Bundle::Central => 1,
    };
    let per_seed: Vec<f64> = spectrum.per_seed.iter().map(|t| t[component]).collect();
    let acc = Accumulator::from_slice(&per_seed);

    // Cloud points come from stream `n_seeds`, disjoint from the per-seed
    // streams 0..n_seeds used above.
    let mut rng = sampling::stream(master_seed, n_seeds as u64);
    let cloud: Vec<TorusPoint> = (0..DEFAULT_CLOUD)
        .map(|_| {
            let p = sampling::uniform_torus_point(&mut rng);
            TorusPoint::new(p[0], p[1], p[2])
        })
        .collect();
    let logs: Vec<f64> = cloud
        .par_iter()
        .map(|w| {
            let dir = match bundle {
                Bundle::Unstable => unstable_direction(f, w, DEFAULT_DEPTH),
                Bundle::Central => central_direction(f, w, DEFAULT_DEPTH),
            };
            (f.dstep_adapted(w) * dir).norm().ln()
        })
        .collect();
    let direct_acc = Accumulator::from_slice(&logs);

    let (value, std_error) = (acc.mean(), acc.std_error());
    let (direct, direct_se) = (direct_acc.mean(), direct_acc.std_error());
    let combined = (std_error * std_error + direct_se * direct_se).sqrt();
    if (value - direct).abs() > 3.0 * combined + 1e-9 {
        return Err(CocycleError::EstimatorDisagreement {
            bundle,
            spectrum: value,
            spectrum_se: std_error,
            direct,
            direct_se,
        });
    }

    Ok(SigmaEstimate {
        bundle,
        method: SigmaMethod::SpectrumAverage,
        value,
        std_error,
        ci: acc.ci95(),
        cross_check: direct,
        cross_check_std_error: direct_se,
        n_seeds,
        n_iters,
        n_cloud: DEFAULT_CLOUD,
        depth: DEFAULT_DEPTH,
    })
}

/// Result of a sampled ball return-time search.
///
/// Sampling can only *miss* intersections, so `Found.n` may exceed the true
/// return time, and `Beyond` means no intersection was detected up to
/// `n_max`. Callers feeding [`corollary_lower_bound`] should note the
/// monotonicity: since `α < 1`, a *smaller* exponent gives the weaker
/// (safer) bound, so exhausting at `n_max` and plugging `n_max` in is the
/// conservative choice, while a sampling overestimate can only inflate the
/// already-tiny correction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReturnTime {
    Found { n: usize, n_samples: usize },
    Beyond { n_max: usize, n_samples: usize },
}

impl ReturnTime {
    /// The exponent to plug into the lower bound: the detected return time,
    /// or `n_max` (an underestimate, hence conservative) on exhaustion.
    #[must_use]
    pub fn bound_exponent(&self) -> usize {
        match *self {
            ReturnTime::Found { n, .. } => n,
            ReturnTime::Beyond { n_max, .. } => n_max,
        }
    }
}

/// Least `n ≤ n_max` at which the *linear* image `A_k^n(B)` of the chart
/// ball is seen to meet the ball again, tested on the ball center plus a
/// deterministic low-discrepancy sample of `n_samples` ball points.
#[must_use]
pub fn return_time(chart: &AdaptedChart, n_max: usize, n_samples: usize) -> ReturnTime {
    assert!(n_max >= 1, "need at least one step");
    assert!(n_samples >= 1, "need at least one sample");
    let a = family_matrix(chart.spectral.k);
    let mut points: Vec<TorusPoint> = Vec::with_capacity(n_samples + 1);
    points.push(chart.center);
    points.extend(
        sampling::unit_ball_points(n_samples)
            .into_iter()
            .map(|x| chart.backward(x)),
    );
    for n in 1..=n_max {
        for p in &mut points {
            *p = TorusPoint::from_lift(a * p.lift());
        }
        if points.iter().any(|p| chart.contains(p)) {
            return ReturnTime::Found { n, n_samples };
        }
    }
    ReturnTime::Beyond { n_max, n_samples }
}

/// The box `W = (0, 2/3) × (0, 1) × (5/6, 1) ⊂ T³` that the linear map
/// moves entirely off itself — the natural home for the perturbation ball.
pub const F_BOX: [[f64; 2]; 3] = [[0.0, 2.0 / 3.0], [0.0, 1.0], [5.0 / 6.0, 1.0]];

/// Whether `A_k(W) ∩ W = ∅` for the box [`F_BOX`], decided by exact integer
/// reasoning rather than sampling: the third row of the closed-form integer
/// inverse is `(1, 0, 0)`, so the third coordinate of `A_k⁻¹(x, y, z)` is
/// `x`; a point of `A_k(W) ∩ W` would need its first preimage coordinate in
/// `(0, 2/3)` *and* its own third coordinate in `(5/6, 1)` — impossible
/// because `2/3 ≤ 5/6` (cross-multiplied: `2·6 ≤ 3·5`). Holds for every
/// `k ≥ 1`.
#[must_use]
pub fn check_f_disjoint(k: i64) -> bool {
    assert!(k >= 1, "the family needs k >= 1, got {k}");
    let inv = inverse_matrix(k);
    let projection_row = inv.0[2] == [1.0, 0.0, 0.0];
    let intervals_disjoint = 2 * 6 <= 3 * 5;
    projection_row && intervals_disjoint
}

/// Whether the chart's ball lies strictly inside [`F_BOX`] coordinate-wise,
/// using the per-axis Euclidean extent of the adapted ball. Sufficient, not
/// tight — exactly what a conservative placement check should be.
#[must_use]
pub fn ball_inside_f_box(chart: &AdaptedChart) -> bool {
    let c = chart.center.coords();
    (0..3).all(|i| {
        let ext = chart.euclidean_extent(i);
        let [lo, hi] = F_BOX[i];
        c[i] - ext > lo && c[i] + ext < hi
    })
}

/// The sampled projection constant, with its two factors kept for
/// reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CEstimate {
    /// `ratio_max · projection_max`.
    pub value: f64,
    /// `max |h_c/h_u|` over the sampled ball.
    pub ratio_max: f64,
    /// `max ‖Proj_u(e_c)‖` over the sampled ball, where the projection onto
    /// the unstable line is taken parallel to the central line.
    pub projection_max: f64,
    pub n_points: usize,
    pub depth: usize,
}

/// Sample the constant `C = max |h_c/h_u| · max ‖Proj_u(e_c)‖` over the
/// perturbation ball.
///
/// The first factor reads the bump derivative's components directly. For
/// the second, the oblique projection of the central axis `e_c` onto the
/// perturbed unstable line `E^u(x)`, parallel to the perturbed central line
/// `E^c(x)`, is solved in the invariant `(c,u)`-plane: writing
/// `e_c = s·u_dir + t·c_dir` in plane coordinates gives
/// `|s| = |c₂| / |u₁c₂ − u₂c₁|`, and `‖Proj_u(e_c)‖ = |s|` since `u_dir` is
/// a unit vector. Unperturbed, both bundles coincide with the axes and the
/// constant is exactly zero.
pub fn estimate_c(
    f: &PerturbedDiffeo,
    n_points: usize,
    depth: usize,
) -> Result<CEstimate, CocycleError> {
    assert!(n_points >= 1, "need at least one sample point");
    let Some(lb) = f.localized() else {
        return Ok(CEstimate {
            value: 0.0,
            ratio_max: 0.0,
            projection_max: 0.0,
            n_points,
            depth,
        });
    };

    let mut xs = Vec::with_capacity(n_points);
    xs.push(Vec3::ZERO);
    xs.extend(sampling::unit_ball_points(n_points.saturating_sub(1)));

    let mut ratio_max = 0.0f64;
    for &x in &xs {
        let (h_u, h_c) = lb.bump.h_components(x);
        if h_u <= 0.0 {
            return Err(CocycleError::NonPositiveHu { at: x.0, h_u });
        }
        ratio_max = ratio_max.max((h_c / h_u).abs());
    }

    let projections: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            let w = lb.chart.backward(x);
            let u = unstable_direction(f, &w, depth);
            let c = central_direction(f, &w, depth);
            let denom = u[1] * c[2] - u[2] * c[1];
            (c[2] / denom).abs()
        })
        .collect();
    let projection_max = projections.into_iter().fold(0.0f64, f64::max);

    Ok(CEstimate {
        value: ratio_max * projection_max,
        ratio_max,
        projection_max,
        n_points,
        depth,
    })
}

/// The closed-form exponent lower bound for the central gain,
/// `|det P|·r³ · (−I(h) − C · α^{n_r})` with `α = λ_c/λ_u`.
///
/// `I(h)` is the bump's log-stretch integral over the *unit* chart ball
/// (passed in as the estimate it came from, so its quadrature provenance
/// travels with it); `|det P|·r³` is the chart's change-of-variables factor
/// ([`AdaptedChart::volume_scale`]), which converts that unit-ball integral
/// into the torus integral the Birkhoff average actually sees. Pairing the
/// unit-ball integral with the full Euclidean ball volume instead would
/// count the unit ball's own `4π/3` twice and overstate the bound by that
/// factor — measured central gains sit comfortably above this bound and
/// well below the inflated one.
///
/// Since `α < 1` the expression is increasing in `n_r`: a smaller return
/// time gives the weaker bound, so underestimating `n_r` is the safe
/// direction (see [`ReturnTime::bound_exponent`]).
#[must_use]
pub fn corollary_lower_bound(
    chart: &AdaptedChart,
    bump_integral: &IntegralEstimate,
    n_r: usize,
    c: f64,
) -> f64 {
    assert!(n_r >= 1, "return times start at 1");
    let alpha = chart.spectral.lambda_c / chart.spectral.lambda_u;
    chart.volume_scale() * (-bump_integral.value - c * alpha.powi(n_r as i32))
}
