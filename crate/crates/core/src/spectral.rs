//! The family of torus automorphisms under study and its spectral data.
//!
//! For an integer parameter `k ≥ 5` the map is induced by the integer matrix
//!
//! ```text
//!         ( 0  0  1)
//!   A_k = ( 0  1 -1)
//!         (-1 -1  k)
//! ```
//!
//! with characteristic polynomial `p_k(x) = x³ − (k+1)x² + kx − 1` and
//! determinant 1. Sign evaluations bracket the roots: `p_k(1/2) = k/4 − 9/8 > 0`
//! and `p_k(1) = −1 < 0` trap a root in `(1/2, 1)`, while `p_k(k) = −1 < 0` and
//! `p_k(k+1) = k(k+1) − 1 > 0` trap one in `(k, k+1)`; the third root is forced
//! by the product being 1. So the spectrum is real with
//! `0 < λ_s < λ_c < 1 < λ_u`: a genuinely three-way splitting with a
//! *contracting* middle direction.
//!
//! Each eigenvalue λ has eigenvector proportional to `(1, λ/(1−λ), λ)`. The
//! matrix `P` whose columns are the three normalized eigenvectors defines the
//! adapted metric: the adapted norm of `v` is the Euclidean norm of `P⁻¹v`,
//! which makes the splitting orthonormal and every cone computation exact in
//! those coordinates. As `k → ∞` the eigenbasis converges to the canonical
//! basis, so `P → I` and the adapted metric approaches the Euclidean one.

use crate::conefield::ConeConstants;
use crate::linalg::{Mat3, TorusPoint, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest family parameter for which the root brackets above are valid.
pub const MIN_K: i64 = 5;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("family parameter k = {k} is below the minimum {min} required by the root brackets")]
    KBelowMinimum { k: i64, min: i64 },
    #[error("eigenvector formula has a pole at lambda = 1 (got lambda = {lambda})")]
    EigenvectorPole { lambda: f64 },
    #[error("chart radius {radius} exceeds the injectivity limit {limit} for this k")]
    ChartTooLarge { radius: f64, limit: f64 },
    #[error("chart radius must be positive and below 1 (got {radius})")]
    BadRadius { radius: f64 },
    #[error("point lies outside the adapted ball: |chart coords| = {distance} > 1")]
    OutsideAdaptedBall { distance: f64 },
}

/// `A_k` as a matrix of exact small integers stored in doubles.
#[must_use]
pub fn family_matrix(k: i64) -> Mat3 {
    let kf = k as f64;
    Mat3::from_rows([0.0, 0.0, 1.0], [0.0, 1.0, -1.0], [-1.0, -1.0, kf])
}

/// Closed-form inverse of `A_k`; integer entries, so `A_k · A_k⁻¹ = I` exactly.
///
/// The third row being `(1, 0, 0)` is load-bearing downstream: the third
/// coordinate of `A_k⁻¹(x, y, z)` equals `x`, which is what makes the
/// reference-region disjointness argument a pure interval comparison.
#[must_use]
pub fn inverse_matrix(k: i64) -> Mat3 {
    let kf = k as f64;
    Mat3::from_rows([kf - 1.0, -1.0, -1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 0.0])
}

/// Horner evaluation of `p_k(x) = x³ − (k+1)x² + kx − 1`.
#[must_use]
pub fn char_poly_eval(k: i64, x: f64) -> f64 {
    let kf = k as f64;
    ((x - (kf + 1.0)) * x + kf) * x - 1.0
}

/// Derivative `p_k'(x) = 3x² − 2(k+1)x + k`.
#[must_use]
fn char_poly_deriv(k: i64, x: f64) -> f64 {
    let kf = k as f64;
    (3.0 * x - 2.0 * (kf + 1.0)) * x + kf
}

/// Eigenvalues, eigenvectors, and the adapted basis of one family member.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralData {
    pub k: i64,
    pub lambda_s: f64,
    pub lambda_c: f64,
    pub lambda_u: f64,
    /// Unit eigenvectors (Euclidean norm 1).
    pub e_s: Vec3,
    pub e_c: Vec3,
    pub e_u: Vec3,
    /// Columns are `(e_s, e_c, e_u)`; maps adapted coordinates to ambient ones.
    pub basis: Mat3,
    /// Inverse of `basis`; maps ambient vectors to adapted coordinates.
    pub basis_inv: Mat3,
    /// Spectral gap ratio `min(λ_c/λ_s, λ_u/λ_c)`.
    pub theta: f64,
}

impl SpectralData {
    /// Adapted norm of an ambient vector: Euclidean norm of `P⁻¹v`.
    #[must_use]
    pub fn adapted_norm(&self, v: Vec3) -> f64 {
        (self.basis_inv * v).norm()
    }

    /// Ambient vector to adapted (eigenbasis) coordinates.
    #[must_use]
    pub fn to_adapted(&self, v: Vec3) -> Vec3 {
        self.basis_inv * v
    }

    /// Adapted coordinates back to the ambient basis.
    #[must_use]
    pub fn from_adapted(&self, c: Vec3) -> Vec3 {
        self.basis * c
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`; assumes `f(lo)` and
/// `f(hi)` have opposite signs. Runs to f64 resolution.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    debug_assert!(f_lo * f(hi) <= 0.0, "bisect needs a sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer representable
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A few Newton steps to polish a bisection root of `p_k`.
fn newton_polish(k: i64, mut x: f64) -> f64 {
    for _ in 0..3 {
        let d = char_poly_deriv(k, x);
        if d == 0.0 {
            break;
        }
        x -= char_poly_eval(k, x) / d;
    }
    x
}

/// Solve the spectrum of `A_k`.
///
/// The two bracketed roots come from bisection (brackets `(1/2, 1)` and
/// `(k, k+1)` are guaranteed by the sign evaluations in the module docs)
/// followed by a Newton polish; the stable root comes from the determinant
/// identity `λ_s = 1/(λ_c λ_u)`, also polished on `p_k`. This avoids the
/// cancellation-prone closed cubic formula entirely.
pub fn solve_spectrum(k: i64) -> Result<SpectralData, SpectralError> {
    if k < MIN_K {
        return Err(SpectralError::KBelowMinimum { k, min: MIN_K });
    }
    let kf = k as f64;
    let p = |x: f64| char_poly_eval(k, x);
    let lambda_c = newton_polish(k, bisect(p, 0.5, 1.0));
    let lambda_u = newton_polish(k, bisect(p, kf, kf + 1.0));
    let lambda_s = newton_polish(k, 1.0 / (lambda_c * lambda_u));

    let e_s = eigenvector(lambda_s)?;
    let e_c = eigenvector(lambda_c)?;
    let e_u = eigenvector(lambda_u)?;
    let basis = Mat3::from_columns(e_s, e_c, e_u);
    let basis_inv = basis
        .inverse()
        .expect("eigenbasis of distinct real eigenvalues is invertible");

    let residual = (basis * basis_inv * Vec3::new(1.0, 1.0, 1.0) - Vec3::new(1.0, 1.0, 1.0)).max_abs();
    debug_assert!(residual < 1e-12, "basis inverse residual {residual}");

    Ok(SpectralData {
        k,
        lambda_s,
        lambda_c,
        lambda_u,
        e_s,
        e_c,
        e_u,
        basis,
        basis_inv,
        theta: (lambda_c / lambda_s).min(lambda_u / lambda_c),
    })
}

/// Unit eigenvector of `A_k` for eigenvalue `lambda`, via the closed form
/// `(1, λ/(1−λ), λ)`. The formula is k-independent: any λ with `p_k(λ) = 0`
/// yields an eigenvector of that `A_k`.
pub fn eigenvector(lambda: f64) -> Result<Vec3, SpectralError> {
    if (1.0 - lambda).abs() < 1e-12 {
        return Err(SpectralError::EigenvectorPole { lambda });
    }
    let v = Vec3::new(1.0, lambda / (1.0 - lambda), lambda);
    Ok(v.normalized().expect("first component is 1"))
}

/// Constants for the invariant-cone argument, derived from one spectrum.
///
/// The cone aperture is pinned by the rule `(1+β)² = √Θ`, the geometric
/// midpoint (in log scale) of the admissible range `1 < (1+β)² < Θ` — a
/// scale-free, reproducible choice. The four rate constants are placed at the
/// 1/3 and 2/3 log-scale points of their admissible intervals
/// `((1+β)λ_s, λ_c/(1+β))` and `((1+β)λ_c, λ_u/(1+β))`, keeping symmetric
/// slack on each side. Both intervals are nonempty for every Θ > 1 because
/// `(1+β)² = √Θ ≤ √(λ_c/λ_s)` and likewise for the upper pair.
pub fn cone_constants(spectral: &SpectralData) -> ConeConstants {
    let theta = spectral.theta;
    assert!(theta > 1.0, "spectral gap ratio must exceed 1, got {theta}");
    let beta = theta.powf(0.25) - 1.0;
    let one_plus_beta = 1.0 + beta;

    let log_third_points = |lo: f64, hi: f64| -> (f64, f64) {
        debug_assert!(lo < hi, "empty placement interval [{lo}, {hi}]");
        let (llo, lhi) = (lo.ln(), hi.ln());
        let span = lhi - llo;
        ((llo + span / 3.0).exp(), (llo + 2.0 * span / 3.0).exp())
    };
    let (mu1, lambda2) = log_third_points(
        one_plus_beta * spectral.lambda_s,
        spectral.lambda_c / one_plus_beta,
    );
    let (mu2, lambda3) = log_third_points(
        one_plus_beta * spectral.lambda_c,
        spectral.lambda_u / one_plus_beta,
    );
    assert!(
        mu1 < 1.0 && 1.0 < lambda3,
        "rate constants must straddle 1: mu1 = {mu1}, lambda3 = {lambda3}"
    );

    let mut constants = ConeConstants {
        k: spectral.k,
        theta,
        beta,
        mu1,
        lambda2,
        mu2,
        lambda3,
        // Exact eigenvalue bounds for the two outer bundles of the linear
        // map; informational, not used by the certifier.
        lambda1: spectral.lambda_s,
        mu3: spectral.lambda_u,
        gamma: f64::NAN,
        epsilon: f64::NAN,
    };
    constants.gamma = crate::conefield::gamma_of(&constants);
    constants.epsilon = crate::conefield::epsilon_bound(&constants);
    constants
}

/// Isometric chart of an adapted-metric ball on the torus.
///
/// Maps the adapted ball of radius `r` around `center` to the unit ball of
/// R³: first the eigenbasis coordinates of the wrapped difference from the
/// center (an isometry between the adapted metric and the Euclidean one),
/// then division by `r`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdaptedChart {
    pub spectral: SpectralData,
    pub center: TorusPoint,
    pub radius: f64,
}

impl AdaptedChart {
    /// Validates that the adapted ball embeds injectively in the torus:
    /// distinct lifts of a torus point differ by a nonzero integer vector
    /// `m`, and the ball self-overlaps iff `‖P⁻¹m‖ ≤ 2r` for some such `m`.
    /// It suffices to check the 26 unit-box neighbors together with the
    /// operator-norm bound `‖P⁻¹m‖ ≥ ‖m‖/‖P‖ ≥ 2/‖P‖` for `‖m‖ ≥ 2`.
    pub fn new(
        spectral: &SpectralData,
        center: TorusPoint,
        radius: f64,
    ) -> Result<Self, SpectralError> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(SpectralError::BadRadius { radius });
        }
        let mut min_lattice = f64::INFINITY;
        for mx in -1i32..=1 {
            for my in -1i32..=1 {
                for mz in -1i32..=1 {
                    if (mx, my, mz) == (0, 0, 0) {
                        continue;
                    }
                    let m = Vec3::new(mx as f64, my as f64, mz as f64);
                    min_lattice = min_lattice.min((spectral.basis_inv * m).norm());
                }
            }
        }
        let limit = 0.5 * min_lattice.min(2.0 / spectral.basis.op_norm());
        if radius >= limit {
            return Err(SpectralError::ChartTooLarge { radius, limit });
        }
        Ok(AdaptedChart {
            spectral: *spectral,
            center,
            radius,
        })
    }

    /// Chart coordinates of `w` relative to the center, **without** the
    /// ball-membership requirement. `‖result‖ ≤ 1` iff `w` lies in the
    /// adapted ball (any in-ball lift is found: the wrapped difference is the
    /// unique per-coordinate representative in `[-1/2, 1/2)`, and in-ball
    /// differences stay strictly inside that box by the injectivity bound).
    #[must_use]
    pub fn relative_coords(&self, w: &TorusPoint) -> Vec3 {
        (self.spectral.basis_inv * w.wrapped_diff(&self.center)) * (1.0 / self.radius)
    }

    /// Whether `w` lies in the closed adapted ball.
    #[must_use]
    pub fn contains(&self, w: &TorusPoint) -> bool {
        self.relative_coords(w).norm() <= 1.0
    }

    /// Chart coordinates of an in-ball point; rejects points outside.
    pub fn forward(&self, w: &TorusPoint) -> Result<Vec3, SpectralError> {
        let x = self.relative_coords(w);
        let distance = x.norm();
        if distance > 1.0 + 1e-12 {
            return Err(SpectralError::OutsideAdaptedBall { distance });
        }
        Ok(x)
    }

    /// Inverse chart: unit-ball coordinates back to the torus.
    #[must_use]
    pub fn backward(&self, x: Vec3) -> TorusPoint {
        let delta = self.spectral.basis * (x * self.radius);
        TorusPoint::from_lift(self.center.lift() + delta)
    }

    /// Euclidean volume of the adapted ball: `|det P| · (4/3)π r³`
    /// (the ball is the image of the Euclidean `r`-ball under `P`).
    #[must_use]
    pub fn ball_volume(&self) -> f64 {
        self.spectral.basis.det().abs() * std::f64::consts::PI * 4.0 / 3.0 * self.radius.powi(3)
    }

    /// Jacobian of the chart map `x ↦ p + P(r·x)`: the constant `|det P|·r³`
    /// converting integrals in chart coordinates into torus integrals,
    /// `∫_{B_r} g(chart⁻¹ w) dw = volume_scale · ∫_{B₁} g(x) dx`.
    #[must_use]
    pub fn volume_scale(&self) -> f64 {
        self.spectral.basis.det().abs() * self.radius.powi(3)
    }

    /// Half-width of the ball's bounding box along ambient coordinate `i`:
    /// the extent of `{P·y : ‖y‖ ≤ r}` along `e_i` is `r‖row_i(P)‖`.
    #[must_use]
    pub fn euclidean_extent(&self, i: usize) -> f64 {
        self.radius * self.spectral.basis.row(i).norm()
    }
}
