//! Numerical laboratory for a family of volume-preserving torus maps that
//! sit on the boundary between uniform and partial hyperbolicity.
//!
//! The objects of study are the integer automorphisms `A_k` of `T³` with
//! three distinct real eigenvalues `0 < λ_s < λ_c < 1 < λ_u` ([`spectral`]),
//! a compactly supported volume-preserving twist applied in an adapted
//! eigenbasis ball ([`perturbation`]), cone-field certificates that the
//! composed map keeps an absolutely partially hyperbolic splitting
//! ([`conefield`]), and Lyapunov-exponent machinery that measures what the
//! twist does to the central exponent ([`cocycle`]).
//!
//! Everything is deterministic: randomness flows from explicit master seeds
//! through counter-based RNG streams ([`sampling`]), and all parallel
//! reductions are keyed by index, so repeated runs — at any thread count —
//! produce identical bits.

pub mod cocycle;
pub mod conefield;
pub mod linalg;
pub mod perturbation;
pub mod sampling;
pub mod spectral;
pub mod stats;

pub use cocycle::{
    ball_inside_f_box, benettin_spectrum, check_f_disjoint, corollary_lower_bound, estimate_c,
    lyapunov_mc, return_time, sigma_estimate, Bundle, CEstimate, CocycleError, LyapunovEstimate,
    PerturbedDiffeo, ReturnTime, SigmaEstimate,
};
pub use conefield::{
    certify_perturbed, check_linear_cones, cone_boundary_directions, in_cone, ConeCertificate,
    ConeConstants, ConeError, ConeFamily, GridSpec, MarginSet,
};
pub use linalg::{Mat3, TorusPoint, Vec3};
pub use perturbation::{
    integral_of_log_hu, BumpMap, IntegralEstimate, LocalizedBump, PerturbationError,
    QuadratureSpec,
};
pub use spectral::{
    cone_constants, family_matrix, inverse_matrix, solve_spectrum, AdaptedChart, SpectralData,
    SpectralError, MIN_K,
};
pub use stats::{Accumulator, Interval};
