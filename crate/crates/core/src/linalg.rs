//! Minimal fixed-size linear algebra: 3-vectors, row-major 3×3 matrices,
//! torus points with explicit lifts.
//!
//! Everything here is `f64` and allocation-free. The 3×3 inverse is computed
//! by adjugate/determinant, which is exact enough for the well-conditioned
//! matrices this crate works with (integer matrices of determinant one and
//! near-orthonormal eigenbases).

use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Column vector in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    #[must_use]
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Standard basis vector, `i` in 0..3.
    #[must_use]
    pub fn axis(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        Vec3(v)
    }

    #[must_use]
    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[must_use]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[must_use]
    pub fn cross(&self, other: &Vec3) -> Vec3 {
        Vec3([
            self.0[1] * other.0[2] - self.0[2] * other.0[1],
            self.0[2] * other.0[0] - self.0[0] * other.0[2],
            self.0[0] * other.0[1] - self.0[1] * other.0[0],
        ])
    }

    /// Unit vector in the same direction; `None` for vectors of norm below `1e-300`.
    #[must_use]
    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(*self * (1.0 / n))
        }
    }

    /// Euclidean norm of the components selected by `mask`.
    #[must_use]
    pub fn masked_norm(&self, mask: [bool; 3]) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            if mask[i] {
                s += self.0[i] * self.0[i];
            }
        }
        s.sqrt()
    }

    #[must_use]
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Row-major 3×3 matrix: `m.0[row][col]`, acting on column vectors from the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    #[must_use]
    pub fn from_rows(r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]) -> Self {
        Mat3([r0, r1, r2])
    }

    /// Matrix whose columns are `c0, c1, c2`.
    #[must_use]
    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3([
            [c0[0], c1[0], c2[0]],
            [c0[1], c1[1], c2[1]],
            [c0[2], c1[2], c2[2]],
        ])
    }

    #[must_use]
    pub fn diagonal(d0: f64, d1: f64, d2: f64) -> Self {
        Mat3([[d0, 0.0, 0.0], [0.0, d1, 0.0], [0.0, 0.0, d2]])
    }

    #[must_use]
    pub fn column(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    #[must_use]
    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i])
    }

    #[must_use]
    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    #[must_use]
    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by adjugate over determinant. Returns `None` when `|det| < 1e-300`.
    #[must_use]
    pub fn inverse(&self) -> Option<Mat3> {
        let m = &self.0;
        let det = self.det();
        if det.abs() < 1e-300 {
            return None;
        }
        let inv_det = 1.0 / det;
        let adj = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = adj[i][j] * inv_det;
            }
        }
        Some(Mat3(out))
    }

    /// Max absolute entry (the `max` norm used for exactness checks).
    #[must_use]
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Largest singular value (spectral operator norm).
    #[must_use]
    pub fn op_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// Singular values in descending order, via closed-form symmetric
    /// eigenvalues of `MᵀM`.
    #[must_use]
    pub fn singular_values(&self) -> [f64; 3] {
        let b = self.transpose() * *self;
        let eig = sym_eigenvalues(&b);
        [
            eig[0].max(0.0).sqrt(),
            eig[1].max(0.0).sqrt(),
            eig[2].max(0.0).sqrt(),
        ]
    }
}

impl Mul<Mat3> for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] =
                    self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        Mat3(out)
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3([
            self.0[0][0] * v[0] + self.0[0][1] * v[1] + self.0[0][2] * v[2],
            self.0[1][0] * v[0] + self.0[1][1] * v[1] + self.0[1][2] * v[2],
            self.0[2][0] * v[0] + self.0[2][1] * v[1] + self.0[2][2] * v[2],
        ])
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut out = self.0;
        for row in &mut out {
            for x in row {
                *x *= s;
            }
        }
        Mat3(out)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        let mut out = self.0;
        for (row, r) in out.iter_mut().zip(rhs.0.iter()) {
            for (x, y) in row.iter_mut().zip(r.iter()) {
                *x -= y;
            }
        }
        Mat3(out)
    }
}

/// Eigenvalues of a symmetric 3×3 matrix, descending, by the trigonometric
/// closed form (Cardano in disguise). Input symmetry is assumed, not checked.
#[must_use]
pub fn sym_eigenvalues(b: &Mat3) -> [f64; 3] {
    let m = &b.0;
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        // Already diagonal.
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(|a, b| b.partial_cmp(a).unwrap());
        return d;
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let inv_p = 1.0 / p;
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let centered = if i == j { m[i][j] - q } else { m[i][j] };
            c[i][j] = centered * inv_p;
        }
    }
    let r = (Mat3(c).det() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Modified Gram–Schmidt on the columns of `m`. Returns the orthonormal frame
/// `q` and the positive diagonal `r` of the triangular factor (the column norms
/// after projecting out the previous columns). Degenerate input (a column norm
/// collapsing below `1e-300`) returns `None`.
#[must_use]
pub fn gram_schmidt(m: &Mat3) -> Option<(Mat3, [f64; 3])> {
    let mut cols = [m.column(0), m.column(1), m.column(2)];
    let mut r = [0.0; 3];
    for j in 0..3 {
        for i in 0..j {
            let proj = cols[j].dot(&cols[i]);
            cols[j] = cols[j] - cols[i] * proj;
        }
        r[j] = cols[j].norm();
        if r[j] < 1e-300 {
            return None;
        }
        cols[j] = cols[j] * (1.0 / r[j]);
    }
    Some((Mat3::from_columns(cols[0], cols[1], cols[2]), r))
}

/// Reduce to the half-open unit interval `[0, 1)`.
///
/// `rem_euclid` alone can round a tiny negative input up to exactly `1.0`;
/// the second reduction guards that edge.
#[must_use]
pub fn wrap_unit(x: f64) -> f64 {
    let mut y = x.rem_euclid(1.0);
    if y >= 1.0 {
        y -= 1.0;
    }
    y
}

/// Representative of `x` modulo 1 in `[-1/2, 1/2)`.
#[must_use]
pub fn wrap_half(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

/// Point of the 3-torus R³/Z³, stored through its canonical lift in
/// `[0,1)³`.
///
/// Every constructor reduces mod 1 immediately, so repeated map
/// applications on the lift stay bounded instead of growing like the
/// expansion rate (an orbit of a few hundred steps would otherwise
/// overflow f64 range). Integer-matrix actions and torus displacements are
/// unaffected by the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: [f64; 3],
}

impl TorusPoint {
    #[must_use]
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        TorusPoint {
            coords: [wrap_unit(x), wrap_unit(y), wrap_unit(z)],
        }
    }

    /// Point obtained by projecting an arbitrary lift.
    #[must_use]
    pub fn from_lift(lift: Vec3) -> Self {
        TorusPoint::new(lift[0], lift[1], lift[2])
    }

    #[must_use]
    pub fn coords(&self) -> Vec3 {
        Vec3(self.coords)
    }

    /// The canonical lift (the coordinates themselves).
    #[must_use]
    pub fn lift(&self) -> Vec3 {
        Vec3(self.coords)
    }

    /// Difference vector to `other`, each coordinate reduced to `[-1/2, 1/2)`.
    #[must_use]
    pub fn wrapped_diff(&self, other: &TorusPoint) -> Vec3 {
        Vec3([
            wrap_half(self.coords[0] - other.coords[0]),
            wrap_half(self.coords[1] - other.coords[1]),
            wrap_half(self.coords[2] - other.coords[2]),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip_is_identity() {
        let m = Mat3::from_rows([2.0, 1.0, 0.5], [-1.0, 3.0, 0.0], [0.0, 0.25, 1.5]);
        let inv = m.inverse().expect("well-conditioned matrix");
        let residual = m * inv;
        let mut err = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((residual.0[i][j] - target).abs());
            }
        }
        assert!(err < 1e-14, "M * M^-1 deviates from I by {err}");
    }

    #[test]
    fn singular_values_of_diagonal_matrix() {
        let m = Mat3::diagonal(3.0, -2.0, 0.5);
        let sv = m.singular_values();
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 2.0).abs() < 1e-12);
        assert!((sv[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_values_match_determinant_product() {
        let m = Mat3::from_rows([1.0, 0.3, 0.0], [0.1, 1.0, -0.2], [0.0, 0.4, 1.0]);
        let sv = m.singular_values();
        let prod = sv[0] * sv[1] * sv[2];
        assert!(
            (prod - m.det().abs()).abs() < 1e-12,
            "product of singular values {prod} vs |det| {}",
            m.det().abs()
        );
    }

    #[test]
    fn op_norm_of_rotation_is_one() {
        let th = 0.7f64;
        let m = Mat3::from_rows(
            [1.0, 0.0, 0.0],
            [0.0, th.cos(), -th.sin()],
            [0.0, th.sin(), th.cos()],
        );
        assert!((m.op_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_produces_orthonormal_frame() {
        let m = Mat3::from_rows([2.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 3.0]);
        let (q, r) = gram_schmidt(&m).unwrap();
        for j in 0..3 {
            assert!(r[j] > 0.0);
            assert!((q.column(j).norm() - 1.0).abs() < 1e-14);
            for i in 0..j {
                assert!(q.column(i).dot(&q.column(j)).abs() < 1e-14);
            }
        }
        // The triangular diagonal reconstructs |det|.
        assert!((r[0] * r[1] * r[2] - m.det().abs()).abs() < 1e-12);
    }

    #[test]
    fn wrap_unit_handles_tiny_negative() {
        let y = wrap_unit(-1e-18);
        assert!((0.0..1.0).contains(&y), "wrap_unit(-1e-18) = {y}");
        assert_eq!(wrap_unit(2.75), 0.75);
    }

    #[test]
    fn wrap_half_is_half_open() {
        assert_eq!(wrap_half(0.5), -0.5);
        assert_eq!(wrap_half(-0.5), -0.5);
        assert_eq!(wrap_half(1.25), 0.25);
    }

    #[test]
    fn wrapped_diff_crosses_the_seam() {
        let a = TorusPoint::new(0.95, 0.0, 0.5);
        let b = TorusPoint::new(0.05, 0.0, 0.5);
        let d = a.wrapped_diff(&b);
        assert!((d[0] + 0.1).abs() < 1e-15, "0.95 - 0.05 should wrap to -0.1, got {}", d[0]);
    }

    #[test]
    fn wraps_reduce_into_their_windows() {
        use proptest::prelude::*;
        proptest!(|(x in -1e6f64..1e6)| {
            let u = wrap_unit(x);
            prop_assert!((0.0..1.0).contains(&u));
            let shift = x - u;
            prop_assert!((shift - shift.round()).abs() < 1e-9 * (1.0 + x.abs()),
                "wrap_unit must shift by an integer: {x} -> {u}");
            let h = wrap_half(x);
            prop_assert!((-0.5..0.5).contains(&h));
            let shift = x - h;
            prop_assert!((shift - shift.round()).abs() < 1e-9 * (1.0 + x.abs()));
        });
    }
}
