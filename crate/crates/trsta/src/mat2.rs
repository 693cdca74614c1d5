//! Dense 2×2 complex matrices and the small amount of linear algebra the
//! rest of the crate needs: products, adjoints, Frobenius norms, Hermitian
//! eigendecompositions, and unitary exponentials of Hermitian generators.
//!
//! Everything here is closed-form; no iterative factorizations are involved.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

/// Two-component complex vector in the {|1⟩, |2⟩} basis.
pub type Vec2 = [C64; 2];

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

impl Mat2 {
    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self {
            m: [[m11, m12], [m21, m22]],
        }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        Self::new(o, z, z, o)
    }

    /// Real diagonal plus complex off-diagonal Hermitian constructor:
    /// [[d1, b], [conj(b), d2]].
    pub fn hermitian(d1: f64, b: C64, d2: f64) -> Self {
        Self::new(C64::new(d1, 0.0), b, b.conj(), C64::new(d2, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ‖U†U − I‖_F; zero for exactly unitary input.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Self::identity()).frobenius_norm()
    }

    /// ‖H − H†‖_F; zero for exactly Hermitian input.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + rhs.m[0][0],
            self.m[0][1] + rhs.m[0][1],
            self.m[1][0] + rhs.m[1][0],
            self.m[1][1] + rhs.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] - rhs.m[0][0],
            self.m[0][1] - rhs.m[0][1],
            self.m[1][0] - rhs.m[1][0],
            self.m[1][1] - rhs.m[1][1],
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

pub fn inner(a: &Vec2, b: &Vec2) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Outer product |a⟩⟨b|.
pub fn outer(a: &Vec2, b: &Vec2) -> Mat2 {
    Mat2::new(
        a[0] * b[0].conj(),
        a[0] * b[1].conj(),
        a[1] * b[0].conj(),
        a[1] * b[1].conj(),
    )
}

pub fn norm(v: &Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Eigendecomposition of a Hermitian 2×2 matrix, eigenvalues ascending.
///
/// Eigenvector phases are canonical: the first component with modulus above
/// 1e-14 of the vector's norm is made real and positive, so repeated runs
/// produce bit-identical vectors.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; 2],
    pub vectors: [Vec2; 2],
}

impl HermitianEigen {
    /// Closed-form eigendecomposition. Only the Hermitian part of the input
    /// participates: the diagonal real parts and the upper off-diagonal entry.
    pub fn new(h: &Mat2) -> Self {
        let d1 = h.m[0][0].re;
        let d2 = h.m[1][1].re;
        let b = h.m[0][1];
        let mean = 0.5 * (d1 + d2);
        let half_gap = 0.5 * (d1 - d2);
        let r = (half_gap * half_gap + b.norm_sqr()).sqrt();
        let values = [mean - r, mean + r];

        let (v_hi, v_lo): (Vec2, Vec2) = if b.norm() == 0.0 {
            // diagonal input: eigenvectors are basis vectors
            if half_gap >= 0.0 {
                ([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
            } else {
                ([C64::new(0.0, 0.0), C64::new(1.0, 0.0)], [C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
            }
        } else {
            // pick the better-conditioned closed form for the upper eigenvector
            let v_hi: Vec2 = if half_gap >= 0.0 {
                [C64::new(half_gap + r, 0.0), b.conj()]
            } else {
                [b, C64::new(r - half_gap, 0.0)]
            };
            let n = norm(&v_hi);
            let v_hi = [v_hi[0] / n, v_hi[1] / n];
            // orthogonal complement of (x, y) is (-conj(y), conj(x))
            let v_lo = [-v_hi[1].conj(), v_hi[0].conj()];
            (v_hi, v_lo)
        };

        Self {
            values,
            vectors: [canonical_phase(v_lo), canonical_phase(v_hi)],
        }
    }
}

/// Rotate a unit vector's global phase so its first non-negligible component
/// is real and positive.
pub fn canonical_phase(v: Vec2) -> Vec2 {
    let pick = if v[0].norm() > 1e-14 { v[0] } else { v[1] };
    let phase = pick / pick.norm();
    [v[0] * phase.conj(), v[1] * phase.conj()]
}

/// exp(i·r·H) for Hermitian H, exactly unitary up to rounding.
///
/// Splits H = m·I + A with A traceless; the A part rotates by the half-gap
/// angle and the identity part contributes a global phase.
pub fn expi_hermitian(h: &Mat2, r: f64) -> Mat2 {
    let mean = 0.5 * (h.m[0][0].re + h.m[1][1].re);
    let half_gap = 0.5 * (h.m[0][0].re - h.m[1][1].re);
    let b = h.m[0][1];
    let rho = (half_gap * half_gap + b.norm_sqr()).sqrt();
    let phase = C64::from_polar(1.0, r * mean);
    if rho == 0.0 {
        return Mat2::identity().scale(phase);
    }
    let (s, c) = (r * rho).sin_cos();
    let i_s = C64::new(0.0, s / rho);
    // cos(rρ)·I + i sin(rρ)·A/ρ, then the tr/2 phase
    Mat2::new(
        (C64::new(c, 0.0) + i_s * half_gap) * phase,
        i_s * b * phase,
        i_s * b.conj() * phase,
        (C64::new(c, 0.0) - i_s * half_gap) * phase,
    )
}
