//! Quaternion scalars.
//!
//! A quaternion is written `q = re + im_i·i + im_j·j + im_k·k` over the
//! basis `{1, i, j, k}` with `i² = j² = k² = -1`, `ij = k`, `jk = i`,
//! `ki = j` and anticommuting imaginary units. Multiplication is the
//! Hamilton product and is not commutative.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// A quaternion with 64-bit float components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    /// Real (scalar) part.
    pub re: f64,
    /// Coefficient of the `i` unit.
    pub im_i: f64,
    /// Coefficient of the `j` unit.
    pub im_j: f64,
    /// Coefficient of the `k` unit.
    pub im_k: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(re: f64, im_i: f64, im_j: f64, im_k: f64) -> Self {
        Quaternion { re, im_i, im_j, im_k }
    }

    /// Quaternion with zero imaginary part.
    pub const fn from_real(re: f64) -> Self {
        Quaternion::new(re, 0.0, 0.0, 0.0)
    }

    /// Pure quaternion `bi + cj + dk`.
    pub const fn pure(im_i: f64, im_j: f64, im_k: f64) -> Self {
        Quaternion::new(0.0, im_i, im_j, im_k)
    }

    /// Quaternion conjugate `q̄ = re - im_i·i - im_j·j - im_k·k`.
    pub fn conj(self) -> Self {
        Quaternion::new(self.re, -self.im_i, -self.im_j, -self.im_k)
    }

    /// Imaginary (vector) part as a pure quaternion.
    pub fn imag(self) -> Self {
        Quaternion::pure(self.im_i, self.im_j, self.im_k)
    }

    /// Squared modulus `|q|² = re² + im_i² + im_j² + im_k²`.
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im_i * self.im_i + self.im_j * self.im_j + self.im_k * self.im_k
    }

    /// Modulus `|q|`.
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Squared modulus of the imaginary part.
    pub fn imag_norm_sqr(self) -> f64 {
        self.im_i * self.im_i + self.im_j * self.im_j + self.im_k * self.im_k
    }

    /// Multiply by a real scalar.
    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.re * s, self.im_i * s, self.im_j * s, self.im_k * s)
    }

    /// `q / |q|`; returns `None` when `|q| = 0`.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    /// Euclidean (ℝ⁴) inner product of two quaternions, `Re(p·q̄)`.
    pub fn dot(self, other: Self) -> f64 {
        self.re * other.re
            + self.im_i * other.im_i
            + self.im_j * other.im_j
            + self.im_k * other.im_k
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite()
            && self.im_i.is_finite()
            && self.im_j.is_finite()
            && self.im_k.is_finite()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.re
            .abs()
            .max(self.im_i.abs())
            .max(self.im_j.abs())
            .max(self.im_k.abs())
    }

    /// Componentwise comparison with relative tolerance scaled by the
    /// larger operand (absolute below 1.0).
    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        (self - other).max_abs() <= tol * scale
    }

    /// Components in `(re, i, j, k)` order.
    pub fn components(self) -> [f64; 4] {
        [self.re, self.im_i, self.im_j, self.im_k]
    }

    pub fn from_components(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Self) -> Self {
        Quaternion::new(
            self.re + rhs.re,
            self.im_i + rhs.im_i,
            self.im_j + rhs.im_j,
            self.im_k + rhs.im_k,
        )
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Self) -> Self {
        Quaternion::new(
            self.re - rhs.re,
            self.im_i - rhs.im_i,
            self.im_j - rhs.im_j,
            self.im_k - rhs.im_k,
        )
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Self {
        Quaternion::new(-self.re, -self.im_i, -self.im_j, -self.im_k)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, q: Self) -> Self {
        let p = self;
        Quaternion::new(
            p.re * q.re - p.im_i * q.im_i - p.im_j * q.im_j - p.im_k * q.im_k,
            p.re * q.im_i + p.im_i * q.re + p.im_j * q.im_k - p.im_k * q.im_j,
            p.re * q.im_j - p.im_i * q.im_k + p.im_j * q.re + p.im_k * q.im_i,
            p.re * q.im_k + p.im_i * q.im_j - p.im_j * q.im_i + p.im_k * q.re,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

/// Hamilton product of two quaternions.
pub fn qmul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:+.6}{:+.6}i{:+.6}j{:+.6}k",
            self.re, self.im_i, self.im_j, self.im_k
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle for the Hamilton product: the 4x4 real left-multiplication
    /// matrix of `p` applied to the component vector of `q`.
    fn qmul_oracle(p: Quaternion, q: Quaternion) -> Quaternion {
        let (a, b, c, d) = (p.re, p.im_i, p.im_j, p.im_k);
        let left = [
            [a, -b, -c, -d],
            [b, a, -d, c],
            [c, d, a, -b],
            [d, -c, b, a],
        ];
        let v = q.components();
        let mut out = [0.0; 4];
        for (r, row) in left.iter().enumerate() {
            out[r] = row.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
        }
        Quaternion::from_components(out)
    }

    #[test]
    fn basis_products() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::K * Quaternion::I, Quaternion::J);
        assert_eq!(Quaternion::I * Quaternion::I, -Quaternion::ONE);
        assert_eq!(Quaternion::J * Quaternion::J, -Quaternion::ONE);
        assert_eq!(Quaternion::K * Quaternion::K, -Quaternion::ONE);
        // anticommutation
        assert_eq!(Quaternion::I * Quaternion::J, -(Quaternion::J * Quaternion::I));
    }

    #[test]
    fn identity_leaves_unchanged() {
        let q = Quaternion::new(1.5, -2.0, 0.25, 3.0);
        assert_eq!(q * Quaternion::ONE, q);
        assert_eq!(Quaternion::ONE * q, q);
    }

    #[test]
    fn expansion_example() {
        // (1+i)(1+j) = 1 + i + j + k, frozen from the 4x4 oracle
        let p = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let q = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        let expected = qmul_oracle(p, q);
        assert_eq!(expected, Quaternion::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(p * q, expected);
    }

    #[test]
    fn conj_and_modulus() {
        let q = Quaternion::new(1.0, -2.0, 3.0, -4.0);
        let qc = q.conj();
        assert_eq!(qc, Quaternion::new(1.0, 2.0, -3.0, 4.0));
        let prod = q * qc;
        assert!((prod.re - q.norm_sqr()).abs() <= 1e-12 * q.norm_sqr());
        assert!(prod.imag().max_abs() <= 1e-12 * q.norm_sqr());
    }

    fn arb_quat() -> impl Strategy<Value = Quaternion> {
        let c = -10.0..10.0f64;
        (c.clone(), c.clone(), c.clone(), c).prop_map(|(a, b, cc, d)| Quaternion::new(a, b, cc, d))
    }

    proptest! {
        #[test]
        fn mul_matches_real_expansion(p in arb_quat(), q in arb_quat()) {
            let got = p * q;
            let want = qmul_oracle(p, q);
            prop_assert!(got.approx_eq(want, 1e-12));
        }

        #[test]
        fn modulus_is_multiplicative(p in arb_quat(), q in arb_quat()) {
            let lhs = (p * q).norm();
            let rhs = p.norm() * q.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn conj_reverses_products(p in arb_quat(), q in arb_quat()) {
            let lhs = (p * q).conj();
            let rhs = q.conj() * p.conj();
            prop_assert!(lhs.approx_eq(rhs, 1e-12));
        }

        #[test]
        fn mul_is_associative(p in arb_quat(), q in arb_quat(), r in arb_quat()) {
            let lhs = (p * q) * r;
            let rhs = p * (q * r);
            prop_assert!(lhs.approx_eq(rhs, 1e-12));
        }
    }
}
