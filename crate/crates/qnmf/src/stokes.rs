//! Stokes parameters, the polarization admissibility cone and its
//! Euclidean projection.
//!
//! A Stokes vector `(S0, S1, S2, S3)` is physically admissible when
//! `S0 >= 0` and `S1² + S2² + S3² <= S0²`. Embedded as the quaternion
//! `w = S0 + i·S3 + j·S1 + k·S2`, the admissible set becomes the cone of
//! quaternions with `Re q >= 0` and `|Im q| <= Re q` — a closed
//! second-order convex cone. Membership, the bijection onto 2x2 complex
//! Hermitian matrices, and the exact projection via the closed-form
//! eigendecomposition all live here.

use std::fmt;

use crate::matrix::RealMatrix;
use crate::quat::Quaternion;

/// Default relative tolerance for cone membership checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Errors from Stokes-domain operations.
#[derive(Debug, Clone, PartialEq)]
pub enum StokesError {
    /// Degree of polarization requested for non-positive total intensity.
    ZeroIntensity { s0: f64 },
    /// An axis that must be a unit pure quaternion is not.
    InvalidAxis { norm: f64, re: f64 },
}

impl fmt::Display for StokesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StokesError::ZeroIntensity { s0 } => {
                write!(f, "degree of polarization undefined for S0 = {s0} <= 0")
            }
            StokesError::InvalidAxis { norm, re } => write!(
                f,
                "polarization axis must be a unit pure quaternion (|axis| = {norm}, re = {re})"
            ),
        }
    }
}

impl std::error::Error for StokesError {}

// ---------------------------------------------------------------------------
// Stokes samples and the quaternion embedding
// ---------------------------------------------------------------------------

/// One Stokes vector `(S0, S1, S2, S3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesSample {
    /// Total intensity.
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesSample {
    pub const fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Self {
        StokesSample { s0, s1, s2, s3 }
    }

    /// Physical admissibility: `s0 >= 0` and `s1² + s2² + s3² <= s0²`,
    /// with relative tolerance.
    pub fn is_admissible(&self, tol: f64) -> bool {
        in_cone(stokes_to_quaternion(*self), tol)
    }
}

/// Embed a Stokes vector as `w = S0 + i·S3 + j·S1 + k·S2`.
pub fn stokes_to_quaternion(s: StokesSample) -> Quaternion {
    Quaternion::new(s.s0, s.s3, s.s1, s.s2)
}

/// Inverse of [`stokes_to_quaternion`]; exact.
pub fn quaternion_to_stokes(q: Quaternion) -> StokesSample {
    StokesSample::new(q.re, q.im_j, q.im_k, q.im_i)
}

/// Degree of polarization `sqrt(S1² + S2² + S3²) / S0`.
///
/// In `[0, 1]` exactly when the sample is admissible; errors when the
/// total intensity is not strictly positive.
pub fn degree_of_polarization(s: StokesSample) -> Result<f64, StokesError> {
    if s.s0 <= 0.0 {
        return Err(StokesError::ZeroIntensity { s0: s.s0 });
    }
    Ok((s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3).sqrt() / s.s0)
}

/// Cone membership with relative tolerance: `Re q >= -tol·scale` and
/// `|Im q|² <= (Re q)²·(1 + tol)` where `scale = max(1, |q|)`.
pub fn in_cone(q: Quaternion, tol: f64) -> bool {
    let scale = q.norm().max(1.0);
    q.re >= -tol * scale && q.imag_norm_sqr() <= q.re * q.re * (1.0 + tol)
}

// ---------------------------------------------------------------------------
// Intensity / degree-of-polarization / axis form
// ---------------------------------------------------------------------------

/// Cone member in the form `w = I + I·Φ·μ` with intensity `I`, degree of
/// polarization `Φ` and unit pure axis `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationDescriptor {
    /// Total intensity `I >= 0`.
    pub intensity: f64,
    /// Degree of polarization in `[0, 1]`.
    pub dop: f64,
    /// Polarization axis, a unit pure quaternion. When `dop = 0` the axis
    /// carries no information and defaults to `i`.
    pub axis: Quaternion,
}

impl PolarizationDescriptor {
    /// Build from raw parts, normalizing the axis. The axis must be pure
    /// (zero real part) and nonzero unless `dop = 0`.
    pub fn new(intensity: f64, dop: f64, axis: Quaternion) -> Result<Self, StokesError> {
        let norm = axis.norm();
        if dop != 0.0 {
            if norm == 0.0 || axis.re.abs() > DEFAULT_TOL * norm {
                return Err(StokesError::InvalidAxis { norm, re: axis.re });
            }
            let unit = Quaternion::pure(axis.im_i / norm, axis.im_j / norm, axis.im_k / norm);
            Ok(PolarizationDescriptor {
                intensity,
                dop,
                axis: unit,
            })
        } else {
            Ok(PolarizationDescriptor {
                intensity,
                dop,
                axis: Quaternion::I,
            })
        }
    }

    /// `w = I + I·Φ·μ`.
    pub fn to_quaternion(&self) -> Quaternion {
        Quaternion::from_real(self.intensity) + self.axis.scale(self.intensity * self.dop)
    }

    /// Decompose a quaternion into `(I, Φ, μ)`. For `Re q > 0` this is
    /// `Φ = |Im q| / Re q`; a zero imaginary part yields `Φ = 0` with the
    /// default axis. The zero quaternion maps to `(0, 0, i)`.
    pub fn from_quaternion(q: Quaternion) -> Self {
        let imag_norm = q.imag_norm_sqr().sqrt();
        if imag_norm == 0.0 {
            return PolarizationDescriptor {
                intensity: q.re,
                dop: 0.0,
                axis: Quaternion::I,
            };
        }
        let axis = q.imag().scale(1.0 / imag_norm);
        let dop = if q.re > 0.0 { imag_norm / q.re } else { f64::INFINITY };
        PolarizationDescriptor {
            intensity: q.re,
            dop,
            axis,
        }
    }
}

// ---------------------------------------------------------------------------
// Complex scalars and 2x2 Hermitian matrices
// ---------------------------------------------------------------------------

/// Complex scalar stored as an ordered real pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    pub fn abs_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.abs_sqr().sqrt()
    }

    pub fn add(self, o: Self) -> Self {
        Complex::new(self.re + o.re, self.im + o.im)
    }

    pub fn mul(self, o: Self) -> Self {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    pub fn scale(self, s: f64) -> Self {
        Complex::new(self.re * s, self.im * s)
    }
}

/// 2x2 complex Hermitian matrix `[[a, c], [conj(c), b]]` with real
/// diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianTwo {
    /// Top-left (real).
    pub a: f64,
    /// Bottom-right (real).
    pub b: f64,
    /// Top-right; bottom-left is its conjugate.
    pub c: Complex,
}

impl HermitianTwo {
    pub const fn new(a: f64, b: f64, c: Complex) -> Self {
        HermitianTwo { a, b, c }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.b
    }

    pub fn det(&self) -> f64 {
        self.a * self.b - self.c.abs_sqr()
    }

    /// Positive semi-definiteness via the trace/determinant test.
    pub fn is_psd(&self, tol: f64) -> bool {
        let scale = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(1.0);
        self.trace() >= -tol * scale && self.det() >= -tol * scale * scale
    }
}

/// Bijection from quaternions onto 2x2 Hermitian matrices:
/// `a = (re + im_j)/2`, `b = (re - im_j)/2`, `c = (im_k + i·im_i)/2`.
pub fn quat_to_hermitian(q: Quaternion) -> HermitianTwo {
    HermitianTwo::new(
        (q.re + q.im_j) / 2.0,
        (q.re - q.im_j) / 2.0,
        Complex::new(q.im_k / 2.0, q.im_i / 2.0),
    )
}

/// Inverse bijection: `re = a + b`, `im_i = 2·Im c`, `im_j = a - b`,
/// `im_k = 2·Re c`.
pub fn hermitian_to_quat(h: HermitianTwo) -> Quaternion {
    Quaternion::new(h.a + h.b, 2.0 * h.c.im, h.a - h.b, 2.0 * h.c.re)
}

/// Eigendecomposition of a 2x2 Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eig2 {
    /// Eigenvalues in descending order.
    pub values: [f64; 2],
    /// Orthonormal eigenvectors; `vectors[i]` pairs with `values[i]`.
    pub vectors: [[Complex; 2]; 2],
}

/// Closed-form eigendecomposition: `η = (a+b)/2 ± sqrt(((a-b)/2)² + |c|²)`.
///
/// The eigenvector formula is chosen per the sign of `a - b` so the large
/// component never suffers cancellation, and the pair is orthogonal by
/// construction. For the degenerate diagonal case the standard basis is
/// returned.
pub fn eig2_hermitian(h: HermitianTwo) -> Eig2 {
    let mid = (h.a + h.b) / 2.0;
    let d = (h.a - h.b) / 2.0;
    let c_abs = h.c.abs();
    let r = d.hypot(c_abs);
    let values = [mid + r, mid - r];

    let e1 = [Complex::new(1.0, 0.0), Complex::ZERO];
    let e2 = [Complex::ZERO, Complex::new(1.0, 0.0)];

    let scale = h.a.abs().max(h.b.abs()).max(c_abs);
    if c_abs <= f64::EPSILON * scale {
        // Diagonal (or near enough); order basis vectors by eigenvalue.
        let vectors = if h.a >= h.b { [e1, e2] } else { [e2, e1] };
        return Eig2 { values, vectors };
    }

    let (v1, v2) = if d >= 0.0 {
        // η1 - b = r + d is the safe large component.
        let t = r + d;
        let n = (t * t + c_abs * c_abs).sqrt();
        (
            [Complex::new(t / n, 0.0), h.c.conj().scale(1.0 / n)],
            [h.c.scale(1.0 / n), Complex::new(-t / n, 0.0)],
        )
    } else {
        // η1 - a = r - d is the safe large component.
        let t = r - d;
        let n = (t * t + c_abs * c_abs).sqrt();
        (
            [h.c.scale(1.0 / n), Complex::new(t / n, 0.0)],
            [Complex::new(-t / n, 0.0), h.c.conj().scale(1.0 / n)],
        )
    };
    Eig2 {
        values,
        vectors: [v1, v2],
    }
}

/// Reassemble `sum_i η_i · v_i v_i†` from an eigendecomposition.
pub fn hermitian_from_eig(values: [f64; 2], vectors: [[Complex; 2]; 2]) -> HermitianTwo {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = Complex::ZERO;
    for (eta, v) in values.iter().zip(vectors.iter()) {
        a += eta * v[0].abs_sqr();
        b += eta * v[1].abs_sqr();
        c = c.add(v[0].mul(v[1].conj()).scale(*eta));
    }
    HermitianTwo::new(a, b, c)
}

/// Exact Euclidean projection onto the admissibility cone.
///
/// Maps into the Hermitian picture, clips negative eigenvalues in the
/// spectral decomposition and maps back. Inputs already in the cone are
/// returned unchanged.
pub fn project_cone(q: Quaternion) -> Quaternion {
    let h = quat_to_hermitian(q);
    let eig = eig2_hermitian(h);
    let [eta1, eta2] = eig.values;
    if eta2 >= 0.0 {
        return q;
    }
    if eta1 <= 0.0 {
        return Quaternion::ZERO;
    }
    let projected = hermitian_from_eig([eta1, 0.0], eig.vectors);
    hermitian_to_quat(projected)
}

/// Entry-wise projection onto the non-negative orthant.
pub fn project_nonneg(m: &RealMatrix) -> RealMatrix {
    m.map(|x| x.max(0.0))
}

/// Draw a cone member with intensity in `[0, 2)`, degree of polarization
/// uniform in `[0, 1]` and a uniformly random axis.
pub fn random_in_cone<R: rand::Rng>(rng: &mut R) -> Quaternion {
    use rand::RngExt;
    let intensity: f64 = rng.random_range(0.0..2.0);
    let dop: f64 = rng.random_range(0.0..=1.0);
    let axis = random_unit_axis(rng);
    Quaternion::from_real(intensity) + axis.scale(intensity * dop)
}

/// Uniformly random unit pure quaternion.
pub fn random_unit_axis<R: rand::Rng>(rng: &mut R) -> Quaternion {
    use rand::RngExt;
    loop {
        let v = Quaternion::pure(
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        );
        let n = v.norm();
        if n > 1e-6 {
            return v.scale(1.0 / n);
        }
    }
}
