//! Admissible-transform analysis and uniqueness condition checkers.
//!
//! For a rank-2 factorization `X = WH`, every alternative factor pair is
//! reached by a real 2x2 transform `T(α, β) = [[1-α, β], [α, 1-β]]` with
//! `α + β < 1`. The factorization is essentially unique exactly when the
//! admissible `(α, β)` set collapses to the identity `{(0, 0)}`. The set
//! splits into an interval from non-negativity constraints alone and, per
//! source row, an interval from the polarization cone constraint — the
//! latter is the solution set of a quadratic inequality in `α` (or `β`).
//! Intersecting everything isolates how much the polarization constraint
//! narrows the real-intensity answer.
//!
//! Condition checkers for any rank cover the sufficient separability
//! route on the real parts, and the necessary full-polarization /
//! activation-support pattern for non-vanishing sources.

use std::fmt;

use crate::matrix::{QuaternionMatrix, RealMatrix};
use crate::quat::Quaternion;
use crate::stokes::{in_cone, PolarizationDescriptor, DEFAULT_TOL};

/// Tolerance for treating a degree of polarization as 1.
pub const POL_TOL: f64 = 1e-9;
/// Tolerance below which two polarization states count as equal.
pub const STATE_TOL: f64 = 1e-9;
/// Relative threshold under which an entry counts as zero in pattern
/// searches.
pub const ZERO_REL: f64 = 1e-12;

/// Errors from the uniqueness analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum UniquenessError {
    /// Interval analysis is defined for exactly two sources.
    RankTwoRequired { got: usize },
    ShapeMismatch {
        w: (usize, usize),
        h: (usize, usize),
    },
    InfeasibleFactors { what: String },
    /// A pixel where no source is active leaves the transform bounds
    /// undefined.
    ZeroActivationColumn { n: usize },
    /// Axis arguments must be unit pure quaternions.
    NonUnitAxis { norm: f64, re: f64 },
    /// The necessary-condition check requires strictly positive source
    /// intensities.
    VanishingSource { m: usize, p: usize },
    /// `α + β >= 1` leaves the transform singular.
    NotInvertible { alpha: f64, beta: f64 },
}

impl fmt::Display for UniquenessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UniquenessError::RankTwoRequired { got } => {
                write!(f, "interval analysis requires rank 2, got {got}")
            }
            UniquenessError::ShapeMismatch { w, h } => write!(
                f,
                "factor shapes do not pair: W is {}x{}, H is {}x{}",
                w.0, w.1, h.0, h.1
            ),
            UniquenessError::InfeasibleFactors { what } => {
                write!(f, "infeasible factors: {what}")
            }
            UniquenessError::ZeroActivationColumn { n } => {
                write!(f, "activation column {n} sums to zero")
            }
            UniquenessError::NonUnitAxis { norm, re } => write!(
                f,
                "axis must be a unit pure quaternion (|axis| = {norm}, re = {re})"
            ),
            UniquenessError::VanishingSource { m, p } => write!(
                f,
                "source {p} has non-positive intensity at row {m}; the necessary \
                 condition only applies to non-vanishing sources"
            ),
            UniquenessError::NotInvertible { alpha, beta } => {
                write!(f, "transform with alpha = {alpha}, beta = {beta} is singular")
            }
        }
    }
}

impl std::error::Error for UniquenessError {}

// ---------------------------------------------------------------------------
// Intervals over the extended reals
// ---------------------------------------------------------------------------

/// Interval with endpoint-inclusivity flags; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn all() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    /// Membership with tolerance; the inclusivity flags are reporting
    /// metadata, numeric membership is tolerance-bound either way.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// Whether the interval is the single point 0 within `tol`.
    pub fn is_zero_point(&self, tol: f64) -> bool {
        self.lo.abs() <= tol && self.hi.abs() <= tol
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(std::cmp::Ordering::Greater) => (self.lo, self.lo_closed),
            Some(std::cmp::Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Less) => (self.hi, self.hi_closed),
            Some(std::cmp::Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    /// Containment up to tolerance on the endpoints.
    pub fn subset_of(&self, other: &Interval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo_bracket = if self.lo_closed { '[' } else { '(' };
        let hi_bracket = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{:.6e}, {:.6e}{}", lo_bracket, self.lo, self.hi, hi_bracket)
    }
}

// ---------------------------------------------------------------------------
// Quadratic inequalities
// ---------------------------------------------------------------------------

/// Coefficients of `a2·t² + a1·t + a0 >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticInequality {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl QuadraticInequality {
    pub fn new(a2: f64, a1: f64, a0: f64) -> Self {
        QuadraticInequality { a2, a1, a0 }
    }

    /// Exact case analysis over the extended reals. Coefficients within
    /// `1e-12` of the largest magnitude are treated as zero, degrading the
    /// quadratic to a linear or constant inequality.
    pub fn solve(&self) -> Vec<Interval> {
        let scale = self.a2.abs().max(self.a1.abs()).max(self.a0.abs());
        let eps = 1e-12 * scale;
        if scale == 0.0 {
            return vec![Interval::all()];
        }
        if self.a2.abs() <= eps {
            if self.a1.abs() <= eps {
                return if self.a0 >= 0.0 {
                    vec![Interval::all()]
                } else {
                    vec![]
                };
            }
            let root = -self.a0 / self.a1;
            return if self.a1 > 0.0 {
                vec![Interval {
                    lo: root,
                    hi: f64::INFINITY,
                    lo_closed: true,
                    hi_closed: false,
                }]
            } else {
                vec![Interval {
                    lo: f64::NEG_INFINITY,
                    hi: root,
                    lo_closed: false,
                    hi_closed: true,
                }]
            };
        }

        let disc = self.a1 * self.a1 - 4.0 * self.a2 * self.a0;
        if self.a2 > 0.0 {
            if disc <= 0.0 {
                return vec![Interval::all()];
            }
            let (r1, r2) = self.roots(disc);
            vec![
                Interval {
                    lo: f64::NEG_INFINITY,
                    hi: r1,
                    lo_closed: false,
                    hi_closed: true,
                },
                Interval {
                    lo: r2,
                    hi: f64::INFINITY,
                    lo_closed: true,
                    hi_closed: false,
                },
            ]
        } else {
            if disc < 0.0 {
                return vec![];
            }
            let (r1, r2) = self.roots(disc.max(0.0));
            vec![Interval::closed(r1, r2)]
        }
    }

    /// Both real roots in ascending order, computed without cancellation
    /// in the larger root.
    fn roots(&self, disc: f64) -> (f64, f64) {
        let sq = disc.sqrt();
        if self.a1 == 0.0 {
            let r = (sq / (2.0 * self.a2)).abs();
            (-r, r)
        } else {
            let q = -0.5 * (self.a1 + self.a1.signum() * sq);
            let ra = q / self.a2;
            let rb = self.a0 / q;
            (ra.min(rb), ra.max(rb))
        }
    }
}

/// The connected component of a solution set containing `x` (or, if the
/// set misses `x` by more than the tolerance, the component closest to
/// it). Returns the number of other components alongside.
fn component_containing(sets: &[Interval], x: f64, tol: f64) -> (Option<Interval>, usize) {
    if sets.is_empty() {
        return (None, 0);
    }
    for iv in sets {
        if iv.contains(x, tol) {
            return (Some(*iv), sets.len() - 1);
        }
    }
    let nearest = sets
        .iter()
        .min_by(|a, b| {
            let da = (a.lo - x).abs().min((a.hi - x).abs());
            let db = (b.lo - x).abs().min((b.hi - x).abs());
            da.total_cmp(&db)
        })
        .copied();
    (nearest, sets.len() - 1)
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

/// The 2x2 transform `T(α, β) = [[1-α, β], [α, 1-β]]` parameterizing all
/// non-trivial factor ambiguities at rank 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformT {
    pub alpha: f64,
    pub beta: f64,
}

impl TransformT {
    pub fn new(alpha: f64, beta: f64) -> Self {
        TransformT { alpha, beta }
    }

    /// Invertibility requires `α + β < 1`.
    pub fn is_invertible(&self) -> bool {
        self.alpha + self.beta < 1.0
    }

    pub fn matrix(&self) -> RealMatrix {
        RealMatrix::from_2x2([
            [1.0 - self.alpha, self.beta],
            [self.alpha, 1.0 - self.beta],
        ])
    }

    pub fn inverse_matrix(&self) -> Result<RealMatrix, UniquenessError> {
        if !self.is_invertible() {
            return Err(UniquenessError::NotInvertible {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        let d = 1.0 - self.alpha - self.beta;
        Ok(RealMatrix::from_2x2([
            [(1.0 - self.beta) / d, -self.beta / d],
            [-self.alpha / d, (1.0 - self.alpha) / d],
        ]))
    }

    /// Transformed factors `(W·T, T⁻¹·H)`.
    pub fn apply(
        &self,
        w: &QuaternionMatrix,
        h: &RealMatrix,
    ) -> Result<(QuaternionMatrix, RealMatrix), UniquenessError> {
        let wt = w
            .matmul_real(&self.matrix())
            .map_err(|_| UniquenessError::ShapeMismatch {
                w: w.shape(),
                h: h.shape(),
            })?;
        let ht = self
            .inverse_matrix()?
            .matmul(h)
            .map_err(|_| UniquenessError::ShapeMismatch {
                w: w.shape(),
                h: h.shape(),
            })?;
        Ok((wt, ht))
    }
}

/// Whether the transform keeps the factor pair feasible: transformed
/// sources in the cone, transformed activations non-negative (both with
/// relative tolerance).
pub fn transform_feasible(
    w: &QuaternionMatrix,
    h: &RealMatrix,
    t: TransformT,
    tol: f64,
) -> Result<bool, UniquenessError> {
    let (wt, ht) = t.apply(w, h)?;
    let h_scale = ht.max_abs().max(1.0);
    Ok(wt.iter().all(|q| in_cone(*q, tol))
        && ht.iter().all(|&v| v >= -tol * h_scale))
}

// ---------------------------------------------------------------------------
// Per-row polarization data
// ---------------------------------------------------------------------------

/// Intensity, degree of polarization and axis of both sources at one
/// spectral row.
#[derive(Debug, Clone, Copy)]
pub struct RowPolarization {
    pub i1: f64,
    pub phi1: f64,
    pub mu1: Quaternion,
    pub i2: f64,
    pub phi2: f64,
    pub mu2: Quaternion,
}

impl RowPolarization {
    pub fn from_sources(w1: Quaternion, w2: Quaternion) -> Self {
        let d1 = PolarizationDescriptor::from_quaternion(w1);
        let d2 = PolarizationDescriptor::from_quaternion(w2);
        RowPolarization {
            i1: d1.intensity,
            phi1: d1.dop,
            mu1: d1.axis,
            i2: d2.intensity,
            phi2: d2.dop,
            mu2: d2.axis,
        }
    }
}

/// Inner product of two polarization axes, `-Re(μ1·μ2)`, which equals the
/// ℝ³ dot product of their imaginary components. Arguments must be unit
/// pure quaternions.
pub fn inner_axis(mu1: Quaternion, mu2: Quaternion) -> Result<f64, UniquenessError> {
    for mu in [mu1, mu2] {
        let norm = mu.norm();
        if (norm - 1.0).abs() > 1e-9 || mu.re.abs() > 1e-9 {
            return Err(UniquenessError::NonUnitAxis { norm, re: mu.re });
        }
    }
    Ok(-(mu1 * mu2).re)
}

fn inner_axis_raw(mu1: Quaternion, mu2: Quaternion) -> f64 {
    -(mu1 * mu2).re
}

// ---------------------------------------------------------------------------
// Interval computations
// ---------------------------------------------------------------------------

/// Transform bounds from the non-negativity constraints alone.
///
/// Lower bounds come from intensity ratios over the rows where the other
/// source dominates (unbounded when no such row exists); upper bounds
/// come from the activation ratios. Reported half-open at the bottom,
/// closed at the top, matching attainment of the minima.
pub fn nmf_intervals(
    re_w: &RealMatrix,
    h: &RealMatrix,
) -> Result<(Interval, Interval), UniquenessError> {
    if re_w.cols() != 2 || h.rows() != 2 {
        return Err(UniquenessError::RankTwoRequired {
            got: re_w.cols().max(h.rows()),
        });
    }
    let mut alpha_max = f64::INFINITY;
    let mut beta_max = f64::INFINITY;
    for n in 0..h.cols() {
        let h1 = h[(0, n)];
        let h2 = h[(1, n)];
        let denom = h1 + h2;
        if denom <= 0.0 {
            return Err(UniquenessError::ZeroActivationColumn { n });
        }
        alpha_max = alpha_max.min(h2 / denom);
        beta_max = beta_max.min(h1 / denom);
    }

    let mut alpha_min = f64::NEG_INFINITY;
    let mut beta_min = f64::NEG_INFINITY;
    let mut alpha_ratio = f64::INFINITY;
    let mut beta_ratio = f64::INFINITY;
    for m in 0..re_w.rows() {
        let i1 = re_w[(m, 0)];
        let i2 = re_w[(m, 1)];
        if i2 > i1 {
            alpha_ratio = alpha_ratio.min(i1 / (i2 - i1));
        }
        if i1 > i2 {
            beta_ratio = beta_ratio.min(i2 / (i1 - i2));
        }
    }
    if alpha_ratio.is_finite() {
        alpha_min = -alpha_ratio;
    }
    if beta_ratio.is_finite() {
        beta_min = -beta_ratio;
    }

    let make = |lo: f64, hi: f64| Interval {
        lo,
        hi,
        lo_closed: false,
        hi_closed: true,
    };
    Ok((make(alpha_min, alpha_max), make(beta_min, beta_max)))
}

/// Quadratic inequality in `α` expressing that the transformed first
/// source stays inside the polarization cone at this row.
pub fn polarization_inequality_alpha(row: &RowPolarization) -> QuadraticInequality {
    let s = inner_axis_raw(row.mu1, row.mu2);
    let g = 1.0 - row.phi1 * row.phi2 * s;
    let u1 = row.i1 * row.i1 * (1.0 - row.phi1 * row.phi1);
    let u2 = row.i2 * row.i2 * (1.0 - row.phi2 * row.phi2);
    let cross = row.i1 * row.i2 * g;
    QuadraticInequality::new(u1 + u2 - 2.0 * cross, 2.0 * (cross - u1), u1)
}

/// Mirror of [`polarization_inequality_alpha`] with the source roles
/// swapped, constraining `β` through the transformed second source.
pub fn polarization_inequality_beta(row: &RowPolarization) -> QuadraticInequality {
    let s = inner_axis_raw(row.mu1, row.mu2);
    let g = 1.0 - row.phi1 * row.phi2 * s;
    let u1 = row.i1 * row.i1 * (1.0 - row.phi1 * row.phi1);
    let u2 = row.i2 * row.i2 * (1.0 - row.phi2 * row.phi2);
    let cross = row.i1 * row.i2 * g;
    QuadraticInequality::new(u1 + u2 - 2.0 * cross, 2.0 * (cross - u2), u2)
}

/// Full admissibility analysis for a rank-2 factor pair.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    /// Bounds from non-negativity constraints alone.
    pub nmf_alpha: Interval,
    pub nmf_beta: Interval,
    /// Per-row polarization bounds (component containing the identity).
    pub pol_alpha_rows: Vec<Interval>,
    pub pol_beta_rows: Vec<Interval>,
    /// Intersection of everything: the admissible transform range.
    pub qnmf_alpha: Interval,
    pub qnmf_beta: Interval,
    /// Both final intervals collapse to the identity within `1e-9`.
    pub unique: bool,
    /// Solution-set components discarded for not containing the identity
    /// (they lie outside the invertible transform regime).
    pub excluded_components: usize,
}

fn validate_factors(
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<(), UniquenessError> {
    if w.cols() != h.rows() {
        return Err(UniquenessError::ShapeMismatch {
            w: w.shape(),
            h: h.shape(),
        });
    }
    for m in 0..w.rows() {
        for p in 0..w.cols() {
            if !in_cone(w[(m, p)], DEFAULT_TOL) {
                return Err(UniquenessError::InfeasibleFactors {
                    what: format!("source entry ({m},{p}) outside the polarization cone"),
                });
            }
        }
    }
    for p in 0..h.rows() {
        for n in 0..h.cols() {
            if h[(p, n)] < 0.0 {
                return Err(UniquenessError::InfeasibleFactors {
                    what: format!("activation entry ({p},{n}) is negative"),
                });
            }
        }
    }
    Ok(())
}

/// Compute the admissible `(α, β)` intervals for a feasible rank-2 pair:
/// the non-negativity bounds intersected with every per-row polarization
/// bound, keeping the connected component of the identity.
pub fn admissibility_report(
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<AdmissibilityReport, UniquenessError> {
    if w.cols() != 2 {
        return Err(UniquenessError::RankTwoRequired { got: w.cols() });
    }
    validate_factors(w, h)?;
    let (nmf_alpha, nmf_beta) = nmf_intervals(&w.real_part(), h)?;

    let mut pol_alpha_rows = Vec::with_capacity(w.rows());
    let mut pol_beta_rows = Vec::with_capacity(w.rows());
    let mut excluded = 0;
    let mut qnmf_alpha = nmf_alpha;
    let mut qnmf_beta = nmf_beta;
    for m in 0..w.rows() {
        let row = RowPolarization::from_sources(w[(m, 0)], w[(m, 1)]);
        let (alpha_comp, alpha_excl) =
            component_containing(&polarization_inequality_alpha(&row).solve(), 0.0, 1e-9);
        let (beta_comp, beta_excl) =
            component_containing(&polarization_inequality_beta(&row).solve(), 0.0, 1e-9);
        excluded += alpha_excl + beta_excl;
        let alpha_iv = alpha_comp.unwrap_or_else(|| Interval::point(0.0));
        let beta_iv = beta_comp.unwrap_or_else(|| Interval::point(0.0));
        qnmf_alpha = qnmf_alpha.intersect(&alpha_iv);
        qnmf_beta = qnmf_beta.intersect(&beta_iv);
        pol_alpha_rows.push(alpha_iv);
        pol_beta_rows.push(beta_iv);
    }

    let unique = qnmf_alpha.is_zero_point(1e-9) && qnmf_beta.is_zero_point(1e-9);
    Ok(AdmissibilityReport {
        nmf_alpha,
        nmf_beta,
        pol_alpha_rows,
        pol_beta_rows,
        qnmf_alpha,
        qnmf_beta,
        unique,
        excluded_components: excluded,
    })
}

// ---------------------------------------------------------------------------
// Sufficient condition (rank 2)
// ---------------------------------------------------------------------------

/// Verdict of the rank-2 sufficient uniqueness test.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientVerdict {
    pub holds: bool,
    /// Row pair `(m1, m2)` witnessing the polarization condition.
    pub polarization_witness: Option<(usize, usize)>,
    /// Column pair `(n1, n2)` witnessing the activation zero pattern.
    pub activation_witness: Option<(usize, usize)>,
    /// A row where both sources are fully polarized with distinct axes —
    /// the collapsed single-row form of the polarization condition.
    pub collapsed_witness: Option<usize>,
    /// The intensity inequality can be read with the axis of the other
    /// witness row; set when that reading changes the verdict.
    pub readings_disagree: bool,
}

fn zero_threshold(max_abs: f64) -> f64 {
    ZERO_REL * max_abs.max(1.0)
}

/// Polarization state `Φ·μ` distance between source 2's state and source
/// 1's axis (and vice versa).
fn state_differs(phi_other: f64, mu_other: Quaternion, mu_this: Quaternion) -> bool {
    (mu_other.scale(phi_other) - mu_this).norm() > STATE_TOL
}

/// The intensity inequality of the sufficient condition:
/// `i_this >= 1/2 · (1 - Φ_other²) / (1 - Φ_other·⟨μ_this, μ_other⟩) · i_other`.
fn intensity_ok(i_this: f64, i_other: f64, phi_other: f64, inner: f64) -> bool {
    let num = 1.0 - phi_other * phi_other;
    if num <= 2.0 * POL_TOL {
        // other source fully polarized: the bound collapses to zero
        return i_this >= 0.0;
    }
    let den = 1.0 - phi_other * inner;
    if den <= 0.0 {
        return false;
    }
    i_this >= 0.5 * num / den * i_other
}

/// Search for the rank-2 sufficient uniqueness pattern: a row where
/// source 1 is fully polarized with a clear intensity margin over source
/// 2 (and a row with the roles swapped), plus a column pair where each
/// source is active alone.
pub fn check_sufficient(
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<SufficientVerdict, UniquenessError> {
    if w.cols() != 2 || h.rows() != 2 {
        return Err(UniquenessError::RankTwoRequired {
            got: w.cols().max(h.rows()),
        });
    }
    let rows: Vec<RowPolarization> = (0..w.rows())
        .map(|m| RowPolarization::from_sources(w[(m, 0)], w[(m, 1)]))
        .collect();

    // first block at m1: source 1 fully polarized, distinct state, margin
    let block_one = |m1: usize, inner: f64| -> bool {
        let r = &rows[m1];
        (r.phi1 - 1.0).abs() <= POL_TOL
            && state_differs(r.phi2, r.mu2, r.mu1)
            && intensity_ok(r.i1, r.i2, r.phi2, inner)
    };
    let block_two = |m2: usize| -> bool {
        let r = &rows[m2];
        (r.phi2 - 1.0).abs() <= POL_TOL
            && state_differs(r.phi1, r.mu1, r.mu2)
            && intensity_ok(r.i2, r.i1, r.phi1, inner_axis_raw(r.mu2, r.mu1))
    };

    let mut witness_same = None;
    let mut witness_mixed = None;
    for m1 in 0..rows.len() {
        for m2 in 0..rows.len() {
            if !block_two(m2) {
                continue;
            }
            // same-row reading of the first intensity inequality
            let same = block_one(m1, inner_axis_raw(rows[m1].mu1, rows[m1].mu2));
            // reading with the other witness row's axis for source 2
            let mixed = block_one(m1, inner_axis_raw(rows[m1].mu1, rows[m2].mu2));
            if same && witness_same.is_none() {
                witness_same = Some((m1, m2));
            }
            if mixed && witness_mixed.is_none() {
                witness_mixed = Some((m1, m2));
            }
        }
    }

    let collapsed_witness = (0..rows.len()).find(|&m| {
        let r = &rows[m];
        (r.phi1 - 1.0).abs() <= POL_TOL
            && (r.phi2 - 1.0).abs() <= POL_TOL
            && (r.mu1 - r.mu2).norm() > STATE_TOL
            && r.i1 > 0.0
            && r.i2 > 0.0
    });

    let h_zero = zero_threshold(h.max_abs());
    let mut activation_witness = None;
    'outer: for n1 in 0..h.cols() {
        if h[(0, n1)] > h_zero && h[(1, n1)].abs() <= h_zero {
            for n2 in 0..h.cols() {
                if n2 != n1 && h[(1, n2)] > h_zero && h[(0, n2)].abs() <= h_zero {
                    activation_witness = Some((n1, n2));
                    break 'outer;
                }
            }
        }
    }

    let holds = witness_same.is_some() && activation_witness.is_some();
    let holds_mixed = witness_mixed.is_some() && activation_witness.is_some();
    Ok(SufficientVerdict {
        holds,
        polarization_witness: witness_same,
        activation_witness,
        collapsed_witness,
        readings_disagree: holds != holds_mixed,
    })
}

// ---------------------------------------------------------------------------
// Necessary condition (any rank, non-vanishing sources)
// ---------------------------------------------------------------------------

/// Which half of the necessary condition a pair violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NecessaryCondition {
    /// No row where source `p` is fully polarized with a state distinct
    /// from source `q`.
    SourcePolarization,
    /// No column where source `q` is active while source `p` is not.
    ActivationSupport,
}

/// Verdict of the necessary-condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryVerdict {
    pub holds: bool,
    /// First ordered source pair `(p, q)` violating a condition.
    pub violation: Option<(usize, usize, NecessaryCondition)>,
}

/// For non-vanishing sources, uniqueness requires for every ordered pair
/// `(p, q)`: a row where `p` is fully polarized with a state different
/// from `q`'s, and a column where `p` is inactive while `q` is active.
/// Errors when any source intensity is not strictly positive, since the
/// condition does not apply there.
pub fn check_necessary(
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<NecessaryVerdict, UniquenessError> {
    if w.cols() != h.rows() {
        return Err(UniquenessError::ShapeMismatch {
            w: w.shape(),
            h: h.shape(),
        });
    }
    let p_dim = w.cols();
    for m in 0..w.rows() {
        for p in 0..p_dim {
            if w[(m, p)].re <= 0.0 {
                return Err(UniquenessError::VanishingSource { m, p });
            }
        }
    }
    let descriptors: Vec<Vec<PolarizationDescriptor>> = (0..w.rows())
        .map(|m| {
            (0..p_dim)
                .map(|p| PolarizationDescriptor::from_quaternion(w[(m, p)]))
                .collect()
        })
        .collect();
    let h_zero = zero_threshold(h.max_abs());

    for p in 0..p_dim {
        for q in 0..p_dim {
            if p == q {
                continue;
            }
            let pol_ok = (0..w.rows()).any(|m| {
                let dp = &descriptors[m][p];
                let dq = &descriptors[m][q];
                (dp.dop - 1.0).abs() <= POL_TOL && state_differs(dq.dop, dq.axis, dp.axis)
            });
            if !pol_ok {
                return Ok(NecessaryVerdict {
                    holds: false,
                    violation: Some((p, q, NecessaryCondition::SourcePolarization)),
                });
            }
            let act_ok = (0..h.cols())
                .any(|n| h[(p, n)].abs() <= h_zero && h[(q, n)] > h_zero);
            if !act_ok {
                return Ok(NecessaryVerdict {
                    holds: false,
                    violation: Some((p, q, NecessaryCondition::ActivationSupport)),
                });
            }
        }
    }
    Ok(NecessaryVerdict {
        holds: true,
        violation: None,
    })
}

// ---------------------------------------------------------------------------
// Separability (sufficient at any rank, via the real parts)
// ---------------------------------------------------------------------------

/// Separability pattern search result.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityVerdict {
    /// Rows of `Re W` contain a scaled permutation of the identity.
    pub source_side: bool,
    /// Columns of `H` contain a scaled permutation of the identity.
    pub activation_side: bool,
    /// Both sides separable; this makes the real-part factorization — and
    /// therefore the full factorization — essentially unique.
    pub both: bool,
    /// One pure row per source, when found.
    pub source_rows: Option<Vec<usize>>,
    /// One pure column per source, when found.
    pub activation_cols: Option<Vec<usize>>,
}

fn pure_pattern(m: &RealMatrix, across_rows: bool) -> Option<Vec<usize>> {
    let (outer, inner) = if across_rows {
        (m.rows(), m.cols())
    } else {
        (m.cols(), m.rows())
    };
    let at = |o: usize, i: usize| if across_rows { m[(o, i)] } else { m[(i, o)] };
    let zero = zero_threshold(m.max_abs());
    let mut witness: Vec<Option<usize>> = vec![None; inner];
    for o in 0..outer {
        let mut sole = None;
        for i in 0..inner {
            if at(o, i) > zero {
                if sole.is_some() {
                    sole = None;
                    break;
                }
                sole = Some(i);
            }
        }
        if let Some(i) = sole {
            if witness[i].is_none() {
                witness[i] = Some(o);
            }
        }
    }
    witness.into_iter().collect()
}

/// Detect the separability pattern on both factors: `Re W` rows and `H`
/// columns each containing a scaled permutation of the identity. A
/// positive result certifies essential uniqueness of the factorization
/// through its real-part subproblem.
pub fn check_separability(
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> SeparabilityVerdict {
    let source_rows = pure_pattern(&w.real_part(), true);
    let activation_cols = pure_pattern(h, false);
    let source_side = source_rows.is_some();
    let activation_side = activation_cols.is_some();
    SeparabilityVerdict {
        source_side,
        activation_side,
        both: source_side && activation_side,
        source_rows,
        activation_cols,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stokes::random_unit_axis;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn source_from(i: f64, phi: f64, mu: Quaternion) -> Quaternion {
        PolarizationDescriptor::new(i, phi, mu).unwrap().to_quaternion()
    }

    #[test]
    fn interval_basics() {
        let a = Interval::closed(-1.0, 2.0);
        assert!(a.contains(0.0, 0.0));
        assert!(!a.contains(2.5, 0.0));
        let b = Interval::closed(0.5, 3.0);
        let c = a.intersect(&b);
        assert_eq!((c.lo, c.hi), (0.5, 2.0));
        assert!(Interval::point(0.0).is_zero_point(1e-9));
        assert!(!Interval::closed(0.0, 0.1).is_zero_point(1e-9));
    }

    #[test]
    fn quadratic_solution_cases() {
        let sets = QuadraticInequality::new(1.0, 0.0, -1.0).solve();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].hi, -1.0);
        assert_eq!(sets[1].lo, 1.0);

        let sets = QuadraticInequality::new(0.0, 2.0, 0.0).solve();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].lo, 0.0);
        assert!(sets[0].hi.is_infinite());

        let sets = QuadraticInequality::new(0.0, 0.0, 0.0).solve();
        assert_eq!(sets, vec![Interval::all()]);

        let sets = QuadraticInequality::new(-1.0, 0.0, 4.0).solve();
        assert_eq!(sets.len(), 1);
        assert_eq!((sets[0].lo, sets[0].hi), (-2.0, 2.0));

        assert!(QuadraticInequality::new(-1.0, 0.0, -1.0).solve().is_empty());
    }

    #[test]
    fn quadratic_matches_direct_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..200 {
            let q = QuadraticInequality::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let sets = q.solve();
            let mut t = -5.0;
            while t <= 5.0 {
                let truth = q.a2 * t * t + q.a1 * t + q.a0 >= 0.0;
                let got = sets.iter().any(|iv| iv.contains(t, 0.0));
                // allow disagreement only within a hair of a root
                let margin = (q.a2 * t * t + q.a1 * t + q.a0).abs();
                if margin > 1e-9 {
                    assert_eq!(truth, got, "t = {t}, q = {q:?}");
                }
                t += 0.01;
            }
        }
    }

    #[test]
    fn inner_axis_examples() {
        assert_eq!(inner_axis(Quaternion::I, Quaternion::I).unwrap(), 1.0);
        assert_eq!(inner_axis(Quaternion::I, Quaternion::J).unwrap(), 0.0);
        let mu = Quaternion::pure(0.6, 0.8, 0.0);
        assert!((inner_axis(mu, -mu).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(
            inner_axis(Quaternion::pure(2.0, 0.0, 0.0), Quaternion::I),
            Err(UniquenessError::NonUnitAxis { .. })
        ));
        assert!(matches!(
            inner_axis(Quaternion::new(0.5, 1.0, 0.0, 0.0), Quaternion::I),
            Err(UniquenessError::NonUnitAxis { .. })
        ));
    }

    #[test]
    fn nmf_interval_examples() {
        // identity activations force both upper bounds to zero
        let re_w = RealMatrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let h = RealMatrix::identity(2);
        let (a, b) = nmf_intervals(&re_w, &h).unwrap();
        assert_eq!(a.hi, 0.0);
        assert_eq!(b.hi, 0.0);
        // intensity columns [1,2] / [2,1] put both lower bounds at -1
        assert_eq!(a.lo, -1.0);
        assert_eq!(b.lo, -1.0);

        // source 1 dominating everywhere leaves alpha unbounded below
        let re_w = RealMatrix::from_vec(2, 2, vec![3.0, 1.0, 4.0, 2.0]).unwrap();
        let h = RealMatrix::from_vec(2, 3, vec![1.0, 0.5, 0.2, 0.3, 0.8, 0.9]).unwrap();
        let (a, _b) = nmf_intervals(&re_w, &h).unwrap();
        assert!(a.lo.is_infinite() && a.lo < 0.0);

        // a fully inactive pixel is an error
        let h = RealMatrix::from_vec(2, 2, vec![1.0, 0.0, 0.5, 0.0]).unwrap();
        assert!(matches!(
            nmf_intervals(&re_w, &h),
            Err(UniquenessError::ZeroActivationColumn { n: 1 })
        ));
    }

    /// Grid-scan oracle for the non-negativity bounds: feasibility of the
    /// transformed pair at (alpha, 0) and (0, beta) checking only signs.
    fn nmf_scan_feasible(re_w: &RealMatrix, h: &RealMatrix, alpha: f64, beta: f64) -> bool {
        let t = TransformT::new(alpha, beta);
        let wt = re_w.matmul(&t.matrix()).unwrap();
        let ht = t.inverse_matrix().unwrap().matmul(h).unwrap();
        wt.iter().all(|&v| v >= -1e-12) && ht.iter().all(|&v| v >= -1e-12)
    }

    #[test]
    fn nmf_intervals_agree_with_grid_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let re_w = RealMatrix::from_fn(6, 2, |_, _| rng.random_range(0.1..2.0));
            let h = RealMatrix::from_fn(2, 8, |_, _| rng.random_range(0.05..1.0));
            let (ia, ib) = nmf_intervals(&re_w, &h).unwrap();
            let step = 1e-4;
            let lo = ia.lo.max(-5.0);
            let mut alpha = lo;
            while alpha <= (ia.hi + 10.0 * step).min(0.99) {
                let feasible = nmf_scan_feasible(&re_w, &h, alpha, 0.0);
                let member = ia.contains(alpha, 0.0);
                let near_edge =
                    (alpha - ia.lo).abs() <= step || (alpha - ia.hi).abs() <= step;
                if !near_edge {
                    assert_eq!(feasible, member, "alpha = {alpha}");
                }
                alpha += step;
            }
            let lo = ib.lo.max(-5.0);
            let mut beta = lo;
            while beta <= (ib.hi + 10.0 * step).min(0.99) {
                let feasible = nmf_scan_feasible(&re_w, &h, 0.0, beta);
                let member = ib.contains(beta, 0.0);
                let near_edge = (beta - ib.lo).abs() <= step || (beta - ib.hi).abs() <= step;
                if !near_edge {
                    assert_eq!(feasible, member, "beta = {beta}");
                }
                beta += step;
            }
        }
    }

    #[test]
    fn polarization_coefficients_vanish_for_identical_full_states() {
        let mu = random_unit_axis(&mut ChaCha8Rng::seed_from_u64(42));
        let row = RowPolarization {
            i1: 1.3,
            phi1: 1.0,
            mu1: mu,
            i2: 0.7,
            phi2: 1.0,
            mu2: mu,
        };
        let q = polarization_inequality_alpha(&row);
        let scale = row.i1 * row.i2;
        assert!(q.a2.abs() <= 1e-12 * scale);
        assert!(q.a1.abs() <= 1e-12 * scale);
        assert!(q.a0.abs() <= 1e-12 * scale);
        assert_eq!(q.solve(), vec![Interval::all()]);
    }

    #[test]
    fn fully_polarized_first_source_reduces_coefficients() {
        // with Φ1 = 1 the constant term drops and the remaining
        // coefficients match the simplified single-row form
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let row = RowPolarization {
                i1: rng.random_range(0.1..2.0),
                phi1: 1.0,
                mu1: random_unit_axis(&mut rng),
                i2: rng.random_range(0.1..2.0),
                phi2: rng.random_range(0.0..0.99),
                mu2: random_unit_axis(&mut rng),
            };
            let q = polarization_inequality_alpha(&row);
            let s = inner_axis_raw(row.mu1, row.mu2);
            let g = 1.0 - row.phi2 * s;
            let simp_a2 =
                row.i2 * row.i2 * (1.0 - row.phi2 * row.phi2) - 2.0 * row.i1 * row.i2 * g;
            let simp_a1 = 2.0 * row.i1 * row.i2 * g;
            assert_eq!(q.a0, 0.0);
            assert_eq!(q.a2, simp_a2);
            assert_eq!(q.a1, simp_a1);
        }
    }

    /// Scan oracle for one row's polarization constraint in alpha.
    fn pol_scan_alpha(row: &RowPolarization, alpha: f64) -> bool {
        let w1 = source_from(row.i1, row.phi1.min(1.0), row.mu1);
        let w2 = source_from(row.i2, row.phi2.min(1.0), row.mu2);
        let wt = w1.scale(1.0 - alpha) + w2.scale(alpha);
        wt.imag_norm_sqr() <= wt.re * wt.re * (1.0 + 1e-12)
    }

    #[test]
    fn polarization_inequality_matches_grid_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..30 {
            let row = RowPolarization {
                i1: rng.random_range(0.2..2.0),
                phi1: rng.random_range(0.1..0.95),
                mu1: random_unit_axis(&mut rng),
                i2: rng.random_range(0.2..2.0),
                phi2: rng.random_range(0.1..0.95),
                mu2: random_unit_axis(&mut rng),
            };
            let sets = polarization_inequality_alpha(&row).solve();
            let step = 1e-4;
            let mut alpha = -3.0;
            while alpha <= 3.0 {
                let truth = pol_scan_alpha(&row, alpha);
                let got = sets.iter().any(|iv| iv.contains(alpha, 0.0));
                let near_edge = sets
                    .iter()
                    .any(|iv| (alpha - iv.lo).abs() <= step || (alpha - iv.hi).abs() <= step);
                if !near_edge {
                    assert_eq!(truth, got, "alpha = {alpha}, row = {row:?}");
                }
                alpha += step;
            }
        }
    }

    /// Two fully polarized sources with distinct axes plus pure-column
    /// activations: the canonical unique instance.
    fn unique_instance() -> (QuaternionMatrix, RealMatrix) {
        let mu1 = Quaternion::pure(1.0, 0.0, 0.0);
        let mu2 = Quaternion::pure(0.0, 1.0, 0.0);
        let w = QuaternionMatrix::from_fn(4, 2, |m, p| {
            let i = 1.0 + 0.2 * m as f64;
            if p == 0 {
                source_from(i, 1.0, mu1)
            } else {
                source_from(1.5 - 0.1 * m as f64, 1.0, mu2)
            }
        });
        let h =
            RealMatrix::from_vec(2, 4, vec![1.0, 0.0, 0.5, 0.2, 0.0, 1.0, 0.4, 0.9]).unwrap();
        (w, h)
    }

    #[test]
    fn admissibility_collapses_for_unique_instance() {
        let (w, h) = unique_instance();
        let report = admissibility_report(&w, &h).unwrap();
        assert!(report.unique, "{report:?}");
        assert!(report.qnmf_alpha.is_zero_point(1e-9));
        assert!(report.qnmf_beta.is_zero_point(1e-9));
        // identity is always admissible
        assert!(report.qnmf_alpha.contains(0.0, 1e-9));
        assert!(report.qnmf_beta.contains(0.0, 1e-9));

        let sufficient = check_sufficient(&w, &h).unwrap();
        assert!(sufficient.holds);
        assert!(sufficient.collapsed_witness.is_some());
        assert!(!sufficient.readings_disagree);

        let necessary = check_necessary(&w, &h).unwrap();
        assert!(necessary.holds);
    }

    /// Partially polarized, strictly positive instance: not unique, with
    /// the polarization constraint strictly narrowing the intensity-only
    /// bounds.
    fn ambiguous_instance() -> (QuaternionMatrix, RealMatrix) {
        let mu1 = Quaternion::pure(1.0, 0.0, 0.0);
        let mu2 = Quaternion::pure(0.0, 0.6, 0.8);
        let w = QuaternionMatrix::from_fn(6, 2, |m, p| {
            let ramp = 0.9 + 0.04 * m as f64;
            if p == 0 {
                source_from(1.0 + 0.05 * m as f64, 0.8, mu1)
            } else {
                source_from((1.0 + 0.05 * m as f64) * ramp, 0.7, mu2)
            }
        });
        let h = RealMatrix::from_fn(2, 5, |p, n| 0.3 + 0.1 * (p + n) as f64);
        (w, h)
    }

    #[test]
    fn admissibility_strictly_narrows_for_partial_polarization() {
        let (w, h) = ambiguous_instance();
        let report = admissibility_report(&w, &h).unwrap();
        assert!(!report.unique);
        assert!(report.qnmf_alpha.subset_of(&report.nmf_alpha, 1e-12));
        assert!(report.qnmf_beta.subset_of(&report.nmf_beta, 1e-12));
        // strictly narrower on the lower side; upper bounds coincide since
        // they come from the activation ratios in both analyses
        assert!(report.qnmf_alpha.lo > report.nmf_alpha.lo);
        assert!(report.qnmf_beta.lo > report.nmf_beta.lo);
        assert!((report.qnmf_alpha.hi - report.nmf_alpha.hi).abs() <= 1e-12);
        assert!(report.qnmf_alpha.width() < report.nmf_alpha.width());
    }

    #[test]
    fn admissibility_with_reference_polarization_parameters() {
        // constant polarization states, smooth positive stand-in spectra
        let mu1 = Quaternion::pure(0.87, -0.25, -0.43).normalized().unwrap();
        let mu2 = Quaternion::pure(-0.71, 0.44, 0.55).normalized().unwrap();
        let m_dim = 32;
        let w = QuaternionMatrix::from_fn(m_dim, 2, |m, p| {
            let x = m as f64 / (m_dim - 1) as f64;
            if p == 0 {
                let i = 0.6 + (-(x - 0.35) * (x - 0.35) / 0.02).exp();
                source_from(i, 0.7, mu1)
            } else {
                let i = 0.5 + 0.9 * (-(x - 0.6) * (x - 0.6) / 0.03).exp();
                source_from(i, 0.5, mu2)
            }
        });
        let h = RealMatrix::from_fn(2, 9, |p, n| 0.2 + 0.08 * ((p + 2) * (n + 1) % 7) as f64);
        let report = admissibility_report(&w, &h).unwrap();
        assert!(!report.unique);
        for iv in [report.qnmf_alpha, report.qnmf_beta] {
            assert!(iv.lo.is_finite() && iv.hi.is_finite());
            assert!(iv.lo < -1e-6, "{iv}");
            assert!(iv.hi > 1e-6, "{iv}");
        }
        assert!(report.qnmf_alpha.width() < report.nmf_alpha.width());
        assert!(report.qnmf_beta.width() < report.nmf_beta.width());
    }

    #[test]
    fn sufficient_fails_without_full_polarization_or_pure_columns() {
        let (w, h) = ambiguous_instance();
        let verdict = check_sufficient(&w, &h).unwrap();
        assert!(!verdict.holds);
        assert!(verdict.polarization_witness.is_none());

        // full polarization but strictly positive activations
        let (w, _) = unique_instance();
        let h = RealMatrix::from_fn(2, 4, |p, n| 0.2 + 0.1 * (p + n) as f64);
        let verdict = check_sufficient(&w, &h).unwrap();
        assert!(!verdict.holds);
        assert!(verdict.polarization_witness.is_some());
        assert!(verdict.activation_witness.is_none());
    }

    #[test]
    fn necessary_verdicts() {
        // partially polarized everywhere: the polarization half fails
        let (w, h) = ambiguous_instance();
        let verdict = check_necessary(&w, &h).unwrap();
        assert!(!verdict.holds);
        assert!(matches!(
            verdict.violation,
            Some((_, _, NecessaryCondition::SourcePolarization))
        ));

        // fully polarized but strictly positive activations: support fails
        let (w, _) = unique_instance();
        let h = RealMatrix::from_fn(2, 4, |p, n| 0.2 + 0.1 * (p + n) as f64);
        let verdict = check_necessary(&w, &h).unwrap();
        assert!(!verdict.holds);
        assert!(matches!(
            verdict.violation,
            Some((_, _, NecessaryCondition::ActivationSupport))
        ));

        // vanishing sources are out of scope for the check
        let w = QuaternionMatrix::zeros(2, 2);
        let h = RealMatrix::identity(2);
        assert!(matches!(
            check_necessary(&w, &h),
            Err(UniquenessError::VanishingSource { .. })
        ));
    }

    #[test]
    fn uniqueness_implies_necessary_conditions() {
        // contrapositive check on the unique instance (non-vanishing)
        let (w, h) = unique_instance();
        let report = admissibility_report(&w, &h).unwrap();
        let necessary = check_necessary(&w, &h).unwrap();
        assert!(report.unique);
        assert!(necessary.holds);
    }

    #[test]
    fn separability_detection() {
        // identity block inside H
        let h = RealMatrix::from_vec(
            2,
            4,
            vec![2.0, 0.0, 0.3, 0.1, 0.0, 1.5, 0.2, 0.4],
        )
        .unwrap();
        let w = QuaternionMatrix::from_fn(3, 2, |m, p| {
            Quaternion::from_real(1.0 + (m + p) as f64)
        });
        let verdict = check_separability(&w, &h);
        assert!(verdict.activation_side);
        assert!(!verdict.source_side);
        assert!(!verdict.both);

        // strictly positive on both sides
        let w = QuaternionMatrix::from_fn(3, 2, |_, _| Quaternion::from_real(1.0));
        let h = RealMatrix::from_fn(2, 3, |_, _| 0.5);
        let verdict = check_separability(&w, &h);
        assert!(!verdict.both);

        // permuted scaled identity rows embedded among dense rows
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let mut w = QuaternionMatrix::from_fn(5, 3, |_, _| {
            Quaternion::from_real(rng.random_range(0.5..1.0))
        });
        w[(1, 0)] = Quaternion::ZERO;
        w[(1, 1)] = Quaternion::ZERO;
        w[(1, 2)] = Quaternion::from_real(2.0);
        w[(3, 0)] = Quaternion::from_real(0.7);
        w[(3, 1)] = Quaternion::ZERO;
        w[(3, 2)] = Quaternion::ZERO;
        w[(4, 0)] = Quaternion::ZERO;
        w[(4, 1)] = Quaternion::from_real(1.1);
        w[(4, 2)] = Quaternion::ZERO;
        let h = RealMatrix::from_vec(
            3,
            4,
            vec![
                1.0, 0.0, 0.0, 0.3, //
                0.0, 2.0, 0.0, 0.4, //
                0.0, 0.0, 0.5, 0.2,
            ],
        )
        .unwrap();
        let verdict = check_separability(&w, &h);
        assert!(verdict.both, "{verdict:?}");
        assert_eq!(verdict.source_rows, Some(vec![3, 4, 1]));
    }

    #[test]
    fn transform_feasibility_roundtrip() {
        let (w, h) = ambiguous_instance();
        let report = admissibility_report(&w, &h).unwrap();
        // interior alpha values are feasible under the direct transform
        let mid = 0.5 * (report.qnmf_alpha.lo + report.qnmf_alpha.hi);
        assert!(transform_feasible(&w, &h, TransformT::new(mid, 0.0), 1e-9).unwrap());
        // far outside is infeasible
        let out = report.nmf_alpha.lo - 0.5;
        assert!(!transform_feasible(&w, &h, TransformT::new(out, 0.0), 1e-9).unwrap());
    }

    #[test]
    fn report_rejects_bad_inputs() {
        let w = QuaternionMatrix::zeros(3, 3);
        let h = RealMatrix::zeros(3, 4);
        assert!(matches!(
            admissibility_report(&w, &h),
            Err(UniquenessError::RankTwoRequired { got: 3 })
        ));

        let mut w = QuaternionMatrix::zeros(2, 2);
        w[(0, 0)] = Quaternion::from_real(-1.0);
        let h = RealMatrix::identity(2);
        assert!(matches!(
            admissibility_report(&w, &h),
            Err(UniquenessError::InfeasibleFactors { .. })
        ));
    }
}
