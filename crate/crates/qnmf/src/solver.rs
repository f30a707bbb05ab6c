//! Alternating least squares for quaternion non-negative matrix
//! factorization.
//!
//! Solves `min ||X - WH||²_F` with `W` entry-wise in the polarization
//! cone and `H` entry-wise non-negative, by alternating the closed-form
//! unconstrained least-squares updates
//!
//! ```text
//!   H <- clip( (Re[Wᵀ W̄])⁻¹ Re[Wᵀ X̄] )
//!   W <- project( X Hᵀ (H Hᵀ)⁻¹ )
//! ```
//!
//! where `clip` is the entry-wise non-negative projection and `project`
//! the entry-wise cone projection. The unconstrained half-steps are exact
//! minimizers; projections may break monotone descent, which is the
//! documented trade-off of this scheme.

use std::fmt;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::matrix::{MatrixError, QuaternionMatrix, RealMatrix};
use crate::quat::Quaternion;
use crate::stokes::{in_cone, project_cone, project_nonneg, DEFAULT_TOL};

/// Errors from the factorization engine.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Matrix(MatrixError),
    /// The residual stopped being finite; carries the offending iteration.
    NonFiniteResidual { iteration: usize },
    /// Factor pairs with different ranks cannot be aligned.
    RankMismatch { expected: usize, got: usize },
    /// Every restart of a multi-restart run failed.
    AllRestartsFailed { first: String },
    /// Factors violate their feasibility constraints.
    InfeasibleFactors { what: String },
    /// Invalid solver configuration.
    BadConfig { what: String },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Matrix(e) => write!(f, "{e}"),
            SolverError::NonFiniteResidual { iteration } => {
                write!(f, "non-finite residual at iteration {iteration}")
            }
            SolverError::RankMismatch { expected, got } => {
                write!(f, "rank mismatch: expected {expected}, got {got}")
            }
            SolverError::AllRestartsFailed { first } => {
                write!(f, "every restart failed; first error: {first}")
            }
            SolverError::InfeasibleFactors { what } => write!(f, "infeasible factors: {what}"),
            SolverError::BadConfig { what } => write!(f, "bad solver config: {what}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<MatrixError> for SolverError {
    fn from(e: MatrixError) -> Self {
        SolverError::Matrix(e)
    }
}

// ---------------------------------------------------------------------------
// Factor pairs
// ---------------------------------------------------------------------------

/// A factor pair `(W, H)`: sources `W` (M x P, cone-constrained) and
/// activations `H` (P x N, non-negative).
#[derive(Debug, Clone, PartialEq)]
pub struct QnmfFactors {
    pub w: QuaternionMatrix,
    pub h: RealMatrix,
}

impl QnmfFactors {
    pub fn new(w: QuaternionMatrix, h: RealMatrix) -> Result<Self, SolverError> {
        if w.cols() != h.rows() {
            return Err(SolverError::Matrix(MatrixError::DimMismatch {
                op: "factor pair",
                lhs: w.shape(),
                rhs: h.shape(),
            }));
        }
        Ok(QnmfFactors { w, h })
    }

    pub fn rank(&self) -> usize {
        self.w.cols()
    }

    /// Check cone membership of every source entry and non-negativity of
    /// every activation entry.
    pub fn validate(&self, tol: f64) -> Result<(), SolverError> {
        for m in 0..self.w.rows() {
            for p in 0..self.w.cols() {
                if !in_cone(self.w[(m, p)], tol) {
                    return Err(SolverError::InfeasibleFactors {
                        what: format!("source entry ({m},{p}) outside the polarization cone"),
                    });
                }
            }
        }
        for p in 0..self.h.rows() {
            for n in 0..self.h.cols() {
                if self.h[(p, n)] < 0.0 {
                    return Err(SolverError::InfeasibleFactors {
                        what: format!("activation entry ({p},{n}) is negative"),
                    });
                }
            }
        }
        Ok(())
    }

    /// The product `WH`.
    pub fn reconstruct(&self) -> Result<QuaternionMatrix, SolverError> {
        Ok(self.w.matmul_real(&self.h)?)
    }
}

/// Solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Number of sources `P`.
    pub rank: usize,
    /// Iteration cap.
    pub max_iters: usize,
    /// Stop when `|ε_r - ε_{r-1}|` falls below this, where `ε_r` is the
    /// relative squared residual.
    pub stop_delta: f64,
    /// Seed for the random initialization.
    pub seed: u64,
    /// Independent restarts; seeds are `seed, seed+1, ...`.
    pub restarts: usize,
    /// Absolute ridge added to the normal matrices. Zero means exact
    /// updates; singular systems are then reported, never regularized
    /// silently. A reasonable opt-in is `1e-10` times the Gram trace.
    pub gram_ridge: f64,
}

impl SolverConfig {
    pub fn new(rank: usize) -> Self {
        SolverConfig {
            rank,
            max_iters: 300,
            stop_delta: 1e-5,
            seed: 0,
            restarts: 1,
            gram_ridge: 0.0,
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.rank < 1 {
            return Err(SolverError::BadConfig {
                what: "rank must be at least 1".into(),
            });
        }
        if !(self.stop_delta > 0.0) {
            return Err(SolverError::BadConfig {
                what: format!("stop_delta must be positive, got {}", self.stop_delta),
            });
        }
        if self.gram_ridge < 0.0 {
            return Err(SolverError::BadConfig {
                what: format!("gram_ridge must be non-negative, got {}", self.gram_ridge),
            });
        }
        if self.max_iters < 1 || self.restarts < 1 {
            return Err(SolverError::BadConfig {
                what: "max_iters and restarts must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Outcome of a single solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub factors: QnmfFactors,
    /// Relative squared residual `ε_r` per iteration, starting at the
    /// initialization (`iterations + 1` values).
    pub residual_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Seed this run was initialized from.
    pub seed: u64,
    /// Activation rows that ended entirely zero (stalled sources); left
    /// as-is rather than reseeded.
    pub zero_activation_rows: Vec<usize>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_trace.last().expect("trace is never empty")
    }
}

/// All restart outcomes plus the index of the selected one.
#[derive(Debug, Clone)]
pub struct MultiRestartReport {
    /// Successful restarts in seed order.
    pub reports: Vec<SolveReport>,
    pub best_index: usize,
    /// Restarts that aborted (degenerate Gram, non-finite residual), as
    /// `(seed, error)` pairs. A stalled restart is recorded, not fatal.
    pub failures: Vec<(u64, String)>,
}

impl MultiRestartReport {
    pub fn best(&self) -> &SolveReport {
        &self.reports[self.best_index]
    }
}

// ---------------------------------------------------------------------------
// Cost and gradients
// ---------------------------------------------------------------------------

fn check_conformable(
    x: &QuaternionMatrix,
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<(), SolverError> {
    if w.cols() != h.rows() || x.rows() != w.rows() || x.cols() != h.cols() {
        return Err(SolverError::Matrix(MatrixError::DimMismatch {
            op: "cost",
            lhs: x.shape(),
            rhs: (w.rows(), h.cols()),
        }));
    }
    Ok(())
}

/// Euclidean cost `||X - WH||²_F`.
pub fn euclidean_cost(
    x: &QuaternionMatrix,
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<f64, SolverError> {
    check_conformable(x, w, h)?;
    let (m_dim, n_dim) = x.shape();
    let p_dim = w.cols();
    let mut cost = 0.0;
    for m in 0..m_dim {
        for n in 0..n_dim {
            // accumulate the product in the same order as matmul_real so
            // exact data yields an exactly zero cost
            let mut prod = Quaternion::ZERO;
            for p in 0..p_dim {
                prod += w[(m, p)].scale(h[(p, n)]);
            }
            cost += (x[(m, n)] - prod).norm_sqr();
        }
    }
    Ok(cost)
}

/// Relative squared residual `||X - WH||²_F / ||X||²_F`.
pub fn relative_error(
    x: &QuaternionMatrix,
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<f64, SolverError> {
    let cost = euclidean_cost(x, w, h)?;
    let denom = x.frobenius_sq();
    Ok(if denom > 0.0 { cost / denom } else { cost })
}

/// Gradient of the cost with respect to `H`:
/// `-2 Re[Wᵀ conj(X - WH)]`.
pub fn grad_h(
    x: &QuaternionMatrix,
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<RealMatrix, SolverError> {
    check_conformable(x, w, h)?;
    let residual = x.sub(&w.matmul_real(h)?)?;
    let prod = w.transpose().matmul(&residual.conj())?;
    Ok(prod.real_part().scale(-2.0))
}

/// Gradient of the cost with respect to the conjugate source factor:
/// `-1/2 (X - WH) Hᵀ`.
pub fn grad_w_conj(
    x: &QuaternionMatrix,
    w: &QuaternionMatrix,
    h: &RealMatrix,
) -> Result<QuaternionMatrix, SolverError> {
    check_conformable(x, w, h)?;
    let residual = x.sub(&w.matmul_real(h)?)?;
    Ok(residual.matmul_real(&h.transpose())?.scale(-0.5))
}

// ---------------------------------------------------------------------------
// Closed-form updates
// ---------------------------------------------------------------------------

/// Real Gram matrix `Re[Wᵀ W̄] + ridge·I`. Entry `(p, q)` is the ℝ⁴ inner
/// product of columns `p` and `q` summed over rows.
fn real_gram(w: &QuaternionMatrix, ridge: f64) -> RealMatrix {
    let p_dim = w.cols();
    let mut g = RealMatrix::zeros(p_dim, p_dim);
    for p in 0..p_dim {
        for q in p..p_dim {
            let mut acc = 0.0;
            for m in 0..w.rows() {
                acc += w[(m, p)].dot(w[(m, q)]);
            }
            g[(p, q)] = acc;
            g[(q, p)] = acc;
        }
    }
    for p in 0..p_dim {
        g[(p, p)] += ridge;
    }
    g
}

/// Unconstrained least-squares activation update
/// `(Re[Wᵀ W̄] + ridge·I)⁻¹ Re[Wᵀ X̄]`, before clipping.
pub fn least_squares_h(
    x: &QuaternionMatrix,
    w: &QuaternionMatrix,
    ridge: f64,
) -> Result<RealMatrix, SolverError> {
    if x.rows() != w.rows() {
        return Err(SolverError::Matrix(MatrixError::DimMismatch {
            op: "activation update",
            lhs: x.shape(),
            rhs: w.shape(),
        }));
    }
    let (m_dim, n_dim) = x.shape();
    let p_dim = w.cols();
    let gram = real_gram(w, ridge);
    // rhs[(p, n)] = sum_m Re(w_mp * conj(x_mn))
    let mut rhs = RealMatrix::zeros(p_dim, n_dim);
    for m in 0..m_dim {
        for p in 0..p_dim {
            let wq = w[(m, p)];
            for n in 0..n_dim {
                rhs[(p, n)] += wq.dot(x[(m, n)]);
            }
        }
    }
    let lu = gram.lu("activation update normal matrix")?;
    Ok(lu.solve_mat(&rhs)?)
}

/// Activation update: least squares then entry-wise non-negative clip.
pub fn update_h(
    x: &QuaternionMatrix,
    w: &QuaternionMatrix,
    ridge: f64,
) -> Result<RealMatrix, SolverError> {
    Ok(project_nonneg(&least_squares_h(x, w, ridge)?))
}

/// Unconstrained least-squares source update
/// `X Hᵀ (H Hᵀ + ridge·I)⁻¹`, before the cone projection.
pub fn least_squares_w(
    x: &QuaternionMatrix,
    h: &RealMatrix,
    ridge: f64,
) -> Result<QuaternionMatrix, SolverError> {
    if x.cols() != h.cols() {
        return Err(SolverError::Matrix(MatrixError::DimMismatch {
            op: "source update",
            lhs: x.shape(),
            rhs: h.shape(),
        }));
    }
    let p_dim = h.rows();
    let mut gram = h.matmul(&h.transpose())?;
    for p in 0..p_dim {
        gram[(p, p)] += ridge;
    }
    let b = x.matmul_real(&h.transpose())?;
    // Solve W·G = B plane by plane: G is real symmetric, so G Wᵀ = Bᵀ.
    let lu = gram.lu("source update normal matrix")?;
    let planes = b.planes();
    let mut solved: Vec<RealMatrix> = Vec::with_capacity(4);
    for plane in planes.iter() {
        solved.push(lu.solve_mat(&plane.transpose())?.transpose());
    }
    Ok(QuaternionMatrix::from_planes(&[
        solved[0].clone(),
        solved[1].clone(),
        solved[2].clone(),
        solved[3].clone(),
    ])?)
}

/// Source update: least squares then entry-wise cone projection.
pub fn update_w(
    x: &QuaternionMatrix,
    h: &RealMatrix,
    ridge: f64,
) -> Result<QuaternionMatrix, SolverError> {
    Ok(least_squares_w(x, h, ridge)?.map(project_cone))
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Random initialization: source entries are isotropic four-component
/// standard normals projected onto the cone; activations are i.i.d.
/// uniform on `[0, 1)`.
pub fn random_init(
    rows: usize,
    rank: usize,
    cols: usize,
    seed: u64,
) -> (QuaternionMatrix, RealMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(rand_distr::StandardNormal) };
    let w = QuaternionMatrix::from_fn(rows, rank, |_, _| {
        project_cone(Quaternion::new(
            normal(&mut rng),
            normal(&mut rng),
            normal(&mut rng),
            normal(&mut rng),
        ))
    });
    let h = RealMatrix::from_fn(rank, cols, |_, _| rng.random_range(0.0..1.0));
    (w, h)
}

/// Run the alternating scheme from a seeded random initialization until
/// the residual improvement falls below `stop_delta` or the iteration cap
/// is reached. Deterministic given the configuration.
pub fn solve(x: &QuaternionMatrix, config: &SolverConfig) -> Result<SolveReport, SolverError> {
    config.validate()?;
    let (mut w, mut h) = random_init(x.rows(), config.rank, x.cols(), config.seed);
    let mut trace = vec![relative_error(x, &w, &h)?];
    let mut converged = false;
    let mut iterations = 0;
    for r in 1..=config.max_iters {
        h = update_h(x, &w, config.gram_ridge)?;
        w = update_w(x, &h, config.gram_ridge)?;
        let eps = relative_error(x, &w, &h)?;
        if !eps.is_finite() {
            return Err(SolverError::NonFiniteResidual { iteration: r });
        }
        let prev = *trace.last().unwrap();
        trace.push(eps);
        iterations = r;
        if (eps - prev).abs() <= config.stop_delta {
            converged = true;
            break;
        }
    }
    let zero_rows = (0..h.rows())
        .filter(|&p| (0..h.cols()).all(|n| h[(p, n)] == 0.0))
        .collect();
    Ok(SolveReport {
        factors: QnmfFactors { w, h },
        residual_trace: trace,
        iterations,
        converged,
        seed: config.seed,
        zero_activation_rows: zero_rows,
    })
}

/// Run `config.restarts` independent solves (seeds `seed, seed+1, ...`)
/// and select the smallest final residual, ties broken by seed. Restarts
/// execute in parallel; the outcome does not depend on scheduling. A
/// restart that aborts (a degenerate normal matrix after an activation
/// row clips to zero, say) is recorded as a failure; the run only errors
/// when no restart succeeds.
pub fn solve_multi(
    x: &QuaternionMatrix,
    config: &SolverConfig,
) -> Result<MultiRestartReport, SolverError> {
    config.validate()?;
    let outcomes: Vec<(u64, Result<SolveReport, SolverError>)> = (0..config.restarts)
        .into_par_iter()
        .map(|i| {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(i as u64);
            cfg.restarts = 1;
            (cfg.seed, solve(x, &cfg))
        })
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(report) => reports.push(report),
            Err(e) => failures.push((seed, e.to_string())),
        }
    }
    if reports.is_empty() {
        return Err(SolverError::AllRestartsFailed {
            first: failures
                .first()
                .map(|(_, e)| e.clone())
                .unwrap_or_default(),
        });
    }
    let best_index = reports
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a.final_residual(), a.seed)
                .partial_cmp(&(b.final_residual(), b.seed))
                .expect("residuals are finite")
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    Ok(MultiRestartReport {
        reports,
        best_index,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Factor alignment
// ---------------------------------------------------------------------------

/// Estimated factors brought onto a reference by resolving the scale and
/// permutation ambiguities.
#[derive(Debug, Clone)]
pub struct Alignment {
    /// Estimate after applying the permutation and positive scales.
    pub factors: QnmfFactors,
    /// `permutation[p]` is the estimate column matched to truth column `p`.
    pub permutation: Vec<usize>,
    /// Positive scale applied to each matched source column.
    pub scales: Vec<f64>,
    /// `||Ŵ_aligned - W||²_F / ||W||²_F`.
    pub eps_w: f64,
    /// `||Ĥ_aligned - H||²_F / ||H||²_F`.
    pub eps_h: f64,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Search all column permutations with per-column optimal positive scales
/// for the assignment minimizing `||Ŵ·DP - W||_F`, and report relative
/// factor errors after alignment.
pub fn align_factors(est: &QnmfFactors, truth: &QnmfFactors) -> Result<Alignment, SolverError> {
    if est.rank() != truth.rank() {
        return Err(SolverError::RankMismatch {
            expected: truth.rank(),
            got: est.rank(),
        });
    }
    if est.w.shape() != truth.w.shape() || est.h.shape() != truth.h.shape() {
        return Err(SolverError::Matrix(MatrixError::DimMismatch {
            op: "align",
            lhs: est.w.shape(),
            rhs: truth.w.shape(),
        }));
    }
    let p_dim = truth.rank();
    let m_dim = truth.w.rows();

    // Per (estimate column, truth column): optimal positive scale and the
    // resulting squared distance.
    let col_dot = |j: usize, p: usize| -> (f64, f64) {
        let mut dot = 0.0;
        let mut est_sq = 0.0;
        let mut truth_sq = 0.0;
        for m in 0..m_dim {
            dot += est.w[(m, j)].dot(truth.w[(m, p)]);
            est_sq += est.w[(m, j)].norm_sqr();
            truth_sq += truth.w[(m, p)].norm_sqr();
        }
        let scale = if est_sq > 0.0 && dot > 0.0 {
            dot / est_sq
        } else {
            1.0
        };
        let dist = truth_sq - 2.0 * scale * dot + scale * scale * est_sq;
        (scale, dist)
    };

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for perm in permutations(p_dim) {
        let mut total = 0.0;
        let mut scales = Vec::with_capacity(p_dim);
        for (p, &j) in perm.iter().enumerate() {
            let (scale, dist) = col_dot(j, p);
            total += dist;
            scales.push(scale);
        }
        if best.as_ref().map_or(true, |(t, _, _)| total < *t) {
            best = Some((total, perm, scales));
        }
    }
    let (_, permutation, scales) = best.expect("rank >= 1");

    let aligned_w = QuaternionMatrix::from_fn(m_dim, p_dim, |m, p| {
        est.w[(m, permutation[p])].scale(scales[p])
    });
    let aligned_h = RealMatrix::from_fn(p_dim, truth.h.cols(), |p, n| {
        est.h[(permutation[p], n)] / scales[p]
    });

    let diff_w = aligned_w.sub(&truth.w)?.frobenius_sq();
    let diff_h = aligned_h.sub(&truth.h)?.frobenius_sq();
    let denom_w = truth.w.frobenius_sq();
    let denom_h = truth.h.frobenius_sq();
    Ok(Alignment {
        factors: QnmfFactors {
            w: aligned_w,
            h: aligned_h,
        },
        permutation,
        scales,
        eps_w: if denom_w > 0.0 { diff_w / denom_w } else { diff_w },
        eps_h: if denom_h > 0.0 { diff_h / denom_h } else { diff_h },
    })
}

/// Feasibility check used by tests and the experiment harness: every
/// source entry in the cone at the default tolerance, every activation
/// non-negative.
pub fn factors_feasible(factors: &QnmfFactors) -> bool {
    factors.validate(DEFAULT_TOL).is_ok()
}

/// Draw a random feasible instance: cone-member sources and non-negative
/// activations with the given shape. Used for randomized checks.
pub fn random_feasible<R: Rng>(
    rng: &mut R,
    m_dim: usize,
    p_dim: usize,
    n_dim: usize,
) -> QnmfFactors {
    let w = QuaternionMatrix::from_fn(m_dim, p_dim, |_, _| crate::stokes::random_in_cone(rng));
    let h = RealMatrix::from_fn(p_dim, n_dim, |_, _| rng.random_range(0.0..1.0));
    QnmfFactors { w, h }
}
