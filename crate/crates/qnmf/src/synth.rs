//! Deterministic generators for feasible synthetic instances.
//!
//! Sources are smooth spectra: Gaussian intensity bumps over the band
//! index on a strictly positive floor, with per-band degree of
//! polarization and axis profiles. Activations are truncated 2D Gaussian
//! blobs on a spatial grid, flattened column-major into the activation
//! matrix, optionally carved so every source owns at least one pure
//! pixel. Assembly multiplies the factors and can add cone-projected
//! Gaussian noise. Everything is reproducible from explicit descriptors
//! plus a seed.

use std::fmt;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{QuaternionMatrix, RealMatrix};
use crate::quat::Quaternion;
use crate::stokes::{project_cone, random_unit_axis, PolarizationDescriptor};

/// Errors from instance generation.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthError {
    /// Dotted path of the offending field, e.g. `sources[1].dop`.
    pub path: String,
    pub message: String,
}

impl SynthError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SynthError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for SynthError {}

// ---------------------------------------------------------------------------
// Source spectra
// ---------------------------------------------------------------------------

/// One Gaussian intensity bump over the band index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

/// Degree-of-polarization profile over bands.
#[derive(Debug, Clone, PartialEq)]
pub enum DopProfile {
    Constant(f64),
    PerBand(Vec<f64>),
}

/// Polarization-axis profile over bands. Keyframes are `(position, axis)`
/// pairs with positions in `[0, 1]`; between keyframes the axis follows
/// normalized linear interpolation on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisProfile {
    Constant(Quaternion),
    PerBand(Vec<Quaternion>),
    Keyframes(Vec<(f64, Quaternion)>),
}

/// Generative description of one source spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub num_bands: usize,
    pub bumps: Vec<Bump>,
    /// Additive intensity floor; keep it positive for non-vanishing
    /// spectra.
    pub floor: f64,
    pub dop: DopProfile,
    pub axis: AxisProfile,
}

fn unit_pure(q: Quaternion, path: &str) -> Result<Quaternion, SynthError> {
    let norm = q.norm();
    if norm == 0.0 {
        return Err(SynthError::new(path, "axis must be nonzero"));
    }
    if q.re.abs() > 1e-9 * norm {
        return Err(SynthError::new(
            path,
            format!("axis must be pure (re = {})", q.re),
        ));
    }
    Ok(Quaternion::pure(q.im_i / norm, q.im_j / norm, q.im_k / norm))
}

impl SourceSpec {
    fn validate(&self, path: &str) -> Result<(), SynthError> {
        if self.num_bands == 0 {
            return Err(SynthError::new(format!("{path}.num_bands"), "must be positive"));
        }
        if self.floor < 0.0 {
            return Err(SynthError::new(
                format!("{path}.floor"),
                format!("must be non-negative, got {}", self.floor),
            ));
        }
        for (i, b) in self.bumps.iter().enumerate() {
            if b.amplitude < 0.0 {
                return Err(SynthError::new(
                    format!("{path}.bumps[{i}].amplitude"),
                    format!("must be non-negative, got {}", b.amplitude),
                ));
            }
            if b.width <= 0.0 {
                return Err(SynthError::new(
                    format!("{path}.bumps[{i}].width"),
                    format!("must be positive, got {}", b.width),
                ));
            }
        }
        match &self.dop {
            DopProfile::Constant(v) => {
                if !(0.0..=1.0).contains(v) {
                    return Err(SynthError::new(
                        format!("{path}.dop"),
                        format!("{v} outside [0, 1]"),
                    ));
                }
            }
            DopProfile::PerBand(vs) => {
                if vs.len() != self.num_bands {
                    return Err(SynthError::new(
                        format!("{path}.dop"),
                        format!("{} values for {} bands", vs.len(), self.num_bands),
                    ));
                }
                for (m, v) in vs.iter().enumerate() {
                    if !(0.0..=1.0).contains(v) {
                        return Err(SynthError::new(
                            format!("{path}.dop[{m}]"),
                            format!("{v} outside [0, 1]"),
                        ));
                    }
                }
            }
        }
        match &self.axis {
            AxisProfile::Constant(q) => {
                unit_pure(*q, &format!("{path}.axis"))?;
            }
            AxisProfile::PerBand(qs) => {
                if qs.len() != self.num_bands {
                    return Err(SynthError::new(
                        format!("{path}.axis"),
                        format!("{} values for {} bands", qs.len(), self.num_bands),
                    ));
                }
                for (m, q) in qs.iter().enumerate() {
                    unit_pure(*q, &format!("{path}.axis[{m}]"))?;
                }
            }
            AxisProfile::Keyframes(frames) => {
                if frames.is_empty() {
                    return Err(SynthError::new(
                        format!("{path}.axis"),
                        "keyframe list must not be empty",
                    ));
                }
                for (i, (pos, q)) in frames.iter().enumerate() {
                    if !(0.0..=1.0).contains(pos) {
                        return Err(SynthError::new(
                            format!("{path}.axis[{i}]"),
                            format!("keyframe position {pos} outside [0, 1]"),
                        ));
                    }
                    if i > 0 && frames[i - 1].0 > *pos {
                        return Err(SynthError::new(
                            format!("{path}.axis[{i}]"),
                            "keyframe positions must be non-decreasing",
                        ));
                    }
                    let unit = unit_pure(*q, &format!("{path}.axis[{i}]"))?;
                    if i > 0 {
                        let prev = unit_pure(frames[i - 1].1, &format!("{path}.axis[{}]", i - 1))?;
                        if prev.dot(unit) <= -1.0 + 1e-6 {
                            return Err(SynthError::new(
                                format!("{path}.axis[{i}]"),
                                "adjacent keyframes are antipodal; interpolation is undefined",
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn intensity_at(&self, m: usize) -> f64 {
        let mut v = self.floor;
        for b in &self.bumps {
            let d = (m as f64 - b.center) / b.width;
            v += b.amplitude * (-0.5 * d * d).exp();
        }
        v
    }

    fn dop_at(&self, m: usize) -> f64 {
        match &self.dop {
            DopProfile::Constant(v) => *v,
            DopProfile::PerBand(vs) => vs[m],
        }
    }

    fn axis_at(&self, m: usize, path: &str) -> Result<Quaternion, SynthError> {
        let x = if self.num_bands > 1 {
            m as f64 / (self.num_bands - 1) as f64
        } else {
            0.0
        };
        match &self.axis {
            AxisProfile::Constant(q) => unit_pure(*q, path),
            AxisProfile::PerBand(qs) => unit_pure(qs[m], path),
            AxisProfile::Keyframes(frames) => {
                let first = frames.first().unwrap();
                let last = frames.last().unwrap();
                if x <= first.0 {
                    return unit_pure(first.1, path);
                }
                if x >= last.0 {
                    return unit_pure(last.1, path);
                }
                let seg = frames.windows(2).find(|w| x >= w[0].0 && x <= w[1].0);
                let w = seg.expect("positions are sorted and bracket x");
                let span = w[1].0 - w[0].0;
                let t = if span > 0.0 { (x - w[0].0) / span } else { 0.0 };
                let a = unit_pure(w[0].1, path)?;
                let b = unit_pure(w[1].1, path)?;
                let v = a.scale(1.0 - t) + b.scale(t);
                if v.norm() < 1e-9 {
                    return Err(SynthError::new(
                        path,
                        "keyframe interpolation passes through zero (antipodal axes)",
                    ));
                }
                unit_pure(v.scale(1.0 / v.norm()), path)
            }
        }
    }
}

/// Generate the source matrix from one spec per source. Every entry is a
/// cone member by construction; fully polarized entries sit on the cone
/// boundary.
pub fn gen_sources(specs: &[SourceSpec]) -> Result<QuaternionMatrix, SynthError> {
    if specs.is_empty() {
        return Err(SynthError::new("sources", "need at least one source spec"));
    }
    let num_bands = specs[0].num_bands;
    for (p, spec) in specs.iter().enumerate() {
        let path = format!("sources[{p}]");
        spec.validate(&path)?;
        if spec.num_bands != num_bands {
            return Err(SynthError::new(
                format!("{path}.num_bands"),
                format!("expected {num_bands}, got {}", spec.num_bands),
            ));
        }
    }
    let mut w = QuaternionMatrix::zeros(num_bands, specs.len());
    for (p, spec) in specs.iter().enumerate() {
        let path = format!("sources[{p}].axis");
        for m in 0..num_bands {
            let descriptor = PolarizationDescriptor::new(
                spec.intensity_at(m),
                spec.dop_at(m),
                spec.axis_at(m, &path)?,
            )
            .map_err(|e| SynthError::new(path.clone(), e.to_string()))?;
            w[(m, p)] = descriptor.to_quaternion();
        }
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// Activation maps
// ---------------------------------------------------------------------------

/// One 2D Gaussian blob, truncated to zero beyond three sigmas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    /// `(row, col)` center in grid units.
    pub center: (f64, f64),
    /// `(row, col)` standard deviations.
    pub sigma: (f64, f64),
    pub amplitude: f64,
}

/// Generative description of the activation maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSpec {
    /// `(height, width)` of the spatial grid; pixels flatten row-major
    /// into activation columns.
    pub grid: (usize, usize),
    /// Blob list per source.
    pub blobs: Vec<Vec<Blob>>,
    /// Carve one pixel per source where it is the only active one.
    pub ensure_pure_pixels: bool,
    /// Additive floor over the whole grid.
    pub floor: f64,
}

/// Activation matrix plus the carved pure-pixel witnesses
/// (`(source, column)` pairs; empty when not requested).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedActivations {
    pub h: RealMatrix,
    pub pure_pixels: Vec<(usize, usize)>,
}

/// Generate activation maps from blob descriptors.
pub fn gen_activations(spec: &ActivationSpec) -> Result<GeneratedActivations, SynthError> {
    let (height, width) = spec.grid;
    if height == 0 || width == 0 {
        return Err(SynthError::new("activations.grid", "grid must be non-empty"));
    }
    if spec.floor < 0.0 {
        return Err(SynthError::new(
            "activations.floor",
            format!("must be non-negative, got {}", spec.floor),
        ));
    }
    let p_dim = spec.blobs.len();
    if p_dim == 0 {
        return Err(SynthError::new("activations.blobs", "need at least one source"));
    }
    for (p, blobs) in spec.blobs.iter().enumerate() {
        for (i, b) in blobs.iter().enumerate() {
            if b.amplitude < 0.0 || b.sigma.0 <= 0.0 || b.sigma.1 <= 0.0 {
                return Err(SynthError::new(
                    format!("activations.blobs[{p}][{i}]"),
                    "amplitude must be non-negative and sigmas positive",
                ));
            }
        }
    }

    let n_cols = height * width;
    let mut h = RealMatrix::zeros(p_dim, n_cols);
    for (p, blobs) in spec.blobs.iter().enumerate() {
        for n in 0..n_cols {
            let y = (n / width) as f64;
            let x = (n % width) as f64;
            let mut v = spec.floor;
            for b in blobs {
                let dy = (y - b.center.0) / b.sigma.0;
                let dx = (x - b.center.1) / b.sigma.1;
                let r2 = dy * dy + dx * dx;
                if r2 <= 9.0 {
                    v += b.amplitude * (-0.5 * r2).exp();
                }
            }
            h[(p, n)] = v;
        }
    }

    let mut pure_pixels = Vec::new();
    if spec.ensure_pure_pixels {
        let mut claimed = vec![false; n_cols];
        for (p, blobs) in spec.blobs.iter().enumerate() {
            let blob = blobs.first().ok_or_else(|| {
                SynthError::new(
                    format!("activations.blobs[{p}]"),
                    "pure pixels need at least one blob per source",
                )
            })?;
            let y = (blob.center.0.round().max(0.0) as usize).min(height - 1);
            let x = (blob.center.1.round().max(0.0) as usize).min(width - 1);
            let mut n = y * width + x;
            while claimed[n] {
                n = (n + 1) % n_cols;
            }
            claimed[n] = true;
            for q in 0..p_dim {
                if q != p {
                    h[(q, n)] = 0.0;
                }
            }
            if h[(p, n)] <= 0.0 {
                h[(p, n)] = blob.amplitude.max(1.0);
            }
            pure_pixels.push((p, n));
        }
    }
    Ok(GeneratedActivations { h, pure_pixels })
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// `X = WH`, optionally with i.i.d. four-component Gaussian noise of the
/// given standard deviation followed by an entry-wise cone projection so
/// the data stays feasible. With zero noise the product is returned
/// exactly.
pub fn assemble(
    w: &QuaternionMatrix,
    h: &RealMatrix,
    noise_sigma: f64,
    seed: u64,
) -> Result<QuaternionMatrix, SynthError> {
    let mut x = w.matmul_real(h).map_err(|e| SynthError::new("assemble", e.to_string()))?;
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = |rng: &mut ChaCha8Rng| -> f64 {
            let v: f64 = rng.sample(rand_distr::StandardNormal);
            v * noise_sigma
        };
        for m in 0..x.rows() {
            for n in 0..x.cols() {
                let noise = Quaternion::new(
                    normal(&mut rng),
                    normal(&mut rng),
                    normal(&mut rng),
                    normal(&mut rng),
                );
                x[(m, n)] = project_cone(x[(m, n)] + noise);
            }
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Randomized instance builders
// ---------------------------------------------------------------------------

/// Polarization regime for randomized sources.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizationRegime {
    /// Degree of polarization 1 everywhere, axes drifting between random
    /// keyframes.
    FullyPolarized,
    /// Constant degree of polarization per source drawn from the range,
    /// constant random axis.
    PartiallyPolarized { dop_range: (f64, f64) },
    /// No polarization: a plain non-negative real instance.
    Unpolarized,
    /// Explicit `(dop, axis)` per source.
    ConstantStates(Vec<(f64, Quaternion)>),
}

/// Parameters for a randomized feasible instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParams {
    pub num_bands: usize,
    /// `(height, width)` of the activation grid.
    pub grid: (usize, usize),
    pub num_sources: usize,
    pub polarization: PolarizationRegime,
    pub ensure_pure_pixels: bool,
    pub activation_floor: f64,
    pub noise_sigma: f64,
}

impl InstanceParams {
    pub fn new(num_bands: usize, grid: (usize, usize), num_sources: usize) -> Self {
        InstanceParams {
            num_bands,
            grid,
            num_sources,
            polarization: PolarizationRegime::FullyPolarized,
            ensure_pure_pixels: true,
            activation_floor: 0.0,
            noise_sigma: 0.0,
        }
    }
}

/// A generated instance: ground-truth factors, the assembled data and the
/// specs that produced them.
#[derive(Debug, Clone)]
pub struct Instance {
    pub w: QuaternionMatrix,
    pub h: RealMatrix,
    pub x: QuaternionMatrix,
    pub source_specs: Vec<SourceSpec>,
    pub activation_spec: ActivationSpec,
    pub pure_pixels: Vec<(usize, usize)>,
}

/// Well-spread unit axes, one per source: a random rotation applied to a
/// fixed spread of directions. Distinct polarization is what separates
/// sources whose intensity spectra overlap, so the random axis paths of
/// different sources wander around different home directions.
fn spread_axes<R: Rng>(count: usize, rng: &mut R) -> Vec<Quaternion> {
    let table: [[f64; 3]; 8] = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
        [1.0, 1.0, 1.0],
        [-1.0, -1.0, 1.0],
    ];
    // random rotation via three orthonormalized Gaussian directions
    let u = random_unit_axis(rng);
    let mut v = random_unit_axis(rng);
    let mut dot = u.dot(v);
    while dot.abs() > 0.9 {
        v = random_unit_axis(rng);
        dot = u.dot(v);
    }
    let v = (v - u.scale(dot)).normalized().expect("non-collinear");
    let w = Quaternion::pure(
        u.im_j * v.im_k - u.im_k * v.im_j,
        u.im_k * v.im_i - u.im_i * v.im_k,
        u.im_i * v.im_j - u.im_j * v.im_i,
    );
    (0..count)
        .map(|p| {
            let t = table[p % table.len()];
            (u.scale(t[0]) + v.scale(t[1]) + w.scale(t[2]))
                .normalized()
                .expect("table rows are nonzero")
        })
        .collect()
}

/// Draw randomized source specs under the given regime.
pub fn random_source_specs<R: Rng>(
    params: &InstanceParams,
    rng: &mut R,
) -> Result<Vec<SourceSpec>, SynthError> {
    if let PolarizationRegime::ConstantStates(states) = &params.polarization {
        if states.len() != params.num_sources {
            return Err(SynthError::new(
                "polarization",
                format!(
                    "{} states for {} sources",
                    states.len(),
                    params.num_sources
                ),
            ));
        }
    }
    let homes = spread_axes(params.num_sources, rng);
    let m = params.num_bands as f64;
    let mut specs = Vec::with_capacity(params.num_sources);
    for p in 0..params.num_sources {
        // broad-band spectra: wide overlapping peaks on a positive floor
        let num_bumps = rng.random_range(2..=4usize);
        let bumps = (0..num_bumps)
            .map(|_| Bump {
                center: rng.random_range(0.1 * m..0.9 * m),
                width: rng.random_range(m / 10.0..m / 4.0),
                amplitude: rng.random_range(0.5..1.5),
            })
            .collect();
        let (dop, axis) = match &params.polarization {
            PolarizationRegime::FullyPolarized => {
                let wander = |rng: &mut R| {
                    (homes[p] + random_unit_axis(rng).scale(rng.random_range(0.0..0.45)))
                        .normalized()
                        .expect("perturbation below unit norm")
                };
                let frames = vec![
                    (0.0, wander(rng)),
                    (0.5, wander(rng)),
                    (1.0, wander(rng)),
                ];
                (DopProfile::Constant(1.0), AxisProfile::Keyframes(frames))
            }
            PolarizationRegime::PartiallyPolarized { dop_range } => (
                DopProfile::Constant(rng.random_range(dop_range.0..=dop_range.1)),
                AxisProfile::Constant(
                    (homes[p] + random_unit_axis(rng).scale(rng.random_range(0.0..0.45)))
                        .normalized()
                        .expect("perturbation below unit norm"),
                ),
            ),
            PolarizationRegime::Unpolarized => {
                (DopProfile::Constant(0.0), AxisProfile::Constant(Quaternion::I))
            }
            PolarizationRegime::ConstantStates(states) => (
                DopProfile::Constant(states[p].0),
                AxisProfile::Constant(states[p].1),
            ),
        };
        specs.push(SourceSpec {
            num_bands: params.num_bands,
            bumps,
            floor: rng.random_range(0.15..0.35),
            dop,
            axis,
        });
    }
    Ok(specs)
}

/// Draw a randomized activation spec. Each source's blobs land in its
/// own sector of the grid, giving the spatially distinct maps typical of
/// imaging scenes; without this the random maps of two sources can end
/// up nearly collinear and the instance degenerates.
pub fn random_activation_spec<R: Rng>(params: &InstanceParams, rng: &mut R) -> ActivationSpec {
    let (height, width) = params.grid;
    let cells = (params.num_sources as f64).sqrt().ceil() as usize;
    let cell_h = height as f64 / cells as f64;
    let cell_w = width as f64 / cells as f64;
    let blobs = (0..params.num_sources)
        .map(|p| {
            let y0 = (p / cells) as f64 * cell_h;
            let x0 = (p % cells) as f64 * cell_w;
            let count = rng.random_range(2..=4usize);
            (0..count)
                .map(|_| Blob {
                    center: (
                        y0 + rng.random_range(0.2 * cell_h..0.8 * cell_h),
                        x0 + rng.random_range(0.2 * cell_w..0.8 * cell_w),
                    ),
                    sigma: (
                        rng.random_range(cell_h / 5.0..cell_h / 2.5),
                        rng.random_range(cell_w / 5.0..cell_w / 2.5),
                    ),
                    amplitude: rng.random_range(0.5..1.5),
                })
                .collect()
        })
        .collect();
    ActivationSpec {
        grid: params.grid,
        blobs,
        ensure_pure_pixels: params.ensure_pure_pixels,
        floor: params.activation_floor,
    }
}

/// Generate a full randomized instance, deterministic in the seed.
pub fn random_instance(params: &InstanceParams, seed: u64) -> Result<Instance, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source_specs = random_source_specs(params, &mut rng)?;
    let activation_spec = random_activation_spec(params, &mut rng);
    let w = gen_sources(&source_specs)?;
    let generated = gen_activations(&activation_spec)?;
    let x = assemble(&w, &generated.h, params.noise_sigma, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok(Instance {
        w,
        h: generated.h,
        x,
        source_specs,
        activation_spec,
        pure_pixels: generated.pure_pixels,
    })
}

/// Rank-2 instance that is hard for intensity-only separation: the second
/// source's spectrum is the first's multiplied by a ramp crossing 1, both
/// sources partially polarized with well-separated constant axes, and
/// strictly positive activations. The admissible transform range is never
/// the identity alone, and the polarization bounds are strictly inside
/// the intensity-only bounds.
pub fn rank2_partial_overlap_instance(
    num_bands: usize,
    num_cols: usize,
    seed: u64,
) -> Result<(QuaternionMatrix, RealMatrix), SynthError> {
    if num_bands < 2 || num_cols == 0 {
        return Err(SynthError::new(
            "rank2_partial_overlap_instance",
            "need at least two bands and one column",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = InstanceParams::new(num_bands, (1, num_cols), 1);
    let base = random_source_specs(&params, &mut rng)?.remove(0);

    let phi1 = rng.random_range(0.5..0.9);
    let phi2 = rng.random_range(0.5..0.9);
    let mu1 = random_unit_axis(&mut rng);
    // pick a second axis with inner product well below 1
    let mu2 = loop {
        let candidate = random_unit_axis(&mut rng);
        if mu1.dot(candidate) < 0.6 {
            break candidate;
        }
    };

    let w = QuaternionMatrix::from_fn(num_bands, 2, |m, p| {
        let i1 = base.intensity_at(m);
        let ramp = 0.95 + 0.10 * m as f64 / (num_bands - 1) as f64;
        let (intensity, phi, mu) = if p == 0 {
            (i1, phi1, mu1)
        } else {
            (i1 * ramp, phi2, mu2)
        };
        PolarizationDescriptor::new(intensity, phi, mu)
            .expect("axes are unit pure")
            .to_quaternion()
    });
    let h = RealMatrix::from_fn(2, num_cols, |_, _| rng.random_range(0.1..1.0));
    Ok((w, h))
}
