//! Coupled stochastic gradient trajectories on neighboring datasets.
//!
//! One simulation advances two parameter vectors in lockstep, one per
//! dataset, feeding both the same minibatch indices and the same noise
//! draws at every step. The only difference between the trajectories is
//! the single data point on which the datasets disagree, so the gap
//! between the two clouds isolates the effect of that point.
//!
//! The update applied to each trajectory is
//!
//! ```text
//! X_{k+1} = proj( X_k - eta * g_batch(X_k)
//!                 + sigma_alpha * eta^{1/alpha} * xi_k
//!                 + sigma_2 * sqrt(2 eta) * zeta_k )
//! ```
//!
//! with `xi_k` an isotropic stable draw, `zeta_k` a standard Gaussian
//! draw, and `proj` the optional Euclidean ball projection.

use rand::Rng;
use rayon::prelude::*;
use std::io::Write;

use crate::accountant::NoiseSpec;
use crate::constants::{Dimension, StableIndex};
use crate::csvio;
use crate::error::{Error, Result};
use crate::stable_noise::{sample_gaussian, sample_isotropic_stable, NoiseRng, RngSeed};

/// Candidate states whose largest component exceeds this magnitude stop
/// the run, as one further quadratic operation could leave f64 range.
pub const MAX_STATE_MAGNITUDE: f64 = 1e150;

/// A finite collection of data points of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    /// Optional Euclidean norm bound certified to hold for every point.
    pub bound: Option<f64>,
}

impl Dataset {
    /// Validates a nonempty, finite, dimension-consistent collection;
    /// when a bound is given, every point must satisfy it.
    pub fn new(points: Vec<Vec<f64>>, bound: Option<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("dataset must contain at least one point".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Domain("data points must have at least one coordinate".into()));
        }
        if let Some(b) = bound {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::Domain(format!(
                    "data bound must be finite and positive, got {b}"
                )));
            }
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Domain(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!("point {i} has a non-finite coordinate")));
            }
            if let Some(b) = bound {
                let norm = norm2(p);
                if norm > b {
                    return Err(Error::Domain(format!(
                        "point {i} has norm {norm}, above the stated bound {b}"
                    )));
                }
            }
        }
        Ok(Dataset { points, bound })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_dim(&self) -> usize {
        self.points[0].len()
    }
}

/// Two datasets of the same size that agree everywhere except at one index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborPair {
    pub s: Dataset,
    pub s_prime: Dataset,
    pub differing_index: usize,
}

impl NeighborPair {
    /// Validates equal sizes and dimensions and bitwise equality at
    /// every position other than `differing_index`. The two points at
    /// the differing index may still coincide.
    pub fn new(s: Dataset, s_prime: Dataset, differing_index: usize) -> Result<Self> {
        if s.len() != s_prime.len() {
            return Err(Error::Domain(format!(
                "datasets have sizes {} and {}, neighbors must match",
                s.len(),
                s_prime.len()
            )));
        }
        if s.point_dim() != s_prime.point_dim() {
            return Err(Error::Domain(format!(
                "datasets have point dimensions {} and {}, neighbors must match",
                s.point_dim(),
                s_prime.point_dim()
            )));
        }
        if differing_index >= s.len() {
            return Err(Error::Domain(format!(
                "differing index {differing_index} is out of range for size {}",
                s.len()
            )));
        }
        for i in 0..s.len() {
            if i != differing_index && s.points[i] != s_prime.points[i] {
                return Err(Error::Domain(format!(
                    "datasets differ at index {i}, only index {differing_index} may differ"
                )));
            }
        }
        Ok(NeighborPair { s, s_prime, differing_index })
    }

    pub fn size(&self) -> usize {
        self.s.len()
    }
}

/// Per-sample loss whose gradient drives the update.
#[derive(Debug, Clone, PartialEq)]
pub enum LossSpec {
    /// `0.5 * ||w - z||^2`; the parameter lives in the data space.
    Quadratic,
    /// `log(1 + exp(-y <w, x>)) + ridge * ||w||^2` with each point laid
    /// out as the feature vector followed by a label in `{-1, +1}`.
    RegularizedLogistic { feature_bound: f64, ridge: f64 },
    /// Another loss with each per-sample gradient rescaled into the
    /// Euclidean ball of the given radius.
    ClippedGradient { inner: Box<LossSpec>, clip_radius: f64 },
}

impl LossSpec {
    /// Checks the loss's own parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            LossSpec::Quadratic => Ok(()),
            LossSpec::RegularizedLogistic { feature_bound, ridge } => {
                if !feature_bound.is_finite() || *feature_bound <= 0.0 {
                    return Err(Error::Domain(format!(
                        "feature bound must be finite and positive, got {feature_bound}"
                    )));
                }
                if !ridge.is_finite() || *ridge < 0.0 {
                    return Err(Error::Domain(format!(
                        "ridge coefficient must be finite and nonnegative, got {ridge}"
                    )));
                }
                Ok(())
            }
            LossSpec::ClippedGradient { inner, clip_radius } => {
                if !clip_radius.is_finite() || *clip_radius <= 0.0 {
                    return Err(Error::Domain(format!(
                        "clip radius must be finite and positive, got {clip_radius}"
                    )));
                }
                inner.validate()
            }
        }
    }

    /// Dimension of the parameter vector for points of the given dimension.
    pub fn param_dim(&self, point_dim: usize) -> Result<usize> {
        match self {
            LossSpec::Quadratic => Ok(point_dim),
            LossSpec::RegularizedLogistic { .. } => {
                if point_dim < 2 {
                    return Err(Error::Domain(
                        "logistic points need at least one feature plus a label".into(),
                    ));
                }
                Ok(point_dim - 1)
            }
            LossSpec::ClippedGradient { inner, .. } => inner.param_dim(point_dim),
        }
    }

    /// Checks that a dataset is usable under this loss (label values,
    /// feature norms).
    pub fn validate_dataset(&self, data: &Dataset) -> Result<()> {
        match self {
            LossSpec::Quadratic => Ok(()),
            LossSpec::RegularizedLogistic { feature_bound, .. } => {
                let d = self.param_dim(data.point_dim())?;
                for (i, p) in data.points.iter().enumerate() {
                    let label = p[d];
                    if label != 1.0 && label != -1.0 {
                        return Err(Error::Domain(format!(
                            "point {i} has label {label}, expected -1 or +1"
                        )));
                    }
                    let fnorm = norm2(&p[..d]);
                    if fnorm > *feature_bound {
                        return Err(Error::Domain(format!(
                            "point {i} has feature norm {fnorm}, above the bound {feature_bound}"
                        )));
                    }
                }
                Ok(())
            }
            LossSpec::ClippedGradient { inner, .. } => inner.validate_dataset(data),
        }
    }

    /// Writes the per-sample gradient at `w` for point `z` into `out`.
    fn write_gradient(&self, w: &[f64], z: &[f64], out: &mut [f64]) {
        match self {
            LossSpec::Quadratic => {
                for i in 0..w.len() {
                    out[i] = w[i] - z[i];
                }
            }
            LossSpec::RegularizedLogistic { ridge, .. } => {
                let d = w.len();
                let x = &z[..d];
                let y = z[d];
                let u: f64 = y * dot(w, x);
                let s = 1.0 / (1.0 + u.exp());
                for i in 0..d {
                    out[i] = -y * s * x[i] + 2.0 * ridge * w[i];
                }
            }
            LossSpec::ClippedGradient { inner, clip_radius } => {
                inner.write_gradient(w, z, out);
                let norm = norm2(out);
                if norm > *clip_radius {
                    let scale = clip_radius / norm;
                    for c in out.iter_mut() {
                        *c *= scale;
                    }
                }
            }
        }
    }
}

/// Worst-case gap between per-sample gradients over any two admissible
/// points, uniformly in the parameter.
///
/// The quadratic loss needs a certified data bound; a dataset-independent
/// answer does not exist without one.
pub fn gradient_sensitivity(loss: &LossSpec, data_bound: Option<f64>) -> Result<f64> {
    loss.validate()?;
    match loss {
        LossSpec::Quadratic => match data_bound {
            Some(r) if r.is_finite() && r > 0.0 => Ok(2.0 * r),
            Some(r) => Err(Error::Domain(format!(
                "data bound must be finite and positive, got {r}"
            ))),
            None => Err(Error::Unsupported(
                "quadratic loss has unbounded gradient gap without a data bound".into(),
            )),
        },
        LossSpec::RegularizedLogistic { feature_bound, .. } => Ok(2.0 * feature_bound),
        LossSpec::ClippedGradient { clip_radius, .. } => Ok(2.0 * clip_radius),
    }
}

/// Gap bound specialized to one concrete pair of differing points,
/// uniform in the parameter. Never larger than `gradient_sensitivity`
/// on a domain containing both points.
pub fn pair_gradient_gap(loss: &LossSpec, z: &[f64], z_prime: &[f64]) -> Result<f64> {
    loss.validate()?;
    if z.len() != z_prime.len() {
        return Err(Error::Domain(format!(
            "points have dimensions {} and {}, expected equal",
            z.len(),
            z_prime.len()
        )));
    }
    match loss {
        LossSpec::Quadratic => {
            let gap_sq: f64 = z
                .iter()
                .zip(z_prime)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            Ok(gap_sq.sqrt())
        }
        LossSpec::RegularizedLogistic { feature_bound, .. } => {
            let d = loss.param_dim(z.len())?;
            let gap = norm2(&z[..d]) + norm2(&z_prime[..d]);
            Ok(gap.min(2.0 * feature_bound))
        }
        LossSpec::ClippedGradient { inner, clip_radius } => {
            let inner_gap = pair_gradient_gap(inner, z, z_prime)?;
            Ok(inner_gap.min(2.0 * clip_radius))
        }
    }
}

/// How both trajectories start; the draw is shared, so the pair always
/// starts from the same point.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Point(Vec<f64>),
    /// Standard Gaussian scaled by the given factor.
    GaussianScale(f64),
}

/// Full description of one coupled run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub loss: LossSpec,
    /// `None` runs plain (minibatch) gradient descent with no injected noise.
    pub noise: Option<NoiseSpec>,
    pub step_size: f64,
    pub steps: usize,
    pub batch_size: usize,
    /// Radius of the Euclidean ball the iterates are projected onto.
    pub projection_radius: Option<f64>,
    pub init: InitialState,
}

/// One recorded update: the minibatch, the applied noise increments, and
/// both post-projection states.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub batch: Vec<usize>,
    /// `sigma_alpha * eta^{1/alpha} * xi_k`, present when the stable
    /// component is active.
    pub stable_increment: Option<Vec<f64>>,
    /// `sigma_2 * sqrt(2 eta) * zeta_k`, present when the Gaussian
    /// component is active.
    pub gaussian_increment: Option<Vec<f64>>,
    pub state_s: Vec<f64>,
    pub state_s_prime: Vec<f64>,
}

/// Marker left behind when a run stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// 1-based index of the update that left the representable range.
    pub step: usize,
    /// Largest pre-projection component magnitude seen at that update.
    pub magnitude: f64,
}

/// The logged output of one coupled run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPair {
    /// Shared starting state of both trajectories.
    pub initial: Vec<f64>,
    /// `steps[k]` holds the records after update `k + 1`.
    pub steps: Vec<StepRecord>,
    pub truncation: Option<Truncation>,
}

impl TrajectoryPair {
    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    /// Writes `step,which,w_1..w_d` rows, starting from the shared
    /// initial state at step 0.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let d = self.dim();
        let mut header = vec!["step".to_string(), "which".to_string()];
        for i in 1..=d {
            header.push(format!("w_{i}"));
        }
        csvio::write_record(out, &header)?;
        for which in ["S", "Sprime"] {
            write_state_row(out, 0, which, &self.initial)?;
        }
        for (k, rec) in self.steps.iter().enumerate() {
            write_state_row(out, k + 1, "S", &rec.state_s)?;
            write_state_row(out, k + 1, "Sprime", &rec.state_s_prime)?;
        }
        Ok(())
    }
}

fn write_state_row<W: Write>(
    out: &mut W,
    step: usize,
    which: &str,
    state: &[f64],
) -> std::io::Result<()> {
    let mut fields = vec![step.to_string(), which.to_string()];
    fields.extend(state.iter().map(|c| csvio::fmt_f64(*c)));
    csvio::write_record(out, &fields)
}

/// Paired parameter clouds recorded at one step across an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointCloud {
    pub step: usize,
    /// `states_s[i]` is trajectory `i` on the first dataset.
    pub states_s: Vec<Vec<f64>>,
    pub states_s_prime: Vec<Vec<f64>>,
}

/// Checkpoints collected over many independently seeded coupled runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleClouds {
    pub dim: usize,
    pub clouds: Vec<CheckpointCloud>,
}

impl EnsembleClouds {
    /// Writes `trajectory_id,step,which,w_1..w_d` rows for every
    /// checkpoint and trajectory.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let mut header = vec![
            "trajectory_id".to_string(),
            "step".to_string(),
            "which".to_string(),
        ];
        for i in 1..=self.dim {
            header.push(format!("w_{i}"));
        }
        csvio::write_record(out, &header)?;
        for cloud in &self.clouds {
            for (id, (s, sp)) in cloud.states_s.iter().zip(&cloud.states_s_prime).enumerate() {
                for (which, state) in [("S", s), ("Sprime", sp)] {
                    let mut fields = vec![id.to_string(), cloud.step.to_string(), which.to_string()];
                    fields.extend(state.iter().map(|c| csvio::fmt_f64(*c)));
                    csvio::write_record(out, &fields)?;
                }
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Checks a full run description against the pair and returns the
/// parameter dimension.
fn validate_config(pair: &NeighborPair, config: &SimConfig) -> Result<Dimension> {
    config.loss.validate()?;
    config.loss.validate_dataset(&pair.s)?;
    config.loss.validate_dataset(&pair.s_prime)?;
    let d = config.loss.param_dim(pair.s.point_dim())?;
    let d = u32::try_from(d)
        .map_err(|_| Error::Domain(format!("parameter dimension {d} is too large")))
        .and_then(Dimension::new)?;
    if !config.step_size.is_finite() || config.step_size <= 0.0 {
        return Err(Error::Domain(format!(
            "step size must be finite and positive, got {}",
            config.step_size
        )));
    }
    if config.batch_size == 0 || config.batch_size > pair.size() {
        return Err(Error::Domain(format!(
            "batch size must lie in 1..={}, got {}",
            pair.size(),
            config.batch_size
        )));
    }
    if let Some(r) = config.projection_radius {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::Domain(format!(
                "projection radius must be finite and positive, got {r}"
            )));
        }
    }
    match &config.init {
        InitialState::Point(w) => {
            if w.len() != d.get() as usize {
                return Err(Error::Domain(format!(
                    "initial point has dimension {}, parameter space has {}",
                    w.len(),
                    d.get()
                )));
            }
            if w.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain("initial point has a non-finite coordinate".into()));
            }
        }
        InitialState::GaussianScale(s) => {
            if !s.is_finite() || *s < 0.0 {
                return Err(Error::Domain(format!(
                    "initial Gaussian scale must be finite and nonnegative, got {s}"
                )));
            }
        }
    }
    Ok(d)
}

enum StepFate {
    Advanced,
    Overflowed(f64),
}

/// Scratch state for advancing one coupled pair step by step.
///
/// Random draws happen in a fixed order per step: minibatch indices,
/// then the stable increment, then the Gaussian increment. Both
/// trajectories consume the same draws.
struct Stepper<'a> {
    pair: &'a NeighborPair,
    config: &'a SimConfig,
    dim: Dimension,
    stable: Option<(StableIndex, f64)>,
    gauss_scale: f64,
    idx: Vec<usize>,
    grad: Vec<f64>,
    grad_prime: Vec<f64>,
    scratch: Vec<f64>,
    stable_inc: Vec<f64>,
    gauss_inc: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn prepare(pair: &'a NeighborPair, config: &'a SimConfig) -> Result<Self> {
        let dim = validate_config(pair, config)?;
        let d = dim.get() as usize;
        let eta = config.step_size;
        let mut stable = None;
        let mut gauss_scale = 0.0;
        if let Some(noise) = &config.noise {
            if noise.sigma_alpha > 0.0 {
                let scale = noise.sigma_alpha * eta.powf(1.0 / noise.alpha.get());
                stable = Some((noise.alpha, scale));
            }
            if noise.sigma_2 > 0.0 {
                gauss_scale = noise.sigma_2 * (2.0 * eta).sqrt();
            }
        }
        Ok(Stepper {
            pair,
            config,
            dim,
            stable,
            gauss_scale,
            idx: (0..pair.size()).collect(),
            grad: vec![0.0; d],
            grad_prime: vec![0.0; d],
            scratch: vec![0.0; d],
            stable_inc: vec![0.0; d],
            gauss_inc: vec![0.0; d],
        })
    }

    fn batch(&self) -> &[usize] {
        &self.idx[..self.config.batch_size]
    }

    /// Puts a uniformly random subset of the given size at the front of
    /// `idx` via a partial shuffle. A full batch leaves the identity
    /// order and consumes no randomness.
    fn draw_batch(&mut self, rng: &mut NoiseRng) {
        let n = self.idx.len();
        let b = self.config.batch_size;
        if b == n {
            return;
        }
        for (i, v) in self.idx.iter_mut().enumerate() {
            *v = i;
        }
        for j in 0..b {
            let pick = j + rng.gen_range(0..n - j);
            self.idx.swap(j, pick);
        }
    }

    fn batch_gradient(&mut self, w: &[f64], prime: bool) {
        let data = if prime { &self.pair.s_prime } else { &self.pair.s };
        let b = self.config.batch_size;
        let acc = if prime { &mut self.grad_prime } else { &mut self.grad };
        acc.iter_mut().for_each(|c| *c = 0.0);
        for &i in &self.idx[..b] {
            self.config.loss.write_gradient(w, &data.points[i], &mut self.scratch);
            for (a, g) in acc.iter_mut().zip(&self.scratch) {
                *a += g;
            }
        }
        let inv = 1.0 / b as f64;
        acc.iter_mut().for_each(|c| *c *= inv);
    }

    fn advance(
        &mut self,
        x: &mut [f64],
        x_prime: &mut [f64],
        rng: &mut NoiseRng,
    ) -> Result<StepFate> {
        self.draw_batch(rng);
        if let Some((alpha, scale)) = self.stable {
            let xi = sample_isotropic_stable(alpha, self.dim, rng)?;
            for (inc, c) in self.stable_inc.iter_mut().zip(&xi) {
                *inc = scale * c;
            }
        }
        if self.gauss_scale > 0.0 {
            let zeta = sample_gaussian(self.dim, rng);
            for (inc, c) in self.gauss_inc.iter_mut().zip(&zeta) {
                *inc = self.gauss_scale * c;
            }
        }

        let eta = self.config.step_size;
        let mut pre_max: f64 = 0.0;
        let states: [&mut [f64]; 2] = [x, x_prime];
        for (which, state) in states.into_iter().enumerate() {
            self.batch_gradient(state, which == 1);
            let grad = if which == 1 { &self.grad_prime } else { &self.grad };
            for (i, c) in state.iter_mut().enumerate() {
                let mut v = *c - eta * grad[i];
                if self.stable.is_some() {
                    v += self.stable_inc[i];
                }
                if self.gauss_scale > 0.0 {
                    v += self.gauss_inc[i];
                }
                pre_max = pre_max.max(v.abs());
                *c = v;
            }
            if let Some(radius) = self.config.projection_radius {
                let norm = norm2(state);
                if norm > radius {
                    let scale = radius / norm;
                    for c in state.iter_mut() {
                        *c *= scale;
                    }
                }
            }
        }

        let finite = x.iter().chain(x_prime.iter()).all(|c| c.is_finite());
        let in_range = self.config.projection_radius.is_some() || pre_max <= MAX_STATE_MAGNITUDE;
        if !finite || !in_range {
            return Ok(StepFate::Overflowed(pre_max));
        }
        Ok(StepFate::Advanced)
    }
}

fn draw_initial(config: &SimConfig, dim: Dimension, rng: &mut NoiseRng) -> Vec<f64> {
    match &config.init {
        InitialState::Point(w) => w.clone(),
        InitialState::GaussianScale(s) => {
            let mut w = sample_gaussian(dim, rng);
            for c in w.iter_mut() {
                *c *= s;
            }
            w
        }
    }
}

/// Runs one coupled pair with full per-step logging.
///
/// A state leaving the representable range stops the run early; the
/// returned record then carries a truncation marker and only the steps
/// completed before it.
pub fn run_pair(pair: &NeighborPair, config: &SimConfig, seed: RngSeed) -> Result<TrajectoryPair> {
    let mut stepper = Stepper::prepare(pair, config)?;
    let mut rng = seed.rng();
    let initial = draw_initial(config, stepper.dim, &mut rng);
    let mut x = initial.clone();
    let mut x_prime = initial.clone();
    let mut steps = Vec::with_capacity(config.steps);
    let mut truncation = None;
    for k in 0..config.steps {
        match stepper.advance(&mut x, &mut x_prime, &mut rng)? {
            StepFate::Advanced => steps.push(StepRecord {
                batch: stepper.batch().to_vec(),
                stable_increment: stepper.stable.map(|_| stepper.stable_inc.clone()),
                gaussian_increment: (stepper.gauss_scale > 0.0).then(|| stepper.gauss_inc.clone()),
                state_s: x.clone(),
                state_s_prime: x_prime.clone(),
            }),
            StepFate::Overflowed(magnitude) => {
                truncation = Some(Truncation { step: k + 1, magnitude });
                break;
            }
        }
    }
    Ok(TrajectoryPair { initial, steps, truncation })
}

/// Lean path for ensembles: advances one pair and keeps only the states
/// at the requested steps. Step 0 refers to the initial state.
fn run_checkpoints(
    pair: &NeighborPair,
    config: &SimConfig,
    checkpoints: &[usize],
    seed: RngSeed,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut stepper = Stepper::prepare(pair, config)?;
    let mut rng = seed.rng();
    let initial = draw_initial(config, stepper.dim, &mut rng);
    let mut x = initial.clone();
    let mut x_prime = initial;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    while next.peek() == Some(&&0) {
        next.next();
        out.push((x.clone(), x_prime.clone()));
    }
    for k in 0..config.steps {
        match stepper.advance(&mut x, &mut x_prime, &mut rng)? {
            StepFate::Advanced => {}
            StepFate::Overflowed(magnitude) => {
                return Err(Error::Overflow { step: k + 1, magnitude });
            }
        }
        while next.peek() == Some(&&(k + 1)) {
            next.next();
            out.push((x.clone(), x_prime.clone()));
        }
    }
    Ok(out)
}

/// Runs independently seeded coupled pairs in parallel and collects the
/// paired parameter clouds at each checkpoint.
///
/// Trajectory `i` uses `seed.split(i)`, so the result does not depend
/// on thread count or scheduling. Checkpoint step 0 records the initial
/// states. Any trajectory that overflows fails the whole ensemble, as
/// clouds with missing members would bias every downstream estimate.
pub fn run_ensemble(
    pair: &NeighborPair,
    config: &SimConfig,
    trajectories: usize,
    checkpoints: &[usize],
    seed: RngSeed,
) -> Result<EnsembleClouds> {
    let dim = validate_config(pair, config)?;
    if trajectories == 0 {
        return Err(Error::Domain("ensemble needs at least one trajectory".into()));
    }
    let mut points: Vec<usize> = checkpoints.to_vec();
    points.sort_unstable();
    points.dedup();
    if let Some(&last) = points.last() {
        if last > config.steps {
            return Err(Error::Domain(format!(
                "checkpoint {last} is beyond the configured {} steps",
                config.steps
            )));
        }
    }
    let per_run: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..trajectories)
        .into_par_iter()
        .map(|i| run_checkpoints(pair, config, &points, seed.split(i as u64)))
        .collect::<Result<_>>()?;
    let clouds = points
        .iter()
        .enumerate()
        .map(|(c, &step)| CheckpointCloud {
            step,
            states_s: per_run.iter().map(|r| r[c].0.clone()).collect(),
            states_s_prime: per_run.iter().map(|r| r[c].1.clone()).collect(),
        })
        .collect();
    Ok(EnsembleClouds { dim: dim.get() as usize, clouds })
}
