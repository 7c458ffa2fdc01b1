//! Time-conditioned Gaussian mixture over `[t, x_rel, y_rel, θ_rel]`.
//!
//! Training runs EM in a per-dimension standardized space (zero mean, unit
//! population variance) so that the covariance floor means the same thing for
//! time, pixels and radians. Parameters are mapped back to data units before
//! they leave this module.
//!
//! Prediction conditions the joint on time (GMR). Orientation is blended
//! between the two most responsible components along the shorter arc.

use std::f64::consts::PI;

use nalgebra::{Cholesky, Matrix2, Matrix4, SymmetricEigen, Vector2, Vector3, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::Datapoint;
use crate::geometry::slerp_angle_unwrapped;
use crate::kmeans::{kmeans, DEFAULT_MAX_ITERS};

pub const DIM: usize = 4;

/// Free parameters per component: prior + mean + symmetric covariance.
const PARAMS_PER_COMPONENT: usize = 1 + DIM + DIM * (DIM + 1) / 2;

/// Responsibility mass below which a component counts as dead.
const DEAD_COMPONENT_MASS: f64 = 1e-12;

/// Above this responsibility the orientation is taken from one component alone.
const DOMINANT_RESPONSIBILITY: f64 = 1.0 - 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    priors: Vec<f64>,
    means: Vec<Vector4<f64>>,
    covariances: Vec<Matrix4<f64>>,
}

impl MixtureModel {
    /// Validates and builds a model. Priors must sum to 1 and covariances be
    /// symmetric positive semi-definite (both to 1e-9).
    pub fn new(
        priors: Vec<f64>,
        means: Vec<Vector4<f64>>,
        covariances: Vec<Matrix4<f64>>,
    ) -> Result<Self> {
        let n = priors.len();
        if n == 0 {
            return Err(Error::Validation("mixture has no components".into()));
        }
        if means.len() != n || covariances.len() != n {
            return Err(Error::Validation(format!(
                "{n} priors but {} means and {} covariances",
                means.len(),
                covariances.len()
            )));
        }
        if priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Validation("priors must be finite and non-negative".into()));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("priors sum to {sum}, not 1")));
        }
        for (i, (m, c)) in means.iter().zip(&covariances).enumerate() {
            if !m.iter().chain(c.iter()).all(|v| v.is_finite()) {
                return Err(Error::Validation(format!("component {i} has non-finite parameters")));
            }
            let asym = (c - c.transpose()).amax();
            if asym > 1e-9 {
                return Err(Error::Validation(format!(
                    "covariance {i} is not symmetric (max deviation {asym:e})"
                )));
            }
            let min_eig = SymmetricEigen::new(*c).eigenvalues.min();
            if min_eig < 0.0 {
                return Err(Error::Validation(format!(
                    "covariance {i} has negative eigenvalue {min_eig:e}"
                )));
            }
            if c[(0, 0)] <= 0.0 {
                return Err(Error::Validation(format!(
                    "covariance {i} has zero time variance"
                )));
            }
        }
        Ok(Self {
            priors,
            means,
            covariances,
        })
    }

    pub fn component_count(&self) -> usize {
        self.priors.len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[Vector4<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[Matrix4<f64>] {
        &self.covariances
    }

    /// Total log-likelihood of `points` under the mixture.
    pub fn log_likelihood(&self, points: &[Vector4<f64>]) -> f64 {
        let comps = ComponentCache::build(&self.priors, &self.means, &self.covariances)
            .expect("validated covariances factorize");
        let mut buf = vec![0.0; self.component_count()];
        points
            .iter()
            .map(|x| comps.log_joint(x, &mut buf))
            .sum()
    }

    /// Number of free parameters.
    pub fn parameter_count(&self) -> usize {
        parameter_count(self.component_count())
    }
}

pub fn parameter_count(components: usize) -> usize {
    components * PARAMS_PER_COMPONENT - 1
}

/// Bayesian information criterion `−2·loglik + params·ln(n)`.
pub fn bic(log_likelihood: f64, components: usize, samples: usize) -> f64 {
    -2.0 * log_likelihood + parameter_count(components) as f64 * (samples as f64).ln()
}

/// Component count: fixed, or an inclusive range searched by BIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentCount {
    Fixed(usize),
    Range { min: usize, max: usize },
}

impl ComponentCount {
    pub fn candidates(&self) -> std::ops::RangeInclusive<usize> {
        match *self {
            ComponentCount::Fixed(n) => n..=n,
            ComponentCount::Range { min, max } => min..=max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub components: ComponentCount,
    pub max_iters: usize,
    /// Relative log-likelihood improvement below which EM stops.
    pub loglik_tol: f64,
    /// Eigenvalue floor for covariances, in standardized units.
    pub floor: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            components: ComponentCount::Range { min: 10, max: 30 },
            max_iters: 500,
            loglik_tol: 1e-6,
            floor: 1e-6,
            seed: 0,
            restarts: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("gmm.max_iters must be >= 1".into()));
        }
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(Error::Config("gmm.floor must be > 0".into()));
        }
        if self.loglik_tol.is_nan() || self.loglik_tol < 0.0 {
            return Err(Error::Config("gmm.tol must be >= 0".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("gmm.restarts must be >= 1".into()));
        }
        let r = self.components.candidates();
        if *r.start() == 0 || r.is_empty() {
            return Err(Error::Config("gmm.N must be >= 1 and min <= max".into()));
        }
        Ok(())
    }
}

/// Outcome of one EM fit (best over restarts).
#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub model: MixtureModel,
    /// Final log-likelihood in data units.
    pub log_likelihood: f64,
    /// Log-likelihood after each E-step, data units.
    pub loglik_trace: Vec<f64>,
    /// Per M-step, how many covariances hit the eigenvalue floor.
    pub floor_activations: Vec<usize>,
    pub converged: bool,
    pub restart: usize,
    /// Components that were re-seeded after dying.
    pub reseeded: Vec<usize>,
}

impl EmFit {
    pub fn iterations(&self) -> usize {
        self.loglik_trace.len().saturating_sub(1)
    }
}

pub fn datapoints_to_vectors(data: &[Datapoint]) -> Vec<Vector4<f64>> {
    data.iter().map(|d| Vector4::from(d.to_array())).collect()
}

/// Trains a mixture with a fixed component count (`config.components` must be
/// `Fixed`, or the lower bound of a range is used).
pub fn em_train(data: &[Datapoint], config: &TrainConfig) -> Result<MixtureModel> {
    let n = *config.components.candidates().start();
    em_fit(&datapoints_to_vectors(data), n, config).map(|f| f.model)
}

/// EM with `components` Gaussians on raw 4-D points, best of `restarts`.
pub fn em_fit(points: &[Vector4<f64>], components: usize, config: &TrainConfig) -> Result<EmFit> {
    config.validate()?;
    if components == 0 {
        return Err(Error::Config("component count must be >= 1".into()));
    }
    if points.len() < components {
        return Err(Error::TooFewPoints {
            points: points.len(),
            required: components,
        });
    }
    if points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::Validation("datapoints must be finite".into()));
    }

    let std = Standardizer::fit(points);
    let z: Vec<Vector4<f64>> = points.iter().map(|p| std.forward(p)).collect();

    let runs: Vec<Result<RawFit>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            run_em(&z, components, config, &mut rng)
        })
        .collect();

    let mut best: Option<(usize, RawFit)> = None;
    let mut first_err = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok(fit) => {
                if best.as_ref().is_none_or(|(_, b)| fit.log_likelihood > b.log_likelihood) {
                    best = Some((r, fit));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((restart, raw)) = best else {
        return Err(first_err.expect("at least one restart ran"));
    };

    let offset = std.log_jacobian() * points.len() as f64;
    let means = raw.means.iter().map(|m| std.inverse_mean(m)).collect();
    let covariances = raw.covariances.iter().map(|c| std.inverse_cov(c)).collect();
    let model = MixtureModel::new(raw.priors, means, covariances)?;
    Ok(EmFit {
        model,
        log_likelihood: raw.log_likelihood + offset,
        loglik_trace: raw.trace.iter().map(|l| l + offset).collect(),
        floor_activations: raw.floor_activations,
        converged: raw.converged,
        restart,
        reseeded: raw.reseeded,
    })
}

/// Model-selection outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub components: usize,
    /// `(N, BIC)` for every candidate, in ascending N.
    pub scores: Vec<(usize, f64)>,
    pub fit: EmFit,
}

/// Fits every candidate component count and keeps the one with the lowest
/// BIC (ties go to the smaller N).
pub fn select_components(
    points: &[Vector4<f64>],
    range: ComponentCount,
    config: &TrainConfig,
) -> Result<Selection> {
    let candidates: Vec<usize> = range.candidates().collect();
    let Some(&max) = candidates.last() else {
        return Err(Error::Config("empty component range".into()));
    };
    if max > points.len() {
        return Err(Error::TooFewPoints {
            points: points.len(),
            required: max,
        });
    }
    let fits: Vec<Result<EmFit>> = candidates
        .par_iter()
        .map(|&n| em_fit(points, n, config))
        .collect();
    let mut scores = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, usize, EmFit)> = None;
    for (&n, fit) in candidates.iter().zip(fits) {
        let fit = fit?;
        let score = bic(fit.log_likelihood, n, points.len());
        scores.push((n, score));
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, n, fit));
        }
    }
    let (_, components, fit) = best.expect("non-empty candidates");
    Ok(Selection {
        components,
        scores,
        fit,
    })
}

/// Trains according to `config.components`: directly for a fixed N, through
/// BIC selection for a range.
pub fn train(points: &[Vector4<f64>], config: &TrainConfig) -> Result<Selection> {
    select_components(points, config.components, config)
}

#[derive(Debug, Clone)]
struct Standardizer {
    mean: Vector4<f64>,
    scale: Vector4<f64>,
}

impl Standardizer {
    fn fit(points: &[Vector4<f64>]) -> Self {
        let n = points.len() as f64;
        let mean = points.iter().sum::<Vector4<f64>>() / n;
        let var = points
            .iter()
            .map(|p| (p - mean).component_mul(&(p - mean)))
            .sum::<Vector4<f64>>()
            / n;
        let scale = var.zip_map(&mean, |v, m| {
            let s = v.sqrt();
            if s > 1e-12 * m.abs().max(1.0) {
                s
            } else {
                1.0
            }
        });
        Self { mean, scale }
    }

    fn forward(&self, p: &Vector4<f64>) -> Vector4<f64> {
        (p - self.mean).component_div(&self.scale)
    }

    fn inverse_mean(&self, z: &Vector4<f64>) -> Vector4<f64> {
        self.mean + z.component_mul(&self.scale)
    }

    fn inverse_cov(&self, c: &Matrix4<f64>) -> Matrix4<f64> {
        let s = Matrix4::from_diagonal(&self.scale);
        let out = s * c * s;
        (out + out.transpose()) * 0.5
    }

    /// `−Σ ln scale_d`, the per-point log-density change from z to data units.
    fn log_jacobian(&self) -> f64 {
        -self.scale.iter().map(|s| s.ln()).sum::<f64>()
    }
}

/// Factorized components for repeated density evaluation.
struct ComponentCache {
    log_priors: Vec<f64>,
    means: Vec<Vector4<f64>>,
    chols: Vec<Cholesky<f64, nalgebra::U4>>,
    log_norms: Vec<f64>,
}

impl ComponentCache {
    fn build(priors: &[f64], means: &[Vector4<f64>], covs: &[Matrix4<f64>]) -> Option<Self> {
        let mut chols = Vec::with_capacity(covs.len());
        let mut log_norms = Vec::with_capacity(covs.len());
        for c in covs {
            let chol = Cholesky::new(*c)?;
            let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            log_norms.push(-0.5 * (DIM as f64 * LN_2PI + log_det));
            chols.push(chol);
        }
        Some(Self {
            log_priors: priors.iter().map(|p| p.ln()).collect(),
            means: means.to_vec(),
            chols,
            log_norms,
        })
    }

    /// Fills `out[k] = ln π_k + ln N(x; μ_k, Σ_k)` and returns their log-sum-exp.
    #[allow(clippy::needless_range_loop)]
    fn log_joint(&self, x: &Vector4<f64>, out: &mut [f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for k in 0..self.means.len() {
            let d = x - self.means[k];
            let y = self.chols[k]
                .l_dirty()
                .solve_lower_triangular(&d)
                .expect("positive diagonal");
            let v = self.log_priors[k] + self.log_norms[k] - 0.5 * y.norm_squared();
            out[k] = v;
            max = max.max(v);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + out.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }
}

struct RawFit {
    priors: Vec<f64>,
    means: Vec<Vector4<f64>>,
    covariances: Vec<Matrix4<f64>>,
    log_likelihood: f64,
    trace: Vec<f64>,
    floor_activations: Vec<usize>,
    converged: bool,
    reseeded: Vec<usize>,
}

/// Raises eigenvalues below `floor` to `floor`. Returns whether it changed anything.
fn apply_floor(c: &mut Matrix4<f64>, floor: f64) -> bool {
    *c = (*c + c.transpose()) * 0.5;
    if Cholesky::new(*c - Matrix4::identity() * floor).is_some() {
        return false;
    }
    let eig = SymmetricEigen::new(*c);
    let vals = eig.eigenvalues.map(|v| v.max(floor));
    let out = eig.eigenvectors * Matrix4::from_diagonal(&vals) * eig.eigenvectors.transpose();
    *c = (out + out.transpose()) * 0.5;
    true
}

fn covariance_of<'a>(
    points: impl Iterator<Item = &'a Vector4<f64>> + Clone,
    mean: &Vector4<f64>,
) -> Matrix4<f64> {
    let n = points.clone().count() as f64;
    points.fold(Matrix4::zeros(), |acc, p| {
        let d = p - mean;
        acc + d * d.transpose()
    }) / n
}

fn run_em(
    z: &[Vector4<f64>],
    k: usize,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<RawFit> {
    let n = z.len();
    let init = kmeans(z, k, DEFAULT_MAX_ITERS, rng)?;
    let mut priors = vec![0.0; k];
    let mut means = init.centroids.clone();
    let mut covs = vec![Matrix4::zeros(); k];
    for c in 0..k {
        let members = init.members(z, c);
        priors[c] = members.clone().count() as f64 / n as f64;
        covs[c] = covariance_of(members, &means[c]) + Matrix4::identity() * config.floor;
    }
    let global_cov = {
        let m = z.iter().sum::<Vector4<f64>>() / n as f64;
        let mut c = covariance_of(z.iter(), &m);
        apply_floor(&mut c, config.floor.max(1e-6));
        c
    };

    let mut resp = vec![0.0; n * k];
    let mut point_ll = vec![0.0; n];
    let mut trace = Vec::new();
    let mut floor_activations = Vec::new();
    let mut dead_streak = vec![0usize; k];
    let mut reseeded: Vec<usize> = Vec::new();
    let mut converged = false;

    for iter in 0..=config.max_iters {
        // E-step
        let cache = ComponentCache::build(&priors, &means, &covs).ok_or_else(|| {
            Error::DegenerateConfiguration("covariance lost positive definiteness".into())
        })?;
        let mut ll = 0.0;
        for (i, x) in z.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let lse = cache.log_joint(x, row);
            for r in row.iter_mut() {
                *r = (*r - lse).exp();
            }
            point_ll[i] = lse;
            ll += lse;
        }
        if !ll.is_finite() {
            return Err(Error::DegenerateConfiguration(
                "log-likelihood is not finite".into(),
            ));
        }
        let prev = trace.last().copied();
        trace.push(ll);
        if let Some(prev) = prev {
            if ll - prev < config.loglik_tol * prev.abs() {
                converged = true;
                break;
            }
        }
        if iter == config.max_iters {
            break;
        }

        // M-step
        let mut mass = vec![0.0; k];
        let mut sums = vec![Vector4::zeros(); k];
        for (i, x) in z.iter().enumerate() {
            for c in 0..k {
                let r = resp[i * k + c];
                mass[c] += r;
                sums[c] += x * r;
            }
        }
        let mut activations = 0;
        for c in 0..k {
            if mass[c] < DEAD_COMPONENT_MASS {
                dead_streak[c] += 1;
                if dead_streak[c] >= 2 {
                    if reseeded.contains(&c) {
                        return Err(Error::NumericalCollapse { component: c });
                    }
                    // Restart the component on the worst-explained point.
                    let worst = (0..n)
                        .min_by(|&a, &b| point_ll[a].total_cmp(&point_ll[b]))
                        .expect("non-empty data");
                    means[c] = z[worst];
                    covs[c] = global_cov;
                    priors[c] = 1.0 / k as f64;
                    reseeded.push(c);
                    dead_streak[c] = 0;
                } else {
                    priors[c] = mass[c] / n as f64;
                }
                continue;
            }
            dead_streak[c] = 0;
            let mean = sums[c] / mass[c];
            let mut cov = Matrix4::zeros();
            for (i, x) in z.iter().enumerate() {
                let d = x - mean;
                cov += d * d.transpose() * resp[i * k + c];
            }
            cov /= mass[c];
            if apply_floor(&mut cov, config.floor) {
                activations += 1;
            }
            priors[c] = mass[c] / n as f64;
            means[c] = mean;
            covs[c] = cov;
        }
        let total: f64 = priors.iter().sum();
        for p in &mut priors {
            *p /= total;
        }
        floor_activations.push(activations);
    }

    Ok(RawFit {
        priors,
        means,
        covariances: covs,
        log_likelihood: *trace.last().expect("at least one E-step"),
        trace,
        floor_activations,
        converged,
        reseeded,
    })
}

/// Position part of a GMR query.
#[derive(Debug, Clone, PartialEq)]
pub struct GmrOutput {
    pub time: f64,
    pub position_mean: Vector2<f64>,
    pub position_covariance: Matrix2<f64>,
    /// Conditional angle mean of each component at `time`.
    pub component_angles: Vec<f64>,
    pub responsibilities: Vec<f64>,
    /// `time` lies outside [0, 1].
    pub extrapolated: bool,
}

/// Conditions the joint on time.
///
/// `h_i ∝ π_i N(t; μ_t,i, Σ_tt,i)`; each component contributes its
/// conditional mean `μ_x,i + Σ_xt,i Σ_tt,i⁻¹ (t − μ_t,i)` and conditional
/// covariance `Σ_xx,i − Σ_xt,i Σ_tt,i⁻¹ Σ_tx,i`.
pub fn gmr(model: &MixtureModel, t: f64) -> GmrOutput {
    let k = model.component_count();
    let mut log_h = Vec::with_capacity(k);
    let mut cond_means: Vec<Vector3<f64>> = Vec::with_capacity(k);
    let mut cond_covs: Vec<Matrix2<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let mu = &model.means[i];
        let s = &model.covariances[i];
        let var_t = s[(0, 0)];
        let dt = t - mu[0];
        log_h.push(model.priors[i].ln() - 0.5 * ((2.0 * PI * var_t).ln() + dt * dt / var_t));
        let cross: Vector3<f64> = s.fixed_view::<3, 1>(1, 0).into_owned();
        cond_means.push(mu.fixed_rows::<3>(1) + cross * (dt / var_t));
        let cross_xy = cross.fixed_rows::<2>(0);
        let sxx: Matrix2<f64> = s.fixed_view::<2, 2>(1, 1).into_owned();
        let c = sxx - cross_xy * cross_xy.transpose() / var_t;
        cond_covs.push((c + c.transpose()) * 0.5);
    }
    let max = log_h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut h: Vec<f64> = log_h.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);

    let mut mean = Vector2::zeros();
    for (hi, m) in h.iter().zip(&cond_means) {
        mean += m.fixed_rows::<2>(0) * *hi;
    }
    let mut second = Matrix2::zeros();
    for ((hi, m), c) in h.iter().zip(&cond_means).zip(&cond_covs) {
        let mx = m.fixed_rows::<2>(0);
        second += (c + mx * mx.transpose()) * *hi;
    }
    let cov = second - mean * mean.transpose();

    GmrOutput {
        time: t,
        position_mean: mean,
        position_covariance: (cov + cov.transpose()) * 0.5,
        component_angles: cond_means.iter().map(|m| m[2]).collect(),
        responsibilities: h,
        extrapolated: !(0.0..=1.0).contains(&t),
    }
}

/// Orientation at `t` from an existing GMR evaluation.
///
/// Takes the two most responsible components, orders them by their time
/// means, and interpolates their conditional angles along the shorter arc
/// with weight `h_second / (h_first + h_second)`. The result stays on the
/// branch of the earlier component (it is not wrapped).
pub fn orientation_from(model: &MixtureModel, g: &GmrOutput) -> f64 {
    let h = &g.responsibilities;
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&a, &b| h[b].total_cmp(&h[a]).then(a.cmp(&b)));
    let top = order[0];
    if h.len() == 1 || h[top] > DOMINANT_RESPONSIBILITY {
        return g.component_angles[top];
    }
    let (mut i, mut j) = (top, order[1]);
    let t_i = model.means[i][0];
    let t_j = model.means[j][0];
    if t_j < t_i || (t_j == t_i && j < i) {
        std::mem::swap(&mut i, &mut j);
    }
    let s = h[j] / (h[i] + h[j]);
    slerp_angle_unwrapped(g.component_angles[i], g.component_angles[j], s.clamp(0.0, 1.0))
        .expect("fraction clamped to [0, 1]")
}

pub fn predict_orientation(model: &MixtureModel, t: f64) -> f64 {
    orientation_from(model, &gmr(model, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosePrediction {
    pub time: f64,
    pub position_mean: Vector2<f64>,
    pub position_covariance: Matrix2<f64>,
    /// Radians, not wrapped.
    pub angle: f64,
    pub responsibilities: Vec<f64>,
    pub extrapolated: bool,
}

pub fn predict_pose(model: &MixtureModel, t: f64) -> PosePrediction {
    let g = gmr(model, t);
    let angle = orientation_from(model, &g);
    PosePrediction {
        time: t,
        position_mean: g.position_mean,
        position_covariance: g.position_covariance,
        angle,
        responsibilities: g.responsibilities,
        extrapolated: g.extrapolated,
    }
}

pub fn predict_trajectory(model: &MixtureModel, times: &[f64]) -> Vec<PosePrediction> {
    times.iter().map(|&t| predict_pose(model, t)).collect()
}
