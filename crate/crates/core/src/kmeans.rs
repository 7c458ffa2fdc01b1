//! Lloyd's k-means with k-means++ seeding, over fixed-dimension points.

use nalgebra::SVector;
use rand::Rng;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit<const D: usize> {
    pub centroids: Vec<SVector<f64, D>>,
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
    pub iterations: usize,
    /// Whether the first seeding had to be discarded because a cluster emptied.
    pub reseeded: bool,
}

impl<const D: usize> KMeansFit<D> {
    pub fn members<'a>(
        &'a self,
        points: &'a [SVector<f64, D>],
        cluster: usize,
    ) -> impl Iterator<Item = &'a SVector<f64, D>> + Clone + 'a {
        points
            .iter()
            .zip(&self.assignments)
            .filter(move |(_, a)| **a == cluster)
            .map(|(p, _)| p)
    }

    /// Within-cluster sum of squared distances.
    pub fn inertia(&self, points: &[SVector<f64, D>]) -> f64 {
        points
            .iter()
            .zip(&self.assignments)
            .map(|(p, &a)| (p - self.centroids[a]).norm_squared())
            .sum()
    }
}

/// Clusters `points` into `k` groups. Converges when assignments stop
/// changing or after `max_iters` Lloyd iterations. A seeding that produces an
/// empty cluster is retried once with fresh draws from `rng`.
pub fn kmeans<const D: usize, R: Rng + ?Sized>(
    points: &[SVector<f64, D>],
    k: usize,
    max_iters: usize,
    rng: &mut R,
) -> Result<KMeansFit<D>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            points: points.len(),
            required: k,
        });
    }
    for reseeded in [false, true] {
        let seeds = plus_plus_seeds(points, k, rng);
        if let Some((centroids, assignments, iterations)) = lloyd(points, seeds, max_iters) {
            return Ok(KMeansFit {
                centroids,
                assignments,
                iterations,
                reseeded,
            });
        }
    }
    Err(Error::EmptyClusterAfterReseed)
}

/// k-means++: first seed uniform, then each next seed drawn with probability
/// proportional to squared distance from the nearest chosen seed.
pub fn plus_plus_seeds<const D: usize, R: Rng + ?Sized>(
    points: &[SVector<f64, D>],
    k: usize,
    rng: &mut R,
) -> Vec<SVector<f64, D>> {
    let n = points.len();
    let mut seeds = Vec::with_capacity(k);
    seeds.push(points[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| (p - seeds[0]).norm_squared())
        .collect();
    while seeds.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|w| {
                    acc += w;
                    acc > target
                })
                .unwrap_or_else(|| d2.iter().rposition(|w| *w > 0.0).unwrap_or(n - 1))
        } else {
            rng.random_range(0..n)
        };
        let c = points[idx];
        for (p, d) in points.iter().zip(d2.iter_mut()) {
            *d = d.min((p - c).norm_squared());
        }
        seeds.push(c);
    }
    seeds
}

fn nearest<const D: usize>(p: &SVector<f64, D>, centroids: &[SVector<f64, D>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = (p - c).norm_squared();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

type LloydOutput<const D: usize> = (Vec<SVector<f64, D>>, Vec<usize>, usize);

fn lloyd<const D: usize>(
    points: &[SVector<f64, D>],
    mut centroids: Vec<SVector<f64, D>>,
    max_iters: usize,
) -> Option<LloydOutput<D>> {
    let k = centroids.len();
    let mut assignments = vec![usize::MAX; points.len()];
    let mut iterations = 0;
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let c = nearest(p, &centroids);
            if c != *a {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        iterations += 1;
        let mut sums = vec![SVector::<f64, D>::zeros(); k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            sums[a] += p;
            counts[a] += 1;
        }
        if counts.contains(&0) {
            return None;
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(counts) {
            *c = s / n as f64;
        }
    }
    Some((centroids, assignments, iterations))
}
