//! Residual vector quantization: one k-means codebook per level, each
//! trained on the residuals left by the levels above it.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SidError;

pub const MAX_LLOYD_ITERATIONS: usize = 100;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RvqModel {
    pub dim: usize,
    /// `codebooks[level][code]` is a centroid of dimension `dim`.
    pub codebooks: Vec<Vec<Vec<f64>>>,
    /// Total squared error of each level's assignment step, one entry per Lloyd iteration.
    pub error_trace: Vec<Vec<f64>>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (idx, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (idx, d);
        }
    }
    best
}

/// k-means++ seeding. Stops early once every point coincides with a
/// chosen centroid, so the codebook may hold fewer than `k` entries.
fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let pick = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            Err(_) => break,
        };
        let chosen = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &chosen));
        }
        centroids.push(chosen);
    }
    centroids
}

struct Clustering {
    centroids: Vec<Vec<f64>>,
    trace: Vec<f64>,
}

fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Clustering {
    let dim = points[0].len();
    let mut centroids = seed_centroids(points, k, rng);
    let mut trace = Vec::new();
    let mut assignment = vec![0usize; points.len()];
    for iter in 0..MAX_LLOYD_ITERATIONS {
        let mut error = 0.0;
        for (slot, p) in assignment.iter_mut().zip(points) {
            let (idx, d) = nearest(p, &centroids);
            *slot = idx;
            error += d;
        }
        let previous = trace.last().copied();
        trace.push(error);

        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (&idx, p) in assignment.iter().zip(points) {
            counts[idx] += 1;
            for (s, x) in sums[idx].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((c, sum), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            // empty clusters keep their previous centroid
            if n > 0 {
                *c = sum.into_iter().map(|s| s / n as f64).collect();
            }
        }

        if iter > 0 {
            let prev = previous.unwrap_or(error);
            if prev <= 0.0 || (prev - error) / prev < RELATIVE_TOLERANCE {
                break;
            }
        }
    }
    Clustering { centroids, trace }
}

impl RvqModel {
    /// Trains `levels` codebooks of at most `codebook_size` centroids each.
    pub fn train(
        data: &[Vec<f64>],
        levels: usize,
        codebook_size: usize,
        seed: u64,
    ) -> Result<Self, SidError> {
        let first = data.first().ok_or(SidError::EmptyCatalog)?;
        let dim = first.len();
        if dim == 0 {
            return Err(SidError::Embedding(
                "embedding vectors must be non-empty".into(),
            ));
        }
        if let Some(bad) = data.iter().position(|v| v.len() != dim) {
            return Err(SidError::DimensionMismatch {
                expected: dim,
                found: data[bad].len(),
            });
        }
        if data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(SidError::Embedding("non-finite embedding value".into()));
        }
        if levels == 0 || codebook_size == 0 {
            return Err(SidError::Config(
                "rvq levels and codebook size must be at least 1".into(),
            ));
        }

        let mut residuals = data.to_vec();
        let mut codebooks = Vec::with_capacity(levels);
        let mut error_trace = Vec::with_capacity(levels);
        for level in 0..levels {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(level as u64));
            let clustering = lloyd(&residuals, codebook_size, &mut rng);
            for r in residuals.iter_mut() {
                let (idx, _) = nearest(r, &clustering.centroids);
                for (x, c) in r.iter_mut().zip(&clustering.centroids[idx]) {
                    *x -= c;
                }
            }
            codebooks.push(clustering.centroids);
            error_trace.push(clustering.trace);
        }
        Ok(Self {
            dim,
            codebooks,
            error_trace,
        })
    }

    pub fn levels(&self) -> usize {
        self.codebooks.len()
    }

    /// Greedy nearest-centroid code per level on successive residuals.
    pub fn encode(&self, v: &[f64]) -> Result<Vec<u16>, SidError> {
        Ok(self.encode_with_residuals(v)?.0)
    }

    /// Codes plus the squared residual norm left after each level.
    pub fn encode_with_residuals(&self, v: &[f64]) -> Result<(Vec<u16>, Vec<f64>), SidError> {
        if v.len() != self.dim {
            return Err(SidError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        let mut residual = v.to_vec();
        let mut codes = Vec::with_capacity(self.levels());
        let mut norms = Vec::with_capacity(self.levels());
        for codebook in &self.codebooks {
            let (idx, _) = nearest(&residual, codebook);
            for (x, c) in residual.iter_mut().zip(&codebook[idx]) {
                *x -= c;
            }
            codes.push(idx as u16);
            norms.push(residual.iter().map(|x| x * x).sum());
        }
        Ok((codes, norms))
    }

    /// Sum of squared reconstruction errors over `data` after each level.
    pub fn reconstruction_errors(&self, data: &[Vec<f64>]) -> Result<Vec<f64>, SidError> {
        let mut totals = vec![0.0; self.levels()];
        for v in data {
            let (_, norms) = self.encode_with_residuals(v)?;
            for (t, n) in totals.iter_mut().zip(norms) {
                *t += n;
            }
        }
        Ok(totals)
    }
}
