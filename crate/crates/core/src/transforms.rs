//! The composed, user-facing transforms: replicate-then-hash, block-
//! Hadamard-then-hash, an automatic cost-based choice between the two,
//! and the Gaussian-weighted ℓ1 estimator.
//!
//! One master seed fans out to all component streams through fixed domain
//! tags, so every transform here is a pure function of (params, seed).

use crate::error::Error;
use crate::hash_projection::{HashProjection, Sketch};
use crate::params::JlParams;
use crate::preconditioners::{BlockHadamard, ReplicationPlan};
use crate::randomness::{DomainTag, SeededSource};
use std::collections::HashSet;

/// Replicated hashing: k × d map equal to hashing the c-fold replication
/// of the input. Exactly c nonzeros of magnitude 1/√c per conceptual
/// column; applying costs c evaluations per nonzero of the input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseJl {
    k: usize,
    d: usize,
    plan: ReplicationPlan,
    h_prime: HashProjection,
    inv_sqrt_c: f64,
}

impl SparseJl {
    pub fn new(params: &JlParams) -> Self {
        Self::with_dims(params.k, params.c, params.d, params.seed)
    }

    /// Direct construction from explicit dimensions, used at small scale
    /// by oracles and diagnostics.
    pub fn with_dims(k: usize, c: usize, d: usize, seed: u64) -> Self {
        let plan = ReplicationPlan::new(c, d);
        Self {
            k,
            d,
            plan,
            h_prime: HashProjection::new(k, plan.output_dim(), seed),
            inv_sqrt_c: 1.0 / (c as f64).sqrt(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> usize {
        self.plan.c()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn plan(&self) -> &ReplicationPlan {
        &self.plan
    }

    /// The inner hash projection over the replicated column space.
    pub fn projection(&self) -> &HashProjection {
        &self.h_prime
    }

    pub fn apply_sparse(&self, entries: &[(usize, f64)]) -> Result<Vec<f64>, Error> {
        let mut y = vec![0.0; self.k];
        for &(j, v) in entries {
            if j >= self.d {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: self.d,
                });
            }
            self.accumulate(&mut y, j, v);
        }
        Ok(y)
    }

    pub fn apply_dense(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.k];
        for (j, &v) in x.iter().enumerate() {
            if v != 0.0 {
                self.accumulate(&mut y, j, v);
            }
        }
        Ok(y)
    }

    #[inline]
    fn accumulate(&self, y: &mut [f64], j: usize, v: f64) {
        let scaled = v * self.inv_sqrt_c;
        let base = j * self.plan.c();
        for t in base..base + self.plan.c() {
            y[self.h_prime.row_unchecked(t)] += self.h_prime.sign_unchecked(t) * scaled;
        }
    }

    /// A fresh turnstile sketch over the replicated column space.
    pub fn new_sketch(&self) -> Sketch {
        Sketch::new(self.h_prime)
    }

    /// Routes one turnstile update through the replication: c sketch
    /// updates of delta/√c.
    pub fn sketch_update(&self, sketch: &mut Sketch, j: usize, delta: f64) -> Result<(), Error> {
        if j >= self.d {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.d,
            });
        }
        if sketch.projection() != &self.h_prime {
            return Err(Error::ProjectionMismatch);
        }
        let scaled = delta * self.inv_sqrt_c;
        let base = j * self.plan.c();
        for t in base..base + self.plan.c() {
            sketch.update(t, scaled)?;
        }
        Ok(())
    }
}

/// Block-Hadamard preconditioning followed by hashing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HadamardJl {
    k: usize,
    g: BlockHadamard,
    h: HashProjection,
}

impl HadamardJl {
    /// Refuses parameters whose dimension is at or below the
    /// 6c·ln(3c/δ) threshold the tail bound needs.
    pub fn new(params: &JlParams) -> Result<Self, Error> {
        let threshold = params.hadamard_dim_threshold();
        if (params.d as f64) <= threshold {
            return Err(Error::HadamardDimension {
                d: params.d,
                threshold,
            });
        }
        Self::with_dims(params.k, params.b, params.d, params.seed)
    }

    /// Direct construction from explicit dimensions (shape checks only),
    /// used at small scale by oracles and diagnostics.
    pub fn with_dims(k: usize, b: usize, d: usize, seed: u64) -> Result<Self, Error> {
        let g = BlockHadamard::new(b, d, seed)?;
        let h = HashProjection::new(k, g.padded_dim(), seed);
        Ok(Self { k, g, h })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.g.d()
    }

    pub fn preconditioner(&self) -> &BlockHadamard {
        &self.g
    }

    pub fn projection(&self) -> &HashProjection {
        &self.h
    }

    /// G·x alone, for intermediate-norm checks.
    pub fn precondition(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.g.apply(x)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let gx = self.g.apply(x)?;
        self.h.apply_dense(&gx)
    }
}

/// Which path an automatic application took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathTag {
    /// Replicated hashing, chosen on cost.
    Phi,
    /// Block-Hadamard hashing, chosen on cost.
    Hadamard,
    /// Replicated hashing, forced because d is below the Hadamard
    /// dimension threshold.
    PhiFallback,
}

impl PathTag {
    pub fn name(&self) -> &'static str {
        match self {
            PathTag::Phi => "phi",
            PathTag::Hadamard => "hg",
            PathTag::PhiFallback => "phi-fallback",
        }
    }
}

/// Applies whichever composed path is cheaper by operation count:
/// replication costs c per nonzero, the Hadamard path costs
/// b·(log₂b + 1) per touched block plus one hashing pass over the padded
/// space. Falls back to replication when the Hadamard path's dimension
/// precondition fails.
pub fn auto_apply(
    params: &JlParams,
    entries: &[(usize, f64)],
) -> Result<(Vec<f64>, PathTag), Error> {
    for &(j, _) in entries {
        if j >= params.d {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: params.d,
            });
        }
    }

    if (params.d as f64) <= params.hadamard_dim_threshold() {
        let y = SparseJl::new(params).apply_sparse(entries)?;
        return Ok((y, PathTag::PhiFallback));
    }

    let touched_blocks: HashSet<usize> = entries
        .iter()
        .filter(|&&(_, v)| v != 0.0)
        .map(|&(j, _)| j / params.b)
        .collect();
    let log2_b = params.b.trailing_zeros() as u128;
    let num_blocks = params.d.div_ceil(params.b);
    let phi_cost = params.c as u128 * entries.len() as u128;
    let hg_cost = touched_blocks.len() as u128 * params.b as u128 * (log2_b + 1)
        + (num_blocks * params.b) as u128;

    if phi_cost <= hg_cost {
        let y = SparseJl::new(params).apply_sparse(entries)?;
        Ok((y, PathTag::Phi))
    } else {
        let mut x = vec![0.0; params.d];
        for &(j, v) in entries {
            x[j] += v;
        }
        let y = HadamardJl::new(params)?.apply(&x)?;
        Ok((y, PathTag::Hadamard))
    }
}

/// Gaussian-weighted hashing estimator: replicate with c = ⌈k/ε⌉, hash
/// with N(0,1) column weights, and read the norm off the mean absolute
/// bucket value. Conditioned on the buckets, each bucket value is
/// N(0, σᵢ), so E|Yᵢ| = σᵢ·β₀ with β₀ = E|N(0,1)| = √(2/π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1Embed {
    k: usize,
    d: usize,
    plan: ReplicationPlan,
    bucket_src: SeededSource,
    gauss_src: SeededSource,
    beta0: f64,
    inv_sqrt_c: f64,
}

impl L1Embed {
    pub fn new(params: &JlParams) -> Self {
        Self::with_dims(params.k, l1_replication(params), params.d, params.seed)
    }

    pub fn with_dims(k: usize, c: usize, d: usize, seed: u64) -> Self {
        let plan = ReplicationPlan::new(c, d);
        Self {
            k,
            d,
            plan,
            bucket_src: SeededSource::new(seed, DomainTag::Buckets),
            gauss_src: SeededSource::new(seed, DomainTag::Gaussians),
            beta0: (2.0 / std::f64::consts::PI).sqrt(),
            inv_sqrt_c: 1.0 / (c as f64).sqrt(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c(&self) -> usize {
        self.plan.c()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// β₀ = E|N(0,1)| = √(2/π).
    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// Bucket values Yᵢ = Σ (Px)_t · g_t over replicated coordinates.
    pub fn bucket_values(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let c = self.plan.c();
        let mut y = vec![0.0; self.k];
        for (j, &v) in x.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let scaled = v * self.inv_sqrt_c;
            let base = j * c;
            for t in base..base + c {
                let row = self.bucket_src.bucket_at(t as u64, self.k as u64) as usize;
                y[row] += self.gauss_src.gaussian_at(t as u64) * scaled;
            }
        }
        Ok(y)
    }

    /// Per-bucket ℓ2 masses σᵢ of the replicated vector.
    pub fn bucket_sigmas(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let c = self.plan.c();
        let mut sq = vec![0.0; self.k];
        for (j, &v) in x.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let scaled_sq = v * v / c as f64;
            let base = j * c;
            for t in base..base + c {
                let row = self.bucket_src.bucket_at(t as u64, self.k as u64) as usize;
                sq[row] += scaled_sq;
            }
        }
        Ok(sq.into_iter().map(f64::sqrt).collect())
    }

    /// (1/(β₀√k))·Σᵢ |Yᵢ|. Positively homogeneous of degree 1; the
    /// concentration claim applies to unit input.
    pub fn estimate(&self, x: &[f64]) -> Result<f64, Error> {
        let y = self.bucket_values(x)?;
        let sum_abs: f64 = y.iter().map(|v| v.abs()).sum();
        Ok(sum_abs / (self.beta0 * (self.k as f64).sqrt()))
    }
}

/// The ℓ1 path's replication factor, ⌈k/ε⌉.
pub fn l1_replication(params: &JlParams) -> usize {
    (params.k as f64 / params.epsilon).ceil() as usize
}
