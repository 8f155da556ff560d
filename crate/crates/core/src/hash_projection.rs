//! The hashing projection and the linear turnstile sketch built on it.
//!
//! Each of the `dim` conceptual columns has exactly one nonzero, a ±1 at
//! a hashed row, both evaluated lazily from the seed. The matrix is never
//! stored; `column_of` is O(1), so `dim` can be astronomically large.

use crate::error::Error;
use crate::randomness::{DomainTag, SeededSource};

/// A k × dim projection with exactly one ±1 per column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HashProjection {
    k: usize,
    dim: usize,
    sign_src: SeededSource,
    bucket_src: SeededSource,
}

impl HashProjection {
    pub fn new(k: usize, dim: usize, master_seed: u64) -> Self {
        assert!(k >= 1, "k must be positive");
        assert!(dim >= 1, "dim must be positive");
        Self {
            k,
            dim,
            sign_src: SeededSource::new(master_seed, DomainTag::Signs),
            bucket_src: SeededSource::new(master_seed, DomainTag::Buckets),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn master_seed(&self) -> u64 {
        self.sign_src.master_seed()
    }

    #[inline]
    pub(crate) fn row_unchecked(&self, j: usize) -> usize {
        debug_assert!(j < self.dim);
        self.bucket_src.bucket_at(j as u64, self.k as u64) as usize
    }

    #[inline]
    pub(crate) fn sign_unchecked(&self, j: usize) -> f64 {
        debug_assert!(j < self.dim);
        self.sign_src.sign_at(j as u64)
    }

    /// Row and sign of column `j`.
    pub fn column_of(&self, j: usize) -> Result<(usize, f64), Error> {
        if j >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.dim,
            });
        }
        Ok((self.row_unchecked(j), self.sign_unchecked(j)))
    }

    /// y = H·x for sparse x given as (index, value) pairs. Duplicate
    /// indices are summed, matching turnstile semantics.
    pub fn apply_sparse(&self, entries: &[(usize, f64)]) -> Result<Vec<f64>, Error> {
        let mut y = vec![0.0; self.k];
        for &(j, v) in entries {
            if j >= self.dim {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: self.dim,
                });
            }
            y[self.row_unchecked(j)] += self.sign_unchecked(j) * v;
        }
        Ok(y)
    }

    /// y = H·x for dense x of length `dim`.
    pub fn apply_dense(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.k];
        for (j, &v) in x.iter().enumerate() {
            if v != 0.0 {
                y[self.row_unchecked(j)] += self.sign_unchecked(j) * v;
            }
        }
        Ok(y)
    }
}

/// Linear accumulator for turnstile streams.
///
/// After any sequence of updates the accumulator equals the projection
/// applied to the net vector of the stream, so sketches over the same
/// projection add: merging equals sketching the concatenated streams.
#[derive(Clone, Debug, PartialEq)]
pub struct Sketch {
    projection: HashProjection,
    accumulator: Vec<f64>,
    update_count: u64,
}

impl Sketch {
    pub fn new(projection: HashProjection) -> Self {
        let k = projection.k();
        Self {
            projection,
            accumulator: vec![0.0; k],
            update_count: 0,
        }
    }

    /// Rebuilds a sketch from serialized parts, e.g. a sketch file.
    pub fn from_parts(
        projection: HashProjection,
        accumulator: Vec<f64>,
        update_count: u64,
    ) -> Result<Self, Error> {
        if accumulator.len() != projection.k() {
            return Err(Error::DimensionMismatch {
                expected: projection.k(),
                got: accumulator.len(),
            });
        }
        Ok(Self {
            projection,
            accumulator,
            update_count,
        })
    }

    pub fn projection(&self) -> &HashProjection {
        &self.projection
    }

    pub fn accumulator(&self) -> &[f64] {
        &self.accumulator
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// Applies one turnstile update (j, delta).
    pub fn update(&mut self, j: usize, delta: f64) -> Result<(), Error> {
        if j >= self.projection.dim() {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.projection.dim(),
            });
        }
        self.accumulator[self.projection.row_unchecked(j)] +=
            self.projection.sign_unchecked(j) * delta;
        self.update_count += 1;
        Ok(())
    }

    /// Elementwise sum of two sketches over the same projection.
    pub fn merge(&self, other: &Sketch) -> Result<Sketch, Error> {
        if self.projection != other.projection {
            return Err(Error::ProjectionMismatch);
        }
        let accumulator = self
            .accumulator
            .iter()
            .zip(&other.accumulator)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Sketch {
            projection: self.projection,
            accumulator,
            update_count: self.update_count + other.update_count,
        })
    }

    /// Σᵢ accumulator[i]² — the squared-norm estimate of the net vector.
    pub fn sq_norm(&self) -> f64 {
        self.accumulator.iter().map(|v| v * v).sum()
    }
}
