//! The two densification devices applied ahead of hashing, plus the
//! per-bucket mass statistics behind the goodness check.
//!
//! Both preconditioners are exact ℓ2 isometries. Replication spreads each
//! coordinate over c slots of value x/√c, shrinking ℓ∞ by √c; the block
//! Hadamard multiplies each b-sized block by a random ±1 diagonal and an
//! orthonormal Walsh–Hadamard matrix, flattening any block whose mass is
//! not adversarially concentrated.

use crate::error::Error;
use crate::hash_projection::HashProjection;
use crate::randomness::{DomainTag, SeededSource};

/// Coordinate replication: j spreads to the c contiguous slots
/// [j·c, (j+1)·c) with value x_j/√c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplicationPlan {
    c: usize,
    d: usize,
}

impl ReplicationPlan {
    pub fn new(c: usize, d: usize) -> Self {
        assert!(c >= 1, "replication factor must be positive");
        assert!(d >= 1, "input dimension must be positive");
        Self { c, d }
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.c * self.d
    }

    pub fn replicate_dense(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let inv_sqrt_c = 1.0 / (self.c as f64).sqrt();
        let mut out = vec![0.0; self.output_dim()];
        for (j, &v) in x.iter().enumerate() {
            let scaled = v * inv_sqrt_c;
            let base = j * self.c;
            out[base..base + self.c].fill(scaled);
        }
        Ok(out)
    }

    /// Sparse-in, sparse-out replication; nnz grows exactly by the
    /// factor c.
    pub fn replicate_sparse(&self, entries: &[(usize, f64)]) -> Result<Vec<(usize, f64)>, Error> {
        let inv_sqrt_c = 1.0 / (self.c as f64).sqrt();
        let mut out = Vec::with_capacity(entries.len() * self.c);
        for &(j, v) in entries {
            if j >= self.d {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: self.d,
                });
            }
            let scaled = v * inv_sqrt_c;
            let base = j * self.c;
            for t in 0..self.c {
                out.push((base + t, scaled));
            }
        }
        Ok(out)
    }
}

/// In-place orthonormal Walsh–Hadamard transform of a power-of-two-length
/// vector. O(m log m); the 1/√m normalization is applied once at the end,
/// so the map is symmetric orthonormal and therefore an involution.
pub fn fwht_in_place(z: &mut [f64]) -> Result<(), Error> {
    let m = z.len();
    if !m.is_power_of_two() {
        return Err(Error::NonPowerOfTwo { len: m });
    }
    let mut h = 1;
    while h < m {
        let mut i = 0;
        while i < m {
            for j in i..i + h {
                let a = z[j];
                let b = z[j + h];
                z[j] = a + b;
                z[j + h] = a - b;
            }
            i += 2 * h;
        }
        h *= 2;
    }
    let scale = 1.0 / (m as f64).sqrt();
    for v in z.iter_mut() {
        *v *= scale;
    }
    Ok(())
}

/// Block-diagonal randomized Hadamard preconditioner: each b-sized block
/// is an independent F·D with D a seeded ±1 diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockHadamard {
    b: usize,
    d: usize,
    num_blocks: usize,
    padded_dim: usize,
    diag_src: SeededSource,
}

impl BlockHadamard {
    pub fn new(b: usize, d: usize, master_seed: u64) -> Result<Self, Error> {
        if !b.is_power_of_two() {
            return Err(Error::NonPowerOfTwo { len: b });
        }
        assert!(d >= 1, "input dimension must be positive");
        let num_blocks = d.div_ceil(b);
        Ok(Self {
            b,
            d,
            num_blocks,
            padded_dim: num_blocks * b,
            diag_src: SeededSource::new(master_seed, DomainTag::HadamardDiagonal),
        })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn padded_dim(&self) -> usize {
        self.padded_dim
    }

    /// Diagonal sign at padded coordinate `i`.
    #[inline]
    pub fn diagonal_at(&self, i: usize) -> f64 {
        self.diag_src.sign_at(i as u64)
    }

    /// y = G·x with blocks that contain no nonzero skipped entirely.
    ///
    /// The output lives on the padded space (`padded_dim` coordinates;
    /// equal to d when b divides d). The transform spreads real energy
    /// into the padding of a partial block, so the padding is kept —
    /// truncating it would break the isometry.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.apply_impl(x, true)
    }

    /// Same map with no block skipping; output is identical to `apply`.
    pub fn apply_unskipped(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.apply_impl(x, false)
    }

    fn apply_impl(&self, x: &[f64], skip_zero_blocks: bool) -> Result<Vec<f64>, Error> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.padded_dim];
        for t in 0..self.num_blocks {
            let lo = t * self.b;
            let hi = usize::min(lo + self.b, self.d);
            let src = &x[lo..hi];
            if skip_zero_blocks && src.iter().all(|&v| v == 0.0) {
                continue;
            }
            let dst = &mut y[lo..lo + self.b];
            for (i, &v) in src.iter().enumerate() {
                dst[i] = v * self.diag_src.sign_at((lo + i) as u64);
            }
            fwht_in_place(dst).expect("block length is a power of two");
        }
        Ok(y)
    }
}

/// Per-bucket squared masses of a vector under a hash projection, with
/// goodness flags against the σ*² threshold. The hash itself is good iff
/// every bucket is.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketStats {
    /// σᵢ² per bucket.
    pub sigmas: Vec<f64>,
    pub sigma_star_sq: f64,
    /// good_flags[i] ⇔ sigmas[i] ≤ sigma_star_sq.
    pub good_flags: Vec<bool>,
}

impl BucketStats {
    pub fn all_good(&self) -> bool {
        self.good_flags.iter().all(|&g| g)
    }

    /// Σᵢ σᵢ², which equals ‖x‖₂² up to fp reordering.
    pub fn total(&self) -> f64 {
        self.sigmas.iter().sum()
    }
}

/// σᵢ² = Σ_{j: bucket(j)=i} x_j² for a dense x over the projection's
/// column space.
pub fn bucket_masses(h: &HashProjection, x: &[f64]) -> Result<Vec<f64>, Error> {
    if x.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: x.len(),
        });
    }
    let mut sigmas = vec![0.0; h.k()];
    for (j, &v) in x.iter().enumerate() {
        if v != 0.0 {
            sigmas[h.row_unchecked(j)] += v * v;
        }
    }
    Ok(sigmas)
}

pub fn bucket_stats(
    h: &HashProjection,
    x: &[f64],
    sigma_star_sq: f64,
) -> Result<BucketStats, Error> {
    let sigmas = bucket_masses(h, x)?;
    let good_flags = sigmas.iter().map(|&s| s <= sigma_star_sq).collect();
    Ok(BucketStats {
        sigmas,
        sigma_star_sq,
        good_flags,
    })
}
