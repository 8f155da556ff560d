//! Derivation of every constant the constructions need from (ε, δ, d, seed).
//!
//! All logarithms are natural. The derived fields are pure functions of
//! (ε, δ): re-deriving with equal inputs yields bit-identical values.

use crate::error::Error;
use std::fmt;

/// Derived constants for one transform instance.
#[derive(Clone, Debug, PartialEq)]
pub struct JlParams {
    /// Target relative distortion, 0 < ε < 1.
    pub epsilon: f64,
    /// Per-vector failure budget, 0 < δ < 1/10.
    pub delta: f64,
    /// Input dimension.
    pub d: usize,
    /// Master randomness seed.
    pub seed: u64,
    /// Target dimension: k = ⌈(12/ε²)·ln(1/δ)⌉.
    pub k: usize,
    /// Replication factor (nonzeros per composed column):
    /// c = ⌈(16/ε)·ln(1/δ)·ln²(k/δ)⌉.
    pub c: usize,
    /// Slack constant α = 1/(ε·ln(k/δ)).
    pub alpha: f64,
    /// Bucket goodness threshold σ*² = (1+α)/k.
    pub sigma_star_sq: f64,
    /// Hadamard block size: smallest power of two ≥ 6c·ln(3c/δ).
    pub b: usize,
}

/// Non-fatal conditions: an analysis assumption fails although the
/// construction itself still runs.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// α < 3; the bucket-error concentration argument assumes α ≥ 3.
    AlphaBelowThree { alpha: f64 },
    /// d ≤ 6c·ln(3c/δ); the block-Hadamard constructor will refuse
    /// these parameters.
    DimensionBelowHadamardThreshold { d: usize, threshold: f64 },
    /// δ ≥ 1/k²; the small-δ refinement of the tail bound is unavailable.
    DeltaNotBelowInverseKSquared { delta: f64, inv_k_sq: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::AlphaBelowThree { alpha } => {
                write!(
                    f,
                    "alpha = {alpha} < 3; the concentration analysis assumes alpha >= 3"
                )
            }
            Warning::DimensionBelowHadamardThreshold { d, threshold } => {
                write!(
                    f,
                    "d = {d} <= 6*c*ln(3*c/delta) = {threshold}; the block-Hadamard path is unavailable"
                )
            }
            Warning::DeltaNotBelowInverseKSquared { delta, inv_k_sq } => {
                write!(f, "delta = {delta} >= 1/k^2 = {inv_k_sq}; the small-delta tail refinement does not apply")
            }
        }
    }
}

impl JlParams {
    /// Derives all constants from the user inputs. Fails when ε or δ is
    /// outside the domain the guarantees require.
    pub fn derive(epsilon: f64, delta: f64, d: usize, seed: u64) -> Result<Self, Error> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::ParamDomain {
                name: "epsilon",
                value: epsilon,
                requirement: "0 < epsilon < 1",
            });
        }
        if !(delta > 0.0 && delta < 0.1) {
            return Err(Error::ParamDomain {
                name: "delta",
                value: delta,
                requirement: "0 < delta < 1/10",
            });
        }
        if d == 0 {
            return Err(Error::ParamDomain {
                name: "d",
                value: 0.0,
                requirement: "d >= 1",
            });
        }

        let ln_inv_delta = (1.0 / delta).ln();
        let k = ((12.0 / (epsilon * epsilon)) * ln_inv_delta).ceil() as usize;
        let ln_k_delta = (k as f64 / delta).ln();
        let c = ((16.0 / epsilon) * ln_inv_delta * ln_k_delta * ln_k_delta).ceil() as usize;
        let alpha = 1.0 / (epsilon * ln_k_delta);
        let sigma_star_sq = (1.0 + alpha) / k as f64;
        let b = hadamard_block_size(c, delta);

        Ok(Self {
            epsilon,
            delta,
            d,
            seed,
            k,
            c,
            alpha,
            sigma_star_sq,
            b,
        })
    }

    /// The real-valued dimension threshold 6c·ln(3c/δ) that the
    /// block-Hadamard path requires d to exceed.
    pub fn hadamard_dim_threshold(&self) -> f64 {
        6.0 * self.c as f64 * (3.0 * self.c as f64 / self.delta).ln()
    }

    /// Inspects the derived constants for failed proof assumptions.
    /// Returns warnings, never errors: the constructions stay well
    /// defined, only the stated probability bounds lose their backing.
    pub fn assumption_warnings(&self) -> Vec<Warning> {
        let mut warnings = Vec::new();
        if self.alpha < 3.0 {
            warnings.push(Warning::AlphaBelowThree { alpha: self.alpha });
        }
        let threshold = self.hadamard_dim_threshold();
        if (self.d as f64) <= threshold {
            warnings.push(Warning::DimensionBelowHadamardThreshold {
                d: self.d,
                threshold,
            });
        }
        let inv_k_sq = 1.0 / (self.k as f64 * self.k as f64);
        if self.delta >= inv_k_sq {
            warnings.push(Warning::DeltaNotBelowInverseKSquared {
                delta: self.delta,
                inv_k_sq,
            });
        }
        warnings
    }

    /// Flat key-value record, one `name=value` per line, fields in
    /// declaration order, full round-trip decimal precision.
    pub fn to_record(&self) -> String {
        format!(
            "epsilon={}\ndelta={}\nd={}\nseed={}\nk={}\nc={}\nalpha={}\nsigma_star_sq={}\nb={}\n",
            self.epsilon,
            self.delta,
            self.d,
            self.seed,
            self.k,
            self.c,
            self.alpha,
            self.sigma_star_sq,
            self.b
        )
    }
}

/// Smallest power of two ≥ 6c·ln(3c/δ).
pub fn hadamard_block_size(c: usize, delta: f64) -> usize {
    let raw = 6.0 * c as f64 * (3.0 * c as f64 / delta).ln();
    (raw.ceil() as usize).next_power_of_two()
}
