//! Oracles and Monte Carlo harnesses.
//!
//! Everything checkable gets a checker: explicit dense equivalents of the
//! fast paths at small dimensions, empirical failure rates of the
//! (1 ± ε) squared-norm guarantee against the 4δ budget, goodness and
//! ℓ∞-tail rates against δ, the bucket error decomposition, and the
//! column-intersection diagnostic.
//!
//! Trial seeds come from a dedicated stream indexed by trial number, so
//! reports are reproducible from (params, schedule) no matter how the
//! trials are scheduled across threads.

use crate::error::Error;
use crate::hash_projection::HashProjection;
use crate::params::JlParams;
use crate::preconditioners::{bucket_masses, bucket_stats, BlockHadamard};
use crate::randomness::{DomainTag, SeededSource};
use crate::transforms::{l1_replication, HadamardJl, L1Embed, SparseJl};
use rayon::prelude::*;

/// Largest dimension the explicit dense oracles will materialize.
pub const SMALL_INSTANCE_CAP: usize = 256;

/// An explicit k × d matrix captured from a linear map by applying it to
/// every standard basis vector. Ground truth for fast-path equivalence.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    k: usize,
    d: usize,
    cols: Vec<Vec<f64>>,
}

impl DenseMatrix {
    pub fn build<F>(apply: F, d: usize, k: usize) -> Result<Self, Error>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, Error>,
    {
        Self::build_with_cap(apply, d, k, SMALL_INSTANCE_CAP)
    }

    pub fn build_with_cap<F>(apply: F, d: usize, k: usize, cap: usize) -> Result<Self, Error>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, Error>,
    {
        if d > cap {
            return Err(Error::SmallInstanceCapExceeded { d, cap });
        }
        let mut cols = Vec::with_capacity(d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            let col = apply(&e)?;
            if col.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: col.len(),
                });
            }
            cols.push(col);
            e[j] = 0.0;
        }
        Ok(Self { k, d, cols })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.cols[j][i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d, "dense oracle dimension mismatch");
        let mut y = vec![0.0; self.k];
        for (j, &v) in x.iter().enumerate() {
            if v != 0.0 {
                for (yi, &m) in y.iter_mut().zip(&self.cols[j]) {
                    *yi += m * v;
                }
            }
        }
        y
    }
}

/// Input families for the distortion harness. All generate unit vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorFamily {
    /// Normalized Gaussian draw: uniform on the unit sphere.
    UniformOnSphere,
    /// The first standard basis vector — maximal ℓ∞ concentration.
    SingleCoordinate,
    /// 90% of the squared mass on coordinate 0, the rest spherical noise.
    HeavyPlusNoise,
    /// ±1/√d on every coordinate — the flattened family whose ℓ∞ norm is
    /// small enough for the plain-hash path once d ≥ c.
    FlatSigned,
}

impl VectorFamily {
    pub fn name(&self) -> &'static str {
        match self {
            VectorFamily::UniformOnSphere => "sphere",
            VectorFamily::SingleCoordinate => "e1",
            VectorFamily::HeavyPlusNoise => "heavy",
            VectorFamily::FlatSigned => "flat",
        }
    }

    pub fn generate(&self, d: usize, seed: u64) -> Vec<f64> {
        let src = SeededSource::new(seed, DomainTag::FamilyVectors);
        match self {
            VectorFamily::UniformOnSphere => {
                let x: Vec<f64> = (0..d).map(|j| src.gaussian_at(j as u64)).collect();
                normalize(x)
            }
            VectorFamily::SingleCoordinate => {
                let mut x = vec![0.0; d];
                x[0] = 1.0;
                x
            }
            VectorFamily::HeavyPlusNoise => {
                let mut x: Vec<f64> = (0..d)
                    .map(|j| {
                        if j == 0 {
                            0.0
                        } else {
                            src.gaussian_at(j as u64)
                        }
                    })
                    .collect();
                let noise_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if noise_norm > 0.0 {
                    let scale = 0.1f64.sqrt() / noise_norm;
                    for v in &mut x {
                        *v *= scale;
                    }
                }
                x[0] = 0.9f64.sqrt();
                normalize(x)
            }
            VectorFamily::FlatSigned => {
                let scale = 1.0 / (d as f64).sqrt();
                (0..d).map(|j| src.sign_at(j as u64) * scale).collect()
            }
        }
    }
}

fn normalize(mut x: Vec<f64>) -> Vec<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut x {
            *v /= norm;
        }
    }
    x
}

/// Which construction the distortion harness redraws each trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistortionPath {
    /// Replicated hashing; any input vector.
    Phi,
    /// Block-Hadamard hashing; needs d above the dimension threshold.
    Hadamard,
    /// Plain hashing; needs the input flattened to ‖x‖∞ ≤ 1/√c.
    PlainHash,
}

impl DistortionPath {
    pub fn name(&self) -> &'static str {
        match self {
            DistortionPath::Phi => "phi",
            DistortionPath::Hadamard => "hg",
            DistortionPath::PlainHash => "h",
        }
    }
}

/// Outcome counts of a Monte Carlo run against a probability bound.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport {
    pub trials: usize,
    pub failures: usize,
    pub skipped: usize,
    /// failures / trials.
    pub empirical_rate: f64,
    /// The probability bound under test (4δ for the distortion paths,
    /// δ for goodness and the ℓ∞ tail).
    pub bound: f64,
    pub params: JlParams,
}

impl DistortionReport {
    pub fn successes(&self) -> usize {
        self.trials - self.failures - self.skipped
    }

    pub fn passes(&self) -> bool {
        self.empirical_rate <= self.bound
    }

    /// Flat key-value record followed by the parameter echo.
    pub fn to_record(&self) -> String {
        format!(
            "trials={}\nfailures={}\nskipped={}\nempirical_rate={}\nbound={}\n{}",
            self.trials,
            self.failures,
            self.skipped,
            self.empirical_rate,
            self.bound,
            self.params.to_record()
        )
    }

    fn from_counts(
        trials: usize,
        failures: usize,
        skipped: usize,
        bound: f64,
        params: &JlParams,
    ) -> Self {
        Self {
            trials,
            failures,
            skipped,
            empirical_rate: failures as f64 / trials as f64,
            bound,
            params: params.clone(),
        }
    }
}

/// Seeds for trial `0..n` under a schedule keyed by `master`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    SeededSource::new(master, DomainTag::TrialSeeds).word_at(trial as u64)
}

/// Monte Carlo failure rate of (1−ε)‖x‖² ≤ ‖Tx‖² ≤ (1+ε)‖x‖² for the
/// chosen path: the family vector is drawn once from the schedule seed,
/// then every trial redraws the transform — matching guarantees that are
/// per-vector over the randomness of the construction.
pub fn estimate_failure_rate(
    params: &JlParams,
    path: DistortionPath,
    trials: usize,
    family: VectorFamily,
) -> Result<DistortionReport, Error> {
    let x = family.generate(params.d, params.seed);
    estimate_failure_rate_for_vector(params, path, trials, &x)
}

/// Same harness for a caller-supplied vector. Zero vectors make every
/// trial a skip (relative distortion is undefined at 0), never a success.
pub fn estimate_failure_rate_for_vector(
    params: &JlParams,
    path: DistortionPath,
    trials: usize,
    x: &[f64],
) -> Result<DistortionReport, Error> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if x.len() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            got: x.len(),
        });
    }
    let bound = 4.0 * params.delta;

    let sq = x.iter().map(|v| v * v).sum::<f64>();
    if sq == 0.0 {
        return Ok(DistortionReport::from_counts(
            trials, 0, trials, bound, params,
        ));
    }

    match path {
        DistortionPath::Hadamard => {
            let threshold = params.hadamard_dim_threshold();
            if (params.d as f64) <= threshold {
                return Err(Error::HadamardDimension {
                    d: params.d,
                    threshold,
                });
            }
        }
        DistortionPath::PlainHash => {
            let linf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let cap = 1.0 / (params.c as f64).sqrt();
            if linf > cap * (1.0 + 1e-9) {
                return Err(Error::ParamDomain {
                    name: "x_inf_norm",
                    value: linf,
                    requirement: "||x||_inf <= 1/sqrt(c) for the plain-hash path",
                });
            }
        }
        DistortionPath::Phi => {}
    }

    let slack = params.epsilon * sq;
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(params.seed, t);
            let y = match path {
                DistortionPath::Phi => SparseJl::with_dims(params.k, params.c, params.d, seed)
                    .apply_dense(x)
                    .expect("dimensions checked"),
                DistortionPath::Hadamard => {
                    HadamardJl::with_dims(params.k, params.b, params.d, seed)
                        .expect("shape checked")
                        .apply(x)
                        .expect("dimensions checked")
                }
                DistortionPath::PlainHash => HashProjection::new(params.k, params.d, seed)
                    .apply_dense(x)
                    .expect("dimensions checked"),
            };
            let ysq: f64 = y.iter().map(|v| v * v).sum();
            usize::from((ysq - sq).abs() > slack)
        })
        .sum();

    Ok(DistortionReport::from_counts(
        trials, failures, 0, bound, params,
    ))
}

/// Monte Carlo rate of hash functions that leave some bucket above σ*²,
/// on inputs flattened by replication: each trial draws a fresh uniform
/// unit vector u and hashes Pu, whose ℓ∞ norm is at most 1/√c.
pub fn goodness_rate(params: &JlParams, trials: usize) -> Result<DistortionReport, Error> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let plan = crate::preconditioners::ReplicationPlan::new(params.c, params.d);
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(params.seed, t);
            let u = VectorFamily::UniformOnSphere.generate(params.d, seed);
            let x = plan.replicate_dense(&u).expect("dimensions match");
            let h = HashProjection::new(params.k, plan.output_dim(), seed);
            let stats = bucket_stats(&h, &x, params.sigma_star_sq).expect("dimensions match");
            usize::from(!stats.all_good())
        })
        .sum();
    Ok(DistortionReport::from_counts(
        trials,
        failures,
        0,
        params.delta,
        params,
    ))
}

/// Monte Carlo rate of ‖Gx‖∞ ≥ 1/√c for a fixed unit x over fresh
/// preconditioner seeds. Enforces the dimension precondition the tail
/// bound requires.
pub fn infnorm_tail_rate(
    params: &JlParams,
    trials: usize,
    x: &[f64],
) -> Result<DistortionReport, Error> {
    let threshold = params.hadamard_dim_threshold();
    if (params.d as f64) <= threshold {
        return Err(Error::HadamardDimension {
            d: params.d,
            threshold,
        });
    }
    if x.len() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            got: x.len(),
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnitNorm { norm });
    }
    let failures = infnorm_tail_hits(params.c, params.b, trials, x, params.seed)?;
    Ok(DistortionReport::from_counts(
        trials,
        failures,
        0,
        params.delta,
        params,
    ))
}

/// Raw tail counter without the dimension precondition; small-scale
/// diagnostics use it directly.
fn infnorm_tail_hits(
    c: usize,
    b: usize,
    trials: usize,
    x: &[f64],
    schedule_seed: u64,
) -> Result<usize, Error> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let cutoff = 1.0 / (c as f64).sqrt();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(schedule_seed, t);
            let g = BlockHadamard::new(b, x.len(), seed)?;
            let y = g.apply(x)?;
            let linf = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(usize::from(linf >= cutoff))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Per-bucket error terms Zᵢ = Yᵢ² − σᵢ²; their sum is exactly
/// ‖Hx‖² − ‖x‖².
pub fn bucket_z_values(h: &HashProjection, x: &[f64]) -> Result<Vec<f64>, Error> {
    let y = h.apply_dense(x)?;
    let sigmas = bucket_masses(h, x)?;
    Ok(y.iter().zip(&sigmas).map(|(yi, s)| yi * yi - s).collect())
}

/// Row-support overlap diagnostic for the replicated hash matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnIntersectionReport {
    pub pairs_sampled: usize,
    /// Max over sampled pairs (i, j) of |rows(i) ∩ rows(j)|.
    pub max_intersection: usize,
    /// 16·ε²·c², the overlap level the lower-bound argument pivots on.
    pub threshold_z: f64,
}

impl ColumnIntersectionReport {
    pub fn to_record(&self) -> String {
        format!(
            "pairs_sampled={}\nmax_intersection={}\nthreshold_z={}\n",
            self.pairs_sampled, self.max_intersection, self.threshold_z
        )
    }
}

/// Samples column pairs of the replicated hash matrix and reports their
/// maximal row-support intersection against 16ε²c². A diagnostic echoing
/// the lower-bound mechanism, not a guarantee.
pub fn max_column_intersection(
    t: &SparseJl,
    epsilon: f64,
    pairs: usize,
    sample_seed: u64,
) -> Result<ColumnIntersectionReport, Error> {
    let d = t.d();
    if d > SMALL_INSTANCE_CAP {
        return Err(Error::SmallInstanceCapExceeded {
            d,
            cap: SMALL_INSTANCE_CAP,
        });
    }
    let supports: Vec<Vec<usize>> = (0..d).map(|j| column_support(t, j)).collect();

    let all_pairs = d * (d - 1) / 2;
    let mut max = 0usize;
    let sampled;
    if pairs >= all_pairs {
        for i in 0..d {
            for j in (i + 1)..d {
                max = max.max(sorted_intersection_len(&supports[i], &supports[j]));
            }
        }
        sampled = all_pairs;
    } else {
        let src = SeededSource::new(sample_seed, DomainTag::PairSampling);
        for p in 0..pairs {
            let i = src.bucket_at(2 * p as u64, d as u64) as usize;
            let mut j = src.bucket_at(2 * p as u64 + 1, d as u64) as usize;
            if i == j {
                j = (j + 1) % d;
            }
            max = max.max(sorted_intersection_len(&supports[i], &supports[j]));
        }
        sampled = pairs;
    }

    let c = t.c() as f64;
    Ok(ColumnIntersectionReport {
        pairs_sampled: sampled,
        max_intersection: max,
        threshold_z: 16.0 * epsilon * epsilon * c * c,
    })
}

/// Deduplicated, sorted rows hit by the replicas of column `j`.
fn column_support(t: &SparseJl, j: usize) -> Vec<usize> {
    let c = t.c();
    let mut rows: Vec<usize> = (j * c..(j + 1) * c)
        .map(|r| t.projection().column_of(r).expect("replica in range").0)
        .collect();
    rows.sort_unstable();
    rows.dedup();
    rows
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Monte Carlo summary for the ℓ1 estimator on a fixed vector.
#[derive(Clone, Debug, PartialEq)]
pub struct L1Report {
    pub trials: usize,
    /// Grand mean of the estimate over seeds.
    pub mean_estimate: f64,
    /// Mean over seeds of the conditional target (1/√k)·Σᵢσᵢ the
    /// estimator should track given the realized buckets.
    pub mean_conditional: f64,
    /// Mean |Y₀| over seeds, for the per-bucket ratio check.
    pub bucket_abs_mean: f64,
    /// Mean σ₀ over seeds.
    pub bucket_sigma_mean: f64,
    pub beta0: f64,
}

impl L1Report {
    /// mean|Y₀| / mean σ₀, which tracks β₀.
    pub fn bucket_ratio(&self) -> f64 {
        self.bucket_abs_mean / self.bucket_sigma_mean
    }

    pub fn to_record(&self) -> String {
        format!(
            "trials={}\nmean_estimate={}\nmean_conditional={}\nbucket_ratio={}\nbeta0={}\n",
            self.trials,
            self.mean_estimate,
            self.mean_conditional,
            self.bucket_ratio(),
            self.beta0
        )
    }
}

/// Redraws the ℓ1 embedding across seeds for a fixed vector and collects
/// the estimator means along with their conditional targets.
pub fn l1_estimator_report(params: &JlParams, trials: usize, x: &[f64]) -> Result<L1Report, Error> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if x.len() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.d,
            got: x.len(),
        });
    }
    let c = l1_replication(params);
    let sqrt_k = (params.k as f64).sqrt();

    let (est_sum, cond_sum, abs0_sum, sigma0_sum) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(params.seed, t);
            let embed = L1Embed::with_dims(params.k, c, params.d, seed);
            let y = embed.bucket_values(x).expect("dimensions match");
            let sigmas = embed.bucket_sigmas(x).expect("dimensions match");
            let sum_abs: f64 = y.iter().map(|v| v.abs()).sum();
            let est = sum_abs / (embed.beta0() * sqrt_k);
            let cond = sigmas.iter().sum::<f64>() / sqrt_k;
            (est, cond, y[0].abs(), sigmas[0])
        })
        .reduce(
            || (0.0, 0.0, 0.0, 0.0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3),
        );

    let n = trials as f64;
    Ok(L1Report {
        trials,
        mean_estimate: est_sum / n,
        mean_conditional: cond_sum / n,
        bucket_abs_mean: abs0_sum / n,
        bucket_sigma_mean: sigma0_sum / n,
        beta0: (2.0 / std::f64::consts::PI).sqrt(),
    })
}
