//! Monte Carlo comparison of sampled Gram-matrix polynomial coefficients
//! against their exact expectations `E(b_i) = C(n,i) a_i` and
//! `E(d_i) = C(n,i) p_i`.
//!
//! Replicate `r` of a run with master seed `s` draws from
//! [`seeded_rng`]`(s, r)`, and replicate results are reduced in index
//! order, so a report does not depend on the number of worker threads.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expected::{expected_det_recursion, expected_perm_recursion, Kind};
use crate::matrix::ExactMatrix;
use crate::models::{seeded_rng, ColumnSampler, Model};
use crate::oracles::{permanental_budget, OracleLimits};
use crate::scalar::{binomial, format_rational, to_f64, ExactScalar};
use crate::traces::traces_by_power;

/// Which coefficient families a run samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSelection {
    Det,
    Perm,
    Both,
}

impl KindSelection {
    pub fn kinds(self) -> &'static [Kind] {
        match self {
            KindSelection::Det => &[Kind::Determinant],
            KindSelection::Perm => &[Kind::Permanent],
            KindSelection::Both => &[Kind::Determinant, Kind::Permanent],
        }
    }
}

impl From<Kind> for KindSelection {
    fn from(kind: Kind) -> Self {
        match kind {
            Kind::Determinant => KindSelection::Det,
            Kind::Permanent => KindSelection::Perm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Exact,
    Float,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub model: Model,
    /// Columns per sampled matrix.
    pub n: usize,
    pub reps: usize,
    /// Largest coefficient index reported.
    pub max_index: usize,
    pub kind: KindSelection,
    pub seed: u64,
    /// Above this `n`, determinant coefficients switch to `f64`.
    pub exact_limit: usize,
    pub limits: OracleLimits,
    /// Worker cap; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
}

impl SimulationConfig {
    pub fn new(model: Model, n: usize, reps: usize, max_index: usize, kind: KindSelection, seed: u64) -> Self {
        Self {
            model,
            n,
            reps,
            max_index,
            kind,
            seed,
            exact_limit: 1000,
            limits: OracleLimits::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.max_index > self.n {
            return Err(Error::InvalidConfig(format!(
                "max index {} exceeds n = {}",
                self.max_index, self.n
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        if self.kind != KindSelection::Det {
            if self.max_index > self.limits.ryser_max_n {
                return Err(Error::GuardExceeded(format!(
                    "max index {} exceeds Ryser limit {}",
                    self.max_index, self.limits.ryser_max_n
                )));
            }
            permanental_budget(self.n, self.max_index, self.limits.perm_poly_max_ops)?;
        }
        Ok(())
    }

    pub fn precision(&self) -> Precision {
        if self.n > self.exact_limit && self.kind != KindSelection::Perm {
            Precision::Float
        } else {
            Precision::Exact
        }
    }
}

/// Seventeen significant digits, e.g. `3.5312500000000000e1`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::Error as _;
    let raw = serde_json::value::RawValue::from_string(format_f64(*x)).map_err(S::Error::custom)?;
    raw.serialize(s)
}

fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

fn ser_rational<S: Serializer>(x: &ExactScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexStats {
    pub i: usize,
    #[serde(serialize_with = "ser_f64")]
    pub normalized_mean: f64,
    #[serde(serialize_with = "ser_f64")]
    pub normalized_std_dev: f64,
    /// `a_i` or `p_i`.
    #[serde(serialize_with = "ser_rational")]
    pub exact_value: ExactScalar,
    /// `(mean - exact) / (sd / sqrt(reps))`; absent when `sd = 0`.
    #[serde(serialize_with = "ser_opt_f64")]
    pub z_score: Option<f64>,
    /// Replicates whose coefficient was exactly zero (exact runs only).
    pub exact_zero_replicates: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub kind: Kind,
    pub precision: Precision,
    pub stats: Vec<IndexStats>,
    /// `samples[r][i]`: normalized coefficient `i` of replicate `r`.
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

impl KindReport {
    pub fn stat(&self, i: usize) -> &IndexStats {
        &self.stats[i]
    }

    /// `replicate,i,value` rows for external plotting.
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("replicate,i,value\n");
        for (r, row) in self.samples.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                out.push_str(&format!("{r},{i},{}\n", format_f64(*v)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub max_index: usize,
    pub results: Vec<KindReport>,
}

impl SimulationReport {
    pub fn get(&self, kind: Kind) -> Option<&KindReport> {
        self.results.iter().find(|r| r.kind == kind)
    }
}

/// splitmix64 finalizer; used to derive independent master seeds.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Integer Gram matrix `A^T A` of integer columns (symmetric, row-major).
struct IntGram {
    n: usize,
    data: Vec<i128>,
}

impl IntGram {
    fn from_columns(cols: &[Vec<i64>]) -> Self {
        let n = cols.len();
        let mut data = vec![0i128; n * n];
        for i in 0..n {
            for j in i..n {
                let dot: i128 = cols[i].iter().zip(&cols[j]).map(|(&a, &b)| a as i128 * b as i128).sum();
                data[i * n + j] = dot;
                data[j * n + i] = dot;
            }
        }
        Self { n, data }
    }

    fn entry(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.n + j]
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.unsigned_abs() as f64).fold(0.0, f64::max)
    }

    fn to_exact(&self) -> ExactMatrix {
        let n = self.n;
        ExactMatrix::from_fn(n, n, |i, j| ExactScalar::from_integer(BigInt::from(self.data[i * n + j])))
    }
}

/// Power sums `trace(G^k)` for `k = 1..=count` from powers up to `ceil(count/2)`,
/// using `trace(G^{a+b}) = <G^a, G^b>` for symmetric `G`.
trait PowerSums {
    type Scalar: Clone;
    fn size(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> Self::Scalar;
    fn zero() -> Self::Scalar;
    fn mul_add(acc: &mut Self::Scalar, a: &Self::Scalar, b: &Self::Scalar);

    fn power_sums(&self, count: usize) -> Vec<Self::Scalar> {
        let n = self.size();
        let half = count.div_ceil(2);
        let base: Vec<Self::Scalar> = (0..n * n).map(|k| self.entry(k / n, k % n)).collect();
        let mut powers: Vec<Vec<Self::Scalar>> = Vec::with_capacity(half);
        if half >= 1 {
            powers.push(base.clone());
        }
        for _ in 1..half {
            let prev = powers.last().expect("nonempty");
            let mut next = vec![Self::zero(); n * n];
            for i in 0..n {
                for k in 0..n {
                    let a = &prev[i * n + k];
                    for j in 0..n {
                        Self::mul_add(&mut next[i * n + j], a, &base[k * n + j]);
                    }
                }
            }
            powers.push(next);
        }
        (1..=count)
            .map(|k| {
                let (lo, hi) = (k / 2, k - k / 2);
                let mut acc = Self::zero();
                if lo == 0 {
                    let p = &powers[hi - 1];
                    for i in 0..n {
                        let diag = p[i * n + i].clone();
                        let out = acc.clone();
                        acc = Self::add(out, diag);
                    }
                } else {
                    let (a, b) = (&powers[lo - 1], &powers[hi - 1]);
                    for idx in 0..n * n {
                        Self::mul_add(&mut acc, &a[idx], &b[idx]);
                    }
                }
                acc
            })
            .collect()
    }

    fn add(a: Self::Scalar, b: Self::Scalar) -> Self::Scalar;
}

struct BigGram<'a>(&'a IntGram);

impl PowerSums for BigGram<'_> {
    type Scalar = BigInt;
    fn size(&self) -> usize {
        self.0.n
    }
    fn entry(&self, i: usize, j: usize) -> BigInt {
        BigInt::from(self.0.entry(i, j))
    }
    fn zero() -> BigInt {
        BigInt::zero()
    }
    fn mul_add(acc: &mut BigInt, a: &BigInt, b: &BigInt) {
        if !a.is_zero() && !b.is_zero() {
            *acc += a * b;
        }
    }
    fn add(a: BigInt, b: BigInt) -> BigInt {
        a + b
    }
}

struct FloatGram<'a>(&'a IntGram);

impl PowerSums for FloatGram<'_> {
    type Scalar = f64;
    fn size(&self) -> usize {
        self.0.n
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.0.entry(i, j) as f64
    }
    fn zero() -> f64 {
        0.0
    }
    fn mul_add(acc: &mut f64, a: &f64, b: &f64) {
        *acc += a * b;
    }
    fn add(a: f64, b: f64) -> f64 {
        a + b
    }
}

/// Elementary symmetric functions `e_0..e_K` from power sums `p_1..p_K`:
/// `k e_k = sum_{j=1}^{k} (-1)^{j-1} e_{k-j} p_j`.
fn newton_exact(power_sums: &[BigInt]) -> Vec<ExactScalar> {
    let mut e = vec![ExactScalar::one()];
    for k in 1..=power_sums.len() {
        let mut acc = ExactScalar::zero();
        for j in 1..=k {
            let term = &e[k - j] * ExactScalar::from_integer(power_sums[j - 1].clone());
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / ExactScalar::from_integer(BigInt::from(k)));
    }
    e
}

fn newton_float(power_sums: &[f64]) -> Vec<f64> {
    let mut e = vec![1.0];
    for k in 1..=power_sums.len() {
        let mut acc = 0.0;
        for j in 1..=k {
            let term = e[k - j] * power_sums[j - 1];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / k as f64);
    }
    e
}

/// Machine-integer power sums: matrix powers in `i64`, inner products in `i128`.
///
/// Entries of `G^h` are bounded by `n^{h-1} g^h` and `trace(G^k)` by
/// `(n g)^k`, where `g = max |G_ij|`; returns `None` when either bound
/// could overflow.
fn power_sums_machine(g: &IntGram, count: usize) -> Option<Vec<i128>> {
    let n = g.n;
    let half = count.div_ceil(2);
    let gmax = g.max_abs();
    let ng = n as f64 * gmax;
    if half >= 1 && ng.powi(half as i32 - 1) * gmax >= 2f64.powi(62) {
        return None;
    }
    if ng.powi(count as i32) >= 2f64.powi(125) {
        return None;
    }
    let base: Vec<i64> = g.data.iter().map(|&v| v as i64).collect();
    let mut powers: Vec<Vec<i64>> = Vec::with_capacity(half);
    if half >= 1 {
        powers.push(base.clone());
    }
    for _ in 1..half {
        let prev = powers.last().expect("nonempty");
        let mut next = vec![0i64; n * n];
        for i in 0..n {
            let out = &mut next[i * n..(i + 1) * n];
            for k in 0..n {
                let a = prev[i * n + k];
                if a == 0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(&base[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        powers.push(next);
    }
    Some(
        (1..=count)
            .map(|k| {
                let (lo, hi) = (k / 2, k - k / 2);
                if lo == 0 {
                    (0..n).map(|i| powers[hi - 1][i * n + i] as i128).sum()
                } else {
                    powers[lo - 1]
                        .iter()
                        .zip(&powers[hi - 1])
                        .map(|(&a, &b)| a as i128 * b as i128)
                        .sum()
                }
            })
            .collect(),
    )
}

/// Leading sign-adjusted characteristic coefficients `b_0..b_count` of an integer Gram matrix.
fn leading_char_coeffs_exact(g: &IntGram, count: usize) -> Vec<ExactScalar> {
    let sums: Vec<BigInt> = match power_sums_machine(g, count) {
        Some(sums) => sums.into_iter().map(BigInt::from).collect(),
        None => BigGram(g).power_sums(count),
    };
    newton_exact(&sums)
}

fn leading_char_coeffs_float(g: &IntGram, count: usize) -> Vec<f64> {
    newton_float(&FloatGram(g).power_sums(count))
}

/// Draws `n` columns from `model` and returns `G = A^T A` exactly.
pub fn sample_gram<R: RngCore + ?Sized>(model: &Model, n: usize, rng: &mut R) -> Result<ExactMatrix> {
    let sampler = ColumnSampler::new(model)?;
    let cols: Vec<Vec<i64>> = (0..n).map(|_| sampler.sample(rng)).collect();
    let g = IntGram::from_columns(&cols).to_exact();
    let scale = ExactScalar::from_integer(sampler.scale() * sampler.scale());
    if scale.is_one() {
        return Ok(g);
    }
    Ok(ExactMatrix::from_fn(n, n, |i, j| &g[(i, j)] / &scale))
}

/// Normalized coefficients of one replicate, per requested kind.
enum ReplicateValues {
    Exact(Vec<ExactScalar>),
    Float(Vec<f64>),
}

struct Plan<'a> {
    config: &'a SimulationConfig,
    sampler: ColumnSampler,
    /// `C(n,i) * scale^{2i}`: divides integer-Gram coefficients into normalized ones.
    divisors: Vec<ExactScalar>,
    precision: Precision,
}

impl Plan<'_> {
    fn replicate(&self, r: usize) -> Vec<ReplicateValues> {
        let cfg = self.config;
        let mut rng = seeded_rng(cfg.seed, r as u64);
        let cols: Vec<Vec<i64>> = (0..cfg.n).map(|_| self.sampler.sample(&mut rng)).collect();
        let g = IntGram::from_columns(&cols);
        cfg.kind
            .kinds()
            .iter()
            .map(|kind| match (kind, self.precision) {
                (Kind::Determinant, Precision::Float) => {
                    let b = leading_char_coeffs_float(&g, cfg.max_index);
                    ReplicateValues::Float(
                        b.iter().zip(&self.divisors).map(|(x, d)| x / to_f64(d)).collect(),
                    )
                }
                (Kind::Determinant, Precision::Exact) => {
                    let b = leading_char_coeffs_exact(&g, cfg.max_index);
                    ReplicateValues::Exact(b.into_iter().zip(&self.divisors).map(|(x, d)| x / d).collect())
                }
                (Kind::Permanent, _) => {
                    let d = cfg
                        .limits
                        .permanental_poly_coeffs(&g.to_exact(), cfg.max_index)
                        .expect("budget validated before sampling");
                    ReplicateValues::Exact(d.into_iter().zip(&self.divisors).map(|(x, d)| x / d).collect())
                }
            })
            .collect()
    }
}

fn exact_stats(values: &[&ExactScalar], reps: usize) -> (f64, f64, usize) {
    let count = ExactScalar::from_integer(BigInt::from(reps));
    let mean: ExactScalar = values.iter().copied().sum::<ExactScalar>() / &count;
    let sd = if reps > 1 {
        let ss: ExactScalar = values.iter().map(|x| (*x - &mean) * (*x - &mean)).sum();
        let var = ss / ExactScalar::from_integer(BigInt::from(reps - 1));
        to_f64(&var).sqrt()
    } else {
        0.0
    };
    let zeros = values.iter().filter(|x| x.is_zero()).count();
    (to_f64(&mean), sd, zeros)
}

fn float_stats(values: &[f64]) -> (f64, f64) {
    let reps = values.len() as f64;
    let mean = values.iter().sum::<f64>() / reps;
    let sd = if values.len() > 1 {
        (values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (reps - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs `config.reps` replicates and compares sampled coefficients with their expectations.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let sampler = ColumnSampler::new(&config.model)?;
    let scale_sq = ExactScalar::from_integer(sampler.scale() * sampler.scale());
    let divisors: Vec<ExactScalar> = (0..=config.max_index)
        .map(|i| ExactScalar::from_integer(binomial(config.n, i)) * num_traits::Pow::pow(&scale_sq, i as u32))
        .collect();
    let precision = config.precision();
    let plan = Plan {
        config,
        sampler,
        divisors,
        precision,
    };

    let run = || -> Vec<Vec<ReplicateValues>> { (0..config.reps).into_par_iter().map(|r| plan.replicate(r)).collect() };
    let replicates = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let traces = traces_by_power(&config.model.moment_matrix(), config.max_index.max(1));
    let mut results = Vec::new();
    for (slot, kind) in config.kind.kinds().iter().enumerate() {
        let expected = match kind {
            Kind::Determinant => expected_det_recursion(&traces, config.max_index)?,
            Kind::Permanent => expected_perm_recursion(&traces, config.max_index)?,
        };
        let mut stats = Vec::with_capacity(config.max_index + 1);
        let samples: Vec<Vec<f64>> = replicates
            .iter()
            .map(|rep| match &rep[slot] {
                ReplicateValues::Exact(v) => v.iter().map(to_f64).collect(),
                ReplicateValues::Float(v) => v.clone(),
            })
            .collect();
        let kind_precision = if *kind == Kind::Permanent { Precision::Exact } else { precision };
        for i in 0..=config.max_index {
            let (mean, sd, zeros) = match kind_precision {
                Precision::Exact => {
                    let column: Vec<&ExactScalar> = replicates
                        .iter()
                        .map(|rep| match &rep[slot] {
                            ReplicateValues::Exact(v) => &v[i],
                            ReplicateValues::Float(_) => unreachable!("exact run"),
                        })
                        .collect();
                    let (m, s, z) = exact_stats(&column, config.reps);
                    (m, s, Some(z))
                }
                Precision::Float => {
                    let column: Vec<f64> = samples.iter().map(|row| row[i]).collect();
                    let (m, s) = float_stats(&column);
                    (m, s, None)
                }
            };
            let exact_value = expected.values[i].clone();
            let z_score = (sd > 0.0).then(|| (mean - to_f64(&exact_value)) / (sd / (config.reps as f64).sqrt()));
            stats.push(IndexStats {
                i,
                normalized_mean: mean,
                normalized_std_dev: sd,
                exact_value,
                z_score,
                exact_zero_replicates: zeros,
            });
        }
        results.push(KindReport {
            kind: *kind,
            precision: kind_precision,
            stats,
            samples,
        });
    }
    Ok(SimulationReport {
        n: config.n,
        reps: config.reps,
        seed: config.seed,
        max_index: config.max_index,
        results,
    })
}

/// One [`simulate`] run per `n`; run for `n` uses master seed `derive_seed(seed, n)`.
pub fn stddev_trend(
    model: &Model,
    n_list: &[usize],
    reps: usize,
    i: usize,
    kind: Kind,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    stddev_trend_with(model, n_list, reps, i, kind, seed, None)
}

pub fn stddev_trend_with(
    model: &Model,
    n_list: &[usize],
    reps: usize,
    i: usize,
    kind: Kind,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<(usize, f64)>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n list must be strictly increasing".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let mut config = SimulationConfig::new(model.clone(), n, reps, i, kind.into(), derive_seed(seed, n as u64));
            config.threads = threads;
            let report = simulate(&config)?;
            let sd = report.results[0].stats[i].normalized_std_dev;
            Ok((n, sd))
        })
        .collect()
}
