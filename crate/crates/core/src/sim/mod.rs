//! Monte Carlo experiments.
//!
//! * `weights`: Hamming weight of `e' = x*r2 + r1*y + e` over the first
//!   `n1*n2` coordinates, compared with the binomial model;
//! * `restricted`: the same weight over a short prefix (one inner block);
//! * `rm_dfr`: duplicated RM codewords sent over a binary symmetric channel;
//! * `concat_dfr`: full concatenated codewords over a BSC, or complete
//!   key generation, encryption and decryption, for a range of outer lengths.
//!
//! Trial `i` draws from the streams `(seed, domain, i)` of [`crate::rng`], and
//! all tallies are integer sums, so a plan gives the same
//! [`TrialOutcome`] for any worker count.

mod engine;
pub mod output;

use std::collections::BTreeMap;
use std::time::Instant;

use rand_core::RngCore;
use serde::{Serialize, Serializer};

use crate::dfr::{
    concat_dfr, end_to_end_dfr, rm_dfr_improved, InnerBound, END_TO_END_PRECISION_BITS,
};
use crate::error::{Error, Result};
use crate::error_model::{default_tail_masses, profile_p_star, BinomialTail};
use crate::exact::ExactProb;
use crate::hqc::Hqc;
use crate::params::{ErrorProfile, HqcParams};
use crate::ring::{xor_sparse_product, FixedWeightSampler, RingElement};
use crate::rm::RmCode;
use crate::rng::{bernoulli_word, probability_threshold, stream, Domain};
use crate::rs::RsCode;
use crate::MESSAGE_BYTES;

use engine::Accumulator;

/// Noise model for `concat_dfr`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseChannel {
    /// Independent bit flips with probability `p`.
    Bsc { p: f64 },
    /// Complete HQC key generation, encryption and decryption.
    Hqc,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Experiment {
    Weights {
        set: String,
        profile: ErrorProfile,
    },
    Restricted {
        set: String,
        profile: ErrorProfile,
        support_len: usize,
    },
    RmDfr {
        p: f64,
        multiplicity: usize,
    },
    ConcatDfr {
        params: HqcParams,
        channel: NoiseChannel,
        outer_lengths: Vec<usize>,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Weights { .. } => "weights",
            Experiment::Restricted { .. } => "restricted",
            Experiment::RmDfr { .. } => "rm_dfr",
            Experiment::ConcatDfr { .. } => "concat_dfr",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialPlan {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads, 0 for one per core. Does not affect results.
    pub workers: usize,
}

impl TrialPlan {
    pub fn new(experiment: Experiment, trials: u64, seed: u64) -> Self {
        Self {
            experiment,
            trials,
            seed,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be positive"));
        }
        match &self.experiment {
            Experiment::Weights { profile, .. } => profile.validate(),
            Experiment::Restricted {
                profile,
                support_len,
                ..
            } => {
                profile.validate()?;
                if *support_len > profile.code_length {
                    return Err(Error::invalid(format!(
                        "support length {support_len} exceeds code length {}",
                        profile.code_length
                    )));
                }
                Ok(())
            }
            Experiment::RmDfr { p, multiplicity } => {
                check_probability(*p)?;
                RmCode::new(*multiplicity).map(|_| ())
            }
            Experiment::ConcatDfr {
                params,
                channel,
                outer_lengths,
            } => {
                params.validate()?;
                if let NoiseChannel::Bsc { p } = channel {
                    check_probability(*p)?;
                }
                if outer_lengths.is_empty() {
                    return Err(Error::invalid("no outer lengths to simulate"));
                }
                for &n_e in outer_lengths {
                    params.with_outer_length(n_e)?;
                }
                Ok(())
            }
        }
    }

    /// One-line JSON of the plan, used as CSV provenance header.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Dense weight histogram.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    /// Histogram for weights `0..=max_weight`.
    pub fn new(max_weight: usize) -> Self {
        Self {
            counts: vec![0; max_weight + 1],
        }
    }

    pub fn record(&mut self, weight: usize) {
        self.counts[weight] += 1;
    }

    pub fn count(&self, weight: usize) -> u64 {
        self.counts.get(weight).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of samples with weight `> t`.
    pub fn count_above(&self, t: usize) -> u64 {
        self.counts.iter().skip(t + 1).sum()
    }

    /// `(min, max)` observed weight.
    pub fn range(&self) -> Option<(usize, usize)> {
        let lo = self.counts.iter().position(|&c| c > 0)?;
        let hi = self.counts.iter().rposition(|&c| c > 0)?;
        Some((lo, hi))
    }

    pub fn mean(&self) -> f64 {
        let total = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(w, &c)| w as f64 * c as f64)
            .sum::<f64>()
            / total
    }

    /// Smallest `t` with `#{weight > t} <= tail_mass * total`.
    pub fn quantile(&self, tail_mass: &ExactProb) -> usize {
        let total = self.total();
        let mut above = 0u64;
        // scan down from the top: the answer is the last t that still passes
        for t in (0..self.counts.len()).rev() {
            let passes = within_tail_mass(tail_mass, above, total);
            if !passes {
                return t + 1;
            }
            above += self.counts[t];
        }
        0
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

/// `count / total <= q`.
fn within_tail_mass(q: &ExactProb, count: u64, total: u64) -> bool {
    num_bigint::BigUint::from(count) * q.denom() <= num_bigint::BigUint::from(total) * q.numer()
}

impl Serialize for Histogram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let nonzero: BTreeMap<usize, u64> = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| (w, c))
            .collect();
        nonzero.serialize(serializer)
    }
}

/// Empirical and binomial quantile at one tail mass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantileRow {
    pub tail_mass: f64,
    pub empirical: usize,
    pub binomial: u64,
    /// Expected number of samples in the tail, `tail_mass * trials`.
    pub expected_exceedances: f64,
    /// Whether enough trials were run for the empirical quantile to be stable.
    pub reliable: bool,
}

/// Expected exceedances below which an empirical quantile is flagged.
pub const MIN_EXCEEDANCES: f64 = 100.0;

/// Binomial model matched to a histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinomialOverlay {
    pub length: usize,
    pub p_star: f64,
    pub mean: f64,
    pub empirical_mean: f64,
    /// Total-variation distance between the histogram and the binomial.
    pub tv_distance: f64,
    /// Weight of `pmf[0]`.
    pub first_weight: usize,
    pub pmf: Vec<f64>,
}

impl BinomialOverlay {
    pub fn pmf_at(&self, weight: usize) -> f64 {
        weight
            .checked_sub(self.first_weight)
            .and_then(|i| self.pmf.get(i))
            .copied()
            .unwrap_or(0.0)
    }
}

/// One point of a failure-rate curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DfrPoint {
    /// Channel probability for `rm_dfr`, outer length for `concat_dfr`.
    pub x: f64,
    pub failures: u64,
    pub trials: u64,
    pub log2_dfr: f64,
    /// 95% Wilson interval on the failure rate, in log2.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Analytic upper bound (improved inner bound), in log2.
    pub bound_log2: f64,
}

impl DfrPoint {
    fn new(x: f64, failures: u64, trials: u64, bound_log2: f64) -> Self {
        let (lo, hi) = wilson_interval(failures, trials);
        Self {
            x,
            failures,
            trials,
            log2_dfr: (failures as f64 / trials as f64).log2(),
            ci_low: lo.log2(),
            ci_high: hi.log2(),
            bound_log2,
        }
    }
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let (k, n) = (k as f64, n as f64);
    let z2 = Z * Z;
    let denom = n + z2;
    let center = (k + z2 / 2.0) / denom;
    let half = Z / denom * (k * (n - k) / n + z2 / 4.0).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Everything a run measures; equal plans give equal outcomes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub quantiles: Vec<QuantileRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binomial: Option<BinomialOverlay>,
    /// Total failures over all points.
    pub failures: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<DfrPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub plan: TrialPlan,
    #[serde(flatten)]
    pub outcome: TrialOutcome,
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
}

impl TrialReport {
    /// One-line human summary.
    pub fn summary(&self) -> String {
        let o = &self.outcome;
        let mut s = format!("{}: {} trials", self.plan.experiment.name(), o.trials);
        if let Some(h) = &o.histogram {
            s += &format!(", mean weight {:.2}", h.mean());
        }
        if let Some(q) = o.quantiles.first() {
            s += &format!(
                ", q({}) = {} (binomial {})",
                q.tail_mass, q.empirical, q.binomial
            );
        }
        if let Some(b) = &o.binomial {
            s += &format!(", tv {:.4}", b.tv_distance);
        }
        if !o.points.is_empty() {
            s += &format!(", {} failures", o.failures);
            if let [p] = o.points.as_slice() {
                s += &format!(", log2 dfr {:.3} (bound {:.3})", p.log2_dfr, p.bound_log2);
            }
        }
        s += &format!(" in {:.1}s", self.wall_time_secs);
        s
    }
}

/// Runs any plan.
pub fn simulate(plan: &TrialPlan) -> Result<TrialReport> {
    match plan.experiment {
        Experiment::Weights { .. } => simulate_error_weights(plan),
        Experiment::Restricted { .. } => simulate_restricted_support(plan),
        Experiment::RmDfr { .. } => simulate_rm_dfr(plan),
        Experiment::ConcatDfr { .. } => simulate_concat_dfr(plan),
    }
}

fn finish(
    plan: &TrialPlan,
    outcome: TrialOutcome,
    warnings: Vec<String>,
    start: Instant,
) -> TrialReport {
    TrialReport {
        plan: plan.clone(),
        outcome,
        warnings,
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

struct WeightAcc {
    hist: Histogram,
    sampler: FixedWeightSampler,
    word: RingElement,
}

impl Accumulator for WeightAcc {
    fn merge(&mut self, other: Self) {
        self.hist.merge(&other.hist);
    }
}

/// Histogram of `wt(e'[..limit])` over `trials` fresh error vectors.
fn weight_histogram(profile: &ErrorProfile, limit: usize, plan: &TrialPlan) -> Result<Histogram> {
    let p = *profile;
    let acc = engine::run(
        plan.trials,
        plan.workers,
        || WeightAcc {
            hist: Histogram::new(limit),
            sampler: FixedWeightSampler::new(p.n),
            word: RingElement::zero(p.n),
        },
        |t, acc| {
            let mut rng = stream(plan.seed, Domain::ErrorVector, t);
            let s = &mut acc.sampler;
            let x = s.sample(p.w, &mut rng).expect("validated weight");
            let y = s.sample(p.w, &mut rng).expect("validated weight");
            let r1 = s.sample(p.w_r, &mut rng).expect("validated weight");
            let r2 = s.sample(p.w_r, &mut rng).expect("validated weight");
            let e = s.sample(p.w_e, &mut rng).expect("validated weight");
            acc.word.words_mut().fill(0);
            xor_sparse_product(&mut acc.word, &x, &r2);
            xor_sparse_product(&mut acc.word, &r1, &y);
            for i in e.iter() {
                acc.word.flip(i);
            }
            acc.hist.record(acc.word.prefix_weight(limit));
        },
    )?;
    Ok(acc.hist)
}

fn binomial_overlay(hist: &Histogram, tail: &BinomialTail, p_star: &ExactProb) -> BinomialOverlay {
    let length = tail.length() as usize;
    let total = hist.total() as f64;
    let (lo, hi) = hist.range().unwrap_or((0, 0));
    // widen to cover the bulk of the binomial as well
    let mean = tail.mean();
    let sd = (mean * (1.0 - p_star.to_f64())).sqrt();
    let lo = lo.min((mean - 8.0 * sd).floor().max(0.0) as usize);
    let hi = hi.max(((mean + 8.0 * sd).ceil() as usize).min(length));
    let pmf: Vec<f64> = (lo..=hi).map(|d| tail.pmf(d as u64).to_f64()).collect();
    let covered: f64 = pmf.iter().sum();
    let mut tv = (1.0 - covered).max(0.0);
    for (i, b) in pmf.iter().enumerate() {
        tv += (hist.count(lo + i) as f64 / total - b).abs();
    }
    BinomialOverlay {
        length,
        p_star: p_star.to_f64(),
        mean,
        empirical_mean: hist.mean(),
        tv_distance: tv / 2.0,
        first_weight: lo,
        pmf,
    }
}

/// Weight distribution of the truncated decryption error `e'`.
///
/// Reports the histogram, empirical and binomial quantiles at the default
/// tail masses, and a warning for each tail too thin for the trial count.
pub fn simulate_error_weights(plan: &TrialPlan) -> Result<TrialReport> {
    let Experiment::Weights { profile, .. } = &plan.experiment else {
        return Err(Error::invalid("expected a weights plan"));
    };
    plan.validate()?;
    let start = Instant::now();
    let hist = weight_histogram(profile, profile.code_length, plan)?;
    let p_star = profile_p_star(profile)?;
    let tail = BinomialTail::new(profile.code_length as u64, &p_star)?;
    let mut warnings = Vec::new();
    let quantiles = default_tail_masses()
        .iter()
        .map(|q| {
            let expected = q.to_f64() * plan.trials as f64;
            let reliable = expected >= MIN_EXCEEDANCES;
            if !reliable {
                warnings.push(format!(
                    "tail mass {} expects only {expected:.1} samples beyond the quantile; \
                     run at least {:.0} trials for a stable estimate",
                    q.to_f64(),
                    MIN_EXCEEDANCES / q.to_f64()
                ));
            }
            QuantileRow {
                tail_mass: q.to_f64(),
                empirical: hist.quantile(q),
                binomial: tail.quantile(q),
                expected_exceedances: expected,
                reliable,
            }
        })
        .collect();
    let binomial = binomial_overlay(&hist, &tail, &p_star);
    let outcome = TrialOutcome {
        trials: plan.trials,
        histogram: Some(hist),
        quantiles,
        binomial: Some(binomial),
        failures: 0,
        points: Vec::new(),
    };
    Ok(finish(plan, outcome, warnings, start))
}

/// Weight of `e'` restricted to its first `support_len` coordinates, with
/// the matched binomial `(support_len, p*)` for comparison.
pub fn simulate_restricted_support(plan: &TrialPlan) -> Result<TrialReport> {
    let Experiment::Restricted {
        profile,
        support_len,
        ..
    } = &plan.experiment
    else {
        return Err(Error::invalid("expected a restricted-support plan"));
    };
    plan.validate()?;
    let start = Instant::now();
    let hist = weight_histogram(profile, *support_len, plan)?;
    let p_star = profile_p_star(profile)?;
    let tail = BinomialTail::new(*support_len as u64, &p_star)?;
    let binomial = binomial_overlay(&hist, &tail, &p_star);
    let outcome = TrialOutcome {
        trials: plan.trials,
        histogram: Some(hist),
        quantiles: Vec::new(),
        binomial: Some(binomial),
        failures: 0,
        points: Vec::new(),
    };
    Ok(finish(plan, outcome, Vec::new(), start))
}

#[derive(Default)]
struct FailureAcc {
    failures: u64,
}

impl Accumulator for FailureAcc {
    fn merge(&mut self, other: Self) {
        self.failures += other.failures;
    }
}

/// XORs fresh BSC noise into every word of `word`.
fn add_bsc_noise(word: &mut RingElement, threshold: u64, rng: &mut impl RngCore) {
    let len = word.len();
    let words = word.words_mut();
    for w in words.iter_mut() {
        *w ^= bernoulli_word(rng, threshold);
    }
    let tail = len % 64;
    if tail != 0 {
        *words.last_mut().expect("nonempty") &= (1u64 << tail) - 1;
    }
}

/// Exact rational for a channel probability given as `f64`, via its
/// shortest round-trip decimal.
fn exact_probability(p: f64) -> Result<ExactProb> {
    ExactProb::parse_probability(&format!("{p}"))
}

fn failure_warnings(points: &[DfrPoint]) -> Vec<String> {
    points
        .iter()
        .filter(|p| p.failures == 0)
        .map(|p| {
            format!(
                "no failures at x = {} in {} trials; the rate is only bounded above by about 2^{:.1}",
                p.x, p.trials, p.ci_high
            )
        })
        .collect()
}

/// Observed failure rate of ML decoding of the duplicated RM code over BSC(`p`).
///
/// Each trial sends a uniformly random codeword; a failure is a decoded
/// message different from the one sent.
pub fn simulate_rm_dfr(plan: &TrialPlan) -> Result<TrialReport> {
    let Experiment::RmDfr { p, multiplicity } = &plan.experiment else {
        return Err(Error::invalid("expected an rm_dfr plan"));
    };
    plan.validate()?;
    let start = Instant::now();
    let code = RmCode::new(*multiplicity)?;
    let threshold = probability_threshold(*p);
    let acc = engine::run(plan.trials, plan.workers, FailureAcc::default, |t, acc| {
        let mut rng = stream(plan.seed, Domain::Channel, t);
        let message = rng.next_u32() as u8;
        let mut word = code.encode(message);
        add_bsc_noise(&mut word, threshold, &mut rng);
        if code.decode(&word, &mut rng).expect("length matches") != message {
            acc.failures += 1;
        }
    })?;
    let bound = rm_dfr_improved(&exact_probability(*p)?, code.min_distance() as u64)?;
    let point = DfrPoint::new(*p, acc.failures, plan.trials, bound.log2().to_f64());
    let warnings = failure_warnings(std::slice::from_ref(&point));
    let outcome = TrialOutcome {
        trials: plan.trials,
        histogram: None,
        quantiles: Vec::new(),
        binomial: None,
        failures: acc.failures,
        points: vec![point],
    };
    Ok(finish(plan, outcome, warnings, start))
}

/// Failure rate of the concatenated code for each outer length in the plan.
///
/// With a BSC, each trial encodes a random message and flips bits
/// independently. With the HQC channel, each trial generates a key pair,
/// encrypts a random message and decrypts it. Every outer length reuses the
/// same per-trial streams.
pub fn simulate_concat_dfr(plan: &TrialPlan) -> Result<TrialReport> {
    let Experiment::ConcatDfr {
        params,
        channel,
        outer_lengths,
    } = &plan.experiment
    else {
        return Err(Error::invalid("expected a concat_dfr plan"));
    };
    plan.validate()?;
    let start = Instant::now();
    let d_i = params.inner.min_distance() as u64;
    let p_i = match channel {
        NoiseChannel::Bsc { p } => {
            rm_dfr_improved(&exact_probability(*p)?, d_i)?.round_up(END_TO_END_PRECISION_BITS)
        }
        NoiseChannel::Hqc => end_to_end_dfr(params, InnerBound::Improved)?.p_i,
    };
    let mut points = Vec::with_capacity(outer_lengths.len());
    for &n_e in outer_lengths {
        let instance = params.with_outer_length(n_e)?;
        let failures = match channel {
            NoiseChannel::Bsc { p } => bsc_failures(&instance, *p, plan)?,
            NoiseChannel::Hqc => hqc_failures(&instance, plan)?,
        };
        let delta = RsCode::with_length(n_e)?.correction_capacity() as u64;
        let bound = concat_dfr(n_e as u64, delta, &p_i)?;
        points.push(DfrPoint::new(
            n_e as f64,
            failures,
            plan.trials,
            bound.log2().to_f64(),
        ));
    }
    let warnings = failure_warnings(&points);
    let outcome = TrialOutcome {
        trials: plan.trials,
        histogram: None,
        quantiles: Vec::new(),
        binomial: None,
        failures: points.iter().map(|p| p.failures).sum(),
        points,
    };
    Ok(finish(plan, outcome, warnings, start))
}

fn bsc_failures(instance: &HqcParams, p: f64, plan: &TrialPlan) -> Result<u64> {
    let code = instance.code();
    let threshold = probability_threshold(p);
    let acc = engine::run(plan.trials, plan.workers, FailureAcc::default, |t, acc| {
        let mut rng = stream(plan.seed, Domain::Channel, t);
        let mut message = [0u8; MESSAGE_BYTES];
        rng.fill_bytes(&mut message);
        let mut word = code.encode(&message);
        add_bsc_noise(&mut word, threshold, &mut rng);
        if code.decode(&word, &mut rng).ok() != Some(message) {
            acc.failures += 1;
        }
    })?;
    Ok(acc.failures)
}

fn hqc_failures(instance: &HqcParams, plan: &TrialPlan) -> Result<u64> {
    let hqc = Hqc::new(instance.clone());
    let acc = engine::run(plan.trials, plan.workers, FailureAcc::default, |t, acc| {
        let seed = plan.seed;
        let keys = hqc.keygen(
            &mut stream(seed, Domain::PublicElement, t),
            &mut stream(seed, Domain::SecretKey, t),
        );
        let mut message = [0u8; MESSAGE_BYTES];
        stream(seed, Domain::Message, t).fill_bytes(&mut message);
        let ct = hqc
            .encrypt(&keys.pk, &message, &mut stream(seed, Domain::Encryption, t))
            .expect("key matches parameters");
        let decoded = hqc.decrypt(&keys.sk, &ct, &mut stream(seed, Domain::Decoding, t));
        if decoded.ok() != Some(message) {
            acc.failures += 1;
        }
    })?;
    Ok(acc.failures)
}
