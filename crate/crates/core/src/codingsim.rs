//! Superposition coding experiments with information-density threshold
//! decoders.
//!
//! A cloud codebook of auxiliary block paths carries the message decoded by
//! both receivers (`M_z`, or the common `M_0`); each cloud centre has its
//! own satellite codebook of binary input block paths carrying `M_y`. The
//! weak receiver looks for the unique cloud whose density clears
//! `C_z − γ_z`; the strong receiver looks for the unique pair clearing both
//! `Ĉ_y + C̃_y − γ_y` and `Ĉ_y − γ_y`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{superposition_rates, SuperpositionRates};
use crate::channel::{ChannelParams, Receiver};
use crate::error::{Error, Result};
use crate::inference::density::{BlockLikelihood, BlockObservation};
use crate::inference::filter::Condition;
use crate::numeric::{wilson_interval, Z_95};
use crate::process::{sample_output, BlockInputModel, PointProcess};
use crate::rng::{stream, Domain};

/// Default cap on stored codeword symbols, `L_z · (1 + L_y) · n`.
pub const DEFAULT_SYMBOL_CAP: u128 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// Private messages `M_y`, `M_z`.
    Independent,
    /// Common `M_0` for both receivers plus private `M_y`.
    DegradedMessageSets,
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Setting::Independent => "independent",
            Setting::DegradedMessageSets => "dms",
        })
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" | "bc" => Ok(Setting::Independent),
            "dms" | "degraded_message_sets" => Ok(Setting::DegradedMessageSets),
            other => Err(Error::Config(format!("unknown setting '{other}'"))),
        }
    }
}

/// Rates in nats per unit time. `r_cloud` is `R_z` or `R_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodingRates {
    pub r_y: f64,
    pub r_cloud: f64,
}

/// `max(1, ⌊exp(T R)⌋)`, saturating.
pub fn codebook_size(horizon: f64, rate: f64) -> u128 {
    let e = (horizon * rate).exp().floor();
    if !(e >= 1.0) {
        1
    } else if e >= u128::MAX as f64 {
        u128::MAX
    } else {
        e as u128
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub setting: Setting,
    pub model: BlockInputModel,
    pub seed: u64,
    pub cloud_size: usize,
    pub satellite_size: usize,
    /// `cloud_size × n`, row-major.
    cloud: Vec<u32>,
    /// `cloud_size × satellite_size × n`, row-major.
    satellites: Vec<u8>,
}

impl Codebook {
    pub fn cloud(&self, j: usize) -> &[u32] {
        let n = self.model.n;
        &self.cloud[j * n..(j + 1) * n]
    }

    pub fn satellite(&self, j: usize, i: usize) -> &[u8] {
        let n = self.model.n;
        let k = j * self.satellite_size + i;
        &self.satellites[k * n..(k + 1) * n]
    }
}

/// Checks `rates` and the model and returns `(L_cloud, L_y)`.
pub fn codebook_sizes(model: &BlockInputModel, rates: &CodingRates, symbol_cap: u128) -> Result<(usize, usize)> {
    model.validate()?;
    for r in [rates.r_y, rates.r_cloud] {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParams(format!("rate {r} must be finite and >= 0")));
        }
    }
    let t = model.horizon();
    let lc = codebook_size(t, rates.r_cloud);
    let ly = codebook_size(t, rates.r_y);
    let requested = lc
        .saturating_mul(ly.saturating_add(1))
        .saturating_mul(model.n as u128);
    if requested > symbol_cap {
        return Err(Error::CodebookTooLarge { requested, cap: symbol_cap });
    }
    Ok((lc as usize, ly as usize))
}

/// Draws a superposition codebook: cloud symbols i.i.d. from the auxiliary
/// law, satellite symbols Bernoulli(`p_v`) given the cloud symbol `v` of
/// the same block.
pub fn build_codebook(
    model: &BlockInputModel,
    rates: &CodingRates,
    setting: Setting,
    seed: u64,
    symbol_cap: u128,
) -> Result<Codebook> {
    let (lc, ly) = codebook_sizes(model, rates, symbol_cap)?;
    check_setting(model, setting)?;
    Ok(draw_codebook(model, setting, seed, lc, ly))
}

fn check_setting(model: &BlockInputModel, setting: Setting) -> Result<()> {
    if setting == Setting::DegradedMessageSets && model.alphabet_size() < 2 {
        return Err(Error::InvalidModel("degraded message sets need at least two auxiliary symbols".into()));
    }
    Ok(())
}

fn draw_codebook(model: &BlockInputModel, setting: Setting, seed: u64, lc: usize, ly: usize) -> Codebook {
    let n = model.n;
    let mut cloud = Vec::with_capacity(lc * n);
    let mut satellites = Vec::with_capacity(lc * ly * n);
    for j in 0..lc {
        let mut rng = stream(seed, Domain::Cloud, j as u64, 0, 0);
        let start = cloud.len();
        cloud.extend((0..n).map(|_| model.draw_aux(&mut rng)));
        for i in 0..ly {
            let mut rng = stream(seed, Domain::Satellite, j as u64, i as u64, 0);
            satellites.extend(cloud[start..start + n].iter().map(|&v| model.draw_input(&mut rng, v)));
        }
    }
    Codebook {
        setting,
        model: model.clone(),
        seed,
        cloud_size: lc,
        satellite_size: ly,
        cloud,
        satellites,
    }
}

/// Threshold slacks and the targets they are subtracted from, nats per
/// unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingThresholds {
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub targets: SuperpositionRates,
}

impl DecodingThresholds {
    /// Centred slacks `γ = (C − R) / 2` against the model's rate targets.
    /// Above capacity the slack falls back to a tenth of the target.
    pub fn centered(model: &BlockInputModel, params: &ChannelParams, rates: &CodingRates) -> Self {
        let targets = superposition_rates(params, &model.aux_probs, &model.cond_bernoulli);
        let slack = |c: f64, r: f64| if c > r { 0.5 * (c - r) } else { 0.1 * c };
        Self {
            gamma_y: slack(targets.c_hat_y, rates.r_y),
            gamma_z: slack(targets.c_z, rates.r_cloud),
            targets,
        }
    }

    pub fn z_threshold(&self) -> f64 {
        self.targets.c_z - self.gamma_z
    }

    /// Thresholds for `𝔦(X;Y)/T` and `𝔦(X;Y|V)/T`.
    pub fn y_thresholds(&self) -> (f64, f64) {
        (
            self.targets.c_hat_y + self.targets.c_tilde_y - self.gamma_y,
            self.targets.c_hat_y - self.gamma_y,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    NoCandidate,
    WrongCandidate,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome<I> {
    pub index: I,
    /// Set when the decoder found no or several candidates and fell back to
    /// the smallest index.
    pub failure: Option<FailureKind>,
}

fn pick<I: Copy>(first: Option<I>, count: usize, fallback: I) -> DecodeOutcome<I> {
    match (count, first) {
        (1, Some(i)) => DecodeOutcome { index: i, failure: None },
        (0, _) => DecodeOutcome {
            index: fallback,
            failure: Some(FailureKind::NoCandidate),
        },
        _ => DecodeOutcome {
            index: fallback,
            failure: Some(FailureKind::Ambiguous),
        },
    }
}

/// Per-receiver decoding state for one codebook: block likelihood caches
/// shared across trials.
pub struct Decoder<'c> {
    codebook: &'c Codebook,
    lik_y: BlockLikelihood<'c>,
    lik_z: BlockLikelihood<'c>,
}

impl<'c> Decoder<'c> {
    pub fn new(codebook: &'c Codebook, params: &ChannelParams) -> Self {
        Self {
            codebook,
            lik_y: BlockLikelihood::new(&codebook.model, params, Receiver::Y),
            lik_z: BlockLikelihood::new(&codebook.model, params, Receiver::Z),
        }
    }

    /// Cloud index whose `𝔦(V(j);Z)/T` alone clears the threshold.
    pub fn decode_z(&self, z: &PointProcess, thresholds: &DecodingThresholds) -> DecodeOutcome<usize> {
        let cb = self.codebook;
        let model = &cb.model;
        let t = model.horizon();
        let thr = thresholds.z_threshold();
        let obs = BlockObservation::new(model, z);
        let marginal = self.lik_z.path(&Condition::None, &obs);
        let k = model.alphabet_size();
        let table = self.lik_z.aux_table(&obs);
        let mut first = None;
        let mut count = 0;
        if marginal.valid {
            for j in 0..cb.cloud_size {
                let Some(s) = path_sum(cb.cloud(j), |i, v| table[i * k + v as usize]) else {
                    continue;
                };
                if (s - marginal.value) / t >= thr {
                    count += 1;
                    first.get_or_insert(j);
                }
            }
        }
        pick(first, count, 0)
    }

    /// Pair `(cloud, satellite)` clearing both `Y` thresholds.
    pub fn decode_y(&self, y: &PointProcess, thresholds: &DecodingThresholds) -> DecodeOutcome<(usize, usize)> {
        let cb = self.codebook;
        let model = &cb.model;
        let t = model.horizon();
        let (thr_joint, thr_cond) = thresholds.y_thresholds();
        let obs = BlockObservation::new(model, y);
        let marginal = self.lik_y.path(&Condition::None, &obs);
        let k = model.alphabet_size();
        let aux = self.lik_y.aux_table(&obs);
        let input = self.lik_y.input_table(&obs);
        let mut first = None;
        let mut count = 0;
        if marginal.valid {
            for j in 0..cb.cloud_size {
                let Some(sv) = path_sum(cb.cloud(j), |i, v| aux[i * k + v as usize]) else {
                    continue;
                };
                for i in 0..cb.satellite_size {
                    let Some(sx) = path_sum(cb.satellite(j, i), |b, x| input[2 * b + x as usize]) else {
                        continue;
                    };
                    if (sx - marginal.value) / t >= thr_joint && (sx - sv) / t >= thr_cond {
                        count += 1;
                        first.get_or_insert((j, i));
                    }
                }
            }
        }
        pick(first, count, (0, 0))
    }
}

/// Sum of per-block log-likelihoods along a codeword; `None` if any block
/// is impossible.
#[inline]
fn path_sum<T: Copy>(path: &[T], f: impl Fn(usize, T) -> (f64, bool)) -> Option<f64> {
    let mut s = 0.0;
    for (i, &sym) in path.iter().enumerate() {
        let (v, ok) = f(i, sym);
        if !ok {
            return None;
        }
        s += v;
    }
    Some(s)
}

/// Standalone `decode_z` building a decoder for a single observation.
pub fn decode_z(
    codebook: &Codebook,
    params: &ChannelParams,
    z: &PointProcess,
    thresholds: &DecodingThresholds,
) -> DecodeOutcome<usize> {
    Decoder::new(codebook, params).decode_z(z, thresholds)
}

/// Standalone `decode_y`.
pub fn decode_y(
    codebook: &Codebook,
    params: &ChannelParams,
    y: &PointProcess,
    thresholds: &DecodingThresholds,
) -> DecodeOutcome<(usize, usize)> {
    Decoder::new(codebook, params).decode_y(y, thresholds)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub no_candidate: u64,
    pub wrong_candidate: u64,
    pub ambiguous: u64,
}

impl ErrorCounts {
    pub fn total(&self) -> u64 {
        self.no_candidate + self.wrong_candidate + self.ambiguous
    }

    fn record(&mut self, kind: FailureKind) {
        match kind {
            FailureKind::NoCandidate => self.no_candidate += 1,
            FailureKind::WrongCandidate => self.wrong_candidate += 1,
            FailureKind::Ambiguous => self.ambiguous += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub params: ChannelParams,
    pub model: BlockInputModel,
    pub rates: CodingRates,
    pub thresholds: DecodingThresholds,
    pub trials: u64,
    pub seed: u64,
    /// Draw a fresh codebook for every trial (ensemble average) instead of
    /// one codebook for the whole run.
    pub codebook_per_trial: bool,
    pub symbol_cap: u128,
}

impl ExperimentConfig {
    /// Centred thresholds, per-trial codebooks, default memory cap.
    pub fn new(
        setting: Setting,
        params: ChannelParams,
        model: BlockInputModel,
        rates: CodingRates,
        trials: u64,
        seed: u64,
    ) -> Self {
        let thresholds = DecodingThresholds::centered(&model, &params, &rates);
        Self {
            setting,
            params,
            model,
            rates,
            thresholds,
            trials,
            seed,
            codebook_per_trial: true,
            symbol_cap: DEFAULT_SYMBOL_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub trials: u64,
    pub cloud_size: usize,
    pub satellite_size: usize,
    pub errors_y: ErrorCounts,
    pub errors_z: ErrorCounts,
    pub errors_total: u64,
    pub pe_y: f64,
    pub pe_z: f64,
    pub pe_total: f64,
    /// Wilson 95% interval of `pe_total`.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub ci_y: (f64, f64),
    pub ci_z: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    y: Option<FailureKind>,
    z: Option<FailureKind>,
}

fn codebook_seed(seed: u64, trial: u64) -> u64 {
    let mut rng = stream(seed, Domain::Message, trial, 1, 0);
    rng.random()
}

fn run_trial(cfg: &ExperimentConfig, decoder: &Decoder, trial: u64) -> TrialOutcome {
    let cb = decoder.codebook;
    let mut rng = stream(cfg.seed, Domain::Message, trial, 0, 0);
    let j = rng.random_range(0..cb.cloud_size);
    let i = rng.random_range(0..cb.satellite_size);
    let x = cb.satellite(j, i);
    let tau = cfg.model.tau;
    let y = sample_output(x, tau, cfg.params.receiver(Receiver::Y), Receiver::Y, cfg.seed, trial);
    let z = sample_output(x, tau, cfg.params.receiver(Receiver::Z), Receiver::Z, cfg.seed, trial);
    let dz = decoder.decode_z(&z, &cfg.thresholds);
    let dy = decoder.decode_y(&y, &cfg.thresholds);
    TrialOutcome {
        y: classify(dy, (j, i)),
        z: classify(dz, j),
    }
}

/// Error kind of a decoding outcome. A fallback after finding no candidate
/// is only an error if it lands on the wrong message; an ambiguous search
/// is always an error.
fn classify<I: PartialEq>(d: DecodeOutcome<I>, truth: I) -> Option<FailureKind> {
    match d.failure {
        Some(FailureKind::Ambiguous) => Some(FailureKind::Ambiguous),
        Some(kind) if d.index != truth => Some(kind),
        _ if d.index != truth => Some(FailureKind::WrongCandidate),
        _ => None,
    }
}

/// Runs `trials` independent transmissions and tallies decoding errors.
///
/// Per trial: uniform messages, the selected codeword's block path sent
/// through both receivers, both decoders run. A trial is in error when
/// either receiver misses its messages (`M_z` at `Z`, `(M_y, M_z)` at `Y`;
/// for degraded message sets the common message plays the role of `M_z`).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.params.validate()?;
    let (lc, ly) = codebook_sizes(&cfg.model, &cfg.rates, cfg.symbol_cap)?;
    check_setting(&cfg.model, cfg.setting)?;
    let outcomes: Vec<TrialOutcome> = if cfg.codebook_per_trial {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let cb = draw_codebook(&cfg.model, cfg.setting, codebook_seed(cfg.seed, trial), lc, ly);
                run_trial(cfg, &Decoder::new(&cb, &cfg.params), trial)
            })
            .collect()
    } else {
        let cb = draw_codebook(&cfg.model, cfg.setting, cfg.seed, lc, ly);
        let dec = Decoder::new(&cb, &cfg.params);
        (0..cfg.trials).into_par_iter().map(|trial| run_trial(cfg, &dec, trial)).collect()
    };
    let mut errors_y = ErrorCounts::default();
    let mut errors_z = ErrorCounts::default();
    let mut errors_total = 0;
    for o in &outcomes {
        if let Some(k) = o.y {
            errors_y.record(k);
        }
        if let Some(k) = o.z {
            errors_z.record(k);
        }
        if o.y.is_some() || o.z.is_some() {
            errors_total += 1;
        }
    }
    let n = cfg.trials;
    let frac = |e: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
    let (ci_lo, ci_hi) = wilson_interval(errors_total, n, Z_95);
    Ok(ExperimentResult {
        trials: n,
        cloud_size: lc,
        satellite_size: ly,
        errors_y,
        errors_z,
        errors_total,
        pe_y: frac(errors_y.total()),
        pe_z: frac(errors_z.total()),
        pe_total: frac(errors_total),
        ci_lo,
        ci_hi,
        ci_y: wilson_interval(errors_y.total(), n, Z_95),
        ci_z: wilson_interval(errors_z.total(), n, Z_95),
    })
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub setting: Setting,
    pub n: usize,
    pub tau: f64,
    #[serde(rename = "R_y")]
    pub r_y: f64,
    /// `R_z` (independent) or `R_0` (degraded message sets).
    #[serde(rename = "R_z_or_R_0")]
    pub r_cloud: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub trials: u64,
    pub pe_y: f64,
    pub pe_z: f64,
    pub pe_total: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl SweepRow {
    pub fn new(cfg: &ExperimentConfig, r: &ExperimentResult) -> Self {
        Self {
            setting: cfg.setting,
            n: cfg.model.n,
            tau: cfg.model.tau,
            r_y: cfg.rates.r_y,
            r_cloud: cfg.rates.r_cloud,
            gamma_y: cfg.thresholds.gamma_y,
            gamma_z: cfg.thresholds.gamma_z,
            trials: r.trials,
            pe_y: r.pe_y,
            pe_z: r.pe_z,
            pe_total: r.pe_total,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            seed: cfg.seed,
        }
    }
}

/// True when no later error rate exceeds an earlier one beyond overlap of
/// their confidence intervals.
pub fn non_increasing_up_to_ci(results: &[ExperimentResult]) -> bool {
    results.windows(2).all(|w| w[1].pe_total <= w[0].pe_total || w[1].ci_lo <= w[0].ci_hi)
}
