//! Monte Carlo checks of the forward/backward exchange identity, the
//! more-capable inequality, and the law of large numbers for the
//! information densities.
//!
//! The conditioning variable `M` is the auxiliary block path `V̄`. Blocks
//! are independent, so every posterior only sees in-block data and each
//! time integral splits into per-block integrals over the stretches
//! between arrivals, where all posteriors are smooth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Receiver, ReceiverParams};
use crate::error::Result;
use crate::numeric::{adaptive_simpson, KahanSum, MeanEstimate};
use crate::process::{sample_inputs, sample_output, sample_realization_trial, BlockInputModel};

use super::density::{density_from_parts, BlockLikelihood, BlockObservation, DensityKind};
use super::exact::exact_block_mi;
use super::filter::{one_sided_from_count, two_sided_from_counts};

/// Quadrature tolerance per inter-arrival stretch.
pub const QUAD_TOL: f64 = 1e-9;

/// Gate width in standard errors.
pub const SE_GATE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    /// Mean of the per-trial difference, divided by `T_n`.
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
    pub params: ChannelParams,
    pub model: BlockInputModel,
    /// Mean of each side, in the same units.
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// In-block data of one block: arrival offsets and the prior given `M`.
struct BlockData<'a> {
    prior: f64,
    y: &'a [f64],
    z: &'a [f64],
}

/// Breakpoints of a block: `0`, every arrival offset, `τ`.
fn breakpoints(tau: f64, y: &[f64], z: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(y.len() + z.len() + 2);
    b.push(0.0);
    b.extend_from_slice(y);
    b.extend_from_slice(z);
    b.push(tau);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// `∫_0^τ f(counts, s) ds`, integrating piecewise between arrivals. `f`
/// receives the number of `Y` arrivals in `[0, s]` and of `Z` arrivals in
/// `(s, τ]`, both constant on each open stretch.
fn block_integral<F>(tau: f64, d: &BlockData, f: F) -> f64
where
    F: Fn(usize, usize, f64) -> f64,
{
    let bp = breakpoints(tau, d.y, d.z);
    let mut acc = KahanSum::new();
    for w in bp.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let k_y = d.y.partition_point(|&a| a <= mid);
        let k_z = d.z.len() - d.z.partition_point(|&a| a <= mid);
        acc.add(adaptive_simpson(|s| f(k_y, k_z, s), lo, hi, QUAD_TOL));
    }
    acc.value()
}

/// Per-block value of each side of the exchange identity:
/// `∫ φ_y(E[X|Y_0^t,M]) − φ_z(E[X|Z_t^τ,M])` and
/// `∫ φ_y(E[X|Y_0^t,Z_t^τ,M]) − φ_z(E[X|Y_0^t,Z_t^τ,M])`.
fn identity_block(tau: f64, ry: &ReceiverParams, rz: &ReceiverParams, d: &BlockData) -> (f64, f64) {
    let lhs = block_integral(tau, d, |k_y, k_z, s| {
        let fy = one_sided_from_count(d.prior, ry, k_y, s).value;
        let bz = one_sided_from_count(d.prior, rz, k_z, tau - s).value;
        ry.phi(fy) - rz.phi(bz)
    });
    let rhs = block_integral(tau, d, |k_y, k_z, s| {
        let two = two_sided_from_counts(d.prior, ry, k_y, s, rz, k_z, tau - s).value;
        ry.phi(two) - rz.phi(two)
    });
    (lhs, rhs)
}

/// Per-block value of each side of the more-capable inequality:
/// `∫ φ_z(E[X|Y_0^t,M])` and `∫ φ_z(E[X|Z_t^τ,M])`.
fn inequality_block(tau: f64, ry: &ReceiverParams, rz: &ReceiverParams, d: &BlockData) -> (f64, f64) {
    let lhs = block_integral(tau, d, |k_y, _, s| rz.phi(one_sided_from_count(d.prior, ry, k_y, s).value));
    let rhs = block_integral(tau, d, |_, k_z, s| rz.phi(one_sided_from_count(d.prior, rz, k_z, tau - s).value));
    (lhs, rhs)
}

type BlockFn = fn(f64, &ReceiverParams, &ReceiverParams, &BlockData) -> (f64, f64);

/// Per-trial `(lhs, rhs)` for a block functional, summed over blocks.
fn run_trials(model: &BlockInputModel, params: &ChannelParams, trials: usize, seed: u64, f: BlockFn) -> Vec<(f64, f64)> {
    let ry = params.receiver(Receiver::Y);
    let rz = params.receiver(Receiver::Z);
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let r = sample_realization_trial(model, params, seed, trial);
            let oy = BlockObservation::new(model, &r.y);
            let oz = BlockObservation::new(model, &r.z);
            let mut l = KahanSum::new();
            let mut rr = KahanSum::new();
            for i in 0..model.n {
                let d = BlockData {
                    prior: model.cond_bernoulli[r.v_bar[i] as usize],
                    y: oy.offsets(i),
                    z: oz.offsets(i),
                };
                let (a, b) = f(model.tau, &ry, &rz, &d);
                l.add(a);
                rr.add(b);
            }
            (l.value(), rr.value())
        })
        .collect()
}

fn report(
    check: &str,
    model: &BlockInputModel,
    params: &ChannelParams,
    trials: usize,
    seed: u64,
    sides: &[(f64, f64)],
    one_sided: bool,
) -> VerificationReport {
    let t = model.horizon();
    let diffs: Vec<f64> = sides.iter().map(|(a, b)| (a - b) / t).collect();
    let lhs: Vec<f64> = sides.iter().map(|(a, _)| a / t).collect();
    let rhs: Vec<f64> = sides.iter().map(|(_, b)| b / t).collect();
    let d = MeanEstimate::from_samples(&diffs);
    // a tiny absolute floor keeps exact cancellations (zero SE) passing
    let gate = SE_GATE * d.std_error + 1e-12;
    let pass = if one_sided { d.mean >= -gate } else { d.mean.abs() <= gate };
    VerificationReport {
        check: check.to_string(),
        estimate: d.mean,
        std_error: d.std_error,
        trials,
        seed,
        params: *params,
        model: model.clone(),
        lhs: MeanEstimate::from_samples(&lhs).mean,
        rhs: MeanEstimate::from_samples(&rhs).mean,
        pass,
    }
}

/// Both sides of the exchange identity; passes when their difference is
/// within three standard errors of zero.
pub fn verify_csiszar_identity(
    model: &BlockInputModel,
    params: &ChannelParams,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    model.validate()?;
    params.validate()?;
    let sides = run_trials(model, params, trials, seed, identity_block);
    Ok(report("identity", model, params, trials, seed, &sides, false))
}

/// Left minus right of the more-capable inequality; passes when the
/// estimate is at least minus three standard errors.
pub fn verify_mc_inequality(
    model: &BlockInputModel,
    params: &ChannelParams,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    model.validate()?;
    params.validate()?;
    let sides = run_trials(model, params, trials, seed, inequality_block);
    Ok(report("mc_inequality", model, params, trials, seed, &sides, true))
}

/// Per-trial information densities `𝔦/T_n` at `receiver`. Only the
/// needed output is simulated; the input and output streams match those of
/// a full realization for the same `(seed, trial)`.
pub fn density_samples(
    model: &BlockInputModel,
    params: &ChannelParams,
    receiver: Receiver,
    kind: DensityKind,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    model.validate()?;
    params.validate()?;
    let lik = BlockLikelihood::new(model, params, receiver);
    let t = model.horizon();
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let (v, x) = sample_inputs(model, seed, trial);
            let pp = sample_output(&x, model.tau, params.receiver(receiver), receiver, seed, trial);
            let obs = BlockObservation::new(model, &pp);
            density_from_parts(&lik, &obs, &v, &x, kind).0 / t
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnRow {
    pub n: usize,
    pub receiver: Receiver,
    pub kind: DensityKind,
    pub mean: f64,
    pub std_error: f64,
    /// Exact per-block information divided by `τ`.
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnReport {
    pub params: ChannelParams,
    pub tau: f64,
    pub aux_probs: Vec<f64>,
    pub cond_bernoulli: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<LlnRow>,
    pub pass: bool,
}

/// Absolute floor of the LLN tolerance, nats per unit time.
pub const LLN_ABS_TOL: f64 = 1e-3;

/// Compares the Monte Carlo mean of the three densities
/// `𝔦(X;Y)`, `𝔦(V;Z)`, `𝔦(X;Y|V)` with the exact per-block values for each
/// `n` in `ns`.
pub fn verify_lln(
    base: &BlockInputModel,
    params: &ChannelParams,
    ns: &[usize],
    trials: usize,
    seed: u64,
) -> Result<LlnReport> {
    base.validate()?;
    params.validate()?;
    let combos = [
        (Receiver::Y, DensityKind::Input),
        (Receiver::Z, DensityKind::Aux),
        (Receiver::Y, DensityKind::InputGivenAux),
    ];
    let mut rows = Vec::new();
    for &n in ns {
        let model = BlockInputModel { n, ..base.clone() };
        model.validate()?;
        for (receiver, kind) in combos {
            let s = density_samples(&model, params, receiver, kind, trials, seed)?;
            let est = MeanEstimate::from_samples(&s);
            let target = exact_block_mi(&model, params, receiver, kind.into()) / model.tau;
            let tolerance = (SE_GATE * est.std_error).max(LLN_ABS_TOL);
            rows.push(LlnRow {
                n,
                receiver,
                kind,
                mean: est.mean,
                std_error: est.std_error,
                target,
                tolerance,
                pass: (est.mean - target).abs() <= tolerance,
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(LlnReport {
        params: *params,
        tau: base.tau,
        aux_probs: base.aux_probs.clone(),
        cond_bernoulli: base.cond_bernoulli.clone(),
        trials,
        seed,
        rows,
        pass,
    })
}
