//! Exact posterior filters for block-i.i.d. binary inputs.
//!
//! Inside a block the input is a single Bernoulli variable and the output a
//! Poisson process with rate `a x + λ`. Given `k` arrivals seen over an
//! elapsed time `s`, the posterior log-odds of `X̄ = 1` are
//!
//! ```text
//! logit(prior) + k · ln((a+λ)/λ) − a · s
//! ```
//!
//! so the posterior is a logistic curve between arrivals and jumps at each
//! arrival. Everything is kept in log-odds, with `±∞` standing for a
//! posterior that is certain.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Receiver, ReceiverParams};
use crate::error::{Error, Result};
use crate::numeric::{logit, sigmoid};
use crate::process::{BlockInputModel, PointProcess};

/// What the filter conditions on besides the observed arrivals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition<'a> {
    /// Nothing: the prior is the marginal `E[X̄]`.
    None,
    /// The auxiliary block path: the prior of block `i` is `p_{V̄_i}`.
    AuxPath(&'a [u32]),
    /// The input block path itself: the posterior is `X̄_i`.
    InputPath(&'a [u8]),
}

impl Condition<'_> {
    /// Prior `P(X̄_i = 1 | condition)`.
    #[inline]
    pub fn prior(&self, model: &BlockInputModel, block: usize) -> f64 {
        match self {
            Condition::None => model.mean_input(),
            Condition::AuxPath(v) => model.cond_bernoulli[v[block] as usize],
            Condition::InputPath(x) => f64::from(x[block]),
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        let len = match self {
            Condition::None => return Ok(()),
            Condition::AuxPath(v) => v.len(),
            Condition::InputPath(x) => x.len(),
        };
        if len != n {
            return Err(Error::Config(format!("conditioning path has {len} blocks, model has {n}")));
        }
        Ok(())
    }
}

/// Log-odds jump `ln((a+λ)/λ)` at an arrival; `+∞` when `λ = 0`.
#[inline]
pub fn arrival_jump(rp: &ReceiverParams) -> f64 {
    if rp.a == 0.0 {
        0.0
    } else if rp.lambda == 0.0 {
        f64::INFINITY
    } else {
        (rp.a / rp.lambda).ln_1p()
    }
}

/// Posterior conditional rate `a Π + λ` in log form, for `Π = σ(log_odds)`.
///
/// `-∞` means an arrival at this point is impossible under the posterior.
#[inline]
pub fn log_rate(rp: &ReceiverParams, log_odds: f64) -> f64 {
    if log_odds == f64::INFINITY {
        (rp.a + rp.lambda).ln()
    } else if log_odds == f64::NEG_INFINITY {
        rp.lambda.ln()
    } else {
        let pi = sigmoid(log_odds);
        (rp.a * pi + rp.lambda).ln()
    }
}

/// A stretch of a block between posterior jumps, on which
/// `Π_t = σ(log_odds_start + slope · (t − t0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    /// Arrivals counted by the filter on this segment.
    pub count: usize,
    pub log_odds_start: f64,
    pub slope: f64,
}

impl Segment {
    #[inline]
    pub fn log_odds_at(&self, t: f64) -> f64 {
        if self.log_odds_start.is_infinite() {
            self.log_odds_start
        } else {
            self.log_odds_start + self.slope * (t - self.t0)
        }
    }

    #[inline]
    pub fn posterior_at(&self, t: f64) -> f64 {
        sigmoid(self.log_odds_at(t))
    }
}

/// Posterior of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPath {
    pub start: f64,
    pub end: f64,
    pub prior: f64,
    pub segments: Vec<Segment>,
    /// An arrival was observed where the posterior rate was zero.
    pub impossible: bool,
}

/// Piecewise-analytic posterior path `Π_t` over the whole horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorPath {
    pub tau: f64,
    pub blocks: Vec<BlockPath>,
}

impl PosteriorPath {
    /// `Π_t`, right-continuous; `t` at or past the horizon reads the last
    /// block.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = ((t / self.tau).floor().max(0.0) as usize).min(self.blocks.len() - 1);
        let b = &self.blocks[i];
        let k = b.segments.partition_point(|s| s.t0 <= t).max(1) - 1;
        b.segments[k].posterior_at(t)
    }

    pub fn impossible(&self) -> bool {
        self.blocks.iter().any(|b| b.impossible)
    }
}

/// Half-open index ranges of the arrivals falling in each block.
pub fn block_ranges(model: &BlockInputModel, pp: &PointProcess) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::with_capacity(model.n);
    let arr = pp.arrivals();
    let mut lo = 0;
    for i in 0..model.n {
        let mut hi = lo;
        while hi < arr.len() && model.block_of(arr[hi]) == i {
            hi += 1;
        }
        ranges.push(lo..hi);
        lo = hi;
    }
    ranges
}

/// Arrivals of `pp` assigned to block `i`.
pub fn block_slice<'a>(model: &BlockInputModel, pp: &'a PointProcess, i: usize) -> &'a [f64] {
    let arr = pp.arrivals();
    let lo = arr.partition_point(|&a| model.block_of(a) < i);
    let hi = arr.partition_point(|&a| model.block_of(a) <= i);
    &arr[lo..hi]
}

fn check_inputs(model: &BlockInputModel, params: &ChannelParams, pp: &PointProcess, cond: &Condition) -> Result<()> {
    model.validate()?;
    params.validate()?;
    cond.check_len(model.n)?;
    if (pp.horizon() - model.horizon()).abs() > 1e-9 * model.horizon() {
        return Err(Error::Config(format!(
            "process horizon {} differs from model horizon {}",
            pp.horizon(),
            model.horizon()
        )));
    }
    Ok(())
}

/// `E[X_t | U_{block start}^t, condition]` for every `t`.
pub fn causal_posterior(
    model: &BlockInputModel,
    params: &ChannelParams,
    receiver: Receiver,
    pp: &PointProcess,
    cond: Condition,
) -> Result<PosteriorPath> {
    check_inputs(model, params, pp, &cond)?;
    let rp = params.receiver(receiver);
    let jump = arrival_jump(&rp);
    let arr = pp.arrivals();
    let blocks = block_ranges(model, pp)
        .into_iter()
        .enumerate()
        .map(|(i, range)| {
            let start = model.block_start(i);
            let end = start + model.tau;
            let prior = cond.prior(model, i);
            let mut lo = logit(prior);
            let mut impossible = false;
            let mut segments = Vec::with_capacity(range.len() + 1);
            let mut t0 = start;
            for (count, &t) in arr[range].iter().enumerate() {
                segments.push(Segment {
                    t0,
                    t1: t,
                    count,
                    log_odds_start: lo,
                    slope: -rp.a,
                });
                let before = if lo.is_infinite() { lo } else { lo - rp.a * (t - t0) };
                if log_rate(&rp, before) == f64::NEG_INFINITY {
                    impossible = true;
                    lo = before;
                } else {
                    lo = before + jump;
                }
                t0 = t;
            }
            segments.push(Segment {
                t0,
                t1: end,
                count: segments.len(),
                log_odds_start: lo,
                slope: -rp.a,
            });
            BlockPath {
                start,
                end,
                prior,
                segments,
                impossible,
            }
        })
        .collect();
    Ok(PosteriorPath { tau: model.tau, blocks })
}

/// `E[X_t | U_t^{block end}, condition]`: the filter run on the
/// time-reversed block, counting arrivals in `(t, end]`.
pub fn anticausal_posterior(
    model: &BlockInputModel,
    params: &ChannelParams,
    receiver: Receiver,
    pp: &PointProcess,
    cond: Condition,
) -> Result<PosteriorPath> {
    check_inputs(model, params, pp, &cond)?;
    let rp = params.receiver(receiver);
    let jump = arrival_jump(&rp);
    let arr = pp.arrivals();
    let blocks = block_ranges(model, pp)
        .into_iter()
        .enumerate()
        .map(|(i, range)| {
            let start = model.block_start(i);
            let end = start + model.tau;
            let prior = cond.prior(model, i);
            let inside = &arr[range];
            let k_total = inside.len();
            // log-odds at `end` going backwards, i.e. with zero future arrivals
            let mut lo_end = logit(prior);
            let mut impossible = false;
            let mut segments = Vec::with_capacity(k_total + 1);
            // walk backwards; segment j covers [prev arrival, next arrival)
            let mut t1 = end;
            let mut future = 0usize;
            for &t in inside.iter().rev() {
                segments.push(Segment {
                    t0: t,
                    t1,
                    count: future,
                    log_odds_start: if lo_end.is_infinite() { lo_end } else { lo_end - rp.a * (t1 - t) },
                    slope: rp.a,
                });
                let at_arrival = if lo_end.is_infinite() { lo_end } else { lo_end - rp.a * (t1 - t) };
                if log_rate(&rp, at_arrival) == f64::NEG_INFINITY {
                    impossible = true;
                    lo_end = at_arrival;
                } else {
                    lo_end = at_arrival + jump;
                }
                future += 1;
                t1 = t;
            }
            segments.push(Segment {
                t0: start,
                t1,
                count: future,
                log_odds_start: if lo_end.is_infinite() { lo_end } else { lo_end - rp.a * (t1 - start) },
                slope: rp.a,
            });
            segments.reverse();
            BlockPath {
                start,
                end,
                prior,
                segments,
                impossible,
            }
        })
        .collect();
    Ok(PosteriorPath { tau: model.tau, blocks })
}

/// Posterior value together with the impossible-observation flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorValue {
    pub value: f64,
    pub impossible: bool,
}

/// Block log-odds contribution of `k` arrivals over elapsed time `s`;
/// `None` when the arrivals are impossible given `lo`.
#[inline]
fn accumulate(lo: f64, rp: &ReceiverParams, k: usize, s: f64) -> Option<f64> {
    if k == 0 {
        return Some(if lo.is_infinite() { lo } else { lo - rp.a * s });
    }
    if rp.is_dead() {
        return None;
    }
    if rp.lambda == 0.0 {
        // arrivals rule out X̄ = 0
        return if lo == f64::NEG_INFINITY { None } else { Some(f64::INFINITY) };
    }
    if lo.is_infinite() {
        return Some(lo);
    }
    Some(lo + k as f64 * arrival_jump(rp) - rp.a * s)
}

/// `E[X_t | Y_{block start}^t, Z_t^{block end}, condition]`.
///
/// `Y` and `Z` are conditionally independent given the input, so their
/// block likelihoods multiply.
pub fn two_sided_posterior(
    model: &BlockInputModel,
    params: &ChannelParams,
    y: &PointProcess,
    z: &PointProcess,
    t: f64,
    cond: Condition,
) -> Result<PosteriorValue> {
    check_inputs(model, params, y, &cond)?;
    check_inputs(model, params, z, &cond)?;
    if !(0.0..=model.horizon()).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, {}]", model.horizon())));
    }
    let i = model.block_of(t);
    let start = model.block_start(i);
    let end = start + model.tau;
    let k_y = block_slice(model, y, i).iter().filter(|&&a| a <= t).count();
    let k_z = block_slice(model, z, i).iter().filter(|&&a| a > t).count();
    Ok(two_sided_from_counts(
        cond.prior(model, i),
        &params.receiver(Receiver::Y),
        k_y,
        t - start,
        &params.receiver(Receiver::Z),
        k_z,
        end - t,
    ))
}

/// Two-sided posterior from in-block counts and exposure times.
#[inline]
pub fn two_sided_from_counts(
    prior: f64,
    ry: &ReceiverParams,
    k_y: usize,
    s_y: f64,
    rz: &ReceiverParams,
    k_z: usize,
    s_z: f64,
) -> PosteriorValue {
    let lo = logit(prior);
    match accumulate(lo, ry, k_y, s_y).and_then(|l| accumulate(l, rz, k_z, s_z)) {
        Some(l) => PosteriorValue {
            value: sigmoid(l),
            impossible: false,
        },
        None => PosteriorValue {
            value: prior,
            impossible: true,
        },
    }
}

/// One-sided posterior from a count and exposure time.
#[inline]
pub fn one_sided_from_count(prior: f64, rp: &ReceiverParams, k: usize, s: f64) -> PosteriorValue {
    match accumulate(logit(prior), rp, k, s) {
        Some(l) => PosteriorValue {
            value: sigmoid(l),
            impossible: false,
        },
        None => PosteriorValue {
            value: prior,
            impossible: true,
        },
    }
}
