//! Per-block mutual information between the block symbols and the Poisson
//! count, by truncated sums.
//!
//! Within a block the rate is constant, so the count is a sufficient
//! statistic for the arrivals and these sums are the exact per-block
//! information of the continuous-time observation.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Receiver, ReceiverParams};
use crate::numeric::{logaddexp, KahanSum};
use crate::process::BlockInputModel;

/// Which per-block quantity to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMiKind {
    /// `I(X̄; K)`.
    Input,
    /// `I(V̄; K)`.
    Aux,
    /// `I(X̄; K | V̄)`.
    InputGivenAux,
}

impl From<super::density::DensityKind> for BlockMiKind {
    fn from(k: super::density::DensityKind) -> Self {
        use super::density::DensityKind as D;
        match k {
            D::Input => BlockMiKind::Input,
            D::Aux => BlockMiKind::Aux,
            D::InputGivenAux => BlockMiKind::InputGivenAux,
        }
    }
}

/// Upper summation limit: `μ + 12√μ + 30`.
pub fn truncation_limit(mean: f64) -> usize {
    (mean + 12.0 * mean.sqrt() + 30.0).ceil() as usize
}

/// `ln P(K = k)` for `K ~ Poisson(mean)`, for all `k ≤ k_max`.
fn log_poisson_pmf(mean: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    if mean == 0.0 {
        out.push(0.0);
        out.resize(k_max + 1, f64::NEG_INFINITY);
        return out;
    }
    let lm = mean.ln();
    let mut acc = -mean;
    out.push(acc);
    for k in 1..=k_max {
        acc += lm - (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `I(C; K)` where `C` takes value `c` with probability `weights[c]` and
/// `ln P(K = k | C = c) = log_pmf[c][k]`.
fn discrete_mi(weights: &[f64], log_pmf: &[Vec<f64>]) -> f64 {
    let k_len = log_pmf[0].len();
    let mut total = KahanSum::new();
    for k in 0..k_len {
        let mut log_marg = f64::NEG_INFINITY;
        for (w, lp) in weights.iter().zip(log_pmf) {
            if *w > 0.0 {
                log_marg = logaddexp(log_marg, w.ln() + lp[k]);
            }
        }
        if log_marg == f64::NEG_INFINITY {
            continue;
        }
        for (w, lp) in weights.iter().zip(log_pmf) {
            if *w > 0.0 && lp[k] > f64::NEG_INFINITY {
                total.add(w * lp[k].exp() * (lp[k] - log_marg));
            }
        }
    }
    total.value().max(0.0)
}

/// Count law given `X̄ = 0` and `X̄ = 1`.
fn input_pmfs(rp: &ReceiverParams, tau: f64) -> [Vec<f64>; 2] {
    let m0 = rp.rate(0.0) * tau;
    let m1 = rp.rate(1.0) * tau;
    let k_max = truncation_limit(m0.max(m1));
    [log_poisson_pmf(m0, k_max), log_poisson_pmf(m1, k_max)]
}

fn mixture(p: f64, pmfs: &[Vec<f64>; 2]) -> Vec<f64> {
    pmfs[0]
        .iter()
        .zip(&pmfs[1])
        .map(|(&l0, &l1)| {
            let a = if p < 1.0 { (1.0 - p).ln() + l0 } else { f64::NEG_INFINITY };
            let b = if p > 0.0 { p.ln() + l1 } else { f64::NEG_INFINITY };
            logaddexp(a, b)
        })
        .collect()
}

/// `I(X̄; K)` for a Bernoulli(`prior`) block symbol.
pub fn binary_block_mi(rp: &ReceiverParams, tau: f64, prior: f64) -> f64 {
    if rp.a == 0.0 || prior <= 0.0 || prior >= 1.0 {
        return 0.0;
    }
    let pmfs = input_pmfs(rp, tau);
    discrete_mi(&[1.0 - prior, prior], &pmfs)
}

/// Exact per-block information of `kind` at `receiver`, in nats per block.
pub fn exact_block_mi(model: &BlockInputModel, params: &ChannelParams, receiver: Receiver, kind: BlockMiKind) -> f64 {
    let rp = params.receiver(receiver);
    let tau = model.tau;
    match kind {
        BlockMiKind::Input => binary_block_mi(&rp, tau, model.mean_input()),
        BlockMiKind::InputGivenAux => model
            .aux_probs
            .iter()
            .zip(&model.cond_bernoulli)
            .map(|(&w, &p)| w * binary_block_mi(&rp, tau, p))
            .collect::<KahanSum>()
            .value(),
        BlockMiKind::Aux => {
            if rp.a == 0.0 {
                return 0.0;
            }
            let pmfs = input_pmfs(&rp, tau);
            let comps: Vec<Vec<f64>> = model.cond_bernoulli.iter().map(|&p| mixture(p, &pmfs)).collect();
            discrete_mi(&model.aux_probs, &comps)
        }
    }
}
