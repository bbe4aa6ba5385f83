//! Log Radon–Nikodym derivatives and information densities as stochastic
//! integrals against the observed arrivals.
//!
//! For a block with posterior `Π` the log-likelihood ratio against a
//! unit-rate Poisson reference is
//!
//! ```text
//! Σ_arrivals ln(a Π_{t−} + λ) + ∫ (1 − a Π_t − λ) dt
//! ```
//!
//! The `dt` part is integrated in closed form: on a segment with log-odds
//! `L(s) = L₀ − a s`, `∫ a Π ds = softplus(L(s₁)) − softplus(L(s₂))`.
//! Information densities are differences of two such integrals computed
//! with different conditioning.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Receiver, ReceiverParams};
use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, logit, sigmoid, softplus, KahanSum};
use crate::process::{BlockInputModel, ChannelRealization, PointProcess};

use super::filter::{arrival_jump, block_ranges, log_rate, Condition};

/// Which information density to evaluate at a receiver `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// `𝔦(X; U)`.
    Input,
    /// `𝔦(V; U)`.
    Aux,
    /// `𝔦(X; U | V) = 𝔦(X; U) − 𝔦(V; U)`.
    InputGivenAux,
}

impl std::fmt::Display for DensityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DensityKind::Input => "input",
            DensityKind::Aux => "aux",
            DensityKind::InputGivenAux => "input_given_aux",
        })
    }
}

impl std::str::FromStr for DensityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input" | "x" => Ok(DensityKind::Input),
            "aux" | "v" => Ok(DensityKind::Aux),
            "input_given_aux" | "x|v" => Ok(DensityKind::InputGivenAux),
            other => Err(Error::Config(format!("unknown density kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoDensitySample {
    /// Nats; `-∞` when the conditioned path cannot have produced the
    /// observation.
    pub value: f64,
    pub kind: DensityKind,
    pub receiver: Receiver,
    /// `value / T_n`.
    pub normalized: f64,
    /// False when some arrival had zero posterior rate under either filter.
    pub valid: bool,
}

/// `∫ a Π ds` over a stretch of length `len` starting at log-odds `lo`.
#[inline]
pub fn segment_rate_integral(a: f64, lo: f64, len: f64) -> f64 {
    if lo == f64::INFINITY {
        a * len
    } else if lo == f64::NEG_INFINITY || a == 0.0 {
        0.0
    } else {
        softplus(lo) - softplus(lo - a * len)
    }
}

/// The same integral by adaptive Simpson quadrature.
pub fn segment_rate_integral_quadrature(a: f64, lo: f64, len: f64) -> f64 {
    adaptive_simpson(|s| a * sigmoid(lo - a * s), 0.0, len, 1e-12)
}

/// Log-likelihood ratio of one block, against a unit-rate reference, for
/// the filter started at `prior`. `offsets` are arrival times measured from
/// the block start.
///
/// Returns `(value, valid)`; `valid` is false (and `value = -∞`) when an
/// arrival had zero posterior rate.
pub fn block_log_rn(rp: &ReceiverParams, tau: f64, prior: f64, offsets: &[f64]) -> (f64, bool) {
    let jump = arrival_jump(rp);
    let mut lo = logit(prior);
    let mut s0 = 0.0;
    let mut acc = 0.0;
    for &s in offsets {
        acc -= segment_rate_integral(rp.a, lo, s - s0);
        if lo.is_finite() {
            lo -= rp.a * (s - s0);
        }
        let lr = log_rate(rp, lo);
        if lr == f64::NEG_INFINITY {
            return (f64::NEG_INFINITY, false);
        }
        acc += lr;
        lo += jump;
        s0 = s;
    }
    acc -= segment_rate_integral(rp.a, lo, tau - s0);
    (acc + tau * (1.0 - rp.lambda), true)
}

/// Evaluates block log-likelihood ratios for one receiver, caching the
/// arrival-free blocks, which dominate at small `τ`.
pub struct BlockLikelihood<'m> {
    model: &'m BlockInputModel,
    rp: ReceiverParams,
    empty_marginal: f64,
    empty_aux: Vec<f64>,
    empty_input: [f64; 2],
}

impl<'m> BlockLikelihood<'m> {
    pub fn new(model: &'m BlockInputModel, params: &ChannelParams, receiver: Receiver) -> Self {
        let rp = params.receiver(receiver);
        let tau = model.tau;
        let empty = |p: f64| block_log_rn(&rp, tau, p, &[]).0;
        Self {
            model,
            rp,
            empty_marginal: empty(model.mean_input()),
            empty_aux: model.cond_bernoulli.iter().map(|&p| empty(p)).collect(),
            empty_input: [empty(0.0), empty(1.0)],
        }
    }

    pub fn receiver_params(&self) -> &ReceiverParams {
        &self.rp
    }

    /// Block `i` with the given offsets under `cond`.
    #[inline]
    pub fn block(&self, cond: &Condition, i: usize, offsets: &[f64]) -> (f64, bool) {
        if offsets.is_empty() {
            let v = match cond {
                Condition::None => self.empty_marginal,
                Condition::AuxPath(v) => self.empty_aux[v[i] as usize],
                Condition::InputPath(x) => self.empty_input[x[i] as usize],
            };
            return (v, true);
        }
        block_log_rn(&self.rp, self.model.tau, cond.prior(self.model, i), offsets)
    }

    /// Per-block log-likelihood ratios under `cond` for an observation split
    /// into blocks.
    pub fn path(&self, cond: &Condition, obs: &BlockObservation) -> PathLikelihood {
        let mut sum = KahanSum::new();
        let mut valid = true;
        for i in 0..self.model.n {
            let (v, ok) = self.block(cond, i, obs.offsets(i));
            valid &= ok;
            sum.add(v);
        }
        PathLikelihood {
            value: if valid { sum.value() } else { f64::NEG_INFINITY },
            valid,
        }
    }

    /// Log-likelihood ratio of each auxiliary symbol for every block:
    /// `table[i * K + j]`. Lets a decoder score many auxiliary paths
    /// against one observation by lookups.
    pub fn aux_table(&self, obs: &BlockObservation) -> Vec<(f64, bool)> {
        let k = self.model.alphabet_size();
        let mut out = Vec::with_capacity(self.model.n * k);
        for i in 0..self.model.n {
            let offs = obs.offsets(i);
            for j in 0..k {
                if offs.is_empty() {
                    out.push((self.empty_aux[j], true));
                } else {
                    out.push(block_log_rn(&self.rp, self.model.tau, self.model.cond_bernoulli[j], offs));
                }
            }
        }
        out
    }

    /// Same for the two input values: `table[2 i + x]`.
    pub fn input_table(&self, obs: &BlockObservation) -> Vec<(f64, bool)> {
        let mut out = Vec::with_capacity(self.model.n * 2);
        for i in 0..self.model.n {
            let offs = obs.offsets(i);
            for x in 0..2 {
                if offs.is_empty() {
                    out.push((self.empty_input[x], true));
                } else {
                    out.push(block_log_rn(&self.rp, self.model.tau, x as f64, offs));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLikelihood {
    pub value: f64,
    pub valid: bool,
}

/// A point process cut into per-block arrival offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockObservation {
    offsets: Vec<f64>,
    starts: Vec<usize>,
}

impl BlockObservation {
    pub fn new(model: &BlockInputModel, pp: &PointProcess) -> Self {
        let arr = pp.arrivals();
        let mut offsets = Vec::with_capacity(arr.len());
        let mut starts = Vec::with_capacity(model.n + 1);
        for (i, r) in block_ranges(model, pp).into_iter().enumerate() {
            starts.push(offsets.len());
            let t0 = model.block_start(i);
            offsets.extend(arr[r].iter().map(|&t| (t - t0).clamp(0.0, model.tau)));
        }
        starts.push(offsets.len());
        Self { offsets, starts }
    }

    #[inline]
    pub fn offsets(&self, i: usize) -> &[f64] {
        &self.offsets[self.starts[i]..self.starts[i + 1]]
    }

    pub fn count(&self, i: usize) -> usize {
        self.starts[i + 1] - self.starts[i]
    }
}

/// Log Radon–Nikodym derivative of the observation law under `cond`
/// against a unit-rate Poisson reference on the whole horizon.
pub fn log_rn_derivative(
    model: &BlockInputModel,
    params: &ChannelParams,
    receiver: Receiver,
    pp: &PointProcess,
    cond: Condition,
) -> Result<PathLikelihood> {
    model.validate()?;
    params.validate()?;
    let obs = BlockObservation::new(model, pp);
    Ok(BlockLikelihood::new(model, params, receiver).path(&cond, &obs))
}

fn combine(num: PathLikelihood, den: PathLikelihood) -> (f64, bool) {
    match (num.valid, den.valid) {
        (true, true) => (num.value - den.value, true),
        (false, true) => (f64::NEG_INFINITY, false),
        // the marginal likelihood vanishes only if every conditioned one does
        _ => (f64::NAN, false),
    }
}

/// `𝔦(· ; U)` of `kind` for one realization.
pub fn info_density(
    model: &BlockInputModel,
    params: &ChannelParams,
    receiver: Receiver,
    realization: &ChannelRealization,
    kind: DensityKind,
) -> Result<InfoDensitySample> {
    model.validate()?;
    params.validate()?;
    if realization.v_bar.len() != model.n || realization.x_bar.len() != model.n {
        return Err(Error::Config("realization length differs from model".into()));
    }
    let pp = realization.output(receiver);
    let obs = BlockObservation::new(model, pp);
    let lik = BlockLikelihood::new(model, params, receiver);
    let (value, valid) = density_from_parts(&lik, &obs, &realization.v_bar, &realization.x_bar, kind);
    Ok(InfoDensitySample {
        value,
        kind,
        receiver,
        normalized: value / model.horizon(),
        valid,
    })
}

/// Density evaluation on a pre-split observation.
pub fn density_from_parts(
    lik: &BlockLikelihood,
    obs: &BlockObservation,
    v_bar: &[u32],
    x_bar: &[u8],
    kind: DensityKind,
) -> (f64, bool) {
    let marginal = lik.path(&Condition::None, obs);
    match kind {
        DensityKind::Input => combine(lik.path(&Condition::InputPath(x_bar), obs), marginal),
        DensityKind::Aux => combine(lik.path(&Condition::AuxPath(v_bar), obs), marginal),
        DensityKind::InputGivenAux => {
            let aux = lik.path(&Condition::AuxPath(v_bar), obs);
            combine(lik.path(&Condition::InputPath(x_bar), obs), aux)
        }
    }
}
