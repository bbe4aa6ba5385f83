//! Point-process realizations and exact simulation of the channel outputs
//! for block-piecewise-constant inputs.
//!
//! Within a block the arrival rate is constant, so each block and receiver
//! gets a Poisson count and that many sorted uniform arrival times.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Open01, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Receiver, ReceiverParams};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Arrival times of a counting-process realization on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointProcess {
    horizon: f64,
    arrivals: Vec<f64>,
}

impl PointProcess {
    /// Validates that arrivals are strictly increasing and inside `(0, horizon]`.
    pub fn new(horizon: f64, arrivals: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidProcess(format!("horizon {horizon} must be positive")));
        }
        if let Some(w) = arrivals.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProcess(format!(
                "arrivals not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(&t) = arrivals.iter().find(|&&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::InvalidProcess(format!("arrival {t} outside (0, {horizon}]")));
        }
        Ok(Self { horizon, arrivals })
    }

    pub fn empty(horizon: f64) -> Self {
        Self {
            horizon,
            arrivals: Vec::new(),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// Number of arrivals in `(t1, t2]`.
    pub fn count_in(&self, t1: f64, t2: f64) -> usize {
        let lo = self.arrivals.partition_point(|&t| t <= t1);
        let hi = self.arrivals.partition_point(|&t| t <= t2);
        hi.saturating_sub(lo)
    }

    /// CSV with header `t`, one arrival per row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t"])?;
        for t in &self.arrivals {
            wr.write_record([t.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, horizon: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        if headers.len() != 1 || &headers[0] != "t" {
            return Err(Error::InvalidProcess(format!("expected header 't', found {headers:?}")));
        }
        let mut arrivals = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let t: f64 = rec[0]
                .trim()
                .parse()
                .map_err(|e| Error::InvalidProcess(format!("bad arrival '{}': {e}", &rec[0])))?;
            arrivals.push(t);
        }
        Self::new(horizon, arrivals)
    }

    pub fn sidecar(&self) -> ProcessSidecar {
        ProcessSidecar {
            horizon: self.horizon,
            count: self.arrivals.len(),
        }
    }

    /// Writes `<stem>.csv` and `<stem>.json` next to each other.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let csv_path = stem.with_extension("csv");
        self.write_csv(std::fs::File::create(csv_path)?)?;
        let json = serde_json::to_string_pretty(&self.sidecar())?;
        std::fs::write(stem.with_extension("json"), json + "\n")?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let side: ProcessSidecar = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        let pp = Self::read_csv(std::fs::File::open(stem.with_extension("csv"))?, side.horizon)?;
        if pp.len() != side.count {
            return Err(Error::InvalidProcess(format!(
                "sidecar count {} does not match {} arrivals",
                side.count,
                pp.len()
            )));
        }
        Ok(pp)
    }
}

/// JSON sidecar of a serialized [`PointProcess`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSidecar {
    pub horizon: f64,
    pub count: usize,
}

/// Arrivals of `pp` in `(t1, t2]`; the horizon is kept.
pub fn restrict_window(pp: &PointProcess, t1: f64, t2: f64) -> Result<PointProcess> {
    if !(0.0 <= t1 && t1 < t2 && t2 <= pp.horizon) {
        return Err(Error::InvalidWindow {
            t1,
            t2,
            horizon: pp.horizon,
        });
    }
    let arrivals = pp.arrivals.iter().copied().filter(|&t| t > t1 && t <= t2).collect();
    Ok(PointProcess {
        horizon: pp.horizon,
        arrivals,
    })
}

/// Maps each arrival `s` to `T − s`. An arrival exactly at `T` would land on
/// 0 and is dropped.
pub fn time_reverse(pp: &PointProcess) -> PointProcess {
    let t = pp.horizon;
    let arrivals = pp
        .arrivals
        .iter()
        .rev()
        .map(|&s| t - s)
        .filter(|&r| r > 0.0)
        .collect();
    PointProcess { horizon: t, arrivals }
}

/// Block-i.i.d. binary input law driven by a finite auxiliary alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInputModel {
    /// Block length.
    pub tau: f64,
    /// Number of blocks.
    pub n: usize,
    /// `P(V̄ = j)`.
    pub aux_probs: Vec<f64>,
    /// `P(X̄ = 1 | V̄ = j)`.
    pub cond_bernoulli: Vec<f64>,
}

impl BlockInputModel {
    pub fn new(tau: f64, n: usize, aux_probs: Vec<f64>, cond_bernoulli: Vec<f64>) -> Result<Self> {
        let m = Self {
            tau,
            n,
            aux_probs,
            cond_bernoulli,
        };
        m.validate()?;
        Ok(m)
    }

    /// Two-symbol auxiliary: `P(V̄=0) = α` with on-probability `p`, else `q`.
    pub fn binary(tau: f64, n: usize, alpha: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(tau, n, vec![alpha, 1.0 - alpha], vec![p, q])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidModel(format!("tau = {} must be positive", self.tau)));
        }
        if self.n == 0 {
            return Err(Error::InvalidModel("n must be at least 1".into()));
        }
        if self.aux_probs.is_empty() || self.aux_probs.len() != self.cond_bernoulli.len() {
            return Err(Error::InvalidModel(
                "aux_probs and cond_bernoulli must be non-empty and of equal length".into(),
            ));
        }
        if self.aux_probs.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(Error::InvalidModel("aux_probs must lie in [0, 1]".into()));
        }
        let total: f64 = self.aux_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("aux_probs sum to {total}, not 1")));
        }
        if self.cond_bernoulli.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidModel("cond_bernoulli must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// `T_n = n τ`.
    pub fn horizon(&self) -> f64 {
        self.n as f64 * self.tau
    }

    /// `E[X̄] = Σ α_j p_j`.
    pub fn mean_input(&self) -> f64 {
        self.aux_probs.iter().zip(&self.cond_bernoulli).map(|(a, p)| a * p).sum()
    }

    pub fn alphabet_size(&self) -> usize {
        self.aux_probs.len()
    }

    /// Start time of block `i` (zero-based).
    #[inline]
    pub fn block_start(&self, i: usize) -> f64 {
        i as f64 * self.tau
    }

    /// Block containing time `t`, blocks being `[iτ, (i+1)τ)`; times at or
    /// past the horizon belong to the last block.
    #[inline]
    pub fn block_of(&self, t: f64) -> usize {
        ((t / self.tau).floor().max(0.0) as usize).min(self.n - 1)
    }

    /// Draws an auxiliary symbol from `rng`.
    pub fn draw_aux<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, &a) in self.aux_probs.iter().enumerate() {
            acc += a;
            if u < acc {
                return j as u32;
            }
        }
        // rounding slack: last symbol with positive weight
        self.aux_probs.iter().rposition(|&a| a > 0.0).unwrap_or(0) as u32
    }

    /// Draws the binary input of a block given its auxiliary symbol.
    pub fn draw_input<R: Rng>(&self, rng: &mut R, v: u32) -> u8 {
        let p = self.cond_bernoulli[v as usize];
        let u: f64 = rng.random();
        u8::from(u < p)
    }
}

/// One joint draw of auxiliary path, input path and both outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub v_bar: Vec<u32>,
    pub x_bar: Vec<u8>,
    pub y: PointProcess,
    pub z: PointProcess,
}

impl ChannelRealization {
    pub fn output(&self, r: Receiver) -> &PointProcess {
        match r {
            Receiver::Y => &self.y,
            Receiver::Z => &self.z,
        }
    }
}

/// Auxiliary and input block paths for one trial.
pub fn sample_inputs(model: &BlockInputModel, seed: u64, trial: u64) -> (Vec<u32>, Vec<u8>) {
    let mut v_bar = Vec::with_capacity(model.n);
    let mut x_bar = Vec::with_capacity(model.n);
    for i in 0..model.n {
        let mut rng = stream(seed, Domain::Input, trial, i as u64, 0);
        let v = model.draw_aux(&mut rng);
        v_bar.push(v);
        x_bar.push(model.draw_input(&mut rng, v));
    }
    (v_bar, x_bar)
}

/// Output process of one receiver for a fixed binary block input path.
pub fn sample_output(
    x_bar: &[u8],
    tau: f64,
    rp: ReceiverParams,
    receiver: Receiver,
    seed: u64,
    trial: u64,
) -> PointProcess {
    let n = x_bar.len();
    let horizon = n as f64 * tau;
    let mut arrivals = Vec::new();
    let mut block = Vec::new();
    for (i, &x) in x_bar.iter().enumerate() {
        let mean = rp.rate(f64::from(x)) * tau;
        if mean <= 0.0 {
            continue;
        }
        let mut rng = stream(seed, Domain::Output, trial, i as u64, receiver.index());
        let k = Poisson::new(mean).expect("positive finite mean").sample(&mut rng) as usize;
        if k == 0 {
            continue;
        }
        let start = i as f64 * tau;
        let end = if i + 1 == n { horizon } else { (i + 1) as f64 * tau };
        block.clear();
        for _ in 0..k {
            let u: f64 = Open01.sample(&mut rng);
            let mut t = start + tau * u;
            // keep the arrival inside its own block under rounding
            if t >= end {
                t = end.next_down();
            }
            if t <= start {
                t = start.next_up();
            }
            // and consistent with `floor(t / τ)` block assignment
            for _ in 0..8 {
                let b = (t / tau).floor();
                if b < i as f64 {
                    t = t.next_up();
                } else if b > i as f64 && i + 1 < n {
                    t = t.next_down();
                } else {
                    break;
                }
            }
            block.push(t);
        }
        block.sort_by(f64::total_cmp);
        block.dedup();
        for &t in &block {
            if arrivals.last().is_none_or(|&last| t > last) {
                arrivals.push(t);
            }
        }
    }
    PointProcess { horizon, arrivals }
}

/// Joint sample for trial `trial` under `seed`.
pub fn sample_realization_trial(model: &BlockInputModel, params: &ChannelParams, seed: u64, trial: u64) -> ChannelRealization {
    let (v_bar, x_bar) = sample_inputs(model, seed, trial);
    let y = sample_output(&x_bar, model.tau, params.receiver(Receiver::Y), Receiver::Y, seed, trial);
    let z = sample_output(&x_bar, model.tau, params.receiver(Receiver::Z), Receiver::Z, seed, trial);
    ChannelRealization { v_bar, x_bar, y, z }
}

/// Draws `V̄`, `X̄` and both outputs; deterministic given `seed`.
pub fn sample_realization(model: &BlockInputModel, params: &ChannelParams, seed: u64) -> Result<ChannelRealization> {
    model.validate()?;
    params.validate()?;
    Ok(sample_realization_trial(model, params, seed, 0))
}
