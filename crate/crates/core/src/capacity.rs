//! Capacity computations: point-to-point, wiretap secrecy, the more-capable
//! broadcast region and the degraded-message-sets region.
//!
//! All rates are in nats per unit time. Regions are traced by their support
//! function: for each weight angle `θ ∈ [0, π/2]` the weighted sum
//! `cos θ · R_y + sin θ · R_other` is maximized over the input parameters
//! (grid, then coordinate-wise golden-section refinement from several
//! starts), and the maximizing rate points are hulled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{classify_ordering, ChannelParams, Receiver, ReceiverParams};
use crate::error::Result;
use crate::hull::pareto_hull;
use crate::optimize::{coordinate_refine, grid_golden_max};

/// `x ∈ [0, 1]` tolerance used by the 1-D maximizers.
const X_TOL_1D: f64 = 1e-12;

/// Cells used by the 1-D grid stage.
const CELLS_1D: usize = 2000;

/// Jensen gap of `φ` against the chord through `0` and `1`:
/// `x φ(1) + (1 − x) φ(0) − φ(x)`.
#[inline]
pub fn chord_gap(r: &ReceiverParams, x: f64) -> f64 {
    x * r.phi(1.0) + (1.0 - x) * r.phi(0.0) - r.phi(x)
}

/// Point-to-point capacity and its maximizing on-fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpCapacity {
    pub capacity: f64,
    pub kappa: f64,
}

/// `max_κ κφ(1) + (1−κ)φ(0) − φ(κ)` for one receiver.
pub fn pp_capacity(params: &ChannelParams, receiver: Receiver) -> Result<PpCapacity> {
    params.validate()?;
    let r = params.receiver(receiver);
    if r.a == 0.0 {
        return Ok(PpCapacity {
            capacity: 0.0,
            kappa: 0.0,
        });
    }
    let m = grid_golden_max(|k| chord_gap(&r, k), 0.0, 1.0, CELLS_1D, X_TOL_1D);
    Ok(PpCapacity {
        capacity: m.value.max(0.0),
        kappa: m.x,
    })
}

/// Secrecy capacity with its maximizing on-fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiretapCapacity {
    pub capacity: f64,
    pub alpha: f64,
    /// Set when receiver `y` is not more capable; the formula is then only
    /// evaluated, not a proven capacity.
    pub warning: Option<String>,
}

/// `max_α αΦ(1) + (1−α)Φ(0) − Φ(α)`.
pub fn wiretap_capacity(params: &ChannelParams) -> Result<WiretapCapacity> {
    let verdict = classify_ordering(params)?;
    let phi1 = params.capital_phi_unchecked(1.0);
    let phi0 = params.capital_phi_unchecked(0.0);
    let objective = |a: f64| a * phi1 + (1.0 - a) * phi0 - params.capital_phi_unchecked(a);
    let m = grid_golden_max(objective, 0.0, 1.0, CELLS_1D, X_TOL_1D);
    let warning = (!verdict.more_capable_y_over_z)
        .then(|| "receiver y is not more capable than z; secrecy formula is not a proven capacity".to_string());
    Ok(WiretapCapacity {
        capacity: m.value.max(0.0),
        alpha: m.x,
        warning,
    })
}

/// Rate pair of the more-capable broadcast region for one `(α, p, q)`.
#[inline]
pub fn bc_rates(params: &ChannelParams, alpha: f64, p: f64, q: f64) -> (f64, f64) {
    let y = params.receiver(Receiver::Y);
    let z = params.receiver(Receiver::Z);
    let c_y = alpha * chord_gap(&y, p) + (1.0 - alpha) * chord_gap(&y, q);
    let c_z = alpha * z.phi(p) + (1.0 - alpha) * z.phi(q) - z.phi(alpha * p + (1.0 - alpha) * q);
    (c_y, c_z)
}

/// The three rate expressions of a superposition input with auxiliary law
/// `aux_probs` and conditional on-probabilities `cond`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionRates {
    /// `Σ α_j φ_z(p_j) − φ_z(Σ α_j p_j)`: cloud rate seen by `z`.
    pub c_z: f64,
    /// `Σ α_j (p_j φ_y(1) + (1−p_j) φ_y(0) − φ_y(p_j))`: satellite rate at `y`.
    pub c_hat_y: f64,
    /// `Σ α_j φ_y(p_j) − φ_y(Σ α_j p_j)`: cloud rate seen by `y`.
    pub c_tilde_y: f64,
}

pub fn superposition_rates(params: &ChannelParams, aux_probs: &[f64], cond: &[f64]) -> SuperpositionRates {
    let y = params.receiver(Receiver::Y);
    let z = params.receiver(Receiver::Z);
    let mean: f64 = aux_probs.iter().zip(cond).map(|(a, p)| a * p).sum();
    let mut c_z = -z.phi(mean);
    let mut c_hat_y = 0.0;
    let mut c_tilde_y = -y.phi(mean);
    for (&a, &p) in aux_probs.iter().zip(cond) {
        c_z += a * z.phi(p);
        c_hat_y += a * chord_gap(&y, p);
        c_tilde_y += a * y.phi(p);
    }
    SuperpositionRates {
        c_z,
        c_hat_y,
        c_tilde_y,
    }
}

/// Largest common-plus-private sum rate allowed by the degraded-message-sets
/// constraints.
#[inline]
fn dms_sum_cap(r: &SuperpositionRates) -> f64 {
    (r.c_hat_y + r.c_tilde_y).min(r.c_z + r.c_hat_y)
}

/// The two non-trivial vertices `(R_y, R_0)` of the degraded-message-sets
/// pentagon for one parameter choice.
#[inline]
pub fn dms_vertices(r: &SuperpositionRates) -> [(f64, f64); 2] {
    let s = dms_sum_cap(r).max(0.0);
    let m = r.c_z.clamp(0.0, s);
    [(s, 0.0), (s - m, m)]
}

/// Grid and sweep controls for the region computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionResolution {
    /// Grid cells per unit length of each parameter axis.
    pub grid_cells: usize,
    /// Number of weight angles, uniform on `[0, π/2]`.
    pub angles: usize,
    /// Refinement starts per angle.
    pub starts: usize,
}

impl RegionResolution {
    pub const BC_DEFAULT: Self = Self {
        grid_cells: 200,
        angles: 181,
        starts: 16,
    };

    pub const DMS_DEFAULT: Self = Self {
        grid_cells: 50,
        angles: 181,
        starts: 16,
    };

    pub fn angle(&self, k: usize) -> f64 {
        if self.angles <= 1 {
            return 0.0;
        }
        std::f64::consts::FRAC_PI_2 * k as f64 / (self.angles - 1) as f64
    }
}

/// An achievable rate pair with the parameters attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r_y: f64,
    /// `R_z` for the broadcast region, `R_0` for degraded message sets.
    pub r_other: f64,
    /// `[α, p, q]` for the broadcast region; `[α₁, α₂, α₃, p₁, p₂, p₃]` for
    /// degraded message sets.
    pub parameters: Vec<f64>,
    /// Weight angle whose maximizer produced this point.
    pub angle: f64,
}

/// Maximal weighted sum rate for one weight direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportValue {
    pub angle: f64,
    pub mu_y: f64,
    pub mu_other: f64,
    pub value: f64,
    /// Best value at the grid stage, before refinement.
    pub grid_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    /// Concave upper-right boundary, ordered by increasing `r_y`.
    pub points: Vec<RatePoint>,
    /// One entry per weight angle, in angle order.
    pub support_values: Vec<SupportValue>,
    pub warning: Option<String>,
}

impl RegionBoundary {
    /// Largest `r_y` on the boundary.
    pub fn r_y_intercept(&self) -> f64 {
        self.support_values.first().map_or(0.0, |s| s.value)
    }

    /// Largest `r_other` on the boundary.
    pub fn r_other_intercept(&self) -> f64 {
        self.support_values.last().map_or(0.0, |s| s.value)
    }
}

/// A grid candidate: its rate pair and parameter vector.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    rates: (f64, f64),
    x: [f64; 5],
}

/// Accumulates grid candidates keeping only those on the running hull.
struct HullAccumulator {
    kept: Vec<Candidate>,
    pending: Vec<Candidate>,
}

impl HullAccumulator {
    fn new() -> Self {
        Self {
            kept: Vec::new(),
            pending: Vec::new(),
        }
    }

    fn push(&mut self, c: Candidate) {
        self.pending.push(c);
        if self.pending.len() >= 1 << 16 {
            self.compact();
        }
    }

    fn compact(&mut self) {
        let mut all = std::mem::take(&mut self.kept);
        all.append(&mut self.pending);
        self.kept = hull_candidates(all);
    }

    fn merge(mut self, mut other: Self) -> Self {
        self.pending.append(&mut other.kept);
        self.pending.append(&mut other.pending);
        self.compact();
        self
    }

    fn finish(mut self) -> Vec<Candidate> {
        self.compact();
        self.kept
    }
}

/// Hull of candidates, including the axis-projected corners so that points
/// dominated only in one coordinate stay out.
fn hull_candidates(all: Vec<Candidate>) -> Vec<Candidate> {
    if all.is_empty() {
        return all;
    }
    let pts: Vec<(f64, f64)> = all.iter().map(|c| c.rates).collect();
    let mut keep = vec![false; all.len()];
    for i in pareto_hull(&pts) {
        keep[i] = true;
    }
    all.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

/// Support-function sweep shared by both regions.
fn sweep_region<F, B>(
    candidates: Vec<Candidate>,
    dim: usize,
    objective: F,
    bounds: B,
    res: &RegionResolution,
    warning: Option<String>,
) -> RegionBoundary
where
    F: Fn(&[f64], f64, f64) -> (f64, (f64, f64)) + Sync,
    B: Fn(usize, &[f64]) -> (f64, f64) + Sync,
{
    let per_angle: Vec<(SupportValue, RatePoint)> = (0..res.angles)
        .into_par_iter()
        .map(|k| {
            let angle = res.angle(k);
            let (mu_y, mu_o) = (angle.cos(), angle.sin());
            let weighted = |c: &Candidate| mu_y * c.rates.0 + mu_o * c.rates.1;
            let mut ranked: Vec<&Candidate> = candidates.iter().collect();
            ranked.sort_by(|a, b| weighted(b).total_cmp(&weighted(a)));
            let grid_value = ranked.first().map_or(0.0, |c| weighted(c));
            let mut best_value = f64::NEG_INFINITY;
            let mut best_x = Vec::new();
            for start in ranked.iter().take(res.starts.max(1)) {
                let m = coordinate_refine(|x| objective(x, mu_y, mu_o).0, &bounds, &start.x[..dim], 1e-10, 200);
                if m.value > best_value {
                    best_value = m.value;
                    best_x = m.x;
                }
            }
            let (value, rates) = objective(&best_x, mu_y, mu_o);
            (
                SupportValue {
                    angle,
                    mu_y,
                    mu_other: mu_o,
                    value,
                    grid_value,
                },
                RatePoint {
                    r_y: rates.0,
                    r_other: rates.1,
                    parameters: best_x,
                    angle,
                },
            )
        })
        .collect();

    let (support_values, raw_points): (Vec<_>, Vec<_>) = per_angle.into_iter().unzip();
    let pts: Vec<(f64, f64)> = raw_points.iter().map(|p| (p.r_y, p.r_other)).collect();
    let points = pareto_hull(&pts).into_iter().map(|i| raw_points[i].clone()).collect();
    RegionBoundary {
        points,
        support_values,
        warning,
    }
}

fn axis(cells: usize, hi: f64) -> Vec<f64> {
    (0..=cells).map(|i| hi * i as f64 / cells as f64).collect()
}

/// Capacity region of the more-capable broadcast channel.
///
/// Parameters are `(α, p, q)` with `α ∈ [0, 1/2]`, `p, q ∈ [0, 1]`.
pub fn bc_region(params: &ChannelParams, res: &RegionResolution) -> Result<RegionBoundary> {
    let verdict = classify_ordering(params)?;
    let warning = (!verdict.more_capable_y_over_z)
        .then(|| "receiver y is not more capable than z; region formula evaluated without capacity guarantee".to_string());

    let n = res.grid_cells.max(2);
    let alphas = axis(n / 2, 0.5);
    let ps = axis(n, 1.0);
    let candidates = alphas
        .par_iter()
        .map(|&a| {
            let mut acc = HullAccumulator::new();
            for &p in &ps {
                for &q in &ps {
                    acc.push(Candidate {
                        rates: bc_rates(params, a, p, q),
                        x: [a, p, q, 0.0, 0.0],
                    });
                }
            }
            acc
        })
        .reduce(HullAccumulator::new, HullAccumulator::merge)
        .finish();

    let objective = |x: &[f64], mu_y: f64, mu_z: f64| {
        let r = bc_rates(params, x[0], x[1], x[2]);
        (mu_y * r.0 + mu_z * r.1, r)
    };
    let bounds = |i: usize, _: &[f64]| if i == 0 { (0.0, 0.5) } else { (0.0, 1.0) };
    Ok(sweep_region(candidates, 3, objective, bounds, res, warning))
}

/// Unpacks `[α₁, α₂, p₁, p₂, p₃]` into full weight and probability triples.
#[inline]
fn dms_unpack(x: &[f64]) -> ([f64; 3], [f64; 3]) {
    let a3 = (1.0 - x[0] - x[1]).max(0.0);
    ([x[0], x[1], a3], [x[2], x[3], x[4]])
}

/// Capacity region with degraded message sets, as `(R_y, R_0)` pairs.
///
/// The grid stage enumerates `p₁ ≤ p₂ ≤ p₃` only: relabelling the three
/// auxiliary symbols permutes `(α_i, p_i)` jointly and leaves every rate
/// unchanged.
pub fn dms_region(params: &ChannelParams, res: &RegionResolution) -> Result<RegionBoundary> {
    params.validate()?;
    let n = res.grid_cells.max(2);
    let grid = axis(n, 1.0);
    let simplex: Vec<(f64, f64)> = (0..=n)
        .flat_map(|i| (0..=n - i).map(move |j| (i, j)))
        .map(|(i, j)| (grid[i], grid[j]))
        .collect();
    let candidates = simplex
        .par_iter()
        .map(|&(a1, a2)| {
            let mut acc = HullAccumulator::new();
            let alphas = [a1, a2, (1.0 - a1 - a2).max(0.0)];
            for i in 0..=n {
                for j in i..=n {
                    for k in j..=n {
                        let ps = [grid[i], grid[j], grid[k]];
                        let r = superposition_rates(params, &alphas, &ps);
                        let x = [a1, a2, ps[0], ps[1], ps[2]];
                        for v in dms_vertices(&r) {
                            acc.push(Candidate { rates: v, x });
                        }
                    }
                }
            }
            acc
        })
        .reduce(HullAccumulator::new, HullAccumulator::merge)
        .finish();

    let objective = |x: &[f64], mu_y: f64, mu_0: f64| {
        let (a, p) = dms_unpack(x);
        let r = superposition_rates(params, &a, &p);
        let [v1, v2] = dms_vertices(&r);
        let w1 = mu_y * v1.0 + mu_0 * v1.1;
        let w2 = mu_y * v2.0 + mu_0 * v2.1;
        if w2 >= w1 {
            (w2, v2)
        } else {
            (w1, v1)
        }
    };
    let bounds = |i: usize, x: &[f64]| match i {
        0 => (0.0, 1.0 - x[1]),
        1 => (0.0, 1.0 - x[0]),
        _ => (0.0, 1.0),
    };
    let mut boundary = sweep_region(candidates, 5, objective, bounds, res, None);
    for p in &mut boundary.points {
        let (a, q) = dms_unpack(&p.parameters);
        p.parameters = a.into_iter().chain(q).collect();
    }
    Ok(boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a_y: f64, l_y: f64, a_z: f64, l_z: f64) -> ChannelParams {
        ChannelParams::new(a_y, l_y, a_z, l_z).unwrap()
    }

    /// Plain scan at `points` uniformly spaced values, the 1-D oracle.
    fn grid_oracle<F: Fn(f64) -> f64>(f: F, points: usize) -> f64 {
        (0..points)
            .map(|i| f(i as f64 / (points - 1) as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn pp_unit_attenuation_no_dark_current() {
        let c = pp_capacity(&params(1.0, 0.0, 1.0, 0.0), Receiver::Y).unwrap();
        let e_inv = (-1.0f64).exp();
        assert!((c.capacity - e_inv).abs() < 1e-9);
        assert!((c.kappa - e_inv).abs() < 1e-6);
    }

    #[test]
    fn pp_zero_attenuation() {
        let c = pp_capacity(&params(0.0, 3.0, 0.0, 0.0), Receiver::Y).unwrap();
        assert_eq!(c.capacity, 0.0);
    }

    #[test]
    fn pp_matches_grid_oracle() {
        let p = params(1.0, 1.0, 0.5, 0.2);
        for r in [Receiver::Y, Receiver::Z] {
            let rp = p.receiver(r);
            let oracle = grid_oracle(|k| chord_gap(&rp, k), 1_000_001);
            let c = pp_capacity(&p, r).unwrap();
            assert!(c.capacity >= oracle - 1e-12);
            assert!(c.capacity - oracle < 1e-9);
        }
    }

    #[test]
    fn wiretap_identical_is_zero() {
        let w = wiretap_capacity(&params(0.6, 0.3, 0.6, 0.3)).unwrap();
        assert_eq!(w.capacity, 0.0);
        assert!(w.warning.is_none());
    }

    #[test]
    fn wiretap_blind_eavesdropper_is_pp() {
        let p = params(1.0, 0.0, 0.0, 1.0);
        let w = wiretap_capacity(&p).unwrap();
        let pp = pp_capacity(&p, Receiver::Y).unwrap();
        assert!((w.capacity - pp.capacity).abs() < 1e-10);
    }

    #[test]
    fn wiretap_matches_grid_oracle() {
        let p = params(1.0, 0.1, 0.5, 0.2);
        let phi1 = p.capital_phi_unchecked(1.0);
        let phi0 = p.capital_phi_unchecked(0.0);
        let oracle = grid_oracle(|a| a * phi1 + (1.0 - a) * phi0 - p.capital_phi_unchecked(a), 1_000_001);
        let w = wiretap_capacity(&p).unwrap();
        assert!((w.capacity - oracle).abs() < 1e-8);
    }

    #[test]
    fn wiretap_warns_without_ordering() {
        let w = wiretap_capacity(&params(0.4, 0.01, 1.0, 1.0)).unwrap();
        assert!(w.warning.is_some());
    }

    #[test]
    fn bc_rates_equal_p_q_has_no_cloud_rate() {
        let p = params(1.0, 0.1, 0.5, 0.2);
        let (c_y, c_z) = bc_rates(&p, 0.3, 0.4, 0.4);
        assert!(c_z.abs() < 1e-15);
        assert!((c_y - chord_gap(&p.receiver(Receiver::Y), 0.4)).abs() < 1e-15);
    }

    #[test]
    fn superposition_rates_reduce_to_bc() {
        let p = params(1.0, 0.1, 0.5, 0.2);
        let r = superposition_rates(&p, &[0.3, 0.7], &[0.9, 0.2]);
        let (c_y, c_z) = bc_rates(&p, 0.3, 0.9, 0.2);
        assert!((r.c_hat_y - c_y).abs() < 1e-14);
        assert!((r.c_z - c_z).abs() < 1e-14);
    }

    #[test]
    fn dms_degenerate_equal_p() {
        let p = params(1.0, 0.1, 0.5, 0.2);
        let r = superposition_rates(&p, &[0.2, 0.3, 0.5], &[0.4, 0.4, 0.4]);
        assert!(r.c_z.abs() < 1e-15 && r.c_tilde_y.abs() < 1e-15);
        let [v1, v2] = dms_vertices(&r);
        assert_eq!(v2.1, 0.0);
        assert!((v1.0 - r.c_hat_y).abs() < 1e-15);
    }

    #[test]
    fn small_bc_region_is_concave_with_pp_intercepts() {
        let p = params(1.0, 0.1, 0.5, 0.2);
        let res = RegionResolution {
            grid_cells: 40,
            angles: 19,
            starts: 4,
        };
        let b = bc_region(&p, &res).unwrap();
        let py = pp_capacity(&p, Receiver::Y).unwrap().capacity;
        let pz = pp_capacity(&p, Receiver::Z).unwrap().capacity;
        assert!((b.r_y_intercept() - py).abs() < 1e-6);
        assert!((b.r_other_intercept() - pz).abs() < 1e-6);
        let chain: Vec<_> = b.points.iter().map(|q| (q.r_y, q.r_other)).collect();
        assert!(crate::hull::is_concave_chain(&chain));
        for s in &b.support_values {
            assert!(s.value >= s.grid_value - 1e-15);
        }
    }
}
