//! Brute-force oracles shared by the integration and acceptance tests.
//! Everything here is written from the defining formulas and only uses the
//! library for parameter types and random streams.
#![allow(dead_code)]

use poissonbc_core::rng::{stream, Domain, StreamRng};
use poissonbc_core::ChannelParams;
use rand::Rng;

pub fn rng(seed: u64) -> StreamRng {
    stream(seed, Domain::Input, u64::MAX, 0, 0)
}

/// Random channel parameters with occasional zero gains and dark currents.
pub fn random_params(rng: &mut StreamRng) -> ChannelParams {
    let mut draw = |p_zero: f64| {
        if rng.random::<f64>() < p_zero {
            0.0
        } else {
            rng.random_range(0.0..3.0)
        }
    };
    let a_y = draw(0.05);
    let l_y = draw(0.1);
    let a_z = draw(0.05);
    let l_z = draw(0.1);
    ChannelParams::new(a_y, l_y, a_z, l_z).unwrap()
}

/// `(a x + λ) ln(a x + λ)` with `0 ln 0 = 0`.
pub fn phi(a: f64, l: f64, x: f64) -> f64 {
    let r = a * x + l;
    if r <= 0.0 {
        0.0
    } else {
        r * r.ln()
    }
}

/// `Φ″(x) ≥ −1e−9` on a grid of `points` values in `[0, 1]`, using
/// `φ″(x) = a² / (a x + λ)`.
pub fn brute_convex(p: &ChannelParams, points: usize) -> bool {
    let second = |a: f64, l: f64, x: f64| {
        if a == 0.0 {
            Some(0.0)
        } else if a * x + l == 0.0 {
            None
        } else {
            Some(a * a / (a * x + l))
        }
    };
    (0..points).all(|i| {
        let x = i as f64 / (points - 1) as f64;
        match (second(p.a_y, p.lambda_y, x), second(p.a_z, p.lambda_z, x)) {
            (Some(y), Some(z)) => y - z >= -1e-9,
            // +∞ on the y side
            (None, Some(_)) => true,
            (Some(_), None) => false,
            // both infinite at x = 0: decided by neighbouring points
            (None, None) => true,
        }
    })
}

/// Largest of `f` over `points` uniformly spaced values in `[0, 1]`.
pub fn grid_max(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    (0..points)
        .map(|i| f(i as f64 / (points - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn pp_oracle(a: f64, l: f64, points: usize) -> f64 {
    grid_max(|k| k * phi(a, l, 1.0) + (1.0 - k) * phi(a, l, 0.0) - phi(a, l, k), points)
}

pub fn wiretap_oracle(p: &ChannelParams, points: usize) -> f64 {
    let big = |x: f64| phi(p.a_y, p.lambda_y, x) - phi(p.a_z, p.lambda_z, x);
    grid_max(|k| k * big(1.0) + (1.0 - k) * big(0.0) - big(k), points).max(0.0)
}

/// `(C_y, C_z)` of the broadcast region at `(α, p, q)`.
pub fn bc_rates_oracle(pr: &ChannelParams, alpha: f64, p: f64, q: f64) -> (f64, f64) {
    let gap = |x: f64| x * phi(pr.a_y, pr.lambda_y, 1.0) + (1.0 - x) * phi(pr.a_y, pr.lambda_y, 0.0) - phi(pr.a_y, pr.lambda_y, x);
    let fz = |x: f64| phi(pr.a_z, pr.lambda_z, x);
    (
        alpha * gap(p) + (1.0 - alpha) * gap(q),
        alpha * fz(p) + (1.0 - alpha) * fz(q) - fz(alpha * p + (1.0 - alpha) * q),
    )
}

/// Support function of the broadcast region at each angle, by exhaustive
/// scan of `α ∈ [0, 1/2]`, `p, q ∈ [0, 1]` with step `1 / cells`.
pub fn bc_support_oracle(pr: &ChannelParams, cells: usize, angles: &[f64]) -> Vec<f64> {
    let w: Vec<(f64, f64)> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
    let mut best = vec![f64::NEG_INFINITY; angles.len()];
    let g: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let gap: Vec<f64> = g
        .iter()
        .map(|&x| x * phi(pr.a_y, pr.lambda_y, 1.0) + (1.0 - x) * phi(pr.a_y, pr.lambda_y, 0.0) - phi(pr.a_y, pr.lambda_y, x))
        .collect();
    let fz: Vec<f64> = g.iter().map(|&x| phi(pr.a_z, pr.lambda_z, x)).collect();
    for ia in 0..=cells / 2 {
        let a = g[ia];
        for ip in 0..=cells {
            for iq in 0..=cells {
                let cy = a * gap[ip] + (1.0 - a) * gap[iq];
                let cz = a * fz[ip] + (1.0 - a) * fz[iq] - phi(pr.a_z, pr.lambda_z, a * g[ip] + (1.0 - a) * g[iq]);
                for (b, &(c, s)) in best.iter_mut().zip(&w) {
                    let v = c * cy + s * cz;
                    if v > *b {
                        *b = v;
                    }
                }
            }
        }
    }
    best
}

/// `(Ĉ_y, C̃_y, C_z)` for a three-symbol auxiliary.
pub fn superposition_oracle(pr: &ChannelParams, al: [f64; 3], p: [f64; 3]) -> (f64, f64, f64) {
    let (fy, fz) = (|x| phi(pr.a_y, pr.lambda_y, x), |x| phi(pr.a_z, pr.lambda_z, x));
    let m: f64 = (0..3).map(|i| al[i] * p[i]).sum();
    let mut hat = 0.0;
    let mut tilde = -fy(m);
    let mut cz = -fz(m);
    for i in 0..3 {
        hat += al[i] * (p[i] * fy(1.0) + (1.0 - p[i]) * fy(0.0) - fy(p[i]));
        tilde += al[i] * fy(p[i]);
        cz += al[i] * fz(p[i]);
    }
    (hat, tilde, cz)
}

/// Support function of the degraded-message-sets region in `(R_y, R_0)`,
/// by exhaustive scan of the 5-D grid with step `1 / cells`. For one
/// parameter choice the achievable set is
/// `{R_0 ≤ C_z, R_0 + R_y ≤ Ĉ_y + C̃_y, R_0 + R_y ≤ C_z + Ĉ_y}` in the
/// nonnegative quadrant, whose support value is a linear program solved at
/// its corners.
pub fn dms_support_oracle(pr: &ChannelParams, cells: usize, angles: &[f64]) -> Vec<f64> {
    let w: Vec<(f64, f64)> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
    let mut best = vec![f64::NEG_INFINITY; angles.len()];
    let g: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    for i1 in 0..=cells {
        for i2 in 0..=cells - i1 {
            let al = [g[i1], g[i2], (1.0 - g[i1] - g[i2]).max(0.0)];
            for j1 in 0..=cells {
                for j2 in 0..=cells {
                    for j3 in 0..=cells {
                        let (hat, tilde, cz) = superposition_oracle(pr, al, [g[j1], g[j2], g[j3]]);
                        let sum = (hat + tilde).min(cz + hat).max(0.0);
                        let common = cz.max(0.0).min(sum);
                        for (b, &(c, s)) in best.iter_mut().zip(&w) {
                            // corners (sum, 0) and (sum − common, common)
                            let v = (c * sum).max(c * (sum - common) + s * common);
                            if v > *b {
                                *b = v;
                            }
                        }
                    }
                }
            }
        }
    }
    best
}
