//! Two-receiver Poisson channel parameters and receiver orderings.
//!
//! Receiver `u` sees a doubly-stochastic Poisson process with rate
//! `a_u x_t + λ_u` for an input waveform `x_t ∈ [0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::xlogx;

/// Tolerance for accepting inputs slightly outside `[0, 1]`.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Relative tolerance for the endpoint inequalities; ties satisfy them.
pub const ORDERING_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    Y,
    Z,
}

impl Receiver {
    pub fn other(self) -> Self {
        match self {
            Receiver::Y => Receiver::Z,
            Receiver::Z => Receiver::Y,
        }
    }

    pub fn index(self) -> u64 {
        match self {
            Receiver::Y => 0,
            Receiver::Z => 1,
        }
    }
}

impl std::fmt::Display for Receiver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Receiver::Y => f.write_str("y"),
            Receiver::Z => f.write_str("z"),
        }
    }
}

impl std::str::FromStr for Receiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "y" | "Y" => Ok(Receiver::Y),
            "z" | "Z" => Ok(Receiver::Z),
            other => Err(Error::Config(format!("unknown receiver '{other}'"))),
        }
    }
}

/// Attenuation and dark current of a single receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverParams {
    pub a: f64,
    pub lambda: f64,
}

impl ReceiverParams {
    pub fn new(a: f64, lambda: f64) -> Self {
        Self { a, lambda }
    }

    /// Arrival rate for input level `x`.
    #[inline]
    pub fn rate(&self, x: f64) -> f64 {
        self.a * x + self.lambda
    }

    /// `φ(x) = (a x + λ) ln(a x + λ)`, no domain check.
    #[inline]
    pub fn phi(&self, x: f64) -> f64 {
        xlogx(self.rate(x))
    }

    /// True when the receiver sees no arrivals at all.
    pub fn is_dead(&self) -> bool {
        self.a == 0.0 && self.lambda == 0.0
    }
}

/// The four constants defining both receivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub a_y: f64,
    pub lambda_y: f64,
    pub a_z: f64,
    pub lambda_z: f64,
}

impl ChannelParams {
    /// Builds and validates a parameter set.
    pub fn new(a_y: f64, lambda_y: f64, a_z: f64, lambda_z: f64) -> Result<Self> {
        let p = Self {
            a_y,
            lambda_y,
            a_z,
            lambda_z,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_y", self.a_y),
            ("lambda_y", self.lambda_y),
            ("a_z", self.a_z),
            ("lambda_z", self.lambda_z),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    pub fn receiver(&self, r: Receiver) -> ReceiverParams {
        match r {
            Receiver::Y => ReceiverParams::new(self.a_y, self.lambda_y),
            Receiver::Z => ReceiverParams::new(self.a_z, self.lambda_z),
        }
    }

    /// Exchanges the roles of the two receivers.
    pub fn swapped(&self) -> Self {
        Self {
            a_y: self.a_z,
            lambda_y: self.lambda_z,
            a_z: self.a_y,
            lambda_z: self.lambda_y,
        }
    }

    /// `Φ(x) = φ_y(x) − φ_z(x)`, no domain check.
    #[inline]
    pub fn capital_phi_unchecked(&self, x: f64) -> f64 {
        self.receiver(Receiver::Y).phi(x) - self.receiver(Receiver::Z).phi(x)
    }
}

fn check_unit(x: f64) -> Result<f64> {
    if !(x >= -DOMAIN_TOL && x <= 1.0 + DOMAIN_TOL) {
        return Err(Error::Domain(format!("x = {x} is outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// `φ_u(x) = (a_u x + λ_u) ln(a_u x + λ_u)` in nats per unit time.
pub fn phi(params: &ChannelParams, receiver: Receiver, x: f64) -> Result<f64> {
    let x = check_unit(x)?;
    Ok(params.receiver(receiver).phi(x))
}

/// `Φ(x) = φ_y(x) − φ_z(x)`.
pub fn capital_phi(params: &ChannelParams, x: f64) -> Result<f64> {
    let x = check_unit(x)?;
    Ok(params.capital_phi_unchecked(x))
}

/// Outcome of [`classify_ordering`].
///
/// The more-capable flags also answer "less noisy"; the two orderings
/// coincide for this channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingVerdict {
    pub more_capable_y_over_z: bool,
    pub more_capable_z_over_y: bool,
    pub degraded_y_over_z: bool,
    pub degraded_z_over_y: bool,
    /// Input level where `Φ'' ≥ 0` fails, when `y` is not more capable.
    pub witness_y_over_z: Option<f64>,
    /// Same for the reversed ordering.
    pub witness_z_over_y: Option<f64>,
}

#[inline]
fn geq_rel(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - ORDERING_REL_TOL * lhs.abs().max(rhs.abs())
}

/// Whether `first` is more capable than `second`, with a failing input level
/// otherwise.
///
/// `Φ''(x) ≥ 0` is tested through `a₁²(a₂x+λ₂) ≥ a₂²(a₁x+λ₁)`, which is affine
/// in `x` and so only needs checking at `x = 0` and `x = 1`.
fn more_capable(first: ReceiverParams, second: ReceiverParams) -> (bool, Option<f64>) {
    if second.a == 0.0 {
        // φ₂ is affine, Φ inherits the convexity of φ₁.
        return (true, None);
    }
    if first.is_dead() {
        return (false, Some(0.5));
    }
    let a1s = first.a * first.a;
    let a2s = second.a * second.a;
    for x in [0.0, 1.0] {
        let lhs = a1s * second.rate(x);
        let rhs = a2s * first.rate(x);
        if !geq_rel(lhs, rhs) {
            return (false, Some(x));
        }
    }
    (true, None)
}

fn degraded(first: ReceiverParams, second: ReceiverParams) -> bool {
    geq_rel(first.a, second.a) && geq_rel(first.a * second.lambda, second.a * first.lambda)
}

/// Classifies both orderings of the two receivers.
pub fn classify_ordering(params: &ChannelParams) -> Result<OrderingVerdict> {
    params.validate()?;
    let y = params.receiver(Receiver::Y);
    let z = params.receiver(Receiver::Z);
    let (mc_yz, w_yz) = more_capable(y, z);
    let (mc_zy, w_zy) = more_capable(z, y);
    Ok(OrderingVerdict {
        more_capable_y_over_z: mc_yz,
        more_capable_z_over_y: mc_zy,
        degraded_y_over_z: degraded(y, z),
        degraded_z_over_y: degraded(z, y),
        witness_y_over_z: w_yz,
        witness_z_over_y: w_zy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(a_y: f64, l_y: f64, a_z: f64, l_z: f64) -> ChannelParams {
        ChannelParams::new(a_y, l_y, a_z, l_z).unwrap()
    }

    #[test]
    fn phi_examples() {
        let p = params(1.0, 0.0, 0.4, 0.01);
        assert_eq!(phi(&p, Receiver::Y, 0.0).unwrap(), 0.0);
        assert_eq!(phi(&p, Receiver::Y, 1.0).unwrap(), 0.0);
        // 0.4 * 0.5 + 0.01 = 0.21
        let expected = 0.21 * 0.21f64.ln();
        assert!((phi(&p, Receiver::Z, 0.5).unwrap() - expected).abs() < 1e-15);
        // value reference: 0.21 ln 0.21 = -0.327736...
        assert!((expected + 0.327_736_027_135_580_4).abs() < 1e-13);
    }

    #[test]
    fn phi_rejects_out_of_domain() {
        let p = params(1.0, 0.0, 1.0, 0.0);
        assert!(phi(&p, Receiver::Y, 1.0 + 1e-13).is_ok());
        assert!(matches!(phi(&p, Receiver::Y, 1.1), Err(Error::Domain(_))));
        assert!(matches!(phi(&p, Receiver::Y, -0.01), Err(Error::Domain(_))));
        assert!(phi(&p, Receiver::Y, f64::NAN).is_err());
    }

    #[test]
    fn capital_phi_examples() {
        let same = params(0.7, 0.3, 0.7, 0.3);
        assert_eq!(capital_phi(&same, 0.42).unwrap(), 0.0);
        assert_eq!(capital_phi(&params(1.0, 0.0, 0.0, 1.0), 1.0).unwrap(), 0.0);
        let p = params(1.0, 0.1, 0.5, 0.2);
        let expected = 0.4 * 0.4f64.ln() - 0.35 * 0.35f64.ln();
        assert!((capital_phi(&p, 0.3).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ChannelParams::new(-1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, f64::INFINITY, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn discretized_counterexample_not_more_capable() {
        let v = classify_ordering(&params(0.4, 0.01, 1.0, 1.0)).unwrap();
        assert!(!v.more_capable_y_over_z);
        assert!(v.witness_y_over_z.is_some());
    }

    #[test]
    fn identical_channels_both_ways() {
        let v = classify_ordering(&params(0.8, 0.2, 0.8, 0.2)).unwrap();
        assert!(v.more_capable_y_over_z && v.more_capable_z_over_y);
        assert!(v.degraded_y_over_z && v.degraded_z_over_y);
    }

    #[test]
    fn generic_degraded_pair() {
        // endpoints: x=0: 1*0.2 >= 0.25*0.1, x=1: 1*0.7 >= 0.25*1.1
        let v = classify_ordering(&params(1.0, 0.1, 0.5, 0.2)).unwrap();
        assert!(v.more_capable_y_over_z);
        assert!(v.degraded_y_over_z);
        assert!(!v.more_capable_z_over_y);
        assert_eq!(v.witness_z_over_y, Some(0.0));
    }

    #[test]
    fn dead_receivers() {
        // y dead, z informative: z dominates
        let v = classify_ordering(&params(0.0, 0.0, 1.0, 0.5)).unwrap();
        assert!(!v.more_capable_y_over_z);
        assert!(v.more_capable_z_over_y);
        // z carries no signal at all
        let v = classify_ordering(&params(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(v.more_capable_y_over_z);
        // both dead
        let v = classify_ordering(&params(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(v.more_capable_y_over_z && v.more_capable_z_over_y);
    }

    /// The two-case closed form as stated for the channel, used as a second
    /// route to the same verdict.
    fn two_case_condition(p: &ChannelParams) -> bool {
        let (ay, ly, az, lz) = (p.a_y, p.lambda_y, p.a_z, p.lambda_z);
        (ay >= az && ay * ay * lz >= az * az * ly)
            || (0.0 < ay && ay < az && ay * ay * (az + lz) >= az * az * (ay + ly))
    }

    proptest! {
        #[test]
        fn phi_is_midpoint_convex(a in 0.0f64..3.0, l in 0.0f64..3.0,
                                   x1 in 0.0f64..1.0, x2 in 0.0f64..1.0) {
            let r = ReceiverParams::new(a, l);
            let mid = r.phi(0.5 * (x1 + x2));
            prop_assert!(mid <= 0.5 * (r.phi(x1) + r.phi(x2)) + 1e-12);
        }

        #[test]
        fn verdict_matches_two_case_condition(ay in 0.01f64..3.0, ly in 0.0f64..3.0,
                                              az in 0.01f64..3.0, lz in 0.0f64..3.0) {
            let p = params(ay, ly, az, lz);
            let v = classify_ordering(&p).unwrap();
            let slack = (ay * ay * lz - az * az * ly).abs()
                .min((ay * ay * (az + lz) - az * az * (ay + ly)).abs());
            prop_assume!(slack > 1e-9);
            prop_assert_eq!(v.more_capable_y_over_z, two_case_condition(&p));
        }

        #[test]
        fn swap_symmetry(ay in 0.0f64..3.0, ly in 0.0f64..3.0,
                         az in 0.0f64..3.0, lz in 0.0f64..3.0) {
            let p = params(ay, ly, az, lz);
            let v = classify_ordering(&p).unwrap();
            let w = classify_ordering(&p.swapped()).unwrap();
            prop_assert_eq!(v.more_capable_y_over_z, w.more_capable_z_over_y);
            prop_assert_eq!(v.more_capable_z_over_y, w.more_capable_y_over_z);
            prop_assert_eq!(v.degraded_y_over_z, w.degraded_z_over_y);
        }

        #[test]
        fn degraded_implies_more_capable(ay in 0.0f64..3.0, ly in 0.0f64..3.0,
                                         az in 0.0f64..3.0, lz in 0.0f64..3.0) {
            let v = classify_ordering(&params(ay, ly, az, lz)).unwrap();
            if v.degraded_y_over_z {
                prop_assert!(v.more_capable_y_over_z);
            }
        }
    }
}
