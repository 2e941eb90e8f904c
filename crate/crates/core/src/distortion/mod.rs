//! Instance distortion and the instance-optimal rules.
//!
//! The instance distortion of a chosen point `ĉ` (a candidate, or the mean
//! candidate of a lottery) is `sup_{v̄ ∈ ℱ} max_c ⟨c, v̄⟩ / ⟨ĉ, v̄⟩`, where ℱ is
//! the region of average voters consistent with the profile. It is reported
//! through `β = 1 / distortion ∈ [0, 1]`, with `β = 0` meaning unbounded.

mod optimal;
mod oracle;
mod region;

pub use optimal::{optimal_deterministic, optimal_deterministic_in, optimal_randomized, optimal_randomized_in};
pub use oracle::{
    instance_distortion_candidate, instance_distortion_lottery, instance_distortion_point, pair_beta,
    pair_beta_point, separation_cuts, separation_oracle, BetaSearch,
};
pub use region::{build_feasible_region, FeasibleRegion, Minimizer};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Lottery, UtilityProfile};

/// Default absolute precision on β.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// A linear minimum below this is a violated cut.
pub const VIOLATION_TOL: f64 = 1e-9;
/// Column generation gives up after this many master solves.
pub const MAX_ITERATIONS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// `1 / beta`; serialized as `"inf"` when unbounded.
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub value: f64,
    pub beta: f64,
    /// Average voter attaining the worst ratio.
    pub witness: Vec<f64>,
    /// β against each challenger.
    pub per_challenger_betas: Vec<f64>,
    /// LP minimizations (evaluation) or master iterations (optimal rules).
    pub iterations: usize,
    pub epsilon: f64,
}

impl DistortionReport {
    pub fn is_unbounded(&self) -> bool {
        self.value.is_infinite()
    }
}

pub(crate) fn value_from_beta(beta: f64) -> f64 {
    if beta > 0.0 {
        1.0 / beta
    } else {
        f64::INFINITY
    }
}

fn ser_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_infinite() && *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Extended {
        Num(f64),
        Str(String),
    }
    match Extended::deserialize(d)? {
        Extended::Num(x) => Ok(x),
        Extended::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Extended::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
    }
}

/// Best welfare over expected welfare under the true utilities; `+∞` when the
/// lottery's expected welfare is zero.
pub fn empirical_distortion(lottery: &Lottery, utilities: &UtilityProfile) -> Result<f64> {
    let m = utilities.num_candidates();
    if lottery.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: lottery.len(),
        });
    }
    let welfares = utilities.welfares();
    let best = welfares.iter().copied().fold(0.0, f64::max);
    let expected: f64 = welfares.iter().zip(lottery.probabilities()).map(|(w, p)| w * p).sum();
    if expected <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(best / expected)
}
