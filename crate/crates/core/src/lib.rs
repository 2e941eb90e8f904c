//! Voting rules and distortion analysis for linear social choice.
//!
//! Voters and candidates are points of the probability simplex Δ_d and a
//! voter's utility for a candidate is their inner product. Rules only observe
//! the ordinal profile; this crate measures how much welfare that costs.
//!
//! - [`model`]: domain types and welfare arithmetic
//! - [`lp`]: the dense simplex used by everything below
//! - [`rules`]: plurality, maximum coordinate plurality, randomized scoring rules
//! - [`projection`]: the uniform projection lottery (KL projection of the simplex center)
//! - [`stable`]: stable committee lotteries and the rules built on them
//! - [`distortion`]: instance distortion and instance-optimal rules
//! - [`instances`]: random and adversarial instance generators, ratings ingestion
//! - [`io`]: CSV / JSONL file formats
//! - [`bench`]: the experiment grid runner

pub mod bench;
pub mod distortion;
pub mod error;
pub mod instances;
pub mod io;
pub mod lp;
pub mod model;
pub mod projection;
pub mod rules;
pub mod stable;

pub use error::{Error, Result};
pub use model::{CandidateSet, Instance, Lottery, Preference, Profile, UtilityProfile, VoterSet};
