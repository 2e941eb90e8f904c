//! Browser bindings for the demo page in `www/`.
//!
//! Everything crosses the boundary as JSON strings. The page works in three
//! dimensions so points can be drawn in a triangle, but nothing here assumes
//! that.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use linchoice::bench::Rule;
use linchoice::distortion::{build_feasible_region, empirical_distortion, instance_distortion_lottery, DEFAULT_EPSILON};
use linchoice::instances::{generate, Family, GeneratorSpec};
use linchoice::model::utilities_to_profile;
use linchoice::projection::uproj_default;
use linchoice::{CandidateSet, Instance, UtilityProfile, VoterSet};

/// Rules shown on the page. The committee rules are left out: with a handful
/// of candidates their committees cover nearly everything.
const RULES: [Rule; 7] = [
    Rule::Plurality,
    Rule::Mcp,
    Rule::Rd,
    Rule::Harmonic,
    Rule::Uproj,
    Rule::OptimalDet,
    Rule::OptimalRand,
];

#[derive(Deserialize)]
struct Points {
    candidates: Vec<Vec<f64>>,
    voters: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct RuleResult {
    rule: &'static str,
    lottery: Vec<f64>,
    /// Lottery mean in embedding space.
    point: Vec<f64>,
    /// Worst case over every utility profile consistent with the rankings.
    instance_distortion: Option<f64>,
    /// Average voter attaining it.
    witness: Vec<f64>,
    /// Under the voters as placed.
    empirical_distortion: Option<f64>,
}

#[derive(Serialize)]
struct Analysis {
    rankings: Vec<Vec<usize>>,
    results: Vec<RuleResult>,
}

#[derive(Serialize)]
struct Projection {
    lottery: Vec<f64>,
    point: Vec<f64>,
    kl: f64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Rankings induced by the voters' positions, then every rule's lottery with
/// its instance and empirical distortion.
pub fn analyze_json(input: &str) -> Result<String, String> {
    let points: Points = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let candidates = CandidateSet::renormalized(points.candidates).map_err(|e| e.to_string())?;
    let voters = VoterSet::new(points.voters).map_err(|e| e.to_string())?;
    let utilities = UtilityProfile::from_embeddings(&voters, &candidates).map_err(|e| e.to_string())?;
    let profile = utilities_to_profile(&utilities);
    let region = build_feasible_region(&profile, &candidates, false).map_err(|e| e.to_string())?;
    let instance = Instance {
        candidates,
        voters: Some(voters),
        profile,
        utilities: Some(utilities),
        seed: None,
    };
    let utilities = instance.utilities.as_ref().expect("set above");

    let mut results = Vec::new();
    for rule in RULES {
        let (lottery, report) = rule.apply(&instance, &region).map_err(|e| format!("{rule}: {e}"))?;
        let report = match report {
            Some(r) => r,
            None => instance_distortion_lottery(&lottery, &region, DEFAULT_EPSILON).map_err(|e| format!("{rule}: {e}"))?,
        };
        let empirical = empirical_distortion(&lottery, utilities).map_err(|e| e.to_string())?;
        results.push(RuleResult {
            rule: rule.name(),
            point: instance.candidates.combine(lottery.probabilities()),
            lottery: lottery.probabilities().to_vec(),
            instance_distortion: finite(report.value),
            witness: report.witness,
            empirical_distortion: finite(empirical),
        });
    }
    let rankings = instance
        .profile
        .rankings()
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(<[usize]>::to_vec)
        .collect();
    serde_json::to_string(&Analysis { rankings, results }).map_err(|e| e.to_string())
}

/// The uniform projection of `candidates` (a JSON array of rows).
pub fn project_json(candidates: &str) -> Result<String, String> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(candidates).map_err(|e| e.to_string())?;
    let c = CandidateSet::renormalized(rows).map_err(|e| e.to_string())?;
    let r = uproj_default(&c).map_err(|e| e.to_string())?;
    serde_json::to_string(&Projection {
        lottery: r.lottery.probabilities().to_vec(),
        point: r.point,
        kl: r.kl_value,
    })
    .map_err(|e| e.to_string())
}

/// A random instance in the `{candidates, voters}` shape [`analyze_json`] reads.
pub fn random_points_json(n: usize, m: usize, d: usize, seed: u64) -> Result<String, String> {
    let inst = generate(&GeneratorSpec::new(Family::Random, n, m, d, seed)).map_err(|e| e.to_string())?;
    let voters = inst.voters.expect("random instances carry voters");
    serde_json::to_string(&serde_json::json!({
        "candidates": inst.candidates.vectors(),
        "voters": voters.vectors(),
    }))
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn analyze(input: &str) -> Result<String, JsError> {
    analyze_json(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn project(candidates: &str) -> Result<String, JsError> {
    project_json(candidates).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn random_points(n: usize, m: usize, seed: u32) -> Result<String, JsError> {
    random_points_json(n, m, 3, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn symmetric_pair() {
        let out = analyze_json(r#"{"candidates":[[1,0],[0,1]],"voters":[[1,0],[0,1]]}"#).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        let rand = v["results"].as_array().unwrap().iter().find(|r| r["rule"] == "optimal-rand").unwrap();
        assert!((rand["instance_distortion"].as_f64().unwrap() - 1.5).abs() < 1e-6);
        assert_eq!(v["rankings"], serde_json::json!([[0, 1], [1, 0]]));
    }

    #[test]
    fn projection_of_basis_is_center() {
        let out = project_json("[[1,0,0],[0,1,0],[0,0,1]]").unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        for x in v["point"].as_array().unwrap() {
            assert!((x.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_points_round_trip() {
        let pts = random_points_json(5, 4, 3, 7).unwrap();
        let out = analyze_json(&pts).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["results"].as_array().unwrap().len(), RULES.len());
        assert!(analyze_json("{}").is_err());
    }
}
