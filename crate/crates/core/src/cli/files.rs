//! Scenario and profile files (TOML).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::CountProfile;
use crate::model::{brute_force_cost, ensure_valid, DistrictSpec, MenuVariant, Scenario};
use crate::rational::{serde_rational, Rational};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(rename = "V", with = "serde_rational")]
    value: Rational,
    #[serde(with = "serde_rational")]
    epsilon: Rational,
    #[serde(with = "serde_rational")]
    delta: Rational,
    q: usize,
    menu: MenuVariant,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    budget: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    districts: Vec<DistrictSpec>,
}

/// Parses and validates a scenario. A missing `budget` defaults to the
/// brute-force cost, a missing `seed` to 0.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::ScenarioFile {
        path: "<input>".into(),
        message: e.to_string(),
    })?;
    let mut s = Scenario {
        districts: file.districts,
        value: file.value,
        epsilon: file.epsilon,
        delta: file.delta,
        target: file.q,
        budget: Rational::from_integer(0),
        menu: file.menu,
        seed: file.seed.unwrap_or(0),
    };
    s.budget = file.budget.unwrap_or_else(|| brute_force_cost(&s));
    ensure_valid(&s)?;
    Ok(s)
}

pub fn parse_scenario_file(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::ScenarioFile {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text).map_err(|e| match e {
        Error::ScenarioFile { message, .. } => Error::ScenarioFile {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

/// The scenario in file syntax, seed and budget included.
pub fn scenario_echo(s: &Scenario) -> String {
    let file = ScenarioFile {
        value: s.value,
        epsilon: s.epsilon,
        delta: s.delta,
        q: s.target,
        menu: s.menu,
        budget: Some(s.budget),
        seed: Some(s.seed),
        districts: s.districts.clone(),
    };
    toml::to_string(&file).expect("scenario serializes")
}

/// Reads a `[[districts]]` profile and checks it against `s`.
pub fn parse_profile_file(path: &Path, s: &Scenario) -> Result<CountProfile> {
    let context = |message: String| Error::ScenarioFile {
        path: path.display().to_string(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| context(e.to_string()))?;
    let p: CountProfile = toml::from_str(&text).map_err(|e| context(e.to_string()))?;
    p.check(s)?;
    Ok(p)
}
