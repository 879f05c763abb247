use crate::mechanism::VoterType;
use crate::model::Violation;
use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not a rational number: {0:?} (expected \"p/q\" or an integer)")]
    BadRational(String),

    #[error("scenario is invalid:\n{}", format_violations(.0))]
    InvalidScenario(Vec<Violation>),

    #[error("profile has {got} districts but the scenario has {expected}")]
    ProfileLength { expected: usize, got: usize },

    #[error("district {district}: {voter_type:?} actions sum to {got}, expected {expected}")]
    ProfileCounts {
        district: usize,
        voter_type: VoterType,
        expected: u32,
        got: u32,
    },

    #[error("district index {district} out of range for {districts} districts")]
    DistrictOutOfRange { district: usize, districts: usize },

    #[error("no {voter_type:?} voter of district {district} plays the requested action")]
    EmptyClass {
        district: usize,
        voter_type: VoterType,
    },

    #[error("operation `{operation}` does not support menu {menu}")]
    UnsupportedMenu {
        operation: &'static str,
        menu: String,
    },

    #[error("profile scan needs {required} profiles, above the cap of {cap}; raise the cap to at least {required}")]
    ScanCapExceeded { required: u128, cap: u128 },

    #[error("delta = {actual} is below the required minimum {required}")]
    DeltaBelowThreshold { required: Rational, actual: Rational },

    #[error("{0}")]
    Commitment(String),

    #[error("{path}: {message}")]
    ScenarioFile { path: String, message: String },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
