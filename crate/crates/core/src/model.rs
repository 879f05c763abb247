//! Citizens, districts and the scenario every mechanism runs on.
//!
//! A scenario fixes the (real, decoy) ballot counts of each district, the
//! real voters' valuation `V`, the price increments `epsilon` and `delta`,
//! the number `q` of districts the adversary wants to buy, the budget, the
//! price menu in use, and the seed for the fair randomization.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::rational::{int, Rational};

/// Ballot counts of one district.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistrictSpec {
    pub real: u32,
    pub decoy: u32,
}

impl DistrictSpec {
    pub const fn new(real: u32, decoy: u32) -> Self {
        Self { real, decoy }
    }

    pub fn total(&self) -> u32 {
        self.real + self.decoy
    }
}

/// Which price table the adversary announces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MenuVariant {
    /// Four prices: `V+eps`, `delta` when selected; `eps`, `2eps` otherwise.
    Weak4,
    /// Four prices with `delta` pinned to `2eps` (three distinct values).
    Strong4,
    /// Six prices: slot-2 applicants of a selected district are paid
    /// `V-eps` when the selection was certain and `delta` when it came out
    /// of the tie lottery.
    Strong6,
    /// Single-pool mechanism with strong commitment, buying `l` real ballots.
    SimpleCommitment(u32),
}

impl fmt::Display for MenuVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MenuVariant::Weak4 => f.write_str("weak4"),
            MenuVariant::Strong4 => f.write_str("strong4"),
            MenuVariant::Strong6 => f.write_str("strong6"),
            MenuVariant::SimpleCommitment(l) => write!(f, "simple-commitment({l})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub districts: Vec<DistrictSpec>,
    /// Valuation `V` of a real ballot.
    pub value: Rational,
    pub epsilon: Rational,
    pub delta: Rational,
    /// Number `q` of districts whose real ballots the adversary wants.
    pub target: usize,
    pub budget: Rational,
    pub menu: MenuVariant,
    pub seed: u64,
}

impl Scenario {
    /// Scenario with the default instantiation `V = 100`, `eps = 1`, a budget
    /// that covers the brute-force attack, and seed 0.
    pub fn with_defaults(districts: Vec<DistrictSpec>, target: usize, delta: Rational, menu: MenuVariant) -> Self {
        let mut s = Scenario {
            districts,
            value: int(100),
            epsilon: int(1),
            delta,
            target,
            budget: int(0),
            menu,
            seed: 0,
        };
        s.budget = brute_force_cost(&s);
        s
    }

    pub fn district_count(&self) -> usize {
        self.districts.len()
    }

    pub fn total_real(&self) -> u32 {
        self.districts.iter().map(|d| d.real).sum()
    }

    pub fn total_decoy(&self) -> u32 {
        self.districts.iter().map(|d| d.decoy).sum()
    }

    /// Copy of `self` restricted to the given district indices, in that order.
    pub fn restricted_to(&self, indices: &[usize], target: usize) -> Scenario {
        Scenario {
            districts: indices.iter().map(|&k| self.districts[k]).collect(),
            target,
            ..self.clone()
        }
    }
}

/// One broken scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("at least two districts are required, got {0}")]
    TooFewDistricts(usize),
    #[error("district {0} has no real voters; its s1 ratio is undefined")]
    NoRealVoters(usize),
    #[error("district {0} must hold at least two ballots")]
    DistrictTooSmall(usize),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("budget must be nonnegative")]
    NegativeBudget,
    #[error("target q = {target} must lie in 1..={districts}")]
    TargetOutOfRange { target: usize, districts: usize },
    #[error("weak4 requires 2*epsilon < delta <= V - epsilon, got delta = {delta} with epsilon = {epsilon}, V = {value}")]
    Weak4DeltaRange {
        delta: Rational,
        epsilon: Rational,
        value: Rational,
    },
    #[error("strong6 requires delta > 2*epsilon, got delta = {delta} with epsilon = {epsilon}")]
    Strong6DeltaRange { delta: Rational, epsilon: Rational },
    #[error("commitment target l = {target} must lie in 1..={total_real}")]
    CommitmentTarget { target: u32, total_real: u32 },
}

/// Every violated invariant of `s`; empty means valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let k = s.district_count();
    if k < 2 {
        out.push(Violation::TooFewDistricts(k));
    }
    for (i, d) in s.districts.iter().enumerate() {
        if d.real == 0 {
            out.push(Violation::NoRealVoters(i));
        }
        if d.total() < 2 {
            out.push(Violation::DistrictTooSmall(i));
        }
    }
    let zero = int(0);
    for (name, v) in [("V", &s.value), ("epsilon", &s.epsilon), ("delta", &s.delta)] {
        if *v <= zero {
            out.push(Violation::NotPositive(name));
        }
    }
    if s.budget < zero {
        out.push(Violation::NegativeBudget);
    }
    if s.target < 1 || s.target > k {
        out.push(Violation::TargetOutOfRange {
            target: s.target,
            districts: k,
        });
    }
    let two_eps = s.epsilon * int(2);
    match s.menu {
        MenuVariant::Weak4 => {
            if !(two_eps < s.delta && s.delta <= s.value - s.epsilon) {
                out.push(Violation::Weak4DeltaRange {
                    delta: s.delta,
                    epsilon: s.epsilon,
                    value: s.value,
                });
            }
        }
        MenuVariant::Strong6 => {
            if s.delta <= two_eps {
                out.push(Violation::Strong6DeltaRange {
                    delta: s.delta,
                    epsilon: s.epsilon,
                });
            }
        }
        MenuVariant::Strong4 => {}
        MenuVariant::SimpleCommitment(l) => {
            let total_real = s.total_real();
            if l < 1 || l > total_real {
                out.push(Violation::CommitmentTarget { target: l, total_real });
            }
        }
    }
    out
}

/// Non-fatal remarks about a valid scenario.
pub fn scenario_warnings(s: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    if s.target == s.district_count() && s.target > 0 {
        out.push(format!(
            "q = {} equals the number of districts: equilibrium results still hold but there is no saving over buying every ballot",
            s.target
        ));
    }
    out
}

/// `Ok(())` or the full list of violations.
pub fn ensure_valid(s: &Scenario) -> crate::Result<()> {
    let v = validate_scenario(s);
    if v.is_empty() {
        Ok(())
    } else {
        Err(crate::Error::InvalidScenario(v))
    }
}

/// Cost of buying every ballot of the `q` largest districts at `V + eps`.
pub fn brute_force_cost(s: &Scenario) -> Rational {
    let largest: u32 = s
        .districts
        .iter()
        .map(DistrictSpec::total)
        .sorted_unstable_by(|a, b| b.cmp(a))
        .take(s.target)
        .sum();
    (s.value + s.epsilon) * int(largest.into())
}

/// Whether the budget covers the brute-force attack on any `q` districts.
pub fn validate_budget(s: &Scenario) -> bool {
    s.budget >= brute_force_cost(s)
}
