//! Generated scenario families for claim verification.

use clap::ValueEnum;
use itertools::Itertools;

use crate::error::Result;
use crate::mechanism::{minimal_delta, minimal_sequential_delta};
use crate::model::{DistrictSpec, MenuVariant, Scenario};
use crate::rational::int;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Two or three districts with one or two voters of each type.
    Small,
    /// Two to four districts with one to three voters of each type
    /// (two or three districts with one or two voters for `prop1`).
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Claim {
    /// Weak four-price menu at its minimal delta: the target profile is the
    /// unique filtered equilibrium.
    Thm1,
    /// Six-price menu with delta = 3 eps: same uniqueness.
    Thm2,
    /// Three-price menu: the target profile is an equilibrium.
    Prop2,
    /// Weak menu: one decoy in slot 1 keeps spending within the budget bound.
    Cor1,
    /// Sequential weak menu: the target profile is subgame perfect.
    Prop1,
}

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::Thm1 => "thm1",
            Claim::Thm2 => "thm2",
            Claim::Prop2 => "prop2",
            Claim::Cor1 => "cor1",
            Claim::Prop1 => "prop1",
        }
    }

    /// Menu the claim is stated for.
    pub fn menu(self) -> MenuVariant {
        match self {
            Claim::Thm2 => MenuVariant::Strong6,
            Claim::Prop2 => MenuVariant::Strong4,
            Claim::Thm1 | Claim::Cor1 | Claim::Prop1 => MenuVariant::Weak4,
        }
    }

    /// Instance of the claim on `districts` and `q`, with V = 100, eps = 1
    /// and the claim's delta.
    pub fn instance(self, districts: Vec<DistrictSpec>, q: usize) -> Result<Scenario> {
        let mut s = Scenario::with_defaults(districts, q, int(0), self.menu());
        s.delta = match self {
            Claim::Thm1 | Claim::Cor1 => minimal_delta(&s)?,
            Claim::Prop1 => minimal_sequential_delta(&s),
            Claim::Thm2 => s.epsilon * int(3),
            Claim::Prop2 => s.epsilon * int(2),
        };
        Ok(s)
    }

    pub fn family(self, family: Family) -> Result<Vec<Scenario>> {
        let (districts, voters) = match (self, family) {
            (Claim::Prop1, Family::Small) => (2..=2, 1..=2),
            (Claim::Prop1, Family::Full) | (_, Family::Small) => (2..=3, 1..=2),
            (_, Family::Full) => (2..=4, 1..=3),
        };
        let mut out = Vec::new();
        for tuple in district_multisets(districts, voters) {
            for q in 1..tuple.len() {
                out.push(self.instance(tuple.clone(), q)?);
            }
        }
        Ok(out)
    }
}

/// Every multiset of districts (as a nondecreasing tuple) with a district
/// count in `districts` and per-type voter counts in `voters`.
pub fn district_multisets(
    districts: std::ops::RangeInclusive<usize>,
    voters: std::ops::RangeInclusive<u32>,
) -> Vec<Vec<DistrictSpec>> {
    let kinds: Vec<DistrictSpec> = voters
        .clone()
        .cartesian_product(voters)
        .map(|(r, d)| DistrictSpec::new(r, d))
        .collect();
    districts
        .flat_map(|k| kinds.iter().copied().combinations_with_replacement(k))
        .collect()
}
