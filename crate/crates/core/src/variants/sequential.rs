//! Buying one district at a time with the weak four-price menu.
//!
//! Round `r` runs the one-shot mechanism with a target of one district on
//! the districts not yet bought. The binding round is the last, which has
//! `k - q + 1` districts left, so `delta >= V / (k - q + 1) + 2 eps`
//! covers every round.

use itertools::Itertools;
use rand::Rng;

use crate::equilibrium::{enumerate_equilibria, EquilibriumReport, ScanOptions};
use crate::error::{Error, Result};
use crate::mechanism::{execute, minimal_sequential_delta, CountProfile, Outcome};
use crate::model::{ensure_valid, MenuVariant, Scenario};
use crate::rational::{int, Rational};

fn check_preconditions(s: &Scenario) -> Result<()> {
    ensure_valid(s)?;
    if s.menu != MenuVariant::Weak4 {
        return Err(Error::UnsupportedMenu {
            operation: "sequential menu",
            menu: s.menu.to_string(),
        });
    }
    let required = minimal_sequential_delta(s);
    if s.delta < required {
        return Err(Error::DeltaBelowThreshold {
            required,
            actual: s.delta,
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SequentialState<'a> {
    scenario: &'a Scenario,
    remaining: Vec<usize>,
    purchased: Vec<Outcome>,
}

impl<'a> SequentialState<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        check_preconditions(scenario)?;
        Ok(SequentialState {
            scenario,
            remaining: (0..scenario.district_count()).collect(),
            purchased: Vec::new(),
        })
    }

    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    /// 1-based index of the next round to run.
    pub fn round(&self) -> usize {
        self.purchased.len() + 1
    }

    pub fn purchased(&self) -> &[Outcome] {
        &self.purchased
    }

    pub fn is_finished(&self) -> bool {
        self.purchased.len() >= self.scenario.target
    }

    /// Runs the next round under the target profile and drops the bought district.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<&Outcome> {
        assert!(!self.is_finished(), "all rounds already run");
        let residual = self.scenario.restricted_to(&self.remaining, 1);
        let outcome = execute(&residual, &CountProfile::sigma_star(&residual), rng)?
            .remapped(&self.remaining, self.scenario.district_count());
        self.remaining.retain(|k| !outcome.selected.contains(k));
        self.purchased.push(outcome);
        Ok(self.purchased.last().expect("just pushed"))
    }

    pub fn into_outcomes(self) -> Vec<Outcome> {
        self.purchased
    }
}

/// All `q` rounds; outcomes carry the original district indices.
pub fn run_sequential<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<Vec<Outcome>> {
    let mut state = SequentialState::new(s)?;
    while !state.is_finished() {
        state.step(rng)?;
    }
    Ok(state.into_outcomes())
}

pub fn total_expenditure(rounds: &[Outcome]) -> Rational {
    rounds.iter().map(|o| o.expenditure).fold(int(0), |a, b| a + b)
}

/// Equilibrium scan of one reachable round.
#[derive(Debug, Clone)]
pub struct RoundCheck {
    pub round: usize,
    pub remaining: Vec<usize>,
    pub report: EquilibriumReport,
}

#[derive(Debug, Clone)]
pub struct SubgamePerfectReport {
    pub checks: Vec<RoundCheck>,
    pub holds: bool,
}

/// Backward induction over rounds: every reachable set of remaining
/// districts must have the target profile as its only equilibrium.
///
/// Under the target profile every district can be bought in any round, so
/// round `r` is reachable with any `k - r + 1` of the districts left.
pub fn verify_subgame_perfect(s: &Scenario, opts: &ScanOptions) -> Result<SubgamePerfectReport> {
    check_preconditions(s)?;
    let k = s.district_count();
    let mut checks = Vec::new();
    for round in (1..=s.target).rev() {
        for remaining in (0..k).combinations(k - round + 1) {
            let residual = s.restricted_to(&remaining, 1);
            let report = enumerate_equilibria(&residual, opts)?;
            checks.push(RoundCheck {
                round,
                remaining,
                report,
            });
        }
    }
    Ok(SubgamePerfectReport {
        holds: checks.iter().all(|c| c.report.sigma_star_unique),
        checks,
    })
}
