//! Single-pool mechanism for an adversary with strong commitment power.
//!
//! Everyone applies for `s1` or `s2`. If more than `n^R` citizens apply for
//! `s1`, every `s1` applicant is offered 0; otherwise `l` of them, drawn
//! uniformly, are offered `V + eps`. Slot `s2` applicants are always offered
//! `eps`. Non-winning `s1` applicants get no offer.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::equilibrium::{scan_indices, EquilibriumReport, ScanOptions};
use crate::error::{Error, Result};
use crate::mechanism::{realized_value, sell_decision, Action, ActionCount, CountProfile, VoterType};
use crate::model::{MenuVariant, Scenario};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitmentGameSpec {
    /// `n^R`, total number of real voters.
    pub total_real: u32,
    /// `l`, real ballots the adversary wants.
    pub purchase_target: u32,
    pub value: Rational,
    pub epsilon: Rational,
}

impl CommitmentGameSpec {
    pub fn new(total_real: u32, purchase_target: u32, value: Rational, epsilon: Rational) -> Result<Self> {
        if purchase_target < 1 || purchase_target > total_real {
            return Err(Error::Commitment(format!(
                "purchase target l = {purchase_target} must lie in 1..={total_real}"
            )));
        }
        if value <= int(0) || epsilon <= int(0) {
            return Err(Error::Commitment("V and epsilon must be positive".into()));
        }
        Ok(CommitmentGameSpec {
            total_real,
            purchase_target,
            value,
            epsilon,
        })
    }

    /// Pools every district of a `simple-commitment` scenario.
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        match s.menu {
            MenuVariant::SimpleCommitment(l) => Self::new(s.total_real(), l, s.value, s.epsilon),
            other => Err(Error::UnsupportedMenu {
                operation: "commitment mechanism",
                menu: other.to_string(),
            }),
        }
    }

    fn winner_price(&self) -> Rational {
        self.value + self.epsilon
    }

    fn oversubscribed(&self, s1_applicants: u32) -> bool {
        s1_applicants > self.total_real
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitmentOutcome {
    /// More than `n^R` applied for `s1`, so every `s1` offer is 0.
    pub oversubscribed: bool,
    pub winners_real: u32,
    pub winners_decoy: u32,
    /// Offer to drawn `s1` applicants (`V + eps`), or 0 when oversubscribed.
    pub s1_offer: Rational,
    pub s2_offer: Rational,
    pub expenditure: Rational,
    pub acquired_real_ballots: u32,
}

fn check_applicants(g: &CommitmentGameSpec, applicants: &ActionCount) -> Result<()> {
    if applicants.real_abstain > 0 || applicants.decoy_abstain > 0 {
        return Err(Error::Commitment("every citizen applies for one of the two slots".into()));
    }
    if applicants.of_type(VoterType::Real) != g.total_real {
        return Err(Error::Commitment(format!(
            "applicants include {} real voters, expected n^R = {}",
            applicants.of_type(VoterType::Real),
            g.total_real
        )));
    }
    Ok(())
}

pub fn run_commitment_mechanism<R: Rng + ?Sized>(
    g: &CommitmentGameSpec,
    applicants: &ActionCount,
    rng: &mut R,
) -> Result<CommitmentOutcome> {
    check_applicants(g, applicants)?;
    let s2_offer = g.epsilon;
    let s1_count = applicants.s1_applicants();
    let oversubscribed = g.oversubscribed(s1_count);
    let (s1_offer, winners_real, winners_decoy) = if oversubscribed {
        (int(0), 0, 0)
    } else {
        let mut pool: Vec<VoterType> = std::iter::repeat_n(VoterType::Real, applicants.real_s1 as usize)
            .chain(std::iter::repeat_n(VoterType::Decoy, applicants.decoy_s1 as usize))
            .collect();
        let draws = (g.purchase_target as usize).min(pool.len());
        let (chosen, _) = pool.partial_shuffle(rng, draws);
        let real = chosen.iter().filter(|&&t| t == VoterType::Real).count() as u32;
        (g.winner_price(), real, draws as u32 - real)
    };
    let mut expenditure = int(0);
    let mut acquired = 0;
    let sales = [
        (VoterType::Real, s1_offer, winners_real),
        (VoterType::Decoy, s1_offer, winners_decoy),
        (VoterType::Real, s2_offer, applicants.real_s2),
        (VoterType::Decoy, s2_offer, applicants.decoy_s2),
    ];
    for (voter_type, price, count) in sales {
        if count > 0 && sell_decision(voter_type, &price, &g.value) {
            expenditure += price * int(count.into());
            if voter_type == VoterType::Real {
                acquired += count;
            }
        }
    }
    Ok(CommitmentOutcome {
        oversubscribed,
        winners_real,
        winners_decoy,
        s1_offer,
        s2_offer,
        expenditure,
        acquired_real_ballots: acquired,
    })
}

/// Expected payoff of a voter of `voter_type` playing `action` in `counts`
/// (which already includes that voter).
pub fn commitment_payoff(g: &CommitmentGameSpec, counts: &ActionCount, voter_type: VoterType, action: Action) -> Rational {
    match action {
        Action::Abstain => voter_type.valuation(&g.value),
        Action::S2 => realized_value(voter_type, &g.epsilon, &g.value),
        Action::S1 => {
            let applicants = counts.s1_applicants().max(1);
            if g.oversubscribed(applicants) {
                return realized_value(voter_type, &int(0), &g.value);
            }
            let win = Rational::new(g.purchase_target.min(applicants).into(), applicants.into());
            win * realized_value(voter_type, &g.winner_price(), &g.value)
                + (int(1) - win) * voter_type.valuation(&g.value)
        }
    }
}

fn is_commitment_nash(g: &CommitmentGameSpec, counts: &ActionCount, filter_dominated: bool) -> bool {
    if filter_dominated && counts.real_s2 > 0 {
        return false;
    }
    for voter_type in VoterType::ALL {
        for action in Action::SLOTS {
            if counts.get(voter_type, action) == 0 {
                continue;
            }
            let other = if action == Action::S1 { Action::S2 } else { Action::S1 };
            let current = commitment_payoff(g, counts, voter_type, action);
            let mut moved = *counts;
            *moved.get_mut(voter_type, action) -= 1;
            *moved.get_mut(voter_type, other) += 1;
            if commitment_payoff(g, &moved, voter_type, other) > current {
                return false;
            }
        }
    }
    true
}

/// Scans every (real `s1`, decoy `s1`) split for pure equilibria. With
/// `filter_dominated`, real voters outside `s1` rule a profile out.
pub fn verify_commitment_equilibrium(g: &CommitmentGameSpec, n_decoy: u32, opts: &ScanOptions) -> Result<EquilibriumReport> {
    let real_options = u128::from(g.total_real) + 1;
    let size = real_options * (u128::from(n_decoy) + 1);
    if size > opts.scan_cap {
        return Err(Error::ScanCapExceeded {
            required: size,
            cap: opts.scan_cap,
        });
    }
    let profile = |real_s1: u32, decoy_s1: u32| ActionCount {
        real_s1,
        real_s2: g.total_real - real_s1,
        decoy_s1,
        decoy_s2: n_decoy - decoy_s1,
        ..ActionCount::default()
    };
    let equilibria = scan_indices(size, opts.workers, |i| {
        let counts = profile((i / (u128::from(n_decoy) + 1)) as u32, (i % (u128::from(n_decoy) + 1)) as u32);
        is_commitment_nash(g, &counts, opts.filter_dominated).then(|| CountProfile {
            per_district: vec![counts],
        })
    });
    let sigma_star = CountProfile {
        per_district: vec![profile(g.total_real, 0)],
    };
    Ok(EquilibriumReport::from_equilibria(
        equilibria,
        &sigma_star,
        opts.filter_dominated,
        size,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n_real: u32, l: u32) -> CommitmentGameSpec {
        CommitmentGameSpec::new(n_real, l, int(100), int(1)).unwrap()
    }

    fn applicants(real_s1: u32, real_s2: u32, decoy_s1: u32, decoy_s2: u32) -> ActionCount {
        ActionCount {
            real_s1,
            real_s2,
            decoy_s1,
            decoy_s2,
            ..ActionCount::default()
        }
    }

    #[test]
    fn buys_l_real_ballots() {
        let g = spec(3, 2);
        let out = run_commitment_mechanism(&g, &applicants(3, 0, 0, 4), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(!out.oversubscribed);
        assert_eq!(out.acquired_real_ballots, 2);
        assert_eq!(out.expenditure, int(2 * 101 + 4));
    }

    #[test]
    fn one_extra_s1_applicant_voids_purchase() {
        let g = spec(3, 2);
        let out = run_commitment_mechanism(&g, &applicants(3, 0, 1, 3), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(out.oversubscribed);
        assert_eq!(out.acquired_real_ballots, 0);
        assert_eq!(out.s1_offer, int(0));
        assert_eq!(out.expenditure, int(3));
    }

    #[test]
    fn target_must_be_positive_and_bounded() {
        assert!(CommitmentGameSpec::new(3, 0, int(100), int(1)).is_err());
        assert!(CommitmentGameSpec::new(3, 4, int(100), int(1)).is_err());
    }

    #[test]
    fn rejects_abstainers_and_wrong_real_count() {
        let g = spec(3, 1);
        let mut a = applicants(3, 0, 0, 1);
        a.decoy_abstain = 1;
        assert!(run_commitment_mechanism(&g, &a, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(run_commitment_mechanism(&g, &applicants(2, 0, 0, 1), &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn unique_equilibrium_small() {
        let g = spec(3, 1);
        let report = verify_commitment_equilibrium(&g, 3, &ScanOptions::default()).unwrap();
        assert_eq!(report.profiles_scanned, 16);
        assert!(report.sigma_star_unique, "{:?}", report.equilibria);
    }

    #[test]
    fn decoy_joining_s1_is_not_an_equilibrium() {
        let g = spec(3, 1);
        let counts = applicants(3, 0, 1, 2);
        assert_eq!(commitment_payoff(&g, &counts, VoterType::Decoy, Action::S1), int(0));
        assert!(!is_commitment_nash(&g, &counts, true));
        // staying in s2 instead
        assert_eq!(commitment_payoff(&g, &applicants(3, 0, 0, 3), VoterType::Decoy, Action::S2), int(1));
    }

    #[test]
    fn real_payoff_with_lottery() {
        let g = spec(3, 1);
        // 1/3 chance of V + eps, otherwise keep V
        assert_eq!(
            commitment_payoff(&g, &applicants(3, 0, 0, 0), VoterType::Real, Action::S1),
            Rational::new(301, 3)
        );
    }
}
