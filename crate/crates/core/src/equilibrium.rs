//! Exact expected payoffs, unilateral deviations and pure Nash equilibria
//! of the game a district-based price menu induces.
//!
//! Payoffs average over the fair tie lottery analytically, so every check
//! is an exact rational comparison. Profiles are scanned in their
//! symmetry-reduced form: a district's state is how many of its real and
//! decoy voters picked each action.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanism::{
    budget_bound, classify_counts, expected_expenditure, realized_value, Action, ActionCount, Classification,
    CountProfile, PriceTable, VoterType,
};
use crate::model::{ensure_valid, Scenario};
use crate::rational::{int, Rational};

/// Representative voter: one member of a (district, type, action) class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VoterClass {
    pub district: usize,
    pub voter_type: VoterType,
    pub action: Action,
}

impl VoterClass {
    pub fn new(district: usize, voter_type: VoterType, action: Action) -> Self {
        Self {
            district,
            voter_type,
            action,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub equilibria: Vec<CountProfile>,
    pub sigma_star_present: bool,
    pub sigma_star_unique: bool,
    pub dominance_filtered: bool,
    pub profiles_scanned: u128,
}

impl EquilibriumReport {
    pub(crate) fn from_equilibria(
        equilibria: Vec<CountProfile>,
        sigma_star: &CountProfile,
        dominance_filtered: bool,
        profiles_scanned: u128,
    ) -> Self {
        let sigma_star_present = equilibria.contains(sigma_star);
        EquilibriumReport {
            sigma_star_unique: sigma_star_present && equilibria.len() == 1,
            sigma_star_present,
            equilibria,
            dominance_filtered,
            profiles_scanned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    /// Restrict to undominated play: nobody abstains and real voters apply for `s1`.
    pub filter_dominated: bool,
    pub scan_cap: u128,
    pub workers: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            filter_dominated: true,
            scan_cap: 1 << 24,
            workers: 1,
        }
    }
}

/// Payoff evaluator with the price table and district sizes resolved once.
pub(crate) struct Game<'a> {
    s: &'a Scenario,
    prices: PriceTable,
    reals: Vec<u32>,
}

impl<'a> Game<'a> {
    pub(crate) fn new(s: &'a Scenario) -> Result<Self> {
        Ok(Game {
            s,
            prices: PriceTable::for_scenario(s)?,
            reals: s.districts.iter().map(|d| d.real).collect(),
        })
    }

    fn classify(&self, applicants: &[u32]) -> Classification {
        classify_counts(applicants, &self.reals, self.s.target)
    }

    fn payoff(&self, cl: &Classification, district: usize, voter_type: VoterType, action: Action) -> Rational {
        let Some(slot) = action.slot() else {
            return voter_type.valuation(&self.s.value);
        };
        cl.status_lottery(district)
            .into_iter()
            .map(|(status, prob)| prob * realized_value(voter_type, &self.prices.price(slot, status), &self.s.value))
            .sum()
    }

    /// Payoff after one voter of `who` switches to `to`.
    fn deviation(&self, applicants: &mut [u32], cl: &Classification, who: VoterClass, to: Action) -> Rational {
        let k = who.district;
        let shift = match (who.action, to) {
            (Action::S1, Action::S1) => 0,
            (Action::S1, _) => -1,
            (_, Action::S1) => 1,
            _ => 0,
        };
        if shift == 0 {
            return self.payoff(cl, k, who.voter_type, to);
        }
        let before = applicants[k];
        applicants[k] = before.checked_add_signed(shift).expect("occupied s1 class");
        let moved = self.classify(applicants);
        applicants[k] = before;
        self.payoff(&moved, k, who.voter_type, to)
    }

    pub(crate) fn is_nash(&self, p: &CountProfile, filter_dominated: bool) -> bool {
        if filter_dominated && !uses_undominated_actions(p) {
            return false;
        }
        let allowed: &[Action] = if filter_dominated { &Action::SLOTS } else { &Action::ALL };
        let mut applicants: Vec<u32> = p.per_district.iter().map(ActionCount::s1_applicants).collect();
        let cl = self.classify(&applicants);
        for (k, counts) in p.per_district.iter().enumerate() {
            for voter_type in VoterType::ALL {
                for &action in allowed {
                    if counts.get(voter_type, action) == 0 {
                        continue;
                    }
                    let who = VoterClass::new(k, voter_type, action);
                    let current = self.payoff(&cl, k, voter_type, action);
                    for &to in allowed.iter().filter(|&&a| a != action) {
                        if self.deviation(&mut applicants, &cl, who, to) > current {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Nobody abstains and every real voter applies for `s1`.
fn uses_undominated_actions(p: &CountProfile) -> bool {
    p.per_district
        .iter()
        .all(|c| c.real_s2 == 0 && c.real_abstain == 0 && c.decoy_abstain == 0)
}

fn check_district(s: &Scenario, district: usize) -> Result<()> {
    if district >= s.district_count() {
        return Err(Error::DistrictOutOfRange {
            district,
            districts: s.district_count(),
        });
    }
    Ok(())
}

/// Expected payoff of a voter of class `who` in `p`. The class may be empty,
/// in which case the payoff is that of a hypothetical member.
pub fn expected_payoff(s: &Scenario, p: &CountProfile, who: VoterClass) -> Result<Rational> {
    check_district(s, who.district)?;
    let game = Game::new(s)?;
    let cl = crate::mechanism::classify(s, p)?;
    Ok(game.payoff(&cl, who.district, who.voter_type, who.action))
}

/// Expected payoff of one member of `who` after it alone switches to
/// `new_action`, with the partition recomputed from scratch.
pub fn deviation_payoff(s: &Scenario, p: &CountProfile, who: VoterClass, new_action: Action) -> Result<Rational> {
    check_district(s, who.district)?;
    let moved = p.moved(who.district, who.voter_type, who.action, new_action)?;
    expected_payoff(s, &moved, VoterClass { action: new_action, ..who })
}

/// No occupied class has a strictly profitable unilateral deviation.
///
/// With `filter_dominated`, actions are restricted to the two slots and a
/// profile where a real voter is outside `s1` is not an equilibrium.
pub fn is_nash(s: &Scenario, p: &CountProfile, filter_dominated: bool) -> Result<bool> {
    p.check(s)?;
    Ok(Game::new(s)?.is_nash(p, filter_dominated))
}

/// All ways to split `n` voters across (s1, s2, abstain).
fn compositions(n: u32, with_abstain: bool) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for s1 in 0..=n {
        if with_abstain {
            for s2 in 0..=n - s1 {
                out.push((s1, s2, n - s1 - s2));
            }
        } else {
            out.push((s1, n - s1, 0));
        }
    }
    out
}

/// Mixed-radix space of symmetry-reduced profiles, district 0 most significant.
pub(crate) struct ProfileSpace {
    options: Vec<Vec<ActionCount>>,
    size: u128,
}

impl ProfileSpace {
    pub(crate) fn new(s: &Scenario, with_abstain: bool) -> Self {
        let options: Vec<Vec<ActionCount>> = s
            .districts
            .iter()
            .map(|d| {
                let reals = compositions(d.real, with_abstain);
                let decoys = compositions(d.decoy, with_abstain);
                let mut v = Vec::with_capacity(reals.len() * decoys.len());
                for &(real_s1, real_s2, real_abstain) in &reals {
                    for &(decoy_s1, decoy_s2, decoy_abstain) in &decoys {
                        v.push(ActionCount {
                            real_s1,
                            real_s2,
                            real_abstain,
                            decoy_s1,
                            decoy_s2,
                            decoy_abstain,
                        });
                    }
                }
                v
            })
            .collect();
        let size = options
            .iter()
            .try_fold(1u128, |acc, o| acc.checked_mul(o.len() as u128))
            .unwrap_or(u128::MAX);
        ProfileSpace { options, size }
    }

    pub(crate) fn size(&self) -> u128 {
        self.size
    }

    pub(crate) fn profile(&self, mut index: u128) -> CountProfile {
        let mut per_district = vec![ActionCount::default(); self.options.len()];
        for (slot, opts) in per_district.iter_mut().zip(&self.options).rev() {
            let radix = opts.len() as u128;
            *slot = opts[(index % radix) as usize];
            index /= radix;
        }
        CountProfile { per_district }
    }
}

/// Runs `keep` over every index in `0..size`, in parallel when `workers > 1`,
/// returning the kept items in index order.
pub(crate) fn scan_indices<T, F>(size: u128, workers: usize, keep: F) -> Vec<T>
where
    T: Send,
    F: Fn(u128) -> Option<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..size).filter_map(keep).collect();
    }
    let size = u64::try_from(size).expect("scan cap keeps profile counts within u64");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| (0..size).into_par_iter().filter_map(|i| keep(i.into())).collect())
}

/// Scans every symmetry-reduced profile and keeps the pure Nash equilibria.
pub fn enumerate_equilibria(s: &Scenario, opts: &ScanOptions) -> Result<EquilibriumReport> {
    ensure_valid(s)?;
    let game = Game::new(s)?;
    let space = ProfileSpace::new(s, !opts.filter_dominated);
    if space.size() > opts.scan_cap {
        return Err(Error::ScanCapExceeded {
            required: space.size(),
            cap: opts.scan_cap,
        });
    }
    let equilibria = scan_indices(space.size(), opts.workers, |i| {
        let p = space.profile(i);
        game.is_nash(&p, opts.filter_dominated).then_some(p)
    });
    Ok(EquilibriumReport::from_equilibria(
        equilibria,
        &CountProfile::sigma_star(s),
        opts.filter_dominated,
        space.size(),
    ))
}

/// Expected spending when a single decoy voter of `district` leaves `s2` for `s1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SabotageCase {
    pub district: usize,
    pub expected_expenditure: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SabotageReport {
    pub cases: Vec<SabotageCase>,
    pub worst: Rational,
    pub bound: Rational,
    pub holds: bool,
    /// Expected spending when instead one real voter of each district moves
    /// from `s1` to `s2`. Informational: no bound is claimed for it.
    pub real_deviation: Vec<Rational>,
}

/// Checks that one decoy voter applying for `s1` cannot push the weak
/// menu's spending above its budget bound, for every choice of district.
pub fn verify_sabotage_bound(s: &Scenario) -> Result<SabotageReport> {
    ensure_valid(s)?;
    let bound = budget_bound(s)?;
    let sigma_star = CountProfile::sigma_star(s);
    let mut cases = Vec::new();
    let mut real_deviation = Vec::new();
    for (k, d) in s.districts.iter().enumerate() {
        if d.decoy > 0 {
            let p = sigma_star.moved(k, VoterType::Decoy, Action::S2, Action::S1)?;
            let spent = expected_expenditure(s, &p)?;
            cases.push(SabotageCase {
                district: k,
                holds: spent <= bound,
                expected_expenditure: spent,
            });
        }
        let p = sigma_star.moved(k, VoterType::Real, Action::S1, Action::S2)?;
        real_deviation.push(expected_expenditure(s, &p)?);
    }
    let worst = cases
        .iter()
        .map(|c| c.expected_expenditure)
        .max()
        .unwrap_or_else(|| expected_expenditure(s, &sigma_star).unwrap_or_else(|_| int(0)));
    Ok(SabotageReport {
        holds: cases.iter().all(|c| c.holds),
        cases,
        worst,
        bound,
        real_deviation,
    })
}
