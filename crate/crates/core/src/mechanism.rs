//! One run of a price-menu mechanism.
//!
//! Citizens apply for slot `s1`, slot `s2`, or abstain. Each district's
//! ratio of `s1` applicants to real voters decides whether it is selected
//! outright (below the `q`-th smallest ratio), enters the tie lottery (equal
//! to it), or is left out (above it). Prices then depend on the slot and the
//! district's status, and every applicant decides whether to sell.
//!
//! Voters of the same (district, type, action) are interchangeable, so
//! everything here works on per-class counts.

use std::fmt;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ensure_valid, MenuVariant, Scenario};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VoterType {
    Real,
    Decoy,
}

impl VoterType {
    pub const ALL: [VoterType; 2] = [VoterType::Real, VoterType::Decoy];

    /// What the holder gets from keeping the ballot.
    pub fn valuation(self, value: &Rational) -> Rational {
        match self {
            VoterType::Real => *value,
            VoterType::Decoy => int(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    S1,
    S2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    S1,
    S2,
    Abstain,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::S1, Action::S2, Action::Abstain];
    pub const SLOTS: [Action; 2] = [Action::S1, Action::S2];

    pub fn slot(self) -> Option<Slot> {
        match self {
            Action::S1 => Some(Slot::S1),
            Action::S2 => Some(Slot::S2),
            Action::Abstain => None,
        }
    }
}

/// How many voters of each type chose each action in one district.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActionCount {
    pub real_s1: u32,
    pub real_s2: u32,
    pub real_abstain: u32,
    pub decoy_s1: u32,
    pub decoy_s2: u32,
    pub decoy_abstain: u32,
}

impl ActionCount {
    pub fn get(&self, voter_type: VoterType, action: Action) -> u32 {
        match (voter_type, action) {
            (VoterType::Real, Action::S1) => self.real_s1,
            (VoterType::Real, Action::S2) => self.real_s2,
            (VoterType::Real, Action::Abstain) => self.real_abstain,
            (VoterType::Decoy, Action::S1) => self.decoy_s1,
            (VoterType::Decoy, Action::S2) => self.decoy_s2,
            (VoterType::Decoy, Action::Abstain) => self.decoy_abstain,
        }
    }

    pub fn get_mut(&mut self, voter_type: VoterType, action: Action) -> &mut u32 {
        match (voter_type, action) {
            (VoterType::Real, Action::S1) => &mut self.real_s1,
            (VoterType::Real, Action::S2) => &mut self.real_s2,
            (VoterType::Real, Action::Abstain) => &mut self.real_abstain,
            (VoterType::Decoy, Action::S1) => &mut self.decoy_s1,
            (VoterType::Decoy, Action::S2) => &mut self.decoy_s2,
            (VoterType::Decoy, Action::Abstain) => &mut self.decoy_abstain,
        }
    }

    pub fn of_type(&self, voter_type: VoterType) -> u32 {
        Action::ALL.iter().map(|&a| self.get(voter_type, a)).sum()
    }

    /// Number of `s1` applicants, the numerator of the district's ratio.
    pub fn s1_applicants(&self) -> u32 {
        self.real_s1 + self.decoy_s1
    }
}

impl fmt::Display for ActionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "R[{}/{}/{}] D[{}/{}/{}]",
            self.real_s1, self.real_s2, self.real_abstain, self.decoy_s1, self.decoy_s2, self.decoy_abstain
        )
    }
}

/// Symmetry-reduced strategy profile, one [`ActionCount`] per district.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountProfile {
    #[serde(rename = "districts")]
    pub per_district: Vec<ActionCount>,
}

impl CountProfile {
    /// Every real voter in `s1`, every decoy voter in `s2`.
    pub fn sigma_star(s: &Scenario) -> Self {
        CountProfile {
            per_district: s
                .districts
                .iter()
                .map(|d| ActionCount {
                    real_s1: d.real,
                    decoy_s2: d.decoy,
                    ..ActionCount::default()
                })
                .collect(),
        }
    }

    pub fn is_sigma_star(&self, s: &Scenario) -> bool {
        *self == Self::sigma_star(s)
    }

    pub fn check(&self, s: &Scenario) -> Result<()> {
        if self.per_district.len() != s.district_count() {
            return Err(Error::ProfileLength {
                expected: s.district_count(),
                got: self.per_district.len(),
            });
        }
        for (k, (counts, spec)) in self.per_district.iter().zip(&s.districts).enumerate() {
            for (voter_type, expected) in [(VoterType::Real, spec.real), (VoterType::Decoy, spec.decoy)] {
                let got = counts.of_type(voter_type);
                if got != expected {
                    return Err(Error::ProfileCounts {
                        district: k,
                        voter_type,
                        expected,
                        got,
                    });
                }
            }
        }
        Ok(())
    }

    /// Copy with one voter of the given class moved to `to`.
    pub fn moved(&self, district: usize, voter_type: VoterType, from: Action, to: Action) -> Result<CountProfile> {
        let districts = self.per_district.len();
        let counts = self
            .per_district
            .get(district)
            .ok_or(Error::DistrictOutOfRange { district, districts })?;
        if counts.get(voter_type, from) == 0 {
            return Err(Error::EmptyClass { district, voter_type });
        }
        let mut next = self.clone();
        *next.per_district[district].get_mut(voter_type, from) -= 1;
        *next.per_district[district].get_mut(voter_type, to) += 1;
        Ok(next)
    }
}

impl fmt::Display for CountProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.per_district.iter().join(" | "))
    }
}

/// Where a district's ratio sits relative to the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    /// Strictly below: selected outright (set C).
    Below,
    /// Equal: enters the tie lottery (set T).
    Tied,
    /// Strictly above: never selected (set O).
    Above,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// `s1` applicants over real voters, per district.
    pub ratios: Vec<Rational>,
    /// The `q`-th smallest ratio, counted with multiplicity.
    pub threshold: Rational,
    pub below: Vec<usize>,
    pub tied: Vec<usize>,
    pub above: Vec<usize>,
    pub target: usize,
}

impl Classification {
    pub fn c(&self) -> usize {
        self.below.len()
    }

    pub fn t(&self) -> usize {
        self.tied.len()
    }

    pub fn o(&self) -> usize {
        self.above.len()
    }

    pub fn tier(&self, district: usize) -> Tier {
        match self.ratios[district].cmp(&self.threshold) {
            std::cmp::Ordering::Less => Tier::Below,
            std::cmp::Ordering::Equal => Tier::Tied,
            std::cmp::Ordering::Greater => Tier::Above,
        }
    }

    /// Number of tied districts the lottery picks.
    pub fn lottery_draws(&self) -> usize {
        self.target - self.c()
    }

    /// True when every tied district is picked, so the lottery is trivial.
    pub fn tie_selected_in_full(&self) -> bool {
        self.lottery_draws() == self.t()
    }

    pub fn selection_probability(&self, district: usize) -> Rational {
        match self.tier(district) {
            Tier::Below => int(1),
            Tier::Above => int(0),
            Tier::Tied => Rational::new(self.lottery_draws() as i128, self.t() as i128),
        }
    }

    /// Distribution of the district's final status over the fair lottery.
    pub fn status_lottery(&self, district: usize) -> Vec<(DistrictStatus, Rational)> {
        match self.tier(district) {
            Tier::Below => vec![(DistrictStatus::SelectedViaC, int(1))],
            Tier::Above => vec![(DistrictStatus::NotSelected, int(1))],
            Tier::Tied if self.tie_selected_in_full() => vec![(DistrictStatus::SelectedViaC, int(1))],
            Tier::Tied => {
                let p = self.selection_probability(district);
                vec![(DistrictStatus::SelectedViaT, p), (DistrictStatus::NotSelected, int(1) - p)]
            }
        }
    }
}

/// Ratios and the C/T/O partition for `p`.
pub fn classify(s: &Scenario, p: &CountProfile) -> Result<Classification> {
    p.check(s)?;
    let applicants: Vec<u32> = p.per_district.iter().map(ActionCount::s1_applicants).collect();
    let reals: Vec<u32> = s.districts.iter().map(|d| d.real).collect();
    Ok(classify_counts(&applicants, &reals, s.target))
}

/// Partition from raw `s1` applicant counts. `reals` must be positive and
/// `1 <= target <= applicants.len()`.
pub(crate) fn classify_counts(applicants: &[u32], reals: &[u32], target: usize) -> Classification {
    let ratios: Vec<Rational> = applicants
        .iter()
        .zip(reals)
        .map(|(&m, &n)| Rational::new(m.into(), n.into()))
        .collect();
    let mut sorted = ratios.clone();
    sorted.sort_unstable();
    let threshold = sorted[target - 1];
    let mut below = Vec::new();
    let mut tied = Vec::new();
    let mut above = Vec::new();
    for (k, r) in ratios.iter().enumerate() {
        match r.cmp(&threshold) {
            std::cmp::Ordering::Less => below.push(k),
            std::cmp::Ordering::Equal => tied.push(k),
            std::cmp::Ordering::Greater => above.push(k),
        }
    }
    Classification {
        ratios,
        threshold,
        below,
        tied,
        above,
        target,
    }
}

/// Final selection: all of C plus a uniform `(q - c)`-subset of T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub selected: Vec<usize>,
    pub from_tie: Vec<usize>,
}

/// Fair randomization by a seeded Fisher-Yates prefix over the tied districts.
pub fn select_districts<R: Rng + ?Sized>(cl: &Classification, rng: &mut R) -> Selection {
    let draws = cl.lottery_draws();
    assert!(draws <= cl.t(), "classification invariant broken: q - c > t");
    let mut pool = cl.tied.clone();
    let (chosen, _) = pool.partial_shuffle(rng, draws);
    let mut from_tie = chosen.to_vec();
    from_tie.sort_unstable();
    let selected = cl.below.iter().chain(&from_tie).copied().sorted_unstable().collect();
    Selection { selected, from_tie }
}

/// Status that determines a district's price row.
///
/// `SelectedViaC` covers every district whose selection was certain at the
/// interim stage: those in C, and tied districts when the lottery takes all
/// of them. `SelectedViaT` is a district that won a genuine lottery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistrictStatus {
    SelectedViaC,
    SelectedViaT,
    NotSelected,
}

impl DistrictStatus {
    pub fn is_selected(self) -> bool {
        !matches!(self, DistrictStatus::NotSelected)
    }
}

/// Resolved price table of a district-based menu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceTable {
    pub menu: MenuVariant,
    s1_selected: Rational,
    s2_certain: Rational,
    s2_lottery: Rational,
    s1_unselected: Rational,
    s2_unselected: Rational,
}

impl PriceTable {
    pub fn new(menu: MenuVariant, value: Rational, epsilon: Rational, delta: Rational) -> Result<Self> {
        let two_eps = epsilon * int(2);
        let (s2_certain, s2_lottery) = match menu {
            MenuVariant::Weak4 => (delta, delta),
            MenuVariant::Strong4 => (two_eps, two_eps),
            MenuVariant::Strong6 => (value - epsilon, delta),
            MenuVariant::SimpleCommitment(_) => {
                return Err(Error::UnsupportedMenu {
                    operation: "price table",
                    menu: menu.to_string(),
                })
            }
        };
        Ok(PriceTable {
            menu,
            s1_selected: value + epsilon,
            s2_certain,
            s2_lottery,
            s1_unselected: epsilon,
            s2_unselected: two_eps,
        })
    }

    pub fn for_scenario(s: &Scenario) -> Result<Self> {
        Self::new(s.menu, s.value, s.epsilon, s.delta)
    }

    pub fn price(&self, slot: Slot, status: DistrictStatus) -> Rational {
        match (slot, status) {
            (Slot::S1, DistrictStatus::NotSelected) => self.s1_unselected,
            (Slot::S2, DistrictStatus::NotSelected) => self.s2_unselected,
            (Slot::S1, _) => self.s1_selected,
            (Slot::S2, DistrictStatus::SelectedViaC) => self.s2_certain,
            (Slot::S2, DistrictStatus::SelectedViaT) => self.s2_lottery,
        }
    }
}

pub fn price_for(
    menu: MenuVariant,
    slot: Slot,
    status: DistrictStatus,
    value: Rational,
    epsilon: Rational,
    delta: Rational,
) -> Result<Rational> {
    Ok(PriceTable::new(menu, value, epsilon, delta)?.price(slot, status))
}

/// Citizens sell only at a price strictly above their valuation.
pub fn sell_decision(voter_type: VoterType, offered: &Rational, value: &Rational) -> bool {
    *offered > voter_type.valuation(value)
}

/// What a voter ends up with when offered `price`.
pub fn realized_value(voter_type: VoterType, price: &Rational, value: &Rational) -> Rational {
    if sell_decision(voter_type, price, value) {
        *price
    } else {
        voter_type.valuation(value)
    }
}

/// Payment to one class of applicants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSettlement {
    pub district: usize,
    pub voter_type: VoterType,
    pub slot: Slot,
    pub count: u32,
    pub price: Rational,
    pub sells: bool,
    pub paid: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub classification: Classification,
    pub selected: Vec<usize>,
    /// Selected districts that came out of the tie lottery.
    pub from_tie: Vec<usize>,
    pub statuses: Vec<DistrictStatus>,
    /// Nonempty applicant classes only; abstainers get no offer.
    pub settlements: Vec<ClassSettlement>,
    pub expenditure: Rational,
    pub acquired_real_ballots: Vec<u32>,
}

impl Outcome {
    pub fn total_acquired(&self) -> u32 {
        self.acquired_real_ballots.iter().sum()
    }

    /// Relabel district indices through `map` (residual index -> original index).
    pub fn remapped(mut self, map: &[usize], districts: usize) -> Outcome {
        let remap = |v: &mut Vec<usize>| {
            for k in v.iter_mut() {
                *k = map[*k];
            }
            v.sort_unstable();
        };
        remap(&mut self.selected);
        remap(&mut self.from_tie);
        let cl = &mut self.classification;
        remap(&mut cl.below);
        remap(&mut cl.tied);
        remap(&mut cl.above);
        let mut ratios = vec![int(0); districts];
        let mut statuses = vec![DistrictStatus::NotSelected; districts];
        let mut acquired = vec![0; districts];
        for (i, &k) in map.iter().enumerate() {
            ratios[k] = cl.ratios[i];
            statuses[k] = self.statuses[i];
            acquired[k] = self.acquired_real_ballots[i];
        }
        cl.ratios = ratios;
        self.statuses = statuses;
        self.acquired_real_ballots = acquired;
        for st in &mut self.settlements {
            st.district = map[st.district];
        }
        self
    }
}

fn ensure_district_menu(s: &Scenario, operation: &'static str) -> Result<()> {
    if let MenuVariant::SimpleCommitment(_) = s.menu {
        return Err(Error::UnsupportedMenu {
            operation,
            menu: s.menu.to_string(),
        });
    }
    Ok(())
}

/// Runs the whole mechanism once: classify, draw the lottery, settle.
pub fn execute<R: Rng + ?Sized>(s: &Scenario, p: &CountProfile, rng: &mut R) -> Result<Outcome> {
    ensure_valid(s)?;
    ensure_district_menu(s, "execute")?;
    let cl = classify(s, p)?;
    let selection = select_districts(&cl, rng);
    settle(s, p, cl, &selection)
}

/// Settles a profile against a fixed selection.
pub fn settle(s: &Scenario, p: &CountProfile, cl: Classification, selection: &Selection) -> Result<Outcome> {
    let prices = PriceTable::for_scenario(s)?;
    let statuses: Vec<DistrictStatus> = (0..s.district_count())
        .map(|k| {
            if !selection.selected.contains(&k) {
                DistrictStatus::NotSelected
            } else if selection.from_tie.contains(&k) && !cl.tie_selected_in_full() {
                DistrictStatus::SelectedViaT
            } else {
                DistrictStatus::SelectedViaC
            }
        })
        .collect();
    let mut settlements = Vec::new();
    let mut expenditure = int(0);
    let mut acquired = vec![0; s.district_count()];
    for (k, counts) in p.per_district.iter().enumerate() {
        for voter_type in VoterType::ALL {
            for action in Action::SLOTS {
                let count = counts.get(voter_type, action);
                if count == 0 {
                    continue;
                }
                let slot = action.slot().expect("slot action");
                let price = prices.price(slot, statuses[k]);
                let sells = sell_decision(voter_type, &price, &s.value);
                let paid = if sells { price * int(count.into()) } else { int(0) };
                expenditure += paid;
                if sells && voter_type == VoterType::Real {
                    acquired[k] += count;
                }
                settlements.push(ClassSettlement {
                    district: k,
                    voter_type,
                    slot,
                    count,
                    price,
                    sells,
                    paid,
                });
            }
        }
    }
    Ok(Outcome {
        classification: cl,
        selected: selection.selected.clone(),
        from_tie: selection.from_tie.clone(),
        statuses,
        settlements,
        expenditure,
        acquired_real_ballots: acquired,
    })
}

/// Adversary's expenditure averaged over the fair lottery, computed exactly.
pub fn expected_expenditure(s: &Scenario, p: &CountProfile) -> Result<Rational> {
    ensure_district_menu(s, "expected expenditure")?;
    let prices = PriceTable::for_scenario(s)?;
    let cl = classify(s, p)?;
    let mut total = int(0);
    for (k, counts) in p.per_district.iter().enumerate() {
        for (status, prob) in cl.status_lottery(k) {
            for voter_type in VoterType::ALL {
                for action in Action::SLOTS {
                    let count = counts.get(voter_type, action);
                    let price = prices.price(action.slot().expect("slot action"), status);
                    if count > 0 && sell_decision(voter_type, &price, &s.value) {
                        total += prob * price * int(count.into());
                    }
                }
            }
        }
    }
    Ok(total)
}

fn max_over_target_subsets(s: &Scenario, cost: impl Fn(&[usize]) -> Rational) -> Rational {
    (0..s.district_count())
        .combinations(s.target)
        .map(|subset| cost(&subset))
        .max()
        .unwrap_or_else(|| int(0))
}

/// Worst-case equilibrium spending of the weak four-price menu, maximised
/// over every choice of `q` selected districts.
pub fn budget_bound(s: &Scenario) -> Result<Rational> {
    if s.menu != MenuVariant::Weak4 {
        return Err(Error::UnsupportedMenu {
            operation: "budget bound",
            menu: s.menu.to_string(),
        });
    }
    let two_eps = s.epsilon * int(2);
    Ok(max_over_target_subsets(s, |subset| {
        s.districts
            .iter()
            .enumerate()
            .map(|(k, d)| {
                if subset.contains(&k) {
                    (s.value + s.epsilon) * int(d.real.into()) + s.delta * int(d.decoy.into())
                } else {
                    two_eps * int(d.decoy.into())
                }
            })
            .sum()
    }))
}

/// Spending bound of the strong forms: `(V+eps)` per real ballot of the
/// worst `q` districts plus a flat per-decoy price for every decoy ballot
/// (`2eps` for strong4, `delta` for strong6).
pub fn strong_form_bound(s: &Scenario) -> Result<Rational> {
    let per_decoy = match s.menu {
        MenuVariant::Strong4 => s.epsilon * int(2),
        MenuVariant::Strong6 => s.delta,
        _ => {
            return Err(Error::UnsupportedMenu {
                operation: "strong-form bound",
                menu: s.menu.to_string(),
            })
        }
    };
    let decoys = per_decoy * int(s.total_decoy().into());
    Ok(max_over_target_subsets(s, |subset| {
        (s.value + s.epsilon) * int(subset.iter().map(|&k| i128::from(s.districts[k].real)).sum()) + decoys
    }))
}

/// Smallest `delta` for which the menu's uniqueness result applies.
pub fn minimal_delta(s: &Scenario) -> Result<Rational> {
    let k = s.district_count() as i128;
    match s.menu {
        MenuVariant::Weak4 => Ok(Rational::new(s.target as i128, k) * s.value + s.epsilon * int(2)),
        MenuVariant::Strong4 => Ok(s.epsilon * int(2)),
        MenuVariant::Strong6 => Ok(s.epsilon * int(3)),
        MenuVariant::SimpleCommitment(_) => Err(Error::UnsupportedMenu {
            operation: "minimal delta",
            menu: s.menu.to_string(),
        }),
    }
}

/// Smallest `delta` for the sequential weak menu: the binding last round
/// has `k - q + 1` districts left.
pub fn minimal_sequential_delta(s: &Scenario) -> Rational {
    let last_round = s.district_count() as i128 - s.target as i128 + 1;
    s.value / int(last_round.max(1)) + s.epsilon * int(2)
}
