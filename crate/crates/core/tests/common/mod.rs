//! Independent per-citizen reference implementation used as a test oracle.
//!
//! Nothing here calls into the library's classification, pricing or payoff
//! code; only the plain data types are shared.

#![allow(dead_code)]

use std::collections::BTreeSet;

use devils_menu::mechanism::{ActionCount, CountProfile};
use devils_menu::model::{DistrictSpec, MenuVariant, Scenario};
use devils_menu::rational::{int, ratio};
use devils_menu::Rational;
use itertools::Itertools;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Act {
    S1,
    S2,
    Abstain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Citizen {
    pub district: usize,
    pub real: bool,
}

/// Price row of a district once the lottery is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Row {
    /// Selected with no uncertainty: strictly below the threshold, or tied
    /// with every tied district selected.
    Certain,
    /// Selected by winning a nontrivial tie lottery.
    Lottery,
    Out,
}

pub fn citizens(s: &Scenario) -> Vec<Citizen> {
    let mut out = Vec::new();
    for (k, d) in s.districts.iter().enumerate() {
        for _ in 0..d.real {
            out.push(Citizen { district: k, real: true });
        }
        for _ in 0..d.decoy {
            out.push(Citizen { district: k, real: false });
        }
    }
    out
}

fn valuation(s: &Scenario, c: Citizen) -> Rational {
    if c.real {
        s.value
    } else {
        int(0)
    }
}

fn price(s: &Scenario, act: Act, row: Row) -> Rational {
    let eps = s.epsilon;
    match (act, row) {
        (Act::S1, Row::Out) => eps,
        (Act::S1, _) => s.value + eps,
        (Act::S2, Row::Out) => eps * int(2),
        (Act::S2, row) => match (s.menu, row) {
            (MenuVariant::Weak4, _) => s.delta,
            (MenuVariant::Strong4, _) => eps * int(2),
            (MenuVariant::Strong6, Row::Certain) => s.value - eps,
            (MenuVariant::Strong6, _) => s.delta,
            (m, _) => panic!("oracle does not price {m}"),
        },
        (Act::Abstain, _) => unreachable!(),
    }
}

/// Per district: (below, tied, draws, tie size).
struct Partition {
    below: Vec<bool>,
    tied: Vec<bool>,
    draws: usize,
    t: usize,
}

fn partition(s: &Scenario, applicants: &[u32]) -> Partition {
    let ratios: Vec<Rational> = applicants
        .iter()
        .zip(&s.districts)
        .map(|(&a, d)| ratio(a.into(), d.real.into()))
        .collect();
    let mut sorted = ratios.clone();
    sorted.sort();
    let threshold = sorted[s.target - 1];
    let below: Vec<bool> = ratios.iter().map(|r| *r < threshold).collect();
    let tied: Vec<bool> = ratios.iter().map(|r| *r == threshold).collect();
    let c = below.iter().filter(|&&b| b).count();
    Partition {
        t: tied.iter().filter(|&&b| b).count(),
        draws: s.target - c,
        below,
        tied,
    }
}

fn rows(p: &Partition, k: usize) -> Vec<(Row, Rational)> {
    if p.below[k] || (p.tied[k] && p.draws == p.t) {
        vec![(Row::Certain, int(1))]
    } else if p.tied[k] {
        let win = ratio(p.draws as i128, p.t as i128);
        vec![(Row::Lottery, win), (Row::Out, int(1) - win)]
    } else {
        vec![(Row::Out, int(1))]
    }
}

fn applicants(s: &Scenario, people: &[Citizen], acts: &[Act]) -> Vec<u32> {
    let mut a = vec![0; s.district_count()];
    for (c, act) in people.iter().zip(acts) {
        if *act == Act::S1 {
            a[c.district] += 1;
        }
    }
    a
}

pub fn payoff(s: &Scenario, people: &[Citizen], acts: &[Act], i: usize) -> Rational {
    let c = people[i];
    let v = valuation(s, c);
    if acts[i] == Act::Abstain {
        return v;
    }
    let p = partition(s, &applicants(s, people, acts));
    rows(&p, c.district)
        .into_iter()
        .map(|(row, prob)| {
            let offer = price(s, acts[i], row);
            prob * if offer > v { offer } else { v }
        })
        .sum()
}

pub fn is_nash(s: &Scenario, people: &[Citizen], acts: &[Act], filtered: bool) -> bool {
    if filtered && people.iter().zip(acts).any(|(c, a)| c.real && *a != Act::S1) {
        return false;
    }
    let options: &[Act] = if filtered { &[Act::S1, Act::S2] } else { &[Act::S1, Act::S2, Act::Abstain] };
    let mut trial = acts.to_vec();
    for i in 0..people.len() {
        let current = payoff(s, people, acts, i);
        for &alt in options {
            if alt == acts[i] {
                continue;
            }
            trial[i] = alt;
            let better = payoff(s, people, &trial, i) > current;
            trial[i] = acts[i];
            if better {
                return false;
            }
        }
    }
    true
}

pub fn to_counts(s: &Scenario, people: &[Citizen], acts: &[Act]) -> CountProfile {
    let mut per_district = vec![ActionCount::default(); s.district_count()];
    for (c, a) in people.iter().zip(acts) {
        let slot = &mut per_district[c.district];
        let field = match (c.real, a) {
            (true, Act::S1) => &mut slot.real_s1,
            (true, Act::S2) => &mut slot.real_s2,
            (true, Act::Abstain) => &mut slot.real_abstain,
            (false, Act::S1) => &mut slot.decoy_s1,
            (false, Act::S2) => &mut slot.decoy_s2,
            (false, Act::Abstain) => &mut slot.decoy_abstain,
        };
        *field += 1;
    }
    CountProfile { per_district }
}

/// Equilibria found by brute force over every citizen-level profile,
/// collapsed to counts.
pub fn equilibria(s: &Scenario, filtered: bool) -> BTreeSet<CountProfile> {
    let people = citizens(s);
    let options: &[Act] = if filtered { &[Act::S1, Act::S2] } else { &[Act::S1, Act::S2, Act::Abstain] };
    let mut found = BTreeSet::new();
    for acts in std::iter::repeat_n(options.iter().copied(), people.len()).multi_cartesian_product() {
        if is_nash(s, &people, &acts, filtered) {
            found.insert(to_counts(s, &people, &acts));
        }
    }
    found
}

/// Citizen-level expansion of a count profile.
pub fn expand(p: &CountProfile) -> (Vec<Citizen>, Vec<Act>) {
    let mut people = Vec::new();
    let mut acts = Vec::new();
    for (k, c) in p.per_district.iter().enumerate() {
        for (real, act, n) in [
            (true, Act::S1, c.real_s1),
            (true, Act::S2, c.real_s2),
            (true, Act::Abstain, c.real_abstain),
            (false, Act::S1, c.decoy_s1),
            (false, Act::S2, c.decoy_s2),
            (false, Act::Abstain, c.decoy_abstain),
        ] {
            for _ in 0..n {
                people.push(Citizen { district: k, real });
                acts.push(act);
            }
        }
    }
    (people, acts)
}

/// Spending when exactly the districts in `selected` are bought.
pub fn spending_given(s: &Scenario, p: &CountProfile, selected: &[usize]) -> Rational {
    let (people, acts) = expand(p);
    let part = partition(s, &applicants(s, &people, &acts));
    let mut total = int(0);
    for (c, act) in people.iter().zip(&acts) {
        if *act == Act::Abstain {
            continue;
        }
        let row = if !selected.contains(&c.district) {
            Row::Out
        } else if part.below[c.district] || part.draws == part.t {
            Row::Certain
        } else {
            Row::Lottery
        };
        let offer = price(s, *act, row);
        if offer > valuation(s, *c) {
            total += offer;
        }
    }
    total
}

/// Every equally likely selected set of `p`.
pub fn selections(s: &Scenario, p: &CountProfile) -> Vec<Vec<usize>> {
    let (people, acts) = expand(p);
    let part = partition(s, &applicants(s, &people, &acts));
    let below: Vec<usize> = (0..s.district_count()).filter(|&k| part.below[k]).collect();
    let tied: Vec<usize> = (0..s.district_count()).filter(|&k| part.tied[k]).collect();
    tied.into_iter()
        .combinations(part.draws)
        .map(|extra| below.iter().copied().chain(extra).sorted().collect())
        .collect()
}

/// Expected spending over the fair lottery.
pub fn expected_spending(s: &Scenario, p: &CountProfile) -> Rational {
    let all = selections(s, p);
    let n = all.len() as i128;
    all.iter().map(|sel| spending_given(s, p, sel)).sum::<Rational>() / int(n)
}

/// Weak-menu budget bound: worst class sum over all `q`-subsets.
pub fn budget_bound(s: &Scenario) -> Rational {
    (0..s.district_count())
        .combinations(s.target)
        .map(|sel| weak_class_sum(s, &sel))
        .max()
        .unwrap()
}

pub fn weak_class_sum(s: &Scenario, sel: &[usize]) -> Rational {
    s.districts
        .iter()
        .enumerate()
        .map(|(k, d)| {
            if sel.contains(&k) {
                (s.value + s.epsilon) * int(d.real.into()) + s.delta * int(d.decoy.into())
            } else {
                s.epsilon * int(2) * int(d.decoy.into())
            }
        })
        .sum()
}

/// Displayed strong-form bound with a flat per-decoy price.
pub fn strong_bound(s: &Scenario, per_decoy: Rational) -> Rational {
    let reals = (0..s.district_count())
        .combinations(s.target)
        .map(|sel| sel.iter().map(|&k| i128::from(s.districts[k].real)).sum::<i128>())
        .max()
        .unwrap();
    (s.value + s.epsilon) * int(reals) + per_decoy * int(s.total_decoy().into())
}

pub fn brute_force(s: &Scenario) -> Rational {
    (0..s.district_count())
        .combinations(s.target)
        .map(|sel| (s.value + s.epsilon) * int(sel.iter().map(|&k| i128::from(s.districts[k].total())).sum()))
        .max()
        .unwrap()
}

/// Every ordered district tuple with `k` in `ks` and each count in `counts`.
pub fn ordered_tuples(ks: std::ops::RangeInclusive<usize>, counts: std::ops::RangeInclusive<u32>) -> Vec<Vec<DistrictSpec>> {
    let kinds: Vec<DistrictSpec> = counts
        .clone()
        .cartesian_product(counts)
        .map(|(r, d)| DistrictSpec::new(r, d))
        .collect();
    ks.flat_map(|k| std::iter::repeat_n(kinds.clone(), k).multi_cartesian_product())
        .collect()
}

pub fn scenario(districts: Vec<DistrictSpec>, q: usize, delta: Rational, menu: MenuVariant) -> Scenario {
    Scenario::with_defaults(districts, q, delta, menu)
}

/// `(q / k) V + 2 eps` with V = 100, eps = 1.
pub fn theorem_delta(k: usize, q: usize) -> Rational {
    ratio(100 * q as i128, k as i128) + int(2)
}
