//! Subcommand bodies. Each returns a deterministic [`Payload`].

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::equilibrium::{enumerate_equilibria, is_nash, verify_sabotage_bound, EquilibriumReport, ScanOptions};
use crate::error::{Error, Result};
use crate::mechanism::{
    classify, execute, expected_expenditure, minimal_delta, select_districts, ActionCount, CountProfile, Outcome,
};
use crate::model::{validate_scenario, DistrictSpec, Scenario};
use crate::rational::{describe, int, to_f64, Rational};
use crate::variants::{
    run_commitment_mechanism, run_lemons_with_deviators, run_sequential, sequential, verify_commitment_equilibrium,
    verify_subgame_perfect, CommitmentGameSpec, LemonsMarket,
};

use super::families::Claim;
use super::report::{exact, Payload, Table};

fn set(items: &[usize]) -> String {
    format!("{{{}}}", items.iter().map(usize::to_string).collect::<Vec<_>>().join(", "))
}

fn districts_label(districts: &[DistrictSpec]) -> String {
    districts
        .iter()
        .map(|d| format!("({},{})", d.real, d.decoy))
        .collect::<Vec<_>>()
        .join(" ")
}

fn describe_profile(p: &CountProfile) -> String {
    p.per_district
        .iter()
        .enumerate()
        .map(|(k, c)| format!("d{k} {c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn describe_outcome(text: &mut String, o: &Outcome) {
    let cl = &o.classification;
    let _ = writeln!(
        text,
        "classification: threshold {}, C = {}, T = {}, O = {}",
        cl.threshold,
        set(&cl.below),
        set(&cl.tied),
        set(&cl.above)
    );
    let _ = writeln!(text, "selected: {} (from tie lottery: {})", set(&o.selected), set(&o.from_tie));
    let _ = writeln!(text, "class settlements:");
    for c in &o.settlements {
        let _ = writeln!(
            text,
            "  d{} {:?} {:?} x{}: price {} {}, paid {}",
            c.district,
            c.voter_type,
            c.slot,
            c.count,
            c.price,
            if c.sells { "sells" } else { "keeps" },
            c.paid
        );
    }
    let _ = writeln!(text, "expenditure: {}", describe(&o.expenditure));
    let _ = writeln!(text, "acquired real ballots: {}", o.total_acquired());
}

fn settlement_table(o: &Outcome) -> Table {
    let mut t = Table::new(&[
        "district", "voter_type", "slot", "count", "price", "price_decimal", "sells", "paid", "paid_decimal",
    ]);
    for c in &o.settlements {
        let [price, price_dec] = exact(&c.price);
        let [paid, paid_dec] = exact(&c.paid);
        t.push(vec![
            c.district.to_string(),
            format!("{:?}", c.voter_type).to_lowercase(),
            format!("{:?}", c.slot).to_lowercase(),
            c.count.to_string(),
            price,
            price_dec,
            c.sells.to_string(),
            paid,
            paid_dec,
        ]);
    }
    t
}

/// Selection counts per district over `runs` lotteries; run `i` draws from
/// a generator seeded with `s.seed ^ i`.
pub fn selection_frequencies(s: &Scenario, p: &CountProfile, runs: u64, workers: usize) -> Result<Vec<u64>> {
    let cl = classify(s, p)?;
    let k = s.district_count();
    let one_run = |i: u64| {
        let mut counts = vec![0u64; k];
        for d in select_districts(&cl, &mut ChaCha8Rng::seed_from_u64(s.seed ^ i)).selected {
            counts[d] += 1;
        }
        counts
    };
    let add = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    if workers <= 1 {
        return Ok((0..runs).map(one_run).fold(vec![0; k], add));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(pool.install(|| (0..runs).into_par_iter().map(one_run).reduce(|| vec![0; k], add)))
}

pub fn run(s: &Scenario, p: &CountProfile, mc: Option<u64>, workers: usize) -> Result<Payload> {
    let mut text = format!("profile: {}\n", describe_profile(p));
    let outcome = execute(s, p, &mut ChaCha8Rng::seed_from_u64(s.seed))?;
    describe_outcome(&mut text, &outcome);
    let _ = writeln!(text, "expected expenditure: {}", describe(&expected_expenditure(s, p)?));
    let Some(runs) = mc else {
        return Ok(Payload {
            text,
            table: Some(settlement_table(&outcome)),
            claim_failed: false,
        });
    };
    let counts = selection_frequencies(s, p, runs, workers)?;
    let cl = &outcome.classification;
    let mut table = Table::new(&[
        "district", "selected", "runs", "frequency", "frequency_decimal", "expected", "expected_decimal", "z_score",
    ]);
    let _ = writeln!(text, "\nmonte carlo, {runs} runs:");
    for (k, &hits) in counts.iter().enumerate() {
        let prob = cl.selection_probability(k);
        let freq = Rational::new(hits.into(), runs.max(1).into());
        let pf = to_f64(&prob);
        let sd = (pf * (1.0 - pf) / runs as f64).sqrt();
        let z = if sd > 0.0 { (to_f64(&freq) - pf) / sd } else { 0.0 };
        let [f, fd] = exact(&freq);
        let [e, ed] = exact(&prob);
        let _ = writeln!(text, "  d{k}: {hits} selections, frequency {fd}, expected {e} ({ed}), z = {z:.3}");
        table.push(vec![k.to_string(), hits.to_string(), runs.to_string(), f, fd, e, ed, format!("{z:.6}")]);
    }
    Ok(Payload {
        text,
        table: Some(table),
        claim_failed: false,
    })
}

fn describe_report(text: &mut String, r: &EquilibriumReport) {
    let _ = writeln!(
        text,
        "{} equilibria among {} profiles (dominance filter {})",
        r.equilibria.len(),
        r.profiles_scanned,
        if r.dominance_filtered { "on" } else { "off" }
    );
    let _ = writeln!(
        text,
        "target profile: {}",
        match (r.sigma_star_present, r.sigma_star_unique) {
            (true, true) => "unique equilibrium",
            (true, false) => "equilibrium, not unique",
            _ => "not an equilibrium",
        }
    );
}

fn equilibria_table(r: &EquilibriumReport) -> Table {
    let mut t = Table::new(&[
        "equilibrium", "district", "real_s1", "real_s2", "real_abstain", "decoy_s1", "decoy_s2", "decoy_abstain",
    ]);
    for (i, p) in r.equilibria.iter().enumerate() {
        for (k, c) in p.per_district.iter().enumerate() {
            t.push(
                [i, k]
                    .iter()
                    .map(usize::to_string)
                    .chain(
                        [c.real_s1, c.real_s2, c.real_abstain, c.decoy_s1, c.decoy_s2, c.decoy_abstain]
                            .iter()
                            .map(u32::to_string),
                    )
                    .collect(),
            );
        }
    }
    t
}

pub fn enumerate(s: &Scenario, opts: &ScanOptions) -> Result<Payload> {
    let report = enumerate_equilibria(s, opts)?;
    let mut text = String::new();
    describe_report(&mut text, &report);
    for (i, p) in report.equilibria.iter().enumerate() {
        let _ = writeln!(text, "  #{i}: {}", describe_profile(p));
    }
    Ok(Payload {
        text,
        table: Some(equilibria_table(&report)),
        claim_failed: false,
    })
}

/// Whether `claim` holds on `s`, with a one-line explanation.
pub fn check_claim(claim: Claim, s: &Scenario, opts: &ScanOptions) -> Result<(bool, String)> {
    Ok(match claim {
        Claim::Thm1 | Claim::Thm2 => {
            let r = enumerate_equilibria(s, opts)?;
            (
                r.sigma_star_unique,
                format!("{} equilibria among {} profiles", r.equilibria.len(), r.profiles_scanned),
            )
        }
        Claim::Prop2 => {
            let holds = is_nash(s, &CountProfile::sigma_star(s), opts.filter_dominated)?;
            let r = enumerate_equilibria(s, opts)?;
            let others = r.equilibria.len() - usize::from(r.sigma_star_present);
            (holds, format!("target is an equilibrium: {holds}; {others} other equilibria"))
        }
        Claim::Cor1 => {
            let r = verify_sabotage_bound(s)?;
            (r.holds, format!("worst expected spending {} vs bound {}", r.worst, r.bound))
        }
        Claim::Prop1 => {
            let r = verify_subgame_perfect(s, opts)?;
            let failing = r.checks.iter().filter(|c| !c.report.sigma_star_unique).count();
            (r.holds, format!("{} subgames checked, {failing} failing", r.checks.len()))
        }
    })
}

pub fn verify(claim: Claim, instances: &[Scenario], opts: &ScanOptions) -> Result<Payload> {
    let mut table = Table::new(&["claim", "districts", "q", "delta", "delta_decimal", "passed", "detail"]);
    let mut text = String::new();
    let mut passed = 0;
    for s in instances {
        let (ok, detail) = check_claim(claim, s, opts)?;
        passed += usize::from(ok);
        let label = districts_label(&s.districts);
        let [d, dd] = exact(&s.delta);
        let _ = writeln!(
            text,
            "{}  {label}  q={}  delta={d}  {detail}",
            if ok { "PASS" } else { "FAIL" },
            s.target
        );
        table.push(vec![claim.name().into(), label, s.target.to_string(), d, dd, ok.to_string(), detail]);
    }
    let _ = writeln!(text, "\n{}: {passed}/{} instances pass", claim.name(), instances.len());
    Ok(Payload {
        text,
        table: Some(table),
        claim_failed: passed != instances.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Delta,
    Q,
}

fn sweep_grid(param: SweepParam, from: Rational, to: Rational, steps: u32) -> Result<Vec<Rational>> {
    match param {
        SweepParam::Delta => {
            if steps <= 1 {
                return Ok(vec![from]);
            }
            let step = (to - from) / int((steps - 1).into());
            Ok((0..steps).map(|i| from + step * int(i.into())).collect())
        }
        SweepParam::Q => {
            if !from.is_integer() || !to.is_integer() || from < int(1) {
                return Err(Error::BadRational(format!("q range {from}..{to} must be positive integers")));
            }
            let (a, b) = (from.to_integer(), to.to_integer());
            Ok((a..=b).map(int).collect())
        }
    }
}

pub fn sweep(
    s: &Scenario,
    param: SweepParam,
    from: Rational,
    to: Rational,
    steps: u32,
    opts: &ScanOptions,
) -> Result<Payload> {
    let mut table = Table::new(&[
        "param",
        "value",
        "value_decimal",
        "valid",
        "equilibria",
        "target_unique",
        "expected_expenditure",
        "expected_expenditure_decimal",
        "minimal_delta",
        "minimal_delta_decimal",
        "delta_at_least_minimal",
    ]);
    let name = match param {
        SweepParam::Delta => "delta",
        SweepParam::Q => "q",
    };
    let mut text = String::new();
    for value in sweep_grid(param, from, to, steps)? {
        let mut point = s.clone();
        match param {
            SweepParam::Delta => point.delta = value,
            SweepParam::Q => point.target = value.to_integer() as usize,
        }
        let [v, vd] = exact(&value);
        let violations = validate_scenario(&point);
        if !violations.is_empty() {
            let _ = writeln!(text, "{name}={v}: invalid ({})", violations[0]);
            let mut row = vec![name.to_string(), v, vd, "false".into()];
            row.resize(table.headers.len(), String::new());
            table.push(row);
            continue;
        }
        let report = enumerate_equilibria(&point, opts)?;
        let spent = expected_expenditure(&point, &CountProfile::sigma_star(&point))?;
        let min = minimal_delta(&point)?;
        let at_least = point.delta >= min;
        let _ = writeln!(
            text,
            "{name}={v}: {} equilibria, target unique {}, expected spending {}, minimal delta {}",
            report.equilibria.len(),
            report.sigma_star_unique,
            spent,
            min
        );
        let [e, ed] = exact(&spent);
        let [m, md] = exact(&min);
        table.push(vec![
            name.into(),
            v,
            vd,
            "true".into(),
            report.equilibria.len().to_string(),
            report.sigma_star_unique.to_string(),
            e,
            ed,
            m,
            md,
            at_least.to_string(),
        ]);
    }
    Ok(Payload {
        text,
        table: Some(table),
        claim_failed: false,
    })
}

pub fn sequential(s: &Scenario) -> Result<Payload> {
    let rounds = run_sequential(s, &mut ChaCha8Rng::seed_from_u64(s.seed))?;
    let mut text = String::new();
    let mut table = Table::new(&["round", "district", "expenditure", "expenditure_decimal", "acquired"]);
    for (i, o) in rounds.iter().enumerate() {
        let bought = o.selected.first().copied().unwrap_or_default();
        let _ = writeln!(
            text,
            "round {}: bought district {bought}, spent {}, acquired {}",
            i + 1,
            o.expenditure,
            o.total_acquired()
        );
        let [e, ed] = exact(&o.expenditure);
        table.push(vec![(i + 1).to_string(), bought.to_string(), e, ed, o.total_acquired().to_string()]);
    }
    let total = sequential::total_expenditure(&rounds);
    let acquired: u32 = rounds.iter().map(Outcome::total_acquired).sum();
    let _ = writeln!(text, "total expenditure: {}", describe(&total));
    let _ = writeln!(text, "acquired real ballots: {acquired}");
    Ok(Payload {
        text,
        table: Some(table),
        claim_failed: false,
    })
}

/// All districts pooled into one applicant count.
pub fn pooled(p: &CountProfile) -> ActionCount {
    p.per_district.iter().fold(ActionCount::default(), |a, c| ActionCount {
        real_s1: a.real_s1 + c.real_s1,
        real_s2: a.real_s2 + c.real_s2,
        real_abstain: a.real_abstain + c.real_abstain,
        decoy_s1: a.decoy_s1 + c.decoy_s1,
        decoy_s2: a.decoy_s2 + c.decoy_s2,
        decoy_abstain: a.decoy_abstain + c.decoy_abstain,
    })
}

pub fn commitment(s: &Scenario, p: &CountProfile, opts: &ScanOptions) -> Result<Payload> {
    let g = CommitmentGameSpec::from_scenario(s)?;
    let applicants = pooled(p);
    let o = run_commitment_mechanism(&g, &applicants, &mut ChaCha8Rng::seed_from_u64(s.seed))?;
    let report = verify_commitment_equilibrium(&g, s.total_decoy(), opts)?;
    let mut text = format!("applicants: {applicants}\n");
    let _ = writeln!(
        text,
        "s1 offer: {}{}, winners: {} real, {} decoy; s2 offer: {}",
        o.s1_offer,
        if o.oversubscribed { " (oversubscribed)" } else { "" },
        o.winners_real,
        o.winners_decoy,
        o.s2_offer
    );
    let _ = writeln!(text, "expenditure: {}", describe(&o.expenditure));
    let _ = writeln!(text, "acquired real ballots: {}", o.acquired_real_ballots);
    describe_report(&mut text, &report);
    let mut table = Table::new(&[
        "oversubscribed", "winners_real", "winners_decoy", "expenditure", "expenditure_decimal", "acquired",
        "equilibria", "target_unique",
    ]);
    let [e, ed] = exact(&o.expenditure);
    table.push(vec![
        o.oversubscribed.to_string(),
        o.winners_real.to_string(),
        o.winners_decoy.to_string(),
        e,
        ed,
        o.acquired_real_ballots.to_string(),
        report.equilibria.len().to_string(),
        report.sigma_star_unique.to_string(),
    ]);
    Ok(Payload {
        text,
        table: Some(table),
        claim_failed: false,
    })
}

pub fn lemons(market: &LemonsMarket, deviators: u32, seed: u64, opts: &ScanOptions) -> Result<Payload> {
    let o = run_lemons_with_deviators(market, deviators, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let report = market.verify_equilibrium(opts)?;
    let bought = match o.purchased {
        Some(q) => format!("{q:?}").to_lowercase(),
        None => "none".into(),
    };
    let mut text = format!(
        "{} good, {} bad cars, {deviators} bad owners applying for s1\n",
        market.good, market.bad
    );
    let _ = writeln!(text, "purchased: {bought}");
    if let Some(price) = o.purchase_price {
        let _ = writeln!(text, "purchase price: {price}");
    }
    let _ = writeln!(text, "bad owners paid for s2: {}", o.bad_sellers_paid);
    let _ = writeln!(text, "expenditure: {}", describe(&o.expenditure));
    describe_report(&mut text, &report);
    let mut table = Table::new(&[
        "good", "bad", "deviators", "purchased", "expenditure", "expenditure_decimal", "target_unique",
    ]);
    let [e, ed] = exact(&o.expenditure);
    table.push(vec![
        market.good.to_string(),
        market.bad.to_string(),
        deviators.to_string(),
        bought,
        e,
        ed,
        report.sigma_star_unique.to_string(),
    ]);
    Ok(Payload {
        text,
        table: Some(table),
        claim_failed: false,
    })
}
