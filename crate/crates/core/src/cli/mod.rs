//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a claim that does not
//! hold, 2 on usage or validation errors.

mod commands;
mod families;
mod files;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::equilibrium::ScanOptions;
use crate::error::{Error, Result};
use crate::mechanism::CountProfile;
use crate::model::Scenario;
use crate::rational::{parse_rational, Rational};
use crate::variants::LemonsMarket;

pub use commands::{check_claim, pooled, selection_frequencies, SweepParam};
pub use families::{district_multisets, Claim, Family};
pub use files::{parse_profile_file, parse_scenario, parse_scenario_file, scenario_echo};
pub use report::{exact, Payload, RunReport, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "devils-menu", version, about = "Vote-buying price menus: simulation and exact equilibrium checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value = "on", value_name = "on|off")]
    pub filter_dominated: Toggle,
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub workers: usize,
    /// Largest number of profiles a single scan may visit.
    #[arg(long, default_value_t = ScanOptions::default().scan_cap, value_name = "N")]
    pub scan_cap: u128,
}

impl ScanArgs {
    fn options(&self) -> ScanOptions {
        ScanOptions {
            filter_dominated: self.filter_dominated == Toggle::On,
            scan_cap: self.scan_cap,
            workers: self.workers.max(1),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute the mechanism once on a profile, optionally with Monte Carlo
    /// selection frequencies.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// `sigma-star` or a profile file.
        #[arg(long, default_value = "sigma-star", value_name = "sigma-star|FILE")]
        profile: String,
        /// Number of seeded lottery runs.
        #[arg(long, value_name = "N")]
        mc: Option<u64>,
        #[arg(long, default_value_t = 1, value_name = "N")]
        workers: usize,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// List every pure equilibrium.
    Enumerate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check a claim on a generated family or a scenario file.
    Verify {
        #[arg(long, value_enum)]
        claim: Claim,
        #[arg(long, value_enum, required_unless_present = "scenario", conflicts_with = "scenario")]
        family: Option<Family>,
        #[arg(long, value_name = "PATH")]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Buy one district per round with the sequential weak menu.
    Sequential {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Single-pool commitment mechanism on a `simple-commitment` scenario.
    Commitment {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "sigma-star", value_name = "sigma-star|FILE")]
        profile: String,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Buy one good car from a market of good and bad cars.
    Lemons {
        #[arg(long, value_name = "N")]
        good: u32,
        #[arg(long, value_name = "M")]
        bad: u32,
        /// Bad-car owners applying for slot 1.
        #[arg(long, default_value_t = 0)]
        deviators: u32,
        #[arg(long, default_value = "100", value_parser = parse_rational)]
        value: Rational,
        #[arg(long, default_value = "1", value_parser = parse_rational)]
        epsilon: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Vary delta or q over a grid and tabulate equilibria and spending.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_parser = parse_rational)]
        from: Rational,
        #[arg(long, value_parser = parse_rational)]
        to: Rational,
        #[arg(long, default_value_t = 10)]
        steps: u32,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn load(args: &ScenarioArgs) -> Result<Scenario> {
    let mut s = parse_scenario_file(&args.scenario)?;
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn load_profile(spec: &str, s: &Scenario) -> Result<CountProfile> {
    if spec == "sigma-star" {
        Ok(CountProfile::sigma_star(s))
    } else {
        parse_profile_file(Path::new(spec), s)
    }
}

fn execute(command: Command) -> Result<(RunReport, Option<PathBuf>)> {
    let start = Instant::now();
    let mut report = RunReport {
        command: "",
        seed: None,
        scenario: None,
        payload: Payload::default(),
        wall_time: Default::default(),
    };
    let with_scenario = |report: &mut RunReport, s: &Scenario, seeded: bool| {
        report.scenario = Some(scenario_echo(s));
        report.seed = seeded.then_some(s.seed);
    };
    let out = match command {
        Command::Run {
            scenario,
            profile,
            mc,
            workers,
            out,
        } => {
            report.command = "run";
            let s = load(&scenario)?;
            with_scenario(&mut report, &s, true);
            let p = load_profile(&profile, &s)?;
            report.payload = commands::run(&s, &p, mc, workers)?;
            out
        }
        Command::Enumerate { scenario, scan, out } => {
            report.command = "enumerate";
            let s = load(&scenario)?;
            with_scenario(&mut report, &s, false);
            report.payload = commands::enumerate(&s, &scan.options())?;
            out
        }
        Command::Verify {
            claim,
            family,
            scenario,
            scan,
            out,
        } => {
            report.command = "verify";
            let instances = match (family, scenario) {
                (Some(f), _) => claim.family(f)?,
                (None, Some(path)) => {
                    let s = parse_scenario_file(&path)?;
                    if s.menu != claim.menu() {
                        return Err(Error::UnsupportedMenu {
                            operation: claim.name(),
                            menu: s.menu.to_string(),
                        });
                    }
                    with_scenario(&mut report, &s, false);
                    vec![s]
                }
                (None, None) => unreachable!("clap requires --family or --scenario"),
            };
            report.payload = commands::verify(claim, &instances, &scan.options())?;
            out
        }
        Command::Sequential { scenario, out } => {
            report.command = "sequential";
            let s = load(&scenario)?;
            with_scenario(&mut report, &s, true);
            report.payload = commands::sequential(&s)?;
            out
        }
        Command::Commitment {
            scenario,
            profile,
            scan,
            out,
        } => {
            report.command = "commitment";
            let s = load(&scenario)?;
            with_scenario(&mut report, &s, true);
            let p = load_profile(&profile, &s)?;
            report.payload = commands::commitment(&s, &p, &scan.options())?;
            out
        }
        Command::Lemons {
            good,
            bad,
            deviators,
            value,
            epsilon,
            seed,
            scan,
            out,
        } => {
            report.command = "lemons";
            report.seed = Some(seed);
            let market = LemonsMarket {
                good,
                bad,
                value,
                epsilon,
            };
            report.payload = commands::lemons(&market, deviators, seed, &scan.options())?;
            out
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
            scan,
            out,
        } => {
            report.command = "sweep";
            let s = load(&scenario)?;
            with_scenario(&mut report, &s, false);
            report.payload = commands::sweep(&s, param, from, to, steps, &scan.options())?;
            out
        }
    };
    report.wall_time = start.elapsed();
    Ok((report, out))
}

/// Parses `args` (program name first), runs the subcommand, writes the
/// report to `out` and diagnostics to `err`, and returns the exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let (report, csv_path) = match execute(cli.command) {
        Ok(done) => done,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let _ = write!(out, "{}", report.render());
    if let (Some(path), Some(table)) = (csv_path, &report.payload.table) {
        if let Err(e) = table.save(&path) {
            let _ = writeln!(err, "error: writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if report.payload.claim_failed {
        EXIT_CLAIM_FAILED
    } else {
        EXIT_OK
    }
}
