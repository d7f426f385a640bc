//! Command-line front end. Exit codes: 0 success, 1 runtime error, 2 usage
//! error.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use qkd2e_core::info::ErrorModel;
use qkd2e_core::protocol::{wigner_config, Channel, Session, SessionConfig};
use qkd2e_core::strategy::{EavesdropConfig, FixedChoice, Strategy};
use qkd2e_core::wigner::WignerSettings;

use crate::jsonl::write_records;
use crate::manifest::{RunManifest, ScenarioConfig, ScenarioSpec};
use crate::output::{sibling, sink, write_csv, write_json, Format};
use crate::runner::{run_parallel, summarize_parallel};
use crate::scenario::{run_scenario, ScenarioName};
use crate::so4::so4_report;
use crate::summary::{bb84_report, ekert_report};
use crate::tables::full_table;
use crate::threshold::{sweep_rows, threshold_report, SimulationRequest};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "qkd2e", version, about = "Key distribution over polarisation and time-bin entangled photon pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded session; writes a summary and, with --out, a JSON Lines log.
    Simulate(SimulateArgs),
    /// Closed-form attack analytics next to the published figures.
    PaperTable(PaperTableArgs),
    /// Wigner-test interception thresholds and the W(η) sweep.
    Wigner(WignerArgs),
    /// Paired SO(2)/SO(4) random-rotation attack.
    So4(So4Args),
    /// Run one named scenario and report its checks.
    Scenario(ScenarioArgs),
    /// Run every scenario and report into a directory with a manifest.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Bb84x2,
    EkertWigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    SinglePol,
    SinglePhase,
    Double,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::SinglePol => Channel::SinglePol,
            ChannelArg::SinglePhase => Channel::SinglePhase,
            ChannelArg::Double => Channel::Double,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EveArg {
    None,
    FixedBasis,
    Breidbart,
    /// Haar-random rotation: SO(4) on the double channel, SO(2) on a single one.
    So4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixedChoiceArg {
    PerSession,
    PerPair,
    /// Always the first basis, which is the key basis.
    Key,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Cascade,
    Physical,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "QKD2E_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ProtocolArg::Bb84x2)]
    pub protocol: ProtocolArg,
    #[arg(long, value_enum, default_value_t = ChannelArg::Double)]
    pub channel: ChannelArg,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: u64,
    #[arg(long, value_enum, default_value_t = EveArg::None)]
    pub eve: EveArg,
    /// Fraction of pairs Eve intercepts.
    #[arg(long, default_value_t = 1.0, value_parser = parse_probability)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = FixedChoiceArg::PerSession)]
    pub fixed_choice: FixedChoiceArg,
    /// Wigner settings χ,ψ,ω in degrees (ekert-wigner only).
    #[arg(long, value_parser = parse_angles)]
    pub angles: Option<[f64; 3]>,
    /// Detection efficiency per photon path.
    #[arg(long, default_value_t = 1.0, value_parser = parse_probability)]
    pub efficiency: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PaperTableArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    /// χ,ψ,ω in degrees.
    #[arg(long, value_parser = parse_angles, default_value = "0,30,60")]
    pub angles: [f64; 3],
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    pub rel_uncertainty: f64,
    /// Interception fraction for the reported point and the simulation.
    #[arg(long, default_value_t = 0.0, value_parser = parse_probability)]
    pub eta: f64,
    /// Also estimate W by Monte Carlo with this many pairs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: Option<u64>,
    #[arg(long, value_enum, default_value_t = ChannelArg::SinglePol)]
    pub channel: ChannelArg,
    #[arg(long, default_value_t = 1.0, value_parser = parse_probability)]
    pub efficiency: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct So4Args {
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: u64,
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: u32,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(value_enum)]
    pub name: ScenarioName,
    /// Pairs per Monte Carlo arm; 0 skips the simulated checks.
    #[arg(long)]
    pub pairs: Option<u64>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Report file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is not in [0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not a positive number"))
    }
}

fn parse_angles(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> =
        s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"))).collect::<Result<_, _>>()?;
    let angles: [f64; 3] = parts.try_into().map_err(|v: Vec<f64>| format!("expected 3 angles, got {}", v.len()))?;
    if angles.iter().all(|a| a.is_finite()) {
        Ok(angles)
    } else {
        Err("angles must be finite".to_string())
    }
}

fn strategy(eve: EveArg, choice: FixedChoiceArg, channel: Channel) -> Strategy {
    match eve {
        EveArg::None => Strategy::None,
        EveArg::FixedBasis => Strategy::FixedBasis {
            choice: match choice {
                FixedChoiceArg::PerSession => FixedChoice::PerSession,
                FixedChoiceArg::PerPair => FixedChoice::PerPair,
                FixedChoiceArg::Key => FixedChoice::Selected { pol: 0, phase: 0 },
            },
        },
        EveArg::Breidbart => Strategy::Breidbart,
        EveArg::So4 => Strategy::random_rotation_for(channel),
    }
}

fn simulate_config(args: &SimulateArgs) -> (SessionConfig, Option<WignerSettings>) {
    let channel = Channel::from(args.channel);
    let (mut cfg, settings) = match args.protocol {
        ProtocolArg::Bb84x2 => (SessionConfig::bb84x2(channel, args.pairs, args.seed.seed), None),
        ProtocolArg::EkertWigner => {
            let [c, p, o] = args.angles.unwrap_or([0.0, 30.0, 60.0]);
            let s = WignerSettings::from_degrees(c, p, o);
            (SessionConfig::ekert_wigner(channel, args.pairs, args.seed.seed, &s), Some(s))
        }
    };
    cfg = cfg.with_efficiency(args.efficiency);
    if args.eve != EveArg::None {
        cfg = cfg.with_eve(EavesdropConfig::new(strategy(args.eve, args.fixed_choice, channel), args.eta));
    }
    (cfg, settings)
}

/// Writes the simulate summary, plus the JSON Lines log when `out` is set.
fn simulate(args: &SimulateArgs) -> Result<()> {
    let (cfg, settings) = simulate_config(args);
    let out = args.output.out.as_deref();
    let report = match settings {
        Some(s) => {
            let session = Session::prepare(wigner_config(cfg, &s)?)?;
            let log = run_parallel(&session)?;
            if let Some(path) = out {
                write_records(&log.records, sink(Some(&sibling(path, "", "jsonl")))?)?;
            }
            ekert_report(&log, &s)?
        }
        None => {
            let session = Session::prepare(cfg)?;
            if let Some(path) = out {
                let log = run_parallel(&session)?;
                write_records(&log.records, sink(Some(&sibling(path, "", "jsonl")))?)?;
                let mut summary = qkd2e_core::protocol::SessionSummary::new(&log.meta);
                for r in &log.records {
                    summary.add(r);
                }
                bb84_report(log.meta, &summary)
            } else {
                bb84_report(session.meta(), &summarize_parallel(&session)?)
            }
        }
    };
    match args.output.format {
        Format::Json => write_json(&report, out),
        Format::Csv => write_csv(&report.rows, out),
    }
}

fn paper_table(model: Option<ModelArg>, format: Format, out: Option<&Path>) -> Result<()> {
    let model = model.map(|m| match m {
        ModelArg::Cascade => ErrorModel::Cascade,
        ModelArg::Physical => ErrorModel::Physical,
    });
    let table = full_table(model)?;
    match format {
        Format::Json => write_json(&table, out),
        Format::Csv => {
            write_csv(&table.rows, out)?;
            if let Some(path) = out {
                write_csv(&table.ratios, Some(&sibling(path, "_ratios", "csv")))?;
            }
            Ok(())
        }
    }
}

fn wigner(args: &WignerArgs) -> Result<()> {
    let simulate = args.pairs.map(|pairs| SimulationRequest {
        pairs,
        seed: args.seed.seed,
        channel: args.channel.into(),
        efficiency: args.efficiency,
    });
    let report = threshold_report(args.angles, args.rel_uncertainty, args.eta, simulate)?;
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(&report, out),
        Format::Csv => write_csv(&sweep_rows(&report), out),
    }
}

fn so4(args: &So4Args) -> Result<()> {
    let report = so4_report(args.pairs, args.seed.seed, args.bootstrap)?;
    let out = args.output.out.as_deref();
    match args.output.format {
        Format::Json => write_json(&report, out),
        Format::Csv => write_csv(&report.arms, out),
    }
}

/// Runs every scenario and the standard reports into `dir`.
pub fn reproduce(dir: &Path, seed: u64) -> Result<RunManifest> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut manifest = RunManifest::new(seed);
    let mut add = |name: &str, config: ScenarioConfig, file: &str, format: Format| {
        manifest.push(ScenarioSpec { name: name.to_string(), config, output_path: file.to_string(), format })
    };

    paper_table(None, Format::Csv, Some(&dir.join("paper_table.csv")))?;
    add("paper-table", ScenarioConfig::PaperTable { model: None }, "paper_table.csv", Format::Csv)?;
    paper_table(None, Format::Json, Some(&dir.join("paper_table.json")))?;
    add("paper-table-json", ScenarioConfig::PaperTable { model: None }, "paper_table.json", Format::Json)?;

    let wigner_args = WignerArgs {
        angles: [0.0, 30.0, 60.0],
        rel_uncertainty: 0.1,
        eta: 0.0,
        pairs: None,
        channel: ChannelArg::SinglePol,
        efficiency: 1.0,
        seed: SeedArg { seed },
        output: OutputArgs { out: Some(dir.join("wigner_sweep.csv")), format: Format::Csv },
    };
    wigner(&wigner_args)?;
    let wigner_config = ScenarioConfig::Wigner {
        angles_deg: wigner_args.angles,
        rel_uncertainty: wigner_args.rel_uncertainty,
        eta: wigner_args.eta,
        pairs: None,
        channel: Channel::SinglePol,
        efficiency: 1.0,
    };
    add("wigner-sweep", wigner_config, "wigner_sweep.csv", Format::Csv)?;

    let sim = SimulateArgs {
        protocol: ProtocolArg::Bb84x2,
        channel: ChannelArg::Double,
        pairs: 100_000,
        eve: EveArg::Breidbart,
        eta: 1.0,
        fixed_choice: FixedChoiceArg::PerSession,
        angles: None,
        efficiency: 1.0,
        seed: SeedArg { seed },
        output: OutputArgs { out: Some(dir.join("breidbart_run.json")), format: Format::Json },
    };
    simulate(&sim)?;
    add("breidbart-run", ScenarioConfig::Session(simulate_config(&sim).0), "breidbart_run.json", Format::Json)?;

    so4(&So4Args {
        pairs: 200_000,
        bootstrap: 1000,
        seed: SeedArg { seed },
        output: OutputArgs { out: Some(dir.join("so4.json")), format: Format::Json },
    })?;
    add("so4", ScenarioConfig::So4 { pairs: 200_000, bootstrap: 1000 }, "so4.json", Format::Json)?;

    for name in ScenarioName::ALL {
        let report = run_scenario(name, seed, None)?;
        let file = format!("scenario_{}.json", name.as_str().replace('-', "_"));
        write_json(&report, Some(&dir.join(&file)))?;
        add(name.as_str(), ScenarioConfig::Scenario { scenario: name, pairs: report.pairs }, &file, Format::Json)?;
    }

    write_json(&manifest, Some(&dir.join("manifest.json")))?;
    Ok(manifest)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::PaperTable(args) => paper_table(args.model, args.output.format, args.output.out.as_deref()),
        Command::Wigner(args) => wigner(&args),
        Command::So4(args) => so4(&args),
        Command::Scenario(args) => {
            let report = run_scenario(args.name, args.seed.seed, args.pairs)?;
            write_json(&report, args.out.as_deref())
        }
        Command::Reproduce(args) => reproduce(&args.out_dir, args.seed.seed).map(|_| ()),
    }
}

/// Usage problems that only show up once flags are combined.
fn check_usage(cli: &Cli) -> Result<(), clap::Error> {
    if let Command::Simulate(args) = &cli.command {
        if args.angles.is_some() && args.protocol == ProtocolArg::Bb84x2 {
            return Err(
                Cli::command().error(ErrorKind::ArgumentConflict, "--angles applies to --protocol ekert-wigner")
            );
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args).and_then(|cli| check_usage(&cli).map(|()| cli)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn main() -> i32 {
    main_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn angle_parsing() {
        assert_eq!(parse_angles("0, 30,60"), Ok([0.0, 30.0, 60.0]));
        assert!(parse_angles("0,30").is_err());
        assert!(parse_angles("0,30,x").is_err());
        assert!(parse_angles("0,30,inf").is_err());
    }

    #[test]
    fn probability_parsing() {
        assert_eq!(parse_probability("0.25"), Ok(0.25));
        assert!(parse_probability("1.5").is_err());
        assert!(parse_probability("NaN").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with(["qkd2e", "simulate", "--eta", "2"]), 2);
        assert_eq!(main_with(["qkd2e", "simulate", "--pairs", "0"]), 2);
        assert_eq!(main_with(["qkd2e", "wigner", "--angles", "0,30"]), 2);
        assert_eq!(main_with(["qkd2e", "simulate", "--angles", "0,30,60"]), 2);
        assert_eq!(main_with(["qkd2e", "bogus"]), 2);
    }

    #[test]
    fn so4_on_single_channel_uses_so2() {
        let args = Cli::try_parse_from(["qkd2e", "simulate", "--channel", "single-pol", "--eve", "so4"]).unwrap();
        let Command::Simulate(a) = args.command else { panic!() };
        let (cfg, _) = simulate_config(&a);
        assert_eq!(cfg.eve.unwrap().strategy, Strategy::RandomRotation { dim: 2 });
    }
}
