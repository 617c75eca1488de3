use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use surface_ledger::benefit::break_rate_table;
use surface_ledger::callgraph::{eloc_table, ElocOptions};
use surface_ledger::cve::{suggest_native_rules, FilterConfig, RuleSet};
use surface_ledger::io;
use surface_ledger::ledger::{build_ledger, Coverage};
use surface_ledger::pipeline::{self, Manifest};
use surface_ledger::policy::{
    evaluate_policy, generate_policy, preset, serialize_policy, CostPredicate, PolicyStats,
    DEFAULT_WHITELIST,
};
use surface_ledger::report;
use surface_ledger::scatter::{scatter_csv, CostAxis};
use surface_ledger::{Abbrev, Error, Result};

#[derive(Parser)]
#[command(
    name = "surface-ledger",
    version,
    about = "Cost-benefit accounting for browser Web API standards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Write here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse WebIDL files and assign features to standards.
    Catalog {
        #[arg(long)]
        idl_dir: PathBuf,
        /// interface,standard_name,abbreviation CSV
        #[arg(long)]
        standards: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Exclusive lines of code per standard.
    Eloc {
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        include_third_party: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Filter and attribute CVEs; writes the per-standard tally.
    Cves {
        #[arg(long)]
        cves: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        /// Discard keywords, one per line.
        #[arg(long)]
        discard: Option<PathBuf>,
        #[arg(long)]
        year_floor: Option<u16>,
        /// Also write per-CVE attribution results (JSON lines).
        #[arg(long)]
        attributions: Option<PathBuf>,
        /// Also write suggested native-symbol rules (needs --nodes/--edges).
        #[arg(long, requires_all = ["nodes", "edges"])]
        suggest_rules: Option<PathBuf>,
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Agreement and usage-weighted break rates from paired site tests.
    Benefit {
        #[arg(long)]
        tests: PathBuf,
        #[arg(long)]
        usage: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Fuse the stage outputs into the per-standard ledger.
    Score {
        #[arg(long)]
        catalog: PathBuf,
        /// JSON output of `eloc`
        #[arg(long)]
        eloc: PathBuf,
        /// JSON output of `cves`
        #[arg(long)]
        tally: PathBuf,
        /// JSON output of `benefit`
        #[arg(long)]
        breaks: PathBuf,
        #[arg(long)]
        attacks: PathBuf,
        #[arg(long, conflicts_with = "lenient")]
        strict: bool,
        #[arg(long)]
        lenient: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Generate, evaluate and validate blocking policies
    #[command(subcommand)]
    Policy(PolicyCommand),
    /// Cost-versus-break-rate points for plotting.
    Scatter {
        /// JSON ledger
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long, default_value = "cve")]
        x: String,
        #[command(flatten)]
        output: Output,
    },
    /// Run every stage from a manifest and write all outputs to a directory.
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        include_third_party: bool,
        #[arg(long)]
        year_floor: Option<u16>,
        #[arg(long, conflicts_with = "lenient")]
        strict: bool,
        #[arg(long)]
        lenient: bool,
    },
}

#[derive(Subcommand)]
enum PolicyCommand {
    /// Generate a policy from break-rate and cost thresholds.
    Gen {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long, default_value = "generated")]
        name: String,
        /// Highest weighted break rate to block, compared at whole-percent resolution.
        #[arg(long)]
        max_break_rate: f64,
        #[arg(long, group = "cost")]
        min_cves: Option<u32>,
        #[arg(long, group = "cost")]
        min_eloc_share: Option<f64>,
        #[arg(long, group = "cost")]
        min_attacks: Option<u32>,
        /// Comma-separated; replaces the default whitelist.
        #[arg(long, value_delimiter = ',')]
        whitelist: Option<Vec<String>>,
        #[command(flatten)]
        output: Output,
    },
    /// Cost and benefit statistics of a policy.
    Eval {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        ledger: PathBuf,
        /// Attribution results written by `cves --attributions`.
        #[arg(long)]
        attributions: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Print a shipped preset (conservative or aggressive).
    Preset {
        name: String,
        #[command(flatten)]
        output: Output,
    },
    /// Validate a policy document, optionally against a catalog.
    Check {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

fn format_of(output: &Output, allowed: &[Format], default: Format) -> Result<Format> {
    let f = output.format.unwrap_or(default);
    if !allowed.contains(&f) {
        let name = if f == Format::Csv { "csv" } else { "json" };
        return Err(Error::Usage(format!(
            "--format {name} is not supported by this subcommand"
        )));
    }
    Ok(f)
}

fn emit(output: &Output, text: String, extra: Vec<(PathBuf, Vec<u8>)>) -> Result<()> {
    let mut files = extra;
    match &output.out {
        Some(p) => files.push((p.clone(), text.into_bytes())),
        None => {
            io::write_outputs(&files)?;
            print!("{text}");
            return Ok(());
        }
    }
    io::write_outputs(&files)
}

fn coverage(lenient: bool) -> Coverage {
    if lenient {
        Coverage::Lenient
    } else {
        Coverage::Strict
    }
}

fn filter_config(discard: Option<&Path>, year_floor: Option<u16>) -> Result<FilterConfig> {
    let mut f = FilterConfig::default();
    if let Some(d) = discard {
        f.discard_keywords = io::load_discard_keywords(d)?;
    }
    if let Some(y) = year_floor {
        f.year_floor = y;
    }
    Ok(f)
}

fn run(cli: Cli) -> Result<()> {
    use Format::{Csv, Json};
    match cli.command {
        Command::Catalog {
            idl_dir,
            standards,
            output,
        } => {
            format_of(&output, &[Json], Json)?;
            let catalog = io::load_catalog_from_idl(&idl_dir, &standards)?;
            emit(&output, catalog.to_json(), vec![])
        }
        Command::Eloc {
            nodes,
            edges,
            catalog,
            include_third_party,
            output,
        } => {
            let f = format_of(&output, &[Csv, Json], Csv)?;
            let catalog = io::load_catalog_json(&catalog)?;
            let graph = io::load_graph(&nodes, &edges)?;
            let rows = eloc_table(
                &graph,
                &catalog,
                ElocOptions {
                    include_third_party,
                },
            )?;
            let text = match f {
                Csv => report::eloc_csv(&rows),
                Json => io::to_json_pretty(&rows),
            };
            emit(&output, text, vec![])
        }
        Command::Cves {
            cves,
            rules,
            catalog,
            discard,
            year_floor,
            attributions,
            suggest_rules,
            nodes,
            edges,
            output,
        } => {
            let f = format_of(&output, &[Csv, Json], Csv)?;
            let catalog = io::load_catalog_json(&catalog)?;
            let records = io::load_cves(&cves)?;
            let rules = io::load_rules(&rules, &catalog)?;
            let filter = filter_config(discard.as_deref(), year_floor)?;
            let mut extra = Vec::new();
            if let (Some(path), Some(n), Some(e)) = (&suggest_rules, &nodes, &edges) {
                let graph = io::load_graph(n, e)?;
                let suggested = suggest_native_rules(&graph, &catalog, &records)?;
                extra.push((path.clone(), RuleSet::to_csv(&suggested).into_bytes()));
            }
            let (results, tally) = pipeline::run_cves(&catalog, records, &rules, &filter)?;
            if let Some(path) = attributions {
                extra.push((path, io::attributions_jsonl(&results).into_bytes()));
            }
            let text = match f {
                Csv => report::tally_csv(&tally),
                Json => io::to_json_pretty(&tally),
            };
            emit(&output, text, extra)
        }
        Command::Benefit {
            tests,
            usage,
            output,
        } => {
            let f = format_of(&output, &[Csv, Json], Csv)?;
            let tests = io::load_site_tests(&tests)?;
            let usage = io::load_usage(&usage)?;
            let rows = break_rate_table(&tests, &usage)?;
            let text = match f {
                Csv => report::break_rates_csv(&rows),
                Json => io::to_json_pretty(&rows),
            };
            emit(&output, text, vec![])
        }
        Command::Score {
            catalog,
            eloc,
            tally,
            breaks,
            attacks,
            lenient,
            output,
            ..
        } => {
            let f = format_of(&output, &[Csv, Json], Csv)?;
            let catalog = io::load_catalog_json(&catalog)?;
            let eloc = io::load_eloc_json(&eloc)?;
            let tally = io::load_tally_json(&tally)?;
            let breaks = io::load_break_rates_json(&breaks)?;
            let attacks = io::load_attacks(&attacks)?;
            let ledger = build_ledger(
                &catalog,
                &eloc,
                &tally,
                &breaks,
                &attacks,
                coverage(lenient),
            )?;
            let text = match f {
                Csv => ledger.to_csv(),
                Json => ledger.to_json(),
            };
            emit(&output, text, vec![])
        }
        Command::Policy(p) => run_policy(p),
        Command::Scatter { ledger, x, output } => {
            format_of(&output, &[Csv], Csv)?;
            let axis: CostAxis = x.parse().map_err(Error::Usage)?;
            let ledger = io::load_ledger_json(&ledger)?;
            emit(&output, scatter_csv(&ledger, axis), vec![])
        }
        Command::Pipeline {
            manifest,
            out_dir,
            include_third_party,
            year_floor,
            lenient,
            ..
        } => {
            let mut m = Manifest::load(&manifest)?;
            m.include_third_party |= include_third_party;
            m.lenient |= lenient;
            if year_floor.is_some() {
                m.year_floor = year_floor;
            }
            let files = pipeline::run(&m)?.render()?;
            let files: Vec<_> = files
                .into_iter()
                .map(|(p, b)| (out_dir.join(p), b))
                .collect();
            io::write_outputs(&files)?;
            for (p, _) in &files {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn run_policy(cmd: PolicyCommand) -> Result<()> {
    use Format::{Csv, Json};
    match cmd {
        PolicyCommand::Gen {
            ledger,
            name,
            max_break_rate,
            min_cves,
            min_eloc_share,
            min_attacks,
            whitelist,
            output,
        } => {
            format_of(&output, &[Json], Json)?;
            if !(0.0..=1.0).contains(&max_break_rate) {
                return Err(Error::Usage("--max-break-rate must lie in [0, 1]".into()));
            }
            let predicate = match (min_cves, min_eloc_share, min_attacks) {
                (Some(n), _, _) => CostPredicate::MinCves(n),
                (_, Some(x), _) if (0.0..=1.0).contains(&x) => CostPredicate::MinElocShare(x),
                (_, Some(_), _) => {
                    return Err(Error::Usage("--min-eloc-share must lie in [0, 1]".into()))
                }
                (_, _, Some(n)) => CostPredicate::MinAttacks(n),
                _ => {
                    return Err(Error::Usage(
                        "one of --min-cves, --min-eloc-share, --min-attacks is required".into(),
                    ))
                }
            };
            let whitelist: BTreeSet<Abbrev> = match whitelist {
                None => DEFAULT_WHITELIST.iter().map(|&a| Abbrev::from(a)).collect(),
                Some(list) => list
                    .iter()
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        Abbrev::new(s.as_str())
                            .ok_or_else(|| Error::Usage(format!("bad abbreviation {s:?}")))
                    })
                    .collect::<Result<_>>()?,
            };
            let ledger = io::load_ledger_json(&ledger)?;
            let policy = generate_policy(&name, &ledger, max_break_rate, predicate, &whitelist);
            policy.validate()?;
            emit(&output, serialize_policy(&policy), vec![])
        }
        PolicyCommand::Eval {
            policy,
            ledger,
            attributions,
            output,
        } => {
            let f = format_of(&output, &[Csv, Json], Csv)?;
            let policy = io::load_policy(&policy)?;
            let ledger = io::load_ledger_json(&ledger)?;
            let attributions = io::load_attributions(&attributions)?;
            let stats = evaluate_policy(&policy, &ledger, &attributions)?;
            let text = match f {
                Csv => format!(
                    "{}\n{}",
                    PolicyStats::CSV_HEADER,
                    stats.csv_row(&policy.name)
                ),
                Json => io::to_json_pretty(&stats),
            };
            emit(&output, text, vec![])
        }
        PolicyCommand::Preset { name, output } => {
            format_of(&output, &[Json], Json)?;
            emit(&output, serialize_policy(&preset(&name)?), vec![])
        }
        PolicyCommand::Check { policy, catalog } => {
            let p = io::load_policy(&policy)?;
            if let Some(c) = catalog {
                let catalog = io::load_catalog_json(&c)?;
                if let Some(a) = p
                    .mentioned()
                    .into_iter()
                    .find(|a| !catalog.contains(a.as_str()))
                {
                    return Err(Error::at(&policy, format!("unknown standard {a}")));
                }
            }
            println!("ok {} ({} blocked)", p.name, p.blocked.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
