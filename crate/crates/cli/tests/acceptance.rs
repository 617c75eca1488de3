//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/support/graphs.rs"]
mod graphs;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use graphs::{random_graph, GraphSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use surface_ledger::callgraph::oracle::oracle_exclusive;
use surface_ledger::callgraph::{
    exclusive_functions, exclusive_functions_with, exclusive_loc, ElocOptions, NodeId,
};
use surface_ledger::fixture_dir;
use surface_ledger::io;
use surface_ledger::pipeline::{run, Manifest, PipelineRun};
use surface_ledger::policy::evaluate_policy;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let r = f();
    let took = start.elapsed();
    match r {
        Ok(d) if took <= limit => Ok(format!("{d}; {took:.2?} (limit {limit:?})")),
        Ok(d) => Err(format!("{d}; too slow: {took:.2?} (limit {limit:?})")),
        Err(d) => Err(d),
    }
}

fn battery() -> Outcome {
    let dir = fixture_dir().join("battery");
    let g = io::load_graph(&dir.join("nodes.csv"), &dir.join("edges.csv"))
        .map_err(|e| e.to_string())?;
    let set = exclusive_functions(&g, "BA", None).map_err(|e| e.to_string())?;
    let want: BTreeSet<NodeId> = ["I_charging", "I_chargingTime", "I_dischargingTime"]
        .map(NodeId::from)
        .into();
    let eloc = exclusive_loc(&g, "BA", None, ElocOptions::default()).map_err(|e| e.to_string())?;
    check(
        set == want && eloc == 60,
        format!(
            "exclusive {:?}, eloc {eloc} (want 3 battery functions, 60)",
            set.iter().map(|n| n.0.as_str()).collect::<Vec<_>>()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut compared = 0;
    for seed in 0..100u64 {
        let g = random_graph(&mut StdRng::seed_from_u64(seed), &GraphSpec::default());
        let mut claimed: BTreeSet<NodeId> = BTreeSet::new();
        for s in g.bound_standards() {
            let got = exclusive_functions(&g, s.as_str(), None).map_err(|e| e.to_string())?;
            let want = oracle_exclusive(&g, s.as_str(), None).map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!(
                    "seed {seed} standard {s}: pruning {got:?} oracle {want:?}"
                ));
            }
            if let Some(dup) = got.iter().find(|id| claimed.contains(*id)) {
                return Err(format!("seed {seed}: {dup} exclusive to two standards"));
            }
            claimed.extend(got);
            compared += 1;
        }
    }
    Ok(format!(
        "100 graphs, {compared} standard sets equal to oracle and disjoint"
    ))
}

fn fixpoint_determinism() -> Outcome {
    for seed in 0..10u64 {
        let g = random_graph(
            &mut StdRng::seed_from_u64(500 + seed),
            &GraphSpec::default(),
        );
        for s in g.bound_standards() {
            let reference = exclusive_functions(&g, s.as_str(), None).map_err(|e| e.to_string())?;
            for order in 0..20u64 {
                let mut rng = StdRng::seed_from_u64(seed * 1000 + order);
                let got =
                    exclusive_functions_with(&g, s.as_str(), None, &mut |n| rng.gen_range(0..n))
                        .map_err(|e| e.to_string())?;
                if got != reference {
                    return Err(format!("graph {seed} standard {s} order {order} differs"));
                }
            }
        }
    }
    Ok("10 graphs x 20 worklist orders identical".into())
}

fn presets(run: &PipelineRun) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, eloc_target, cve_target) in
        [("conservative", 0.50, 0.52), ("aggressive", 0.7076, 0.719)]
    {
        let p = io::load_policy(&fixture_dir().join(format!("policies/{name}.json")))
            .map_err(|e| e.to_string())?;
        let s = evaluate_policy(&p, &run.ledger, &run.attributions).map_err(|e| e.to_string())?;
        ok &= (s.eloc_fraction - eloc_target).abs() <= 0.02
            && (s.cve_fraction - cve_target).abs() <= 0.03;
        lines.push(format!(
            "{name}: {} blocked, eloc {:.4} (target {eloc_target}±0.02), cve {}/{} = {:.4} (target {cve_target}±0.03), est break sum {:.4}",
            s.standards_blocked, s.eloc_fraction, s.cve_covered, s.cve_total, s.cve_fraction, s.est_break_rate_sum
        ));
    }
    check(ok, lines.join("; "))
}

#[derive(serde::Deserialize)]
struct SummaryRow {
    abbreviation: String,
    site_break_rate: String,
    cves: u32,
    high_or_severe: u32,
}

fn summary_table() -> Result<BTreeMap<String, SummaryRow>, String> {
    let mut rdr =
        csv::Reader::from_path(fixture_dir().join("summary.csv")).map_err(|e| e.to_string())?;
    rdr.deserialize::<SummaryRow>()
        .map(|r| {
            r.map(|r| (r.abbreviation.clone(), r))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn cell_matches(cell: &str, w: f64) -> bool {
    match cell {
        "0%" => w == 0.0,
        "<1%" => w > 0.0 && w < 0.005,
        n => n
            .trim_end_matches('%')
            .parse::<f64>()
            .is_ok_and(|p| (w * 100.0).round() == p),
    }
}

fn benefit(run: &PipelineRun) -> Outcome {
    let mut by_pair: HashMap<(String, String), Vec<String>> = HashMap::new();
    let mut rdr = csv::Reader::from_path(fixture_dir().join("benefit/site_tests.csv"))
        .map_err(|e| e.to_string())?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        by_pair
            .entry((rec[0].to_string(), rec[1].to_string()))
            .or_default()
            .push(rec[3].to_string());
    }
    let agreement = by_pair.values().filter(|s| s[0] == s[1]).count() as f64 / by_pair.len() as f64;
    let table = summary_table()?;
    let mismatched: Vec<String> = run
        .ledger
        .rows
        .iter()
        .filter(|r| {
            let want = &table[r.abbreviation.as_str()].site_break_rate;
            !r.weighted_break_rate.is_some_and(|w| cell_matches(want, w))
        })
        .map(|r| r.abbreviation.to_string())
        .collect();
    let lib = run
        .break_rates
        .iter()
        .map(|r| (r.paired_sites - r.disputed) as f64)
        .sum::<f64>()
        / run
            .break_rates
            .iter()
            .map(|r| r.paired_sites as f64)
            .sum::<f64>();
    check(
        (agreement - 0.9674).abs() <= 0.0005 && (lib - agreement).abs() < 1e-12 && mismatched.is_empty(),
        format!(
            "agreement {agreement:.6} over {} pairs (target 0.9674±0.0005); {} of {} break cells match{}",
            by_pair.len(),
            run.ledger.rows.len() - mismatched.len(),
            run.ledger.rows.len(),
            if mismatched.is_empty() { String::new() } else { format!(", mismatched {mismatched:?}") }
        ),
    )
}

fn cve_tally(run: &PipelineRun) -> Outcome {
    let spot = [
        ("WEBGL", 31, 22),
        ("H-WW", 16, 9),
        ("WRTC", 15, 4),
        ("H-C", 14, 6),
        ("SVG", 13, 10),
        ("WEBA", 10, 5),
    ];
    let mut bad = Vec::new();
    for (a, cves, hs) in spot {
        let c = run.tally.per_standard.get(a).copied().unwrap_or_default();
        if (c.cve_count, c.high_or_severe_count) != (cves, hs) {
            bad.push(format!(
                "{a} {}/{} want {cves}/{hs}",
                c.cve_count, c.high_or_severe_count
            ));
        }
    }
    let table = summary_table()?;
    let rows_match = table.values().filter(|m| {
        run.tally
            .per_standard
            .get(m.abbreviation.as_str())
            .is_some_and(|c| (c.cve_count, c.high_or_severe_count) == (m.cves, m.high_or_severe))
    });
    let rows_match = rows_match.count();
    let fr = run.tally.route_fractions();
    let sum: f64 = fr.iter().map(|(_, f)| f).sum();
    let partition = run.tally.primary_routes.values().sum::<u32>() == run.tally.attributed_total;
    let routes: Vec<String> = fr.iter().map(|(r, f)| format!("{r} {f:.3}")).collect();
    check(
        bad.is_empty() && partition && (sum - 1.0).abs() < 1e-12,
        format!(
            "spot rows {}; {rows_match}/{} rows match; {} attributed; routes {} (sum {sum})",
            if bad.is_empty() {
                "WEBGL 31/22, H-WW 16/9, WRTC 15/4, H-C 14/6, SVG 13/10, WEBA 10/5 exact"
                    .to_string()
            } else {
                bad.join(", ")
            },
            table.len(),
            run.tally.attributed_total,
            routes.join(", ")
        ),
    )
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_surface-ledger"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(out.stdout)
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(base).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Runs every subcommand into `dir`; returns the captured stdout per step.
fn run_all(dir: &Path) -> Result<Vec<Vec<u8>>, String> {
    let fx = fixture_dir();
    let f = |p: &str| fx.join(p).to_string_lossy().into_owned();
    let o = |p: &str| dir.join(p).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "catalog".into(),
            "--idl-dir".into(),
            f("idl"),
            "--standards".into(),
            f("standards.csv"),
            "--out".into(),
            o("catalog.json"),
        ],
        vec![
            "eloc".into(),
            "--nodes".into(),
            f("callgraph/nodes.csv"),
            "--edges".into(),
            f("callgraph/edges.csv"),
            "--catalog".into(),
            o("catalog.json"),
            "--format".into(),
            "json".into(),
            "--out".into(),
            o("eloc.json"),
        ],
        vec![
            "eloc".into(),
            "--nodes".into(),
            f("callgraph/nodes.csv"),
            "--edges".into(),
            f("callgraph/edges.csv"),
            "--catalog".into(),
            o("catalog.json"),
            "--include-third-party".into(),
        ],
        vec![
            "cves".into(),
            "--cves".into(),
            f("cves/cves.jsonl"),
            "--rules".into(),
            f("cves/rules.csv"),
            "--catalog".into(),
            o("catalog.json"),
            "--discard".into(),
            f("cves/discard.txt"),
            "--year-floor".into(),
            "2010".into(),
            "--format".into(),
            "json".into(),
            "--out".into(),
            o("tally.json"),
            "--attributions".into(),
            o("attributions.jsonl"),
            "--suggest-rules".into(),
            o("suggested_rules.csv"),
            "--nodes".into(),
            f("callgraph/nodes.csv"),
            "--edges".into(),
            f("callgraph/edges.csv"),
        ],
        vec![
            "cves".into(),
            "--cves".into(),
            f("cves/cves.jsonl"),
            "--rules".into(),
            f("cves/rules.csv"),
            "--catalog".into(),
            o("catalog.json"),
        ],
        vec![
            "benefit".into(),
            "--tests".into(),
            f("benefit/site_tests.csv"),
            "--usage".into(),
            f("benefit/usage.csv"),
            "--format".into(),
            "json".into(),
            "--out".into(),
            o("breaks.json"),
        ],
        vec![
            "benefit".into(),
            "--tests".into(),
            f("benefit/site_tests.csv"),
            "--usage".into(),
            f("benefit/usage.csv"),
        ],
        vec![
            "score".into(),
            "--catalog".into(),
            o("catalog.json"),
            "--eloc".into(),
            o("eloc.json"),
            "--tally".into(),
            o("tally.json"),
            "--breaks".into(),
            o("breaks.json"),
            "--attacks".into(),
            f("attacks.csv"),
            "--strict".into(),
            "--format".into(),
            "json".into(),
            "--out".into(),
            o("ledger.json"),
        ],
        vec![
            "score".into(),
            "--catalog".into(),
            o("catalog.json"),
            "--eloc".into(),
            o("eloc.json"),
            "--tally".into(),
            o("tally.json"),
            "--breaks".into(),
            o("breaks.json"),
            "--attacks".into(),
            f("attacks.csv"),
            "--lenient".into(),
            "--out".into(),
            o("ledger.csv"),
        ],
        vec![
            "policy".into(),
            "gen".into(),
            "--ledger".into(),
            o("ledger.json"),
            "--max-break-rate".into(),
            "0".into(),
            "--min-cves".into(),
            "10".into(),
            "--out".into(),
            o("generated.json"),
        ],
        vec![
            "policy".into(),
            "eval".into(),
            "--policy".into(),
            f("policies/conservative.json"),
            "--ledger".into(),
            o("ledger.json"),
            "--attributions".into(),
            o("attributions.jsonl"),
        ],
        vec![
            "policy".into(),
            "eval".into(),
            "--policy".into(),
            o("generated.json"),
            "--ledger".into(),
            o("ledger.json"),
            "--attributions".into(),
            o("attributions.jsonl"),
            "--format".into(),
            "json".into(),
        ],
        vec!["policy".into(), "preset".into(), "aggressive".into()],
        vec![
            "policy".into(),
            "check".into(),
            "--policy".into(),
            f("policies/aggressive.json"),
            "--catalog".into(),
            o("catalog.json"),
        ],
        vec![
            "scatter".into(),
            "--ledger".into(),
            o("ledger.json"),
            "--x".into(),
            "cve".into(),
        ],
        vec![
            "scatter".into(),
            "--ledger".into(),
            o("ledger.json"),
            "--x".into(),
            "severe".into(),
            "--out".into(),
            o("scatter_severe.csv"),
        ],
        vec![
            "scatter".into(),
            "--ledger".into(),
            o("ledger.json"),
            "--x".into(),
            "eloc".into(),
        ],
        vec![
            "pipeline".into(),
            "--manifest".into(),
            f("pipeline.toml"),
            "--out-dir".into(),
            o("pipeline"),
        ],
    ];
    steps
        .iter()
        .map(|s| {
            let args: Vec<&str> = s.iter().map(String::as_str).collect();
            cli(&args).map(|out| {
                String::from_utf8_lossy(&out)
                    .replace(&dir.to_string_lossy().into_owned(), "<out>")
                    .into_bytes()
            })
        })
        .collect()
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out_a = run_all(a.path())?;
    let out_b = run_all(b.path())?;
    let (fa, fb) = (snapshot(a.path()), snapshot(b.path()));
    let differing: Vec<String> = fa
        .iter()
        .filter(|(p, bytes)| fb.get(*p) != Some(bytes))
        .map(|(p, _)| p.display().to_string())
        .collect();
    let stdout_diff = out_a.iter().zip(&out_b).filter(|(x, y)| x != y).count();
    check(
        differing.is_empty() && fa.len() == fb.len() && stdout_diff == 0,
        format!(
            "{} subcommand runs, {} output files, {} stdout streams compared{}",
            out_a.len(),
            fa.len(),
            out_a.len(),
            if differing.is_empty() {
                String::new()
            } else {
                format!("; differing {differing:?}")
            }
        ),
    )
}

fn main() {
    let run = Manifest::load(&fixture_dir().join("pipeline.toml")).and_then(|m| run(&m));
    let run = match run {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL  fixture pipeline: {e}");
            std::process::exit(1);
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        (
            "battery fixture attribution",
            timed(Duration::from_secs(1), battery),
        ),
        (
            "oracle equivalence",
            timed(Duration::from_secs(10), oracle_equivalence),
        ),
        (
            "fixpoint determinism",
            timed(Duration::from_secs(5), fixpoint_determinism),
        ),
        ("preset policy statistics", presets(&run)),
        ("benefit pipeline", benefit(&run)),
        ("cve tally", cve_tally(&run)),
        ("cli determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
