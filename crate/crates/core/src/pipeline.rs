//! One-shot run of every stage from a TOML manifest.
//!
//! ```toml
//! idl_dir = "idl"
//! standards = "standards.csv"
//! nodes = "callgraph/nodes.csv"
//! edges = "callgraph/edges.csv"
//! cves = "cves/cves.jsonl"
//! rules = "cves/rules.csv"
//! discard = "cves/discard.txt"   # optional
//! site_tests = "benefit/site_tests.csv"
//! usage = "benefit/usage.csv"
//! attacks = "attacks.csv"
//! year_floor = 2010              # optional
//! include_third_party = false    # optional
//! lenient = false                # optional
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::benefit::{break_rate_table, BreakRateResult};
use crate::callgraph::{eloc_table, ElocOptions, ElocResult};
use crate::catalog::FeatureCatalog;
use crate::cve::{
    attribute_all, filter_browser_cves, tally, AttributionResult, CveRecord, CveTally,
    FilterConfig, RuleSet,
};
use crate::error::{Error, Result};
use crate::io;
use crate::ledger::{build_ledger, Coverage, Ledger};
use crate::policy::{evaluate_policy, preset, serialize_policy, PolicyStats};
use crate::report;
use crate::scatter::{scatter_csv, CostAxis};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub idl_dir: PathBuf,
    pub standards: PathBuf,
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub cves: PathBuf,
    pub rules: PathBuf,
    #[serde(default)]
    pub discard: Option<PathBuf>,
    pub site_tests: PathBuf,
    pub usage: PathBuf,
    pub attacks: PathBuf,
    #[serde(default)]
    pub year_floor: Option<u16>,
    #[serde(default)]
    pub include_third_party: bool,
    #[serde(default)]
    pub lenient: bool,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read_text(path)?;
        let mut m: Manifest = toml::from_str(&text)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut m.idl_dir,
            &mut m.standards,
            &mut m.nodes,
            &mut m.edges,
            &mut m.cves,
            &mut m.rules,
            &mut m.site_tests,
            &mut m.usage,
            &mut m.attacks,
        ] {
            *p = base.join(&*p);
        }
        if let Some(d) = &mut m.discard {
            *d = base.join(&*d);
        }
        Ok(m)
    }
}

/// Keeps, filters and attributes CVE records.
pub fn run_cves(
    catalog: &FeatureCatalog,
    records: Vec<CveRecord>,
    rules: &RuleSet,
    filter: &FilterConfig,
) -> Result<(Vec<AttributionResult>, CveTally)> {
    let all = records.clone();
    let (kept, discarded) = filter_browser_cves(records, filter);
    let results = attribute_all(&kept, &discarded, rules);
    let t = tally(&results, &all, catalog.abbrevs())?;
    Ok((results, t))
}

pub struct PipelineRun {
    pub catalog: FeatureCatalog,
    pub eloc: Vec<ElocResult>,
    pub attributions: Vec<AttributionResult>,
    pub tally: CveTally,
    pub break_rates: Vec<BreakRateResult>,
    pub ledger: Ledger,
    pub preset_stats: BTreeMap<&'static str, PolicyStats>,
}

pub fn run(m: &Manifest) -> Result<PipelineRun> {
    let catalog = io::load_catalog_from_idl(&m.idl_dir, &m.standards)?;
    let graph = io::load_graph(&m.nodes, &m.edges)?;
    let opts = ElocOptions {
        include_third_party: m.include_third_party,
    };
    let eloc = eloc_table(&graph, &catalog, opts)?;

    let records = io::load_cves(&m.cves)?;
    let rules = io::load_rules(&m.rules, &catalog)?;
    let mut filter = FilterConfig::default();
    if let Some(d) = &m.discard {
        filter.discard_keywords = io::load_discard_keywords(d)?;
    }
    if let Some(y) = m.year_floor {
        filter.year_floor = y;
    }
    let (attributions, tally) = run_cves(&catalog, records, &rules, &filter)?;

    let tests = io::load_site_tests(&m.site_tests)?;
    let usage = io::load_usage(&m.usage)?;
    let break_rates = break_rate_table(&tests, &usage)?;
    let attacks = io::load_attacks(&m.attacks)?;

    let coverage = if m.lenient {
        Coverage::Lenient
    } else {
        Coverage::Strict
    };
    let ledger = build_ledger(&catalog, &eloc, &tally, &break_rates, &attacks, coverage)?;
    let mut preset_stats = BTreeMap::new();
    for name in ["aggressive", "conservative"] {
        preset_stats.insert(
            name,
            evaluate_policy(&preset(name)?, &ledger, &attributions)?,
        );
    }
    Ok(PipelineRun {
        catalog,
        eloc,
        attributions,
        tally,
        break_rates,
        ledger,
        preset_stats,
    })
}

impl PipelineRun {
    /// Every output file, named relative to the output directory.
    pub fn render(&self) -> Result<Vec<(PathBuf, Vec<u8>)>> {
        let mut files: Vec<(&str, String)> = vec![
            ("catalog.json", self.catalog.to_json()),
            ("eloc.csv", report::eloc_csv(&self.eloc)),
            ("eloc.json", io::to_json_pretty(&self.eloc)),
            (
                "attributions.jsonl",
                io::attributions_jsonl(&self.attributions),
            ),
            ("cve_tally.csv", report::tally_csv(&self.tally)),
            ("cve_tally.json", io::to_json_pretty(&self.tally)),
            ("cve_routes.csv", report::routes_csv(&self.tally)),
            (
                "break_rates.csv",
                report::break_rates_csv(&self.break_rates),
            ),
            ("break_rates.json", io::to_json_pretty(&self.break_rates)),
            ("ledger.csv", self.ledger.to_csv()),
            ("ledger.json", self.ledger.to_json()),
            (
                "scatter_cves.csv",
                scatter_csv(&self.ledger, CostAxis::Cves),
            ),
            (
                "scatter_severe.csv",
                scatter_csv(&self.ledger, CostAxis::Severe),
            ),
            (
                "scatter_eloc.csv",
                scatter_csv(&self.ledger, CostAxis::Eloc),
            ),
        ];
        let mut eval = String::from(PolicyStats::CSV_HEADER);
        eval.push('\n');
        for (name, stats) in &self.preset_stats {
            eval.push_str(&stats.csv_row(name));
        }
        files.push(("policy_eval.csv", eval));
        files.push((
            "policies/aggressive.json",
            serialize_policy(&preset("aggressive")?),
        ));
        files.push((
            "policies/conservative.json",
            serialize_policy(&preset("conservative")?),
        ));
        Ok(files
            .into_iter()
            .map(|(n, s)| (PathBuf::from(n), s.into_bytes()))
            .collect())
    }
}
