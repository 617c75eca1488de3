//! File loading and atomic output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::benefit::{self, SiteTest, UsageRecord};
use crate::callgraph::{CallGraph, EdgeRecord, ElocResult, NodeRecord};
use crate::catalog::{build_catalog, FeatureCatalog, StandardMapping};
use crate::cve::{self, AttributionResult, CveRecord, CveTally, FilterConfig, Pattern, RuleSet};
use crate::error::{Error, Result};
use crate::idl::parse_webidl;
use crate::ledger::{self, Ledger};
use crate::policy::{parse_policy, BlockPolicy};
use crate::standard::Abbrev;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(io_err(path))
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::at(path, format!("row {}: {e}", i + 2))))
        .collect()
}

/// Parses every `*.idl` file in `dir` (sorted by name) and assigns the
/// interfaces to standards with the mapping CSV.
pub fn load_catalog_from_idl(dir: &Path, mapping: &Path) -> Result<FeatureCatalog> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "idl"));
    files.sort();
    let mut defs = Vec::new();
    for f in &files {
        let text = read_text(f)?;
        defs.extend(parse_webidl(&text).map_err(|source| Error::Idl {
            path: f.clone(),
            source,
        })?);
    }
    let mapping = StandardMapping::from_csv(open(mapping)?).map_err(|e| Error::at(mapping, e))?;
    Ok(build_catalog(&defs, &mapping)?)
}

pub fn load_catalog_json(path: &Path) -> Result<FeatureCatalog> {
    FeatureCatalog::from_json(&read_text(path)?).map_err(|e| Error::at(path, e))
}

pub fn load_graph(nodes: &Path, edges: &Path) -> Result<CallGraph> {
    let n: Vec<NodeRecord> = read_csv(nodes)?;
    let e: Vec<EdgeRecord> = read_csv(edges)?;
    Ok(CallGraph::load(n, e)?)
}

pub fn load_cves(path: &Path) -> Result<Vec<CveRecord>> {
    cve::read_cves_jsonl(std::io::BufReader::new(open(path)?)).map_err(|e| Error::at(path, e))
}

pub fn load_rules(path: &Path, catalog: &FeatureCatalog) -> Result<RuleSet> {
    RuleSet::from_csv(open(path)?, catalog).map_err(|e| Error::at(path, e))
}

pub fn load_discard_keywords(path: &Path) -> Result<Vec<Pattern>> {
    FilterConfig::keywords_from_reader(open(path)?).map_err(io_err(path))
}

pub fn load_site_tests(path: &Path) -> Result<Vec<SiteTest>> {
    benefit::read_site_tests(open(path)?).map_err(|e| Error::at(path, e))
}

pub fn load_usage(path: &Path) -> Result<BTreeMap<Abbrev, UsageRecord>> {
    benefit::read_usage(open(path)?).map_err(|e| Error::at(path, e))
}

pub fn load_attacks(path: &Path) -> Result<BTreeMap<Abbrev, u32>> {
    ledger::read_attacks(open(path)?).map_err(|e| Error::at(path, e))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::at(path, e))
}

pub fn load_eloc_json(path: &Path) -> Result<Vec<ElocResult>> {
    load_json(path)
}

pub fn load_tally_json(path: &Path) -> Result<CveTally> {
    load_json(path)
}

pub fn load_break_rates_json(path: &Path) -> Result<Vec<benefit::BreakRateResult>> {
    load_json(path)
}

pub fn load_ledger_json(path: &Path) -> Result<Ledger> {
    Ledger::from_json(&read_text(path)?).map_err(|e| Error::at(path, e))
}

pub fn load_policy(path: &Path) -> Result<BlockPolicy> {
    parse_policy(&read_text(path)?).map_err(|e| Error::at(path, e))
}

/// Reads JSON-lines attribution results.
pub fn load_attributions(path: &Path) -> Result<Vec<AttributionResult>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::at(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn attributions_jsonl(results: &[AttributionResult]) -> String {
    results
        .iter()
        .map(|r| serde_json::to_string(r).expect("attribution serializes") + "\n")
        .collect()
}

pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Writes each file through a temporary sibling and a rename, after all
/// contents have been rendered, so an error never leaves a partial file.
/// Parent directories are created as needed.
pub fn write_outputs(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut tmp = path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        if let Err(e) = fs::write(&tmp, bytes) {
            let _ = fs::remove_file(&tmp);
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(io_err(path)(e));
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        fs::rename(&tmp, path).map_err(io_err(path))?;
    }
    Ok(())
}
