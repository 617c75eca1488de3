//! Per-standard fusion of cost (ELoC, CVEs, attacks) and benefit (break rate).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benefit::BreakRateResult;
use crate::callgraph::ElocResult;
use crate::catalog::FeatureCatalog;
use crate::cve::CveTally;
use crate::standard::Abbrev;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("inputs cover different standards: {}", describe(.0))]
    Mismatch(BTreeMap<&'static str, BTreeSet<Abbrev>>),
    #[error("attacks row {row}: {message}")]
    Attacks { row: usize, message: String },
    #[error("ledger: {0}")]
    Json(String),
}

fn describe(missing: &BTreeMap<&'static str, BTreeSet<Abbrev>>) -> String {
    missing
        .iter()
        .map(|(input, set)| {
            let list: Vec<&str> = set.iter().map(Abbrev::as_str).collect();
            format!("{input} lacks {}", list.join(" "))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    /// Every input must cover exactly the same standards.
    Strict,
    /// Gaps become `None` fields.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerRow {
    pub standard_name: Option<String>,
    pub abbreviation: Abbrev,
    pub sites_using: Option<u32>,
    pub population: Option<u32>,
    pub raw_break_fraction: Option<f64>,
    pub weighted_break_rate: Option<f64>,
    pub agreement: Option<f64>,
    pub cves: Option<u32>,
    pub high_or_severe: Option<u32>,
    pub eloc: Option<u64>,
    pub eloc_share: Option<f64>,
    pub attack_papers: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ledger {
    pub rows: Vec<LedgerRow>,
}

pub fn read_attacks<R: Read>(reader: R) -> Result<BTreeMap<Abbrev, u32>, LedgerError> {
    #[derive(Deserialize)]
    struct Row {
        standard_abbrev: String,
        attack_papers: u32,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = BTreeMap::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let err = |message: String| LedgerError::Attacks {
            row: i + 2,
            message,
        };
        let row = row.map_err(|e| err(e.to_string()))?;
        let a = Abbrev::new(row.standard_abbrev)
            .ok_or_else(|| err("bad standard abbreviation".into()))?;
        if out.insert(a.clone(), row.attack_papers).is_some() {
            return Err(err(format!("duplicate standard {a}")));
        }
    }
    Ok(out)
}

pub fn build_ledger(
    catalog: &FeatureCatalog,
    eloc: &[ElocResult],
    tally: &CveTally,
    breaks: &[BreakRateResult],
    attacks: &BTreeMap<Abbrev, u32>,
    coverage: Coverage,
) -> Result<Ledger, LedgerError> {
    let eloc: BTreeMap<&Abbrev, &ElocResult> = eloc.iter().map(|r| (&r.standard, r)).collect();
    let breaks: BTreeMap<&Abbrev, &BreakRateResult> =
        breaks.iter().map(|r| (&r.standard, r)).collect();
    let inputs: [(&'static str, BTreeSet<&Abbrev>); 5] = [
        ("catalog", catalog.abbrevs().collect()),
        ("eloc", eloc.keys().copied().collect()),
        ("cves", tally.per_standard.keys().collect()),
        ("benefit", breaks.keys().copied().collect()),
        ("attacks", attacks.keys().collect()),
    ];
    let all: BTreeSet<&Abbrev> = inputs.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    if coverage == Coverage::Strict {
        let missing: BTreeMap<&'static str, BTreeSet<Abbrev>> = inputs
            .iter()
            .map(|(name, s)| {
                (
                    *name,
                    all.difference(s)
                        .map(|&a| a.clone())
                        .collect::<BTreeSet<_>>(),
                )
            })
            .filter(|(_, s)| !s.is_empty())
            .collect();
        if !missing.is_empty() {
            return Err(LedgerError::Mismatch(missing));
        }
    }
    let rows = all
        .into_iter()
        .map(|a| {
            let e = eloc.get(a);
            let b = breaks.get(a);
            let c = tally.per_standard.get(a);
            LedgerRow {
                standard_name: catalog.standard(a.as_str()).map(|s| s.name.clone()),
                abbreviation: a.clone(),
                sites_using: b.map(|b| b.sites_using),
                population: b.map(|b| b.population),
                raw_break_fraction: b.and_then(|b| b.raw_break_fraction),
                weighted_break_rate: b.map(|b| b.weighted_break_rate),
                agreement: b.and_then(|b| b.agreement),
                cves: c.map(|c| c.cve_count),
                high_or_severe: c.map(|c| c.high_or_severe_count),
                eloc: e.map(|e| e.eloc),
                eloc_share: e.map(|e| e.eloc_share),
                attack_papers: attacks.get(a).copied(),
            }
        })
        .collect();
    Ok(Ledger { rows })
}

/// Break-rate cell as printed in summary tables: `0%` for exactly zero,
/// `<1%` below half a percent, otherwise the rounded whole percent.
pub fn format_break_cell(rate: f64) -> String {
    if rate == 0.0 {
        "0%".into()
    } else if rate < 0.005 {
        "<1%".into()
    } else {
        format!("{}%", (rate * 100.0).round())
    }
}

fn percent_cell(x: f64) -> String {
    format!("{}%", (x * 100.0).round())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl Ledger {
    pub fn row(&self, abbrev: &str) -> Option<&LedgerRow> {
        self.rows
            .binary_search_by(|r| r.abbreviation.as_str().cmp(abbrev))
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn contains(&self, abbrev: &str) -> bool {
        self.row(abbrev).is_some()
    }

    pub fn total_eloc(&self) -> u64 {
        self.rows.iter().filter_map(|r| r.eloc).sum()
    }

    pub const CSV_HEADER: &'static str = "standard_name,abbreviation,alexa_using,site_break_rate,weighted_break_rate,agreement,cves,high_or_severe,eloc,eloc_pct,attack_papers";

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for r in &self.rows {
            w.write_record([
                r.standard_name.clone().unwrap_or_default(),
                r.abbreviation.to_string(),
                opt(r.sites_using),
                r.weighted_break_rate
                    .map(format_break_cell)
                    .unwrap_or_default(),
                opt(r.weighted_break_rate),
                r.agreement.map(percent_cell).unwrap_or_default(),
                opt(r.cves),
                opt(r.high_or_severe),
                opt(r.eloc),
                r.eloc_share
                    .map(|s| format!("{:.2}", s * 100.0))
                    .unwrap_or_default(),
                opt(r.attack_papers),
            ])
            .expect("in-memory csv write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory csv flush"))
            .expect("csv output is utf-8");
        let mut out = String::new();
        let _ = writeln!(out, "{}", Self::CSV_HEADER);
        out.push_str(&body);
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ledger serializes");
        s.push('\n');
        s
    }

    /// Parses a JSON ledger; rows are re-sorted and duplicates rejected.
    pub fn from_json(text: &str) -> Result<Self, LedgerError> {
        let mut l: Ledger =
            serde_json::from_str(text).map_err(|e| LedgerError::Json(e.to_string()))?;
        l.rows.sort_by(|a, b| a.abbreviation.cmp(&b.abbreviation));
        if let Some(w) = l
            .rows
            .windows(2)
            .find(|w| w[0].abbreviation == w[1].abbreviation)
        {
            return Err(LedgerError::Json(format!(
                "duplicate row {}",
                w[0].abbreviation
            )));
        }
        Ok(l)
    }
}
