//! CVE filtering, rule-based attribution to standards, and per-standard tallies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Read};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::callgraph::{exclusive_functions, CallGraph};
use crate::catalog::FeatureCatalog;
use crate::standard::Abbrev;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CveError {
    #[error("malformed CVE id {0:?}")]
    MalformedId(String),
    #[error("{id}: year field {year} does not match the id")]
    YearMismatch { id: String, year: u16 },
    #[error("duplicate CVE id {0}")]
    DuplicateId(String),
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("rules row {row}: {message}")]
    Rule { row: usize, message: String },
    #[error("attribution result for unknown CVE {0}")]
    UnknownCve(String),
    #[error("no attribution result for CVE {0}")]
    MissingResult(String),
    #[error("more than one attribution result for CVE {0}")]
    DuplicateResult(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Low,
    Moderate,
    High,
    Severe,
}

impl Severity {
    /// Maps a numeric base score from an external feed.
    pub fn from_score(score: f64) -> Self {
        if score >= 9.0 {
            Severity::Severe
        } else if score >= 7.0 {
            Severity::High
        } else if score >= 4.0 {
            Severity::Moderate
        } else {
            Severity::Low
        }
    }

    pub fn is_high_or_severe(self) -> bool {
        matches!(self, Severity::High | Severity::Severe)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CveRecord {
    pub id: String,
    pub year: u16,
    pub description: String,
    pub severity: Severity,
    pub product_hint: String,
}

/// Splits `CVE-YYYY-NNNN` (four or more sequence digits) and returns the year.
pub fn parse_cve_id(id: &str) -> Result<u16, CveError> {
    let bad = || CveError::MalformedId(id.to_string());
    let rest = id.strip_prefix("CVE-").ok_or_else(bad)?;
    let (year, seq) = rest.split_once('-').ok_or_else(bad)?;
    if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if seq.len() < 4 || !seq.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    year.parse().map_err(|_| bad())
}

impl CveRecord {
    pub fn new(
        id: &str,
        description: impl Into<String>,
        severity: Severity,
        product_hint: impl Into<String>,
    ) -> Result<Self, CveError> {
        let year = parse_cve_id(id)?;
        Ok(CveRecord {
            id: id.to_string(),
            year,
            description: description.into(),
            severity,
            product_hint: product_hint.into(),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    #[serde(default)]
    year: Option<u16>,
    #[serde(default)]
    description: String,
    severity: RawSeverity,
    #[serde(default)]
    product_hint: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSeverity {
    Label(Severity),
    Score(f64),
}

/// Reads JSON-lines `{id, description, severity, product_hint}`; blank lines
/// are skipped. Ids must be unique.
pub fn read_cves_jsonl<R: BufRead>(reader: R) -> Result<Vec<CveRecord>, CveError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CveError::Json {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| CveError::Json {
            line: i + 1,
            message: e.to_string(),
        })?;
        let severity = match raw.severity {
            RawSeverity::Label(s) => s,
            RawSeverity::Score(x) => Severity::from_score(x),
        };
        let rec = CveRecord::new(&raw.id, raw.description, severity, raw.product_hint)?;
        if let Some(y) = raw.year {
            if y != rec.year {
                return Err(CveError::YearMismatch {
                    id: rec.id,
                    year: y,
                });
            }
        }
        if !seen.insert(rec.id.clone()) {
            return Err(CveError::DuplicateId(rec.id));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Case-insensitive literal. Where the pattern starts or ends with a word
/// character, a word boundary is required there, so `HTML` does not match
/// inside `HTML5`.
#[derive(Debug, Clone)]
pub struct Pattern {
    text: String,
    re: Regex,
}

impl Pattern {
    pub fn new(text: &str) -> Option<Self> {
        let text = text.trim();
        let first = text.chars().next()?;
        let last = text.chars().next_back()?;
        let is_word = |c: char| c.is_alphanumeric() || c == '_';
        let mut src = String::from("(?i)");
        if is_word(first) {
            src.push_str(r"\b");
        }
        src.push_str(&regex::escape(text));
        if is_word(last) {
            src.push_str(r"\b");
        }
        Some(Pattern {
            text: text.to_string(),
            re: Regex::new(&src).expect("escaped literal is a valid regex"),
        })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn is_match(&self, haystack: &str) -> bool {
        self.re.is_match(haystack)
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Pattern {}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub discard_keywords: Vec<Pattern>,
    /// Records from earlier years are discarded.
    pub year_floor: u16,
}

pub const DEFAULT_YEAR_FLOOR: u16 = 2010;

pub const DEFAULT_DISCARD_KEYWORDS: &[&str] = &[
    "Adobe Flash Player",
    "Flash plugin",
    "Java Runtime Environment",
    "Adobe Reader",
    "QuickTime",
    "Silverlight",
];

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            discard_keywords: DEFAULT_DISCARD_KEYWORDS
                .iter()
                .filter_map(|k| Pattern::new(k))
                .collect(),
            year_floor: DEFAULT_YEAR_FLOOR,
        }
    }
}

impl FilterConfig {
    /// One keyword per line; `#` starts a comment line.
    pub fn keywords_from_reader<R: Read>(mut reader: R) -> std::io::Result<Vec<Pattern>> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(Pattern::new)
            .collect())
    }
}

/// Splits records into (kept, discarded), preserving input order in each.
pub fn filter_browser_cves(
    records: Vec<CveRecord>,
    config: &FilterConfig,
) -> (Vec<CveRecord>, Vec<CveRecord>) {
    records.into_iter().partition(|r| {
        r.year >= config.year_floor
            && !config
                .discard_keywords
                .iter()
                .any(|k| k.is_match(&r.description) || k.is_match(&r.product_hint))
    })
}

/// Attribution routes in precedence order (highest first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    StandardName,
    JsEndpoint,
    NativeSymbol,
    FunctionalityKeyword,
}

impl Route {
    pub const ALL: [Route; 4] = [
        Route::StandardName,
        Route::JsEndpoint,
        Route::NativeSymbol,
        Route::FunctionalityKeyword,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Route::StandardName => "standard_name",
            Route::JsEndpoint => "js_endpoint",
            Route::NativeSymbol => "native_symbol",
            Route::FunctionalityKeyword => "functionality_keyword",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributionRule {
    pub route: Route,
    pub pattern: Pattern,
    pub target: Abbrev,
    /// Exclusion rule: a match removes `target` from the result.
    pub negate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RuleRow {
    route: Route,
    pattern: String,
    target_abbrev: String,
    #[serde(default)]
    negate: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<AttributionRule>,
}

impl RuleSet {
    pub fn new(rules: Vec<AttributionRule>, catalog: &FeatureCatalog) -> Result<Self, CveError> {
        for (i, r) in rules.iter().enumerate() {
            if !catalog.contains(r.target.as_str()) {
                return Err(CveError::Rule {
                    row: i + 1,
                    message: format!("target {} is not in the catalog", r.target),
                });
            }
        }
        Ok(RuleSet { rules })
    }

    /// Reads `route,pattern,target_abbrev,negate` CSV.
    pub fn from_csv<R: Read>(reader: R, catalog: &FeatureCatalog) -> Result<Self, CveError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rules = Vec::new();
        for (i, row) in rdr.deserialize::<RuleRow>().enumerate() {
            let row_no = i + 2;
            let err = |message: String| CveError::Rule {
                row: row_no,
                message,
            };
            let row = row.map_err(|e| err(e.to_string()))?;
            let pattern = Pattern::new(&row.pattern).ok_or_else(|| err("empty pattern".into()))?;
            let target = Abbrev::new(row.target_abbrev.as_str())
                .ok_or_else(|| err("empty target".into()))?;
            if !catalog.contains(target.as_str()) {
                return Err(err(format!("target {target} is not in the catalog")));
            }
            let negate = match row
                .negate
                .as_deref()
                .map(str::to_ascii_lowercase)
                .as_deref()
            {
                None | Some("") | Some("false") | Some("0") | Some("no") => false,
                Some("true") | Some("1") | Some("yes") => true,
                Some(other) => return Err(err(format!("invalid negate flag {other:?}"))),
            };
            rules.push(AttributionRule {
                route: row.route,
                pattern,
                target,
                negate,
            });
        }
        Ok(RuleSet { rules })
    }

    pub fn rules(&self) -> &[AttributionRule] {
        &self.rules
    }

    pub fn to_csv(rules: &[AttributionRule]) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for r in rules {
            w.serialize(RuleRow {
                route: r.route,
                pattern: r.pattern.as_str().to_string(),
                target_abbrev: r.target.to_string(),
                negate: Some(r.negate.to_string()),
            })
            .expect("in-memory csv write");
        }
        if rules.is_empty() {
            return "route,pattern,target_abbrev,negate\n".into();
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush"))
            .expect("csv output is utf-8")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionStatus {
    Discarded,
    Unattributed,
    Attributed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionResult {
    pub cve_id: String,
    pub status: AttributionStatus,
    pub standards: BTreeSet<Abbrev>,
    pub routes_used: BTreeSet<Route>,
    /// Highest-precedence route among `routes_used`; the label used in reports.
    pub primary_route: Option<Route>,
}

impl AttributionResult {
    pub fn discarded(id: &str) -> Self {
        AttributionResult {
            cve_id: id.to_string(),
            status: AttributionStatus::Discarded,
            standards: BTreeSet::new(),
            routes_used: BTreeSet::new(),
            primary_route: None,
        }
    }
}

/// Fires every rule against the description. Negative rules strip their
/// target; routes are only reported for targets that survive.
pub fn attribute(record: &CveRecord, rules: &RuleSet) -> AttributionResult {
    let mut hits: BTreeMap<&Abbrev, BTreeSet<Route>> = BTreeMap::new();
    let mut excluded: BTreeSet<&Abbrev> = BTreeSet::new();
    for rule in &rules.rules {
        if rule.pattern.is_match(&record.description) {
            if rule.negate {
                excluded.insert(&rule.target);
            } else {
                hits.entry(&rule.target).or_default().insert(rule.route);
            }
        }
    }
    hits.retain(|t, _| !excluded.contains(t));
    let standards: BTreeSet<Abbrev> = hits.keys().map(|&a| a.clone()).collect();
    let routes_used: BTreeSet<Route> = hits.into_values().flatten().collect();
    AttributionResult {
        cve_id: record.id.clone(),
        status: if standards.is_empty() {
            AttributionStatus::Unattributed
        } else {
            AttributionStatus::Attributed
        },
        primary_route: routes_used.iter().next().copied(),
        standards,
        routes_used,
    }
}

/// Results for kept and discarded records, sorted by CVE id.
pub fn attribute_all(
    kept: &[CveRecord],
    discarded: &[CveRecord],
    rules: &RuleSet,
) -> Vec<AttributionResult> {
    let mut out: Vec<AttributionResult> = kept
        .iter()
        .map(|r| attribute(r, rules))
        .chain(
            discarded
                .iter()
                .map(|r| AttributionResult::discarded(&r.id)),
        )
        .collect();
    out.sort_by(|a, b| a.cve_id.cmp(&b.cve_id));
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardCount {
    pub cve_count: u32,
    pub high_or_severe_count: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CveTally {
    pub per_standard: BTreeMap<Abbrev, StandardCount>,
    /// Attributed CVEs counted once each.
    pub attributed_total: u32,
    /// Attributed CVEs naming more than one standard.
    pub multi_standard: u32,
    /// Attributed CVEs by their highest-precedence route.
    pub primary_routes: BTreeMap<Route, u32>,
}

impl CveTally {
    pub fn per_standard_sum(&self) -> u32 {
        self.per_standard.values().map(|c| c.cve_count).sum()
    }

    /// Share of attributed CVEs labelled by each route; sums to 1 when any
    /// CVE is attributed.
    pub fn route_fractions(&self) -> Vec<(Route, f64)> {
        Route::ALL
            .iter()
            .map(|&r| {
                let n = self.primary_routes.get(&r).copied().unwrap_or(0);
                let f = if self.attributed_total == 0 {
                    0.0
                } else {
                    n as f64 / self.attributed_total as f64
                };
                (r, f)
            })
            .collect()
    }
}

/// Multi-standard CVEs count once for each standard they name. `standards`
/// seeds zero rows so every listed standard appears in the output.
pub fn tally<'a>(
    results: &[AttributionResult],
    records: &[CveRecord],
    standards: impl IntoIterator<Item = &'a Abbrev>,
) -> Result<CveTally, CveError> {
    let by_id: BTreeMap<&str, &CveRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut seen = BTreeSet::new();
    let mut t = CveTally {
        per_standard: standards
            .into_iter()
            .map(|a| (a.clone(), StandardCount::default()))
            .collect(),
        ..CveTally::default()
    };
    for res in results {
        let rec = by_id
            .get(res.cve_id.as_str())
            .ok_or_else(|| CveError::UnknownCve(res.cve_id.clone()))?;
        if !seen.insert(res.cve_id.as_str()) {
            return Err(CveError::DuplicateResult(res.cve_id.clone()));
        }
        if res.status != AttributionStatus::Attributed {
            continue;
        }
        t.attributed_total += 1;
        if res.standards.len() > 1 {
            t.multi_standard += 1;
        }
        if let Some(route) = res.primary_route {
            *t.primary_routes.entry(route).or_default() += 1;
        }
        for s in &res.standards {
            let c = t.per_standard.entry(s.clone()).or_default();
            c.cve_count += 1;
            c.high_or_severe_count += u32::from(rec.severity.is_high_or_severe());
        }
    }
    if let Some(missing) = records.iter().find(|r| !seen.contains(r.id.as_str())) {
        return Err(CveError::MissingResult(missing.id.clone()));
    }
    Ok(t)
}

/// Proposes native-symbol rules: an exclusive function of standard `S` whose
/// name appears in some description suggests attributing to `S`. Suggestions
/// are not applied; they are meant for review and inclusion in a rule file.
pub fn suggest_native_rules(
    graph: &CallGraph,
    catalog: &FeatureCatalog,
    records: &[CveRecord],
) -> Result<Vec<AttributionRule>, crate::callgraph::GraphError> {
    let mut out = Vec::new();
    for abbrev in catalog.abbrevs() {
        for id in exclusive_functions(graph, abbrev.as_str(), Some(catalog))? {
            let Some(node) = graph.node(&id) else {
                continue;
            };
            let Some(pattern) = Pattern::new(&node.display_name) else {
                continue;
            };
            if records.iter().any(|r| pattern.is_match(&r.description)) {
                out.push(AttributionRule {
                    route: Route::NativeSymbol,
                    pattern,
                    target: abbrev.clone(),
                    negate: false,
                });
            }
        }
    }
    out.sort_by(|a, b| (&a.target, a.pattern.as_str()).cmp(&(&b.target, b.pattern.as_str())));
    out.dedup();
    Ok(out)
}
