//! Blocking policies: wire format, presets, generation from a ledger, and
//! cost/benefit evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cve::{AttributionResult, AttributionStatus};
use crate::ledger::{Ledger, LedgerRow};
use crate::standard::Abbrev;

pub const POLICY_VERSION: u32 = 1;

/// Standards never blocked unless a policy says otherwise.
pub const DEFAULT_WHITELIST: &[&str] = &["WCR"];

pub const CONSERVATIVE: &[&str] = &[
    "BE", "DOM-PS", "FULL", "HRT", "H-WS", "H-CM", "H-WW", "IDB", "PT2", "RT", "SVG", "UIE",
    "WEBA", "WEBGL",
];

pub const AGGRESSIVE: &[&str] = &[
    "ALS", "BA", "BE", "CSS-CR", "CSS-FO", "CSS-VM", "DOM-PS", "DOM2-T", "EC", "EME", "F", "FA",
    "FULL", "GEO", "GP", "H-B", "H-CM", "H-HI", "H-P", "H-WB", "H-WS", "H-WW", "HRT", "IDB", "MCS",
    "MSE", "NT", "PE", "PL", "PT", "PT2", "RT", "SEL", "SO", "SVG", "TC", "UIE", "URL", "UTL",
    "DOM4", "WEBA", "WEBGL", "WN", "WRTC",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("policy document: {0}")]
    Schema(String),
    #[error("unsupported policy version {0} (this build reads version {POLICY_VERSION})")]
    Version(u32),
    #[error("{0} is both blocked and whitelisted")]
    BlockedWhitelisted(Abbrev),
    #[error("origin {origin}: {standard} is both allowed and blocked")]
    OriginConflict { origin: String, standard: Abbrev },
    #[error("origin {origin}: whitelisted {standard} cannot be blocked")]
    OriginBlocksWhitelisted { origin: String, standard: Abbrev },
    #[error("invalid origin pattern {0:?}")]
    BadOrigin(String),
    #[error("policy names unknown standard {0}")]
    UnknownStandard(Abbrev),
    #[error("unknown preset {0:?} (expected conservative or aggressive)")]
    UnknownPreset(String),
}

/// `scheme://host[:port]` (exact) or `*.host` (host and its subdomains).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OriginPattern(String);

fn valid_host(h: &str) -> bool {
    !h.is_empty()
        && h.split('.').all(|label| {
            !label.is_empty()
                && label
                    .bytes()
                    .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
        })
}

impl FromStr for OriginPattern {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolicyError::BadOrigin(s.to_string());
        let lower = s.to_ascii_lowercase();
        if let Some(host) = lower.strip_prefix("*.") {
            return if valid_host(host) {
                Ok(OriginPattern(lower))
            } else {
                Err(bad())
            };
        }
        let (scheme, rest) = lower.split_once("://").ok_or_else(bad)?;
        if scheme.is_empty()
            || !scheme
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b"+-.".contains(&b))
        {
            return Err(bad());
        }
        let (host, port) = match rest.rsplit_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (rest, None),
        };
        if !valid_host(host) {
            return Err(bad());
        }
        if let Some(p) = port {
            if p.parse::<u16>().is_err() || p.starts_with('0') {
                return Err(bad());
            }
        }
        Ok(OriginPattern(lower))
    }
}

impl fmt::Display for OriginPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for OriginPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for OriginPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl OriginPattern {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_suffix(&self) -> bool {
        self.0.starts_with("*.")
    }

    /// `origin` is a serialized origin such as `https://a.example:8443`.
    pub fn matches(&self, origin: &str) -> bool {
        let origin = origin.to_ascii_lowercase();
        match self.0.strip_prefix("*.") {
            None => self.0 == origin,
            Some(suffix) => {
                let host = origin.split_once("://").map_or(origin.as_str(), |(_, r)| r);
                let host = host.rsplit_once(':').map_or(host, |(h, _)| h);
                host == suffix || host.strip_suffix(suffix).is_some_and(|p| p.ends_with('.'))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginRule {
    #[serde(default)]
    pub allow: BTreeSet<Abbrev>,
    #[serde(default)]
    pub block: BTreeSet<Abbrev>,
}

fn default_version() -> u32 {
    POLICY_VERSION
}

fn default_whitelist() -> BTreeSet<Abbrev> {
    DEFAULT_WHITELIST.iter().map(|&a| a.into()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockPolicy {
    #[serde(default = "default_version")]
    pub version: u32,
    pub name: String,
    pub blocked: BTreeSet<Abbrev>,
    #[serde(default = "default_whitelist")]
    pub whitelist: BTreeSet<Abbrev>,
    #[serde(default)]
    pub per_origin: BTreeMap<OriginPattern, OriginRule>,
    #[serde(default)]
    pub debug: bool,
}

impl BlockPolicy {
    pub fn new(
        name: impl Into<String>,
        blocked: impl IntoIterator<Item = Abbrev>,
    ) -> Result<Self, PolicyError> {
        let p = BlockPolicy {
            version: POLICY_VERSION,
            name: name.into(),
            blocked: blocked.into_iter().collect(),
            whitelist: default_whitelist(),
            per_origin: BTreeMap::new(),
            debug: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.version != POLICY_VERSION {
            return Err(PolicyError::Version(self.version));
        }
        if let Some(a) = self.blocked.intersection(&self.whitelist).next() {
            return Err(PolicyError::BlockedWhitelisted(a.clone()));
        }
        for (origin, rule) in &self.per_origin {
            if let Some(a) = rule.allow.intersection(&rule.block).next() {
                return Err(PolicyError::OriginConflict {
                    origin: origin.to_string(),
                    standard: a.clone(),
                });
            }
            if let Some(a) = rule.block.intersection(&self.whitelist).next() {
                return Err(PolicyError::OriginBlocksWhitelisted {
                    origin: origin.to_string(),
                    standard: a.clone(),
                });
            }
        }
        Ok(())
    }

    /// Every standard the policy mentions.
    pub fn mentioned(&self) -> BTreeSet<&Abbrev> {
        let mut s: BTreeSet<&Abbrev> = self.blocked.iter().chain(&self.whitelist).collect();
        for r in self.per_origin.values() {
            s.extend(r.allow.iter().chain(&r.block));
        }
        s
    }

    /// Effective blocked set for `origin`. Matching rules apply from least to
    /// most specific (shorter suffix patterns first, exact origins last); a
    /// later rule overrides an earlier one.
    pub fn blocked_for(&self, origin: &str) -> BTreeSet<Abbrev> {
        let mut rules: Vec<(&OriginPattern, &OriginRule)> = self
            .per_origin
            .iter()
            .filter(|(p, _)| p.matches(origin))
            .collect();
        rules.sort_by_key(|(p, _)| (!p.is_suffix(), p.as_str().len()));
        let mut out = self.blocked.clone();
        for (_, r) in rules {
            out.extend(r.block.iter().cloned());
            for a in &r.allow {
                out.remove(a);
            }
        }
        out.retain(|a| !self.whitelist.contains(a));
        out
    }
}

/// Canonical wire text: fixed key order, sorted arrays, two-space indent,
/// trailing newline.
pub fn serialize_policy(policy: &BlockPolicy) -> String {
    let mut s = serde_json::to_string_pretty(policy).expect("policy serializes");
    s.push('\n');
    s
}

pub fn parse_policy(text: &str) -> Result<BlockPolicy, PolicyError> {
    // Read the version first so that a newer document is reported as such
    // rather than as an unknown field.
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(text) {
        if let Some(ver) = v.get("version").and_then(serde_json::Value::as_u64) {
            if ver != u64::from(POLICY_VERSION) {
                return Err(PolicyError::Version(u32::try_from(ver).unwrap_or(u32::MAX)));
            }
        }
    }
    let p: BlockPolicy =
        serde_json::from_str(text).map_err(|e| PolicyError::Schema(e.to_string()))?;
    p.validate()?;
    Ok(p)
}

pub fn preset(name: &str) -> Result<BlockPolicy, PolicyError> {
    let list = match name {
        "conservative" => CONSERVATIVE,
        "aggressive" => AGGRESSIVE,
        other => return Err(PolicyError::UnknownPreset(other.to_string())),
    };
    BlockPolicy::new(name, list.iter().map(|&a| Abbrev::from(a)))
}

/// Minimum cost for a standard to be worth blocking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostPredicate {
    MinCves(u32),
    MinElocShare(f64),
    MinAttacks(u32),
}

impl CostPredicate {
    fn holds(self, row: &LedgerRow) -> bool {
        match self {
            CostPredicate::MinCves(n) => row.cves.is_some_and(|c| c >= n),
            CostPredicate::MinElocShare(x) => row.eloc_share.is_some_and(|s| s >= x),
            CostPredicate::MinAttacks(n) => row.attack_papers.is_some_and(|c| c >= n),
        }
    }
}

/// Blocks every standard whose weighted break rate, rounded to a whole
/// percent, is at most `max_break_rate` and whose cost satisfies `min_cost`.
/// Whole-percent resolution means `max_break_rate = 0` admits standards
/// whose rate rounds to 0%. Rows without a break rate are never blocked.
pub fn generate_policy(
    name: &str,
    ledger: &Ledger,
    max_break_rate: f64,
    min_cost: CostPredicate,
    whitelist: &BTreeSet<Abbrev>,
) -> BlockPolicy {
    let limit = (max_break_rate * 100.0).round();
    let blocked = ledger
        .rows
        .iter()
        .filter(|r| {
            r.weighted_break_rate
                .is_some_and(|w| (w * 100.0).round() <= limit)
        })
        .filter(|r| min_cost.holds(r))
        .map(|r| r.abbreviation.clone())
        .filter(|a| !whitelist.contains(a))
        .collect();
    BlockPolicy {
        version: POLICY_VERSION,
        name: name.to_string(),
        blocked,
        whitelist: whitelist.clone(),
        per_origin: BTreeMap::new(),
        debug: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyStats {
    pub standards_blocked: u32,
    /// Attributed CVEs naming at least one blocked standard, counted once.
    pub cve_covered: u32,
    /// Attributed CVEs overall, counted once.
    pub cve_total: u32,
    pub cve_fraction: f64,
    /// Sum of per-standard counts over the blocked set (multi-standard CVEs
    /// counted repeatedly); always at least `cve_covered`.
    pub cve_covered_sum: u32,
    pub eloc_removed: u64,
    pub eloc_total: u64,
    pub eloc_fraction: f64,
    /// Sum of the blocked standards' weighted break rates. An estimate, not
    /// a measured break rate for the combined configuration.
    pub est_break_rate_sum: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Global (origin-independent) statistics for `policy.blocked`.
pub fn evaluate_policy(
    policy: &BlockPolicy,
    ledger: &Ledger,
    attributions: &[AttributionResult],
) -> Result<PolicyStats, PolicyError> {
    let rows: Vec<&LedgerRow> = policy
        .blocked
        .iter()
        .map(|a| {
            ledger
                .row(a.as_str())
                .ok_or_else(|| PolicyError::UnknownStandard(a.clone()))
        })
        .collect::<Result<_, _>>()?;
    let attributed = attributions
        .iter()
        .filter(|r| r.status == AttributionStatus::Attributed);
    let (mut total, mut covered) = (0u32, 0u32);
    for r in attributed {
        total += 1;
        if r.standards.iter().any(|s| policy.blocked.contains(s)) {
            covered += 1;
        }
    }
    let eloc_removed: u64 = rows.iter().filter_map(|r| r.eloc).sum();
    let eloc_total = ledger.total_eloc();
    Ok(PolicyStats {
        standards_blocked: rows.len() as u32,
        cve_covered: covered,
        cve_total: total,
        cve_fraction: ratio(covered as f64, total as f64),
        cve_covered_sum: rows.iter().filter_map(|r| r.cves).sum(),
        eloc_removed,
        eloc_total,
        eloc_fraction: ratio(eloc_removed as f64, eloc_total as f64),
        est_break_rate_sum: rows.iter().filter_map(|r| r.weighted_break_rate).sum(),
    })
}

impl PolicyStats {
    pub const CSV_HEADER: &'static str = "policy,standards_blocked,cve_covered,cve_total,cve_fraction,cve_covered_sum,eloc_removed,eloc_total,eloc_fraction,est_break_rate_sum";

    pub fn csv_row(&self, name: &str) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            name.to_string(),
            self.standards_blocked.to_string(),
            self.cve_covered.to_string(),
            self.cve_total.to_string(),
            self.cve_fraction.to_string(),
            self.cve_covered_sum.to_string(),
            self.eloc_removed.to_string(),
            self.eloc_total.to_string(),
            self.eloc_fraction.to_string(),
            self.est_break_rate_sum.to_string(),
        ])
        .expect("in-memory csv write");
        String::from_utf8(w.into_inner().expect("in-memory csv flush"))
            .expect("csv output is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(a: &str, w: f64, cves: u32, eloc: u64) -> LedgerRow {
        LedgerRow {
            standard_name: Some(format!("{a} std")),
            abbreviation: a.into(),
            sites_using: Some(100),
            population: Some(10_000),
            raw_break_fraction: Some(0.0),
            weighted_break_rate: Some(w),
            agreement: Some(1.0),
            cves: Some(cves),
            high_or_severe: Some(0),
            eloc: Some(eloc),
            eloc_share: Some(0.0),
            attack_papers: Some(0),
        }
    }

    fn ledger() -> Ledger {
        Ledger {
            rows: vec![
                row("DOM1", 0.63, 1, 10),
                row("H-WW", 0.0, 16, 10),
                row("SVG", 0.0, 13, 10),
                row("WCR", 0.0, 12, 10),
                row("WEBA", 0.0, 10, 10),
                row("WEBGL", 0.004, 31, 10),
            ],
        }
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let p = parse_policy(r#"{"name":"m","blocked":["WEBGL"]}"#).unwrap();
        assert_eq!(p.version, 1);
        assert_eq!(p.whitelist, BTreeSet::from(["WCR".into()]));
        assert!(!p.debug && p.per_origin.is_empty());
    }

    #[test]
    fn canonical_wire_form() {
        let p = preset("conservative").unwrap();
        let text = serialize_policy(&p);
        assert!(text.starts_with(
            "{\n  \"version\": 1,\n  \"name\": \"conservative\",\n  \"blocked\": [\n"
        ));
        assert!(text.ends_with("  \"per_origin\": {},\n  \"debug\": false\n}\n"));
        assert_eq!(serialize_policy(&parse_policy(&text).unwrap()), text);
    }

    #[test]
    fn schema_violations() {
        assert!(matches!(
            parse_policy(r#"{"name":"m","blocked":[],"extra":1}"#),
            Err(PolicyError::Schema(_))
        ));
        assert_eq!(
            parse_policy(r#"{"version":2,"name":"m","blocked":[],"x":1}"#),
            Err(PolicyError::Version(2))
        );
        assert_eq!(
            parse_policy(r#"{"name":"m","blocked":["WCR"]}"#),
            Err(PolicyError::BlockedWhitelisted("WCR".into()))
        );
        assert!(matches!(
            parse_policy(
                r#"{"name":"m","blocked":[],"per_origin":{"https://a.example":{"allow":["SVG"],"block":["SVG"]}}}"#
            ),
            Err(PolicyError::OriginConflict { .. })
        ));
        assert!(matches!(
            parse_policy(
                r#"{"name":"m","blocked":[],"per_origin":{"*.a.example":{"block":["WCR"]}}}"#
            ),
            Err(PolicyError::OriginBlocksWhitelisted { .. })
        ));
        assert!(
            parse_policy(r#"{"name":"m","blocked":[],"per_origin":{"a.example":{}}}"#).is_err()
        );
        assert!(parse_policy(r#"{"blocked":[]}"#).is_err());
    }

    #[test]
    fn origin_patterns() {
        let exact: OriginPattern = "https://Maps.Example:8443".parse().unwrap();
        assert_eq!(exact.as_str(), "https://maps.example:8443");
        assert!(exact.matches("https://maps.example:8443"));
        assert!(!exact.matches("https://maps.example"));
        let suffix: OriginPattern = "*.example.com".parse().unwrap();
        assert!(suffix.matches("https://example.com"));
        assert!(suffix.matches("http://a.b.example.com:80"));
        assert!(!suffix.matches("https://badexample.com"));
        for bad in [
            "example.com",
            "https://",
            "https://a..b",
            "*.",
            "https://a.example:99999",
            "https://a.example:08",
        ] {
            assert!(bad.parse::<OriginPattern>().is_err(), "{bad}");
        }
    }

    #[test]
    fn per_origin_overrides() {
        let p = parse_policy(
            r#"{"name":"m","blocked":["SVG","WEBGL"],"per_origin":{
                "*.maps.example":{"allow":["WEBGL"]},
                "https://x.maps.example":{"block":["WEBGL"]}}}"#,
        )
        .unwrap();
        let all: BTreeSet<Abbrev> = ["SVG".into(), "WEBGL".into()].into();
        assert_eq!(p.blocked_for("https://news.example"), all);
        assert_eq!(
            p.blocked_for("https://a.maps.example"),
            BTreeSet::from(["SVG".into()])
        );
        assert_eq!(p.blocked_for("https://x.maps.example"), all);
    }

    #[test]
    fn generation() {
        let wl = default_whitelist();
        let p = generate_policy("g", &ledger(), 0.0, CostPredicate::MinCves(10), &wl);
        let names: Vec<&str> = p.blocked.iter().map(Abbrev::as_str).collect();
        assert_eq!(names, ["H-WW", "SVG", "WEBA", "WEBGL"]);
        let mut wl2 = wl.clone();
        wl2.insert("WEBGL".into());
        assert!(
            !generate_policy("g", &ledger(), 0.0, CostPredicate::MinCves(10), &wl2)
                .blocked
                .contains("WEBGL")
        );
        assert!(
            generate_policy("g", &ledger(), 1.0, CostPredicate::MinCves(1000), &wl)
                .blocked
                .is_empty()
        );
        p.validate().unwrap();
    }

    #[test]
    fn evaluation() {
        let l = ledger();
        let attr = |id: &str, stds: &[&str]| AttributionResult {
            cve_id: id.into(),
            status: AttributionStatus::Attributed,
            standards: stds.iter().map(|&s| s.into()).collect(),
            routes_used: BTreeSet::new(),
            primary_route: None,
        };
        let attributions = vec![
            attr("CVE-2014-0001", &["SVG", "WEBGL"]),
            attr("CVE-2014-0002", &["SVG"]),
            attr("CVE-2014-0003", &["DOM1"]),
            AttributionResult::discarded("CVE-2014-0004"),
        ];
        let p = BlockPolicy::new("p", ["SVG".into(), "WEBGL".into()]).unwrap();
        let s = evaluate_policy(&p, &l, &attributions).unwrap();
        assert_eq!((s.cve_covered, s.cve_total), (2, 3));
        assert_eq!(s.eloc_removed, 20);
        assert_eq!(s.eloc_fraction, 20.0 / 60.0);
        assert_eq!(s.est_break_rate_sum, 0.004);

        let empty = BlockPolicy::new("e", []).unwrap();
        let s = evaluate_policy(&empty, &l, &attributions).unwrap();
        assert_eq!(
            (s.standards_blocked, s.cve_covered, s.eloc_removed),
            (0, 0, 0)
        );
        assert_eq!(
            (s.cve_fraction, s.eloc_fraction, s.est_break_rate_sum),
            (0.0, 0.0, 0.0)
        );

        let unknown = BlockPolicy::new("u", ["NOPE".into()]).unwrap();
        assert_eq!(
            evaluate_policy(&unknown, &l, &attributions),
            Err(PolicyError::UnknownStandard("NOPE".into()))
        );
    }

    #[test]
    fn presets() {
        assert_eq!(
            preset("conservative").unwrap().blocked.len(),
            CONSERVATIVE.len()
        );
        assert_eq!(
            preset("aggressive").unwrap().blocked.len(),
            AGGRESSIVE.len()
        );
        assert!(CONSERVATIVE.iter().all(|a| AGGRESSIVE.contains(a)));
        assert!(!AGGRESSIVE.contains(&"WCR"));
        assert!(preset("lax").is_err());
    }
}
