//! Paired site-test aggregation: tester agreement and usage-weighted break rates.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standard::Abbrev;

pub const DEFAULT_POPULATION: u32 = 10_000;

/// Score a site was broken with. Only scores where both testers agree on 3
/// count as broken.
pub const BROKEN: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenefitError {
    #[error("{file} row {row}: {message}")]
    Row {
        file: &'static str,
        row: usize,
        message: String,
    },
    #[error("{site} / {standard}: expected exactly two testers, found {testers}")]
    Unpaired {
        site: String,
        standard: Abbrev,
        testers: usize,
    },
    #[error("{site} / {standard}: tester {tester} scored twice")]
    DuplicateTester {
        site: String,
        standard: Abbrev,
        tester: String,
    },
    #[error("no paired tests for {0}")]
    NoData(Abbrev),
    #[error("no usage record for tested standard {0}")]
    MissingUsage(Abbrev),
    #[error("duplicate usage record for {0}")]
    DuplicateUsage(Abbrev),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteTest {
    pub site: String,
    #[serde(rename = "standard_abbrev")]
    pub standard: Abbrev,
    pub tester: String,
    pub score: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair<'a> {
    pub site: &'a str,
    pub standard: &'a Abbrev,
    pub scores: (u8, u8),
}

impl Pair<'_> {
    pub fn broken(&self) -> bool {
        self.scores == (BROKEN, BROKEN)
    }

    pub fn agrees(&self) -> bool {
        self.scores.0 == self.scores.1
    }
}

/// Groups tests by (standard, site). Each group must hold exactly two
/// distinct testers. Scores within a pair are ordered by tester id, so the
/// result does not depend on input order.
pub fn pair_tests(tests: &[SiteTest]) -> Result<Vec<Pair<'_>>, BenefitError> {
    let mut groups: BTreeMap<(&Abbrev, &str), BTreeMap<&str, u8>> = BTreeMap::new();
    for t in tests {
        let g = groups.entry((&t.standard, t.site.as_str())).or_default();
        if g.insert(t.tester.as_str(), t.score).is_some() {
            return Err(BenefitError::DuplicateTester {
                site: t.site.clone(),
                standard: t.standard.clone(),
                tester: t.tester.clone(),
            });
        }
    }
    groups
        .into_iter()
        .map(|((standard, site), g)| {
            let scores: Vec<u8> = g.into_values().collect();
            match scores[..] {
                [a, b] => Ok(Pair {
                    site,
                    standard,
                    scores: (a, b),
                }),
                _ => Err(BenefitError::Unpaired {
                    site: site.to_string(),
                    standard: standard.clone(),
                    testers: scores.len(),
                }),
            }
        })
        .collect()
}

/// Fraction of pairs with equal scores; `None` for no pairs.
pub fn agreement(pairs: &[Pair<'_>]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    Some(pairs.iter().filter(|p| p.agrees()).count() as f64 / pairs.len() as f64)
}

/// Fraction of the standard's paired sites where both testers scored 3.
pub fn raw_break_fraction(pairs: &[Pair<'_>], standard: &str) -> Result<f64, BenefitError> {
    let (n, k) = pairs
        .iter()
        .filter(|p| p.standard.as_str() == standard)
        .fold((0usize, 0usize), |(n, k), p| {
            (n + 1, k + usize::from(p.broken()))
        });
    if n == 0 {
        return Err(BenefitError::NoData(Abbrev::from(standard)));
    }
    Ok(k as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub sites_using: u32,
    pub population: u32,
}

impl UsageRecord {
    pub fn share(&self) -> f64 {
        if self.population == 0 {
            0.0
        } else {
            self.sites_using as f64 / self.population as f64
        }
    }
}

pub fn weighted_break_rate(raw: f64, usage: UsageRecord) -> f64 {
    raw * usage.share()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakRateResult {
    pub standard: Abbrev,
    pub sites_using: u32,
    pub population: u32,
    pub paired_sites: u32,
    pub broken: u32,
    /// Pairs whose two scores differ.
    pub disputed: u32,
    /// `None` when the standard has no tests (only allowed for zero usage).
    pub raw_break_fraction: Option<f64>,
    pub weighted_break_rate: f64,
    pub agreement: Option<f64>,
}

/// One row per usage record, sorted by abbreviation.
///
/// A standard used by no site may lack tests; its weighted rate is 0. A used
/// standard without tests, or a tested standard without usage, is an error.
pub fn break_rate_table(
    tests: &[SiteTest],
    usage: &BTreeMap<Abbrev, UsageRecord>,
) -> Result<Vec<BreakRateResult>, BenefitError> {
    let pairs = pair_tests(tests)?;
    let mut by_std: BTreeMap<&Abbrev, Vec<Pair<'_>>> = BTreeMap::new();
    for p in pairs {
        by_std.entry(p.standard).or_default().push(p);
    }
    if let Some(s) = by_std.keys().find(|s| !usage.contains_key(**s)) {
        return Err(BenefitError::MissingUsage((*s).clone()));
    }
    usage
        .iter()
        .map(|(abbrev, &u)| {
            let ps = by_std.get(abbrev).map_or(&[][..], Vec::as_slice);
            if ps.is_empty() && u.sites_using > 0 {
                return Err(BenefitError::NoData(abbrev.clone()));
            }
            let raw = if ps.is_empty() {
                None
            } else {
                Some(raw_break_fraction(ps, abbrev.as_str())?)
            };
            Ok(BreakRateResult {
                standard: abbrev.clone(),
                sites_using: u.sites_using,
                population: u.population,
                paired_sites: ps.len() as u32,
                broken: ps.iter().filter(|p| p.broken()).count() as u32,
                disputed: ps.iter().filter(|p| !p.agrees()).count() as u32,
                raw_break_fraction: raw,
                weighted_break_rate: raw.map_or(0.0, |r| weighted_break_rate(r, u)),
                agreement: agreement(ps),
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct RawTest {
    site: String,
    standard_abbrev: String,
    tester: String,
    score: String,
}

/// Reads `site,standard_abbrev,tester,score`.
pub fn read_site_tests<R: Read>(reader: R) -> Result<Vec<SiteTest>, BenefitError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RawTest>().enumerate() {
        let err = |message: String| BenefitError::Row {
            file: "site tests",
            row: i + 2,
            message,
        };
        let row = row.map_err(|e| err(e.to_string()))?;
        let score: u8 = match row.score.parse() {
            Ok(s @ 1..=3) => s,
            _ => return Err(err(format!("score {:?} is not 1, 2 or 3", row.score))),
        };
        if row.site.is_empty() || row.tester.is_empty() {
            return Err(err("empty site or tester".into()));
        }
        let standard = Abbrev::new(row.standard_abbrev)
            .ok_or_else(|| err("bad standard abbreviation".into()))?;
        out.push(SiteTest {
            site: row.site,
            standard,
            tester: row.tester,
            score,
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RawUsage {
    standard_abbrev: String,
    sites_using: u32,
    #[serde(default)]
    population: Option<u32>,
}

/// Reads `standard_abbrev,sites_using[,population]`; population defaults to 10000.
pub fn read_usage<R: Read>(reader: R) -> Result<BTreeMap<Abbrev, UsageRecord>, BenefitError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = BTreeMap::new();
    for (i, row) in rdr.deserialize::<RawUsage>().enumerate() {
        let err = |message: String| BenefitError::Row {
            file: "usage",
            row: i + 2,
            message,
        };
        let row = row.map_err(|e| err(e.to_string()))?;
        let abbrev = Abbrev::new(row.standard_abbrev)
            .ok_or_else(|| err("bad standard abbreviation".into()))?;
        let population = row.population.unwrap_or(DEFAULT_POPULATION);
        if population == 0 || row.sites_using > population {
            return Err(err(format!(
                "sites_using {} outside 0..={population}",
                row.sites_using
            )));
        }
        let rec = UsageRecord {
            sites_using: row.sites_using,
            population,
        };
        if out.insert(abbrev.clone(), rec).is_some() {
            return Err(BenefitError::DuplicateUsage(abbrev));
        }
    }
    Ok(out)
}

/// Standards present in a test set.
pub fn tested_standards(tests: &[SiteTest]) -> BTreeSet<&Abbrev> {
    tests.iter().map(|t| &t.standard).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tests_from(pairs: &[(u8, u8)], std: &str) -> Vec<SiteTest> {
        pairs
            .iter()
            .enumerate()
            .flat_map(|(i, &(a, b))| {
                [("a", a), ("b", b)].map(|(t, s)| SiteTest {
                    site: format!("s{i}.example"),
                    standard: std.into(),
                    tester: t.into(),
                    score: s,
                })
            })
            .collect()
    }

    #[test]
    fn agreement_counts_equal_pairs() {
        let t = tests_from(&[(1, 1), (3, 3), (2, 1)], "X");
        let p = pair_tests(&t).unwrap();
        assert_eq!(agreement(&p), Some(2.0 / 3.0));
        let t = tests_from(&[(1, 1), (2, 2)], "X");
        assert_eq!(agreement(&pair_tests(&t).unwrap()), Some(1.0));
        assert_eq!(agreement(&[]), None);
    }

    #[test]
    fn consensus_breaks() {
        let t = tests_from(&[(3, 3), (3, 2), (1, 1)], "X");
        let p = pair_tests(&t).unwrap();
        assert_eq!(raw_break_fraction(&p, "X").unwrap(), 1.0 / 3.0);
        let t = tests_from(&[(1, 2), (2, 2)], "X");
        assert_eq!(
            raw_break_fraction(&pair_tests(&t).unwrap(), "X").unwrap(),
            0.0
        );
        assert_eq!(
            raw_break_fraction(&p, "Y"),
            Err(BenefitError::NoData("Y".into()))
        );
    }

    #[test]
    fn weighting() {
        let u = |n| UsageRecord {
            sites_using: n,
            population: 10_000,
        };
        assert_eq!(weighted_break_rate(0.5, u(5000)), 0.25);
        assert_eq!(weighted_break_rate(0.9, u(0)), 0.0);
        assert!(weighted_break_rate(0.117, u(852)) < 0.01);
    }

    #[test]
    fn pairing_errors() {
        let mut t = tests_from(&[(1, 1)], "X");
        t.pop();
        assert!(matches!(
            pair_tests(&t),
            Err(BenefitError::Unpaired { testers: 1, .. })
        ));
        let mut t = tests_from(&[(1, 1)], "X");
        t.push(SiteTest {
            tester: "c".into(),
            ..t[0].clone()
        });
        assert!(matches!(
            pair_tests(&t),
            Err(BenefitError::Unpaired { testers: 3, .. })
        ));
        let mut t = tests_from(&[(1, 1)], "X");
        t[1].tester = "a".into();
        assert!(matches!(
            pair_tests(&t),
            Err(BenefitError::DuplicateTester { .. })
        ));
    }

    #[test]
    fn table_rules() {
        let t = tests_from(&[(3, 3), (1, 1), (1, 2), (1, 1)], "X");
        let mut usage = BTreeMap::from([(
            Abbrev::from("X"),
            UsageRecord {
                sites_using: 2000,
                population: 10_000,
            },
        )]);
        usage.insert(
            "Z".into(),
            UsageRecord {
                sites_using: 0,
                population: 10_000,
            },
        );
        let table = break_rate_table(&t, &usage).unwrap();
        assert_eq!(table[0].standard.as_str(), "X");
        assert_eq!(table[0].weighted_break_rate, 0.25 * 0.2);
        assert_eq!(table[0].disputed, 1);
        assert_eq!(table[1].raw_break_fraction, None);
        assert_eq!(table[1].weighted_break_rate, 0.0);

        usage.get_mut("Z").unwrap().sites_using = 5;
        assert_eq!(
            break_rate_table(&t, &usage),
            Err(BenefitError::NoData("Z".into()))
        );
        usage.remove("X");
        assert_eq!(
            break_rate_table(&t, &usage),
            Err(BenefitError::MissingUsage("X".into()))
        );
    }

    #[test]
    fn csv_readers() {
        let t = read_site_tests("site,standard_abbrev,tester,score\na.example,X,t1,3\n".as_bytes())
            .unwrap();
        assert_eq!(t[0].score, 3);
        for bad in ["0", "4", "x", ""] {
            let text = format!("site,standard_abbrev,tester,score\na.example,X,t1,{bad}\n");
            assert!(read_site_tests(text.as_bytes()).is_err(), "{bad}");
        }
        let u = read_usage("standard_abbrev,sites_using\nX,5\n".as_bytes()).unwrap();
        assert_eq!(u["X"].population, DEFAULT_POPULATION);
        assert!(
            read_usage("standard_abbrev,sites_using,population\nX,11,10\n".as_bytes()).is_err()
        );
        assert!(read_usage("standard_abbrev,sites_using\nX,1\nX,2\n".as_bytes()).is_err());
    }
}
