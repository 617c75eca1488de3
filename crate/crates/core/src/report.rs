//! CSV renderings of intermediate tables. JSON renderings are plain serde.

use crate::benefit::BreakRateResult;
use crate::callgraph::ElocResult;
use crate::cve::CveTally;
use crate::ledger::format_break_cell;

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn eloc_csv(rows: &[ElocResult]) -> String {
    let mut out = String::from("standard,exclusive_functions,eloc,eloc_pct\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.2}\n",
            r.standard,
            r.exclusive_functions.len(),
            r.eloc,
            r.eloc_share * 100.0
        ));
    }
    out
}

pub fn tally_csv(t: &CveTally) -> String {
    let mut out = String::from("standard,cves,high_or_severe\n");
    for (a, c) in &t.per_standard {
        out.push_str(&format!("{a},{},{}\n", c.cve_count, c.high_or_severe_count));
    }
    out
}

/// Attributed CVEs by highest-precedence route.
pub fn routes_csv(t: &CveTally) -> String {
    let mut out = String::from("route,cves,fraction\n");
    for (route, f) in t.route_fractions() {
        let n = t.primary_routes.get(&route).copied().unwrap_or(0);
        out.push_str(&format!("{route},{n},{f}\n"));
    }
    out
}

pub fn break_rates_csv(rows: &[BreakRateResult]) -> String {
    let mut out = String::from(
        "standard,sites_using,population,paired_sites,broken,disputed,raw_break_fraction,weighted_break_rate,site_break_rate,agreement\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.standard,
            r.sites_using,
            r.population,
            r.paired_sites,
            r.broken,
            r.disputed,
            opt(r.raw_break_fraction),
            r.weighted_break_rate,
            format_break_cell(r.weighted_break_rate),
            opt(r.agreement),
        ));
    }
    out
}
