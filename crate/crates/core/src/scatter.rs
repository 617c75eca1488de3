//! Cost-versus-break-rate point data for plotting.

use std::fmt;
use std::str::FromStr;

use crate::ledger::{Ledger, LedgerRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostAxis {
    Cves,
    Severe,
    Eloc,
}

impl CostAxis {
    pub fn column(self) -> &'static str {
        match self {
            CostAxis::Cves => "cves",
            CostAxis::Severe => "high_or_severe",
            CostAxis::Eloc => "eloc",
        }
    }

    fn value(self, r: &LedgerRow) -> Option<u64> {
        match self {
            CostAxis::Cves => r.cves.map(u64::from),
            CostAxis::Severe => r.high_or_severe.map(u64::from),
            CostAxis::Eloc => r.eloc,
        }
    }
}

impl FromStr for CostAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cve" | "cves" => Ok(CostAxis::Cves),
            "severe" => Ok(CostAxis::Severe),
            "eloc" | "loc" => Ok(CostAxis::Eloc),
            other => Err(format!(
                "unknown axis {other:?} (expected cve, severe or eloc)"
            )),
        }
    }
}

impl fmt::Display for CostAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// `standard,<cost>,weighted_break_rate`, one row per ledger row that has
/// both values, in ledger order.
pub fn scatter_csv(ledger: &Ledger, x: CostAxis) -> String {
    let mut out = format!("standard,{},weighted_break_rate\n", x.column());
    for r in &ledger.rows {
        if let (Some(c), Some(w)) = (x.value(r), r.weighted_break_rate) {
            out.push_str(&format!("{},{c},{w}\n", r.abbreviation));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ledger_is_header_only() {
        assert_eq!(
            scatter_csv(&Ledger::default(), CostAxis::Severe),
            "standard,high_or_severe,weighted_break_rate\n"
        );
    }

    #[test]
    fn axis_names() {
        assert_eq!("cve".parse(), Ok(CostAxis::Cves));
        assert_eq!("eloc".parse(), Ok(CostAxis::Eloc));
        assert!("x".parse::<CostAxis>().is_err());
    }
}
