//! The feature catalog: every script-visible feature mapped to exactly one
//! Web API standard.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::idl::{is_identifier, InterfaceDefinition, MemberKind};
use crate::standard::{Abbrev, Standard};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureId {
    pub interface: String,
    pub member: String,
    pub kind: MemberKind,
}

impl FeatureId {
    pub fn new(interface: &str, member: &str, kind: MemberKind) -> Result<Self, CatalogError> {
        for part in [interface, member] {
            if !is_identifier(part) {
                return Err(CatalogError::BadIdentifier(part.to_string()));
            }
        }
        Ok(FeatureId {
            interface: interface.to_string(),
            member: member.to_string(),
            kind,
        })
    }
}

impl std::fmt::Display for FeatureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{} ({})", self.interface, self.member, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("interface {0} has no standard assignment")]
    UnassignedInterface(String),
    #[error("interface {interface}: member {member:?} declared inconsistently across partial definitions")]
    ConflictingMerge { interface: String, member: String },
    #[error("interface {0} is defined more than once")]
    DuplicateInterface(String),
    #[error("abbreviation {abbrev} is used for both {first:?} and {second:?}")]
    AbbrevClash {
        abbrev: String,
        first: String,
        second: String,
    },
    #[error("interface {0} is mapped to more than one standard")]
    DuplicateMapping(String),
    #[error("unknown standard {0}")]
    UnknownStandard(String),
    #[error("invalid identifier {0:?}")]
    BadIdentifier(String),
    #[error("invalid standard abbreviation {0:?}")]
    BadAbbrev(String),
    #[error("mapping row {row}: {message}")]
    Mapping { row: usize, message: String },
    #[error("catalog export: {0}")]
    Export(String),
}

/// Sidecar assignment of interfaces to standards.
#[derive(Debug, Clone, Default)]
pub struct StandardMapping {
    standards: BTreeMap<Abbrev, Standard>,
    interfaces: BTreeMap<String, Abbrev>,
}

impl StandardMapping {
    pub fn insert(
        &mut self,
        interface: &str,
        name: &str,
        abbrev: &str,
    ) -> Result<(), CatalogError> {
        if !is_identifier(interface) {
            return Err(CatalogError::BadIdentifier(interface.to_string()));
        }
        let abbrev =
            Abbrev::new(abbrev).ok_or_else(|| CatalogError::BadAbbrev(abbrev.to_string()))?;
        let name = name.trim();
        match self.standards.get(&abbrev) {
            Some(existing) if existing.name != name => {
                return Err(CatalogError::AbbrevClash {
                    abbrev: abbrev.to_string(),
                    first: existing.name.clone(),
                    second: name.to_string(),
                })
            }
            Some(_) => {}
            None => {
                self.standards.insert(
                    abbrev.clone(),
                    Standard {
                        name: name.to_string(),
                        abbrev: abbrev.clone(),
                    },
                );
            }
        }
        if self
            .interfaces
            .insert(interface.to_string(), abbrev)
            .is_some()
        {
            return Err(CatalogError::DuplicateMapping(interface.to_string()));
        }
        Ok(())
    }

    /// Reads `interface,standard_name,abbreviation` CSV (header row required).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, CatalogError> {
        #[derive(Deserialize)]
        struct Row {
            interface: String,
            standard_name: String,
            abbreviation: String,
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| CatalogError::Mapping {
            row: 1,
            message: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != ["interface", "standard_name", "abbreviation"] {
            return Err(CatalogError::Mapping {
                row: 1,
                message: "header must be interface,standard_name,abbreviation".into(),
            });
        }
        let mut mapping = StandardMapping::default();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| CatalogError::Mapping {
                row: i + 2,
                message: e.to_string(),
            })?;
            mapping.insert(&row.interface, &row.standard_name, &row.abbreviation)?;
        }
        Ok(mapping)
    }

    pub fn standard_of(&self, interface: &str) -> Option<&Standard> {
        self.interfaces
            .get(interface)
            .and_then(|a| self.standards.get(a))
    }

    pub fn standards(&self) -> impl Iterator<Item = &Standard> {
        self.standards.values()
    }
}

/// Immutable after construction; cheap to share between readers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureCatalog {
    standards: BTreeMap<Abbrev, Standard>,
    assignments: BTreeMap<FeatureId, Abbrev>,
}

/// Merges partial definitions into their base interface and assigns every
/// member to the interface's standard.
pub fn build_catalog(
    definitions: &[InterfaceDefinition],
    mapping: &StandardMapping,
) -> Result<FeatureCatalog, CatalogError> {
    // (kind, name) -> readonly, per interface, across all blocks
    let mut merged: BTreeMap<&str, BTreeMap<(MemberKind, &str), bool>> = BTreeMap::new();
    let mut bases: BTreeSet<&str> = BTreeSet::new();
    for def in definitions {
        if !def.is_partial && !bases.insert(def.name.as_str()) {
            return Err(CatalogError::DuplicateInterface(def.name.clone()));
        }
        let members = merged.entry(def.name.as_str()).or_default();
        for m in &def.members {
            if let Some(&ro) = members.get(&(m.kind, m.name.as_str())) {
                if ro != m.readonly {
                    return Err(CatalogError::ConflictingMerge {
                        interface: def.name.clone(),
                        member: m.name.clone(),
                    });
                }
                continue;
            }
            // a name may only be reused for the getter/setter pair of one attribute
            let clash = members.keys().any(|&(k, n)| {
                n == m.name
                    && k != m.kind
                    && !matches!(
                        (k, m.kind),
                        (MemberKind::AttributeGet, MemberKind::AttributeSet)
                            | (MemberKind::AttributeSet, MemberKind::AttributeGet)
                    )
            });
            if clash {
                return Err(CatalogError::ConflictingMerge {
                    interface: def.name.clone(),
                    member: m.name.clone(),
                });
            }
            members.insert((m.kind, m.name.as_str()), m.readonly);
        }
    }

    let mut catalog = FeatureCatalog {
        standards: mapping.standards.clone(),
        assignments: BTreeMap::new(),
    };
    for (iface, members) in merged {
        let standard = mapping
            .standard_of(iface)
            .ok_or_else(|| CatalogError::UnassignedInterface(iface.to_string()))?;
        // readonly getter merged with a writable declaration elsewhere
        let gets_readonly = members
            .iter()
            .filter(|((k, _), _)| *k == MemberKind::AttributeGet)
            .filter(|(_, &ro)| ro)
            .map(|((_, n), _)| *n)
            .collect::<BTreeSet<_>>();
        for (kind, name) in members.keys() {
            if *kind == MemberKind::AttributeSet && gets_readonly.contains(name) {
                return Err(CatalogError::ConflictingMerge {
                    interface: iface.to_string(),
                    member: name.to_string(),
                });
            }
            catalog
                .assignments
                .insert(FeatureId::new(iface, name, *kind)?, standard.abbrev.clone());
        }
    }
    Ok(catalog)
}

/// JSON export: `{standards:[{name,abbrev}], features:[{interface,member,kind,standard_abbrev}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogExport {
    pub standards: Vec<Standard>,
    pub features: Vec<ExportedFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportedFeature {
    pub interface: String,
    pub member: String,
    pub kind: MemberKind,
    pub standard_abbrev: Abbrev,
}

impl FeatureCatalog {
    pub fn standards(&self) -> impl Iterator<Item = &Standard> {
        self.standards.values()
    }

    pub fn standard(&self, abbrev: &str) -> Option<&Standard> {
        self.standards.get(abbrev)
    }

    pub fn contains(&self, abbrev: &str) -> bool {
        self.standards.contains_key(abbrev)
    }

    pub fn abbrevs(&self) -> impl Iterator<Item = &Abbrev> {
        self.standards.keys()
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&FeatureId, &Abbrev)> {
        self.assignments.iter()
    }

    pub fn standard_of(&self, feature: &FeatureId) -> Option<&Abbrev> {
        self.assignments.get(feature)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// The preimage of `standard` under the assignment map.
    pub fn features_of(&self, standard: &str) -> Result<BTreeSet<&FeatureId>, CatalogError> {
        if !self.standards.contains_key(standard) {
            return Err(CatalogError::UnknownStandard(standard.to_string()));
        }
        Ok(self
            .assignments
            .iter()
            .filter(|(_, a)| a.as_str() == standard)
            .map(|(f, _)| f)
            .collect())
    }

    pub fn export(&self) -> CatalogExport {
        CatalogExport {
            standards: self.standards.values().cloned().collect(),
            features: self
                .assignments
                .iter()
                .map(|(f, a)| ExportedFeature {
                    interface: f.interface.clone(),
                    member: f.member.clone(),
                    kind: f.kind,
                    standard_abbrev: a.clone(),
                })
                .collect(),
        }
    }

    pub fn from_export(export: CatalogExport) -> Result<Self, CatalogError> {
        let mut standards = BTreeMap::new();
        for s in export.standards {
            if let Some(prev) = standards.insert(s.abbrev.clone(), s.clone()) {
                return Err(CatalogError::AbbrevClash {
                    abbrev: s.abbrev.to_string(),
                    first: prev.name,
                    second: s.name,
                });
            }
        }
        let mut assignments = BTreeMap::new();
        for f in export.features {
            if !standards.contains_key(&f.standard_abbrev) {
                return Err(CatalogError::UnknownStandard(f.standard_abbrev.to_string()));
            }
            let id = FeatureId::new(&f.interface, &f.member, f.kind)?;
            if assignments.insert(id.clone(), f.standard_abbrev).is_some() {
                return Err(CatalogError::Export(format!("feature {id} listed twice")));
            }
        }
        Ok(FeatureCatalog {
            standards,
            assignments,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(&self.export()).expect("catalog export serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let export: CatalogExport =
            serde_json::from_str(text).map_err(|e| CatalogError::Export(e.to_string()))?;
        Self::from_export(export)
    }
}
