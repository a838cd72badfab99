//! JSON schema describing a dataset: the cluster column plus one entry per
//! data column with its kind and, for nominal columns, the level count or
//! the enumerated level names.

use serde::Deserialize;

use copimp_core::{ColumnKind, ColumnSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub cluster: String,
    pub columns: Vec<SchemaColumn>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaColumn {
    pub spec: ColumnSpec,
    /// Enumerated level names for nominal columns; when absent, codes are
    /// assigned by first appearance in the data.
    pub level_names: Option<Vec<String>>,
}

impl Schema {
    pub fn column(&self, name: &str) -> Option<&SchemaColumn> {
        self.columns.iter().find(|c| c.spec.name == name)
    }
}

#[derive(Deserialize)]
struct RawSchema {
    cluster: Option<String>,
    #[serde(alias = "cols")]
    columns: Option<Vec<RawColumn>>,
}

#[derive(Deserialize)]
struct RawColumn {
    name: Option<String>,
    kind: Option<String>,
    levels: Option<RawLevels>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawLevels {
    Count(usize),
    Names(Vec<String>),
}

/// Parses and validates a schema document, reporting every violation
/// rather than stopping at the first.
pub fn parse_schema(text: &str) -> Result<Schema> {
    let raw: RawSchema = serde_json::from_str(text)
        .map_err(|e| CliError::Schema(vec![format!("not valid JSON: {e}")]))?;
    let mut errors = Vec::new();
    let cluster = match raw.cluster {
        Some(c) if !c.is_empty() => c,
        _ => {
            errors.push("missing cluster column".to_string());
            String::new()
        }
    };
    let raw_cols = raw.columns.unwrap_or_default();
    if raw_cols.is_empty() {
        errors.push("schema declares no columns".to_string());
    }
    let mut seen: Vec<String> = Vec::new();
    let mut columns = Vec::new();
    for (i, rc) in raw_cols.iter().enumerate() {
        let name = match &rc.name {
            Some(n) if !n.is_empty() => n.clone(),
            _ => {
                errors.push(format!("column {} has no name", i + 1));
                continue;
            }
        };
        if seen.contains(&name) {
            errors.push(format!("duplicate column {name}"));
            continue;
        }
        seen.push(name.clone());
        if name == cluster {
            errors.push(format!("column {name} collides with the cluster column"));
        }
        let kind = match rc.kind.as_deref().and_then(ColumnKind::parse) {
            Some(k) => k,
            None => {
                errors.push(format!(
                    "column {name}: unknown kind {:?} (expected continuous|ordinal|binary|nominal)",
                    rc.kind.as_deref().unwrap_or("")
                ));
                continue;
            }
        };
        let (levels, level_names) = match (&rc.levels, kind) {
            (None, ColumnKind::Nominal) => {
                errors.push(format!("column {name}: nominal requires levels"));
                continue;
            }
            (None, ColumnKind::Binary) => (Some(2), None),
            (None, _) => (None, None),
            (Some(RawLevels::Count(k)), _) => (Some(*k), None),
            (Some(RawLevels::Names(names)), _) => {
                let mut uniq = names.clone();
                uniq.sort();
                uniq.dedup();
                if uniq.len() != names.len() {
                    errors.push(format!("column {name}: duplicate level names"));
                }
                (Some(names.len()), Some(names.clone()))
            }
        };
        let spec = ColumnSpec { name: name.clone(), kind, levels };
        if let Err(e) = spec.validate() {
            errors.push(format!("{e}"));
            continue;
        }
        if kind != ColumnKind::Nominal && kind != ColumnKind::Binary && levels.is_some() {
            errors.push(format!("column {name}: levels only apply to nominal/binary columns"));
            continue;
        }
        columns.push(SchemaColumn { spec, level_names });
    }
    if errors.is_empty() {
        Ok(Schema { cluster, columns })
    } else {
        Err(CliError::Schema(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_schema() {
        let s = parse_schema(r#"{"cluster":"hosp","cols":[{"name":"age","kind":"continuous"}]}"#)
            .unwrap();
        assert_eq!(s.cluster, "hosp");
        assert_eq!(s.columns.len(), 1);
        assert_eq!(s.columns[0].spec.name, "age");
        assert_eq!(s.columns[0].spec.kind, ColumnKind::Continuous);
    }

    #[test]
    fn columns_key_also_accepted() {
        let s = parse_schema(
            r#"{"cluster":"c","columns":[{"name":"g","kind":"binary"},
                {"name":"ms","kind":"nominal","levels":4}]}"#,
        )
        .unwrap();
        assert_eq!(s.columns[0].spec.levels, Some(2));
        assert_eq!(s.columns[1].spec.levels, Some(4));
    }

    #[test]
    fn enumerated_levels() {
        let s = parse_schema(
            r#"{"cluster":"c","columns":[{"name":"ms","kind":"nominal",
                "levels":["single","married","widowed"]}]}"#,
        )
        .unwrap();
        assert_eq!(s.columns[0].spec.levels, Some(3));
        assert_eq!(
            s.columns[0].level_names.as_deref().unwrap(),
            ["single", "married", "widowed"]
        );
    }

    #[test]
    fn nominal_without_levels_rejected() {
        let err =
            parse_schema(r#"{"cluster":"c","columns":[{"name":"x","kind":"nominal"}]}"#)
                .unwrap_err();
        assert!(format!("{err}").contains("nominal requires levels"));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = parse_schema(
            r#"{"cluster":"c","columns":[{"name":"x","kind":"continuous"},
                {"name":"x","kind":"ordinal"}]}"#,
        )
        .unwrap_err();
        assert!(format!("{err}").contains("duplicate column x"));
    }

    #[test]
    fn all_violations_reported_together() {
        let err = parse_schema(
            r#"{"columns":[{"name":"x","kind":"wat"},
                {"name":"y","kind":"nominal"},
                {"name":"y","kind":"ordinal"}]}"#,
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("missing cluster column"), "{msg}");
        assert!(msg.contains("unknown kind"), "{msg}");
        assert!(msg.contains("nominal requires levels"), "{msg}");
        assert!(msg.contains("duplicate column y"), "{msg}");
    }

    #[test]
    fn two_level_nominal_rejected() {
        let err = parse_schema(
            r#"{"cluster":"c","columns":[{"name":"x","kind":"nominal","levels":2}]}"#,
        )
        .unwrap_err();
        assert!(format!("{err}").contains("levels >= 3"));
    }
}
