//! Mixed-type clustered datasets.
//!
//! Continuous, ordinal, and binary variables live in the ordered block as
//! plain reals (a 2-level variable is trivially ordered, so binaries ride
//! the copula rather than the probit block); nominal variables carry
//! category codes 1..K and are modeled through latent utilities.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Continuous,
    Ordinal,
    Binary,
    Nominal,
}

impl ColumnKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Ordinal => "ordinal",
            ColumnKind::Binary => "binary",
            ColumnKind::Nominal => "nominal",
        }
    }

    pub fn parse(s: &str) -> Option<ColumnKind> {
        match s {
            "continuous" => Some(ColumnKind::Continuous),
            "ordinal" => Some(ColumnKind::Ordinal),
            "binary" => Some(ColumnKind::Binary),
            "nominal" => Some(ColumnKind::Nominal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Category count: Some(K >= 3) for nominal, Some(2) for binary,
    /// None otherwise.
    pub levels: Option<usize>,
}

impl ColumnSpec {
    pub fn continuous(name: &str) -> Self {
        ColumnSpec { name: name.into(), kind: ColumnKind::Continuous, levels: None }
    }

    pub fn ordinal(name: &str) -> Self {
        ColumnSpec { name: name.into(), kind: ColumnKind::Ordinal, levels: None }
    }

    pub fn binary(name: &str) -> Self {
        ColumnSpec { name: name.into(), kind: ColumnKind::Binary, levels: Some(2) }
    }

    pub fn nominal(name: &str, k: usize) -> Self {
        ColumnSpec { name: name.into(), kind: ColumnKind::Nominal, levels: Some(k) }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ColumnKind::Nominal => match self.levels {
                None => Err(Error::InvalidData(format!("column {}: nominal requires levels", self.name))),
                Some(k) if k < 3 => Err(Error::InvalidData(format!(
                    "column {}: nominal requires levels >= 3 (declare 2-level variables as binary)",
                    self.name
                ))),
                Some(_) => Ok(()),
            },
            ColumnKind::Binary => match self.levels {
                None | Some(2) => Ok(()),
                Some(k) => Err(Error::InvalidData(format!(
                    "column {}: binary is fixed at 2 levels, got {k}",
                    self.name
                ))),
            },
            _ => Ok(()),
        }
    }
}

/// A continuous/ordinal/binary column: real values plus an observed mask.
/// Unobserved cells hold NaN so accidental reads surface loudly.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedColumn {
    pub spec: ColumnSpec,
    pub values: Vec<f64>,
    pub observed: Vec<bool>,
}

/// A nominal column: codes in 1..=K (0 where unobserved) and the level
/// names in code order, kept for round-tripping the original labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalColumn {
    pub spec: ColumnSpec,
    pub codes: Vec<usize>,
    pub observed: Vec<bool>,
    pub level_names: Vec<String>,
}

impl NominalColumn {
    pub fn k(&self) -> usize {
        self.spec.levels.unwrap_or(self.level_names.len())
    }
}

/// Identifies a column's block and within-block index, in original file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnSlot {
    Ordered(usize),
    Nominal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedDataset {
    n_rows: usize,
    cluster_column: String,
    cluster_names: Vec<String>,
    cluster_of: Vec<usize>,
    ordered: Vec<OrderedColumn>,
    nominal: Vec<NominalColumn>,
    column_order: Vec<ColumnSlot>,
}

/// Per-column missingness figure, as a percentage rounded to 2 decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct MissingSummaryRow {
    pub column: String,
    pub missing_pct: f64,
    pub n_missing: usize,
}

impl MixedDataset {
    pub fn new(
        cluster_column: String,
        cluster_names: Vec<String>,
        cluster_of: Vec<usize>,
        ordered: Vec<OrderedColumn>,
        nominal: Vec<NominalColumn>,
        column_order: Vec<ColumnSlot>,
    ) -> Result<Self> {
        let n_rows = cluster_of.len();
        if n_rows == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        let m = cluster_names.len();
        if m == 0 {
            return Err(Error::InvalidData("dataset has no clusters".into()));
        }
        let mut seen = alloc::vec![false; m];
        for &c in &cluster_of {
            if c >= m {
                return Err(Error::InvalidData(format!("cluster index {c} out of range")));
            }
            seen[c] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidData("every cluster must be nonempty".into()));
        }
        if column_order.len() != ordered.len() + nominal.len() {
            return Err(Error::InvalidData("column order does not cover all columns".into()));
        }
        for col in &ordered {
            col.spec.validate()?;
            if col.values.len() != n_rows || col.observed.len() != n_rows {
                return Err(Error::InvalidData(format!(
                    "column {} length does not match row count",
                    col.spec.name
                )));
            }
            if !col.observed.iter().any(|&o| o) {
                return Err(Error::InvalidData(format!(
                    "column {} has no observed values",
                    col.spec.name
                )));
            }
            for (i, (&v, &o)) in col.values.iter().zip(&col.observed).enumerate() {
                if o && !v.is_finite() {
                    return Err(Error::InvalidData(format!(
                        "column {} row {} observed but not finite",
                        col.spec.name,
                        i + 1
                    )));
                }
            }
        }
        for col in &nominal {
            col.spec.validate()?;
            if col.codes.len() != n_rows || col.observed.len() != n_rows {
                return Err(Error::InvalidData(format!(
                    "column {} length does not match row count",
                    col.spec.name
                )));
            }
            if !col.observed.iter().any(|&o| o) {
                return Err(Error::InvalidData(format!(
                    "column {} has no observed values",
                    col.spec.name
                )));
            }
            let k = col.k();
            for (i, (&code, &o)) in col.codes.iter().zip(&col.observed).enumerate() {
                if o && (code == 0 || code > k) {
                    return Err(Error::InvalidData(format!(
                        "column {} row {}: code {code} outside 1..={k}",
                        col.spec.name,
                        i + 1
                    )));
                }
            }
        }
        Ok(MixedDataset {
            n_rows,
            cluster_column,
            cluster_names,
            cluster_of,
            ordered,
            nominal,
            column_order,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_clusters(&self) -> usize {
        self.cluster_names.len()
    }

    pub fn cluster_column(&self) -> &str {
        &self.cluster_column
    }

    pub fn cluster_names(&self) -> &[String] {
        &self.cluster_names
    }

    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn rows_by_cluster(&self) -> Vec<Vec<usize>> {
        let mut rows = alloc::vec![Vec::new(); self.n_clusters()];
        for (r, &c) in self.cluster_of.iter().enumerate() {
            rows[c].push(r);
        }
        rows
    }

    pub fn ordered(&self) -> &[OrderedColumn] {
        &self.ordered
    }

    pub fn nominal(&self) -> &[NominalColumn] {
        &self.nominal
    }

    pub fn column_order(&self) -> &[ColumnSlot] {
        &self.column_order
    }

    pub fn ordered_mut(&mut self) -> &mut [OrderedColumn] {
        &mut self.ordered
    }

    pub fn nominal_mut(&mut self) -> &mut [NominalColumn] {
        &mut self.nominal
    }

    /// Names of data columns in original file order.
    pub fn column_names(&self) -> Vec<&str> {
        self.column_order
            .iter()
            .map(|slot| match slot {
                ColumnSlot::Ordered(i) => self.ordered[*i].spec.name.as_str(),
                ColumnSlot::Nominal(i) => self.nominal[*i].spec.name.as_str(),
            })
            .collect()
    }

    pub fn find_ordered(&self, name: &str) -> Option<usize> {
        self.ordered.iter().position(|c| c.spec.name == name)
    }

    pub fn find_nominal(&self, name: &str) -> Option<usize> {
        self.nominal.iter().position(|c| c.spec.name == name)
    }

    pub fn has_missing(&self) -> bool {
        self.ordered.iter().any(|c| c.observed.iter().any(|&o| !o))
            || self.nominal.iter().any(|c| c.observed.iter().any(|&o| !o))
    }

    /// Per-column missing percentages (100 × unobserved / rows, 2 decimals),
    /// in original column order.
    pub fn missing_summary(&self) -> Vec<MissingSummaryRow> {
        let pct = |observed: &[bool]| {
            let miss = observed.iter().filter(|&&o| !o).count();
            let raw = 100.0 * miss as f64 / self.n_rows as f64;
            (math::round(raw * 100.0) / 100.0, miss)
        };
        self.column_order
            .iter()
            .map(|slot| {
                let (name, (p, n)) = match slot {
                    ColumnSlot::Ordered(i) => {
                        (&self.ordered[*i].spec.name, pct(&self.ordered[*i].observed))
                    }
                    ColumnSlot::Nominal(i) => {
                        (&self.nominal[*i].spec.name, pct(&self.nominal[*i].observed))
                    }
                };
                MissingSummaryRow { column: name.clone(), missing_pct: p, n_missing: n }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_dataset() -> MixedDataset {
        MixedDataset::new(
            "site".into(),
            alloc::vec!["a".into(), "b".into()],
            alloc::vec![0, 0, 1, 1],
            alloc::vec![OrderedColumn {
                spec: ColumnSpec::continuous("age"),
                values: alloc::vec![1.0, f64::NAN, 3.0, 4.0],
                observed: alloc::vec![true, false, true, true],
            }],
            alloc::vec![NominalColumn {
                spec: ColumnSpec::nominal("color", 3),
                codes: alloc::vec![1, 2, 3, 1],
                observed: alloc::vec![true, true, true, true],
            level_names: alloc::vec!["red".into(), "green".into(), "blue".into()],
            }],
            alloc::vec![ColumnSlot::Ordered(0), ColumnSlot::Nominal(0)],
        )
        .unwrap()
    }

    #[test]
    fn missing_summary_percentages() {
        let ds = tiny_dataset();
        let rows = ds.missing_summary();
        assert_eq!(rows[0].column, "age");
        assert_eq!(rows[0].missing_pct, 25.0);
        assert_eq!(rows[0].n_missing, 1);
        assert_eq!(rows[1].missing_pct, 0.0);
    }

    #[test]
    fn rejects_all_missing_column() {
        let err = MixedDataset::new(
            "c".into(),
            alloc::vec!["a".into()],
            alloc::vec![0, 0],
            alloc::vec![OrderedColumn {
                spec: ColumnSpec::continuous("x"),
                values: alloc::vec![f64::NAN, f64::NAN],
                observed: alloc::vec![false, false],
            }],
            alloc::vec![],
            alloc::vec![ColumnSlot::Ordered(0)],
        )
        .unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("no observed values"), "{msg}");
    }

    #[test]
    fn rejects_out_of_range_nominal_code() {
        let err = MixedDataset::new(
            "c".into(),
            alloc::vec!["a".into()],
            alloc::vec![0],
            alloc::vec![],
            alloc::vec![NominalColumn {
                spec: ColumnSpec::nominal("n", 3),
                codes: alloc::vec![4],
                observed: alloc::vec![true],
                level_names: alloc::vec!["x".into(), "y".into(), "z".into()],
            }],
            alloc::vec![ColumnSlot::Nominal(0)],
        )
        .unwrap_err();
        assert!(alloc::format!("{err}").contains("outside"));
    }

    #[test]
    fn rejects_two_level_nominal() {
        assert!(ColumnSpec::nominal("n", 2).validate().is_err());
        assert!(ColumnSpec::nominal("n", 3).validate().is_ok());
        assert!(ColumnSpec::binary("b").validate().is_ok());
    }

    #[test]
    fn rejects_empty_cluster() {
        let err = MixedDataset::new(
            "c".into(),
            alloc::vec!["a".into(), "ghost".into()],
            alloc::vec![0, 0],
            alloc::vec![OrderedColumn {
                spec: ColumnSpec::continuous("x"),
                values: alloc::vec![1.0, 2.0],
                observed: alloc::vec![true, true],
            }],
            alloc::vec![],
            alloc::vec![ColumnSlot::Ordered(0)],
        )
        .unwrap_err();
        assert!(alloc::format!("{err}").contains("nonempty"));
    }
}
