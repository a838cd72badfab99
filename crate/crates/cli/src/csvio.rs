//! CSV ingestion and emission: UTF-8, comma-separated, header row, empty
//! cell (or an optional extra sentinel such as "NA") means missing.

use std::collections::HashMap;
use std::path::Path;

use copimp_core::{
    ColumnKind, ColumnSlot, DatasetMask, MixedDataset, NominalColumn, OrderedColumn,
};

use crate::error::{io_err, CliError, Result};
use crate::schema::Schema;

/// Loads a dataset against its schema. `na` is an additional sentinel for
/// missing cells on top of the empty string (pass "" for none).
pub fn load_dataset(path: &Path, schema: &Schema, na: &str) -> Result<MixedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    let headers: Vec<String> =
        reader
            .headers()
            .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();

    let cluster_pos = headers.iter().position(|h| *h == schema.cluster).ok_or_else(|| {
        CliError::Data {
            path: path.into(),
            message: format!("header is missing the cluster column {}", schema.cluster),
        }
    })?;
    let mut col_pos = Vec::with_capacity(schema.columns.len());
    for col in &schema.columns {
        let pos = headers.iter().position(|h| *h == col.spec.name).ok_or_else(|| {
            CliError::Data {
                path: path.into(),
                message: format!("header is missing column {}", col.spec.name),
            }
        })?;
        col_pos.push(pos);
    }
    for (i, h) in headers.iter().enumerate() {
        if i != cluster_pos && !col_pos.contains(&i) {
            return Err(CliError::Data {
                path: path.into(),
                message: format!("unexpected column {h} (not in schema)"),
            });
        }
    }

    let is_missing = |cell: &str| cell.is_empty() || (!na.is_empty() && cell == na);

    let mut cluster_names: Vec<String> = Vec::new();
    let mut cluster_index: HashMap<String, usize> = HashMap::new();
    let mut cluster_of: Vec<usize> = Vec::new();

    struct RawCol {
        values: Vec<f64>,
        codes: Vec<usize>,
        observed: Vec<bool>,
        level_names: Vec<String>,
        level_index: HashMap<String, usize>,
    }
    let mut raw: Vec<RawCol> = schema
        .columns
        .iter()
        .map(|c| {
            let (level_names, level_index) = match &c.level_names {
                Some(names) => {
                    let idx =
                        names.iter().enumerate().map(|(i, n)| (n.clone(), i + 1)).collect();
                    (names.clone(), idx)
                }
                None => (Vec::new(), HashMap::new()),
            };
            RawCol {
                values: Vec::new(),
                codes: Vec::new(),
                observed: Vec::new(),
                level_names,
                level_index,
            }
        })
        .collect();

    for (row_idx, record) in reader.records().enumerate() {
        let row_no = row_idx + 2; // 1-based, after the header
        let record =
            record.map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
        let cluster_label = record.get(cluster_pos).unwrap_or("").trim().to_string();
        if cluster_label.is_empty() {
            return Err(CliError::Cell {
                path: path.into(),
                row: row_no,
                column: schema.cluster.clone(),
                message: "cluster label is empty".into(),
            });
        }
        let next = cluster_names.len();
        let ci = *cluster_index.entry(cluster_label.clone()).or_insert(next);
        if ci == next {
            cluster_names.push(cluster_label);
        }
        cluster_of.push(ci);

        for (sidx, col) in schema.columns.iter().enumerate() {
            let cell = record.get(col_pos[sidx]).unwrap_or("").trim();
            let rc = &mut raw[sidx];
            if is_missing(cell) {
                rc.observed.push(false);
                if col.spec.kind == ColumnKind::Nominal {
                    rc.codes.push(0);
                } else {
                    rc.values.push(f64::NAN);
                }
                continue;
            }
            rc.observed.push(true);
            if col.spec.kind == ColumnKind::Nominal {
                let k = col.spec.levels.unwrap_or(0);
                if let Some(&code) = rc.level_index.get(cell) {
                    rc.codes.push(code);
                } else if col.level_names.is_some() {
                    return Err(CliError::Cell {
                        path: path.into(),
                        row: row_no,
                        column: col.spec.name.clone(),
                        message: format!("value {cell:?} outside declared levels"),
                    });
                } else {
                    if rc.level_names.len() == k {
                        return Err(CliError::Cell {
                            path: path.into(),
                            row: row_no,
                            column: col.spec.name.clone(),
                            message: format!(
                                "value {cell:?} is a {}th distinct level but only {k} are declared",
                                k + 1
                            ),
                        });
                    }
                    rc.level_names.push(cell.to_string());
                    let code = rc.level_names.len();
                    rc.level_index.insert(cell.to_string(), code);
                    rc.codes.push(code);
                }
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => rc.values.push(v),
                    _ => {
                        return Err(CliError::Cell {
                            path: path.into(),
                            row: row_no,
                            column: col.spec.name.clone(),
                            message: format!("cannot parse {cell:?} as a number"),
                        })
                    }
                }
            }
        }
    }

    // Binary columns must carry at most two distinct observed values.
    for (sidx, col) in schema.columns.iter().enumerate() {
        if col.spec.kind == ColumnKind::Binary {
            let mut distinct: Vec<f64> = raw[sidx]
                .values
                .iter()
                .zip(&raw[sidx].observed)
                .filter(|(_, &o)| o)
                .map(|(&v, _)| v)
                .collect();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup();
            if distinct.len() > 2 {
                return Err(CliError::Data {
                    path: path.into(),
                    message: format!(
                        "binary column {} has {} distinct observed values",
                        col.spec.name,
                        distinct.len()
                    ),
                });
            }
        }
    }

    let mut ordered = Vec::new();
    let mut nominal = Vec::new();
    let mut order = Vec::new();
    for (sidx, col) in schema.columns.iter().enumerate() {
        let rc = &mut raw[sidx];
        if col.spec.kind == ColumnKind::Nominal {
            // Pad undeclared levels so codes keep meaning even when some
            // level never appears in the data.
            let k = col.spec.levels.unwrap_or(rc.level_names.len());
            while rc.level_names.len() < k {
                rc.level_names.push(format!("level{}", rc.level_names.len() + 1));
            }
            order.push(ColumnSlot::Nominal(nominal.len()));
            nominal.push(NominalColumn {
                spec: col.spec.clone(),
                codes: std::mem::take(&mut rc.codes),
                observed: std::mem::take(&mut rc.observed),
                level_names: rc.level_names.clone(),
            });
        } else {
            order.push(ColumnSlot::Ordered(ordered.len()));
            ordered.push(OrderedColumn {
                spec: col.spec.clone(),
                values: std::mem::take(&mut rc.values),
                observed: std::mem::take(&mut rc.observed),
            });
        }
    }
    MixedDataset::new(
        schema.cluster.clone(),
        cluster_names,
        cluster_of,
        ordered,
        nominal,
        order,
    )
    .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })
}

/// Writes a dataset with its original header and row order; unobserved
/// cells become empty fields.
pub fn write_dataset(data: &MixedDataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    let mut header = vec![data.cluster_column().to_string()];
    header.extend(data.column_names().iter().map(|s| s.to_string()));
    w.write_record(&header)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    for row in 0..data.n_rows() {
        let mut record = vec![data.cluster_names()[data.cluster_of()[row]].clone()];
        for slot in data.column_order() {
            record.push(match slot {
                ColumnSlot::Ordered(i) => {
                    let col = &data.ordered()[*i];
                    if col.observed[row] {
                        format!("{}", col.values[row])
                    } else {
                        String::new()
                    }
                }
                ColumnSlot::Nominal(i) => {
                    let col = &data.nominal()[*i];
                    if col.observed[row] {
                        col.level_names[col.codes[row] - 1].clone()
                    } else {
                        String::new()
                    }
                }
            });
        }
        w.write_record(&record)
            .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Writes the observation mask (1 = observed) for the data columns.
pub fn write_mask(data: &MixedDataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    let header: Vec<String> = data.column_names().iter().map(|s| s.to_string()).collect();
    w.write_record(&header)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    let mask = DatasetMask::from_dataset(data);
    for row in 0..data.n_rows() {
        let record: Vec<&str> = mask
            .columns
            .iter()
            .map(|(_, obs)| if obs[row] { "1" } else { "0" })
            .collect();
        w.write_record(&record)
            .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<DatasetMask> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut columns: Vec<(String, Vec<bool>)> =
        headers.into_iter().map(|h| (h, Vec::new())).collect();
    for (row_idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
        for (i, (name, flags)) in columns.iter_mut().enumerate() {
            match record.get(i).map(str::trim) {
                Some("1") => flags.push(true),
                Some("0") => flags.push(false),
                other => {
                    return Err(CliError::Cell {
                        path: path.into(),
                        row: row_idx + 2,
                        column: name.clone(),
                        message: format!("mask cell must be 0 or 1, got {other:?}"),
                    })
                }
            }
        }
    }
    Ok(DatasetMask { columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_schema;
    use std::io::Write as _;

    fn schema() -> Schema {
        parse_schema(
            r#"{"cluster":"site","columns":[
                {"name":"age","kind":"continuous"},
                {"name":"ms","kind":"nominal","levels":3}]}"#,
        )
        .unwrap()
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_and_masks_missing_cells() {
        let f = write_tmp("site,age,ms\na,31.5,x\na,,y\nb,47,z\nb,12.25,x\n");
        let ds = load_dataset(f.path(), &schema(), "").unwrap();
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.n_clusters(), 2);
        let age = &ds.ordered()[0];
        assert_eq!(age.observed, vec![true, false, true, true]);
        assert_eq!(ds.missing_summary()[0].missing_pct, 25.0);
        // First-appearance coding.
        assert_eq!(ds.nominal()[0].level_names, vec!["x", "y", "z"]);
        assert_eq!(ds.nominal()[0].codes, vec![1, 2, 3, 1]);
    }

    #[test]
    fn na_sentinel_accepted() {
        let f = write_tmp("site,age,ms\na,NA,x\na,2,y\na,3,z\n");
        let ds = load_dataset(f.path(), &schema(), "NA").unwrap();
        assert_eq!(ds.ordered()[0].observed, vec![false, true, true]);
    }

    #[test]
    fn bad_number_reports_location() {
        let f = write_tmp("site,age,ms\na,31.5,x\na,abc,y\na,1,z\n");
        let err = load_dataset(f.path(), &schema(), "").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("row 3"), "{msg}");
        assert!(msg.contains("age"), "{msg}");
        assert!(msg.contains("abc"), "{msg}");
    }

    #[test]
    fn fully_empty_column_rejected() {
        let f = write_tmp("site,age,ms\na,,x\na,,y\na,,z\n");
        let err = load_dataset(f.path(), &schema(), "").unwrap_err();
        assert!(format!("{err}").contains("no observed values"));
    }

    #[test]
    fn enumerated_levels_reject_unknown_value() {
        let schema = parse_schema(
            r#"{"cluster":"c","columns":[
                {"name":"ms","kind":"nominal","levels":["a","b","c"]}]}"#,
        )
        .unwrap();
        let f = write_tmp("c,ms\n1,a\n1,weird\n");
        let err = load_dataset(f.path(), &schema, "").unwrap_err();
        assert!(format!("{err}").contains("outside declared levels"));
    }

    #[test]
    fn too_many_first_appearance_levels_rejected() {
        let f = write_tmp("site,age,ms\na,1,u\na,2,v\na,3,w\na,4,x\n");
        let err = load_dataset(f.path(), &schema(), "").unwrap_err();
        assert!(format!("{err}").contains("distinct level"));
    }

    #[test]
    fn binary_with_three_values_rejected() {
        let schema = parse_schema(
            r#"{"cluster":"c","columns":[{"name":"g","kind":"binary"}]}"#,
        )
        .unwrap();
        let f = write_tmp("c,g\n1,0\n1,1\n1,2\n");
        let err = load_dataset(f.path(), &schema, "").unwrap_err();
        assert!(format!("{err}").contains("distinct observed values"));
    }

    #[test]
    fn unexpected_column_rejected() {
        let f = write_tmp("site,age,ms,extra\na,1,x,9\n");
        let err = load_dataset(f.path(), &schema(), "").unwrap_err();
        assert!(format!("{err}").contains("unexpected column extra"));
    }

    #[test]
    fn roundtrip_preserves_observed_values_bit_exactly() {
        let f = write_tmp("site,age,ms\na,31.5,x\na,,y\nb,0.1,z\nb,6,x\n");
        let ds = load_dataset(f.path(), &schema(), "").unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_dataset(&ds, out.path()).unwrap();
        let ds2 = load_dataset(out.path(), &schema(), "").unwrap();
        assert_eq!(ds.n_rows(), ds2.n_rows());
        for (a, b) in ds.ordered().iter().zip(ds2.ordered()) {
            assert_eq!(a.observed, b.observed);
            for (va, vb) in a.values.iter().zip(&b.values) {
                if va.is_finite() || vb.is_finite() {
                    assert_eq!(va.to_bits(), vb.to_bits());
                }
            }
        }
        assert_eq!(ds.nominal(), ds2.nominal());
        assert_eq!(ds.cluster_names(), ds2.cluster_names());
    }

    #[test]
    fn mask_roundtrip() {
        let f = write_tmp("site,age,ms\na,31.5,\na,,y\nb,47,z\n");
        let ds = load_dataset(f.path(), &schema(), "").unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_mask(&ds, out.path()).unwrap();
        let mask = read_mask(out.path()).unwrap();
        assert_eq!(mask.observed("age").unwrap(), &[true, false, true]);
        assert_eq!(mask.observed("ms").unwrap(), &[false, true, true]);
    }
}
