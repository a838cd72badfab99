//! Pooling of externally computed per-imputation estimates.
//!
//! Input CSV columns: estimand, imputation_index, estimate, variance, with
//! indices covering 1..M exactly once per estimand and a single M across
//! the whole file.

use std::path::Path;

use copimp_core::{pool, PooledEstimate};

use crate::error::{io_err, CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PooledRow {
    pub estimand: String,
    pub pooled: PooledEstimate,
}

pub fn pool_from_csv(path: &Path) -> Result<Vec<PooledRow>> {
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
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Data {
            path: path.into(),
            message: format!("header is missing column {name}"),
        })
    };
    let (c_est, c_idx, c_val, c_var) =
        (col("estimand")?, col("imputation_index")?, col("estimate")?, col("variance")?);

    // (estimand, index, estimate, variance) in file order.
    let mut rows: Vec<(String, usize, f64, f64)> = Vec::new();
    for (ridx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
        let cell = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let bad = |column: &str, message: String| CliError::Cell {
            path: path.into(),
            row: ridx + 2,
            column: column.into(),
            message,
        };
        let idx: usize = cell(c_idx)
            .parse()
            .map_err(|_| bad("imputation_index", "not an integer".into()))?;
        let est: f64 =
            cell(c_val).parse().map_err(|_| bad("estimate", "not a number".into()))?;
        let var: f64 =
            cell(c_var).parse().map_err(|_| bad("variance", "not a number".into()))?;
        rows.push((cell(c_est), idx, est, var));
    }

    let mut estimands: Vec<String> = Vec::new();
    for (e, ..) in &rows {
        if !estimands.contains(e) {
            estimands.push(e.clone());
        }
    }
    let mut out = Vec::new();
    let mut common_m: Option<usize> = None;
    for estimand in estimands {
        let mine: Vec<&(String, usize, f64, f64)> =
            rows.iter().filter(|(e, ..)| *e == estimand).collect();
        let m = mine.len();
        if let Some(cm) = common_m {
            if cm != m {
                return Err(CliError::Data {
                    path: path.into(),
                    message: format!(
                        "estimand {estimand} has {m} imputations but earlier estimands have {cm}"
                    ),
                });
            }
        }
        common_m = Some(m);
        let mut by_index = vec![None; m];
        for (_, idx, est, var) in mine {
            if *idx == 0 || *idx > m {
                return Err(CliError::Data {
                    path: path.into(),
                    message: format!(
                        "estimand {estimand}: imputation index {idx} outside 1..={m}"
                    ),
                });
            }
            if by_index[idx - 1].is_some() {
                return Err(CliError::Data {
                    path: path.into(),
                    message: format!("estimand {estimand}: duplicate imputation index {idx}"),
                });
            }
            by_index[idx - 1] = Some((*est, *var));
        }
        if let Some(missing) = by_index.iter().position(|v| v.is_none()) {
            return Err(CliError::Data {
                path: path.into(),
                message: format!(
                    "estimand {estimand}: missing imputation index {}",
                    missing + 1
                ),
            });
        }
        let q: Vec<f64> = by_index.iter().map(|v| v.unwrap().0).collect();
        let w: Vec<f64> = by_index.iter().map(|v| v.unwrap().1).collect();
        out.push(PooledRow { estimand, pooled: pool(&q, &w)? });
    }
    Ok(out)
}

pub fn write_pooled(rows: &[PooledRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    w.write_record(["estimand", "m", "q_bar", "B", "W_bar", "T", "df"])
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    for row in rows {
        let p = &row.pooled;
        let df = p.degrees_of_freedom().map(|v| format!("{v}")).unwrap_or_default();
        w.write_record([
            row.estimand.as_str(),
            &p.m.to_string(),
            &format!("{}", p.q_bar),
            &format!("{}", p.between_b),
            &format!("{}", p.within_w),
            &format!("{}", p.total_t),
            &df,
        ])
        .map_err(|e| CliError::Data { path: path.into(), message: e.to_string() })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn pools_two_estimands() {
        let f = write_tmp(
            "estimand,imputation_index,estimate,variance\n\
             mu,1,1,0.5\nmu,2,2,0.5\nmu,3,3,0.5\n\
             beta,3,0.3,0.1\nbeta,1,0.1,0.1\nbeta,2,0.2,0.1\n",
        );
        let rows = pool_from_csv(f.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].estimand, "mu");
        assert_eq!(rows[0].pooled.q_bar, 2.0);
        assert_eq!(rows[0].pooled.between_b, 1.0);
        assert!((rows[0].pooled.total_t - (0.5 + 4.0 / 3.0)).abs() < 1e-15);
        assert!((rows[1].pooled.q_bar - 0.2).abs() < 1e-12);
    }

    #[test]
    fn missing_index_reported() {
        let f = write_tmp(
            "estimand,imputation_index,estimate,variance\nmu,1,1,0.5\nmu,3,3,0.5\n",
        );
        let err = pool_from_csv(f.path()).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("mu"), "{msg}");
        assert!(msg.contains("outside") || msg.contains("missing"), "{msg}");
    }

    #[test]
    fn duplicate_index_reported() {
        let f = write_tmp(
            "estimand,imputation_index,estimate,variance\nmu,1,1,0.5\nmu,1,2,0.5\n",
        );
        let err = pool_from_csv(f.path()).unwrap_err();
        assert!(format!("{err}").contains("duplicate imputation index 1"));
    }

    #[test]
    fn mixed_m_reported() {
        let f = write_tmp(
            "estimand,imputation_index,estimate,variance\n\
             mu,1,1,0.5\nmu,2,2,0.5\nbeta,1,1,0.5\n",
        );
        let err = pool_from_csv(f.path()).unwrap_err();
        assert!(format!("{err}").contains("earlier estimands"));
    }

    #[test]
    fn single_estimand_matches_direct_pool() {
        let f = write_tmp(
            "estimand,imputation_index,estimate,variance\nq,2,2,1\nq,1,0,1\n",
        );
        let rows = pool_from_csv(f.path()).unwrap();
        let direct = pool(&[0.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(rows[0].pooled, direct);
    }

    #[test]
    fn written_csv_has_expected_header() {
        let rows = vec![PooledRow {
            estimand: "mu".into(),
            pooled: pool(&[1.0, 2.0], &[0.1, 0.1]).unwrap(),
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_pooled(&rows, f.path()).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert!(text.starts_with("estimand,m,q_bar,B,W_bar,T,df\n"));
        assert!(text.contains("mu,2,1.5,"));
    }
}
