//! Matrix interchange: JSON `{"rows", "cols", "data": [[re, im], ...]}` (row-major)
//! and CSV with one matrix row per line, entries as `re,im` pairs.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numkit::{Matrix, C64};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows, cols, data }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Matrix> {
        if j.rows == 0 || j.cols == 0 {
            return Err(Error::InvalidInput("rows and cols must be positive".into()));
        }
        if j.data.len() != j.rows * j.cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {}x{} matrix, found {}",
                j.rows * j.cols,
                j.rows,
                j.cols,
                j.data.len()
            )));
        }
        if j.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Matrix::from_fn(j.rows, j.cols, |r, c| {
            let [re, im] = j.data[r * j.cols + c];
            C64::new(re, im)
        }))
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    }
}

pub fn matrix_from_json(s: &str) -> Result<Matrix> {
    let j: MatrixJson = serde_json::from_str(s).map_err(json_error)?;
    Matrix::try_from(j)
}

pub fn matrix_to_json(m: &Matrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix serializes")
}

/// Parses any JSON document into `T`, reporting line and column on failure.
pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(json_error)
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols())
            .flat_map(|j| {
                let z = m[(i, j)];
                [z.re.to_string(), z.im.to_string()]
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(s: &str) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(s.as_bytes());
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                column: 0,
                msg: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() % 2 != 0 {
            return Err(Error::Parse {
                line,
                column: rec.len(),
                msg: "odd number of fields; entries are re,im pairs".into(),
            });
        }
        let mut vals = Vec::with_capacity(rec.len());
        for (k, field) in rec.iter().enumerate() {
            let x: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: k + 1,
                msg: format!("not a number: '{field}'"),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: k + 1,
                    msg: "non-finite entry".into(),
                });
            }
            vals.push(x);
        }
        let row: Vec<C64> = vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line,
                    column: 0,
                    msg: format!("row has {} entries, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 0,
            msg: "empty matrix".into(),
        });
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Reads a matrix, choosing CSV for `.csv` files and JSON otherwise.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let s = std::fs::read_to_string(path)?;
    if is_csv(path) {
        matrix_from_csv(&s)
    } else {
        matrix_from_json(&s)
    }
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let s = if is_csv(path) {
        matrix_to_csv(m)
    } else {
        matrix_to_json(m)
    };
    std::fs::write(path, s)?;
    Ok(())
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// serde adapters so that structs can hold `Matrix` fields directly.
pub mod serde_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Matrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        Matrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

pub mod serde_matrix_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Matrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        let js: Vec<MatrixJson> = v.iter().map(MatrixJson::from).collect();
        js.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Matrix>, D::Error> {
        let js = Vec::<MatrixJson>::deserialize(d)?;
        js.into_iter()
            .map(|j| Matrix::try_from(j).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_matrix_opt {
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &Option<Matrix>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixJson::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Matrix>, D::Error> {
        Option::<MatrixJson>::deserialize(d)?
            .map(|j| Matrix::try_from(j).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{ginibre, seeded_rng};

    #[test]
    fn identity_roundtrip() {
        let m = Matrix::identity(3, 3);
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert_eq!(back, m);
        let back = matrix_from_csv(&matrix_to_csv(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn random_roundtrip_is_exact() {
        let mut rng = seeded_rng(4);
        let m = ginibre(5, 5, &mut rng);
        let via_csv = matrix_from_csv(&matrix_to_csv(&m)).unwrap();
        let via_json = matrix_from_json(&matrix_to_json(&via_csv)).unwrap();
        for (a, b) in m.iter().zip(via_json.iter()) {
            assert!((a - b).norm() <= 1e-15 * a.norm());
        }
    }

    #[test]
    fn json_layout_is_row_major() {
        let m = Matrix::from_fn(2, 2, |i, j| C64::new((2 * i + j) as f64, 0.0));
        let j = MatrixJson::from(&m);
        assert_eq!(j.data[1], [1.0, 0.0]);
        assert_eq!(j.data[2], [2.0, 0.0]);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = matrix_from_json("{\"rows\": 2,\n \"cols\": 2, \"data\": [[1,0],}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn wrong_entry_count_is_rejected() {
        let err = matrix_from_json(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn malformed_csv_reports_position() {
        let err = matrix_from_csv("1,0,2,0\n3,0,x,0\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 3)),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(matrix_from_csv("1,0,2\n"), Err(Error::Parse { .. })));
        assert!(matches!(matrix_from_csv("1,0,2,0\n1,0\n"), Err(Error::Parse { line: 2, .. })));
    }
}
