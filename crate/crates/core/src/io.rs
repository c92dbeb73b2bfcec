//! JSON file formats.
//!
//! Matrices and vectors are stored as
//! `{"rows": m, "cols": k, "data": [[re, im], ...]}` in row-major order; a
//! vector is a single column. Dumps written by the library use the same
//! schema with optional `basis` labels and a free-form `note`, so a dump can be
//! read back as a matrix file.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{from_c64, to_c64, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DenseComplexMatrix {
    pub fn from_rows<T: Real>(rows: &[Vec<Complex<T>>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows
            .iter()
            .flatten()
            .map(|z| {
                let z = to_c64(*z);
                [z.re, z.im]
            })
            .collect();
        DenseComplexMatrix {
            rows: rows.len(),
            cols,
            data,
            basis: None,
            note: None,
        }
    }

    pub fn with_basis(mut self, basis: Vec<String>) -> Self {
        self.basis = Some(basis);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Entry `(i, j)` as a complex number.
    pub fn get(&self, i: usize, j: usize) -> Complex<f64> {
        let [re, im] = self.data[i * self.cols + j];
        Complex::new(re, im)
    }

    pub fn to_matrix<T: Real>(&self) -> Result<ComplexMatrix<T>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Shape(format!(
                "data has {} entries, expected rows×cols = {}×{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Argument("matrix contains non-finite values".into()));
        }
        let data = self
            .data
            .iter()
            .map(|&[re, im]| from_c64(Complex::new(re, im)))
            .collect();
        ComplexMatrix::from_vec(self.rows, self.cols, data)
    }

    pub fn from_matrix<T: Real>(m: &ComplexMatrix<T>) -> Self {
        DenseComplexMatrix::from_rows(&m.to_rows())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Argument(format!("malformed matrix JSON: {e}")))
    }

    /// JSON with one matrix row per line.
    pub fn to_json_pretty(&self) -> String {
        let mut out = format!(
            "{{\n  \"rows\": {},\n  \"cols\": {},\n  \"data\": [",
            self.rows, self.cols
        );
        let width = self.cols.max(1);
        for (k, chunk) in self.data.chunks(width).enumerate() {
            let cells: Vec<String> = chunk.iter().map(json).collect();
            let sep = if k + 1 < self.data.len().div_ceil(width) {
                ","
            } else {
                ""
            };
            out.push_str(&format!("\n    {}{sep}", cells.join(", ")));
        }
        out.push_str(if self.data.is_empty() { "]" } else { "\n  ]" });
        if let Some(basis) = &self.basis {
            out.push_str(&format!(",\n  \"basis\": {}", json(basis.as_slice())));
        }
        if let Some(note) = &self.note {
            out.push_str(&format!(",\n  \"note\": {}", json(note.as_str())));
        }
        out.push_str("\n}");
        out
    }
}

fn json<S: Serialize + ?Sized>(v: &S) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_schema() {
        let m = DenseComplexMatrix::from_json(
            r#"{"rows": 2, "cols": 2, "data": [[0.75, 0], [0.25, 0], [0.25, 0], [0.75, 0]]}"#,
        )
        .unwrap();
        let e: ComplexMatrix<f64> = m.to_matrix().unwrap();
        assert_eq!(e[(1, 1)], Complex::new(0.75, 0.0));
        assert!(e.is_square());
    }

    #[test]
    fn bad_shape_and_syntax() {
        let m =
            DenseComplexMatrix::from_json(r#"{"rows": 2, "cols": 2, "data": [[1, 0]]}"#).unwrap();
        assert!(matches!(m.to_matrix::<f64>(), Err(Error::Shape(_))));
        assert!(DenseComplexMatrix::from_json(r#"{"rows": 2"#).is_err());
        assert!(DenseComplexMatrix::from_json(r#"{"rows": 1, "cols": 1, "data": [[1]]}"#).is_err());
    }

    #[test]
    fn dump_reads_back() {
        let m = ComplexMatrix::from_rows(vec![
            vec![Complex::new(0.1, -0.2)],
            vec![Complex::new(0.0, 1.0)],
        ])
        .unwrap();
        let text = DenseComplexMatrix::from_matrix(&m)
            .with_note("x")
            .to_json_pretty();
        let back: ComplexMatrix<f64> = DenseComplexMatrix::from_json(&text)
            .unwrap()
            .to_matrix()
            .unwrap();
        assert_eq!(back, m);
        let rho = DenseComplexMatrix::from_rows(&vec![
            vec![
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0)
            ];
            2
        ])
        .with_basis(vec!["0".into(), "1".into()]);
        let text = rho.to_json_pretty();
        assert_eq!(text.lines().filter(|l| l.contains("[1.0,0.0]")).count(), 2);
        assert_eq!(DenseComplexMatrix::from_json(&text).unwrap(), rho);
    }
}
