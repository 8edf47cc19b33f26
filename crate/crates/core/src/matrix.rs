//! Dense nonnegative integer matrices.
//!
//! Used for adjacency matrices and for the `R`, `S` witnesses of elementary
//! and shift equivalence. Rectangular shapes are allowed because witnesses
//! are rarely square.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("integer overflow in matrix arithmetic")]
    Overflow,
    #[error("malformed matrix text: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row vectors; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: u64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.cols.max(1)).map(<[u64]>::to_vec).take(self.rows).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let term = a.checked_mul(other.get(k, j)).ok_or(MatrixError::Overflow)?;
                    let cell = &mut out.data[i * other.cols + j];
                    *cell = cell.checked_add(term).ok_or(MatrixError::Overflow)?;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, exp: u32) -> Result<IntMatrix, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::DimensionMismatch("power of a non-square matrix".into()));
        }
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Parses the square text format: first line `n`, then `n` rows of `n`
    /// whitespace-separated nonnegative integers.
    pub fn parse_text(text: &str) -> Result<Self, MatrixError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| MatrixError::Parse("empty input".into()))?
            .parse()
            .map_err(|e| MatrixError::Parse(format!("bad dimension: {e}")))?;
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let line = lines.next().ok_or_else(|| MatrixError::Parse(format!("missing row {r}")))?;
            let row: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|e| MatrixError::Parse(format!("row {r}: {e}"))))
                .collect::<Result<_, _>>()?;
            if row.len() != n {
                return Err(MatrixError::Parse(format!("row {r} has {} entries, expected {n}", row.len())));
            }
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(MatrixError::Parse("trailing data after matrix".into()));
        }
        Self::from_rows(rows)
    }

    /// Inverse of [`IntMatrix::parse_text`] for square matrices.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.rows);
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .to_rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(u64::to_string).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}
