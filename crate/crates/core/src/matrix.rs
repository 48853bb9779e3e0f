//! Dense square-or-rectangular matrices over exact Gaussian rationals.

use std::fmt;

use num::traits::Zero;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| scalar::to_string(self.get(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("rows of unequal length".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer entries, convenient for permutation and projection matrices.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| scalar::from_int(x)).collect())
                .collect(),
        )
    }

    /// Parses `[[entry, ...], ...]` where an entry is a number, a rational
    /// string such as `"1/2"`, or a `[re, im]` pair.
    pub fn from_json(doc: &Value, path: &str) -> Result<Self> {
        let rows = doc
            .as_array()
            .ok_or_else(|| Error::schema(path, "expected an array of rows"))?;
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let entries = row
                .as_array()
                .ok_or_else(|| Error::schema(format!("{path}[{i}]"), "expected an array"))?;
            let parsed = entries
                .iter()
                .enumerate()
                .map(|(j, v)| parse_entry(v, &format!("{path}[{i}][{j}]")))
                .collect::<Result<Vec<_>>>()?;
            out.push(parsed);
        }
        Self::from_rows(out)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array((0..self.cols).map(|j| entry_json(self.get(i, j))).collect()))
                .collect(),
        )
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

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &Matrix, op: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| op(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, scalar::conj(self.get(i, j)));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Largest entry modulus, as a float.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(scalar::abs_f64).fold(0.0, f64::max)
    }
}

fn entry_json(z: &Scalar) -> Value {
    let re = Value::String(scalar::rational_to_string(&z.re));
    if z.im.is_zero() {
        re
    } else {
        Value::Array(vec![re, Value::String(scalar::rational_to_string(&z.im))])
    }
}

fn parse_entry(v: &Value, path: &str) -> Result<Scalar> {
    match v {
        Value::Number(n) => scalar::parse_scalar(&n.to_string(), "0"),
        Value::String(s) => scalar::parse_scalar(s, "0"),
        Value::Array(parts) if parts.len() == 2 => {
            let re = parse_entry(&parts[0], path)?;
            let im = parse_entry(&parts[1], path)?;
            Ok(Scalar::new(re.re, im.re))
        }
        _ => Err(Error::schema(
            path,
            "expected a number, a rational string or [re, im]",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn products_and_adjoints() {
        let swap = Matrix::from_ints(&[&[0, 1], &[1, 0]]).unwrap();
        assert_eq!(swap.mul(&swap).unwrap(), Matrix::identity(2));
        let shift = Matrix::from_ints(&[&[0, 1], &[0, 0]]).unwrap();
        let p = shift.adjoint().mul(&shift).unwrap();
        assert_eq!(p, Matrix::from_ints(&[&[0, 0], &[0, 1]]).unwrap());
        assert_eq!(p.sub(&Matrix::identity(2)).unwrap().max_abs(), 1.0);
        assert!(Matrix::identity(2).mul(&Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn parses_entries_exactly() {
        let m = Matrix::from_json(&json!([["1/2", 0], [[0, 1], 0.25]]), "m").unwrap();
        assert_eq!(m.get(0, 0), &scalar::from_ratio(1, 2));
        assert_eq!(m.get(1, 0), &scalar::parse_scalar("0", "1").unwrap());
        assert_eq!(m.get(1, 1), &scalar::from_ratio(1, 4));
        assert_eq!(Matrix::from_json(&m.to_json(), "m").unwrap(), m);
    }
}
