//! Dense row-major matrix of exact rationals.

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::structural(format!(
                "expected {rows}x{cols} = {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(RatMatrix { rows, cols, data })
    }

    /// Builds a `rows.len() x cols` matrix; every row must have length `cols`.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::structural(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(RatMatrix {
            rows: n,
            cols,
            data,
        })
    }

    /// Convenience for tests and fixtures: integer numerators over a shared denominator.
    pub fn from_ints(rows: &[&[i64]], den: i64) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                r.iter().map(move |&n| Rational::new(n, den))
            })
            .collect();
        RatMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    /// Exact product `self * rhs`.
    pub fn mul(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::structural(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Exact rank over the rationals.
    ///
    /// Gaussian elimination that, for each column, pivots on the
    /// largest-magnitude remaining entry (first such row on ties).
    pub fn rank(&self) -> usize {
        let mut a = self.to_rows();
        let (n, m) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..m {
            if rank == n {
                break;
            }
            let mut pivot: Option<usize> = None;
            for r in rank..n {
                if a[r][col].is_zero() {
                    continue;
                }
                match pivot {
                    Some(p) if a[r][col].abs() <= a[p][col].abs() => {}
                    _ => pivot = Some(r),
                }
            }
            let Some(p) = pivot else { continue };
            a.swap(rank, p);
            let pivot_row = a[rank].clone();
            for row in a.iter_mut().skip(rank + 1) {
                if row[col].is_zero() {
                    continue;
                }
                let factor = &row[col] / &pivot_row[col];
                for c in col..m {
                    if !pivot_row[c].is_zero() {
                        let delta = &factor * &pivot_row[c];
                        row[c] -= &delta;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// True when every entry is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.data.iter().all(Rational::is_binary)
    }
}
