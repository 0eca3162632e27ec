//! Absorbing Markov chain engine.
//!
//! Every board vertex `x` contributes a transient state `v_x` (the buck is
//! at `x`) and an absorbing state `w_x` (`x` has won). With transient states
//! listed first, the transition matrix has block form `(Q R / 0 I)`; the
//! absorption matrix `N * R` with `N = (I - Q)^-1` gives, in row `j`, the
//! probabilities of ending in each absorbing state when starting from
//! transient state `j`. All arithmetic is exact rational; pivoting tests for
//! zero only, never magnitude.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::graph::{Graph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkovError {
    /// The claimed absorbing rows are not identity rows over a zero block.
    MalformedBlockStructure,
    /// Elimination hit an all-zero pivot column; the chain is not absorbing.
    SingularMatrix,
}

impl fmt::Display for MarkovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovError::MalformedBlockStructure => {
                write!(f, "absorbing rows do not form a (0 | I) block")
            }
            MarkovError::SingularMatrix => write!(f, "matrix is singular"),
        }
    }
}

impl core::error::Error for MarkovError {}

/// Dense matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> RationalMatrix {
        RationalMatrix {
            rows,
            cols,
            entries: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> RationalMatrix {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> RationalMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c));
        RationalMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sum(&self, i: usize) -> BigRational {
        self.row(i).iter().sum()
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RationalMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e -= o;
        }
        out
    }

    /// Exact inverse by Gauss-Jordan elimination. Pivots are chosen as the
    /// first row with a nonzero entry in the pivot column.
    pub fn inverse(&self) -> Result<RationalMatrix, MarkovError> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RationalMatrix::identity(n);

        for col in 0..n {
            let pivot_row = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(MarkovError::SingularMatrix)?;
            if pivot_row != col {
                a.swap_rows(col, pivot_row);
                inv.swap_rows(col, pivot_row);
            }
            let pivot = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= &pivot;
                inv[(col, j)] /= &pivot;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for j in 0..n {
                    let t = &factor * &a[(col, j)];
                    a[(r, j)] -= t;
                    let t = &factor * &inv[(col, j)];
                    inv[(r, j)] -= t;
                }
            }
        }
        Ok(inv)
    }

    /// Solves `A x = b` exactly by forward elimination and back-substitution.
    pub fn solve(&self, b: &[BigRational]) -> Result<Vec<BigRational>, MarkovError> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();

        for col in 0..n {
            let pivot_row = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(MarkovError::SingularMatrix)?;
            if pivot_row != col {
                a.swap_rows(col, pivot_row);
                rhs.swap(col, pivot_row);
            }
            let pivot = a[(col, col)].clone();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = &a[(r, col)] / &pivot;
                for j in col..n {
                    let t = &factor * &a[(col, j)];
                    a[(r, j)] -= t;
                }
                let t = &factor * &rhs[col];
                rhs[r] -= t;
            }
        }
        for col in (0..n).rev() {
            let mut acc = rhs[col].clone();
            for j in col + 1..n {
                if !a[(col, j)].is_zero() {
                    acc -= &a[(col, j)] * &rhs[j];
                }
            }
            rhs[col] = acc / &a[(col, col)];
        }
        Ok(rhs)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for col in 0..self.cols {
            self.entries.swap(i * self.cols + col, j * self.cols + col);
        }
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.entries[i * self.cols + j]
    }
}

fn reciprocal(n: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(n))
}

/// The full `2m x 2m` transition matrix in canonical order: transient states
/// in vertex order, then absorbing states in the same order. Every row sums
/// to exactly 1.
pub fn transition_matrix(g: &Graph) -> RationalMatrix {
    let order: Vec<VertexId> = g.vertices().collect();
    transition_matrix_ordered(g, &order)
}

/// As [`transition_matrix`], with transient states listed in the given
/// vertex order (absorbing states follow in the same order). Useful for
/// matching a printed matrix whose state order differs from vertex order.
pub fn transition_matrix_ordered(g: &Graph, order: &[VertexId]) -> RationalMatrix {
    let m = g.vertex_count();
    assert_eq!(order.len(), m);
    let mut position = vec![usize::MAX; m];
    for (i, v) in order.iter().enumerate() {
        position[v.0] = i;
    }
    assert!(position.iter().all(|&p| p != usize::MAX));

    let mut t = RationalMatrix::zeros(2 * m, 2 * m);
    for (i, &v) in order.iter().enumerate() {
        let share = reciprocal(g.degree(v) + 1);
        for &u in g.neighbors(v) {
            t[(i, position[u.0])] = share.clone();
        }
        t[(i, m + i)] = share;
        t[(m + i, m + i)] = BigRational::one();
    }
    t
}

/// Splits a canonical-form transition matrix into its `Q` (transient to
/// transient) and `R` (transient to absorbing) blocks. `m` is the number of
/// transient states.
pub fn partition(
    t: &RationalMatrix,
    m: usize,
) -> Result<(RationalMatrix, RationalMatrix), MarkovError> {
    let total = t.rows();
    if t.cols() != total || m > total {
        return Err(MarkovError::MalformedBlockStructure);
    }
    for i in m..total {
        for j in 0..total {
            let e = &t[(i, j)];
            let ok = if i == j { e.is_one() } else { e.is_zero() };
            if !ok {
                return Err(MarkovError::MalformedBlockStructure);
            }
        }
    }
    let mut q = RationalMatrix::zeros(m, m);
    let mut r = RationalMatrix::zeros(m, total - m);
    for i in 0..m {
        for j in 0..m {
            q[(i, j)] = t[(i, j)].clone();
        }
        for j in m..total {
            r[(i, j - m)] = t[(i, j)].clone();
        }
    }
    Ok((q, r))
}

/// The fundamental matrix `N = (I - Q)^-1`.
pub fn fundamental_matrix(q: &RationalMatrix) -> Result<RationalMatrix, MarkovError> {
    RationalMatrix::identity(q.rows()).sub(q).inverse()
}

/// The absorption matrix `N * R`: row `j` holds the exact probabilities of
/// ending in each absorbing state when starting from transient state `j`.
/// Every row sums to exactly 1.
pub fn absorption_matrix(
    q: &RationalMatrix,
    r: &RationalMatrix,
) -> Result<RationalMatrix, MarkovError> {
    Ok(fundamental_matrix(q)?.mul(r))
}

/// Exact winning probability of every vertex, playing from `g.start()`.
///
/// This is the start row of `N * R` re-indexed by winning vertex, computed
/// by a single linear solve instead of a full inversion.
pub fn win_probabilities(g: &Graph) -> Result<Vec<BigRational>, MarkovError> {
    let m = g.vertex_count();
    // I - Q^T, built directly from adjacency.
    let mut a = RationalMatrix::identity(m);
    for v in g.vertices() {
        let share = reciprocal(g.degree(v) + 1);
        for &u in g.neighbors(v) {
            a[(u.0, v.0)] = -share.clone();
        }
    }
    let mut rhs = vec![BigRational::zero(); m];
    rhs[g.start().0] = BigRational::one();
    let y = a.solve(&rhs)?;
    // Row entry for absorbing state w_j is y_j * R[j][j].
    Ok(y
        .into_iter()
        .enumerate()
        .map(|(j, yj)| yj * reciprocal(g.degree(VertexId(j)) + 1))
        .collect())
}
