//! Rank lower bounds on the number of terms.
//!
//! If `f(a_i, b_j) = Σ_{n ∈ A} g(a_i, n)·h(b_j, n)` on a grid, the grid matrix
//! factors through `|A|` dimensions, so its rank is at most `|A|`. The
//! [`lowerbound_check`] applies this to a built representation, and
//! [`certify_exp_matrix_nonsingular`] certifies that `[e^{a_i b_j}]` has full
//! rank for distinct `a` and `b`, which is why no finite number of rectangular
//! terms can represent `e^{xy}`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::builder::{Arg, BuilderError, PairFunction, Representation};
use crate::exactnum::{exp_enclosure, interval_det, DetConfig, IntervalValue, NumError, Rational};
use crate::funcio::{FuncError, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("inner dimensions differ: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("exponent vectors have lengths {a} and {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("exponent vectors must be nonempty")]
    Empty,
    #[error("duplicate entry {value} in {list}")]
    Duplicate { list: &'static str, value: String },
    #[error("position {position} out of range ({len} points)")]
    OutOfRange { position: usize, len: usize },
    #[error("term-count bound violated: {active} active indices but grid rank {rank}")]
    LowerBoundViolated { active: usize, rank: usize },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Function(#[from] FuncError),
    #[error(transparent)]
    Builder(#[from] BuilderError),
}

/// Dense rectangular matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn new(data: Vec<Vec<Rational>>) -> Result<Self, RankError> {
        let cols = data.first().map_or(0, Vec::len);
        if let Some((row, r)) = data.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(RankError::Ragged {
                row,
                found: r.len(),
                expected: cols,
            });
        }
        Ok(RationalMatrix {
            rows: data.len(),
            cols,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![vec![Rational::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = Rational::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r][c]
    }

    pub fn as_rows(&self) -> &[Vec<Rational>] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        RationalMatrix {
            rows: self.cols,
            cols: self.rows,
            data: (0..self.cols)
                .map(|c| (0..self.rows).map(|r| self.data[r][c].clone()).collect())
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Result<Self, RankError> {
        if self.cols != rhs.rows {
            return Err(RankError::ShapeMismatch {
                left: self.cols,
                right: rhs.rows,
            });
        }
        let data = (0..self.rows)
            .map(|r| {
                (0..rhs.cols)
                    .map(|c| (0..self.cols).map(|k| &self.data[r][k] * &rhs.data[k][c]).sum())
                    .collect()
            })
            .collect();
        Ok(RationalMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        })
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.iter()).finish()
    }
}

/// Rank over the rationals.
///
/// Rows are scaled to integers, then reduced by fraction-free elimination;
/// every division in the loop is exact.
pub fn exact_rank(m: &RationalMatrix) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .data
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..m.cols {
        let Some(pivot) = (rank..m.rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(pivot, rank);
        for i in rank + 1..m.rows {
            for j in c + 1..m.cols {
                let cross = &a[rank][c] * &a[i][j] - &a[i][c] * &a[rank][j];
                debug_assert!((&cross % &prev).is_zero());
                a[i][j] = cross / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    rank
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NonsingularCertified,
    Indeterminate,
}

/// Outcome of [`certify_exp_matrix_nonsingular`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    /// Entry tolerance of the last attempt.
    pub eps: Rational,
    /// Determinant enclosure of the last attempt; absent when elimination
    /// could not produce one.
    pub enclosure: Option<IntervalValue>,
    pub refinements: u32,
}

fn check_distinct(list: &'static str, xs: &[Rational]) -> Result<(), RankError> {
    let mut seen = BTreeSet::new();
    for x in xs {
        if !seen.insert(x) {
            return Err(RankError::Duplicate {
                list,
                value: x.to_string(),
            });
        }
    }
    Ok(())
}

/// Encloses the entries of `[e^{a_i b_j}]` to within `eps`.
pub fn exp_matrix(a: &[Rational], b: &[Rational], eps: &Rational) -> Result<Vec<Vec<IntervalValue>>, NumError> {
    a.iter()
        .map(|x| b.iter().map(|y| exp_enclosure(&(x * y), eps)).collect())
        .collect()
}

/// Certifies `det [e^{a_i b_j}] ≠ 0`, halving the entry tolerance after each
/// attempt whose determinant enclosure still contains zero.
///
/// `Indeterminate` means the precision budget ran out; it never means the
/// matrix is singular.
pub fn certify_exp_matrix_nonsingular(
    a: &[Rational],
    b: &[Rational],
    initial_eps: &Rational,
    max_refinements: u32,
) -> Result<Certificate, RankError> {
    if a.len() != b.len() {
        return Err(RankError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(RankError::Empty);
    }
    check_distinct("a", a)?;
    check_distinct("b", b)?;
    if initial_eps <= &Rational::zero() {
        return Err(NumError::NonPositiveEpsilon(initial_eps.to_string()).into());
    }

    let config = DetConfig::default();
    let mut eps = initial_eps.clone();
    let mut enclosure = None;
    for refinements in 0..=max_refinements {
        if refinements > 0 {
            eps = eps / Rational::from(2);
        }
        let matrix = exp_matrix(a, b, &eps)?;
        match interval_det(&matrix, config) {
            Ok(det) if !det.contains_zero() => {
                return Ok(Certificate {
                    verdict: Verdict::NonsingularCertified,
                    eps,
                    enclosure: Some(det),
                    refinements,
                });
            }
            Ok(det) => enclosure = Some(det),
            Err(NumError::Indeterminate { .. }) => enclosure = None,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Certificate {
        verdict: Verdict::Indeterminate,
        eps,
        enclosure,
        refinements: max_refinements,
    })
}

/// `M[r][c] = f(points[rows[r]], points[cols[c]])`.
pub fn grid_matrix(f: &dyn PairFunction, points: &[Point], rows: &[usize], cols: &[usize]) -> Result<RationalMatrix, RankError> {
    let arg = |position: usize| -> Result<Arg<'_>, RankError> {
        let point = points.get(position).ok_or(RankError::OutOfRange {
            position,
            len: points.len(),
        })?;
        Ok(Arg { position, point })
    };
    let data = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| Ok(f.eval(arg(i)?, arg(j)?)?)).collect())
        .collect::<Result<Vec<Vec<_>>, RankError>>()?;
    RationalMatrix::new(data)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LowerBoundReport {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub active_indices: usize,
    pub grid_rank: usize,
}

/// Checks that the terms used on the `rows × cols` block are at least as many
/// as the rank of `f` on that block.
pub fn lowerbound_check(rep: &Representation, rows: &[usize], cols: &[usize]) -> Result<LowerBoundReport, RankError> {
    let grid = grid_matrix(rep.function().as_ref(), rep.order().points(), rows, cols)?;
    let grid_rank = exact_rank(&grid);
    let active = rep.active_index_set(rows, cols)?.len();
    if active < grid_rank {
        return Err(RankError::LowerBoundViolated { active, rank: grid_rank });
    }
    Ok(LowerBoundReport {
        rows: rows.to_vec(),
        cols: cols.to_vec(),
        active_indices: active,
        grid_rank,
    })
}
