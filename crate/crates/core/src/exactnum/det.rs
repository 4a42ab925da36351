//! Exact and interval determinants.

use super::{IntervalValue, NumError, Rational};

/// Size limits for [`interval_det`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetConfig {
    /// Largest accepted dimension.
    pub max_dim: usize,
    /// Cofactor expansion is used up to this dimension, elimination above.
    pub cofactor_max: usize,
}

impl Default for DetConfig {
    fn default() -> Self {
        DetConfig {
            max_dim: 8,
            cofactor_max: 6,
        }
    }
}

fn check_square<T>(m: &[Vec<T>]) -> Result<usize, NumError> {
    let n = m.len();
    if let Some(bad) = m.iter().find(|row| row.len() != n) {
        return Err(NumError::NotSquare {
            rows: n,
            cols: bad.len(),
        });
    }
    Ok(n)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn exact_det(m: &[Vec<Rational>]) -> Result<Rational, NumError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut negate = false;
    let mut prev = Rational::one();
    for k in 0..n {
        let Some(pivot) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Ok(Rational::zero());
        };
        if pivot != k {
            a.swap(pivot, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { -det } else { det })
}

/// Encloses the determinant of every real matrix inside `m`.
///
/// Returns [`NumError::Indeterminate`] when elimination meets a pivot column
/// whose candidates all contain zero without being exactly zero; callers
/// should retry with tighter entries.
pub fn interval_det(m: &[Vec<IntervalValue>], config: DetConfig) -> Result<IntervalValue, NumError> {
    let n = check_square(m)?;
    if n > config.max_dim {
        return Err(NumError::TooLarge {
            dim: n,
            max: config.max_dim,
        });
    }
    if n <= config.cofactor_max {
        let cols: Vec<usize> = (0..n).collect();
        Ok(cofactor(m, 0, &cols))
    } else {
        interval_bareiss(m)
    }
}

fn cofactor(m: &[Vec<IntervalValue>], row: usize, cols: &[usize]) -> IntervalValue {
    match cols.len() {
        0 => IntervalValue::one(),
        1 => m[row][cols[0]].clone(),
        2 => m[row][cols[0]]
            .mul(&m[row + 1][cols[1]])
            .sub(&m[row][cols[1]].mul(&m[row + 1][cols[0]])),
        _ => {
            let mut acc = IntervalValue::zero();
            for (idx, &c) in cols.iter().enumerate() {
                let entry = &m[row][c];
                if entry.is_point() && entry.lo().is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = entry.mul(&cofactor(m, row + 1, &rest));
                acc = if idx % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

fn interval_bareiss(m: &[Vec<IntervalValue>]) -> Result<IntervalValue, NumError> {
    let n = m.len();
    let mut a: Vec<Vec<IntervalValue>> = m.to_vec();
    let mut negate = false;
    let mut prev = IntervalValue::one();
    for k in 0..n - 1 {
        let pivot = match (k..n).find(|&r| !a[r][k].contains_zero()) {
            Some(r) => r,
            None if (k..n).all(|r| a[r][k] == IntervalValue::zero()) => {
                return Ok(IntervalValue::zero());
            }
            None => return Err(NumError::Indeterminate { step: k }),
        };
        if pivot != k {
            a.swap(pivot, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let cross = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = cross.div(&prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { det.neg() } else { det })
}
