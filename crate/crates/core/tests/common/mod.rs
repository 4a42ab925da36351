#![allow(dead_code)]

use davies::exactnum::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(p, d).unwrap()
}

pub fn random_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    q(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<Rational>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| random_rational(rng, 5, 4)).collect())
        .collect()
}

/// Random matrix whose rank is at most `r`, built as a product through `r`
/// dimensions, so rank deficiency is common.
pub fn random_low_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, r: usize) -> Vec<Vec<Rational>> {
    let a = random_matrix(rng, rows, r);
    let b = random_matrix(rng, r, cols);
    (0..rows)
        .map(|i| (0..cols).map(|j| (0..r).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

/// Determinant by Laplace expansion along the first row.
pub fn laplace_det(m: &[Vec<Rational>]) -> Rational {
    if m.is_empty() {
        return Rational::one();
    }
    let mut total = Rational::zero();
    for c in 0..m.len() {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][c] * laplace_det(&minor);
        total = if c % 2 == 0 { total + term } else { total - term };
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|s| s.count_ones() as usize == k)
        .map(|s| (0..n).filter(|&i| s >> i & 1 == 1).collect())
        .collect()
}

/// Rank as the size of the largest nonzero minor, by exhaustive search.
pub fn rank_by_minors(m: &[Vec<Rational>]) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    for k in (1..=rows.min(cols)).rev() {
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let sub: Vec<Vec<Rational>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c].clone()).collect()).collect();
                if !laplace_det(&sub).is_zero() {
                    return k;
                }
            }
        }
    }
    0
}
