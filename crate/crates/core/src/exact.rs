//! Exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Row-major dense rational matrix.
pub type RationalMatrix = Vec<Vec<Rational>>;

/// Rank over the rationals.
///
/// Each row is scaled to integers by the lcm of its denominators, then the
/// integer matrix is reduced with fraction-free (Bareiss) elimination so all
/// intermediate values stay integral and exact.
pub fn rank_exact(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|row| integer_row(row)).collect();
    bareiss_rank(&mut m)
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    row.iter().map(|r| r.numer() * (&lcm / r.denom())).collect()
}

fn bareiss_rank(m: &mut [Vec<BigInt>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let (top, bottom) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let p = pivot_row[col].clone();
        for row in bottom.iter_mut() {
            let factor = row[col].clone();
            for c in (col + 1)..cols {
                let v = (&row[c] * &p - &factor * &pivot_row[c]) / &prev;
                row[c] = v;
            }
            row[col] = BigInt::zero();
        }
        prev = p;
        rank += 1;
    }
    rank
}

/// `A^T A` for a row-major matrix with `cols` columns.
pub fn gram(rows: &[Vec<Rational>], cols: usize) -> RationalMatrix {
    let mut out = vec![vec![Rational::zero(); cols]; cols];
    for row in rows {
        let support: Vec<usize> = (0..cols).filter(|&c| !row[c].is_zero()).collect();
        for &i in &support {
            for &j in &support {
                out[i][j] += &row[i] * &row[j];
            }
        }
    }
    out
}

pub fn is_symmetric(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    m.iter().all(|row| row.len() == n) && (0..n).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

/// Result of an exact positive-semidefiniteness test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdCheck {
    PositiveDefinite,
    PositiveSemidefinite { rank: usize },
    /// `index` is the pivot position (in the original numbering) where the
    /// test failed.
    NotPsd { index: usize },
}

impl PsdCheck {
    pub fn is_psd(&self) -> bool {
        !matches!(self, PsdCheck::NotPsd { .. })
    }

    pub fn is_pd(&self) -> bool {
        matches!(self, PsdCheck::PositiveDefinite)
    }
}

/// Symmetric diagonal-pivoted LDL^T (rational Cholesky without square roots).
///
/// At each step the largest remaining diagonal entry is eliminated. A
/// negative diagonal means the matrix is indefinite; when every remaining
/// diagonal is zero the matrix is PSD only if the remaining block vanishes.
pub fn psd_check(m: &[Vec<Rational>]) -> PsdCheck {
    let n = m.len();
    let mut a: RationalMatrix = m.to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    for step in 0..n {
        let (best, best_val) = (step..n)
            .map(|i| (i, &a[i][i]))
            .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(&x.0)))
            .expect("non-empty range");
        if best_val.is_negative() {
            return PsdCheck::NotPsd { index: order[best] };
        }
        if best_val.is_zero() {
            for i in step..n {
                for j in step..n {
                    if !a[i][j].is_zero() {
                        return PsdCheck::NotPsd { index: order[i] };
                    }
                }
            }
            return PsdCheck::PositiveSemidefinite { rank: step };
        }
        a.swap(step, best);
        for row in a.iter_mut() {
            row.swap(step, best);
        }
        order.swap(step, best);
        let pivot = a[step][step].clone();
        let col: Vec<Rational> = (step + 1..n).map(|i| a[i][step].clone()).collect();
        for (di, ci) in col.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            let i = step + 1 + di;
            let factor = ci / &pivot;
            for (dj, cj) in col.iter().enumerate().skip(di) {
                if cj.is_zero() {
                    continue;
                }
                let j = step + 1 + dj;
                let v = &a[i][j] - &factor * cj;
                a[i][j] = v.clone();
                a[j][i] = v;
            }
        }
    }
    PsdCheck::PositiveDefinite
}
