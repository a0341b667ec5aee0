//! Multi-index sets and the rank and dimension identities they satisfy.
//!
//! All counts are multiset coefficients `((parts, m)) = C(parts + m - 1, m)`,
//! computed from big-integer Pascal rows.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CombinatError {
    #[error("n must be at least {min}, got {n}")]
    TooFewStrands { n: usize, min: usize },
    #[error("r must be at least 1")]
    ZeroRank,
    #[error("count {0} does not fit in 64 bits")]
    Overflow(BigUint),
}

/// `C(n, k)` from the Pascal recurrence; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k) as usize;
    let mut row = vec![BigUint::zero(); k + 1];
    row[0] = BigUint::one();
    for i in 1..=n as usize {
        for j in (1..=k.min(i)).rev() {
            let prev = row[j - 1].clone();
            row[j] += prev;
        }
    }
    row[k].clone()
}

/// Number of multisets of size `m` drawn from `parts` kinds.
pub fn multichoose(parts: u64, m: u64) -> BigUint {
    if parts == 0 {
        return if m == 0 { BigUint::one() } else { BigUint::zero() };
    }
    binomial(parts + m - 1, m)
}

fn to_u64(x: BigUint) -> Result<u64, CombinatError> {
    x.to_u64().ok_or(CombinatError::Overflow(x))
}

/// Element of the index set: `k` has `n - 1` entries, `l` is `n × r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MultiIndexK {
    pub k: Vec<u32>,
    pub l: Vec<Vec<u32>>,
}

impl MultiIndexK {
    pub fn total(&self) -> u32 {
        self.k.iter().sum::<u32>() + self.l.iter().flatten().sum::<u32>()
    }

    /// `(k, l)` concatenated, `l` row-major.
    pub fn flat(&self) -> Vec<u32> {
        let mut v = self.k.clone();
        v.extend(self.l.iter().flatten());
        v
    }
}

/// All vectors of `parts` nonnegative integers summing to `m`, in descending
/// lexicographic order (so the first part is exhausted first).
pub fn compositions(parts: usize, m: u32) -> Vec<Vec<u32>> {
    fn rec(parts: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if m == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if parts == 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=m).rev() {
            prefix.push(first);
            rec(parts - 1, m - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, m, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// The index set for `n` strands, total weight `m` and truncation `r`.
pub fn enumerate_k(n: usize, m: u32, r: usize) -> Result<Vec<MultiIndexK>, CombinatError> {
    if n == 0 {
        return Err(CombinatError::TooFewStrands { n, min: 1 });
    }
    if r == 0 {
        return Err(CombinatError::ZeroRank);
    }
    Ok(compositions(n - 1 + r * n, m)
        .into_iter()
        .map(|v| MultiIndexK {
            k: v[..n - 1].to_vec(),
            l: v[n - 1..].chunks(r).map(<[u32]>::to_vec).collect(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[allow(non_snake_case)]
pub struct RankTable {
    pub rank_L: u64,
    pub rank_N: u64,
    pub rank_quotient: u64,
    pub dim_W: u64,
    pub dim_S: u64,
}

/// Dimension of a weight space `|J| = m` for total truncation `|R|` over `n` factors.
pub fn weight_space_dim(total_r: usize, n: usize, m: u32) -> Result<u64, CombinatError> {
    to_u64(multichoose((total_r + n) as u64, m as u64))
}

/// Dimension of the singular subspace in that weight space.
pub fn singular_space_dim(total_r: usize, n: usize, m: u32) -> Result<u64, CombinatError> {
    to_u64(multichoose((total_r + n - 1) as u64, m as u64))
}

/// Ranks of the homological module, its sub and quotient, and the two
/// Verma-side dimensions for uniform truncation `R = (r, .., r)`.
pub fn rank_formulas(n: usize, m: u32, r: usize) -> Result<RankTable, CombinatError> {
    if n == 0 {
        return Err(CombinatError::TooFewStrands { n, min: 1 });
    }
    if r == 0 {
        return Err(CombinatError::ZeroRank);
    }
    let m64 = m as u64;
    let rank_l = multichoose((r * n + n - 1) as u64, m64);
    let rank_q = multichoose((n - 1) as u64, m64);
    let rank_n = &rank_l - &rank_q;
    Ok(RankTable {
        rank_L: to_u64(rank_l)?,
        rank_N: to_u64(rank_n)?,
        rank_quotient: to_u64(rank_q)?,
        dim_W: weight_space_dim(r * n, n, m)?,
        dim_S: singular_space_dim(r * n, n, m)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VandermondeReport {
    pub holds: bool,
    /// Term `p` is `((rn, m - p)) · ((n - 1, p))`.
    pub summands: Vec<u64>,
    pub total: u64,
    pub closed_form: u64,
}

/// Split the rank by the number of points on the `k` side and check that the
/// parts add back up.
pub fn vandermonde_check(n: usize, m: u32, r: usize) -> Result<VandermondeReport, CombinatError> {
    if n < 2 {
        return Err(CombinatError::TooFewStrands { n, min: 2 });
    }
    if r == 0 {
        return Err(CombinatError::ZeroRank);
    }
    let rn = (r * n) as u64;
    let m64 = m as u64;
    let mut summands = Vec::with_capacity(m as usize + 1);
    let mut total = BigUint::zero();
    for p in 0..=m64 {
        let term = multichoose(rn, m64 - p) * multichoose((n - 1) as u64, p);
        total += &term;
        summands.push(to_u64(term)?);
    }
    let closed = multichoose(rn + n as u64 - 1, m64);
    Ok(VandermondeReport {
        holds: total == closed,
        summands,
        total: to_u64(total)?,
        closed_form: to_u64(closed)?,
    })
}
