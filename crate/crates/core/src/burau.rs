//! Framed Burau representations over `Z[q^{±1}]`.
//!
//! The full representation acts on the free module with basis
//! `a_1..a_n, b_1^(1)..b_1^(r), .., b_n^(1)..b_n^(r)`; matrix columns are
//! images of basis vectors and a word `g_1 g_2 .. g_k` maps to the product
//! `M(g_1) M(g_2) .. M(g_k)`.
//!
//! The reduced representation is the restriction to the span of the vectors
//! `c_i = a_{i+1} - μ a_i` and all `b`'s. Two values of `μ` are candidates
//! (`1` and `q^{-1}`); both are tested for closure and the one that closes is
//! adopted. See [`convention_report`].
//!
//! Twists act by `τ_i a_i = a_i - b_i^(r)`. With the weight `q` on that term
//! instead, `σ_i τ_{i+1} = τ_i σ_i` fails on `a_i`; the two normalizations
//! differ by rescaling every `b` by `q`, and only this one satisfies the
//! relations while keeping the `σ` action unchanged.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::fbraid::{defining_relations, FramedBraidWord, Generator, Letter, WordError};
use crate::linalg::Matrix;
use crate::par;
use crate::ring::{LaurentPoly2, RationalQT, RingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BurauError {
    #[error("strand count mismatch: word has n = {word}, representation has n = {rep}")]
    StrandMismatch { word: usize, rep: usize },
    #[error("r must be at least 1")]
    ZeroRank,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("span of the reduced basis is not preserved under {convention}: image of {label} under {generator} leaves residual {residual} on a_1")]
    ClosureFailure {
        convention: CiConvention,
        generator: String,
        label: String,
        residual: String,
    },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A representation image with its basis labels.
#[derive(Clone, Debug, PartialEq)]
pub struct RepMatrix {
    pub entries: Matrix<LaurentPoly2>,
    pub basis_labels: Vec<String>,
}

impl RepMatrix {
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_identity(&self) -> bool {
        self.entries == Matrix::identity(self.dim())
    }

    /// Evaluate at a complex `q` (entries are `t`-free).
    pub fn specialize(&self, q: Complex64) -> Result<DMatrix<Complex64>, RingError> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = self.entries.get(i, j).eval(q, Complex64::one())?;
            }
        }
        Ok(out)
    }
}

impl Serialize for RepMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[LaurentPoly2]> = (0..self.dim()).map(|i| self.entries.row(i)).collect();
        let mut st = s.serialize_struct("RepMatrix", 3)?;
        st.serialize_field("dim", &self.dim())?;
        st.serialize_field("basis_labels", &self.basis_labels)?;
        st.serialize_field("entries", &rows)?;
        st.end()
    }
}

fn a_index(i: usize) -> usize {
    i - 1
}

fn b_index(n: usize, r: usize, i: usize, s: usize) -> usize {
    n + (i - 1) * r + (s - 1)
}

fn full_labels(n: usize, r: usize) -> Vec<String> {
    let mut labels: Vec<String> = (1..=n).map(|i| format!("a_{i}")).collect();
    labels.extend(b_labels(n, r));
    labels
}

fn b_labels(n: usize, r: usize) -> Vec<String> {
    let mut labels = Vec::with_capacity(n * r);
    for i in 1..=n {
        for s in 1..=r {
            labels.push(format!("b_{i}^({s})"));
        }
    }
    labels
}

fn mono(c: i64, e: i64) -> LaurentPoly2 {
    LaurentPoly2::monomial(c, e, 0)
}

/// Matrix of a single letter on the full module.
pub fn letter_matrix(n: usize, r: usize, letter: Letter) -> Matrix<LaurentPoly2> {
    let dim = n + r * n;
    let mut m = Matrix::identity(dim);
    let inverse = letter.exponent < 0;
    match letter.generator {
        Generator::Sigma(i) => {
            let (ai, aj) = (a_index(i), a_index(i + 1));
            // clear the two a-columns and the b-columns of strands i, i+1
            for col in [ai, aj] {
                m.set(col, col, LaurentPoly2::zero());
            }
            for s in 1..=r {
                for k in [i, i + 1] {
                    let c = b_index(n, r, k, s);
                    m.set(c, c, LaurentPoly2::zero());
                }
            }
            if !inverse {
                m.set(ai, ai, &LaurentPoly2::one() - &LaurentPoly2::q());
                m.set(aj, ai, LaurentPoly2::q());
                for s in 1..=r {
                    m.set(b_index(n, r, i, s), ai, mono(-1, 0));
                }
                m.set(ai, aj, LaurentPoly2::one());
                for s in 1..=r {
                    m.set(b_index(n, r, i + 1, s), b_index(n, r, i, s), LaurentPoly2::q());
                    m.set(b_index(n, r, i, s), b_index(n, r, i + 1, s), LaurentPoly2::one());
                }
            } else {
                m.set(aj, ai, LaurentPoly2::one());
                m.set(ai, aj, mono(1, -1));
                m.set(aj, aj, &LaurentPoly2::one() - &mono(1, -1));
                for s in 1..=r {
                    m.set(b_index(n, r, i + 1, s), aj, mono(1, -1));
                }
                for s in 1..=r {
                    m.set(b_index(n, r, i + 1, s), b_index(n, r, i, s), LaurentPoly2::one());
                    m.set(b_index(n, r, i, s), b_index(n, r, i + 1, s), mono(1, -1));
                }
            }
        }
        Generator::Tau(i) => {
            let ai = a_index(i);
            for s in 1..=r {
                let c = b_index(n, r, i, s);
                m.set(c, c, LaurentPoly2::zero());
            }
            if !inverse {
                m.set(b_index(n, r, i, r), ai, mono(-1, 0));
                m.set(b_index(n, r, i, r), b_index(n, r, i, 1), LaurentPoly2::q());
                for s in 2..=r {
                    m.set(b_index(n, r, i, s - 1), b_index(n, r, i, s), LaurentPoly2::one());
                }
            } else {
                m.set(b_index(n, r, i, 1), ai, mono(1, -1));
                m.set(b_index(n, r, i, 1), b_index(n, r, i, r), mono(1, -1));
                for s in 1..r {
                    m.set(b_index(n, r, i, s + 1), b_index(n, r, i, s), LaurentPoly2::one());
                }
            }
        }
    }
    m
}

/// Ordered product of matrices, split into chunks for the parallel path.
fn ordered_product(dim: usize, factors: Vec<Matrix<LaurentPoly2>>) -> Matrix<LaurentPoly2> {
    const CHUNK: usize = 8;
    if factors.len() <= CHUNK {
        return factors
            .into_iter()
            .fold(Matrix::identity(dim), |acc, m| acc.matmul(&m));
    }
    let chunks: Vec<&[Matrix<LaurentPoly2>]> = factors.chunks(CHUNK).collect();
    let partial = par::map(&chunks, |chunk| {
        chunk
            .iter()
            .fold(Matrix::identity(dim), |acc, m| acc.matmul(m))
    });
    ordered_product(dim, partial)
}

fn check_word(n: usize, r: usize, w: &FramedBraidWord) -> Result<(), BurauError> {
    if r == 0 {
        return Err(BurauError::ZeroRank);
    }
    if w.n() != n {
        return Err(BurauError::StrandMismatch { word: w.n(), rep: n });
    }
    Ok(())
}

/// Image of `w` in the full framed Burau representation, size `n + rn`.
pub fn full_burau_matrix(n: usize, r: usize, w: &FramedBraidWord) -> Result<RepMatrix, BurauError> {
    check_word(n, r, w)?;
    let factors = w.letters().iter().map(|&l| letter_matrix(n, r, l)).collect();
    Ok(RepMatrix {
        entries: ordered_product(n + r * n, factors),
        basis_labels: full_labels(n, r),
    })
}

/// Choice of `μ` in `c_i = a_{i+1} - μ a_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiConvention {
    /// `c_i = a_{i+1} - a_i`
    Difference,
    /// `c_i = a_{i+1} - q^{-1} a_i`
    QInverseWeighted,
}

impl CiConvention {
    pub const ALL: [CiConvention; 2] = [CiConvention::Difference, CiConvention::QInverseWeighted];

    fn mu(self) -> LaurentPoly2 {
        match self {
            CiConvention::Difference => LaurentPoly2::one(),
            CiConvention::QInverseWeighted => mono(1, -1),
        }
    }
}

impl std::fmt::Display for CiConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CiConvention::Difference => write!(f, "c_i = a_(i+1) - a_i"),
            CiConvention::QInverseWeighted => write!(f, "c_i = a_(i+1) - q^-1 a_i"),
        }
    }
}

/// Coordinates of `y` in the reduced basis, or the leftover `a_1` coefficient.
fn express_reduced(n: usize, mu: &LaurentPoly2, y: &[LaurentPoly2]) -> Result<Vec<LaurentPoly2>, LaurentPoly2> {
    let mut x = vec![LaurentPoly2::zero(); n.saturating_sub(1)];
    if n >= 2 {
        x[n - 2] = y[n - 1].clone();
        for k in (1..n - 1).rev() {
            // coefficient of a_{k+1}: x_k - μ x_{k+1} (1-based x)
            x[k - 1] = &y[k] + &(mu * &x[k]);
        }
        let residual = &y[0] + &(mu * &x[0]);
        if !residual.is_zero() {
            return Err(residual);
        }
    } else if !y[0].is_zero() {
        return Err(y[0].clone());
    }
    x.extend_from_slice(&y[n..]);
    Ok(x)
}

fn reduced_embedding(n: usize, r: usize, mu: &LaurentPoly2) -> Matrix<LaurentPoly2> {
    let full = n + r * n;
    let red = n - 1 + r * n;
    let mut e = Matrix::zeros(full, red);
    for k in 1..n {
        e.set(a_index(k + 1), k - 1, LaurentPoly2::one());
        e.set(a_index(k), k - 1, -mu);
    }
    for j in 0..r * n {
        e.set(n + j, n - 1 + j, LaurentPoly2::one());
    }
    e
}

fn reduced_labels(n: usize, r: usize) -> Vec<String> {
    let mut labels: Vec<String> = (1..n).map(|i| format!("c_{i}")).collect();
    labels.extend(b_labels(n, r));
    labels
}

/// Restrict a full matrix to the reduced span under `convention`.
fn restrict(
    n: usize,
    r: usize,
    full: &Matrix<LaurentPoly2>,
    convention: CiConvention,
    generator: &str,
) -> Result<Matrix<LaurentPoly2>, BurauError> {
    let mu = convention.mu();
    let labels = reduced_labels(n, r);
    let image = full.matmul(&reduced_embedding(n, r, &mu));
    let mut columns = Vec::with_capacity(image.cols());
    for j in 0..image.cols() {
        let col = express_reduced(n, &mu, &image.column(j)).map_err(|residual| BurauError::ClosureFailure {
            convention,
            generator: generator.to_string(),
            label: labels[j].clone(),
            residual: residual.to_string(),
        })?;
        columns.push(col);
    }
    Ok(Matrix::from_columns(n - 1 + r * n, &columns))
}

/// Reduced matrix of `w` under an explicit convention.
pub fn reduced_burau_matrix_with(
    n: usize,
    r: usize,
    w: &FramedBraidWord,
    convention: CiConvention,
) -> Result<RepMatrix, BurauError> {
    check_word(n, r, w)?;
    let dim = n - 1 + r * n;
    let mut factors = Vec::with_capacity(w.len());
    for &l in w.letters() {
        factors.push(restrict(n, r, &letter_matrix(n, r, l), convention, &l.to_string())?);
    }
    Ok(RepMatrix {
        entries: ordered_product(dim, factors),
        basis_labels: reduced_labels(n, r),
    })
}

/// Outcome of testing each `c_i` convention on every generator.
#[derive(Clone, Debug, Serialize)]
pub struct ConventionReport {
    pub adopted: CiConvention,
    pub candidates: Vec<ConventionOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConventionOutcome {
    pub convention: CiConvention,
    pub closes: bool,
    pub failure: Option<String>,
}

fn test_convention(convention: CiConvention) -> ConventionOutcome {
    // n = 3, r = 2 exercises every generator type, interior and boundary
    let (n, r) = (3, 2);
    let mut failure = None;
    'outer: for i in 1..=n {
        let gens = if i < n {
            vec![Generator::Sigma(i), Generator::Tau(i)]
        } else {
            vec![Generator::Tau(i)]
        };
        for g in gens {
            for e in [1, -1] {
                let l = Letter::new(g, e);
                if let Err(err) = restrict(n, r, &letter_matrix(n, r, l), convention, &l.to_string()) {
                    failure = Some(err.to_string());
                    break 'outer;
                }
            }
        }
    }
    ConventionOutcome {
        convention,
        closes: failure.is_none(),
        failure,
    }
}

/// Closure test of both conventions, computed once.
pub fn convention_report() -> &'static ConventionReport {
    static REPORT: OnceLock<ConventionReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let candidates: Vec<ConventionOutcome> = CiConvention::ALL.iter().map(|&c| test_convention(c)).collect();
        let adopted = candidates
            .iter()
            .find(|c| c.closes)
            .map(|c| c.convention)
            .expect("at least one c_i convention closes");
        ConventionReport { adopted, candidates }
    })
}

/// Image of `w` in the reduced framed Burau representation, size `n - 1 + rn`,
/// under the adopted `c_i` convention. `n = 1` gives the `b`-span alone.
pub fn reduced_burau_matrix(n: usize, r: usize, w: &FramedBraidWord) -> Result<RepMatrix, BurauError> {
    reduced_burau_matrix_with(n, r, w, convention_report().adopted)
}

/// The `a`-block of the full matrix: the action on the module modulo the `b`-span.
pub fn quotient_matrix(full: &RepMatrix, n: usize) -> Matrix<LaurentPoly2> {
    Matrix::from_fn(n, n, |i, j| full.entries.get(i, j).clone())
}

/// Block of the full matrix mapping `b`'s into `a`'s; zero iff the `b`-span is invariant.
pub fn b_to_a_block(full: &RepMatrix, n: usize) -> Matrix<LaurentPoly2> {
    let dim = full.dim();
    Matrix::from_fn(n, dim - n, |i, j| full.entries.get(i, n + j).clone())
}

/// Classical unreduced Burau image of the braid part of `w` (twists act trivially).
pub fn classical_burau_matrix(w: &FramedBraidWord) -> Matrix<LaurentPoly2> {
    let n = w.n();
    let mut acc = Matrix::identity(n);
    for l in w.letters() {
        let Generator::Sigma(i) = l.generator else { continue };
        let mut m = Matrix::identity(n);
        let (a, b) = (i - 1, i);
        let block = if l.exponent > 0 {
            [
                [&LaurentPoly2::one() - &LaurentPoly2::q(), LaurentPoly2::one()],
                [LaurentPoly2::q(), LaurentPoly2::zero()],
            ]
        } else {
            [
                [LaurentPoly2::zero(), mono(1, -1)],
                [LaurentPoly2::one(), &LaurentPoly2::one() - &mono(1, -1)],
            ]
        };
        for (di, row) in block.into_iter().enumerate() {
            for (dj, v) in row.into_iter().enumerate() {
                m.set([a, b][di], [a, b][dj], v);
            }
        }
        acc = acc.matmul(&m);
    }
    acc
}

/// Which representation a relation check runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepKind {
    Full,
    Reduced,
}

/// A relation whose two sides have different images.
#[derive(Clone, Debug, Serialize)]
pub struct RelationDefect {
    pub relation: String,
    pub difference: RepMatrix,
}

/// Check every defining relation, and `g g^{-1} = 1` for every generator.
/// An empty result means all identities hold exactly.
pub fn verify_relations(n: usize, r: usize, kind: RepKind) -> Result<Vec<RelationDefect>, BurauError> {
    let image = |w: &FramedBraidWord| match kind {
        RepKind::Full => full_burau_matrix(n, r, w),
        RepKind::Reduced => reduced_burau_matrix(n, r, w),
    };
    let mut cases: Vec<(String, FramedBraidWord, FramedBraidWord)> = defining_relations(n)
        .into_iter()
        .map(|rel| (rel.name, rel.lhs, rel.rhs))
        .collect();
    let mut gens: Vec<Generator> = (1..n).map(Generator::Sigma).collect();
    gens.extend((1..=n).map(Generator::Tau));
    for g in gens {
        let w = FramedBraidWord::new(n, vec![Letter::new(g, 1), Letter::new(g, -1)])?;
        cases.push((format!("{g} {g}^-1 = 1"), w, FramedBraidWord::identity(n)));
    }
    let results = par::map(&cases, |(name, lhs, rhs)| -> Result<Option<RelationDefect>, BurauError> {
        let (l, r) = (image(lhs)?, image(rhs)?);
        if l == r {
            Ok(None)
        } else {
            Ok(Some(RelationDefect {
                relation: name.clone(),
                difference: RepMatrix {
                    entries: l.entries.sub(&r.entries),
                    basis_labels: l.basis_labels,
                },
            }))
        }
    });
    results.into_iter().filter_map(Result::transpose).collect()
}

/// Fraction-free (Bareiss) determinant over `Z[q^{±1}, t^{±1}]`.
///
/// Each row is first multiplied by a monomial so all exponents are
/// nonnegative; the factor is divided back out at the end.
pub fn determinant(m: &Matrix<LaurentPoly2>) -> LaurentPoly2 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return LaurentPoly2::one();
    }
    let mut a = m.clone();
    let (mut shift_q, mut shift_t) = (0i64, 0i64);
    for i in 0..n {
        let (mut lq, mut lt) = (0i64, 0i64);
        for j in 0..n {
            if let Some((q0, t0, _, _)) = a.get(i, j).exponent_box() {
                lq = lq.min(q0);
                lt = lt.min(t0);
            }
        }
        if lq < 0 || lt < 0 {
            for j in 0..n {
                let v = a.get(i, j).shift(-lq, -lt);
                a.set(i, j, v);
            }
            shift_q += lq;
            shift_t += lt;
        }
    }
    let mut sign = 1i64;
    let mut prev = LaurentPoly2::one();
    for k in 0..n - 1 {
        if a.get(k, k).is_zero() {
            let Some(p) = (k + 1..n).find(|&p| !a.get(p, k).is_zero()) else {
                return LaurentPoly2::zero();
            };
            for j in 0..n {
                let tmp = a.get(k, j).clone();
                a.set(k, j, a.get(p, j).clone());
                a.set(p, j, tmp);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(a.get(i, j) * a.get(k, k)) - &(a.get(i, k) * a.get(k, j));
                let v = num.div_exact(&prev).expect("Bareiss division is exact");
                a.set(i, j, v);
            }
            a.set(i, k, LaurentPoly2::zero());
        }
        prev = a.get(k, k).clone();
    }
    a.get(n - 1, n - 1)
        .scale(&sign.into())
        .shift(shift_q, shift_t)
}

/// `((q - 1)/(q^n - 1)) · det(I - ψ(w))` with `ψ` the reduced representation.
pub fn framed_alexander(n: usize, r: usize, w: &FramedBraidWord) -> Result<RationalQT, BurauError> {
    let rep = reduced_burau_matrix(n, r, w)?;
    let dim = rep.dim();
    let det = determinant(&Matrix::identity(dim).sub(&rep.entries));
    if n == 1 {
        return Ok(RationalQT::from_poly(det));
    }
    let prefactor_num = &LaurentPoly2::q() - &LaurentPoly2::one();
    let prefactor_den = &LaurentPoly2::q_pow(n as i64) - &LaurentPoly2::one();
    Ok(RationalQT::new(&prefactor_num * &det, prefactor_den)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbraid::parse_word;
    use proptest::prelude::*;

    fn q() -> LaurentPoly2 {
        LaurentPoly2::q()
    }

    fn laplace(m: &Matrix<LaurentPoly2>) -> LaurentPoly2 {
        let n = m.rows();
        if n == 0 {
            return LaurentPoly2::one();
        }
        let mut acc = LaurentPoly2::zero();
        for j in 0..n {
            if m.get(0, j).is_zero() {
                continue;
            }
            let minor = Matrix::from_fn(n - 1, n - 1, |a, b| m.get(a + 1, if b < j { b } else { b + 1 }).clone());
            let term = m.get(0, j) * &laplace(&minor);
            acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    #[test]
    fn sigma_and_tau_columns() {
        let s1 = full_burau_matrix(2, 1, &parse_word("s1", 2).unwrap()).unwrap();
        // column a_1 = (1-q) a_1 + q a_2 - b_1
        assert_eq!(
            s1.entries.column(0),
            vec![&LaurentPoly2::one() - &q(), q(), mono(-1, 0), LaurentPoly2::zero()]
        );
        let t1 = full_burau_matrix(1, 1, &parse_word("t1", 1).unwrap()).unwrap();
        assert_eq!(t1.entries.get(1, 1), &q());
        let t1 = full_burau_matrix(2, 2, &parse_word("t1", 2).unwrap()).unwrap();
        // b_1^(2) -> b_1^(1)
        assert_eq!(t1.entries.column(b_index(2, 2, 1, 2)), {
            let mut v = vec![LaurentPoly2::zero(); 6];
            v[b_index(2, 2, 1, 1)] = LaurentPoly2::one();
            v
        });
    }

    #[test]
    fn labels_and_identity() {
        let id = full_burau_matrix(2, 2, &FramedBraidWord::identity(2)).unwrap();
        assert!(id.is_identity());
        assert_eq!(id.basis_labels, vec!["a_1", "a_2", "b_1^(1)", "b_1^(2)", "b_2^(1)", "b_2^(2)"]);
        let red = reduced_burau_matrix(3, 1, &FramedBraidWord::identity(3)).unwrap();
        assert_eq!(red.dim(), 5);
        assert!(red.is_identity());
        assert_eq!(red.basis_labels[0], "c_1");
    }

    #[test]
    fn convention_detection() {
        let report = convention_report();
        assert_eq!(report.adopted, CiConvention::Difference);
        let weighted = report
            .candidates
            .iter()
            .find(|c| c.convention == CiConvention::QInverseWeighted)
            .unwrap();
        assert!(!weighted.closes);
        let err = reduced_burau_matrix_with(2, 1, &parse_word("s1", 2).unwrap(), CiConvention::QInverseWeighted);
        assert!(matches!(err, Err(BurauError::ClosureFailure { .. })));
    }

    #[test]
    fn reduced_examples() {
        // σ1 c1 = -q c1 + Σ b_1^(s)
        let m = reduced_burau_matrix(2, 2, &parse_word("s1", 2).unwrap()).unwrap();
        assert_eq!(
            m.entries.column(0),
            vec![mono(-1, 1), LaurentPoly2::one(), LaurentPoly2::one(), LaurentPoly2::zero(), LaurentPoly2::zero()]
        );
        // τ2 c1 = c1 - b_2^(r)
        let m = reduced_burau_matrix(2, 2, &parse_word("t2", 2).unwrap()).unwrap();
        assert_eq!(
            m.entries.column(0),
            vec![LaurentPoly2::one(), LaurentPoly2::zero(), LaurentPoly2::zero(), LaurentPoly2::zero(), mono(-1, 0)]
        );
    }

    #[test]
    fn q_weighted_twist_breaks_exchange_relation() {
        // τ_1 a_1 = a_1 - q b_1 instead
        let mut t1 = letter_matrix(2, 1, Letter::new(Generator::Tau(1), 1));
        t1.set(2, 0, mono(-1, 1));
        let mut t2 = letter_matrix(2, 1, Letter::new(Generator::Tau(2), 1));
        t2.set(3, 1, mono(-1, 1));
        let s1 = letter_matrix(2, 1, Letter::new(Generator::Sigma(1), 1));
        assert_eq!(s1.matmul(&t1), t2.matmul(&s1));
        assert_ne!(s1.matmul(&t2), t1.matmul(&s1));
    }

    #[test]
    fn relations_small() {
        assert!(verify_relations(2, 1, RepKind::Full).unwrap().is_empty());
        assert!(verify_relations(3, 2, RepKind::Full).unwrap().is_empty());
        assert!(verify_relations(3, 1, RepKind::Reduced).unwrap().is_empty());
    }

    #[test]
    fn generator_determinants_are_units() {
        for n in 1..=4 {
            for r in 1..=3 {
                let mut gens: Vec<Generator> = (1..n).map(Generator::Sigma).collect();
                gens.extend((1..=n).map(Generator::Tau));
                for g in gens {
                    for e in [1, -1] {
                        let m = letter_matrix(n, r, Letter::new(g, e));
                        let d = determinant(&m);
                        assert!(d.is_unit() && d.num_terms() == 1, "det {d} for {g}^{e}");
                    }
                }
            }
        }
    }

    #[test]
    fn b_span_and_quotient() {
        let w = parse_word("s1 t2 s2^-1 t1^-1 s1 t3", 3).unwrap();
        for r in 1..=3 {
            let full = full_burau_matrix(3, r, &w).unwrap();
            assert!(b_to_a_block(&full, 3).is_zero());
            assert_eq!(quotient_matrix(&full, 3), classical_burau_matrix(&w));
        }
    }

    #[test]
    fn alexander_examples() {
        let zero = framed_alexander(2, 1, &FramedBraidWord::identity(2)).unwrap();
        assert!(zero.is_zero());
        for r in 1..=4 {
            let d = framed_alexander(1, r, &parse_word("t1", 1).unwrap()).unwrap();
            assert_eq!(d, RationalQT::from_poly(&LaurentPoly2::one() - &q()));
        }
        // σ1, n = 2, r = 1 against cofactor expansion
        let w = parse_word("s1", 2).unwrap();
        let rep = reduced_burau_matrix(2, 1, &w).unwrap();
        let det = laplace(&Matrix::identity(3).sub(&rep.entries));
        let expected = RationalQT::new(&(&q() - &LaurentPoly2::one()) * &det, &q().pow(2) - &LaurentPoly2::one()).unwrap();
        assert_eq!(framed_alexander(2, 1, &w).unwrap(), expected);
    }

    #[test]
    fn bareiss_matches_laplace() {
        let w = parse_word("s1 s2^-1 t1 s1 t3^-1 s2", 3).unwrap();
        let m = full_burau_matrix(3, 1, &w).unwrap();
        let a = Matrix::identity(6).sub(&m.entries);
        assert_eq!(determinant(&a), laplace(&a));
    }

    fn arb_word(n: usize, len: usize) -> impl Strategy<Value = FramedBraidWord> {
        let gen = (0..(2 * n - 1), prop::bool::ANY).prop_map(move |(g, inv)| {
            let generator = if g < n - 1 { Generator::Sigma(g + 1) } else { Generator::Tau(g - (n - 1) + 1) };
            Letter::new(generator, if inv { -1 } else { 1 })
        });
        prop::collection::vec(gen, 0..len).prop_map(move |l| FramedBraidWord::new(n, l).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn alexander_conjugation_invariant(w in arb_word(3, 12), g in arb_word(3, 8), r in 1usize..=2) {
            let a = framed_alexander(3, r, &w).unwrap();
            let b = framed_alexander(3, r, &w.conjugate_by(&g)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn determinant_multiplicative(w in arb_word(2, 10), v in arb_word(2, 10)) {
            let mw = full_burau_matrix(2, 2, &w).unwrap();
            let mv = full_burau_matrix(2, 2, &v).unwrap();
            let prod = full_burau_matrix(2, 2, &w.concat(&v)).unwrap();
            prop_assert_eq!(determinant(&prod.entries), &determinant(&mw.entries) * &determinant(&mv.entries));
        }
    }
}
