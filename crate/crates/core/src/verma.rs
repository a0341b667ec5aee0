//! Confluent Verma modules over the truncated current algebra `sl2[t]/t^{r+1}`
//! and their tensor products.
//!
//! A basis vector of the tensor product is a flattened multi-index `J`:
//! factor `i` owns the slots `offset_i ..= offset_i + r_i`, slot `p` holding
//! the exponent of `F_p` in the PBW monomial `F_0^{j^0} F_1^{j^1} .. F_r^{j^r} v`.
//! The `F_p` commute, so multiplying by `F_p` increments a slot; `E_p` and
//! `H_p` are applied through closed forms obtained by commuting them past the
//! `F`-string onto the highest weight vector.
//!
//! Everything is generic over [`Field`] so the same code serves exact
//! rationals, complex floats and dual numbers.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::combinat;
use crate::linalg::Matrix;
use crate::par;
use crate::scalar::Field;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VermaError {
    #[error("factor {factor}: top movable weight is zero, module is reducible")]
    DegenerateGamma { factor: usize },
    #[error("factor {factor}: P-rank must be at least 1")]
    ZeroRank { factor: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("singular space has dimension {found}, expected {expected}")]
    SingularDimension { expected: u64, found: usize },
    #[error("exponential map needs a nonzero top weight on the first factor")]
    ZeroTopWeight,
    #[error("vector has a nonzero F_r component on the first factor")]
    NotInSubspace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kind {
    E,
    H,
    F,
}

/// `X ⊗ t^level` for `X ∈ {E, H, F}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CurrentGenerator {
    pub kind: Kind,
    pub level: usize,
}

impl CurrentGenerator {
    pub fn e(level: usize) -> Self {
        Self { kind: Kind::E, level }
    }
    pub fn h(level: usize) -> Self {
        Self { kind: Kind::H, level }
    }
    pub fn f(level: usize) -> Self {
        Self { kind: Kind::F, level }
    }
}

/// `[X, Y]` in the truncated current algebra, as integer combinations.
pub fn bracket(x: CurrentGenerator, y: CurrentGenerator, r: usize) -> Vec<(i64, CurrentGenerator)> {
    let level = x.level + y.level;
    if level > r {
        return Vec::new();
    }
    let (c, kind) = match (x.kind, y.kind) {
        (Kind::E, Kind::F) => (1, Kind::H),
        (Kind::F, Kind::E) => (-1, Kind::H),
        (Kind::H, Kind::E) => (2, Kind::E),
        (Kind::E, Kind::H) => (-2, Kind::E),
        (Kind::H, Kind::F) => (-2, Kind::F),
        (Kind::F, Kind::H) => (2, Kind::F),
        _ => return Vec::new(),
    };
    vec![(c, CurrentGenerator { kind, level })]
}

/// Flattened multi-index.
pub type Multi = Vec<u32>;

/// Finite linear combination of PBW monomials with zero terms pruned.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector<F> {
    terms: BTreeMap<Multi, F>,
}

impl<F: Field> Default for ModuleVector<F> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<F: Field> ModuleVector<F> {
    pub fn basis(j: Multi) -> Self {
        Self::monomial(j, F::one())
    }

    pub fn monomial(j: Multi, c: F) -> Self {
        let mut v = Self::default();
        v.add_term(j, c);
        v
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Multi, &F)> {
        self.terms.iter()
    }

    pub fn coeff(&self, j: &Multi) -> F {
        self.terms.get(j).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, j: Multi, c: F) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(j) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, c) in &other.terms {
            out.add_term(j.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-F::one()))
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = Self::default();
        for (j, x) in &self.terms {
            out.add_term(j.clone(), c.clone() * x.clone());
        }
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.terms.values().map(Field::magnitude).fold(0.0, f64::max)
    }
}

/// Tensor product of confluent Verma modules with fixed weights.
#[derive(Clone, Debug)]
pub struct TensorVerma<F> {
    ranks: Vec<usize>,
    offsets: Vec<usize>,
    lambda: Vec<F>,
    /// `gamma[i][p - 1] = γ_i^(p)` for `p = 1..=r_i`.
    gamma: Vec<Vec<F>>,
}

fn offsets_of(ranks: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(ranks.len());
    let mut acc = 0;
    for r in ranks {
        offsets.push(acc);
        acc += r + 1;
    }
    offsets
}

impl<F: Field> TensorVerma<F> {
    pub fn new(ranks: Vec<usize>, lambda: Vec<F>, gamma: Vec<Vec<F>>) -> Result<Self, VermaError> {
        if ranks.is_empty() {
            return Err(VermaError::Shape("no tensor factors".into()));
        }
        if lambda.len() != ranks.len() || gamma.len() != ranks.len() {
            return Err(VermaError::Shape(format!(
                "{} ranks, {} weights, {} movable weight vectors",
                ranks.len(),
                lambda.len(),
                gamma.len()
            )));
        }
        for (i, (&r, g)) in ranks.iter().zip(&gamma).enumerate() {
            if r == 0 {
                return Err(VermaError::ZeroRank { factor: i });
            }
            if g.len() != r {
                return Err(VermaError::Shape(format!("factor {i}: {} movable weights for rank {r}", g.len())));
            }
            if g[r - 1].magnitude() == 0.0 {
                return Err(VermaError::DegenerateGamma { factor: i });
            }
        }
        Ok(Self {
            offsets: offsets_of(&ranks),
            ranks,
            lambda,
            gamma,
        })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn factors(&self) -> usize {
        self.ranks.len()
    }

    pub fn lambda(&self) -> &[F] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[Vec<F>] {
        &self.gamma
    }

    /// Eigenvalue of `H_p` on the highest weight vector of factor `i`:
    /// `λ_i` at `p = 0`, `γ_i^(p)` up to the rank, zero beyond.
    pub fn weight(&self, i: usize, p: usize) -> F {
        if p == 0 {
            self.lambda[i].clone()
        } else if p <= self.ranks[i] {
            self.gamma[i][p - 1].clone()
        } else {
            F::zero()
        }
    }

    pub fn slot(&self, i: usize, p: usize) -> usize {
        self.offsets[i] + p
    }

    /// Apply a generator on factor `i` to one monomial, accumulating into `out`.
    fn act_monomial(&self, i: usize, g: CurrentGenerator, j: &Multi, c: &F, out: &mut ModuleVector<F>) {
        let r = self.ranks[i];
        if g.level > r {
            return;
        }
        let base = self.offsets[i];
        let js = &j[base..=base + r];
        let int = |n: u64| F::from_int(n as i64);
        match g.kind {
            Kind::F => {
                let mut k = j.clone();
                k[base + g.level] += 1;
                out.add_term(k, c.clone());
            }
            Kind::H => {
                let p = g.level;
                out.add_term(j.clone(), c.clone() * self.weight(i, p));
                if p == 0 {
                    // F_a -> F_a: diagonal shift by -2|j|
                    let total: u64 = js.iter().map(|&x| x as u64).sum();
                    out.add_term(j.clone(), c.clone() * int(total) * F::from_int(-2));
                    return;
                }
                for a in 0..=r {
                    if js[a] == 0 || a + p > r {
                        continue;
                    }
                    let mut k = j.clone();
                    k[base + a] -= 1;
                    k[base + a + p] += 1;
                    out.add_term(k, c.clone() * int(js[a] as u64) * F::from_int(-2));
                }
            }
            Kind::E => {
                let p = g.level;
                for a in 0..=r {
                    if js[a] == 0 {
                        continue;
                    }
                    let w = self.weight(i, p + a);
                    if !w.is_zero() {
                        let mut k = j.clone();
                        k[base + a] -= 1;
                        out.add_term(k, c.clone() * int(js[a] as u64) * w);
                    }
                }
                for a in 0..=r {
                    if js[a] == 0 {
                        continue;
                    }
                    for b in a..=r {
                        let lvl = a + b + p;
                        if lvl > r {
                            break;
                        }
                        let pairs = if a == b {
                            (js[a] as u64) * (js[a] as u64).saturating_sub(1) / 2
                        } else {
                            js[a] as u64 * js[b] as u64
                        };
                        if pairs == 0 {
                            continue;
                        }
                        let mut k = j.clone();
                        k[base + a] -= 1;
                        k[base + b] -= 1;
                        k[base + lvl] += 1;
                        out.add_term(k, c.clone() * int(pairs) * F::from_int(-2));
                    }
                }
            }
        }
    }

    /// `g` acting on factor `i`.
    pub fn act(&self, i: usize, g: CurrentGenerator, v: &ModuleVector<F>) -> ModuleVector<F> {
        let mut out = ModuleVector::default();
        for (j, c) in v.terms() {
            self.act_monomial(i, g, j, c, &mut out);
        }
        out
    }

    /// Diagonal `sl2` action `X = Σ_i X_0^(i)`.
    pub fn act_diagonal(&self, kind: Kind, v: &ModuleVector<F>) -> ModuleVector<F> {
        let g = CurrentGenerator { kind, level: 0 };
        let mut out = ModuleVector::default();
        for i in 0..self.factors() {
            for (j, c) in v.terms() {
                self.act_monomial(i, g, j, c, &mut out);
            }
        }
        out
    }

    /// The highest weight vector `v_Λ`.
    pub fn vacuum(&self) -> ModuleVector<F> {
        ModuleVector::basis(vec![0; self.offsets[self.factors() - 1] + self.ranks[self.factors() - 1] + 1])
    }

    /// Matrix of `op` from `source` to `target`, one column per source basis vector.
    pub fn operator_matrix(
        &self,
        source: &WeightSpace,
        target: &WeightSpace,
        op: impl Fn(&ModuleVector<F>) -> ModuleVector<F> + Sync + Send,
    ) -> Matrix<F> {
        let columns = par::map(source.basis(), |j| target.coordinates(&op(&ModuleVector::basis(j.clone()))));
        Matrix::from_columns(target.dim(), &columns)
    }

    /// Matrix of a single generator on factor `i`, from weight `m` to the weight it lands in.
    pub fn generator_matrix(&self, i: usize, g: CurrentGenerator, source: &WeightSpace) -> Matrix<F> {
        let target = match g.kind {
            Kind::F => WeightSpace::new(self.ranks.clone(), source.m + 1),
            Kind::H => source.clone(),
            Kind::E if source.m == 0 => return Matrix::zeros(0, source.dim()),
            Kind::E => WeightSpace::new(self.ranks.clone(), source.m - 1),
        };
        self.operator_matrix(source, &target, |v| self.act(i, g, v))
    }

    /// Diagonal `E` as a map from weight `m` to weight `m - 1`.
    pub fn raising_matrix(&self, source: &WeightSpace) -> Matrix<F> {
        if source.m == 0 {
            return Matrix::zeros(0, source.dim());
        }
        let target = WeightSpace::new(self.ranks.clone(), source.m - 1);
        self.operator_matrix(source, &target, |v| self.act_diagonal(Kind::E, v))
    }

    /// Basis of the singular vectors of weight `|Λ| - 2m`, as coordinate
    /// columns in the weight-space basis. Fails when the dimension differs
    /// from the closed formula.
    pub fn singular_space(&self, space: &WeightSpace, tol: f64) -> Result<Vec<Vec<F>>, VermaError> {
        let basis = if space.m == 0 {
            vec![vec![F::one()]]
        } else {
            self.raising_matrix(space).nullspace(tol)
        };
        let expected = singular_dimension(&self.ranks, space.m);
        if basis.len() as u64 != expected {
            return Err(VermaError::SingularDimension {
                expected,
                found: basis.len(),
            });
        }
        Ok(basis)
    }

    fn top_weight(&self) -> Result<F, VermaError> {
        let x = self.weight(0, self.ranks[0]);
        if x.magnitude() == 0.0 {
            return Err(VermaError::ZeroTopWeight);
        }
        Ok(x)
    }

    /// `e = E - x ∂_f`, with `f = F_{r_1}` on the first factor and `x = γ_1^(r_1)`.
    fn shifted_raising(&self, x: &F, v: &ModuleVector<F>) -> ModuleVector<F> {
        let slot = self.slot(0, self.ranks[0]);
        let mut out = self.act_diagonal(Kind::E, v);
        for (j, c) in v.terms() {
            if j[slot] > 0 {
                let mut k = j.clone();
                k[slot] -= 1;
                out.add_term(k, -(x.clone() * c.clone() * F::from_int(j[slot] as i64)));
            }
        }
        out
    }

    /// `exp(-f e / x) v` for `v` free of the first factor's top `F`.
    pub fn l_map(&self, v: &ModuleVector<F>) -> Result<ModuleVector<F>, VermaError> {
        let x = self.top_weight()?;
        let slot = self.slot(0, self.ranks[0]);
        if v.terms().any(|(j, _)| j[slot] > 0) {
            return Err(VermaError::NotInSubspace);
        }
        let f = CurrentGenerator::f(self.ranks[0]);
        let mut total = v.clone();
        let mut term = v.clone();
        let mut k = 0i64;
        // the f∂_f grading bounds the number of nonzero terms by the weight
        let cap = v.terms().map(|(j, _)| j.iter().sum::<u32>() as i64).max().unwrap_or(0) + 2;
        while !term.is_zero() && k <= cap {
            let next = self.act(0, f, &self.shifted_raising(&x, &term));
            let denom = F::from_int(k + 1) * x.clone();
            term = next.scale(&(-(F::one() / denom)));
            total = total.add(&term);
            k += 1;
        }
        Ok(total)
    }

    /// The unique singular vector of the form `v + f·w`, for `v` free of the
    /// first factor's top `F`. Solves `E(f w) = -E v`; the map `w ↦ E(f w)` is
    /// `x (1 + f∂_f)` plus terms raising the `F_{r_1}` count, hence invertible.
    ///
    /// Agrees with [`Self::l_map`] whenever the series lands in the singular
    /// space, which is guaranteed only for `r_1 = 1`.
    pub fn singular_lift(&self, v: &ModuleVector<F>, m: u32, tol: f64) -> Result<ModuleVector<F>, VermaError> {
        self.top_weight()?;
        let slot = self.slot(0, self.ranks[0]);
        if v.terms().any(|(j, _)| j[slot] > 0) {
            return Err(VermaError::NotInSubspace);
        }
        if m == 0 {
            return Ok(v.clone());
        }
        let lower = WeightSpace::new(self.ranks.clone(), m - 1);
        let f = CurrentGenerator::f(self.ranks[0]);
        let ef = self.operator_matrix(&lower, &lower, |w| self.act_diagonal(Kind::E, &self.act(0, f, w)));
        let inv = ef
            .inverse(tol)
            .expect("E∘f is invertible when the top weight is nonzero");
        let rhs = lower.coordinates(&self.act_diagonal(Kind::E, v));
        let w = lower.vector(&inv.apply(&rhs));
        Ok(v.sub(&self.act(0, f, &w)))
    }

    /// Columns: [`Self::singular_lift`] of the basis vectors of weight `m`
    /// with no top `F` on the first factor.
    pub fn singular_lift_matrix(&self, space: &WeightSpace, tol: f64) -> Result<Matrix<F>, VermaError> {
        let slot = self.slot(0, self.ranks[0]);
        let sources: Vec<&Multi> = space.basis().iter().filter(|j| j[slot] == 0).collect();
        let images = par::map(&sources, |j| self.singular_lift(&ModuleVector::basis((*j).clone()), space.m, tol));
        let mut columns = Vec::with_capacity(images.len());
        for img in images {
            columns.push(space.coordinates(&img?));
        }
        Ok(Matrix::from_columns(space.dim(), &columns))
    }

    /// Columns: images under [`Self::l_map`] of the basis vectors of weight `m`
    /// with no top `F` on the first factor.
    pub fn l_map_matrix(&self, space: &WeightSpace) -> Result<Matrix<F>, VermaError> {
        let slot = self.slot(0, self.ranks[0]);
        let sources: Vec<&Multi> = space.basis().iter().filter(|j| j[slot] == 0).collect();
        let images = par::map(&sources, |j| self.l_map(&ModuleVector::basis((*j).clone())));
        let mut columns = Vec::with_capacity(images.len());
        for img in images {
            columns.push(space.coordinates(&img?));
        }
        Ok(Matrix::from_columns(space.dim(), &columns))
    }
}

/// `C(|R| + n + m - 2, m)`.
pub fn singular_dimension(ranks: &[usize], m: u32) -> u64 {
    let total: usize = ranks.iter().sum();
    combinat::singular_space_dim(total, ranks.len(), m).expect("dimension fits in u64")
}

/// Basis `{F^J v : |J| = m}` in descending lexicographic order of `J`.
#[derive(Clone, Debug)]
pub struct WeightSpace {
    ranks: Vec<usize>,
    m: u32,
    basis: Vec<Multi>,
    index: HashMap<Multi, usize>,
}

impl WeightSpace {
    pub fn new(ranks: Vec<usize>, m: u32) -> Self {
        let slots: usize = ranks.iter().map(|r| r + 1).sum();
        let basis = combinat::compositions(slots, m);
        let index = basis.iter().enumerate().map(|(k, j)| (j.clone(), k)).collect();
        Self { ranks, m, basis, index }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Multi] {
        &self.basis
    }

    pub fn position(&self, j: &Multi) -> Option<usize> {
        self.index.get(j).copied()
    }

    /// Coordinates of `v` in this basis; panics if `v` has a component outside.
    pub fn coordinates<F: Field>(&self, v: &ModuleVector<F>) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim()];
        for (j, c) in v.terms() {
            let k = self
                .position(j)
                .unwrap_or_else(|| panic!("monomial {j:?} outside the weight space m = {}", self.m));
            out[k] = c.clone();
        }
        out
    }

    pub fn vector<F: Field>(&self, coords: &[F]) -> ModuleVector<F> {
        let mut v = ModuleVector::default();
        for (j, c) in self.basis.iter().zip(coords) {
            v.add_term(j.clone(), c.clone());
        }
        v
    }

    /// `J` split per factor, for serialization.
    pub fn nested_labels(&self) -> Vec<Vec<Vec<u32>>> {
        let offsets = offsets_of(&self.ranks);
        self.basis
            .iter()
            .map(|j| {
                offsets
                    .iter()
                    .zip(&self.ranks)
                    .map(|(&o, &r)| j[o..=o + r].to_vec())
                    .collect()
            })
            .collect()
    }

    /// Permutation matrix exchanging tensor factors `i` and `i + 1` (equal ranks).
    pub fn swap_matrix<F: Field>(&self, i: usize) -> Matrix<F> {
        assert_eq!(self.ranks[i], self.ranks[i + 1], "swapped factors must have equal rank");
        let offsets = offsets_of(&self.ranks);
        let width = self.ranks[i] + 1;
        let (a, b) = (offsets[i], offsets[i + 1]);
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for (col, j) in self.basis.iter().enumerate() {
            let mut k = j.clone();
            for t in 0..width {
                k.swap(a + t, b + t);
            }
            m.set(self.index[&k], col, F::one());
        }
        m
    }
}
