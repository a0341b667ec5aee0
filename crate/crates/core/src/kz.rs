//! Gaudin operators and the confluent KZ connection on weight spaces.
//!
//! In the frame `{F^J v_Λ}` the connection along a vector field `V` acts on
//! coefficient vectors as `φ ↦ V(φ) + A_V φ` with
//!
//! - `A_{∂_i} = -G_i^(-1) / κ`
//! - `A_{D_i^(s)} = Θ_i^(s) - (G_i^(s) - β_i^(s)) / κ`
//!
//! where `Θ_i^(s)` is the frame derivative `F_p ↦ p F_{p+s}` on factor `i`.
//! Derivatives of the `A`'s are taken exactly with [`Dual`] numbers seeded
//! by the tangent of the differentiating field.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::combinat::binomial;
use crate::linalg::{spectral_norm, ComplexMatrixJson, Matrix};
use crate::par;
use crate::scalar::{Dual, Field};
use crate::verma::{CurrentGenerator, Kind, ModuleVector, TensorVerma, VermaError, WeightSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KzError {
    #[error("points z_{i} and z_{j} coincide")]
    Coincident { i: usize, j: usize },
    #[error("kappa must be nonzero")]
    ZeroKappa,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("direction {0:?} is not a vector field of this base space")]
    BadDirection(Direction),
    #[error(transparent)]
    Verma(#[from] VermaError),
}

/// Value assigned to `γ^(0)` inside `β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaZero {
    /// `γ^(0) := λ`, the `H_0` weight.
    Weight,
    /// `γ^(0) := 0`.
    Vanishing,
}

impl GammaZero {
    pub const ALL: [GammaZero; 2] = [GammaZero::Weight, GammaZero::Vanishing];
}

/// A basis vector field of the base space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    /// `∂/∂z_i`
    Z(usize),
    /// `D_i^(s)`
    D(usize, usize),
}

/// `∂_1..∂_n` followed by every `D_i^(s)`.
pub fn directions(ranks: &[usize]) -> Vec<Direction> {
    let mut out: Vec<Direction> = (0..ranks.len()).map(Direction::Z).collect();
    for (i, &r) in ranks.iter().enumerate() {
        out.extend((0..r).map(|s| Direction::D(i, s)));
    }
    out
}

/// `[V, W]` as a combination of basis fields: `[D_i^(s), D_i^(t)] = -(s-t) D_i^(s+t)`,
/// with `D^(u) = 0` for `u ≥ r_i`; all other pairs commute.
pub fn field_bracket(v: Direction, w: Direction, ranks: &[usize]) -> Vec<(i64, Direction)> {
    match (v, w) {
        (Direction::D(i, s), Direction::D(k, t)) if i == k && s != t && s + t < ranks[i] => {
            vec![(-(s as i64 - t as i64), Direction::D(i, s + t))]
        }
        _ => Vec::new(),
    }
}

/// A point of the base space together with the fixed weights and `κ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint<F> {
    pub ranks: Vec<usize>,
    pub z: Vec<F>,
    /// `gamma[i][p - 1] = γ_i^(p)`.
    pub gamma: Vec<Vec<F>>,
    pub lambda: Vec<F>,
    pub kappa: F,
}

impl<F: Field> BasePoint<F> {
    pub fn validate(&self) -> Result<(), KzError> {
        let n = self.ranks.len();
        if self.z.len() != n || self.gamma.len() != n || self.lambda.len() != n {
            return Err(KzError::Shape(format!(
                "{n} factors but {} points, {} movable weight vectors, {} weights",
                self.z.len(),
                self.gamma.len(),
                self.lambda.len()
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if (self.z[i].clone() - self.z[j].clone()).magnitude() == 0.0 {
                    return Err(KzError::Coincident { i, j });
                }
            }
        }
        if self.kappa.magnitude() == 0.0 {
            return Err(KzError::ZeroKappa);
        }
        Ok(())
    }

    pub fn module(&self) -> Result<TensorVerma<F>, KzError> {
        Ok(TensorVerma::new(self.ranks.clone(), self.lambda.clone(), self.gamma.clone())?)
    }
}

/// Coordinate tangent `(dz, dγ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    pub dz: Vec<Complex64>,
    pub dgamma: Vec<Vec<Complex64>>,
}

impl Tangent {
    pub fn zero(ranks: &[usize]) -> Self {
        Self {
            dz: vec![Complex64::zero(); ranks.len()],
            dgamma: ranks.iter().map(|&r| vec![Complex64::zero(); r]).collect(),
        }
    }
}

impl BasePoint<Complex64> {
    /// Coordinate expression of a basis field at this point.
    pub fn tangent_of(&self, dir: Direction) -> Result<Tangent, KzError> {
        let mut t = Tangent::zero(&self.ranks);
        match dir {
            Direction::Z(i) if i < self.ranks.len() => t.dz[i] = Complex64::one(),
            Direction::D(i, s) if i < self.ranks.len() && s < self.ranks[i] => {
                let r = self.ranks[i];
                for p in 1..=r - s {
                    t.dgamma[i][p - 1] = Complex64::new(p as f64, 0.0) * self.gamma[i][s + p - 1];
                }
            }
            _ => return Err(KzError::BadDirection(dir)),
        }
        Ok(t)
    }

    /// The same point over dual numbers, with infinitesimal part `tangent`.
    pub fn seeded(&self, tangent: &Tangent) -> BasePoint<Dual> {
        BasePoint {
            ranks: self.ranks.clone(),
            z: self.z.iter().zip(&tangent.dz).map(|(&v, &e)| Dual::new(v, e)).collect(),
            gamma: self
                .gamma
                .iter()
                .zip(&tangent.dgamma)
                .map(|(g, dg)| g.iter().zip(dg).map(|(&v, &e)| Dual::new(v, e)).collect())
                .collect(),
            lambda: self.lambda.iter().map(|&l| Dual::constant(l)).collect(),
            kappa: Dual::constant(self.kappa),
        }
    }

    /// Move along a coordinate tangent: `point + h · tangent`.
    pub fn shifted(&self, tangent: &Tangent, h: f64) -> Self {
        let mut p = self.clone();
        for (z, dz) in p.z.iter_mut().zip(&tangent.dz) {
            *z += dz * h;
        }
        for (g, dg) in p.gamma.iter_mut().zip(&tangent.dgamma) {
            for (x, dx) in g.iter_mut().zip(dg) {
                *x += dx * h;
            }
        }
        p
    }
}

/// `β_i^(s) = ¼ Σ_{p=0}^{s} γ^(p) γ^(s-p) + (s+1)/2 · γ^(s)`.
pub fn beta_scalar<F: Field>(lambda: &F, gamma: &[F], s: usize, convention: GammaZero) -> F {
    let g = |p: usize| -> F {
        if p == 0 {
            match convention {
                GammaZero::Weight => lambda.clone(),
                GammaZero::Vanishing => F::zero(),
            }
        } else {
            gamma.get(p - 1).cloned().unwrap_or_else(F::zero)
        }
    };
    let mut quad = F::zero();
    for p in 0..=s {
        quad = quad + g(p) * g(s - p);
    }
    quad / F::from_int(4) + F::from_int(s as i64 + 1) * g(s) / F::from_int(2)
}

/// Upper-triangular `P` with `(∂_{γ^(1)}, .., ∂_{γ^(r)}) P = (D^(r-1), .., D^(0))`,
/// and its inverse.
pub fn coordinate_frame_change<F: Field>(gamma: &[F]) -> Result<(Matrix<F>, Matrix<F>), KzError> {
    let r = gamma.len();
    let g = |u: usize| gamma[u - 1].clone();
    // column k holds D^(r-1-k) = Σ_{p=1}^{k+1} p γ^(r-1-k+p) ∂_p
    let p = Matrix::from_fn(r, r, |row, k| {
        let pp = row + 1;
        if pp <= k + 1 {
            F::from_int(pp as i64) * g(r - 1 - k + pp)
        } else {
            F::zero()
        }
    });
    let inv = p
        .inverse(0.0)
        .ok_or(KzError::Verma(VermaError::DegenerateGamma { factor: 0 }))?;
    Ok((p, inv))
}

/// Coefficients of a coordinate tangent on the fields `D_i^(0..r_i)`, per factor.
pub fn tangent_in_frame(point: &BasePoint<Complex64>, tangent: &Tangent) -> Result<Vec<Vec<Complex64>>, KzError> {
    let mut out = Vec::with_capacity(point.ranks.len());
    for (i, g) in point.gamma.iter().enumerate() {
        if tangent.dgamma[i].iter().all(|x| x.is_zero()) {
            out.push(vec![Complex64::zero(); g.len()]);
            continue;
        }
        let (_, pinv) = coordinate_frame_change(g)?;
        let d = pinv.apply(&tangent.dgamma[i]);
        // d[k] multiplies D^(r-1-k); reorder to index by s
        let r = g.len();
        out.push((0..r).map(|s| d[r - 1 - s]).collect());
    }
    Ok(out)
}

/// Generator matrices around one weight space, and the operators built from them.
pub struct KzOperators<F> {
    point: BasePoint<F>,
    space: WeightSpace,
    /// `[i][p]`: `E_p` from `W_m` to `W_{m-1}`.
    e_down: Vec<Vec<Matrix<F>>>,
    /// `[i][p]`: `E_p` from `W_{m+1}` to `W_m`.
    e_in: Vec<Vec<Matrix<F>>>,
    /// `[i][p]`: `F_p` from `W_m` to `W_{m+1}`.
    f_up: Vec<Vec<Matrix<F>>>,
    /// `[i][p]`: `F_p` from `W_{m-1}` to `W_m`.
    f_in: Vec<Vec<Matrix<F>>>,
    /// `[i][p]`: `H_p` on `W_m`.
    h: Vec<Vec<Matrix<F>>>,
    /// `[i][s]`: frame derivative along `D_i^(s)`.
    theta: Vec<Vec<Matrix<F>>>,
    module: TensorVerma<F>,
}

impl<F: Field> KzOperators<F> {
    pub fn new(point: BasePoint<F>, m: u32) -> Result<Self, KzError> {
        point.validate()?;
        let module = point.module()?;
        let ranks = point.ranks.clone();
        let space = WeightSpace::new(ranks.clone(), m);
        let upper = WeightSpace::new(ranks.clone(), m + 1);
        let lower = (m > 0).then(|| WeightSpace::new(ranks.clone(), m - 1));
        let jobs: Vec<(usize, usize)> = ranks
            .iter()
            .enumerate()
            .flat_map(|(i, &r)| (0..=r).map(move |p| (i, p)))
            .collect();
        let built = par::map(&jobs, |&(i, p)| {
            let e_down = module.generator_matrix(i, CurrentGenerator::e(p), &space);
            let e_in = module.generator_matrix(i, CurrentGenerator::e(p), &upper);
            let f_up = module.generator_matrix(i, CurrentGenerator::f(p), &space);
            let f_in = match &lower {
                Some(l) => module.generator_matrix(i, CurrentGenerator::f(p), l),
                None => Matrix::zeros(space.dim(), 0),
            };
            let h = module.generator_matrix(i, CurrentGenerator::h(p), &space);
            (e_down, e_in, f_up, f_in, h)
        });
        let mut ops = Self {
            point,
            space,
            e_down: vec![Vec::new(); ranks.len()],
            e_in: vec![Vec::new(); ranks.len()],
            f_up: vec![Vec::new(); ranks.len()],
            f_in: vec![Vec::new(); ranks.len()],
            h: vec![Vec::new(); ranks.len()],
            theta: Vec::new(),
            module,
        };
        for ((i, _), (a, b, c, d, e)) in jobs.into_iter().zip(built) {
            ops.e_down[i].push(a);
            ops.e_in[i].push(b);
            ops.f_up[i].push(c);
            ops.f_in[i].push(d);
            ops.h[i].push(e);
        }
        ops.theta = (0..ranks.len())
            .map(|i| (0..ranks[i]).map(|s| ops.build_theta(i, s)).collect())
            .collect();
        Ok(ops)
    }

    /// Move the points `z` keeping every other coordinate; all cached
    /// generator matrices stay valid.
    pub fn set_z(&mut self, z: Vec<F>) -> Result<(), KzError> {
        if z.len() != self.point.z.len() {
            return Err(KzError::Shape(format!("expected {} points, got {}", self.point.z.len(), z.len())));
        }
        self.point.z = z;
        self.point.validate()
    }

    pub fn space(&self) -> &WeightSpace {
        &self.space
    }

    pub fn module(&self) -> &TensorVerma<F> {
        &self.module
    }

    pub fn point(&self) -> &BasePoint<F> {
        &self.point
    }

    fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `Ω_ij^(p,q) = E_p ⊗ F_q + F_p ⊗ E_q + ½ H_p ⊗ H_q`, left leg applied
    /// first; zero when a level exceeds its factor's rank.
    pub fn omega(&self, i: usize, j: usize, p: usize, q: usize) -> Matrix<F> {
        let r = &self.point.ranks;
        if p > r[i] || q > r[j] {
            return Matrix::zeros(self.dim(), self.dim());
        }
        let ef = self.f_in[j][q].matmul(&self.e_down[i][p]);
        let fe = self.e_in[j][q].matmul(&self.f_up[i][p]);
        let hh = self.h[j][q].matmul(&self.h[i][p]);
        ef.add(&fe).add(&hh.scale(&(F::one() / F::from_int(2))))
    }

    /// Generalized Gaudin operator `G_i^(s)`, `-1 ≤ s ≤ r_i - 1`.
    pub fn gaudin(&self, i: usize, s: i64) -> Matrix<F> {
        let ranks = &self.point.ranks;
        let mut g = Matrix::zeros(self.dim(), self.dim());
        if s >= 0 {
            let s = s as usize;
            for p in 0..=s {
                g = g.add(&self.omega(i, i, p, s - p));
            }
            g = g.scale(&(F::one() / F::from_int(2)));
        }
        for j in 0..ranks.len() {
            if j == i {
                continue;
            }
            let inv = F::one() / (self.point.z[i].clone() - self.point.z[j].clone());
            let top = ranks[i] as i64 + ranks[j] as i64 - s - 1;
            if top < 0 {
                continue;
            }
            for total in 0..=top as usize {
                let weight = (0..=total).fold(F::one(), |acc, _| acc * inv.clone());
                for p in 0..=total {
                    let q = total - p;
                    let level = s + p as i64 + 1;
                    if level > ranks[i] as i64 || q > ranks[j] {
                        continue;
                    }
                    let c = binomial(total as u64, p as u64);
                    let c = F::from_int(i64::try_from(c).expect("small binomial"));
                    let sign = if p % 2 == 0 { F::one() } else { -F::one() };
                    let coef = c * sign * weight.clone();
                    g = g.add(&self.omega(i, j, level as usize, q).scale(&coef));
                }
            }
        }
        g
    }

    pub fn beta(&self, i: usize, s: usize, convention: GammaZero) -> F {
        beta_scalar(&self.point.lambda[i], &self.point.gamma[i], s, convention)
    }

    /// Frame derivative `Θ_i^(s)`: Leibniz over the `F` letters of factor `i`,
    /// each `F_p` becoming `p F_{p+s}`.
    pub fn theta(&self, i: usize, s: usize) -> &Matrix<F> {
        &self.theta[i][s]
    }

    fn build_theta(&self, i: usize, s: usize) -> Matrix<F> {
        let r = self.point.ranks[i];
        let module = &self.module;
        module.operator_matrix(&self.space, &self.space, |v| {
            let mut out = ModuleVector::default();
            for (j, c) in v.terms() {
                for p in 1..=r {
                    let slot = module.slot(i, p);
                    if j[slot] == 0 || p + s > r {
                        continue;
                    }
                    let mut k = j.clone();
                    k[slot] -= 1;
                    k[module.slot(i, p + s)] += 1;
                    out.add_term(k, c.clone() * F::from_int((p as i64) * j[slot] as i64));
                }
            }
            out
        })
    }

    /// `A_V` for a basis field `V`.
    pub fn connection(&self, dir: Direction, convention: GammaZero) -> Result<Matrix<F>, KzError> {
        let kinv = F::one() / self.point.kappa.clone();
        match dir {
            Direction::Z(i) if i < self.point.ranks.len() => Ok(self.gaudin(i, -1).scale(&-kinv)),
            Direction::D(i, s) if i < self.point.ranks.len() && s < self.point.ranks[i] => {
                let shifted = self
                    .gaudin(i, s as i64)
                    .sub(&Matrix::identity(self.dim()).scale(&self.beta(i, s, convention)));
                Ok(self.theta(i, s).sub(&shifted.scale(&kinv)))
            }
            _ => Err(KzError::BadDirection(dir)),
        }
    }

    /// Diagonal `E` from `W_m` to `W_{m-1}`.
    pub fn raising(&self) -> Matrix<F> {
        let mut e = Matrix::zeros(self.e_down[0][0].rows(), self.dim());
        for row in &self.e_down {
            e = e.add(&row[0]);
        }
        e
    }

    /// Diagonal `X_0` on `W_m` for `X ∈ {H}`, or between neighbours for `E`, `F`.
    pub fn diagonal(&self, kind: Kind) -> Matrix<F> {
        let pick = |m: &Vec<Vec<Matrix<F>>>| {
            m.iter().skip(1).fold(m[0][0].clone(), |acc, row| acc.add(&row[0]))
        };
        match kind {
            Kind::E => self.raising(),
            Kind::H => pick(&self.h),
            Kind::F => pick(&self.f_up),
        }
    }
}

/// Complex matrices `A_V` for every basis field at a point.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionFrame {
    pub directions: Vec<Direction>,
    pub dim: usize,
    pub matrices: Vec<ComplexMatrixJson>,
}

pub fn connection_frame(point: &BasePoint<Complex64>, m: u32, convention: GammaZero) -> Result<ConnectionFrame, KzError> {
    let ops = KzOperators::new(point.clone(), m)?;
    let dirs = directions(&point.ranks);
    let mut matrices = Vec::with_capacity(dirs.len());
    for &d in &dirs {
        matrices.push(ComplexMatrixJson::from(&ops.connection(d, convention)?.to_nalgebra()));
    }
    Ok(ConnectionFrame {
        directions: dirs,
        dim: ops.dim(),
        matrices,
    })
}

fn split_dual(m: &Matrix<Dual>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    (
        DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j).value),
        DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j).eps),
    )
}

/// `A_W` and its derivative along `V`, evaluated exactly with dual numbers.
pub fn connection_with_derivative(
    point: &BasePoint<Complex64>,
    m: u32,
    along: Direction,
    of: Direction,
    convention: GammaZero,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), KzError> {
    let seeded = point.seeded(&point.tangent_of(along)?);
    let ops = KzOperators::new(seeded, m)?;
    Ok(split_dual(&ops.connection(of, convention)?))
}

/// Spectral norm of `V(A_W) - W(A_V) + [A_V, A_W] - A_{[V,W]}`.
pub fn flatness_residual(
    point: &BasePoint<Complex64>,
    m: u32,
    v: Direction,
    w: Direction,
    convention: GammaZero,
) -> Result<f64, KzError> {
    let (a_w, v_a_w) = connection_with_derivative(point, m, v, w, convention)?;
    let (a_v, w_a_v) = connection_with_derivative(point, m, w, v, convention)?;
    let mut curvature = v_a_w - w_a_v + &a_v * &a_w - &a_w * &a_v;
    let brackets = field_bracket(v, w, &point.ranks);
    if !brackets.is_empty() {
        let ops = KzOperators::new(point.clone(), m)?;
        for (c, d) in brackets {
            curvature -= ops.connection(d, convention)?.to_nalgebra() * Complex64::new(c as f64, 0.0);
        }
    }
    Ok(spectral_norm(&curvature))
}

/// Residual of every unordered pair of distinct basis fields.
#[derive(Clone, Debug, Serialize)]
pub struct FlatnessEntry {
    pub v: Direction,
    pub w: Direction,
    pub residual: f64,
}

pub fn flatness_table(point: &BasePoint<Complex64>, m: u32, convention: GammaZero) -> Result<Vec<FlatnessEntry>, KzError> {
    let dirs = directions(&point.ranks);
    let mut pairs = Vec::new();
    for (a, &v) in dirs.iter().enumerate() {
        for &w in &dirs[a + 1..] {
            pairs.push((v, w));
        }
    }
    par::map(&pairs, |&(v, w)| {
        flatness_residual(point, m, v, w, convention).map(|residual| FlatnessEntry { v, w, residual })
    })
    .into_iter()
    .collect()
}

/// Orthonormal-column basis of the singular vectors at a point, as a complex matrix.
pub fn singular_basis(point: &BasePoint<Complex64>, m: u32) -> Result<DMatrix<Complex64>, KzError> {
    let module = point.module()?;
    let space = WeightSpace::new(point.ranks.clone(), m);
    let lift = module.singular_lift_matrix(&space, 1e-300)?.to_nalgebra();
    if lift.ncols() == 0 {
        return Ok(lift);
    }
    Ok(lift.qr().q())
}

/// Largest norm, over all basis fields, of `(V(E) + A_V^(m-1) E - E A_V^(m)) B`
/// with `E` the diagonal raising operator and `B` a singular basis: zero
/// exactly when the connection preserves the singular vectors.
pub fn singular_projection_check(point: &BasePoint<Complex64>, m: u32, convention: GammaZero) -> Result<f64, KzError> {
    if m == 0 {
        return Ok(0.0);
    }
    let basis = singular_basis(point, m)?;
    let dirs = directions(&point.ranks);
    let residuals = par::map(&dirs, |&d| -> Result<f64, KzError> {
        let seeded = point.seeded(&point.tangent_of(d)?);
        let upper = KzOperators::new(seeded.clone(), m)?;
        let lower = KzOperators::new(seeded, m - 1)?;
        let (e, v_e) = split_dual(&upper.raising());
        let (a_up, _) = split_dual(&upper.connection(d, convention)?);
        let (a_low, _) = split_dual(&lower.connection(d, convention)?);
        let defect = (v_e + &a_low * &e - &e * &a_up) * &basis;
        Ok(spectral_norm(&defect))
    });
    residuals.into_iter().try_fold(0.0f64, |acc, r| r.map(|x| acc.max(x)))
}

/// Random generic point: `z` in the square of side 4 with pairwise distance
/// above `½`, `γ`, `λ` in the unit square and `|γ^(r)| = 0.8`.
pub fn random_point<G: Rng>(rng: &mut G, ranks: &[usize], kappa: f64) -> BasePoint<Complex64> {
    let c = Complex64::new;
    let n = ranks.len();
    let mut z: Vec<Complex64> = Vec::new();
    while z.len() < n {
        let cand = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if z.iter().all(|w| (w - cand).norm() > 0.5) {
            z.push(cand);
        }
    }
    let mut rc = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let gamma = ranks
        .iter()
        .map(|&r| {
            let mut g: Vec<Complex64> = (0..r).map(|_| rc()).collect();
            let top = rc();
            g[r - 1] = top / top.norm() * 0.8;
            g
        })
        .collect();
    let lambda = (0..n).map(|_| rc()).collect();
    BasePoint {
        ranks: ranks.to_vec(),
        z,
        gamma,
        lambda,
        kappa: c(kappa, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::scalar::Ring;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn to_exact_point(ranks: &[usize]) -> BasePoint<BigRational> {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        BasePoint {
            ranks: ranks.to_vec(),
            z: vec![q(0, 1), q(3, 2)],
            gamma: ranks.iter().map(|&r| (1..=r as i64).map(|p| q(p + 1, 3)).collect()).collect(),
            lambda: vec![q(2, 5), q(-1, 3)],
            kappa: q(7, 2),
        }
    }

    #[test]
    fn omega_on_vacuum() {
        let point = to_exact_point(&[1, 1]);
        let ops = KzOperators::new(point.clone(), 0).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let (l1, l2, g1) = (point.lambda[0].clone(), point.lambda[1].clone(), point.gamma[0][0].clone());
        assert_eq!(ops.omega(0, 1, 0, 0).get(0, 0), &(half.clone() * l1 * l2.clone()));
        assert_eq!(ops.omega(0, 1, 1, 0).get(0, 0), &(half * g1 * l2));
        assert!(ops.omega(0, 1, 2, 0).is_zero());
    }

    #[test]
    fn gaudin_examples() {
        let single = BasePoint {
            ranks: vec![2],
            z: vec![BigRational::from_int(0)],
            gamma: vec![vec![BigRational::from_int(1), BigRational::from_int(2)]],
            lambda: vec![BigRational::from_int(3)],
            kappa: BigRational::from_int(1),
        };
        assert!(KzOperators::new(single, 1).unwrap().gaudin(0, -1).is_zero());

        let point = to_exact_point(&[1, 1]);
        let ops = KzOperators::new(point.clone(), 0).unwrap();
        let z12 = point.z[0].clone() - point.z[1].clone();
        let (l1, l2) = (point.lambda[0].clone(), point.lambda[1].clone());
        let (g1, g2) = (point.gamma[0][0].clone(), point.gamma[1][0].clone());
        let expect = (l1.clone() * l2.clone() / z12.clone() + l1 * g2.clone() / (z12.clone() * z12.clone())
            - g1.clone() * l2 / (z12.clone() * z12.clone())
            - BigRational::from_int(2) * g1 * g2 / (z12.clone() * z12.clone() * z12))
            / BigRational::from_int(2);
        assert_eq!(ops.gaudin(0, -1).get(0, 0), &expect);
    }

    #[test]
    fn beta_examples() {
        let l = c(0.3, 0.1);
        let g = [c(0.5, -0.2), c(1.1, 0.4)];
        let b0 = beta_scalar(&l, &g, 0, GammaZero::Weight);
        assert!((b0 - (l * l / 4.0 + l / 2.0)).norm() < 1e-15);
        let b1 = beta_scalar(&l, &g, 1, GammaZero::Weight);
        assert!((b1 - (l * g[0] / 2.0 + g[0])).norm() < 1e-15);
        let z = c(0.0, 0.0);
        assert_eq!(beta_scalar(&z, &[z, z], 1, GammaZero::Weight), z);
        assert_eq!(beta_scalar(&l, &g, 0, GammaZero::Vanishing), z);
    }

    #[test]
    fn theta_examples() {
        let point = BasePoint {
            ranks: vec![2],
            z: vec![c(0.0, 0.0)],
            gamma: vec![vec![c(0.3, 0.0), c(1.0, 0.0)]],
            lambda: vec![c(0.5, 0.0)],
            kappa: c(2.0, 0.0),
        };
        let ops = KzOperators::new(point, 1).unwrap();
        // basis order: F0, F1, F2
        let t0 = ops.theta(0, 0);
        assert_eq!(t0.column(0), vec![c(0.0, 0.0); 3]);
        assert_eq!(t0.column(1), vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(t0.column(2), vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let t1 = ops.theta(0, 1);
        assert_eq!(t1.column(1), vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(t1.column(2).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn frame_change_examples() {
        let (p, pinv) = coordinate_frame_change(&[c(2.0, 0.0)]).unwrap();
        assert_eq!(p.get(0, 0), &c(2.0, 0.0));
        assert_eq!(pinv.get(0, 0), &c(0.5, 0.0));
        let g = [c(0.7, 0.1), c(-1.3, 0.4)];
        let (p, _) = coordinate_frame_change(&g).unwrap();
        assert_eq!(p.get(0, 0), &g[1]);
        assert_eq!(p.get(0, 1), &g[0]);
        assert_eq!(p.get(1, 0), &c(0.0, 0.0));
        assert_eq!(p.get(1, 1), &(g[1] * 2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in 1..=4usize {
            let g: Vec<Complex64> = (0..r).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let (p, pinv) = coordinate_frame_change(&g).unwrap();
            let det = (0..r).fold(c(1.0, 0.0), |acc, k| acc * p.get(k, k));
            let fact: f64 = (1..=r).map(|k| k as f64).product();
            assert!((det - g[r - 1].powi(r as i32) * fact).norm() < 1e-12);
            let id = p.matmul(&pinv).to_nalgebra() - DMatrix::identity(r, r);
            assert!(id.norm() < 1e-12);
        }
    }

    /// `D^(s) f` for a polynomial in `γ^(1..r)`, exactly.
    fn apply_field(s: usize, poly: &std::collections::BTreeMap<Vec<u32>, i64>, r: usize) -> std::collections::BTreeMap<Vec<u32>, i64> {
        let mut out = std::collections::BTreeMap::new();
        for (e, &c) in poly {
            for p in 1..=r - s {
                if e[p - 1] == 0 {
                    continue;
                }
                let mut k = e.clone();
                let coef = c * p as i64 * e[p - 1] as i64;
                k[p - 1] -= 1;
                k[s + p - 1] += 1;
                *out.entry(k).or_insert(0) += coef;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    #[test]
    fn field_commutators_on_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for r in 1..=4usize {
            for _ in 0..5 {
                let mut f = std::collections::BTreeMap::new();
                for _ in 0..4 {
                    let e: Vec<u32> = (0..r).map(|_| rng.gen_range(0..3)).collect();
                    *f.entry(e).or_insert(0) += rng.gen_range(-5..=5);
                }
                f.retain(|_, c: &mut i64| *c != 0);
                for s in 0..r {
                    for t in 0..r {
                        let st = apply_field(s, &apply_field(t, &f, r), r);
                        let ts = apply_field(t, &apply_field(s, &f, r), r);
                        let mut lhs = st.clone();
                        for (k, v) in ts {
                            *lhs.entry(k).or_insert(0) -= v;
                        }
                        lhs.retain(|_, c| *c != 0);
                        let mut rhs = std::collections::BTreeMap::new();
                        for (c0, d) in field_bracket(Direction::D(0, s), Direction::D(0, t), &[r]) {
                            let Direction::D(_, u) = d else { unreachable!() };
                            for (k, v) in apply_field(u, &f, r) {
                                *rhs.entry(k).or_insert(0) += c0 * v;
                            }
                        }
                        rhs.retain(|_, c| *c != 0);
                        assert_eq!(lhs, rhs, "r={r} s={s} t={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn gaudin_commutes_with_diagonal_sl2() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for ranks in [vec![1, 1], vec![2, 1], vec![2, 2]] {
            let point = random_point(&mut rng, &ranks, 2.0);
            let m = 2;
            let ops = KzOperators::new(point.clone(), m).unwrap();
            let low = KzOperators::new(point.clone(), m - 1).unwrap();
            let up = KzOperators::new(point.clone(), m + 1).unwrap();
            for i in 0..ranks.len() {
                for s in -1..ranks[i] as i64 {
                    let g = ops.gaudin(i, s).to_nalgebra();
                    let h = ops.diagonal(Kind::H).to_nalgebra();
                    let scale = g.norm().max(1.0);
                    assert!((&g * &h - &h * &g).norm() / scale < 1e-9);
                    let e = ops.raising().to_nalgebra();
                    let gl = low.gaudin(i, s).to_nalgebra();
                    assert!((&e * &g - &gl * &e).norm() / scale < 1e-9);
                    let f = ops.diagonal(Kind::F).to_nalgebra();
                    let gu = up.gaudin(i, s).to_nalgebra();
                    assert!((&f * &g - &gu * &f).norm() / scale < 1e-9);
                }
            }
        }
    }

    #[test]
    fn gaudin_pole_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ranks = [2usize, 1];
        let mut point = random_point(&mut rng, &ranks, 2.0);
        let order = (ranks[0] + ranks[1] + 1) as i32;
        let mut sizes = Vec::new();
        for k in 1..=4 {
            let eps = 10f64.powi(-k);
            point.z[1] = point.z[0] + c(eps, 0.0);
            let ops = KzOperators::new(point.clone(), 1).unwrap();
            let scaled = ops.gaudin(0, -1).to_nalgebra() * c(-eps, 0.0).powi(order);
            sizes.push(scaled.norm());
        }
        // analytic after scaling: values settle instead of blowing up
        assert!(sizes.iter().all(|&s| s < 10.0 * sizes[0] + 1.0));
        assert!((sizes[3] - sizes[2]).abs() < 1e-2 * sizes[2].max(1.0));
    }

    #[test]
    fn dual_derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let point = random_point(&mut rng, &[2, 1], 3.5);
        for along in directions(&point.ranks) {
            for of in directions(&point.ranks) {
                let (_, d) = connection_with_derivative(&point, 1, along, of, GammaZero::Weight).unwrap();
                let t = point.tangent_of(along).unwrap();
                let h = 1e-6;
                let plus = KzOperators::new(point.shifted(&t, h), 1).unwrap().connection(of, GammaZero::Weight).unwrap();
                let minus = KzOperators::new(point.shifted(&t, -h), 1).unwrap().connection(of, GammaZero::Weight).unwrap();
                let fd = (plus.to_nalgebra() - minus.to_nalgebra()) / c(2.0 * h, 0.0);
                assert!((fd - &d).norm() < 1e-5 * d.norm().max(1.0), "{along:?} {of:?}");
            }
        }
    }

    #[test]
    fn flat_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let point = random_point(&mut rng, &[1], 2.0);
        for e in flatness_table(&point, 1, GammaZero::Weight).unwrap() {
            assert!(e.residual < 1e-10);
        }
        let mut point = random_point(&mut rng, &[1, 1], 2.0);
        let r = flatness_residual(&point, 1, Direction::Z(0), Direction::Z(1), GammaZero::Weight).unwrap();
        assert!(r < 1e-10, "{r}");
        point.kappa *= 2.0;
        let r = flatness_residual(&point, 1, Direction::Z(0), Direction::D(1, 0), GammaZero::Weight).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn singular_restriction_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let point = random_point(&mut rng, &[1, 1], 2.0);
        assert!(singular_projection_check(&point, 0, GammaZero::Weight).unwrap() < 1e-12);
        for _ in 0..3 {
            let point = random_point(&mut rng, &[1, 1], 3.5);
            assert!(singular_projection_check(&point, 1, GammaZero::Weight).unwrap() < 1e-9);
        }
        let point = random_point(&mut rng, &[2], 2.0);
        assert!(singular_projection_check(&point, 2, GammaZero::Weight).unwrap() < 1e-9);
    }

    #[test]
    fn rejects_coincident_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut point = random_point(&mut rng, &[1, 1], 2.0);
        point.z[1] = point.z[0];
        assert!(matches!(KzOperators::new(point, 1), Err(KzError::Coincident { i: 0, j: 1 })));
    }
}
