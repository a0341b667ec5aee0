//! Parallel transport of the confluent KZ connection and the monodromy
//! representation of the framed braid group.
//!
//! Transport solves `dΨ/dθ = -A(θ) Ψ` along a parameterized path, with `A(θ)`
//! the connection matrix along the path tangent. The integrator is the
//! Dormand-Prince 5(4) pair with a step cap proportional to the distance from
//! the discriminant `{z_i = z_j} ∪ {γ_i^(r_i) = 0}`.
//!
//! Word matrices multiply left to right, `M(g_1 .. g_k) = M(g_1) .. M(g_k)`,
//! the same convention as the Burau side.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::burau::{reduced_burau_matrix, BurauError};
use crate::fbraid::{defining_relations, FramedBraidWord, Generator};
use crate::kz::{tangent_in_frame, BasePoint, Direction, GammaZero, KzError, KzOperators, Tangent};
use crate::linalg::{spectral_norm, ComplexMatrixJson};
use crate::par;
use crate::verma::WeightSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error(transparent)]
    Kz(#[from] KzError),
    #[error(transparent)]
    Burau(#[from] BurauError),
    #[error("path comes within {distance:.3e} of the discriminant at parameter {theta:.6}")]
    Discriminant { theta: f64, distance: f64 },
    #[error("step size underflow ({step:.3e}) at parameter {theta:.6}")]
    StepUnderflow { theta: f64, step: f64 },
    #[error("transported singular vectors leave the singular subspace (residual {0:.3e})")]
    NotInvariant(f64),
    #[error("{0}")]
    Shape(String),
    #[error("dimension mismatch: monodromy side {monodromy}, homological side {homological}")]
    Dimension { monodromy: usize, homological: usize },
}

/// One piece of a path; each is parameterized by `θ ∈ [0, 1]` relative to
/// the point where it starts.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// Straight displacement.
    Linear { dz: Vec<Complex64>, dgamma: Vec<Vec<Complex64>> },
    /// Half-turn exchange of `z_i` and `z_{i+1}` about their midpoint.
    Exchange { i: usize, clockwise: bool },
    /// `γ_i^(r_i) ↦ γ_i^(r_i) e^{2πi · turns · θ}`.
    Twist { i: usize, turns: f64 },
}

impl Segment {
    fn reversed(&self) -> Self {
        match self {
            Segment::Linear { dz, dgamma } => Segment::Linear {
                dz: dz.iter().map(|x| -x).collect(),
                dgamma: dgamma.iter().map(|g| g.iter().map(|x| -x).collect()).collect(),
            },
            Segment::Exchange { i, clockwise } => Segment::Exchange {
                i: *i,
                clockwise: !clockwise,
            },
            Segment::Twist { i, turns } => Segment::Twist { i: *i, turns: -turns },
        }
    }

    /// Point and coordinate tangent at `θ`, starting from `start`.
    pub fn evaluate(&self, start: &BasePoint<Complex64>, theta: f64) -> (BasePoint<Complex64>, Tangent) {
        let mut p = start.clone();
        let mut t = Tangent::zero(&start.ranks);
        match self {
            Segment::Linear { dz, dgamma } => {
                t.dz = dz.clone();
                t.dgamma = dgamma.clone();
                p = start.shifted(&t, theta);
            }
            Segment::Exchange { i, clockwise } => {
                let (i, j) = (*i, *i + 1);
                let centre = (start.z[i] + start.z[j]) / 2.0;
                let v = start.z[i] - centre;
                let sign = if *clockwise { -1.0 } else { 1.0 };
                let rot = Complex64::from_polar(1.0, sign * PI * theta);
                let drot = rot * Complex64::new(0.0, sign * PI);
                p.z[i] = centre + v * rot;
                p.z[j] = centre - v * rot;
                t.dz[i] = v * drot;
                t.dz[j] = -v * drot;
            }
            Segment::Twist { i, turns } => {
                let r = start.ranks[*i];
                let w = Complex64::new(0.0, 2.0 * PI * turns);
                let g = start.gamma[*i][r - 1] * (w * theta).exp();
                p.gamma[*i][r - 1] = g;
                t.dgamma[*i][r - 1] = g * w;
            }
        }
        (p, t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasePath {
    pub segments: Vec<Segment>,
}

impl BasePath {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn then(mut self, other: &BasePath) -> Self {
        self.segments.extend(other.segments.iter().cloned());
        self
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
        }
    }

    pub fn end_point(&self, start: &BasePoint<Complex64>) -> BasePoint<Complex64> {
        self.segments
            .iter()
            .fold(start.clone(), |p, s| s.evaluate(&p, 1.0).0)
    }
}

/// Distance from the discriminant: smallest `|z_i - z_j|` or `|γ_i^(r_i)|`.
pub fn discriminant_distance(p: &BasePoint<Complex64>) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..p.z.len() {
        for j in i + 1..p.z.len() {
            d = d.min((p.z[i] - p.z[j]).norm());
        }
    }
    for g in &p.gamma {
        if let Some(top) = g.last() {
            d = d.min(top.norm());
        }
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransportOptions {
    /// Local error tolerance per accepted step.
    pub tol: f64,
    /// Smallest admissible distance from the discriminant.
    pub margin: f64,
    pub convention: GammaZero,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            margin: 1e-3,
            convention: GammaZero::Weight,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_local_error: f64,
}

impl IntegratorStats {
    fn absorb(&mut self, other: IntegratorStats) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.max_local_error = self.max_local_error.max(other.max_local_error);
    }
}

/// Evaluates `A` along a tangent, reusing generator matrices while only `z` moves.
struct Evaluator {
    m: u32,
    convention: GammaZero,
    cached: Option<KzOperators<Complex64>>,
}

impl Evaluator {
    fn new(m: u32, convention: GammaZero) -> Self {
        Self {
            m,
            convention,
            cached: None,
        }
    }

    fn operators(&mut self, point: &BasePoint<Complex64>) -> Result<&KzOperators<Complex64>, KzError> {
        let reuse = matches!(&self.cached, Some(ops) if ops.point().gamma == point.gamma && ops.point().lambda == point.lambda);
        if reuse {
            self.cached.as_mut().expect("checked").set_z(point.z.clone())?;
        } else {
            self.cached = Some(KzOperators::new(point.clone(), self.m)?);
        }
        Ok(self.cached.as_ref().expect("just set"))
    }

    fn along(&mut self, point: &BasePoint<Complex64>, tangent: &Tangent) -> Result<DMatrix<Complex64>, KzError> {
        let frame = tangent_in_frame(point, tangent)?;
        let convention = self.convention;
        let ops = self.operators(point)?;
        let dim = ops.space().dim();
        let mut a = DMatrix::zeros(dim, dim);
        for (i, &dz) in tangent.dz.iter().enumerate() {
            if !dz.is_zero() {
                a += ops.connection(Direction::Z(i), convention)?.to_nalgebra() * dz;
            }
        }
        for (i, coeffs) in frame.iter().enumerate() {
            for (s, &c) in coeffs.iter().enumerate() {
                if !c.is_zero() {
                    a += ops.connection(Direction::D(i, s), convention)?.to_nalgebra() * c;
                }
            }
        }
        Ok(a)
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn tangent_speed(t: &Tangent) -> f64 {
    t.dz.iter()
        .chain(t.dgamma.iter().flatten())
        .map(|x| x.norm())
        .fold(0.0, f64::max)
}

/// Transport along one segment; returns `Ψ` with `Ψ(0) = I`.
fn transport_segment(
    segment: &Segment,
    start: &BasePoint<Complex64>,
    eval: &mut Evaluator,
    dim: usize,
    opts: &TransportOptions,
) -> Result<(DMatrix<Complex64>, IntegratorStats), MonodromyError> {
    let mut rhs = |theta: f64, psi: &DMatrix<Complex64>| -> Result<(DMatrix<Complex64>, f64, f64), MonodromyError> {
        let (p, t) = segment.evaluate(start, theta);
        let distance = discriminant_distance(&p);
        if distance < opts.margin {
            return Err(MonodromyError::Discriminant { theta, distance });
        }
        let a = eval.along(&p, &t)?;
        Ok((-(a * psi), distance, tangent_speed(&t)))
    };
    let mut psi = DMatrix::<Complex64>::identity(dim, dim);
    let mut stats = IntegratorStats::default();
    let mut theta = 0.0;
    let mut h: f64 = 1e-2;
    let (mut k1, mut dist, mut speed) = rhs(0.0, &psi)?;
    if speed == 0.0 {
        return Ok((psi, stats));
    }
    while theta < 1.0 {
        let cap = (0.25 * dist / speed).min(0.1);
        h = h.min(cap).min(1.0 - theta);
        if h < 1e-14 {
            return Err(MonodromyError::StepUnderflow { theta, step: h });
        }
        let mut k = vec![k1.clone()];
        for stage in 1..7 {
            let mut y = psi.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[stage][j] != 0.0 {
                    y += kj * Complex64::new(h * A[stage][j], 0.0);
                }
            }
            k.push(rhs(theta + C[stage] * h, &y)?.0);
        }
        let mut next = psi.clone();
        let mut err = DMatrix::<Complex64>::zeros(dim, dim);
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                next += kj * Complex64::new(h * B5[j], 0.0);
            }
            err += kj * Complex64::new(h * (B5[j] - B4[j]), 0.0);
        }
        let scaled = err
            .iter()
            .zip(next.iter())
            .map(|(e, y)| e.norm() / (opts.tol * (1.0 + y.norm())))
            .fold(0.0, f64::max);
        if scaled <= 1.0 {
            theta += h;
            psi = next;
            stats.steps += 1;
            stats.max_local_error = stats.max_local_error.max(scaled * opts.tol);
            // first-same-as-last: the last stage is the derivative at the new point
            k1 = k.pop().expect("seven stages");
            let (p, t) = segment.evaluate(start, theta.min(1.0));
            dist = discriminant_distance(&p);
            speed = tangent_speed(&t).max(f64::MIN_POSITIVE);
        } else {
            stats.rejected += 1;
        }
        let factor = if scaled == 0.0 { 5.0 } else { (0.9 * scaled.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok((psi, stats))
}

/// Which space a transport matrix acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Restrict {
    Full,
    Singular,
}

#[derive(Clone, Debug)]
pub struct Transport {
    pub matrix: DMatrix<Complex64>,
    pub end: BasePoint<Complex64>,
    pub stats: IntegratorStats,
    /// `|det Ψ - exp(-∫ tr A)| / |det Ψ|` on the full weight space.
    pub liouville_defect: f64,
    /// Distance of the transported singular basis from the singular subspace
    /// at the start point; zero for full transport.
    pub invariance_residual: f64,
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn integrated_trace(segment: &Segment, start: &BasePoint<Complex64>, eval: &mut Evaluator) -> Result<Complex64, MonodromyError> {
    let pieces = 64;
    let mut total = Complex64::zero();
    for k in 0..pieces {
        let (a, b) = (k as f64 / pieces as f64, (k + 1) as f64 / pieces as f64);
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let theta = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let (p, t) = segment.evaluate(start, theta);
            total += eval.along(&p, &t)?.trace() * (0.5 * (b - a) * w);
        }
    }
    Ok(total)
}

/// Transport along `path` from `start` on the weight space `W_m`, optionally
/// compressed to the singular vectors through the singular basis at `start`.
pub fn transport(
    path: &BasePath,
    start: &BasePoint<Complex64>,
    m: u32,
    restrict: Restrict,
    opts: &TransportOptions,
) -> Result<Transport, MonodromyError> {
    start.validate()?;
    if discriminant_distance(start) < opts.margin {
        return Err(MonodromyError::Discriminant {
            theta: 0.0,
            distance: discriminant_distance(start),
        });
    }
    let dim = WeightSpace::new(start.ranks.clone(), m).dim();
    let mut eval = Evaluator::new(m, opts.convention);
    let mut psi = DMatrix::<Complex64>::identity(dim, dim);
    let mut stats = IntegratorStats::default();
    let mut point = start.clone();
    let mut trace = Complex64::zero();
    for segment in &path.segments {
        let (step, s) = transport_segment(segment, &point, &mut eval, dim, opts)?;
        trace += integrated_trace(segment, &point, &mut eval)?;
        psi = step * psi;
        stats.absorb(s);
        point = segment.evaluate(&point, 1.0).0;
    }
    let det = psi.determinant();
    let liouville_defect = (det - (-trace).exp()).norm() / det.norm().max(f64::MIN_POSITIVE);
    let mut out = Transport {
        matrix: psi,
        end: point,
        stats,
        liouville_defect,
        invariance_residual: 0.0,
    };
    if restrict == Restrict::Singular {
        let basis = singular_basis_at(start, m)?;
        let (compressed, residual) = compress(&basis, &out.matrix);
        out.matrix = compressed;
        out.invariance_residual = residual;
    }
    Ok(out)
}

/// Deterministic singular basis at a point, one column per vector.
pub fn singular_basis_at(point: &BasePoint<Complex64>, m: u32) -> Result<DMatrix<Complex64>, MonodromyError> {
    let module = point.module()?;
    let space = WeightSpace::new(point.ranks.clone(), m);
    Ok(module.singular_lift_matrix(&space, 1e-300).map_err(KzError::from)?.to_nalgebra())
}

/// `B⁺ M B` and the relative distance of `M B` from the span of `B`.
fn compress(basis: &DMatrix<Complex64>, full: &DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
    let image = full * basis;
    let pinv = basis
        .clone()
        .pseudo_inverse(1e-13)
        .expect("pseudo-inverse with nonnegative epsilon");
    let compressed = &pinv * &image;
    let residual = spectral_norm(&(basis * &compressed - &image)) / spectral_norm(&image).max(1.0);
    (compressed, residual)
}

/// Uniform data of the monodromy representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromySetup {
    pub n: usize,
    pub r: usize,
    pub m: u32,
    pub lambda: Complex64,
    pub kappa: f64,
}

impl MonodromySetup {
    /// `z_k = k`, `γ_i = (0, .., 0, 1)`.
    pub fn basepoint(&self) -> Result<BasePoint<Complex64>, MonodromyError> {
        if self.n == 0 || self.r == 0 {
            return Err(MonodromyError::Shape("need n ≥ 1 and r ≥ 1".into()));
        }
        let mut g = vec![Complex64::zero(); self.r];
        g[self.r - 1] = Complex64::new(1.0, 0.0);
        Ok(BasePoint {
            ranks: vec![self.r; self.n],
            z: (1..=self.n).map(|k| Complex64::new(k as f64, 0.0)).collect(),
            gamma: vec![g; self.n],
            lambda: vec![self.lambda; self.n],
            kappa: Complex64::new(self.kappa, 0.0),
        })
    }

    pub fn generators(&self) -> Vec<Generator> {
        let mut g: Vec<Generator> = (1..self.n).map(Generator::Sigma).collect();
        g.extend((1..=self.n).map(Generator::Tau));
        g
    }
}

/// Loop representing a generator (1-based index) at the basepoint.
pub fn generator_path(g: Generator) -> BasePath {
    match g {
        Generator::Sigma(i) => BasePath::new(vec![Segment::Exchange { i: i - 1, clockwise: true }]),
        Generator::Tau(i) => BasePath::new(vec![Segment::Twist { i: i - 1, turns: 1.0 }]),
    }
}

pub fn generator_label(g: Generator) -> String {
    match g {
        Generator::Sigma(i) => format!("s{i}"),
        Generator::Tau(i) => format!("t{i}"),
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorMonodromy {
    pub generator: Generator,
    /// Full weight-space matrix, flip included.
    pub full: DMatrix<Complex64>,
    /// Compressed to the singular basis.
    pub restricted: DMatrix<Complex64>,
    pub stats: IntegratorStats,
    pub liouville_defect: f64,
    pub invariance_residual: f64,
}

/// Monodromy of one generator loop at the basepoint.
pub fn generator_monodromy(
    setup: &MonodromySetup,
    g: Generator,
    opts: &TransportOptions,
) -> Result<GeneratorMonodromy, MonodromyError> {
    let base = setup.basepoint()?;
    if g.index() == 0 || g.index() > setup.n || matches!(g, Generator::Sigma(i) if i >= setup.n) {
        return Err(MonodromyError::Shape(format!("generator {} out of range for n = {}", generator_label(g), setup.n)));
    }
    let t = transport(&generator_path(g), &base, setup.m, Restrict::Full, opts)?;
    let full = match g {
        Generator::Sigma(i) => {
            let space = WeightSpace::new(base.ranks.clone(), setup.m);
            space.swap_matrix::<Complex64>(i - 1).to_nalgebra() * t.matrix
        }
        Generator::Tau(_) => t.matrix,
    };
    let basis = singular_basis_at(&base, setup.m)?;
    let (restricted, invariance_residual) = compress(&basis, &full);
    Ok(GeneratorMonodromy {
        generator: g,
        full,
        restricted,
        stats: t.stats,
        liouville_defect: t.liouville_defect,
        invariance_residual,
    })
}

/// Matrix of a word from per-generator matrices, `generators[k]` being the
/// matrix of `gens[k]`.
pub fn word_matrix(
    word: &FramedBraidWord,
    gens: &[Generator],
    matrices: &[DMatrix<Complex64>],
) -> Result<DMatrix<Complex64>, MonodromyError> {
    let dim = matrices.first().map_or(0, |m| m.nrows());
    let mut out = DMatrix::<Complex64>::identity(dim, dim);
    for letter in word.letters() {
        let k = gens
            .iter()
            .position(|&g| g == letter.generator)
            .ok_or_else(|| MonodromyError::Shape(format!("no matrix for {}", generator_label(letter.generator))))?;
        let m = if letter.exponent > 0 {
            matrices[k].clone()
        } else {
            matrices[k]
                .clone()
                .try_inverse()
                .ok_or_else(|| MonodromyError::Shape(format!("matrix of {} is singular", generator_label(gens[k]))))?
        };
        for _ in 0..letter.exponent.unsigned_abs() {
            out *= &m;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationResidual {
    pub relation: String,
    /// `‖L - R‖₂ / max(1, ‖L‖₂)`.
    pub defect: f64,
}

/// Defect of every defining relation of the `n`-strand group.
pub fn relation_residuals(
    n: usize,
    gens: &[Generator],
    matrices: &[DMatrix<Complex64>],
) -> Result<Vec<RelationResidual>, MonodromyError> {
    if matrices.iter().any(|m| m.nrows() != matrices[0].nrows() || !m.is_square()) {
        return Err(MonodromyError::Shape("generator matrices differ in size".into()));
    }
    defining_relations(n)
        .into_iter()
        .map(|rel| {
            let l = word_matrix(&rel.lhs, gens, matrices)?;
            let r = word_matrix(&rel.rhs, gens, matrices)?;
            Ok(RelationResidual {
                relation: rel.name,
                defect: spectral_norm(&(&l - &r)) / spectral_norm(&l).max(1.0),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorEntry {
    pub generator: String,
    pub matrix: ComplexMatrixJson,
    pub invariance_residual: f64,
    pub liouville_defect: f64,
    pub condition_number: f64,
    pub stats: IntegratorStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyResult {
    pub setup: MonodromySetup,
    pub convention: GammaZero,
    pub full_dim: usize,
    pub dim: usize,
    pub basis: ComplexMatrixJson,
    pub generators: Vec<GeneratorEntry>,
    pub residuals: Vec<RelationResidual>,
    pub max_relation_defect: f64,
    pub stats: IntegratorStats,
}

fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Restricted monodromies of every generator, computed in parallel, with the
/// relation defects.
pub fn monodromy_representation(setup: &MonodromySetup, opts: &TransportOptions) -> Result<(Vec<GeneratorMonodromy>, MonodromyResult), MonodromyError> {
    let gens = setup.generators();
    let mons: Vec<GeneratorMonodromy> = par::map(&gens, |&g| generator_monodromy(setup, g, opts))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let restricted: Vec<DMatrix<Complex64>> = mons.iter().map(|m| m.restricted.clone()).collect();
    let residuals = relation_residuals(setup.n, &gens, &restricted)?;
    let base = setup.basepoint()?;
    let basis = singular_basis_at(&base, setup.m)?;
    let mut stats = IntegratorStats::default();
    for m in &mons {
        stats.absorb(m.stats);
    }
    let result = MonodromyResult {
        setup: setup.clone(),
        convention: opts.convention,
        full_dim: basis.nrows(),
        dim: basis.ncols(),
        basis: ComplexMatrixJson::from(&basis),
        generators: mons
            .iter()
            .map(|m| GeneratorEntry {
                generator: generator_label(m.generator),
                matrix: ComplexMatrixJson::from(&m.restricted),
                invariance_residual: m.invariance_residual,
                liouville_defect: m.liouville_defect,
                condition_number: condition_number(&m.restricted),
                stats: m.stats,
            })
            .collect(),
        max_relation_defect: residuals.iter().map(|r| r.defect).fold(0.0, f64::max),
        residuals,
        stats,
    };
    Ok((mons, result))
}

/// Coefficients `c_0 .. c_d` of `det(x I - M) = Σ c_k x^k` by Faddeev-LeVerrier.
pub fn characteristic_polynomial(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let d = m.nrows();
    let mut coeffs = vec![Complex64::zero(); d + 1];
    coeffs[d] = Complex64::new(1.0, 0.0);
    let mut aux = DMatrix::<Complex64>::zeros(d, d);
    for k in 1..=d {
        aux = m * &aux + DMatrix::identity(d, d) * coeffs[d + 1 - k];
        let c = -(m * &aux).trace() / k as f64;
        coeffs[d - k] = c;
    }
    coeffs
}

pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    if m.is_empty() {
        return Vec::new();
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|k| t[(k, k)]).collect()
}

/// Smallest total distance `Σ |a_k - b_π(k)|` over all matchings; brute force.
pub fn assignment_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() || a.len() > 9 {
        return None;
    }
    fn rec(a: &[Complex64], b: &[Complex64], used: &mut Vec<bool>, k: usize, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if k == a.len() {
            *best = acc;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                rec(a, b, used, k + 1, acc + (a[k] - b[j]).norm(), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    Some(if a.is_empty() { 0.0 } else { best })
}

fn complex_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Unit scalar `c` minimising the matching distance between `c·a` and `b`,
/// searched over the ratios that align one pair exactly.
pub fn projective_distance(a: &[Complex64], b: &[Complex64]) -> Option<(f64, Complex64)> {
    let mut best: Option<(f64, Complex64)> = assignment_distance(a, b).map(|d| (d, Complex64::new(1.0, 0.0)));
    for x in a {
        for y in b {
            if x.norm() == 0.0 || y.norm() == 0.0 {
                continue;
            }
            let ratio = y / x;
            let c = ratio / ratio.norm();
            let scaled: Vec<Complex64> = a.iter().map(|v| v * c).collect();
            if let Some(d) = assignment_distance(&scaled, b) {
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, c));
                }
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralComparison {
    pub generator: String,
    pub monodromy_charpoly: Vec<[f64; 2]>,
    pub homological_charpoly: Vec<[f64; 2]>,
    pub monodromy_eigenvalues: Vec<[f64; 2]>,
    pub homological_eigenvalues: Vec<[f64; 2]>,
    pub eigenvalue_distance: f64,
    pub charpoly_distance: f64,
    /// Distance after rescaling the monodromy side by the best unit scalar.
    pub projective_distance: f64,
    pub best_scalar: [f64; 2],
    /// `arg(best_scalar) · κ / 2π`.
    pub best_scalar_exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrientationTable {
    /// Loop directions: `sigma_cw` is the constructed exchange, `sigma_ccw`
    /// its reverse; `tau_ccw` is the constructed twist, `tau_cw` its reverse.
    pub orientation: String,
    pub comparisons: Vec<SpectralComparison>,
    pub max_eigenvalue_distance: f64,
    pub max_projective_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub r: usize,
    pub m: u32,
    pub lambda: [f64; 2],
    pub kappa: f64,
    pub q: [f64; 2],
    pub dimension: usize,
    pub max_relation_defect: f64,
    pub orientations: Vec<OrientationTable>,
}

impl ConjectureReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "n={} r={} m={} lambda={:+.6}{:+.6}i kappa={} q={:+.6}{:+.6}i dim={} relation defect {:.2e}\n",
            self.n,
            self.r,
            self.m,
            self.lambda[0],
            self.lambda[1],
            self.kappa,
            self.q[0],
            self.q[1],
            self.dimension,
            self.max_relation_defect
        );
        for o in &self.orientations {
            s.push_str(&format!(
                "  {}: max eigenvalue distance {:.3e}, up to scalars {:.3e}\n",
                o.orientation, o.max_eigenvalue_distance, o.max_projective_distance
            ));
            for c in &o.comparisons {
                s.push_str(&format!(
                    "    {:>4}  eigenvalues {:.3e}  charpoly {:.3e}  up to scalar {:.3e} (exponent {:+.6})\n",
                    c.generator, c.eigenvalue_distance, c.charpoly_distance, c.projective_distance, c.best_scalar_exponent
                ));
            }
        }
        s
    }
}

fn compare(label: String, mm: &DMatrix<Complex64>, hom: &DMatrix<Complex64>, kappa: f64) -> SpectralComparison {
    let (ev_m, ev_h) = (eigenvalues(mm), eigenvalues(hom));
    let (cp_m, cp_h) = (characteristic_polynomial(mm), characteristic_polynomial(hom));
    let charpoly_distance = cp_m.iter().zip(&cp_h).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let (projective, scalar) = projective_distance(&ev_m, &ev_h).unwrap_or((f64::NAN, Complex64::new(f64::NAN, 0.0)));
    SpectralComparison {
        generator: label,
        eigenvalue_distance: assignment_distance(&ev_m, &ev_h).unwrap_or(f64::NAN),
        charpoly_distance,
        projective_distance: projective,
        best_scalar: [scalar.re, scalar.im],
        best_scalar_exponent: scalar.arg() * kappa / (2.0 * PI),
        monodromy_charpoly: complex_pairs(&cp_m),
        homological_charpoly: complex_pairs(&cp_h),
        monodromy_eigenvalues: complex_pairs(&ev_m),
        homological_eigenvalues: complex_pairs(&ev_h),
    }
}

/// Spectral comparison of the weight-one monodromy representation with the
/// reduced framed Burau representation at `q = e^{2πiλ/κ}`, under all four
/// choices of loop direction for the exchanges and the twists. Only equal
/// dimensions are enforced; agreement is reported.
pub fn conjecture_report(n: usize, r: usize, lambda: Complex64, kappa: f64, opts: &TransportOptions) -> Result<ConjectureReport, MonodromyError> {
    let setup = MonodromySetup { n, r, m: 1, lambda, kappa };
    let (mons, result) = monodromy_representation(&setup, opts)?;
    let q = (Complex64::new(0.0, 2.0 * PI) * lambda / kappa).exp();
    let gens = setup.generators();
    let mut homological = Vec::with_capacity(gens.len());
    for &g in &gens {
        let w = FramedBraidWord::single(n, g, 1).map_err(BurauError::from)?;
        let rep = reduced_burau_matrix(n, r, &w)?;
        homological.push(rep.specialize(q).map_err(BurauError::from)?);
    }
    let hdim = homological.first().map_or(0, |m| m.nrows());
    if hdim != result.dim {
        return Err(MonodromyError::Dimension {
            monodromy: result.dim,
            homological: hdim,
        });
    }
    let mut inverses = Vec::with_capacity(mons.len());
    for mon in &mons {
        inverses.push(
            mon.restricted
                .clone()
                .try_inverse()
                .ok_or_else(|| MonodromyError::Shape("singular monodromy matrix".into()))?,
        );
    }
    let mut orientations = Vec::new();
    for (sigma_reversed, tau_reversed) in [(false, false), (false, true), (true, false), (true, true)] {
        let label = format!(
            "sigma_{}_tau_{}",
            if sigma_reversed { "ccw" } else { "cw" },
            if tau_reversed { "cw" } else { "ccw" }
        );
        let comparisons: Vec<SpectralComparison> = mons
            .iter()
            .zip(&inverses)
            .zip(&homological)
            .map(|((mon, inv), hom)| {
                let reversed = match mon.generator {
                    Generator::Sigma(_) => sigma_reversed,
                    Generator::Tau(_) => tau_reversed,
                };
                compare(generator_label(mon.generator), if reversed { inv } else { &mon.restricted }, hom, kappa)
            })
            .collect();
        orientations.push(OrientationTable {
            orientation: label,
            max_eigenvalue_distance: comparisons.iter().map(|c| c.eigenvalue_distance).fold(0.0, f64::max),
            max_projective_distance: comparisons.iter().map(|c| c.projective_distance).fold(0.0, f64::max),
            comparisons,
        });
    }
    Ok(ConjectureReport {
        n,
        r,
        m: 1,
        lambda: [lambda.re, lambda.im],
        kappa,
        q: [q.re, q.im],
        dimension: hdim,
        max_relation_defect: result.max_relation_defect,
        orientations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burau::full_burau_matrix;
    use crate::kz::random_point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eye_defect(m: &DMatrix<Complex64>) -> f64 {
        spectral_norm(&(m - DMatrix::identity(m.nrows(), m.ncols())))
    }

    #[test]
    fn constant_path_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_point(&mut rng, &[1, 1], 2.0);
        let path = BasePath::new(vec![Segment::Linear {
            dz: vec![c(0.0, 0.0); 2],
            dgamma: vec![vec![c(0.0, 0.0)]; 2],
        }]);
        let t = transport(&path, &p, 1, Restrict::Full, &TransportOptions::default()).unwrap();
        assert_eq!(eye_defect(&t.matrix), 0.0);
    }

    #[test]
    fn round_trip_and_square_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_point(&mut rng, &[2, 1], 3.5);
        let opts = TransportOptions::default();
        let path = BasePath::new(vec![
            Segment::Linear {
                dz: vec![c(0.2, 0.1), c(-0.1, 0.0)],
                dgamma: vec![vec![c(0.1, 0.0), c(0.0, 0.1)], vec![c(0.05, 0.0)]],
            },
            Segment::Twist { i: 1, turns: 0.3 },
        ]);
        let there = transport(&path, &p, 1, Restrict::Full, &opts).unwrap();
        let back = transport(&path.reversed(), &there.end, 1, Restrict::Full, &opts).unwrap();
        assert!(eye_defect(&(back.matrix * there.matrix)) < 1e-8);

        let side = |dz0: Complex64, dg: Complex64| Segment::Linear {
            dz: vec![dz0, c(0.0, 0.0)],
            dgamma: vec![vec![c(0.0, 0.0), dg], vec![c(0.0, 0.0)]],
        };
        let h = 0.2;
        let square = BasePath::new(vec![
            side(c(h, 0.0), c(0.0, 0.0)),
            side(c(0.0, 0.0), c(0.0, h)),
            side(c(-h, 0.0), c(0.0, 0.0)),
            side(c(0.0, 0.0), c(0.0, -h)),
        ]);
        let t = transport(&square, &p, 2, Restrict::Full, &opts).unwrap();
        assert!(eye_defect(&t.matrix) < 1e-7, "{}", eye_defect(&t.matrix));
        assert!(t.liouville_defect < 1e-6);
    }

    #[test]
    fn single_factor_twist_is_explicit() {
        // n = 1, r = 1, m = 0: a scalar ODE with constant coefficient
        let setup = MonodromySetup {
            n: 1,
            r: 1,
            m: 0,
            lambda: c(0.3, 0.0),
            kappa: 2.5,
        };
        for convention in GammaZero::ALL {
            let opts = TransportOptions {
                convention,
                ..Default::default()
            };
            let g = generator_monodromy(&setup, Generator::Tau(1), &opts).unwrap();
            let l = setup.lambda;
            let shift = match convention {
                GammaZero::Weight => c(0.0, 0.0),
                GammaZero::Vanishing => l / 2.0 + l * l / 4.0,
            };
            let expect = (c(0.0, 2.0 * PI) * shift / setup.kappa).exp();
            assert!((g.full[(0, 0)] - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn weight_one_twist_for_one_strand_matches_q_inverse() {
        let setup = MonodromySetup {
            n: 1,
            r: 1,
            m: 1,
            lambda: c(0.37, 0.0),
            kappa: 3.5,
        };
        let g = generator_monodromy(&setup, Generator::Tau(1), &TransportOptions::default()).unwrap();
        let q = (c(0.0, 2.0 * PI) * setup.lambda / setup.kappa).exp();
        assert_eq!(g.restricted.nrows(), 1);
        assert!((g.restricted[(0, 0)] - q.inv()).norm() < 1e-8);
        assert!(g.invariance_residual < 1e-9);
    }

    #[test]
    fn two_strand_relations_hold() {
        let setup = MonodromySetup {
            n: 2,
            r: 1,
            m: 1,
            lambda: c(1.0 / 3.0, 0.0),
            kappa: 3.5,
        };
        let (mons, result) = monodromy_representation(&setup, &TransportOptions::default()).unwrap();
        assert_eq!(result.dim, 3);
        assert!(result.max_relation_defect < 1e-5, "{:?}", result.residuals);
        for m in &mons {
            assert!(m.invariance_residual < 1e-8);
            assert!(m.liouville_defect < 1e-6);
        }
        let t1 = &mons[1].restricted;
        let t2 = &mons[2].restricted;
        assert!(spectral_norm(&(t1 * t2 - t2 * t1)) < 1e-6);
    }

    #[test]
    fn residuals_of_exact_matrices() {
        let n = 3;
        let q = c(0.3, 0.8);
        let gens: Vec<Generator> = (1..n).map(Generator::Sigma).chain((1..=n).map(Generator::Tau)).collect();
        let mats: Vec<DMatrix<Complex64>> = gens
            .iter()
            .map(|&g| {
                let w = FramedBraidWord::single(n, g, 1).unwrap();
                full_burau_matrix(n, 2, &w).unwrap().specialize(q).unwrap()
            })
            .collect();
        let worst = relation_residuals(n, &gens, &mats).unwrap().iter().map(|r| r.defect).fold(0.0, f64::max);
        assert!(worst < 1e-12);
        let mut bumped = mats.clone();
        bumped[0][(0, 0)] += 1e-3;
        let worst = relation_residuals(n, &gens, &bumped).unwrap().iter().map(|r| r.defect).fold(0.0, f64::max);
        assert!(worst >= 1e-4);
    }

    #[test]
    fn spectral_helpers() {
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let cp = characteristic_polynomial(&m);
        assert!((cp[0] - c(6.0, 0.0)).norm() < 1e-12);
        assert!((cp[1] - c(-5.0, 0.0)).norm() < 1e-12);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(2.0, 0.0)).norm() < 1e-12 && (ev[1] - c(3.0, 0.0)).norm() < 1e-12);
        let d = assignment_distance(&[c(1.0, 0.0), c(5.0, 0.0)], &[c(5.1, 0.0), c(0.9, 0.0)]).unwrap();
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn conjecture_dimensions_agree() {
        for (n, r) in [(1, 1), (2, 1), (1, 2)] {
            let rep = conjecture_report(n, r, c(0.41, 0.0), 3.5, &TransportOptions::default()).unwrap();
            assert_eq!(rep.dimension, r * n + n - 1);
            assert_eq!(rep.orientations.len(), 4);
        }
    }
}
