//! Projective frames, the frame solver, special affine fits, reconstruction of
//! fibration preserving flag maps as projective maps, and escape flags for
//! lower unipotent matrices.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::flag::{e, Flag, GrassmannPoint, ProjElement};
use crate::gradedaut::GradedMap;
use crate::matrix::rat::{self, RatMatrix};
use crate::matrix::Matrix;
use crate::nilpotent::{FieldAut, GroupElement, LieElement};
use crate::random;
use crate::scalar::{rat, Field, Rational, Scalar};

/// n+1 lines in F^n, any n of which span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectiveFrame {
    n: usize,
    field: Field,
    points: Vec<GrassmannPoint>,
}

/// Whether the n+1 lines form a projective frame.
pub fn is_frame(points: &[GrassmannPoint]) -> Result<bool> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("no points".into()));
    };
    let (n, field) = (first.n(), first.field());
    if points.len() != n + 1 {
        return Err(Error::InvalidInput(format!("a frame in F^{n} needs {} points, got {}", n + 1, points.len())));
    }
    if points.iter().any(|p| p.n() != n || p.field() != field || p.dim() != 1) {
        return Err(Error::InvalidInput("frame points must be lines in the same space".into()));
    }
    Ok((0..=n).all(|skip| {
        let cols: Vec<Vec<Scalar>> =
            points.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p.vector()).collect();
        Matrix::from_cols(field, n, &cols).rank() == n
    }))
}

impl ProjectiveFrame {
    pub fn new(points: Vec<GrassmannPoint>) -> Result<Self> {
        if !is_frame(&points)? {
            return Err(Error::NotAFrame("some n of the points fail to span".into()));
        }
        Ok(ProjectiveFrame { n: points[0].n(), field: points[0].field(), points })
    }

    /// Frame from spanning vectors, index 0 first.
    pub fn from_vectors(field: Field, vectors: &[Vec<Scalar>]) -> Result<Self> {
        let pts = vectors.iter().map(|v| GrassmannPoint::line(field, v)).collect::<Result<Vec<_>>>()?;
        Self::new(pts)
    }

    /// W^0 = span(e_1 + … + e_n), W^i = span(e_i).
    pub fn standard(n: usize, field: Field) -> Self {
        let mut v = vec![vec![Scalar::one(field); n]];
        v.extend((1..=n).map(|i| e(field, n, i)));
        Self::from_vectors(field, &v).expect("standard frame")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn points(&self) -> &[GrassmannPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &GrassmannPoint {
        &self.points[i]
    }

    pub fn act(&self, g: &Matrix) -> Result<ProjectiveFrame> {
        Self::new(self.points.iter().map(|p| p.act(g)).collect::<Result<Vec<_>>>()?)
    }

    /// The matrix [a_1 c_1, …, a_n c_n] sending the standard frame to this one.
    fn from_standard(&self) -> Result<Matrix> {
        let cols: Vec<Vec<Scalar>> = self.points[1..].iter().map(|p| p.vector()).collect();
        let m = Matrix::from_cols(self.field, self.n, &cols);
        let c = m.solve(&self.points[0].vector())?;
        let scaled: Vec<Vec<Scalar>> =
            cols.iter().zip(&c).map(|(col, ci)| col.iter().map(|x| x * ci).collect()).collect();
        Ok(Matrix::from_cols(self.field, self.n, &scaled))
    }
}

/// A frame together with W^{n+1} = span(W^n, W^0) ∩ span(W^1, …, W^{n-1}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedFrame {
    pub frame: ProjectiveFrame,
    pub extra: GrassmannPoint,
}

pub fn augment(frame: &ProjectiveFrame) -> Result<AugmentedFrame> {
    let n = frame.n;
    let a = frame.points[n].join(&frame.points[0])?;
    let mut b = frame.points[1].clone();
    for p in &frame.points[2..n] {
        b = b.join(p)?;
    }
    let extra = a.meet(&b).ok_or_else(|| Error::NotAFrame("augmenting intersection is trivial".into()))?;
    if extra.dim() != 1 {
        return Err(Error::NotAFrame("augmenting intersection is not a line".into()));
    }
    Ok(AugmentedFrame { frame: frame.clone(), extra })
}

pub fn standard_frame(n: usize, field: Field) -> ProjectiveFrame {
    ProjectiveFrame::standard(n, field)
}

pub fn standard_augmented_frame(n: usize, field: Field) -> AugmentedFrame {
    augment(&ProjectiveFrame::standard(n, field)).expect("standard frame augments")
}

/// A g with g·A^i = B^i for every i. Over ℍ the stabilizer of a frame is
/// the real-nontrivial group of scalars a·I; the representative returned is
/// the one fixing the right scalar of point 0 to 1 on both sides.
pub fn solve_frame_map(a: &ProjectiveFrame, b: &ProjectiveFrame) -> Result<ProjElement> {
    if a.n != b.n || a.field != b.field {
        return Err(Error::DimensionMismatch("frames live in different spaces".into()));
    }
    let ga = a.from_standard()?;
    let gb = b.from_standard()?;
    let g = ProjElement::new(&gb.mul(&ga.inverse()?))?;
    for (pa, pb) in a.points.iter().zip(&b.points) {
        if &g.act_line(pa)? != pb {
            return Err(Error::InternalConsistency("frame solution misses a point".into()));
        }
    }
    Ok(g)
}

/// φ(x) = (a·h(x_1) + b_1, …, a·h(x_m) + b_m); h = None is the zero map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineFit {
    pub a: Scalar,
    pub h: Option<FieldAut>,
    pub offsets: Vec<Scalar>,
}

impl AffineFit {
    pub fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        x.iter()
            .zip(&self.offsets)
            .map(|(xi, bi)| match &self.h {
                Some(h) => &(&self.a * &h.apply(xi)) + bi,
                None => bi.clone(),
            })
            .collect()
    }
}

/// Fit φ(x) = (m(x_1) + b_1, …, m(x_m) + b_m) with m real linear to exact
/// samples, then split m = a·h with h a field automorphism.
pub fn special_affine_fit(field: Field, samples: &[(Vec<Scalar>, Vec<Scalar>)]) -> Result<AffineFit> {
    let Some((x0, _)) = samples.first() else {
        return Err(Error::InsufficientSamples("no samples".into()));
    };
    let m = x0.len();
    if m == 0 {
        return Err(Error::InvalidInput("points must have positive dimension".into()));
    }
    if samples.len() < m + 2 {
        return Err(Error::InsufficientSamples(format!("need at least {} samples, got {}", m + 2, samples.len())));
    }
    if samples.iter().any(|(x, y)| x.len() != m || y.len() != m) {
        return Err(Error::DimensionMismatch("samples have mixed dimensions".into()));
    }
    if samples.iter().flat_map(|(x, y)| x.iter().chain(y)).any(|s| s.field() != field) {
        return Err(Error::InvalidInput(format!("samples must be over {field}")));
    }
    let d = field.real_dim();
    // unknowns: M[r][c] at r*d + c, then b_{i,r} at d*d + i*d + r
    let unknowns = d * d + m * d;
    let mut rows: RatMatrix = Vec::new();
    let mut rhs = Vec::new();
    for (x, y) in samples {
        for i in 0..m {
            let xc = x[i].components();
            let yc = y[i].components();
            for r in 0..d {
                let mut row = vec![Rational::zero(); unknowns];
                for c in 0..d {
                    row[r * d + c] = xc[c].clone();
                }
                row[d * d + i * d + r] = Rational::one();
                rows.push(row);
                rhs.push(yc[r].clone());
            }
        }
    }
    if rat::rank(&rows) < unknowns {
        return Err(Error::InsufficientSamples("samples are not in general position".into()));
    }
    let sol = rat::solve_any(&rows, &rhs)
        .ok_or_else(|| Error::HypothesisViolation("samples are not on a map of the special affine form".into()))?;
    let image = |c: usize| Scalar::from_components(field, &(0..d).map(|r| sol[r * d + c].clone()).collect::<Vec<_>>());
    let offsets: Vec<Scalar> = (0..m)
        .map(|i| Scalar::from_components(field, &sol[d * d + i * d..d * d + (i + 1) * d]))
        .collect();
    let a = image(0);
    if (0..d).all(|c| image(c).is_zero()) {
        return Ok(AffineFit { a, h: None, offsets });
    }
    if a.is_zero() {
        return Err(Error::HypothesisViolation("linear part kills 1 but is not zero".into()));
    }
    let a_inv = a.invert()?;
    let h_of = |c: usize| &a_inv * &image(c);
    let h = match field {
        Field::R => FieldAut::Identity,
        Field::C => {
            let hi = h_of(1);
            if hi == Scalar::unit(Field::C, 1) {
                FieldAut::Identity
            } else if hi == -Scalar::unit(Field::C, 1) {
                FieldAut::ComplexConjugation
            } else {
                return Err(Error::HypothesisViolation("linear part is not ℂ-linear or antilinear".into()));
            }
        }
        Field::H => {
            let h = FieldAut::quaternion(h_of(1), h_of(2))
                .map_err(|e| Error::HypothesisViolation(format!("linear part is not a·h: {e}")))?;
            match &h {
                FieldAut::Quaternion { nu, .. } if nu == &h_of(3) => h,
                _ => return Err(Error::HypothesisViolation("linear part is not a·h on k".into())),
            }
        }
    };
    Ok(AffineFit { a, h: Some(h), offsets })
}

/// Real 4×4 matrices of q ↦ s q and q ↦ q s.
fn quaternion_mult_matrices(s: &Scalar) -> (RatMatrix, RatMatrix) {
    let mut left = rat::zeros(4, 4);
    let mut right = rat::zeros(4, 4);
    for c in 0..4 {
        let u = Scalar::unit(Field::H, c);
        let l = (s * &u).components();
        let r = (&u * s).components();
        for k in 0..4 {
            left[k][c] = l[k].clone();
            right[k][c] = r[k].clone();
        }
    }
    (left, right)
}

/// A nonzero b with h(x) = b x b⁻¹.
pub fn inner_representative(field: Field, h: &FieldAut) -> Result<Scalar> {
    let FieldAut::Quaternion { lambda, mu, .. } = h else {
        return Ok(Scalar::one(field));
    };
    // h(x) b - b x = 0 for x = i, j
    let mut rows: RatMatrix = Vec::new();
    for (hx, x) in [(lambda, Scalar::unit(Field::H, 1)), (mu, Scalar::unit(Field::H, 2))] {
        let (l, _) = quaternion_mult_matrices(hx);
        let (_, r) = quaternion_mult_matrices(&x);
        for k in 0..4 {
            rows.push((0..4).map(|c| &l[k][c] - &r[k][c]).collect());
        }
    }
    let ker = rat::kernel(&rows, 4);
    let v = ker.first().ok_or_else(|| Error::InvalidFieldAutomorphism("not inner".into()))?;
    Ok(Scalar::from_components(Field::H, v))
}

/// Ball in the N̂ chart: flags α(c·exp(X)) with every coordinate of X at most
/// `radius` in absolute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartBall {
    pub center: GroupElement,
    pub radius: Rational,
}

impl ChartBall {
    pub fn new(center: GroupElement, radius: Rational) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        Ok(ChartBall { center, radius })
    }

    pub fn around_identity(n: usize, field: Field, radius: Rational) -> Result<Self> {
        Self::new(GroupElement::identity(n, field), radius)
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    pub fn field(&self) -> Field {
        self.center.field()
    }

    pub fn center_flag(&self) -> Flag {
        Flag::alpha(&self.center)
    }

    /// Chart coordinates of a flag relative to the center, if it is in N̂.
    pub fn coordinates(&self, f: &Flag) -> Option<LieElement> {
        let u = f.alpha_inverse().ok()?;
        Some(self.center.inv().mul(&u).ok()?.log())
    }

    pub fn contains(&self, f: &Flag) -> bool {
        if f.n() != self.n() || f.field() != self.field() {
            return false;
        }
        self.coordinates(f).is_some_and(|x| x.coords().iter().all(|c| c.abs() <= self.radius))
    }

    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> Flag {
        let x = random::lie_element_within(rng, self.n(), self.field(), &self.radius, 16);
        Flag::alpha(&self.center.mul(&x.exp()).expect("same n"))
    }
}

/// A flag map defined on a chart ball.
pub trait FlagMapOracle {
    fn domain(&self) -> &ChartBall;

    /// The map itself; callers go through `eval`.
    fn apply(&self, f: &Flag) -> Result<Flag>;

    fn eval(&self, f: &Flag) -> Result<Flag> {
        if !self.domain().contains(f) {
            return Err(Error::OutsideDomain("flag is outside the oracle's chart ball".into()));
        }
        self.apply(f)
    }
}

/// F ↦ g·F.
pub struct ProjectiveOracle {
    pub g: Matrix,
    pub domain: ChartBall,
}

impl FlagMapOracle for ProjectiveOracle {
    fn domain(&self) -> &ChartBall {
        &self.domain
    }

    fn apply(&self, f: &Flag) -> Result<Flag> {
        f.act_matrix(&self.g)
    }
}

/// F ↦ ψ(g·F).
pub struct PsiOracle {
    pub g: Matrix,
    pub domain: ChartBall,
}

impl FlagMapOracle for PsiOracle {
    fn domain(&self) -> &ChartBall {
        &self.domain
    }

    fn apply(&self, f: &Flag) -> Result<Flag> {
        Ok(f.act_matrix(&self.g)?.psi())
    }
}

/// α(u) ↦ α(h·exp(φ(log u))).
pub struct GradedAffineOracle {
    pub h: GroupElement,
    pub phi: GradedMap,
    pub domain: ChartBall,
}

impl FlagMapOracle for GradedAffineOracle {
    fn domain(&self) -> &ChartBall {
        &self.domain
    }

    fn apply(&self, f: &Flag) -> Result<Flag> {
        let u = f.alpha_inverse()?;
        let v = self.phi.apply(&u.log())?.exp();
        Ok(Flag::alpha(&self.h.mul(&v)?))
    }
}

/// Every flag goes to `value`.
pub struct ConstantOracle {
    pub value: Flag,
    pub domain: ChartBall,
}

impl FlagMapOracle for ConstantOracle {
    fn domain(&self) -> &ChartBall {
        &self.domain
    }

    fn apply(&self, _f: &Flag) -> Result<Flag> {
        Ok(self.value.clone())
    }
}

/// A closure on a chart ball.
pub struct FnOracle<F: Fn(&Flag) -> Result<Flag>> {
    pub f: F,
    pub domain: ChartBall,
}

impl<F: Fn(&Flag) -> Result<Flag>> FlagMapOracle for FnOracle<F> {
    fn domain(&self) -> &ChartBall {
        &self.domain
    }

    fn apply(&self, f: &Flag) -> Result<Flag> {
        (self.f)(f)
    }
}

pub const SHRINK_BUDGET: usize = 64;
pub const HELD_OUT: usize = 50;
const FIBER_PAIRS: usize = 3;
const DEFAULT_SEED: u64 = 0x5eed;

/// Lines span(x, 1) around e_n: W^0 at x = -(1, …, 1), W^i at x = e_i, W^n at 0.
fn chart_frame(n: usize, field: Field) -> ProjectiveFrame {
    let mut v = vec![(1..=n).map(|i| if i == n { Scalar::one(field) } else { -Scalar::one(field) }).collect()];
    for i in 1..n {
        let mut w = e(field, n, i);
        w[n - 1] = Scalar::one(field);
        v.push(w);
    }
    v.push(e(field, n, n));
    ProjectiveFrame::from_vectors(field, &v).expect("chart frame")
}

fn with_last_one(x: &[Scalar], field: Field) -> Vec<Scalar> {
    let mut v = x.to_vec();
    v.push(Scalar::one(field));
    v
}

/// Affine coordinates x of span(x, 1), if the last entry is nonzero.
fn affine_coords(line: &GrassmannPoint) -> Option<Vec<Scalar>> {
    let v = line.vector();
    let last = v.last()?;
    if last.is_zero() {
        return None;
    }
    let inv = last.invert().ok()?;
    Some(v[..v.len() - 1].iter().map(|x| x * &inv).collect())
}

struct Normalized<'a> {
    oracle: &'a dyn FlagMapOracle,
    n: usize,
    field: Field,
    c: Matrix,
    c_inv: Matrix,
}

impl Normalized<'_> {
    /// The flag c·α(u) with u = I + Σ z_i E_{in}, c⁻¹L = span(z, 1).
    fn lift(&self, line: &GrassmannPoint) -> Result<Flag> {
        let z = affine_coords(&line.act(&self.c_inv)?)
            .ok_or_else(|| Error::OutsideDomain("line is at infinity in the chart".into()))?;
        let mut u = Matrix::identity(self.field, self.n);
        for (i, zi) in z.into_iter().enumerate() {
            u.set(i, self.n - 1, zi);
        }
        Flag::from_matrix(&self.c.mul(&u))
    }

    fn in_domain(&self, line: &GrassmannPoint) -> bool {
        self.lift(line).is_ok_and(|f| self.oracle.domain().contains(&f))
    }

    /// The induced map on lines.
    fn f1(&self, line: &GrassmannPoint) -> Result<GrassmannPoint> {
        self.oracle.eval(&self.lift(line)?)?.pi_j(1)
    }
}

/// Flags α(u) and α(uk) with k in the stabilizer of W_j^- share π_j.
fn check_fibers<R: rand::Rng>(oracle: &dyn FlagMapOracle, rng: &mut R) -> Result<()> {
    let dom = oracle.domain();
    let (n, field) = (dom.n(), dom.field());
    let half = &dom.radius / rat(2, 1);
    let eighth = &dom.radius / rat(8, 1);
    for j in 1..n {
        let mut found = 0;
        for _ in 0..20 * FIBER_PAIRS {
            if found == FIBER_PAIRS {
                break;
            }
            let x = random::lie_element_within(rng, n, field, &half, 16);
            let mut kc = random::lie_element_within(rng, n, field, &eighth, 16).into_coords();
            let alg = crate::nilpotent::Algebra::get(n, field);
            for (idx, b) in alg.basis.iter().enumerate() {
                // entries (a, b) with a ≤ n-j < b move W_j^-
                if b.i < n - j && b.j >= n - j {
                    kc[idx] = Rational::zero();
                }
            }
            let k = LieElement::from_coords(n, field, kc)?.exp();
            let u = dom.center.mul(&x.exp())?;
            let f = Flag::alpha(&u);
            let g = Flag::alpha(&u.mul(&k)?);
            if !dom.contains(&f) || !dom.contains(&g) {
                continue;
            }
            debug_assert_eq!(f.pi_j(j)?, g.pi_j(j)?);
            found += 1;
            if oracle.eval(&f)?.pi_j(j)? != oracle.eval(&g)?.pi_j(j)? {
                return Err(Error::NotFibrationPreserving(format!("a π_{j} fiber is split")));
            }
        }
    }
    Ok(())
}

/// Recover g ∈ PGL(n, F) from a fibration preserving flag map near `base`.
pub fn reconstruct_from_fibration_map(f: &dyn FlagMapOracle, base: &Flag) -> Result<ProjElement> {
    reconstruct_with_seed(f, base, DEFAULT_SEED)
}

pub fn reconstruct_with_seed(f: &dyn FlagMapOracle, base: &Flag, seed: u64) -> Result<ProjElement> {
    let dom = f.domain();
    let (n, field) = (dom.n(), dom.field());
    if base.n() != n || base.field() != field {
        return Err(Error::DimensionMismatch("base flag and oracle disagree on n or field".into()));
    }
    if !dom.contains(base) {
        return Err(Error::OutsideDomain("base flag is outside the oracle's domain".into()));
    }
    let mut rng = random::rng(seed);
    check_fibers(f, &mut rng)?;

    let c = base.alpha_inverse()?.into_matrix();
    let norm = Normalized { oracle: f, n, field, c_inv: c.inverse()?, c };
    let frame0 = chart_frame(n, field);
    let aug0 = augment(&frame0)?;

    let mut r = Rational::one();
    let mut found = None;
    for _ in 0..SHRINK_BUDGET {
        let shift = norm.c.mul(&crate::flag::dilation_matrix(field, n, &r));
        let src = frame0.act(&shift)?;
        let src_extra = aug0.extra.act(&shift)?;
        if src.points().iter().chain([&src_extra]).all(|p| norm.in_domain(p)) {
            let img = src.points().iter().map(|p| norm.f1(p)).collect::<Result<Vec<_>>>()?;
            if is_frame(&img)? {
                let img = ProjectiveFrame::new(img)?;
                if norm.f1(&src_extra)? != augment(&img)?.extra {
                    return Err(Error::NotFibrationPreserving("augmented frame point is not preserved".into()));
                }
                found = Some((src, img));
                break;
            }
        }
        r /= rat(2, 1);
    }
    let (src, img) = found.ok_or_else(|| {
        Error::DegenerateMap(format!("no nondegenerate image frame after {SHRINK_BUDGET} halvings"))
    })?;
    let ga = solve_frame_map(&frame0, &src)?;
    let gb = solve_frame_map(&frame0, &img)?;
    let gb_inv = gb.inverse();

    // f̂_1 = g_B⁻¹ ∘ f_1 ∘ g_A fixes the chart frame; sample it near x = 0
    let m = n - 1;
    let quarter = rat(1, 4);
    let mut xs: Vec<Vec<Scalar>> = vec![vec![Scalar::zero(field); m]];
    for i in 0..m {
        let mut x = vec![Scalar::zero(field); m];
        x[i] = Scalar::from_rational(field, quarter.clone());
        xs.push(x);
    }
    if field == Field::H && m >= 2 {
        for q in 1..4 {
            for t in [rat(1, 4), rat(-1, 8)] {
                let mut x = vec![Scalar::zero(field); m];
                x[0] = Scalar::from_rational(field, t.clone());
                x[1] = Scalar::unit(field, q).scale(&t);
                xs.push(x);
            }
        }
    }
    for _ in 0..m + 2 {
        xs.push((0..m).map(|_| random::scalar_within(&mut rng, field, &quarter, 16)).collect());
    }
    let mut samples = Vec::with_capacity(xs.len());
    for x in xs {
        let line = GrassmannPoint::line(field, &with_last_one(&x, field))?;
        let image = gb_inv.act_line(&norm.f1(&ga.act_line(&line)?)?)?;
        let y = affine_coords(&image).ok_or_else(|| Error::DegenerateMap("image leaves the affine chart".into()))?;
        samples.push((x, y));
    }
    let fit = special_affine_fit(field, &samples).map_err(|e| match e {
        Error::HypothesisViolation(s) => Error::NotFibrationPreserving(s),
        other => other,
    })?;
    let h = match &fit.h {
        None => return Err(Error::DegenerateMap("the linear part of the chart map vanishes".into())),
        Some(FieldAut::ComplexConjugation) => {
            return Err(Error::NotProjective("the chart map is complex antilinear".into()))
        }
        Some(h) => h.clone(),
    };
    // span(a h(x) + b_off, 1) = ĝ·span(x, 1) with ĝ = [[a b I, b_off b], [0, b]], h = Ad_b
    let b = inner_representative(field, &h)?;
    let ab = &fit.a * &b;
    let mut ghat = Matrix::identity(field, n);
    for i in 0..m {
        ghat.set(i, i, ab.clone());
        ghat.set(i, m, &fit.offsets[i] * &b);
    }
    ghat.set(m, m, b);
    let g = ProjElement::new(&gb.matrix().mul(&ghat).mul(&ga.matrix().inverse()?))?;

    for _ in 0..HELD_OUT {
        let flag = dom.sample(&mut rng);
        if f.eval(&flag)? != g.act(&flag)? {
            return Err(Error::NotFibrationPreserving("reconstruction disagrees on a held-out flag".into()));
        }
    }
    Ok(g)
}

/// For lower unipotent g ≠ I, a flag F ∈ N̂ with g·F ∉ N̂.
pub fn escape_flag(g: &Matrix) -> Result<Flag> {
    if !g.is_lower_unipotent() {
        return Err(Error::NotLowerUnipotent("expected a lower triangular matrix with unit diagonal".into()));
    }
    let n = g.rows();
    let field = g.field();
    let below = |k: usize| (k + 1..n).filter(|&j| !g.get(j, k).is_zero()).collect::<Vec<_>>();
    let k = (0..n).rev().find(|&k| !below(k).is_empty()).ok_or_else(|| Error::NoEscape("g is the identity".into()))?;
    let j0 = *below(k).last().expect("nonempty");
    let mut v = e(field, n, k + 1);
    for j in k + 1..=j0 {
        v[j] = -g.get(j, k).clone();
    }
    let mut b = Matrix::identity(field, n);
    for (i, vi) in v.into_iter().enumerate() {
        b.set(i, j0, vi);
    }
    Flag::from_matrix(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn line(field: Field, v: &[i64]) -> GrassmannPoint {
        let s: Vec<Scalar> = v.iter().map(|&x| Scalar::from_int(field, x)).collect();
        GrassmannPoint::line(field, &s).unwrap()
    }

    #[test]
    fn standard_frames() {
        for field in Field::all() {
            let f = standard_frame(3, field);
            assert!(is_frame(f.points()).unwrap());
        }
        let mut pts = standard_frame(3, Field::R).points().to_vec();
        pts[0] = line(Field::R, &[1, 0, 0]);
        assert!(!is_frame(&pts).unwrap());
        assert!(is_frame(&pts[..3]).is_err());
        let aug = standard_augmented_frame(4, Field::R);
        assert_eq!(aug.extra, line(Field::R, &[1, 1, 1, 0]));
    }

    #[test]
    fn frame_solver() {
        let a = standard_frame(3, Field::R);
        assert_eq!(solve_frame_map(&a, &a).unwrap(), ProjElement::identity(3, Field::R));
        let d = Matrix::from_ints(Field::R, &[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        let g = solve_frame_map(&a, &a.act(&d).unwrap()).unwrap();
        assert_eq!(g, ProjElement::new(&d).unwrap());
        let mut rng = random::rng(3);
        for field in [Field::R, Field::C, Field::H] {
            for _ in 0..10 {
                let g = random::invertible_matrix(&mut rng, field, 4, 20);
                let h = random::invertible_matrix(&mut rng, field, 4, 20);
                let Ok(a) = standard_frame(4, field).act(&h) else { continue };
                let b = a.act(&g).unwrap();
                let s = solve_frame_map(&a, &b).unwrap();
                for i in 0..=4 {
                    assert_eq!(&s.act_line(a.point(i)).unwrap(), b.point(i));
                }
                if field != Field::H {
                    assert_eq!(s, ProjElement::new(&g).unwrap());
                }
            }
        }
    }

    fn scal(field: Field, x: i64) -> Scalar {
        Scalar::from_int(field, x)
    }

    #[test]
    fn affine_fit_real() {
        let f = Field::R;
        let pts = [[0, 0], [1, 0], [0, 1], [2, 5], [-3, 1]];
        let samples: Vec<_> = pts
            .iter()
            .map(|p| {
                let x = vec![scal(f, p[0]), scal(f, p[1])];
                let y = vec![scal(f, 3 * p[0] + 1), scal(f, 3 * p[1] + 2)];
                (x, y)
            })
            .collect();
        let fit = special_affine_fit(f, &samples).unwrap();
        assert_eq!(fit.a, scal(f, 3));
        assert_eq!(fit.offsets, vec![scal(f, 1), scal(f, 2)]);
        for (x, y) in &samples {
            assert_eq!(&fit.apply(x), y);
        }
        let id: Vec<_> = samples.iter().map(|(x, _)| (x.clone(), x.clone())).collect();
        let fit = special_affine_fit(f, &id).unwrap();
        assert_eq!(fit.a, scal(f, 1));
        assert!(fit.offsets.iter().all(|b| b.is_zero()));
        let mut bad = samples.clone();
        bad[3].1[0] = scal(f, 100);
        assert!(matches!(special_affine_fit(f, &bad), Err(Error::HypothesisViolation(_))));
        assert!(matches!(special_affine_fit(f, &samples[..3]), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn affine_fit_quaternion() {
        let f = Field::H;
        let one_i = Scalar::quaternion(rat_int(1), rat_int(1), rat_int(0), rat_int(0));
        let h = random::inner_aut(&one_i);
        let j = Scalar::unit(f, 2);
        let mut rng = random::rng(11);
        let samples: Vec<_> = (0..6)
            .map(|_| {
                let x: Vec<Scalar> = (0..2).map(|_| random::scalar(&mut rng, f, 9)).collect();
                let y = x.iter().map(|xi| &j * &h.apply(xi)).collect();
                (x, y)
            })
            .collect();
        let fit = special_affine_fit(f, &samples).unwrap();
        assert_eq!(fit.a, j);
        assert_eq!(fit.h, Some(h.clone()));
        assert!(fit.offsets.iter().all(|b| b.is_zero()));
        let b = inner_representative(Field::H, &h).unwrap();
        let x = Scalar::quaternion(rat_int(2), rat_int(-1), rat_int(3), rat_int(5));
        assert_eq!(&(&b * &x) * &b.invert().unwrap(), h.apply(&x));
    }

    #[test]
    fn affine_fit_antilinear() {
        let f = Field::C;
        let mut rng = random::rng(5);
        let samples: Vec<_> = (0..5)
            .map(|_| {
                let x: Vec<Scalar> = (0..2).map(|_| random::scalar(&mut rng, f, 9)).collect();
                let y = x.iter().map(|xi| xi.conjugate()).collect();
                (x, y)
            })
            .collect();
        let fit = special_affine_fit(f, &samples).unwrap();
        assert_eq!(fit.h, Some(FieldAut::ComplexConjugation));
    }

    fn ball(n: usize, field: Field) -> ChartBall {
        ChartBall::around_identity(n, field, rat_int(1)).unwrap()
    }

    #[test]
    fn reconstruct_projective() {
        let mut rng = random::rng(17);
        for (n, field) in [(3, Field::R), (4, Field::R), (3, Field::C), (3, Field::H)] {
            for _ in 0..3 {
                let g = random::invertible_matrix(&mut rng, field, n, 50);
                let oracle = ProjectiveOracle { g: g.clone(), domain: ball(n, field) };
                let base = Flag::base_minus(n, field);
                let got = reconstruct_from_fibration_map(&oracle, &base).unwrap();
                assert_eq!(got, ProjElement::new(&g).unwrap());
            }
        }
    }

    #[test]
    fn reconstruct_off_center() {
        let mut rng = random::rng(23);
        let n = 3;
        let center = random::group_element(&mut rng, n, Field::R, 5);
        let domain = ChartBall::new(center.clone(), rat(1, 3)).unwrap();
        let g = random::invertible_matrix(&mut rng, Field::R, n, 50);
        let oracle = ProjectiveOracle { g: g.clone(), domain };
        let got = reconstruct_from_fibration_map(&oracle, &Flag::alpha(&center)).unwrap();
        assert_eq!(got, ProjElement::new(&g).unwrap());
    }

    #[test]
    fn reconstruct_rejects() {
        let n = 3;
        let g = Matrix::from_ints(Field::R, &[&[2, 1, 0], &[0, 1, 3], &[1, 0, 1]]);
        let psi = PsiOracle { g, domain: ball(n, Field::R) };
        let base = Flag::base_minus(n, Field::R);
        assert!(matches!(reconstruct_from_fibration_map(&psi, &base), Err(Error::NotFibrationPreserving(_))));
        let constant = ConstantOracle { value: Flag::base_plus(n, Field::R), domain: ball(n, Field::R) };
        assert!(matches!(reconstruct_from_fibration_map(&constant, &base), Err(Error::DegenerateMap(_))));
        let conj = GradedAffineOracle {
            h: GroupElement::identity(n, Field::C),
            phi: crate::nilpotent::hat_h(n, Field::C, &FieldAut::ComplexConjugation).unwrap(),
            domain: ball(n, Field::C),
        };
        let base = Flag::base_minus(n, Field::C);
        assert!(matches!(reconstruct_from_fibration_map(&conj, &base), Err(Error::NotProjective(_))));
    }

    #[test]
    fn reconstruct_graded_affine() {
        let mut rng = random::rng(31);
        let n = 4;
        let lambda: Vec<Scalar> = (0..n).map(|_| random::nonzero_scalar(&mut rng, Field::R, 9)).collect();
        let oracle = GradedAffineOracle {
            h: random::group_element(&mut rng, n, Field::R, 9),
            phi: crate::nilpotent::ad_diag(n, Field::R, &lambda).unwrap(),
            domain: ball(n, Field::R),
        };
        let got = reconstruct_from_fibration_map(&oracle, &Flag::base_minus(n, Field::R)).unwrap();
        for _ in 0..5 {
            let f = oracle.domain.sample(&mut rng);
            assert_eq!(got.act(&f).unwrap(), oracle.eval(&f).unwrap());
        }
    }

    #[test]
    fn escape_examples() {
        let mut g = Matrix::identity(Field::R, 4);
        g.set(1, 0, Scalar::one(Field::R));
        let f = escape_flag(&g).unwrap();
        assert!(f.in_nhat());
        assert!(!f.act_matrix(&g).unwrap().in_nhat());
        let v = vec![scal(Field::R, 1), scal(Field::R, -1), scal(Field::R, 0), scal(Field::R, 0)];
        assert!(f.pi_j(3).unwrap().contains(&v));
        assert_eq!(g.mul_vec(&v), e(Field::R, 4, 1));
        assert!(matches!(escape_flag(&Matrix::identity(Field::R, 4)), Err(Error::NoEscape(_))));
        assert!(matches!(escape_flag(&Matrix::reversal(Field::R, 4)), Err(Error::NotLowerUnipotent(_))));
        let mut rng = random::rng(8);
        for field in Field::all() {
            for _ in 0..20 {
                let g = random::lower_unipotent(&mut rng, 5, field, 9);
                let f = escape_flag(&g).unwrap();
                assert!(f.in_nhat());
                assert!(!f.act_matrix(&g).unwrap().in_nhat());
            }
        }
    }
}
