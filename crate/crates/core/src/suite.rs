//! The acceptance suite: ten randomized or exhaustive checks, all exact except
//! the float-mode quadrature bound.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::flag::{beta_squared, dilation_matrix, Flag, GrassmannPoint, ProjElement};
use crate::forms::{self, check_pullback_hypotheses, LeftInvariantForm};
use crate::gradedaut::{classify, GradedMap};
use crate::matrix::Matrix;
use crate::nilpotent::{tau_map, Algebra, LieElement};
use crate::pansu::{pansu_differential, verify_pullback_identity, BumpSpec, PolyMapSpec, QuadratureMode};
use crate::random::{self, Rng64, DEFAULT_BOUND};
use crate::rigidity::{escape_flag, reconstruct_with_seed, ChartBall, FlagMapOracle, ProjectiveOracle, HELD_OUT};
use crate::scalar::{rat, Field, Rational, Scalar};

pub const COUNT: usize = 10;

pub const NAMES: [&str; COUNT] = [
    "algebra soundness",
    "structure equations",
    "pullback hypotheses",
    "automorphism classification",
    "reconstruction",
    "dilation dynamics",
    "escape flags",
    "pansu differential",
    "pullback identity quadrature",
    "chart coherence",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = std::result::Result<String, String>;

fn fail<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Each criterion gets its own stream derived from the seed.
fn stream(seed: u64, id: usize) -> Rng64 {
    random::rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(id as u64))
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize, seed: u64) -> Outcome {
    let mut rng = stream(seed, id);
    let result = match id {
        1 => algebra_soundness(&mut rng),
        2 => structure_equations(),
        3 => pullback_hypotheses(),
        4 => automorphism_classification(&mut rng),
        5 => reconstruction(&mut rng),
        6 => dilation_dynamics(&mut rng),
        7 => escape_flags(&mut rng),
        8 => pansu_checks(&mut rng),
        9 => quadrature(&mut rng),
        10 => chart_coherence(&mut rng),
        _ => Err(format!("no criterion {id}")),
    };
    let name = NAMES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown");
    match result {
        Ok(detail) => Outcome { id, name, passed: true, detail },
        Err(detail) => Outcome { id, name, passed: false, detail },
    }
}

/// Runs the given criteria in order, with wall-clock timings.
pub fn run(ids: &[usize], seed: u64) -> Vec<(Outcome, Duration)> {
    ids.iter()
        .map(|&id| {
            let t = Instant::now();
            let o = run_criterion(id, seed);
            (o, t.elapsed())
        })
        .collect()
}

pub fn all_ids() -> Vec<usize> {
    (1..=COUNT).collect()
}

fn algebra_ranges() -> Vec<(usize, Field)> {
    let mut v = Vec::new();
    for field in [Field::R, Field::C] {
        for n in 3..=6 {
            v.push((n, field));
        }
    }
    v.push((3, Field::H));
    v.push((4, Field::H));
    v
}

type Sparse = Vec<(usize, Rational)>;

fn add_into(acc: &mut Vec<Rational>, terms: &[(usize, Rational)], scale: &Rational) {
    for (k, c) in terms {
        acc[*k] += c * scale;
    }
}

/// [e_a, y] for sparse y.
fn bracket_unit(alg: &Algebra, a: usize, y: &Sparse) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); alg.dim()];
    for (b, c) in y {
        add_into(&mut out, alg.bracket_units(a, *b), c);
    }
    out
}

fn algebra_soundness(rng: &mut Rng64) -> Check {
    let mut triples = 0usize;
    let mut roundtrips = 0usize;
    for (n, field) in algebra_ranges() {
        let alg = Algebra::get(n, field);
        let dim = alg.dim();
        for a in 0..dim {
            for b in 0..dim {
                let layer = alg.layer(a) + alg.layer(b);
                for (k, _) in alg.bracket_units(a, b) {
                    ensure(alg.layer(*k) == layer, || format!("[e{a}, e{b}] leaves V_{layer} (n={n}, {field})"))?;
                }
            }
        }
        // [a, [b, c]] + [b, [c, a]] + [c, [a, b]]
        let unit = |a: usize, b: usize| -> Sparse { alg.bracket_units(a, b).to_vec() };
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    triples += 1;
                    let mut sum = bracket_unit(&alg, a, &unit(b, c));
                    for (x, y, z) in [(b, c, a), (c, a, b)] {
                        for (k, v) in bracket_unit(&alg, x, &unit(y, z)).into_iter().enumerate() {
                            sum[k] += v;
                        }
                    }
                    ensure(sum.iter().all(Zero::is_zero), || format!("Jacobi fails on ({a},{b},{c}), n={n}, {field}"))?;
                }
            }
        }
        for _ in 0..500 {
            let x = random::lie_element(rng, n, field, DEFAULT_BOUND);
            let g = x.exp();
            ensure(g.log() == x, || format!("log(exp x) != x for n={n}, {field}"))?;
            let h = random::group_element(rng, n, field, DEFAULT_BOUND);
            ensure(h.log().exp() == h, || format!("exp(log g) != g for n={n}, {field}"))?;
            roundtrips += 2;
        }
    }
    Ok(format!("{triples} Jacobi triples, grading on all pairs, {roundtrips} exp/log roundtrips"))
}

fn theta(n: usize, field: Field, i: usize, j: usize, c: usize) -> LeftInvariantForm {
    LeftInvariantForm::theta(n, field, i, j, c)
}

fn sum_forms(n: usize, field: Field, degree: usize, parts: Vec<LeftInvariantForm>) -> LeftInvariantForm {
    parts.into_iter().fold(LeftInvariantForm::zero(n, field, degree), |acc, f| acc.add(&f).expect("same algebra"))
}

fn structure_equations() -> Check {
    let mut count = 0usize;
    for (n, field) in algebra_ranges() {
        let alg = Algebra::get(n, field);
        for k in 0..alg.dim() {
            let f = LeftInvariantForm::basis(n, field, k);
            ensure(f.d().d().is_zero(), || format!("d d theta^{k} != 0 (n={n}, {field})"))?;
            count += 1;
        }
    }
    // Maurer-Cartan formula for θ_ij over ℝ
    for n in 3..=6 {
        for i in 1..n {
            for j in i + 1..=n {
                let parts = (i + 1..j).map(|k| theta(n, Field::R, i, k, 0).wedge(&theta(n, Field::R, k, j, 0)).neg()).collect();
                let expect = sum_forms(n, Field::R, 2, parts);
                ensure(theta(n, Field::R, i, j, 0).d() == expect, || format!("d theta_{i}{j} (n={n})"))?;
                count += 1;
            }
        }
    }
    let b = forms::n4_basis();
    let checks = [
        ("d alpha0", b.alpha0.d(), LeftInvariantForm::zero(4, Field::R, 2)),
        ("d alpha1", b.alpha1.d(), LeftInvariantForm::zero(4, Field::R, 2)),
        ("d alpha2", b.alpha2.d(), LeftInvariantForm::zero(4, Field::R, 2)),
        ("d beta1", b.beta1.d(), b.alpha0.wedge(&b.alpha1)),
        ("d beta2", b.beta2.d(), b.alpha0.wedge(&b.alpha2)),
        ("d gamma", b.gamma.d(), b.alpha1.wedge(&b.beta2).add(&b.alpha2.wedge(&b.beta1)).expect("n = 4")),
    ];
    for (name, got, expect) in checks {
        ensure(got == expect, || format!("{name} does not match the n = 4 structure equations"))?;
        count += 1;
    }
    // quaternionic formulas with (α, β, γ, η) the components 1, i, j, k
    // d θ^c_{s1 s3} = Σ SIGNS[c][p] θ^p_{s1 s2} ∧ θ^q_{s2 s3} with q = PARTNER[c][p]
    const PARTNER: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
    const SIGNS: [[i64; 4]; 4] = [[-1, 1, 1, 1], [-1, -1, -1, 1], [-1, 1, -1, -1], [-1, -1, 1, -1]];
    for n in [3, 4] {
        let t = |i, j, c| theta(n, Field::H, i, j, c);
        for s1 in 1..=n {
            for s3 in s1 + 2..=n {
                for c in 0..4 {
                    let mut parts = Vec::new();
                    for s2 in s1 + 1..s3 {
                        for p in 0..4 {
                            let q = PARTNER[c][p];
                            let term = t(s1, s2, p).wedge(&t(s2, s3, q));
                            parts.push(if SIGNS[c][p] > 0 { term } else { term.neg() });
                        }
                    }
                    let expect = sum_forms(n, Field::H, 2, parts);
                    ensure(t(s1, s3, c).d() == expect, || format!("quaternionic d theta^{c}_{s1}{s3} (n={n})"))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} identities"))
}

fn pullback_hypotheses() -> Check {
    let mut pairs = 0usize;
    for n in 4..=6 {
        let om = forms::omega_plus(n, Field::R).map_err(fail("omega_plus"))?;
        let mut betas = Vec::new();
        for k in 2..n {
            betas.push((format!("eta_{k}_minus"), forms::eta_k_minus(n, k).map_err(fail("eta"))?));
        }
        for k in 1..n - 1 {
            betas.push((format!("eta_{k}_plus"), forms::eta_k_plus(n, k).map_err(fail("eta"))?));
        }
        for (name, beta) in betas {
            let r = check_pullback_hypotheses(&om, &beta).map_err(fail("check"))?;
            ensure(r.deg_ok && r.wt_equal && r.closed_ok, || format!("(omega_plus, {name}) at n={n}: {r:?}"))?;
            pairs += 1;
        }
    }
    let om = forms::omega_plus(3, Field::H).map_err(fail("omega_plus"))?;
    let alg = Algebra::get(3, Field::H);
    for (label, eta) in [("eta_minus", forms::eta_minus(3, Field::H)), ("eta_plus", forms::eta_plus(3, Field::H))] {
        let eta = eta.map_err(fail(label))?;
        for e in alg.basis.iter().filter(|e| e.layer() == 1) {
            let x = LieElement::unit(3, Field::H, e.i + 1, e.j + 1, e.c);
            let beta = eta.interior(&x);
            let r = check_pullback_hypotheses(&om, &beta).map_err(fail("check"))?;
            let ok = r.all_ok() && (beta.is_zero() || r.wt_equal);
            ensure(ok, || format!("(omega_plus, i_X {label}) for X = e{} X{}{}: {r:?}", e.c, e.i + 1, e.j + 1))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs"))
}

pub fn classification_ranges() -> Vec<(usize, Field)> {
    vec![(4, Field::R), (5, Field::R), (4, Field::C), (5, Field::C), (3, Field::H), (4, Field::H)]
}

/// V1 entries that vanish for every automorphism with the given ε.
fn structural_zeros(n: usize, field: Field, epsilon: u8) -> Vec<(usize, usize)> {
    let d = field.real_dim();
    let mut out = Vec::new();
    for row in 0..(n - 1) * d {
        for col in 0..(n - 1) * d {
            let (rb, cb) = (row / d, col / d);
            let target = if epsilon == 0 { cb } else { n - 2 - cb };
            if rb != target {
                out.push((row, col));
            }
        }
    }
    out
}

const CERTS: usize = 2000;
const PERTURBATIONS: usize = 2000;

fn automorphism_classification(rng: &mut Rng64) -> Check {
    let mut rejected = 0usize;
    let per_range = PERTURBATIONS.div_ceil(classification_ranges().len());
    for (n, field) in classification_ranges() {
        let tau = tau_map(n, field).map_err(fail("tau"))?;
        let cert = classify(&tau).map_err(fail("classify tau"))?;
        ensure(cert.epsilon == 1 && cert.lambda.iter().all(Scalar::is_one) && cert.h.is_identity(), || {
            format!("tau classifies as {cert:?} (n={n}, {field})")
        })?;
        ensure(!tau.preserves_all_kj(), || format!("tau preserves every K_j (n={n}, {field})"))?;
        let zeros = [structural_zeros(n, field, 0), structural_zeros(n, field, 1)];
        for k in 0..CERTS {
            let c = random::certificate(rng, n, field, DEFAULT_BOUND).normalized();
            let m = c.reconstruct(n, field).map_err(fail("reconstruct"))?;
            let back = classify(&m).map_err(|e| format!("classify failed on {c:?}: {e}"))?;
            ensure(back == c, || format!("roundtrip mismatch (n={n}, {field}): {c:?} -> {back:?}"))?;
            ensure(m.preserves_all_kj() == (c.epsilon == 0), || format!("K_j biconditional fails on {c:?}"))?;
            if k >= per_range || rejected == PERTURBATIONS {
                continue;
            }
            let slots = &zeros[c.epsilon as usize];
            let (r, col) = slots[rng.gen_range(0..slots.len())];
            let mut v1 = m.v1.clone();
            v1[r][col] += random::nonzero_rational(rng, DEFAULT_BOUND);
            let p = GradedMap::from_v1(n, field, v1).map_err(fail("perturb"))?;
            ensure(classify(&p).is_err() && !p.is_graded_automorphism(), || {
                format!("perturbation at ({r},{col}) of {c:?} accepted")
            })?;
            rejected += 1;
        }
    }
    ensure(rejected == PERTURBATIONS, || format!("only {rejected} perturbations drawn"))?;
    Ok(format!(
        "{} certificates over {} (n, F), {rejected} perturbations rejected, tau has epsilon 1",
        CERTS * classification_ranges().len(),
        classification_ranges().len()
    ))
}

fn reconstruction(rng: &mut Rng64) -> Check {
    let settings = [(3, Field::R), (4, Field::R), (5, Field::R), (4, Field::C), (3, Field::H)];
    let mut total = 0usize;
    for (n, field) in settings {
        let domain = ChartBall::around_identity(n, field, Rational::one()).map_err(fail("ball"))?;
        let base = Flag::base_minus(n, field);
        for _ in 0..100 {
            let g = random::invertible_matrix(rng, field, n, DEFAULT_BOUND);
            let oracle = ProjectiveOracle { g: g.clone(), domain: domain.clone() };
            let got = reconstruct_with_seed(&oracle, &base, rng.gen()).map_err(|e| format!("n={n}, {field}: {e}"))?;
            let expect = ProjElement::new(&g).map_err(fail("projective class"))?;
            ensure(got == expect, || format!("n={n}, {field}: reconstructed a different class"))?;
            for _ in 0..HELD_OUT {
                let f = domain.sample(rng);
                let want = oracle.eval(&f).map_err(fail("oracle"))?;
                ensure(got.act(&f).map_err(fail("act"))? == want, || format!("held-out flag mismatch (n={n}, {field})"))?;
            }
            total += 1;
        }
    }
    Ok(format!("{total} maps reconstructed, {} held-out flags each", HELD_OUT))
}

fn dilation_dynamics(rng: &mut Rng64) -> Check {
    let mut cases = 0usize;
    while cases < 500 {
        let n = rng.gen_range(3..=6);
        let field = Field::all()[rng.gen_range(0..3)];
        let j = rng.gen_range(1..n);
        let v: Vec<Scalar> = (0..n).map(|_| random::scalar(rng, field, DEFAULT_BOUND)).collect();
        if v[n - j..].iter().all(Scalar::is_zero) {
            continue;
        }
        let r = random::positive_rational_at_most_one(rng, DEFAULT_BOUND);
        let line = GrassmannPoint::line(field, &v).map_err(fail("line"))?;
        let moved = line.act(&dilation_matrix(field, n, &r)).map_err(fail("dilate"))?;
        let before = beta_squared(&line, j).map_err(fail("beta"))?;
        let after = beta_squared(&moved, j).map_err(fail("beta"))?;
        ensure(after <= &r * &r * &before, || format!("contraction fails: n={n}, j={j}, r={r}"))?;
        cases += 1;
    }
    Ok(format!("{cases} cases"))
}

fn escape_flags(rng: &mut Rng64) -> Check {
    for n in 4..=6 {
        for _ in 0..100 {
            let g = random::lower_unipotent(rng, n, Field::R, DEFAULT_BOUND);
            let f = escape_flag(&g).map_err(fail("escape flag"))?;
            ensure(f.in_nhat(), || format!("escape flag outside the chart (n={n})"))?;
            ensure(!f.act_matrix(&g).map_err(fail("act"))?.in_nhat(), || format!("g-image stays in the chart (n={n})"))?;
        }
    }
    Ok("300 lower unipotent matrices".into())
}

fn pansu_settings() -> [(usize, Field); 4] {
    [(3, Field::R), (4, Field::R), (3, Field::C), (3, Field::H)]
}

fn random_graded_affine(rng: &mut Rng64, n: usize, field: Field) -> std::result::Result<(PolyMapSpec, GradedMap), String> {
    let phi = random::certificate(rng, n, field, 20).reconstruct(n, field).map_err(fail("certificate"))?;
    let g = random::group_element(rng, n, field, 20);
    Ok((PolyMapSpec::graded_affine(&g, &phi).map_err(fail("graded affine"))?, phi))
}

fn pansu_checks(rng: &mut Rng64) -> Check {
    for (n, field) in pansu_settings() {
        for _ in 0..50 {
            let (f, phi) = random_graded_affine(rng, n, field)?;
            let x = random::lie_element(rng, n, field, DEFAULT_BOUND).exp();
            let d = pansu_differential(&f, &x).map_err(fail("differential"))?;
            ensure(d.full_matrix() == phi.full_matrix(), || format!("graded affine differential (n={n}, {field})"))?;
        }
        for _ in 0..25 {
            let (f, _) = random_graded_affine(rng, n, field)?;
            let (g, _) = random_graded_affine(rng, n, field)?;
            let x = random::lie_element(rng, n, field, DEFAULT_BOUND).exp();
            let fg = f.compose(&g).map_err(fail("compose"))?;
            let lhs = pansu_differential(&fg, &x).map_err(fail("differential"))?;
            let gx = g.eval(&x).map_err(fail("eval"))?;
            let rhs = pansu_differential(&f, &gx)
                .and_then(|a| a.compose(&pansu_differential(&g, &x)?))
                .map_err(fail("differential"))?;
            ensure(lhs.full_matrix() == rhs.full_matrix(), || format!("chain rule (n={n}, {field})"))?;
        }
    }
    let shear = PolyMapSpec::contact_shear();
    for _ in 0..50 {
        let x = random::lie_element(rng, 3, Field::R, DEFAULT_BOUND).exp();
        let d = pansu_differential(&shear, &x).map_err(fail("contact shear"))?;
        ensure(d.is_graded_automorphism(), || "shear differential is not a graded automorphism".into())?;
    }
    Ok("200 graded-affine differentials, 100 chain rules, 50 shear points".into())
}

fn quadrature(rng: &mut Rng64) -> Check {
    let t = |i, j| LeftInvariantForm::theta(3, Field::R, i, j, 0);
    let one = LeftInvariantForm::constant(3, Field::R, Rational::one());
    let bump = BumpSpec { center: vec![rat(1, 2), rat(1, 3), rat(1, 5)], half_widths: vec![Rational::one(); 3] };
    let grid = bump.support_grid(2, 3);
    let shear = PolyMapSpec::transverse_shear(3).compose(&PolyMapSpec::contact_shear()).map_err(fail("compose"))?;
    let alpha = t(2, 3).wedge(&t(1, 3));
    let rep = verify_pullback_identity(&shear, &alpha, &one, &bump, &grid, QuadratureMode::Exact).map_err(fail("shear"))?;
    ensure(rep.entries[0].residual != 0.0, || "shear residual vanishes on the coarsest grid".into())?;
    ensure(rep.converges(0.3), || format!("shear residuals do not shrink by 0.3: {rep:?}"))?;
    let ratios: Vec<String> = rep.entries.iter().filter_map(|e| e.ratio).map(|r| format!("{r:.3}")).collect();
    let mut worst = 0f64;
    for alpha in [t(1, 2).wedge(&t(1, 3)), t(2, 3).wedge(&t(1, 3))] {
        for _ in 0..3 {
            let (f, _) = random_graded_affine(rng, 3, Field::R)?;
            let rep =
                verify_pullback_identity(&f, &alpha, &one, &bump, &grid, QuadratureMode::Float).map_err(fail("graded"))?;
            for e in &rep.entries {
                worst = worst.max(e.residual.abs());
            }
        }
    }
    ensure(worst < 1e-12, || format!("graded-affine residual {worst:e}"))?;
    Ok(format!("shear ratios [{}], graded-affine max |residual| {worst:.1e}", ratios.join(", ")))
}

/// Fields cycle over ℝ, ℂ, ℍ for n ≤ 4 and over ℝ, ℂ above.
fn chart_field(n: usize, k: usize) -> Field {
    if n <= 4 {
        Field::all()[k % 3]
    } else {
        [Field::R, Field::C][k % 2]
    }
}

fn chart_coherence(rng: &mut Rng64) -> Check {
    for n in 3..=6 {
        for k in 0..500 {
            let field = chart_field(n, k);
            let g = random::group_element(rng, n, field, DEFAULT_BOUND);
            let f = Flag::alpha(&g);
            ensure(f.alpha_inverse().map_err(fail("alpha inverse"))? == g, || format!("alpha roundtrip (n={n}, {field})"))?;
        }
    }
    for k in 0..500 {
        let n = 3 + k % 4;
        let field = chart_field(n, k / 4);
        let inside = k % 2 == 0;
        let flag = if inside {
            let g = random::group_element(rng, n, field, DEFAULT_BOUND);
            Flag::alpha(&g)
        } else {
            let g = random::lower_unipotent(rng, n, field, DEFAULT_BOUND);
            let u = random::group_element(rng, n, field, DEFAULT_BOUND);
            let esc = escape_flag(&g).map_err(fail("escape"))?;
            esc.act_matrix(&g).and_then(|f| f.act_matrix(u.matrix())).map_err(fail("act"))?
        };
        let chart = flag.alpha_inverse().is_ok();
        ensure(flag.in_nhat() == chart && chart == inside, || format!("chart membership disagrees (n={n}, {field})"))?;
    }
    for k in 0..200 {
        let n = 3 + k % 4;
        let field = chart_field(n, k / 4);
        let f = Flag::from_matrix(&random::invertible_matrix(rng, field, n, DEFAULT_BOUND)).map_err(fail("flag"))?;
        ensure(f.psi().psi() == f, || format!("psi is not an involution (n={n}, {field})"))?;
        let g: Matrix = random::invertible_matrix(rng, field, n, DEFAULT_BOUND);
        let lhs = f.act_matrix(&g).map_err(fail("act"))?.psi();
        let ginv = g.adjoint().inverse().map_err(fail("inverse"))?;
        let rhs = f.psi().act_matrix(&ginv).map_err(fail("act"))?;
        ensure(lhs == rhs, || format!("psi equivariance (n={n}, {field})"))?;
    }
    Ok("2000 alpha roundtrips, 500 chart memberships, 200 psi checks".into())
}
