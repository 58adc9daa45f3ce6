//! Left-invariant differential forms on N with rational coefficients over the
//! real dual basis, the Maurer–Cartan differential, weights, and the
//! hypothesis check for the pullback identity.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradedaut::GradedMap;
use crate::nilpotent::{grading_info, Algebra, LieElement};
use crate::scalar::{Field, Rational};

/// Largest n accepted by the form constructors.
pub const MAX_N: usize = 8;

type Monomial = u128;

/// A homogeneous left-invariant form Σ a_I θ_I; bit k of a monomial is θ^k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeftInvariantForm {
    n: usize,
    field: Field,
    degree: usize,
    terms: BTreeMap<Monomial, Rational>,
}

/// Degree and weight of a form; `weight` is None for the zero form (−∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedDegree {
    pub degree: usize,
    pub weight: Option<i64>,
}

/// Sign of θ_a ∧ θ_b relative to the sorted monomial, or None if they overlap.
fn wedge_sign(a: Monomial, b: Monomial) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    // count pairs x in a, y in b with x > y
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if y >= 127 { 0 } else { a >> (y + 1) };
        inversions += above.count_ones();
    }
    Some(inversions % 2 == 1)
}

fn bits(m: Monomial) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    let mut rest = m;
    while rest != 0 {
        out.push(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    out
}

type DCache = Mutex<HashMap<(usize, Field), Arc<Vec<Vec<(Monomial, Rational)>>>>>;

/// dθ^k = −Σ_{a<b} c^k_ab θ^a∧θ^b for every basis covector.
fn basis_differentials(n: usize, field: Field) -> Arc<Vec<Vec<(Monomial, Rational)>>> {
    static CACHE: OnceLock<DCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(d) = cache.lock().unwrap().get(&(n, field)) {
        return d.clone();
    }
    let alg = Algebra::get(n, field);
    let dim = alg.dim();
    let mut out: Vec<BTreeMap<Monomial, Rational>> = vec![BTreeMap::new(); dim];
    for a in 0..dim {
        for b in a + 1..dim {
            for (k, c) in alg.bracket_units(a, b) {
                let m: Monomial = (1 << a) | (1 << b);
                *out[*k].entry(m).or_insert_with(Rational::zero) -= c;
            }
        }
    }
    let d = Arc::new(
        out.into_iter()
            .map(|t| t.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect::<Vec<_>>(),
    );
    cache.lock().unwrap().entry((n, field)).or_insert(d).clone()
}

impl LeftInvariantForm {
    pub fn zero(n: usize, field: Field, degree: usize) -> Self {
        LeftInvariantForm { n, field, degree, terms: BTreeMap::new() }
    }

    /// The constant 0-form `c`.
    pub fn constant(n: usize, field: Field, c: Rational) -> Self {
        let mut f = Self::zero(n, field, 0);
        if !c.is_zero() {
            f.terms.insert(0, c);
        }
        f
    }

    /// Basis covector θ^k by real basis index.
    pub fn basis(n: usize, field: Field, k: usize) -> Self {
        let mut f = Self::zero(n, field, 1);
        f.terms.insert(1 << k, Rational::one());
        f
    }

    /// Dual covector to e_c X_ij (1-based i < j).
    pub fn theta(n: usize, field: Field, i: usize, j: usize, c: usize) -> Self {
        let k = Algebra::get(n, field).index(i, j, c);
        Self::basis(n, field, k)
    }

    /// θ_I for a list of basis indices, in the given order.
    pub fn monomial(n: usize, field: Field, indices: &[usize]) -> Self {
        let mut f = Self::constant(n, field, Rational::one());
        for &k in indices {
            f = f.wedge(&Self::basis(n, field, k));
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as (sorted basis indices, coefficient).
    pub fn terms(&self) -> Vec<(Vec<usize>, Rational)> {
        self.terms.iter().map(|(m, c)| (bits(*m), c.clone())).collect()
    }

    pub fn from_terms(n: usize, field: Field, degree: usize, terms: &[(Vec<usize>, Rational)]) -> Result<Self> {
        let dim = Algebra::get(n, field).dim();
        let mut f = Self::zero(n, field, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::InvalidInput(format!("monomial {idx:?} is not of degree {degree}")));
            }
            if idx.iter().any(|&k| k >= dim) {
                return Err(Error::IndexOutOfRange(format!("monomial {idx:?}")));
            }
            let mono = Self::monomial(n, field, idx).scale(c);
            f = f.add(&mono)?;
        }
        Ok(f)
    }

    pub fn coefficient(&self, indices: &[usize]) -> Rational {
        let m: Monomial = indices.iter().fold(0, |acc, k| acc | (1 << k));
        self.terms.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    fn same_algebra(&self, other: &Self) -> Result<()> {
        if (self.n, self.field) != (other.n, other.field) {
            return Err(Error::DimensionMismatch("forms live on different algebras".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::DimensionMismatch(format!("adding forms of degree {} and {}", self.degree, other.degree)));
        }
        let mut out = if self.is_zero() { other.clone() } else { self.clone() };
        if self.is_zero() {
            return Ok(out);
        }
        for (m, c) in &other.terms {
            add_term(&mut out.terms, *m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero(self.n, self.field, self.degree);
        if r.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(m, c)| (*m, c * r)).collect();
        out
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Self {
        self.same_algebra(other).expect("same algebra");
        let mut out = Self::zero(self.n, self.field, self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(neg) = wedge_sign(*a, *b) {
                    let v = ca * cb;
                    add_term(&mut out.terms, a | b, if neg { -v } else { v });
                }
            }
        }
        out
    }

    /// Exterior derivative via Maurer–Cartan and the Leibniz rule.
    pub fn d(&self) -> Self {
        let dtheta = basis_differentials(self.n, self.field);
        let mut out = Self::zero(self.n, self.field, self.degree + 1);
        for (m, c) in &self.terms {
            for (s, p) in bits(*m).into_iter().enumerate() {
                let lower = *m & ((1u128 << p) - 1);
                let upper = *m & !((1u128 << p) | ((1u128 << p) - 1));
                for (dm, dc) in &dtheta[p] {
                    let Some(s1) = wedge_sign(lower, *dm) else { continue };
                    let Some(s2) = wedge_sign(lower | dm, upper) else { continue };
                    let neg = (s % 2 == 1) ^ s1 ^ s2;
                    let v = c * dc;
                    add_term(&mut out.terms, lower | dm | upper, if neg { -v } else { v });
                }
            }
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.d().is_zero()
    }

    pub fn weighted_degree(&self) -> WeightedDegree {
        let alg = Algebra::get(self.n, self.field);
        let weight = self
            .terms
            .keys()
            .map(|m| -(bits(*m).into_iter().map(|k| alg.layer(k) as i64).sum::<i64>()))
            .max();
        WeightedDegree { degree: self.degree, weight }
    }

    /// Interior product with a vector of 𝔫.
    pub fn interior(&self, x: &LieElement) -> Self {
        let mut out = Self::zero(self.n, self.field, self.degree.saturating_sub(1));
        for (m, c) in &self.terms {
            for (s, p) in bits(*m).into_iter().enumerate() {
                let xp = &x.coords()[p];
                if xp.is_zero() {
                    continue;
                }
                let v = c * xp;
                add_term(&mut out.terms, *m & !(1u128 << p), if s % 2 == 1 { -v } else { v });
            }
        }
        out
    }

    /// Pullback through a linear self-map L of 𝔫: (L^*θ^k)(X) = θ^k(L X).
    pub fn pullback(&self, map: &GradedMap) -> Result<Self> {
        if (map.n, map.field) != (self.n, self.field) {
            return Err(Error::DimensionMismatch("map and form live on different algebras".into()));
        }
        let full = map.full_matrix()?;
        let dim = full.len();
        let images: Vec<Vec<(usize, Rational)>> = (0..dim)
            .map(|k| full[k].iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(b, v)| (b, v.clone())).collect())
            .collect();
        let mut out = Self::zero(self.n, self.field, self.degree);
        for (m, c) in &self.terms {
            // expand the wedge of pulled-back covectors factor by factor
            let mut partial: BTreeMap<Monomial, Rational> = BTreeMap::new();
            partial.insert(0, c.clone());
            for p in bits(*m) {
                let mut next = BTreeMap::new();
                for (pm, pc) in &partial {
                    for (b, v) in &images[p] {
                        let bm = 1u128 << b;
                        if let Some(neg) = wedge_sign(*pm, bm) {
                            let val = pc * v;
                            add_term(&mut next, pm | bm, if neg { -val } else { val });
                        }
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            for (pm, pc) in partial {
                add_term(&mut out.terms, pm, pc);
            }
        }
        Ok(out)
    }

    /// Coefficient against the volume form θ^1∧…∧θ^N (0 unless top degree).
    pub fn top_coefficient(&self) -> Rational {
        let dim = Algebra::get(self.n, self.field).dim();
        let full: Monomial = if dim == 128 { u128::MAX } else { (1u128 << dim) - 1 };
        self.terms.get(&full).cloned().unwrap_or_else(Rational::zero)
    }
}

fn add_term(terms: &mut BTreeMap<Monomial, Rational>, m: Monomial, v: Rational) {
    if v.is_zero() {
        return;
    }
    match terms.entry(m) {
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += v;
            if e.get().is_zero() {
                e.remove();
            }
        }
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(v);
        }
    }
}

impl fmt::Display for LeftInvariantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let alg = Algebra::get(self.n, self.field);
        let names = ["", "i", "j", "k"];
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mono: Vec<String> = bits(*m)
                    .into_iter()
                    .map(|k| {
                        let e = alg.basis[k];
                        format!("θ{}{}{}", names[e.c], e.i + 1, e.j + 1)
                    })
                    .collect();
                if mono.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}·{}", mono.join("∧"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_N).contains(&n) {
        return Err(Error::UnsupportedRange(format!("form constructors need 2 <= n <= {MAX_N}, got {n}")));
    }
    Ok(())
}

/// All real components of position (s, t), wedged in component order.
fn block(n: usize, field: Field, s: usize, t: usize) -> Vec<usize> {
    let alg = Algebra::get(n, field);
    (0..field.real_dim()).map(|c| alg.index(s, t, c)).collect()
}

fn wedge_blocks(n: usize, field: Field, pairs: &[(usize, usize)]) -> LeftInvariantForm {
    let idx: Vec<usize> = pairs.iter().flat_map(|&(s, t)| block(n, field, s, t)).collect();
    LeftInvariantForm::monomial(n, field, &idx)
}

/// ω_+ = ∧_{2≤s≤n} (all components of θ_{1s}).
pub fn omega_plus(n: usize, field: Field) -> Result<LeftInvariantForm> {
    check_n(n)?;
    Ok(wedge_blocks(n, field, &(2..=n).map(|s| (1, s)).collect::<Vec<_>>()))
}

/// ω_- = ∧_{s=n-1..1} (all components of θ_{sn}).
pub fn omega_minus(n: usize, field: Field) -> Result<LeftInvariantForm> {
    check_n(n)?;
    Ok(wedge_blocks(n, field, &(1..n).rev().map(|s| (s, n)).collect::<Vec<_>>()))
}

/// η_- = ∧_{2≤s<t≤n} (all components of θ_st).
pub fn eta_minus(n: usize, field: Field) -> Result<LeftInvariantForm> {
    check_n(n)?;
    let pairs: Vec<(usize, usize)> = (2..=n).flat_map(|s| (s + 1..=n).map(move |t| (s, t))).collect();
    Ok(wedge_blocks(n, field, &pairs))
}

/// η_+ = ∧_{1≤s<t≤n-1} (all components of θ_st).
pub fn eta_plus(n: usize, field: Field) -> Result<LeftInvariantForm> {
    check_n(n)?;
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|s| (s + 1..n).map(move |t| (s, t))).collect();
    Ok(wedge_blocks(n, field, &pairs))
}

/// η_{k-} = ∧ θ_ij over 2≤i<j≤n, (i,j) ≠ (k,k+1), for 2 ≤ k ≤ n-1.
pub fn eta_k_minus(n: usize, k: usize) -> Result<LeftInvariantForm> {
    check_n(n)?;
    if !(2..n).contains(&k) {
        return Err(Error::IndexOutOfRange(format!("eta_k_minus needs 2 <= k <= {}, got {k}", n - 1)));
    }
    let pairs: Vec<(usize, usize)> =
        (2..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).filter(|&p| p != (k, k + 1)).collect();
    Ok(wedge_blocks(n, Field::R, &pairs))
}

/// η_{k+} = ∧ θ_ij over 1≤i<j≤n-1, (i,j) ≠ (k,k+1), for 1 ≤ k ≤ n-2.
pub fn eta_k_plus(n: usize, k: usize) -> Result<LeftInvariantForm> {
    check_n(n)?;
    if k == 0 || k + 2 > n {
        return Err(Error::IndexOutOfRange(format!("eta_k_plus needs 1 <= k <= {}, got {k}", n.saturating_sub(2))));
    }
    let pairs: Vec<(usize, usize)> =
        (1..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&p| p != (k, k + 1)).collect();
    Ok(wedge_blocks(n, Field::R, &pairs))
}

pub fn quaternion_omega_plus(n: usize) -> Result<LeftInvariantForm> {
    omega_plus(n, Field::H)
}

pub fn quaternion_omega_minus(n: usize) -> Result<LeftInvariantForm> {
    omega_minus(n, Field::H)
}

pub fn quaternion_eta_minus(n: usize) -> Result<LeftInvariantForm> {
    eta_minus(n, Field::H)
}

pub fn quaternion_eta_plus(n: usize) -> Result<LeftInvariantForm> {
    eta_plus(n, Field::H)
}

/// The n = 4 real basis X0=X23, X1=X12, X2=X34, Y1=X13, Y2=-X24, Z=X14 and its dual
/// forms α0, α1, α2, β1, β2, γ.
pub struct N4Basis {
    pub alpha0: LeftInvariantForm,
    pub alpha1: LeftInvariantForm,
    pub alpha2: LeftInvariantForm,
    pub beta1: LeftInvariantForm,
    pub beta2: LeftInvariantForm,
    pub gamma: LeftInvariantForm,
}

pub fn n4_basis() -> N4Basis {
    let t = |i, j| LeftInvariantForm::theta(4, Field::R, i, j, 0);
    N4Basis {
        alpha0: t(2, 3),
        alpha1: t(1, 2),
        alpha2: t(3, 4),
        beta1: t(1, 3),
        beta2: t(2, 4).neg(),
        gamma: t(1, 4),
    }
}

/// ω = α1∧β1∧γ.
pub fn n4_omega() -> LeftInvariantForm {
    let b = n4_basis();
    b.alpha1.wedge(&b.beta1).wedge(&b.gamma)
}

/// The four 2-forms α2∧β2, α0∧β2, α1∧β1, α0∧β1 paired with ω.
pub fn n4_etas() -> Vec<(&'static str, LeftInvariantForm)> {
    let b = n4_basis();
    vec![
        ("alpha2^beta2", b.alpha2.wedge(&b.beta2)),
        ("alpha0^beta2", b.alpha0.wedge(&b.beta2)),
        ("alpha1^beta1", b.alpha1.wedge(&b.beta1)),
        ("alpha0^beta1", b.alpha0.wedge(&b.beta1)),
    ]
}

/// Verdicts for deg α + deg β = N − 1, wt α + wt β ≤ −ν + 1 and closedness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub deg_ok: bool,
    pub wt_ok: bool,
    pub wt_equal: bool,
    pub closed_ok: bool,
    pub big_n: usize,
    pub nu: usize,
    pub deg_alpha: usize,
    pub deg_beta: usize,
    pub wt_alpha: Option<i64>,
    pub wt_beta: Option<i64>,
}

impl PullbackReport {
    pub fn all_ok(&self) -> bool {
        self.deg_ok && self.wt_ok && self.closed_ok
    }
}

pub fn check_pullback_hypotheses(alpha: &LeftInvariantForm, beta: &LeftInvariantForm) -> Result<PullbackReport> {
    alpha.same_algebra(beta)?;
    let g = grading_info(alpha.n, alpha.field)?;
    let wa = alpha.weighted_degree();
    let wb = beta.weighted_degree();
    let target = 1 - g.nu as i64;
    let sum = match (wa.weight, wb.weight) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    Ok(PullbackReport {
        deg_ok: wa.degree + wb.degree + 1 == g.ndim,
        wt_ok: sum.map_or(true, |s| s <= target),
        wt_equal: sum == Some(target),
        closed_ok: alpha.is_closed() && beta.is_closed(),
        big_n: g.ndim,
        nu: g.nu,
        deg_alpha: wa.degree,
        deg_beta: wb.degree,
        wt_alpha: wa.weight,
        wt_beta: wb.weight,
    })
}

/// Parse a form expression: atoms joined by `^`.
///
/// Atoms: `omega_plus`, `omega_minus`, `eta_minus`, `eta_plus`, `eta_K_minus`,
/// `eta_K_plus`, `theta_I_J` or `theta_I_J_C`, `i_I_J_C(ATOM)` for an interior
/// product, the n = 4 names `alpha0 alpha1 alpha2 beta1 beta2 gamma n4_omega`,
/// and an integer constant.
pub fn parse_form(n: usize, field: Field, expr: &str) -> Result<LeftInvariantForm> {
    let mut out: Option<LeftInvariantForm> = None;
    for atom in split_top(expr, '^') {
        let f = parse_atom(n, field, atom.trim())?;
        out = Some(match out {
            None => f,
            Some(acc) => acc.wedge(&f),
        });
    }
    out.ok_or_else(|| Error::Parse("empty form expression".into()))
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| Error::Parse(format!("expected an index, got {s:?}")))
}

fn parse_atom(n: usize, field: Field, atom: &str) -> Result<LeftInvariantForm> {
    if let Some(rest) = atom.strip_prefix("i_") {
        let open = rest.find('(').ok_or_else(|| Error::Parse(format!("bad interior product {atom:?}")))?;
        let inner = rest[open + 1..].strip_suffix(')').ok_or_else(|| Error::Parse(format!("unbalanced {atom:?}")))?;
        let idx: Vec<&str> = rest[..open].split('_').collect();
        let (i, j, c) = match idx.as_slice() {
            [i, j] => (parse_usize(i)?, parse_usize(j)?, 0),
            [i, j, c] => (parse_usize(i)?, parse_usize(j)?, parse_usize(c)?),
            _ => return Err(Error::Parse(format!("bad interior product {atom:?}"))),
        };
        check_basis(n, field, i, j, c)?;
        let form = parse_form(n, field, inner)?;
        return Ok(form.interior(&LieElement::unit(n, field, i, j, c)));
    }
    let n4 = |f: fn(N4Basis) -> LeftInvariantForm| -> Result<LeftInvariantForm> {
        if n != 4 || field != Field::R {
            return Err(Error::InvalidInput(format!("{atom} is only defined for n = 4 over R")));
        }
        Ok(f(n4_basis()))
    };
    match atom {
        "omega_plus" => return omega_plus(n, field),
        "omega_minus" => return omega_minus(n, field),
        "eta_minus" => return eta_minus(n, field),
        "eta_plus" => return eta_plus(n, field),
        "alpha0" => return n4(|b| b.alpha0),
        "alpha1" => return n4(|b| b.alpha1),
        "alpha2" => return n4(|b| b.alpha2),
        "beta1" => return n4(|b| b.beta1),
        "beta2" => return n4(|b| b.beta2),
        "gamma" => return n4(|b| b.gamma),
        "n4_omega" => return n4(|_| n4_omega()),
        _ => {}
    }
    if let Ok(c) = atom.parse::<i64>() {
        return Ok(LeftInvariantForm::constant(n, field, Rational::from_integer(c.into())));
    }
    let parts: Vec<&str> = atom.split('_').collect();
    match parts.as_slice() {
        ["eta", k, "minus"] => {
            require_real(field, atom)?;
            eta_k_minus(n, parse_usize(k)?)
        }
        ["eta", k, "plus"] => {
            require_real(field, atom)?;
            eta_k_plus(n, parse_usize(k)?)
        }
        ["theta", i, j] => {
            let (i, j) = (parse_usize(i)?, parse_usize(j)?);
            check_basis(n, field, i, j, 0)?;
            Ok(LeftInvariantForm::theta(n, field, i, j, 0))
        }
        ["theta", i, j, c] => {
            let (i, j, c) = (parse_usize(i)?, parse_usize(j)?, parse_usize(c)?);
            check_basis(n, field, i, j, c)?;
            Ok(LeftInvariantForm::theta(n, field, i, j, c))
        }
        _ => Err(Error::Parse(format!("unknown form {atom:?}"))),
    }
}

fn require_real(field: Field, atom: &str) -> Result<()> {
    if field != Field::R {
        return Err(Error::InvalidInput(format!("{atom} is defined over R only")));
    }
    Ok(())
}

fn check_basis(n: usize, field: Field, i: usize, j: usize, c: usize) -> Result<()> {
    if !(1 <= i && i < j && j <= n && c < field.real_dim()) {
        return Err(Error::IndexOutOfRange(format!("basis element ({i},{j},{c}) for n={n} over {field}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilpotent::tau_map;
    use crate::scalar::rat_int;

    fn th(n: usize, i: usize, j: usize) -> LeftInvariantForm {
        LeftInvariantForm::theta(n, Field::R, i, j, 0)
    }

    #[test]
    fn maurer_cartan_examples() {
        assert!(th(3, 1, 2).d().is_zero());
        assert_eq!(th(3, 1, 3).d(), th(3, 1, 2).wedge(&th(3, 2, 3)).neg());
    }

    #[test]
    fn wedge_rules() {
        assert!(th(3, 1, 2).wedge(&th(3, 1, 2)).is_zero());
        assert_eq!(th(3, 1, 2).wedge(&th(3, 2, 3)), th(3, 2, 3).wedge(&th(3, 1, 2)).neg());
        assert_eq!(th(4, 1, 2).wedge(&th(4, 1, 4)).weighted_degree().weight, Some(-4));
    }

    #[test]
    fn weights() {
        let w = omega_plus(4, Field::R).unwrap().weighted_degree();
        assert_eq!(w, WeightedDegree { degree: 3, weight: Some(-6) });
        assert_eq!(LeftInvariantForm::zero(4, Field::R, 2).weighted_degree().weight, None);
        assert_eq!(th(4, 1, 2).weighted_degree(), WeightedDegree { degree: 1, weight: Some(-1) });
    }

    #[test]
    fn n4_structure_equations() {
        let b = n4_basis();
        assert!(b.alpha0.d().is_zero() && b.alpha1.d().is_zero() && b.alpha2.d().is_zero());
        assert_eq!(b.beta1.d(), b.alpha0.wedge(&b.alpha1));
        assert_eq!(b.beta2.d(), b.alpha0.wedge(&b.alpha2));
        assert_eq!(b.gamma.d(), b.alpha1.wedge(&b.beta2).add(&b.alpha2.wedge(&b.beta1)).unwrap());
    }

    #[test]
    fn quaternion_d_alpha() {
        let t = |i, j, c| LeftInvariantForm::theta(3, Field::H, i, j, c);
        let mut expect = t(1, 2, 0).wedge(&t(2, 3, 0)).neg();
        for c in 1..4 {
            expect = expect.add(&t(1, 2, c).wedge(&t(2, 3, c))).unwrap();
        }
        assert_eq!(t(1, 3, 0).d(), expect);
    }

    #[test]
    fn pullback_pair_n4() {
        let r = check_pullback_hypotheses(&omega_plus(4, Field::R).unwrap(), &eta_k_minus(4, 2).unwrap()).unwrap();
        assert!(r.all_ok() && r.wt_equal);
        assert_eq!((r.deg_alpha, r.deg_beta, r.wt_alpha, r.wt_beta), (3, 2, Some(-6), Some(-3)));
        let etas = n4_etas();
        let r = check_pullback_hypotheses(&n4_omega(), &etas[0].1).unwrap();
        assert!(r.all_ok());
        let r = check_pullback_hypotheses(&th(4, 1, 2), &th(4, 1, 2)).unwrap();
        assert!(!r.deg_ok);
    }

    #[test]
    fn tau_swaps_eta_families() {
        let n = 5;
        let t = tau_map(n, Field::R).unwrap();
        for k in 2..n {
            let img = eta_k_minus(n, k).unwrap().pullback(&t).unwrap();
            let target = eta_k_plus(n, n - k).unwrap();
            assert!(img == target || img == target.neg());
        }
        let img = omega_plus(n, Field::R).unwrap().pullback(&t).unwrap();
        let target = omega_minus(n, Field::R).unwrap();
        assert!(img == target || img == target.neg());
    }

    #[test]
    fn interior_of_basis() {
        let f = th(3, 1, 2).wedge(&th(3, 2, 3));
        assert_eq!(f.interior(&LieElement::x(3, Field::R, 2, 3)), th(3, 1, 2).neg());
        assert_eq!(f.interior(&LieElement::x(3, Field::R, 1, 2)), th(3, 2, 3));
    }

    #[test]
    fn parse_and_range_errors() {
        let f = parse_form(5, Field::R, "omega_plus").unwrap();
        assert_eq!(f, omega_plus(5, Field::R).unwrap());
        assert!(parse_form(5, Field::R, "eta_1_minus").is_err());
        assert!(eta_k_plus(4, 3).is_err());
        let g = parse_form(3, Field::H, "i_2_3_1(eta_minus)").unwrap();
        assert_eq!(g.degree(), 3);
        assert_eq!(parse_form(4, Field::R, "2").unwrap().coefficient(&[]), rat_int(2));
    }
}
