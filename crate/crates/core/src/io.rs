//! JSON encodings of the library types.
//!
//! Rationals are strings "p/q" (or "p"), complex scalars {"re", "im"},
//! quaternions {"a0", "a1", "a2", "a3"}. Matrices are dense row-major lists of
//! rows. Decoders report the JSON path of the offending value.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::flag::{Flag, GrassmannPoint, ProjElement};
use crate::forms::{LeftInvariantForm, PullbackReport};
use crate::gradedaut::{AutCertificate, GradedMap};
use crate::matrix::rat::RatMatrix;
use crate::matrix::Matrix;
use crate::nilpotent::{FieldAut, GroupElement, LieElement};
use crate::pansu::{BumpSpec, GridSpec, Poly, PolyMapSpec, ResidualReport};
use crate::scalar::{parse_rational, Field, Rational, Scalar};

fn bad(path: &str, what: &str) -> Error {
    Error::Parse(format!("at {path}: {what}"))
}

fn get<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(path, &format!("missing field {key:?}")))
}

fn sub(path: &str, key: &str) -> String {
    format!("{path}.{key}")
}

fn idx(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(path, "expected a non-negative integer"))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn rational_from_json(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|_| bad(path, &format!("bad rational {s:?}"))),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => Err(bad(path, "numbers must be integers; write fractions as \"p/q\"")),
        },
        _ => Err(bad(path, "expected a rational")),
    }
}

pub fn field_to_json(field: Field) -> Value {
    Value::String(field.to_string())
}

pub fn field_from_json(v: &Value, path: &str) -> Result<Field> {
    v.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad(path, "expected \"R\", \"C\" or \"H\""))
}

pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Real(r) => rational_to_json(r),
        Scalar::Complex { re, im } => json!({"re": rational_to_json(re), "im": rational_to_json(im)}),
        Scalar::Quaternion(a) => json!({
            "a0": rational_to_json(&a[0]),
            "a1": rational_to_json(&a[1]),
            "a2": rational_to_json(&a[2]),
            "a3": rational_to_json(&a[3]),
        }),
    }
}

/// Missing components default to 0, and a bare rational is accepted for every field.
pub fn scalar_from_json(field: Field, v: &Value, path: &str) -> Result<Scalar> {
    if !v.is_object() {
        return Ok(Scalar::from_rational(field, rational_from_json(v, path)?));
    }
    let keys: &[&str] = match field {
        Field::R => return Err(bad(path, "real scalars are plain rationals")),
        Field::C => &["re", "im"],
        Field::H => &["a0", "a1", "a2", "a3"],
    };
    let obj = v.as_object().expect("object");
    if let Some(k) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(bad(path, &format!("unexpected component {k:?} for field {field}")));
    }
    let comps = keys
        .iter()
        .map(|k| obj.get(*k).map_or(Ok(Rational::from_integer(0.into())), |x| rational_from_json(x, &sub(path, k))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scalar::from_components(field, &comps))
}

pub fn vector_to_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar_to_json).collect())
}

pub fn vector_from_json(field: Field, v: &Value, path: &str) -> Result<Vec<Scalar>> {
    as_array(v, path)?.iter().enumerate().map(|(i, x)| scalar_from_json(field, x, &idx(path, i))).collect()
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vector_to_json(r)).collect())
}

pub fn matrix_from_json(field: Field, v: &Value, path: &str) -> Result<Matrix> {
    let rows = as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, r)| vector_from_json(field, r, &idx(path, i)))
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(field, rows).map_err(|e| bad(path, &e.to_string()))
}

pub fn rat_matrix_to_json(m: &RatMatrix) -> Value {
    Value::Array(m.iter().map(|r| Value::Array(r.iter().map(rational_to_json).collect())).collect())
}

pub fn rat_matrix_from_json(v: &Value, path: &str) -> Result<RatMatrix> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = idx(path, i);
            as_array(r, &p)?.iter().enumerate().map(|(j, x)| rational_from_json(x, &idx(&p, j))).collect()
        })
        .collect()
}

/// Reads `n` and `field` from an object.
pub fn header(v: &Value, path: &str) -> Result<(usize, Field)> {
    let n = as_usize(get(v, "n", path)?, &sub(path, "n"))?;
    let field = field_from_json(get(v, "field", path)?, &sub(path, "field"))?;
    Ok((n, field))
}

fn with_header(n: usize, field: Field, mut rest: Map<String, Value>) -> Value {
    rest.insert("n".into(), json!(n));
    rest.insert("field".into(), field_to_json(field));
    Value::Object(rest)
}

/// Sparse list of {i, j, c, value}, 1-based i, j.
pub fn lie_element_to_json(x: &LieElement) -> Value {
    let alg = x.algebra();
    let terms: Vec<Value> = alg
        .basis
        .iter()
        .zip(x.coords())
        .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
        .map(|(e, v)| json!({"i": e.i + 1, "j": e.j + 1, "c": e.c, "value": rational_to_json(v)}))
        .collect();
    let mut m = Map::new();
    m.insert("terms".into(), Value::Array(terms));
    with_header(x.n(), x.field(), m)
}

pub fn lie_element_from_json(v: &Value, path: &str) -> Result<LieElement> {
    let (n, field) = header(v, path)?;
    let mut x = LieElement::zero(n, field);
    let tp = sub(path, "terms");
    for (k, t) in as_array(get(v, "terms", path)?, &tp)?.iter().enumerate() {
        let p = idx(&tp, k);
        let i = as_usize(get(t, "i", &p)?, &sub(&p, "i"))?;
        let j = as_usize(get(t, "j", &p)?, &sub(&p, "j"))?;
        let c = t.get("c").map_or(Ok(0), |c| as_usize(c, &sub(&p, "c")))?;
        if i < 1 || i >= j || j > n || c >= field.real_dim() {
            return Err(bad(&p, &format!("no basis element X_{i}{j} component {c} in n = {n} over {field}")));
        }
        let val = rational_from_json(get(t, "value", &p)?, &sub(&p, "value"))?;
        x = x.add(&LieElement::unit(n, field, i, j, c).scale(&val));
    }
    Ok(x)
}

pub fn group_element_to_json(g: &GroupElement) -> Value {
    let mut m = Map::new();
    m.insert("matrix".into(), matrix_to_json(g.matrix()));
    with_header(g.n(), g.field(), m)
}

pub fn group_element_from_json(v: &Value, path: &str) -> Result<GroupElement> {
    let (_, field) = header(v, path)?;
    let m = matrix_from_json(field, get(v, "matrix", path)?, &sub(path, "matrix"))?;
    GroupElement::from_matrix(m).map_err(|e| bad(path, &e.to_string()))
}

pub fn flag_to_json(f: &Flag) -> Value {
    let mut m = Map::new();
    m.insert("matrix".into(), matrix_to_json(f.matrix()));
    with_header(f.n(), f.field(), m)
}

pub fn flag_from_json(v: &Value, path: &str) -> Result<Flag> {
    let (n, field) = header(v, path)?;
    let m = matrix_from_json(field, get(v, "matrix", path)?, &sub(path, "matrix"))?;
    if m.rows() != n || m.cols() != n {
        return Err(bad(path, &format!("flag matrix must be {n}x{n}")));
    }
    Flag::from_matrix(&m).map_err(|e| bad(path, &e.to_string()))
}

pub fn grassmann_to_json(p: &GrassmannPoint) -> Value {
    let mut m = Map::new();
    m.insert("j".into(), json!(p.dim()));
    m.insert("matrix".into(), matrix_to_json(p.matrix()));
    with_header(p.n(), p.field(), m)
}

pub fn grassmann_from_json(v: &Value, path: &str) -> Result<GrassmannPoint> {
    let (n, field) = header(v, path)?;
    let m = matrix_from_json(field, get(v, "matrix", path)?, &sub(path, "matrix"))?;
    if m.rows() != n {
        return Err(bad(path, &format!("basis needs {n} rows")));
    }
    let p = GrassmannPoint::from_matrix(&m).map_err(|e| bad(path, &e.to_string()))?;
    if let Some(j) = v.get("j") {
        if as_usize(j, &sub(path, "j"))? != p.dim() {
            return Err(bad(&sub(path, "j"), "does not match the rank of the basis"));
        }
    }
    Ok(p)
}

pub fn proj_to_json(g: &ProjElement) -> Value {
    let mut m = Map::new();
    m.insert("matrix".into(), matrix_to_json(g.matrix()));
    with_header(g.n(), g.field(), m)
}

pub fn proj_from_json(v: &Value, path: &str) -> Result<ProjElement> {
    let (_, field) = header(v, path)?;
    let m = matrix_from_json(field, get(v, "matrix", path)?, &sub(path, "matrix"))?;
    ProjElement::new(&m).map_err(|e| bad(path, &e.to_string()))
}

/// "id", "conj", or {"lambda", "mu", "nu"} for a quaternion automorphism.
pub fn field_aut_to_json(h: &FieldAut) -> Value {
    match h {
        FieldAut::Identity => json!("id"),
        FieldAut::ComplexConjugation => json!("conj"),
        FieldAut::Quaternion { lambda, mu, nu } => {
            json!({"lambda": scalar_to_json(lambda), "mu": scalar_to_json(mu), "nu": scalar_to_json(nu)})
        }
    }
}

pub fn field_aut_from_json(field: Field, v: &Value, path: &str) -> Result<FieldAut> {
    let h = match v {
        Value::String(s) if s == "id" => FieldAut::Identity,
        Value::String(s) if s == "conj" => FieldAut::ComplexConjugation,
        Value::Object(_) => {
            let l = scalar_from_json(Field::H, get(v, "lambda", path)?, &sub(path, "lambda"))?;
            let m = scalar_from_json(Field::H, get(v, "mu", path)?, &sub(path, "mu"))?;
            let h = FieldAut::quaternion(l, m).map_err(|e| bad(path, &e.to_string()))?;
            if let Some(nu) = v.get("nu") {
                let FieldAut::Quaternion { nu: expect, .. } = &h else { unreachable!() };
                if &scalar_from_json(Field::H, nu, &sub(path, "nu"))? != expect {
                    return Err(bad(&sub(path, "nu"), "nu must equal lambda * mu"));
                }
            }
            h
        }
        _ => return Err(bad(path, "expected \"id\", \"conj\" or {\"lambda\", \"mu\"}")),
    };
    h.check(field).map_err(|e| bad(path, &e.to_string()))?;
    Ok(h)
}

pub fn certificate_to_json(c: &AutCertificate) -> Value {
    json!({
        "epsilon": c.epsilon,
        "lambda": vector_to_json(&c.lambda),
        "h": field_aut_to_json(&c.h),
    })
}

pub fn certificate_from_json(field: Field, v: &Value, path: &str) -> Result<AutCertificate> {
    let epsilon = match get(v, "epsilon", path)?.as_u64() {
        Some(e @ (0 | 1)) => e as u8,
        _ => return Err(bad(&sub(path, "epsilon"), "expected 0 or 1")),
    };
    let lambda = vector_from_json(field, get(v, "lambda", path)?, &sub(path, "lambda"))?;
    let h = match v.get("h") {
        Some(h) => field_aut_from_json(field, h, &sub(path, "h"))?,
        None => FieldAut::Identity,
    };
    Ok(AutCertificate { epsilon, lambda, h })
}

/// {n, field, v1}: the first layer block, one column per V1 basis element.
pub fn graded_map_to_json(m: &GradedMap) -> Value {
    let mut o = Map::new();
    o.insert("v1".into(), rat_matrix_to_json(&m.v1));
    with_header(m.n, m.field, o)
}

pub fn graded_map_from_json(v: &Value, path: &str) -> Result<GradedMap> {
    let (n, field) = header(v, path)?;
    let v1 = rat_matrix_from_json(get(v, "v1", path)?, &sub(path, "v1"))?;
    GradedMap::from_v1(n, field, v1).map_err(|e| bad(path, &e.to_string()))
}

/// {n, field, degree, terms: [{indices, coeff}]} with 0-based basis indices.
pub fn form_to_json(f: &LeftInvariantForm) -> Value {
    let terms: Vec<Value> =
        f.terms().iter().map(|(i, c)| json!({"indices": i, "coeff": rational_to_json(c)})).collect();
    let mut o = Map::new();
    o.insert("degree".into(), json!(f.degree()));
    o.insert("terms".into(), Value::Array(terms));
    with_header(f.n(), f.field(), o)
}

pub fn form_from_json(v: &Value, path: &str) -> Result<LeftInvariantForm> {
    let (n, field) = header(v, path)?;
    let degree = as_usize(get(v, "degree", path)?, &sub(path, "degree"))?;
    let tp = sub(path, "terms");
    let terms = as_array(get(v, "terms", path)?, &tp)?
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = idx(&tp, k);
            let ip = sub(&p, "indices");
            let indices = as_array(get(t, "indices", &p)?, &ip)?
                .iter()
                .enumerate()
                .map(|(q, x)| as_usize(x, &idx(&ip, q)))
                .collect::<Result<Vec<_>>>()?;
            Ok((indices, rational_from_json(get(t, "coeff", &p)?, &sub(&p, "coeff"))?))
        })
        .collect::<Result<Vec<_>>>()?;
    LeftInvariantForm::from_terms(n, field, degree, &terms).map_err(|e| bad(path, &e.to_string()))
}

pub fn pullback_report_to_json(r: &PullbackReport) -> Value {
    serde_json::to_value(r).expect("plain data")
}

/// {n, field, coords: [[{exp: [...], coeff}]]}, one term list per exponential coordinate.
pub fn map_spec_to_json(f: &PolyMapSpec) -> Value {
    let coords: Vec<Value> = f
        .coords
        .iter()
        .map(|p| Value::Array(p.terms().map(|(e, c)| json!({"exp": e, "coeff": rational_to_json(c)})).collect()))
        .collect();
    let mut o = Map::new();
    o.insert("coords".into(), Value::Array(coords));
    with_header(f.n, f.field, o)
}

pub fn map_spec_from_json(v: &Value, path: &str) -> Result<PolyMapSpec> {
    let (n, field) = header(v, path)?;
    let dim = crate::nilpotent::grading_info(n, field).map_err(|e| bad(path, &e.to_string()))?.ndim;
    let cp = sub(path, "coords");
    let coords = as_array(get(v, "coords", path)?, &cp)?
        .iter()
        .enumerate()
        .map(|(k, terms)| {
            let p = idx(&cp, k);
            let terms = as_array(terms, &p)?
                .iter()
                .enumerate()
                .map(|(q, t)| {
                    let tp = idx(&p, q);
                    let ep = sub(&tp, "exp");
                    let exp = as_array(get(t, "exp", &tp)?, &ep)?
                        .iter()
                        .enumerate()
                        .map(|(r, x)| {
                            x.as_u64().and_then(|e| u32::try_from(e).ok()).ok_or_else(|| bad(&idx(&ep, r), "bad exponent"))
                        })
                        .collect::<Result<Vec<u32>>>()?;
                    if exp.len() != dim {
                        return Err(bad(&ep, &format!("exponent vector needs {dim} entries")));
                    }
                    Ok((exp, rational_from_json(get(t, "coeff", &tp)?, &sub(&tp, "coeff"))?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Poly::from_terms(dim, terms))
        })
        .collect::<Result<Vec<_>>>()?;
    PolyMapSpec::new(n, field, coords).map_err(|e| bad(path, &e.to_string()))
}

fn rat_list(v: &Value, path: &str) -> Result<Vec<Rational>> {
    as_array(v, path)?.iter().enumerate().map(|(i, x)| rational_from_json(x, &idx(path, i))).collect()
}

pub fn bump_from_json(v: &Value, path: &str) -> Result<BumpSpec> {
    Ok(BumpSpec {
        center: rat_list(get(v, "center", path)?, &sub(path, "center"))?,
        half_widths: rat_list(get(v, "half_widths", path)?, &sub(path, "half_widths"))?,
    })
}

/// {lo, hi, cells, halvings}; `lo`, `hi` default to the bump support.
pub fn grid_from_json(v: &Value, bump: &BumpSpec, path: &str) -> Result<GridSpec> {
    let cells = v.get("cells").map_or(Ok(2), |c| as_usize(c, &sub(path, "cells")))?;
    let halvings = v.get("halvings").map_or(Ok(3), |c| as_usize(c, &sub(path, "halvings")))?;
    let mut grid = bump.support_grid(cells, halvings);
    if let Some(lo) = v.get("lo") {
        grid.lo = rat_list(lo, &sub(path, "lo"))?;
    }
    if let Some(hi) = v.get("hi") {
        grid.hi = rat_list(hi, &sub(path, "hi"))?;
    }
    Ok(grid)
}

/// f64 values without a finite representation become null.
fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn residual_report_to_json(r: &ResidualReport) -> Value {
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            let mut o = Map::new();
            o.insert("h".into(), rational_to_json(&e.h));
            o.insert("residual".into(), float(e.residual));
            o.insert("ratio".into(), e.ratio.map_or(Value::Null, float));
            if let Some(x) = &e.exact {
                o.insert("exact".into(), rational_to_json(x));
            }
            Value::Object(o)
        })
        .collect();
    json!({"mode": r.mode, "entries": entries})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::scalar::rat;

    #[test]
    fn scalar_encodings() {
        assert_eq!(scalar_to_json(&Scalar::from_rational(Field::R, rat(-3, 4))), json!("-3/4"));
        assert_eq!(scalar_to_json(&Scalar::from_int(Field::R, 5)), json!("5"));
        assert_eq!(scalar_to_json(&Scalar::complex(rat(1, 2), rat(0, 1))), json!({"re": "1/2", "im": "0"}));
        let q = Scalar::quaternion(rat(1, 1), rat(2, 1), rat(0, 1), rat(-1, 3));
        assert_eq!(scalar_to_json(&q), json!({"a0": "1", "a1": "2", "a2": "0", "a3": "-1/3"}));
        assert_eq!(scalar_from_json(Field::H, &json!({"a3": "-1/3", "a0": 1, "a1": "2"}), "$").unwrap(), q);
        assert!(scalar_from_json(Field::R, &json!(0.5), "$").is_err());
        assert!(scalar_from_json(Field::C, &json!({"re": "1", "x": "2"}), "$").is_err());
    }

    #[test]
    fn roundtrips() {
        let mut rng = random::rng(3);
        for field in Field::all() {
            let x = random::lie_element(&mut rng, 4, field, 50);
            assert_eq!(lie_element_from_json(&lie_element_to_json(&x), "$").unwrap(), x);
            let g = x.exp();
            assert_eq!(group_element_from_json(&group_element_to_json(&g), "$").unwrap(), g);
            let f = Flag::alpha(&g);
            assert_eq!(flag_from_json(&flag_to_json(&f), "$").unwrap(), f);
            let p = f.pi_j(2).unwrap();
            assert_eq!(grassmann_from_json(&grassmann_to_json(&p), "$").unwrap(), p);
            let c = random::certificate(&mut rng, 4, field, 50);
            assert_eq!(certificate_from_json(field, &certificate_to_json(&c), "$").unwrap(), c);
            let m = c.reconstruct(4, field).unwrap();
            let back = graded_map_from_json(&graded_map_to_json(&m), "$").unwrap();
            assert_eq!(back.v1, m.v1);
        }
        let om = crate::forms::omega_plus(5, Field::R).unwrap();
        assert_eq!(form_from_json(&form_to_json(&om), "$").unwrap(), om);
        let s = PolyMapSpec::contact_shear();
        assert_eq!(map_spec_from_json(&map_spec_to_json(&s), "$").unwrap(), s);
    }

    #[test]
    fn diagnostics_name_the_path() {
        let v = json!({"n": 3, "field": "R", "terms": [{"i": 1, "j": 2, "value": "1/0"}]});
        let e = lie_element_from_json(&v, "$").unwrap_err().to_string();
        assert!(e.contains("$.terms[0].value"), "{e}");
        let e = parse_json("{\n \"n\": 3,,\n}").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }
}
