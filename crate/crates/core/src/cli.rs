//! Command-line front end. Results are JSON on stdout or `--out`; timings go
//! to stderr. Exit status: 0 success, 1 domain error, 2 usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_traits::One;
use serde_json::{json, Value};

use crate::error::Error;
use crate::flag::{beta_squared, dilation_matrix, Flag};
use crate::forms::{check_pullback_hypotheses, parse_form};
use crate::gradedaut::classify;
use crate::io;
use crate::nilpotent::{grading_info, Algebra, GroupElement};
use crate::pansu::{pansu_differential, verify_pullback_identity, PolyMapSpec, QuadratureMode};
use crate::rigidity::{
    escape_flag, reconstruct_with_seed, solve_frame_map, ChartBall, ConstantOracle, FlagMapOracle, GradedAffineOracle,
    ProjectiveFrame, ProjectiveOracle, PsiOracle,
};
use crate::scalar::{Field, Rational};
use crate::suite;

#[derive(Parser, Debug)]
#[command(name = "iwasawa", about = "Exact computations on the Iwasawa N group and its flag manifold")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// R, C or H
    #[arg(long)]
    field: Option<Field>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structure of the nilpotent algebra
    Algebra {
        #[command(subcommand)]
        op: AlgebraOp,
    },
    /// Left invariant forms
    Forms {
        #[command(subcommand)]
        op: FormsOp,
    },
    /// Graded automorphisms
    Aut {
        #[command(subcommand)]
        op: AutOp,
    },
    /// Projective frames
    Frame {
        #[command(subcommand)]
        op: FrameOp,
    },
    /// Rigidity of fibration preserving maps
    Rigidity {
        #[command(subcommand)]
        op: RigidityOp,
    },
    /// Dilation dynamics on lines
    Dynamics {
        #[command(subcommand)]
        op: DynamicsOp,
    },
    /// Pansu differentials and the pullback identity
    Pansu {
        #[command(subcommand)]
        op: PansuOp,
    },
    /// Test suites
    Suite {
        #[command(subcommand)]
        op: SuiteOp,
    },
}

#[derive(Subcommand, Debug)]
enum AlgebraOp {
    /// Grading data and exact Jacobi and grading checks; with --in, exp/log of a Lie element
    Check(#[command(flatten)] Common),
}

#[derive(Subcommand, Debug)]
enum FormsOp {
    /// Pullback hypotheses for a pair alpha:beta, or d of a single form
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        form: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum AutOp {
    /// Normal form of a graded automorphism given by its first layer block
    Classify(#[command(flatten)] Common),
}

#[derive(Subcommand, Debug)]
enum FrameOp {
    /// The projective map carrying one frame to another
    Solve(#[command(flatten)] Common),
}

#[derive(Subcommand, Debug)]
enum RigidityOp {
    /// Reconstruct a projective map from a built-in oracle family
    Reconstruct(#[command(flatten)] Common),
    /// Flag in the chart whose image under a lower unipotent g leaves it
    EscapeFlag(#[command(flatten)] Common),
}

#[derive(Subcommand, Debug)]
enum DynamicsOp {
    /// beta squared of a line, and its contraction under a dilation
    Beta(#[command(flatten)] Common),
}

#[derive(Subcommand, Debug)]
enum PansuOp {
    /// Pansu differential of a polynomial map at a point
    Diff(#[command(flatten)] Common),
    /// Midpoint quadrature of the pullback identity
    PullbackIdentity(#[command(flatten)] Common),
}

#[derive(Subcommand, Debug)]
enum SuiteOp {
    /// Run the acceptance criteria
    Acceptance {
        #[command(flatten)]
        common: Common,
        /// Comma separated criterion numbers
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(Value, i32), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_input(c: &Common) -> std::result::Result<Value, Failure> {
    let path = c.input.as_ref().ok_or_else(|| usage("missing --in"))?;
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    io::parse_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_optional(c: &Common) -> std::result::Result<Option<Value>, Failure> {
    c.input.as_ref().map(|_| read_input(c)).transpose()
}

fn field_of(c: &Common) -> Field {
    c.field.unwrap_or(Field::R)
}

fn need_n(c: &Common) -> std::result::Result<usize, Failure> {
    c.n.ok_or_else(|| usage("missing --n"))
}

/// Fills `n` and `field` from the flags when the file omits them; conflicting values are a usage error.
fn with_flags(mut v: Value, c: &Common) -> std::result::Result<Value, Failure> {
    let Some(obj) = v.as_object_mut() else { return Err(usage("input must be a JSON object")) };
    if let Some(n) = c.n {
        match obj.get("n").and_then(Value::as_u64) {
            Some(m) if m as usize != n => return Err(usage(format!("--n {n} conflicts with n = {m} in the input"))),
            _ => {
                obj.insert("n".into(), json!(n));
            }
        }
    }
    let field = c.field.or_else(|| if obj.contains_key("field") { None } else { Some(Field::R) });
    if let Some(f) = field {
        match obj.get("field").and_then(Value::as_str) {
            Some(s) if s != f.to_string() => return Err(usage(format!("--field {f} conflicts with field {s} in the input"))),
            _ => {
                obj.insert("field".into(), io::field_to_json(f));
            }
        }
    }
    Ok(v)
}

/// Entry point; returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let out_path = common(&cli.command).out.clone();
    match dispatch(&cli.command, err) {
        Ok((value, code)) => {
            let text = serde_json::to_string_pretty(&value).expect("json") + "\n";
            match out_path {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, text) {
                        let _ = writeln!(err, "error: cannot write {}: {e}", p.display());
                        return 2;
                    }
                }
                None => {
                    let _ = out.write_all(text.as_bytes());
                }
            }
            code
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "usage error: {m}");
            2
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Algebra { op: AlgebraOp::Check(c) } => c,
        Command::Forms { op: FormsOp::Check { common, .. } } => common,
        Command::Aut { op: AutOp::Classify(c) } => c,
        Command::Frame { op: FrameOp::Solve(c) } => c,
        Command::Rigidity { op: RigidityOp::Reconstruct(c) | RigidityOp::EscapeFlag(c) } => c,
        Command::Dynamics { op: DynamicsOp::Beta(c) } => c,
        Command::Pansu { op: PansuOp::Diff(c) | PansuOp::PullbackIdentity(c) } => c,
        Command::Suite { op: SuiteOp::Acceptance { common, .. } } => common,
    }
}

fn dispatch(cmd: &Command, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Algebra { op: AlgebraOp::Check(c) } => algebra_check(c),
        Command::Forms { op: FormsOp::Check { common, pair, form } } => forms_check(common, pair.as_deref(), form.as_deref()),
        Command::Aut { op: AutOp::Classify(c) } => aut_classify(c),
        Command::Frame { op: FrameOp::Solve(c) } => frame_solve(c),
        Command::Rigidity { op: RigidityOp::Reconstruct(c) } => rigidity_reconstruct(c),
        Command::Rigidity { op: RigidityOp::EscapeFlag(c) } => rigidity_escape(c),
        Command::Dynamics { op: DynamicsOp::Beta(c) } => dynamics_beta(c),
        Command::Pansu { op: PansuOp::Diff(c) } => pansu_diff(c),
        Command::Pansu { op: PansuOp::PullbackIdentity(c) } => pansu_pullback_identity(c),
        Command::Suite { op: SuiteOp::Acceptance { common, only } } => suite_acceptance(common, only, err),
    }
}

fn algebra_check(c: &Common) -> Outcome {
    let field = field_of(c);
    let n = need_n(c)?;
    let info = grading_info(n, field)?;
    let alg = Algebra::get(n, field);
    let dim = alg.dim();
    let mut grading = true;
    for a in 0..dim {
        for b in 0..dim {
            grading &= alg.bracket_units(a, b).iter().all(|(k, _)| alg.layer(*k) == alg.layer(a) + alg.layer(b));
        }
    }
    let unit = |k: usize| {
        let mut v = vec![Rational::from_integer(0.into()); dim];
        v[k] = Rational::one();
        v
    };
    let mut jacobi = true;
    for a in 0..dim {
        for b in 0..dim {
            let ab = alg.bracket_coords(&unit(a), &unit(b));
            for k in 0..dim {
                let bk = alg.bracket_coords(&unit(b), &unit(k));
                let ka = alg.bracket_coords(&unit(k), &unit(a));
                let s1 = alg.bracket_coords(&unit(k), &ab);
                let s2 = alg.bracket_coords(&unit(a), &bk);
                let s3 = alg.bracket_coords(&unit(b), &ka);
                jacobi &= (0..dim).all(|i| num_traits::Zero::is_zero(&(&s1[i] + &s2[i] + &s3[i])));
            }
        }
    }
    let mut out = json!({
        "n": n,
        "field": io::field_to_json(field),
        "dim": info.ndim,
        "layer_dims": info.layer_dims,
        "homogeneous_dim": info.nu,
        "jacobi": jacobi,
        "grading": grading,
    });
    if let Some(v) = read_optional(c)? {
        let x = io::lie_element_from_json(&with_flags(v, c)?, "$")?;
        let g = x.exp();
        out["exp"] = io::group_element_to_json(&g);
        out["roundtrip"] = json!(g.log() == x);
    }
    let code = if jacobi && grading { 0 } else { 1 };
    Ok((out, code))
}

fn forms_check(c: &Common, pair: Option<&str>, form: Option<&str>) -> Outcome {
    let field = field_of(c);
    let n = need_n(c)?;
    match (pair, form) {
        (Some(p), None) => {
            let (a, b) = p.split_once(':').ok_or_else(|| usage("--pair expects alpha:beta"))?;
            let alpha = parse_form(n, field, a)?;
            let beta = parse_form(n, field, b)?;
            let r = check_pullback_hypotheses(&alpha, &beta)?;
            Ok((
                json!({
                    "alpha": io::form_to_json(&alpha),
                    "beta": io::form_to_json(&beta),
                    "verdicts": {"degree": r.deg_ok, "weight": r.wt_ok, "closed": r.closed_ok},
                    "report": io::pullback_report_to_json(&r),
                }),
                0,
            ))
        }
        (None, Some(f)) => {
            let form = parse_form(n, field, f)?;
            let w = form.weighted_degree();
            Ok((
                json!({
                    "form": io::form_to_json(&form),
                    "d": io::form_to_json(&form.d()),
                    "closed": form.is_closed(),
                    "degree": w.degree,
                    "weight": w.weight,
                }),
                0,
            ))
        }
        _ => Err(usage("give exactly one of --pair or --form")),
    }
}

fn aut_classify(c: &Common) -> Outcome {
    let v = with_flags(read_input(c)?, c)?;
    let m = io::graded_map_from_json(&v, "$")?;
    let cert = classify(&m)?;
    Ok((io::certificate_to_json(&cert), 0))
}

/// Input {field, source: [vectors], target: [vectors]}, n + 1 vectors each.
fn frame_solve(c: &Common) -> Outcome {
    let v = with_flags(read_input(c)?, c)?;
    let field = io::field_from_json(&v["field"], "$.field")?;
    let frame = |key: &str| -> std::result::Result<ProjectiveFrame, Failure> {
        let path = format!("$.{key}");
        let list = v.get(key).and_then(Value::as_array).ok_or_else(|| usage(format!("at {path}: expected a list of vectors")))?;
        let vectors = list
            .iter()
            .enumerate()
            .map(|(i, x)| io::vector_from_json(field, x, &format!("{path}[{i}]")))
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(ProjectiveFrame::from_vectors(field, &vectors)?)
    };
    let g = solve_frame_map(&frame("source")?, &frame("target")?)?;
    Ok((io::proj_to_json(&g), 0))
}

fn radius(v: &Value) -> std::result::Result<Rational, Failure> {
    match v.get("radius") {
        Some(r) => Ok(io::rational_from_json(r, "$.radius")?),
        None => Ok(Rational::one()),
    }
}

/// Input {family, n, field, radius?, ...}: `projective` and `psi` take a matrix `g`,
/// `graded-affine` takes `h` (group element matrix) and `certificate`, `constant` takes a flag matrix `value`.
fn rigidity_reconstruct(c: &Common) -> Outcome {
    let v = with_flags(read_input(c)?, c)?;
    let (n, field) = io::header(&v, "$")?;
    let domain = ChartBall::around_identity(n, field, radius(&v)?)?;
    let family = v.get("family").and_then(Value::as_str).ok_or_else(|| usage("at $.family: expected a family name"))?;
    let matrix = |key: &str| -> std::result::Result<crate::matrix::Matrix, Failure> {
        let m = v.get(key).ok_or_else(|| usage(format!("at $: missing field {key:?}")))?;
        Ok(io::matrix_from_json(field, m, &format!("$.{key}"))?)
    };
    let oracle: Box<dyn FlagMapOracle> = match family {
        "projective" => Box::new(ProjectiveOracle { g: matrix("g")?, domain }),
        "psi" => Box::new(PsiOracle { g: matrix("g")?, domain }),
        "graded-affine" => {
            let h = GroupElement::from_matrix(matrix("h")?)?;
            let cert = v.get("certificate").ok_or_else(|| usage("at $: missing field \"certificate\""))?;
            let phi = io::certificate_from_json(field, cert, "$.certificate")?.reconstruct(n, field)?;
            Box::new(GradedAffineOracle { h, phi, domain })
        }
        "constant" => Box::new(ConstantOracle { value: Flag::from_matrix(&matrix("value")?)?, domain }),
        other => return Err(usage(format!("at $.family: unknown family {other:?}"))),
    };
    let base = oracle.domain().center_flag();
    let g = reconstruct_with_seed(oracle.as_ref(), &base, c.seed)?;
    Ok((io::proj_to_json(&g), 0))
}

/// Input {field, matrix}: a lower unipotent matrix.
fn rigidity_escape(c: &Common) -> Outcome {
    let v = with_flags(read_input(c)?, c)?;
    let field = io::field_from_json(&v["field"], "$.field")?;
    let g = io::matrix_from_json(field, v.get("matrix").ok_or_else(|| usage("at $: missing field \"matrix\""))?, "$.matrix")?;
    let f = escape_flag(&g)?;
    let image = f.act_matrix(&g)?;
    Ok((json!({"flag": io::flag_to_json(&f), "in_nhat": f.in_nhat(), "image_in_nhat": image.in_nhat()}), 0))
}

/// Input {field, v: vector, j, r?}.
fn dynamics_beta(c: &Common) -> Outcome {
    let v = with_flags(read_input(c)?, c)?;
    let field = io::field_from_json(&v["field"], "$.field")?;
    let vec = io::vector_from_json(field, v.get("v").ok_or_else(|| usage("at $: missing field \"v\""))?, "$.v")?;
    let j = v.get("j").and_then(Value::as_u64).ok_or_else(|| usage("at $.j: expected a positive integer"))? as usize;
    let line = crate::flag::GrassmannPoint::line(field, &vec)?;
    let b2 = beta_squared(&line, j)?;
    let mut out = json!({"beta_squared": io::rational_to_json(&b2)});
    if let Some(r) = v.get("r") {
        let r = io::rational_from_json(r, "$.r")?;
        crate::nilpotent::check_dilation(&r)?;
        let moved = line.act(&dilation_matrix(field, line.n(), &r))?;
        let after = beta_squared(&moved, j)?;
        out["r"] = io::rational_to_json(&r);
        out["dilated_beta_squared"] = io::rational_to_json(&after);
        out["contracts"] = json!(after <= &r * &r * &b2);
    }
    Ok((out, 0))
}

fn map_from(v: &Value, c: &Common) -> std::result::Result<PolyMapSpec, Failure> {
    let m = v.get("map").ok_or_else(|| usage("at $: missing field \"map\""))?;
    if let Some(name) = m.as_str() {
        return match name {
            "contact-shear" => Ok(PolyMapSpec::contact_shear()),
            "double-shear" => Ok(PolyMapSpec::transverse_shear(3).compose(&PolyMapSpec::contact_shear())?),
            "identity" => Ok(PolyMapSpec::identity(need_n(c)?, field_of(c))),
            other => Err(usage(format!("at $.map: unknown map {other:?}"))),
        };
    }
    Ok(io::map_spec_from_json(&with_flags(m.clone(), c)?, "$.map")?)
}

/// Input {map, point?}: `map` is a term-list spec or one of "contact-shear",
/// "double-shear", "identity"; `point` is a Lie element (the log of x).
fn pansu_diff(c: &Common) -> Outcome {
    let v = read_input(c)?;
    let f = map_from(&v, c)?;
    let x = match v.get("point") {
        Some(p) => {
            let mut p = p.clone();
            if let Some(o) = p.as_object_mut() {
                o.entry("n").or_insert(json!(f.n));
                o.entry("field").or_insert(io::field_to_json(f.field));
            }
            io::lie_element_from_json(&p, "$.point")?.exp()
        }
        None => GroupElement::identity(f.n, f.field),
    };
    let d = pansu_differential(&f, &x)?;
    let mut out = json!({"v1": io::rat_matrix_to_json(&d.v1), "full": io::rat_matrix_to_json(&d.full_matrix()?)});
    if let Ok(cert) = classify(&d) {
        out["certificate"] = io::certificate_to_json(&cert);
    }
    Ok((out, 0))
}

/// Input {map, alpha, beta, bump: {center, half_widths}, grid?: {cells, halvings, lo?, hi?}, mode?, factor?}.
fn pansu_pullback_identity(c: &Common) -> Outcome {
    let v = read_input(c)?;
    let f = map_from(&v, c)?;
    let form = |key: &str| -> std::result::Result<_, Failure> {
        let s = v.get(key).and_then(Value::as_str).ok_or_else(|| usage(format!("at $.{key}: expected a form expression")))?;
        Ok(parse_form(f.n, f.field, s)?)
    };
    let (alpha, beta) = (form("alpha")?, form("beta")?);
    let bump = io::bump_from_json(v.get("bump").ok_or_else(|| usage("at $: missing field \"bump\""))?, "$.bump")?;
    let grid = io::grid_from_json(v.get("grid").unwrap_or(&json!({})), &bump, "$.grid")?;
    let mode = match v.get("mode").and_then(Value::as_str).unwrap_or("exact") {
        "exact" => QuadratureMode::Exact,
        "float" => QuadratureMode::Float,
        other => return Err(usage(format!("at $.mode: unknown mode {other:?}"))),
    };
    let factor = match v.get("factor") {
        Some(x) => crate::scalar::rational_to_f64(&io::rational_from_json(x, "$.factor")?),
        None => 0.3,
    };
    let rep = verify_pullback_identity(&f, &alpha, &beta, &bump, &grid, mode)?;
    let mut out = io::residual_report_to_json(&rep);
    out["converges"] = json!(rep.converges(factor));
    Ok((out, 0))
}

fn suite_acceptance(c: &Common, only: &[usize], err: &mut dyn Write) -> Outcome {
    let ids = if only.is_empty() { suite::all_ids() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|i| !(1..=suite::COUNT).contains(*i)) {
        return Err(usage(format!("no criterion {bad}")));
    }
    let results = suite::run(&ids, c.seed);
    let mut all = true;
    let mut list = Vec::new();
    for (o, t) in &results {
        let _ = writeln!(err, "[{:>2}] {} {:.2}s", o.id, if o.passed { "pass" } else { "FAIL" }, t.as_secs_f64());
        all &= o.passed;
        list.push(serde_json::to_value(o).expect("plain data"));
    }
    Ok((json!({"seed": c.seed, "passed": all, "criteria": list}), if all { 0 } else { 1 }))
}
