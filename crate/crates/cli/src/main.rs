use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rearrange_core::expr::{rat, BaseFunction, ComplexRational, SpectralExpr, Symbol};
use rearrange_core::matrixcalc::{residual, taylor_check, taylor_grid};
use rearrange_core::omega::{default_lambda, OmegaExpr};
use rearrange_core::ops::{
    corrected_dual_relations, exact_soundness, numeric_soundness, theorem_relations,
    verify_dual_relations, verify_dual_relations_semantic, verify_relations,
    verify_theorem_relations, SoundnessBase,
};
use rearrange_core::report::{RelationInstance, RelationReport};
use rearrange_core::sampling::rng;
use rearrange_core::simplicial::{
    cyclic_normal_form, format_word, word_target, CyclicGen, SimplicialMap,
};
use rearrange_core::variational::{gradient_check, TPreset};
use rearrange_core::{Error, MatrixContext, OperatorWord, SpectralFn};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "rearrange",
    version,
    about = "Rearrangement operators on divided-difference brackets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Random seed, recorded in every report.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply an operator word (composition notation) to a function.
    Apply {
        /// e.g. "s0 d0" for σ₀δ₀; the rightmost token acts first.
        word: String,
        /// `generic:N` (an unknown function of N+1 variables) or `generic:N:name`.
        function: String,
        #[command(flatten)]
        common: Common,
    },
    /// Check the generator relations.
    Verify {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = Mode::Structural)]
        mode: Mode,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Matrix dimension for `--mode matrix`.
        #[arg(short = 'd', long, default_value_t = 4)]
        dimension: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check the relations of the dual generators d = σ, s = δ₊₁, t = τ⁻¹.
    DualVerify {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Accept instances that hold as operator identities but differ
        /// canonically.
        #[arg(long)]
        semantic: bool,
        /// Also check the corrected relation for d₀ sₙ.
        #[arg(long)]
        corrected: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the gradient of φ₀(S_h(T)(∇h)·∇h) with finite differences.
    GradCheck {
        #[arg(long, value_enum, default_value_t = Preset::ExpExp)]
        preset: Preset,
        #[arg(short = 'd', long, default_value_t = 5)]
        dimension: usize,
        #[arg(long, default_value_t = 10)]
        directions: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Apply an operator word to ω_α by index arithmetic.
    Omega {
        /// Comma-separated positive indices, e.g. 1,1,1,1.
        #[arg(long)]
        alpha: String,
        /// Operator word in composition notation.
        #[arg(long, default_value = "")]
        word: String,
        /// Resolvent parameter, e.g. 2+1i.
        #[arg(long)]
        lambda: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Normal forms of simplicial and cyclic maps.
    Simplicial {
        /// Values of a non-decreasing map, e.g. 0,0,1,3.
        #[arg(long, conflicts_with = "word")]
        values: Option<String>,
        /// Target `m` of the map given by --values.
        #[arg(long)]
        target: Option<usize>,
        /// Word over dJ, sJ, t in composition notation.
        #[arg(long)]
        word: Option<String>,
        /// Source of --word.
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Remainder slopes of the matrix Taylor expansion of f(h + t b).
    Taylor {
        #[arg(long, value_enum, default_value_t = Func::Exp)]
        function: Func,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(short = 'd', long, default_value_t = 5)]
        dimension: usize,
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Structural,
    Numeric,
    Matrix,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    ExpExp,
    CubicSquare,
    OmegaOmega,
}

impl From<Preset> for TPreset {
    fn from(p: Preset) -> Self {
        match p {
            Preset::ExpExp => TPreset::ExpExp,
            Preset::CubicSquare => TPreset::CubicSquare,
            Preset::OmegaOmega => TPreset::OmegaOmega,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Func {
    Exp,
    Square,
}

/// Result of a subcommand: exit status, JSON body and text rendering.
struct Output {
    passed: bool,
    json: Value,
    text: String,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        _ => 3,
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>, Error> {
    let mut out = Vec::new();
    let mut pos = 0;
    for part in s.split(',') {
        let v = part
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::parse(pos, format!("bad {what} entry `{part}`")))?;
        out.push(v);
        pos += part.len() + 1;
    }
    Ok(out)
}

fn parse_function(spec: &str) -> Result<SpectralExpr, Error> {
    let mut parts = spec.splitn(3, ':');
    if parts.next() != Some("generic") {
        return Err(Error::parse(
            0,
            format!("unknown function `{spec}`, expected generic:N"),
        ));
    }
    let n = parts
        .next()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::parse(8, "expected an arity after `generic:`"))?;
    Ok(match parts.next() {
        Some(name) => SpectralExpr::generic_named(n, Symbol::new(name)),
        None => SpectralExpr::generic(n),
    })
}

fn parse_cyclic_word(text: &str, source: usize) -> Result<Vec<CyclicGen>, Error> {
    let mut tokens = Vec::new();
    let mut offset = 0;
    for tok in text.split_whitespace() {
        let pos = text[offset..].find(tok).map_or(offset, |p| p + offset);
        offset = pos + tok.len();
        let index = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::parse(pos, format!("bad index in token `{tok}`")))
        };
        tokens.push(match tok {
            "t" => CyclicGen::Tau,
            _ if tok.starts_with('d') => CyclicGen::Face(index(&tok[1..])?),
            _ if tok.starts_with('s') => CyclicGen::Degeneracy(index(&tok[1..])?),
            _ => return Err(Error::parse(pos, format!("unknown token `{tok}`"))),
        });
    }
    tokens.reverse();
    word_target(source, &tokens)?;
    Ok(tokens)
}

fn report_text(report: &RelationReport) -> String {
    let mut s = format!(
        "{}: {}/{} instances pass\n",
        report.suite,
        report.passed_count(),
        report.len()
    );
    for f in report.failures() {
        s.push_str(&format!(
            "FAIL {} n={}{}{}: {}  vs  {}{}\n",
            f.relation,
            f.n,
            f.i.map_or(String::new(), |i| format!(" i={i}")),
            f.j.map_or(String::new(), |j| format!(" j={j}")),
            f.lhs,
            f.rhs,
            f.detail
                .as_ref()
                .map_or(String::new(), |d| format!(" ({d})"))
        ));
    }
    s
}

fn report_output(
    command: &str,
    seed: u64,
    mut reports: Vec<RelationReport>,
    extra: Value,
) -> Output {
    for r in &mut reports {
        r.sort();
    }
    let passed = reports.iter().all(|r| r.all_passed());
    let text = reports.iter().map(report_text).collect::<String>();
    Output {
        passed,
        json: json!({
            "schema": SCHEMA,
            "command": command,
            "seed": seed,
            "passed": passed,
            "parameters": extra,
            "reports": reports,
        }),
        text,
    }
}

fn apply(word: &str, function: &str, c: &Common) -> Result<Output, Error> {
    let f = parse_function(function)?;
    let w = OperatorWord::parse(word, f.m())?;
    let g = rearrange_core::ops::apply_word(&w, &f)?;
    let terms: Vec<Value> = g
        .terms()
        .map(|(t, k)| json!({"coeff": k.to_string(), "term": t.to_string()}))
        .collect();
    Ok(Output {
        passed: true,
        json: json!({
            "schema": SCHEMA,
            "command": "apply",
            "seed": c.seed,
            "word": w.to_string(),
            "source": w.source(),
            "target": w.target(),
            "result": g.to_string(),
            "terms": terms,
        }),
        text: format!("{g}\n"),
    })
}

fn matrix_suite(n_max: usize, d: usize, seed: u64, tol: f64) -> Result<RelationReport, Error> {
    let rels = theorem_relations(n_max);
    let need = rels.iter().map(|r| r.n + 2).max().unwrap_or(0);
    let ctx = MatrixContext::random(seed, d, need);
    let mut report = RelationReport::new("matrix");
    for rel in rels {
        let (l, r) = rel.sides()?;
        let (lhs, rhs) = rel.describe();
        let inst = RelationInstance::new(rel.id, rel.n, rel.i, rel.j).with_sides(lhs, rhs);
        if l.m() == 0 {
            report.push(inst.verdict(true).with_detail("no matrix arguments"));
            continue;
        }
        let base = SoundnessBase::Exp.function(rel.n + 1);
        let rhos = &ctx.rho()[..l.m()];
        let a = ctx.schwartz_apply(&SpectralFn::new(l, base.clone())?, rhos)?;
        let b = ctx.schwartz_apply(&SpectralFn::new(r, base)?, rhos)?;
        let e = residual(&a, &b);
        report.push(
            inst.verdict(e <= tol)
                .with_detail(format!("residual {e:.3e}")),
        );
    }
    Ok(report)
}

fn verify(n_max: usize, mode: Mode, tol: f64, d: usize, c: &Common) -> Result<Output, Error> {
    let (name, reports) = match mode {
        Mode::Structural => ("structural", vec![verify_theorem_relations(n_max)]),
        Mode::Numeric => {
            let rels = theorem_relations(n_max);
            (
                "numeric",
                vec![
                    numeric_soundness(&rels, &SoundnessBase::ALL, c.seed, 3, tol),
                    exact_soundness(&rels, &[SoundnessBase::Quintic], c.seed),
                ],
            )
        }
        Mode::Matrix => ("matrix", vec![matrix_suite(n_max, d, c.seed, tol)?]),
    };
    Ok(report_output(
        "verify",
        c.seed,
        reports,
        json!({"n_max": n_max, "mode": name, "tol": tol, "dimension": d}),
    ))
}

fn dual_verify(n_max: usize, semantic: bool, corrected: bool, c: &Common) -> Output {
    let mut reports = vec![if semantic {
        verify_dual_relations_semantic(n_max)
    } else {
        verify_dual_relations(n_max)
    }];
    if corrected {
        reports.push(verify_relations(
            "corrected",
            &corrected_dual_relations(n_max),
        ));
    }
    report_output(
        "dual-verify",
        c.seed,
        reports,
        json!({"n_max": n_max, "semantic": semantic, "corrected": corrected}),
    )
}

fn grad_check(
    p: Preset,
    d: usize,
    k: usize,
    step: f64,
    tol: f64,
    c: &Common,
) -> Result<Output, Error> {
    if d == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    let preset = TPreset::from(p);
    let ctx = MatrixContext::random(c.seed, d, 0);
    let mut r = rng(c.seed.wrapping_add(1));
    let dirs: Vec<_> = (0..k).map(|_| ctx.random_hermitian(&mut r)).collect();
    let rep = gradient_check(&preset.function(), &ctx, &dirs, step)?;
    let passed = rep.max_error() <= tol;
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|(fd, pair, e)| json!({"finite_difference": [fd.re, fd.im], "pairing": [pair.re, pair.im], "rel_err": e}))
        .collect();
    let mut text = format!("T = {preset}, d = {d}, step = {step:e}\n");
    for (i, (fd, pair, e)) in rep.rows.iter().enumerate() {
        text.push_str(&format!(
            "direction {i}: fd {fd:.10e}  grad {pair:.10e}  rel err {e:.2e}\n"
        ));
    }
    text.push_str(&format!(
        "max rel err {:.2e} (tol {tol:e}): {}\n",
        rep.max_error(),
        if passed { "PASS" } else { "FAIL" }
    ));
    Ok(Output {
        passed,
        json: json!({
            "schema": SCHEMA,
            "command": "grad-check",
            "seed": c.seed,
            "passed": passed,
            "parameters": {"preset": preset.name(), "dimension": d, "directions": k, "step": step, "tol": tol},
            "max_rel_err": rep.max_error(),
            "rows": rows,
        }),
        text,
    })
}

fn omega(alpha: &str, word: &str, lambda: Option<&str>, c: &Common) -> Result<Output, Error> {
    let lambda = match lambda {
        Some(s) => s.parse::<ComplexRational>()?,
        None => default_lambda(),
    };
    let a: Vec<u32> = parse_list(alpha, "index")?
        .into_iter()
        .map(|v| v as u32)
        .collect();
    if a.is_empty() {
        return Err(Error::parse(0, "empty index"));
    }
    let w = OmegaExpr::new(lambda.clone(), &a)?;
    let word = OperatorWord::parse(word, w.n())?;
    let out = w.apply_word(&word)?;
    let terms: Vec<Value> = out
        .terms()
        .map(|t| json!({"coeff": t.coeff.to_string(), "alpha": t.alpha}))
        .collect();
    Ok(Output {
        passed: true,
        json: json!({
            "schema": SCHEMA,
            "command": "omega",
            "seed": c.seed,
            "lambda": lambda.to_string(),
            "word": word.to_string(),
            "result": out.to_string(),
            "terms": terms,
        }),
        text: format!("{out}\n"),
    })
}

fn simplicial(
    values: Option<&str>,
    target: Option<usize>,
    word: Option<&str>,
    source: usize,
    c: &Common,
) -> Result<Output, Error> {
    if let Some(v) = values {
        let vals = parse_list(v, "value")?;
        let m = target.unwrap_or_else(|| vals.iter().copied().max().unwrap_or(0));
        let f = SimplicialMap::new(m, vals)?;
        let nf = f.normal_form();
        let text = format!(
            "{f}\nnormal form: {nf}\nmissing points: {:?}\nstationary points: {:?}\n",
            f.missing_points(),
            f.stationary_points()
        );
        return Ok(Output {
            passed: true,
            json: json!({
                "schema": SCHEMA,
                "command": "simplicial",
                "seed": c.seed,
                "source": f.source(),
                "target": f.target(),
                "values": f.values(),
                "normal_form": nf.to_string(),
                "faces": nf.faces,
                "degeneracies": nf.degeneracies,
                "missing_points": f.missing_points(),
                "stationary_points": f.stationary_points(),
            }),
            text,
        });
    }
    let Some(w) = word else {
        return Err(Error::parse(0, "give --values or --word"));
    };
    let gens = parse_cyclic_word(w, source)?;
    let cm = cyclic_normal_form(source, &gens)?;
    Ok(Output {
        passed: true,
        json: json!({
            "schema": SCHEMA,
            "command": "simplicial",
            "seed": c.seed,
            "word": format_word(&gens),
            "source": source,
            "target": cm.target(),
            "normal_form": cm.to_string(),
            "cyclic_power": cm.power,
            "set_map": cm.set_map(),
        }),
        text: format!(
            "{}\nnormal form: {cm}\nset map: {:?}\n",
            format_word(&gens),
            cm.set_map()
        ),
    })
}

fn taylor(func: Func, order: usize, d: usize, tol: f64, c: &Common) -> Result<Output, Error> {
    if order == 0 || d == 0 {
        return Err(Error::Precondition(
            "order and dimension must be positive".into(),
        ));
    }
    let ctx = MatrixContext::random(c.seed, d, 0);
    let b = ctx.random_hermitian(&mut rng(c.seed.wrapping_add(1)));
    let (name, f) = match func {
        Func::Exp => ("exp", BaseFunction::exp(rat(1, 1))),
        Func::Square => ("x^2", BaseFunction::monomial(2)),
    };
    let rep = taylor_check(&ctx, &f, &b, order, &taylor_grid())?;
    let scale = b.norm().powi(2).max(1.0);
    let terminated = rep.remainders.iter().all(|&r| r <= 1e-12 * scale);
    let expected = (order + 1) as f64;
    let passed = terminated || (rep.slope - expected).abs() <= tol;
    let mut text = format!("f = {name}, N = {order}, d = {d}\n");
    for (t, r) in rep.ts.iter().zip(&rep.remainders) {
        text.push_str(&format!("t = {t:.3e}  remainder {r:.6e}\n"));
    }
    text.push_str(&if terminated {
        "expansion terminates\n".to_string()
    } else {
        format!("slope {:.4} (expected {expected} ± {tol})\n", rep.slope)
    });
    Ok(Output {
        passed,
        json: json!({
            "schema": SCHEMA,
            "command": "taylor",
            "seed": c.seed,
            "passed": passed,
            "parameters": {"function": name, "order": order, "dimension": d, "tol": tol},
            "ts": rep.ts,
            "remainders": rep.remainders,
            "slope": rep.slope,
            "terminated": terminated,
        }),
        text,
    })
}

fn run(cli: &Cli) -> Result<(Output, Common), Error> {
    Ok(match &cli.command {
        Command::Apply {
            word,
            function,
            common,
        } => (apply(word, function, common)?, common.clone()),
        Command::Verify {
            n_max,
            mode,
            tol,
            dimension,
            common,
        } => (
            verify(*n_max, *mode, *tol, *dimension, common)?,
            common.clone(),
        ),
        Command::DualVerify {
            n_max,
            semantic,
            corrected,
            common,
        } => (
            dual_verify(*n_max, *semantic, *corrected, common),
            common.clone(),
        ),
        Command::GradCheck {
            preset,
            dimension,
            directions,
            step,
            tol,
            common,
        } => (
            grad_check(*preset, *dimension, *directions, *step, *tol, common)?,
            common.clone(),
        ),
        Command::Omega {
            alpha,
            word,
            lambda,
            common,
        } => (
            omega(alpha, word, lambda.as_deref(), common)?,
            common.clone(),
        ),
        Command::Simplicial {
            values,
            target,
            word,
            source,
            common,
        } => (
            simplicial(values.as_deref(), *target, word.as_deref(), *source, common)?,
            common.clone(),
        ),
        Command::Taylor {
            function,
            order,
            dimension,
            tol,
            common,
        } => (
            taylor(*function, *order, *dimension, *tol, common)?,
            common.clone(),
        ),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, common)) => {
            let body = if common.json {
                serde_json::to_string_pretty(&out.json).expect("report serializes") + "\n"
            } else {
                out.text
            };
            print!("{body}");
            if let Some(path) = &common.out {
                if let Err(e) = std::fs::write(path, &body) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
