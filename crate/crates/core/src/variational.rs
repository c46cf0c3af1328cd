//! Gradient of `F(h) = φ₀(S_h(T)(∇h)·∇h)` through the face and cyclic
//! operators, its numerical verification, and modular variables.

use std::fmt;

use num_complex::Complex64;
use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{rat, BaseFunction, ComplexRational, Rational, SpectralExpr};
use crate::matrixcalc::{Matrix, MatrixContext, SpectralFn};
use crate::numeval::{eval_expr, Scalar};
use crate::ops::{apply_word, GeneratorKind, OperatorWord};

fn word(n: usize, kinds: &[GeneratorKind]) -> Result<OperatorWord> {
    OperatorWord::from_kinds(n, kinds)
}

fn apply(kinds: &[GeneratorKind], e: &SpectralExpr) -> Result<SpectralExpr> {
    apply_word(&word(e.m(), kinds)?, e)
}

fn require_two_arguments(t: &SpectralExpr) -> Result<()> {
    if t.m() != 1 {
        return Err(Error::ArityMismatch(format!(
            "T must be a function of two arguments, got {}",
            t.m() + 1
        )));
    }
    Ok(())
}

/// `K` acting on `∇²h` and `H` acting on `∇h ⊗ ∇h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradientCoefficients {
    pub k: SpectralExpr,
    pub h: SpectralExpr,
}

/// `K = −(1 + τ)T`, `H = (δ₀ + δ₁ − δ₂)K` with `δ₂ = τδ₀` the last face.
pub fn cm_coefficients(t: &SpectralExpr) -> Result<GradientCoefficients> {
    use GeneratorKind::*;
    require_two_arguments(t)?;
    let k = t.add(&apply(&[Cyclic], t)?)?.neg();
    let h = apply(&[Face(0)], &k)?
        .add(&apply(&[Face(1)], &k)?)?
        .sub(&apply(&[LastFace], &k)?)?;
    Ok(GradientCoefficients { k, h })
}

/// Intermediate pieces of the derivation of the gradient.
#[derive(Clone, Debug)]
pub struct Rederivation {
    /// `K` from moving the varied `∇h` factor to the right of the trace.
    pub k: SpectralExpr,
    /// Face part of the variation of `S_h(−K)(∇h)`: `(δ₀ + δ₁)K`.
    pub part_one: SpectralExpr,
    /// Variation of `S_h(T)` with `a` rotated to the right end:
    /// `τδ₀T + τ²δ₁T`.
    pub part_two: SpectralExpr,
    /// `τ²δ₁ = δ₂τ` on the generic symbol of two arguments.
    pub shift_identity: bool,
    /// `part_two = δ₂(1 + τ)T`.
    pub part_two_closed: bool,
}

impl Rederivation {
    /// `H = part_one + part_two`.
    pub fn h(&self) -> Result<SpectralExpr> {
        self.part_one.add(&self.part_two)
    }
}

/// Rebuilds `K` and `H` step by step from the variation formula and the
/// cyclic trace rule, without using the closed forms.
pub fn rederive(t: &SpectralExpr) -> Result<Rederivation> {
    use GeneratorKind::*;
    require_two_arguments(t)?;
    // φ₀(S(T)(∇a)∇h) + φ₀(S(T)(∇h)∇a): rotate the second so ∇a sits in
    // the argument, then integrate by parts.
    let combined = t.add(&apply(&[Cyclic], t)?)?;
    let k = combined.neg();
    // −∇[S(G)(∇h)] contributes Σⱼ S(δⱼK)(∇h inserted at j) over j = 0, 1.
    let mut part_one = SpectralExpr::zero(2, k.n());
    for j in 0..=k.m() {
        part_one = part_one.add(&apply(&[Face(j)], &k)?)?;
    }
    // the varied factor `a` sits at slot j of S(δⱼT)(…)·∇h; j + 1 rotations
    // bring it to the right end of the trace
    let mut part_two = SpectralExpr::zero(2, t.n());
    for j in 0..=t.m() {
        let mut kinds = vec![Face(j)];
        kinds.extend(std::iter::repeat_n(Cyclic, j + 1));
        part_two = part_two.add(&apply(&kinds, t)?)?;
    }
    let generic = SpectralExpr::generic(1);
    let shift_identity =
        apply(&[Face(1), Cyclic, Cyclic], &generic)? == apply(&[Cyclic, LastFace], &generic)?;
    let part_two_closed = part_two == apply(&[LastFace], &combined)?;
    Ok(Rederivation {
        k,
        part_one,
        part_two,
        shift_identity,
        part_two_closed,
    })
}

/// `K` and `H` for `T = ω ⊗ ω` computed by the index actions on `ω_α`.
pub fn omega_coefficients(
    lambda: &crate::expr::ComplexRational,
) -> Result<(crate::omega::OmegaExpr, crate::omega::OmegaExpr)> {
    let t = crate::omega::OmegaExpr::ones(lambda.clone(), 1);
    let k = t.add(&t.cyclic()?)?.scale(&rat(-1, 1));
    let h = k.face(0)?.add(&k.face(1)?)?.sub(&k.face(2)?)?;
    Ok((k, h))
}

/// Ready-made choices of `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TPreset {
    /// `exp(x₀) exp(−x₁/2)`.
    ExpExp,
    /// `x₀³ x₁²`.
    CubicSquare,
    /// `ω(x₀) ω(x₁)` with `λ = 2 + i`.
    OmegaOmega,
}

impl TPreset {
    pub const ALL: [TPreset; 3] = [TPreset::ExpExp, TPreset::CubicSquare, TPreset::OmegaOmega];

    pub fn name(self) -> &'static str {
        match self {
            TPreset::ExpExp => "exp-exp",
            TPreset::CubicSquare => "cubic-square",
            TPreset::OmegaOmega => "omega-omega",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        TPreset::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn base(self) -> BaseFunction {
        let factors = match self {
            TPreset::ExpExp => vec![BaseFunction::exp(rat(1, 1)), BaseFunction::exp(rat(-1, 2))],
            TPreset::CubicSquare => vec![BaseFunction::monomial(3), BaseFunction::monomial(2)],
            TPreset::OmegaOmega => {
                let w = BaseFunction::omega(ComplexRational::from_ints(2, 1));
                vec![w.clone(), w]
            }
        };
        BaseFunction::separable(factors).expect("two factors")
    }

    pub fn function(self) -> SpectralFn {
        SpectralFn::from_base(self.base())
    }
}

impl fmt::Display for TPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `F(h) = φ₀(S_h(T)(∇h)·∇h)` at the context's `h`.
pub fn functional_value(t: &SpectralFn, ctx: &MatrixContext) -> Result<Complex64> {
    if t.arity() != 1 {
        return Err(Error::ArityMismatch("T must act on one matrix".into()));
    }
    let nh = ctx.nabla(ctx.h());
    Ok(ctx.trace(&(ctx.schwartz_apply(t, std::slice::from_ref(&nh))? * &nh)))
}

/// `S_h(K)(∇²h) + S_h(H)(∇h ⊗ ∇h)`.
pub fn gradient_assemble(
    coeffs: &GradientCoefficients,
    base: &BaseFunction,
    ctx: &MatrixContext,
) -> Result<Matrix> {
    let nh = ctx.nabla(ctx.h());
    let nnh = ctx.nabla(&nh);
    let k = SpectralFn::new(coeffs.k.clone(), base.clone())?;
    let h = SpectralFn::new(coeffs.h.clone(), base.clone())?;
    Ok(ctx.schwartz_apply(&k, &[nnh])? + ctx.schwartz_apply(&h, &[nh.clone(), nh])?)
}

/// Gradient of `F` for the given `T`.
pub fn gradient(t: &SpectralFn, ctx: &MatrixContext) -> Result<Matrix> {
    gradient_assemble(&cm_coefficients(t.expr())?, t.base(), ctx)
}

/// Central difference of `ε ↦ F(h + εa)`.
pub fn directional_difference(
    t: &SpectralFn,
    ctx: &MatrixContext,
    a: &Matrix,
    step: f64,
) -> Result<Complex64> {
    let at = |e: f64| functional_value(t, &ctx.with_h(ctx.h() + a * Complex64::new(e, 0.0))?);
    Ok((at(step)? - at(-step)?) / (2.0 * step))
}

/// Per-direction comparison of the finite-difference derivative with the
/// pairing `φ₀(grad · a)`.
#[derive(Clone, Debug)]
pub struct GradientReport {
    pub dimension: usize,
    pub step: f64,
    pub seed: Option<u64>,
    /// `(finite difference, φ₀(grad·a), relative error)` per direction.
    pub rows: Vec<(Complex64, Complex64, f64)>,
}

impl GradientReport {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.2).fold(0.0, f64::max)
    }
}

pub fn gradient_check(
    t: &SpectralFn,
    ctx: &MatrixContext,
    directions: &[Matrix],
    step: f64,
) -> Result<GradientReport> {
    let g = gradient(t, ctx)?;
    let mut rows = Vec::with_capacity(directions.len());
    for a in directions {
        let fd = directional_difference(t, ctx, a, step)?;
        let pairing = ctx.trace(&(&g * a));
        let err = (fd - pairing).norm() / fd.norm().max(f64::MIN_POSITIVE);
        rows.push((fd, pairing, err));
    }
    Ok(GradientReport {
        dimension: ctx.dimension(),
        step,
        seed: ctx.seed(),
        rows,
    })
}

/// A basis of the real vector space of hermitian `d × d` matrices, which
/// also spans all matrices over `ℂ`.
pub fn hermitian_basis(d: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in r..d {
            let mut m = Matrix::zeros(d, d);
            if r == c {
                m[(r, r)] = Complex64::one();
                out.push(m);
            } else {
                m[(r, c)] = Complex64::one();
                m[(c, r)] = Complex64::one();
                out.push(m.clone());
                let mut m = Matrix::zeros(d, d);
                m[(r, c)] = Complex64::new(0.0, 1.0);
                m[(c, r)] = Complex64::new(0.0, -1.0);
                out.push(m);
            }
        }
    }
    out
}

/// The unique `x` with `φ₀(x · aₖ) = pairings[k]` for the basis of
/// [`hermitian_basis`].
pub fn recover_from_pairings(d: usize, pairings: &[Complex64]) -> Result<Matrix> {
    let basis = hermitian_basis(d);
    if pairings.len() != basis.len() {
        return Err(Error::ArityMismatch(format!(
            "{} pairings for {} directions",
            pairings.len(),
            basis.len()
        )));
    }
    // φ₀(x a) = Σ x[r,c] a[c,r] / d, linear in the entries of x
    let n = d * d;
    let mut a = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for (k, b) in basis.iter().enumerate() {
        for r in 0..d {
            for c in 0..d {
                a[(k, r * d + c)] = b[(c, r)] / d as f64;
            }
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(pairings);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("pairing system is singular".into()))?;
    Ok(Matrix::from_fn(d, d, |r, c| x[r * d + c]))
}

/// Expression in modular coordinates `(x₀, 𝐱⁽¹⁾, …, 𝐱⁽ᵐ⁾)`, `𝐱⁽ʲ⁾ = xⱼ − xⱼ₋₁`.
/// Each node is an integer vector of coefficients over these coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularExpr {
    m: usize,
    n: usize,
    terms: Vec<(Rational, Vec<Vec<Vec<i64>>>)>,
}

impl ModularExpr {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[(Rational, Vec<Vec<Vec<i64>>>)] {
        &self.terms
    }

    /// Node values from modular coordinates.
    fn nodes<S: Scalar>(&self, coords: &[S]) -> Vec<Vec<Vec<S>>> {
        self.terms
            .iter()
            .map(|(_, slots)| {
                slots
                    .iter()
                    .map(|slot| {
                        slot.iter()
                            .map(|v| {
                                v.iter().zip(coords).fold(S::zero(), |acc, (&k, c)| {
                                    acc + S::from_rational(&rat(k, 1)) * c.clone()
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Value at modular coordinates for a concrete base function.
    pub fn eval<S: Scalar>(&self, base: &BaseFunction, coords: &[S]) -> Result<S> {
        if coords.len() != self.m + 1 {
            return Err(Error::ArityMismatch(format!(
                "{} modular coordinates, {} needed",
                coords.len(),
                self.m + 1
            )));
        }
        let mut acc = S::zero();
        for ((c, _), slots) in self.terms.iter().zip(self.nodes(coords)) {
            // a term is a product of slot functionals; evaluate via a fresh
            // point list, one variable per node
            let mut pts = Vec::new();
            let mut layout = Vec::new();
            for slot in &slots {
                let mut ids = Vec::new();
                for x in slot {
                    ids.push(pts.len());
                    pts.push(x.clone());
                }
                layout.push(ids);
            }
            let term = crate::expr::BracketTerm::new(
                pts.len() - 1,
                layout,
                crate::expr::Symbol::generic(),
            )?;
            acc =
                acc + S::from_rational(c) * eval_expr(&SpectralExpr::from_term(term), base, &pts)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for ModularExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let node = |v: &Vec<i64>| -> String {
            let mut s = String::new();
            for (k, &c) in v.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let name = if k == 0 {
                    "x0".to_string()
                } else {
                    format!("X{k}")
                };
                let sign = if c < 0 {
                    "-"
                } else if s.is_empty() {
                    ""
                } else {
                    "+"
                };
                let mag = if c.abs() == 1 {
                    String::new()
                } else {
                    format!("{}", c.abs())
                };
                s.push_str(&format!("{sign}{mag}{name}"));
            }
            if s.is_empty() {
                "0".into()
            } else {
                s
            }
        };
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, slots)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if !c.is_one() {
                write!(f, "({c})*")?;
            }
            let parts: Vec<String> = slots
                .iter()
                .map(|s| format!("[{}]", s.iter().map(node).collect::<Vec<_>>().join(",")))
                .collect();
            write!(f, "f({})", parts.join(","))?;
        }
        Ok(())
    }
}

/// `xⱼ = x₀ + 𝐱⁽¹⁾ + ⋯ + 𝐱⁽ʲ⁾` substituted into every node.
pub fn to_modular(expr: &SpectralExpr) -> ModularExpr {
    let m = expr.m();
    let node = |j: usize| -> Vec<i64> { (0..=m).map(|k| if k <= j { 1 } else { 0 }).collect() };
    ModularExpr {
        m,
        n: expr.n(),
        terms: expr
            .terms()
            .map(|(t, c)| {
                (
                    c.clone(),
                    t.slots()
                        .iter()
                        .map(|s| s.iter().map(|&v| node(v)).collect())
                        .collect(),
                )
            })
            .collect(),
    }
}

/// Inverse of [`to_modular`]; fails on nodes that are not of the form
/// `x₀ + 𝐱⁽¹⁾ + ⋯ + 𝐱⁽ʲ⁾`.
pub fn from_modular(expr: &ModularExpr) -> Result<SpectralExpr> {
    let var = |v: &Vec<i64>| -> Result<usize> {
        let j = v.iter().take_while(|&&c| c == 1).count();
        if j == 0 || v[j..].iter().any(|&c| c != 0) {
            return Err(Error::MalformedTerm(format!(
                "node {v:?} is not a plain variable"
            )));
        }
        Ok(j - 1)
    };
    let mut out = SpectralExpr::zero(expr.m, expr.n);
    for (c, slots) in &expr.terms {
        let s = slots
            .iter()
            .map(|slot| slot.iter().map(var).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let t = crate::expr::BracketTerm::new(expr.m, s, crate::expr::Symbol::generic())?;
        out = out.add(&SpectralExpr::from_term(t).scale(c))?;
    }
    Ok(out)
}

/// `K(x₀, x₁) = K̃(x₁ − x₀)`.
pub fn modular_kernel(k_tilde: &BaseFunction) -> Result<BaseFunction> {
    BaseFunction::linear_form(k_tilde.clone(), vec![rat(-1, 1), rat(1, 1)])
}

/// The three faces of `K` in modular form: `(δ₀K, δ₁K, δ₂K)` at
/// `(𝐱⁽¹⁾, 𝐱⁽²⁾)` from their difference-quotient closed forms.
pub fn modular_faces(k_tilde: &BaseFunction, x1: f64, x2: f64) -> Result<[Complex64; 3]> {
    let kt = |x: f64| crate::numeval::eval_base::<Complex64>(k_tilde, &[Complex64::new(x, 0.0)]);
    Ok([
        (kt(x1 + x2)? - kt(x2)?) / (-x1),
        (kt(x1)? - kt(x1 + x2)?) / (-x2),
        (kt(-x2)? - kt(x1)?) / (x2 + x1),
    ])
}

/// Compares `(δ₀ + δ₁ − δ₂)K`, computed by the engine with
/// `K(x₀,x₁) = K̃(x₁ − x₀)`, with the closed modular expression in which
/// `K̃(−𝐱⁽²⁾)` is replaced by `K̃(𝐱⁽²⁾)`. Returns the largest relative
/// residual over the sample points `(x₀, 𝐱⁽¹⁾, 𝐱⁽²⁾)`.
pub fn cm_modular_compare(k_tilde: &BaseFunction, samples: &[[f64; 3]]) -> Result<f64> {
    use GeneratorKind::*;
    if k_tilde.arity() != 1 {
        return Err(Error::ArityMismatch(
            "K̃ must be a function of one variable".into(),
        ));
    }
    let kt = |x: f64| crate::numeval::eval_base::<Complex64>(k_tilde, &[Complex64::new(x, 0.0)]);
    for s in samples {
        for x in s {
            let (a, b) = (kt(*x)?, kt(-*x)?);
            if (a - b).norm() > 1e-12 * a.norm().max(1.0) {
                return Err(Error::Precondition(format!(
                    "K̃ is not even: K̃({x}) ≠ K̃({})",
                    -x
                )));
            }
        }
    }
    let base = modular_kernel(k_tilde)?;
    let k = SpectralExpr::generic(1);
    let h = apply(&[Face(0)], &k)?
        .add(&apply(&[Face(1)], &k)?)?
        .sub(&apply(&[LastFace], &k)?)?;
    let mut worst: f64 = 0.0;
    for &[x0, x1, x2] in samples {
        let pts = [x0, x0 + x1, x0 + x1 + x2].map(|v| Complex64::new(v, 0.0));
        let engine: Complex64 = eval_expr(&h, &base, &pts)?;
        let closed = (kt(x1 + x2)? - kt(x2)?) / (-x1) + (kt(x1)? - kt(x1 + x2)?) / (-x2)
            - (kt(x2)? - kt(x1)?) / (x2 + x1);
        worst = worst.max(
            (engine - closed).norm() / engine.norm().max(closed.norm()).max(f64::MIN_POSITIVE),
        );
    }
    Ok(worst)
}

/// `T` scaled by a rational constant.
pub fn scale_t(t: &SpectralFn, c: &Rational) -> Result<SpectralFn> {
    t.with_expr(t.expr().scale(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::int;
    use crate::matrixcalc::residual;
    use crate::sampling::rng;

    #[test]
    fn symmetric_t_gives_minus_two_t() {
        // T(x₀,x₁) = g(x₀)g(x₁) is τ-invariant
        let t = SpectralExpr::generic(1);
        let tau_t = apply(&[GeneratorKind::Cyclic], &t).unwrap();
        assert_ne!(t, tau_t);
        let sym = t.add(&tau_t).unwrap();
        let c = cm_coefficients(&sym).unwrap();
        assert_eq!(c.k, sym.scale(&int(-2)));
    }

    #[test]
    fn rederivation_matches_closed_form() {
        let t = SpectralExpr::generic(1);
        let c = cm_coefficients(&t).unwrap();
        let r = rederive(&t).unwrap();
        assert!(r.shift_identity && r.part_two_closed);
        assert_eq!(r.k, c.k);
        assert_eq!(r.h().unwrap(), c.h);
        assert!(cm_coefficients(&SpectralExpr::generic(2)).is_err());
    }

    #[test]
    fn gradient_trivial_cases() {
        let ctx = MatrixContext::random(3, 4, 0);
        let zero = SpectralFn::new(SpectralExpr::zero(1, 1), TPreset::ExpExp.base()).unwrap();
        assert!(gradient(&zero, &ctx).unwrap().norm() == 0.0);
        // D = h² commutes with h
        let h = ctx.h().clone();
        let still = MatrixContext::new(h.clone(), &h * &h, vec![]).unwrap();
        let g = gradient(&TPreset::ExpExp.function(), &still).unwrap();
        assert!(g.norm() <= 1e-10, "{}", g.norm());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ctx = MatrixContext::random(11, 4, 0);
        let mut r = rng(12);
        let dirs: Vec<Matrix> = (0..3).map(|_| ctx.random_hermitian(&mut r)).collect();
        for p in TPreset::ALL {
            let rep = gradient_check(&p.function(), &ctx, &dirs, 1e-5).unwrap();
            assert!(rep.max_error() <= 1e-6, "{p}: {:?}", rep.rows);
        }
        let ident = [ctx.identity()];
        let rep = gradient_check(&TPreset::ExpExp.function(), &ctx, &ident, 1e-5).unwrap();
        // T(x₀+ε, x₁+ε) = e^{ε/2} T(x₀, x₁), so ∂F along 1 is F/2
        let f = functional_value(&TPreset::ExpExp.function(), &ctx).unwrap();
        assert!((rep.rows[0].1 - f / 2.0).norm() <= 1e-9 * f.norm());
        assert!(rep.max_error() <= 1e-6);
    }

    #[test]
    fn gradient_is_linear_in_t() {
        let ctx = MatrixContext::random(5, 4, 0);
        let t = TPreset::CubicSquare.function();
        let c = rat(-7, 3);
        let g = gradient(&t, &ctx).unwrap();
        let gc = gradient(&scale_t(&t, &c).unwrap(), &ctx).unwrap();
        let coeffs = cm_coefficients(t.expr()).unwrap();
        let scaled = cm_coefficients(&t.expr().scale(&c)).unwrap();
        assert_eq!(scaled.k, coeffs.k.scale(&c));
        assert_eq!(scaled.h, coeffs.h.scale(&c));
        assert!(residual(&gc, &(g * Complex64::new(-7.0 / 3.0, 0.0))) < 1e-12);
    }

    #[test]
    fn gradient_is_determined_by_pairings() {
        let ctx = MatrixContext::random(8, 4, 0);
        let g = gradient(&TPreset::OmegaOmega.function(), &ctx).unwrap();
        let pairings: Vec<Complex64> = hermitian_basis(4)
            .iter()
            .map(|a| ctx.trace(&(&g * a)))
            .collect();
        let back = recover_from_pairings(4, &pairings).unwrap();
        assert!((back - g).norm() <= 1e-9);
    }

    #[test]
    fn modular_round_trip_and_faces() {
        use GeneratorKind::*;
        for n in 0..=3 {
            for kinds in [
                vec![Face(0)],
                vec![Cyclic],
                vec![LastFace],
                vec![Face(n), Face(0)],
            ] {
                let e = apply(&kinds, &SpectralExpr::generic(n)).unwrap();
                assert_eq!(from_modular(&to_modular(&e)).unwrap(), e);
            }
        }
        let kt = BaseFunction::exp(rat(1, 3));
        let base = modular_kernel(&kt).unwrap();
        let k = SpectralExpr::generic(1);
        let (x0, x1, x2) = (0.4, -1.3, 2.1);
        let coords = [x0, x1, x2].map(|v| Complex64::new(v, 0.0));
        let closed = modular_faces(&kt, x1, x2).unwrap();
        for (i, kind) in [Face(0), Face(1), LastFace].into_iter().enumerate() {
            let e = apply(&[kind], &k).unwrap();
            let v: Complex64 = to_modular(&e).eval(&base, &coords).unwrap();
            assert!(
                (v - closed[i]).norm() <= 1e-12 * v.norm().max(1.0),
                "{kind:?}"
            );
        }
    }

    #[test]
    fn omega_coefficients_agree_with_engine() {
        let lambda = crate::omega::default_lambda();
        let (k, h) = omega_coefficients(&lambda).unwrap();
        assert_eq!(k.coeff(&[1, 1]), rat(-2, 1));
        let c = cm_coefficients(&SpectralExpr::generic(1)).unwrap();
        let base = TPreset::OmegaOmega.base();
        let pts = [0.3, -1.1, 2.4].map(|v| Complex64::new(v, 0.0));
        let engine: Complex64 = eval_expr(&c.h, &base, &pts).unwrap();
        let indexed: Complex64 = h.eval(&pts).unwrap();
        assert!((engine - indexed).norm() <= 1e-12 * engine.norm());
    }

    #[test]
    fn even_kernel_comparison() {
        let samples = [[0.2, 0.7, -1.9], [-1.0, 1.5, 0.8], [0.0, -0.6, -1.1]];
        assert!(cm_modular_compare(&BaseFunction::cosh(), &samples).unwrap() <= 1e-9);
        assert!(matches!(
            cm_modular_compare(&BaseFunction::exp(rat(1, 1)), &samples),
            Err(Error::Precondition(_))
        ));
    }
}
