//! Evaluation of (confluent) divided differences and bracket terms.
//!
//! Everything is generic over [`Scalar`]: `Complex64` for the floating path
//! and [`Exact`] (complex numbers with rational parts) for the exact path.
//! Repeated nodes are handled by a Newton table seeded with `f⁽ᵏ⁾(x)/k!`, never
//! by limits.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::{BaseFunction, BlackBox, BracketTerm, ComplexRational, Rational, SpectralExpr};

/// Complex number with arbitrary-precision rational parts.
pub type Exact = Complex<Rational>;

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn from_complex_rational(c: &ComplexRational) -> Self;

    fn to_c64(&self) -> Complex64;

    /// `exp(rate · x)`.
    fn exp_rate(rate: &Rational, x: &Self) -> Result<Self>;

    fn black_box(bb: &BlackBox, point: &[Self], orders: &[usize]) -> Result<Self>;

    fn from_int(k: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(k)))
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_complex_rational(c: &ComplexRational) -> Self {
        c.to_c64()
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn exp_rate(rate: &Rational, x: &Self) -> Result<Self> {
        Ok((Self::from_rational(rate) * x).exp())
    }

    fn black_box(bb: &BlackBox, point: &[Self], orders: &[usize]) -> Result<Self> {
        bb.partial(point, orders)
            .ok_or_else(|| Error::DerivativeUnavailable {
                function: bb.name().to_string(),
                order: orders.iter().sum(),
            })
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        Complex::new(r.clone(), Rational::zero())
    }

    fn from_complex_rational(c: &ComplexRational) -> Self {
        Complex::new(c.re.clone(), c.im.clone())
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn exp_rate(_: &Rational, _: &Self) -> Result<Self> {
        Err(Error::NotExact("the exponential is transcendental".into()))
    }

    fn black_box(bb: &BlackBox, _: &[Self], _: &[usize]) -> Result<Self> {
        Err(Error::NotExact(format!("black box `{}`", bb.name())))
    }
}

/// Exact point from real rationals.
pub fn exact_point(values: &[Rational]) -> Vec<Exact> {
    values.iter().map(Exact::from_rational).collect()
}

fn powu<S: Scalar>(x: &S, mut k: usize) -> S {
    let mut base = x.clone();
    let mut acc = S::one();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        k >>= 1;
    }
    acc
}

fn factorial(k: usize) -> Rational {
    (1..=k).fold(Rational::one(), |a, i| {
        a * Rational::from_integer(BigInt::from(i))
    })
}

/// `k`-th derivative of a one-variable base function at `x`.
pub fn derivative<S: Scalar>(base: &BaseFunction, x: &S, k: usize) -> Result<S> {
    match base {
        BaseFunction::Exponential { rate } => {
            Ok(S::exp_rate(rate, x)? * powu(&S::from_rational(rate), k))
        }
        BaseFunction::Monomial { degree } => {
            let d = *degree as usize;
            if k > d {
                return Ok(S::zero());
            }
            let c = (d - k + 1..=d).fold(Rational::one(), |a, i| {
                a * Rational::from_integer(BigInt::from(i))
            });
            Ok(S::from_rational(&c) * powu(x, d - k))
        }
        BaseFunction::Resolvent { lambda, power } => {
            let diff = x.clone() - S::from_complex_rational(lambda);
            if diff.is_zero() {
                return Err(Error::Pole(format!("{base} at {:?}", x.to_c64())));
            }
            let p = *power as usize;
            // ∂ᵏ (x-λ)^-p = (-1)^k p(p+1)⋯(p+k-1) (x-λ)^-(p+k)
            let mut c = (p..p + k).fold(Rational::one(), |a, i| {
                a * Rational::from_integer(BigInt::from(i))
            });
            if k % 2 == 1 {
                c = -c;
            }
            Ok(S::from_rational(&c) / powu(&diff, p + k))
        }
        BaseFunction::SeparableProduct(v) if v.len() == 1 => derivative(&v[0], x, k),
        BaseFunction::LinearForm { outer, weights } if weights.len() == 1 => {
            let w = S::from_rational(&weights[0]);
            Ok(powu(&w, k) * derivative(outer, &(w * x.clone()), k)?)
        }
        BaseFunction::BlackBox(b) if b.arity() == 1 => {
            S::black_box(b, std::slice::from_ref(x), &[k])
        }
        other => Err(Error::ArityMismatch(format!(
            "{other} takes {} arguments, expected one",
            other.arity()
        ))),
    }
}

/// `∂^orders f(point)` for a base function of any arity.
pub fn mixed_partial<S: Scalar>(base: &BaseFunction, point: &[S], orders: &[usize]) -> Result<S> {
    if point.len() != base.arity() || orders.len() != point.len() {
        return Err(Error::ArityMismatch(format!(
            "{base} takes {} arguments, got {}",
            base.arity(),
            point.len()
        )));
    }
    match base {
        BaseFunction::SeparableProduct(v) => {
            let mut acc = S::one();
            for ((f, x), &k) in v.iter().zip(point).zip(orders) {
                acc = acc * derivative(f, x, k)?;
            }
            Ok(acc)
        }
        BaseFunction::LinearForm { outer, weights } => {
            let mut arg = S::zero();
            let mut coeff = S::one();
            for ((w, x), &k) in weights.iter().zip(point).zip(orders) {
                let w = S::from_rational(w);
                arg = arg + w.clone() * x.clone();
                coeff = coeff * powu(&w, k);
            }
            Ok(coeff * derivative(outer, &arg, orders.iter().sum())?)
        }
        BaseFunction::BlackBox(b) => S::black_box(b, point, orders),
        _ => derivative(base, &point[0], orders[0]),
    }
}

pub fn eval_base<S: Scalar>(base: &BaseFunction, point: &[S]) -> Result<S> {
    mixed_partial(base, point, &vec![0; point.len()])
}

/// Nodes regrouped so equal values are adjacent, with each node's group id.
fn group_nodes<S: Scalar>(nodes: &[S]) -> (Vec<S>, Vec<usize>, Vec<usize>) {
    let mut distinct: Vec<S> = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    for x in nodes {
        match distinct.iter().position(|d| d == x) {
            Some(g) => mult[g] += 1,
            None => {
                distinct.push(x.clone());
                mult.push(1);
            }
        }
    }
    let groups: Vec<usize> = mult
        .iter()
        .enumerate()
        .flat_map(|(g, &m)| std::iter::repeat_n(g, m))
        .collect();
    (distinct, mult, groups)
}

/// Triangular Newton table over nodes with equal values adjacent.
#[derive(Clone, Debug)]
pub struct DividedDifferenceTable<S> {
    pub nodes: Vec<S>,
    /// `table[i][k]` is the divided difference over `nodes[i-k..=i]`.
    pub table: Vec<Vec<S>>,
}

impl<S: Scalar> DividedDifferenceTable<S> {
    /// `deriv(x, k)` must return `f⁽ᵏ⁾(x)`.
    pub fn build(nodes: &[S], deriv: impl Fn(&S, usize) -> Result<S>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Precondition(
                "divided difference needs a node".into(),
            ));
        }
        let (distinct, _, groups) = group_nodes(nodes);
        let z: Vec<S> = groups.iter().map(|&g| distinct[g].clone()).collect();
        let table = newton(
            &z,
            &groups,
            |i, k| {
                let v = deriv(&z[i], k)?;
                Ok(v / S::from_rational(&factorial(k)))
            },
            |hi: &S, lo: &S, d: &S| (hi.clone() - lo.clone()) / d.clone(),
        )?;
        Ok(DividedDifferenceTable { nodes: z, table })
    }

    pub fn value(&self) -> S {
        let k = self.nodes.len() - 1;
        self.table[k][k].clone()
    }
}

fn newton<S: Scalar, E: Clone>(
    z: &[S],
    groups: &[usize],
    seed: impl Fn(usize, usize) -> Result<E>,
    combine: impl Fn(&E, &E, &S) -> E,
) -> Result<Vec<Vec<E>>> {
    let k = z.len();
    let mut t: Vec<Vec<E>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut row: Vec<E> = Vec::with_capacity(i + 1);
        row.push(seed(i, 0)?);
        for j in 1..=i {
            let e = if groups[i] == groups[i - j] {
                seed(i, j)?
            } else {
                combine(
                    &row[j - 1],
                    &t[i - 1][j - 1],
                    &(z[i].clone() - z[i - j].clone()),
                )
            };
            row.push(e);
        }
        t.push(row);
    }
    Ok(t)
}

/// `f[x₀, …, x_k]` for a one-variable base function.
pub fn divided_difference<S: Scalar>(base: &BaseFunction, nodes: &[S]) -> Result<S> {
    divided_difference_with(nodes, |x, k| derivative(base, x, k))
}

pub fn divided_difference_with<S: Scalar>(
    nodes: &[S],
    deriv: impl Fn(&S, usize) -> Result<S>,
) -> Result<S> {
    Ok(DividedDifferenceTable::build(nodes, deriv)?.value())
}

/// A divided difference written as the linear functional
/// `Σ weight · f⁽ᵒʳᵈᵉʳ⁾(node)`.
#[derive(Clone, Debug)]
pub struct SlotFunctional<S> {
    pub terms: Vec<(S, usize, S)>,
}

impl<S: Scalar> SlotFunctional<S> {
    pub fn new(nodes: &[S]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Precondition(
                "divided difference needs a node".into(),
            ));
        }
        let (distinct, mult, groups) = group_nodes(nodes);
        let z: Vec<S> = groups.iter().map(|&g| distinct[g].clone()).collect();
        // basis index of (group, order)
        let offsets: Vec<usize> = mult
            .iter()
            .scan(0, |acc, &m| {
                let o = *acc;
                *acc += m;
                Some(o)
            })
            .collect();
        let dim = nodes.len();
        let table = newton(
            &z,
            &groups,
            |i, k| {
                let mut v = vec![S::zero(); dim];
                v[offsets[groups[i]] + k] = S::one() / S::from_rational(&factorial(k));
                Ok(v)
            },
            |hi: &Vec<S>, lo: &Vec<S>, d: &S| {
                hi.iter()
                    .zip(lo)
                    .map(|(a, b)| (a.clone() - b.clone()) / d.clone())
                    .collect()
            },
        )?;
        let last = &table[dim - 1][dim - 1];
        let mut terms = Vec::new();
        for (g, x) in distinct.iter().enumerate() {
            for k in 0..mult[g] {
                let w = last[offsets[g] + k].clone();
                if !w.is_zero() {
                    terms.push((x.clone(), k, w));
                }
            }
        }
        Ok(SlotFunctional { terms })
    }
}

fn check_points<S>(term: &BracketTerm, base: &BaseFunction, pts: &[S]) -> Result<()> {
    if pts.len() != term.arity_in() + 1 {
        return Err(Error::ArityMismatch(format!(
            "{} points for a term in x0..x{}",
            pts.len(),
            term.arity_in()
        )));
    }
    if base.arity() != term.slots().len() {
        return Err(Error::ArityMismatch(format!(
            "{base} takes {} arguments but {term} has {} slots",
            base.arity(),
            term.slots().len()
        )));
    }
    Ok(())
}

/// Value of a bracket term for a concrete base function at a point.
pub fn eval_bracket_term<S: Scalar>(
    term: &BracketTerm,
    base: &BaseFunction,
    pts: &[S],
) -> Result<S> {
    check_points(term, base, pts)?;
    let slot_nodes: Vec<Vec<S>> = term
        .slots()
        .iter()
        .map(|s| s.iter().map(|&v| pts[v].clone()).collect())
        .collect();
    match base {
        BaseFunction::SeparableProduct(factors) => {
            let mut acc = S::one();
            for (f, nodes) in factors.iter().zip(&slot_nodes) {
                acc = acc * divided_difference(f, nodes)?;
            }
            Ok(acc)
        }
        _ if base.arity() == 1 => divided_difference(base, &slot_nodes[0]),
        _ => {
            let functionals = slot_nodes
                .iter()
                .map(|n| SlotFunctional::new(n))
                .collect::<Result<Vec<_>>>()?;
            let mut acc = S::zero();
            let mut idx = vec![0usize; functionals.len()];
            loop {
                let mut weight = S::one();
                let mut point = Vec::with_capacity(idx.len());
                let mut orders = Vec::with_capacity(idx.len());
                for (f, &i) in functionals.iter().zip(&idx) {
                    let (x, k, w) = &f.terms[i];
                    weight = weight * w.clone();
                    point.push(x.clone());
                    orders.push(*k);
                }
                acc = acc + weight * mixed_partial(base, &point, &orders)?;
                // odometer
                let mut p = 0;
                loop {
                    if p == idx.len() {
                        return Ok(acc);
                    }
                    idx[p] += 1;
                    if idx[p] < functionals[p].terms.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
            }
        }
    }
}

/// `Σ coeff · eval_bracket_term`.
pub fn eval_expr<S: Scalar>(expr: &SpectralExpr, base: &BaseFunction, pts: &[S]) -> Result<S> {
    let mut acc = S::zero();
    for (t, c) in expr.terms() {
        acc = acc + S::from_rational(c) * eval_bracket_term(t, base, pts)?;
    }
    Ok(acc)
}

/// `Σ |coeff · term value|`, the natural scale for relative errors of a sum.
pub fn eval_expr_magnitude(
    expr: &SpectralExpr,
    base: &BaseFunction,
    pts: &[Complex64],
) -> Result<f64> {
    let mut acc = 0.0;
    for (t, c) in expr.terms() {
        acc += (Complex64::from_rational(c) * eval_bracket_term(t, base, pts)?).norm();
    }
    Ok(acc)
}

/// `|a - b| / max(scale, tiny)`.
pub fn relative_error(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Relative residual of `(fg)[x₀..xₙ] = Σₖ f[x₀..xₖ] g[xₖ..xₙ]`, with the
/// left side computed from closed-form derivatives of the product.
pub fn leibniz_check(f: &BaseFunction, g: &BaseFunction, nodes: &[Complex64]) -> Result<f64> {
    let lhs = divided_difference_with(nodes, |x, k| {
        let mut acc = Complex64::zero();
        let mut binom = 1.0;
        for i in 0..=k {
            acc += binom * derivative(f, x, i)? * derivative(g, x, k - i)?;
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        Ok(acc)
    })?;
    let mut rhs = Complex64::zero();
    let mut scale = 0.0;
    for k in 0..nodes.len() {
        let v = divided_difference(f, &nodes[..=k])? * divided_difference(g, &nodes[k..])?;
        rhs += v;
        scale += v.norm();
    }
    Ok(relative_error(lhs, rhs, scale.max(lhs.norm())))
}

/// Exact form of [`leibniz_check`]: returns whether both sides agree.
pub fn leibniz_check_exact(f: &BaseFunction, g: &BaseFunction, nodes: &[Exact]) -> Result<bool> {
    let lhs = divided_difference_with(nodes, |x, k| {
        let mut acc = Exact::zero();
        for i in 0..=k {
            let binom = factorial(k) / (factorial(i) * factorial(k - i));
            acc += Exact::from_rational(&binom) * derivative(f, x, i)? * derivative(g, x, k - i)?;
        }
        Ok(acc)
    })?;
    let mut rhs = Exact::zero();
    for k in 0..nodes.len() {
        rhs += divided_difference(f, &nodes[..=k])? * divided_difference(g, &nodes[k..])?;
    }
    Ok(lhs == rhs)
}

/// Relative residual of the composition rule
/// `(f[y₀,…,y_q,z])[x₀,…,x_p]_z = f[y₀,…,y_q,x₀,…,x_p]`.
///
/// The left side treats `z ↦ f[y…, z]` as a function and expands its divided
/// difference over the `x`'s by the explicit sum formula; nodes must be
/// pairwise distinct.
pub fn composition_rule_check(f: &BaseFunction, ys: &[Complex64], xs: &[Complex64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Precondition(
            "composition rule needs an x node".into(),
        ));
    }
    let mut lhs = Complex64::zero();
    let mut scale = 0.0;
    for (l, xl) in xs.iter().enumerate() {
        let mut nodes = ys.to_vec();
        nodes.push(*xl);
        let mut v = divided_difference(f, &nodes)?;
        for (s, xs_) in xs.iter().enumerate() {
            if s != l {
                let d = xl - xs_;
                if d == Complex64::zero() {
                    return Err(Error::Precondition("x nodes must be distinct".into()));
                }
                v /= d;
            }
        }
        lhs += v;
        scale += v.norm();
    }
    let mut all = ys.to_vec();
    all.extend_from_slice(xs);
    let rhs = divided_difference(f, &all)?;
    Ok(relative_error(lhs, rhs, scale.max(rhs.norm())))
}

/// Value of `expr` on the separable resolvent kernel `Π 1/(λₖ − uₖ)`, whose
/// divided difference over a slot is `Π_{v ∈ slot} 1/(λₖ − x_v)`.
pub fn eval_on_kernel(
    expr: &SpectralExpr,
    lambdas: &[Rational],
    xs: &[Rational],
) -> Result<Rational> {
    if lambdas.len() != expr.n() + 1 || xs.len() != expr.m() + 1 {
        return Err(Error::ArityMismatch(format!(
            "kernel point has {} nodes and {} parameters",
            xs.len(),
            lambdas.len()
        )));
    }
    let mut acc = Rational::zero();
    for (term, c) in expr.terms() {
        let mut v = c.clone();
        for (slot, lam) in term.slots().iter().zip(lambdas) {
            for &x in slot {
                let d = lam - &xs[x];
                if d.is_zero() {
                    return Err(Error::Pole(format!("λ = x{x}")));
                }
                v /= d;
            }
        }
        acc += v;
    }
    Ok(acc)
}

/// Exact identity test for two expressions as operators on smooth functions.
///
/// Products of resolvents span a dense class, and on them every bracket term
/// is a rational function of `(λ, x)`. The difference is evaluated exactly
/// at `trials` random rational points with large denominators.
pub fn kernel_equal(a: &SpectralExpr, b: &SpectralExpr, seed: u64, trials: usize) -> Result<bool> {
    use rand::Rng;
    if a.m() != b.m() || a.n() != b.n() {
        return Err(Error::ArityMismatch("expressions differ in arity".into()));
    }
    if a == b {
        return Ok(true);
    }
    let diff = a.sub(b)?;
    let mut r = crate::sampling::rng(seed);
    let draw = |r: &mut crate::sampling::TestRng| {
        Rational::new(
            BigInt::from(r.random_range(-1_000_000i64..=1_000_000)),
            BigInt::from(r.random_range(1i64..=997)),
        )
    };
    for _ in 0..trials {
        let xs: Vec<Rational> = (0..=diff.m()).map(|_| draw(&mut r)).collect();
        let lambdas: Vec<Rational> = (0..=diff.n()).map(|_| draw(&mut r)).collect();
        match eval_on_kernel(&diff, &lambdas, &xs) {
            Ok(v) if !v.is_zero() => return Ok(false),
            Ok(_) => {}
            Err(Error::Pole(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_slot(terms: &[(i64, [&[usize]; 2])]) -> SpectralExpr {
        SpectralExpr::from_terms(
            1,
            1,
            terms.iter().map(|(c, [a, b])| {
                let t = BracketTerm::new(
                    1,
                    vec![a.to_vec(), b.to_vec()],
                    crate::expr::Symbol::generic(),
                )
                .unwrap();
                (t, crate::expr::rat(*c, 1))
            }),
        )
        .unwrap()
    }

    #[test]
    fn kernel_detects_hidden_identity() {
        // f(x0,[x0,x1]) + f([x0,x1],x1) = f([x0,x1],x0) + f(x1,[x0,x1]): both equal (f(x0,x0) − f(x1,x1))/(x0 − x1)
        let a = two_slot(&[(1, [&[0], &[0, 1]]), (1, [&[0, 1], &[1]])]);
        let b = two_slot(&[(1, [&[0, 1], &[0]]), (1, [&[1], &[0, 1]])]);
        assert_ne!(a, b);
        assert!(kernel_equal(&a, &b, 1, 3).unwrap());
        // cross-check on an asymmetric smooth function
        let f = BaseFunction::SeparableProduct(vec![
            BaseFunction::exp(crate::expr::rat(1, 1)),
            BaseFunction::monomial(3),
        ]);
        let pts = [Complex64::new(0.3, 0.0), Complex64::new(-1.1, 0.0)];
        let va: Complex64 = eval_expr(&a, &f, &pts).unwrap();
        let vb: Complex64 = eval_expr(&b, &f, &pts).unwrap();
        assert!((va - vb).norm() < 1e-12 * va.norm().max(1.0));
        let c = two_slot(&[(1, [&[0, 1], &[0]])]);
        let d = two_slot(&[(1, [&[0], &[0, 1]])]);
        assert!(!kernel_equal(&c, &d, 1, 3).unwrap());
    }
    use crate::expr::{int, rat, Symbol};
    use crate::sampling::{rng, separated_points};
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn e(p: i64, q: i64) -> Exact {
        Exact::from_rational(&rat(p, q))
    }

    /// Sum formula for distinct nodes.
    fn explicit<S: Scalar>(base: &BaseFunction, nodes: &[S]) -> S {
        let mut acc = S::zero();
        for (l, x) in nodes.iter().enumerate() {
            let mut v = eval_base(base, std::slice::from_ref(x)).unwrap();
            for (s, y) in nodes.iter().enumerate() {
                if s != l {
                    v = v / (x.clone() - y.clone());
                }
            }
            acc = acc + v;
        }
        acc
    }

    /// Recursive definition with exact rationals.
    fn recursive(f: &dyn Fn(&Rational) -> Rational, nodes: &[Rational]) -> Rational {
        if nodes.len() == 1 {
            return f(&nodes[0]);
        }
        let k = nodes.len() - 1;
        (recursive(f, &nodes[..k]) - recursive(f, &nodes[1..])) / (&nodes[0] - &nodes[k])
    }

    /// Complete homogeneous symmetric polynomial of degree `d`.
    fn complete_homogeneous(d: usize, xs: &[Rational]) -> Rational {
        if xs.is_empty() {
            return if d == 0 {
                Rational::one()
            } else {
                Rational::zero()
            };
        }
        let mut acc = Rational::zero();
        let mut p = Rational::one();
        for i in 0..=d {
            acc += &p * complete_homogeneous(d - i, &xs[1..]);
            p *= &xs[0];
        }
        acc
    }

    #[test]
    fn square_first_difference() {
        let v = divided_difference(&BaseFunction::monomial(2), &[e(1, 1), e(3, 1)]).unwrap();
        assert_eq!(v, e(4, 1));
    }

    #[test]
    fn exp_confluent_pair() {
        let v = divided_difference(&BaseFunction::exp(int(1)), &[c(0.3), c(0.3)]).unwrap();
        assert!((v - c(0.3).exp()).norm() < 1e-15);
        let v = divided_difference(&BaseFunction::exp(int(1)), &[c(0.3); 3]).unwrap();
        assert!((v - c(0.3).exp() / 2.0).norm() < 1e-15);
    }

    #[test]
    fn quintic_three_nodes() {
        let v =
            divided_difference(&BaseFunction::monomial(5), &[e(1, 1), e(2, 1), e(3, 1)]).unwrap();
        let f = |x: &Rational| x.pow(5);
        let oracle = recursive(&f, &[int(1), int(2), int(3)]);
        assert_eq!(oracle, int(90));
        assert_eq!(v, Exact::from_rational(&oracle));
    }

    #[test]
    fn monomials_match_complete_homogeneous() {
        let nodes = [rat(1, 2), rat(-3, 4), int(2), rat(5, 3), rat(-7, 5)];
        for d in 0..9u32 {
            for k in 1..=nodes.len() {
                let v = divided_difference(&BaseFunction::monomial(d), &exact_point(&nodes[..k]))
                    .unwrap();
                let expect = if (d as usize) + 1 >= k {
                    complete_homogeneous(d as usize + 1 - k, &nodes[..k])
                } else {
                    Rational::zero()
                };
                assert_eq!(v, Exact::from_rational(&expect), "d={d} k={k}");
            }
        }
        // repeated nodes reduce to the same symmetric function
        let rep = [rat(1, 2), rat(1, 2), int(2), int(2), int(2)];
        let v = divided_difference(&BaseFunction::monomial(7), &exact_point(&rep)).unwrap();
        assert_eq!(v, Exact::from_rational(&complete_homogeneous(3, &rep)));
    }

    #[test]
    fn resolvent_exact_matches_explicit() {
        let base = BaseFunction::resolvent(ComplexRational::from_ints(2, 1), 2).unwrap();
        let nodes = exact_point(&[int(0), rat(1, 2), int(-1), int(3)]);
        let v = divided_difference(&base, &nodes).unwrap();
        assert_eq!(v, explicit(&base, &nodes));
    }

    #[test]
    fn pole_and_missing_derivatives_are_errors() {
        let base = BaseFunction::omega(ComplexRational::from_ints(1, 0));
        assert!(matches!(
            divided_difference(&base, &[c(1.0), c(2.0)]),
            Err(Error::Pole(_))
        ));
        let bb = BaseFunction::black_box(BlackBox::new("noderiv", 1, |p, k| {
            (k[0] == 0).then(|| p[0].sin())
        }));
        assert!(divided_difference(&bb, &[c(0.1), c(0.4)]).is_ok());
        assert!(matches!(
            divided_difference(&bb, &[c(0.1), c(0.1)]),
            Err(Error::DerivativeUnavailable { .. })
        ));
        assert!(matches!(
            divided_difference(&BaseFunction::exp(int(1)), &[e(0, 1)]),
            Err(Error::NotExact(_))
        ));
    }

    #[test]
    fn confluent_limit_is_first_order() {
        let base = BaseFunction::exp(int(1));
        let x = 0.4;
        let target = divided_difference(&base, &[c(x); 3]).unwrap();
        let err = |eps: f64| {
            let v = divided_difference(&base, &[c(x), c(x + eps), c(x + 2.0 * eps)]).unwrap();
            (v - target).norm()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 1e-2 && e2 < e1);
        let ratio = e1 / e2;
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn generic_term_is_plain_evaluation() {
        let base =
            BaseFunction::separable(vec![BaseFunction::exp(int(1)), BaseFunction::monomial(3)])
                .unwrap();
        let t = BracketTerm::generic(1);
        let v = eval_bracket_term(&t, &base, &[c(0.5), c(2.0)]).unwrap();
        assert!((v - c(0.5f64.exp() * 8.0)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_difference_identity() {
        // f(z,z)[x,y] = f(x,z)[x,y]_z + f(z,y)[x,y]_z
        let base =
            BaseFunction::linear_form(BaseFunction::exp(int(1)), vec![rat(1, 2), rat(-3, 2)])
                .unwrap();
        let a = BracketTerm::new(1, vec![vec![0], vec![0, 1]], Symbol::generic()).unwrap();
        let b = BracketTerm::new(1, vec![vec![0, 1], vec![1]], Symbol::generic()).unwrap();
        let pts = [c(0.7), c(-1.3)];
        let g = |t: &BracketTerm| eval_bracket_term(t, &base, &pts).unwrap();
        // the diagonal function z ↦ f(z,z) is exp(-z)
        let diag = divided_difference(&BaseFunction::exp(int(-1)), &pts).unwrap();
        assert!((diag - (g(&a) + g(&b))).norm() < 1e-12);
        // the same through the two-argument divided difference in the second slot ordering
        let a2 = BracketTerm::new(1, vec![vec![1], vec![0, 1]], Symbol::generic()).unwrap();
        let b2 = BracketTerm::new(1, vec![vec![0, 1], vec![0]], Symbol::generic()).unwrap();
        assert!((diag - (g(&a2) + g(&b2))).norm() < 1e-12);
    }

    #[test]
    fn slot_functional_matches_table() {
        let base = BaseFunction::resolvent(ComplexRational::from_ints(2, 1), 1).unwrap();
        let nodes = exact_point(&[int(1), int(1), rat(1, 3), int(-2), rat(1, 3)]);
        let fun = SlotFunctional::new(&nodes).unwrap();
        let mut v = Exact::zero();
        for (x, k, w) in &fun.terms {
            v += w.clone() * derivative(&base, x, *k).unwrap();
        }
        assert_eq!(v, divided_difference(&base, &nodes).unwrap());
    }

    #[test]
    fn multivariate_matches_separable_path() {
        // a linear form with a single nonzero weight per factor is separable
        let sep =
            BaseFunction::separable(vec![BaseFunction::monomial(4), BaseFunction::monomial(0)])
                .unwrap();
        let lin =
            BaseFunction::linear_form(BaseFunction::monomial(4), vec![int(1), int(0)]).unwrap();
        let t = BracketTerm::new(2, vec![vec![0, 1, 1], vec![2]], Symbol::generic()).unwrap();
        let pts = exact_point(&[rat(1, 2), int(3), int(-1)]);
        assert_eq!(
            eval_bracket_term(&t, &sep, &pts).unwrap(),
            eval_bracket_term(&t, &lin, &pts).unwrap()
        );
    }

    #[test]
    fn leibniz_and_composition_examples() {
        let f = BaseFunction::exp(int(1));
        assert!(leibniz_check(&f, &f, &[c(0.0), c(1.0)]).unwrap() < 1e-14);
        let nodes = exact_point(&[int(0), rat(1, 2), int(2), int(-1)]);
        assert!(leibniz_check_exact(
            &BaseFunction::monomial(3),
            &BaseFunction::monomial(4),
            &nodes
        )
        .unwrap());
        let r = composition_rule_check(
            &BaseFunction::monomial(6),
            &[c(-2.0), c(0.5)],
            &[c(1.5), c(-0.5), c(2.5)],
        )
        .unwrap();
        assert!(r < 1e-12, "{r}");
    }

    proptest! {
        #[test]
        fn symmetric_under_permutation(seed in any::<u64>(), k in 1usize..7, rot in 0usize..7) {
            let mut r = rng(seed);
            let nodes = separated_points(&mut r, k);
            let mut perm = nodes.clone();
            perm.rotate_left(rot % k);
            perm.reverse();
            for base in [BaseFunction::exp(rat(1, 2)), BaseFunction::monomial(5),
                         BaseFunction::omega(ComplexRational::from_ints(2, 1))] {
                let a = divided_difference(&base, &nodes).unwrap();
                let b = divided_difference(&base, &perm).unwrap();
                let scale = a.norm().max(b.norm()).max(1e-300);
                prop_assert!((a - b).norm() / scale <= 1e-12);
                let ex = explicit(&base, &nodes);
                prop_assert!((a - ex).norm() / ex.norm().max(1e-300) <= 1e-9);
            }
        }

        #[test]
        fn exact_symmetry(p in prop::collection::vec(-20i64..20, 1..6), d in 0u32..8) {
            let nodes: Vec<Rational> = p.iter().map(|&v| rat(v, 3)).collect();
            let mut rev = nodes.clone();
            rev.reverse();
            let base = BaseFunction::monomial(d);
            prop_assert_eq!(
                divided_difference(&base, &exact_point(&nodes)).unwrap(),
                divided_difference(&base, &exact_point(&rev)).unwrap()
            );
        }

        #[test]
        fn leibniz_rule(seed in any::<u64>(), n in 0usize..5, a in 0u32..7, ra in -2i64..3) {
            let nodes = separated_points(&mut rng(seed), n + 1);
            let f = BaseFunction::monomial(a);
            let g = BaseFunction::exp(rat(ra, 2));
            prop_assert!(leibniz_check(&f, &g, &nodes).unwrap() <= 1e-9);
            prop_assert!(leibniz_check(&g, &g, &nodes).unwrap() <= 1e-9);
        }

        #[test]
        fn composition_rule(seed in any::<u64>(), p in 0usize..4, q in 0usize..4, d in 0u32..10) {
            let pts = separated_points(&mut rng(seed), p + q + 2);
            let f = BaseFunction::monomial(d);
            if d as usize > p + q {
                let r = composition_rule_check(&f, &pts[..q + 1], &pts[q + 1..]).unwrap();
                prop_assert!(r <= 1e-9, "{}", r);
            } else {
                // both sides vanish; compare the full divided difference absolutely
                let v = divided_difference(&f, &pts).unwrap();
                prop_assert!(v.norm() <= 1e-9);
            }
        }
    }
}
