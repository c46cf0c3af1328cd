//! The resolvent family `ω_α = ω^{α₀} ⊗ ⋯ ⊗ ω^{αₙ}`, `ω(x) = (x − λ)⁻¹`,
//! with the generators acting on the index `α`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{
    int, BaseFunction, ComplexRational, Rational, SpectralExpr, TensorExpr, TensorFactor,
};
use crate::numeval::{eval_expr, exact_point, Exact, Scalar};
use crate::ops::{GeneratorKind, OperatorWord};
use crate::sampling::{rng, separated_points};

/// A single signed `coeff · ω_α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaTerm {
    pub coeff: Rational,
    pub alpha: Vec<u32>,
}

/// Linear combination of `ω_α` with a common length of `α` and a shared
/// parameter `λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaExpr {
    lambda: ComplexRational,
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

/// Default parameter `λ = 2 + i`.
pub fn default_lambda() -> ComplexRational {
    ComplexRational::from_ints(2, 1)
}

impl OmegaExpr {
    pub fn zero(lambda: ComplexRational, n: usize) -> Self {
        OmegaExpr {
            lambda,
            n,
            terms: BTreeMap::new(),
        }
    }

    /// `ω_α`; every entry of `α` must be positive.
    pub fn new(lambda: ComplexRational, alpha: &[u32]) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::MalformedTerm(
                "ω index needs at least one entry".into(),
            ));
        }
        if alpha.contains(&0) {
            return Err(Error::MalformedTerm(format!(
                "ω index {alpha:?} has a zero entry"
            )));
        }
        let mut e = OmegaExpr::zero(lambda, alpha.len() - 1);
        e.terms.insert(alpha.to_vec(), Rational::one());
        Ok(e)
    }

    /// `ω_{(1,…,1)}` with `n + 1` entries.
    pub fn ones(lambda: ComplexRational, n: usize) -> Self {
        OmegaExpr::new(lambda, &vec![1; n + 1]).expect("all-ones index is valid")
    }

    pub fn lambda(&self) -> &ComplexRational {
        &self.lambda
    }

    /// Length of `α` minus one.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = OmegaTerm> + '_ {
        self.terms.iter().map(|(a, c)| OmegaTerm {
            coeff: c.clone(),
            alpha: a.clone(),
        })
    }

    pub fn coeff(&self, alpha: &[u32]) -> Rational {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn accumulate(&mut self, alpha: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self
            .terms
            .entry(alpha.clone())
            .or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    fn compatible(&self, other: &OmegaExpr) -> Result<()> {
        if self.n != other.n || self.lambda != other.lambda {
            return Err(Error::ArityMismatch(
                "ω expressions differ in length or λ".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &OmegaExpr) -> Result<OmegaExpr> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.accumulate(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &OmegaExpr) -> Result<OmegaExpr> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> OmegaExpr {
        let mut out = OmegaExpr::zero(self.lambda.clone(), self.n);
        for (a, v) in &self.terms {
            out.accumulate(a.clone(), v * c);
        }
        out
    }

    fn map_terms(&self, n: usize, f: impl Fn(&[u32], &Rational, &mut OmegaExpr)) -> OmegaExpr {
        let mut out = OmegaExpr::zero(self.lambda.clone(), n);
        for (a, c) in &self.terms {
            f(a, c, &mut out);
        }
        out
    }

    /// `δⱼ` for `j ≤ n`, splitting `ω^p` in slot `j` by
    /// `Δ(ω^p) = −Σ_{i+k=p+1} ω^i ⊗ ω^k`; `j = n + 1` is the last face `τδ₀`.
    pub fn face(&self, j: usize) -> Result<OmegaExpr> {
        if j == self.n + 1 {
            return self.face(0)?.cyclic();
        }
        if j > self.n + 1 {
            return Err(Error::IndexOutOfRange {
                what: "face",
                index: j,
                max: self.n + 1,
            });
        }
        Ok(self.map_terms(self.n + 1, |a, c, out| {
            let p = a[j];
            for i in 1..=p {
                let mut b = Vec::with_capacity(a.len() + 1);
                b.extend_from_slice(&a[..j]);
                b.push(i);
                b.push(p + 1 - i);
                b.extend_from_slice(&a[j + 1..]);
                out.accumulate(b, -c.clone());
            }
        }))
    }

    /// `σⱼ` contracts `αⱼ + αⱼ₊₁`; `j = n` is the extra degeneracy, which
    /// contracts `α₀ + αₙ` into the first slot.
    pub fn degeneracy(&self, j: usize) -> Result<OmegaExpr> {
        if self.n == 0 || j > self.n {
            return Err(Error::IndexOutOfRange {
                what: "degeneracy",
                index: j,
                max: self.n.saturating_sub(1),
            });
        }
        Ok(self.map_terms(self.n - 1, |a, c, out| {
            let b = if j < self.n {
                let mut b = a.to_vec();
                let merged = b[j] + b[j + 1];
                b.splice(j..=j + 1, [merged]);
                b
            } else {
                let mut b = a[..self.n].to_vec();
                b[0] += a[self.n];
                b
            };
            out.accumulate(b, c.clone());
        }))
    }

    /// `τ f(x₀,…,xₙ) = f(xₙ, x₀, …, xₙ₋₁)` moves the power of slot `k + 1`
    /// onto `x_k`: `α ↦ (α₁, …, αₙ, α₀)`.
    pub fn cyclic(&self) -> Result<OmegaExpr> {
        Ok(self.map_terms(self.n, |a, c, out| {
            let mut b = a.to_vec();
            b.rotate_left(1);
            out.accumulate(b, c.clone());
        }))
    }

    /// `τ⁻¹`: `α ↦ (αₙ, α₀, …, αₙ₋₁)`.
    pub fn cyclic_inverse(&self) -> Result<OmegaExpr> {
        Ok(self.map_terms(self.n, |a, c, out| {
            let mut b = a.to_vec();
            b.rotate_right(1);
            out.accumulate(b, c.clone());
        }))
    }

    /// `∂ᵢ ω^p = −p ω^{p+1}` in slot `i`.
    pub fn partial(&self, i: usize) -> Result<OmegaExpr> {
        if i > self.n {
            return Err(Error::IndexOutOfRange {
                what: "partial derivative",
                index: i,
                max: self.n,
            });
        }
        Ok(self.map_terms(self.n, |a, c, out| {
            let mut b = a.to_vec();
            let p = b[i];
            b[i] += 1;
            out.accumulate(b, -c.clone() * int(p as i64));
        }))
    }

    pub fn apply_kind(&self, kind: GeneratorKind) -> Result<OmegaExpr> {
        use GeneratorKind::*;
        match kind {
            Face(j) => self.face(j),
            LastFace => self.face(self.n + 1),
            Degeneracy(j) | DualFace(j) => self.degeneracy(j),
            Cyclic => self.cyclic(),
            CyclicInverse | DualCyclic => self.cyclic_inverse(),
            Partial(i) => self.partial(i),
            DualDegeneracy(j) => self.face(j + 1),
        }
    }

    /// Applies the generators of `word` in order.
    pub fn apply_word(&self, word: &OperatorWord) -> Result<OmegaExpr> {
        if word.source() != self.n {
            return Err(Error::ArityMismatch(format!(
                "word acts on arity {} but ω has {} entries",
                word.source(),
                self.n + 1
            )));
        }
        word.generators()
            .iter()
            .try_fold(self.clone(), |acc, g| acc.apply_kind(g.kind()))
    }

    /// `Σ c Π (xₖ − λ)^{−αₖ}`.
    pub fn eval<S: Scalar>(&self, pts: &[S]) -> Result<S> {
        if pts.len() != self.n + 1 {
            return Err(Error::ArityMismatch(format!(
                "{} points for ω with {} entries",
                pts.len(),
                self.n + 1
            )));
        }
        let lam = S::from_complex_rational(&self.lambda);
        let mut acc = S::zero();
        for (a, c) in &self.terms {
            let mut v = S::from_rational(c);
            for (&p, x) in a.iter().zip(pts) {
                let d = x.clone() - lam.clone();
                if d.is_zero() {
                    return Err(Error::Pole(format!("ω at {:?}", x.to_c64())));
                }
                for _ in 0..p {
                    v = v / d.clone();
                }
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    /// The same function in the power/resolvent tensor basis.
    pub fn to_tensor(&self) -> TensorExpr {
        let mut out = TensorExpr::zero(self.n + 1);
        for (a, c) in &self.terms {
            let t =
                TensorExpr::from_factors(a.iter().map(|&p| TensorFactor::Resolvent(p)).collect());
            out = out.add(&t.scale(c)).expect("widths agree");
        }
        out
    }

    /// `ω_α` for a single index as a concrete separable base function,
    /// together with the generic symbol it is applied to.
    pub fn generic_form(
        lambda: &ComplexRational,
        alpha: &[u32],
    ) -> Result<(SpectralExpr, BaseFunction)> {
        let factors = alpha
            .iter()
            .map(|&p| BaseFunction::resolvent(lambda.clone(), p))
            .collect::<Result<Vec<_>>>()?;
        Ok((
            SpectralExpr::generic(alpha.len() - 1),
            BaseFunction::separable(factors)?,
        ))
    }
}

impl fmt::Display for OmegaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (a, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if k > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            let abs = c.abs();
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            let idx: Vec<String> = a.iter().map(u32::to_string).collect();
            write!(f, "ω({})", idx.join(","))?;
        }
        Ok(())
    }
}

/// `ω_{(1,…,1)}` with `k` entries reached by `k − 1` faces from `ω`, for
/// `k = 1..=len`, always taking face `0`.
pub fn face_ladder(lambda: &ComplexRational, len: usize) -> Result<Vec<OmegaExpr>> {
    let mut out = vec![OmegaExpr::ones(lambda.clone(), 0)];
    while out.len() < len {
        let next = out.last().expect("non-empty").face(0)?;
        out.push(next);
    }
    Ok(out)
}

/// Checks that every face of the `(k−1)`-th ladder entry gives
/// `(−1)^k ω_{(1,…,1)}` with `k + 1` entries, for `k = 1..=n_max`.
pub fn face_ladder_signs(lambda: &ComplexRational, n_max: usize) -> Result<bool> {
    let mut current = OmegaExpr::ones(lambda.clone(), 0);
    for k in 1..=n_max {
        let sign = if k % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        let expect = OmegaExpr::ones(lambda.clone(), k).scale(&sign);
        let mut next = None;
        for j in 0..=k {
            let img = current.face(j)?;
            if img != expect {
                return Ok(false);
            }
            next = Some(img);
        }
        current = next.expect("at least one face");
    }
    Ok(true)
}

/// `Π_j [(−1)^{αⱼ−1}/(αⱼ−1)!] ∂ⱼ^{αⱼ−1} ω_{(1,…,1)}`.
pub fn differential_relation_rhs(lambda: &ComplexRational, alpha: &[u32]) -> Result<OmegaExpr> {
    if alpha.is_empty() || alpha.contains(&0) {
        return Err(Error::MalformedTerm(format!("invalid ω index {alpha:?}")));
    }
    let mut e = OmegaExpr::ones(lambda.clone(), alpha.len() - 1);
    let mut c = Rational::one();
    for (j, &a) in alpha.iter().enumerate() {
        for _ in 1..a {
            e = e.partial(j)?;
        }
        let k = a as i64 - 1;
        let fact: i64 = (1..=k).product();
        let sign = if k % 2 == 0 { 1 } else { -1 };
        c *= crate::expr::rat(sign, fact);
    }
    Ok(e.scale(&c))
}

/// Whether `ω_α` equals [`differential_relation_rhs`] exactly.
pub fn differential_relation_check(lambda: &ComplexRational, alpha: &[u32]) -> Result<bool> {
    Ok(OmegaExpr::new(lambda.clone(), alpha)? == differential_relation_rhs(lambda, alpha)?)
}

/// All compositions of `total` into positive parts, i.e. every `α` with
/// `|α| = total`.
pub fn compositions(total: u32) -> Vec<Vec<u32>> {
    if total == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    let mut stack = vec![(Vec::<u32>::new(), total)];
    while let Some((prefix, rest)) = stack.pop() {
        if rest == 0 {
            out.push(prefix);
            continue;
        }
        for first in 1..=rest {
            let mut p = prefix.clone();
            p.push(first);
            stack.push((p, rest - first));
        }
    }
    out.sort();
    out
}

/// Applies `word` to `ω_α` through index arithmetic and through the generic
/// engine with a separable resolvent base, and returns the largest relative
/// difference over `trials` random real point sets.
pub fn omega_vs_generic(
    lambda: &ComplexRational,
    alpha: &[u32],
    word: &OperatorWord,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    let by_index = OmegaExpr::new(lambda.clone(), alpha)?.apply_word(word)?;
    let (generic, base) = OmegaExpr::generic_form(lambda, alpha)?;
    let by_engine = crate::ops::apply_word(word, &generic)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let pts = separated_points(&mut r, word.target() + 1);
        let a: Complex64 = by_index.eval(&pts)?;
        let b: Complex64 = eval_expr(&by_engine, &base, &pts)?;
        worst = worst.max((a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Exact version of [`omega_vs_generic`] at the given distinct rational
/// points.
pub fn omega_vs_generic_exact(
    lambda: &ComplexRational,
    alpha: &[u32],
    word: &OperatorWord,
    points: &[Rational],
) -> Result<bool> {
    let by_index = OmegaExpr::new(lambda.clone(), alpha)?.apply_word(word)?;
    let (generic, base) = OmegaExpr::generic_form(lambda, alpha)?;
    let by_engine = crate::ops::apply_word(word, &generic)?;
    let pts = exact_point(points);
    let a: Exact = by_index.eval(&pts)?;
    let b: Exact = eval_expr(&by_engine, &base, &pts)?;
    Ok(a == b)
}

/// One line of the second-derivative rewriting.
#[derive(Clone, Debug)]
pub struct DemoStep {
    pub label: String,
    pub value: String,
    pub ok: bool,
}

/// `∂₀² = σ₀δ₀σ₀δ₀` rewritten through the face/degeneracy relations as
/// `σ₀σ₀δ₀δ₀ + σ₀σ₀δ₁δ₀`, each summand sending `ω` to `ω³`.
pub fn second_derivative_decomposition_demo(lambda: &ComplexRational) -> Result<Vec<DemoStep>> {
    use GeneratorKind::*;
    let w = OmegaExpr::ones(lambda.clone(), 0);
    let cube = OmegaExpr::new(lambda.clone(), &[3])?;
    let twice = OperatorWord::from_kinds(0, &[Face(0), Degeneracy(0), Face(0), Degeneracy(0)])?;
    let a = OperatorWord::from_kinds(0, &[Face(0), Face(0), Degeneracy(0), Degeneracy(0)])?;
    let b = OperatorWord::from_kinds(0, &[Face(0), Face(1), Degeneracy(0), Degeneracy(0)])?;
    let mut steps = Vec::new();

    let generic = SpectralExpr::generic(0);
    let lhs = crate::ops::apply_word(&twice, &generic)?;
    let rhs = crate::ops::apply_word(&a, &generic)?.add(&crate::ops::apply_word(&b, &generic)?)?;
    steps.push(DemoStep {
        label: format!("{twice} = {a} + {b} on f"),
        value: lhs.to_string(),
        ok: lhs == rhs,
    });
    let d1 = w.apply_word(&OperatorWord::from_kinds(0, &[Face(0), Degeneracy(0)])?)?;
    steps.push(DemoStep {
        label: "∂₀ω".into(),
        value: d1.to_string(),
        ok: d1 == OmegaExpr::new(lambda.clone(), &[2])?.scale(&-Rational::one()),
    });
    let va = w.apply_word(&a)?;
    steps.push(DemoStep {
        label: format!("{a} ω"),
        value: va.to_string(),
        ok: va == cube,
    });
    let vb = w.apply_word(&b)?;
    steps.push(DemoStep {
        label: format!("{b} ω"),
        value: vb.to_string(),
        ok: vb == cube,
    });
    let d2 = w.apply_word(&twice)?;
    steps.push(DemoStep {
        label: "∂₀²ω".into(),
        value: d2.to_string(),
        ok: d2 == va.add(&vb)? && d2 == cube.scale(&int(2)),
    });
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam() -> ComplexRational {
        default_lambda()
    }

    fn om(alpha: &[u32]) -> OmegaExpr {
        OmegaExpr::new(lam(), alpha).unwrap()
    }

    #[test]
    fn face_examples() {
        let w = om(&[1]);
        assert_eq!(w.face(0).unwrap(), om(&[1, 1]).scale(&int(-1)));
        let w11 = om(&[1, 1]);
        assert_eq!(w11.face(0).unwrap(), om(&[1, 1, 1]).scale(&int(-1)));
        assert_eq!(w11.face(1).unwrap(), w11.face(0).unwrap());
        let ladder = face_ladder(&lam(), 4).unwrap();
        assert_eq!(ladder[3], om(&[1, 1, 1, 1]).scale(&int(-1)));
        assert_eq!(ladder[2], om(&[1, 1, 1]));
    }

    #[test]
    fn degeneracy_examples() {
        let w = om(&[1, 1, 1, 1]);
        assert_eq!(w.degeneracy(0).unwrap(), om(&[2, 1, 1]));
        assert_eq!(w.degeneracy(1).unwrap(), om(&[1, 2, 1]));
        assert_eq!(om(&[1, 2, 1]).degeneracy(1).unwrap(), om(&[1, 3]));
        assert_eq!(om(&[1, 2, 3]).degeneracy(2).unwrap(), om(&[4, 2]));
    }

    #[test]
    fn cyclic_examples() {
        assert_eq!(om(&[1, 2, 3]).cyclic().unwrap(), om(&[2, 3, 1]));
        assert_eq!(om(&[1, 2, 3]).cyclic_inverse().unwrap(), om(&[3, 1, 2]));
        assert_eq!(om(&[4]).cyclic().unwrap(), om(&[4]));
        let mut e = om(&[1, 2, 3, 5]);
        for _ in 0..4 {
            e = e.cyclic().unwrap();
        }
        assert_eq!(e, om(&[1, 2, 3, 5]));
    }

    #[test]
    fn derivative_examples() {
        let w = om(&[1]);
        assert_eq!(w.partial(0).unwrap(), om(&[2]).scale(&int(-1)));
        assert_eq!(
            w.partial(0).unwrap().partial(0).unwrap(),
            om(&[3]).scale(&int(2))
        );
        assert_eq!(om(&[1, 2]).partial(1).unwrap(), om(&[1, 3]).scale(&int(-2)));
        // closed form against the engine's σᵢδᵢ
        let word =
            OperatorWord::from_kinds(1, &[GeneratorKind::Face(1), GeneratorKind::Degeneracy(1)])
                .unwrap();
        assert_eq!(
            om(&[1, 2]).apply_word(&word).unwrap(),
            om(&[1, 2]).partial(1).unwrap()
        );
    }

    #[test]
    fn differential_relations() {
        assert!(differential_relation_check(&lam(), &[2, 1]).unwrap());
        assert_eq!(
            differential_relation_rhs(&lam(), &[2, 1]).unwrap(),
            om(&[1, 1]).partial(0).unwrap().scale(&int(-1))
        );
        assert!(differential_relation_check(&lam(), &[3, 2]).unwrap());
        for total in 1..=6 {
            for a in compositions(total) {
                assert!(differential_relation_check(&lam(), &a).unwrap(), "{a:?}");
            }
        }
    }

    #[test]
    fn composition_counts() {
        for t in 1..=8u32 {
            assert_eq!(compositions(t).len(), 1 << (t - 1));
        }
    }

    #[test]
    fn ladder_signs() {
        assert!(face_ladder_signs(&lam(), 8).unwrap());
    }

    #[test]
    fn coassociativity() {
        let d = om(&[1]).face(0).unwrap();
        let left = d.face(0).unwrap();
        let right = d.face(1).unwrap();
        assert_eq!(left, right);
        assert_eq!(left, om(&[1, 1, 1]));
        for p in 1..=6 {
            let d = om(&[p]).face(0).unwrap();
            assert_eq!(d.face(0).unwrap(), d.face(1).unwrap());
            assert_eq!(
                d.to_tensor().coproduct_at(0).unwrap(),
                d.face(0).unwrap().to_tensor()
            );
        }
    }

    #[test]
    fn demo_holds() {
        let steps = second_derivative_decomposition_demo(&lam()).unwrap();
        assert!(steps.iter().all(|s| s.ok), "{steps:#?}");
    }

    #[test]
    fn matches_generic_engine_exactly() {
        use GeneratorKind::*;
        let pts = [
            crate::expr::rat(1, 2),
            crate::expr::rat(-3, 2),
            int(3),
            crate::expr::rat(2, 3),
        ];
        for alpha in [vec![1u32, 2], vec![2, 1, 3], vec![3]] {
            let n = alpha.len() - 1;
            let mut kinds = vec![Cyclic, CyclicInverse, LastFace];
            for j in 0..=n {
                kinds.push(Face(j));
                kinds.push(Partial(j));
                if n >= 1 {
                    kinds.push(Degeneracy(j));
                }
            }
            for k in kinds {
                let w = OperatorWord::from_kinds(n, &[k]).unwrap();
                let m = w.target() + 1;
                assert!(
                    omega_vs_generic_exact(&lam(), &alpha, &w, &pts[..m]).unwrap(),
                    "{alpha:?} {k:?}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn single_generators_agree_numerically(alpha in prop::collection::vec(1u32..4, 1..4), pick in 0usize..64, seed in any::<u64>()) {
            use GeneratorKind::*;
            let n = alpha.len() - 1;
            let mut kinds = vec![Cyclic, CyclicInverse, LastFace, DualCyclic];
            for j in 0..=n {
                kinds.push(Face(j));
                kinds.push(Partial(j));
                kinds.push(DualDegeneracy(j));
                if n >= 1 {
                    kinds.push(Degeneracy(j));
                    kinds.push(DualFace(j));
                }
            }
            let k = kinds[pick % kinds.len()];
            let w = OperatorWord::from_kinds(n, &[k]).unwrap();
            let r = omega_vs_generic(&lam(), &alpha, &w, seed, 3).unwrap();
            prop_assert!(r <= 1e-10, "{:?} {:?} {}", alpha, k, r);
        }
    }
}
