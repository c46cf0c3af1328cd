//! Canonical-form term algebra for spectral functions.
//!
//! A [`BracketTerm`] records how the variables `x0..xm` of a spectral function
//! are fed into the arguments ("slots") of an underlying symbol `f` with
//! `n + 1` arguments. A slot holding several variables denotes an iterated
//! divided difference in that argument, so `f([x0,x1],[x2])` is
//! `Δ(f(·, x2))(x0, x1)`. Repeated variables inside one slot are the confluent
//! case and encode partial derivatives.
//!
//! [`SpectralExpr`] is a finite linear combination of such terms with exact
//! rational coefficients. [`TensorExpr`] covers separable functions built from
//! powers and resolvent powers, where the divided difference has a closed
//! algebraic coproduct.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplicial::SimplicialMap;

pub type Rational = BigRational;

/// Shorthand for the rational `p / q`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn rational_to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::parse(0, format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            if let Ok(p) = BigInt::from_str(s) {
                return Ok(Rational::from_integer(p));
            }
            // decimal literal such as 0.5
            let v: f64 = s.parse().map_err(|_| bad())?;
            Rational::from_float(v).ok_or_else(bad)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Self {
        Symbol(name.into())
    }

    pub fn generic() -> Self {
        Symbol("f".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Default for Symbol {
    fn default() -> Self {
        Symbol::generic()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One assignment of the variables `x0..=x_m` to the slots of a symbol.
///
/// Field order matters: the derived ordering compares slots first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BracketTerm {
    slots: Vec<Vec<usize>>,
    arity_in: usize,
    symbol: Symbol,
}

impl BracketTerm {
    /// Validated, canonical term.
    pub fn new(arity_in: usize, slots: Vec<Vec<usize>>, symbol: Symbol) -> Result<Self> {
        Ok(Self::raw(arity_in, slots, symbol)?.canonicalize())
    }

    /// Validated term with slot contents kept in the given order.
    pub fn raw(arity_in: usize, slots: Vec<Vec<usize>>, symbol: Symbol) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::MalformedTerm(
                "a term needs at least one slot".into(),
            ));
        }
        let mut seen = vec![false; arity_in + 1];
        for (k, slot) in slots.iter().enumerate() {
            if slot.is_empty() {
                return Err(Error::MalformedTerm(format!("slot {k} is empty")));
            }
            for &v in slot {
                if v > arity_in {
                    return Err(Error::IndexOutOfRange {
                        what: "variable",
                        index: v,
                        max: arity_in,
                    });
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::MalformedTerm(format!(
                "variable x{v} does not occur in any slot"
            )));
        }
        Ok(BracketTerm {
            slots,
            arity_in,
            symbol,
        })
    }

    /// `f([x0],[x1],…,[xn])`: the symbol itself viewed as a spectral function.
    pub fn generic(n: usize) -> Self {
        Self::generic_named(n, Symbol::generic())
    }

    pub fn generic_named(n: usize, symbol: Symbol) -> Self {
        BracketTerm {
            slots: (0..=n).map(|v| vec![v]).collect(),
            arity_in: n,
            symbol,
        }
    }

    /// `m`: the highest variable index.
    pub fn arity_in(&self) -> usize {
        self.arity_in
    }

    /// `n`: the highest slot index of the symbol.
    pub fn arity_out(&self) -> usize {
        self.slots.len() - 1
    }

    pub fn slots(&self) -> &[Vec<usize>] {
        &self.slots
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn with_symbol(mut self, symbol: Symbol) -> Self {
        self.symbol = symbol;
        self
    }

    pub fn canonicalize(&self) -> Self {
        let mut out = self.clone();
        for slot in &mut out.slots {
            slot.sort_unstable();
        }
        out
    }

    pub fn is_canonical(&self) -> bool {
        self.slots
            .iter()
            .all(|s| s.windows(2).all(|w| w[0] <= w[1]))
    }

    /// Substitutes every variable `v` by `map(v)`, producing a term over
    /// `x0..=x_new_arity`. The map must be onto.
    pub(crate) fn relabel(&self, new_arity: usize, map: impl Fn(usize) -> usize) -> BracketTerm {
        let slots = self
            .slots
            .iter()
            .map(|s| {
                let mut s: Vec<usize> = s.iter().map(|&v| map(v)).collect();
                s.sort_unstable();
                s
            })
            .collect();
        let t = BracketTerm {
            slots,
            arity_in: new_arity,
            symbol: self.symbol.clone(),
        };
        debug_assert!(BracketTerm::raw(t.arity_in, t.slots.clone(), t.symbol.clone()).is_ok());
        t
    }

    /// Positions `(slot, index within slot)` where `var` occurs, in slot order.
    pub(crate) fn occurrences(&self, var: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (k, slot) in self.slots.iter().enumerate() {
            for (p, &v) in slot.iter().enumerate() {
                if v == var {
                    out.push((k, p));
                }
            }
        }
        out
    }

    pub(crate) fn from_parts(arity_in: usize, slots: Vec<Vec<usize>>, symbol: Symbol) -> Self {
        let mut t = BracketTerm {
            slots,
            arity_in,
            symbol,
        };
        for s in &mut t.slots {
            s.sort_unstable();
        }
        t
    }
}

/// Idempotent, semantics-preserving normalization of a term: divided
/// differences are symmetric in their nodes, so slot contents are sorted.
pub fn canonicalize(term: &BracketTerm) -> BracketTerm {
    term.canonicalize()
}

impl fmt::Display for BracketTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.symbol)?;
        for (k, slot) in self.slots.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (p, v) in slot.iter().enumerate() {
                if p > 0 {
                    f.write_str(",")?;
                }
                write!(f, "x{v}")?;
            }
            f.write_str("]")?;
        }
        f.write_str(")")
    }
}

/// Linear combination of bracket terms sharing the arity pair `(m, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralExpr {
    m: usize,
    n: usize,
    terms: BTreeMap<BracketTerm, Rational>,
}

impl SpectralExpr {
    pub fn zero(m: usize, n: usize) -> Self {
        SpectralExpr {
            m,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_term(term: BracketTerm) -> Self {
        let mut e = SpectralExpr::zero(term.arity_in(), term.arity_out());
        e.terms.insert(term.canonicalize(), Rational::one());
        e
    }

    /// The generic symbol `f` with `n + 1` arguments.
    pub fn generic(n: usize) -> Self {
        SpectralExpr::from_term(BracketTerm::generic(n))
    }

    pub fn generic_named(n: usize, symbol: Symbol) -> Self {
        SpectralExpr::from_term(BracketTerm::generic_named(n, symbol))
    }

    pub fn from_terms(
        m: usize,
        n: usize,
        terms: impl IntoIterator<Item = (BracketTerm, Rational)>,
    ) -> Result<Self> {
        let mut e = SpectralExpr::zero(m, n);
        for (t, c) in terms {
            e.insert(t, c)?;
        }
        Ok(e)
    }

    /// Variable count minus one.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Slot count minus one.
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

    pub fn terms(&self) -> impl Iterator<Item = (&BracketTerm, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, term: &BracketTerm) -> Rational {
        self.terms
            .get(&term.canonicalize())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn check_term(&self, term: &BracketTerm) -> Result<()> {
        if term.arity_in() != self.m || term.arity_out() != self.n {
            return Err(Error::ArityMismatch(format!(
                "term {term} has arity (m={}, n={}) but expression has (m={}, n={})",
                term.arity_in(),
                term.arity_out(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }

    /// Adds `coeff * term`, dropping the entry when it cancels.
    pub fn insert(&mut self, term: BracketTerm, coeff: Rational) -> Result<()> {
        self.check_term(&term)?;
        self.accumulate(term.canonicalize(), coeff);
        Ok(())
    }

    fn accumulate(&mut self, term: BracketTerm, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(term) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same_arity(&self, other: &SpectralExpr) -> Result<()> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::ArityMismatch(format!(
                "cannot combine expressions of arity (m={}, n={}) and (m={}, n={})",
                self.m, self.n, other.m, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralExpr) -> Result<SpectralExpr> {
        self.check_same_arity(other)?;
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.accumulate(t.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralExpr) -> Result<SpectralExpr> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> SpectralExpr {
        if c.is_zero() {
            return SpectralExpr::zero(self.m, self.n);
        }
        SpectralExpr {
            m: self.m,
            n: self.n,
            terms: self.terms.iter().map(|(t, k)| (t.clone(), k * c)).collect(),
        }
    }

    pub fn neg(&self) -> SpectralExpr {
        self.scale(&-Rational::one())
    }

    /// Extends a per-term map linearly. Every produced term must have arity
    /// `(new_m, new_n)`.
    pub(crate) fn try_map_terms(
        &self,
        new_m: usize,
        new_n: usize,
        mut f: impl FnMut(&BracketTerm) -> Result<Vec<(BracketTerm, Rational)>>,
    ) -> Result<SpectralExpr> {
        let mut out = SpectralExpr::zero(new_m, new_n);
        for (t, c) in &self.terms {
            for (t2, c2) in f(t)? {
                out.insert(t2, c2 * c)?;
            }
        }
        Ok(out)
    }

    /// Replaces the symbol of every term.
    pub fn with_symbol(&self, symbol: &Symbol) -> SpectralExpr {
        let mut out = SpectralExpr::zero(self.m, self.n);
        for (t, c) in &self.terms {
            out.accumulate(t.clone().with_symbol(symbol.clone()), c.clone());
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ExprJson::from(self)).expect("expression JSON is always serializable")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&ExprJson::from(self))
            .expect("expression JSON is always serializable")
    }

    pub fn from_json_str(s: &str) -> Result<SpectralExpr> {
        let j: ExprJson =
            serde_json::from_str(s).map_err(|e| Error::parse(e.column(), e.to_string()))?;
        j.try_into()
    }
}

impl fmt::Display for SpectralExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    slots: Vec<Vec<usize>>,
}

/// Wire format: `{"m": int, "n": int, "terms": [{"coeff": "p/q", "slots": [[..],..]}]}`.
#[derive(Serialize, Deserialize)]
struct ExprJson {
    m: usize,
    n: usize,
    terms: Vec<TermJson>,
}

impl From<&SpectralExpr> for ExprJson {
    fn from(e: &SpectralExpr) -> Self {
        ExprJson {
            m: e.m,
            n: e.n,
            terms: e
                .terms
                .iter()
                .map(|(t, c)| TermJson {
                    coeff: rational_to_pq(c),
                    slots: t.slots.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ExprJson> for SpectralExpr {
    type Error = Error;

    fn try_from(j: ExprJson) -> Result<SpectralExpr> {
        let mut e = SpectralExpr::zero(j.m, j.n);
        for t in j.terms {
            let term = BracketTerm::new(j.m, t.slots, Symbol::generic())?;
            e.insert(term, parse_rational(&t.coeff)?)?;
        }
        Ok(e)
    }
}

/// The map `ψ` from variables to slots carried by a term built from face
/// maps only, plus the confluent multiplicities left over in each slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialShadow {
    pub psi: Vec<usize>,
    pub derivative_orders: Vec<usize>,
}

impl SimplicialShadow {
    /// `ψ : [m] → [n]` as a morphism of the simplicial category.
    pub fn to_map(&self) -> Result<SimplicialMap> {
        let target = self.derivative_orders.len() - 1;
        SimplicialMap::new(target, self.psi.clone())
    }
}

pub fn to_simplicial_shadow(term: &BracketTerm) -> Result<SimplicialShadow> {
    let mut psi = vec![usize::MAX; term.arity_in() + 1];
    let mut orders = Vec::with_capacity(term.slots().len());
    for (k, slot) in term.slots().iter().enumerate() {
        let mut distinct = slot.clone();
        distinct.sort_unstable();
        distinct.dedup();
        orders.push(slot.len() - distinct.len());
        for v in distinct {
            if psi[v] != usize::MAX {
                return Err(Error::NotCoSimplicial(format!(
                    "x{v} occurs in slots {} and {k} of {term}",
                    psi[v]
                )));
            }
            psi[v] = k;
        }
    }
    if psi.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NotCoSimplicial(format!(
            "variables of {term} are not assigned to slots in order"
        )));
    }
    Ok(SimplicialShadow {
        psi,
        derivative_orders: orders,
    })
}

/// Complex number with exact rational parts; used for resolvent parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        ComplexRational { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        ComplexRational::new(int(re), int(im))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl FromStr for ComplexRational {
    type Err = Error;

    /// Accepts `a`, `bi`, `a+bi`, `a-bi` with rational or decimal parts.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = s.strip_suffix('i') else {
            return Ok(ComplexRational::new(parse_rational(&s)?, Rational::zero()));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other.trim_start_matches('+'),
        };
        Ok(ComplexRational::new(
            parse_rational(re)?,
            parse_rational(im)?,
        ))
    }
}

type PartialFn = dyn Fn(&[Complex64], &[usize]) -> Option<Complex64> + Send + Sync;

/// A user-supplied function given by point values and mixed partials.
#[derive(Clone)]
pub struct BlackBox {
    name: String,
    arity: usize,
    partial: Arc<PartialFn>,
}

impl BlackBox {
    /// `partial(point, orders)` must return `∂^orders f(point)`, or `None`
    /// when that derivative is not available.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        partial: impl Fn(&[Complex64], &[usize]) -> Option<Complex64> + Send + Sync + 'static,
    ) -> Self {
        BlackBox {
            name: name.into(),
            arity,
            partial: Arc::new(partial),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn partial(&self, point: &[Complex64], orders: &[usize]) -> Option<Complex64> {
        (self.partial)(point, orders)
    }
}

/// Concrete spectral functions used for evaluation.
#[derive(Clone)]
pub enum BaseFunction {
    /// `exp(rate * x)`
    Exponential {
        rate: Rational,
    },
    /// `x^degree`
    Monomial {
        degree: u32,
    },
    /// `(x - λ)^(-power)`; `power = 1` is `ω_λ`.
    Resolvent {
        lambda: ComplexRational,
        power: u32,
    },
    /// `f0(x0) f1(x1) ⋯ fn(xn)`
    SeparableProduct(Vec<BaseFunction>),
    /// `g(w0 x0 + ⋯ + wn xn)` for a one-variable `g`.
    LinearForm {
        outer: Box<BaseFunction>,
        weights: Vec<Rational>,
    },
    BlackBox(BlackBox),
}

impl BaseFunction {
    pub fn exp(rate: Rational) -> Self {
        BaseFunction::Exponential { rate }
    }

    pub fn monomial(degree: u32) -> Self {
        BaseFunction::Monomial { degree }
    }

    pub fn resolvent(lambda: ComplexRational, power: u32) -> Result<Self> {
        if power == 0 {
            return Err(Error::Precondition(
                "resolvent power must be at least 1".into(),
            ));
        }
        Ok(BaseFunction::Resolvent { lambda, power })
    }

    /// `ω_λ(x) = (x - λ)^(-1)`.
    pub fn omega(lambda: ComplexRational) -> Self {
        BaseFunction::Resolvent { lambda, power: 1 }
    }

    pub fn separable(factors: Vec<BaseFunction>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Precondition(
                "separable product needs a factor".into(),
            ));
        }
        if let Some(f) = factors.iter().find(|f| f.arity() != 1) {
            return Err(Error::ArityMismatch(format!(
                "separable factor {f:?} is not a one-variable function"
            )));
        }
        Ok(BaseFunction::SeparableProduct(factors))
    }

    pub fn linear_form(outer: BaseFunction, weights: Vec<Rational>) -> Result<Self> {
        if outer.arity() != 1 {
            return Err(Error::ArityMismatch(
                "outer function of a linear form must take one variable".into(),
            ));
        }
        if weights.is_empty() {
            return Err(Error::Precondition("linear form needs a weight".into()));
        }
        Ok(BaseFunction::LinearForm {
            outer: Box::new(outer),
            weights,
        })
    }

    pub fn black_box(bb: BlackBox) -> Self {
        BaseFunction::BlackBox(bb)
    }

    /// `cosh(x)`, an even function with closed-form derivatives.
    pub fn cosh() -> Self {
        BaseFunction::BlackBox(BlackBox::new("cosh", 1, |p, k| {
            let x = p[0];
            Some(if k[0] % 2 == 0 { x.cosh() } else { x.sinh() })
        }))
    }

    /// Number of arguments.
    pub fn arity(&self) -> usize {
        match self {
            BaseFunction::Exponential { .. }
            | BaseFunction::Monomial { .. }
            | BaseFunction::Resolvent { .. } => 1,
            BaseFunction::SeparableProduct(v) => v.len(),
            BaseFunction::LinearForm { weights, .. } => weights.len(),
            BaseFunction::BlackBox(b) => b.arity,
        }
    }
}

impl fmt::Debug for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseFunction::Exponential { rate } => write!(f, "exp({rate}x)"),
            BaseFunction::Monomial { degree } => write!(f, "x^{degree}"),
            BaseFunction::Resolvent { lambda, power } => {
                write!(f, "(x-({lambda}))^-{power}")
            }
            BaseFunction::SeparableProduct(v) => {
                for (i, g) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str("⊗")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
            BaseFunction::LinearForm { outer, weights } => {
                let w: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                write!(f, "{outer}∘<{}>", w.join(","))
            }
            BaseFunction::BlackBox(b) => write!(f, "{}", b.name),
        }
    }
}

/// One factor of a separable tensor: `x^k` or `ω_λ^p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TensorFactor {
    Power(u32),
    Resolvent(u32),
}

impl TensorFactor {
    fn normalized(self) -> Self {
        match self {
            TensorFactor::Resolvent(0) => TensorFactor::Power(0),
            f => f,
        }
    }

    fn mul(self, other: TensorFactor) -> Result<TensorFactor> {
        use TensorFactor::*;
        match (self.normalized(), other.normalized()) {
            (Power(0), f) | (f, Power(0)) => Ok(f),
            (Power(a), Power(b)) => Ok(Power(a + b)),
            (Resolvent(a), Resolvent(b)) => Ok(Resolvent(a + b)),
            (a, b) => Err(Error::Precondition(format!(
                "{a:?}·{b:?} leaves the power/resolvent basis"
            ))),
        }
    }

    /// Divided difference of a single factor as a two-slot tensor sum.
    fn coproduct(self) -> Vec<(Rational, TensorFactor, TensorFactor)> {
        match self.normalized() {
            TensorFactor::Power(0) => Vec::new(),
            TensorFactor::Power(k) => (0..k)
                .map(|i| {
                    (
                        Rational::one(),
                        TensorFactor::Power(i),
                        TensorFactor::Power(k - 1 - i),
                    )
                })
                .collect(),
            // (a^p - b^p)/(1/a - 1/b) = -Σ_{i+j=p+1, i,j≥1} a^i b^j
            TensorFactor::Resolvent(p) => (1..=p)
                .map(|i| {
                    (
                        -Rational::one(),
                        TensorFactor::Resolvent(i),
                        TensorFactor::Resolvent(p + 1 - i),
                    )
                })
                .collect(),
        }
    }

    pub fn eval(self, lambda: Complex64, x: Complex64) -> Result<Complex64> {
        match self.normalized() {
            TensorFactor::Power(k) => Ok(x.powu(k)),
            TensorFactor::Resolvent(p) => {
                let d = x - lambda;
                if d == Complex64::new(0.0, 0.0) {
                    return Err(Error::Pole(format!("ω^{p} at {x}")));
                }
                Ok(d.powi(-(p as i32)))
            }
        }
    }
}

/// Linear combination of separable tensors `g0 ⊗ ⋯ ⊗ gk` over the
/// power/resolvent basis, with a formal shared resolvent parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorExpr {
    width: usize,
    terms: BTreeMap<Vec<TensorFactor>, Rational>,
}

impl TensorExpr {
    pub fn zero(width: usize) -> Self {
        TensorExpr {
            width,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_factors(factors: Vec<TensorFactor>) -> Self {
        let mut e = TensorExpr::zero(factors.len());
        e.accumulate(factors, Rational::one());
        e
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<TensorFactor>, &Rational)> {
        self.terms.iter()
    }

    fn accumulate(&mut self, factors: Vec<TensorFactor>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key: Vec<TensorFactor> = factors.into_iter().map(TensorFactor::normalized).collect();
        let e = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &TensorExpr) -> Result<TensorExpr> {
        if self.width != other.width {
            return Err(Error::ArityMismatch(format!(
                "tensor widths {} and {} differ",
                self.width, other.width
            )));
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.accumulate(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> TensorExpr {
        let mut out = TensorExpr::zero(self.width);
        for (k, v) in &self.terms {
            out.accumulate(k.clone(), v * c);
        }
        out
    }

    /// Pointwise product of two functions of the same separated variables.
    pub fn mul(&self, other: &TensorExpr) -> Result<TensorExpr> {
        if self.width != other.width {
            return Err(Error::ArityMismatch(format!(
                "tensor widths {} and {} differ",
                self.width, other.width
            )));
        }
        let mut out = TensorExpr::zero(self.width);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let f = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| x.mul(*y))
                    .collect::<Result<Vec<_>>>()?;
                out.accumulate(f, ca * cb);
            }
        }
        Ok(out)
    }

    /// Applies the divided difference to tensor factor `j`; the face map on
    /// separable functions.
    pub fn coproduct_at(&self, j: usize) -> Result<TensorExpr> {
        if j >= self.width {
            return Err(Error::IndexOutOfRange {
                what: "tensor factor",
                index: j,
                max: self.width.saturating_sub(1),
            });
        }
        let mut out = TensorExpr::zero(self.width + 1);
        for (fs, c) in &self.terms {
            for (k, a, b) in fs[j].coproduct() {
                let mut g = Vec::with_capacity(self.width + 1);
                g.extend_from_slice(&fs[..j]);
                g.push(a);
                g.push(b);
                g.extend_from_slice(&fs[j + 1..]);
                out.accumulate(g, c * k);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, lambda: Complex64, pts: &[Complex64]) -> Result<Complex64> {
        if pts.len() != self.width {
            return Err(Error::ArityMismatch(format!(
                "{} points for a tensor of width {}",
                pts.len(),
                self.width
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (fs, c) in &self.terms {
            let mut v = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (f, &x) in fs.iter().zip(pts) {
                v *= f.eval(lambda, x)?;
            }
            acc += v;
        }
        Ok(acc)
    }
}

impl fmt::Display for TensorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (fs, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if !c.is_one() {
                write!(f, "({c})")?;
            }
            let parts: Vec<String> = fs
                .iter()
                .map(|t| match t {
                    TensorFactor::Power(k) => format!("x^{k}"),
                    TensorFactor::Resolvent(p) => format!("ω^{p}"),
                })
                .collect();
            f.write_str(&parts.join("⊗"))?;
        }
        Ok(())
    }
}

/// Algebraic coproduct `Δ(f) = f₍₁₎ ⊗ f₍₂₎` of a one-variable base function.
///
/// Only powers and resolvent powers have a finite coproduct; the others need
/// a completed tensor product and are refused.
pub fn coproduct(base: &BaseFunction) -> Result<TensorExpr> {
    let factor = match base {
        BaseFunction::Monomial { degree } => TensorFactor::Power(*degree),
        BaseFunction::Resolvent { power, .. } => TensorFactor::Resolvent(*power),
        other => return Err(Error::CompletionRequired(other.to_string())),
    };
    TensorExpr::from_factors(vec![factor]).coproduct_at(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn term(m: usize, slots: Vec<Vec<usize>>) -> BracketTerm {
        BracketTerm::raw(m, slots, Symbol::generic()).unwrap()
    }

    #[test]
    fn canonicalize_sorts_slots() {
        let t = term(2, vec![vec![1, 0], vec![2]]);
        assert!(!t.is_canonical());
        assert_eq!(canonicalize(&t), term(2, vec![vec![0, 1], vec![2]]));

        let t = term(1, vec![vec![0], vec![1]]);
        assert_eq!(canonicalize(&t), t);

        let t = term(2, vec![vec![2, 0, 0], vec![1]]);
        assert_eq!(canonicalize(&t).slots(), &[vec![0, 0, 2], vec![1]]);
    }

    #[test]
    fn term_validation() {
        assert!(BracketTerm::new(2, vec![vec![0], vec![1]], Symbol::generic()).is_err());
        assert!(BracketTerm::new(1, vec![vec![0], vec![]], Symbol::generic()).is_err());
        assert!(BracketTerm::new(1, vec![vec![0], vec![3]], Symbol::generic()).is_err());
    }

    #[test]
    fn add_and_scale() {
        let t = SpectralExpr::generic(1);
        let two = t.add(&t).unwrap();
        assert_eq!(two.coeff(&BracketTerm::generic(1)), int(2));
        assert!(t.scale(&Rational::zero()).is_zero());
        assert!(t.add(&t.neg()).unwrap().is_zero());
        assert!(matches!(
            t.add(&SpectralExpr::generic(2)),
            Err(Error::ArityMismatch(_))
        ));
    }

    #[test]
    fn display_uses_bracket_notation() {
        let e = SpectralExpr::from_term(term(2, vec![vec![1, 0], vec![2]]));
        assert_eq!(e.to_string(), "f([x0,x1],[x2])");
        let e = e.scale(&rat(-3, 2));
        assert_eq!(e.to_string(), "-3/2*f([x0,x1],[x2])");
        assert_eq!(SpectralExpr::zero(1, 1).to_string(), "0");
    }

    #[test]
    fn json_wire_format() {
        let mut e = SpectralExpr::zero(2, 1);
        e.insert(term(2, vec![vec![1, 0], vec![2]]), rat(1, 2))
            .unwrap();
        e.insert(term(2, vec![vec![0], vec![1, 2]]), int(-1))
            .unwrap();
        let s = e.to_json_string();
        assert_eq!(
            s,
            r#"{"m":2,"n":1,"terms":[{"coeff":"-1/1","slots":[[0],[1,2]]},{"coeff":"1/2","slots":[[0,1],[2]]}]}"#
        );
        assert_eq!(SpectralExpr::from_json_str(&s).unwrap(), e);
    }

    #[test]
    fn shadow_of_face_terms() {
        let s = to_simplicial_shadow(&term(2, vec![vec![0, 1], vec![2]])).unwrap();
        assert_eq!(s.psi, vec![0, 0, 1]);
        let s = to_simplicial_shadow(&term(1, vec![vec![0], vec![1]])).unwrap();
        assert_eq!(s.psi, vec![0, 1]);
        let s = to_simplicial_shadow(&term(4, vec![vec![0], vec![1, 2], vec![3, 4]])).unwrap();
        assert_eq!(s.psi, vec![0, 1, 1, 2, 2]);
        let map = s.to_map().unwrap();
        assert_eq!(map.stationary_points(), vec![1, 2]);
        assert_eq!(map.degeneracy_indices(), vec![1, 3]);
        let err = to_simplicial_shadow(&term(1, vec![vec![0], vec![0, 1]]));
        assert!(matches!(err, Err(Error::NotCoSimplicial(_))));
        let err = to_simplicial_shadow(&term(1, vec![vec![1], vec![0]]));
        assert!(matches!(err, Err(Error::NotCoSimplicial(_))));
    }

    #[test]
    fn coproduct_examples() {
        let d = coproduct(&BaseFunction::monomial(2)).unwrap();
        let expect = TensorExpr::from_factors(vec![TensorFactor::Power(0), TensorFactor::Power(1)])
            .add(&TensorExpr::from_factors(vec![
                TensorFactor::Power(1),
                TensorFactor::Power(0),
            ]))
            .unwrap();
        assert_eq!(d, expect);

        let w = coproduct(&BaseFunction::omega(ComplexRational::from_ints(2, 1))).unwrap();
        let expect =
            TensorExpr::from_factors(vec![TensorFactor::Resolvent(1), TensorFactor::Resolvent(1)])
                .scale(&int(-1));
        assert_eq!(w, expect);

        assert!(coproduct(&BaseFunction::monomial(0)).unwrap().is_zero());
        assert!(matches!(
            coproduct(&BaseFunction::exp(int(1))),
            Err(Error::CompletionRequired(_))
        ));
        assert!(matches!(
            coproduct(&BaseFunction::cosh()),
            Err(Error::CompletionRequired(_))
        ));
    }

    #[test]
    fn complex_rational_parsing() {
        let l: ComplexRational = "2+i".parse().unwrap();
        assert_eq!(l, ComplexRational::from_ints(2, 1));
        let l: ComplexRational = "-1/2-3i".parse().unwrap();
        assert_eq!(l, ComplexRational::new(rat(-1, 2), int(-3)));
        let l: ComplexRational = "3".parse().unwrap();
        assert_eq!(l, ComplexRational::from_ints(3, 0));
        let l: ComplexRational = "i".parse().unwrap();
        assert_eq!(l, ComplexRational::from_ints(0, 1));
        assert_eq!(ComplexRational::from_ints(2, 1).to_string(), "2+1i");
    }

    fn second_coproducts(t: &TensorExpr) -> (TensorExpr, TensorExpr) {
        (t.coproduct_at(0).unwrap(), t.coproduct_at(1).unwrap())
    }

    #[test]
    fn coproduct_is_coassociative() {
        for k in 0..=12 {
            let d = coproduct(&BaseFunction::monomial(k)).unwrap();
            let (left, right) = second_coproducts(&d);
            assert_eq!(left, right, "x^{k}");
        }
        let l = ComplexRational::from_ints(2, 1);
        for p in 1..=8 {
            let d = coproduct(&BaseFunction::resolvent(l.clone(), p).unwrap()).unwrap();
            let (left, right) = second_coproducts(&d);
            assert_eq!(left, right, "ω^{p}");
        }
    }

    #[test]
    fn coproduct_is_a_derivation() {
        use TensorFactor::*;
        let one = |w: usize, at: usize, f: TensorFactor| {
            let mut v = vec![Power(0); w];
            v[at] = f;
            TensorExpr::from_factors(v)
        };
        for fa in [Power(0), Power(1), Power(3), Power(5)] {
            for fb in [Power(0), Power(2), Power(4)] {
                check_leibniz(fa, fb, &one);
            }
        }
        for fa in [Resolvent(1), Resolvent(2)] {
            for fb in [Resolvent(1), Resolvent(3)] {
                check_leibniz(fa, fb, &one);
            }
        }
    }

    fn check_leibniz(
        fa: TensorFactor,
        fb: TensorFactor,
        one: &dyn Fn(usize, usize, TensorFactor) -> TensorExpr,
    ) {
        // Δ(fg) = Δf · (1 ⊗ g) + (f ⊗ 1) · Δg
        let prod = TensorExpr::from_factors(vec![fa.mul(fb).unwrap()])
            .coproduct_at(0)
            .unwrap();
        let da = TensorExpr::from_factors(vec![fa]).coproduct_at(0).unwrap();
        let db = TensorExpr::from_factors(vec![fb]).coproduct_at(0).unwrap();
        let rhs = da
            .mul(&one(2, 1, fb))
            .unwrap()
            .add(&one(2, 0, fa).mul(&db).unwrap())
            .unwrap();
        assert_eq!(prod, rhs, "{fa:?} {fb:?}");
    }

    fn raw_term() -> impl Strategy<Value = BracketTerm> {
        (0usize..=3)
            .prop_flat_map(|m| {
                (
                    Just(m),
                    1usize..=m + 1,
                    proptest::collection::vec(0usize..3, m + 1),
                    proptest::collection::vec((0usize..=m, 0usize..3), 0..3),
                    0usize..4,
                )
            })
            .prop_map(|(m, k, assign, extra, rot)| {
                let mut slots = vec![Vec::new(); k];
                for (v, a) in assign.iter().enumerate() {
                    let s = if v < k { v } else { a % k };
                    slots[s].push(v);
                }
                for (v, s) in extra {
                    slots[s % k].push(v);
                }
                for s in &mut slots {
                    s.reverse();
                    let r = rot % s.len();
                    s.rotate_left(r);
                }
                BracketTerm::raw(m, slots, Symbol::generic()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(t in raw_term()) {
            let c = canonicalize(&t);
            prop_assert!(c.is_canonical());
            prop_assert_eq!(canonicalize(&c), c);
        }

        #[test]
        fn canonicalize_preserves_value(t in raw_term()) {
            use crate::numeval::eval_bracket_term;
            use num_complex::Complex64;
            let rates = [int(1), rat(-1, 2), rat(1, 3), rat(-2, 5)];
            let base = BaseFunction::separable(
                rates[..t.slots().len()].iter().map(|r| BaseFunction::exp(r.clone())).collect(),
            )
            .unwrap();
            let pts: Vec<Complex64> = (0..=t.arity_in()).map(|k| Complex64::new(0.37 * k as f64 - 0.5, 0.0)).collect();
            let a: Complex64 = eval_bracket_term(&t, &base, &pts).unwrap();
            let b: Complex64 = eval_bracket_term(&canonicalize(&t), &base, &pts).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}
