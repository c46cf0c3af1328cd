//! Face, degeneracy, cyclic and derivative operators on spectral functions.
//!
//! An expression whose terms have variables `x0..=xm` is an object of arity
//! `m`. Faces raise the arity by one, degeneracies lower it by one, cyclic
//! operators and partial derivatives preserve it. Operators act linearly.

mod relations;

pub use relations::{
    corrected_dual_relations, dual_relations, exact_soundness, numeric_soundness,
    theorem_relations, verify_dual_relations, verify_dual_relations_semantic, verify_relations,
    verify_theorem_relations, Relation, RelationSide, SoundnessBase,
};

use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{BracketTerm, Rational, SpectralExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorKind {
    /// `δⱼ`, divided difference in the `j`-th variable.
    Face(usize),
    /// `σⱼ`, restriction to `xⱼ = xⱼ₊₁`; `j = m` identifies `x_m` with `x0`.
    Degeneracy(usize),
    /// `τ f(x0,…,xm) = f(xm, x0, …, x_{m-1})`.
    Cyclic,
    CyclicInverse,
    /// `τ δ₀`, producing the bracket `[x_{m+1}, x0]` in the first slot.
    LastFace,
    /// `∂ᵢ = σᵢ δᵢ`.
    Partial(usize),
    /// `dⱼ = σⱼ`.
    DualFace(usize),
    /// `sⱼ = δⱼ₊₁` (with `s_m` the last face).
    DualDegeneracy(usize),
    /// `t = τ⁻¹`.
    DualCyclic,
}

/// A generator together with the arity it acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    kind: GeneratorKind,
    source: usize,
}

impl Generator {
    pub fn new(kind: GeneratorKind, source: usize) -> Result<Self> {
        use GeneratorKind::*;
        let (index, max, what) = match kind {
            Face(j) => (j, Some(source), "face"),
            Degeneracy(j) => (j, (source >= 1).then_some(source), "degeneracy"),
            Partial(i) => (i, Some(source), "partial derivative"),
            DualFace(j) => (j, (source >= 1).then_some(source), "dual face"),
            DualDegeneracy(j) => (j, Some(source), "dual degeneracy"),
            Cyclic | CyclicInverse | LastFace | DualCyclic => (0, Some(source), ""),
        };
        match max {
            Some(max) if index <= max => Ok(Generator { kind, source }),
            Some(max) => Err(Error::IndexOutOfRange { what, index, max }),
            None => Err(Error::ArityMismatch(format!(
                "{what} needs at least two variables, got arity {source}"
            ))),
        }
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        use GeneratorKind::*;
        match self.kind {
            Face(_) | LastFace | DualDegeneracy(_) => self.source + 1,
            Degeneracy(_) | DualFace(_) => self.source - 1,
            Cyclic | CyclicInverse | Partial(_) | DualCyclic => self.source,
        }
    }

    pub fn apply(&self, expr: &SpectralExpr) -> Result<SpectralExpr> {
        if expr.m() != self.source {
            return Err(Error::ArityMismatch(format!(
                "{self} acts on arity {} but the expression has arity {}",
                self.source,
                expr.m()
            )));
        }
        use GeneratorKind::*;
        match self.kind {
            Face(j) => face(j, expr),
            Degeneracy(j) | DualFace(j) => degeneracy(j, expr),
            Cyclic => cyclic(expr),
            CyclicInverse | DualCyclic => cyclic_inverse(expr),
            LastFace => last_face(expr),
            Partial(i) => partial(i, expr),
            DualDegeneracy(j) if j == self.source => last_face(expr),
            DualDegeneracy(j) => face(j + 1, expr),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeneratorKind::*;
        match self.kind {
            Face(j) => write!(f, "δ{j}"),
            Degeneracy(j) => write!(f, "σ{j}"),
            Cyclic => f.write_str("τ"),
            CyclicInverse => f.write_str("τ⁻¹"),
            LastFace => write!(f, "δ{}", self.source + 1),
            Partial(i) => write!(f, "∂{i}"),
            DualFace(j) => write!(f, "d{j}"),
            DualDegeneracy(j) => write!(f, "s{j}"),
            DualCyclic => f.write_str("t"),
        }
    }
}

/// A well-typed composite, stored in application order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperatorWord {
    source: usize,
    gens: Vec<Generator>,
}

impl OperatorWord {
    pub fn identity(source: usize) -> Self {
        OperatorWord {
            source,
            gens: Vec::new(),
        }
    }

    /// Builds a word from kinds listed in application order.
    pub fn from_kinds(source: usize, kinds: &[GeneratorKind]) -> Result<Self> {
        let mut w = OperatorWord::identity(source);
        for &k in kinds {
            w.push(k)?;
        }
        Ok(w)
    }

    /// Appends a generator applied after the current word.
    pub fn push(&mut self, kind: GeneratorKind) -> Result<()> {
        let g = Generator::new(kind, self.target()).map_err(|e| match e {
            Error::IndexOutOfRange { what, index, max } => Error::ArityMismatch(format!(
                "position {}: {what} index {index} exceeds {max}",
                self.gens.len()
            )),
            Error::ArityMismatch(m) => {
                Error::ArityMismatch(format!("position {}: {m}", self.gens.len()))
            }
            other => other,
        })?;
        self.gens.push(g);
        Ok(())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &OperatorWord) -> Result<OperatorWord> {
        if other.source != self.target() {
            return Err(Error::ArityMismatch(format!(
                "cannot follow a word ending at arity {} by one starting at {}",
                self.target(),
                other.source
            )));
        }
        let mut w = self.clone();
        w.gens.extend_from_slice(&other.gens);
        Ok(w)
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.gens.last().map_or(self.source, |g| g.target())
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Parses whitespace-separated tokens written as a composition: the
    /// rightmost token acts first, so `s0 d0` is `σ₀δ₀ = ∂₀`.
    ///
    /// Tokens: `dJ` face (`J = m+1` is the last face), `dlast`, `sJ`
    /// degeneracy (`J = m` is the extra degeneracy), `t`, `t^K` (any nonzero
    /// integer `K`), `pI` partial derivative, `DdJ`, `DsJ`, `Dt` dual
    /// generators.
    pub fn parse(text: &str, source: usize) -> Result<OperatorWord> {
        let tokens = tokenize(text)?;
        let mut w = OperatorWord::identity(source);
        for (pos, tok) in tokens.into_iter().rev() {
            let n = w.target();
            let kinds: Vec<GeneratorKind> = match tok {
                Token::Face(j) if j == n + 1 => vec![GeneratorKind::LastFace],
                Token::Face(j) => vec![GeneratorKind::Face(j)],
                Token::LastFace => vec![GeneratorKind::LastFace],
                Token::Degeneracy(j) => vec![GeneratorKind::Degeneracy(j)],
                Token::Cyclic(k) if k >= 0 => vec![GeneratorKind::Cyclic; k as usize],
                Token::Cyclic(k) => vec![GeneratorKind::CyclicInverse; k.unsigned_abs() as usize],
                Token::Partial(i) => vec![GeneratorKind::Partial(i)],
                Token::DualFace(j) => vec![GeneratorKind::DualFace(j)],
                Token::DualDegeneracy(j) => vec![GeneratorKind::DualDegeneracy(j)],
                Token::DualCyclic => vec![GeneratorKind::DualCyclic],
            };
            for k in kinds {
                let g = Generator::new(k, w.target())
                    .map_err(|e| Error::ArityMismatch(format!("token at column {pos}: {e}")))?;
                w.gens.push(g);
            }
        }
        Ok(w)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gens.is_empty() {
            return write!(f, "id({})", self.source);
        }
        for g in self.gens.iter().rev() {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Token {
    Face(usize),
    LastFace,
    Degeneracy(usize),
    Cyclic(i64),
    Partial(usize),
    DualFace(usize),
    DualDegeneracy(usize),
    DualCyclic,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text
        .char_indices()
        .chain(std::iter::once((text.len(), ' ')))
    {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, parse_token(&text[s..i], s)?));
                start = None;
            }
            _ => {}
        }
    }
    Ok(out)
}

fn parse_token(tok: &str, pos: usize) -> Result<Token> {
    let index = |rest: &str| -> Result<usize> {
        rest.parse::<usize>()
            .map_err(|_| Error::parse(pos, format!("bad index in token `{tok}`")))
    };
    Ok(match tok {
        "dlast" => Token::LastFace,
        "t" => Token::Cyclic(1),
        "Dt" => Token::DualCyclic,
        _ if tok.starts_with("t^") => {
            let k: i64 = tok[2..]
                .parse()
                .map_err(|_| Error::parse(pos, format!("bad exponent in token `{tok}`")))?;
            Token::Cyclic(k)
        }
        _ if tok.starts_with("Dd") => Token::DualFace(index(&tok[2..])?),
        _ if tok.starts_with("Ds") => Token::DualDegeneracy(index(&tok[2..])?),
        _ if tok.starts_with('d') => Token::Face(index(&tok[1..])?),
        _ if tok.starts_with('s') => Token::Degeneracy(index(&tok[1..])?),
        _ if tok.starts_with('p') => Token::Partial(index(&tok[1..])?),
        _ => return Err(Error::parse(pos, format!("unknown token `{tok}`"))),
    })
}

fn map_terms(
    expr: &SpectralExpr,
    new_m: usize,
    f: impl Fn(&BracketTerm) -> Vec<BracketTerm>,
) -> Result<SpectralExpr> {
    expr.try_map_terms(new_m, expr.n(), |t| {
        Ok(f(t).into_iter().map(|t| (t, Rational::one())).collect())
    })
}

fn face_term(j: usize, t: &BracketTerm) -> Vec<BracketTerm> {
    let m = t.arity_in();
    let shift = |l: usize| if l < j { l } else { l + 1 };
    let count = t.occurrences(j).len();
    (0..count)
        .map(|p| {
            let mut q = 0;
            let slots = t
                .slots()
                .iter()
                .map(|slot| {
                    let mut s = Vec::with_capacity(slot.len() + 1);
                    for &v in slot {
                        if v != j {
                            s.push(shift(v));
                            continue;
                        }
                        match q.cmp(&p) {
                            std::cmp::Ordering::Less => s.push(j),
                            std::cmp::Ordering::Equal => {
                                s.push(j);
                                s.push(j + 1);
                            }
                            std::cmp::Ordering::Greater => s.push(j + 1),
                        }
                        q += 1;
                    }
                    s
                })
                .collect();
            BracketTerm::from_parts(m + 1, slots, t.symbol().clone())
        })
        .collect()
}

/// `δⱼ`: divided difference in `xⱼ`, introducing `x_{j+1}` and shifting the
/// later variables up. A variable occurring several times expands into one
/// term per occurrence.
pub fn face(j: usize, expr: &SpectralExpr) -> Result<SpectralExpr> {
    let m = expr.m();
    if j > m {
        return Err(Error::IndexOutOfRange {
            what: "face",
            index: j,
            max: m,
        });
    }
    map_terms(expr, m + 1, |t| face_term(j, t))
}

/// `σⱼ`: identifies `x_{j+1}` with `xⱼ` (for `j = m`, `x_m` with `x0`) and
/// closes the gap in the labels.
pub fn degeneracy(j: usize, expr: &SpectralExpr) -> Result<SpectralExpr> {
    let m = expr.m();
    if m == 0 {
        return Err(Error::ArityMismatch(
            "a degeneracy needs at least two variables".into(),
        ));
    }
    if j > m {
        return Err(Error::IndexOutOfRange {
            what: "degeneracy",
            index: j,
            max: m,
        });
    }
    map_terms(expr, m - 1, |t| {
        let relabeled = if j == m {
            t.relabel(m - 1, |l| if l == m { 0 } else { l })
        } else {
            t.relabel(m - 1, |l| if l <= j { l } else { l - 1 })
        };
        vec![relabeled]
    })
}

/// `τ`: `f(x0,…,xm) ↦ f(xm, x0, …, x_{m-1})`.
pub fn cyclic(expr: &SpectralExpr) -> Result<SpectralExpr> {
    let m = expr.m();
    map_terms(expr, m, |t| vec![t.relabel(m, |l| (l + m) % (m + 1))])
}

pub fn cyclic_inverse(expr: &SpectralExpr) -> Result<SpectralExpr> {
    let m = expr.m();
    map_terms(expr, m, |t| vec![t.relabel(m, |l| (l + 1) % (m + 1))])
}

/// `τδ₀`.
pub fn last_face(expr: &SpectralExpr) -> Result<SpectralExpr> {
    cyclic(&face(0, expr)?)
}

/// `∂ᵢ = σᵢδᵢ`: one more confluent copy of `xᵢ`.
pub fn partial(i: usize, expr: &SpectralExpr) -> Result<SpectralExpr> {
    if i > expr.m() {
        return Err(Error::IndexOutOfRange {
            what: "partial derivative",
            index: i,
            max: expr.m(),
        });
    }
    degeneracy(i, &face(i, expr)?)
}

/// `dⱼ = σⱼ`.
pub fn dual_face(j: usize, expr: &SpectralExpr) -> Result<SpectralExpr> {
    degeneracy(j, expr)
}

/// `sⱼ = δⱼ₊₁`, where `s_m` is the last face.
pub fn dual_degeneracy(j: usize, expr: &SpectralExpr) -> Result<SpectralExpr> {
    let m = expr.m();
    if j > m {
        return Err(Error::IndexOutOfRange {
            what: "dual degeneracy",
            index: j,
            max: m,
        });
    }
    if j == m {
        last_face(expr)
    } else {
        face(j + 1, expr)
    }
}

/// `t = τ⁻¹`.
pub fn dual_cyclic(expr: &SpectralExpr) -> Result<SpectralExpr> {
    cyclic_inverse(expr)
}

/// Applies the generators of `word` in order.
pub fn apply_word(word: &OperatorWord, expr: &SpectralExpr) -> Result<SpectralExpr> {
    if word.source() != expr.m() {
        return Err(Error::ArityMismatch(format!(
            "word starts at arity {} but the expression has arity {}",
            word.source(),
            expr.m()
        )));
    }
    let mut cur = expr.clone();
    for (pos, g) in word.generators().iter().enumerate() {
        cur = g
            .apply(&cur)
            .map_err(|e| Error::ArityMismatch(format!("position {pos}: {e}")))?;
    }
    Ok(cur)
}
