//! Functional calculus of a hermitian matrix acting on tensor products of
//! matrices: `S_h(f)(ρ₁⊗⋯⊗ρₙ)` evaluated in the eigenbasis of `h`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::{BaseFunction, BracketTerm, SpectralExpr, Symbol};
use crate::numeval::{divided_difference, eval_expr};
use crate::ops::{apply_word, OperatorWord};
use crate::sampling::{ginibre, gue, rng};

pub type Matrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;

fn is_hermitian(m: &Matrix) -> bool {
    m.is_square() && (m - m.adjoint()).norm() <= HERMITIAN_TOL * m.norm().max(1.0)
}

/// `‖a − b‖ / max(1, ‖a‖, ‖b‖)` in the Frobenius norm.
pub fn residual(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Scalar version of [`residual`].
pub fn scalar_residual(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Eigen-decomposition `h = U diag(λ) Uᴴ` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub unitary: Matrix,
}

impl SpectralData {
    pub fn new(h: &Matrix) -> Result<Self> {
        if !is_hermitian(h) {
            return Err(Error::Precondition("h must be hermitian".into()));
        }
        let eig = h.clone().symmetric_eigen();
        let d = h.nrows();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let unitary = Matrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(SpectralData {
            eigenvalues,
            unitary,
        })
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `(‖UᴴU − I‖, ‖U diag(λ) Uᴴ − h‖)`.
    pub fn residuals(&self, h: &Matrix) -> (f64, f64) {
        let d = self.dimension();
        let u = &self.unitary;
        let unit = (u.adjoint() * u - Matrix::identity(d, d)).norm();
        let diag = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        (unit, (u * diag * u.adjoint() - h).norm())
    }

    /// `f(h)` by the spectral theorem.
    pub fn function(&self, f: impl Fn(f64) -> Result<Complex64>) -> Result<Matrix> {
        let d = self.dimension();
        let mut diag = Matrix::zeros(d, d);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            diag[(k, k)] = f(l)?;
        }
        Ok(&self.unitary * diag * self.unitary.adjoint())
    }

    /// Eigenbasis sum for a function of `rhos.len() + 1` real arguments:
    /// entry `(i₀, iₙ)` of the rotated result is
    /// `Σ f(λ_{i₀},…,λ_{iₙ}) ρ̃₁[i₀,i₁]⋯ρ̃ₙ[iₙ₋₁,iₙ]`.
    pub fn apply_with(
        &self,
        rhos: &[Matrix],
        f: impl Fn(&[Complex64]) -> Result<Complex64>,
    ) -> Result<Matrix> {
        let d = self.dimension();
        for r in rhos {
            if r.nrows() != d || r.ncols() != d {
                return Err(Error::ArityMismatch(format!(
                    "ρ is {}×{}, expected {d}×{d}",
                    r.nrows(),
                    r.ncols()
                )));
            }
        }
        let u = &self.unitary;
        let rotated: Vec<Matrix> = rhos.iter().map(|r| u.adjoint() * r * u).collect();
        let lambdas: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(l, 0.0))
            .collect();
        let n = rhos.len();
        let mut out = Matrix::zeros(d, d);
        let mut idx = vec![0usize; n + 1];
        let mut point = vec![Complex64::new(0.0, 0.0); n + 1];
        loop {
            let mut weight = Complex64::new(1.0, 0.0);
            for (k, r) in rotated.iter().enumerate() {
                weight *= r[(idx[k], idx[k + 1])];
            }
            if weight != Complex64::new(0.0, 0.0) {
                for (p, &i) in point.iter_mut().zip(&idx) {
                    *p = lambdas[i];
                }
                out[(idx[0], idx[n])] += f(&point)? * weight;
            }
            let mut p = 0;
            loop {
                if p > n {
                    return Ok(u * out * u.adjoint());
                }
                idx[p] += 1;
                if idx[p] < d {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    pub fn apply(&self, f: &SpectralFn, rhos: &[Matrix]) -> Result<Matrix> {
        if rhos.len() != f.arity() {
            return Err(Error::ArityMismatch(format!(
                "function of {} arguments needs {} matrices, got {}",
                f.arity() + 1,
                f.arity(),
                rhos.len()
            )));
        }
        self.apply_with(rhos, |p| f.eval(p))
    }
}

/// A function of `m + 1` spectral arguments: an expression over the divided
/// differences of a concrete base function.
#[derive(Clone, Debug)]
pub struct SpectralFn {
    expr: SpectralExpr,
    base: BaseFunction,
}

impl SpectralFn {
    pub fn new(expr: SpectralExpr, base: BaseFunction) -> Result<Self> {
        if base.arity() != expr.n() + 1 {
            return Err(Error::ArityMismatch(format!(
                "{base} takes {} arguments, expression has {} slots",
                base.arity(),
                expr.n() + 1
            )));
        }
        Ok(SpectralFn { expr, base })
    }

    /// The base function itself.
    pub fn from_base(base: BaseFunction) -> Self {
        let expr = SpectralExpr::generic(base.arity() - 1);
        SpectralFn { expr, base }
    }

    /// `(x₀,…,xₙ) ↦ f[x₀,…,xₙ]` for a one-variable `f`.
    pub fn divided_difference(base: BaseFunction, n: usize) -> Result<Self> {
        if base.arity() != 1 {
            return Err(Error::ArityMismatch(format!(
                "{base} is not a function of one variable"
            )));
        }
        let term = BracketTerm::new(n, vec![(0..=n).collect()], Symbol::generic())?;
        Ok(SpectralFn {
            expr: SpectralExpr::from_term(term),
            base,
        })
    }

    pub fn expr(&self) -> &SpectralExpr {
        &self.expr
    }

    pub fn base(&self) -> &BaseFunction {
        &self.base
    }

    /// Number of matrix arguments it acts on.
    pub fn arity(&self) -> usize {
        self.expr.m()
    }

    pub fn eval(&self, pts: &[Complex64]) -> Result<Complex64> {
        eval_expr(&self.expr, &self.base, pts)
    }

    pub fn with_expr(&self, expr: SpectralExpr) -> Result<Self> {
        SpectralFn::new(expr, self.base.clone())
    }

    /// Image under an operator word.
    pub fn apply_word(&self, word: &OperatorWord) -> Result<Self> {
        self.with_expr(apply_word(word, &self.expr)?)
    }
}

/// A hermitian `h`, a hermitian derivation generator `D` for `∇ = i[D,·]`,
/// and a list of test matrices.
#[derive(Clone, Debug)]
pub struct MatrixContext {
    h: Matrix,
    derivation: Matrix,
    rho: Vec<Matrix>,
    spectral: SpectralData,
    seed: Option<u64>,
}

impl MatrixContext {
    pub fn new(h: Matrix, derivation: Matrix, rho: Vec<Matrix>) -> Result<Self> {
        if !is_hermitian(&derivation) || derivation.nrows() != h.nrows() {
            return Err(Error::Precondition(
                "D must be hermitian of the same size as h".into(),
            ));
        }
        let spectral = SpectralData::new(&h)?;
        let d = h.nrows();
        if rho.iter().any(|r| r.nrows() != d || r.ncols() != d) {
            return Err(Error::Precondition(format!("all ρ must be {d}×{d}")));
        }
        Ok(MatrixContext {
            h,
            derivation,
            rho,
            spectral,
            seed: None,
        })
    }

    /// GUE `h` and `D`, Ginibre `ρ₁..ρₖ`, all from one seeded stream.
    pub fn random(seed: u64, d: usize, k: usize) -> Self {
        let mut r = rng(seed);
        let h = gue(&mut r, d);
        let derivation = gue(&mut r, d);
        let rho = (0..k).map(|_| ginibre(&mut r, d)).collect();
        let mut ctx = MatrixContext::new(h, derivation, rho).expect("GUE samples are hermitian");
        ctx.seed = Some(seed);
        ctx
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.h.nrows()
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn derivation(&self) -> &Matrix {
        &self.derivation
    }

    pub fn rho(&self) -> &[Matrix] {
        &self.rho
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(self.dimension(), self.dimension())
    }

    /// Normalized trace `Tr(a)/d`.
    pub fn trace(&self, a: &Matrix) -> Complex64 {
        a.trace() / self.dimension() as f64
    }

    /// `∇a = i(Da − aD)`.
    pub fn nabla(&self, a: &Matrix) -> Matrix {
        (&self.derivation * a - a * &self.derivation) * Complex64::new(0.0, 1.0)
    }

    /// `ρ₁⋯ρⱼ h ρⱼ₊₁⋯ρₙ`, with `h` after the first `j` factors.
    pub fn mult_operator(&self, j: usize, rhos: &[Matrix]) -> Result<Matrix> {
        if j > rhos.len() {
            return Err(Error::IndexOutOfRange {
                what: "slot",
                index: j,
                max: rhos.len(),
            });
        }
        let mut out = self.identity();
        for r in &rhos[..j] {
            out *= r;
        }
        out *= &self.h;
        for r in &rhos[j..] {
            out *= r;
        }
        Ok(out)
    }

    pub fn schwartz_apply(&self, f: &SpectralFn, rhos: &[Matrix]) -> Result<Matrix> {
        self.spectral.apply(f, rhos)
    }

    /// A random hermitian direction of the context's size.
    pub fn random_hermitian<R: Rng>(&self, r: &mut R) -> Matrix {
        gue(r, self.dimension())
    }

    /// The same context with `h` replaced.
    pub fn with_h(&self, h: Matrix) -> Result<Self> {
        let spectral = SpectralData::new(&h)?;
        Ok(MatrixContext {
            h,
            spectral,
            ..self.clone()
        })
    }

    /// `exp(isD) h exp(−isD)`, the flow generated by `∇`.
    pub fn flowed_h(&self, s: f64) -> Result<Matrix> {
        let sd = SpectralData::new(&self.derivation)?;
        let u = sd.function(|l| Ok(Complex64::new(0.0, s * l).exp()))?;
        Ok(&u * &self.h * u.adjoint())
    }
}

/// `ρ` with `v` inserted before position `j`.
pub fn insert_at(rhos: &[Matrix], j: usize, v: &Matrix) -> Vec<Matrix> {
    let mut out = rhos.to_vec();
    out.insert(j, v.clone());
    out
}

/// The direction in which `h` is varied.
#[derive(Clone, Debug)]
pub enum Variation {
    /// `h ↦ h + t a`.
    Direction(Matrix),
    /// `h ↦ exp(itD) h exp(−itD)`, velocity `∇h`.
    Inner,
}

impl Variation {
    pub fn velocity(&self, ctx: &MatrixContext) -> Matrix {
        match self {
            Variation::Direction(a) => a.clone(),
            Variation::Inner => ctx.nabla(ctx.h()),
        }
    }

    fn moved(&self, ctx: &MatrixContext, t: f64) -> Result<MatrixContext> {
        match self {
            Variation::Direction(a) => ctx.with_h(ctx.h() + a * Complex64::new(t, 0.0)),
            Variation::Inner => ctx.with_h(ctx.flowed_h(t)?),
        }
    }
}

/// `d/dt S_{h(t)}(f)(ρ)` at `t = 0` assembled from faces:
/// `Σⱼ S_h(δⱼ f)(ρ with ḣ inserted at slot j)`.
pub fn variation(
    ctx: &MatrixContext,
    f: &SpectralFn,
    rhos: &[Matrix],
    mode: &Variation,
) -> Result<Matrix> {
    let v = mode.velocity(ctx);
    let n = f.arity();
    let mut acc = Matrix::zeros(ctx.dimension(), ctx.dimension());
    for j in 0..=n {
        let face = f.apply_word(&OperatorWord::from_kinds(
            n,
            &[crate::ops::GeneratorKind::Face(j)],
        )?)?;
        acc += ctx.schwartz_apply(&face, &insert_at(rhos, j, &v))?;
    }
    Ok(acc)
}

/// Central difference `(S_{h(s)} − S_{h(−s)}) / 2s` with `ρ` held fixed.
pub fn central_difference(
    ctx: &MatrixContext,
    f: &SpectralFn,
    rhos: &[Matrix],
    mode: &Variation,
    step: f64,
) -> Result<Matrix> {
    let plus = mode.moved(ctx, step)?.schwartz_apply(f, rhos)?;
    let minus = mode.moved(ctx, -step)?.schwartz_apply(f, rhos)?;
    Ok((plus - minus) / Complex64::new(2.0 * step, 0.0))
}

/// Residual of `S_h(f)(…,ρⱼ,1,ρⱼ₊₂,…) = S_h(σⱼ f)(…,ρⱼ,ρⱼ₊₂,…)` using the
/// first `n` context matrices, `n` the arity of `f`.
pub fn check_degeneracy_lemma(ctx: &MatrixContext, f: &SpectralFn, j: usize) -> Result<f64> {
    let n = f.arity();
    if j >= n {
        return Err(Error::IndexOutOfRange {
            what: "degeneracy",
            index: j,
            max: n.saturating_sub(1),
        });
    }
    let rhos = context_rhos(ctx, n)?;
    let mut with_one = rhos.to_vec();
    with_one[j] = ctx.identity();
    let mut removed = rhos.to_vec();
    removed.remove(j);
    let lhs = ctx.schwartz_apply(f, &with_one)?;
    let sigma = f.apply_word(&OperatorWord::from_kinds(
        n,
        &[crate::ops::GeneratorKind::Degeneracy(j)],
    )?)?;
    let rhs = ctx.schwartz_apply(&sigma, &removed)?;
    Ok(residual(&lhs, &rhs))
}

fn context_rhos(ctx: &MatrixContext, k: usize) -> Result<&[Matrix]> {
    ctx.rho().get(..k).ok_or_else(|| {
        Error::Precondition(format!(
            "context holds {} matrices, {k} needed",
            ctx.rho().len()
        ))
    })
}

/// Trace identities for the extra degeneracy and the cyclic operator, with
/// `n` the arity of `f`:
///
/// `φ₀(S(f)(ρ₁…ρₙ)) = φ₀(S(σₙf)(ρ₁…ρₙ₋₁)·ρₙ)` and
/// `φ₀(S(f)(ρ₁…ρₙ)·ρₙ₊₁) = φ₀(S(τf)(ρ₂…ρₙ₊₁)·ρ₁)`.
pub fn check_trace_cyclic(ctx: &MatrixContext, f: &SpectralFn) -> Result<(f64, f64)> {
    use crate::ops::GeneratorKind::{Cyclic, Degeneracy};
    let n = f.arity();
    if n == 0 {
        return Err(Error::Precondition(
            "trace identities need at least one matrix argument".into(),
        ));
    }
    let rhos = context_rhos(ctx, n + 1)?;
    let lhs = ctx.trace(&ctx.schwartz_apply(f, &rhos[..n])?);
    let extra = f.apply_word(&OperatorWord::from_kinds(n, &[Degeneracy(n)])?)?;
    let rhs = ctx.trace(&(ctx.schwartz_apply(&extra, &rhos[..n - 1])? * &rhos[n - 1]));
    let extra_residual = scalar_residual(lhs, rhs);

    let lhs = ctx.trace(&(ctx.schwartz_apply(f, &rhos[..n])? * &rhos[n]));
    let tau = f.apply_word(&OperatorWord::from_kinds(n, &[Cyclic])?)?;
    let rhs = ctx.trace(&(ctx.schwartz_apply(&tau, &rhos[1..=n])? * &rhos[0]));
    Ok((extra_residual, scalar_residual(lhs, rhs)))
}

/// Remainders of the Taylor expansion of `f(h + t b)` to order `order`.
#[derive(Clone, Debug)]
pub struct TaylorReport {
    pub order: usize,
    pub ts: Vec<f64>,
    pub remainders: Vec<f64>,
    pub slope: f64,
}

/// Nine points from `1e-1` down to `1e-3`, equally spaced in `log t`.
pub fn taylor_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-1.0 - k as f64 * 0.25)).collect()
}

/// Least-squares slope of `log r` against `log t`.
pub fn fit_slope(ts: &[f64], rs: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `‖f(h+tb) − f(h) − Σ_{k=1..N} tᵏ S_h(f[x₀..xₖ])(b⊗ᵏ)‖` on `ts`, and the
/// fitted slope.
pub fn taylor_check(
    ctx: &MatrixContext,
    f: &BaseFunction,
    b: &Matrix,
    order: usize,
    ts: &[f64],
) -> Result<TaylorReport> {
    if f.arity() != 1 {
        return Err(Error::ArityMismatch(format!(
            "{f} is not a function of one variable"
        )));
    }
    if !is_hermitian(b) {
        return Err(Error::Precondition("b must be hermitian".into()));
    }
    let scalar = |x: f64| divided_difference::<Complex64>(f, &[Complex64::new(x, 0.0)]);
    let f_h = ctx.spectral().function(scalar)?;
    let terms: Vec<Matrix> = (1..=order)
        .map(|k| {
            let g = SpectralFn::divided_difference(f.clone(), k)?;
            ctx.schwartz_apply(&g, &vec![b.clone(); k])
        })
        .collect::<Result<_>>()?;
    let mut remainders = Vec::with_capacity(ts.len());
    for &t in ts {
        let moved = SpectralData::new(&(ctx.h() + b * Complex64::new(t, 0.0)))?;
        let mut r = moved.function(scalar)? - &f_h;
        for (k, term) in terms.iter().enumerate() {
            r -= term * Complex64::new(t.powi(k as i32 + 1), 0.0);
        }
        remainders.push(r.norm());
    }
    Ok(TaylorReport {
        order,
        ts: ts.to_vec(),
        slope: fit_slope(ts, &remainders),
        remainders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rat, ComplexRational};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn spectral_data_is_accurate() {
        let ctx = MatrixContext::random(1, 5, 0);
        let (u, h) = ctx.spectral().residuals(ctx.h());
        assert!(u <= 1e-12 && h <= 1e-10, "{u} {h}");
        assert!(ctx.spectral().eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn mult_operator_examples() {
        let ctx = MatrixContext::random(2, 4, 2);
        let (r1, r2) = (&ctx.rho()[0], &ctx.rho()[1]);
        let h = ctx.h();
        assert!(
            residual(
                &ctx.mult_operator(0, std::slice::from_ref(r1)).unwrap(),
                &(h * r1)
            ) < 1e-14
        );
        assert!(
            residual(
                &ctx.mult_operator(1, std::slice::from_ref(r1)).unwrap(),
                &(r1 * h)
            ) < 1e-14
        );
        assert!(
            residual(
                &ctx.mult_operator(0, &[r1.clone(), r2.clone()]).unwrap(),
                &(h * r1 * r2)
            ) < 1e-14
        );
        let ones = vec![ctx.identity(); 3];
        for j in 0..=3 {
            assert!(residual(&ctx.mult_operator(j, &ones).unwrap(), h) < 1e-14);
        }
        assert!(ctx.mult_operator(4, &ones).is_err());
    }

    #[test]
    fn schwartz_examples() {
        let ctx = MatrixContext::random(3, 5, 1);
        let rho = ctx.rho()[0].clone();
        // n = 0: plain functional calculus, compared with a power series of h
        let f = SpectralFn::from_base(BaseFunction::monomial(3));
        let cube = ctx.h() * ctx.h() * ctx.h();
        assert!(residual(&ctx.schwartz_apply(&f, &[]).unwrap(), &cube) < 1e-12);
        // x0 + x1 ↦ hρ + ρh
        let sum = SpectralFn::new(
            SpectralExpr::generic(1),
            BaseFunction::linear_form(BaseFunction::monomial(1), vec![rat(1, 1), rat(1, 1)])
                .unwrap(),
        )
        .unwrap();
        let expect = ctx.h() * &rho + &rho * ctx.h();
        assert!(
            residual(
                &ctx.schwartz_apply(&sum, std::slice::from_ref(&rho))
                    .unwrap(),
                &expect
            ) < 1e-12
        );
        // resolvents: (h−λ)⁻¹ρ(h−λ)⁻¹ up to the sign convention of ω
        let lam = ComplexRational::from_ints(2, 1);
        let w = BaseFunction::omega(lam.clone());
        let g = SpectralFn::from_base(BaseFunction::separable(vec![w.clone(), w.clone()]).unwrap());
        let shift = ctx.h() - ctx.identity() * lam.to_c64();
        let inv = shift.try_inverse().unwrap();
        let omega_at_zero: Complex64 = crate::numeval::eval_base(&w, &[c(0.0)]).unwrap();
        // ω(x) = s/(x−λ) for a fixed scalar s, read off at x = 0
        let s = omega_at_zero * (-lam.to_c64());
        let expect = &inv * &rho * &inv * (s * s);
        assert!(residual(&ctx.schwartz_apply(&g, &[rho]).unwrap(), &expect) < 1e-12);
    }

    #[test]
    fn lemmas_at_small_size() {
        for seed in [1, 2] {
            let ctx = MatrixContext::random(seed, 4, 4);
            let f = SpectralFn::from_base(
                BaseFunction::separable(vec![
                    BaseFunction::exp(rat(1, 1)),
                    BaseFunction::exp(rat(-1, 2)),
                    BaseFunction::monomial(2),
                    BaseFunction::exp(rat(1, 3)),
                ])
                .unwrap(),
            );
            for j in 0..3 {
                assert!(check_degeneracy_lemma(&ctx, &f, j).unwrap() <= 1e-10);
            }
            let (a, b) = check_trace_cyclic(&ctx, &f).unwrap();
            assert!(a <= 1e-10 && b <= 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn variation_of_square() {
        let ctx = MatrixContext::random(4, 5, 0);
        let f = SpectralFn::from_base(BaseFunction::monomial(2));
        let v = variation(&ctx, &f, &[], &Variation::Inner).unwrap();
        let nh = ctx.nabla(ctx.h());
        let expect = ctx.h() * &nh + &nh * ctx.h();
        assert!(residual(&v, &expect) < 1e-12);
    }

    #[test]
    fn square_expansion_terminates() {
        let ctx = MatrixContext::random(5, 5, 0);
        let b = ctx.random_hermitian(&mut rng(9));
        let rep = taylor_check(&ctx, &BaseFunction::monomial(2), &b, 1, &taylor_grid()).unwrap();
        let bb = (&b * &b).norm();
        for (t, r) in rep.ts.iter().zip(&rep.remainders) {
            assert!(
                (r - t * t * bb).abs() <= 1e-9 * t * t * bb.max(1.0) + 1e-13,
                "{t} {r}"
            );
        }
        assert!((rep.slope - 2.0).abs() < 1e-3);
    }

    #[test]
    fn trace_vanishes_on_derivatives() {
        let ctx = MatrixContext::random(6, 5, 2);
        let (a, b) = (&ctx.rho()[0], &ctx.rho()[1]);
        assert!(ctx.trace(&ctx.nabla(a)).norm() <= 1e-14);
        assert!((ctx.trace(&(a * b)) - ctx.trace(&(b * a))).norm() <= 1e-14);
    }
}
