//! Shared fixtures for benchmarks.

use rearrange_core::expr::{rat, BaseFunction};
use rearrange_core::{MatrixContext, SpectralFn};

/// `exp(c₀x₀)⋯exp(c_k x_k)` with distinct rates.
pub fn separable_exp(slots: usize) -> SpectralFn {
    let rates = (0..slots).map(|k| rat(if k % 2 == 0 { 1 } else { -1 }, k as i64 + 1));
    SpectralFn::from_base(
        BaseFunction::separable(rates.map(BaseFunction::exp).collect()).expect("nonempty"),
    )
}

/// Random context of dimension `d` with `k` matrix arguments, seed 1.
pub fn context(d: usize, k: usize) -> MatrixContext {
    MatrixContext::random(1, d, k)
}
