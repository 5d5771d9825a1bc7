//! The exact scalar tower: rationals, polynomials, the fraction field and
//! q-combinatorics.
//!
//! One fraction type [`Frac`] serves as the scalar field `K = ℚ(q, s, λ)`, as the
//! function field `K(t, y)` and as the value field for closed-form sequences
//! (through the index symbols `Q = qⁿ`, `Qα = sⁿ`, `N = n`).

mod frac;
mod gcd;
mod poly;
mod qcomb;

pub use frac::{rat, Frac, ScalarError};
pub use gcd::gcd as poly_gcd;
pub use poly::{Coeff, IPoly, MPoly, Mono, Poly, Var, NVARS};
pub use qcomb::{
    check_alpha_pascal, eval_numeric, q_binom, q_binom_alpha, q_factorial, q_int, q_int_alpha,
    q_pow,
};

/// Arbitrary-precision rational numbers.
pub type Rat = num_rational::BigRational;

/// An element of `K = ℚ(q, s, λ)`; shares the representation of [`Frac`].
pub type Scalar = Frac;

/// `scalar_arith` operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field arithmetic on scalars.
pub fn scalar_arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar, ScalarError> {
    Ok(match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b)?,
    })
}

/// `q` as a scalar.
pub fn q() -> Scalar {
    Frac::var(Var::Q)
}

/// `s = q^α` as a scalar.
pub fn s() -> Scalar {
    Frac::var(Var::S)
}

/// `λ = log q` as a scalar.
pub fn lam() -> Scalar {
    Frac::var(Var::Lam)
}
