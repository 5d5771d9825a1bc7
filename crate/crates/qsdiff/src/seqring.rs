//! The sequence ring `F(ℕ, R)` with the shift `(Σf)(n) = f(n + 1)`.
//!
//! Distinguished sequences are kept in closed form: a value of the carrier in
//! which the index symbols `Q = qⁿ`, `Qα = sⁿ` and `N = n` may occur. Such a
//! closed form determines the sequence exactly and the shift acts on it
//! symbolically. Sequences without a closed form are tabulated up to a horizon.

use std::fmt;

use thiserror::Error;

use crate::algebra::Ring;
use crate::funcfield::{orbit_closed_form, QSDStructure, RatFn};
use crate::qscalar::{Frac, ScalarError, Var};

/// Default evaluation horizon.
pub const DEFAULT_HORIZON: u32 = 12;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SeqError {
    #[error("index {n} beyond horizon {horizon}")]
    HorizonExceeded { n: u32, horizon: u32 },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// An element of `F(ℕ, R)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Seq<R> {
    /// Closed form in the index symbols.
    Closed(R),
    /// Values at `0, …, len − 1`.
    Tabulated(Vec<R>),
}

impl<R: Ring> Seq<R> {
    /// The constant sequence `n ↦ r`.
    pub fn constant(r: R) -> Self {
        assert!(r.is_index_free(), "constant sequence built from an index-dependent value");
        Seq::Closed(r)
    }

    /// `n ↦ q^{mn} s^{kn}·1_R`.
    pub fn geom_pow(m: i64, k: i64, one: &R) -> Self {
        let c = &Frac::var_pow(Var::SeqQ, m) * &Frac::var_pow(Var::SeqS, k);
        Seq::Closed(one.embed(&c))
    }

    /// `n ↦ n·1_R`.
    pub fn linear_n(one: &R) -> Self {
        Seq::Closed(one.embed(&Frac::var(Var::SeqN)))
    }

    pub fn tabulated(values: Vec<R>) -> Self {
        Seq::Tabulated(values)
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Seq::Closed(_))
    }

    pub fn closed(&self) -> Option<&R> {
        match self {
            Seq::Closed(r) => Some(r),
            Seq::Tabulated(_) => None,
        }
    }

    /// Value at `n`; `n` must not exceed `horizon` nor the tabulated range.
    pub fn eval(&self, n: u32, horizon: u32) -> Result<R, SeqError> {
        if n > horizon {
            return Err(SeqError::HorizonExceeded { n, horizon });
        }
        match self {
            Seq::Closed(r) => Ok(r.eval_index(n)?),
            Seq::Tabulated(v) => v.get(n as usize).cloned().ok_or(SeqError::HorizonExceeded {
                n,
                horizon: v.len().saturating_sub(1) as u32,
            }),
        }
    }

    /// Pointwise table of values `0..=h`.
    pub fn tabulate(&self, h: u32) -> Result<Vec<R>, SeqError> {
        (0..=h).map(|n| self.eval(n, h)).collect()
    }

    fn zip(&self, o: &Self, f: impl Fn(&R, &R) -> R) -> Self {
        match (self, o) {
            (Seq::Closed(a), Seq::Closed(b)) => Seq::Closed(f(a, b)),
            _ => {
                let len = self.table_len().min(o.table_len());
                if len == 0 {
                    return Seq::Tabulated(Vec::new());
                }
                let h = (len - 1) as u32;
                let a = self.tabulate(h).expect("tabulation within range");
                let b = o.tabulate(h).expect("tabulation within range");
                Seq::Tabulated(a.iter().zip(&b).map(|(x, y)| f(x, y)).collect())
            }
        }
    }

    fn table_len(&self) -> usize {
        match self {
            Seq::Closed(_) => usize::MAX,
            Seq::Tabulated(v) => v.len(),
        }
    }

    fn map(&self, f: impl Fn(&R) -> R) -> Self {
        match self {
            Seq::Closed(a) => Seq::Closed(f(a)),
            Seq::Tabulated(v) => Seq::Tabulated(v.iter().map(f).collect()),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.plus(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.minus(b))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.times(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.negate())
    }

    /// Multiplication by a central scalar (which may itself be a closed form).
    pub fn scale(&self, c: &Frac) -> Self {
        match self {
            Seq::Closed(a) => Seq::Closed(a.scale(c)),
            Seq::Tabulated(v) => Seq::Tabulated(
                v.iter()
                    .enumerate()
                    .map(|(n, a)| a.scale(&c.eval_index(n as u32).expect("scalar defined on range")))
                    .collect(),
            ),
        }
    }

    /// Applies `f` to every value. For closed forms `f` must commute with
    /// evaluation at each index (a derivation or endomorphism acting on the
    /// base field and fixing the index symbols).
    pub fn map_values(&self, f: impl Fn(&R) -> R) -> Self {
        self.map(f)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Seq::Closed(a) => a.is_zero(),
            Seq::Tabulated(v) => v.iter().all(|a| a.is_zero()),
        }
    }

    /// `Σᵏ`. A tabulated sequence loses its last `k` entries.
    pub fn shift(&self, k: u32) -> Self {
        match self {
            Seq::Closed(a) => Seq::Closed(a.shift_index(k)),
            Seq::Tabulated(v) => Seq::Tabulated(v.iter().skip(k as usize).cloned().collect()),
        }
    }

    /// Pointwise inverse, when the value is invertible.
    pub fn try_inverse(&self) -> Option<Self> {
        match self {
            Seq::Closed(a) => a.try_inverse().map(Seq::Closed),
            Seq::Tabulated(v) => v
                .iter()
                .map(|a| a.try_inverse())
                .collect::<Option<Vec<_>>>()
                .map(Seq::Tabulated),
        }
    }

    /// The first index `n ≤ h` at which the sequences differ, if any.
    /// Tabulated sequences are compared on their common range only.
    pub fn first_mismatch(&self, o: &Self, h: u32) -> Result<Option<u32>, SeqError> {
        if let (Seq::Closed(a), Seq::Closed(b)) = (self, o) {
            if a == b {
                return Ok(None);
            }
        }
        let len = self.table_len().min(o.table_len());
        if len == 0 {
            return Ok(None);
        }
        let h = h.min((len - 1).min(u32::MAX as usize) as u32);
        for n in 0..=h {
            if self.eval(n, h)? != o.eval(n, h)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }
}

impl<R: Ring> fmt::Display for Seq<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seq::Closed(a) => write!(f, "{a}"),
            Seq::Tabulated(v) => {
                f.write_str("[")?;
                for (i, a) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// `Q = (qⁿ)`.
pub fn seq_q() -> Seq<RatFn> {
    Seq::geom_pow(1, 0, &Frac::one())
}

/// `Qα = (sⁿ)`.
pub fn seq_qalpha() -> Seq<RatFn> {
    Seq::geom_pow(0, 1, &Frac::one())
}

/// `N = (n)`.
pub fn seq_n() -> Seq<RatFn> {
    Seq::linear_n(&Frac::one())
}

/// `seq_eval`: value at `n ≤ horizon`.
pub fn seq_eval<R: Ring>(x: &Seq<R>, n: u32, horizon: u32) -> Result<R, SeqError> {
    x.eval(n, horizon)
}

/// `Σ`.
pub fn seq_shift<R: Ring>(x: &Seq<R>) -> Seq<R> {
    x.shift(1)
}

/// The universal Euler morphism `b ↦ u[b] = (σⁿ(b))ₙ`.
pub fn universal_euler(b: &RatFn, st: &QSDStructure) -> Seq<RatFn> {
    Seq::Closed(orbit_closed_form(st, b))
}

/// Horizon-bounded equality; values beyond a tabulated range count as unequal.
pub fn seq_eq_up_to<R: Ring>(x: &Seq<R>, y: &Seq<R>, h: u32) -> bool {
    matches!(x.first_mismatch(y, h), Ok(None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcfield::{sigma_apply, t, y, ExampleId};

    #[test]
    fn eval_examples() {
        let q = Frac::var(Var::Q);
        assert_eq!(seq_eval(&seq_q(), 3, 12).unwrap(), q.pow(3));
        assert_eq!(seq_eval(&seq_n(), 4, 12).unwrap(), Frac::int(4));
        let st = QSDStructure::new(ExampleId::CTTalpha);
        let u = universal_euler(&y(), &st);
        assert_eq!(seq_eval(&u, 2, 12).unwrap(), &Frac::var(Var::S).pow(2) * &y());
        assert!(matches!(seq_eval(&seq_n(), 13, 12), Err(SeqError::HorizonExceeded { .. })));
    }

    #[test]
    fn shift_examples() {
        let q = Frac::var(Var::Q);
        assert_eq!(seq_shift(&seq_q()), seq_q().scale(&q));
        assert_eq!(seq_shift(&seq_n()), seq_n().add(&Seq::constant(Frac::one())));
        let c = Seq::constant(&t() + &Frac::one());
        assert_eq!(seq_shift(&c), c);
    }

    #[test]
    fn horizon_equality() {
        assert!(seq_eq_up_to(&seq_q().mul(&seq_q()), &Seq::geom_pow(2, 0, &Frac::one()), 10));
        assert_eq!(seq_shift(&seq_n()).first_mismatch(&seq_n(), 3).unwrap(), Some(0));
        let st = QSDStructure::new(ExampleId::CT);
        assert!(seq_eq_up_to(&universal_euler(&t(), &st), &seq_q().scale(&t()), 12));
    }

    #[test]
    fn euler_is_difference_morphism() {
        for ex in ExampleId::ALL {
            let st = QSDStructure::new(ex);
            for b in crate::funcfield::default_samples(ex) {
                let lhs = seq_shift(&universal_euler(&b, &st));
                let rhs = universal_euler(&sigma_apply(&st, &b), &st);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn tabulated_matches_closed() {
        let st = QSDStructure::new(ExampleId::CTLogt);
        let u = universal_euler(&(&y() / &t()), &st);
        let tab = Seq::tabulated(u.tabulate(8).unwrap());
        assert!(seq_eq_up_to(&u, &tab, 8));
        assert!(seq_eq_up_to(&seq_shift(&u), &seq_shift(&tab), 7));
        let prod = u.mul(&tab);
        assert!(!prod.is_closed());
        assert!(seq_eq_up_to(&prod, &u.mul(&u), 8));
    }
}
