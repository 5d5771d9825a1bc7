//! Truncated twisted power series `(F(ℕ, R), Σ)[[X]]` with `a·Xⁿ = Xⁿ·Σⁿ(a)`,
//! the operators `Σ̂` and `Θ̂⁽ˡ⁾`, and the universal Hopf and Taylor morphisms.
//!
//! Series are kept in the normal form `Σ Xⁱ aᵢ` and truncated at X-degree `D`.
//! `X^{D+1}` generates a two-sided ideal, so products are exact modulo it.
//! `Θ̂⁽ˡ⁾` moves coefficients down and so only the first `D − l` coefficients of
//! its result are meaningful; every series carries that trusted degree.

use std::fmt;

use thiserror::Error;

use crate::algebra::{CoeffVar, Ring};
use crate::funcfield::{orbit_closed_form, theta_table, QSDStructure, RatFn};
use crate::qscalar::{q_binom, q_pow, Frac, Rat};
use crate::seqring::{Seq, SeqError};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TwistedError {
    #[error("mismatched truncation: X-degree {0} vs {1}")]
    Truncation(u32, u32),
    #[error("leading coefficient is not invertible")]
    NotInvertible,
    #[error("left inverse is not a right inverse at X-degree {0}")]
    OneSided(u32),
    #[error("carrier does not support the derivation {0}")]
    Derivation(CoeffVar),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Twisted (`q`-commutation) or classical (`Σ = id`, `q = 1`) series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Twisted,
    Classical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSeries<R> {
    coeffs: Vec<Seq<R>>,
    trusted: u32,
    kind: SeriesKind,
}

impl<R: Ring> TwistedSeries<R> {
    /// Builds `Σ_{i ≤ D} Xⁱ aᵢ`; missing coefficients are zero.
    pub fn new(xdeg: u32, coeffs: Vec<Seq<R>>, unit: &R) -> Self {
        Self::with_kind(xdeg, coeffs, unit, SeriesKind::Twisted)
    }

    pub fn with_kind(xdeg: u32, mut coeffs: Vec<Seq<R>>, unit: &R, kind: SeriesKind) -> Self {
        coeffs.truncate(xdeg as usize + 1);
        while coeffs.len() <= xdeg as usize {
            coeffs.push(Seq::Closed(unit.zero_like()));
        }
        TwistedSeries {
            coeffs,
            trusted: xdeg,
            kind,
        }
    }

    /// Closed-form coefficients.
    pub fn from_closed(xdeg: u32, coeffs: Vec<R>, unit: &R) -> Self {
        Self::new(xdeg, coeffs.into_iter().map(Seq::Closed).collect(), unit)
    }

    /// The constant series `r` (a constant sequence at X-degree 0).
    pub fn constant(xdeg: u32, r: R) -> Self {
        let unit = r.one_like();
        Self::from_closed(xdeg, vec![r], &unit)
    }

    /// `c·Xᵏ` with `c` a (closed-form) coefficient.
    pub fn monomial(xdeg: u32, k: u32, c: R) -> Self {
        let unit = c.one_like();
        let mut v = vec![unit.zero_like(); k as usize];
        v.push(c);
        Self::from_closed(xdeg, v, &unit)
    }

    /// `X`.
    pub fn x(xdeg: u32, unit: &R) -> Self {
        Self::monomial(xdeg, 1, unit.clone())
    }

    pub fn as_classical(mut self) -> Self {
        self.kind = SeriesKind::Classical;
        self
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn xdeg(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    /// Coefficients of degree `≤ trusted` are exact.
    pub fn trusted(&self) -> u32 {
        self.trusted
    }

    pub fn with_trusted(mut self, t: u32) -> Self {
        self.trusted = self.trusted.min(t);
        self
    }

    pub fn coeff(&self, i: u32) -> &Seq<R> {
        &self.coeffs[i as usize]
    }

    pub fn coeffs(&self) -> &[Seq<R>] {
        &self.coeffs
    }

    /// Closed-form coefficient; panics on tabulated coefficients.
    pub fn closed_coeff(&self, i: u32) -> &R {
        self.coeffs[i as usize]
            .closed()
            .expect("closed-form coefficient")
    }

    fn unit(&self) -> R {
        for c in &self.coeffs {
            match c {
                Seq::Closed(r) => return r.one_like(),
                Seq::Tabulated(v) if !v.is_empty() => return v[0].one_like(),
                _ => {}
            }
        }
        panic!("series without a value to take a unit from")
    }

    fn same_shape(&self, o: &Self) -> Result<(), TwistedError> {
        if self.xdeg() != o.xdeg() {
            return Err(TwistedError::Truncation(self.xdeg(), o.xdeg()));
        }
        Ok(())
    }

    fn zip(&self, o: &Self, f: impl Fn(&Seq<R>, &Seq<R>) -> Seq<R>) -> Result<Self, TwistedError> {
        self.same_shape(o)?;
        Ok(TwistedSeries {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f(a, b)).collect(),
            trusted: self.trusted.min(o.trusted),
            kind: self.kind,
        })
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, TwistedError> {
        self.zip(o, Seq::add)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, TwistedError> {
        self.zip(o, Seq::sub)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("series truncation")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.try_sub(o).expect("series truncation")
    }

    pub fn neg(&self) -> Self {
        self.map_seqs(|a| a.neg())
    }

    /// Multiplication by a central scalar (may involve index symbols).
    pub fn scale(&self, c: &Frac) -> Self {
        self.map_seqs(|a| a.scale(c))
    }

    /// Left multiplication of every coefficient by a constant `r`
    /// (`r·Σ Xⁱaᵢ = Σ Xⁱ r aᵢ` since constants are fixed by `Σ`).
    pub fn left_mul_const(&self, r: &R) -> Self {
        self.map_seqs(|a| a.map_values(|v| r.times(v)))
    }

    /// Right multiplication of every coefficient by `r`.
    pub fn right_mul(&self, r: &R) -> Self {
        self.map_seqs(|a| a.map_values(|v| v.times(r)))
    }

    fn map_seqs(&self, f: impl Fn(&Seq<R>) -> Seq<R>) -> Self {
        TwistedSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
            trusted: self.trusted,
            kind: self.kind,
        }
    }

    /// Applies `f` to every sequence value (coefficientwise operators).
    pub fn map_values(&self, f: impl Fn(&R) -> R) -> Self {
        self.map_seqs(|a| a.map_values(&f))
    }

    fn shift_seq(&self, a: &Seq<R>, k: u32) -> Seq<R> {
        match self.kind {
            SeriesKind::Twisted => a.shift(k),
            SeriesKind::Classical => a.clone(),
        }
    }

    /// `(Xⁱa)(Xʲb) = X^{i+j} Σʲ(a) b`, truncated at `D`.
    pub fn try_mul(&self, o: &Self) -> Result<Self, TwistedError> {
        self.same_shape(o)?;
        let d = self.xdeg() as usize;
        let unit = self.unit();
        let mut out: Vec<Seq<R>> = (0..=d).map(|_| Seq::Closed(unit.zero_like())).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j > d {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                let term = self.shift_seq(a, j as u32).mul(b);
                out[i + j] = out[i + j].add(&term);
            }
        }
        Ok(TwistedSeries {
            coeffs: out,
            trusted: self.trusted.min(o.trusted),
            kind: self.kind,
        })
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("series truncation")
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.xdeg(), self.unit()).with_kind_of(self);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    fn with_kind_of(mut self, o: &Self) -> Self {
        self.kind = o.kind;
        self
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// `Σ̂(Σ Xⁱaᵢ) = Σ Xⁱ qⁱ Σ(aᵢ)`; the identity for classical series.
    pub fn hat_sigma(&self) -> Self {
        match self.kind {
            SeriesKind::Classical => self.clone(),
            SeriesKind::Twisted => TwistedSeries {
                coeffs: self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a.shift(1).scale(&q_pow(i as i64)))
                    .collect(),
                trusted: self.trusted,
                kind: self.kind,
            },
        }
    }

    /// `Θ̂⁽ˡ⁾(Σ Xⁱaᵢ) = Σ Xⁱ binom(i+l, l)_q a_{i+l}`; ordinary binomials for
    /// classical series. The trusted degree drops by `l`.
    pub fn hat_theta(&self, l: u32) -> Self {
        let d = self.xdeg();
        let unit = self.unit();
        let coeffs = (0..=d)
            .map(|i| {
                if i + l > d {
                    return Seq::Closed(unit.zero_like());
                }
                let b = match self.kind {
                    SeriesKind::Twisted => q_binom(i + l, l),
                    SeriesKind::Classical => Frac::rat(binomial(i + l, l)),
                };
                self.coeffs[(i + l) as usize].scale(&b)
            })
            .collect();
        TwistedSeries {
            coeffs,
            trusted: self.trusted.saturating_sub(l),
            kind: self.kind,
        }
    }

    /// Two-sided inverse at truncation. The left inverse is computed by
    /// degree recursion and then checked to be a right inverse.
    pub fn try_invert(&self) -> Result<Self, TwistedError> {
        let d = self.xdeg() as usize;
        let a0_inv = self.coeffs[0].try_inverse().ok_or(TwistedError::NotInvertible)?;
        let unit = self.unit();
        let mut b: Vec<Seq<R>> = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut acc = if k == 0 {
                Seq::Closed(unit.clone())
            } else {
                Seq::Closed(unit.zero_like())
            };
            for (j, bj) in b.iter().enumerate() {
                let ak = &self.coeffs[k - j];
                if ak.is_zero() || bj.is_zero() {
                    continue;
                }
                acc = acc.sub(&self.shift_seq(bj, (k - j) as u32).mul(ak));
            }
            b.push(acc.mul(&a0_inv));
        }
        let inv = TwistedSeries {
            coeffs: b,
            trusted: self.trusted,
            kind: self.kind,
        };
        let one = Self::constant(self.xdeg(), unit).with_kind_of(self);
        let right = self.mul(&inv);
        for i in 0..=self.trusted {
            let same = right.coeffs[i as usize].first_mismatch(&one.coeffs[i as usize], u32::MAX);
            if !matches!(same, Ok(None)) {
                return Err(TwistedError::OneSided(i));
            }
        }
        Ok(inv)
    }

    pub fn invert(&self) -> Self {
        self.try_invert().expect("series inverse")
    }

    /// A derivation applied to every sequence value; it commutes with `X`.
    pub fn coeff_derive(&self, v: CoeffVar) -> Result<Self, TwistedError> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            let d = match a {
                Seq::Closed(r) => Seq::Closed(r.derive_var(v).ok_or(TwistedError::Derivation(v))?),
                Seq::Tabulated(vals) => Seq::Tabulated(
                    vals.iter()
                        .map(|r| r.derive_var(v).ok_or(TwistedError::Derivation(v)))
                        .collect::<Result<_, _>>()?,
                ),
            };
            coeffs.push(d);
        }
        Ok(TwistedSeries {
            coeffs,
            trusted: self.trusted,
            kind: self.kind,
        })
    }

    /// First coefficient index (and sequence index, for pointwise mismatches)
    /// at which the series differ, comparing degrees `≤ deg` and indices `≤ h`.
    pub fn first_difference(
        &self,
        o: &Self,
        deg: u32,
        h: u32,
    ) -> Result<Option<(u32, u32)>, TwistedError> {
        self.same_shape(o)?;
        for i in 0..=deg.min(self.xdeg()) {
            if let Some(n) = self.coeffs[i as usize].first_mismatch(&o.coeffs[i as usize], h)? {
                return Ok(Some((i, n)));
            }
        }
        Ok(None)
    }

    /// Equality of all coefficients both sides trust.
    pub fn eq_trusted(&self, o: &Self, h: u32) -> bool {
        let deg = self.trusted.min(o.trusted);
        matches!(self.first_difference(o, deg, h), Ok(None))
    }

    /// Witness text for the first difference in trusted degrees, if any.
    pub fn diff_witness(&self, o: &Self, h: u32) -> Option<String> {
        let deg = self.trusted.min(o.trusted);
        match self.first_difference(o, deg, h) {
            Ok(None) => None,
            Ok(Some((i, n))) => Some(format!(
                "X^{i} coefficient differs (index {n}): {} vs {}",
                self.coeffs[i as usize], o.coeffs[i as usize]
            )),
            Err(e) => Some(e.to_string()),
        }
    }

    pub fn is_zero_trusted(&self) -> bool {
        (0..=self.trusted).all(|i| self.coeffs[i as usize].is_zero())
    }
}

impl<R: Ring> fmt::Display for TwistedSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({a})")?,
                1 => write!(f, "X·({a})")?,
                _ => write!(f, "X^{i}·({a})")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(X^{})", self.xdeg() + 1)
    }
}

fn binomial(n: u32, k: u32) -> Rat {
    let mut acc = Rat::from_integer(1.into());
    for i in 0..k {
        acc = acc * Rat::from_integer((n - i).into()) / Rat::from_integer((i + 1).into());
    }
    acc
}

/// `ts_mul` with the truncation check.
pub fn ts_mul<R: Ring>(
    x: &TwistedSeries<R>,
    y: &TwistedSeries<R>,
) -> Result<TwistedSeries<R>, TwistedError> {
    x.try_mul(y)
}

pub fn hat_sigma<R: Ring>(x: &TwistedSeries<R>) -> TwistedSeries<R> {
    x.hat_sigma()
}

pub fn hat_theta<R: Ring>(l: u32, x: &TwistedSeries<R>) -> TwistedSeries<R> {
    x.hat_theta(l)
}

pub fn ts_invert<R: Ring>(x: &TwistedSeries<R>) -> Result<TwistedSeries<R>, TwistedError> {
    x.try_invert()
}

pub fn coeff_derive<R: Ring>(
    x: &TwistedSeries<R>,
    v: CoeffVar,
) -> Result<TwistedSeries<R>, TwistedError> {
    x.coeff_derive(v)
}

/// The universal Hopf morphism `ι(a) = Σ_{i ≤ D} Xⁱ u[θ⁽ⁱ⁾(a)]` in closed form.
pub fn universal_hopf(a: &RatFn, st: &QSDStructure, xdeg: u32) -> TwistedSeries<RatFn> {
    let thetas = theta_table(st, xdeg, a);
    let coeffs = thetas.iter().map(|b| orbit_closed_form(st, b)).collect();
    TwistedSeries::from_closed(xdeg, coeffs, &Frac::one())
}

/// The universal Taylor morphism `ι(a) = Σ_{n ≤ D} δⁿ(a) Xⁿ / n!` for a
/// derivation `δ`, as a classical series.
pub fn universal_taylor(a: &RatFn, delta: &dyn Fn(&RatFn) -> RatFn, xdeg: u32) -> TwistedSeries<RatFn> {
    let mut coeffs = Vec::new();
    let mut cur = a.clone();
    let mut fact = Rat::from_integer(1.into());
    for n in 0..=xdeg {
        if n > 0 {
            cur = delta(&cur);
            fact *= Rat::from_integer(n.into());
        }
        coeffs.push(cur.scale_rat(&fact.recip()));
    }
    TwistedSeries::from_closed(xdeg, coeffs, &Frac::one()).as_classical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcfield::{t, ExampleId};
    use crate::qscalar::Var;

    fn qq() -> Frac {
        Frac::var(Var::Q)
    }
    fn seq_q() -> Frac {
        Frac::var(Var::SeqQ)
    }

    #[test]
    fn quantum_plane_relation() {
        let one = Frac::one();
        let x = TwistedSeries::x(6, &one);
        let q = TwistedSeries::constant(6, seq_q());
        assert_eq!(q.mul(&x), x.mul(&q).scale(&qq()));
    }

    #[test]
    fn sigma_theta_on_generators() {
        let one = Frac::one();
        let x = TwistedSeries::x(6, &one);
        let q = TwistedSeries::constant(6, seq_q());
        assert_eq!(x.hat_sigma(), x.scale(&qq()));
        assert_eq!(q.hat_sigma(), q.scale(&qq()));
        assert!(x.hat_theta(1).eq_trusted(&TwistedSeries::constant(6, one.clone()), 12));
        assert!(x.hat_theta(2).is_zero_trusted());
        assert!(q.hat_theta(1).is_zero_trusted());
    }

    #[test]
    fn inverses() {
        let one = Frac::one();
        let qinv = TwistedSeries::constant(5, seq_q()).invert();
        assert_eq!(qinv.closed_coeff(0), &seq_q().inv().unwrap());
        let g = TwistedSeries::constant(5, one.clone()).add(&TwistedSeries::x(5, &one)).invert();
        for i in 0..=5u32 {
            assert_eq!(g.closed_coeff(i), &Frac::int(if i % 2 == 0 { 1 } else { -1 }));
        }
        let st = QSDStructure::new(ExampleId::CT);
        let it = universal_hopf(&t(), &st, 5).invert();
        assert_eq!(it.closed_coeff(0), &(&t() * &seq_q()).inv().unwrap());
    }

    #[test]
    fn iota_t_and_derivative() {
        let st = QSDStructure::new(ExampleId::CT);
        let it = universal_hopf(&t(), &st, 6);
        let expect = TwistedSeries::constant(6, &t() * &seq_q()).add(&TwistedSeries::x(6, &Frac::one()));
        assert_eq!(it, expect);
        let d = it.coeff_derive(CoeffVar::T).unwrap();
        assert_eq!(d, TwistedSeries::constant(6, seq_q()));
    }

    #[test]
    fn mismatched_truncation() {
        let one = Frac::one();
        let a = TwistedSeries::x(3, &one);
        let b = TwistedSeries::x(4, &one);
        assert!(matches!(ts_mul(&a, &b), Err(TwistedError::Truncation(3, 4))));
    }

    #[test]
    fn taylor_exp() {
        let y = Frac::var(Var::Y);
        let s = universal_taylor(&y, &|f| {
            // δ(y) = y, extended as y ∂/∂y
            &Frac::var(Var::Y) * &f.derive(Var::Y)
        }, 5);
        let mut fact = 1i64;
        for n in 0..=5u32 {
            if n > 0 {
                fact *= n as i64;
            }
            assert_eq!(s.closed_coeff(n), &(&y / &Frac::int(fact)));
        }
    }
}
