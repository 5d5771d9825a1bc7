//! Reduced fractions of polynomials: the exact field `ℚ(q, s, λ, t, y, Q, Qα, N)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gcd::gcd;
use super::poly::{IPoly, MPoly, Mono, Var};
use super::Rat;

/// Errors raised by scalar arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes at the sample point")]
    VanishingDenominator,
}

/// A reduced fraction `num/den` with monic `den`.
///
/// Equality is structural: two fractions are equal iff they are equal as
/// rational functions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frac {
    num: MPoly,
    den: MPoly,
}

fn gcd_rat(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_monomial() || b.is_monomial() {
        // Monomial gcds need no polynomial arithmetic.
        let ma = a.mono_content();
        let mb = b.mono_content();
        return MPoly::monomial(ma.gcd(&mb), Rat::one());
    }
    gcd(&a.to_primitive_int(), &b.to_primitive_int()).to_rat()
}

impl Frac {
    pub fn zero() -> Self {
        Frac {
            num: MPoly::zero(),
            den: MPoly::one(),
        }
    }

    pub fn one() -> Self {
        Frac {
            num: MPoly::one(),
            den: MPoly::one(),
        }
    }

    pub fn int(k: i64) -> Self {
        Self::from_poly(MPoly::from_int(k))
    }

    pub fn rat(r: Rat) -> Self {
        Self::from_poly(MPoly::constant(r))
    }

    pub fn ratio(a: i64, b: i64) -> Self {
        Self::rat(Rat::new(BigInt::from(a), BigInt::from(b)))
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(MPoly::var(v))
    }

    /// `v^e` for an integer exponent (negative exponents give fractions).
    pub fn var_pow(v: Var, e: i64) -> Self {
        let m = MPoly::monomial(Mono::var(v, e.unsigned_abs() as u16), Rat::one());
        if e >= 0 {
            Self::from_poly(m)
        } else {
            Frac {
                num: MPoly::one(),
                den: m,
            }
        }
    }

    pub fn from_poly(p: MPoly) -> Self {
        Frac {
            num: p,
            den: MPoly::one(),
        }
    }

    /// Builds and reduces `num/den`.
    pub fn new(num: MPoly, den: MPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: MPoly, den: MPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_constant() {
            let c = den.lc();
            return Frac {
                num: num.scale(&c.recip()),
                den: MPoly::one(),
            };
        }
        let g = gcd_rat(&num, &den);
        let (n, d) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        Self::normalize(n, d)
    }

    /// Makes `den` monic; assumes `num/den` already coprime.
    fn normalize(num: MPoly, den: MPoly) -> Self {
        let lc = den.lc();
        if lc.is_one() {
            Frac { num, den }
        } else {
            let inv = lc.recip();
            Frac {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    /// Wraps an already coprime pair, only normalizing the leading coefficient.
    pub(crate) fn from_coprime(num: MPoly, den: MPoly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        Self::normalize(num, den)
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn var_mask(&self) -> u16 {
        self.num.var_mask() | self.den.var_mask()
    }

    pub fn involves(&self, v: Var) -> bool {
        self.var_mask() & (1 << v.index()) != 0
    }

    /// True if only `q, s, λ` occur (an element of `K`).
    pub fn is_scalar(&self) -> bool {
        Var::ALL
            .iter()
            .filter(|v| !v.is_scalar())
            .all(|v| !self.involves(*v))
    }

    /// True if no sequence index symbol occurs.
    pub fn is_index_free(&self) -> bool {
        !(self.involves(Var::SeqQ) || self.involves(Var::SeqS) || self.involves(Var::SeqN))
    }

    pub fn neg(&self) -> Self {
        Frac {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.add_sub(o, false)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add_sub(o, true)
    }

    fn add_sub(&self, o: &Self, minus: bool) -> Self {
        let comb = |a: &MPoly, b: &MPoly| if minus { a.sub(b) } else { a.add(b) };
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if minus { o.neg() } else { o.clone() };
        }
        if self.den == o.den {
            let n = comb(&self.num, &o.num);
            if self.den.is_one() {
                return Self::from_poly(n);
            }
            return Self::reduce(n, self.den.clone());
        }
        if self.den.is_one() {
            let n = comb(&self.num.mul(&o.den), &o.num);
            return Self::from_coprime(n, o.den.clone());
        }
        if o.den.is_one() {
            let n = comb(&self.num, &o.num.mul(&self.den));
            return Self::from_coprime(n, self.den.clone());
        }
        let g = gcd_rat(&self.den, &o.den);
        if g.is_constant() {
            let n = comb(&self.num.mul(&o.den), &o.num.mul(&self.den));
            return Self::from_coprime(n, self.den.mul(&o.den));
        }
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = o.den.div_exact(&g).unwrap();
        let n = comb(&self.num.mul(&d1), &o.num.mul(&b1));
        if n.is_zero() {
            return Self::zero();
        }
        let g2 = gcd_rat(&n, &g);
        let den = b1.mul(&o.den);
        if g2.is_constant() {
            Self::from_coprime(n, den)
        } else {
            Self::from_coprime(n.div_exact(&g2).unwrap(), den.div_exact(&g2).unwrap())
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Self::from_poly(self.num.mul(&o.num));
        }
        let g1 = gcd_rat(&self.num, &o.den);
        let g2 = gcd_rat(&o.num, &self.den);
        let (a, d) = if g1.is_constant() {
            (self.num.clone(), o.den.clone())
        } else {
            (self.num.div_exact(&g1).unwrap(), o.den.div_exact(&g1).unwrap())
        };
        let (c, b) = if g2.is_constant() {
            (o.num.clone(), self.den.clone())
        } else {
            (o.num.div_exact(&g2).unwrap(), self.den.div_exact(&g2).unwrap())
        };
        Self::from_coprime(a.mul(&c), b.mul(&d))
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Frac {
            num: self.num.scale(r),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        let k = e.unsigned_abs() as u32;
        Frac {
            num: base.num.pow(k),
            den: base.den.pow(k),
        }
    }

    /// Partial derivative with respect to a generator.
    pub fn derive(&self, v: Var) -> Self {
        if !self.involves(v) {
            return Self::zero();
        }
        if self.den.is_one() {
            return Self::from_poly(self.num.derive(v));
        }
        if !self.den.involves(v) {
            return Frac {
                num: self.num.derive(v),
                den: self.den.clone(),
            };
        }
        let n = self.num.derive(v).mul(&self.den).sub(&self.num.mul(&self.den.derive(v)));
        Self::reduce(n, self.den.mul(&self.den))
    }

    /// Applies a monomial map `m ↦ k·m'` that extends to an automorphism of the
    /// Laurent polynomial ring (such as `t ↦ q·t`). Common factors created by the
    /// map are monomials, so only the monomial gcd is cancelled.
    pub fn map_monomials(&self, f: &dyn Fn(&Mono) -> (Rat, Mono)) -> Self {
        let apply = |p: &MPoly| {
            p.map_terms(|m, c| {
                let (k, m2) = f(m);
                (m2, c * k)
            })
        };
        let n = apply(&self.num);
        let d = apply(&self.den);
        let g = n.mono_content().gcd(&d.mono_content());
        Self::from_coprime(n.div_mono(&g), d.div_mono(&g))
    }

    /// Substitutes `v ↦ p` where the substitution is a polynomial ring automorphism
    /// (such as `y ↦ y + λ`), so the fraction stays reduced.
    pub fn subst_auto(&self, v: Var, p: &MPoly) -> Self {
        if !self.involves(v) {
            return self.clone();
        }
        Self::from_coprime(self.num.subst(v, p), self.den.subst(v, p))
    }

    /// General substitution of generators by fractions; reduces the result.
    pub fn subst(&self, v: Var, by: &Frac) -> Self {
        if !self.involves(v) {
            return self.clone();
        }
        let n = subst_poly(&self.num, v, by);
        let d = subst_poly(&self.den, v, by);
        n.div(&d).expect("substitution made the denominator vanish")
    }

    /// Substitutes rational numbers for the listed generators.
    pub fn eval_at(&self, vals: &[(Var, Rat)]) -> Result<Self, ScalarError> {
        let ev = |p: &MPoly| {
            p.map_terms(|m, c| {
                let mut m2 = *m;
                let mut k = c.clone();
                for (v, r) in vals {
                    let e = m.exp(*v);
                    if e > 0 {
                        k *= num_traits::pow::pow(r.clone(), e as usize);
                        m2 = m2.with(*v, 0);
                    }
                }
                (m2, k)
            })
        };
        let d = ev(&self.den);
        if d.is_zero() {
            return Err(ScalarError::VanishingDenominator);
        }
        Ok(Self::reduce(ev(&self.num), d))
    }

    /// `Σᵏ` on closed-form sequences: `Q ↦ qᵏQ`, `Qα ↦ sᵏQα`, `N ↦ N + k`.
    pub fn shift_index(&self, k: u32) -> Self {
        if k == 0 || self.is_index_free() {
            return self.clone();
        }
        let k16 = k as u16;
        let mut out = if self.involves(Var::SeqQ) || self.involves(Var::SeqS) {
            self.map_monomials(&|m: &Mono| {
                let eq = m.exp(Var::SeqQ);
                let es = m.exp(Var::SeqS);
                let m2 = m
                    .with(Var::Q, m.exp(Var::Q) + eq * k16)
                    .with(Var::S, m.exp(Var::S) + es * k16);
                (Rat::one(), m2)
            })
        } else {
            self.clone()
        };
        if out.involves(Var::SeqN) {
            let p = MPoly::var(Var::SeqN).add(&MPoly::from_int(k as i64));
            out = out.subst_auto(Var::SeqN, &p);
        }
        out
    }

    /// The value of a closed-form sequence at index `n`.
    pub fn eval_index(&self, n: u32) -> Result<Self, ScalarError> {
        if self.is_index_free() {
            return Ok(self.clone());
        }
        let n16 = n as u16;
        let nn = Rat::from_integer(n.into());
        let ev = |p: &MPoly| {
            p.map_terms(|m, c| {
                let eq = m.exp(Var::SeqQ);
                let es = m.exp(Var::SeqS);
                let en = m.exp(Var::SeqN);
                let m2 = m
                    .with(Var::Q, m.exp(Var::Q) + eq * n16)
                    .with(Var::S, m.exp(Var::S) + es * n16)
                    .with(Var::SeqQ, 0)
                    .with(Var::SeqS, 0)
                    .with(Var::SeqN, 0);
                (m2, c * num_traits::pow::pow(nn.clone(), en as usize))
            })
        };
        let d = ev(&self.den);
        if d.is_zero() {
            return Err(ScalarError::VanishingDenominator);
        }
        Ok(Self::reduce(ev(&self.num), d))
    }

    /// Total size in terms, used as a cost heuristic.
    pub fn size(&self) -> usize {
        self.num.len() + self.den.len()
    }
}

fn subst_poly(p: &MPoly, v: Var, by: &Frac) -> Frac {
    let cs = p.coeffs_in(v);
    let mut acc = Frac::zero();
    for c in cs.iter().rev() {
        acc = acc.mul(by).add(&Frac::from_poly(c.clone()));
    }
    acc
}

impl Default for Frac {
    fn default() -> Self {
        Frac::zero()
    }
}

impl From<i64> for Frac {
    fn from(k: i64) -> Self {
        Frac::int(k)
    }
}

impl From<Rat> for Frac {
    fn from(r: Rat) -> Self {
        Frac::rat(r)
    }
}

impl From<IPoly> for Frac {
    fn from(p: IPoly) -> Self {
        Frac::from_poly(p.to_rat())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Frac> for &Frac {
            type Output = Frac;
            fn $m(self, o: &Frac) -> Frac {
                $body(self, o)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Frac, b: &Frac| Frac::add(a, b));
forward_binop!(Sub, sub, |a: &Frac, b: &Frac| Frac::sub(a, b));
forward_binop!(Mul, mul, |a: &Frac, b: &Frac| Frac::mul(a, b));
forward_binop!(Div, div, |a: &Frac, b: &Frac| Frac::div(a, b).expect("division by zero"));

impl Neg for &Frac {
    type Output = Frac;
    fn neg(self) -> Frac {
        Frac::neg(self)
    }
}

fn needs_parens(p: &MPoly) -> bool {
    p.len() > 1 || p.lc().is_negative() && p.len() > 1
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if needs_parens(&self.num) {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        if needs_parens(&self.den) {
            write!(f, "/({})", self.den)
        } else {
            write!(f, "/{}", self.den)
        }
    }
}

impl fmt::Debug for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Convenience: the integer `k` as a rational.
pub fn rat(k: i64) -> Rat {
    BigRational::from_integer(BigInt::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Frac {
        Frac::var(Var::Q)
    }
    fn s() -> Frac {
        Frac::var(Var::S)
    }

    #[test]
    fn cancel_and_reduce() {
        let one = Frac::one();
        assert_eq!(&(&q() - &one) + &one, q());
        let x = &(&s() - &one) / &(&q() - &one);
        assert_eq!(&x * &(&q() - &one), &s() - &one);
        let y = &(&(&q() * &q()) - &one) / &(&q() - &one);
        assert_eq!(y, &q() + &one);
    }

    #[test]
    fn den_is_monic() {
        let x = &Frac::one() / &(&Frac::int(2) * &q());
        assert!(x.den().lc().is_one());
        assert_eq!(x.num().lc(), Rat::new(1.into(), 2.into()));
    }

    #[test]
    fn zero_division_is_error() {
        assert_eq!(q().div(&Frac::zero()), Err(ScalarError::DivisionByZero));
    }
}
