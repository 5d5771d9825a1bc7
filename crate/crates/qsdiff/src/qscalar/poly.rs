//! Sparse multivariate polynomials over a fixed generator set.
//!
//! Terms are kept sorted in decreasing graded lexicographic order, so the
//! first term is the leading term and structural equality is polynomial
//! equality.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

/// Number of generators carried by every monomial.
pub const NVARS: usize = 8;

/// The generators of the ambient polynomial ring.
///
/// `Q`, `S`, `Lam` generate the scalar field (`s` stands for `q^α`, `λ` for `log q`),
/// `T`, `Y` the function field, and `SeqQ`, `SeqS`, `SeqN` are the index symbols
/// `qⁿ`, `sⁿ`, `n` used to write sequences in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Q = 0,
    S = 1,
    Lam = 2,
    T = 3,
    Y = 4,
    SeqQ = 5,
    SeqS = 6,
    SeqN = 7,
}

impl Var {
    pub const ALL: [Var; NVARS] = [
        Var::Q,
        Var::S,
        Var::Lam,
        Var::T,
        Var::Y,
        Var::SeqQ,
        Var::SeqS,
        Var::SeqN,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Q => "q",
            Var::S => "s",
            Var::Lam => "λ",
            Var::T => "t",
            Var::Y => "y",
            Var::SeqQ => "Q",
            Var::SeqS => "Qα",
            Var::SeqN => "N",
        }
    }

    /// True for the generators of the scalar field `K = ℚ(q, s, λ)`.
    pub fn is_scalar(self) -> bool {
        matches!(self, Var::Q | Var::S | Var::Lam)
    }

    /// True for the sequence index symbols.
    pub fn is_index(self) -> bool {
        matches!(self, Var::SeqQ | Var::SeqS | Var::SeqN)
    }
}

/// An exponent vector. Ordered graded-lexicographically, with later generators
/// more significant (so `λ > s > q`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub [u16; NVARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; NVARS]);

    pub fn var(v: Var, e: u16) -> Mono {
        let mut m = Mono::ONE;
        m.0[v.index()] = e;
        m
    }

    pub fn deg(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exp(&self, v: Var) -> u16 {
        self.0[v.index()]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut r = [0u16; NVARS];
        for i in 0..NVARS {
            r[i] = self.0[i]
                .checked_add(o.0[i])
                .expect("monomial exponent overflow");
        }
        Mono(r)
    }

    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut r = [0u16; NVARS];
        for i in 0..NVARS {
            r[i] = self.0[i].checked_sub(o.0[i])?;
        }
        Some(Mono(r))
    }

    pub fn divides(&self, o: &Mono) -> bool {
        (0..NVARS).all(|i| self.0[i] <= o.0[i])
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut r = [0u16; NVARS];
        for i in 0..NVARS {
            r[i] = self.0[i].min(o.0[i]);
        }
        Mono(r)
    }

    pub fn with(&self, v: Var, e: u16) -> Mono {
        let mut m = *self;
        m.0[v.index()] = e;
        m
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.deg().cmp(&o.deg()).then_with(|| {
            for i in (0..NVARS).rev() {
                match self.0[i].cmp(&o.0[i]) {
                    Ordering::Equal => continue,
                    c => return c,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", MonoDisplay(self))
    }
}

struct MonoDisplay<'a>(&'a Mono);

impl fmt::Display for MonoDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in Var::ALL {
            let e = self.0.exp(v);
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", v.name())?;
            } else {
                write!(f, "{}^{}", v.name(), e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Coefficient rings usable in [`Poly`]: ℤ and ℚ with arbitrary precision.
pub trait Coeff: Clone + Num + Signed + Eq + Hash + fmt::Debug + fmt::Display {
    /// Exact quotient, `None` if `d` does not divide `self` in the coefficient ring.
    fn exact_div(&self, d: &Self) -> Option<Self>;
}

impl Coeff for BigInt {
    fn exact_div(&self, d: &Self) -> Option<Self> {
        let (q, r) = num_integer::Integer::div_rem(self, d);
        r.is_zero().then_some(q)
    }
}

impl Coeff for BigRational {
    fn exact_div(&self, d: &Self) -> Option<Self> {
        Some(self / d)
    }
}

/// A sparse polynomial with terms sorted by decreasing monomial.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    terms: Vec<(Mono, C)>,
}

/// Polynomials with rational coefficients.
pub type MPoly = Poly<BigRational>;
/// Polynomials with integer coefficients (used inside gcd computations).
pub type IPoly = Poly<BigInt>;

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(Mono::ONE, c)],
            }
        }
    }

    pub fn var(v: Var) -> Self {
        Self::monomial(Mono::var(v, 1), C::one())
    }

    pub fn monomial(m: Mono, c: C) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from unsorted terms, merging duplicates.
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, C)>) -> Self {
        let mut acc: HashMap<Mono, C> = HashMap::new();
        for (m, c) in terms {
            if c.is_zero() {
                continue;
            }
            match acc.get_mut(&m) {
                Some(x) => *x = x.clone() + c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let mut v: Vec<(Mono, C)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        v.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms: v }
    }

    pub fn terms(&self) -> &[(Mono, C)] {
        &self.terms
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

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.terms.is_empty() {
            Some(C::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn lead(&self) -> Option<&(Mono, C)> {
        self.terms.first()
    }

    pub fn lc(&self) -> C {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(C::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|t| t.0.deg()).unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u16 {
        self.terms.iter().map(|t| t.0.exp(v)).max().unwrap_or(0)
    }

    /// Smallest exponent of `v` among the terms.
    pub fn min_degree_in(&self, v: Var) -> u16 {
        self.terms.iter().map(|t| t.0.exp(v)).min().unwrap_or(0)
    }

    /// Bitmask of generators that occur.
    pub fn var_mask(&self) -> u16 {
        let mut m = 0u16;
        for (mono, _) in &self.terms {
            for i in 0..NVARS {
                if mono.0[i] > 0 {
                    m |= 1 << i;
                }
            }
        }
        m
    }

    pub fn involves(&self, v: Var) -> bool {
        self.var_mask() & (1 << v.index()) != 0
    }

    /// The gcd of all monomials occurring.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let mut g = match it.next() {
            Some(t) => t.0,
            None => return Mono::ONE,
        };
        for t in it {
            g = g.gcd(&t.0);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn neg(&self) -> Self {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.merge(o, false)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.merge(o, true)
    }

    fn merge(&self, o: &Self, negate: bool) -> Self {
        let (a, b) = (&self.terms, &o.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -b[j].1.clone() } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        a[i].1.clone() - b[j].1.clone()
                    } else {
                        a[i].1.clone() + b[j].1.clone()
                    };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -t.1.clone() } else { t.1.clone() };
            out.push((t.0, c));
        }
        Poly { terms: out }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (*m, x.clone() * c.clone()))
                .collect(),
        }
    }

    /// Multiplies by `c·m`; order is preserved because the order is a monomial order.
    pub fn mul_term(&self, m: &Mono, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(x, d)| (x.mul(m), d.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.terms.len() == 1 {
            return o.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        if o.terms.len() == 1 {
            return self.mul_term(&o.terms[0].0, &o.terms[0].1);
        }
        let mut acc: HashMap<Mono, C> = HashMap::with_capacity(self.len() * o.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = ma.mul(mb);
                let c = ca.clone() * cb.clone();
                match acc.get_mut(&m) {
                    Some(x) => *x = x.clone() + c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        let mut v: Vec<(Mono, C)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        v.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms: v }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Divides every monomial by `m`; `m` must divide all of them.
    pub fn div_mono(&self, m: &Mono) -> Self {
        if m.is_one() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(x, c)| (x.div(m).expect("monomial does not divide"), c.clone()))
                .collect(),
        }
    }

    /// Exact division; returns `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (ld, lcd) = d.terms[0].clone();
        if d.terms.len() == 1 {
            let mut out = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                let q = m.div(&ld)?;
                out.push((q, c.exact_div(&lcd)?));
            }
            return Some(Poly { terms: out });
        }
        let mut rem = self.clone();
        let mut quot: Vec<(Mono, C)> = Vec::new();
        while let Some((lm, lcr)) = rem.terms.first().cloned() {
            let qm = lm.div(&ld)?;
            let qc = lcr.exact_div(&lcd)?;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Poly { terms: quot })
    }

    /// Applies a map to each term; the map may send distinct monomials to the same one.
    pub fn map_terms(&self, f: impl Fn(&Mono, &C) -> (Mono, C)) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| f(m, c)))
    }

    /// Splits into coefficients of `v⁰, v¹, …` (each free of `v`).
    pub fn coeffs_in(&self, v: Var) -> Vec<Self> {
        let d = self.degree_in(v) as usize;
        let mut out: Vec<Vec<(Mono, C)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let e = m.exp(v) as usize;
            out[e].push((m.with(v, 0), c.clone()));
        }
        out.into_iter().map(|t| Poly { terms: t }).collect()
    }

    /// Inverse of [`Poly::coeffs_in`].
    pub fn from_coeffs_in(v: Var, cs: &[Self]) -> Self {
        let mut acc = Self::zero();
        for (e, c) in cs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&c.mul_term(&Mono::var(v, e as u16), &C::one()));
        }
        acc
    }

    /// Partial derivative with respect to `v`.
    pub fn derive(&self, v: Var) -> Self {
        let i = v.index();
        let terms = self.terms.iter().filter(|(m, _)| m.0[i] > 0).map(|(m, c)| {
            let e = m.0[i];
            let mut m2 = *m;
            m2.0[i] = e - 1;
            let mut k = C::zero();
            for _ in 0..e {
                k = k + C::one();
            }
            (m2, c.clone() * k)
        });
        Self::from_terms(terms)
    }

    /// Substitutes `v ↦ p` (with `p` any polynomial), expanding powers.
    pub fn subst(&self, v: Var, p: &Self) -> Self {
        if !self.involves(v) {
            return self.clone();
        }
        let cs = self.coeffs_in(v);
        // Horner evaluation in p.
        let mut acc = Self::zero();
        for c in cs.iter().rev() {
            acc = acc.mul(p).add(c);
        }
        acc
    }
}

impl MPoly {
    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// Scales to a primitive integer polynomial; returns it with the factor used.
    pub fn to_primitive_int(&self) -> IPoly {
        if self.is_zero() {
            return IPoly::zero();
        }
        let mut l = BigInt::one();
        for (_, c) in &self.terms {
            l = num_integer::Integer::lcm(&l, c.denom());
        }
        let ints: Vec<(Mono, BigInt)> = self
            .terms
            .iter()
            .map(|(m, c)| (*m, (c * BigRational::from_integer(l.clone())).to_integer()))
            .collect();
        let p = Poly { terms: ints };
        p.primitive()
    }

    /// The monic associate (leading coefficient 1).
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.lc();
        if lc.is_one() {
            return self.clone();
        }
        let inv = lc.recip();
        self.scale(&inv)
    }
}

impl IPoly {
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = num_integer::Integer::gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides by the integer content and makes the leading coefficient positive.
    pub fn primitive(&self) -> IPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.int_content();
        if self.lc().is_negative() {
            g = -g;
        }
        if g.is_one() {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, c / &g)).collect(),
        }
    }

    pub fn to_rat(&self) -> MPoly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, BigRational::from_integer(c.clone())))
                .collect(),
        }
    }
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", MonoDisplay(m))?;
            } else {
                write!(f, "{}*{}", a, MonoDisplay(m))?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> MPoly {
        MPoly::var(Var::Q)
    }

    #[test]
    fn order_is_graded_then_lambda_s_q() {
        let lam = Mono::var(Var::Lam, 1);
        let s = Mono::var(Var::S, 1);
        let qq = Mono::var(Var::Q, 2);
        assert!(lam > s);
        assert!(s > Mono::var(Var::Q, 1));
        assert!(qq > lam);
    }

    #[test]
    fn expand_and_divide() {
        let a = q().sub(&MPoly::one());
        let b = q().add(&MPoly::one());
        let p = a.mul(&b);
        assert_eq!(p, q().mul(&q()).sub(&MPoly::one()));
        assert_eq!(p.div_exact(&a), Some(b.clone()));
        assert_eq!(p.div_exact(&q()), None);
    }

    #[test]
    fn substitution_expands() {
        let y = MPoly::var(Var::Y);
        let p = y.mul(&y);
        let r = p.subst(Var::Y, &y.add(&MPoly::var(Var::Lam)));
        let lam = MPoly::var(Var::Lam);
        let expect = y.mul(&y).add(&y.mul(&lam).scale(&BigRational::from_integer(2.into()))).add(&lam.mul(&lam));
        assert_eq!(r, expect);
    }
}
