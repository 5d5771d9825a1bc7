//! The Hopf algebra `ℌ_q = ⟨u, u⁻¹, v⟩/(uv − q⁻¹vu)`, upper-triangular
//! matrices `H_q(A)`, and the formal groups `Ĝ_II`, `QG_II`, `Ĝ_III`, `QG_III`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::algebra::{CoeffVar, Ring};
use crate::deform::{build_deformation, Deformation, DeformError};
use crate::nilalg::{NilElement, NilError, WCtx, WSeries};
use crate::qscalar::{q_pow, Frac, ScalarError, Var};
use crate::report::Check;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QgError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Nil(#[from] NilError),
    #[error(transparent)]
    Deform(#[from] Box<DeformError>),
}

/// A monomial `uᵃvᵇ` (`a ∈ ℤ`, `b ≥ 0`).
pub type HqMono = (i32, u32);

/// `Σ c_{ab} uᵃvᵇ` in normal order (u-powers left of v-powers).
#[derive(Clone, PartialEq, Default)]
pub struct HqElement {
    terms: BTreeMap<HqMono, Frac>,
}

fn add_into<K: Ord + Clone>(m: &mut BTreeMap<K, Frac>, k: K, c: Frac) {
    if c.is_zero() {
        return;
    }
    match m.get_mut(&k) {
        Some(v) => {
            *v = &*v + &c;
            if v.is_zero() {
                m.remove(&k);
            }
        }
        None => {
            m.insert(k, c);
        }
    }
}

/// `(u^{a₁}v^{b₁})(u^{a₂}v^{b₂}) = q^{b₁a₂}·u^{a₁+a₂}v^{b₁+b₂}`.
fn mono_mul(x: HqMono, y: HqMono) -> (Frac, HqMono) {
    let c = q_pow(x.1 as i64 * y.0 as i64);
    (c, (x.0 + y.0, x.1 + y.1))
}

impl HqElement {
    pub fn scalar(c: Frac) -> Self {
        let mut terms = BTreeMap::new();
        add_into(&mut terms, (0, 0), c);
        HqElement { terms }
    }

    pub fn one() -> Self {
        Self::scalar(Frac::one())
    }

    pub fn mono(a: i32, b: u32) -> Self {
        Self::term(a, b, Frac::one())
    }

    pub fn term(a: i32, b: u32, c: Frac) -> Self {
        let mut terms = BTreeMap::new();
        add_into(&mut terms, (a, b), c);
        HqElement { terms }
    }

    pub fn u() -> Self {
        Self::mono(1, 0)
    }

    pub fn u_inv() -> Self {
        Self::mono(-1, 0)
    }

    pub fn v() -> Self {
        Self::mono(0, 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&HqMono, &Frac)> {
        self.terms.iter()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (k, c) in &o.terms {
            add_into(&mut t, *k, c.clone());
        }
        HqElement { terms: t }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        HqElement {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Frac) -> Self {
        let mut t = BTreeMap::new();
        for (k, c) in &self.terms {
            add_into(&mut t, *k, c * s);
        }
        HqElement { terms: t }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut t = BTreeMap::new();
        for (x, c1) in &self.terms {
            for (y, c2) in &o.terms {
                let (s, m) = mono_mul(*x, *y);
                add_into(&mut t, m, &(c1 * c2) * &s);
            }
        }
        HqElement { terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Inverse of `c·uᵃ`; other elements are not units here.
    pub fn invert(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&(a, b), c) = self.terms.iter().next()?;
        if b != 0 {
            return None;
        }
        Some(Self::term(-a, 0, c.inv().ok()?))
    }
}

impl fmt::Display for HqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, ((a, b), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            fmt_mono(f, (*a, *b))?;
        }
        Ok(())
    }
}

fn fmt_mono(f: &mut fmt::Formatter<'_>, (a, b): HqMono) -> fmt::Result {
    match a {
        0 => {}
        1 => f.write_str("u")?,
        _ => write!(f, "u^{a}")?,
    }
    match b {
        0 => {}
        1 => f.write_str("v")?,
        _ => write!(f, "v^{b}")?,
    }
    if a == 0 && b == 0 {
        f.write_str("1")?;
    }
    Ok(())
}

impl fmt::Debug for HqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ring for HqElement {
    fn zero_like(&self) -> Self {
        HqElement::default()
    }
    fn one_like(&self) -> Self {
        HqElement::one()
    }
    fn embed(&self, c: &Frac) -> Self {
        HqElement::scalar(c.clone())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scale(&self, c: &Frac) -> Self {
        HqElement::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        HqElement::is_zero(self)
    }
    fn try_inverse(&self) -> Option<Self> {
        self.invert()
    }
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self {
        let mut t = BTreeMap::new();
        for (k, c) in &self.terms {
            add_into(&mut t, *k, f(c));
        }
        HqElement { terms: t }
    }
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError> {
        let mut t = BTreeMap::new();
        for (k, c) in &self.terms {
            add_into(&mut t, *k, f(c)?);
        }
        Ok(HqElement { terms: t })
    }
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac)) {
        for c in self.terms.values() {
            f(c);
        }
    }
    fn derive_var(&self, _v: CoeffVar) -> Option<Self> {
        None
    }
}

/// `Σ c·(m₁ ⊗ ⋯ ⊗ m_k)` with factors in normal form; multiplication is
/// factorwise.
#[derive(Clone, PartialEq)]
pub struct HqTensor {
    arity: usize,
    terms: BTreeMap<Vec<HqMono>, Frac>,
}

impl HqTensor {
    pub fn zero(arity: usize) -> Self {
        HqTensor {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(arity: usize, c: Frac) -> Self {
        let mut t = Self::zero(arity);
        add_into(&mut t.terms, vec![(0, 0); arity], c);
        t
    }

    pub fn one(arity: usize) -> Self {
        Self::scalar(arity, Frac::one())
    }

    /// `c·(m₁ ⊗ ⋯ ⊗ m_k)`.
    pub fn pure(monos: Vec<HqMono>, c: Frac) -> Self {
        let mut t = Self::zero(monos.len());
        add_into(&mut t.terms, monos, c);
        t
    }

    /// `x` placed in factor `pos` of a `arity`-fold tensor, `1` elsewhere.
    pub fn embed_at(x: &HqElement, pos: usize, arity: usize) -> Self {
        let mut t = Self::zero(arity);
        for (m, c) in &x.terms {
            let mut k = vec![(0, 0); arity];
            k[pos] = *m;
            add_into(&mut t.terms, k, c.clone());
        }
        t
    }

    /// `x ⊗ y`.
    pub fn tensor(x: &HqElement, y: &HqElement) -> Self {
        Self::embed_at(x, 0, 2).mul(&Self::embed_at(y, 1, 2))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.arity, o.arity);
        let mut t = self.terms.clone();
        for (k, c) in &o.terms {
            add_into(&mut t, k.clone(), c.clone());
        }
        HqTensor {
            arity: self.arity,
            terms: t,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Frac::int(-1)))
    }

    pub fn scale(&self, s: &Frac) -> Self {
        let mut t = BTreeMap::new();
        for (k, c) in &self.terms {
            add_into(&mut t, k.clone(), c * s);
        }
        HqTensor {
            arity: self.arity,
            terms: t,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.arity, o.arity);
        let mut t = BTreeMap::new();
        for (x, c1) in &self.terms {
            for (y, c2) in &o.terms {
                let mut c = c1 * c2;
                let mut k = Vec::with_capacity(self.arity);
                for (a, b) in x.iter().zip(y) {
                    let (s, m) = mono_mul(*a, *b);
                    c = &c * &s;
                    k.push(m);
                }
                add_into(&mut t, k, c);
            }
        }
        HqTensor {
            arity: self.arity,
            terms: t,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Replaces factor `pos` of every term by the tensor `f(monomial)`; the
    /// arity changes from `k` to `k − 1 + arity(f)`.
    pub fn expand_factor(&self, pos: usize, fa: usize, f: &dyn Fn(HqMono) -> HqTensor) -> Self {
        let arity = self.arity - 1 + fa;
        let mut out = Self::zero(arity);
        for (k, c) in &self.terms {
            let img = f(k[pos]);
            assert_eq!(img.arity, fa);
            for (ik, ic) in &img.terms {
                let mut nk = Vec::with_capacity(arity);
                nk.extend_from_slice(&k[..pos]);
                nk.extend_from_slice(ik);
                nk.extend_from_slice(&k[pos + 1..]);
                add_into(&mut out.terms, nk, c * ic);
            }
        }
        out
    }

    /// Multiplies factors `pos` and `pos + 1` together.
    pub fn multiply_factors(&self, pos: usize) -> Self {
        let mut out = Self::zero(self.arity - 1);
        for (k, c) in &self.terms {
            let (s, m) = mono_mul(k[pos], k[pos + 1]);
            let mut nk = Vec::with_capacity(self.arity - 1);
            nk.extend_from_slice(&k[..pos]);
            nk.push(m);
            nk.extend_from_slice(&k[pos + 2..]);
            add_into(&mut out.terms, nk, c * &s);
        }
        out
    }

    /// A one-fold tensor as an element.
    pub fn to_element(&self) -> HqElement {
        assert_eq!(self.arity, 1);
        HqElement {
            terms: self.terms.iter().map(|(k, c)| (k[0], c.clone())).collect(),
        }
    }
}

impl fmt::Display for HqTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            for (j, m) in k.iter().enumerate() {
                if j > 0 {
                    f.write_str("⊗")?;
                }
                fmt_mono(f, *m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for HqTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ring for HqTensor {
    fn zero_like(&self) -> Self {
        HqTensor::zero(self.arity)
    }
    fn one_like(&self) -> Self {
        HqTensor::one(self.arity)
    }
    fn embed(&self, c: &Frac) -> Self {
        HqTensor::scalar(self.arity, c.clone())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn negate(&self) -> Self {
        self.scale(&Frac::int(-1))
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scale(&self, c: &Frac) -> Self {
        HqTensor::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        HqTensor::is_zero(self)
    }
    fn try_inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        if k.iter().any(|m| m.1 != 0) {
            return None;
        }
        Some(HqTensor::pure(k.iter().map(|m| (-m.0, 0)).collect(), c.inv().ok()?))
    }
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self {
        let mut t = BTreeMap::new();
        for (k, c) in &self.terms {
            add_into(&mut t, k.clone(), f(c));
        }
        HqTensor {
            arity: self.arity,
            terms: t,
        }
    }
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError> {
        let mut t = BTreeMap::new();
        for (k, c) in &self.terms {
            add_into(&mut t, k.clone(), f(c)?);
        }
        Ok(HqTensor {
            arity: self.arity,
            terms: t,
        })
    }
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac)) {
        for c in self.terms.values() {
            f(c);
        }
    }
    fn derive_var(&self, _v: CoeffVar) -> Option<Self> {
        None
    }
}

pub fn hq_mul(x: &HqElement, y: &HqElement) -> HqElement {
    x.mul(y)
}

fn delta_mono((a, b): HqMono) -> HqTensor {
    // Δ(uᵃvᵇ) = (uᵃ⊗uᵃ)(u⊗v + v⊗1)ᵇ
    let mut acc = HqTensor::pure(vec![(a, 0), (a, 0)], Frac::one());
    let dv = HqTensor::pure(vec![(1, 0), (0, 1)], Frac::one())
        .add(&HqTensor::pure(vec![(0, 1), (0, 0)], Frac::one()));
    for _ in 0..b {
        acc = acc.mul(&dv);
    }
    acc
}

/// The coproduct, extended multiplicatively from `Δ(u) = u⊗u`,
/// `Δ(v) = u⊗v + v⊗1`.
pub fn hq_delta(x: &HqElement) -> HqTensor {
    let mut out = HqTensor::zero(2);
    for (m, c) in &x.terms {
        out = out.add(&delta_mono(*m).scale(c));
    }
    out
}

fn counit_mono((_, b): HqMono) -> Frac {
    if b == 0 {
        Frac::one()
    } else {
        Frac::zero()
    }
}

/// `ε(u) = ε(u⁻¹) = 1`, `ε(v) = 0`.
pub fn hq_counit(x: &HqElement) -> Frac {
    let mut acc = Frac::zero();
    for (m, c) in &x.terms {
        acc = &acc + &(c * &counit_mono(*m));
    }
    acc
}

fn antipode_mono((a, b): HqMono) -> HqElement {
    // i(uᵃvᵇ) = i(v)ᵇ i(u)ᵃ with i(v) = −u⁻¹v
    let iv = HqElement::term(-1, 1, Frac::int(-1));
    let mut acc = HqElement::one();
    for _ in 0..b {
        acc = acc.mul(&iv);
    }
    acc.mul(&HqElement::mono(-a, 0))
}

/// The antipode: the anti-morphism with `i(u) = u⁻¹`, `i(v) = −u⁻¹v`.
pub fn hq_antipode(x: &HqElement) -> HqElement {
    let mut out = HqElement::default();
    for (m, c) in &x.terms {
        out = out.add(&antipode_mono(*m).scale(c));
    }
    out
}

/// Checks the Hopf axioms on every monomial `uᵃvᵇ` with `|a|, b ≤ depth`.
pub fn hq_verify_hopf(depth: u32) -> Vec<Check> {
    let d = depth as i32;
    let monos: Vec<HqMono> = (-d..=d)
        .flat_map(|a| (0..=depth).map(move |b| (a, b)))
        .collect();
    let params = format!("depth={depth}");
    let mut coassoc = None;
    let mut counit_l = None;
    let mut counit_r = None;
    let mut anti_l = None;
    let mut anti_r = None;
    let mut mult = None;
    let counit_t = |m: HqMono| HqTensor::scalar(0, counit_mono(m));
    let anti_t = |m: HqMono| HqTensor::embed_at(&antipode_mono(m), 0, 1);
    for &m in &monos {
        let x = HqElement::mono(m.0, m.1);
        let dx = hq_delta(&x);
        let left = dx.expand_factor(0, 2, &delta_mono);
        let right = dx.expand_factor(1, 2, &delta_mono);
        if coassoc.is_none() && left != right {
            coassoc = Some(format!("u^{}v^{}: (Δ⊗id)Δ − (id⊗Δ)Δ = {}", m.0, m.1, left.sub(&right)));
        }
        let id1 = HqTensor::embed_at(&x, 0, 1);
        let cl = dx.expand_factor(0, 0, &counit_t);
        if counit_l.is_none() && cl != id1 {
            counit_l = Some(format!("u^{}v^{}: (ε⊗id)Δ = {cl}", m.0, m.1));
        }
        let cr = dx.expand_factor(1, 0, &counit_t);
        if counit_r.is_none() && cr != id1 {
            counit_r = Some(format!("u^{}v^{}: (id⊗ε)Δ = {cr}", m.0, m.1));
        }
        let unit = HqTensor::scalar(1, counit_mono(m));
        let al = dx.expand_factor(0, 1, &anti_t).multiply_factors(0);
        if anti_l.is_none() && al != unit {
            anti_l = Some(format!("u^{}v^{}: m(i⊗id)Δ = {al}", m.0, m.1));
        }
        let ar = dx.expand_factor(1, 1, &anti_t).multiply_factors(0);
        if anti_r.is_none() && ar != unit {
            anti_r = Some(format!("u^{}v^{}: m(id⊗i)Δ = {ar}", m.0, m.1));
        }
        for &n in &monos {
            if mult.is_some() {
                break;
            }
            let y = HqElement::mono(n.0, n.1);
            let lhs = hq_delta(&x.mul(&y));
            let rhs = dx.mul(&hq_delta(&y));
            if lhs != rhs {
                mult = Some(format!("Δ(u^{}v^{}·u^{}v^{}) ≠ Δ(·)Δ(·)", m.0, m.1, n.0, n.1));
            }
        }
    }
    let du = hq_delta(&HqElement::u());
    let dv = hq_delta(&HqElement::v());
    let rel = du.mul(&dv).sub(&dv.mul(&du).scale(&q_pow(-1)));
    let rel_w = (!rel.is_zero()).then(|| format!("Δ(u)Δ(v) − q⁻¹Δ(v)Δ(u) = {rel}"));
    let ui = HqElement::u().mul(&HqElement::u_inv());
    let inv_w = (ui != HqElement::one()).then(|| format!("uu⁻¹ = {ui}"));
    vec![
        Check::from_witness("hopf.antipode_left", &params, anti_l),
        Check::from_witness("hopf.antipode_right", &params, anti_r),
        Check::from_witness("hopf.coassociativity", &params, coassoc),
        Check::from_witness("hopf.counit_left", &params, counit_l),
        Check::from_witness("hopf.counit_right", &params, counit_r),
        Check::from_witness("hopf.delta_multiplicative", &params, mult),
        Check::from_witness("hopf.delta_relation", "", rel_w),
        Check::from_witness("hopf.unit_inverse", "", inv_w),
    ]
}

/// A random element with up to four terms, `|a| ≤ 3`, `b ≤ 3`.
pub fn random_hq<G: Rng>(rng: &mut G) -> HqElement {
    let mut x = HqElement::default();
    for _ in 0..rng.gen_range(1..=4) {
        let c = Frac::int(rng.gen_range(-3..=3));
        x = x.add(&HqElement::term(rng.gen_range(-3..=3), rng.gen_range(0..=3), c));
    }
    x
}

/// `i(xy) = i(y)i(x)` on `pairs` random pairs.
pub fn check_antipode_antimorphism<G: Rng>(pairs: usize, rng: &mut G) -> Check {
    let mut w = None;
    for _ in 0..pairs {
        let x = random_hq(rng);
        let y = random_hq(rng);
        let lhs = hq_antipode(&x.mul(&y));
        let rhs = hq_antipode(&y).mul(&hq_antipode(&x));
        if lhs != rhs {
            w = Some(format!("x = {x}, y = {y}: i(xy) − i(y)i(x) = {}", lhs.sub(&rhs)));
            break;
        }
    }
    Check::from_witness("hopf.antipode_antimorphism", format!("pairs={pairs}"), w)
}

/// `[[e, f], [0, 1]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperMatrix2<R> {
    pub e: R,
    pub f: R,
}

impl<R: Ring> UpperMatrix2<R> {
    pub fn new(e: R, f: R) -> Self {
        UpperMatrix2 { e, f }
    }

    pub fn identity_like(x: &R) -> Self {
        UpperMatrix2 {
            e: x.one_like(),
            f: x.zero_like(),
        }
    }

    /// True when `f·e = q^k·e·f` (`k = 1`: `H_q(A)`; `k = −1`: `H_{q⁻¹}(A)`).
    pub fn satisfies_relation(&self, k: i64) -> bool {
        self.f.times(&self.e) == self.e.times(&self.f).scale(&q_pow(k))
    }

    pub fn is_identity(&self) -> bool {
        self.e == self.e.one_like() && self.f.is_zero()
    }

    fn entries(&self) -> [&R; 2] {
        [&self.e, &self.f]
    }
}

impl<R: Ring> fmt::Display for UpperMatrix2<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [0, 1]]", self.e, self.f)
    }
}

/// True when every element of `xs` commutes with every element of `ys`.
pub fn mutually_commute<R: Ring>(xs: &[&R], ys: &[&R]) -> bool {
    xs.iter()
        .all(|x| ys.iter().all(|y| x.commutator(y).is_zero()))
}

/// `Z₁Z₂ = [[e₁e₂, e₁f₂ + f₁], [0, 1]]` for mutually commuting entry sets;
/// closure in `H_q(A)` is asserted when both factors lie in it.
pub fn matrix_mul<R: Ring>(
    z1: &UpperMatrix2<R>,
    z2: &UpperMatrix2<R>,
) -> Result<UpperMatrix2<R>, QgError> {
    if !mutually_commute(&z1.entries(), &z2.entries()) {
        return Err(QgError::Precondition(
            "matrix entries are not mutually commutative".into(),
        ));
    }
    let p = UpperMatrix2 {
        e: z1.e.times(&z2.e),
        f: z1.e.times(&z2.f).plus(&z1.f),
    };
    if z1.satisfies_relation(1) && z2.satisfies_relation(1) {
        assert!(p.satisfies_relation(1), "H_q(A) not closed under product");
    }
    Ok(p)
}

/// `Z̃ = [[e⁻¹, −e⁻¹f], [0, 1]]`.
pub fn matrix_tilde_inverse<R: Ring>(z: &UpperMatrix2<R>) -> Result<UpperMatrix2<R>, QgError> {
    let ei = z
        .e
        .try_inverse()
        .ok_or_else(|| QgError::Precondition("e is not a unit".into()))?;
    let f = ei.times(&z.f).negate();
    Ok(UpperMatrix2 { e: ei, f })
}

/// Product of two matrices without the commutation precondition.
fn matrix_mul_raw<R: Ring>(z1: &UpperMatrix2<R>, z2: &UpperMatrix2<R>) -> UpperMatrix2<R> {
    UpperMatrix2 {
        e: z1.e.times(&z2.e),
        f: z1.e.times(&z2.f).plus(&z1.f),
    }
}

/// `t + W₁` in the given context.
pub fn t_plus_w1(ctx: &Arc<WCtx>) -> WSeries {
    WSeries::taylor(ctx, &Frac::var(Var::T))
}

/// `e(t + W₁) + f` as a series.
pub fn shifted_coordinate(ctx: &Arc<WCtx>, e: &NilElement, f: &NilElement) -> WSeries {
    t_plus_w1(ctx)
        .left_mul_nil(e)
        .add(&WSeries::from_nil(ctx, f.clone()))
}

/// `(g − 1)t + h`.
fn shift_term(g: &NilElement, h: &NilElement) -> NilElement {
    g.sub(&NilElement::one(g.algebra()))
        .scale(&Frac::var(Var::T))
        .add(h)
}

fn check_unipotent(e: &NilElement) -> Result<(), QgError> {
    if !e.unital().is_one() {
        return Err(QgError::Precondition(format!("e − 1 is not nilpotent: e = {e}")));
    }
    Ok(())
}

fn series_coeffs(b: &WSeries) -> Vec<&NilElement> {
    b.terms().iter().filter(|x| !x.is_zero()).collect()
}

fn constraint_holds(e: &NilElement, f: &NilElement, b: &WSeries) -> bool {
    shifted_coordinate(b.ctx(), e, f).commutator(b).is_zero()
}

/// An element `(e, b)` of `Ĝ_III(A)`: `e − 1` and all coefficients of
/// `b(W₁)` nilpotent.
#[derive(Clone, Debug, PartialEq)]
pub struct GIIIElement {
    pub e: NilElement,
    pub b: WSeries,
}

impl GIIIElement {
    pub fn new(e: NilElement, b: WSeries) -> Result<Self, QgError> {
        check_unipotent(&e)?;
        if !b.has_nilpotent_coeffs() || b.involves_w2() {
            return Err(QgError::Precondition("b must be a W₁-series with nilpotent coefficients".into()));
        }
        Ok(GIIIElement { e, b })
    }

    pub fn unit(ctx: &Arc<WCtx>) -> Self {
        GIIIElement {
            e: NilElement::one(ctx.algebra()),
            b: WSeries::zero(ctx),
        }
    }
}

/// `(e, b)⋆(g, c) = (eg, b(gW₁ + (g−1)t) + c(W₁))`.
pub fn giii_mul(x: &GIIIElement, y: &GIIIElement) -> Result<GIIIElement, QgError> {
    let zero = NilElement::zero(y.e.algebra());
    let b = x.b.subst_w1(&y.e, &shift_term(&y.e, &zero))?.add(&y.b);
    Ok(GIIIElement {
        e: x.e.mul(&y.e),
        b,
    })
}

/// `(e, b)⁻¹ = (e⁻¹, −b(e⁻¹W₁ + (e⁻¹−1)t))`.
pub fn giii_inv(x: &GIIIElement) -> Result<GIIIElement, QgError> {
    let ei = x.e.invert()?;
    let zero = NilElement::zero(ei.algebra());
    let b = x.b.subst_w1(&ei, &shift_term(&ei, &zero))?.neg();
    Ok(GIIIElement { e: ei, b })
}

/// An element `(e, b)` of `Ĝ_II(A)`: `e − 1` nilpotent and `b − 1` with
/// nilpotent coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct GIIElement {
    pub e: NilElement,
    pub b: WSeries,
}

impl GIIElement {
    pub fn new(e: NilElement, b: WSeries) -> Result<Self, QgError> {
        check_unipotent(&e)?;
        let one = WSeries::one(b.ctx());
        if !b.sub(&one).has_nilpotent_coeffs() || b.involves_w2() {
            return Err(QgError::Precondition("b − 1 must have nilpotent coefficients".into()));
        }
        Ok(GIIElement { e, b })
    }

    pub fn unit(ctx: &Arc<WCtx>) -> Self {
        GIIElement {
            e: NilElement::one(ctx.algebra()),
            b: WSeries::one(ctx),
        }
    }
}

/// `(e₁, b₁)⋆(e₂, b₂) = (e₁e₂, b₁(e₂W₁ + (e₂−1)t)·b₂(W₁))`.
pub fn gii_mul(x: &GIIElement, y: &GIIElement) -> Result<GIIElement, QgError> {
    let zero = NilElement::zero(y.e.algebra());
    let b = x.b.subst_w1(&y.e, &shift_term(&y.e, &zero))?.mul(&y.b);
    Ok(GIIElement {
        e: x.e.mul(&y.e),
        b,
    })
}

/// `(e, b)⁻¹ = (e⁻¹, b(e⁻¹W₁ + (e⁻¹−1)t)⁻¹)`.
pub fn gii_inv(x: &GIIElement) -> Result<GIIElement, QgError> {
    let ei = x.e.invert()?;
    let zero = NilElement::zero(ei.algebra());
    let b = x.b.subst_w1(&ei, &shift_term(&ei, &zero))?.invert()?;
    Ok(GIIElement { e: ei, b })
}

/// An element `(G, b)` of `QG_III(A)` (`variant = 1`) or of its `q⁻¹`
/// counterpart (`variant = −1`, where inverses land).
#[derive(Clone, Debug, PartialEq)]
pub struct QGIIIElement {
    pub mat: UpperMatrix2<NilElement>,
    pub b: WSeries,
}

fn check_qg(mat: &UpperMatrix2<NilElement>, b: &WSeries, variant: i64) -> Result<(), QgError> {
    check_unipotent(&mat.e)?;
    if !mat.f.is_nilpotent() {
        return Err(QgError::Precondition("f is not nilpotent".into()));
    }
    if !mat.satisfies_relation(variant) {
        return Err(QgError::Precondition(format!("f·e ≠ q^{variant}·e·f")));
    }
    if !constraint_holds(&mat.e, &mat.f, b) {
        return Err(QgError::Precondition("[e(t+W₁)+f, b(W₁)] ≠ 0".into()));
    }
    Ok(())
}

impl QGIIIElement {
    pub fn new(mat: UpperMatrix2<NilElement>, b: WSeries, variant: i64) -> Result<Self, QgError> {
        check_qg(&mat, &b, variant)?;
        if !b.has_nilpotent_coeffs() || b.involves_w2() {
            return Err(QgError::Precondition("b must be a W₁-series with nilpotent coefficients".into()));
        }
        Ok(QGIIIElement { mat, b })
    }

    pub fn unit(ctx: &Arc<WCtx>) -> Self {
        QGIIIElement {
            mat: UpperMatrix2::identity_like(&NilElement::one(ctx.algebra())),
            b: WSeries::zero(ctx),
        }
    }

    /// True when the defining constraint `[e(t+W₁)+f, b(W₁)] = 0` holds.
    pub fn constraint_holds(&self) -> bool {
        constraint_holds(&self.mat.e, &self.mat.f, &self.b)
    }

    fn coefficient_set(&self) -> Vec<&NilElement> {
        let mut v = vec![&self.mat.e, &self.mat.f];
        v.extend(series_coeffs(&self.b));
        v
    }
}

/// `(G, φ)⋆(H, ψ) = (GH, φ(gW₁ + (g−1)t + h) + ψ(W₁))` for mutually
/// commuting coefficient sets.
pub fn qgiii_star(x: &QGIIIElement, y: &QGIIIElement) -> Result<QGIIIElement, QgError> {
    if !mutually_commute(&x.coefficient_set(), &y.coefficient_set()) {
        return Err(QgError::Precondition("coefficient sets are not mutually commutative".into()));
    }
    qgiii_star_raw(x, y)
}

fn qgiii_star_raw(x: &QGIIIElement, y: &QGIIIElement) -> Result<QGIIIElement, QgError> {
    let (g, h) = (&y.mat.e, &y.mat.f);
    let b = x.b.subst_w1(g, &shift_term(g, h))?.add(&y.b);
    Ok(QGIIIElement {
        mat: matrix_mul_raw(&x.mat, &y.mat),
        b,
    })
}

/// `(G, φ)⁻¹ = (G̃, −φ(e⁻¹W₁ + (e⁻¹−1)t − e⁻¹f))`, verified two-sided.
pub fn qgiii_inv(x: &QGIIIElement) -> Result<QGIIIElement, QgError> {
    let mat = matrix_tilde_inverse(&x.mat)?;
    let b = x.b.subst_w1(&mat.e, &shift_term(&mat.e, &mat.f))?.neg();
    let inv = QGIIIElement { mat, b };
    let unit = QGIIIElement::unit(x.b.ctx());
    if qgiii_star_raw(x, &inv)? != unit || qgiii_star_raw(&inv, x)? != unit {
        return Err(QgError::Precondition("inverse is not two-sided".into()));
    }
    Ok(inv)
}

/// An element `(G, b)` of `QG_II(A)`: `b − 1` with nilpotent coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct QGIIElement {
    pub mat: UpperMatrix2<NilElement>,
    pub b: WSeries,
}

impl QGIIElement {
    pub fn new(mat: UpperMatrix2<NilElement>, b: WSeries, variant: i64) -> Result<Self, QgError> {
        check_qg(&mat, &b, variant)?;
        let one = WSeries::one(b.ctx());
        if !b.sub(&one).has_nilpotent_coeffs() || b.involves_w2() {
            return Err(QgError::Precondition("b − 1 must have nilpotent coefficients".into()));
        }
        Ok(QGIIElement { mat, b })
    }

    pub fn unit(ctx: &Arc<WCtx>) -> Self {
        QGIIElement {
            mat: UpperMatrix2::identity_like(&NilElement::one(ctx.algebra())),
            b: WSeries::one(ctx),
        }
    }

    pub fn constraint_holds(&self) -> bool {
        constraint_holds(&self.mat.e, &self.mat.f, &self.b)
    }

    fn coefficient_set(&self) -> Vec<&NilElement> {
        let mut v = vec![&self.mat.e, &self.mat.f];
        v.extend(series_coeffs(&self.b));
        v
    }
}

/// `(G, ξ)⋆(H, η) = (GH, ξ(gW₁ + (g−1)t + h)·η(W₁))`.
pub fn qgii_star(x: &QGIIElement, y: &QGIIElement) -> Result<QGIIElement, QgError> {
    if !mutually_commute(&x.coefficient_set(), &y.coefficient_set()) {
        return Err(QgError::Precondition("coefficient sets are not mutually commutative".into()));
    }
    qgii_star_raw(x, y)
}

fn qgii_star_raw(x: &QGIIElement, y: &QGIIElement) -> Result<QGIIElement, QgError> {
    let (g, h) = (&y.mat.e, &y.mat.f);
    let b = x.b.subst_w1(g, &shift_term(g, h))?.mul(&y.b);
    Ok(QGIIElement {
        mat: matrix_mul_raw(&x.mat, &y.mat),
        b,
    })
}

/// The inverse, obtained by solving `x⋆y = 1` for `y` with `y`'s matrix
/// `G̃`: the series equation `ξ(e⁻¹W₁ + (e⁻¹−1)t − e⁻¹f)·η = 1` determines
/// `η`. The result is then checked to be a two-sided inverse.
pub fn qgii_inv(x: &QGIIElement) -> Result<QGIIElement, QgError> {
    let mat = matrix_tilde_inverse(&x.mat)?;
    let b = x.b.subst_w1(&mat.e, &shift_term(&mat.e, &mat.f))?.invert()?;
    let inv = QGIIElement { mat, b };
    let unit = QGIIElement::unit(x.b.ctx());
    if qgii_star_raw(x, &inv)? != unit || qgii_star_raw(&inv, x)? != unit {
        return Err(QgError::Precondition("inverse is not two-sided".into()));
    }
    Ok(inv)
}

/// Parameter-level action `ψ·(e, f) = (ψ(u)e, ψ(u)f + ψ(v))`.
pub fn hq_action_params<R: Ring>(
    psi: &UpperMatrix2<R>,
    e: &R,
    f: &R,
) -> Result<(R, R), QgError> {
    if !mutually_commute(&psi.entries(), &[e, f]) {
        return Err(QgError::Precondition(
            "{ψ(u), ψ(v)} and {e, f} are not mutually commutative".into(),
        ));
    }
    Ok((psi.e.times(e), psi.e.times(f).plus(&psi.f)))
}

/// The deformation with parameters `(ψ(u)e, ψ(u)f + ψ(v))` and the same series.
pub fn hq_action(psi: &UpperMatrix2<NilElement>, phi: &Deformation) -> Result<Deformation, QgError> {
    let (e, f) = hq_action_params(psi, &phi.e, &phi.f)?;
    build_deformation(phi.example, &e, &f, phi.b.as_ref(), phi.trunc)
        .map_err(|err| QgError::Deform(Box::new(err)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilalg::NilAlgebra;

    #[test]
    fn relations() {
        let u = HqElement::u();
        let v = HqElement::v();
        let q = Frac::var(Var::Q);
        assert_eq!(v.mul(&u), u.mul(&v).scale(&q));
        assert_eq!(u.mul(&HqElement::u_inv()), HqElement::one());
        let v2 = v.mul(&v);
        assert_eq!(v2.mul(&u), u.mul(&v2).scale(&(&q * &q)));
    }

    #[test]
    fn delta_counit_antipode_examples() {
        let u = HqElement::u();
        let v = HqElement::v();
        assert_eq!(hq_delta(&v), HqTensor::tensor(&u, &v).add(&HqTensor::tensor(&v, &HqElement::one())));
        let uv = u.mul(&v);
        let expect = HqTensor::tensor(&u.mul(&u), &uv).add(&HqTensor::tensor(&uv, &u));
        assert_eq!(hq_delta(&uv), expect);
        assert_eq!(hq_delta(&HqElement::one()), HqTensor::one(2));
        assert!(hq_counit(&HqElement::mono(3, 1)).is_zero());
        assert!(hq_counit(&HqElement::mono(-2, 0)).is_one());
        assert_eq!(hq_antipode(&v), HqElement::term(-1, 1, Frac::int(-1)));
        assert_eq!(hq_antipode(&uv), HqElement::term(-2, 1, q_pow(-1).neg()));
    }

    #[test]
    fn hopf_axioms_small() {
        for c in hq_verify_hopf(2) {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn matrices_over_hq() {
        let z = UpperMatrix2::new(HqElement::u(), HqElement::v());
        assert!(z.satisfies_relation(1));
        let zt = matrix_tilde_inverse(&z).unwrap();
        assert!(matrix_mul_raw(&zt, &z).is_identity());
        assert!(matrix_mul_raw(&z, &zt).is_identity());
        assert!(zt.satisfies_relation(-1));
        assert!(!zt.satisfies_relation(1));
        assert!(matrix_mul(&z, &z).is_err());
        let one = HqTensor::one(2);
        let z1 = UpperMatrix2::new(
            HqTensor::embed_at(&HqElement::u(), 0, 2),
            HqTensor::embed_at(&HqElement::v(), 0, 2),
        );
        let z2 = UpperMatrix2::new(
            HqTensor::embed_at(&HqElement::u(), 1, 2),
            HqTensor::embed_at(&HqElement::v(), 1, 2),
        );
        let p = matrix_mul(&z1, &z2).unwrap();
        assert_eq!(p.e, hq_delta(&HqElement::u()));
        assert_eq!(p.f, hq_delta(&HqElement::v()));
        assert_eq!(matrix_mul(&z1, &UpperMatrix2::identity_like(&one)).unwrap(), z1);
    }

    #[test]
    fn giii_examples() {
        let a = NilAlgebra::commutative(2, 4);
        let ctx = WCtx::new(&a, 4);
        let e = NilElement::one(&a).add(&NilElement::gen(&a, 0));
        let b = WSeries::w1(&ctx).left_mul_nil(&NilElement::gen(&a, 1));
        let x = GIIIElement::new(e, b).unwrap();
        let unit = GIIIElement::unit(&ctx);
        assert_eq!(giii_mul(&unit, &x).unwrap(), x);
        assert_eq!(giii_mul(&x, &giii_inv(&x).unwrap()).unwrap(), unit);
    }
}
