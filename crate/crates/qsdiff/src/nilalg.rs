//! Finite-dimensional nilpotent test algebras over `L♮` with scalar
//! commutation rules, and truncated series `A[[W₁, W₂]]` with central `W`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Coef, CoeffVar, Ring};
use crate::qscalar::{Frac, Rat, ScalarError, Var};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum NilError {
    #[error("element has zero unital part and is not a unit")]
    NotUnit,
    #[error("substitution term has a non-nilpotent constant part")]
    NonNilpotentShift,
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
}

/// `L♮⟨ε₁, …, ε_m⟩` modulo `εⱼεᵢ = c_{ij}εᵢεⱼ` (`i < j`) and monomials of
/// total degree `≥ nildeg`.
#[derive(Debug)]
pub struct NilAlgebra {
    name: String,
    gens: Vec<String>,
    comm: Vec<Vec<Frac>>,
    nildeg: u32,
    basis: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
    // table[a][b] = (index, coefficient) of basis[a]·basis[b], or None if zero
    table: Vec<Vec<Option<(usize, Frac)>>>,
}

impl PartialEq for NilAlgebra {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.gens == o.gens && self.comm == o.comm && self.nildeg == o.nildeg
    }
}

impl NilAlgebra {
    /// `comm[i][j]` (for `i < j`) is the scalar with `εⱼεᵢ = comm[i][j]·εᵢεⱼ`.
    pub fn new(name: &str, gens: &[&str], comm: Vec<Vec<Frac>>, nildeg: u32) -> Arc<Self> {
        let m = gens.len();
        assert!(nildeg >= 1);
        for i in 0..m {
            for j in i + 1..m {
                assert!(!comm[i][j].is_zero(), "commutation scalar must be nonzero");
            }
        }
        let mut basis = Vec::new();
        for d in 0..nildeg {
            let mut cur = vec![0u16; m];
            push_compositions(&mut basis, &mut cur, 0, d as u16);
        }
        let index: HashMap<Vec<u16>, usize> =
            basis.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut table = vec![vec![None; basis.len()]; basis.len()];
        for (ia, a) in basis.iter().enumerate() {
            for (ib, b) in basis.iter().enumerate() {
                let prod: Vec<u16> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let Some(&ip) = index.get(&prod) else {
                    continue;
                };
                // moving εᵢ from b left past εⱼ from a (j > i) costs c_ij each time
                let mut c = Frac::one();
                for i in 0..m {
                    for j in i + 1..m {
                        let e = a[j] as i64 * b[i] as i64;
                        if e > 0 {
                            c = &c * &comm[i][j].pow(e);
                        }
                    }
                }
                table[ia][ib] = Some((ip, c));
            }
        }
        Arc::new(NilAlgebra {
            name: name.to_string(),
            gens: gens.iter().map(|s| s.to_string()).collect(),
            comm,
            nildeg,
            basis,
            index,
            table,
        })
    }

    /// `L♮[ε₁, ε₂]/(deg ≥ nildeg)`.
    pub fn comm(nildeg: u32) -> Arc<Self> {
        Self::new(
            "A_comm",
            &["ε₁", "ε₂"],
            vec![vec![Frac::one(), Frac::one()], vec![Frac::one(), Frac::one()]],
            nildeg,
        )
    }

    /// `L♮⟨ε₁, ε₂⟩/(ε₂ε₁ − qε₁ε₂, deg ≥ nildeg)`.
    pub fn qplane(nildeg: u32) -> Arc<Self> {
        let q = Frac::var(Var::Q);
        Self::new(
            "A_q",
            &["ε₁", "ε₂"],
            vec![vec![Frac::one(), q], vec![Frac::one(), Frac::one()]],
            nildeg,
        )
    }

    /// `A_q` with a third, central generator `ε₃`.
    pub fn qplane3(nildeg: u32) -> Arc<Self> {
        let q = Frac::var(Var::Q);
        let one = Frac::one();
        Self::new(
            "A_q3",
            &["ε₁", "ε₂", "ε₃"],
            vec![
                vec![one.clone(), q, one.clone()],
                vec![one.clone(), one.clone(), one.clone()],
                vec![one.clone(), one.clone(), one],
            ],
            nildeg,
        )
    }

    /// Commutative algebra on `n` generators.
    pub fn commutative(n: usize, nildeg: u32) -> Arc<Self> {
        let names: Vec<String> = (1..=n).map(|i| format!("ε{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Self::new(&format!("A_comm{n}"), &refs, vec![vec![Frac::one(); n]; n], nildeg)
    }

    /// The ground field itself (`nildeg = 1`, no nilpotents).
    pub fn ground() -> Arc<Self> {
        Self::new("K", &[], vec![], 1)
    }

    /// `L♮[ε]/(ε^nildeg)`.
    pub fn dual_numbers(nildeg: u32) -> Arc<Self> {
        Self::new("K[ε]", &["ε"], vec![vec![Frac::one()]], nildeg)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn nildeg(&self) -> u32 {
        self.nildeg
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u16>] {
        &self.basis
    }

    pub fn monomial_degree(&self, i: usize) -> u32 {
        self.basis[i].iter().map(|&e| e as u32).sum()
    }

    pub fn monomial_index(&self, exps: &[u16]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Commutation scalar `c_{ij}` (`i < j`).
    pub fn commutation(&self, i: usize, j: usize) -> &Frac {
        &self.comm[i][j]
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.ngens()).all(|i| (i + 1..self.ngens()).all(|j| self.comm[i][j].is_one()))
    }

    pub fn monomial_name(&self, i: usize) -> String {
        let mut s = String::new();
        for (g, &e) in self.gens.iter().zip(&self.basis[i]) {
            match e {
                0 => {}
                1 => s.push_str(g),
                _ => s.push_str(&format!("{g}^{e}")),
            }
        }
        s
    }
}

fn push_compositions(out: &mut Vec<Vec<u16>>, cur: &mut Vec<u16>, pos: usize, left: u16) {
    if pos == cur.len() {
        if left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e;
        push_compositions(out, cur, pos + 1, left - e);
    }
    cur[pos] = 0;
}

/// An element `Σ c_m ε^m` of a [`NilAlgebra`]; index 0 is the unital part.
#[derive(Clone, Debug)]
pub struct NilElement<C = Frac> {
    alg: Arc<NilAlgebra>,
    c: Vec<C>,
}

impl<C: Coef> PartialEq for NilElement<C> {
    fn eq(&self, o: &Self) -> bool {
        self.c == o.c && (Arc::ptr_eq(&self.alg, &o.alg) || self.alg == o.alg)
    }
}

impl<C: Coef> NilElement<C> {
    pub fn zero(alg: &Arc<NilAlgebra>) -> Self {
        NilElement {
            alg: alg.clone(),
            c: vec![C::zero(); alg.dim()],
        }
    }

    pub fn constant(alg: &Arc<NilAlgebra>, v: C) -> Self {
        let mut x = Self::zero(alg);
        x.c[0] = v;
        x
    }

    pub fn one(alg: &Arc<NilAlgebra>) -> Self {
        Self::constant(alg, C::one())
    }

    /// The generator `εᵢ` (zero when `nildeg ≤ 1`).
    pub fn gen(alg: &Arc<NilAlgebra>, i: usize) -> Self {
        let mut e = vec![0u16; alg.ngens()];
        e[i] = 1;
        Self::monomial(alg, &e, C::one())
    }

    /// `v·ε^exps` (zero if the monomial is truncated).
    pub fn monomial(alg: &Arc<NilAlgebra>, exps: &[u16], v: C) -> Self {
        let mut x = Self::zero(alg);
        if let Some(i) = alg.monomial_index(exps) {
            x.c[i] = v;
        }
        x
    }

    pub fn from_coords(alg: &Arc<NilAlgebra>, c: Vec<C>) -> Self {
        assert_eq!(c.len(), alg.dim());
        NilElement { alg: alg.clone(), c }
    }

    pub fn algebra(&self) -> &Arc<NilAlgebra> {
        &self.alg
    }

    pub fn coords(&self) -> &[C] {
        &self.c
    }

    pub fn coord(&self, i: usize) -> &C {
        &self.c[i]
    }

    pub fn unital(&self) -> &C {
        &self.c[0]
    }

    /// The element minus its unital part.
    pub fn nil_part(&self) -> Self {
        let mut x = self.clone();
        x.c[0] = C::zero();
        x
    }

    pub fn is_nilpotent(&self) -> bool {
        self.c[0].is_zero()
    }

    /// Lowest degree `k` with a nonzero component, if any.
    pub fn order(&self) -> Option<u32> {
        (0..self.c.len())
            .filter(|&i| !self.c[i].is_zero())
            .map(|i| self.alg.monomial_degree(i))
            .min()
    }

    /// Keeps the components of nil-degree `≤ k`.
    pub fn truncate_degree(&self, k: u32) -> Self {
        let mut x = self.clone();
        for i in 0..x.c.len() {
            if self.alg.monomial_degree(i) > k {
                x.c[i] = C::zero();
            }
        }
        x
    }

    /// The component of nil-degree exactly `k`.
    pub fn component(&self, k: u32) -> Self {
        let mut x = self.clone();
        for i in 0..x.c.len() {
            if self.alg.monomial_degree(i) != k {
                x.c[i] = C::zero();
            }
        }
        x
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, s: &Frac) -> Self {
        self.map(|a| a.scale(s))
    }

    pub fn scale_coef(&self, s: &C) -> Self {
        self.map(|a| s.mul(a))
    }

    fn map(&self, f: impl Fn(&C) -> C) -> Self {
        NilElement {
            alg: self.alg.clone(),
            c: self.c.iter().map(f).collect(),
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        debug_assert!(Arc::ptr_eq(&self.alg, &o.alg) || self.alg == o.alg);
        NilElement {
            alg: self.alg.clone(),
            c: self.c.iter().zip(&o.c).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Normal-ordered product with truncation of degree `≥ nildeg`.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![C::zero(); self.c.len()];
        for (ia, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (ib, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                if let Some((ip, s)) = &self.alg.table[ia][ib] {
                    let t = a.mul(b);
                    let t = if s.is_one() { t } else { t.scale(s) };
                    out[*ip] = out[*ip].add(&t);
                }
            }
        }
        NilElement {
            alg: self.alg.clone(),
            c: out,
        }
    }

    /// Product dropping every component of nil-degree above `k`.
    fn mul_upto(&self, o: &Self, k: u32) -> Self {
        self.mul(o).truncate_degree(k)
    }

    /// Inverse through the finite geometric series in the nilpotent part.
    pub fn invert(&self) -> Result<Self, NilError> {
        let x0inv = self.c[0].inv().ok_or(NilError::NotUnit)?;
        // x = x₀(1 + r) with r = x₀⁻¹·(x − x₀) nilpotent (x₀ is central)
        let r = self.nil_part().scale_coef(&x0inv);
        let mr = r.neg();
        let mut acc = Self::one(&self.alg);
        let mut term = Self::one(&self.alg);
        for _ in 1..self.alg.nildeg.max(1) {
            term = term.mul(&mr);
            acc = acc.add(&term);
        }
        Ok(acc.scale_coef(&x0inv))
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.alg);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|a| a.is_zero())
    }

    pub fn map_coefs(&self, f: &dyn Fn(&C) -> C) -> Self {
        self.map(f)
    }

    /// Reinterprets the coordinates in another coefficient type.
    pub fn convert<D: Coef>(&self, f: &dyn Fn(&C) -> D) -> NilElement<D> {
        NilElement {
            alg: self.alg.clone(),
            c: self.c.iter().map(f).collect(),
        }
    }
}

impl<C: Coef> fmt::Display for NilElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{a}")?;
            } else {
                write!(f, "({a})·{}", self.alg.monomial_name(i))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl<C: Coef> Ring for NilElement<C> {
    fn zero_like(&self) -> Self {
        Self::zero(&self.alg)
    }
    fn one_like(&self) -> Self {
        Self::one(&self.alg)
    }
    fn embed(&self, c: &Frac) -> Self {
        Self::constant(&self.alg, C::from_frac(c))
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
        NilElement::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        NilElement::is_zero(self)
    }
    fn try_inverse(&self) -> Option<Self> {
        self.invert().ok()
    }
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self {
        self.map(|a| a.map_fracs(f))
    }
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError> {
        let c = self.c.iter().map(|a| a.try_map_fracs(f)).collect::<Result<_, _>>()?;
        Ok(NilElement {
            alg: self.alg.clone(),
            c,
        })
    }
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac)) {
        for a in &self.c {
            a.visit_fracs(f);
        }
    }
}

pub fn nil_mul<C: Coef>(x: &NilElement<C>, y: &NilElement<C>) -> NilElement<C> {
    x.mul(y)
}

pub fn nil_invert<C: Coef>(x: &NilElement<C>) -> Result<NilElement<C>, NilError> {
    x.invert()
}

/// Shared shape data for [`WSeries`]: the nilpotent algebra and the combined
/// truncation order `N_W`.
#[derive(Debug)]
pub struct WCtx {
    alg: Arc<NilAlgebra>,
    nw: u32,
    monos: Vec<(u32, u32)>,
    index: HashMap<(u32, u32), usize>,
}

impl PartialEq for WCtx {
    fn eq(&self, o: &Self) -> bool {
        self.nw == o.nw && self.alg == o.alg
    }
}

impl WCtx {
    pub fn new(alg: &Arc<NilAlgebra>, nw: u32) -> Arc<Self> {
        let mut monos = Vec::new();
        for d in 0..=nw {
            for a in (0..=d).rev() {
                monos.push((a, d - a));
            }
        }
        let index = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        Arc::new(WCtx {
            alg: alg.clone(),
            nw,
            monos,
            index,
        })
    }

    pub fn algebra(&self) -> &Arc<NilAlgebra> {
        &self.alg
    }

    pub fn nw(&self) -> u32 {
        self.nw
    }

    pub fn monos(&self) -> &[(u32, u32)] {
        &self.monos
    }

    pub fn mono_index(&self, a: u32, b: u32) -> Option<usize> {
        self.index.get(&(a, b)).copied()
    }
}

/// `Σ W₁^a W₂^b·x_{ab}` with `x_{ab} ∈ A`, keeping terms whose `W`-degree plus
/// nil-degree is at most `N_W`. The kept span is a quotient by a two-sided
/// ideal, so all ring operations and substitutions `W₁ ↦ gW₁ + u` with `u`
/// nilpotent are exact modulo it.
#[derive(Clone, Debug)]
pub struct WSeries<C = Frac> {
    ctx: Arc<WCtx>,
    t: Vec<NilElement<C>>,
}

impl<C: Coef> PartialEq for WSeries<C> {
    fn eq(&self, o: &Self) -> bool {
        self.t == o.t && (Arc::ptr_eq(&self.ctx, &o.ctx) || self.ctx == o.ctx)
    }
}

impl<C: Coef> WSeries<C> {
    pub fn zero(ctx: &Arc<WCtx>) -> Self {
        WSeries {
            ctx: ctx.clone(),
            t: vec![NilElement::zero(&ctx.alg); ctx.monos.len()],
        }
    }

    /// A `W`-free series.
    pub fn from_nil(ctx: &Arc<WCtx>, x: NilElement<C>) -> Self {
        let mut s = Self::zero(ctx);
        s.t[0] = x;
        s.truncated()
    }

    pub fn constant(ctx: &Arc<WCtx>, v: C) -> Self {
        Self::from_nil(ctx, NilElement::constant(&ctx.alg, v))
    }

    pub fn one(ctx: &Arc<WCtx>) -> Self {
        Self::constant(ctx, C::one())
    }

    /// `W₁^a W₂^b·x`.
    pub fn monomial(ctx: &Arc<WCtx>, a: u32, b: u32, x: NilElement<C>) -> Self {
        let mut s = Self::zero(ctx);
        if let Some(i) = ctx.mono_index(a, b) {
            s.t[i] = x;
        }
        s.truncated()
    }

    pub fn w1(ctx: &Arc<WCtx>) -> Self {
        Self::monomial(ctx, 1, 0, NilElement::one(&ctx.alg))
    }

    pub fn w2(ctx: &Arc<WCtx>) -> Self {
        Self::monomial(ctx, 0, 1, NilElement::one(&ctx.alg))
    }

    /// Builds `Σ W₁^a W₂^b·x_{ab}` from `(a, b, x)` triples.
    pub fn from_terms(ctx: &Arc<WCtx>, terms: Vec<(u32, u32, NilElement<C>)>) -> Self {
        let mut s = Self::zero(ctx);
        for (a, b, x) in terms {
            if let Some(i) = ctx.mono_index(a, b) {
                s.t[i] = s.t[i].add(&x);
            }
        }
        s.truncated()
    }

    pub fn ctx(&self) -> &Arc<WCtx> {
        &self.ctx
    }

    pub fn algebra(&self) -> &Arc<NilAlgebra> {
        &self.ctx.alg
    }

    /// Coefficient of `W₁^a W₂^b` (zero beyond the truncation).
    pub fn coeff(&self, a: u32, b: u32) -> NilElement<C> {
        match self.ctx.mono_index(a, b) {
            Some(i) => self.t[i].clone(),
            None => NilElement::zero(&self.ctx.alg),
        }
    }

    pub fn terms(&self) -> &[NilElement<C>] {
        &self.t
    }

    fn truncated(mut self) -> Self {
        self.truncate_in_place(self.ctx.nw);
        self
    }

    fn truncate_in_place(&mut self, k: u32) {
        for (i, &(a, b)) in self.ctx.monos.iter().enumerate() {
            let d = a + b;
            if d > k {
                self.t[i] = NilElement::zero(&self.ctx.alg);
            } else {
                self.t[i] = self.t[i].truncate_degree(k - d);
            }
        }
    }

    /// Drops terms of combined degree above `k` (used after `∂_W`, which
    /// lowers the trusted order by one).
    pub fn truncate_to(&self, k: u32) -> Self {
        let mut s = self.clone();
        s.truncate_in_place(k);
        s
    }

    /// The `W`-free, nil-free part.
    pub fn unital(&self) -> &C {
        self.t[0].unital()
    }

    /// Every component with a nilpotent monomial removed (`ε ↦ 0`).
    pub fn reduce_nil(&self) -> Self {
        let mut s = self.clone();
        for x in s.t.iter_mut() {
            *x = NilElement::constant(&self.ctx.alg, x.unital().clone());
        }
        s
    }

    /// True when every coefficient (of every `W`-monomial) is nilpotent.
    pub fn has_nilpotent_coeffs(&self) -> bool {
        self.t.iter().all(|x| x.is_nilpotent())
    }

    pub fn involves_w2(&self) -> bool {
        self.ctx
            .monos
            .iter()
            .zip(&self.t)
            .any(|(&(_, b), x)| b > 0 && !x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        WSeries {
            ctx: self.ctx.clone(),
            t: self.t.iter().zip(&o.t).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        WSeries {
            ctx: self.ctx.clone(),
            t: self.t.iter().zip(&o.t).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map_nil(|x| x.neg())
    }

    pub fn scale(&self, c: &Frac) -> Self {
        self.map_nil(|x| x.scale(c))
    }

    fn map_nil(&self, f: impl Fn(&NilElement<C>) -> NilElement<C>) -> Self {
        WSeries {
            ctx: self.ctx.clone(),
            t: self.t.iter().map(f).collect(),
        }
    }

    /// Left multiplication of every coefficient by `x ∈ A`.
    pub fn left_mul_nil(&self, x: &NilElement<C>) -> Self {
        self.map_nil(|y| x.mul(y)).truncated()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let nw = self.ctx.nw;
        let mut out = Self::zero(&self.ctx);
        for (i, &(a1, b1)) in self.ctx.monos.iter().enumerate() {
            let x = &self.t[i];
            if x.is_zero() {
                continue;
            }
            for (j, &(a2, b2)) in self.ctx.monos.iter().enumerate() {
                let d = a1 + b1 + a2 + b2;
                if d > nw {
                    continue;
                }
                let y = &o.t[j];
                if y.is_zero() {
                    continue;
                }
                let k = self.ctx.index[&(a1 + a2, b1 + b2)];
                out.t[k] = out.t[k].add(&x.mul_upto(y, nw - d));
            }
        }
        out
    }

    pub fn invert(&self) -> Result<Self, NilError> {
        let x0inv = self.unital().inv().ok_or(NilError::NotUnit)?;
        let mut r = self.clone();
        r.t[0].c[0] = C::zero();
        let mr = r.map_nil(|x| x.scale_coef(&x0inv)).neg();
        let one = Self::one(&self.ctx);
        let mut acc = one.clone();
        let mut term = one;
        // r has combined order ≥ 1, so its (N_W + 1)-th power vanishes
        for _ in 0..self.ctx.nw {
            term = term.mul(&mr);
            acc = acc.add(&term);
        }
        Ok(acc.map_nil(|x| x.scale_coef(&x0inv)))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.t.iter().all(|x| x.is_zero())
    }

    /// `∂/∂W₁` or `∂/∂W₂`. The result is exact up to combined degree `N_W − 1`.
    pub fn derive_w(&self, which: u8) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (i, &(a, b)) in self.ctx.monos.iter().enumerate() {
            let (e, na, nb) = match which {
                1 if a > 0 => (a, a - 1, b),
                2 if b > 0 => (b, a, b - 1),
                _ => continue,
            };
            let k = self.ctx.index[&(na, nb)];
            out.t[k] = self.t[i].scale(&Frac::int(e as i64));
        }
        out
    }

    /// `b(gW₁ + u, W₂)` with coefficients kept on the left:
    /// `Σ b_{ab} (gW₁ + u)^a W₂^b`.
    pub fn subst_w1(&self, g: &NilElement<C>, u: &NilElement<C>) -> Result<Self, NilError> {
        self.subst_w(1, g, u)
    }

    /// Substitutes `W_which ↦ g·W_which + u` (`which ∈ {1, 2}`), keeping the
    /// series coefficients on the left. `u` must be nilpotent.
    pub fn subst_w(&self, which: u8, g: &NilElement<C>, u: &NilElement<C>) -> Result<Self, NilError> {
        if !u.is_nilpotent() {
            return Err(NilError::NonNilpotentShift);
        }
        let ctx = &self.ctx;
        let (wv, other) = if which == 1 {
            (Self::w1(ctx), Self::w2(ctx))
        } else {
            (Self::w2(ctx), Self::w1(ctx))
        };
        let lin = wv.left_mul_nil(g).add(&Self::from_nil(ctx, u.clone()));
        let mut lin_pows = vec![Self::one(ctx)];
        let mut other_pows = vec![Self::one(ctx)];
        for k in 1..=ctx.nw as usize {
            lin_pows.push(lin_pows[k - 1].mul(&lin));
            other_pows.push(other_pows[k - 1].mul(&other));
        }
        let mut out = Self::zero(ctx);
        for (i, &(a, b)) in ctx.monos.iter().enumerate() {
            let x = &self.t[i];
            if x.is_zero() {
                continue;
            }
            let (ks, ko) = if which == 1 { (a, b) } else { (b, a) };
            let term = lin_pows[ks as usize].mul(&other_pows[ko as usize]);
            out = out.add(&term.left_mul_nil(x));
        }
        Ok(out)
    }

    /// `Σ b_{ab}·s₁^a·s₂^b` for substitutions `W₁ ↦ s₁`, `W₂ ↦ s₂` without
    /// constant term (so the combined filtration is respected).
    pub fn compose(&self, s1: &Self, s2: &Self) -> Result<Self, NilError> {
        if !s1.t[0].is_nilpotent() || !s2.t[0].is_nilpotent() {
            return Err(NilError::NonNilpotentShift);
        }
        let ctx = &self.ctx;
        let mut p1 = vec![Self::one(ctx)];
        let mut p2 = vec![Self::one(ctx)];
        for k in 1..=ctx.nw as usize {
            p1.push(p1[k - 1].mul(s1));
            p2.push(p2[k - 1].mul(s2));
        }
        let mut out = Self::zero(ctx);
        for (i, &(a, b)) in ctx.monos.iter().enumerate() {
            let x = &self.t[i];
            if x.is_zero() {
                continue;
            }
            let term = p1[a as usize].mul(&p2[b as usize]);
            out = out.add(&term.left_mul_nil(x));
        }
        Ok(out)
    }

    pub fn map_coefs(&self, f: &dyn Fn(&C) -> C) -> Self {
        self.map_nil(|x| x.map_coefs(f))
    }

    pub fn convert<D: Coef>(&self, f: &dyn Fn(&C) -> D) -> WSeries<D> {
        WSeries {
            ctx: self.ctx.clone(),
            t: self.t.iter().map(|x| x.convert(f)).collect(),
        }
    }
}

impl WSeries<Frac> {
    /// The Taylor shift `f(t + W₁, y + W₂) = Σ W₁^a W₂^b ∂ₜ^a∂ᵧ^b f/(a! b!)`.
    pub fn taylor(ctx: &Arc<WCtx>, f: &Frac) -> Self {
        let mut terms = Vec::new();
        let mut da = f.clone();
        let mut fa = Rat::from_integer(1.into());
        for a in 0..=ctx.nw {
            if a > 0 {
                da = da.derive(Var::T);
                fa *= Rat::from_integer(a.into());
            }
            let mut db = da.clone();
            let mut fb = Rat::from_integer(1.into());
            for b in 0..=ctx.nw - a {
                if b > 0 {
                    db = db.derive(Var::Y);
                    fb *= Rat::from_integer(b.into());
                }
                if db.is_zero() {
                    break;
                }
                let c = db.scale_rat(&(&fa * &fb).recip());
                terms.push((a, b, NilElement::constant(&ctx.alg, c)));
            }
        }
        Self::from_terms(ctx, terms)
    }
}

impl<C: Coef> fmt::Display for WSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &(a, b)) in self.ctx.monos.iter().enumerate() {
            let x = &self.t[i];
            if x.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "[{x}]")?;
            match a {
                0 => {}
                1 => f.write_str("W₁")?,
                _ => write!(f, "W₁^{a}")?,
            }
            match b {
                0 => {}
                1 => f.write_str("W₂")?,
                _ => write!(f, "W₂^{b}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl<C: Coef> Ring for WSeries<C> {
    fn zero_like(&self) -> Self {
        Self::zero(&self.ctx)
    }
    fn one_like(&self) -> Self {
        Self::one(&self.ctx)
    }
    fn embed(&self, c: &Frac) -> Self {
        Self::constant(&self.ctx, C::from_frac(c))
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
        WSeries::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        WSeries::is_zero(self)
    }
    fn try_inverse(&self) -> Option<Self> {
        self.invert().ok()
    }
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self {
        self.map_nil(|x| Ring::map_fracs(x, f))
    }
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError> {
        let t = self.t.iter().map(|x| x.try_map_fracs(f)).collect::<Result<_, _>>()?;
        Ok(WSeries {
            ctx: self.ctx.clone(),
            t,
        })
    }
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac)) {
        for x in &self.t {
            x.visit_fracs(f);
        }
    }
    fn derive_var(&self, v: CoeffVar) -> Option<Self> {
        match v {
            CoeffVar::T => Some(Ring::map_fracs(self, &|f| f.derive(Var::T))),
            CoeffVar::Y => Some(Ring::map_fracs(self, &|f| f.derive(Var::Y))),
            CoeffVar::W1 => Some(self.derive_w(1)),
            CoeffVar::W2 => Some(self.derive_w(2)),
        }
    }
}

/// `b(gW₁ + u)`.
pub fn wseries_subst<C: Coef>(
    b: &WSeries<C>,
    g: &NilElement<C>,
    u: &NilElement<C>,
) -> Result<WSeries<C>, NilError> {
    b.subst_w1(g, u)
}

/// Seeded random elements for property checks.
pub mod sample {
    use super::*;
    use rand::Rng;

    /// A small random coefficient: an integer in `[-2, 2]`, sometimes times `t`.
    pub fn coeff<G: Rng>(rng: &mut G) -> Frac {
        let k = Frac::int(rng.gen_range(-2..=2));
        if rng.gen_bool(0.25) {
            &k * &Frac::var(Var::T)
        } else {
            k
        }
    }

    /// A random nilpotent element supported on monomials in the generators
    /// `gens` (a subset of the algebra's generators).
    pub fn nilpotent<G: Rng>(alg: &Arc<NilAlgebra>, gens: &[usize], rng: &mut G) -> NilElement {
        let mut c = vec![Frac::zero(); alg.dim()];
        for (i, m) in alg.basis().iter().enumerate().skip(1) {
            let allowed = m.iter().enumerate().all(|(g, &e)| e == 0 || gens.contains(&g));
            if allowed && rng.gen_bool(0.6) {
                c[i] = coeff(rng);
            }
        }
        NilElement::from_coords(alg, c)
    }

    /// `1 + nilpotent`.
    pub fn unipotent<G: Rng>(alg: &Arc<NilAlgebra>, gens: &[usize], rng: &mut G) -> NilElement {
        NilElement::one(alg).add(&nilpotent(alg, gens, rng))
    }

    /// A series in `W₁` with nilpotent coefficients.
    pub fn nil_series<G: Rng>(ctx: &Arc<WCtx>, gens: &[usize], rng: &mut G) -> WSeries {
        let terms = (0..=ctx.nw())
            .map(|a| (a, 0, nilpotent(ctx.algebra(), gens, rng)))
            .collect();
        WSeries::from_terms(ctx, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = NilElement<Frac>;

    #[test]
    fn qplane_rule() {
        let a = NilAlgebra::qplane(4);
        let e = E::gen(&a, 0);
        let f = E::gen(&a, 1);
        let q = Frac::var(Var::Q);
        assert_eq!(f.mul(&e), e.mul(&f).scale(&q));
        assert_eq!(e.commutator(&f), e.mul(&f).scale(&(&Frac::one() - &q)));
    }

    #[test]
    fn nilpotency_and_inverse() {
        let a = NilAlgebra::dual_numbers(2);
        let e = E::gen(&a, 0);
        assert!(e.mul(&e).is_zero());
        let a3 = NilAlgebra::dual_numbers(3);
        let e = E::gen(&a3, 0);
        let one = E::one(&a3);
        let x = one.add(&e);
        assert_eq!(x.mul(&one.sub(&e)), one.sub(&e.mul(&e)));
        assert_eq!(x.invert().unwrap(), one.sub(&e).add(&e.mul(&e)));
        assert_eq!(E::gen(&a3, 0).invert(), Err(NilError::NotUnit));
    }

    #[test]
    fn dimensions() {
        assert_eq!(NilAlgebra::qplane(4).dim(), 10);
        assert_eq!(NilAlgebra::qplane3(4).dim(), 20);
        assert_eq!(NilAlgebra::ground().dim(), 1);
    }

    #[test]
    fn substitution_examples() {
        let a = NilAlgebra::comm(4);
        let ctx = WCtx::new(&a, 4);
        let eps = E::gen(&a, 0);
        let one = E::one(&a);
        let w1 = WSeries::w1(&ctx);
        let r = wseries_subst(&w1, &one, &eps).unwrap();
        assert_eq!(r, w1.add(&WSeries::from_nil(&ctx, eps.clone())));
        let g = one.add(&E::gen(&a, 1));
        let r = wseries_subst(&w1.mul(&w1), &g, &E::zero(&a)).unwrap();
        assert_eq!(r, w1.mul(&w1).left_mul_nil(&g.mul(&g)));
        assert_eq!(wseries_subst(&w1, &one, &one), Err(NilError::NonNilpotentShift));
    }

    #[test]
    fn taylor_is_multiplicative() {
        let a = NilAlgebra::comm(3);
        let ctx = WCtx::new(&a, 4);
        let f = &Frac::var(Var::T) / &(&Frac::var(Var::Y) + &Frac::one());
        let g = &Frac::var(Var::T) * &Frac::var(Var::T);
        let lhs = WSeries::taylor(&ctx, &(&f * &g));
        let rhs = WSeries::taylor(&ctx, &f).mul(&WSeries::taylor(&ctx, &g));
        assert_eq!(lhs, rhs);
        let inv = WSeries::taylor(&ctx, &f).invert().unwrap();
        assert_eq!(inv, WSeries::taylor(&ctx, &f.inv().unwrap()));
    }
}
