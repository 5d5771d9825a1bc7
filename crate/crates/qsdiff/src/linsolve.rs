//! Polynomials in free parameters over the fraction field, and a sparse
//! elimination solver for systems that are linear in a chosen set of them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::algebra::Coef;
use crate::qscalar::{Frac, ScalarError};

/// Parameter identifier.
pub type Param = u32;

/// A monomial in the parameters: sorted multiset of identifiers.
pub type PMono = Vec<Param>;

/// `Σ c_m·p^m` with `c_m ∈ Frac`.
#[derive(Clone, PartialEq, Default)]
pub struct ParamPoly {
    terms: BTreeMap<PMono, Frac>,
}

impl ParamPoly {
    pub fn constant(c: Frac) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        ParamPoly { terms }
    }

    pub fn param(p: Param) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![p], Frac::one());
        ParamPoly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMono, &Frac)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Frac {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Frac::zero)
    }

    pub fn as_constant(&self) -> Option<Frac> {
        match self.terms.len() {
            0 => Some(Frac::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn params(&self) -> BTreeSet<Param> {
        self.terms.keys().flatten().copied().collect()
    }

    fn add_term(&mut self, m: PMono, c: Frac) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Replaces parameters by polynomials; parameters without an entry stay.
    pub fn substitute(&self, s: &HashMap<Param, ParamPoly>) -> Self {
        if !self.terms.keys().flatten().any(|p| s.contains_key(p)) {
            return self.clone();
        }
        let mut out = ParamPoly::default();
        for (m, c) in &self.terms {
            let mut acc = ParamPoly::constant(c.clone());
            let mut keep = Vec::new();
            for p in m {
                match s.get(p) {
                    Some(v) => acc = Coef::mul(&acc, v),
                    None => keep.push(*p),
                }
            }
            for (am, ac) in acc.terms {
                let mut nm = am;
                nm.extend_from_slice(&keep);
                nm.sort_unstable();
                out.add_term(nm, ac);
            }
        }
        out
    }

    /// Evaluates every parameter to a field element.
    pub fn evaluate(&self, vals: &dyn Fn(Param) -> Frac) -> Frac {
        let mut acc = Frac::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for p in m {
                t = &t * &vals(*p);
            }
            acc = &acc + &t;
        }
        acc
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_empty() {
                write!(f, "{c}")?;
            } else {
                if !c.is_one() {
                    write!(f, "({c})·")?;
                }
                let names: Vec<String> = m.iter().map(|p| format!("p{p}")).collect();
                f.write_str(&names.join("·"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Coef for ParamPoly {
    fn zero() -> Self {
        ParamPoly::default()
    }
    fn one() -> Self {
        ParamPoly::constant(Frac::one())
    }
    fn from_frac(f: &Frac) -> Self {
        ParamPoly::constant(f.clone())
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
    fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }
    fn neg(&self) -> Self {
        ParamPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let mut out = ParamPoly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = m1.clone();
                m.extend_from_slice(m2);
                m.sort_unstable();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }
    fn scale(&self, c: &Frac) -> Self {
        if c.is_zero() {
            return ParamPoly::default();
        }
        ParamPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn inv(&self) -> Option<Self> {
        let c = self.as_constant()?;
        c.inv().ok().map(ParamPoly::constant)
    }
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self {
        let mut out = ParamPoly::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError> {
        let mut out = ParamPoly::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac)) {
        for c in self.terms.values() {
            f(c);
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("equation is not linear in the unknowns: {0}")]
    Nonlinear(String),
}

/// `Σ c_u·u + rest`, linear in the unknowns `u`.
#[derive(Clone, Debug, Default)]
struct Lin {
    u: BTreeMap<Param, Frac>,
    rest: ParamPoly,
}

impl Lin {
    fn from_poly(p: &ParamPoly, unknown: &dyn Fn(Param) -> bool) -> Result<Self, SolveError> {
        let mut lin = Lin::default();
        for (m, c) in &p.terms {
            let nu = m.iter().filter(|&&x| unknown(x)).count();
            match nu {
                0 => lin.rest.add_term(m.clone(), c.clone()),
                1 if m.len() == 1 => {
                    lin.u.insert(m[0], c.clone());
                }
                _ => return Err(SolveError::Nonlinear(p.to_string())),
            }
        }
        Ok(lin)
    }

    fn add_scaled(&mut self, o: &Lin, c: &Frac) {
        for (v, a) in &o.u {
            let t = a * c;
            match self.u.get_mut(v) {
                Some(x) => {
                    *x = &*x + &t;
                    if x.is_zero() {
                        self.u.remove(v);
                    }
                }
                None => {
                    if !t.is_zero() {
                        self.u.insert(*v, t);
                    }
                }
            }
        }
        self.rest = Coef::add(&self.rest, &o.rest.scale(c));
    }

    fn to_poly(&self) -> ParamPoly {
        let mut p = self.rest.clone();
        for (v, c) in &self.u {
            p.add_term(vec![*v], c.clone());
        }
        p
    }
}

/// Result of [`solve_linear`].
#[derive(Clone, Debug, Default)]
pub struct LinearSolution {
    /// Eliminated unknowns expressed through the free ones and other parameters.
    pub pivots: HashMap<Param, ParamPoly>,
    /// Unknowns left free.
    pub free: Vec<Param>,
    /// Polynomials in non-unknown parameters that must vanish for consistency.
    pub residual: Vec<ParamPoly>,
}

/// Solves `eqs = 0` for the parameters selected by `unknown`, which must occur
/// linearly with field coefficients. Unknowns with a smaller `rank` are
/// eliminated first, so high-rank unknowns stay free when there is a choice.
pub fn solve_linear(
    eqs: &[ParamPoly],
    unknowns: &[Param],
    rank: &dyn Fn(Param) -> u32,
) -> Result<LinearSolution, SolveError> {
    let uset: BTreeSet<Param> = unknowns.iter().copied().collect();
    let is_u = |p: Param| uset.contains(&p);
    let mut rows = Vec::with_capacity(eqs.len());
    for e in eqs {
        if Coef::is_zero(e) {
            continue;
        }
        rows.push(Lin::from_poly(e, &is_u)?);
    }
    rows.sort_by_key(|r| r.u.len());

    let mut pivots: HashMap<Param, Lin> = HashMap::new();
    let mut order: Vec<Param> = Vec::new();
    let mut residual = Vec::new();
    for mut row in rows {
        // substitute known pivots until none remain
        loop {
            let Some(v) = row.u.keys().copied().find(|v| pivots.contains_key(v)) else {
                break;
            };
            let c = row.u.remove(&v).unwrap();
            row.add_scaled(&pivots[&v], &c);
        }
        if row.u.is_empty() {
            if !Coef::is_zero(&row.rest) {
                residual.push(row.rest);
            }
            continue;
        }
        let v = *row
            .u
            .keys()
            .min_by_key(|&&v| (rank(v), v))
            .expect("nonempty row");
        let c = row.u.remove(&v).unwrap();
        // v = −(rest of row)/c
        let minv = c.inv().expect("nonzero pivot").neg();
        let mut expr = Lin::default();
        expr.add_scaled(&row, &minv);
        pivots.insert(v, expr);
        order.push(v);
    }
    // back substitution in reverse creation order
    let mut done: HashMap<Param, Lin> = HashMap::new();
    for &v in order.iter().rev() {
        let mut e = pivots.remove(&v).unwrap();
        loop {
            let Some(w) = e.u.keys().copied().find(|w| done.contains_key(w)) else {
                break;
            };
            let c = e.u.remove(&w).unwrap();
            e.add_scaled(&done[&w], &c);
        }
        done.insert(v, e);
    }
    let free = unknowns
        .iter()
        .copied()
        .filter(|u| !done.contains_key(u))
        .collect();
    let mut residual_dedup: Vec<ParamPoly> = Vec::new();
    for r in residual {
        if !residual_dedup.contains(&r) {
            residual_dedup.push(r);
        }
    }
    Ok(LinearSolution {
        pivots: done.into_iter().map(|(k, v)| (k, v.to_poly())).collect(),
        free,
        residual: residual_dedup,
    })
}

/// Allocates fresh parameter identifiers.
#[derive(Debug, Default)]
pub struct ParamPool {
    next: Param,
}

impl ParamPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> Param {
        let p = self.next;
        self.next += 1;
        p
    }

    pub fn count(&self) -> Param {
        self.next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: Param) -> ParamPoly {
        ParamPoly::param(i)
    }
    fn c(k: i64) -> ParamPoly {
        ParamPoly::constant(Frac::int(k))
    }

    #[test]
    fn arithmetic() {
        let a = Coef::add(&p(0), &c(1));
        let sq = Coef::mul(&a, &a);
        let expect = Coef::add(&Coef::add(&Coef::mul(&p(0), &p(0)), &p(0).scale(&Frac::int(2))), &c(1));
        assert_eq!(sq, expect);
        let mut s = HashMap::new();
        s.insert(0, c(2));
        assert_eq!(sq.substitute(&s), c(9));
    }

    #[test]
    fn solve_small_system() {
        // x0 + x1 = p9, x0 − x1 = 1, with x2 free
        let e1 = Coef::sub(&Coef::add(&p(0), &p(1)), &p(9));
        let e2 = Coef::sub(&Coef::sub(&p(0), &p(1)), &c(1));
        let sol = solve_linear(&[e1, e2], &[0, 1, 2], &|_| 0).unwrap();
        assert_eq!(sol.free, vec![2]);
        let half = Frac::ratio(1, 2);
        assert_eq!(sol.pivots[&0], Coef::add(&p(9), &c(1)).scale(&half));
        assert_eq!(sol.pivots[&1], Coef::sub(&p(9), &c(1)).scale(&half));
        assert!(sol.residual.is_empty());
    }

    #[test]
    fn inconsistency_becomes_residual() {
        let e1 = Coef::sub(&p(0), &p(5));
        let e2 = Coef::sub(&p(0), &Coef::mul(&p(6), &p(6)));
        let sol = solve_linear(&[e1, e2], &[0], &|_| 0).unwrap();
        assert_eq!(sol.residual.len(), 1);
        assert!(solve_linear(&[Coef::mul(&p(0), &p(0))], &[0], &|_| 0).is_err());
    }
}
