//! Ring interface shared by the coefficient carriers (function field elements,
//! nilpotent algebra elements and truncated `W`-series).

use std::fmt;

use crate::qscalar::{Frac, ScalarError, Var};

/// Variables a coefficient derivation can act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffVar {
    T,
    Y,
    W1,
    W2,
}

impl fmt::Display for CoeffVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffVar::T => "t",
            CoeffVar::Y => "y",
            CoeffVar::W1 => "W₁",
            CoeffVar::W2 => "W₂",
        })
    }
}

/// A (possibly noncommutative) unital ring whose elements are built from
/// [`Frac`] coefficients over a central base field.
///
/// Elements carry their own context (for example the nilpotent algebra they
/// live in), so constants are produced from an existing element.
pub trait Ring: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    /// `c·1` in the same context.
    fn embed(&self, c: &Frac) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn times(&self, o: &Self) -> Self;
    /// Multiplication by a central element of the base field.
    fn scale(&self, c: &Frac) -> Self;
    fn is_zero(&self) -> bool;
    fn try_inverse(&self) -> Option<Self>;
    /// Applies `f` to every base-field coefficient. `f` must be additive and
    /// multiplicative (a ring endomorphism of the base field) or a derivation.
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self;
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError>;
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac));

    fn commutator(&self, o: &Self) -> Self {
        self.times(o).minus(&o.times(self))
    }

    fn pow(&self, k: u32) -> Self {
        let mut acc = self.one_like();
        for _ in 0..k {
            acc = acc.times(self);
        }
        acc
    }

    /// `Σᵏ` applied to a closed-form sequence value.
    fn shift_index(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        self.map_fracs(&|f| f.shift_index(k))
    }

    /// Value at sequence index `n` of a closed-form value.
    fn eval_index(&self, n: u32) -> Result<Self, ScalarError> {
        self.try_map_fracs(&|f| f.eval_index(n))
    }

    /// A coefficient derivation. The default handles `∂/∂t` and `∂/∂y`
    /// through the base field; carriers with `W`-variables override it.
    fn derive_var(&self, v: CoeffVar) -> Option<Self> {
        match v {
            CoeffVar::T => Some(self.map_fracs(&|f| f.derive(Var::T))),
            CoeffVar::Y => Some(self.map_fracs(&|f| f.derive(Var::Y))),
            CoeffVar::W1 | CoeffVar::W2 => None,
        }
    }

    /// True when no sequence index symbol occurs.
    fn is_index_free(&self) -> bool {
        let mut free = true;
        self.visit_fracs(&mut |f| free &= f.is_index_free());
        free
    }
}

impl Ring for Frac {
    fn zero_like(&self) -> Self {
        Frac::zero()
    }
    fn one_like(&self) -> Self {
        Frac::one()
    }
    fn embed(&self, c: &Frac) -> Self {
        c.clone()
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
        self.mul(c)
    }
    fn is_zero(&self) -> bool {
        Frac::is_zero(self)
    }
    fn try_inverse(&self) -> Option<Self> {
        self.inv().ok()
    }
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self {
        f(self)
    }
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError> {
        f(self)
    }
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac)) {
        f(self)
    }
    fn shift_index(&self, k: u32) -> Self {
        Frac::shift_index(self, k)
    }
    fn eval_index(&self, n: u32) -> Result<Self, ScalarError> {
        Frac::eval_index(self, n)
    }
}

/// Coordinates of nilpotent-algebra elements: the base field itself, or
/// polynomials over it in free parameters (used by the classifier).
pub trait Coef: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_frac(f: &Frac) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: &Frac) -> Self;
    fn is_zero(&self) -> bool;
    /// Inverse, when the element is an invertible base-field element.
    fn inv(&self) -> Option<Self>;
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self;
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError>;
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac));
}

impl Coef for Frac {
    fn zero() -> Self {
        Frac::zero()
    }
    fn one() -> Self {
        Frac::one()
    }
    fn from_frac(f: &Frac) -> Self {
        f.clone()
    }
    fn add(&self, o: &Self) -> Self {
        Frac::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Frac::sub(self, o)
    }
    fn neg(&self) -> Self {
        Frac::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Frac::mul(self, o)
    }
    fn scale(&self, c: &Frac) -> Self {
        Frac::mul(self, c)
    }
    fn is_zero(&self) -> bool {
        Frac::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        Frac::inv(self).ok()
    }
    fn map_fracs(&self, f: &dyn Fn(&Frac) -> Frac) -> Self {
        f(self)
    }
    fn try_map_fracs(
        &self,
        f: &dyn Fn(&Frac) -> Result<Frac, ScalarError>,
    ) -> Result<Self, ScalarError> {
        f(self)
    }
    fn visit_fracs(&self, f: &mut dyn FnMut(&Frac)) {
        f(self)
    }
}
