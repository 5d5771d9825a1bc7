//! The function fields `K(t)` and `K(t, y)` of the three examples with their
//! endomorphism `σ`, the iterative q-skew derivations `θ⁽ⁿ⁾` and the partial
//! derivatives.

use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::qscalar::{q_binom, q_factorial, Frac, MPoly, Mono, Rat, Var};
use crate::report::Check;

/// An element of `L♮ = K(t)` or `K(t, y)`.
pub type RatFn = Frac;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleId {
    /// `ℂ(t)` with `σ(t) = qt`.
    CT,
    /// `ℂ(t, y)`, `y = t^α`, with `σ(y) = sy`.
    CTTalpha,
    /// `ℂ(t, y)`, `y = log t`, with `σ(y) = y + λ`.
    CTLogt,
}

impl ExampleId {
    pub const ALL: [ExampleId; 3] = [ExampleId::CT, ExampleId::CTTalpha, ExampleId::CTLogt];

    pub fn tag(self) -> &'static str {
        match self {
            ExampleId::CT => "c_t",
            ExampleId::CTTalpha => "c_t_talpha",
            ExampleId::CTLogt => "c_t_logt",
        }
    }

    pub fn has_y(self) -> bool {
        self != ExampleId::CT
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ExampleId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "c_t" => Ok(ExampleId::CT),
            "c_t_talpha" => Ok(ExampleId::CTTalpha),
            "c_t_logt" => Ok(ExampleId::CTLogt),
            _ => Err(format!("unknown example `{s}`")),
        }
    }
}

/// Variables of the derivation basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldVar {
    T,
    Y,
}

impl FieldVar {
    pub fn var(self) -> Var {
        match self {
            FieldVar::T => Var::T,
            FieldVar::Y => Var::Y,
        }
    }
}

/// The q-SI σ-differential structure of one example.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QSDStructure {
    pub example: ExampleId,
}

impl QSDStructure {
    pub fn new(example: ExampleId) -> Self {
        QSDStructure { example }
    }

    /// `{∂/∂t}` or `{∂/∂t, ∂/∂y}`.
    pub fn derivation_basis(&self) -> &'static [FieldVar] {
        if self.example.has_y() {
            &[FieldVar::T, FieldVar::Y]
        } else {
            &[FieldVar::T]
        }
    }
}

pub fn t() -> RatFn {
    Frac::var(Var::T)
}

pub fn y() -> RatFn {
    Frac::var(Var::Y)
}

fn scale_mono(m: &Mono, v: Var, by: Var, k: u16) -> Mono {
    let e = m.exp(v);
    m.with(by, m.exp(by) + e * k)
}

/// `σᵏ(f)`.
pub fn sigma_pow(st: &QSDStructure, k: u32, f: &RatFn) -> RatFn {
    if k == 0 {
        return f.clone();
    }
    let k16 = k as u16;
    let scale_y = st.example == ExampleId::CTTalpha;
    let mut out = if f.involves(Var::T) || (scale_y && f.involves(Var::Y)) {
        f.map_monomials(&|m: &Mono| {
            let mut m2 = scale_mono(m, Var::T, Var::Q, k16);
            if scale_y {
                m2 = scale_mono(&m2, Var::Y, Var::S, k16);
            }
            (Rat::one(), m2)
        })
    } else {
        f.clone()
    };
    if st.example == ExampleId::CTLogt && out.involves(Var::Y) {
        let p = MPoly::var(Var::Y).add(&MPoly::var(Var::Lam).scale(&Rat::from_integer(k.into())));
        out = out.subst_auto(Var::Y, &p);
    }
    out
}

/// The field endomorphism `σ`.
pub fn sigma_apply(st: &QSDStructure, f: &RatFn) -> RatFn {
    sigma_pow(st, 1, f)
}

/// `θ⁽¹⁾(f) = (σ(f) − f)/((q − 1)t)`.
pub fn theta1(st: &QSDStructure, f: &RatFn) -> RatFn {
    let d = &sigma_apply(st, f) - f;
    if d.is_zero() {
        return d;
    }
    let den = &(&Frac::var(Var::Q) - &Frac::one()) * &t();
    &d / &den
}

/// `θ⁽⁰⁾(f), …, θ⁽ⁿ⁾(f)`.
pub fn theta_table(st: &QSDStructure, n: u32, f: &RatFn) -> Vec<RatFn> {
    let mut iter = f.clone();
    let mut out = vec![f.clone()];
    for i in 1..=n {
        iter = theta1(st, &iter);
        out.push(&iter / &q_factorial(i));
    }
    out
}

/// `θ⁽ⁿ⁾(f) = (θ⁽¹⁾)ⁿ(f)/[n]_q!`.
pub fn theta_apply(st: &QSDStructure, n: u32, f: &RatFn) -> RatFn {
    theta_table(st, n, f).pop().unwrap()
}

/// Formal partial derivative.
pub fn derive(f: &RatFn, var: FieldVar) -> RatFn {
    f.derive(var.var())
}

/// The orbit `n ↦ σⁿ(b)` in closed form, written with the index symbols
/// `Q = qⁿ`, `Qα = sⁿ` and `N = n`.
pub fn orbit_closed_form(st: &QSDStructure, b: &RatFn) -> RatFn {
    assert!(b.is_index_free(), "orbit of an element that already involves index symbols");
    let scale_y = st.example == ExampleId::CTTalpha;
    let mut out = if b.involves(Var::T) || (scale_y && b.involves(Var::Y)) {
        b.map_monomials(&|m: &Mono| {
            let mut m2 = scale_mono(m, Var::T, Var::SeqQ, 1);
            if scale_y {
                m2 = scale_mono(&m2, Var::Y, Var::SeqS, 1);
            }
            (Rat::one(), m2)
        })
    } else {
        b.clone()
    };
    if st.example == ExampleId::CTLogt && out.involves(Var::Y) {
        let p = MPoly::var(Var::Y).add(&MPoly::var(Var::Lam).mul(&MPoly::var(Var::SeqN)));
        out = out.subst_auto(Var::Y, &p);
    }
    out
}

fn diff_witness(lhs: &RatFn, rhs: &RatFn, point: Option<&[(Var, Rat)]>) -> Option<String> {
    if let Some(pt) = point {
        return match (lhs.eval_at(pt), rhs.eval_at(pt)) {
            (Ok(a), Ok(b)) if a == b => None,
            (Ok(a), Ok(b)) => Some(format!("at the sample point lhs − rhs = {}", &a - &b)),
            _ => Some("sample point is a pole".to_string()),
        };
    }
    if lhs == rhs {
        None
    } else {
        Some(format!("lhs − rhs = {}", lhs - rhs))
    }
}

/// Checks the four axioms of a q-SI σ-differential algebra on the samples for
/// all `i, j ≤ depth`. Returns one check per axiom.
pub fn check_qsd_axioms(st: &QSDStructure, samples: &[RatFn], depth: u32) -> Vec<Check> {
    qsd_axioms(st, samples, depth, None)
}

/// As [`check_qsd_axioms`], comparing both sides after substituting the
/// rational values in `point` (a fast smoke test, not a proof).
pub fn check_qsd_axioms_at(
    st: &QSDStructure,
    samples: &[RatFn],
    depth: u32,
    point: &[(Var, Rat)],
) -> Vec<Check> {
    qsd_axioms(st, samples, depth, Some(point))
}

fn qsd_axioms(st: &QSDStructure, samples: &[RatFn], depth: u32, point: Option<&[(Var, Rat)]>) -> Vec<Check> {
    assert!(depth >= 1, "depth must be positive");
    let ex = st.example;
    let mode = if point.is_some() { " numeric" } else { "" };
    let params = format!("example={ex} samples={} depth={depth}{mode}", samples.len());
    let tables: Vec<Vec<RatFn>> = samples
        .iter()
        .map(|a| theta_table(st, 2 * depth, a))
        .collect();
    let qf = Frac::var(Var::Q);

    let mut w1 = None;
    for (a, tab) in samples.iter().zip(&tables) {
        if let Some(w) = diff_witness(&tab[0], a, point) {
            w1 = Some(format!("a = {a}: {w}"));
            break;
        }
    }

    let mut w2 = None;
    'ax2: for a in samples {
        let sa = sigma_apply(st, a);
        let lhs_tab = theta_table(st, depth, &sa);
        let rhs_tab = theta_table(st, depth, a);
        for i in 0..=depth {
            let lhs = &lhs_tab[i as usize];
            let rhs = &qf.pow(i as i64) * &sigma_apply(st, &rhs_tab[i as usize]);
            if let Some(w) = diff_witness(lhs, &rhs, point) {
                w2 = Some(format!("a = {a}, i = {i}: {w}"));
                break 'ax2;
            }
        }
    }

    let mut w3 = None;
    'ax3: for (ia, a) in samples.iter().enumerate() {
        for (ib, b) in samples.iter().enumerate() {
            let ab = a * b;
            let ab_tab = theta_table(st, depth, &ab);
            for i in 0..=depth {
                let mut rhs = Frac::zero();
                for l in 0..=i {
                    let m = i - l;
                    let term = &sigma_pow(st, m, &tables[ia][l as usize]) * &tables[ib][m as usize];
                    rhs = &rhs + &term;
                }
                if let Some(w) = diff_witness(&ab_tab[i as usize], &rhs, point) {
                    w3 = Some(format!("a = {a}, b = {b}, i = {i}: {w}"));
                    break 'ax3;
                }
            }
        }
    }

    let mut w4 = None;
    'ax4: for (a, tab) in samples.iter().zip(&tables) {
        for j in 0..=depth {
            let inner = theta_table(st, depth, &tab[j as usize]);
            for i in 0..=depth {
                let rhs = &q_binom(i + j, i) * &tab[(i + j) as usize];
                if let Some(w) = diff_witness(&inner[i as usize], &rhs, point) {
                    w4 = Some(format!("a = {a}, i = {i}, j = {j}: {w}"));
                    break 'ax4;
                }
            }
        }
    }

    vec![
        Check::from_witness("axiom1_theta0_identity", params.clone(), w1),
        Check::from_witness("axiom2_theta_sigma", params.clone(), w2),
        Check::from_witness("axiom3_leibniz", params.clone(), w3),
        Check::from_witness("axiom4_iterativity", params, w4),
    ]
}

/// A small fixed sample set per example, used by the verifiers.
pub fn default_samples(ex: ExampleId) -> Vec<RatFn> {
    let one = Frac::one();
    let t = t();
    let y = y();
    let mut v = vec![
        t.clone(),
        t.inv().unwrap(),
        &(&t * &t) + &one,
        &one / &(&t + &one),
        &Frac::var(Var::Q) * &t,
    ];
    if ex.has_y() {
        v.push(y.clone());
        v.push(&y / &t);
        v.push(&(&y * &t) + &Frac::int(2));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(e: ExampleId) -> QSDStructure {
        QSDStructure::new(e)
    }

    #[test]
    fn sigma_examples() {
        let q = Frac::var(Var::Q);
        assert_eq!(sigma_apply(&st(ExampleId::CT), &(&t() * &t())), &(&q * &q) * &(&t() * &t()));
        let s = Frac::var(Var::S);
        let yt = &y() / &t();
        assert_eq!(sigma_apply(&st(ExampleId::CTTalpha), &yt), &(&s / &q) * &yt);
        assert_eq!(sigma_apply(&st(ExampleId::CTLogt), &y()), &y() + &Frac::var(Var::Lam));
    }

    #[test]
    fn theta_examples() {
        assert!(theta_apply(&st(ExampleId::CT), 1, &t()).is_one());
        let q = Frac::var(Var::Q);
        let one = Frac::one();
        let alpha = &(&Frac::var(Var::S) - &one) / &(&q - &one);
        assert_eq!(theta_apply(&st(ExampleId::CTTalpha), 1, &y()), &alpha * &(&y() / &t()));
        let expect = &Frac::var(Var::Lam) / &(&(&q - &one) * &t());
        assert_eq!(theta_apply(&st(ExampleId::CTLogt), 1, &y()), expect);
    }

    #[test]
    fn derive_examples() {
        assert_eq!(derive(&(&t() * &t()), FieldVar::T), &Frac::int(2) * &t());
        assert_eq!(derive(&(&y() / &t()), FieldVar::Y), t().inv().unwrap());
        assert!(derive(&Frac::var(Var::Q), FieldVar::T).is_zero());
    }

    #[test]
    fn orbit_is_sigma_power() {
        for ex in ExampleId::ALL {
            let s = st(ex);
            for b in default_samples(ex) {
                let closed = orbit_closed_form(&s, &b);
                for n in 0..4 {
                    assert_eq!(closed.eval_index(n).unwrap(), sigma_pow(&s, n, &b));
                }
            }
        }
    }

    #[test]
    fn axioms_on_ct() {
        let samples = vec![t(), t().inv().unwrap(), &(&t() * &t()) + &Frac::one()];
        for c in check_qsd_axioms(&st(ExampleId::CT), &samples, 5) {
            assert!(c.passed(), "{c:?}");
        }
    }
}
