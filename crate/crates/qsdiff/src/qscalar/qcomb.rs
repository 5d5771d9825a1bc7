//! q-integers, q-factorials and q-binomial coefficients, including the
//! `α`-binomials with `s = q^α`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::frac::{Frac, ScalarError};
use super::poly::Var;
use super::Rat;

fn q() -> Frac {
    Frac::var(Var::Q)
}

/// `qᵏ` for any integer `k`.
pub fn q_pow(k: i64) -> Frac {
    Frac::var_pow(Var::Q, k)
}

/// `[n]_q = 1 + q + … + q^{n−1}`; `[0]_q = 0`.
pub fn q_int(n: u32) -> Frac {
    let mut acc = Frac::zero();
    for i in 0..n {
        acc = &acc + &q_pow(i as i64);
    }
    acc
}

/// `[n]_q!`.
pub fn q_factorial(n: u32) -> Frac {
    static CACHE: OnceLock<Mutex<Vec<Frac>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Frac::one()]));
    {
        let c = cache.lock().unwrap();
        if let Some(v) = c.get(n as usize) {
            return v.clone();
        }
    }
    let mut c = cache.lock().unwrap();
    while c.len() <= n as usize {
        let k = c.len() as u32;
        let next = &c[k as usize - 1] * &q_int(k);
        c.push(next);
    }
    c[n as usize].clone()
}

/// The Gaussian binomial `binom(m, n)_q`, zero when `m < n`.
pub fn q_binom(m: u32, n: u32) -> Frac {
    if n > m {
        return Frac::zero();
    }
    if n == 0 || n == m {
        return Frac::one();
    }
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Frac>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(m, n)) {
        return v.clone();
    }
    let v = &(&q_factorial(m) / &q_factorial(m - n)) / &q_factorial(n);
    cache.lock().unwrap().insert((m, n), v.clone());
    v
}

/// `[α − j]_q = (s − q^j)/(q^j (q − 1))`.
pub fn q_int_alpha(j: i64) -> Frac {
    let s = Frac::var(Var::S);
    let num = &s - &q_pow(j);
    let den = &q_pow(j) * &(&q() - &Frac::one());
    &num / &den
}

/// `binom(α, n)_q = [α]_q [α−1]_q ⋯ [α−n+1]_q / [n]_q!`.
pub fn q_binom_alpha(n: u32) -> Frac {
    static CACHE: OnceLock<Mutex<Vec<Frac>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Frac::one()]));
    {
        let c = cache.lock().unwrap();
        if let Some(v) = c.get(n as usize) {
            return v.clone();
        }
    }
    let mut c = cache.lock().unwrap();
    while c.len() <= n as usize {
        let k = c.len() as u32;
        // binom(α,k) = binom(α,k−1)·[α−k+1]_q/[k]_q
        let next = &(&c[k as usize - 1] * &q_int_alpha(k as i64 - 1)) / &q_int(k);
        c.push(next);
    }
    c[n as usize].clone()
}

/// Checks `q^l·B_l + B_{l−1} = B_l + s·q^{1−l}·B_{l−1}` with `B_j = binom(α, j)_q`.
pub fn check_alpha_pascal(l: u32) -> bool {
    assert!(l >= 1, "l must be positive");
    let bl = q_binom_alpha(l);
    let bl1 = q_binom_alpha(l - 1);
    let s = Frac::var(Var::S);
    let lhs = &(&q_pow(l as i64) * &bl) + &bl1;
    let rhs = &bl + &(&(&s * &q_pow(1 - l as i64)) * &bl1);
    lhs == rhs
}

/// Exact evaluation at `q = q₀, s = s₀, λ = λ₀`.
///
/// Fails if a generator other than `q, s, λ` remains or the denominator vanishes.
pub fn eval_numeric(x: &Frac, q0: &Rat, s0: &Rat, lam0: &Rat) -> Result<Rat, ScalarError> {
    let v = x.eval_at(&[
        (Var::Q, q0.clone()),
        (Var::S, s0.clone()),
        (Var::Lam, lam0.clone()),
    ])?;
    v.constant_value().ok_or(ScalarError::VanishingDenominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn r(k: i64) -> Rat {
        super::super::frac::rat(k)
    }

    #[test]
    fn small_values() {
        assert!(q_int(0).is_zero());
        assert_eq!(q_int(2), &Frac::one() + &q());
        assert_eq!(q_binom(3, 5), Frac::zero());
        assert_eq!(q_binom(7, 0), Frac::one());
        let q2 = &q() * &q();
        let expect = &(&(&(&Frac::one() + &q()) + &(&Frac::int(2) * &q2)) + &(&q2 * &q())) + &(&q2 * &q2);
        assert_eq!(q_binom(4, 2), expect);
    }

    #[test]
    fn alpha_binomials() {
        assert!(q_binom_alpha(0).is_one());
        let s = Frac::var(Var::S);
        let one = Frac::one();
        assert_eq!(q_binom_alpha(1), &(&s - &one) / &(&q() - &one));
        let two = &(&(&s - &one) * &(&s - &q())) / &(&(&q() * &(&q() - &one)) * &(&(&q() * &q()) - &one));
        assert_eq!(q_binom_alpha(2), two);
    }

    #[test]
    fn numeric_examples() {
        let z = Rat::zero();
        assert_eq!(eval_numeric(&q_int(2), &r(2), &z, &z).unwrap(), r(3));
        assert_eq!(eval_numeric(&q_binom(4, 2), &r(2), &z, &z).unwrap(), r(35));
        let x = &(&Frac::var(Var::S) - &Frac::one()) / &(&q() - &Frac::one());
        assert_eq!(eval_numeric(&x, &r(2), &r(8), &z).unwrap(), r(7));
        assert!(eval_numeric(&x, &Rat::one(), &r(8), &z).is_err());
    }

    #[test]
    fn lemma_small() {
        for l in 1..=4 {
            assert!(check_alpha_pascal(l));
        }
    }
}
