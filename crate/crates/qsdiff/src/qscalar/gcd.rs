//! Multivariate polynomial gcd over ℤ.
//!
//! Recursive scheme: strip monomial and integer content, reduce to a common
//! variable set through contents, then run the subresultant remainder sequence
//! in a main variable with coefficients in the remaining variables.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::poly::{IPoly, Mono, Var, NVARS};

/// Greatest common divisor, primitive with positive leading coefficient.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &IPoly, b: &IPoly) -> IPoly {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    if a.is_constant() || b.is_constant() {
        return IPoly::one();
    }
    if a == b {
        return a.primitive();
    }
    let ma = a.mono_content();
    let mb = b.mono_content();
    let gm = ma.gcd(&mb);
    let a = a.div_mono(&ma).primitive();
    let b = b.div_mono(&mb).primitive();
    let g = gcd_no_mono(a, b);
    g.mul_term(&gm, &BigInt::one())
}

fn mask_vars(mask: u16) -> impl Iterator<Item = Var> {
    Var::ALL.into_iter().filter(move |v| mask & (1 << v.index()) != 0)
}

/// Gcd of polynomials without monomial content.
fn gcd_no_mono(mut a: IPoly, mut b: IPoly) -> IPoly {
    if coprime_mod_p(&a, &b, a.var_mask() | b.var_mask()) {
        return IPoly::one();
    }
    loop {
        if a.is_constant() || b.is_constant() {
            return IPoly::one();
        }
        let va = a.var_mask();
        let vb = b.var_mask();
        if va == vb {
            break;
        }
        let only_a = va & !vb;
        let only_b = vb & !va;
        if only_a != 0 {
            a = content_wrt(&a, only_a);
        }
        if only_b != 0 {
            b = content_wrt(&b, only_b);
        }
    }
    if a == b {
        return a.primitive();
    }
    if let Some(g) = trial_divisor(&a, &b) {
        return g;
    }
    let mask = a.var_mask();
    let vars: Vec<Var> = mask_vars(mask).collect();
    // Main variable: the one with the smallest degree keeps the remainder sequence short.
    let x = *vars
        .iter()
        .min_by_key(|v| (a.degree_in(**v).max(b.degree_in(**v)), std::cmp::Reverse(v.index())))
        .unwrap();
    let ca = a.coeffs_in(x);
    let cb = b.coeffs_in(x);
    if vars.len() == 1 {
        let g = univariate_gcd(ca, cb);
        return IPoly::from_coeffs_in(x, &g).primitive();
    }
    let conta = content_of(&ca);
    let contb = content_of(&cb);
    let gc = gcd(&conta, &contb);
    let pa: Vec<IPoly> = ca.iter().map(|c| c.div_exact(&conta).unwrap()).collect();
    let pb: Vec<IPoly> = cb.iter().map(|c| c.div_exact(&contb).unwrap()).collect();
    let g = subresultant(pa, pb);
    let g = primitive_part(g);
    IPoly::from_coeffs_in(x, &g).mul(&gc).primitive()
}

const P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

fn int_mod(c: &BigInt) -> u64 {
    let m = c
        .iter_u64_digits()
        .rev()
        .fold(0u64, |acc, d| ((((acc as u128) << 64) + d as u128) % P as u128) as u64);
    if c.is_negative() && m != 0 {
        P - m
    } else {
        m
    }
}

/// Image of `p` in `F_P[x]` after substituting `vals` for the other variables.
fn image_in(p: &IPoly, x: Var, vals: &[u64; NVARS]) -> Vec<u64> {
    let mut out = vec![0u64; p.degree_in(x) as usize + 1];
    for (m, c) in p.terms() {
        let mut k = int_mod(c);
        for v in Var::ALL {
            if v != x && m.exp(v) > 0 {
                k = mulmod(k, powmod(vals[v.index()], m.exp(v) as u64));
            }
        }
        let slot = &mut out[m.exp(x) as usize];
        *slot = (*slot + k) % P;
    }
    out
}

fn uni_rem(a: &mut Vec<u64>, b: &[u64]) {
    let db = b.len() - 1;
    let inv = powmod(b[db], P - 2);
    while a.len() > db {
        let top = a.len() - 1;
        let f = mulmod(a[top], inv);
        if f != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let k = i + top - db;
                a[k] = (a[k] + P - mulmod(f, bc)) % P;
            }
        }
        a.pop();
        while a.last() == Some(&0) {
            a.pop();
        }
    }
}

fn uni_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    while !b.is_empty() {
        uni_rem(&mut a, &b);
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Certifies `gcd(a, b) = 1` through univariate images modulo a prime. If a
/// common factor `g` has positive degree in `x`, its image keeps that degree
/// whenever the image of `lc_x(a)` is nonzero, and divides both images.
fn coprime_mod_p(a: &IPoly, b: &IPoly, mask: u16) -> bool {
    let mut seed: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        seed % P
    };
    'vars: for x in mask_vars(mask) {
        for _attempt in 0..2 {
            let mut vals = [0u64; NVARS];
            for v in vals.iter_mut() {
                *v = next();
            }
            let ia = image_in(a, x, &vals);
            if ia.last() == Some(&0) {
                continue;
            }
            let mut ib = image_in(b, x, &vals);
            while ib.last() == Some(&0) {
                ib.pop();
            }
            if ib.is_empty() {
                continue;
            }
            if uni_gcd_degree(ia, ib) == 0 {
                continue 'vars;
            }
        }
        return false;
    }
    true
}

/// Quick exits when one argument divides the other.
fn trial_divisor(a: &IPoly, b: &IPoly) -> Option<IPoly> {
    let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    for v in Var::ALL {
        if small.degree_in(v) > big.degree_in(v) {
            return None;
        }
    }
    big.div_exact(small).map(|_| small.primitive())
}

/// Content of `p` viewed as a polynomial in the variables of `mask`.
fn content_wrt(p: &IPoly, mask: u16) -> IPoly {
    use std::collections::HashMap;
    let mut groups: HashMap<Mono, Vec<(Mono, BigInt)>> = HashMap::new();
    for (m, c) in p.terms() {
        let mut key = Mono::ONE;
        let mut rest = *m;
        for i in 0..NVARS {
            if mask & (1 << i) != 0 {
                key.0[i] = m.0[i];
                rest.0[i] = 0;
            }
        }
        groups.entry(key).or_default().push((rest, c.clone()));
    }
    let mut polys: Vec<IPoly> = groups.into_values().map(IPoly::from_terms).collect();
    polys.sort_by_key(|p| p.len());
    content_of(&polys)
}

fn content_of(cs: &[IPoly]) -> IPoly {
    let mut g = IPoly::zero();
    for c in cs {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_constant() {
            return IPoly::one();
        }
    }
    g
}

fn primitive_part(p: Vec<IPoly>) -> Vec<IPoly> {
    let c = content_of(&p);
    if c.is_one() || c.is_zero() {
        return p;
    }
    p.iter().map(|x| x.div_exact(&c).unwrap()).collect()
}

fn trim(p: &mut Vec<IPoly>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn deg(p: &[IPoly]) -> usize {
    p.len() - 1
}

/// Pseudo-remainder `lc(b)^(deg a − deg b + 1)·a mod b`.
fn prem(a: &[IPoly], b: &[IPoly]) -> Vec<IPoly> {
    let db = deg(b);
    let lb = &b[db];
    let mut r = a.to_vec();
    let mut e = deg(a) as i64 - db as i64 + 1;
    while !r.is_empty() && r.len() > db {
        let dr = deg(&r);
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<IPoly> = r.iter().map(|c| c.mul(lb)).collect();
        for (i, bc) in b.iter().enumerate() {
            let k = i + shift;
            next[k] = next[k].sub(&bc.mul(&lr));
        }
        next.pop();
        trim(&mut next);
        r = next;
        e -= 1;
    }
    if e > 0 && !r.is_empty() {
        let f = lb.pow(e as u32);
        r = r.iter().map(|c| c.mul(&f)).collect();
    }
    r
}

/// Subresultant remainder sequence; returns a (non-primitive) gcd in the main variable.
fn subresultant(mut a: Vec<IPoly>, mut b: Vec<IPoly>) -> Vec<IPoly> {
    if deg(&a) < deg(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = IPoly::one();
    let mut h = IPoly::one();
    loop {
        let delta = deg(&a) - deg(&b);
        let r = prem(&a, &b);
        if r.is_empty() {
            return b;
        }
        if r.len() == 1 {
            return vec![IPoly::one()];
        }
        let div = g.mul(&h.pow(delta as u32));
        a = b;
        b = r
            .iter()
            .map(|c| c.div_exact(&div).expect("subresultant division"))
            .collect();
        g = a[deg(&a)].clone();
        h = if delta == 0 {
            h
        } else if delta == 1 {
            g.clone()
        } else {
            g.pow(delta as u32)
                .div_exact(&h.pow(delta as u32 - 1))
                .expect("subresultant h update")
        };
    }
}

/// Univariate gcd with integer coefficients (entries are constants).
fn univariate_gcd(a: Vec<IPoly>, b: Vec<IPoly>) -> Vec<IPoly> {
    let to_int = |v: &[IPoly]| -> Vec<BigInt> {
        v.iter().map(|c| c.constant_value().unwrap()).collect()
    };
    let mut a = to_int(&a);
    let mut b = to_int(&b);
    prim_int(&mut a);
    prim_int(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    // Primitive remainder sequence: small integers here, simple and robust.
    while b.len() > 1 {
        let mut r = prem_int(&a, &b);
        if r.is_empty() {
            return b.into_iter().map(IPoly::constant).collect();
        }
        prim_int(&mut r);
        a = b;
        b = r;
    }
    if b.is_empty() {
        return a.into_iter().map(IPoly::constant).collect();
    }
    vec![IPoly::one()]
}

fn prim_int(p: &mut Vec<BigInt>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    let mut g = BigInt::zero();
    for c in p.iter() {
        g = num_integer::Integer::gcd(&g, c);
    }
    if p.last().map(|c| c.is_negative()).unwrap_or(false) {
        g = -g;
    }
    if !g.is_zero() && !g.is_one() {
        for c in p.iter_mut() {
            *c = &*c / &g;
        }
    }
}

fn prem_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.to_vec();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = &*c * lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= bc * &lr;
        }
        r.pop();
        while r.last().map(|c| c.is_zero()).unwrap_or(false) {
            r.pop();
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qscalar::poly::MPoly;

    fn v(x: Var) -> IPoly {
        IPoly::var(x)
    }
    fn c(k: i64) -> IPoly {
        IPoly::constant(BigInt::from(k))
    }

    #[test]
    fn univariate_common_factor() {
        let q = v(Var::Q);
        let a = q.mul(&q).sub(&c(1));
        let b = q.sub(&c(1)).mul(&q.add(&c(2)));
        assert_eq!(gcd(&a, &b), q.sub(&c(1)));
    }

    #[test]
    fn multivariate_common_factor() {
        let q = v(Var::Q);
        let s = v(Var::S);
        let t = v(Var::T);
        let common = s.sub(&q.mul(&q)).add(&t);
        let a = common.mul(&s.add(&c(3))).mul(&t);
        let b = common.mul(&q.sub(&s)).mul(&t).mul(&t);
        let g = gcd(&a, &b);
        let expect = common.mul(&t).primitive();
        assert_eq!(g, expect);
    }

    #[test]
    fn coprime_gives_one() {
        let q = v(Var::Q);
        let s = v(Var::S);
        let a = q.mul(&s).sub(&c(1));
        let b = q.sub(&s);
        assert!(gcd(&a, &b).is_one());
        let _ = MPoly::zero();
    }

    #[test]
    fn certificate_rejects_common_factor() {
        let q = v(Var::Q);
        let t = v(Var::T);
        let f = q.mul(&t).add(&c(1));
        let a = f.mul(&q.sub(&t));
        let b = f.mul(&t.add(&c(5)));
        assert!(!coprime_mod_p(&a, &b, a.var_mask() | b.var_mask()));
        assert!(coprime_mod_p(&q.sub(&t), &t.add(&c(5)), a.var_mask()));
    }
}
