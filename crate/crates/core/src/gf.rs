//! The coefficient tower F_p ⊆ F_q ⊆ F_{p^M}.
//!
//! Elements are stored by index: the coefficient vector `(c_0, .., c_{M-1})` in the
//! power basis of the modulus maps to `Σ c_i p^i`. Index order is the enumeration
//! order used everywhere (smallest primitive element, smallest branch root, ...).
//! Multiplication goes through discrete log tables built from the smallest
//! primitive element.

use crate::error::{Error, Result};
use std::fmt;

/// Largest supported p^M.
pub const MAX_ORDER: u64 = 1 << 20;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fel(pub u32);

impl Fel {
    pub const ZERO: Fel = Fel(0);
    pub const ONE: Fel = Fel(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Dense polynomials over F_p, low degree first, used only while building a context.
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], p);
        while r.len() > db {
            let shift = r.len() - 1 - db;
            let c = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
            for (i, &bi) in b.iter().enumerate() {
                let t = (c as u64 * bi as u64 % p as u64) as u32;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|v| v as u32).collect();
        rem(&prod, m, p)
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p as u64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    pub fn digits(mut idx: u64, p: u32, len: usize) -> Vec<u32> {
        let mut out = vec![0u32; len];
        for d in out.iter_mut() {
            *d = (idx % p as u64) as u32;
            idx /= p as u64;
        }
        out
    }

    /// Trial division by every monic polynomial of degree 1..=deg/2.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let deg = f.len() - 1;
        for d in 1..=deg / 2 {
            let count = (p as u64).pow(d as u32);
            for idx in 0..count {
                let mut g = digits(idx, p, d);
                g.push(1);
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    m: u32,
    big_m: u32,
    order: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    pow_p: Vec<u32>,
    primitive: Fel,
    fq_gen: Fel,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (q = {})", self.p, self.big_m, self.q())
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    pub fn new(p: u64, m: u32, big_m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 || big_m == 0 || !big_m.is_multiple_of(m) {
            return Err(Error::DegreeNotDivisible { m, big_m });
        }
        let order = (p as u128).checked_pow(big_m).unwrap_or(u128::MAX);
        if order > MAX_ORDER as u128 {
            return Err(Error::FieldTooLarge {
                order: order.min(u64::MAX as u128) as u64,
            });
        }
        let p32 = p as u32;
        let order = order as u32;
        let len = big_m as usize;
        let modulus = (0..order as u64)
            .map(|idx| {
                let mut f = fp_poly::digits(idx, p32, len);
                f.push(1);
                f
            })
            .find(|f| fp_poly::is_irreducible(f, p32))
            .expect("an irreducible polynomial of every degree exists");

        let to_index = |v: &[u32]| -> u32 {
            v.iter().rev().fold(0u32, |acc, &d| acc * p32 + d)
        };
        let group = order - 1;
        let mut exp = Vec::new();
        let mut primitive = Fel::ONE;
        if group == 1 {
            exp.push(1);
        } else {
            for cand in 2..order {
                let g = fp_poly::digits(cand as u64, p32, len);
                let mut powers = Vec::with_capacity(group as usize);
                let mut cur = vec![1u32];
                let mut ok = true;
                for k in 0..group {
                    let idx = to_index(&cur);
                    if k > 0 && idx == 1 {
                        ok = false;
                        break;
                    }
                    powers.push(idx);
                    cur = fp_poly::mulmod(&cur, &g, &modulus, p32);
                    if cur.is_empty() {
                        ok = false;
                        break;
                    }
                }
                if ok && to_index(&cur) == 1 {
                    exp = powers;
                    primitive = Fel(cand);
                    break;
                }
            }
        }
        let mut log = vec![0u32; order as usize];
        for (k, &e) in exp.iter().enumerate() {
            log[e as usize] = k as u32;
        }
        let pow_p = (0..big_m).map(|i| p32.pow(i)).collect();
        let mut ctx = FieldCtx {
            p: p32,
            m,
            big_m,
            order,
            modulus,
            exp,
            log,
            pow_p,
            primitive,
            fq_gen: Fel::ONE,
        };
        let q = ctx.q();
        ctx.fq_gen = ctx.pow(primitive, ((order as u64 - 1) / (q - 1)) as i64);
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn big_m(&self) -> u32 {
        self.big_m
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    /// Number of elements p^M.
    pub fn order(&self) -> u64 {
        self.order as u64
    }

    /// Defining polynomial, low degree first, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn primitive(&self) -> Fel {
        self.primitive
    }

    /// Generator of the multiplicative group of F_q inside F_{p^M}.
    pub fn fq_generator(&self) -> Fel {
        self.fq_gen
    }

    pub fn elements(&self) -> impl Iterator<Item = Fel> {
        (0..self.order).map(Fel)
    }

    pub fn from_int(&self, c: i64) -> Fel {
        Fel(c.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fel> {
        if coeffs.len() != self.big_m as usize {
            return Err(Error::DimensionMismatch {
                expected: self.big_m as usize,
                got: coeffs.len(),
            });
        }
        let mut idx = 0u32;
        for &c in coeffs.iter().rev() {
            if c >= self.p {
                return Err(Error::BadElement(format!("{coeffs:?}")));
            }
            idx = idx * self.p + c;
        }
        Ok(Fel(idx))
    }

    /// Power-basis coordinates, low degree first.
    pub fn coeffs(&self, a: Fel) -> Vec<u32> {
        fp_poly::digits(a.0 as u64, self.p, self.big_m as usize)
    }

    /// Base-p digits, highest degree first. Digits are separated by '.' when p > 10.
    pub fn format(&self, a: Fel) -> String {
        let digits = self.coeffs(a);
        let parts: Vec<String> = digits.iter().rev().map(|d| d.to_string()).collect();
        if self.p > 10 {
            parts.join(".")
        } else {
            parts.concat()
        }
    }

    /// Inverse of `format`; missing leading digits are zero.
    pub fn parse(&self, s: &str) -> Result<Fel> {
        let bad = || Error::BadElement(s.to_string());
        let digits: Vec<u32> = if self.p > 10 {
            s.split('.')
                .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        if digits.is_empty() || digits.len() > self.big_m as usize {
            return Err(bad());
        }
        let mut low_first: Vec<u32> = digits.into_iter().rev().collect();
        low_first.resize(self.big_m as usize, 0);
        self.from_coeffs(&low_first).map_err(|_| bad())
    }

    pub fn add(&self, a: Fel, b: Fel) -> Fel {
        if self.p == 2 {
            return Fel(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        for &w in &self.pow_p {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * w;
            x /= self.p;
            y /= self.p;
        }
        Fel(out)
    }

    pub fn neg(&self, a: Fel) -> Fel {
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0u32;
        for &w in &self.pow_p {
            let d = (self.p - x % self.p) % self.p;
            out += d * w;
            x /= self.p;
        }
        Fel(out)
    }

    pub fn sub(&self, a: Fel, b: Fel) -> Fel {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fel, b: Fel) -> Fel {
        if a.0 == 0 || b.0 == 0 {
            return Fel::ZERO;
        }
        let n = self.order - 1;
        let k = (self.log[a.0 as usize] + self.log[b.0 as usize]) % n;
        Fel(self.exp[k as usize])
    }

    /// Inverse of a nonzero element; panics on zero.
    pub fn inv(&self, a: Fel) -> Fel {
        assert!(!a.is_zero(), "inverse of zero");
        let n = self.order - 1;
        let k = (n - self.log[a.0 as usize]) % n;
        Fel(self.exp[k as usize])
    }

    pub fn div(&self, a: Fel, b: Fel) -> Fel {
        self.mul(a, self.inv(b))
    }

    /// a^e for any integer e; 0^e = 0 for e > 0 and 0^0 = 1.
    pub fn pow(&self, a: Fel, e: i64) -> Fel {
        if e == 0 {
            return Fel::ONE;
        }
        if a.is_zero() {
            assert!(e > 0, "negative power of zero");
            return Fel::ZERO;
        }
        let n = (self.order - 1) as i64;
        let k = (self.log[a.0 as usize] as i128 * e as i128).rem_euclid(n as i128) as usize;
        Fel(self.exp[k])
    }

    /// Discrete log to the base of the primitive element.
    pub fn log(&self, a: Fel) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.0 as usize])
    }

    pub fn scalar(&self, c: i64, a: Fel) -> Fel {
        self.mul(self.from_int(c), a)
    }

    /// a^{p^s}; negative s gives the p^{|s|}-th root.
    pub fn frobenius(&self, a: Fel, s: i64) -> Fel {
        if a.is_zero() {
            return a;
        }
        let k = s.rem_euclid(self.big_m as i64) as u32;
        let n = (self.order - 1) as u64;
        let e = (self.p as u64).pow(k) % n.max(1);
        let l = (self.log[a.0 as usize] as u64 * e) % n.max(1);
        Fel(self.exp[l as usize])
    }

    /// a^q.
    pub fn frob_q(&self, a: Fel) -> Fel {
        self.frobenius(a, self.m as i64)
    }

    /// a^{1/q}.
    pub fn frob_q_inv(&self, a: Fel) -> Fel {
        self.frobenius(a, -(self.m as i64))
    }

    pub fn in_fq(&self, a: Fel) -> bool {
        self.frob_q(a) == a
    }

    pub fn mult_order(&self, a: Fel) -> u64 {
        assert!(!a.is_zero());
        let n = (self.order - 1) as u64;
        n / gcd(self.log[a.0 as usize] as i64, n as i64) as u64
    }

    /// Fixed primitive n-th root of unity: the ((p^M-1)/n)-th power of the primitive element.
    pub fn root_of_unity(&self, n: u64) -> Result<Fel> {
        if n == 0 {
            return Err(Error::NoSuchRoot {
                n,
                group_order: self.order as u64 - 1,
            });
        }
        if n.is_multiple_of(self.p as u64) {
            return Err(Error::NotCoprime { n, p: self.p as u64 });
        }
        let group = self.order as u64 - 1;
        if !group.is_multiple_of(n) {
            return Err(Error::NoSuchRoot {
                n,
                group_order: group,
            });
        }
        Ok(self.pow(self.primitive, (group / n) as i64))
    }

    /// c is a d-th power in F_{p^M}.
    pub fn is_power(&self, c: Fel, d: u64) -> bool {
        if c.is_zero() {
            return true;
        }
        let group = self.order as u64 - 1;
        let g = gcd(d as i64, group as i64) as u64;
        self.pow(c, (group / g) as i64) == Fel::ONE
    }

    /// All n-th roots of c, in index order.
    pub fn nth_roots(&self, c: Fel, n: u64) -> Vec<Fel> {
        if c.is_zero() {
            return vec![Fel::ZERO];
        }
        let group = self.order as u64 - 1;
        let d = gcd(n as i64, group as i64) as u64;
        let l = self.log[c.0 as usize] as u64;
        if !l.is_multiple_of(d) {
            return Vec::new();
        }
        let step = group / d;
        let nd = (n / d) % step.max(1);
        let base = if step == 1 {
            0
        } else {
            let inv = mod_inverse(nd, step).expect("n/d is invertible mod group/d");
            (l / d) % step * inv % step
        };
        let mut out: Vec<Fel> = (0..d)
            .map(|t| Fel(self.exp[((base + t * step) % group) as usize]))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Smallest-index n-th root of c, if any.
    pub fn nth_root(&self, c: Fel, n: u64) -> Option<Fel> {
        self.nth_roots(c, n).into_iter().next()
    }

    pub fn sum<I: IntoIterator<Item = Fel>>(&self, it: I) -> Fel {
        it.into_iter().fold(Fel::ZERO, |acc, x| self.add(acc, x))
    }

    /// Element with a single 1 in power-basis coordinate t.
    pub fn basis_elem(&self, t: u32) -> Fel {
        Fel(self.pow_p[t as usize])
    }

    /// Binomial coefficient C(n, k) reduced into F_p (Lucas).
    pub fn binom(&self, n: u64, k: u64) -> Fel {
        let p = self.p as u64;
        let (mut n, mut k) = (n, k);
        let mut acc = 1u64;
        while n > 0 || k > 0 {
            let (a, b) = (n % p, k % p);
            if b > a {
                return Fel::ZERO;
            }
            acc = acc * small_binom(a, b) % p;
            n /= p;
            k /= p;
        }
        self.from_int(acc as i64)
    }
}

fn small_binom(n: u64, k: u64) -> u64 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_modulus_and_frobenius() {
        let f = FieldCtx::new(2, 2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        let w = f.parse("10").unwrap();
        let w1 = f.parse("11").unwrap();
        assert_eq!(f.frobenius(w, 1), w1);
        assert_eq!(f.mul(w, w), w1);
    }

    #[test]
    fn prime_field_modulus_is_x() {
        let f = FieldCtx::new(2, 1, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.order(), 2);
    }

    #[test]
    fn errors() {
        assert_eq!(FieldCtx::new(4, 1, 1).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(
            FieldCtx::new(2, 2, 3),
            Err(Error::DegreeNotDivisible { .. })
        ));
        let f4 = FieldCtx::new(2, 2, 2).unwrap();
        assert!(matches!(f4.root_of_unity(2), Err(Error::NotCoprime { .. })));
        let f5 = FieldCtx::new(5, 1, 1).unwrap();
        assert!(matches!(f5.root_of_unity(3), Err(Error::NoSuchRoot { .. })));
    }

    #[test]
    fn nth_roots_match_scan() {
        let f = FieldCtx::new(3, 1, 4).unwrap();
        for c in f.elements() {
            for n in [1u64, 2, 4, 5, 8, 16] {
                let scan: Vec<Fel> = f.elements().filter(|&b| f.pow(b, n as i64) == c).collect();
                assert_eq!(f.nth_roots(c, n), scan, "c={c:?} n={n}");
            }
        }
    }

    #[test]
    fn binom_lucas() {
        let f = FieldCtx::new(3, 1, 1).unwrap();
        for n in 0..30u64 {
            for k in 0..=n {
                let direct = (small_binom(n, k) % 3) as i64;
                assert_eq!(f.binom(n, k), f.from_int(direct));
            }
        }
    }
}
