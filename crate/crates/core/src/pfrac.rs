//! The ring A of regular functions on P¹ minus finitely many points, ∞ always
//! among them, in partial-fraction normal form
//! `poly(x) + Σ c_{i,e} (x - a_i)^(-e)`.

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fel};
use crate::series::Series;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Finite(usize),
    Infinity,
}

/// A monomial of the partial-fraction basis. Ordered as 1, then poles by
/// (puncture, order), then x, x², ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Pow(u32),
    Pole(usize, u32),
}

impl Term {
    fn rank(&self) -> (u8, usize, u32) {
        match *self {
            Term::Pow(0) => (0, 0, 0),
            Term::Pole(i, e) => (1, i, e),
            Term::Pow(k) => (2, 0, k),
        }
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Element of A. Invariant: `poly` has no trailing zeros, `pp` holds only nonzero values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RingElem {
    pub poly: Vec<Fel>,
    pub pp: BTreeMap<(usize, u32), Fel>,
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem::default()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_empty() && self.pp.is_empty()
    }

    pub fn constant(c: Fel) -> Self {
        let mut r = RingElem::zero();
        if !c.is_zero() {
            r.poly.push(c);
        }
        r
    }

    pub fn monomial(t: Term, c: Fel) -> Self {
        let mut r = RingElem::zero();
        if c.is_zero() {
            return r;
        }
        match t {
            Term::Pow(k) => {
                r.poly = vec![Fel::ZERO; k as usize + 1];
                r.poly[k as usize] = c;
            }
            Term::Pole(i, e) => {
                assert!(e >= 1);
                r.pp.insert((i, e), c);
            }
        }
        r
    }

    pub fn terms(&self) -> impl Iterator<Item = (Term, Fel)> + '_ {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, &c)| (Term::Pow(k as u32), c));
        let pp = self.pp.iter().map(|(&(i, e), &c)| (Term::Pole(i, e), c));
        poly.chain(pp)
    }

    pub fn coeff(&self, t: Term) -> Fel {
        match t {
            Term::Pow(k) => self.poly.get(k as usize).copied().unwrap_or(Fel::ZERO),
            Term::Pole(i, e) => self.pp.get(&(i, e)).copied().unwrap_or(Fel::ZERO),
        }
    }

    /// Degree of the polynomial part; -1 for none.
    pub fn degree(&self) -> i64 {
        self.poly.len() as i64 - 1
    }

    fn trim(&mut self) {
        while self.poly.last().is_some_and(|c| c.is_zero()) {
            self.poly.pop();
        }
        self.pp.retain(|_, c| !c.is_zero());
    }

    fn max_puncture(&self) -> Option<usize> {
        self.pp.keys().map(|&(i, _)| i).max()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingElemJson {
    pub poly: Vec<String>,
    pub pp: Vec<(usize, u32, String)>,
}

/// P¹ minus {a_1, .., a_r, ∞}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuncturedLine {
    pub ctx: Arc<FieldCtx>,
    pub punctures: Vec<Fel>,
}

impl PuncturedLine {
    pub fn new(ctx: Arc<FieldCtx>, punctures: Vec<Fel>) -> Result<Self> {
        for (i, a) in punctures.iter().enumerate() {
            if punctures[..i].contains(a) {
                return Err(Error::ConfigInvalid(format!(
                    "puncture {} listed twice",
                    ctx.format(*a)
                )));
            }
        }
        Ok(PuncturedLine { ctx, punctures })
    }

    pub fn f(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn places(&self) -> Vec<Place> {
        (0..self.punctures.len())
            .map(Place::Finite)
            .chain(std::iter::once(Place::Infinity))
            .collect()
    }

    pub fn place_label(&self, place: Place) -> String {
        match place {
            Place::Finite(i) => self.ctx.format(self.punctures[i]),
            Place::Infinity => "inf".to_string(),
        }
    }

    pub fn check(&self, a: &RingElem) -> Result<()> {
        match a.max_puncture() {
            Some(i) if i >= self.punctures.len() => Err(Error::RingMismatch),
            _ => Ok(()),
        }
    }

    pub fn x(&self) -> RingElem {
        RingElem::monomial(Term::Pow(1), Fel::ONE)
    }

    /// x - a_i.
    pub fn linear(&self, i: usize) -> RingElem {
        let f = self.f();
        RingElem {
            poly: vec![f.neg(self.punctures[i]), Fel::ONE],
            pp: BTreeMap::new(),
        }
        .trimmed()
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let f = self.f();
        let n = a.poly.len().max(b.poly.len());
        let mut poly = vec![Fel::ZERO; n];
        for (k, slot) in poly.iter_mut().enumerate() {
            let x = a.poly.get(k).copied().unwrap_or(Fel::ZERO);
            let y = b.poly.get(k).copied().unwrap_or(Fel::ZERO);
            *slot = f.add(x, y);
        }
        let mut pp = a.pp.clone();
        for (&key, &c) in &b.pp {
            let e = pp.entry(key).or_insert(Fel::ZERO);
            *e = f.add(*e, c);
        }
        RingElem { poly, pp }.trimmed()
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        self.scale(a, self.f().neg(Fel::ONE))
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &RingElem, c: Fel) -> RingElem {
        let f = self.f();
        RingElem {
            poly: a.poly.iter().map(|&x| f.mul(c, x)).collect(),
            pp: a.pp.iter().map(|(&k, &x)| (k, f.mul(c, x))).collect(),
        }
        .trimmed()
    }

    pub fn elem_add(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn elem_mul(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let f = self.f();
        let mut acc = Accum::default();
        if !a.poly.is_empty() && !b.poly.is_empty() {
            let mut prod = vec![Fel::ZERO; a.poly.len() + b.poly.len() - 1];
            for (i, &x) in a.poly.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, &y) in b.poly.iter().enumerate() {
                    prod[i + j] = f.add(prod[i + j], f.mul(x, y));
                }
            }
            acc.add_poly(f, &prod, Fel::ONE);
        }
        for (&(i, e), &c) in &b.pp {
            if !a.poly.is_empty() {
                self.poly_times_pole(&a.poly, i, e, c, &mut acc);
            }
        }
        for (&(i, e), &c) in &a.pp {
            if !b.poly.is_empty() {
                self.poly_times_pole(&b.poly, i, e, c, &mut acc);
            }
        }
        for (&(i, e), &c) in &a.pp {
            for (&(j, g), &d) in &b.pp {
                self.pole_times_pole(i, e, j, g, f.mul(c, d), &mut acc);
            }
        }
        acc.finish()
    }

    /// c · poly · (x - a_i)^(-e), by repeated synthetic division.
    fn poly_times_pole(&self, poly: &[Fel], i: usize, e: u32, c: Fel, acc: &mut Accum) {
        let f = self.f();
        let a = self.punctures[i];
        let mut cur: Vec<Fel> = poly.iter().map(|&x| f.mul(c, x)).collect();
        for k in 0..e {
            if cur.is_empty() {
                return;
            }
            let (quot, rem) = synthetic_div(f, &cur, a);
            if !rem.is_zero() {
                acc.add_pole(f, i, e - k, rem);
            }
            cur = quot;
        }
        acc.add_poly(f, &cur, Fel::ONE);
    }

    /// c · (x - a_i)^(-e) · (x - a_j)^(-g).
    fn pole_times_pole(&self, i: usize, e: u32, j: usize, g: u32, c: Fel, acc: &mut Accum) {
        let f = self.f();
        if i == j {
            acc.add_pole(f, i, e + g, c);
            return;
        }
        for (here, there, ee, gg) in [(i, j, e, g), (j, i, g, e)] {
            // (x - a_there)^(-gg) = Σ_k (-1)^k C(gg+k-1, k) d^(-gg-k) u^k, u = x - a_here
            let d = f.sub(self.punctures[here], self.punctures[there]);
            for k in 0..ee {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                let b = f.scalar(sign, f.binom((gg + k - 1) as u64, k as u64));
                let term = f.mul(b, f.pow(d, -((gg + k) as i64)));
                acc.add_pole(f, here, ee - k, f.mul(c, term));
            }
        }
    }

    pub fn pow(&self, a: &RingElem, mut e: u64) -> RingElem {
        let mut base = a.clone();
        let mut acc = RingElem::constant(Fel::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// (x - a_i)^k for any integer k.
    pub fn linear_pow(&self, i: usize, k: i64) -> RingElem {
        if k >= 0 {
            self.pow(&self.linear(i), k as u64)
        } else {
            RingElem::monomial(Term::Pole(i, (-k) as u32), Fel::ONE)
        }
    }

    /// a^(p^s) for s ≥ 0: coefficients are raised, exponents multiplied.
    pub fn frobenius(&self, a: &RingElem, s: u32) -> RingElem {
        let f = self.f();
        let ps = f.p().pow(s) as usize;
        let mut poly = vec![Fel::ZERO; if a.poly.is_empty() { 0 } else { (a.poly.len() - 1) * ps + 1 }];
        for (k, &c) in a.poly.iter().enumerate() {
            poly[k * ps] = f.frobenius(c, s as i64);
        }
        let pp = a
            .pp
            .iter()
            .map(|(&(i, e), &c)| ((i, e * ps as u32), f.frobenius(c, s as i64)))
            .collect();
        RingElem { poly, pp }.trimmed()
    }

    pub fn eval(&self, a: &RingElem, t: Fel) -> Option<Fel> {
        let f = self.f();
        if self.punctures.contains(&t) && !a.pp.is_empty() {
            let hit = a.pp.keys().any(|&(i, _)| self.punctures[i] == t);
            if hit {
                return None;
            }
        }
        let mut v = Fel::ZERO;
        for &c in a.poly.iter().rev() {
            v = f.add(f.mul(v, t), c);
        }
        for (&(i, e), &c) in &a.pp {
            let d = f.sub(t, self.punctures[i]);
            v = f.add(v, f.mul(c, f.pow(d, -(e as i64))));
        }
        Some(v)
    }

    pub fn pole_order(&self, a: &RingElem, at: Place) -> Result<u32> {
        match at {
            Place::Infinity => Ok(a.degree().max(0) as u32),
            Place::Finite(i) => {
                if i >= self.punctures.len() {
                    return Err(Error::UnknownPuncture(i.to_string()));
                }
                Ok(a
                    .pp
                    .keys()
                    .filter(|&&(j, _)| j == i)
                    .map(|&(_, e)| e)
                    .max()
                    .unwrap_or(0))
            }
        }
    }

    /// Laurent expansion at a place in the local parameter t = x - a_i, or t = 1/x at ∞,
    /// exact for exponents below `prec`.
    pub fn laurent(&self, a: &RingElem, at: Place, prec: i64) -> Series {
        let f = self.f();
        let mut out = Series::zero(prec);
        let mut coeffs: BTreeMap<i64, Fel> = BTreeMap::new();
        let mut push = |e: i64, c: Fel| {
            if e < prec && !c.is_zero() {
                let s = coeffs.entry(e).or_insert(Fel::ZERO);
                *s = f.add(*s, c);
            }
        };
        match at {
            Place::Finite(i) => {
                let ai = self.punctures[i];
                let shifted = taylor_shift(f, &a.poly, ai);
                for (k, &c) in shifted.iter().enumerate() {
                    push(k as i64, c);
                }
                for (&(j, e), &c) in &a.pp {
                    if j == i {
                        push(-(e as i64), c);
                        continue;
                    }
                    let d = f.sub(ai, self.punctures[j]);
                    let mut k = 0i64;
                    while k < prec {
                        let sign = if k % 2 == 0 { 1 } else { -1 };
                        let b = f.scalar(sign, f.binom((e as i64 + k - 1) as u64, k as u64));
                        push(k, f.mul(c, f.mul(b, f.pow(d, -(e as i64 + k)))));
                        k += 1;
                    }
                }
            }
            Place::Infinity => {
                for (k, &c) in a.poly.iter().enumerate() {
                    push(-(k as i64), c);
                }
                for (&(j, e), &c) in &a.pp {
                    let aj = self.punctures[j];
                    let mut k = 0i64;
                    while e as i64 + k < prec {
                        let b = f.binom((e as i64 + k - 1) as u64, k as u64);
                        push(e as i64 + k, f.mul(c, f.mul(b, f.pow(aj, k))));
                        k += 1;
                    }
                }
            }
        }
        for (e, c) in coeffs {
            out = out.add(&Series::monomial(c, e, prec), f);
        }
        out
    }

    /// Order of vanishing at a place; None for the zero element.
    pub fn valuation(&self, a: &RingElem, at: Place) -> Option<i64> {
        if a.is_zero() {
            return None;
        }
        let pole = self.pole_order(a, at).ok()? as i64;
        if pole > 0 {
            return Some(-pole);
        }
        // a nonzero function on P¹ has at most (total pole order) zeros
        let total: i64 = a.degree().max(0)
            + (0..self.punctures.len())
                .map(|i| self.pole_order(a, Place::Finite(i)).unwrap_or(0) as i64)
                .sum::<i64>();
        let s = self.laurent(a, at, total + 2);
        s.valuation()
    }

    /// Monomial basis of {a : pole order at a_i ≤ b_i, at ∞ ≤ b_inf} for nonnegative bounds.
    pub fn rr_space(&self, bounds: &[u32], b_inf: u32) -> Vec<RingElem> {
        let mut out = vec![RingElem::constant(Fel::ONE)];
        for (i, &b) in bounds.iter().enumerate() {
            for e in 1..=b {
                out.push(RingElem::monomial(Term::Pole(i, e), Fel::ONE));
            }
        }
        for k in 1..=b_inf {
            out.push(RingElem::monomial(Term::Pow(k), Fel::ONE));
        }
        out
    }

    /// Basis of {a : v_{a_i}(a) ≥ -b_i, v_∞(a) ≥ -b_inf} for arbitrary integer bounds,
    /// in reduced echelon form over the ordered monomial coordinates.
    pub fn rr_space_general(&self, bounds: &[i64], b_inf: i64) -> Vec<RingElem> {
        if bounds.iter().all(|&b| b >= 0) && b_inf >= 0 {
            let b: Vec<u32> = bounds.iter().map(|&b| b as u32).collect();
            return self.rr_space(&b, b_inf as u32);
        }
        let deg: i64 = bounds.iter().sum::<i64>() + b_inf;
        if deg < 0 {
            return Vec::new();
        }
        let mut denom = RingElem::constant(Fel::ONE);
        for (i, &b) in bounds.iter().enumerate() {
            denom = self.mul(&denom, &self.linear_pow(i, -b));
        }
        let rows: Vec<RingElem> = (0..=deg)
            .map(|k| self.mul(&RingElem::monomial(Term::Pow(k as u32), Fel::ONE), &denom))
            .collect();
        crate::fplinalg::k_rref_ring(self.f(), &rows)
    }

    pub fn to_json(&self, a: &RingElem) -> RingElemJson {
        let f = self.f();
        RingElemJson {
            poly: a.poly.iter().map(|&c| f.format(c)).collect(),
            pp: a
                .pp
                .iter()
                .map(|(&(i, e), &c)| (i, e, f.format(c)))
                .collect(),
        }
    }

    pub fn from_json(&self, j: &RingElemJson) -> Result<RingElem> {
        let f = self.f();
        let poly = j.poly.iter().map(|s| f.parse(s)).collect::<Result<Vec<_>>>()?;
        let mut pp = BTreeMap::new();
        for (i, e, s) in &j.pp {
            if *i >= self.punctures.len() {
                return Err(Error::UnknownPuncture(i.to_string()));
            }
            if *e == 0 {
                return Err(Error::ConfigInvalid("pole exponent 0".into()));
            }
            let c = f.parse(s)?;
            let slot = pp.entry((*i, *e)).or_insert(Fel::ZERO);
            *slot = f.add(*slot, c);
        }
        Ok(RingElem { poly, pp }.trimmed())
    }

    pub fn term_label(&self, t: Term) -> String {
        match t {
            Term::Pow(0) => "1".into(),
            Term::Pow(1) => "x".into(),
            Term::Pow(k) => format!("x^{k}"),
            Term::Pole(i, e) => {
                let a = self.punctures[i];
                let base = if a.is_zero() {
                    "x".to_string()
                } else {
                    format!("(x-{})", self.ctx.format(a))
                };
                format!("{base}^-{e}")
            }
        }
    }

    pub fn label(&self, a: &RingElem) -> String {
        let f = self.f();
        let mut terms: Vec<(Term, Fel)> = a.terms().collect();
        terms.sort_by_key(|(t, _)| *t);
        if terms.is_empty() {
            return "0".into();
        }
        terms
            .iter()
            .map(|&(t, c)| {
                let tl = self.term_label(t);
                if c == Fel::ONE {
                    tl
                } else if tl == "1" {
                    f.format(c)
                } else {
                    format!("{}*{tl}", f.format(c))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl RingElem {
    fn trimmed(mut self) -> Self {
        self.trim();
        self
    }
}

#[derive(Default)]
struct Accum {
    poly: Vec<Fel>,
    pp: BTreeMap<(usize, u32), Fel>,
}

impl Accum {
    fn add_poly(&mut self, f: &FieldCtx, p: &[Fel], c: Fel) {
        if self.poly.len() < p.len() {
            self.poly.resize(p.len(), Fel::ZERO);
        }
        for (k, &x) in p.iter().enumerate() {
            self.poly[k] = f.add(self.poly[k], f.mul(c, x));
        }
    }

    fn add_pole(&mut self, f: &FieldCtx, i: usize, e: u32, c: Fel) {
        let s = self.pp.entry((i, e)).or_insert(Fel::ZERO);
        *s = f.add(*s, c);
    }

    fn finish(self) -> RingElem {
        RingElem {
            poly: self.poly,
            pp: self.pp,
        }
        .trimmed()
    }
}

/// poly = (x - a)·quot + rem.
fn synthetic_div(f: &FieldCtx, poly: &[Fel], a: Fel) -> (Vec<Fel>, Fel) {
    let n = poly.len();
    if n == 0 {
        return (Vec::new(), Fel::ZERO);
    }
    let mut quot = vec![Fel::ZERO; n - 1];
    let mut carry = Fel::ZERO;
    for k in (0..n).rev() {
        let v = f.add(poly[k], f.mul(carry, a));
        if k == 0 {
            return (trim_vec(quot), v);
        }
        quot[k - 1] = v;
        carry = v;
    }
    unreachable!()
}

fn trim_vec(mut v: Vec<Fel>) -> Vec<Fel> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

/// Coefficients of poly(t + a) in t.
pub fn taylor_shift(f: &FieldCtx, poly: &[Fel], a: Fel) -> Vec<Fel> {
    let mut out = Vec::with_capacity(poly.len());
    let mut cur = poly.to_vec();
    while !cur.is_empty() {
        let (q, r) = synthetic_div(f, &cur, a);
        out.push(r);
        cur = q;
    }
    trim_vec(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(p: u64, m: u32, big_m: u32, pts: &[u32]) -> PuncturedLine {
        let f = Arc::new(FieldCtx::new(p, m, big_m).unwrap());
        PuncturedLine::new(f, pts.iter().map(|&i| Fel(i)).collect()).unwrap()
    }

    #[test]
    fn unit_pair() {
        let u = line(2, 2, 2, &[0]);
        let inv = RingElem::monomial(Term::Pole(0, 1), Fel::ONE);
        assert_eq!(u.mul(&u.x(), &inv), RingElem::constant(Fel::ONE));
    }

    #[test]
    fn cross_term_partial_fractions() {
        let u = line(5, 1, 1, &[0, 1]);
        let f = u.f();
        let a = RingElem::monomial(Term::Pole(0, 1), Fel::ONE);
        let b = RingElem::monomial(Term::Pole(1, 1), Fel::ONE);
        let prod = u.mul(&a, &b);
        let mut expect = RingElem::zero();
        expect.pp.insert((1, 1), Fel::ONE);
        expect.pp.insert((0, 1), f.neg(Fel::ONE));
        assert_eq!(prod, expect);
    }

    #[test]
    fn pole_orders() {
        let u = line(3, 1, 1, &[1]);
        let a = u.add(
            &RingElem::monomial(Term::Pow(3), Fel::ONE),
            &RingElem::monomial(Term::Pole(0, 2), Fel::ONE),
        );
        assert_eq!(u.pole_order(&a, Place::Infinity).unwrap(), 3);
        assert_eq!(u.pole_order(&a, Place::Finite(0)).unwrap(), 2);
        assert_eq!(
            u.pole_order(&RingElem::constant(Fel::ONE), Place::Finite(0)).unwrap(),
            0
        );
        assert!(u.pole_order(&a, Place::Finite(3)).is_err());
    }

    #[test]
    fn rr_examples() {
        let u = line(2, 2, 2, &[0]);
        assert_eq!(u.rr_space(&[2], 1).len(), 4);
        assert_eq!(u.rr_space(&[0], 0).len(), 1);
        let u2 = line(3, 1, 1, &[0, 1]);
        assert_eq!(u2.rr_space(&[1, 1], 0).len(), 3);
    }

    #[test]
    fn general_rr_with_zero_conditions() {
        let u = line(3, 1, 2, &[0, 1]);
        // poles ≤ 2 at 0, zero at 1, nothing at ∞: dimension 1 + 2 - 1 + 0 = 2
        let basis = u.rr_space_general(&[2, -1], 0);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(u.valuation(b, Place::Finite(0)).unwrap() >= -2);
            assert!(u.valuation(b, Place::Finite(1)).unwrap() >= 1);
            assert!(u.valuation(b, Place::Infinity).unwrap() >= 0);
        }
        assert!(u.rr_space_general(&[0, -1], 0).is_empty());
    }

    #[test]
    fn laurent_at_infinity_of_pole() {
        let u = line(3, 1, 2, &[1]);
        // 1/(x-1) = t + t^2 + ... at ∞
        let a = RingElem::monomial(Term::Pole(0, 1), Fel::ONE);
        let s = u.laurent(&a, Place::Infinity, 5);
        for e in 1..5 {
            assert_eq!(s.coeff(e), Fel::ONE);
        }
        assert_eq!(u.valuation(&a, Place::Infinity), Some(1));
    }
}
