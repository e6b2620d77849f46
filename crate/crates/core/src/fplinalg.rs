//! Linear algebra over F_p for spaces of F_{p^M}-vectors expanded coordinatewise,
//! plus the F_{p^M}-linear elimination used to build bases.

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fel};
use crate::pfrac::{RingElem, Term};
use serde::Serialize;
use std::collections::BTreeMap;

/// A k-vector space of dimension `labels.len()`, seen over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FpSpace {
    pub big_m: usize,
    pub labels: Vec<String>,
}

impl FpSpace {
    pub fn new(big_m: usize, labels: Vec<String>) -> Self {
        FpSpace { big_m, labels }
    }

    pub fn ambient_dim(&self) -> usize {
        self.big_m * self.labels.len()
    }
}

pub fn fp_expand(f: &FieldCtx, v: &[Fel]) -> Vec<u32> {
    v.iter().flat_map(|&a| f.coeffs(a)).collect()
}

pub fn fp_contract(f: &FieldCtx, v: &[u32]) -> Result<Vec<Fel>> {
    let m = f.big_m() as usize;
    if !v.len().is_multiple_of(m) {
        return Err(Error::DimensionMismatch {
            expected: v.len().div_ceil(m) * m,
            got: v.len(),
        });
    }
    v.chunks(m).map(|c| f.from_coeffs(c)).collect()
}

/// Dense matrix over F_p, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FpMatrix {
    pub p: u32,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(p: u32, rows: usize, cols: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x % p);
            }
        }
        m
    }

    pub fn from_rows(p: u32, cols: usize, rows: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, x % p);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let s: u64 = self
                    .row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a as u64 * b as u64)
                    .sum();
                (s % self.p as u64) as u32
            })
            .collect()
    }

    /// Reduced row echelon form and pivot columns; pivots are chosen leftmost.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let p = self.p as u64;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..m.cols {
                    m.data.swap(piv * m.cols + j, r * m.cols + j);
                }
            }
            let inv = inv_mod(m.get(r, c) as u64, p);
            for j in 0..m.cols {
                let v = m.get(r, j) as u64 * inv % p;
                m.set(r, j, v as u32);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c) as u64;
                if factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = (m.get(i, j) as u64 + p * p - factor * m.get(r, j) as u64) % p;
                    m.set(i, j, v as u32);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the nullspace {v : M v = 0}, one vector per free column in order.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let (r, pivots) = self.rref();
        let p = self.p;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u32; self.cols];
                v[fc] = 1;
                for (ri, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - r.get(ri, fc)) % p;
                }
                v
            })
            .collect()
    }

    /// Basis of the column space: the pivot columns of the original matrix.
    pub fn image(&self) -> Vec<Vec<u32>> {
        let (_, pivots) = self.rref();
        pivots
            .iter()
            .map(|&c| (0..self.rows).map(|i| self.get(i, c)).collect())
            .collect()
    }
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// An additive map between F_p-expanded spaces.
#[derive(Clone, Debug, Serialize)]
pub struct FpMap {
    pub source: FpSpace,
    pub target: FpSpace,
    pub matrix: FpMatrix,
}

impl FpMap {
    pub fn new(source: FpSpace, target: FpSpace, matrix: FpMatrix) -> Result<Self> {
        if matrix.cols != source.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: source.ambient_dim(),
                got: matrix.cols,
            });
        }
        if matrix.rows != target.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: target.ambient_dim(),
                got: matrix.rows,
            });
        }
        Ok(FpMap {
            source,
            target,
            matrix,
        })
    }

    pub fn kernel(&self) -> Vec<Vec<u32>> {
        self.matrix.kernel()
    }

    pub fn image(&self) -> Vec<Vec<u32>> {
        self.matrix.image()
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
}

/// Representative of v + span(subspace) with zeros at every pivot of the echelonized subspace.
pub fn canonical_rep(p: u32, v: &[u32], subspace: &[Vec<u32>]) -> Result<Vec<u32>> {
    for s in subspace {
        if s.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: v.len(),
                got: s.len(),
            });
        }
    }
    let ech = FpEchelon::new(p, v.len(), subspace);
    Ok(ech.reduce(v))
}

/// Echelonized subspace of F_p^n, reusable for many reductions.
#[derive(Clone, Debug)]
pub struct FpEchelon {
    p: u32,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl FpEchelon {
    pub fn new(p: u32, dim: usize, gens: &[Vec<u32>]) -> Self {
        if gens.is_empty() {
            return FpEchelon {
                p,
                rows: Vec::new(),
                pivots: Vec::new(),
            };
        }
        let m = FpMatrix::from_rows(p, dim, gens);
        let (r, pivots) = m.rref();
        let rows = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        FpEchelon { p, rows, pivots }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut out: Vec<u32> = v.iter().map(|&x| x % self.p).collect();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = out[pc] as u64;
            if c == 0 {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row) {
                *o = ((*o as u64 + p * p - c * r as u64) % p) as u32;
            }
        }
        out
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

/// Sparse k-vector indexed by ordered keys.
pub type KVec<K> = BTreeMap<K, Fel>;

fn kvec_axpy<K: Ord + Clone>(f: &FieldCtx, y: &mut KVec<K>, a: Fel, x: &KVec<K>) {
    if a.is_zero() {
        return;
    }
    for (k, &v) in x {
        let e = y.entry(k.clone()).or_insert(Fel::ZERO);
        *e = f.add(*e, f.mul(a, v));
        if e.is_zero() {
            y.remove(k);
        }
    }
}

/// Incremental echelon basis over F_{p^M} that remembers how each row was built
/// from the inserted vectors.
#[derive(Clone, Debug)]
pub struct KEchelon<K: Ord + Clone> {
    rows: Vec<KVec<K>>,
    pivots: Vec<K>,
    combos: Vec<Vec<Fel>>,
    inputs: usize,
}

impl<K: Ord + Clone> Default for KEchelon<K> {
    fn default() -> Self {
        KEchelon {
            rows: Vec::new(),
            pivots: Vec::new(),
            combos: Vec::new(),
            inputs: 0,
        }
    }
}

impl<K: Ord + Clone> KEchelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inputs
    }

    pub fn is_empty(&self) -> bool {
        self.inputs == 0
    }

    /// Reduce v; returns the residue and the row coefficients used.
    fn reduce_tracked(&self, f: &FieldCtx, v: &KVec<K>) -> (KVec<K>, Vec<Fel>) {
        let mut r = v.clone();
        let mut used = vec![Fel::ZERO; self.rows.len()];
        for (idx, (row, piv)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if let Some(&c) = r.get(piv) {
                kvec_axpy(f, &mut r, f.neg(c), row);
                used[idx] = c;
            }
        }
        (r, used)
    }

    pub fn is_independent(&self, f: &FieldCtx, v: &KVec<K>) -> bool {
        !self.reduce_tracked(f, v).0.is_empty()
    }

    /// Appends v if independent of what is already present; returns whether it was.
    pub fn insert(&mut self, f: &FieldCtx, v: &KVec<K>) -> bool {
        let (r, used) = self.reduce_tracked(f, v);
        if r.is_empty() {
            return false;
        }
        let (piv, &lead) = r.iter().next().map(|(k, c)| (k.clone(), c)).unwrap();
        let inv = f.inv(lead);
        let mut row = KVec::new();
        kvec_axpy(f, &mut row, inv, &r);
        // row = inv·(v - Σ used_i row_i), rows expressed through inputs
        let mut combo = vec![Fel::ZERO; self.inputs + 1];
        combo[self.inputs] = inv;
        for (idx, &c) in used.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let factor = f.neg(f.mul(inv, c));
            for (t, &x) in self.combos[idx].iter().enumerate() {
                combo[t] = f.add(combo[t], f.mul(factor, x));
            }
        }
        self.rows.push(row);
        self.pivots.push(piv);
        self.combos.push(combo);
        self.inputs += 1;
        true
    }

    /// Coefficients of v in terms of the inserted vectors, if v lies in their span.
    pub fn coords(&self, f: &FieldCtx, v: &KVec<K>) -> Option<Vec<Fel>> {
        let (r, used) = self.reduce_tracked(f, v);
        if !r.is_empty() {
            return None;
        }
        let mut out = vec![Fel::ZERO; self.inputs];
        for (idx, &c) in used.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (t, &x) in self.combos[idx].iter().enumerate() {
                out[t] = f.add(out[t], f.mul(c, x));
            }
        }
        Some(out)
    }
}

/// Reduced row echelon basis of the span of `rows`, sorted by pivot key.
pub fn k_rref<K: Ord + Clone>(f: &FieldCtx, rows: &[KVec<K>]) -> Vec<KVec<K>> {
    let mut basis: Vec<KVec<K>> = Vec::new();
    for v in rows {
        let mut r = v.clone();
        for b in &basis {
            let piv = b.keys().next().unwrap();
            if let Some(&c) = r.get(piv) {
                kvec_axpy(f, &mut r, f.neg(c), b);
            }
        }
        if r.is_empty() {
            continue;
        }
        let lead = *r.values().next().unwrap();
        let mut n = KVec::new();
        kvec_axpy(f, &mut n, f.inv(lead), &r);
        let piv = n.keys().next().unwrap().clone();
        for b in basis.iter_mut() {
            if let Some(&c) = b.get(&piv) {
                let snapshot = n.clone();
                kvec_axpy(f, b, f.neg(c), &snapshot);
            }
        }
        basis.push(n);
    }
    basis.sort_by(|a, b| a.keys().next().cmp(&b.keys().next()));
    basis
}

pub fn ring_to_kvec(a: &RingElem) -> KVec<Term> {
    a.terms().collect()
}

pub fn kvec_to_ring(v: &KVec<Term>) -> RingElem {
    let mut r = RingElem::zero();
    for (&t, &c) in v {
        let m = RingElem::monomial(t, c);
        for (k, x) in m.poly.iter().enumerate() {
            if !x.is_zero() {
                if r.poly.len() <= k {
                    r.poly.resize(k + 1, Fel::ZERO);
                }
                r.poly[k] = *x;
            }
        }
        r.pp.extend(m.pp);
    }
    r
}

pub fn k_rref_ring(f: &FieldCtx, rows: &[RingElem]) -> Vec<RingElem> {
    let vs: Vec<KVec<Term>> = rows.iter().map(ring_to_kvec).collect();
    k_rref(f, &vs).iter().map(kvec_to_ring).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_on_f4_is_invertible() {
        let f = FieldCtx::new(2, 2, 2).unwrap();
        let cols: Vec<Vec<u32>> = [Fel::ONE, f.parse("10").unwrap()]
            .iter()
            .map(|&b| f.coeffs(f.frobenius(b, 1)))
            .collect();
        let m = FpMatrix::from_columns(2, 2, &cols);
        assert_eq!(m.rank(), 2);
        assert!(m.kernel().is_empty());
    }

    #[test]
    fn zero_and_identity() {
        let z = FpMatrix::zeros(3, 4, 4);
        assert_eq!(z.kernel().len(), 4);
        let id = FpMatrix::identity(3, 4);
        assert_eq!(id.rank(), 4);
        assert!(id.kernel().is_empty());
    }

    #[test]
    fn expand_basis_readoff() {
        let f = FieldCtx::new(2, 2, 2).unwrap();
        assert_eq!(fp_expand(&f, &[f.parse("10").unwrap()]), vec![0, 1]);
        assert_eq!(fp_expand(&f, &[Fel::ZERO]), vec![0, 0]);
        assert!(fp_contract(&f, &[1, 0, 1]).is_err());
    }

    #[test]
    fn canonical_rep_trivial_cases() {
        let v = vec![1, 2, 0];
        let whole: Vec<Vec<u32>> = (0..3)
            .map(|i| (0..3).map(|j| u32::from(i == j)).collect())
            .collect();
        assert_eq!(canonical_rep(3, &v, &whole).unwrap(), vec![0, 0, 0]);
        assert_eq!(canonical_rep(3, &v, &[]).unwrap(), v);
        assert_eq!(canonical_rep(3, &v, std::slice::from_ref(&v)).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn kechelon_coords() {
        let f = FieldCtx::new(3, 1, 2).unwrap();
        let mk = |pairs: &[(u32, u32)]| -> KVec<u32> {
            pairs.iter().map(|&(k, c)| (k, Fel(c))).collect()
        };
        let a = mk(&[(0, 1), (1, 2)]);
        let b = mk(&[(1, 1), (2, 5)]);
        let mut e = KEchelon::new();
        assert!(e.insert(&f, &a));
        assert!(e.insert(&f, &b));
        let mut target = KVec::new();
        kvec_axpy(&f, &mut target, Fel(4), &a);
        kvec_axpy(&f, &mut target, Fel(7), &b);
        assert_eq!(e.coords(&f, &target), Some(vec![Fel(4), Fel(7)]));
        assert!(!e.insert(&f, &target));
        assert_eq!(e.coords(&f, &mk(&[(3, 1)])), None);
    }
}
