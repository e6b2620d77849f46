//! σ-eigenspaces of B, their pole filtration, the inductive basis chain and
//! Artin–Schreier class representatives.
//!
//! A chain over nested spaces V_0 ⊆ V_1 ⊆ ... stores one basis K_ℓ per level, each
//! extending the previous one by the q-th powers of the previous level's new
//! vectors and then by the first vectors of V_ℓ (in monomial order) that stay
//! independent. Classes at level ℓ live in V_ℓ / (℘V_{ℓ-1} [+ k]) and are
//! represented by coordinates on K_ℓ - K_{ℓ-1}.

use crate::error::{Error, Result};
use crate::fplinalg::{fp_expand, FpEchelon, KEchelon, KVec};
use crate::gf::{FieldCtx, Fel};
use crate::kummer::{CoverElem, KummerCover};
use crate::pfrac::{Place, Term};
use serde::Serialize;
use std::sync::OnceLock;

pub type CoverKey = (usize, Term);

pub fn cover_kvec(b: &CoverElem) -> KVec<CoverKey> {
    let mut v = KVec::new();
    for (j, a) in b.comps.iter().enumerate() {
        for (t, c) in a.terms() {
            v.insert((j, t), c);
        }
    }
    v
}

/// e_ρ = ζ_n^s, required to lie in F_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RhoAction {
    pub s: i64,
    #[serde(skip)]
    pub e_rho: Fel,
}

impl RhoAction {
    pub fn new(cover: &KummerCover, s: i64) -> Result<Self> {
        let f = cover.f();
        let e_rho = f.pow(cover.zeta, s);
        if !f.in_fq(e_rho) {
            return Err(Error::RhoNotInFq { s });
        }
        Ok(RhoAction { s, e_rho })
    }

    pub fn is_trivial(&self) -> bool {
        self.e_rho == Fel::ONE
    }
}

/// The unique j0 in [0, n) with ζ_n^{j0} = e_ρ; KerD = A·y^{j0}.
pub fn kernel_d(cover: &KummerCover, rho: &RhoAction) -> usize {
    let f = cover.f();
    (0..cover.n as usize)
        .find(|&j| f.pow(cover.zeta, j as i64) == rho.e_rho)
        .expect("e_rho is a power of zeta_n")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ASClass {
    pub level: usize,
    #[serde(skip)]
    pub coords: Vec<Fel>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModuliPiece {
    pub level: usize,
    pub dim: usize,
    pub labels: Vec<String>,
}

#[derive(Debug)]
struct Level {
    space: Vec<CoverElem>,
    start: usize,
    end: usize,
    fp: OnceLock<FpEchelon>,
}

/// Basis chain over nested spaces, with ℘-reduction.
#[derive(Debug)]
pub struct Chain {
    cover: KummerCover,
    elems: Vec<CoverElem>,
    frob_image: Vec<Option<usize>>,
    has_const: bool,
    levels: Vec<Level>,
    ech: KEchelon<CoverKey>,
}

impl Chain {
    /// `spaces[ℓ]` is a basis of V_ℓ; when `mod_constants`, the constant 1 must lie in V_0
    /// and classes are also taken modulo k.
    pub fn build(cover: &KummerCover, spaces: Vec<Vec<CoverElem>>, mod_constants: bool) -> Result<Self> {
        let f = cover.f().clone();
        let mut chain = Chain {
            cover: cover.clone(),
            elems: Vec::new(),
            frob_image: Vec::new(),
            has_const: mod_constants,
            levels: Vec::new(),
            ech: KEchelon::new(),
        };
        if mod_constants {
            let one = cover.one();
            chain.ech.insert(&f, &cover_kvec(&one));
            chain.elems.push(one);
            chain.frob_image.push(None);
        }
        for (l, space) in spaces.into_iter().enumerate() {
            let start = chain.elems.len();
            let mut space_ech = KEchelon::new();
            for v in &space {
                space_ech.insert(&f, &cover_kvec(v));
            }
            if l > 0 {
                let prev = &chain.levels[l - 1];
                let (ps, pe) = (prev.start, prev.end);
                for i in ps..pe {
                    let fq = cover.frob_q(&chain.elems[i]);
                    let kv = cover_kvec(&fq);
                    if space_ech.coords(&f, &kv).is_none() {
                        return Err(Error::LevelExceeded(l));
                    }
                    if !chain.ech.insert(&f, &kv) {
                        return Err(Error::DependentSeed(l));
                    }
                    chain.frob_image[i] = Some(chain.elems.len());
                    chain.elems.push(fq);
                    chain.frob_image.push(None);
                }
            }
            for v in &space {
                if chain.elems.len() >= space.len() {
                    break;
                }
                let kv = cover_kvec(v);
                if chain.ech.insert(&f, &kv) {
                    chain.elems.push(v.clone());
                    chain.frob_image.push(None);
                }
            }
            let end = chain.elems.len();
            if end != space.len() {
                return Err(Error::DimensionMismatch {
                    expected: space.len(),
                    got: end,
                });
            }
            chain.levels.push(Level {
                space,
                start,
                end,
                fp: OnceLock::new(),
            });
        }
        Ok(chain)
    }

    pub fn cover(&self) -> &KummerCover {
        &self.cover
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn elems(&self) -> &[CoverElem] {
        &self.elems
    }

    /// dim V_ℓ.
    pub fn dim_space(&self, l: usize) -> usize {
        self.levels[l].end
    }

    pub fn space(&self, l: usize) -> &[CoverElem] {
        &self.levels[l].space
    }

    /// K_ℓ - K_{ℓ-1}.
    pub fn new_at(&self, l: usize) -> &[CoverElem] {
        &self.elems[self.levels[l].start..self.levels[l].end]
    }

    pub fn d(&self, l: usize) -> usize {
        self.levels[l].end - self.levels[l].start
    }

    /// Index of f^q in the chain for the chain element i, once built.
    pub fn frob_image(&self, i: usize) -> Option<usize> {
        self.frob_image[i]
    }

    fn check_level(&self, l: usize) -> Result<()> {
        if l >= self.levels.len() {
            return Err(Error::LevelExceeded(self.top()));
        }
        Ok(())
    }

    /// Coordinates of b on K_ℓ (length dim V_ℓ).
    pub fn coords(&self, b: &CoverElem, l: usize) -> Result<Vec<Fel>> {
        self.check_level(l)?;
        let f = self.cover.f();
        let c = self
            .ech
            .coords(f, &cover_kvec(b))
            .ok_or(Error::LevelExceeded(l))?;
        let end = self.levels[l].end;
        if c[end..].iter().any(|x| !x.is_zero()) {
            return Err(Error::LevelExceeded(l));
        }
        Ok(c[..end].to_vec())
    }

    /// Class of b at level ℓ by pushing every lower coefficient up along f ↦ f^q.
    pub fn push_up(&self, b: &CoverElem, l: usize) -> Result<ASClass> {
        let f = self.cover.f();
        let mut c = self.coords(b, l)?;
        let start = self.levels[l].start;
        for i in 0..start {
            if c[i].is_zero() {
                continue;
            }
            if self.has_const && i == 0 {
                c[i] = Fel::ZERO;
                continue;
            }
            let j = self.frob_image[i].expect("every lower chain element has its q-th power");
            c[j] = f.add(c[j], f.frob_q(c[i]));
            c[i] = Fel::ZERO;
        }
        Ok(ASClass {
            level: l,
            coords: c[start..].to_vec(),
        })
    }

    fn fp_echelon(&self, l: usize) -> &FpEchelon {
        self.levels[l].fp.get_or_init(|| {
            let f = self.cover.f();
            let big_m = f.big_m() as usize;
            let dim = big_m * self.levels[l].end;
            let start = self.levels[l].start;
            let mut gens = Vec::new();
            for i in 0..start {
                for t in 0..big_m as u32 {
                    let g = f.basis_elem(t);
                    let mut v = vec![Fel::ZERO; self.levels[l].end];
                    if self.has_const && i == 0 {
                        v[0] = g;
                    } else {
                        let j = self.frob_image[i].expect("lower chain element has a q-th power");
                        v[j] = f.frob_q(g);
                        v[i] = f.neg(g);
                    }
                    gens.push(fp_expand(f, &v));
                }
            }
            FpEchelon::new(f.p() as u32, dim, &gens)
        })
    }

    /// Canonical representative of b modulo ℘V_{ℓ-1} (and k), via F_p echelon reduction.
    pub fn wp_reduce(&self, b: &CoverElem, l: usize) -> Result<ASClass> {
        let f = self.cover.f();
        let c = self.coords(b, l)?;
        let reduced = self.fp_echelon(l).reduce(&fp_expand(f, &c));
        let all = crate::fplinalg::fp_contract(f, &reduced)?;
        let start = self.levels[l].start;
        debug_assert!(all[..start].iter().all(|x| x.is_zero()));
        Ok(ASClass {
            level: l,
            coords: all[start..].to_vec(),
        })
    }

    /// Σ coords_i · (K_ℓ - K_{ℓ-1})_i.
    pub fn representative(&self, cls: &ASClass) -> CoverElem {
        let mut out = CoverElem::zero(self.cover.n);
        for (c, k) in cls.coords.iter().zip(self.new_at(cls.level)) {
            if !c.is_zero() {
                out = self.cover.add(&out, &self.cover.scale(k, *c));
            }
        }
        out
    }

    pub fn labels(&self, l: usize) -> Vec<String> {
        self.new_at(l).iter().map(|b| self.cover.label(b)).collect()
    }
}

/// (KerD)_ℓ for ℓ = 0..=top with its chain.
#[derive(Debug)]
pub struct FilteredKernel {
    pub rho: RhoAction,
    pub j0: usize,
    pub support: Vec<Place>,
    pub chain: Chain,
    full: OnceLock<std::result::Result<Chain, Error>>,
}

impl FilteredKernel {
    pub fn build(cover: &KummerCover, rho: RhoAction, support: Vec<Place>, l_max: usize) -> Result<Self> {
        let j0 = kernel_d(cover, &rho);
        let q = cover.f().q();
        let spaces = (0..=l_max)
            .map(|l| {
                cover
                    .rr_component(j0, q.pow(l as u32), &support)
                    .into_iter()
                    .map(|a| CoverElem::from_component(cover.n, j0, a))
                    .collect()
            })
            .collect();
        let chain = Chain::build(cover, spaces, rho.is_trivial())?;
        Ok(FilteredKernel {
            rho,
            j0,
            support,
            chain,
            full: OnceLock::new(),
        })
    }

    pub fn cover(&self) -> &KummerCover {
        self.chain.cover()
    }

    pub fn f(&self) -> &FieldCtx {
        self.cover().f()
    }

    pub fn top(&self) -> usize {
        self.chain.top()
    }

    pub fn q(&self) -> u64 {
        self.f().q()
    }

    /// Basis of (KerD)_ℓ.
    pub fn kernel_level(&self, l: usize) -> Result<&[CoverElem]> {
        self.chain.check_level(l)?;
        Ok(self.chain.space(l))
    }

    pub fn dim_kernel(&self, l: usize) -> usize {
        self.chain.dim_space(l)
    }

    pub fn d(&self, l: usize) -> usize {
        self.chain.d(l)
    }

    pub fn piece(&self, l: usize) -> ModuliPiece {
        ModuliPiece {
            level: l,
            dim: self.d(l),
            labels: self.chain.labels(l),
        }
    }

    pub fn is_eigen(&self, b: &CoverElem) -> bool {
        let v = self.cover();
        v.sigma_apply(b) == v.scale(b, self.rho.e_rho)
    }

    pub fn wp_reduce(&self, b: &CoverElem, l: usize) -> Result<ASClass> {
        if !self.is_eigen(b) {
            return Err(Error::NotInKernel);
        }
        self.chain.wp_reduce(b, l)
    }

    /// Same class via the coefficient push-up rule; independent of the F_p echelon route.
    pub fn push_up(&self, b: &CoverElem, l: usize) -> Result<ASClass> {
        if !self.is_eigen(b) {
            return Err(Error::NotInKernel);
        }
        self.chain.push_up(b, l)
    }

    pub fn representative(&self, cls: &ASClass) -> CoverElem {
        self.chain.representative(cls)
    }

    /// δ_i = j0·v(y) at each supported puncture, with its ramification index.
    pub fn deltas(&self) -> Vec<(Place, i64, u64)> {
        self.support
            .iter()
            .map(|&p| {
                let d = self.cover().place_data(p);
                (p, self.j0 as i64 * d.mu, d.e)
            })
            .collect()
    }

    /// The floor formula holds at ℓ when the level-(ℓ-1) bound divisor has degree ≥ -1.
    pub fn floor_applies(&self, l: usize) -> bool {
        assert!(l >= 1);
        let (fin, inf) = self
            .cover()
            .component_bounds(self.j0, self.q().pow(l as u32 - 1), &self.support);
        fin.iter().sum::<i64>() + inf >= -1
    }

    /// Σ_i (⌊(q^ℓ+δ_i)/n_i⌋ - ⌊(q^{ℓ-1}+δ_i)/n_i⌋) for ℓ ≥ 1.
    pub fn floor_formula(&self, l: usize) -> i64 {
        assert!(l >= 1);
        let q = self.q() as i64;
        let (hi, lo) = (q.pow(l as u32), q.pow(l as u32 - 1));
        self.deltas()
            .iter()
            .map(|&(_, delta, e)| {
                let e = e as i64;
                (hi + delta).div_euclid(e) - (lo + delta).div_euclid(e)
            })
            .sum()
    }

    /// All classes whose coordinates lie in the subfield of degree `sub_deg`.
    pub fn enumerate_classes(&self, l: usize, sub_deg: u32, budget: u128) -> Result<Vec<ASClass>> {
        self.chain.check_level(l)?;
        let f = self.f();
        let sub: Vec<Fel> = subfield(f, sub_deg);
        let d = self.d(l);
        let count = (sub.len() as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if count > budget {
            return Err(Error::BudgetExceeded {
                requested: count,
                budget,
            });
        }
        Ok(tuples(&sub, d)
            .map(|coords| ASClass { level: l, coords })
            .collect())
    }

    /// (k_i∨, k_i) pairs for K_ℓ - K_{ℓ-1}.
    pub fn universal_family(&self, l: usize) -> Vec<(String, CoverElem)> {
        self.chain
            .new_at(l)
            .iter()
            .enumerate()
            .map(|(i, k)| (format!("c{}", i + 1), k.clone()))
            .collect()
    }

    /// The unfiltered chain for all of B modulo ℘B + k, built once up to the top level.
    pub fn full_chain(&self) -> Result<&Chain> {
        let res = self.full.get_or_init(|| {
            let v = self.cover();
            let q = self.q();
            let spaces = (0..=self.top())
                .map(|l| v.rr_space_cover(q.pow(l as u32), &self.support))
                .collect();
            Chain::build(v, spaces, true)
        });
        res.as_ref().map_err(|e| e.clone())
    }

    /// The class of the same cover among all H-covers of V at level ℓ.
    pub fn iota_eval(&self, cls: &ASClass) -> Result<ASClass> {
        if cls.level > self.top() {
            return Err(Error::LevelExceeded(self.top()));
        }
        let rep = self.representative(cls);
        self.full_chain()?.wp_reduce(&rep, cls.level)
    }
}

/// Elements of the subfield F_{p^s} ⊆ F_{p^M} in index order.
pub fn subfield(f: &FieldCtx, s: u32) -> Vec<Fel> {
    f.elements().filter(|&a| f.frobenius(a, s as i64) == a).collect()
}

/// All tuples of length d over `alphabet`, lexicographic with the first entry slowest.
pub fn tuples(alphabet: &[Fel], d: usize) -> impl Iterator<Item = Vec<Fel>> + '_ {
    let total = (alphabet.len() as u128).pow(d as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![Fel::ZERO; d];
        for slot in v.iter_mut().rev() {
            *slot = alphabet[(idx % alphabet.len() as u128) as usize];
            idx /= alphabet.len() as u128;
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfrac::PuncturedLine;
    use std::sync::Arc;

    fn cfg_a(s: i64) -> FilteredKernel {
        let f = Arc::new(FieldCtx::new(2, 2, 2).unwrap());
        let base = PuncturedLine::new(f, vec![Fel::ZERO]).unwrap();
        let v = KummerCover::new(base, 3, vec![1], Fel::ONE).unwrap();
        let rho = RhoAction::new(&v, s).unwrap();
        let places = v.places();
        FilteredKernel::build(&v, rho, places, 2).unwrap()
    }

    #[test]
    fn j0_scan() {
        assert_eq!(cfg_a(1).j0, 1);
        assert_eq!(cfg_a(0).j0, 0);
        assert_eq!(cfg_a(2).j0, 2);
    }

    #[test]
    fn chain_levels_cfg_a() {
        let fk = cfg_a(1);
        let v = fk.cover();
        assert_eq!(fk.dim_kernel(0), 1);
        assert_eq!(fk.dim_kernel(1), 3);
        assert_eq!(fk.d(1), 2);
        let xy = v.monomial(1, Term::Pow(1), Fel::ONE);
        assert_eq!(&fk.chain.new_at(1)[0], &xy);
        assert_eq!(fk.chain.labels(1), vec!["x*y".to_string(), "x^-1*y".to_string()]);
    }

    #[test]
    fn xy_class_equals_y() {
        let fk = cfg_a(1);
        let v = fk.cover();
        let xy = v.monomial(1, Term::Pow(1), Fel::ONE);
        let y = v.y_pow(1);
        assert_eq!(fk.wp_reduce(&xy, 1).unwrap(), fk.wp_reduce(&y, 1).unwrap());
        let wp_y = v.wp(&y);
        assert!(fk.wp_reduce(&wp_y, 1).unwrap().coords.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn both_reduction_routes_agree() {
        let fk = cfg_a(1);
        for b in fk.kernel_level(2).unwrap().to_vec() {
            for c in [Fel(1), Fel(2), Fel(3)] {
                let bc = fk.cover().scale(&b, c);
                assert_eq!(fk.wp_reduce(&bc, 2).unwrap(), fk.push_up(&bc, 2).unwrap());
            }
        }
    }

    #[test]
    fn trivial_rho_quotients_constants() {
        let fk = cfg_a(0);
        assert_eq!(fk.d(0), 0);
        assert_eq!(fk.d(1), 2);
        let one = fk.cover().one();
        assert!(fk.wp_reduce(&one, 1).unwrap().coords.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn not_in_kernel_rejected() {
        let fk = cfg_a(1);
        let y2 = fk.cover().y_pow(2);
        assert_eq!(fk.wp_reduce(&y2, 1), Err(Error::NotInKernel));
    }
}
