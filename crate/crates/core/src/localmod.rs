//! Covers of a punctured formal disc: k((u)) over k((t)) with u^{n_t} = t and the
//! stabilizer generator acting by u ↦ ζ_t u. Classes live in u^{-1}k[u^{-1}] modulo ℘.

use crate::error::{Error, Result};
use crate::gf::{mod_inverse, FieldCtx, Fel};
use crate::kummer::KummerCover;
use crate::moduli::RhoAction;
use crate::pfrac::Place;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Principal part Σ c_j u^{-j}, j ≥ 1.
pub type LocalElem = BTreeMap<u64, Fel>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCover {
    pub ctx: Arc<FieldCtx>,
    pub n_t: u64,
    pub zeta_t: Fel,
    pub e_loc: Fel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalGlobalRow {
    pub level: usize,
    pub local_dim: usize,
    pub global_dim: usize,
    pub equal: bool,
}

impl LocalCover {
    pub fn new(ctx: Arc<FieldCtx>, n_t: u64, zeta_t: Fel, e_loc: Fel) -> Result<Self> {
        if n_t.is_multiple_of(ctx.p()) {
            return Err(Error::NotCoprime { n: n_t, p: ctx.p() });
        }
        if ctx.pow(zeta_t, n_t as i64) != Fel::ONE || ctx.mult_order(zeta_t) != n_t {
            return Err(Error::ConfigInvalid("zeta_t is not a primitive n_t-th root".into()));
        }
        if !ctx.in_fq(e_loc) || ctx.pow(e_loc, n_t as i64) != Fel::ONE {
            return Err(Error::ConfigInvalid("local multiplier not an n_t-th root in F_q".into()));
        }
        Ok(LocalCover {
            ctx,
            n_t,
            zeta_t,
            e_loc,
        })
    }

    /// u^{n_t} = t with u ↦ ζ_t u, ζ_t = ζ_n^{n/n_t}, and ρ restricted to Z/n_t.
    pub fn standard(ctx: Arc<FieldCtx>, n: u64, n_t: u64, e_rho: Fel) -> Result<Self> {
        if !n.is_multiple_of(n_t) {
            return Err(Error::ConfigInvalid(format!("n_t = {n_t} does not divide n = {n}")));
        }
        let zeta = ctx.root_of_unity(n)?;
        let zeta_t = ctx.pow(zeta, (n / n_t) as i64);
        let e_loc = ctx.pow(e_rho, (n / n_t) as i64);
        Self::new(ctx, n_t, zeta_t, e_loc)
    }

    /// The local cover at a point above `place`, in the uniformizer used by
    /// `KummerCover::expand`: the stabilizer σ^g moves u by ζ_n^{gλ} with λ·v(y) ≡ 1 mod e.
    pub fn at_point(cover: &KummerCover, place: Place, rho: &RhoAction) -> Result<Self> {
        let f = cover.f();
        let d = cover.place_data(place);
        let lambda = if d.e == 1 {
            0
        } else {
            mod_inverse(d.mu.rem_euclid(d.e as i64) as u64, d.e).expect("v(y) is a unit mod e")
        };
        let zeta_t = f.pow(cover.zeta, (d.g * lambda) as i64);
        let e_loc = f.pow(rho.e_rho, d.g as i64);
        Self::new(cover.base.ctx.clone(), d.e, zeta_t, e_loc)
    }

    pub fn f(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    pub fn is_eigen(&self, j: u64) -> bool {
        self.ctx.pow(self.zeta_t, -(j as i64)) == self.e_loc
    }

    /// The residue i0 in [0, n_t) of the exponents j admitted by the eigencondition.
    pub fn i0(&self) -> Option<u64> {
        (0..self.n_t).find(|&j| self.is_eigen(j))
    }

    /// Same ramification index and same admitted residue class of exponents.
    pub fn same_kernel(&self, other: &LocalCover) -> bool {
        self.n_t == other.n_t && self.i0() == other.i0()
    }

    /// Exponents j of the basis u^{-j} of (KerD₀)_ℓ.
    pub fn local_kernel_level(&self, l: usize) -> Vec<u64> {
        let top = self.q().pow(l as u32);
        (1..=top).filter(|&j| self.is_eigen(j)).collect()
    }

    /// Exponents of the level-ℓ representatives: q^{ℓ-1} < j ≤ q^ℓ (all j ≤ 1 at ℓ = 0).
    pub fn band(&self, l: usize) -> Vec<u64> {
        let top = self.q().pow(l as u32);
        let low = if l == 0 { 0 } else { self.q().pow(l as u32 - 1) };
        (low + 1..=top).filter(|&j| self.is_eigen(j)).collect()
    }

    pub fn local_dims(&self, l_max: usize) -> Vec<usize> {
        (0..=l_max)
            .map(|l| {
                let cur = self.local_kernel_level(l).len();
                let prev = if l == 0 { 0 } else { self.local_kernel_level(l - 1).len() };
                cur - prev
            })
            .collect()
    }

    /// ⌊(q^ℓ - i0)/n_t⌋ - ⌊(q^{ℓ-1} - i0)/n_t⌋ for ℓ ≥ 1; 0 without admissible residue.
    pub fn floor_formula(&self, l: usize) -> i64 {
        assert!(l >= 1);
        let Some(i0) = self.i0() else { return 0 };
        let q = self.q() as i64;
        let n = self.n_t as i64;
        let (hi, lo) = (q.pow(l as u32), q.pow(l as u32 - 1));
        (hi - i0 as i64).div_euclid(n) - (lo - i0 as i64).div_euclid(n)
    }

    /// Canonical representative modulo ℘ of level ℓ-1: c·u^{-j} ≡ c^q·u^{-jq} until j > q^{ℓ-1}.
    pub fn local_reduce(&self, v: &LocalElem, l: usize) -> Result<LocalElem> {
        let f = self.f();
        let q = self.q();
        let top = q.pow(l as u32);
        let low = if l == 0 { 0 } else { q.pow(l as u32 - 1) };
        let mut out = LocalElem::new();
        for (&j0, &c0) in v {
            if c0.is_zero() {
                continue;
            }
            if j0 == 0 || j0 > top {
                return Err(Error::LevelExceeded(l));
            }
            if !self.is_eigen(j0) {
                return Err(Error::NotInKernel);
            }
            let (mut j, mut c) = (j0, c0);
            while j <= low {
                j *= q;
                c = f.frob_q(c);
            }
            let slot = out.entry(j).or_insert(Fel::ZERO);
            *slot = f.add(*slot, c);
            if slot.is_zero() {
                out.remove(&j);
            }
        }
        Ok(out)
    }

    /// ℘(v) = v^q - v on principal parts.
    pub fn wp(&self, v: &LocalElem) -> LocalElem {
        let f = self.f();
        let q = self.q();
        let mut out = LocalElem::new();
        for (&j, &c) in v {
            for (jj, cc) in [(j * q, f.frob_q(c)), (j, f.neg(c))] {
                let slot = out.entry(jj).or_insert(Fel::ZERO);
                *slot = f.add(*slot, cc);
                if slot.is_zero() {
                    out.remove(&jj);
                }
            }
        }
        out
    }

    /// Coordinates of a reduced element on `band(ℓ)`.
    pub fn band_coords(&self, v: &LocalElem, l: usize) -> Result<Vec<Fel>> {
        let band = self.band(l);
        for j in v.keys() {
            if !band.contains(j) {
                return Err(Error::LevelExceeded(l));
            }
        }
        Ok(band
            .iter()
            .map(|j| v.get(j).copied().unwrap_or(Fel::ZERO))
            .collect())
    }

    pub fn label(&self, v: &LocalElem) -> String {
        if v.is_empty() {
            return "0".into();
        }
        v.iter()
            .map(|(&j, &c)| {
                if c == Fel::ONE {
                    format!("u^-{j}")
                } else {
                    format!("{}*u^-{j}", self.ctx.format(c))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BijectionCheck {
    pub level: usize,
    pub global_count: u128,
    pub local_count: u128,
    pub distinct_images: u128,
    pub bijective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalGlobalReport {
    pub n: u64,
    pub rho_s: i64,
    pub rows: Vec<LocalGlobalRow>,
    pub pieces_equal: bool,
    pub point_cover_matches: bool,
    pub elements: BijectionCheck,
    pub classes: BijectionCheck,
}

/// Global side: yⁿ = x over P¹ - {0, ∞} with classes allowed to ramify only at ∞, where
/// the inertia generator acting by u ↦ ζ_n u is σ^{-1}; local side: the standard cover
/// with ρ composed with that inversion. Dimensions are compared for ℓ = 0..=l_max and
/// both elements and classes are matched at level `l_check` over F_q.
pub fn local_global_compare(
    ctx: Arc<FieldCtx>,
    n: u64,
    s: i64,
    l_max: usize,
    l_check: usize,
    budget: u128,
) -> Result<LocalGlobalReport> {
    use crate::kummer::BranchRule;
    use crate::moduli::{tuples, FilteredKernel};
    use crate::pfrac::PuncturedLine;
    use crate::restrict::Restriction;
    use std::collections::BTreeSet;

    let base = PuncturedLine::new(ctx.clone(), vec![Fel::ZERO])?;
    let cover = KummerCover::new(base, n, vec![1], Fel::ONE)?;
    let rho = RhoAction::new(&cover, s)?;
    let fk = FilteredKernel::build(&cover, rho, vec![Place::Infinity], l_max.max(l_check))?;
    let local = LocalCover::standard(ctx.clone(), n, n, ctx.inv(rho.e_rho))?;
    let has_const = rho.is_trivial() as usize;

    let rows: Vec<LocalGlobalRow> = (0..=l_max)
        .map(|l| {
            let global_dim = fk.dim_kernel(l) - has_const;
            let local_dim = local.local_kernel_level(l).len();
            LocalGlobalRow {
                level: l,
                local_dim,
                global_dim,
                equal: local_dim == global_dim,
            }
        })
        .collect();
    let local_pieces = local.local_dims(l_max);
    let pieces_equal = (0..=l_max).all(|l| fk.d(l) == local_pieces[l]);

    let r = Restriction::new(&fk, BranchRule::Smallest, 0)?;
    let point_cover_matches = r.targets()[0].local.same_kernel(&local);
    let q = ctx.order() as u128;
    let all: Vec<Fel> = ctx.elements().collect();

    let basis = fk.kernel_level(l_check)?;
    let global_count = q.checked_pow(basis.len() as u32).unwrap_or(u128::MAX);
    if global_count > budget {
        return Err(Error::BudgetExceeded {
            requested: global_count,
            budget,
        });
    }
    let local_dim = local.local_kernel_level(l_check).len();
    let local_count = q.pow(local_dim as u32);
    let mut images = BTreeSet::new();
    let mut in_local = true;
    for coeffs in tuples(&all, basis.len()) {
        let mut b = crate::kummer::CoverElem::zero(n);
        for (c, k) in coeffs.iter().zip(basis) {
            b = cover.add(&b, &cover.scale(k, *c));
        }
        let pp = r.principal_parts(&b)?.remove(0);
        in_local &= pp
            .keys()
            .all(|&j| j <= ctx.q().pow(l_check as u32) && local.is_eigen(j));
        images.insert(pp);
    }
    let distinct = images.len() as u128;
    let elements = BijectionCheck {
        level: l_check,
        global_count,
        local_count,
        distinct_images: distinct,
        bijective: in_local
            && distinct == local_count
            && distinct * q.pow(has_const as u32) == global_count,
    };

    let classes_g = fk.enumerate_classes(l_check, ctx.big_m(), budget)?;
    let mut images = BTreeSet::new();
    for cls in &classes_g {
        images.insert(r.restrict_class(cls)?.remove(0));
    }
    let local_classes = q.pow(local.band(l_check).len() as u32);
    let distinct = images.len() as u128;
    let classes = BijectionCheck {
        level: l_check,
        global_count: classes_g.len() as u128,
        local_count: local_classes,
        distinct_images: distinct,
        bijective: distinct == local_classes && distinct == classes_g.len() as u128,
    };

    Ok(LocalGlobalReport {
        n,
        rho_s: s,
        rows,
        pieces_equal,
        point_cover_matches,
        elements,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Arc<FieldCtx> {
        Arc::new(FieldCtx::new(2, 2, 2).unwrap())
    }

    #[test]
    fn cfg_a_local_at_zero() {
        let f = f4();
        let zeta = f.root_of_unity(3).unwrap();
        let lc = LocalCover::standard(f, 3, 3, zeta).unwrap();
        assert_eq!(lc.local_kernel_level(1), vec![2]);
        assert!(lc.local_kernel_level(0).is_empty());
        assert_eq!(lc.local_dims(1), vec![0, 1]);
    }

    #[test]
    fn cfg_a_local_global() {
        let rep = local_global_compare(f4(), 3, 1, 3, 1, 1 << 20).unwrap();
        assert!(rep.rows.iter().all(|r| r.equal));
        assert_eq!(
            rep.rows.iter().map(|r| r.global_dim).collect::<Vec<_>>(),
            vec![1, 2, 6, 22]
        );
        assert!(rep.pieces_equal && rep.point_cover_matches);
        assert_eq!((rep.elements.global_count, rep.elements.local_count), (16, 16));
        assert!(rep.elements.bijective);
        assert_eq!(rep.classes.global_count, 4);
        assert!(rep.classes.bijective);
    }

    #[test]
    fn trivial_rho_local_global() {
        let rep = local_global_compare(f4(), 3, 0, 2, 1, 1 << 20).unwrap();
        assert!(rep.rows.iter().all(|r| r.equal), "{:?}", rep.rows);
        assert!(rep.pieces_equal && rep.elements.bijective && rep.classes.bijective);
    }

    #[test]
    fn untwisted_counts() {
        let f = f4();
        let lc = LocalCover::standard(f, 3, 1, Fel::ONE).unwrap();
        assert_eq!(lc.local_kernel_level(2).len(), 16);
        assert_eq!(lc.local_dims(2), vec![1, 3, 12]);
    }

    #[test]
    fn t4_reduces_to_t1_class() {
        let f = f4();
        let lc = LocalCover::standard(f, 3, 1, Fel::ONE).unwrap();
        let t4: LocalElem = [(4, Fel::ONE)].into_iter().collect();
        let t1: LocalElem = [(1, Fel::ONE)].into_iter().collect();
        assert_eq!(lc.local_reduce(&t4, 1).unwrap(), lc.local_reduce(&t1, 1).unwrap());
        assert!(lc.local_reduce(&lc.wp(&t1), 1).unwrap().is_empty());
        assert!(lc.local_reduce(&LocalElem::new(), 1).unwrap().is_empty());
    }
}
