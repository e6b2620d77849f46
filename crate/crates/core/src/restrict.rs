//! Restriction of global classes to the punctured discs at the supported punctures,
//! as an F_p-linear map on level-ℓ pieces.

use crate::error::{Error, Result};
use crate::fplinalg::{fp_expand, FpMap, FpMatrix, FpSpace};
use crate::gf::{gcd, Fel};
use crate::kummer::{BranchRule, CoverElem, KummerCover};
use crate::localmod::{LocalCover, LocalElem};
use crate::moduli::{ASClass, FilteredKernel, RhoAction};
use crate::pfrac::{Place, PuncturedLine};
use serde::Serialize;

/// Principal part of an element at one point above a puncture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PunctureExpansion {
    pub place: Place,
    pub branch: u64,
    pub precision: u64,
    pub pp: LocalElem,
}

/// Largest possible pole order of b at any point above `place`, from component valuations.
pub fn pole_bound(cover: &KummerCover, b: &CoverElem, place: Place) -> u64 {
    let d = cover.place_data(place);
    b.support()
        .into_iter()
        .map(|j| {
            let v = cover.base.valuation(&b.comps[j], place).unwrap();
            -(d.e as i64 * v + j as i64 * d.mu)
        })
        .max()
        .unwrap_or(0)
        .max(0) as u64
}

pub fn expand_at(
    cover: &KummerCover,
    b: &CoverElem,
    place: Place,
    branch: u64,
    precision: u64,
    rule: &BranchRule,
) -> Result<PunctureExpansion> {
    if precision < pole_bound(cover, b, place) {
        return Err(Error::InsufficientPrecision);
    }
    let s = cover.expand(b, place, branch, 0, rule)?;
    let pp = (1..=precision)
        .map(|j| (j, s.coeff(-(j as i64))))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    Ok(PunctureExpansion {
        place,
        branch,
        precision,
        pp,
    })
}

#[derive(Clone, Debug)]
pub struct PointTarget {
    pub place: Place,
    pub branch: u64,
    pub local: LocalCover,
}

#[derive(Clone, Debug)]
pub struct RestrictionMatrix {
    pub level: usize,
    pub map: FpMap,
    pub profile: Vec<u64>,
    pub d_global: usize,
    pub d_local: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictRow {
    pub profile: Vec<u64>,
    pub level: usize,
    pub d_global: usize,
    pub sum_d_local: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub surjective: bool,
    pub degree: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictVerdicts {
    pub kernel_p_power: bool,
    pub kernel_stable: bool,
    pub kernel_increases_at: Vec<usize>,
    pub first_surjective: Option<usize>,
    pub surjective_from_first: bool,
    pub stable_degree: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictReport {
    pub rows: Vec<RestrictRow>,
    pub verdicts: RestrictVerdicts,
}

/// p^k in decimal, or "p^k" symbolically when it overflows.
pub fn degree_string(p: u64, k: usize) -> String {
    match (p as u128).checked_pow(k as u32) {
        Some(v) => v.to_string(),
        None => format!("{p}^{k}"),
    }
}

/// r_ℓ for a filtered kernel, with one point (of the given branch) above each supported puncture.
pub struct Restriction<'a> {
    fk: &'a FilteredKernel,
    rule: BranchRule,
    targets: Vec<PointTarget>,
}

impl<'a> Restriction<'a> {
    pub fn new(fk: &'a FilteredKernel, rule: BranchRule, branch: u64) -> Result<Self> {
        let cover = fk.cover();
        let targets = fk
            .support
            .iter()
            .map(|&place| {
                let g = cover.place_data(place).g;
                Ok(PointTarget {
                    place,
                    branch: branch % g,
                    local: LocalCover::at_point(cover, place, &fk.rho)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        for t in &targets {
            cover.branch_root(t.place, &rule)?;
        }
        Ok(Restriction { fk, rule, targets })
    }

    pub fn targets(&self) -> &[PointTarget] {
        &self.targets
    }

    pub fn profile(&self) -> Vec<u64> {
        self.targets.iter().map(|t| t.local.n_t).collect()
    }

    /// Unreduced principal parts at every target point.
    pub fn principal_parts(&self, b: &CoverElem) -> Result<Vec<LocalElem>> {
        let cover = self.fk.cover();
        self.targets
            .iter()
            .map(|t| {
                let prec = pole_bound(cover, b, t.place);
                Ok(expand_at(cover, b, t.place, t.branch, prec, &self.rule)?.pp)
            })
            .collect()
    }

    /// Local classes of b at level ℓ.
    pub fn restrict_elem(&self, b: &CoverElem, l: usize) -> Result<Vec<LocalElem>> {
        let pps = self.principal_parts(b)?;
        self.targets
            .iter()
            .zip(pps)
            .map(|(t, pp)| t.local.local_reduce(&pp, l))
            .collect()
    }

    pub fn restrict_class(&self, cls: &ASClass) -> Result<Vec<LocalElem>> {
        self.restrict_elem(&self.fk.representative(cls), cls.level)
    }

    /// F_p coordinates of a tuple of reduced local classes on the level-ℓ bands.
    pub fn local_fp_coords(&self, locals: &[LocalElem], l: usize) -> Result<Vec<u32>> {
        let f = self.fk.f();
        let mut out = Vec::new();
        for (t, v) in self.targets.iter().zip(locals) {
            out.extend(fp_expand(f, &t.local.band_coords(v, l)?));
        }
        Ok(out)
    }

    pub fn matrix(&self, l: usize) -> Result<RestrictionMatrix> {
        let fk = self.fk;
        let f = fk.f();
        let big_m = f.big_m() as usize;
        let d = fk.d(l);
        let d_local: Vec<usize> = self.targets.iter().map(|t| t.local.band(l).len()).collect();
        let src_labels = fk.chain.labels(l);
        let mut columns = Vec::new();
        for i in 0..d {
            for t in 0..big_m as u32 {
                let mut coords = vec![Fel::ZERO; d];
                coords[i] = f.basis_elem(t);
                let locals = self.restrict_class(&ASClass { level: l, coords })?;
                columns.push(self.local_fp_coords(&locals, l)?);
            }
        }
        let mut tgt_labels = Vec::new();
        for t in &self.targets {
            let place = fk.cover().base.place_label(t.place);
            for j in t.local.band(l) {
                tgt_labels.push(format!("{place}:u^-{j}"));
            }
        }
        let rows = big_m * tgt_labels.len();
        let matrix = FpMatrix::from_columns(f.p() as u32, rows, &columns);
        let map = FpMap::new(
            FpSpace::new(big_m, src_labels),
            FpSpace::new(big_m, tgt_labels),
            matrix,
        )?;
        Ok(RestrictionMatrix {
            level: l,
            map,
            profile: self.profile(),
            d_global: d,
            d_local,
        })
    }

    pub fn row(&self, l: usize) -> Result<RestrictRow> {
        let m = self.matrix(l)?;
        Ok(row_of(&m, self.fk.f().p()))
    }
}

fn row_of(m: &RestrictionMatrix, p: u64) -> RestrictRow {
    let rank = m.map.rank();
    let kernel_dim = m.map.matrix.cols - rank;
    RestrictRow {
        profile: m.profile.clone(),
        level: m.level,
        d_global: m.d_global,
        sum_d_local: m.d_local.iter().sum(),
        rank,
        kernel_dim,
        surjective: rank == m.map.matrix.rows,
        degree: degree_string(p, kernel_dim),
    }
}

pub fn analyze_restriction(
    fk: &FilteredKernel,
    levels: std::ops::RangeInclusive<usize>,
    rule: BranchRule,
    branch: u64,
) -> Result<RestrictReport> {
    if levels.is_empty() {
        return Err(Error::ConfigInvalid("empty level range".into()));
    }
    let r = Restriction::new(fk, rule, branch)?;
    let p = fk.f().p();
    let rows = levels.map(|l| r.row(l)).collect::<Result<Vec<_>>>()?;
    let kernel_p_power = rows.iter().all(|row| {
        let size = (p as u128).checked_pow(row.kernel_dim as u32);
        size.is_none_or(|s| s.to_string() == row.degree)
    });
    let kernel_increases_at: Vec<usize> = rows
        .windows(2)
        .filter(|w| w[1].kernel_dim > w[0].kernel_dim)
        .map(|w| w[1].level)
        .collect();
    let last = rows.last().unwrap();
    let kernel_stable = rows.len() < 2 || rows[rows.len() - 2].kernel_dim == last.kernel_dim;
    let first_surjective = rows.iter().find(|r| r.surjective).map(|r| r.level);
    let surjective_from_first = match first_surjective {
        Some(l0) => rows.iter().filter(|r| r.level >= l0).all(|r| r.surjective),
        None => false,
    };
    Ok(RestrictReport {
        verdicts: RestrictVerdicts {
            kernel_p_power,
            kernel_stable,
            kernel_increases_at,
            first_surjective,
            surjective_from_first,
            stable_degree: last.degree.clone(),
        },
        rows,
    })
}

/// A cover realizing a ramification profile, with ρ transported to its group Z/n'.
#[derive(Clone, Debug)]
pub struct ProfileCover {
    pub cover: KummerCover,
    pub rho: RhoAction,
    pub n_prime: u64,
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a as i64, b as i64) as u64 * b
}

/// Exponents m in (-n, n] with gcd(n, m) = n/n_i, ordered by |m| then sign (positive first).
fn exponent_candidates(n: u64, n_i: u64) -> Vec<i64> {
    let n = n as i64;
    let mut c: Vec<i64> = (-n + 1..=n)
        .filter(|&m| gcd(n, m) == n / n_i as i64)
        .collect();
    c.sort_by_key(|&m| (m.abs(), m < 0));
    c
}

/// `profile` lists the ramification index at each place in `base.places()` order.
/// The realized cover has degree n' = lcm(profile); it is a quotient of any degree-n
/// cover with that profile, and e_ρ must be an n'-th root of unity.
pub fn cover_for_profile(base: &PuncturedLine, n: u64, profile: &[u64], e_rho: Fel) -> Result<ProfileCover> {
    let f = base.f();
    let places = base.places();
    if profile.len() != places.len() {
        return Err(Error::ConfigInvalid(format!(
            "profile has {} entries for {} places",
            profile.len(),
            places.len()
        )));
    }
    if let Some(&bad) = profile.iter().find(|&&ni| ni == 0 || !n.is_multiple_of(ni)) {
        return Err(Error::ConfigInvalid(format!("{bad} does not divide n = {n}")));
    }
    let n_prime = profile.iter().fold(1, |a, &b| lcm(a, b));
    if f.pow(e_rho, n_prime as i64) != Fel::ONE {
        return Err(Error::NoProfile(format!(
            "{profile:?}: the character does not factor through Z/{n_prime}"
        )));
    }
    let n_fin = places.len() - 1;
    let cands: Vec<Vec<i64>> = profile[..n_fin]
        .iter()
        .map(|&ni| exponent_candidates(n_prime, ni))
        .collect();
    let want_inf = (n_prime / profile[n_fin]) as i64;
    let mut idx = vec![0usize; n_fin];
    let exps = 'search: loop {
        let exps: Vec<i64> = idx.iter().zip(&cands).map(|(&k, c)| c[k]).collect();
        if gcd(n_prime as i64, -exps.iter().sum::<i64>()) == want_inf {
            break 'search Some(exps);
        }
        let mut pos = n_fin;
        loop {
            if pos == 0 {
                break 'search None;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    };
    let exps = exps.ok_or_else(|| {
        Error::NoProfile(format!("{profile:?}: no exponents with the required gcd pattern"))
    })?;
    let cover = KummerCover::new(base.clone(), n_prime, exps, Fel::ONE)?;
    let s = (0..n_prime as i64)
        .find(|&s| f.pow(cover.zeta, s) == e_rho)
        .expect("e_rho is an n'-th root of unity");
    let rho = RhoAction::new(&cover, s)?;
    Ok(ProfileCover {
        cover,
        rho,
        n_prime,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileRow {
    pub profile: Vec<u64>,
    pub status: String,
    pub exponents: Option<Vec<i64>>,
    pub row: Option<RestrictRow>,
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Every profile of divisors of n over all places, with the verdict of r_ℓ for realizable ones.
pub fn essential_surjectivity_scan(
    base: &PuncturedLine,
    n: u64,
    e_rho: Fel,
    l: usize,
    budget: u128,
) -> Result<Vec<ProfileRow>> {
    let places = base.places();
    let divs = divisors(n);
    let count = (divs.len() as u128).checked_pow(places.len() as u32).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::BudgetExceeded {
            requested: count,
            budget,
        });
    }
    let mut rows = Vec::new();
    for k in 0..count {
        let mut rem = k;
        let mut profile = vec![0u64; places.len()];
        for slot in profile.iter_mut().rev() {
            *slot = divs[(rem % divs.len() as u128) as usize];
            rem /= divs.len() as u128;
        }
        match cover_for_profile(base, n, &profile, e_rho) {
            Err(Error::NoProfile(_)) => rows.push(ProfileRow {
                profile,
                status: "unrealizable".into(),
                exponents: None,
                row: None,
            }),
            Err(e) => return Err(e),
            Ok(pc) => {
                let fk = FilteredKernel::build(&pc.cover, pc.rho, places.clone(), l)?;
                let mut row = Restriction::new(&fk, BranchRule::Smallest, 0)?.row(l)?;
                row.profile = profile.clone();
                rows.push(ProfileRow {
                    profile,
                    status: if row.surjective { "surjective" } else { "not surjective" }.into(),
                    exponents: Some(pc.cover.exponents.clone()),
                    row: Some(row),
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldCtx;
    use std::sync::Arc;

    fn cfg_a(s: i64) -> FilteredKernel {
        let f = Arc::new(FieldCtx::new(2, 2, 2).unwrap());
        let base = PuncturedLine::new(f, vec![Fel::ZERO]).unwrap();
        let cover = KummerCover::new(base, 3, vec![1], Fel::ONE).unwrap();
        let rho = RhoAction::new(&cover, s).unwrap();
        FilteredKernel::build(&cover, rho, vec![Place::Finite(0), Place::Infinity], 2).unwrap()
    }

    #[test]
    fn expansions_over_zero() {
        let fk = cfg_a(1);
        let v = fk.cover();
        let x = v.base.x();
        let xinv = v.base.linear_pow(0, -1);
        let xy = CoverElem::from_component(3, 1, x);
        let xiy = CoverElem::from_component(3, 1, xinv);
        let e = expand_at(v, &xy, Place::Finite(0), 0, 0, &BranchRule::Smallest).unwrap();
        assert!(e.pp.is_empty());
        let e = expand_at(v, &xiy, Place::Finite(0), 0, 2, &BranchRule::Smallest).unwrap();
        assert_eq!(e.pp, [(2, Fel::ONE)].into_iter().collect());
        assert_eq!(
            expand_at(v, &xiy, Place::Finite(0), 0, 1, &BranchRule::Smallest),
            Err(Error::InsufficientPrecision)
        );
        assert!(expand_at(v, &v.one(), Place::Infinity, 0, 0, &BranchRule::Smallest)
            .unwrap()
            .pp
            .is_empty());
    }

    #[test]
    fn cfg_a_block_bijection() {
        let fk = cfg_a(1);
        let r = Restriction::new(&fk, BranchRule::Smallest, 0).unwrap();
        let row = r.row(1).unwrap();
        assert_eq!((row.d_global, row.sum_d_local, row.kernel_dim), (2, 2, 0));
        assert!(row.surjective);
        let one = Fel::ONE;
        let xy = r.restrict_class(&ASClass { level: 1, coords: vec![one, Fel::ZERO] }).unwrap();
        assert!(xy[0].is_empty());
        assert_eq!(xy[1].len(), 1);
        let xiy = r.restrict_class(&ASClass { level: 1, coords: vec![Fel::ZERO, one] }).unwrap();
        assert_eq!(xiy[0], [(2, one)].into_iter().collect());
        assert!(xiy[1].is_empty());
    }

    #[test]
    fn profile_exponents() {
        let f = Arc::new(FieldCtx::new(2, 2, 2).unwrap());
        let base = PuncturedLine::new(f.clone(), vec![Fel::ZERO]).unwrap();
        let zeta = f.root_of_unity(3).unwrap();
        let pc = cover_for_profile(&base, 3, &[3, 3], zeta).unwrap();
        assert_eq!(pc.cover.exponents, vec![1]);
        assert!(matches!(cover_for_profile(&base, 3, &[3, 1], zeta), Err(Error::NoProfile(_))));
        assert!(matches!(cover_for_profile(&base, 3, &[1, 1], zeta), Err(Error::NoProfile(_))));
        let pc = cover_for_profile(&base, 3, &[1, 1], Fel::ONE).unwrap();
        assert_eq!((pc.n_prime, pc.cover.exponents.clone()), (1, vec![0]));
    }
}
