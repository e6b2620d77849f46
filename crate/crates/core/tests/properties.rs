use asmoduli::config::{acceptance_matrix, Setup};
use asmoduli::gf::{FieldCtx, Fel};
use asmoduli::groups::{geometric_power, multiplier_product};
use asmoduli::kummer::{BranchRule, CoverElem};
use asmoduli::localmod::{LocalCover, LocalElem};
use asmoduli::moduli::FilteredKernel;
use asmoduli::restrict::Restriction;
use proptest::prelude::*;
use std::sync::{Arc, OnceLock};

const FIELDS: [(u64, u32, u32); 6] = [(2, 1, 4), (2, 2, 2), (3, 1, 2), (3, 2, 2), (5, 1, 2), (7, 1, 1)];

fn field(i: usize) -> &'static FieldCtx {
    static CACHE: OnceLock<Vec<FieldCtx>> = OnceLock::new();
    &CACHE.get_or_init(|| {
        FIELDS
            .iter()
            .map(|&(p, m, big_m)| FieldCtx::new(p, m, big_m).unwrap())
            .collect()
    })[i]
}

fn el(f: &FieldCtx, raw: u32) -> Fel {
    Fel(raw % f.order() as u32)
}

struct Fixture {
    setup: Setup,
    fk: FilteredKernel,
}

const TOP: usize = 2;

fn fixtures() -> &'static [Fixture] {
    static CACHE: OnceLock<Vec<Fixture>> = OnceLock::new();
    CACHE.get_or_init(|| {
        acceptance_matrix()
            .into_iter()
            .take(3)
            .map(|c| {
                let setup = c.setup().unwrap();
                let fk = FilteredKernel::build(&setup.cover, setup.rho, setup.support.clone(), TOP).unwrap();
                Fixture { setup, fk }
            })
            .collect()
    })
}

fn combination(fx: &Fixture, l: usize, raw: &[u32]) -> CoverElem {
    let cover = &fx.setup.cover;
    let f = cover.f();
    fx.fk
        .kernel_level(l)
        .unwrap()
        .iter()
        .zip(raw.iter().cycle())
        .fold(CoverElem::zero(cover.n), |acc, (b, &r)| cover.add(&acc, &cover.scale(b, el(f, r))))
}

fn local_add(f: &FieldCtx, a: &LocalElem, b: &LocalElem) -> LocalElem {
    let mut out = a.clone();
    for (&j, &c) in b {
        let s = f.add(out.get(&j).copied().unwrap_or(Fel::ZERO), c);
        if s.is_zero() {
            out.remove(&j);
        } else {
            out.insert(j, s);
        }
    }
    out
}

fn local_cover(i: usize) -> LocalCover {
    let cases: [(u64, u32, u32, u64, i64); 3] = [(2, 2, 2, 3, 1), (2, 2, 2, 3, 0), (3, 1, 2, 4, 2)];
    let (p, m, big_m, n, s) = cases[i];
    let ctx = Arc::new(FieldCtx::new(p, m, big_m).unwrap());
    let zeta = ctx.root_of_unity(n).unwrap();
    let e = ctx.pow(zeta, s);
    LocalCover::standard(ctx, n, n, e).unwrap()
}

fn random_local(lc: &LocalCover, l: usize, raw: &[u32]) -> LocalElem {
    let f = lc.f();
    let top = lc.q().pow(l as u32);
    (1..=top)
        .filter(|&j| lc.is_eigen(j))
        .zip(raw.iter().cycle())
        .map(|(j, &r)| (j, el(f, r)))
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(i in 0..FIELDS.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = field(i);
        let (a, b, c) = (el(f, a), el(f, b), el(f, c));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), Fel::ZERO);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a)), Fel::ONE);
        }
        prop_assert_eq!(f.frobenius(f.add(a, b), 1), f.add(f.frobenius(a, 1), f.frobenius(b, 1)));
        prop_assert_eq!(f.frob_q_inv(f.frob_q(a)), a);
        prop_assert_eq!(f.parse(&f.format(a)).unwrap(), a);
    }

    #[test]
    fn local_reduce_is_idempotent_and_wp_invariant(
        i in 0..3usize,
        l in 1..=3usize,
        raw_v in prop::collection::vec(any::<u32>(), 1..40),
        raw_w in prop::collection::vec(any::<u32>(), 1..40),
    ) {
        let lc = local_cover(i);
        let v = random_local(&lc, l, &raw_v);
        let r = lc.local_reduce(&v, l).unwrap();
        prop_assert_eq!(lc.local_reduce(&r, l).unwrap(), r.clone());
        let w = random_local(&lc, l - 1, &raw_w);
        let shifted = local_add(lc.f(), &v, &lc.wp(&w));
        prop_assert_eq!(lc.local_reduce(&shifted, l).unwrap(), r);
    }

    #[test]
    fn reduction_routes_agree(
        i in 0..3usize,
        l in 0..=TOP,
        raw in prop::collection::vec(any::<u32>(), 1..24),
    ) {
        let fx = &fixtures()[i];
        let b = combination(fx, l, &raw);
        let by_echelon = fx.fk.wp_reduce(&b, l).unwrap();
        prop_assert_eq!(&by_echelon, &fx.fk.push_up(&b, l).unwrap());
        let rep = fx.fk.representative(&by_echelon);
        prop_assert_eq!(fx.fk.wp_reduce(&rep, l).unwrap(), by_echelon);
    }

    #[test]
    fn class_is_wp_invariant(
        i in 0..3usize,
        raw_b in prop::collection::vec(any::<u32>(), 1..24),
        raw_c in prop::collection::vec(any::<u32>(), 1..24),
    ) {
        let fx = &fixtures()[i];
        let cover = &fx.setup.cover;
        let b = combination(fx, TOP, &raw_b);
        let c = combination(fx, TOP - 1, &raw_c);
        let shifted = cover.add(&b, &cover.wp(&c));
        prop_assert_eq!(fx.fk.wp_reduce(&shifted, TOP).unwrap(), fx.fk.wp_reduce(&b, TOP).unwrap());
    }

    #[test]
    fn restriction_is_additive(
        i in 0..3usize,
        l in 1..=TOP,
        raw_a in prop::collection::vec(any::<u32>(), 1..24),
        raw_b in prop::collection::vec(any::<u32>(), 1..24),
    ) {
        let fx = &fixtures()[i];
        let cover = &fx.setup.cover;
        let res = Restriction::new(&fx.fk, BranchRule::Smallest, 0).unwrap();
        let a = combination(fx, l, &raw_a);
        let b = combination(fx, l, &raw_b);
        let ra = res.restrict_elem(&a, l).unwrap();
        let rb = res.restrict_elem(&b, l).unwrap();
        let rab = res.restrict_elem(&cover.add(&a, &b), l).unwrap();
        let f = cover.f();
        for k in 0..rab.len() {
            prop_assert_eq!(&rab[k], &local_add(f, &ra[k], &rb[k]));
        }
    }

    #[test]
    fn expansion_is_linear(
        i in 0..3usize,
        raw_a in prop::collection::vec(any::<u32>(), 1..24),
        raw_b in prop::collection::vec(any::<u32>(), 1..24),
        c in any::<u32>(),
        branch in 0..4u64,
    ) {
        let fx = &fixtures()[i];
        let cover = &fx.setup.cover;
        let f = cover.f();
        let c = el(f, c);
        let a = combination(fx, TOP, &raw_a);
        let b = combination(fx, TOP, &raw_b);
        let sum = cover.add(&cover.scale(&a, c), &b);
        let prec = 6;
        for &place in &fx.setup.support {
            let rule = fx.setup.rule;
            let ea = cover.expand(&a, place, branch, prec, &rule).unwrap();
            let eb = cover.expand(&b, place, branch, prec, &rule).unwrap();
            let es = cover.expand(&sum, place, branch, prec, &rule).unwrap();
            for e in -200..prec {
                prop_assert_eq!(es.coeff(e), f.add(f.mul(c, ea.coeff(e)), eb.coeff(e)));
            }
        }
    }

    #[test]
    fn semidirect_power_is_geometric_sum(i in 0..FIELDS.len(), h in any::<u32>(), k in any::<u32>()) {
        let f = field(i);
        let h = el(f, h);
        let q1 = f.order() - 1;
        let divisors: Vec<u64> = (1..=q1).filter(|d| q1.is_multiple_of(*d) && d % f.p() != 0).collect();
        let n = divisors[k as usize % divisors.len()];
        let zeta = f.root_of_unity(n).unwrap();
        let e = f.pow(zeta, (k / 7) as i64);
        let sp = multiplier_product(f, e, n).unwrap();
        let lhs = sp.group.power(sp.pair(h.0 as usize, (1 % n) as usize), n as i64);
        prop_assert_eq!(lhs, sp.pair(geometric_power(f, e, n, h).0 as usize, 0));
    }
}
