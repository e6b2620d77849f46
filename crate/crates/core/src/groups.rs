//! Finite groups by Cayley table: semidirect products, lifts of the distinguished
//! generator, the three conjugation clauses, Gp classification and complements.

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fel};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Largest order for which the group axioms are checked on every triple.
pub const AXIOM_CHECK_ORDER: usize = 256;

pub type Perm = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    labels: Vec<String>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Row-major table: `table[a * order + b] = a·b`.
    pub fn from_table(table: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || table.len() != n * n {
            return Err(Error::InvalidGroup(format!(
                "table of length {} for {n} labels",
                table.len()
            )));
        }
        if table.iter().any(|&x| x >= n) {
            return Err(Error::InvalidGroup("table entry out of range".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e * n + a] == a && table[a * n + e] == a))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| table[a * n + b] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("{} has no inverse", labels[a])))?;
            if table[b * n + a] != identity {
                return Err(Error::InvalidGroup(format!("{} has no two-sided inverse", labels[a])));
            }
            inverse[a] = b;
        }
        if n <= AXIOM_CHECK_ORDER {
            for a in 0..n {
                let row_a = &table[a * n..(a + 1) * n];
                for b in 0..n {
                    let row_ab = &table[row_a[b] * n..(row_a[b] + 1) * n];
                    let row_b = &table[b * n..(b + 1) * n];
                    for c in 0..n {
                        if row_ab[c] != row_a[row_b[c]] {
                            return Err(Error::InvalidGroup(format!(
                                "not associative at ({}, {}, {})",
                                labels[a], labels[b], labels[c]
                            )));
                        }
                    }
                }
            }
        }
        Ok(FiniteGroup {
            order: n,
            table,
            labels,
            identity,
            inverse,
        })
    }

    pub fn from_fn(labels: Vec<String>, mul: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let n = labels.len();
        let table = (0..n * n).map(|k| mul(k / n, k % n)).collect();
        Self::from_table(table, labels)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::from_fn((0..n).map(|k| k.to_string()).collect(), |a, b| (a + b) % n)
    }

    /// (Z/p)^m, element index = base-p digits, low digit first.
    pub fn elem_abelian(p: usize, m: u32) -> Result<Self> {
        let n = p.pow(m);
        let digits = move |mut a: usize| {
            (0..m)
                .map(|_| {
                    let d = a % p;
                    a /= p;
                    d
                })
                .collect::<Vec<_>>()
        };
        let labels = (0..n)
            .map(|a| {
                digits(a)
                    .iter()
                    .rev()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("")
            })
            .collect();
        Self::from_fn(labels, |a, b| {
            let (da, db) = (digits(a), digits(b));
            da.iter()
                .zip(&db)
                .rev()
                .fold(0, |acc, (x, y)| acc * p + (x + y) % p)
        })
    }

    /// Additive group of a finite field, indexed like its elements.
    pub fn additive(f: &FieldCtx) -> Result<Self> {
        let labels = f.elements().map(|a| f.format(a)).collect();
        Self::from_fn(labels, |a, b| f.add(Fel(a as u32), Fel(b as u32)).0 as usize)
    }

    /// Labels 1, -1, i, -i, j, -j, k, -k.
    pub fn quaternion8() -> Result<Self> {
        // unit products for 1, i, j, k: (sign, unit)
        const UNIT: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Self::from_fn(labels, |a, b| {
            let (sign, unit) = UNIT[a / 2][b / 2];
            2 * unit + ((a % 2) ^ (b % 2) ^ sign)
        })
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Result<Self> {
        let trivial = vec![(0..a.order).collect::<Perm>(); b.order];
        Ok(SemidirectProduct::new(a.clone(), b.clone(), trivial)?.group)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn power(&self, g: usize, k: i64) -> usize {
        let mut base = if k < 0 { self.inv(g) } else { g };
        let mut e = k.unsigned_abs();
        let mut acc = self.identity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn order_of(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// g·x·g⁻¹.
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Greedy generating set in index order.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = BTreeSet::from([self.identity]);
        for a in 0..self.order {
            if !span.contains(&a) {
                gens.push(a);
                span = self.generated(&gens).into_iter().collect();
            }
        }
        gens
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_automorphism(&self, phi: &[usize]) -> bool {
        let n = self.order;
        phi.len() == n
            && phi.iter().collect::<BTreeSet<_>>().len() == n
            && (0..n).all(|a| (0..n).all(|b| phi[self.mul(a, b)] == self.table[phi[a] * n + phi[b]]))
    }

    /// Aut(G) as permutations, by assigning images to `generators()` and extending.
    pub fn automorphisms(&self) -> Vec<Perm> {
        let gens = self.generators();
        let cands: Vec<Vec<usize>> = gens
            .iter()
            .map(|&g| {
                let o = self.order_of(g);
                (0..self.order).filter(|&x| self.order_of(x) == o).collect()
            })
            .collect();
        let mut out = Vec::new();
        for imgs in index_tuples(&cands) {
            if let Some(phi) = extend_hom(self, &gens, &imgs, self.identity, |a, b| self.mul(*a, *b)) {
                if phi.iter().collect::<BTreeSet<_>>().len() == self.order {
                    out.push(phi);
                }
            }
        }
        out.sort();
        out
    }
}

/// All tuples choosing one entry of each list, first list slowest.
fn index_tuples<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                l.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// The homomorphism from `src` sending `gens[i]` to `imgs[i]`, if one exists.
fn extend_hom<T: Clone + PartialEq>(
    src: &FiniteGroup,
    gens: &[usize],
    imgs: &[T],
    target_id: T,
    target_mul: impl Fn(&T, &T) -> T,
) -> Option<Vec<T>> {
    let mut map: Vec<Option<T>> = vec![None; src.order];
    map[src.identity] = Some(target_id);
    let mut queue = VecDeque::from([src.identity]);
    while let Some(x) = queue.pop_front() {
        let mx = map[x].clone().unwrap();
        for (&s, img) in gens.iter().zip(imgs) {
            let y = src.mul(x, s);
            let my = target_mul(&mx, img);
            match &map[y] {
                None => {
                    map[y] = Some(my);
                    queue.push_back(y);
                }
                Some(old) if *old != my => return None,
                Some(_) => {}
            }
        }
    }
    map.into_iter().collect()
}

/// (A∘B)(x) = A(B(x)).
pub fn compose(a: &[usize], b: &[usize]) -> Perm {
    b.iter().map(|&x| a[x]).collect()
}

/// P ⋊ P′ with (p₁,p₁′)(p₂,p₂′) = (p₁·ρ(p₁′)(p₂), p₁′p₂′); index of (p, p′) is p + |P|·p′.
#[derive(Clone, Debug)]
pub struct SemidirectProduct {
    pub normal: FiniteGroup,
    pub acting: FiniteGroup,
    pub action: Vec<Perm>,
    pub group: FiniteGroup,
}

impl SemidirectProduct {
    pub fn new(normal: FiniteGroup, acting: FiniteGroup, action: Vec<Perm>) -> Result<Self> {
        if action.len() != acting.order() {
            return Err(Error::InvalidGroup(format!(
                "{} action maps for a group of order {}",
                action.len(),
                acting.order()
            )));
        }
        for (a, phi) in action.iter().enumerate() {
            if !normal.is_automorphism(phi) {
                return Err(Error::InvalidGroup(format!(
                    "action of {} is not an automorphism",
                    acting.label(a)
                )));
            }
        }
        for a in 0..acting.order() {
            for b in 0..acting.order() {
                if action[acting.mul(a, b)] != compose(&action[a], &action[b]) {
                    return Err(Error::InvalidGroup("action is not a homomorphism".into()));
                }
            }
        }
        let np = normal.order();
        let labels = (0..np * acting.order())
            .map(|k| format!("({},{})", normal.label(k % np), acting.label(k / np)))
            .collect();
        let group = FiniteGroup::from_fn(labels, |x, y| {
            let (p1, q1) = (x % np, x / np);
            let (p2, q2) = (y % np, y / np);
            normal.mul(p1, action[q1][p2]) + np * acting.mul(q1, q2)
        })?;
        Ok(SemidirectProduct {
            normal,
            acting,
            action,
            group,
        })
    }

    pub fn pair(&self, p: usize, q: usize) -> usize {
        p + self.normal.order() * q
    }

    pub fn split(&self, x: usize) -> (usize, usize) {
        (x % self.normal.order(), x / self.normal.order())
    }

    pub fn project(&self, x: usize) -> usize {
        self.split(x).1
    }
}

/// H = F_q ⋊ Z/n where k̄ acts by multiplication by e^{-k}.
pub fn multiplier_product(f: &FieldCtx, e: Fel, n: u64) -> Result<SemidirectProduct> {
    if f.pow(e, n as i64) != Fel::ONE {
        return Err(Error::ConfigInvalid(format!(
            "multiplier {} is not an {n}-th root of unity",
            f.format(e)
        )));
    }
    let h = FiniteGroup::additive(f)?;
    let zn = FiniteGroup::cyclic(n as usize)?;
    let action = (0..n as i64)
        .map(|k| {
            let c = f.pow(e, -k);
            f.elements().map(|a| f.mul(c, a).0 as usize).collect()
        })
        .collect();
    SemidirectProduct::new(h, zn, action)
}

fn check_lift_input(f: &FieldCtx, n: u64) -> Result<()> {
    if n.is_multiple_of(f.p()) {
        return Err(Error::NotCoprime { n, p: f.p() });
    }
    Ok(())
}

/// {h : (h, 1̄)ⁿ = (v, 0̄)} by scanning the table.
pub fn solve_lift(f: &FieldCtx, e: Fel, n: u64, v: Fel) -> Result<Vec<Fel>> {
    check_lift_input(f, n)?;
    let sp = multiplier_product(f, e, n)?;
    Ok(solve_lift_in(&sp, f, n, v))
}

/// `solve_lift` in an already built F_q ⋊ Z/n.
pub fn solve_lift_in(sp: &SemidirectProduct, f: &FieldCtx, n: u64, v: Fel) -> Vec<Fel> {
    let target = sp.pair(v.0 as usize, 0);
    f.elements()
        .filter(|h| sp.group.power(sp.pair(h.0 as usize, 1), n as i64) == target)
        .collect()
}

/// e = 1: the single lift n⁻¹·v (n⁻¹ mod p); e ≠ 1: all of H when v = 0, none otherwise.
pub fn lift_closed_form(f: &FieldCtx, e: Fel, n: u64, v: Fel) -> Result<Vec<Fel>> {
    check_lift_input(f, n)?;
    if e == Fel::ONE {
        let n_inv = crate::gf::mod_inverse(n % f.p(), f.p()).expect("n is prime to p");
        return Ok(vec![f.mul(f.from_int(n_inv as i64), v)]);
    }
    if v.is_zero() {
        Ok(f.elements().collect())
    } else {
        Ok(Vec::new())
    }
}

/// (Σ_{i<n} e^{-i})·h, the first coordinate of (h, 1̄)ⁿ.
pub fn geometric_power(f: &FieldCtx, e: Fel, n: u64, h: Fel) -> Fel {
    let s = f.sum((0..n as i64).map(|i| f.pow(e, -i)));
    f.mul(s, h)
}

/// For every p′_i: γ_i lies over p′_i, has the order of p′_i, and conjugates (p, 1) to
/// (ρ′(p′_i)(p), 1).
pub fn check_lift_conditions(w: &SemidirectProduct, gammas: &[usize], rho_prime: &[Perm]) -> Result<bool> {
    let acting = &w.acting;
    if gammas.len() != acting.order() || rho_prime.len() != acting.order() {
        return Err(Error::IndexMismatch(format!(
            "{} elements and {} actions for a group of order {}",
            gammas.len(),
            rho_prime.len(),
            acting.order()
        )));
    }
    if gammas.iter().any(|&g| g >= w.group.order()) {
        return Err(Error::IndexMismatch("element outside the group".into()));
    }
    Ok(gammas
        .iter()
        .enumerate()
        .all(|(i, &g)| lift_clauses(w, g, i, &rho_prime[i])))
}

fn lift_clauses(w: &SemidirectProduct, g: usize, i: usize, rho_i: &[usize]) -> bool {
    w.project(g) == i
        && w.group.order_of(g) == w.acting.order_of(i)
        && (0..w.normal.order()).all(|p| w.group.conj(g, w.pair(p, w.acting.identity())) == w.pair(rho_i[p], w.acting.identity()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GpAction {
    /// One permutation of P per element of P′.
    pub action: Vec<Perm>,
    /// A witness p_i for each p′_i.
    pub witnesses: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GpReport {
    pub order_p: usize,
    pub order_p_prime: usize,
    pub aut_order: usize,
    pub homs: usize,
    pub passing: Vec<GpAction>,
    /// Extension-isomorphism classes as indices into `passing`.
    pub classes: Vec<Vec<usize>>,
    pub rho_prime_class: Option<usize>,
}

pub const GP_MAX_P: usize = 64;
pub const GP_MAX_P_PRIME: usize = 12;

/// Actions ρ″: P′ → Aut(P) for which every p′_i has some (p_i, p′_i) satisfying the
/// order and conjugation clauses relative to ρ′, grouped by isomorphism of extensions.
pub fn enumerate_gp_rho(p: &FiniteGroup, p_prime: &FiniteGroup, rho_prime: &[Perm], budget: u128) -> Result<GpReport> {
    if p.order() > GP_MAX_P || p_prime.order() > GP_MAX_P_PRIME {
        return Err(Error::BudgetExceeded {
            requested: (p.order() * p_prime.order()) as u128,
            budget: (GP_MAX_P * GP_MAX_P_PRIME) as u128,
        });
    }
    SemidirectProduct::new(p.clone(), p_prime.clone(), rho_prime.to_vec())?;
    let auts = p.automorphisms();
    let gens = p_prime.generators();
    let id: Perm = (0..p.order()).collect();
    let image_choices: Vec<Vec<Perm>> = gens.iter().map(|_| auts.clone()).collect();
    let mut homs: Vec<Vec<Perm>> = index_tuples(&image_choices)
        .into_iter()
        .filter_map(|imgs| extend_hom(p_prime, &gens, &imgs, id.clone(), |a, b| compose(a, b)))
        .collect();
    homs.sort();
    homs.dedup();

    let mut passing = Vec::new();
    let mut products = Vec::new();
    for action in &homs {
        let w = SemidirectProduct::new(p.clone(), p_prime.clone(), action.clone())?;
        let witnesses: Option<Vec<usize>> = (0..p_prime.order())
            .map(|i| (0..p.order()).find(|&x| lift_clauses(&w, w.pair(x, i), i, &rho_prime[i])))
            .collect();
        if let Some(witnesses) = witnesses {
            passing.push(GpAction {
                action: action.clone(),
                witnesses,
            });
            products.push(w);
        }
    }

    let n_fun = (p.order() as u128)
        .checked_pow(p_prime.order() as u32 - 1)
        .unwrap_or(u128::MAX);
    let pairs = (passing.len() * passing.len().saturating_sub(1) / 2) as u128;
    if n_fun.saturating_mul(pairs) > budget {
        return Err(Error::BudgetExceeded {
            requested: n_fun.saturating_mul(pairs),
            budget,
        });
    }
    let mut parent: Vec<usize> = (0..passing.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for a in 0..passing.len() {
        for b in a + 1..passing.len() {
            if find(&mut parent, a) != find(&mut parent, b) && extensions_isomorphic(&products[a], &products[b]) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[rb.max(ra)] = ra.min(rb);
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in 0..passing.len() {
        let r = find(&mut parent, a);
        classes.entry(r).or_default().push(a);
    }
    let classes: Vec<Vec<usize>> = classes.into_values().collect();
    let rho_prime_class = passing
        .iter()
        .position(|g| g.action == rho_prime)
        .and_then(|k| classes.iter().position(|c| c.contains(&k)));
    Ok(GpReport {
        order_p: p.order(),
        order_p_prime: p_prime.order(),
        aut_order: auts.len(),
        homs: homs.len(),
        passing,
        classes,
        rho_prime_class,
    })
}

/// An isomorphism (p, p′) ↦ (p·c(p′), p′) between the two products, with c(1) = 1.
fn extensions_isomorphic(a: &SemidirectProduct, b: &SemidirectProduct) -> bool {
    let np = a.normal.order();
    let others: Vec<usize> = (0..a.acting.order())
        .filter(|&i| i != a.acting.identity())
        .collect();
    let choices: Vec<Vec<usize>> = others.iter().map(|_| (0..np).collect()).collect();
    index_tuples(&choices).into_iter().any(|vals| {
        let mut c = vec![a.normal.identity(); a.acting.order()];
        for (&i, &v) in others.iter().zip(&vals) {
            c[i] = v;
        }
        let phi = |x: usize| {
            let (p, q) = a.split(x);
            b.pair(a.normal.mul(p, c[q]), q)
        };
        let n = a.group.order();
        (0..n).all(|x| (0..n).all(|y| phi(a.group.mul(x, y)) == b.group.mul(phi(x), phi(y))))
    })
}

/// A subgroup meeting the normal subgroup `n` trivially and of order |G/N|.
pub fn find_complement(g: &FiniteGroup, n: &[usize], budget: u128) -> Result<Vec<usize>> {
    let nset: BTreeSet<usize> = n.iter().copied().collect();
    if g.generated(n).len() != nset.len() || !nset.contains(&g.identity()) {
        return Err(Error::InvalidGroup("N is not a subgroup".into()));
    }
    if (0..g.order()).any(|x| nset.iter().any(|&m| !nset.contains(&g.conj(x, m)))) {
        return Err(Error::InvalidGroup("N is not normal".into()));
    }
    let want = g.order() / nset.len();
    if crate::gf::gcd(nset.len() as i64, want as i64) != 1 {
        return Err(Error::InvalidGroup("|N| and |G/N| are not coprime".into()));
    }
    let mut spent: u128 = 0;
    for k in 1..=3u32 {
        let cost = (g.order() as u128).pow(k);
        spent += cost;
        if spent > budget {
            return Err(Error::BudgetExceeded {
                requested: spent,
                budget,
            });
        }
        let all: Vec<usize> = (0..g.order()).collect();
        let lists: Vec<Vec<usize>> = (0..k).map(|_| all.clone()).collect();
        for gens in index_tuples(&lists) {
            let h = g.generated(&gens);
            if h.len() == want && h.iter().all(|x| *x == g.identity() || !nset.contains(x)) {
                return Ok(h);
            }
        }
    }
    Err(Error::InvalidGroup("no complement generated by at most three elements".into()))
}

/// "cyclic:n", "elem_abelian:p^m", "quaternion:8", or an explicit table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Named(String),
    Table { order: usize, table: Vec<usize>, labels: Option<Vec<String>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        match self {
            GroupSpec::Table { order, table, labels } => {
                let labels = labels
                    .clone()
                    .unwrap_or_else(|| (0..*order).map(|k| k.to_string()).collect());
                if labels.len() != *order {
                    return Err(Error::InvalidGroup("label count differs from order".into()));
                }
                FiniteGroup::from_table(table.clone(), labels)
            }
            GroupSpec::Named(s) => {
                let bad = || Error::InvalidGroup(format!("unknown group '{s}'"));
                let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
                match kind {
                    "cyclic" => FiniteGroup::cyclic(arg.parse().map_err(|_| bad())?),
                    "elem_abelian" => {
                        let (p, m) = arg.split_once('^').ok_or_else(bad)?;
                        FiniteGroup::elem_abelian(p.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?)
                    }
                    "quaternion" if arg == "8" => FiniteGroup::quaternion8(),
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// "trivial", "field_mult" (P = (Z/p)^m read as F_{p^m}, generator k̄ acting by ζ_n^k),
/// "q8_cycle" (1̄ sends i ↦ j ↦ k ↦ i), or one permutation per element of P′.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionSpec {
    Named(String),
    Perms(Vec<Perm>),
}

impl ActionSpec {
    pub fn build(&self, p: &FiniteGroup, p_prime: &FiniteGroup) -> Result<Vec<Perm>> {
        let id: Perm = (0..p.order()).collect();
        let n = p_prime.order();
        match self {
            ActionSpec::Perms(v) => Ok(v.clone()),
            ActionSpec::Named(s) => match s.as_str() {
                "trivial" => Ok(vec![id; n]),
                "field_mult" => {
                    let (pp, m) = prime_power(p.order())
                        .ok_or_else(|| Error::InvalidGroup("P is not of prime-power order".into()))?;
                    let f = FieldCtx::new(pp, m, m)?;
                    let zeta = f.root_of_unity(n as u64)?;
                    Ok((0..n as i64)
                        .map(|k| {
                            let c = f.pow(zeta, k);
                            f.elements().map(|a| f.mul(c, a).0 as usize).collect()
                        })
                        .collect())
                }
                "q8_cycle" => {
                    if p.order() != 8 || !n.is_multiple_of(3) {
                        return Err(Error::InvalidGroup("q8_cycle needs Q8 and 3 | |P′|".into()));
                    }
                    // index 2u + sign; units 1, i, j, k
                    let step = |x: usize| {
                        let (u, s) = (x / 2, x % 2);
                        let u2 = if u == 0 { 0 } else { u % 3 + 1 };
                        2 * u2 + s
                    };
                    Ok((0..n)
                        .map(|k| (0..8).map(|x| (0..k % 3).fold(x, |y, _| step(y))).collect())
                        .collect())
                }
                _ => Err(Error::InvalidGroup(format!("unknown action '{s}'"))),
            },
        }
    }
}

fn prime_power(n: usize) -> Option<(u64, u32)> {
    let ps = crate::gf::prime_factors(n as u64);
    if ps.len() != 1 {
        return None;
    }
    let p = ps[0];
    let mut m = 0;
    let mut k = n as u64;
    while k > 1 {
        k /= p;
        m += 1;
    }
    Some((p, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q8_axioms_and_orders() {
        let q = FiniteGroup::quaternion8().unwrap();
        assert_eq!(q.order_of(1), 2);
        assert_eq!(q.order_of(2), 4);
        assert_eq!(q.mul(2, 4), 6);
        assert_eq!(q.mul(4, 2), 7);
        assert!(!q.is_abelian());
        assert_eq!(q.automorphisms().len(), 24);
    }

    #[test]
    fn klein_automorphisms() {
        let v = FiniteGroup::elem_abelian(2, 2).unwrap();
        assert_eq!(v.automorphisms().len(), 6);
        assert_eq!(FiniteGroup::cyclic(5).unwrap().automorphisms().len(), 4);
    }

    #[test]
    fn geometric_sum_pins_convention() {
        let f = FieldCtx::new(2, 2, 2).unwrap();
        let w = f.root_of_unity(3).unwrap();
        for e in [Fel::ONE, w, f.mul(w, w)] {
            let sp = multiplier_product(&f, e, 3).unwrap();
            for h in f.elements() {
                let pw = sp.group.power(sp.pair(h.0 as usize, 1), 3);
                assert_eq!(pw, sp.pair(geometric_power(&f, e, 3, h).0 as usize, 0));
            }
        }
    }

    #[test]
    fn lifts_small() {
        let f2 = FieldCtx::new(2, 1, 1).unwrap();
        assert_eq!(solve_lift(&f2, Fel::ONE, 3, Fel::ONE).unwrap(), vec![Fel::ONE]);
        let f4 = FieldCtx::new(2, 2, 2).unwrap();
        let w = f4.root_of_unity(3).unwrap();
        assert_eq!(solve_lift(&f4, w, 3, Fel::ZERO).unwrap().len(), 4);
        assert!(solve_lift(&f4, w, 3, Fel::ONE).unwrap().is_empty());
        assert_eq!(solve_lift(&f4, w, 4, Fel::ONE), Err(Error::NotCoprime { n: 4, p: 2 }));
    }

    #[test]
    fn lift_conditions() {
        let v = FiniteGroup::elem_abelian(2, 2).unwrap();
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let triv = ActionSpec::Named("trivial".into()).build(&v, &z3).unwrap();
        let w = SemidirectProduct::new(v.clone(), z3.clone(), triv.clone()).unwrap();
        let gam: Vec<usize> = (0..3).map(|i| w.pair(0, i)).collect();
        assert!(check_lift_conditions(&w, &gam, &triv).unwrap());
        let bad: Vec<usize> = (0..3).map(|i| w.pair(1, i)).collect();
        assert!(!check_lift_conditions(&w, &bad, &triv).unwrap());
        assert!(matches!(check_lift_conditions(&w, &gam[..2], &triv), Err(Error::IndexMismatch(_))));
    }

    #[test]
    fn gp_abelian_singleton() {
        let v = FiniteGroup::elem_abelian(2, 2).unwrap();
        let z3 = FiniteGroup::cyclic(3).unwrap();
        for name in ["trivial", "field_mult"] {
            let rho = ActionSpec::Named(name.into()).build(&v, &z3).unwrap();
            let rep = enumerate_gp_rho(&v, &z3, &rho, 1 << 20).unwrap();
            assert_eq!(rep.classes.len(), 1, "{name}");
            assert_eq!(rep.rho_prime_class, Some(0));
        }
    }

    #[test]
    fn complements() {
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let inv: Vec<Perm> = vec![vec![0, 1, 2], vec![0, 2, 1]];
        let s3 = SemidirectProduct::new(z3, z2, inv).unwrap();
        let c = find_complement(&s3.group, &[0, 1, 2], 1 << 20).unwrap();
        assert_eq!(c.len(), 2);
        let v = FiniteGroup::elem_abelian(2, 2).unwrap();
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let rho = ActionSpec::Named("field_mult".into()).build(&v, &z3).unwrap();
        let a4 = SemidirectProduct::new(v, z3, rho).unwrap();
        let c = find_complement(&a4.group, &[0, 1, 2, 3], 1 << 20).unwrap();
        assert_eq!(c.len(), 3);
    }
}
