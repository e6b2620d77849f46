//! Kummer covers yⁿ = c·Π(x - a_i)^{m_i} of a punctured line, their Galois action
//! y ↦ ζ_n y, valuations above the punctures and Riemann–Roch spaces.

use crate::error::{Error, Result};
use crate::gf::{gcd, prime_factors, FieldCtx, Fel};
use crate::pfrac::{Place, PuncturedLine, RingElem, RingElemJson, Term};
use crate::series::Series;
use serde::{Deserialize, Serialize};

/// Ramification data at one puncture: v(f) = m, g = gcd(n, m) points above,
/// each with index e = n/g, and v(y) = mu = m/g at every one of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceData {
    pub m: i64,
    pub g: u64,
    pub e: u64,
    pub mu: i64,
}

#[derive(Clone, Debug)]
pub struct KummerCover {
    pub base: PuncturedLine,
    pub n: u64,
    pub exponents: Vec<i64>,
    pub zeta: Fel,
    pub unit_const: Fel,
    f_elem: RingElem,
    f_pows: Vec<RingElem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoverElem {
    pub comps: Vec<RingElem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverElemJson {
    pub comps: Vec<RingElemJson>,
}

impl CoverElem {
    pub fn zero(n: u64) -> Self {
        CoverElem {
            comps: vec![RingElem::zero(); n as usize],
        }
    }

    pub fn from_component(n: u64, j: usize, a: RingElem) -> Self {
        let mut b = Self::zero(n);
        b.comps[j] = a;
        b
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Indices j with a nonzero y^j component.
    pub fn support(&self) -> Vec<usize> {
        (0..self.comps.len())
            .filter(|&j| !self.comps[j].is_zero())
            .collect()
    }
}

impl KummerCover {
    pub fn new(base: PuncturedLine, n: u64, exponents: Vec<i64>, unit_const: Fel) -> Result<Self> {
        let f = base.ctx.clone();
        if exponents.len() != base.punctures.len() {
            return Err(Error::ConfigInvalid(format!(
                "{} exponents for {} finite punctures",
                exponents.len(),
                base.punctures.len()
            )));
        }
        if unit_const.is_zero() {
            return Err(Error::ConfigInvalid("unit_const is zero".into()));
        }
        let zeta = f.root_of_unity(n)?;
        for d in prime_factors(n) {
            let all_div = exponents.iter().all(|&m| m % d as i64 == 0);
            if all_div && f.is_power(unit_const, d) {
                return Err(Error::Disconnected(format!(
                    "{d} divides every exponent and the constant is a {d}-th power"
                )));
            }
        }
        let mut f_elem = RingElem::constant(unit_const);
        for (i, &m) in exponents.iter().enumerate() {
            f_elem = base.mul(&f_elem, &base.linear_pow(i, m));
        }
        let mut cover = KummerCover {
            base,
            n,
            exponents,
            zeta,
            unit_const,
            f_elem,
            f_pows: Vec::new(),
        };
        let mut pows = vec![RingElem::constant(Fel::ONE)];
        let q = cover.f().q();
        // y^{jq} with j < n needs f^k for k < q
        for k in 1..q.max(2) {
            let next = cover.base.mul(&pows[k as usize - 1], &cover.f_elem);
            pows.push(next);
        }
        cover.f_pows = pows;
        Ok(cover)
    }

    pub fn f(&self) -> &FieldCtx {
        &self.base.ctx
    }

    pub fn f_elem(&self) -> &RingElem {
        &self.f_elem
    }

    fn f_pow(&self, k: u64) -> RingElem {
        match self.f_pows.get(k as usize) {
            Some(r) => r.clone(),
            None => self.base.pow(&self.f_elem, k),
        }
    }

    pub fn places(&self) -> Vec<Place> {
        self.base.places()
    }

    pub fn place_data(&self, place: Place) -> PlaceData {
        let m = match place {
            Place::Finite(i) => self.exponents[i],
            Place::Infinity => -self.exponents.iter().sum::<i64>(),
        };
        let g = gcd(self.n as i64, m) as u64;
        PlaceData {
            m,
            g,
            e: self.n / g,
            mu: m / g as i64,
        }
    }

    /// Genus of the smooth completion: 2g - 2 = -2n + Σ_P (n - g_P).
    pub fn genus(&self) -> i64 {
        let n = self.n as i64;
        let ram: i64 = self
            .places()
            .into_iter()
            .map(|p| n - self.place_data(p).g as i64)
            .sum();
        (ram - 2 * n + 2) / 2
    }

    pub fn one(&self) -> CoverElem {
        CoverElem::from_component(self.n, 0, RingElem::constant(Fel::ONE))
    }

    /// y^j for 0 ≤ j < n.
    pub fn y_pow(&self, j: usize) -> CoverElem {
        CoverElem::from_component(self.n, j, RingElem::constant(Fel::ONE))
    }

    pub fn add(&self, a: &CoverElem, b: &CoverElem) -> CoverElem {
        CoverElem {
            comps: a
                .comps
                .iter()
                .zip(&b.comps)
                .map(|(x, y)| self.base.add(x, y))
                .collect(),
        }
    }

    pub fn sub(&self, a: &CoverElem, b: &CoverElem) -> CoverElem {
        CoverElem {
            comps: a
                .comps
                .iter()
                .zip(&b.comps)
                .map(|(x, y)| self.base.sub(x, y))
                .collect(),
        }
    }

    pub fn scale(&self, a: &CoverElem, c: Fel) -> CoverElem {
        CoverElem {
            comps: a.comps.iter().map(|x| self.base.scale(x, c)).collect(),
        }
    }

    pub fn mul(&self, a: &CoverElem, b: &CoverElem) -> CoverElem {
        let n = self.n as usize;
        let mut out = CoverElem::zero(self.n);
        for i in a.support() {
            for j in b.support() {
                let mut prod = self.base.mul(&a.comps[i], &b.comps[j]);
                let k = i + j;
                if k >= n {
                    prod = self.base.mul(&prod, &self.f_elem);
                }
                out.comps[k % n] = self.base.add(&out.comps[k % n], &prod);
            }
        }
        out
    }

    /// σ: y ↦ ζ_n y.
    pub fn sigma_apply(&self, b: &CoverElem) -> CoverElem {
        let f = self.f();
        CoverElem {
            comps: b
                .comps
                .iter()
                .enumerate()
                .map(|(j, a)| self.base.scale(a, f.pow(self.zeta, j as i64)))
                .collect(),
        }
    }

    /// b^q, using additivity of Frobenius: (Σ a_j y^j)^q = Σ a_j^q f^{⌊jq/n⌋} y^{jq mod n}.
    pub fn frob_q(&self, b: &CoverElem) -> CoverElem {
        let f = self.f();
        let q = f.q();
        let n = self.n;
        let mut out = CoverElem::zero(n);
        for j in b.support() {
            let aq = self.base.frobenius(&b.comps[j], f.m());
            let jq = j as u64 * q;
            let term = self.base.mul(&aq, &self.f_pow(jq / n));
            let slot = (jq % n) as usize;
            out.comps[slot] = self.base.add(&out.comps[slot], &term);
        }
        out
    }

    /// ℘(b) = b^q - b.
    pub fn wp(&self, b: &CoverElem) -> CoverElem {
        self.sub(&self.frob_q(b), b)
    }

    /// Per-puncture pole bounds on the coefficient of y^j so that a·y^j has
    /// v_Q ≥ -bound above `support` and v_Q ≥ 0 elsewhere.
    pub fn component_bounds(&self, j: usize, bound: u64, support: &[Place]) -> (Vec<i64>, i64) {
        let b_at = |place: Place| -> i64 {
            let d = self.place_data(place);
            let cap = if support.contains(&place) { bound as i64 } else { 0 };
            (cap + j as i64 * d.mu).div_euclid(d.e as i64)
        };
        let finite = (0..self.base.punctures.len())
            .map(|i| b_at(Place::Finite(i)))
            .collect();
        (finite, b_at(Place::Infinity))
    }

    pub fn rr_component(&self, j: usize, bound: u64, support: &[Place]) -> Vec<RingElem> {
        let (fin, inf) = self.component_bounds(j, bound, support);
        self.base.rr_space_general(&fin, inf)
    }

    pub fn rr_space_cover(&self, bound: u64, support: &[Place]) -> Vec<CoverElem> {
        (0..self.n as usize)
            .flat_map(|j| {
                self.rr_component(j, bound, support)
                    .into_iter()
                    .map(move |a| (j, a))
            })
            .map(|(j, a)| CoverElem::from_component(self.n, j, a))
            .collect()
    }

    /// Valuation of b at the point `branch` above `place`.
    pub fn cover_val(&self, b: &CoverElem, place: Place, branch: u64) -> Result<i64> {
        if b.is_zero() {
            return Err(Error::ZeroElement);
        }
        let d = self.place_data(place);
        let cands: Vec<i64> = b
            .support()
            .into_iter()
            .map(|j| {
                let v = self.base.valuation(&b.comps[j], place).unwrap();
                d.e as i64 * v + j as i64 * d.mu
            })
            .collect();
        let min = *cands.iter().min().unwrap();
        if cands.iter().filter(|&&c| c == min).count() == 1 {
            return Ok(min);
        }
        let mut prec = min + 8;
        loop {
            let s = self.expand(b, place, branch, prec, &BranchRule::Smallest)?;
            if let Some(v) = s.valuation() {
                return Ok(v);
            }
            if prec > min + 64 * self.n as i64 * (1 + self.f().q() as i64) {
                return Err(Error::InsufficientPrecision);
            }
            prec = min + 2 * (prec - min);
        }
    }

    /// The n-th root of h(0) fixing branch 0 above `place`; branch b uses root·ζ_n^b.
    pub fn branch_root(&self, place: Place, rule: &BranchRule) -> Result<Fel> {
        let f = self.f();
        let h0 = self.unit_series(place, 1).coeff(0);
        let roots = f.nth_roots(h0, self.n);
        let pick = match rule {
            BranchRule::Smallest => roots.first(),
            BranchRule::Largest => roots.last(),
        };
        pick.copied()
            .ok_or_else(|| Error::NoBranchRoot(f.format(h0)))
    }

    /// h(t) = f·t^{-m} at the place, as a series in the local parameter t.
    fn unit_series(&self, place: Place, prec: i64) -> Series {
        let d = self.place_data(place);
        let s = self.base.laurent(&self.f_elem, place, prec + d.m);
        Series {
            start: s.start - d.m,
            coeffs: s.coeffs,
            prec,
        }
    }

    /// Expansion of b at the point `branch` above `place` in a uniformizer u with u^e = t,
    /// exact for u-exponents below `prec`.
    pub fn expand(
        &self,
        b: &CoverElem,
        place: Place,
        branch: u64,
        prec: i64,
        rule: &BranchRule,
    ) -> Result<Series> {
        let f = self.f();
        let d = self.place_data(place);
        let e = d.e as i64;
        let mut out = Series::zero(prec);
        let support = b.support();
        if support.is_empty() {
            return Ok(out);
        }
        let beta = f.mul(
            self.branch_root(place, rule)?,
            f.pow(self.zeta, (branch % d.g) as i64),
        );
        let max_pole = support
            .iter()
            .map(|&j| self.base.pole_order(&b.comps[j], place).unwrap() as i64)
            .max()
            .unwrap();
        let t_prec_max = support
            .iter()
            .map(|&j| (prec - j as i64 * d.mu).div_euclid(e) + 1)
            .max()
            .unwrap()
            .max(1);
        let g_prec = t_prec_max + max_pole + 1;
        let h = self.unit_series(place, g_prec);
        let h0 = h.coeff(0);
        let g_root = h.scale(f.inv(h0), f).nth_root_one(self.n, f);
        for j in support {
            let t_prec = (prec - j as i64 * d.mu).div_euclid(e) + 1;
            if t_prec <= -max_pole {
                continue;
            }
            let a = self.base.laurent(&b.comps[j], place, t_prec.max(1));
            let gj = g_root.pow(j as u64, f).with_prec(g_prec);
            let s = a.mul(&gj, f);
            let coef = f.pow(beta, j as i64);
            for k in s.start..s.prec.min(t_prec) {
                let c = s.coeff(k);
                if c.is_zero() {
                    continue;
                }
                let ue = e * k + j as i64 * d.mu;
                if ue < prec {
                    out = out.add(&Series::monomial(f.mul(coef, c), ue, prec), f);
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self, b: &CoverElem) -> CoverElemJson {
        CoverElemJson {
            comps: b.comps.iter().map(|a| self.base.to_json(a)).collect(),
        }
    }

    pub fn from_json(&self, j: &CoverElemJson) -> Result<CoverElem> {
        if j.comps.len() != self.n as usize {
            return Err(Error::DimensionMismatch {
                expected: self.n as usize,
                got: j.comps.len(),
            });
        }
        Ok(CoverElem {
            comps: j
                .comps
                .iter()
                .map(|c| self.base.from_json(c))
                .collect::<Result<_>>()?,
        })
    }

    pub fn label(&self, b: &CoverElem) -> String {
        let parts: Vec<String> = b
            .support()
            .into_iter()
            .map(|j| {
                let a = self.base.label(&b.comps[j]);
                let y = match j {
                    0 => String::new(),
                    1 => "y".to_string(),
                    _ => format!("y^{j}"),
                };
                match (a.as_str(), y.is_empty()) {
                    (_, true) => a,
                    ("1", false) => y,
                    _ if b.comps[j].terms().count() > 1 => format!("({a})*{y}"),
                    _ => format!("{a}*{y}"),
                }
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Monomial a·y^j with a a single partial-fraction term.
    pub fn monomial(&self, j: usize, t: Term, c: Fel) -> CoverElem {
        CoverElem::from_component(self.n, j, RingElem::monomial(t, c))
    }
}

/// Which n-th root of h(0) labels branch 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchRule {
    Smallest,
    Largest,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn cfg_a() -> KummerCover {
        let f = Arc::new(FieldCtx::new(2, 2, 2).unwrap());
        let base = PuncturedLine::new(f, vec![Fel::ZERO]).unwrap();
        KummerCover::new(base, 3, vec![1], Fel::ONE).unwrap()
    }

    #[test]
    fn sigma_on_y() {
        let v = cfg_a();
        let y = v.y_pow(1);
        assert_eq!(v.sigma_apply(&y), v.scale(&y, v.zeta));
    }

    #[test]
    fn valuations_over_zero() {
        let v = cfg_a();
        let xy = v.monomial(1, Term::Pow(1), Fel::ONE);
        let xinv_y = v.monomial(1, Term::Pole(0, 1), Fel::ONE);
        assert_eq!(v.cover_val(&xy, Place::Finite(0), 0).unwrap(), 4);
        assert_eq!(v.cover_val(&xinv_y, Place::Finite(0), 0).unwrap(), -2);
        assert_eq!(v.cover_val(&v.one(), Place::Infinity, 0).unwrap(), 0);
        assert_eq!(v.cover_val(&v.y_pow(1), Place::Infinity, 0).unwrap(), -1);
    }

    #[test]
    fn rr_cover_examples() {
        let v = cfg_a();
        let all = v.places();
        let j1 = v.rr_component(1, 4, &all);
        assert_eq!(j1.len(), 3);
        assert_eq!(v.rr_space_cover(0, &all).len(), 1);
        assert_eq!(v.rr_space_cover(7, &[]).len(), 1);
    }

    #[test]
    fn y_expands_to_uniformizer() {
        let v = cfg_a();
        let s = v
            .expand(&v.y_pow(1), Place::Finite(0), 0, 6, &BranchRule::Smallest)
            .unwrap();
        assert_eq!(s.valuation(), Some(1));
        let xinv_y = v.monomial(1, Term::Pole(0, 1), Fel::ONE);
        let s = v
            .expand(&xinv_y, Place::Finite(0), 0, 0, &BranchRule::Smallest)
            .unwrap();
        assert_eq!(s.coeff(-2), Fel::ONE);
        assert_eq!(s.coeff(-1), Fel::ZERO);
    }

    #[test]
    fn disconnected_rejected() {
        let f = Arc::new(FieldCtx::new(2, 2, 2).unwrap());
        let base = PuncturedLine::new(f, vec![Fel::ZERO]).unwrap();
        assert!(matches!(
            KummerCover::new(base, 3, vec![3], Fel::ONE),
            Err(Error::Disconnected(_))
        ));
    }
}
