//! Truncated Laurent series over F_{p^M}.

use crate::gf::{FieldCtx, Fel};

/// `Σ coeffs[i] t^(start + i)`, known exactly for exponents below `prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub start: i64,
    pub coeffs: Vec<Fel>,
    pub prec: i64,
}

impl Series {
    pub fn zero(prec: i64) -> Self {
        Series {
            start: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn monomial(c: Fel, e: i64, prec: i64) -> Self {
        if e >= prec || c.is_zero() {
            return Series::zero(prec);
        }
        Series {
            start: e,
            coeffs: vec![c],
            prec,
        }
    }

    pub fn coeff(&self, e: i64) -> Fel {
        assert!(e < self.prec, "coefficient t^{e} beyond precision {}", self.prec);
        if e < self.start {
            return Fel::ZERO;
        }
        self.coeffs
            .get((e - self.start) as usize)
            .copied()
            .unwrap_or(Fel::ZERO)
    }

    /// Lowest exponent with a nonzero coefficient, if any below `prec`.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.start + i as i64)
    }

    fn normalize(mut self) -> Self {
        let keep = (self.prec - self.start).max(0) as usize;
        self.coeffs.truncate(keep);
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            return Series::zero(self.prec);
        }
        self.coeffs.drain(..lead);
        self.start += lead as i64;
        self
    }

    pub fn add(&self, other: &Series, f: &FieldCtx) -> Series {
        let prec = self.prec.min(other.prec);
        let start = self.start.min(other.start).min(prec);
        let len = (prec - start).max(0) as usize;
        let coeffs = (0..len)
            .map(|i| {
                let e = start + i as i64;
                f.add(self.coeff(e), other.coeff(e))
            })
            .collect();
        Series { start, coeffs, prec }.normalize()
    }

    pub fn scale(&self, c: Fel, f: &FieldCtx) -> Series {
        Series {
            start: self.start,
            coeffs: self.coeffs.iter().map(|&x| f.mul(c, x)).collect(),
            prec: self.prec,
        }
        .normalize()
    }

    /// Product; the result is exact below min(a.start + b.prec, b.start + a.prec).
    pub fn mul(&self, other: &Series, f: &FieldCtx) -> Series {
        let sa = self.valuation().unwrap_or(self.prec);
        let sb = other.valuation().unwrap_or(other.prec);
        let prec = (sa + other.prec).min(sb + self.prec);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Series::zero(prec);
        }
        let start = self.start + other.start;
        let len = (prec - start).max(0) as usize;
        let mut coeffs = vec![Fel::ZERO; len];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if k >= len {
                    break;
                }
                coeffs[k] = f.add(coeffs[k], f.mul(a, b));
            }
        }
        Series { start, coeffs, prec }.normalize()
    }

    pub fn with_prec(mut self, prec: i64) -> Series {
        assert!(prec <= self.prec);
        self.prec = prec;
        self.normalize()
    }

    /// Inverse of a series with nonzero leading term.
    pub fn inverse(&self, f: &FieldCtx) -> Series {
        let v = self.valuation().expect("inverse of zero series");
        let rel = self.prec - v;
        let a0_inv = f.inv(self.coeff(v));
        let mut b = vec![Fel::ZERO; rel as usize];
        if rel > 0 {
            b[0] = a0_inv;
        }
        for k in 1..rel as usize {
            let mut s = Fel::ZERO;
            for i in 1..=k {
                s = f.add(s, f.mul(self.coeff(v + i as i64), b[k - i]));
            }
            b[k] = f.neg(f.mul(s, a0_inv));
        }
        Series {
            start: -v,
            coeffs: b,
            prec: rel - v,
        }
        .normalize()
    }

    pub fn pow(&self, mut e: u64, f: &FieldCtx) -> Series {
        let mut base = self.clone();
        let mut acc = Series::monomial(Fel::ONE, 0, i64::MAX / 4);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, f);
            }
        }
        acc
    }

    /// The unique G with G(0) = 1 and G^n = self, for self(0) = 1 and p ∤ n.
    pub fn nth_root_one(&self, n: u64, f: &FieldCtx) -> Series {
        assert_eq!(self.valuation(), Some(0));
        assert_eq!(self.coeff(0), Fel::ONE);
        let prec = self.prec;
        let n_inv = f.inv(f.from_int((n % f.p()) as i64));
        let mut g = Series::monomial(Fel::ONE, 0, prec);
        for k in 1..prec {
            let trial = g.clone().with_prec(k + 1);
            let power = Series {
                start: trial.start,
                coeffs: trial.coeffs.clone(),
                prec: k + 1,
            }
            .pow(n, f)
            .with_prec(k + 1);
            let diff = f.sub(self.coeff(k), power.coeff(k));
            let gk = f.mul(diff, n_inv);
            g = g.add(&Series::monomial(gk, k, prec), f);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let f = FieldCtx::new(3, 1, 2).unwrap();
        let a = Series {
            start: -1,
            coeffs: vec![Fel(2), Fel(5), Fel(0), Fel(7)],
            prec: 10,
        };
        let prod = a.mul(&a.inverse(&f), &f);
        assert_eq!(prod.valuation(), Some(0));
        assert_eq!(prod.coeff(0), Fel::ONE);
        for e in 1..prod.prec {
            assert_eq!(prod.coeff(e), Fel::ZERO);
        }
    }

    #[test]
    fn nth_root_power_back() {
        let f = FieldCtx::new(2, 2, 2).unwrap();
        let a = Series {
            start: 0,
            coeffs: vec![Fel::ONE, Fel(2), Fel(3), Fel(1)],
            prec: 8,
        };
        let g = a.nth_root_one(3, &f);
        let back = g.pow(3, &f).with_prec(8);
        assert_eq!(back, a.clone().with_prec(8));
    }
}
