//! Dense univariate polynomials over a [`FiniteField`], including
//! square-free, distinct-degree and equal-degree factorization.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::finite::FiniteField;

/// Coefficients in ascending degree order; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    coeffs: Vec<u32>,
}

impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Factorization `unit * prod f_i^{e_i}` with monic, pairwise distinct
/// irreducible `f_i` sorted by [`Poly`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: u32,
    pub factors: Vec<(Poly, u32)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }
    pub fn one() -> Self {
        Poly { coeffs: vec![1] }
    }
    pub fn constant(c: u32) -> Self {
        Self::from_coeffs(vec![c])
    }
    /// The variable `t`.
    pub fn x() -> Self {
        Poly { coeffs: vec![0, 1] }
    }
    /// `t - a`
    pub fn linear(f: &FiniteField, a: u32) -> Self {
        Poly { coeffs: vec![f.neg(a), 1] }
    }
    pub fn from_coeffs(mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }
    pub fn monomial(c: u32, deg: usize) -> Self {
        let mut v = vec![0; deg + 1];
        v[deg] = c;
        Self::from_coeffs(v)
    }
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    /// Degree with `deg 0 = -1`.
    pub fn deg_i(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }
    pub fn lead(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }
    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn add(&self, o: &Poly, f: &FiniteField) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect();
        Poly::from_coeffs(v)
    }
    pub fn neg(&self, f: &FiniteField) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }
    pub fn sub(&self, o: &Poly, f: &FiniteField) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect();
        Poly::from_coeffs(v)
    }
    pub fn scale(&self, c: u32, f: &FiniteField) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }
    pub fn mul(&self, o: &Poly, f: &FiniteField) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![0u32; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                v[i + j] = f.add(v[i + j], f.mul(a, b));
            }
        }
        Poly::from_coeffs(v)
    }
    pub fn pow(&self, mut e: u64, f: &FiniteField) -> Poly {
        let mut acc = Poly::one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b, f);
            }
            b = b.mul(&b, f);
            e >>= 1;
        }
        acc
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn divrem(&self, d: &Poly, f: &FiniteField) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = f.inv(d.lead()).expect("nonzero lead");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![0u32; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = f.mul(r[i + dd], inv);
            q[i] = c;
            if c == 0 {
                continue;
            }
            for (j, &b) in d.coeffs.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(c, b));
            }
        }
        r.truncate(dd);
        (Poly::from_coeffs(q), Poly::from_coeffs(r))
    }
    pub fn rem(&self, d: &Poly, f: &FiniteField) -> Poly {
        self.divrem(d, f).1
    }
    pub fn div_exact(&self, d: &Poly, f: &FiniteField) -> Poly {
        let (q, r) = self.divrem(d, f);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }
    pub fn monic(&self, f: &FiniteField) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = f.inv(self.lead()).unwrap();
        self.scale(inv, f)
    }
    pub fn gcd(&self, o: &Poly, f: &FiniteField) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }
    pub fn derivative(&self, f: &FiniteField) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let v = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, &c)| f.mul(c, f.from_int((i + 1) as i64)))
            .collect();
        Poly::from_coeffs(v)
    }
    pub fn eval(&self, x: u32, f: &FiniteField) -> u32 {
        f.eval_poly(self, x)
    }
    pub fn mulmod(&self, o: &Poly, m: &Poly, f: &FiniteField) -> Poly {
        self.mul(o, f).rem(m, f)
    }
    pub fn powmod(&self, mut e: u64, m: &Poly, f: &FiniteField) -> Poly {
        let mut acc = Poly::one().rem(m, f);
        let mut b = self.rem(m, f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(&b, m, f);
            }
            b = b.mulmod(&b, m, f);
            e >>= 1;
        }
        acc
    }

    /// Multiplicity of the (nonconstant) factor `g` and the cofactor.
    pub fn split_off(&self, g: &Poly, f: &FiniteField) -> (u32, Poly) {
        let mut k = 0;
        let mut cur = self.clone();
        if cur.is_zero() {
            return (0, cur);
        }
        loop {
            let (q, r) = cur.divrem(g, f);
            if !r.is_zero() {
                return (k, cur);
            }
            k += 1;
            cur = q;
        }
    }

    fn pth_root(&self, f: &FiniteField) -> Poly {
        let p = f.characteristic() as usize;
        // a^(q/p) is the inverse of Frobenius on F_q
        let e = (f.size() / f.characteristic()) as i64;
        let v = self
            .coeffs
            .iter()
            .step_by(p)
            .map(|&c| f.pow(c, e))
            .collect();
        Poly::from_coeffs(v)
    }

    /// Square-free decomposition of a monic polynomial: `(g_i, i)` with
    /// `self = prod g_i^i`.
    fn squarefree(&self, f: &FiniteField) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative(f);
        if d.is_zero() {
            let r = self.pth_root(f);
            for (g, m) in r.squarefree(f) {
                out.push((g, m * f.characteristic()));
            }
            return out;
        }
        let mut c = self.gcd(&d, f);
        let mut w = self.div_exact(&c, f);
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(&c, f);
            let fac = w.div_exact(&y, f);
            if !fac.is_one() {
                out.push((fac, i));
            }
            i += 1;
            w = y;
            c = c.div_exact(&w, f);
        }
        if !c.is_one() {
            let r = c.pth_root(f);
            for (g, m) in r.squarefree(f) {
                out.push((g, m * f.characteristic()));
            }
        }
        out
    }

    /// Distinct-degree factorization of a monic square-free polynomial.
    fn distinct_degree(&self, f: &FiniteField) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let mut rest = self.clone();
        let x = Poly::x();
        let mut h = x.rem(&rest, f);
        let mut d = 0;
        while rest.degree().unwrap_or(0) >= 2 * (d + 1) {
            d += 1;
            h = h.powmod(f.size() as u64, &rest, f);
            let g = h.sub(&x, f).gcd(&rest, f);
            if !g.is_one() {
                rest = rest.div_exact(&g, f);
                h = h.rem(&rest, f);
                out.push((g, d));
            }
        }
        if rest.degree().unwrap_or(0) > 0 {
            let dr = rest.degree().unwrap();
            out.push((rest, dr));
        }
        out
    }

    /// Equal-degree splitting (Cantor–Zassenhaus, odd q).
    fn equal_degree(&self, d: usize, f: &FiniteField, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = self.degree().unwrap();
        if n == d {
            return vec![self.clone()];
        }
        loop {
            let a = Poly::from_coeffs((0..n).map(|_| rng.gen_range(0..f.size())).collect());
            if a.degree().unwrap_or(0) == 0 {
                continue;
            }
            // a^((q^d - 1)/2) = (a^(1 + q + ... + q^(d-1)))^((q-1)/2)
            let mut t = a.rem(self, f);
            let mut s = t.clone();
            for _ in 1..d {
                t = t.powmod(f.size() as u64, self, f);
                s = s.mulmod(&t, self, f);
            }
            let b = s.powmod(((f.size() - 1) / 2) as u64, self, f);
            let g = b.sub(&Poly::one(), f).gcd(self, f);
            if g.degree().unwrap_or(0) > 0 && g.degree() != self.degree() {
                let other = self.div_exact(&g, f);
                let mut out = g.equal_degree(d, f, rng);
                out.extend(other.equal_degree(d, f, rng));
                return out;
            }
        }
    }

    /// Complete factorization over `f`.
    pub fn factor(&self, f: &FiniteField) -> Result<Factorization> {
        if self.is_zero() {
            return Err(Error::ZeroInput);
        }
        let unit = self.lead();
        let m = self.monic(f);
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d77_6b31);
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for (g, mult) in m.squarefree(f) {
            for (h, d) in g.distinct_degree(f) {
                for irr in h.equal_degree(d, f, &mut rng) {
                    factors.push((irr, mult));
                }
            }
        }
        factors.sort();
        // merge repeated factors from different square-free layers
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (g, m) in factors {
            match merged.last_mut() {
                Some((h, k)) if *h == g => *k += m,
                _ => merged.push((g, m)),
            }
        }
        Ok(Factorization { unit, factors: merged })
    }

    pub fn is_irreducible(&self, f: &FiniteField) -> bool {
        match self.degree() {
            None | Some(0) => false,
            Some(1) => true,
            Some(_) => {
                let m = self.monic(f);
                if !m.gcd(&m.derivative(f), f).is_one() {
                    return false;
                }
                let dd = m.distinct_degree(f);
                dd.len() == 1 && dd[0].1 == m.degree().unwrap()
            }
        }
    }

    /// All monic polynomials of degree `d` in enumeration order.
    pub fn monic_of_degree(f: &FiniteField, d: usize) -> impl Iterator<Item = Poly> + '_ {
        let q = f.size() as u64;
        let count = q.pow(d as u32);
        (0..count).map(move |mut k| {
            let mut v = Vec::with_capacity(d + 1);
            for _ in 0..d {
                v.push((k % q) as u32);
                k /= q;
            }
            v.push(1);
            Poly::from_coeffs(v)
        })
    }

    pub fn first_irreducible(f: &FiniteField, d: usize) -> Option<Poly> {
        Poly::monic_of_degree(f, d).find(|g| g.is_irreducible(f))
    }

    pub fn display(&self, f: &FiniteField, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let cs = f.format(c);
            let compound = cs.contains('+') || cs.contains('*') || cs.contains('^');
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let term = if i == 0 {
                if compound {
                    format!("({cs})")
                } else {
                    cs
                }
            } else if c == 1 {
                mono
            } else if compound {
                format!("({cs})*{mono}")
            } else {
                format!("{cs}*{mono}")
            };
            parts.push(term);
        }
        parts.join("+")
    }
}

impl Factorization {
    pub fn recompose(&self, f: &FiniteField) -> Poly {
        let mut acc = Poly::constant(self.unit);
        for (g, m) in &self.factors {
            acc = acc.mul(&g.pow(*m as u64, f), f);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots(f: &FiniteField, g: &Poly) -> Vec<u32> {
        (0..f.size()).filter(|&a| g.eval(a, f) == 0).collect()
    }

    #[test]
    fn difference_of_squares_over_f5() {
        let f = FiniteField::prime(5).unwrap();
        let g = Poly::from_coeffs(vec![4, 0, 1]);
        let fac = g.factor(&f).unwrap();
        assert_eq!(fac.unit, 1);
        assert_eq!(
            fac.factors,
            vec![(Poly::from_coeffs(vec![1, 1]), 1), (Poly::from_coeffs(vec![4, 1]), 1)]
        );
    }

    #[test]
    fn t2_plus_1_by_root_enumeration() {
        let f3 = FiniteField::prime(3).unwrap();
        let g = Poly::from_coeffs(vec![1, 0, 1]);
        assert!(roots(&f3, &g).is_empty());
        assert!(g.is_irreducible(&f3));
        assert_eq!(g.factor(&f3).unwrap().factors, vec![(g.clone(), 1)]);

        let f5 = FiniteField::prime(5).unwrap();
        assert_eq!(roots(&f5, &g), vec![2, 3]);
        let fac = g.factor(&f5).unwrap();
        // t - 2 = t + 3 and t - 3 = t + 2
        assert_eq!(
            fac.factors,
            vec![(Poly::from_coeffs(vec![2, 1]), 1), (Poly::from_coeffs(vec![3, 1]), 1)]
        );
    }

    #[test]
    fn zero_is_rejected() {
        let f = FiniteField::prime(7).unwrap();
        assert_eq!(Poly::zero().factor(&f), Err(Error::ZeroInput));
    }

    #[test]
    fn inseparable_powers() {
        let f = FiniteField::prime(3).unwrap();
        // (t+1)^3 (t^2+1)^2
        let a = Poly::from_coeffs(vec![1, 1]).pow(3, &f);
        let b = Poly::from_coeffs(vec![1, 0, 1]).pow(2, &f);
        let g = a.mul(&b, &f).scale(2, &f);
        let fac = g.factor(&f).unwrap();
        assert_eq!(fac.unit, 2);
        assert_eq!(
            fac.factors,
            vec![(Poly::from_coeffs(vec![1, 1]), 3), (Poly::from_coeffs(vec![1, 0, 1]), 2)]
        );
    }

    #[test]
    fn random_recomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [3u32, 5, 7, 9, 11] {
            let f = FiniteField::of_order(q).unwrap();
            for _ in 0..500 {
                let deg = rng.gen_range(0..=8);
                let mut c: Vec<u32> = (0..=deg).map(|_| rng.gen_range(0..q)).collect();
                if c[deg] == 0 {
                    c[deg] = 1;
                }
                let g = Poly::from_coeffs(c);
                let fac = g.factor(&f).unwrap();
                assert_eq!(fac.recompose(&f), g);
                for (h, _) in &fac.factors {
                    assert!(h.is_monic() && h.is_irreducible(&f));
                }
                for w in fac.factors.windows(2) {
                    assert!(w[0].0 < w[1].0);
                }
            }
        }
    }
}
