//! Coefficient fields: finite fields and `F_q(t)`.

pub mod finite;
pub mod parse;
pub mod poly;
pub mod rational;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
pub use finite::FiniteField;
pub use poly::{Factorization, Poly};
pub use rational::{Place, PlaceKey, RatFn, RationalFunctionField};

/// A supported coefficient field.
#[derive(Clone, Debug)]
pub enum FieldCtx {
    Finite(Arc<FiniteField>),
    Rational(Arc<RationalFunctionField>),
}

/// An element of a [`FieldCtx`]; the context is passed to every operation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum FieldElem {
    Finite(u32),
    Rational(RatFn),
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (FieldCtx::Finite(a), FieldCtx::Finite(b)) => a.same(b),
            (FieldCtx::Rational(a), FieldCtx::Rational(b)) => a.id() == b.id(),
            _ => false,
        }
    }
}

impl Eq for FieldCtx {}

/// Descriptor written into report headers.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FieldSpec {
    pub spec: String,
    pub q: u32,
    pub rational: bool,
}

impl FieldCtx {
    pub fn finite(f: &Arc<FiniteField>) -> Self {
        FieldCtx::Finite(f.clone())
    }
    pub fn rational(f: &Arc<RationalFunctionField>) -> Self {
        FieldCtx::Rational(f.clone())
    }

    /// Ground finite field (the field itself, or the constants of `F_q(t)`).
    pub fn ground(&self) -> &Arc<FiniteField> {
        match self {
            FieldCtx::Finite(f) => f,
            FieldCtx::Rational(r) => r.base(),
        }
    }
    pub fn as_finite(&self) -> Option<&Arc<FiniteField>> {
        match self {
            FieldCtx::Finite(f) => Some(f),
            FieldCtx::Rational(_) => None,
        }
    }
    pub fn as_rational(&self) -> Option<&Arc<RationalFunctionField>> {
        match self {
            FieldCtx::Rational(r) => Some(r),
            FieldCtx::Finite(_) => None,
        }
    }
    pub fn is_finite(&self) -> bool {
        matches!(self, FieldCtx::Finite(_))
    }

    pub fn spec(&self) -> FieldSpec {
        match self {
            FieldCtx::Finite(f) => FieldSpec { spec: f.spec_string(), q: f.size(), rational: false },
            FieldCtx::Rational(r) => FieldSpec {
                spec: format!("F=F{}(t){}", r.base().size(), {
                    let s = r.base().spec_string();
                    match s.split_once(':') {
                        Some((_, m)) => format!(":{m}"),
                        None => String::new(),
                    }
                }),
                q: r.base().size(),
                rational: true,
            },
        }
    }

    pub fn check_same(&self, other: &FieldCtx) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            let (a, b) = (format!("{self:?}"), format!("{other:?}"));
            if a == b {
                Err(Error::FieldMismatch(format!("two separately constructed copies of {a}; share one context")))
            } else {
                Err(Error::FieldMismatch(format!("{a} vs {b}")))
            }
        }
    }

    fn bad(&self, e: &FieldElem) -> Error {
        Error::FieldMismatch(format!("{e:?} is not an element of {self:?}"))
    }

    pub fn zero(&self) -> FieldElem {
        match self {
            FieldCtx::Finite(_) => FieldElem::Finite(0),
            FieldCtx::Rational(_) => FieldElem::Rational(RatFn::zero()),
        }
    }
    pub fn one(&self) -> FieldElem {
        match self {
            FieldCtx::Finite(_) => FieldElem::Finite(1),
            FieldCtx::Rational(_) => FieldElem::Rational(RatFn::one()),
        }
    }
    pub fn from_int(&self, n: i64) -> FieldElem {
        let c = self.ground().from_int(n);
        self.constant(c)
    }
    /// Embedding of a ground-field code.
    pub fn constant(&self, c: u32) -> FieldElem {
        match self {
            FieldCtx::Finite(_) => FieldElem::Finite(c),
            FieldCtx::Rational(_) => FieldElem::Rational(RatFn::constant(c)),
        }
    }

    pub fn is_zero(&self, a: &FieldElem) -> bool {
        match a {
            FieldElem::Finite(c) => *c == 0,
            FieldElem::Rational(r) => r.is_zero(),
        }
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        match (self, a, b) {
            (FieldCtx::Finite(f), FieldElem::Finite(x), FieldElem::Finite(y)) => {
                Ok(FieldElem::Finite(f.add(*x, *y)))
            }
            (FieldCtx::Rational(r), FieldElem::Rational(x), FieldElem::Rational(y)) => {
                Ok(FieldElem::Rational(x.add(y, r.base())))
            }
            _ => Err(self.bad(a)),
        }
    }
    pub fn neg(&self, a: &FieldElem) -> Result<FieldElem> {
        match (self, a) {
            (FieldCtx::Finite(f), FieldElem::Finite(x)) => Ok(FieldElem::Finite(f.neg(*x))),
            (FieldCtx::Rational(r), FieldElem::Rational(x)) => {
                Ok(FieldElem::Rational(x.neg(r.base())))
            }
            _ => Err(self.bad(a)),
        }
    }
    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        self.add(a, &self.neg(b)?)
    }
    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        match (self, a, b) {
            (FieldCtx::Finite(f), FieldElem::Finite(x), FieldElem::Finite(y)) => {
                Ok(FieldElem::Finite(f.mul(*x, *y)))
            }
            (FieldCtx::Rational(r), FieldElem::Rational(x), FieldElem::Rational(y)) => {
                Ok(FieldElem::Rational(x.mul(y, r.base())))
            }
            _ => Err(self.bad(a)),
        }
    }
    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        match (self, a) {
            (FieldCtx::Finite(f), FieldElem::Finite(x)) => Ok(FieldElem::Finite(f.inv(*x)?)),
            (FieldCtx::Rational(r), FieldElem::Rational(x)) => {
                Ok(FieldElem::Rational(x.inv(r.base())?))
            }
            _ => Err(self.bad(a)),
        }
    }
    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        self.mul(a, &self.inv(b)?)
    }
    pub fn pow(&self, a: &FieldElem, e: i64) -> Result<FieldElem> {
        match (self, a) {
            (FieldCtx::Finite(f), FieldElem::Finite(x)) => {
                if *x == 0 && e < 0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(FieldElem::Finite(f.pow(*x, e)))
            }
            (FieldCtx::Rational(r), FieldElem::Rational(x)) => {
                Ok(FieldElem::Rational(x.pow(e, r.base())?))
            }
            _ => Err(self.bad(a)),
        }
    }

    /// Exact square test; finite fields only.
    pub fn is_square(&self, a: &FieldElem) -> Result<bool> {
        match (self, a) {
            (FieldCtx::Finite(f), FieldElem::Finite(x)) => f.is_square(*x),
            (FieldCtx::Rational(r), FieldElem::Rational(x)) => {
                if x.is_zero() {
                    return Err(Error::ZeroHasNoClass);
                }
                // square iff all multiplicities even and leading coefficient square
                let base = r.base();
                for p in [x.num(), x.den()] {
                    if p.degree().unwrap_or(0) > 0
                        && r.factor(p)?.factors.iter().any(|(_, m)| m % 2 == 1)
                    {
                        return Ok(false);
                    }
                }
                base.is_square(x.num().lead())
            }
            _ => Err(self.bad(a)),
        }
    }

    pub fn format(&self, a: &FieldElem) -> String {
        match (self, a) {
            (FieldCtx::Finite(f), FieldElem::Finite(x)) => f.format(*x),
            (FieldCtx::Rational(r), FieldElem::Rational(x)) => x.display(r.base()),
            _ => format!("{a:?}"),
        }
    }

    /// Field homomorphism from the ground field: identity on finite fields,
    /// constants into `F_q(t)`.
    pub fn embed_constant(&self, a: &FieldElem) -> Result<FieldElem> {
        match (self, a) {
            (_, FieldElem::Finite(c)) => Ok(self.constant(*c)),
            (FieldCtx::Rational(_), FieldElem::Rational(_)) => Ok(a.clone()),
            _ => Err(self.bad(a)),
        }
    }
}

impl FieldElem {
    pub fn as_finite(&self) -> Option<u32> {
        match self {
            FieldElem::Finite(c) => Some(*c),
            FieldElem::Rational(_) => None,
        }
    }
    pub fn as_rational(&self) -> Option<&RatFn> {
        match self {
            FieldElem::Rational(r) => Some(r),
            FieldElem::Finite(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cached_generator_has_full_order() {
        for q in [3u32, 5, 7, 9, 11, 25, 27, 49, 81, 121] {
            let f = FiniteField::of_order(q).unwrap();
            let g = f.generator();
            let n = (q - 1) as u64;
            assert_eq!(f.pow_mod_order(g, n), 1);
            for l in finite::prime_factors(n) {
                assert_ne!(f.pow_mod_order(g, n / l), 1, "q={q} l={l}");
            }
        }
    }

    #[test]
    fn square_test_matches_euler_criterion() {
        for q in [3u32, 5, 7, 9, 11] {
            let f = FiniteField::of_order(q).unwrap();
            let squares: Vec<u32> = f.units().map(|b| f.mul(b, b)).collect();
            for a in f.units() {
                let euler = f.pow(a, ((q - 1) / 2) as i64) == 1;
                assert_eq!(f.is_square(a).unwrap(), euler);
                assert_eq!(euler, squares.contains(&a));
            }
            assert_eq!(f.is_square(0), Err(Error::ZeroHasNoClass));
        }
    }

    #[test]
    fn square_examples() {
        let f7 = FiniteField::prime(7).unwrap();
        assert!(f7.is_square(4).unwrap());
        assert!(!f7.is_square(3).unwrap());
        let f9 = FiniteField::of_order(9).unwrap();
        assert!(f9.is_square(1).unwrap());
    }

    #[test]
    fn norm_examples() {
        let f3 = FiniteField::prime(3).unwrap();
        let f9 = FiniteField::extension(&f3, Poly::from_coeffs(vec![1, 0, 1]), "s").unwrap();
        for a in 1..3 {
            assert_eq!(f9.norm_to(&f3, a).unwrap(), f3.mul(a, a));
        }
        // s^2 = -1, so s^(1+3) = s^4 = 1
        let s = 3;
        assert_eq!(f9.mul(s, s), 2);
        let direct = f9.mul(s, f9.mul(s, f9.mul(s, s)));
        assert_eq!(f9.norm_to(&f3, s).unwrap(), direct);
        assert_eq!(direct, 1);
        // conjugate product
        for a in f9.units() {
            let conj = f9.mul(a, f9.frobenius(a, 3, 1));
            assert_eq!(f9.norm_to(&f3, a).unwrap(), conj);
        }
        let f5 = FiniteField::prime(5).unwrap();
        assert!(f9.norm_to(&f5, 1).is_err());
    }

    #[test]
    fn norm_is_multiplicative() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f5 = FiniteField::prime(5).unwrap();
        let f25 = FiniteField::extension_of_degree(&f5, 2, "s").unwrap();
        for _ in 0..100 {
            let a = rng.gen_range(1..25);
            let b = rng.gen_range(1..25);
            let lhs = f25.norm_to(&f5, f25.mul(a, b)).unwrap();
            let rhs = f5.mul(f25.norm_to(&f5, a).unwrap(), f25.norm_to(&f5, b).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = FiniteField::prime(7).unwrap();
        let ff = RationalFunctionField::new(&f);
        let pl = ff.place(&Poly::from_coeffs(vec![1, 0, 1])).unwrap();
        let k = pl.residue_field().clone();
        let rand_poly = |rng: &mut rand_chacha::ChaCha8Rng| {
            Poly::from_coeffs((0..4).map(|_| rng.gen_range(0..7)).collect())
        };
        let mut n = 0;
        while n < 100 {
            let a = RatFn::from_poly(rand_poly(&mut rng));
            let b = RatFn::from_poly(rand_poly(&mut rng));
            let d = rand_poly(&mut rng);
            if d.is_zero() || pl.valuation(&RatFn::from_poly(d.clone())).unwrap() != 0 {
                continue;
            }
            let b = b.div(&RatFn::from_poly(d), &f).unwrap();
            let ea = pl.evaluate(&a).unwrap();
            let eb = pl.evaluate(&b).unwrap();
            assert_eq!(pl.evaluate(&a.add(&b, &f)).unwrap(), k.add(ea, eb));
            assert_eq!(pl.evaluate(&a.mul(&b, &f)).unwrap(), k.mul(ea, eb));
            n += 1;
        }
    }
}
