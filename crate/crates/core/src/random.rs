//! Seeded sampling of field elements, expressions, classes and families.

use rand::Rng;

use crate::error::Result;
use crate::fields::{FieldCtx, FieldElem, Poly, RatFn};
use crate::mw::{normalize_in, MwClass, MwExpression, Term};

/// Bounds for random sampling.
#[derive(Clone, Copy, Debug)]
pub struct SampleShape {
    /// maximal degree of numerators of function-field entries
    pub num_degree: usize,
    /// maximal degree of denominators of function-field entries
    pub den_degree: usize,
    pub max_terms: usize,
    pub max_eta: u32,
    pub max_coef: i64,
}

impl Default for SampleShape {
    fn default() -> Self {
        SampleShape { num_degree: 2, den_degree: 1, max_terms: 3, max_eta: 1, max_coef: 2 }
    }
}

/// A nonzero element: uniform over `F_q^×`, or a ratio of random
/// polynomials in `F_q(t)`.
pub fn random_unit(rng: &mut impl Rng, ctx: &FieldCtx, shape: &SampleShape) -> FieldElem {
    match ctx {
        FieldCtx::Finite(k) => FieldElem::Finite(rng.gen_range(1..k.size())),
        FieldCtx::Rational(r) => {
            let q = r.base().size();
            let mut poly = |deg: usize| loop {
                let d = rng.gen_range(0..=deg);
                let p = Poly::from_coeffs((0..=d).map(|_| rng.gen_range(0..q)).collect());
                if !p.is_zero() {
                    return p;
                }
            };
            let n = poly(shape.num_degree);
            let d = poly(shape.den_degree);
            FieldElem::Rational(RatFn::new(n, d, r.base()).expect("nonzero denominator"))
        }
    }
}

/// A random expression of the given degree.
pub fn random_expression(rng: &mut impl Rng, ctx: &FieldCtx, degree: i32, shape: &SampleShape) -> Result<MwExpression> {
    let terms = rng.gen_range(1..=shape.max_terms);
    let mut out = Vec::with_capacity(terms);
    let min_eta = (-degree).max(0) as u32;
    for _ in 0..terms {
        let eta = rng.gen_range(min_eta..=min_eta + shape.max_eta);
        let m = (degree + eta as i32) as usize;
        let mut coef = 0;
        while coef == 0 {
            coef = rng.gen_range(-shape.max_coef..=shape.max_coef);
        }
        let entries = (0..m).map(|_| random_unit(rng, ctx, shape)).collect();
        out.push(Term { coef, eta, entries });
    }
    MwExpression::new(ctx, out)
}

/// Normal form of a random expression of the given degree.
pub fn random_class(rng: &mut impl Rng, ctx: &FieldCtx, degree: i32, shape: &SampleShape) -> Result<MwClass> {
    normalize_in(&random_expression(rng, ctx, degree, shape)?, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::parse::parse_field_spec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampling_is_seeded() {
        let ctx = parse_field_spec("F=F5(t)", 121).unwrap();
        let shape = SampleShape::default();
        let a = random_expression(&mut ChaCha8Rng::seed_from_u64(1), &ctx, 1, &shape).unwrap();
        let b = random_expression(&mut ChaCha8Rng::seed_from_u64(1), &ctx, 1, &shape).unwrap();
        assert_eq!(a.display(), b.display());
        for n in -2..=3 {
            let e = random_expression(&mut ChaCha8Rng::seed_from_u64(2), &ctx, n, &shape).unwrap();
            assert_eq!(e.degree(), Some(n));
        }
    }
}
