//! The rational function field `F_q(t)` and its closed points.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fields::finite::FiniteField;
use crate::fields::poly::{Factorization, Poly};

static NEXT_ID: AtomicU64 = AtomicU64::new(1 << 40);

/// A reduced fraction `num/den` with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn zero() -> Self {
        RatFn { num: Poly::zero(), den: Poly::one() }
    }
    pub fn one() -> Self {
        RatFn { num: Poly::one(), den: Poly::one() }
    }
    pub fn constant(c: u32) -> Self {
        RatFn { num: Poly::constant(c), den: Poly::one() }
    }
    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }
    pub fn new(num: Poly, den: Poly, f: &FiniteField) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den, f);
        let n = num.div_exact(&g, f);
        let d = den.div_exact(&g, f);
        let inv = f.inv(d.lead())?;
        Ok(RatFn { num: n.scale(inv, f), den: d.scale(inv, f) })
    }
    pub fn num(&self) -> &Poly {
        &self.num
    }
    pub fn den(&self) -> &Poly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    /// Constant value, if the function is constant.
    pub fn as_constant(&self) -> Option<u32> {
        if self.den.is_one() && self.num.degree().unwrap_or(0) == 0 {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }
    pub fn add(&self, o: &RatFn, f: &FiniteField) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num, f), self.den.clone(), f).unwrap();
        }
        let n = self.num.mul(&o.den, f).add(&o.num.mul(&self.den, f), f);
        RatFn::new(n, self.den.mul(&o.den, f), f).unwrap()
    }
    pub fn neg(&self, f: &FiniteField) -> RatFn {
        RatFn { num: self.num.neg(f), den: self.den.clone() }
    }
    pub fn sub(&self, o: &RatFn, f: &FiniteField) -> RatFn {
        self.add(&o.neg(f), f)
    }
    pub fn mul(&self, o: &RatFn, f: &FiniteField) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        RatFn::new(self.num.mul(&o.num, f), self.den.mul(&o.den, f), f).unwrap()
    }
    pub fn inv(&self, f: &FiniteField) -> Result<RatFn> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFn::new(self.den.clone(), self.num.clone(), f)
    }
    pub fn div(&self, o: &RatFn, f: &FiniteField) -> Result<RatFn> {
        Ok(self.mul(&o.inv(f)?, f))
    }
    pub fn pow(&self, e: i64, f: &FiniteField) -> Result<RatFn> {
        let b = if e < 0 { self.inv(f)? } else { self.clone() };
        let e = e.unsigned_abs();
        Ok(RatFn { num: b.num.pow(e, f), den: b.den.pow(e, f) })
    }
    pub fn display(&self, f: &FiniteField) -> String {
        let n = self.num.display(f, "t");
        if self.den.is_one() {
            return n;
        }
        let d = self.den.display(f, "t");
        let wrap = |s: String| if s.contains(['+', '*', '^']) { format!("({s})") } else { s };
        format!("{}/{}", wrap(n), wrap(d))
    }
}

/// Which closed point a place is.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PlaceKey {
    /// The point cut out by a monic irreducible polynomial.
    Finite(Poly),
    /// The point at infinity of `P^1`.
    Infinity,
}

struct PlaceInner {
    key: PlaceKey,
    uniformizer: RatFn,
    residue: Arc<FiniteField>,
    /// Image of `t` in the residue field (finite places only).
    root: u32,
    /// `(pi / default_pi)` reduced at the place.
    correction: u32,
    /// lift table from residue codes to polynomials of degree < deg g
    lifts: OnceLock<Vec<Poly>>,
}

/// A closed point of `P^1` over the ground field with a chosen uniformizer.
#[derive(Clone)]
pub struct Place {
    ff: Arc<RationalFunctionField>,
    inner: Arc<PlaceInner>,
}

impl std::fmt::Debug for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Place({})", self.label())
    }
}

/// `F_q(t)` over a finite field, with memoized factorizations and residue
/// fields. Caches are guarded by mutexes so contexts can be shared.
pub struct RationalFunctionField {
    id: u64,
    base: Arc<FiniteField>,
    factor_cache: Mutex<HashMap<Poly, Arc<Factorization>>>,
    residue_cache: Mutex<HashMap<Poly, Arc<FiniteField>>>,
}

impl std::fmt::Debug for RationalFunctionField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(t)", self.base.describe())
    }
}

impl RationalFunctionField {
    pub fn new(base: &Arc<FiniteField>) -> Arc<Self> {
        Arc::new(RationalFunctionField {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            base: base.clone(),
            factor_cache: Mutex::new(HashMap::new()),
            residue_cache: Mutex::new(HashMap::new()),
        })
    }
    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn base(&self) -> &Arc<FiniteField> {
        &self.base
    }

    pub fn factor(&self, p: &Poly) -> Result<Arc<Factorization>> {
        if let Some(f) = self.factor_cache.lock().unwrap().get(p) {
            return Ok(f.clone());
        }
        let fac = Arc::new(p.factor(&self.base)?);
        self.factor_cache.lock().unwrap().insert(p.clone(), fac.clone());
        Ok(fac)
    }

    /// Monic irreducible factors of numerator and denominator.
    pub fn support(&self, a: &RatFn) -> Result<Vec<Poly>> {
        let mut out: Vec<Poly> = Vec::new();
        for p in [a.num(), a.den()] {
            if p.degree().unwrap_or(0) == 0 {
                continue;
            }
            for (g, _) in &self.factor(p)?.factors {
                out.push(g.clone());
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn residue_field(&self, g: &Poly) -> Result<(Arc<FiniteField>, u32)> {
        let d = g.degree().unwrap_or(0);
        if d == 1 {
            return Ok((self.base.clone(), self.base.neg(g.coeff(0))));
        }
        if let Some(k) = self.residue_cache.lock().unwrap().get(g) {
            return Ok((k.clone(), self.base.size()));
        }
        let k = FiniteField::extension(&self.base, g.clone(), "t")?;
        self.residue_cache.lock().unwrap().insert(g.clone(), k.clone());
        Ok((k, self.base.size()))
    }

    /// The finite place `(g)` with uniformizer `g`.
    pub fn place(self: &Arc<Self>, g: &Poly) -> Result<Place> {
        if !g.is_monic() || !g.is_irreducible(&self.base) {
            return Err(Error::InvalidPlace(format!(
                "{} is not monic irreducible",
                g.display(&self.base, "t")
            )));
        }
        let (residue, root) = self.residue_field(g)?;
        Ok(Place {
            ff: self.clone(),
            inner: Arc::new(PlaceInner {
                key: PlaceKey::Finite(g.clone()),
                uniformizer: RatFn::from_poly(g.clone()),
                residue,
                root,
                correction: 1,
                lifts: OnceLock::new(),
            }),
        })
    }

    /// The finite place `(g)` whose residue field is realized as `field`
    /// (an extension of the ground field) with `t` mapping to `root`.
    pub fn place_with_realization(
        self: &Arc<Self>,
        g: &Poly,
        field: &Arc<FiniteField>,
        root: u32,
    ) -> Result<Place> {
        if !g.is_monic() || !g.is_irreducible(&self.base) {
            return Err(Error::InvalidPlace("not monic irreducible".into()));
        }
        let d = field.degree_over(&self.base)?;
        if d as usize != g.degree().unwrap() || field.eval_poly(g, root) != 0 {
            return Err(Error::InvalidPlace("realization does not match the polynomial".into()));
        }
        Ok(Place {
            ff: self.clone(),
            inner: Arc::new(PlaceInner {
                key: PlaceKey::Finite(g.clone()),
                uniformizer: RatFn::from_poly(g.clone()),
                residue: field.clone(),
                root,
                correction: 1,
                lifts: OnceLock::new(),
            }),
        })
    }

    /// The place at infinity with uniformizer `1/t`.
    pub fn infinity(self: &Arc<Self>) -> Place {
        Place {
            ff: self.clone(),
            inner: Arc::new(PlaceInner {
                key: PlaceKey::Infinity,
                uniformizer: RatFn { num: Poly::one(), den: Poly::x() },
                residue: self.base.clone(),
                root: 0,
                correction: 1,
                lifts: OnceLock::new(),
            }),
        }
    }

    pub fn place_for_key(self: &Arc<Self>, key: &PlaceKey) -> Result<Place> {
        match key {
            PlaceKey::Finite(g) => self.place(g),
            PlaceKey::Infinity => Ok(self.infinity()),
        }
    }

    pub fn t(&self) -> RatFn {
        RatFn::from_poly(Poly::x())
    }
}

impl Place {
    pub fn field(&self) -> &Arc<RationalFunctionField> {
        &self.ff
    }
    pub fn key(&self) -> &PlaceKey {
        &self.inner.key
    }
    pub fn residue_field(&self) -> &Arc<FiniteField> {
        &self.inner.residue
    }
    pub fn root(&self) -> u32 {
        self.inner.root
    }
    pub fn uniformizer(&self) -> &RatFn {
        &self.inner.uniformizer
    }
    pub fn is_infinity(&self) -> bool {
        self.inner.key == PlaceKey::Infinity
    }
    pub fn poly(&self) -> Option<&Poly> {
        match &self.inner.key {
            PlaceKey::Finite(g) => Some(g),
            PlaceKey::Infinity => None,
        }
    }
    /// Degree of the residue field over the ground field.
    pub fn degree(&self) -> u32 {
        match &self.inner.key {
            PlaceKey::Finite(g) => g.degree().unwrap() as u32,
            PlaceKey::Infinity => 1,
        }
    }
    /// `pi / pi_default` reduced at the place, where the default uniformizer
    /// is `g` at finite places and `1/t` at infinity.
    pub fn uniformizer_correction(&self) -> u32 {
        self.inner.correction
    }

    pub fn label(&self) -> String {
        let base = &self.ff.base;
        match &self.inner.key {
            PlaceKey::Finite(g) => g.display(base, "t"),
            PlaceKey::Infinity => "inf".into(),
        }
    }
    pub fn uniformizer_label(&self) -> String {
        self.inner.uniformizer.display(&self.ff.base)
    }

    /// Same point with the uniformizer replaced by `pi`, which must have
    /// valuation exactly one.
    pub fn with_uniformizer(&self, pi: &RatFn) -> Result<Place> {
        if self.valuation(pi)? != 1 {
            return Err(Error::InvalidPlace("uniformizer must have valuation 1".into()));
        }
        let default = match &self.inner.key {
            PlaceKey::Finite(g) => RatFn::from_poly(g.clone()),
            PlaceKey::Infinity => RatFn { num: Poly::one(), den: Poly::x() },
        };
        let ratio = pi.div(&default, &self.ff.base)?;
        let correction = self.reduce_default(&ratio)?;
        Ok(Place {
            ff: self.ff.clone(),
            inner: Arc::new(PlaceInner {
                key: self.inner.key.clone(),
                uniformizer: pi.clone(),
                residue: self.inner.residue.clone(),
                root: self.inner.root,
                correction,
                lifts: OnceLock::new(),
            }),
        })
    }

    pub fn valuation(&self, a: &RatFn) -> Result<i64> {
        if a.is_zero() {
            return Err(Error::ZeroHasNoClass);
        }
        let f = &self.ff.base;
        Ok(match &self.inner.key {
            PlaceKey::Finite(g) => {
                let (vn, _) = a.num().split_off(g, f);
                let (vd, _) = a.den().split_off(g, f);
                vn as i64 - vd as i64
            }
            PlaceKey::Infinity => a.den().deg_i() - a.num().deg_i(),
        })
    }

    fn eval_poly(&self, p: &Poly) -> u32 {
        self.inner.residue.eval_poly(p, self.inner.root)
    }

    /// `(a / pi_default^v(a))` reduced at the place.
    fn reduce_default(&self, a: &RatFn) -> Result<u32> {
        let f = &self.ff.base;
        let k = &self.inner.residue;
        match &self.inner.key {
            PlaceKey::Finite(g) => {
                let (_, n) = a.num().split_off(g, f);
                let (_, d) = a.den().split_off(g, f);
                k.div(self.eval_poly(&n), self.eval_poly(&d))
            }
            PlaceKey::Infinity => Ok(a.num().lead()),
        }
    }

    /// Valuation and reduced unit part `(a / pi^v)` for the chosen uniformizer.
    pub fn unit_part(&self, a: &RatFn) -> Result<(i64, u32)> {
        let v = self.valuation(a)?;
        let u = self.reduce_default(a)?;
        let k = &self.inner.residue;
        // a / pi^v = (a / pi0^v) * (pi0/pi)^v
        let c = k.pow(self.inner.correction, -v);
        Ok((v, k.mul(u, c)))
    }

    /// Image of `a` in the residue field.
    pub fn evaluate(&self, a: &RatFn) -> Result<u32> {
        if a.is_zero() {
            return Ok(0);
        }
        let v = self.valuation(a)?;
        if v < 0 {
            return Err(Error::PoleAtPlace);
        }
        if v > 0 {
            return Ok(0);
        }
        self.reduce_default(a)
    }

    /// Polynomial of degree `< deg g` reducing to `c` (finite places), or
    /// the constant `c` at infinity.
    pub fn lift(&self, c: u32) -> Poly {
        let g = match &self.inner.key {
            PlaceKey::Infinity => return Poly::constant(c),
            PlaceKey::Finite(g) => g,
        };
        let base = &self.ff.base;
        let k = &self.inner.residue;
        if g.degree() == Some(1) {
            return Poly::constant(c);
        }
        if k.base().map(|b| b.same(base)).unwrap_or(false) && self.inner.root == base.size() {
            return k.to_poly(c);
        }
        let table = self.inner.lifts.get_or_init(|| {
            let d = g.degree().unwrap();
            let mut table = vec![Poly::zero(); k.size() as usize];
            for p in Poly::monic_of_degree(base, d) {
                // drop the leading 1 to range over all polys of degree < d
                let mut c = p.coeffs().to_vec();
                c.pop();
                let p = Poly::from_coeffs(c);
                let v = self.eval_poly(&p);
                table[v as usize] = p;
            }
            table
        });
        table[c as usize].clone()
    }

    /// `g'(root)`, the factor relating the uniformizer trivialization to the
    /// canonical one (finite places only).
    pub fn derivative_at_root(&self) -> Option<u32> {
        self.poly().map(|g| self.eval_poly(&g.derivative(&self.ff.base)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> (Arc<FiniteField>, Arc<RationalFunctionField>) {
        let f = FiniteField::prime(5).unwrap();
        let ff = RationalFunctionField::new(&f);
        (f, ff)
    }

    #[test]
    fn evaluate_substitution() {
        let (f, ff) = f5();
        let pl = ff.place(&Poly::x()).unwrap();
        let a = RatFn::from_poly(Poly::from_coeffs(vec![2, 1]));
        assert_eq!(pl.evaluate(&a).unwrap(), 2);
        let pl1 = ff.place(&Poly::linear(&f, 1)).unwrap();
        let num = Poly::from_coeffs(vec![1, 0, 1]);
        let den = Poly::from_coeffs(vec![1, 1]);
        let r = RatFn::new(num, den, &f).unwrap();
        assert_eq!(pl1.evaluate(&r).unwrap(), 1);
        assert_eq!(ff.infinity().evaluate(&ff.t()), Err(Error::PoleAtPlace));
    }

    #[test]
    fn fractions_are_reduced() {
        let (f, _) = f5();
        let a = Poly::from_coeffs(vec![4, 0, 1]);
        let b = Poly::from_coeffs(vec![2, 2]);
        let r = RatFn::new(a, b, &f).unwrap();
        // (t-1)/2 = 3t + 2
        assert_eq!(r.num(), &Poly::from_coeffs(vec![2, 3]));
        assert!(r.den().is_one());
    }

    #[test]
    fn valuations_and_unit_parts() {
        let (f, ff) = f5();
        let pl = ff.place(&Poly::x()).unwrap();
        let t = ff.t();
        let a = t.pow(3, &f).unwrap().mul(&RatFn::constant(2), &f);
        assert_eq!(pl.unit_part(&a).unwrap(), (3, 2));
        let inf = ff.infinity();
        assert_eq!(inf.unit_part(&a).unwrap(), (-3, 2));
        let shifted = pl.with_uniformizer(&t.mul(&RatFn::constant(3), &f)).unwrap();
        // t^3 * 2 = (3t)^3 * 2/27
        let expect = f.div(2, f.pow(3, 3)).unwrap();
        assert_eq!(shifted.unit_part(&a).unwrap(), (3, expect));
    }

    #[test]
    fn lifts_recover_residues() {
        let f = FiniteField::prime(3).unwrap();
        let ff = RationalFunctionField::new(&f);
        let g = Poly::from_coeffs(vec![1, 0, 1]);
        let pl = ff.place(&g).unwrap();
        let k = pl.residue_field().clone();
        for c in 0..k.size() {
            let p = pl.lift(c);
            assert_eq!(pl.evaluate(&RatFn::from_poly(p)).unwrap(), c);
        }
        // a realization with another root of g
        let other = k.frobenius(pl.root(), 3, 1);
        let pl2 = ff.place_with_realization(&g, &k, other).unwrap();
        for c in 0..k.size() {
            let p = pl2.lift(c);
            assert_eq!(pl2.evaluate(&RatFn::from_poly(p)).unwrap(), c);
        }
    }
}
