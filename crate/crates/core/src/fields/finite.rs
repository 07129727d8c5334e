//! Finite fields with table-driven arithmetic.
//!
//! Every field is either a prime field `F_p` or a simple extension
//! `B[x]/(m)` of an already constructed field `B`. Elements are encoded as
//! integers in `[0, q)`: the base-`|B|` digits of the code are the
//! coordinates with respect to the power basis `1, x, x^2, ...`. Flattening
//! the tower this way makes the embedding of any field of the base chain the
//! identity on codes, and addition is digit-wise addition modulo `p`.
//!
//! Multiplication goes through exponential and logarithm tables built once at
//! construction time from a primitive element.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::poly::Poly;

/// Largest field size for which tables are built.
pub const MAX_TABLE_SIZE: u64 = 1 << 20;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub struct FiniteField {
    id: u64,
    p: u32,
    q: u32,
    abs_degree: u32,
    base: Option<Arc<FiniteField>>,
    modulus: Poly,
    var: String,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FiniteField {
    /// The prime field `F_p` for an odd prime `p`.
    pub fn prime(p: u32) -> Result<Arc<FiniteField>> {
        if p == 2 || !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not an odd prime")));
        }
        let mut ff = FiniteField {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            p,
            q: p,
            abs_degree: 1,
            base: None,
            modulus: Poly::zero(),
            var: String::new(),
            generator: 0,
            exp: Vec::new(),
            log: Vec::new(),
        };
        ff.build_tables()?;
        Ok(Arc::new(ff))
    }

    /// The extension `base[var]/(modulus)`; `modulus` must be monic and
    /// irreducible over `base`.
    pub fn extension(base: &Arc<FiniteField>, modulus: Poly, var: &str) -> Result<Arc<FiniteField>> {
        let d = modulus.degree().ok_or_else(|| Error::InvalidField("zero modulus".into()))?;
        if d < 1 || modulus.lead() != 1 {
            return Err(Error::InvalidField("modulus must be monic of positive degree".into()));
        }
        if d == 1 {
            return Err(Error::InvalidField("degree-1 modulus gives no extension".into()));
        }
        let q = (base.q as u64).checked_pow(d as u32).unwrap_or(u64::MAX);
        if q > MAX_TABLE_SIZE {
            return Err(Error::InvalidField(format!("field of size {q} exceeds table limit")));
        }
        if !modulus.is_irreducible(base) {
            return Err(Error::InvalidField(format!(
                "modulus {} is not irreducible",
                modulus.display(base, "x")
            )));
        }
        let mut ff = FiniteField {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            p: base.p,
            q: q as u32,
            abs_degree: base.abs_degree * d as u32,
            base: Some(base.clone()),
            modulus,
            var: var.to_string(),
            generator: 0,
            exp: Vec::new(),
            log: Vec::new(),
        };
        ff.build_tables()?;
        Ok(Arc::new(ff))
    }

    /// Extension of `base` of degree `d` by the smallest monic irreducible
    /// polynomial in enumeration order.
    pub fn extension_of_degree(base: &Arc<FiniteField>, d: u32, var: &str) -> Result<Arc<FiniteField>> {
        if d == 1 {
            return Ok(base.clone());
        }
        let m = Poly::first_irreducible(base, d as usize)
            .ok_or_else(|| Error::InvalidField(format!("no irreducible of degree {d}")))?;
        Self::extension(base, m, var)
    }

    /// `F_q` for a prime power `q`, built over `F_p` with the first monic
    /// irreducible modulus in enumeration order.
    pub fn of_order(q: u32) -> Result<Arc<FiniteField>> {
        let p = prime_factors(q as u64);
        if p.len() != 1 {
            return Err(Error::InvalidField(format!("{q} is not a prime power")));
        }
        let p = p[0] as u32;
        let mut d = 0;
        let mut r = q;
        while r > 1 {
            r /= p;
            d += 1;
        }
        let fp = Self::prime(p)?;
        Self::extension_of_degree(&fp, d, "s")
    }

    fn build_tables(&mut self) -> Result<()> {
        let q = self.q as u64;
        let order = q - 1;
        let primes = prime_factors(order);
        let mut gen = None;
        for c in 1..self.q {
            if self.slow_pow(c, order) != 1 {
                continue;
            }
            if primes.iter().all(|&l| self.slow_pow(c, order / l) != 1) {
                gen = Some(c);
                break;
            }
        }
        let g = gen.ok_or_else(|| Error::InvalidField("no primitive element; modulus reducible".into()))?;
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u32;
        for i in 0..order {
            exp.push(x);
            log[x as usize] = i as u32;
            x = self.slow_mul(x, g);
        }
        if x != 1 {
            return Err(Error::InvalidField("generator order check failed".into()));
        }
        self.generator = g;
        self.exp = exp;
        self.log = log;
        Ok(())
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        match &self.base {
            None => ((a as u64 * b as u64) % self.p as u64) as u32,
            Some(base) => {
                let pa = self.to_poly(a);
                let pb = self.to_poly(b);
                let prod = pa.mul(&pb, base);
                let r = prod.rem(&self.modulus, base);
                self.from_poly(&r)
            }
        }
    }

    fn slow_pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, b);
            }
            b = self.slow_mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Coefficients over the immediate base.
    pub fn to_poly(&self, a: u32) -> Poly {
        let bq = self.base_size();
        let d = self.rel_degree();
        let mut c = Vec::with_capacity(d);
        let mut x = a;
        for _ in 0..d {
            c.push(x % bq);
            x /= bq;
        }
        Poly::from_coeffs(c)
    }

    pub fn from_poly(&self, f: &Poly) -> u32 {
        let bq = self.base_size();
        let mut code = 0u32;
        for &c in f.coeffs().iter().rev() {
            code = code * bq + c;
        }
        code
    }

    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn characteristic(&self) -> u32 {
        self.p
    }
    pub fn size(&self) -> u32 {
        self.q
    }
    pub fn abs_degree(&self) -> u32 {
        self.abs_degree
    }
    pub fn base(&self) -> Option<&Arc<FiniteField>> {
        self.base.as_ref()
    }
    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }
    pub fn var(&self) -> &str {
        &self.var
    }
    pub fn generator(&self) -> u32 {
        self.generator
    }
    /// Degree over the immediate base (1 for prime fields).
    pub fn rel_degree(&self) -> usize {
        match &self.base {
            None => 1,
            Some(b) => (self.abs_degree / b.abs_degree) as usize,
        }
    }
    fn base_size(&self) -> u32 {
        match &self.base {
            None => self.p,
            Some(b) => b.q,
        }
    }

    pub fn same(&self, other: &FiniteField) -> bool {
        self.id == other.id
    }

    /// True when `k` is this field or occurs in its base chain.
    pub fn has_subfield(&self, k: &FiniteField) -> bool {
        let mut cur = Some(self);
        while let Some(f) = cur {
            if f.id == k.id {
                return true;
            }
            cur = f.base.as_deref();
        }
        false
    }

    /// `[self : k]` for `k` in the base chain.
    pub fn degree_over(&self, k: &FiniteField) -> Result<u32> {
        if !self.has_subfield(k) {
            return Err(Error::NotASubfield(k.describe()));
        }
        Ok(self.abs_degree / k.abs_degree)
    }

    pub fn describe(&self) -> String {
        match &self.base {
            None => format!("F{}", self.p),
            Some(b) => format!(
                "F{}[{}]/({})",
                b.q,
                self.var,
                self.modulus.display(b, &self.var)
            ),
        }
    }

    /// Field specification in CLI syntax (`p=5` or `q=9:s^2+1`); only
    /// meaningful for prime fields and their direct extensions.
    pub fn spec_string(&self) -> String {
        match &self.base {
            None => format!("p={}", self.p),
            Some(b) if b.base.is_none() => {
                format!("q={}:{}", self.q, self.modulus.display(b, &self.var))
            }
            Some(_) => self.describe(),
        }
    }

    #[inline]
    pub fn zero(&self) -> u32 {
        0
    }
    #[inline]
    pub fn one(&self) -> u32 {
        1
    }

    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.p;
        if self.abs_degree == 1 {
            let s = a + b;
            return if s >= p { s - p } else { s };
        }
        let (mut a, mut b) = (a, b);
        let mut r = 0u32;
        let mut m = 1u32;
        while a > 0 || b > 0 {
            let s = (a % p + b % p) % p;
            r += s * m;
            a /= p;
            b /= p;
            m *= p;
        }
        r
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let p = self.p;
        if self.abs_degree == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        let mut a = a;
        let mut r = 0u32;
        let mut m = 1u32;
        while a > 0 {
            let d = a % p;
            r += ((p - d) % p) * m;
            a /= p;
            m *= p;
        }
        r
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(if s >= n { s - n } else { s }) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.q - 1;
        let l = self.log[a as usize];
        Ok(self.exp[((n - l) % n) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u32, e: i64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let n = (self.q - 1) as i64;
        let l = self.log[a as usize] as i64;
        self.exp[((l * e.rem_euclid(n)) % n) as usize]
    }

    /// `a^e` for exponents that may not fit in `i64` when written as
    /// products, given as the residue `e mod (q-1)`.
    pub fn pow_mod_order(&self, a: u32, e_mod: u64) -> u32 {
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e_mod % n)) % n) as usize]
    }

    /// Discrete logarithm with respect to the cached generator.
    pub fn dlog(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroHasNoClass);
        }
        Ok(self.log[a as usize])
    }

    pub fn exp_gen(&self, k: u64) -> u32 {
        self.exp[(k % (self.q as u64 - 1)) as usize]
    }

    pub fn is_square(&self, a: u32) -> Result<bool> {
        Ok(self.dlog(a)? % 2 == 0)
    }

    /// Square root of a square (any of the two roots).
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        if l % 2 == 1 {
            return None;
        }
        Some(self.exp[(l / 2) as usize])
    }

    /// A fixed non-square: the generator.
    pub fn nonsquare(&self) -> u32 {
        self.generator
    }

    /// All nonzero elements in code order.
    pub fn units(&self) -> impl Iterator<Item = u32> {
        1..self.q
    }

    /// Frobenius power `a^(|k|^i)`.
    pub fn frobenius(&self, a: u32, k_size: u32, i: u32) -> u32 {
        let n = (self.q - 1) as u64;
        let mut e = 1u64;
        for _ in 0..i {
            e = (e * k_size as u64) % n;
        }
        self.pow_mod_order(a, e)
    }

    /// Trace to the subfield `k`.
    pub fn trace_to(&self, k: &FiniteField, a: u32) -> Result<u32> {
        let d = self.degree_over(k)?;
        let mut s = 0;
        for i in 0..d {
            s = self.add(s, self.frobenius(a, k.q, i));
        }
        debug_assert!(s < k.q);
        Ok(s)
    }

    /// Norm to the subfield `k`: `a^((|L|-1)/(|K|-1))`.
    pub fn norm_to(&self, k: &FiniteField, a: u32) -> Result<u32> {
        self.degree_over(k)?;
        let e = (self.q as u64 - 1) / (k.q as u64 - 1);
        let r = self.pow_mod_order(a, e);
        debug_assert!(r < k.q);
        Ok(r)
    }

    /// Minimal polynomial of `a` over the subfield `k`, with coefficients in `k`.
    pub fn min_poly(&self, k: &FiniteField, a: u32) -> Result<Poly> {
        self.degree_over(k)?;
        let mut conj = vec![a];
        loop {
            let next = self.frobenius(*conj.last().unwrap(), k.q, 1);
            if next == a {
                break;
            }
            conj.push(next);
        }
        // product of (t - c) computed in self, coefficients land in k
        let mut coeffs = vec![1u32];
        for &c in &conj {
            let mut next = vec![0u32; coeffs.len() + 1];
            for (i, &x) in coeffs.iter().enumerate() {
                next[i + 1] = self.add(next[i + 1], x);
                next[i] = self.sub(next[i], self.mul(x, c));
            }
            coeffs = next;
        }
        debug_assert!(coeffs.iter().all(|&c| c < k.q));
        Ok(Poly::from_coeffs(coeffs))
    }

    /// Evaluate a polynomial with coefficients in a subfield at `x`.
    pub fn eval_poly(&self, f: &Poly, x: u32) -> u32 {
        let mut acc = 0u32;
        for &c in f.coeffs().iter().rev() {
            acc = self.add(self.mul(acc, x), c);
        }
        acc
    }

    /// Human-readable element.
    pub fn format(&self, a: u32) -> String {
        match &self.base {
            None => a.to_string(),
            Some(b) => {
                let f = self.to_poly(a);
                f.display(b, &self.var)
            }
        }
    }
}
