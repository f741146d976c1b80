//! Multivariate polynomials with exact rational coefficients.
//!
//! The variables are fixed: the two small parameters, the four wave
//! coefficients, the elliptic parameter and `s`, a formal square root of `m`.
//! The relation `s² = m` is applied on every multiplication, so `s` never
//! appears with an exponent above one.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub const NVARS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "beta")]
    Beta,
    A,
    B,
    #[serde(rename = "v")]
    V,
    D,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "s")]
    S,
}

impl Symbol {
    pub const ALL: [Symbol; NVARS] = [
        Symbol::Alpha,
        Symbol::Beta,
        Symbol::A,
        Symbol::B,
        Symbol::V,
        Symbol::D,
        Symbol::M,
        Symbol::S,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Alpha => "alpha",
            Symbol::Beta => "beta",
            Symbol::A => "A",
            Symbol::B => "B",
            Symbol::V => "v",
            Symbol::D => "D",
            Symbol::M => "m",
            Symbol::S => "s",
        }
    }

    /// Symbols assumed nonzero for every admissible wave, so a common power of
    /// them can be divided out of a condition.
    pub fn is_nonvanishing(self) -> bool {
        matches!(
            self,
            Symbol::Alpha | Symbol::Beta | Symbol::A | Symbol::B | Symbol::M | Symbol::S
        )
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector, indexed by [`Symbol::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exponents(pub [u16; NVARS]);

impl Exponents {
    #[inline]
    pub fn get(&self, s: Symbol) -> u16 {
        self.0[s.index()]
    }

    #[inline]
    pub fn set(&mut self, s: Symbol, e: u16) {
        self.0[s.index()] = e;
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, other: &Exponents) -> Exponents {
        let mut out = [0u16; NVARS];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a + b;
        }
        let mut e = Exponents(out);
        e.reduce_sqrt_m();
        e
    }

    /// `s² → m`.
    fn reduce_sqrt_m(&mut self) {
        let s = self.get(Symbol::S);
        if s >= 2 {
            let m = self.get(Symbol::M);
            self.set(Symbol::M, m + s / 2);
            self.set(Symbol::S, s % 2);
        }
    }

    fn divides(&self, other: &Exponents) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Exponents) -> Exponents {
        let mut out = [0u16; NVARS];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a - b;
        }
        Exponents(out)
    }
}

/// Numeric values for every symbol, used to evaluate polynomials in `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValues(pub [f64; NVARS]);

impl SymbolValues {
    pub fn new(alpha: f64, beta: f64, a: f64, b: f64, v: f64, d: f64, m: f64) -> Self {
        SymbolValues([alpha, beta, a, b, v, d, m, m.max(0.0).sqrt()])
    }

    #[inline]
    pub fn get(&self, s: Symbol) -> f64 {
        self.0[s.index()]
    }

    pub fn set(&mut self, s: Symbol, value: f64) {
        self.0[s.index()] = value;
        if s == Symbol::M {
            self.0[Symbol::S.index()] = value.max(0.0).sqrt();
        }
    }
}

fn monomial_value(e: &Exponents, values: &SymbolValues) -> f64 {
    e.0.iter()
        .zip(values.0.iter())
        .filter(|(&k, _)| k > 0)
        .map(|(&k, &x)| x.powi(k as i32))
        .product()
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back to a scaled division.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Formats a rational as `"p/q"`, always with an explicit denominator.
pub fn rational_to_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A polynomial in the fixed symbol set with exact rational coefficients.
///
/// Zero coefficients are never stored, and the map keeps terms sorted, so two
/// polynomials are equal exactly when their term maps are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ConditionPolynomial {
    terms: BTreeMap<Exponents, BigRational>,
}

impl ConditionPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Exponents::default())
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(s: Symbol) -> Self {
        Self::var_pow(s, 1)
    }

    pub fn var_pow(s: Symbol, e: u16) -> Self {
        let mut ex = Exponents::default();
        ex.set(s, e);
        ex.reduce_sqrt_m();
        Self::term(BigRational::one(), ex)
    }

    pub fn term(c: BigRational, mut e: Exponents) -> Self {
        e.reduce_sqrt_m();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        ConditionPolynomial { terms }
    }

    /// Builds from arbitrary `(exponents, coefficient)` pairs, merging and
    /// dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (Exponents, BigRational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, mut e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        e.reduce_sqrt_m();
        match self.terms.get_mut(&e) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn degree_in(&self, s: Symbol) -> u16 {
        self.terms.keys().map(|e| e.get(s)).max().unwrap_or(0)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.keys().any(|e| e.get(s) > 0)
    }

    /// Largest term in the canonical order, if any.
    pub fn leading(&self) -> Option<(&Exponents, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ConditionPolynomial {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        ConditionPolynomial {
            terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1.mul(e2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Evaluates in double precision.
    pub fn eval(&self, values: &SymbolValues) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| rational_to_f64(c) * monomial_value(e, values))
            .sum()
    }

    /// Value together with the sum of absolute values of the individual terms.
    pub fn eval_with_magnitude(&self, values: &SymbolValues) -> (f64, f64) {
        let mut sum = 0.0;
        let mut mag = 0.0;
        for (e, c) in &self.terms {
            let t = rational_to_f64(c) * monomial_value(e, values);
            sum += t;
            mag += t.abs();
        }
        (sum, mag)
    }

    /// Substitutes a polynomial for one symbol.
    pub fn substitute(&self, s: Symbol, value: &ConditionPolynomial) -> Self {
        let mut powers: Vec<ConditionPolynomial> = vec![Self::one()];
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let k = e.get(s) as usize;
            while powers.len() <= k {
                let next = powers[powers.len() - 1].mul(value);
                powers.push(next);
            }
            let mut rest = *e;
            rest.set(s, 0);
            out = out.add(&Self::term(c.clone(), rest).mul(&powers[k]));
        }
        out
    }

    /// Largest monomial dividing every term, restricted to nonvanishing symbols.
    pub fn monomial_content(&self) -> Exponents {
        let mut content = Exponents::default();
        let mut first = true;
        for e in self.terms.keys() {
            for s in Symbol::ALL {
                let k = if s.is_nonvanishing() { e.get(s) } else { 0 };
                if first {
                    content.set(s, k);
                } else {
                    content.set(s, content.get(s).min(k));
                }
            }
            first = false;
        }
        content
    }

    /// Divides out the monomial content, makes the coefficients coprime
    /// integers and the leading coefficient positive.
    ///
    /// Two polynomials differ by a nonzero rational factor times a power
    /// product of nonvanishing symbols exactly when their normal forms agree.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let content = self.monomial_content();
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut factor = BigRational::new(den_lcm, num_gcd);
        if self
            .leading()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
        {
            factor = -factor;
        }
        ConditionPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.div(&content), c * &factor))
                .collect(),
        }
    }

    /// `Some(k)` with `other = k · self` if the two are rationally proportional.
    pub fn proportionality(&self, other: &Self) -> Option<BigRational> {
        if self.is_zero() || other.is_zero() || self.terms.len() != other.terms.len() {
            return None;
        }
        let mut ratio: Option<BigRational> = None;
        for ((e1, c1), (e2, c2)) in self.terms.iter().zip(other.terms.iter()) {
            if e1 != e2 {
                return None;
            }
            let r = c2 / c1;
            match &ratio {
                None => ratio = Some(r),
                Some(q) if *q == r => {}
                Some(_) => return None,
            }
        }
        ratio
    }

    /// Exact division; `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let (lead_e, lead_c) = divisor.leading()?;
        let (lead_e, lead_c) = (*lead_e, lead_c.clone());
        let mut rem = self.clone();
        let mut quotient = Self::zero();
        // Multivariate division in the lex order of the term map. The remainder
        // strictly decreases, so this terminates.
        while let Some((e, c)) = rem.leading().map(|(e, c)| (*e, c.clone())) {
            if !lead_e.divides(&e) {
                return None;
            }
            let q = Self::term(&c / &lead_c, e.div(&lead_e));
            rem = rem.sub(&q.mul(divisor));
            quotient = quotient.add(&q);
        }
        Some(quotient)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| {
                    serde_json::json!({
                        "exponents": e.0.to_vec(),
                        "coefficient": rational_to_string(c),
                    })
                })
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        let mut out = Self::zero();
        for t in v.as_array()? {
            let ex = t.get("exponents")?.as_array()?;
            if ex.len() != NVARS {
                return None;
            }
            let mut e = Exponents::default();
            for (slot, x) in e.0.iter_mut().zip(ex) {
                *slot = u16::try_from(x.as_u64()?).ok()?;
            }
            let c = parse_rational(t.get("coefficient")?.as_str()?)?;
            out.add_term(e, c);
        }
        Some(out)
    }
}

impl fmt::Display for ConditionPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || e.total_degree() == 0 {
                factors.push(if abs.is_integer() {
                    abs.numer().to_string()
                } else {
                    format!("{}/{}", abs.numer(), abs.denom())
                });
            }
            for s in Symbol::ALL {
                match e.get(s) {
                    0 => {}
                    1 => factors.push(s.name().to_string()),
                    k => factors.push(format!("{}^{}", s.name(), k)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}
