//! Expressions over the two closed differential rings used by the ansätze:
//! polynomials in `sech(By)` and `tanh(By)`, and in `cn(By|m)`, `sn(By|m)`,
//! `dn(By|m)`, with [`ConditionPolynomial`] coefficients.
//!
//! Monomials are kept in canonical form: `tanh² = 1 - sech²`,
//! `sn² = 1 - cn²` and `dn² = (1 - m) + m cn²` are applied eagerly, so the
//! odd-function factors (`tanh`, `sn`, `dn`) appear at most once. Distinct
//! canonical monomials are linearly independent functions of `y`, which is
//! what makes [`BasisExpression::collect`] meaningful.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::poly::{rat, ConditionPolynomial, Symbol, SymbolValues};
use crate::error::{KdvError, Result};
use crate::special::{jacobi_cn_sn_dn, sech, EllipticParam};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Hyperbolic,
    Elliptic,
}

/// `sech^p · tanh^q` (hyperbolic, `r = 0`) or `cn^p · sn^q · dn^r` (elliptic),
/// with `q, r ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisMonomial {
    pub family: Family,
    pub p: u16,
    pub q: u8,
    pub r: u8,
}

impl BasisMonomial {
    pub fn hyperbolic(sech_pow: u16, tanh_pow: u8) -> Self {
        assert!(tanh_pow <= 1, "non-canonical tanh power");
        BasisMonomial {
            family: Family::Hyperbolic,
            p: sech_pow,
            q: tanh_pow,
            r: 0,
        }
    }

    pub fn elliptic(cn_pow: u16, sn_pow: u8, dn_pow: u8) -> Self {
        assert!(sn_pow <= 1 && dn_pow <= 1, "non-canonical sn/dn power");
        BasisMonomial {
            family: Family::Elliptic,
            p: cn_pow,
            q: sn_pow,
            r: dn_pow,
        }
    }

    /// Value at argument `B·y` (the caller passes `By` already scaled).
    pub fn eval(&self, u: f64, m: f64) -> f64 {
        match self.family {
            Family::Hyperbolic => sech(u).powi(self.p as i32) * u.tanh().powi(self.q as i32),
            Family::Elliptic => {
                let t = jacobi_cn_sn_dn(u, EllipticParam::new(m.clamp(0.0, 1.0)).unwrap())
                    .expect("finite argument");
                t.cn.powi(self.p as i32) * t.sn.powi(self.q as i32) * t.dn.powi(self.r as i32)
            }
        }
    }

    /// Evaluates from precomputed function values, `(sech, tanh, _)` or `(cn, sn, dn)`.
    pub fn eval_from(&self, f: (f64, f64, f64)) -> f64 {
        f.0.powi(self.p as i32) * f.1.powi(self.q as i32) * f.2.powi(self.r as i32)
    }

    pub fn label(&self) -> String {
        let names = match self.family {
            Family::Hyperbolic => ["sech", "tanh", ""],
            Family::Elliptic => ["cn", "sn", "dn"],
        };
        let mut parts = Vec::new();
        for (name, k) in names.iter().zip([self.p, self.q as u16, self.r as u16]) {
            match k {
                0 => {}
                1 => parts.push(name.to_string()),
                k => parts.push(format!("{name}^{k}")),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for BasisMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

type Key = (u16, u8, u8);

/// Finite linear combination of canonical basis monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisExpression {
    family: Family,
    terms: BTreeMap<Key, ConditionPolynomial>,
}

fn cv(s: Symbol) -> ConditionPolynomial {
    ConditionPolynomial::var(s)
}

impl BasisExpression {
    pub fn zero(family: Family) -> Self {
        BasisExpression {
            family,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(family: Family, c: ConditionPolynomial) -> Self {
        let mut e = Self::zero(family);
        e.add_raw((0, 0, 0), c);
        e
    }

    /// `coeff · monomial`, where the monomial exponents may be non-canonical.
    pub fn monomial(family: Family, p: u16, q: u16, r: u16, coeff: ConditionPolynomial) -> Self {
        if family == Family::Hyperbolic {
            assert_eq!(r, 0, "hyperbolic monomials have no third factor");
        }
        reduce_raw(family, p, q, r).scale_poly(&coeff)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_raw(&mut self, k: Key, c: ConditionPolynomial) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(existing) => {
                *existing = existing.add(&c);
                if existing.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    fn check_family(&self, other: &Self) -> Result<()> {
        if self.family != other.family {
            return Err(KdvError::usage(format!(
                "cannot combine {:?} and {:?} basis expressions",
                self.family, other.family
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_family(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_raw(*k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        BasisExpression {
            family: self.family,
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }

    pub fn scale_poly(&self, c: &ConditionPolynomial) -> Self {
        let mut out = Self::zero(self.family);
        for (k, coeff) in &self.terms {
            out.add_raw(*k, coeff.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_family(other)?;
        let mut out = Self::zero(self.family);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let prod = reduce_raw(
                    self.family,
                    k1.0 + k2.0,
                    (k1.1 + k2.1) as u16,
                    (k1.2 + k2.2) as u16,
                );
                let coeff = c1.mul(c2);
                for (k, c) in prod.terms {
                    out.add_raw(k, c.mul(&coeff));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.family, ConditionPolynomial::one());
        for _ in 0..n {
            out = out.mul(self).expect("same family");
        }
        out
    }

    /// `d/dy`, with the chain factor `B` from the argument `By`.
    pub fn differentiate(&self) -> Self {
        let b = cv(Symbol::B);
        let mut out = Self::zero(self.family);
        for (&(p, q, r), coeff) in &self.terms {
            let c = coeff.mul(&b);
            let (p, q, r) = (p, q as u16, r as u16);
            let pieces: Vec<(ConditionPolynomial, Key16)> = match self.family {
                // (sech^p tanh^q)' = -p sech^p tanh^(q+1) + q sech^(p+2) tanh^(q-1)
                Family::Hyperbolic => {
                    let mut v = Vec::new();
                    if p > 0 {
                        v.push((ConditionPolynomial::integer(-(p as i64)), (p, q + 1, 0)));
                    }
                    if q > 0 {
                        v.push((ConditionPolynomial::integer(q as i64), (p + 2, q - 1, 0)));
                    }
                    v
                }
                // (cn^p sn^q dn^r)' = -p cn^(p-1) sn^(q+1) dn^(r+1)
                //                    + q cn^(p+1) sn^(q-1) dn^(r+1)
                //                    - r m cn^(p+1) sn^(q+1) dn^(r-1)
                Family::Elliptic => {
                    let mut v = Vec::new();
                    if p > 0 {
                        v.push((
                            ConditionPolynomial::integer(-(p as i64)),
                            (p - 1, q + 1, r + 1),
                        ));
                    }
                    if q > 0 {
                        v.push((
                            ConditionPolynomial::integer(q as i64),
                            (p + 1, q - 1, r + 1),
                        ));
                    }
                    if r > 0 {
                        v.push((
                            cv(Symbol::M).scale(&rat(-(r as i64), 1)),
                            (p + 1, q + 1, r - 1),
                        ));
                    }
                    v
                }
            };
            for (k, (pp, qq, rr)) in pieces {
                let piece = reduce_raw(self.family, pp, qq, rr);
                let factor = c.mul(&k);
                for (key, cc) in piece.terms {
                    out.add_raw(key, cc.mul(&factor));
                }
            }
        }
        out
    }

    pub fn differentiate_n(&self, n: usize) -> Self {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.differentiate();
        }
        e
    }

    /// Re-reduces every term to canonical form. Expressions are always kept
    /// canonical, so this is the identity on anything built through this API.
    pub fn normalize(&self) -> Self {
        let mut out = Self::zero(self.family);
        for (&(p, q, r), c) in &self.terms {
            let piece = reduce_raw(self.family, p, q as u16, r as u16);
            for (k, cc) in piece.terms {
                out.add_raw(k, cc.mul(c));
            }
        }
        out
    }

    /// The canonical monomials with their (nonzero) coefficient polynomials.
    pub fn collect(&self) -> Vec<(BasisMonomial, ConditionPolynomial)> {
        self.terms
            .iter()
            .map(|(&(p, q, r), c)| {
                (
                    BasisMonomial {
                        family: self.family,
                        p,
                        q,
                        r,
                    },
                    c.clone(),
                )
            })
            .collect()
    }

    /// Rebuilds an expression from collected pairs.
    pub fn from_collected(family: Family, pairs: &[(BasisMonomial, ConditionPolynomial)]) -> Self {
        let mut out = Self::zero(family);
        for (mono, c) in pairs {
            out.add_raw((mono.p, mono.q, mono.r), c.clone());
        }
        out
    }

    /// Coefficient of a single monomial (zero if absent).
    pub fn coefficient(&self, mono: &BasisMonomial) -> ConditionPolynomial {
        self.terms
            .get(&(mono.p, mono.q, mono.r))
            .cloned()
            .unwrap_or_default()
    }

    /// Applies a map to every coefficient, dropping those that become zero.
    pub fn map_coefficients<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&ConditionPolynomial) -> ConditionPolynomial,
    {
        let mut out = Self::zero(self.family);
        for (k, c) in &self.terms {
            out.add_raw(*k, f(c));
        }
        out
    }

    /// Numeric value at `y` for the given symbol values (uses `B` and `m`).
    pub fn eval(&self, values: &SymbolValues, y: f64) -> f64 {
        let f = basis_functions(
            self.family,
            values.get(Symbol::B) * y,
            values.get(Symbol::M),
        );
        self.eval_with(values, f)
    }

    /// Numeric value from precomputed basis functions at the point.
    pub fn eval_with(&self, values: &SymbolValues, f: (f64, f64, f64)) -> f64 {
        self.terms
            .iter()
            .map(|(&(p, q, r), c)| {
                c.eval(values)
                    * BasisMonomial {
                        family: self.family,
                        p,
                        q,
                        r,
                    }
                    .eval_from(f)
            })
            .sum()
    }
}

/// `(sech u, tanh u, 1)` or `(cn, sn, dn)(u|m)`.
pub fn basis_functions(family: Family, u: f64, m: f64) -> (f64, f64, f64) {
    match family {
        Family::Hyperbolic => (sech(u), u.tanh(), 1.0),
        Family::Elliptic => {
            let t = jacobi_cn_sn_dn(u, EllipticParam::new(m.clamp(0.0, 1.0)).unwrap())
                .expect("finite argument");
            (t.cn, t.sn, t.dn)
        }
    }
}

type Key16 = (u16, u16, u16);

/// Expands a possibly non-canonical monomial into canonical form.
fn reduce_raw(family: Family, p: u16, q: u16, r: u16) -> BasisExpression {
    let mut out = BasisExpression::zero(family);
    if q <= 1 && r <= 1 {
        out.terms
            .insert((p, q as u8, r as u8), ConditionPolynomial::one());
        return out;
    }
    let one = ConditionPolynomial::one();
    if q >= 2 {
        // tanh² = 1 - sech², sn² = 1 - cn²
        let rest = reduce_raw(family, p, q - 2, r);
        let shifted = reduce_raw(family, p + 2, q - 2, r);
        for (k, c) in rest.terms {
            out.add_raw(k, c);
        }
        for (k, c) in shifted.terms {
            out.add_raw(k, c.neg());
        }
        return out;
    }
    // dn² = (1 - m) + m cn²
    debug_assert_eq!(family, Family::Elliptic);
    let m = cv(Symbol::M);
    let rest = reduce_raw(family, p, q, r - 2);
    let shifted = reduce_raw(family, p + 2, q, r - 2);
    let one_minus_m = one.sub(&m);
    for (k, c) in rest.terms {
        out.add_raw(k, c.mul(&one_minus_m));
    }
    for (k, c) in shifted.terms {
        out.add_raw(k, c.mul(&m));
    }
    out
}

impl fmt::Display for BasisExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .collect()
            .iter()
            .map(|(m, c)| format!("({c})*{m}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
