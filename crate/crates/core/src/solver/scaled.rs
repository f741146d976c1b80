//! Conditions rewritten in the scale-free variables `a = αA`, `b = βB²`,
//! `d = αD`.
//!
//! Every catalog term carries `α^i β^j` with `i` nonlinear factors beyond the
//! first and `2j` extra derivatives, so each condition is quasi-homogeneous:
//! `α` always travels with `A` or `D`, and `β` with `B²`. After dividing out
//! the common monomial the condition is a polynomial in `(a, b, v, d, m, √m)`.

use num::rational::BigRational;
use num::{Signed, Zero};

use super::univariate::{QPoly, RPoly};
use crate::error::{KdvError, Result};
use crate::symbolic::{rational_to_f64, ConditionPolynomial, Symbol};

pub const IA: usize = 0;
pub const IB: usize = 1;
pub const IV: usize = 2;
pub const ID: usize = 3;
pub const IM: usize = 4;
pub const IS: usize = 5;

/// A point in scaled variables. `s = √m` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPoint {
    pub a: f64,
    pub b: f64,
    pub v: f64,
    pub d: f64,
    pub m: f64,
}

impl ScaledPoint {
    fn values(&self) -> [f64; 6] {
        [
            self.a,
            self.b,
            self.v,
            self.d,
            self.m,
            self.m.max(0.0).sqrt(),
        ]
    }
}

#[derive(Debug, Clone)]
struct ScaledTerm {
    exact: BigRational,
    coef: f64,
    e: [u16; 6],
}

/// One condition in scaled variables.
#[derive(Debug, Clone)]
pub struct ScaledPoly {
    terms: Vec<ScaledTerm>,
}

/// Coefficients of `a^k` after substituting `b = w·a`, `d = δ·a` and a numeric `m`.
#[derive(Debug, Clone)]
pub struct Reduced {
    /// `powers[k]` is the polynomial in `w` multiplying `a^k`.
    pub powers: Vec<RPoly>,
    pub v_coeff: f64,
}

/// Exact counterpart of [`Reduced`] for conditions free of `m` and `d`.
#[derive(Debug, Clone)]
pub struct ReducedExact {
    pub powers: Vec<QPoly>,
    pub v_coeff: BigRational,
}

impl ScaledPoly {
    pub fn from_condition(p: &ConditionPolynomial) -> Result<Self> {
        let not_scalable = || {
            KdvError::usage(format!(
                "condition {p} is not quasi-homogeneous in (alpha A, beta B^2); \
                 the term table lacks the perturbation scaling"
            ))
        };
        let mut alpha_shift: Option<i32> = None;
        let mut beta_shift: Option<i32> = None;
        let mut terms = Vec::with_capacity(p.len());
        for (e, c) in p.terms() {
            let ea = e.get(Symbol::Alpha) as i32;
            let eb = e.get(Symbol::Beta) as i32;
            let ca = ea - (e.get(Symbol::A) + e.get(Symbol::D)) as i32;
            let cb = 2 * eb - e.get(Symbol::B) as i32;
            if *alpha_shift.get_or_insert(ca) != ca || *beta_shift.get_or_insert(cb) != cb {
                return Err(not_scalable());
            }
            let ev = e.get(Symbol::V);
            let nonlinear = e.get(Symbol::A) + e.get(Symbol::B) + e.get(Symbol::D);
            if ev > 1 || (ev == 1 && nonlinear > 0) {
                return Err(KdvError::usage(format!(
                    "condition {p} is not linear in v with constant coefficient"
                )));
            }
            terms.push(ScaledTerm {
                exact: c.clone(),
                coef: rational_to_f64(c),
                e: [
                    e.get(Symbol::A),
                    eb as u16,
                    ev,
                    e.get(Symbol::D),
                    e.get(Symbol::M),
                    e.get(Symbol::S),
                ],
            });
        }
        Ok(ScaledPoly { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_v(&self) -> bool {
        self.terms.iter().any(|t| t.e[IV] > 0)
    }

    /// True when no term involves `m`, `√m` or `d`.
    pub fn is_rational(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.e[IM] == 0 && t.e[IS] == 0 && t.e[ID] == 0)
    }

    /// Value and sum of absolute term values.
    pub fn eval(&self, x: &ScaledPoint) -> (f64, f64) {
        let vals = x.values();
        let mut sum = 0.0;
        let mut mag = 0.0;
        for t in &self.terms {
            let mut p = t.coef;
            for (k, &e) in t.e.iter().enumerate() {
                if e > 0 {
                    p *= vals[k].powi(e as i32);
                }
            }
            sum += p;
            mag += p.abs();
        }
        (sum, mag)
    }

    /// Value divided by the sum of absolute term values.
    pub fn normalized(&self, x: &ScaledPoint) -> f64 {
        let (v, mag) = self.eval(x);
        if mag == 0.0 {
            0.0
        } else {
            v / mag
        }
    }

    /// Partial derivatives with respect to `(a, b, v, d)`.
    pub fn gradient(&self, x: &ScaledPoint) -> [f64; 4] {
        let vals = x.values();
        let mut g = [0.0; 4];
        for t in &self.terms {
            for (var, gv) in g.iter_mut().enumerate() {
                let ev = t.e[var];
                if ev == 0 {
                    continue;
                }
                let mut p = t.coef * ev as f64;
                for (k, &e) in t.e.iter().enumerate() {
                    let e = if k == var { e - 1 } else { e };
                    if e > 0 {
                        p *= vals[k].powi(e as i32);
                    }
                }
                *gv += p;
            }
        }
        g
    }

    fn a_power(t: &ScaledTerm) -> usize {
        (t.e[IA] + t.e[IB] + t.e[ID]) as usize
    }

    /// Substitutes `b = w·a`, `d = δ·a` at the given `m`.
    pub fn reduce(&self, m: f64, delta: f64) -> Reduced {
        let s = m.max(0.0).sqrt();
        let kmax = self.terms.iter().map(Self::a_power).max().unwrap_or(0);
        let wmax = self
            .terms
            .iter()
            .map(|t| t.e[IB] as usize)
            .max()
            .unwrap_or(0);
        let mut powers = vec![vec![0.0; wmax + 1]; kmax + 1];
        let mut v_coeff = 0.0;
        for t in &self.terms {
            let c = t.coef
                * delta.powi(t.e[ID] as i32)
                * m.powi(t.e[IM] as i32)
                * s.powi(t.e[IS] as i32);
            if t.e[IV] == 1 {
                v_coeff += c;
            } else {
                powers[Self::a_power(t)][t.e[IB] as usize] += c;
            }
        }
        Reduced {
            powers: powers.into_iter().map(RPoly::new).collect(),
            v_coeff,
        }
    }

    pub fn reduce_exact(&self) -> Option<ReducedExact> {
        if !self.is_rational() {
            return None;
        }
        let kmax = self.terms.iter().map(Self::a_power).max().unwrap_or(0);
        let wmax = self
            .terms
            .iter()
            .map(|t| t.e[IB] as usize)
            .max()
            .unwrap_or(0);
        let mut powers = vec![vec![BigRational::zero(); wmax + 1]; kmax + 1];
        let mut v_coeff = BigRational::zero();
        for t in &self.terms {
            if t.e[IV] == 1 {
                v_coeff += &t.exact;
            } else {
                powers[Self::a_power(t)][t.e[IB] as usize] += &t.exact;
            }
        }
        Some(ReducedExact {
            powers: powers.into_iter().map(QPoly::new).collect(),
            v_coeff,
        })
    }
}

impl Reduced {
    /// Indices `k` whose `w`-polynomial is not negligible.
    pub fn active_powers(&self) -> Vec<usize> {
        let scale = self
            .powers
            .iter()
            .flat_map(|p| p.coeffs().iter())
            .fold(self.v_coeff.abs(), |m, c| m.max(c.abs()));
        self.powers
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_negligible(1e-14 * scale))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn has_v(&self) -> bool {
        self.v_coeff != 0.0
    }
}

impl ReducedExact {
    pub fn active_powers(&self) -> Vec<usize> {
        self.powers
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn has_v(&self) -> bool {
        !self.v_coeff.is_zero()
    }

    pub fn v_coeff_sign(&self) -> i8 {
        if self.v_coeff.is_positive() {
            1
        } else if self.v_coeff.is_negative() {
            -1
        } else {
            0
        }
    }
}
