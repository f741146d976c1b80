//! KdV, KdV2 and KdV3 in the fixed frame, as exact term lists.
//!
//! A term is `c · α^i · β^j · Π ∂^(k) η`, where each factor is either the time
//! derivative `η_t` or a spatial derivative of order `k` (`η` itself is `k = 0`).

use std::fmt;

use num::rational::BigRational;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{KdvError, Result};
use crate::symbolic::{parse_rational, rat, rational_to_string};

/// One factor of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Derivative {
    Time,
    Space(u8),
}

impl Derivative {
    pub fn name(self) -> String {
        match self {
            Derivative::Time => "eta_t".to_string(),
            Derivative::Space(0) => "eta".to_string(),
            Derivative::Space(1) => "eta_x".to_string(),
            Derivative::Space(k) => format!("eta_{k}x"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eta_t" => Some(Derivative::Time),
            "eta" => Some(Derivative::Space(0)),
            "eta_x" => Some(Derivative::Space(1)),
            _ => {
                let k = s.strip_prefix("eta_")?.strip_suffix('x')?;
                k.parse().ok().map(Derivative::Space)
            }
        }
    }
}

impl Serialize for Derivative {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Derivative {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Derivative::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown derivative {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationTerm {
    pub coefficient: BigRational,
    pub alpha_power: u32,
    pub beta_power: u32,
    /// Sorted multiset of factors.
    pub factors: Vec<Derivative>,
}

impl EquationTerm {
    fn new(num: i64, den: i64, alpha_power: u32, beta_power: u32, factors: &[Derivative]) -> Self {
        let mut factors = factors.to_vec();
        factors.sort();
        EquationTerm {
            coefficient: rat(num, den),
            alpha_power,
            beta_power,
            factors,
        }
    }

    /// Perturbation order `i + j`.
    pub fn perturbation_order(&self) -> u32 {
        self.alpha_power + self.beta_power
    }

    /// Highest spatial derivative among the factors.
    pub fn max_space_derivative(&self) -> u8 {
        self.factors
            .iter()
            .map(|f| match f {
                Derivative::Time => 1,
                Derivative::Space(k) => *k,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.factors.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSpec {
    pub order: u32,
    pub terms: Vec<EquationTerm>,
}

use Derivative::{Space as X, Time as T};

fn kdv_terms() -> Vec<EquationTerm> {
    vec![
        EquationTerm::new(1, 1, 0, 0, &[T]),
        EquationTerm::new(1, 1, 0, 0, &[X(1)]),
        EquationTerm::new(3, 2, 1, 0, &[X(0), X(1)]),
        EquationTerm::new(1, 6, 0, 1, &[X(3)]),
    ]
}

fn kdv2_extra() -> Vec<EquationTerm> {
    vec![
        EquationTerm::new(-3, 8, 2, 0, &[X(0), X(0), X(1)]),
        EquationTerm::new(23, 24, 1, 1, &[X(1), X(2)]),
        EquationTerm::new(5, 12, 1, 1, &[X(0), X(3)]),
        EquationTerm::new(19, 360, 0, 2, &[X(5)]),
    ]
}

fn kdv3_extra() -> Vec<EquationTerm> {
    vec![
        EquationTerm::new(3, 16, 3, 0, &[X(0), X(0), X(0), X(1)]),
        EquationTerm::new(19, 32, 2, 1, &[X(1), X(1), X(1)]),
        EquationTerm::new(23, 16, 2, 1, &[X(0), X(1), X(2)]),
        EquationTerm::new(5, 16, 2, 1, &[X(0), X(0), X(3)]),
        EquationTerm::new(317, 288, 1, 2, &[X(2), X(3)]),
        EquationTerm::new(1079, 1440, 1, 2, &[X(1), X(4)]),
        EquationTerm::new(19, 80, 1, 2, &[X(0), X(5)]),
        EquationTerm::new(55, 3024, 0, 3, &[X(7)]),
    ]
}

/// The equation of the given perturbation order (1 = KdV, 2 = KdV2, 3 = KdV3).
pub fn get_equation(order: u32) -> Result<EquationSpec> {
    let mut terms = kdv_terms();
    match order {
        1 => {}
        2 => terms.extend(kdv2_extra()),
        3 => {
            terms.extend(kdv2_extra());
            terms.extend(kdv3_extra());
        }
        _ => {
            return Err(KdvError::usage(format!(
                "unsupported order {order}: the catalog ships orders 1, 2 and 3"
            )))
        }
    }
    Ok(EquationSpec { order, terms })
}

impl EquationSpec {
    /// Highest spatial derivative appearing anywhere.
    pub fn max_derivative(&self) -> u8 {
        self.terms
            .iter()
            .map(EquationTerm::max_space_derivative)
            .max()
            .unwrap_or(0)
    }

    /// Largest number of `η` factors in a term.
    pub fn max_degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.factors.len())
            .max()
            .unwrap_or(0)
    }

    /// The linear terms other than `η_t` as `(coefficient, α power, β power, derivative order)`.
    pub fn linear_space_terms(&self) -> Vec<(f64, u32, u32, u8)> {
        self.terms
            .iter()
            .filter(|t| t.is_linear())
            .filter_map(|t| match t.factors[0] {
                Derivative::Space(k) => Some((
                    crate::symbolic::rational_to_f64(&t.coefficient),
                    t.alpha_power,
                    t.beta_power,
                    k,
                )),
                Derivative::Time => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "terms": self.terms.iter().map(|t| serde_json::json!({
                "coefficient": rational_to_string(&t.coefficient),
                "alpha_power": t.alpha_power,
                "beta_power": t.beta_power,
                "factors": t.factors.iter().map(|f| f.name()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Reads a user-supplied term table in the same layout as [`Self::to_json`].
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |what: &str| KdvError::usage(format!("malformed equation table: {what}"));
        let order = v
            .get("order")
            .and_then(|o| o.as_u64())
            .ok_or_else(|| bad("order"))? as u32;
        let mut terms = Vec::new();
        for t in v
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| bad("terms"))?
        {
            let coefficient = t
                .get("coefficient")
                .and_then(|c| c.as_str())
                .and_then(parse_rational)
                .ok_or_else(|| bad("coefficient"))?;
            if coefficient.is_zero() {
                return Err(bad("zero coefficient"));
            }
            let alpha_power = t
                .get("alpha_power")
                .and_then(|c| c.as_u64())
                .ok_or_else(|| bad("alpha_power"))? as u32;
            let beta_power = t
                .get("beta_power")
                .and_then(|c| c.as_u64())
                .ok_or_else(|| bad("beta_power"))? as u32;
            let mut factors = t
                .get("factors")
                .and_then(|c| c.as_array())
                .ok_or_else(|| bad("factors"))?
                .iter()
                .map(|f| f.as_str().and_then(Derivative::parse))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| bad("factor name"))?;
            if factors.is_empty() {
                return Err(bad("empty factor list"));
            }
            factors.sort();
            terms.push(EquationTerm {
                coefficient,
                alpha_power,
                beta_power,
                factors,
            });
        }
        Ok(EquationSpec { order, terms })
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let mut s = rational_to_string(&t.coefficient);
                if t.alpha_power > 0 {
                    s.push_str(&format!(" alpha^{}", t.alpha_power));
                }
                if t.beta_power > 0 {
                    s.push_str(&format!(" beta^{}", t.beta_power));
                }
                for fac in &t.factors {
                    s.push(' ');
                    s.push_str(&fac.name());
                }
                s
            })
            .collect();
        write!(f, "{} = 0", parts.join(" + "))
    }
}
