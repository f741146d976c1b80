//! Traveling-wave ansätze and the coefficient conditions they impose.
//!
//! The ansatz `η(y)`, `y = x - vt`, is substituted into an [`EquationSpec`]
//! with `η_t = -v η_y`. The residual is an expression over one of the closed
//! function rings; every canonical basis coefficient must vanish on its own,
//! and those coefficients (stripped of nonzero factors and exact duplicates)
//! form the [`ConditionSystem`].

use std::fmt;
use std::str::FromStr;

use num::rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::catalog::{get_equation, Derivative, EquationSpec};
use crate::error::{KdvError, Result};
use crate::special::{e_over_k, EllipticParam};
use crate::symbolic::{
    rat, BasisExpression, BasisMonomial, ConditionPolynomial, Family, Symbol, SymbolValues,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzFamily {
    /// `A sech²(By)`
    Soliton,
    /// `A cn²(By|m) + D`
    Cnoidal,
    /// `(A/2)[dn² + √m cn dn] + D`
    SuperpositionPlus,
    /// `(A/2)[dn² - √m cn dn] + D`
    SuperpositionMinus,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 4] = [
        AnsatzFamily::Soliton,
        AnsatzFamily::Cnoidal,
        AnsatzFamily::SuperpositionPlus,
        AnsatzFamily::SuperpositionMinus,
    ];

    pub fn basis_family(self) -> Family {
        match self {
            AnsatzFamily::Soliton => Family::Hyperbolic,
            _ => Family::Elliptic,
        }
    }

    pub fn is_elliptic(self) -> bool {
        self.basis_family() == Family::Elliptic
    }

    pub fn is_superposition(self) -> bool {
        matches!(
            self,
            AnsatzFamily::SuperpositionPlus | AnsatzFamily::SuperpositionMinus
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            AnsatzFamily::Soliton => "soliton",
            AnsatzFamily::Cnoidal => "cnoidal",
            AnsatzFamily::SuperpositionPlus => "superposition-plus",
            AnsatzFamily::SuperpositionMinus => "superposition-minus",
        }
    }

    /// `+1` or `-1` in front of `√m cn dn`; zero for the other families.
    pub fn superposition_sign(self) -> i64 {
        match self {
            AnsatzFamily::SuperpositionPlus => 1,
            AnsatzFamily::SuperpositionMinus => -1,
            _ => 0,
        }
    }

    /// Unknown coefficients, in solving order.
    pub fn unknowns(self) -> Vec<Symbol> {
        match self {
            AnsatzFamily::Soliton => vec![Symbol::A, Symbol::B, Symbol::V],
            _ => vec![Symbol::A, Symbol::B, Symbol::V, Symbol::D],
        }
    }
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzFamily {
    type Err = KdvError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soliton" => Ok(AnsatzFamily::Soliton),
            "cnoidal" => Ok(AnsatzFamily::Cnoidal),
            "superposition-plus" | "superposition+" => Ok(AnsatzFamily::SuperpositionPlus),
            "superposition-minus" | "superposition-" => Ok(AnsatzFamily::SuperpositionMinus),
            _ => Err(KdvError::usage(format!("unknown ansatz family {s:?}"))),
        }
    }
}

fn var(s: Symbol) -> ConditionPolynomial {
    ConditionPolynomial::var(s)
}

/// The ansatz `η(y)` as a basis expression.
pub fn make_ansatz(family: AnsatzFamily) -> BasisExpression {
    let a = var(Symbol::A);
    match family {
        AnsatzFamily::Soliton => BasisExpression::monomial(Family::Hyperbolic, 2, 0, 0, a),
        AnsatzFamily::Cnoidal => BasisExpression::monomial(Family::Elliptic, 2, 0, 0, a)
            .add(&BasisExpression::constant(Family::Elliptic, var(Symbol::D)))
            .expect("same family"),
        AnsatzFamily::SuperpositionPlus | AnsatzFamily::SuperpositionMinus => {
            let half_a = a.scale(&rat(1, 2));
            let sign = rat(family.superposition_sign(), 1);
            let dn2 = BasisExpression::monomial(Family::Elliptic, 0, 0, 2, half_a.clone());
            let cross = BasisExpression::monomial(
                Family::Elliptic,
                1,
                0,
                1,
                half_a.mul(&var(Symbol::S)).scale(&sign),
            );
            dn2.add(&cross)
                .and_then(|e| e.add(&BasisExpression::constant(Family::Elliptic, var(Symbol::D))))
                .expect("same family")
        }
    }
}

/// `η` and its first `n` y-derivatives.
pub fn ansatz_derivatives(family: AnsatzFamily, n: usize) -> Vec<BasisExpression> {
    let mut out = vec![make_ansatz(family)];
    for k in 0..n {
        out.push(out[k].differentiate());
    }
    out
}

/// Symbolic residual of `eq` on the ansatz, with `η_t = -v η_y`.
pub fn substituted_residual(family: AnsatzFamily, eq: &EquationSpec) -> BasisExpression {
    let derivs = ansatz_derivatives(family, eq.max_derivative().max(1) as usize);
    let eta_t = derivs[1].scale_poly(&var(Symbol::V).neg());
    let basis = family.basis_family();
    let mut residual = BasisExpression::zero(basis);
    for term in &eq.terms {
        let mut coeff = ConditionPolynomial::constant(term.coefficient.clone());
        coeff = coeff
            .mul(&ConditionPolynomial::var_pow(
                Symbol::Alpha,
                term.alpha_power as u16,
            ))
            .mul(&ConditionPolynomial::var_pow(
                Symbol::Beta,
                term.beta_power as u16,
            ));
        let mut product = BasisExpression::constant(basis, coeff);
        for f in &term.factors {
            let factor = match f {
                Derivative::Time => &eta_t,
                Derivative::Space(k) => &derivs[*k as usize],
            };
            product = product.mul(factor).expect("same family");
        }
        residual = residual.add(&product).expect("same family");
    }
    residual
}

/// Divides out `(dn ± √m cn)` from a superposition residual as often as it
/// divides exactly, using `(dn + s cn)(dn - s cn) = 1 - m`. Returns the
/// quotient and the number of factors removed.
fn strip_superposition_factor(residual: &BasisExpression, sign: i64) -> (BasisExpression, u32) {
    let conj = BasisExpression::monomial(Family::Elliptic, 0, 0, 1, ConditionPolynomial::one())
        .add(&BasisExpression::monomial(
            Family::Elliptic,
            1,
            0,
            0,
            var(Symbol::S).scale(&rat(-sign, 1)),
        ))
        .expect("same family");
    let one_minus_m = ConditionPolynomial::one().sub(&var(Symbol::M));
    let mut current = residual.clone();
    let mut removed = 0;
    loop {
        let candidate = current.mul(&conj).expect("same family");
        let mut ok = true;
        let quotient = candidate.map_coefficients(|c| match c.div_exact(&one_minus_m) {
            Some(q) => q,
            None => {
                ok = false;
                ConditionPolynomial::zero()
            }
        });
        // map_coefficients can't short-circuit; `ok` records any failure.
        if !ok || quotient.is_zero() {
            return (current, removed);
        }
        current = quotient;
        removed += 1;
    }
}

/// One independent condition together with the basis monomials whose
/// coefficients reduce to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub polynomial: ConditionPolynomial,
    pub monomials: Vec<BasisMonomial>,
}

/// Closed-form offset rule `D = δ(m)·A` that makes the period mean of `η` vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeConstraint {
    /// `D = -(A/m)[E/K + m - 1]`
    Cnoidal,
    /// `D = -(A/2) E/K`
    Superposition,
}

/// Below this `m` the cnoidal offset ratio uses its power series.
const SMALL_M: f64 = 1e-2;

impl VolumeConstraint {
    /// `δ(m)` such that `D = δ(m)·A`.
    pub fn offset_ratio(self, m: f64) -> Result<f64> {
        let mp = EllipticParam::new(m)?;
        match self {
            VolumeConstraint::Cnoidal => {
                if m == 0.0 {
                    return Ok(-0.5);
                }
                if m < SMALL_M {
                    // series of -(E/K + m - 1)/m; the closed form cancels here
                    let c = [
                        -0.5,
                        1.0 / 16.0,
                        1.0 / 32.0,
                        41.0 / 2048.0,
                        59.0 / 4096.0,
                        727.0 / 65536.0,
                    ];
                    return Ok(c.iter().rev().fold(0.0, |acc, ci| acc * m + ci));
                }
                Ok(-(e_over_k(mp)? + m - 1.0) / m)
            }
            VolumeConstraint::Superposition => Ok(-0.5 * e_over_k(mp)?),
        }
    }

    pub fn offset(self, amplitude: f64, m: f64) -> Result<f64> {
        Ok(self.offset_ratio(m)? * amplitude)
    }

    pub fn rule(self) -> &'static str {
        match self {
            VolumeConstraint::Cnoidal => "D = -(A/m)*(E(m)/K(m) + m - 1)",
            VolumeConstraint::Superposition => "D = -(A/2)*E(m)/K(m)",
        }
    }
}

/// Period means over a full period `4K(m)` of the monomials used by the ansätze.
pub fn period_mean_cn2(m: f64) -> Result<f64> {
    Ok(-VolumeConstraint::Cnoidal.offset_ratio(m)?)
}

pub fn period_mean_dn2(m: f64) -> Result<f64> {
    e_over_k(EllipticParam::new(m)?)
}

/// `cn·dn` is odd about the quarter period, so its period mean is zero.
pub fn period_mean_cn_dn(_m: f64) -> f64 {
    0.0
}

/// Returns the volume rule for a family (soliton has no offset).
pub fn volume_constraint(family: AnsatzFamily) -> Result<VolumeConstraint> {
    match family {
        AnsatzFamily::Soliton => Err(KdvError::usage(
            "the soliton ansatz has no offset D and no volume constraint",
        )),
        AnsatzFamily::Cnoidal => Ok(VolumeConstraint::Cnoidal),
        _ => Ok(VolumeConstraint::Superposition),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSystem {
    pub family: AnsatzFamily,
    pub order: u32,
    pub unknowns: Vec<Symbol>,
    pub conditions: Vec<Condition>,
    pub volume_constraint: Option<VolumeConstraint>,
    /// Largest basis monomial dividing every collected coefficient's monomial.
    pub common_basis_factor: Option<BasisMonomial>,
    /// Number of `(dn ± √m cn)` factors divided out (superposition only).
    pub stripped_factors: u32,
    /// Rank of the conditions as linear forms in the monomials of the wave
    /// symbols, with coefficients allowed to depend on `m`.
    pub rank: usize,
}

impl ConditionSystem {
    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn polynomials(&self) -> impl Iterator<Item = &ConditionPolynomial> {
        self.conditions.iter().map(|c| &c.polynomial)
    }

    /// Equations including the volume constraint.
    pub fn equation_count(&self) -> usize {
        self.conditions.len() + usize::from(self.volume_constraint.is_some())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family.name(),
            "order": self.order,
            "symbols": crate::symbolic::Symbol::ALL.iter().map(|s| s.name()).collect::<Vec<_>>(),
            "unknowns": self.unknowns.iter().map(|s| s.name()).collect::<Vec<_>>(),
            "common_basis_factor": self.common_basis_factor.map(|m| m.label()),
            "stripped_factors": self.stripped_factors,
            "rank": self.rank,
            "conditions": self.conditions.iter().map(|c| serde_json::json!({
                "basis": c.monomials.iter().map(|m| m.label()).collect::<Vec<_>>(),
                "display": c.polynomial.to_string(),
                "terms": c.polynomial.to_json(),
            })).collect::<Vec<_>>(),
            "volume_constraint": self.volume_constraint.map(|v| serde_json::json!({
                "kind": v,
                "rule": v.rule(),
            })),
        })
    }
}

/// Derives the condition system for one ansatz family and catalog order.
pub fn derive_conditions(family: AnsatzFamily, order: u32) -> Result<ConditionSystem> {
    let eq = get_equation(order)?;
    Ok(derive_conditions_for(family, &eq))
}

/// Same as [`derive_conditions`] for an arbitrary term table.
pub fn derive_conditions_for(family: AnsatzFamily, eq: &EquationSpec) -> ConditionSystem {
    let mut residual = substituted_residual(family, eq);
    let mut stripped = 0;
    if family.is_superposition() {
        let (r, k) = strip_superposition_factor(&residual, family.superposition_sign());
        residual = r;
        stripped = k;
    }
    let collected = residual.collect();
    let common_basis_factor = common_factor(&collected);

    let mut conditions: Vec<Condition> = Vec::new();
    for (mono, coeff) in collected {
        let normal = coeff.normalized();
        match conditions.iter_mut().find(|c| c.polynomial == normal) {
            Some(existing) => existing.monomials.push(mono),
            None => conditions.push(Condition {
                polynomial: normal,
                monomials: vec![mono],
            }),
        }
    }

    let rank = generic_rank(&conditions);
    ConditionSystem {
        family,
        order: eq.order,
        unknowns: family.unknowns(),
        conditions,
        volume_constraint: volume_constraint(family).ok(),
        common_basis_factor,
        stripped_factors: stripped,
        rank,
    }
}

/// Rank over `Q(m)`: the exact rank over `Q` at a few rational points
/// `m = q²`, `s = q`. Specialization can only lower the rank, so the maximum
/// over the sample points is the generic rank unless every point is special.
fn generic_rank(conditions: &[Condition]) -> usize {
    use std::collections::BTreeMap;
    let samples = [rat(3, 7), rat(5, 11), rat(2, 13)];
    let mut best = 0;
    for q in samples {
        let mut columns: BTreeMap<crate::symbolic::Exponents, usize> = BTreeMap::new();
        let mut rows: Vec<BTreeMap<usize, BigRational>> = Vec::new();
        for c in conditions {
            let p = c
                .polynomial
                .substitute(Symbol::S, &ConditionPolynomial::constant(q.clone()))
                .substitute(Symbol::M, &ConditionPolynomial::constant(&q * &q));
            let mut row = BTreeMap::new();
            for (e, coeff) in p.terms() {
                let n = columns.len();
                let col = *columns.entry(*e).or_insert(n);
                row.insert(col, coeff.clone());
            }
            rows.push(row);
        }
        best = best.max(rational_rank(rows));
    }
    best
}

fn rational_rank(mut rows: Vec<std::collections::BTreeMap<usize, BigRational>>) -> usize {
    use num::Zero;
    let mut rank = 0;
    let mut i = 0;
    while i < rows.len() {
        let Some((&pivot_col, pivot_val)) = rows[i].iter().next().map(|(c, v)| (c, v.clone()))
        else {
            rows.swap_remove(i);
            continue;
        };
        let pivot_row = rows[i].clone();
        for (j, row) in rows.iter_mut().enumerate() {
            if j == i {
                continue;
            }
            if let Some(v) = row.get(&pivot_col).cloned() {
                let f = &v / &pivot_val;
                for (c, pv) in &pivot_row {
                    let entry = row.entry(*c).or_insert_with(BigRational::zero);
                    *entry -= &f * pv;
                    if entry.is_zero() {
                        row.remove(c);
                    }
                }
            }
        }
        rank += 1;
        i += 1;
    }
    rank
}

fn common_factor(collected: &[(BasisMonomial, ConditionPolynomial)]) -> Option<BasisMonomial> {
    let first = collected.first()?.0;
    Some(collected.iter().fold(first, |acc, (m, _)| BasisMonomial {
        family: acc.family,
        p: acc.p.min(m.p),
        q: acc.q.min(m.q),
        r: acc.r.min(m.r),
    }))
}

/// Exact check that `other` equals `self` up to a nonzero rational factor and
/// a power product of nonvanishing symbols.
pub fn same_condition(a: &ConditionPolynomial, b: &ConditionPolynomial) -> bool {
    a.normalized() == b.normalized()
}

/// Rational linear combination helper used by the regression tests.
pub fn combine(parts: &[(BigRational, &ConditionPolynomial)]) -> ConditionPolynomial {
    parts
        .iter()
        .fold(ConditionPolynomial::zero(), |acc, (k, p)| {
            acc.add(&p.scale(k))
        })
}

/// Numeric value of the raw residual at `y`, computed term by term from the
/// ansatz derivatives without going through the collected expression.
pub fn residual_pointwise(
    family: AnsatzFamily,
    eq: &EquationSpec,
    values: &SymbolValues,
    y: f64,
) -> f64 {
    let derivs = ansatz_derivatives(family, eq.max_derivative().max(1) as usize);
    let vals: Vec<f64> = derivs.iter().map(|d| d.eval(values, y)).collect();
    let v = values.get(Symbol::V);
    eq.terms
        .iter()
        .map(|t| {
            let c = crate::symbolic::rational_to_f64(&t.coefficient)
                * values.get(Symbol::Alpha).powi(t.alpha_power as i32)
                * values.get(Symbol::Beta).powi(t.beta_power as i32);
            t.factors.iter().fold(c, |acc, f| {
                acc * match f {
                    Derivative::Time => -v * vals[1],
                    Derivative::Space(k) => vals[*k as usize],
                }
            })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ansatz_shapes() {
        let s = make_ansatz(AnsatzFamily::Soliton);
        assert_eq!(s.collect().len(), 1);
        assert_eq!(s.collect()[0].0, BasisMonomial::hyperbolic(2, 0));

        let c = make_ansatz(AnsatzFamily::Cnoidal);
        let labels: Vec<_> = c.collect().iter().map(|(m, _)| m.label()).collect();
        assert_eq!(labels, vec!["1", "cn^2"]);

        // (A/2)dn² = (A/2)(1-m) + (A/2) m cn², plus (A/2)s cn dn + D
        let p = make_ansatz(AnsatzFamily::SuperpositionPlus);
        let labels: Vec<_> = p.collect().iter().map(|(m, _)| m.label()).collect();
        assert_eq!(labels, vec!["1", "cn*dn", "cn^2"]);
    }

    #[test]
    fn soliton_has_no_volume_constraint() {
        assert!(matches!(
            volume_constraint(AnsatzFamily::Soliton),
            Err(KdvError::Usage(_))
        ));
        assert_eq!(
            volume_constraint(AnsatzFamily::SuperpositionMinus).unwrap(),
            VolumeConstraint::Superposition
        );
    }

    #[test]
    fn family_parsing() {
        for f in AnsatzFamily::ALL {
            assert_eq!(f.name().parse::<AnsatzFamily>().unwrap(), f);
        }
        assert!("kink".parse::<AnsatzFamily>().is_err());
    }

    #[test]
    fn cnoidal_offset_vanishes_in_soliton_limit() {
        let mut prev = f64::INFINITY;
        for k in 2..12 {
            let m = 1.0 - 10f64.powi(-k);
            let d = VolumeConstraint::Cnoidal.offset(1.0, m).unwrap().abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(VolumeConstraint::Cnoidal.offset(1.0, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn small_m_offset_is_continuous() {
        let below = VolumeConstraint::Cnoidal
            .offset_ratio(SMALL_M * (1.0 - 1e-12))
            .unwrap();
        let above = VolumeConstraint::Cnoidal.offset_ratio(SMALL_M).unwrap();
        assert!((below - above).abs() < 1e-13, "{below} vs {above}");
        assert_eq!(
            VolumeConstraint::Cnoidal.offset_ratio(1e-300).unwrap(),
            -0.5
        );
    }

    #[test]
    fn superposition_strips_two_factors() {
        for f in [
            AnsatzFamily::SuperpositionPlus,
            AnsatzFamily::SuperpositionMinus,
        ] {
            let sys = derive_conditions(f, 1).unwrap();
            assert_eq!(sys.stripped_factors, 2);
        }
    }
}
