//! Triangular elimination in `(w, a, v)` with `b = w·a`.
//!
//! A condition whose `a`-powers collapse to one (homogeneous in `(a, b, d)`)
//! is a polynomial in `w` alone and fixes the shape ratio. With `w` known, the
//! lowest remaining condition is a polynomial in `a`, and `v` follows from a
//! condition that contains it linearly. Everything left over is a remainder
//! that a genuine solution has to annihilate.

use super::scaled::{Reduced, ReducedExact};
use super::univariate::{QPoly, RPoly};

/// A candidate produced by elimination; not yet checked against the full system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub w: f64,
    pub a: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Elimination {
    /// No condition fixes `a`; the solution set has `a` as a free parameter.
    Underdetermined,
    /// No condition fixes `w`, so the triangular scheme does not apply.
    NotTriangular,
    Candidates(Vec<Candidate>),
}

fn v_from(conds: &[Reduced], a: f64, w: f64) -> f64 {
    match conds.iter().find(|c| c.has_v()) {
        Some(c) => {
            let rest: f64 = c
                .powers
                .iter()
                .enumerate()
                .map(|(k, p)| a.powi(k as i32) * p.eval(w))
                .sum();
            -rest / c.v_coeff
        }
        None => f64::NAN,
    }
}

/// Univariate polynomial in `t` formed from `Σ_k c_k t^(k - kmin)`,
/// with coefficients below `1e-10` of their own term magnitude set to zero.
fn collapse(values: &[(f64, f64)]) -> RPoly {
    let cleaned: Vec<f64> = values
        .iter()
        .map(|&(v, mag)| if v.abs() <= 1e-10 * mag { 0.0 } else { v })
        .collect();
    let first = cleaned
        .iter()
        .position(|c| *c != 0.0)
        .unwrap_or(cleaned.len());
    RPoly::new(cleaned[first..].to_vec()).trimmed(0.0)
}

/// Pick the polynomial with the smallest positive degree.
fn lowest_positive(polys: Vec<RPoly>) -> Option<RPoly> {
    polys
        .into_iter()
        .filter(|p| p.degree().map(|d| d > 0).unwrap_or(false))
        .min_by_key(|p| p.degree().unwrap())
}

/// Numeric elimination. With `a_fixed`, only `w` and `v` are solved for.
pub fn eliminate(conds: &[Reduced], a_fixed: Option<f64>) -> Elimination {
    let non_v: Vec<&Reduced> = conds.iter().filter(|c| !c.has_v()).collect();
    if let Some(a) = a_fixed {
        let w_polys: Vec<RPoly> = non_v
            .iter()
            .map(|c| {
                let n = c.powers.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
                let mut out = vec![0.0; n];
                for (k, p) in c.powers.iter().enumerate() {
                    for (j, x) in p.coeffs().iter().enumerate() {
                        out[j] += a.powi(k as i32) * x;
                    }
                }
                RPoly::new(out).trimmed(1e-14)
            })
            .collect();
        let Some(wp) = lowest_positive(w_polys) else {
            return Elimination::NotTriangular;
        };
        let cands = wp
            .real_roots()
            .into_iter()
            .map(|w| Candidate {
                w,
                a,
                v: v_from(conds, a, w),
            })
            .collect();
        return Elimination::Candidates(cands);
    }

    let homogeneous: Vec<RPoly> = non_v
        .iter()
        .filter_map(|c| {
            let act = c.active_powers();
            (act.len() == 1).then(|| c.powers[act[0]].trimmed(1e-14))
        })
        .collect();
    let Some(top) = lowest_positive(homogeneous) else {
        return Elimination::NotTriangular;
    };
    let mut cands = Vec::new();
    for w in top.real_roots() {
        let a_polys: Vec<RPoly> = non_v
            .iter()
            .map(|c| {
                let vals: Vec<(f64, f64)> =
                    c.powers.iter().map(|p| p.eval_with_magnitude(w)).collect();
                collapse(&vals)
            })
            .collect();
        let Some(ap) = lowest_positive(a_polys) else {
            return Elimination::Underdetermined;
        };
        for a in ap.real_roots() {
            if a != 0.0 {
                cands.push(Candidate {
                    w,
                    a,
                    v: v_from(conds, a, w),
                });
            }
        }
    }
    Elimination::Candidates(cands)
}

/// Result of exact elimination over `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactElimination {
    /// The homogeneous condition as a polynomial in `w`.
    pub shape_polynomial: QPoly,
    /// Index (into the non-`v` conditions) of the condition solved for `a`.
    pub solving_condition: usize,
    /// Remainders after substituting `a = -h_k(w)/h_{k+1}(w)`, as polynomials in `w`.
    pub remainders: Vec<QPoly>,
    /// Monic gcd of the shape polynomial and all remainders.
    pub common_factor: QPoly,
    /// Real roots of the common factor at which the `a` formula is defined.
    pub common_roots: Vec<f64>,
}

/// Exact elimination for conditions with rational coefficients.
///
/// Returns `None` when the system has no homogeneous condition or no
/// condition linear in `a` once `w` is fixed.
pub fn eliminate_exact(conds: &[ReducedExact]) -> Option<ExactElimination> {
    let non_v: Vec<&ReducedExact> = conds.iter().filter(|c| !c.has_v()).collect();
    let top_idx = non_v
        .iter()
        .enumerate()
        .filter(|(_, c)| c.active_powers().len() == 1)
        .filter_map(|(i, c)| {
            let k = c.active_powers()[0];
            let d = c.powers[k].degree()?;
            (d > 0).then_some((i, d))
        })
        .min_by_key(|&(_, d)| d)?
        .0;
    let top = {
        let c = non_v[top_idx];
        c.powers[c.active_powers()[0]].clone()
    };
    let solving = non_v
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != top_idx)
        .filter(|(_, c)| {
            let act = c.active_powers();
            act.len() == 2 && act[1] == act[0] + 1
        })
        .min_by_key(|(_, c)| c.powers.iter().filter_map(|p| p.degree()).max())?
        .0;
    let (num, den) = {
        let c = non_v[solving];
        let act = c.active_powers();
        // a = -h_k / h_{k+1}
        (c.powers[act[0]].neg(), c.powers[act[1]].clone())
    };

    let mut remainders = Vec::new();
    for (i, c) in non_v.iter().enumerate() {
        if i == top_idx || i == solving {
            continue;
        }
        let act = c.active_powers();
        let (kmin, kmax) = (act[0], *act.last().unwrap());
        let span = (kmax - kmin) as u32;
        let mut r = QPoly::zero();
        for k in kmin..=kmax {
            let j = (k - kmin) as u32;
            r = r.add(&c.powers[k].mul(&num.pow(j)).mul(&den.pow(span - j)));
        }
        remainders.push(r);
    }

    let common_factor = remainders
        .iter()
        .fold(top.clone(), |g, r| if r.is_zero() { g } else { g.gcd(r) });
    let den_f = den.to_f64();
    let num_f = num.to_f64();
    let common_roots = if common_factor.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        common_factor
            .to_f64()
            .real_roots()
            .into_iter()
            .filter(|&w| den_f.eval(w).abs() > 1e-12 * (1.0 + num_f.eval(w).abs()))
            .collect()
    };
    Some(ExactElimination {
        shape_polynomial: top,
        solving_condition: solving,
        remainders,
        common_factor,
        common_roots,
    })
}

impl ExactElimination {
    /// `a` as a function of `w` from the solving condition.
    pub fn amplitude_at(&self, conds: &[ReducedExact], w: f64) -> f64 {
        let non_v: Vec<&ReducedExact> = conds.iter().filter(|c| !c.has_v()).collect();
        let c = non_v[self.solving_condition];
        let act = c.active_powers();
        -c.powers[act[0]].to_f64().eval(w) / c.powers[act[1]].to_f64().eval(w)
    }

    /// True when the shape polynomial shares no factor with the remainders.
    pub fn is_coprime(&self) -> bool {
        self.common_factor.degree().unwrap_or(0) == 0
    }
}

/// Value and term magnitude of each leftover condition after `a` has been
/// eliminated with the denominators cleared:
/// `R = Σ_k h_k(w) · (-h_k0(w))^j · h_{k0+1}(w)^(span - j)`.
///
/// Unlike the condition itself, `R` has no pole where the `a` formula does,
/// so a sign change of `R` along a path marks a genuine root.
pub fn cleared_remainders(conds: &[Reduced], w: f64) -> Option<Vec<(f64, f64)>> {
    let non_v: Vec<&Reduced> = conds.iter().filter(|c| !c.has_v()).collect();
    let top = non_v
        .iter()
        .enumerate()
        .filter(|(_, c)| c.active_powers().len() == 1)
        .min_by_key(|(_, c)| c.powers[c.active_powers()[0]].trimmed(1e-14).degree())?
        .0;
    let solving = non_v
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != top)
        .find(|(_, c)| {
            let act = c.active_powers();
            act.len() == 2 && act[1] == act[0] + 1
        })?
        .0;
    let (num, den) = {
        let c = non_v[solving];
        let act = c.active_powers();
        (-c.powers[act[0]].eval(w), c.powers[act[1]].eval(w))
    };
    let mut out = Vec::new();
    for (i, c) in non_v.iter().enumerate() {
        if i == top || i == solving {
            continue;
        }
        let act = c.active_powers();
        let (kmin, kmax) = (act[0], *act.last().unwrap());
        let span = (kmax - kmin) as i32;
        let mut value = 0.0;
        let mut mag = 0.0;
        for k in kmin..=kmax {
            let j = (k - kmin) as i32;
            let (h, hmag) = c.powers[k].eval_with_magnitude(w);
            let f = num.powi(j) * den.powi(span - j);
            value += h * f;
            mag += hmag * f.abs();
        }
        out.push((value, mag));
    }
    Some(out)
}
