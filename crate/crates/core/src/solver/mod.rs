//! Solving condition systems and certifying their inconsistency.
//!
//! All work happens in the scaled variables `a = αA`, `b = βB²`, `d = αD`
//! (see [`scaled`]), where the conditions no longer depend on `α` and `β`.
//! The number of equations (generic rank plus the volume constraint) against
//! the number of unknowns decides the verdict shape:
//!
//! * fewer equations: a family, parametrized by the amplitude;
//! * as many: a discrete set from triangular elimination, polished by Newton;
//! * more: an inconsistency certificate made of an exact elimination (when
//!   the coefficients are rational), numeric elimination remainders, and a
//!   global lower bound on the normalized sum of squares.

pub mod elimination;
pub mod newton;
pub mod scaled;
pub mod scan;
pub mod univariate;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ansatz::{derive_conditions, AnsatzFamily, ConditionSystem};
use crate::error::{KdvError, Result};
use crate::symbolic::{rational_to_f64, Symbol, SymbolValues};
use elimination::{eliminate, eliminate_exact, Elimination};
use newton::{max_normalized, polish, Polish};
use scaled::{ScaledPoint, ScaledPoly};
use scan::{scan, Objective, ScanOptions, ScanRegion, ScanResult};

/// Parameters closer than this to 0 or 1 are moved onto the boundary of
/// `[M_CLAMP, 1 - M_CLAMP]`.
pub const M_CLAMP: f64 = 1e-12;
/// A scan minimum above this counts as inconsistent.
pub const INCONSISTENCY_THRESHOLD: f64 = 1e-8;
/// Elimination candidates whose worst normalized condition exceeds this are rejected.
const CANDIDATE_TOLERANCE: f64 = 1e-9;

/// Which root of the shape polynomial a solution comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    KdvFamily,
    /// `z1`, `z2`, … in ascending order of the shape ratio.
    Root(u8),
}

impl Branch {
    pub fn label(self) -> String {
        match self {
            Branch::KdvFamily => "kdv_family".to_string(),
            Branch::Root(i) => format!("z{i}"),
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Branch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "kdv_family" {
            return Ok(Branch::KdvFamily);
        }
        s.strip_prefix('z')
            .and_then(|i| i.parse().ok())
            .map(Branch::Root)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown branch {s:?}")))
    }
}

/// A concrete traveling wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionParams {
    pub family: AnsatzFamily,
    pub order: u32,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(rename = "B")]
    pub inverse_width: f64,
    pub v: f64,
    #[serde(rename = "D")]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub branch: Branch,
    /// `βB²/(αA)`, times `m` for the cnoidal family.
    pub z: f64,
    /// Worst condition value over the sum of its absolute term values.
    pub max_normalized_residual: f64,
}

impl SolutionParams {
    pub fn symbol_values(&self) -> SymbolValues {
        SymbolValues::new(
            self.alpha,
            self.beta,
            self.amplitude,
            self.inverse_width,
            self.v,
            self.offset,
            self.m.unwrap_or(0.0),
        )
    }

    fn scaled(&self) -> ScaledPoint {
        ScaledPoint {
            a: self.alpha * self.amplitude,
            b: self.beta * self.inverse_width.powi(2),
            v: self.v,
            d: self.alpha * self.offset,
            m: self.m.unwrap_or(0.0),
        }
    }
}

/// An elimination root that did not make it into the solution list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRoot {
    pub z: f64,
    pub a: f64,
    pub b: f64,
    pub v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    pub max_normalized_residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCertificate {
    /// The homogeneous condition in `w = b/a`, integer coefficients, highest degree first.
    pub shape_polynomial: Vec<String>,
    /// Degrees of the eliminated remainders in `w`.
    pub remainder_degrees: Vec<Option<usize>>,
    /// Degree of `gcd(shape, remainders)`; zero means no common root at all.
    pub common_factor_degree: usize,
    /// Real common roots `w` together with the resulting `(a, b)`.
    pub common_roots: Vec<[f64; 3]>,
    pub admissible_roots: usize,
}

/// Elimination remainder followed along one root of the shape polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderProfile {
    /// Shape ratio of the branch (independent of `m`).
    pub z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_range: Option<(f64, f64)>,
    pub samples: usize,
    /// Smallest over the samples of the largest normalized cleared remainder.
    pub min_normalized_remainder: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_at_min: Option<f64>,
    /// Sign changes of any cleared remainder between neighbouring samples.
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactCertificate>,
    /// Numeric elimination candidates and how far they miss the full system.
    pub elimination: Vec<RejectedRoot>,
    pub remainder_profiles: Vec<RemainderProfile>,
    pub scan: ScanResult,
    pub threshold: f64,
}

impl Certificate {
    pub fn min_normalized_ssq(&self) -> f64 {
        self.scan.min_ssq
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    Family {
        dimension: usize,
        free_parameters: Vec<&'static str>,
        #[serde(skip_serializing_if = "Option::is_none")]
        solution: Option<SolutionParams>,
    },
    Discrete {
        solutions: Vec<SolutionParams>,
        rejected: Vec<RejectedRoot>,
    },
    Inconsistent {
        certificate: Box<Certificate>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub family: AnsatzFamily,
    pub order: u32,
    pub conditions: usize,
    pub equations: usize,
    pub unknowns: usize,
    #[serde(flatten)]
    pub kind: VerdictKind,
    pub warnings: Vec<String>,
}

impl ConsistencyVerdict {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            VerdictKind::Family { .. } => "family",
            VerdictKind::Discrete { .. } => "discrete",
            VerdictKind::Inconsistent { .. } => "inconsistent",
        }
    }

    pub fn solutions(&self) -> Vec<&SolutionParams> {
        match &self.kind {
            VerdictKind::Family { solution, .. } => solution.iter().collect(),
            VerdictKind::Discrete { solutions, .. } => solutions.iter().collect(),
            VerdictKind::Inconsistent { .. } => Vec::new(),
        }
    }

    pub fn branch(&self, branch: Branch) -> Option<&SolutionParams> {
        self.solutions().into_iter().find(|s| s.branch == branch)
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.kind {
            VerdictKind::Inconsistent { certificate } => Some(certificate),
            _ => None,
        }
    }
}

/// Knobs for [`consistency_analysis`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Elliptic parameter for families and discrete sets.
    pub m: Option<f64>,
    /// Physical amplitude `A` for one-parameter families.
    pub amplitude: Option<f64>,
    /// Override for the inconsistency scan.
    pub scan: Option<ScanOptions>,
    /// `m` range scanned for elliptic families.
    pub m_range: (f64, f64),
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            m: None,
            amplitude: None,
            scan: None,
            m_range: (0.001, 0.999),
        }
    }
}

/// Derived systems are pure functions of `(family, order)`; this keeps them
/// around for repeated solves.
pub fn cached_system(family: AnsatzFamily, order: u32) -> Result<Arc<ConditionSystem>> {
    type Cache = Mutex<HashMap<(AnsatzFamily, u32), Arc<ConditionSystem>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(sys) = cache.lock().unwrap().get(&(family, order)) {
        return Ok(sys.clone());
    }
    let sys = Arc::new(derive_conditions(family, order)?);
    cache.lock().unwrap().insert((family, order), sys.clone());
    Ok(sys)
}

fn check_small_parameters(alpha: f64, beta: f64) -> Result<()> {
    for (name, x) in [("alpha", alpha), ("beta", beta)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(KdvError::domain(format!(
                "{name} must be positive and finite, got {x}"
            )));
        }
    }
    Ok(())
}

/// Validates `m ∈ (0, 1)` and clamps it into `[M_CLAMP, 1 - M_CLAMP]`.
pub fn clamp_m(m: f64, warnings: &mut Vec<String>) -> Result<f64> {
    if !(m.is_finite() && m > 0.0 && m < 1.0) {
        return Err(KdvError::domain(format!("m must lie in (0, 1), got {m}")));
    }
    let c = m.clamp(M_CLAMP, 1.0 - M_CLAMP);
    if c != m {
        warnings.push(format!("m = {m:e} clamped to {c:e}"));
    }
    Ok(c)
}

/// Normalized value of every condition at a solution: each condition divided
/// by its largest absolute term.
pub fn condition_residuals(system: &ConditionSystem, sol: &SolutionParams) -> Vec<f64> {
    let vals = sol.symbol_values();
    system
        .polynomials()
        .map(|p| {
            let (v, _) = p.eval_with_magnitude(&vals);
            let largest = p
                .terms()
                .map(|(e, c)| {
                    Symbol::ALL.iter().fold(rational_to_f64(c), |acc, &s| {
                        acc * vals.get(s).powi(e.get(s) as i32)
                    })
                })
                .map(f64::abs)
                .fold(0.0, f64::max);
            if largest == 0.0 {
                0.0
            } else {
                v / largest
            }
        })
        .collect()
}

struct Context<'a> {
    system: &'a ConditionSystem,
    alpha: f64,
    beta: f64,
    conds: Vec<ScaledPoly>,
}

impl Context<'_> {
    fn delta(&self, m: f64) -> Result<f64> {
        match self.system.volume_constraint {
            Some(vc) => vc.offset_ratio(m),
            None => Ok(0.0),
        }
    }

    fn z_of(&self, w: f64, m: f64) -> f64 {
        if self.system.family == AnsatzFamily::Cnoidal {
            w * m
        } else {
            w
        }
    }

    fn to_params(&self, p: &ScaledPoint, branch: Branch, residual: f64) -> SolutionParams {
        let elliptic = self.system.family.is_elliptic();
        SolutionParams {
            family: self.system.family,
            order: self.system.order,
            alpha: self.alpha,
            beta: self.beta,
            amplitude: p.a / self.alpha,
            inverse_width: (p.b / self.beta).sqrt(),
            v: p.v,
            offset: p.d / self.alpha,
            m: elliptic.then_some(p.m),
            branch,
            z: self.z_of(p.b / p.a, p.m),
            max_normalized_residual: residual,
        }
    }

    /// Reason a scaled point is unphysical, if any.
    fn inadmissible(&self, p: &ScaledPoint) -> Option<String> {
        if !(p.a.is_finite() && p.b.is_finite() && p.v.is_finite()) {
            return Some("non-finite parameters".into());
        }
        if p.b <= 0.0 {
            return Some("B^2 <= 0".into());
        }
        if self.system.family == AnsatzFamily::Soliton && p.a <= 0.0 {
            return Some("soliton amplitude A <= 0".into());
        }
        None
    }

    fn reduced(&self, m: f64) -> Result<Vec<scaled::Reduced>> {
        let delta = self.delta(m)?;
        Ok(self.conds.iter().map(|c| c.reduce(m, delta)).collect())
    }

    fn rejected(&self, p: &ScaledPoint, residual: f64, reason: String) -> RejectedRoot {
        RejectedRoot {
            z: self.z_of(p.b / p.a, p.m),
            a: p.a,
            b: p.b,
            v: p.v,
            m: self.system.family.is_elliptic().then_some(p.m),
            max_normalized_residual: residual,
            reason,
        }
    }

    /// Elimination, candidate screening and Newton polish at one `m`.
    fn solve_at(
        &self,
        m: f64,
        a_fixed: Option<f64>,
    ) -> Result<(Vec<SolutionParams>, Vec<RejectedRoot>)> {
        let delta = self.delta(m)?;
        let cands = match eliminate(&self.reduced(m)?, a_fixed) {
            Elimination::Candidates(c) => c,
            Elimination::Underdetermined => {
                return Err(KdvError::usage(
                    "the conditions leave the amplitude free; supply A",
                ))
            }
            Elimination::NotTriangular => return Err(KdvError::NonConvergence(
                "no condition fixes the shape ratio B^2/A; triangular elimination does not apply"
                    .into(),
            )),
        };
        // Branch labels follow the ordering of the shape ratio across all roots.
        let mut ws: Vec<f64> = cands.iter().map(|c| c.w).collect();
        ws.sort_by(f64::total_cmp);
        ws.dedup();
        let mut solutions = Vec::new();
        let mut rejected = Vec::new();
        for c in cands {
            let start = ScaledPoint {
                a: c.a,
                b: c.w * c.a,
                v: c.v,
                d: delta * c.a,
                m,
            };
            let branch = if a_fixed.is_some() {
                Branch::KdvFamily
            } else {
                Branch::Root(ws.iter().position(|&w| w == c.w).unwrap() as u8 + 1)
            };
            let residual = max_normalized(&self.conds, &start);
            if residual > CANDIDATE_TOLERANCE {
                rejected.push(self.rejected(&start, residual, "conditions not satisfied".into()));
                continue;
            }
            if let Some(reason) = self.inadmissible(&start) {
                rejected.push(self.rejected(&start, residual, reason));
                continue;
            }
            let polished = polish(
                &self.conds,
                start,
                Polish {
                    m,
                    delta,
                    fix_a: a_fixed.is_some(),
                },
            );
            match polished {
                Ok(p) => solutions.push(self.to_params(&p.point, branch, p.max_residual)),
                Err(e) => rejected.push(self.rejected(&start, residual, e.to_string())),
            }
        }
        Ok((solutions, rejected))
    }
}

/// Classifies a condition system.
pub fn consistency_analysis(
    system: &ConditionSystem,
    alpha: f64,
    beta: f64,
    opts: &AnalysisOptions,
) -> Result<ConsistencyVerdict> {
    if system.is_empty() {
        return Err(KdvError::usage("empty condition system"));
    }
    check_small_parameters(alpha, beta)?;
    let mut warnings = Vec::new();
    let family = system.family;
    let m = match (family.is_elliptic(), opts.m) {
        (true, Some(m)) => Some(clamp_m(m, &mut warnings)?),
        (false, Some(_)) => {
            warnings.push("m ignored for the soliton family".into());
            None
        }
        (_, None) => None,
    };
    if let Some(a) = opts.amplitude {
        if !(a.is_finite() && a != 0.0) {
            return Err(KdvError::domain(format!(
                "amplitude must be finite and nonzero, got {a}"
            )));
        }
    }
    let ctx = Context {
        system,
        alpha,
        beta,
        conds: system
            .polynomials()
            .map(ScaledPoly::from_condition)
            .collect::<Result<_>>()?,
    };
    let equations = system.rank + usize::from(system.volume_constraint.is_some());
    let unknowns = system.unknowns.len();
    let need_m = || {
        m.ok_or_else(|| {
            KdvError::usage(format!(
                "the {family} family needs the elliptic parameter m"
            ))
        })
    };

    let kind = if equations < unknowns {
        let dimension = unknowns - equations;
        let solution = match opts.amplitude {
            Some(amp) if dimension == 1 => {
                let mm = if family.is_elliptic() { need_m()? } else { 0.0 };
                let (mut sols, rejected) = ctx.solve_at(mm, Some(alpha * amp))?;
                if sols.is_empty() {
                    let why = rejected
                        .first()
                        .map(|r| r.reason.clone())
                        .unwrap_or_else(|| "no real root".into());
                    return Err(KdvError::domain(format!(
                        "no admissible {family} solution with A = {amp}: {why}"
                    )));
                }
                Some(sols.remove(0))
            }
            _ => None,
        };
        VerdictKind::Family {
            dimension,
            free_parameters: if dimension == 1 {
                vec!["A"]
            } else {
                Vec::new()
            },
            solution,
        }
    } else if equations == unknowns {
        if opts.amplitude.is_some() {
            warnings.push(
                "A is fixed by the conditions at this order; the supplied value was ignored".into(),
            );
        }
        let mm = if family.is_elliptic() { need_m()? } else { 0.0 };
        let (solutions, rejected) = ctx.solve_at(mm, None)?;
        VerdictKind::Discrete {
            solutions,
            rejected,
        }
    } else {
        overdetermined(&ctx, m, opts, &mut warnings)?
    };
    Ok(ConsistencyVerdict {
        family,
        order: system.order,
        conditions: system.len(),
        equations,
        unknowns,
        kind,
        warnings,
    })
}

fn exact_certificate(ctx: &Context<'_>) -> Option<ExactCertificate> {
    let reduced: Vec<_> = ctx
        .conds
        .iter()
        .map(|c| c.reduce_exact())
        .collect::<Option<_>>()?;
    let ex = eliminate_exact(&reduced)?;
    let common_roots: Vec<[f64; 3]> = ex
        .common_roots
        .iter()
        .map(|&w| {
            let a = ex.amplitude_at(&reduced, w);
            [w, a, w * a]
        })
        .collect();
    let admissible_roots = common_roots
        .iter()
        .filter(|r| {
            let p = ScaledPoint {
                a: r[1],
                b: r[2],
                v: 1.0,
                d: 0.0,
                m: 0.0,
            };
            ctx.inadmissible(&p).is_none()
        })
        .count();
    Some(ExactCertificate {
        shape_polynomial: ex.shape_polynomial.integer_coefficients(),
        remainder_degrees: ex.remainders.iter().map(|r| r.degree()).collect(),
        common_factor_degree: ex.common_factor.degree().unwrap_or(0),
        common_roots,
        admissible_roots,
    })
}

/// `m` values at which numeric elimination is attempted for elliptic families.
const ELIMINATION_M_SAMPLES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn overdetermined(
    ctx: &Context<'_>,
    m: Option<f64>,
    opts: &AnalysisOptions,
    warnings: &mut Vec<String>,
) -> Result<VerdictKind> {
    let family = ctx.system.family;
    let exact = exact_certificate(ctx);

    let ms: Vec<f64> = if family.is_elliptic() {
        match m {
            Some(m) => vec![m],
            None => ELIMINATION_M_SAMPLES.to_vec(),
        }
    } else {
        vec![0.0]
    };
    let mut elimination = Vec::new();
    let mut found = Vec::new();
    for &mm in &ms {
        match ctx.solve_at(mm, None) {
            Ok((sols, rejected)) => {
                found.extend(sols);
                elimination.extend(rejected);
            }
            Err(KdvError::NonConvergence(msg)) => warnings.push(msg),
            Err(e) => return Err(e),
        }
    }

    let region = ScanRegion::physical(if family.is_elliptic() {
        Some(match m {
            Some(m) => (m, m),
            None => opts.m_range,
        })
    } else {
        None
    });
    // A pinned m is not a scan coordinate.
    let (region, fixed_m) = match region.m {
        Some((lo, hi)) if lo == hi => (ScanRegion { m: None, ..region }, lo),
        _ => (region, 0.0),
    };
    let dim = 3 + usize::from(region.m.is_some());
    let scan_opts = opts.scan.unwrap_or_else(|| ScanOptions::for_dimension(dim));
    let objective = Objective {
        conditions: &ctx.conds,
        volume: ctx.system.volume_constraint,
        fixed_m,
    };
    let scan_result = scan(&objective, region, scan_opts)?;

    if !found.is_empty() {
        warnings.push("more equations than unknowns, yet elimination found solutions".into());
        return Ok(VerdictKind::Discrete {
            solutions: found,
            rejected: elimination,
        });
    }
    let profile_range = if family.is_elliptic() && m.is_none() {
        Some(opts.m_range)
    } else {
        None
    };
    let profiles = remainder_profiles(ctx, profile_range, m.unwrap_or(0.0))?;
    for p in profiles.iter().filter(|p| p.sign_changes > 0) {
        warnings.push(format!(
            "the elimination remainder on branch z = {:.6} changes sign; isolated solutions may exist at special m",
            p.z
        ));
    }
    if scan_result.min_ssq <= INCONSISTENCY_THRESHOLD {
        warnings.push(format!(
            "scan minimum {:.3e} is below the inconsistency threshold",
            scan_result.min_ssq
        ));
    }
    Ok(VerdictKind::Inconsistent {
        certificate: Box::new(Certificate {
            exact,
            elimination,
            remainder_profiles: profiles,
            scan: scan_result,
            threshold: INCONSISTENCY_THRESHOLD,
        }),
    })
}

/// Sample points for remainder profiles: uniform in the range plus a
/// geometric approach to its upper end.
fn profile_samples(lo: f64, hi: f64) -> Vec<f64> {
    const UNIFORM: usize = 2000;
    let mut ms: Vec<f64> = (0..=UNIFORM)
        .map(|i| lo + (hi - lo) * i as f64 / UNIFORM as f64)
        .collect();
    ms.extend(
        (1..=60)
            .map(|k| 1.0 - (1.0 - hi) * 0.5f64.powi(k))
            .filter(|&m| m <= 1.0 - M_CLAMP),
    );
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    ms
}

fn remainder_profiles(
    ctx: &Context<'_>,
    range: Option<(f64, f64)>,
    fixed_m: f64,
) -> Result<Vec<RemainderProfile>> {
    let ms = match range {
        Some((lo, hi)) => profile_samples(lo, hi),
        None => vec![fixed_m],
    };
    let mut profiles: Vec<RemainderProfile> = Vec::new();
    let mut last_signs: Vec<Option<Vec<i8>>> = Vec::new();
    for &m in &ms {
        let reduced = ctx.reduced(m)?;
        let Elimination::Candidates(cands) = eliminate(&reduced, None) else {
            continue;
        };
        let mut ws: Vec<f64> = cands.iter().map(|c| c.w).collect();
        ws.sort_by(f64::total_cmp);
        ws.dedup();
        for (i, &w) in ws.iter().enumerate() {
            let Some(rem) = elimination::cleared_remainders(&reduced, w) else {
                continue;
            };
            let worst = rem
                .iter()
                .map(|&(v, mag)| if mag > 0.0 { (v / mag).abs() } else { 0.0 })
                .fold(0.0, f64::max);
            // Remainders at rounding level vanish identically (dependent conditions).
            let signs: Vec<i8> = rem
                .iter()
                .map(|&(v, mag)| {
                    if v.abs() <= 1e-10 * mag {
                        0
                    } else if v > 0.0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect();
            if profiles.len() <= i {
                profiles.push(RemainderProfile {
                    z: ctx.z_of(w, m),
                    m_range: range,
                    samples: 0,
                    min_normalized_remainder: f64::INFINITY,
                    m_at_min: None,
                    sign_changes: 0,
                });
                last_signs.push(None);
            }
            let p = &mut profiles[i];
            p.samples += 1;
            if worst < p.min_normalized_remainder {
                p.min_normalized_remainder = worst;
                p.m_at_min = range.map(|_| m);
            }
            if let Some(prev) = &last_signs[i] {
                p.sign_changes += prev.iter().zip(&signs).filter(|&(a, b)| a * b < 0).count();
            }
            last_signs[i] = Some(signs);
        }
    }
    Ok(profiles)
}

/// `A sech²(B(x - vt))`.
pub fn solve_soliton(
    order: u32,
    alpha: f64,
    beta: f64,
    amplitude: Option<f64>,
) -> Result<ConsistencyVerdict> {
    check_small_parameters(alpha, beta)?;
    let sys = cached_system(AnsatzFamily::Soliton, order)?;
    if order == 1 && amplitude.is_none() {
        return Err(KdvError::usage(
            "order 1 has a one-parameter family of solitons; supply the amplitude A",
        ));
    }
    consistency_analysis(
        &sys,
        alpha,
        beta,
        &AnalysisOptions {
            amplitude,
            ..Default::default()
        },
    )
}

fn solve_elliptic(
    family: AnsatzFamily,
    order: u32,
    alpha: f64,
    beta: f64,
    m: f64,
    amplitude: Option<f64>,
) -> Result<ConsistencyVerdict> {
    check_small_parameters(alpha, beta)?;
    clamp_m(m, &mut Vec::new())?;
    let sys = cached_system(family, order)?;
    if order == 1 && amplitude.is_none() {
        return Err(KdvError::usage(format!(
            "order 1 has a one-parameter family of {family} waves; supply the amplitude A"
        )));
    }
    // The overdetermined case scans m itself; pinning it would only narrow the bound.
    let pinned = sys.rank < sys.unknowns.len();
    consistency_analysis(
        &sys,
        alpha,
        beta,
        &AnalysisOptions {
            m: pinned.then_some(m),
            amplitude,
            ..Default::default()
        },
    )
}

/// `A cn²(B(x - vt)|m) + D`.
pub fn solve_cnoidal(
    order: u32,
    alpha: f64,
    beta: f64,
    m: f64,
    amplitude: Option<f64>,
) -> Result<ConsistencyVerdict> {
    solve_elliptic(AnsatzFamily::Cnoidal, order, alpha, beta, m, amplitude)
}

/// `(A/2)[dn² ± √m cn dn] + D`; `sign` is `+1` or `-1`.
pub fn solve_superposition(
    order: u32,
    sign: i32,
    alpha: f64,
    beta: f64,
    m: f64,
    amplitude: Option<f64>,
) -> Result<ConsistencyVerdict> {
    let family = match sign {
        1 => AnsatzFamily::SuperpositionPlus,
        -1 => AnsatzFamily::SuperpositionMinus,
        _ => {
            return Err(KdvError::usage(format!(
                "sign must be +1 or -1, got {sign}"
            )))
        }
    };
    solve_elliptic(family, order, alpha, beta, m, amplitude)
}

/// Normalized sum of squares at a physical point, as used by the scan.
pub fn normalized_ssq(system: &ConditionSystem, sol: &SolutionParams) -> Result<f64> {
    let conds: Vec<ScaledPoly> = system
        .polynomials()
        .map(ScaledPoly::from_condition)
        .collect::<Result<_>>()?;
    let p = sol.scaled();
    Ok(conds.iter().map(|c| c.normalized(&p).powi(2)).sum())
}
