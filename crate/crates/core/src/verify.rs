//! Sampling traveling waves on periodic grids, pointwise residuals and
//! period means.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::ansatz::{ansatz_derivatives, AnsatzFamily};
use crate::catalog::{get_equation, Derivative, EquationSpec};
use crate::error::{KdvError, Result};
use crate::solver::SolutionParams;
use crate::special::{complete_k, jacobi_cn_sn_dn, sech, EllipticParam};
use crate::symbolic::{basis_functions, rational_to_f64, BasisMonomial};

/// Uniform periodic grid `x_i = x0 + i·L/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n: usize,
    pub x0: f64,
    pub length: f64,
}

impl GridSpec {
    pub fn new(n: usize, x0: f64, length: f64) -> Result<Self> {
        check_grid_size(n)?;
        if !(length.is_finite() && length > 0.0 && x0.is_finite()) {
            return Err(KdvError::domain(format!(
                "grid needs a finite positive length and finite origin, got L = {length}, x0 = {x0}"
            )));
        }
        Ok(GridSpec { n, x0, length })
    }

    /// `32/B` centered on the crest for solitons; two spatial periods for
    /// the elliptic families.
    pub fn default_for(params: &SolutionParams, n: usize) -> Result<Self> {
        let b = params.inverse_width;
        match params.family {
            AnsatzFamily::Soliton => GridSpec::new(n, -16.0 / b, 32.0 / b),
            _ => {
                let period = spatial_period(params)?;
                GridSpec::new(n, 0.0, 2.0 * period)
            }
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx()
    }
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < 16 || !n.is_power_of_two() {
        return Err(KdvError::usage(format!(
            "grid size must be a power of two and at least 16, got {n}"
        )));
    }
    Ok(())
}

/// Samples of `η` on a periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveField {
    samples: Vec<f64>,
    x0: f64,
    dx: f64,
}

impl WaveField {
    pub fn new(samples: Vec<f64>, x0: f64, dx: f64) -> Result<Self> {
        check_grid_size(samples.len())?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(KdvError::domain(format!("sample {i} is not finite")));
        }
        if !(dx.is_finite() && dx > 0.0 && x0.is_finite()) {
            return Err(KdvError::domain(format!("invalid spacing dx = {dx}")));
        }
        Ok(WaveField { samples, x0, dx })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        WaveField {
            samples: vec![0.0; grid.n],
            x0: grid.x0,
            dx: grid.dx(),
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.dx * self.samples.len() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            n: self.len(),
            x0: self.x0,
            length: self.length(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// `sqrt(Σ η² dx)`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|s| s * s).sum::<f64>() * self.dx).sqrt()
    }

    /// Largest pointwise difference; the grids must agree.
    pub fn linf_distance(&self, other: &WaveField) -> Result<f64> {
        if self.len() != other.len() {
            return Err(KdvError::usage("fields live on different grids"));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// CSV with header `x,eta`, full precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,eta")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(
                w,
                "{},{}",
                crate::output::format_f64(self.x(i)),
                crate::output::format_f64(*s)
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn require_m(params: &SolutionParams) -> Result<f64> {
    match (params.family.is_elliptic(), params.m) {
        (true, Some(m)) => Ok(m),
        (true, None) => Err(KdvError::usage(format!(
            "the {} family needs the elliptic parameter m",
            params.family
        ))),
        (false, _) => Ok(0.0),
    }
}

fn require_physical(params: &SolutionParams) -> Result<()> {
    let b = params.inverse_width;
    if !(b.is_finite() && b > 0.0) {
        return Err(KdvError::domain(format!(
            "B must be positive (B² > 0), got {b}"
        )));
    }
    for (name, x) in [
        ("A", params.amplitude),
        ("v", params.v),
        ("D", params.offset),
    ] {
        if !x.is_finite() {
            return Err(KdvError::domain(format!("{name} is not finite")));
        }
    }
    Ok(())
}

/// Spatial period of an elliptic wave: `2K/B` for `cn²`, `4K/B` for the
/// superposition (its `cn·dn` part has period `4K`).
pub fn spatial_period(params: &SolutionParams) -> Result<f64> {
    let m = require_m(params)?;
    if params.family == AnsatzFamily::Soliton {
        return Err(KdvError::usage("a soliton is not periodic"));
    }
    let k = complete_k(EllipticParam::new(m)?)?;
    let quarters = if params.family == AnsatzFamily::Cnoidal {
        2.0
    } else {
        4.0
    };
    Ok(quarters * k / params.inverse_width)
}

/// `η` at phase `u = B(x - vt)`, straight from the special functions.
fn profile(params: &SolutionParams, m: f64, u: f64) -> Result<f64> {
    let a = params.amplitude;
    Ok(match params.family {
        AnsatzFamily::Soliton => a * sech(u).powi(2),
        AnsatzFamily::Cnoidal => {
            let t = jacobi_cn_sn_dn(u, EllipticParam::new(m)?)?;
            a * t.cn * t.cn + params.offset
        }
        f => {
            let t = jacobi_cn_sn_dn(u, EllipticParam::new(m)?)?;
            let s = f.superposition_sign() as f64 * m.sqrt();
            0.5 * a * (t.dn * t.dn + s * t.cn * t.dn) + params.offset
        }
    })
}

/// Samples the traveling wave at time `t`.
pub fn eval_field(params: &SolutionParams, grid: &GridSpec, t: f64) -> Result<WaveField> {
    require_physical(params)?;
    let m = require_m(params)?;
    check_grid_size(grid.n)?;
    let samples = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let mut d = grid.x(i) - params.v * t;
            if params.family == AnsatzFamily::Soliton {
                // periodic image on the grid
                d -= (d / grid.length).round() * grid.length;
            }
            profile(params, m, params.inverse_width * d)
        })
        .collect::<Result<Vec<f64>>>()?;
    WaveField::new(samples, grid.x0, grid.dx())
}

/// Pointwise residual summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Largest `|Σ terms| / max |term|` over the grid.
    pub max_normalized: f64,
    pub x_at_max: f64,
    pub points: usize,
}

/// Ansatz derivatives with numeric coefficients, ready for repeated evaluation.
struct NumericDerivatives {
    family: crate::symbolic::Family,
    derivs: Vec<Vec<(BasisMonomial, f64)>>,
}

impl NumericDerivatives {
    fn new(params: &SolutionParams, order: usize) -> Self {
        let values = params.symbol_values();
        let derivs = ansatz_derivatives(params.family, order)
            .iter()
            .map(|d| {
                d.collect()
                    .into_iter()
                    .map(|(mono, c)| (mono, c.eval(&values)))
                    .collect()
            })
            .collect();
        NumericDerivatives {
            family: params.family.basis_family(),
            derivs,
        }
    }

    fn at(&self, u: f64, m: f64) -> Vec<f64> {
        let f = basis_functions(self.family, u, m);
        self.derivs
            .iter()
            .map(|d| d.iter().map(|(mono, c)| c * mono.eval_from(f)).sum())
            .collect()
    }
}

/// Residual of the equation of the given order on the ansatz.
pub fn residual(params: &SolutionParams, order: u32, grid: &GridSpec) -> Result<ResidualReport> {
    residual_for(params, &get_equation(order)?, grid)
}

/// [`residual`] for an arbitrary term table.
pub fn residual_for(
    params: &SolutionParams,
    eq: &EquationSpec,
    grid: &GridSpec,
) -> Result<ResidualReport> {
    require_physical(params)?;
    let m = require_m(params)?;
    check_grid_size(grid.n)?;
    let nd = NumericDerivatives::new(params, eq.max_derivative().max(1) as usize);
    let terms: Vec<(f64, &[Derivative])> = eq
        .terms
        .iter()
        .map(|t| {
            let c = rational_to_f64(&t.coefficient)
                * params.alpha.powi(t.alpha_power as i32)
                * params.beta.powi(t.beta_power as i32);
            (c, t.factors.as_slice())
        })
        .collect();
    let per_point: Vec<(f64, f64)> = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let d = nd.at(params.inverse_width * x, m);
            let mut sum = 0.0;
            let mut largest = 0.0f64;
            for (c, factors) in &terms {
                let v = factors.iter().fold(*c, |acc, f| {
                    acc * match f {
                        Derivative::Time => -params.v * d[1],
                        Derivative::Space(k) => d[*k as usize],
                    }
                });
                sum += v;
                largest = largest.max(v.abs());
            }
            let r = if largest > 0.0 {
                sum.abs() / largest
            } else {
                0.0
            };
            (r, x)
        })
        .collect();
    let (max_normalized, x_at_max) =
        per_point
            .into_iter()
            .fold((0.0, grid.x0), |acc, p| if p.0 > acc.0 { p } else { acc });
    Ok(ResidualReport {
        max_normalized,
        x_at_max,
        points: grid.n,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Nodes per quarter period in [`volume_mean`].
pub const NODES_PER_QUARTER: usize = 64;

/// Period mean of `η` by composite Gauss-Legendre quadrature over `[0, 4K]`.
pub fn volume_mean(params: &SolutionParams) -> Result<f64> {
    if params.family == AnsatzFamily::Soliton {
        return Err(KdvError::usage(
            "volume mean is defined per period; the soliton lives on the whole line",
        ));
    }
    let m = require_m(params)?;
    let k = complete_k(EllipticParam::new(m)?)?;
    let rule = gauss_legendre(NODES_PER_QUARTER);
    let mut total = 0.0;
    for q in 0..4 {
        let (lo, hi) = (q as f64 * k, (q + 1) as f64 * k);
        for &(x, w) in &rule {
            let u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo);
            total += w * 0.5 * (hi - lo) * profile(params, m, u)?;
        }
    }
    Ok(total / (4.0 * k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        // exact through degree 15
        let i: f64 = rule.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(12, 0.0, 1.0).is_err());
        assert!(GridSpec::new(8, 0.0, 1.0).is_err());
        assert!(GridSpec::new(16, 0.0, -1.0).is_err());
        assert!(WaveField::new(vec![f64::NAN; 16], 0.0, 0.1).is_err());
        assert!(WaveField::new(vec![0.0; 16], 0.0, 0.1).is_ok());
    }
}
