//! Global scan of the normalized sum of squared conditions.
//!
//! Each condition is divided by the sum of the absolute values of its
//! evaluated terms, so every summand lies in `[0, 1]` and the bound does not
//! depend on the overall scale of the unknowns. The scan evaluates cell
//! centers of a uniform grid, then runs a box-constrained Nelder-Mead search
//! from the best cells. Grid evaluation is parallel; the reduction is ordered
//! by `(value, cell index)`, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::Serialize;

use super::scaled::{ScaledPoint, ScaledPoly};
use crate::ansatz::VolumeConstraint;
use crate::error::{KdvError, Result};

/// Box in scaled variables. `m` is scanned only for elliptic families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRegion {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub v: (f64, f64),
    pub m: Option<(f64, f64)>,
}

impl ScanRegion {
    /// `αA ∈ (0, 5]`, `βB² ∈ (0, 5]`, `v ∈ [0.5, 2]`, and `m` as given.
    pub fn physical(m: Option<(f64, f64)>) -> Self {
        ScanRegion {
            a: (0.0, 5.0),
            b: (0.0, 5.0),
            v: (0.5, 2.0),
            m,
        }
    }

    fn axes(&self) -> Vec<(f64, f64)> {
        let mut ax = vec![self.a, self.b, self.v];
        if let Some(m) = self.m {
            ax.push(m);
        }
        ax
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub points_per_axis: usize,
    pub starts: usize,
    pub max_iterations: usize,
}

impl ScanOptions {
    pub fn for_dimension(dim: usize) -> Self {
        ScanOptions {
            points_per_axis: if dim <= 3 { 40 } else { 16 },
            starts: 24,
            max_iterations: 4000,
        }
    }

    pub fn doubled(self) -> Self {
        ScanOptions {
            points_per_axis: self.points_per_axis * 2,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub region: ScanRegion,
    pub options: ScanOptions,
    pub grid_points: usize,
    pub grid_min_ssq: f64,
    pub min_ssq: f64,
    /// `[a, b, v]` or `[a, b, v, m]` at the minimum.
    pub argmin: Vec<f64>,
    pub optimizer: &'static str,
}

/// Objective on scaled coordinates.
pub struct Objective<'a> {
    pub conditions: &'a [ScaledPoly],
    pub volume: Option<VolumeConstraint>,
    /// `m` when it is not a scanned coordinate.
    pub fixed_m: f64,
}

impl Objective<'_> {
    fn point(&self, x: &[f64]) -> Result<ScaledPoint> {
        let m = if x.len() > 3 { x[3] } else { self.fixed_m };
        let d = match self.volume {
            Some(vc) => vc.offset_ratio(m)? * x[0],
            None => 0.0,
        };
        Ok(ScaledPoint {
            a: x[0],
            b: x[1],
            v: x[2],
            d,
            m,
        })
    }

    pub fn ssq(&self, x: &[f64]) -> f64 {
        match self.point(x) {
            Ok(p) => self
                .conditions
                .iter()
                .map(|c| c.normalized(&p).powi(2))
                .sum(),
            Err(_) => f64::INFINITY,
        }
    }
}

fn clamp_to(x: &mut [f64], axes: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(axes) {
        // open lower ends of the physical box stay a hair inside
        let lo = lo + 1e-9 * (hi - lo);
        *xi = xi.clamp(lo, hi);
    }
}

fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    axes: &[(f64, f64)],
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        let h = 0.05 * (axes[i].1 - axes[i].0);
        p[i] += if p[i] + h <= axes[i].1 { h } else { -h };
        clamp_to(&mut p, axes);
        simplex.push(p);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = vals[n] - vals[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= 1e-16 * (1.0 + vals[0].abs()) && size < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| {
            let mut p: Vec<f64> = (0..n)
                .map(|k| centroid[k] + t * (simplex[n][k] - centroid[k]))
                .collect();
            clamp_to(&mut p, axes);
            p
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&xc);
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for k in 0..n {
                        simplex[i][k] = best[k] + 0.5 * (simplex[i][k] - best[k]);
                    }
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .unwrap();
    (simplex[best].clone(), vals[best])
}

/// Grid scan plus local refinement.
pub fn scan(obj: &Objective<'_>, region: ScanRegion, opts: ScanOptions) -> Result<ScanResult> {
    if opts.points_per_axis < 2 || opts.starts == 0 {
        return Err(KdvError::usage(
            "scan needs at least 2 points per axis and 1 start",
        ));
    }
    let axes = region.axes();
    let dim = axes.len();
    let n = opts.points_per_axis;
    let total = n.pow(dim as u32);
    let coord = |mut idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; dim];
        for (k, &(lo, hi)) in axes.iter().enumerate() {
            let i = idx % n;
            idx /= n;
            x[k] = lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
        }
        x
    };
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| obj.ssq(&coord(i)))
        .collect();
    let mut best: Vec<usize> = (0..total).collect();
    let k = opts.starts.min(total);
    best.select_nth_unstable_by(k - 1, |&i, &j| {
        values[i].total_cmp(&values[j]).then(i.cmp(&j))
    });
    best.truncate(k);
    best.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let grid_min = values[best[0]];

    let f = |x: &[f64]| obj.ssq(x);
    let refined: Vec<(Vec<f64>, f64)> = best
        .par_iter()
        .map(|&i| {
            // one restart from the first result guards against a collapsed simplex
            let (x, _) = nelder_mead(&f, &coord(i), &axes, opts.max_iterations);
            nelder_mead(&f, &x, &axes, opts.max_iterations)
        })
        .collect();
    let (argmin, min) = refined
        .into_iter()
        .fold((coord(best[0]), grid_min), |acc, r| {
            if r.1 < acc.1 {
                r
            } else {
                acc
            }
        });
    Ok(ScanResult {
        region,
        options: opts,
        grid_points: total,
        grid_min_ssq: grid_min,
        min_ssq: min,
        argmin,
        optimizer: "nelder-mead",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] - 0.7).powi(2);
        let (x, v) = nelder_mead(&f, &[0.9, 0.1], &[(0.0, 1.0), (0.0, 1.0)], 2000);
        assert!(v < 1e-16);
        assert!((x[0] - 0.3).abs() < 1e-7 && (x[1] - 0.7).abs() < 1e-7);
    }

    #[test]
    fn nelder_mead_respects_box() {
        let f = |x: &[f64]| (x[0] + 1.0).powi(2);
        let (x, _) = nelder_mead(&f, &[0.5], &[(0.0, 1.0)], 2000);
        assert!(x[0] >= 0.0 && x[0] < 1e-6);
    }
}
