//! Damped Gauss-Newton (Levenberg-Marquardt) polish in scaled variables.

use super::scaled::{ScaledPoint, ScaledPoly};
use crate::error::{KdvError, Result};

pub const TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100;

/// Unknowns for the polish. `d` is always tied to `a` by `d = δ·a`.
#[derive(Debug, Clone, Copy)]
pub struct Polish {
    pub m: f64,
    pub delta: f64,
    /// Hold `a` fixed (one-parameter families).
    pub fix_a: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Polished {
    pub point: ScaledPoint,
    pub max_residual: f64,
    pub iterations: usize,
}

fn point(x: &[f64; 3], p: &Polish) -> ScaledPoint {
    ScaledPoint {
        a: x[0],
        b: x[1],
        v: x[2],
        d: p.delta * x[0],
        m: p.m,
    }
}

/// Largest condition value divided by the sum of its absolute term values.
pub fn max_normalized(conds: &[ScaledPoly], x: &ScaledPoint) -> f64 {
    conds
        .iter()
        .map(|c| c.normalized(x).abs())
        .fold(0.0, f64::max)
}

/// Solves `J^T J + λ diag(J^T J)` systems of size ≤ 3 by Gaussian elimination.
#[allow(clippy::needless_range_loop)]
fn solve_small(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Some(x)
}

/// Polishes `(a, b, v)` so that every condition vanishes to [`TOLERANCE`]
/// relative to its term magnitudes.
pub fn polish(conds: &[ScaledPoly], start: ScaledPoint, p: Polish) -> Result<Polished> {
    let mut x = [start.a, start.b, start.v];
    let free: Vec<usize> = if p.fix_a { vec![1, 2] } else { vec![0, 1, 2] };
    // Frozen weights keep the residual map smooth.
    let weights: Vec<f64> = conds
        .iter()
        .map(|c| {
            let mag = c.eval(&start).1;
            if mag > 0.0 {
                1.0 / mag
            } else {
                1.0
            }
        })
        .collect();
    let residuals = |x: &[f64; 3]| -> Vec<f64> {
        let pt = point(x, &p);
        conds
            .iter()
            .zip(&weights)
            .map(|(c, w)| c.eval(&pt).0 * w)
            .collect()
    };
    let norm2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut r = residuals(&x);
    let mut lambda = 1e-6;
    for it in 0..=MAX_ITERATIONS {
        let pt = point(&x, &p);
        let current = max_normalized(conds, &pt);
        if current <= TOLERANCE {
            return Ok(Polished {
                point: pt,
                max_residual: current,
                iterations: it,
            });
        }
        if it == MAX_ITERATIONS {
            break;
        }
        let jac: Vec<Vec<f64>> = conds
            .iter()
            .zip(&weights)
            .map(|(c, w)| {
                let g = c.gradient(&pt);
                let full = [g[0] + p.delta * g[3], g[1], g[2]];
                free.iter().map(|&k| full[k] * w).collect()
            })
            .collect();
        let n = free.len();
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (row, ri) in jac.iter().zip(&r) {
            for i in 0..n {
                jtr[i] -= row[i] * ri;
                for j in 0..n {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj.clone();
            for (i, rowd) in damped.iter_mut().enumerate() {
                rowd[i] += lambda * (jtj[i][i] + 1e-30);
            }
            let Some(step) = solve_small(damped, jtr.clone()) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = x;
            for (k, s) in free.iter().zip(&step) {
                trial[*k] += s;
            }
            let rt = residuals(&trial);
            if norm2(&rt) < norm2(&r) {
                x = trial;
                r = rt;
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            let pt = point(&x, &p);
            let current = max_normalized(conds, &pt);
            if current <= TOLERANCE {
                return Ok(Polished {
                    point: pt,
                    max_residual: current,
                    iterations: it,
                });
            }
            return Err(KdvError::NonConvergence(format!(
                "Newton polish stalled at normalized residual {current:.3e}"
            )));
        }
    }
    let pt = point(&x, &p);
    Err(KdvError::NonConvergence(format!(
        "Newton polish did not reach {TOLERANCE:e} in {MAX_ITERATIONS} iterations \
         (normalized residual {:.3e})",
        max_normalized(conds, &pt)
    )))
}
