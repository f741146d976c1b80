//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything here is built on the arithmetic-geometric mean:
//!
//! * `K(m) = π / (2 · agm(1, √(1-m)))`
//! * `E(m) = K(m) · (1 - Σ 2^(n-1) c_n²)` with `c_0 = √m`, `c_(n+1) = (a_n - b_n)/2`
//! * `sn, cn, dn` from the descending AGM sequence: start at
//!   `φ_N = 2^N a_N u` and walk back with
//!   `φ_(n-1) = (φ_n + asin(c_n/a_n · sin φ_n)) / 2`.
//!
//! The parameter convention is `m = k²` throughout.

use std::f64::consts::FRAC_PI_2;

use crate::error::{KdvError, Result};

/// Stop the AGM once the modulus update falls below this.
const AGM_TOL: f64 = 1e-15;

/// Below this value of `1 - m` (and for moderate `|u|`) the Jacobi functions
/// come from the first-order expansion around the hyperbolic limit.
const HYPERBOLIC_SWITCH: f64 = 1e-12;

/// Largest `|u|` for which the first-order hyperbolic expansion is used.
const HYPERBOLIC_SERIES_MAX_U: f64 = 5.0;

/// Elliptic parameter `m ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticParam(f64);

impl EllipticParam {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || !(0.0..=1.0).contains(&m) {
            return Err(KdvError::domain(format!(
                "elliptic parameter m must lie in [0, 1], got {m}"
            )));
        }
        Ok(EllipticParam(m))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary parameter `1 - m`.
    #[inline]
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for EllipticParam {
    type Error = KdvError;

    fn try_from(m: f64) -> Result<Self> {
        EllipticParam::new(m)
    }
}

struct AgmSequence {
    a: Vec<f64>,
    c: Vec<f64>,
}

/// Runs the AGM of `(1, √(1-m))` keeping the `a_n` and `c_n` sequences.
fn agm_sequence(m: f64) -> AgmSequence {
    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    // 40 halvings is far beyond what quadratic convergence ever needs for m < 1.
    for _ in 0..40 {
        let n = a.len() - 1;
        if c[n].abs() <= AGM_TOL {
            break;
        }
        let an = a[n];
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }
    AgmSequence { a, c }
}

/// Complete elliptic integral of the first kind, `K(m)`, for `0 ≤ m < 1`.
pub fn complete_k(m: EllipticParam) -> Result<f64> {
    let m = m.value();
    if m >= 1.0 {
        return Err(KdvError::domain("K(m) diverges at m = 1"));
    }
    let seq = agm_sequence(m);
    Ok(FRAC_PI_2 / seq.a[seq.a.len() - 1])
}

/// Complete elliptic integral of the second kind, `E(m)`, for `0 ≤ m ≤ 1`.
pub fn complete_e(m: EllipticParam) -> Result<f64> {
    let m = m.value();
    if m == 1.0 {
        return Ok(1.0);
    }
    let seq = agm_sequence(m);
    let mut sum = 0.5 * seq.c[0] * seq.c[0];
    let mut weight = 1.0;
    for cn in &seq.c[1..] {
        sum += weight * cn * cn;
        weight *= 2.0;
    }
    let k = FRAC_PI_2 / seq.a[seq.a.len() - 1];
    Ok(k * (1.0 - sum))
}

/// `E(m)/K(m)`, the period mean of `dn²`. Tends to zero (logarithmically) as `m → 1`.
pub fn e_over_k(m: EllipticParam) -> Result<f64> {
    if m.value() == 1.0 {
        return Ok(0.0);
    }
    Ok(complete_e(m)? / complete_k(m)?)
}

/// Simultaneous Jacobi elliptic functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub cn: f64,
    pub sn: f64,
    pub dn: f64,
}

/// Computes `cn(u|m)`, `sn(u|m)` and `dn(u|m)` in a single AGM descent.
pub fn jacobi_cn_sn_dn(u: f64, m: EllipticParam) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(KdvError::domain(format!(
            "Jacobi functions need a finite argument, got {u}"
        )));
    }
    let m1 = m.complement();
    let m = m.value();

    if m1 == 0.0 {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple {
            cn: sech,
            sn: u.tanh(),
            dn: sech,
        });
    }
    if m1 < HYPERBOLIC_SWITCH && u.abs() <= HYPERBOLIC_SERIES_MAX_U {
        return Ok(near_hyperbolic(u, m1));
    }
    if m == 0.0 {
        let (sn, cn) = u.sin_cos();
        return Ok(JacobiTriple { cn, sn, dn: 1.0 });
    }

    let seq = agm_sequence(m);
    let n = seq.a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * seq.a[n] * u;
    for k in (1..=n).rev() {
        let ratio = seq.c[k] / seq.a[k] * phi.sin();
        phi = 0.5 * (phi + ratio.clamp(-1.0, 1.0).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = 1 - m sn² = cn² + (1-m) sn², written without cancellation near m = 1.
    let dn = (cn * cn + m1 * sn * sn).sqrt();
    Ok(JacobiTriple { cn, sn, dn })
}

/// First-order expansion in `m1 = 1 - m` around `m = 1`.
fn near_hyperbolic(u: f64, m1: f64) -> JacobiTriple {
    let sech = 1.0 / u.cosh();
    let tanh = u.tanh();
    let sc = u.sinh() * u.cosh();
    let q = 0.25 * m1;
    JacobiTriple {
        sn: tanh + q * (sc - u) * sech * sech,
        cn: sech - q * (sc - u) * tanh * sech,
        dn: sech + q * (sc + u) * tanh * sech,
    }
}

/// Hyperbolic secant.
#[inline]
pub fn sech(x: f64) -> f64 {
    // 1/cosh overflows gracefully to 0 for large |x|.
    1.0 / x.cosh()
}
