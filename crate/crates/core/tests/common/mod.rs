//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use kdvlab::symbolic::{rat, ConditionPolynomial, Exponents, Symbol, NVARS};

/// `(num, den, [(symbol, exponent)])`.
pub type Term<'a> = (i64, i64, &'a [(Symbol, u16)]);

/// `Σ (num/den) ∏ symbol^exp`.
pub fn poly(terms: &[Term]) -> ConditionPolynomial {
    terms
        .iter()
        .fold(ConditionPolynomial::zero(), |acc, (n, d, mono)| {
            let mut e = Exponents([0; NVARS]);
            for &(s, k) in mono.iter() {
                e.set(s, k);
            }
            acc.add(&ConditionPolynomial::term(rat(*n, *d), e))
        })
}

/// Trapezoid rule on the periodic integrand over `[0, π]`; converges
/// geometrically for `m < 1`.
pub fn quad_k(m: f64) -> f64 {
    let n = 20_000;
    let h = PI / n as f64;
    let s: f64 = (0..n)
        .map(|i| 1.0 / (1.0 - m * (i as f64 * h).sin().powi(2)).sqrt())
        .sum();
    0.5 * s * h
}

pub fn quad_e(m: f64) -> f64 {
    let n = 20_000;
    let h = PI / n as f64;
    let s: f64 = (0..n)
        .map(|i| (1.0 - m * (i as f64 * h).sin().powi(2)).sqrt())
        .sum();
    0.5 * s * h
}

/// `K` and `E` from the arithmetic-geometric mean with the `Σ 2^(n-1) c_n²` sum.
pub fn agm_k_e(m: f64) -> (f64, f64) {
    let (mut a, mut g) = (1.0f64, (1.0 - m).sqrt());
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    // a and g can end one ulp apart; once c is this small the next term is below roundoff
    for _ in 0..64 {
        if c.abs() <= 1e-14 * a {
            break;
        }
        let an = 0.5 * (a + g);
        c = 0.5 * (a - g);
        g = (a * g).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// `(sn, cn, dn)` by descending Landen transformation down to a tiny
/// parameter, then the small-`m` expansion.
pub fn landen_jacobi(u: f64, m: f64) -> (f64, f64, f64) {
    if m < 1e-9 {
        let (s, c) = u.sin_cos();
        let t = 0.25 * m * (u - s * c);
        return (s - t * c, c + t * s, 1.0 - 0.5 * m * s * s);
    }
    let k1 = (1.0 - m).sqrt();
    let mu = ((1.0 - k1) / (1.0 + k1)).powi(2);
    let rmu = mu.sqrt();
    let v = u / (1.0 + rmu);
    let (s, c, d) = landen_jacobi(v, mu);
    let den = 1.0 + rmu * s * s;
    (
        (1.0 + rmu) * s / den,
        c * d / den,
        (1.0 - rmu * s * s) / den,
    )
}
