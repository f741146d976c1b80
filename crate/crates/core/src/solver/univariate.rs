//! Univariate polynomials, exact over `Q` and in double precision.

use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::symbolic::rational_to_f64;

/// Exact polynomial, coefficients lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn lead(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Self::new(out)
    }

    pub fn neg(&self) -> Self {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(BigRational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Euclidean division over `Q`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d_deg = divisor.degree().expect("division by zero polynomial");
        let d_lead = divisor.lead().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = vec![BigRational::zero(); self.0.len().saturating_sub(d_deg).max(1)];
        while let Some(r_deg) = rem.degree() {
            if r_deg < d_deg {
                break;
            }
            let k = rem.lead().unwrap() / &d_lead;
            let shift = r_deg - d_deg;
            quot[shift] = k.clone();
            let mut sub = vec![BigRational::zero(); shift];
            sub.extend(divisor.0.iter().map(|c| c * &k));
            rem = rem.sub(&QPoly::new(sub));
        }
        (Self::new(quot), rem)
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            Some(l) => {
                let inv = BigRational::one() / l;
                self.scale(&inv)
            }
            None => Self::zero(),
        }
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn to_f64(&self) -> RPoly {
        RPoly::new(self.0.iter().map(rational_to_f64).collect())
    }

    /// Coefficients scaled to coprime integers (as strings), highest degree first.
    pub fn integer_coefficients(&self) -> Vec<String> {
        use num::Integer;
        let mut den = num::BigInt::one();
        for c in &self.0 {
            den = den.lcm(c.denom());
        }
        let ints: Vec<num::BigInt> = self
            .0
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(num::BigInt::zero(), |acc, x| acc.gcd(x));
        let sign = if self.lead().map(|l| l.is_negative()).unwrap_or(false) {
            -num::BigInt::one()
        } else {
            num::BigInt::one()
        };
        ints.iter()
            .rev()
            .map(|x| {
                if g.is_zero() {
                    x.to_string()
                } else {
                    (x * &sign / &g).to_string()
                }
            })
            .collect()
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`
    /// (Sturm's theorem). Endpoints must not be roots of the square-free part.
    pub fn count_real_roots(&self, lo: &BigRational, hi: &BigRational) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let sq_free = self.div_rem(&self.gcd(&self.derivative())).0;
        let mut seq = vec![sq_free.clone(), sq_free.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        let changes = |x: &BigRational| {
            let signs: Vec<i8> = seq
                .iter()
                .map(|p| {
                    let v = p.eval(x);
                    if v.is_positive() {
                        1
                    } else if v.is_negative() {
                        -1
                    } else {
                        0
                    }
                })
                .filter(|&s| s != 0)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        changes(lo).saturating_sub(changes(hi))
    }
}

/// Double-precision polynomial, lowest degree first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RPoly(Vec<f64>);

impl RPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        RPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Drops leading coefficients that are negligible relative to the largest.
    pub fn trimmed(&self, rel_tol: f64) -> RPoly {
        let scale = self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut c = self.0.clone();
        while c
            .last()
            .map(|x| x.abs() <= rel_tol * scale)
            .unwrap_or(false)
        {
            c.pop();
        }
        RPoly(c)
    }

    pub fn is_negligible(&self, abs_tol: f64) -> bool {
        self.0.iter().all(|c| c.abs() <= abs_tol)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Value and sum of absolute term values.
    pub fn eval_with_magnitude(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut mag = 0.0;
        let mut p = 1.0;
        for c in &self.0 {
            let t = c * p;
            v += t;
            mag += t.abs();
            p *= x;
        }
        (v, mag)
    }

    fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn derivative(&self) -> RPoly {
        RPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Real roots, ascending. Leading coefficients below `1e-13` of the
    /// largest are treated as zero.
    pub fn real_roots(&self) -> Vec<f64> {
        let p = self.trimmed(1e-13);
        let c = p.coeffs();
        let mut roots = match p.degree() {
            None | Some(0) => Vec::new(),
            Some(1) => vec![-c[0] / c[1]],
            Some(2) => quadratic_roots(c[2], c[1], c[0]),
            Some(_) => p.aberth_real_roots(),
        };
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        roots
    }

    fn aberth_real_roots(&self) -> Vec<f64> {
        let n = self.degree().unwrap();
        let lead = self.0[n];
        // Cauchy bound for the initial circle.
        let radius = 1.0
            + self.0[..n]
                .iter()
                .fold(0.0f64, |m, c| m.max((c / lead).abs()));
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64;
                Complex64::from_polar(radius, theta)
            })
            .collect();
        let dp = self.derivative();
        for _ in 0..500 {
            let mut max_step = 0.0f64;
            for i in 0..n {
                let pz = self.eval_complex(z[i]);
                let dz = dp.eval_complex(z[i]);
                if pz.norm() == 0.0 {
                    continue;
                }
                let ratio = pz / dz;
                let mut sum = Complex64::new(0.0, 0.0);
                for (j, zj) in z.iter().enumerate() {
                    if j != i {
                        sum += Complex64::new(1.0, 0.0) / (z[i] - zj);
                    }
                }
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
            if max_step < 1e-16 {
                break;
            }
        }
        z.into_iter()
            .filter(|r| r.im.abs() <= 1e-7 * (1.0 + r.re.abs()))
            .map(|r| self.polish(r.re))
            .collect()
    }

    fn polish(&self, mut x: f64) -> f64 {
        let dp = self.derivative();
        for _ in 0..5 {
            let d = dp.eval(x);
            if d == 0.0 {
                break;
            }
            let step = self.eval(x) / d;
            x -= step;
            if step.abs() <= 1e-17 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }
}

/// Real roots of `a x² + b x + c` without cancellation.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0, 0.0];
    }
    let mut r = vec![q / a, c / q];
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::rat;

    fn q(c: &[(i64, i64)]) -> QPoly {
        QPoly::new(c.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = q(&[(-1, 1), (0, 1), (1, 1)]); // x² - 1
        let b = q(&[(-2, 1), (1, 1)]); // x - 2
        assert_eq!(a.gcd(&b), q(&[(1, 1)]));
        let c = q(&[(-1, 1), (1, 1)]); // x - 1
        assert_eq!(a.gcd(&c), c);
    }

    #[test]
    fn division_identity() {
        let a = q(&[(3, 1), (-1, 2), (0, 1), (7, 3)]);
        let b = q(&[(1, 1), (2, 5)]);
        let (quot, rem) = a.div_rem(&b);
        assert_eq!(quot.mul(&b).add(&rem), a);
        assert!(rem.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn sturm_counts() {
        // (x-1)(x-2)(x+3)
        let p = q(&[(-1, 1), (1, 1)])
            .mul(&q(&[(-2, 1), (1, 1)]))
            .mul(&q(&[(3, 1), (1, 1)]));
        assert_eq!(p.count_real_roots(&rat(-10, 1), &rat(10, 1)), 3);
        assert_eq!(p.count_real_roots(&rat(0, 1), &rat(10, 1)), 2);
        assert_eq!(p.count_real_roots(&rat(3, 2), &rat(10, 1)), 1);
        let no_real = q(&[(1, 1), (0, 1), (1, 1)]);
        assert_eq!(no_real.count_real_roots(&rat(-100, 1), &rat(100, 1)), 0);
    }

    #[test]
    fn float_roots() {
        let p = RPoly::new(vec![6.0, -11.0, 6.0, -1.0]); // -(x-1)(x-2)(x-3)
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        let r = RPoly::new(vec![1.0, 0.0, 1.0, 0.0, 0.0]).real_roots();
        assert!(r.is_empty());
        assert_eq!(quadratic_roots(1.0, 0.0, -4.0), vec![-2.0, 2.0]);
    }

    #[test]
    fn integer_coefficients_are_primitive() {
        let p = q(&[(-1, 8), (-43, 12), (19, 3)]);
        assert_eq!(p.integer_coefficients(), vec!["152", "-86", "-3"]);
    }
}
