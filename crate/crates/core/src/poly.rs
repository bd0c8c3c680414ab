//! Dense univariate complex polynomials.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Product length (in coefficients of the shorter factor) below which
/// schoolbook multiplication is used.
pub const FFT_THRESHOLD: usize = 64;

/// Dense polynomial, coefficients lowest degree first. The formal degree is
/// `len − 1`; the leading coefficient may be zero (padding).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `Π (s − rᵢ)`, built by repeated linear multiplication.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![ZERO; c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            c = next;
        }
        Self::new(c)
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Formal degree (padded).
    #[inline]
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree after discarding trailing coefficients with modulus `≤ tol`.
    pub fn effective_degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm() > tol)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Zero-pads to formal degree `d` (never truncates).
    pub fn padded(mut self, d: usize) -> Self {
        if self.coeffs.len() < d + 1 {
            self.coeffs.resize(d + 1, ZERO);
        }
        self
    }

    /// Drops trailing coefficients with modulus `≤ tol`, keeping at least one.
    pub fn trimmed(&self, tol: f64) -> Self {
        let d = self.effective_degree(tol).unwrap_or(0);
        Self::new(self.coeffs[..=d].to_vec())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn scale_real(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn add(&self, other: &CPoly) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(ZERO) + other.coeffs.get(k).copied().unwrap_or(ZERO)
            })
            .collect();
        Self::new(c)
    }

    pub fn sub(&self, other: &CPoly) -> Self {
        self.add(&other.scale_real(-1.0))
    }

    pub fn mul(&self, other: &CPoly) -> Self {
        poly_mul(self, other)
    }

    pub fn square(&self) -> Self {
        poly_mul(self, self)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(vec![ZERO]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Coefficients in reverse order: `s^d · p(1/s)`.
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    /// Horner evaluation.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * s + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    /// The Newton correction `p(s)/p'(s)`, evaluated in the reversed
    /// polynomial when `|s| > 1` so it does not overflow at high degree.
    /// `None` when the derivative vanishes.
    pub fn newton_ratio(&self, s: Complex64) -> Option<Complex64> {
        let d = self.degree() as f64;
        if s.norm() <= 1.0 {
            let (p, dp) = self.eval_with_derivative(s);
            if dp == ZERO {
                return None;
            }
            return Some(p / dp);
        }
        // p(s) = s^d r(w), w = 1/s  ⇒  p/p' = s·r / (d·r − w·r')
        let w = s.inv();
        let (mut r, mut dr) = (ZERO, ZERO);
        for &c in self.coeffs.iter() {
            dr = dr * w + r;
            r = r * w + c;
        }
        let den = r * d - w * dr;
        if den == ZERO {
            return None;
        }
        Some(s * r / den)
    }

    /// `|p(s)| / Σ|cₖ||s|ᵏ`: the residual relative to the evaluation scale.
    pub fn relative_residual(&self, s: Complex64) -> f64 {
        let a = s.norm();
        if a <= 1.0 {
            let p = self.eval(s);
            let scale = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * a + c.norm());
            if scale == 0.0 {
                return 0.0;
            }
            return p.norm() / scale;
        }
        let w = s.inv();
        let wa = w.norm();
        let r = self.coeffs.iter().fold(ZERO, |acc, &c| acc * w + c);
        let scale = self.coeffs.iter().fold(0.0, |acc, c| acc * wa + c.norm());
        if scale == 0.0 {
            return 0.0;
        }
        r.norm() / scale
    }
}

impl Serialize for CPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CPoly::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
    }
}

/// Direct `O(mn)` convolution.
pub fn schoolbook_mul(a: &CPoly, b: &CPoly) -> CPoly {
    let (a, b) = (a.coeffs(), b.coeffs());
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    CPoly::new(out)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Convolution by complex FFT of the next power-of-two length.
pub fn fft_mul(a: &CPoly, b: &CPoly) -> CPoly {
    let out_len = a.coeffs.len() + b.coeffs.len() - 1;
    let n = out_len.next_power_of_two();
    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    });
    let mut fa = vec![ZERO; n];
    fa[..a.coeffs.len()].copy_from_slice(&a.coeffs);
    fwd.process(&mut fa);
    let square = std::ptr::eq(a, b) || a.coeffs == b.coeffs;
    if square {
        for x in fa.iter_mut() {
            *x = *x * *x;
        }
    } else {
        let mut fb = vec![ZERO; n];
        fb[..b.coeffs.len()].copy_from_slice(&b.coeffs);
        fwd.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= *y;
        }
    }
    inv.process(&mut fa);
    let k = 1.0 / n as f64;
    fa.truncate(out_len);
    for x in fa.iter_mut() {
        *x *= k;
    }
    CPoly::new(fa)
}

/// Direct convolution computed in parallel over output coefficients. Each
/// output coefficient carries an error relative to `Σ|aᵢ||bₖ₋ᵢ|` rather than
/// to `‖a‖‖b‖`.
pub fn schoolbook_mul_par(a: &CPoly, b: &CPoly) -> CPoly {
    use rayon::prelude::*;
    let (a, b) = (a.coeffs(), b.coeffs());
    let n = a.len() + b.len() - 1;
    let out: Vec<Complex64> = (0..n)
        .into_par_iter()
        .with_min_len(256)
        .map(|k| {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            let mut acc = ZERO;
            for i in lo..=hi {
                acc += a[i] * b[k - i];
            }
            acc
        })
        .collect();
    CPoly::new(out)
}

/// `log₁₀(max|c| / min|c|)` over the nonzero coefficients.
pub fn dynamic_range(p: &CPoly) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for c in p.coeffs() {
        let a = c.norm();
        if a > 0.0 {
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    if hi == 0.0 {
        0.0
    } else {
        (hi / lo).log10()
    }
}

/// Coefficient range (decades) above which [`mul_graded`] avoids the FFT.
pub const GRADED_RANGE_LIMIT: f64 = 4.0;

/// Product that keeps small coefficients accurate: FFT only when both factors
/// have a narrow coefficient range, direct convolution otherwise.
pub fn mul_graded(a: &CPoly, b: &CPoly) -> CPoly {
    if a.coeffs.len().min(b.coeffs.len()) <= FFT_THRESHOLD {
        return schoolbook_mul(a, b);
    }
    if dynamic_range(a) <= GRADED_RANGE_LIMIT && dynamic_range(b) <= GRADED_RANGE_LIMIT {
        fft_mul(a, b)
    } else {
        schoolbook_mul_par(a, b)
    }
}

/// Polynomial product: schoolbook when either factor is short, FFT otherwise.
pub fn poly_mul(a: &CPoly, b: &CPoly) -> CPoly {
    if a.coeffs.len().min(b.coeffs.len()) <= FFT_THRESHOLD {
        schoolbook_mul(a, b)
    } else {
        fft_mul(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> CPoly {
        CPoly::new(
            (0..=deg)
                .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn graded_product_keeps_small_coefficients() {
        // (1 + 10⁸ s + s²)ᵏ has end coefficients 1 next to a huge middle
        let base = CPoly::from_real(&[1.0, 1e8, 1.0]);
        let mut p = base.clone();
        for _ in 0..6 {
            p = mul_graded(&p, &p);
        }
        assert!((p.coeffs()[0].re - 1.0).abs() < 1e-12);
        assert!((p.leading().re - 1.0).abs() < 1e-12);
        let q = schoolbook_mul_par(&base, &base);
        assert_eq!(q, schoolbook_mul(&base, &base));
    }

    #[test]
    fn small_products() {
        let a = CPoly::from_real(&[1.0, 1.0]);
        let b = CPoly::from_real(&[1.0, -1.0]);
        assert_eq!(poly_mul(&a, &b), CPoly::from_real(&[1.0, 0.0, -1.0]));
        let c = CPoly::from_real(&[1.0, 2.0, 1.0]);
        assert_eq!(poly_mul(&c, &CPoly::from_real(&[1.0])), c);
    }

    #[test]
    fn fft_matches_schoolbook_at_degree_512() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_poly(&mut rng, 512);
        let b = random_poly(&mut rng, 512);
        let f = fft_mul(&a, &b);
        let s = schoolbook_mul(&a, &b);
        let scale = s.max_abs_coeff();
        for (x, y) in f.coeffs().iter().zip(s.coeffs()) {
            assert!((x - y).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn fft_error_bound_at_degree_8192() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_poly(&mut rng, 4096);
        let b = random_poly(&mut rng, 4096);
        let f = fft_mul(&a, &b);
        // exact check of a sparse subset of coefficients
        let bound = 1e-12 * a.norm2() * b.norm2();
        for k in (0..f.coeffs().len()).step_by(97) {
            let mut exact = ZERO;
            for i in k.saturating_sub(4096)..=k.min(4096) {
                exact += a.coeffs()[i] * b.coeffs()[k - i];
            }
            assert!((f.coeffs()[k] - exact).norm() < bound);
        }
    }

    #[test]
    fn newton_ratio_agrees_inside_and_outside_unit_disk() {
        let p = CPoly::from_roots(&[c64(0.5, 0.1), c64(-2.0, 1.0), c64(3.0, -0.5)]);
        for s in [c64(0.3, 0.2), c64(4.0, 1.0), c64(-1.5, -2.5)] {
            let (v, dv) = p.eval_with_derivative(s);
            let r = p.newton_ratio(s).unwrap();
            assert!((r - v / dv).norm() < 1e-13 * (v / dv).norm().max(1.0));
        }
        assert!(p.relative_residual(c64(-2.0, 1.0)) < 1e-15);
    }

    #[test]
    fn from_roots_and_derivative() {
        let p = CPoly::from_roots(&[c64(1.0, 0.0), c64(-1.0, 0.0)]);
        assert_eq!(p, CPoly::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(p.derivative(), CPoly::from_real(&[0.0, 2.0]));
    }
}
