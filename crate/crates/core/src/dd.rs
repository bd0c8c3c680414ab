//! Double-double complex arithmetic for high-level slice polynomials.

use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::poly::CPoly;

pub type DdComplex = Complex<TwoFloat>;

/// Working precision for polynomial construction and root polishing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    #[serde(rename = "dd")]
    DoubleDouble,
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "double" => Ok(Precision::Double),
            "dd" => Ok(Precision::DoubleDouble),
            other => Err(format!("unknown precision '{other}' (expected double or dd)")),
        }
    }
}

#[inline]
pub fn to_dd(c: Complex64) -> DdComplex {
    Complex::new(TwoFloat::from(c.re), TwoFloat::from(c.im))
}

#[inline]
pub fn from_dd(c: &DdComplex) -> Complex64 {
    Complex64::new(c.re.hi() + c.re.lo(), c.im.hi() + c.im.lo())
}

#[inline]
fn approx_abs(c: &DdComplex) -> f64 {
    from_dd(c).norm()
}

/// Dense polynomial with double-double complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct DdPoly {
    coeffs: Vec<DdComplex>,
}

impl DdPoly {
    pub fn new(coeffs: Vec<DdComplex>) -> Self {
        if coeffs.is_empty() {
            return Self { coeffs: vec![to_dd(Complex64::new(0.0, 0.0))] };
        }
        Self { coeffs }
    }

    pub fn from_cpoly(p: &CPoly) -> Self {
        Self::new(p.coeffs().iter().map(|&c| to_dd(c)).collect())
    }

    pub fn to_cpoly(&self) -> CPoly {
        CPoly::new(self.coeffs.iter().map(from_dd).collect())
    }

    pub fn coeffs(&self) -> &[DdComplex] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(approx_abs).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &DdPoly) -> DdPoly {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = long.coeffs.clone();
        for (o, s) in out.iter_mut().zip(&short.coeffs) {
            *o = *o + *s;
        }
        DdPoly::new(out)
    }

    pub fn scale_real(&self, k: f64) -> DdPoly {
        let k = TwoFloat::from(k);
        DdPoly::new(self.coeffs.iter().map(|c| Complex::new(c.re * k, c.im * k)).collect())
    }

    pub fn scale_complex(&self, k: Complex64) -> DdPoly {
        let k = to_dd(k);
        DdPoly::new(self.coeffs.iter().map(|c| *c * k).collect())
    }

    /// Schoolbook product, parallel over output coefficients.
    pub fn mul(&self, other: &DdPoly) -> DdPoly {
        let (a, b) = (&self.coeffs, &other.coeffs);
        let n = a.len() + b.len() - 1;
        let zero = to_dd(Complex64::new(0.0, 0.0));
        let out: Vec<DdComplex> = (0..n)
            .into_par_iter()
            .with_min_len(64)
            .map(|k| {
                let lo = k.saturating_sub(b.len() - 1);
                let hi = k.min(a.len() - 1);
                let mut acc = zero;
                for i in lo..=hi {
                    acc = acc + a[i] * b[k - i];
                }
                acc
            })
            .collect();
        DdPoly::new(out)
    }

    pub fn derivative(&self) -> DdPoly {
        if self.coeffs.len() <= 1 {
            return DdPoly::new(vec![]);
        }
        DdPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| mul_f(*c, k as f64))
                .collect(),
        )
    }

    pub fn square(&self) -> DdPoly {
        self.mul(self)
    }

    /// `(p(s), p′(s))` by Horner's rule in double-double.
    pub fn eval_with_derivative(&self, s: DdComplex) -> (DdComplex, DdComplex) {
        let zero = to_dd(Complex64::new(0.0, 0.0));
        let mut p = zero;
        let mut dp = zero;
        for c in self.coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + *c;
        }
        (p, dp)
    }

    /// Newton correction `p(s)/p′(s)`, evaluated through the reversed
    /// polynomial when `|s| > 1`.
    pub fn newton_ratio(&self, s: Complex64) -> Option<Complex64> {
        let d = self.degree() as f64;
        if s.norm() <= 1.0 {
            let (p, dp) = self.eval_with_derivative(to_dd(s));
            let dpa = from_dd(&dp);
            if dpa.norm() == 0.0 {
                return None;
            }
            return Some(from_dd(&(p / dp)));
        }
        // p(s) = s^d q(1/s); p/p' = s / (d - y q'(y)/q(y)) with y = 1/s
        let y = to_dd(s.inv());
        let zero = to_dd(Complex64::new(0.0, 0.0));
        let mut q = zero;
        let mut dq = zero;
        for c in self.coeffs.iter() {
            dq = dq * y + q;
            q = q * y + *c;
        }
        let qa = from_dd(&q);
        if qa.norm() == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        let ratio = from_dd(&(y * dq / q));
        let den = Complex64::new(d, 0.0) - ratio;
        if den.norm() == 0.0 {
            return None;
        }
        Some(s / den)
    }
}

#[inline]
fn mul_f(c: DdComplex, k: f64) -> DdComplex {
    let k = TwoFloat::from(k);
    Complex::new(c.re * k, c.im * k)
}

/// `R̂` and its derivative along `dx`, in double-double.
pub fn hat_with_tangent_dd(x: &[DdComplex; 3], dx: &[DdComplex; 3]) -> ([DdComplex; 3], [DdComplex; 3]) {
    let (u, v, w) = (x[0], x[1], x[2]);
    let (du, dv, dw) = (dx[0], dx[1], dx[2]);
    let a = u * u + v * v;
    let c = v * v + w * w;
    let s = u + w;
    let da = mul_f(u * du + v * dv, 2.0);
    let dc = mul_f(v * dv + w * dw, 2.0);
    let ds = du + dw;
    let v2 = v * v;
    let s2 = s * s;
    (
        [a * a, v2 * s2, c * c],
        [mul_f(a * da, 2.0), mul_f(v * dv * s2 + v2 * s * ds, 2.0), mul_f(c * dc, 2.0)],
    )
}

/// Rescales a triple and its tangent by the power of two nearest to the
/// reciprocal of the norm (exact in binary arithmetic). Returns the
/// natural log of the divisor.
pub fn rescale_pow2(x: &mut [DdComplex; 3], dx: &mut [DdComplex; 3]) -> f64 {
    let n = x.iter().map(|c| from_dd(c).norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return 0.0;
    }
    let e = n.log2().round() as i32;
    let k = 2f64.powi(-e);
    for c in x.iter_mut().chain(dx.iter_mut()) {
        *c = mul_f(*c, k);
    }
    e as f64 * std::f64::consts::LN_2
}

/// One step of the renormalization recursion on a triple of double-double
/// polynomials, rescaled by the largest coefficient modulus. Returns the
/// natural log of the divisor.
pub fn advance_triple(p: &[DdPoly; 3]) -> ([DdPoly; 3], f64) {
    let (u2, (v2, w2)) = rayon::join(|| p[0].square(), || rayon::join(|| p[1].square(), || p[2].square()));
    let a = u2.add(&v2);
    let c = v2.add(&w2);
    let s = p[0].add(&p[2]);
    let (ua, (vb, wc)) = rayon::join(|| a.square(), || rayon::join(|| v2.mul(&s.square()), || c.square()));
    let m = ua.max_abs_coeff().max(vb.max_abs_coeff()).max(wc.max_abs_coeff());
    if m == 0.0 {
        return ([ua, vb, wc], f64::NEG_INFINITY);
    }
    let k = 1.0 / m;
    ([ua.scale_real(k), vb.scale_real(k), wc.scale_real(k)], m.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn conversion_roundtrip() {
        let c = c64(0.1, -3.7);
        assert_eq!(from_dd(&to_dd(c)), c);
    }

    #[test]
    fn dd_product_matches_double() {
        let a = CPoly::new(vec![c64(1.0, 2.0), c64(-0.5, 0.25), c64(3.0, 0.0)]);
        let b = CPoly::new(vec![c64(0.0, 1.0), c64(2.0, -1.0)]);
        let want = a.mul(&b);
        let got = DdPoly::from_cpoly(&a).mul(&DdPoly::from_cpoly(&b)).to_cpoly();
        for (x, y) in want.coeffs().iter().zip(got.coeffs()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn dd_carries_extra_digits() {
        // (1 + ε s)² has middle coefficient 2ε and tail ε² exactly representable
        let eps = 2f64.powi(-40);
        let p = DdPoly::from_cpoly(&CPoly::from_real(&[1.0, eps]));
        let sq = p.square();
        let one_plus = sq.coeffs()[0].re + sq.coeffs()[2].re;
        assert_eq!(one_plus.lo(), eps * eps);
    }

    #[test]
    fn newton_ratio_inside_and_outside() {
        let p = DdPoly::from_cpoly(&CPoly::from_roots(&[c64(0.5, 0.0), c64(3.0, 1.0)]));
        for s in [c64(0.4, 0.1), c64(2.5, 0.5)] {
            let (v, dv) = p.eval_with_derivative(to_dd(s));
            let want = from_dd(&v) / from_dd(&dv);
            let got = p.newton_ratio(s).unwrap();
            assert!((want - got).norm() < 1e-14 * want.norm().max(1.0));
        }
    }

    #[test]
    fn derivative_of_cubic() {
        let p = DdPoly::from_cpoly(&CPoly::from_real(&[1.0, 2.0, 0.0, 4.0]));
        let d = p.derivative().to_cpoly();
        assert_eq!(d.coeffs(), CPoly::from_real(&[2.0, 0.0, 12.0]).coeffs());
    }

    #[test]
    fn precision_parses() {
        assert_eq!("dd".parse::<Precision>().unwrap(), Precision::DoubleDouble);
        assert_eq!("double".parse::<Precision>().unwrap(), Precision::Double);
        assert!("quad".parse::<Precision>().is_err());
    }
}
