//! Projective points, the physical chart, linear forms and parametrized slices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::CPoly;

/// A homogeneous coordinate triple `(U, V, W)` in `C³`.
pub type Vec3 = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Squared Euclidean norm, summed so that swapping the first and last
/// coordinate gives a bitwise identical result.
#[inline]
pub fn norm_sqr3(x: &Vec3) -> f64 {
    (x[0].norm_sqr() + x[2].norm_sqr()) + x[1].norm_sqr()
}

/// Euclidean norm that neither overflows nor underflows for representable input.
pub fn norm3(x: &Vec3) -> f64 {
    let m = x
        .iter()
        .map(|c| c.re.abs().max(c.im.abs()))
        .fold(0.0_f64, f64::max);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if (1e-150..1e150).contains(&m) {
        return norm_sqr3(x).sqrt();
    }
    let s = [x[0] / m, x[1] / m, x[2] / m];
    m * norm_sqr3(&s).sqrt()
}

/// Hermitian inner product `Σ aᵢ·conj(bᵢ)`.
#[inline]
pub fn hdot(a: &Vec3, b: &Vec3) -> Complex64 {
    (a[0] * b[0].conj() + a[2] * b[2].conj()) + a[1] * b[1].conj()
}

/// `‖a ∧ b‖`, the norm of all 2×2 minors. For unit vectors this is the
/// chordal distance, computed without the cancellation of `1 − |⟨a,b⟩|²`.
pub fn wedge_norm(a: &Vec3, b: &Vec3) -> f64 {
    let m01 = a[0] * b[1] - a[1] * b[0];
    let m02 = a[0] * b[2] - a[2] * b[0];
    let m12 = a[1] * b[2] - a[2] * b[1];
    (m02.norm_sqr() + (m01.norm_sqr() + m12.norm_sqr())).sqrt()
}

/// `conj(a × b)`: Hermitian-orthogonal to both `a` and `b`.
pub fn conj_cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        (a[1] * b[2] - a[2] * b[1]).conj(),
        (a[2] * b[0] - a[0] * b[2]).conj(),
        (a[0] * b[1] - a[1] * b[0]).conj(),
    ]
}

/// A point of `CP²`, stored as a unit vector of `C³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint {
    c: Vec3,
}

impl ProjPoint {
    /// Unit-normalizes `raw` by a positive real factor.
    pub fn new(raw: Vec3) -> Result<Self> {
        normalize(raw)
    }

    /// Builds from real-and-imaginary pairs.
    pub fn from_parts(u: (f64, f64), v: (f64, f64), w: (f64, f64)) -> Result<Self> {
        normalize([
            Complex64::new(u.0, u.1),
            Complex64::new(v.0, v.1),
            Complex64::new(w.0, w.1),
        ])
    }

    pub fn from_real(u: f64, v: f64, w: f64) -> Result<Self> {
        Self::from_parts((u, 0.0), (v, 0.0), (w, 0.0))
    }

    /// Wraps a vector that is already of unit norm.
    pub(crate) fn from_unit(c: Vec3) -> Self {
        Self { c }
    }

    #[inline]
    pub fn coords(&self) -> &Vec3 {
        &self.c
    }
    #[inline]
    pub fn u(&self) -> Complex64 {
        self.c[0]
    }
    #[inline]
    pub fn v(&self) -> Complex64 {
        self.c[1]
    }
    #[inline]
    pub fn w(&self) -> Complex64 {
        self.c[2]
    }

    /// The representative whose largest-modulus coordinate is real and
    /// positive (first such index on ties). Two projectively equal points
    /// have canonical forms that agree to rounding.
    pub fn canonical(&self) -> ProjPoint {
        let mut k = 0;
        for i in 1..3 {
            if self.c[i].norm() > self.c[k].norm() {
                k = i;
            }
        }
        let ph = self.c[k] / self.c[k].norm();
        let inv = ph.conj();
        ProjPoint {
            c: [self.c[0] * inv, self.c[1] * inv, self.c[2] * inv],
        }
    }

    /// The involution `ρ: [U:V:W] ↦ [W:V:U]`.
    pub fn swap_uw(&self) -> ProjPoint {
        ProjPoint {
            c: [self.c[2], self.c[1], self.c[0]],
        }
    }

    /// `V / U`-style affine ratio helper: `c[i] / c[j]`.
    pub fn ratio(&self, i: usize, j: usize) -> Complex64 {
        self.c[i] / self.c[j]
    }

    pub fn approx_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        chordal_dist(self, other) < tol
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let arr: [[f64; 2]; 3] = [
            [self.c[0].re, self.c[0].im],
            [self.c[1].re, self.c[1].im],
            [self.c[2].re, self.c[2].im],
        ];
        arr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let arr = <[[f64; 2]; 3]>::deserialize(d)?;
        normalize([
            Complex64::new(arr[0][0], arr[0][1]),
            Complex64::new(arr[1][0], arr[1][1]),
            Complex64::new(arr[2][0], arr[2][1]),
        ])
        .map_err(serde::de::Error::custom)
    }
}

/// Scales `raw` by a positive real so that it has unit norm.
pub fn normalize(raw: Vec3) -> Result<ProjPoint> {
    let n = norm3(&raw);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !n.is_finite() {
        return Err(Error::Domain("non-finite coordinates".into()));
    }
    let mut c = [raw[0] / n, raw[1] / n, raw[2] / n];
    // one correction pass keeps the norm within a couple of ulps of 1
    let r = norm_sqr3(&c).sqrt();
    if r != 1.0 {
        for z in c.iter_mut() {
            *z /= r;
        }
    }
    Ok(ProjPoint { c })
}

/// Fubini–Study chordal distance `√(1 − |⟨a,b⟩|²)` in `[0, 1]`.
pub fn chordal_dist(a: &ProjPoint, b: &ProjPoint) -> f64 {
    wedge_norm(&a.c, &b.c).min(1.0)
}

/// Physical coordinates: field-like `z` and temperature-like `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysPoint {
    pub z: Complex64,
    pub t: Complex64,
}

impl PhysPoint {
    pub fn new(z: Complex64, t: Complex64) -> Self {
        Self { z, t }
    }

    /// The denominator-cleared lift `(1, z·t, z²)` of `Ψ(z, t)`.
    pub fn lift(&self) -> Vec3 {
        [ONE, self.z * self.t, self.z * self.z]
    }
}

/// `Ψ(z, t) = [z⁻¹t^{-1/2} : t^{1/2} : z t^{-1/2}] = [1 : zt : z²]`.
pub fn psi(p: &PhysPoint) -> Result<ProjPoint> {
    if p.z == ZERO {
        return Err(Error::Domain("psi requires z != 0".into()));
    }
    if p.t == ZERO {
        return Err(Error::Domain("psi requires t != 0".into()));
    }
    normalize(p.lift())
}

/// A linear form `Y = pU + qV + rW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub p: Complex64,
    pub q: Complex64,
    pub r: Complex64,
}

impl LinearForm {
    pub fn new(p: Complex64, q: Complex64, r: Complex64) -> Result<Self> {
        if p == ZERO && q == ZERO && r == ZERO {
            return Err(Error::InvalidArgument("linear form must be nonzero".into()));
        }
        Ok(Self { p, q, r })
    }

    /// `Y₀ = U + 2V + W`, whose zero line is the level-0 zero locus.
    pub fn y0() -> Self {
        Self {
            p: ONE,
            q: Complex64::new(2.0, 0.0),
            r: ONE,
        }
    }

    #[inline]
    pub fn eval(&self, x: &Vec3) -> Complex64 {
        (self.p * x[0] + self.r * x[2]) + self.q * x[1]
    }

    /// `‖(p, q, r)‖`, the supremum of `|Y(X)|` over unit vectors.
    pub fn coefficient_norm(&self) -> f64 {
        norm3(&[self.p, self.q, self.r])
    }

    pub fn eval_poly(&self, pu: &CPoly, pv: &CPoly, pw: &CPoly) -> CPoly {
        pu.scale(self.p).add(&pw.scale(self.r)).add(&pv.scale(self.q))
    }
}

/// Which parametrized curve to build a slice from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SliceKind {
    /// `s ↦ X₀ + s·D`.
    Line { x0: ProjPoint, d: ProjPoint },
    /// The `z`-line at fixed temperature `t`: `s ↦ (1, s·t, s²)`.
    PhysicalTLine { t: Complex64 },
    /// The zero-field Fisher line `{U = W}`: `s ↦ (1, s, 1)` with `s = t`.
    PhysicalZ1Line,
}

/// A parametrized algebraic curve `s ↦ (P_U(s), P_V(s), P_W(s))` together
/// with the logarithm of the projective rescaling applied so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalSlice {
    #[serde(rename = "pU")]
    pub p_u: CPoly,
    #[serde(rename = "pV")]
    pub p_v: CPoly,
    #[serde(rename = "pW")]
    pub p_w: CPoly,
    #[serde(rename = "logScale")]
    pub log_scale: f64,
}

impl RationalSlice {
    /// Pads the three components to a common formal degree.
    pub fn new(p_u: CPoly, p_v: CPoly, p_w: CPoly, log_scale: f64) -> Result<Self> {
        if p_u.is_zero() && p_v.is_zero() && p_w.is_zero() {
            return Err(Error::DegenerateSlice("all components vanish".into()));
        }
        let d = p_u.degree().max(p_v.degree()).max(p_w.degree());
        Ok(Self {
            p_u: p_u.padded(d),
            p_v: p_v.padded(d),
            p_w: p_w.padded(d),
            log_scale,
        })
    }

    /// Common formal degree of the components.
    pub fn degree(&self) -> usize {
        self.p_u.degree()
    }

    /// The triple at parameter `s` (without the `logScale` factor).
    pub fn eval(&self, s: Complex64) -> Vec3 {
        [self.p_u.eval(s), self.p_v.eval(s), self.p_w.eval(s)]
    }

    /// The triple and its `s`-derivative.
    pub fn eval_with_derivative(&self, s: Complex64) -> (Vec3, Vec3) {
        let (u, du) = self.p_u.eval_with_derivative(s);
        let (v, dv) = self.p_v.eval_with_derivative(s);
        let (w, dw) = self.p_w.eval_with_derivative(s);
        ([u, v, w], [du, dv, dw])
    }

    pub fn point(&self, s: Complex64) -> Result<ProjPoint> {
        normalize(self.eval(s))
    }

    pub fn components(&self) -> [&CPoly; 3] {
        [&self.p_u, &self.p_v, &self.p_w]
    }
}

/// Builds the slice for `kind` with zero `logScale`.
pub fn make_slice(kind: &SliceKind) -> Result<RationalSlice> {
    match *kind {
        SliceKind::Line { x0, d } => {
            if chordal_dist(&x0, &d) < 1e-12 {
                return Err(Error::DegenerateSlice(
                    "line base point and direction are projectively equal".into(),
                ));
            }
            let comp = |i: usize| CPoly::new(vec![x0.coords()[i], d.coords()[i]]);
            RationalSlice::new(comp(0), comp(1), comp(2), 0.0)
        }
        SliceKind::PhysicalTLine { t } => RationalSlice::new(
            CPoly::new(vec![ONE]),
            CPoly::new(vec![ZERO, t]),
            CPoly::new(vec![ZERO, ZERO, ONE]),
            0.0,
        ),
        SliceKind::PhysicalZ1Line => RationalSlice::new(
            CPoly::new(vec![ONE]),
            CPoly::new(vec![ZERO, ONE]),
            CPoly::new(vec![ONE]),
            0.0,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn normalize_examples() {
        let p = normalize([c64(2.0, 0.0), ZERO, ZERO]).unwrap();
        assert_eq!(p.coords()[0], ONE);
        let p = normalize([ONE, ONE, ONE]).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for c in p.coords() {
            assert!((c - c64(s, 0.0)).norm() < 1e-15);
        }
        let p = normalize([c64(3.0, 4.0), ZERO, ZERO]).unwrap();
        assert!((p.u() - c64(0.6, 0.8)).norm() < 1e-15);
        assert!(matches!(normalize([ZERO; 3]), Err(Error::ZeroVector)));
    }

    #[test]
    fn normalize_handles_extreme_scales() {
        let p = normalize([c64(1e300, 0.0), c64(1e300, 0.0), ZERO]).unwrap();
        assert!((norm_sqr3(p.coords()) - 1.0).abs() < 4.0 * f64::EPSILON);
        let p = normalize([c64(1e-310, 0.0), ZERO, c64(0.0, 1e-310)]).unwrap();
        assert!((norm_sqr3(p.coords()) - 1.0).abs() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn chordal_examples() {
        let e = ProjPoint::from_real(1.0, 0.0, 0.0).unwrap();
        let ep = ProjPoint::from_real(0.0, 0.0, 1.0).unwrap();
        assert_eq!(chordal_dist(&e, &e), 0.0);
        assert!((chordal_dist(&e, &ep) - 1.0).abs() < 1e-15);
        let m = ProjPoint::from_real(1.0, 0.0, 1.0).unwrap();
        assert!((chordal_dist(&e, &m) - 0.5f64.sqrt()).abs() < 1e-15);
        // projective equality ignores phase
        let q = normalize([c64(0.0, 1.0), ZERO, ZERO]).unwrap();
        assert!(chordal_dist(&e, &q) < 1e-16);
    }

    #[test]
    fn chordal_resolves_tiny_distances() {
        let a = ProjPoint::from_real(1.0, 0.0, 0.0).unwrap();
        let b = ProjPoint::from_real(1.0, 1e-12, 0.0).unwrap();
        let d = chordal_dist(&a, &b);
        assert!((d - 1e-12).abs() < 1e-24, "{d}");
    }

    #[test]
    fn psi_examples() {
        let t = c64(0.3, -0.7);
        let p = psi(&PhysPoint::new(ONE, t)).unwrap();
        let q = normalize([ONE, t, ONE]).unwrap();
        assert!(chordal_dist(&p, &q) < 1e-15);

        let p = psi(&PhysPoint::new(c64(0.0, 1.0), ONE)).unwrap();
        let a_minus = normalize([c64(0.0, -1.0), ONE, c64(0.0, 1.0)]).unwrap();
        assert!(chordal_dist(&p, &a_minus) < 1e-15);

        assert!(psi(&PhysPoint::new(ZERO, ONE)).is_err());
        assert!(psi(&PhysPoint::new(ONE, ZERO)).is_err());
    }

    #[test]
    fn canonical_phase_is_stable() {
        let p = normalize([c64(0.0, 2.0), c64(1.0, 1.0), c64(-0.5, 0.0)]).unwrap();
        let ph = c64(0.6, -0.8);
        let q = normalize([p.u() * ph, p.v() * ph, p.w() * ph]).unwrap();
        let (a, b) = (p.canonical(), q.canonical());
        for i in 0..3 {
            assert!((a.coords()[i] - b.coords()[i]).norm() < 1e-15);
        }
        assert!(a.u().im.abs() < 1e-16 && a.u().re > 0.0);
    }

    #[test]
    fn slices() {
        let s = make_slice(&SliceKind::PhysicalZ1Line).unwrap();
        let x = s.eval(c64(0.25, 0.5));
        assert_eq!(x, [ONE, c64(0.25, 0.5), ONE]);

        let e = ProjPoint::from_real(1.0, 0.0, 0.0).unwrap();
        let ep = ProjPoint::from_real(0.0, 0.0, 1.0).unwrap();
        let l0 = make_slice(&SliceKind::Line { x0: e, d: ep }).unwrap();
        assert_eq!(l0.eval(c64(2.0, 1.0)), [ONE, ZERO, c64(2.0, 1.0)]);
        assert!(make_slice(&SliceKind::Line { x0: e, d: e }).is_err());
    }

    #[test]
    fn serde_formats() {
        let p = ProjPoint::from_real(1.0, 0.0, 0.0).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[1.0,0.0],[0.0,0.0],[0.0,0.0]]");
        let s = make_slice(&SliceKind::PhysicalZ1Line).unwrap();
        let js = serde_json::to_value(&s).unwrap();
        assert_eq!(js["pV"], serde_json::json!([[0.0, 0.0], [1.0, 0.0]]));
        assert_eq!(js["logScale"], serde_json::json!(0.0));
        let back: RationalSlice = serde_json::from_value(js).unwrap();
        assert_eq!(back, s);
    }
}
