//! Partition functions restricted to slices.
//!
//! A slice is advanced through the renormalization recursion at the level of
//! polynomial triples; after `n` steps `Y₀ = U + 2V + W` of the triple is the
//! (denominator-cleared) partition function `Ẑₙ` on that slice. Each step is
//! rescaled by its largest coefficient modulus with the logarithm kept in
//! `logScale`, so that `log|Ẑₙ(s)| = log|zhat(s)| + logScale`.

use num_complex::Complex64;
use serde::Serialize;

use crate::dd::{self, DdPoly, Precision};
use crate::error::{Error, Result};
use crate::geometry::{make_slice, norm3, LinearForm, PhysPoint, RationalSlice, SliceKind, Vec3};
use crate::poly::{mul_graded, CPoly};
use crate::renorm::{apply_hat, hat_with_tangent};

/// Largest level accepted by [`partition_slice`] (degree `2·4⁶ = 8192` on
/// physical t-lines).
pub const DEFAULT_MAX_LEVEL: usize = 6;

/// `Ẑₙ` restricted to a slice.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionSlice {
    pub n: usize,
    pub slice: RationalSlice,
    /// `pU + 2pV + pW` of the advanced slice.
    pub zhat: CPoly,
    #[serde(rename = "logScale")]
    pub log_scale: f64,
}

impl PartitionSlice {
    /// `log|Ẑₙ(s)|`.
    pub fn log_abs(&self, s: Complex64) -> f64 {
        self.zhat.eval(s).norm().ln() + self.log_scale
    }
}

/// One renormalization step on a polynomial triple.
pub fn advance_slice(sl: &RationalSlice) -> Result<RationalSlice> {
    let (pu, pv, pw) = (&sl.p_u, &sl.p_v, &sl.p_w);
    let sq = |p: &CPoly| mul_graded(p, p);
    let (u2, (v2, w2)) = rayon::join(|| sq(pu), || rayon::join(|| sq(pv), || sq(pw)));
    let a = u2.add(&v2);
    let c = v2.add(&w2);
    let s = pu.add(pw);
    let (nu, (nv, nw)) = rayon::join(|| sq(&a), || rayon::join(|| mul_graded(&v2, &sq(&s)), || sq(&c)));
    let m = nu.max_abs_coeff().max(nv.max_abs_coeff()).max(nw.max_abs_coeff());
    if m == 0.0 || !m.is_finite() {
        return Err(Error::DegenerateSlice(
            "advanced components vanish identically (slice lies in the indeterminacy fiber)".into(),
        ));
    }
    let k = 1.0 / m;
    let d = 4 * sl.degree();
    RationalSlice::new(
        nu.scale_real(k).padded(d),
        nv.scale_real(k).padded(d),
        nw.scale_real(k).padded(d),
        4.0 * sl.log_scale + m.ln(),
    )
}

/// `n` applications of [`advance_slice`].
pub fn advance_slice_n(sl: &RationalSlice, n: usize) -> Result<RationalSlice> {
    let mut cur = sl.clone();
    for _ in 0..n {
        cur = advance_slice(&cur)?;
    }
    Ok(cur)
}

fn check_level(n: usize) -> Result<()> {
    if n > DEFAULT_MAX_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "level {n} exceeds the maximum {DEFAULT_MAX_LEVEL}"
        )));
    }
    Ok(())
}

/// `Ẑₙ = Y₀ ∘ R̂ⁿ` restricted to the slice `kind`.
pub fn partition_slice(kind: &SliceKind, n: usize) -> Result<PartitionSlice> {
    partition_slice_with_form(kind, n, &LinearForm::y0())
}

/// As [`partition_slice`] with an arbitrary linear form in place of `Y₀`.
pub fn partition_slice_with_form(kind: &SliceKind, n: usize, form: &LinearForm) -> Result<PartitionSlice> {
    check_level(n)?;
    let slice = advance_slice_n(&make_slice(kind)?, n)?;
    let zhat = form.eval_poly(&slice.p_u, &slice.p_v, &slice.p_w);
    Ok(PartitionSlice {
        n,
        log_scale: slice.log_scale,
        slice,
        zhat,
    })
}

/// `Ẑₙ` on a slice with coefficients carried in double-double arithmetic.
#[derive(Debug, Clone)]
pub struct PartitionSliceDd {
    pub n: usize,
    pub zhat: DdPoly,
    pub log_scale: f64,
}

impl PartitionSliceDd {
    /// Rounded copy of the coefficients.
    pub fn to_double(&self) -> CPoly {
        self.zhat.to_cpoly()
    }
}

/// Extended-precision variant of [`partition_slice_with_form`].
pub fn partition_slice_dd(kind: &SliceKind, n: usize, form: &LinearForm) -> Result<PartitionSliceDd> {
    check_level(n)?;
    let sl = make_slice(kind)?;
    let mut triple = [
        DdPoly::from_cpoly(&sl.p_u),
        DdPoly::from_cpoly(&sl.p_v),
        DdPoly::from_cpoly(&sl.p_w),
    ];
    let mut log_scale = sl.log_scale;
    for _ in 0..n {
        let (next, lm) = dd::advance_triple(&triple);
        if !lm.is_finite() {
            return Err(Error::DegenerateSlice("advanced components vanish identically".into()));
        }
        triple = next;
        log_scale = 4.0 * log_scale + lm;
    }
    let [pu, pv, pw] = &triple;
    let zhat = pu
        .scale_complex(form.p)
        .add(&pv.scale_complex(form.q))
        .add(&pw.scale_complex(form.r));
    Ok(PartitionSliceDd { n, zhat, log_scale })
}

/// Zero-field polynomial in the requested precision, rounded to double.
pub fn partition_poly(kind: &SliceKind, n: usize, precision: Precision) -> Result<(CPoly, f64)> {
    match precision {
        Precision::Double => {
            let ps = partition_slice(kind, n)?;
            Ok((ps.zhat, ps.log_scale))
        }
        Precision::DoubleDouble => {
            let ps = partition_slice_dd(kind, n, &LinearForm::y0())?;
            Ok((ps.to_double(), ps.log_scale))
        }
    }
}

/// Pointwise evaluation of `Y ∘ R̂ⁿ ∘ ℓ` at a slice parameter, with its
/// derivative in `s`, by iterating the map on a single point instead of
/// expanding polynomials. This is far better conditioned than the expanded
/// coefficients at high degree.
#[derive(Debug, Clone)]
pub struct SliceEvaluator {
    base: RationalSlice,
    n: usize,
    form: LinearForm,
    precision: Precision,
}

/// Value of `Y ∘ R̂ⁿ ∘ ℓ` as `e^{log_scale}·y` with derivative `e^{log_scale}·dy`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledValue {
    pub y: Complex64,
    pub dy: Complex64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub fn log_abs(&self) -> f64 {
        self.y.norm().ln() + self.log_scale
    }
}

impl SliceEvaluator {
    pub fn new(kind: &SliceKind, n: usize, form: LinearForm) -> Result<Self> {
        Ok(Self::from_slice(make_slice(kind)?, n, form))
    }

    pub fn from_slice(base: RationalSlice, n: usize, form: LinearForm) -> Self {
        Self {
            base,
            n,
            form,
            precision: Precision::Double,
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// `‖(p, q, r)‖` of the linear form.
    pub fn form_norm(&self) -> f64 {
        self.form.coefficient_norm()
    }

    pub fn base(&self) -> &RationalSlice {
        &self.base
    }

    pub fn level(&self) -> usize {
        self.n
    }

    /// Formal degree of `Y ∘ R̂ⁿ ∘ ℓ` in `s`.
    pub fn degree(&self) -> usize {
        self.base.degree() * 4usize.pow(self.n as u32)
    }

    pub fn eval(&self, s: Complex64) -> ScaledValue {
        if self.precision == Precision::DoubleDouble {
            return self.eval_dd(s);
        }
        let (mut x, mut dx) = self.base.eval_with_derivative(s);
        let mut log_scale = self.base.log_scale;
        for _ in 0..self.n {
            let c = norm3(&x);
            if c > 0.0 && c.is_finite() {
                scale3(&mut x, 1.0 / c);
                scale3(&mut dx, 1.0 / c);
                log_scale += c.ln();
            }
            let (y, dy) = hat_with_tangent(&x, &dx);
            x = y;
            dx = dy;
            log_scale *= 4.0;
        }
        let c = norm3(&x);
        if c > 0.0 && c.is_finite() {
            scale3(&mut x, 1.0 / c);
            scale3(&mut dx, 1.0 / c);
            log_scale += c.ln();
        }
        ScaledValue {
            y: self.form.eval(&x),
            dy: self.form.eval(&dx),
            log_scale,
        }
    }

    fn eval_dd(&self, s: Complex64) -> ScaledValue {
        let sd = dd::to_dd(s);
        let mut x = [sd; 3];
        let mut dx = [sd; 3];
        for (i, p) in self.base.components().iter().enumerate() {
            let (v, dv) = DdPoly::from_cpoly(p).eval_with_derivative(sd);
            x[i] = v;
            dx[i] = dv;
        }
        let mut log_scale = self.base.log_scale;
        for _ in 0..self.n {
            log_scale += dd::rescale_pow2(&mut x, &mut dx);
            let (y, dy) = dd::hat_with_tangent_dd(&x, &dx);
            x = y;
            dx = dy;
            log_scale *= 4.0;
        }
        log_scale += dd::rescale_pow2(&mut x, &mut dx);
        let (p, q, r) = (dd::to_dd(self.form.p), dd::to_dd(self.form.q), dd::to_dd(self.form.r));
        let y = p * x[0] + q * x[1] + r * x[2];
        let dy = p * dx[0] + q * dx[1] + r * dx[2];
        // keep the quotient in double-double before rounding
        let ratio = if dd::from_dd(&dy).norm() > 0.0 { y / dy } else { y };
        let dyf = dd::from_dd(&dy);
        let yf = if dyf.norm() > 0.0 { dd::from_dd(&ratio) * dyf } else { dd::from_dd(&y) };
        ScaledValue {
            y: yf,
            dy: dyf,
            log_scale,
        }
    }

    /// Newton correction `f(s)/f′(s)`.
    pub fn newton_ratio(&self, s: Complex64) -> Option<Complex64> {
        let v = self.eval(s);
        if v.dy.norm() == 0.0 || !v.dy.is_finite() || !v.y.is_finite() {
            return None;
        }
        Some(v.y / v.dy)
    }
}

#[inline]
fn scale3(x: &mut Vec3, k: f64) {
    for c in x.iter_mut() {
        *c *= k;
    }
}

/// `log|Y₀(R̂ⁿ(1, zt, z²))|` by iterating the normalized map pointwise.
pub fn eval_log_z(z: Complex64, t: Complex64, n: usize) -> Result<f64> {
    let p = PhysPoint::new(z, t);
    let raw = p.lift();
    let mut log_scale = norm3(&raw).ln();
    let mut x = crate::geometry::normalize(raw)?;
    for _ in 0..n {
        let step = apply_hat(&x)?;
        log_scale = 4.0 * log_scale + step.log_scale;
        x = step.point;
    }
    Ok(LinearForm::y0().eval(x.coords()).norm().ln() + log_scale)
}

/// Vertices and edges of the diamond graph `Γₙ`; vertices 0 and 1 are the
/// two boundary vertices.
pub fn diamond_graph(n: usize) -> (usize, Vec<(usize, usize)>) {
    let mut vertices = 2;
    let mut edges = vec![(0usize, 1usize)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(edges.len() * 4);
        for &(a, b) in &edges {
            let c = vertices;
            let d = vertices + 1;
            vertices += 2;
            next.extend_from_slice(&[(a, c), (c, b), (a, d), (d, b)]);
        }
        edges = next;
    }
    (vertices, edges)
}

/// Brute-force Gibbs sum on `Γₙ`, `n ≤ 2`, returned in the cleared form
/// `z^{|E|} t^{|E|/2} Zₙ`. Each bond contributes `t^{−σσ′/2}` (principal
/// square root) and each configuration `z^{−M}` with
/// `M = ½ Σ_{edges} (σ(v) + σ(w))`.
pub fn gibbs_oracle(n: usize, z: Complex64, t: Complex64) -> Result<Complex64> {
    if n > 2 {
        return Err(Error::Unsupported(format!(
            "gibbs_oracle enumerates spin configurations only for n <= 2 (got {n})"
        )));
    }
    if z == Complex64::new(0.0, 0.0) || t == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("gibbs_oracle requires z != 0 and t != 0".into()));
    }
    let (nv, edges) = diamond_graph(n);
    let sqrt_t = t.sqrt();
    let bond = [sqrt_t.inv(), sqrt_t];
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u32..(1u32 << nv) {
        let spin = |v: usize| if mask >> v & 1 == 0 { 1i32 } else { -1i32 };
        let mut w = Complex64::new(1.0, 0.0);
        let mut m2 = 0i32;
        for &(a, b) in &edges {
            let (sa, sb) = (spin(a), spin(b));
            w *= bond[(sa * sb == -1) as usize];
            m2 += sa + sb;
        }
        total += w * z.powi(-(m2 / 2));
    }
    let e = edges.len() as i32;
    Ok(total * z.powi(e) * sqrt_t.powi(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::geometry::ProjPoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn rel_err(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn advance_on_power_map_line() {
        let kind = SliceKind::Line {
            x0: ProjPoint::from_real(1.0, 0.0, 0.0).unwrap(),
            d: ProjPoint::from_real(0.0, 0.0, 1.0).unwrap(),
        };
        let sl = advance_slice(&make_slice(&kind).unwrap()).unwrap();
        assert_eq!(sl.degree(), 4);
        assert!(sl.p_v.is_zero());
        let u = sl.p_u.coeffs();
        let w = sl.p_w.coeffs();
        assert!((u[0] - ONE).norm() < 1e-15);
        assert!(u[1..].iter().all(|c| c.norm() < 1e-15));
        assert!((w[4] - ONE).norm() < 1e-15);
        assert!(w[..4].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn advance_on_fisher_line_stays_on_u_eq_w() {
        let sl = advance_slice(&make_slice(&SliceKind::PhysicalZ1Line).unwrap()).unwrap();
        assert_eq!(sl.degree(), 4);
        assert_eq!(sl.p_u, sl.p_w);
        let sl2 = advance_slice(&sl).unwrap();
        assert_eq!(sl2.p_u, sl2.p_w);
    }

    #[test]
    fn level_zero_examples() {
        let t = c64(0.3, 0.2);
        let ps = partition_slice(&SliceKind::PhysicalTLine { t }, 0).unwrap();
        let want = [ONE, t * 2.0, ONE];
        assert_eq!(ps.zhat.coeffs(), &want);

        let ps = partition_slice(&SliceKind::PhysicalZ1Line, 0).unwrap();
        assert_eq!(ps.zhat.coeffs(), &[c64(2.0, 0.0), c64(2.0, 0.0)]);
    }

    #[test]
    fn gibbs_oracle_small_cases() {
        let (z, t) = (c64(0.7, 0.2), c64(0.4, -0.1));
        let g0 = gibbs_oracle(0, z, t).unwrap();
        assert!(rel_err(g0, ONE + z * t * 2.0 + z * z) < 1e-14);
        let g1 = gibbs_oracle(1, ONE, ONE).unwrap();
        assert!((g1 - 16.0).norm() < 1e-12);
        assert!(matches!(gibbs_oracle(3, z, t), Err(Error::Unsupported(_))));
        let (nv, e) = diamond_graph(2);
        assert_eq!((nv, e.len()), (12, 16));
    }

    #[test]
    fn gibbs_oracle_matches_slices() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let z = Complex64::from_polar(rng.gen_range(0.3..2.0), rng.gen_range(-3.1..3.1));
            let t = Complex64::from_polar(rng.gen_range(0.3..2.0), rng.gen_range(-3.1..3.1));
            for n in 0..=2 {
                let ps = partition_slice(&SliceKind::PhysicalTLine { t }, n).unwrap();
                let val = ps.zhat.eval(z) * ps.log_scale.exp();
                let oracle = gibbs_oracle(n, z, t).unwrap();
                assert!(rel_err(val, oracle) < 1e-9, "n={n}");
            }
        }
    }

    /// `log|Y₀(R̂ⁿ(x))|` through the normalized ledger.
    fn log_abs_y0_orbit(x: Vec3, n: usize) -> f64 {
        let mut log_scale = norm3(&x).ln();
        let mut p = crate::geometry::normalize(x).unwrap();
        for _ in 0..n {
            let st = apply_hat(&p).unwrap();
            log_scale = 4.0 * log_scale + st.log_scale;
            p = st.point;
        }
        LinearForm::y0().eval(p.coords()).norm().ln() + log_scale
    }

    #[test]
    fn degree_law_and_palindromy() {
        // the top coefficients of (pU, pV, pW) evolve by R̂ itself
        let zero = Complex64::new(0.0, 0.0);
        for t in [c64(0.45, 0.0), c64(0.9, 0.0), c64(0.5, 0.5)] {
            for n in 0..=5 {
                let ps = partition_slice(&SliceKind::PhysicalTLine { t }, n).unwrap();
                assert_eq!(ps.zhat.degree(), 2 * 4usize.pow(n as u32));
                let lead = ps.zhat.leading().norm().ln() + ps.log_scale;
                let want = log_abs_y0_orbit([zero, zero, ONE], n);
                assert!((lead - want).abs() < 1e-9, "t={t} n={n}: {lead} vs {want}");
                if t.im == 0.0 {
                    let c = ps.zhat.coeffs();
                    let scale = ps.zhat.max_abs_coeff();
                    for k in 0..c.len() {
                        assert!((c[k] - c[c.len() - 1 - k]).norm() < 1e-12 * scale);
                    }
                }
            }
        }
        for n in 0..=5 {
            let pf = partition_slice(&SliceKind::PhysicalZ1Line, n).unwrap();
            assert_eq!(pf.zhat.degree(), 4usize.pow(n as u32));
            let lead = pf.zhat.leading().norm().ln() + pf.log_scale;
            let want = log_abs_y0_orbit([zero, ONE, zero], n);
            assert!((lead - want).abs() < 1e-9, "n={n}");
        }
    }

    /// `Σ|cₖ||s|ᵏ / |p(s)|`, the amplification of coefficient errors.
    fn expansion_condition(p: &CPoly, s: Complex64) -> f64 {
        let a = s.norm();
        let scale = p.coeffs().iter().rev().fold(0.0, |acc, c| acc * a + c.norm());
        scale / p.eval(s).norm()
    }

    #[test]
    fn eval_log_z_agrees_with_slices() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 0..=4 {
            let t = Complex64::from_polar(rng.gen_range(0.3..1.5), rng.gen_range(-3.0..3.0));
            let ps = partition_slice(&SliceKind::PhysicalTLine { t }, n).unwrap();
            let ev = SliceEvaluator::new(&SliceKind::PhysicalTLine { t }, n, LinearForm::y0()).unwrap();
            let mut checked = 0;
            for _ in 0..100 {
                let z = Complex64::from_polar(rng.gen_range(0.3..1.8), rng.gen_range(-3.0..3.0));
                let a = eval_log_z(z, t, n).unwrap();
                assert!((ev.eval(z).log_abs() - a).abs() < 1e-8);
                // the expanded coefficients only determine log|Ẑ| where the
                // expansion is well conditioned
                if expansion_condition(&ps.zhat, z) < 1e4 {
                    let b = ps.log_abs(z);
                    assert!((a - b).abs() < 1e-8, "n={n}: {a} vs {b}");
                    checked += 1;
                }
            }
            assert!(checked > 0);
        }
        let g1 = eval_log_z(ONE, ONE, 1).unwrap();
        assert!((g1 - 16f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn evaluator_derivative_matches_polynomial() {
        let kind = SliceKind::PhysicalZ1Line;
        let ps = partition_slice(&kind, 3).unwrap();
        let ev = SliceEvaluator::new(&kind, 3, LinearForm::y0()).unwrap();
        let s = c64(0.3, 0.4);
        let (p, dp) = ps.zhat.eval_with_derivative(s);
        let v = ev.newton_ratio(s).unwrap();
        assert!((v - p / dp).norm() < 1e-10 * (p / dp).norm());
    }

    #[test]
    fn dd_partition_matches_double() {
        let t = c64(0.5, 0.0);
        let kind = SliceKind::PhysicalTLine { t };
        let a = partition_slice(&kind, 3).unwrap();
        let b = partition_slice_dd(&kind, 3, &LinearForm::y0()).unwrap();
        assert!((a.log_scale - b.log_scale).abs() < 1e-12);
        let bd = b.to_double();
        for (x, y) in a.zhat.coeffs().iter().zip(bd.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn dd_evaluator_matches_double() {
        let kind = SliceKind::PhysicalTLine { t: c64(0.4, 0.0) };
        let a = SliceEvaluator::new(&kind, 3, LinearForm::y0()).unwrap();
        let b = a.clone().with_precision(Precision::DoubleDouble);
        for s in [c64(0.3, 0.9), c64(-1.2, 0.4)] {
            let (va, vb) = (a.eval(s), b.eval(s));
            assert!((va.log_abs() - vb.log_abs()).abs() < 1e-10);
            let (ra, rb) = (a.newton_ratio(s).unwrap(), b.newton_ratio(s).unwrap());
            assert!((ra - rb).norm() < 1e-10 * ra.norm());
        }
    }

    #[test]
    fn level_cap() {
        assert!(partition_slice(&SliceKind::PhysicalZ1Line, 7).is_err());
    }
}
