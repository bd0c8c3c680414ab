//! The Migdal–Kadanoff map `R̂(U,V,W) = ((U²+V²)², V²(U+W)², (V²+W²)²)`,
//! its physical conjugate, the zero-field Fisher map and their local theory.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{chordal_dist, conj_cross, hdot, norm3, normalize, PhysPoint, ProjPoint, Vec3};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `‖R̂(X)‖` below this on the unit sphere triggers the indeterminacy checks.
pub const UNDERFLOW_GUARD: f64 = 1e-14;
/// Chordal radius around `a±` inside which a vanishing image is `Indeterminate`.
pub const INDETERMINACY_RADIUS: f64 = 1e-4;

/// The homogeneous degree-4 map on `C³`. Symmetric under `U ↔ W` bitwise.
#[inline]
pub fn hat(x: &Vec3) -> Vec3 {
    let (u2, v2, w2) = (x[0] * x[0], x[1] * x[1], x[2] * x[2]);
    let a = u2 + v2;
    let c = v2 + w2;
    let s = x[0] + x[2];
    [a * a, v2 * (s * s), c * c]
}

/// `R̂` together with its derivative applied to `dx`.
#[inline]
pub fn hat_with_tangent(x: &Vec3, dx: &Vec3) -> (Vec3, Vec3) {
    let (u, v, w) = (x[0], x[1], x[2]);
    let (du, dv, dw) = (dx[0], dx[1], dx[2]);
    let a = u * u + v * v;
    let c = v * v + w * w;
    let s = u + w;
    let da = (u * du + v * dv) * 2.0;
    let dc = (v * dv + w * dw) * 2.0;
    let ds = du + dw;
    let v2 = v * v;
    let s2 = s * s;
    let y = [a * a, v2 * s2, c * c];
    let dy = [a * da * 2.0, (v * dv * s2 + v2 * s * ds) * 2.0, c * dc * 2.0];
    (y, dy)
}

/// The 3×3 Jacobian `∂R̂ᵢ/∂Xⱼ`.
pub fn hat_jacobian(x: &Vec3) -> [[Complex64; 3]; 3] {
    let (u, v, w) = (x[0], x[1], x[2]);
    let a = u * u + v * v;
    let c = v * v + w * w;
    let s = u + w;
    let four = 4.0;
    [
        [a * u * four, a * v * four, ZERO],
        [v * v * s * 2.0, v * s * s * 2.0, v * v * s * 2.0],
        [ZERO, c * v * four, c * w * four],
    ]
}

/// Closed form `det DR̂ = 32·(U²+V²)(V²+W²)·V·(U+W)²·(UW − V²)`.
pub fn hat_jacobian_det(x: &Vec3) -> Complex64 {
    let (u, v, w) = (x[0], x[1], x[2]);
    let s = u + w;
    (u * u + v * v) * (v * v + w * w) * v * s * s * (u * w - v * v) * 32.0
}

/// Result of one normalized application of `R̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapStepResult {
    pub point: ProjPoint,
    /// `log ‖R̂(X)‖` for the unit representative `X`.
    #[serde(rename = "logScale")]
    pub log_scale: f64,
}

/// Named points of the dynamics.
pub struct FixedPointCatalog;

impl FixedPointCatalog {
    /// `e = [1:0:0]`, superattracting.
    pub fn e() -> ProjPoint {
        ProjPoint::from_unit([ONE, ZERO, ZERO])
    }
    /// `e′ = [0:0:1]`, superattracting.
    pub fn e_prime() -> ProjPoint {
        ProjPoint::from_unit([ZERO, ZERO, ONE])
    }
    /// `β₀ = [1:0:1]`, the saddle onto which `L₂` collapses.
    pub fn beta0() -> ProjPoint {
        normalize([ONE, ZERO, ONE]).unwrap()
    }
    /// `β₁ = [1:1:1]`, the ferromagnetic fixed point on `{U = W}`.
    pub fn beta1() -> ProjPoint {
        normalize([ONE, ONE, ONE]).unwrap()
    }
    /// `a₊ = [i:1:−i]`, indeterminate.
    pub fn a_plus() -> ProjPoint {
        normalize([I, ONE, -I]).unwrap()
    }
    /// `a₋ = [−i:1:i]`, indeterminate.
    pub fn a_minus() -> ProjPoint {
        normalize([-I, ONE, I]).unwrap()
    }
    /// `𝟘 = [0:1:0]`, the affine origin; `R(𝟘) = β₀`.
    pub fn zero_point() -> ProjPoint {
        ProjPoint::from_unit([ZERO, ONE, ZERO])
    }
}

/// Chordal distance to the nearer indeterminacy point.
pub fn dist_to_indeterminacy(x: &ProjPoint) -> f64 {
    chordal_dist(x, &FixedPointCatalog::a_plus()).min(chordal_dist(x, &FixedPointCatalog::a_minus()))
}

/// `R` on `CP²` with the log-norm of the unnormalized image.
pub fn apply_hat(x: &ProjPoint) -> Result<MapStepResult> {
    let y = hat(x.coords());
    let n = norm3(&y);
    if !(n >= UNDERFLOW_GUARD) {
        if dist_to_indeterminacy(x) < INDETERMINACY_RADIUS {
            return Err(Error::Indeterminate);
        }
        return Err(Error::NumericalUnderflow { norm: n });
    }
    let point = ProjPoint::from_unit([y[0] / n, y[1] / n, y[2] / n]);
    Ok(MapStepResult {
        point,
        log_scale: n.ln(),
    })
}

/// The physical renormalization map
/// `(z,t) ↦ ((z²+t²)/(z⁻²+t²), (z²+z⁻²+2)/(z²+z⁻²+t²+t⁻²))`.
pub fn apply_phys(p: &PhysPoint) -> Result<PhysPoint> {
    let (z, t) = (p.z, p.t);
    if z == ZERO || t == ZERO {
        return Err(Error::Domain("apply_phys requires z != 0 and t != 0".into()));
    }
    let z2 = z * z;
    let t2 = t * t;
    let zi2 = z2.inv();
    let ti2 = t2.inv();
    let d1 = zi2 + t2;
    if d1 == ZERO {
        return Err(Error::Domain("vanishing denominator z^-2 + t^2".into()));
    }
    let d2 = z2 + zi2 + t2 + ti2;
    if d2 == ZERO {
        return Err(Error::Domain("vanishing denominator z^2 + z^-2 + t^2 + t^-2".into()));
    }
    Ok(PhysPoint {
        z: (z2 + t2) / d1,
        t: (z2 + zi2 + 2.0) / d2,
    })
}

/// Degree-6 homogeneous lift of the physical map in coordinates
/// `[Z:T:Y]` with `z = Z/Y`, `t = T/Y`:
/// `(Z²(Z²+T²)², T²(Z²+Y²)², (Z²+T²)(Y⁴+Z²T²))`.
pub fn phys_hat(x: &Vec3) -> Vec3 {
    let (z2, t2, y2) = (x[0] * x[0], x[1] * x[1], x[2] * x[2]);
    let zt = z2 + t2;
    let zy = z2 + y2;
    [z2 * zt * zt, t2 * zy * zy, zt * (y2 * y2 + z2 * t2)]
}

/// `t ↦ (2t/(t²+1))²`, the restriction to the zero-field line.
pub fn fisher_1d(t: Complex64) -> Result<Complex64> {
    let den = t * t + 1.0;
    if den.norm() <= 1e-15 * (1.0 + t.norm_sqr()) {
        return Err(Error::Pole(t));
    }
    let g = t * 2.0 / den;
    Ok(g * g)
}

fn fisher_newton_polish(mut t: Complex64, target: Complex64) -> Complex64 {
    for _ in 0..4 {
        let den = t * t + 1.0;
        if den == ZERO {
            break;
        }
        let g = t * 2.0 / den;
        let dg = (ONE - t * t) * 2.0 / (den * den);
        let df = g * dg * 2.0;
        let f = g * g - target;
        if df.norm() < 1e-300 || f == ZERO {
            break;
        }
        let step = f / df;
        let cand = t - step;
        let cand_f = fisher_1d(cand).map(|v| (v - target).norm()).unwrap_or(f64::INFINITY);
        if cand_f < f.norm() {
            t = cand;
        } else {
            break;
        }
    }
    t
}

/// All finite `t` with `fisher_1d(t) = target`, repeated by multiplicity.
pub fn fisher_1d_preimages(target: Complex64) -> Vec<Complex64> {
    let root = target.sqrt();
    let mut out = Vec::with_capacity(4);
    for m in [root, -root] {
        // m t² − 2t + m = 0; roots are reciprocal, t₁t₂ = 1
        if m == ZERO {
            out.push(ZERO);
            continue;
        }
        let disc = (ONE - m * m).sqrt();
        let qa = ONE + disc;
        let qb = ONE - disc;
        let q = if qa.norm() >= qb.norm() { qa } else { qb };
        let t1 = q / m;
        let t2 = m / q;
        for t in [t1, t2] {
            out.push(fisher_newton_polish(t, target));
        }
    }
    out
}

/// Induced derivative of `R` on `CP²` in orthonormal frames of `X^⊥` and `R̂(X)^⊥`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TangentMap {
    pub matrix: [[Complex64; 2]; 2],
    pub det: Complex64,
}

impl TangentMap {
    /// Singular values `(σ_max, σ_min)`.
    pub fn singular_values(&self) -> (f64, f64) {
        let f: f64 = self.matrix.iter().flatten().map(|c| c.norm_sqr()).sum();
        let d = self.det.norm();
        let disc = (f * f - 4.0 * d * d).max(0.0).sqrt();
        let smax = ((f + disc) / 2.0).sqrt();
        let smin = if smax > 0.0 { d / smax } else { 0.0 };
        (smax, smin)
    }
}

/// An orthonormal frame `(e₁, e₂)` of the Hermitian complement of unit `x`,
/// chosen deterministically from the coordinate axis least aligned with `x`.
pub fn complement_frame(x: &Vec3) -> (Vec3, Vec3) {
    let mut k = 0;
    for i in 1..3 {
        if x[i].norm() < x[k].norm() {
            k = i;
        }
    }
    let mut b = [ZERO; 3];
    b[k] = ONE;
    let proj = hdot(&b, x);
    let mut e1 = [b[0] - proj * x[0], b[1] - proj * x[1], b[2] - proj * x[2]];
    let n = norm3(&e1);
    for c in e1.iter_mut() {
        *c /= n;
    }
    let e2 = conj_cross(x, &e1);
    (e1, e2)
}

/// Derivative of `R` at `x` in Fubini–Study orthonormal frames.
pub fn tangent_jacobian(x: &ProjPoint) -> Result<TangentMap> {
    let xc = x.coords();
    let y = hat(xc);
    let n = norm3(&y);
    if !(n >= UNDERFLOW_GUARD) {
        if dist_to_indeterminacy(x) < INDETERMINACY_RADIUS {
            return Err(Error::Indeterminate);
        }
        return Err(Error::NumericalUnderflow { norm: n });
    }
    let yu = [y[0] / n, y[1] / n, y[2] / n];
    let jac = hat_jacobian(xc);
    let (e1, e2) = complement_frame(xc);
    let (f1, f2) = complement_frame(&yu);
    let apply = |v: &Vec3| -> Vec3 {
        let mut out = [ZERO; 3];
        for (i, row) in jac.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    };
    let je1 = apply(&e1);
    let je2 = apply(&e2);
    let m = [
        [hdot(&je1, &f1) / n, hdot(&je2, &f1) / n],
        [hdot(&je1, &f2) / n, hdot(&je2, &f2) / n],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Ok(TangentMap { matrix: m, det })
}

/// Preimages of a target point.
#[derive(Debug, Clone, Serialize)]
pub struct InverseFiber {
    /// One entry per branch slot that produced a genuine preimage.
    pub branches: Vec<ProjPoint>,
    /// Slots that landed on `a±` (target on the image conic of the blow-up).
    pub indeterminate_slots: usize,
    /// True when two or more branches coincide (target is a critical value).
    pub degenerate: bool,
}

/// Relative threshold under which a branch factor `a + c ± 2δ` is treated as
/// zero, i.e. the branch is the blown-up indeterminacy point.
const BRANCH_COLLAPSE_TOL: f64 = 1e-10;

/// All preimages of `target` under `R`.
///
/// For `target = [A:B:C]` fix `a = √A`; for each sign class `(b, c) =
/// (±√B, ±√C)` the pencil of conics `b(U²+V²) = aV(U+W)`,
/// `c(U²+V²) = a(V²+W²)` meets in `a±` and the two points
/// `X = (a ± δ, b, c ± δ)` with `δ = √(ac − b²)`, for which
/// `(U²+V², V(U+W), V²+W²) = (a+c±2δ)·(a, b, c)`. This is the quartic of the
/// affine elimination with its roots `u = ±i` deflated, written
/// homogeneously so that no chart is singular.
pub fn inverse_branches(target: &ProjPoint) -> Result<InverseFiber> {
    if chordal_dist(target, &FixedPointCatalog::beta0()) < 1e-12 {
        return Err(Error::InfiniteFiber);
    }
    let t = target.coords();
    let a = t[0].sqrt();
    let sb = t[1].sqrt();
    let sc = t[2].sqrt();
    let mut branches = Vec::with_capacity(8);
    let mut indeterminate_slots = 0;
    for b in [sb, -sb] {
        for c in [sc, -sc] {
            let delta = (a * c - b * b).sqrt();
            let scale = a.norm() + b.norm() + c.norm();
            for sgn in [1.0, -1.0] {
                let d = delta * sgn;
                let factor = a + c + d * 2.0;
                if factor.norm() <= BRANCH_COLLAPSE_TOL * scale {
                    indeterminate_slots += 1;
                    continue;
                }
                let raw = [a + d, b, c + d];
                match normalize(raw) {
                    Ok(p) => {
                        let p = newton_polish_preimage(&p, target);
                        if dist_to_indeterminacy(&p) < 1e-8 {
                            indeterminate_slots += 1;
                        } else {
                            branches.push(p);
                        }
                    }
                    Err(_) => indeterminate_slots += 1,
                }
            }
        }
    }
    let mut degenerate = false;
    'outer: for i in 0..branches.len() {
        for j in i + 1..branches.len() {
            if chordal_dist(&branches[i], &branches[j]) < 1e-7 {
                degenerate = true;
                break 'outer;
            }
        }
    }
    Ok(InverseFiber {
        branches,
        indeterminate_slots,
        degenerate,
    })
}

fn preimage_residual(x: &Vec3, target: &ProjPoint) -> f64 {
    let y = hat(x);
    let n = norm3(&y);
    if n == 0.0 {
        return f64::INFINITY;
    }
    let yu = [y[0] / n, y[1] / n, y[2] / n];
    crate::geometry::wedge_norm(&yu, target.coords())
}

/// One Newton step on `R̂(X) ∧ T = 0` in the affine chart of the largest
/// coordinate of `X`; kept only if it lowers the chordal residual.
fn newton_polish_preimage(p: &ProjPoint, target: &ProjPoint) -> ProjPoint {
    let x = p.coords();
    let t = target.coords();
    let k = (0..3).max_by(|&i, &j| x[i].norm().total_cmp(&x[j].norm())).unwrap();
    let j = (0..3).max_by(|&i, &l| t[i].norm().total_cmp(&t[l].norm())).unwrap();
    let xs = [x[0] / x[k], x[1] / x[k], x[2] / x[k]];
    let free: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    let rows: Vec<usize> = (0..3).filter(|&i| i != j).collect();
    let y = hat(&xs);
    let jac = hat_jacobian(&xs);
    let mut f = [ZERO; 2];
    let mut m = [[ZERO; 2]; 2];
    for (r, &i) in rows.iter().enumerate() {
        f[r] = y[i] * t[j] - y[j] * t[i];
        for (col, &v) in free.iter().enumerate() {
            m[r][col] = jac[i][v] * t[j] - jac[j][v] * t[i];
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() < 1e-300 {
        return *p;
    }
    let dx0 = (m[1][1] * f[0] - m[0][1] * f[1]) / det;
    let dx1 = (m[0][0] * f[1] - m[1][0] * f[0]) / det;
    let mut cand = xs;
    cand[free[0]] -= dx0;
    cand[free[1]] -= dx1;
    let before = preimage_residual(&xs, target);
    let after = preimage_residual(&cand, target);
    if after < before {
        normalize(cand).unwrap_or(*p)
    } else {
        *p
    }
}

/// Image of the exceptional divisor over `a₊` at parameter `χ`:
/// `u = (2i/(1+χ))²`, `w = (−2iχ/(1+χ))²`, returned as `[u:1:w]`.
pub fn blowup_image(chi: Complex64) -> Result<ProjPoint> {
    let den = ONE + chi;
    if den.norm() < 1e-300 {
        return Err(Error::Domain("blowup_image undefined at chi = -1".into()));
    }
    let u = I * 2.0 / den;
    let w = -I * 2.0 * chi / den;
    normalize([u * u, ONE, w * w])
}

/// `(u−w)² + 8(u+w) + 16` in the affine chart `u = U/V`, `w = W/V`.
pub fn image_conic_residual(u: Complex64, w: Complex64) -> Complex64 {
    (u - w) * (u - w) + (u + w) * 8.0 + 16.0
}

/// The seven curves of the critical locus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum CriticalCurve {
    /// `{V = 0}`, the line at infinity.
    L0,
    /// `{UW = V²}`.
    L1,
    /// `{U = −W}`, the collapsing line.
    L2,
    /// `{U = iV}`.
    L3Plus,
    /// `{U = −iV}`.
    L3Minus,
    /// `{W = iV}`.
    L4Plus,
    /// `{W = −iV}`.
    L4Minus,
}

impl CriticalCurve {
    pub const ALL: [CriticalCurve; 7] = [
        CriticalCurve::L0,
        CriticalCurve::L1,
        CriticalCurve::L2,
        CriticalCurve::L3Plus,
        CriticalCurve::L3Minus,
        CriticalCurve::L4Plus,
        CriticalCurve::L4Minus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CriticalCurve::L0 => "L0",
            CriticalCurve::L1 => "L1",
            CriticalCurve::L2 => "L2",
            CriticalCurve::L3Plus => "L3+",
            CriticalCurve::L3Minus => "L3-",
            CriticalCurve::L4Plus => "L4+",
            CriticalCurve::L4Minus => "L4-",
        }
    }

    /// Defining homogeneous polynomial.
    pub fn implicit(&self, x: &Vec3) -> Complex64 {
        let (u, v, w) = (x[0], x[1], x[2]);
        match self {
            CriticalCurve::L0 => v,
            CriticalCurve::L1 => u * w - v * v,
            CriticalCurve::L2 => u + w,
            CriticalCurve::L3Plus => u - I * v,
            CriticalCurve::L3Minus => u + I * v,
            CriticalCurve::L4Plus => w - I * v,
            CriticalCurve::L4Minus => w + I * v,
        }
    }

    /// Gradient of [`Self::implicit`].
    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        let (u, v, w) = (x[0], x[1], x[2]);
        match self {
            CriticalCurve::L0 => [ZERO, ONE, ZERO],
            CriticalCurve::L1 => [w, -v * 2.0, u],
            CriticalCurve::L2 => [ONE, ZERO, ONE],
            CriticalCurve::L3Plus => [ONE, -I, ZERO],
            CriticalCurve::L3Minus => [ONE, I, ZERO],
            CriticalCurve::L4Plus => [ZERO, -I, ONE],
            CriticalCurve::L4Minus => [ZERO, I, ONE],
        }
    }

    /// Rational parametrization by an affine parameter `s`.
    pub fn param(&self, s: Complex64) -> Vec3 {
        match self {
            CriticalCurve::L0 => [ONE, ZERO, s],
            CriticalCurve::L1 => [ONE, s, s * s],
            CriticalCurve::L2 => [ONE, s, -ONE],
            CriticalCurve::L3Plus => [I, ONE, s],
            CriticalCurve::L3Minus => [-I, ONE, s],
            CriticalCurve::L4Plus => [s, ONE, I],
            CriticalCurve::L4Minus => [s, ONE, -I],
        }
    }

    /// First-order distance of unit `x` to the curve: `|F(x)| / ‖∇F(x)‖`.
    pub fn distance(&self, x: &ProjPoint) -> f64 {
        let c = x.coords();
        let g = self.gradient(c);
        // tangential part of the gradient along x does not move off the curve
        let proj = hdot(&g, c);
        let gt = [g[0] - proj * c[0], g[1] - proj * c[1], g[2] - proj * c[2]];
        let gn = norm3(&gt).max(1e-300);
        self.implicit(c).norm() / gn
    }

    /// Unit normal direction at `x` (Hermitian complement of the tangent).
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        let g = self.gradient(x);
        let mut n = [g[0].conj(), g[1].conj(), g[2].conj()];
        let proj = hdot(&n, x);
        for i in 0..3 {
            n[i] -= proj * x[i];
        }
        let m = norm3(&n);
        [n[0] / m, n[1] / m, n[2] / m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::geometry::psi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng) -> ProjPoint {
        normalize([
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ])
        .unwrap()
    }

    #[test]
    fn apply_hat_examples() {
        let r = apply_hat(&FixedPointCatalog::e()).unwrap();
        assert!(chordal_dist(&r.point, &FixedPointCatalog::e()) < 1e-16);
        assert_eq!(r.log_scale, 0.0);

        assert!(matches!(apply_hat(&FixedPointCatalog::a_plus()), Err(Error::Indeterminate)));
        assert!(matches!(apply_hat(&FixedPointCatalog::a_minus()), Err(Error::Indeterminate)));

        let xi = c64(0.4, -0.3);
        let r = apply_hat(&normalize([ONE, ZERO, xi]).unwrap()).unwrap();
        let want = normalize([ONE, ZERO, xi.powu(4)]).unwrap();
        assert!(chordal_dist(&r.point, &want) < 1e-15);

        let r = apply_hat(&FixedPointCatalog::zero_point()).unwrap();
        assert!(chordal_dist(&r.point, &FixedPointCatalog::beta0()) < 1e-16);
    }

    #[test]
    fn fixed_point_catalog() {
        for p in [
            FixedPointCatalog::e(),
            FixedPointCatalog::e_prime(),
            FixedPointCatalog::beta0(),
            FixedPointCatalog::beta1(),
        ] {
            let r = apply_hat(&p).unwrap();
            assert!(chordal_dist(&r.point, &p) < 1e-15);
        }
        for p in [FixedPointCatalog::a_plus(), FixedPointCatalog::a_minus()] {
            assert!(norm3(&hat(p.coords())) < 1e-15);
        }
        // the collapsing line goes to beta0
        let x = normalize([c64(0.3, 0.2), c64(-1.1, 0.5), c64(-0.3, -0.2)]).unwrap();
        let r = apply_hat(&x).unwrap();
        assert!(chordal_dist(&r.point, &FixedPointCatalog::beta0()) < 1e-15);
    }

    #[test]
    fn underflow_away_from_indeterminacy_is_distinguished() {
        // a point near a+ but outside the guard ball has a tiny but nonzero image
        let a = FixedPointCatalog::a_plus();
        let p = normalize([a.u() + 1e-9, a.v(), a.w()]).unwrap();
        assert!(matches!(apply_hat(&p), Err(Error::Indeterminate)));
    }

    #[test]
    fn apply_phys_examples() {
        let t = c64(0.35, 0.1);
        let r = apply_phys(&PhysPoint::new(ONE, t)).unwrap();
        assert!((r.z - ONE).norm() < 1e-15);
        let g = t * 2.0 / (t * t + 1.0);
        assert!((r.t - g * g).norm() < 1e-15);

        let r = apply_phys(&PhysPoint::new(ONE, ONE)).unwrap();
        assert!((r.z - ONE).norm() < 1e-15 && (r.t - ONE).norm() < 1e-15);

        assert!(apply_phys(&PhysPoint::new(ZERO, ONE)).is_err());
        // z^-2 + t^2 = 0 at z = 1, t = i
        assert!(apply_phys(&PhysPoint::new(ONE, I)).is_err());
    }

    #[test]
    fn semiconjugacy_and_phys_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let z = Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(0.0..6.28));
            let t = Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(0.0..6.28));
            let p = PhysPoint::new(z, t);
            let lhs = psi(&apply_phys(&p).unwrap()).unwrap();
            let rhs = apply_hat(&psi(&p).unwrap()).unwrap().point;
            assert!(chordal_dist(&lhs, &rhs) < 1e-10);

            let q = apply_phys(&p).unwrap();
            let l = phys_hat(&[z, t, ONE]);
            assert!((l[0] / l[2] - q.z).norm() < 1e-10 * q.z.norm().max(1.0));
            assert!((l[1] / l[2] - q.t).norm() < 1e-10 * q.t.norm().max(1.0));
        }
    }

    #[test]
    fn rho_equivariance_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = random_point(&mut rng);
            let a = apply_hat(&x.swap_uw()).unwrap();
            let b = apply_hat(&x).unwrap();
            assert_eq!(a.point.coords(), b.point.swap_uw().coords());
            assert_eq!(a.log_scale, b.log_scale);
        }
    }

    #[test]
    fn fisher_line_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let s = c64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let y = hat(&[ONE, s, ONE]);
            assert_eq!(y[0], y[2]);
            let f = fisher_1d(s).unwrap();
            assert!((y[1] / y[0] - f).norm() < 1e-12 * f.norm().max(1.0));
        }
    }

    #[test]
    fn fisher_examples() {
        assert_eq!(fisher_1d(ZERO).unwrap(), ZERO);
        assert!((fisher_1d(ONE).unwrap() - ONE).norm() < 1e-16);
        assert!((fisher_1d(-ONE).unwrap() - ONE).norm() < 1e-16);
        assert!(matches!(fisher_1d(I), Err(Error::Pole(_))));

        let pre = fisher_1d_preimages(ZERO);
        assert_eq!(pre, vec![ZERO, ZERO]);

        let pre = fisher_1d_preimages(ONE);
        assert!(pre.iter().any(|t| (t - ONE).norm() < 1e-7));
        assert!(pre.iter().any(|t| (t + ONE).norm() < 1e-7));

        let pre = fisher_1d_preimages(-ONE);
        assert_eq!(pre.len(), 4);
        for (i, t) in pre.iter().enumerate() {
            assert!((fisher_1d(*t).unwrap() + ONE).norm() < 1e-12);
            for s in &pre[i + 1..] {
                assert!((t - s).norm() > 1e-3);
            }
        }
    }

    #[test]
    fn jacobian_determinant_formula_matches_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let x = *random_point(&mut rng).coords();
            let j = hat_jacobian(&x);
            let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
            assert!((det - hat_jacobian_det(&x)).norm() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = *random_point(&mut rng).coords();
        let j = hat_jacobian(&x);
        let h = 1e-6;
        for col in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let (yp, ym) = (hat(&xp), hat(&xm));
            for row in 0..3 {
                let fd = (yp[row] - ym[row]) / (2.0 * h);
                assert!((fd - j[row][col]).norm() < 1e-8);
            }
        }
        let dx = [c64(0.1, 0.2), c64(-0.3, 0.05), c64(0.7, -0.4)];
        let (_, dy) = hat_with_tangent(&x, &dx);
        for row in 0..3 {
            let lin = j[row][0] * dx[0] + j[row][1] * dx[1] + j[row][2] * dx[2];
            assert!((lin - dy[row]).norm() < 1e-14);
        }
    }

    #[test]
    fn tangent_determinant_relates_to_cubic_determinant() {
        // |det DR̂| = 4‖R̂(X)‖³ |det T| for unit X (Euler relation)
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x = random_point(&mut rng);
            let tm = tangent_jacobian(&x).unwrap();
            let n = norm3(&hat(x.coords()));
            let lhs = hat_jacobian_det(x.coords()).norm();
            assert!((lhs - 4.0 * n.powi(3) * tm.det.norm()).abs() < 1e-10 * lhs.max(1e-3));
        }
    }

    #[test]
    fn tangent_jacobian_examples() {
        let x = normalize(CriticalCurve::L1.param(c64(0.7, -0.4))).unwrap();
        assert!(tangent_jacobian(&x).unwrap().det.norm() < 1e-8);
        // β₁ satisfies UW = V², so it sits on L₁
        let b1 = tangent_jacobian(&FixedPointCatalog::beta1()).unwrap();
        assert!(b1.det.norm() < 1e-12);
        let generic = normalize([c64(0.8, 0.1), c64(0.3, -0.5), c64(-0.2, 0.6)]).unwrap();
        assert!(tangent_jacobian(&generic).unwrap().det.norm() > 1e-6);
        assert!(matches!(tangent_jacobian(&FixedPointCatalog::a_plus()), Err(Error::Indeterminate)));
    }

    #[test]
    fn inverse_branches_recover_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = random_point(&mut rng);
            let target = apply_hat(&x).unwrap().point;
            let fib = inverse_branches(&target).unwrap();
            assert_eq!(fib.branches.len(), 8);
            assert!(!fib.degenerate);
            assert!(fib.branches.iter().any(|b| chordal_dist(b, &x) < 1e-9));
            for b in &fib.branches {
                let img = apply_hat(b).unwrap().point;
                assert!(chordal_dist(&img, &target) < 1e-9);
            }
        }
    }

    #[test]
    fn inverse_branches_special_targets() {
        assert!(matches!(
            inverse_branches(&FixedPointCatalog::beta0()),
            Err(Error::InfiniteFiber)
        ));
        // a point of L0 has all of its preimages in L0, each of multiplicity two
        let t = normalize([ONE, ZERO, c64(0.3, 0.4)]).unwrap();
        let fib = inverse_branches(&t).unwrap();
        assert_eq!(fib.branches.len(), 8);
        assert!(fib.degenerate);
        for b in &fib.branches {
            assert!(b.v().norm() < 1e-12);
        }
        // a point on the image conic has a branch through a±
        let g = blowup_image(c64(0.3, -0.2)).unwrap();
        let fib = inverse_branches(&g).unwrap();
        assert!(fib.indeterminate_slots >= 1);
        for b in &fib.branches {
            assert!(chordal_dist(&apply_hat(b).unwrap().point, &g) < 1e-9);
        }
    }

    #[test]
    fn blowup_image_examples() {
        let p = blowup_image(ZERO).unwrap();
        let (u, w) = (p.u() / p.v(), p.w() / p.v());
        assert!((u + 4.0).norm() < 1e-14 && w.norm() < 1e-14);
        assert!(image_conic_residual(u, w).norm() < 1e-13);
        let p = blowup_image(ONE).unwrap();
        let (u, w) = (p.u() / p.v(), p.w() / p.v());
        assert!((u + 1.0).norm() < 1e-14 && (w + 1.0).norm() < 1e-14);
        assert!(blowup_image(-ONE).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let chi = c64(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let p = blowup_image(chi).unwrap();
            let (u, w) = (p.u() / p.v(), p.w() / p.v());
            assert!(image_conic_residual(u, w).norm() < 1e-10 * (1.0 + u.norm_sqr() + w.norm_sqr()));
        }
    }

    #[test]
    fn blowup_image_is_the_limit_of_r_near_a_plus() {
        // approach a+ along the direction of slope chi in the chart (u, w)
        let chi = c64(0.6, 0.3);
        let xi = 1e-5;
        let u = I + xi;
        let w = -I + chi * xi;
        let r = apply_hat(&normalize([u, ONE, w]).unwrap()).unwrap().point;
        let want = blowup_image(chi).unwrap();
        assert!(chordal_dist(&r, &want) < 1e-5);
    }

    #[test]
    fn critical_curve_parametrizations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for curve in CriticalCurve::ALL {
            for _ in 0..100 {
                let s = c64(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let x = normalize(curve.param(s)).unwrap();
                assert!(curve.implicit(x.coords()).norm() < 1e-12, "{}", curve.name());
                assert!(hat_jacobian_det(x.coords()).norm() < 1e-12);
            }
        }
    }
}
