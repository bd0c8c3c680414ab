//! Simultaneous root finding and zero distributions.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dd::{DdPoly, Precision};
use crate::error::{Error, Result};
use crate::geometry::{make_slice, LinearForm, RationalSlice, SliceKind};
use crate::poly::CPoly;
use crate::renorm::fisher_1d_preimages;
use crate::slice::{advance_slice_n, SliceEvaluator};

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Anything that provides a Newton correction `f/f′` for a function whose
/// zeros are those of a polynomial of known degree.
pub trait NewtonTarget: Sync {
    fn degree(&self) -> usize;
    /// `f(s)/f′(s)`, or `None` where the derivative vanishes.
    fn newton_ratio(&self, s: Complex64) -> Option<Complex64>;
    /// Forward residual, scaled to be comparable with `f64::EPSILON`.
    fn residual(&self, s: Complex64) -> f64;
    /// Default radius of the starting ring.
    fn ring_radius(&self) -> f64 {
        1.0
    }
}

impl NewtonTarget for CPoly {
    fn degree(&self) -> usize {
        CPoly::degree(self)
    }
    fn newton_ratio(&self, s: Complex64) -> Option<Complex64> {
        CPoly::newton_ratio(self, s)
    }
    fn residual(&self, s: Complex64) -> f64 {
        self.relative_residual(s)
    }
    fn ring_radius(&self) -> f64 {
        let a0 = self.coeffs()[0].norm();
        let ad = self.leading().norm();
        let d = CPoly::degree(self) as f64;
        let r = (a0 / ad).powf(1.0 / d);
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    }
}

impl NewtonTarget for DdPoly {
    fn degree(&self) -> usize {
        DdPoly::degree(self)
    }
    fn newton_ratio(&self, s: Complex64) -> Option<Complex64> {
        DdPoly::newton_ratio(self, s)
    }
    fn residual(&self, s: Complex64) -> f64 {
        self.to_cpoly().relative_residual(s)
    }
    fn ring_radius(&self) -> f64 {
        NewtonTarget::ring_radius(&self.to_cpoly())
    }
}

impl NewtonTarget for SliceEvaluator {
    fn degree(&self) -> usize {
        SliceEvaluator::degree(self)
    }
    fn newton_ratio(&self, s: Complex64) -> Option<Complex64> {
        SliceEvaluator::newton_ratio(self, s)
    }
    /// The smaller of `|Y(x)|/‖Y‖` at the unit-normalized image point and
    /// the relative Newton correction `|f/f′|/(1+|s|)`. Near the Julia set
    /// `f′` is so large that a correctly rounded root still has a sizeable
    /// forward residual; the Newton correction is then the honest measure
    /// of its distance to the true zero.
    fn residual(&self, s: Complex64) -> f64 {
        let v = self.eval(s);
        let forward = v.y.norm() / self.form_norm();
        let step = if v.dy.norm() > 0.0 && v.dy.is_finite() {
            (v.y / v.dy).norm() / (1.0 + s.norm())
        } else {
            f64::INFINITY
        };
        forward.min(step)
    }
}

/// Root-finder settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AberthOptions {
    pub seed: u64,
    pub max_iter: usize,
    /// A root is frozen once its correction is below `tol·(1 + |z|)`.
    pub tol: f64,
    /// Roots closer than this are merged into a cluster.
    pub cluster_tol: f64,
    pub polish_steps: usize,
    /// Starting ring radius; `None` uses the target's default.
    pub ring_radius: Option<f64>,
    /// Residual above which the solve is reported as not converged.
    pub residual_cap: f64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iter: 1000,
            tol: 1e-14,
            cluster_tol: 1e-7,
            polish_steps: 3,
            ring_radius: None,
            residual_cap: 1e-9,
        }
    }
}

/// A group of roots within the cluster tolerance of each other.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub residuals: Vec<f64>,
    /// Only clusters with multiplicity above one.
    pub clusters: Vec<RootCluster>,
    pub iterations: usize,
    pub max_residual: f64,
}

impl RootSet {
    /// Equal-weight measure on the roots, with clustered roots merged.
    pub fn measure(&self, cluster_tol: f64) -> EmpiricalMeasure {
        let groups = cluster_indices(&self.roots, cluster_tol);
        let d = self.roots.len() as f64;
        let mut points = Vec::with_capacity(groups.len());
        let mut weights = Vec::with_capacity(groups.len());
        for g in groups {
            let c = g.iter().map(|&i| self.roots[i]).sum::<Complex64>() / g.len() as f64;
            points.push(c);
            weights.push(g.len() as f64 / d);
        }
        EmpiricalMeasure { points, weights }
    }
}

/// Union-find grouping of points closer than `tol`, in index order.
fn cluster_indices(points: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// All roots of a polynomial by Aberth–Ehrlich iteration.
pub fn aberth_solve(p: &CPoly, opts: &AberthOptions) -> Result<RootSet> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::InvalidArgument("aberth_solve needs degree >= 1".into()));
    }
    let lead = p.leading().norm();
    if !(lead > 1e-300 * p.max_abs_coeff()) {
        return Err(Error::InvalidArgument(
            "leading coefficient vanishes; trim the polynomial first".into(),
        ));
    }
    aberth_solve_target(p, opts)
}

/// Aberth–Ehrlich on any [`NewtonTarget`]: Jacobi sweeps parallel over root
/// indices, then Newton polishing and cluster detection.
pub fn aberth_solve_target<T: NewtonTarget + ?Sized>(target: &T, opts: &AberthOptions) -> Result<RootSet> {
    let d = target.degree();
    if d == 0 {
        return Err(Error::InvalidArgument("degree-0 target has no roots".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let offset: f64 = rng.gen_range(0.0..TAU);
    let r0 = opts.ring_radius.unwrap_or_else(|| target.ring_radius());
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let jitter = 1.0 + 0.02 * (rng.gen::<f64>() - 0.5);
            Complex64::from_polar(r0 * jitter, offset + GOLDEN_ANGLE * k as f64)
        })
        .collect();
    let mut active = vec![true; d];
    let mut iterations = 0;
    while iterations < opts.max_iter && active.iter().any(|&a| a) {
        iterations += 1;
        let old = &z;
        let updates: Vec<Option<Complex64>> = (0..d)
            .into_par_iter()
            .with_min_len(16)
            .map(|i| {
                if !active[i] {
                    return None;
                }
                let zi = old[i];
                let n = match target.newton_ratio(zi) {
                    Some(n) if n.is_finite() => n,
                    _ => return Some(zi * Complex64::new(1.0, 1e-7) + 1e-9),
                };
                let mut sum = Complex64::new(0.0, 0.0);
                for (j, &zj) in old.iter().enumerate() {
                    if j != i {
                        sum += (zi - zj).inv();
                    }
                }
                let den = Complex64::new(1.0, 0.0) - n * sum;
                let w = if den.norm() > 0.0 && den.is_finite() { n / den } else { n };
                Some(zi - w)
            })
            .collect();
        for (i, u) in updates.into_iter().enumerate() {
            if let Some(nz) = u {
                if nz.is_finite() {
                    let step = (nz - z[i]).norm();
                    z[i] = nz;
                    if step <= opts.tol * (1.0 + nz.norm()) {
                        active[i] = false;
                    }
                }
            }
        }
    }
    // Newton polish, accepted only when the residual does not grow
    let polished: Vec<(Complex64, f64)> = z
        .par_iter()
        .map(|&r0| {
            let mut r = r0;
            let mut res = target.residual(r);
            for _ in 0..opts.polish_steps {
                let Some(n) = target.newton_ratio(r) else { break };
                let cand = r - n;
                let cres = target.residual(cand);
                if cres <= res && cand.is_finite() {
                    r = cand;
                    res = cres;
                } else {
                    break;
                }
            }
            (r, res)
        })
        .collect();
    let roots: Vec<Complex64> = polished.iter().map(|p| p.0).collect();
    let residuals: Vec<f64> = polished.iter().map(|p| p.1).collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    if !(max_residual <= opts.residual_cap) {
        return Err(Error::NoConvergence {
            iterations,
            worst_residual: max_residual,
        });
    }
    let clusters = cluster_indices(&roots, opts.cluster_tol)
        .into_iter()
        .filter(|g| g.len() > 1)
        .map(|g| RootCluster {
            center: g.iter().map(|&i| roots[i]).sum::<Complex64>() / g.len() as f64,
            multiplicity: g.len(),
        })
        .collect();
    Ok(RootSet {
        roots,
        residuals,
        clusters,
        iterations,
        max_residual,
    })
}

/// A weighted point cloud; weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure<P = Complex64> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
}

impl<P> EmpiricalMeasure<P> {
    pub fn uniform(points: Vec<P>) -> Self {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self { points, weights }
    }

    /// Validates positivity and normalizes the weights to sum one.
    pub fn new(points: Vec<P>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidArgument("points and weights differ in length".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be positive and finite".into()));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_sided = |x: &[Complex64], y: &[Complex64]| {
        x.par_iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Zeros of `Ẑₙ` on a slice, found with Newton ratios from pointwise iteration.
fn slice_roots(kind: &SliceKind, n: usize, form: LinearForm, precision: Precision, opts: &AberthOptions) -> Result<RootSet> {
    slice_zeros_on(&make_slice(kind)?, n, form, precision, opts)
}

/// Zeros of `Y ∘ R̂ⁿ ∘ ℓ` for an explicit slice `ℓ`.
pub fn slice_zeros_on(slice: &RationalSlice, n: usize, form: LinearForm, precision: Precision, opts: &AberthOptions) -> Result<RootSet> {
    let mut o = *opts;
    if o.ring_radius.is_none() {
        o.ring_radius = Some(initial_radius(slice, n, &form));
    }
    let ev = SliceEvaluator::from_slice(slice.clone(), n, form).with_precision(precision);
    aberth_solve_target(&ev, &o)
}

/// `(|a₀/a_d|)^{1/d}` of the expanded polynomial, cheap enough to form at
/// moderate levels; unit radius otherwise.
fn initial_radius(slice: &RationalSlice, n: usize, form: &LinearForm) -> f64 {
    if n > 4 {
        return 1.0;
    }
    match advance_slice_n(slice, n) {
        Ok(sl) => {
            let p = form.eval_poly(&sl.p_u, &sl.p_v, &sl.p_w);
            let c = p.coeffs();
            let (a0, ad) = (c[0].norm(), c[c.len() - 1].norm());
            let r = (a0.ln() - ad.ln()) / (c.len() - 1) as f64;
            if r.is_finite() {
                r.exp()
            } else {
                1.0
            }
        }
        Err(_) => 1.0,
    }
}

/// Lee-Yang zeros at fixed temperature together with their distance from
/// the unit circle.
#[derive(Debug, Clone, Serialize)]
pub struct LeeYangZeros {
    pub t: Complex64,
    pub n: usize,
    pub measure: EmpiricalMeasure,
    pub roots: RootSet,
    /// `max ||z| − 1|` over the roots.
    pub max_circle_deviation: f64,
}

pub fn lee_yang_zeros(t: Complex64, n: usize, precision: Precision, opts: &AberthOptions) -> Result<LeeYangZeros> {
    let kind = SliceKind::PhysicalTLine { t };
    let roots = slice_roots(&kind, n, LinearForm::y0(), precision, opts)?;
    let max_circle_deviation = roots.roots.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(LeeYangZeros {
        t,
        n,
        measure: roots.measure(opts.cluster_tol),
        roots,
        max_circle_deviation,
    })
}

/// `n`-fold preimages of `t = −1` under the Fisher map, with multiplicity.
pub fn fisher_preimage_tree(n: usize) -> Vec<Complex64> {
    let mut level = vec![Complex64::new(-1.0, 0.0)];
    for _ in 0..n {
        level = level.iter().flat_map(|&p| fisher_1d_preimages(p)).collect();
    }
    level
}

#[derive(Debug, Clone, Serialize)]
pub struct FisherZeros {
    pub n: usize,
    pub measure: EmpiricalMeasure,
    pub roots: RootSet,
    /// Hausdorff distance to the iterated one-dimensional preimages of −1.
    pub hausdorff_to_preimages: f64,
}

pub fn fisher_zeros(n: usize, precision: Precision, opts: &AberthOptions) -> Result<FisherZeros> {
    let roots = slice_roots(&SliceKind::PhysicalZ1Line, n, LinearForm::y0(), precision, opts)?;
    let tree = fisher_preimage_tree(n);
    let hausdorff_to_preimages = hausdorff_distance(&roots.roots, &tree);
    Ok(FisherZeros {
        n,
        measure: roots.measure(opts.cluster_tol),
        roots,
        hausdorff_to_preimages,
    })
}

/// Zeros of `Y ∘ R̂ⁿ` on an arbitrary slice.
pub fn slice_zeros(kind: &SliceKind, n: usize, form: LinearForm, precision: Precision, opts: &AberthOptions) -> Result<RootSet> {
    slice_roots(kind, n, form, precision, opts)
}

/// `Σ wᵢ log|s − pᵢ|`.
pub fn potential_of_measure(m: &EmpiricalMeasure, s: Complex64) -> Result<f64> {
    let mut acc = 0.0;
    let mut dmin = f64::INFINITY;
    for (p, w) in m.points.iter().zip(&m.weights) {
        let d = (s - p).norm();
        dmin = dmin.min(d);
        acc += w * d.ln();
    }
    if dmin < 1e-14 {
        return Err(Error::Singular(dmin));
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistogramBin {
    pub center: f64,
    pub mass: f64,
    /// Mass per radian.
    pub density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngularHistogram {
    pub bins: Vec<HistogramBin>,
    /// Support points outside the annulus `0.9 < |z| < 1.1`.
    pub outside_annulus: usize,
}

/// Distribution of `arg z ∈ [0, 2π)` over equal bins.
pub fn angular_histogram(m: &EmpiricalMeasure, bins: usize) -> Result<AngularHistogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    let width = TAU / bins as f64;
    let mut mass = vec![0.0; bins];
    let mut outside_annulus = 0;
    for (p, w) in m.points.iter().zip(&m.weights) {
        let r = p.norm();
        if !(r > 0.9 && r < 1.1) {
            outside_annulus += 1;
        }
        let mut phi = p.im.atan2(p.re);
        if phi < 0.0 {
            phi += TAU;
        }
        let k = ((phi / width) as usize).min(bins - 1);
        mass[k] += w;
    }
    let bins = mass
        .into_iter()
        .enumerate()
        .map(|(k, m)| HistogramBin {
            center: (k as f64 + 0.5) * width,
            mass: m,
            density: m / width,
        })
        .collect();
    Ok(AngularHistogram { bins, outside_annulus })
}

/// `max_k |mass(φ_k) − mass(−φ_k)|`, the conjugation asymmetry of a histogram.
pub fn histogram_asymmetry(h: &AngularHistogram) -> f64 {
    let b = &h.bins;
    let n = b.len();
    (0..n).map(|k| (b[k].mass - b[n - 1 - k].mass).abs()).fold(0.0, f64::max)
}

/// Angle in `(−π, π]` folded to `[0, π]`.
pub fn folded_angle(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re).abs();
    a.min(PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn opts() -> AberthOptions {
        AberthOptions::default()
    }

    #[test]
    fn quadratic_examples() {
        let t = 0.5;
        let p = CPoly::from_real(&[1.0, 2.0 * t, 1.0]);
        let r = aberth_solve(&p, &opts()).unwrap();
        let want = [c64(-0.5, 0.75f64.sqrt()), c64(-0.5, -(0.75f64.sqrt()))];
        assert!(hausdorff_distance(&r.roots, &want) < 1e-14);
        for z in &r.roots {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
        let r = aberth_solve(&CPoly::from_real(&[-1.0, 0.0, 1.0]), &opts()).unwrap();
        assert!(hausdorff_distance(&r.roots, &[c64(1.0, 0.0), c64(-1.0, 0.0)]) < 1e-14);
    }

    #[test]
    fn constructed_roots_degree_128() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        // jittered around the unit circle, where the coefficient map is well conditioned
        let truth: Vec<Complex64> = (0..128)
            .map(|k| {
                let phi = (k as f64 + rng.gen_range(-0.3..0.3)) * TAU / 128.0;
                Complex64::from_polar(rng.gen_range(0.95..1.05), phi)
            })
            .collect();
        // multiply in bit-reversed order so partial products stay balanced
        let ordered: Vec<Complex64> = (0..128u32).map(|k| truth[(k.reverse_bits() >> 25) as usize]).collect();
        let p = CPoly::from_roots(&ordered);
        let r = aberth_solve(&p, &opts()).unwrap();
        assert!(r.max_residual < 1e-9);
        assert!(hausdorff_distance(&r.roots, &truth) < 1e-8, "{}", hausdorff_distance(&r.roots, &truth));
    }

    #[test]
    fn solver_is_deterministic() {
        let p = CPoly::from_real(&[1.0, -3.0, 0.5, 2.0, 1.0, 0.25]);
        let a = aberth_solve(&p, &AberthOptions { seed: 9, ..opts() }).unwrap();
        let b = aberth_solve(&p, &AberthOptions { seed: 9, ..opts() }).unwrap();
        assert_eq!(a.roots, b.roots);
    }

    #[test]
    fn double_root_is_clustered() {
        let p = CPoly::from_roots(&[c64(0.5, 0.0), c64(0.5, 0.0), c64(-2.0, 1.0)]);
        let r = aberth_solve(&p, &AberthOptions { cluster_tol: 1e-6, ..opts() }).unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].multiplicity, 2);
        let m = r.measure(1e-6);
        assert_eq!(m.len(), 2);
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lee_yang_level_zero_and_two() {
        let ly = lee_yang_zeros(c64(0.5, 0.0), 0, Precision::Double, &opts()).unwrap();
        assert_eq!(ly.measure.len(), 2);
        assert!(ly.max_circle_deviation < 1e-14);
        for k in 1..=9 {
            let t = k as f64 / 10.0;
            let ly = lee_yang_zeros(c64(t, 0.0), 2, Precision::Double, &opts()).unwrap();
            assert_eq!(ly.roots.roots.len(), 32);
            assert!(ly.max_circle_deviation < 1e-8, "t={t}: {}", ly.max_circle_deviation);
        }
        // off the ferromagnetic range the deviation is merely reported
        let ly = lee_yang_zeros(c64(1.5, 0.0), 2, Precision::Double, &opts()).unwrap();
        assert_eq!(ly.roots.roots.len(), 32);
    }

    #[test]
    fn lee_yang_roots_are_closed_under_inversion() {
        let ly = lee_yang_zeros(c64(0.3, 0.0), 3, Precision::Double, &opts()).unwrap();
        let inv: Vec<Complex64> = ly.roots.roots.iter().map(|z| z.inv()).collect();
        assert!(hausdorff_distance(&ly.roots.roots, &inv) < 1e-8);
    }

    #[test]
    fn fisher_cross_oracle() {
        let f0 = fisher_zeros(0, Precision::Double, &opts()).unwrap();
        assert!((f0.roots.roots[0] + 1.0).norm() < 1e-14);
        let f1 = fisher_zeros(1, Precision::Double, &opts()).unwrap();
        assert!(hausdorff_distance(&f1.roots.roots, &fisher_1d_preimages(c64(-1.0, 0.0))) < 1e-8);
        let f3 = fisher_zeros(3, Precision::Double, &opts()).unwrap();
        assert_eq!(f3.roots.roots.len(), 64);
        assert!(f3.hausdorff_to_preimages < 1e-6);
    }

    #[test]
    fn l0_zeros_are_roots_of_minus_one() {
        use crate::geometry::ProjPoint;
        let kind = SliceKind::Line {
            x0: ProjPoint::from_real(1.0, 0.0, 0.0).unwrap(),
            d: ProjPoint::from_real(0.0, 0.0, 1.0).unwrap(),
        };
        for n in 0..=3 {
            let r = slice_zeros(&kind, n, LinearForm::y0(), Precision::Double, &opts()).unwrap();
            let d = 4usize.pow(n as u32);
            assert_eq!(r.roots.len(), d);
            let want: Vec<Complex64> = (0..d)
                .map(|k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / d as f64))
                .collect();
            assert!(hausdorff_distance(&r.roots, &want) < 1e-10);
        }
    }

    #[test]
    fn potential_examples() {
        let m = EmpiricalMeasure::uniform(vec![c64(0.0, 0.0)]);
        assert!((potential_of_measure(&m, c64(std::f64::consts::E, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        let m = EmpiricalMeasure::uniform(vec![c64(1.0, 0.0), c64(-1.0, 0.0)]);
        assert!(potential_of_measure(&m, c64(0.0, 0.0)).unwrap().abs() < 1e-15);
        assert!(matches!(potential_of_measure(&m, c64(1.0, 0.0)), Err(Error::Singular(_))));
        let nn = 16;
        let m = EmpiricalMeasure::uniform((0..nn).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / nn as f64)).collect());
        let s = c64(1.3, 0.4);
        let exact = (s.powu(nn as u32) - 1.0).norm().ln() / nn as f64;
        assert!((potential_of_measure(&m, s).unwrap() - exact).abs() < 1e-13);
        assert!((exact - s.norm().ln()).abs() < 2.0 * s.norm().powi(-(nn as i32)));
    }

    #[test]
    fn histogram_examples() {
        let ly = lee_yang_zeros(c64(0.5, 0.0), 0, Precision::Double, &opts()).unwrap();
        let h = angular_histogram(&ly.measure, 10).unwrap();
        assert_eq!(h.bins.iter().filter(|b| b.mass > 0.0).count(), 2);
        assert!(histogram_asymmetry(&h) < 1e-15);
        let m = EmpiricalMeasure::uniform((0..64).map(|k| Complex64::from_polar(1.0, TAU * (k as f64 + 0.5) / 64.0)).collect());
        let h = angular_histogram(&m, 16).unwrap();
        for b in &h.bins {
            assert!((b.mass - 1.0 / 16.0).abs() < 1e-12);
        }
        let total: f64 = h.bins.iter().map(|b| b.mass).sum();
        assert!((total - 1.0).abs() < 1e-12);

        let ly = lee_yang_zeros(c64(0.5, 0.0), 3, Precision::Double, &opts()).unwrap();
        let h = angular_histogram(&ly.measure, 32).unwrap();
        assert!(histogram_asymmetry(&h) < 1e-10);
        assert_eq!(h.outside_annulus, 0);
    }
}
