//! Basins of `e` and `e′`, Julia rasters, the critical locus, the
//! power-map area lemma, sampling of the measure of maximal entropy and
//! algebraic stability.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{chordal_dist, make_slice, normalize, psi, LinearForm, PhysPoint, ProjPoint, RationalSlice, SliceKind, Vec3};
use crate::green::{linear_fit, par_samples, random_unit_vector, Rect};
use crate::poly::CPoly;
use crate::renorm::{apply_hat, dist_to_indeterminacy, fisher_1d, inverse_branches, tangent_jacobian, CriticalCurve, FixedPointCatalog};
use crate::roots::{aberth_solve_target, slice_zeros_on, AberthOptions, EmpiricalMeasure};
use crate::slice::advance_slice_n;
use crate::dd::{from_dd, to_dd, DdPoly, Precision};

/// Radius of the ball around an attractor at which convergence is checked.
pub const CAPTURE_RADIUS: f64 = 1e-6;
/// Steps of squaring contraction required after capture.
pub const CONFIRM_STEPS: usize = 3;
pub const DEFAULT_BUDGET: usize = 200;

const EPS: f64 = f64::EPSILON;

/// `d′ ≤ 16 d² + 4ε`: superattracting contraction up to rounding.
#[inline]
fn squares(prev: f64, next: f64) -> bool {
    next <= 16.0 * prev * prev + 4.0 * EPS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    ToE,
    ToEPrime,
    Unresolved,
}

impl Outcome {
    /// Image under the involution `ρ: U ↔ W`.
    pub fn mirrored(self) -> Self {
        match self {
            Outcome::ToE => Outcome::ToEPrime,
            Outcome::ToEPrime => Outcome::ToE,
            Outcome::Unresolved => Outcome::Unresolved,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitVerdict {
    pub outcome: Outcome,
    #[serde(rename = "stepsUsed")]
    pub steps_used: usize,
    /// Chordal distance to the attractor at the last step (or to the nearer
    /// of `e`, `e′` when unresolved).
    #[serde(rename = "finalDistance")]
    pub final_distance: f64,
    /// The orbit entered the guard ball of `a±` or underflowed.
    pub indeterminate: bool,
}

/// Classes used by rasters: the two basins of `R`, and on the invariant
/// line `{U = W}` the two attractors `β₀`, `β₁` of the restricted map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PixelClass {
    ToE,
    ToEPrime,
    ToBeta0,
    ToBeta1,
    Unresolved,
}

impl PixelClass {
    /// Gray level: `e` white, `e′` black, unresolved mid-gray, `β₀` light
    /// gray, `β₁` dark gray.
    pub fn gray(self) -> u8 {
        match self {
            PixelClass::ToE => 255,
            PixelClass::ToEPrime => 0,
            PixelClass::Unresolved => 128,
            PixelClass::ToBeta0 => 192,
            PixelClass::ToBeta1 => 64,
        }
    }

    pub fn is_resolved(self) -> bool {
        self != PixelClass::Unresolved
    }
}

impl From<Outcome> for PixelClass {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::ToE => PixelClass::ToE,
            Outcome::ToEPrime => PixelClass::ToEPrime,
            Outcome::Unresolved => PixelClass::Unresolved,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    E,
    EPrime,
    Beta0,
    Beta1,
}

/// Distances to `e` and `e′` for a unit vector, written so that swapping
/// `U` and `W` swaps them bit for bit.
#[inline]
fn basin_distances(x: &Vec3) -> (f64, f64) {
    let (u, v, w) = (x[0].norm_sqr(), x[1].norm_sqr(), x[2].norm_sqr());
    ((v + w).sqrt(), (v + u).sqrt())
}

/// `|U − W|` below this (for unit `X`) counts as lying on `{U = W}`.
const LINV_TOL: f64 = 1e-13;

fn classify_impl(x: &ProjPoint, budget: usize, detect_beta: bool) -> (PixelClass, usize, f64, bool) {
    let beta0 = FixedPointCatalog::beta0();
    let beta1 = FixedPointCatalog::beta1();
    let mut cur = *x;
    let mut pending: Option<(Target, usize, f64)> = None;
    let mut last = f64::INFINITY;
    for step in 0..=budget {
        let c = cur.coords();
        let (de, dep) = basin_distances(c);
        let on_linv = detect_beta && (c[0] - c[2]).norm() <= LINV_TOL;
        let dist_to = |t: Target| match t {
            Target::E => de,
            Target::EPrime => dep,
            Target::Beta0 => chordal_dist(&cur, &beta0),
            Target::Beta1 => chordal_dist(&cur, &beta1),
        };
        if let Some((t, k, prev)) = pending {
            let d = dist_to(t);
            let still_on_line = !matches!(t, Target::Beta0 | Target::Beta1) || on_linv;
            if squares(prev, d) && still_on_line {
                if k + 1 == CONFIRM_STEPS {
                    let class = match t {
                        Target::E => PixelClass::ToE,
                        Target::EPrime => PixelClass::ToEPrime,
                        Target::Beta0 => PixelClass::ToBeta0,
                        Target::Beta1 => PixelClass::ToBeta1,
                    };
                    return (class, step, d, false);
                }
                pending = Some((t, k + 1, d));
            } else {
                pending = None;
            }
        }
        if pending.is_none() {
            if de < CAPTURE_RADIUS {
                pending = Some((Target::E, 0, de));
            } else if dep < CAPTURE_RADIUS {
                pending = Some((Target::EPrime, 0, dep));
            } else if on_linv {
                let (d0, d1) = (dist_to(Target::Beta0), dist_to(Target::Beta1));
                if d0 < CAPTURE_RADIUS {
                    pending = Some((Target::Beta0, 0, d0));
                } else if d1 < CAPTURE_RADIUS {
                    pending = Some((Target::Beta1, 0, d1));
                }
            }
        }
        last = de.min(dep);
        if step == budget {
            break;
        }
        match apply_hat(&cur) {
            Ok(s) => cur = s.point,
            Err(_) => return (PixelClass::Unresolved, step, last, true),
        }
    }
    (PixelClass::Unresolved, budget, last, false)
}

/// Iterates `R` until the orbit is captured by `e` or `e′` and then shrinks
/// quadratically for three more steps.
pub fn classify_orbit(x: &ProjPoint, budget: usize) -> Result<OrbitVerdict> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let (class, steps_used, final_distance, indeterminate) = classify_impl(x, budget, false);
    let outcome = match class {
        PixelClass::ToE => Outcome::ToE,
        PixelClass::ToEPrime => Outcome::ToEPrime,
        _ => Outcome::Unresolved,
    };
    Ok(OrbitVerdict {
        outcome,
        steps_used,
        final_distance,
        indeterminate,
    })
}

/// As [`classify_orbit`], additionally recognizing `β₀` and `β₁` for orbits
/// that stay on `{U = W}`.
pub fn classify_extended(x: &ProjPoint, budget: usize) -> PixelClass {
    classify_impl(x, budget, true).0
}

/// Regions of `CP²` with known basin membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionPredicate {
    /// `V²/(UW) ∈ [0,1]`, `|W/U| < 1`.
    SC,
    /// `V²/(UW) ∈ [0,1]`, `|W/U| > 1`.
    SCPrime,
    /// `Ψ` of `{|z| < 1, t ∈ (0,1]}`.
    PhysInner,
    /// `Ψ` of `{|z| > 1, t ∈ [0,1]}`.
    PhysOuter,
}

impl RegionPredicate {
    pub fn contains(&self, x: &ProjPoint) -> bool {
        let (u, v, w) = (x.u(), x.v(), x.w());
        if u.norm() == 0.0 || w.norm() == 0.0 {
            return false;
        }
        let c = v * v / (u * w);
        let tol = 1e-12;
        let c_in = |lo_open: bool| {
            c.im.abs() <= tol * (1.0 + c.norm()) && c.re <= 1.0 + tol && if lo_open { c.re > 0.0 } else { c.re >= -tol }
        };
        let ratio = (w / u).norm();
        match self {
            RegionPredicate::SC => c_in(false) && ratio < 1.0,
            RegionPredicate::SCPrime => c_in(false) && ratio > 1.0,
            RegionPredicate::PhysInner => c_in(true) && ratio < 1.0,
            RegionPredicate::PhysOuter => c_in(false) && ratio > 1.0,
        }
    }

    /// The basin the region is expected to lie in.
    pub fn expected(&self) -> Outcome {
        match self {
            RegionPredicate::SC | RegionPredicate::PhysInner => Outcome::ToE,
            RegionPredicate::SCPrime | RegionPredicate::PhysOuter => Outcome::ToEPrime,
        }
    }
}

fn uniform_disk<R: Rng>(rng: &mut R) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// `[1 : √(cξ) : ξ]` with `c ∈ [0,1]` and `ξ` uniform in the unit disk.
pub fn sample_sc<R: Rng>(rng: &mut R) -> ProjPoint {
    loop {
        let c: f64 = rng.gen();
        let xi = uniform_disk(rng);
        if xi.norm() == 0.0 {
            continue;
        }
        if let Ok(p) = normalize([Complex64::new(1.0, 0.0), (xi * c).sqrt(), xi]) {
            return p;
        }
    }
}

/// A physical point of the region together with its image under `Ψ`.
pub fn sample_phys<R: Rng>(rng: &mut R, region: RegionPredicate) -> (PhysPoint, ProjPoint) {
    loop {
        let (z, t) = match region {
            RegionPredicate::PhysOuter => {
                let w = uniform_disk(rng);
                (w.inv(), rng.gen::<f64>())
            }
            _ => (uniform_disk(rng), 1.0 - rng.gen::<f64>()),
        };
        if !z.is_finite() || z.norm() == 0.0 {
            continue;
        }
        let p = PhysPoint::new(z, Complex64::new(t, 0.0));
        if let Ok(x) = psi(&p) {
            return (p, x);
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RegionStats {
    pub samples: usize,
    #[serde(rename = "toE")]
    pub to_e: usize,
    #[serde(rename = "toEPrime")]
    pub to_e_prime: usize,
    pub unresolved: usize,
    pub indeterminate: usize,
    /// Samples that failed the membership predicate (sampler sanity check).
    #[serde(rename = "outsideRegion")]
    pub outside_region: usize,
}

impl RegionStats {
    pub fn resolved(&self) -> usize {
        self.to_e + self.to_e_prime
    }

    pub fn resolved_fraction(&self) -> f64 {
        self.resolved() as f64 / self.samples.max(1) as f64
    }

    /// Resolved samples that went to the wrong attractor.
    pub fn wrong(&self, expected: Outcome) -> usize {
        match expected {
            Outcome::ToE => self.to_e_prime,
            _ => self.to_e,
        }
    }

    fn add(&mut self, v: &OrbitVerdict, inside: bool) {
        self.samples += 1;
        match v.outcome {
            Outcome::ToE => self.to_e += 1,
            Outcome::ToEPrime => self.to_e_prime += 1,
            Outcome::Unresolved => self.unresolved += 1,
        }
        if v.indeterminate {
            self.indeterminate += 1;
        }
        if !inside {
            self.outside_region += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolidCylinderReport {
    pub sc: RegionStats,
    #[serde(rename = "scPrime")]
    pub sc_prime: RegionStats,
    #[serde(rename = "physInner")]
    pub phys_inner: RegionStats,
    #[serde(rename = "physOuter")]
    pub phys_outer: RegionStats,
    /// SC′ samples are the `ρ`-images of the SC samples; this counts pairs
    /// whose verdicts are not exact mirrors.
    #[serde(rename = "mirrorMismatches")]
    pub mirror_mismatches: usize,
    pub budget: usize,
}

impl SolidCylinderReport {
    pub fn regions(&self) -> [(RegionPredicate, &RegionStats); 4] {
        [
            (RegionPredicate::SC, &self.sc),
            (RegionPredicate::SCPrime, &self.sc_prime),
            (RegionPredicate::PhysInner, &self.phys_inner),
            (RegionPredicate::PhysOuter, &self.phys_outer),
        ]
    }
}

pub fn solid_cylinder_suite(samples: usize, budget: usize, seed: u64) -> Result<SolidCylinderReport> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let sc_pairs = par_samples(samples, seed, |rng| {
        let x = sample_sc(rng);
        let m = x.swap_uw();
        let vx = classify_orbit(&x, budget).unwrap();
        let vm = classify_orbit(&m, budget).unwrap();
        (x, m, vx, vm)
    });
    let mut sc = RegionStats::default();
    let mut sc_prime = RegionStats::default();
    let mut mirror_mismatches = 0;
    for (x, m, vx, vm) in &sc_pairs {
        sc.add(vx, RegionPredicate::SC.contains(x));
        sc_prime.add(vm, RegionPredicate::SCPrime.contains(m));
        if vm.outcome != vx.outcome.mirrored() || vm.steps_used != vx.steps_used {
            mirror_mismatches += 1;
        }
    }
    let phys = |region: RegionPredicate, stream_seed: u64| {
        let out = par_samples(samples, stream_seed, |rng| {
            let (_, x) = sample_phys(rng, region);
            (region.contains(&x), classify_orbit(&x, budget).unwrap())
        });
        let mut st = RegionStats::default();
        for (inside, v) in &out {
            st.add(v, *inside);
        }
        st
    };
    Ok(SolidCylinderReport {
        sc,
        sc_prime,
        phys_inner: phys(RegionPredicate::PhysInner, seed.wrapping_add(1)),
        phys_outer: phys(RegionPredicate::PhysOuter, seed.wrapping_add(2)),
        mirror_mismatches,
        budget,
    })
}

/// Row-major raster over a rectangle; row 0 is the top edge.
#[derive(Debug, Clone, Serialize)]
pub struct Raster<C> {
    pub rect: Rect,
    pub res: usize,
    pub cells: Vec<C>,
}

impl<C: Copy> Raster<C> {
    pub fn get(&self, row: usize, col: usize) -> C {
        self.cells[row * self.res + col]
    }

    fn build(rect: Rect, res: usize, f: impl Fn(Complex64) -> C + Sync) -> Self
    where
        C: Send,
    {
        let cells: Vec<C> = (0..res * res)
            .into_par_iter()
            .with_min_len(res)
            .map(|k| f(rect.pixel(res, k / res, k % res)))
            .collect();
        Raster { rect, res, cells }
    }
}

impl Raster<PixelClass> {
    pub fn grays(&self) -> Vec<u8> {
        self.cells.iter().map(|c| c.gray()).collect()
    }

    /// Unresolved pixels together with resolved pixels that have a
    /// 4-neighbour of a different class; at finite budget this is the
    /// visible part of the Julia set.
    pub fn julia_proxy(&self) -> Vec<bool> {
        let n = self.res;
        let mut out = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let c = self.get(i, j);
                let mut mark = !c.is_resolved();
                let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
                for (a, b) in nbrs {
                    if a < n && b < n && self.get(a, b) != c {
                        mark = true;
                    }
                }
                out[i * n + j] = mark;
            }
        }
        out
    }

    pub fn count(&self, class: PixelClass) -> usize {
        self.cells.iter().filter(|&&c| c == class).count()
    }
}

/// Intersection over union of two masks.
pub fn mask_iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Basin of the Fisher map `t ↦ (2t/(t²+1))²` under the superattraction rule
/// (attractors `0` and `1`; a pole is followed by `∞ ↦ 0`).
pub fn classify_fisher(t0: Complex64, budget: usize) -> PixelClass {
    let one = Complex64::new(1.0, 0.0);
    let mut t = t0;
    let mut pending: Option<(bool, usize, f64)> = None;
    for _ in 0..=budget {
        let (d0, d1) = (t.norm(), (t - one).norm());
        if let Some((to_one, k, prev)) = pending {
            let d = if to_one { d1 } else { d0 };
            if squares(prev, d) {
                if k + 1 == CONFIRM_STEPS {
                    return if to_one { PixelClass::ToBeta1 } else { PixelClass::ToBeta0 };
                }
                pending = Some((to_one, k + 1, d));
            } else {
                pending = None;
            }
        }
        if pending.is_none() {
            if d0 < CAPTURE_RADIUS {
                pending = Some((false, 0, d0));
            } else if d1 < CAPTURE_RADIUS {
                pending = Some((true, 0, d1));
            }
        }
        t = fisher_1d(t).unwrap_or(Complex64::new(f64::INFINITY, 0.0));
        if !t.is_finite() {
            t = Complex64::new(0.0, 0.0);
        }
    }
    PixelClass::Unresolved
}

#[derive(Debug, Clone, Serialize)]
pub struct Julia1d {
    /// Classes `ToBeta0` (basin of `t = 0`), `ToBeta1` (basin of `t = 1`) and
    /// `Unresolved`; on `{U = W}` these are the basins of `β₀` and `β₁`.
    pub raster: Raster<PixelClass>,
    /// Real boundary point between the two basins in `(0, 1)`.
    #[serde(rename = "tCritical")]
    pub t_critical: f64,
    pub bracket: (f64, f64),
}

/// Boundary of the basins of `0` and `1` on the real segment, by bisection.
pub fn fisher_critical_point(tol: f64) -> Result<(f64, (f64, f64))> {
    let budget = 4000;
    let at = |t: f64| classify_fisher(Complex64::new(t, 0.0), budget);
    let (mut lo, mut hi) = (0.05, 0.95);
    if at(lo) != PixelClass::ToBeta0 || at(hi) != PixelClass::ToBeta1 {
        return Err(Error::InconclusiveNumerics("bracket endpoints not in the expected basins".into()));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match at(mid) {
            PixelClass::ToBeta0 => lo = mid,
            PixelClass::ToBeta1 => hi = mid,
            _ => break,
        }
    }
    Ok((0.5 * (lo + hi), (lo, hi)))
}

pub fn julia_1d(rect: Rect, res: usize, budget: usize) -> Result<Julia1d> {
    let raster = Raster::build(rect, res, |t| classify_fisher(t, budget));
    let (t_critical, bracket) = fisher_critical_point(1e-10)?;
    Ok(Julia1d {
        raster,
        t_critical,
        bracket,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Overlay {
    pub level: usize,
    pub roots: Vec<Complex64>,
    /// Roots inside the rectangle.
    #[serde(rename = "rootsInWindow")]
    pub roots_in_window: usize,
    /// Fraction of in-window roots within two pixels of the Julia proxy.
    #[serde(rename = "fractionNearJulia")]
    pub fraction_near_julia: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JuliaSlice {
    pub raster: Raster<PixelClass>,
    pub overlay: Option<Overlay>,
}

/// Classifies every pixel of the slice; with `overlay = Some(k)` also finds
/// the zeros of `(U − W) ∘ R̂ᵏ` on the slice, the level-`k` pullback of the
/// invariant line, and measures how many fall on the Julia proxy.
pub fn julia_slice_2d(slice: &RationalSlice, rect: Rect, res: usize, budget: usize, overlay: Option<usize>) -> Result<JuliaSlice> {
    let raster = Raster::build(rect, res, |s| match slice.point(s) {
        Ok(p) => classify_extended(&p, budget),
        Err(_) => PixelClass::Unresolved,
    });
    let overlay = match overlay {
        None => None,
        Some(k) => {
            let form = LinearForm::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0))?;
            let rs = slice_zeros_on(slice, k, form, Precision::Double, &AberthOptions::default())?;
            let proxy = raster.julia_proxy();
            let (hx, hy) = rect.spacing(res);
            let mid = (res as f64 - 1.0) / 2.0;
            let cx = 0.5 * (rect.re_min + rect.re_max);
            let cy = 0.5 * (rect.im_min + rect.im_max);
            let mut inside = 0;
            let mut near = 0;
            for r in &rs.roots {
                let col = ((r.re - cx) / hx + mid).round();
                let row = (mid - (r.im - cy) / hy).round();
                if col < 0.0 || row < 0.0 || col > (res - 1) as f64 || row > (res - 1) as f64 {
                    continue;
                }
                inside += 1;
                let (row, col) = (row as i64, col as i64);
                let hit = (-2..=2).any(|di: i64| {
                    (-2..=2).any(|dj: i64| {
                        let (a, b) = (row + di, col + dj);
                        a >= 0 && b >= 0 && (a as usize) < res && (b as usize) < res && proxy[a as usize * res + b as usize]
                    })
                });
                if hit {
                    near += 1;
                }
            }
            Some(Overlay {
                level: k,
                roots: rs.roots.clone(),
                roots_in_window: inside,
                fraction_near_julia: if inside > 0 { near as f64 / inside as f64 } else { 1.0 },
            })
        }
    };
    Ok(JuliaSlice { raster, overlay })
}

/// `|det DR|` in Fubini–Study frames, with indeterminacy reported as `NaN`.
pub fn tangent_det(x: &ProjPoint) -> f64 {
    tangent_jacobian(x).map(|t| t.det.norm()).unwrap_or(f64::NAN)
}

/// Points to keep away from when sampling the critical curves.
fn near_special(x: &ProjPoint) -> bool {
    let specials = [FixedPointCatalog::e(), FixedPointCatalog::e_prime()];
    dist_to_indeterminacy(x) < 1e-2 || specials.iter().any(|p| chordal_dist(x, p) < 1e-2)
}

/// Point at chordal distance `sin θ = eps` from `x` along the unit normal `n`.
fn offset(x: &Vec3, n: &Vec3, eps: f64) -> Result<ProjPoint> {
    let c = (1.0 - eps * eps).sqrt();
    normalize([x[0] * c + n[0] * eps, x[1] * c + n[1] * eps, x[2] * c + n[2] * eps])
}

fn random_curve_point<R: Rng>(rng: &mut R, curve: CriticalCurve) -> ProjPoint {
    loop {
        let s = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if let Ok(p) = normalize(curve.param(s)) {
            if !near_special(&p) {
                return p;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveResidual {
    pub curve: String,
    /// `max |det|` on the curve.
    #[serde(rename = "maxOnCurve")]
    pub max_on_curve: f64,
    /// `min |det|` at chordal distance 0.1 off the curve.
    #[serde(rename = "minControl")]
    pub min_control: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalLocusReport {
    pub curves: Vec<CurveResidual>,
    /// `min |det|` on the image conic of the blown-up indeterminacy points,
    /// which consists of critical values, not critical points.
    #[serde(rename = "conicMin")]
    pub conic_min: f64,
}

pub fn critical_locus_residuals(samples_per_curve: usize, seed: u64) -> Result<CriticalLocusReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::new();
    for curve in CriticalCurve::ALL {
        let mut max_on: f64 = 0.0;
        let mut min_ctrl = f64::INFINITY;
        for _ in 0..samples_per_curve {
            let p = random_curve_point(&mut rng, curve);
            max_on = max_on.max(tangent_det(&p));
            let n = curve.normal(p.coords());
            let q = offset(p.coords(), &n, 0.1)?;
            min_ctrl = min_ctrl.min(tangent_det(&q));
        }
        curves.push(CurveResidual {
            curve: curve.name().to_string(),
            max_on_curve: max_on,
            min_control: min_ctrl,
        });
    }
    let mut conic_min = f64::INFINITY;
    for _ in 0..samples_per_curve {
        let chi = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if let Ok(p) = crate::renorm::blowup_image(chi) {
            if !near_special(&p) {
                conic_min = conic_min.min(tangent_det(&p));
            }
        }
    }
    Ok(CriticalLocusReport { curves, conic_min })
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldFit {
    pub curve: String,
    pub slope: f64,
    pub intercept: f64,
    #[serde(rename = "rSquared")]
    pub r_squared: f64,
    /// `(distance to the curve, |det|)` along the transverse ray.
    pub points: Vec<(f64, f64)>,
}

/// Slope of `log|det|` against `log(distance)` along the normal ray from a
/// point of the curve.
pub fn fold_exponent(curve: CriticalCurve, base: &ProjPoint, radii: &[f64]) -> Result<FoldFit> {
    if radii.len() < 2 {
        return Err(Error::InvalidArgument("at least two radii are needed".into()));
    }
    let n = curve.normal(base.coords());
    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let q = offset(base.coords(), &n, r)?;
        let d = curve.distance(&q);
        let det = tangent_det(&q);
        if !(det > 0.0) || !(d > 0.0) {
            return Err(Error::InconclusiveNumerics(format!("degenerate sample at radius {r}")));
        }
        points.push((d, det));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(d, j)| (d.ln(), j.ln())).collect();
    let (slope, intercept, r_squared) = linear_fit(&logs);
    if r_squared < 0.99 {
        return Err(Error::FitUnstable { slope, r_squared });
    }
    Ok(FoldFit {
        curve: curve.name().to_string(),
        slope,
        intercept,
        r_squared,
        points,
    })
}

/// `count` radii log-spaced in `[1e−6, 1e−2]`.
pub fn default_fold_radii(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 10f64.powf(-6.0 + 4.0 * k as f64 / (count - 1) as f64))
        .collect()
}

/// A generic point of each curve: away from `a±`, `e`, `e′` and the other curves.
pub fn generic_base_point(curve: CriticalCurve) -> ProjPoint {
    let s = Complex64::new(0.61, 0.37);
    normalize(curve.param(s)).expect("curve parametrizations are nonzero")
}

/// Expected fold slope per curve: order two on the collapsing line, one elsewhere.
pub fn expected_fold_slope(curve: CriticalCurve) -> f64 {
    if curve == CriticalCurve::L2 {
        2.0
    } else {
        1.0
    }
}

/// Closed disk in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, w: Complex64) -> bool {
        (w - self.center).norm() <= self.radius
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AreaEstimate {
    pub d: u32,
    pub samples: usize,
    /// Areas normalized so that the unit disk has area one.
    #[serde(rename = "areaX")]
    pub area_x: f64,
    #[serde(rename = "areaPreimage")]
    pub area_preimage: f64,
    #[serde(rename = "sigmaX")]
    pub sigma_x: f64,
    #[serde(rename = "sigmaPreimage")]
    pub sigma_preimage: f64,
    /// Half-widths of the 99% confidence intervals.
    #[serde(rename = "ci99X")]
    pub ci99_x: f64,
    #[serde(rename = "ci99Preimage")]
    pub ci99_preimage: f64,
    /// `(area X)^{1/d}`.
    pub bound: f64,
    /// Combined standard error of `area(Q⁻¹X) − (area X)^{1/d}`.
    pub sigma: f64,
    pub holds: bool,
}

/// Monte-Carlo check of `area(Q⁻¹X) ≤ (area X)^{1/d}` for `Q(w) = w^d` and
/// `X` a union of disks inside the unit disk.
pub fn power_map_area_mc(d: u32, set: &[Disk], samples: usize, seed: u64) -> Result<AreaEstimate> {
    if d == 0 || samples < 2 {
        return Err(Error::InvalidArgument("need d >= 1 and at least two samples".into()));
    }
    if set.iter().any(|k| k.center.norm() + k.radius > 1.0 + 1e-12) {
        return Err(Error::InvalidArgument("disks must lie in the unit disk".into()));
    }
    let inside = |w: Complex64| set.iter().any(|k| k.contains(w));
    let hits = par_samples(samples, seed, |rng| {
        let w = uniform_disk(rng);
        (inside(w), inside(w.powu(d)))
    });
    let n = samples as f64;
    let ax = hits.iter().filter(|h| h.0).count() as f64 / n;
    let ap = hits.iter().filter(|h| h.1).count() as f64 / n;
    let sx = (ax * (1.0 - ax) / n).sqrt();
    let sp = (ap * (1.0 - ap) / n).sqrt();
    let bound = ax.powf(1.0 / d as f64);
    let dbound = if ax > 0.0 { ax.powf(1.0 / d as f64 - 1.0) / d as f64 * sx } else { 0.0 };
    let sigma = (sp * sp + dbound * dbound).sqrt();
    let z99 = 2.575_829_303_548_901;
    Ok(AreaEstimate {
        d,
        samples,
        area_x: ax,
        area_preimage: ap,
        sigma_x: sx,
        sigma_preimage: sp,
        ci99_x: z99 * sx,
        ci99_preimage: z99 * sp,
        bound,
        sigma,
        holds: ap <= bound + 3.0 * sigma,
    })
}

/// Between one and four random disks inside the unit disk.
pub fn random_disk_union<R: Rng>(rng: &mut R) -> Vec<Disk> {
    let k = rng.gen_range(1..=4);
    (0..k)
        .map(|_| {
            let center = uniform_disk(rng) * 0.9;
            let room = 1.0 - center.norm();
            Disk {
                center,
                radius: rng.gen_range(0.05..1.0) * room,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MmeCloud {
    pub measure: EmpiricalMeasure<ProjPoint>,
    pub chains: usize,
    #[serde(rename = "burnIn")]
    pub burn_in: usize,
    /// Steps redrawn because the chosen preimage had an infinite fiber.
    #[serde(rename = "infiniteFiberRetries")]
    pub infinite_fiber_retries: usize,
    /// Steps whose fiber contained coincident branches.
    #[serde(rename = "degenerateFibers")]
    pub degenerate_fibers: usize,
}

impl MmeCloud {
    pub fn points(&self) -> &[ProjPoint] {
        &self.measure.points
    }
}

pub const DEFAULT_MME_CHAINS: usize = 16;

/// Start point `[2:1:3]` of every chain.
pub fn default_mme_start() -> ProjPoint {
    ProjPoint::from_real(2.0, 1.0, 3.0).expect("nonzero")
}

/// Random backward orbits: each step picks uniformly among the preimages
/// (coincident branches keep their multiplicity). Chains run in parallel
/// from independent streams and are concatenated in chain order.
pub fn mme_sample(count: usize, burn_in: usize, seed: u64, chains: usize) -> Result<MmeCloud> {
    if burn_in < 20 {
        return Err(Error::InvalidArgument("burn-in must be at least 20".into()));
    }
    if chains == 0 {
        return Err(Error::InvalidArgument("at least one chain is needed".into()));
    }
    let per = count.div_ceil(chains);
    let start = default_mme_start();
    let runs: Vec<Result<(Vec<ProjPoint>, usize, usize)>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let take = per.min(count.saturating_sub(c * per));
            let mut pts = Vec::with_capacity(take);
            let mut x = start;
            let mut retries = 0;
            let mut degenerate = 0;
            let mut step = 0;
            while pts.len() < take {
                let fiber = inverse_branches(&x)?;
                if fiber.degenerate {
                    degenerate += 1;
                }
                let mut next = None;
                for _ in 0..64 {
                    if fiber.branches.is_empty() {
                        break;
                    }
                    let cand = fiber.branches[rng.gen_range(0..fiber.branches.len())];
                    match inverse_branches(&cand) {
                        Err(Error::InfiniteFiber) => retries += 1,
                        _ => {
                            next = Some(cand);
                            break;
                        }
                    }
                }
                x = next.ok_or_else(|| Error::InconclusiveNumerics("no admissible preimage".into()))?;
                step += 1;
                if step > burn_in {
                    pts.push(x);
                }
            }
            Ok((pts, retries, degenerate))
        })
        .collect();
    let mut points = Vec::with_capacity(count);
    let (mut retries, mut degenerate) = (0, 0);
    for r in runs {
        let (p, a, b) = r?;
        points.extend(p);
        retries += a;
        degenerate += b;
    }
    Ok(MmeCloud {
        measure: EmpiricalMeasure::uniform(points),
        chains,
        burn_in,
        infinite_fiber_retries: retries,
        degenerate_fibers: degenerate,
    })
}

/// Mean of `log σ_min` of the tangent map over the cloud.
pub fn lyapunov_proxy(points: &[ProjPoint]) -> f64 {
    let logs: Vec<f64> = points
        .par_iter()
        .filter_map(|p| tangent_jacobian(p).ok())
        .map(|t| t.singular_values().1.ln())
        .filter(|v| v.is_finite())
        .collect();
    logs.iter().sum::<f64>() / logs.len().max(1) as f64
}

/// Coarse histogram over `(|U|², |W|², arg(U W̄))` of unit representatives.
pub fn coarse_histogram(points: &[ProjPoint], bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins * bins * bins];
    let idx = |v: f64| ((v * bins as f64) as usize).min(bins - 1);
    for p in points {
        let c = p.coords();
        let a = (c[0] * c[2].conj()).arg();
        let k = idx(c[0].norm_sqr()) * bins * bins + idx(c[2].norm_sqr()) * bins + idx((a + std::f64::consts::PI) / std::f64::consts::TAU);
        h[k] += 1.0;
    }
    let n = points.len().max(1) as f64;
    h.iter_mut().for_each(|v| *v /= n);
    h
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Histogram drift between the cloud and its image under `R`.
pub fn forward_push_drift(points: &[ProjPoint], bins: usize) -> f64 {
    let pushed: Vec<ProjPoint> = points.par_iter().filter_map(|p| apply_hat(p).ok().map(|s| s.point)).collect();
    total_variation(&coarse_histogram(points, bins), &coarse_histogram(&pushed, bins))
}

/// Fraction of the cloud whose forward orbit is not captured by `e` or `e′`
/// within `budget` steps.
pub fn unresolved_fraction(points: &[ProjPoint], budget: usize) -> f64 {
    let n = points
        .par_iter()
        .filter(|p| classify_orbit(p, budget).map(|v| v.outcome == Outcome::Unresolved).unwrap_or(true))
        .count();
    n as f64 / points.len().max(1) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct MmeReport {
    pub samples: usize,
    #[serde(rename = "lyapunovProxy")]
    pub lyapunov_proxy: f64,
    #[serde(rename = "unresolvedFraction")]
    pub unresolved_fraction: f64,
    #[serde(rename = "tvDrift")]
    pub tv_drift: f64,
    #[serde(rename = "infiniteFiberRetries")]
    pub infinite_fiber_retries: usize,
}

/// Classification budget used on the cloud: short enough that rounding
/// errors, amplified along the repelling directions of the Julia set, have
/// not yet pushed the orbit into a basin.
pub const MME_CLASSIFY_BUDGET: usize = 20;
pub const MME_HIST_BINS: usize = 8;

pub fn mme_report(cloud: &MmeCloud) -> MmeReport {
    let pts = cloud.points();
    MmeReport {
        samples: pts.len(),
        lyapunov_proxy: lyapunov_proxy(pts),
        unresolved_fraction: unresolved_fraction(pts, MME_CLASSIFY_BUDGET),
        tv_drift: forward_push_drift(pts, MME_HIST_BINS),
        infinite_fiber_retries: cloud.infinite_fiber_retries,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum MapKind {
    /// The Migdal–Kadanoff map `R̂`.
    Mig,
    /// The degree-6 lift of the physical map.
    Phys,
}

impl std::str::FromStr for MapKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mig" => Ok(MapKind::Mig),
            "phys" => Ok(MapKind::Phys),
            o => Err(format!("unknown map '{o}' (expected mig or phys)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LineStability {
    /// The line `s ↦ base + s·direction`.
    pub base: Vec3,
    pub direction: Vec3,
    /// Formal degree `4ⁿ` or `6ⁿ` of the composed lift on the line.
    #[serde(rename = "formalDegree")]
    pub formal_degree: usize,
    /// Common roots with multiplicity.
    #[serde(rename = "commonRoots")]
    pub common_roots: Vec<(Complex64, usize)>,
    /// Degree lost because all three components drop degree at infinity.
    #[serde(rename = "deficitAtInfinity")]
    pub deficit_at_infinity: usize,
    #[serde(rename = "effectiveDegree")]
    pub effective_degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityVerdict {
    pub map: MapKind,
    pub n: usize,
    pub lines: Vec<LineStability>,
    /// Number of lines on which a common factor was found.
    #[serde(rename = "linesWithCommonRoots")]
    pub lines_with_common_roots: usize,
}

/// One application of the degree-6 physical lift to a polynomial triple,
/// in double-double so that multiple common roots stay tight. The result is
/// rescaled by one common factor, which keeps the projective point.
fn phys_compose(p: &[DdPoly; 3]) -> [DdPoly; 3] {
    let q = phys_step(p, usize::MAX);
    let m = q.iter().map(DdPoly::max_abs_coeff).fold(0.0, f64::max);
    if m > 0.0 {
        q.map(|c| c.scale_real(1.0 / m))
    } else {
        q
    }
}

/// The physical lift on a polynomial triple, keeping `len` coefficients.
fn phys_step(p: &[DdPoly; 3], len: usize) -> [DdPoly; 3] {
    let mul = |a: &DdPoly, b: &DdPoly| truncated(a.mul(b), len);
    let z2 = mul(&p[0], &p[0]);
    let t2 = mul(&p[1], &p[1]);
    let y2 = mul(&p[2], &p[2]);
    let zt = z2.add(&t2);
    let zy = z2.add(&y2);
    [
        mul(&z2, &mul(&zt, &zt)),
        mul(&t2, &mul(&zy, &zy)),
        mul(&zt, &mul(&y2, &y2).add(&mul(&z2, &t2))),
    ]
}

fn truncated(p: DdPoly, len: usize) -> DdPoly {
    if p.coeffs().len() <= len {
        p
    } else {
        DdPoly::new(p.coeffs()[..len].to_vec())
    }
}

/// `|a|` coefficientwise.
fn abs_poly(p: &DdPoly) -> DdPoly {
    DdPoly::new(p.coeffs().iter().map(|c| to_dd(Complex64::new(from_dd(c).norm(), 0.0))).collect())
}

/// Where local Taylor data of the three components on a line comes from.
enum LineLift {
    /// The expanded polynomials themselves.
    Expanded,
    /// The physical lift iterated `n` times on `x0 + s·d`, re-expanded about
    /// each point. This avoids the cancellation of the expanded form in
    /// regions where the components are very flat.
    Phys { x0: Vec3, d: Vec3, n: usize },
}

/// A Taylor coefficient and a bound on its evaluation error.
type TaylorTerm = (Complex64, f64);

impl LineLift {
    /// Taylor coefficients `t₀ … tₘ` of every component about `c`.
    fn taylor(&self, p: &[DdPoly; 3], c: Complex64, m: usize) -> [Vec<TaylorTerm>; 3] {
        match self {
            LineLift::Expanded => std::array::from_fn(|i| taylor_shift(&p[i], c, m)),
            LineLift::Phys { x0, d, n } => {
                let cd = to_dd(c);
                let line: [DdPoly; 3] = std::array::from_fn(|i| DdPoly::new(vec![to_dd(x0[i]) + cd * to_dd(d[i]), to_dd(d[i])]));
                let mut val = line.clone();
                let mut bound = line.each_ref().map(abs_poly);
                for _ in 0..*n {
                    val = phys_step(&val, m + 1);
                    bound = phys_step(&bound, m + 1);
                }
                std::array::from_fn(|i| {
                    (0..=m)
                        .map(|j| {
                            let v = val[i].coeffs().get(j).map_or(Complex64::new(0.0, 0.0), from_dd);
                            let b = bound[i].coeffs().get(j).map_or(0.0, |b| from_dd(b).norm());
                            (v, DD_EVAL_NOISE * b)
                        })
                        .collect()
                })
            }
        }
    }
}

/// Taylor coefficients of `q` about `c` by repeated synthetic division, with
/// the same recursion on `|a|` and `|c|` as the error bound.
fn taylor_shift(q: &DdPoly, c: Complex64, m: usize) -> Vec<TaylorTerm> {
    let cd = to_dd(c);
    let ca = to_dd(Complex64::new(c.norm(), 0.0));
    let mut val: Vec<_> = q.coeffs().to_vec();
    let mut bound: Vec<_> = abs_poly(q).coeffs().to_vec();
    let mut out = Vec::with_capacity(m + 1);
    for _ in 0..=m {
        if val.is_empty() {
            out.push((Complex64::new(0.0, 0.0), 0.0));
            continue;
        }
        for k in (0..val.len() - 1).rev() {
            val[k] = val[k] + cd * val[k + 1];
            bound[k] = bound[k] + ca * bound[k + 1];
        }
        out.push((from_dd(&val[0]), DD_EVAL_NOISE * from_dd(&bound[0]).norm()));
        val.remove(0);
        bound.remove(0);
    }
    out
}

/// Radius of the `m` roots nearest the expansion point, estimated from the
/// Taylor coefficients as `maxⱼ<ₘ |tⱼ/tₘ|^{1/(m−j)}`. Each `|tⱼ|` is first
/// reduced by its error bound.
fn cluster_radius(t: &[TaylorTerm], m: usize) -> f64 {
    let top = t[m].0.norm();
    if top <= t[m].1 {
        return f64::INFINITY;
    }
    (0..m)
        .map(|j| ((t[j].0.norm() - t[j].1).max(0.0) / top).powf(1.0 / (m - j) as f64))
        .fold(0.0, f64::max)
}

/// Single-linkage clusters of roots of component `i` within `tol·(1+|r|)`,
/// as `(center, multiplicity)`. Members beyond the confirmed multiplicity are
/// reported as simple roots.
fn root_clusters(lift: &LineLift, p: &[DdPoly; 3], i: usize, roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for start in 0..roots.len() {
        if used[start] {
            continue;
        }
        let mut members = vec![start];
        used[start] = true;
        let mut k = 0;
        while k < members.len() {
            let r = roots[members[k]];
            for j in 0..roots.len() {
                if !used[j] && (roots[j] - r).norm() <= tol * (1.0 + r.norm()) {
                    used[j] = true;
                    members.push(j);
                }
            }
            k += 1;
        }
        let k = members.len();
        let centroid = members.iter().map(|&k| roots[k]).sum::<Complex64>() / k as f64;
        match refine_multiple_root(lift, p, i, centroid, k, tol) {
            Some((c, m)) => {
                out.push((c, m));
                let mut extra: Vec<Complex64> = members.iter().map(|&k| roots[k]).collect();
                extra.sort_by(|a, b| (b - c).norm().total_cmp(&(a - c).norm()));
                out.extend(extra.into_iter().take(k - m).map(|r| (r, 1)));
            }
            None => out.extend(members.iter().map(|&k| (roots[k], 1))),
        }
    }
    out
}

/// Refines a cluster of `k` root copies of component `i` starting at
/// `start`. For a trial multiplicity `m`, from `k` downwards, Newton's method
/// on the `(m−1)`-th derivative gives a center, and the first `m` whose
/// cluster radius there is below `MULTIPLE_ROOT_RADIUS` is accepted.
fn refine_multiple_root(lift: &LineLift, p: &[DdPoly; 3], i: usize, start: Complex64, k: usize, tol: f64) -> Option<(Complex64, usize)> {
    let top = k.min(p[i].degree()).min(MAX_COMMON_MULTIPLICITY);
    for m in (2..=top).rev() {
        let mut c = start;
        let mut t = lift.taylor(p, c, m);
        for _ in 0..60 {
            // q⁽ᵐ⁻¹⁾/q⁽ᵐ⁾ = tₘ₋₁/(m·tₘ)
            let step = t[i][m - 1].0 / (t[i][m].0 * m as f64);
            if !step.is_finite() || step.norm() >= tol {
                break;
            }
            c -= step;
            t = lift.taylor(p, c, m);
            if step.norm() <= 1e-16 * (1.0 + c.norm()) {
                break;
            }
        }
        if cluster_radius(&t[i], m) < MULTIPLE_ROOT_RADIUS * (1.0 + c.norm()) {
            return Some((c, m));
        }
    }
    None
}

/// Tolerance for grouping the spread-out copies of a multiple root.
const MULTIPLE_ROOT_GROUPING: f64 = 1e-2;
/// Multiplicities above this are not resolved.
const MAX_COMMON_MULTIPLICITY: usize = 8;
/// Relative evaluation noise of double-double Taylor coefficients.
const DD_EVAL_NOISE: f64 = 1e-30;
/// Largest cluster radius at which components share a root.
const COMMON_ROOT_RADIUS: f64 = 1e-6;
/// Largest cluster radius accepted as one multiple root.
const MULTIPLE_ROOT_RADIUS: f64 = 1e-4;

fn common_roots(lift: &LineLift, p: &[DdPoly; 3], seed: u64) -> Result<LineStability> {
    let formal = p[0].degree();
    let mut clusters = Vec::with_capacity(3);
    let mut eff = Vec::with_capacity(3);
    for (i, q) in p.iter().enumerate() {
        let approx = q.to_cpoly();
        // generic leading coefficients can be tiny next to the central ones,
        // so only exact cancellation counts as degree loss
        let d = approx.effective_degree(f64::MIN_POSITIVE).unwrap_or(0);
        eff.push(d);
        if approx.is_zero() {
            return Err(Error::InconclusiveNumerics("a component vanishes identically on the line".into()));
        }
        if d == 0 {
            clusters.push(Vec::new());
            continue;
        }
        let t = DdPoly::new(q.coeffs()[..=d].to_vec());
        let opts = AberthOptions {
            seed,
            ..AberthOptions::default()
        };
        let rs = aberth_solve_target(&t, &opts)?;
        clusters.push(root_clusters(lift, p, i, &rs.roots, MULTIPLE_ROOT_GROUPING));
    }
    // a component can be too flat for its own roots to converge near a
    // common root, so candidates come from every component
    let mut candidates: Vec<(usize, Complex64, usize)> = clusters
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&(c, m)| (i, c, m)))
        .collect();
    // unresolved copies of a multiple root then merge into it
    candidates.sort_by(|a, b| b.2.cmp(&a.2));
    let mut common: Vec<(Complex64, usize)> = Vec::new();
    for (i, c, m) in candidates {
        let scale = 1.0 + c.norm();
        if common.iter().any(|(o, _)| (o - c).norm() < MULTIPLE_ROOT_RADIUS * scale) {
            continue;
        }
        let t = lift.taylor(p, c, m);
        let mut mult = m;
        for other in (0..3).filter(|&o| o != i) {
            // largest multiplicity up to `mult` at which `other` has a cluster at `c`
            while mult > 0 && cluster_radius(&t[other], mult) >= COMMON_ROOT_RADIUS * scale {
                mult -= 1;
            }
        }
        if mult > 0 {
            common.push((c, mult));
        }
    }
    let deficit_at_infinity = eff.iter().map(|&d| formal - d).min().unwrap_or(0);
    let lost: usize = common.iter().map(|c| c.1).sum::<usize>() + deficit_at_infinity;
    Ok(LineStability {
        base: [Complex64::new(0.0, 0.0); 3],
        direction: [Complex64::new(0.0, 0.0); 3],
        formal_degree: formal,
        common_roots: common,
        deficit_at_infinity,
        effective_degree: formal - lost,
    })
}

/// Restricts the `n`-fold composed homogeneous lift to `lines` random
/// projective lines and looks for common roots of the three components.
pub fn stability_check(map: MapKind, n: usize, lines: usize, seed: u64) -> Result<StabilityVerdict> {
    if n == 0 || n > 3 {
        return Err(Error::InvalidArgument("stability_check needs 1 <= n <= 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(lines);
    for k in 0..lines {
        let x0 = random_unit_vector(&mut rng);
        let d = random_unit_vector(&mut rng);
        let comps: [DdPoly; 3] = match map {
            MapKind::Mig => {
                let kind = SliceKind::Line {
                    x0: ProjPoint::new(x0)?,
                    d: ProjPoint::new(d)?,
                };
                let sl = advance_slice_n(&make_slice(&kind)?, n)?;
                [DdPoly::from_cpoly(&sl.p_u), DdPoly::from_cpoly(&sl.p_v), DdPoly::from_cpoly(&sl.p_w)]
            }
            MapKind::Phys => {
                let mut p: [DdPoly; 3] = std::array::from_fn(|i| DdPoly::from_cpoly(&CPoly::new(vec![x0[i], d[i]])));
                for _ in 0..n {
                    p = phys_compose(&p);
                }
                p
            }
        };
        let lift = match map {
            MapKind::Mig => LineLift::Expanded,
            MapKind::Phys => LineLift::Phys { x0, d, n },
        };
        let mut line = common_roots(&lift, &comps, seed.wrapping_add(k as u64))?;
        line.base = x0;
        line.direction = d;
        out.push(line);
    }
    let lines_with_common_roots = out.iter().filter(|l| !l.common_roots.is_empty()).count();
    Ok(StabilityVerdict {
        map,
        n,
        lines: out,
        lines_with_common_roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn p(u: Complex64, v: Complex64, w: Complex64) -> ProjPoint {
        ProjPoint::new([u, v, w]).unwrap()
    }

    #[test]
    fn power_map_line_goes_to_e() {
        let v = classify_orbit(&p(c64(1.0, 0.0), c64(0.0, 0.0), c64(0.5, 0.0)), 50).unwrap();
        assert_eq!(v.outcome, Outcome::ToE);
        assert!(v.steps_used <= 8, "{}", v.steps_used);
        let v = classify_orbit(&p(c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 2.0)), 50).unwrap();
        assert_eq!(v.outcome, Outcome::ToEPrime);
    }

    #[test]
    fn beta1_is_unresolved() {
        let v = classify_orbit(&FixedPointCatalog::beta1(), 100).unwrap();
        assert_eq!(v.outcome, Outcome::Unresolved);
        assert_eq!(classify_extended(&FixedPointCatalog::beta1(), 100), PixelClass::ToBeta1);
        assert!(classify_orbit(&FixedPointCatalog::beta1(), 0).is_err());
    }

    #[test]
    fn indeterminate_orbit_is_flagged() {
        let v = classify_orbit(&FixedPointCatalog::a_plus(), 10).unwrap();
        assert_eq!(v.outcome, Outcome::Unresolved);
        assert!(v.indeterminate);
    }

    #[test]
    fn sc_samples_and_mirror() {
        let r = solid_cylinder_suite(500, DEFAULT_BUDGET, 9).unwrap();
        for (region, st) in r.regions() {
            assert_eq!(st.outside_region, 0, "{region:?}");
            assert_eq!(st.wrong(region.expected()), 0, "{region:?}");
            assert!(st.resolved_fraction() >= 0.99, "{region:?} {}", st.resolved_fraction());
        }
        assert_eq!(r.mirror_mismatches, 0);
    }

    #[test]
    fn region_predicates() {
        let x = p(c64(1.0, 0.0), c64(0.3, 0.0), c64(0.5, 0.0));
        assert!(RegionPredicate::SC.contains(&x));
        assert!(!RegionPredicate::SCPrime.contains(&x));
        assert!(RegionPredicate::SCPrime.contains(&x.swap_uw()));
        // V²/(UW) = 0.36/0.25 > 1
        let y = p(c64(1.0, 0.0), c64(0.6, 0.0), c64(0.25, 0.0));
        assert!(!RegionPredicate::SC.contains(&y));
        let z = p(c64(1.0, 0.0), c64(0.0, 0.0), c64(0.5, 0.0));
        assert!(RegionPredicate::SC.contains(&z));
        assert!(!RegionPredicate::PhysInner.contains(&z));
    }

    #[test]
    fn fisher_basins_and_critical_point() {
        assert_eq!(classify_fisher(c64(0.05, 0.0), 100), PixelClass::ToBeta0);
        assert_eq!(classify_fisher(c64(0.95, 0.0), 100), PixelClass::ToBeta1);
        let (tc, (lo, hi)) = fisher_critical_point(1e-10).unwrap();
        assert!(hi - lo <= 1e-10);
        // repelling fixed point: the real root of t³ + t² + 3t − 1
        let cubic = |t: f64| t * t * t + t * t + 3.0 * t - 1.0;
        assert!(cubic(lo) < 0.0 && cubic(hi + 1e-9) > 0.0, "{tc}");
        assert!(cubic(tc).abs() < 1e-8);
    }

    #[test]
    fn julia_1d_conjugation_symmetric() {
        let rect = Rect::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let j = julia_1d(rect, 65, 200).unwrap();
        for i in 0..65 {
            for k in 0..65 {
                assert_eq!(j.raster.get(i, k), j.raster.get(64 - i, k));
            }
        }
    }

    #[test]
    fn fisher_line_slice_matches_julia_1d() {
        let rect = Rect::new(-1.5, 2.5, -2.0, 2.0).unwrap();
        let res = 96;
        let one = julia_1d(rect, res, 200).unwrap();
        let sl = make_slice(&SliceKind::PhysicalZ1Line).unwrap();
        let two = julia_slice_2d(&sl, rect, res, 200, None).unwrap();
        let iou = mask_iou(&one.raster.julia_proxy(), &two.raster.julia_proxy());
        assert!(iou > 0.9, "{iou}");
        let agree = one.raster.cells.iter().zip(&two.raster.cells).filter(|(a, b)| a == b).count();
        assert!(agree as f64 > 0.97 * (res * res) as f64);
    }

    #[test]
    fn slice_inside_sc_is_all_e() {
        let kind = SliceKind::Line {
            x0: ProjPoint::from_real(1.0, 0.0, 0.0).unwrap(),
            d: ProjPoint::from_real(0.0, 0.0, 1.0).unwrap(),
        };
        let sl = make_slice(&kind).unwrap();
        let r = julia_slice_2d(&sl, Rect::new(-0.6, 0.6, -0.6, 0.6).unwrap(), 41, 100, None).unwrap();
        assert_eq!(r.raster.count(PixelClass::ToE), 41 * 41);
    }

    #[test]
    fn critical_locus() {
        let rep = critical_locus_residuals(100, 3).unwrap();
        for c in &rep.curves {
            assert!(c.max_on_curve < 1e-8, "{} {}", c.curve, c.max_on_curve);
            assert!(c.min_control > 1e-6, "{} {}", c.curve, c.min_control);
        }
        assert!(rep.conic_min > 1e-6, "{}", rep.conic_min);
    }

    #[test]
    fn fold_slopes() {
        let radii = default_fold_radii(9);
        for curve in CriticalCurve::ALL {
            if curve == CriticalCurve::L0 {
                continue;
            }
            let fit = fold_exponent(curve, &generic_base_point(curve), &radii).unwrap();
            assert!((fit.slope - expected_fold_slope(curve)).abs() < 0.05, "{} {}", fit.curve, fit.slope);
        }
    }

    #[test]
    fn area_lemma_equality_case() {
        let r = 0.6;
        let est = power_map_area_mc(2, &[Disk { center: c64(0.0, 0.0), radius: r }], 200_000, 4).unwrap();
        assert!((est.area_x - r * r).abs() < 4.0 * est.sigma_x);
        assert!((est.area_preimage - r).abs() < 4.0 * est.sigma_preimage);
        assert!(est.holds);
        let empty = power_map_area_mc(3, &[], 1000, 1).unwrap();
        assert_eq!((empty.area_x, empty.area_preimage), (0.0, 0.0));
        assert!(empty.holds);
    }

    #[test]
    fn mme_is_deterministic_and_backward_invariant() {
        let a = mme_sample(2000, 20, 11, 4).unwrap();
        let b = mme_sample(2000, 20, 11, 4).unwrap();
        assert_eq!(a.points().len(), 2000);
        for (x, y) in a.points().iter().zip(b.points()) {
            assert_eq!(x.coords(), y.coords());
        }
        assert!(mme_sample(10, 5, 0, 1).is_err());
    }

    #[test]
    fn stability_mig_and_phys() {
        let mig = stability_check(MapKind::Mig, 2, 3, 5).unwrap();
        for l in &mig.lines {
            assert_eq!(l.effective_degree, 16);
        }
        assert_eq!(mig.lines_with_common_roots, 0);
        let one = stability_check(MapKind::Phys, 1, 3, 5).unwrap();
        assert_eq!(one.lines_with_common_roots, 0);
        assert!(one.lines.iter().all(|l| l.effective_degree == 6));
        let two = stability_check(MapKind::Phys, 2, 3, 5).unwrap();
        assert_eq!(two.lines_with_common_roots, 3);
        for l in &two.lines {
            assert!(l.effective_degree > 16 && l.effective_degree < 36, "{}", l.effective_degree);
            // the lines Z = ±iT collapse onto the indeterminate point [0:1:0]
            let (x, d) = (l.base, l.direction);
            for sg in [1.0, -1.0] {
                let i = c64(0.0, sg);
                let s = -(x[0] - i * x[1]) / (d[0] - i * d[1]);
                assert!(l.common_roots.iter().any(|(c, m)| (c - s).norm() < 1e-6 && *m == 4), "{s}");
            }
            assert_eq!(l.effective_degree, 28);
        }
    }
}
