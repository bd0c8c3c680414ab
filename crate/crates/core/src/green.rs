//! Green potential of `R̂`, free-energy convergence, Hermitian-norm decay,
//! potential grids over slices and equidistribution of slice zeros.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dd::Precision;
use crate::error::{Error, Result};
use crate::geometry::{make_slice, norm3, LinearForm, RationalSlice, SliceKind, Vec3};
use crate::renorm::hat;
use crate::roots::{slice_zeros, AberthOptions};
use crate::slice::eval_log_z;

/// Twice the sampled supremum of `|log‖R̂(X)‖|` over the unit sphere
/// (4·10⁶ Gaussian samples gave 7.66); used only in stopping rules.
pub const TAIL_CONSTANT: f64 = 16.0;

/// Deepest level the series is ever summed to.
pub const MAX_GREEN_LEVEL: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenValue {
    pub value: f64,
    /// Bound on the omitted tail of the series.
    #[serde(rename = "tailBound")]
    pub tail_bound: f64,
    #[serde(rename = "levelUsed")]
    pub level_used: usize,
}

/// `4^{−n}·M/3`, the bound on `Σ_{k≥n} 4^{−(k+1)} log cₖ`.
pub fn tail_bound(n: usize) -> f64 {
    TAIL_CONSTANT * 0.25f64.powi(n as i32) / 3.0
}

/// Smallest level whose tail bound is below `tol`.
pub fn level_for_tolerance(tol: f64) -> usize {
    (0..=MAX_GREEN_LEVEL).find(|&n| tail_bound(n) < tol).unwrap_or(MAX_GREEN_LEVEL)
}

/// The partial sum `log‖X‖ + Σ_{k<n} 4^{−(k+1)} log cₖ` along the normalized orbit.
pub fn green_partial(x: &Vec3, n: usize) -> Result<f64> {
    let nx = norm3(x);
    if !(nx > 0.0) || !nx.is_finite() {
        return Err(Error::ZeroVector);
    }
    let mut u = [x[0] / nx, x[1] / nx, x[2] / nx];
    let mut acc = 0.0;
    let mut w = 0.25;
    for step in 0..n {
        let y = hat(&u);
        let c = norm3(&y);
        if !(c >= 1e-300) {
            return Err(Error::IndeterminateOrbit { step });
        }
        acc += w * c.ln();
        w *= 0.25;
        u = [y[0] / c, y[1] / c, y[2] / c];
    }
    Ok(nx.ln() + acc)
}

/// `G(X) = lim 4^{−n} log‖R̂ⁿX‖`, summed until the tail bound drops below `tol`.
pub fn green_potential(x: &Vec3, tol: f64) -> Result<GreenValue> {
    let n = level_for_tolerance(tol);
    Ok(GreenValue {
        value: green_partial(x, n)?,
        tail_bound: tail_bound(n),
        level_used: n,
    })
}

/// `(1/(2·4ⁿ))·log|Ẑₙ(z,t)|`.
pub fn free_energy_per_bond(z: Complex64, t: Complex64, n: usize) -> Result<f64> {
    Ok(eval_log_z(z, t, n)? / (2.0 * 4f64.powi(n as i32)))
}

/// Uniformly distributed point of the unit sphere in `C³`.
pub fn random_unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for c in x.iter_mut() {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        *c = Complex64::new(a, b);
    }
    let n = norm3(&x);
    [x[0] / n, x[1] / n, x[2] / n]
}

/// Samples drawn in fixed-size chunks, each from its own ChaCha stream, so the
/// result does not depend on the thread count.
pub fn par_samples<T: Send>(count: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    const CHUNK: usize = 1024;
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub n: usize,
    #[serde(rename = "meanAbs")]
    pub mean_abs: f64,
    /// Monte-Carlo standard error of `mean_abs`.
    #[serde(rename = "stdErr")]
    pub std_err: f64,
    #[serde(rename = "maxAbs")]
    pub max_abs: f64,
    /// Largest signed value; bounded above by `log‖Y‖·4^{−n}`.
    #[serde(rename = "maxSigned")]
    pub max_signed: f64,
    #[serde(rename = "upperBound")]
    pub upper_bound: f64,
    /// `(r, fraction with |φₙ| > r)`.
    #[serde(rename = "tailFractions")]
    pub tail_fractions: Vec<(f64, f64)>,
    /// Least-squares `γ` in `P(|φₙ| > r) ≈ C·exp(−γ·r·2ⁿ)`; `None` when
    /// fewer than two radii have a nonzero tail.
    #[serde(rename = "fittedGamma")]
    pub fitted_gamma: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub samples: usize,
    /// Samples whose orbit hit the indeterminacy locus.
    pub excluded: usize,
}

/// `φₙ(X) = 4^{−n}(log|Y(R̂ⁿX)| − log‖R̂ⁿX‖)` over uniform random unit `X`,
/// for `n = 0..=n_max`.
pub fn herm_norm_decay(sample_count: usize, n_max: usize, y: &LinearForm, radii: &[f64], seed: u64) -> Result<DecayTable> {
    if y.p == Complex64::new(0.0, 0.0) || y.r == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("the linear form needs p != 0 and r != 0".into()));
    }
    let samples: Vec<Option<Vec<f64>>> = par_samples(sample_count, seed, |rng| {
        let mut u = random_unit_vector(rng);
        let mut out = Vec::with_capacity(n_max + 1);
        let mut w = 1.0;
        for n in 0..=n_max {
            let yv = y.eval(&u).norm();
            if !(yv > 0.0) {
                return None;
            }
            out.push(w * yv.ln());
            if n < n_max {
                let img = hat(&u);
                let c = norm3(&img);
                if !(c >= 1e-300) {
                    return None;
                }
                u = [img[0] / c, img[1] / c, img[2] / c];
                w *= 0.25;
            }
        }
        Some(out)
    });
    let excluded = samples.iter().filter(|s| s.is_none()).count();
    let good: Vec<&Vec<f64>> = samples.iter().flatten().collect();
    let m = good.len() as f64;
    let log_norm_y = y.coefficient_norm().ln();
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let vals: Vec<f64> = good.iter().map(|v| v[n]).collect();
        let mean_abs = vals.iter().map(|v| v.abs()).sum::<f64>() / m;
        let var = vals.iter().map(|v| (v.abs() - mean_abs).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        let scale = 2f64.powi(n as i32);
        let tail_fractions: Vec<(f64, f64)> = radii
            .iter()
            .map(|&r| (r, vals.iter().filter(|v| v.abs() > r).count() as f64 / m))
            .collect();
        rows.push(DecayRow {
            n,
            mean_abs,
            std_err: (var / m).sqrt(),
            max_abs: vals.iter().map(|v| v.abs()).fold(0.0, f64::max),
            max_signed: vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            upper_bound: log_norm_y * 0.25f64.powi(n as i32),
            fitted_gamma: fit_tail_exponent(&tail_fractions, scale),
            tail_fractions,
        });
    }
    Ok(DecayTable {
        rows,
        samples: sample_count,
        excluded,
    })
}

fn fit_tail_exponent(tail: &[(f64, f64)], scale: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = tail.iter().filter(|(_, f)| *f > 0.0).map(|(r, f)| (r * scale, f.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let (slope, _, _) = linear_fit(&pts);
    Some(-slope)
}

/// Least-squares line through `(x, y)` pairs: `(slope, intercept, R²)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// Axis-aligned rectangle in the slice parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_max > re_min && im_max > im_min) {
            return Err(Error::InvalidArgument("empty rectangle".into()));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    /// Pixel centers on a `res × res` grid, written symmetrically about the
    /// rectangle center so that conjugate-symmetric rectangles give exactly
    /// conjugate pixel coordinates. Row 0 is the top (largest imaginary part).
    pub fn pixel(&self, res: usize, row: usize, col: usize) -> Complex64 {
        let (hx, hy) = self.spacing(res);
        let cx = 0.5 * (self.re_min + self.re_max);
        let cy = 0.5 * (self.im_min + self.im_max);
        let mid = (res as f64 - 1.0) / 2.0;
        Complex64::new(cx + (col as f64 - mid) * hx, cy - (row as f64 - mid) * hy)
    }

    pub fn spacing(&self, res: usize) -> (f64, f64) {
        let k = res.saturating_sub(1).max(1) as f64;
        ((self.re_max - self.re_min) / k, (self.im_max - self.im_min) / k)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PotentialGrid {
    pub slice: RationalSlice,
    pub rect: Rect,
    pub resolution: usize,
    pub tol: f64,
    /// Row-major, row 0 at the top.
    pub samples: Vec<Vec<Option<GreenValue>>>,
    /// Cells whose orbit hit the indeterminacy locus or whose tail bound
    /// exceeds `tol`.
    pub flagged: usize,
    pub header: String,
}

impl PotentialGrid {
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.samples[row][col].map(|g| g.value)
    }
}

/// `G(ℓ(s))` on a grid of slice parameters, `ℓ(s)` taken without normalization
/// so that the grid is the pluripotential restricted to the slice.
pub fn potential_grid(slice: &RationalSlice, rect: Rect, res: usize, tol: f64) -> PotentialGrid {
    let samples: Vec<Vec<Option<GreenValue>>> = (0..res)
        .into_par_iter()
        .map(|row| {
            (0..res)
                .map(|col| {
                    let s = rect.pixel(res, row, col);
                    green_potential(&slice.eval(s), tol).ok()
                })
                .collect()
        })
        .collect();
    let flagged = samples
        .iter()
        .flatten()
        .filter(|c| c.map_or(true, |g| g.tail_bound > tol))
        .count();
    let header = format!(
        "G(l(s)) for the unnormalized slice vector l(s); the slice logScale {} adds a constant; tail bound {} per cell",
        slice.log_scale,
        tail_bound(level_for_tolerance(tol))
    );
    PotentialGrid {
        slice: slice.clone(),
        rect,
        resolution: res,
        tol,
        samples,
        flagged,
        header,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistributionResult {
    pub n: usize,
    pub distance: f64,
    pub probes_used: usize,
    pub probes_dropped: usize,
}

/// Probe points with moduli log-uniform in `[0.05, 0.4] ∪ [2.5, 20]`.
pub fn default_probes(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let (lo, hi): (f64, f64) = if k % 2 == 0 { (0.05, 0.4) } else { (2.5, 20.0) };
            let r = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
            Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

/// `log|Y(R̂ⁿ(top coefficients))|`: the log-modulus of the leading coefficient
/// of `Y ∘ R̂ⁿ ∘ ℓ`, which evolves by the map itself.
pub fn log_leading_coefficient(slice: &RationalSlice, n: usize, form: &LinearForm) -> Result<f64> {
    let d = slice.degree();
    let top = [slice.p_u.coeffs()[d], slice.p_v.coeffs()[d], slice.p_w.coeffs()[d]];
    let mut u = top;
    let nu = norm3(&u);
    if !(nu > 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut log_scale = nu.ln();
    for c in u.iter_mut() {
        *c /= nu;
    }
    for _ in 0..n {
        let y = hat(&u);
        let c = norm3(&y);
        if !(c >= 1e-300) {
            return Err(Error::InconclusiveNumerics("leading coefficients hit the indeterminacy locus".into()));
        }
        log_scale = 4.0 * log_scale + c.ln();
        u = [y[0] / c, y[1] / c, y[2] / c];
    }
    let yv = form.eval(&u).norm();
    if !(yv > 0.0) {
        return Err(Error::InconclusiveNumerics("degree drops: leading coefficient vanishes".into()));
    }
    Ok(log_scale + slice.log_scale * 4f64.powi(n as i32) + yv.ln())
}

/// `max_s |4^{−n}(Σ log|s − rᵢ| + log|lead| + logScale) − G(ℓ(s))|` over probes
/// at least `1e−3` from the zero set.
pub fn equidistribution_distance(kind: &SliceKind, n: usize, probes: &[Complex64], opts: &AberthOptions) -> Result<EquidistributionResult> {
    let slice = make_slice(kind)?;
    let form = LinearForm::y0();
    let roots = slice_zeros(kind, n, form, Precision::Double, opts)?;
    let lead = log_leading_coefficient(&slice, n, &form)?;
    let scale = 0.25f64.powi(n as i32);
    let mut distance: f64 = 0.0;
    let mut used = 0;
    let mut dropped = 0;
    for &s in probes {
        let dmin = roots.roots.iter().map(|r| (s - r).norm()).fold(f64::INFINITY, f64::min);
        if dmin < 1e-3 {
            dropped += 1;
            continue;
        }
        let g = match green_potential(&slice.eval(s), 1e-12) {
            Ok(g) => g.value,
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        let sum: f64 = roots.roots.iter().map(|r| (s - r).norm().ln()).sum();
        distance = distance.max((scale * (sum + lead) - g).abs());
        used += 1;
    }
    Ok(EquidistributionResult {
        n,
        distance,
        probes_used: used,
        probes_dropped: dropped,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityTable {
    pub rect: Rect,
    pub resolution: usize,
    /// Interior cells only: `(res − 2) × (res − 2)`, normalized to unit mass.
    pub density: Vec<Vec<f64>>,
    /// Clipped negative mass as a fraction of the positive mass.
    #[serde(rename = "negativeFraction")]
    pub negative_fraction: f64,
}

impl DensityTable {
    /// Parameter of interior cell `(i, j)`.
    pub fn cell(&self, i: usize, j: usize) -> Complex64 {
        self.rect.pixel(self.resolution, i + 1, j + 1)
    }
}

/// Five-point Laplacian of the grid potential, clipped at zero and
/// normalized to total mass one over the window.
pub fn laplacian_density(grid: &PotentialGrid) -> DensityTable {
    let res = grid.resolution;
    let (hx, hy) = grid.rect.spacing(res);
    let inner = res.saturating_sub(2);
    let mut density = vec![vec![0.0; inner]; inner];
    let (mut pos, mut neg) = (0.0, 0.0);
    for i in 1..res - 1 {
        for j in 1..res - 1 {
            let get = |r: usize, c: usize| grid.value(r, c);
            let vals = [get(i, j), get(i - 1, j), get(i + 1, j), get(i, j - 1), get(i, j + 1)];
            if vals.iter().any(|v| v.is_none()) {
                continue;
            }
            let [c, n, s, w, e] = vals.map(|v| v.unwrap());
            let lap = (w + e - 2.0 * c) / (hx * hx) + (n + s - 2.0 * c) / (hy * hy);
            if lap >= 0.0 {
                density[i - 1][j - 1] = lap;
                pos += lap;
            } else {
                neg -= lap;
            }
        }
    }
    if pos > 0.0 {
        let area = hx * hy;
        for row in density.iter_mut() {
            for v in row.iter_mut() {
                *v /= pos * area;
            }
        }
    }
    DensityTable {
        rect: grid.rect,
        resolution: res,
        density,
        negative_fraction: if pos > 0.0 { neg / pos } else { 0.0 },
    }
}
