//! End-to-end acceptance checks.
//!
//! Each criterion runs with fixed seeds and returns a verdict with a short
//! measured summary. `Scale::Quick` shrinks sample counts for smoke runs;
//! thresholds are identical at both scales.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dd::Precision;
use crate::dynamics::{self, MapKind, RegionStats};
use crate::error::Error;
use crate::geometry::{chordal_dist, normalize, psi, LinearForm, PhysPoint, ProjPoint, SliceKind};
use crate::green::{self, default_probes, equidistribution_distance, green_partial, green_potential, random_unit_vector};
use crate::renorm::{apply_hat, apply_phys, hat, inverse_branches, CriticalCurve, FixedPointCatalog};
use crate::roots::{fisher_zeros, lee_yang_zeros, AberthOptions};
use crate::slice::{gibbs_oracle, partition_slice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Full,
    Quick,
}

impl Scale {
    fn pick<T>(self, full: T, quick: T) -> T {
        match self {
            Scale::Full => full,
            Scale::Quick => quick,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Wall time; kept out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    pub fn label(&self) -> String {
        format!("{:>2} {}", self.id, self.name)
    }
}

pub const CRITERIA: [(u8, &str); 14] = [
    (1, "gibbs-oracle"),
    (2, "lee-yang-circle"),
    (3, "fisher-cross-oracle"),
    (4, "semiconjugacy"),
    (5, "degrees-stability"),
    (6, "inverse-branches"),
    (7, "green-potential"),
    (8, "hermitian-norm-decay"),
    (9, "equidistribution-trend"),
    (10, "critical-locus"),
    (11, "solid-cylinders"),
    (12, "power-map-area"),
    (13, "mme-sanity"),
    (14, "determinism"),
];

pub fn run_all(scale: Scale) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, scale)).collect()
}

/// Runs one criterion; errors from the library count as failures.
pub fn run_criterion(id: u8, scale: Scale) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown");
    let clock = Instant::now();
    let outcome = match id {
        1 => gibbs(scale),
        2 => lee_yang(scale),
        3 => fisher(scale),
        4 => semiconjugacy(scale),
        5 => stability(scale),
        6 => branches(scale),
        7 => green_checks(scale),
        8 => decay(scale),
        9 => equidistribution(scale),
        10 => critical(scale),
        11 => cylinders(scale),
        12 => power_map(scale),
        13 => mme(scale),
        14 => determinism(scale),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: clock.elapsed().as_secs_f64(),
    }
}

type Verdict = crate::Result<(bool, String)>;

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn random_phys<R: Rng>(rng: &mut R) -> PhysPoint {
    let z = Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(-3.14..3.14));
    let t = Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(-3.14..3.14));
    PhysPoint::new(z, t)
}

fn gibbs(_: Scale) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_phys(&mut rng);
        for n in 0..=2 {
            let ps = partition_slice(&SliceKind::PhysicalTLine { t: p.t }, n)?;
            let val = ps.zhat.eval(p.z) * ps.log_scale.exp();
            worst = worst.max(rel_err(val, gibbs_oracle(n, p.z, p.t)?));
        }
    }
    Ok((worst < 1e-9, format!("max relative error {worst:.2e} over 20 points, n = 0..2")))
}

fn lee_yang(scale: Scale) -> Verdict {
    let n_max = scale.pick(4, 3);
    let opts = AberthOptions { seed: 5, ..AberthOptions::default() };
    let mut worst: f64 = 0.0;
    for k in 1..=9 {
        let t = Complex64::new(k as f64 / 10.0, 0.0);
        for n in 1..=n_max {
            let precision = if n >= 4 { Precision::DoubleDouble } else { Precision::Double };
            let ly = lee_yang_zeros(t, n, precision, &opts)?;
            if ly.roots.roots.len() != 2 << (2 * n) {
                return Ok((false, format!("t={t} n={n}: {} roots", ly.roots.roots.len())));
            }
            worst = worst.max(ly.max_circle_deviation);
        }
    }
    Ok((worst < 1e-6, format!("max ||z|-1| = {worst:.2e} for n <= {n_max}")))
}

fn fisher(scale: Scale) -> Verdict {
    let n_max = scale.pick(4, 3);
    let opts = AberthOptions { seed: 6, ..AberthOptions::default() };
    let mut worst: f64 = 0.0;
    for n in 1..=n_max {
        let precision = if n >= 4 { Precision::DoubleDouble } else { Precision::Double };
        worst = worst.max(fisher_zeros(n, precision, &opts)?.hausdorff_to_preimages);
    }
    Ok((worst < 1e-6, format!("max Hausdorff distance {worst:.2e} for n <= {n_max}")))
}

fn semiconjugacy(scale: Scale) -> Verdict {
    let count = scale.pick(10_000, 1_000);
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let p = random_phys(&mut rng);
        let lhs = psi(&apply_phys(&p)?)?;
        let rhs = apply_hat(&psi(&p)?)?.point;
        worst = worst.max(chordal_dist(&lhs, &rhs));
    }
    Ok((worst < 1e-10, format!("max chordal residual {worst:.2e} over {count} points")))
}

fn stability(_: Scale) -> Verdict {
    let mig = dynamics::stability_check(MapKind::Mig, 2, 3, 105)?;
    let phys = dynamics::stability_check(MapKind::Phys, 2, 3, 105)?;
    let mig_ok = mig.lines.iter().all(|l| l.common_roots.is_empty() && l.effective_degree == 16);
    let phys_ok = phys.lines_with_common_roots == 3
        && phys.lines.iter().all(|l| 16 < l.effective_degree && l.effective_degree < 36);
    let degs = |v: &dynamics::StabilityVerdict| v.lines.iter().map(|l| l.effective_degree.to_string()).collect::<Vec<_>>().join(",");
    Ok((
        mig_ok && phys_ok,
        format!(
            "mig effective degrees [{}]; phys effective degrees [{}] with common roots on {}/3 lines",
            degs(&mig),
            degs(&phys),
            phys.lines_with_common_roots
        ),
    ))
}

fn branches(scale: Scale) -> Verdict {
    let count = scale.pick(1_000, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let (mut worst, mut wrong_count) = (0.0f64, 0usize);
    for _ in 0..count {
        let target = normalize(random_unit_vector(&mut rng))?;
        let fib = inverse_branches(&target)?;
        wrong_count += usize::from(fib.branches.len() != 8);
        for b in &fib.branches {
            worst = worst.max(chordal_dist(&apply_hat(b)?.point, &target));
        }
    }
    let infinite = matches!(inverse_branches(&FixedPointCatalog::beta0()), Err(Error::InfiniteFiber));
    Ok((
        wrong_count == 0 && worst < 1e-9 && infinite,
        format!("{wrong_count} targets without 8 branches, max residual {worst:.2e}, [1:0:1] infinite fiber: {infinite}"),
    ))
}

fn green_checks(scale: Scale) -> Verdict {
    let tol = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut homog: f64 = 0.0;
    let mut equiv: f64 = 0.0;
    for _ in 0..100 {
        let x = random_unit_vector(&mut rng);
        let g = green_potential(&x, tol)?.value;
        let lambda = Complex64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(-3.14..3.14));
        for l in [Complex64::new(2.0, 0.0), lambda] {
            let y = x.map(|c| c * l);
            let d = green_potential(&y, tol)?.value - g - l.norm().ln();
            homog = homog.max(d.abs() / (1.0 + g.abs() + l.norm().ln().abs()));
        }
        let gr = green_potential(&hat(&x), tol)?.value;
        equiv = equiv.max((gr - 4.0 * g).abs());
    }
    let tail_count = scale.pick(1_000, 200);
    let mut tail_violations = 0;
    let mut tail_ratio: f64 = 0.0;
    for _ in 0..tail_count {
        let x = random_unit_vector(&mut rng);
        let gv = green_potential(&x, tol)?;
        let deeper = green_partial(&x, gv.level_used + 3)?;
        let diff = (deeper - gv.value).abs();
        tail_violations += usize::from(diff > gv.tail_bound);
        tail_ratio = tail_ratio.max(diff / gv.tail_bound);
    }
    let pass = homog < 1e-14 && equiv < 5.0 * tol && tail_violations == 0;
    Ok((
        pass,
        format!(
            "homogeneity rel. error {homog:.1e}; max |G(RX)-4G(X)| {equiv:.2e} (< {:.0e}); level+3 drift at most {tail_ratio:.2} of tailBound on {tail_count} points",
            5.0 * tol
        ),
    ))
}

fn decay(scale: Scale) -> Verdict {
    let samples = scale.pick(100_000, 10_000);
    let table = green::herm_norm_decay(samples, 8, &LinearForm::y0(), &[0.01, 0.05, 0.1], 108)?;
    let rows: Vec<_> = table.rows.iter().filter(|r| r.n >= 2).collect();
    let mut inversions = 0;
    let mut monotone = true;
    for w in rows.windows(2) {
        if w[1].mean_abs >= w[0].mean_abs {
            inversions += 1;
            let se = (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
            monotone &= w[1].mean_abs - w[0].mean_abs <= 2.0 * se;
        }
    }
    let over = table.rows.iter().filter(|r| r.max_signed > r.upper_bound + 1e-12).count();
    let means: Vec<String> = rows.iter().map(|r| format!("{:.1e}", r.mean_abs)).collect();
    Ok((
        monotone && over == 0,
        format!(
            "mean|phi_n| n=2..8: [{}]; {inversions} inversions; {over} levels above the upper bound; {} excluded",
            means.join(", "),
            table.excluded
        ),
    ))
}

/// `count` lines through two independent Gaussian points.
pub fn random_lines(count: usize, seed: u64) -> crate::Result<Vec<SliceKind>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Ok(SliceKind::Line {
                x0: ProjPoint::new(random_unit_vector(&mut rng))?,
                d: ProjPoint::new(random_unit_vector(&mut rng))?,
            })
        })
        .collect()
}

fn equidistribution(_: Scale) -> Verdict {
    let probes = default_probes(40, 7);
    let opts = AberthOptions { seed: 9, ..AberthOptions::default() };
    let mut decreasing = 0;
    let lines = random_lines(20, 109)?;
    for kind in &lines {
        let d: Vec<f64> = (2..=4)
            .map(|n| equidistribution_distance(kind, n, &probes, &opts).map(|r| r.distance))
            .collect::<crate::Result<_>>()?;
        decreasing += usize::from(d[1] < d[0] && d[2] < d[1]);
    }
    let l0 = SliceKind::Line {
        x0: ProjPoint::from_real(1.0, 0.0, 0.0)?,
        d: ProjPoint::from_real(0.0, 0.0, 1.0)?,
    };
    let on_l0 = equidistribution_distance(&l0, 2, &probes, &opts)?.distance;
    Ok((
        decreasing >= 18 && on_l0 < 1e-6,
        format!("strictly decreasing over n=2,3,4 on {decreasing}/20 lines; L0 distance {on_l0:.1e} at n=2"),
    ))
}

fn critical(_: Scale) -> Verdict {
    let rep = dynamics::critical_locus_residuals(100, 110)?;
    let on = rep.curves.iter().map(|c| c.max_on_curve).fold(0.0, f64::max);
    let off = rep.curves.iter().map(|c| c.min_control).fold(f64::INFINITY, f64::min);
    let radii = dynamics::default_fold_radii(25);
    let mut folds_ok = true;
    let mut slopes = Vec::new();
    for curve in [
        CriticalCurve::L1,
        CriticalCurve::L2,
        CriticalCurve::L3Plus,
        CriticalCurve::L3Minus,
        CriticalCurve::L4Plus,
        CriticalCurve::L4Minus,
    ] {
        let fit = dynamics::fold_exponent(curve, &dynamics::generic_base_point(curve), &radii)?;
        folds_ok &= (fit.slope - dynamics::expected_fold_slope(curve)).abs() < 0.05 && fit.r_squared > 0.99;
        slopes.push(format!("{} {:.3}", curve.name(), fit.slope));
    }
    Ok((
        rep.curves.len() == 7 && on < 1e-8 && off > 1e-6 && folds_ok,
        format!(
            "max |det| on curves {on:.1e}, min at controls {off:.1e}; slopes {}",
            slopes.join(", ")
        ),
    ))
}

fn region_ok(s: &RegionStats, expect_e: bool) -> (bool, f64) {
    let resolved = s.to_e + s.to_e_prime;
    let wrong = if expect_e { s.to_e_prime } else { s.to_e };
    let frac = resolved as f64 / s.samples.max(1) as f64;
    (wrong == 0 && frac >= 0.99 && s.outside_region == 0, frac)
}

fn cylinders(scale: Scale) -> Verdict {
    let samples = scale.pick(10_000, 1_000);
    let r = dynamics::solid_cylinder_suite(samples, dynamics::DEFAULT_BUDGET, 111)?;
    let checks = [
        ("SC", region_ok(&r.sc, true)),
        ("SC'", region_ok(&r.sc_prime, false)),
        ("phys inner", region_ok(&r.phys_inner, true)),
        ("phys outer", region_ok(&r.phys_outer, false)),
    ];
    let pass = checks.iter().all(|c| c.1 .0) && r.mirror_mismatches == 0;
    let parts: Vec<String> = checks.iter().map(|(n, (_, f))| format!("{n} resolved {f:.4}")).collect();
    Ok((pass, format!("{samples} samples each; {}; mirror mismatches {}", parts.join(", "), r.mirror_mismatches)))
}

fn power_map(scale: Scale) -> Verdict {
    let samples = scale.pick(1_000_000, 100_000);
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for d in 2..=4u32 {
        for k in 0..20u64 {
            let set = dynamics::random_disk_union(&mut rng);
            let est = dynamics::power_map_area_mc(d, &set, samples, 1000 * d as u64 + k)?;
            violations += usize::from(!est.holds);
            slack = slack.min(est.bound + 3.0 * est.sigma - est.area_preimage);
        }
    }
    Ok((violations == 0, format!("{violations} of 60 disk unions violate the bound; minimum slack {slack:.2e}")))
}

fn mme(scale: Scale) -> Verdict {
    let samples = scale.pick(100_000, 10_000);
    let cloud = dynamics::mme_sample(samples, 50, 113, dynamics::DEFAULT_MME_CHAINS)?;
    let r = dynamics::mme_report(&cloud);
    let floor = 0.5 * 2f64.ln() - 0.1;
    Ok((
        r.lyapunov_proxy >= floor && r.unresolved_fraction >= 0.99 && r.tv_drift < 0.05,
        format!(
            "Lyapunov proxy {:.4} (floor {floor:.4}); unresolved {:.4}; TV drift {:.2e}",
            r.lyapunov_proxy, r.unresolved_fraction, r.tv_drift
        ),
    ))
}

/// Arguments for one small run of each stochastic command.
pub fn determinism_runs() -> Vec<Vec<&'static str>> {
    vec![
        vec!["ly-zeros", "--t", "0.5", "--n", "3"],
        vec!["fisher-zeros", "--n", "3"],
        vec!["slice-zeros", "--slice", "line=1,0.3+0.2i,-0.4+0.1i/0.2-0.1i,0.5,0.7+0.3i", "--n", "2"],
        vec!["equidist", "--slice", "t=0.5", "--levels", "2,3", "--probes", "20"],
        vec!["herm-decay", "--samples", "5000", "--n-max", "5"],
        vec!["basins", "--samples", "500"],
        vec!["mme", "--samples", "5000", "--burn-in", "20", "--chains", "4"],
        vec!["critical", "--samples", "20"],
        vec!["volume-mc", "--sets", "3", "--samples", "20000"],
        vec!["stability", "--map", "phys", "--n", "2", "--lines", "2"],
    ]
}

fn artifacts_without_sidecar(dir: &Path) -> crate::Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| !p.to_string_lossy().ends_with(".meta.json"))
        .map(|p| {
            let name = p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            fs::read(&p).map(|b| (name, b))
        })
        .collect::<Result<_, _>>()?;
    files.sort();
    Ok(files)
}

fn determinism(_: Scale) -> Verdict {
    let root: PathBuf = std::env::temp_dir().join(format!("dhl-determinism-{}", std::process::id()));
    let mut differing = Vec::new();
    let mut compared = 0;
    for args in determinism_runs() {
        let name = args[0];
        let mut outputs = Vec::new();
        // one single-threaded and one default-threaded run
        for (k, threads) in ["1", "0"].iter().enumerate() {
            let dir = root.join(format!("{name}-{k}"));
            let _ = fs::remove_dir_all(&dir);
            let mut argv = vec!["dhl"];
            argv.extend(&args);
            let dir_s = dir.to_string_lossy().into_owned();
            argv.extend(["--seed", "2024", "--threads", threads, "--out", &dir_s]);
            crate::cli::execute(&argv).map_err(|e| Error::InvalidArgument(format!("{name}: {e}")))?;
            outputs.push(artifacts_without_sidecar(&dir)?);
        }
        compared += outputs[0].len();
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            differing.push(name);
        }
    }
    let _ = fs::remove_dir_all(&root);
    Ok((
        differing.is_empty(),
        if differing.is_empty() {
            format!("{compared} artifacts from {} stochastic commands identical across runs", crate::cli::STOCHASTIC_COMMANDS.len())
        } else {
            format!("artifacts differ for {}", differing.join(", "))
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_table_is_complete() {
        let ids: Vec<u8> = CRITERIA.iter().map(|c| c.0).collect();
        assert_eq!(ids, (1..=14).collect::<Vec<u8>>());
        let runs: Vec<&str> = determinism_runs().iter().map(|r| r[0]).collect();
        assert_eq!(runs, crate::cli::STOCHASTIC_COMMANDS);
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = run_criterion(99, Scale::Quick);
        assert!(!r.passed);
    }

    #[test]
    fn quick_gibbs_passes() {
        assert!(run_criterion(1, Scale::Quick).passed);
    }
}
