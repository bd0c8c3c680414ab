use dhl_rg::dynamics::{critical_locus_residuals, default_fold_radii, expected_fold_slope, fold_exponent, generic_base_point};
use dhl_rg::renorm::CriticalCurve;

fn main() -> dhl_rg::Result<()> {
    let rep = critical_locus_residuals(100, 5)?;
    for c in &rep.curves {
        println!("{:<4} max |det| on curve {:.1e}, min off curve {:.1e}", c.curve, c.max_on_curve, c.min_control);
    }
    println!("image conic of the indeterminacy points: min |det| {:.2e}", rep.conic_min);

    let radii = default_fold_radii(25);
    for curve in CriticalCurve::ALL {
        match fold_exponent(curve, &generic_base_point(curve), &radii) {
            Ok(f) => println!(
                "{:<4} slope {:.4} (expected {}), R^2 {:.6}",
                f.curve,
                f.slope,
                expected_fold_slope(curve),
                f.r_squared
            ),
            Err(e) => println!("{:<4} {e}", curve.name()),
        }
    }
    Ok(())
}
