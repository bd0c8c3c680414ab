//! Lee-Yang zeros at several temperatures: all on the unit circle, with
//! the angular distribution sharpening as the level grows.

use dhl_rg::dd::Precision;
use dhl_rg::roots::{angular_histogram, lee_yang_zeros, AberthOptions};
use dhl_rg::c64;

fn main() -> dhl_rg::Result<()> {
    let opts = AberthOptions { seed: 1, ..AberthOptions::default() };
    for t in [0.2, 0.5, 0.8] {
        for n in 1..=4 {
            let precision = if n == 4 { Precision::DoubleDouble } else { Precision::Double };
            let ly = lee_yang_zeros(c64(t, 0.0), n, precision, &opts)?;
            println!(
                "t={t} n={n}: {:>3} zeros, max ||z|-1| = {:.1e}",
                ly.roots.roots.len(),
                ly.max_circle_deviation
            );
        }
    }
    let ly = lee_yang_zeros(c64(0.5, 0.0), 4, Precision::DoubleDouble, &opts)?;
    let h = angular_histogram(&ly.measure, 12)?;
    println!("angular density at t=0.5, n=4:");
    for b in &h.bins {
        println!("  {:>6.3} rad  {}", b.center, "#".repeat((b.density * 40.0).round() as usize));
    }
    Ok(())
}
