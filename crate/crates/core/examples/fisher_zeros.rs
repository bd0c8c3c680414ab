//! Fisher zeros on the zero-field line compared with iterated preimages of
//! t = -1 under the one-dimensional renormalization map, plus the repelling
//! critical point of that map.

use dhl_rg::dd::Precision;
use dhl_rg::dynamics::fisher_critical_point;
use dhl_rg::roots::{fisher_zeros, AberthOptions};

fn main() -> dhl_rg::Result<()> {
    for n in 1..=4 {
        let precision = if n == 4 { Precision::DoubleDouble } else { Precision::Double };
        let fz = fisher_zeros(n, precision, &AberthOptions::default())?;
        println!(
            "n={n}: {:>3} zeros, Hausdorff distance to preimage tree {:.1e}",
            fz.roots.roots.len(),
            fz.hausdorff_to_preimages
        );
    }
    let (tc, (lo, hi)) = fisher_critical_point(1e-12)?;
    println!("t_c = {tc:.12} (bracket [{lo:.3e}, {hi:.3e}])");
    println!("t_c^3 + t_c^2 + 3 t_c - 1 = {:.1e}", tc.powi(3) + tc * tc + 3.0 * tc - 1.0);
    Ok(())
}
