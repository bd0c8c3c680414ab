//! Exact partition functions of the diamond hierarchical lattice on the
//! physical z-line, checked against brute-force Gibbs sums.

use dhl_rg::slice::{gibbs_oracle, partition_slice};
use dhl_rg::{c64, SliceKind};

fn main() -> dhl_rg::Result<()> {
    let (z, t) = (c64(0.8, 0.3), c64(0.4, -0.2));
    for n in 0..=2 {
        let ps = partition_slice(&SliceKind::PhysicalTLine { t }, n)?;
        let value = ps.zhat.eval(z) * ps.log_scale.exp();
        let brute = gibbs_oracle(n, z, t)?;
        println!(
            "n={n}: degree {:>3}, Z = {value:.10}, Gibbs sum = {brute:.10}, rel. err {:.1e}",
            ps.zhat.degree(),
            (value - brute).norm() / brute.norm()
        );
    }
    let ps = partition_slice(&SliceKind::PhysicalTLine { t: c64(0.5, 0.0) }, 5)?;
    println!("n=5 at t=0.5: degree {}, log scale {:.3}", ps.zhat.degree(), ps.log_scale);
    Ok(())
}
