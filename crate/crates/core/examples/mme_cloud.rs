//! Random backward orbits sample the measure of maximal entropy.

use dhl_rg::dynamics::{mme_report, mme_sample, DEFAULT_MME_CHAINS};

fn main() -> dhl_rg::Result<()> {
    let cloud = mme_sample(20_000, 50, 17, DEFAULT_MME_CHAINS)?;
    let r = mme_report(&cloud);
    println!("{} samples from {} chains", r.samples, cloud.chains);
    println!("Lyapunov proxy      {:.4} (log sqrt 2 = {:.4})", r.lyapunov_proxy, 0.5 * 2f64.ln());
    println!("unresolved fraction {:.4}", r.unresolved_fraction);
    println!("forward-push drift  {:.2e}", r.tv_drift);
    Ok(())
}
