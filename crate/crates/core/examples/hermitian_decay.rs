//! L1 decay of the normalized log ratio between a linear form and the
//! Hermitian norm along orbits.

use dhl_rg::green::herm_norm_decay;
use dhl_rg::LinearForm;

fn main() -> dhl_rg::Result<()> {
    let table = herm_norm_decay(20_000, 8, &LinearForm::y0(), &[0.001, 0.01, 0.1], 42)?;
    println!(" n   mean|phi|     stderr      max|phi|    bound");
    for r in &table.rows {
        println!(
            "{:>2}   {:.3e}   {:.2e}   {:.3e}   {:.3e}",
            r.n, r.mean_abs, r.std_err, r.max_abs, r.upper_bound
        );
    }
    println!("{} samples, {} excluded", table.samples, table.excluded);
    Ok(())
}
