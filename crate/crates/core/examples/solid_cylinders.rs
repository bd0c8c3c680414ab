//! Orbits started in the solid cylinders converge to the fixed point the
//! cylinder is attached to.

use dhl_rg::dynamics::{solid_cylinder_suite, DEFAULT_BUDGET};

fn main() -> dhl_rg::Result<()> {
    let r = solid_cylinder_suite(2_000, DEFAULT_BUDGET, 3)?;
    for (name, s) in [("SC", &r.sc), ("SC'", &r.sc_prime), ("phys |z|<1", &r.phys_inner), ("phys |z|>1", &r.phys_outer)] {
        println!(
            "{name:<11} e: {:>5}  e': {:>5}  unresolved: {:>3}  indeterminate: {}",
            s.to_e, s.to_e_prime, s.unresolved, s.indeterminate
        );
    }
    println!("mirror mismatches: {}", r.mirror_mismatches);
    Ok(())
}
