//! The Green potential with its tail bound, and convergence of the free
//! energy per bond toward it.

use dhl_rg::geometry::psi;
use dhl_rg::green::{free_energy_per_bond, green_potential};
use dhl_rg::renorm::hat;
use dhl_rg::{c64, PhysPoint};

fn main() -> dhl_rg::Result<()> {
    let x = [c64(0.3, 0.1), c64(-0.5, 0.2), c64(0.7, -0.4)];
    let g = green_potential(&x, 1e-12)?;
    println!("G(X) = {:.15} (tail bound {:.1e}, level {})", g.value, g.tail_bound, g.level_used);
    let gr = green_potential(&hat(&x), 1e-12)?;
    println!("G(RX) - 4 G(X) = {:.1e}", gr.value - 4.0 * g.value);

    let (z, t) = (c64(0.9, 0.4), c64(0.6, 0.1));
    let mut prev = None;
    for n in 1..=10 {
        let f = free_energy_per_bond(z, t, n)?;
        match prev {
            Some(p) => println!("n={n:>2}: f = {f:.15}  change {:.1e}", f - p),
            None => println!("n={n:>2}: f = {f:.15}"),
        }
        prev = Some(f);
    }
    let lift = psi(&PhysPoint::new(z, t))?;
    println!("G at the projective image: {:.15}", green_potential(lift.coords(), 1e-12)?.value);
    Ok(())
}
