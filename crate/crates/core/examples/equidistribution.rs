//! Zeros of a slice polynomial approximate the Green current: the root
//! potential converges to the Green potential, and the grid Laplacian of G
//! sits on the zeros.

use dhl_rg::dd::Precision;
use dhl_rg::geometry::make_slice;
use dhl_rg::green::{default_probes, equidistribution_distance, laplacian_density, potential_grid, Rect};
use dhl_rg::roots::{slice_zeros_on, AberthOptions};
use dhl_rg::{c64, LinearForm, ProjPoint, SliceKind};

fn main() -> dhl_rg::Result<()> {
    let kind = SliceKind::Line {
        x0: ProjPoint::new([c64(1.0, 0.0), c64(0.3, 0.2), c64(-0.4, 0.1)])?,
        d: ProjPoint::new([c64(0.2, -0.1), c64(0.5, 0.0), c64(0.7, 0.3)])?,
    };
    let probes = default_probes(40, 7);
    let opts = AberthOptions::default();
    for n in 2..=4 {
        let r = equidistribution_distance(&kind, n, &probes, &opts)?;
        println!("n={n}: sup |root potential - G| = {:.2e} over {} probes", r.distance, r.probes_used);
    }

    let slice = make_slice(&kind)?;
    let zeros = slice_zeros_on(&slice, 4, LinearForm::y0(), Precision::Double, &opts)?;
    let (res, rect) = (200, Rect::new(-3.0, 3.0, -3.0, 3.0)?);
    let dens = laplacian_density(&potential_grid(&slice, rect, res, 1e-10));
    let (hx, hy) = rect.spacing(res);
    let (mut near, mut total) = (0.0, 0.0);
    for i in 0..res - 2 {
        for j in 0..res - 2 {
            let c = dens.cell(i, j);
            total += dens.density[i][j];
            if zeros.roots.iter().any(|r| (r.re - c.re).abs() <= 3.0 * hx && (r.im - c.im).abs() <= 3.0 * hy) {
                near += dens.density[i][j];
            }
        }
    }
    println!("Laplacian mass within 3 cells of a level-4 zero: {:.1}%", 100.0 * near / total);
    Ok(())
}
