//! Basin raster on a generic line in the projective plane with the zeros of
//! U - W at level 3 marked in red.

use std::path::Path;

use dhl_rg::dynamics::julia_slice_2d;
use dhl_rg::geometry::make_slice;
use dhl_rg::green::Rect;
use dhl_rg::io::write_class_ppm;
use dhl_rg::{c64, ProjPoint, SliceKind};

fn main() -> dhl_rg::Result<()> {
    let kind = SliceKind::Line {
        x0: ProjPoint::new([c64(1.0, 0.0), c64(0.3, 0.2), c64(-0.4, 0.1)])?,
        d: ProjPoint::new([c64(0.2, -0.1), c64(0.5, 0.0), c64(0.7, 0.3)])?,
    };
    let slice = make_slice(&kind)?;
    let js = julia_slice_2d(&slice, Rect::new(-3.0, 3.0, -3.0, 3.0)?, 300, 200, Some(3))?;
    let overlay = js.overlay.as_ref().expect("overlay requested");
    println!(
        "{} of {} zeros in the window; {:.1}% lie within two pixels of the Julia proxy",
        overlay.roots_in_window,
        overlay.roots.len(),
        100.0 * overlay.fraction_near_julia
    );
    let path = Path::new("target/julia_slice.ppm");
    write_class_ppm(path, &js.raster, &overlay.roots)?;
    println!("wrote {}", path.display());
    Ok(())
}
