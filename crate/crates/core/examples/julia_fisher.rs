//! Basins of the Fisher map t -> (2t/(t^2+1))^2 written as a PGM.

use std::path::Path;

use dhl_rg::dynamics::{julia_1d, PixelClass};
use dhl_rg::green::Rect;
use dhl_rg::io::write_class_pgm;

fn main() -> dhl_rg::Result<()> {
    let j = julia_1d(Rect::new(-2.0, 2.0, -2.0, 2.0)?, 400, 200)?;
    let path = Path::new("target/julia_fisher.pgm");
    write_class_pgm(path, &j.raster)?;
    println!("t_c = {:.10}", j.t_critical);
    println!(
        "low-temperature basin {}, high-temperature basin {}, unresolved {}",
        j.raster.count(PixelClass::ToBeta1),
        j.raster.count(PixelClass::ToBeta0),
        j.raster.count(PixelClass::Unresolved)
    );
    println!("wrote {}", path.display());
    Ok(())
}
