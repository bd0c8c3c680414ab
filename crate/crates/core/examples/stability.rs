//! The homogeneous map is algebraically stable; its physical conjugate is
//! not, which shows up as common roots of the composed lift on a line.

use dhl_rg::dynamics::{stability_check, MapKind};

fn main() -> dhl_rg::Result<()> {
    for (map, n) in [(MapKind::Mig, 2), (MapKind::Phys, 1), (MapKind::Phys, 2)] {
        let v = stability_check(map, n, 3, 11)?;
        for l in &v.lines {
            let common: Vec<String> = l.common_roots.iter().map(|(s, m)| format!("{s:.4} (x{m})")).collect();
            println!(
                "{map:?} n={n}: formal degree {:>2}, effective {:>2}, common roots [{}]",
                l.formal_degree,
                l.effective_degree,
                common.join(", ")
            );
        }
    }
    Ok(())
}
