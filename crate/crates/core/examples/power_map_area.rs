//! Monte-Carlo check that preimages under w -> w^d have area at most the
//! d-th root of the original (areas normalized so the unit disk has area 1).

use dhl_rg::dynamics::{power_map_area_mc, random_disk_union, Disk};
use dhl_rg::c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dhl_rg::Result<()> {
    let centered = [Disk { center: c64(0.0, 0.0), radius: 0.5 }];
    let a = power_map_area_mc(2, &centered, 400_000, 1)?;
    println!(
        "centered disk, d=2: area {:.4}, preimage {:.4} +- {:.4}, bound {:.4}",
        a.area_x, a.area_preimage, a.ci99_preimage, a.bound
    );
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for d in 2..=4 {
        let set = random_disk_union(&mut rng);
        let a = power_map_area_mc(d, &set, 400_000, d as u64)?;
        println!(
            "{} disks, d={d}: preimage {:.4} <= {:.4} + 3 sigma: {}",
            set.len(),
            a.area_preimage,
            a.bound,
            a.holds
        );
    }
    Ok(())
}
