// The determinant route at sizes where the value leaves the f64 range.

use std::time::Instant;

use ellipdw::boundary::BoundaryConfig;
use ellipdw::closedform::{full_z, normalized_z_determinant, ClosedRoute, PrefactorKind};
use ellipdw::spectral::{DrawSpec, SpectralConfig};
use ellipdw::{ModularSetup, Result};

fn run_example() -> Result<Vec<(usize, f64)>> {
    let setup = ModularSetup::default();
    let bc = BoundaryConfig::default();
    let draw = DrawSpec {
        re: 0.45,
        im: 0.25,
        margin: setup.genericity_floor,
    };
    let mut out = Vec::new();
    for n in [32, 64, 128] {
        let sp = SpectralConfig::random(n, 1, &draw, &setup, Some(&bc))?;
        let t0 = Instant::now();
        let z = full_z(&sp, &bc, &setup, ClosedRoute::Determinant, PrefactorKind::Derived)?;
        let secs = t0.elapsed().as_secs_f64();
        let d = normalized_z_determinant(&sp, &bc, &setup)?;
        println!(
            "N={n:<4} log10|Z| = {:>9.3}  Z = {}  pivot ratio {:.1e}{}  {secs:.3}s",
            z.log10_abs(),
            z.digest(6),
            d.pivot_ratio.unwrap_or(1.0),
            if d.conditioning_warning {
                " (ill-conditioned)"
            } else {
                ""
            }
        );
        out.push((n, z.log10_abs()));
    }
    Ok(out)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
