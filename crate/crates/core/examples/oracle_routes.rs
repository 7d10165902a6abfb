// The three direct evaluations: edge-spin enumeration, double-row
// contraction and the face-type creation operators.

use ellipdw::boundary::BoundaryConfig;
use ellipdw::oracle::{partition_bruteforce, partition_enumeration, partition_face_route};
use ellipdw::spectral::{DrawSpec, SpectralConfig};
use ellipdw::{ModularSetup, Result, C64};

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

fn run_example() -> Result<f64> {
    let setup = ModularSetup::default();
    let bc = BoundaryConfig::default();
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let sp = SpectralConfig::random(n, 11, &DrawSpec::default(), &setup, Some(&bc))?;
        let z = partition_bruteforce(&sp, &bc, &setup)?;
        let f = partition_face_route(&sp, &bc, &setup)?;
        worst = worst.max(rel(z, f));
        print!("N={n}  Z={z:.10}  face {:.1e}", rel(z, f));
        if n <= 2 {
            let e = partition_enumeration(&sp, &bc, &setup)?;
            worst = worst.max(rel(z, e));
            print!("  enumeration {:.1e}", rel(z, e));
        }
        println!();
    }
    Ok(worst)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
