// The normalized partition function as a permutation sum and as a single
// determinant, the prefactor, and the recursion in `u_N`.

use ellipdw::boundary::BoundaryConfig;
use ellipdw::closedform::{
    full_z, normalized_z_determinant, normalized_z_permsum, recursion_residual, ClosedRoute, PrefactorKind,
};
use ellipdw::oracle::partition_bruteforce;
use ellipdw::scaled::ScaledComplex;
use ellipdw::spectral::{DrawSpec, SpectralConfig};
use ellipdw::{ModularSetup, Result};

fn run_example() -> Result<f64> {
    let setup = ModularSetup::default();
    let bc = BoundaryConfig::default();
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let sp = SpectralConfig::random(n, 3, &DrawSpec::default(), &setup, Some(&bc))?;
        let p = ScaledComplex::from_c64(normalized_z_permsum(&sp, &bc, &setup)?);
        let d = normalized_z_determinant(&sp, &bc, &setup)?;
        let z = full_z(&sp, &bc, &setup, ClosedRoute::Determinant, PrefactorKind::Derived)?;
        let brute = ScaledComplex::from_c64(partition_bruteforce(&sp, &bc, &setup)?);
        let r = [
            ScaledComplex::rel_diff(&p, &d.value),
            ScaledComplex::rel_diff(&z, &brute),
            recursion_residual(&sp, &bc, &setup)?,
        ];
        println!(
            "N={n}  Z={}  permsum/det {:.1e}  det/contraction {:.1e}  recursion {:.1e}  pivot ratio {:.1}",
            z.digest(8),
            r[0],
            r[1],
            r[2],
            d.pivot_ratio.unwrap_or(1.0)
        );
        worst = r.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
