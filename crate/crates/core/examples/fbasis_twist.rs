// The F-basis: a lower-triangular twist in which creation operators take a
// symmetric polarization-free form.

use ellipdw::boundary::BoundaryConfig;
use ellipdw::fbasis::{
    extremal_invariance_residual, f_matrix, factorizing_residual, twisted_creation_residual, CreationScalar,
};
use ellipdw::spectral::{DrawSpec, SpectralConfig};
use ellipdw::{ModularSetup, Result};

fn run_example() -> Result<f64> {
    let setup = ModularSetup::default();
    let bc = BoundaryConfig::default();
    let sp = SpectralConfig::random(3, 5, &DrawSpec::default(), &setup, Some(&bc))?;
    let l = bc.lambda();

    let f = f_matrix(l, &sp, &setup)?;
    println!(
        "F is {}x{}, lower triangular: {}",
        f.dim(),
        f.dim(),
        f.is_lower_triangular()
    );
    let fac = factorizing_residual(l, &sp, &setup)?;
    let inv = extremal_invariance_residual(l, &sp, &setup)?;
    println!("factorizing {fac:.2e}, extremal invariance {inv:.2e}");

    let mut worst = fac.max(inv);
    for k in 1..=3 {
        let derived = twisted_creation_residual(k, &bc, &sp, &setup, CreationScalar::Derived)?;
        let printed = twisted_creation_residual(k, &bc, &sp, &setup, CreationScalar::Printed)?;
        println!("creation factor {k}: derived scalar {derived:.2e}, printed scalar {printed:.2e}");
        worst = worst.max(derived);
    }
    Ok(worst)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
