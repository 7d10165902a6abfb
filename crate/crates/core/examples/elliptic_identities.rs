// Evaluate σ-functions and the identities they satisfy.

use ellipdw::elliptic::{oddness_residual, period_one_residual, period_tau_residual, riemann_residual};
use ellipdw::{ModularSetup, Result, C64};

fn run_example() -> Result<f64> {
    let setup = ModularSetup::new(C64::new(0.3, 0.9), C64::new(0.31, 0.0))?;
    let u = C64::new(0.21, -0.07);
    println!("sigma(u)        = {:.12}", setup.sigma(u)?);
    println!("sigma_01(u)     = {:.12}", setup.sigma_char(0, 1, u)?);
    println!("theta^(1)(u,2t) = {:.12}", setup.theta_level2(1, u)?);

    let (v, x, y) = (C64::new(-0.13, 0.2), C64::new(0.4, 0.05), C64::new(0.02, -0.11));
    let worst = [
        riemann_residual(u, v, x, y, &setup)?,
        oddness_residual(u, &setup)?,
        period_one_residual(u, &setup)?,
        period_tau_residual(u, &setup)?,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    println!("worst identity residual {worst:.2e}");
    Ok(worst)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
