// The non-diagonal K-matrix, the reflection equation, and K as a
// diagonal face matrix dressed by intertwiners.

use ellipdw::boundary::{k_factorization_residual, re_residual, vertex_k_mat, BoundaryConfig};
use ellipdw::{ModularSetup, Result, C64};

fn run_example() -> Result<f64> {
    let setup = ModularSetup::default();
    let bc = BoundaryConfig::default();
    let u = C64::new(0.17, 0.06);
    let k = vertex_k_mat(u, &bc, &setup)?;
    println!("K(u) = [[{:.6}, {:.6}], [{:.6}, {:.6}]]", k[0], k[1], k[2], k[3]);

    let k0 = vertex_k_mat(C64::new(0.0, 0.0), &bc, &setup)?;
    println!("K(0) = [[{:.3}, {:.3}], [{:.3}, {:.3}]]", k0[0], k0[1], k0[2], k0[3]);

    let re = re_residual(u, C64::new(-0.23, 0.11), &bc, &setup)?;
    let kf = k_factorization_residual(u, &bc, &setup)?;
    println!("reflection equation {re:.2e}, factorization {kf:.2e}");
    Ok(re.max(kf))
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
