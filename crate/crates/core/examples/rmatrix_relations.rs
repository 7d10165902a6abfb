// Yang-Baxter, unitarity and crossing for the vertex and SOS R-matrices.

use ellipdw::rmatrices::{
    crossing_residual, dybe_residual, qybe_residual, unitarity_residual, vertex_weights, WeightVector,
};
use ellipdw::{ModularSetup, Result, C64};

fn run_example() -> Result<f64> {
    let setup = ModularSetup::default();
    let m = WeightVector::new(C64::new(0.27, 0.04), C64::new(-0.18, 0.02));
    let (u1, u2, u3) = (C64::new(0.12, 0.05), C64::new(-0.2, 0.1), C64::new(0.33, -0.04));

    let [a, b, c, d] = vertex_weights(u1, &setup)?;
    println!("eight-vertex weights a={a:.6} b={b:.6} c={c:.6} d={d:.6}");

    let checks = [
        ("QYBE", qybe_residual(u1, u2, u3, &setup)?),
        ("dynamical YBE", dybe_residual(u1, u2, u3, m, &setup)?),
        ("unitarity", unitarity_residual(u1, m, &setup)?),
        ("crossing", crossing_residual(u1, m, &setup)?),
        ("crossing at u=0", crossing_residual(C64::new(0.0, 0.0), m, &setup)?),
    ];
    for (name, r) in &checks {
        println!("{name:<16} {r:.2e}");
    }
    Ok(checks.iter().map(|c| c.1).fold(0.0, f64::max))
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
