// The functions B_I and F_I: equality, matching residues, regularity of
// their difference at the shared poles, and periodicity.

use ellipdw::boundary::BoundaryConfig;
use ellipdw::closedform::{bf_pair, periodicity_residual, pole_scan, pole_scan_scaled, residues};
use ellipdw::spectral::{DrawSpec, SpectralConfig};
use ellipdw::{ModularSetup, Result};

fn run_example() -> Result<f64> {
    let setup = ModularSetup::default();
    let bc = BoundaryConfig::default();
    let sp = SpectralConfig::random(4, 21, &DrawSpec::default(), &setup, Some(&bc))?;
    let mut worst: f64 = 0.0;
    for i in 1..=4 {
        let (b, f) = bf_pair(i, &sp, &bc, &setup)?;
        let r = (b - f).norm() / f.norm();
        worst = worst.max(r);
        println!("I={i}  B={b:.8}  |B-F|/|F|={r:.1e}");
    }
    for m in residues(3, &sp, &bc, &setup, 1e-5)? {
        println!(
            "residue at {:<8} B {:.6}  F {:.6}  rel {:.1e}",
            m.label, m.res_b, m.res_f, m.rel_diff
        );
    }
    for p in pole_scan(3, &sp, &bc, &setup)? {
        println!("{:<18} growth {:>8.2}  regular {}", p.label, p.growth, p.is_regular);
    }
    let perturbed = &pole_scan_scaled(3, &sp, &bc, &setup, 1.01)?[0];
    println!(
        "with B scaled by 1.01: {} growth {:.1}, regular {}",
        perturbed.label, perturbed.growth, perturbed.is_regular
    );
    let per = periodicity_residual(
        &SpectralConfig::new(sp.u[..3].to_vec(), sp.xi[..3].to_vec())?,
        &bc,
        &setup,
    )?;
    println!("periodicity in u_N: {per:.1e}");
    Ok(worst.max(per))
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
