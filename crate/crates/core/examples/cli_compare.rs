// Drive the report layer from a configuration document.

use ellipdw::cli::{parse_config, run_compare};
use ellipdw::Result;

const CONFIG: &str = r#"
mode = "compare"
N = 3
seed = 7
routes = ["bruteforce", "face", "permsum", "determinant"]

[params]
tau = [0.0, 1.0]
eta = 0.31
lambda1 = [0.41, 0.0]
lambda2 = [-0.23, 0.0]
zeta = 0.17
"#;

fn run_example() -> Result<bool> {
    let cfg = parse_config(CONFIG)?;
    let report = run_compare(&cfg)?;
    print!("{}", report.to_csv());
    for (pair, r) in &report.residuals {
        println!("{pair:<24} {r:.2e}");
    }
    println!("pass: {}", report.pass);
    Ok(report.pass)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
