// QFI surface over rotation concentration and encoding angle, written as CSV.

use std::f64::consts::PI;

use lorentz_twirl::scenarios::{cmd_qfi_surface, write_atomic, Command, GridAxis, RunConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::new(Command::QfiSurface);
    config
        .grids
        .insert("kappa".into(), GridAxis::new(0.01, 100.0, 9)?);
    config
        .grids
        .insert("theta-e".into(), GridAxis::new(0.0, PI, 7)?);
    let table = cmd_qfi_surface(&config)?;

    let closed = table.numbers("qfi_closed");
    let numeric = table.numbers("qfi_numeric");
    let worst = closed
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "{} cells, worst |closed - numeric| = {worst:.2e}",
        table.rows.len()
    );

    let path = std::env::temp_dir().join(format!("qfi_surface_{}.csv", std::process::id()));
    write_atomic(&path, table.to_csv().as_bytes())?;
    println!("wrote {}", path.display());
    std::fs::remove_file(&path)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
