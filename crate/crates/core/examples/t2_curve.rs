// Second boost moment against the speed-bump width for two momentum scales.

use lorentz_twirl::scenarios::{cmd_t2_curve, Command, GridAxis, RunConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::new(Command::T2Curve);
    config
        .grids
        .insert("delta".into(), GridAxis::new(0.1, 5.0, 8)?);
    config
        .grids
        .insert("p0-over-m".into(), GridAxis::new(0.01, 0.02, 2)?);
    let table = cmd_t2_curve(&config)?;
    print!("{}", table.to_csv());

    let t2 = table.numbers("T2");
    let (a, b) = t2.split_at(t2.len() / 2);
    println!(
        "T2 ratio between the two momentum scales: {:.6}",
        b[3] / a[3]
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
