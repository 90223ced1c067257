// Running the cross-validation suite through the command-line entry point.

use lorentz_twirl::cli::main_with_args;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("lorentz_twirl_validate_{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let out = dir.join("validate.csv");
    let out_arg = out.to_string_lossy().into_owned();

    let code = main_with_args([
        "lorentz-twirl",
        "--command",
        "validate",
        "--samples",
        "100000",
        "--seed",
        "3",
        "--output",
        &out_arg,
    ]);
    let csv = std::fs::read_to_string(&out)?;
    let failed: Vec<&str> = csv
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",false") && !l.starts_with("report."))
        .collect();
    println!(
        "exit code {code}, {} checks, failures: {failed:?}",
        csv.lines().count() - 1
    );
    for line in csv.lines().filter(|l| l.starts_with("report.rho1")) {
        println!("  {line}");
    }

    let code = main_with_args(["lorentz-twirl", "--command", "channel", "--kappa-v=-1"]);
    println!("bad parameter exit code {code}");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
