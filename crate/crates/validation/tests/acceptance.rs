use std::process::ExitCode;

fn main() -> ExitCode {
    let verdicts = entromodem_validation::all();
    let mut report = String::from("\nacceptance criteria\n");
    for v in &verdicts {
        report.push_str(&v.render());
    }
    let failed: Vec<u8> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!("{report}");
    println!(
        "{} of {} criteria pass",
        verdicts.len() - failed.len(),
        verdicts.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {failed:?}");
        ExitCode::FAILURE
    }
}
