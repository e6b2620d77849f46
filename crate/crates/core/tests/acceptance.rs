use asmoduli::config::budget_from_env;
use asmoduli::verify::verify;
use std::process::ExitCode;

fn main() -> ExitCode {
    let budget = budget_from_env(None).expect("budget parses");
    let report = verify(budget, 0).expect("suite runs");
    println!("acceptance suite (seed {}, budget {})", report.seed, report.budget);
    for c in &report.criteria {
        println!("{}", c.line());
    }
    for c in report.criteria.iter().filter(|c| !c.pass) {
        println!("criterion {} details: {}", c.id, c.details);
    }
    let passed = report.criteria.iter().filter(|c| c.pass).count();
    println!("{passed}/{} criteria pass", report.criteria.len());
    if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
