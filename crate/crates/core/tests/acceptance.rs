//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;

use framedrep::checks;

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (title, check) in checks::ALL {
        if !filter.is_empty() && !filter.iter().any(|f| title.contains(f.as_str())) {
            continue;
        }
        let outcome = check();
        println!("{}", outcome.line());
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
