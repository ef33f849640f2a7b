//! Runs the acceptance criteria and prints one line per criterion.
//!
//! Extra arguments select criteria by number, e.g.
//! `cargo test -p dfkg-core --test acceptance -- 6 7`.

use std::process::ExitCode;
use std::time::Instant;

use dfkg_core::verify::acceptance_criteria;

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for criterion in acceptance_criteria() {
        if !selected.is_empty() && !selected.contains(&criterion.id) {
            continue;
        }
        let start = Instant::now();
        let result = (criterion.run)();
        println!("{} ({:.1}s)", result.line(), start.elapsed().as_secs_f64());
        if !result.pass {
            failed += 1;
        }
    }
    println!("acceptance: {failed} criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
