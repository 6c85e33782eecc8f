//! Acceptance suite: one PASS/FAIL line per criterion, details below it.
//! Criteria 1 to 10 live in `tubeforge::selftest`; criterion 11 runs the
//! binary's `selftest` under different thread counts.

use std::process::{Command, ExitCode};

use tubeforge::selftest::{self, CriterionOutcome};

fn determinism() -> CriterionOutcome {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_tubeforge"))
            .arg("selftest")
            .env("TUBEFORGE_THREADS", threads)
            .output()
            .expect("binary runs")
            .stdout
    };
    let reports = [run("1"), run("1"), run("8"), run("8")];
    let mut details = Vec::new();
    let nonempty = !reports[0].is_empty();
    let repeat_1 = reports[0] == reports[1];
    let repeat_8 = reports[2] == reports[3];
    let across = reports[0] == reports[2];
    details.push(format!("{} report is nonempty", if nonempty { "ok  " } else { "FAIL" }));
    details.push(format!("{} TUBEFORGE_THREADS=1 twice: byte-identical", if repeat_1 { "ok  " } else { "FAIL" }));
    details.push(format!("{} TUBEFORGE_THREADS=8 twice: byte-identical", if repeat_8 { "ok  " } else { "FAIL" }));
    details.push(format!("{} 1 thread vs 8 threads: byte-identical", if across { "ok  " } else { "FAIL" }));
    CriterionOutcome {
        id: 11,
        title: "determinism",
        passed: nonempty && repeat_1 && repeat_8 && across,
        details,
    }
}

fn main() -> ExitCode {
    let mut outcomes = selftest::run().outcomes;
    outcomes.push(determinism());
    println!("acceptance criteria");
    for o in &outcomes {
        print!("{o}");
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    println!("\nsummary");
    for o in &outcomes {
        println!("{}", o.summary());
    }
    if failed.is_empty() {
        println!("all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("{} of {} criteria failed: {}", failed.len(), outcomes.len(), failed.join(", "));
        ExitCode::FAILURE
    }
}
