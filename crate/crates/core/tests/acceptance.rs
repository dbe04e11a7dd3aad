//! Acceptance suite: one PASS/FAIL line per criterion at full sample sizes.
//! `ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.

use std::process::ExitCode;
use std::time::Instant;

use heatkernel::verify::{run_criterion, VerifyOptions, CRITERIA};

fn selected() -> Vec<usize> {
    match std::env::var("ACCEPTANCE_ONLY") {
        Ok(list) => list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        Err(_) => (1..=CRITERIA.len()).collect(),
    }
}

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let chosen = selected();
    let mut failed = 0;
    for c in chosen.iter().copied().filter(|c| (1..=CRITERIA.len()).contains(c)) {
        let start = Instant::now();
        let checks = run_criterion(c, &opts);
        let pass = !checks.is_empty() && checks.iter().all(|k| k.pass);
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {c:>2}: {} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            CRITERIA[c - 1],
            start.elapsed().as_secs_f64()
        );
        for k in &checks {
            let mark = if k.pass { "ok  " } else { "miss" };
            let line = k.line();
            let body = line.split_once(' ').map_or(line.as_str(), |(_, rest)| rest);
            println!("    {mark} {body}");
        }
    }
    println!("{} of {} criteria pass", chosen.len() - failed, chosen.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
