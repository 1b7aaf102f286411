//! `verify-estimates`: run the acceptance battery and print its table.
//!
//! One line per check; a failing battery exits with the numerical-failure
//! code so scripted gates can distinguish it from a bad config.

use crate::config::Config;
use crate::Failure;
use statwave::acceptance;

pub fn run(cfg: &Config) -> Result<(), Failure> {
    let seed = cfg.parsed_or("verify", "seed", acceptance::DEFAULT_SAMPLE_SEED)?;
    cfg.reject_unused()?;

    let outcomes = acceptance::run_all_seeded(seed);
    let mut failed = 0;
    for outcome in &outcomes {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:2} {:<22} {verdict} | {}",
            outcome.index, outcome.name, outcome.detail
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("passed {} of {}", outcomes.len() - failed, outcomes.len());

    if failed > 0 {
        return Err(Failure::Numerical(format!(
            "{failed} of {} acceptance checks failed",
            outcomes.len()
        )));
    }
    Ok(())
}
