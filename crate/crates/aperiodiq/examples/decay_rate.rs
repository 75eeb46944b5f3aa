//! Measures how fast the window dictionaries of the periodic
//! approximations `Sⁿ(seed)` approach the legal dictionary, for the 1-D
//! doubling rule (a → ab, b → aa). The distance at step n is
//! `δ_n = 1/(r*+1)`, where `r*` is the largest radius on which the two
//! dictionaries agree; the theory predicts `δ_n ≈ C·λ₀⁻ⁿ`.
//!
//! Run with: `cargo run --release --example decay_rate`

use aperiodiq::convergence::rate_report;
use aperiodiq::presets::fibonacci_block;

fn main() -> aperiodiq::Result<()> {
    let file = fibonacci_block();
    let seed = file.resolve_seed("ab")?;
    let report = rate_report(&file.rule, &seed, 8, 200)?;

    print!("{}", report.to_csv());
    println!();
    match report.fitted_slope {
        Some(s) => println!(
            "fitted log-slope {:.4} (theory: -ln λ₀ = {:.4})",
            s, report.expected_slope
        ),
        None => println!("too few informative rows to fit a slope"),
    }
    println!(
        "decay bound constant C = {:.2} (repetitivity lower bound {:.2}, \
         domain covering constant {:.2}, threshold step {})",
        report.theoretical_c, report.c_lr_lower_bound, report.c_t, report.m1
    );
    println!();
    println!("(the 2-D block rule takes about a minute:");
    println!(" `aperiodiq rate data/table-tiling.sub rb`)");
    Ok(())
}
