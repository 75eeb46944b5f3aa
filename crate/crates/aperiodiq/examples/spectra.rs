//! Computes Floquet–Bloch spectra of lattice Schrödinger operators on
//! periodic words: first the free Laplacian on ℤ² (band [-4, 4], a
//! textbook value that validates the pipeline), then the spectral
//! convergence table along the approximations of the 1-D doubling rule,
//! whose successive Hausdorff gaps shrink geometrically.
//!
//! Run with: `cargo run --release --example spectra`

use aperiodiq::lattice::LatticeModel;
use aperiodiq::presets::fibonacci_block;
use aperiodiq::spectral::{spectral_convergence_table, spectrum, OperatorSpec};
use aperiodiq::substitution::PeriodicConfig;

fn main() -> aperiodiq::Result<()> {
    // free Laplacian on ℤ²: one site, zero potential
    let model = LatticeModel::zd_blocks(&[2, 2])?;
    let spec = OperatorSpec::laplacian(2, vec![0.0]);
    let word = PeriodicConfig::constant(0);
    let approx = spectrum(&spec, &model, &word, 64)?;
    println!("free Laplacian on ℤ², 64×64 Bloch grid:");
    for (lo, hi) in approx.bands() {
        println!("  band [{lo:.4}, {hi:.4}]");
    }
    println!(
        "  {} samples, certified sampling radius {:.4}",
        approx.samples.len(),
        approx.error_radius
    );
    println!();

    // spectral convergence along the doubling-rule approximations
    let file = fibonacci_block();
    let rule = &file.rule;
    let seed = file.resolve_seed("ab")?;
    let potentials = rule.alphabet().potentials().to_vec();
    let spec = OperatorSpec::laplacian(1, potentials);
    let table = spectral_convergence_table(rule, &spec, &seed, 6, 256, 4096)?;
    println!("doubling rule, Laplacian + letter potentials, gaps between successive spectra:");
    print!("{}", table.to_csv());
    println!();
    println!("note: {}", table.note);
    println!();
    println!("(the 2-D table at acceptance scale: `aperiodiq spectrum data/table-tiling.sub rb --n 0..4`)");
    Ok(())
}
