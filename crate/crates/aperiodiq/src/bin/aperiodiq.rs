//! Command-line front end.
//!
//! Subcommands load a `.sub` definition file and drive the library:
//! `check` (convergence certificate), `reduce` (testing-domain
//! verification and greedy reduction), `rate` (dictionary-distance decay
//! table), `spectrum` (Floquet–Bloch spectra and convergence gaps).
//!
//! Exit codes are a stable contract: 0 success/converges, 1 diverges,
//! 2 input or resource errors, 3 unsupported request.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use aperiodiq::convergence::{certify, compute_n_t, rate_report, ConvergenceCertificate, Verdict};
use aperiodiq::domain::{canonical_domain, reduce_domain};
use aperiodiq::error::{Error, Result};
use aperiodiq::lattice::{box_shape, LatticeModel, PointSet};
use aperiodiq::spectral::{
    divergence_witness, spectral_convergence_table, spectrum, OperatorSpec, DEFAULT_MATRIX_CAP,
};
use aperiodiq::subfile::SubstitutionFile;
use aperiodiq::substitution::PeriodicConfig;

#[derive(Parser)]
#[command(
    name = "aperiodiq",
    version,
    about = "Symbolic substitutions on dilation lattices: convergence certificates, \
             testing domains, decay rates, and Floquet-Bloch spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide convergence of a seed's periodic approximations (JSON certificate)
    Check {
        /// Substitution definition file (.sub)
        file: PathBuf,
        /// Seed name: declared in the file, or const:LETTER
        seed: String,
    },
    /// Verify the canonical testing domain and greedily reduce it
    Reduce {
        /// Substitution definition file (.sub)
        file: PathBuf,
        /// Verification depth per accepted step
        #[arg(long, default_value_t = 1)]
        n0: u32,
        /// Fail (exit 2) when no verified domain of at most this size is found
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Measure dictionary distances of the approximations and fit the decay rate (CSV)
    Rate {
        /// Substitution definition file (.sub)
        file: PathBuf,
        /// Seed name: declared in the file, or const:LETTER
        seed: String,
        /// Largest substitution step measured
        #[arg(long, default_value_t = 5)]
        nmax: u32,
        /// Largest window radius compared
        #[arg(long, default_value_t = 24)]
        rmax: i64,
    },
    /// Compute Floquet-Bloch spectra along the approximations (CSV + JSON)
    Spectrum {
        /// Substitution definition file (.sub)
        file: PathBuf,
        /// Seed name: declared in the file, or const:LETTER
        seed: String,
        /// Single step ("3") for one spectrum, or a range ("0..4") for the gap table
        #[arg(long, default_value = "0..3")]
        n: String,
        /// Bloch-phase grid points per axis
        #[arg(long, default_value_t = 32)]
        grid: u32,
        /// Operator family: "laplacian" (hopping + letter potentials) or
        /// "witness" (window potential penalizing illegal windows)
        #[arg(long, default_value = "laplacian")]
        operator: String,
        /// Largest Floquet matrix dimension before truncating the chain
        #[arg(long, default_value_t = DEFAULT_MATRIX_CAP)]
        matrix_cap: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Unsupported(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check { file, seed } => cmd_check(&file, &seed),
        Command::Reduce { file, n0, max_size } => cmd_reduce(&file, n0, max_size),
        Command::Rate { file, seed, nmax, rmax } => cmd_rate(&file, &seed, nmax, rmax),
        Command::Spectrum { file, seed, n, grid, operator, matrix_cap } => {
            cmd_spectrum(&file, &seed, &n, grid, &operator, matrix_cap)
        }
    }
}

/// The testing shape `check`, `rate`, and the witness operator build on:
/// the unit box `{0,1}ᵈ` on block lattices. On the Heisenberg lattice the
/// canonical level-1 domain (256 cells) is first reduced greedily — every
/// step backed by a verification certificate — because dictionary
/// computation cost grows steeply with domain size. The second component
/// is the reduction ledger when a reduction ran.
fn testing_shape(model: &LatticeModel) -> Result<(PointSet, Option<String>)> {
    if model.is_heisenberg() {
        let (t0, _) = canonical_domain(model)?;
        let outcome = reduce_domain(model, &t0, 1, 10_000)?;
        let ledger = outcome.ledger();
        Ok((outcome.final_domain().clone(), Some(ledger)))
    } else {
        Ok((box_shape(&vec![(0i64, 1i64); model.dim()]), None))
    }
}

fn certificate_json(
    command: &str,
    file: &SubstitutionFile,
    seed_name: &str,
    shape: &PointSet,
    n_t: u32,
    cert: &ConvergenceCertificate,
) -> serde_json::Value {
    let alphabet = file.rule.alphabet();
    let letters: Vec<&str> = (0..alphabet.len()).map(|i| alphabet.name(i as u8)).collect();
    json!({
        "format": 1,
        "command": command,
        "seed": seed_name,
        "alphabet": letters,
        "testing_domain_size": shape.len(),
        "n_t": n_t,
        "certificate": cert,
    })
}

fn cmd_check(path: &PathBuf, seed_name: &str) -> Result<u8> {
    let file = SubstitutionFile::from_path(path)?;
    let seed = file.resolve_seed(seed_name)?;
    let model = file.rule.model();
    let (shape, reduction) = testing_shape(model)?;
    let n_t = compute_n_t(model, &shape, 4)?;
    let cert = certify(&file.rule, &shape, n_t, &seed)?;
    let mut doc = certificate_json("check", &file, seed_name, &shape, n_t, &cert);
    if let Some(ledger) = reduction {
        doc["domain_reduction"] = json!(ledger);
    }
    println!("{}", serde_json::to_string_pretty(&doc)?);
    match cert.verdict {
        Verdict::Converges => {
            eprintln!("seed {seed_name}: converges");
            Ok(0)
        }
        Verdict::Diverges => {
            let len = cert.witness_cycle.as_ref().map_or(0, |c| c.len());
            eprintln!("seed {seed_name}: diverges via a closed path through {len} windows");
            Ok(1)
        }
    }
}

fn cmd_reduce(path: &PathBuf, n0: u32, max_size: Option<usize>) -> Result<u8> {
    let file = SubstitutionFile::from_path(path)?;
    let model = file.rule.model();
    let (t0, _) = canonical_domain(model)?;
    let outcome = reduce_domain(model, &t0, n0, 10_000)?;
    let final_domain = outcome.final_domain();
    let points: Vec<Vec<i64>> = final_domain.iter().map(|p| p.to_vec()).collect();
    let doc = json!({
        "format": 1,
        "command": "reduce",
        "n0": n0,
        "sizes": outcome.sizes(),
        "ledger": outcome.ledger(),
        "final_domain": points,
        "verified_steps": outcome.certificates.len(),
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    eprintln!("domain sizes: {}", outcome.ledger());
    if let Some(cap) = max_size {
        if final_domain.len() > cap {
            return Err(Error::Structural(format!(
                "no verified domain of size <= {cap} was found (smallest: {})",
                final_domain.len()
            )));
        }
    }
    Ok(0)
}

fn cmd_rate(path: &PathBuf, seed_name: &str, nmax: u32, rmax: i64) -> Result<u8> {
    let file = SubstitutionFile::from_path(path)?;
    let seed = file.resolve_seed(seed_name)?;
    let model = file.rule.model();
    if model.is_heisenberg() {
        return Err(Error::Unsupported(
            "rate measurement compares cube windows of growing radius; block \
             lattices only"
                .into(),
        ));
    }
    let (shape, _) = testing_shape(model)?;
    let n_t = compute_n_t(model, &shape, 4)?;
    let cert = certify(&file.rule, &shape, n_t, &seed)?;
    if cert.verdict == Verdict::Diverges {
        println!("{}", serde_json::to_string_pretty(&certificate_json("rate", &file, seed_name, &shape, n_t, &cert))?);
        let len = cert.witness_cycle.as_ref().map_or(0, |c| c.len());
        eprintln!("seed {seed_name}: diverges via a closed path through {len} windows; no rate to fit");
        return Ok(1);
    }
    let report = rate_report(&file.rule, &seed, nmax, rmax)?;
    print!("{}", report.to_csv());
    match report.fitted_slope {
        Some(s) => println!(
            "# fitted_slope {s:.6} expected {:.6} theoretical_C {:.6} m1 {}",
            report.expected_slope, report.theoretical_c, report.m1
        ),
        None => println!("# fitted_slope n/a (fewer than two informative rows)"),
    }
    Ok(0)
}

/// Parses `--n`: either a single step `"3"` or an inclusive range `"0..4"`.
fn parse_steps(s: &str) -> Result<(u32, Option<u32>)> {
    let parse = |t: &str| {
        t.parse::<u32>()
            .map_err(|_| Error::Structural(format!("invalid step value: {t}")))
    };
    match s.split_once("..") {
        None => Ok((parse(s)?, None)),
        Some((a, b)) => {
            let (lo, hi) = (parse(a)?, parse(b)?);
            if lo > hi {
                return Err(Error::Structural(format!("empty step range: {s}")));
            }
            Ok((lo, Some(hi)))
        }
    }
}

fn build_operator(
    file: &SubstitutionFile,
    operator: &str,
    model: &LatticeModel,
) -> Result<OperatorSpec> {
    let potentials = file.rule.alphabet().potentials().to_vec();
    let base = OperatorSpec::laplacian(model.dim(), potentials.clone());
    match operator {
        "laplacian" => Ok(base),
        "witness" => {
            let (shape, _) = testing_shape(model)?;
            let sup = potentials.iter().fold(0.0f64, |m, p| m.max(p.abs()));
            let bump = 100.0 * (2.0 * model.dim() as f64 + sup);
            let table = divergence_witness(&file.rule, &shape, bump)?;
            base.with_window_potential(table)
        }
        other => Err(Error::Structural(format!(
            "unknown operator family: {other} (expected laplacian or witness)"
        ))),
    }
}

fn cmd_spectrum(
    path: &PathBuf,
    seed_name: &str,
    steps: &str,
    grid: u32,
    operator: &str,
    matrix_cap: usize,
) -> Result<u8> {
    let file = SubstitutionFile::from_path(path)?;
    let seed = file.resolve_seed(seed_name)?;
    let model = file.rule.model();
    if model.is_heisenberg() {
        return Err(Error::Unsupported(
            "spectra are computed on block lattices only (Floquet-Bloch over ℤᵈ); \
             the Heisenberg lattice is out of scope"
                .into(),
        ));
    }
    let spec = build_operator(&file, operator, model)?;
    let (lo, hi) = parse_steps(steps)?;
    match hi {
        None => {
            let mut word: PeriodicConfig = seed;
            for _ in 0..lo {
                word = file.rule.substitute_config(&word)?;
            }
            let approx = spectrum(&spec, model, &word, grid)?;
            let bands = approx.bands();
            println!("band_lo,band_hi");
            for (a, b) in &bands {
                println!("{a},{b}");
            }
            let doc = json!({
                "format": 1,
                "command": "spectrum",
                "seed": seed_name,
                "step": lo,
                "grid_per_axis": grid,
                "operator": operator,
                "error_radius": approx.error_radius,
                "sample_count": approx.samples.len(),
                "bands": bands,
            });
            eprintln!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Some(hi) => {
            let table = spectral_convergence_table(&file.rule, &spec, &seed, hi, grid, matrix_cap)?;
            let rows: Vec<_> = table.rows.iter().filter(|r| r.n >= lo).collect();
            println!("n,gap,error_radius,bound_C_over_lambda_n");
            for r in &rows {
                println!("{},{},{},{}", r.n, r.gap, r.error_radius, r.bound_c_over_lambda_n);
            }
            let doc = json!({
                "format": 1,
                "command": "spectrum",
                "seed": seed_name,
                "steps": steps,
                "grid_per_axis": grid,
                "operator": operator,
                "max_n": table.max_n,
                "note": table.note,
                "rows": rows,
            });
            eprintln!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(0)
}
