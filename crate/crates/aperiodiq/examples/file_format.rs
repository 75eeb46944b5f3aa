//! Reads the shipped substitution definition files, prints their
//! canonical serialized form, and shows seed resolution — including the
//! implicit `const:LETTER` seeds that every file supports without
//! declaring them.
//!
//! Run with: `cargo run --release --example file_format`

use std::path::PathBuf;

use aperiodiq::subfile::SubstitutionFile;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn main() -> aperiodiq::Result<()> {
    for name in ["fibonacci-block.sub", "table-tiling.sub", "heisenberg.sub"] {
        let path = data_dir().join(name);
        let file = SubstitutionFile::from_path(&path)?;
        let canonical = file.canonical_string();

        // round-trip: the canonical form parses back to the same structure
        assert_eq!(SubstitutionFile::parse(&canonical)?, file);

        println!("== {name} ==");
        println!(
            "letters: {:?}, declared seeds: {:?}",
            (0..file.rule.alphabet().len() as u8)
                .map(|l| file.rule.alphabet().name(l))
                .collect::<Vec<_>>(),
            file.seed_names(),
        );
        let implicit = format!("const:{}", file.rule.alphabet().name(0));
        let seed = file.resolve_seed(&implicit)?;
        println!(
            "implicit seed {implicit}: {} anchor cell(s) per period",
            seed.anchor_cells(file.rule.model()).len()
        );
        if name == "fibonacci-block.sub" {
            println!("canonical form:");
            print!("{canonical}");
        }
        println!();
    }
    Ok(())
}
