//! Built-in substitution systems, used by the shipped definition files,
//! the examples, and the acceptance suite.

use crate::lattice::LatticeModel;
use crate::subfile::{NamedSeed, SubstitutionFile};
use crate::substitution::{Alphabet, Letter, PeriodicConfig, SubstitutionRule};

/// The four-letter block substitution on ℤ² (factors 2×2) coding the
/// domino-inflation "table" tiling. Letters red, yellow, blue, gray carry
/// potentials 0..3. An inflated domino splits into four half-dominoes:
/// one vertical at each side and two stacked horizontals across the
/// center; the letters track which half of a domino a cell holds, and the
/// rule is equivariant under quarter turns. Ships with the two
/// convergent checkerboard seeds `rb` (red/blue) and `gy` (gray/yellow).
pub fn table_tiling() -> SubstitutionFile {
    let model = LatticeModel::zd_blocks(&[2, 2]).expect("valid factors");
    let alphabet = Alphabet::new(
        vec!["red".into(), "yellow".into(), "blue".into(), "gray".into()],
        vec![0.0, 1.0, 2.0, 3.0],
        vec![
            Some("#b03a2e".into()),
            Some("#d4ac0d".into()),
            Some("#1f618d".into()),
            Some("#839192".into()),
        ],
    )
    .expect("valid alphabet");
    // Cell order is lexicographic over {−1,0}²: (−1,−1), (−1,0), (0,−1), (0,0).
    let images = vec![
        vec![3, 1, 0, 0], // red
        vec![1, 0, 1, 2], // yellow
        vec![2, 2, 3, 1], // blue
        vec![0, 3, 2, 3], // gray
    ];
    let rule = SubstitutionRule::new(model, alphabet, images).expect("valid rule");
    let seeds = vec![
        NamedSeed {
            name: "rb".into(),
            config: PeriodicConfig::zd_word(vec![2, 2], vec![0, 2, 2, 0]).expect("valid seed"),
        },
        NamedSeed {
            name: "gy".into(),
            config: PeriodicConfig::zd_word(vec![2, 2], vec![3, 1, 1, 3]).expect("valid seed"),
        },
    ];
    SubstitutionFile { rule, seeds }
}

/// The two-letter substitution on the discrete Heisenberg lattice
/// (stretch factor 4, 256 substitution cells). The image of a letter `c`
/// places `a` on the two marked columns, `b` on the marked plane and one
/// extra cell, and `c` itself everywhere else:
///
/// * `a` on `(0,0,z)` and `(0,2,z)` for even `z ∈ [−16,16)`, except
///   `(0,2,−2)`;
/// * `b` on `(x,y,−2)` for even `x,y ∈ [−4,4)` except `(0,0,−2)`, and on
///   `(2,2,−14)`;
/// * the input letter `c` on every remaining cell (including the marked
///   cell `(2,2,−16)`).
pub fn heisenberg_substitution() -> SubstitutionFile {
    let model = LatticeModel::heisenberg();
    let alphabet = Alphabet::new(
        vec!["a".into(), "b".into()],
        vec![0.0, 1.0],
        vec![Some("#202020".into()), Some("#e8e4d8".into())],
    )
    .expect("valid alphabet");
    let cells = model.seed_cells().clone();
    let image_of = |c: Letter| -> Vec<Letter> {
        cells
            .iter()
            .map(|p| {
                let (x, y, z) = (p[0], p[1], p[2]);
                let in_a_columns = x == 0 && (y == 0 || y == 2) && !(y == 2 && z == -2);
                let in_b_plane = z == -2 && !(x == 0 && y == 0);
                let b_extra = x == 2 && y == 2 && z == -14;
                if in_a_columns {
                    0
                } else if in_b_plane || b_extra {
                    1
                } else {
                    c
                }
            })
            .collect()
    };
    let images = vec![image_of(0), image_of(1)];
    let rule = SubstitutionRule::new(model, alphabet, images).expect("valid rule");
    SubstitutionFile { rule, seeds: Vec::new() }
}

/// The one-dimensional block coding of the Fibonacci substitution
/// (factor 2): `a ↦ (a,b)`, `b ↦ (a,a)` over cells `{−1,0}`. A small,
/// fast sanity system; every window of the `ab` seed is legal.
pub fn fibonacci_block() -> SubstitutionFile {
    let model = LatticeModel::zd_blocks(&[2]).expect("valid factors");
    let alphabet = Alphabet::new(
        vec!["a".into(), "b".into()],
        vec![0.0, 1.0],
        vec![Some("#6c3483".into()), Some("#1e8449".into())],
    )
    .expect("valid alphabet");
    let images = vec![vec![0, 1], vec![0, 0]];
    let rule = SubstitutionRule::new(model, alphabet, images).expect("valid rule");
    let seeds = vec![NamedSeed {
        name: "ab".into(),
        config: PeriodicConfig::zd_word(vec![2], vec![0, 1]).expect("valid seed"),
    }];
    SubstitutionFile { rule, seeds }
}
