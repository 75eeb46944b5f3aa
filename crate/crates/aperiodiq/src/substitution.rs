//! Substitution rules and their action on patches and periodic configurations.
//!
//! A rule assigns to every letter a patch supported on the seed cells
//! `K = D[V] ∩ Γ`. Applying the rule to a patch `P` dilates each support
//! point and fills the attached seed block with the letter's image:
//! `S(P)(D(γ)·κ) = S(P(γ))(κ)`. Iterates `Sⁿ(a)` live on the level-n
//! support `L(n, {e})` and can be evaluated either materialized (as a
//! [`Patch`]) or pointwise in `O(n)` per point through the quotient
//! decomposition, which is what keeps deep Heisenberg iterates tractable.

use crate::error::{point_cap, Error, Result};
use crate::lattice::{LatticeModel, PointSet};

/// Letters are alphabet indices; windows are value vectors in the canonical
/// (sorted) order of their shape.
pub type Letter = u8;

/// A finite window's letters, listed in the canonical order of the window
/// shape. The shape itself is carried separately.
pub type Window = Box<[Letter]>;

// ---------------------------------------------------------------------------
// Alphabet
// ---------------------------------------------------------------------------

/// Named letters with optional per-letter Schrödinger potentials and display
/// colors (both round-trip through rule files).
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet {
    names: Vec<String>,
    potentials: Vec<f64>,
    colors: Vec<Option<String>>,
}

impl Alphabet {
    pub fn new(names: Vec<String>, potentials: Vec<f64>, colors: Vec<Option<String>>) -> Result<Self> {
        if names.is_empty() || names.len() > 256 {
            return Err(Error::Structural(format!(
                "alphabet must have 1..=256 letters, got {}",
                names.len()
            )));
        }
        if names.len() != potentials.len() || names.len() != colors.len() {
            return Err(Error::Structural("alphabet field lengths disagree".into()));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::Structural("duplicate letter names".into()));
        }
        Ok(Alphabet { names, potentials, colors })
    }

    /// Letters named `names`, zero potentials, no colors.
    pub fn plain(names: &[&str]) -> Self {
        Alphabet::new(
            names.iter().map(|s| s.to_string()).collect(),
            vec![0.0; names.len()],
            vec![None; names.len()],
        )
        .expect("plain alphabet")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.names[letter as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name).map(|i| i as Letter)
    }

    pub fn potential(&self, letter: Letter) -> f64 {
        self.potentials[letter as usize]
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    pub fn color(&self, letter: Letter) -> Option<&str> {
        self.colors[letter as usize].as_deref()
    }

    pub fn with_potentials(&self, potentials: Vec<f64>) -> Result<Self> {
        Alphabet::new(self.names.clone(), potentials, self.colors.clone())
    }
}

// ---------------------------------------------------------------------------
// Patches
// ---------------------------------------------------------------------------

/// A finite configuration: letters attached to a finite support, with values
/// stored in the canonical order of the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    support: PointSet,
    values: Vec<Letter>,
}

impl Patch {
    pub fn new(support: PointSet, values: Vec<Letter>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::Structural(format!(
                "patch has {} support points but {} values",
                support.len(),
                values.len()
            )));
        }
        Ok(Patch { support, values })
    }

    /// Builds a patch from (point, letter) pairs; duplicate points must agree.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (Vec<i64>, Letter)>) -> Result<Self> {
        let mut flat = Vec::new();
        let mut vals = Vec::new();
        for (p, v) in pairs {
            assert_eq!(p.len(), dim);
            flat.extend_from_slice(&p);
            vals.push(v);
        }
        let (support, values) = sort_points_with_values(dim, flat, vals)?;
        Ok(Patch { support, values })
    }

    pub fn support(&self) -> &PointSet {
        &self.support
    }

    pub fn values(&self) -> &[Letter] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, p: &[i64]) -> Option<Letter> {
        self.support.index_of(p).map(|i| self.values[i])
    }

    /// Left-translate γ·P: support γ·support, same letters.
    pub fn translate(&self, model: &LatticeModel, g: &[i64]) -> Patch {
        let dim = self.support.dim();
        let mut flat = Vec::with_capacity(self.support.len() * dim);
        let mut vals = Vec::with_capacity(self.values.len());
        for (p, &v) in self.support.iter().zip(&self.values) {
            flat.extend_from_slice(&model.multiply(g, p));
            vals.push(v);
        }
        let (support, values) =
            sort_points_with_values(dim, flat, vals).expect("translation cannot create conflicts");
        Patch { support, values }
    }

    /// Restriction to a subset of the support; `None` if `set ⊄ support`.
    pub fn restrict(&self, set: &PointSet) -> Option<Patch> {
        let mut vals = Vec::with_capacity(set.len());
        for p in set.iter() {
            vals.push(self.value_at(p)?);
        }
        Some(Patch { support: set.clone(), values: vals })
    }

    /// The letters of the window anchored at `g`, i.e. the values of the
    /// patch on `g·shape` in the canonical order of `shape`; `None` when the
    /// translated shape is not contained in the support.
    pub fn window_at(&self, model: &LatticeModel, g: &[i64], shape: &PointSet) -> Option<Window> {
        let mut vals = Vec::with_capacity(shape.len());
        for t in shape.iter() {
            vals.push(self.value_at(&model.multiply(g, t))?);
        }
        Some(vals.into_boxed_slice())
    }

    /// All distinct complete windows of the given shape, sorted. Anchors
    /// range over every γ with γ·shape ⊆ support: any such γ satisfies
    /// γ·t₀ ∈ support for the first shape point t₀, so the candidates
    /// {p·t₀⁻¹ : p ∈ support} are exhaustive.
    pub fn windows(&self, model: &LatticeModel, shape: &PointSet) -> Vec<Window> {
        if shape.is_empty() {
            return Vec::new();
        }
        let t0_inv = model.inverse(shape.get(0));
        let mut out: Vec<Window> = self
            .support
            .iter()
            .filter_map(|p| self.window_at(model, &model.multiply(p, &t0_inv), shape))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Sorts a flat point buffer together with attached values; errors if the
/// same point appears with two different values.
fn sort_points_with_values(
    dim: usize,
    flat: Vec<i64>,
    values: Vec<Letter>,
) -> Result<(PointSet, Vec<Letter>)> {
    assert_eq!(flat.len(), values.len() * dim);
    let n = values.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        flat[a as usize * dim..(a as usize + 1) * dim]
            .cmp(&flat[b as usize * dim..(b as usize + 1) * dim])
    });
    let mut sorted_flat = Vec::with_capacity(flat.len());
    let mut sorted_vals = Vec::with_capacity(n);
    for &i in &order {
        let p = &flat[i as usize * dim..(i as usize + 1) * dim];
        let v = values[i as usize];
        if sorted_flat.len() >= dim && &sorted_flat[sorted_flat.len() - dim..] == p {
            if *sorted_vals.last().unwrap() != v {
                return Err(Error::Structural(format!(
                    "conflicting letters at point {p:?}"
                )));
            }
            continue;
        }
        sorted_flat.extend_from_slice(p);
        sorted_vals.push(v);
    }
    Ok((PointSet::from_flat(dim, sorted_flat), sorted_vals))
}

// ---------------------------------------------------------------------------
// Periodic configurations
// ---------------------------------------------------------------------------

/// A configuration invariant under a finite-index subgroup, given by its
/// values on a fundamental transversal.
#[derive(Clone, Debug, PartialEq)]
pub enum PeriodicConfig {
    /// The constant configuration.
    Constant { letter: Letter },
    /// A ℤᵈ word with per-axis periods, values in row-major order
    /// (last axis fastest) over the block `[0, p₁) × … × [0, p_d)`.
    ZdWord { periods: Vec<u32>, values: Vec<Letter> },
    /// A configuration invariant under left translation by `Dⁿ(Γ)`,
    /// determined by its values on the level-n transversal `L(n, {e})`
    /// (in canonical order, carried as `cells`).
    Transversal { level: u32, cells: PointSet, values: Vec<Letter> },
}

impl PeriodicConfig {
    pub fn constant(letter: Letter) -> Self {
        PeriodicConfig::Constant { letter }
    }

    pub fn zd_word(periods: Vec<u32>, values: Vec<Letter>) -> Result<Self> {
        let total: usize = periods.iter().map(|&p| p as usize).product();
        if periods.iter().any(|&p| p == 0) || values.len() != total {
            return Err(Error::Structural(format!(
                "periodic word needs {total} values for periods {periods:?}, got {}",
                values.len()
            )));
        }
        Ok(PeriodicConfig::ZdWord { periods, values })
    }

    pub fn transversal(model: &LatticeModel, level: u32, values: Vec<Letter>) -> Result<Self> {
        let cells = model.support(level, &PointSet::from_points(model.dim(), [model.identity()]))?;
        if cells.len() != values.len() {
            return Err(Error::Structural(format!(
                "level-{level} transversal has {} cells, got {} values",
                cells.len(),
                values.len()
            )));
        }
        Ok(PeriodicConfig::Transversal { level, cells, values })
    }

    /// The configuration's value at a lattice point.
    pub fn value_at(&self, model: &LatticeModel, g: &[i64]) -> Letter {
        match self {
            PeriodicConfig::Constant { letter } => *letter,
            PeriodicConfig::ZdWord { periods, values } => {
                let mut idx = 0usize;
                for (j, &p) in periods.iter().enumerate() {
                    let c = g[j].rem_euclid(p as i64) as usize;
                    idx = idx * p as usize + c;
                }
                values[idx]
            }
            PeriodicConfig::Transversal { level, cells, values } => {
                let (_, kappa) = model.quotient_decompose(*level, g);
                let i = cells
                    .index_of(&kappa)
                    .expect("quotient residue must lie on the transversal");
                values[i]
            }
        }
    }

    /// Anchors whose windows exhaust all windows of the configuration:
    /// one fundamental block (ℤᵈ) or transversal (dilation-periodic).
    pub fn anchor_cells(&self, model: &LatticeModel) -> PointSet {
        match self {
            PeriodicConfig::Constant { .. } => {
                PointSet::from_points(model.dim(), [model.identity()])
            }
            PeriodicConfig::ZdWord { periods, .. } => {
                let ranges: Vec<(i64, i64)> =
                    periods.iter().map(|&p| (0, p as i64 - 1)).collect();
                crate::lattice::box_shape(&ranges)
            }
            PeriodicConfig::Transversal { cells, .. } => cells.clone(),
        }
    }

    /// All distinct windows of the given shape, sorted. Left invariance makes
    /// the anchor set finite: windows at `h·κ` equal windows at `κ` for `h`
    /// in the invariance subgroup.
    pub fn windows(&self, model: &LatticeModel, shape: &PointSet) -> Vec<Window> {
        let mut out: Vec<Window> = Vec::new();
        for g in self.anchor_cells(model).iter() {
            let vals: Vec<Letter> = shape
                .iter()
                .map(|t| self.value_at(model, &model.multiply(g, t)))
                .collect();
            out.push(vals.into_boxed_slice());
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// Substitution rules
// ---------------------------------------------------------------------------

/// A substitution rule: one letter image per alphabet letter, each supported
/// on the seed cells of the lattice model (values in canonical cell order).
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionRule {
    model: LatticeModel,
    alphabet: Alphabet,
    images: Vec<Vec<Letter>>,
}

impl SubstitutionRule {
    pub fn new(model: LatticeModel, alphabet: Alphabet, images: Vec<Vec<Letter>>) -> Result<Self> {
        let k = model.seed_cells().len();
        if images.len() != alphabet.len() {
            return Err(Error::Structural(format!(
                "{} letter images for an alphabet of {}",
                images.len(),
                alphabet.len()
            )));
        }
        for (a, img) in images.iter().enumerate() {
            if img.len() != k {
                return Err(Error::Structural(format!(
                    "image of letter {} has {} cells, seed cells need {k}",
                    alphabet.name(a as Letter),
                    img.len()
                )));
            }
            if let Some(&bad) = img.iter().find(|&&v| v as usize >= alphabet.len()) {
                return Err(Error::Structural(format!(
                    "image of letter {} uses letter index {bad} outside the alphabet",
                    alphabet.name(a as Letter)
                )));
            }
        }
        Ok(SubstitutionRule { model, alphabet, images })
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn image(&self, letter: Letter) -> &[Letter] {
        &self.images[letter as usize]
    }

    /// One substitution step applied to a patch.
    pub fn substitute_patch(&self, patch: &Patch) -> Result<Patch> {
        let model = &self.model;
        let seeds = model.seed_cells();
        let dim = model.dim();
        let total = (patch.len() as u128) * seeds.len() as u128;
        let cap = point_cap();
        if total > cap as u128 {
            return Err(Error::PointCap { count: total, cap });
        }
        let mut flat = Vec::with_capacity(total as usize * dim);
        let mut vals = Vec::with_capacity(total as usize);
        for (g, &a) in patch.support().iter().zip(patch.values()) {
            let dg = model.dilate(1, g);
            let img = &self.images[a as usize];
            for (i, k) in seeds.iter().enumerate() {
                flat.extend_from_slice(&model.multiply(&dg, k));
                vals.push(img[i]);
            }
        }
        let (support, values) = sort_points_with_values(dim, flat, vals)?;
        if values.len() != total as usize {
            return Err(Error::Structural(
                "substitution images overlap; dilation data is inconsistent".into(),
            ));
        }
        Patch::new(support, values)
    }

    /// The n-th iterate `Sⁿ(a)` as a materialized patch on `L(n, {e})`.
    pub fn letter_patch(&self, letter: Letter, n: u32) -> Result<Patch> {
        let e = PointSet::from_points(self.model.dim(), [self.model.identity()]);
        let mut patch = Patch::new(e, vec![letter])?;
        for _ in 0..n {
            patch = self.substitute_patch(&patch)?;
        }
        Ok(patch)
    }

    /// Pointwise evaluation of a letter iterate: `Sⁿ(a)(κ)` for
    /// `κ ∈ L(n, {e})`, in `O(n)` time and `O(1)` space. Panics if `κ` is
    /// outside the level-n support (callers decompose first).
    pub fn letter_value(&self, letter: Letter, n: u32, kappa: &[i64]) -> Letter {
        if n == 0 {
            assert!(
                kappa.iter().all(|&c| c == 0),
                "level-0 iterate is supported on the identity only"
            );
            return letter;
        }
        let (x, k) = self.model.decompose_one(kappa);
        let parent = self.letter_value(letter, n - 1, &x);
        let i = self
            .model
            .seed_cells()
            .index_of(&k)
            .expect("decomposition residue is a seed cell");
        self.images[parent as usize][i]
    }

    /// Pointwise evaluation of `Sⁿ(ω)(γ)` for a periodic configuration ω.
    pub fn evaluate(&self, config: &PeriodicConfig, n: u32, g: &[i64]) -> Letter {
        let (eta, kappa) = self.model.quotient_decompose(n, g);
        let letter = config.value_at(&self.model, &eta);
        self.letter_value(letter, n, &kappa)
    }

    /// One substitution step applied to a periodic configuration: the result
    /// is invariant under the dilated subgroup (periods multiply by the
    /// block factors on ℤᵈ; the transversal level increases by one).
    pub fn substitute_config(&self, config: &PeriodicConfig) -> Result<PeriodicConfig> {
        match (&self.model.kind(), config) {
            (crate::lattice::LatticeKind::ZdBlocks { factors }, _) => {
                let old_periods: Vec<u32> = match config {
                    PeriodicConfig::Constant { .. } => vec![1; factors.len()],
                    PeriodicConfig::ZdWord { periods, .. } => periods.clone(),
                    PeriodicConfig::Transversal { .. } => {
                        return Err(Error::Unsupported(
                            "transversal configurations are for non-abelian lattices; use a ℤᵈ word"
                                .into(),
                        ))
                    }
                };
                let new_periods: Vec<u32> = old_periods
                    .iter()
                    .zip(factors)
                    .map(|(&p, &m)| p.checked_mul(m).ok_or(Error::Overflow("periods")))
                    .collect::<Result<_>>()?;
                let total: usize = new_periods.iter().map(|&p| p as usize).product();
                let cap = point_cap();
                if total as u128 > cap as u128 {
                    return Err(Error::PointCap { count: total as u128, cap });
                }
                let mut values = vec![0 as Letter; total];
                let dim = factors.len();
                let mut g = vec![0i64; dim];
                for (idx, slot) in values.iter_mut().enumerate() {
                    // unflatten idx (row-major, last axis fastest)
                    let mut rem = idx;
                    for j in (0..dim).rev() {
                        let p = new_periods[j] as usize;
                        g[j] = (rem % p) as i64;
                        rem /= p;
                    }
                    *slot = self.evaluate(config, 1, &g);
                }
                PeriodicConfig::zd_word(new_periods, values)
            }
            (_, PeriodicConfig::Constant { letter }) => {
                let img = self.letter_patch(*letter, 1)?;
                PeriodicConfig::transversal(&self.model, 1, img.values().to_vec())
            }
            (_, PeriodicConfig::Transversal { level, cells, values }) => {
                let patch = Patch::new(cells.clone(), values.clone())?;
                let next = self.substitute_patch(&patch)?;
                PeriodicConfig::transversal(&self.model, level + 1, next.values().to_vec())
            }
            (_, PeriodicConfig::ZdWord { .. }) => Err(Error::Unsupported(
                "ℤᵈ words are for block lattices; use a transversal configuration".into(),
            )),
        }
    }

    /// Letter-occurrence reachability: `reach[a][b]` is true when letter `b`
    /// occurs in the image of letter `a`.
    pub fn occurrence_graph(&self) -> Vec<Vec<bool>> {
        let n = self.alphabet.len();
        let mut reach = vec![vec![false; n]; n];
        for (a, img) in self.images.iter().enumerate() {
            for &b in img {
                reach[a][b as usize] = true;
            }
        }
        reach
    }

    /// Smallest `L` with every letter occurring in `S^L(a)` for every `a`,
    /// searched up to the Wielandt bound `(|𝒜|−1)² + 1`; `None` when the
    /// rule is not primitive.
    pub fn primitivity_exponent(&self) -> Option<u32> {
        let n = self.alphabet.len();
        let base = self.occurrence_graph();
        let mut power = base.clone();
        let bound = ((n - 1) * (n - 1) + 1) as u32;
        for l in 1..=bound {
            if power.iter().all(|row| row.iter().all(|&x| x)) {
                return Some(l);
            }
            // power ← power · base over the boolean semiring
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if power[i][k] {
                        for j in 0..n {
                            if base[k][j] {
                                next[i][j] = true;
                            }
                        }
                    }
                }
            }
            power = next;
        }
        None
    }
}
