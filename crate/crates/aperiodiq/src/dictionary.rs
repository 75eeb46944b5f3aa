//! Dictionaries of legal windows and how to compute them.
//!
//! Two independent routes produce the set of legal windows over a shape:
//!
//! * **Direct expansion** ([`expansion_dictionary`]): collect the windows of
//!   the iterates `Sⁿ(a)` for all letters and increasing `n` until the
//!   cumulative set saturates. Simple and assumption-free, but the iterate
//!   supports grow geometrically.
//! * **Window iteration** ([`legal_dictionary`]): iterate the map
//!   `Φ(X) = { shape-windows of S^step(P) : P ∈ X }` on dictionaries over
//!   the shape. Requires the shape to reproduce itself under `step`
//!   substitution steps (every shape-window of `S^step(ω)` lies inside
//!   `S^step` of a single shape-window of ω — the testing-domain property,
//!   which on ℤᵈ holds for boxes of side `s` once
//!   `⌈(s−1)/m_j⌉ + 1 ≤ s` per axis, i.e. for every box when `m_j ≥ 2`).
//!   The state sequence eventually cycles; the union over one full cycle is
//!   the legal dictionary.
//!
//! The two routes are cross-validated in the acceptance suite.
//!
//! For measuring how far a periodic approximation is from the subshift, the
//! module provides [`AgreementScan`]: the largest square side on which the
//! dictionary of the periodic word agrees with the legal dictionary. The
//! scan never materializes large legal dictionaries: once equality is
//! verified at a parent side `p`, the periodic dictionary *is* the legal one
//! there, so the legal dictionary at any child side `s ≤ 2p−1` streams out
//! of it by one substitution step.

use std::collections::HashMap;

use crate::error::{point_cap, Error, Result};
use crate::lattice::{cube_shape, LatticeKind, LatticeModel, PointSet};
use crate::substitution::{Letter, Patch, PeriodicConfig, SubstitutionRule, Window};

/// A sorted, deduplicated set of windows over a fixed shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dictionary {
    shape: PointSet,
    windows: Vec<Window>,
}

impl Dictionary {
    pub fn new(shape: PointSet, mut windows: Vec<Window>) -> Self {
        windows.sort_unstable();
        windows.dedup();
        Dictionary { shape, windows }
    }

    pub fn shape(&self) -> &PointSet {
        &self.shape
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn contains(&self, w: &[Letter]) -> bool {
        self.windows.binary_search_by(|x| x.as_ref().cmp(w)).is_ok()
    }

    /// The dictionary of all `sub`-shaped windows occurring inside entries of
    /// this dictionary (legal dictionaries are closed under sub-windows, so
    /// this is the legal `sub`-dictionary when `self` is legal and every
    /// translate of `sub` that fits in some legal configuration also fits in
    /// `shape` — which holds whenever `sub ⊆ shape` up to translation).
    pub fn sub_dictionary(&self, model: &LatticeModel, sub: &PointSet) -> Dictionary {
        let mut out = Vec::new();
        for w in &self.windows {
            let patch = Patch::new(self.shape.clone(), w.to_vec()).expect("dictionary window");
            out.extend(patch.windows(model, sub));
        }
        Dictionary::new(sub.clone(), out)
    }
}

// ---------------------------------------------------------------------------
// Route A: direct expansion
// ---------------------------------------------------------------------------

/// Windows of the letter iterates `Sⁿ(a)`, accumulated over
/// `n = 0..=max_level` and all letters. Returns the cumulative dictionary
/// and whether it saturated (two consecutive cumulative sets equal) before
/// the level bound.
pub fn expansion_dictionary(
    rule: &SubstitutionRule,
    shape: &PointSet,
    max_level: u32,
) -> Result<(Dictionary, bool)> {
    let model = rule.model();
    let mut cumulative: Vec<Window> = Vec::new();
    let mut saturated = false;
    let mut patches: Vec<Patch> = (0..rule.alphabet().len() as Letter)
        .map(|a| rule.letter_patch(a, 0))
        .collect::<Result<_>>()?;
    for n in 0..=max_level {
        let mut level: Vec<Window> = Vec::new();
        for p in &patches {
            level.extend(p.windows(model, shape));
        }
        level.sort_unstable();
        level.dedup();
        let grew = level.iter().any(|w| cumulative.binary_search(w).is_err());
        if n > 0 && !grew && !cumulative.is_empty() {
            saturated = true;
            break;
        }
        cumulative.extend(level);
        cumulative.sort_unstable();
        cumulative.dedup();
        if n < max_level {
            patches = patches
                .iter()
                .map(|p| rule.substitute_patch(p))
                .collect::<Result<_>>()?;
        }
    }
    Ok((Dictionary::new(shape.clone(), cumulative), saturated))
}

// ---------------------------------------------------------------------------
// Route B: window iteration with cycle detection
// ---------------------------------------------------------------------------

/// The legal dictionary over `shape`, computed by iterating
/// `Φ(X) = { shape-windows of S^step(P) : P ∈ X }` from the windows of the
/// first letter iterates, detecting an exact repeat of a state, and taking
/// the union over the cycle.
pub fn legal_dictionary(
    rule: &SubstitutionRule,
    shape: &PointSet,
    step: u32,
    max_states: usize,
) -> Result<Dictionary> {
    let model = rule.model();

    // Seed: windows of S^(c·step)(a) for the smallest c at which any window
    // fits inside the iterate supports.
    let mut state: Vec<Window> = Vec::new();
    let mut patches: Vec<Patch> = (0..rule.alphabet().len() as Letter)
        .map(|a| rule.letter_patch(a, 0))
        .collect::<Result<_>>()?;
    for _c in 0..64 {
        for p in &patches {
            state.extend(p.windows(model, shape));
        }
        if !state.is_empty() {
            break;
        }
        for p in patches.iter_mut() {
            for _ in 0..step.max(1) {
                *p = rule.substitute_patch(p)?;
            }
        }
    }
    if state.is_empty() {
        return Err(Error::NoResult(format!(
            "no window of the given {}-point shape fits in any letter iterate",
            shape.len()
        )));
    }
    state.sort_unstable();
    state.dedup();

    // Iterate Φ, remembering every exact state; stop at the first repeat.
    // Successive states overlap heavily, so each distinct window's children
    // are computed once and memoized.
    let mut children: HashMap<Window, Vec<Window>> = HashMap::new();
    let mut states: Vec<Vec<Window>> = vec![state];
    let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
    index.entry(hash_state(&states[0])).or_default().push(0);
    loop {
        let current = states.last().unwrap();
        let mut next: Vec<Window> = Vec::new();
        for w in current {
            if let Some(c) = children.get(w) {
                next.extend_from_slice(c);
                continue;
            }
            let mut image = Patch::new(shape.clone(), w.to_vec())?;
            for _ in 0..step.max(1) {
                image = rule.substitute_patch(&image)?;
            }
            let c = image.windows(model, shape);
            next.extend_from_slice(&c);
            children.insert(w.clone(), c);
        }
        next.sort_unstable();
        next.dedup();
        let h = hash_state(&next);
        if let Some(cands) = index.get(&h) {
            if let Some(&start) = cands.iter().find(|&&i| states[i] == next) {
                // cycle states[start..] — union them
                let mut all: Vec<Window> = Vec::new();
                for s in &states[start..] {
                    all.extend_from_slice(s);
                }
                return Ok(Dictionary::new(shape.clone(), all));
            }
        }
        if states.len() >= max_states {
            return Err(Error::NoResult(format!(
                "window iteration did not cycle within {max_states} states"
            )));
        }
        index.entry(h).or_default().push(states.len());
        states.push(next);
    }
}

fn hash_state(state: &[Window]) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    state.len().hash(&mut h);
    for w in state {
        w.hash(&mut h);
    }
    h.finish()
}

// ---------------------------------------------------------------------------
// Bounded legality oracle
// ---------------------------------------------------------------------------

/// Decides `P ≺ Sⁿ(a)` for some letter `a` and `n ≤ max_level`, expanding
/// and caching one level at a time. Legal windows are found at the first
/// level they occur; a `false` answer means "not within the level budget"
/// and is reported as such by callers that need to distinguish. Expansion
/// stops early once a nonempty level adds no new windows (the same stall
/// rule as [`expansion_dictionary`]), so illegal queries do not force the
/// iterates all the way to the level budget.
pub struct LegalityOracle<'r> {
    rule: &'r SubstitutionRule,
    shape: PointSet,
    /// Sorted window set per expansion level, unioned over letters.
    levels: Vec<Vec<Window>>,
    patches: Vec<Patch>,
    max_level: u32,
    saturated: bool,
}

impl<'r> LegalityOracle<'r> {
    pub fn new(rule: &'r SubstitutionRule, shape: PointSet, max_level: u32) -> Result<Self> {
        let patches = (0..rule.alphabet().len() as Letter)
            .map(|a| rule.letter_patch(a, 0))
            .collect::<Result<_>>()?;
        Ok(LegalityOracle {
            rule,
            shape,
            levels: Vec::new(),
            patches,
            max_level,
            saturated: false,
        })
    }

    pub fn shape(&self) -> &PointSet {
        &self.shape
    }

    fn expand_next_level(&mut self) -> Result<()> {
        let model = self.rule.model();
        let mut set: Vec<Window> = Vec::new();
        for p in &self.patches {
            set.extend(p.windows(model, &self.shape));
        }
        set.sort_unstable();
        set.dedup();
        let have_any = self.levels.iter().any(|l| !l.is_empty());
        let grew = set
            .iter()
            .any(|w| self.levels.iter().all(|l| l.binary_search(w).is_err()));
        if have_any && !grew {
            self.saturated = true;
        }
        self.levels.push(set);
        if !self.saturated && (self.levels.len() as u32) <= self.max_level {
            self.patches = self
                .patches
                .iter()
                .map(|p| self.rule.substitute_patch(p))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }

    /// True when the window occurs in some letter iterate within the level
    /// budget.
    pub fn is_legal(&mut self, w: &[Letter]) -> Result<bool> {
        for n in 0..=self.max_level as usize {
            if self.levels.len() <= n {
                if self.saturated {
                    break;
                }
                self.expand_next_level()?;
            }
            if self.levels[n].binary_search_by(|x| x.as_ref().cmp(w)).is_ok() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The union of all levels expanded so far.
    pub fn seen_windows(&self) -> Dictionary {
        let mut all = Vec::new();
        for l in &self.levels {
            all.extend_from_slice(l);
        }
        Dictionary::new(self.shape.clone(), all)
    }
}

// ---------------------------------------------------------------------------
// Periodic dictionaries and the agreement scan
// ---------------------------------------------------------------------------

/// The dictionary of a periodic configuration over a shape.
pub fn periodic_dictionary(
    model: &LatticeModel,
    config: &PeriodicConfig,
    shape: &PointSet,
) -> Dictionary {
    Dictionary::new(shape.clone(), config.windows(model, shape))
}

/// Largest odd square side on which the dictionary of a ℤᵈ periodic word
/// equals the legal dictionary of the substitution. Requires uniform block
/// factors (square balls); the scan is exact.
pub struct AgreementScan<'r> {
    rule: &'r SubstitutionRule,
    word: PeriodicConfig,
    factor: u32,
    dim: usize,
}

impl<'r> AgreementScan<'r> {
    pub fn new(rule: &'r SubstitutionRule, word: PeriodicConfig) -> Result<Self> {
        let LatticeKind::ZdBlocks { factors } = rule.model().kind() else {
            return Err(Error::Unsupported(
                "square agreement scans are defined for block lattices".into(),
            ));
        };
        if !rule.model().is_uniform() {
            return Err(Error::Unsupported(
                "square agreement scans need uniform block factors".into(),
            ));
        }
        if !matches!(word, PeriodicConfig::Constant { .. } | PeriodicConfig::ZdWord { .. }) {
            return Err(Error::Unsupported("agreement scans take ℤᵈ words".into()));
        }
        Ok(AgreementScan { rule, word, factor: factors[0], dim: factors.len() })
    }

    fn periodic_squares(&self, side: i64) -> Result<Dictionary> {
        let shape = cube_shape(self.dim, side);
        let cap = point_cap();
        let anchors = self.word.anchor_cells(self.rule.model());
        let work = (anchors.len() as u128) * shape.len() as u128;
        if work > cap as u128 {
            return Err(Error::PointCap { count: work, cap });
        }
        Ok(periodic_dictionary(self.rule.model(), &self.word, &shape))
    }

    /// Parent side for one substitution step: every side-`s` window of
    /// `S(ω)` lies inside `S` of a side-`p` window of ω for
    /// `p = ⌈(s−1)/m⌉ + 1` (per-axis alignment argument).
    fn parent_side(&self, s: i64) -> i64 {
        (s - 1 + self.factor as i64 - 1) / self.factor as i64 + 1
    }

    /// Exact equality test "legal side-`side` dictionary == periodic
    /// side-`side` dictionary", given that equality is already verified at
    /// the parent side. The legal dictionary streams out of the (verified
    /// legal) periodic parent dictionary: one substitution step per parent
    /// window, membership + coverage against the periodic target.
    fn child_equal(&self, side: i64) -> Result<bool> {
        let p = self.parent_side(side);
        let parent = self.periodic_squares(p)?; // == legal side-p dictionary
        let target = self.periodic_squares(side)?;
        let shape = cube_shape(self.dim, side);
        let model = self.rule.model();
        let mut covered = vec![false; target.len()];
        let mut covered_count = 0usize;
        for w in parent.windows() {
            let patch = Patch::new(parent.shape().clone(), w.to_vec())?;
            let image = self.rule.substitute_patch(&patch)?;
            for cw in image.windows(model, &shape) {
                match target.windows().binary_search(&cw) {
                    Err(_) => return Ok(false), // legal window the periodic word lacks
                    Ok(i) => {
                        if !covered[i] {
                            covered[i] = true;
                            covered_count += 1;
                        }
                    }
                }
            }
        }
        // every periodic window must also be legal
        Ok(covered_count == target.len())
    }

    /// Equality at the base side, where the legal dictionary is computed
    /// from scratch by window iteration and cross-checkable by expansion.
    fn base_equal(&self, side: i64) -> Result<bool> {
        let shape = cube_shape(self.dim, side);
        let legal = legal_dictionary(self.rule, &shape, 1, 4096)?;
        let periodic = self.periodic_squares(side)?;
        Ok(legal.windows() == periodic.windows())
    }

    /// The largest odd side `s ≤ side_cap` with dictionary equality, or 0
    /// when they already differ at side 1 (different letter sets).
    ///
    /// Equality is monotone downward (dictionaries are closed under
    /// sub-windows), so the scan doubles upward along verified parents and
    /// binary-searches the boundary after the first failure.
    pub fn max_agreeing_side(&self, side_cap: i64) -> Result<i64> {
        const BASE: i64 = 5;
        // base sides 1, 3, 5 from scratch
        let mut last_ok = 0i64;
        for s in [1, 3, BASE] {
            if s > side_cap {
                return Ok(last_ok);
            }
            if self.base_equal(s)? {
                last_ok = s;
            } else {
                return Ok(last_ok);
            }
        }
        // double upward: child of verified side p reaches m·(p−1)+1
        let mut first_bad: Option<i64> = None;
        while first_bad.is_none() {
            let next = (self.factor as i64) * (last_ok - 1) + 1;
            let next = next.min(side_cap).max(last_ok + 2);
            if next > side_cap {
                return Ok(last_ok);
            }
            debug_assert!(self.parent_side(next) <= last_ok);
            if self.child_equal(next)? {
                last_ok = next;
                if next == side_cap {
                    return Ok(last_ok);
                }
            } else {
                first_bad = Some(next);
            }
        }
        // binary search odd sides in (last_ok, first_bad)
        let mut lo = last_ok; // equal
        let mut hi = first_bad.unwrap(); // unequal
        while hi - lo > 2 {
            let mut mid = lo + (hi - lo) / 2;
            if mid % 2 == 0 {
                mid += 1;
            }
            if mid >= hi {
                break;
            }
            debug_assert!(self.parent_side(mid) <= lo);
            if self.child_equal(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

// ---------------------------------------------------------------------------
// Legal square dictionaries and repetitivity bounds
// ---------------------------------------------------------------------------

/// Legal dictionary over the square (cube) of odd side `s`, built by
/// doubling from the side-5 base. The cache maps sides to finished
/// dictionaries and is reused across calls. Uniform block lattices only.
pub fn legal_square_dictionary(
    rule: &SubstitutionRule,
    side: i64,
    cache: &mut std::collections::BTreeMap<i64, Dictionary>,
) -> Result<Dictionary> {
    let LatticeKind::ZdBlocks { factors } = rule.model().kind() else {
        return Err(Error::Unsupported("square dictionaries need a block lattice".into()));
    };
    if !rule.model().is_uniform() {
        return Err(Error::Unsupported("square dictionaries need uniform factors".into()));
    }
    assert!(side >= 1 && side % 2 == 1, "odd side required");
    if let Some(d) = cache.get(&side) {
        return Ok(d.clone());
    }
    let dim = factors.len();
    let m = factors[0] as i64;
    let d = if side <= 5 {
        let base = legal_dictionary(rule, &cube_shape(dim, 5), 1, 4096)?;
        for s in [1i64, 3, 5] {
            let sub = base.sub_dictionary(rule.model(), &cube_shape(dim, s));
            cache.insert(s, sub);
        }
        cache.get(&side).unwrap().clone()
    } else {
        let parent_side = (side - 2 + m - 1) / m + 1; // ⌈(s−1)/m⌉+1
        let parent = legal_square_dictionary(rule, odd_up(parent_side), cache)?;
        let shape = cube_shape(dim, side);
        let mut out: Vec<Window> = Vec::new();
        for w in parent.windows() {
            let patch = Patch::new(parent.shape().clone(), w.to_vec())?;
            let image = rule.substitute_patch(&patch)?;
            out.extend(image.windows(rule.model(), &shape));
        }
        Dictionary::new(shape, out)
    };
    cache.insert(side, d.clone());
    Ok(d)
}

fn odd_up(s: i64) -> i64 {
    if s % 2 == 1 {
        s
    } else {
        s + 1
    }
}

/// Smallest integer radius `R` such that every legal window over the square
/// of side `2R−1` contains every legal window over the square of side
/// `2r−1`; `None` if no `R ≤ r_cap` works (then the rule is not linearly
/// repetitive at this scale or the cap is too small).
pub fn repetitivity_radius(
    rule: &SubstitutionRule,
    r: i64,
    r_cap: i64,
    cache: &mut std::collections::BTreeMap<i64, Dictionary>,
) -> Result<Option<i64>> {
    let dim = rule.model().dim();
    let small = legal_square_dictionary(rule, 2 * r - 1, cache)?;
    for big_r in r..=r_cap {
        let big = legal_square_dictionary(rule, 2 * big_r - 1, cache)?;
        let small_shape = cube_shape(dim, 2 * r - 1);
        let ok = big.windows().iter().all(|w| {
            let patch = Patch::new(big.shape().clone(), w.to_vec()).unwrap();
            let subs = patch.windows(rule.model(), &small_shape);
            small.windows().iter().all(|sw| subs.binary_search(sw).is_ok())
        });
        if ok {
            return Ok(Some(big_r));
        }
    }
    Ok(None)
}

/// Lower bound for the linear-repetitivity constant: `max_r R*(r)/r` over
/// the sampled radii.
pub fn linear_repetitivity_lower_bound(
    rule: &SubstitutionRule,
    radii: &[i64],
    r_cap: i64,
) -> Result<f64> {
    let mut cache = std::collections::BTreeMap::new();
    let mut best = 0.0f64;
    for &r in radii {
        if let Some(big_r) = repetitivity_radius(rule, r, r_cap, &mut cache)? {
            best = best.max(big_r as f64 / r as f64);
        } else {
            return Err(Error::NoResult(format!(
                "no repetitivity radius for r={r} within cap {r_cap}"
            )));
        }
    }
    Ok(best)
}
