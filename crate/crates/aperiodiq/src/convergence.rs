//! Deciding whether the periodic approximations generated by iterating a
//! substitution on a seed configuration converge to the substitution
//! subshift, and measuring how fast.
//!
//! The decision runs on a finite directed graph over the windows of a
//! testing shape `T`: edges connect an illegal window `P` to every illegal
//! `T`-window of its `N_T`-fold substitute. The approximants converge
//! exactly when no closed subpath is reachable from the seed's windows, in
//! which case all windows become legal after at most `|𝒜^T|·N_T` steps —
//! and in practice after `(longest illegal path + 1)·N_T` steps, which this
//! module also reports. Divergence comes with an explicit closed subpath as
//! a machine-checkable witness.
//!
//! The quantitative side measures the dictionary distance
//! `δ_n = 1/(r*+1)` — where `r*` is the largest radius on which the
//! `n`-th approximant's windows coincide with the legal ones — and fits the
//! empirical decay rate against the theoretical bound `C/λ₀ⁿ`.

use std::collections::HashMap;

use serde::Serialize;

use crate::dictionary::{
    legal_dictionary, linear_repetitivity_lower_bound, AgreementScan, Dictionary,
};
use crate::domain::{canonical_domain, sufficiency_witness, verify_domain};
use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, PointSet, Rat};
use crate::substitution::{Letter, Patch, PeriodicConfig, SubstitutionRule, Window};

// ---------------------------------------------------------------------------
// Self-covering step
// ---------------------------------------------------------------------------

/// Least `m ≤ m_max` such that every transversal point `x` of the
/// `m`-dilated lattice admits a translate `γ_x` with
/// `x·T ⊆ D^m(γ_x)·L(m, T)` — the step count at which the shape `T`
/// becomes self-covering.
pub fn compute_n_t(model: &LatticeModel, t: &PointSet, m_max: u32) -> Result<u32> {
    for m in 1..=m_max {
        match verify_domain(model, t, t, m) {
            Ok(_) => return Ok(m),
            Err(Error::NoResult(_)) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(Error::NoResult(format!(
        "shape of size {} is not self-covering within {m_max} steps",
        t.len()
    )))
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// Outcome of the convergence decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// The approximants converge to the subshift.
    Converges,
    /// A closed subpath of illegal windows is reachable: no convergence.
    Diverges,
}

/// Proof object for the convergence decision over a testing shape.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceCertificate {
    /// The decision.
    pub verdict: Verdict,
    /// Shape the windows were taken over.
    pub shape: PointSet,
    /// Substitution steps per graph edge (`N_T`).
    pub step: u32,
    /// Number of distinct seed windows examined.
    pub start_windows: usize,
    /// True when every seed window was already legal.
    pub start_all_legal: bool,
    /// For a diverging verdict: a closed subpath of illegal windows,
    /// listed with the repeated vertex at both ends.
    pub witness_cycle: Option<Vec<Window>>,
    /// For a converging verdict: the a-priori step bound `|𝒜^T|·N_T`
    /// (saturating at `u128::MAX`).
    pub n0_bound: Option<u128>,
    /// For a converging verdict: the number of edges on the longest
    /// illegal path from the seed windows.
    pub longest_illegal_path: Option<u32>,
    /// For a converging verdict: the effective step count after which all
    /// windows of the approximants are legal — `(longest+1)·N_T`, or `0`
    /// when the seed windows were already all legal.
    pub effective_n0: Option<u32>,
}

// ---------------------------------------------------------------------------
// Lazy graph exploration
// ---------------------------------------------------------------------------

/// On-demand view of the substitution graph: vertices are windows over the
/// shape, edges are computed on first visit and memoized. Only the part
/// reachable from the seed windows is ever touched, so shapes whose full
/// vertex set `|𝒜|^|T|` is astronomically large remain tractable.
struct LazyGraph<'r> {
    rule: &'r SubstitutionRule,
    shape: PointSet,
    step: u32,
    legal: Dictionary,
    successors: HashMap<Window, Vec<Window>>,
}

impl<'r> LazyGraph<'r> {
    fn new(rule: &'r SubstitutionRule, shape: &PointSet, step: u32) -> Result<Self> {
        let legal = legal_dictionary(rule, shape, 1, 4096)?;
        Ok(LazyGraph {
            rule,
            shape: shape.clone(),
            step,
            legal,
            successors: HashMap::new(),
        })
    }

    fn is_legal(&self, w: &[Letter]) -> bool {
        self.legal.contains(w)
    }

    /// Illegal windows of the `step`-fold substitute of the window.
    fn successors(&mut self, w: &Window) -> Result<Vec<Window>> {
        if let Some(s) = self.successors.get(w) {
            return Ok(s.clone());
        }
        let mut patch = Patch::new(self.shape.clone(), w.to_vec())?;
        for _ in 0..self.step {
            patch = self.rule.substitute_patch(&patch)?;
        }
        let mut succ = patch.windows(self.rule.model(), &self.shape);
        succ.retain(|q| !self.legal.contains(q));
        succ.sort_unstable();
        succ.dedup();
        self.successors.insert(w.clone(), succ.clone());
        Ok(succ)
    }
}

/// Decides convergence of the approximants `Sⁿ(start)` by exploring the
/// illegal part of the substitution graph reachable from the seed's
/// windows with an iterative three-color depth-first search. Any reachable
/// cycle yields a diverging certificate carrying the closed subpath; an
/// acyclic exploration yields a converging certificate with both the
/// a-priori and the effective step bounds.
pub fn certify(
    rule: &SubstitutionRule,
    shape: &PointSet,
    step: u32,
    start: &PeriodicConfig,
) -> Result<ConvergenceCertificate> {
    let mut graph = LazyGraph::new(rule, shape, step)?;
    let mut starts = start.windows(rule.model(), shape);
    starts.sort_unstable();
    starts.dedup();
    let start_windows = starts.len();
    if starts.is_empty() {
        return Err(Error::Structural(
            "the seed configuration produced no windows over the shape".into(),
        ));
    }
    let illegal_starts: Vec<Window> =
        starts.iter().filter(|w| !graph.is_legal(w)).cloned().collect();
    let start_all_legal = illegal_starts.is_empty();

    // Three-color DFS: 1 = on the current path, 2 = finished. `depth`
    // memoizes the longest illegal path (in edges) leaving each finished
    // vertex.
    let mut color: HashMap<Window, u8> = HashMap::new();
    let mut depth: HashMap<Window, u32> = HashMap::new();
    let mut longest: u32 = 0;

    for root in &illegal_starts {
        if color.get(root) == Some(&2) {
            continue;
        }
        // Stack frames: (vertex, its successors, next child index).
        let mut stack: Vec<(Window, Vec<Window>, usize)> = Vec::new();
        let succ = graph.successors(root)?;
        color.insert(root.clone(), 1);
        stack.push((root.clone(), succ, 0));
        while let Some((v, succ, idx)) = stack.last_mut() {
            if *idx < succ.len() {
                let child = succ[*idx].clone();
                *idx += 1;
                match color.get(&child) {
                    Some(1) => {
                        // Cycle: slice the current path from the repeated
                        // vertex to the top, then close it.
                        let pos = stack
                            .iter()
                            .position(|(w, _, _)| *w == child)
                            .expect("gray vertex must be on the stack");
                        let mut cycle: Vec<Window> =
                            stack[pos..].iter().map(|(w, _, _)| w.clone()).collect();
                        cycle.push(child);
                        return Ok(ConvergenceCertificate {
                            verdict: Verdict::Diverges,
                            shape: shape.clone(),
                            step,
                            start_windows,
                            start_all_legal,
                            witness_cycle: Some(cycle),
                            n0_bound: None,
                            longest_illegal_path: None,
                            effective_n0: None,
                        });
                    }
                    Some(2) => continue,
                    _ => {
                        let child_succ = graph.successors(&child)?;
                        color.insert(child.clone(), 1);
                        stack.push((child, child_succ, 0));
                    }
                }
            } else {
                // Post-order: longest illegal path leaving v.
                let d = succ
                    .iter()
                    .filter_map(|c| depth.get(c).map(|d| d + 1))
                    .max()
                    .unwrap_or(0);
                let v = v.clone();
                color.insert(v.clone(), 2);
                depth.insert(v, d);
                stack.pop();
            }
        }
    }

    for root in &illegal_starts {
        longest = longest.max(*depth.get(root).unwrap_or(&0));
    }
    let alphabet = rule.alphabet().len() as u128;
    let n0_bound = alphabet
        .checked_pow(shape.len() as u32)
        .and_then(|v| v.checked_mul(step as u128))
        .unwrap_or(u128::MAX);
    let effective_n0 = if start_all_legal { 0 } else { (longest + 1) * step };
    Ok(ConvergenceCertificate {
        verdict: Verdict::Converges,
        shape: shape.clone(),
        step,
        start_windows,
        start_all_legal,
        witness_cycle: None,
        n0_bound: Some(n0_bound),
        longest_illegal_path: if start_all_legal { None } else { Some(longest) },
        effective_n0: Some(effective_n0),
    })
}

/// Re-checks a diverging certificate's closed subpath: consecutive
/// vertices must be graph edges (window of the `step`-fold substitute),
/// every vertex must be illegal, and the path must close up.
pub fn revalidate_cycle(
    rule: &SubstitutionRule,
    cert: &ConvergenceCertificate,
) -> Result<()> {
    let Some(cycle) = &cert.witness_cycle else {
        return Err(Error::Structural("certificate has no cycle to check".into()));
    };
    if cycle.len() < 2 || cycle.first() != cycle.last() {
        return Err(Error::NoResult("witness path does not close up".into()));
    }
    let legal = legal_dictionary(rule, &cert.shape, 1, 4096)?;
    for w in cycle {
        if legal.contains(w) {
            return Err(Error::NoResult(format!(
                "witness vertex {w:?} is legal"
            )));
        }
    }
    for pair in cycle.windows(2) {
        let mut patch = Patch::new(cert.shape.clone(), pair[0].to_vec())?;
        for _ in 0..cert.step {
            patch = rule.substitute_patch(&patch)?;
        }
        let windows = patch.windows(rule.model(), &cert.shape);
        if windows.binary_search(&pair[1]).is_err() {
            return Err(Error::NoResult(format!(
                "no edge from {:?} to {:?}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Materialized graph
// ---------------------------------------------------------------------------

/// Fully materialized substitution graph over all `|𝒜|^|T|` windows.
/// Legal windows are isolated vertices; edges run between illegal windows
/// only.
#[derive(Debug, Clone)]
pub struct SubstitutionGraph {
    /// Window shape.
    pub shape: PointSet,
    /// Substitution steps per edge.
    pub step: u32,
    /// All windows over the shape, in lexicographic order.
    pub vertices: Vec<Window>,
    /// Legality flag per vertex.
    pub legal: Vec<bool>,
    /// Adjacency (indices into `vertices`); empty for legal vertices.
    pub edges: Vec<Vec<u32>>,
}

/// Builds the full graph. Fails with a resource error reporting the exact
/// vertex count when `|𝒜|^|T|` exceeds the cap.
pub fn build_graph(
    rule: &SubstitutionRule,
    shape: &PointSet,
    step: u32,
    cap: u64,
) -> Result<SubstitutionGraph> {
    let a = rule.alphabet().len();
    let count = (a as u128).checked_pow(shape.len() as u32);
    match count {
        Some(c) if c <= cap as u128 => {}
        _ => {
            let exact = num_bigint::BigUint::from(a).pow(shape.len() as u32);
            return Err(Error::GraphCap { count: exact.to_string(), cap });
        }
    }
    let count = count.unwrap() as usize;

    // Enumerate windows in lexicographic order; the index of a window is
    // its base-|𝒜| digit value, most significant digit first.
    let cells = shape.len();
    let mut vertices: Vec<Window> = Vec::with_capacity(count);
    for idx in 0..count {
        let mut w = vec![0 as Letter; cells];
        let mut rem = idx;
        for slot in w.iter_mut().rev() {
            *slot = (rem % a) as Letter;
            rem /= a;
        }
        vertices.push(w.into_boxed_slice());
    }

    let legal_dict = legal_dictionary(rule, shape, 1, 4096)?;
    let legal: Vec<bool> = vertices.iter().map(|v| legal_dict.contains(v)).collect();

    let index_of = |w: &[Letter]| -> u32 {
        let mut idx = 0u64;
        for &d in w {
            idx = idx * a as u64 + d as u64;
        }
        idx as u32
    };

    let mut edges: Vec<Vec<u32>> = vec![Vec::new(); count];
    for (i, v) in vertices.iter().enumerate() {
        if legal[i] {
            continue;
        }
        let mut patch = Patch::new(shape.clone(), v.to_vec())?;
        for _ in 0..step {
            patch = rule.substitute_patch(&patch)?;
        }
        let mut succ = patch.windows(rule.model(), shape);
        succ.sort_unstable();
        succ.dedup();
        let mut out: Vec<u32> = succ
            .iter()
            .map(|q| index_of(q))
            .filter(|&qi| !legal[qi as usize])
            .collect();
        out.sort_unstable();
        edges[i] = out;
    }
    Ok(SubstitutionGraph { shape: shape.clone(), step, vertices, legal, edges })
}

impl SubstitutionGraph {
    /// Indices of the vertices reachable from the given (illegal) start
    /// windows, following edges.
    pub fn reachable_from(&self, starts: &[Window]) -> Vec<usize> {
        let mut seen = vec![false; self.vertices.len()];
        let mut stack: Vec<usize> = Vec::new();
        for w in starts {
            if let Ok(i) = self.vertices.binary_search(w) {
                if !self.legal[i] && !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
        let mut out = Vec::new();
        while let Some(i) = stack.pop() {
            out.push(i);
            for &j in &self.edges[i] {
                if !seen[j as usize] {
                    seen[j as usize] = true;
                    stack.push(j as usize);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Decides convergence on the materialized graph by topological
    /// elimination (Kahn) of the subgraph reachable from the seed windows:
    /// full elimination means acyclic. The longest-path bound is computed
    /// on the eliminated order. Verdicts agree with [`certify`]; this
    /// route exists as an independent cross-check.
    pub fn certify_from(&self, starts: &[Window]) -> ConvergenceCertificate {
        let reach = self.reachable_from(starts);
        let start_all_legal = reach.is_empty()
            || starts.iter().all(|w| {
                self.vertices
                    .binary_search(w)
                    .map(|i| self.legal[i])
                    .unwrap_or(true)
            });
        let mut index_in_reach: HashMap<usize, usize> = HashMap::new();
        for (k, &i) in reach.iter().enumerate() {
            index_in_reach.insert(i, k);
        }
        // in-degrees within the reachable subgraph
        let mut indeg = vec![0usize; reach.len()];
        for &i in &reach {
            for &j in &self.edges[i] {
                if let Some(&k) = index_in_reach.get(&(j as usize)) {
                    indeg[k] += 1;
                }
            }
        }
        let mut queue: Vec<usize> =
            (0..reach.len()).filter(|&k| indeg[k] == 0).collect();
        let mut topo: Vec<usize> = Vec::with_capacity(reach.len());
        while let Some(k) = queue.pop() {
            topo.push(k);
            for &j in &self.edges[reach[k]] {
                if let Some(&kj) = index_in_reach.get(&(j as usize)) {
                    indeg[kj] -= 1;
                    if indeg[kj] == 0 {
                        queue.push(kj);
                    }
                }
            }
        }
        if topo.len() < reach.len() {
            // A cycle remains among the non-eliminated vertices; walk it.
            let remaining: Vec<usize> = (0..reach.len())
                .filter(|k| indeg[*k] > 0)
                .map(|k| reach[k])
                .collect();
            let cycle = self.extract_cycle(&remaining);
            return ConvergenceCertificate {
                verdict: Verdict::Diverges,
                shape: self.shape.clone(),
                step: self.step,
                start_windows: starts.len(),
                start_all_legal,
                witness_cycle: Some(cycle),
                n0_bound: None,
                longest_illegal_path: None,
                effective_n0: None,
            };
        }
        // Longest path over the topological order (edges count).
        let mut dist = vec![0u32; reach.len()];
        for &k in topo.iter().rev() {
            for &j in &self.edges[reach[k]] {
                if let Some(&kj) = index_in_reach.get(&(j as usize)) {
                    dist[k] = dist[k].max(dist[kj] + 1);
                }
            }
        }
        let longest = starts
            .iter()
            .filter_map(|w| self.vertices.binary_search(w).ok())
            .filter_map(|i| index_in_reach.get(&i))
            .map(|&k| dist[k])
            .max()
            .unwrap_or(0);
        let n0_bound = (self.vertices.len() as u128)
            .checked_mul(self.step as u128)
            .unwrap_or(u128::MAX);
        ConvergenceCertificate {
            verdict: Verdict::Converges,
            shape: self.shape.clone(),
            step: self.step,
            start_windows: starts.len(),
            start_all_legal,
            witness_cycle: None,
            n0_bound: Some(n0_bound),
            longest_illegal_path: if start_all_legal { None } else { Some(longest) },
            effective_n0: Some(if start_all_legal {
                0
            } else {
                (longest + 1) * self.step
            }),
        }
    }

    /// Finds a closed subpath inside a vertex set known to contain one.
    fn extract_cycle(&self, inside: &[usize]) -> Vec<Window> {
        let inside_set: std::collections::HashSet<usize> =
            inside.iter().copied().collect();
        let start = inside[0];
        // Walk forward always staying inside; a repeat must occur.
        let mut path = vec![start];
        let mut seen_at: HashMap<usize, usize> = HashMap::new();
        seen_at.insert(start, 0);
        let mut cur = start;
        loop {
            let next = self.edges[cur]
                .iter()
                .map(|&j| j as usize)
                .find(|j| inside_set.contains(j))
                .expect("every vertex in a cyclic core has an inside successor");
            if let Some(&pos) = seen_at.get(&next) {
                let mut cycle: Vec<Window> =
                    path[pos..].iter().map(|&i| self.vertices[i].clone()).collect();
                cycle.push(self.vertices[next].clone());
                return cycle;
            }
            seen_at.insert(next, path.len());
            path.push(next);
            cur = next;
        }
    }

    /// True when some directed path from the seed windows has length
    /// (in edges) at least `max_len` — with a cycle this holds for every
    /// bound, without one it never holds for `max_len ≥ |vertices|`.
    pub fn has_path_of_length(&self, starts: &[Window], max_len: u128) -> bool {
        let cert = self.certify_from(starts);
        match cert.verdict {
            Verdict::Diverges => true,
            Verdict::Converges => {
                u128::from(cert.longest_illegal_path.unwrap_or(0)) >= max_len
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dictionary distance measurements
// ---------------------------------------------------------------------------

/// Applies the substitution `n` times to a periodic configuration.
pub fn iterate_config(
    rule: &SubstitutionRule,
    start: &PeriodicConfig,
    n: u32,
) -> Result<PeriodicConfig> {
    let mut cur = start.clone();
    for _ in 0..n {
        cur = rule.substitute_config(&cur)?;
    }
    Ok(cur)
}

/// Measures the dictionary distance `δ_n = 1/(r*+1)` between the windows
/// of `Sⁿ(start)` and the legal windows, where `r*` is the largest tested
/// radius `≤ r_max` on which the two dictionaries coincide (`r* = 0`, i.e.
/// `δ = 1`, when they differ already at radius 1). Exact comparison on
/// both sides; uniform block lattices only.
pub fn measure_delta(
    rule: &SubstitutionRule,
    start: &PeriodicConfig,
    n: u32,
    r_max: i64,
) -> Result<(Rat, i64, bool)> {
    if r_max < 1 {
        return Err(Error::Structural("r_max must be at least 1".into()));
    }
    let word = iterate_config(rule, start, n)?;
    let scan = AgreementScan::new(rule, word)?;
    // radius r corresponds to the sup-metric ball {x : |x|_∞ ≤ r}, a cube
    // of odd side 2r+1
    let side_cap = 2 * r_max + 1;
    let s_star = scan.max_agreeing_side(side_cap)?;
    let r_star = ((s_star - 1) / 2).max(0).min(r_max);
    let saturated = r_star == r_max;
    Ok((Rat::new(1, (r_star + 1) as i128), r_star, saturated))
}

// ---------------------------------------------------------------------------
// Rate reports
// ---------------------------------------------------------------------------

/// One measured row of a rate table.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    /// Substitution step.
    pub n: u32,
    /// Largest agreeing radius at this step.
    pub r_star: i64,
    /// True when `r_star` hit the tested cap (the `delta` value is then
    /// only an upper bound).
    pub saturated: bool,
    /// Measured dictionary distance `1/(r*+1)` as an exact fraction.
    #[serde(serialize_with = "crate::lattice::serialize_rat")]
    pub delta: Rat,
    /// Theoretical bound `C/λ₀ⁿ` for comparison.
    pub bound_c_over_lambda_n: f64,
}

/// Measured decay of the dictionary distance along the approximants,
/// with the fitted exponent and the theoretical constants.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    /// Measured rows for `n = 0, …, n_max`.
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `ln δ_n` against `n`, over the usable rows
    /// (unsaturated, past the effective threshold); `None` when fewer
    /// than two usable rows exist.
    pub fitted_slope: Option<f64>,
    /// The decay exponent the theory predicts: `−ln λ₀`.
    pub expected_slope: f64,
    /// Theoretical constant `C = max{Ĉ_LR/C₋·λ₀^s, C_T·λ₀^{M₁}}`.
    pub theoretical_c: f64,
    /// Step threshold after which the bound applies (the effective step
    /// count of the convergence certificate).
    pub m1: u32,
    /// Computed lower bound for the linear-repetitivity constant used in
    /// `theoretical_c`.
    pub c_lr_lower_bound: f64,
    /// Covering constant of the canonical testing domain.
    pub c_t: f64,
    /// Human-readable note on how the constants were obtained.
    pub note: String,
}

impl RateReport {
    /// Renders the table as CSV with the stable column set.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,r_star,delta,bound_C_over_lambda_n\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.n,
                row.r_star,
                rat_f64(&row.delta),
                row.bound_c_over_lambda_n
            ));
        }
        out
    }
}

/// The constants entering the decay bound `C/λ₀ⁿ` for a converging seed.
#[derive(Debug, Clone, Serialize)]
pub struct RateConstants {
    /// `C = max{Ĉ_LR/C₋·λ₀^s, C_T·λ₀^{M₁}}`.
    pub theoretical_c: f64,
    /// Step threshold after which the bound applies.
    pub m1: u32,
    /// Computed lower bound for the linear-repetitivity constant.
    pub c_lr_lower_bound: f64,
    /// Covering constant of the canonical testing domain.
    pub c_t: f64,
}

/// Certifies convergence of the seed over the canonical testing domain and
/// assembles the decay-bound constants from the lattice data and a computed
/// lower bound on the linear-repetitivity constant.
pub fn rate_constants(
    rule: &SubstitutionRule,
    start: &PeriodicConfig,
) -> Result<RateConstants> {
    let model = rule.model();
    let (t0, c_t) = canonical_domain(model)?;
    let n_t = compute_n_t(model, &t0, 4)?;
    let cert = certify(rule, &t0, n_t, start)?;
    if cert.verdict == Verdict::Diverges {
        return Err(Error::NoResult(
            "rate measurement needs a converging seed; certification found a \
             reachable closed subpath"
                .into(),
        ));
    }
    let m1 = cert.effective_n0.unwrap_or(0);

    let witness = sufficiency_witness(model)?;
    let lambda0 = model.lambda0() as f64;
    let c_lr = linear_repetitivity_lower_bound(rule, &[1, 2], 64)?;
    let term_dict = c_lr / rat_f64(&witness.c_minus) * lambda0.powi(witness.s as i32);
    let term_domain = rat_f64(&c_t) * lambda0.powi(m1 as i32);
    Ok(RateConstants {
        theoretical_c: term_dict.max(term_domain),
        m1,
        c_lr_lower_bound: c_lr,
        c_t: rat_f64(&c_t),
    })
}

/// Runs the full quantitative pipeline for a converging seed: certifies
/// convergence over the canonical testing domain, measures `δ_n` for
/// `n ≤ n_max`, fits the decay slope, and assembles the theoretical
/// constant from the lattice constants and a computed lower bound on the
/// linear-repetitivity constant.
pub fn rate_report(
    rule: &SubstitutionRule,
    start: &PeriodicConfig,
    n_max: u32,
    r_max: i64,
) -> Result<RateReport> {
    let constants = rate_constants(rule, start)?;
    let lambda0 = rule.model().lambda0() as f64;

    let mut rows = Vec::new();
    for n in 0..=n_max {
        let (delta, r_star, saturated) = measure_delta(rule, start, n, r_max)?;
        rows.push(RateRow {
            n,
            r_star,
            saturated,
            delta,
            bound_c_over_lambda_n: constants.theoretical_c / lambda0.powi(n as i32),
        });
    }

    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.saturated && r.n >= constants.m1)
        .map(|r| (r.n as f64, rat_f64(&r.delta).ln()))
        .collect();
    let fitted_slope = least_squares_slope(&usable);

    Ok(RateReport {
        rows,
        fitted_slope,
        expected_slope: -lambda0.ln(),
        theoretical_c: constants.theoretical_c,
        m1: constants.m1,
        c_lr_lower_bound: constants.c_lr_lower_bound,
        c_t: constants.c_t,
        note: "constant uses a lower bound on the linear-repetitivity constant"
            .into(),
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

fn rat_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{cube_shape, LatticeModel};
    use crate::substitution::Alphabet;

    /// 1-D rule on cells {−1, 0}: a ↦ (a, b), b ↦ (a, a). Legal two-letter
    /// words are {aa, ab, ba}; bb is illegal.
    fn fib_rule() -> SubstitutionRule {
        let model = LatticeModel::zd_blocks(&[2]).unwrap();
        let alphabet = Alphabet::plain(&["a", "b"]);
        SubstitutionRule::new(model, alphabet, vec![vec![0, 1], vec![0, 0]]).unwrap()
    }

    /// 1-D rule a ↦ (b, a), b ↦ (b, b): letter iterates only ever produce
    /// the two-letter words bb and ba, so aa and ab are illegal — and the
    /// illegal window ab reproduces itself across the block seam.
    fn flip_rule() -> SubstitutionRule {
        let model = LatticeModel::zd_blocks(&[2]).unwrap();
        let alphabet = Alphabet::plain(&["a", "b"]);
        SubstitutionRule::new(model, alphabet, vec![vec![1, 0], vec![1, 1]]).unwrap()
    }

    /// 1-D rule a ↦ (a, a), b ↦ (b, a): letter iterates are a…a and ba…a,
    /// legal two-letter words {aa, ba}; the illegal window ab satisfies
    /// S(ab) = (a,a,b,a) ∋ ab — a self-loop in the substitution graph.
    fn comb_rule() -> SubstitutionRule {
        let model = LatticeModel::zd_blocks(&[2]).unwrap();
        let alphabet = Alphabet::plain(&["a", "b"]);
        SubstitutionRule::new(model, alphabet, vec![vec![0, 0], vec![1, 0]]).unwrap()
    }

    #[test]
    fn n_t_is_one_for_unit_boxes() {
        for factors in [vec![2u32], vec![2, 2]] {
            let model = LatticeModel::zd_blocks(&factors).unwrap();
            let t = cube_shape(factors.len(), 2);
            assert_eq!(compute_n_t(&model, &t, 3).unwrap(), 1);
        }
    }

    #[test]
    fn certify_converging_seed_on_pair_shape() {
        let rule = fib_rule();
        let shape = cube_shape(1, 2);
        // The word "ab" repeated is built from legal two-letter windows
        // {ab, ba}; every window is legal, so convergence is immediate.
        let start = PeriodicConfig::zd_word(vec![2], vec![0, 1]).unwrap();
        let cert = certify(&rule, &shape, 1, &start).unwrap();
        assert_eq!(cert.verdict, Verdict::Converges);
        assert!(cert.start_all_legal);
        assert_eq!(cert.effective_n0, Some(0));
        assert_eq!(cert.n0_bound, Some(4));
    }

    #[test]
    fn certify_recovers_from_illegal_start() {
        let rule = fib_rule();
        let shape = cube_shape(1, 2);
        // Constant b: the window bb is illegal, but S(bb) ⊇ windows of
        // "aaaa" − all legal; the illegal part dies after one step.
        let start = PeriodicConfig::zd_word(vec![1], vec![1]).unwrap();
        let cert = certify(&rule, &shape, 1, &start).unwrap();
        assert_eq!(cert.verdict, Verdict::Converges);
        assert!(!cert.start_all_legal);
        assert_eq!(cert.longest_illegal_path, Some(0));
        assert_eq!(cert.effective_n0, Some(1));
        // Direct confirmation: all windows of S(start) are legal.
        let s1 = iterate_config(&rule, &start, 1).unwrap();
        let legal = legal_dictionary(&rule, &shape, 1, 64).unwrap();
        for w in s1.windows(rule.model(), &shape) {
            assert!(legal.contains(&w));
        }
    }

    #[test]
    fn certify_diverging_seed_with_cycle_witness() {
        let rule = flip_rule();
        let shape = cube_shape(1, 2);
        // Constant a: its window aa is illegal, S(aa) = (b,a,b,a) brings
        // in the illegal ab, and S(ab) = (b,a,b,b) contains ab again.
        let start = PeriodicConfig::zd_word(vec![1], vec![0]).unwrap();
        let cert = certify(&rule, &shape, 1, &start).unwrap();
        assert_eq!(cert.verdict, Verdict::Diverges);
        assert!(!cert.start_all_legal);
        revalidate_cycle(&rule, &cert).unwrap();
    }

    #[test]
    fn self_reproducing_illegal_window_diverges() {
        let rule = comb_rule();
        let shape = cube_shape(1, 2);
        // Constant b: bb is illegal, S(bb) = (b,a,b,a) contains the
        // illegal ab, which is a self-loop.
        let start = PeriodicConfig::zd_word(vec![1], vec![1]).unwrap();
        let cert = certify(&rule, &shape, 1, &start).unwrap();
        assert_eq!(cert.verdict, Verdict::Diverges);
        let cycle = cert.witness_cycle.clone().unwrap();
        assert_eq!(cycle.first(), cycle.last());
        revalidate_cycle(&rule, &cert).unwrap();
        // The same rule converges from the legal constant-a seed.
        let ok = PeriodicConfig::zd_word(vec![1], vec![0]).unwrap();
        let cert = certify(&rule, &shape, 1, &ok).unwrap();
        assert_eq!(cert.verdict, Verdict::Converges);
        assert!(cert.start_all_legal);
    }

    #[test]
    fn materialized_graph_counts_and_isolation() {
        let rule = fib_rule();
        let shape = cube_shape(1, 2);
        let graph = build_graph(&rule, &shape, 1, 1 << 20).unwrap();
        assert_eq!(graph.vertices.len(), 4);
        // Legal vertices carry no edges.
        for (i, &is_legal) in graph.legal.iter().enumerate() {
            if is_legal {
                assert!(graph.edges[i].is_empty());
            }
        }
        assert_eq!(graph.legal.iter().filter(|&&l| l).count(), 3);
    }

    #[test]
    fn graph_cap_reports_exact_count() {
        let rule = fib_rule();
        let shape = cube_shape(1, 8);
        let err = build_graph(&rule, &shape, 1, 100).unwrap_err();
        match err {
            Error::GraphCap { count, cap } => {
                assert_eq!(count, "256");
                assert_eq!(cap, 100);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn lazy_and_materialized_agree_on_small_rules() {
        let shape = cube_shape(1, 2);
        for rule in [fib_rule(), flip_rule(), comb_rule()] {
            let graph = build_graph(&rule, &shape, 1, 1 << 20).unwrap();
            for letter in 0..2u8 {
                let start = PeriodicConfig::zd_word(vec![1], vec![letter]).unwrap();
                let lazy = certify(&rule, &shape, 1, &start).unwrap();
                let starts = start.windows(rule.model(), &shape);
                let mat = graph.certify_from(&starts);
                assert_eq!(lazy.verdict, mat.verdict, "letter {letter}");
                assert_eq!(lazy.effective_n0, mat.effective_n0);
                // length-bound formulation: a path of length ≥ |𝒜^T|
                // exists iff the verdict is diverging
                assert_eq!(
                    graph.has_path_of_length(&starts, graph.vertices.len() as u128),
                    lazy.verdict == Verdict::Diverges
                );
            }
        }
    }

    #[test]
    fn illegal_windows_descend_from_illegal_windows() {
        // Every illegal window of S(ω) is a successor of some illegal
        // window of ω.
        let rule = fib_rule();
        let shape = cube_shape(1, 2);
        let legal = legal_dictionary(&rule, &shape, 1, 64).unwrap();
        let start = PeriodicConfig::zd_word(vec![2], vec![1, 1]).unwrap();
        let image = iterate_config(&rule, &start, 1).unwrap();
        let model = rule.model();
        let illegal_now: Vec<Window> = image
            .windows(model, &shape)
            .into_iter()
            .filter(|w| !legal.contains(w))
            .collect();
        let illegal_before: Vec<Window> = start
            .windows(model, &shape)
            .into_iter()
            .filter(|w| !legal.contains(w))
            .collect();
        for w in &illegal_now {
            let mut found = false;
            for p in &illegal_before {
                let patch = Patch::new(shape.clone(), p.to_vec()).unwrap();
                let img = rule.substitute_patch(&patch).unwrap();
                if img.windows(model, &shape).binary_search(w).is_ok() {
                    found = true;
                    break;
                }
            }
            assert!(found, "illegal window {w:?} has no illegal ancestor");
        }
    }

    #[test]
    fn delta_measures_agreement_radius() {
        let rule = fib_rule();
        let start = PeriodicConfig::zd_word(vec![2], vec![0, 1]).unwrap();
        // All windows legal and the rule is primitive: by n = 3 the word
        // already carries every legal 3-window; agreement grows with n.
        let (d0, r0, _) = measure_delta(&rule, &start, 0, 8).unwrap();
        let (d3, r3, _) = measure_delta(&rule, &start, 3, 8).unwrap();
        assert!(r3 >= r0);
        assert!(d3 <= d0);
        // Deep iterate with a small radius cap: agreement saturates the cap,
        // pinning the radius convention (balls of radius r = cubes of side
        // 2r+1) and the saturation flag.
        let (d8, r8, sat8) = measure_delta(&rule, &start, 8, 4).unwrap();
        assert_eq!(r8, 4);
        assert!(sat8);
        assert_eq!(d8, Rat::new(1, 5));
    }

    #[test]
    fn delta_is_antitone_for_converging_seed() {
        let rule = fib_rule();
        let start = PeriodicConfig::zd_word(vec![2], vec![0, 1]).unwrap();
        let mut prev = Rat::new(2, 1);
        for n in 0..5 {
            let (d, _, _) = measure_delta(&rule, &start, n, 16).unwrap();
            assert!(d <= prev, "δ grew at n={n}");
            prev = d;
        }
    }

    #[test]
    fn rate_report_fits_decay() {
        let rule = fib_rule();
        let start = PeriodicConfig::zd_word(vec![2], vec![0, 1]).unwrap();
        let report = rate_report(&rule, &start, 5, 64).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert!(report.theoretical_c > 0.0);
        // Bound column decays by λ₀ each row.
        for pair in report.rows.windows(2) {
            assert!(
                (pair[1].bound_c_over_lambda_n * 2.0 - pair[0].bound_c_over_lambda_n)
                    .abs()
                    < 1e-9
            );
        }
        let csv = report.to_csv();
        assert!(csv.starts_with("n,r_star,delta,bound_C_over_lambda_n\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn rate_report_rejects_diverging_seed() {
        let model = LatticeModel::zd_blocks(&[2]).unwrap();
        let alphabet = Alphabet::plain(&["a", "b"]);
        let rule =
            SubstitutionRule::new(model, alphabet, vec![vec![0, 0], vec![1, 1]]).unwrap();
        let start = PeriodicConfig::zd_word(vec![1], vec![1]).unwrap();
        assert!(rate_report(&rule, &start, 3, 8).is_err());
    }

    #[test]
    fn slope_fit_on_exact_geometric_data() {
        let pts: Vec<(f64, f64)> =
            (0..6).map(|n| (n as f64, (1.0f64 / 2f64.powi(n)).ln())).collect();
        let slope = least_squares_slope(&pts).unwrap();
        assert!((slope - (-(2f64.ln()))).abs() < 1e-12);
    }
}
