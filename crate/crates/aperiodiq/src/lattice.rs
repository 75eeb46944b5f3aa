//! Lattices with a dilation structure.
//!
//! Two families are provided:
//!
//! * [`LatticeKind::ZdBlocks`] — the abelian lattice ℤᵈ with the coordinatewise
//!   dilation `x ↦ (m₁x₁, …, m_d x_d)` and the quasi-norm metric
//!   `d(x, y) = max_j |x_j − y_j|^(1/α_j)` with `α_j = log m_j / log λ₀`,
//!   where the stretch factor `λ₀ = min_j m_j`.
//! * [`LatticeKind::Heisenberg`] — the discrete Heisenberg lattice H₃(2ℤ)
//!   (all coordinates even) inside the real Heisenberg group, with the
//!   dilation `(x, y, z) ↦ (λx, λy, λ²z)` for `λ₀ = 4` and the Cygan–Korányi
//!   metric `d(g, h) = ‖g⁻¹h‖`, `‖(x, y, z)‖⁴ = (x² + y²)² + z²`.
//!
//! All set memberships are decided exactly: integer arithmetic for the
//! Heisenberg norm and for uniform block factors, and ε-guarded floats only
//! for mixed block factors (where the exponents `1/α_j` are irrational).

use crate::error::{point_cap, Error, Result};
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational scalar used for radii and fundamental-domain bounds.
pub type Rat = Ratio<i128>;

/// Guard band for comparisons that must go through floating point
/// (mixed block factors only). Candidates inside the band are rejected,
/// which keeps ball enumerations conservative but never inexact on the
/// accept side.
const FLOAT_GUARD: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Point sets
// ---------------------------------------------------------------------------

/// A finite set of lattice points, stored as a flat, lexicographically sorted,
/// deduplicated coordinate buffer. The sorted order is the canonical cell
/// order used everywhere (rule images, window values, serialization).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointSet {
    dim: usize,
    flat: Vec<i64>,
}

impl serde::Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for p in self.iter() {
            seq.serialize_element(p)?;
        }
        seq.end()
    }
}

/// Serializes a rational as the exact string `"p/q"` (for use with
/// `#[serde(serialize_with = …)]`).
pub fn serialize_rat<S: serde::Serializer>(
    r: &Rat,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

impl PointSet {
    /// Builds a set from a flat coordinate buffer (`dim` coordinates per
    /// point), sorting and deduplicating.
    pub fn from_flat(dim: usize, mut flat: Vec<i64>) -> Self {
        assert!(dim > 0 && flat.len() % dim == 0, "malformed point buffer");
        let n = flat.len() / dim;
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let pa = &flat[a as usize * dim..(a as usize + 1) * dim];
            let pb = &flat[b as usize * dim..(b as usize + 1) * dim];
            pa.cmp(pb)
        });
        let mut sorted = Vec::with_capacity(flat.len());
        for &i in &order {
            let p = &flat[i as usize * dim..(i as usize + 1) * dim];
            if sorted.len() >= dim && &sorted[sorted.len() - dim..] == p {
                continue; // duplicate
            }
            sorted.extend_from_slice(p);
        }
        flat = sorted;
        PointSet { dim, flat }
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Vec<i64>>) -> Self {
        let mut flat = Vec::new();
        for p in points {
            assert_eq!(p.len(), dim);
            flat.extend_from_slice(&p);
        }
        Self::from_flat(dim, flat)
    }

    pub fn empty(dim: usize) -> Self {
        PointSet { dim, flat: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn get(&self, i: usize) -> &[i64] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.flat.chunks_exact(self.dim)
    }

    /// Binary search for a point; the buffer is sorted by construction.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        debug_assert_eq!(p.len(), self.dim);
        let n = self.len();
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(p) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.index_of(p).is_some()
    }

    /// True if every point of `other` is in `self`.
    pub fn is_superset_of(&self, other: &PointSet) -> bool {
        other.iter().all(|p| self.contains(p))
    }
}

// ---------------------------------------------------------------------------
// Lattice models
// ---------------------------------------------------------------------------

/// Which lattice family a model belongs to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LatticeKind {
    /// ℤᵈ with coordinatewise dilation by per-axis factors `m_j ≥ 2`.
    ZdBlocks { factors: Vec<u32> },
    /// The discrete Heisenberg lattice H₃(2ℤ) with λ₀ = 4.
    Heisenberg,
}

/// A lattice together with its dilation structure and derived constants.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticeModel {
    kind: LatticeKind,
    dim: usize,
    lambda0: u32,
    seeds: PointSet,
}

impl LatticeModel {
    /// ℤᵈ with per-axis dilation factors. Every factor must be ≥ 2.
    pub fn zd_blocks(factors: &[u32]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Structural("at least one block factor required".into()));
        }
        if factors.iter().any(|&m| m < 2) {
            return Err(Error::Structural(format!(
                "block factors must be >= 2, got {factors:?}"
            )));
        }
        let dim = factors.len();
        let lambda0 = *factors.iter().min().unwrap();
        let seeds = zd_box_points(factors);
        Ok(LatticeModel { kind: LatticeKind::ZdBlocks { factors: factors.to_vec() }, dim, lambda0, seeds })
    }

    /// The discrete Heisenberg lattice H₃(2ℤ).
    pub fn heisenberg() -> Self {
        // D₄[V] ∩ Γ for V = [−1,1)³: x, y ∈ [−4,4), z ∈ [−16,16), all even.
        let mut flat = Vec::new();
        for x in (-4..4).step_by(2) {
            for y in (-4..4).step_by(2) {
                for z in (-16..16).step_by(2) {
                    flat.extend_from_slice(&[x, y, z]);
                }
            }
        }
        LatticeModel {
            kind: LatticeKind::Heisenberg,
            dim: 3,
            lambda0: 4,
            seeds: PointSet::from_flat(3, flat),
        }
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    /// Number of coordinates of a lattice point.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The stretch factor λ₀ of the dilation family.
    pub fn lambda0(&self) -> u32 {
        self.lambda0
    }

    pub fn is_heisenberg(&self) -> bool {
        matches!(self.kind, LatticeKind::Heisenberg)
    }

    /// True when all block factors agree (metric comparisons are exact).
    pub fn is_uniform(&self) -> bool {
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => factors.iter().all(|&m| m == factors[0]),
            LatticeKind::Heisenberg => true,
        }
    }

    pub fn identity(&self) -> Vec<i64> {
        vec![0; self.dim]
    }

    fn check_point(&self, p: &[i64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::Structural(format!(
                "point has {} coordinates, lattice needs {}",
                p.len(),
                self.dim
            )));
        }
        if self.is_heisenberg() && p.iter().any(|&c| c % 2 != 0) {
            return Err(Error::Structural(format!(
                "Heisenberg lattice points have even coordinates, got {p:?}"
            )));
        }
        Ok(())
    }

    /// Group multiplication.
    pub fn multiply(&self, g: &[i64], h: &[i64]) -> Vec<i64> {
        debug_assert_eq!(g.len(), self.dim);
        debug_assert_eq!(h.len(), self.dim);
        match &self.kind {
            LatticeKind::ZdBlocks { .. } => g.iter().zip(h).map(|(a, b)| a + b).collect(),
            LatticeKind::Heisenberg => heis_mul(g, h),
        }
    }

    /// Group inverse.
    pub fn inverse(&self, g: &[i64]) -> Vec<i64> {
        match &self.kind {
            LatticeKind::ZdBlocks { .. } => g.iter().map(|a| -a).collect(),
            // (x,y,z)⁻¹ = (−x,−y,−z): the commutator correction cancels.
            LatticeKind::Heisenberg => g.iter().map(|a| -a).collect(),
        }
    }

    /// n-fold dilation D_{λ₀}ⁿ applied to a lattice point.
    pub fn dilate(&self, n: u32, g: &[i64]) -> Vec<i64> {
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => g
                .iter()
                .zip(factors)
                .map(|(&c, &m)| c * (m as i64).pow(n))
                .collect(),
            LatticeKind::Heisenberg => {
                let s = 4i64.pow(n);
                vec![g[0] * s, g[1] * s, g[2] * s * s]
            }
        }
    }

    /// Exact inverse dilation; `None` if `g` is not in the image of Dⁿ.
    pub fn undilate(&self, n: u32, g: &[i64]) -> Option<Vec<i64>> {
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => {
                let mut out = Vec::with_capacity(self.dim);
                for (&c, &m) in g.iter().zip(factors) {
                    let s = (m as i64).pow(n);
                    if c % s != 0 {
                        return None;
                    }
                    out.push(c / s);
                }
                Some(out)
            }
            LatticeKind::Heisenberg => {
                let s = 4i64.pow(n);
                if g[0] % s != 0 || g[1] % s != 0 || g[2] % (s * s) != 0 {
                    return None;
                }
                Some(vec![g[0] / s, g[1] / s, g[2] / (s * s)])
            }
        }
    }

    // -- metric ------------------------------------------------------------

    /// Exact test `d(g, h) < r`.
    ///
    /// Heisenberg: integers throughout (compare `(x²+y²)² + z²` with `r⁴`
    /// over cleared denominators). Uniform blocks: integers. Mixed blocks:
    /// ε-guarded floats, with the guard band rejecting (conservative).
    pub fn metric_lt(&self, g: &[i64], h: &[i64], r: Rat) -> bool {
        if r <= Rat::zero() {
            return false;
        }
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => {
                let lambda0 = self.lambda0 as i128;
                factors.iter().zip(g.iter().zip(h)).all(|(&m, (&a, &b))| {
                    let delta = (a as i128 - b as i128).abs();
                    if m as i128 == lambda0 {
                        // α_j = 1: compare |Δ| < r exactly.
                        delta * r.denom() < *r.numer()
                    } else {
                        // α_j = log m / log λ₀ > 1: compare |Δ| < r^{α_j}.
                        let alpha = (m as f64).ln() / (lambda0 as f64).ln();
                        let bound = rat_to_f64(r).powf(alpha);
                        (delta as f64) < bound * (1.0 - FLOAT_GUARD)
                    }
                })
            }
            LatticeKind::Heisenberg => {
                let diff = heis_mul(&self.inverse(g), h);
                let n4 = heis_norm4(&diff);
                // n4 < r⁴  ⟺  n4·q⁴ < p⁴ for r = p/q.
                match (
                    n4.checked_mul(pow4(*r.denom())),
                    pow4(*r.numer()).into(),
                ) {
                    (Some(lhs), rhs) => lhs < rhs,
                    (None, _) => {
                        // Fall back to big-integer arithmetic (cold path).
                        use num_bigint::BigInt;
                        let lhs = BigInt::from(n4) * BigInt::from(r.denom().pow(4));
                        let rhs = BigInt::from(r.numer().pow(4));
                        lhs < rhs
                    }
                }
            }
        }
    }

    /// `d(e, g)` as a float upper bound (used only to size search balls;
    /// exactness is never required on this path because enlarging a search
    /// ball preserves completeness).
    pub fn norm_upper(&self, g: &[i64]) -> f64 {
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => {
                let lambda0 = self.lambda0 as f64;
                g.iter()
                    .zip(factors)
                    .map(|(&c, &m)| {
                        let alpha = (m as f64).ln() / lambda0.ln();
                        (c.abs() as f64).powf(1.0 / alpha)
                    })
                    .fold(0.0, f64::max)
                    * (1.0 + 1e-12)
            }
            LatticeKind::Heisenberg => (heis_norm4(g) as f64).powf(0.25) * (1.0 + 1e-12),
        }
    }

    // -- balls ---------------------------------------------------------------

    /// All lattice points γ with `d(center, γ) < r`, in canonical order.
    pub fn ball_points(&self, center: &[i64], r: Rat) -> Result<PointSet> {
        self.check_point(center)?;
        let center_rat: Vec<Rat> = center.iter().map(|&c| Rat::from_integer(c as i128)).collect();
        self.ball_points_rat(&center_rat, r)
    }

    /// Ball enumeration around a rational center (used by domain
    /// verification, where centers are inverse dilations of lattice points).
    pub fn ball_points_rat(&self, center: &[Rat], r: Rat) -> Result<PointSet> {
        if r <= Rat::zero() {
            return Ok(PointSet::empty(self.dim));
        }
        let cap = point_cap();
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => {
                let lambda0 = self.lambda0;
                let mut ranges: Vec<(i64, i64)> = Vec::with_capacity(self.dim);
                let mut count: u128 = 1;
                for (j, &m) in factors.iter().enumerate() {
                    let bound = if m == lambda0 {
                        rat_to_f64(r)
                    } else {
                        let alpha = (m as f64).ln() / (lambda0 as f64).ln();
                        rat_to_f64(r).powf(alpha)
                    };
                    let c = rat_to_f64(center[j]);
                    let lo = (c - bound).floor() as i64;
                    let hi = (c + bound).ceil() as i64;
                    ranges.push((lo, hi));
                    count = count.saturating_mul((hi - lo + 1).max(0) as u128);
                }
                if count > cap as u128 {
                    return Err(Error::PointCap { count, cap });
                }
                let mut flat = Vec::new();
                let mut cursor = vec![0i64; self.dim];
                enumerate_box(&ranges, 0, &mut cursor, &mut |p| {
                    if self.rat_center_lt(center, p, r) {
                        flat.extend_from_slice(p);
                    }
                });
                Ok(PointSet::from_flat(self.dim, flat))
            }
            LatticeKind::Heisenberg => {
                // |Δx|, |Δy| < r and the twisted z-offset < r².
                let rf = rat_to_f64(r);
                let r2 = rf * rf;
                let cx = rat_to_f64(center[0]);
                let cy = rat_to_f64(center[1]);
                let xs = even_range(cx - rf, cx + rf);
                let ys = even_range(cy - rf, cy + rf);
                // Integer form of the exact membership test: with the center
                // written over a common denominator q (and q² for the z
                // slot), the inequality `((Δx²+Δy²)² + Δz²) < r⁴` clears all
                // denominators. Falls back to rational arithmetic when the
                // z denominator is not compatible or sizes threaten overflow.
                let q = lcm_i128(*center[0].denom(), *center[1].denom());
                let q2 = q * q;
                // Guards keep every product below 2¹²⁷: the test values are
                // bounded by ~12·q⁴·(ru + 2·rv)⁴ with r = ru/rv.
                let fast = q <= 1 << 12
                    && (q2 % center[2].denom()) == 0
                    && r.numer() + 2 * r.denom() <= 1 << 18;
                let (a0, a1, a2, rv4, rhs) = if fast {
                    (
                        center[0].numer() * (q / center[0].denom()),
                        center[1].numer() * (q / center[1].denom()),
                        center[2].numer() * (q2 / center[2].denom()),
                        r.denom().pow(4),
                        4 * q2 * q2 * r.numer().pow(4),
                    )
                } else {
                    (0, 0, 0, 0, 0)
                };
                let mut flat = Vec::new();
                let mut count: u128 = 0;
                for &x in &xs {
                    for &y in &ys {
                        // z-window: |z − cz + (cy·x − cx·y)/2| < r².
                        let shift = (cy * x as f64 - cx * y as f64) / 2.0;
                        let zc = rat_to_f64(center[2]) - shift;
                        let zs = even_range(zc - r2, zc + r2);
                        count += zs.len() as u128;
                        if count > cap as u128 {
                            return Err(Error::PointCap { count, cap });
                        }
                        for &z in &zs {
                            let p = [x, y, z];
                            let inside = if fast {
                                let nx = x as i128 * q - a0;
                                let ny = y as i128 * q - a1;
                                let nz = 2 * (z as i128 * q2 - a2)
                                    + q * (a1 * x as i128 - a0 * y as i128);
                                let h = nx * nx + ny * ny;
                                (4 * h * h + nz * nz) * rv4 < rhs
                            } else {
                                self.rat_center_lt(center, &p, r)
                            };
                            if inside {
                                flat.extend_from_slice(&p);
                            }
                        }
                    }
                }
                Ok(PointSet::from_flat(3, flat))
            }
        }
    }

    /// Exact test `d(center, p) < r` for a rational center.
    fn rat_center_lt(&self, center: &[Rat], p: &[i64], r: Rat) -> bool {
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => {
                let lambda0 = self.lambda0;
                factors.iter().enumerate().all(|(j, &m)| {
                    let delta = (Rat::from_integer(p[j] as i128) - center[j]).abs();
                    if m == lambda0 {
                        delta < r
                    } else {
                        let alpha = (m as f64).ln() / (lambda0 as f64).ln();
                        rat_to_f64(delta) < rat_to_f64(r).powf(alpha) * (1.0 - FLOAT_GUARD)
                    }
                })
            }
            LatticeKind::Heisenberg => {
                // group difference center⁻¹·p with rational center
                let dx = Rat::from_integer(p[0] as i128) - center[0];
                let dy = Rat::from_integer(p[1] as i128) - center[1];
                let twist = (center[1] * Rat::from_integer(p[0] as i128)
                    - center[0] * Rat::from_integer(p[1] as i128))
                    / Rat::from_integer(2);
                let dz = Rat::from_integer(p[2] as i128) - center[2] + twist;
                // ((dx²+dy²)² + dz²) < r⁴ in exact rationals.
                let h = dx * dx + dy * dy;
                let lhs = h * h + dz * dz;
                lhs < r * r * r * r
            }
        }
    }

    // -- seed cells and support recursion -----------------------------------

    /// The seed cells K = D_{λ₀}[V] ∩ Γ: the cells a single letter expands to
    /// under one substitution step.
    pub fn seed_cells(&self) -> &PointSet {
        &self.seeds
    }

    /// The n-step support `L(n, M)` of a patch supported on `M`:
    /// `L(0, M) = M`, `L(n, M) = { D(γ)·κ : γ ∈ L(n−1, M), κ ∈ K }`.
    pub fn support(&self, n: u32, m_set: &PointSet) -> Result<PointSet> {
        let cap = point_cap();
        let k = self.seeds.len() as u128;
        let total = (m_set.len() as u128).saturating_mul(k.saturating_pow(n));
        if total > cap as u128 {
            return Err(Error::PointCap { count: total, cap });
        }
        let mut level: Vec<i64> = m_set.iter().flatten().copied().collect();
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * self.seeds.len());
            for g in level.chunks_exact(self.dim) {
                let dg = self.dilate(1, g);
                for k in self.seeds.iter() {
                    next.extend_from_slice(&self.multiply(&dg, k));
                }
            }
            level = next;
        }
        let set = PointSet::from_flat(self.dim, level);
        debug_assert_eq!(set.len() as u128, total, "support cells must be disjoint");
        Ok(set)
    }

    /// Streaming variant of [`Self::support`] for invariant checks that
    /// would blow the materialization cap: visits every point of `L(n, M)`
    /// exactly once without storing them.
    pub fn support_scan(&self, n: u32, m_set: &PointSet, visit: &mut dyn FnMut(&[i64])) {
        fn rec(
            model: &LatticeModel,
            depth: u32,
            g: &[i64],
            visit: &mut dyn FnMut(&[i64]),
        ) {
            if depth == 0 {
                visit(g);
                return;
            }
            let dg = model.dilate(1, g);
            for k in model.seeds.iter() {
                rec(model, depth - 1, &model.multiply(&dg, k), visit);
            }
        }
        for g in m_set.iter() {
            rec(self, n, g, visit);
        }
    }

    /// One-step decomposition γ = D(x)·k with k ∈ K; always succeeds and the
    /// pair is unique because D[V] is a fundamental domain of D[Γ].
    pub fn decompose_one(&self, g: &[i64]) -> (Vec<i64>, Vec<i64>) {
        match &self.kind {
            LatticeKind::ZdBlocks { factors } => {
                let mut x = Vec::with_capacity(self.dim);
                let mut k = Vec::with_capacity(self.dim);
                for (j, &m) in factors.iter().enumerate() {
                    let m = m as i64;
                    // seed interval [−m/2, m/2) ∩ ℤ, lower end ⌈−m/2⌉
                    let lo = -(m / 2);
                    let rem = (g[j] - lo).rem_euclid(m);
                    k.push(lo + rem);
                    x.push((g[j] - (lo + rem)) / m);
                }
                (x, k)
            }
            LatticeKind::Heisenberg => {
                // Find the unique x ∈ Γ with x⁻¹·D⁻¹(γ) ∈ V = [−1,1)³. The
                // even integer whose cell [v−1, v+1) contains a rational c
                // is 2⌊(c+1)/2⌋, which turns into pure floor divisions once
                // c is written over its denominator (4 for the horizontal
                // slots, 16 for the twisted vertical slot).
                let x0 = 2 * (g[0] as i128 + 4).div_euclid(8);
                let x1 = 2 * (g[1] as i128 + 4).div_euclid(8);
                // z slot after removing the commutator twist ½(x₂c₁ − x₁c₂):
                // c = g₃/16 + (x₂·g₁/4 − x₁·g₂/4)/2.
                let zc16 = g[2] as i128 + 2 * x1 * g[0] as i128 - 2 * x0 * g[1] as i128;
                let x2 = 2 * (zc16 + 16).div_euclid(32);
                let x = vec![x0 as i64, x1 as i64, x2 as i64];
                let k = heis_mul(&self.inverse(&self.dilate(1, &x)), g);
                debug_assert!(self.seeds.contains(&k), "residue {k:?} outside seed cells");
                (x, k)
            }
        }
    }

    /// Membership test γ ∈ L(n, M) without materializing the support.
    pub fn support_contains(&self, n: u32, m_set: &PointSet, g: &[i64]) -> bool {
        let mut cur = g.to_vec();
        for _ in 0..n {
            let (x, _k) = self.decompose_one(&cur);
            cur = x;
        }
        m_set.contains(&cur)
    }

    /// Unique decomposition γ = Dⁿ(η)·κ with κ ∈ L(n, {e}); returns (η, κ).
    pub fn quotient_decompose(&self, n: u32, g: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let mut ks: Vec<Vec<i64>> = Vec::with_capacity(n as usize);
        let mut cur = g.to_vec();
        for _ in 0..n {
            let (x, k) = self.decompose_one(&cur);
            ks.push(k);
            cur = x;
        }
        // κ = D^{n−1}(k_n)·D^{n−2}(k_{n−1})⋯k₁ with ks = [k₁, k₂, …, k_n]
        let mut kappa = self.identity();
        for (i, k) in ks.iter().enumerate().rev() {
            kappa = self.multiply(&kappa, &self.dilate(i as u32, k));
        }
        (cur, kappa)
    }

    // -- derived constants ---------------------------------------------------

    /// Largest radius with B(e, r₋) ⊆ V.
    pub fn r_minus(&self) -> Rat {
        match self.kind {
            LatticeKind::ZdBlocks { .. } => Rat::new(1, 2),
            LatticeKind::Heisenberg => Rat::from_integer(1),
        }
    }

    /// Smallest radius with closure(V) ⊆ B(e, r₊).
    pub fn r_plus(&self) -> Rat {
        match self.kind {
            LatticeKind::ZdBlocks { .. } => Rat::from_integer(1),
            LatticeKind::Heisenberg => Rat::new(3, 2),
        }
    }

    /// Radius bound C₊ = r₊·λ₀/(λ₀−1) with `L(n, {e}) ⊆ B(e, λ₀ⁿ·C₊)`.
    pub fn c_plus(&self) -> Rat {
        let l = Rat::from_integer(self.lambda0 as i128);
        self.r_plus() * l / (l - Rat::from_integer(1))
    }

    /// Per-axis half-open bounds `[lo_j, hi_j)` of the fundamental region
    /// `V(n)` for block lattices (rational endpoints). The recursion is
    /// `lo ← m·(⌈lo⌉ − ½)`, `hi ← m·(⌈hi⌉ − ½)` starting from `∓½`.
    pub fn zd_level_bounds(&self, n: u32) -> Result<Vec<(Rat, Rat)>> {
        let LatticeKind::ZdBlocks { factors } = &self.kind else {
            return Err(Error::Unsupported("zd_level_bounds needs a block lattice".into()));
        };
        Ok(factors
            .iter()
            .map(|&m| {
                let m = Rat::from_integer(m as i128);
                let mut lo = Rat::new(-1, 2);
                let mut hi = Rat::new(1, 2);
                let half = Rat::new(1, 2);
                for _ in 0..n {
                    lo = m * (lo.ceil() - half);
                    hi = m * (hi.ceil() - half);
                }
                (lo, hi)
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

/// Axis-aligned box of lattice points with inclusive per-axis bounds.
pub fn box_shape(ranges: &[(i64, i64)]) -> PointSet {
    let mut flat = Vec::new();
    let mut cursor = vec![0i64; ranges.len()];
    enumerate_box(ranges, 0, &mut cursor, &mut |p| flat.extend_from_slice(p));
    PointSet::from_flat(ranges.len(), flat)
}

/// The cube {0, …, side−1}ᵈ, the standard window shape on ℤᵈ.
pub fn cube_shape(dim: usize, side: i64) -> PointSet {
    box_shape(&vec![(0, side - 1); dim])
}

impl LatticeModel {
    /// Left-translate of a point set: {g·p : p ∈ set}.
    pub fn translate_set(&self, g: &[i64], set: &PointSet) -> PointSet {
        let mut flat = Vec::with_capacity(set.len() * self.dim);
        for p in set.iter() {
            flat.extend_from_slice(&self.multiply(g, p));
        }
        PointSet::from_flat(self.dim, flat)
    }
}

fn zd_box_points(factors: &[u32]) -> PointSet {
    // ∏ [−m_j/2, m_j/2) ∩ ℤ
    let ranges: Vec<(i64, i64)> = factors
        .iter()
        .map(|&m| {
            let m = m as i64;
            (-(m / 2), m - 1 - m / 2)
        })
        .collect();
    let mut flat = Vec::new();
    let mut cursor = vec![0i64; factors.len()];
    enumerate_box(&ranges, 0, &mut cursor, &mut |p| flat.extend_from_slice(p));
    PointSet::from_flat(factors.len(), flat)
}

fn enumerate_box(
    ranges: &[(i64, i64)],
    depth: usize,
    cursor: &mut Vec<i64>,
    visit: &mut impl FnMut(&[i64]),
) {
    if depth == ranges.len() {
        visit(cursor);
        return;
    }
    for v in ranges[depth].0..=ranges[depth].1 {
        cursor[depth] = v;
        enumerate_box(ranges, depth + 1, cursor, visit);
    }
}

/// Heisenberg multiplication (x,y,z)·(a,b,c) = (x+a, y+b, z+c+½(xb−ay)).
fn heis_mul(g: &[i64], h: &[i64]) -> Vec<i64> {
    let x = g[0] as i128;
    let y = g[1] as i128;
    let a = h[0] as i128;
    let b = h[1] as i128;
    let twist = (x * b - a * y) / 2;
    let z = g[2] as i128 + h[2] as i128 + twist;
    vec![
        (g[0] + h[0]),
        (g[1] + h[1]),
        i64::try_from(z).expect("Heisenberg z-coordinate overflow"),
    ]
}

/// Fourth power of the Cygan–Korányi norm: (x²+y²)² + z².
fn heis_norm4(g: &[i64]) -> i128 {
    let x = g[0] as i128;
    let y = g[1] as i128;
    let z = g[2] as i128;
    let h = x * x + y * y;
    h * h + z * z
}

fn pow4(v: i128) -> i128 {
    v * v * v * v
}

fn rat_to_f64(r: Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Even integers in the closed interval `[lo, hi]` (floats are only used to
/// seed the scan range; candidates are tested exactly afterwards).
fn even_range(lo: f64, hi: f64) -> Vec<i64> {
    let lo = lo.floor() as i64 - 2;
    let hi = hi.ceil() as i64 + 2;
    let mut v = Vec::new();
    let mut x = if lo % 2 == 0 { lo } else { lo + 1 };
    while x <= hi {
        v.push(x);
        x += 2;
    }
    v
}

fn lcm_i128(a: i128, b: i128) -> i128 {
    fn gcd(mut a: i128, mut b: i128) -> i128 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.abs()
    }
    (a / gcd(a, b)) * b
}
