//! Testing domains: finite window shapes that decide legality of whole
//! configurations with a uniform delay.
//!
//! A finite set `T ⊆ Γ` containing the identity is a *testing domain* when
//! there is a step count `N` such that every translate of a known-good
//! reference shape is covered by a positioned `N`-step support of `T`. The
//! verifier in this module checks exactly that covering condition on a
//! transversal of the dilated lattice, searching the witness translate
//! `γ_x` inside an explicit ball whose radius is derived from the candidate
//! shape and the lattice constants, so a failed search is a genuine
//! refutation rather than a missed witness.
//!
//! The module also ships, per lattice backend, a *sufficiency witness*
//! (a ball that provably sits inside an iterated support — the geometric
//! ingredient behind testing-domain existence), a *canonical domain*
//! constructor, and a greedy reducer that shrinks a verified domain while
//! re-certifying every step.

use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{box_shape, LatticeKind, LatticeModel, PointSet, Rat};

// ---------------------------------------------------------------------------
// Sufficiency witness
// ---------------------------------------------------------------------------

/// A ball `B(z, c_minus)` whose dilates stay inside iterated supports:
/// `Dⁿ[B(z, c_minus)] ∩ Γ ⊆ L(s+n, {e})` for all `n ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SufficiencyWitness {
    /// Radius of the witnessed ball (positive).
    #[serde(serialize_with = "crate::lattice::serialize_rat")]
    pub c_minus: Rat,
    /// Extra support depth consumed by the witness.
    pub s: u32,
    /// Center of the witnessed ball.
    pub z: Vec<i64>,
}

/// Produces the sufficiency witness for the given lattice backend.
///
/// Block lattices use the sharper shipped constants
/// `c_minus = 2λ₀ − 3`, `s = 4`, with `z` the rounded per-axis midpoint of
/// the level-4 fundamental region. Lattices whose dilation factor satisfies
/// `λ₀ > 1 + r₊/r₋` (the Heisenberg backend does) use the direct formula
/// `c_minus = (r₋/λ₀)·(λ₀ − (1 + r₊/r₋))` with `s = 0`, `z = e`.
pub fn sufficiency_witness(model: &LatticeModel) -> Result<SufficiencyWitness> {
    match model.kind() {
        LatticeKind::ZdBlocks { .. } => {
            let lambda0 = Rat::from_integer(model.lambda0() as i128);
            let c_minus = Rat::from_integer(2) * lambda0 - Rat::from_integer(3);
            let bounds = model.zd_level_bounds(4)?;
            let z = bounds
                .iter()
                .map(|&(lo, hi)| {
                    let mid = (lo + hi) / Rat::from_integer(2);
                    rat_round(mid)
                })
                .collect();
            Ok(SufficiencyWitness { c_minus, s: 4, z })
        }
        LatticeKind::Heisenberg => {
            let lambda0 = Rat::from_integer(model.lambda0() as i128);
            let threshold = Rat::one() + model.r_plus() / model.r_minus();
            if lambda0 <= threshold {
                return Err(Error::NoResult(
                    "dilation factor too small for the direct sufficiency formula".into(),
                ));
            }
            let c_minus = model.r_minus() / lambda0 * (lambda0 - threshold);
            Ok(SufficiencyWitness { c_minus, s: 0, z: model.identity() })
        }
    }
}

/// Re-validates a sufficiency witness by enumeration:
/// `B(Dⁿ(z), c_minus·λ₀ⁿ) ∩ Γ ⊆ L(s+n, {e})` for `n ∈ {1, …, n_max}`
/// (the dilate of a ball is the ball of the dilated center with scaled
/// radius, because the metric is exactly homogeneous under dilation).
pub fn validate_sufficiency(
    model: &LatticeModel,
    witness: &SufficiencyWitness,
    n_max: u32,
) -> Result<()> {
    let e = PointSet::from_points(model.dim(), [model.identity()]);
    for n in 1..=n_max {
        let center: Vec<Rat> = model
            .dilate(n, &witness.z)
            .iter()
            .map(|&c| Rat::from_integer(c as i128))
            .collect();
        let radius = witness.c_minus
            * Rat::from_integer((model.lambda0() as i128).pow(n));
        let ball = model.ball_points_rat(&center, radius)?;
        for p in ball.iter() {
            if !model.support_contains(witness.s + n, &e, p) {
                return Err(Error::NoResult(format!(
                    "sufficiency witness fails at n={n}: ball point {p:?} \
                     escapes the depth-{} support",
                    witness.s + n
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Canonical domain
// ---------------------------------------------------------------------------

/// Builds the default testing domain for the backend, returning the domain
/// together with its covering constant `C_T`.
///
/// Block lattices ship the unit box `{0,1}ᵈ` with `C_T = 2λ₀`. Other
/// backends take the least support depth `s₂` and the largest dyadic
/// fraction `δ ≤ r₋/2` such that thickening the fundamental region by `δ`
/// stays inside `B(e, c_minus·λ₀^{s₂})` — certified by the exact rational
/// inequality `(c_minus·λ₀^{s₂} − δ)⁴ ≥ sup‖V̄‖⁴` — and return
/// `T₀ = L(s + s₂, {e})` with `C_T = 1/δ`.
pub fn canonical_domain(model: &LatticeModel) -> Result<(PointSet, Rat)> {
    match model.kind() {
        LatticeKind::ZdBlocks { .. } => {
            let ranges: Vec<(i64, i64)> = vec![(0, 1); model.dim()];
            let c_t = Rat::from_integer(2 * model.lambda0() as i128);
            Ok((box_shape(&ranges), c_t))
        }
        LatticeKind::Heisenberg => {
            let witness = sufficiency_witness(model)?;
            // sup over the closed fundamental region [−1,1]³ of the quartic
            // norm: (x²+y²)² + z² ≤ (1+1)² + 1 = 5, attained at corners.
            let sup_norm4 = Rat::from_integer(5);
            for s2 in 0..=8u32 {
                let reach = witness.c_minus
                    * Rat::from_integer((model.lambda0() as i128).pow(s2));
                // Largest δ = r₋/2ᵏ, k ≥ 1, with (reach − δ)⁴ ≥ sup‖V̄‖⁴.
                // The descent stops at 2⁻²⁵ to keep the exact fourth powers
                // inside i128 range.
                let mut delta = model.r_minus() / Rat::from_integer(2);
                for _ in 0..24 {
                    if reach > delta {
                        let margin = reach - delta;
                        let m2 = margin * margin;
                        if m2 * m2 >= sup_norm4 {
                            let e = PointSet::from_points(model.dim(), [model.identity()]);
                            let t0 = model.support(witness.s + s2, &e)?;
                            return Ok((t0, delta.recip()));
                        }
                    }
                    delta = delta / Rat::from_integer(2);
                }
            }
            Err(Error::NoResult(
                "no support depth admits a positive thickening margin".into(),
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Domain verification
// ---------------------------------------------------------------------------

/// Proof object produced by [`verify_domain`]: for every transversal point
/// `x` of the `n0`-dilated lattice, a translate `γ_x` with
/// `x·reference ⊆ D^{n0}(γ_x)·L(n0, domain)`.
#[derive(Debug, Clone, Serialize)]
pub struct DomainCertificate {
    /// The known-good shape whose translates were covered.
    pub reference: PointSet,
    /// The certified candidate shape.
    pub domain: PointSet,
    /// Dilation depth of the covering.
    pub n0: u32,
    /// `(x, γ_x)` pairs, one per transversal point, in transversal order.
    pub witnesses: Vec<(Vec<i64>, Vec<i64>)>,
}

impl DomainCertificate {
    /// Re-checks every stored containment by direct point decomposition.
    pub fn revalidate(&self, model: &LatticeModel) -> Result<()> {
        for (x, gamma) in &self.witnesses {
            if !covering_holds(model, &self.reference, &self.domain, self.n0, x, gamma) {
                return Err(Error::NoResult(format!(
                    "stored witness {gamma:?} fails for transversal point {x:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Tests `x·reference ⊆ D^{n0}(γ)·L(n0, domain)` pointwise: each point of
/// the translated reference is shifted by `D^{n0}(γ)⁻¹` and decomposed
/// `n0` steps; the residual quotient must land in `domain`.
fn covering_holds(
    model: &LatticeModel,
    reference: &PointSet,
    domain: &PointSet,
    n0: u32,
    x: &[i64],
    gamma: &[i64],
) -> bool {
    let shift = model.inverse(&model.dilate(n0, gamma));
    reference.iter().all(|t| {
        let tau = model.multiply(x, t);
        let rho = model.multiply(&shift, &tau);
        model.support_contains(n0, domain, &rho)
    })
}

/// Searches the witness translate for one transversal point. The search
/// ball is centered at the rational point `D^{−n0}(x)` with radius
/// `R + C₊` where `R` upper-bounds `max_{t ∈ domain} d(e, t) + 1`; every
/// valid witness lies in that ball, so an empty search refutes the
/// covering for this `x`.
fn find_witness(
    model: &LatticeModel,
    reference: &PointSet,
    domain: &PointSet,
    n0: u32,
    x: &[i64],
    radius: Rat,
) -> Result<Option<Vec<i64>>> {
    let scale = (model.lambda0() as i128).pow(n0);
    let center: Vec<Rat> = match model.kind() {
        LatticeKind::ZdBlocks { factors } => x
            .iter()
            .zip(factors.iter())
            .map(|(&c, &m)| Rat::new(c as i128, (m as i128).pow(n0)))
            .collect(),
        LatticeKind::Heisenberg => vec![
            Rat::new(x[0] as i128, scale),
            Rat::new(x[1] as i128, scale),
            Rat::new(x[2] as i128, scale * scale),
        ],
    };
    let mut keyed: Vec<(f64, Vec<i64>)> = model
        .ball_points_rat(&center, radius)?
        .iter()
        .map(|p| (approx_distance(model, &center, p), p.to_vec()))
        .collect();
    keyed.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    for (_, gamma) in &keyed {
        if covering_holds(model, reference, domain, n0, x, gamma) {
            return Ok(Some(gamma.clone()));
        }
    }
    Ok(None)
}

/// Float distance from a rational center, used only to order candidate
/// witnesses so the nearest are tried first; correctness never depends on
/// this value.
fn approx_distance(model: &LatticeModel, center: &[Rat], p: &[i64]) -> f64 {
    let cf: Vec<f64> = center.iter().map(rat_f64).collect();
    match model.kind() {
        LatticeKind::ZdBlocks { factors } => {
            let lambda0 = model.lambda0() as f64;
            factors
                .iter()
                .enumerate()
                .map(|(j, &m)| {
                    let delta = (p[j] as f64 - cf[j]).abs();
                    if (m as f64) == lambda0 {
                        delta
                    } else {
                        let alpha = (m as f64).ln() / lambda0.ln();
                        delta.powf(1.0 / alpha)
                    }
                })
                .fold(0.0, f64::max)
        }
        LatticeKind::Heisenberg => {
            let dx = p[0] as f64 - cf[0];
            let dy = p[1] as f64 - cf[1];
            let twist = (cf[1] * p[0] as f64 - cf[0] * p[1] as f64) / 2.0;
            let dz = p[2] as f64 - cf[2] + twist;
            let h = dx * dx + dy * dy;
            (h * h + dz * dz).powf(0.25)
        }
    }
}

/// Upper bound on `max_{t ∈ set} d(e, t) + 1` as a rational, used for the
/// witness search radius. Enlarging the radius only adds candidates, so a
/// float round-up here cannot lose witnesses.
fn search_radius(model: &LatticeModel, domain: &PointSet) -> Rat {
    let max_norm = domain
        .iter()
        .map(|p| model.norm_upper(p))
        .fold(0.0f64, f64::max);
    let scaled = (max_norm * 1024.0).ceil() as i128;
    Rat::new(scaled, 1024) + Rat::one() + model.c_plus()
}

/// Verifies that `domain` is a testing domain at depth `n0`, assuming
/// `reference` already is one. For every `x` in the transversal
/// `L(n0, {e})` a witness translate is searched in the exact candidate
/// ball; all found yields a certificate, and any miss is reported as a
/// definite failure listing the offending transversal points.
pub fn verify_domain(
    model: &LatticeModel,
    reference: &PointSet,
    domain: &PointSet,
    n0: u32,
) -> Result<DomainCertificate> {
    if n0 == 0 {
        return Err(Error::Structural("verification depth must be at least 1".into()));
    }
    if !reference.contains(&model.identity()) {
        return Err(Error::Structural(
            "the reference domain must contain the identity".into(),
        ));
    }
    if domain.is_empty() {
        return Err(Error::Structural("the candidate domain is empty".into()));
    }
    let e = PointSet::from_points(model.dim(), [model.identity()]);
    let transversal = model.support(n0, &e)?;
    let radius = search_radius(model, domain);

    let results: Vec<(Vec<i64>, Option<Vec<i64>>)> = transversal
        .iter()
        .map(|x| x.to_vec())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| {
            let found = find_witness(model, reference, domain, n0, &x, radius)?;
            Ok((x, found))
        })
        .collect::<Result<_>>()?;

    let mut witnesses = Vec::with_capacity(results.len());
    let mut missing: Vec<Vec<i64>> = Vec::new();
    for (x, found) in results {
        match found {
            Some(gamma) => witnesses.push((x, gamma)),
            None => missing.push(x),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<String> =
            missing.iter().take(16).map(|x| format!("{x:?}")).collect();
        let suffix = if missing.len() > 16 {
            format!(" (+{} more)", missing.len() - 16)
        } else {
            String::new()
        };
        return Err(Error::NoResult(format!(
            "domain of size {} is not certified at depth {n0}: no witness for \
             {} of {} transversal points: {}{}",
            domain.len(),
            missing.len(),
            transversal.len(),
            shown.join(", "),
            suffix
        )));
    }
    Ok(DomainCertificate {
        reference: reference.clone(),
        domain: domain.clone(),
        n0,
        witnesses,
    })
}

// ---------------------------------------------------------------------------
// Greedy reduction
// ---------------------------------------------------------------------------

/// Result of a greedy domain reduction: the chain of accepted domains
/// (starting with the input) and one certificate per accepted step.
#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    /// Accepted domains, largest first; `chain[0]` is the input.
    pub chain: Vec<PointSet>,
    /// `certificates[i]` certifies `chain[i+1]` against `chain[i]`.
    pub certificates: Vec<DomainCertificate>,
}

impl ReductionOutcome {
    /// The smallest certified domain.
    pub fn final_domain(&self) -> &PointSet {
        self.chain.last().unwrap()
    }

    /// Sizes along the chain, e.g. `[256, 52, 28]`.
    pub fn sizes(&self) -> Vec<usize> {
        self.chain.iter().map(|d| d.len()).collect()
    }

    /// Human-readable size ledger, e.g. `"256 → 52 → 28"`.
    pub fn ledger(&self) -> String {
        self.sizes()
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" → ")
    }
}

/// Candidate shrink moves for the current domain: per-axis trims of the
/// `k` values farthest from zero (largest `k` first, never trimming the
/// identity's value), then removals of single points in decreasing
/// distance from the identity.
fn shrink_moves(model: &LatticeModel, domain: &PointSet) -> Vec<PointSet> {
    let dim = model.dim();
    let mut moves: Vec<PointSet> = Vec::new();

    for axis in 0..dim {
        let mut values: Vec<i64> = domain.iter().map(|p| p[axis]).collect();
        values.sort_unstable();
        values.dedup();
        // Farthest-from-zero first; positive before negative on ties so
        // trims prefer keeping the lower half-open side.
        values.sort_by_key(|&v| (std::cmp::Reverse(v.abs()), std::cmp::Reverse(v)));
        let removable: Vec<i64> = values.into_iter().filter(|&v| v != 0).collect();
        for k in (1..=removable.len()).rev() {
            let drop: Vec<i64> = removable[..k].to_vec();
            let kept: Vec<Vec<i64>> = domain
                .iter()
                .filter(|p| !drop.contains(&p[axis]))
                .map(|p| p.to_vec())
                .collect();
            if !kept.is_empty() && kept.len() < domain.len() {
                moves.push(PointSet::from_points(dim, kept));
            }
        }
    }

    let mut points: Vec<Vec<i64>> = domain
        .iter()
        .filter(|p| p.iter().any(|&c| c != 0))
        .map(|p| p.to_vec())
        .collect();
    points.sort_by(|a, b| {
        model
            .norm_upper(b)
            .partial_cmp(&model.norm_upper(a))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for p in points {
        let kept: Vec<Vec<i64>> = domain
            .iter()
            .filter(|q| *q != p.as_slice())
            .map(|q| q.to_vec())
            .collect();
        moves.push(PointSet::from_points(dim, kept));
    }
    moves
}

/// Greedily shrinks a verified domain: in each round the candidate moves
/// are tried in order and the first one that re-certifies (at depth `n0`
/// against the *current* domain) is accepted; the loop stops when no move
/// certifies. The certificates chain, so the final domain is certified
/// against the input with the depths summed.
pub fn reduce_domain(
    model: &LatticeModel,
    start: &PointSet,
    n0: u32,
    max_rounds: usize,
) -> Result<ReductionOutcome> {
    if !start.contains(&model.identity()) {
        return Err(Error::Structural(
            "the starting domain must contain the identity".into(),
        ));
    }
    let mut chain = vec![start.clone()];
    let mut certificates = Vec::new();
    for _ in 0..max_rounds {
        let current = chain.last().unwrap().clone();
        if current.len() == 1 {
            break;
        }
        let mut accepted = false;
        for candidate in shrink_moves(model, &current) {
            match verify_domain(model, &current, &candidate, n0) {
                Ok(cert) => {
                    chain.push(candidate);
                    certificates.push(cert);
                    accepted = true;
                    break;
                }
                Err(Error::NoResult(_)) => continue,
                Err(other) => return Err(other),
            }
        }
        if !accepted {
            break;
        }
    }
    Ok(ReductionOutcome { chain, certificates })
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

/// Rounds a rational to the nearest integer (half away from zero).
fn rat_round(r: Rat) -> i64 {
    let two = Rat::from_integer(2);
    let shifted = if r.is_negative() {
        (r * two - Rat::one()) / two
    } else {
        (r * two + Rat::one()) / two
    };
    let t = shifted.trunc().to_integer();
    t as i64
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
    use crate::lattice::cube_shape;

    #[test]
    fn witness_constants_for_block_lattices() {
        let model = LatticeModel::zd_blocks(&[2, 2]).unwrap();
        let w = sufficiency_witness(&model).unwrap();
        assert_eq!(w.c_minus, Rat::from_integer(1));
        assert_eq!(w.s, 4);
        // Level-4 box per axis is [−15, 1) for factor 2; midpoint −7.
        assert_eq!(w.z, vec![-7, -7]);

        let model3 = LatticeModel::zd_blocks(&[3]).unwrap();
        let w3 = sufficiency_witness(&model3).unwrap();
        assert_eq!(w3.c_minus, Rat::from_integer(3));
        // Level-4 box for factor 3 is [−13.5, 13.5); midpoint 0.
        assert_eq!(w3.z, vec![0]);
    }

    #[test]
    fn witness_constants_for_heisenberg() {
        let model = LatticeModel::heisenberg();
        let w = sufficiency_witness(&model).unwrap();
        assert_eq!(w.c_minus, Rat::new(3, 8));
        assert_eq!(w.s, 0);
        assert_eq!(w.z, vec![0, 0, 0]);
    }

    #[test]
    fn witness_validates_by_enumeration() {
        let model = LatticeModel::zd_blocks(&[2, 2]).unwrap();
        let w = sufficiency_witness(&model).unwrap();
        validate_sufficiency(&model, &w, 3).unwrap();

        let heis = LatticeModel::heisenberg();
        let wh = sufficiency_witness(&heis).unwrap();
        validate_sufficiency(&heis, &wh, 2).unwrap();
    }

    #[test]
    fn witness_validation_rejects_oversized_radius() {
        let model = LatticeModel::heisenberg();
        let bad = SufficiencyWitness {
            c_minus: Rat::from_integer(3),
            s: 0,
            z: model.identity(),
        };
        assert!(validate_sufficiency(&model, &bad, 1).is_err());
    }

    #[test]
    fn canonical_domain_block_lattice() {
        let model = LatticeModel::zd_blocks(&[2, 2]).unwrap();
        let (t0, c_t) = canonical_domain(&model).unwrap();
        assert_eq!(t0, cube_shape(2, 2));
        assert_eq!(c_t, Rat::from_integer(4));
        assert!(t0.contains(&[0, 0]));
    }

    #[test]
    fn canonical_domain_heisenberg() {
        let model = LatticeModel::heisenberg();
        let (t0, c_t) = canonical_domain(&model).unwrap();
        assert_eq!(t0.len(), 256);
        assert_eq!(t0, *model.seed_cells());
        // Largest certified dyadic thickening is 1/256:
        // (3/2 − 1/256)⁴ = 383⁴/256⁴ ≥ 5 but (3/2 − 1/128)⁴ < 5.
        assert_eq!(c_t, Rat::from_integer(256));
        assert!(t0.contains(&[0, 0, 0]));
    }

    #[test]
    fn unit_box_verifies_against_itself() {
        for factors in [vec![2u32], vec![2, 2], vec![2, 3]] {
            let model = LatticeModel::zd_blocks(&factors).unwrap();
            let t = box_shape(&vec![(0, 1); factors.len()]);
            let cert = verify_domain(&model, &t, &t, 1).unwrap();
            assert_eq!(cert.witnesses.len(), model.seed_cells().len());
            cert.revalidate(&model).unwrap();
        }
    }

    #[test]
    fn missing_point_is_refuted() {
        // {0} on ℤ with factor 2 cannot cover translates of {0,1}: the
        // transversal point x = 1 has no witness.
        let model = LatticeModel::zd_blocks(&[2]).unwrap();
        let reference = box_shape(&[(0, 1)]);
        let candidate = PointSet::from_points(1, [vec![0]]);
        let err = verify_domain(&model, &reference, &candidate, 1).unwrap_err();
        match err {
            Error::NoResult(msg) => assert!(msg.contains("not certified")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn superset_of_certified_domain_certifies() {
        let model = LatticeModel::zd_blocks(&[2, 2]).unwrap();
        let t = box_shape(&[(0, 1), (0, 1)]);
        verify_domain(&model, &t, &t, 1).unwrap();
        let bigger = box_shape(&[(-1, 1), (0, 1)]);
        assert!(bigger.is_superset_of(&t));
        verify_domain(&model, &t, &bigger, 1).unwrap();
    }

    #[test]
    fn chained_certificates_compose() {
        // ℤ, factor 2: {0,1,2} certifies against {0,1} at depth 1 and
        // {0,1} against itself; the composition certifies at depth 2.
        let model = LatticeModel::zd_blocks(&[2]).unwrap();
        let t0 = box_shape(&[(0, 1)]);
        let t1 = box_shape(&[(0, 2)]);
        verify_domain(&model, &t0, &t1, 1).unwrap();
        verify_domain(&model, &t1, &t0, 1).unwrap();
        verify_domain(&model, &t0, &t0, 2).unwrap();
    }

    #[test]
    fn reducer_keeps_minimal_unit_box() {
        let model = LatticeModel::zd_blocks(&[2, 2]).unwrap();
        let t = box_shape(&[(0, 1), (0, 1)]);
        let outcome = reduce_domain(&model, &t, 1, 8).unwrap();
        assert_eq!(outcome.chain.len(), 1);
        assert_eq!(outcome.final_domain(), &t);
        // Direct confirmation: every single-point removal fails.
        for p in t.iter() {
            if p.iter().all(|&c| c == 0) {
                continue;
            }
            let kept: Vec<Vec<i64>> = t
                .iter()
                .filter(|q| *q != p)
                .map(|q| q.to_vec())
                .collect();
            let candidate = PointSet::from_points(2, kept);
            assert!(verify_domain(&model, &t, &candidate, 1).is_err());
        }
    }

    #[test]
    fn reducer_shrinks_padded_box() {
        // ℤ², factor 2: {−1,0,1,2}² reduces; the unit box is reachable and
        // every accepted step carries a certificate.
        let model = LatticeModel::zd_blocks(&[2, 2]).unwrap();
        let t = box_shape(&[(-1, 2), (-1, 2)]);
        let outcome = reduce_domain(&model, &t, 1, 32).unwrap();
        assert!(outcome.final_domain().len() < t.len());
        assert_eq!(outcome.certificates.len(), outcome.chain.len() - 1);
        for (i, cert) in outcome.certificates.iter().enumerate() {
            assert_eq!(&cert.reference, &outcome.chain[i]);
            assert_eq!(&cert.domain, &outcome.chain[i + 1]);
            cert.revalidate(&model).unwrap();
        }
        // The tie-break trims positive values first, so the surviving
        // translate of the unit box is {−1,0}².
        assert_eq!(outcome.final_domain(), &box_shape(&[(-1, 0), (-1, 0)]));
    }

    #[test]
    fn singleton_reduces_to_itself() {
        let model = LatticeModel::zd_blocks(&[2]).unwrap();
        let t = PointSet::from_points(1, [vec![0]]);
        let outcome = reduce_domain(&model, &t, 1, 4).unwrap();
        assert_eq!(outcome.final_domain(), &t);
    }

    #[test]
    fn rounding_helper() {
        assert_eq!(rat_round(Rat::new(-7, 1)), -7);
        assert_eq!(rat_round(Rat::new(-15, 2)), -8);
        assert_eq!(rat_round(Rat::new(1, 2)), 1);
        assert_eq!(rat_round(Rat::new(0, 1)), 0);
    }
}
