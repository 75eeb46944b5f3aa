//! Acceptance gate: one test per shipped claim, each printing a single
//! `ACCEPT-NN PASS` line (run with `--nocapture` to see them; the test
//! names carry the same numbering). A failing claim prints its full
//! diagnostics and fails the test — numbers are reported as measured,
//! never adjusted to fit.
//!
//! Covered claims:
//!  01 substitution-graph size on the 2×2 block rule
//!  02 divergence of the four constant seeds, with closed-path witnesses
//!  03 convergence of the two mixed seeds, windows inside the dictionary
//!  04 Heisenberg testing-domain chain 256 → 52 → 28 at depth 1
//!  05 Heisenberg constant seeds converge; image patches re-checked
//!  06 self-covering step 1 for unit boxes (d ≤ 3) and the 28-cell domain
//!  07 dictionary-distance decay: bound and fitted slope
//!  08 no super-exponential decay (lower envelope)
//!  09 spectral gap decay along the approximants
//!  10 dictionary oracle equivalence and pointwise legality agreement
//!  11 free-Laplacian band gold value on ℤ²
//!  12 randomized algebra suites on every lattice backend

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aperiodiq::convergence::{
    build_graph, certify, compute_n_t, rate_report, revalidate_cycle, RateReport, Verdict,
};
use aperiodiq::dictionary::{expansion_dictionary, legal_dictionary, LegalityOracle};
use aperiodiq::domain::{canonical_domain, verify_domain};
use aperiodiq::lattice::{box_shape, LatticeModel, PointSet, Rat};
use aperiodiq::presets::{heisenberg_substitution, table_tiling};
use aperiodiq::spectral::{spectral_convergence_table, spectrum, OperatorSpec};
use aperiodiq::substitution::{PeriodicConfig, SubstitutionRule};

// -- shared fixtures --------------------------------------------------------

fn table_rule() -> SubstitutionRule {
    table_tiling().rule
}

fn table_seed(name: &str) -> PeriodicConfig {
    table_tiling().resolve_seed(name).expect("shipped seed")
}

fn unit_box(d: usize) -> PointSet {
    box_shape(&vec![(0i64, 1i64); d])
}

/// Box of even points, the natural shapes on the Heisenberg lattice.
fn even_box(ranges: &[(i64, i64)]) -> PointSet {
    let pts = box_shape(ranges)
        .iter()
        .filter(|p| p.iter().all(|c| c % 2 == 0))
        .map(|p| p.to_vec())
        .collect::<Vec<_>>();
    PointSet::from_points(ranges.len(), pts)
}

/// The 52-cell intermediate testing domain on the Heisenberg lattice.
fn heis_t1() -> PointSet {
    even_box(&[(-2, 0), (-2, 0), (-12, 12)])
}

/// The 28-cell final testing domain on the Heisenberg lattice.
fn heis_t_prime() -> PointSet {
    even_box(&[(-2, 0), (-2, 0), (-6, 6)])
}

fn rat_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// One shared decay run: claims 07 and 08 read the same table.
fn shared_rate_report() -> &'static RateReport {
    static REPORT: OnceLock<RateReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let rule = table_rule();
        let seed = table_seed("rb");
        rate_report(&rule, &seed, 5, 24).expect("decay run")
    })
}

// -- 01 ----------------------------------------------------------------------

#[test]
fn accept_01_substitution_graph_has_256_vertices() {
    let rule = table_rule();
    let shape = unit_box(2);
    let graph = build_graph(&rule, &shape, 1, 4096).unwrap();
    assert_eq!(graph.vertices.len(), 256, "4 letters on 4 cells");
    let legal = graph.legal.iter().filter(|&&l| l).count();
    // edges leave illegal vertices only
    for (i, out) in graph.edges.iter().enumerate() {
        if graph.legal[i] {
            assert!(out.is_empty());
        }
    }
    println!("ACCEPT-01 PASS — substitution graph on the 2×2 box: 256 vertices ({legal} legal)");
}

// -- 02 ----------------------------------------------------------------------

#[test]
fn accept_02_constant_seeds_diverge_with_closed_path_witnesses() {
    let rule = table_rule();
    let shape = unit_box(2);
    let n_t = compute_n_t(rule.model(), &shape, 4).unwrap();
    let names: Vec<String> =
        (0..4u8).map(|l| rule.alphabet().name(l).to_string()).collect();
    for letter in 0..4u8 {
        let cert = certify(&rule, &shape, n_t, &PeriodicConfig::constant(letter)).unwrap();
        assert_eq!(cert.verdict, Verdict::Diverges, "constant {}", names[letter as usize]);
        revalidate_cycle(&rule, &cert).expect("witness path re-checks");
        let cycle = cert.witness_cycle.as_ref().unwrap();
        let rendered: Vec<String> = cycle
            .iter()
            .map(|w| {
                w.iter()
                    .map(|&l| rule.alphabet().name(l))
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect();
        println!(
            "  constant {} diverges; closed path: {}",
            names[letter as usize],
            rendered.join("  ->  ")
        );
    }
    println!("ACCEPT-02 PASS — all 4 constant seeds diverge with re-validated closed paths");
}

// -- 03 ----------------------------------------------------------------------

#[test]
fn accept_03_mixed_seeds_converge_with_legal_windows() {
    let rule = table_rule();
    let shape = unit_box(2);
    let n_t = compute_n_t(rule.model(), &shape, 4).unwrap();
    let legal = legal_dictionary(&rule, &shape, 1, 4096).unwrap();
    for name in ["rb", "gy"] {
        let seed = table_seed(name);
        let cert = certify(&rule, &shape, n_t, &seed).unwrap();
        assert_eq!(cert.verdict, Verdict::Converges, "seed {name}");
        let windows = seed.windows(rule.model(), &shape);
        for w in &windows {
            assert!(legal.contains(w), "seed {name} window {w:?} is legal");
        }
        println!("  seed {name}: converges; all {} start windows legal", windows.len());
    }
    println!("ACCEPT-03 PASS — both mixed seeds converge and start inside the dictionary");
}

// -- 04 ----------------------------------------------------------------------

#[test]
fn accept_04_heisenberg_domain_chain_verifies_at_depth_one() {
    let model = LatticeModel::heisenberg();
    let (t0, _) = canonical_domain(&model).unwrap();
    let t1 = heis_t1();
    let tp = heis_t_prime();
    assert_eq!(t0.len(), 256);
    assert_eq!(t1.len(), 52);
    assert_eq!(tp.len(), 28);

    let cert1 = verify_domain(&model, &t0, &t1, 1).expect("256-cell -> 52-cell");
    assert_eq!(cert1.n0, 1);
    cert1.revalidate(&model).expect("first link re-checks");

    let cert2 = verify_domain(&model, &t1, &tp, 1).expect("52-cell -> 28-cell");
    assert_eq!(cert2.n0, 1);
    cert2.revalidate(&model).expect("second link re-checks");

    println!("ACCEPT-04 PASS — Heisenberg domain chain 256 → 52 → 28, each link at depth 1");
}

// -- 05 ----------------------------------------------------------------------

#[test]
fn accept_05_heisenberg_constant_seeds_converge_with_image_patches() {
    let file = heisenberg_substitution();
    let rule = &file.rule;
    let model = rule.model();
    let tp = heis_t_prime();
    let n_t = compute_n_t(model, &tp, 4).unwrap();

    for (letter, name) in [(0u8, "a"), (1u8, "b")] {
        let cert = certify(rule, &tp, n_t, &PeriodicConfig::constant(letter)).unwrap();
        assert_eq!(cert.verdict, Verdict::Converges, "constant {name}");
        println!("  constant {name}: converges over the 28-cell domain");
    }

    // the constant windows really occur inside the one-step letter images,
    // at the anchors that make the two image boxes contain them
    for (letter, name, anchor) in [(0u8, "a", [0i64, 0, 6]), (1u8, "b", [-2i64, -2, 6])] {
        let image = rule.letter_patch(letter, 1).unwrap();
        for t in tp.iter() {
            let cell = model.multiply(&anchor, t);
            assert_eq!(
                image.value_at(&cell),
                Some(letter),
                "image of {name} at {cell:?}"
            );
        }
        println!("  constant-{name} patch sits inside the one-step image at anchor {anchor:?}");
    }
    println!("ACCEPT-05 PASS — Heisenberg constant seeds converge; image containments re-verified");
}

// -- 06 ----------------------------------------------------------------------

#[test]
fn accept_06_self_covering_step_is_one() {
    for d in 1..=3usize {
        let factors = vec![2u32; d];
        let model = LatticeModel::zd_blocks(&factors).unwrap();
        let n = compute_n_t(&model, &unit_box(d), 4).unwrap();
        assert_eq!(n, 1, "unit box, d = {d}");
    }
    let model = LatticeModel::heisenberg();
    let n = compute_n_t(&model, &heis_t_prime(), 4).unwrap();
    assert_eq!(n, 1, "28-cell Heisenberg domain");
    println!("ACCEPT-06 PASS — self-covering step 1 for unit boxes (d ≤ 3) and the 28-cell domain");
}

// -- 07 ----------------------------------------------------------------------

#[test]
fn accept_07_dictionary_distance_decay_bound_and_slope() {
    let report = shared_rate_report();

    // bound clause: δ_n ≤ max{2·Ĉ_LR, 4} / 2ⁿ for every measured step
    let bound_top = (2.0 * report.c_lr_lower_bound).max(4.0);
    for row in &report.rows {
        let delta = rat_f64(&row.delta);
        let bound = bound_top / 2f64.powi(row.n as i32);
        assert!(
            delta <= bound + 1e-12,
            "n = {}: delta {delta} exceeds bound {bound}",
            row.n
        );
    }
    println!(
        "  bound clause PASS — every δ_n ≤ {bound_top}/2ⁿ (repetitivity lower bound {})",
        report.c_lr_lower_bound
    );

    // slope clause: fitted log-slope within ±15% of −log 2
    let expected = report.expected_slope;
    let slope = report.fitted_slope.expect("at least two usable rows");
    let within = (slope - expected).abs() <= 0.15 * expected.abs();

    let table: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("(n={}, r*={}, δ={})", r.n, r.r_star, rat_f64(&r.delta)))
        .collect();
    println!("  measured rows: {}", table.join(" "));
    println!(
        "  full-range fitted slope {slope:.4}, expected {expected:.4} ± {:.4}",
        0.15 * expected.abs()
    );

    // supplementary diagnostic: the decay only becomes visible to the
    // integer-radius measurement once r* clears the first few integers, so
    // also fit the tail rows alone
    let tail: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.n >= 3)
        .map(|r| (r.n as f64, rat_f64(&r.delta).ln()))
        .collect();
    if tail.len() >= 2 {
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / tail.len() as f64;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
        let num: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = tail.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        println!("  tail fit (n ≥ 3): slope {:.4}", num / den);
    }

    if !within {
        println!(
            "ACCEPT-07 FAIL — slope clause: fitted {slope:.4} not within ±15% of {expected:.4}"
        );
        panic!(
            "slope clause fails as measured: every 2×2 window of the start word is \
             legal and the small-radius dictionaries agree through n = 2, so δ_n is \
             pinned at 1 for n ≤ 2 and the integer-radius measurement only reaches \
             its asymptotic slope beyond the tested range (bound clause above holds; \
             measured table printed above)"
        );
    }
    println!("ACCEPT-07 PASS — decay bound and fitted slope both hold");
}

// -- 08 ----------------------------------------------------------------------

#[test]
fn accept_08_no_super_exponential_decay() {
    let report = shared_rate_report();
    let c = report
        .rows
        .iter()
        .map(|r| rat_f64(&r.delta) * 2f64.powi(r.n as i32))
        .fold(f64::INFINITY, f64::min);
    assert!(c > 0.0, "lower envelope constant must be positive");
    println!("ACCEPT-08 PASS — δ_n ≥ c·2⁻ⁿ with fitted c = {c}");
}

// -- 09 ----------------------------------------------------------------------

#[test]
fn accept_09_spectral_gaps_decay_along_the_approximants() {
    let rule = table_rule();
    let seed = table_seed("rb");
    let potentials = rule.alphabet().potentials().to_vec();
    assert_eq!(potentials, vec![0.0, 1.0, 2.0, 3.0]);
    let spec = OperatorSpec::laplacian(2, potentials);
    let table = spectral_convergence_table(&rule, &spec, &seed, 4, 32, 4096).unwrap();
    assert_eq!(table.max_n, 4, "chain not truncated by the matrix cap");
    assert_eq!(table.rows.len(), 4, "gap rows for n = 0..3");

    for row in &table.rows {
        assert!(row.gap.is_finite() && row.gap >= 0.0, "gap at n = {}", row.n);
        println!(
            "  n = {}: gap {:.6}, sampling error radius {:.6}",
            row.n, row.gap, row.error_radius
        );
    }

    // decay clause for n ≥ 2, after subtracting the certified sampling
    // error of each Hausdorff measurement
    let adjusted: Vec<f64> = table
        .rows
        .iter()
        .map(|r| (r.gap - r.error_radius).max(0.0))
        .collect();
    for pair in table.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.n < 2 {
            continue;
        }
        let (ga, gb) = (adjusted[a.n as usize], adjusted[b.n as usize]);
        assert!(
            gb <= 0.75 * ga + 1e-12,
            "adjusted gap ratio at n = {} -> {}: {gb} vs 0.75·{ga}",
            a.n,
            b.n
        );
        // the raw ratio is reported too: at this scale it already decays
        println!(
            "  ratio n={}→{}: raw {:.4}, error-adjusted {:.4} ≤ 0.75·{:.4}",
            a.n,
            b.n,
            b.gap / a.gap,
            gb,
            ga
        );
    }
    println!("ACCEPT-09 PASS — spectral gaps finite, decay ratio holds from n = 2 on");
}

// -- 10 ----------------------------------------------------------------------

#[test]
fn accept_10_dictionary_oracle_equivalence() {
    let rule = table_rule();
    let shape = unit_box(2);

    let iterated = legal_dictionary(&rule, &shape, 1, 4096).unwrap();
    let (direct, saturated) = expansion_dictionary(&rule, &shape, 12).unwrap();
    assert!(saturated, "direct expansion reaches a fixed window set");
    assert_eq!(iterated.windows(), direct.windows(), "two routes, one dictionary");

    let mut oracle = LegalityOracle::new(&rule, shape, 12).unwrap();
    let mut legal_count = 0usize;
    for idx in 0..256usize {
        let mut w = vec![0u8; 4];
        let mut rem = idx;
        for slot in w.iter_mut().rev() {
            *slot = (rem % 4) as u8;
            rem /= 4;
        }
        let verdict = oracle.is_legal(&w).unwrap();
        assert_eq!(verdict, iterated.contains(&w), "window {w:?}");
        legal_count += verdict as usize;
    }
    assert_eq!(legal_count, iterated.len());
    println!(
        "ACCEPT-10 PASS — iteration and direct expansion agree ({} legal of 256 windows)",
        iterated.len()
    );
}

// -- 11 ----------------------------------------------------------------------

#[test]
fn accept_11_free_laplacian_covers_its_band() {
    let model = LatticeModel::zd_blocks(&[2, 2]).unwrap();
    let spec = OperatorSpec::laplacian(2, vec![0.0]);
    let word = PeriodicConfig::constant(0);
    let approx = spectrum(&spec, &model, &word, 64).unwrap();
    let eps = approx.error_radius;
    assert!(eps > 0.0 && eps < 0.5, "certified radius is small at this grid");

    let mut samples = approx.samples.clone();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(
        (samples[0] - (-4.0)).abs() <= eps,
        "lower band edge {} within {eps}",
        samples[0]
    );
    let last = *samples.last().unwrap();
    assert!((last - 4.0).abs() <= eps, "upper band edge {last} within {eps}");
    // every point of [-4, 4] lies within eps of a sample
    let mut cursor = -4.0f64;
    for s in &samples {
        assert!(
            s - cursor <= eps,
            "gap before sample {s}: uncovered point near {cursor}"
        );
        cursor = cursor.max(s + eps);
    }
    assert!(cursor >= 4.0, "coverage reaches the upper edge");
    println!(
        "ACCEPT-11 PASS — free band [-4,4] covered within {eps:.4} by {} samples",
        samples.len()
    );
}

// -- 12 ----------------------------------------------------------------------

const CASES: usize = 10_000;

fn backends() -> Vec<(&'static str, LatticeModel)> {
    vec![
        ("z2-blocks", LatticeModel::zd_blocks(&[2, 2]).unwrap()),
        ("z3-blocks", LatticeModel::zd_blocks(&[2, 2, 2]).unwrap()),
        ("heisenberg", LatticeModel::heisenberg()),
    ]
}

/// Random lattice point with coordinates of magnitude about `scale`;
/// Heisenberg points have even coordinates.
fn random_point(rng: &mut ChaCha8Rng, model: &LatticeModel, scale: i64) -> Vec<i64> {
    (0..model.dim())
        .map(|_| {
            let c = rng.gen_range(-scale..=scale);
            if model.is_heisenberg() {
                2 * c
            } else {
                c
            }
        })
        .collect()
}

#[test]
fn accept_12_algebra_property_suites() {
    for (name, model) in backends() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
        let e = model.identity();

        // group axioms
        for _ in 0..CASES {
            let g = random_point(&mut rng, &model, 25);
            let h = random_point(&mut rng, &model, 25);
            let k = random_point(&mut rng, &model, 25);
            assert_eq!(
                model.multiply(&model.multiply(&g, &h), &k),
                model.multiply(&g, &model.multiply(&h, &k)),
                "associativity on {name}"
            );
            assert_eq!(model.multiply(&g, &e), g, "right identity on {name}");
            assert_eq!(model.multiply(&e, &g), g, "left identity on {name}");
            assert_eq!(model.multiply(&g, &model.inverse(&g)), e, "right inverse on {name}");
            assert_eq!(model.multiply(&model.inverse(&g), &g), e, "left inverse on {name}");
        }

        // dilation is a group endomorphism and scales the metric by λ₀
        let lam = Rat::new(model.lambda0() as i128, 1);
        for _ in 0..CASES {
            let g = random_point(&mut rng, &model, 25);
            let h = random_point(&mut rng, &model, 25);
            let n = rng.gen_range(1..=2u32);
            assert_eq!(
                model.dilate(n, &model.multiply(&g, &h)),
                model.multiply(&model.dilate(n, &g), &model.dilate(n, &h)),
                "dilation endomorphism on {name}"
            );
            assert_eq!(
                model.undilate(n, &model.dilate(n, &g)),
                Some(g.clone()),
                "dilation section on {name}"
            );
            let r = Rat::new(rng.gen_range(1..=200), rng.gen_range(1..=8));
            assert_eq!(
                model.metric_lt(&model.dilate(1, &g), &model.dilate(1, &h), lam * r),
                model.metric_lt(&g, &h, r),
                "metric scaling on {name}: d({g:?},{h:?}) vs {r}"
            );
        }

        // support composition: growing in two steps equals growing once
        for case in 0..CASES {
            // keep the deep combinations rare: supports grow by a factor
            // of |seed cells| per level
            let deep = case % 100 == 0;
            let (n, m) = if deep {
                *[(1u32, 1u32), (0, 2), (2, 0)].get(case / 100 % 3).unwrap()
            } else {
                *[(0u32, 0u32), (0, 1), (1, 0)].get(case % 3).unwrap()
            };
            let base: Vec<Vec<i64>> =
                (0..rng.gen_range(1..=2)).map(|_| random_point(&mut rng, &model, 4)).collect();
            let m_set = PointSet::from_points(model.dim(), base);
            let two_step = model.support(n, &model.support(m, &m_set).unwrap()).unwrap();
            let one_step = model.support(n + m, &m_set).unwrap();
            assert_eq!(two_step, one_step, "support composition on {name} (n={n}, m={m})");
        }

        // quotient decomposition round-trip, with the residue in the
        // level-n transversal
        let e_set = PointSet::from_points(model.dim(), [e.clone()]);
        for _ in 0..CASES {
            let g = random_point(&mut rng, &model, 25);
            let n = rng.gen_range(1..=3u32);
            let (gamma, x) = model.quotient_decompose(n, &g);
            assert_eq!(
                model.multiply(&model.dilate(n, &gamma), &x),
                g,
                "recomposition on {name}"
            );
            assert!(
                model.support_contains(n, &e_set, &x),
                "residue {x:?} in the level-{n} transversal on {name}"
            );
        }

        println!("  backend {name}: group, dilation/metric, support, quotient suites pass");
    }
    println!("ACCEPT-12 PASS — randomized algebra suites hold on all backends ({CASES} cases each)");
}
