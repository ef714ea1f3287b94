//! Acceptance gate: one test per numbered acceptance criterion, each at its
//! stated tolerance. The libtest summary gives the one pass/fail line per
//! criterion; run with `--nocapture` for the measured numbers.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use groupfourier::differences::{
    difference_apply, first_difference, laplace_difference, t3_second_difference,
};
use groupfourier::fourier::{
    forward, inverse, plancherel_norm, FourierCoefficients, GridFunction,
};
use groupfourier::grid::QuadratureGrid;
use groupfourier::group::{
    delta0_components, enumerate_labels, irrep_matrix, GroupElement, GroupId, IrrepLabel,
};
use groupfourier::multiplier::{
    check_class_with, check_hm, check_hm_with, class_table, hm_table, kappa, MultiplierReport,
    Verdict,
};
use groupfourier::probe::{apriori_ratio, AprioriKind};
use groupfourier::symbols::{diagonal_multiplier, symbol_of, InvariantSymbol, Symbol};
use groupfourier::zoo::{exceptional_set, invert_x_plus_c, symbol_by_name};
use groupfourier::HalfInt;
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CMat = Array2<Complex64>;

const CORPUS_SIZE: usize = 50;
const BAND: i64 = 8;

fn band() -> HalfInt {
    HalfInt::from_int(BAND)
}

/// Largest entry magnitude across all stored labels.
fn coeff_sup(c: &FourierCoefficients) -> f64 {
    c.iter()
        .flat_map(|(_, m)| m.iter().map(|v| v.norm()))
        .fold(0.0, f64::max)
}

/// Sup-norm distance between two coefficient sets over the union of labels.
fn coeff_distance(a: &FourierCoefficients, b: &FourierCoefficients) -> f64 {
    let mut worst = 0.0f64;
    for (label, m) in a.iter() {
        let other = b
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| Array2::zeros(m.dim()));
        for (x, y) in m.iter().zip(other.iter()) {
            worst = worst.max((x - y).norm());
        }
    }
    for (label, m) in b.iter() {
        if a.iter().any(|(l, _)| l == label) {
            continue;
        }
        for v in m.iter() {
            worst = worst.max(v.norm());
        }
    }
    worst
}

/// The seeded corpus shared by criteria 1 and 2.
fn corpus(group: GroupId) -> Vec<FourierCoefficients> {
    (0..CORPUS_SIZE)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(4000 + i as u64);
            FourierCoefficients::random(group, band(), &mut rng).unwrap()
        })
        .collect()
}

#[test]
fn criterion_01_fourier_round_trips_on_su2_and_t3() {
    let start = Instant::now();
    for group in [GroupId::Su2, GroupId::Torus(3)] {
        let grid = QuadratureGrid::get(group, band()).unwrap();
        for c in corpus(group) {
            let phi = inverse(&c, &grid).unwrap();
            // forward ∘ inverse on the coefficient side.
            let c_back = forward(&phi).unwrap();
            let rel = coeff_distance(&c, &c_back) / coeff_sup(&c);
            assert!(rel <= 1e-9, "{group}: coefficient round trip {rel:.3e}");
            // inverse ∘ forward on the function side.
            let phi_back = inverse(&c_back, &grid).unwrap();
            let rel2 = phi.sub(&phi_back).unwrap().l2_norm() / phi.l2_norm();
            assert!(rel2 <= 1e-9, "{group}: function round trip {rel2:.3e}");
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 1: 2x{CORPUS_SIZE} round trips in {elapsed:.2?}");
    assert!(elapsed.as_secs_f64() < 30.0, "budget exceeded: {elapsed:.2?}");
}

#[test]
fn criterion_02_plancherel_identity_on_the_corpus() {
    for group in [GroupId::Su2, GroupId::Torus(3)] {
        let grid = QuadratureGrid::get(group, band()).unwrap();
        for c in corpus(group) {
            let spectral = plancherel_norm(&c);
            let spatial = inverse(&c, &grid).unwrap().l2_norm();
            let rel = (spectral - spatial).abs() / spectral;
            assert!(rel <= 1e-9, "{group}: Plancherel gap {rel:.3e}");
        }
    }
}

#[test]
fn criterion_03_orthogonality_and_unitarity() {
    // SU(2): the forward transform of one matrix coefficient realizes its
    // inner product against every coefficient with labels ≤ B at once, so
    // one sweep checks complete pairwise orthogonality.
    let grid = QuadratureGrid::get(GroupId::Su2, band()).unwrap();
    let labels = enumerate_labels(GroupId::Su2, band()).unwrap();
    let mut worst = 0.0f64;
    for label in &labels {
        let d = label.dim();
        for i in 0..d {
            for j in 0..d {
                let l = label.clone();
                let phi = GridFunction::from_fn(Arc::clone(&grid), move |x| {
                    irrep_matrix(GroupId::Su2, &l, x).unwrap()[(i, j)]
                });
                let c = forward(&phi).unwrap();
                for (other, m) in c.iter() {
                    for ((r, s), v) in m.indexed_iter() {
                        let expected = if other == label && (r, s) == (j, i) {
                            1.0 / d as f64
                        } else {
                            0.0
                        };
                        worst = worst.max((v - expected).norm());
                    }
                }
            }
        }
    }
    println!("criterion 3: worst SU(2) orthogonality defect {worst:.3e}");
    assert!(worst <= 1e-10, "orthogonality defect {worst:.3e}");

    // SU(2) unitarity at every node of the band-8 grid.
    let mut unit = 0.0f64;
    for label in &labels {
        let d = label.dim();
        for node in 0..grid.node_count() {
            let x = grid.element(node);
            let m = irrep_matrix(GroupId::Su2, label, &x).unwrap();
            for r in 0..d {
                for s in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for t in 0..d {
                        acc += m[(r, t)] * m[(s, t)].conj();
                    }
                    let expected = if r == s { 1.0 } else { 0.0 };
                    unit = unit.max((acc - expected).norm());
                }
            }
        }
    }
    println!("criterion 3: worst SU(2) unitarity defect {unit:.3e}");
    assert!(unit <= 1e-12, "unitarity defect {unit:.3e}");

    // Torus: the grid is a uniform product, so every pair integral factors
    // into per-axis geometric sums S(d), d = k − k'. Checking all |d| ≤ 2B
    // per axis and all products covers every pair of labels ≤ B on 𝕋³.
    let t1 = QuadratureGrid::get(GroupId::Torus(1), band()).unwrap();
    let points = t1.node_count();
    let mut s = Vec::new();
    for d in -(2 * BAND)..=(2 * BAND) {
        let mut acc = Complex64::new(0.0, 0.0);
        for node in 0..points {
            let GroupElement::Torus { x } = t1.element(node) else {
                unreachable!()
            };
            let theta = -2.0 * std::f64::consts::PI * d as f64 * x[0];
            acc += Complex64::new(theta.cos(), theta.sin());
        }
        s.push(acc / points as f64);
    }
    let mut torus_worst = 0.0f64;
    for (a, sa) in s.iter().enumerate() {
        for (b, sb) in s.iter().enumerate() {
            for (c, sc) in s.iter().enumerate() {
                let expected = if (a, b, c) == (16, 16, 16) { 1.0 } else { 0.0 };
                torus_worst = torus_worst.max((sa * sb * sc - expected).norm());
            }
        }
    }
    println!("criterion 3: worst 𝕋³ orthogonality defect {torus_worst:.3e}");
    assert!(torus_worst <= 1e-10, "torus orthogonality {torus_worst:.3e}");

    // Torus unitarity: characters keep modulus one at every node.
    let t3 = QuadratureGrid::get(GroupId::Torus(3), band()).unwrap();
    let t3_labels = enumerate_labels(GroupId::Torus(3), band()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..400 {
        let label = &t3_labels[rng.gen_range(0..t3_labels.len())];
        let node = rng.gen_range(0..t3.node_count());
        let x = t3.element(node);
        let v = irrep_matrix(GroupId::Torus(3), label, &x).unwrap()[(0, 0)];
        assert!((v.norm() - 1.0).abs() <= 1e-12, "|χ| = {}", v.norm());
    }
}

fn random_exact_symbol(group: GroupId, limit: HalfInt, seed: u64) -> InvariantSymbol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = std::collections::BTreeMap::new();
    for label in enumerate_labels(group, limit).unwrap() {
        let d = label.dim();
        let m = Array2::from_shape_fn((d, d), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        entries.insert(label, m);
    }
    InvariantSymbol::from_entries(group, limit, entries, true).unwrap()
}

fn assert_bits_eq(a: &CMat, b: &CMat, what: &str) {
    assert_eq!(a.dim(), b.dim(), "{what}: shape");
    for (x, y) in a.iter().zip(b.iter()) {
        assert!(
            x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits(),
            "{what}: {x} vs {y}"
        );
    }
}

#[test]
fn criterion_04_torus_difference_closed_forms() {
    let group = GroupId::Torus(2);
    let limit = HalfInt::from_int(5);
    let sigma = random_exact_symbol(group, limit, 21);
    let out_limit = limit + HalfInt::ONE;

    for component in delta0_components(group) {
        let lib = first_difference(&component, &sigma).unwrap();
        let IrrepLabel::Torus { k: kappa_vec } = &component.0 else {
            unreachable!()
        };
        // Index-shift oracle, replicated operation for operation.
        for label in enumerate_labels(group, out_limit).unwrap() {
            let IrrepLabel::Torus { k } = &label else { unreachable!() };
            let shifted: Vec<i64> = k.iter().zip(kappa_vec).map(|(a, b)| a - b).collect();
            let expected =
                &sigma.entry_or_zero(&IrrepLabel::torus(shifted)) - &sigma.entry_or_zero(&label);
            assert_bits_eq(&lib.entry_or_zero(&label), &expected, "first_difference");
        }

        // The same difference through the generic quadrature route with the
        // character factor q = χ_κ − 1: exact up to machine roundoff.
        let q_grid = QuadratureGrid::get(group, HalfInt::ONE).unwrap();
        let q_label = component.0.clone();
        let q = GridFunction::from_fn(Arc::clone(&q_grid), move |x| {
            irrep_matrix(group, &q_label, x).unwrap()[(0, 0)] - 1.0
        });
        let via_q = difference_apply(&q, &sigma, 1).unwrap();
        let mut worst = 0.0f64;
        for label in enumerate_labels(group, out_limit).unwrap() {
            let a = via_q.entry_or_zero(&label);
            let b = lib.entry_or_zero(&label);
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).norm());
            }
        }
        assert!(worst <= 1e-13, "difference_apply deviates by {worst:.3e}");
    }

    // Laplace difference: the literal closed form, replicated bit for bit.
    let lap = laplace_difference(&sigma).unwrap();
    for label in enumerate_labels(group, out_limit).unwrap() {
        let IrrepLabel::Torus { k } = &label else { unreachable!() };
        let mut value = sigma.entry_or_zero(&label).mapv(|v| v * 4.0);
        for axis in 0..2 {
            for sign in [1i64, -1] {
                let mut shifted = k.clone();
                shifted[axis] += sign;
                value = &value - &sigma.entry_or_zero(&IrrepLabel::torus(shifted));
            }
        }
        assert_bits_eq(&lap.entry_or_zero(&label), &value, "laplace_difference");
    }

    // 𝕋³: the dedicated second difference is the Laplace combination over
    // six, exactly, and matches the direct σ − (1/6)Σ σ(k ± e_j) form.
    let t3_sigma = random_exact_symbol(GroupId::Torus(3), HalfInt::from_int(2), 22);
    let second = t3_second_difference(&t3_sigma).unwrap();
    let lap3 = laplace_difference(&t3_sigma)
        .unwrap()
        .scale(Complex64::new(1.0 / 6.0, 0.0));
    for label in enumerate_labels(GroupId::Torus(3), HalfInt::from_int(3)).unwrap() {
        assert_bits_eq(
            &second.entry_or_zero(&label),
            &lap3.entry_or_zero(&label),
            "t3_second_difference",
        );
        let IrrepLabel::Torus { k } = &label else { unreachable!() };
        let mut shift_sum: CMat = Array2::zeros(second.entry_or_zero(&label).dim());
        for axis in 0..3 {
            for sign in [1i64, -1] {
                let mut shifted = k.clone();
                shifted[axis] += sign;
                shift_sum = &shift_sum + &t3_sigma.entry_or_zero(&IrrepLabel::torus(shifted));
            }
        }
        let direct = &t3_sigma.entry_or_zero(&label) - &shift_sum.mapv(|v| v / 6.0);
        let diff = (&second.entry_or_zero(&label) - &direct)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-15, "direct form deviates by {diff:.3e}");
    }
}

#[test]
fn criterion_05_kappa_values() {
    assert_eq!(kappa(1), 2);
    assert_eq!(kappa(3), 2);
    assert_eq!(kappa(8), 6);
}

#[test]
fn criterion_06_exceptional_set_and_inversion() {
    // 𝒞 for X = D₃ is the half-integer imaginary lattice, exactly.
    let set = exceptional_set(3, 4.0).unwrap();
    let expected: Vec<Complex64> = (-8..=8)
        .map(|k| Complex64::new(0.0, k as f64 * 0.5))
        .collect();
    assert_eq!(set.members.len(), expected.len());
    for (got, want) in set.members.iter().zip(&expected) {
        assert!(
            got.re == want.re && got.im == want.im,
            "lattice point {got} != {want}"
        );
    }

    // c = 1 is regular: (X + 1)∘inverse is the identity on band-8 inputs.
    let inv = invert_x_plus_c(3, Complex64::new(1.0, 0.0), band()).unwrap();
    let xc = diagonal_multiplier(GroupId::Su2, band(), |_, m| {
        Complex64::new(1.0, m.to_f64())
    })
    .unwrap();
    let grid = QuadratureGrid::get(GroupId::Su2, band()).unwrap();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let c = FourierCoefficients::random(GroupId::Su2, band(), &mut rng).unwrap();
        let phi = inverse(&c, &grid).unwrap();
        let back = xc.op_apply(&inv.op_apply(&phi).unwrap()).unwrap();
        let rel = phi.sub(&back).unwrap().l2_norm() / phi.l2_norm();
        assert!(rel <= 1e-9, "(X+1)∘inverse deviates by {rel:.3e}");
    }
}

/// Constants keyed by condition id, skipping numerically-zero rows.
fn constants_of(report: &MultiplierReport) -> Vec<(String, f64)> {
    let base = report.conditions[0].constant;
    report
        .conditions
        .iter()
        .filter(|c| c.constant > 1e-10 * base)
        .map(|c| (c.id.clone(), c.constant))
        .collect()
}

fn max_drift(from: &MultiplierReport, to: &MultiplierReport) -> f64 {
    let mut worst = 0.0f64;
    for (id, c_to) in constants_of(to) {
        if let Some(c_from) = from.condition(&id).map(|c| c.constant) {
            if c_from > 1e-10 * from.conditions[0].constant {
                worst = worst.max((c_to - c_from).abs() / c_from);
            }
        }
    }
    worst
}

#[test]
fn criterion_07_parametrix_class_stability() {
    let start = Instant::now();
    let support = HalfInt::from_int(34);
    let sigma = symbol_by_name(GroupId::Su2, "sublaplacian-parametrix", support).unwrap();
    // The difference pass is what costs; share it across cutoffs and ρ's.
    let table = class_table(&sigma, 2, HalfInt::from_int(32)).unwrap();

    let reports: Vec<MultiplierReport> = [8, 16, 32]
        .into_iter()
        .map(|c| check_class_with(&table, -1.0, 0.5, HalfInt::from_int(c), None).unwrap())
        .collect();
    for report in &reports {
        for cond in &report.conditions {
            assert!(cond.constant.is_finite(), "{}: not finite", cond.id);
        }
    }
    let drift = max_drift(&reports[1], &reports[2]);
    println!(
        "criterion 7: (m,ρ)=(−1,½) drift 16→32 is {:.2}%",
        drift * 100.0
    );
    assert!(drift < 0.10, "constants moved {:.2}% between 16 and 32", drift * 100.0);

    // Negative control: demanding a full order of decay per difference
    // (ρ = 1) overshoots the parametrix's half-order gain, so the weighted
    // constants keep growing with the cutoff.
    let wrong: Vec<MultiplierReport> = [16, 32]
        .into_iter()
        .map(|c| check_class_with(&table, -1.0, 1.0, HalfInt::from_int(c), None).unwrap())
        .collect();
    let growth = max_drift(&wrong[0], &wrong[1]);
    println!("criterion 7: ρ=1 growth 16→32 is {:.2}%", growth * 100.0);
    assert!(growth > 0.50, "expected >50% growth, saw {:.2}%", growth * 100.0);

    let elapsed = start.elapsed();
    println!("criterion 7: finished in {elapsed:.2?}");
    assert!(elapsed.as_secs_f64() < 300.0, "budget exceeded: {elapsed:.2?}");
}

#[test]
fn criterion_08_hm_checker_identity_riesz_and_growth() {
    // Identity: passes, and every difference constant is numerically zero.
    let identity = symbol_by_name(GroupId::Su2, "identity", HalfInt::from_int(10)).unwrap();
    let report = check_hm(&identity, HalfInt::from_int(8), None).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    for cond in report.conditions.iter().skip(1) {
        assert!(cond.constant <= 1e-10, "{}: {:.3e}", cond.id, cond.constant);
    }

    // Riesz-type symbol diag(i·m/⟨ξ⟩): order zero, stable across cutoffs.
    let riesz = diagonal_multiplier(GroupId::Su2, HalfInt::from_int(34), |label, m| {
        Complex64::new(0.0, m.to_f64() / label.weight())
    })
    .unwrap();
    let table = hm_table(&riesz, HalfInt::from_int(32)).unwrap();
    let reports: Vec<MultiplierReport> = [8, 16, 32]
        .into_iter()
        .map(|c| check_hm_with(&table, HalfInt::from_int(c), None).unwrap())
        .collect();
    for r in &reports {
        assert!(r.verdict != Verdict::Fail, "Riesz symbol must not fail");
    }
    let d1 = max_drift(&reports[0], &reports[1]);
    let d2 = max_drift(&reports[1], &reports[2]);
    println!(
        "criterion 8: Riesz drift 8→16 {:.2}%, 16→32 {:.2}%",
        d1 * 100.0,
        d2 * 100.0
    );
    assert!(d1 < 0.10 && d2 < 0.10, "Riesz constants unstable");

    // Linear growth defeats a fixed cap once the cutoff reaches it.
    let d3 = symbol_by_name(GroupId::Su2, "d3", HalfInt::from_int(34)).unwrap();
    let fails = check_hm(&d3, HalfInt::from_int(32), Some(20.0)).unwrap();
    assert_eq!(fails.verdict, Verdict::Fail);
    let zeroth = fails.conditions[0].constant;
    assert!(zeroth > 31.0, "zeroth constant should track the cutoff: {zeroth}");
}

#[test]
fn criterion_09_subelliptic_probe_matches_the_diagonal_oracle() {
    let bands: Vec<HalfInt> = [8, 16, 32].into_iter().map(HalfInt::from_int).collect();
    let result = apriori_ratio(AprioriKind::SubElliptic, 2.0, &bands, 4, 0).unwrap();
    assert_eq!(result.method, "exact-enumeration");

    for (limit, stat) in bands.iter().zip(&result.statistics) {
        // Diagonal oracle: max over 0 < l ≤ B, |m| ≤ l of
        // √(1 + l(l+1)) / (l(l+1) − m²).
        let mut oracle = 0.0f64;
        for two_l in 1..=limit.twice() {
            let lam_sq = (two_l * (two_l + 2)) as f64 / 4.0;
            let mut two_m = -two_l;
            while two_m <= two_l {
                let m_sq = (two_m * two_m) as f64 / 4.0;
                oracle = oracle.max((1.0 + lam_sq).sqrt() / (lam_sq - m_sq));
                two_m += 2;
            }
        }
        assert!(
            (stat - oracle).abs() <= 1e-12,
            "band {limit}: probe {stat} vs oracle {oracle}"
        );
    }

    // Nonincreasing to stable across the ladder.
    let s = &result.statistics;
    for w in s.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "statistic increased: {w:?}");
    }
    assert!((s[s.len() - 1] - s[s.len() - 2]).abs() <= 1e-12, "not stable: {s:?}");
}

#[test]
fn criterion_10_quantization_round_trip_and_named_symbols() {
    // symbol_of ∘ op_apply recovers 25 random symbols.
    let cases: Vec<(GroupId, HalfInt)> = (0..25)
        .map(|i| {
            if i % 2 == 0 {
                (GroupId::Su2, HalfInt::from_twice(2 + (i as i64 % 5)))
            } else {
                (GroupId::Torus(2), HalfInt::from_int(2 + (i as i64 % 3)))
            }
        })
        .collect();
    for (case, (group, limit)) in cases.into_iter().enumerate() {
        let sigma = random_exact_symbol(group, limit, 9000 + case as u64);
        let grid = QuadratureGrid::get(group, limit).unwrap();
        let labels = enumerate_labels(group, limit).unwrap();
        let recovered = symbol_of(&grid, &labels, |phi| sigma.op_apply(phi)).unwrap();
        let Symbol::Invariant(rec) = recovered else {
            panic!("case {case}: a left-invariant operator probed as x-dependent");
        };
        let mut worst = 0.0f64;
        for label in &labels {
            let a = rec.entry_or_zero(label);
            let b = sigma.entry_or_zero(label);
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).norm());
            }
        }
        assert!(worst <= 1e-9, "case {case} ({group}, {limit}): {worst:.3e}");
    }

    // Named formulas match what probing their grid realization returns.
    let limit = HalfInt::from_int(4);
    let grid = QuadratureGrid::get(GroupId::Su2, limit).unwrap();
    let labels = enumerate_labels(GroupId::Su2, limit).unwrap();
    for name in ["d3", "laplacian", "sublaplacian", "heat"] {
        let sigma = symbol_by_name(GroupId::Su2, name, limit).unwrap();
        let probed = symbol_of(&grid, &labels, |phi| sigma.op_apply(phi)).unwrap();
        let Symbol::Invariant(rec) = probed else {
            panic!("{name}: invariant operator probed as x-dependent");
        };
        let mut worst = 0.0f64;
        for label in &labels {
            let a = rec.entry_or_zero(label);
            let b = sigma.entry_or_zero(label);
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).norm());
            }
        }
        assert!(worst <= 1e-9, "{name}: probed symbol deviates by {worst:.3e}");
    }
}

#[test]
fn criterion_11_csv_reports_identical_across_thread_counts() {
    let scenarios: Vec<(Vec<&str>, &str)> = vec![
        (
            vec![
                "check", "class", "--zoo", "sublaplacian-parametrix", "--m", "-1",
                "--rho", "0.5", "--cutoffs", "4,8", "--seed", "0",
            ],
            "report_8.csv",
        ),
        (
            vec![
                "probe", "apriori", "--kind", "subelliptic", "--p", "2",
                "--bands", "4,8", "--trials", "8", "--seed", "0",
            ],
            "probe.csv",
        ),
    ];
    for (args, artifact) in scenarios {
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        for threads in ["1", "4"] {
            let tmp = tempfile::TempDir::new().unwrap();
            let out = Command::new(env!("CARGO_BIN_EXE_groupfourier"))
                .current_dir(tmp.path())
                .env("NONCOMM_FOURIER_THREADS", threads)
                .args(&args)
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{args:?} [{threads} threads]: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push(std::fs::read(tmp.path().join(artifact)).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{artifact} differs between thread counts");
    }
}
