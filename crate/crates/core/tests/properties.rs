//! Property suites over random fields, parameters and inputs.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use spinsim::config::SimConfig;
use spinsim::dynamics::{
    build_rate_matrix, integrate_rk4, steady_pl, steady_state, RateMatrix, RateParameters, Rk4Options,
};
use spinsim::estimators::{hyperfine, AtomicTable, OrbitalComposition};
use spinsim::photonstats::{
    compute_g2, correct_value, poisson_stream, tags, uncorrect_value, BackgroundRatio, DelayWindow, G2Binning,
    TimeTagRecord,
};
use spinsim::spin::{
    eigensystem, quartet_hamiltonian, triplet_hamiltonian, FieldVector, SpinEigensystem, ZeroFieldSplitting,
};
use spinsim::symmetry::{all_level_diagrams, irrep_product, Irrep, LevelDiagram};

fn triplet(e_over_d: f64, field: FieldVector) -> SpinEigensystem {
    eigensystem(&triplet_hamiltonian(&ZeroFieldSplitting::from_ratio(e_over_d).unwrap(), &field).unwrap()).unwrap()
}

fn params() -> impl Strategy<Value = RateParameters> {
    (0.05..1.0f64, 200.0..1500.0f64, 0.5..50.0f64, 0.05..3.0f64, 5.0..500.0f64, 0.0..0.2f64)
        .prop_map(|(x, gs, i1, i2, t1, eps)| RateParameters::with_saturation(x, gs, i1, i2, t1, eps).unwrap())
}

fn diagram() -> impl Strategy<Value = LevelDiagram> {
    let all = all_level_diagrams();
    (0..all.len()).prop_map(move |k| all[k].clone())
}

fn pl(d: &LevelDiagram, p: &RateParameters, e_over_d: f64, field: FieldVector) -> f64 {
    let r = build_rate_matrix(d, p, &triplet(e_over_d, field)).unwrap();
    steady_pl(&r, &steady_state(&r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triplet_projections_periodic_and_reflective(b in 0.0..3.0f64, phi in 0.0..(2.0 * PI), e in -0.5..0.5f64) {
        let p0 = triplet(e, FieldVector::in_plane(b, phi).unwrap());
        let p180 = triplet(e, FieldVector::in_plane(b, phi + PI).unwrap());
        let pm = triplet(e, FieldVector::in_plane(b, -phi).unwrap());
        prop_assert!((p0.projections() - p180.projections()).amax() <= 1e-10);
        prop_assert!((p0.projections() - pm.projections()).amax() <= 1e-10);
        for j in 0..3 {
            prop_assert!((p0.projections().column(j).sum() - 1.0).abs() <= 1e-10);
        }
        prop_assert!(p0.eigenvalues().iter().sum::<f64>().abs() <= 1e-10);
    }

    #[test]
    fn quartet_eigenvalues_half_turn_periodic(b in 0.0..3.0f64, phi in 0.0..(2.0 * PI), e in -0.5..0.5f64) {
        let zfs = ZeroFieldSplitting::from_ratio(e).unwrap();
        let a = eigensystem(&quartet_hamiltonian(&zfs, &FieldVector::in_plane(b, phi).unwrap()).unwrap()).unwrap();
        let c = eigensystem(&quartet_hamiltonian(&zfs, &FieldVector::in_plane(b, phi + PI).unwrap()).unwrap()).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(c.eigenvalues()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn rate_matrix_conserves_population(d in diagram(), p in params(), b in 0.0..3.0f64, phi in 0.0..(2.0 * PI), bz in -1.0..1.0f64) {
        let r = build_rate_matrix(&d, &p, &triplet(-0.33, FieldVector::new(b, phi, bz).unwrap())).unwrap();
        prop_assert!(r.column_sum_residual() <= 1e-12 * r.matrix().amax());
        let x = steady_state(&r).unwrap();
        prop_assert!((x.sum() - 1.0).abs() <= 1e-12);
        prop_assert!(x.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn steady_pl_half_turn_and_mirror(d in diagram(), p in params(), b in 0.0..3.0f64, phi in 0.0..(2.0 * PI), e in -0.5..0.5f64) {
        let base = pl(&d, &p, e, FieldVector::in_plane(b, phi).unwrap());
        let turned = pl(&d, &p, e, FieldVector::in_plane(b, phi + PI).unwrap());
        let mirrored = pl(&d, &p, e, FieldVector::in_plane(b, -phi).unwrap());
        prop_assert!((turned - base).abs() <= 1e-9 * base);
        prop_assert!((mirrored - base).abs() <= 1e-9 * base);
    }

    #[test]
    fn steady_pl_is_homogeneous_in_rates(d in diagram(), p in params(), lambda in 0.01..100.0f64, b in 0.0..2.0f64, phi in 0.0..PI) {
        let r = build_rate_matrix(&d, &p, &triplet(-0.33, FieldVector::in_plane(b, phi).unwrap())).unwrap();
        let s = r.scaled(lambda);
        let pl_r = steady_pl(&r, &steady_state(&r).unwrap());
        let pl_s = steady_pl(&s, &steady_state(&s).unwrap());
        prop_assert!((pl_s - lambda * pl_r).abs() <= 1e-9 * lambda * pl_r);
    }

    #[test]
    fn gauss_round_trip(bx in -1e4..1e4f64, by in -1e4..1e4f64, bz in -1e4..1e4f64, d_mhz in 100.0..1e4f64) {
        let f = FieldVector::from_gauss_default_g([bx, by, bz], d_mhz).unwrap();
        let back = f.to_gauss(2.0, d_mhz);
        for (a, b) in back.iter().zip([bx, by, bz]) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn background_round_trip(g in -1.0..10.0f64, rho in 0.01..=1.0f64) {
        let rho = BackgroundRatio::new(rho).unwrap();
        prop_assert!((uncorrect_value(correct_value(g, rho), rho) - g).abs() <= 1e-12 * g.abs().max(1.0));
    }

    #[test]
    fn hyperfine_linear_in_eta(eta in 1e-3..=1.0f64, cs2 in 0.0..=1.0f64, n in 0usize..2) {
        let table = AtomicTable::builtin();
        let sp = table.get(["B11", "N14"][n]).unwrap();
        let full = hyperfine(sp, &OrbitalComposition::new(cs2, 1.0 - cs2, 1.0).unwrap()).unwrap();
        let part = hyperfine(sp, &OrbitalComposition::new(cs2, 1.0 - cs2, eta).unwrap()).unwrap();
        for (a, b) in [(full.f, part.f), (full.d, part.d), (full.a_par, part.a_par), (full.a_perp, part.a_perp)] {
            prop_assert!((eta * a - b).abs() <= 1e-12 * a.abs().max(1e-9));
        }
    }

    #[test]
    fn tag_files_round_trip(raw in proptest::collection::vec((0u8..2, 0u64..u64::MAX / 2), 0..200)) {
        let mut records: Vec<TimeTagRecord> = raw.into_iter().map(|(c, t)| TimeTagRecord::new(c, t).unwrap()).collect();
        records.sort_by_key(|r| (r.timestamp, r.channel));
        let mut bin = Vec::new();
        tags::write_binary(&mut bin, &records).unwrap();
        prop_assert_eq!(&tags::read_binary(bin.as_slice()).unwrap(), &records);
        let mut csv = Vec::new();
        tags::write_csv(&mut csv, &records).unwrap();
        prop_assert_eq!(&tags::read_csv(csv.as_slice()).unwrap(), &records);
    }

    #[test]
    fn config_json_round_trip(e in -1.0..1.0f64, t1 in proptest::option::of(0.1..1e4f64), gs in 1.0..1e4f64, ge in 1.0..1e4f64,
                              i1 in 0.01..100.0f64, i2 in 0.01..10.0f64, eps in 0.0..0.33f64, k in 0usize..14) {
        let d = &all_level_diagrams()[k];
        let mut cfg = SimConfig::singlet_reference();
        cfg.ground = d.ground_spin;
        cfg.diagram = d.id.to_string().split_once('-').unwrap().1.to_string();
        cfg.e_over_d = e;
        cfg.t1_us = t1;
        cfg.gamma_s_mhz = gs;
        cfg.gamma_e_mhz = ge;
        cfg.gamma_isc1_mhz = i1;
        cfg.gamma_isc2_mhz = i2;
        cfg.epsilon = eps;
        let text = cfg.to_json().unwrap();
        let back = SimConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}

#[test]
fn quartet_eigenvectors_need_a_full_turn() {
    let zfs = ZeroFieldSplitting::from_ratio(0.2).unwrap();
    let vecs = |phi: f64| {
        eigensystem(&quartet_hamiltonian(&zfs, &FieldVector::in_plane(0.5, phi).unwrap()).unwrap())
            .unwrap()
            .eigenvectors()
            .clone()
    };
    let mut largest: f64 = 0.0;
    for k in 0..36 {
        let phi = 2.0 * PI * k as f64 / 36.0;
        let (a, b, full) = (vecs(phi), vecs(phi + PI), vecs(phi + 2.0 * PI));
        for j in 0..4 {
            // align the global phase of each column before comparing
            let align = |u: &DVector<Complex64>, v: &DVector<Complex64>| {
                let ov = v.dotc(u);
                let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
                (u - v * ph).norm()
            };
            let (va, vb, vf) = (a.column(j).into_owned(), b.column(j).into_owned(), full.column(j).into_owned());
            largest = largest.max(align(&va, &vb));
            assert!(align(&va, &vf) < 1e-8, "eigenvectors must be 360° periodic");
        }
    }
    assert!(largest > 1e-3, "largest half-turn difference {largest}");
}

#[test]
fn klein_four_products() {
    let g = Irrep::SINGLE_GROUP;
    for a in g {
        assert_eq!(irrep_product(a, a).unwrap(), Irrep::A1);
        for b in g {
            assert_eq!(irrep_product(a, b).unwrap(), irrep_product(b, a).unwrap());
            for c in g {
                let left = irrep_product(irrep_product(a, b).unwrap(), c).unwrap();
                let right = irrep_product(a, irrep_product(b, c).unwrap()).unwrap();
                assert_eq!(left, right);
            }
        }
    }
}

#[test]
fn selection_vectors_are_normalised() {
    for d in all_level_diagrams() {
        for v in [d.m_prime, d.m_vec] {
            assert!((v.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12, "{}", d.id);
        }
    }
}

#[test]
fn singlet_pl_ignores_out_of_plane_field() {
    let cfg = SimConfig::singlet_reference();
    let pl0 = {
        let r = cfg.rate_matrix(&FieldVector::zero()).unwrap();
        steady_pl(&r, &steady_state(&r).unwrap())
    };
    for bz in [0.01, 0.3, 1.0, 7.0, 40.0] {
        let r = cfg.rate_matrix(&FieldVector::along_z(bz).unwrap()).unwrap();
        let pl = steady_pl(&r, &steady_state(&r).unwrap());
        assert!((pl - pl0).abs() <= 1e-9 * pl0, "bz={bz}: {pl} vs {pl0}");
    }
}

fn total_population_drift(r: &RateMatrix) -> f64 {
    let mut x0 = DVector::zeros(r.dim());
    x0[0] = 1.0;
    let times: Vec<f64> = (0..=70).map(|k| 1e-3 * 10f64.powf(k as f64 / 10.0)).collect();
    integrate_rk4(r, &x0, &times, &Rk4Options::default())
        .unwrap()
        .iter()
        .map(|x| (x.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

#[test]
fn integration_conserves_total_population() {
    for cfg in [SimConfig::singlet_reference(), SimConfig::triplet_reference()] {
        let r = cfg.rate_matrix(&FieldVector::in_plane(0.7, 0.3).unwrap()).unwrap();
        let drift = total_population_drift(&r);
        assert!(drift <= 1e-9, "{}: drift {drift:.2e}", cfg.diagram);
    }
}

#[test]
fn correlator_is_rate_invariant() {
    let window = DelayWindow::new(0.0, 2e-5).unwrap();
    let binning = G2Binning::Linear { width: 1e-6 };
    let mut means = Vec::new();
    for (k, rate) in [2e4, 4e4].into_iter().enumerate() {
        let stream = poisson_stream([rate, rate], 2.0, 100 + k as u64).unwrap();
        let h = compute_g2(&stream, &binning, &window).unwrap();
        let mean = h.values.iter().sum::<f64>() / h.len() as f64;
        let expected_sigma = 1.0 / (h.total_counts() as f64).sqrt();
        assert!((mean - 1.0).abs() < 5.0 * expected_sigma, "rate {rate}: mean {mean}");
        means.push(mean);
    }
    assert!((means[0] - means[1]).abs() < 0.02);
}
