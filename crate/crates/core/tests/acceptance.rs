//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use spinsim::cli::sweep::{g2_sweep, G2SweepSpec};
use spinsim::config::SimConfig;
use spinsim::dynamics::{
    build_rate_matrix, default_delays, odmr_linewidth_floor, odmr_pl_variation, simulate_g2, simulate_g2_from,
    steady_pl, steady_state, G2Method, G2Options, RateParameters,
};
use spinsim::estimators::{estimate_zfs, hyperfine, AtomicTable, GeometryParams, OrbitalComposition};
use spinsim::photonstats::{
    background_correct_amplitudes, background_correct_curve, background_uncorrect_curve, compute_g2, correct_value,
    empirical_model_bin, estimate_rates_three_level, fit_empirical, monte_carlo_run, tags, uncorrect_value,
    BackgroundRatio, DelayWindow, G2Binning, G2Histogram,
};
use spinsim::spin::{eigensystem, quartet_hamiltonian, triplet_hamiltonian, FieldVector, ZeroFieldSplitting};
use spinsim::symmetry::{all_level_diagrams, enumerate_level_diagrams, DiagramClass, GroundSpin, LevelDiagram};

/// Label, raw amplitudes and corrected amplitudes, each as (value, rounding half-width).
type AmplitudeRow = (&'static str, Vec<(f64, f64)>, Vec<(f64, f64)>);
type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn c01_rate_inversion() -> Outcome {
    let t = Instant::now();
    let r = estimate_rates_three_level(1.1e-9, 1.4e-6, 5.4, 0.5).unwrap();
    let dt = t.elapsed();
    let pass = (r.gamma_s - 606.0).abs() <= 6.0
        && (r.gamma_isc1 - 1.81).abs() <= 0.02
        && (r.gamma_isc2 - 0.112).abs() <= 0.001
        && dt < Duration::from_millis(1);
    outcome(pass, format!("Γs={:.2} Γisc1={:.4} Γisc2={:.5} MHz in {dt:?}", r.gamma_s, r.gamma_isc1, r.gamma_isc2))
}

fn c02_zfs() -> Outcome {
    let z = estimate_zfs(&GeometryParams::new(2.18, 1.26, 0.0).unwrap()).unwrap();
    let pass = (-6.5..=-5.7).contains(&z.d) && (-1.35..=-1.05).contains(&z.e);
    outcome(pass, format!("D={:.3} GHz E={:.3} GHz", z.d, z.e))
}

fn c03_hyperfine() -> Outcome {
    let table = AtomicTable::builtin();
    let published = [
        ("B11", "pi", 64.0, -127.0),
        ("N14", "pi", 56.0, -111.0),
        ("B11", "sigma", 891.0, 764.0),
        ("N14", "sigma", 641.0, 530.0),
    ];
    let mut worst: f64 = 0.0;
    let mut pi_exact = true;
    for (species, orbital, a_par, a_perp) in published {
        let h = hyperfine(table.get(species).unwrap(), &OrbitalComposition::named(orbital, 1.0).unwrap()).unwrap();
        worst = worst.max((h.a_par - a_par).abs()).max((h.a_perp - a_perp).abs());
        if orbital == "pi" {
            for eta in [1.0, 0.37, 0.05] {
                let h = hyperfine(table.get(species).unwrap(), &OrbitalComposition::pi(eta).unwrap()).unwrap();
                pi_exact &= h.a_perp == -2.0 * h.a_par;
            }
        }
    }
    outcome(worst <= 1.0 && pi_exact, format!("max |Δ| = {worst:.3} MHz over 8 values, π identity exact: {pi_exact}"))
}

fn c04_quartet() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d: f64 = rng.random_range(-5.0..5.0);
        let d = if d.abs() < 1e-3 { 1.0 } else { d };
        let e: f64 = rng.random_range(-2.0..2.0);
        let eig =
            eigensystem(&quartet_hamiltonian(&ZeroFieldSplitting::new(d, e).unwrap(), &FieldVector::zero()).unwrap())
                .unwrap();
        let s = (d * d + 3.0 * e * e).sqrt();
        let expected = [-s, -s, s, s];
        for (got, want) in eig.eigenvalues().iter().zip(expected) {
            worst = worst.max((got - want).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max |λ ∓ √(D²+3E²)| = {worst:.2e} over 100 draws"))
}

fn c05_enumeration() -> Outcome {
    let singlet = enumerate_level_diagrams(GroundSpin::Singlet);
    let triplet = enumerate_level_diagrams(GroundSpin::Triplet);
    let expected_main = |letter: char| match letter {
        'a' => Some(DiagramClass::I),
        'b' | 'd' => Some(DiagramClass::II),
        'c' | 'e' | 'f' => Some(DiagramClass::III),
        'g' | 'h' => Some(DiagramClass::IV),
        _ => None,
    };
    let mut mismatches = Vec::new();
    for d in all_level_diagrams().iter().filter(|d| d.ground_spin == GroundSpin::Triplet) {
        let want = if d.id.variant == 1 { expected_main(d.id.letter) } else { Some(DiagramClass::V) };
        if want != Some(d.class) {
            mismatches.push(format!("{}={}", d.id, d.class));
        }
    }
    let variants = all_level_diagrams().iter().filter(|d| d.id.variant > 1).count();
    let pass = singlet.len() == 2 && triplet.len() == 8 && mismatches.is_empty() && variants > 0;
    outcome(
        pass,
        format!(
            "{} singlet-GS, {} triplet-GS, {variants} alternate variants, class mismatches: {mismatches:?}",
            singlet.len(),
            triplet.len()
        ),
    )
}

fn pl_at(cfg: &SimConfig, field: &FieldVector) -> f64 {
    let r = cfg.rate_matrix(field).unwrap();
    steady_pl(&r, &steady_state(&r).unwrap())
}

fn c06_pl_symmetry() -> Outcome {
    let t = Instant::now();
    let cfg = SimConfig::singlet_reference();
    let pl0 = pl_at(&cfg, &FieldVector::zero());
    let z_dev = [0.1, 0.5, 1.0, 3.0, 10.0]
        .iter()
        .map(|&bz| rel(pl_at(&cfg, &FieldVector::along_z(bz).unwrap()), pl0))
        .fold(0.0, f64::max);
    let n = 360;
    let pl: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| pl_at(&cfg, &FieldVector::in_plane(0.5, 2.0 * PI * k as f64 / n as f64).unwrap()))
        .collect();
    let sym180 = (0..n).map(|k| rel(pl[(k + n / 2) % n], pl[k])).fold(0.0, f64::max);
    let reflect = (0..n).map(|k| rel(pl[(n - k) % n], pl[k])).fold(0.0, f64::max);
    let (lo, hi) = pl.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let dev90 = (0..n).map(|k| (pl[k] - pl[(k + n / 4) % n]).abs()).fold(0.0, f64::max) / (hi - lo);
    let dt = t.elapsed();
    let pass = z_dev <= 1e-9 && sym180 <= 1e-9 && reflect <= 1e-9 && dev90 < 0.15 && dt < Duration::from_secs(10);
    outcome(
        pass,
        format!("z-field {z_dev:.1e}, 180° {sym180:.1e}, reflection {reflect:.1e}, 90° deviation {dev90:.4}, {dt:.2?}"),
    )
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn c07_bunching_sweep() -> Outcome {
    let phis: Vec<f64> = (0..16).map(|k| (90.0 * k as f64 / 15.0).to_radians()).collect();
    let mut spreads = Vec::new();
    let mut rhos = Vec::new();
    for cfg in [SimConfig::singlet_reference(), SimConfig::triplet_reference()] {
        let spec = G2SweepSpec {
            config: cfg,
            b: 0.5,
            phis: phis.clone(),
            delays: default_delays(),
            method: G2Method::Auto,
            steady_start: false,
            orders: vec![2],
        };
        let pts = g2_sweep(&spec).unwrap();
        let tau2: Vec<f64> = pts.iter().map(|p| p.fit.as_ref().unwrap().tau[1]).collect();
        let c2: Vec<f64> = pts.iter().map(|p| p.fit.as_ref().unwrap().c[1]).collect();
        let pl: Vec<f64> = pts.iter().map(|p| p.pl).collect();
        let (lo, hi) = tau2.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        spreads.push((hi - lo) / (tau2.iter().sum::<f64>() / tau2.len() as f64));
        rhos.push(spearman(&c2, &pl));
    }
    let pass = spreads[0] < spreads[1] && rhos.iter().all(|&r| r < -0.8);
    outcome(
        pass,
        format!(
            "τ₂ relative spread singlet {:.3} vs triplet {:.3}; Spearman(C₂, PL) singlet {:.3}, triplet {:.3}",
            spreads[0], spreads[1], rhos[0], rhos[1]
        ),
    )
}

fn c08_eigen_vs_rk4() -> Outcome {
    let diagrams: Vec<LevelDiagram> = all_level_diagrams();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases: Vec<(LevelDiagram, RateParameters, FieldVector, f64)> = (0..20)
        .map(|_| {
            let d = diagrams[rng.random_range(0..diagrams.len())].clone();
            let gamma_s = rng.random_range(300.0..1500.0);
            let params = RateParameters::with_saturation(
                rng.random_range(0.05..1.0),
                gamma_s,
                rng.random_range(1.0..50.0),
                rng.random_range(0.1..2.0),
                rng.random_range(10.0..200.0),
                rng.random_range(0.0..0.1),
            )
            .unwrap();
            let field = FieldVector::new(
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(-0.5..0.5),
            )
            .unwrap();
            (d, params, field, rng.random_range(-0.33..0.33))
        })
        .collect();
    let delays: Vec<f64> = (0..200).map(|k| 1e-9 * 10f64.powf(7.0 * k as f64 / 199.0)).collect();
    let results: Vec<(f64, f64, bool)> = cases
        .par_iter()
        .map(|(d, p, f, e_over_d)| {
            let eig =
                eigensystem(&triplet_hamiltonian(&ZeroFieldSplitting::from_ratio(*e_over_d).unwrap(), f).unwrap())
                    .unwrap();
            let a = simulate_g2(d, p, &eig, &delays, &G2Options::with_method(G2Method::Eigen)).unwrap();
            let b = simulate_g2(d, p, &eig, &delays, &G2Options::with_method(G2Method::Rk4)).unwrap();
            let worst = a.values.iter().zip(&b.values).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max);
            let tail = (a.values[a.len() - 1] - 1.0).abs();
            let zero_ok = if d.ground_spin == GroundSpin::Singlet {
                let r = build_rate_matrix(d, p, &eig).unwrap();
                [G2Method::Eigen, G2Method::Rk4]
                    .iter()
                    .all(|&m| simulate_g2_from(&r, &[0.0], &G2Options::with_method(m)).unwrap().values[0] == 0.0)
            } else {
                true
            };
            (worst, tail, zero_ok)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let tail = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let singlets = cases.iter().filter(|c| c.0.ground_spin == GroundSpin::Singlet).count();
    let reference = SimConfig::singlet_reference().rate_matrix(&FieldVector::in_plane(0.5, 0.4).unwrap()).unwrap();
    let zero_ok = results.iter().all(|r| r.2)
        && [G2Method::Eigen, G2Method::Rk4]
            .iter()
            .all(|&m| simulate_g2_from(&reference, &[0.0], &G2Options::with_method(m)).unwrap().values[0] == 0.0);
    let pass = worst <= 1e-6 && tail <= 1e-6 && zero_ok && singlets > 0;
    outcome(
        pass,
        format!(
            "max rel diff {worst:.2e} over 20×200 points, |g²(10 ms)−1| ≤ {tail:.1e}, singlet g²(0)=0 exact in {} cases: {zero_ok}",
            singlets + 1
        ),
    )
}

fn c09_monte_carlo() -> Outcome {
    let t = Instant::now();
    let cfg = SimConfig::singlet_reference();
    let r = cfg.rate_matrix(&FieldVector::in_plane(0.5, 0.4).unwrap()).unwrap();
    let run = monte_carlo_run(&r, 0.4, 42).unwrap();
    let hist =
        compute_g2(&run.tags, &G2Binning::Linear { width: 50e-12 }, &DelayWindow::new(0.0, 2e-6).unwrap()).unwrap();
    // deterministic curve averaged over each bin at four interior points
    let sub = 4;
    let pts: Vec<f64> = hist
        .bin_edges
        .windows(2)
        .flat_map(|w| (0..sub).map(move |j| w[0] + (w[1] - w[0]) * (j as f64 + 0.5) / sub as f64))
        .collect();
    let curve = simulate_g2_from(&r, &pts, &G2Options::default()).unwrap();
    let within = (0..hist.len())
        .filter(|&k| {
            let m = curve.values[k * sub..(k + 1) * sub].iter().sum::<f64>() / sub as f64;
            ((hist.values[k] - m) / hist.poisson_sigma[k]).abs() <= 3.0
        })
        .count();
    let frac = within as f64 / hist.len() as f64;

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/poisson_tags.bin");
    let fixture = tags::read_binary(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap();
    let flat = compute_g2(&fixture, &G2Binning::Linear { width: 1e-6 }, &DelayWindow::new(0.0, 1e-4).unwrap()).unwrap();
    let mean = flat.values.iter().sum::<f64>() / flat.len() as f64;
    let dt = t.elapsed();
    let pass =
        run.transitions >= 10_000_000 && frac >= 0.95 && (mean - 1.0).abs() <= 0.01 && dt < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{} transitions, {:.1}% of {} bins within 3σ; Poisson fixture mean g² {mean:.4}; {dt:.1?}",
            run.transitions,
            100.0 * frac,
            hist.len()
        ),
    )
}

/// Published value and half-width of its last displayed digit.
fn rounded(v: f64, half: f64) -> (f64, f64) {
    (v, half)
}

fn c10_background() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let rho = BackgroundRatio::new(rng.random_range(0.05..1.0)).unwrap();
        let g: f64 = rng.random_range(0.0..5.0);
        worst = worst.max((uncorrect_value(correct_value(g, rho), rho) - g).abs());
        worst = worst.max((correct_value(uncorrect_value(g, rho), rho) - g).abs());
    }
    let rho = BackgroundRatio::new(0.53).unwrap();
    let edges: Vec<f64> = (0..=50).map(|k| k as f64 * 1e-9).collect();
    let hist = G2Histogram::from_counts(edges, (0..50).map(|k| 100 + 7 * k).collect(), vec![120.0; 50], false).unwrap();
    let back = background_uncorrect_curve(&background_correct_curve(&hist, rho), rho);
    for (a, b) in back.values.iter().zip(&hist.values).chain(back.poisson_sigma.iter().zip(&hist.poisson_sigma)) {
        worst = worst.max((a - b).abs());
    }

    // raw amplitudes and background-corrected amplitudes from the table
    let rows: [AmplitudeRow; 5] = [
        (
            "(0°,-)",
            vec![rounded(1.58, 0.005), rounded(1.7, 0.05), rounded(0.09, 0.005)],
            vec![rounded(5.6, 0.05), rounded(6.0, 0.05), rounded(0.33, 0.005)],
        ),
        (
            "(45°,-)",
            vec![rounded(1.48, 0.005), rounded(1.5, 0.05), rounded(0.08, 0.005)],
            vec![rounded(5.4, 0.05), rounded(5.3, 0.05), rounded(0.28, 0.005)],
        ),
        ("(0°,0°)", vec![rounded(1.31, 0.005), rounded(1.3, 0.05)], vec![rounded(3.00, 0.005), rounded(2.9, 0.05)]),
        ("(45°,0°)", vec![rounded(1.65, 0.005), rounded(2.1, 0.05)], vec![rounded(6.0, 0.05), rounded(7.7, 0.05)]),
        ("(90°,0°)", vec![rounded(1.36, 0.005), rounded(1.5, 0.05)], vec![rounded(3.26, 0.005), rounded(4.0, 0.5)]),
    ];
    let mut misses = Vec::new();
    for (label, raw, corrected) in &rows {
        // ρ from the antibunching pair, at both ends of the rounding interval
        let rho_lo = BackgroundRatio::from_amplitudes(raw[0].0 - raw[0].1, corrected[0].0 + corrected[0].1).unwrap();
        let rho_hi = BackgroundRatio::from_amplitudes(raw[0].0 + raw[0].1, corrected[0].0 - corrected[0].1).unwrap();
        for i in 1..raw.len() {
            let lo = background_correct_amplitudes(&[raw[i].0 - raw[i].1], rho_hi)[0];
            let hi = background_correct_amplitudes(&[raw[i].0 + raw[i].1], rho_lo)[0];
            let (c, h) = corrected[i];
            if hi < c - h || lo > c + h {
                misses.push(format!("{label} C̃{} ∈ [{lo:.2}, {hi:.2}] vs {c}", i + 1));
            }
        }
    }
    let pass = worst <= 1e-12 && misses.is_empty();
    outcome(pass, format!("round-trip error {worst:.1e}; table rows reproduced: {}/5 {misses:?}", 5 - misses.len()))
}

fn c11_odmr() -> Outcome {
    let cfg = SimConfig::singlet_reference();
    let diagram = cfg.level_diagram().unwrap();
    let params = cfg.rate_parameters().unwrap();
    let eig = cfg.eigensystem(&FieldVector::zero()).unwrap();
    let contrast = odmr_pl_variation(&diagram, &params, &eig, (3, 4), 100.0).unwrap();
    let floor = odmr_linewidth_floor(&params);
    let pass = contrast > 0.0 && params.gamma_isc2 == 0.85 && (floor - 135.0).abs() <= 1.0;
    outcome(pass, format!("PL variation {contrast:.4}, linewidth floor {floor:.2} kHz"))
}

fn c12_fit_recovery() -> Outcome {
    // seed fixed before any fit was run
    let seed = 12;
    let edges: Vec<f64> = (0..=140).map(|k| 1e-10 * 10f64.powf(k as f64 / 20.0)).collect();
    let synth = |c: &[f64], tau: &[f64]| {
        let g: Vec<f64> = edges.windows(2).map(|w| empirical_model_bin(c, tau, w[0], w[1])).collect();
        let z = 1e6 / g.iter().sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts: Vec<u64> = g.iter().map(|&v| Poisson::new(z * v).unwrap().sample(&mut rng) as u64).collect();
        G2Histogram::from_counts(edges.clone(), counts, vec![z; g.len()], true).unwrap()
    };
    let (c, tau) = ([1.58, 1.7, 0.09], [1.2e-9, 1.48e-6, 16e-6]);
    let f3 = fit_empirical(&synth(&c, &tau), &[2, 3, 4]).unwrap();
    let mut z_max: f64 = 0.0;
    if f3.order == 3 {
        for i in 0..3 {
            z_max = z_max.max(((f3.c[i] - c[i]) / f3.c_sigma[i]).abs());
            z_max = z_max.max(((f3.tau[i] - tau[i]) / f3.tau_sigma[i]).abs());
        }
    }
    let f2 = fit_empirical(&synth(&c[..2], &tau[..2]), &[2, 3, 4]).unwrap();
    let pass = f3.order == 3 && z_max <= 2.0 && f2.order == 2;
    outcome(pass, format!("three-component data → n={} (max |z| {z_max:.2}); τ₃ removed → n={}", f3.order, f2.order))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("three-level rate inversion", c01_rate_inversion),
        ("zero-field-splitting estimate", c02_zfs),
        ("hyperfine table", c03_hyperfine),
        ("quartet zero-field eigenvalues", c04_quartet),
        ("diagram enumeration and classes", c05_enumeration),
        ("steady PL field symmetry", c06_pl_symmetry),
        ("bunching parameters across φ", c07_bunching_sweep),
        ("eigen vs RK4 g²", c08_eigen_vs_rk4),
        ("Monte-Carlo → correlator → g²", c09_monte_carlo),
        ("background correction", c10_background),
        ("ODMR contrast and linewidth", c11_odmr),
        ("fit recovery and order selection", c12_fit_recovery),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {:>2}. {name}: {} ({:.2?})", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail, t.elapsed());
    }
    println!("acceptance: {}/12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
