//! End-to-end acceptance suite.
//!
//! Each test prints one `[PASS]`/`[FAIL]` line (visible with
//! `--nocapture`). Every tolerance is pinned in code next to its
//! assertion. Run with `cargo test --test acceptance`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qff_core::control::{find_peaks, select_two_axis};
use qff_core::curve::{curve_ff_consistency, space_curve};
use qff_core::drive::{
    build_three_harmonic, parse_drive_file, pin_three_harmonic_period, solve_smart_period,
    DriveSpec, TimeGrid,
};
use qff_core::filter::{filter_function, frequency_grid, sweep};
use qff_core::magnus::{magnus_quadrature, magnus_taylor};
use qff_core::oracle::{first_order_check, first_order_residual, PerturbationSpec};
use qff_core::pauli::{Axis, PauliVec};
use qff_core::propagate::{propagate, rotation_trace};
use qff_core::{Drive, Rotation};

const PI: f64 = std::f64::consts::PI;

/// Shape parameters of the six-order-cancelling three-harmonic drive.
const THREE_HARMONIC_OMEGA: f64 = -2.57453;
const THREE_HARMONIC_GAMMA: f64 = -0.49001;
const THREE_HARMONIC_DELTA: f64 = -1.04785;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn load_drive(name: &str) -> Drive {
    let path = repo_root().join("drives").join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    parse_drive_file(&text).unwrap()
}

fn rot_z(spec: &Drive, steps_total: usize) -> Rotation {
    let grid = TimeGrid::span(spec.duration(), steps_total).unwrap();
    rotation_trace(&propagate(spec, &grid).unwrap(), Axis::Z)
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Full width at half maximum of the peak nearest `f0`, by linear
/// interpolation of the half-max crossings.
fn fwhm(freqs: &[f64], gains: &[f64], f0: f64) -> f64 {
    let mut peak = 0;
    for (i, &f) in freqs.iter().enumerate() {
        if (f - f0).abs() < (freqs[peak] - f0).abs() {
            peak = i;
        }
    }
    // hill-climb to the local maximum the seed frequency belongs to
    for i in peak.saturating_sub(200)..(peak + 200).min(gains.len()) {
        if gains[i] > gains[peak] {
            peak = i;
        }
    }
    let half = gains[peak] / 2.0;
    let mut lo = freqs[peak];
    for i in (0..peak).rev() {
        if gains[i] <= half {
            let w = (half - gains[i]) / (gains[i + 1] - gains[i]);
            lo = freqs[i] + w * (freqs[i + 1] - freqs[i]);
            break;
        }
    }
    let mut hi = freqs[peak];
    for i in peak..gains.len() - 1 {
        if gains[i + 1] <= half {
            let w = (gains[i] - half) / (gains[i] - gains[i + 1]);
            hi = freqs[i] + w * (freqs[i + 1] - freqs[i]);
            break;
        }
    }
    hi - lo
}

#[test]
fn criterion_1_bare_system_filter() {
    let start = Instant::now();
    let spec = load_drive("bare.toml");
    let rot = rot_z(&spec, 4096);

    let dc = filter_function(&rot, 0.0);
    assert!(
        (dc.z.norm() - 1.0).abs() <= 1e-6,
        "|F_zz|(0) = {}",
        dc.z.norm()
    );

    for k in 1..=5 {
        let v = filter_function(&rot, k as f64);
        assert!(v.z.norm() <= 1e-6, "|F_zz|({k}/T) = {}", v.z.norm());
    }

    // off-axis components vanish identically for the undriven system
    let grid = frequency_grid(0.0, 3.0, 0.01).unwrap();
    let sw = sweep(&rot, &grid);
    for v in &sw.values {
        assert_eq!(v.x.norm(), 0.0);
        assert_eq!(v.y.norm(), 0.0);
    }

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}");
    println!("[PASS] bare system: unit d.c. gain, 1/T zeros, x/y identically zero ({dt:?})");
}

#[test]
fn criterion_2_dressed_system_peaks_and_bandwidth() {
    let spec = load_drive("dressed.toml");
    let rot = rot_z(&spec, 10_000); // 2000 per Rabi period

    // d.c. insensitivity
    let dc = filter_function(&rot, 0.0);
    assert!(
        dc.combined_magnitude() <= 1e-6,
        "|F|(0) = {}",
        dc.combined_magnitude()
    );

    // peaks of |F_zz| and |F_zy| at the Rabi frequency
    let grid = frequency_grid(0.0, 3.0, 0.01).unwrap();
    let sw = sweep(&rot, &grid);
    for axis in [Axis::Z, Axis::Y] {
        let g = sw.gains(axis);
        let f_peak = sw.freqs[argmax(&g)];
        assert!(
            (f_peak - 1.0).abs() <= 0.02,
            "|F_z{}| peak at {f_peak}",
            axis.letter()
        );
    }

    // five-fold duration narrows the peak five-fold
    let one = DriveSpec::constant(PI, 0.0, 1.0).unwrap();
    let grid_fine = frequency_grid(0.3, 1.7, 0.001).unwrap();
    let w1 = {
        let rot = rot_z(&one, 2000);
        let sw = sweep(&rot, &grid_fine);
        fwhm(&sw.freqs, &sw.gains(Axis::Z), 1.0)
    };
    let w5 = {
        let sw = sweep(&rot, &grid_fine);
        fwhm(&sw.freqs, &sw.gains(Axis::Z), 1.0)
    };
    let expected = w1 / 5.0;
    assert!(
        (w5 - expected).abs() <= 0.1 * expected,
        "FWHM 1 period {w1:.4}, 5 periods {w5:.4}"
    );
    println!("[PASS] dressed system: d.c. insensitive, peaks at 1 MHz, bandwidth/5 (FWHM {w1:.4} -> {w5:.4})");
}

/// Phases must match either directly or under one global sign flip (a
/// uniform 180 degree shift), applied consistently across a check.
fn phases_match(measured: &[f64], expected: &[f64], tol: f64) -> bool {
    let direct = measured
        .iter()
        .zip(expected)
        .all(|(m, e)| angle_dist(*m, *e) <= tol);
    let flipped = measured
        .iter()
        .zip(expected)
        .all(|(m, e)| angle_dist(*m, *e + 180.0) <= tol);
    direct || flipped
}

fn angle_dist(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d = 360.0 - d;
    }
    d
}

#[test]
fn criterion_3_smart_drive_period_and_phases() {
    let amp = std::f64::consts::SQRT_2 * PI;
    let t = solve_smart_period(amp).unwrap();
    assert!((1.0 / t - 0.59).abs() <= 0.02, "1/T = {} MHz", 1.0 / t);
    assert!(
        (amp * t / PI - 2.4048).abs() <= 1e-3,
        "modulation index {}",
        amp * t / PI
    );

    let spec = DriveSpec::cosine_modulated(amp, t, 5).unwrap();
    let grid = TimeGrid::for_drive(&spec, 2000).unwrap();
    let rot = rotation_trace(&propagate(&spec, &grid).unwrap(), Axis::Z);
    let base = 1.0 / t;
    let df = base / 200.0;
    let fgrid = frequency_grid(0.0, 2.6 * base, df).unwrap();
    let sw = sweep(&rot, &fgrid).with_base_freq(Some(base));
    let sols = find_peaks(&sw, 0.3).unwrap();

    let y = sols
        .iter()
        .find(|s| s.axis == Axis::Y)
        .expect("y peak above gain 0.3");
    let z = sols
        .iter()
        .find(|s| s.axis == Axis::Z)
        .expect("z peak above gain 0.3");
    // the finite 5-period window shifts the peak slightly off the harmonic
    assert!(
        (y.frequency_mhz - base).abs() <= 0.02,
        "y peak at {}",
        y.frequency_mhz
    );
    assert!(
        (z.frequency_mhz - 2.0 * base).abs() <= 0.02,
        "z peak at {}",
        z.frequency_mhz
    );
    assert!(
        phases_match(&[y.phase_deg, z.phase_deg], &[-90.0, 0.0], 5.0),
        "phases y {} z {}",
        y.phase_deg,
        z.phase_deg
    );
    println!(
        "[PASS] cosine-modulated drive: 1/T = {:.4} MHz, y@1/T phase {:.2}, z@2/T phase {:.2}",
        base, y.phase_deg, z.phase_deg
    );
}

#[test]
fn criterion_4_hahn_echo_space_curves() {
    let spec = load_drive("hahn_echo.toml");
    let grid = TimeGrid::for_drive(&spec, 4096).unwrap();
    let rot = rotation_trace(&propagate(&spec, &grid).unwrap(), Axis::Z);
    let total = grid.total();

    // d.c. curve: closed in z, y displaced by the semicircle diameter.
    // The pi pulse has amplitude W = pi rad/us, so the semicircle radius is
    // 1/(2W) and the diameter 1/W = 1/pi us.
    let dc = space_curve(&rot, 0.0, 0.0);
    let [_, y0, z0] = dc.endpoint();
    assert!(z0.abs() <= 1e-6, "z(T) = {z0}");
    assert!((y0 - 1.0 / PI).abs() <= 1e-3, "y(T) = {y0}, expected 1/pi");

    // quadrature-phase a.c. noise is enhanced rather than refocused
    let enhanced = space_curve(&rot, 0.54, 90.0);
    let z_enh = enhanced.endpoint()[2].abs();
    assert!(
        z_enh >= 5.0 * z0.abs().max(1e-9),
        "enhanced z {z_enh} vs d.c. z {z0}"
    );

    // antiphase a.c. noise refocuses z
    let refocused = space_curve(&rot, 0.54, 180.0);
    let [_, y2, z2] = refocused.endpoint();
    assert!(z2.abs() <= 0.1 * y2.abs(), "z {z2} vs y {y2}");

    // endpoint identity against the filter function in all three cases
    for (f, phi) in [(0.0, 0.0), (0.54, 90.0), (0.54, 180.0)] {
        let r = curve_ff_consistency(&rot, f, phi);
        assert!(
            r <= 1e-9 * total,
            "identity residual {r:.3e} at f={f} phi={phi}"
        );
    }
    println!(
        "[PASS] Hahn echo curves: closed at d.c. (y = {y0:.6}), enhanced at (0.54 MHz, 90 deg), refocused at 180 deg, endpoint identity holds"
    );
}

#[test]
fn criterion_5_three_harmonic_two_axis_controls() {
    let spec = load_drive("three_harmonic.toml");
    let base = spec.base_freq().unwrap();

    // the shipped base frequency is the first-order closing period
    let pinned = pin_three_harmonic_period(
        THREE_HARMONIC_OMEGA,
        THREE_HARMONIC_GAMMA,
        THREE_HARMONIC_DELTA,
    )
    .unwrap();
    assert!(
        (1.0 / base - pinned).abs() <= 1e-9 * pinned,
        "shipped period {} vs pinned {pinned}",
        1.0 / base
    );

    let grid = TimeGrid::for_drive(&spec, 2000).unwrap();
    let rot = rotation_trace(&propagate(&spec, &grid).unwrap(), Axis::Z);
    let df = base / 100.0;
    let fgrid = frequency_grid(0.0, 6.2 * base, df).unwrap();
    let sw = sweep(&rot, &fgrid).with_base_freq(Some(base));

    let sols = find_peaks(&sw, 0.2).unwrap();
    assert_eq!(
        sols.len(),
        2,
        "expected exactly two qualifying peaks, got {:?}",
        sols.iter()
            .map(|s| (s.axis, s.harmonic_index, s.gain))
            .collect::<Vec<_>>()
    );
    let (a, b) = select_two_axis(&sols).unwrap();
    let z = if a.axis == Axis::Z { a } else { b };
    let y = if a.axis == Axis::Y { a } else { b };
    assert_eq!((z.axis, z.harmonic_index), (Axis::Z, 2));
    assert_eq!((y.axis, y.harmonic_index), (Axis::Y, 5));
    assert!(
        (z.frequency_mhz - 2.0 * base).abs() <= df,
        "z peak at {}",
        z.frequency_mhz
    );
    assert!(
        (y.frequency_mhz - 5.0 * base).abs() <= df,
        "y peak at {}",
        y.frequency_mhz
    );
    assert!(
        phases_match(&[z.phase_deg, y.phase_deg], &[0.0, -90.0], 5.0),
        "phases z {} y {}",
        z.phase_deg,
        y.phase_deg
    );
    println!(
        "[PASS] three-harmonic drive: two-axis pair (z @ 2nd harmonic, phase {:.2}) / (y @ 5th harmonic, phase {:.2})",
        z.phase_deg, y.phase_deg
    );
}

#[test]
fn criterion_6_magnus_cancellation_and_method_agreement() {
    let start = Instant::now();
    let omega = THREE_HARMONIC_OMEGA;
    let (gamma, delta) = (THREE_HARMONIC_GAMMA, THREE_HARMONIC_DELTA);
    let t = pin_three_harmonic_period(omega, gamma, delta).unwrap();
    let spec = build_three_harmonic(omega, gamma, delta, 1.0 / t, 1).unwrap();

    // orders 1..6 cancel at the pinned scale
    let grid = TimeGrid::span(t, 8192).unwrap();
    let series = magnus_taylor(&spec, &grid, Axis::Z, 6).unwrap();
    for (k, n) in series.normalized_norms().iter().enumerate() {
        assert!(
            *n <= 1e-4,
            "||A_{}||/T^{} = {n:.3e} exceeds 1e-4",
            k + 1,
            k + 1
        );
    }

    // the two extraction routes agree at matched resolution
    let fine = TimeGrid::span(t, 65_536).unwrap();
    let rot = rotation_trace(&propagate(&spec, &fine).unwrap(), Axis::Z);
    let quad = magnus_quadrature(&rot, 3).unwrap();
    let taylor = magnus_taylor(&spec, &fine, Axis::Z, 3).unwrap();
    for k in 1..=3 {
        let d = (*quad.term(k) - *taylor.term(k)).norm();
        assert!(
            d <= 1e-8 * t.powi(k as i32),
            "methods disagree at k={k}: {d:.3e}"
        );
    }

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}");
    println!(
        "[PASS] three-harmonic Magnus: ||A_1..A_6||/T^k all <= 1e-4, quadrature and Taylor extraction agree ({dt:?})"
    );
}

#[test]
fn criterion_6b_three_harmonic_seventh_order_term() {
    // Stated expectation: the first surviving term is the seventh, with
    // norm >= 1e-3 T^7 and direction within 5 degrees of +-x.
    //
    // For a drive along x alone, every odd-order term is a nested cross
    // product of an odd number of y-z-plane vectors and therefore lies in
    // the y-z plane itself; only even orders can point along x. The
    // measured seventh-order term is ~1e-7 T^7 along z. Both halves of the
    // expectation are asserted as stated and fail; see the assertion
    // message for the measured values.
    let t = pin_three_harmonic_period(
        THREE_HARMONIC_OMEGA,
        THREE_HARMONIC_GAMMA,
        THREE_HARMONIC_DELTA,
    )
    .unwrap();
    let spec = build_three_harmonic(
        THREE_HARMONIC_OMEGA,
        THREE_HARMONIC_GAMMA,
        THREE_HARMONIC_DELTA,
        1.0 / t,
        1,
    )
    .unwrap();
    let grid = TimeGrid::span(t, 8192).unwrap();
    let series = magnus_taylor(&spec, &grid, Axis::Z, 7).unwrap();
    let a7 = series.term(7);
    let scaled = a7.norm() / t.powi(7);
    let x_angle = a7
        .angle_deg(&Axis::X.unit::<f64>())
        .min(a7.angle_deg(&(-Axis::X.unit::<f64>())));
    let pass = scaled >= 1e-3 && x_angle <= 5.0;
    println!(
        "[{}] seventh-order term: ||A_7||/T^7 = {scaled:.3e} (expected >= 1e-3), angle to +-x = {x_angle:.1} deg (expected <= 5)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        pass,
        "seventh-order term: ||A_7||/T^7 = {scaled:.3e}, direction ({:+.3}, {:+.3}, {:+.3}) is {x_angle:.1} deg from +-x; \
         odd orders of an x-only drive lie in the y-z plane, so this expectation cannot be met",
        a7.x / a7.norm(),
        a7.y / a7.norm(),
        a7.z / a7.norm()
    );
}

#[test]
fn criterion_7_optimizer_recovery() {
    use qff_core::optimize::{objective, optimize, OptimizerConfig, Parameterization};
    let start = Instant::now();

    // single harmonic, first order: the Bessel-zero modulation index
    let single = OptimizerConfig::<f64> {
        harmonics: vec![1],
        order: 1,
        weights: vec![],
        parameterization: Parameterization::RawAmplitudes,
        base_freq: 1.0,
        budget: 4000,
        restarts: 3,
        seed: 11,
        steps_per_period: 2048,
    };
    let r = optimize(&single).unwrap();
    assert!(
        r.converged,
        "single-harmonic search: objective {}",
        r.objective
    );
    assert!(
        (r.modulation_index - 2.4048).abs() <= 1e-3,
        "recovered index {}",
        r.modulation_index
    );

    // three harmonics, sixth order
    let three = OptimizerConfig {
        harmonics: vec![1, 3, 5],
        order: 6,
        weights: vec![],
        parameterization: Parameterization::Spherical,
        base_freq: 1.0,
        budget: 20_000,
        restarts: 5,
        seed: 11,
        steps_per_period: 4096,
    };
    let r6 = optimize(&three).unwrap();
    assert!(
        r6.converged && r6.objective <= 1e-8,
        "K=6 search: objective {} after {} evaluations",
        r6.objective,
        r6.evaluations
    );

    // the reference parameter point itself sits on the zero set: with the
    // period pinned by the first-order closing condition, the drive scale
    // -2.57453 rad/us cancels all six orders
    let t = pin_three_harmonic_period(
        THREE_HARMONIC_OMEGA,
        THREE_HARMONIC_GAMMA,
        THREE_HARMONIC_DELTA,
    )
    .unwrap();
    let pinned_cfg = OptimizerConfig {
        base_freq: 1.0 / t,
        ..three.clone()
    };
    let at_point = objective(
        &[
            THREE_HARMONIC_OMEGA,
            THREE_HARMONIC_GAMMA,
            THREE_HARMONIC_DELTA,
        ],
        &pinned_cfg,
    )
    .unwrap();
    assert!(
        at_point <= 1e-8,
        "objective at reference point: {at_point:.3e}"
    );

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 600.0, "took {dt:?}");
    println!(
        "[PASS] optimizer: index {:.5} recovered; K=6 objective {:.2e} in {} evals; reference point objective {:.2e} ({dt:?})",
        r.modulation_index, r6.objective, r6.evaluations, at_point
    );
}

#[test]
fn criterion_8_oracle_property_suite() {
    use rand::{Rng, SeedableRng};

    // 100 seeded random (drive, f, phi) cases at db*T = 0.01 rad
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n_terms = rng.gen_range(1..=3usize);
        let mut terms = Vec::new();
        let mut used = std::collections::BTreeSet::new();
        for _ in 0..n_terms {
            let h = rng.gen_range(1..=6u32);
            if !used.insert(h) {
                continue;
            }
            terms.push(qff_core::drive::HarmonicTerm {
                harmonic: h,
                amp_i: rng.gen_range(-6.0..6.0) * PI,
                amp_q: rng.gen_range(-6.0..6.0) * PI,
            });
        }
        let spec = DriveSpec::Harmonics {
            base_freq: 1.0,
            periods: rng.gen_range(1..=3u32),
            terms,
        };
        spec.validate().unwrap();
        let grid = TimeGrid::for_drive(&spec, 2000).unwrap();
        let total = grid.total();
        let pert = PerturbationSpec {
            axis: Axis::Z,
            delta_beta: 0.01 / total,
            f_mhz: rng.gen_range(0.0..3.0 / total),
            phi_deg: rng.gen_range(-180.0..180.0),
        };
        let r = first_order_residual(&spec, &pert, &grid).unwrap();
        worst = worst.max(r);
        assert!(r <= 2.0 * 0.01f64.powi(2), "residual {r:.3e} at {pert:?}");
    }

    // doubling ratio on the acceptance drives wherever the residual is
    // resolved above the discretization floor
    let amp = std::f64::consts::SQRT_2 * PI;
    let t_smart = solve_smart_period(amp).unwrap();
    let drives: Vec<Drive> = vec![
        load_drive("dressed.toml"),
        load_drive("hahn_echo.toml"),
        DriveSpec::cosine_modulated(amp, t_smart, 5).unwrap(),
        load_drive("three_harmonic.toml"),
    ];
    let mut checked = 0;
    for spec in &drives {
        let grid = TimeGrid::for_drive(spec, 2000).unwrap();
        let total = grid.total();
        let db = 0.01 / total;
        for (f, phi) in [(0.0, 0.0), (0.37 / total, 45.0), (1.3 / total, -60.0)] {
            let p1 = PerturbationSpec {
                axis: Axis::Z,
                delta_beta: db,
                f_mhz: f,
                phi_deg: phi,
            };
            let p2 = PerturbationSpec {
                delta_beta: 2.0 * db,
                ..p1
            };
            let r1 = first_order_residual(spec, &p1, &grid).unwrap();
            let r2 = first_order_residual(spec, &p2, &grid).unwrap();
            if r1 >= 1e-7 {
                let ratio = r2 / r1;
                assert!(
                    (3.5..=4.5).contains(&ratio),
                    "doubling ratio {ratio:.3} at f={f} phi={phi} (r1={r1:.3e})"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 5, "only {checked} ladder cases resolved");

    // every extracted control solution closes the loop against the oracle
    let mut solutions_checked = 0;
    let controls: Vec<(Drive, f64)> = vec![
        (load_drive("dressed.toml"), 1.0),
        (
            DriveSpec::cosine_modulated(amp, t_smart, 5).unwrap(),
            1.0 / t_smart,
        ),
        (
            load_drive("three_harmonic.toml"),
            load_drive("three_harmonic.toml").base_freq().unwrap(),
        ),
    ];
    for (spec, base) in &controls {
        let steps = (2000.0 * spec.duration() * base).ceil() as usize;
        let grid = TimeGrid::span(spec.duration(), steps.max(2000)).unwrap();
        let rot = rotation_trace(&propagate(spec, &grid).unwrap(), Axis::Z);
        let fgrid = frequency_grid(0.0, 6.2 * base, base / 200.0).unwrap();
        let sw = sweep(&rot, &fgrid).with_base_freq(Some(*base));
        let total = grid.total();
        for sol in find_peaks(&sw, 0.2).unwrap() {
            let db = 0.01 / total;
            let pert = PerturbationSpec {
                axis: Axis::Z,
                delta_beta: db,
                f_mhz: sol.frequency_mhz,
                phi_deg: -sol.phase_deg,
            };
            let check = first_order_check(spec, &pert, &grid).unwrap();
            let angle = check.actual.angle_deg(&axis_vec(sol.axis));
            assert!(angle <= 3.0, "axis angle {angle:.2} deg for {sol:?}");
            let predicted = db * total * sol.gain;
            let rel = (check.actual.norm() - predicted).abs() / predicted;
            assert!(
                rel <= 0.02,
                "magnitude off by {:.2}% for {sol:?}",
                100.0 * rel
            );
            solutions_checked += 1;
        }
    }
    assert!(solutions_checked >= 4);
    println!(
        "[PASS] oracle suite: 100 random cases within 2(dbT)^2 (worst {worst:.2e}), {checked} doubling ladders in [3.5, 4.5], {solutions_checked} control solutions closed within 3 deg / 2%"
    );
}

fn axis_vec(axis: Axis) -> PauliVec<f64> {
    axis.unit()
}

#[test]
fn criterion_9_cli_determinism() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_qff");
    let root = repo_root();
    let tmp = std::env::temp_dir().join(format!("qff-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();

    let run_ff = |out: &Path, threads: usize| {
        let status = Command::new(bin)
            .current_dir(&root)
            .args([
                "ff",
                "drives/smart.toml",
                "--fmax",
                "2.0",
                "--df",
                "0.01",
                "--threads",
                &threads.to_string(),
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        (
            std::fs::read(out).unwrap(),
            std::fs::read(crate_manifest(out)).unwrap(),
        )
    };
    let (a, ma) = run_ff(&tmp.join("ff_a.csv"), 1);
    let (b, mb) = run_ff(&tmp.join("ff_b.csv"), 1);
    let (c, mc) = run_ff(&tmp.join("ff_c.csv"), 4);
    assert_eq!(a, b, "serial reruns differ");
    assert_eq!(a, c, "serial vs parallel outputs differ");
    // manifests only differ in the output file name
    let scrub = |m: &[u8], name: &str| String::from_utf8_lossy(m).replace(name, "OUT");
    assert_eq!(scrub(&ma, "ff_a.csv"), scrub(&mb, "ff_b.csv"));
    assert_eq!(scrub(&ma, "ff_a.csv"), scrub(&mc, "ff_c.csv"));

    let run_verify = |out: &Path| {
        let status = Command::new(bin)
            .current_dir(&root)
            .args([
                "verify",
                "drives/hahn_echo.toml",
                "--random",
                "50",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "verify exited {:?}", status.code());
        std::fs::read(out).unwrap()
    };
    let va = run_verify(&tmp.join("verify_a.json"));
    let vb = run_verify(&tmp.join("verify_b.json"));
    assert_eq!(va, vb, "verify reruns differ");

    std::fs::remove_dir_all(&tmp).ok();
    println!(
        "[PASS] determinism: ff and verify outputs byte-identical across reruns and thread counts"
    );
}

fn crate_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap().to_string_lossy().into_owned();
    name.push_str(".manifest.json");
    out.with_file_name(name)
}
