use kdvlab::ansatz::AnsatzFamily;
use kdvlab::solver::{solve_cnoidal, solve_soliton, solve_superposition, Branch, SolutionParams};
use kdvlab::verify::{eval_field, residual, spatial_period, volume_mean, GridSpec, WaveField};
use kdvlab::KdvError;

mod common;
use common::{quad_e, quad_k};

fn quad_k_e(m: f64) -> (f64, f64) {
    (quad_k(m), quad_e(m))
}

fn kdv2_soliton() -> SolutionParams {
    solve_soliton(2, 0.1, 0.1, None).unwrap().solutions()[0].clone()
}

fn bare(family: AnsatzFamily, a: f64, b: f64, d: f64, m: f64) -> SolutionParams {
    SolutionParams {
        family,
        order: 1,
        alpha: 0.1,
        beta: 0.1,
        amplitude: a,
        inverse_width: b,
        v: 1.0,
        offset: d,
        m: (family != AnsatzFamily::Soliton).then_some(m),
        branch: Branch::KdvFamily,
        z: 0.0,
        max_normalized_residual: 0.0,
    }
}

#[test]
fn soliton_crest_is_the_amplitude() {
    let s = kdv2_soliton();
    let grid = GridSpec::new(64, -1.0, 2.0).unwrap();
    let f = eval_field(&s, &grid, 0.0).unwrap();
    assert!((f.samples()[32] - s.amplitude).abs() < 1e-14);
    assert!(f.samples().iter().all(|&y| y <= s.amplitude));
}

#[test]
fn traveling_wave_translates() {
    let s = solve_cnoidal(2, 0.1, 0.1, 0.7, None).unwrap().solutions()[0].clone();
    let grid = GridSpec::default_for(&s, 256).unwrap();
    let t = 3.7;
    let moved = eval_field(&s, &grid, t).unwrap();
    let shifted = GridSpec::new(256, grid.x0 - s.v * t, grid.length).unwrap();
    let reference = eval_field(&s, &shifted, 0.0).unwrap();
    for (x, y) in moved.samples().iter().zip(reference.samples()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn superposition_symmetries() {
    let p = bare(AnsatzFamily::SuperpositionPlus, 1.0, 1.0, 0.0, 0.6);
    let q = SolutionParams {
        family: AnsatzFamily::SuperpositionMinus,
        ..p.clone()
    };
    let n = 128;
    let l = spatial_period(&p).unwrap();
    let grid = GridSpec::new(n, -0.5 * l, l).unwrap();
    let fp = eval_field(&p, &grid, 0.0).unwrap();
    let fq = eval_field(&q, &grid, 0.0).unwrap();
    // even about the crest, and the two signs differ by half a period
    for i in 1..n {
        assert!((fp.samples()[i] - fp.samples()[n - i]).abs() < 1e-13);
        assert!((fq.samples()[i] - fp.samples()[(i + n / 2) % n]).abs() < 1e-13);
    }
}

#[test]
fn cnoidal_period_is_two_k_over_b() {
    let m = 0.8;
    let p = bare(AnsatzFamily::Cnoidal, 1.0, 0.7, 0.0, m);
    let (k, _) = quad_k_e(m);
    let grid = GridSpec::new(4096, 0.0, 3.0 * 2.0 * k / 0.7).unwrap();
    let f = eval_field(&p, &grid, 0.0).unwrap();
    let s = f.samples();
    let crests: Vec<f64> = (1..s.len() - 1)
        .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1])
        .map(|i| f.x(i))
        .collect();
    assert_eq!(crests.len(), 2, "{crests:?}");
    assert!((crests[1] - crests[0] - 2.0 * k / 0.7).abs() <= 1.5 * grid.dx());
    assert!((spatial_period(&p).unwrap() - 2.0 * k / 0.7).abs() < 1e-8);
}

#[test]
fn cnoidal_mean_matches_quadrature() {
    for &m in &[0.1, 0.5, 0.9] {
        let p = bare(AnsatzFamily::Cnoidal, 1.0, 1.0, 0.0, m);
        let (k, e) = quad_k_e(m);
        let expected = (e / k - (1.0 - m)) / m;
        assert!(
            (volume_mean(&p).unwrap() - expected).abs() < 1e-10,
            "m = {m}"
        );
    }
}

#[test]
fn solved_elliptic_waves_have_zero_mean() {
    for &m in &[0.1, 0.5, 0.9] {
        for order in [1, 2] {
            let amp = (order == 1).then_some(0.8);
            let vs = [
                solve_cnoidal(order, 0.1, 0.1, m, amp).unwrap(),
                solve_superposition(order, 1, 0.1, 0.1, m, amp).unwrap(),
                solve_superposition(order, -1, 0.1, 0.1, m, amp).unwrap(),
            ];
            for v in &vs {
                for s in v.solutions() {
                    let mean = volume_mean(s).unwrap();
                    assert!(
                        mean.abs() <= 1e-10,
                        "{} order {order} m {m}: {mean}",
                        s.family
                    );
                }
            }
        }
    }
}

#[test]
fn solved_waves_have_small_residual() {
    let s = kdv2_soliton();
    let r = residual(&s, 2, &GridSpec::default_for(&s, 1024).unwrap()).unwrap();
    assert!(r.max_normalized < 1e-12, "{}", r.max_normalized);
    assert_eq!(r.points, 1024);
}

#[test]
fn tampered_velocity_is_detected() {
    let mut s = kdv2_soliton();
    s.v += 0.01;
    let r = residual(&s, 2, &GridSpec::default_for(&s, 1024).unwrap()).unwrap();
    assert!(r.max_normalized >= 1e-3, "{}", r.max_normalized);
}

#[test]
fn kdv3_best_fit_soliton_is_not_a_solution() {
    let (al, be) = (0.1, 0.1);
    let v = solve_soliton(3, al, be, None).unwrap();
    let scan = &v.certificate().unwrap().scan;
    let (a, b, vel) = (scan.argmin[0], scan.argmin[1], scan.argmin[2]);
    let s = SolutionParams {
        order: 3,
        amplitude: a / al,
        inverse_width: (b / be).sqrt(),
        v: vel,
        z: b / a,
        ..bare(AnsatzFamily::Soliton, 1.0, 1.0, 0.0, 0.0)
    };
    let r = residual(&s, 3, &GridSpec::default_for(&s, 2048).unwrap()).unwrap();
    assert!(r.max_normalized >= 1e-4, "{}", r.max_normalized);
}

#[test]
fn residual_is_stable_under_refinement() {
    let mut s = kdv2_soliton();
    s.v += 1e-4;
    let coarse = residual(&s, 2, &GridSpec::default_for(&s, 1024).unwrap()).unwrap();
    let fine = residual(&s, 2, &GridSpec::default_for(&s, 2048).unwrap()).unwrap();
    let ratio = fine.max_normalized / coarse.max_normalized;
    assert!((0.1..10.0).contains(&ratio), "{ratio}");
}

#[test]
fn invalid_inputs() {
    let s = kdv2_soliton();
    assert!(matches!(spatial_period(&s), Err(KdvError::Usage(_))));
    assert!(matches!(volume_mean(&s), Err(KdvError::Usage(_))));
    let mut p = bare(AnsatzFamily::Cnoidal, 1.0, 1.0, 0.0, 0.5);
    p.m = None;
    assert!(eval_field(&p, &GridSpec::new(16, 0.0, 1.0).unwrap(), 0.0).is_err());
    let mut q = bare(AnsatzFamily::Cnoidal, 1.0, 1.0, 0.0, 1.2);
    assert!(matches!(volume_mean(&q), Err(KdvError::Domain(_))));
    q.m = Some(0.5);
    q.inverse_width = -1.0;
    assert!(eval_field(&q, &GridSpec::new(16, 0.0, 1.0).unwrap(), 0.0).is_err());
}

#[test]
fn csv_output() {
    let mut samples = vec![0.0; 16];
    samples[1] = 0.25;
    let f = WaveField::new(samples, 0.0, 0.5).unwrap();
    let mut out = Vec::new();
    f.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,eta");
    assert_eq!(lines[2], "5.0000000000000000e-1,2.5000000000000000e-1");
}
