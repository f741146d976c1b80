use kdvlab::ansatz::AnsatzFamily;
use kdvlab::error::KdvError;
use kdvlab::solver::{
    cached_system, condition_residuals, consistency_analysis, solve_cnoidal, solve_soliton,
    solve_superposition, AnalysisOptions, Branch, VerdictKind,
};
use proptest::prelude::*;

mod common;
use common::{quad_e, quad_k};

fn e_over_k(m: f64) -> f64 {
    quad_e(m) / quad_k(m)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kdv_soliton_closed_form(al in 0.01f64..0.3, be in 0.01f64..0.3, a in 0.1f64..5.0) {
        let v = solve_soliton(1, al, be, Some(a)).unwrap();
        let s = v.solutions()[0];
        prop_assert!(rel(s.inverse_width, (3.0 * al * a / (4.0 * be)).sqrt()) < 1e-13);
        prop_assert!(rel(s.v, 1.0 + 0.5 * al * a) < 1e-14);
        prop_assert_eq!(s.offset, 0.0);
    }

    #[test]
    fn kdv_cnoidal_closed_form(al in 0.01f64..0.3, be in 0.01f64..0.3, a in 0.1f64..5.0, m in 0.05f64..0.95) {
        let s = solve_cnoidal(1, al, be, m, Some(a)).unwrap().solutions()[0].clone();
        let ek = e_over_k(m);
        prop_assert!(rel(s.inverse_width, (3.0 * al * a / (4.0 * be * m)).sqrt()) < 1e-12);
        prop_assert!((s.offset + a / m * (ek + m - 1.0)).abs() < 1e-11 * (1.0 + a / m));
        prop_assert!(rel(s.v, 1.0 + al * a / (2.0 * m) * (2.0 - m - 3.0 * ek)) < 1e-11);
    }

    #[test]
    fn kdv_superposition_closed_form(al in 0.01f64..0.3, be in 0.01f64..0.3, a in 0.1f64..5.0, m in 0.05f64..0.95) {
        let ek = e_over_k(m);
        for sign in [1, -1] {
            let s = solve_superposition(1, sign, al, be, m, Some(a)).unwrap().solutions()[0].clone();
            prop_assert!(rel(s.inverse_width, (3.0 * al * a / (4.0 * be)).sqrt()) < 1e-12);
            prop_assert!((s.offset + 0.5 * a * ek).abs() < 1e-11 * (1.0 + a));
            prop_assert!(rel(s.v, 1.0 + al * a / 8.0 * (5.0 - m - 6.0 * ek)) < 1e-11);
        }
    }

    #[test]
    fn kdv2_soliton_scales_with_alpha_and_beta(al in 0.01f64..0.3, be in 0.01f64..0.3) {
        let v = solve_soliton(2, al, be, None).unwrap();
        let s = v.solutions()[0];
        prop_assert!((s.amplitude * al - 0.242399).abs() < 1e-5);
        prop_assert!((s.inverse_width.powi(2) * be - 0.145137).abs() < 1e-5);
        prop_assert!((s.v - 1.11455).abs() < 1e-5);
    }
}

#[test]
fn kdv2_soliton_against_direct_formulas() {
    // C4 gives z; C2 is then linear in αA; C0 gives v
    let z = (43.0 + 2305f64.sqrt()) / 152.0;
    let a = (0.75 - z) / (19.0 / 3.0 * z * z - 2.75 * z);
    let b = z * a;
    let v = 1.0 + 2.0 / 3.0 * b + 38.0 / 45.0 * b * b;
    let s = solve_soliton(2, 0.1, 0.1, None).unwrap().solutions()[0].clone();
    assert!(rel(s.amplitude * 0.1, a) < 1e-12);
    assert!(rel(s.inverse_width.powi(2) * 0.1, b) < 1e-12);
    assert!(rel(s.v, v) < 1e-13);
    assert_eq!(s.branch, Branch::Root(2));
}

#[test]
fn kdv2_soliton_roots_satisfy_vieta() {
    let v = solve_soliton(2, 0.1, 0.1, None).unwrap();
    let VerdictKind::Discrete {
        solutions,
        rejected,
    } = &v.kind
    else {
        panic!("expected a discrete verdict, got {}", v.kind_name());
    };
    assert_eq!(solutions.len(), 1);
    assert_eq!(rejected.len(), 1);
    let (z1, z2) = (rejected[0].z, solutions[0].z);
    assert!(rejected[0].b < 0.0, "z1 branch has B² < 0");
    assert!((z1 + z2 - (43.0 / 12.0) / (19.0 / 3.0)).abs() < 1e-14);
    assert!((z1 * z2 + (1.0 / 8.0) / (19.0 / 3.0)).abs() < 1e-14);
    assert!((z1 - (43.0 - 2305f64.sqrt()) / 152.0).abs() < 1e-12);
    assert!((z2 - (43.0 + 2305f64.sqrt()) / 152.0).abs() < 1e-12);
    assert!((z1 + 0.033).abs() < 1e-3 && (z2 - 0.599).abs() < 1e-3);
}

#[test]
fn kdv2_cnoidal_lower_branch_is_inverted() {
    for i in 1..20 {
        let m = 0.01 * i as f64;
        let v = solve_cnoidal(2, 0.1, 0.1, m, None).unwrap();
        let s = v.branch(Branch::Root(1)).expect("z1 branch present");
        assert!(s.amplitude < 0.0, "m = {m}: A = {}", s.amplitude);
        assert!(s.inverse_width > 0.0);
    }
}

#[test]
fn kdv2_superposition_signs_agree() {
    for &m in &[0.1, 0.5, 0.9] {
        let p = solve_superposition(2, 1, 0.1, 0.1, m, None).unwrap();
        let q = solve_superposition(2, -1, 0.1, 0.1, m, None).unwrap();
        let (ps, qs) = (p.solutions(), q.solutions());
        assert_eq!(ps.len(), qs.len());
        for (a, b) in ps.iter().zip(&qs) {
            assert_eq!(a.branch, b.branch);
            for (x, y) in [
                (a.amplitude, b.amplitude),
                (a.inverse_width, b.inverse_width),
                (a.v, b.v),
                (a.offset, b.offset),
            ] {
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}

#[test]
fn every_emitted_solution_satisfies_its_conditions() {
    for &m in &[0.1, 0.5, 0.9] {
        for order in [1, 2] {
            let amp = (order == 1).then_some(1.3);
            let verdicts = [
                solve_soliton(order, 0.1, 0.2, amp).unwrap(),
                solve_cnoidal(order, 0.1, 0.2, m, amp).unwrap(),
                solve_superposition(order, 1, 0.1, 0.2, m, amp).unwrap(),
                solve_superposition(order, -1, 0.1, 0.2, m, amp).unwrap(),
            ];
            for v in &verdicts {
                assert!(!v.solutions().is_empty());
                for s in v.solutions() {
                    let sys = cached_system(s.family, s.order).unwrap();
                    let worst = condition_residuals(&sys, s).into_iter().fold(0.0, f64::max);
                    assert!(worst < 1e-12, "{} order {order}: {worst}", s.family);
                }
            }
        }
    }
}

#[test]
fn kdv3_soliton_exact_certificate() {
    let v = solve_soliton(3, 0.1, 0.1, None).unwrap();
    assert_eq!(v.kind_name(), "inconsistent");
    let c = v.certificate().unwrap();
    let exact = c
        .exact
        .as_ref()
        .expect("rational coefficients allow exact elimination");
    assert_eq!(exact.shape_polynomial, vec!["17600", "-12224", "708", "-9"]);
    assert_eq!(exact.common_factor_degree, 0);
    assert_eq!(exact.admissible_roots, 0);
    assert!(c.min_normalized_ssq() > 1e-4);
}

#[test]
fn kdv3_elliptic_families_are_inconsistent() {
    for f in [
        AnsatzFamily::Cnoidal,
        AnsatzFamily::SuperpositionPlus,
        AnsatzFamily::SuperpositionMinus,
    ] {
        let sys = cached_system(f, 3).unwrap();
        let v = consistency_analysis(&sys, 0.1, 0.1, &AnalysisOptions::default()).unwrap();
        assert_eq!(v.kind_name(), "inconsistent", "{f}");
        let c = v.certificate().unwrap();
        assert!(c.min_normalized_ssq() > c.threshold);
        assert!(c.remainder_profiles.iter().all(|p| p.sign_changes == 0));
    }
}

#[test]
fn domain_and_usage_errors() {
    assert!(matches!(
        solve_cnoidal(1, 0.1, 0.1, 1.5, Some(1.0)),
        Err(KdvError::Domain(_))
    ));
    assert!(matches!(
        solve_cnoidal(1, 0.1, 0.1, -0.2, Some(1.0)),
        Err(KdvError::Domain(_))
    ));
    assert!(matches!(
        solve_soliton(1, 0.1, 0.1, None),
        Err(KdvError::Usage(_))
    ));
    assert!(matches!(
        solve_soliton(4, 0.1, 0.1, None),
        Err(KdvError::Usage(_))
    ));
    assert!(matches!(
        solve_superposition(2, 2, 0.1, 0.1, 0.5, None),
        Err(KdvError::Usage(_))
    ));
}

#[test]
fn verdicts_do_not_depend_on_thread_count() {
    let sys = cached_system(AnsatzFamily::Soliton, 3).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let v = consistency_analysis(&sys, 0.1, 0.1, &AnalysisOptions::default()).unwrap();
            kdvlab::output::to_json_string(&v).unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}
