//! One PASS/FAIL line per acceptance criterion. Exits nonzero only when a
//! criterion outside `KNOWN_FAILURES` fails.

use std::process::ExitCode;
use std::time::Instant;

use kdvlab::ansatz::{derive_conditions, same_condition, AnsatzFamily};
use kdvlab::evolve::{
    collision_experiment, evolve, measure_velocity, CollisionSetup, EvolveOptions,
};
use kdvlab::solver::{
    cached_system, consistency_analysis, solve_cnoidal, solve_soliton, solve_superposition,
    AnalysisOptions, Branch, ConsistencyVerdict, SolutionParams, VerdictKind,
};
use kdvlab::special::{complete_e, complete_k, jacobi_cn_sn_dn, EllipticParam};
use kdvlab::symbolic::{ConditionPolynomial, Symbol};
use kdvlab::verify::{eval_field, residual, GridSpec};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

mod common;
use common::{agm_k_e, landen_jacobi, poly};

use Symbol::{Alpha as Al, Beta as Be, A, B, D, M, S, V};

/// Criteria that fail for documented reasons (see README).
const KNOWN_FAILURES: [u32; 2] = [5, 6];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn has(family: AnsatzFamily, order: u32, p: &ConditionPolynomial) -> Result<bool, String> {
    let sys = derive_conditions(family, order).map_err(err)?;
    let found = sys.polynomials().any(|c| same_condition(c, p));
    Ok(found)
}

fn criterion_1() -> Outcome {
    let checks: Vec<(&str, AnsatzFamily, u32, ConditionPolynomial)> = vec![
        (
            "soliton G0",
            AnsatzFamily::Soliton,
            1,
            poly(&[
                (3, 1, &[]),
                (-3, 1, &[(V, 1)]),
                (9, 1, &[(Al, 1), (A, 1)]),
                (-10, 1, &[(Be, 1), (B, 2)]),
            ]),
        ),
        (
            "soliton G2",
            AnsatzFamily::Soliton,
            1,
            poly(&[(3, 1, &[]), (-3, 1, &[(V, 1)]), (2, 1, &[(Be, 1), (B, 2)])]),
        ),
        (
            "C0",
            AnsatzFamily::Soliton,
            2,
            poly(&[
                (1, 1, &[]),
                (-1, 1, &[(V, 1)]),
                (2, 3, &[(Be, 1), (B, 2)]),
                (38, 45, &[(Be, 2), (B, 4)]),
            ]),
        ),
        (
            "C2",
            AnsatzFamily::Soliton,
            2,
            poly(&[
                (3, 4, &[(Al, 1), (A, 1)]),
                (-1, 1, &[(Be, 1), (B, 2)]),
                (11, 4, &[(Al, 1), (A, 1), (Be, 1), (B, 2)]),
                (-19, 3, &[(Be, 2), (B, 4)]),
            ]),
        ),
        (
            "C4",
            AnsatzFamily::Soliton,
            2,
            poly(&[
                (-1, 8, &[(Al, 2), (A, 2)]),
                (-43, 12, &[(Al, 1), (A, 1), (Be, 1), (B, 2)]),
                (19, 3, &[(Be, 2), (B, 4)]),
            ]),
        ),
        (
            "cnoidal g0",
            AnsatzFamily::Cnoidal,
            1,
            poly(&[
                (4, 1, &[(Be, 1), (B, 2)]),
                (-8, 1, &[(Be, 1), (B, 2), (M, 1)]),
                (-9, 1, &[(Al, 1), (D, 1)]),
                (6, 1, &[(V, 1)]),
                (-6, 1, &[]),
            ]),
        ),
        (
            "F0",
            AnsatzFamily::SuperpositionPlus,
            1,
            poly(&[
                (9, 1, &[(Al, 1), (A, 1)]),
                (-9, 1, &[(Al, 1), (A, 1), (M, 1)]),
                (-2, 1, &[(Be, 1), (B, 2)]),
                (10, 1, &[(Be, 1), (B, 2), (M, 1)]),
                (18, 1, &[(Al, 1), (D, 1)]),
                (-12, 1, &[(V, 1)]),
                (12, 1, &[]),
            ]),
        ),
        (
            "F2",
            AnsatzFamily::SuperpositionPlus,
            1,
            poly(&[
                (9, 1, &[(Al, 1), (A, 1), (M, 1)]),
                (-12, 1, &[(Be, 1), (B, 2), (M, 1)]),
            ]),
        ),
    ];
    // G0 is not an independent entry: in sech powers it is G2 + 3(3αA - 4βB²)
    let h = poly(&[(3, 1, &[(Al, 1), (A, 1)]), (-4, 1, &[(Be, 1), (B, 2)])]);
    for (name, family, order, p) in &checks {
        let target = if *name == "soliton G0" { &h } else { p };
        ensure(
            has(*family, *order, target)?,
            format!("{name} not reproduced"),
        )?;
    }
    let f2 = &checks[7].3;
    let f11 = poly(&[
        (9, 1, &[(Al, 1), (A, 1), (S, 1)]),
        (-12, 1, &[(Be, 1), (B, 2), (S, 1)]),
    ]);
    ensure(same_condition(f2, &f11), "F2 and F11 not proportional")?;
    let sup = derive_conditions(AnsatzFamily::SuperpositionPlus, 1).map_err(err)?;
    let merged = sup
        .conditions
        .iter()
        .find(|c| same_condition(&c.polynomial, f2))
        .ok_or("F2 missing")?;
    ensure(merged.monomials.len() == 2, "F2 ∝ F11 not detected")?;
    Ok(format!(
        "{} conditions matched exactly, F2 ∝ F11 merged",
        checks.len()
    ))
}

fn rejected_and_emitted(v: &ConsistencyVerdict) -> Result<(f64, f64), String> {
    match &v.kind {
        VerdictKind::Discrete {
            solutions,
            rejected,
        } if solutions.len() == 1 && rejected.len() == 1 => Ok((rejected[0].z, solutions[0].z)),
        _ => Err(format!("unexpected verdict {}", v.kind_name())),
    }
}

fn criterion_2() -> Outcome {
    let v = solve_soliton(2, 0.1, 0.1, None).map_err(err)?;
    let (z1, z2) = rejected_and_emitted(&v)?;
    let r = 2305f64.sqrt();
    let (e1, e2) = ((43.0 - r) / 152.0, (43.0 + r) / 152.0);
    ensure(
        (z1 - e1).abs() < 1e-12 && (z2 - e2).abs() < 1e-12,
        format!("roots {z1}, {z2}"),
    )?;
    ensure(
        (z1 + 0.033).abs() < 1e-3 && (z2 - 0.599).abs() < 1e-3,
        "printed approximations",
    )?;
    Ok(format!("z1 = {z1:.15}, z2 = {z2:.15}"))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for &al in &[0.01, 0.05, 0.1, 0.2, 0.3] {
        for &be in &[0.01, 0.05, 0.1, 0.2, 0.3] {
            let v = solve_soliton(2, al, be, None).map_err(err)?;
            let s = v.solutions()[0].clone();
            let d = [
                (s.amplitude * al - 0.242399).abs(),
                (s.inverse_width.powi(2) * be - 0.145137).abs(),
                (s.v - 1.11455).abs(),
            ];
            worst = d.iter().fold(worst, |w, x| w.max(*x));
        }
    }
    ensure(worst <= 1e-5, format!("largest deviation {worst:.3e}"))?;
    Ok(format!("25 (α, β) pairs, largest deviation {worst:.3e}"))
}

fn all_solutions(order: u32, m: f64) -> Result<Vec<SolutionParams>, String> {
    let amp = (order == 1).then_some(1.0);
    let verdicts = [
        solve_soliton(order, 0.1, 0.1, amp),
        solve_cnoidal(order, 0.1, 0.1, m, amp),
        solve_superposition(order, 1, 0.1, 0.1, m, amp),
        solve_superposition(order, -1, 0.1, 0.1, m, amp),
    ];
    let mut out = Vec::new();
    for v in verdicts {
        out.extend(v.map_err(err)?.solutions().into_iter().cloned());
    }
    Ok(out)
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for order in [1, 2] {
        for &m in &[0.1, 0.5, 0.9] {
            for s in all_solutions(order, m)? {
                let r = residual(&s, order, &GridSpec::default_for(&s, 2048).map_err(err)?)
                    .map_err(err)?;
                ensure(
                    r.max_normalized <= 1e-9,
                    format!("{} order {order} m {m}: {:.3e}", s.family, r.max_normalized),
                )?;
                worst = worst.max(r.max_normalized);
                count += 1;
            }
        }
    }
    Ok(format!(
        "{count} solutions, max normalized residual {worst:.3e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for f in [
        AnsatzFamily::Soliton,
        AnsatzFamily::Cnoidal,
        AnsatzFamily::SuperpositionPlus,
        AnsatzFamily::SuperpositionMinus,
    ] {
        let sys = cached_system(f, 3).map_err(err)?;
        let v = consistency_analysis(&sys, 0.1, 0.1, &AnalysisOptions::default()).map_err(err)?;
        ensure(
            v.kind_name() == "inconsistent",
            format!("{f}: verdict {}", v.kind_name()),
        )?;
        let c = v.certificate().ok_or("no certificate")?;
        let doubled = AnalysisOptions {
            scan: Some(c.scan.options.doubled()),
            ..Default::default()
        };
        let v2 = consistency_analysis(&sys, 0.1, 0.1, &doubled).map_err(err)?;
        let c2 = v2.certificate().ok_or("doubled scan found a solution")?;
        let (s1, s2) = (c.min_normalized_ssq(), c2.min_normalized_ssq());
        let change = (s2 - s1).abs() / s1;
        let exact_ok = c.exact.as_ref().is_none_or(|e| e.admissible_roots == 0);
        ensure(
            exact_ok,
            format!("{f}: exact elimination found an admissible root"),
        )?;
        ensure(
            change < 0.1,
            format!("{f}: SSQ changed by {change:.2} under doubling"),
        )?;
        lines.push(format!("{f} {s1:.3e}"));
        if s1 <= 1e-4 {
            failed.push(f.to_string());
        }
    }
    let summary = format!("min SSQ: {}", lines.join(", "));
    if failed.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; below 1e-4 for {}", failed.join(", ")))
    }
}

fn criterion_6() -> Outcome {
    let sol = solve_soliton(2, 0.1, 0.1, None).map_err(err)?.solutions()[0].clone();
    let cn = solve_cnoidal(2, 0.1, 0.1, 1.0 - 1e-8, None).map_err(err)?;
    let z2 = cn.branch(Branch::Root(2)).ok_or("no z2 branch")?.clone();
    let rel = [
        ("A", z2.amplitude, sol.amplitude),
        ("B", z2.inverse_width, sol.inverse_width),
        ("v", z2.v, sol.v),
    ]
    .map(|(n, x, y)| (n, (x - y).abs() / y.abs()));
    let worst = rel.iter().fold(0.0f64, |w, r| w.max(r.1));
    let detail = rel
        .iter()
        .map(|(n, r)| format!("{n} {r:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(worst <= 1e-3, format!("relative differences {detail}"))?;
    Ok(format!("relative differences {detail}"))
}

fn criterion_7() -> Outcome {
    let mut largest = f64::NEG_INFINITY;
    for i in 1..20 {
        let m = 0.01 * i as f64;
        let v = solve_cnoidal(2, 0.1, 0.1, m, None).map_err(err)?;
        let s = v
            .branch(Branch::Root(1))
            .ok_or(format!("no z1 branch at m = {m}"))?;
        ensure(s.amplitude < 0.0, format!("A = {} at m = {m}", s.amplitude))?;
        largest = largest.max(s.amplitude);
    }
    Ok(format!(
        "19 values of m in (0, 0.2), largest A = {largest:.4}"
    ))
}

/// L∞ deviation at `t_final` from the traveling wave `s`, evolved under `order`.
fn evolve_soliton(
    s: &SolutionParams,
    order: u32,
    n: usize,
    t_final: f64,
) -> Result<(f64, f64, f64), String> {
    let l = 64.0 / s.inverse_width;
    let g = GridSpec::new(n, -0.5 * l, l).map_err(err)?;
    let init = eval_field(s, &g, 0.0).map_err(err)?;
    let run = evolve(&init, &EvolveOptions::new(order, s.alpha, s.beta, t_final)).map_err(err)?;
    let exact = eval_field(s, &g, t_final).map_err(err)?;
    let dev = run.final_field().linf_distance(&exact).map_err(err)?;
    Ok((dev, measure_velocity(&run).map_err(err)?, run.mass_drift()))
}

fn criterion_8() -> Outcome {
    let s2 = solve_soliton(2, 0.1, 0.1, None).map_err(err)?.solutions()[0].clone();
    let (dev, v2, _) = evolve_soliton(&s2, 2, 1024, 20.0)?;
    let s1 = solve_soliton(1, 0.1, 0.1, Some(1.0))
        .map_err(err)?
        .solutions()[0]
        .clone();
    let (_, v1, _) = evolve_soliton(&s1, 1, 1024, 20.0)?;
    ensure(dev <= 1e-3, format!("KdV2 shape error {dev:.3e}"))?;
    ensure(
        (v2 / 1.11455 - 1.0).abs() <= 5e-3,
        format!("KdV2 velocity {v2}"),
    )?;
    ensure(
        (v1 / 1.05 - 1.0).abs() <= 5e-3,
        format!("KdV velocity {v1}"),
    )?;
    Ok(format!("KdV2 L∞ {dev:.2e}, v {v2:.6}; KdV v {v1:.6}"))
}

fn criterion_9() -> Outcome {
    let s1 = solve_soliton(1, 0.1, 0.1, Some(1.0))
        .map_err(err)?
        .solutions()[0]
        .clone();
    let (same1, _, _) = evolve_soliton(&s1, 1, 1024, 20.0)?;
    let (cross1, _, _) = evolve_soliton(&s1, 2, 1024, 20.0)?;
    let s2 = solve_soliton(2, 0.1, 0.1, None).map_err(err)?.solutions()[0].clone();
    let (same2, _, _) = evolve_soliton(&s2, 2, 256, 20.0)?;
    let (cross2, _, _) = evolve_soliton(&s2, 3, 256, 20.0)?;
    let detail = format!(
        "KdV under KdV2 {cross1:.2e} vs {same1:.2e}; KdV2 under KdV3 {cross2:.2e} vs {same2:.2e}"
    );
    ensure(
        cross1 >= 10.0 * same1 && cross2 >= 10.0 * same2,
        detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_10() -> Outcome {
    let r1 = collision_experiment(&CollisionSetup::new(1, 0.1, 0.1, 1.0, 0.4)).map_err(err)?;
    let r2 = collision_experiment(&CollisionSetup::new(2, 0.1, 0.1, 1.0, 0.4)).map_err(err)?;
    ensure(
        !r1.inconclusive && !r2.inconclusive,
        "no reseparation before t_final",
    )?;
    let detail = format!(
        "radiation/initial: order 1 {:.3e}, order 2 {:.3e}",
        r1.radiation_ratio, r2.radiation_ratio
    );
    ensure(
        r1.radiation_ratio <= 1e-2 && r2.radiation_ratio > r1.radiation_ratio,
        detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_11() -> Outcome {
    let p = |m: f64| EllipticParam::new(m).map_err(err);
    let mut worst_id: f64 = 0.0;
    for &m in &[0.0, 0.1, 0.5, 0.9, 0.999] {
        let k = complete_k(p(m)?).map_err(err)?;
        for &u in &[-2.3, -0.5, 0.0, 0.4, 1.1, 3.7] {
            let t = jacobi_cn_sn_dn(u, p(m)?).map_err(err)?;
            let t4 = jacobi_cn_sn_dn(u + 4.0 * k, p(m)?).map_err(err)?;
            let t2 = jacobi_cn_sn_dn(u + 2.0 * k, p(m)?).map_err(err)?;
            for d in [
                t.sn * t.sn + t.cn * t.cn - 1.0,
                t.dn * t.dn + m * t.sn * t.sn - 1.0,
                t4.sn - t.sn,
                t4.cn - t.cn,
                t2.dn - t.dn,
                t2.cn + t.cn,
            ] {
                worst_id = worst_id.max(d.abs());
            }
        }
    }
    for &u in &[-1.3, 0.2, 2.9] {
        let t0 = jacobi_cn_sn_dn(u, p(0.0)?).map_err(err)?;
        let t1 = jacobi_cn_sn_dn(u, p(1.0)?).map_err(err)?;
        for d in [
            t0.sn - u.sin(),
            t0.cn - u.cos(),
            t0.dn - 1.0,
            t1.sn - u.tanh(),
            t1.cn - 1.0 / u.cosh(),
            t1.dn - 1.0 / u.cosh(),
        ] {
            worst_id = worst_id.max(d.abs());
        }
    }
    ensure(worst_id <= 1e-12, format!("identity error {worst_id:.2e}"))?;

    let mut rng = StdRng::seed_from_u64(20);
    let mut worst_or: f64 = 0.0;
    for _ in 0..20 {
        let u: f64 = rng.random_range(-10.0..10.0);
        let m: f64 = rng.random_range(0.0..0.999);
        let t = jacobi_cn_sn_dn(u, p(m)?).map_err(err)?;
        let (s, c, d) = landen_jacobi(u, m);
        let (k, e) = agm_k_e(m);
        for x in [
            t.sn - s,
            t.cn - c,
            t.dn - d,
            complete_k(p(m)?).map_err(err)? - k,
            complete_e(p(m)?).map_err(err)? - e,
        ] {
            worst_or = worst_or.max(x.abs());
        }
    }
    ensure(worst_or <= 1e-10, format!("oracle error {worst_or:.2e}"))?;
    Ok(format!(
        "identities {worst_id:.2e}, oracle at 20 random points {worst_or:.2e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 11] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    let mut unexpected = 0;
    for (i, f) in criteria.iter().enumerate() {
        let n = i as u32 + 1;
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&n);
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS ({detail}) [{secs:.1}s]"),
            Err(detail) => {
                let tag = if known { " (known)" } else { "" };
                println!("criterion {n}: FAIL{tag} ({detail}) [{secs:.1}s]");
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
