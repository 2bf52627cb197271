//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every instance family is drawn from a fixed seed.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use phc_order::geometry::{integrate, wulff_support, SphericalFunctionSamples};
use phc_order::kernels::{glue, inverse_sphere_kernel, moment_residual, sphere_kernel, transport_residual};
use phc_order::lp::{self, LinearProgram, LpOutcome, LpTolerances};
use phc_order::measures::{
    coarsen, first_moment, homogeneous_marginal, lift, mass, ph_equivalent, w1, DiscreteMeasure, Norm, Point,
};
use phc_order::order::{barycentric_cost, check_cx, check_phc, dual_probe, OrderVerdict};
use phc_order::Tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::golden;
use common::lp_oracle::best_vertex;

const RESIDUAL_TOL: f64 = 1e-7;
const GAP_TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn suite() -> Vec<(DiscreteMeasure, DiscreteMeasure)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..500).map(|k| common::instance_pair(&mut rng, k)).collect()
}

/// `Ok(holds)` when the witness verifies, `Err(reason)` otherwise.
fn verify_verdict(mu: &DiscreteMeasure, nu: &DiscreteMeasure, v: &OrderVerdict) -> Result<bool, String> {
    if v.holds {
        let q = v.kernel().ok_or("holding verdict without kernel")?;
        let t = transport_residual(q, mu, nu).map_err(|e| e.to_string())?;
        let m = moment_residual(q, mu, 1e-9).map_err(|e| e.to_string())?;
        if t > RESIDUAL_TOL || m > RESIDUAL_TOL {
            return Err(format!("kernel residuals {t:e} / {m:e}"));
        }
        Ok(true)
    } else {
        let f = v.support_certificate().ok_or("failing verdict without certificate")?;
        let gap = integrate(f, mu) - integrate(f, nu);
        if gap < GAP_TOL {
            return Err(format!("certificate gap {gap:e}"));
        }
        Ok(false)
    }
}

fn criterion_1(pairs: &[(DiscreteMeasure, DiscreteMeasure)]) -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut holding = 0;
    for (k, (mu, nu)) in pairs.iter().enumerate() {
        match check_phc(mu, nu, &tol) {
            Ok(v) => match verify_verdict(mu, nu, &v) {
                Ok(h) => holding += h as usize,
                Err(e) => bad.push(format!("#{k}: {e}")),
            },
            Err(e) => bad.push(format!("#{k}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = bad.is_empty() && secs < 10.0;
    outcome(
        passed,
        format!(
            "{} pairs, {holding} hold, {} unverified, {secs:.2} s (limit 10 s){}",
            pairs.len(),
            bad.len(),
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
}

fn criterion_2(pairs: &[(DiscreteMeasure, DiscreteMeasure)]) -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut contradictions = 0;
    let mut probe_failures = 0;
    for (k, (mu, nu)) in pairs.iter().enumerate() {
        let pieces = rng.random_range(1..=4);
        let probe = dual_probe(mu, nu, 256, pieces, k as u64, RESIDUAL_TOL).expect("probe runs");
        let holds = check_phc(mu, nu, &tol).map(|v| v.holds).unwrap_or(false);
        if !probe.passed {
            probe_failures += 1;
        }
        if holds && !probe.passed {
            contradictions += 1;
        }
    }
    outcome(
        contradictions == 0,
        format!("{probe_failures} probe refutations, {contradictions} contradictions"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..200 {
        let dim = common::random_dim(&mut rng);
        let m = common::off_origin_measure(&mut rng, dim);
        let marginal = homogeneous_marginal(&m, 1e-9);
        let forward = sphere_kernel(&m, 1e-9);
        let Ok(inverse) = inverse_sphere_kernel(&m, 1e-9) else {
            errors += 1;
            continue;
        };
        let Ok(glued) = glue(&forward, &inverse) else {
            errors += 1;
            continue;
        };
        let residuals = [
            transport_residual(&forward, &m, &marginal),
            moment_residual(&forward, &m, 1e-9),
            transport_residual(&inverse, &marginal, &m),
            moment_residual(&inverse, &marginal, 1e-9),
            transport_residual(&glued, &m, &m),
            moment_residual(&glued, &m, 1e-9),
        ];
        for r in residuals {
            match r {
                Ok(r) => worst = worst.max(r),
                Err(_) => errors += 1,
            }
        }
    }
    outcome(
        errors == 0 && worst <= RESIDUAL_TOL,
        format!("200 measures, worst residual {worst:e}, {errors} errors"),
    )
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut disagreements = 0;
    let mut equivalent = 0;
    for k in 0..200 {
        let dim = common::random_dim(&mut rng);
        let (mu, nu) = if k % 2 == 0 {
            let mu = common::uniform_measure(&mut rng, dim, 4);
            let nu = common::same_marginal(&mut rng, &mu);
            (mu, nu)
        } else {
            (common::uniform_measure(&mut rng, dim, 6), common::uniform_measure(&mut rng, dim, 6))
        };
        let forward = check_phc(&mu, &nu, &tol).map(|v| v.holds);
        let backward = check_phc(&nu, &mu, &tol).map(|v| v.holds);
        let (Ok(f), Ok(b)) = (forward, backward) else {
            disagreements += 1;
            continue;
        };
        let kernels_both_ways = f && b;
        let same_marginal = ph_equivalent(&mu, &nu, RESIDUAL_TOL);
        equivalent += same_marginal as usize;
        if kernels_both_ways != same_marginal {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0,
        format!("200 pairs, {equivalent} equivalent, {disagreements} disagreements"),
    )
}

fn criterion_5() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut disagreements = 0;
    let mut holding = 0;
    let mut worst_row: f64 = 0.0;
    for k in 0..200 {
        let dim = rng.random_range(1..=2);
        let mu = common::uniform_measure(&mut rng, dim, 3);
        let nu = if k % 2 == 0 {
            common::martingale_image(&mut rng, &mu)
        } else {
            common::match_mass(&mu, &common::uniform_measure(&mut rng, dim, 6))
        };
        let cx = check_cx(&mu, &nu, &tol);
        let phc = check_phc(&lift(&mu), &lift(&nu), &tol);
        let (Ok(cx), Ok(phc)) = (cx, phc) else {
            disagreements += 1;
            continue;
        };
        if cx.holds != phc.holds {
            disagreements += 1;
            continue;
        }
        if phc.holds {
            holding += 1;
            let projected = phc.kernel().expect("kernel").project().expect("lifted dimension ≥ 2");
            for (i, a) in mu.atoms().iter().enumerate() {
                if a.w > tol.tol {
                    worst_row = worst_row.max((projected.row_mass(i) - 1.0).abs());
                }
            }
            let t = transport_residual(&projected, &mu, &nu).unwrap_or(f64::INFINITY);
            let m = moment_residual(&projected, &mu, tol.tol).unwrap_or(f64::INFINITY);
            worst_row = worst_row.max(t).max(m);
        }
    }
    outcome(
        disagreements == 0 && worst_row <= RESIDUAL_TOL,
        format!("200 pairs, {holding} hold, {disagreements} disagreements, worst row-mass/residual error {worst_row:e}"),
    )
}

fn criterion_6(pairs: &[(DiscreteMeasure, DiscreteMeasure)]) -> Outcome {
    let tol = Tolerances::default();
    let mut zero_set = 0;
    for (mu, nu) in pairs {
        let holds = check_phc(mu, nu, &tol).map(|v| v.holds).unwrap_or(false);
        let cost = barycentric_cost(mu, nu, Norm::L1, &tol).map(|c| c.value);
        match cost {
            Ok(c) if (c <= RESIDUAL_TOL) == holds => {}
            _ => zero_set += 1,
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut w1_bound = 0;
    for _ in 0..100 {
        let dim = common::random_dim(&mut rng);
        let mu = common::uniform_measure(&mut rng, dim, 6).normalized();
        let nu = common::uniform_measure(&mut rng, dim, 6).normalized();
        let c = barycentric_cost(&mu, &nu, Norm::L1, &tol).map(|c| c.value);
        let d = w1(&mu, &nu, Norm::L1);
        match (c, d) {
            (Ok(c), Ok(d)) if c <= d + RESIDUAL_TOL => {}
            _ => w1_bound += 1,
        }
    }

    let mut triangle = 0;
    for _ in 0..100 {
        let dim = common::random_dim(&mut rng);
        let mu = common::uniform_measure(&mut rng, dim, 6);
        let nu = common::uniform_measure(&mut rng, dim, 6);
        let rho = common::uniform_measure(&mut rng, dim, 6);
        let s = common::scale(&[&mu, &nu, &rho]);
        let cost = |a: &DiscreteMeasure, b: &DiscreteMeasure| barycentric_cost(a, b, Norm::L1, &tol).map(|c| c.value);
        match (cost(&mu, &rho), cost(&mu, &nu), cost(&nu, &rho)) {
            (Ok(ac), Ok(ab), Ok(bc)) if ac <= ab + bc + RESIDUAL_TOL * s => {}
            _ => triangle += 1,
        }
    }
    outcome(
        zero_set + w1_bound + triangle == 0,
        format!("(a) {zero_set} zero-set mismatches in 500, (b) {w1_bound} W1-bound violations in 100, (c) {triangle} triangle violations in 100"),
    )
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut moment_errors = 0;
    let mut cx_failures = 0;
    let mut envelope = 0;
    let mut final_bound = 0;
    let mut worst_final: f64 = 0.0;
    for _ in 0..50 {
        let dim = common::random_dim(&mut rng);
        let m = common::uniform_measure(&mut rng, dim, 6);
        let spread: f64 = m.atoms().iter().map(|a| a.w * a.x.norm()).sum::<f64>().max(1.0);
        let base = m.normalized();
        let root_d = (dim as f64).sqrt();
        for n in [1usize, 2, 4, 8, 16] {
            let c = coarsen(&m, n).expect("nonempty measure");
            let dm = (mass(&c) - mass(&m)).abs();
            let dx = Point(
                first_moment(&c)
                    .iter()
                    .zip(first_moment(&m).iter())
                    .map(|(a, b)| a - b)
                    .collect(),
            )
            .norm();
            if dm > 1e-12 * mass(&m).max(1.0) || dx > 1e-12 * spread {
                moment_errors += 1;
            }
            if !check_cx(&c, &m, &tol).map(|v| v.holds).unwrap_or(false) {
                cx_failures += 1;
            }
            let d = w1(&c.normalized(), &base, Norm::L2).unwrap_or(f64::INFINITY);
            if d > root_d / n as f64 + RESIDUAL_TOL {
                envelope += 1;
            }
            if n == 16 {
                worst_final = worst_final.max(d * 16.0 / root_d);
                if d.is_nan() || d >= root_d / 16.0 {
                    final_bound += 1;
                }
            }
        }
    }
    outcome(
        moment_errors + cx_failures + envelope + final_bound == 0,
        format!(
            "50 measures × 5 levels: {moment_errors} moment errors, {cx_failures} cx failures, {envelope} over √d/n, \
             {final_bound} at n = 16 not below √d/16 (worst ratio {worst_final:.3})"
        ),
    )
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(1..=4);
    let integer = rng.random_bool(0.5);
    let entry = |rng: &mut ChaCha8Rng| {
        if integer {
            rng.random_range(-3i32..=3) as f64
        } else {
            rng.random_range(-3.0..=3.0)
        }
    };
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| entry(rng)).collect()).collect();
    let b: Vec<f64> = if rng.random_bool(0.6) {
        let x0: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..=2.0) })
            .collect();
        a.iter().map(|row| row.iter().zip(&x0).map(|(a, x)| a * x).sum()).collect()
    } else {
        (0..m).map(|_| entry(rng)).collect()
    };
    let nonneg = rng.random_bool(0.5);
    let c: Vec<f64> = (0..n)
        .map(|_| {
            let v = entry(rng);
            if nonneg {
                v.abs()
            } else {
                v
            }
        })
        .collect();
    LinearProgram::new(c, a, b).expect("well-formed program")
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tol = LpTolerances::default();
    let mut mismatches = Vec::new();
    let (mut optimal, mut infeasible, mut unbounded) = (0, 0, 0);
    for k in 0..300 {
        let p = random_lp(&mut rng);
        let oracle = best_vertex(p.objective(), p.constraints(), p.rhs());
        match lp::solve(&p, tol) {
            Ok(LpOutcome::Optimal { value, .. }) => {
                optimal += 1;
                match oracle {
                    Some(v) if (v - value).abs() <= RESIDUAL_TOL * v.abs().max(1.0) => {}
                    other => mismatches.push(format!("#{k}: simplex {value}, oracle {other:?}")),
                }
            }
            Ok(LpOutcome::Infeasible { farkas }) => {
                infeasible += 1;
                let aty = p.apply_transpose(&farkas);
                let margin = -p.rhs().iter().zip(&farkas).map(|(b, y)| b * y).sum::<f64>();
                if oracle.is_some() || aty.iter().any(|v| *v < -1e-9) || margin < GAP_TOL {
                    mismatches.push(format!("#{k}: infeasible, oracle {oracle:?}, margin {margin:e}"));
                }
            }
            Ok(LpOutcome::Unbounded { ray }) => {
                unbounded += 1;
                let ar = p.apply(&ray);
                let cr: f64 = p.objective().iter().zip(&ray).map(|(c, r)| c * r).sum();
                if oracle.is_none() || ray.iter().any(|r| *r < 0.0) || ar.iter().any(|v| v.abs() > 1e-9) || cr >= 0.0 {
                    mismatches.push(format!("#{k}: unbounded, oracle {oracle:?}, ⟨c,r⟩ = {cr:e}"));
                }
            }
            Err(e) => mismatches.push(format!("#{k}: {e}")),
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "300 programs ({optimal} optimal, {infeasible} infeasible, {unbounded} unbounded), {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|m| format!("; first: {m}")).unwrap_or_default()
        ),
    )
}

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    let mut built = 0;
    while built < 100 {
        let k = rng.random_range(3..=10);
        let center = [rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)];
        let pts: Vec<[f64; 2]> = (0..k)
            .map(|_| [center[0] + rng.random_range(-2.0..=2.0), center[1] + rng.random_range(-2.0..=2.0)])
            .collect();
        let hull = convex_hull(pts);
        if hull.len() < 3 {
            continue;
        }
        built += 1;
        let facets: Vec<(Vec<f64>, f64)> = (0..hull.len())
            .map(|i| {
                let (p, q) = (hull[i], hull[(i + 1) % hull.len()]);
                let normal = vec![q[1] - p[1], p[0] - q[0]];
                let offset = normal[0] * p[0] + normal[1] * p[1];
                (normal, offset)
            })
            .collect();
        let samples = SphericalFunctionSamples::from_halfspaces(2, &facets).expect("nondegenerate facets");
        for _ in 0..5 {
            let w = [rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)];
            let brute = hull
                .iter()
                .map(|v| v[0] * w[0] + v[1] * w[1])
                .fold(f64::NEG_INFINITY, f64::max);
            match wulff_support(&samples, &w) {
                Ok(h) => worst = worst.max((h - brute).abs() / brute.abs().max(1.0)),
                Err(_) => errors += 1,
            }
        }
    }
    outcome(
        errors == 0 && worst <= RESIDUAL_TOL,
        format!("100 polytopes × 5 directions, worst relative error {worst:e}, {errors} errors"),
    )
}

fn criterion_10() -> Outcome {
    let mut problems = Vec::new();
    for case in golden::CASES {
        let expected = golden::expected_stdout(case);
        let first = golden::run_binary(case.args);
        let second = golden::run_binary(case.args);
        if first.stdout != second.stdout {
            problems.push(format!("{}: output differs between runs", case.name));
        }
        if first.stdout != expected {
            problems.push(format!("{}: output differs from golden file", case.name));
        }
        if first.code != case.exit || second.code != case.exit {
            problems.push(format!("{}: exit {} (expected {})", case.name, first.code, case.exit));
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} cases, {} problems{}",
            golden::CASES.len(),
            problems.len(),
            problems.first().map(|p| format!("; first: {p}")).unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let pairs = suite();
    let results = [
        ("1 check_phc soundness", criterion_1(&pairs)),
        ("2 check_phc vs dual probing", criterion_2(&pairs)),
        ("3 sphere kernel constructions", criterion_3()),
        ("4 homogeneous-marginal equivalence", criterion_4()),
        ("5 convex order via lifting", criterion_5()),
        ("6 barycentric cost", criterion_6(&pairs)),
        ("7 grid discretization", criterion_7()),
        ("8 LP oracle agreement", criterion_8()),
        ("9 Wulff support oracle", criterion_9()),
        ("10 golden CLI corpus", criterion_10()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.passed as usize;
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
