//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spherent::covering::{
    covering_number_oracle, lift_sphere_cover, oracle_covering, oracle_instance_size, verify_covering, OracleMode,
    Target,
};
use spherent::entropy::{
    entropy_lower, entropy_series, entropy_upper, estimates_to_csv, fit_upper, Body, EntropyOptions,
    RegimeConstants,
};
use spherent::geometry::{mazur_lipschitz_scan, run_suite, SuiteKind};
use spherent::norms::{
    fundamental_function_closed_form, fundamental_function_via_inverse, Exponent, NormSpec, OrliczSpec, WeightSpec,
};

type Outcome = Result<String, String>;

fn suite_specs(d: usize) -> Vec<NormSpec> {
    vec![
        NormSpec::lp(0.5, d).unwrap(),
        NormSpec::lp(1.0, d).unwrap(),
        NormSpec::lp(2.0, d).unwrap(),
        NormSpec::linf(d),
        NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), d).unwrap(),
        NormSpec::orlicz(OrliczSpec::PowerLog { p: 2.0, alpha: 1.0 }, d).unwrap(),
    ]
}

fn lp_or_inf(p: f64, d: usize) -> NormSpec {
    if p.is_infinite() {
        NormSpec::linf(d)
    } else {
        NormSpec::lp(p, d).unwrap()
    }
}

fn suite(kind: SuiteKind) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut pairs = 0;
    for d in 2..=6 {
        for spec in suite_specs(d) {
            let r = run_suite(kind, &spec, 10_000, 7).map_err(|e| format!("{} d={d}: {e}", spec.label()))?;
            pairs += r.pairs;
            if !r.passed() {
                failures.push(format!(
                    "{} d={d}: {} violations, {} off-range, worst excess {:e}",
                    r.norm, r.violations, r.range_violations, r.worst_excess
                ));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    Ok(format!("{pairs} pairs, 0 violations, {secs:.1}s"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let msg = suite(SuiteKind::Lipschitz)?;
    if start.elapsed().as_secs_f64() > 120.0 {
        return Err(format!("{msg}, over the 2 min budget"));
    }
    Ok(msg)
}

fn criterion_2() -> Outcome {
    suite(SuiteKind::Monotonicity)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    for d in 2..=4 {
        for spec in suite_specs(d) {
            for eps in [0.5, 0.25, 0.125] {
                let cover = lift_sphere_cover(&spec, eps).map_err(|e| format!("{} d={d}: {e}", spec.label()))?;
                let bound = (1usize << d) * d * ((1.0 / (2.0 * eps)).ceil() as usize).pow(d as u32 - 1);
                let report = verify_covering(&cover, &Target::Sphere(spec.clone()), 100_000, 11)
                    .map_err(|e| e.to_string())?;
                runs += 1;
                if cover.radius() != 2.0 * eps || !report.passed || cover.len() > bound {
                    failures.push(format!(
                        "{} d={d} eps={eps}: radius {} gap {:?} centers {} bound {bound}",
                        spec.label(),
                        cover.radius(),
                        report.max_gap,
                        cover.len()
                    ));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    if secs > 300.0 {
        return Err(format!("{runs} coverings certified but took {secs:.1}s, over 5 min"));
    }
    Ok(format!("{runs} coverings certified with 1e5 samples each, {secs:.1}s"))
}

/// Slopes keyed by `(d, p, q)` rendered as strings.
fn criterion_4(slopes: &mut HashMap<String, f64>) -> Outcome {
    let opts = EntropyOptions { skip_lower: true, seed: 3, ..Default::default() };
    let mut lines = Vec::new();
    let mut bad = Vec::new();
    for d in [2usize, 3] {
        let ks: Vec<u32> = (2 * d as u32..=8 * d as u32).collect();
        let target = -1.0 / (d as f64 - 1.0);
        for p in [0.5, 1.0, 2.0] {
            let spec = NormSpec::lp(p, d).unwrap();
            let mut by_q = Vec::new();
            for q in [Exponent::new(p), Exponent::INFINITY] {
                let series = entropy_series(&spec, Body::Sphere, q, &ks, &RegimeConstants::default(), &opts)
                    .map_err(|e| format!("d={d} p={p} q={q}: {e}"))?;
                let fit = fit_upper(&series).map_err(|e| e.to_string())?;
                slopes.insert(format!("{d},{p},{q}"), fit.slope);
                lines.push(format!("d={d} p={p} q={q} slope {:.4}", fit.slope));
                if (fit.slope - target).abs() > 0.2 * target.abs() {
                    bad.push(format!("d={d} p={p} q={q}: slope {:.4} vs {target:.4}", fit.slope));
                }
                by_q.push(series);
            }
            let factor = (d as f64).powf(1.0 / p);
            for (a, b) in by_q[0].iter().zip(&by_q[1]) {
                if a.upper.value != b.upper.value * factor {
                    bad.push(format!("d={d} p={p} k={}: factorization not exact", a.k));
                }
            }
        }
    }
    if bad.is_empty() {
        Ok(lines.join(", "))
    } else {
        Err(bad.join("; "))
    }
}

fn criterion_5(slopes: &HashMap<String, f64>) -> Outcome {
    let slope = match slopes.get("3,0.5,inf") {
        Some(s) => *s,
        None => {
            let spec = NormSpec::lp(0.5, 3).unwrap();
            let ks: Vec<u32> = (6..=24).collect();
            let opts = EntropyOptions { skip_lower: true, seed: 3, ..Default::default() };
            let s = entropy_series(&spec, Body::Sphere, Exponent::INFINITY, &ks, &RegimeConstants::default(), &opts)
                .map_err(|e| e.to_string())?;
            fit_upper(&s).map_err(|e| e.to_string())?.slope
        }
    };
    let (sphere, volume) = (-0.5, -1.0 / (3.0 - 0.5));
    let msg = format!(
        "slope {slope:.4}: distance {:.4} to {sphere}, {:.4} to {volume}",
        (slope - sphere).abs(),
        (slope - volume).abs()
    );
    if (slope - sphere).abs() < (slope - volume).abs() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_6() -> Outcome {
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut uncertified = 0;
    for d in [2usize, 3] {
        for p in [0.5, 1.0, f64::INFINITY] {
            let spec = lp_or_inf(p, d);
            let sub = spec.with_dim(d - 1).unwrap();
            for k in 1..=12 {
                let u = entropy_upper(&spec, Body::Sphere, Exponent::INFINITY, k, &EntropyOptions::default())
                    .map_err(|e| e.to_string())?;
                let l = entropy_lower(&sub, Body::Ball, Exponent::INFINITY, k).map_err(|e| e.to_string())?;
                checked += 1;
                if !l.certified() {
                    uncertified += 1;
                }
                if l.value > u.value {
                    violations.push(format!("d={d} p={p} k={k}: {} > {}", l.value, u.value));
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{checked} cells, 0 violations, {uncertified} without a packing certificate"))
    } else {
        Err(violations.join("; "))
    }
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let l1d = NormSpec::linf(1);
    let l2d = NormSpec::linf(2);
    let third = covering_number_oracle(&Target::Ball(l1d.clone()), &l1d, 1.0 / 3.0, 64, OracleMode::Exact)
        .map_err(|e| e.to_string())?;
    let square = covering_number_oracle(&Target::Ball(l2d.clone()), &l2d, 0.5, 64, OracleMode::Exact)
        .map_err(|e| e.to_string())?;
    if third != 3 || square != 4 {
        return Err(format!("hand values: got {third} and {square}, expected 3 and 4"));
    }
    notes.push("hand values 3 and 4".to_string());
    let instances = [
        (Target::Ball(NormSpec::linf(1)), 0.1, 64),
        (Target::Sphere(NormSpec::linf(2)), 0.25, 24),
        (Target::Sphere(NormSpec::lp(2.0, 2).unwrap()), 0.3, 32),
        (Target::Ball(NormSpec::lp(1.0, 2).unwrap()), 0.25, 24),
        (Target::Ball(NormSpec::lp(1.0, 2).unwrap()), 0.4, 24),
        (Target::Ball(NormSpec::lp(0.5, 2).unwrap()), 0.25, 24),
        (Target::Ball(NormSpec::lp(2.0, 2).unwrap()), 0.35, 20),
    ];
    let mut worst: f64 = 0.0;
    for (target, eps, res) in instances {
        let metric = NormSpec::linf(target.dim());
        let g = covering_number_oracle(&target, &metric, eps, res, OracleMode::Greedy).map_err(|e| e.to_string())?;
        let x = covering_number_oracle(&target, &metric, eps, res, OracleMode::Exact).map_err(|e| e.to_string())?;
        let n = oracle_instance_size(&target, res).map_err(|e| e.to_string())?;
        let bound = (n as f64).ln() + 1.0;
        worst = worst.max(g as f64 / x as f64);
        if x > g || g as f64 > bound * x as f64 {
            return Err(format!("{target:?} eps={eps}: greedy {g}, exact {x}, bound factor {bound:.2}"));
        }
    }
    notes.push(format!("7 instances, worst greedy/exact {worst:.3}"));
    Ok(notes.join(", "))
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [0.5, 1.0] {
        let sups: Vec<f64> = [2usize, 4, 8, 16, 32]
            .iter()
            .map(|d| mazur_lipschitz_scan(p, *d, 10_000, 13).map(|s| s.sup_ratio))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let max = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = sups.iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= max <= 1.25 * min;
        parts.push(format!("p={p}: sup in [{min:.4}, {max:.4}]"));
    }
    if ok {
        Ok(parts.join(", "))
    } else {
        Err(parts.join(", "))
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let p = [1.0, 1.5, 2.0, 3.0, 7.5][t % 5];
        let d = rng.gen_range(1..=16);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let a = NormSpec::orlicz(OrliczSpec::Power { p }, d).unwrap().eval(&x);
        let b = NormSpec::lp(p, d).unwrap().eval(&x);
        worst = worst.max((a - b).abs() / b.max(f64::MIN_POSITIVE));
    }
    if worst > 1e-10 {
        return Err(format!("Orlicz power vs l_p relative gap {worst:e}"));
    }

    // Standard Lorentz norms l_{p,q}, q < p, weight t^{1/p - 1/q}.
    let n = 10_000;
    let mut ratio_max: f64 = 0.0;
    for (p, q) in [(2.0, 1.0), (3.0, 1.0), (4.0, 2.0), (3.0, 2.0)] {
        let spec = NormSpec::lorentz(q, WeightSpec::Power(1.0 / p - 1.0 / q), n).unwrap();
        for k in 1..=n {
            let lam = fundamental_function_closed_form(&spec, k).unwrap();
            let r = lam / (k as f64).powf(1.0 / p);
            ratio_max = ratio_max.max(r.max(1.0 / r));
        }
        for k in [1, 10, 100, 1000, n] {
            let ones: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
            let direct = spec.eval(&ones);
            let lam = fundamental_function_closed_form(&spec, k).unwrap();
            if (direct - lam).abs() > 1e-10 * lam {
                return Err(format!("Lorentz lambda({k}) direct {direct} vs sum {lam}"));
            }
        }
    }
    if ratio_max > 4.0 {
        return Err(format!("Lorentz lambda(k)/k^(1/p) reached {ratio_max}"));
    }

    let mut lam_gap: f64 = 0.0;
    let mut compared = 0;
    for m in [
        OrliczSpec::Power { p: 1.5 },
        OrliczSpec::Power { p: 4.0 },
        OrliczSpec::ExpInvSquare,
        OrliczSpec::PowerLog { p: 2.0, alpha: 1.0 },
        OrliczSpec::PowerLog { p: 3.0, alpha: 0.5 },
    ] {
        let spec = NormSpec::orlicz(m, 64).unwrap();
        for k in 1..=64 {
            let ones: Vec<f64> = (0..64).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
            let bisection = spec.eval(&ones);
            let numeric = fundamental_function_via_inverse(&spec, k).unwrap();
            let mut formulas = vec![numeric];
            formulas.extend(fundamental_function_closed_form(&spec, k));
            for f in formulas {
                lam_gap = lam_gap.max((f - bisection).abs() / bisection);
                compared += 1;
            }
        }
    }
    if lam_gap > 1e-8 {
        return Err(format!("Orlicz lambda formula vs bisection relative gap {lam_gap:e}"));
    }
    Ok(format!(
        "Orlicz/l_p gap {worst:.1e}, Lorentz ratio max {ratio_max:.3}, {compared} Orlicz lambda pairs within {lam_gap:.1e}"
    ))
}

fn report_bundle() -> String {
    let mut out = String::new();
    let half = NormSpec::lp(0.5, 4).unwrap();
    let r = run_suite(SuiteKind::Lipschitz, &half, 500, 21).unwrap();
    out += &serde_json::to_string(&r).unwrap();
    let lor = NormSpec::lorentz(1.0, WeightSpec::Power(-0.5), 3).unwrap();
    let cover = lift_sphere_cover(&lor, 0.125).unwrap();
    out += &serde_json::to_string(&cover).unwrap();
    out += &cover.to_csv();
    let v = verify_covering(&cover, &Target::Sphere(lor), 20_000, 21).unwrap();
    out += &serde_json::to_string(&v).unwrap();
    let l1 = NormSpec::lp(1.0, 3).unwrap();
    let ks: Vec<u32> = (6..=12).collect();
    let opts = EntropyOptions { samples: 20_000, seed: 21, ..Default::default() };
    let s = entropy_series(&l1, Body::Sphere, Exponent::INFINITY, &ks, &RegimeConstants::default(), &opts).unwrap();
    let fit = fit_upper(&s).unwrap();
    out += &estimates_to_csv(&s, Some(&fit));
    out += &serde_json::to_string(&s).unwrap();
    let l2 = NormSpec::lp(2.0, 2).unwrap();
    let oc = oracle_covering(&Target::Ball(l2), &NormSpec::linf(2), 0.4, 24, OracleMode::Exact).unwrap();
    out += &serde_json::to_string(&oc).unwrap();
    out += &serde_json::to_string(&mazur_lipschitz_scan(0.5, 8, 2000, 21).unwrap()).unwrap();
    out
}

fn criterion_10() -> Outcome {
    let runs: Vec<String> = [1usize, 3]
        .iter()
        .map(|t| rayon::ThreadPoolBuilder::new().num_threads(*t).build().unwrap().install(report_bundle))
        .collect();
    let again = report_bundle();
    if runs[0] == runs[1] && runs[0] == again {
        Ok(format!("{} bytes identical across 3 runs (1 and 3 worker threads)", again.len()))
    } else {
        Err("reports differ between runs".into())
    }
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(m) => println!("PASS criterion {n:>2} {name} [{secs:.1}s]: {m}"),
        Err(m) => println!("FAIL criterion {n:>2} {name} [{secs:.1}s]: {m}"),
    }
    outcome.is_ok()
}

fn main() {
    let mut slopes = HashMap::new();
    let results = [
        run(1, "shift Lipschitz suite", criterion_1),
        run(2, "shift monotonicity suite", criterion_2),
        run(3, "sphere lift certificate", criterion_3),
        run(4, "rate reproduction", || criterion_4(&mut slopes)),
        run(5, "sphere exponent beats volume exponent", || criterion_5(&slopes)),
        run(6, "projection lower bound", criterion_6),
        run(7, "oracle equivalence", criterion_7),
        run(8, "Mazur map Lipschitz bound", criterion_8),
        run(9, "norm family cross-checks", criterion_9),
        run(10, "determinism", criterion_10),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
