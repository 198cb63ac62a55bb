//! End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use lpcloak::bench::{loglog_slope, run_bench, summarize, BenchConfig};
use lpcloak::linalg::{dot, norm_max, sub_vec, Lu};
use lpcloak::prelude::*;
use lpcloak::verify::Verdict;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Report {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report(name: &'static str, failures: &[String], detail: String) -> Report {
    let mut detail = detail;
    if let Some(first) = failures.first() {
        detail.push_str(&format!("; {} failure(s), first: {first}", failures.len()));
    }
    Report {
        name,
        passed: failures.is_empty(),
        detail,
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn direct_objective(p: &LpProblem, tol: &Tolerance) -> Result<Option<(Status, f64)>> {
    let r = proof_gen(&identity_view(p), tol)?;
    Ok(match r.outcome {
        Outcome::Optimal { y, .. } => Some((Status::Optimal, dot(&p.cost, &y))),
        Outcome::Infeasible { .. } => Some((Status::Infeasible, f64::NAN)),
        Outcome::Unbounded { .. } => Some((Status::Unbounded, f64::NAN)),
    })
}

fn round_trip_correctness() -> Report {
    let tol = Tolerance::default();
    let mut failures = Vec::new();
    let mut count = 0;
    for i in 0..222u64 {
        let n = 4 + (i as usize % 37);
        let m = n.div_ceil(2);
        count += 1;
        let outcome = (|| -> Result<(f64, f64)> {
            let p = generate(&GenOptions::new(n, m, Mode::Feasible), 1000 + i)?;
            let key = keygen(&p, 5000 + i)?;
            let e = prob_enc(&key, &p)?;
            let r = proof_gen(&e, &tol)?;
            let sol = result_dec(&key, &p, &r, &tol)?;
            let direct = direct_objective(&p, &tol)?.expect("status").1;
            Ok((sol.objective.unwrap_or(f64::NAN), direct))
        })();
        match outcome {
            Ok((obj, direct)) if rel_close(obj, direct, 1e-6) => {}
            Ok((obj, direct)) => failures.push(format!("seed {i} n={n}: {obj} vs {direct}")),
            Err(e) => failures.push(format!("seed {i} n={n}: {e}")),
        }
    }
    report(
        "round-trip correctness",
        &failures,
        format!("{count} instances, n in 4..=40, m = ceil(n/2), rel tol 1e-6"),
    )
}

fn oracle_status(o: &OracleOutcome) -> (Status, f64) {
    match o {
        OracleOutcome::Optimal { value, .. } => (Status::Optimal, *value),
        OracleOutcome::Infeasible => (Status::Infeasible, f64::NAN),
        OracleOutcome::Unbounded => (Status::Unbounded, f64::NAN),
    }
}

fn oracle_equivalence() -> Report {
    let tol = Tolerance::default();
    let mut failures = Vec::new();
    let mut count = 0;
    let mut seed = 0u64;
    for mode in [Mode::Feasible, Mode::Infeasible, Mode::Unbounded] {
        for n in 2..=6usize {
            for m in 1..=n {
                if mode == Mode::Unbounded && m == n {
                    continue;
                }
                for rep in 0..6 {
                    seed += 1;
                    let mut opts = GenOptions::new(n, m, mode);
                    opts.random_ineq = rep % 2 == 1;
                    let p = generate(&opts, seed).expect("generator");
                    count += 1;
                    let oracle = match enumerate_solve(&p, 1e-9) {
                        Ok(o) => oracle_status(&o),
                        Err(e) => {
                            failures.push(format!("seed {seed}: oracle error {e}"));
                            continue;
                        }
                    };
                    let via_key = keygen(&p, seed)
                        .and_then(|k| {
                            let e = prob_enc(&k, &p)?;
                            let r = proof_gen(&e, &tol)?;
                            result_dec(&k, &p, &r, &tol)
                        })
                        .map(|s| s.status);
                    match direct_objective(&p, &tol) {
                        Ok(Some((status, obj))) => {
                            if status != oracle.0 {
                                failures.push(format!("seed {seed}: {status:?} vs oracle {:?}", oracle.0));
                            } else if status == Status::Optimal && !rel_close(obj, oracle.1, 1e-9) {
                                failures.push(format!("seed {seed}: objective {obj} vs oracle {}", oracle.1));
                            }
                        }
                        Ok(None) => unreachable!(),
                        Err(e) => failures.push(format!("seed {seed}: solver error {e}")),
                    }
                    match via_key {
                        Ok(status) if status == oracle.0 => {}
                        Ok(status) => failures.push(format!("seed {seed}: disguised {status:?} vs oracle {:?}", oracle.0)),
                        Err(e) => failures.push(format!("seed {seed}: disguised pipeline error {e}")),
                    }
                }
            }
        }
    }
    report(
        "oracle equivalence",
        &failures,
        format!("{count} instances with n <= 6 across three modes, rel tol 1e-9"),
    )
}

/// Relative perturbation with a floor for zero components.
fn perturbations(v: &[f64]) -> Vec<(usize, f64)> {
    let scale = norm_max(v);
    (0..v.len())
        .flat_map(|i| {
            let delta = 1e-3 * v[i].abs().max(scale);
            [(i, delta), (i, -delta)]
        })
        .collect()
}

fn cheating_resilience() -> Report {
    let tol = Tolerance::default();
    let mut failures = Vec::new();
    let (mut instances, mut perturbed) = (0, 0);
    for i in 0..210u64 {
        let n = 4 + (i as usize % 17);
        let m = n.div_ceil(2);
        let (p, _) = generate_nondegenerate(n, m, 300 + i).expect("generator");
        let key = keygen(&p, 900 + i).expect("keygen");
        let e = prob_enc(&key, &p).expect("encrypt");
        let r = match proof_gen(&e, &tol) {
            Ok(r) => r,
            Err(err) => {
                failures.push(format!("seed {i}: {err}"));
                continue;
            }
        };
        let Outcome::Optimal { y, s, t } = &r.outcome else {
            failures.push(format!("seed {i}: not optimal"));
            continue;
        };
        instances += 1;
        if !check_optimal(&e, y, s, t, &tol).unwrap().is_accept() {
            failures.push(format!("seed {i}: honest certificate rejected"));
        }
        for which in 0..3 {
            let base = [y, s, t][which];
            for (k, delta) in perturbations(base) {
                let mut v = base.clone();
                v[k] += delta;
                let (yy, ss, tt) = match which {
                    0 => (&v, s, t),
                    1 => (y, &v, t),
                    _ => (y, s, &v),
                };
                perturbed += 1;
                if check_optimal(&e, yy, ss, tt, &tol).unwrap() == Verdict::Accept {
                    failures.push(format!("seed {i}: {} [{k}] += {delta:e} accepted", ["y", "s", "t"][which]));
                }
            }
        }
    }
    report(
        "cheating resilience",
        &failures,
        format!("{instances} nondegenerate instances, {perturbed} single-component perturbations of 1e-3"),
    )
}

fn certificate_trichotomy() -> Report {
    let tol = Tolerance::default();
    let mut failures = Vec::new();
    let mut counts = [0, 0];
    for (slot, mode) in [(0, Mode::Infeasible), (1, Mode::Unbounded)] {
        for i in 0..60u64 {
            let n = 3 + (i as usize % 6);
            let m = 1 + (i as usize % (n - 1));
            let mut opts = GenOptions::new(n, m, mode);
            opts.random_ineq = i % 2 == 0;
            let p = generate(&opts, 7000 + i).expect("generator");
            counts[slot] += 1;
            let expected = if mode == Mode::Infeasible {
                OracleOutcome::Infeasible
            } else {
                OracleOutcome::Unbounded
            };
            match enumerate_solve(&p, 1e-9) {
                Ok(o) if o == expected => {}
                other => failures.push(format!("{mode} seed {i}: oracle gave {other:?}")),
            }
            let checked = (|| -> Result<Verdict> {
                let key = keygen(&p, 8000 + i)?;
                let e = prob_enc(&key, &p)?;
                match proof_gen(&e, &tol)?.outcome {
                    Outcome::Infeasible { s, t } if mode == Mode::Infeasible => check_infeasible(&e, &s, &t, &tol),
                    Outcome::Unbounded { y0, d } if mode == Mode::Unbounded => check_unbounded(&e, &y0, &d, &tol),
                    other => Err(Error::NumericalInstability(format!("unexpected outcome {other:?}"))),
                }
            })();
            match checked {
                Ok(Verdict::Accept) => {}
                Ok(Verdict::Reject(r)) => failures.push(format!("{mode} seed {i}: rejected on {r}")),
                Err(e) => failures.push(format!("{mode} seed {i}: {e}")),
            }
        }
    }
    report(
        "certificate trichotomy",
        &failures,
        format!("{} infeasible and {} unbounded fixtures", counts[0], counts[1]),
    )
}

/// A point on `{y : A'y = b'}`: random `y₀` corrected by `A'ᵀw`.
fn point_on_affine_set<R: Rng>(e: &EncryptedProblem, rng: &mut R) -> Vec<f64> {
    let y0: Vec<f64> = (0..e.n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let residual = sub_vec(&e.rhs, &e.eq.mul_vec(&y0));
    let gram = e.eq.mul(&e.eq.transpose());
    let w = Lu::factor(&gram).solve(&residual);
    let correction = e.eq.tr_mul_vec(&w);
    y0.iter().zip(&correction).map(|(a, b)| a + b).collect()
}

fn bijection_invariant() -> Report {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut worst_eq, mut worst_ineq) = (0.0f64, 0.0f64);
    let count = 1050;
    for i in 0..count as u64 {
        let n = 2 + (i as usize % 19);
        let m = 1 + (i as usize % n);
        let mut opts = GenOptions::new(n, m, Mode::Feasible);
        opts.random_ineq = i % 2 == 0;
        let p = generate(&opts, 20_000 + i).expect("generator");
        let key = keygen(&p, 30_000 + i).expect("keygen");
        let e = prob_enc(&key, &p).expect("encrypt");
        let y = point_on_affine_set(&e, &mut rng);
        let x = key.m.mul_vec(&y);
        let eq_residual = norm_max(&sub_vec(&p.eq.mul_vec(&x), &p.rhs));
        let scale = (e.ineq.norm_inf() * norm_max(&y)).max(1.0);
        let ineq_residual = norm_max(&sub_vec(&p.ineq.mul_vec(&x), &e.ineq.mul_vec(&y)));
        worst_eq = worst_eq.max(eq_residual);
        worst_ineq = worst_ineq.max(ineq_residual / scale);
        if eq_residual > 1e-8 {
            failures.push(format!("sample {i}: ||A(My) - b|| = {eq_residual:e}"));
        }
        if ineq_residual > 1e-8 * scale {
            failures.push(format!("sample {i}: ||B(My) - B'y|| = {ineq_residual:e}, scale {scale:e}"));
        }
    }
    report(
        "feasible-region bijection",
        &failures,
        format!("{count} samples, worst equality residual {worst_eq:.1e}, worst scaled inequality residual {worst_ineq:.1e}"),
    )
}

fn one_time_key() -> Report {
    let mut failures = Vec::new();
    for i in 0..20u64 {
        let p = generate(&GenOptions::new(8, 4, Mode::Feasible), i).expect("generator");
        let a = keygen(&p, 11 + i).expect("keygen");
        let b = keygen(&p, 11 + i).expect("keygen");
        if a.to_json() != b.to_json() {
            failures.push(format!("seed {i}: key JSON differs"));
        }
        let ea = serde_json::to_string(&prob_enc(&a, &p).expect("encrypt")).unwrap();
        let eb = serde_json::to_string(&prob_enc(&b, &p).expect("encrypt")).unwrap();
        if ea != eb {
            failures.push(format!("seed {i}: encrypted JSON differs"));
        }
        for attempt in 0..3 {
            if !matches!(prob_enc(&a, &p), Err(Error::KeyReuse)) {
                failures.push(format!("seed {i}: reuse attempt {attempt} not refused"));
            }
        }
    }
    report(
        "one-time key and reproducibility",
        &failures,
        "20 problems, 3 reuse attempts each".into(),
    )
}

fn efficiency() -> Report {
    let sizes = vec![50, 100, 200, 400];
    let cfg = BenchConfig::new(sizes.clone(), 3, 2024);
    let records = match run_bench(&cfg) {
        Ok(r) => r,
        Err(e) => return report("efficiency", &[format!("bench failed: {e}")], String::new()),
    };
    let medians = summarize(&records);
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    for r in &medians {
        let ratio = r.t_verify / r.t_cloud_solve;
        ratios.push(format!("n={}: {ratio:.2e}", r.n));
        if r.n >= 200 && ratio > 0.05 {
            failures.push(format!("n={}: t_verify/t_cloud_solve = {ratio:.3}", r.n));
        }
    }
    let xs: Vec<f64> = medians.iter().map(|r| r.n as f64).collect();
    let verify: Vec<f64> = medians.iter().map(|r| r.t_verify).collect();
    let cloud: Vec<f64> = medians.iter().map(|r| r.t_cloud_solve).collect();
    let (sv, sc) = (loglog_slope(&xs, &verify), loglog_slope(&xs, &cloud));
    if sv > 2.5 {
        failures.push(format!("t_verify exponent {sv:.2} > 2.5"));
    }
    if sc < 2.5 {
        failures.push(format!("t_cloud_solve exponent {sc:.2} < 2.5"));
    }
    report(
        "efficiency",
        &failures,
        format!(
            "ratios [{}], exponents verify {sv:.2}, cloud {sc:.2}",
            ratios.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [fn() -> Report; 7] = [
        round_trip_correctness,
        oracle_equivalence,
        cheating_resilience,
        certificate_trichotomy,
        bijection_invariant,
        one_time_key,
        efficiency,
    ];
    let mut all = true;
    for (k, criterion) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = criterion();
        all &= r.passed;
        println!(
            "{} {}. {} ({:.1}s): {}",
            if r.passed { "PASS" } else { "FAIL" },
            k + 1,
            r.name,
            start.elapsed().as_secs_f64(),
            r.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
