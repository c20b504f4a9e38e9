//! One PASS/FAIL line per acceptance criterion, with runtimes.
//!
//! `QBATTERY_FULL_SEARCH=1` adds the (6,2) conjecture search.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use qbattery::cli::{execute, CommonArgs, Command};
use qbattery::conjecture::{search, SearchConfig};
use qbattery::evolution::{first_passage, propagate};
use qbattery::experiments::{global_flip_comparison, random_bound_case, random_pair_schedule, saturating_comparison, trotter_errors};
use qbattery::metrics::{qsl_time, ComparisonOptions, ConstraintKind, ConstraintValues};
use qbattery::operator::{op_norm, LocalTerm, Operator, Partition, RngStream};
use qbattery::protocols::{global_product_protocol, locality_profile, parallel_protocol, InternalHamiltonian, Schedule, Segment};
use qbattery::states::{ball_check, thermal_state, BallStatus};

type Criterion = (&'static str, Option<Duration>, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn expected_gamma(kind: ConstraintKind, scale: usize) -> f64 {
    match kind {
        ConstraintKind::C1 => (scale as f64).sqrt(),
        _ => scale as f64,
    }
}

fn global_product_advantage() -> Verdict {
    let options = ComparisonOptions::default();
    let (mut gamma_err, mut spread, mut work_err) = (0.0f64, 0.0f64, 0.0f64);
    for n in 2..=6 {
        for kind in ConstraintKind::ALL {
            let mut gammas = Vec::new();
            for eps in [0.01, 0.1, 1.0] {
                let r = match global_flip_comparison(n, eps, kind, &options) {
                    Ok(c) => c.report,
                    Err(e) => return verdict(false, format!("N={n} eps={eps} {kind}: {e}")),
                };
                let g = expected_gamma(kind, n);
                gamma_err = gamma_err.max((r.gamma - g).abs() / g);
                work_err = work_err.max((r.work_parallel - n as f64 * (eps / 2.0).tanh()).abs());
                gammas.push(r.gamma);
            }
            let hi = gammas.iter().cloned().fold(f64::MIN, f64::max);
            let lo = gammas.iter().cloned().fold(f64::MAX, f64::min);
            spread = spread.max(hi - lo);
        }
    }
    verdict(
        gamma_err <= 1e-6 && spread <= 1e-9 && work_err <= 1e-8,
        format!("max rel gamma err {gamma_err:.2e} (<=1e-6), eps spread {spread:.2e} (<=1e-9), work err {work_err:.2e} (<=1e-8)"),
    )
}

fn separable_ball() -> Verdict {
    let (n, eps) = (6, 0.01);
    let internal = InternalHamiltonian::unit_gap_qubit();
    let run = || -> qbattery::Result<_> {
        let s = global_product_protocol(&Operator::sigma_x(), &internal, n, 1.0, FRAC_PI_2)?;
        let rho0 = thermal_state(&internal.site_operator(), eps)?.tensor_power(n)?;
        propagate(&s, &rho0, 64)
    };
    let traj = match run() {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let checks: Vec<_> = traj.states().iter().map(ball_check).collect();
    let radii: Vec<f64> = checks.iter().map(|c| c.frobenius_radius).collect();
    let spread = radii.iter().cloned().fold(f64::MIN, f64::max) - radii.iter().cloned().fold(f64::MAX, f64::min);
    // ||rho - 1/D||_F^2 = tr rho^2 - 1/D with tr rho^2 = (p^2 + q^2)^N
    let p = 1.0 / (1.0 + (-eps).exp());
    let analytic = ((p * p + (1.0 - p) * (1.0 - p)).powi(n as i32) - 1.0 / 64.0).sqrt();
    let inside = checks.iter().all(|c| c.verdict == BallStatus::WithinDocumentedBound);
    verdict(
        spread <= 1e-10 && inside && (radii[0] - analytic).abs() < 1e-12,
        format!(
            "{} samples, radius {:.6e} (analytic {:.6e}), spread {spread:.2e} (<=1e-10), threshold {:.6e}",
            radii.len(),
            radii[0],
            analytic,
            checks[0].threshold
        ),
    )
}

fn klocal_saturation() -> Verdict {
    let options = ComparisonOptions::default();
    let mut worst = 0.0f64;
    for (n, k) in [(4, 2), (6, 2), (6, 3)] {
        for kind in ConstraintKind::ALL {
            match saturating_comparison(n, k, 2, kind, &options) {
                Ok(c) => worst = worst.max((c.report.gamma - expected_gamma(kind, k)).abs()),
                Err(e) => return verdict(false, format!("N={n} k={k} {kind}: {e}")),
            }
        }
    }
    verdict(worst <= 1e-6, format!("max |gamma - expected| {worst:.2e} (<=1e-6)"))
}

fn bound_suite() -> Verdict {
    const CASES: u64 = 200;
    let options = ComparisonOptions::default();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let cases = match pool.install(|| (0..CASES).into_par_iter().map(|i| random_bound_case(2024, i, 6, &options)).collect::<qbattery::Result<Vec<_>>>()) {
        Ok(c) => c,
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut checked = std::collections::BTreeMap::<String, (usize, usize)>::new();
    let mut chain_fail = 0;
    for c in &cases {
        chain_fail += usize::from(!c.chain_ok);
        for r in &c.reports {
            for (name, b) in &r.bounds {
                if let Some(pass) = b.pass {
                    let e = checked.entry(format!("{}:{name}", r.constraint)).or_default();
                    e.0 += 1;
                    e.1 += usize::from(!pass);
                }
            }
        }
    }
    let required = ["C0:power", "C0:klocal_disjoint", "C1:qsl_c1", "C2:qsl_c2"];
    let all_present = required.iter().all(|k| checked.get(*k).is_some_and(|(n, _)| *n == CASES as usize));
    let fails: usize = checked.values().map(|(_, f)| f).sum();
    let max_n = cases.iter().map(|c| c.n_batteries).max().unwrap_or(0);
    let summary: Vec<String> = checked.iter().map(|(k, (n, f))| format!("{k} {}/{n}", n - f)).collect();
    verdict(
        chain_fail == 0 && fails == 0 && all_present && max_n <= 6,
        format!("{} cases, N<=6, chain failures {chain_fail}, {}", cases.len(), summary.join(", ")),
    )
}

fn qsl_saturation() -> Verdict {
    let run = || -> qbattery::Result<(f64, f64)> {
        let internal = InternalHamiltonian::unit_gap_qubit();
        let task = qbattery::experiments::ground_to_top_task(1, 2)?;
        let s = parallel_protocol(&Operator::sigma_x(), &internal, 1, 2.0)?;
        let t = first_passage(&s, &task.rho, &task.sigma, 1e-8)?;
        let v = ConstraintValues::of(&propagate(&s.truncated(t)?, &task.rho, 32)?);
        Ok((t, t / qsl_time(&task.rho, &task.sigma, 1, v.mean_energy, v.std_energy)?))
    };
    match run() {
        Ok((t, beta)) => verdict(
            (beta - 1.0).abs() <= 1e-8 && (t - FRAC_PI_2).abs() <= 1e-8,
            format!("T = {t:.12} (pi/2 {FRAC_PI_2:.12}), beta = {beta:.12}"),
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn schedule_on(n: usize, parts: &[&[usize]], rng: &mut RngStream) -> Schedule {
    let terms = parts
        .iter()
        .map(|p| {
            let h = Operator::new(rng.hermitian(1 << p.len()), 2, p.len()).unwrap();
            LocalTerm::new(Partition::new(p.to_vec(), n).unwrap(), h.scaled(1.0 / op_norm(&h))).unwrap()
        })
        .collect();
    Schedule::new(n, InternalHamiltonian::unit_gap_qubit(), vec![Segment { duration: 1.0, terms }]).unwrap()
}

fn trotter_machinery() -> Verdict {
    let mut rng = RngStream::new(6, 0);
    let examples: [(usize, &[&[usize]]); 3] =
        [(3, &[&[0, 1]]), (3, &[&[0, 1], &[1, 2], &[0, 2]]), (6, &[&[0, 1, 2], &[0, 3, 4], &[1, 3, 5], &[2, 4, 5]])];
    let ms: Vec<usize> = examples.iter().map(|(n, p)| locality_profile(&schedule_on(*n, p, &mut rng)).groups).collect();
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let mut rng = RngStream::new(100 + seed, 0);
        let s = random_pair_schedule(&mut rng, 1.0).unwrap();
        match trotter_errors(&s, &[8, 16, 32, 64]) {
            Ok(e) => ratios.extend(e.windows(2).map(|w| w[0] / w[1])),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    verdict(ms == [1, 3, 4] && lo >= 1.7 && hi <= 2.3, format!("M = {ms:?}, error ratios in [{lo:.4}, {hi:.4}] over {} doublings", ratios.len()))
}

fn conjecture_search() -> Verdict {
    let mut sizes = vec![(3, 2), (4, 2), (4, 3)];
    if std::env::var("QBATTERY_FULL_SEARCH").is_ok_and(|v| v == "1") {
        sizes.push((6, 2));
    }
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, k) in sizes {
        let mut config = SearchConfig::new(n, k, 10_000, 2024);
        config.workers = 4;
        config.timing = false;
        match search(&config) {
            Ok(out) => {
                let s = out.summary;
                let ce = out.records.iter().filter(|r| r.p_value > 1.0 + 1e-9).count();
                pass &= ce == 0 && s.samples == 10_000;
                parts.push(format!("({n},{k}) max P {:.4} P>1: {ce}", s.max_p.unwrap_or(f64::NAN)));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("({n},{k}) {e}"));
            }
        }
    }
    verdict(pass, format!("10^4 samples each, dual-path Y checked per sample; {}", parts.join("; ")))
}

fn bundle(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["global-flip", "klocal", "bounds", "conjecture-smoke"] {
        let cfg = tmp.path().join(format!("{name}.json"));
        std::fs::write(&cfg, format!(r#"{{"experiment":"{name}","seed":2024}}"#)).unwrap();
        let mut bundles = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{name}-{run}"));
            let args = CommonArgs { config: cfg.clone(), out: Some(out.clone()), seed: None, workers: Some(4) };
            match execute(&Command::Reproduce(args)) {
                Ok(o) if o.exit_code == 0 => bundles.push(bundle(&out)),
                Ok(o) => {
                    pass = false;
                    parts.push(format!("{name} exit {}", o.exit_code));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("{name}: {e}"));
                }
            }
        }
        if bundles.len() == 2 {
            let same = bundles[0] == bundles[1];
            pass &= same;
            parts.push(format!("{name} {} files {}", bundles[0].len(), if same { "identical" } else { "DIFFER" }));
        }
    }
    verdict(pass, parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("global product advantage", Some(Duration::from_secs(10)), global_product_advantage),
        ("separable ball persistence", Some(Duration::from_secs(10)), separable_ball),
        ("k-local saturation", Some(Duration::from_secs(30)), klocal_saturation),
        ("random bound suite", Some(Duration::from_secs(300)), bound_suite),
        ("speed-limit saturation", Some(Duration::from_secs(1)), qsl_saturation),
        ("grouping and Trotter error", Some(Duration::from_secs(60)), trotter_machinery),
        ("commutator-ratio search", Some(Duration::from_secs(1200)), conjecture_search),
        ("reproduce determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        let limit = limit.map_or(String::new(), |l| format!(", limit {} s", l.as_secs()));
        println!(
            "{} [{}] {name}: {} ({:.2} s{limit}{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
