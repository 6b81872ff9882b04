//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass substrings as arguments to run a subset.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use proxcd::harness::{
    gen_nonuniform, gen_uniform, reference_solution, run_experiment, ExperimentSpec, Mode,
};
use proxcd::oracles::{EnvelopeOracle, Oracle, QuadraticProblem, SoftMaxProblem};
use proxcd::solvers::{
    accelerated_proximal, cdm_run, inner_budget_from_ratios, optimal_h, outer_budget, prng,
    CoordinateSampler, ExactProx, Prng,
};
use proxcd::{SolverConfig, SolverKind, SolverRun};
use rand::Rng;
use rand_distr::StandardNormal;

const META_RATE_CONSTANT: f64 = 48.0 / 5.0;
const META_SEEDS: u64 = 20;
const META_ITERS: u64 = 200;

const CDM_DIM: usize = 10;
const CDM_SEEDS: u64 = 500;
const CDM_STEPS: [u64; 3] = [50, 100, 200];
const CDM_SLACK: f64 = 2.0;

const CONSISTENCY_STEPS: usize = 100_000;
const CONSISTENCY_TOL: f64 = 1e-8;
const FD_POINTS: usize = 100;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;

const AMORTIZED_STEPS: u64 = 100_000;
const AMORTIZED_CAP: f64 = 1.2;
const AMORTIZED_BAND: f64 = 0.10;

const E2E_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const E2E_REL_GAP: f64 = 1e-3;
const E2E_REQUIRED_WINS: usize = 4;
const E2E_REF_TOL: f64 = 1e-9;

const SAMPLING_DIM: usize = 100;
const SAMPLING_DRAWS: usize = 1_000_000;
const SAMPLING_ABS_TOL: f64 = 0.01;
const SAMPLING_MAX_SIGMA: f64 = 5.0;

type Check = fn() -> (bool, String);

fn main() -> ExitCode {
    let checks: [(&str, Check); 8] = [
        ("meta_rate", meta_rate),
        ("cdm_linear_rate", cdm_linear_rate),
        ("budget_formulas", budget_formulas),
        ("oracle_consistency", oracle_consistency),
        ("amortized_cost", amortized_cost),
        ("end_to_end_ordering", end_to_end_ordering),
        ("sampling_law", sampling_law),
        ("determinism", determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let (pass, detail) = check();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {detail} ({:.1} s)", t0.elapsed().as_secs_f64());
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn uniform(rng: &mut Prng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn meta_rate() -> (bool, String) {
    let n = 50;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for seed in 0..META_SEEDS {
        let mut rng = prng(seed);
        let d: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.1, 10.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let q = QuadraticProblem::new(d.clone(), w.clone()).unwrap();
        let h = optimal_h(&d).unwrap();
        let r2: f64 = w.iter().map(|v| v * v).sum();
        let x0 = vec![0.0; n];
        let cfg = SolverConfig {
            time_budget: 3600.0,
            ..Default::default()
        };
        let mut prox = ExactProx(|c: &[f64], hh: f64| q.envelope_minimizer(c, hh));
        let run = accelerated_proximal(&q, &x0, h, META_ITERS, &cfg, "meta", &mut prox).unwrap();
        let records: Vec<_> = run.trace.records.iter().filter(|r| r.iter >= 1).collect();
        assert_eq!(records.len() as u64, META_ITERS, "trace must hold every outer iterate");
        for r in records {
            let k = r.iter as f64;
            let bound = META_RATE_CONSTANT * h * r2 / (k * k);
            worst = worst.max(r.f_value / bound);
            if r.f_value > bound {
                violations += 1;
            }
        }
    }
    (
        violations == 0,
        format!(
            "{violations} violations of f(v_k) - f* <= 9.6 H R^2/k^2 over {META_SEEDS} seeds x k in [1,{META_ITERS}], worst ratio {worst:.3}"
        ),
    )
}

fn cdm_linear_rate() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut pass = true;
    for problem_seed in 0..3u64 {
        let mut rng = prng(1000 + problem_seed);
        let d: Vec<f64> = (0..CDM_DIM).map(|_| uniform(&mut rng, 0.1, 10.0)).collect();
        let w: Vec<f64> = (0..CDM_DIM).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let center: Vec<f64> = (0..CDM_DIM).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let q = QuadraticProblem::new(d.clone(), w).unwrap();
        let h = optimal_h(&d).unwrap();
        let env = EnvelopeOracle::new(&q, center.clone(), h).unwrap();
        let ell = env.component_lipschitz();
        let z: f64 = ell.iter().sum();
        let sampler = CoordinateSampler::new(&ell).unwrap();
        let inv: Vec<f64> = ell.iter().map(|l| 1.0 / l).collect();
        let f_star = env.value(&q.envelope_minimizer(&center, h)).unwrap();
        let gap0 = env.value(&center).unwrap() - f_star;

        let mut sums = [0.0; CDM_STEPS.len()];
        for seed in 0..CDM_SEEDS {
            let mut rng = prng(seed);
            let mut st = env.init_state(center.clone()).unwrap();
            let mut done = 0;
            for (slot, &n_steps) in CDM_STEPS.iter().enumerate() {
                cdm_run(&env, &mut st, &sampler, &inv, n_steps - done, &mut rng).unwrap();
                done = n_steps;
                sums[slot] += env.value(env.point(&st)).unwrap() - f_star;
            }
        }
        for (slot, &n_steps) in CDM_STEPS.iter().enumerate() {
            let mean = sums[slot] / CDM_SEEDS as f64;
            let bound = CDM_SLACK * (1.0 - h / z).powi(n_steps as i32) * gap0;
            worst = worst.max(mean / bound);
            pass &= mean <= bound;
        }
    }
    (
        pass,
        format!(
            "mean gap / (2 (1-H/Z)^N gap0) at N in {CDM_STEPS:?} over {CDM_SEEDS} seeds, 3 problems: worst {worst:.3e}"
        ),
    )
}

fn budget_formulas() -> (bool, String) {
    let inner = inner_budget_from_ratios(10.0, 1.0, 1.0);
    let outer = outer_budget(1.0, 1.0, 1.0);
    (
        inner == 40 && outer == 4,
        format!("inner(Z/H=10, L=H, N/delta=1) = {inner} (want 40), outer(HR^2/eps=1) = {outer} (want 4)"),
    )
}

/// `∇_i f(y)` from scratch through row access, and the magnitude of the
/// summands it cancels.
fn fresh_component(p: &SoftMaxProblem, y: &[f64], i: usize) -> (f64, f64) {
    let a = p.matrix();
    let gamma = p.gamma();
    let z: Vec<f64> = (0..a.rows())
        .map(|j| {
            let (cols, vals) = a.row(j);
            cols.iter().zip(vals).map(|(&c, &v)| v * y[c]).sum::<f64>() / gamma
        })
        .collect();
    let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = e.iter().sum();
    let (rows, vals) = a.col(i);
    let mut sum = 0.0;
    let mut mag = 0.0;
    for (&r, &v) in rows.iter().zip(vals) {
        sum += v * e[r] / total;
        mag += v.abs() * e[r] / total;
    }
    (sum - p.b()[i], mag + p.b()[i].abs())
}

fn oracle_consistency() -> (bool, String) {
    let p = gen_uniform(500, 500, 0.2, 0.6, 21).unwrap();
    let n = p.dim();
    let lips = p.component_lipschitz();
    let mut rng = prng(22);
    let y0: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut st = p.init_state(y0).unwrap();
    let mut worst_cache = 0.0f64;
    for step in 0..CONSISTENCY_STEPS {
        let i = rng.random_range(0..n);
        let cached = p.component_gradient(&st, i);
        let (fresh, mag) = fresh_component(&p, p.point(&st), i);
        worst_cache = worst_cache.max((cached - fresh).abs() / mag.max(f64::MIN_POSITIVE));
        let delta = if step % 2 == 0 {
            -cached / lips[i]
        } else {
            2.0 * rng.sample::<f64, _>(StandardNormal)
        };
        p.apply_step(&mut st, i, delta).unwrap();
    }

    let mut worst_fd = 0.0f64;
    for _ in 0..FD_POINTS {
        let y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let g = p.gradient(&y).unwrap();
        let mut yp = y.clone();
        let mut diff2 = 0.0;
        for i in 0..n {
            yp[i] = y[i] + FD_STEP;
            let up = p.value(&yp).unwrap();
            yp[i] = y[i] - FD_STEP;
            let down = p.value(&yp).unwrap();
            yp[i] = y[i];
            let fd = (up - down) / (2.0 * FD_STEP);
            diff2 += (fd - g[i]).powi(2);
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst_fd = worst_fd.max(diff2.sqrt() / norm);
    }
    (
        worst_cache <= CONSISTENCY_TOL && worst_fd <= FD_TOL,
        format!(
            "cached vs fresh component gradient over {CONSISTENCY_STEPS} steps: max rel dev {worst_cache:.2e} (tol {CONSISTENCY_TOL:.0e}); finite differences at {FD_POINTS} points: max rel err {worst_fd:.2e} (tol {FD_TOL:.0e})"
        ),
    )
}

fn amortized_cost() -> (bool, String) {
    let (m, density) = (1000usize, 0.2);
    let p = gen_uniform(m, 1000, density, 0.6, 31).unwrap();
    let h = optimal_h(&p.component_lipschitz()).unwrap();
    let center = vec![0.0; p.dim()];
    let env = EnvelopeOracle::new(&p, center.clone(), h).unwrap();
    let ell = env.component_lipschitz();
    let sampler = CoordinateSampler::new(&ell).unwrap();
    let inv: Vec<f64> = ell.iter().map(|l| 1.0 / l).collect();
    let mut st = env.init_state(center).unwrap();
    let w0 = env.work(&st);
    cdm_run(&env, &mut st, &sampler, &inv, AMORTIZED_STEPS, &mut prng(32)).unwrap();
    let mean = (env.work(&st) - w0) as f64 / AMORTIZED_STEPS as f64;
    let predicted = density * m as f64 + 1.0;
    let cap = AMORTIZED_CAP * density * m as f64;
    let rel = (mean - predicted).abs() / predicted;
    (
        mean <= cap && rel <= AMORTIZED_BAND,
        format!(
            "mean units per inner step {mean:.1}; predicted density*m + 1 = {predicted:.0} (off by {:.1}%), cap {cap:.0}",
            rel * 100.0
        ),
    )
}

fn first_cost(run: &SolverRun, f_star: f64, gap: f64) -> Option<u64> {
    run.trace.first_reaching(f_star, gap).map(|r| r.cost_units)
}

fn end_to_end_ordering() -> (bool, String) {
    let mut wins = 0;
    let mut lines = Vec::new();
    let mut fgm_ratios = Vec::new();
    let mut verify_ratios = Vec::new();
    for seed in E2E_SEEDS {
        let p = gen_nonuniform(1000, 2000, 0.6, seed).unwrap();
        let x0 = vec![0.0; p.dim()];
        let reference = reference_solution(&p, E2E_REF_TOL, 120.0).unwrap();
        let f0 = p.value(&x0).unwrap();
        let target = E2E_REL_GAP * (f0 - reference.f_star);
        let base = SolverConfig {
            eps: target,
            delta: 0.1,
            f_star: Some(reference.f_star),
            time_budget: 600.0,
            seed,
            ..Default::default()
        };

        let ccdm = SolverKind::Ccdm.run(&p, &x0, &base).unwrap();
        let c_ccdm = first_cost(&ccdm, reference.f_star, target);
        // Competitors only need to be followed up to the cost Catalyst used.
        let cap = c_ccdm.unwrap_or(ccdm.cost_units).max(1);
        let capped = SolverConfig {
            cost_budget: Some(cap),
            ..base.clone()
        };
        let cdm = SolverKind::Cdm.run(&p, &x0, &capped).unwrap();
        let gm = SolverKind::Gm.run(&p, &x0, &capped).unwrap();
        let fgm_cfg = SolverConfig {
            cost_budget: Some(cap.saturating_mul(10)),
            ..base.clone()
        };
        let fgm = SolverKind::Fgm.run(&p, &x0, &fgm_cfg).unwrap();
        let verify_cfg = SolverConfig {
            verify_stop: true,
            ..base.clone()
        };
        let ccdm_verify = SolverKind::Ccdm.run(&p, &x0, &verify_cfg).unwrap();

        let c_cdm = first_cost(&cdm, reference.f_star, target);
        let c_gm = first_cost(&gm, reference.f_star, target);
        let c_fgm = first_cost(&fgm, reference.f_star, target);
        let c_verify = first_cost(&ccdm_verify, reference.f_star, target);
        let beats = |other: Option<u64>| match (c_ccdm, other) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            (None, _) => false,
        };
        let won = beats(c_cdm) && beats(c_gm);
        wins += won as usize;
        if let (Some(a), Some(b)) = (c_ccdm, c_fgm) {
            fgm_ratios.push(a as f64 / b as f64);
        }
        if let (Some(a), Some(b)) = (c_verify, c_cdm) {
            verify_ratios.push(a as f64 / b as f64);
        }
        let show = |c: Option<u64>| c.map_or("not reached".to_string(), |v| format!("{v:.3e}", v = v as f64));
        lines.push(format!(
            "seed {seed}: ccdm {} cdm {} gm {} fgm {} ccdm(verify stop) {}",
            show(c_ccdm),
            show(c_cdm),
            show(c_gm),
            show(c_fgm),
            show(c_verify)
        ));
    }
    let fmt_ratios = |r: &[f64]| r.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(", ");
    (
        wins >= E2E_REQUIRED_WINS,
        format!(
            "ccdm beat cdm and gm in cost to 1e-3 relative gap in {wins}/{} seeds (need {E2E_REQUIRED_WINS}); ccdm/fgm cost ratios [{}]; ccdm(verify stop)/cdm ratios [{}]\n    {}",
            E2E_SEEDS.len(),
            fmt_ratios(&fgm_ratios),
            fmt_ratios(&verify_ratios),
            lines.join("\n    ")
        ),
    )
}

fn sampling_law() -> (bool, String) {
    let mut rng = prng(41);
    let lips: Vec<f64> = (0..SAMPLING_DIM).map(|_| uniform(&mut rng, 0.1, 10.0)).collect();
    let h = optimal_h(&lips).unwrap();
    let weights: Vec<f64> = lips.iter().map(|l| h + l).collect();
    let z: f64 = weights.iter().sum();
    let sampler = CoordinateSampler::new(&weights).unwrap();
    let mut counts = vec![0usize; SAMPLING_DIM];
    for _ in 0..SAMPLING_DRAWS {
        counts[sampler.sample(&mut rng)] += 1;
    }
    let draws = SAMPLING_DRAWS as f64;
    let mut max_abs = 0.0f64;
    let mut max_sigma = 0.0f64;
    for (c, w) in counts.iter().zip(&weights) {
        let p = w / z;
        let freq = *c as f64 / draws;
        max_abs = max_abs.max((freq - p).abs());
        max_sigma = max_sigma.max((*c as f64 - draws * p).abs() / (draws * p * (1.0 - p)).sqrt());
    }
    (
        max_abs <= SAMPLING_ABS_TOL && max_sigma <= SAMPLING_MAX_SIGMA,
        format!(
            "{SAMPLING_DRAWS} draws over n={SAMPLING_DIM}: max |freq - p_i| = {max_abs:.2e} (tol {SAMPLING_ABS_TOL}), max deviation {max_sigma:.2} sigma (tol {SAMPLING_MAX_SIGMA})"
        ),
    )
}

fn strip_wall(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|line| {
            let mut f: Vec<&str> = line.split(',').collect();
            f.remove(4);
            f.join(",")
        })
        .collect()
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<String>> {
    fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, strip_wall(&fs::read_to_string(&p).unwrap()))
        })
        .collect()
}

fn determinism() -> (bool, String) {
    let p = gen_nonuniform(60, 80, 0.6, 51).unwrap();
    let x0 = vec![0.0; p.dim()];
    let mut identical_runs = true;
    for kind in SolverKind::ALL {
        let cfg = SolverConfig {
            seed: 52,
            max_iters: Some(match kind {
                SolverKind::Gm | SolverKind::Fgm => 100,
                SolverKind::Cdm | SolverKind::Acdm => 4000,
                SolverKind::Ccdm => 10,
            }),
            ..Default::default()
        };
        let a = kind.run(&p, &x0, &cfg).unwrap();
        let b = kind.run(&p, &x0, &cfg).unwrap();
        let bits = |r: &SolverRun| r.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        let records = |r: &SolverRun| {
            r.trace
                .records
                .iter()
                .map(|t| (t.iter, t.cost_units, t.f_value.to_bits()))
                .collect::<Vec<_>>()
        };
        identical_runs &= bits(&a) == bits(&b) && records(&a) == records(&b) && a.cost_units == b.cost_units;
    }

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<_> = dirs
        .iter()
        .map(|dir| {
            let spec = ExperimentSpec {
                mode: Mode::Nonuniform,
                m: 60,
                n: 80,
                seeds: vec![7, 8],
                solver: SolverConfig {
                    seed: 53,
                    cost_budget: Some(2_000_000),
                    ..Default::default()
                },
                out: dir.path().to_path_buf(),
                ref_time_cap: 30.0,
                ..Default::default()
            };
            run_experiment(&spec).unwrap();
            csv_files(dir.path())
        })
        .collect();
    let identical_csvs = outputs[0].len() == 10 && outputs[0] == outputs[1];
    (
        identical_runs && identical_csvs,
        format!(
            "bit-identical iterates and traces for all five solvers: {identical_runs}; {} CSVs identical except wall_ms: {identical_csvs}",
            outputs[0].len()
        ),
    )
}
