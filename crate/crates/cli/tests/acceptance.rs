//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdtrap::dynamics::{integrate_populations, Dynamics};
use qdtrap::estimation::fit_g2;
use qdtrap::estimation::fit_stretched;
use qdtrap::model::{case1_population_n2, metastable_population_n3, PowerLawTrapping, TwoLevelDecayParams};
use qdtrap::photon_stats::{hbt_correlate, hbt_split};
use qdtrap::rate_matrix::{exact_eigenvalues, g2_approx, steady_state, G2Exact, G2Params, RateSet};
use qdtrap::stochastic::{simulate_cw, CwExperimentConfig};
use qdtrap::synthetic::{g2_correlogram, poisson_sample, scale_to_total, stretched_histogram};
use qdtrap::StretchedDecayParams;
use qdtrap_cli::cli::Command as CliCommand;

const LIFETIME_EXPECTED_NS: f64 = 207.6;
const LIFETIME_REL_TOL: f64 = 0.01;
const LIFETIME_BUDGET: Duration = Duration::from_millis(1);

const RANDOM_RATESETS: usize = 1000;
const EIGEN_REL_TOL: f64 = 1e-10;
const EIGEN_BUDGET: Duration = Duration::from_secs(1);
const STEADY_REL_TOL: f64 = 1e-12;

const CASE1_ABS_TOL: f64 = 1e-8;
const POWER_LAW_REL_TOL: f64 = 1e-6;
const ODE_BUDGET: Duration = Duration::from_secs(5);

const TRPL_COUNTS: f64 = 1.0e6;
const INV_R_NS: f64 = 194.4;
const BETA: f64 = 0.876;
const INV_R_REL_TOL: f64 = 0.05;
const BETA_ABS_TOL: f64 = 0.02;
const TAU_REL_TOL: f64 = 0.05;
const FIT_BUDGET: Duration = Duration::from_secs(30);

const INV_LAMBDA1_NS: f64 = 0.8;
const INV_LAMBDA2_NS: f64 = 172.0;
const G2_TAIL_TOL: f64 = 1e-6;
const G2_FIT_REL_TOL: f64 = 1e-6;

const CW_MIN_PHOTONS: usize = 1_000_000;
const CW_BIN_FRACTION: f64 = 0.95;
const CW_SIGMAS: f64 = 3.0;
const CW_BUDGET: Duration = Duration::from_secs(120);

const SWEEP_TAU_LOW_NS: f64 = 200.0;
const SWEEP_TAU_HIGH_NS: f64 = 750.0;
const SWEEP_BETA_RANGE: (f64, f64) = (0.6, 0.9);
const SWEEP_BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn qdtrap(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_qdtrap")).args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
    }
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("took {elapsed:?}, budget {budget:?}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn random_rates(rng: &mut ChaCha8Rng) -> RateSet {
    let mut r = || log_uniform(rng, 1e-3, 10.0);
    RateSet { r12: r(), r21: r(), r13: r(), r31: r(), r32: r() }
}

#[rustfmt::skip]
fn generator(r: &RateSet) -> Matrix3<f64> {
    Matrix3::new(
        -(r.r12 + r.r13), r.r21, r.r31,
        r.r12, -r.r21, r.r32,
        r.r13, 0.0, -(r.r31 + r.r32),
    )
}

fn lifetime() -> Outcome {
    let out = qdtrap(&["lifetime", "194.4", "0.876"])?;
    let printed: f64 = out.trim().trim_end_matches(" ns").parse().map_err(|_| format!("unparseable output {out:?}"))?;
    ensure(rel(printed, LIFETIME_EXPECTED_NS) <= LIFETIME_REL_TOL, || format!("printed {printed} ns"))?;
    let cmd = CliCommand::Lifetime { inv_r_ns: 194.4, beta: 0.876, json: false };
    let mut best = Duration::MAX;
    for _ in 0..20 {
        let t = Instant::now();
        let (_, r) = qdtrap_cli::run(&cmd);
        r.map_err(|e| e.to_string())?;
        best = best.min(t.elapsed());
    }
    within_budget(best, LIFETIME_BUDGET)?;
    Ok(format!("printed {printed} ns, command time {best:?}"))
}

fn eigenvalues() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let (mut accepted, mut worst) = (0, 0.0f64);
    while accepted < RANDOM_RATESETS {
        let r = random_rates(&mut rng);
        let Ok((l1, l2, l3)) = exact_eigenvalues(&r) else { continue };
        accepted += 1;
        // numerical spectrum of the generator: eigenvalues are -λ
        let ev = generator(&r).schur().complex_eigenvalues();
        let mut num: Vec<f64> = ev.iter().map(|c| -c.re).collect();
        num.sort_by(|a, b| b.partial_cmp(a).unwrap());
        worst = worst.max(rel(l1, num[0])).max(rel(l2, num[1]));
        ensure(l3 == 0.0 && num[2].abs() <= 1e-12 * num[0], || format!("zero mode {l3} vs {}", num[2]))?;
    }
    let elapsed = start.elapsed();
    ensure(worst <= EIGEN_REL_TOL, || format!("worst relative error {worst:e}"))?;
    within_budget(elapsed, EIGEN_BUDGET)?;
    Ok(format!("{accepted} rate sets, worst rel error {worst:.2e}, {elapsed:?}"))
}

fn steady() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..RANDOM_RATESETS {
        let r = random_rates(&mut rng);
        // null space of the generator with the normalization replacing one row
        let mut m = generator(&r);
        m.set_row(2, &nalgebra::RowVector3::new(1.0, 1.0, 1.0));
        let p = m.lu().solve(&Vector3::new(0.0, 0.0, 1.0)).ok_or("singular generator")?;
        let closed = steady_state(&r).map_err(|e| e.to_string())?;
        worst = worst.max(rel(closed[1], p[1]));
    }
    ensure(worst <= STEADY_REL_TOL, || format!("worst relative error {worst:e}"))?;
    Ok(format!("{RANDOM_RATESETS} rate sets, worst rel error {worst:.2e}"))
}

fn ode_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_case1 = 0.0f64;
    for _ in 0..20 {
        let r21 = log_uniform(&mut rng, 0.05, 5.0);
        let r31 = log_uniform(&mut rng, 1e-3, 1.0);
        let r32 = log_uniform(&mut rng, 1e-3, 5.0);
        if rel(r21, r31 + r32) < 1e-3 {
            continue;
        }
        let n3 = rng.random::<f64>();
        let n2 = (1.0 - n3) * rng.random::<f64>();
        let p = TwoLevelDecayParams::from_rates(n2, n3, r21, r31, r32).map_err(|e| e.to_string())?;
        let horizon = 10.0 / r21.min(r31 + r32);
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * horizon / 200.0).collect();
        let traj = integrate_populations(&Dynamics::Relaxation { r21, r31, r32 }, [1.0 - n2 - n3, n2, n3], &grid)
            .map_err(|e| e.to_string())?;
        for (i, &t) in grid.iter().enumerate() {
            let exact = case1_population_n2(t, &p).map_err(|e| e.to_string())?;
            worst_case1 = worst_case1.max((traj.p2[i] - exact).abs());
        }
    }
    let mut worst_pl = 0.0f64;
    for (r32_prime, alpha) in [(0.004330880356603394, 0.124), (0.0056, 0.37), (0.0068, 0.2), (0.02, 0.5)] {
        let trapping = PowerLawTrapping { r32_prime, alpha, r31: 0.0, n3_0: 1.0 };
        let r = trapping.effective_rate().map_err(|e| e.to_string())?;
        let (t_min, t_max) = (0.01, 10.0 / r);
        let grid: Vec<f64> = (0..=400).map(|i| t_min * (t_max / t_min).powf(i as f64 / 400.0)).collect();
        let n3_start = metastable_population_n3(t_min, &trapping).map_err(|e| e.to_string())?;
        let d = Dynamics::PowerLaw { r21: 1.0 / 0.93, trapping, paired_loss: true };
        let traj = integrate_populations(&d, [1.0 - n3_start, 0.0, n3_start], &grid).map_err(|e| e.to_string())?;
        for (i, &t) in grid.iter().enumerate() {
            let exact = metastable_population_n3(t, &trapping).map_err(|e| e.to_string())?;
            worst_pl = worst_pl.max(rel(traj.p3[i], exact));
        }
    }
    let elapsed = start.elapsed();
    ensure(worst_case1 <= CASE1_ABS_TOL, || format!("constant-rate worst abs error {worst_case1:e}"))?;
    ensure(worst_pl <= POWER_LAW_REL_TOL, || format!("power-law worst rel error {worst_pl:e}"))?;
    within_budget(elapsed, ODE_BUDGET)?;
    Ok(format!("constant-rate abs {worst_case1:.2e}, power-law rel {worst_pl:.2e}, {elapsed:?}"))
}

fn trpl_round_trip() -> Outcome {
    let start = Instant::now();
    let params = StretchedDecayParams::new(1.0, 1.0 / INV_R_NS, BETA).map_err(|e| e.to_string())?;
    let shape = stretched_histogram(&params, 0.0, 1.0, 1000).map_err(|e| e.to_string())?;
    let expected = scale_to_total(&shape, TRPL_COUNTS).map_err(|e| e.to_string())?;
    let noisy = poisson_sample(&expected, 2016).map_err(|e| e.to_string())?;
    ensure(noisy.total() >= TRPL_COUNTS * 0.99, || format!("only {} counts", noisy.total()))?;
    let f = fit_stretched(&noisy, (20.0, 1000.0)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (inv_r, beta, tau) = (f.param("inv_r_ns"), f.param("beta"), f.param("tau_mean_ns"));
    ensure(rel(inv_r, INV_R_NS) <= INV_R_REL_TOL, || format!("1/r = {inv_r}"))?;
    ensure((beta - BETA).abs() <= BETA_ABS_TOL, || format!("beta = {beta}"))?;
    ensure(rel(tau, LIFETIME_EXPECTED_NS) <= TAU_REL_TOL, || format!("<tau> = {tau}"))?;
    within_budget(elapsed, FIT_BUDGET)?;
    Ok(format!(
        "{} counts: 1/r = {inv_r:.2} ± {:.2} ns, beta = {beta:.4} ± {:.4}, <tau> = {tau:.1} ± {:.1} ns, {elapsed:?}",
        noisy.total(),
        f.sigma("inv_r_ns"),
        f.sigma("beta"),
        f.sigma("tau_mean_ns")
    ))
}

fn g2_closed_form() -> Outcome {
    let p = G2Params::new(1.0 / INV_LAMBDA1_NS, 1.0 / INV_LAMBDA2_NS, 0.5).map_err(|e| e.to_string())?;
    let at_zero = g2_approx(0.0, &p);
    ensure(at_zero == 0.0, || format!("g2(0) = {at_zero:e}"))?;
    let tail = g2_approx(50.0 / p.lambda2, &p) - 1.0;
    ensure(tail.abs() <= G2_TAIL_TOL, || format!("g2(50/lambda2) - 1 = {tail:e}"))?;
    let curve = g2_correlogram(&p, 1.0, 0.0, 0.5, 1000.0, 1.0e4).map_err(|e| e.to_string())?;
    let f = fit_g2(&curve).map_err(|e| e.to_string())?;
    let errs = [
        rel(f.param("inv_lambda1_ns"), INV_LAMBDA1_NS),
        rel(f.param("inv_lambda2_ns"), INV_LAMBDA2_NS),
        rel(f.param("a"), 0.5),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    ensure(worst <= G2_FIT_REL_TOL, || format!("recovery errors {errs:?}"))?;
    Ok(format!("g2(0) = 0, tail {tail:.1e}, noiseless recovery worst rel {worst:.1e}"))
}

fn cw_agreement() -> Outcome {
    let start = Instant::now();
    let rates = RateSet::new(0.175, 1.075, 0.0023, 0.0019, 0.0019).map_err(|e| e.to_string())?;
    let run = simulate_cw(&CwExperimentConfig::new(rates, 1.2e7, 1.0, 77)).map_err(|e| e.to_string())?;
    let n = run.stream.len();
    ensure(n >= CW_MIN_PHOTONS, || format!("only {n} photons"))?;
    let (a, b) = hbt_split(&run.stream, 0.5, 78).map_err(|e| e.to_string())?;
    let corr = hbt_correlate(&a, &b, 1000.0, 0.5).map_err(|e| e.to_string())?;
    let exact = G2Exact::new(&rates).map_err(|e| e.to_string())?;
    let w = corr.bin_width;
    let mut inside = 0;
    for i in 0..corr.len() {
        let t = corr.lag_centers[i].abs();
        let g = if t < w / 2.0 { exact.bin_average(0.0, w / 2.0) } else { exact.bin_average(t - w / 2.0, t + w / 2.0) }
            .map_err(|e| e.to_string())?;
        let mean = g * corr.normalization[i];
        if (corr.raw_coincidences[i] - mean).abs() <= CW_SIGMAS * mean.sqrt().max(1.0) {
            inside += 1;
        }
    }
    let frac = inside as f64 / corr.len() as f64;
    ensure(frac >= CW_BIN_FRACTION, || format!("only {:.1}% of bins within {CW_SIGMAS} sigma", 100.0 * frac))?;

    // occupancy against the steady state, batch means over segments
    let p_inf = steady_state(&rates).map_err(|e| e.to_string())?;
    let fractions: Vec<[f64; 3]> = run
        .segment_occupancy
        .iter()
        .map(|o| {
            let s: f64 = o.iter().sum();
            o.map(|x| x / s)
        })
        .collect();
    let k = fractions.len() as f64;
    let mut pulls = [0.0; 3];
    for level in 0..3 {
        let mean = fractions.iter().map(|f| f[level]).sum::<f64>() / k;
        let var = fractions.iter().map(|f| (f[level] - mean).powi(2)).sum::<f64>() / (k - 1.0);
        pulls[level] = (mean - p_inf[level]) / (var / k).sqrt();
        ensure(pulls[level].abs() <= CW_SIGMAS, || format!("level {} occupancy pull {:.2}", level + 1, pulls[level]))?;
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, CW_BUDGET)?;
    Ok(format!(
        "{n} photons, {:.1}% of {} bins within 3 sigma, occupancy pulls {:.2} {:.2} {:.2}, {elapsed:?}",
        100.0 * frac,
        corr.len(),
        pulls[0],
        pulls[1],
        pulls[2]
    ))
}

const SWEEP_GRID: &str = "points = [
  { r32_prime = 0.005597, alpha = 0.37 },
  { r32_prime = 0.005638, alpha = 0.34 },
  { r32_prime = 0.005789, alpha = 0.31 },
  { r32_prime = 0.005926, alpha = 0.28 },
  { r32_prime = 0.006082, alpha = 0.25 },
  { r32_prime = 0.006274, alpha = 0.22 },
  { r32_prime = 0.006787, alpha = 0.20 },
]
";

fn column(table: &str, name: &str) -> Result<Vec<f64>, String> {
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().ok_or("empty table")?.split(',').collect();
    let j = header.iter().position(|h| *h == name).ok_or(format!("no column {name}"))?;
    lines.map(|l| l.split(',').nth(j).and_then(|v| v.parse().ok()).ok_or(format!("bad row {l}"))).collect()
}

fn power_sweep(dir: &Path) -> Outcome {
    let cfg = dir.join("sweep.toml");
    std::fs::write(&cfg, format!("[simulate]\nseed = 2016\n[pulsed]\nn_pulses = 2000000\n[sweep]\n{SWEEP_GRID}"))
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    qdtrap(&["sweep", "--config", &cfg.display().to_string()])?;
    let elapsed = start.elapsed();
    let table = std::fs::read_to_string(dir.join("sweep.csv")).map_err(|e| e.to_string())?;
    let tau = column(&table, "tau_mean_ns")?;
    let beta = column(&table, "beta")?;
    ensure(tau.windows(2).all(|w| w[1] < w[0]), || format!("tau not decreasing: {tau:?}"))?;
    let (lo, hi) = (tau[tau.len() - 1], tau[0]);
    ensure(lo <= SWEEP_TAU_LOW_NS && hi >= SWEEP_TAU_HIGH_NS, || format!("tau spans [{lo}, {hi}]"))?;
    ensure(beta.windows(2).all(|w| w[1] > w[0]), || format!("beta not increasing: {beta:?}"))?;
    ensure(beta.iter().all(|b| (SWEEP_BETA_RANGE.0..=SWEEP_BETA_RANGE.1).contains(b)), || format!("beta {beta:?}"))?;
    within_budget(elapsed, SWEEP_BUDGET)?;
    Ok(format!("<tau> {hi:.0} -> {lo:.0} ns, beta {:.3} -> {:.3}, {elapsed:?}", beta[0], beta[beta.len() - 1]))
}

fn determinism(dir: &Path) -> Outcome {
    let configs = [
        ("pulsed", "[simulate]\nseed = 5\n[pulsed]\nn_pulses = 300000\ninit_p2 = 0.4\ninit_p3 = 0.6\nhistogram = \"trpl.csv\"\n"),
        ("cw", "[simulate]\nmode = \"cw\"\nseed = 6\n[cw]\nduration_ns = 3e6\ncorrelogram = \"g2.csv\"\nmax_lag_ns = 300\n"),
    ];
    let mut compared = 0;
    for (name, text) in configs {
        let mut runs = Vec::new();
        for (k, workers) in ["1", "4", "4"].into_iter().enumerate() {
            let d = dir.join(format!("det-{name}-{k}"));
            std::fs::create_dir_all(&d).map_err(|e| e.to_string())?;
            let cfg = d.join("run.toml");
            std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
            qdtrap(&["--workers", workers, "simulate", "--config", &cfg.display().to_string()])?;
            let aux = if name == "pulsed" { "trpl.csv" } else { "g2.csv" };
            let read = |f: &str| std::fs::read(d.join(f)).map_err(|e| e.to_string());
            runs.push((read("photons.txt")?, read(aux)?));
        }
        ensure(runs.iter().all(|r| *r == runs[0]), || format!("{name} outputs differ between runs"))?;
        compared += 2 * (runs.len() - 1);
    }
    let mut tables = Vec::new();
    for workers in ["1", "4"] {
        let d = dir.join(format!("det-sweep-{workers}"));
        std::fs::create_dir_all(&d).map_err(|e| e.to_string())?;
        let cfg = d.join("run.toml");
        std::fs::write(
            &cfg,
            "[pulsed]\nn_pulses = 200000\n[sweep]\npoints = [{ r32_prime = 0.0056, alpha = 0.37 }, { r32_prime = 0.0068, alpha = 0.2 }]\n",
        )
        .map_err(|e| e.to_string())?;
        qdtrap(&["--workers", workers, "sweep", "--config", &cfg.display().to_string()])?;
        tables.push(std::fs::read(d.join("sweep.csv")).map_err(|e| e.to_string())?);
    }
    ensure(tables[0] == tables[1], || "sweep tables differ between worker counts".into())?;
    compared += 1;
    Ok(format!("{compared} file comparisons byte-identical across --workers 1/4 and reruns"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Check)> = vec![
        ("mean lifetime identity", Box::new(lifetime)),
        ("eigenvalue exactness", Box::new(eigenvalues)),
        ("steady-state formula", Box::new(steady)),
        ("analytic vs ODE", Box::new(ode_equivalence)),
        ("TRPL fit round trip", Box::new(trpl_round_trip)),
        ("g2 closed form", Box::new(g2_closed_form)),
        ("CW stochastic vs analytic", Box::new(cw_agreement)),
        ("power-sweep trend", Box::new(|| power_sweep(dir.path()))),
        ("determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail} ({secs:.2} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {} {name}: {why} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
