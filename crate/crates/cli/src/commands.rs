use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use qdtrap::estimation::{fit_exponential, fit_g2_with, fit_stretched, G2FitOptions, DEFAULT_FAST_WINDOW};
use qdtrap::io::{
    format_correlogram_csv, format_histogram_csv, format_split_timestamps, format_timestamps, parse_correlogram_csv,
    parse_histogram_csv,
};
use qdtrap::model::{average_lifetime, effective_rate_r};
use qdtrap::photon_stats::{hbt_correlate, hbt_split, tcspc_histogram};
use qdtrap::rate_matrix::{
    approx_coefficients, approx_eigenvalues, exact_eigenvalues, g2_approx, g2_params_from_rates, steady_state, G2Exact,
    G2Params, RateSet,
};
use qdtrap::stochastic::{simulate_cw, simulate_pulsed, Trapping};
use qdtrap::FitResult;
use serde_json::json;

use crate::cli::{Cli, Command, FitArgs, FitKind, G2ModelArgs, RateArgs};
use crate::config::{Mode, PulsedSection, RunConfig, TrappingKind};
use crate::report::{FitOptions, FitReport, InputDigest};
use crate::{write_file, CliError};

/// Mixed into the seed to decorrelate the beam splitter from the emitter.
const SPLIT_SEED_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

pub const SWEEP_HEADER: &str = "point,r32_prime_per_ns,alpha,inv_r_ns,inv_r_sigma_ns,beta,beta_sigma,tau_mean_ns,tau_mean_sigma_ns,detected,status";

/// Runs a parsed command line on a pool of `cli.workers` threads.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {} workers: {e}", cli.workers)))?;
    let (text, result) = pool.install(|| run(&cli.command));
    out.write_all(text.as_bytes())?;
    result
}

/// Runs one command on the current rayon pool; returns its stdout text.
pub fn run(command: &Command) -> (String, Result<(), CliError>) {
    let mut text = String::new();
    let result = match command {
        Command::Lifetime { inv_r_ns, beta, json } => lifetime(*inv_r_ns, *beta, *json, &mut text),
        Command::Simulate { config, output } => simulate(config, output.as_deref(), &mut text),
        Command::Fit(args) => fit(args, &mut text),
        Command::Sweep { config, output } => sweep(config, output.as_deref(), &mut text),
        Command::G2Model(args) => g2_model(args, &mut text),
        Command::Eigen { rates, json } => eigen(rates, *json, &mut text),
    };
    (text, result)
}

/// `x` rounded to four significant digits.
pub fn four_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (3 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn lifetime(inv_r_ns: f64, beta: f64, as_json: bool, out: &mut String) -> Result<(), CliError> {
    if !(inv_r_ns > 0.0) || !inv_r_ns.is_finite() {
        return Err(CliError::Input(format!("1/r must be a positive number of ns, got {inv_r_ns}")));
    }
    let tau = average_lifetime(1.0 / inv_r_ns, beta)?;
    if as_json {
        let v = json!({ "inv_r_ns": inv_r_ns, "beta": beta, "tau_mean_ns": tau });
        writeln!(out, "{v}").unwrap();
    } else {
        writeln!(out, "{} ns", four_significant(tau)).unwrap();
    }
    Ok(())
}

fn simulate(config: &Path, output: Option<&Path>, out: &mut String) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    cfg.validate_simulate()?;
    let dest = output.map(Path::to_path_buf).unwrap_or(cfg.simulate.output.clone());
    let seed = cfg.simulate.seed;
    match cfg.simulate.mode {
        Mode::Pulsed => {
            let p = &cfg.pulsed;
            let run = simulate_pulsed(&p.experiment(seed))?;
            write_file(&dest, format_timestamps(&run.stream).as_bytes())?;
            let c = run.counts;
            writeln!(out, "mode pulsed, seed {seed}, {} pulses over {} ns", c.pulses, run.stream.duration()).unwrap();
            writeln!(
                out,
                "excited: {} direct, {} reservoir; reservoir exits: {} trapped, {} lost",
                c.excited_direct, c.excited_reservoir, c.trapped, c.lost
            )
            .unwrap();
            writeln!(out, "photons: {} emitted, {} detected", c.emitted, c.detected).unwrap();
            if c.detected == 0 {
                writeln!(out, "no photons detected; {} holds only the header", dest.display()).unwrap();
            }
            describe_pulsed_rates(p, out);
            if let Some(path) = &p.histogram {
                let h = tcspc_histogram(&run.stream, p.rep_period_ns, p.bin_width_ns)?;
                write_file(path, format_histogram_csv(&h).as_bytes())?;
                writeln!(out, "histogram: {} bins of {} ns -> {}", h.len(), p.bin_width_ns, path.display()).unwrap();
            }
        }
        Mode::Cw => {
            let c = &cfg.cw;
            let run = simulate_cw(&c.experiment(seed))?;
            let (a, b) = hbt_split(&run.stream, c.split_prob, seed ^ SPLIT_SEED_KEY)?;
            write_file(&dest, format_split_timestamps(&a, &b).as_bytes())?;
            writeln!(out, "mode cw, seed {seed}, {} ns observed", c.duration_ns).unwrap();
            writeln!(
                out,
                "jumps: {}; photons: {} emitted, {} detected ({} A, {} B)",
                run.jumps,
                run.emitted,
                run.stream.len(),
                a.len(),
                b.len()
            )
            .unwrap();
            if run.stream.is_empty() {
                writeln!(out, "no photons detected; {} holds only the header", dest.display()).unwrap();
            }
            let occ = run.occupancy_fractions();
            let p_inf = steady_state(&c.rates())?;
            writeln!(
                out,
                "occupancy p1 p2 p3: {:.6} {:.6} {:.6} (steady state {:.6} {:.6} {:.6})",
                occ[0], occ[1], occ[2], p_inf[0], p_inf[1], p_inf[2]
            )
            .unwrap();
            if let Ok((l1, l2, _)) = exact_eigenvalues(&c.rates()) {
                writeln!(out, "effective rates: 1/lambda1 = {:.6} ns, 1/lambda2 = {:.6} ns", 1.0 / l1, 1.0 / l2)
                    .unwrap();
            }
            if let Some(path) = &c.correlogram {
                let g = hbt_correlate(&a, &b, c.max_lag_ns, c.bin_width_ns)?;
                write_file(path, format_correlogram_csv(&g).as_bytes())?;
                writeln!(out, "correlogram: {} bins of {} ns -> {}", g.len(), c.bin_width_ns, path.display()).unwrap();
            }
        }
    }
    writeln!(out, "timestamps -> {}", dest.display()).unwrap();
    Ok(())
}

fn describe_pulsed_rates(p: &PulsedSection, out: &mut String) {
    writeln!(out, "effective rates: 1/r21 = {:.6} ns", 1.0 / p.r21).unwrap();
    match p.experiment(0).metastable.trapping {
        Trapping::PowerLaw { .. } if !p.paired_loss => {
            writeln!(out, "reservoir tail: power-law trapping with constant loss r31 = {} ns^-1", p.r31).unwrap();
        }
        Trapping::PowerLaw { r32_prime, alpha } => {
            if let Ok(r) = effective_rate_r(r32_prime, alpha) {
                let beta = 1.0 - alpha;
                let tau = average_lifetime(r, beta).unwrap_or(f64::NAN);
                writeln!(out, "reservoir tail: 1/r = {:.6} ns, beta = {beta:.6}, <tau> = {:.6} ns", 1.0 / r, tau)
                    .unwrap();
            }
        }
        Trapping::Constant { r32 } => {
            let r31 = if p.paired_loss { r32 } else { p.r31 };
            writeln!(out, "reservoir tail: 1/(r31 + r32) = {:.6} ns", 1.0 / (r31 + r32)).unwrap();
        }
    }
}

fn default_report_path(input: &Path) -> PathBuf {
    let mut s = input.as_os_str().to_owned();
    s.push(".fit.json");
    PathBuf::from(s)
}

fn fit(args: &FitArgs, out: &mut String) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Input(format!("{} is not UTF-8 text", args.input.display())))?;
    let window = match args.window.as_deref() {
        Some([lo, hi]) => Some((*lo, *hi)),
        Some(_) => unreachable!("clap enforces two window values"),
        None => None,
    };
    if (args.fit_scale || args.fit_background) && args.kind != FitKind::G2 {
        return Err(CliError::Input("--fit-scale and --fit-background apply to g2 fits only".into()));
    }
    let (window, outcome) = match args.kind {
        FitKind::Exponential | FitKind::Stretched => {
            let h =
                parse_histogram_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;
            let window = window.unwrap_or_else(|| match args.kind {
                FitKind::Exponential => DEFAULT_FAST_WINDOW,
                _ => {
                    let end = h.bin_centers.last().map_or(0.0, |c| c + h.bin_width / 2.0);
                    (qdtrap::estimation::DEFAULT_SLOW_WINDOW_START, end)
                }
            });
            let r = match args.kind {
                FitKind::Exponential => fit_exponential(&h, window),
                _ => fit_stretched(&h, window),
            };
            (Some(window), r)
        }
        FitKind::G2 => {
            let mut c =
                parse_correlogram_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", args.input.display())))?;
            if let Some((lo, hi)) = window {
                if !(hi > lo) {
                    return Err(CliError::Input(format!("invalid fit window [{lo}, {hi}]")));
                }
                let keep: Vec<usize> =
                    (0..c.len()).filter(|&i| c.lag_centers[i] >= lo && c.lag_centers[i] <= hi).collect();
                let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
                c = qdtrap::Correlogram {
                    lag_centers: pick(&c.lag_centers),
                    g2_values: pick(&c.g2_values),
                    raw_coincidences: pick(&c.raw_coincidences),
                    normalization: pick(&c.normalization),
                    bin_width: c.bin_width,
                };
            }
            let opts = G2FitOptions { fit_scale: args.fit_scale, fit_background: args.fit_background };
            (window, fit_g2_with(&c, opts))
        }
    };
    let options = FitOptions { window, fit_scale: args.fit_scale, fit_background: args.fit_background };
    let digest = InputDigest::of(&args.input.display().to_string(), &bytes);
    let report_path = args.report.clone().unwrap_or_else(|| default_report_path(&args.input));
    let report = FitReport::new(digest, args.kind.name(), options, outcome.clone().map_err(|e| e.to_string()));
    write_file(&report_path, report.to_json().as_bytes())?;
    match outcome {
        Ok(r) => {
            write_fit_table(&r, out);
            writeln!(out, "report -> {}", report_path.display()).unwrap();
            Ok(())
        }
        Err(e) => {
            writeln!(out, "fit failed; diagnostics -> {}", report_path.display()).unwrap();
            Err(e.into())
        }
    }
}

/// Parameter table: `name value ± sigma`, values as stored in the report.
pub fn write_fit_table(r: &FitResult, out: &mut String) {
    writeln!(out, "{:<18} {:>24}   {:<24}", "parameter", "value", "sigma").unwrap();
    for (name, v) in r.parameters.iter().chain(&r.derived) {
        let s = r.uncertainties.get(name).map_or("-".to_string(), |s| s.to_string());
        writeln!(out, "{name:<18} {v:>24} ± {s:<24}").unwrap();
    }
    writeln!(out, "reduced_chi_square {:>24}", r.reduced_chi_square).unwrap();
    for w in &r.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
}

struct SweepRow {
    line: String,
    tau: Option<f64>,
    beta: Option<f64>,
}

fn sweep(config: &Path, output: Option<&Path>, out: &mut String) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    cfg.validate_sweep()?;
    let dest = output.map(Path::to_path_buf).unwrap_or(cfg.sweep.output.clone());
    let window = cfg.sweep.window(&cfg.pulsed);
    let mut rows = Vec::new();
    for (i, point) in cfg.sweep.points.iter().enumerate() {
        let mut p = cfg.pulsed.clone();
        p.trapping = TrappingKind::PowerLaw;
        p.r32_prime = point.r32_prime;
        p.alpha = point.alpha;
        let seed = cfg.simulate.seed.wrapping_add(i as u64);
        let head = format!("{i},{},{}", point.r32_prime, point.alpha);
        let run = simulate_pulsed(&p.experiment(seed));
        let detected = run.as_ref().map_or(0, |r| r.counts.detected);
        let fitted = run
            .and_then(|r| tcspc_histogram(&r.stream, p.rep_period_ns, p.bin_width_ns))
            .and_then(|h| fit_stretched(&h, window));
        let row = match fitted {
            Ok(f) => {
                let cell = |k: &str| format!("{},{}", f.param(k), f.sigma(k));
                SweepRow {
                    line: format!("{head},{},{},{},{detected},ok", cell("inv_r_ns"), cell("beta"), cell("tau_mean_ns")),
                    tau: Some(f.param("tau_mean_ns")),
                    beta: Some(f.param("beta")),
                }
            }
            Err(e) => {
                let msg: String = e.to_string().chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
                SweepRow { line: format!("{head},,,,,,,{detected},failed: {msg}"), tau: None, beta: None }
            }
        };
        writeln!(out, "point {i}: {}", row.line).unwrap();
        rows.push(row);
    }
    let mut csv = String::new();
    writeln!(csv, "{SWEEP_HEADER}").unwrap();
    for r in &rows {
        writeln!(csv, "{}", r.line).unwrap();
    }
    write_file(&dest, csv.as_bytes())?;
    let taus: Vec<f64> = rows.iter().filter_map(|r| r.tau).collect();
    let betas: Vec<f64> = rows.iter().filter_map(|r| r.beta).collect();
    writeln!(out, "tau_mean trend: {}", trend(&taus)).unwrap();
    writeln!(out, "beta trend: {}", trend(&betas)).unwrap();
    let failed = rows.len() - taus.len();
    if failed > 0 {
        writeln!(out, "{failed} of {} points failed", rows.len()).unwrap();
    }
    writeln!(out, "table -> {}", dest.display()).unwrap();
    Ok(())
}

/// Direction of a sequence, e.g. `decreasing (850.1 -> 185.3)`.
pub fn trend(v: &[f64]) -> String {
    if v.len() < 2 {
        return "undetermined (fewer than two fitted points)".into();
    }
    let span = format!("({} -> {})", four_significant(v[0]), four_significant(v[v.len() - 1]));
    if v.windows(2).all(|w| w[1] < w[0]) {
        format!("monotonically decreasing {span}")
    } else if v.windows(2).all(|w| w[1] > w[0]) {
        format!("monotonically increasing {span}")
    } else {
        format!("not monotonic {span}")
    }
}

fn rate_set(v: &[f64]) -> Result<RateSet, CliError> {
    Ok(RateSet::new(v[0], v[1], v[2], v[3], v[4])?)
}

fn g2_model(args: &G2ModelArgs, out: &mut String) -> Result<(), CliError> {
    if !(args.step > 0.0) || !(args.max_lag >= 0.0) || !args.max_lag.is_finite() {
        return Err(CliError::Input(format!(
            "need step > 0 and max_lag >= 0, got step = {} and max_lag = {}",
            args.step, args.max_lag
        )));
    }
    let n = (args.max_lag / args.step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(CliError::Input("lag grid exceeds 10^7 rows; increase --step".into()));
    }
    let lags = (0..=n).map(|k| k as f64 * args.step);
    let mut csv = String::new();
    match (&args.rates, args.lambda1, args.lambda2, args.a) {
        (Some(r), None, None, None) => {
            let rates = rate_set(r)?;
            let exact = G2Exact::new(&rates)?;
            let params = g2_params_from_rates(&rates)?;
            writeln!(csv, "lag_ns,g2_exact,g2_approx").unwrap();
            for t in lags {
                writeln!(csv, "{t},{},{}", exact.eval(t)?, g2_approx(t, &params)).unwrap();
            }
        }
        (None, Some(l1), Some(l2), Some(a)) => {
            let params = G2Params::new(l1, l2, a)?;
            writeln!(csv, "lag_ns,g2_approx").unwrap();
            for t in lags {
                writeln!(csv, "{t},{}", g2_approx(t, &params)).unwrap();
            }
        }
        _ => return Err(CliError::Input("give either --rates or all of --lambda1, --lambda2, --a".into())),
    }
    match &args.output {
        Some(path) => {
            write_file(path, csv.as_bytes())?;
            writeln!(out, "{} rows -> {}", n + 1, path.display()).unwrap();
        }
        None => out.push_str(&csv),
    }
    Ok(())
}

fn eigen(args: &RateArgs, as_json: bool, out: &mut String) -> Result<(), CliError> {
    let rates = rate_set(&[args.r12, args.r21, args.r13, args.r31, args.r32])?;
    let exact = exact_eigenvalues(&rates)?;
    let approx = approx_eigenvalues(&rates)?;
    let p_inf = steady_state(&rates)?;
    let coeff = approx_coefficients(&rates)?;
    let g2 = g2_params_from_rates(&rates).ok();
    if as_json {
        let v = json!({
            "rates_per_ns": rates,
            "exact": { "lambda1": exact.0, "lambda2": exact.1, "lambda3": exact.2 },
            "approx": { "lambda1": approx.0, "lambda2": approx.1, "lambda3": approx.2 },
            "steady_state": p_inf,
            "approx_coefficients": { "a21": coeff.0, "a22": coeff.1, "a23": coeff.2 },
            "g2": g2,
        });
        writeln!(out, "{v}").unwrap();
        return Ok(());
    }
    let rel = |a: f64, e: f64| if e == 0.0 { 0.0 } else { (a - e) / e };
    writeln!(out, "{:<10} {:>14} {:>14} {:>12}", "", "exact", "approx", "rel_diff").unwrap();
    writeln!(out, "{:<10} {:>14.8e} {:>14.8e} {:>12.3e}", "lambda1", exact.0, approx.0, rel(approx.0, exact.0))
        .unwrap();
    writeln!(out, "{:<10} {:>14.8e} {:>14.8e} {:>12.3e}", "lambda2", exact.1, approx.1, rel(approx.1, exact.1))
        .unwrap();
    writeln!(out, "{:<10} {:>14.8e} {:>14.8e}", "lambda3", exact.2, approx.2).unwrap();
    writeln!(out, "steady state p1 p2 p3: {:.8} {:.8} {:.8}", p_inf[0], p_inf[1], p_inf[2]).unwrap();
    writeln!(out, "approx coefficients a21 a22 a23: {:.8} {:.8} {:.8}", coeff.0, coeff.1, coeff.2).unwrap();
    if let Some(g) = g2 {
        writeln!(
            out,
            "g2: 1/lambda1 = {:.6} ns, 1/lambda2 = {:.6} ns, a = {:.6}",
            1.0 / g.lambda1,
            1.0 / g.lambda2,
            g.a
        )
        .unwrap();
    }
    Ok(())
}
