//! The seven experiments.

use std::path::Path;
use std::time::Instant;

use holderlab_core::fbm::{sample_path_with, FgnSampler};
use holderlab_core::localtime::{class_a_membership, class_s_membership, LocalTimeConfig, Padding, ValueScale};
use holderlab_core::renewal::{
    gamma_energy, greedy_count, greedy_subset, loglog_fit, quadrant_tau_with, renewal_sets, sample_taus_until,
    tail_exponent, tau_max, unit_cells, Quadrant, SurvivalTable, WalkPath,
};
use holderlab_core::restriction::{
    beta_variation, beta_variation_exhaustive, dim_slope, record_set, zero_set, BoxCountProfile,
};
use holderlab_core::rng::stream;
use holderlab_core::selfaffine::{certify, SelfAffineParams};
use holderlab_core::stats::mean_stderr;
use rand::Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Experiment, ExperimentConfig, SetKind};
use crate::io::{float, int, to_json_string, write_file, Table};
use crate::report::Report;
use crate::LabError;

/// Smallest `log2 n` in the greedy count sweep.
pub const COUNT_MIN_EXPONENT: u32 = 8;
/// Smallest `log2 n` in the energy sweep.
pub const ENERGY_MIN_EXPONENT: u32 = 6;
/// Survival rows with fewer survivors are left out of tail fits.
pub const MIN_SURVIVORS: u64 = 10;

/// Stream index of sample `i` in sweep level `e`, disjoint from `0..2^32`.
fn sweep_stream(e: u32, i: u64) -> u64 {
    (1 << 63) | (u64::from(e) << 32) | i
}

type Res<T> = Result<T, LabError>;

/// Runs `cfg`, writes its tables and JSON report under `cfg.out` when set, and
/// returns the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Res<Report> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads.unwrap_or(0)).build()?;
    let mut report = pool.install(|| match cfg.experiment {
        Experiment::SelfaffineCert => selfaffine_cert(cfg),
        Experiment::FbmLocaltime => fbm_localtime(cfg),
        Experiment::RestrictionDim => restriction_dim(cfg),
        Experiment::MolchanTail => molchan_tail(cfg),
        Experiment::GreedyWalk => greedy_walk(cfg),
        Experiment::EnergyScaling => energy_scaling(cfg),
        Experiment::VariationOracle => variation_oracle(cfg),
    })?;
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = &cfg.out {
        write_outputs(&report, dir)?;
    }
    Ok(report)
}

/// `<dir>/<table>.csv` for every table and `<dir>/<experiment>.json`.
pub fn write_outputs(report: &Report, dir: &Path) -> Res<()> {
    for t in &report.tables {
        write_file(&dir.join(format!("{}.csv", t.name)), t.to_csv().as_bytes())?;
    }
    let json = serde_json::to_value(report).map_err(|e| LabError::Config(e.to_string()))?;
    write_file(&dir.join(format!("{}.json", report.config.experiment)), to_json_string(&json).as_bytes())
}

fn selfaffine_cert(cfg: &ExperimentConfig) -> Res<Report> {
    let params = SelfAffineParams::new(cfg.k, cfg.m)?;
    let cert = certify(params, cfg.n)?;
    let mut t = Table::new("selfaffine-cert", &["n", "ell", "max_count", "bound", "ratio", "witness_q", "literal_max"]);
    for l in &cert.levels {
        t.push(vec![
            int(l.n.into()),
            int(l.ell.into()),
            int(l.max_count),
            int(l.bound),
            float(l.ratio()),
            Value::from(l.witness_q),
            l.literal_max.map_or(Value::Null, int),
        ]);
    }
    let mut r = Report::new(cfg.clone());
    r.stat("max_ratio", cert.max_ratio(), None);
    r.stat("certified", f64::from(u8::from(cert.pass())), None);
    r.stat("alpha", params.alpha(), None);
    r.tables.push(t);
    Ok(r)
}

fn fraction(flags: impl Iterator<Item = bool>) -> f64 {
    let (hits, total) = flags.fold((0u64, 0u64), |(h, t), f| (h + u64::from(f), t + 1));
    hits as f64 / total.max(1) as f64
}

fn fbm_localtime(cfg: &ExperimentConfig) -> Res<Report> {
    let levels = [cfg.n, cfg.compare_n];
    if levels.iter().any(|&l| l > cfg.resolution) {
        return Err(LabError::Config("n and compare_n must not exceed the path resolution".into()));
    }
    let sampler = FgnSampler::new(cfg.resolution, cfg.alpha)?;
    let lt = LocalTimeConfig::new(ValueScale::new(2, cfg.alpha)?).with_padding(Padding::Modulus);
    let runs: Vec<Vec<(u32, f64, bool, f64, bool)>> = (0..cfg.paths)
        .into_par_iter()
        .map(|i| -> Res<_> {
            let g = sample_path_with(&sampler, cfg.seed, i).to_grid();
            levels
                .iter()
                .map(|&n| {
                    let a = class_a_membership(&g, n, &lt)?;
                    let s = class_s_membership(&g.downsample(n)?, n, cfg.alpha)?;
                    Ok((n, a.worst_ratio, a.member, s.worst_ratio, s.member))
                })
                .collect()
        })
        .collect::<Res<_>>()?;
    let mut t = Table::new(
        "fbm-localtime",
        &["path", "n", "class_a_ratio", "class_a_member", "class_s_ratio", "class_s_member"],
    );
    for (i, run) in runs.iter().enumerate() {
        for &(n, ar, am, sr, sm) in run {
            t.push(vec![int(i as u64), int(n.into()), float(ar), int(am.into()), float(sr), int(sm.into())]);
        }
    }
    let frac = |level: usize, class_a: bool| fraction(runs.iter().map(|r| if class_a { r[level].2 } else { r[level].4 }));
    let mut r = Report::new(cfg.clone());
    r.stat("class_a_fraction", frac(0, true), None);
    r.stat("class_s_fraction", frac(0, false), None);
    r.stat("class_a_fraction_compare", frac(1, true), None);
    r.stat("class_s_fraction_compare", frac(1, false), None);
    r.stat("class_a_trend", frac(0, true) - frac(1, true), None);
    r.stat("class_s_trend", frac(0, false) - frac(1, false), None);
    r.tables.push(t);
    Ok(r)
}

fn restriction_dim(cfg: &ExperimentConfig) -> Res<Report> {
    let window = (cfg.window[0] as u32, cfg.window[1] as u32);
    let sampler = FgnSampler::new(cfg.resolution, cfg.alpha)?;
    let runs: Vec<(f64, f64, Vec<(u32, u64)>)> = (0..cfg.paths)
        .into_par_iter()
        .map(|i| -> Res<_> {
            let path = sample_path_with(&sampler, cfg.seed, i);
            let set = match cfg.set {
                SetKind::Zero => zero_set(&path)?,
                SetKind::Record => record_set(&path),
            };
            let profile = BoxCountProfile::measure(&set, 2, window)?;
            let fit = dim_slope(&profile)?;
            Ok((fit.slope, fit.stderr, profile.counts))
        })
        .collect::<Res<_>>()?;
    let mut t = Table::new("restriction-dim", &["path", "slope", "stderr"]);
    let mut profile = Table::new("restriction-dim-profile", &["path", "n", "count"]);
    for (i, (slope, se, counts)) in runs.iter().enumerate() {
        t.push(vec![int(i as u64), float(*slope), float(*se)]);
        for &(n, c) in counts {
            profile.push(vec![int(i as u64), int(n.into()), int(c)]);
        }
    }
    let slopes: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (mean, se) = mean_stderr(&slopes);
    let mut r = Report::new(cfg.clone());
    r.stat("mean_slope", mean, Some(se));
    r.tables.push(t);
    r.tables.push(profile);
    Ok(r)
}

fn molchan_tail(cfg: &ExperimentConfig) -> Res<Report> {
    let sampler = FgnSampler::new(cfg.n, cfg.alpha)?;
    let mut taus: Vec<f64> =
        (0..cfg.paths).into_par_iter().map(|i| tau_max(&sample_path_with(&sampler, cfg.seed, i))).collect();
    taus.sort_by(f64::total_cmp);
    let mut xs = Vec::new();
    let mut x = cfg.window[1];
    while x >= cfg.window[0] && x > 0.0 {
        xs.push(x);
        x /= 2.0;
    }
    xs.reverse();
    let mut t = Table::new("molchan-tail", &["x", "below", "probability"]);
    let mut points = Vec::new();
    for &x in &xs {
        let below = taus.partition_point(|&v| v < x) as u64;
        let p = below as f64 / cfg.paths as f64;
        t.push(vec![float(x), int(below), float(p)]);
        points.push((x, p));
    }
    let fit = loglog_fit(&points)?;
    let mut r = Report::new(cfg.clone());
    r.stat("slope", fit.slope, Some(fit.stderr));
    r.stat("curvature", fit.curvature, None);
    r.tables.push(t);
    Ok(r)
}

fn greedy_walk(cfg: &ExperimentConfig) -> Res<Report> {
    if cfg.n < COUNT_MIN_EXPONENT + 2 || cfg.n > 30 {
        return Err(LabError::Config(format!("greedy-walk needs {} <= n <= 30", COUNT_MIN_EXPONENT + 2)));
    }
    let cap = cfg.cap;
    let samples: Vec<Option<u64>> = (0..cfg.paths)
        .into_par_iter()
        .map(|i| quadrant_tau_with(&mut stream(cfg.seed, i), 2, cap, Quadrant::Strict))
        .collect();
    let ns: Vec<u64> = (1..64).map(|e| 1u64 << e).take_while(|&n| n < cap).collect();
    let table = SurvivalTable::from_samples(&samples, Some(cap), &ns);
    let mut survival = Table::new("greedy-walk", &["n", "survivors", "probability"]);
    for &(n, s) in &table.rows {
        survival.push(vec![int(n), int(s), float(table.probability(s))]);
    }
    let tail = tail_exponent(&table, (cfg.window[0] as u64, cfg.window[1] as u64), MIN_SURVIVORS)?;
    let mut counts = Table::new("greedy-walk-counts", &["n", "mean_count", "stderr"]);
    let mut means = Vec::new();
    for e in COUNT_MIN_EXPONENT..=cfg.n {
        let n = 1usize << e;
        let m: Vec<f64> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| -> Res<f64> {
                let walk = WalkPath::random(&mut stream(cfg.seed, sweep_stream(e, i)), 2, n)?;
                Ok(greedy_count(&greedy_subset(&walk), n) as f64)
            })
            .collect::<Res<_>>()?;
        let (mean, se) = mean_stderr(&m);
        counts.push(vec![int(n as u64), float(mean), float(se)]);
        means.push((n as f64, mean));
    }
    let count_fit = loglog_fit(&means)?;

    let mut r = Report::new(cfg.clone());
    r.stat("tail_slope", tail.slope, Some(tail.stderr));
    r.stat("tail_curvature", tail.curvature, None);
    r.stat("censored", samples.iter().filter(|s| s.is_none()).count() as f64, None);
    r.stat("count_slope", count_fit.slope, Some(count_fit.stderr));
    r.stat("count_curvature", count_fit.curvature, None);
    r.tables.push(survival);
    r.tables.push(counts);
    Ok(r)
}

fn energy_scaling(cfg: &ExperimentConfig) -> Res<Report> {
    if cfg.n < ENERGY_MIN_EXPONENT + 2 || cfg.n > 40 {
        return Err(LabError::Config(format!("energy-scaling needs {} <= n <= 40", ENERGY_MIN_EXPONENT + 2)));
    }
    let mut t = Table::new("energy-scaling", &["n", "mean_energy", "stderr", "mean_mu_energy", "max_rel_error"]);
    let mut means = Vec::new();
    let mut worst = 0.0f64;
    for e in ENERGY_MIN_EXPONENT..=cfg.n {
        let n = 1u64 << e;
        let scale = (n as f64).powf(cfg.gamma - 2.0);
        let runs: Vec<(f64, f64, f64)> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| -> Res<_> {
                let taus = sample_taus_until(&mut stream(cfg.seed, sweep_stream(e, i)), cfg.alpha, n)?;
                let (sample, mu) = renewal_sets(&taus, n, cfg.alpha)?;
                let s = gamma_energy(&unit_cells(&sample), cfg.gamma)?;
                let c = gamma_energy(&mu.with_density(1.0), cfg.gamma)?;
                let want = scale * s;
                let rel = if want == 0.0 { c.abs() } else { (c - want).abs() / want.abs() };
                Ok((s, gamma_energy(&mu, cfg.gamma)?, rel))
            })
            .collect::<Res<_>>()?;
        let energies: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let mu_energies: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let rel = runs.iter().map(|r| r.2).fold(0.0, f64::max);
        worst = worst.max(rel);
        let (mean, se) = mean_stderr(&energies);
        let (mu_mean, _) = mean_stderr(&mu_energies);
        t.push(vec![int(n), float(mean), float(se), float(mu_mean), float(rel)]);
        means.push((n as f64, mean));
    }
    let fit = loglog_fit(&means)?;
    let mut r = Report::new(cfg.clone());
    r.stat("identity_max_rel_error", worst, None);
    r.stat("growth_slope", fit.slope, Some(fit.stderr));
    r.stat("growth_curvature", fit.curvature, None);
    r.tables.push(t);
    Ok(r)
}

fn variation_oracle(cfg: &ExperimentConfig) -> Res<Report> {
    let max_points = cfg.n as usize;
    if max_points == 0 || max_points > holderlab_core::restriction::EXHAUSTIVE_MAX_POINTS {
        return Err(LabError::Config(format!(
            "variation-oracle needs 1 <= n <= {}",
            holderlab_core::restriction::EXHAUSTIVE_MAX_POINTS
        )));
    }
    let runs: Vec<Vec<(usize, f64, f64, f64)>> = (0..cfg.paths)
        .into_par_iter()
        .map(|i| -> Res<_> {
            let mut rng = stream(cfg.seed, i);
            let len = rng.random_range(1..=max_points);
            let mut xs: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let pts: Vec<(f64, f64)> = xs.into_iter().map(|x| (x, rng.random_range(-1.0..1.0))).collect();
            cfg.beta
                .iter()
                .map(|&b| {
                    let dp = beta_variation(&pts, b)?;
                    let ex = beta_variation_exhaustive(&pts, b)?;
                    Ok((pts.len(), b, dp, ex))
                })
                .collect()
        })
        .collect::<Res<_>>()?;
    let mut t = Table::new("variation-oracle", &["instance", "points", "beta", "dp", "exhaustive", "rel_diff"]);
    let mut worst = 0.0f64;
    for (i, run) in runs.iter().enumerate() {
        for &(len, b, dp, ex) in run {
            let rel = if ex == 0.0 { dp.abs() } else { (dp - ex).abs() / ex };
            worst = worst.max(rel);
            t.push(vec![int(i as u64), int(len as u64), float(b), float(dp), float(ex), float(rel)]);
        }
    }
    let mut r = Report::new(cfg.clone());
    r.stat("max_rel_diff", worst, None);
    r.tables.push(t);
    Ok(r)
}
