use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::Serialize;

use skorokhod_core::geometry::{
    build_curve_for, is_simple, render_svg, BoundaryCurve, BoundingBox, DomainModel, SimplicityReport, Truncation,
    TruncationPolicy,
};
use skorokhod_core::harmonic::{analyze, boundary_series, TrigSeries};
use skorokhod_core::montecarlo::{
    boundary_function_sample, collect_samples, euler_exit_sample, exact_exit_sample, expected_tau_series,
    run_batches, tau_moment, wos_position_sample, EulerOptions, ExitSample, Method, SampleFormat, SampleWriter,
    WosOptions,
};
use skorokhod_core::solvability::{classify, classify_boundary, ClassifyOptions, NormValue, SolvabilityReport, Verdict};
use skorokhod_core::stats::{empirical_moment, ks_one_sample, ks_two_sample, BootstrapOptions, EcdfView, KsResult, MomentEstimate};

use crate::config::RunConfig;
use crate::report;
use crate::source::Source;
use crate::{CliError, Command, EXIT_NON_SIMPLE, EXIT_NOT_ESTABLISHED, EXIT_NON_INTEGRABLE, EXIT_OK, EXIT_STEP_BUDGET};

pub const SOLVABILITY_FILE: &str = "solvability.json";
pub const GEOMETRY_FILE: &str = "geometry.json";
pub const SAMPLING_FILE: &str = "sampling.json";
pub const SIMULATION_FILE: &str = "simulation.json";
pub const REPORT_FILE: &str = "report.json";
pub const META_FILE: &str = "meta.json";

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<i32, CliError> {
    if let Command::Config { write } = command {
        let text = cfg.to_file_string();
        match write {
            Some(path) => fs::write(path, text)?,
            None => print!("{text}"),
        }
        return Ok(EXIT_OK);
    }
    fs::create_dir_all(&cfg.out).map_err(|e| {
        CliError::new(crate::EXIT_FAILURE, format!("output directory {} not writable: {e}", cfg.out.display()))
    })?;
    let (name, code) = match command {
        Command::Check => ("check", cmd_check(cfg)?),
        Command::Build => ("build", cmd_build(cfg)?),
        Command::Sample => ("sample", cmd_sample(cfg)?),
        Command::Simulate => ("simulate", cmd_simulate(cfg)?),
        Command::Report => ("report", report::cmd_report(&cfg.out)?),
        Command::Plot => ("plot", cmd_plot(cfg)?),
        Command::Config { .. } => unreachable!(),
    };
    write_meta(&cfg.out, name)?;
    Ok(code)
}

/// Timestamps live here and nowhere else, so the fragments stay comparable
/// byte for byte between runs.
fn write_meta(out: &Path, command: &str) -> Result<(), CliError> {
    let path = out.join(META_FILE);
    let mut meta: serde_json::Map<String, serde_json::Value> = fs::read_to_string(&path)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    meta.insert(
        command.to_string(),
        serde_json::json!({
            "unix_time": secs,
            "version": env!("CARGO_PKG_VERSION"),
            "threads": rayon::current_num_threads(),
        }),
    );
    fs::write(path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| CliError::new(crate::EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn classify_options(cfg: &RunConfig) -> ClassifyOptions {
    ClassifyOptions { levels: cfg.levels, n_terms: cfg.n_terms, grid_size: cfg.grid, ..Default::default() }
}

fn run_classify(cfg: &RunConfig, source: &Source) -> Result<SolvabilityReport, CliError> {
    let opts = classify_options(cfg);
    Ok(match source {
        Source::Quantile(spec) => classify(spec, &opts)?,
        Source::Boundary(phi) => classify_boundary(phi, &opts),
    })
}

#[derive(Debug, Serialize)]
struct SolvabilityFragment<'a> {
    config: &'a RunConfig,
    report: &'a SolvabilityReport,
}

fn norm_text(v: NormValue) -> String {
    match v.value() {
        Some(x) => format!("{x:.6e}"),
        None => "diverging".into(),
    }
}

fn print_solvability(r: &SolvabilityReport) {
    println!("{:<14} {}", "test", "value");
    for (p, v) in &r.lp_norms.0 {
        println!("{:<14} {}", format!("L^{p} norm"), norm_text(*v));
    }
    println!("{:<14} {}", "zygmund", norm_text(r.zygmund_value));
    println!("{:<14} {}", "hilbert L^1", norm_text(r.hilbert_l1));
    println!("{:<14} {}", "verdict", r.verdict.as_str());
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::NotEstablished => EXIT_NOT_ESTABLISHED,
        Verdict::NonIntegrable => EXIT_NON_INTEGRABLE,
        _ => EXIT_OK,
    }
}

pub fn cmd_check(cfg: &RunConfig) -> Result<i32, CliError> {
    let source = Source::from_config(cfg)?;
    let report = run_classify(cfg, &source)?;
    write_json(&cfg.out.join(SOLVABILITY_FILE), &SolvabilityFragment { config: cfg, report: &report })?;
    print_solvability(&report);
    Ok(verdict_code(report.verdict))
}

/// Everything downstream of the series.
struct Built {
    /// Raw partial sums, as analysed.
    series: TrigSeries,
    /// What sampling and the polyline use; see [`boundary_series`].
    shape: TrigSeries,
    curve: BoundaryCurve,
    simplicity: SimplicityReport,
}

fn truncation_policy(cfg: &RunConfig) -> TruncationPolicy {
    match cfg.radius {
        Some(r) => TruncationPolicy::Radius(r),
        None => TruncationPolicy::Auto { max_tail_mass: cfg.max_tail_mass },
    }
}

fn build_geometry(cfg: &RunConfig, source: &Source) -> Result<Built, CliError> {
    let phi = source.boundary()?;
    let series = analyze(&phi, cfg.n_terms, cfg.grid)?;
    let shape = boundary_series(&phi, &series);
    let curve = build_curve_for(&phi, &shape, cfg.m_b, truncation_policy(cfg))?;
    let simplicity = is_simple(&curve)?;
    Ok(Built { series, shape, curve, simplicity })
}

#[derive(Debug, Serialize)]
struct GeometryFragment<'a> {
    config: &'a RunConfig,
    vertices: usize,
    simple: bool,
    crossing: Option<(usize, usize)>,
    winding_number: i32,
    origin_inside: Option<bool>,
    bounding_box: Option<BoundingBox>,
    snap_tolerance: Option<f64>,
    resolution_error: f64,
    truncation: Option<&'a Truncation>,
    tail_mass: f64,
    series_terms: usize,
    summation: &'static str,
    series_tail_estimate: Option<f64>,
}

fn write_curve_files(out: &Path, b: &Built) -> Result<(), CliError> {
    let svg = render_svg(&b.curve, Some(&b.simplicity));
    fs::write(out.join("domain.svg"), svg)?;
    let mut csv = BufWriter::new(File::create(out.join("curve.csv"))?);
    b.curve.write_csv(&mut csv)?;
    csv.flush()?;
    Ok(())
}

fn non_simple_error(s: &SimplicityReport) -> CliError {
    let detail = match s.crossing {
        Some((i, j)) => format!("segments {i} and {j} cross"),
        None => "self-intersection".into(),
    };
    CliError::new(EXIT_NON_SIMPLE, format!("boundary curve is not simple: {detail}"))
}

fn require_solvable(cfg: &RunConfig, source: &Source) -> Result<(), CliError> {
    if cfg.force {
        return Ok(());
    }
    let report = run_classify(cfg, source)?;
    write_json(&cfg.out.join(SOLVABILITY_FILE), &SolvabilityFragment { config: cfg, report: &report })?;
    match verdict_code(report.verdict) {
        EXIT_OK => Ok(()),
        code => Err(CliError::new(
            code,
            format!("solvability verdict {}; use --force to build anyway", report.verdict.as_str()),
        )),
    }
}

pub fn cmd_build(cfg: &RunConfig) -> Result<i32, CliError> {
    let source = Source::from_config(cfg)?;
    require_solvable(cfg, &source)?;
    let b = build_geometry(cfg, &source)?;
    write_json(&cfg.out.join("series.json"), &b.series)?;
    write_curve_files(&cfg.out, &b)?;
    let domain = if b.simplicity.simple { Some(DomainModel::new(b.curve.clone())?) } else { None };
    let frag = GeometryFragment {
        config: cfg,
        vertices: b.curve.len(),
        simple: b.simplicity.simple,
        crossing: b.simplicity.crossing,
        winding_number: b.curve.winding_number(Complex64::new(0.0, 0.0)),
        origin_inside: domain.as_ref().map(|d| d.origin_inside()),
        bounding_box: domain.as_ref().map(|d| d.bounding_box()),
        snap_tolerance: domain.as_ref().map(|d| d.snap_tolerance()),
        resolution_error: b.curve.resolution_error(),
        truncation: b.curve.truncation(),
        tail_mass: b.curve.tail_mass(),
        series_terms: b.series.n(),
        summation: if b.shape == b.series { "partial sums" } else { "fejer" },
        series_tail_estimate: b.series.tail_estimate(),
    };
    write_json(&cfg.out.join(GEOMETRY_FILE), &frag)?;
    println!("vertices       {}", frag.vertices);
    println!("simple         {}", if frag.simple { "yes" } else { "no" });
    println!("winding number {}", frag.winding_number);
    if let Some(t) = frag.truncation {
        println!("truncated at R = {:.6e}, tail mass {:.3e}", t.radius, t.tail_mass);
    }
    if !b.simplicity.simple {
        return Err(non_simple_error(&b.simplicity));
    }
    Ok(EXIT_OK)
}

pub fn cmd_plot(cfg: &RunConfig) -> Result<i32, CliError> {
    let source = Source::from_config(cfg)?;
    let b = build_geometry(cfg, &source)?;
    fs::write(cfg.out.join("domain.svg"), render_svg(&b.curve, Some(&b.simplicity)))?;
    Ok(EXIT_OK)
}

fn sample_path(cfg: &RunConfig, method: &str) -> (PathBuf, String) {
    let ext = SampleFormat::from(cfg.format).extension();
    let name = format!("samples_{method}.{ext}");
    (cfg.out.join(&name), name)
}

/// Streams samples to `path` batch by batch and keeps them in memory for
/// the statistics.
fn run_to_file<F>(
    cfg: &RunConfig,
    path: &Path,
    n: usize,
    seed: u64,
    label: &str,
    sampler: F,
) -> Result<(Vec<ExitSample>, Option<skorokhod_core::Error>), CliError>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> skorokhod_core::Result<ExitSample> + Sync,
{
    let file = BufWriter::new(File::create(path)?);
    let mut writer = SampleWriter::new(file, cfg.format.into())?;
    let mut all = Vec::with_capacity(n);
    let outcome = run_batches(n, seed, sampler, |batch| {
        writer.write(batch)?;
        all.extend_from_slice(batch);
        eprintln!("{label}: {}/{n}", all.len());
        Ok(())
    });
    writer.finish()?;
    Ok((all, outcome.error))
}

#[derive(Debug, Serialize)]
struct MeanCheck {
    mean: f64,
    standard_error: f64,
    within_3se: bool,
}

fn mean_check(x: &[f64]) -> MeanCheck {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let se = (var / n).sqrt();
    MeanCheck { mean, standard_error: se, within_3se: mean.abs() <= 3.0 * se }
}

#[derive(Debug, Serialize)]
struct SamplingFragment<'a> {
    config: &'a RunConfig,
    method: &'static str,
    n: usize,
    samples_file: String,
    ks: KsResult,
    moments: Vec<MomentEstimate>,
    mean_check: MeanCheck,
    bias_notes: Vec<String>,
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<i32, CliError> {
    let source = Source::from_config(cfg)?;
    let (path, name) = sample_path(cfg, "exact");
    let (samples, note) = if source.is_koebe() {
        let phi = source.boundary()?;
        let (s, err) = run_to_file(cfg, &path, cfg.n_samples, cfg.seed, "exact", |rng| {
            Ok(ExitSample::new(Complex64::new(boundary_function_sample(&phi, rng), f64::NAN), None, Method::Exact))
        })?;
        if let Some(e) = err {
            return Err(e.into());
        }
        (s, "real part read directly off the boundary function; no series, imaginary part not computed".to_string())
    } else {
        let phi = source.boundary()?;
        let raw = analyze(&phi, cfg.n_terms, cfg.grid)?;
        let series = boundary_series(&phi, &raw);
        let (s, err) = run_to_file(cfg, &path, cfg.n_samples, cfg.seed, "exact", |rng| Ok(exact_exit_sample(&series, rng)))?;
        if let Some(e) = err {
            return Err(e.into());
        }
        let mut note = Method::Exact.bias_note().to_string();
        if series != raw {
            note.push_str("; Fejer means of the series, since phi has jumps or unbounded ends");
        }
        (s, note)
    };
    let re: Vec<f64> = samples.iter().map(|s| s.position.re).collect();
    let cdf = source.target_cdf();
    let ks = ks_one_sample("exact_re_vs_target", &EcdfView::new(&re)?, |x| cdf(x))?;
    let boot = BootstrapOptions::default();
    let moments = vec![empirical_moment(&re, 1.0, &boot)?, empirical_moment(&re, 2.0, &boot)?];
    let frag = SamplingFragment {
        config: cfg,
        method: Method::Exact.as_str(),
        n: re.len(),
        samples_file: name,
        ks,
        mean_check: mean_check(&re),
        moments,
        bias_notes: vec![note],
    };
    write_json(&cfg.out.join(SAMPLING_FILE), &frag)?;
    println!("KS exact Re vs target: D = {:.5}, band {:.5}, {}", frag.ks.statistic, frag.ks.band, pass_text(frag.ks.pass));
    println!("mean {:.5} (se {:.5})", frag.mean_check.mean, frag.mean_check.standard_error);
    Ok(EXIT_OK)
}

fn pass_text(p: bool) -> &'static str {
    if p {
        "pass"
    } else {
        "FAIL"
    }
}

#[derive(Debug, Serialize)]
struct TauSeriesEntry {
    value: Option<f64>,
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct ItoCheck {
    euler_mean_tau: f64,
    series: f64,
    relative_difference: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct SimulationFragment<'a> {
    config: &'a RunConfig,
    eps_shell: f64,
    samples_files: Vec<String>,
    completed: Vec<(String, usize)>,
    ks: Vec<KsResult>,
    tau_moments: Vec<MomentEstimate>,
    expected_tau_series: TauSeriesEntry,
    ito: Option<ItoCheck>,
    tail_mass: f64,
    bias_notes: Vec<String>,
    error: Option<String>,
}

pub const ITO_TOLERANCE: f64 = 0.05;

fn args(s: &[ExitSample]) -> Vec<f64> {
    s.iter().map(|x| x.position.im.atan2(x.position.re)).collect()
}

fn res(s: &[ExitSample]) -> Vec<f64> {
    s.iter().map(|x| x.position.re).collect()
}

fn two_sample(test: &str, a: &[f64], b: &[f64]) -> Result<Option<KsResult>, CliError> {
    if a.len() < skorokhod_core::stats::MIN_KS_SAMPLES || b.len() < skorokhod_core::stats::MIN_KS_SAMPLES {
        return Ok(None);
    }
    Ok(Some(ks_two_sample(test, &EcdfView::new(a)?, &EcdfView::new(b)?)?))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<i32, CliError> {
    let source = Source::from_config(cfg)?;
    require_solvable(cfg, &source)?;
    let b = build_geometry(cfg, &source)?;
    if !b.simplicity.simple {
        return Err(non_simple_error(&b.simplicity));
    }
    let domain = DomainModel::new(b.curve.clone())?;
    let shape = &b.shape;

    let exact = collect_samples(cfg.n_paths, cfg.seed, |rng| Ok(exact_exit_sample(shape, rng)))?;
    let euler_opts = EulerOptions { h: cfg.h, max_steps: cfg.max_steps };
    let wos_opts = WosOptions { eps_shell: cfg.eps_shell, max_steps: cfg.max_steps };

    let (euler_path, euler_name) = sample_path(cfg, "euler");
    let (euler, euler_err) = run_to_file(cfg, &euler_path, cfg.n_paths, cfg.seed.wrapping_add(1), "euler", |rng| {
        euler_exit_sample(&domain, &euler_opts, rng)
    })?;
    let (wos_path, wos_name) = sample_path(cfg, "wos");
    let (wos, wos_err) = if euler_err.is_none() {
        run_to_file(cfg, &wos_path, cfg.n_paths, cfg.seed.wrapping_add(2), "wos", |rng| {
            wos_position_sample(&domain, &wos_opts, rng)
        })?
    } else {
        (Vec::new(), None)
    };
    let error = euler_err.or(wos_err);

    let mut ks = Vec::new();
    let (ex_re, ex_arg) = (res(&exact), args(&exact));
    for (test, a, b) in [
        ("euler_re_vs_exact", res(&euler), &ex_re),
        ("wos_re_vs_exact", res(&wos), &ex_re),
        ("euler_arg_vs_exact", args(&euler), &ex_arg),
        ("wos_arg_vs_exact", args(&wos), &ex_arg),
    ] {
        ks.extend(two_sample(test, &a, b)?);
    }

    let boot = BootstrapOptions::default();
    let mut tau_moments = Vec::new();
    if !euler.is_empty() {
        tau_moments.push(tau_moment(&euler, 1.0, &boot)?);
        tau_moments.push(tau_moment(&euler, 2.0, &boot)?);
    }
    let tau_series = match expected_tau_series(&b.series) {
        Ok(t) => TauSeriesEntry { value: Some(t.value), note: None },
        Err(e) => TauSeriesEntry { value: None, note: Some(e.to_string()) },
    };
    let ito = match (tau_series.value, tau_moments.get(1)) {
        (Some(v), Some(m)) if error.is_none() => {
            let rel = (m.value - v).abs() / v;
            Some(ItoCheck {
                euler_mean_tau: m.value,
                series: v,
                relative_difference: rel,
                tolerance: ITO_TOLERANCE,
                pass: rel <= ITO_TOLERANCE,
            })
        }
        _ => None,
    };

    let mut bias_notes: Vec<String> =
        [Method::Exact, Method::Euler, Method::WosHybrid].iter().map(|m| format!("{}: {}", m.as_str(), m.bias_note())).collect();
    if let Some(t) = b.curve.truncation() {
        bias_notes.push(format!(
            "unbounded domain truncated at R = {:.6e}: exit statistics carry an additive bias of at most {:.3e} (tail mass)",
            t.radius, t.tail_mass
        ));
    }
    let frag = SimulationFragment {
        config: cfg,
        eps_shell: wos_opts.shell(&domain),
        samples_files: vec![euler_name, wos_name],
        completed: vec![("EULER".into(), euler.len()), ("WOS_HYBRID".into(), wos.len())],
        ks,
        tau_moments,
        expected_tau_series: tau_series,
        ito,
        tail_mass: b.curve.tail_mass(),
        bias_notes,
        error: error.as_ref().map(|e| e.to_string()),
    };
    write_json(&cfg.out.join(SIMULATION_FILE), &frag)?;
    for k in &frag.ks {
        println!("{:<20} D = {:.5}, band {:.5}, {}", k.test, k.statistic, k.band, pass_text(k.pass));
    }
    if let Some(m) = frag.tau_moments.get(1) {
        println!("E[tau] (Euler)       {:.5} [{:.5}, {:.5}]", m.value, m.ci.0, m.ci.1);
    }
    match &frag.ito {
        Some(i) => println!("Ito check            series {:.5}, rel. diff {:.4}, {}", i.series, i.relative_difference, pass_text(i.pass)),
        None => println!("Ito check            not available"),
    }
    if let Some(e) = error {
        return Err(CliError::new(EXIT_STEP_BUDGET, format!("{e}; partial samples kept")));
    }
    Ok(EXIT_OK)
}
