use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use wlidoa::array_model::{synthesize_snapshots, AmplitudeMode, ArrayScene, Omega};
use wlidoa::completion::{admm_complete, admm_complete_block, nmse, to_db, AdmmConfig, CompletionResult};
use wlidoa::doa::{bp_grid, cluster_taus, matrix_pencil, DoaEstimate};
use wlidoa::harness::{aggregate, run_plan, run_plan_with_threads, write_records_csv, write_summary_csv};
use wlidoa::io::SampleFile;
use wlidoa::lifting::{default_pencil, LiftingSpec};
use wlidoa::seed::mix_seed;
use wlidoa::weights::{assemble_block_weights, design_weights, design_weights_block, WeightMode};
use wlidoa::Complex64;

use crate::config::{ExtractMethod, LiftKind};
use crate::{CliError, Context};

const THREADS_VAR: &str = "WLIDOA_THREADS";

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("cannot write {}: {e}", path.display()))
}

fn read_samples(path: &Path) -> Result<SampleFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    SampleFile::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `name.ext` -> `name.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

fn mode_name(mode: WeightMode) -> &'static str {
    match mode {
        WeightMode::Identity => "identity",
        WeightMode::Surrogate => "surrogate",
        WeightMode::Minimax => "minimax",
    }
}

fn columns(file: &SampleFile, name: &str, t: usize) -> Result<Vec<Vec<Complex64>>, CliError> {
    (0..t).map(|c| file.column(name, c).map_err(CliError::from)).collect()
}

fn snapshots_of(file: &SampleFile) -> Result<usize, CliError> {
    match file.get("snapshots") {
        Some(_) => Ok(file.parsed("snapshots")?),
        None => Ok(1),
    }
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let sources = cfg.sources(ctx.seed)?;
    let omega = cfg.omega(ctx.seed)?;
    let t = cfg.scene.snapshots;
    if t == 0 {
        return Err(CliError::Config("scene.snapshots: must be at least 1".into()));
    }
    let scene = ArrayScene::new(cfg.scene.n, omega.clone(), cfg.noise()?, mix_seed(ctx.seed, &[3]))?.with_snapshots(t);
    let mode = if t > 1 { cfg.scene.amplitudes.into() } else { AmplitudeMode::Fixed };
    let snaps = synthesize_snapshots(&sources, &scene, mode)?;
    let eta = snaps.iter().map(|s| s.realized_eta()).fold(0.0, f64::max);

    let mut file = SampleFile::default();
    file.set("format", "snapshot");
    file.set("n", cfg.scene.n);
    file.set("m", omega.len());
    file.set("snapshots", t);
    file.set("spacing_ratio", cfg.scene.spacing_ratio);
    file.set("seed", ctx.seed);
    file.set("noise_eta", eta);
    file.set("sources", sources.len());
    let thetas: Vec<String> = sources.thetas().iter().map(|v| format!("{v}")).collect();
    file.set("thetas_deg", thetas.join(" "));
    file.set_omega(&omega);
    let obs: Vec<&[Complex64]> = snaps.iter().map(|s| s.y_obs.as_slice()).collect();
    file.push_columns("y_obs", &obs);
    let full: Vec<&[Complex64]> = snaps.iter().filter_map(|s| s.y_full.as_deref()).collect();
    file.push_columns("y_full", &full);
    file.push_columns("amplitudes", &[&sources.amps()]);
    write_text(&ctx.out, &file.to_text())?;
    if !ctx.quiet {
        println!(
            "simulated N={} M={} T={} K={} noise_eta={eta} -> {}",
            cfg.scene.n,
            omega.len(),
            t,
            sources.len(),
            ctx.out.display()
        );
    }
    Ok(())
}

pub fn complete(ctx: &Context, input: &Path) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let file = read_samples(input)?;
    let n: usize = file.parsed("n")?;
    let t = snapshots_of(&file)?;
    let omega = file.omega(n)?;
    let y_obs = columns(&file, "y_obs", t)?;
    let d = cfg.lifting.d.unwrap_or_else(|| default_pencil(n));
    let k_guess = match cfg.extract.k_max {
        Some(k) => k,
        None => file.parsed::<usize>("sources").unwrap_or(1),
    };
    let mode = cfg.weights.mode;
    let admm = |shape: (usize, usize)| AdmmConfig {
        rho: cfg.solver.rho,
        gamma: cfg.solver.gamma,
        iters: cfg.solver.iters,
        rank: cfg.solver.rank.unwrap_or_else(|| AdmmConfig::default_rank(k_guess, shape)),
        tol: cfg.solver.tol,
        seed: ctx.seed,
        g_step: cfg.solver.g_step,
    };

    let (spec, result): (LiftingSpec, CompletionResult) = if t == 1 {
        let spec = match cfg.lifting.kind {
            LiftKind::Hankel => LiftingSpec::hankel(n, d)?,
            LiftKind::DoubleHankel => LiftingSpec::double_hankel(n, d)?,
        };
        let weights = design_weights(&spec, &omega, mode, cfg.weights.floor)?;
        let out = admm_complete(&y_obs[0], &omega, &spec, &weights, &admm(spec.shape()))?;
        (spec, out)
    } else {
        if cfg.lifting.kind != LiftKind::Hankel {
            return Err(CliError::Config(
                "lifting.kind: multi-snapshot files need hankel lifting".into(),
            ));
        }
        let spec = LiftingSpec::block_hankel(n, d, t, 1)?;
        let omegas = vec![omega.clone(); t];
        let per = design_weights_block(&spec, &omegas, mode, cfg.weights.floor)?;
        let weights = assemble_block_weights(&spec, &per)?;
        let out = admm_complete_block(&y_obs, &omegas, &spec, &weights, &admm(spec.shape()))?;
        (spec, out)
    };

    let mut outfile = SampleFile::default();
    for (k, v) in &file.header {
        outfile.set(k, v);
    }
    outfile.set("format", "completed");
    outfile.set("mode", mode_name(mode));
    outfile.set("floor", cfg.weights.floor);
    outfile.set("d", spec.d);
    outfile.set("rank", admm(spec.shape()).rank);
    outfile.set("iterations", result.iterations_run);
    outfile.set("final_rank", result.final_rank_estimate);
    let cols: Vec<&[Complex64]> = (0..t).map(|c| result.column(c)).collect();
    outfile.push_columns("y_hat", &cols);
    let truth = match file.section("y_full") {
        Some(_) => Some(columns(&file, "y_full", t)?),
        None => None,
    };
    if let Some(truth) = &truth {
        let refs: Vec<&[Complex64]> = truth.iter().map(Vec::as_slice).collect();
        outfile.push_columns("y_full", &refs);
    }
    if let Some(amps) = file.section("amplitudes") {
        outfile.sections.push(("amplitudes".into(), amps.to_vec()));
    }
    write_text(&ctx.out, &outfile.to_text())?;
    let trace_path = sibling(&ctx.out, "trace.csv");
    let mut trace = create(&trace_path)?;
    result.write_trace_csv(&mut trace).map_err(io_err(&trace_path))?;
    trace.flush().map_err(io_err(&trace_path))?;

    if !ctx.quiet {
        let mut line = format!(
            "completed N={n} T={t} mode={} iterations={} rank_estimate={}",
            mode_name(mode),
            result.iterations_run,
            result.final_rank_estimate
        );
        if let Some(truth) = truth {
            let flat: Vec<Complex64> = truth.concat();
            let err = nmse(&flat, &result.y_hat)?;
            line += &format!(" nmse={err:.6e} ({:.2} dB)", to_db(err));
        }
        println!("{line}");
    }
    Ok(())
}

pub fn doa(ctx: &Context, input: &Path) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let file = read_samples(input)?;
    let n: usize = file.parsed("n")?;
    let t = snapshots_of(&file)?;
    let spacing = match file.get("spacing_ratio") {
        Some(_) => file.parsed("spacing_ratio")?,
        None => cfg.scene.spacing_ratio,
    };
    let y = columns(&file, "y_hat", t)?;
    let k = match cfg.extract.k_max {
        Some(k) => k,
        None => file.parsed::<usize>("sources").map_err(|_| {
            CliError::Config("extract.k_max: required when the input carries no source count".into())
        })?,
    };
    let per: Vec<DoaEstimate> = match cfg.extract.method {
        ExtractMethod::Pencil => y
            .iter()
            .map(|col| matrix_pencil(col, k, cfg.lifting.d, cfg.extract.noise_tol).map(|e| e.with_spacing(spacing)))
            .collect::<wlidoa::Result<_>>()?,
        ExtractMethod::Bp => {
            let full = Omega::full(n);
            let grid = wlidoa::doa::GridSpec {
                spacing_ratio: spacing,
                ..cfg.grid()
            };
            y.iter()
                .map(|col| bp_grid(col, &full, &grid))
                .collect::<wlidoa::Result<_>>()?
        }
    };
    let cap = match cfg.extract.method {
        ExtractMethod::Pencil => k,
        ExtractMethod::Bp => per.iter().map(DoaEstimate::len).max().unwrap_or(0),
    };
    let est = if per.len() == 1 {
        per.into_iter().next().expect("one column")
    } else {
        cluster_taus(&per, cap, 0.5 / n as f64)
    };

    let mut out = create(&ctx.out)?;
    let err = io_err(&ctx.out);
    match cfg.extract.method {
        ExtractMethod::Pencil => writeln!(out, "# method=pencil").map_err(&err)?,
        ExtractMethod::Bp => {
            writeln!(out, "# method=bp").map_err(&err)?;
            writeln!(out, "# grid={}", cfg.extract.grid_resolution).map_err(&err)?;
        }
    }
    est.write_csv(&mut out).map_err(&err)?;
    out.flush().map_err(&err)?;
    if !ctx.quiet {
        let thetas: Vec<String> = est
            .thetas
            .iter()
            .map(|th| th.map_or_else(|| "-".to_string(), |v| format!("{v:.4}")))
            .collect();
        println!("{} sources: [{}] deg, residual {:.3e}", est.len(), thetas.join(", "), est.residual);
    }
    Ok(())
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_VAR}: expected a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

pub fn experiment(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let plan = cfg.plan(ctx.seed)?;
    let records = match thread_cap()? {
        Some(threads) => run_plan_with_threads(&plan, threads)?,
        None => run_plan(&plan)?,
    };
    let mut out = create(&ctx.out)?;
    write_records_csv(&records, cfg.output.timing, &mut out).map_err(io_err(&ctx.out))?;
    out.flush().map_err(io_err(&ctx.out))?;
    let rows = aggregate(&records);
    let summary_path = sibling(&ctx.out, "summary.csv");
    let mut summary = create(&summary_path)?;
    write_summary_csv(&rows, &mut summary).map_err(io_err(&summary_path))?;
    summary.flush().map_err(io_err(&summary_path))?;
    if !ctx.quiet {
        println!("{:<10} {:>10} {:>12} {:>12} {:>9}", "method", plan.axis.name(), "mean_nmse", "median_nmse", "recovery");
        for r in &rows {
            println!(
                "{:<10} {:>10} {:>12.4e} {:>12.4e} {:>9.3}",
                r.method.name(),
                r.sweep_value,
                r.mean_nmse,
                r.median_nmse,
                r.recovery
            );
        }
    }
    Ok(())
}
