use std::fmt::Write as _;

use mfc0::bench::{
    corrupt, gen_subspaces, gen_toy3d, sweep_error_ratio, sweep_means, timing_profile, ErrorKind, LabeledDataset,
    SweepConfig, SynthConfig, TimingConfig,
};
use mfc0::clustering::cluster_fit;
use mfc0::io::{matrix_to_pgm, parse_labels, parse_matrix_csv, write_labels, IoError, Manifest};
use mfc0::{
    fit as run_fit, validate_data_problem, BetaPolicy, DataMatrix, FitResult, Problem, SolverConfig, SubspaceSpec,
};

use crate::error::{CliError, CliResult};
use crate::output::{parse_ratios, read_input, unix_seconds, OutDir, MATRIX_BANNER};
use crate::{ClusterArgs, FitArgs, Preset, SweepArgs, SynthArgs, TimingArgs};

/// Seed offset for corrupting toy data so the noise is not drawn from the
/// same stream as the samples.
const TOY_CORRUPTION_SALT: u64 = 0x0007_0E3D;

fn manifest_header(command: &str, started: u64) -> Manifest {
    let mut m = Manifest::new();
    m.push("command", command).push("version", env!("CARGO_PKG_VERSION")).push("started_unix", started);
    m
}

fn solver_config(args: &FitArgs) -> SolverConfig {
    SolverConfig {
        lambda: args.lambda,
        error_norm: args.error_norm,
        mu0: args.mu0,
        rho: args.rho,
        mu_max: args.mu_max,
        epsilon: args.epsilon,
        beta_policy: args.beta.map_or(BetaPolicy::TiedToMu, BetaPolicy::Fixed),
        max_iters: args.max_iters,
        y_update_rule: args.y_update,
        warm_start: !args.cold_start,
        seed: args.seed,
    }
}

fn load_problem(args: &FitArgs, manifest: &mut Manifest) -> CliResult<Problem> {
    let (bytes, hash) = read_input(&args.input)?;
    let values =
        parse_matrix_csv(&bytes).map_err(|source| CliError::Input { path: args.input.clone(), source })?;
    let data = if args.min_shift { DataMatrix::min_shifted(values)? } else { DataMatrix::new(values)? };
    let cfg = solver_config(args);

    manifest
        .push("input", args.input.display())
        .push("input_hash", hash)
        .push("out", args.out.display())
        .push("rows", data.rows())
        .push("cols", data.cols())
        .push("k", args.k)
        .push("d0", args.d0)
        .push("lambda", cfg.lambda)
        .push("error_norm", cfg.error_norm.as_str())
        .push("mu0", cfg.mu0)
        .push("rho", cfg.rho)
        .push("mu_max", cfg.mu_max)
        .push("epsilon", cfg.epsilon)
        .push(
            "beta_policy",
            match cfg.beta_policy {
                BetaPolicy::TiedToMu => "tied".to_string(),
                BetaPolicy::Fixed(b) => format!("fixed:{b}"),
            },
        )
        .push("max_iters", cfg.max_iters)
        .push("y_update", cfg.y_update_rule.as_str())
        .push("warm_start", cfg.warm_start)
        .push("min_shift", args.min_shift)
        .push("seed", cfg.seed);

    Ok(validate_data_problem(data, SubspaceSpec::new(args.k, args.d0)?, cfg)?)
}

fn write_fit(out: &OutDir, result: &FitResult, manifest: &mut Manifest) -> CliResult<()> {
    out.matrix("X.csv", &result.x)?;
    out.matrix("Y.csv", &result.y)?;
    out.matrix("E.csv", &result.e)?;
    out.write_with("objective.csv", |w| {
        writeln!(w, "iter,total,fit,reg")?;
        for (i, o) in result.objective_trace.iter().enumerate() {
            writeln!(w, "{},{:.16e},{:.16e},{:.16e}", i + 1, o.total, o.fit_term, o.reg_term)?;
        }
        Ok(())
    })?;
    manifest
        .push("iterations", result.iterations)
        .push("converged", result.converged)
        .push("rank_deficient_updates", result.rank_deficient_updates)
        .push("final_objective", result.final_objective().map_or(f64::NAN, |o| o.total))
        .push("elapsed_seconds", result.elapsed_seconds);
    Ok(())
}

fn finish(out: &OutDir, mut manifest: Manifest) -> CliResult<()> {
    manifest.push("finished_unix", unix_seconds());
    out.manifest(&manifest)
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let started = unix_seconds();
    let out = OutDir::create(&args.out)?;
    let mut manifest = manifest_header("fit", started);
    let problem = load_problem(args, &mut manifest)?;
    let result = run_fit(&problem)?;
    write_fit(&out, &result, &mut manifest)?;
    finish(&out, manifest)
}

pub fn cluster(args: &ClusterArgs) -> CliResult<()> {
    let started = unix_seconds();
    let fa = &args.fit;
    let out = OutDir::create(&fa.out)?;
    let mut manifest = manifest_header("cluster", started);
    let problem = load_problem(fa, &mut manifest)?;

    let truth = match &args.truth {
        Some(path) => {
            let (bytes, hash) = read_input(path)?;
            let labels = parse_labels(&String::from_utf8_lossy(&bytes))
                .map_err(|source| CliError::Input { path: path.clone(), source })?;
            manifest.push("truth", path.display()).push("truth_hash", hash);
            Some(labels)
        }
        None => None,
    };

    let result = run_fit(&problem)?;
    write_fit(&out, &result, &mut manifest)?;
    let clustered = cluster_fit(&result, fa.k, fa.d0, truth.as_deref(), fa.seed)?;

    out.write_with("labels.csv", |w| write_labels(w, &clustered.labels))?;
    if let Some(acc) = clustered.accuracy {
        out.text("accuracy.txt", &format!("{acc:.3}\n"))?;
    }
    out.bytes("Y_block.pgm", &matrix_to_pgm(&clustered.view.permuted))?;
    let bases = out.subdir("bases")?;
    for (i, b) in clustered.bases.iter().enumerate() {
        bases.matrix(&format!("basis_{i}.csv"), b)?;
    }

    let mut report = String::new();
    let _ = writeln!(report, "iterations={}", result.iterations);
    let _ = writeln!(report, "converged={}", result.converged);
    if let Some(acc) = clustered.accuracy {
        let _ = writeln!(report, "accuracy={acc:.6}");
    }
    let _ = writeln!(report, "off_block_mass={:.6e}", clustered.view.off_block_mass);
    for warning in &clustered.warnings {
        let _ = writeln!(report, "warning={warning}");
        eprintln!("warning: {warning}");
    }
    out.text("report.txt", &report)?;

    manifest.push("off_block_mass", clustered.view.off_block_mass).push("warnings", clustered.warnings.len());
    if let Some(acc) = clustered.accuracy {
        manifest.push("accuracy", acc);
    }
    finish(&out, manifest)
}

fn synth_dataset(args: &SynthArgs, manifest: &mut Manifest) -> CliResult<LabeledDataset> {
    match args.preset {
        Preset::Toy3d => {
            if args.k.or(args.d0).or(args.m).or(args.per_subspace).is_some() {
                return Err(CliError::Usage("--k, --d0, --m and --per-subspace apply only to the highdim preset".into()));
            }
            let clean = gen_toy3d(args.seed);
            if args.error_kind == ErrorKind::None {
                return Ok(clean);
            }
            let seed = args.seed.wrapping_add(TOY_CORRUPTION_SALT);
            manifest.push("corruption_seed", seed);
            Ok(corrupt(&clean, args.error_kind, args.ratio, args.magnitude, seed)?)
        }
        Preset::Highdim => {
            let base = SynthConfig::highdim(args.seed);
            let cfg = SynthConfig {
                k: args.k.unwrap_or(base.k),
                d0: args.d0.unwrap_or(base.d0),
                ambient_dim: args.m.unwrap_or(base.ambient_dim),
                per_subspace: args.per_subspace.unwrap_or(base.per_subspace),
                basis: args.basis,
                error_kind: args.error_kind,
                error_ratio: args.ratio,
                error_magnitude: args.magnitude,
                ..base
            };
            manifest
                .push("k", cfg.k)
                .push("d0", cfg.d0)
                .push("basis", cfg.basis.as_str())
                .push("per_subspace", cfg.per_subspace);
            Ok(gen_subspaces(&cfg)?)
        }
    }
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let started = unix_seconds();
    let out = OutDir::create(&args.out)?;
    let mut manifest = manifest_header("synth", started);
    manifest
        .push("preset", format!("{:?}", args.preset).to_lowercase())
        .push("error_kind", args.error_kind.as_str())
        .push("ratio", args.ratio)
        .push("magnitude", args.magnitude.map_or("default".into(), |m| m.to_string()))
        .push("seed", args.seed)
        .push("out", args.out.display());
    let ds = synth_dataset(args, &mut manifest)?;

    out.matrix("Z.csv", ds.z.values())?;
    out.matrix("clean.csv", ds.clean_values())?;
    out.write_with("labels.csv", |w| write_labels(w, &ds.truth))?;
    out.write_with("mask.csv", |w| {
        writeln!(w, "# 1 marks an entry changed by the error model; {MATRIX_BANNER}")?;
        let (rows, cols) = ds.z.values().shape();
        for i in 0..rows {
            let line: Vec<&str> = (0..cols)
                .map(|j| if ds.error_mask.as_ref().is_some_and(|m| m[(i, j)]) { "1" } else { "0" })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok::<(), IoError>(())
    })?;

    manifest
        .push("rows", ds.z.rows())
        .push("cols", ds.z.cols())
        .push("corrupted_columns", ds.corrupted_columns().len());
    finish(&out, manifest)
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let started = unix_seconds();
    let out = OutDir::create(&args.out)?;
    let ratios = parse_ratios(&args.ratios).map_err(CliError::Usage)?;
    let base = SynthConfig::highdim(args.master_seed);
    let synth = SynthConfig {
        k: args.k.unwrap_or(base.k),
        d0: args.d0.unwrap_or(base.d0),
        ambient_dim: args.m.unwrap_or(base.ambient_dim),
        per_subspace: args.per_subspace.unwrap_or(base.per_subspace),
        basis: args.basis,
        ..base
    };
    let cfg = SweepConfig {
        ratios,
        kinds: args.kind.clone(),
        methods: args.methods.clone(),
        seeds: args.seeds,
        master_seed: args.master_seed,
        synth,
        lambda_l1: args.lambda_l1,
        lambda_l21: args.lambda_l21,
        magnitude: args.magnitude,
        max_iters: args.max_iters,
        pca_variance: args.pca_variance,
        nmf_iters: args.nmf_iters,
    };
    let join = |items: Vec<&str>| items.join(",");
    let mut manifest = manifest_header("sweep", started);
    manifest
        .push("kinds", join(cfg.kinds.iter().map(|k| k.as_str()).collect()))
        .push("ratios", cfg.ratios.iter().map(f64::to_string).collect::<Vec<_>>().join(","))
        .push("methods", join(cfg.methods.iter().map(|m| m.as_str()).collect()))
        .push("seeds", cfg.seeds)
        .push("master_seed", cfg.master_seed)
        .push("k", cfg.synth.k)
        .push("d0", cfg.synth.d0)
        .push("m", cfg.synth.ambient_dim)
        .push("per_subspace", cfg.synth.per_subspace)
        .push("basis", cfg.synth.basis.as_str())
        .push("lambda_l1", cfg.lambda_l1)
        .push("lambda_l21", cfg.lambda_l21)
        .push("magnitude", cfg.magnitude.map_or("default".into(), |m| m.to_string()))
        .push("max_iters", cfg.max_iters)
        .push("pca_variance", cfg.pca_variance)
        .push("nmf_iters", cfg.nmf_iters)
        .push("out", args.out.display());

    let rows = sweep_error_ratio(&cfg)?;
    let failed: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!(
            "warning: {} ratio {} {} seed {} failed: {}",
            r.kind.as_str(),
            r.ratio,
            r.method.as_str(),
            r.seed,
            r.error.as_deref().unwrap_or("")
        );
    }

    out.write_with("sweep.csv", |w| {
        writeln!(w, "kind,ratio,method,seed,acc,iters,seconds")?;
        for r in &rows {
            let acc = r.acc.map_or(String::new(), |a| format!("{a:.6}"));
            writeln!(
                w,
                "{},{},{},{},{},{},{:.6}",
                r.kind.as_str(),
                r.ratio,
                r.method.as_str(),
                r.seed,
                acc,
                r.iters,
                r.seconds
            )?;
        }
        Ok::<(), IoError>(())
    })?;
    out.write_with("sweep_mean.csv", |w| {
        writeln!(w, "kind,ratio,method,mean_acc,succeeded,failed")?;
        for m in sweep_means(&rows) {
            let acc = m.mean_acc.map_or(String::new(), |a| format!("{a:.6}"));
            writeln!(w, "{},{},{},{},{},{}", m.kind.as_str(), m.ratio, m.method.as_str(), acc, m.succeeded, m.failed)?;
        }
        Ok::<(), IoError>(())
    })?;

    manifest.push("runs", rows.len()).push("failed_runs", failed.len());
    finish(&out, manifest)
}

pub fn timing(args: &TimingArgs) -> CliResult<()> {
    let started = unix_seconds();
    let out = OutDir::create(&args.out)?;
    let cfg = TimingConfig {
        n_grid: args.n.clone(),
        m: args.m,
        k: args.k,
        d0: args.d0,
        seed: args.seed,
        repeats: args.repeats,
    };
    let mut manifest = manifest_header("timing", started);
    manifest
        .push("n", cfg.n_grid.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        .push("m", cfg.m)
        .push("k", cfg.k)
        .push("d0", cfg.d0)
        .push("seed", cfg.seed)
        .push("repeats", cfg.repeats)
        .push("out", args.out.display());

    let report = timing_profile(&cfg)?;
    out.write_with("timing.csv", |w| {
        writeln!(w, "n,iters,total_s,per_iter_s")?;
        for r in &report.rows {
            writeln!(w, "{},{},{:.9},{:.9e}", r.n, r.iters, r.total_s, r.per_iter_s)?;
        }
        Ok::<(), IoError>(())
    })?;
    out.text(
        "timing_fit.txt",
        &format!(
            "slope={:.9e}\nintercept={:.9e}\nr_squared={:.6}\n",
            report.fit.slope, report.fit.intercept, report.fit.r_squared
        ),
    )?;
    manifest.push("r_squared", report.fit.r_squared);
    finish(&out, manifest)
}
