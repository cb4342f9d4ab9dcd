//! Subcommand implementations. Each one validates its paths first, then
//! does the work, then writes its outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pwca_core::dataio::{self, SplitSpec, SyntheticConfig};
use pwca_core::pacbayes::{self, GridHypothesisSpace};
use pwca_core::pwca::default_k;
use pwca_core::{compare, kcca, pwca, retrieval, Error, KernelSpec, Method, PwcaModel, ViewMatrix};
use serde::Serialize;

use crate::args::{BoundArgs, CompareArgs, EvalArgs, GridDemoArgs, KernelArg, KernelArgs, SynthArgs, TrainArgs};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require_files(paths: &[PathBuf]) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(Error::Io {
                path: p.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
            }
            .into());
        }
    }
    Ok(())
}

/// The parent directory of an output file must already exist.
fn require_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(usage(format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| {
        Error::Io {
            path: path.display().to_string(),
            source: e,
        }
        .into()
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn kernel_spec(args: &KernelArgs) -> Result<KernelSpec> {
    if args.kernel == KernelArg::Rbf && args.bandwidth.is_none() {
        return Err(usage("--bandwidth is required with --kernel rbf"));
    }
    let spec = args.spec();
    spec.validate()?;
    Ok(spec)
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--tau must be > 0, got {tau}")))
    }
}

fn load_views(paths: &[PathBuf]) -> Result<Vec<ViewMatrix>> {
    Ok(paths.iter().map(dataio::load_view).collect::<pwca_core::Result<Vec<_>>>()?)
}

fn train_method(
    method: Method,
    views: &[ViewMatrix],
    spec: &KernelSpec,
    tau: f64,
    k: Option<usize>,
) -> Result<PwcaModel> {
    let k = k.unwrap_or_else(|| default_k(views[0].rows()));
    let model = match method {
        Method::Pwca => pwca::train_pwca(views, spec, tau, k)?,
        Method::Kcca => kcca::train_kcca(views, spec, tau, k)?,
    };
    Ok(model)
}

pub fn train(args: TrainArgs) -> Result<()> {
    check_tau(args.tau)?;
    let spec = kernel_spec(&args.kernel)?;
    require_files(&args.views)?;
    require_output(&args.out)?;
    let views = load_views(&args.views)?;
    let model = train_method(args.method.into(), &views, &spec, args.tau, args.k)?
        .with_train_view_paths(args.views.iter().map(|p| p.display().to_string()).collect());
    write_file(&args.out, &model.to_json()?)?;
    println!(
        "{}: s={} l={} k={} gamma_max={}",
        model.method(),
        model.s(),
        model.l(),
        model.k(),
        model.gammas().first().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let mut inputs = args.test.clone();
    inputs.push(args.model.clone());
    require_files(&inputs)?;
    let ranks_path = args
        .ranks
        .clone()
        .unwrap_or_else(|| args.report.with_extension("csv"));
    require_output(&args.report)?;
    require_output(&ranks_path)?;
    let model = PwcaModel::load(&args.model)?;
    let test = load_views(&args.test)?;
    if test.len() != model.s() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} views, {} test views given",
            model.s(),
            test.len()
        ))
        .into());
    }
    let report = retrieval::mate_retrieval(&model, &test, args.query_view, args.target_view)?
        .with_seed(args.seed);
    write_file(&args.report, &report.summary_json()?)?;
    write_file(&ranks_path, &report.ranks_csv())?;
    println!(
        "ap={} n_queries={} random_baseline={}",
        report.ap,
        report.n_queries,
        retrieval::expected_random_ap(report.n_queries)
    );
    Ok(())
}

pub fn compare(args: CompareArgs) -> Result<()> {
    check_tau(args.tau)?;
    let spec = kernel_spec(&args.kernel)?;
    if args.train.len() != args.test.len() {
        return Err(usage(format!(
            "{} training views but {} test views",
            args.train.len(),
            args.test.len()
        )));
    }
    require_files(&args.train)?;
    require_files(&args.test)?;
    require_output(&args.out)?;
    if let Some(d) = &args.directions {
        require_output(d)?;
    }
    let train = load_views(&args.train)?;
    let test = load_views(&args.test)?;
    let mut reports = Vec::new();
    for method in [Method::Pwca, Method::Kcca] {
        let model = train_method(method, &train, &spec, args.tau, args.k)?;
        reports.extend(
            retrieval::all_directions(&model, &test)?
                .into_iter()
                .map(|r| r.with_seed(args.seed)),
        );
    }
    let table = compare::emit_comparison_table(&reports)?;
    write_file(&args.out, &table)?;
    if let Some(d) = &args.directions {
        write_file(d, &compare::emit_direction_table(&reports)?)?;
    }
    print!("{table}");
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    if args.views != args.dims.len() {
        return Err(usage(format!(
            "--views {} does not match {} entries in --dims",
            args.views,
            args.dims.len()
        )));
    }
    let mut cfg = SyntheticConfig::new(args.l, args.latent, args.dims.clone(), args.sigma, args.seed);
    if let Some(seeds) = args.map_seeds.clone() {
        cfg = cfg.with_map_seeds(seeds);
    }
    let split_spec = match args.n_train {
        Some(n_train) => Some(SplitSpec {
            n_train,
            n_test: args.n_test.unwrap_or(args.l.saturating_sub(n_train)),
            seed: args.split_seed.unwrap_or(args.seed),
        }),
        None => None,
    };
    let ds = dataio::synth_generate(&cfg)?;
    let parts = split_spec.map(|s| dataio::split(&ds, &s)).transpose()?;
    let manifest = ds.save(&args.out)?;
    println!("{}", manifest.display());
    if let Some((train, test)) = parts {
        for (name, part) in [("train", &train), ("test", &test)] {
            println!("{}", part.save(args.out.join(name))?.display());
        }
    }
    Ok(())
}

pub fn bound(args: BoundArgs) -> Result<()> {
    let report = pacbayes::bound_report(args.n, args.delta, args.kl, args.emp_risk)?;
    print!("{}", to_json(&report)?);
    Ok(())
}

#[derive(Debug, Serialize)]
struct GridSummary {
    n: usize,
    hypotheses: usize,
    epsilon: f64,
    support: Vec<usize>,
    expected_risk: f64,
    kl_qp: f64,
    rhs: Option<f64>,
    risk_upper_bound: Option<f64>,
}

fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [z, y] => z.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(pair) => out.push(pair),
            None if i == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected `z,y`".into(),
                }
                .into())
            }
        }
    }
    Ok(out)
}

pub fn grid_demo(args: GridDemoArgs) -> Result<()> {
    require_files(std::slice::from_ref(&args.samples))?;
    if let Some(out) = &args.out {
        require_output(out)?;
    }
    let grid = GridHypothesisSpace::uniform(args.cells, args.lo, args.hi)?;
    let samples = read_samples(&args.samples)?;
    let risks = pacbayes::grid_risks(&grid, &samples)?;
    let q = pacbayes::realizable_q(&risks, args.epsilon)?;
    let prior = pacbayes::DiscreteDistribution::uniform(grid.len())?;
    let kl_qp = pacbayes::discrete_kl(&q, &prior)?;
    let expected_risk = pacbayes::expected_risk(&q, &risks)?;
    let bound = if risks.n >= 8 {
        Some(pacbayes::bound_report(risks.n, args.delta, kl_qp, expected_risk)?)
    } else {
        None
    };
    let summary = GridSummary {
        n: risks.n,
        hypotheses: grid.len(),
        epsilon: args.epsilon,
        support: q.support(),
        expected_risk,
        kl_qp,
        rhs: bound.map(|b| b.rhs),
        risk_upper_bound: bound.map(|b| b.risk_upper_bound),
    };
    if let Some(out) = &args.out {
        let mut csv = String::from("hypothesis,z_cell,y_cell,risk,weight\n");
        for h in 0..grid.len() {
            let (a, b) = grid.cells(h);
            let _ = writeln!(csv, "{h},{a},{b},{},{}", risks.risk(h), q.weights()[h]);
        }
        write_file(out, &csv)?;
    }
    print!("{}", to_json(&summary)?);
    Ok(())
}
