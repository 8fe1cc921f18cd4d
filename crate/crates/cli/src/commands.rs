use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use monoproj::bootstrap::ProjectionSummary;
use monoproj::grid::{default_nodes_per_axis, Interval};
use monoproj::io::{
    parse_dataset_csv, read_grid_function, write_grid_columns, write_grid_function,
};
use monoproj::simbench::{
    coverage_points_1d, coverage_points_2d, run_coverage_experiment, run_sigma_sweep, sigma_grid,
    write_coverage_csv, write_rmse_csv, ExperimentConfig, MeanFunctionId,
};
use monoproj::smoothers::FitWarning;
use monoproj::toxicology::{analyze_toxicology, toxicology_smoother};
use monoproj::{
    bootstrap_bands, project_monotone_nd, BootstrapConfig, Grid, GridFunction, ProjectionResult,
    SmootherSpec,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{Catalog, CliError};

/// Whether every projection reported converged; maps to the exit code.
pub type Outcome = Result<bool, CliError>;

#[derive(Serialize)]
struct ProjectionDiagnostics<'a> {
    sweeps: usize,
    final_violation: f64,
    converged: bool,
    tolerance: f64,
    norm_history: &'a [f64],
}

impl<'a> From<&'a ProjectionResult> for ProjectionDiagnostics<'a> {
    fn from(r: &'a ProjectionResult) -> Self {
        Self {
            sweeps: r.sweeps,
            final_violation: r.final_violation,
            converged: r.converged,
            tolerance: r.tolerance,
            norm_history: &r.norm_history,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush()
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> monoproj::Result<()>,
) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w)?;
    finish(path, w)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    writeln!(w).map_err(|e| CliError::Input(e.to_string()))?;
    finish(path, w)
}

fn grid_for(domain: &[Interval], cfg: &RunConfig) -> Result<Arc<Grid>, CliError> {
    let nodes = cfg
        .grid_nodes
        .unwrap_or_else(|| default_nodes_per_axis(domain.len()));
    Ok(Arc::new(Grid::uniform(domain, nodes)?))
}

fn negate(f: &GridFunction) -> monoproj::Result<GridFunction> {
    f.map(|v| -v)
}

/// Projects onto the non-decreasing cone, or onto the non-increasing one by
/// negating before and after.
fn project(
    f: &GridFunction,
    decreasing: bool,
    cfg: &RunConfig,
) -> Result<ProjectionResult, CliError> {
    let opts = cfg.projection()?;
    if !decreasing {
        return Ok(project_monotone_nd(f, opts)?);
    }
    let mut r = project_monotone_nd(&negate(f)?, opts)?;
    r.projected = negate(&r.projected)?;
    Ok(r)
}

pub fn fit(
    input: &Path,
    domain: Option<Vec<Interval>>,
    decreasing: bool,
    cfg: &RunConfig,
) -> Outcome {
    #[derive(Serialize)]
    struct FitReport<'a> {
        input: &'a Path,
        smoother: &'a SmootherSpec,
        n: usize,
        dim: usize,
        grid_shape: Vec<usize>,
        decreasing: bool,
        warnings: &'a [FitWarning],
        projection: ProjectionDiagnostics<'a>,
    }
    let data = parse_dataset_csv(input, domain)?;
    let smoother = cfg.smoother.clone().unwrap_or_default();
    let grid = grid_for(data.domain(), cfg)?;
    let raw = smoother.fit(&data, &grid)?;
    let proj = project(&raw.fit, decreasing, cfg)?;
    let out = cfg.out_dir();
    write_with(&out.join("raw_fit.csv"), |w| {
        write_grid_function(&raw.fit, w)
    })?;
    write_with(&out.join("projected_fit.csv"), |w| {
        write_grid_function(&proj.projected, w)
    })?;
    write_json(
        &out.join("fit.json"),
        &FitReport {
            input,
            smoother: &smoother,
            n: data.len(),
            dim: data.dim(),
            grid_shape: grid.shape(),
            decreasing,
            warnings: &raw.warnings,
            projection: (&proj).into(),
        },
    )?;
    Ok(proj.converged)
}

pub fn project_grid(input: &Path, decreasing: bool, cfg: &RunConfig) -> Outcome {
    let file = File::open(input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
    let f = read_grid_function(file)?;
    let proj = project(&f, decreasing, cfg)?;
    let out = cfg.out_dir();
    write_with(&out.join("projected.csv"), |w| {
        write_grid_function(&proj.projected, w)
    })?;
    write_json(
        &out.join("projection.json"),
        &ProjectionDiagnostics::from(&proj),
    )?;
    Ok(proj.converged)
}

#[derive(Serialize)]
struct BandReport<'a> {
    smoother: &'a SmootherSpec,
    replicates: usize,
    level: f64,
    seed: u64,
    failed: usize,
    unconverged: usize,
    projection: ProjectionSummary,
}

fn bootstrap_config(cfg: &RunConfig) -> Result<BootstrapConfig, CliError> {
    Ok(BootstrapConfig {
        replicates: cfg.replicates.unwrap_or(2000),
        level: cfg.level.unwrap_or(0.95),
        seed: cfg.seed(),
        projection: cfg.projection()?,
    })
}

pub fn bootstrap(input: &Path, domain: Option<Vec<Interval>>, cfg: &RunConfig) -> Outcome {
    let data = parse_dataset_csv(input, domain)?;
    let smoother = cfg.smoother.clone().unwrap_or_default();
    let grid = grid_for(data.domain(), cfg)?;
    let boot = bootstrap_config(cfg)?;
    let bands = bootstrap_bands(&data, &smoother, &grid, &boot)?;
    let out = cfg.out_dir();
    write_with(&out.join("bands.csv"), |w| {
        write_grid_columns(
            &[
                ("estimate", &bands.estimate),
                ("lower", &bands.lower),
                ("upper", &bands.upper),
            ],
            w,
        )
    })?;
    write_json(
        &out.join("bootstrap.json"),
        &BandReport {
            smoother: &smoother,
            replicates: bands.replicates,
            level: bands.level,
            seed: bands.seed,
            failed: bands.failed,
            unconverged: bands.unconverged,
            projection: bands.projection,
        },
    )?;
    Ok(bands.projection.converged)
}

fn functions_for(
    catalog: Catalog,
    functions: Option<Vec<MeanFunctionId>>,
    default: Vec<MeanFunctionId>,
) -> Result<Vec<MeanFunctionId>, CliError> {
    let fs = functions.unwrap_or(default);
    if let Some(f) = fs.iter().find(|f| f.dim() != catalog.dim()) {
        return Err(CliError::Input(format!(
            "{f} is not in the {}-predictor catalog",
            catalog.dim()
        )));
    }
    Ok(fs)
}

fn experiment_base(
    first: MeanFunctionId,
    n: usize,
    cfg: &RunConfig,
    replicates: usize,
) -> Result<ExperimentConfig, CliError> {
    let mut base = ExperimentConfig::new(first, 0.0);
    base.n = n;
    base.replicates = replicates;
    base.seed = cfg.seed();
    base.grid_nodes = cfg.grid_nodes;
    base.projection = cfg.projection()?;
    if let Some(s) = &cfg.smoother {
        base.smoother = s.clone();
    }
    Ok(base)
}

pub struct SimulateArgs {
    pub catalog: Catalog,
    pub functions: Option<Vec<MeanFunctionId>>,
    pub sigmas: Option<Vec<f64>>,
    pub n: usize,
    pub out: Option<PathBuf>,
}

pub fn simulate(args: SimulateArgs, cfg: &RunConfig) -> Outcome {
    let functions = functions_for(
        args.catalog,
        args.functions,
        MeanFunctionId::catalog(args.catalog.dim()),
    )?;
    let Some(&first) = functions.first() else {
        return Err(CliError::Input("no mean functions selected".into()));
    };
    let sigmas = args.sigmas.unwrap_or_else(sigma_grid);
    let base = experiment_base(first, args.n, cfg, cfg.replicates.unwrap_or(50))?;
    let rows = run_sigma_sweep(&base, &functions, &sigmas)?;
    let unconverged: usize = rows.iter().map(|r| r.unconverged).sum();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} replicate projections hit the sweep limit");
    }
    let path = args.out.unwrap_or_else(|| {
        cfg.out_dir()
            .join(format!("rmse_{}.csv", args.catalog.label()))
    });
    write_with(&path, |w| write_rmse_csv(&rows, w))?;
    Ok(true)
}

pub struct CoverageArgs {
    pub catalog: Catalog,
    pub functions: Option<Vec<MeanFunctionId>>,
    pub sigma: f64,
    pub n: usize,
    pub out: Option<PathBuf>,
}

pub fn coverage(args: CoverageArgs, cfg: &RunConfig) -> Outcome {
    use MeanFunctionId::*;
    let (default, points) = match args.catalog {
        Catalog::OneD => (vec![F12, F16], coverage_points_1d()),
        Catalog::TwoD => (vec![F21, F26], coverage_points_2d()),
        Catalog::ThreeD => {
            return Err(CliError::Input(
                "coverage tables exist for the 1d and 2d catalogs only".into(),
            ))
        }
    };
    let functions = functions_for(args.catalog, args.functions, default)?;
    let Some(&first) = functions.first() else {
        return Err(CliError::Input("no mean functions selected".into()));
    };
    let base = experiment_base(first, args.n, cfg, cfg.replicates.unwrap_or(2000))?;
    let b = cfg.bootstrap_replicates.unwrap_or(2000);
    let level = cfg.level.unwrap_or(0.95);
    let rows = functions
        .iter()
        .map(|&mean| {
            let config = ExperimentConfig {
                mean,
                sigma: args.sigma,
                ..base.clone()
            };
            run_coverage_experiment(&config, &points, b, level)
        })
        .collect::<monoproj::Result<Vec<_>>>()?;
    let path = args.out.unwrap_or_else(|| {
        cfg.out_dir()
            .join(format!("coverage_{}.csv", args.catalog.label()))
    });
    write_with(&path, |w| write_coverage_csv(&rows, w))?;
    Ok(true)
}

pub fn toxicology(cfg: &RunConfig) -> Outcome {
    #[derive(Serialize)]
    struct ToxReport<'a> {
        #[serde(flatten)]
        bands: BandReport<'a>,
        grid_shape: Vec<usize>,
        observations_inside: usize,
        observations: usize,
        fitted_at_origin: f64,
        fitted_at_max_dose: f64,
    }
    let smoother = cfg.smoother.clone().unwrap_or_else(toxicology_smoother);
    let boot = bootstrap_config(cfg)?;
    let a = analyze_toxicology(&smoother, cfg.grid_nodes, &boot)?;
    let out = cfg.out_dir();
    write_with(&out.join("toxicology_surface.csv"), |w| {
        write_grid_columns(
            &[
                ("estimate", &a.estimate),
                ("lower", &a.lower),
                ("upper", &a.upper),
            ],
            w,
        )
    })?;
    write_with(&out.join("toxicology_observations.csv"), |w| {
        writeln!(w, "x1,x2,y,fitted,lower,upper,inside")?;
        for o in &a.observations {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                o.x[0], o.x[1], o.y, o.fitted, o.lower, o.upper, o.inside
            )?;
        }
        Ok(())
    })?;
    let b = &a.bands;
    write_json(
        &out.join("toxicology.json"),
        &ToxReport {
            bands: BandReport {
                smoother: &smoother,
                replicates: b.replicates,
                level: b.level,
                seed: b.seed,
                failed: b.failed,
                unconverged: b.unconverged,
                projection: b.projection,
            },
            grid_shape: a.estimate.grid().shape(),
            observations_inside: a.inside_count(),
            observations: a.observations.len(),
            fitted_at_origin: a.estimate.interpolate(&[0.0, 0.0]),
            fitted_at_max_dose: a.estimate.interpolate(&[3.0, 3.0]),
        },
    )?;
    Ok(b.projection.converged)
}
