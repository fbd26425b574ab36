//! `hullkit` command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hullkit::chamfer::load_target_cloud;
use hullkit::dataset::{self, BuildOptions, DatasetConfig, StatsOptions};
use hullkit::evo::{
    case_study_seed, evaluate_drag, optimize_drag, reconstruct_hull, Draft, DragEvaluator,
    GaConfig, OperatingPoint, ParameterMask,
};
use hullkit::geom::mesh::generate_mesh;
use hullkit::geom::render::render_views_with_prefix;
use hullkit::geom::stl::{export_stl, StlFormat};
use hullkit::geom::surface::{HullSurface, WigleySurface};
use hullkit::hydro::table::{drag_header, format_drag_row, sweep_32_with, SweepOptions};
use hullkit::hydro::KNOT;
use hullkit::params::{
    check_feasibility, format_params_row, load_params, save_params, table_header, HullParameters,
};
use hullkit::surrogate::{train, SurrogateModel, TrainingConfig};
use hullkit::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "hullkit", version, about = "Parametric ship hull toolkit")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build (or resume) a dataset directory.
    Generate(GenerateArgs),
    /// Write STL meshes and five rendered views for hulls in a parameter table.
    Mesh(MeshArgs),
    /// Compute the 32-condition drag table.
    Drag(DragArgs),
    /// Report feasibility of every hull in a parameter table.
    Check(CheckArgs),
    /// Fit hull parameters to a target STL or OBJ mesh.
    Reconstruct(ReconstructArgs),
    /// Train the drag surrogate on a dataset.
    Train(TrainArgs),
    /// Predict wave drag coefficients with a trained surrogate.
    Predict(PredictArgs),
    /// Two-objective drag optimization (Rt, Cw) with NSGA-II.
    Optimize(OptimizeArgs),
    /// Dataset statistics.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Hulls per subset.
    #[arg(long, value_parser = parse_counts, default_value = "100,100,100")]
    counts: [usize; 3],
    /// Michell grid, stations x levels.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long, value_enum, default_value_t = Format::Binary)]
    format: Format,
    #[arg(long)]
    no_meshes: bool,
    #[arg(long)]
    no_images: bool,
    /// Stop after this many new hulls; the build can be resumed later.
    #[arg(long)]
    max_hulls: Option<usize>,
    /// Continue the build recorded in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Args, Debug)]
struct MeshArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Only this hull id.
    #[arg(long)]
    id: Option<String>,
    /// Mesh grid, stations x levels.
    #[arg(long, value_parser = parse_grid, default_value = "120,30")]
    grid: (usize, usize),
    #[arg(long, value_enum, default_value_t = Format::Binary)]
    format: Format,
    #[arg(long)]
    no_images: bool,
}

#[derive(Args, Debug)]
struct DragArgs {
    #[arg(long, required_unless_present = "wigley", conflicts_with = "wigley")]
    params: Option<PathBuf>,
    /// Use the standard Wigley hull instead of a parameter table.
    #[arg(long)]
    wigley: bool,
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    params: PathBuf,
    /// List every constraint margin.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct GaArgs {
    #[arg(long, default_value_t = 100)]
    population: usize,
    #[arg(long, default_value_t = 100)]
    generations: usize,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// Target mesh (.stl or .obj).
    #[arg(long)]
    target: PathBuf,
    /// Points sampled from the target surface.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[command(flatten)]
    ga: GaArgs,
    /// Directory for the fitted parameters and the convergence history.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// Also report Rt and Cw at this speed.
    #[arg(long)]
    speed_knots: Option<f64>,
    /// Draft as a fraction of depth for the operating point; design draft by default.
    #[arg(long)]
    draft_frac: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FreeGroups {
    Bulbs,
    Ends,
    /// Every term varies.
    None,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Seed hull table; the built-in 200 m prismatic hull when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Hull id in the seed table (first row by default).
    #[arg(long)]
    id: Option<String>,
    /// Terms allowed to vary; everything else is frozen at the seed.
    #[arg(long, value_enum, default_value_t = FreeGroups::Bulbs)]
    freeze_all_except: FreeGroups,
    /// Surrogate model; direct Michell evaluation when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 25.0)]
    speed_knots: f64,
    /// Draft as a fraction of depth; the seed's design draft when omitted.
    #[arg(long)]
    draft_frac: Option<f64>,
    /// Rescale every hull to this displaced volume.
    #[arg(long)]
    displacement_m3: Option<f64>,
    #[command(flatten)]
    ga: GaArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 25.0)]
    speed_knots: f64,
    /// Target displacements for the minimum-drag query.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,5000")]
    displacement_m3: Vec<f64>,
    /// Draft fraction for the query; each hull's design draft when omitted.
    #[arg(long)]
    draft_frac: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Ascii,
    Binary,
}

impl From<Format> for StlFormat {
    fn from(f: Format) -> StlFormat {
        match f {
            Format::Ascii => StlFormat::Ascii,
            Format::Binary => StlFormat::Binary,
        }
    }
}

fn parse_counts(s: &str) -> std::result::Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|_| "expected three comma-separated counts".to_string())
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    match s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Vec<_>>()[..]
    {
        [Ok(a), Ok(b)] if a >= 2 && b >= 2 => Ok((a, b)),
        _ => Err("expected nx,nz with both at least 2".into()),
    }
}

fn echo_config(command: &str, cfg: serde_json::Value) {
    eprintln!("config: {}", json!({ "command": command, "settings": cfg }));
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| io_error(path, e))
}

fn sweep_options(grid: Option<(usize, usize)>) -> SweepOptions {
    let mut opts = SweepOptions::default();
    if let Some((nx, nz)) = grid {
        opts.nx = nx;
        opts.nz = nz;
    }
    opts
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let opts = BuildOptions {
        workers: cli.workers,
        max_new_hulls: a.max_hulls,
    };
    let manifest = if a.resume {
        echo_config(
            "generate",
            json!({ "out": a.out, "resume": true, "max_hulls": a.max_hulls }),
        );
        dataset::resume(&a.out, &opts)?
    } else {
        let cfg = DatasetConfig {
            counts: a.counts,
            seed: cli.seed,
            meshes: !a.no_meshes,
            images: !a.no_images,
            stl_format: a.format.into(),
            sweep: sweep_options(a.grid),
            ..Default::default()
        };
        echo_config(
            "generate",
            json!({ "out": a.out, "dataset": cfg, "max_hulls": a.max_hulls }),
        );
        dataset::build_dataset(&a.out, &cfg, &opts)?
    };
    println!(
        "completed {:?} of {:?} hulls in {}",
        manifest.completed,
        manifest.requested,
        a.out.display()
    );
    Ok(())
}

fn select_rows(path: &Path, id: Option<&str>) -> Result<Vec<(String, HullParameters)>> {
    let rows = load_params(path)?;
    match id {
        None => Ok(rows),
        Some(id) => {
            let row = rows.into_iter().find(|(r, _)| r == id).ok_or_else(|| {
                Error::InvalidInput(format!("hull {id} not found in {}", path.display()))
            })?;
            Ok(vec![row])
        }
    }
}

fn mesh(a: &MeshArgs) -> Result<()> {
    echo_config(
        "mesh",
        json!({ "params": a.params, "out": a.out, "id": a.id, "grid": a.grid, "format": format!("{:?}", a.format), "images": !a.no_images }),
    );
    let rows = select_rows(&a.params, a.id.as_deref())?;
    create_dir(&a.out)?;
    for (id, p) in &rows {
        let surface = HullSurface::new(p)?;
        let m = generate_mesh(&surface, a.grid.0, a.grid.1)?;
        let stl = a.out.join(format!("{id}.stl"));
        export_stl(&m, &stl, a.format.into())?;
        if !a.no_images {
            render_views_with_prefix(&m, &a.out, &format!("{id}_view"))?;
        }
        println!(
            "{id}: {} vertices, {} triangles -> {}",
            m.vertices.len(),
            m.triangles.len(),
            stl.display()
        );
    }
    Ok(())
}

fn drag(a: &DragArgs) -> Result<()> {
    let opts = sweep_options(a.grid);
    echo_config(
        "drag",
        json!({ "params": a.params, "wigley": a.wigley, "sweep": opts }),
    );
    let mut text = drag_header();
    text.push('\n');
    if a.wigley {
        let table = sweep_32_with(&WigleySurface::standard(), &opts)?;
        text.push_str(&format_drag_row("wigley", &table));
        text.push('\n');
    } else if let Some(path) = &a.params {
        for (id, p) in load_params(path)? {
            let table = sweep_32_with(&HullSurface::new(&p)?, &opts)?;
            text.push_str(&format_drag_row(&id, &table));
            text.push('\n');
        }
    }
    write_output(a.out.as_deref(), &text)
}

fn check(a: &CheckArgs) -> Result<()> {
    echo_config("check", json!({ "params": a.params, "verbose": a.verbose }));
    let rows = load_params(&a.params)?;
    let mut out = String::from("hull_id,feasible,violations\n");
    for (id, p) in &rows {
        let r = check_feasibility(p)?;
        let _ = writeln!(out, "{id},{},{}", r.feasible, r.violation_count());
        if a.verbose {
            for c in &r.constraints {
                let _ = writeln!(out, "  {} {} margin {:.6e}", c.id, c.name, c.margin);
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn ga_config(cli: &Cli, ga: &GaArgs) -> GaConfig {
    GaConfig {
        population: ga.population,
        generations: ga.generations,
        seed: cli.seed,
        ..Default::default()
    }
}

fn reconstruct(cli: &Cli, a: &ReconstructArgs) -> Result<()> {
    let cfg = ga_config(cli, &a.ga);
    echo_config(
        "reconstruct",
        json!({ "target": a.target, "samples": a.samples, "out": a.out, "population": cfg.population, "generations": cfg.generations, "seed": cfg.seed }),
    );
    let target = load_target_cloud(&a.target, a.samples, cli.seed)?.aligned();
    let r = reconstruct_hull(&target.cloud, &cfg)?;
    create_dir(&a.out)?;
    save_params(&a.out.join("params.csv"), &[("fit".to_string(), r.params)])?;
    let mut hist = String::from("generation,best_cd,mean_cd,feasible\n");
    for h in &r.history {
        let _ = writeln!(
            hist,
            "{},{:.12e},{:.12e},{}",
            h.generation, h.best_cd, h.mean_cd, h.feasible
        );
    }
    write_output(Some(&a.out.join("history.csv")), &hist)?;
    println!("cd,rms_cd,normalized_rms_pct,N_A,N_B");
    println!("{}", r.chamfer.report_line());
    Ok(())
}

fn train_cmd(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let cfg = TrainingConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.learning_rate,
        seed: cli.seed,
        ..Default::default()
    };
    echo_config(
        "train",
        json!({ "data": a.data, "out": a.out, "training": cfg }),
    );
    let data = dataset::load_training_data(&a.data)?;
    let (model, report) = train(&data.inputs, &data.cw, &cfg)?;
    model.save(&a.out)?;
    let log = a.out.with_extension("loss.csv");
    write_output(Some(&log), &report.table())?;
    println!(
        "rows {} train / {} validation, {} up-sampled copies; best epoch {}; validation R2 {:.6}",
        report.train_rows,
        report.val_rows,
        report.upsampled_copies,
        report.best_epoch,
        report.val_r2
    );
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<()> {
    echo_config(
        "predict",
        json!({ "model": a.model, "params": a.params, "speed_knots": a.speed_knots, "draft_frac": a.draft_frac }),
    );
    let model = SurrogateModel::load(&a.model)?;
    let rows = load_params(&a.params)?;
    let header = drag_header();
    let cw_cols: Vec<&str> = header.split(',').filter(|c| c.starts_with("Cw_")).collect();
    let mut out = format!("hull_id,{}", cw_cols.join(","));
    if a.speed_knots.is_some() {
        out.push_str(",rt_n,cw");
    }
    out.push('\n');
    for (id, p) in &rows {
        out.push_str(id);
        for v in model.predict(p.shape_terms())? {
            let _ = write!(out, ",{:.12e}", 10f64.powf(v));
        }
        if let Some(knots) = a.speed_knots {
            let op = OperatingPoint {
                speed: knots * KNOT,
                draft: Draft::Fraction(
                    a.draft_frac
                        .unwrap_or(p.get(hullkit::params::idx::DESIGN_DRAFT)),
                ),
                displacement: None,
            };
            op.validate()?;
            match evaluate_drag(p, &op, DragEvaluator::Surrogate(&model))? {
                Some(o) => {
                    let _ = write!(out, ",{:.12e},{:.12e}", o[0], o[1]);
                }
                None => out.push_str(",nan,nan"),
            }
        }
        out.push('\n');
    }
    write_output(a.out.as_deref(), &out)
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Result<()> {
    let (seed_id, seed) = match &a.params {
        Some(path) => select_rows(path, a.id.as_deref())?
            .into_iter()
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("{} has no hulls", path.display())))?,
        None => ("seed".to_string(), case_study_seed()),
    };
    if !check_feasibility(&seed)?.feasible {
        return Err(Error::Infeasible(format!(
            "seed hull {seed_id} violates its constraints"
        )));
    }
    let mask = match a.freeze_all_except {
        FreeGroups::Bulbs => ParameterMask::bulbs(&seed),
        FreeGroups::Ends => ParameterMask::ends(&seed),
        FreeGroups::None => ParameterMask::none(),
    };
    let draft = match (a.draft_frac, a.displacement_m3) {
        (Some(f), _) => Draft::Fraction(f),
        (None, Some(_)) => Draft::Fraction(seed.get(hullkit::params::idx::DESIGN_DRAFT)),
        (None, None) => Draft::Absolute(seed.design_draft()),
    };
    let op = OperatingPoint {
        speed: a.speed_knots * KNOT,
        draft,
        displacement: a.displacement_m3,
    };
    let cfg = GaConfig {
        mask,
        ..ga_config(cli, &a.ga)
    };
    echo_config(
        "optimize",
        json!({
            "seed_hull": seed_id, "free": format!("{:?}", a.freeze_all_except).to_lowercase(),
            "model": a.model, "operating_point": op, "population": cfg.population,
            "generations": cfg.generations, "seed": cfg.seed, "out": a.out,
        }),
    );
    let model = a.model.as_deref().map(SurrogateModel::load).transpose()?;
    let evaluator = match &model {
        Some(m) => DragEvaluator::Surrogate(m),
        None => DragEvaluator::Direct,
    };
    let set = optimize_drag(Some(&seed), &op, &cfg, evaluator)?;

    create_dir(&a.out)?;
    let rows: Vec<(String, HullParameters)> = set
        .members
        .iter()
        .enumerate()
        .map(|(k, m)| (format!("opt-{k}"), m.params))
        .collect();
    let mut table = table_header();
    table.push('\n');
    table.push_str(&format_params_row(&seed_id, &seed));
    table.push('\n');
    for (id, p) in &rows {
        table.push_str(&format_params_row(id, p));
        table.push('\n');
    }
    write_output(Some(&a.out.join("params.csv")), &table)?;
    let mut obj = String::from("hull_id,rank,rt_n,cw,surrogate_rt_n,surrogate_cw\n");
    for ((id, _), m) in rows.iter().zip(&set.members) {
        let (sr, sc) = match &m.surrogate_objectives {
            Some(s) => (format!("{:.12e}", s[0]), format!("{:.12e}", s[1])),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            obj,
            "{id},{},{:.12e},{:.12e},{sr},{sc}",
            m.rank, m.objectives[0], m.objectives[1]
        );
    }
    write_output(Some(&a.out.join("objectives.csv")), &obj)?;
    let mut hist = String::from("generation,front_size,feasible,best_rt_n,best_cw\n");
    for h in &set.history {
        let _ = writeln!(
            hist,
            "{},{},{},{:.12e},{:.12e}",
            h.generation, h.front_size, h.feasible, h.best[0], h.best[1]
        );
    }
    write_output(Some(&a.out.join("history.csv")), &hist)?;

    let best = set
        .min_rt()
        .ok_or_else(|| Error::Optimizer("empty result".into()))?;
    match &set.seed_objectives {
        Some(s) => println!(
            "seed Rt {:.6e} N, best Rt {:.6e} N, reduction {:.2}%",
            s[0],
            best.objectives[0],
            100.0 * (1.0 - best.objectives[0] / s[0])
        ),
        None => println!(
            "best Rt {:.6e} N (seed not evaluable at this condition)",
            best.objectives[0]
        ),
    }
    Ok(())
}

fn stats(a: &StatsArgs) -> Result<()> {
    let opts = StatsOptions {
        speed: a.speed_knots * KNOT,
        displacements: a.displacement_m3.clone(),
        query_draft_frac: a.draft_frac,
        ..Default::default()
    };
    echo_config("stats", json!({ "data": a.data, "stats": opts }));
    let st = dataset::dataset_stats(&a.data, &opts)?;
    write_output(a.out.as_deref(), &st.render())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::InvalidInput("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Generate(a) => generate(cli, a),
        Command::Mesh(a) => mesh(a),
        Command::Drag(a) => drag(a),
        Command::Check(a) => check(a),
        Command::Reconstruct(a) => reconstruct(cli, a),
        Command::Train(a) => train_cmd(cli, a),
        Command::Predict(a) => predict(a),
        Command::Optimize(a) => optimize(cli, a),
        Command::Stats(a) => stats(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
