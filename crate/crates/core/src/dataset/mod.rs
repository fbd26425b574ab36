//! Parallel, resumable dataset builds.
//!
//! A dataset directory holds `params.csv`, `drag.csv`, optional
//! `meshes/<id>.stl` and `images/<id>_view{1..5}.ppm`, and `manifest.json`.
//! Hulls are processed in chunks in canonical order (subset, then index);
//! after each chunk the table rows are appended and the manifest is replaced
//! atomically, so an interrupted build can always be resumed.

mod stats;

pub use stats::{dataset_stats, CwSummary, DatasetStats, MinDragEntry, NnPoint, StatsOptions};

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::mesh::generate_mesh;
use crate::geom::render::render_views_with_prefix;
use crate::geom::stl::{export_stl, StlFormat};
use crate::geom::surface::HullSurface;
use crate::hydro::table::{
    drag_header, format_drag_row, load_drag, sweep_32_with, SweepOptions, NUM_CONDITIONS,
};
use crate::params::{
    check_feasibility, format_params_row, parse_params, sample_feasible, table_header,
    HullParameters, ParameterRanges, Subset, DEFAULT_SAMPLING_BUDGET, NUM_SHAPE_TERMS,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PARAMS_FILE: &str = "params.csv";
pub const DRAG_FILE: &str = "drag.csv";
pub const MESH_DIR: &str = "meshes";
pub const IMAGE_DIR: &str = "images";
pub const MANIFEST_VERSION: u32 = 1;

/// Stations and vertical levels of dataset meshes.
pub const DATASET_MESH_NX: usize = 120;
pub const DATASET_MESH_NZ: usize = 30;

const SUBSETS: [Subset; 3] = [Subset::Full, Subset::NoBulbs, Subset::LargeShip];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// Hulls per subset, in subset order 1, 2, 3.
    pub counts: [usize; 3],
    pub seed: u64,
    pub meshes: bool,
    pub images: bool,
    pub mesh_nx: usize,
    pub mesh_nz: usize,
    pub stl_format: StlFormat,
    pub sweep: SweepOptions,
    pub sampling_budget: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            counts: [100, 100, 100],
            seed: 0,
            meshes: true,
            images: true,
            mesh_nx: DATASET_MESH_NX,
            mesh_nz: DATASET_MESH_NZ,
            stl_format: StlFormat::Binary,
            sweep: SweepOptions::default(),
            sampling_budget: DEFAULT_SAMPLING_BUDGET,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mesh_nx < 2 || self.mesh_nz < 2 {
            return Err(Error::InvalidInput(
                "mesh grid needs at least 2 x 2 points".into(),
            ));
        }
        if self.sampling_budget == 0 {
            return Err(Error::InvalidInput(
                "sampling budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Settings that never change the content of a dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Stop after this many new hulls in this invocation.
    pub max_new_hulls: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HullStatus {
    Pending,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullEntry {
    pub id: String,
    pub status: HullStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterProperties {
    /// kg/m^3
    pub density: f64,
    /// m/s^2
    pub gravity: f64,
    /// m^2/s
    pub viscosity: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFiles {
    pub params: String,
    pub drag: String,
    pub meshes: Option<String>,
    pub images: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub runs: usize,
    pub wall_seconds: f64,
    pub hulls_built: usize,
    pub seconds_per_hull: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub config: DatasetConfig,
    pub ranges: Vec<ParameterRanges>,
    pub water: WaterProperties,
    pub files: DatasetFiles,
    pub requested: [usize; 3],
    pub completed: [usize; 3],
    pub hulls: Vec<HullEntry>,
    pub timing: Timing,
}

impl DatasetManifest {
    fn new(cfg: &DatasetConfig) -> Self {
        let hulls = canonical_order(&cfg.counts)
            .map(|(s, i)| HullEntry {
                id: hull_id(s, i),
                status: HullStatus::Pending,
            })
            .collect();
        DatasetManifest {
            version: MANIFEST_VERSION,
            config: cfg.clone(),
            ranges: SUBSETS
                .iter()
                .map(|&s| ParameterRanges::subset(s))
                .collect(),
            water: WaterProperties {
                density: cfg.sweep.density,
                gravity: cfg.sweep.gravity,
                viscosity: cfg.sweep.viscosity,
            },
            files: DatasetFiles {
                params: PARAMS_FILE.into(),
                drag: DRAG_FILE.into(),
                meshes: cfg.meshes.then(|| MESH_DIR.into()),
                images: cfg.images.then(|| IMAGE_DIR.into()),
            },
            requested: cfg.counts,
            completed: [0; 3],
            hulls,
            timing: Timing::default(),
        }
    }

    pub fn total_completed(&self) -> usize {
        self.completed.iter().sum()
    }

    pub fn is_complete(&self) -> bool {
        self.completed == self.requested
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Integrity(format!("corrupted manifest {}: {e}", path.display())))?;
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Integrity(format!(
                "unsupported manifest version {}",
                self.version
            )));
        }
        if self.requested != self.config.counts || self.ranges.len() != 3 {
            return Err(Error::Integrity(
                "manifest counts or ranges are inconsistent".into(),
            ));
        }
        let expected: Vec<String> = canonical_order(&self.requested)
            .map(|(s, i)| hull_id(s, i))
            .collect();
        if self.hulls.len() != expected.len()
            || self.hulls.iter().zip(&expected).any(|(h, e)| &h.id != e)
        {
            return Err(Error::Integrity(
                "manifest hull list does not match the requested counts".into(),
            ));
        }
        for (k, (&c, &r)) in self.completed.iter().zip(&self.requested).enumerate() {
            if c > r {
                return Err(Error::Integrity(format!(
                    "subset {} has {c} completed of {r} requested",
                    k + 1
                )));
            }
        }
        // Completion is a prefix of each subset in canonical order.
        let mut offset = 0;
        for (k, &r) in self.requested.iter().enumerate() {
            for (i, h) in self.hulls[offset..offset + r].iter().enumerate() {
                let want = if i < self.completed[k] {
                    HullStatus::Complete
                } else {
                    HullStatus::Pending
                };
                if h.status != want {
                    return Err(Error::Integrity(format!(
                        "status of {} disagrees with completed counts",
                        h.id
                    )));
                }
            }
            offset += r;
        }
        Ok(())
    }

    fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("cannot serialize manifest: {e}")))?;
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

pub fn hull_id(subset: Subset, index: usize) -> String {
    format!("{}-{index}", subset.index())
}

fn canonical_order(counts: &[usize; 3]) -> impl Iterator<Item = (Subset, usize)> + '_ {
    SUBSETS
        .iter()
        .zip(counts)
        .flat_map(|(&s, &n)| (0..n).map(move |i| (s, i)))
}

/// Generator for hull `index` of `subset`, independent of every other hull.
pub fn hull_rng(seed: u64, subset: Subset, index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(subset.index() as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(index as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Samples the parameters of one dataset hull.
pub fn sample_dataset_hull(
    cfg: &DatasetConfig,
    subset: Subset,
    index: usize,
) -> Result<HullParameters> {
    let mut rng = hull_rng(cfg.seed, subset, index);
    sample_feasible(
        &ParameterRanges::subset(subset),
        &mut rng,
        cfg.sampling_budget,
    )
}

struct HullRows {
    params: String,
    drag: String,
}

fn write_artifacts(dir: &Path, cfg: &DatasetConfig, id: &str, surface: &HullSurface) -> Result<()> {
    if !(cfg.meshes || cfg.images) {
        return Ok(());
    }
    let mesh = generate_mesh(surface, cfg.mesh_nx, cfg.mesh_nz)?;
    if cfg.meshes {
        export_stl(
            &mesh,
            &dir.join(MESH_DIR).join(format!("{id}.stl")),
            cfg.stl_format,
        )?;
    }
    if cfg.images {
        render_views_with_prefix(&mesh, &dir.join(IMAGE_DIR), &format!("{id}_view"))?;
    }
    Ok(())
}

fn build_hull(dir: &Path, cfg: &DatasetConfig, subset: Subset, index: usize) -> Result<HullRows> {
    let id = hull_id(subset, index);
    let p = sample_dataset_hull(cfg, subset, index)?;
    let surface = HullSurface::new(&p)?;
    let table = sweep_32_with(&surface, &cfg.sweep)?;
    write_artifacts(dir, cfg, &id, &surface)?;
    Ok(HullRows {
        params: format_params_row(&id, &p),
        drag: format_drag_row(&id, &table),
    })
}

fn artifact_paths(dir: &Path, cfg: &DatasetConfig, id: &str) -> Vec<PathBuf> {
    let mut v = Vec::new();
    if cfg.meshes {
        v.push(dir.join(MESH_DIR).join(format!("{id}.stl")));
    }
    if cfg.images {
        v.extend((1..=5).map(|k| dir.join(IMAGE_DIR).join(format!("{id}_view{k}.ppm"))));
    }
    v
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidInput("worker count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn append(path: &Path, lines: &[String]) -> Result<()> {
    let mut f = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut buf = String::new();
    for l in lines {
        buf.push_str(l);
        buf.push('\n');
    }
    f.write_all(buf.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    f.sync_data().map_err(|e| Error::io(path, e))
}

/// Starts a new dataset in `dir`, which must not already hold a manifest.
pub fn build_dataset(
    dir: &Path,
    cfg: &DatasetConfig,
    opts: &BuildOptions,
) -> Result<DatasetManifest> {
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mpath = dir.join(MANIFEST_FILE);
    if mpath.exists() {
        return Err(Error::InvalidInput(format!(
            "{} already exists; resume the build instead",
            mpath.display()
        )));
    }
    for (name, header) in [(PARAMS_FILE, table_header()), (DRAG_FILE, drag_header())] {
        let path = dir.join(name);
        fs::write(&path, format!("{header}\n")).map_err(|e| Error::io(&path, e))?;
    }
    for (on, sub) in [(cfg.meshes, MESH_DIR), (cfg.images, IMAGE_DIR)] {
        if on {
            let p = dir.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
    }
    let manifest = DatasetManifest::new(cfg);
    manifest.save(dir)?;
    run(dir, manifest, opts)
}

/// Continues the build recorded in `dir/manifest.json`. A complete dataset is
/// left untouched apart from regenerating missing mesh and image files.
pub fn resume(dir: &Path, opts: &BuildOptions) -> Result<DatasetManifest> {
    let manifest = DatasetManifest::load(dir)?;
    manifest.config.validate()?;
    let done = manifest.total_completed();
    for name in [&manifest.files.params, &manifest.files.drag] {
        truncate_table(&dir.join(name), done, &manifest)?;
    }
    repair_artifacts(dir, &manifest, opts)?;
    if manifest.is_complete() {
        return Ok(manifest);
    }
    run(dir, manifest, opts)
}

/// Checks that `path` starts with the rows of the completed hulls and drops
/// rows appended after the last manifest update.
fn truncate_table(path: &Path, completed: usize, m: &DatasetManifest) -> Result<()> {
    if !path.exists() {
        return Err(Error::Integrity(format!(
            "manifest references missing file {}",
            path.display()
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut keep = 0usize;
    let mut rows = 0usize;
    for (n, line) in text.split_inclusive('\n').enumerate() {
        if n > completed {
            break;
        }
        if !line.ends_with('\n') {
            break;
        }
        if n > 0 {
            let id = line.split(',').next().unwrap_or_default();
            if id != m.hulls[n - 1].id {
                return Err(Error::Integrity(format!(
                    "{}: row {n} is {id:?}, expected {}",
                    path.display(),
                    m.hulls[n - 1].id
                )));
            }
            rows += 1;
        }
        keep += line.len();
    }
    if rows < completed {
        return Err(Error::Integrity(format!(
            "{} has {rows} rows but the manifest records {completed} completed hulls",
            path.display()
        )));
    }
    if keep < text.len() {
        log::warn!(
            "dropping {} trailing bytes from {}",
            text.len() - keep,
            path.display()
        );
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        f.set_len(keep as u64).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn repair_artifacts(dir: &Path, m: &DatasetManifest, opts: &BuildOptions) -> Result<()> {
    let cfg = &m.config;
    if !(cfg.meshes || cfg.images) {
        return Ok(());
    }
    let missing: Vec<String> = m
        .hulls
        .iter()
        .filter(|h| h.status == HullStatus::Complete)
        .filter(|h| artifact_paths(dir, cfg, &h.id).iter().any(|p| !p.exists()))
        .map(|h| h.id.clone())
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    log::info!("regenerating artifacts for {} hulls", missing.len());
    for (on, sub) in [(cfg.meshes, MESH_DIR), (cfg.images, IMAGE_DIR)] {
        if on {
            let p = dir.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
    }
    let ppath = dir.join(&m.files.params);
    let text = fs::read_to_string(&ppath).map_err(|e| Error::io(&ppath, e))?;
    let rows = parse_params(&text)?;
    with_pool(opts.workers, || {
        rows.par_iter()
            .filter(|(id, _)| missing.contains(id))
            .try_for_each(|(id, p)| write_artifacts(dir, cfg, id, &HullSurface::new(p)?))
    })?
}

fn run(dir: &Path, mut manifest: DatasetManifest, opts: &BuildOptions) -> Result<DatasetManifest> {
    let cfg = manifest.config.clone();
    let start = Instant::now();
    let mut pending: Vec<(usize, Subset, usize)> = canonical_order(&cfg.counts)
        .enumerate()
        .filter(|(k, _)| manifest.hulls[*k].status == HullStatus::Pending)
        .map(|(k, (s, i))| (k, s, i))
        .collect();
    if let Some(n) = opts.max_new_hulls {
        pending.truncate(n);
    }
    let chunk = opts
        .workers
        .unwrap_or_else(rayon::current_num_threads)
        .max(1)
        * 4;
    let mut built = 0;
    let outcome = (|| -> Result<()> {
        for jobs in pending.chunks(chunk) {
            let rows: Vec<HullRows> = with_pool(opts.workers, || {
                jobs.par_iter()
                    .map(|&(_, s, i)| build_hull(dir, &cfg, s, i))
                    .collect::<Result<_>>()
            })??;
            let params: Vec<String> = rows.iter().map(|r| r.params.clone()).collect();
            let drag: Vec<String> = rows.into_iter().map(|r| r.drag).collect();
            append(&dir.join(&manifest.files.params), &params)?;
            append(&dir.join(&manifest.files.drag), &drag)?;
            for &(k, s, _) in jobs {
                manifest.hulls[k].status = HullStatus::Complete;
                manifest.completed[s.index() as usize - 1] += 1;
            }
            built += jobs.len();
            manifest.save(dir)?;
            log::info!(
                "{} of {} hulls complete",
                manifest.total_completed(),
                manifest.hulls.len()
            );
        }
        Ok(())
    })();
    let t = &mut manifest.timing;
    t.runs += 1;
    t.wall_seconds += start.elapsed().as_secs_f64();
    t.hulls_built += built;
    t.seconds_per_hull = if t.hulls_built > 0 {
        t.wall_seconds / t.hulls_built as f64
    } else {
        0.0
    };
    manifest.save(dir)?;
    outcome?;
    Ok(manifest)
}

/// Loads every completed hull and re-checks its feasibility.
pub fn load_dataset_params(dir: &Path) -> Result<(DatasetManifest, Vec<(String, HullParameters)>)> {
    let m = DatasetManifest::load(dir)?;
    let path = dir.join(&m.files.params);
    if !path.exists() {
        return Err(Error::Integrity(format!(
            "manifest references missing file {}",
            path.display()
        )));
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut rows = parse_params(&text)?;
    if rows.len() < m.total_completed() {
        return Err(Error::Integrity(format!(
            "{} is missing rows",
            path.display()
        )));
    }
    rows.truncate(m.total_completed());
    for (id, p) in &rows {
        if !check_feasibility(p)?.feasible {
            return Err(Error::Integrity(format!("stored hull {id} is infeasible")));
        }
    }
    Ok((m, rows))
}

/// Shape terms and wave drag coefficients of the completed hulls.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingData {
    pub ids: Vec<String>,
    /// One row of 44 shape terms per hull.
    pub inputs: Array2<f64>,
    /// One row of 32 Cw values per hull.
    pub cw: Array2<f64>,
}

/// Joins `params.csv` and `drag.csv` of a dataset on hull id.
pub fn load_training_data(dir: &Path) -> Result<TrainingData> {
    let (m, rows) = load_dataset_params(dir)?;
    let path = dir.join(&m.files.drag);
    if !path.exists() {
        return Err(Error::Integrity(format!(
            "manifest references missing file {}",
            path.display()
        )));
    }
    let drag = load_drag(&path)?;
    if drag.len() < rows.len() {
        return Err(Error::Integrity(format!(
            "{} has fewer rows than {}",
            path.display(),
            m.files.params
        )));
    }
    let n = rows.len();
    let mut inputs = Array2::zeros((n, NUM_SHAPE_TERMS));
    let mut cw = Array2::zeros((n, NUM_CONDITIONS));
    for (k, ((id, p), d)) in rows.iter().zip(&drag).enumerate() {
        if id != &d.id {
            return Err(Error::Integrity(format!(
                "drag row {} does not match hull {id}",
                d.id
            )));
        }
        inputs.row_mut(k).assign(&ArrayView1::from(p.shape_terms()));
        cw.row_mut(k).assign(&ArrayView1::from(&d.table.cw[..]));
    }
    Ok(TrainingData {
        ids: rows.into_iter().map(|(id, _)| id).collect(),
        inputs,
        cw,
    })
}
