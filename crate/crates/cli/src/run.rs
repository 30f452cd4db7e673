use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use plasmon_core::farfield::{scattered_field, FarFieldJob};
use plasmon_core::geometry::ParticleSystem;
use plasmon_core::npop::assemble;
use plasmon_core::polarization::pt_numeric_with;
use plasmon_core::scan::{detect_peaks, distance_sweep, frequency_sweep, PeakSet};
use plasmon_core::{io, Error};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Command, Plan, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io { .. } => 1,
        }
    }
}

#[derive(Serialize)]
struct PeakRecord {
    omega: f64,
    wavelength_paper: f64,
    value: f64,
    prominence: f64,
}

fn peak_records(p: &PeakSet) -> Vec<PeakRecord> {
    p.peaks
        .iter()
        .map(|p| PeakRecord {
            omega: p.omega,
            wavelength_paper: p.wavelength_paper,
            value: p.value,
            prominence: p.prominence,
        })
        .collect()
}

/// Artifacts are produced in memory and written only once every stage
/// succeeded, so a failed run leaves nothing behind.
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    timings: Vec<(String, f64)>,
    diagnostics: Map<String, Value>,
    warnings: Vec<String>,
}

impl Outputs {
    fn new() -> Self {
        Outputs {
            files: Vec::new(),
            timings: Vec::new(),
            diagnostics: Map::new(),
            warnings: Vec::new(),
        }
    }

    fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.push((name.into(), body.into()));
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings.push((stage.to_string(), t.elapsed().as_secs_f64()));
        out
    }

    fn note(&mut self, key: &str, v: Value) {
        self.diagnostics.insert(key.to_string(), v);
    }
}

fn json_bytes(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn system(plan: &Plan) -> Result<ParticleSystem, RunError> {
    ParticleSystem::with_labels(plan.curves.clone(), plan.labels.clone(), plan.min_distance)
        .map_err(|e| RunError::Config(format!("shapes: {e}")))
}

fn run_spectrum(plan: &Plan, out: &mut Outputs) -> Result<(), RunError> {
    let system = system(plan)?;
    let np = out.timed("assemble", || assemble(&system));
    let spectrum = out.timed("eigensolve", || np.spectrum().cloned())?;
    out.note("n_nodes", json!(spectrum.n_nodes));
    out.note("imaginary_defect", json!(spectrum.imaginary_defect()));
    out.note("max_real", json!(spectrum.max_real()));
    out.add("spectrum.csv", io::spectrum_csv(&spectrum));
    Ok(())
}

fn run_polarization(plan: &Plan, out: &mut Outputs) -> Result<(), RunError> {
    let system = system(plan)?;
    let np = out.timed("assemble", || assemble(&system));
    let tensors = out.timed("resolve", || {
        plan.lambdas
            .iter()
            .map(|&l| pt_numeric_with(&np, l, &plan.opts))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut csv = io::tensor_header(2);
    csv.push('\n');
    for t in &tensors {
        let one = io::tensor_csv(t);
        csv.push_str(one.lines().nth(1).expect("tensor row"));
        csv.push('\n');
    }
    out.note(
        "lambdas",
        json!(plan.lambdas.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>()),
    );
    out.note(
        "rcond",
        json!(tensors.iter().map(|t| t.condition).collect::<Vec<_>>()),
    );
    out.add("tensor.csv", csv);
    Ok(())
}

fn run_scan(plan: &Plan, out: &mut Outputs) -> Result<(), RunError> {
    let system = system(plan)?;
    let np = out.timed("assemble", || assemble(&system));
    let sweep = out.timed("sweep", || frequency_sweep(&np, &plan.material, &plan.grid, &plan.opts))?;
    let peaks = detect_peaks(&sweep, plan.prominence);
    out.note("n_peaks", json!(peaks.len()));
    out.note(
        "failed_rows",
        json!(sweep.rows.iter().filter(|r| r.failed).count()),
    );
    out.note("shape_hash", json!(format!("{:016x}", sweep.shape_hash)));
    out.add("sweep.csv", io::sweep_csv(&sweep));
    out.add("peaks.json", json_bytes(&peak_records(&peaks)));
    if plan.gnuplot {
        out.add("sweep.gp", io::sweep_gnuplot("sweep.csv", "sweep"));
    }
    Ok(())
}

fn sweep_name(i: usize, d: f64) -> String {
    format!("sweep_{i:02}_d{d}.csv")
}

fn run_couple(plan: &Plan, out: &mut Outputs) -> Result<(), RunError> {
    let runs = out.timed("distance_sweep", || {
        distance_sweep(
            &plan.curves[0],
            &plan.curves[1],
            &plan.distances,
            &plan.material,
            &plan.grid,
            &plan.opts,
            plan.min_distance,
        )
    })?;
    let mut peaks = Vec::new();
    let mut leading = Vec::new();
    let mut script = String::from(
        "set datafile separator ','\nset logscale y\nset xlabel 'wavelength (m)'\nset ylabel '|M|_F'\nplot ",
    );
    for (i, run) in runs.iter().enumerate() {
        if run.spectrum.max_real() > 0.5 + 1e-8 {
            out.warnings.push(format!(
                "gap {}: discrete eigenvalue {:.6} exceeds 1/2; the gap is under-resolved, increase n_nodes",
                run.distance,
                run.spectrum.max_real()
            ));
        }
        let name = sweep_name(i, run.distance);
        out.add(name.clone(), io::sweep_csv(&run.sweep));
        let p = detect_peaks(&run.sweep, plan.prominence);
        peaks.push(json!({ "distance": run.distance, "peaks": peak_records(&p) }));
        leading.push(json!({
            "distance": run.distance,
            "leading_coupled_eigenvalue": plasmon_core::scan::leading_coupled_eigenvalue(&run.spectrum, 2),
            "max_real": run.spectrum.max_real(),
            "imaginary_defect": run.spectrum.imaginary_defect(),
        }));
        if i > 0 {
            script.push_str(", \\\n     ");
        }
        script.push_str(&format!("'{name}' using 3:16 with lines title 'd = {}'", run.distance));
    }
    script.push('\n');
    let trajectory: Vec<_> = runs.iter().map(|r| (r.distance, r.spectrum.clone())).collect();
    out.add("trajectory.csv", io::trajectory_csv(&trajectory));
    out.add("peaks.json", json_bytes(&peaks));
    if plan.gnuplot {
        out.add("couple.gp", script);
    }
    out.note("spectra", Value::Array(leading));
    Ok(())
}

fn run_farfield(plan: &Plan, out: &mut Outputs) -> Result<(), RunError> {
    let f = plan.farfield.as_ref().expect("validated farfield plan");
    let mut job = FarFieldJob::new(f.z, f.delta, f.me.clone(), f.mh.clone(), f.wave, f.points.clone());
    job.r_min = f.r_min;
    let offending = job.offending_points();
    if !offending.is_empty() {
        let list: Vec<String> = offending
            .iter()
            .map(|(i, d)| format!("#{i} {:?} at distance {d:e}", f.points[*i]))
            .collect();
        return Err(RunError::Numerical(format!(
            "{} evaluation point(s) inside the r_min = {:e} shell: {}",
            list.len(),
            f.r_min,
            list.join("; ")
        )));
    }
    let field = out.timed("evaluate", || scattered_field(&job))?;
    out.note("k_m", json!(f.wave.k_m));
    out.note("r_min", json!(f.r_min));
    out.add("field.csv", io::field_csv(&f.points, &field));
    Ok(())
}

pub struct Summary {
    pub output_dir: PathBuf,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
}

fn write(path: &Path, body: &[u8]) -> Result<(), RunError> {
    std::fs::write(path, body).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a validated plan and writes its artifacts, the manifest last.
pub fn execute(cfg: &RunConfig, plan: &Plan, output_dir: &Path) -> Result<Summary, RunError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut out = Outputs::new();
    match plan.command {
        Command::Spectrum => run_spectrum(plan, &mut out)?,
        Command::Polarization => run_polarization(plan, &mut out)?,
        Command::Scan => run_scan(plan, &mut out)?,
        Command::Couple => run_couple(plan, &mut out)?,
        Command::Farfield => run_farfield(plan, &mut out)?,
    }

    std::fs::create_dir_all(output_dir).map_err(|source| RunError::Io {
        path: output_dir.to_path_buf(),
        source,
    })?;
    for (name, body) in &out.files {
        write(&output_dir.join(name), body)?;
    }
    let artifacts: Vec<String> = out.files.iter().map(|(n, _)| n.clone()).collect();
    let warnings = out.warnings.clone();
    let manifest = json!({
        "command": plan.command.as_str(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "artifacts": artifacts,
        "versions": {
            "plasmon-cli": env!("CARGO_PKG_VERSION"),
            "plasmon-core": plasmon_core::VERSION,
        },
        "threads": rayon::current_num_threads(),
        "started_unix_s": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        "wall_clock_s": clock.elapsed().as_secs_f64(),
        "timings_s": out.timings.iter().map(|(s, t)| json!({ "stage": s, "seconds": t })).collect::<Vec<_>>(),
        "diagnostics": Value::Object(out.diagnostics),
        "warnings": out.warnings,
    });
    write(&output_dir.join("manifest.json"), &json_bytes(&manifest))?;
    Ok(Summary {
        output_dir: output_dir.to_path_buf(),
        artifacts,
        warnings,
    })
}
