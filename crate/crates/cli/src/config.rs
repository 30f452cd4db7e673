//! Run configuration: TOML schema plus the semantic checks that turn it into a
//! ready-to-run [`Plan`]. Nothing here touches the filesystem beyond reading
//! the config itself.

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use plasmon_core::farfield::{PlaneWave, Vec3, DEFAULT_R_MIN_FACTOR};
use plasmon_core::geometry::{
    make_circle, make_ellipse, make_star, BoundaryCurve, ParticleSystem, DEFAULT_MIN_DISTANCE,
};
use plasmon_core::materials::DrudeMaterial;
use plasmon_core::npop::ResolveOptions;
use plasmon_core::polarization::{pt_sphere, PolarizationTensor};
use plasmon_core::scan::{Spacing, SweepGrid, DEFAULT_DISTANCES, DEFAULT_PROMINENCE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Polarization,
    Scan,
    Couple,
    Farfield,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Polarization => "polarization",
            Command::Scan => "scan",
            Command::Couple => "couple",
            Command::Farfield => "farfield",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub shapes: Vec<ShapeSpec>,
    pub material: Option<MaterialSpec>,
    pub grid: Option<GridSpec>,
    pub numerics: Option<NumericsSpec>,
    pub polarization: Option<PolarizationSpec>,
    pub couple: Option<CoupleSpec>,
    pub farfield: Option<FarFieldSpec>,
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeSpec {
    Circle {
        radius: Option<f64>,
        center: Option<[f64; 2]>,
        n_nodes: Option<usize>,
        label: Option<String>,
    },
    Ellipse {
        a: Option<f64>,
        b: Option<f64>,
        center: Option<[f64; 2]>,
        rotation: Option<f64>,
        n_nodes: Option<usize>,
        label: Option<String>,
    },
    Star {
        r0: Option<f64>,
        amplitude: Option<f64>,
        petals: Option<u32>,
        center: Option<[f64; 2]>,
        rotation: Option<f64>,
        n_nodes: Option<usize>,
        label: Option<String>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub eps0: Option<f64>,
    pub mu0: Option<f64>,
    pub omega_p: Option<f64>,
    pub tau: Option<f64>,
    #[serde(rename = "F")]
    pub f_fill: Option<f64>,
    pub omega0: Option<f64>,
    /// Background permittivity relative to `eps0`.
    pub eps_m_rel: Option<f64>,
    pub mu_m_rel: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpacingSpec {
    Linear,
    Log,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub wavelength_min: Option<f64>,
    pub wavelength_max: Option<f64>,
    pub n_samples: Option<usize>,
    pub spacing: Option<SpacingSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    pub eps_sing: Option<f64>,
    pub rcond_min: Option<f64>,
    pub min_distance: Option<f64>,
    pub prominence: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizationSpec {
    /// Contrasts as `[re, im]` pairs, one output row each.
    #[serde(default)]
    pub lambdas: Vec<[f64; 2]>,
    /// Frequencies whose Drude contrasts are appended after `lambdas`.
    #[serde(default)]
    pub omegas: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleSpec {
    pub distances: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TensorSpec {
    Zero,
    /// Sphere of the given radius; `lambda` defaults to the material contrast.
    Sphere {
        radius: Option<f64>,
        lambda: Option<[f64; 2]>,
    },
    Explicit {
        re: [[f64; 3]; 3],
        im: Option<[[f64; 3]; 3]>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PointSetSpec {
    Line {
        start: [f64; 3],
        end: [f64; 3],
        n: usize,
    },
    Sphere {
        center: Option<[f64; 3]>,
        radius: f64,
        n_theta: usize,
        n_phi: usize,
    },
    List {
        points: Vec<[f64; 3]>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldSpec {
    pub omega: f64,
    pub delta: f64,
    pub z: Option<[f64; 3]>,
    pub direction: Option<[f64; 3]>,
    pub polarization: Option<[f64; 3]>,
    pub polarization_im: Option<[f64; 3]>,
    pub r_min: Option<f64>,
    pub me: TensorSpec,
    pub mh: Option<TensorSpec>,
    pub points: PointSetSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub gnuplot: Option<bool>,
}

/// A configuration problem, reported with the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(key: &str, msg: impl std::fmt::Display) -> Result<T, ConfigError> {
    Err(ConfigError(format!("{key}: {msg}")))
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct FarFieldPlan {
    pub z: Vec3,
    pub delta: f64,
    pub r_min: f64,
    pub wave: PlaneWave,
    pub me: PolarizationTensor,
    pub mh: PolarizationTensor,
    pub points: Vec<Vec3>,
}

/// Everything a command needs, checked up front.
#[derive(Debug, Clone)]
pub struct Plan {
    pub command: Command,
    pub curves: Vec<BoundaryCurve>,
    pub labels: Vec<String>,
    pub material: DrudeMaterial,
    pub grid: SweepGrid,
    pub opts: ResolveOptions,
    pub min_distance: f64,
    pub prominence: f64,
    pub lambdas: Vec<Complex64>,
    pub distances: Vec<f64>,
    pub farfield: Option<FarFieldPlan>,
    pub gnuplot: bool,
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        err(key, format!("must be positive and finite, got {v}"))
    }
}

fn build_curve(i: usize, spec: &ShapeSpec) -> Result<(BoundaryCurve, String), ConfigError> {
    let key = format!("shapes[{i}]");
    let wrap = |r: plasmon_core::Result<BoundaryCurve>| r.map_err(|e| ConfigError(format!("{key}: {e}")));
    Ok(match spec {
        ShapeSpec::Circle {
            radius,
            center,
            n_nodes,
            label,
        } => (
            wrap(make_circle(radius.unwrap_or(1.0), center.unwrap_or_default(), n_nodes.unwrap_or(128)))?,
            label.clone().unwrap_or_else(|| format!("circle{i}")),
        ),
        ShapeSpec::Ellipse {
            a,
            b,
            center,
            rotation,
            n_nodes,
            label,
        } => (
            wrap(make_ellipse(
                a.unwrap_or(1.0),
                b.unwrap_or(0.5),
                center.unwrap_or_default(),
                rotation.unwrap_or(0.0),
                n_nodes.unwrap_or(256),
            ))?,
            label.clone().unwrap_or_else(|| format!("ellipse{i}")),
        ),
        ShapeSpec::Star {
            r0,
            amplitude,
            petals,
            center,
            rotation,
            n_nodes,
            label,
        } => (
            wrap(make_star(
                r0.unwrap_or(1.0),
                amplitude.unwrap_or(0.3),
                petals.unwrap_or(5),
                center.unwrap_or_default(),
                rotation.unwrap_or(0.0),
                n_nodes.unwrap_or(256),
            ))?,
            label.clone().unwrap_or_else(|| format!("star{i}")),
        ),
    })
}

fn build_material(spec: Option<&MaterialSpec>) -> Result<DrudeMaterial, ConfigError> {
    let d = DrudeMaterial::default();
    let s = spec.cloned().unwrap_or_default();
    let eps0 = s.eps0.unwrap_or(d.eps0);
    let mu0 = s.mu0.unwrap_or(d.mu0);
    let m = DrudeMaterial {
        eps0,
        mu0,
        omega_p: s.omega_p.unwrap_or(d.omega_p),
        tau: s.tau.unwrap_or(d.tau),
        f_fill: s.f_fill.unwrap_or(d.f_fill),
        omega0: s.omega0.unwrap_or(d.omega0),
        eps_m: s.eps_m_rel.unwrap_or(d.eps_m / d.eps0) * eps0,
        mu_m: s.mu_m_rel.unwrap_or(1.0) * mu0,
    };
    m.validate().map_err(|e| ConfigError(format!("material: {e}")))?;
    Ok(m)
}

fn build_grid(spec: Option<&GridSpec>) -> Result<SweepGrid, ConfigError> {
    let d = SweepGrid::default();
    let s = spec.cloned().unwrap_or_default();
    let grid = SweepGrid {
        wavelength_min: s.wavelength_min.unwrap_or(d.wavelength_min),
        wavelength_max: s.wavelength_max.unwrap_or(d.wavelength_max),
        n_samples: s.n_samples.unwrap_or(d.n_samples),
        spacing: match s.spacing {
            Some(SpacingSpec::Linear) => Spacing::Linear,
            Some(SpacingSpec::Log) | None => Spacing::Log,
        },
    };
    grid.validate().map_err(|e| ConfigError(format!("grid: {e}")))?;
    Ok(grid)
}

fn build_points(spec: &PointSetSpec, z: Vec3) -> Result<Vec<Vec3>, ConfigError> {
    use std::f64::consts::PI;
    Ok(match spec {
        PointSetSpec::Line { start, end, n } => {
            if *n == 0 {
                return err("farfield.points.n", "need at least one point");
            }
            (0..*n)
                .map(|i| {
                    let t = if *n == 1 { 0.0 } else { i as f64 / (*n - 1) as f64 };
                    [0, 1, 2].map(|a| start[a] + t * (end[a] - start[a]))
                })
                .collect()
        }
        PointSetSpec::Sphere {
            center,
            radius,
            n_theta,
            n_phi,
        } => {
            positive("farfield.points.radius", *radius)?;
            if *n_theta == 0 || *n_phi == 0 {
                return err("farfield.points", "n_theta and n_phi must be positive");
            }
            let c = center.unwrap_or(z);
            let mut pts = Vec::with_capacity(n_theta * n_phi);
            for i in 0..*n_theta {
                let theta = PI * (i as f64 + 0.5) / *n_theta as f64;
                for j in 0..*n_phi {
                    let phi = 2.0 * PI * j as f64 / *n_phi as f64;
                    pts.push([
                        c[0] + radius * theta.sin() * phi.cos(),
                        c[1] + radius * theta.sin() * phi.sin(),
                        c[2] + radius * theta.cos(),
                    ]);
                }
            }
            pts
        }
        PointSetSpec::List { points } => {
            if points.is_empty() {
                return err("farfield.points.points", "need at least one point");
            }
            points.clone()
        }
    })
}

fn build_tensor(
    key: &str,
    spec: &TensorSpec,
    default_lambda: Option<Complex64>,
) -> Result<PolarizationTensor, ConfigError> {
    match spec {
        TensorSpec::Zero => Ok(PolarizationTensor::zeros(3)),
        TensorSpec::Sphere { radius, lambda } => {
            let r = positive(&format!("{key}.radius"), radius.unwrap_or(1.0))?;
            let l = match (lambda, default_lambda) {
                (Some([re, im]), _) => Complex64::new(*re, *im),
                (None, Some(l)) => l,
                (None, None) => {
                    return err(
                        &format!("{key}.lambda"),
                        "the material gives no contrast here (mu_c = mu_m); set lambda explicitly",
                    )
                }
            };
            pt_sphere(l, r).map_err(|e| ConfigError(format!("{key}: {e}")))
        }
        TensorSpec::Explicit { re, im } => {
            let im = im.unwrap_or([[0.0; 3]; 3]);
            let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(re[i][j], im[i][j]));
            PolarizationTensor::explicit(m).map_err(|e| ConfigError(format!("{key}: {e}")))
        }
    }
}

fn build_farfield(spec: &FarFieldSpec, material: &DrudeMaterial) -> Result<FarFieldPlan, ConfigError> {
    let omega = positive("farfield.omega", spec.omega)?;
    let delta = positive("farfield.delta", spec.delta)?;
    let z = spec.z.unwrap_or_default();
    let d = spec.direction.unwrap_or([0.0, 0.0, 1.0]);
    let pr = spec.polarization.unwrap_or([1.0, 0.0, 0.0]);
    let pi = spec.polarization_im.unwrap_or_default();
    let p = [0, 1, 2].map(|a| Complex64::new(pr[a], pi[a]));
    let wave = PlaneWave::new(d, p, omega, material.eps_m, material.mu_m)
        .map_err(|e| ConfigError(format!("farfield: {e}")))?;
    let contrast = material
        .contrast(omega)
        .map_err(|e| ConfigError(format!("farfield.omega: {e}")))?;
    let me = build_tensor("farfield.me", &spec.me, Some(contrast.lambda_eps))?;
    let mh = match &spec.mh {
        Some(s) => build_tensor("farfield.mh", s, contrast.lambda_mu)?,
        None => PolarizationTensor::zeros(3),
    };
    let r_min = match spec.r_min {
        Some(r) => positive("farfield.r_min", r)?,
        None => DEFAULT_R_MIN_FACTOR * delta,
    };
    Ok(FarFieldPlan {
        z,
        delta,
        r_min,
        wave,
        me,
        mh,
        points: build_points(&spec.points, z)?,
    })
}

fn require_absent<T>(v: &Option<T>, key: &str, command: Command) -> Result<(), ConfigError> {
    if v.is_some() {
        return err(key, format!("not used by the `{}` command", command.as_str()));
    }
    Ok(())
}

pub fn validate(cfg: &RunConfig) -> Result<Plan, ConfigError> {
    let cmd = cfg.command;
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for (i, s) in cfg.shapes.iter().enumerate() {
        let (c, l) = build_curve(i, s)?;
        curves.push(c);
        labels.push(l);
    }
    let mut uniq = labels.clone();
    uniq.sort();
    uniq.dedup();
    if uniq.len() != labels.len() {
        return err("shapes", "labels must be unique");
    }

    let material = build_material(cfg.material.as_ref())?;
    let grid = build_grid(cfg.grid.as_ref())?;
    let num = cfg.numerics.clone().unwrap_or_default();
    let defaults = ResolveOptions::default();
    let opts = ResolveOptions {
        eps_sing: positive("numerics.eps_sing", num.eps_sing.unwrap_or(defaults.eps_sing))?,
        rcond_min: positive("numerics.rcond_min", num.rcond_min.unwrap_or(defaults.rcond_min))?,
    };
    let min_distance = positive(
        "numerics.min_distance",
        num.min_distance.unwrap_or(DEFAULT_MIN_DISTANCE),
    )?;
    let prominence = num.prominence.unwrap_or(DEFAULT_PROMINENCE);
    if !(0.0..1.0).contains(&prominence) {
        return err("numerics.prominence", format!("must lie in [0, 1), got {prominence}"));
    }

    match cmd {
        Command::Spectrum | Command::Polarization | Command::Scan => {
            if curves.is_empty() {
                return err("shapes", "at least one shape is required");
            }
            ParticleSystem::new(curves.clone(), min_distance)
                .map_err(|e| ConfigError(format!("shapes: {e}")))?;
        }
        Command::Couple => {
            if curves.len() != 2 {
                return err("shapes", format!("couple needs exactly two shapes, got {}", curves.len()));
            }
        }
        Command::Farfield => {
            if !curves.is_empty() {
                return err("shapes", "farfield takes 3D tensors, not 2D shapes");
            }
        }
    }
    if cmd != Command::Polarization {
        require_absent(&cfg.polarization, "polarization", cmd)?;
    }
    if cmd != Command::Couple {
        require_absent(&cfg.couple, "couple", cmd)?;
    }
    if cmd != Command::Farfield {
        require_absent(&cfg.farfield, "farfield", cmd)?;
    }

    let mut lambdas = Vec::new();
    if cmd == Command::Polarization {
        let Some(p) = &cfg.polarization else {
            return err("polarization", "section required with `lambdas` and/or `omegas`");
        };
        lambdas.extend(p.lambdas.iter().map(|[re, im]| Complex64::new(*re, *im)));
        for (i, &w) in p.omegas.iter().enumerate() {
            let key = format!("polarization.omegas[{i}]");
            positive(&key, w)?;
            let c = material.contrast(w).map_err(|e| ConfigError(format!("{key}: {e}")))?;
            lambdas.push(c.lambda_eps);
        }
        if lambdas.is_empty() {
            return err("polarization", "give at least one entry in `lambdas` or `omegas`");
        }
        if let Some(i) = lambdas.iter().position(|l| !(l.re.is_finite() && l.im.is_finite())) {
            return err("polarization.lambdas", format!("entry {i} is not finite"));
        }
    }

    let mut distances = Vec::new();
    if cmd == Command::Couple {
        distances = cfg
            .couple
            .as_ref()
            .and_then(|c| c.distances.clone())
            .unwrap_or_else(|| DEFAULT_DISTANCES.to_vec());
        if distances.is_empty() {
            return err("couple.distances", "need at least one distance");
        }
        for (i, d) in distances.iter().enumerate() {
            positive(&format!("couple.distances[{i}]"), *d)?;
            let (l, r) = plasmon_core::geometry::place_pair(&curves[0], &curves[1], *d)
                .map_err(|e| ConfigError(format!("couple.distances[{i}]: {e}")))?;
            ParticleSystem::new(vec![l, r], min_distance)
                .map_err(|e| ConfigError(format!("couple.distances[{i}]: {e}")))?;
        }
    }

    let farfield = if cmd == Command::Farfield {
        let Some(f) = &cfg.farfield else {
            return err("farfield", "section required");
        };
        Some(build_farfield(f, &material)?)
    } else {
        None
    };

    Ok(Plan {
        command: cmd,
        curves,
        labels,
        material,
        grid,
        opts,
        min_distance,
        prominence,
        lambdas,
        distances,
        farfield,
        gnuplot: cfg.output.as_ref().and_then(|o| o.gnuplot).unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(text: &str) -> Result<Plan, ConfigError> {
        validate(&parse(text)?)
    }

    #[test]
    fn minimal_spectrum() {
        let p = plan("command = \"spectrum\"\n[[shapes]]\nkind = \"circle\"\n").unwrap();
        assert_eq!(p.curves.len(), 1);
        assert_eq!(p.curves[0].n_nodes(), 128);
        assert_eq!(p.grid, SweepGrid::default());
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let e = plan("command = \"spectrum\"\nbogus = 1\n").unwrap_err();
        assert!(e.0.contains("bogus") && e.0.contains("line 2"), "{e}");
        let e = plan("command = \"spectrum\"\n[[shapes]]\nkind = \"circle\"\nradiuss = 2.0\n").unwrap_err();
        assert!(e.0.contains("radiuss"), "{e}");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let e = plan("command = \"couple\"\n[[shapes]]\nkind=\"circle\"\n[[shapes]]\nkind=\"circle\"\n[couple]\ndistances=[1.0,-0.5]\n").unwrap_err();
        assert!(e.0.starts_with("couple.distances[1]"), "{e}");
        let e = plan("command = \"scan\"\n").unwrap_err();
        assert!(e.0.starts_with("shapes"));
        let e = plan("command = \"scan\"\n[[shapes]]\nkind=\"circle\"\n[grid]\nn_samples=1\n").unwrap_err();
        assert!(e.0.starts_with("grid"), "{e}");
        let e = plan("command = \"spectrum\"\n[[shapes]]\nkind=\"ellipse\"\na=0.5\nb=1.0\n").unwrap_err();
        assert!(e.0.starts_with("shapes[0]"), "{e}");
        let e = plan("command = \"spectrum\"\n[[shapes]]\nkind=\"circle\"\n[couple]\n").unwrap_err();
        assert!(e.0.starts_with("couple"), "{e}");
    }

    #[test]
    fn material_relative_background() {
        let p = plan("command=\"scan\"\n[[shapes]]\nkind=\"circle\"\n[material]\neps_m_rel=2.0\nF=0.1\n").unwrap();
        assert_eq!(p.material.eps_m, 2.0 * 9e-12);
        assert_eq!(p.material.f_fill, 0.1);
    }

    #[test]
    fn farfield_plan() {
        let text = r#"
command = "farfield"
[farfield]
omega = 1e15
delta = 1e-8
me = { kind = "sphere", lambda = [0.3, 0.01] }
points = { kind = "sphere", radius = 1e-6, n_theta = 3, n_phi = 4 }
"#;
        let p = plan(text).unwrap();
        let f = p.farfield.unwrap();
        assert_eq!(f.points.len(), 12);
        assert_eq!(f.mh.frobenius(), 0.0);
        assert!((f.r_min - 1e-7).abs() < 1e-22);
        let bad = text.replace("[0.3, 0.01]", "[0.3, 0.01]\ncolour = 1");
        assert!(plan(&bad).is_err());
    }
}
