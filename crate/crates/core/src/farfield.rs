//! Leading-order scattered electric field of a small particle in 3D.
//!
//! For a particle `z + delta B` illuminated by a plane wave,
//!
//! ```text
//! E - E^i = -delta^3 omega^2 mu_m G(x, z) M^e E^i(z)
//!           - delta^3 (i omega mu_m / eps_m) curl G(x, z) M^h H^i(z)
//! ```
//!
//! with `G = eps_m (Gamma^k I + D^2 Gamma^k / k^2)` the dyadic Green function
//! of the outgoing fundamental solution `Gamma^k(x) = -e^{ik|x|} / (4 pi |x|)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::polarization::PolarizationTensor;

pub type Vec3 = [f64; 3];
pub type CVec3 = Vector3<Complex64>;
pub type CMat3 = Matrix3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn norm3(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn nonzero(x: Vec3, what: &'static str) -> Result<f64> {
    let r = norm3(x);
    if r == 0.0 {
        return Err(invalid(what, "field point coincides with the source"));
    }
    Ok(r)
}

/// Radial profile `f(r) = -e^{ikr} / (4 pi r)` and its first two derivatives.
fn radial(k: Complex64, r: f64) -> (Complex64, Complex64, Complex64) {
    let e = (I * k * r).exp() / (-4.0 * PI);
    let f = e / r;
    let f1 = e * (I * k / r - 1.0 / (r * r));
    let f2 = e * (-k * k / r - 2.0 * I * k / (r * r) + 2.0 / (r * r * r));
    (f, f1, f2)
}

/// `Gamma^k(x) = -e^{ik|x|} / (4 pi |x|)`.
pub fn gamma_k(x: Vec3, k: Complex64) -> Result<Complex64> {
    let r = nonzero(x, "x")?;
    Ok(radial(k, r).0)
}

pub fn grad_gamma_k(x: Vec3, k: Complex64) -> Result<CVec3> {
    let r = nonzero(x, "x")?;
    let (_, f1, _) = radial(k, r);
    Ok(CVec3::from_fn(|i, _| f1 * (x[i] / r)))
}

/// Closed-form Hessian `f'' xx^T + f'/r (I - xx^T)` with `x` normalised.
pub fn hessian_gamma_k(x: Vec3, k: Complex64) -> Result<CMat3> {
    let r = nonzero(x, "x")?;
    let (_, f1, f2) = radial(k, r);
    let u = [x[0] / r, x[1] / r, x[2] / r];
    Ok(CMat3::from_fn(|i, j| {
        let uu = u[i] * u[j];
        let delta = if i == j { 1.0 } else { 0.0 };
        f2 * uu + f1 / r * (delta - uu)
    }))
}

/// `G(x, z) = eps_m (Gamma^{k_m}(x - z) I + D^2 Gamma^{k_m}(x - z) / k_m^2)`.
pub fn dyadic_green(x: Vec3, z: Vec3, k_m: Complex64, eps_m: f64) -> Result<CMat3> {
    if k_m == Complex64::new(0.0, 0.0) {
        return Err(invalid("k_m", "the dyadic Green function needs a nonzero wavenumber"));
    }
    let d = sub3(x, z);
    let g = gamma_k(d, k_m)?;
    let h = hessian_gamma_k(d, k_m)?;
    Ok((CMat3::identity() * g + h / (k_m * k_m)) * Complex64::new(eps_m, 0.0))
}

/// Cross-product matrix `[a]_x`, so that `[a]_x v = a x v`.
pub fn cross_matrix(a: &CVec3) -> CMat3 {
    let o = Complex64::new(0.0, 0.0);
    CMat3::new(o, -a[2], a[1], a[2], o, -a[0], -a[1], a[0], o)
}

/// `curl_x G(x, z) = eps_m grad Gamma^{k_m}(x - z) x I`.
pub fn curl_dyadic_green(x: Vec3, z: Vec3, k_m: Complex64, eps_m: f64) -> Result<CMat3> {
    let grad = grad_gamma_k(sub3(x, z), k_m)?;
    Ok(cross_matrix(&(grad * Complex64::new(eps_m, 0.0))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub direction: Vec3,
    pub polarization: [Complex64; 3],
    pub omega: f64,
    pub k_m: f64,
    pub eps_m: f64,
    pub mu_m: f64,
}

impl PlaneWave {
    /// Plane wave in a background `(eps_m, mu_m)`, `k_m = omega sqrt(eps_m mu_m)`.
    pub fn new(
        direction: Vec3,
        polarization: [Complex64; 3],
        omega: f64,
        eps_m: f64,
        mu_m: f64,
    ) -> Result<Self> {
        if !(omega > 0.0 && eps_m > 0.0 && mu_m > 0.0) {
            return Err(invalid("omega", "omega, eps_m and mu_m must be positive"));
        }
        let dn = norm3(direction);
        if (dn - 1.0).abs() > 1e-14 {
            return Err(invalid("direction", format!("must be a unit vector, |d| = {dn}")));
        }
        let pn = polarization.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let dp: Complex64 = (0..3).map(|i| polarization[i] * direction[i]).sum();
        if dp.norm() > 1e-14 * pn {
            return Err(invalid(
                "polarization",
                format!("must be orthogonal to the direction, |d.p| = {:e}", dp.norm()),
            ));
        }
        Ok(PlaneWave {
            direction,
            polarization,
            omega,
            k_m: omega * (eps_m * mu_m).sqrt(),
            eps_m,
            mu_m,
        })
    }

    /// `E^i = p e^{i k d.x}`, `H^i = k / (omega mu_m) d x p e^{i k d.x}`.
    pub fn fields(&self, x: Vec3) -> (CVec3, CVec3) {
        let d = self.direction;
        let phase = (I * self.k_m * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2])).exp();
        let p = self.polarization;
        let e = CVec3::new(p[0], p[1], p[2]) * phase;
        let dxp = CVec3::new(
            d[1] * p[2] - d[2] * p[1],
            d[2] * p[0] - d[0] * p[2],
            d[0] * p[1] - d[1] * p[0],
        );
        let h = dxp * (phase * (self.k_m / (self.omega * self.mu_m)));
        (e, h)
    }
}

pub fn incident_fields(wave: &PlaneWave, x: Vec3) -> (CVec3, CVec3) {
    wave.fields(x)
}

pub const DEFAULT_R_MIN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct FarFieldJob {
    pub z: Vec3,
    pub delta: f64,
    pub me: PolarizationTensor,
    pub mh: PolarizationTensor,
    pub wave: PlaneWave,
    pub eval_points: Vec<Vec3>,
    pub r_min: f64,
}

impl FarFieldJob {
    /// Job with the default exclusion radius `10 delta`.
    pub fn new(
        z: Vec3,
        delta: f64,
        me: PolarizationTensor,
        mh: PolarizationTensor,
        wave: PlaneWave,
        eval_points: Vec<Vec3>,
    ) -> Self {
        FarFieldJob {
            z,
            delta,
            me,
            mh,
            wave,
            eval_points,
            r_min: DEFAULT_R_MIN_FACTOR * delta,
        }
    }

    /// Indices and distances of evaluation points inside the `r_min` shell.
    pub fn offending_points(&self) -> Vec<(usize, f64)> {
        self.eval_points
            .iter()
            .enumerate()
            .map(|(i, x)| (i, norm3(sub3(*x, self.z))))
            .filter(|(_, d)| !(*d >= self.r_min))
            .collect()
    }
}

fn as_mat3(t: &PolarizationTensor) -> Result<CMat3> {
    if t.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: t.dim(),
        });
    }
    Ok(CMat3::from_fn(|i, j| t.get(i, j)))
}

/// `E(x) - E^i(x)` at every evaluation point.
pub fn scattered_field(job: &FarFieldJob) -> Result<Vec<CVec3>> {
    if !(job.delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {}", job.delta)));
    }
    if let Some(&(index, distance)) = job.offending_points().first() {
        return Err(Error::InsideShell {
            index,
            distance,
            r_min: job.r_min,
        });
    }
    let w = &job.wave;
    let me = as_mat3(&job.me)?;
    let mh = as_mat3(&job.mh)?;
    let (e_z, h_z) = w.fields(job.z);
    let pe = me * e_z;
    let ph = mh * h_z;
    let k = Complex64::new(w.k_m, 0.0);
    let d3 = job.delta.powi(3);
    let ce = Complex64::new(-d3 * w.omega * w.omega * w.mu_m, 0.0);
    let ch = -I * (d3 * w.omega * w.mu_m / w.eps_m);
    let zero = ph.iter().all(|c| c.norm() == 0.0);
    job.eval_points
        .par_iter()
        .map(|&x| {
            let mut e = dyadic_green(x, job.z, k, w.eps_m)? * pe * ce;
            if !zero {
                e += curl_dyadic_green(x, job.z, k, w.eps_m)? * ph * ch;
            }
            Ok(e)
        })
        .collect()
}

/// Several well-separated particles: their leading-order dipole fields add.
/// All jobs must share the evaluation points and the incident wave.
pub fn scattered_field_many(jobs: &[FarFieldJob]) -> Result<Vec<CVec3>> {
    let Some(first) = jobs.first() else {
        return Err(invalid("jobs", "at least one particle is required"));
    };
    let mut total = scattered_field(first)?;
    for job in &jobs[1..] {
        if job.eval_points != first.eval_points || job.wave != first.wave {
            return Err(invalid("jobs", "particles must share evaluation points and incident wave"));
        }
        for (acc, e) in total.iter_mut().zip(scattered_field(job)?) {
            *acc += e;
        }
    }
    Ok(total)
}
