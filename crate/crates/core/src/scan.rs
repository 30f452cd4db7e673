//! Frequency and separation sweeps of the polarization tensor.
//!
//! The NP matrix is frequency independent, so a sweep assembles it once per
//! geometry, reduces it to Hessenberg form once, and only refactorises the
//! shifted system `lambda_eps(omega) I - K*` per grid point.

use std::hash::Hasher;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{place_pair, BoundaryCurve, ParticleSystem};
use crate::materials::{DrudeMaterial, SPEED_OF_LIGHT};
use crate::npop::{self, assemble, NPMatrix, ResolveOptions, Spectrum, SweepResolvent};
use crate::polarization::{pt_numeric_sweep, PolarizationTensor};

/// Separations of the two-disk coupling study.
pub const DEFAULT_DISTANCES: [f64; 6] = [0.020, 0.069, 0.239, 0.931, 2.884, 10.00];

pub const DEFAULT_PROMINENCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Grid over the wavelength `c / omega` (no factor `2 pi`), in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub wavelength_min: f64,
    pub wavelength_max: f64,
    pub n_samples: usize,
    pub spacing: Spacing,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            wavelength_min: 80e-9,
            wavelength_max: 1100e-9,
            n_samples: 512,
            spacing: Spacing::Log,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_min > 0.0) {
            return Err(invalid(
                "wavelength_min",
                format!("must be positive, got {}", self.wavelength_min),
            ));
        }
        if !(self.wavelength_max > self.wavelength_min) {
            return Err(invalid(
                "wavelength_max",
                format!(
                    "must exceed wavelength_min = {}, got {}",
                    self.wavelength_min, self.wavelength_max
                ),
            ));
        }
        if self.n_samples < 2 {
            return Err(invalid(
                "n_samples",
                format!("need at least 2 samples, got {}", self.n_samples),
            ));
        }
        Ok(())
    }

    /// Same range with the spacing halved (`2 n - 1` samples).
    pub fn refined(&self) -> Self {
        SweepGrid {
            n_samples: 2 * self.n_samples - 1,
            ..*self
        }
    }

    /// Angular frequencies in strictly increasing order.
    pub fn omegas(&self) -> Vec<f64> {
        let n = self.n_samples;
        let (lo, hi) = (self.wavelength_min, self.wavelength_max);
        // k = 0 is the longest wavelength, i.e. the lowest frequency
        (0..n)
            .map(|k| {
                let s = (n - 1 - k) as f64 / (n - 1) as f64;
                let wl = match self.spacing {
                    Spacing::Linear => lo + (hi - lo) * s,
                    Spacing::Log => lo * (hi / lo).powf(s),
                };
                SPEED_OF_LIGHT / wl
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub wavelength_paper: f64,
    pub wavelength_physical: f64,
    pub eps_c: Complex64,
    pub lambda_eps: Complex64,
    /// Row-major 2x2 tensor; NaN when the resolvent failed.
    pub pt: [Complex64; 4],
    pub pt_frobenius: f64,
    pub rcond: f64,
    pub failed: bool,
    /// Magnetic contrast and tensor, only for magnetic particles.
    pub lambda_mu: Option<Complex64>,
    pub pt_h: Option<[Complex64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub grid: SweepGrid,
    pub shape_hash: u64,
}

impl SweepResult {
    pub fn frobenius(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.pt_frobenius).collect()
    }

    pub fn argmax(&self) -> Option<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.pt_frobenius.is_finite())
            .max_by(|a, b| a.1.pt_frobenius.total_cmp(&b.1.pt_frobenius))
            .map(|(i, _)| i)
    }

    /// Index of the row whose omega is closest to `omega`.
    pub fn nearest_index(&self, omega: f64) -> usize {
        self.rows
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.omega - omega).abs().total_cmp(&(b.1.omega - omega).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// FNV-1a over the node coordinates, a stable geometry fingerprint.
pub fn geometry_hash(np: &NPMatrix) -> u64 {
    struct Fnv(u64);
    impl Hasher for Fnv {
        fn finish(&self) -> u64 {
            self.0
        }
        fn write(&mut self, bytes: &[u8]) {
            for b in bytes {
                self.0 ^= *b as u64;
                self.0 = self.0.wrapping_mul(0x100000001b3);
            }
        }
    }
    let mut h = Fnv(0xcbf29ce484222325);
    for (p, w) in np.nodes.iter().zip(&np.weights) {
        h.write(&p[0].to_bits().to_le_bytes());
        h.write(&p[1].to_bits().to_le_bytes());
        h.write(&w.to_bits().to_le_bytes());
    }
    h.finish()
}

fn tensor_entries(t: &PolarizationTensor) -> [Complex64; 4] {
    [t.get(0, 0), t.get(0, 1), t.get(1, 0), t.get(1, 1)]
}

fn frobenius(e: &[Complex64; 4]) -> f64 {
    e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frequency_sweep(
    np: &NPMatrix,
    material: &DrudeMaterial,
    grid: &SweepGrid,
    opts: &ResolveOptions,
) -> Result<SweepResult> {
    material.validate()?;
    grid.validate()?;
    let resolvent = SweepResolvent::new(np, *opts);
    let magnetic = material.f_fill > 0.0;
    let rows = grid
        .omegas()
        .into_par_iter()
        .map(|omega| -> Result<SweepRow> {
            let contrast = material.contrast(omega)?;
            let (pt, rcond, failed) = match pt_numeric_sweep(np, &resolvent, contrast.lambda_eps) {
                Ok(t) => (tensor_entries(&t), t.condition.unwrap_or(f64::NAN), false),
                Err(crate::Error::NearSingular { rcond, .. }) => {
                    ([Complex64::new(f64::NAN, f64::NAN); 4], rcond, true)
                }
                Err(e) => return Err(e),
            };
            let pt_h = match contrast.lambda_mu {
                Some(l) if magnetic => pt_numeric_sweep(np, &resolvent, l)
                    .ok()
                    .map(|t| tensor_entries(&t)),
                _ => None,
            };
            Ok(SweepRow {
                omega,
                wavelength_paper: contrast.wavelength_paper(),
                wavelength_physical: contrast.wavelength_physical(),
                eps_c: contrast.eps_c,
                lambda_eps: contrast.lambda_eps,
                pt,
                pt_frobenius: if failed { f64::NAN } else { frobenius(&pt) },
                rcond,
                failed,
                lambda_mu: contrast.lambda_mu.filter(|_| magnetic),
                pt_h,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        grid: *grid,
        shape_hash: geometry_hash(np),
    })
}

pub fn frequency_sweep_system(
    system: &ParticleSystem,
    material: &DrudeMaterial,
    grid: &SweepGrid,
) -> Result<SweepResult> {
    frequency_sweep(&assemble(system), material, grid, &ResolveOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub omega: f64,
    pub wavelength_paper: f64,
    pub value: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Strict interior local maxima of `values` with their topographic
/// prominence, measured against the higher of the two flanking minima.
/// Non-finite samples are never peaks and bound the flanks.
pub fn local_peaks(values: &[f64]) -> Vec<(usize, f64)> {
    let n = values.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for i in 1..n - 1 {
        let v = values[i];
        if !(v.is_finite() && v > values[i - 1] && v > values[i + 1]) {
            continue;
        }
        let flank_min = |range: &mut dyn Iterator<Item = usize>| {
            let mut lo = v;
            for j in range {
                let u = values[j];
                if !u.is_finite() || u > v {
                    break;
                }
                lo = lo.min(u);
            }
            lo
        };
        let left = flank_min(&mut (0..i).rev());
        let right = flank_min(&mut (i + 1..n));
        out.push((i, v - left.max(right)));
    }
    out
}

pub fn detect_peaks(result: &SweepResult, prominence_frac: f64) -> PeakSet {
    let values = result.frobenius();
    let max = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = prominence_frac * max;
    let peaks = local_peaks(&values)
        .into_iter()
        .filter(|(_, p)| *p >= threshold)
        .map(|(index, prominence)| {
            let row = &result.rows[index];
            Peak {
                index,
                omega: row.omega,
                wavelength_paper: row.wavelength_paper,
                value: row.pt_frobenius,
                prominence,
            }
        })
        .collect();
    PeakSet { peaks }
}

/// Sweep and block spectrum of a particle pair at one separation.
#[derive(Debug, Clone)]
pub struct DistanceSweep {
    pub distance: f64,
    pub sweep: SweepResult,
    pub spectrum: Spectrum,
}

fn pair_matrix(
    left: &BoundaryCurve,
    right: &BoundaryCurve,
    distance: f64,
    min_distance: f64,
) -> Result<NPMatrix> {
    let (l, r) = place_pair(left, right, distance)?;
    Ok(assemble(&ParticleSystem::new(vec![l, r], min_distance)?))
}

fn check_distances(distances: &[f64]) -> Result<()> {
    if distances.is_empty() {
        return Err(invalid("distances", "need at least one distance"));
    }
    if let Some(d) = distances.iter().find(|d| !(**d > 0.0)) {
        return Err(invalid("distances", format!("must be positive, got {d}")));
    }
    Ok(())
}

/// Places the two shapes along the x-axis at each separation and sweeps.
pub fn distance_sweep(
    left: &BoundaryCurve,
    right: &BoundaryCurve,
    distances: &[f64],
    material: &DrudeMaterial,
    grid: &SweepGrid,
    opts: &ResolveOptions,
    min_distance: f64,
) -> Result<Vec<DistanceSweep>> {
    check_distances(distances)?;
    distances
        .iter()
        .map(|&distance| {
            let np = pair_matrix(left, right, distance, min_distance)?;
            let sweep = frequency_sweep(&np, material, grid, opts)?;
            let spectrum = npop::spectrum(&np)?;
            Ok(DistanceSweep {
                distance,
                sweep,
                spectrum,
            })
        })
        .collect()
}

pub fn eigen_vs_distance(
    left: &BoundaryCurve,
    right: &BoundaryCurve,
    distances: &[f64],
    min_distance: f64,
) -> Result<Vec<(f64, Spectrum)>> {
    check_distances(distances)?;
    distances
        .iter()
        .map(|&d| Ok((d, npop::spectrum(&pair_matrix(left, right, d, min_distance)?)?)))
        .collect()
}

/// Largest real part once the `n_particles` eigenvalues at `1/2` are set
/// aside.
pub fn leading_coupled_eigenvalue(spectrum: &Spectrum, n_particles: usize) -> f64 {
    spectrum
        .eigenvalues
        .get(n_particles)
        .map(|z| z.re)
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_circle;
    use crate::geometry::DEFAULT_MIN_DISTANCE;

    #[test]
    fn peak_counting_basics() {
        assert!(local_peaks(&[1.0, 2.0, 3.0, 4.0]).is_empty());
        assert_eq!(local_peaks(&[1.0, 3.0, 1.0]), vec![(1, 2.0)]);
        // plateau is no strict maximum
        assert!(local_peaks(&[1.0, 3.0, 3.0, 1.0]).is_empty());
        // secondary peak measured against the higher flank minimum
        let p = local_peaks(&[0.0, 5.0, 2.0, 3.0, 1.0]);
        assert_eq!(p, vec![(1, 4.0), (3, 1.0)]);
        assert!(local_peaks(&[1.0, f64::NAN, 1.0]).is_empty());
    }

    #[test]
    fn grid_is_increasing_in_omega() {
        for spacing in [Spacing::Linear, Spacing::Log] {
            let g = SweepGrid {
                n_samples: 17,
                spacing,
                ..Default::default()
            };
            let w = g.omegas();
            assert_eq!(w.len(), 17);
            assert!(w.windows(2).all(|p| p[1] > p[0]));
            assert!((w[0] - 3e8 / 1100e-9).abs() < 1.0);
            assert!((w[16] - 3e8 / 80e-9).abs() < 1e2);
        }
        let g = SweepGrid::default().refined();
        assert_eq!(g.n_samples, 1023);
        let coarse = SweepGrid::default().omegas();
        let fine = g.omegas();
        assert!((fine[2] - coarse[1]).abs() < 1e-3 * coarse[1]);
        assert!(SweepGrid { n_samples: 1, ..Default::default() }.validate().is_err());
        assert!(SweepGrid { wavelength_min: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn disk_sweep_has_one_peak_at_resonance() {
        let sys = ParticleSystem::single(make_circle(1.0, [0.0, 0.0], 64).unwrap());
        let mat = DrudeMaterial::default();
        let grid = SweepGrid {
            n_samples: 128,
            ..Default::default()
        };
        let res = frequency_sweep_system(&sys, &mat, &grid).unwrap();
        assert!(res.rows.windows(2).all(|w| w[1].omega > w[0].omega));
        for r in &res.rows {
            let f = frobenius(&r.pt);
            assert!((f - r.pt_frobenius).abs() <= 1e-13 * f);
        }
        let peaks = detect_peaks(&res, DEFAULT_PROMINENCE);
        assert_eq!(peaks.len(), 1);
        // the maximum sits where |Re lambda_eps| is smallest
        let min_re = res
            .rows
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.lambda_eps.re.abs().total_cmp(&b.1.lambda_eps.re.abs()))
            .unwrap()
            .0;
        assert!((peaks.peaks[0].index as i64 - min_re as i64).abs() <= 1);
    }

    #[test]
    fn distances_validated() {
        let c = make_circle(1.0, [0.0, 0.0], 32).unwrap();
        assert!(eigen_vs_distance(&c, &c, &[-1.0], DEFAULT_MIN_DISTANCE).is_err());
        assert!(eigen_vs_distance(&c, &c, &[], DEFAULT_MIN_DISTANCE).is_err());
        let t = eigen_vs_distance(&c, &c, &[10.0], DEFAULT_MIN_DISTANCE).unwrap();
        let s = &t[0].1;
        assert!((s.eigenvalues[0].re - 0.5).abs() < 1e-10);
        assert!((s.eigenvalues[1].re - 0.5).abs() < 1e-10);
        assert!(leading_coupled_eigenvalue(s, 2).abs() < 2e-2);
    }
}
