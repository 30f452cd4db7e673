//! Polarization tensors `m_ij = int y_i (lambda I - K*)^-1[nu_j] dsigma`.
//!
//! Numeric tensors come from the Nystrom matrix; closed forms for the disk,
//! the axis-aligned ellipse and the sphere serve as independent oracles and
//! as the 3D input of the far-field module.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::npop::{self, NPMatrix, ResolveOptions, Resolved, SweepResolvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorSource {
    Numeric,
    AnalyticDisk,
    AnalyticEllipse,
    AnalyticSphere,
    /// Supplied directly by the caller.
    Explicit,
}

impl TensorSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TensorSource::Numeric => "numeric",
            TensorSource::AnalyticDisk => "analytic-disk",
            TensorSource::AnalyticEllipse => "analytic-ellipse",
            TensorSource::AnalyticSphere => "analytic-sphere",
            TensorSource::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationTensor {
    pub entries: DMatrix<Complex64>,
    pub lambda: Complex64,
    pub source: TensorSource,
    /// Reciprocal condition of the resolvent solve (numeric tensors only).
    pub condition: Option<f64>,
}

impl PolarizationTensor {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn zeros(dim: usize) -> Self {
        PolarizationTensor {
            entries: DMatrix::zeros(dim, dim),
            lambda: Complex64::new(0.0, 0.0),
            source: TensorSource::Explicit,
            condition: None,
        }
    }

    pub fn explicit(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        Ok(PolarizationTensor {
            entries,
            lambda: Complex64::new(0.0, 0.0),
            source: TensorSource::Explicit,
            condition: None,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|M - M^T|_F / |M|_F`.
    pub fn asymmetry(&self) -> f64 {
        let d = &self.entries - self.entries.transpose();
        let num = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let den = self.frobenius();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Row-major entries.
    pub fn row_major(&self) -> Vec<Complex64> {
        let d = self.dim();
        (0..d * d).map(|k| self.entries[(k / d, k % d)]).collect()
    }

    fn isotropic(dim: usize, value: Complex64, lambda: Complex64, source: TensorSource) -> Self {
        PolarizationTensor {
            entries: DMatrix::from_diagonal_element(dim, dim, value),
            lambda,
            source,
            condition: None,
        }
    }
}

fn moments(np: &NPMatrix, lambda: Complex64, solved: Resolved) -> PolarizationTensor {
    let mut entries = DMatrix::zeros(2, 2);
    for (j, phi) in solved.solutions.iter().enumerate() {
        for i in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((y, w), p) in np.nodes.iter().zip(&np.weights).zip(phi) {
                acc += p * (y[i] * w);
            }
            entries[(i, j)] = acc;
        }
    }
    PolarizationTensor {
        entries,
        lambda,
        source: TensorSource::Numeric,
        condition: Some(solved.rcond),
    }
}

fn normal_rhs(np: &NPMatrix) -> [Vec<f64>; 2] {
    [np.normal_component(0), np.normal_component(1)]
}

/// Numeric 2D tensor, summing moments over every particle of the matrix.
pub fn pt_numeric(np: &NPMatrix, lambda: Complex64) -> Result<PolarizationTensor> {
    pt_numeric_with(np, lambda, &ResolveOptions::default())
}

pub fn pt_numeric_with(
    np: &NPMatrix,
    lambda: Complex64,
    opts: &ResolveOptions,
) -> Result<PolarizationTensor> {
    let solved = npop::resolve_with(np, lambda, &normal_rhs(np), opts)?;
    Ok(moments(np, lambda, solved))
}

/// Numeric tensor through a shared [`SweepResolvent`] of the same matrix.
pub fn pt_numeric_sweep(
    np: &NPMatrix,
    resolvent: &SweepResolvent,
    lambda: Complex64,
) -> Result<PolarizationTensor> {
    let solved = resolvent.resolve(lambda, &normal_rhs(np))?;
    Ok(moments(np, lambda, solved))
}

/// Disk of the given radius: `(pi r^2 / lambda) I`.
pub fn pt_disk(lambda: Complex64, radius: f64) -> Result<PolarizationTensor> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole {
            lambda,
            tensor: "disk",
        });
    }
    Ok(PolarizationTensor::isotropic(
        2,
        PI * radius * radius / lambda,
        lambda,
        TensorSource::AnalyticDisk,
    ))
}

/// Axis-aligned ellipse with semi-axes `a` (along x) and `b`:
/// `diag(pi a b / (lambda - q/2), pi a b / (lambda + q/2))`, `q = (a-b)/(a+b)`.
pub fn pt_ellipse(lambda: Complex64, a: f64, b: f64) -> Result<PolarizationTensor> {
    let q = (a - b) / (a + b);
    let d11 = lambda - q / 2.0;
    let d22 = lambda + q / 2.0;
    if d11.norm() == 0.0 || d22.norm() == 0.0 {
        return Err(Error::Pole {
            lambda,
            tensor: "ellipse",
        });
    }
    let area = PI * a * b;
    let mut entries = DMatrix::zeros(2, 2);
    entries[(0, 0)] = area / d11;
    entries[(1, 1)] = area / d22;
    Ok(PolarizationTensor {
        entries,
        lambda,
        source: TensorSource::AnalyticEllipse,
        condition: None,
    })
}

/// Sphere: `((4/3) pi r^3 / (lambda - 1/6)) I`, the pole being the dipole
/// eigenvalue `1/6` of `K*` on the sphere.
pub fn pt_sphere(lambda: Complex64, radius: f64) -> Result<PolarizationTensor> {
    let d = lambda - 1.0 / 6.0;
    if d.norm() == 0.0 {
        return Err(Error::Pole {
            lambda,
            tensor: "sphere",
        });
    }
    Ok(PolarizationTensor::isotropic(
        3,
        4.0 / 3.0 * PI * radius.powi(3) / d,
        lambda,
        TensorSource::AnalyticSphere,
    ))
}
