//! Nystrom discretisation of the Neumann-Poincare operator `K*` and of its
//! block version for several disjoint particles.
//!
//! The matrix acts on nodal values. Entry `(i, j)` is
//! `(x_i - x_j) . nu_i / (2 pi |x_i - x_j|^2) * w_j` off the diagonal and the
//! continuous limit `kappa_i / (4 pi) * w_i` on it. The kernel is smooth on
//! C² curves and between disjoint curves, so the periodic trapezoidal rule
//! converges spectrally without singularity subtraction.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::OnceLock;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{ParticleSystem, Vec2};
use crate::linalg::{relative_residual, BandedLu, ShiftedSolver};

/// Thresholds for treating a resolvent as singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolveOptions {
    /// For real `lambda`, minimum distance to a computed real eigenvalue.
    pub eps_sing: f64,
    /// Minimum reciprocal condition number of `lambda I - K*`.
    pub rcond_min: f64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            eps_sing: 1e-12,
            rcond_min: 1e-14,
        }
    }
}

#[derive(Debug)]
pub struct NPMatrix {
    pub entries: DMatrix<f64>,
    pub block_offsets: Vec<Range<usize>>,
    pub weights: Vec<f64>,
    pub nodes: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    spectrum: OnceLock<Result<Spectrum>>,
}

impl Clone for NPMatrix {
    fn clone(&self) -> Self {
        NPMatrix {
            entries: self.entries.clone(),
            block_offsets: self.block_offsets.clone(),
            weights: self.weights.clone(),
            nodes: self.nodes.clone(),
            normals: self.normals.clone(),
            spectrum: OnceLock::new(),
        }
    }
}

/// Off-diagonal NP kernel `(x - y) . nu_x / (2 pi |x - y|^2)`.
#[inline]
pub fn kernel(x: Vec2, nu_x: Vec2, y: Vec2) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1]];
    (d[0] * nu_x[0] + d[1] * nu_x[1]) / (2.0 * PI * (d[0] * d[0] + d[1] * d[1]))
}

/// Assembles the (block) NP matrix. Particle disjointness is guaranteed by
/// [`ParticleSystem`] construction.
pub fn assemble(system: &ParticleSystem) -> NPMatrix {
    let n = system.total_nodes();
    let mut nodes = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut curvatures = Vec::with_capacity(n);
    let mut block_offsets = Vec::with_capacity(system.len());
    for curve in system.curves() {
        let start = nodes.len();
        nodes.extend_from_slice(&curve.points);
        normals.extend_from_slice(&curve.normals);
        weights.extend_from_slice(&curve.weights);
        curvatures.extend_from_slice(&curve.curvatures);
        block_offsets.push(start..nodes.len());
    }

    // rows are independent; nalgebra is column-major so build row-major
    // rows in parallel and transpose once
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        curvatures[i] / (4.0 * PI) * weights[i]
                    } else {
                        kernel(nodes[i], normals[i], nodes[j]) * weights[j]
                    }
                })
                .collect()
        })
        .collect();
    let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);

    NPMatrix {
        entries,
        block_offsets,
        weights,
        nodes,
        normals,
        spectrum: OnceLock::new(),
    }
}

impl NPMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_particles(&self) -> usize {
        self.block_offsets.len()
    }

    /// The cached spectrum of this matrix.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        self.spectrum
            .get_or_init(|| compute_spectrum(self))
            .as_ref()
            .map_err(|e| match e {
                Error::EigenNonConvergence { size, norm } => Error::EigenNonConvergence {
                    size: *size,
                    norm: *norm,
                },
                other => invalid("spectrum", other.to_string()),
            })
    }

    /// Nodal values of the `axis`-th normal component.
    pub fn normal_component(&self, axis: usize) -> Vec<f64> {
        self.normals.iter().map(|n| n[axis]).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.entries * nalgebra::DVector::from_column_slice(x);
        v.as_slice().to_vec()
    }
}

/// Eigenvalues sorted by descending real part (ties by descending
/// imaginary part).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub n_nodes: usize,
}

impl Spectrum {
    /// Largest `|Im|` over all eigenvalues; zero for an exact real spectrum.
    pub fn imaginary_defect(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// The eigenvalue closest to `lambda`.
    pub fn nearest(&self, lambda: Complex64) -> Option<Complex64> {
        self.eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| (a - lambda).norm().total_cmp(&(b - lambda).norm()))
    }
}

pub fn sort_eigenvalues(values: &mut [Complex64]) {
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// All eigenvalues of the dense matrix through a real Schur decomposition.
pub fn spectrum(m: &NPMatrix) -> Result<Spectrum> {
    m.spectrum().cloned()
}

fn compute_spectrum(m: &NPMatrix) -> Result<Spectrum> {
    let n = m.dim();
    let schur = Schur::try_new(m.entries.clone(), f64::EPSILON, 1000 * n.max(1)).ok_or(
        Error::EigenNonConvergence {
            size: n,
            norm: m.entries.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max),
        },
    )?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    sort_eigenvalues(&mut eigenvalues);
    Ok(Spectrum {
        eigenvalues,
        n_nodes: n,
    })
}

/// One resolvent solve with its quality diagnostics.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub solutions: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub rcond: f64,
}

/// Solves `(lambda I - K*) phi = rhs` for each right-hand side by dense LU
/// with partial pivoting.
pub fn resolve(m: &NPMatrix, lambda: Complex64, rhs: &[Vec<f64>]) -> Result<Resolved> {
    resolve_with(m, lambda, rhs, &ResolveOptions::default())
}

pub fn resolve_with(
    m: &NPMatrix,
    lambda: Complex64,
    rhs: &[Vec<f64>],
    opts: &ResolveOptions,
) -> Result<Resolved> {
    let n = m.dim();
    for b in rhs {
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: b.len(),
            });
        }
    }
    if lambda.im == 0.0 {
        let spec = m.spectrum()?;
        let hit = spec
            .eigenvalues
            .iter()
            .filter(|e| e.im.abs() <= opts.eps_sing)
            .find(|e| (e.re - lambda.re).abs() <= opts.eps_sing);
        if let Some(&e) = hit {
            return Err(Error::NearSingular {
                lambda,
                rcond: 0.0,
                nearest_eigenvalue: Some(e),
            });
        }
    }
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = Complex64::new(-m.entries[(i, j)], 0.0);
        }
        a[i * n + i] += lambda;
    }
    let lu = BandedLu::factor(a, n, n.saturating_sub(1));
    let rcond = lu.rcond();
    if !(rcond >= opts.rcond_min) {
        return Err(Error::NearSingular {
            lambda,
            rcond,
            nearest_eigenvalue: m.spectrum().ok().and_then(|s| s.nearest(lambda)),
        });
    }
    let mut solutions = Vec::with_capacity(rhs.len());
    let mut residuals = Vec::with_capacity(rhs.len());
    for b in rhs {
        let bc: Vec<Complex64> = b.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let x = lu.solve(&bc);
        residuals.push(relative_residual(&m.entries, lambda, &x, b));
        solutions.push(x);
    }
    Ok(Resolved {
        solutions,
        residuals,
        rcond,
    })
}

/// Resolvent solver for many `lambda` against one NP matrix.
#[derive(Debug, Clone)]
pub struct SweepResolvent {
    solver: ShiftedSolver,
    opts: ResolveOptions,
}

impl SweepResolvent {
    pub fn new(m: &NPMatrix, opts: ResolveOptions) -> Self {
        SweepResolvent {
            solver: ShiftedSolver::new(&m.entries),
            opts,
        }
    }

    /// Like [`resolve`], through the shared Hessenberg reduction. Exact real
    /// eigenvalue hits surface through the condition estimate only.
    pub fn resolve(&self, lambda: Complex64, rhs: &[Vec<f64>]) -> Result<Resolved> {
        let factor = self.solver.factor(lambda);
        let rcond = factor.rcond();
        if !(rcond >= self.opts.rcond_min) {
            return Err(Error::NearSingular {
                lambda,
                rcond,
                nearest_eigenvalue: None,
            });
        }
        let solutions: Vec<Vec<Complex64>> = rhs.iter().map(|b| factor.solve_real(b)).collect();
        let n = self.solver.dim();
        if let Some(b) = rhs.iter().find(|b| b.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        Ok(Resolved {
            residuals: vec![f64::NAN; solutions.len()],
            solutions,
            rcond,
        })
    }
}
