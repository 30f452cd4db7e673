//! Drude dispersion of a metallic particle and the contrasts
//! `lambda = (c + m) / (2 (c - m))` that map material parameters onto the
//! spectral parameter of the NP operator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Speed of light used to convert frequencies to wavelengths.
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Drude parameters of the particle and the constants of the background.
///
/// `eps_m` and `mu_m` are absolute (F/m, H/m), not relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeMaterial {
    pub eps0: f64,
    pub mu0: f64,
    pub omega_p: f64,
    pub tau: f64,
    pub f_fill: f64,
    pub omega0: f64,
    pub eps_m: f64,
    pub mu_m: f64,
}

impl Default for DrudeMaterial {
    /// Gold-like particle in water: `tau = 1e-14 s`, `eps0 = 9e-12 F/m`,
    /// `omega_p = 2e15 /s`, `eps_m = 1.33^2 eps0`, nonmagnetic (`F = 0`).
    fn default() -> Self {
        let eps0 = 9e-12;
        let mu0 = 4e-7 * PI;
        DrudeMaterial {
            eps0,
            mu0,
            omega_p: 2e15,
            tau: 1e-14,
            f_fill: 0.0,
            omega0: 5e14,
            eps_m: 1.33 * 1.33 * eps0,
            mu_m: mu0,
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    Ok(())
}

impl DrudeMaterial {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps0", self.eps0),
            ("mu0", self.mu0),
            ("omega_p", self.omega_p),
            ("tau", self.tau),
            ("eps_m", self.eps_m),
            ("mu_m", self.mu_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.f_fill) {
            return Err(invalid(
                "F",
                format!("filling factor must lie in [0, 1], got {}", self.f_fill),
            ));
        }
        if !(self.omega0 >= 0.0 && self.omega0.is_finite()) {
            return Err(invalid("omega0", format!("must be non-negative, got {}", self.omega0)));
        }
        Ok(())
    }

    /// `eps0 (1 - omega_p^2 / (omega (omega + i / tau)))`.
    pub fn eps_c(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        let denom = Complex64::new(omega, 0.0) * Complex64::new(omega, 1.0 / self.tau);
        Ok(self.eps0 * (1.0 - self.omega_p * self.omega_p / denom))
    }

    /// `mu0 (1 - F omega^2 / (omega^2 - omega0^2 + i omega / tau))`.
    pub fn mu_c(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        let denom = Complex64::new(omega * omega - self.omega0 * self.omega0, omega / self.tau);
        Ok(self.mu0 * (1.0 - self.f_fill * omega * omega / denom))
    }

    /// Real and imaginary parts of `eps_c` from the separated closed forms.
    pub fn eps_parts(&self, omega: f64) -> Result<(f64, f64)> {
        check_omega(omega)?;
        let g = 1.0 / self.tau;
        let wp2 = self.omega_p * self.omega_p;
        let d = omega * omega + g * g;
        Ok((
            self.eps0 * (omega * omega + g * g - wp2) / d,
            self.eps0 * wp2 * g / (omega * d),
        ))
    }

    /// Real and imaginary parts of `mu_c` from the separated closed forms.
    pub fn mu_parts(&self, omega: f64) -> Result<(f64, f64)> {
        check_omega(omega)?;
        let g = 1.0 / self.tau;
        let w2 = omega * omega;
        let s = w2 - self.omega0 * self.omega0;
        let d = s * s + g * g * w2;
        let f = self.f_fill;
        Ok((
            self.mu0 * (g * g * w2 + s * ((1.0 - f) * w2 - self.omega0 * self.omega0)) / d,
            self.mu0 * f * g * omega * w2 / d,
        ))
    }

    /// `omega^2 + tau^-2 < omega_p^2`, i.e. `Re eps_c < 0`.
    pub fn eps_is_negative(&self, omega: f64) -> bool {
        omega * omega + 1.0 / (self.tau * self.tau) < self.omega_p * self.omega_p
    }

    /// `(1-F)(w^2-w0^2)^2 - F w0^2 (w^2-w0^2) + tau^-2 w^2 < 0`, i.e.
    /// `Re mu_c < 0`.
    pub fn mu_is_negative(&self, omega: f64) -> bool {
        let s = omega * omega - self.omega0 * self.omega0;
        let f = self.f_fill;
        (1.0 - f) * s * s - f * self.omega0 * self.omega0 * s
            + omega * omega / (self.tau * self.tau)
            < 0.0
    }

    /// Frequency where `Re eps_c = -eps_m`, the disk's dielectric resonance.
    pub fn disk_resonance_omega(&self) -> Option<f64> {
        let r = self.eps_m / self.eps0;
        let w2 = self.omega_p * self.omega_p / (1.0 + r) - 1.0 / (self.tau * self.tau);
        (w2 > 0.0).then(|| w2.sqrt())
    }

    pub fn contrast(&self, omega: f64) -> Result<Contrast> {
        let eps_c = self.eps_c(omega)?;
        let mu_c = self.mu_c(omega)?;
        let lambda_eps = contrast_value(eps_c, self.eps_m).ok_or_else(|| {
            Error::DegenerateContrast(format!("eps_c = eps_m = {} at omega = {omega}", self.eps_m))
        })?;
        Ok(Contrast {
            lambda_eps,
            lambda_mu: contrast_value(mu_c, self.mu_m),
            eps_c,
            mu_c,
            omega,
        })
    }

    /// `(k_c, k_m)` with `k_c` on the branch `Im k_c >= 0`.
    pub fn k_wavenumbers(&self, omega: f64) -> Result<(Complex64, f64)> {
        let eps_c = self.eps_c(omega)?;
        let mu_c = self.mu_c(omega)?;
        Ok((
            omega * principal_sqrt(eps_c * mu_c),
            omega * (self.eps_m * self.mu_m).sqrt(),
        ))
    }
}

/// Square root with `Im >= 0` (outgoing/decaying branch).
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// `(c + m) / (2 (c - m))`, or `None` when `|c - m| < 1e-300`.
pub fn contrast_value(c: Complex64, m: f64) -> Option<Complex64> {
    let d = c - m;
    (d.norm() >= 1e-300).then(|| (c + m) / (2.0 * d))
}

/// The same contrast through its separated real and imaginary parts,
/// for `c = re + i im`:
/// `(re^2 - m^2 + im^2) / (2 D) - i m im / D` with `D = (re - m)^2 + im^2`.
pub fn contrast_decomposed(re: f64, im: f64, m: f64) -> Complex64 {
    let d = (re - m) * (re - m) + im * im;
    Complex64::new((re * re - m * m + im * im) / (2.0 * d), -m * im / d)
}

/// Contrasts at one frequency. `lambda_mu` is `None` when `mu_c = mu_m`
/// (a nonmagnetic particle in a nonmagnetic background).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contrast {
    pub lambda_eps: Complex64,
    pub lambda_mu: Option<Complex64>,
    pub eps_c: Complex64,
    pub mu_c: Complex64,
    pub omega: f64,
}

impl Contrast {
    /// `c / omega`, the wavelength convention of the resonance plots.
    pub fn wavelength_paper(&self) -> f64 {
        SPEED_OF_LIGHT / self.omega
    }

    /// `2 pi c / omega`.
    pub fn wavelength_physical(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.omega
    }
}
