//! Unit-disk kernels and Mobius automorphisms.
//!
//! Conventions used throughout the crate: the Wirtinger operators are
//! `d/dz = (d/dx - i d/dy)/2` and `d/dzbar = (d/dx + i d/dy)/2`, so the
//! Laplacian factors as `4 d/dz d/dzbar`. The Green function below is the
//! one with `Laplacian G(., w) = -delta_w` and zero boundary values.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Two kernel arguments closer than this are treated as coincident.
pub const KERNEL_GUARD: f64 = 1e-13;

fn require_inside(z: Complex64) -> Result<()> {
    if z.norm_sqr() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk(z))
    }
}

/// Poisson kernel `P(z, e^{i theta}) = (1 - |z|^2) / |z - e^{i theta}|^2`.
///
/// Requires `|z| < 1`; the kernel is strictly positive there and averages to
/// one over the boundary circle.
pub fn poisson_kernel(z: Complex64, theta: f64) -> Result<f64> {
    require_inside(z)?;
    let boundary = Complex64::from_polar(1.0, theta);
    Ok((1.0 - z.norm_sqr()) / (z - boundary).norm_sqr())
}

/// Green function of the disk,
/// `G(z, w) = (1/2 pi) log |(1 - z conj(w)) / (z - w)|`,
/// evaluated as `(1/4 pi) ln(|1 - z conj(w)|^2 / |z - w|^2)` to avoid a
/// square root. Symmetric in its arguments and positive inside the disk.
pub fn green(z: Complex64, w: Complex64) -> Result<f64> {
    require_inside(z)?;
    require_inside(w)?;
    let sep = z - w;
    if sep.norm() < KERNEL_GUARD {
        return Err(Error::CoincidentKernelArguments(z));
    }
    let numer = (Complex64::new(1.0, 0.0) - z * w.conj()).norm_sqr();
    Ok((numer / sep.norm_sqr()).ln() / (4.0 * std::f64::consts::PI))
}

/// z-derivative of the Green function,
/// `G_z(z, w) = (1/4 pi) (1 - |w|^2) / ((z - w)(z conj(w) - 1))`.
pub fn green_dz(z: Complex64, w: Complex64) -> Result<Complex64> {
    require_inside(z)?;
    require_inside(w)?;
    let sep = z - w;
    if sep.norm() < KERNEL_GUARD {
        return Err(Error::CoincidentKernelArguments(z));
    }
    let denom = sep * (z * w.conj() - 1.0);
    Ok(Complex64::new((1.0 - w.norm_sqr()) / (4.0 * std::f64::consts::PI), 0.0) / denom)
}

/// zbar-derivative of the Green function. `G` is real-valued, so this is the
/// conjugate of [`green_dz`].
pub fn green_dzbar(z: Complex64, w: Complex64) -> Result<Complex64> {
    Ok(green_dz(z, w)?.conj())
}

/// A Mobius self-map of the disk in one of the two normal forms used by the
/// blow-up analysis: `to_zero(a)` sends `a` to the origin, `from_zero(a)`
/// sends the origin to `a`. The two forms with the same center are exact
/// inverses of each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAutomorphism {
    center: Complex64,
    toward_origin: bool,
}

impl DiskAutomorphism {
    /// `p(w) = (w - a) / (1 - w conj(a))`, the automorphism with `p(a) = 0`.
    pub fn to_zero(center: Complex64) -> Result<Self> {
        require_inside(center)?;
        Ok(Self {
            center,
            toward_origin: true,
        })
    }

    /// `q(z) = (z + a) / (1 + z conj(a))`, the automorphism with `q(0) = a`.
    pub fn from_zero(center: Complex64) -> Result<Self> {
        require_inside(center)?;
        Ok(Self {
            center,
            toward_origin: false,
        })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    /// Evaluate the automorphism. Defined on the closed disk; the unit circle
    /// maps onto itself.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let a = self.center;
        if self.toward_origin {
            (z - a) / (Complex64::new(1.0, 0.0) - z * a.conj())
        } else {
            (z + a) / (Complex64::new(1.0, 0.0) + z * a.conj())
        }
    }

    /// First or second complex derivative.
    ///
    /// `to_zero`:   `p'  = (1 - |a|^2) / (1 - z conj(a))^2`,
    ///              `p'' = 2 conj(a) (1 - |a|^2) / (1 - z conj(a))^3`.
    /// `from_zero`: `q'  = (1 - |a|^2) / (1 + z conj(a))^2`,
    ///              `q'' = -2 conj(a) (1 - |a|^2) / (1 + z conj(a))^3`.
    ///
    /// Orders other than 1 and 2 are rejected.
    pub fn deriv(&self, z: Complex64, order: u32) -> Result<Complex64> {
        let a = self.center;
        let scale = 1.0 - a.norm_sqr();
        let denom = if self.toward_origin {
            Complex64::new(1.0, 0.0) - z * a.conj()
        } else {
            Complex64::new(1.0, 0.0) + z * a.conj()
        };
        match order {
            1 => Ok(Complex64::new(scale, 0.0) / (denom * denom)),
            2 => {
                let sign = if self.toward_origin { 1.0 } else { -1.0 };
                Ok(a.conj() * (2.0 * sign * scale) / (denom * denom * denom))
            }
            other => Err(Error::UnsupportedDerivativeOrder(other)),
        }
    }

    /// The inverse automorphism: `to_zero(a)` and `from_zero(a)` swap.
    pub fn inverse(&self) -> Self {
        Self {
            center: self.center,
            toward_origin: !self.toward_origin,
        }
    }
}
