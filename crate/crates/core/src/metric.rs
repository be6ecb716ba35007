//! Conformal metric densities `rho^2 |dw|^2` on the disk or plane, their
//! logarithmic derivatives, and the induced Christoffel symbols.
//!
//! The quantity driving the solver is `L(w) = (log rho^2)_w = 2 rho_w / rho`.
//! A metric is approximately analytic when `sup |L| = M < infinity`; the
//! nonlinear term of the harmonic-map equation is then uniformly controlled
//! and the fixed-point solver is admissible.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Supremum of `|(log rho^2)_w|` over the disk, or the statement that there
/// is none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticityBound {
    Finite(f64),
    Unbounded,
}

impl AnalyticityBound {
    pub fn is_finite(&self) -> bool {
        matches!(self, AnalyticityBound::Finite(_))
    }

    /// The finite value, if any.
    pub fn value(&self) -> Option<f64> {
        match self {
            AnalyticityBound::Finite(m) => Some(*m),
            AnalyticityBound::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Euclidean,
    Spherical,
    Hyperbolic,
    /// `rho(w) = c0 + c1 |w|^2 + c2 |w|^4`, required positive on the closed disk.
    Radial {
        c0: f64,
        c1: f64,
        c2: f64,
    },
}

/// A rotation-symmetric conformal density from the catalog: euclidean,
/// spherical, hyperbolic, or a radial polynomial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalMetric {
    kind: Kind,
    bound: AnalyticityBound,
}

impl ConformalMetric {
    /// `rho = 1`. Harmonic maps are the classical euclidean ones; `L = 0`.
    pub fn euclidean() -> Self {
        Self {
            kind: Kind::Euclidean,
            bound: AnalyticityBound::Finite(0.0),
        }
    }

    /// `rho(w) = 2 / (1 + |w|^2)`, the spherical density. `sup |L| = 1`.
    pub fn spherical() -> Self {
        Self {
            kind: Kind::Spherical,
            bound: AnalyticityBound::Finite(1.0),
        }
    }

    /// `rho(w) = 2 / (1 - |w|^2)`, the hyperbolic density. `|L| = 2r/(1-r^2)`
    /// blows up at the rim, so the analyticity bound is unbounded and the
    /// solver refuses this metric.
    pub fn hyperbolic() -> Self {
        Self {
            kind: Kind::Hyperbolic,
            bound: AnalyticityBound::Unbounded,
        }
    }

    /// Radial profile `rho(w) = c0 + c1 |w|^2 + c2 |w|^4`. Rejected unless
    /// the profile is positive on all of `[0, 1]`; the minimum of the
    /// quadratic in `s = |w|^2` is checked in closed form.
    pub fn radial(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(c0.is_finite() && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "radial coefficients",
                message: "coefficients must be finite".into(),
            });
        }
        let profile = |s: f64| c0 + c1 * s + c2 * s * s;
        let mut min = profile(0.0);
        let mut at = 0.0f64;
        if profile(1.0) < min {
            min = profile(1.0);
            at = 1.0;
        }
        if c2 != 0.0 {
            let vertex = -c1 / (2.0 * c2);
            if vertex > 0.0 && vertex < 1.0 && profile(vertex) < min {
                min = profile(vertex);
                at = vertex.sqrt();
            }
        }
        if min <= 0.0 {
            return Err(Error::NonPositiveDensity {
                min,
                at_radius: at,
            });
        }
        let mut metric = Self {
            kind: Kind::Radial { c0, c1, c2 },
            bound: AnalyticityBound::Finite(0.0),
        };
        metric.bound = AnalyticityBound::Finite(metric.radial_sup_log_derivative());
        Ok(metric)
    }

    /// Density value `rho(w)`. The hyperbolic density is finite only for
    /// `|w| < 1`; callers stay inside via the solver's analyticity gate.
    pub fn density(&self, w: Complex64) -> f64 {
        let s = w.norm_sqr();
        match self.kind {
            Kind::Euclidean => 1.0,
            Kind::Spherical => 2.0 / (1.0 + s),
            Kind::Hyperbolic => 2.0 / (1.0 - s),
            Kind::Radial { c0, c1, c2 } => c0 + c1 * s + c2 * s * s,
        }
    }

    /// `L(w) = (log rho^2)_w = 2 rho_w / rho`.
    ///
    /// Catalog values: euclidean `0`; spherical `-2 conj(w) / (1 + |w|^2)`;
    /// hyperbolic `2 conj(w) / (1 - |w|^2)` (diverges at the rim); radial
    /// `2 rho'(s) conj(w) / rho(s)` with `s = |w|^2`.
    pub fn log_density_derivative(&self, w: Complex64) -> Complex64 {
        let s = w.norm_sqr();
        match self.kind {
            Kind::Euclidean => Complex64::new(0.0, 0.0),
            Kind::Spherical => w.conj() * (-2.0 / (1.0 + s)),
            Kind::Hyperbolic => w.conj() * (2.0 / (1.0 - s)),
            Kind::Radial { c1, c2, .. } => {
                let dprofile = c1 + 2.0 * c2 * s;
                w.conj() * (2.0 * dprofile / self.density(w))
            }
        }
    }

    /// The stored supremum of `|L|` over the disk.
    pub fn analyticity_bound(&self) -> AnalyticityBound {
        self.bound
    }

    pub fn is_approximately_analytic(&self) -> bool {
        self.bound.is_finite()
    }

    /// Estimate `sup |L|` by maximizing over the half-offset radial grid
    /// `r_j = (j + 1/2) / resolution`, then again at twice the resolution.
    /// If the refined estimate exceeds `1.9x` the coarse one the sup is
    /// declared unbounded (the estimates of a bounded `|L|` stabilize, while
    /// a rim blow-up like the hyperbolic one keeps doubling). Otherwise the
    /// refined estimate is returned.
    pub fn approx_analytic_bound(&self, resolution: usize) -> Result<AnalyticityBound> {
        if resolution < 16 {
            return Err(Error::InvalidParameter {
                name: "resolution",
                message: format!("need at least 16 radial samples, got {resolution}"),
            });
        }
        let coarse = self.grid_sup_log_derivative(resolution);
        let fine = self.grid_sup_log_derivative(2 * resolution);
        if coarse == 0.0 {
            return Ok(AnalyticityBound::Finite(fine));
        }
        if fine > 1.9 * coarse {
            return Ok(AnalyticityBound::Unbounded);
        }
        Ok(AnalyticityBound::Finite(fine))
    }

    fn grid_sup_log_derivative(&self, resolution: usize) -> f64 {
        let mut sup = 0.0f64;
        for j in 0..resolution {
            let r = (j as f64 + 0.5) / resolution as f64;
            let magnitude = self
                .log_density_derivative(Complex64::new(r, 0.0))
                .norm();
            sup = sup.max(magnitude);
        }
        sup
    }

    /// Supremum of `|L|` for a radial profile, including the rim value
    /// (the half-offset grid never samples `r = 1`, where polynomial
    /// profiles often peak).
    fn radial_sup_log_derivative(&self) -> f64 {
        let grid = self.grid_sup_log_derivative(65536);
        let rim = self
            .log_density_derivative(Complex64::new(1.0, 0.0))
            .norm();
        grid.max(rim)
    }

    /// Christoffel symbols of `rho^2 (dx^2 + dy^2)` at `w`, indexed
    /// `[i][k][l]` for `Gamma^i_{kl}`. With `phi = log rho`:
    ///
    /// `Gamma^1 = [[phi_x, phi_y], [phi_y, -phi_x]]`,
    /// `Gamma^2 = [[-phi_y, phi_x], [phi_x, phi_y]]`,
    ///
    /// where `phi_x - i phi_y = L(w)`.
    pub fn christoffel_symbols(&self, w: Complex64) -> [[[f64; 2]; 2]; 2] {
        let l = self.log_density_derivative(w);
        let phi_x = l.re;
        let phi_y = -l.im;
        [
            [[phi_x, phi_y], [phi_y, -phi_x]],
            [[-phi_y, phi_x], [phi_x, phi_y]],
        ]
    }

    /// The quadratic form `Q^1 + i Q^2` with
    /// `Q^i = sum_{k,l} Gamma^i_{kl} <grad u^k, grad u^l>`, assembled from
    /// the Wirtinger data `f_z`, `f_zbar` of a map `f = u + iv`. This is the
    /// nonlinearity of the real two-component harmonic-map system; it equals
    /// `4 L(w) f_z f_zbar`, which is how the complex and real forms of the
    /// equation are reconciled.
    pub fn christoffel_quadratic(
        &self,
        w: Complex64,
        f_z: Complex64,
        f_zbar: Complex64,
    ) -> Complex64 {
        let symbols = self.christoffel_symbols(w);
        // Gradient entries recovered from the Wirtinger pair.
        let u_x = f_z.re + f_zbar.re;
        let u_y = f_zbar.im - f_z.im;
        let v_x = f_z.im + f_zbar.im;
        let v_y = f_z.re - f_zbar.re;
        let grads = [[u_x, u_y], [v_x, v_y]];
        let mut q = [0.0f64; 2];
        for (i, symbol) in symbols.iter().enumerate() {
            for k in 0..2 {
                for l in 0..2 {
                    let inner = grads[k][0] * grads[l][0] + grads[k][1] * grads[l][1];
                    q[i] += symbol[k][l] * inner;
                }
            }
        }
        Complex64::new(q[0], q[1])
    }
}
