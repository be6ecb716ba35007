//! Polar quadrature grid on the disk, circle boundary parametrizations, and
//! nodal map fields with bilinear interpolation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tensor grid `(r_j, theta_k)` with half-offset radii `r_j = (j + 1/2) dr`,
/// `dr = 1/nr`, and uniform angles `theta_k = k dtheta`, `dtheta = 2 pi / ntheta`.
/// No node sits at the origin or on the rim; the node quadrature weight
/// `r_j dr dtheta` sums to the disk area `pi` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskGrid {
    nr: usize,
    ntheta: usize,
    radii: Vec<f64>,
    angles: Vec<f64>,
}

impl DiskGrid {
    /// `ntheta` must be even (the angular transforms pair modes `n` and `-n`);
    /// `nr` must be positive.
    pub fn new(nr: usize, ntheta: usize) -> Result<Self> {
        if nr == 0 {
            return Err(Error::InvalidGrid("nr must be positive".into()));
        }
        if ntheta < 2 || ntheta % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "ntheta must be even and at least 2, got {ntheta}"
            )));
        }
        let dr = 1.0 / nr as f64;
        let radii = (0..nr).map(|j| (j as f64 + 0.5) * dr).collect();
        let dtheta = 2.0 * std::f64::consts::PI / ntheta as f64;
        let angles = (0..ntheta).map(|k| k as f64 * dtheta).collect();
        Ok(Self {
            nr,
            ntheta,
            radii,
            angles,
        })
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn node_count(&self) -> usize {
        self.nr * self.ntheta
    }

    pub fn dr(&self) -> f64 {
        1.0 / self.nr as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.ntheta as f64
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Storage index of node `(ring j, spoke k)`: radius-major.
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.ntheta + k
    }

    pub fn node(&self, j: usize, k: usize) -> Complex64 {
        Complex64::from_polar(self.radii[j], self.angles[k])
    }

    /// Quadrature weight of any node on ring `j`.
    pub fn ring_weight(&self, j: usize) -> f64 {
        self.radii[j] * self.dr() * self.dtheta()
    }

    /// Same layout means same node set.
    pub fn same_layout(&self, other: &DiskGrid) -> bool {
        self.nr == other.nr && self.ntheta == other.ntheta
    }

    /// Grid with both resolutions doubled.
    pub fn refine(&self) -> DiskGrid {
        DiskGrid::new(self.nr * 2, self.ntheta * 2).expect("refined grid parameters stay valid")
    }
}

/// Orientation-preserving circle homeomorphism
/// `theta -> theta + sum_k (a_k sin k theta + b_k cos k theta)`,
/// the boundary datum of the Dirichlet problem. Construction verifies the
/// phase derivative `1 + sum_k k (a_k cos k theta - b_k sin k theta)` stays
/// positive, so the boundary map is a homeomorphism onto the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMap {
    sin_coeffs: Vec<f64>,
    cos_coeffs: Vec<f64>,
    min_derivative: f64,
}

impl BoundaryMap {
    pub fn identity() -> Self {
        Self {
            sin_coeffs: Vec::new(),
            cos_coeffs: Vec::new(),
            min_derivative: 1.0,
        }
    }

    /// `sin_coeffs[k-1] = a_k`, `cos_coeffs[k-1] = b_k`. Monotonicity is
    /// checked on a fine phase grid; a nonpositive minimum is rejected.
    pub fn new(sin_coeffs: Vec<f64>, cos_coeffs: Vec<f64>) -> Result<Self> {
        for c in sin_coeffs.iter().chain(cos_coeffs.iter()) {
            if !c.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "boundary coefficients",
                    message: "coefficients must be finite".into(),
                });
            }
        }
        let mut map = Self {
            sin_coeffs,
            cos_coeffs,
            min_derivative: f64::INFINITY,
        };
        let harmonics = map.sin_coeffs.len().max(map.cos_coeffs.len());
        let samples = 4096.max(64 * harmonics);
        let mut min = f64::INFINITY;
        for i in 0..samples {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            min = min.min(map.phase_derivative(theta));
        }
        if min <= 0.0 {
            return Err(Error::BoundaryNotMonotone { min });
        }
        map.min_derivative = min;
        Ok(map)
    }

    pub fn phase(&self, theta: f64) -> f64 {
        let mut phase = theta;
        for (k, a) in self.sin_coeffs.iter().enumerate() {
            phase += a * ((k + 1) as f64 * theta).sin();
        }
        for (k, b) in self.cos_coeffs.iter().enumerate() {
            phase += b * ((k + 1) as f64 * theta).cos();
        }
        phase
    }

    pub fn phase_derivative(&self, theta: f64) -> f64 {
        let mut d = 1.0;
        for (k, a) in self.sin_coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            d += k * a * (k * theta).cos();
        }
        for (k, b) in self.cos_coeffs.iter().enumerate() {
            let k = (k + 1) as f64;
            d -= k * b * (k * theta).sin();
        }
        d
    }

    /// Minimum of the phase derivative found during validation.
    pub fn min_phase_derivative(&self) -> f64 {
        self.min_derivative
    }

    /// Boundary value `e^{i phase(theta)}`.
    pub fn value(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.phase(theta))
    }
}

/// Exact Wirtinger derivative samples attached to a field constructed from a
/// closed form. Stencil-based operations ignore these unless they go through
/// [`MapField::derivatives`].
#[derive(Debug, Clone)]
pub struct AnalyticDerivs {
    pub w_z: Vec<Complex64>,
    pub w_zbar: Vec<Complex64>,
}

/// A complex-valued field on the grid nodes plus its trace on the rim
/// (boundary samples at the grid angles). The values of a disk self-map stay
/// inside the closed disk up to iteration slack; fields that are not
/// self-maps (test functions, potentials, Hopf quadratic differentials) are
/// equally welcome, so no magnitude constraint is enforced here.
#[derive(Debug, Clone)]
pub struct MapField {
    grid: DiskGrid,
    values: Vec<Complex64>,
    boundary: Vec<Complex64>,
    analytic: Option<AnalyticDerivs>,
}

impl MapField {
    pub fn from_values(
        grid: DiskGrid,
        values: Vec<Complex64>,
        boundary: Vec<Complex64>,
    ) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::FieldSizeMismatch {
                got: values.len(),
                expected: grid.node_count(),
            });
        }
        if boundary.len() != grid.ntheta() {
            return Err(Error::FieldSizeMismatch {
                got: boundary.len(),
                expected: grid.ntheta(),
            });
        }
        Ok(Self {
            grid,
            values,
            boundary,
            analytic: None,
        })
    }

    /// Sample a closed-form map at the nodes and at the rim angles.
    pub fn sample(grid: DiskGrid, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..grid.nr() {
            for k in 0..grid.ntheta() {
                values.push(f(grid.node(j, k)));
            }
        }
        let boundary = grid
            .angles()
            .iter()
            .map(|&t| f(Complex64::from_polar(1.0, t)))
            .collect();
        Self {
            grid,
            values,
            boundary,
            analytic: None,
        }
    }

    /// Sample a map together with exact derivative formulas. Operations that
    /// accept analytic derivatives ([`MapField::derivatives`]) then bypass
    /// the stencil error floor; everything else behaves as for [`MapField::sample`].
    pub fn sample_with_derivs(
        grid: DiskGrid,
        f: impl Fn(Complex64) -> Complex64,
        f_z: impl Fn(Complex64) -> Complex64,
        f_zbar: impl Fn(Complex64) -> Complex64,
    ) -> Self {
        let mut field = Self::sample(grid, f);
        let mut w_z = Vec::with_capacity(field.grid.node_count());
        let mut w_zbar = Vec::with_capacity(field.grid.node_count());
        for j in 0..field.grid.nr() {
            for k in 0..field.grid.ntheta() {
                let z = field.grid.node(j, k);
                w_z.push(f_z(z));
                w_zbar.push(f_zbar(z));
            }
        }
        field.analytic = Some(AnalyticDerivs { w_z, w_zbar });
        field
    }

    /// Attach precomputed exact derivative samples to this field.
    pub fn with_analytic_derivs(
        mut self,
        w_z: Vec<Complex64>,
        w_zbar: Vec<Complex64>,
    ) -> Result<Self> {
        if w_z.len() != self.grid.node_count() || w_zbar.len() != self.grid.node_count() {
            return Err(Error::FieldSizeMismatch {
                got: w_z.len().min(w_zbar.len()),
                expected: self.grid.node_count(),
            });
        }
        self.analytic = Some(AnalyticDerivs { w_z, w_zbar });
        Ok(self)
    }

    pub fn grid(&self) -> &DiskGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn boundary_values(&self) -> &[Complex64] {
        &self.boundary
    }

    pub fn value(&self, j: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(j, k)]
    }

    pub fn analytic_derivatives(&self) -> Option<&AnalyticDerivs> {
        self.analytic.as_ref()
    }

    /// Value at the origin: the angular mean of the innermost ring, which is
    /// second-order accurate for smooth fields.
    pub fn origin_value(&self) -> Complex64 {
        let ntheta = self.grid.ntheta();
        let sum: Complex64 = self.values[..ntheta].iter().sum();
        sum / ntheta as f64
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Bilinear interpolation in `(r, theta)` with periodic wrap in the
    /// angle. Radially the field is padded by the origin value at `r = 0`
    /// and the boundary samples at `r = 1`, so the whole closed disk is
    /// covered. Exact at the grid nodes and at the rim sample angles.
    pub fn interpolate(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if r > 1.0 + 1e-12 {
            return Err(Error::InterpolationOutsideDisk(z));
        }
        let r = r.min(1.0);
        let mut theta = z.arg();
        if theta < 0.0 {
            theta += 2.0 * std::f64::consts::PI;
        }
        let ntheta = self.grid.ntheta();
        let dtheta = self.grid.dtheta();
        let mut k0 = (theta / dtheta).floor() as usize;
        if k0 >= ntheta {
            k0 = ntheta - 1;
        }
        let k1 = (k0 + 1) % ntheta;
        let t = ((theta - k0 as f64 * dtheta) / dtheta).clamp(0.0, 1.0);

        let ring_at = |j: usize| -> Complex64 {
            let base = self.grid.index(j, 0);
            self.values[base + k0] * (1.0 - t) + self.values[base + k1] * t
        };
        let boundary_at = || -> Complex64 { self.boundary[k0] * (1.0 - t) + self.boundary[k1] * t };

        let radii = self.grid.radii();
        let nr = self.grid.nr();
        let first = radii[0];
        let last = radii[nr - 1];
        if r <= first {
            // Between the origin pad (angular mean of ring 0) and ring 0.
            let s = r / first;
            return Ok(self.origin_value() * (1.0 - s) + ring_at(0) * s);
        }
        if r >= last {
            let s = ((r - last) / (1.0 - last)).clamp(0.0, 1.0);
            return Ok(ring_at(nr - 1) * (1.0 - s) + boundary_at() * s);
        }
        let dr = self.grid.dr();
        let mut j0 = ((r - first) / dr).floor() as usize;
        if j0 >= nr - 1 {
            j0 = nr - 2;
        }
        let s = ((r - radii[j0]) / dr).clamp(0.0, 1.0);
        Ok(ring_at(j0) * (1.0 - s) + ring_at(j0 + 1) * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn weights_sum_to_disk_area() {
        for (nr, ntheta) in [(4, 8), (17, 34), (64, 128)] {
            let grid = DiskGrid::new(nr, ntheta).unwrap();
            let total: f64 = (0..nr).map(|j| grid.ring_weight(j) * ntheta as f64).sum();
            assert_abs_diff_eq!(total, std::f64::consts::PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(DiskGrid::new(0, 8).is_err());
        assert!(DiskGrid::new(4, 7).is_err());
        assert!(DiskGrid::new(4, 0).is_err());
    }

    #[test]
    fn radii_avoid_origin_and_rim() {
        let grid = DiskGrid::new(16, 32).unwrap();
        assert!(grid.radii().first().unwrap() > &0.0);
        assert!(grid.radii().last().unwrap() < &1.0);
        assert_abs_diff_eq!(grid.radii()[0], 1.0 / 32.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_boundary_is_valid() {
        let id = BoundaryMap::identity();
        assert_eq!(id.value(0.0), Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(id.min_phase_derivative(), 1.0, epsilon = 0.0);
    }

    #[test]
    fn gentle_perturbation_accepted_strong_rejected() {
        let ok = BoundaryMap::new(vec![0.2], vec![]).unwrap();
        assert_relative_eq!(ok.min_phase_derivative(), 0.8, max_relative = 1e-6);
        let err = BoundaryMap::new(vec![2.0], vec![]);
        assert!(matches!(err, Err(Error::BoundaryNotMonotone { .. })));
    }

    #[test]
    fn boundary_values_lie_on_circle() {
        let map = BoundaryMap::new(vec![0.15, -0.05], vec![0.1]).unwrap();
        for i in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
            assert_abs_diff_eq!(map.value(theta).norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn interpolation_is_exact_at_nodes() {
        let grid = DiskGrid::new(12, 24).unwrap();
        let field = MapField::sample(grid.clone(), |z| z * z + Complex64::new(0.3, -0.1));
        for j in 0..grid.nr() {
            for k in 0..grid.ntheta() {
                let z = grid.node(j, k);
                let got = field.interpolate(z).unwrap();
                let want = field.value(j, k);
                assert_abs_diff_eq!((got - want).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn interpolation_error_is_second_order() {
        let f = |z: Complex64| z * z - z.conj() * Complex64::new(0.0, 0.5);
        let coarse = MapField::sample(DiskGrid::new(16, 32).unwrap(), f);
        let fine = MapField::sample(DiskGrid::new(32, 64).unwrap(), f);
        let probes = [
            Complex64::new(0.37, 0.11),
            Complex64::new(-0.52, 0.43),
            Complex64::new(0.02, -0.03),
            Complex64::new(0.61, -0.66),
        ];
        let err = |field: &MapField| {
            probes
                .iter()
                .map(|&z| (field.interpolate(z).unwrap() - f(z)).norm())
                .fold(0.0f64, f64::max)
        };
        let e_coarse = err(&coarse);
        let e_fine = err(&fine);
        assert!(e_coarse < 2.5e-2, "coarse error {e_coarse}");
        assert!(
            e_fine < 0.4 * e_coarse,
            "no second-order decay: {e_coarse} -> {e_fine}"
        );
    }

    #[test]
    fn interpolation_covers_origin_and_rim() {
        let grid = DiskGrid::new(10, 20).unwrap();
        let field = MapField::sample(grid, |z| z);
        let at_origin = field.interpolate(Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(at_origin.norm(), 0.0, epsilon = 1e-15);
        // Linear blending between rim samples cuts the chord, an O(dtheta^2)
        // shortfall in modulus.
        let at_rim = field.interpolate(Complex64::from_polar(1.0, 0.3)).unwrap();
        assert_abs_diff_eq!(at_rim.norm(), 1.0, epsilon = 1e-2);
        assert!(field.interpolate(Complex64::new(1.2, 0.0)).is_err());
    }

    #[test]
    fn field_length_checks() {
        let grid = DiskGrid::new(4, 8).unwrap();
        let bad = MapField::from_values(grid.clone(), vec![Complex64::new(0.0, 0.0); 3], vec![]);
        assert!(matches!(bad, Err(Error::FieldSizeMismatch { .. })));
        let ok = MapField::from_values(
            grid,
            vec![Complex64::new(0.0, 0.0); 32],
            vec![Complex64::new(1.0, 0.0); 8],
        );
        assert!(ok.is_ok());
    }
}
