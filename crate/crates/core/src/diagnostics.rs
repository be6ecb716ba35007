//! Quantitative distortion diagnostics for disk self-maps.
//!
//! Every estimate the bi-Lipschitz theory of rho-harmonic quasiconformal
//! maps rests on is measured here at grid scale: dilatation and its
//! orientation precondition, the bi-Lipschitz margins `l = |w_z| - |w_zbar|`
//! and `L = |w_z| + |w_zbar|`, holomorphy of the Hopf differential,
//! Mori-type modulus bounds, the boundary distortion ratio, subharmonicity
//! of the exponential barrier, uniformity of the singular kernel integral,
//! the hyperbolic energy density, and the Laplacian growth constants.
//!
//! Checks that require the normalization `w(0) = 0` refuse maps that lack
//! it; [`normalize_origin`] postcomposes with a Mobius shift (exact at the
//! nodes) to produce a normalized field first.

use num_complex::Complex64;

use crate::disk::DiskAutomorphism;
use crate::error::{Error, Result};
use crate::grid::{DiskGrid, MapField};
use crate::metric::ConformalMetric;
use crate::solver::{laplacian, wirtinger_derivatives, wirtinger_of_values};

/// Largest `|w(0)|` accepted by the checks that assume `w(0) = 0`.
pub const ORIGIN_TOLERANCE: f64 = 1e-6;

/// Nodes with `|w_z|` below this are dilatation singularities.
const SINGULAR_GRADIENT: f64 = 1e-14;

/// Pointwise dilatation data: `k = |w_zbar| / |w_z|` and
/// `K = (1 + k) / (1 - k)`, with `K = +inf` where `k >= 1`.
#[derive(Debug, Clone)]
pub struct DilatationField {
    pub k: Vec<f64>,
    pub kk: Vec<f64>,
    pub sup_k: f64,
    pub sup_kk: f64,
    /// Nodes `(ring, spoke)` where `|w_z|` vanished; `k` holds NaN there.
    pub excluded: Vec<(usize, usize)>,
    /// True when the Jacobian `|w_z|^2 - |w_zbar|^2` is positive at every
    /// non-excluded node.
    pub orientation_preserved: bool,
}

/// Measure the dilatation fields. Singular nodes (vanishing `|w_z|`) are
/// excluded and reported; more than 1% of them makes the measurement
/// meaningless and is a hard error.
pub fn dilatation_field(w: &MapField) -> Result<DilatationField> {
    let derivs = w.derivatives()?;
    let grid = w.grid();
    let total = grid.node_count();
    let mut k = vec![f64::NAN; total];
    let mut kk = vec![f64::NAN; total];
    let mut excluded = Vec::new();
    let mut sup_k = 0.0f64;
    let mut sup_kk = 0.0f64;
    let mut orientation_preserved = true;
    for j in 0..grid.nr() {
        for s in 0..grid.ntheta() {
            let idx = grid.index(j, s);
            let az = derivs.w_z[idx].norm();
            let azb = derivs.w_zbar[idx].norm();
            if az < SINGULAR_GRADIENT {
                excluded.push((j, s));
                continue;
            }
            if az * az - azb * azb <= 0.0 {
                orientation_preserved = false;
            }
            let kv = azb / az;
            k[idx] = kv;
            kk[idx] = if kv < 1.0 {
                (1.0 + kv) / (1.0 - kv)
            } else {
                f64::INFINITY
            };
            sup_k = sup_k.max(kv);
            sup_kk = sup_kk.max(kk[idx]);
        }
    }
    if excluded.len() * 100 > total {
        return Err(Error::TooManySingularNodes {
            count: excluded.len(),
            total,
        });
    }
    Ok(DilatationField {
        k,
        kk,
        sup_k,
        sup_kk,
        excluded,
        orientation_preserved,
    })
}

/// Bi-Lipschitz margin fields `l = |w_z| - |w_zbar|` (smallest directional
/// stretch) and `L = |w_z| + |w_zbar|` (the gradient norm `|grad w|`).
#[derive(Debug, Clone)]
pub struct BilipschitzEstimate {
    pub l: Vec<f64>,
    pub big_l: Vec<f64>,
    pub inf_l: f64,
    pub sup_big_l: f64,
    pub argmin: (usize, usize),
    pub threshold: f64,
    /// `inf l > threshold`: at this resolution the map shows a genuine
    /// two-sided gradient bound.
    pub bilipschitz: bool,
}

/// A resolution-aware default: a smallest stretch below one radial spacing
/// per unit is indistinguishable from degenerate on this grid.
pub fn default_bilipschitz_threshold(grid: &DiskGrid) -> f64 {
    grid.dr()
}

pub fn bilipschitz_estimate(w: &MapField, threshold: f64) -> Result<BilipschitzEstimate> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            message: format!("must be positive and finite, got {threshold}"),
        });
    }
    let derivs = w.derivatives()?;
    let grid = w.grid();
    let mut l = Vec::with_capacity(grid.node_count());
    let mut big_l = Vec::with_capacity(grid.node_count());
    let mut inf_l = f64::INFINITY;
    let mut sup_big_l = 0.0f64;
    let mut argmin = (0, 0);
    for j in 0..grid.nr() {
        for s in 0..grid.ntheta() {
            let idx = grid.index(j, s);
            let az = derivs.w_z[idx].norm();
            let azb = derivs.w_zbar[idx].norm();
            l.push(az - azb);
            big_l.push(az + azb);
            if az - azb < inf_l {
                inf_l = az - azb;
                argmin = (j, s);
            }
            sup_big_l = sup_big_l.max(az + azb);
        }
    }
    Ok(BilipschitzEstimate {
        l,
        big_l,
        inf_l,
        sup_big_l,
        argmin,
        threshold,
        bilipschitz: inf_l > threshold,
    })
}

/// Hopf differential `Psi = rho^2(w) w_z conj(w_zbar)` at the nodes. For a
/// rho-harmonic map this field is holomorphic.
pub fn hopf_differential(metric: &ConformalMetric, w: &MapField) -> Result<Vec<Complex64>> {
    let derivs = w.derivatives()?;
    let mut psi = Vec::with_capacity(w.values().len());
    for (idx, &value) in w.values().iter().enumerate() {
        let rho = metric.density(value);
        psi.push(derivs.w_z[idx] * derivs.w_zbar[idx].conj() * (rho * rho));
    }
    Ok(psi)
}

/// Sup of `|d/dzbar psi|` over the nodes, excluding the outermost ring where
/// the one-sided radial stencil meets the boundary layer of `psi`.
pub fn holomorphy_residual(psi: &[Complex64], grid: &DiskGrid) -> Result<f64> {
    let (_, dzbar) = wirtinger_of_values(psi, grid)?;
    let mut sup = 0.0f64;
    for j in 0..grid.nr().saturating_sub(1) {
        for s in 0..grid.ntheta() {
            sup = sup.max(dzbar[grid.index(j, s)].norm());
        }
    }
    Ok(sup)
}

/// Postcompose with `to_zero(w(0))` until the origin value is below `tol`
/// (a couple of steps suffice: each shift contracts the defect
/// quadratically). Exact at the nodes; analytic derivative samples, when
/// attached, are transported by the chain rule.
pub fn normalize_origin(w: &MapField, tol: f64) -> Result<MapField> {
    let mut field = w.clone();
    for _ in 0..4 {
        let origin = field.origin_value();
        if origin.norm() <= tol {
            return Ok(field);
        }
        if origin.norm() >= 1.0 {
            return Err(Error::NotSelfMap {
                magnitude: origin.norm(),
                ring: 0,
                spoke: 0,
            });
        }
        let shift = DiskAutomorphism::to_zero(origin)?;
        let values: Vec<Complex64> = field.values().iter().map(|&v| shift.apply(v)).collect();
        let boundary: Vec<Complex64> = field
            .boundary_values()
            .iter()
            .map(|&v| shift.apply(v))
            .collect();
        let analytic = field.analytic_derivatives().map(|d| {
            let mut w_z = Vec::with_capacity(d.w_z.len());
            let mut w_zbar = Vec::with_capacity(d.w_zbar.len());
            for (idx, &v) in field.values().iter().enumerate() {
                let chain = shift.deriv(v, 1).expect("order 1 is always valid");
                w_z.push(chain * d.w_z[idx]);
                w_zbar.push(chain * d.w_zbar[idx]);
            }
            (w_z, w_zbar)
        });
        let mut next = MapField::from_values(field.grid().clone(), values, boundary)?;
        if let Some((w_z, w_zbar)) = analytic {
            next = next.with_analytic_derivs(w_z, w_zbar)?;
        }
        field = next;
    }
    let leftover = field.origin_value().norm();
    if leftover <= tol {
        Ok(field)
    } else {
        Err(Error::NormalizationRequired(leftover))
    }
}

/// Mori-type modulus bounds for a K-quasiconformal self-homeomorphism
/// fixing the origin:
/// `(|z| / 4^{1 - 1/K})^K <= |w(z)| <= 4^{1 - 1/K} |z|^{1/K}`.
#[derive(Debug, Clone)]
pub struct MoriReport {
    pub kk: f64,
    /// Smallest `|w| - lower` over the nodes; nonnegative up to roundoff
    /// when the lower bound holds.
    pub worst_lower_slack: f64,
    /// Smallest `upper - |w|` over the nodes.
    pub worst_upper_slack: f64,
    pub argmin_lower: (usize, usize),
    pub argmin_upper: (usize, usize),
    pub passed: bool,
}

/// Roundoff allowance for inequality slacks that are exactly zero in exact
/// arithmetic (identity map at K = 1).
const SLACK_ROUNDOFF: f64 = 1e-12;

pub fn mori_check(w: &MapField, kk: f64) -> Result<MoriReport> {
    if !(kk.is_finite() && kk >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kk",
            message: format!("maximal dilatation must be finite and >= 1, got {kk}"),
        });
    }
    let origin = w.origin_value().norm();
    if origin > ORIGIN_TOLERANCE {
        return Err(Error::NormalizationRequired(origin));
    }
    let grid = w.grid();
    let scale = exp2(2.0 * (1.0 - 1.0 / kk)); // 4^{1 - 1/K}
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    let mut argmin_lower = (0, 0);
    let mut argmin_upper = (0, 0);
    for j in 0..grid.nr() {
        let r = grid.radii()[j];
        let lower = (r / scale).powf(kk);
        let upper = scale * r.powf(1.0 / kk);
        for s in 0..grid.ntheta() {
            let magnitude = w.value(j, s).norm();
            if magnitude - lower < worst_lower {
                worst_lower = magnitude - lower;
                argmin_lower = (j, s);
            }
            if upper - magnitude < worst_upper {
                worst_upper = upper - magnitude;
                argmin_upper = (j, s);
            }
        }
    }
    Ok(MoriReport {
        kk,
        worst_lower_slack: worst_lower,
        worst_upper_slack: worst_upper,
        argmin_lower,
        argmin_upper,
        passed: worst_lower >= -SLACK_ROUNDOFF && worst_upper >= -SLACK_ROUNDOFF,
    })
}

/// Boundary distortion ratio `(1 - |z|^2) / (1 - |w|^2)`: its supremum is
/// the measured distortion constant of the map.
#[derive(Debug, Clone)]
pub struct DistortionRatio {
    /// Supremum over the grid nodes.
    pub sup_nodes: f64,
    pub argmax: (usize, usize),
    /// Quadratic extrapolation of the three outermost ring maxima to `r = 1`,
    /// where the ratio is attained in the limit.
    pub rim_extrapolated: f64,
    /// Final estimate: the larger of the two.
    pub estimate: f64,
}

pub fn distortion_ratio(w: &MapField) -> Result<DistortionRatio> {
    let origin = w.origin_value().norm();
    if origin > ORIGIN_TOLERANCE {
        return Err(Error::NormalizationRequired(origin));
    }
    let grid = w.grid();
    if grid.nr() < 3 {
        return Err(Error::InvalidGrid(
            "rim extrapolation needs at least three rings".into(),
        ));
    }
    let mut sup_nodes = 0.0f64;
    let mut argmax = (0, 0);
    let mut ring_max = vec![0.0f64; grid.nr()];
    for j in 0..grid.nr() {
        let r = grid.radii()[j];
        for s in 0..grid.ntheta() {
            let magnitude = w.value(j, s).norm();
            if magnitude >= 1.0 {
                return Err(Error::NotSelfMap {
                    magnitude,
                    ring: j,
                    spoke: s,
                });
            }
            let ratio = (1.0 - r * r) / (1.0 - magnitude * magnitude);
            ring_max[j] = ring_max[j].max(ratio);
            if ratio > sup_nodes {
                sup_nodes = ratio;
                argmax = (j, s);
            }
        }
    }
    let nr = grid.nr();
    let rim_extrapolated = lagrange_at_one(
        [grid.radii()[nr - 3], grid.radii()[nr - 2], grid.radii()[nr - 1]],
        [ring_max[nr - 3], ring_max[nr - 2], ring_max[nr - 1]],
    );
    Ok(DistortionRatio {
        sup_nodes,
        argmax,
        rim_extrapolated,
        estimate: sup_nodes.max(rim_extrapolated),
    })
}

/// Quadratic Lagrange extrapolation of `(x_i, y_i)` to `x = 1`.
fn lagrange_at_one(x: [f64; 3], y: [f64; 3]) -> f64 {
    let mut out = 0.0;
    for i in 0..3 {
        let mut basis = 1.0;
        for l in 0..3 {
            if l != i {
                basis *= (1.0 - x[l]) / (x[i] - x[l]);
            }
        }
        out += y[i] * basis;
    }
    out
}

fn exp2(x: f64) -> f64 {
    x.exp2()
}

/// `rho_0(K) = 4^{1 - K^2 - K}`, the inner-disk radius protected by the
/// Mori bound: a K-quasiconformal self-map fixing the origin keeps
/// `|w| >= rho_0` on `|z| >= 4^{-K}`. Decreasing in K; `rho_0(1) = 1/4`.
pub fn rho_zero(kk: f64) -> f64 {
    exp2(2.0 * (1.0 - kk * kk - kk))
}

/// Barrier subharmonicity data. The barrier is
/// `phi(w) = -1/A + (1/A) e^{A (|w| - 1)}` with `A = 1` when
/// `4 - 4 B K^2 >= 0` and `A = K^2 (B K^2 - 1) / rho_0^2` otherwise (the
/// smallest admissible exponent); for a map with `|Laplacian w| <= B |grad w|^2`
/// the composite `phi(w(z))` is subharmonic on the annulus
/// `4^{-K} <= |z| <= 1`.
///
/// With `u = |w|` the chain rule gives
/// `Lap phi(w) = e^{A(u-1)} (A |grad u|^2 + Lap u)`, and the exponential is
/// positive, so subharmonicity is equivalent to the bracket being
/// nonnegative. The check measures the bracket: a large growth constant
/// forces an exponent large enough to underflow `e^{A(u-1)}` on the whole
/// interior, where differencing the composite directly would only measure
/// the rounding plateau.
#[derive(Debug, Clone)]
pub struct BarrierReport {
    pub rho0: f64,
    pub exponent: f64,
    /// Minimum over the checked annulus nodes of the subharmonicity factor
    /// `A |grad u|^2 + Lap u` plus the stencil allowance.
    pub min_factor_with_allowance: f64,
    pub min_factor: f64,
    pub checked_nodes: usize,
    pub passed: bool,
}

pub fn barrier_check(w: &MapField, b: f64, kk: f64) -> Result<BarrierReport> {
    if !(kk.is_finite() && kk >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kk",
            message: format!("maximal dilatation must be finite and >= 1, got {kk}"),
        });
    }
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            message: format!("growth constant must be finite and >= 0, got {b}"),
        });
    }
    let origin = w.origin_value().norm();
    if origin > ORIGIN_TOLERANCE {
        return Err(Error::NormalizationRequired(origin));
    }
    let rho0 = rho_zero(kk);
    let exponent = if 4.0 - 4.0 * b * kk * kk >= 0.0 {
        1.0
    } else {
        kk * kk * (b * kk * kk - 1.0) / (rho0 * rho0)
    };
    let grid = w.grid();
    let nr = grid.nr();
    let n = grid.ntheta();
    // The modulus field u = |w|, with its own boundary row (|w| = 1 on the
    // rim for the boundary data this crate admits). Real field, so
    // |grad u|^2 = 4 |u_z|^2.
    let u: Vec<Complex64> = w
        .values()
        .iter()
        .map(|v| Complex64::new(v.norm(), 0.0))
        .collect();
    let u_plain: Vec<f64> = u.iter().map(|v| v.re).collect();
    let u_boundary: Vec<Complex64> = w
        .boundary_values()
        .iter()
        .map(|v| Complex64::new(v.norm(), 0.0))
        .collect();
    let u_field = MapField::from_values(grid.clone(), u, u_boundary)?;
    let derivs = wirtinger_derivatives(&u_field)?;
    let lap = laplacian(&u_field)?;
    // Divided third differences along each direction estimate |u'''| for
    // the stencil-error allowance.
    let third = third_difference_magnitudes(&u_plain, grid);
    let r_inner = exp2(-2.0 * kk); // 4^{-K}
    let r_outer = 1.0 - grid.dr();
    let h2 = grid.dr() * grid.dr();
    let mut min_with_allowance = f64::INFINITY;
    let mut min_plain = f64::INFINITY;
    let mut checked = 0usize;
    for j in 0..nr {
        let r = grid.radii()[j];
        if r < r_inner || r > r_outer {
            continue;
        }
        for s in 0..n {
            // Local sup of the third-difference estimates over the node and
            // its immediate neighbors.
            let mut local = 0.0f64;
            for dj in -1i64..=1 {
                let jj = j as i64 + dj;
                if jj < 0 || jj >= nr as i64 {
                    continue;
                }
                for ds in -1i64..=1 {
                    let ss = (s as i64 + ds).rem_euclid(n as i64) as usize;
                    local = local.max(third[jj as usize * n + ss]);
                }
            }
            let idx = grid.index(j, s);
            let grad_u = 2.0 * derivs.w_z[idx].norm();
            let value = exponent * grad_u * grad_u + lap[idx].re;
            // Truncation allowance for both terms: the Laplacian stencil
            // and, scaled by the exponent, the gradient product.
            let allowance = h2 * local * (10.0 + 2.0 * exponent * grad_u);
            min_with_allowance = min_with_allowance.min(value + allowance);
            min_plain = min_plain.min(value);
            checked += 1;
        }
    }
    if checked == 0 {
        return Err(Error::InvalidGrid(
            "barrier annulus contains no grid nodes".into(),
        ));
    }
    Ok(BarrierReport {
        rho0,
        exponent,
        min_factor_with_allowance: min_with_allowance,
        min_factor: min_plain,
        checked_nodes: checked,
        passed: min_with_allowance >= 0.0,
    })
}

/// Per-node `max(|d^3 phi / dr^3|, |d^3 phi / ds^3|)` from undivided third
/// differences (`s` the angular arc length), windows clamped at the radial
/// extremes.
fn third_difference_magnitudes(phi: &[f64], grid: &DiskGrid) -> Vec<f64> {
    let nr = grid.nr();
    let n = grid.ntheta();
    let dr3 = grid.dr().powi(3);
    let mut out = vec![0.0f64; nr * n];
    for j in 0..nr {
        let arc3 = (grid.radii()[j] * grid.dtheta()).powi(3);
        for s in 0..n {
            let radial = if nr >= 4 {
                let base = j.clamp(1, nr - 3);
                let f = |jj: usize| phi[jj * n + s];
                (f(base + 2) - 3.0 * f(base + 1) + 3.0 * f(base) - f(base - 1)).abs() / dr3
            } else {
                0.0
            };
            let g = |ss: i64| phi[j * n + ss.rem_euclid(n as i64) as usize];
            let angular =
                (g(s as i64 + 2) - 3.0 * g(s as i64 + 1) + 3.0 * g(s as i64) - g(s as i64 - 1))
                    .abs()
                    / arc3;
            out[j * n + s] = radial.max(angular);
        }
    }
    out
}

/// Singular kernel integral
/// `I_p(z) = integral over the disk of [(1 - |w|^2) / |1 - conj(z) w|]^p |w - z|^{-p} dA`,
/// computed in polar coordinates centered at `z`: along each ray the
/// substitution `u = t^{2 - p}` removes the `t^{1-p}` singularity, the ray
/// integral is evaluated by adaptive Simpson quadrature, and the smooth
/// angular integral by a doubling trapezoid rule.
///
/// Admissible exponents are `0 < p < 2`: at `p = 2` the point singularity
/// stops being integrable. (The harmonic-map estimates use `p` strictly
/// inside `(1, 2)`; smaller exponents remain numerically fine and serve as
/// oracles.)
pub fn singular_integral_ip(z: Complex64, p: f64) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDisk(z));
    }
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            message: format!("exponent must lie in (0, 2), got {p}"),
        });
    }
    let ray = |beta: f64| -> f64 {
        let direction = Complex64::from_polar(1.0, beta);
        let b = (z.conj() * direction).re;
        let reach = -b + (b * b + 1.0 - z.norm_sqr()).sqrt();
        let power = 1.0 / (2.0 - p);
        let upper = reach.powf(2.0 - p);
        let integrand = |u: f64| -> f64 {
            let t = u.powf(power);
            let w = z + direction * t;
            let smooth = (1.0 - w.norm_sqr()).max(0.0)
                / (Complex64::new(1.0, 0.0) - z.conj() * w).norm();
            smooth.powf(p)
        };
        adaptive_simpson(&integrand, 0.0, upper, 1e-10 * upper.max(1.0), 24) / (2.0 - p)
    };
    // Doubling trapezoid in the angle; the integrand is smooth and periodic.
    let mut samples = 64usize;
    let mut previous = trapezoid_periodic(&ray, samples);
    loop {
        samples *= 2;
        let current = trapezoid_periodic(&ray, samples);
        if (current - previous).abs() <= 1e-7 * current.abs().max(1.0) || samples >= 4096 {
            return Ok(current);
        }
        previous = current;
    }
}

fn trapezoid_periodic(f: &impl Fn(f64) -> f64, samples: usize) -> f64 {
    let step = 2.0 * std::f64::consts::PI / samples as f64;
    (0..samples).map(|i| f(i as f64 * step)).sum::<f64>() * step
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_refine(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Hyperbolic energy density
/// `e(z) = ((1 - |z|^2)^2 / (1 - |w|^2)^2) (|w_z|^2 + |w_zbar|^2)`.
/// Identically one for disk automorphisms. Errors when `|w|` reaches the rim
/// at an interior node, where the density blows up.
pub fn hyperbolic_energy(w: &MapField) -> Result<Vec<f64>> {
    let derivs = w.derivatives()?;
    let grid = w.grid();
    let mut energy = Vec::with_capacity(grid.node_count());
    for j in 0..grid.nr() {
        let r = grid.radii()[j];
        let base = 1.0 - r * r;
        for s in 0..grid.ntheta() {
            let idx = grid.index(j, s);
            let gap = 1.0 - w.values()[idx].norm_sqr();
            if gap <= 1e-12 {
                return Err(Error::NotSelfMap {
                    magnitude: w.values()[idx].norm(),
                    ring: j,
                    spoke: s,
                });
            }
            let stretch = derivs.w_z[idx].norm_sqr() + derivs.w_zbar[idx].norm_sqr();
            energy.push((base / gap) * (base / gap) * stretch);
        }
    }
    Ok(energy)
}

/// Measured Laplacian growth constants.
///
/// `b_sup` is the combined constant `sup |Lap w| / (|grad w|^2 + |w|)`;
/// `b_qc_sup` the quasiconformal-class constant `sup |Lap w| / |grad w|^2`
/// (both suprema over the nodes). The split constants realize
/// `|Lap w| <= a_est |grad w|^2 + b_est`: `a_est` is the ratio supremum over
/// nodes with `|grad w|^2 >= 1`, `b_est` picks up the remainder elsewhere.
#[derive(Debug, Clone)]
pub struct GrowthConstants {
    pub b_sup: f64,
    pub b_qc_sup: f64,
    pub a_est: f64,
    pub b_est: f64,
    /// Present when a refined sample was supplied: the refined `b_sup`, the
    /// growth ratio, and whether the constant is flagged as unbounded
    /// (ratio at least 2 under one grid doubling).
    pub refined: Option<RefinedGrowth>,
}

#[derive(Debug, Clone, Copy)]
pub struct RefinedGrowth {
    pub b_sup: f64,
    pub ratio: f64,
    pub unbounded: bool,
}

pub fn laplacian_growth_constants(
    w: &MapField,
    refined: Option<&MapField>,
) -> Result<GrowthConstants> {
    let base = growth_pass(w)?;
    let refined = match refined {
        None => None,
        Some(fine) => {
            let fine_pass = growth_pass(fine)?;
            let ratio = fine_pass.0 / base.0;
            Some(RefinedGrowth {
                b_sup: fine_pass.0,
                ratio,
                unbounded: ratio >= 2.0,
            })
        }
    };
    Ok(GrowthConstants {
        b_sup: base.0,
        b_qc_sup: base.1,
        a_est: base.2,
        b_est: base.3,
        refined,
    })
}

fn growth_pass(w: &MapField) -> Result<(f64, f64, f64, f64)> {
    let lap = laplacian(w)?;
    let derivs = w.derivatives()?;
    let n = w.values().len();
    let mut b_sup = 0.0f64;
    let mut b_qc_sup = 0.0f64;
    let mut a_est = 0.0f64;
    for idx in 0..n {
        let grad = derivs.w_z[idx].norm() + derivs.w_zbar[idx].norm();
        let gradsq = grad * grad;
        let magnitude = lap[idx].norm();
        let denom = gradsq + w.values()[idx].norm();
        if denom > 0.0 {
            b_sup = b_sup.max(magnitude / denom);
        }
        if gradsq > 0.0 {
            b_qc_sup = b_qc_sup.max(magnitude / gradsq);
        }
        if gradsq >= 1.0 {
            a_est = a_est.max(magnitude / gradsq);
        }
    }
    let mut b_est = 0.0f64;
    for idx in 0..n {
        let grad = derivs.w_z[idx].norm() + derivs.w_zbar[idx].norm();
        let gradsq = grad * grad;
        if gradsq < 1.0 {
            b_est = b_est.max(lap[idx].norm() - a_est * gradsq);
        }
    }
    Ok((b_sup, b_qc_sup, a_est, b_est))
}

/// One verdict line of a diagnostics run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// A bound the theory asserts; failing one is a defect.
    Inequality,
    /// A measured quantity reported for inspection; no pass/fail semantics
    /// beyond "was computable".
    Measurement,
}

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub bound: Option<f64>,
    pub passed: bool,
    pub detail: String,
}

/// Aggregated verdicts of a diagnostics battery.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub records: Vec<CheckRecord>,
}

impl DiagnosticsReport {
    pub fn push_inequality(
        &mut self,
        name: &str,
        value: f64,
        bound: Option<f64>,
        passed: bool,
        detail: String,
    ) {
        self.records.push(CheckRecord {
            name: name.to_owned(),
            kind: CheckKind::Inequality,
            value,
            bound,
            passed,
            detail,
        });
    }

    pub fn push_measurement(&mut self, name: &str, value: f64, detail: String) {
        self.records.push(CheckRecord {
            name: name.to_owned(),
            kind: CheckKind::Measurement,
            value,
            bound: None,
            passed: true,
            detail,
        });
    }

    /// Names of failed inequality checks.
    pub fn failed_inequalities(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.kind == CheckKind::Inequality && !r.passed)
            .map(|r| r.name.as_str())
            .collect()
    }
}

/// The standard battery: every estimate measured on one map, with the
/// origin-normalized copy used where the theory assumes `w(0) = 0`.
pub fn standard_diagnostics(
    metric: &ConformalMetric,
    w: &MapField,
) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::default();
    let grid = w.grid();

    let sup_abs = w.sup_abs();
    report.push_inequality(
        "max-principle",
        sup_abs,
        Some(1.0 + 1e-8),
        sup_abs <= 1.0 + 1e-8,
        "sup |w| over the nodes stays inside the closed disk (iteration slack 1e-8)".into(),
    );

    let dil = dilatation_field(w)?;
    report.push_inequality(
        "orientation-jacobian",
        if dil.orientation_preserved { 1.0 } else { 0.0 },
        Some(1.0),
        dil.orientation_preserved,
        format!(
            "positive Jacobian at all measured nodes; {} singular nodes excluded",
            dil.excluded.len()
        ),
    );
    report.push_measurement(
        "dilatation-sup-k",
        dil.sup_k,
        "sup |w_zbar| / |w_z|".into(),
    );
    report.push_measurement(
        "dilatation-sup-K",
        dil.sup_kk,
        "sup (1 + k) / (1 - k)".into(),
    );

    let bil = bilipschitz_estimate(w, default_bilipschitz_threshold(grid))?;
    report.push_measurement(
        "bilipschitz-inf-l",
        bil.inf_l,
        format!(
            "inf (|w_z| - |w_zbar|); verdict at threshold {:.3e}: {}",
            bil.threshold,
            if bil.bilipschitz {
                "bi-Lipschitz at this resolution"
            } else {
                "not bi-Lipschitz at this resolution"
            }
        ),
    );
    report.push_measurement(
        "gradient-sup-L",
        bil.sup_big_l,
        "sup (|w_z| + |w_zbar|)".into(),
    );

    let psi = hopf_differential(metric, w)?;
    let residual = holomorphy_residual(&psi, grid)?;
    report.push_measurement(
        "hopf-holomorphy-residual",
        residual,
        "sup |d/dzbar Psi| off the outermost ring; decays under refinement for harmonic maps"
            .into(),
    );

    let growth = laplacian_growth_constants(w, None)?;
    report.push_measurement(
        "growth-a-est",
        growth.a_est,
        "sup |Lap w| / |grad w|^2 where |grad w|^2 >= 1".into(),
    );
    report.push_measurement(
        "growth-b-est",
        growth.b_est,
        "sup (|Lap w| - a_est |grad w|^2) where |grad w|^2 < 1".into(),
    );
    report.push_measurement(
        "growth-B-combined",
        growth.b_sup,
        "sup |Lap w| / (|grad w|^2 + |w|)".into(),
    );
    report.push_measurement(
        "growth-B-qc",
        growth.b_qc_sup,
        "sup |Lap w| / |grad w|^2".into(),
    );

    let energy = hyperbolic_energy(w)?;
    let (e_min, e_max) = energy
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        });
    report.push_measurement(
        "hyperbolic-energy-inf",
        e_min,
        "inf of the hyperbolic energy density".into(),
    );
    report.push_measurement(
        "hyperbolic-energy-sup",
        e_max,
        "sup of the hyperbolic energy density; identically 1 for automorphisms".into(),
    );

    // Checks below assume w(0) = 0; normalize when needed.
    let normalized;
    let pinned: &MapField = if w.origin_value().norm() <= ORIGIN_TOLERANCE {
        w
    } else {
        normalized = normalize_origin(w, 1e-8)?;
        &normalized
    };

    if dil.sup_kk.is_finite() {
        let mori = mori_check(pinned, dil.sup_kk)?;
        report.push_inequality(
            "mori-lower",
            mori.worst_lower_slack,
            Some(-SLACK_ROUNDOFF),
            mori.worst_lower_slack >= -SLACK_ROUNDOFF,
            format!(
                "min (|w| - (r / 4^(1-1/K))^K) at ring {} spoke {}",
                mori.argmin_lower.0, mori.argmin_lower.1
            ),
        );
        report.push_inequality(
            "mori-upper",
            mori.worst_upper_slack,
            Some(-SLACK_ROUNDOFF),
            mori.worst_upper_slack >= -SLACK_ROUNDOFF,
            format!(
                "min (4^(1-1/K) r^(1/K) - |w|) at ring {} spoke {}",
                mori.argmin_upper.0, mori.argmin_upper.1
            ),
        );
    } else {
        report.push_inequality(
            "mori-lower",
            f64::NAN,
            None,
            false,
            "maximal dilatation is unbounded; Mori bounds do not apply".into(),
        );
    }

    let distortion = distortion_ratio(pinned)?;
    report.push_measurement(
        "distortion-ratio-C",
        distortion.estimate,
        format!(
            "sup (1 - |z|^2)/(1 - |w|^2); node sup {:.6e}, rim extrapolation {:.6e}",
            distortion.sup_nodes, distortion.rim_extrapolated
        ),
    );

    if dil.sup_kk.is_finite() {
        let growth_pinned = laplacian_growth_constants(pinned, None)?;
        let barrier = barrier_check(pinned, growth_pinned.b_qc_sup, dil.sup_kk)?;
        report.push_inequality(
            "barrier-subharmonic",
            barrier.min_factor_with_allowance,
            Some(0.0),
            barrier.passed,
            format!(
                "min (A |grad|w||^2 + Lap |w| + allowance) over {} annulus nodes, exponent A = {:.6e}",
                barrier.checked_nodes, barrier.exponent
            ),
        );
    }

    let ip_origin = singular_integral_ip(Complex64::new(0.0, 0.0), 1.5)?;
    let mut ip_sup: f64 = ip_origin;
    for radius in [0.5, 0.9] {
        ip_sup = ip_sup.max(singular_integral_ip(Complex64::new(radius, 0.0), 1.5)?);
    }
    report.push_inequality(
        "singular-integral-uniform",
        ip_sup,
        Some(1.5 * ip_origin),
        ip_sup <= 1.5 * ip_origin,
        format!("sup of I_3/2 over test centers vs 1.5 x I_3/2(0) = {ip_origin:.6}"),
    );

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryMap, DiskGrid};
    use crate::solver::{example_map_alpha, sample_automorphism, solve, SolverConfig};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn identity_field(nr: usize, ntheta: usize) -> MapField {
        MapField::sample(DiskGrid::new(nr, ntheta).unwrap(), |z| z)
    }

    #[test]
    fn dilatation_of_alpha_fixture_is_constant() {
        let grid = DiskGrid::new(32, 64).unwrap();
        let field = example_map_alpha(1.0, &grid).unwrap();
        let dil = dilatation_field(&field).unwrap();
        assert_relative_eq!(dil.sup_k, 1.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(dil.sup_kk, 2.0, max_relative = 1e-10);
        assert!(dil.orientation_preserved);
        assert!(dil.excluded.is_empty());
    }

    #[test]
    fn bilipschitz_verdicts_separate_identity_from_fixture() {
        let grid = DiskGrid::new(32, 64).unwrap();
        let id = identity_field(32, 64);
        let est = bilipschitz_estimate(&id, default_bilipschitz_threshold(&grid)).unwrap();
        assert!(est.bilipschitz);
        assert_relative_eq!(est.inf_l, 1.0, max_relative = 1e-10);

        let fixture = example_map_alpha(1.0, &grid).unwrap();
        let est = bilipschitz_estimate(&fixture, default_bilipschitz_threshold(&grid)).unwrap();
        // inf l = 1.5 r - 0.5 r = r at the innermost ring: below one grid
        // spacing, so the verdict flips.
        assert!(!est.bilipschitz);
        assert_relative_eq!(est.inf_l, grid.radii()[0], max_relative = 1e-9);
        assert_eq!(est.argmin.0, 0);
    }

    #[test]
    fn hopf_differential_of_conformal_map_vanishes() {
        let grid = DiskGrid::new(16, 32).unwrap();
        let auto =
            DiskAutomorphism::from_zero(Complex64::new(0.4, 0.1)).unwrap();
        let field = sample_automorphism(&auto, &grid);
        let psi = hopf_differential(&ConformalMetric::hyperbolic(), &field).unwrap();
        for v in &psi {
            assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn holomorphy_residual_decays_for_sampled_holomorphic_field() {
        // Non-polynomial, so the radial stencils carry genuine truncation
        // error for the refinement to shrink; a polynomial of degree <= 4
        // would sit at the rounding floor on both grids.
        let f = |z: Complex64| {
            (z - Complex64::new(2.0, 0.0)).inv() + Complex64::new(0.2, -0.4) * z
        };
        let coarse = DiskGrid::new(32, 64).unwrap();
        let fine = coarse.refine();
        let sample = |grid: &DiskGrid| -> Vec<Complex64> {
            let field = MapField::sample(grid.clone(), f);
            field.values().to_vec()
        };
        let r_coarse = holomorphy_residual(&sample(&coarse), &coarse).unwrap();
        let r_fine = holomorphy_residual(&sample(&fine), &fine).unwrap();
        assert!(r_coarse < 5e-3, "coarse residual {r_coarse}");
        assert!(
            r_fine < r_coarse / 3.0,
            "no decay: {r_coarse} -> {r_fine}"
        );
    }

    #[test]
    fn mori_identity_has_zero_slack() {
        let field = identity_field(16, 32);
        let mori = mori_check(&field, 1.0).unwrap();
        assert!(mori.passed);
        assert_abs_diff_eq!(mori.worst_lower_slack, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(mori.worst_upper_slack, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn mori_requires_origin_normalization() {
        let grid = DiskGrid::new(16, 32).unwrap();
        let shifted = MapField::sample(grid, |z| {
            DiskAutomorphism::from_zero(Complex64::new(0.3, 0.0))
                .unwrap()
                .apply(z)
        });
        assert!(matches!(
            mori_check(&shifted, 1.0),
            Err(Error::NormalizationRequired(_))
        ));
    }

    #[test]
    fn mori_passes_on_alpha_fixture() {
        // |w| = r^{1+alpha} with K = 1 + alpha sits inside the Mori corridor.
        let grid = DiskGrid::new(32, 64).unwrap();
        let fixture = example_map_alpha(1.0, &grid).unwrap();
        let mori = mori_check(&fixture, 2.0).unwrap();
        assert!(
            mori.passed,
            "slacks {} / {}",
            mori.worst_lower_slack, mori.worst_upper_slack
        );
    }

    #[test]
    fn normalization_pipeline_pins_origin() {
        let grid = DiskGrid::new(32, 64).unwrap();
        let auto = DiskAutomorphism::from_zero(Complex64::new(0.35, -0.2)).unwrap();
        let field = sample_automorphism(&auto, &grid);
        assert!(field.origin_value().norm() > ORIGIN_TOLERANCE);
        let pinned = normalize_origin(&field, 1e-8).unwrap();
        assert!(pinned.origin_value().norm() <= 1e-8);
        // Analytic derivatives survive the chain rule.
        assert!(pinned.analytic_derivatives().is_some());
    }

    #[test]
    fn distortion_of_identity_is_one() {
        let field = identity_field(16, 32);
        let ratio = distortion_ratio(&field).unwrap();
        assert_relative_eq!(ratio.sup_nodes, 1.0, max_relative = 1e-12);
        assert_relative_eq!(ratio.rim_extrapolated, 1.0, max_relative = 1e-9);
        assert_relative_eq!(ratio.estimate, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn distortion_rejects_escaping_values() {
        let grid = DiskGrid::new(8, 16).unwrap();
        let field = MapField::sample(grid, |z| z * 2.0);
        assert!(matches!(
            distortion_ratio(&field),
            Err(Error::NotSelfMap { .. })
        ));
    }

    #[test]
    fn rho_zero_reference_values() {
        assert_eq!(rho_zero(1.0), 0.25);
        // Strictly decreasing in K.
        let mut previous = rho_zero(1.0);
        for i in 1..=20 {
            let kk = 1.0 + 0.1 * i as f64;
            let value = rho_zero(kk);
            assert!(value < previous, "rho_0 not decreasing at K = {kk}");
            previous = value;
        }
    }

    #[test]
    fn barrier_with_unit_exponent_on_identity() {
        // B = 0, K = 1: A = 1 and phi = -1 + e^{r - 1} with
        // Lap phi = e^{r-1} (1 + 1/r) > 0 on the annulus.
        let field = identity_field(32, 64);
        let barrier = barrier_check(&field, 0.0, 1.0).unwrap();
        assert_eq!(barrier.exponent, 1.0);
        assert_eq!(barrier.rho0, 0.25);
        assert!(barrier.passed);
        assert!(barrier.min_factor > 0.0);
    }

    #[test]
    fn barrier_exponent_switches_at_the_threshold() {
        let field = identity_field(32, 64);
        // B K^2 > 1 forces the large exponent branch.
        let barrier = barrier_check(&field, 2.0, 1.0).unwrap();
        assert!(barrier.exponent > 1.0);
        assert_relative_eq!(
            barrier.exponent,
            1.0 * (2.0 - 1.0) / (0.25 * 0.25),
            max_relative = 1e-12
        );
    }

    #[test]
    fn singular_integral_oracle_p_one() {
        // I_1(0) = 2 pi int_0^1 (1 - t^2) dt = 4 pi / 3.
        let value = singular_integral_ip(Complex64::new(0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(value, 4.0 * std::f64::consts::PI / 3.0, max_relative = 1e-6);
    }

    #[test]
    fn singular_integral_rejects_bad_exponents() {
        let z = Complex64::new(0.0, 0.0);
        assert!(singular_integral_ip(z, 2.0).is_err());
        assert!(singular_integral_ip(z, 0.0).is_err());
        assert!(singular_integral_ip(z, -1.0).is_err());
        assert!(singular_integral_ip(Complex64::new(1.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn hyperbolic_energy_is_one_for_automorphisms() {
        let grid = DiskGrid::new(16, 32).unwrap();
        let auto = DiskAutomorphism::from_zero(Complex64::new(0.5, 0.3)).unwrap();
        let field = sample_automorphism(&auto, &grid);
        let energy = hyperbolic_energy(&field).unwrap();
        for e in energy {
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn growth_constants_on_alpha_fixture() {
        // |Lap w| = 3, |grad w|^2 = 4 r^2 for alpha = 1: a_est peaks just
        // above r = 1/2, b_est approaches 3 at the innermost ring.
        let grid = DiskGrid::new(32, 64).unwrap();
        let fixture = example_map_alpha(1.0, &grid).unwrap();
        let growth = laplacian_growth_constants(&fixture, None).unwrap();
        assert!(growth.a_est > 2.7 && growth.a_est <= 3.0 + 1e-9, "a_est {}", growth.a_est);
        // b_est peaks at the innermost rings, where the fixture's radial
        // profile |t| t crosses the origin with a curvature jump that the
        // centered stencils measure with an O(h^2) excess, so the ceiling
        // carries a small allowance above the continuum value 3.
        assert!(growth.b_est <= 3.0 + 0.05, "b_est {}", growth.b_est);
        assert!(growth.b_est > 2.9, "b_est {}", growth.b_est);

        let refined_field = example_map_alpha(1.0, &grid.refine()).unwrap();
        let with_flag =
            laplacian_growth_constants(&fixture, Some(&refined_field)).unwrap();
        let refined = with_flag.refined.unwrap();
        assert!(refined.unbounded, "ratio {}", refined.ratio);
        assert!(refined.ratio > 3.0, "ratio {}", refined.ratio);
    }

    #[test]
    fn growth_constants_vanish_for_harmonic_identity() {
        let field = identity_field(32, 64);
        let growth = laplacian_growth_constants(&field, None).unwrap();
        assert!(growth.b_sup < 1e-10);
        assert!(growth.b_est < 1e-10);
    }

    #[test]
    fn standard_battery_on_solved_spherical_problem() {
        let grid = DiskGrid::new(32, 64).unwrap();
        let boundary = BoundaryMap::new(vec![0.2], vec![]).unwrap();
        let (w, _) = solve(
            &ConformalMetric::spherical(),
            &boundary,
            &grid,
            &SolverConfig::default(),
        )
        .unwrap();
        let report = standard_diagnostics(&ConformalMetric::spherical(), &w).unwrap();
        let failed = report.failed_inequalities();
        assert!(failed.is_empty(), "failed checks: {failed:?}");
    }
}
