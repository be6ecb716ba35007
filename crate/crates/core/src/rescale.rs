//! Blow-up families `w_n = p_n(w(q_n(z)))` near a boundary point.
//!
//! Each member recenters the base map at a sequence point `z_n` approaching
//! the rim: `q_n` moves the origin to `z_n`, `p_n` moves `w(z_n)` back to
//! zero, so every `w_n` fixes the origin. The compactness theory rests on
//! the members obeying n-uniform interior bounds: `|grad w_n| (1 - |z|)`,
//! `|Lap w_n| (1 - |z|)^2`, the same Laplacian weight against the product
//! `|w_n_z| |w_n_zbar|`, and `|Psi_n| (1 - |z|)^4` for the Hopf
//! differential taken in the induced metric. This module builds the
//! families and measures those suprema.
//!
//! Members are sampled from the base map by interpolation, never by
//! re-solving: the bounds are statements about one fixed map.

use num_complex::Complex64;

use crate::disk::DiskAutomorphism;
use crate::error::{Error, Result};
use crate::grid::{DiskGrid, MapField};
use crate::metric::ConformalMetric;
use crate::solver::wirtinger_of_values;

/// Denominator guard for the quotient bound: nodes where either Wirtinger
/// derivative is below this are skipped (conformal members degenerate).
const QUOTIENT_GUARD: f64 = 1e-12;

/// One member of a blow-up family.
#[derive(Debug, Clone)]
pub struct BlowupMember {
    /// The sequence point `z_n`.
    pub center: Complex64,
    /// Target recentering `p_n = to_zero(w(z_n))`.
    pub p: DiskAutomorphism,
    /// Source recentering `q_n = from_zero(z_n)`.
    pub q: DiskAutomorphism,
    /// `p_n(w(q_n(z)))` sampled on the member grid.
    pub field: MapField,
    /// `4 dz (w_n)_zbar` at the nodes, transported by the chain rule from
    /// the base map's measured mixed second derivative. Bound checks read
    /// these instead of re-differencing the member grid.
    pub lap: Vec<Complex64>,
    /// Base values `w(q_n(z))` at the nodes, sampled with the bicubic rule.
    /// The Moebius coefficients in the bound checks are steep functions of
    /// this argument (their gradients scale like `1 / (1 - |w(z_n)|^2)`),
    /// so they get the smooth samples rather than the bilinear ones.
    pub base_at_pulled: Vec<Complex64>,
}

impl BlowupMember {
    /// Evaluate the composition directly (no member-grid resampling). At
    /// `z = 0` this is `p_n(w(z_n)) = 0` exactly, by construction of `p_n`.
    pub fn eval(&self, base: &MapField, z: Complex64) -> Result<Complex64> {
        Ok(self.p.apply(base.interpolate(self.q.apply(z))?))
    }

}

/// A blow-up family: the base map together with its recentered members.
#[derive(Debug, Clone)]
pub struct BlowupFamily {
    pub base: MapField,
    pub members: Vec<BlowupMember>,
}

impl BlowupFamily {
    /// `|w_n(0)|` by direct composition; zero up to roundoff for every
    /// member.
    pub fn member_origin_defect(&self, n: usize) -> Result<f64> {
        Ok(self.members[n].eval(&self.base, Complex64::new(0.0, 0.0))?.norm())
    }
}

/// Build one recentered member on the given grid.
pub fn blowup_member(
    base: &MapField,
    center: Complex64,
    grid: &DiskGrid,
) -> Result<BlowupMember> {
    if center.norm() >= 1.0 {
        return Err(Error::OutsideDisk(center));
    }
    let hit = base.interpolate(center)?;
    if hit.norm() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "base_map",
            message: format!(
                "|w(z_n)| = {} at z_n = {center}; the base map must send the \
                 sequence point inside the open disk",
                hit.norm()
            ),
        });
    }
    let p = DiskAutomorphism::to_zero(hit)?;
    let q = DiskAutomorphism::from_zero(center)?;
    // The member's derivatives transport exactly through the chain rule:
    // `(w_n)_z = p'(W) w_z(q) q'`, `(w_n)_zbar = p'(W) w_zbar(q) conj(q')`,
    // and for the Laplacian `4 dz (w_n)_zbar = 4 |q'|^2 (p''(W) w_z w_zbar
    // + p'(W) dz w_zbar)`, all evaluated at the pulled point. Only the base
    // fields are interpolated; re-differencing the member grid instead
    // would differentiate the interpolation error (a full order lost per
    // pass) and alias the recentring's compressed features, which deep
    // members squeeze below any fixed grid step. For the same reason the
    // derivative fields are sampled with a slope-continuous bicubic rather
    // than the bilinear rule used for values.
    let base_derivs = base.derivatives()?;
    let (base_m2, _) = wirtinger_of_values(&base_derivs.w_zbar, base.grid())?;
    let mut values = Vec::with_capacity(grid.node_count());
    let mut member_wz = Vec::with_capacity(grid.node_count());
    let mut member_wzb = Vec::with_capacity(grid.node_count());
    let mut member_lap = Vec::with_capacity(grid.node_count());
    let mut base_at_pulled = Vec::with_capacity(grid.node_count());
    for j in 0..grid.nr() {
        for s in 0..grid.ntheta() {
            let z = grid.node(j, s);
            let pulled = q.apply(z);
            values.push(p.apply(base.interpolate(pulled)?));
            let w_q = bicubic_sample(base.grid(), base.values(), pulled);
            let p1 = p.deriv(w_q, 1)?;
            let p2 = p.deriv(w_q, 2)?;
            let q1 = q.deriv(z, 1)?;
            let wz = bicubic_sample(base.grid(), &base_derivs.w_z, pulled);
            let wzb = bicubic_sample(base.grid(), &base_derivs.w_zbar, pulled);
            let m2 = bicubic_sample(base.grid(), &base_m2, pulled);
            member_wz.push(p1 * wz * q1);
            member_wzb.push(p1 * wzb * q1.conj());
            member_lap.push((p2 * wz * wzb + p1 * m2) * q1.norm_sqr() * 4.0);
            base_at_pulled.push(w_q);
        }
    }
    let mut boundary = Vec::with_capacity(grid.ntheta());
    for &t in grid.angles() {
        let pulled = q.apply(Complex64::from_polar(1.0, t));
        boundary.push(p.apply(base.interpolate(pulled)?));
    }
    let field = MapField::from_values(grid.clone(), values, boundary)?
        .with_analytic_derivs(member_wz, member_wzb)?;
    Ok(BlowupMember {
        center,
        p,
        q,
        field,
        lap: member_lap,
        base_at_pulled,
    })
}

/// Catmull-Rom weights on unit-spaced samples at offsets -1, 0, 1, 2.
fn catmull_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Slope-continuous bicubic sample of a node-major field at a point inside
/// the disk. Radial rows below ring zero come from the antipodal rings
/// (radius -r along direction theta is radius r along theta + pi), which
/// keeps the radial line uniformly spaced through the origin. Past the
/// outermost ring the cubic through the last four rings is carried to the
/// rim; the half-step of extrapolation stays within its accuracy.
fn bicubic_sample(grid: &DiskGrid, samples: &[Complex64], zeta: Complex64) -> Complex64 {
    let nr = grid.nr() as isize;
    let n = grid.ntheta();
    let dr = 1.0 / nr as f64;
    let dtheta = std::f64::consts::TAU / n as f64;
    let y = (zeta.arg() / dtheta).rem_euclid(n as f64);
    let k0 = y.floor() as usize % n;
    let wt = catmull_weights(y - y.floor());

    // Ring row interpolated in theta; `flip` reads the antipodal column.
    let row_at = |ring: usize, flip: bool| -> Complex64 {
        let shift = if flip { n / 2 } else { 0 };
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &wm) in wt.iter().enumerate() {
            let k = (k0 + n + shift + m - 1) % n;
            acc += samples[ring * n + k] * wm;
        }
        acc
    };

    let x = zeta.norm() / dr - 0.5;
    let j0 = x.floor() as isize;
    if j0 >= nr - 2 {
        // Cubic through the last four rings, evaluated directly.
        let u = x - (nr - 4) as f64;
        let basis = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &b) in basis.iter().enumerate() {
            acc += row_at((nr - 4) as usize + m, false) * b;
        }
        return acc;
    }
    let wr = catmull_weights(x - j0 as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, &wm) in wr.iter().enumerate() {
        let ring = j0 + m as isize - 1;
        if ring >= 0 {
            acc += row_at(ring as usize, false) * wm;
        } else {
            acc += row_at((-ring - 1) as usize, true) * wm;
        }
    }
    acc
}

/// The recentered field alone.
pub fn blowup_map(base: &MapField, center: Complex64, grid: &DiskGrid) -> Result<MapField> {
    Ok(blowup_member(base, center, grid)?.field)
}

/// Build the family for a list of sequence points.
pub fn blowup_family(
    base: &MapField,
    centers: &[Complex64],
    grid: &DiskGrid,
) -> Result<BlowupFamily> {
    let members = centers
        .iter()
        .map(|&c| blowup_member(base, c, grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlowupFamily {
        base: base.clone(),
        members,
    })
}

/// The default sequence `z_n = (1 - 2^{-n}) e^{i theta0}`, `n = 1..=count`:
/// geometric approach to the boundary point `e^{i theta0}`.
pub fn default_sequence(theta0: f64, count: usize) -> Vec<Complex64> {
    (1..=count)
        .map(|n| Complex64::from_polar(1.0 - (-(n as f64)).exp2(), theta0))
        .collect()
}

/// Induced metric density (squared) along the member,
/// `rho_n^2(z) = rho^2(w(q_n(z))) / (|p_n'(w(q_n(z)))|^2 (1 - |z_n|^2)^2)`:
/// the pullback under `p_n^{-1}`, normalized by `q_n'(0)`, in which the
/// recentered map is again harmonic.
pub fn induced_metric_density(
    metric: &ConformalMetric,
    base: &MapField,
    center: Complex64,
    z: Complex64,
) -> Result<f64> {
    if center.norm() >= 1.0 {
        return Err(Error::OutsideDisk(center));
    }
    let hit = base.interpolate(center)?;
    if hit.norm() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "base_map",
            message: format!(
                "|w(z_n)| = {} at z_n = {center}; the base map must send the \
                 sequence point inside the open disk",
                hit.norm()
            ),
        });
    }
    let p = DiskAutomorphism::to_zero(hit)?;
    let q = DiskAutomorphism::from_zero(center)?;
    let pulled = base.interpolate(q.apply(z))?;
    let rho = metric.density(pulled);
    let stretch = p.deriv(pulled, 1)?.norm();
    let normalizer = 1.0 - center.norm_sqr();
    Ok(rho * rho / (stretch * stretch * normalizer * normalizer))
}

/// Interior bounds of one member.
#[derive(Debug, Clone)]
pub struct MemberBounds {
    pub center: Complex64,
    /// `sup |grad w_n| (1 - |z|)`.
    pub c1: f64,
    /// `sup |Lap w_n| (1 - |z|)^2`.
    pub c2: f64,
    /// `sup |Lap w_n| (1 - |z|)^2 / (|w_n_z| |w_n_zbar|)`, `None` when the
    /// quotient guard skipped every node (conformal member).
    pub c3: Option<f64>,
    /// Nodes the quotient guard skipped.
    pub c3_skipped: usize,
    /// Sup over checked nodes of the harmonicity-transport defect
    /// `|Lap w_n - 4 (p''/p'^2 - L(W)/p') w_n_z w_n_zbar|`; for a harmonic
    /// base map this sits at the discretization floor.
    pub transport_residual: f64,
}

/// Family-level verdicts for the interior gradient and Laplacian bounds.
#[derive(Debug, Clone)]
pub struct LemmaBoundsReport {
    pub members: Vec<MemberBounds>,
    pub c1_sup: f64,
    pub c2_sup: f64,
    pub c3_sup: Option<f64>,
    /// `(max - min) / min` of the per-member constants over the deeper half
    /// of the family (at least two members). A member's sup only weights
    /// base points its window reaches at small `|z|`, so the per-member
    /// constants approach the true bound from below as the sequence deepens;
    /// spread among the early members measures that coverage, not the
    /// family. A genuinely unbounded family keeps growing among its deepest
    /// members, which is what this ratio catches.
    pub c1_variation: f64,
    pub c2_variation: f64,
    /// Both variations below 1/2: the constants are n-uniform at this
    /// resolution.
    pub uniform: bool,
}

/// Hopf differential bound `sup |Psi_n| (1 - |z|)^4` per member.
#[derive(Debug, Clone)]
pub struct HopfBoundReport {
    pub members: Vec<(Complex64, f64)>,
    pub sup: f64,
    /// Spread of the deeper half of the members, as in
    /// [`LemmaBoundsReport::c1_variation`].
    pub variation: f64,
    pub uniform: bool,
}

fn relative_variation(values: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if values.is_empty() || hi <= 1e-12 {
        0.0
    } else if lo <= 1e-12 {
        f64::INFINITY
    } else {
        (hi - lo) / lo
    }
}

/// Relative spread of the deeper half of the per-member constants (at
/// least two members when the family has them).
fn tail_variation(values: &[f64]) -> f64 {
    let keep = (values.len() / 2).max(2).min(values.len());
    relative_variation(&values[values.len() - keep..])
}

/// Rings kept by the rim exclusion `|z| <= 1 - 3h`: recentering pushes
/// sample points toward the base map's rim, where the stencils degrade.
fn included_rings(grid: &DiskGrid) -> usize {
    let cutoff = 1.0 - 3.0 * grid.dr();
    grid.radii().iter().filter(|&&r| r <= cutoff).count()
}

/// Measure the interior bounds for every member: the gradient and Laplacian
/// weights, the quotient form, and the transport defect of the harmonic-map
/// equation rewritten in the induced metric (this is where the metric
/// enters).
pub fn lemma_bounds_check(
    family: &BlowupFamily,
    metric: &ConformalMetric,
) -> Result<LemmaBoundsReport> {
    let mut members = Vec::with_capacity(family.members.len());
    for member in &family.members {
        members.push(member_bounds(member, metric)?);
    }
    let c1_all: Vec<f64> = members.iter().map(|m| m.c1).collect();
    let c2_all: Vec<f64> = members.iter().map(|m| m.c2).collect();
    let c1_variation = tail_variation(&c1_all);
    let c2_variation = tail_variation(&c2_all);
    let c3_sup = members
        .iter()
        .filter_map(|m| m.c3)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(LemmaBoundsReport {
        c1_sup: c1_all.iter().fold(0.0f64, |a, &b| a.max(b)),
        c2_sup: c2_all.iter().fold(0.0f64, |a, &b| a.max(b)),
        c3_sup,
        c1_variation,
        c2_variation,
        uniform: c1_variation < 0.5 && c2_variation < 0.5,
        members,
    })
}

fn member_bounds(member: &BlowupMember, metric: &ConformalMetric) -> Result<MemberBounds> {
    let grid = member.field.grid();
    let derivs = member.field.derivatives()?;
    let lap = &member.lap;
    let pulled = &member.base_at_pulled;
    let rings = included_rings(grid);
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    let mut c3: Option<f64> = None;
    let mut skipped = 0usize;
    let mut transport = 0.0f64;
    for j in 0..rings {
        let r = grid.radii()[j];
        let margin = 1.0 - r;
        for s in 0..grid.ntheta() {
            let idx = grid.index(j, s);
            let az = derivs.w_z[idx].norm();
            let azb = derivs.w_zbar[idx].norm();
            let lap_abs = lap[idx].norm();
            c1 = c1.max((az + azb) * margin);
            c2 = c2.max(lap_abs * margin * margin);
            if az > QUOTIENT_GUARD && azb > QUOTIENT_GUARD {
                let quotient = lap_abs * margin * margin / (az * azb);
                c3 = Some(c3.map_or(quotient, |v| v.max(quotient)));
            } else {
                skipped += 1;
            }
            let w = pulled[idx];
            let p1 = member.p.deriv(w, 1)?;
            let p2 = member.p.deriv(w, 2)?;
            let coefficient = p2 / (p1 * p1) - metric.log_density_derivative(w) / p1;
            let defect = lap[idx]
                - coefficient * derivs.w_z[idx] * derivs.w_zbar[idx] * 4.0;
            transport = transport.max(defect.norm());
        }
    }
    Ok(MemberBounds {
        center: member.center,
        c1,
        c2,
        c3,
        c3_skipped: skipped,
        transport_residual: transport,
    })
}

/// Measure `sup |Psi_n| (1 - |z|)^4` per member, with
/// `Psi_n = rho_n^2 (w_n)_z conj((w_n)_zbar)` in the induced density.
pub fn hopf_bound_check(
    family: &BlowupFamily,
    metric: &ConformalMetric,
) -> Result<HopfBoundReport> {
    let mut members = Vec::with_capacity(family.members.len());
    for member in &family.members {
        let grid = member.field.grid();
        let derivs = member.field.derivatives()?;
        let pulled = &member.base_at_pulled;
        let normalizer = 1.0 - member.center.norm_sqr();
        let rings = included_rings(grid);
        let mut sup = 0.0f64;
        for j in 0..rings {
            let r = grid.radii()[j];
            let weight = (1.0 - r).powi(4);
            for s in 0..grid.ntheta() {
                let idx = grid.index(j, s);
                let w = pulled[idx];
                let rho = metric.density(w);
                let stretch = member.p.deriv(w, 1)?.norm();
                let density_sq = rho * rho / (stretch * stretch * normalizer * normalizer);
                let psi = density_sq
                    * (derivs.w_z[idx] * derivs.w_zbar[idx].conj()).norm();
                sup = sup.max(psi * weight);
            }
        }
        members.push((member.center, sup));
    }
    let all: Vec<f64> = members.iter().map(|&(_, s)| s).collect();
    let variation = tail_variation(&all);
    Ok(HopfBoundReport {
        sup: all.iter().fold(0.0f64, |a, &b| a.max(b)),
        variation,
        uniform: variation < 0.5,
        members,
    })
}

/// Sup of the harmonicity-transport defect for one member (see
/// [`MemberBounds::transport_residual`]).
pub fn transport_residual(
    metric: &ConformalMetric,
    member: &BlowupMember,
) -> Result<f64> {
    Ok(member_bounds(member, metric)?.transport_residual)
}
