//! The Green operator evaluates a cell-integrated quadrature by circulant
//! convolution in the angle, in constant-subtracted form. These tests pit it
//! against closed-form potentials: densities whose zero-boundary potentials
//! are elementary, so the oracle shares nothing with the implementation but
//! the PDE `lap u = -g` itself.

use harmap_core::solver::green_potential;
use harmap_core::{DiskGrid, MapField};
use num_complex::Complex64;

fn potential_sup_error(
    grid: &DiskGrid,
    density: impl Fn(Complex64) -> Complex64,
    exact: impl Fn(Complex64) -> Complex64,
) -> f64 {
    let field = MapField::sample(grid.clone(), &density);
    let potential = green_potential(field.values(), grid).unwrap();
    let mut sup = 0.0f64;
    for j in 0..grid.nr() {
        for s in 0..grid.ntheta() {
            let want = exact(grid.node(j, s));
            sup = sup.max((potential.value(j, s) - want).norm());
        }
    }
    sup
}

/// Affine densities have elementary potentials, G[1] = (1 - |z|^2)/4 and
/// G[w] = z(1 - |z|^2)/8 (conjugate for conj w); the operator's local
/// subtraction reproduces all three to roundoff.
#[test]
fn affine_density_potential_is_exact() {
    // An angular size with an odd factor exercises the generic FFT plans.
    for (nr, nt) in [(8usize, 16usize), (8, 20)] {
        let grid = DiskGrid::new(nr, nt).unwrap();
        let alpha = Complex64::new(2.0, -0.7);
        let beta = Complex64::new(-0.4, 1.1);
        let gamma = Complex64::new(0.3, 0.8);
        let sup = potential_sup_error(
            &grid,
            |z| alpha + beta * z + gamma * z.conj(),
            |z| {
                let pocket = 1.0 - z.norm_sqr();
                alpha * 0.25 * pocket + (beta * z + gamma * z.conj()) * 0.125 * pocket
            },
        );
        assert!(sup < 1e-12, "affine potential deviation {sup} on {nr}x{nt}");
    }
}

/// Quadratic oracles, past the reach of the operator's affine subtraction:
/// lap(r^k e^{imt}) scales as k^2 - m^2, so g = |z|^2 has potential
/// u = (1 - r^4)/16 and g = z^2 has u = (r^2 - r^4) e^{2it} / 12, both
/// vanishing on the rim.
#[test]
fn quadratic_density_potentials_match_closed_forms() {
    type Case = (
        fn(Complex64) -> Complex64,
        fn(Complex64) -> Complex64,
        &'static str,
    );
    let cases: [Case; 3] = [
        (
            |z| Complex64::new(z.norm_sqr(), 0.0),
            |z| {
                let r2 = z.norm_sqr();
                Complex64::new((1.0 - r2 * r2) / 16.0, 0.0)
            },
            "|z|^2",
        ),
        (
            |z| z * z,
            |z| {
                let r2 = z.norm_sqr();
                let phase = if r2 > 0.0 { z * z / r2 } else { Complex64::ZERO };
                phase * (r2 - r2 * r2) / 12.0
            },
            "z^2",
        ),
        // Degree four: lap(z^4 zbar^2) = 32 z^3 zbar, harmonically closed
        // on the rim by z^2. Past stencil exactness as well, so this case
        // watches the genuine convergence regime.
        (
            |z| z * z * z * z.conj(),
            |z| {
                let z2 = z * z;
                (z2 - z2 * z2 * z.conj() * z.conj()) / 32.0
            },
            "z^3 zbar",
        ),
    ];
    let coarse = DiskGrid::new(32, 64).unwrap();
    let fine = coarse.refine();
    for (density, exact, label) in cases {
        let sup = potential_sup_error(&coarse, density, exact);
        assert!(sup < 1e-4, "{label} potential deviation {sup}");
        let sup_fine = potential_sup_error(&fine, density, exact);
        assert!(
            sup_fine < sup / 2.0,
            "{label}: no second-order decay: {sup} -> {sup_fine}"
        );
    }
}

/// For a radial density g(s), the potential solves the radial ODE
/// (1/r)(r u')' = -g with u(1) = 0, u'(0) = 0, so
/// u(r) = int_r^1 (1/t) int_0^t s g(s) ds dt. For the cubic-moment test
/// density g = 2 - s + 3 s^2 both integrals close in elementary terms:
/// int_0^t s g ds = t^2 - t^3/3 + (3/4) t^4, hence
/// u(r) = (1/2 - 1/9 + 3/16) - (r^2/2 - r^3/9 + 3 r^4/16),
/// independent of any disk kernel.
#[test]
fn radial_potential_matches_ode_quadrature() {
    let g = |s: f64| 2.0 - s + 3.0 * s * s;
    let oracle = |r: f64| {
        (0.5 - 1.0 / 9.0 + 3.0 / 16.0) - (r * r / 2.0 - r * r * r / 9.0 + 3.0 * r.powi(4) / 16.0)
    };

    let grid = DiskGrid::new(48, 96).unwrap();
    let sup = potential_sup_error(
        &grid,
        |z| Complex64::new(g(z.norm()), 0.0),
        |z| Complex64::new(oracle(z.norm()), 0.0),
    );
    assert!(sup < 2e-3, "radial ODE oracle deviation {sup}");

    // One refinement halves the error.
    let fine = grid.refine();
    let sup_fine = potential_sup_error(
        &fine,
        |z| Complex64::new(g(z.norm()), 0.0),
        |z| Complex64::new(oracle(z.norm()), 0.0),
    );
    assert!(
        sup_fine < sup / 2.0,
        "no second-order decay: {sup} -> {sup_fine}"
    );
}
