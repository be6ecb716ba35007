use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use harmap_core::disk::{self, DiskAutomorphism};
use harmap_core::rescale::blowup_member;
use harmap_core::{BoundaryMap, ConformalMetric, DiskGrid, MapField};

fn polar(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

prop_compose! {
    fn in_disk(radius: f64)(r in 0.0..1.0f64, t in 0.0..TAU) -> Complex64 {
        polar(radius * r, t)
    }
}

proptest! {
    #[test]
    fn automorphisms_preserve_the_circle(a in in_disk(0.95), t in 0.0..TAU) {
        let auto = DiskAutomorphism::from_zero(a).unwrap();
        let image = auto.apply(polar(1.0, t));
        prop_assert!((image.norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn recentering_pair_composes_to_identity(a in in_disk(0.9), z in in_disk(0.999)) {
        let out = DiskAutomorphism::to_zero(a)
            .unwrap()
            .apply(DiskAutomorphism::from_zero(a).unwrap().apply(z));
        prop_assert!((out - z).norm() <= 1e-14);
    }

    #[test]
    fn green_function_is_symmetric_and_positive(z in in_disk(0.98), w in in_disk(0.98)) {
        prop_assume!((z - w).norm() >= 1e-6);
        let forward = disk::green(z, w).unwrap();
        let reverse = disk::green(w, z).unwrap();
        prop_assert!(forward > 0.0);
        prop_assert!((forward - reverse).abs() <= 1e-12);
    }

    #[test]
    fn green_gradient_matches_finite_differences(z in in_disk(0.9), w in in_disk(0.9)) {
        prop_assume!((z - w).norm() >= 0.1);
        let h = 1e-5;
        let at = |p: Complex64| disk::green(p, w).unwrap();
        let fd_x = (at(z + h) - at(z - h)) / (2.0 * h);
        let fd_y = (at(z + Complex64::i() * h) - at(z - Complex64::i() * h)) / (2.0 * h);
        let fd = Complex64::new(fd_x, -fd_y) * 0.5;
        prop_assert!((disk::green_dz(z, w).unwrap() - fd).norm() <= 1e-6);
    }

    #[test]
    fn density_double_bound_holds_for_radial_profiles(
        c0 in 0.2..3.0f64,
        c1 in -1.0..1.0f64,
        c2 in -1.0..1.0f64,
        w in in_disk(1.0),
    ) {
        let metric = match ConformalMetric::radial(c0, c1, c2) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let big_m = metric.analyticity_bound().value().unwrap();
        let rho0 = metric.density(Complex64::new(0.0, 0.0));
        let rho = metric.density(w);
        prop_assert!(rho <= rho0 * big_m.exp() + 1e-12);
        prop_assert!(rho >= rho0 * (-big_m).exp() - 1e-12);
    }

    #[test]
    fn christoffel_quadratic_matches_complex_nonlinearity(
        pick in 0usize..4,
        w in in_disk(0.95),
        are in -2.0..2.0f64, aim in -2.0..2.0f64,
        bre in -2.0..2.0f64, bim in -2.0..2.0f64,
    ) {
        let metric = match pick {
            0 => ConformalMetric::euclidean(),
            1 => ConformalMetric::spherical(),
            2 => ConformalMetric::hyperbolic(),
            _ => ConformalMetric::radial(1.5, 0.3, -0.2).unwrap(),
        };
        let a = Complex64::new(are, aim);
        let b = Complex64::new(bre, bim);
        let q = metric.christoffel_quadratic(w, a, b);
        let complex_form = metric.log_density_derivative(w) * a * b * 4.0;
        prop_assert!((q - complex_form).norm() <= 1e-10 * complex_form.norm().max(1.0));
    }

    #[test]
    fn quadrature_weights_fill_the_disk(nr in 4usize..48, half in 4usize..48) {
        let grid = DiskGrid::new(nr, 2 * half).unwrap();
        let total: f64 = (0..nr)
            .map(|j| grid.ring_weight(j) * grid.ntheta() as f64)
            .sum();
        prop_assert!((total - std::f64::consts::PI).abs() <= 1e-10);
    }

    #[test]
    fn interpolation_reproduces_node_values(
        nr in 6usize..20,
        half in 4usize..20,
        c in -1.0..1.0f64,
    ) {
        let grid = DiskGrid::new(nr, 2 * half).unwrap();
        let field = MapField::sample(grid.clone(), |z| z * z + Complex64::new(c, -c));
        for j in 0..grid.nr() {
            for k in 0..grid.ntheta() {
                let there = field.interpolate(grid.node(j, k)).unwrap();
                prop_assert!((there - field.value(j, k)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn boundary_map_accepts_homeomorphisms_rejects_folds(
        gentle in 0.0..0.99f64,
        folding in 1.01..4.0f64,
    ) {
        prop_assert!(BoundaryMap::new(vec![gentle], vec![]).is_ok());
        prop_assert!(BoundaryMap::new(vec![folding], vec![]).is_err());
    }

    #[test]
    fn poisson_kernel_has_unit_mean(z in in_disk(0.95)) {
        let n = 2048;
        let step = TAU / n as f64;
        let mean: f64 = (0..n)
            .map(|k| disk::poisson_kernel(z, k as f64 * step).unwrap())
            .sum::<f64>()
            * step
            / TAU;
        prop_assert!((mean - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn blowup_members_fix_origin_and_stay_in_disk(c in in_disk(0.9)) {
        static BASE: OnceLock<MapField> = OnceLock::new();
        let base = BASE.get_or_init(|| {
            MapField::sample(DiskGrid::new(24, 48).unwrap(), |z| z)
        });
        let member = blowup_member(base, c, base.grid()).unwrap();
        let at_origin = member.eval(base, Complex64::new(0.0, 0.0)).unwrap();
        prop_assert!(at_origin.norm() <= 1e-12);
        for v in member.field.values() {
            prop_assert!(v.norm() <= 1.0 + 1e-8);
        }
    }
}
