//! Representation identity: any smooth field u on the closed disk satisfies
//! u = P[u|rim] - G[Lap u]. Reconstructing known fields from their boundary
//! trace and analytic Laplacian exercises the Poisson extension and the
//! Green operator together, with the truncation error halving under one
//! grid refinement.

use harmap_core::solver::{green_potential, poisson_extend_samples};
use harmap_core::{DiskGrid, MapField};
use num_complex::Complex64;

struct Case {
    name: &'static str,
    field: fn(Complex64) -> Complex64,
    laplacian: fn(Complex64) -> Complex64,
}

const CASES: &[Case] = &[
    Case {
        name: "|z|^2",
        field: |z| Complex64::new(z.norm_sqr(), 0.0),
        laplacian: |_| Complex64::new(4.0, 0.0),
    },
    Case {
        name: "Re z^3",
        field: |z| Complex64::new((z * z * z).re, 0.0),
        laplacian: |_| Complex64::new(0.0, 0.0),
    },
    Case {
        name: "z + 0.1 zbar^2",
        field: |z| z + z.conj() * z.conj() * 0.1,
        laplacian: |_| Complex64::new(0.0, 0.0),
    },
    Case {
        name: "|z|^2 Re z",
        field: |z| Complex64::new(z.norm_sqr() * z.re, 0.0),
        // In polar coordinates u = r^3 cos(theta), so Lap u = 8 r cos(theta).
        laplacian: |z| Complex64::new(8.0 * z.re, 0.0),
    },
];

fn reconstruction_error(case: &Case, grid: &DiskGrid) -> f64 {
    let rim: Vec<Complex64> = grid
        .angles()
        .iter()
        .map(|&t| (case.field)(Complex64::from_polar(1.0, t)))
        .collect();
    let harmonic = poisson_extend_samples(&rim, grid).unwrap();
    let density: Vec<Complex64> = {
        let sampled = MapField::sample(grid.clone(), case.laplacian);
        sampled.values().to_vec()
    };
    let potential = green_potential(&density, grid).unwrap();
    let mut sup = 0.0f64;
    for j in 0..grid.nr() {
        for s in 0..grid.ntheta() {
            let z = grid.node(j, s);
            let got = harmonic.value(j, s) - potential.value(j, s);
            sup = sup.max((got - (case.field)(z)).norm());
        }
    }
    sup
}

#[test]
fn representation_identity_reconstructs_test_fields() {
    let coarse = DiskGrid::new(64, 128).unwrap();
    let fine = coarse.refine();
    for case in CASES {
        let e_coarse = reconstruction_error(case, &coarse);
        assert!(
            e_coarse <= 5e-3,
            "{}: coarse error {e_coarse}",
            case.name
        );
        let e_fine = reconstruction_error(case, &fine);
        // Harmonic cases reproduce at the roundoff floor, where the halving
        // law has nothing left to act on.
        if e_coarse > 1e-10 {
            assert!(
                e_fine <= e_coarse / 2.0,
                "{}: no halving, {e_coarse} -> {e_fine}",
                case.name
            );
        } else {
            assert!(e_fine <= 1e-10, "{}: fine error {e_fine}", case.name);
        }
    }
}
