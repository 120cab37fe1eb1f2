mod support;

use std::f64::consts::TAU;

use crackloc::forward::{add_noise, assemble_msr};
use crackloc::imaging::steering_vector;
use crackloc::scene::{uniform_directions, Crack, Scene};
use crackloc::spectral::{estimate_rank, svd, SvdResult};
use crackloc::Vec2;
use nalgebra::DMatrix;
use num_complex::Complex64;
use support::hermitian_eigenvalues;

fn check_invariants(k: &DMatrix<Complex64>, s: &SvdResult) {
    let sv = s.singular_values();
    assert!(sv.windows(2).all(|w| w[0] >= w[1]));
    assert!(sv.iter().all(|&v| v >= 0.0));
    let rec = (k - s.reconstruct(sv.len())).norm();
    assert!(rec < 1e-8 * k.norm().max(1e-300), "reconstruction {rec:e}");
    for (name, m) in [("U", s.left_vectors()), ("V", s.right_vectors())] {
        let gram = m.adjoint() * m;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-10,
                    "{name} gram ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn noisy_and_clean_invariants() {
    let dirs = uniform_directions(20).unwrap();
    let clean = assemble_msr(&Scene::reference_example(), &dirs).unwrap();
    for msr in [
        clean.clone(),
        add_noise(&clean, 20.0, 5).unwrap(),
        add_noise(&clean, 0.0, 9).unwrap(),
    ] {
        check_invariants(msr.entries(), &svd(&msr).unwrap());
    }
}

#[test]
fn squared_singular_values_match_gram_eigenvalues() {
    let dirs = uniform_directions(20).unwrap();
    let clean = assemble_msr(&Scene::reference_example(), &dirs).unwrap();
    for msr in [clean.clone(), add_noise(&clean, 20.0, 1).unwrap()] {
        let k = msr.entries();
        let eig = hermitian_eigenvalues(&(k.adjoint() * k));
        let sv = svd(&msr).unwrap();
        let top = eig[0];
        for (s, e) in sv.singular_values().iter().zip(&eig) {
            // relative to the top eigenvalue for the numerically-zero tail
            assert!((s * s - e).abs() <= 1e-8 * top, "σ² = {} vs λ = {e}", s * s);
        }
        // noise-free: rank 3 by both routes. Gram eigenvalues carry an
        // absolute roundoff floor near ε·λ₁, so their cut sits at λ/λ₁ = 1e-12.
        if msr.realized_snr_db().is_none() {
            let by_eig = eig.iter().filter(|&&e| e > 1e-12 * top).count();
            assert_eq!(by_eig, 3);
            assert_eq!(estimate_rank(sv.singular_values(), 1e-8).unwrap(), 3);
        }
    }
}

#[test]
fn leading_vector_is_the_steering_vector() {
    let z = Vec2::new(0.35, -0.55);
    let omega = TAU / 0.4;
    let scene = Scene::new(vec![Crack::new(z, 0.05, 0.0).unwrap()], omega).unwrap();
    let dirs = uniform_directions(20).unwrap();
    let s = svd(&assemble_msr(&scene, &dirs).unwrap()).unwrap();
    let w = steering_vector(z, omega, &dirs);
    let u1 = s.left_vectors().column(0);
    let v1 = s.right_vectors().column(0);
    assert!(w.inner(u1.iter()).norm() > 0.99);
    let v1_bar: Vec<Complex64> = v1.iter().map(|z| z.conj()).collect();
    assert!(w.inner(v1_bar.iter()).norm() > 0.99);
}
