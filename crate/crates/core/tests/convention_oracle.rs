//! Matrix-level regression of the algebra connecting the three invariant
//! constructions, on random structure pairs with no differencing involved.
//!
//! For random antisymmetric invertible `omega` and random antisymmetric
//! `S` (standing in for a sampled `L_E omega`), with `W = omega^{-1}` and
//! `A = S W`:
//!
//! * the spectrum of `A` comes in doubled pairs (a Pfaffian consequence:
//!   `det(S - t omega)` is a perfect square);
//! * `<S^{^k}, W^{^k}> = (-1)^k (k!)^2 e_k` over the deduplicated
//!   eigenvalues, independent of the phase-space size;
//! * `Tr(A^k)` equals the power sum over the full spectrum;
//! * Newton's identities round-trip between the two symmetric families.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nonoether_core::engine::{
    elementary_from_spectrum, elementary_to_power_sums, lutzky_elementary_factor,
    lutzky_from_samples, power_sums_to_elementary, spectrum_of_matrix,
};
use nonoether_core::tensor::{FormSample, MultivectorSample};
use nonoether_core::Tolerances;

fn random_antisym(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// Antisymmetric with determinant bounded away from zero, so the inverse
/// is well conditioned enough for 1e-6 checks.
fn random_structure(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    loop {
        let m = random_antisym(rng, dim);
        if m.determinant().abs() >= 1e-3 {
            return m;
        }
    }
}

#[test]
fn wedge_power_integrals_match_spectrum_elementary_symmetrics() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3usize {
        let dim = 2 * n;
        for _ in 0..300 {
            let omega = random_structure(&mut rng, dim);
            let s = random_antisym(&mut rng, dim);
            let w = omega.try_inverse().expect("determinant bounded away from zero");

            let sf = FormSample::from_matrix(&s).unwrap();
            let wf = MultivectorSample::from_matrix(&w).unwrap();
            let lutzky = lutzky_from_samples(&sf, &wf).unwrap();

            let a = &s * &w;
            let spec = spectrum_of_matrix(&a);
            assert!(
                spec.max_relative_gap <= tol.spectrum_pairing,
                "n = {n}: doubled-pair gap {:.3e}",
                spec.max_relative_gap
            );

            let elem = elementary_from_spectrum(&spec.values);
            for k in 1..=n {
                let expected = lutzky_elementary_factor(k) * elem.elementary[k - 1];
                let resid = (lutzky[k - 1] - expected).abs();
                assert!(
                    resid <= tol.cross_formula * (1.0 + lutzky[k - 1].abs()),
                    "n = {n}, k = {k}: l = {}, c e = {}, residual {:.3e}",
                    lutzky[k - 1],
                    expected,
                    resid
                );
            }

            // Trace versus power sum over the doubled spectrum.
            let mut power = a.clone();
            for k in 1..=dim {
                let tr = power.trace();
                let ps: f64 = spec.raw.iter().map(|z| z.powu(k as u32).re).sum();
                assert!(
                    (tr - ps).abs() <= tol.trace_spectrum * (1.0 + tr.abs()),
                    "n = {n}, k = {k}: trace {tr} vs power sum {ps}"
                );
                power = &power * &a;
            }
        }
    }
}

#[test]
fn ordered_tuple_sums_are_factorial_multiples() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let omega = random_structure(&mut rng, 6);
    let s = random_antisym(&mut rng, 6);
    let a = &s * omega.try_inverse().unwrap();
    let spec = spectrum_of_matrix(&a);
    let elem = elementary_from_spectrum(&spec.values);
    let mut kfact = 1.0;
    for k in 1..=3usize {
        kfact *= k as f64;
        assert!(
            (elem.ordered_tuple_sums[k - 1] - kfact * elem.elementary[k - 1]).abs() < 1e-12
        );
    }
}

#[test]
fn newton_identities_round_trip_on_random_spectra() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6usize);
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p = elementary_to_power_sums(&e);
        let back = power_sums_to_elementary(&p);
        for k in 0..n {
            let scale = 1.0 + e[k].abs();
            assert!(
                (e[k] - back[k]).abs() <= tol.newton_roundtrip * scale,
                "k = {}: {} vs {}",
                k + 1,
                e[k],
                back[k]
            );
        }
    }
}

#[test]
fn power_sum_round_trip_from_spectra() {
    // Round trip starting on the power-sum side, seeded by actual spectra
    // so the values are realizable.
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let n = rng.gen_range(1..=4usize);
        let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p: Vec<f64> = (1..=n)
            .map(|k| lam.iter().map(|l| l.powi(k as i32)).sum())
            .collect();
        let e = power_sums_to_elementary(&p);
        let p_back = elementary_to_power_sums(&e);
        for k in 0..n {
            assert!((p[k] - p_back[k]).abs() <= tol.newton_roundtrip * (1.0 + p[k].abs()));
        }
    }
}
