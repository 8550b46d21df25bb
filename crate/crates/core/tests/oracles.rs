//! Independent oracles for the analytic reductions.

use chiral_decoherence::bath::bose_integral;
use chiral_decoherence::polarizability::{Channel, ChannelPolarizability, Contractions};
use chiral_decoherence::scattering::{
    circular_polarization, outer_product, polarization_factor, polarization_factor_theta, polarization_projector,
    Handedness, ScatteringGeometry, SinSquaredConvention,
};
use chiral_decoherence::tensor::{
    isotropic_average_rank4, mc_rotational_average, mc_rotational_average_symmetrized, rank4_index,
    sample_uniform_rotation, McOptions, Tensor3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_tensor(rng: &mut ChaCha8Rng) -> Tensor3 {
    let mut m = [[0.0; 3]; 3];
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    Tensor3::real(m)
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let r = sample_uniform_rotation(rng);
    r.apply([0.0, 0.0, 1.0])
}

#[test]
fn symmetrized_mc_matches_exact_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for pair in 0..3 {
        let a = random_tensor(&mut rng);
        let b = random_tensor(&mut rng);
        let exact = isotropic_average_rank4(&a, &b).unwrap();
        let opts = McOptions {
            n_samples: 200_000,
            seed: 1000 + pair,
            workers: 4,
        };
        let est = mc_rotational_average_symmetrized(&a, &b, &opts).unwrap();
        let z = est.max_z_score(&exact);
        assert!(z < 3.0, "pair {pair}: max z = {z}");
    }
}

#[test]
fn plain_mc_outliers_are_consistent_with_chance() {
    // 162 component parts at 3σ: about 0.4 expected outliers per pair
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let a = random_tensor(&mut rng);
    let b = random_tensor(&mut rng);
    let exact = isotropic_average_rank4(&a, &b).unwrap();
    let opts = McOptions {
        n_samples: 200_000,
        seed: 5,
        workers: 4,
    };
    let est = mc_rotational_average(&a, &b, &opts).unwrap();
    assert!(est.count_outside(&exact, 3.0) <= 4);
    assert!(est.max_z_score(&exact) < 5.0);
}

#[test]
fn exact_average_reconstruction_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_tensor(&mut rng);
    let b = random_tensor(&mut rng);
    let avg = isotropic_average_rank4(&a, &b).unwrap();
    let t = avg.reconstruct();
    for _ in 0..10 {
        let r = sample_uniform_rotation(&mut rng);
        let m = r.matrix();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut s = num_complex::Complex64::new(0.0, 0.0);
                        for p in 0..3 {
                            for q in 0..3 {
                                for u in 0..3 {
                                    for v in 0..3 {
                                        s += m[i][p] * m[j][q] * m[k][u] * m[l][v] * t[rank4_index(p, q, u, v)];
                                    }
                                }
                            }
                        }
                        assert!((s - t[rank4_index(i, j, k, l)]).norm() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn bose_quadrature_agrees_with_zeta() {
    for n in 2..=8 {
        let b = bose_integral(n).unwrap();
        assert!(b.relative_difference() <= 1e-10, "n = {n}");
    }
    assert!((bose_integral(2).unwrap().quadrature - PI * PI / 6.0).abs() <= 1e-10 * PI * PI / 6.0);
    assert!((bose_integral(4).unwrap().quadrature - PI.powi(4) / 15.0).abs() <= 1e-10 * PI.powi(4) / 15.0);
}

#[test]
fn circular_polarization_identity_for_random_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..100 {
        let k = random_unit(&mut rng);
        for h in [Handedness::Left, Handedness::Right] {
            let lhs = outer_product(circular_polarization(k, h).unwrap());
            let rhs = polarization_projector(k, h);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((lhs[i][j] - rhs[i][j]).norm() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn vector_and_angle_forms_agree_on_forward_hemisphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let a = random_tensor(&mut rng);
    let b = random_tensor(&mut rng);
    let beta = Tensor3::imaginary(b.real_part());
    let cp = ChannelPolarizability::new((Channel::One, Channel::One), a, beta, 1e7).unwrap();
    for i in 0..=90 {
        let theta = 0.5 * PI * i as f64 / 90.0;
        let incident = random_unit(&mut rng);
        for h in [Handedness::Left, Handedness::Right] {
            let g = ScatteringGeometry::between(incident, theta, rng.random_range(0.0..2.0 * PI), h, h).unwrap();
            let v = polarization_factor(&cp, &g).value;
            let t = polarization_factor_theta(cp.contractions(), theta, h, SinSquaredConvention::Explicit).value;
            let scale = cp.contractions().anisotropic.abs() + cp.contractions().isotropic.abs();
            assert!((v - t).abs() <= 1e-12 * scale, "theta {theta}");
        }
    }
}

#[test]
fn paper_sin_squared_differs_from_explicit_basis() {
    let s = Contractions {
        anisotropic: 1.0,
        isotropic: 0.0,
    };
    let p = polarization_factor_theta(s, PI / 2.0, Handedness::Left, SinSquaredConvention::Paper).value;
    let e = polarization_factor_theta(s, PI / 2.0, Handedness::Left, SinSquaredConvention::Explicit).value;
    assert!((p - e).abs() > 1e-3);
}
