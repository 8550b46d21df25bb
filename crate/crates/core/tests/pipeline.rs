//! End-to-end checks on the bundled toy molecule.

use approx::assert_relative_eq;
use chiral_decoherence::bath::ThermalPhotonBath;
use chiral_decoherence::master_eq::{
    closed_form_b, coherence_decay_rate, discrepancy_report, elastic_decoherence_rate, order_of_magnitude_estimate,
    prefactor, rate_coefficient_m, CoefficientOptions, MOptions, Pipeline, ThetaAmplitudes,
};
use chiral_decoherence::polarizability::{invariants, Channel};
use chiral_decoherence::presets::{toy_molecule, TOY_ANISOTROPY_OVER_C};
use chiral_decoherence::scattering::{
    differential_cross_section, total_cross_section, Kinematics, ScatteringGeometry,
};
use std::f64::consts::PI;
use Channel::{One, Two};

fn options() -> CoefficientOptions {
    CoefficientOptions {
        handedness: toy_molecule().handedness,
        ..CoefficientOptions::default()
    }
}

#[test]
fn toy_rate_lands_in_the_expected_window() {
    let mol = toy_molecule();
    let c = closed_form_b(&mol.channels, &mol.spectrum, 1.0, Pipeline::Paper, &options()).unwrap();
    assert!(c.b[0][0] > 0.0 && c.b[1][1] > 0.0, "right-handed light gives positive B");
    let rate = elastic_decoherence_rate(c.b[0][0], c.b[1][1], 1.0).unwrap();
    assert!(rate.warning.is_none());
    assert!(rate.gamma >= 1e-97 && rate.gamma <= 1e-93, "gamma = {:e}", rate.gamma);
    let estimate = order_of_magnitude_estimate(TOY_ANISOTROPY_OVER_C, 1.0).unwrap();
    assert_relative_eq!(estimate, 1.0468e-92, max_relative = 1e-3);
}

#[test]
fn t8_law_is_exact() {
    let mol = toy_molecule();
    for t in [0.5, 1.0, 2.0, 4.0] {
        let g = |t: f64| {
            let c = closed_form_b(&mol.channels, &mol.spectrum, t, Pipeline::Paper, &options()).unwrap();
            elastic_decoherence_rate(c.b[0][0], c.b[1][1], t).unwrap().gamma
        };
        assert_relative_eq!(g(2.0 * t) / g(t), 256.0, max_relative = 1e-12);
    }
}

#[test]
fn elastic_m_matches_quadrature_pipeline() {
    let mol = toy_molecule();
    let opts = options();
    let bath = ThermalPhotonBath::new(1.0).unwrap();
    let quad = closed_form_b(&mol.channels, &mol.spectrum, 1.0, Pipeline::Quadrature, &opts).unwrap();
    let amps = ThetaAmplitudes {
        channels: &mol.channels,
        handedness: opts.handedness,
        convention: opts.convention,
    };
    for nu in [One, Two] {
        let m = rate_coefficient_m(&mol.spectrum, &bath, &amps, [nu; 4], &MOptions::default()).unwrap();
        let b = quad.get(nu, nu);
        assert_relative_eq!(m / prefactor(1.0).unwrap(), b, max_relative = 1e-6);
    }
    // forbidden tuple
    let m = rate_coefficient_m(&mol.spectrum, &bath, &amps, [One, One, One, Two], &MOptions::default()).unwrap();
    assert_eq!(m, 0.0);
    let achiral = mol.channels.achiral();
    let amps0 = ThetaAmplitudes {
        channels: &achiral,
        ..amps
    };
    let m = rate_coefficient_m(&mol.spectrum, &bath, &amps0, [One; 4], &MOptions::default()).unwrap();
    assert_eq!(m, 0.0);
}

#[test]
fn quadrature_resolutions_agree() {
    let mol = toy_molecule();
    let coarse = closed_form_b(&mol.channels, &mol.spectrum, 1.0, Pipeline::Quadrature, &options()).unwrap();
    let fine_opts = CoefficientOptions {
        relative_tolerance: 1e-13,
        ..options()
    };
    let fine = closed_form_b(&mol.channels, &mol.spectrum, 1.0, Pipeline::Quadrature, &fine_opts).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_relative_eq!(coarse.b[i][j], fine.b[i][j], max_relative = 1e-8);
        }
    }
}

#[test]
fn discrepancy_report_covers_every_coefficient() {
    let mol = toy_molecule();
    let paper = closed_form_b(&mol.channels, &mol.spectrum, 1.0, Pipeline::Paper, &options()).unwrap();
    let quad = closed_form_b(&mol.channels, &mol.spectrum, 1.0, Pipeline::Quadrature, &options()).unwrap();
    let report = discrepancy_report(&paper, &quad, &options());
    assert_eq!(report.entries.len(), 4);
    for e in &report.entries {
        let r = e.ratio.unwrap();
        assert!(r.is_finite(), "{e:?}");
        println!("{}: paper {:e}, quadrature {:e}, ratio {r:.6}", e.coefficient, e.paper, e.quadrature);
    }
}

#[test]
fn coherence_rate_in_equation_differs_from_elastic_rate() {
    let mol = toy_molecule();
    let c = closed_form_b(&mol.channels, &mol.spectrum, 1.0, Pipeline::Paper, &options()).unwrap();
    let gamma_eq = coherence_decay_rate(&c);
    let gamma_ela = elastic_decoherence_rate(c.b[0][0], c.b[1][1], 1.0).unwrap().gamma;
    assert!(gamma_eq > 100.0 * gamma_ela);
}

#[test]
fn toy_cross_section_by_hand() {
    let mol = toy_molecule();
    let cp = mol.rayleigh(One);
    let k = mol.wavenumber();
    let kin = Kinematics::elastic(k).unwrap();
    let geom = ScatteringGeometry::from_angles(PI / 2.0, 0.0, mol.handedness, mol.handedness).unwrap();
    // θ = π/2: |n'·k|² = 1/2, |k·k'| = 0, right-handed overall sign −
    let s = cp.contractions();
    let a = -(1.0 / 30.0) * ((0.5 - 7.0) * s.anisotropic + (1.5 + 1.0) * s.isotropic);
    let eps0 = 8.854_187_812_8e-12;
    let c = 299_792_458.0;
    let expect = k.powi(4) / (8.0 * PI * PI * eps0 * eps0 * c) * a;
    let got = differential_cross_section(cp, &geom, &kin);
    assert!(got > 0.0);
    assert_relative_eq!(got, expect, max_relative = 1e-13);
}

#[test]
fn total_cross_section_against_trapezoid() {
    let mol = toy_molecule();
    let cp = mol.rayleigh(One);
    let kin = Kinematics::elastic(mol.wavenumber()).unwrap();
    let total = total_cross_section(cp, &kin, mol.handedness).unwrap();
    let n = 10_000;
    let h = 2.0 / n as f64;
    let f = |c: f64| {
        let g = ScatteringGeometry::from_angles(c.clamp(-1.0, 1.0).acos(), 0.0, mol.handedness, mol.handedness).unwrap();
        differential_cross_section(cp, &g, &kin)
    };
    let mut trap = 0.5 * (f(-1.0) + f(1.0));
    for i in 1..n {
        trap += f(-1.0 + i as f64 * h);
    }
    trap *= h * 2.0 * PI;
    assert_relative_eq!(total, trap, max_relative = 1e-8);
}

#[test]
fn invariants_of_the_preset() {
    let mol = toy_molecule();
    let inv = invariants(mol.rayleigh(One)).unwrap();
    assert_relative_eq!(inv.anisotropy_invariant / 299_792_458.0, 1e-83, max_relative = 1e-12);
}
