//! Oracle comparisons run by `verify` mode, at least one per module.

use crate::config::{Duration, EvolveSpec, ScenarioConfig, StepSpec};
use crate::error::CliError;
use crate::run::{coefficient_options, coefficients, exponential_deviation, run_trajectory};
use chiral_decoherence::bath::{bose_integral, ThermalPhotonBath};
use chiral_decoherence::master_eq::{
    closed_form_b, elastic_decoherence_rate, prefactor, rate_coefficient_m, MOptions, Pipeline, ThetaAmplitudes,
};
use chiral_decoherence::polarizability::Channel;
use chiral_decoherence::presets::Molecule;
use chiral_decoherence::scattering::{
    circular_polarization, outer_product, polarization_factor, polarization_factor_theta, polarization_projector,
    Handedness, ScatteringGeometry, SinSquaredConvention,
};
use chiral_decoherence::tensor::{
    isotropic_average_rank4, mc_rotational_average_symmetrized, sample_uniform_rotation, McOptions, Tensor3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity (error, z-score, ...) compared with `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {} (value {:e}, tolerance {:e})", self.name, self.detail, self.value, self.tolerance)
    }
}

/// Real tensor with entries uniform in [−1, 1).
pub fn random_real_tensor(rng: &mut ChaCha8Rng) -> Tensor3 {
    let mut m = [[0.0; 3]; 3];
    for v in m.iter_mut().flatten() {
        *v = rng.random_range(-1.0..1.0);
    }
    Tensor3::real(m)
}

/// `n` tensor pairs drawn in order from one stream seeded with `seed`.
pub fn random_pairs(seed: u64, n: usize) -> Vec<(Tensor3, Tensor3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = random_real_tensor(&mut rng);
            (a, random_real_tensor(&mut rng))
        })
        .collect()
}

fn core(context: &str) -> impl Fn(chiral_decoherence::Error) -> CliError + '_ {
    move |e| CliError::from_core(context, e)
}

pub fn run_all(cfg: &ScenarioConfig, mol: &Molecule, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    tensor_checks(cfg, seed, &mut checks)?;
    bath_checks(&mut checks)?;
    scattering_checks(mol, seed, &mut checks)?;
    master_eq_checks(cfg, mol, &mut checks)?;
    null_checks(cfg, mol, &mut checks)?;
    Ok(checks)
}

fn tensor_checks(cfg: &ScenarioConfig, seed: u64, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let id = isotropic_average_rank4(&Tensor3::identity(), &Tensor3::identity()).map_err(core("average"))?;
    let err = (id.c[0] - 1.0).norm() + id.c[1].norm() + id.c[2].norm();
    checks.push(Check::new("tensor.identity_average", err, 1e-15, "(c1, c2, c3) of identity x identity is (1, 0, 0)"));
    let v = &cfg.verify;
    for (i, (a, b)) in random_pairs(seed, v.mc_pairs).iter().enumerate() {
        let exact = isotropic_average_rank4(a, b).map_err(core("average"))?;
        let opts = McOptions {
            n_samples: v.mc_samples,
            seed: seed.wrapping_add(i as u64 + 1),
            workers: v.mc_workers,
        };
        let est = mc_rotational_average_symmetrized(a, b, &opts).map_err(core("Monte-Carlo average"))?;
        checks.push(Check::new(
            format!("tensor.mc_average[{i}]"),
            est.max_z_score(&exact),
            3.0,
            format!("largest z-score of {} symmetrized samples against the exact average", v.mc_samples),
        ));
    }
    Ok(())
}

fn bath_checks(checks: &mut Vec<Check>) -> Result<(), CliError> {
    for n in 2..=8 {
        let b = bose_integral(n).map_err(core("Bose integral"))?;
        checks.push(Check::new(
            format!("bath.bose_integral[n={n}]"),
            b.relative_difference(),
            1e-10,
            format!("quadrature {:.15e} vs (n-1)! zeta(n) {:.15e}", b.quadrature, b.closed_form),
        ));
    }
    for (n, exact, label) in [(2, PI * PI / 6.0, "pi^2/6"), (4, PI.powi(4) / 15.0, "pi^4/15")] {
        let q = bose_integral(n).map_err(core("Bose integral"))?.quadrature;
        checks.push(Check::new(
            format!("bath.bose_integral[n={n}] = {label}"),
            (q - exact).abs() / exact,
            1e-10,
            format!("quadrature {q:.15e} vs {exact:.15e}"),
        ));
    }
    Ok(())
}

fn scattering_checks(mol: &Molecule, seed: u64, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0d1e);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = sample_uniform_rotation(&mut rng).apply([0.0, 0.0, 1.0]);
        for h in [Handedness::Left, Handedness::Right] {
            let lhs = outer_product(circular_polarization(k, h).map_err(core("polarization"))?);
            let rhs = polarization_projector(k, h);
            for (a, b) in lhs.iter().flatten().zip(rhs.iter().flatten()) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    checks.push(Check::new(
        "scattering.circular_identity",
        worst,
        1e-12,
        "n n* outer product against its closed form, 100 directions, both handedness values",
    ));

    // vector form against the θ form (explicit basis) on the forward hemisphere
    let cp = mol.rayleigh(Channel::One);
    let s = cp.contractions();
    let scale = s.anisotropic.abs() + s.isotropic.abs();
    let mut worst: f64 = 0.0;
    for i in 0..=90 {
        let theta = 0.5 * PI * i as f64 / 90.0;
        let incident = sample_uniform_rotation(&mut rng).apply([0.0, 0.0, 1.0]);
        let phi = rng.random_range(0.0..2.0 * PI);
        for h in [Handedness::Left, Handedness::Right] {
            let g = ScatteringGeometry::between(incident, theta, phi, h, h).map_err(core("geometry"))?;
            let v = polarization_factor(cp, &g).value;
            let t = polarization_factor_theta(s, theta, h, SinSquaredConvention::Explicit).value;
            worst = worst.max((v - t).abs() / scale);
        }
    }
    checks.push(Check::new(
        "scattering.vector_vs_angle_form",
        worst,
        1e-12,
        "A from polarization vectors vs A(theta), 91 angles, relative to |s_a| + |s_i|",
    ));
    Ok(())
}

fn master_eq_checks(cfg: &ScenarioConfig, mol: &Molecule, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let t = cfg.temperature.unwrap_or(1.0);
    let opts = coefficient_options(cfg, mol);

    // nested kernel quadrature against the composed pipeline
    let bath = ThermalPhotonBath::new(t).map_err(core("bath"))?;
    let quad = closed_form_b(&mol.channels, &mol.spectrum, t, Pipeline::Quadrature, &opts).map_err(core("B"))?;
    let amps = ThetaAmplitudes {
        channels: &mol.channels,
        handedness: opts.handedness,
        convention: opts.convention,
    };
    let p = prefactor(t).map_err(core("prefactor"))?;
    for nu in Channel::ALL {
        let m = rate_coefficient_m(&mol.spectrum, &bath, &amps, [nu; 4], &MOptions::default()).map_err(core("M"))?;
        let b = quad.get(nu, nu);
        let err = if b == 0.0 { (m / p).abs() } else { (m / p / b - 1.0).abs() };
        checks.push(Check::new(
            format!("master_eq.kernel_vs_pipeline[B{0}{0}]", nu.label()),
            err,
            1e-6,
            format!("M/P = {:e} vs quadrature B = {b:e}", m / p),
        ));
    }

    let fine_opts = chiral_decoherence::master_eq::CoefficientOptions {
        relative_tolerance: (opts.relative_tolerance * 1e-3).max(1e-14),
        ..opts
    };
    let fine = closed_form_b(&mol.channels, &mol.spectrum, t, Pipeline::Quadrature, &fine_opts).map_err(core("B"))?;
    let mut worst: f64 = 0.0;
    for (a, b) in quad.b.iter().flatten().zip(fine.b.iter().flatten()) {
        if *b != 0.0 {
            worst = worst.max((a / b - 1.0).abs());
        } else {
            worst = worst.max(a.abs());
        }
    }
    checks.push(Check::new(
        "master_eq.quadrature_resolutions",
        worst,
        1e-8,
        format!("B at tolerance {:e} vs {:e}", opts.relative_tolerance, fine_opts.relative_tolerance),
    ));

    let paper = coefficients(cfg, mol, t, Pipeline::Paper)?;
    let ratios: Vec<String> = paper
        .b
        .iter()
        .flatten()
        .zip(quad.b.iter().flatten())
        .zip(["B11", "B12", "B21", "B22"])
        .map(|((p, q), name)| {
            if *p == 0.0 {
                format!("{name} n/a")
            } else {
                format!("{name} {:.6}", q / p)
            }
        })
        .collect();
    checks.push(Check::new(
        "master_eq.dual_pipeline_report",
        0.0,
        0.0,
        format!("quadrature/paper ratios (reported, not asserted): {}", ratios.join(", ")),
    ));

    let gamma = |t: f64| -> Result<f64, CliError> {
        let c = coefficients(cfg, mol, t, Pipeline::Paper)?;
        Ok(elastic_decoherence_rate(c.b[0][0], c.b[1][1], t).map_err(core("rate"))?.gamma)
    };
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 2.0, 4.0] {
        let (g1, g2) = (gamma(t)?, gamma(2.0 * t)?);
        worst = worst.max(if g1 == 0.0 { f64::INFINITY } else { (g2 / g1 / 256.0 - 1.0).abs() });
    }
    checks.push(Check::new(
        "master_eq.t8_law",
        worst,
        1e-12,
        "gamma(2T)/gamma(T) against 256 for T in {0.5, 1, 2, 4} K",
    ));

    // exponential coherence decay without population transfer
    let mut decay_cfg = cfg.clone();
    decay_cfg.temperature = Some(t);
    decay_cfg.evolve = Some(EvolveSpec {
        duration: Duration::DecayTimes(5.0),
        step: StepSpec::Steps(1000),
        population_transfer: false,
        ..EvolveSpec::default()
    });
    let (c, traj) = run_trajectory(&decay_cfg, mol, Pipeline::Paper)?;
    let err = exponential_deviation(&traj, chiral_decoherence::master_eq::coherence_decay_rate(&c));
    checks.push(Check::new(
        "master_eq.exponential_decay",
        err,
        1e-6,
        "|rho12(t)| against |rho12(0)| exp(-Gamma t) over 5 decay times",
    ));
    let mut structure = Check::new(
        "master_eq.trajectory_structure",
        traj.max_trace_drift().max(traj.max_hermiticity_residual()),
        1e-12,
        format!("trace and Hermiticity drift; min eigenvalue {:e} (floor -1e-10)", traj.min_eigenvalue()),
    );
    structure.passed &= traj.min_eigenvalue() >= -1e-10;
    checks.push(structure);
    Ok(())
}

fn null_checks(cfg: &ScenarioConfig, mol: &Molecule, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let t = cfg.temperature.unwrap_or(1.0);
    let opts = coefficient_options(cfg, mol);
    let achiral = mol.channels.achiral();
    let mut worst: f64 = 0.0;
    for cp in achiral.iter() {
        for h in [Handedness::Left, Handedness::Right] {
            for i in 0..=36 {
                let g = ScatteringGeometry::from_angles(PI * i as f64 / 36.0, 0.3, h, h).map_err(core("geometry"))?;
                worst = worst.max(polarization_factor(cp, &g).value.abs());
            }
        }
    }
    for pipeline in [Pipeline::Paper, Pipeline::Quadrature] {
        let c = closed_form_b(&achiral, &mol.spectrum, t, pipeline, &opts).map_err(core("B"))?;
        for b in c.b.iter().flatten() {
            worst = worst.max(b.abs());
        }
        let g = elastic_decoherence_rate(c.b[0][0], c.b[1][1], t).map_err(core("rate"))?;
        worst = worst.max(g.gamma);
    }
    checks.push(Check::new("null.beta_zero", worst, 0.0, "beta = 0 gives A, B and gamma exactly 0"));

    let mirrored = mol.channels.mirrored();
    let mut flips = 0usize;
    let mut total = 0usize;
    for (cp, mp) in mol.channels.iter().zip(mirrored.iter()) {
        for h in [Handedness::Left, Handedness::Right] {
            for i in 0..=36 {
                let g = ScatteringGeometry::from_angles(PI * i as f64 / 36.0, 1.1, h, h).map_err(core("geometry"))?;
                total += 1;
                flips += usize::from(polarization_factor(mp, &g).value == -polarization_factor(cp, &g).value);
            }
        }
    }
    checks.push(Check::new(
        "symmetry.mirror_flips_a",
        (total - flips) as f64,
        0.0,
        format!("A changes sign exactly under beta -> -beta at {flips}/{total} geometries"),
    ));

    let c = closed_form_b(&mol.channels, &mol.spectrum, t, Pipeline::Paper, &opts).map_err(core("B"))?;
    let g = elastic_decoherence_rate(c.b[0][0], c.b[0][0], t).map_err(core("rate"))?;
    checks.push(Check::new("symmetry.equal_b", g.gamma, 0.0, "B11 = B22 gives gamma exactly 0"));
    Ok(())
}
