use super::coefficients::MasterEqCoefficients;
use super::density::{chiral_basis_transform, BasisDirection, DensityMatrix2, Matrix2};
use super::rates::coherence_decay_rate;
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest allowed dt·‖G‖.
pub const STABILITY_LIMIT: f64 = 0.1;

/// dρ/dt in the lab frame:
///
/// dρ₁₁ = P (ρ₂₂ − ρ₁₁) B₁₂, dρ₂₂ = P (ρ₁₁ − ρ₂₂) B₂₁,
/// dρ₁₂ = (iω₁₂ − Γ) ρ₁₂ with Γ = P (B₁₁ + B₁₂ + B₂₂ + B₂₁)/2, dρ₂₁ = dρ₁₂*.
///
/// The coherence rate sums both orderings of the channel pair so that a
/// Hermitian ρ has a Hermitian derivative even when B₁₁ ≠ B₂₂.
pub fn rhs(rho: &Matrix2, coeffs: &MasterEqCoefficients) -> Matrix2 {
    generator(rho, coeffs, coeffs.omega12)
}

fn generator(rho: &Matrix2, coeffs: &MasterEqCoefficients, omega: f64) -> Matrix2 {
    let p = coeffs.prefactor;
    let b = &coeffs.b;
    let d11 = p * (rho[1][1].re - rho[0][0].re) * b[0][1];
    let d22 = p * (rho[0][0].re - rho[1][1].re) * b[1][0];
    let gamma = coherence_decay_rate(coeffs);
    let d12 = Complex64::new(-gamma, omega) * rho[0][1];
    [
        [Complex64::new(d11, 0.0), d12],
        [d12.conj(), Complex64::new(d22, 0.0)],
    ]
}

/// ‖G‖ used by the stability guard: the fastest rate in the generator.
pub fn generator_norm(coeffs: &MasterEqCoefficients, frame: EvolutionFrame) -> f64 {
    let p = coeffs.prefactor;
    let population = p * (coeffs.b[0][1].abs() + coeffs.b[1][0].abs());
    let coherence = coherence_decay_rate(coeffs).abs();
    let rotation = match frame {
        EvolutionFrame::Lab => coeffs.omega12.abs(),
        EvolutionFrame::Rotating => 0.0,
    };
    population.max(coherence + rotation)
}

/// Integration frame. In the rotating frame the phase e^{iω₁₂t} of ρ₁₂ is
/// applied analytically and only the dissipative part is stepped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionFrame {
    #[default]
    Rotating,
    Lab,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    pub frame: EvolutionFrame,
    /// Record every n-th step (the final step is always recorded).
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub rho: DensityMatrix2,
    pub purity: f64,
    /// Populations of (|1⟩ ± |2⟩)/√2.
    pub chiral_populations: [f64; 2],
    pub min_eigenvalue: f64,
    pub trace_drift: f64,
    pub hermiticity_residual: f64,
}

impl TrajectoryPoint {
    fn new(t: f64, rho: DensityMatrix2, trace0: f64) -> Self {
        let chiral = chiral_basis_transform(&rho, BasisDirection::ToChiral);
        Self {
            t,
            rho,
            purity: rho.purity(),
            chiral_populations: chiral.populations(),
            min_eigenvalue: rho.min_eigenvalue(),
            trace_drift: (rho.trace() - trace0).abs(),
            hermiticity_residual: rho.hermiticity_residual(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub dt: f64,
    pub steps: usize,
    pub frame: EvolutionFrame,
}

impl Trajectory {
    pub fn max_trace_drift(&self) -> f64 {
        self.points.iter().map(|p| p.trace_drift).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_residual(&self) -> f64 {
        self.points.iter().map(|p| p.hermiticity_residual).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.points.iter().map(|p| p.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory holds the initial state")
    }
}

fn axpy(a: &Matrix2, s: f64, b: &Matrix2) -> Matrix2 {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j] * s;
        }
    }
    out
}

fn rk4_step(rho: &Matrix2, coeffs: &MasterEqCoefficients, omega: f64, dt: f64) -> Matrix2 {
    let k1 = generator(rho, coeffs, omega);
    let k2 = generator(&axpy(rho, 0.5 * dt, &k1), coeffs, omega);
    let k3 = generator(&axpy(rho, 0.5 * dt, &k2), coeffs, omega);
    let k4 = generator(&axpy(rho, dt, &k3), coeffs, omega);
    let mut out = *rho;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += (k1[i][j] + (k2[i][j] + k3[i][j]) * 2.0 + k4[i][j]) * (dt / 6.0);
        }
    }
    out
}

fn to_lab(rho: &Matrix2, omega: f64, t: f64) -> Matrix2 {
    if omega == 0.0 {
        return *rho;
    }
    let phase = Complex64::from_polar(1.0, omega * t);
    let c = rho[0][1] * phase;
    [[rho[0][0], c], [c.conj(), rho[1][1]]]
}

/// Classic fixed-step RK4 integration from ρ₀ to `t_final`.
///
/// The step is shortened so that an integer number of steps lands exactly
/// on `t_final`. Fails when dt·‖G‖ exceeds the stability limit, or when the
/// final state loses Hermiticity or positivity beyond 1e-12.
pub fn evolve(rho0: &DensityMatrix2, coeffs: &MasterEqCoefficients, opts: &EvolveOptions) -> Result<Trajectory> {
    if !(opts.t_final.is_finite() && opts.t_final >= 0.0) {
        return Err(invalid(format!("t_final must be finite and non-negative, got {}", opts.t_final)));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(invalid(format!("dt must be positive, got {}", opts.dt)));
    }
    let norm = generator_norm(coeffs, opts.frame);
    if opts.dt * norm > STABILITY_LIMIT {
        return Err(Error::StepSize {
            dt: opts.dt,
            max_dt: STABILITY_LIMIT / norm,
        });
    }
    let steps = (opts.t_final / opts.dt).ceil() as usize;
    let dt = if steps == 0 { opts.dt } else { opts.t_final / steps as f64 };
    let every = opts.record_every.max(1);
    let (omega_step, omega_phase) = match opts.frame {
        EvolutionFrame::Rotating => (0.0, coeffs.omega12),
        EvolutionFrame::Lab => (coeffs.omega12, 0.0),
    };

    let trace0 = rho0.trace();
    let mut state = *rho0.matrix();
    let mut points = vec![TrajectoryPoint::new(0.0, *rho0, trace0)];
    for n in 1..=steps {
        state = rk4_step(&state, coeffs, omega_step, dt);
        if n % every == 0 || n == steps {
            let t = n as f64 * dt;
            let rho = DensityMatrix2::from_matrix_unchecked(to_lab(&state, omega_phase, t));
            points.push(TrajectoryPoint::new(t, rho, trace0));
        }
    }
    let traj = Trajectory {
        points,
        dt,
        steps,
        frame: opts.frame,
    };
    let last = traj.last();
    if last.hermiticity_residual > 1e-12 || last.min_eigenvalue < -1e-12 || !last.purity.is_finite() {
        return Err(Error::NumericalFailure {
            what: "final density matrix lost Hermiticity or positivity".into(),
            estimate: last.min_eigenvalue,
            error: last.hermiticity_residual,
            evaluations: steps,
        });
    }
    Ok(traj)
}
