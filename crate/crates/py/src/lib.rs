use chiral_decoherence::bath;
use chiral_decoherence::master_eq::{
    closed_form_b, coherence_decay_rate, discrepancy_report, evolve, CoefficientOptions, DensityMatrix2,
    EvolutionFrame, EvolveOptions, MasterEqCoefficients, Pipeline,
};
use chiral_decoherence::polarizability::{invariants, Channel};
use chiral_decoherence::presets;
use chiral_decoherence::scattering::{polarization_factor_theta, Handedness, SinSquaredConvention};
use chiral_decoherence::tensor::{isotropic_average_rank4, Tensor3};
use chiral_decoherence::{master_eq, Error};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NumericalFailure { .. } | Error::Kinematics { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn pipeline(name: &str) -> PyResult<Pipeline> {
    match name {
        "paper" => Ok(Pipeline::Paper),
        "quadrature" => Ok(Pipeline::Quadrature),
        _ => Err(PyValueError::new_err(format!("pipeline must be 'paper' or 'quadrature', got {name:?}"))),
    }
}

fn handedness(name: &str) -> PyResult<Handedness> {
    match name {
        "left" => Ok(Handedness::Left),
        "right" => Ok(Handedness::Right),
        _ => Err(PyValueError::new_err(format!("handedness must be 'left' or 'right', got {name:?}"))),
    }
}

fn channel(label: u8) -> PyResult<Channel> {
    Channel::from_label(label).map_err(to_py)
}

/// Photon number density of blackbody radiation, m⁻³.
#[pyfunction]
fn photon_number_density(temperature: f64) -> PyResult<f64> {
    bath::photon_number_density(temperature).map_err(to_py)
}

/// Rate prefactor P(T), s⁻¹ per unit B.
#[pyfunction]
fn prefactor(temperature: f64) -> PyResult<f64> {
    master_eq::prefactor(temperature).map_err(to_py)
}

/// (closed form, quadrature) of ∫ x^(n-1)/(e^x - 1) dx.
#[pyfunction]
fn bose_integral(n: u32) -> PyResult<(f64, f64)> {
    let b = bath::bose_integral(n).map_err(to_py)?;
    Ok((b.closed_form, b.quadrature))
}

/// γ for given B₁₁, B₂₂ at temperature T.
#[pyfunction]
fn elastic_decoherence_rate(b11: f64, b22: f64, temperature: f64) -> PyResult<f64> {
    Ok(master_eq::elastic_decoherence_rate(b11, b22, temperature).map_err(to_py)?.gamma)
}

/// (c1, c2, c3) of the isotropic average of α_ij β_kl for real 3x3 inputs.
#[pyfunction]
fn isotropic_average(alpha: [[f64; 3]; 3], beta: [[f64; 3]; 3]) -> PyResult<[Complex64; 3]> {
    Ok(isotropic_average_rank4(&Tensor3::real(alpha), &Tensor3::real(beta)).map_err(to_py)?.c)
}

/// A(θ) from the two contractions s_a = Σ α_λμ Im β_λμ and s_i = tr α tr Im β.
#[pyfunction]
#[pyo3(signature = (anisotropic, isotropic, theta, handedness = "right", explicit_basis = false))]
fn polarization_factor(anisotropic: f64, isotropic: f64, theta: f64, handedness: &str, explicit_basis: bool) -> PyResult<f64> {
    let s = chiral_decoherence::polarizability::Contractions { anisotropic, isotropic };
    let conv = if explicit_basis {
        SinSquaredConvention::Explicit
    } else {
        SinSquaredConvention::Paper
    };
    Ok(polarization_factor_theta(s, theta, self::handedness(handedness)?, conv).value)
}

/// A two-channel chiral molecule.
#[pyclass(name = "Molecule", module = "chiral_decoherence")]
struct PyMolecule {
    inner: presets::Molecule,
}

impl PyMolecule {
    fn coeffs(&self, temperature: f64, pipeline_name: &str) -> PyResult<MasterEqCoefficients> {
        let opts = CoefficientOptions {
            handedness: self.inner.handedness,
            ..CoefficientOptions::default()
        };
        closed_form_b(&self.inner.channels, &self.inner.spectrum, temperature, pipeline(pipeline_name)?, &opts).map_err(to_py)
    }
}

#[pymethods]
impl PyMolecule {
    /// The bundled toy molecule.
    #[staticmethod]
    fn toy() -> Self {
        Self {
            inner: presets::toy_molecule(),
        }
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn handedness(&self) -> &'static str {
        match self.inner.handedness {
            Handedness::Left => "left",
            Handedness::Right => "right",
        }
    }

    #[setter(handedness)]
    fn set_handedness(&mut self, value: &str) -> PyResult<()> {
        self.inner.handedness = handedness(value)?;
        Ok(())
    }

    /// Probe wavenumber, m⁻¹.
    #[getter]
    fn wavenumber(&self) -> f64 {
        self.inner.wavenumber()
    }

    /// The other enantiomer.
    fn mirrored(&self) -> Self {
        let mut inner = self.inner.clone();
        inner.channels = inner.channels.mirrored();
        Self { inner }
    }

    /// (mean, anisotropy) invariants of the Rayleigh tensors of a channel.
    #[pyo3(signature = (channel = 1))]
    fn invariants(&self, channel: u8) -> PyResult<(f64, f64)> {
        let inv = invariants(self.inner.rayleigh(self::channel(channel)?)).map_err(to_py)?;
        Ok((inv.mean_invariant, inv.anisotropy_invariant))
    }

    /// B coefficients as [[B11, B12], [B21, B22]].
    #[pyo3(signature = (temperature, pipeline = "paper"))]
    fn coefficients(&self, temperature: f64, pipeline: &str) -> PyResult<[[f64; 2]; 2]> {
        Ok(self.coeffs(temperature, pipeline)?.b)
    }

    #[pyo3(signature = (temperature, pipeline = "paper"))]
    fn elastic_rate(&self, temperature: f64, pipeline: &str) -> PyResult<f64> {
        let c = self.coeffs(temperature, pipeline)?;
        Ok(master_eq::elastic_decoherence_rate(c.b[0][0], c.b[1][1], temperature).map_err(to_py)?.gamma)
    }

    /// [(name, paper, quadrature, ratio or None)] for the four coefficients.
    fn discrepancy(&self, temperature: f64) -> PyResult<Vec<(String, f64, f64, Option<f64>)>> {
        let opts = CoefficientOptions {
            handedness: self.inner.handedness,
            ..CoefficientOptions::default()
        };
        let p = self.coeffs(temperature, "paper")?;
        let q = self.coeffs(temperature, "quadrature")?;
        Ok(discrepancy_report(&p, &q, &opts)
            .entries
            .into_iter()
            .map(|e| (e.coefficient, e.paper, e.quadrature, e.ratio))
            .collect())
    }

    /// Rows (t, rho11, rho22, re_rho12, im_rho12, purity, chiral_L, chiral_R)
    /// starting from (|1> + |2>)/sqrt(2).
    #[pyo3(signature = (temperature, decay_times = 5.0, steps = 1000, population_transfer = true, pipeline = "paper", record_every = 10))]
    fn evolve(
        &self,
        temperature: f64,
        decay_times: f64,
        steps: usize,
        population_transfer: bool,
        pipeline: &str,
        record_every: usize,
    ) -> PyResult<Vec<(f64, f64, f64, f64, f64, f64, f64, f64)>> {
        let mut c = self.coeffs(temperature, pipeline)?;
        if !population_transfer {
            c = c.without_population_transfer();
        }
        let gamma = coherence_decay_rate(&c);
        if !(gamma > 0.0) || steps == 0 {
            return Err(PyValueError::new_err("need a positive coherence decay rate and at least one step"));
        }
        let t_final = decay_times / gamma;
        let opts = EvolveOptions {
            t_final,
            dt: t_final / steps as f64,
            frame: EvolutionFrame::Rotating,
            record_every,
        };
        let traj = evolve(&DensityMatrix2::plus(), &c, &opts).map_err(to_py)?;
        Ok(traj
            .points
            .iter()
            .map(|p| {
                let [p1, p2] = p.rho.populations();
                let r = p.rho.coherence();
                (p.t, p1, p2, r.re, r.im, p.purity, p.chiral_populations[0], p.chiral_populations[1])
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Molecule(name={:?}, handedness={:?})", self.inner.name, self.handedness())
    }
}

#[pymodule]
#[pyo3(name = "chiral_decoherence")]
fn chiral_decoherence_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CONSTANTS_VERSION", chiral_decoherence::constants::CONSTANTS_VERSION)?;
    m.add_function(wrap_pyfunction!(photon_number_density, m)?)?;
    m.add_function(wrap_pyfunction!(prefactor, m)?)?;
    m.add_function(wrap_pyfunction!(bose_integral, m)?)?;
    m.add_function(wrap_pyfunction!(elastic_decoherence_rate, m)?)?;
    m.add_function(wrap_pyfunction!(isotropic_average, m)?)?;
    m.add_function(wrap_pyfunction!(polarization_factor, m)?)?;
    m.add_class::<PyMolecule>()?;
    Ok(())
}
