//! Mode dispatch. Every mode produces its output files in memory first, so a
//! run is a pure function of (config, seed, pipeline choice).

use crate::config::{Duration, InitialState, Mode, PipelineChoice, ScenarioConfig, StepSpec, DEFAULT_OUTPUT_DIR};
use crate::error::CliError;
use crate::verify::{self, Check};
use chiral_decoherence::bath::photon_number_density;
use chiral_decoherence::constants::{CONSTANTS_VERSION, SPEED_OF_LIGHT};
use chiral_decoherence::master_eq::{
    closed_form_b, coherence_decay_rate, discrepancy_report, elastic_decoherence_rate, evolve,
    order_of_magnitude_estimate, CoefficientOptions, DensityMatrix2, DiscrepancyReport, EvolveOptions,
    MasterEqCoefficients, Pipeline, RegimeFlags, Trajectory,
};
use chiral_decoherence::polarizability::{invariants, Channel, InvariantSet};
use chiral_decoherence::presets::Molecule;
use chiral_decoherence::scattering::{polarization_factor_theta, total_cross_section, Handedness, Kinematics};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const OUT_ENV: &str = "CHIRAL_DECOHERENCE_OUT";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_VERSION: u32 = 1;

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub pipeline: Option<PipelineChoice>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mode: Mode,
    pub seed: u64,
    pub pipeline: PipelineChoice,
    pub out_dir: PathBuf,
}

/// Output directory precedence: flag, then environment, then config.
pub fn resolve(cfg: &ScenarioConfig, ov: &Overrides, env_out: Option<&str>) -> Result<Settings, CliError> {
    let mode = ov
        .mode
        .or(cfg.run.mode)
        .ok_or_else(|| CliError::Validation("no mode given: use a subcommand or set run.mode".into()))?;
    let issues = cfg.check_mode(mode);
    if !issues.is_empty() {
        return Err(crate::config::ConfigError::Schema(issues).into());
    }
    let out_dir = ov
        .out_dir
        .clone()
        .or_else(|| env_out.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.run.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    Ok(Settings {
        mode,
        seed: ov.seed.unwrap_or(cfg.run.seed),
        pipeline: ov.pipeline.unwrap_or(cfg.run.pipeline),
        out_dir,
    })
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct MoleculeSummary {
    pub name: String,
    pub handedness: Handedness,
    pub wavenumber: f64,
    pub omega12: f64,
    /// Rayleigh invariants of channels 1 and 2.
    pub invariants: [InvariantSet; 2],
    /// Channel-1 anisotropic invariant over c, C²V⁻²m⁴.
    pub anisotropy_over_c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineRate {
    pub pipeline: Pipeline,
    pub b: [[f64; 2]; 2],
    pub prefactor: f64,
    pub gamma_elastic: f64,
    pub opposite_sign_variant: Option<f64>,
    pub coherence_decay_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateResults {
    pub temperature: f64,
    pub photon_number_density: f64,
    pub regime: RegimeFlags,
    pub rates: Vec<PipelineRate>,
    pub order_of_magnitude_estimate: f64,
    /// Elastic total cross-sections of channels 1 and 2, m².
    pub total_cross_section: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSlope {
    pub pipeline: Pipeline,
    /// Least-squares slope of ln γ against ln T; absent when any γ is zero.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResults {
    pub temperatures: Vec<f64>,
    pub slopes: Vec<PipelineSlope>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineTrajectory {
    pub pipeline: Pipeline,
    pub file: String,
    pub b: [[f64; 2]; 2],
    pub coherence_decay_rate: f64,
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
    pub trace_preserving: bool,
    pub max_trace_drift: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub final_purity: f64,
    pub final_chiral_populations: [f64; 2],
    /// max over recorded points of ||ρ₁₂(t)| − |ρ₁₂(0)|e^{−Γt}| / (|ρ₁₂(0)|e^{−Γt}),
    /// when there is no population transfer.
    pub exponential_max_relative_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveResults {
    pub temperature: f64,
    pub population_transfer: bool,
    pub trajectories: Vec<PipelineTrajectory>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResults {
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Results {
    Rate(RateResults),
    Sweep(SweepResults),
    Evolve(EvolveResults),
    Verify(VerifyResults),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub report_version: u32,
    pub mode: Mode,
    pub config_sha256: String,
    pub seed: u64,
    pub constants_version: &'static str,
    pub pipeline: PipelineChoice,
    pub inputs: ScenarioConfig,
    pub molecule: MoleculeSummary,
    pub results: Results,
    pub discrepancy: Option<DiscrepancyReport>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    /// Every file of the run, report last.
    pub files: Vec<OutputFile>,
    /// Lines for standard output.
    pub lines: Vec<String>,
}

impl RunOutput {
    pub fn failed_checks(&self) -> usize {
        match &self.report.results {
            Results::Verify(v) => v.failed,
            _ => 0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        for f in &self.files {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        }
        Ok(())
    }
}

pub(crate) fn coefficient_options(cfg: &ScenarioConfig, mol: &Molecule) -> CoefficientOptions {
    CoefficientOptions {
        handedness: mol.handedness,
        convention: cfg.geometry.convention,
        relative_tolerance: cfg.run.quadrature_tolerance,
    }
}

pub(crate) fn coefficients(
    cfg: &ScenarioConfig,
    mol: &Molecule,
    temperature: f64,
    pipeline: Pipeline,
) -> Result<MasterEqCoefficients, CliError> {
    closed_form_b(&mol.channels, &mol.spectrum, temperature, pipeline, &coefficient_options(cfg, mol))
        .map_err(|e| CliError::from_core(&format!("{} B coefficients at T = {temperature} K", pipeline.name()), e))
}

fn summary(mol: &Molecule) -> Result<MoleculeSummary, CliError> {
    let inv = |c| invariants(mol.rayleigh(c)).map_err(|e| CliError::from_core("invariants", e));
    let one = inv(Channel::One)?;
    Ok(MoleculeSummary {
        name: mol.name.clone(),
        handedness: mol.handedness,
        wavenumber: mol.wavenumber(),
        omega12: mol.spectrum.omega12(),
        invariants: [one, inv(Channel::Two)?],
        anisotropy_over_c: one.anisotropy_invariant / SPEED_OF_LIGHT,
    })
}

/// Runs one scenario.
pub fn execute(cfg: &ScenarioConfig, settings: &Settings, config_sha256: &str) -> Result<RunOutput, CliError> {
    let mol = cfg.build_molecule().map_err(|e| CliError::from_core("building molecule", e))?;
    let molecule = summary(&mol)?;
    let mut warnings = Vec::new();
    let mut files = Vec::new();
    let mut lines = Vec::new();
    let mut discrepancy = None;
    let pipelines = settings.pipeline.pipelines();

    let results = match settings.mode {
        Mode::Rate => {
            let t = cfg.temperature.expect("checked by resolve");
            let (r, d) = rate(cfg, &mol, t, &pipelines, &mut warnings, &mut files)?;
            discrepancy = d;
            for p in &r.rates {
                lines.push(format!("{} gamma_elastic = {:e} s^-1", p.pipeline.name(), p.gamma_elastic));
            }
            Results::Rate(r)
        }
        Mode::Sweep => {
            let r = sweep(cfg, &mol, &pipelines, &mut warnings, &mut files)?;
            for s in &r.slopes {
                match s.slope {
                    Some(v) => lines.push(format!("{} log-log slope = {v:.9}", s.pipeline.name())),
                    None => lines.push(format!("{} log-log slope undefined", s.pipeline.name())),
                }
            }
            Results::Sweep(r)
        }
        Mode::Evolve => {
            let r = evolve_mode(cfg, &mol, &pipelines, &mut warnings, &mut files)?;
            for p in &r.trajectories {
                lines.push(format!(
                    "{} final purity {:.12}, chiral populations ({:.12}, {:.12})",
                    p.pipeline.name(),
                    p.final_purity,
                    p.final_chiral_populations[0],
                    p.final_chiral_populations[1]
                ));
            }
            Results::Evolve(r)
        }
        Mode::Verify => {
            let checks = verify::run_all(cfg, &mol, settings.seed)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            lines.extend(checks.iter().map(Check::line));
            Results::Verify(VerifyResults {
                passed: checks.len() - failed,
                failed,
                checks,
            })
        }
    };
    for w in &warnings {
        lines.push(format!("warning: {w}"));
    }

    let mut names: Vec<String> = files.iter().map(|f: &OutputFile| f.name.clone()).collect();
    names.push(REPORT_FILE.to_string());
    let report = RunReport {
        report_version: REPORT_VERSION,
        mode: settings.mode,
        config_sha256: config_sha256.to_string(),
        seed: settings.seed,
        constants_version: CONSTANTS_VERSION,
        pipeline: settings.pipeline,
        inputs: cfg.clone(),
        molecule,
        results,
        discrepancy,
        warnings,
        files: names,
    };
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Numerical(format!("serializing report: {e}")))?;
    json.push('\n');
    files.push(OutputFile {
        name: REPORT_FILE.into(),
        contents: json,
    });
    Ok(RunOutput { report, files, lines })
}

fn pipeline_rate(c: &MasterEqCoefficients, warnings: &mut Vec<String>) -> Result<PipelineRate, CliError> {
    let r = elastic_decoherence_rate(c.b[0][0], c.b[1][1], c.temperature)
        .map_err(|e| CliError::from_core("elastic rate", e))?;
    if let Some(w) = &r.warning {
        warnings.push(format!("{} pipeline: {w}", c.pipeline.name()));
    }
    Ok(PipelineRate {
        pipeline: c.pipeline,
        b: c.b,
        prefactor: c.prefactor,
        gamma_elastic: r.gamma,
        opposite_sign_variant: r.opposite_sign_variant,
        coherence_decay_rate: coherence_decay_rate(c),
    })
}

fn rate(
    cfg: &ScenarioConfig,
    mol: &Molecule,
    t: f64,
    pipelines: &[Pipeline],
    warnings: &mut Vec<String>,
    files: &mut Vec<OutputFile>,
) -> Result<(RateResults, Option<DiscrepancyReport>), CliError> {
    let regime = mol.spectrum.regime(t);
    if !regime.holds {
        warnings.push(format!(
            "low-temperature regime does not hold at T = {t} K (V0/hw0 = {:.3}, hw0/kT = {:.3})",
            regime.well_over_vibration, regime.vibration_over_thermal
        ));
    }
    let mut coeffs = Vec::new();
    let mut rates = Vec::new();
    for &p in pipelines {
        let c = coefficients(cfg, mol, t, p)?;
        rates.push(pipeline_rate(&c, warnings)?);
        coeffs.push(c);
    }
    let discrepancy = (coeffs.len() == 2).then(|| discrepancy_report(&coeffs[0], &coeffs[1], &coefficient_options(cfg, mol)));

    let kin = Kinematics::elastic(mol.wavenumber()).map_err(|e| CliError::from_core("kinematics", e))?;
    let sigma = |c| {
        total_cross_section(mol.rayleigh(c), &kin, mol.handedness).map_err(|e| CliError::from_core("cross-section", e))
    };
    let anisotropy = invariants(mol.rayleigh(Channel::One)).map_err(|e| CliError::from_core("invariants", e))?;
    let results = RateResults {
        temperature: t,
        photon_number_density: photon_number_density(t).map_err(|e| CliError::from_core("photon density", e))?,
        regime,
        rates,
        order_of_magnitude_estimate: order_of_magnitude_estimate(anisotropy.anisotropy_invariant / SPEED_OF_LIGHT, t)
            .map_err(|e| CliError::from_core("estimate", e))?,
        total_cross_section: [sigma(Channel::One)?, sigma(Channel::Two)?],
    };

    let n = cfg.geometry.theta_points;
    if n >= 2 {
        let mut csv = String::from("theta_rad,A_11,A_12,A_21,A_22\n");
        for i in 0..n {
            let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
            let _ = write!(csv, "{theta:e}");
            for (a, b) in [(Channel::One, Channel::One), (Channel::One, Channel::Two), (Channel::Two, Channel::One), (Channel::Two, Channel::Two)] {
                let s = mol.channels.get(a, b).contractions();
                let v = polarization_factor_theta(s, theta, mol.handedness, cfg.geometry.convention).value;
                let _ = write!(csv, ",{v:e}");
            }
            csv.push('\n');
        }
        files.push(OutputFile {
            name: "angular.csv".into(),
            contents: csv,
        });
    }
    Ok((results, discrepancy))
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

fn sweep(
    cfg: &ScenarioConfig,
    mol: &Molecule,
    pipelines: &[Pipeline],
    warnings: &mut Vec<String>,
    files: &mut Vec<OutputFile>,
) -> Result<SweepResults, CliError> {
    let temps = &cfg.sweep.as_ref().expect("checked by resolve").temperatures;
    // one independent scenario per temperature; collect keeps the grid order
    let rows: Vec<Result<(f64, Vec<f64>, Vec<String>), CliError>> = temps
        .par_iter()
        .map(|&t| {
            let mut w = Vec::new();
            let mut gammas = Vec::new();
            for &p in pipelines {
                let c = coefficients(cfg, mol, t, p)?;
                gammas.push(pipeline_rate(&c, &mut w)?.gamma_elastic);
            }
            let n = photon_number_density(t).map_err(|e| CliError::from_core("photon density", e))?;
            Ok((n, gammas, w))
        })
        .collect();

    let mut header = String::from("temperature_K,photon_density_m3");
    for p in pipelines {
        let _ = write!(header, ",gamma_{}_s", p.name());
    }
    let mut csv = header + "\n";
    let mut per_pipeline = vec![Vec::with_capacity(temps.len()); pipelines.len()];
    for (t, row) in temps.iter().zip(rows) {
        let (n, gammas, w) = row?;
        for msg in w {
            if !warnings.contains(&msg) {
                warnings.push(msg);
            }
        }
        let _ = write!(csv, "{t:e},{n:e}");
        for (i, g) in gammas.iter().enumerate() {
            let _ = write!(csv, ",{g:e}");
            per_pipeline[i].push(*g);
        }
        csv.push('\n');
    }
    files.push(OutputFile {
        name: "sweep.csv".into(),
        contents: csv,
    });
    let slopes = pipelines
        .iter()
        .zip(&per_pipeline)
        .map(|(&pipeline, g)| {
            let slope = log_log_slope(temps, g);
            if slope.is_none() {
                warnings.push(format!("{} pipeline: gamma vanishes on the grid, no slope fitted", pipeline.name()));
            }
            PipelineSlope { pipeline, slope }
        })
        .collect();
    Ok(SweepResults {
        temperatures: temps.clone(),
        slopes,
    })
}

pub(crate) fn initial_density(s: InitialState) -> DensityMatrix2 {
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let (c1, c2) = match s {
        InitialState::One => (one, zero),
        InitialState::Two => (zero, one),
        InitialState::Plus | InitialState::Left => (one, one),
        InitialState::Minus | InitialState::Right => (one, -one),
    };
    DensityMatrix2::pure(c1, c2).expect("fixed states are normalizable")
}

/// |ρ₁₂| against |ρ₁₂(0)| e^{−Γt}; the largest relative deviation.
pub fn exponential_deviation(traj: &Trajectory, gamma: f64) -> f64 {
    let c0 = traj.points[0].rho.coherence().norm();
    traj.points
        .iter()
        .map(|p| {
            let expect = c0 * (-gamma * p.t).exp();
            (p.rho.coherence().norm() - expect).abs() / expect
        })
        .fold(0.0, f64::max)
}

pub(crate) fn run_trajectory(
    cfg: &ScenarioConfig,
    mol: &Molecule,
    pipeline: Pipeline,
) -> Result<(MasterEqCoefficients, Trajectory), CliError> {
    let spec = cfg.evolve.clone().unwrap_or_default();
    let t = cfg.temperature.expect("checked by resolve");
    let mut c = coefficients(cfg, mol, t, pipeline)?;
    if !spec.population_transfer {
        c = c.without_population_transfer();
    }
    let gamma = coherence_decay_rate(&c);
    let t_final = match spec.duration {
        Duration::Seconds(s) => s,
        Duration::DecayTimes(n) => {
            if !(gamma > 0.0) {
                return Err(CliError::Validation(format!(
                    "evolve.decay_times needs a positive coherence decay rate, the {} pipeline gives {gamma:e} s^-1",
                    pipeline.name()
                )));
            }
            n / gamma
        }
    };
    let dt = match spec.step {
        StepSpec::Dt(dt) => dt,
        StepSpec::Steps(n) => t_final / n as f64,
    };
    let opts = EvolveOptions {
        t_final,
        dt,
        frame: spec.frame,
        record_every: spec.record_every,
    };
    let traj = evolve(&initial_density(spec.initial_state), &c, &opts)
        .map_err(|e| CliError::from_core(&format!("{} trajectory", pipeline.name()), e))?;
    Ok((c, traj))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut csv = String::from("t,rho11,rho22,re_rho12,im_rho12,purity,chiral_L,chiral_R\n");
    for p in &traj.points {
        let [p1, p2] = p.rho.populations();
        let c = p.rho.coherence();
        let _ = writeln!(
            csv,
            "{:e},{p1:e},{p2:e},{:e},{:e},{:e},{:e},{:e}",
            p.t, c.re, c.im, p.purity, p.chiral_populations[0], p.chiral_populations[1]
        );
    }
    csv
}

fn evolve_mode(
    cfg: &ScenarioConfig,
    mol: &Molecule,
    pipelines: &[Pipeline],
    warnings: &mut Vec<String>,
    files: &mut Vec<OutputFile>,
) -> Result<EvolveResults, CliError> {
    let spec = cfg.evolve.clone().unwrap_or_default();
    let mut trajectories = Vec::new();
    for &p in pipelines {
        let (c, traj) = run_trajectory(cfg, mol, p)?;
        let trace_preserving = c.b[0][1] == c.b[1][0];
        if !trace_preserving {
            warnings.push(format!(
                "{} pipeline: B12 = {:e} differs from B21 = {:e}, so the trace is not conserved; drift is reported",
                p.name(),
                c.b[0][1],
                c.b[1][0]
            ));
        }
        let gamma = coherence_decay_rate(&c);
        let no_transfer = c.b[0][1] == 0.0 && c.b[1][0] == 0.0;
        let file = format!("trajectory_{}.csv", p.name());
        files.push(OutputFile {
            name: file.clone(),
            contents: trajectory_csv(&traj),
        });
        let last = traj.last();
        trajectories.push(PipelineTrajectory {
            pipeline: p,
            file,
            b: c.b,
            coherence_decay_rate: gamma,
            t_final: last.t,
            dt: traj.dt,
            steps: traj.steps,
            trace_preserving,
            max_trace_drift: traj.max_trace_drift(),
            max_hermiticity_residual: traj.max_hermiticity_residual(),
            min_eigenvalue: traj.min_eigenvalue(),
            final_purity: last.purity,
            final_chiral_populations: last.chiral_populations,
            exponential_max_relative_error: no_transfer.then(|| exponential_deviation(&traj, gamma)),
        });
    }
    Ok(EvolveResults {
        temperature: cfg.temperature.expect("checked by resolve"),
        population_transfer: spec.population_transfer,
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powi(8)).collect();
        assert!((log_log_slope(&x, &y).unwrap() - 8.0).abs() < 1e-12);
        assert!(log_log_slope(&x, &vec![0.0; 10]).is_none());
    }

    #[test]
    fn output_precedence() {
        let mut cfg = ScenarioConfig::toy(Mode::Rate);
        cfg.run.output_dir = Some("from_config".into());
        let flag = Overrides {
            out_dir: Some("from_flag".into()),
            ..Overrides::default()
        };
        assert_eq!(resolve(&cfg, &flag, Some("from_env")).unwrap().out_dir, PathBuf::from("from_flag"));
        let none = Overrides::default();
        assert_eq!(resolve(&cfg, &none, Some("from_env")).unwrap().out_dir, PathBuf::from("from_env"));
        assert_eq!(resolve(&cfg, &none, None).unwrap().out_dir, PathBuf::from("from_config"));
        cfg.run.output_dir = None;
        assert_eq!(resolve(&cfg, &none, None).unwrap().out_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
    }

    #[test]
    fn hash_is_hex_sha256() {
        let h = config_hash("");
        assert_eq!(h, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn chiral_initial_states() {
        let l = initial_density(InitialState::Left);
        assert!((l.coherence().re - 0.5).abs() < 1e-15);
        let r = initial_density(InitialState::Right);
        assert!((r.coherence().re + 0.5).abs() < 1e-15);
    }
}
