//! Second-rank tensors, rotations and rotational averaging of ⟨α_ij β_kl⟩.

use crate::error::{invalid, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

pub type Matrix3 = [[f64; 3]; 3];

/// Reference frame a tensor is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    MoleculeFixed,
    SpaceFixed,
}

/// Whether the entries are purely real, purely imaginary, or general.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reality {
    Real,
    Imaginary,
    Complex,
}

impl Reality {
    fn times(self, other: Reality) -> Reality {
        use Reality::*;
        match (self, other) {
            (Real, Real) | (Imaginary, Imaginary) => Real,
            (Real, Imaginary) | (Imaginary, Real) => Imaginary,
            _ => Complex,
        }
    }

    fn of_scalar(z: Complex64) -> Reality {
        if z.im == 0.0 {
            Reality::Real
        } else if z.re == 0.0 {
            Reality::Imaginary
        } else {
            Reality::Complex
        }
    }
}

/// A dense 3×3 tensor with complex entries.
///
/// Real-tagged tensors carry exactly zero imaginary parts and
/// imaginary-tagged tensors exactly zero real parts; constructors and
/// arithmetic maintain this.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    entries: [[Complex64; 3]; 3],
    frame: Frame,
    reality: Reality,
}

impl Tensor3 {
    pub fn real(m: Matrix3) -> Self {
        Self::from_parts(m, [[0.0; 3]; 3], Reality::Real)
    }

    /// A tensor i·m with the given real matrix as imaginary part.
    pub fn imaginary(m: Matrix3) -> Self {
        Self::from_parts([[0.0; 3]; 3], m, Reality::Imaginary)
    }

    pub fn complex(entries: [[Complex64; 3]; 3]) -> Self {
        let mut t = Self {
            entries,
            frame: Frame::MoleculeFixed,
            reality: Reality::Complex,
        };
        t.reality = t.detect_reality();
        t
    }

    fn from_parts(re: Matrix3, im: Matrix3, reality: Reality) -> Self {
        let mut entries = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                entries[i][j] = Complex64::new(re[i][j], im[i][j]);
            }
        }
        Self {
            entries,
            frame: Frame::MoleculeFixed,
            reality,
        }
    }

    pub fn zeros() -> Self {
        Self::real([[0.0; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diagonal([1.0, 1.0, 1.0])
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i][i] = d[i];
        }
        Self::real(m)
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn entries(&self) -> &[[Complex64; 3]; 3] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn real_part(&self) -> Matrix3 {
        self.entries.map(|row| row.map(|z| z.re))
    }

    pub fn imag_part(&self) -> Matrix3 {
        self.entries.map(|row| row.map(|z| z.im))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        for i in 0..3 {
            for j in 0..3 {
                t.entries[i][j] = self.entries[j][i];
            }
        }
        t
    }

    pub fn trace(&self) -> Complex64 {
        (0..3).map(|i| self.entries[i][i]).sum()
    }

    /// Σ a_ij b_ij.
    pub fn contract(&self, other: &Tensor3) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                s += self.entries[i][j] * other.entries[i][j];
            }
        }
        s
    }

    /// Σ a_ij b_ji.
    pub fn contract_transposed(&self, other: &Tensor3) -> Complex64 {
        self.contract(&other.transpose())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut t = *self;
        for row in t.entries.iter_mut() {
            for z in row.iter_mut() {
                *z *= factor;
            }
        }
        t.reality = self.reality.times(Reality::of_scalar(factor));
        t.clean();
        t
    }

    /// R T Rᵀ, tagged space-fixed.
    pub fn rotated(&self, r: &Rotation) -> Self {
        let m = &r.0;
        let mut left = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for b in 0..3 {
                left[i][b] = m[i][0] * self.entries[0][b] + m[i][1] * self.entries[1][b] + m[i][2] * self.entries[2][b];
            }
        }
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = left[i][0] * m[j][0] + left[i][1] * m[j][1] + left[i][2] * m[j][2];
            }
        }
        let mut t = Self {
            entries: out,
            frame: Frame::SpaceFixed,
            reality: self.reality,
        };
        t.clean();
        t
    }

    fn detect_reality(&self) -> Reality {
        let any_im = self.entries.iter().flatten().any(|z| z.im != 0.0);
        let any_re = self.entries.iter().flatten().any(|z| z.re != 0.0);
        match (any_re, any_im) {
            (_, false) => Reality::Real,
            (false, true) => Reality::Imaginary,
            (true, true) => Reality::Complex,
        }
    }

    // Zero the parts the tag says must vanish; rotation of a real tensor by a
    // real matrix cannot create imaginary parts, but scaling by -0.0 can
    // leave signed zeros.
    fn clean(&mut self) {
        match self.reality {
            Reality::Real => self.entries.iter_mut().flatten().for_each(|z| z.im = 0.0),
            Reality::Imaginary => self.entries.iter_mut().flatten().for_each(|z| z.re = 0.0),
            Reality::Complex => {}
        }
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: Tensor3) -> Tensor3 {
        let mut t = self;
        for i in 0..3 {
            for j in 0..3 {
                t.entries[i][j] += rhs.entries[i][j];
            }
        }
        t.reality = if self.reality == rhs.reality {
            self.reality
        } else {
            t.detect_reality()
        };
        t
    }
}

impl Sub for Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: Tensor3) -> Tensor3 {
        self + (-rhs)
    }
}

impl Neg for Tensor3 {
    type Output = Tensor3;
    fn neg(self) -> Tensor3 {
        let mut t = self;
        t.entries.iter_mut().flatten().for_each(|z| *z = -*z);
        t.clean();
        t
    }
}

impl Mul<f64> for Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: f64) -> Tensor3 {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// A proper rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rotation from a (not necessarily normalized) quaternion (w, x, y, z).
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("quaternion must be finite and non-zero"));
        }
        let [w, x, y, z] = q.map(|v| v / n);
        Ok(Rotation([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]))
    }

    /// Rotation by `angle` about a unit `axis`.
    pub fn about_axis(axis: [f64; 3], angle: f64) -> Result<Self> {
        let (s, c) = (0.5 * angle).sin_cos();
        Self::from_quaternion([c, s * axis[0], s * axis[1], s * axis[2]])
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.0
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry of |R Rᵀ − 1|.
    pub fn orthogonality_residual(&self) -> f64 {
        let m = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Draws a Haar-uniform rotation: a normalized quaternion of four standard
/// normals is uniform on S³, which double-covers SO(3) uniformly.
pub fn sample_uniform_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(r) = Rotation::from_quaternion(q) {
            return r;
        }
    }
}

/// Flat index of component (i, j, k, l) in an 81-element rank-4 array.
pub fn rank4_index(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Isotropic average ⟨α_ij β_kl⟩ = c1 δ_ij δ_kl + c2 δ_ik δ_jl + c3 δ_il δ_jk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rank4Average {
    pub c: [Complex64; 3],
}

impl Rank4Average {
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.c[0] * delta(i, j) * delta(k, l) + self.c[1] * delta(i, k) * delta(j, l) + self.c[2] * delta(i, l) * delta(j, k)
    }

    /// All 81 space-fixed components, indexed by [`rank4_index`].
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        out[rank4_index(i, j, k, l)] = self.component(i, j, k, l);
                    }
                }
            }
        }
        out
    }
}

const ISOTROPIC_MATRIX: [[f64; 3]; 3] = [[4.0, -1.0, -1.0], [-1.0, 4.0, -1.0], [-1.0, -1.0, 4.0]];

/// Exact orientation average of α_ij β_kl for molecule-fixed α, β.
///
/// With s1 = α_μμ β_λλ, s2 = α_μλ β_μλ, s3 = α_μλ β_λμ the coefficients are
/// (c1, c2, c3) = M (s1, s2, s3) / 30, M = [[4,−1,−1],[−1,4,−1],[−1,−1,4]].
pub fn isotropic_average_rank4(alpha: &Tensor3, beta: &Tensor3) -> Result<Rank4Average> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(invalid("tensor entries must be finite"));
    }
    if alpha.frame() != Frame::MoleculeFixed || beta.frame() != Frame::MoleculeFixed {
        return Err(invalid("isotropic averaging expects molecule-fixed tensors"));
    }
    let s = [
        alpha.trace() * beta.trace(),
        alpha.contract(beta),
        alpha.contract_transposed(beta),
    ];
    let mut c = [Complex64::new(0.0, 0.0); 3];
    for (row, out) in ISOTROPIC_MATRIX.iter().zip(c.iter_mut()) {
        *out = (row[0] * s[0] + row[1] * s[1] + row[2] * s[2]) / 30.0;
    }
    Ok(Rank4Average { c })
}

/// Sampling controls for the Monte-Carlo orientation average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Number of independent random streams; results depend on this, not
    /// on the number of threads.
    pub workers: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            seed: 0x5eed,
            workers: 8,
        }
    }
}

pub const MIN_MC_SAMPLES: usize = 10_000;

/// Monte-Carlo estimate of the 81 components with standard errors. The
/// standard error's real and imaginary parts refer to the real and imaginary
/// parts of the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationEstimate {
    pub mean: Vec<Complex64>,
    pub std_error: Vec<Complex64>,
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl OrientationEstimate {
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.mean[rank4_index(i, j, k, l)]
    }

    /// Largest |exact − mean| / σ over all components and both parts.
    /// Components with zero spread must match exactly.
    pub fn max_z_score(&self, exact: &Rank4Average) -> f64 {
        let reference = exact.reconstruct();
        let mut worst: f64 = 0.0;
        for ((m, s), e) in self.mean.iter().zip(&self.std_error).zip(&reference) {
            worst = worst.max(z_score(m.re, s.re, e.re)).max(z_score(m.im, s.im, e.im));
        }
        worst
    }

    /// Number of component parts deviating by more than `k` standard errors.
    pub fn count_outside(&self, exact: &Rank4Average, k: f64) -> usize {
        let reference = exact.reconstruct();
        let mut count = 0;
        for ((m, s), e) in self.mean.iter().zip(&self.std_error).zip(&reference) {
            count += usize::from(z_score(m.re, s.re, e.re) > k);
            count += usize::from(z_score(m.im, s.im, e.im) > k);
        }
        count
    }
}

fn z_score(mean: f64, se: f64, exact: f64) -> f64 {
    let diff = (mean - exact).abs();
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        diff / se
    }
}

/// Running mean / M2 accumulator (Welford), mergeable in a fixed order.
#[derive(Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            n: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / self.n;
            *s += d * (v - *m);
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.m2[i] += other.m2[i] + d * d * self.n * other.n / n;
            self.mean[i] += d * other.n / n;
        }
        self.n = n;
        self
    }

    fn std_error(&self) -> Vec<f64> {
        self.m2.iter().map(|m2| (m2 / (self.n - 1.0) / self.n).sqrt()).collect()
    }
}

fn run_streams<F>(opts: &McOptions, dim: usize, sample: F) -> Moments
where
    F: Fn(&Rotation, &mut [f64]) + Sync,
{
    let workers = opts.workers.max(1);
    let chunks: Vec<Moments> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let count = opts.n_samples / workers + usize::from(w < opts.n_samples % workers);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(w as u64);
            let mut acc = Moments::new(dim);
            let mut buf = vec![0.0; dim];
            for _ in 0..count {
                let r = sample_uniform_rotation(&mut rng);
                sample(&r, &mut buf);
                acc.push(&buf);
            }
            acc
        })
        .collect();
    chunks.iter().fold(Moments::new(dim), |acc, c| acc.merge(c))
}

fn check_mc_inputs(alpha: &Tensor3, beta: &Tensor3, opts: &McOptions) -> Result<()> {
    if opts.n_samples < MIN_MC_SAMPLES {
        return Err(invalid(format!(
            "n_samples = {} is below the minimum of {MIN_MC_SAMPLES}",
            opts.n_samples
        )));
    }
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(invalid("tensor entries must be finite"));
    }
    Ok(())
}

/// Component-wise mean of (R α Rᵀ)_ij (R β Rᵀ)_kl over Haar-random R.
pub fn mc_rotational_average(alpha: &Tensor3, beta: &Tensor3, opts: &McOptions) -> Result<OrientationEstimate> {
    check_mc_inputs(alpha, beta, opts)?;
    let moments = run_streams(opts, 162, |r, out| {
        let a = alpha.rotated(r);
        let b = beta.rotated(r);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let z = a.get(i, j) * b.get(k, l);
                        let idx = rank4_index(i, j, k, l);
                        out[2 * idx] = z.re;
                        out[2 * idx + 1] = z.im;
                    }
                }
            }
        }
    });
    let se = moments.std_error();
    let mean = (0..81).map(|i| Complex64::new(moments.mean[2 * i], moments.mean[2 * i + 1])).collect();
    let std_error = (0..81).map(|i| Complex64::new(se[2 * i], se[2 * i + 1])).collect();
    Ok(OrientationEstimate {
        mean,
        std_error,
        n_samples: opts.n_samples,
        seed: opts.seed,
        workers: opts.workers,
    })
}

// Which octahedral-orbit class a component (i, j, k, l) belongs to.
#[derive(Clone, Copy)]
enum OrbitClass {
    AllEqual,
    PairIJKL, // i = j ≠ k = l
    PairIKJL, // i = k ≠ j = l
    PairILJK, // i = l ≠ j = k
    Zero,
}

fn orbit_class(i: usize, j: usize, k: usize, l: usize) -> OrbitClass {
    if i == j && j == k && k == l {
        OrbitClass::AllEqual
    } else if i == j && k == l {
        OrbitClass::PairIJKL
    } else if i == k && j == l {
        OrbitClass::PairIKJL
    } else if i == l && j == k {
        OrbitClass::PairILJK
    } else {
        OrbitClass::Zero
    }
}

/// Monte-Carlo orientation average with each Haar draw R replaced by its
/// orbit {gR : g in the 24-element rotation group of the cube}.
///
/// Haar measure is invariant under left multiplication, so every gR is
/// itself Haar-distributed and the estimator stays unbiased. The orbit
/// average of A_ij B_kl has only four distinct non-zero values (all indices
/// equal, and the three pairings with two distinct indices); every other
/// component vanishes identically for each draw. Standard errors are those
/// of the per-draw orbit averages, which are independent.
pub fn mc_rotational_average_symmetrized(
    alpha: &Tensor3,
    beta: &Tensor3,
    opts: &McOptions,
) -> Result<OrientationEstimate> {
    check_mc_inputs(alpha, beta, opts)?;
    let moments = run_streams(opts, 8, |r, out| {
        let a = alpha.rotated(r);
        let b = beta.rotated(r);
        let mut v = [Complex64::new(0.0, 0.0); 4];
        for i in 0..3 {
            v[0] += a.get(i, i) * b.get(i, i);
            for j in 0..3 {
                if i != j {
                    v[1] += a.get(i, i) * b.get(j, j);
                    v[2] += a.get(i, j) * b.get(i, j);
                    v[3] += a.get(i, j) * b.get(j, i);
                }
            }
        }
        v[0] /= 3.0;
        for z in v.iter_mut().skip(1) {
            *z /= 6.0;
        }
        for (n, z) in v.iter().enumerate() {
            out[2 * n] = z.re;
            out[2 * n + 1] = z.im;
        }
    });
    let se = moments.std_error();
    let class_mean = |c: usize| Complex64::new(moments.mean[2 * c], moments.mean[2 * c + 1]);
    let class_se = |c: usize| Complex64::new(se[2 * c], se[2 * c + 1]);
    let mut mean = vec![Complex64::new(0.0, 0.0); 81];
    let mut std_error = vec![Complex64::new(0.0, 0.0); 81];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let slot = match orbit_class(i, j, k, l) {
                        OrbitClass::AllEqual => Some(0),
                        OrbitClass::PairIJKL => Some(1),
                        OrbitClass::PairIKJL => Some(2),
                        OrbitClass::PairILJK => Some(3),
                        OrbitClass::Zero => None,
                    };
                    if let Some(c) = slot {
                        let idx = rank4_index(i, j, k, l);
                        mean[idx] = class_mean(c);
                        std_error[idx] = class_se(c);
                    }
                }
            }
        }
    }
    Ok(OrientationEstimate {
        mean,
        std_error,
        n_samples: opts.n_samples,
        seed: opts.seed,
        workers: opts.workers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_pair_gives_trace_pairing_only() {
        let avg = isotropic_average_rank4(&Tensor3::identity(), &Tensor3::identity()).unwrap();
        assert_eq!(avg.c, [c(1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn zero_tensor_annihilates() {
        let avg = isotropic_average_rank4(&Tensor3::identity(), &Tensor3::zeros()).unwrap();
        assert_eq!(avg.c, [c(0.0); 3]);
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = [[0.0; 3]; 3];
        m[1][2] = f64::NAN;
        let err = isotropic_average_rank4(&Tensor3::real(m), &Tensor3::identity()).unwrap_err();
        assert!(matches!(err, crate::Error::InvalidInput(_)));
    }

    #[test]
    fn space_fixed_inputs_rejected() {
        let a = Tensor3::identity().with_frame(Frame::SpaceFixed);
        assert!(isotropic_average_rank4(&a, &Tensor3::identity()).is_err());
    }

    #[test]
    fn reality_tags_follow_arithmetic() {
        let a = Tensor3::diagonal([1.0, 2.0, 3.0]);
        let b = a.scale(Complex64::new(0.0, 2.0));
        assert_eq!(b.reality(), Reality::Imaginary);
        assert!(b.entries().iter().flatten().all(|z| z.re == 0.0));
        assert_eq!((b * -1.0).reality(), Reality::Imaginary);
        assert_eq!((a + b).reality(), Reality::Complex);
        assert_eq!((b + b).reality(), Reality::Imaginary);
    }

    #[test]
    fn quaternion_rotation_is_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let r = sample_uniform_rotation(&mut rng);
            assert!(r.orthogonality_residual() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            assert_eq!(sample_uniform_rotation(&mut a), sample_uniform_rotation(&mut b));
        }
    }

    #[test]
    fn haar_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut r11 = 0.0;
        let mut second = [[0.0; 3]; 3];
        for _ in 0..n {
            let r = sample_uniform_rotation(&mut rng);
            let m = r.matrix();
            r11 += m[0][0];
            for i in 0..3 {
                for k in 0..3 {
                    second[i][k] += m[i][0] * m[k][0];
                }
            }
        }
        let r11 = r11 / n as f64;
        assert!(r11.abs() <= 0.01, "<R11> = {r11}");
        for (i, row) in second.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let expect = if i == k { 1.0 / 3.0 } else { 0.0 };
                assert!((v / n as f64 - expect).abs() < 0.01);
            }
        }
    }

    #[test]
    fn rotation_about_axis() {
        let r = Rotation::about_axis([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2).unwrap();
        let v = r.apply([1.0, 0.0, 0.0]);
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-15);
        assert!(v[0].abs() < 1e-15);
    }

    #[test]
    fn mc_rejects_small_sample_counts() {
        let opts = McOptions {
            n_samples: 100,
            ..McOptions::default()
        };
        let err = mc_rotational_average(&Tensor3::identity(), &Tensor3::identity(), &opts).unwrap_err();
        assert!(matches!(err, crate::Error::InvalidInput(_)));
    }

    #[test]
    fn mc_identity_is_exact_up_to_roundoff() {
        let opts = McOptions {
            n_samples: 20_000,
            seed: 3,
            workers: 4,
        };
        let est = mc_rotational_average(&Tensor3::identity(), &Tensor3::identity(), &opts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let expect = delta(i, j) * delta(k, l);
                        let got = est.component(i, j, k, l);
                        let se = est.std_error[rank4_index(i, j, k, l)];
                        assert!((got.re - expect).abs() <= 3.0 * se.re + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn mc_matches_exact_for_traceless_diagonal() {
        let alpha = Tensor3::diagonal([1.0, -1.0, 0.0]);
        let beta = Tensor3::identity();
        let exact = isotropic_average_rank4(&alpha, &beta).unwrap();
        let opts = McOptions {
            n_samples: 200_000,
            seed: 99,
            workers: 4,
        };
        let est = mc_rotational_average(&alpha, &beta, &opts).unwrap();
        // trace pairings ⟨α_ii β_kk⟩
        for i in 0..3 {
            for k in 0..3 {
                let idx = rank4_index(i, i, k, k);
                let diff = (est.mean[idx] - exact.component(i, i, k, k)).re.abs();
                assert!(diff <= 3.0 * est.std_error[idx].re + 1e-12, "({i}{i}{k}{k}) off by {diff}");
            }
        }
    }

    #[test]
    fn mc_is_bit_reproducible() {
        let a = Tensor3::diagonal([1.0, 2.0, -0.5]);
        let b = Tensor3::real([[0.1, 0.4, 0.0], [0.2, -0.3, 0.5], [0.0, 0.7, 0.2]]);
        let opts = McOptions {
            n_samples: 10_000,
            seed: 5,
            workers: 3,
        };
        let x = mc_rotational_average(&a, &b, &opts).unwrap();
        let y = mc_rotational_average(&a, &b, &opts).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn standard_error_scales_with_inverse_root_n() {
        let a = Tensor3::diagonal([1.0, 2.0, -0.5]);
        let b = Tensor3::real([[0.1, 0.4, 0.0], [0.2, -0.3, 0.5], [0.0, 0.7, 0.2]]);
        let mk = |n| McOptions {
            n_samples: n,
            seed: 17,
            workers: 4,
        };
        let small = mc_rotational_average(&a, &b, &mk(40_000)).unwrap();
        let large = mc_rotational_average(&a, &b, &mk(80_000)).unwrap();
        let idx = rank4_index(0, 1, 0, 1);
        let ratio = large.std_error[idx].re / small.std_error[idx].re;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.03, "ratio {ratio}");
    }
}
