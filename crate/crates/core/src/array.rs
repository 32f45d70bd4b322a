//! Uniform linear array model: steering vectors, source and noise
//! realizations, and covariance matrices.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use kai_linalg::{cholesky_hermitian, hermitian_eigenvalues, CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};

/// A ULA of `M` sensors with spacing `d`, both lengths in the same unit as
/// the carrier wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    sensor_count: usize,
    spacing: f64,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(sensor_count: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        if sensor_count < 2 {
            return Err(CoreError::Geometry(format!(
                "need at least 2 sensors, got {sensor_count}"
            )));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(CoreError::Geometry(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if !(spacing > 0.0 && spacing <= wavelength / 2.0) {
            return Err(CoreError::Geometry(format!(
                "spacing {spacing} must lie in (0, {}]",
                wavelength / 2.0
            )));
        }
        Ok(Self {
            sensor_count,
            spacing,
            wavelength,
        })
    }

    /// Half-wavelength spacing with unit wavelength.
    pub fn half_wavelength(sensor_count: usize) -> Result<Self> {
        Self::new(sensor_count, 0.5, 1.0)
    }

    pub fn sensor_count(&self) -> usize {
        self.sensor_count
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Inter-element phase `2π(d/λ)sinθ` for an angle in degrees.
    pub fn spatial_frequency(&self, theta_deg: f64) -> f64 {
        2.0 * PI * (self.spacing / self.wavelength) * theta_deg.to_radians().sin()
    }

    /// Inverse of [`spatial_frequency`](Self::spatial_frequency), in degrees.
    pub fn angle_from_frequency(&self, gamma: f64) -> Result<f64> {
        let argument = gamma * self.wavelength / (2.0 * PI * self.spacing);
        if !(argument.abs() < 1.0) {
            return Err(CoreError::Aliasing { gamma, argument });
        }
        Ok(argument.asin().to_degrees())
    }
}

/// Ground truth for one experiment: `P` source directions, their
/// correlation, SNR and snapshot count.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceScenario {
    doas: Vec<f64>,
    correlation: CMatrix,
    snr_db: f64,
    snapshots: usize,
}

impl SourceScenario {
    /// `snr_db = +∞` selects the noiseless model.
    pub fn new(doas: Vec<f64>, correlation: CMatrix, snr_db: f64, snapshots: usize) -> Result<Self> {
        let p = doas.len();
        if p == 0 {
            return Err(CoreError::Scenario("at least one source is required".into()));
        }
        if let Some(&bad) = doas.iter().find(|t| !(t.abs() < 90.0)) {
            return Err(CoreError::AngleOutOfRange(bad));
        }
        if doas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::Scenario(format!(
                "directions must be strictly ascending, got {doas:?}"
            )));
        }
        if correlation.rows() != p || correlation.cols() != p {
            return Err(CoreError::Scenario(format!(
                "correlation must be {p}x{p}, got {}x{}",
                correlation.rows(),
                correlation.cols()
            )));
        }
        if !correlation.is_hermitian(1e-10) {
            return Err(CoreError::Scenario("correlation matrix is not Hermitian".into()));
        }
        if let Some(k) = (0..p).find(|&k| (correlation[(k, k)] - C64::new(1.0, 0.0)).norm() > 1e-12) {
            return Err(CoreError::Scenario(format!(
                "correlation diagonal must be 1, entry {k} is {}",
                correlation[(k, k)]
            )));
        }
        let smallest = hermitian_eigenvalues(&correlation)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if smallest < -1e-10 {
            return Err(CoreError::Scenario(format!(
                "correlation matrix is indefinite (eigenvalue {smallest:e})"
            )));
        }
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(CoreError::Scenario(format!("invalid SNR {snr_db}")));
        }
        if snapshots == 0 {
            return Err(CoreError::Scenario("snapshot count must be positive".into()));
        }
        Ok(Self {
            doas,
            correlation,
            snr_db,
            snapshots,
        })
    }

    /// Equal-power uncorrelated sources.
    pub fn uncorrelated(doas: Vec<f64>, snr_db: f64, snapshots: usize) -> Result<Self> {
        let p = doas.len();
        Self::new(doas, CMatrix::identity(p), snr_db, snapshots)
    }

    /// The same sources at another SNR.
    pub fn with_snr(&self, snr_db: f64) -> Result<Self> {
        Self::new(self.doas.clone(), self.correlation.clone(), snr_db, self.snapshots)
    }

    pub fn doas(&self) -> &[f64] {
        &self.doas
    }

    pub fn source_count(&self) -> usize {
        self.doas.len()
    }

    pub fn correlation(&self) -> &CMatrix {
        &self.correlation
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    /// Source power, fixed at one.
    pub fn signal_power(&self) -> f64 {
        1.0
    }

    /// `σ_n² = σ_s² · 10^(−SNR/10)`.
    pub fn noise_variance(&self) -> f64 {
        if self.is_noiseless() {
            0.0
        } else {
            self.signal_power() * 10f64.powf(-self.snr_db / 10.0)
        }
    }

    fn check_fits(&self, geom: &ArrayGeometry) -> Result<()> {
        if self.source_count() >= geom.sensor_count() {
            return Err(CoreError::Scenario(format!(
                "{} sources need more than {} sensors",
                self.source_count(),
                geom.sensor_count()
            )));
        }
        Ok(())
    }
}

/// Nominal entries of the strongly correlated four-source scenario. As
/// given, this matrix has a negative eigenvalue (about −0.04), so it is not
/// a valid covariance; see [`strongly_correlated_sources`].
pub fn strongly_correlated_nominal() -> CMatrix {
    CMatrix::from_real_rows(&[
        vec![1.0, 0.9, 0.6, 0.0],
        vec![0.9, 1.0, 0.4, 0.5],
        vec![0.6, 0.4, 1.0, 0.0],
        vec![0.0, 0.5, 0.0, 1.0],
    ])
    .expect("rows are square")
}

/// Smallest eigenvalue kept when repairing the nominal correlation matrix.
pub const CORRELATION_EIGEN_FLOOR: f64 = 0.01;

/// The correlation matrix closest to [`strongly_correlated_nominal`] in
/// Frobenius norm with unit diagonal and eigenvalues at least
/// [`CORRELATION_EIGEN_FLOOR`].
pub fn strongly_correlated_sources() -> CMatrix {
    nearest_correlation(&strongly_correlated_nominal(), CORRELATION_EIGEN_FLOOR)
        .expect("the nominal matrix is a small Hermitian matrix")
}

/// Nearest correlation matrix with eigenvalues at least `floor`, by
/// alternating projections with Dykstra's correction.
pub fn nearest_correlation(a: &CMatrix, floor: f64) -> Result<CMatrix> {
    const MAX_ITERATIONS: usize = 20_000;
    let n = a.rows();
    let mut y = a.hermitian_part();
    let mut correction = CMatrix::zeros(n, n);
    for _ in 0..MAX_ITERATIONS {
        let r = &y - &correction;
        let eig = kai_linalg::hermitian_evd(&r)?;
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(floor)).collect();
        let v = &eig.eigenvectors;
        let x = v
            .matmul(&CMatrix::from_real_diag(&clipped))?
            .matmul(&v.adjoint())?
            .hermitian_part();
        correction = &x - &r;
        let mut next = x;
        for i in 0..n {
            next[(i, i)] = C64::new(1.0, 0.0);
        }
        let change = (&next - &y).frobenius_norm();
        y = next;
        if change < 1e-15 {
            break;
        }
    }
    Ok(y)
}

fn steering_column(geom: &ArrayGeometry, theta_deg: f64) -> Vec<C64> {
    let gamma = geom.spatial_frequency(theta_deg);
    (0..geom.sensor_count())
        .map(|m| C64::from_polar(1.0, m as f64 * gamma))
        .collect()
}

/// Steering vector without the angle check, for spectral scans that touch ±90°.
pub(crate) fn steering_unchecked(geom: &ArrayGeometry, theta_deg: f64) -> Vec<C64> {
    steering_column(geom, theta_deg)
}

/// `a(θ)` with entries `exp(j·2π·m·(d/λ)·sinθ)`, `m = 0..M−1`.
pub fn steering_vector(geom: &ArrayGeometry, theta_deg: f64) -> Result<CMatrix> {
    if !(theta_deg.abs() < 90.0) {
        return Err(CoreError::AngleOutOfRange(theta_deg));
    }
    Ok(CMatrix::column_vector(&steering_column(geom, theta_deg)))
}

/// Vandermonde matrix `[a(θ₁), …, a(θ_P)]` with columns in the given order.
pub fn manifold(geom: &ArrayGeometry, doas: &[f64]) -> Result<CMatrix> {
    if doas.len() >= geom.sensor_count() {
        return Err(CoreError::Scenario(format!(
            "{} directions need more than {} sensors",
            doas.len(),
            geom.sensor_count()
        )));
    }
    if let Some(&bad) = doas.iter().find(|t| !(t.abs() < 90.0)) {
        return Err(CoreError::AngleOutOfRange(bad));
    }
    let m = geom.sensor_count();
    let cols: Vec<Vec<C64>> = doas.iter().map(|&t| steering_column(geom, t)).collect();
    Ok(CMatrix::from_fn(m, doas.len(), |i, j| cols[j][i]))
}

/// Identifies one independent random stream: a base seed and a trial index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialSeed {
    pub base: u64,
    pub trial: u64,
}

impl TrialSeed {
    pub fn new(base: u64, trial: u64) -> Self {
        Self { base, trial }
    }

    /// ChaCha8 keyed by `base`, on stream `trial`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.trial);
        rng
    }
}

impl From<u64> for TrialSeed {
    fn from(base: u64) -> Self {
        Self::new(base, 0)
    }
}

/// `N` array output vectors and the source waveforms that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    /// `M x N` array outputs.
    pub data: CMatrix,
    /// `P x N` source waveforms.
    pub sources: CMatrix,
    pub seed: TrialSeed,
}

impl SnapshotSet {
    pub fn sample_covariance(&self) -> CMatrix {
        sample_covariance(&self.data)
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draws `x(i) = A·s(i) + n(i)` for `i = 1..N`.
///
/// The source draws come first from the stream, so the waveforms of a given
/// seed do not depend on the SNR.
pub fn generate_snapshots(
    geom: &ArrayGeometry,
    scenario: &SourceScenario,
    seed: impl Into<TrialSeed>,
) -> Result<SnapshotSet> {
    scenario.check_fits(geom)?;
    let seed = seed.into();
    let mut rng = seed.rng();
    let m = geom.sensor_count();
    let p = scenario.source_count();
    let n = scenario.snapshots();

    let chol = cholesky_hermitian(scenario.correlation())?;
    let white = CMatrix::from_fn(p, n, |_, _| complex_gaussian(&mut rng));
    let sources = chol.matmul(&white)?.scale_real(scenario.signal_power().sqrt());
    let noise = CMatrix::from_fn(m, n, |_, _| complex_gaussian(&mut rng));

    let a = manifold(geom, scenario.doas())?;
    let mut data = a.matmul(&sources)?;
    let sigma = scenario.noise_variance().sqrt();
    if sigma > 0.0 {
        data = &data + &noise.scale_real(sigma);
    }
    Ok(SnapshotSet {
        data,
        sources,
        seed,
    })
}

/// `(1/N)·X·Xᴴ`, exactly Hermitian.
pub fn sample_covariance(x: &CMatrix) -> CMatrix {
    let m = x.rows();
    let n = x.cols().max(1);
    let scale = 1.0 / n as f64;
    let mut r = CMatrix::zeros(m, m);
    for i in 0..m {
        let xi = x.row(i);
        for j in i..m {
            let xj = x.row(j);
            let acc: C64 = xi.iter().zip(xj).map(|(a, b)| a * b.conj()).sum();
            if i == j {
                r[(i, i)] = C64::new(acc.re * scale, 0.0);
            } else {
                r[(i, j)] = acc * scale;
                r[(j, i)] = (acc * scale).conj();
            }
        }
    }
    r
}

/// `R = σ_s²·A·R_ss·Aᴴ + σ_n²·I`.
pub fn true_covariance(geom: &ArrayGeometry, scenario: &SourceScenario) -> Result<CMatrix> {
    scenario.check_fits(geom)?;
    let a = manifold(geom, scenario.doas())?;
    let signal = a
        .matmul(scenario.correlation())?
        .matmul(&a.adjoint())?
        .scale_real(scenario.signal_power());
    let noise = CMatrix::identity(geom.sensor_count()).scale_real(scenario.noise_variance());
    Ok((&signal + &noise).hermitian_part())
}
