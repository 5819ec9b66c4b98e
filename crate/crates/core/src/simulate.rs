//! Seeded data generators for tensor and vector factor models, with outlier
//! contamination.
//!
//! All draws come from a `ChaCha8Rng` seeded with the configured seed;
//! replication `r` of a campaign uses `seed ^ r`. Draw order: loadings (mode 1
//! first), factor innovations, idiosyncratic innovations.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal, StudentT, Uniform};

use crate::error::{Error, Result};
use crate::estimator::series_multi_mode_product;
use crate::tensor::{Matrix, TensorSeries};

pub const BURN_IN: usize = 200;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replication_seed(seed: u64, replication: u64) -> u64 {
    seed ^ replication
}

/// Innovation law. `T3Scaled` is Student-t(3) divided by `sqrt(3)`; `Stable`
/// is symmetric alpha-stable with unit scale; `SkewT3` is a skew-normal with
/// the given slant divided by `sqrt(chi2_3 / 3)` (not centred).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Innovation {
    Gaussian,
    T3Scaled,
    Stable { alpha: f64 },
    SkewT3 { slant: f64 },
}

impl Innovation {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Innovation::Gaussian => rng.sample(StandardNormal),
            Innovation::T3Scaled => {
                let t: f64 = StudentT::new(3.0).expect("valid dof").sample(rng);
                t / 3f64.sqrt()
            }
            Innovation::Stable { alpha } => symmetric_stable(alpha, rng),
            Innovation::SkewT3 { slant } => {
                let delta = slant / (1.0 + slant * slant).sqrt();
                let u0: f64 = rng.sample(StandardNormal);
                let u1: f64 = rng.sample(StandardNormal);
                let z = delta * u0.abs() + (1.0 - delta * delta).sqrt() * u1;
                let w: f64 = ChiSquared::new(3.0).expect("valid dof").sample(rng);
                z / (w / 3.0).sqrt()
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Innovation::Gaussian => "gaussian".into(),
            Innovation::T3Scaled => "t3".into(),
            Innovation::Stable { alpha } => format!("stable{alpha}"),
            Innovation::SkewT3 { slant } => format!("skewt3_{slant}"),
        }
    }
}

impl std::str::FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "normal" => Ok(Innovation::Gaussian),
            "t3" | "t3_scaled" => Ok(Innovation::T3Scaled),
            "stable" => Ok(Innovation::Stable { alpha: 1.9 }),
            "skewt3" => Ok(Innovation::SkewT3 { slant: 20.0 }),
            _ => Err(Error::InvalidArgument(format!("unknown distribution {s:?}"))),
        }
    }
}

/// Chambers-Mallows-Stuck draw, skewness 0, scale 1, location 0.
fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let v = rng.sample(Uniform::new(-half_pi, half_pi).expect("valid range"));
    let w: f64 = rng.sample(Exp1);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Symmetric square root of the `p x p` matrix with unit diagonal and
/// off-diagonal entries `c`.
pub fn compound_symmetry_sqrt(p: usize, c: f64) -> Matrix {
    let small = (1.0 - c).sqrt();
    let big = (1.0 + (p as f64 - 1.0) * c).sqrt();
    let off = (big - small) / p as f64;
    Matrix::from_fn(p, p, |i, j| if i == j { small + off } else { off })
}

/// One simulated data set with its ground truth.
#[derive(Debug, Clone)]
pub struct SimDraw {
    pub x: TensorSeries,
    pub loadings: Vec<Matrix>,
    pub factors: TensorSeries,
    pub idio: TensorSeries,
    pub common: TensorSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorDgpConfig {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub n: usize,
    pub phi: f64,
    pub psi: f64,
    pub factor_dist: Innovation,
    pub idio_dist: Innovation,
    pub seed: u64,
    /// Rescale the drawn loadings to `sqrt(p_k)` times orthonormal columns,
    /// so that `p_k^{-1} Lambda_k^T Lambda_k = I`.
    pub identified_loadings: bool,
}

impl TensorDgpConfig {
    pub fn new(dims: Vec<usize>, n: usize) -> Self {
        let ranks = vec![3; dims.len()];
        TensorDgpConfig {
            dims,
            ranks,
            n,
            phi: 0.3,
            psi: 0.3,
            factor_dist: Innovation::Gaussian,
            idio_dist: Innovation::Gaussian,
            seed: 0,
            identified_loadings: false,
        }
    }

    /// Scenario presets `T1` (10,10,10), `T2` (100,10,10), `T3` (20,30,40).
    pub fn preset(name: &str, n: usize) -> Result<Self> {
        let dims = match name.to_ascii_uppercase().as_str() {
            "T1" => vec![10, 10, 10],
            "T2" => vec![100, 10, 10],
            "T3" => vec![20, 30, 40],
            _ => return Err(Error::InvalidArgument(format!("unknown tensor scenario {name:?}"))),
        };
        Ok(Self::new(dims, n))
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|&p| p == 0) {
            return Err(Error::InvalidArgument(format!("invalid dims {:?}", self.dims)));
        }
        crate::estimator::check_ranks(&self.dims, &self.ranks)?;
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if !(self.phi.abs() < 1.0 && self.psi.abs() < 1.0) {
            return Err(Error::InvalidArgument("AR coefficients must lie in (-1, 1)".into()));
        }
        Ok(())
    }
}

/// AR(1) filter `u_t = a u_{t-1} + sqrt(1 - a^2) w_t` started at zero, run
/// over `BURN_IN + n` innovations of dimension `d`; returns the last `n`.
fn ar_filter<R: Rng>(d: usize, n: usize, a: f64, dist: Innovation, rng: &mut R) -> Vec<f64> {
    let scale = (1.0 - a * a).sqrt();
    let mut state = vec![0.0; d];
    let mut out = Vec::with_capacity(n * d);
    for t in 0..BURN_IN + n {
        for s in state.iter_mut() {
            *s = a * *s + scale * dist.sample(rng);
        }
        if t >= BURN_IN {
            out.extend_from_slice(&state);
        }
    }
    out
}

/// Tucker factor series with AR(1) factors and spatially correlated AR(1)
/// idiosyncratic noise.
pub fn gen_tensor(cfg: &TensorDgpConfig) -> Result<SimDraw> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let unif = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let loadings: Vec<Matrix> = cfg
        .dims
        .iter()
        .zip(&cfg.ranks)
        .map(|(&p, &r)| Matrix::from_fn(p, r, |_, _| rng.sample(unif)))
        .map(|l| if cfg.identified_loadings { identify(l) } else { l })
        .collect();
    let r: usize = cfg.ranks.iter().product();
    let p: usize = cfg.dims.iter().product();
    let f = ar_filter(r, cfg.n, cfg.phi, cfg.factor_dist, &mut rng);
    let factors = TensorSeries::new(cfg.ranks.clone(), cfg.n, f)?;
    let v = ar_filter(p, cfg.n, cfg.psi, cfg.idio_dist, &mut rng);
    let v = TensorSeries::new(cfg.dims.clone(), cfg.n, v)?;
    let roots: Vec<Matrix> = cfg.dims.iter().map(|&pk| compound_symmetry_sqrt(pk, 1.0 / pk as f64)).collect();
    let idio = series_multi_mode_product(&v, &roots)?;
    let common = series_multi_mode_product(&factors, &loadings)?;
    let x = add_series(&common, &idio)?;
    Ok(SimDraw { x, loadings, factors, idio, common })
}

/// Gram-Schmidt on the columns, then scaling by `sqrt(p)`.
fn identify(mut l: Matrix) -> Matrix {
    let (p, r) = (l.rows(), l.cols());
    for j in 0..r {
        for _ in 0..2 {
            for i in 0..j {
                let dot: f64 = (0..p).map(|a| l[(a, i)] * l[(a, j)]).sum();
                for a in 0..p {
                    l[(a, j)] -= dot * l[(a, i)];
                }
            }
        }
        let norm = (0..p).map(|a| l[(a, j)] * l[(a, j)]).sum::<f64>().sqrt();
        for a in 0..p {
            l[(a, j)] /= norm;
        }
    }
    l.scaled((p as f64).sqrt())
}

fn add_series(a: &TensorSeries, b: &TensorSeries) -> Result<TensorSeries> {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    TensorSeries::new(a.dims().to_vec(), a.len(), data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierTarget {
    Idiosyncratic,
    Factor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierConfig {
    pub target: OutlierTarget,
    pub varrho: f64,
    pub seed: u64,
}

/// Type-7 sample quantile (linear interpolation between order statistics).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    let n = v.len();
    assert!(n > 0, "quantile of an empty sample");
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, a, upper) = v.select_nth_unstable_by(lo, f64::total_cmp);
    let a = *a;
    if frac == 0.0 || upper.is_empty() {
        return a;
    }
    let b = upper.iter().copied().fold(f64::INFINITY, f64::min);
    a + frac * (b - a)
}

/// Replaces `floor(varrho * N)` uniformly chosen cells of `series` by
/// `s * U`, `s = +-1`, `U ~ Unif[Q + 12, Q + 15]`, with `Q` the
/// `max(1 - 100/N, 0.999)`-quantile of the absolute entries. Returns the
/// contaminated copy and the sorted linear indices replaced.
pub fn contaminate(series: &TensorSeries, cfg: &OutlierConfig) -> Result<(TensorSeries, Vec<usize>)> {
    if !(0.0..1.0).contains(&cfg.varrho) {
        return Err(Error::InvalidArgument(format!("outlier proportion {} outside [0, 1)", cfg.varrho)));
    }
    let total = series.data().len();
    let count = (cfg.varrho * total as f64).floor() as usize;
    if count == 0 {
        return Ok((series.clone(), Vec::new()));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let abs: Vec<f64> = series.data().iter().map(|v| v.abs()).collect();
    let q = quantile(&abs, (1.0 - 100.0 / total as f64).max(0.999));
    let unif = Uniform::new_inclusive(q + 12.0, q + 15.0).expect("valid range");
    let mut idx = index::sample(&mut rng, total, count).into_vec();
    idx.sort_unstable();
    let mut out = series.clone();
    for &i in &idx {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        out.data_mut()[i] = s * rng.sample(unif);
    }
    Ok((out, idx))
}

/// Applies outliers to a draw: directly to the observations, or to the
/// factors with the observations and common component rebuilt from the
/// contaminated factors.
pub fn contaminate_draw(draw: &SimDraw, cfg: &OutlierConfig) -> Result<(SimDraw, Vec<usize>)> {
    match cfg.target {
        OutlierTarget::Idiosyncratic => {
            let (x, idx) = contaminate(&draw.x, cfg)?;
            Ok((SimDraw { x, ..draw.clone() }, idx))
        }
        OutlierTarget::Factor => {
            let (factors, idx) = contaminate(&draw.factors, cfg)?;
            let common = series_multi_mode_product(&factors, &draw.loadings)?;
            let x = add_series(&common, &draw.idio)?;
            Ok((SimDraw { x, loadings: draw.loadings.clone(), factors, idio: draw.idio.clone(), common }, idx))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependence {
    Independent,
    Dependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorScenario {
    V1,
    V2,
    V3,
    V4,
    V5,
}

impl VectorScenario {
    /// Factor and noise laws.
    pub fn laws(self) -> (Innovation, Innovation) {
        let stable = Innovation::Stable { alpha: 1.9 };
        match self {
            VectorScenario::V1 => (Innovation::Gaussian, Innovation::Gaussian),
            VectorScenario::V2 => (Innovation::T3Scaled, Innovation::T3Scaled),
            VectorScenario::V3 => (Innovation::Gaussian, Innovation::T3Scaled),
            VectorScenario::V4 => (stable, stable),
            VectorScenario::V5 => (Innovation::SkewT3 { slant: 20.0 }, stable),
        }
    }
}

impl std::str::FromStr for VectorScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "V1" => Ok(VectorScenario::V1),
            "V2" => Ok(VectorScenario::V2),
            "V3" => Ok(VectorScenario::V3),
            "V4" => Ok(VectorScenario::V4),
            "V5" => Ok(VectorScenario::V5),
            _ => Err(Error::InvalidArgument(format!("unknown vector scenario {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorDgpConfig {
    pub p: usize,
    pub n: usize,
    pub r: usize,
    pub dependence: Dependence,
    pub scenario: VectorScenario,
    pub seed: u64,
}

impl VectorDgpConfig {
    /// `(rho, beta, J)`.
    pub fn dependence_params(&self) -> (f64, f64, usize) {
        match self.dependence {
            Dependence::Independent => (0.0, 0.0, 0),
            Dependence::Dependent => (0.5, 0.2, (self.p / 20).max(10)),
        }
    }
}

/// Vector factor panel with iid factors and locally cross-correlated AR(1)
/// noise.
pub fn gen_vector(cfg: &VectorDgpConfig) -> Result<SimDraw> {
    if cfg.p == 0 || cfg.n == 0 || cfg.r == 0 || cfg.r > cfg.p {
        return Err(Error::InvalidArgument(format!(
            "invalid vector design p={} n={} r={}",
            cfg.p, cfg.n, cfg.r
        )));
    }
    let (rho, beta, j) = cfg.dependence_params();
    let (fdist, vdist) = cfg.scenario.laws();
    let (p, n, r) = (cfg.p, cfg.n, cfg.r);
    let mut rng = rng_from_seed(cfg.seed);
    let lambda = Matrix::from_fn(p, r, |_, _| rng.sample::<f64, _>(StandardNormal));
    let f: Vec<f64> = (0..n * r).map(|_| fdist.sample(&mut rng)).collect();
    let factors = TensorSeries::new(vec![r], n, f)?;
    let scale = ((1.0 - rho * rho) / (1.0 + 2.0 * j as f64 * beta * beta)).sqrt();
    let mut e = vec![0.0; p];
    let mut v = vec![0.0; p];
    let mut idio = Vec::with_capacity(n * p);
    for t in 0..BURN_IN + n {
        for x in v.iter_mut() {
            *x = vdist.sample(&mut rng);
        }
        for i in 0..p {
            let window: f64 = if beta == 0.0 {
                0.0
            } else {
                v[i.saturating_sub(j)..(i + j + 1).min(p)].iter().sum()
            };
            e[i] = rho * e[i] + (1.0 - beta) * v[i] + beta * window;
        }
        if t >= BURN_IN {
            idio.extend(e.iter().map(|x| scale * x));
        }
    }
    let idio = TensorSeries::new(vec![p], n, idio)?;
    let loadings = vec![lambda];
    let common = series_multi_mode_product(&factors, &loadings)?;
    let x = add_series(&common, &idio)?;
    Ok(SimDraw { x, loadings, factors, idio, common })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    }

    #[test]
    fn identified_loadings_keep_the_stream() {
        let mut cfg = TensorDgpConfig::new(vec![6, 7, 8], 20);
        cfg.ranks = vec![1, 2, 3];
        cfg.seed = 5;
        let raw = gen_tensor(&cfg).unwrap();
        cfg.identified_loadings = true;
        let id = gen_tensor(&cfg).unwrap();
        assert_eq!(raw.factors, id.factors);
        assert_eq!(raw.idio, id.idio);
        for (l, &p) in id.loadings.iter().zip(&cfg.dims) {
            let g = l.transpose().matmul(l).unwrap();
            for i in 0..l.cols() {
                for j in 0..l.cols() {
                    let want = if i == j { p as f64 } else { 0.0 };
                    assert!((g[(i, j)] - want).abs() < 1e-10);
                }
            }
        }
        // same column spaces as the raw draw
        for (a, b) in raw.loadings.iter().zip(&id.loadings) {
            assert!(crate::evaluation::loading_error(a, b).unwrap() < 1e-7);
        }
    }

    #[test]
    fn compound_symmetry_root_squares_back() {
        for p in [1, 2, 10, 37] {
            let s = compound_symmetry_sqrt(p, 1.0 / p as f64);
            let sq = s.matmul(&s).unwrap();
            let want = Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 1.0 / p as f64 });
            assert!(sq.max_abs_diff(&want) < 1e-12);
        }
        let sigma = Matrix::from_fn(10, 10, |i, j| if i == j { 1.0 } else { 0.1 });
        let ev = crate::linalg::sym_eigenvalues(&sigma).unwrap();
        assert!((ev[0] - 1.9).abs() < 1e-12);
        assert!(ev[1..].iter().all(|v| (v - 0.9).abs() < 1e-12));
    }

    #[test]
    fn factor_variance_and_autocorrelation() {
        let mut cfg = TensorDgpConfig::new(vec![2, 2], 2000);
        cfg.ranks = vec![1, 1];
        cfg.phi = 0.0;
        cfg.psi = 0.0;
        cfg.seed = 3;
        let d = gen_tensor(&cfg).unwrap();
        let var = variance(d.factors.data());
        assert!((0.85..1.15).contains(&var), "{var}");
        cfg.phi = 0.3;
        let d = gen_tensor(&cfg).unwrap();
        let f = d.factors.data();
        let m = f.iter().sum::<f64>() / f.len() as f64;
        let num: f64 = f.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = f.iter().map(|x| (x - m).powi(2)).sum();
        assert!((num / den - 0.3).abs() < 0.1);
    }

    #[test]
    fn draw_satisfies_model_and_is_reproducible() {
        let mut cfg = TensorDgpConfig::preset("T1", 20).unwrap();
        cfg.seed = 9;
        let a = gen_tensor(&cfg).unwrap();
        let b = gen_tensor(&cfg).unwrap();
        assert_eq!(a.x, b.x);
        let chi = series_multi_mode_product(&a.factors, &a.loadings).unwrap();
        for ((x, c), e) in a.x.data().iter().zip(chi.data()).zip(a.idio.data()) {
            assert!((x - c - e).abs() < 1e-12);
        }
        assert_eq!(TensorDgpConfig::preset("T3", 1).unwrap().dims, vec![20, 30, 40]);
    }

    #[test]
    fn contamination_counts_and_magnitudes() {
        let mut cfg = TensorDgpConfig::preset("T1", 100).unwrap();
        cfg.seed = 1;
        let d = gen_tensor(&cfg).unwrap();
        let oc = OutlierConfig { target: OutlierTarget::Idiosyncratic, varrho: 0.005, seed: 2 };
        let (x, idx) = contaminate(&d.x, &oc).unwrap();
        assert_eq!(idx.len(), 500);
        let abs: Vec<f64> = d.x.data().iter().map(|v| v.abs()).collect();
        let q = quantile(&abs, 0.999);
        let mut set = std::collections::HashSet::new();
        for &i in &idx {
            set.insert(i);
            let v = x.data()[i].abs();
            assert!(v >= q + 12.0 && v <= q + 15.0);
        }
        assert_eq!(set.len(), 500);
        for (i, (a, b)) in x.data().iter().zip(d.x.data()).enumerate() {
            if !set.contains(&i) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        let none = OutlierConfig { varrho: 0.0, ..oc };
        let (same, empty) = contaminate(&d.x, &none).unwrap();
        assert_eq!(same, d.x);
        assert!(empty.is_empty());
    }

    #[test]
    fn factor_outliers_propagate() {
        let mut cfg = TensorDgpConfig::preset("T1", 50).unwrap();
        cfg.seed = 4;
        let d = gen_tensor(&cfg).unwrap();
        let oc = OutlierConfig { target: OutlierTarget::Factor, varrho: 0.01, seed: 5 };
        let (c, idx) = contaminate_draw(&d, &oc).unwrap();
        assert_eq!(idx.len(), (0.01f64 * 50.0 * 27.0).floor() as usize);
        let chi = series_multi_mode_product(&c.factors, &c.loadings).unwrap();
        assert_eq!(chi, c.common);
        assert_eq!(c.idio, d.idio);
    }

    #[test]
    fn quantile_type7() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[5.0, 1.0, 3.0], 1.0), 5.0);
        assert!((quantile(&[0.0, 10.0], 0.25) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn vector_noise_variance_and_identity_case() {
        let cfg = VectorDgpConfig {
            p: 10,
            n: 5000,
            r: 3,
            dependence: Dependence::Independent,
            scenario: VectorScenario::V1,
            seed: 11,
        };
        let d = gen_vector(&cfg).unwrap();
        let var = variance(d.idio.data());
        assert!((var - 1.0).abs() < 0.1, "{var}");
        let dep = VectorDgpConfig { p: 100, dependence: Dependence::Dependent, ..cfg.clone() };
        assert_eq!(dep.dependence_params().2, 10);
        let dep = VectorDgpConfig { p: 500, ..dep };
        assert_eq!(dep.dependence_params().2, 25);
    }

    #[test]
    fn samplers_are_sane() {
        let mut rng = rng_from_seed(0);
        let n = 200_000;
        let t: Vec<f64> = (0..n).map(|_| Innovation::T3Scaled.sample(&mut rng)).collect();
        // t3 variance converges slowly; check the median absolute value instead
        let mut abs: Vec<f64> = t.iter().map(|v| v.abs()).collect();
        let med = crate::tuning::median_in_place(&mut abs);
        assert!((med - 0.7649 / 3f64.sqrt()).abs() < 0.01, "{med}");
        let s: Vec<f64> = (0..n).map(|_| Innovation::Stable { alpha: 2.0 }.sample(&mut rng)).collect();
        // alpha = 2 is N(0, 2)
        assert!((variance(&s) - 2.0).abs() < 0.05);
        let k: Vec<f64> = (0..n).map(|_| Innovation::SkewT3 { slant: 20.0 }.sample(&mut rng)).collect();
        let pos = k.iter().filter(|v| **v > 0.0).count() as f64 / n as f64;
        assert!(pos > 0.9);
    }
}
