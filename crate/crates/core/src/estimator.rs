//! Loading estimation by truncated HOSVD plus projected refinement, core
//! factor estimation and common-component reconstruction.

use crate::error::{Error, Result};
use crate::kernels::{self, layout};
use crate::linalg::{self, EigenPairs};
use crate::robust::{self, TruncationLevel};
use crate::tensor::{Matrix, SeriesView, TensorSeries};

/// Loadings for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLoading {
    /// `sqrt(p_k) * e`.
    pub lambda: Matrix,
    /// Orthonormal columns.
    pub e: Matrix,
    /// Full spectrum of the decomposed second-moment matrix, descending and
    /// clamped at zero.
    pub eigvals: Vec<f64>,
}

impl ModeLoading {
    pub fn from_orthonormal(e: Matrix, eigvals: Vec<f64>) -> Self {
        let c = (e.rows() as f64).sqrt();
        ModeLoading { lambda: e.scaled(c), e, eigvals }
    }

    pub fn rank(&self) -> usize {
        self.e.cols()
    }
}

/// Per-mode loading estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingSet {
    pub modes: Vec<ModeLoading>,
}

impl LoadingSet {
    pub fn order(&self) -> usize {
        self.modes.len()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.modes.iter().map(ModeLoading::rank).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.e.rows()).collect()
    }

    pub fn e(&self) -> Vec<Matrix> {
        self.modes.iter().map(|m| m.e.clone()).collect()
    }

    pub fn lambdas(&self) -> Vec<Matrix> {
        self.modes.iter().map(|m| m.lambda.clone()).collect()
    }

    fn check_against(&self, dims: &[usize]) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::ShapeMismatch(format!(
                "loadings for dims {:?} applied to data of dims {dims:?}",
                self.dims()
            )));
        }
        Ok(())
    }
}

/// Estimated core factors, one `r_1 x ... x r_K` tensor per time point.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSeries(pub TensorSeries);

impl FactorSeries {
    pub fn series(&self) -> &TensorSeries {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub ranks: Vec<usize>,
    pub tau: TruncationLevel,
    pub kappa: TruncationLevel,
    pub iterations: usize,
}

impl EstimatorConfig {
    pub fn new(ranks: Vec<usize>) -> Self {
        EstimatorConfig {
            ranks,
            tau: TruncationLevel::INFINITE,
            kappa: TruncationLevel::INFINITE,
            iterations: 2,
        }
    }
}

pub(crate) fn check_ranks(dims: &[usize], ranks: &[usize]) -> Result<()> {
    if dims.len() != ranks.len() {
        return Err(Error::ShapeMismatch(format!("{} ranks for order-{} data", ranks.len(), dims.len())));
    }
    for (&r, &p) in ranks.iter().zip(dims) {
        if r == 0 || r > p {
            return Err(Error::RankOutOfRange { requested: r, order: p });
        }
    }
    Ok(())
}

/// Top-`r` eigenpairs plus the full clamped spectrum.
pub(crate) fn decompose(g: &Matrix, r: usize) -> Result<(EigenPairs, Vec<f64>)> {
    let n = g.rows();
    let full = linalg::sym_eig(g, n)?;
    let spectrum: Vec<f64> = full.values.iter().map(|v| v.max(0.0)).collect();
    let top = EigenPairs { values: full.values[..r].to_vec(), vectors: full.vectors.leading_columns(r) };
    Ok((top, spectrum))
}

fn loading_from_gram(g: &Matrix, r: usize, mode: usize) -> Result<ModeLoading> {
    let (top, spectrum) = decompose(g, r)?;
    if !(spectrum[0] > 0.0) {
        return Err(Error::DegenerateSpectrum(format!("mode {mode} second moment is zero")));
    }
    Ok(ModeLoading::from_orthonormal(top.vectors, spectrum))
}

/// Initial estimates from scaled mode-k Gram matrices.
pub(crate) fn loadings_from_grams(grams: &[Matrix], ranks: &[usize]) -> Result<LoadingSet> {
    let modes = grams
        .iter()
        .zip(ranks)
        .enumerate()
        .map(|(k, (g, &r))| loading_from_gram(g, r, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadingSet { modes })
}

/// One Jacobi-style sweep over a view, clamping on the fly.
pub(crate) fn refine_view(
    view: &SeriesView<'_>,
    tau: Option<f64>,
    current: &LoadingSet,
    ranks: &[usize],
    ws: &mut robust::Workspace,
) -> Result<LoadingSet> {
    let grams = robust::projected_grams_all(view, tau, &current.e(), ws);
    loadings_from_grams(&grams, ranks)
}

/// All stages `0..=iterations` on a view, starting from the given scaled
/// Gram matrices.
pub(crate) fn stages_view(
    view: &SeriesView<'_>,
    tau: Option<f64>,
    grams: &[Matrix],
    ranks: &[usize],
    iterations: usize,
    ws: &mut robust::Workspace,
) -> Result<Vec<LoadingSet>> {
    let mut out = vec![loadings_from_grams(grams, ranks)?];
    for _ in 0..iterations {
        let next = if view.dims.len() == 1 {
            out.last().expect("nonempty").clone()
        } else {
            refine_view(view, tau, out.last().expect("nonempty"), ranks, ws)?
        };
        out.push(next);
    }
    Ok(out)
}

pub(crate) fn grams_view(view: &SeriesView<'_>, tau: Option<f64>) -> Vec<Matrix> {
    robust::grams_all(view, tau, &mut robust::Workspace::default())
}

/// Top-`r_k` eigenvectors of each truncated mode-k second moment.
pub fn initial_loadings(series: &TensorSeries, ranks: &[usize], tau: TruncationLevel) -> Result<LoadingSet> {
    check_ranks(series.dims(), ranks)?;
    loadings_from_grams(&grams_view(&series.view(), tau.as_option()), ranks)
}

/// One refinement sweep: every mode is re-estimated from the projected
/// second moment built with the other modes of `current`.
pub fn refine_loadings(
    series: &TensorSeries,
    current: &LoadingSet,
    ranks: &[usize],
    tau: TruncationLevel,
) -> Result<LoadingSet> {
    check_ranks(series.dims(), ranks)?;
    current.check_against(series.dims())?;
    refine_view(&series.view(), tau.as_option(), current, ranks, &mut robust::Workspace::default())
}

/// Loading estimates at every stage `0..=iterations`.
pub fn estimate_loadings(
    series: &TensorSeries,
    ranks: &[usize],
    tau: TruncationLevel,
    iterations: usize,
) -> Result<Vec<LoadingSet>> {
    check_ranks(series.dims(), ranks)?;
    let view = series.view();
    let mut ws = robust::Workspace::default();
    let grams = robust::grams_all(&view, tau.as_option(), &mut ws);
    stages_view(&view, tau.as_option(), &grams, ranks, iterations, &mut ws)
}

/// Applies `mats[k]` along every mode of every frame.
pub(crate) fn series_multi_mode_product(series: &TensorSeries, mats: &[Matrix]) -> Result<TensorSeries> {
    let n = series.len();
    let mut dims = series.dims().to_vec();
    for (k, m) in mats.iter().enumerate() {
        if m.cols() != dims[k] {
            return Err(Error::ShapeMismatch(format!(
                "mode {k}: matrix has {} columns, tensor has extent {}",
                m.cols(),
                dims[k]
            )));
        }
    }
    let mut cur = series.data().to_vec();
    for (k, m) in mats.iter().enumerate() {
        let mut full = dims.clone();
        full.push(n);
        let l = layout(&full, k);
        let mut dst = vec![0.0; l.0 * m.rows() * l.2];
        kernels::mode_product(&cur, l, m.data(), m.rows(), &mut dst);
        dims[k] = m.rows();
        cur = dst;
    }
    TensorSeries::new(dims, n, cur)
}

/// `F_t = p^{-1} X_t^tr(kappa) x_1 Lambda_1^T ... x_K Lambda_K^T`.
pub fn estimate_factors(series: &TensorSeries, loadings: &LoadingSet, kappa: TruncationLevel) -> Result<FactorSeries> {
    loadings.check_against(series.dims())?;
    let tr = robust::truncate(series, kappa);
    let lt: Vec<Matrix> = loadings.modes.iter().map(|m| m.lambda.transpose()).collect();
    let f = series_multi_mode_product(&tr, &lt)?;
    let p = series.frame_len() as f64;
    Ok(FactorSeries(f.map(|v| v / p)))
}

/// `chi_t = F_t x_1 Lambda_1 ... x_K Lambda_K`.
pub fn common_component(factors: &FactorSeries, loadings: &LoadingSet) -> Result<TensorSeries> {
    if factors.0.dims() != loadings.ranks().as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "factor dims {:?} do not match loading ranks {:?}",
            factors.0.dims(),
            loadings.ranks()
        )));
    }
    series_multi_mode_product(&factors.0, &loadings.lambdas())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn orthonormal(p: usize, r: usize, seed: usize) -> Matrix {
        // Gram-Schmidt on a deterministic pattern
        let mut q = Matrix::from_fn(p, r, |i, j| (((i + 1) * (j + 2 + seed) * 7919) % 97) as f64 / 97.0 - 0.5);
        for j in 0..r {
            for l in 0..j {
                let dot: f64 = (0..p).map(|i| q[(i, j)] * q[(i, l)]).sum();
                for i in 0..p {
                    q[(i, j)] -= dot * q[(i, l)];
                }
            }
            let nrm: f64 = (0..p).map(|i| q[(i, j)].powi(2)).sum::<f64>().sqrt();
            for i in 0..p {
                q[(i, j)] /= nrm;
            }
        }
        q
    }

    fn noiseless(dims: &[usize], ranks: &[usize], n: usize) -> (TensorSeries, Vec<Matrix>, TensorSeries) {
        let lam: Vec<Matrix> = dims
            .iter()
            .zip(ranks)
            .enumerate()
            .map(|(k, (&p, &r))| orthonormal(p, r, k).scaled((p as f64).sqrt()))
            .collect();
        let f: Vec<Tensor> = (0..n)
            .map(|t| Tensor::from_fn(ranks, |idx| {
                let s: usize = idx.iter().enumerate().map(|(a, b)| (a + 1) * (b + 1)).sum();
                ((t * 31 + s * 17) % 23) as f64 / 11.0 - 1.0 + if idx.iter().all(|&i| i == 0) { 2.0 } else { 0.0 }
            }).unwrap())
            .collect();
        let f = TensorSeries::from_tensors(&f).unwrap();
        let x = series_multi_mode_product(&f, &lam).unwrap();
        (x, lam, f)
    }

    fn proj_dist(a: &Matrix, b: &Matrix) -> f64 {
        let pa = a.matmul(&a.transpose()).unwrap();
        let pb = b.matmul(&b.transpose()).unwrap();
        pa.max_abs_diff(&pb)
    }

    #[test]
    fn noiseless_recovery_and_fixed_point() {
        let (x, lam, f) = noiseless(&[6, 5, 4], &[2, 3, 1], 30);
        let stages = estimate_loadings(&x, &[2, 3, 1], TruncationLevel::INFINITE, 2).unwrap();
        assert_eq!(stages.len(), 3);
        for st in &stages {
            for (k, m) in st.modes.iter().enumerate() {
                let e_true = lam[k].scaled(1.0 / (lam[k].rows() as f64).sqrt());
                assert!(proj_dist(&m.e, &e_true) < 1e-8);
                let ete = m.e.t_matmul(&m.e).unwrap();
                assert!(ete.max_abs_diff(&Matrix::identity(m.rank())) < 1e-10);
                assert_eq!(m.lambda, m.e.scaled((m.e.rows() as f64).sqrt()));
            }
        }
        let last = stages.last().unwrap();
        let fh = estimate_factors(&x, last, TruncationLevel::INFINITE).unwrap();
        let chi = common_component(&fh, last).unwrap();
        let err: f64 = chi.data().iter().zip(x.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            / x.data().iter().map(|v| v * v).sum::<f64>();
        assert!(err < 1e-20);
        assert_eq!(fh.len(), f.len());
    }

    #[test]
    fn true_loadings_give_true_factors() {
        let (x, lam, f) = noiseless(&[6, 5, 4], &[2, 3, 1], 10);
        let set = LoadingSet {
            modes: lam
                .iter()
                .map(|l| ModeLoading::from_orthonormal(l.scaled(1.0 / (l.rows() as f64).sqrt()), vec![]))
                .collect(),
        };
        let fh = estimate_factors(&x, &set, TruncationLevel::INFINITE).unwrap();
        let d = fh.0.data().iter().zip(f.data()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-10);
        let big = TruncationLevel::new(1e9).unwrap();
        assert_eq!(estimate_factors(&x, &set, big).unwrap(), fh);
    }

    #[test]
    fn vector_case_is_pca() {
        let x = TensorSeries::new(vec![4], 6, (0..24).map(|i| ((i * 7) % 11) as f64 - 5.0).collect()).unwrap();
        let stages = estimate_loadings(&x, &[2], TruncationLevel::INFINITE, 2).unwrap();
        let mut g = Matrix::zeros(4, 4);
        for t in 0..6 {
            let v = Matrix::column_vector(x.frame(t));
            g = g.add(&v.matmul(&v.transpose()).unwrap()).unwrap();
        }
        let e = linalg::sym_eig(&g.scaled(1.0 / 6.0), 2).unwrap();
        assert_eq!(stages[0], stages[2]);
        assert!(stages[0].modes[0].e.max_abs_diff(&e.vectors) < 1e-12);
    }

    #[test]
    fn zero_series_is_degenerate() {
        let x = TensorSeries::zeros(&[3, 3], 4).unwrap();
        let r = initial_loadings(&x, &[1, 1], TruncationLevel::INFINITE);
        assert!(matches!(r, Err(Error::DegenerateSpectrum(_))));
        assert!(matches!(
            initial_loadings(&x, &[4, 1], TruncationLevel::INFINITE),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn projected_eigenvalues_match_plug_in() {
        // diagonal factor second moment: F_t with independent coordinates
        let dims = [6, 5, 4];
        let ranks = [2, 2, 1];
        let (x, lam, f) = noiseless(&dims, &ranks, 40);
        let e: Vec<Matrix> = lam.iter().map(|l| l.scaled(1.0 / (l.rows() as f64).sqrt())).collect();
        let set = LoadingSet { modes: e.iter().map(|m| ModeLoading::from_orthonormal(m.clone(), vec![])).collect() };
        let next = refine_loadings(&x, &set, &ranks, TruncationLevel::INFINITE).unwrap();
        for k in 0..3 {
            // projected moment is p_k E_k G_f E_k^T, G_f = n^{-1} sum mat_k(F) mat_k(F)^T
            let mut gf = Matrix::zeros(ranks[k], ranks[k]);
            for t in 0..f.len() {
                let m = f.tensor(t).unfold(k).unwrap();
                gf = gf.add(&m.matmul(&m.transpose()).unwrap()).unwrap();
            }
            let want = linalg::sym_eig(&gf.scaled(dims[k] as f64 / f.len() as f64), ranks[k]).unwrap();
            for j in 0..ranks[k] {
                assert!((next.modes[k].eigvals[j] - want.values[j]).abs() < 1e-8);
            }
        }
    }
}
