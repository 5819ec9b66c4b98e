//! Element-wise truncation and truncated mode-k second moments.

use crate::error::{Error, Result};
use crate::kernels::{self, layout};
use crate::tensor::{Matrix, SeriesView, Tensor, TensorSeries};

/// A truncation level `tau > 0`, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub const INFINITE: TruncationLevel = TruncationLevel(f64::INFINITY);

    pub fn new(tau: f64) -> Result<Self> {
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::InvalidArgument(format!("truncation level must be positive, got {tau}")));
        }
        Ok(TruncationLevel(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub(crate) fn as_option(self) -> Option<f64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.0)
        }
    }

    /// `sign(x) * min(|x|, tau)`.
    pub fn apply(self, x: f64) -> f64 {
        x.clamp(-self.0, self.0)
    }
}

impl Default for TruncationLevel {
    fn default() -> Self {
        Self::INFINITE
    }
}

impl std::fmt::Display for TruncationLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

pub fn truncate_tensor(x: &Tensor, tau: TruncationLevel) -> Tensor {
    if tau.is_infinite() {
        return x.clone();
    }
    Tensor::new(x.dims().to_vec(), x.data().iter().map(|v| tau.apply(*v)).collect())
        .expect("same shape")
}

pub fn truncate(series: &TensorSeries, tau: TruncationLevel) -> TensorSeries {
    if tau.is_infinite() {
        return series.clone();
    }
    series.map(|v| tau.apply(v))
}

fn check_mode(k: usize, order: usize) -> Result<()> {
    if k >= order {
        return Err(Error::ModeOutOfRange { mode: k, order });
    }
    Ok(())
}

/// `(n p_{-k})^{-1} sum_t mat_k(X_t^tr) mat_k(X_t^tr)^T`.
pub fn mode_second_moment(series: &TensorSeries, k: usize, tau: TruncationLevel) -> Result<Matrix> {
    check_mode(k, series.order())?;
    let mut g = gram_view(&series.view(), k, tau.as_option());
    scale_gram(&mut g, series.len(), series.dims(), k);
    Ok(g)
}

/// `(n p_{-k})^{-1} sum_t mat_k(X_t^tr) D D^T mat_k(X_t^tr)^T` for an explicit
/// `p_{-k} x r` matrix `D`.
pub fn projected_second_moment(
    series: &TensorSeries,
    k: usize,
    tau: TruncationLevel,
    d: &Matrix,
) -> Result<Matrix> {
    check_mode(k, series.order())?;
    let dims = series.dims();
    let p_minus = series.frame_len() / dims[k];
    if d.rows() != p_minus {
        return Err(Error::ShapeMismatch(format!(
            "projection has {} rows, expected p_-k = {p_minus}",
            d.rows()
        )));
    }
    let pk = dims[k];
    let mut g = Matrix::zeros(pk, pk);
    for t in 0..series.len() {
        let x = truncate_tensor(&series.tensor(t), tau);
        let y = x.unfold(k)?.matmul(d)?;
        let yt = y.transpose();
        g = g.add(&y.matmul(&yt)?)?;
    }
    kernels::symmetrize(g.data_mut(), pk);
    scale_gram(&mut g, series.len(), dims, k);
    Ok(g)
}

/// Projected second moment with `D = E_K (x) ... (x) E_{k+1} (x) E_{k-1} (x) ... (x) E_1`
/// applied through mode products. `e[k]` is ignored.
pub fn projected_second_moment_factored(
    series: &TensorSeries,
    k: usize,
    tau: TruncationLevel,
    e: &[Matrix],
) -> Result<Matrix> {
    check_mode(k, series.order())?;
    check_factors(series.dims(), k, e)?;
    let tr = truncate(series, tau);
    let mut g = projected_gram_view(&tr.view(), k, e);
    scale_gram(&mut g, series.len(), series.dims(), k);
    Ok(g)
}

pub(crate) fn check_factors(dims: &[usize], k: usize, e: &[Matrix]) -> Result<()> {
    if e.len() != dims.len() {
        return Err(Error::ShapeMismatch(format!("{} loading matrices for order {}", e.len(), dims.len())));
    }
    for (j, m) in e.iter().enumerate() {
        if j != k && m.rows() != dims[j] {
            return Err(Error::ShapeMismatch(format!(
                "mode {j} loading has {} rows, expected {}",
                m.rows(),
                dims[j]
            )));
        }
    }
    Ok(())
}

pub(crate) fn scale_gram(g: &mut Matrix, n: usize, dims: &[usize], k: usize) {
    let p: usize = dims.iter().product();
    let c = 1.0 / (n as f64 * (p / dims[k]) as f64);
    for v in g.data_mut() {
        *v *= c;
    }
}

/// Unscaled `sum_t mat_k(X_t) mat_k(X_t)^T` over a view, clamping on the fly.
pub(crate) fn gram_view(view: &SeriesView<'_>, k: usize, tau: Option<f64>) -> Matrix {
    let pk = view.dims[k];
    let mut g = vec![0.0; pk * pk];
    let mut scratch = Vec::new();
    let (left, mid, right) = layout(view.dims, k);
    let frame = view.frame_len();
    for block in &view.blocks {
        let nb = block.len() / frame;
        kernels::mode_gram_acc(block, (left, mid, right * nb), tau, &mut g, &mut scratch);
    }
    kernels::symmetrize(&mut g, pk);
    Matrix::new(pk, pk, g).expect("square")
}

/// Unscaled projected Gram over an already truncated view: contracts every
/// mode other than `k` with `e[j]^T`, then forms the mode-k Gram.
pub(crate) fn projected_gram_view(view: &SeriesView<'_>, k: usize, e: &[Matrix]) -> Matrix {
    let dims = view.dims;
    let pk = dims[k];
    // the first contraction touches all the data: mode 1 is a single GEMM,
    // otherwise later modes give large contiguous slabs
    let mut order: Vec<usize> = (0..dims.len()).filter(|&j| j != k).collect();
    if order.first() == Some(&0) {
        order[1..].reverse();
    } else {
        order.reverse();
    }
    let et: Vec<Option<Matrix>> =
        (0..dims.len()).map(|j| if j == k { None } else { Some(e[j].transpose()) }).collect();
    let mut g = vec![0.0; pk * pk];
    let mut scratch = Vec::new();
    let frame = view.frame_len();
    for block in &view.blocks {
        let nb = block.len() / frame;
        if nb == 0 {
            continue;
        }
        let mut cur_dims: Vec<usize> = dims.to_vec();
        cur_dims.push(nb);
        let mut cur: Option<Vec<f64>> = None;
        for &j in &order {
            let m = et[j].as_ref().expect("other mode");
            let src: &[f64] = cur.as_deref().unwrap_or(block);
            let l = layout(&cur_dims, j);
            let mut dst = vec![0.0; l.0 * m.rows() * l.2];
            kernels::mode_product(src, l, m.data(), m.rows(), &mut dst);
            cur_dims[j] = m.rows();
            cur = Some(dst);
        }
        let src: &[f64] = cur.as_deref().unwrap_or(block);
        kernels::mode_gram_acc(src, layout(&cur_dims, k), None, &mut g, &mut scratch);
    }
    kernels::symmetrize(&mut g, pk);
    Matrix::new(pk, pk, g).expect("square")
}

/// Growth regime used by [`theoretical_tau`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauRegime {
    Independent,
    RandomField,
}

/// Target size of a cache-resident chunk of frames, in doubles.
const CHUNK_ELEMS: usize = 1 << 17;

/// Reusable buffers for chunked moment accumulation.
#[derive(Default)]
pub(crate) struct Workspace {
    stack: Vec<f64>,
    parts: Vec<Vec<f64>>,
    bufs: [Vec<f64>; 2],
    scratch: Vec<f64>,
}

/// Calls `f(chunk, nb)` on consecutive runs of frames of `block`, clamped to
/// `[-tau, tau]` when `tau` is given.
pub(crate) fn for_each_chunk(
    block: &[f64],
    frame: usize,
    tau: Option<f64>,
    buf: &mut Vec<f64>,
    mut f: impl FnMut(&[f64], usize),
) {
    if frame == 0 {
        return;
    }
    let per = (CHUNK_ELEMS / frame).max(1);
    let total = block.len() / frame;
    let mut t = 0;
    while t < total {
        let nb = per.min(total - t);
        let src = &block[t * frame..(t + nb) * frame];
        match tau {
            None => f(src, nb),
            Some(c) => {
                buf.clear();
                buf.extend(src.iter().map(|v| v.clamp(-c, c)));
                f(buf, nb);
            }
        }
        t += nb;
    }
}

/// Adds the mode-k Grams of an `nb`-frame chunk to `acc[k]` for every mode.
pub(crate) fn grams_chunk(chunk: &[f64], dims: &[usize], nb: usize, acc: &mut [Vec<f64>], ws: &mut Workspace) {
    for (k, g) in acc.iter_mut().enumerate() {
        let (l, m, r) = layout(dims, k);
        kernels::mode_gram_acc(chunk, (l, m, r * nb), None, g, &mut ws.scratch);
    }
}

/// Contracts `src` along `order`; returns the buffer holding the result, or
/// `None` when nothing was contracted.
fn contract_chain(
    src: &[f64],
    dims: &mut [usize],
    order: impl Iterator<Item = usize>,
    et: &[Matrix],
    bufs: &mut [Vec<f64>; 2],
) -> Option<usize> {
    let mut cur: Option<usize> = None;
    for j in order {
        let m = &et[j];
        let l = layout(dims, j);
        let out = cur.map_or(0, |c| 1 - c);
        let [b0, b1] = bufs;
        let (input, dst): (&[f64], &mut Vec<f64>) = match cur {
            None => (src, b0),
            Some(0) => (b0, b1),
            Some(_) => (b1, b0),
        };
        dst.resize(l.0 * m.rows() * l.2, 0.0);
        kernels::mode_product(input, l, m.data(), m.rows(), dst);
        dims[j] = m.rows();
        cur = Some(out);
    }
    cur
}

/// Applies the row-stack of `mats` along mode `j` of `src` in one product and
/// splits the result into one buffer per matrix.
fn stacked_product(src: &[f64], dims: &[usize], j: usize, mats: &[&Matrix], tmp: &mut Vec<f64>, out: &mut [Vec<f64>]) {
    let (left, mid, right) = layout(dims, j);
    let total: usize = mats.iter().map(|m| m.rows()).sum();
    let stacked: Vec<f64> = mats.iter().flat_map(|m| m.data().iter().copied()).collect();
    tmp.resize(left * total * right, 0.0);
    kernels::mode_product(src, (left, mid, right), &stacked, total, tmp);
    let mut off = 0;
    for (m, o) in mats.iter().zip(out.iter_mut()) {
        let w = left * m.rows();
        o.clear();
        for b in 0..right {
            let base = b * left * total + off * left;
            o.extend_from_slice(&tmp[base..base + w]);
        }
        off += m.rows();
    }
}

/// Adds the projected mode-k Grams of an `nb`-frame chunk to `accs[f][k]`
/// for every mode and every fit `f`, where `ets[f][j]` is the transposed
/// basis of mode `j` for fit `f`. The leading contraction of each chain is
/// shared by all fits, and the mode-1 contraction by all modes but the first.
pub(crate) fn projected_grams_chunk(
    chunk: &[f64],
    dims: &[usize],
    nb: usize,
    ets: &[&[Matrix]],
    accs: &mut [&mut Vec<Vec<f64>>],
    ws: &mut Workspace,
) {
    let order = dims.len();
    let fits = ets.len();
    if order == 1 {
        for acc in accs.iter_mut() {
            kernels::mode_gram_acc(chunk, (1, dims[0], nb), None, &mut acc[0], &mut ws.scratch);
        }
        return;
    }
    let mut base: Vec<usize> = dims.to_vec();
    base.push(nb);
    ws.parts.resize_with(fits, Vec::new);
    let last = order - 1;
    let mats: Vec<&Matrix> = ets.iter().map(|e| &e[last]).collect();
    stacked_product(chunk, &base, last, &mats, &mut ws.stack, &mut ws.parts);
    for f in 0..fits {
        let mut d = base.clone();
        d[last] = ets[f][last].rows();
        let part = std::mem::take(&mut ws.parts[f]);
        let y = contract_chain(&part, &mut d, (1..last).rev(), ets[f], &mut ws.bufs).map_or(&part[..], |i| &ws.bufs[i]);
        kernels::mode_gram_acc(y, layout(&d, 0), None, &mut accs[f][0], &mut ws.scratch);
        ws.parts[f] = part;
    }
    let mats: Vec<&Matrix> = ets.iter().map(|e| &e[0]).collect();
    stacked_product(chunk, &base, 0, &mats, &mut ws.stack, &mut ws.parts);
    for f in 0..fits {
        let mut zdims = base.clone();
        zdims[0] = ets[f][0].rows();
        let z0 = std::mem::take(&mut ws.parts[f]);
        for k in 1..order {
            let mut d = zdims.clone();
            let y = match contract_chain(&z0, &mut d, (1..order).rev().filter(|&j| j != k), ets[f], &mut ws.bufs) {
                Some(i) => &ws.bufs[i][..],
                None => &z0[..],
            };
            kernels::mode_gram_acc(y, layout(&d, k), None, &mut accs[f][k], &mut ws.scratch);
        }
        ws.parts[f] = z0;
    }
}

/// Scales and symmetrizes Grams accumulated over `n` frames.
pub(crate) fn finish_grams(acc: Vec<Vec<f64>>, n: usize, dims: &[usize]) -> Vec<Matrix> {
    acc.into_iter()
        .enumerate()
        .map(|(k, mut g)| {
            kernels::symmetrize(&mut g, dims[k]);
            let mut m = Matrix::new(dims[k], dims[k], g).expect("square");
            scale_gram(&mut m, n, dims, k);
            m
        })
        .collect()
}

pub(crate) fn zero_grams(dims: &[usize]) -> Vec<Vec<f64>> {
    dims.iter().map(|&p| vec![0.0; p * p]).collect()
}

/// Scaled second moments of every mode over a view, clamping on the fly.
pub(crate) fn grams_all(view: &SeriesView<'_>, tau: Option<f64>, ws: &mut Workspace) -> Vec<Matrix> {
    let mut acc = zero_grams(view.dims);
    let frame = view.frame_len();
    let mut chunk = Vec::new();
    for block in &view.blocks {
        for_each_chunk(block, frame, tau, &mut chunk, |c, nb| grams_chunk(c, view.dims, nb, &mut acc, ws));
    }
    finish_grams(acc, view.len(), view.dims)
}

/// Scaled projected second moments of every mode over a view, clamping on
/// the fly.
pub(crate) fn projected_grams_all(
    view: &SeriesView<'_>,
    tau: Option<f64>,
    e: &[Matrix],
    ws: &mut Workspace,
) -> Vec<Matrix> {
    let et: Vec<Matrix> = e.iter().map(Matrix::transpose).collect();
    let mut acc = zero_grams(view.dims);
    let frame = view.frame_len();
    let mut chunk = Vec::new();
    for block in &view.blocks {
        for_each_chunk(block, frame, tau, &mut chunk, |c, nb| {
            projected_grams_chunk(c, view.dims, nb, &[&et[..]], &mut [&mut acc], ws)
        });
    }
    finish_grams(acc, view.len(), view.dims)
}

/// Reference truncation level
/// `omega * (n p_{-k} / log(n p_{-k}))^{1/(2+2 eps)}` (independent) or
/// `omega * (n p_{-k} / log^K(n p))^{1/(2+2 eps)}` (random field).
pub fn theoretical_tau(
    n: usize,
    dims: &[usize],
    k: usize,
    omega: f64,
    epsilon: f64,
    regime: TauRegime,
) -> Result<f64> {
    check_mode(k, dims.len())?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let p: f64 = dims.iter().map(|&d| d as f64).product();
    let np_minus = n as f64 * p / dims[k] as f64;
    let denom = match regime {
        TauRegime::Independent => np_minus.ln(),
        TauRegime::RandomField => (n as f64 * p).ln().powi(dims.len() as i32),
    };
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument("sample too small for the logarithmic scaling".into()));
    }
    Ok(tau_formula(np_minus, denom, omega, epsilon))
}

fn tau_formula(count: f64, log_term: f64, omega: f64, epsilon: f64) -> f64 {
    omega * (count / log_term).powf(1.0 / (2.0 + 2.0 * epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kron_all;

    fn pseudo_series(dims: &[usize], n: usize, seed: u64, scale: f64) -> TensorSeries {
        let p: usize = dims.iter().product();
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        let data = (0..n * p)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                scale * (((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0)
            })
            .collect();
        TensorSeries::new(dims.to_vec(), n, data).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let t = TruncationLevel::new(3.0).unwrap();
        assert_eq!(t.apply(5.0), 3.0);
        assert_eq!(t.apply(-4.2), -3.0);
        assert_eq!(t.apply(1.5), 1.5);
        assert_eq!(TruncationLevel::INFINITE.apply(-1e300), -1e300);
        assert!(TruncationLevel::new(0.0).is_err());
        assert!(TruncationLevel::new(f64::NAN).is_err());
    }

    #[test]
    fn vector_outer_product() {
        let s = TensorSeries::new(vec![2], 1, vec![1.0, 2.0]).unwrap();
        let g = mode_second_moment(&s, 0, TruncationLevel::INFINITE).unwrap();
        assert_eq!(g, Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap());
    }

    #[test]
    fn second_moment_matches_quadruple_loop() {
        let s = pseudo_series(&[3, 2], 4, 11, 3.0);
        let tau = TruncationLevel::new(1.5).unwrap();
        for k in 0..2 {
            let g = mode_second_moment(&s, k, tau).unwrap();
            let pk = s.dims()[k];
            let other = s.dims()[1 - k];
            for i in 0..pk {
                for ip in 0..pk {
                    let mut acc = 0.0;
                    for l in 0..other {
                        for t in 0..4 {
                            let idx = |a: usize| if k == 0 { a + 3 * l } else { l + 3 * a };
                            acc += tau.apply(s.frame(t)[idx(i)]) * tau.apply(s.frame(t)[idx(ip)]);
                        }
                    }
                    assert!((g[(i, ip)] - acc / (4.0 * other as f64)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn projected_with_full_basis_equals_plain() {
        let s = pseudo_series(&[3, 4, 2], 5, 3, 2.0);
        let tau = TruncationLevel::new(0.8).unwrap();
        let d = Matrix::identity(6);
        let a = projected_second_moment(&s, 1, tau, &d).unwrap();
        let b = mode_second_moment(&s, 1, tau).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        let z = projected_second_moment(&s, 1, tau, &Matrix::zeros(6, 3)).unwrap();
        assert_eq!(z, Matrix::zeros(4, 4));
    }

    #[test]
    fn projected_matches_explicit_projector() {
        let s = pseudo_series(&[3, 4, 2], 5, 5, 2.0);
        let tau = TruncationLevel::new(0.9).unwrap();
        let d = Matrix::from_fn(6, 2, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let g = projected_second_moment(&s, 1, tau, &d).unwrap();
        let ddt = d.matmul(&d.transpose()).unwrap();
        let mut want = Matrix::zeros(4, 4);
        for t in 0..5 {
            let m = truncate_tensor(&s.tensor(t), tau).unfold(1).unwrap();
            want = want.add(&m.matmul(&ddt).unwrap().matmul(&m.transpose()).unwrap()).unwrap();
        }
        let want = want.scaled(1.0 / 30.0);
        assert!(g.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn factored_matches_kronecker_form() {
        let s = pseudo_series(&[3, 4, 5], 6, 9, 2.0);
        let tau = TruncationLevel::new(0.7).unwrap();
        let e: Vec<Matrix> = [(3, 2), (4, 3), (5, 2)]
            .iter()
            .enumerate()
            .map(|(j, &(r, c))| Matrix::from_fn(r, c, |a, b| ((a + 2 * b + j) % 4) as f64 - 1.5))
            .collect();
        for k in 0..3 {
            let others: Vec<&Matrix> = (0..3).rev().filter(|&j| j != k).map(|j| &e[j]).collect();
            let d = kron_all(others);
            let want = projected_second_moment(&s, k, tau, &d).unwrap();
            let got = projected_second_moment_factored(&s, k, tau, &e).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-11, "mode {k}");
        }
    }

    #[test]
    fn theoretical_tau_values() {
        let e = std::f64::consts::E;
        assert!((tau_formula(e, e.ln(), 1.0, 1.0 - 1e-12) - e.powf(0.25)).abs() < 1e-9);
        let v = theoretical_tau(100, &[10, 10, 10], 0, 1.0, 0.5, TauRegime::Independent).unwrap();
        let npm = 100.0 * 100.0f64;
        assert!((v - (npm / npm.ln()).powf(1.0 / 3.0)).abs() < 1e-12);
        let rf = theoretical_tau(100, &[10, 10, 10], 0, 1.0, 0.5, TauRegime::RandomField).unwrap();
        assert!((rf - (npm / (1e5f64).ln().powi(3)).powf(1.0 / 3.0)).abs() < 1e-12);
        assert!(theoretical_tau(100, &[10], 0, 1.0, 1.0, TauRegime::Independent).is_err());
        let a = theoretical_tau(50, &[10, 10], 1, 1.0, 0.3, TauRegime::Independent).unwrap();
        let b = theoretical_tau(500, &[10, 10], 1, 1.0, 0.3, TauRegime::Independent).unwrap();
        assert!(b > a);
    }

    #[test]
    fn chunked_grams_match_single_mode_paths() {
        // frames larger than half a chunk force several chunk boundaries
        let dims = [40, 60, 30];
        let x = pseudo_series(&dims, 5, 11, 2.0);
        let tau = Some(0.7);
        let mut ws = Workspace::default();
        let all = grams_all(&x.view(), tau, &mut ws);
        let e: Vec<Matrix> = dims
            .iter()
            .enumerate()
            .map(|(j, &p)| Matrix::from_fn(p, 2 + j, |a, b| ((a * 7 + b * 3) % 5) as f64 - 2.0))
            .collect();
        let proj = projected_grams_all(&x.view(), tau, &e, &mut ws);
        let tr = truncate(&x, TruncationLevel::new(0.7).unwrap());
        for k in 0..3 {
            let mut g = gram_view(&x.view(), k, tau);
            scale_gram(&mut g, 5, &dims, k);
            assert!(all[k].max_abs_diff(&g) < 1e-12 * (1.0 + g.frobenius_norm()));
            let mut h = projected_gram_view(&tr.view(), k, &e);
            scale_gram(&mut h, 5, &dims, k);
            assert!(proj[k].max_abs_diff(&h) < 1e-10 * (1.0 + h.frobenius_norm()));
        }
    }
}
