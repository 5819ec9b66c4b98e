//! Dense matrices, order-K tensors and tensor time series.
//!
//! Tensors store their entries first-index-fastest, so the mode-1 unfolding
//! of a tensor is its data read as a column-major matrix and
//! `vec(X x_1 A_1 ... x_K A_K) = (A_K ⊗ ... ⊗ A_1) vec(X)`.
//! Modes are 0-based in this API.

use std::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};
use crate::kernels;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    /// A single-column matrix.
    pub fn column_vector(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for (i, x) in v.iter().enumerate() {
            self.data[i * self.cols + j] = *x;
        }
    }

    /// The first `n` columns.
    pub fn leading_columns(&self, n: usize) -> Matrix {
        assert!(n <= self.cols);
        Matrix::from_fn(self.rows, n, |i, j| self[(i, j)])
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        kernels::gemm(
            self.rows,
            self.cols,
            other.cols,
            1.0,
            &self.data,
            self.cols,
            1,
            &other.data,
            other.cols,
            1,
            0.0,
            &mut out.data,
            other.cols,
            1,
        );
        Ok(out)
    }

    /// `self^T * other` without forming the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply ({}x{})^T by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        kernels::gemm(
            self.cols,
            self.rows,
            other.cols,
            1.0,
            &self.data,
            1,
            self.cols,
            &other.data,
            other.cols,
            1,
            0.0,
            &mut out.data,
            other.cols,
            1,
        );
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (br, bc) = b.shape();
    Matrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Kronecker product of a list, `mats[0] ⊗ mats[1] ⊗ ...`; the empty list
/// gives the 1x1 identity.
pub fn kron_all<'a>(mats: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
    mats.into_iter().fold(Matrix::identity(1), |acc, m| kron(&acc, m))
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("tensor order must be at least 1".into()));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("zero extent in dims {dims:?}")));
    }
    Ok(())
}

/// Dense order-K real tensor, first index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_dims(&dims)?;
        let p: usize = dims.iter().product();
        if data.len() != p {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for dims {dims:?}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self { dims: dims.to_vec(), data: vec![0.0; dims.iter().product()] })
    }

    /// Fills the tensor from a function of the (0-based) multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_dims(dims)?;
        let p: usize = dims.iter().product();
        let mut idx = vec![0; dims.len()];
        let mut data = Vec::with_capacity(p);
        for _ in 0..p {
            data.push(f(&idx));
            for (i, d) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < *d {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    /// Canonical linear order, which is also `vec(X)`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        let mut stride = 1;
        for (i, d) in idx.iter().zip(&self.dims) {
            assert!(i < d, "index {idx:?} out of bounds for {:?}", self.dims);
            off += i * stride;
            stride *= d;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    /// Frobenius norm `|X|_2`.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Tensor {
        Tensor { dims: self.dims.clone(), data: self.data.iter().map(|x| c * x).collect() }
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.dims.len() {
            return Err(Error::ModeOutOfRange { mode: k, order: self.dims.len() });
        }
        Ok(())
    }

    /// Mode-k unfolding: the `p_k x p_{-k}` matrix whose columns are the
    /// mode-k fibers, ordered with the remaining indices first-fastest.
    pub fn unfold(&self, k: usize) -> Result<Matrix> {
        self.check_mode(k)?;
        let (left, mid, right) = kernels::layout(&self.dims, k);
        let cols = left * right;
        let mut out = vec![0.0; mid * cols];
        for b in 0..right {
            for i in 0..mid {
                let src = &self.data[left * (i + mid * b)..left * (i + mid * b) + left];
                out[i * cols + left * b..i * cols + left * b + left].copy_from_slice(src);
            }
        }
        Matrix::new(mid, cols, out)
    }

    /// Inverse of [`Tensor::unfold`].
    pub fn fold(m: &Matrix, k: usize, dims: &[usize]) -> Result<Tensor> {
        check_dims(dims)?;
        if k >= dims.len() {
            return Err(Error::ModeOutOfRange { mode: k, order: dims.len() });
        }
        let (left, mid, right) = kernels::layout(dims, k);
        if m.shape() != (mid, left * right) {
            return Err(Error::ShapeMismatch(format!(
                "cannot fold a {}x{} matrix along mode {k} into {dims:?}",
                m.rows(),
                m.cols()
            )));
        }
        let cols = left * right;
        let mut data = vec![0.0; mid * cols];
        for b in 0..right {
            for i in 0..mid {
                let row = &m.data()[i * cols + left * b..i * cols + left * b + left];
                data[left * (i + mid * b)..left * (i + mid * b) + left].copy_from_slice(row);
            }
        }
        Ok(Tensor { dims: dims.to_vec(), data })
    }

    /// Mode-k product `X x_k A` with `A` of shape `m x p_k`.
    pub fn mode_product(&self, a: &Matrix, k: usize) -> Result<Tensor> {
        self.check_mode(k)?;
        if a.cols() != self.dims[k] {
            return Err(Error::ShapeMismatch(format!(
                "mode-{k} product needs {} columns, got {}",
                self.dims[k],
                a.cols()
            )));
        }
        let lay = kernels::layout(&self.dims, k);
        let mut dims = self.dims.clone();
        dims[k] = a.rows();
        let mut data = vec![0.0; lay.0 * a.rows() * lay.2];
        kernels::mode_product(&self.data, lay, a.data(), a.rows(), &mut data);
        Tensor::new(dims, data)
    }

    /// `X x_1 A_1 x_2 ... x_K A_K`.
    pub fn multi_mode_product(&self, mats: &[Matrix]) -> Result<Tensor> {
        if mats.len() != self.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} matrices for an order-{} tensor",
                mats.len(),
                self.order()
            )));
        }
        mats.iter()
            .enumerate()
            .try_fold(self.clone(), |acc, (k, a)| acc.mode_product(a, k))
    }
}

/// A length-n sequence of equally shaped tensors, stored contiguously with
/// time as the slowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSeries {
    dims: Vec<usize>,
    n: usize,
    data: Vec<f64>,
}

impl TensorSeries {
    pub fn new(dims: Vec<usize>, n: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(&dims)?;
        if n == 0 {
            return Err(Error::InvalidArgument("a series needs at least one time point".into()));
        }
        let p: usize = dims.iter().product();
        if data.len() != n * p {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for {n} frames of dims {dims:?}",
                data.len()
            )));
        }
        Ok(Self { dims, n, data })
    }

    pub fn zeros(dims: &[usize], n: usize) -> Result<Self> {
        let p: usize = dims.iter().product();
        Self::new(dims.to_vec(), n, vec![0.0; n * p])
    }

    pub fn from_tensors(items: &[Tensor]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty tensor list".into()))?;
        if items.iter().any(|t| t.dims() != first.dims()) {
            return Err(Error::ShapeMismatch("series items differ in shape".into()));
        }
        let mut data = Vec::with_capacity(items.len() * first.numel());
        for t in items {
            data.extend_from_slice(t.data());
        }
        Self::new(first.dims().to_vec(), items.len(), data)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Entries per frame, `p`.
    pub fn frame_len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let p = self.frame_len();
        &self.data[t * p..(t + 1) * p]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [f64] {
        let p = self.frame_len();
        &mut self.data[t * p..(t + 1) * p]
    }

    pub fn tensor(&self, t: usize) -> Tensor {
        Tensor { dims: self.dims.clone(), data: self.frame(t).to_vec() }
    }

    pub fn tensors(&self) -> Vec<Tensor> {
        (0..self.n).map(|t| self.tensor(t)).collect()
    }

    /// Frames in `range`, copied.
    pub fn slice(&self, range: Range<usize>) -> Result<TensorSeries> {
        if range.start >= range.end || range.end > self.n {
            return Err(Error::InvalidArgument(format!(
                "time range {range:?} invalid for {} frames",
                self.n
            )));
        }
        let p = self.frame_len();
        Self::new(
            self.dims.clone(),
            range.len(),
            self.data[range.start * p..range.end * p].to_vec(),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TensorSeries {
        TensorSeries { dims: self.dims.clone(), n: self.n, data: self.data.iter().map(|x| f(*x)).collect() }
    }

    /// The whole series as a view.
    pub(crate) fn view(&self) -> SeriesView<'_> {
        SeriesView { dims: &self.dims, blocks: vec![&self.data] }
    }
}

/// Borrowed subset of a series' frames: a list of contiguous frame blocks.
#[derive(Debug, Clone)]
pub(crate) struct SeriesView<'a> {
    pub dims: &'a [usize],
    pub blocks: Vec<&'a [f64]>,
}

impl SeriesView<'_> {
    pub fn frame_len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum::<usize>() / self.frame_len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(dims: &[usize]) -> Tensor {
        let p: usize = dims.iter().product();
        Tensor::new(dims.to_vec(), (1..=p).map(|x| x as f64).collect()).unwrap()
    }

    #[test]
    fn unfold_of_matrix_mode_one_is_the_matrix() {
        // 2x3 matrix with column-major entries 1..6
        let x = seq(&[2, 3]);
        let m = x.unfold(0).unwrap();
        assert_eq!(m, Matrix::from_rows(&[vec![1.0, 3.0, 5.0], vec![2.0, 4.0, 6.0]]).unwrap());
    }

    #[test]
    fn unfold_mode_two_enumerates_fibers() {
        let x = seq(&[2, 2, 2]);
        let m = x.unfold(1).unwrap();
        // brute force: column j = i1 + 2*i3 holds X[i1, :, i3]
        let mut want = Matrix::zeros(2, 4);
        for i1 in 0..2 {
            for i2 in 0..2 {
                for i3 in 0..2 {
                    want[(i2, i1 + 2 * i3)] = x.get(&[i1, i2, i3]);
                }
            }
        }
        assert_eq!(m, want);
        assert_eq!(m, Matrix::from_rows(&[vec![1.0, 2.0, 5.0, 6.0], vec![3.0, 4.0, 7.0, 8.0]]).unwrap());
    }

    #[test]
    fn unfold_rejects_bad_mode() {
        assert_eq!(seq(&[2, 2]).unfold(2), Err(Error::ModeOutOfRange { mode: 2, order: 2 }));
    }

    #[test]
    fn fold_edge_cases() {
        let m = Matrix::new(1, 1, vec![4.5]).unwrap();
        assert_eq!(Tensor::fold(&m, 0, &[1]).unwrap().data(), &[4.5]);
        let z = Tensor::fold(&Matrix::zeros(3, 20), 0, &[3, 4, 5]).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
        assert!(Tensor::fold(&Matrix::zeros(3, 19), 0, &[3, 4, 5]).is_err());
    }

    #[test]
    fn mode_product_with_ones_sums_fibers() {
        let x = seq(&[2, 2]); // [[1,3],[2,4]]
        let ones = Matrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let s1 = x.mode_product(&ones, 0).unwrap();
        assert_eq!(s1.dims(), &[1, 2]);
        // brute force: sum over i1 of X[i1, i2]
        let want: Vec<f64> = (0..2).map(|i2| (0..2).map(|i1| x.get(&[i1, i2])).sum()).collect();
        assert_eq!(s1.data(), want.as_slice());
        assert_eq!(s1.data(), &[3.0, 7.0]);
        let s2 = x.mode_product(&ones, 1).unwrap();
        assert_eq!(s2.data(), &[4.0, 6.0]);
    }

    #[test]
    fn mode_product_identity_and_mismatch() {
        let x = seq(&[3, 2, 4]);
        assert_eq!(x.mode_product(&Matrix::identity(2), 1).unwrap(), x);
        assert!(x.mode_product(&Matrix::identity(3), 1).is_err());
    }

    #[test]
    fn multi_mode_product_k1_is_matvec() {
        let x = Tensor::new(vec![3], vec![1.0, 2.0, 3.0]).unwrap();
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.5, 2.0, 0.0]]).unwrap();
        let y = x.multi_mode_product(std::slice::from_ref(&a)).unwrap();
        assert_eq!(y.data(), a.matvec(x.data()).unwrap().as_slice());
    }

    #[test]
    fn kron_small_cases() {
        let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(kron(&Matrix::new(1, 1, vec![2.0]).unwrap(), &b), b.scaled(2.0));
        assert_eq!(kron(&Matrix::identity(2), &Matrix::identity(3)), Matrix::identity(6));
    }

    #[test]
    fn series_view_and_slice() {
        let s = TensorSeries::new(vec![2], 5, (0..10).map(f64::from).collect()).unwrap();
        assert_eq!(s.view().len(), 5);
        assert_eq!(s.slice(1..3).unwrap().data(), &[2.0, 3.0, 4.0, 5.0]);
        assert!(TensorSeries::new(vec![2], 0, vec![]).is_err());
    }
}
