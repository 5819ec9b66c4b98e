//! Raw-slice kernels shared by the tensor and moment code.
//!
//! Every buffer is addressed through a `(left, mid, right)` layout: element
//! `(a, i, b)` lives at `a + left * (i + mid * b)`. For a tensor with
//! first-index-fastest storage and mode `k`, `left = p_1 ... p_{k-1}`,
//! `mid = p_k` and `right = p_{k+1} ... p_K` (times the number of frames when
//! the buffer holds a whole series).

/// Upper bound on the scratch buffer used when permuting data for Gram
/// products, in doubles.
const SCRATCH_LIMIT: usize = 1 << 21;

/// Slabs smaller than this many multiply-adds are handled by plain loops.
const SMALL_SLAB: usize = 4096;

pub(crate) fn layout(dims: &[usize], k: usize) -> (usize, usize, usize) {
    let left: usize = dims[..k].iter().product();
    let right: usize = dims[k + 1..].iter().product();
    (left, dims[k], right)
}

/// `C = alpha * A * B + beta * C` over arbitrary strides.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    beta: f64,
    c: &mut [f64],
    rsc: usize,
    csc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert!(k == 0 || a.len() > (m - 1) * rsa + (k - 1) * csa);
    debug_assert!(k == 0 || b.len() > (k - 1) * rsb + (n - 1) * csb);
    assert!(c.len() > (m - 1) * rsc + (n - 1) * csc);
    if k == 0 {
        for i in 0..m {
            for j in 0..n {
                c[i * rsc + j * csc] *= beta;
            }
        }
        return;
    }
    assert!(a.len() > (m - 1) * rsa + (k - 1) * csa);
    assert!(b.len() > (k - 1) * rsb + (n - 1) * csb);
    // SAFETY: the asserts above keep every strided access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

/// `dst(a, j, b) = sum_i mat[j, i] * src(a, i, b)` where `mat` is row-major
/// `m x mid`. `dst` must hold `left * m * right` values.
pub(crate) fn mode_product(
    src: &[f64],
    (left, mid, right): (usize, usize, usize),
    mat: &[f64],
    m: usize,
    dst: &mut [f64],
) {
    debug_assert_eq!(src.len(), left * mid * right);
    debug_assert_eq!(mat.len(), m * mid);
    debug_assert_eq!(dst.len(), left * m * right);
    if left == 1 {
        gemm(m, mid, right, 1.0, mat, mid, 1, src, 1, mid, 0.0, dst, 1, m);
        return;
    }
    let in_slab = left * mid;
    let out_slab = left * m;
    let small = left * mid * m < SMALL_SLAB;
    for b in 0..right {
        let s = &src[b * in_slab..(b + 1) * in_slab];
        let d = &mut dst[b * out_slab..(b + 1) * out_slab];
        if small {
            d.fill(0.0);
            for j in 0..m {
                let dj = &mut d[j * left..(j + 1) * left];
                for i in 0..mid {
                    let w = mat[j * mid + i];
                    if w == 0.0 {
                        continue;
                    }
                    let si = &s[i * left..(i + 1) * left];
                    for (x, y) in dj.iter_mut().zip(si) {
                        *x += w * y;
                    }
                }
            }
        } else {
            gemm(left, mid, m, 1.0, s, 1, left, mat, 1, mid, 0.0, d, 1, left);
        }
    }
}

#[inline]
fn clamp(x: f64, tau: Option<f64>) -> f64 {
    match tau {
        Some(t) => x.clamp(-t, t),
        None => x,
    }
}

/// Accumulates `g += sum_{a,b} x(a,i,b) x(a,i',b)` into the row-major
/// `mid x mid` matrix `g`, clamping every entry to `[-tau, tau]` first when
/// `tau` is given.
pub(crate) fn mode_gram_acc(
    src: &[f64],
    (left, mid, right): (usize, usize, usize),
    tau: Option<f64>,
    g: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    debug_assert_eq!(src.len(), left * mid * right);
    debug_assert_eq!(g.len(), mid * mid);
    if src.is_empty() {
        return;
    }
    if left == 1 && tau.is_none() {
        gemm(mid, right, mid, 1.0, src, 1, mid, src, mid, 1, 1.0, g, mid, 1);
        return;
    }
    let slab = left * mid;
    let per_chunk = (SCRATCH_LIMIT / slab).clamp(1, right);
    scratch.resize(per_chunk * slab, 0.0);
    let mut b0 = 0;
    while b0 < right {
        let nb = per_chunk.min(right - b0);
        let buf = &mut scratch[..nb * slab];
        for bb in 0..nb {
            let s = &src[(b0 + bb) * slab..(b0 + bb + 1) * slab];
            let d = &mut buf[bb * slab..(bb + 1) * slab];
            if left == 1 {
                for (x, y) in d.iter_mut().zip(s) {
                    *x = clamp(*y, tau);
                }
            } else {
                // column c = a + left * bb of the mid x (left * nb) matrix
                for i in 0..mid {
                    for a in 0..left {
                        d[i + mid * a] = clamp(s[a + left * i], tau);
                    }
                }
            }
        }
        let cols = left * nb;
        gemm(mid, cols, mid, 1.0, buf, 1, mid, buf, mid, 1, 1.0, g, mid, 1);
        b0 += nb;
    }
}

/// Makes a row-major square matrix exactly symmetric.
pub(crate) fn symmetrize(g: &mut [f64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (g[i * n + j] + g[j * n + i]);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
}
