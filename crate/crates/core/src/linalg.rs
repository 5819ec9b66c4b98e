//! Symmetric eigendecomposition, sign canonicalization and Varimax rotation.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Orders up to this size use cyclic Jacobi; larger ones use Householder
/// tridiagonalization followed by implicit QL.
pub const JACOBI_MAX_ORDER: usize = 12;

const JACOBI_MAX_SWEEPS: usize = 100;
const QL_MAX_ITER: usize = 60;

/// Leading eigenpairs of a symmetric matrix, eigenvalues descending and
/// eigenvectors stored as orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Top-`r` eigenpairs of the symmetric matrix `s`, with each eigenvector
/// sign-canonicalized (largest-magnitude entry positive).
pub fn sym_eig(s: &Matrix, r: usize) -> Result<EigenPairs> {
    let n = check_symmetric(s)?;
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { requested: r, order: n });
    }
    let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let (values, vectors) = if n <= JACOBI_MAX_ORDER {
        jacobi_full(&sym, 1e-15)?
    } else {
        tridiagonal_ql_full(&sym)?
    };
    let top = select_top(&values, &vectors, r);
    let vectors = canonical_sign_lenient(&top.vectors);
    let pairs = EigenPairs { values: top.values, vectors };
    check_residual(&sym, &pairs)?;
    Ok(pairs)
}

/// All eigenvalues of a symmetric matrix, descending.
pub fn sym_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    let n = check_symmetric(s)?;
    Ok(sym_eig(s, n)?.values)
}

/// Full decomposition by cyclic Jacobi rotations, iterated until the
/// off-diagonal mass falls below `tol` relative to the Frobenius norm.
/// Returns all pairs, descending, without sign canonicalization.
pub fn jacobi_eigen(s: &Matrix, tol: f64) -> Result<EigenPairs> {
    let n = check_symmetric(s)?;
    let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let (values, vectors) = jacobi_full(&sym, tol)?;
    Ok(select_top(&values, &vectors, n))
}

/// Full decomposition by Householder tridiagonalization and implicit QL.
/// Returns all pairs, descending, without sign canonicalization.
pub fn tridiagonal_ql_eigen(s: &Matrix) -> Result<EigenPairs> {
    let n = check_symmetric(s)?;
    let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let (values, vectors) = tridiagonal_ql_full(&sym)?;
    Ok(select_top(&values, &vectors, n))
}

fn check_symmetric(s: &Matrix) -> Result<usize> {
    if !s.is_square() {
        return Err(Error::NotSquare { rows: s.rows(), cols: s.cols() });
    }
    let n = s.rows();
    let scale = s.data().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            asym = asym.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if !asym.is_finite() || asym > 1e-8 * (1.0 + scale) {
        return Err(Error::NotSymmetric(asym));
    }
    if s.data().iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(n)
}

/// Sorts descending and keeps the first `r` pairs. `vectors` holds the
/// eigenvectors as columns of a row-major `n x n` matrix.
fn select_top(values: &[f64], vectors: &Matrix, r: usize) -> EigenPairs {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let order = &order[..r];
    EigenPairs {
        values: order.iter().map(|&j| values[j]).collect(),
        vectors: Matrix::from_fn(n, r, |i, c| vectors[(i, order[c])]),
    }
}

fn check_residual(s: &Matrix, pairs: &EigenPairs) -> Result<()> {
    let n = s.rows();
    let lead = pairs.values.first().map_or(0.0, |v| v.abs());
    let tol = 1e-8 * (1.0 + lead);
    let mut worst = 0.0f64;
    for (j, mu) in pairs.values.iter().enumerate() {
        let v = pairs.vectors.column(j);
        let sv = s.matvec(&v)?;
        let res = (0..n).map(|i| (sv[i] - mu * v[i]).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(res);
    }
    if worst > tol || !worst.is_finite() {
        return Err(Error::NoConvergence { residual: worst });
    }
    Ok(())
}

fn jacobi_full(s: &Matrix, tol: f64) -> Result<(Vec<f64>, Matrix)> {
    let n = s.rows();
    let mut a = s.data().to_vec();
    // v is stored transposed: row j holds eigenvector j
    let mut v = Matrix::identity(n).into_data();
    let norm = s.frobenius_norm();
    if norm == 0.0 {
        return Ok((vec![0.0; n], Matrix::identity(n)));
    }
    let off = |a: &[f64]| -> f64 {
        let mut o = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                o += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        o.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > tol * norm {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { residual: off(&a) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // rows p and q
                for k in 0..n {
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    a[p * n + k] = c * akp - sn * akq;
                    a[q * n + k] = sn * akp + c * akq;
                }
                // columns p and q
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vp = v[p * n + k];
                    let vq = v[q * n + k];
                    v[p * n + k] = c * vp - sn * vq;
                    v[q * n + k] = sn * vp + c * vq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vt = Matrix::new(n, n, v)?;
    Ok((values, vt.transpose()))
}

fn tridiagonal_ql_full(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = s.rows();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| s.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    let vectors = Matrix::from_fn(n, n, |i, j| v[i][j]);
    Ok((d, vectors))
}

/// Householder reduction to tridiagonal form, accumulating the
/// transformation in `v`.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iterations on the tridiagonal form.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_ITER {
                    return Err(Error::NoConvergence { residual: e[l].abs() });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Flips each column so that its largest-magnitude entry is positive (ties go
/// to the lowest index). Zero columns are an error.
pub fn canonical_sign(vectors: &Matrix) -> Result<Matrix> {
    let mut out = vectors.clone();
    for j in 0..vectors.cols() {
        let (arg, best) = largest_entry(vectors, j);
        if best == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        if vectors[(arg, j)] < 0.0 {
            for i in 0..vectors.rows() {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Like [`canonical_sign`] but leaves zero columns untouched.
fn canonical_sign_lenient(vectors: &Matrix) -> Matrix {
    let mut out = vectors.clone();
    for j in 0..vectors.cols() {
        let (arg, _) = largest_entry(vectors, j);
        if vectors[(arg, j)] < 0.0 {
            for i in 0..vectors.rows() {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    out
}

fn largest_entry(m: &Matrix, j: usize) -> (usize, f64) {
    let mut arg = 0;
    let mut best = 0.0;
    for i in 0..m.rows() {
        let a = m[(i, j)].abs();
        if a > best {
            best = a;
            arg = i;
        }
    }
    (arg, best)
}

/// Raw Varimax criterion: the sum over columns of the variance of the
/// squared loadings.
pub fn varimax_criterion(loadings: &Matrix) -> f64 {
    let p = loadings.rows() as f64;
    (0..loadings.cols())
        .map(|j| {
            let sq: Vec<f64> = (0..loadings.rows()).map(|i| loadings[(i, j)].powi(2)).collect();
            let m2 = sq.iter().sum::<f64>() / p;
            let m4 = sq.iter().map(|x| x * x).sum::<f64>() / p;
            m4 - m2 * m2
        })
        .sum()
}

/// Result of a Varimax rotation: `rotated = loadings * rotation`.
#[derive(Debug, Clone)]
pub struct Varimax {
    pub rotated: Matrix,
    pub rotation: Matrix,
    /// Criterion value after each sweep, starting with the input's.
    pub trace: Vec<f64>,
}

/// Raw (not row-normalized) Varimax by successive planar rotations.
pub fn varimax(loadings: &Matrix) -> Varimax {
    let (p, r) = loadings.shape();
    let mut l = loadings.clone();
    let mut rot = Matrix::identity(r);
    let mut trace = vec![varimax_criterion(&l)];
    if r < 2 || p == 0 {
        return Varimax { rotated: l, rotation: rot, trace };
    }
    let pf = p as f64;
    for _ in 0..200 {
        for a in 0..r {
            for b in a + 1..r {
                let (mut sa, mut sb, mut sc, mut sd) = (0.0, 0.0, 0.0, 0.0);
                for i in 0..p {
                    let x = l[(i, a)];
                    let y = l[(i, b)];
                    let u = x * x - y * y;
                    let v = 2.0 * x * y;
                    sa += u;
                    sb += v;
                    sc += u * u - v * v;
                    sd += 2.0 * u * v;
                }
                let num = sd - 2.0 * sa * sb / pf;
                let den = sc - (sa * sa - sb * sb) / pf;
                if num.abs() < 1e-15 * (den.abs() + 1e-300) || (num == 0.0 && den >= 0.0) {
                    continue;
                }
                let phi = 0.25 * num.atan2(den);
                let (s, c) = phi.sin_cos();
                for i in 0..p {
                    let x = l[(i, a)];
                    let y = l[(i, b)];
                    l[(i, a)] = c * x + s * y;
                    l[(i, b)] = -s * x + c * y;
                }
                for i in 0..r {
                    let x = rot[(i, a)];
                    let y = rot[(i, b)];
                    rot[(i, a)] = c * x + s * y;
                    rot[(i, b)] = -s * x + c * y;
                }
            }
        }
        let crit = varimax_criterion(&l);
        let prev = *trace.last().unwrap();
        trace.push(crit);
        if (crit - prev).abs() < 1e-8 {
            break;
        }
    }
    Varimax { rotated: l, rotation: rot, trace }
}
