//! Dense symmetric eigendecomposition and spectral statistics.
//!
//! The eigensolver reduces to tridiagonal form with Householder reflections
//! and then runs implicit-shift QL iterations (the EISPACK `tql2` scheme).
//! Eigenvectors are accumulated as rows so every inner loop walks
//! contiguous memory.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::laws::LimitLaw;
use crate::matrix::Matrix;
use crate::{Error, Result};

/// QL sweeps allowed per eigenvalue.
pub const MAX_SWEEPS: usize = 50;

/// Relative asymmetry accepted by [`symmetric_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Sorted spectrum of a symmetric matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    eigenvalues: Vec<f64>,
    norm: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    source: Option<EnsembleSpec>,
}

impl SpectralSummary {
    /// Sorts the eigenvalues ascending. Panics on NaN.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
        let norm = match (eigenvalues.first(), eigenvalues.last()) {
            (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
            _ => 0.0,
        };
        Self {
            eigenvalues,
            norm,
            source: None,
        }
    }

    pub fn with_source(mut self, spec: EnsembleSpec) -> Self {
        self.source = Some(spec);
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn source(&self) -> Option<&EnsembleSpec> {
        self.source.as_ref()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `(1/N)·#{i : λ_i ≤ x}`.
    pub fn esd_cdf(&self, x: f64) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        let below = self.eigenvalues.partition_point(|&l| l <= x);
        below as f64 / self.eigenvalues.len() as f64
    }

    /// `(1/N)·Σ λ_i^s`.
    pub fn moment(&self, s: u32) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.eigenvalues.iter().map(|l| l.powi(s as i32)).sum();
        sum / self.eigenvalues.len() as f64
    }
}

/// Householder tridiagonalization. Returns diagonal `d`, off-diagonal `e`
/// (`e[i]` couples `i` and `i+1`, `e[n−1] = 0`) and, if requested, the
/// orthogonal `Q` with `A = Q T Qᵀ`.
fn tridiagonalize(a: &Matrix, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<Matrix>) {
    let n = a.rows();
    let mut w = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut betas = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        d[k] = w[(k, k)];
        // Reflect x = A[k+1.., k] (read from row k by symmetry) onto α·e1.
        let (alpha, beta) = {
            let x = &mut w.row_mut(k)[k + 1..];
            let tail: f64 = x[1..].iter().map(|v| v * v).sum();
            if tail == 0.0 {
                (x[0], 0.0)
            } else {
                let norm = (x[0] * x[0] + tail).sqrt();
                let alpha = if x[0] > 0.0 { -norm } else { norm };
                let beta = 1.0 / (norm * norm - alpha * x[0]);
                x[0] -= alpha;
                (alpha, beta)
            }
        };
        e[k] = alpha;
        betas[k] = beta;
        if beta == 0.0 {
            continue;
        }
        let v: Vec<f64> = w.row(k)[k + 1..].to_vec();
        let m = v.len();
        // p = β B v, then w = p − (β/2)(pᵀv) v, then B −= v wᵀ + w vᵀ.
        for (i, pi) in p[..m].iter_mut().enumerate() {
            let row = &w.row(k + 1 + i)[k + 1..];
            *pi = beta * row.iter().zip(&v).map(|(b, v)| b * v).sum::<f64>();
        }
        let kk = 0.5 * beta * p[..m].iter().zip(&v).map(|(p, v)| p * v).sum::<f64>();
        for (pi, vi) in p[..m].iter_mut().zip(&v) {
            *pi -= kk * vi;
        }
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut w.row_mut(k + 1 + i)[k + 1..];
            for ((b, vj), wj) in row.iter_mut().zip(&v).zip(&p[..m]) {
                *b -= vi * wj + wi * vj;
            }
        }
    }
    if n > 0 {
        d[n - 1] = w[(n - 1, n - 1)];
        e[n - 1] = 0.0;
    }

    let q = want_q.then(|| {
        // Backward accumulation Q = H_0 H_1 … H_{n−2}.
        let mut q = Matrix::identity(n);
        let mut acc = vec![0.0; n];
        for k in (0..n.saturating_sub(1)).rev() {
            let beta = betas[k];
            if beta == 0.0 {
                continue;
            }
            let v = &w.row(k)[k + 1..];
            let acc = &mut acc[k + 1..];
            acc.iter_mut().for_each(|x| *x = 0.0);
            for (i, vi) in v.iter().enumerate() {
                for (a, qij) in acc.iter_mut().zip(&q.row(k + 1 + i)[k + 1..]) {
                    *a += vi * qij;
                }
            }
            for (i, vi) in v.iter().enumerate() {
                let s = beta * vi;
                for (qij, a) in q.row_mut(k + 1 + i)[k + 1..].iter_mut().zip(acc.iter()) {
                    *qij -= s * a;
                }
            }
        }
        q
    });
    (d, e, q)
}

/// Implicit QL on a symmetric tridiagonal matrix. `zt`, when present, holds
/// eigenvectors as rows and receives every rotation.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::NumericalFailure(format!(
                        "QL iteration did not converge for eigenvalue {l} after {MAX_SWEEPS} sweeps"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        rotate_rows(z, i, c, s);
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

fn rotate_rows(z: &mut Matrix, i: usize, c: f64, s: f64) {
    let (head, tail) = z.adjacent_rows_mut(i);
    for (zi, zi1) in head.iter_mut().zip(tail.iter_mut()) {
        let h = *zi1;
        *zi1 = s * *zi + c * h;
        *zi = c * *zi - s * h;
    }
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "{}×{} matrix is not square",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.max_abs();
    if m.asymmetry() > SYMMETRY_TOL * scale {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (asymmetry {:e}, scale {scale:e})",
            m.asymmetry()
        )));
    }
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    Ok(())
}

/// Eigenvalues ascending and, if requested, a matrix whose columns are the
/// matching orthonormal eigenvectors.
pub fn symmetric_eigen(
    m: &Matrix,
    want_vectors: bool,
) -> Result<(SpectralSummary, Option<Matrix>)> {
    check_symmetric(m)?;
    let n = m.rows();
    if n == 0 {
        return Ok((
            SpectralSummary::from_eigenvalues(Vec::new()),
            want_vectors.then(|| Matrix::zeros(0, 0)),
        ));
    }
    let (mut d, mut e, q) = tridiagonalize(m, want_vectors);
    let mut zt = q.map(|q| q.transpose());
    tql(&mut d, &mut e, zt.as_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = zt.map(|zt| Matrix::from_fn(n, n, |row, col| zt[(order[col], row)]));
    Ok((SpectralSummary::from_eigenvalues(values), vectors))
}

pub fn eigenvalues(m: &Matrix) -> Result<SpectralSummary> {
    Ok(symmetric_eigen(m, false)?.0)
}

/// `max(|λ_1|, |λ_N|)` from the full eigensolver.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?.norm())
}

/// Number of eigenvalues of the tridiagonal `(d, e)` strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Spectral norm by tridiagonalization and Sturm-sequence bisection for the
/// two extreme eigenvalues. Skips the QL sweeps entirely.
pub fn spectral_norm_bisection(m: &Matrix) -> Result<f64> {
    check_symmetric(m)?;
    let n = m.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let (d, e, _) = tridiagonalize(m, false);
    let radius = (0..n)
        .map(|i| {
            let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
            d[i].abs() + left + e[i].abs()
        })
        .fold(0.0, f64::max);
    let (lo, hi) = (-radius - 1e-300, radius + 1e-300);
    // k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
    let kth = |k: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(&d, &e, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    Ok(kth(0).abs().max(kth(n - 1).abs()))
}

/// `(1/N)·Tr(M^s)`, from the eigenvalues. For `s ≤ 4` the result is also
/// checked against a direct matrix-power trace.
pub fn trace_moment(m: &Matrix, s: u32) -> Result<f64> {
    if s == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    let summary = eigenvalues(m)?;
    let via_eigen = summary.moment(s);
    if s <= 4 {
        let direct = power_trace(m, s) / m.rows() as f64;
        let scale = summary
            .eigenvalues()
            .iter()
            .map(|l| l.abs().powi(s as i32))
            .sum::<f64>()
            / m.rows() as f64;
        if (direct - via_eigen).abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NumericalFailure(format!(
                "trace moment {s}: eigenvalues give {via_eigen}, direct trace {direct}"
            )));
        }
    }
    Ok(via_eigen)
}

/// `Tr(M^s)` by explicit products; `s ≤ 4`.
pub fn power_trace(m: &Matrix, s: u32) -> f64 {
    let n = m.rows();
    let pair_sum = |a: &Matrix, b: &Matrix| -> f64 {
        (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)] * b[(j, i)]).sum::<f64>())
            .sum()
    };
    match s {
        1 => m.trace(),
        2 => pair_sum(m, m),
        3 => pair_sum(&m.matmul(m), m),
        4 => {
            let sq = m.matmul(m);
            pair_sum(&sq, &sq)
        }
        _ => panic!("power_trace supports s ≤ 4"),
    }
}

/// Sup-norm distance between the ESD and a continuous cdf, evaluated at the
/// jumps: `max_i max(i/N − F(λ_i), F(λ_i) − (i−1)/N)`.
pub fn ks_distance_with(eigenvalues: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = eigenvalues.len() as f64;
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let f = cdf(l);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

pub fn ks_distance(summary: &SpectralSummary, law: &LimitLaw) -> f64 {
    ks_distance_with(summary.eigenvalues(), |x| law.cdf(x))
}

/// One CSV row of sorted eigenvalues.
pub fn write_spectrum_row<W: Write>(mut w: W, summary: &SpectralSummary) -> Result<()> {
    let cells: Vec<String> = summary.eigenvalues().iter().map(f64::to_string).collect();
    writeln!(w, "{}", cells.join(","))?;
    Ok(())
}
