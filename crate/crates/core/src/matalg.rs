//! Dense symmetric linear algebra for the estimator: cyclic Jacobi eigensolver,
//! SPD inverse square root, exact joint diagonalization (EJD), vectorization
//! operators, the duplication matrix, Moore-Penrose pseudoinverse and the
//! eigenstructure Jacobian of the sample wavelet variance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative SPD threshold: min eigenvalue must exceed this times the max.
pub const SPD_REL_TOL: f64 = 1e-12;
/// Relative eigengap below which joint diagonalization is flagged degenerate.
pub const EIGENGAP_WARN: f64 = 1e-3;

/// Eigendecomposition of a symmetric matrix with the identifiability
/// convention: eigenvalues ascending, first-row entries of the eigenvector
/// matrix nonnegative.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    /// Ascending eigenvalues.
    pub values: DVector<f64>,
    /// Orthogonal matrix, column i paired with `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl EigDecomp {
    /// Smallest relative gap between adjacent sorted eigenvalues.
    pub fn min_relative_gap(&self) -> f64 {
        let n = self.values.len();
        let mut gap = f64::INFINITY;
        for i in 0..n.saturating_sub(1) {
            let a = self.values[i];
            let b = self.values[i + 1];
            let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            gap = gap.min((b - a).abs() / scale);
        }
        gap
    }
}

fn check_square(a: &DMatrix<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("expected square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(a.nrows())
}

fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized first; asymmetry beyond `1e-10 * max|S|` is an
/// error. Convergence requires the off-diagonal Frobenius norm to fall below
/// `1e-14 * ||S||_F` within 100 sweeps.
pub fn jacobi_eigh(s: &DMatrix<f64>) -> Result<EigDecomp> {
    let n = check_square(s)?;
    let scale = max_abs(s).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in (i + 1)..n {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-10 * scale.max(1.0) {
                return Err(Error::Domain(format!(
                    "matrix is not symmetric: |S[{i},{j}] - S[{j},{i}]| = {:e}",
                    (s[(i, j)] - s[(j, i)]).abs()
                )));
            }
        }
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (s[(i, j)] + s[(j, i)]);
        }
    }
    let mut v: DMatrix<f64> = DMatrix::identity(n, n);
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let target = 1e-14 * frob;

    let mut converged = false;
    for _sweep in 0..100 {
        let off: f64 = {
            let mut sum = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    sum += 2.0 * a[(p, q)] * a[(p, q)];
                }
            }
            sum.sqrt()
        };
        if off < target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                let t = if theta.abs() > 1e150 {
                    // Avoid overflow in theta^2; rotation angle ~ 1/(2 theta).
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // A <- J^T A J on rows/cols p and q.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence("Jacobi eigensolver did not converge in 100 sweeps".into()));
    }

    // Sort ascending; stable in the original column order on ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap().then(i.cmp(&j)));
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[(src, src)];
        let sign = if v[(0, src)] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, dst)] = sign * v[(r, src)];
        }
    }
    Ok(EigDecomp { values, vectors })
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inv_sqrt_spd(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = jacobi_eigh(c)?;
    let n = c.nrows();
    let max_eig = eig.values[n - 1];
    let min_eig = eig.values[0];
    if !(min_eig > SPD_REL_TOL * max_eig && max_eig > 0.0) {
        return Err(Error::NotSpd { min_eig, max_eig });
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += eig.vectors[(i, k)] * eig.vectors[(j, k)] / eig.values[k].sqrt();
            }
            w[(i, j)] = acc;
        }
    }
    Ok(w)
}

/// Output of the exact joint diagonalization of (C0, C1).
#[derive(Debug, Clone)]
pub struct EjdResult {
    /// Demixing matrix B = Pi * Q0 * W.
    pub b: DMatrix<f64>,
    /// Whitener W = C0^{-1/2}.
    pub w: DMatrix<f64>,
    /// Sign-fixed rotation, rows are eigenvectors of W C1 W.
    pub q: DMatrix<f64>,
    /// Diagonal of Q W C1 W Q^T, ascending.
    pub lambda: DVector<f64>,
    /// Smallest relative gap between adjacent eigenvalues of W C1 W.
    pub eigengap: f64,
    /// Diagonal +-1 sign matrix applied so that diag(Q) >= 0.
    pub sign_matrix: DVector<f64>,
    /// Set when `eigengap` is below the warning threshold.
    pub degenerate: bool,
    /// Set when a diagonal entry of Q was exactly zero and +1 was chosen.
    pub zero_diagonal: bool,
}

/// Exact joint diagonalization: whiten by W = C0^{-1/2}, rotate by the
/// eigenbasis of W C1 W, and return B = Q W with B C0 B^T = I and B C1 B^T
/// diagonal.
pub fn ejd(c0: &DMatrix<f64>, c1: &DMatrix<f64>) -> Result<EjdResult> {
    let n = check_square(c0)?;
    if c1.nrows() != n || c1.ncols() != n {
        return Err(Error::Dimension("C0 and C1 must have equal size".into()));
    }
    let w = inv_sqrt_spd(c0)?;
    let m = &w * c1 * &w;
    let eig = jacobi_eigh(&m)?;
    let eigengap = eig.min_relative_gap();

    // Paper convention: W C1 W = Q^T D Q, so Q has the eigenvectors as rows.
    let q0 = eig.vectors.transpose();
    let mut sign = DVector::from_element(n, 1.0);
    let mut zero_diagonal = false;
    for i in 0..n {
        if q0[(i, i)] < 0.0 {
            sign[i] = -1.0;
        } else if q0[(i, i)] == 0.0 {
            zero_diagonal = true;
        }
    }
    let mut q = q0;
    for i in 0..n {
        if sign[i] < 0.0 {
            for j in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let b = &q * &w;
    Ok(EjdResult {
        b,
        w,
        q,
        lambda: eig.values,
        eigengap,
        sign_matrix: sign,
        degenerate: eigengap < EIGENGAP_WARN,
        zero_diagonal,
    })
}

/// Lower-triangular vectorization (s11, s21, ..., sn1, s22, s32, ..., snn).
pub fn vec_s(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in j..n {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// Diagonal vectorization.
pub fn vec_d(a: &DMatrix<f64>) -> Vec<f64> {
    (0..a.nrows()).map(|i| a[(i, i)]).collect()
}

/// Column-major full vectorization.
pub fn vec_full(a: &DMatrix<f64>) -> Vec<f64> {
    let (n, m) = (a.nrows(), a.ncols());
    let mut out = Vec::with_capacity(n * m);
    for j in 0..m {
        for i in 0..n {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// Index of entry (i, j), i >= j, inside `vec_s` of an n x n matrix.
fn vec_s_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    // Columns 0..j contribute n, n-1, ..., n-j+1 entries.
    j * n - j * (j + 1) / 2 + j + (i - j)
}

/// The duplication matrix D with D vec_s(A)^T = vec(A + A^T - dg(A))^T for
/// lower-triangular (equivalently symmetric-pattern) A.
pub fn duplication(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n * n, n * (n + 1) / 2);
    for j in 0..n {
        for i in 0..n {
            let full = j * n + i;
            let (lo, hi) = if i >= j { (i, j) } else { (j, i) };
            d[(full, vec_s_index(n, lo, hi))] = 1.0;
        }
    }
    d
}

/// Moore-Penrose pseudoinverse. Symmetric inputs go through the Jacobi
/// eigendecomposition; general rectangular inputs through a one-sided
/// Hestenes-Jacobi SVD, which resolves small singular values accurately.
pub fn pinv(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = max_abs(a);
    if scale == 0.0 {
        return Ok(DMatrix::zeros(a.ncols(), a.nrows()));
    }
    let n = a.nrows();
    let is_sym = a.ncols() == n
        && (0..n).all(|i| (0..n).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= 1e-12 * scale.max(1.0)));
    if is_sym {
        let eig = jacobi_eigh(a)?;
        let cut = n as f64 * f64::EPSILON * eig.values.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        let mut out = DMatrix::zeros(n, n);
        for k in 0..n {
            let lam = eig.values[k];
            if lam.abs() > cut {
                let col = eig.vectors.column(k);
                for i in 0..n {
                    for j in 0..n {
                        out[(i, j)] += col[i] * col[j] / lam;
                    }
                }
            }
        }
        return Ok(out);
    }
    if a.nrows() < a.ncols() {
        return Ok(pinv(&a.transpose())?.transpose());
    }
    let (u_sig, v) = hestenes_svd(a)?;
    let m = a.ncols();
    let sig_max = (0..m).map(|k| u_sig.column(k).norm()).fold(0.0_f64, f64::max);
    let cut = a.nrows().max(m) as f64 * f64::EPSILON * sig_max;
    let mut out = DMatrix::zeros(m, a.nrows());
    for k in 0..m {
        let sigma = u_sig.column(k).norm();
        if sigma > cut {
            // pinv += v_k u_k^T / sigma with u_k = (A v_k) / sigma.
            let uk = u_sig.column(k) / sigma;
            let vk = v.column(k);
            for i in 0..m {
                for j in 0..a.nrows() {
                    out[(i, j)] += vk[i] * uk[j] / sigma;
                }
            }
        }
    }
    Ok(out)
}

/// One-sided Jacobi SVD for tall matrices: returns (A V, V) with the columns
/// of A V pairwise orthogonal, so column norms are the singular values.
fn hestenes_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = a.ncols();
    let mut u = a.clone();
    let mut v: DMatrix<f64> = DMatrix::identity(m, m);
    let tol = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let up = u.column(p);
                let uq = u.column(q);
                let alpha = up.dot(&up);
                let beta = uq.dot(&uq);
                let gamma = up.dot(&uq);
                if gamma.abs() <= tol * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..u.nrows() {
                    let (xp, xq) = (u[(r, p)], u[(r, q)]);
                    u[(r, p)] = c * xp - s * xq;
                    u[(r, q)] = s * xp + c * xq;
                }
                for r in 0..m {
                    let (xp, xq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * xp - s * xq;
                    v[(r, q)] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            return Ok((u, v));
        }
    }
    Err(Error::NonConvergence("one-sided Jacobi SVD did not converge".into()))
}

/// Jacobian of the eigenstructure map vec_s(S) -> (eigenvalues, vec(O)) for a
/// symmetric S with pairwise distinct eigenvalues: n rows (o_i^T (x) o_i^T) D
/// followed by n blocks (o_i^T (x) (lambda_i I - S)^+) D.
pub fn eigen_jacobian(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = check_square(s)?;
    let eig = jacobi_eigh(s)?;
    let frob = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    for i in 0..n - 1 {
        if (eig.values[i + 1] - eig.values[i]).abs() <= 1e-8 * frob {
            return Err(Error::Numerical(format!(
                "eigenvalue gap {:e} below threshold; eigenstructure Jacobian undefined",
                (eig.values[i + 1] - eig.values[i]).abs()
            )));
        }
    }
    let d = duplication(n);
    let p = n * (n + 1) / 2;
    let mut out = DMatrix::zeros(n + n * n, p);
    // Eigenvalue rows: (o_i^T kron o_i^T) D.
    for i in 0..n {
        let oi = eig.vectors.column(i);
        let mut kron = DMatrix::zeros(1, n * n);
        for a_idx in 0..n {
            for b_idx in 0..n {
                kron[(0, a_idx * n + b_idx)] = oi[a_idx] * oi[b_idx];
            }
        }
        let row = &kron * &d;
        for c in 0..p {
            out[(i, c)] = row[(0, c)];
        }
    }
    // Eigenvector blocks: (o_i^T kron (lambda_i I - S)^+) D, with the
    // pseudoinverse taken in spectral form over the complementary eigenpairs.
    for i in 0..n {
        let mut resolvent: DMatrix<f64> = DMatrix::zeros(n, n);
        for k in 0..n {
            if k == i {
                continue;
            }
            let ok = eig.vectors.column(k);
            let coef = 1.0 / (eig.values[i] - eig.values[k]);
            for r in 0..n {
                for c in 0..n {
                    resolvent[(r, c)] += coef * ok[r] * ok[c];
                }
            }
        }
        let oi = eig.vectors.column(i);
        let mut kron = DMatrix::zeros(n, n * n);
        for a_idx in 0..n {
            for r in 0..n {
                for c in 0..n {
                    kron[(r, a_idx * n + c)] = oi[a_idx] * resolvent[(r, c)];
                }
            }
        }
        let block = &kron * &d;
        for r in 0..n {
            for c in 0..p {
                out[(n + i * n + r, c)] = block[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Normalizing constant of the ordered-eigenvalue density below, via the
/// beta = 1 Mehta integral.
fn goe_order_normalizer(q: usize, sigma: f64) -> f64 {
    let g32 = statrs::function::gamma::gamma(1.5);
    let mut mehta = (2.0 * std::f64::consts::PI).powf(q as f64 / 2.0);
    for j in 1..=q {
        mehta *= statrs::function::gamma::gamma(1.0 + j as f64 / 2.0) / g32;
    }
    let mut fact = 1.0;
    for j in 2..=q {
        fact *= j as f64;
    }
    mehta /= fact;
    (sigma * std::f64::consts::SQRT_2).powi((q * (q + 1) / 2) as i32) * mehta
}

/// Joint density of the centered, ordered eigenvalue fluctuations around a
/// repeated eigenvalue lambda_* of multiplicity q: a Gaussian-orthogonal-
/// ensemble form with scale sigma^2 = b lambda_*^2,
///
///   f(a) = C(q, sigma) * prod_{l<i} (a_i - a_l) * exp(-sum a_i^2 / (4 sigma^2)),
///
/// normalized so that it integrates to one over the ordered region.
pub fn repeated_eig_density(a: &[f64], lambda_star: f64, b: f64, q: usize) -> Result<f64> {
    if q < 2 {
        return Err(Error::domain("repeated eigenvalue density needs multiplicity q >= 2"));
    }
    if a.len() != q {
        return Err(Error::Dimension(format!("expected {} ordinates, got {}", q, a.len())));
    }
    if !(lambda_star > 0.0) {
        return Err(Error::domain("lambda_star must be positive"));
    }
    if !(b >= 1.0) {
        return Err(Error::domain("b must be >= 1"));
    }
    if a.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("ordinates must be ascending"));
    }
    let sigma = b.sqrt() * lambda_star;
    let mut vandermonde = 1.0;
    for i in 0..q {
        for l in 0..i {
            vandermonde *= a[i] - a[l];
        }
    }
    let ss: f64 = a.iter().map(|x| x * x).sum();
    Ok(vandermonde * (-ss / (4.0 * sigma * sigma)).exp() / goe_order_normalizer(q, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    fn random_symmetric(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x = rng.random_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        a
    }

    #[test]
    fn jacobi_diagonal_input() {
        let e = jacobi_eigh(&mat(2, 2, &[3.0, 0.0, 0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 3.0, epsilon = 1e-14);
        let expect = mat(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((e.vectors - expect).abs().max() < 1e-14);
    }

    #[test]
    fn jacobi_two_by_two_hand_case() {
        let e = jacobi_eigh(&mat(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.values[1], 3.0, epsilon = 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = mat(2, 2, &[s, s, -s, s]);
        assert!((e.vectors - expect).abs().max() < 1e-12, "sign convention: first row nonnegative");
    }

    #[test]
    fn jacobi_identity_tie_break() {
        let e = jacobi_eigh(&DMatrix::identity(4, 4)).unwrap();
        for i in 0..4 {
            assert_eq!(e.values[i], 1.0);
        }
        assert!((e.vectors - DMatrix::identity(4, 4)).abs().max() == 0.0);
    }

    #[test]
    fn jacobi_reconstruction_and_orthogonality_random() {
        let mut rng = crate::rng::StreamSeed::new(42).rng();
        for _ in 0..1000 {
            let n = rng.random_range(1..=8);
            let s = random_symmetric(n, &mut rng);
            let e = jacobi_eigh(&s).unwrap();
            let ortho = (&e.vectors.transpose() * &e.vectors - DMatrix::identity(n, n)).abs().max();
            assert!(ortho < 1e-12, "orthogonality {ortho:e}");
            let recon =
                (&e.vectors * DMatrix::from_diagonal(&e.values) * e.vectors.transpose() - &s).abs().max();
            let scale = s.abs().max().max(1e-300);
            assert!(recon < 1e-10 * scale.max(1.0), "reconstruction {recon:e}");
            for i in 0..n {
                assert!(e.vectors[(0, i)] >= 0.0);
            }
            for i in 1..n {
                assert!(e.values[i] >= e.values[i - 1]);
            }
        }
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        assert!(jacobi_eigh(&mat(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
    }

    #[test]
    fn inv_sqrt_diag() {
        let w = inv_sqrt_spd(&mat(2, 2, &[4.0, 0.0, 0.0, 9.0])).unwrap();
        assert!((w - mat(2, 2, &[0.5, 0.0, 0.0, 1.0 / 3.0])).abs().max() < 1e-14);
        let id = inv_sqrt_spd(&DMatrix::identity(3, 3)).unwrap();
        assert!((id - DMatrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn inv_sqrt_contract_on_random_spd() {
        let mut rng = crate::rng::StreamSeed::new(7).rng();
        for _ in 0..50 {
            let n = rng.random_range(2..=8);
            let m = random_symmetric(n, &mut rng);
            let a = &m * m.transpose() + DMatrix::identity(n, n);
            let w = inv_sqrt_spd(&a).unwrap();
            assert!(((&w * &a * &w) - DMatrix::identity(n, n)).abs().max() < 1e-10);
            assert!((&w - w.transpose()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let err = inv_sqrt_spd(&mat(2, 2, &[1.0, 0.0, 0.0, -2.0])).unwrap_err();
        match err {
            Error::NotSpd { min_eig, .. } => assert!(min_eig < 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ejd_identity_whitener() {
        let r = ejd(&DMatrix::identity(2, 2), &mat(2, 2, &[1.0, 0.0, 0.0, 4.0])).unwrap();
        assert!((&r.b - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        assert_abs_diff_eq!(r.lambda[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.lambda[1], 4.0, epsilon = 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn ejd_two_by_two_mixing_case() {
        // C0 = P P^T, C1 = P diag(1,4) P^T: B^{-1} columns must align with P's.
        let p = mat(2, 2, &[0.78, 0.62, 0.62, 0.78]);
        let c0 = &p * p.transpose();
        let c1 = &p * mat(2, 2, &[1.0, 0.0, 0.0, 4.0]) * p.transpose();
        let r = ejd(&c0, &c1).unwrap();
        assert!(((&r.b * &c0 * r.b.transpose()) - DMatrix::identity(2, 2)).abs().max() < 1e-10);
        let d1 = &r.b * &c1 * r.b.transpose();
        assert!((d1[(0, 1)].abs()).max(d1[(1, 0)].abs()) < 1e-10);
        let binv = r.b.clone().try_inverse().unwrap();
        for col in 0..2 {
            let bc = binv.column(col);
            let pc = p.column(col);
            let cosine = bc.dot(&pc) / (bc.norm() * pc.norm());
            assert!(cosine.abs() > 1.0 - 1e-10, "column {col} not proportional: cos={cosine}");
        }
    }

    #[test]
    fn ejd_flags_repeated_eigenvalues() {
        let c0 = mat(2, 2, &[2.0, 0.3, 0.3, 1.5]);
        let r = ejd(&c0, &c0).unwrap();
        assert!(r.degenerate);
        for i in 0..2 {
            assert_abs_diff_eq!(r.lambda[i], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn vec_operators_match_paper_orderings() {
        let a = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec_full(&a), vec![1.0, 3.0, 2.0, 4.0]);
        let s = mat(2, 2, &[1.0, 2.0, 2.0, 5.0]);
        assert_eq!(vec_s(&s), vec![1.0, 2.0, 5.0]);
        let d3 = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert_eq!(vec_d(&d3), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn duplication_n2_explicit() {
        let d = duplication(2);
        assert_eq!(d.nrows(), 4);
        assert_eq!(d.ncols(), 3);
        let expect = mat(4, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(d, expect);
    }

    #[test]
    fn duplication_identities_random() {
        let mut rng = crate::rng::StreamSeed::new(11).rng();
        for _ in 0..100 {
            let n = rng.random_range(1..=6);
            let d = duplication(n);
            let sym = random_symmetric(n, &mut rng);
            // D vec_s(A) = vec(A) for symmetric A.
            let lhs = &d * DVector::from_vec(vec_s(&sym));
            let rhs = DVector::from_vec(vec_full(&sym));
            assert!((lhs - rhs).abs().max() == 0.0);
            // vec(A) D = vec_s(A + A^T - dg(A)) for arbitrary A.
            let mut any = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    any[(i, j)] = rng.random_range(-1.0..1.0);
                }
            }
            let va = nalgebra::RowDVector::from_vec(vec_full(&any));
            let lhs2 = va * &d;
            let sym2 = &any + any.transpose()
                - DMatrix::from_diagonal(&DVector::from_vec(vec_d(&any)));
            let rhs2 = vec_s(&sym2);
            for (k, &r) in rhs2.iter().enumerate() {
                assert_abs_diff_eq!(lhs2[(0, k)], r, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn pinv_basic_cases() {
        let a = mat(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let inv = a.clone().try_inverse().unwrap();
        assert!((pinv(&a).unwrap() - inv).abs().max() < 1e-10);
        let z = DMatrix::<f64>::zeros(3, 2);
        assert_eq!(pinv(&z).unwrap(), DMatrix::zeros(2, 3));
        let proj = mat(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!((pinv(&proj).unwrap() - &proj).abs().max() < 1e-12);
    }

    #[test]
    fn pinv_moore_penrose_identities() {
        let mut rng = crate::rng::StreamSeed::new(13).rng();
        for _ in 0..50 {
            let (m, n) = (rng.random_range(1..=5), rng.random_range(1..=5));
            let mut a = DMatrix::zeros(m, n);
            for i in 0..m {
                for j in 0..n {
                    a[(i, j)] = rng.random_range(-1.0..1.0);
                }
            }
            let p = pinv(&a).unwrap();
            assert!(((&a * &p * &a) - &a).abs().max() < 1e-10);
            assert!(((&p * &a * &p) - &p).abs().max() < 1e-10);
            assert!(((&a * &p).transpose() - &a * &p).abs().max() < 1e-10);
            assert!(((&p * &a).transpose() - &p * &a).abs().max() < 1e-10);
        }
    }

    #[test]
    fn eigen_jacobian_diagonal_selector_row() {
        let j = eigen_jacobian(&mat(2, 2, &[1.0, 0.0, 0.0, 3.0])).unwrap();
        // Eigenvalue row for lambda_1 = 1 selects s11 in vec_s order (s11, s21, s22).
        assert_abs_diff_eq!(j[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j[(0, 2)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_jacobian_rejects_near_degenerate() {
        let s = mat(2, 2, &[1.0, 0.0, 0.0, 1.0 + 1e-9]);
        assert!(eigen_jacobian(&s).is_err());
    }

    #[test]
    fn eigen_jacobian_matches_finite_differences() {
        let mut rng = crate::rng::StreamSeed::new(5).rng();
        let mut tested = 0;
        while tested < 20 {
            let n = rng.random_range(2..=5);
            let m = random_symmetric(n, &mut rng);
            let mut s = &m * m.transpose();
            for i in 0..n {
                s[(i, i)] += 1.0 + 3.0 * i as f64;
            }
            let eig = jacobi_eigh(&s).unwrap();
            if eig.min_relative_gap() < 0.1 {
                continue;
            }
            // Keep away from sign-convention kinks.
            if (0..n).any(|i| eig.vectors[(0, i)].abs() < 1e-2) {
                continue;
            }
            tested += 1;
            let jac = eigen_jacobian(&s).unwrap();
            let p = n * (n + 1) / 2;
            let h = 1e-7 * s.abs().max();
            for col in 0..p {
                let mut dvec = vec![0.0; p];
                dvec[col] = h;
                let per = perturb_sym(&s, &dvec);
                let em = jacobi_eigh(&per).unwrap();
                let mut dvec2 = vec![0.0; p];
                dvec2[col] = -h;
                let per2 = perturb_sym(&s, &dvec2);
                let ep = jacobi_eigh(&per2).unwrap();
                for row in 0..n {
                    let fd = (em.values[row] - ep.values[row]) / (2.0 * h);
                    let an = jac[(row, col)];
                    assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "eigenvalue row {row} col {col}: fd={fd} an={an}");
                }
                for i in 0..n {
                    for r in 0..n {
                        let fd = (em.vectors[(r, i)] - ep.vectors[(r, i)]) / (2.0 * h);
                        let an = jac[(n + i * n + r, col)];
                        assert!(
                            (fd - an).abs() <= 1e-5 * an.abs().max(1.0),
                            "eigenvector ({r},{i}) col {col}: fd={fd} an={an}"
                        );
                    }
                }
            }
        }
    }

    fn perturb_sym(s: &DMatrix<f64>, dvec_s: &[f64]) -> DMatrix<f64> {
        let n = s.nrows();
        let mut out = s.clone();
        let mut k = 0;
        for j in 0..n {
            for i in j..n {
                out[(i, j)] += dvec_s[k];
                if i != j {
                    out[(j, i)] += dvec_s[k];
                }
                k += 1;
            }
        }
        out
    }

    #[test]
    fn repeated_eig_density_vanishes_on_ties_and_is_nonnegative() {
        let d = repeated_eig_density(&[0.3, 0.3], 1.0, 1.5, 2).unwrap();
        assert_eq!(d, 0.0);
        let mut rng = crate::rng::StreamSeed::new(3).rng();
        for _ in 0..200 {
            let mut a: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let v = repeated_eig_density(&a, 0.8, 2.0, 3).unwrap();
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn repeated_eig_density_q2_normalizes_to_one() {
        // 2-d quadrature over {a1 < a2} via the rotation u=(a2-a1)/sqrt2, v=(a2+a1)/sqrt2.
        let (lambda_star, b): (f64, f64) = (0.7, 1.8);
        let sigma = b.sqrt() * lambda_star;
        let lim = 12.0 * sigma;
        let n = 400;
        let du = lim / n as f64;
        let mut total = 0.0;
        for iu in 0..n {
            let u = (iu as f64 + 0.5) * du;
            for iv in 0..(2 * n) {
                let v = -lim + (iv as f64 + 0.5) * du;
                let a1 = (v - u) / std::f64::consts::SQRT_2;
                let a2 = (v + u) / std::f64::consts::SQRT_2;
                total += repeated_eig_density(&[a1, a2], lambda_star, b, 2).unwrap() * du * du;
            }
        }
        assert!((total - 1.0).abs() < 1e-3, "integral {total}");
    }
}
