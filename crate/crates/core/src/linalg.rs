//! Small dense kernels: Hermitian eigenvalues and Gram products.

use alloc::vec::Vec;

use num_complex::Complex64;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix (row-major, `n * n`), ascending.
///
/// The matrix `A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`,
/// whose spectrum is that of `A + iB` with every eigenvalue doubled, and
/// diagonalized by cyclic Jacobi rotations.
pub(crate) fn hermitian_eigenvalues(n: usize, entries: &[Complex64]) -> Vec<f64> {
    debug_assert_eq!(entries.len(), n * n);
    let m = 2 * n;
    let mut a = alloc::vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = entries[i * n + j];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut doubled = symmetric_eigenvalues(m, a);
    doubled.sort_by(f64::total_cmp);
    doubled.into_iter().step_by(2).collect()
}

fn symmetric_eigenvalues(n: usize, mut a: Vec<f64>) -> Vec<f64> {
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off == 0.0 || off <= 1e-34 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    if theta < 0.0 { -t } else { t }
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// `M M^dagger` for a row-major `rows x cols` matrix.
pub(crate) fn gram(rows: usize, cols: usize, m: &[Complex64]) -> Vec<Complex64> {
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); rows * rows];
    for i in 0..rows {
        let ri = &m[i * cols..(i + 1) * cols];
        for j in i..rows {
            let rj = &m[j * cols..(j + 1) * cols];
            let v: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
            out[i * rows + j] = v;
            out[j * rows + i] = v.conj();
        }
    }
    out
}

/// `M^dagger M` for a row-major `rows x cols` matrix.
pub(crate) fn co_gram(rows: usize, cols: usize, m: &[Complex64]) -> Vec<Complex64> {
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); cols * cols];
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        for (i, a) in row.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let ac = a.conj();
            for (j, b) in row.iter().enumerate() {
                out[i * cols + j] += ac * b;
            }
        }
    }
    out
}
