use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) const PIVOT_THRESHOLD: f64 = 1e-12;

/// Inverts a dense row-major `n x n` matrix by Gauss-Jordan elimination with
/// partial pivoting.
pub(crate) fn invert<F: Real>(a: &[F], n: usize) -> Result<Vec<F>> {
    debug_assert_eq!(a.len(), n * n);
    let w = 2 * n;
    let mut m = vec![F::zero(); n * w];
    for r in 0..n {
        m[r * w..r * w + n].copy_from_slice(&a[r * n..(r + 1) * n]);
        m[r * w + n + r] = F::one();
    }
    let threshold = F::lit(PIVOT_THRESHOLD);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x * w + col].abs().partial_cmp(&m[y * w + col].abs()).unwrap())
            .unwrap();
        if !(m[piv * w + col].abs() > threshold) {
            return Err(Error::DegenerateGeometry(format!("pivot below {PIVOT_THRESHOLD} in column {col}")));
        }
        if piv != col {
            for j in 0..w {
                m.swap(piv * w + j, col * w + j);
            }
        }
        let d = m[col * w + col];
        for j in 0..w {
            m[col * w + j] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * w + col];
            if factor != F::zero() {
                for j in 0..w {
                    let v = m[col * w + j];
                    m[r * w + j] -= factor * v;
                }
            }
        }
    }
    let mut inv = vec![F::zero(); n * n];
    for r in 0..n {
        inv[r * n..(r + 1) * n].copy_from_slice(&m[r * w + n..(r + 1) * w]);
    }
    Ok(inv)
}

/// Determinant by elimination with partial pivoting.
pub(crate) fn determinant<F: Real>(a: &[F], n: usize) -> F {
    let mut m = a.to_vec();
    let mut det = F::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x * n + col].abs().partial_cmp(&m[y * n + col].abs()).unwrap())
            .unwrap();
        if m[piv * n + col] == F::zero() {
            return F::zero();
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        let d = m[col * n + col];
        det *= d;
        for r in col + 1..n {
            let factor = m[r * n + col] / d;
            for j in col..n {
                let v = m[col * n + j];
                m[r * n + j] -= factor * v;
            }
        }
    }
    det
}
