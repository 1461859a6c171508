use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};

/// Eigenvalues in ascending order, eigenvectors as the matching columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// Column `n` as an owned vector.
    pub fn vector(&self, n: usize) -> Vec<C64> {
        let d = self.vectors.dim();
        (0..d).map(|i| self.vectors[(i, n)]).collect()
    }
}

const MAX_SWEEPS: usize = 100;
const CONVERGENCE: f64 = 1e-14;

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` with `diag(1, e^{−iφ})`
/// and then applies the real symmetric Jacobi rotation.
pub fn hermitian_eigendecomposition(m: &CMatrix) -> Result<Eigen> {
    let n = m.dim();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let defect = m.hermiticity_defect();
    if defect > 1e-10 * scale.max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let mut a = m.clone();
    a.hermitize();
    let mut vt = CMatrix::identity(n);
    let norm = a.frobenius_norm();
    if n <= 1 || norm == 0.0 {
        return Ok(finish(a, vt));
    }
    let target = CONVERGENCE * norm;

    for sweep in 0..MAX_SWEEPS {
        let off = off_norm(&a);
        if off <= target {
            return Ok(finish(a, vt));
        }
        // Early sweeps skip rotations that are small relative to the mean.
        let threshold = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if sweep > 3
                    && app.abs() + 100.0 * mag == app.abs()
                    && aqq.abs() + 100.0 * mag == aqq.abs()
                {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                if mag <= threshold {
                    continue;
                }
                rotate(&mut a, &mut vt, p, q, apq, mag, app, aqq);
            }
        }
    }
    if off_norm(&a) <= 1e3 * target {
        return Ok(finish(a, vt));
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate(
    a: &mut CMatrix,
    vt: &mut CMatrix,
    p: usize,
    q: usize,
    apq: C64,
    mag: f64,
    app: f64,
    aqq: f64,
) {
    let n = a.dim();
    let phase = apq / mag; // e^{iφ}
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // U = [[c, s], [−s e^{−iφ}, c e^{−iφ}]] on the (p, q) plane.
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let data = a.as_mut_slice();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = data[k * n + p];
        let akq = data[k * n + q];
        let nkp = akp * c + akq * u_qp;
        let nkq = akp * s + akq * u_qq;
        data[k * n + p] = nkp;
        data[k * n + q] = nkq;
        data[p * n + k] = nkp.conj();
        data[q * n + k] = nkq.conj();
    }
    data[p * n + p] = C64::new(app - t * mag, 0.0);
    data[q * n + q] = C64::new(aqq + t * mag, 0.0);
    data[p * n + q] = ZERO;
    data[q * n + p] = ZERO;

    // `vt` holds V transposed so both updated columns are contiguous rows.
    let vd = vt.as_mut_slice();
    let (head, tail) = vd.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for (vkp, vkq) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (a, b) = (*vkp, *vkq);
        *vkp = a * c + b * u_qp;
        *vkq = a * s + b * u_qq;
    }
}

fn off_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[(i, j)].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

fn finish(a: CMatrix, vt: CMatrix) -> Eigen {
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |i, j| vt[(order[j], i)]);
    Eigen { values, vectors }
}

/// `‖M − VΛV†‖_F / ‖M‖_F` and `‖V†V − I‖_F`.
pub fn reconstruction_residuals(m: &CMatrix, eig: &Eigen) -> (f64, f64) {
    let n = m.dim();
    let lam = CMatrix::from_real_diag(&eig.values);
    let rec = eig.vectors.matmul(&lam).matmul(&eig.vectors.adjoint());
    let rel = rec.sub(m).frobenius_norm() / m.frobenius_norm().max(f64::MIN_POSITIVE);
    let gram = eig.vectors.adjoint().matmul(&eig.vectors);
    let orth = gram.sub(&CMatrix::identity(n)).frobenius_norm();
    (rel, orth)
}
