use super::dd::Dd;
use crate::error::{Error, Result};

/// Least-squares solution of `A X ≈ B` by Householder QR.
///
/// `a` has `m` rows of length `k`; `b` has `m` rows of length `r`. Returns
/// `X` as `k` rows of length `r`.
pub fn lstsq(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let b: Vec<Vec<Dd>> = b
        .iter()
        .map(|row| row.iter().map(|&x| Dd::from(x)).collect())
        .collect();
    Ok(lstsq_dd(a, &b)?
        .into_iter()
        .map(|row| row.into_iter().map(Dd::to_f64).collect())
        .collect())
}

/// [`lstsq`] in double-double throughout, so that exponential design
/// matrices with condition numbers near 1e9 still give coefficients
/// accurate to the data.
pub(crate) fn lstsq_dd(a: &[Vec<f64>], b: &[Vec<Dd>]) -> Result<Vec<Vec<Dd>>> {
    let m = a.len();
    if m == 0 || b.len() != m {
        return Err(Error::Dimension(b.len(), m));
    }
    let k = a[0].len();
    let r = b[0].len();
    if m < k {
        return Err(Error::Sampling(format!(
            "{m} samples cannot determine {k} coefficients"
        )));
    }
    let mut q: Vec<Vec<Dd>> = a
        .iter()
        .map(|row| row.iter().map(|&x| Dd::from(x)).collect())
        .collect();
    let mut y = b.to_vec();
    let mut diag_max = 0.0f64;
    for j in 0..k {
        let norm = (j..m)
            .fold(Dd::ZERO, |acc, i| acc + q[i][j] * q[i][j])
            .sqrt();
        let alpha = if q[j][j].hi > 0.0 { -norm } else { norm };
        let mut v: Vec<Dd> = (j..m).map(|i| q[i][j]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(Dd::ZERO, |acc, &x| acc + x * x);
        if vnorm2.hi > 0.0 {
            for c in j..k {
                reflect(&mut q, c, j, &v, vnorm2);
            }
            for c in 0..r {
                reflect(&mut y, c, j, &v, vnorm2);
            }
        }
        diag_max = diag_max.max(q[j][j].hi.abs());
    }
    if let Some(j) = (0..k).find(|&j| q[j][j].hi.abs() <= 1e-13 * diag_max) {
        return Err(Error::Sampling(format!(
            "design matrix is rank deficient at column {j}; sample more time points"
        )));
    }
    let mut x = vec![vec![Dd::ZERO; r]; k];
    for c in 0..r {
        for j in (0..k).rev() {
            let s = (j + 1..k).fold(Dd::ZERO, |acc, l| acc + q[j][l] * x[l][c]);
            x[j][c] = (y[j][c] - s) / q[j][j];
        }
    }
    Ok(x)
}

/// Applies `I − 2vvᵀ/|v|²` to rows `j..` of column `c`.
fn reflect(mat: &mut [Vec<Dd>], c: usize, j: usize, v: &[Dd], vnorm2: Dd) {
    let dot = v
        .iter()
        .enumerate()
        .fold(Dd::ZERO, |acc, (i, &vi)| acc + vi * mat[j + i][c]);
    let f = Dd::from(2.0) * dot / vnorm2;
    for (i, &vi) in v.iter().enumerate() {
        mat[j + i][c] = mat[j + i][c] - f * vi;
    }
}
