//! Bloch-Messiah reduction `A = U cosh(r) V^dag`, `B = U sinh(r) V^T`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{max_abs_c, BogoliubovPair, CMatrix, ComplexUnitary, RMatrix, SqueezeParams};

/// Singular values closer than this (relative) are treated as one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-8;

/// Clusters with `sinh r` below this are treated as unsqueezed.
const UNSQUEEZED_TOL: f64 = 1e-7;

const RECONSTRUCTION_CHECK: f64 = 1e-8;

/// Unitary `W` with `M = W D W^T`, `D` real non-negative, for complex symmetric `M`
/// whose Takagi values are all strictly positive.
fn takagi_positive(m: &CMatrix) -> Result<CMatrix> {
    let k = m.nrows();
    let mut e = RMatrix::zeros(2 * k, 2 * k);
    for r in 0..k {
        for c in 0..k {
            let z = 0.5 * (m[(r, c)] + m[(c, r)]);
            e[(r, c)] = z.re;
            e[(r, k + c)] = z.im;
            e[(k + r, c)] = z.im;
            e[(k + r, k + c)] = -z.re;
        }
    }
    let eig = e.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let chosen = &order[..k];
    if chosen.iter().any(|&i| eig.eigenvalues[i] <= 0.0) {
        return Err(Error::Internal {
            context: "Takagi factorization of a squeezing cluster".into(),
            residual: eig.eigenvalues.min(),
        });
    }
    let mut w = CMatrix::zeros(k, k);
    for (col, &i) in chosen.iter().enumerate() {
        for r in 0..k {
            w[(r, col)] = Complex64::new(eig.eigenvectors[(r, i)], eig.eigenvectors[(k + r, i)]);
        }
    }
    Ok(w)
}

/// Returns `(U, r, V)` with `A = U diag(cosh r) V^dag` and `B = U diag(sinh r) V^T`.
/// Squeeze values come out non-negative and in descending order.
pub fn bloch_messiah(pair: &BogoliubovPair) -> Result<(ComplexUnitary, SqueezeParams, ComplexUnitary)> {
    let n = pair.modes();
    let svd = pair.a().clone().svd(true, true);
    let (Some(u0), Some(vt0)) = (svd.u, svd.v_t) else {
        return Err(Error::Internal {
            context: "singular value decomposition".into(),
            residual: f64::NAN,
        });
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v0 = vt0.adjoint();
    let mut u = CMatrix::from_fn(n, n, |r, c| u0[(r, order[c])]);
    let mut v = CMatrix::from_fn(n, n, |r, c| v0[(r, order[c])]);

    let mut r: Vec<f64> = sigma.iter().map(|&x| x.max(1.0).acosh()).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (sigma[start] - sigma[end]).abs() <= CLUSTER_TOL * sigma[start].max(1.0) {
            end += 1;
        }
        let k = end - start;
        let s = (sigma[start] * sigma[start] - 1.0).max(0.0).sqrt();
        if s <= UNSQUEEZED_TOL {
            r[start..end].fill(0.0);
        } else {
            let uc = u.columns(start, k).into_owned();
            let vc = v.columns(start, k).into_owned();
            let m = uc.adjoint() * pair.b() * vc.conjugate();
            let w = takagi_positive(&m)?;
            u.columns_mut(start, k).copy_from(&(uc * &w));
            v.columns_mut(start, k).copy_from(&(vc * &w));
        }
        start = end;
    }

    let ch = CMatrix::from_diagonal(&DVector::from_iterator(n, r.iter().map(|x| Complex64::new(x.cosh(), 0.0))));
    let sh = CMatrix::from_diagonal(&DVector::from_iterator(n, r.iter().map(|x| Complex64::new(x.sinh(), 0.0))));
    let residual = max_abs_c(&(&u * ch * v.adjoint() - pair.a())).max(max_abs_c(&(&u * sh * v.transpose() - pair.b())));
    if residual > RECONSTRUCTION_CHECK {
        return Err(Error::Internal {
            context: "Bloch-Messiah reconstruction".into(),
            residual,
        });
    }
    Ok((
        ComplexUnitary::from_matrix_unchecked(u),
        SqueezeParams::new(r)?,
        ComplexUnitary::from_matrix_unchecked(v),
    ))
}
