//! Matrix types for passive networks, symplectic maps and Bogoliubov pairs.
//!
//! All real maps use the `(x_1..x_N, p_1..p_N)` ordering with `a = (x + i p)/sqrt(2)`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance on matrix-entry deviations.
pub const DEFAULT_TOL: f64 = 1e-9;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) fn max_abs(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub(crate) fn max_abs_c(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// Largest entrywise absolute difference between two equally shaped matrices.
pub fn max_deviation(a: &RMatrix, b: &RMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_deviation on mismatched shapes");
    max_abs(&(a - b))
}

/// Largest entrywise modulus of `a - b` for complex matrices.
pub fn max_deviation_c(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_deviation_c on mismatched shapes");
    max_abs_c(&(a - b))
}

/// Difference of two angles wrapped into `(-pi, pi]`.
pub fn wrapped_difference(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let d = (a - b).rem_euclid(two_pi);
    if d > std::f64::consts::PI {
        d - two_pi
    } else {
        d
    }
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: cols,
        });
    }
    Ok(())
}

fn check_mode(index: usize, modes: usize) -> Result<()> {
    if index >= modes {
        return Err(Error::ModeOutOfRange { index, modes });
    }
    Ok(())
}

/// Maximum entry of `|U^dagger U - I|`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs_c(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// The canonical form `[[0, I], [-I, 0]]` for `n` modes.
pub fn omega(n: usize) -> RMatrix {
    let mut w = RMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = 1.0;
        w[(n + i, i)] = -1.0;
    }
    w
}

/// Maximum entry of `|S^T Omega S - Omega|`.
pub fn symplectic_deviation(s: &RMatrix) -> f64 {
    let n = s.nrows() / 2;
    let w = omega(n);
    max_abs(&(s.transpose() * &w * s - w))
}

/// Single-mode rotation `[[cos, -sin], [sin, cos]]` acting on `(x, p)`.
pub fn rot2(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Single-mode squeezer `diag(e^r, e^-r)` acting on `(x, p)`.
pub fn squeeze2(r: f64) -> Matrix2<f64> {
    Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp())
}

/// Embeds a single-mode `(x, p)` map on mode `j` of an `n`-mode identity.
pub fn embed_single(m: &Matrix2<f64>, j: usize, n: usize) -> RMatrix {
    let mut s = RMatrix::identity(2 * n, 2 * n);
    let idx = [j, n + j];
    for r in 0..2 {
        for c in 0..2 {
            s[(idx[r], idx[c])] = m[(r, c)];
        }
    }
    s
}

/// Embeds a two-mode map given over `(x_j, x_k, p_j, p_k)` into an `n`-mode identity.
pub fn embed_two_mode(m: &Matrix4<f64>, j: usize, k: usize, n: usize) -> RMatrix {
    let mut s = RMatrix::identity(2 * n, 2 * n);
    let idx = [j, k, n + j, n + k];
    for r in 0..4 {
        for c in 0..4 {
            s[(idx[r], idx[c])] = m[(r, c)];
        }
    }
    s
}

/// A passive linear network `a -> U a` on `dim` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexUnitary {
    m: CMatrix,
}

impl ComplexUnitary {
    pub fn new(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        if m.nrows() == 0 {
            return Err(Error::InvalidParameter("unitary must have at least one mode".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("unitary entries"));
        }
        let deviation = unitarity_deviation(&m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// Product `self * other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m,
        }
    }

    pub fn scaled_by_phase(&self, phi: f64) -> Self {
        Self {
            m: &self.m * Complex64::from_polar(1.0, phi),
        }
    }
}

/// A real `2N x 2N` symplectic matrix in `(x.., p..)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    m: RMatrix,
}

impl SymplecticMap {
    pub fn new(m: RMatrix, tol: f64) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        if !m.nrows().is_multiple_of(2) {
            return Err(Error::InvalidParameter("symplectic matrix must have even dimension".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("symplectic entries"));
        }
        let deviation = symplectic_deviation(&m);
        if deviation > tol {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: RMatrix) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: RMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> RMatrix {
        self.m
    }

    /// Product `self * other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m,
        }
    }

    pub fn symplectic_deviation(&self) -> f64 {
        symplectic_deviation(&self.m)
    }

    /// Largest entrywise deviation from another map on the same number of modes.
    pub fn deviation_from(&self, other: &Self) -> Result<f64> {
        if self.modes() != other.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                found: other.modes(),
            });
        }
        Ok(max_deviation(&self.m, &other.m))
    }
}

/// The Bogoliubov form `a -> A a + B a^dagger` of a Gaussian unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovPair {
    a: CMatrix,
    b: CMatrix,
}

/// Max deviation of the pair from `A A^dag - B B^dag = I` and `A B^T` symmetric.
pub fn bogoliubov_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let norm = a * a.adjoint() - b * b.adjoint() - CMatrix::identity(n, n);
    let abt = a * b.transpose();
    max_abs_c(&norm).max(max_abs_c(&(&abt - abt.transpose())))
}

impl BogoliubovPair {
    pub fn new(a: CMatrix, b: CMatrix, tol: f64) -> Result<Self> {
        check_square(a.nrows(), a.ncols())?;
        if b.shape() != a.shape() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.nrows(),
            });
        }
        if a.nrows() == 0 {
            return Err(Error::InvalidParameter("pair must have at least one mode".into()));
        }
        if a.iter().chain(b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Bogoliubov entries"));
        }
        let deviation = bogoliubov_deviation(&a, &b);
        if deviation > tol {
            return Err(Error::InvalidBogoliubov { deviation });
        }
        Ok(Self { a, b })
    }

    pub fn passive(u: &ComplexUnitary) -> Self {
        let n = u.dim();
        Self {
            a: u.matrix().clone(),
            b: CMatrix::zeros(n, n),
        }
    }

    pub fn modes(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }
}

/// Per-mode squeeze parameters; `r > 0` squeezes `p`, `r < 0` squeezes `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeParams {
    values: Vec<f64>,
}

impl SqueezeParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("squeeze parameters"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Beamsplitter `B_jk(tau)`: `[[cos, -sin], [sin, cos]]` on both the x and p blocks of `(j, k)`.
pub fn bs_symplectic(tau: f64, j: usize, k: usize, n: usize) -> Result<SymplecticMap> {
    check_mode(j, n)?;
    check_mode(k, n)?;
    if j == k {
        return Err(Error::InvalidModePair { j, k });
    }
    let (s, c) = tau.sin_cos();
    let m = Matrix4::new(
        c, -s, 0.0, 0.0, //
        s, c, 0.0, 0.0, //
        0.0, 0.0, c, -s, //
        0.0, 0.0, s, c,
    );
    Ok(SymplecticMap::from_matrix_unchecked(embed_two_mode(&m, j, k, n)))
}

/// Phase shift `R_j(theta)`.
pub fn phase_symplectic(theta: f64, j: usize, n: usize) -> Result<SymplecticMap> {
    check_mode(j, n)?;
    Ok(SymplecticMap::from_matrix_unchecked(embed_single(&rot2(theta), j, n)))
}

/// Squeezer `diag(e^r, e^-r)` on mode `j`.
pub fn squeeze_symplectic(r: f64, j: usize, n: usize) -> Result<SymplecticMap> {
    check_mode(j, n)?;
    if !r.is_finite() {
        return Err(Error::NonFinite("squeeze parameter"));
    }
    Ok(SymplecticMap::from_matrix_unchecked(embed_single(&squeeze2(r), j, n)))
}

/// The foursplitter acting on the local micronodes `(a, b, c, d)`.
pub fn foursplitter_matrix() -> Matrix4<f64> {
    Matrix4::new(
        1.0, 1.0, -1.0, -1.0, //
        -1.0, 1.0, 1.0, -1.0, //
        1.0, 1.0, 1.0, 1.0, //
        -1.0, 1.0, -1.0, 1.0,
    ) * 0.5
}

/// Real form `[[Re M, -Im M], [Im M, Re M]]` of a complex mode matrix.
pub(crate) fn complex_to_real(m: &CMatrix) -> RMatrix {
    let n = m.nrows();
    let mut s = RMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = m[(r, c)];
            s[(r, c)] = z.re;
            s[(r, n + c)] = -z.im;
            s[(n + r, c)] = z.im;
            s[(n + r, n + c)] = z.re;
        }
    }
    s
}

pub fn unitary_to_symplectic(u: &ComplexUnitary) -> SymplecticMap {
    SymplecticMap::from_matrix_unchecked(complex_to_real(u.matrix()))
}

/// Real map consistent with `a -> A a + B a^dagger`.
pub fn bogoliubov_to_symplectic(pair: &BogoliubovPair) -> SymplecticMap {
    let n = pair.modes();
    let plus = &pair.a + &pair.b;
    let minus = &pair.a - &pair.b;
    let mut s = RMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            s[(r, c)] = plus[(r, c)].re;
            s[(r, n + c)] = -minus[(r, c)].im;
            s[(n + r, c)] = plus[(r, c)].im;
            s[(n + r, n + c)] = minus[(r, c)].re;
        }
    }
    SymplecticMap::from_matrix_unchecked(s)
}

/// Reads `(A, B)` back from the block structure of a symplectic map.
pub fn symplectic_to_bogoliubov(s: &SymplecticMap, tol: f64) -> Result<BogoliubovPair> {
    let n = s.modes();
    let m = s.matrix();
    let mut a = CMatrix::zeros(n, n);
    let mut b = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let plus = Complex64::new(m[(r, c)], m[(n + r, c)]);
            let minus = Complex64::new(m[(n + r, n + c)], -m[(r, n + c)]);
            a[(r, c)] = (plus + minus) * 0.5;
            b[(r, c)] = (plus - minus) * 0.5;
        }
    }
    BogoliubovPair::new(a, b, tol)
}

fn random_unitary_from_rng<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Seeded random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> ComplexUnitary {
    assert!(n >= 1, "random_unitary needs at least one mode");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexUnitary::from_matrix_unchecked(random_unitary_from_rng(&mut rng, n))
}

/// Seeded random pair `A = U cosh(r) V^dag`, `B = U sinh(r) V^T` with `|r| <= max_r`.
pub fn random_bogoliubov(n: usize, seed: u64, max_r: f64) -> BogoliubovPair {
    assert!(n >= 1, "random_bogoliubov needs at least one mode");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary_from_rng(&mut rng, n);
    let v = random_unitary_from_rng(&mut rng, n);
    let r: Vec<f64> = (0..n).map(|_| max_r * (2.0 * rng.random::<f64>() - 1.0)).collect();
    let ch = CMatrix::from_diagonal(&DVector::from_iterator(
        n,
        r.iter().map(|x| Complex64::new(x.cosh(), 0.0)),
    ));
    let sh = CMatrix::from_diagonal(&DVector::from_iterator(
        n,
        r.iter().map(|x| Complex64::new(x.sinh(), 0.0)),
    ));
    BogoliubovPair {
        a: &u * ch * v.adjoint(),
        b: &u * sh * v.transpose(),
    }
}

/// A Gaussian state on a fixed set of modes: mean and covariance in `(x.., p..)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: RMatrix,
}

impl GaussianState {
    pub fn vacuum(n: usize) -> Self {
        Self {
            mean: DVector::zeros(2 * n),
            cov: RMatrix::identity(2 * n, 2 * n) * 0.5,
        }
    }

    pub fn new(mean: DVector<f64>, cov: RMatrix) -> Result<Self> {
        check_square(cov.nrows(), cov.ncols())?;
        if mean.len() != cov.nrows() || !mean.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: cov.nrows(),
                found: mean.len(),
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn transformed(&self, s: &SymplecticMap) -> Self {
        let m = s.matrix();
        Self {
            mean: m * &self.mean,
            cov: m * &self.cov * m.transpose(),
        }
    }

    /// Smallest eigenvalue of `cov + i Omega / 2`, evaluated through its real symmetric embedding.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        uncertainty_min_eigenvalue(&self.cov)
    }
}

/// Smallest eigenvalue of the Hermitian matrix `cov + i Omega/2`.
pub fn uncertainty_min_eigenvalue(cov: &RMatrix) -> f64 {
    let d = cov.nrows();
    let w = omega(d / 2) * 0.5;
    // H = X + iY with X symmetric, Y antisymmetric embeds as [[X, -Y], [Y, X]].
    let mut e = RMatrix::zeros(2 * d, 2 * d);
    let sym = (cov + cov.transpose()) * 0.5;
    e.view_mut((0, 0), (d, d)).copy_from(&sym);
    e.view_mut((d, d), (d, d)).copy_from(&sym);
    e.view_mut((0, d), (d, d)).copy_from(&(-&w));
    e.view_mut((d, 0), (d, d)).copy_from(&w);
    e.symmetric_eigenvalues().min()
}

/// `{"dim": N, "entries": [[re, im], ...]}` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl ComplexMatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                entries.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        Self { dim: n, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        if self.entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: self.entries.len(),
            });
        }
        Ok(CMatrix::from_fn(n, n, |r, c| {
            let [re, im] = self.entries[r * n + c];
            Complex64::new(re, im)
        }))
    }
}

/// `{"modes": N, "entries": [...]}` in row-major order; the side length depends on the matrix kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrixJson {
    pub modes: usize,
    pub entries: Vec<f64>,
}

impl RealMatrixJson {
    pub fn from_matrix(modes: usize, m: &RMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                entries.push(m[(r, c)]);
            }
        }
        Self { modes, entries }
    }

    pub fn to_matrix(&self, side: usize) -> Result<RMatrix> {
        if self.entries.len() != side * side {
            return Err(Error::DimensionMismatch {
                expected: side * side,
                found: self.entries.len(),
            });
        }
        Ok(RMatrix::from_row_slice(side, side, &self.entries))
    }
}

/// `{"modes": N, "a": {...}, "b": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovJson {
    pub modes: usize,
    pub a: ComplexMatrixJson,
    pub b: ComplexMatrixJson,
}

impl ComplexUnitary {
    pub fn to_json(&self) -> ComplexMatrixJson {
        ComplexMatrixJson::from_matrix(&self.m)
    }

    pub fn from_json(j: &ComplexMatrixJson, tol: f64) -> Result<Self> {
        Self::new(j.to_matrix()?, tol)
    }
}

impl SymplecticMap {
    pub fn to_json(&self) -> RealMatrixJson {
        RealMatrixJson::from_matrix(self.modes(), &self.m)
    }

    pub fn from_json(j: &RealMatrixJson, tol: f64) -> Result<Self> {
        Self::new(j.to_matrix(2 * j.modes)?, tol)
    }
}

impl BogoliubovPair {
    pub fn to_json(&self) -> BogoliubovJson {
        BogoliubovJson {
            modes: self.modes(),
            a: ComplexMatrixJson::from_matrix(&self.a),
            b: ComplexMatrixJson::from_matrix(&self.b),
        }
    }

    pub fn from_json(j: &BogoliubovJson, tol: f64) -> Result<Self> {
        let a = j.a.to_matrix()?;
        let b = j.b.to_matrix()?;
        if a.nrows() != j.modes {
            return Err(Error::DimensionMismatch {
                expected: j.modes,
                found: a.nrows(),
            });
        }
        Self::new(a, b, tol)
    }
}
