use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::CMatrix;

/// `B'(tau) = [[cos, i sin], [i sin, cos]]`.
pub(crate) fn b_prime(tau: f64) -> Matrix2<Complex64> {
    let (s, c) = tau.sin_cos();
    Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::new(0.0, s),
        Complex64::new(0.0, s),
        Complex64::new(c, 0.0),
    )
}

pub(crate) fn phase(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// Left-multiplies rows `(j, k)` of `m` by the 2x2 block `g`.
pub(crate) fn apply_left(m: &mut CMatrix, j: usize, k: usize, g: &Matrix2<Complex64>) {
    for c in 0..m.ncols() {
        let (x, y) = (m[(j, c)], m[(k, c)]);
        m[(j, c)] = g[(0, 0)] * x + g[(0, 1)] * y;
        m[(k, c)] = g[(1, 0)] * x + g[(1, 1)] * y;
    }
}

/// Right-multiplies columns `(j, k)` of `m` by the 2x2 block `g`.
pub(crate) fn apply_right(m: &mut CMatrix, j: usize, k: usize, g: &Matrix2<Complex64>) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, j)], m[(r, k)]);
        m[(r, j)] = x * g[(0, 0)] + y * g[(1, 0)];
        m[(r, k)] = x * g[(0, 1)] + y * g[(1, 1)];
    }
}

/// One element of a decomposed beamsplitter network, with zero-based mode indices.
///
/// - `C(j,k,tau,phi) = B'_jk(tau) R_j(phi)`
/// - `S(j,k,tau,phi) = R_j(phi) B'_jk(tau)`
/// - `T(j,k,tau,phi) = R_j(phi) R_k(phi) B'_jk(tau)`
/// - `R(j,phi)`: phase `e^{i phi}` on mode `j`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Component {
    C { j: usize, k: usize, tau: f64, phi: f64 },
    S { j: usize, k: usize, tau: f64, phi: f64 },
    T { j: usize, k: usize, tau: f64, phi: f64 },
    R { j: usize, phi: f64 },
}

impl Component {
    pub fn is_beamsplitter(&self) -> bool {
        !matches!(self, Component::R { .. })
    }

    /// Modes touched by the element.
    pub fn modes(&self) -> (usize, Option<usize>) {
        match *self {
            Component::C { j, k, .. } | Component::S { j, k, .. } | Component::T { j, k, .. } => (j, Some(k)),
            Component::R { j, .. } => (j, None),
        }
    }

    /// The element's 2x2 block on `(j, k)`; phase elements return their 1x1 entry in `(0, 0)`.
    pub(crate) fn block(&self) -> Matrix2<Complex64> {
        match *self {
            Component::C { tau, phi, .. } => {
                b_prime(tau) * Matrix2::from_diagonal(&nalgebra::Vector2::new(phase(phi), Complex64::new(1.0, 0.0)))
            }
            Component::S { tau, phi, .. } => {
                Matrix2::from_diagonal(&nalgebra::Vector2::new(phase(phi), Complex64::new(1.0, 0.0))) * b_prime(tau)
            }
            Component::T { tau, phi, .. } => b_prime(tau) * phase(phi),
            Component::R { phi, .. } => {
                Matrix2::from_diagonal(&nalgebra::Vector2::new(phase(phi), Complex64::new(1.0, 0.0)))
            }
        }
    }

    /// Right-multiplies `m` by this element.
    pub(crate) fn apply_right_to(&self, m: &mut CMatrix) {
        match self.modes() {
            (j, Some(k)) => apply_right(m, j, k, &self.block()),
            (j, None) => {
                let p = self.block()[(0, 0)];
                for r in 0..m.nrows() {
                    m[(r, j)] *= p;
                }
            }
        }
    }
}

/// Ordered product of elements; the first element is leftmost, so the last one acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentList {
    pub modes: usize,
    pub elements: Vec<Component>,
}

impl ComponentList {
    pub fn new(modes: usize, elements: Vec<Component>) -> Result<Self> {
        for (index, e) in elements.iter().enumerate() {
            let (j, k) = e.modes();
            if j >= modes || k.is_some_and(|k| k >= modes) {
                return Err(Error::MalformedList {
                    index,
                    message: format!("mode index out of range for {modes} modes"),
                });
            }
            if k == Some(j) {
                return Err(Error::InvalidModePair { j, k: j });
            }
        }
        Ok(Self { modes, elements })
    }

    /// The network matrix represented by the product.
    pub fn unitary(&self) -> CMatrix {
        let mut m = CMatrix::identity(self.modes, self.modes);
        for e in &self.elements {
            e.apply_right_to(&mut m);
        }
        m
    }

    pub fn beamsplitter_count(&self) -> usize {
        self.elements.iter().filter(|e| e.is_beamsplitter()).count()
    }

    pub fn phase_count(&self) -> usize {
        self.elements.len() - self.beamsplitter_count()
    }
}
