//! Triangular decomposition of a passive network and its rewriting into
//! macronode-ready `T`/`R` form.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::components::{apply_right, Component, ComponentList};
use crate::error::{Error, Result};
use crate::gaussian::ComplexUnitary;

/// Entries below this magnitude count as already cancelled.
pub const ZERO_THRESHOLD: f64 = 1e-12;

const CANCEL_CHECK: f64 = 1e-9;

/// Inverse of `C(tau, phi)` as a block on `(j, k)`.
fn c_inverse(tau: f64, phi: f64) -> Matrix2<Complex64> {
    let (s, c) = tau.sin_cos();
    let e = Complex64::from_polar(1.0, -phi);
    let i = Complex64::i();
    Matrix2::new(e * c, -i * e * s, -i * s, Complex64::new(c, 0.0))
}

/// Parameters of `C_jk` that cancel `u_jk` against `u_jj`.
fn cancel_params(u_jk: Complex64, u_jj: Complex64) -> (f64, f64) {
    if u_jk.norm() < ZERO_THRESHOLD {
        (0.0, 0.0)
    } else if u_jj.norm() < ZERO_THRESHOLD {
        (FRAC_PI_2, 0.0)
    } else {
        let tau = u_jk.norm().atan2(u_jj.norm());
        let phi = u_jj.arg() - u_jk.arg() + FRAC_PI_2;
        (tau, phi)
    }
}

/// Decomposes `U` as `R_0 (R_1 C_10) (R_2 C_20 C_21) ...` with `C` and `R` elements.
pub fn reck_decompose(u: &ComplexUnitary) -> Result<ComponentList> {
    let n = u.dim();
    let mut w = u.matrix().clone();
    let mut params = vec![vec![(0.0, 0.0); n]; n];
    for j in (1..n).rev() {
        for k in (0..j).rev() {
            let (tau, phi) = cancel_params(w[(j, k)], w[(j, j)]);
            apply_right(&mut w, j, k, &c_inverse(tau, phi));
            let residual = w[(j, k)].norm();
            if residual > CANCEL_CHECK {
                return Err(Error::Internal {
                    context: format!("cancelling element ({j}, {k})"),
                    residual,
                });
            }
            params[j][k] = (tau, phi);
        }
    }
    for r in 0..n {
        for c in 0..n {
            if r != c && w[(r, c)].norm() > CANCEL_CHECK {
                return Err(Error::Internal {
                    context: format!("residual off-diagonal element ({r}, {c})"),
                    residual: w[(r, c)].norm(),
                });
            }
        }
    }
    let mut elements = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        elements.push(Component::R { j, phi: w[(j, j)].arg() });
        for (k, &(tau, phi)) in params[j].iter().enumerate().take(j) {
            elements.push(Component::C { j, k, tau, phi });
        }
    }
    ComponentList::new(n, elements)
}

/// Rewrites each group `R_j C_j0 ... C_j,j-1` as `S_j0 ... S_j,j-1 R_j` using
/// `R_j(a) C_jk(tau, b) = S_jk(tau, a) R_j(b)`.
pub fn c_to_s(list: &ComponentList) -> Result<ComponentList> {
    let els = &list.elements;
    let mut out = Vec::with_capacity(els.len());
    let mut i = 0;
    while i < els.len() {
        match els[i] {
            Component::R { j, phi } => {
                let mut carried = phi;
                i += 1;
                while let Some(&Component::C { j: jc, k, tau, phi }) = els.get(i) {
                    if jc != j {
                        return Err(Error::MalformedList {
                            index: i,
                            message: format!("C element on mode {jc} follows a phase on mode {j}"),
                        });
                    }
                    out.push(Component::S { j, k, tau, phi: carried });
                    carried = phi;
                    i += 1;
                }
                out.push(Component::R { j, phi: carried });
            }
            other => {
                return Err(Error::MalformedList {
                    index: i,
                    message: format!("expected a phase element opening a group, found {other:?}"),
                });
            }
        }
    }
    ComponentList::new(list.modes, out)
}

/// Converts `S` elements into `T` elements right to left. Each conversion leaves a
/// compensation phase on the second mode that is moved left, updating the `S`
/// elements it passes, until it merges into that mode's `R` element.
pub fn s_to_t(list: &ComponentList) -> Result<ComponentList> {
    let mut els = list.elements.clone();
    for pos in (0..els.len()).rev() {
        let Component::S { j, k, tau, phi } = els[pos] else {
            if let Component::C { .. } = els[pos] {
                return Err(Error::MalformedList {
                    index: pos,
                    message: "C element in S/R list".into(),
                });
            }
            continue;
        };
        els[pos] = Component::T { j, k, tau, phi };
        let comp = -phi;
        let mut q = pos;
        loop {
            if q == 0 {
                return Err(Error::MalformedList {
                    index: pos,
                    message: format!("no phase element on mode {k} absorbs the compensation"),
                });
            }
            q -= 1;
            match els[q] {
                Component::R { j: jr, ref mut phi } if jr == k => {
                    *phi += comp;
                    break;
                }
                Component::S { j: jp, k: kp, ref mut phi, .. } if kp == k => {
                    *phi += comp;
                    shift_next_in_group(&mut els, q, jp, -comp)?;
                }
                Component::R { .. } => {}
                e => {
                    let (a, b) = e.modes();
                    if a == k || b == Some(k) {
                        return Err(Error::MalformedList {
                            index: q,
                            message: format!("compensation on mode {k} blocked by {e:?}"),
                        });
                    }
                }
            }
        }
    }
    ComponentList::new(list.modes, els)
}

/// Adds `delta` to the phase of the first `S` or `R` element after `q` whose first mode is `jp`.
fn shift_next_in_group(els: &mut [Component], q: usize, jp: usize, delta: f64) -> Result<()> {
    for (idx, e) in els.iter_mut().enumerate().skip(q + 1) {
        match e {
            Component::S { j, phi, .. } | Component::R { j, phi } if *j == jp => {
                *phi += delta;
                return Ok(());
            }
            Component::T { j, .. } | Component::C { j, .. } if *j == jp => {
                return Err(Error::MalformedList {
                    index: idx,
                    message: format!("unexpected element while moving compensation through group {jp}"),
                });
            }
            _ => {}
        }
    }
    Err(Error::MalformedList {
        index: q,
        message: format!("group {jp} has no element after position {q}"),
    })
}

/// The full chain `reck_decompose -> c_to_s -> s_to_t`.
pub fn triangular_components(u: &ComplexUnitary) -> Result<ComponentList> {
    s_to_t(&c_to_s(&reck_decompose(u)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{max_deviation_c, random_unitary, CMatrix};

    fn check_chain(n: usize, seed: u64) {
        let u = random_unitary(n, seed);
        let c = reck_decompose(&u).unwrap();
        assert!(max_deviation_c(&c.unitary(), u.matrix()) < 1e-10);
        assert_eq!(c.beamsplitter_count(), n * (n - 1) / 2);
        assert_eq!(c.phase_count(), n);
        let s = c_to_s(&c).unwrap();
        assert!(max_deviation_c(&s.unitary(), u.matrix()) < 1e-10);
        let t = s_to_t(&s).unwrap();
        assert!(max_deviation_c(&t.unitary(), u.matrix()) < 1e-9);
        assert!(t
            .elements
            .iter()
            .all(|e| matches!(e, Component::T { .. } | Component::R { .. })));
        assert_eq!(t.beamsplitter_count(), n * (n - 1) / 2);
    }

    #[test]
    fn chain_recomposes() {
        for n in 1..=7 {
            check_chain(n, 100 + n as u64);
        }
    }

    #[test]
    fn single_mode_is_one_phase() {
        let u = random_unitary(1, 4);
        let c = reck_decompose(&u).unwrap();
        assert_eq!(c.elements.len(), 1);
        let Component::R { phi, .. } = c.elements[0] else { panic!() };
        assert!((phi - u.matrix()[(0, 0)].arg()).abs() < 1e-15);
    }

    #[test]
    fn identity_gives_zero_parameters() {
        let c = reck_decompose(&ComplexUnitary::identity(4)).unwrap();
        for e in &c.elements {
            match *e {
                Component::C { tau, phi, .. } => assert!(tau == 0.0 && phi == 0.0),
                Component::R { phi, .. } => assert_eq!(phi, 0.0),
                _ => unreachable!(),
            }
        }
        let t = s_to_t(&c_to_s(&c).unwrap()).unwrap();
        assert!(max_deviation_c(&t.unitary(), &CMatrix::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn permutation_hits_degenerate_branches() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 2)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(0.0, 1.0);
        m[(2, 1)] = Complex64::new(-1.0, 0.0);
        let u = ComplexUnitary::new(m, 1e-12).unwrap();
        let t = triangular_components(&u).unwrap();
        assert!(max_deviation_c(&t.unitary(), u.matrix()) < 1e-12);
    }

    #[test]
    fn single_group_rewrite() {
        let list = ComponentList::new(
            2,
            vec![
                Component::R { j: 0, phi: 0.1 },
                Component::R { j: 1, phi: 0.4 },
                Component::C { j: 1, k: 0, tau: 0.7, phi: -0.9 },
            ],
        )
        .unwrap();
        let s = c_to_s(&list).unwrap();
        assert_eq!(
            s.elements,
            vec![
                Component::R { j: 0, phi: 0.1 },
                Component::S { j: 1, k: 0, tau: 0.7, phi: 0.4 },
                Component::R { j: 1, phi: -0.9 },
            ]
        );
        let t = s_to_t(&s).unwrap();
        // The compensation of the only S element lands directly on R_0.
        assert_eq!(
            t.elements,
            vec![
                Component::R { j: 0, phi: 0.1 - 0.4 },
                Component::T { j: 1, k: 0, tau: 0.7, phi: 0.4 },
                Component::R { j: 1, phi: -0.9 },
            ]
        );
        assert!(max_deviation_c(&t.unitary(), &list.unitary()) < 1e-15);
    }

    #[test]
    fn malformed_lists_rejected() {
        let bad = ComponentList::new(2, vec![Component::C { j: 1, k: 0, tau: 0.1, phi: 0.0 }]).unwrap();
        assert!(matches!(c_to_s(&bad), Err(Error::MalformedList { index: 0, .. })));
        let bad = ComponentList::new(
            3,
            vec![Component::R { j: 2, phi: 0.0 }, Component::C { j: 1, k: 0, tau: 0.1, phi: 0.0 }],
        )
        .unwrap();
        assert!(matches!(c_to_s(&bad), Err(Error::MalformedList { index: 1, .. })));
        let orphan = ComponentList::new(2, vec![Component::S { j: 1, k: 0, tau: 0.1, phi: 0.3 }]).unwrap();
        assert!(matches!(s_to_t(&orphan), Err(Error::MalformedList { .. })));
    }
}
