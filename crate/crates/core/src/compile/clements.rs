//! Rectangular (nearest-neighbour) decomposition with final-phase migration,
//! and the phase gauge sweep that turns it into common-phase macronodes.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::components::{apply_left, apply_right, b_prime};
use super::reck::ZERO_THRESHOLD;
use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, ComplexUnitary};

const CANCEL_CHECK: f64 = 1e-9;

/// `B'_{m,m+1}(tau) R_m(alpha)` on neighbouring modes `(m, m+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshElement {
    pub m: usize,
    pub tau: f64,
    pub alpha: f64,
}

fn cm(tau: f64, alpha: f64) -> Matrix2<Complex64> {
    let e = Complex64::from_polar(1.0, alpha);
    b_prime(tau) * Matrix2::new(e, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
}

impl MeshElement {
    fn block(&self) -> Matrix2<Complex64> {
        cm(self.tau, self.alpha)
    }
}

/// `U = diag(e^{i output_phases}) * L_N * ... * L_1`, where layer `L_l` holds
/// disjoint elements on pairs `(m, m+1)` with `m = l - 1 (mod 2)` (layers counted from 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RectangularMesh {
    pub modes: usize,
    pub layers: Vec<Vec<MeshElement>>,
    pub output_phases: Vec<f64>,
}

impl RectangularMesh {
    pub fn unitary(&self) -> CMatrix {
        let n = self.modes;
        let mut m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            self.output_phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        ));
        for layer in self.layers.iter().rev() {
            for e in layer {
                apply_right(&mut m, e.m, e.m + 1, &e.block());
            }
        }
        m
    }

    pub fn beamsplitter_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }
}

fn right_params(u_m: Complex64, u_m1: Complex64) -> (f64, f64) {
    if u_m.norm() < ZERO_THRESHOLD {
        (0.0, 0.0)
    } else if u_m1.norm() < ZERO_THRESHOLD {
        (FRAC_PI_2, 0.0)
    } else {
        (u_m.norm().atan2(u_m1.norm()), u_m.arg() - u_m1.arg() - FRAC_PI_2)
    }
}

fn left_params(u0: Complex64, u1: Complex64) -> (f64, f64) {
    if u1.norm() < ZERO_THRESHOLD {
        (0.0, 0.0)
    } else if u0.norm() < ZERO_THRESHOLD {
        (FRAC_PI_2, 0.0)
    } else {
        (u1.norm().atan2(u0.norm()), FRAC_PI_2 + u1.arg() - u0.arg())
    }
}

/// Writes `V = diag(e^{i mu}, e^{i nu}) * cm(tau, alpha)`; returns `(mu, nu, tau, alpha)`.
fn split_phase_front(v: &Matrix2<Complex64>) -> (f64, f64, f64, f64) {
    let c = v[(0, 0)].norm();
    let s = v[(0, 1)].norm();
    let tau = s.atan2(c);
    if s < 1e-13 {
        (v[(0, 0)].arg(), v[(1, 1)].arg(), tau, 0.0)
    } else if c < 1e-13 {
        (v[(0, 1)].arg() - FRAC_PI_2, v[(1, 0)].arg() - FRAC_PI_2, tau, 0.0)
    } else {
        let mu = v[(0, 1)].arg() - FRAC_PI_2;
        (mu, v[(1, 1)].arg(), tau, v[(0, 0)].arg() - mu)
    }
}

/// Alternating column/row nulling followed by migration of the residual
/// diagonal through the row-side elements.
pub fn clements_decompose(u: &ComplexUnitary) -> Result<RectangularMesh> {
    let n = u.dim();
    let mut w = u.matrix().clone();
    let mut left: Vec<MeshElement> = Vec::new();
    let mut right: Vec<MeshElement> = Vec::new();
    for i in 1..n {
        if i % 2 == 1 {
            for j in 0..i {
                let m = i - 1 - j;
                let r = n - 1 - j;
                let (tau, alpha) = right_params(w[(r, m)], w[(r, m + 1)]);
                let e = MeshElement { m, tau, alpha };
                apply_right(&mut w, m, m + 1, &e.block().adjoint());
                check_zero(w[(r, m)], r, m)?;
                right.push(e);
            }
        } else {
            for j in 1..=i {
                let m = n + j - i - 2;
                let col = j - 1;
                let (tau, alpha) = left_params(w[(m, col)], w[(m + 1, col)]);
                let e = MeshElement { m, tau, alpha };
                apply_left(&mut w, m, m + 1, &e.block());
                check_zero(w[(m + 1, col)], m + 1, col)?;
                left.push(e);
            }
        }
    }
    for r in 0..n {
        for c in 0..n {
            if r != c {
                check_zero(w[(r, c)], r, c)?;
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| w[(i, i)].arg()).collect();
    let mut migrated = Vec::with_capacity(left.len());
    for e in left.iter().rev() {
        let diag = Matrix2::new(
            Complex64::from_polar(1.0, d[e.m]),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, d[e.m + 1]),
        );
        let v = e.block().adjoint() * diag;
        let (mu, nu, tau, alpha) = split_phase_front(&v);
        d[e.m] = mu;
        d[e.m + 1] = nu;
        migrated.push(MeshElement { m: e.m, tau, alpha });
    }
    migrated.reverse();
    // Product order: leftmost first, so application order is the reverse.
    let product: Vec<MeshElement> = migrated.into_iter().chain(right.into_iter().rev()).collect();
    let layers = assign_layers(n, &product)?;
    Ok(RectangularMesh {
        modes: n,
        layers,
        output_phases: d,
    })
}

fn check_zero(z: Complex64, r: usize, c: usize) -> Result<()> {
    if z.norm() > CANCEL_CHECK {
        return Err(Error::Internal {
            context: format!("nulling element ({r}, {c})"),
            residual: z.norm(),
        });
    }
    Ok(())
}

/// Earliest-layer assignment in application order; checks the brick-wall pattern.
fn assign_layers(n: usize, product: &[MeshElement]) -> Result<Vec<Vec<MeshElement>>> {
    let mut last = vec![0usize; n];
    let mut layers: Vec<Vec<MeshElement>> = vec![Vec::new(); n];
    for e in product.iter().rev() {
        let l = last[e.m].max(last[e.m + 1]) + 1;
        last[e.m] = l;
        last[e.m + 1] = l;
        if l > n || (l - 1) % 2 != e.m % 2 {
            return Err(Error::Internal {
                context: format!("element on ({}, {}) fell into layer {l}", e.m, e.m + 1),
                residual: 0.0,
            });
        }
        layers[l - 1].push(*e);
    }
    for layer in &mut layers {
        layer.sort_by_key(|e| e.m);
    }
    Ok(layers)
}

/// Node key of mode `i` in layer `s`: the lower mode `m` of the pair `(m, m+1)`
/// with `m = s - 1 (mod 2)`; boundary modes fall in half-empty pairs.
pub(crate) fn group_of(s: usize, i: usize) -> i64 {
    let i = i as i64;
    if (i - (s as i64 - 1)).rem_euclid(2) == 0 {
        i
    } else {
        i - 1
    }
}

/// Splits per-mode phases `v` into group-common phases of layer `s` and layer `s + 1`.
fn split_between_layers(v: &[f64], s: usize) -> Result<(BTreeMap<i64, f64>, BTreeMap<i64, f64>)> {
    let mut lo: BTreeMap<i64, f64> = BTreeMap::new();
    let mut hi: BTreeMap<i64, f64> = BTreeMap::new();
    for (i, &vi) in v.iter().enumerate() {
        let (gl, gh) = (group_of(s, i), group_of(s + 1, i));
        match (lo.get(&gl).copied(), hi.get(&gh).copied()) {
            (None, None) => {
                lo.insert(gl, 0.0);
                hi.insert(gh, vi);
            }
            (Some(a), None) => {
                hi.insert(gh, vi - a);
            }
            (None, Some(b)) => {
                lo.insert(gl, vi - b);
            }
            (Some(a), Some(b)) => {
                if (a + b - vi).abs() > 1e-12 {
                    return Err(Error::Internal {
                        context: format!("phase split at mode {i}"),
                        residual: (a + b - vi).abs(),
                    });
                }
            }
        }
    }
    Ok((lo, hi))
}

/// Layers `0..=N+1` of macronodes: phase layers at both ends and beamsplitter
/// layers in between, each node carrying one common phase.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangularPlan {
    pub modes: usize,
    /// `phases[s][m]`: common phase of the node with key `m` in layer `s`.
    pub phases: Vec<BTreeMap<i64, f64>>,
    /// `taus[s][m]`: reflectivity angle of the beamsplitter node with key `m` in layer `s`.
    pub taus: Vec<BTreeMap<i64, f64>>,
}

impl RectangularPlan {
    /// Node keys of layer `s` in increasing order.
    pub fn keys(&self, s: usize) -> Vec<i64> {
        let n = self.modes as i64;
        (-1..n)
            .filter(|&m| (m - (s as i64 - 1)).rem_euclid(2) == 0)
            .filter(|&m| m >= 0 || m + 1 < n)
            .collect()
    }

    /// The network realized by the plan, composed directly from its nodes.
    pub fn unitary(&self) -> CMatrix {
        let n = self.modes;
        let mut m = CMatrix::identity(n, n);
        for s in 0..self.phases.len() {
            let mut layer = CMatrix::identity(n, n);
            for (&key, &phi) in &self.phases[s] {
                let tau = self.taus[s].get(&key).copied().unwrap_or(0.0);
                let e = Complex64::from_polar(1.0, phi);
                if key >= 0 && ((key + 1) as usize) < n {
                    let (a, b) = (key as usize, key as usize + 1);
                    let blk = b_prime(tau) * e;
                    layer[(a, a)] = blk[(0, 0)];
                    layer[(a, b)] = blk[(0, 1)];
                    layer[(b, a)] = blk[(1, 0)];
                    layer[(b, b)] = blk[(1, 1)];
                } else {
                    let i = if key >= 0 { key as usize } else { 0 };
                    layer[(i, i)] = e;
                }
            }
            m = layer * m;
        }
        m
    }
}

pub fn rectangular_plan(mesh: &RectangularMesh) -> Result<RectangularPlan> {
    let n = mesh.modes;
    let mut phases: Vec<BTreeMap<i64, f64>> = vec![BTreeMap::new(); n + 2];
    let mut taus: Vec<BTreeMap<i64, f64>> = vec![BTreeMap::new(); n + 2];
    let add = |phases: &mut Vec<BTreeMap<i64, f64>>, s: usize, part: BTreeMap<i64, f64>| {
        for (k, v) in part {
            *phases[s].entry(k).or_insert(0.0) += v;
        }
    };
    for (l0, layer) in mesh.layers.iter().enumerate() {
        let l = l0 + 1;
        let mut a = vec![0.0; n];
        for e in layer {
            a[e.m] += e.alpha;
            taus[l].insert(e.m as i64, e.tau);
        }
        let (lo, hi) = split_between_layers(&a, l - 1)?;
        add(&mut phases, l - 1, lo);
        add(&mut phases, l, hi);
    }
    let (lo, hi) = split_between_layers(&mesh.output_phases, n)?;
    add(&mut phases, n, lo);
    add(&mut phases, n + 1, hi);
    let mut plan = RectangularPlan { modes: n, phases, taus };
    for s in 0..n + 2 {
        for key in plan.keys(s) {
            plan.phases[s].entry(key).or_insert(0.0);
            let full = key >= 0 && key + 1 < n as i64;
            let is_bs_layer = (1..=n).contains(&s);
            if full && is_bs_layer && !plan.taus[s].contains_key(&key) {
                return Err(Error::Internal {
                    context: format!("missing beamsplitter in layer {s} at pair {key}"),
                    residual: 0.0,
                });
            }
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{max_deviation_c, random_unitary};

    #[test]
    fn mesh_recomposes_with_brick_wall() {
        for n in 1..=8 {
            let u = random_unitary(n, 40 + n as u64);
            let mesh = clements_decompose(&u).unwrap();
            assert!(max_deviation_c(&mesh.unitary(), u.matrix()) < 1e-10, "n = {n}");
            assert_eq!(mesh.beamsplitter_count(), n * (n - 1) / 2);
            for (l0, layer) in mesh.layers.iter().enumerate() {
                assert!(layer.iter().all(|e| e.m % 2 == l0 % 2));
            }
        }
    }

    #[test]
    fn plan_recomposes() {
        for n in 1..=8 {
            let u = random_unitary(n, 70 + n as u64);
            let plan = rectangular_plan(&clements_decompose(&u).unwrap()).unwrap();
            assert!(max_deviation_c(&plan.unitary(), u.matrix()) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn identity_mesh() {
        let mesh = clements_decompose(&ComplexUnitary::identity(5)).unwrap();
        assert!(mesh.layers.iter().flatten().all(|e| e.tau == 0.0));
        assert!(max_deviation_c(&mesh.unitary(), &CMatrix::identity(5, 5)) < 1e-15);
    }
}
