//! Placement of decomposed networks on the macronode grid and the top-level
//! compile entry points.
//!
//! Grid cell `(row, col)` maps to site `row * period + col`; a horizontal wire
//! moves one column right, a vertical wire one row down.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bloch_messiah::bloch_messiah;
use super::clements::{clements_decompose, rectangular_plan};
use super::components::Component;
use super::reck::triangular_components;
use super::schedule::{Direction, MacronodeInstruction, Port, Role, Schedule, WireIn, WireOut};
use crate::error::{Error, Result};
use crate::gaussian::{max_abs, BogoliubovPair, ComplexUnitary, RMatrix, RealMatrixJson};
use crate::teleport::{
    angles_for_beamsplitter, angles_for_phase, angles_for_shear_pair, angles_for_single_shear, angles_for_squeeze,
    swapped, MacronodeAngles,
};

/// Extra columns added to the grid width to obtain the lattice period.
pub const PERIOD_MARGIN: i64 = 2;

/// A logical mode passing through a node.
#[derive(Debug, Clone, Copy)]
struct Visit {
    mode: usize,
    port: Port,
    dir: Direction,
}

#[derive(Debug, Clone)]
struct GridNode {
    row: i64,
    col: i64,
    role: Role,
    /// Angles realizing the node's map with the B-port mode leaving through the B slot.
    angles: MacronodeAngles,
    visits: Vec<Visit>,
}

#[derive(Debug, Default)]
struct Grid {
    modes: usize,
    nodes: Vec<GridNode>,
}

impl Grid {
    fn new(modes: usize) -> Self {
        Self { modes, nodes: Vec::new() }
    }

    fn add(&mut self, row: i64, col: i64, role: Role, angles: MacronodeAngles, visits: Vec<Visit>) {
        self.nodes.push(GridNode { row, col, role, angles, visits });
    }

    fn build(self) -> Result<Schedule> {
        let n = self.modes;
        if self.nodes.is_empty() {
            return Ok(Schedule::empty(n));
        }
        let min_row = self.nodes.iter().map(|x| x.row).min().unwrap();
        let min_col = self.nodes.iter().map(|x| x.col).min().unwrap();
        let max_col = self.nodes.iter().map(|x| x.col).max().unwrap();
        let period = max_col - min_col + 1 + PERIOD_MARGIN;
        let mut nodes = self.nodes;
        for x in &mut nodes {
            x.row -= min_row;
            x.col -= min_col;
        }
        nodes.sort_by_key(|x| x.row * period + x.col);

        let mut current: Vec<usize> = (0..n).collect();
        let input_wires = current.clone();
        let mut next_wire = n;
        let mut instructions = Vec::with_capacity(nodes.len());
        for x in nodes {
            let site = x.row * period + x.col;
            let swap = match x.visits.as_slice() {
                [v] => matches!((v.port, v.dir), (Port::B, Direction::Vertical) | (Port::D, Direction::Horizontal)),
                [a, b] => {
                    let b_visit = if a.port == Port::B { a } else { b };
                    b_visit.dir == Direction::Vertical
                }
                _ => return Err(Error::structural(Some(site), "node must carry one or two modes")),
            };
            let mut visits = x.visits.clone();
            visits.sort_by_key(|v| v.port == Port::D);
            let mut wires_in = Vec::with_capacity(visits.len());
            let mut wires_out = Vec::with_capacity(visits.len());
            for v in &visits {
                wires_in.push(WireIn { wire: current[v.mode], port: v.port });
                wires_out.push(WireOut { wire: next_wire, dir: v.dir });
                current[v.mode] = next_wire;
                next_wire += 1;
            }
            wires_out.sort_by_key(|w| w.dir == Direction::Vertical);
            instructions.push(MacronodeInstruction {
                site,
                role: x.role,
                angles: if swap { swapped(&x.angles) } else { x.angles },
                swap,
                wires_in,
                wires_out,
            });
        }
        let schedule = Schedule {
            modes: n,
            lattice_period: period,
            instructions,
            input_wires,
            output_wires: current,
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

/// Node contents of a triangle: the map for pair `(j, k)` with `j > k`, and for the diagonal node of mode `k`.
struct TriangleSpec<'a> {
    pair: &'a dyn Fn(usize, usize) -> Result<(Role, MacronodeAngles)>,
    diagonal: &'a dyn Fn(usize) -> Result<(Role, MacronodeAngles)>,
}

/// Places the triangle with its top-left corner at `(row0, col0)`.
///
/// Upright orientation: mode `N-1` enters the corner from the left; mode `k < N-1`
/// enters column `N-1-k` from the top, runs down to its diagonal node, turns right
/// and leaves the triangle on row `N-1-k`. The transposed orientation mirrors rows
/// and columns, except that mode `N-1` enters its corner node from the left.
fn place_triangle(grid: &mut Grid, spec: &TriangleSpec<'_>, row0: i64, col0: i64, transposed: bool) -> Result<()> {
    let n = grid.modes;
    let last = n as i64 - 1;
    let orient = |r: i64, c: i64, v: Visit| -> (i64, i64, Visit) {
        if transposed {
            let port = if v.port == Port::B { Port::D } else { Port::B };
            let dir = if v.dir == Direction::Horizontal { Direction::Vertical } else { Direction::Horizontal };
            (row0 + c, col0 + r, Visit { mode: v.mode, port, dir })
        } else {
            (row0 + r, col0 + c, v)
        }
    };
    for k in 0..n {
        let pos = last - k as i64;
        let port = if k == n - 1 { Port::B } else { Port::D };
        let (r, c, mut v) = orient(pos, pos, Visit { mode: k, port, dir: Direction::Horizontal });
        if transposed && k == n - 1 {
            v.port = Port::B;
        }
        let (role, angles) = (spec.diagonal)(k)?;
        grid.add(r, c, role, angles, vec![v]);
        for j in k + 1..n {
            let (r, c, vj) = orient(last - j as i64, pos, Visit { mode: j, port: Port::B, dir: Direction::Horizontal });
            let (_, _, vk) = orient(last - j as i64, pos, Visit { mode: k, port: Port::D, dir: Direction::Vertical });
            let (role, angles) = (spec.pair)(j, k)?;
            let visits = if transposed { vec![vk, vj] } else { vec![vj, vk] };
            // In the transposed triangle the D-port mode is j; the map is symmetric in (j, k) for every role used.
            grid.add(r, c, role, angles, visits);
        }
    }
    Ok(())
}

/// Indexes `T`/`R` elements of a triangular decomposition by mode.
struct TriangularElements {
    pairs: HashMap<(usize, usize), (f64, f64)>,
    phases: HashMap<usize, f64>,
}

impl TriangularElements {
    fn new(u: &ComplexUnitary) -> Result<Self> {
        let list = triangular_components(u)?;
        let mut pairs = HashMap::new();
        let mut phases = HashMap::new();
        for (index, e) in list.elements.iter().enumerate() {
            match *e {
                Component::T { j, k, tau, phi } if j > k => {
                    pairs.insert((j, k), (tau, phi));
                }
                Component::R { j, phi } => {
                    phases.insert(j, phi);
                }
                other => {
                    return Err(Error::MalformedList {
                        index,
                        message: format!("unexpected element {other:?} after T conversion"),
                    })
                }
            }
        }
        Ok(Self { pairs, phases })
    }

    fn pair(&self, j: usize, k: usize) -> Result<(Role, MacronodeAngles)> {
        let &(tau, phi) = self.pairs.get(&(j, k)).ok_or_else(|| Error::Internal {
            context: format!("missing beamsplitter element ({j}, {k})"),
            residual: 0.0,
        })?;
        Ok((Role::Beamsplitter, angles_for_beamsplitter(tau, phi)))
    }

    fn diagonal(&self, k: usize) -> Result<(Role, MacronodeAngles)> {
        let phi = self.phases.get(&k).copied().unwrap_or(0.0);
        Ok((Role::Phase, angles_for_phase(phi)))
    }
}

fn place_network(grid: &mut Grid, u: &ComplexUnitary, row0: i64, col0: i64, transposed: bool) -> Result<()> {
    let els = TriangularElements::new(u)?;
    let pair = |j, k| els.pair(j, k);
    let diagonal = |k| els.diagonal(k);
    place_triangle(grid, &TriangleSpec { pair: &pair, diagonal: &diagonal }, row0, col0, transposed)
}

/// Triangular beamsplitter-network schedule: `N(N-1)/2` beamsplitter nodes and `N` phase nodes.
pub fn compile_bs_triangular(u: &ComplexUnitary) -> Result<Schedule> {
    let mut grid = Grid::new(u.dim());
    place_network(&mut grid, u, 0, 0, false)?;
    grid.build()
}

/// Rectangular beamsplitter-network schedule: `N` brick-wall layers of nearest-neighbour
/// beamsplitter nodes between an input and an output phase layer. Every node is swapped,
/// so the lower mode of each pair runs down and the upper one runs right.
pub fn compile_bs_rectangular(u: &ComplexUnitary) -> Result<Schedule> {
    let n = u.dim();
    let plan = rectangular_plan(&clements_decompose(u)?)?;
    let mut grid = Grid::new(n);
    for s in 0..n + 2 {
        for key in plan.keys(s) {
            let p = key + 1;
            let (row, col) = ((s as i64 - p) / 2, (s as i64 + p) / 2);
            let phi = plan.phases[s].get(&key).copied().unwrap_or(0.0);
            let (role, angles) = match plan.taus[s].get(&key) {
                Some(&tau) => (Role::Beamsplitter, angles_for_beamsplitter(tau, phi)),
                None => (Role::Phase, angles_for_phase(phi)),
            };
            let mut visits = Vec::with_capacity(2);
            if key >= 0 {
                visits.push(Visit { mode: key as usize, port: Port::B, dir: Direction::Vertical });
            }
            if ((key + 1) as usize) < n {
                visits.push(Visit { mode: (key + 1) as usize, port: Port::D, dir: Direction::Horizontal });
            }
            grid.add(row, col, role, angles, visits);
        }
    }
    grid.build()
}

/// Bloch-Messiah schedule: triangle for `e^{-i pi/4} V^dag`, a column of squeeze nodes,
/// and a transposed triangle for `U e^{i pi/4}`.
pub fn compile_gaussian(pair: &BogoliubovPair) -> Result<Schedule> {
    let n = pair.modes();
    let (u, r, v) = bloch_messiah(pair)?;
    let first = v.adjoint().scaled_by_phase(-FRAC_PI_4);
    let second = u.scaled_by_phase(FRAC_PI_4);
    let mut grid = Grid::new(n);
    place_network(&mut grid, &first, 0, 0, false)?;
    let col = n as i64;
    for (k, &rk) in r.values().iter().enumerate() {
        let arm = angles_for_squeeze(rk)?;
        let role = if rk == 0.0 { Role::Identity } else { Role::Squeeze };
        let visit = Visit { mode: k, port: Port::B, dir: Direction::Horizontal };
        grid.add(n as i64 - 1 - k as i64, col, role, MacronodeAngles::from_pairs(arm, arm), vec![visit]);
    }
    place_network(&mut grid, &second, 0, col + 1, true)?;
    grid.build()
}

/// Real symmetric `N x N` matrix `K` of a multimode shear `p -> p + K x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearMatrix {
    k: RMatrix,
}

impl ShearMatrix {
    pub fn new(k: RMatrix, tol: f64) -> Result<Self> {
        if k.nrows() != k.ncols() {
            return Err(Error::DimensionMismatch { expected: k.nrows(), found: k.ncols() });
        }
        if k.nrows() == 0 {
            return Err(Error::InvalidParameter("shear matrix must have at least one mode".into()));
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("shear entries"));
        }
        let deviation = max_abs(&(&k - k.transpose()));
        if deviation > tol {
            return Err(Error::NotSymmetric { deviation });
        }
        Ok(Self { k })
    }

    /// Seeded random symmetric `K` with entries uniform in `[-bound, bound]`.
    pub fn random(n: usize, seed: u64, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::InvalidParameter(format!("entry bound {bound} must be finite and non-negative")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut k = RMatrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let v = rng.random_range(-bound..=bound);
                k[(r, c)] = v;
                k[(c, r)] = v;
            }
        }
        Self::new(k, 0.0)
    }

    pub fn modes(&self) -> usize {
        self.k.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.k
    }

    /// The symplectic map `[[I, 0], [K, I]]`.
    pub fn symplectic(&self) -> RMatrix {
        let n = self.modes();
        let mut s = RMatrix::identity(2 * n, 2 * n);
        s.view_mut((n, 0), (n, n)).copy_from(&self.k);
        s
    }

    pub fn to_json(&self) -> RealMatrixJson {
        RealMatrixJson::from_matrix(self.modes(), &self.k)
    }

    pub fn from_json(j: &RealMatrixJson, tol: f64) -> Result<Self> {
        Self::new(j.to_matrix(j.modes)?, tol)
    }
}

/// Shear schedule on the triangular footprint: one shear-pair node per mode pair
/// with `kappa = 0, lambda = K_jk`, and one single-mode shear node per mode carrying `K_jj`.
pub fn compile_shear(k: &ShearMatrix) -> Result<Schedule> {
    let m = k.matrix();
    let pair = |j: usize, l: usize| Ok((Role::ShearPair, angles_for_shear_pair(0.0, m[(j, l)])));
    let diagonal = |j: usize| {
        let arm = angles_for_single_shear(m[(j, j)], true);
        Ok((Role::Shear, MacronodeAngles::from_pairs(arm, arm)))
    };
    let mut grid = Grid::new(k.modes());
    place_triangle(&mut grid, &TriangleSpec { pair: &pair, diagonal: &diagonal }, 0, 0, false)?;
    grid.build()
}

/// Layout families for passive networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Triangular,
    Rectangular,
}

pub fn compile_bs(u: &ComplexUnitary, layout: Layout) -> Result<Schedule> {
    match layout {
        Layout::Triangular => compile_bs_triangular(u),
        Layout::Rectangular => compile_bs_rectangular(u),
    }
}
