//! Micronode-level covariance simulation of the time-multiplexed quad-rail lattice.
//!
//! Each time index `t` carries four local micronodes `(a, b, c, d)`. Rails `a`, `c`
//! start p-squeezed and `b`, `d` x-squeezed. Half beamsplitters pair `(a, b)` and
//! `(c, d)`, the delay lines relabel `b` to `t + 1` and `d` to `t + period`, and a
//! foursplitter mixes each macronode. The state before the foursplitter is the
//! distributed basis `(A, B, C, D)`, related to the local one by `local = F distributed`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DVector, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::compile::{Direction, Port, Schedule};
use crate::error::{Error, Result};
use crate::gaussian::{foursplitter_matrix, GaussianState, RMatrix, SymplecticMap};
use crate::teleport::{feedforward_matrix, MacronodeAngles};

/// Measured-quadrature variances are floored to this value before conditioning.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Squeezing in dB to the dimensionless squeeze parameter.
pub fn db_to_r(db: f64) -> f64 {
    db * std::f64::consts::LN_10 / 20.0
}

/// Local micronode rail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rail {
    A,
    B,
    C,
    D,
}

impl Rail {
    pub const ALL: [Rail; 4] = [Rail::A, Rail::B, Rail::C, Rail::D];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Rail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["a", "b", "c", "d"][self.index()])
    }
}

/// A light pulse `(rail, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PulseId {
    pub rail: Rail,
    pub t: i64,
}

/// A mode slot of the simulated state: a lattice pulse, or an input that never enters the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Pulse(PulseId),
    Detached(usize),
}

/// Where an input mode goes when it is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InjectionSite {
    /// Replaces the distributed mode `(B, t)` or `(D, t)` before the foursplitter.
    Port { t: i64, port: Port },
    /// Kept alongside the lattice untouched.
    Detached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneRecord {
    pub pulse: PulseId,
    pub angle: f64,
    pub outcome: f64,
}

/// Gaussian state of a window of the lattice, with its mode table.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    slots: Vec<Slot>,
    state: GaussianState,
    t_min: i64,
    t_max: i64,
    period: i64,
    r: f64,
    injected: bool,
}

/// Two-mode squeezed covariance of a pair `(first, second)` built from a p-squeezed
/// and an x-squeezed vacuum on the half beamsplitter: `(var, cov_x, cov_p)`.
fn tms_entries(r: f64) -> (f64, f64, f64) {
    let v = 0.5 * (2.0 * r).cosh();
    let c = 0.5 * (2.0 * r).sinh();
    (v, c, -c)
}

impl LatticeState {
    pub fn window(&self) -> (i64, i64) {
        (self.t_min, self.t_max)
    }

    pub fn lattice_period(&self) -> i64 {
        self.period
    }

    pub fn squeezing(&self) -> f64 {
        self.r
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn gaussian(&self) -> &GaussianState {
        &self.state
    }

    pub fn modes(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_of(&self, slot: Slot) -> Option<usize> {
        self.slots.iter().position(|&s| s == slot)
    }

    fn pulse_index(&self, rail: Rail, t: i64) -> Result<usize> {
        if t < self.t_min || t > self.t_max {
            return Err(Error::OutOfWindow(format!(
                "macronode {t} outside the window [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        self.slot_of(Slot::Pulse(PulseId { rail, t }))
            .ok_or_else(|| Error::State(format!("micronode ({rail}, {t}) was already measured")))
    }

    fn macronode_indices(&self, t: i64) -> Result<[usize; 4]> {
        Ok([
            self.pulse_index(Rail::A, t)?,
            self.pulse_index(Rail::B, t)?,
            self.pulse_index(Rail::C, t)?,
            self.pulse_index(Rail::D, t)?,
        ])
    }

    /// Variance of the quadrature combination `sum_i x_i w_i + p_i v_i` given as `(slot, wx, wp)` triples.
    fn combination_variance(&self, terms: &[(usize, f64, f64)]) -> f64 {
        let h = self.functional(terms);
        (h.transpose() * &self.state.cov * &h)[(0, 0)]
    }

    fn functional(&self, terms: &[(usize, f64, f64)]) -> DVector<f64> {
        let m = self.modes();
        let mut h = DVector::zeros(2 * m);
        for &(i, wx, wp) in terms {
            h[i] += wx;
            h[m + i] += wp;
        }
        h
    }

    /// Covariance of the listed macronodes rewritten in the distributed basis, ordered
    /// `(x_A, x_B, x_C, x_D per macronode.., p_A, .. )`.
    pub fn distributed_covariance(&self, ts: &[i64]) -> Result<RMatrix> {
        let f = foursplitter_matrix();
        let m = self.modes();
        let k = 4 * ts.len();
        let mut e = RMatrix::zeros(2 * k, 2 * m);
        for (n, &t) in ts.iter().enumerate() {
            let idx = self.macronode_indices(t)?;
            for dist in 0..4 {
                for (loc, &slot) in idx.iter().enumerate() {
                    e[(4 * n + dist, slot)] = f[(loc, dist)];
                    e[(k + 4 * n + dist, m + slot)] = f[(loc, dist)];
                }
            }
        }
        Ok(&e * &self.state.cov * e.transpose())
    }

    /// The homodyne row `x sin(theta) + p cos(theta)` on one slot.
    fn homodyne_row(&self, slot: usize, theta: f64) -> DVector<f64> {
        let (s, c) = theta.sin_cos();
        self.functional(&[(slot, s, c)])
    }

    fn remove_slots(&mut self, mut gone: Vec<usize>) {
        gone.sort_unstable();
        let m = self.modes();
        let keep: Vec<usize> = (0..m).filter(|i| gone.binary_search(i).is_err()).collect();
        let rows: Vec<usize> = keep.iter().copied().chain(keep.iter().map(|&i| m + i)).collect();
        self.state.mean = self.state.mean.select_rows(&rows);
        self.state.cov = self.state.cov.select_rows(&rows).select_columns(&rows);
        self.slots = keep.iter().map(|&i| self.slots[i]).collect();
    }

    /// Adds a displacement `(dx, dp)` to distributed mode `dist` (0..4 for `A..D`) of macronode `t`.
    fn displace_distributed(&mut self, t: i64, dist: usize, dx: f64, dp: f64) -> Result<()> {
        let f = foursplitter_matrix();
        let idx = self.macronode_indices(t)?;
        let m = self.modes();
        for (loc, &slot) in idx.iter().enumerate() {
            self.state.mean[slot] += f[(loc, dist)] * dx;
            self.state.mean[m + slot] += f[(loc, dist)] * dp;
        }
        Ok(())
    }

    /// Rows extracting the distributed mode `dist` of macronode `t` as `(x row, p row)`.
    fn distributed_rows(&self, t: i64, dist: usize) -> Result<(DVector<f64>, DVector<f64>)> {
        let f = foursplitter_matrix();
        let idx = self.macronode_indices(t)?;
        let terms_x: Vec<_> = idx.iter().enumerate().map(|(loc, &s)| (s, f[(loc, dist)], 0.0)).collect();
        let terms_p: Vec<_> = idx.iter().enumerate().map(|(loc, &s)| (s, 0.0, f[(loc, dist)])).collect();
        Ok((self.functional(&terms_x), self.functional(&terms_p)))
    }
}

fn check_window(t_min: i64, t_max: i64, period: i64, r: f64) -> Result<()> {
    if period < 1 {
        return Err(Error::Configuration(format!("lattice period {period} must be positive")));
    }
    if t_max - t_min < period {
        return Err(Error::Configuration(format!(
            "window [{t_min}, {t_max}] does not cover one lattice period {period}"
        )));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("squeezing {r} must be finite and non-negative")));
    }
    Ok(())
}

/// Builds the windowed lattice with the given inputs substituted for distributed modes.
fn build_network(
    t_min: i64,
    t_max: i64,
    period: i64,
    r: f64,
    inputs: Option<(&GaussianState, &[InjectionSite])>,
) -> Result<LatticeState> {
    check_window(t_min, t_max, period, r)?;
    let count = (t_max - t_min + 1) as usize;
    let lattice_modes = 4 * count;
    let (input_state, sites) = match inputs {
        Some((s, sites)) => (Some(s), sites),
        None => (None, &[][..]),
    };
    if let Some(s) = input_state {
        if s.modes() != sites.len() {
            return Err(Error::DimensionMismatch {
                expected: sites.len(),
                found: s.modes(),
            });
        }
    }
    let detached: Vec<usize> = sites
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, InjectionSite::Detached))
        .map(|(i, _)| i)
        .collect();
    let m = lattice_modes + detached.len();
    let slot = |rail: Rail, t: i64| -> Option<usize> {
        (t_min..=t_max).contains(&t).then(|| 4 * (t - t_min) as usize + rail.index())
    };

    // Input index for each replaced distributed mode.
    let mut replaced: Vec<Option<usize>> = vec![None; lattice_modes];
    for (i, site) in sites.iter().enumerate() {
        if let InjectionSite::Port { t, port } = *site {
            let rail = match port {
                Port::B => Rail::B,
                Port::D => Rail::D,
            };
            let Some(s) = slot(rail, t) else {
                return Err(Error::Configuration(format!("injection site {t} outside the window")));
            };
            if replaced[s].replace(i).is_some() {
                return Err(Error::Configuration(format!("two inputs injected at ({rail}, {t})")));
            }
        }
    }

    let mut cov = RMatrix::zeros(2 * m, 2 * m);
    let mut mean = DVector::zeros(2 * m);
    let (v, cx, cp) = tms_entries(r);
    for s in (t_min - period)..=t_max {
        for (first, second, t2) in [(Rail::A, Rail::B, s + 1), (Rail::C, Rail::D, s + period)] {
            let i = slot(first, s);
            let j = slot(second, t2);
            let injected = j.is_some_and(|j| replaced[j].is_some());
            if injected {
                if let Some(i) = i {
                    cov[(i, i)] = 0.5;
                    cov[(m + i, m + i)] = 0.5;
                }
                continue;
            }
            for k in [i, j].into_iter().flatten() {
                cov[(k, k)] = v;
                cov[(m + k, m + k)] = v;
            }
            if let (Some(i), Some(j)) = (i, j) {
                cov[(i, j)] = cx;
                cov[(j, i)] = cx;
                cov[(m + i, m + j)] = cp;
                cov[(m + j, m + i)] = cp;
            }
        }
    }

    let mut slots: Vec<Slot> = (0..lattice_modes)
        .map(|k| {
            Slot::Pulse(PulseId {
                rail: Rail::ALL[k % 4],
                t: t_min + (k / 4) as i64,
            })
        })
        .collect();
    slots.extend(detached.iter().map(|&i| Slot::Detached(i)));

    if let Some(input) = input_state {
        // Position of every input mode in the new state.
        let mut target = vec![0; sites.len()];
        for (k, r) in replaced.iter().enumerate() {
            if let Some(i) = r {
                target[*i] = k;
            }
        }
        for (n, &i) in detached.iter().enumerate() {
            target[i] = lattice_modes + n;
        }
        let k = sites.len();
        for a in 0..k {
            for q in [0, 1] {
                mean[q * m + target[a]] = input.mean[q * k + a];
                for b in 0..k {
                    for q2 in [0, 1] {
                        cov[(q * m + target[a], q2 * m + target[b])] = input.cov[(q * k + a, q2 * k + b)];
                    }
                }
            }
        }
    }

    // Foursplitter per macronode: local = F distributed.
    let f = foursplitter_matrix();
    let mut total = RMatrix::identity(2 * m, 2 * m);
    for n in 0..count {
        for q in [0, 1] {
            let base = q * m + 4 * n;
            total.view_mut((base, base), (4, 4)).copy_from(&f);
        }
    }
    let state = GaussianState::new(&total * mean, &total * cov * total.transpose())?;
    Ok(LatticeState {
        slots,
        state,
        t_min,
        t_max,
        period,
        r,
        injected: input_state.is_some(),
    })
}

/// The finite-squeezing lattice on macronodes `t_min..=t_max`.
pub fn build_qrl(t_min: i64, t_max: i64, lattice_period: i64, r: f64) -> Result<LatticeState> {
    build_network(t_min, t_max, lattice_period, r, None)
}

/// Variances of the four local nullifiers at macronode `t`. These are
/// `(p-combination with t+1, x-combination with t+1, p-combination with t+period,
/// x-combination with t+period)`, each equal to `4 e^{-2r}` on the lattice.
pub fn nullifier_variances(state: &LatticeState, t: i64) -> Result<[f64; 4]> {
    let here = state.macronode_indices(t)?;
    let next = state.macronode_indices(t + 1)?;
    let below = state.macronode_indices(t + state.period)?;
    let horizontal_here = [1.0, -1.0, 1.0, -1.0];
    let horizontal_next = [1.0, 1.0, 1.0, 1.0];
    let vertical_here = [-1.0, 1.0, 1.0, -1.0];
    let vertical_below = [-1.0, -1.0, 1.0, 1.0];
    let combine = |a: &[f64; 4], ia: &[usize; 4], sa: f64, b: &[f64; 4], ib: &[usize; 4], p: bool| {
        let mut terms = Vec::with_capacity(8);
        for l in 0..4 {
            let (wa, wb) = (sa * a[l], b[l]);
            if p {
                terms.push((ia[l], 0.0, wa));
                terms.push((ib[l], 0.0, wb));
            } else {
                terms.push((ia[l], wa, 0.0));
                terms.push((ib[l], wb, 0.0));
            }
        }
        state.combination_variance(&terms)
    };
    Ok([
        combine(&horizontal_here, &here, 1.0, &horizontal_next, &next, true),
        combine(&horizontal_here, &here, -1.0, &horizontal_next, &next, false),
        combine(&vertical_here, &here, 1.0, &vertical_below, &below, true),
        combine(&vertical_here, &here, -1.0, &vertical_below, &below, false),
    ])
}

/// Rebuilds the lattice with `inputs` placed at the given sites instead of squeezed pairs.
/// The vacated partner of each replaced distributed mode is left in vacuum.
pub fn inject_inputs(state: &LatticeState, inputs: &GaussianState, sites: &[InjectionSite]) -> Result<LatticeState> {
    if state.injected {
        return Err(Error::State("inputs were already injected into this lattice".into()));
    }
    if state.modes() != 4 * (state.t_max - state.t_min + 1) as usize {
        return Err(Error::State("cannot inject into a partially measured lattice".into()));
    }
    build_network(state.t_min, state.t_max, state.period, state.r, Some((inputs, sites)))
}

/// Homodyne measurement of `p(theta)` on `a, b, c, d` of macronode `t`, in that order,
/// by Gaussian conditioning. The measured modes leave the state.
pub fn measure_macronode(
    state: &mut LatticeState,
    t: i64,
    angles: &MacronodeAngles,
    seed: u64,
) -> Result<[HomodyneRecord; 4]> {
    angles.validate()?;
    state.macronode_indices(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas = angles.to_array();
    let mut records = [HomodyneRecord {
        pulse: PulseId { rail: Rail::A, t },
        angle: 0.0,
        outcome: 0.0,
    }; 4];
    let mut gone = Vec::with_capacity(4);
    for (l, rail) in Rail::ALL.into_iter().enumerate() {
        let slot = state.pulse_index(rail, t)?;
        let h = state.homodyne_row(slot, thetas[l]);
        let c = &state.state.cov * &h;
        let expected = h.dot(&state.state.mean);
        let var = h.dot(&c).max(VARIANCE_FLOOR);
        let z: f64 = rng.sample(StandardNormal);
        let outcome = expected + var.sqrt() * z;
        state.state.mean += &c * ((outcome - expected) / var);
        state.state.cov -= &c * c.transpose() / var;
        gone.push(slot);
        records[l] = HomodyneRecord {
            pulse: PulseId { rail, t },
            angle: thetas[l],
            outcome,
        };
    }
    state.remove_slots(gone);
    Ok(records)
}

/// Displaces the teleported outputs, distributed `(B, targets[0])` and `(D, targets[1])`,
/// by the feedforward of the macronode outcomes. Targets outside the window or already
/// consumed are skipped.
pub fn apply_feedforward(
    state: &mut LatticeState,
    records: &[HomodyneRecord; 4],
    targets: [i64; 2],
    angles: &MacronodeAngles,
) -> Result<()> {
    let ff: Matrix4<f64> = feedforward_matrix(angles)?;
    let outcomes = nalgebra::Vector4::from_iterator(records.iter().map(|r| r.outcome));
    let d = ff * outcomes;
    for (arm, (&t, dist)) in targets.iter().zip([1usize, 3]).enumerate() {
        if t < state.t_min || t > state.t_max || state.slot_of(Slot::Pulse(PulseId { rail: Rail::A, t })).is_none() {
            continue;
        }
        state.displace_distributed(t, dist, d[arm], d[2 + arm])?;
    }
    Ok(())
}

/// Measures macronode `t` and applies its feedforward, averaged over all outcomes.
/// The result is the deterministic channel `X -> T X` where the measured quadratures
/// enter the targets through the feedforward matrix.
pub fn teleport_averaged(state: &mut LatticeState, t: i64, angles: &MacronodeAngles, targets: [i64; 2]) -> Result<()> {
    angles.validate()?;
    let ff: Matrix4<f64> = feedforward_matrix(angles)?;
    let idx = state.macronode_indices(t)?;
    let thetas = angles.to_array();
    let rows: Vec<DVector<f64>> = idx.iter().zip(thetas).map(|(&s, th)| state.homodyne_row(s, th)).collect();
    let m = state.modes();
    let mut full = RMatrix::identity(2 * m, 2 * m);
    let f = foursplitter_matrix();
    for (arm, (&target, dist)) in targets.iter().zip([1usize, 3]).enumerate() {
        if target < state.t_min || target > state.t_max || state.slot_of(Slot::Pulse(PulseId { rail: Rail::A, t: target })).is_none() {
            continue;
        }
        let tidx = state.macronode_indices(target)?;
        for (q, block) in [(arm, 0), (2 + arm, m)] {
            let mut shift = DVector::zeros(2 * m);
            for (l, h) in rows.iter().enumerate() {
                shift.axpy(ff[(q, l)], h, 1.0);
            }
            for (loc, &slot) in tidx.iter().enumerate() {
                let mut row = full.row_mut(block + slot);
                row += shift.transpose() * f[(loc, dist)];
            }
        }
    }
    state.state.mean = &full * &state.state.mean;
    state.state.cov = &full * &state.state.cov * full.transpose();
    state.remove_slots(idx.to_vec());
    Ok(())
}

/// How a run treats the homodyne outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcomes {
    /// One shot: outcomes sampled from a seeded generator, state conditioned on them.
    Sampled(u64),
    /// Ensemble over all outcomes: the deterministic channel the schedule implements.
    Averaged,
}

/// Runs a schedule for one seeded shot and returns the conditional output-wire state.
pub fn run_schedule(schedule: &Schedule, inputs: &GaussianState, r: f64, seed: u64) -> Result<GaussianState> {
    run_schedule_with(schedule, inputs, r, Outcomes::Sampled(seed), |_| {})
}

/// Outcome-averaged output of a schedule, which carries the finite-squeezing noise.
pub fn run_schedule_averaged(schedule: &Schedule, inputs: &GaussianState, r: f64) -> Result<GaussianState> {
    run_schedule_with(schedule, inputs, r, Outcomes::Averaged, |_| {})
}

/// Runs a schedule, calling `observe` on the state after construction and after every macronode.
pub fn run_schedule_with(
    schedule: &Schedule,
    inputs: &GaussianState,
    r: f64,
    outcomes: Outcomes,
    mut observe: impl FnMut(&LatticeState),
) -> Result<GaussianState> {
    schedule.validate()?;
    let n = schedule.modes;
    if inputs.modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: inputs.modes(),
        });
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("squeezing {r} must be finite and non-negative")));
    }
    let input_of = |w: usize| schedule.input_wires.iter().position(|&x| x == w);
    if schedule.instructions.is_empty() {
        let order: Vec<usize> = schedule.output_wires.iter().filter_map(|&w| input_of(w)).collect();
        return Ok(select_modes(inputs, &order));
    }
    let period = schedule.lattice_period;
    let t_min = schedule.instructions.iter().map(|i| i.site).min().unwrap_or(0);
    let t_max = schedule.instructions.iter().map(|i| i.site).max().unwrap_or(0) + period;

    // Entry port of every input wire, and the distributed mode carrying every node output.
    let mut sites = vec![InjectionSite::Detached; n];
    let mut carrier: HashMap<usize, (i64, usize)> = HashMap::new();
    for ins in &schedule.instructions {
        for wi in &ins.wires_in {
            if let Some(i) = input_of(wi.wire) {
                sites[i] = InjectionSite::Port { t: ins.site, port: wi.port };
            }
        }
        for wo in &ins.wires_out {
            let dest = match wo.dir {
                Direction::Horizontal => (ins.site + 1, 1),
                Direction::Vertical => (ins.site + period, 3),
            };
            carrier.insert(wo.wire, dest);
        }
    }

    let lattice = build_qrl(t_min, t_max, period, r)?;
    let mut state = inject_inputs(&lattice, inputs, &sites)?;
    observe(&state);
    let mut rng = match outcomes {
        Outcomes::Sampled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Outcomes::Averaged => None,
    };
    for ins in &schedule.instructions {
        let targets = [ins.site + 1, ins.site + period];
        match rng.as_mut() {
            Some(rng) => {
                let records = measure_macronode(&mut state, ins.site, &ins.angles, rng.random())?;
                apply_feedforward(&mut state, &records, targets, &ins.angles)?;
            }
            None => teleport_averaged(&mut state, ins.site, &ins.angles, targets)?,
        }
        observe(&state);
    }

    let m = state.modes();
    let mut e = RMatrix::zeros(2 * n, 2 * m);
    for (i, &w) in schedule.output_wires.iter().enumerate() {
        if let Some(&(t, dist)) = carrier.get(&w) {
            let (hx, hp) = state.distributed_rows(t, dist)?;
            e.row_mut(i).copy_from(&hx.transpose());
            e.row_mut(n + i).copy_from(&hp.transpose());
        } else {
            let input = input_of(w).ok_or_else(|| Error::structural(None, format!("output wire {w} has no source")))?;
            let slot = state
                .slot_of(Slot::Detached(input))
                .ok_or_else(|| Error::State(format!("detached input {input} is missing")))?;
            e[(i, slot)] = 1.0;
            e[(n + i, m + slot)] = 1.0;
        }
    }
    GaussianState::new(&e * &state.state.mean, &e * &state.state.cov * e.transpose())
}

fn select_modes(s: &GaussianState, order: &[usize]) -> GaussianState {
    let n = s.modes();
    let rows: Vec<usize> = order.iter().copied().chain(order.iter().map(|&i| n + i)).collect();
    GaussianState {
        mean: s.mean.select_rows(&rows),
        cov: s.cov.select_rows(&rows).select_columns(&rows),
    }
}

/// Linear map of a schedule as seen by the simulator: the response of the output mean
/// to unit input displacements, at squeezing `r` with a fixed outcome seed.
pub fn simulated_map(schedule: &Schedule, r: f64, seed: u64) -> Result<RMatrix> {
    let n = schedule.modes;
    let base = run_schedule(schedule, &GaussianState::vacuum(n), r, seed)?;
    let mut map = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..2 * n {
        let mut input = GaussianState::vacuum(n);
        input.mean[k] = 1.0;
        let out = run_schedule(schedule, &input, r, seed)?;
        map.set_column(k, &(out.mean - &base.mean));
    }
    Ok(map)
}

/// Frobenius distance between an output covariance and the ideal `S cov_in S^T`.
pub fn covariance_distance(output: &GaussianState, input: &GaussianState, target: &SymplecticMap) -> f64 {
    let s = target.matrix();
    (&output.cov - s * &input.cov * s.transpose()).norm()
}

/// Result of one finite-squeezing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub r_db: f64,
    pub seed: u64,
    /// Mean of the outcome-averaged output.
    pub output_mean: Vec<f64>,
    /// Covariance of the outcome-averaged output.
    pub output_cov: Vec<Vec<f64>>,
    /// Frobenius distance of `output_cov` from the target-transformed input covariance.
    pub target_distance_frobenius: f64,
    /// Nullifier variances of the bare lattice at the first scheduled macronode.
    pub nullifier_variances: [f64; 4],
    /// Output mean of the single shot drawn with `seed`, after feedforward.
    pub shot_mean: Vec<f64>,
}

/// Runs `schedule` at `r_db` and compares the output covariance with `target`.
pub fn run_report(
    schedule: &Schedule,
    inputs: &GaussianState,
    target: &SymplecticMap,
    r_db: f64,
    seed: u64,
) -> Result<RunReport> {
    let r = db_to_r(r_db);
    let averaged = run_schedule_averaged(schedule, inputs, r)?;
    let shot = run_schedule(schedule, inputs, r, seed)?;
    let period = schedule.lattice_period;
    let t0 = schedule.instructions.iter().map(|i| i.site).min().unwrap_or(0);
    let lattice = build_qrl(t0, t0 + period, period, r)?;
    let n = averaged.modes();
    Ok(RunReport {
        r_db,
        seed,
        output_mean: averaged.mean.iter().copied().collect(),
        output_cov: (0..2 * n).map(|i| averaged.cov.row(i).iter().copied().collect()).collect(),
        target_distance_frobenius: covariance_distance(&averaged, inputs, target),
        nullifier_variances: nullifier_variances(&lattice, t0)?,
        shot_mean: shot.mean.iter().copied().collect(),
    })
}
