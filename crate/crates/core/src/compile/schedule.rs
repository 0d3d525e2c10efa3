//! Placed, wired macronode schedules and their symbolic verification.

use std::collections::{HashMap, HashSet};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{embed_single, embed_two_mode, RMatrix, SymplecticMap};
use crate::teleport::{macronode_map, MacronodeAngles};

/// Tolerance for "no coupling to the empty port" on single-input macronodes,
/// relative to the size of the macronode map.
const EMPTY_PORT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Beamsplitter,
    Phase,
    Squeeze,
    ShearPair,
    Shear,
    Identity,
    Input,
    Output,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Beamsplitter => "beamsplitter",
            Role::Phase => "phase",
            Role::Squeeze => "squeeze",
            Role::ShearPair => "shear-pair",
            Role::Shear => "shear",
            Role::Identity => "identity",
            Role::Input => "input",
            Role::Output => "output",
        }
    }
}

/// Input port of a macronode: micronode `b` (from `t - 1`) or `d` (from `t - period`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    B,
    D,
}

/// Output direction: horizontal goes to `t + 1`, vertical to `t + period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

impl Direction {
    /// The output slot of the macronode map feeding this direction.
    fn slot(self) -> usize {
        match self {
            Direction::Horizontal => 0,
            Direction::Vertical => 1,
        }
    }
}

impl Port {
    fn slot(self) -> usize {
        match self {
            Port::B => 0,
            Port::D => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireIn {
    pub wire: usize,
    pub port: Port,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireOut {
    pub wire: usize,
    pub dir: Direction,
}

mod angle_array {
    use super::MacronodeAngles;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(a: &MacronodeAngles, s: S) -> Result<S::Ok, S::Error> {
        a.to_array().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MacronodeAngles, D::Error> {
        Ok(MacronodeAngles::from_array(<[f64; 4]>::deserialize(d)?))
    }
}

/// One measured macronode. `angles` are the homodyne angles actually measured,
/// serialized as `[theta_a, theta_b, theta_c, theta_d]`; `swap` records that the
/// B arm pair was exchanged so that the arm outputs trade places.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacronodeInstruction {
    pub site: i64,
    pub role: Role,
    #[serde(with = "angle_array")]
    pub angles: MacronodeAngles,
    pub swap: bool,
    pub wires_in: Vec<WireIn>,
    pub wires_out: Vec<WireOut>,
}

/// Wired macronode program. Instructions are listed in execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub modes: usize,
    pub lattice_period: i64,
    pub instructions: Vec<MacronodeInstruction>,
    pub input_wires: Vec<usize>,
    pub output_wires: Vec<usize>,
}

/// Where a wire leaves its producer.
#[derive(Debug, Clone, Copy)]
enum Producer {
    Input,
    Node { index: usize, dir: Direction },
}

impl Schedule {
    /// A schedule with no macronodes: every input wire is also the output wire.
    pub fn empty(modes: usize) -> Self {
        Self {
            modes,
            lattice_period: 2,
            instructions: Vec::new(),
            input_wires: (0..modes).collect(),
            output_wires: (0..modes).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Schedule = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn count_role(&self, role: Role) -> usize {
        self.instructions.iter().filter(|i| i.role == role).count()
    }

    /// Checks wiring, site uniqueness, lattice connectivity and execution order.
    pub fn validate(&self) -> Result<()> {
        let st = |site: i64, msg: String| Error::structural(Some(site), msg);
        if self.lattice_period < 1 {
            return Err(Error::structural(None, "lattice period must be positive"));
        }
        if self.input_wires.len() != self.modes || self.output_wires.len() != self.modes {
            return Err(Error::structural(
                None,
                format!(
                    "{} modes but {} input and {} output wires",
                    self.modes,
                    self.input_wires.len(),
                    self.output_wires.len()
                ),
            ));
        }
        let mut producer: HashMap<usize, Producer> = HashMap::new();
        for &w in &self.input_wires {
            if producer.insert(w, Producer::Input).is_some() {
                return Err(Error::structural(None, format!("input wire {w} listed twice")));
            }
        }
        let mut sites = HashSet::new();
        let mut consumed = HashSet::new();
        for (index, ins) in self.instructions.iter().enumerate() {
            if !sites.insert(ins.site) {
                return Err(st(ins.site, "two instructions share the site".into()));
            }
            let n_in = ins.wires_in.len();
            if n_in == 0 || n_in > 2 || ins.wires_out.len() != n_in {
                return Err(st(
                    ins.site,
                    format!("{n_in} inputs and {} outputs", ins.wires_out.len()),
                ));
            }
            if n_in == 2 && (ins.wires_in[0].port == ins.wires_in[1].port || ins.wires_out[0].dir == ins.wires_out[1].dir) {
                return Err(st(ins.site, "ports or directions used twice".into()));
            }
            for wi in &ins.wires_in {
                let Some(p) = producer.get(&wi.wire) else {
                    return Err(st(ins.site, format!("wire {} consumed before it is produced", wi.wire)));
                };
                if !consumed.insert(wi.wire) {
                    return Err(st(ins.site, format!("wire {} consumed twice", wi.wire)));
                }
                if let Producer::Node { index: from, dir } = *p {
                    let src = self.instructions[from].site;
                    let (expected_site, expected_port) = match dir {
                        Direction::Horizontal => (src + 1, Port::B),
                        Direction::Vertical => (src + self.lattice_period, Port::D),
                    };
                    if ins.site != expected_site || wi.port != expected_port {
                        return Err(st(
                            ins.site,
                            format!("wire {} from site {src} cannot enter port {:?} here", wi.wire, wi.port),
                        ));
                    }
                }
            }
            for wo in &ins.wires_out {
                if producer.insert(wo.wire, Producer::Node { index, dir: wo.dir }).is_some() {
                    return Err(st(ins.site, format!("wire {} produced twice", wo.wire)));
                }
            }
            ins.angles.validate()?;
        }
        let outputs: HashSet<usize> = self.output_wires.iter().copied().collect();
        if outputs.len() != self.output_wires.len() {
            return Err(Error::structural(None, "output wire listed twice"));
        }
        for &w in &self.output_wires {
            if !producer.contains_key(&w) {
                return Err(Error::structural(None, format!("output wire {w} is never produced")));
            }
            if consumed.contains(&w) {
                return Err(Error::structural(None, format!("output wire {w} is consumed")));
            }
        }
        for (&w, p) in &producer {
            if !consumed.contains(&w) && !outputs.contains(&w) {
                let site = match p {
                    Producer::Node { index, .. } => Some(self.instructions[*index].site),
                    Producer::Input => None,
                };
                return Err(Error::structural(site, format!("wire {w} is dangling")));
            }
        }
        Ok(())
    }

    /// Composes the macronode maps along the wiring into an `N`-mode symplectic map.
    pub fn verify(&self) -> Result<SymplecticMap> {
        self.validate()?;
        let n = self.modes;
        let mut register: HashMap<usize, usize> = self.input_wires.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut total = RMatrix::identity(2 * n, 2 * n);
        for ins in &self.instructions {
            let g = *macronode_map(&ins.angles)?.matrix();
            let mut slot_mode = [None, None];
            for wi in &ins.wires_in {
                slot_mode[wi.port.slot()] = register.remove(&wi.wire);
            }
            match slot_mode {
                [Some(j), Some(k)] => {
                    total = embed_two_mode(&g, j, k, n) * total;
                    for wo in &ins.wires_out {
                        register.insert(wo.wire, if wo.dir.slot() == 0 { j } else { k });
                    }
                }
                [b, d] => {
                    let (mode, input_slot) = match (b, d) {
                        (Some(m), None) => (m, 0),
                        (None, Some(m)) => (m, 1),
                        _ => unreachable!("validated wiring"),
                    };
                    let out_slot = ins.wires_out[0].dir.slot();
                    let other_in = 1 - input_slot;
                    let scale = g.abs().max().max(1.0);
                    let leak = g[(out_slot, other_in)]
                        .abs()
                        .max(g[(out_slot, other_in + 2)].abs())
                        .max(g[(out_slot + 2, other_in)].abs())
                        .max(g[(out_slot + 2, other_in + 2)].abs());
                    if leak > EMPTY_PORT_TOL * scale {
                        return Err(Error::structural(
                            Some(ins.site),
                            format!("single-input macronode couples its output to the empty port ({leak:e})"),
                        ));
                    }
                    let m2 = Matrix2::new(
                        g[(out_slot, input_slot)],
                        g[(out_slot, input_slot + 2)],
                        g[(out_slot + 2, input_slot)],
                        g[(out_slot + 2, input_slot + 2)],
                    );
                    total = embed_single(&m2, mode, n) * total;
                    register.insert(ins.wires_out[0].wire, mode);
                }
            }
        }
        let mut perm = RMatrix::zeros(2 * n, 2 * n);
        for (i, w) in self.output_wires.iter().enumerate() {
            let m = register[w];
            perm[(i, m)] = 1.0;
            perm[(n + i, n + m)] = 1.0;
        }
        Ok(SymplecticMap::from_matrix_unchecked(perm * total))
    }

    /// Fewest and most beamsplitter macronodes met on any input-to-output path.
    pub fn beamsplitter_path_spread(&self) -> Result<(usize, usize)> {
        self.validate()?;
        let mut span: HashMap<usize, (usize, usize)> = self.input_wires.iter().map(|&w| (w, (0, 0))).collect();
        for ins in &self.instructions {
            let add = usize::from(ins.role == Role::Beamsplitter);
            let (mut lo, mut hi) = (usize::MAX, 0);
            for wi in &ins.wires_in {
                let (a, b) = span[&wi.wire];
                lo = lo.min(a);
                hi = hi.max(b);
            }
            for wo in &ins.wires_out {
                span.insert(wo.wire, (lo + add, hi + add));
            }
        }
        let lo = self.output_wires.iter().map(|w| span[w].0).min().unwrap_or(0);
        let hi = self.output_wires.iter().map(|w| span[w].1).max().unwrap_or(0);
        Ok((lo, hi))
    }

    /// Bounding box of the occupied sites as `(rows, columns)` in lattice coordinates.
    pub fn footprint(&self) -> (i64, i64) {
        if self.instructions.is_empty() {
            return (0, 0);
        }
        let l = self.lattice_period;
        let rows: Vec<i64> = self.instructions.iter().map(|i| i.site.div_euclid(l)).collect();
        let cols: Vec<i64> = self.instructions.iter().map(|i| i.site.rem_euclid(l)).collect();
        let span = |v: &[i64]| v.iter().max().unwrap() - v.iter().min().unwrap() + 1;
        (span(&rows), span(&cols))
    }
}

/// Symbolic composition of a schedule.
pub fn verify_schedule(s: &Schedule) -> Result<SymplecticMap> {
    s.verify()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teleport::{angles_for_swap, MeasurementPair};

    fn one_node(swap: bool) -> Schedule {
        let angles = if swap {
            angles_for_swap(MeasurementPair::identity(), MeasurementPair::identity()).unwrap()
        } else {
            MacronodeAngles::identity()
        };
        Schedule {
            modes: 2,
            lattice_period: 4,
            instructions: vec![MacronodeInstruction {
                site: 0,
                role: Role::Identity,
                angles,
                swap,
                wires_in: vec![WireIn { wire: 0, port: Port::B }, WireIn { wire: 1, port: Port::D }],
                wires_out: vec![
                    WireOut { wire: 2, dir: Direction::Horizontal },
                    WireOut { wire: 3, dir: Direction::Vertical },
                ],
            }],
            input_wires: vec![0, 1],
            output_wires: vec![2, 3],
        }
    }

    #[test]
    fn empty_schedule_is_identity() {
        let m = Schedule::empty(3).verify().unwrap();
        assert_eq!(m, SymplecticMap::identity(3));
    }

    #[test]
    fn swap_node_permutes() {
        let id = one_node(false).verify().unwrap();
        assert!(crate::gaussian::max_deviation(id.matrix(), SymplecticMap::identity(2).matrix()) < 1e-15);
        let m = one_node(true).verify().unwrap();
        let mut p = RMatrix::zeros(4, 4);
        p[(0, 1)] = 1.0;
        p[(1, 0)] = 1.0;
        p[(2, 3)] = 1.0;
        p[(3, 2)] = 1.0;
        assert!(crate::gaussian::max_deviation(m.matrix(), &p) < 1e-15);
    }

    #[test]
    fn structural_errors() {
        let mut s = one_node(false);
        s.output_wires = vec![2, 2];
        assert!(s.validate().unwrap_err().is_structural());

        let mut s = one_node(false);
        s.instructions[0].wires_in[1].wire = 0;
        assert!(s.validate().unwrap_err().is_structural());

        let mut s = one_node(false);
        s.output_wires = vec![2, 1];
        assert!(matches!(s.validate(), Err(Error::Structural { .. })));

        // Second node at a site that is not a lattice neighbour of the first.
        let mut s = one_node(false);
        s.instructions.push(MacronodeInstruction {
            site: 2,
            role: Role::Phase,
            angles: MacronodeAngles::identity(),
            swap: false,
            wires_in: vec![WireIn { wire: 2, port: Port::B }],
            wires_out: vec![WireOut { wire: 4, dir: Direction::Horizontal }],
        });
        s.output_wires = vec![4, 3];
        let err = s.validate().unwrap_err();
        assert!(matches!(err, Error::Structural { site: Some(2), .. }), "{err}");
        s.instructions[1].site = 1;
        assert!(s.verify().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = one_node(true);
        let text = s.to_json().unwrap();
        assert!(text.contains("\"port\": \"b\""));
        assert!(text.contains("\"dir\": \"vertical\""));
        let back = Schedule::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json().unwrap(), text);
    }
}
