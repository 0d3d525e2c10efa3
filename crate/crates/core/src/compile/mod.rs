//! Lowering passes from target matrices to lattice schedules.

pub mod bloch_messiah;
pub mod clements;
pub mod components;
pub mod placement;
pub mod reck;
pub mod schedule;

pub use bloch_messiah::bloch_messiah;
pub use clements::{clements_decompose, rectangular_plan, MeshElement, RectangularMesh, RectangularPlan};
pub use components::{Component, ComponentList};
pub use placement::{
    compile_bs, compile_bs_rectangular, compile_bs_triangular, compile_gaussian, compile_shear, Layout, ShearMatrix,
};
pub use reck::{c_to_s, reck_decompose, s_to_t, triangular_components};
pub use schedule::{verify_schedule, Direction, MacronodeInstruction, Port, Role, Schedule, WireIn, WireOut};
