//! ASCII and SVG drawings of a schedule on the lattice grid. Macronode `t` sits at
//! column `t mod period` and row `t div period`.

use std::fmt::Write;

use qrl_core::compile::{Direction, MacronodeInstruction, Role, Schedule};

const CELL: i64 = 60;

fn glyph(role: Role) -> char {
    match role {
        Role::Beamsplitter => 'B',
        Role::Phase => 'P',
        Role::Squeeze => 'S',
        Role::ShearPair => 'K',
        Role::Shear => 'k',
        Role::Identity => 'I',
        Role::Input => 'i',
        Role::Output => 'o',
    }
}

fn colour(role: Role) -> &'static str {
    match role {
        Role::Beamsplitter => "#4a7ebb",
        Role::Phase => "#e0a030",
        Role::Squeeze => "#c04848",
        Role::ShearPair => "#5aa05a",
        Role::Shear => "#8fcf8f",
        Role::Identity => "#bbbbbb",
        Role::Input | Role::Output => "#666666",
    }
}

fn position(site: i64, period: i64) -> (i64, i64) {
    (site.div_euclid(period), site.rem_euclid(period))
}

/// Row range covered by the schedule, or `None` when it is empty.
fn rows(s: &Schedule) -> Option<(i64, i64)> {
    let rows = s.instructions.iter().map(|i| position(i.site, s.lattice_period).0);
    let lo = rows.clone().min()?;
    Some((lo, rows.max()?))
}

fn out_marks(ins: &MacronodeInstruction) -> String {
    let mut m = String::new();
    if ins.wires_out.iter().any(|w| w.dir == Direction::Horizontal) {
        m.push('>');
    }
    if ins.wires_out.iter().any(|w| w.dir == Direction::Vertical) {
        m.push('v');
    }
    m
}

/// One text line per lattice row; every cell is a role glyph plus `>`/`v` for its outputs.
pub fn ascii(s: &Schedule) -> String {
    let period = s.lattice_period;
    let mut out = String::new();
    let _ = writeln!(out, "lattice period {period}, {} macronodes", s.instructions.len());
    let Some((lo, hi)) = rows(s) else {
        return out;
    };
    for row in lo..=hi {
        let mut line = format!("{row:>4} |");
        for col in 0..period {
            let site = row * period + col;
            match s.instructions.iter().find(|i| i.site == site) {
                Some(ins) => {
                    let _ = write!(line, " {}{:<2}", glyph(ins.role), out_marks(ins));
                }
                None => line.push_str(" .  "),
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str("legend: B beamsplitter, P phase, S squeeze, K shear-pair, k shear, I identity; > to t+1, v to t+period\n");
    out
}

/// A standalone SVG document with one glyph per macronode and an arrow per output wire.
pub fn svg(s: &Schedule) -> String {
    let period = s.lattice_period.max(1);
    let (lo, hi) = rows(s).unwrap_or((0, -1));
    let width = period * CELL;
    let height = (hi - lo + 1).max(0) * CELL;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    out.push_str(
        r##"<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="6" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#333"/></marker></defs>"##,
    );
    out.push('\n');
    let centre = |site: i64| {
        let (r, c) = position(site, period);
        (c * CELL + CELL / 2, (r - lo) * CELL + CELL / 2)
    };
    for ins in &s.instructions {
        let (x, y) = centre(ins.site);
        for w in &ins.wires_out {
            let (dx, dy) = match w.dir {
                Direction::Horizontal => (CELL / 2 + 8, 0),
                Direction::Vertical => (0, CELL / 2 + 8),
            };
            let _ = writeln!(
                out,
                r##"<line x1="{x}" y1="{y}" x2="{}" y2="{}" stroke="#333" stroke-width="2" marker-end="url(#arrow)"/>"##,
                x + dx,
                y + dy
            );
        }
    }
    for ins in &s.instructions {
        let (x, y) = centre(ins.site);
        let fill = colour(ins.role);
        let shape = match ins.role {
            Role::Beamsplitter | Role::ShearPair => format!(
                r#"<rect x="{}" y="{}" width="24" height="24" fill="{fill}"/>"#,
                x - 12,
                y - 12
            ),
            _ => format!(r#"<circle cx="{x}" cy="{y}" r="12" fill="{fill}"/>"#),
        };
        let _ = writeln!(
            out,
            r#"<g class="{}" data-site="{}">{shape}<text x="{x}" y="{}" font-size="12" text-anchor="middle" fill="white">{}</text></g>"#,
            ins.role.as_str(),
            ins.site,
            y + 4,
            glyph(ins.role)
        );
    }
    out.push_str("</svg>\n");
    out
}
