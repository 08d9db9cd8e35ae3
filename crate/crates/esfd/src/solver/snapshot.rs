//! CSV snapshots of solution fields.

use std::io::{self, Write};

use super::System;
use crate::euler::State;

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Writes one CSV row per node: coordinates, primitive variables, and the
/// entropy function (`x[,y],rho,v1[,v2],p,entropy`). Floats are printed
/// with shortest round-trip formatting.
pub fn write_snapshot<const D: usize, W: Write>(
    system: &System<D>,
    states: &[State<D>],
    mut out: W,
) -> io::Result<()> {
    let mut header = String::new();
    for name in AXIS_NAMES.iter().take(D) {
        header.push_str(name);
        header.push(',');
    }
    header.push_str("rho,");
    for k in 0..D {
        header.push_str(&format!("v{},", k + 1));
    }
    header.push_str("p,entropy");
    writeln!(out, "{header}")?;

    let gas = system.gas();
    let mut line = String::new();
    for (i, u) in states.iter().enumerate() {
        let xs = system.grid().coords(i);
        let (rho, vel, p) = gas.primitive(u);
        let eta = gas.entropy(u).eta;
        line.clear();
        for x in xs {
            line.push_str(&format!("{x},"));
        }
        line.push_str(&format!("{rho},"));
        for v in vel {
            line.push_str(&format!("{v},"));
        }
        line.push_str(&format!("{p},{eta}"));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Gas;
    use crate::sbp::{Axis, Grid};
    use crate::solver::{Boundary, LowFlux, Scheme, SchemeConfig, System};

    #[test]
    fn snapshot_rows_round_trip_the_primitives() {
        let grid = Grid::new([
            Axis { n: 4, lo: 0.0, hi: 1.0, periodic: true },
            Axis { n: 3, lo: -1.0, hi: 1.0, periodic: true },
        ])
        .unwrap();
        let config = SchemeConfig {
            scheme: Scheme::HighOrder,
            low_flux: LowFlux::Lxf,
            order: 2,
            positivity: None,
            boundary: Boundary::Periodic,
        };
        let system = System::new(grid, Gas::new(1.4), config).unwrap();
        let gas = Gas::new(1.4);
        let field = system.project(|x| gas.from_primitive(1.0 + 0.1 * x[0], [0.3, x[1]], 2.0));

        let mut buf = Vec::new();
        write_snapshot(&system, &field.states, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + system.num_nodes());
        assert_eq!(lines[0], "x,y,rho,v1,v2,p,entropy");

        for (i, line) in lines[1..].iter().enumerate() {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols.len(), 7);
            let xs = system.grid().coords(i);
            let (rho, vel, p) = gas.primitive(&field.states[i]);
            assert_eq!(cols[0], xs[0]);
            assert_eq!(cols[1], xs[1]);
            assert_eq!(cols[2], rho);
            assert_eq!(cols[3], vel[0]);
            assert_eq!(cols[4], vel[1]);
            assert_eq!(cols[5], p);
            assert_eq!(cols[6], gas.entropy(&field.states[i]).eta);
        }
    }
}
