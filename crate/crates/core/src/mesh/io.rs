//! Plain-text mesh format.
//!
//! ```text
//! MESH2D k=<order>
//! NODES <n>
//! <x> <y>
//! ELEMENTS <m>
//! <node ids in reference order> <-|+>
//! INTERFACE_EDGES <e>
//! <k+1 node ids, minus phase on the left>
//! BOUNDARY <b>
//! <node id>
//! ```
//!
//! Floats are written in shortest round-trip decimal form, so export after
//! import reproduces the file byte for byte.

use std::fmt::Write as _;

use super::{CurvedMesh, Phase};
use crate::error::{Error, Result};
use crate::geometry::Point;

pub fn export_mesh(mesh: &CurvedMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "MESH2D k={}", mesh.order());
    let _ = writeln!(out, "NODES {}", mesh.n_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(out, "{:?} {:?}", p.x, p.y);
    }
    let _ = writeln!(out, "ELEMENTS {}", mesh.n_elements());
    for e in 0..mesh.n_elements() {
        for id in mesh.element(e) {
            let _ = write!(out, "{id} ");
        }
        let _ = writeln!(out, "{}", mesh.phase(e).symbol());
    }
    let _ = writeln!(out, "INTERFACE_EDGES {}", mesh.interface_edges().len());
    for edge in mesh.interface_edges() {
        let ids: Vec<String> = edge.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{}", ids.join(" "));
    }
    let _ = writeln!(out, "BOUNDARY {}", mesh.boundary_nodes().len());
    for b in mesh.boundary_nodes() {
        let _ = writeln!(out, "{b}");
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        loop {
            match self.inner.next() {
                Some((i, l)) if l.trim().is_empty() => self.last = i + 1,
                Some((i, l)) => {
                    self.last = i + 1;
                    return Ok((i + 1, l.trim()));
                }
                None => return Err(Error::MeshFormat { line: self.last + 1, msg: "unexpected end of file".into() }),
            }
        }
    }

    fn header(&mut self, keyword: &str) -> Result<usize> {
        let (line, text) = self.next_line()?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(Error::MeshFormat { line, msg: format!("expected {keyword}") });
        }
        parse_num(parts.next().unwrap_or(""), line)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::MeshFormat { line, msg: format!("cannot parse '{s}'") })
}

pub fn import_mesh(text: &str) -> Result<CurvedMesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (line, head) = lines.next_line()?;
    let order: usize = head
        .strip_prefix("MESH2D k=")
        .ok_or_else(|| Error::MeshFormat { line, msg: "expected 'MESH2D k=<int>'".into() })
        .and_then(|k| parse_num(k.trim(), line))?;
    if order < 2 {
        return Err(Error::MeshFormat { line, msg: format!("order {order} must be at least 2") });
    }
    let n_loc = (order + 1) * (order + 2) / 2;

    let n_nodes = lines.header("NODES")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (line, text) = lines.next_line()?;
        let xy: Vec<f64> = text.split_whitespace().map(|s| parse_num(s, line)).collect::<Result<_>>()?;
        if xy.len() != 2 {
            return Err(Error::MeshFormat { line, msg: "node needs two coordinates".into() });
        }
        nodes.push(Point::new(xy[0], xy[1]));
    }

    let n_elements = lines.header("ELEMENTS")?;
    let mut elements = Vec::with_capacity(n_elements * n_loc);
    let mut phases = Vec::with_capacity(n_elements);
    for _ in 0..n_elements {
        let (line, text) = lines.next_line()?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != n_loc + 1 {
            return Err(Error::MeshFormat { line, msg: format!("element needs {n_loc} node ids and a phase tag") });
        }
        for t in &tokens[..n_loc] {
            elements.push(parse_num::<usize>(t, line)?);
        }
        phases.push(match tokens[n_loc] {
            "-" => Phase::Minus,
            "+" => Phase::Plus,
            other => return Err(Error::MeshFormat { line, msg: format!("unknown phase tag '{other}'") }),
        });
    }

    let n_iface = lines.header("INTERFACE_EDGES")?;
    let mut interface = Vec::with_capacity(n_iface);
    for _ in 0..n_iface {
        let (line, text) = lines.next_line()?;
        let ids: Vec<usize> = text.split_whitespace().map(|s| parse_num(s, line)).collect::<Result<_>>()?;
        if ids.len() != order + 1 {
            return Err(Error::MeshFormat { line, msg: format!("interface edge needs {} node ids", order + 1) });
        }
        interface.push(ids);
    }

    let n_boundary = lines.header("BOUNDARY")?;
    let mut boundary = Vec::with_capacity(n_boundary);
    for _ in 0..n_boundary {
        let (line, text) = lines.next_line()?;
        boundary.push(parse_num(text, line)?);
    }
    CurvedMesh::assemble(order, nodes, elements, phases, interface, boundary)
}
