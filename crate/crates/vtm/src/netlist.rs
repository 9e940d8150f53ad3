//! Line-oriented netlists with 0-based nodes:
//!
//! ```text
//! # comment
//! R a b g        branch of conductance g
//! G a g          conductance g to ground
//! I a val        current val injected into a
//! VCCS out ctrl gm
//! ```
//!
//! The node count is one past the largest node mentioned.

use std::fmt::Write as _;

use vtm_core::netgen::Netlist;

use crate::error::{FormatError, Result};

fn node(line: usize, w: Option<&str>) -> Result<usize> {
    let w = w.ok_or_else(|| FormatError::parse(line, "missing node"))?;
    w.parse().map_err(|_| FormatError::parse(line, format!("bad node '{w}'")))
}

fn value(line: usize, w: Option<&str>) -> Result<f64> {
    let w = w.ok_or_else(|| FormatError::parse(line, "missing value"))?;
    match w.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(FormatError::parse(line, format!("bad value '{w}'"))),
    }
}

pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut net = Netlist::default();
    let mut max_node = None::<usize>;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let mut w = l.split_whitespace();
        let kind = w.next().unwrap_or("").to_ascii_uppercase();
        let mut seen = |v: usize| max_node = Some(max_node.map_or(v, |m| m.max(v)));
        match kind.as_str() {
            "R" => {
                let (a, b, g) = (node(ln, w.next())?, node(ln, w.next())?, value(ln, w.next())?);
                seen(a);
                seen(b);
                net.branches.push((a, b, g));
            }
            "G" => {
                let (a, g) = (node(ln, w.next())?, value(ln, w.next())?);
                seen(a);
                net.grounds.push((a, g));
            }
            "I" => {
                let (a, v) = (node(ln, w.next())?, value(ln, w.next())?);
                seen(a);
                net.injections.push((a, v));
            }
            "VCCS" => {
                let (o, c, gm) = (node(ln, w.next())?, node(ln, w.next())?, value(ln, w.next())?);
                seen(o);
                seen(c);
                net.vccs.push((o, c, gm));
            }
            _ => return Err(FormatError::parse(ln, format!("unknown element '{kind}'"))),
        }
        if w.next().is_some() {
            return Err(FormatError::parse(ln, "extra fields"));
        }
    }
    net.node_count = max_node.map_or(0, |m| m + 1);
    net.validate()?;
    Ok(net)
}

pub fn write_netlist(net: &Netlist) -> String {
    let mut s = String::new();
    for &(a, b, g) in &net.branches {
        let _ = writeln!(s, "R {a} {b} {g:e}");
    }
    for &(a, g) in &net.grounds {
        let _ = writeln!(s, "G {a} {g:e}");
    }
    for &(a, v) in &net.injections {
        let _ = writeln!(s, "I {a} {v:e}");
    }
    for &(o, c, gm) in &net.vccs {
        let _ = writeln!(s, "VCCS {o} {c} {gm:e}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use vtm_core::netgen::assemble;

    #[test]
    fn divider() {
        let net = parse_netlist("# divider\nR 0 1 2.0\nG 1 1\ng 0 0.5  # lower case\nI 0 1\n").unwrap();
        assert_eq!(net.node_count, 2);
        let sys = assemble(&net).unwrap();
        assert_eq!(sys.a.to_dense().as_slice(), &[2.5, -2.0, -2.0, 3.0]);
        assert_eq!(sys.b, vec![1.0, 0.0]);
    }

    #[test]
    fn vccs_breaks_symmetry() {
        let sys = assemble(&parse_netlist("G 0 1\nG 1 1\nVCCS 0 1 10\n").unwrap()).unwrap();
        assert!(!sys.symmetric);
        assert_eq!(sys.a.get(0, 1), 10.0);
    }

    #[test]
    fn bad_lines() {
        assert!(matches!(parse_netlist("R 0 1\n"), Err(FormatError::Parse { line: 1, .. })));
        assert!(matches!(parse_netlist("G 0 1\nL 0 1 1\n"), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(parse_netlist("R 0 0 1\n"), Err(FormatError::Core(_))));
        assert!(matches!(parse_netlist("R 0 1 -1\n"), Err(FormatError::Core(_))));
    }

    #[test]
    fn round_trip() {
        let net = parse_netlist("R 0 1 0.1\nR 1 2 3\nG 2 0.25\nI 1 -1\nVCCS 2 0 1e-3\n").unwrap();
        assert_eq!(parse_netlist(&write_netlist(&net)).unwrap(), net);
    }
}
