//! Text serialization of a wire-torn partition.
//!
//! ```text
//! part <node> <id>        home part of every node
//! iface <node>            interfacial nodes
//! weight <node> <part> <w>
//! wire <id> <pA> <localA> <pB> <localB> <tau>
//! ```
//!
//! A file is loaded against its system by tearing again with the recorded
//! labels and weights; wire lines are checked against the result and give
//! the delays. Admittance blocks are stored per bundle as Matrix Market.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vtm_core::tearing::{wire_tear, Partition, PartitionLabels, SplitWeights};
use vtm_core::vtm::Preconditioner;
use vtm_core::LinearSystem;

use crate::error::{read_file, write_file, FormatError, Result};
use crate::mm::{self, Symmetry};

/// Parsed contents of a partition file.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFile {
    pub labels: PartitionLabels,
    pub weights: SplitWeights,
    /// `(id, (pA, localA), (pB, localB), tau)`.
    pub wires: Vec<(usize, (usize, usize), (usize, usize), usize)>,
}

pub fn write_partition(p: &Partition) -> String {
    let mut s = String::new();
    let l = &p.labels;
    let _ = writeln!(s, "# {} nodes, {} parts, {} wires", l.len(), l.n_parts(), p.wires.len());
    for (v, part) in l.part_of().iter().enumerate() {
        let _ = writeln!(s, "part {v} {part}");
    }
    for v in l.interface() {
        let _ = writeln!(s, "iface {v}");
    }
    for ts in &p.twin_map {
        for (&(sub, _), w) in ts.copies.iter().zip(&ts.weights) {
            let _ = writeln!(s, "weight {} {sub} {w:e}", ts.node);
        }
    }
    for w in &p.wires {
        let _ = writeln!(s, "wire {} {} {} {} {} {}", w.id, w.end_a.0, w.end_a.1, w.end_b.0, w.end_b.1, w.tau);
    }
    s
}

pub fn parse_partition(text: &str) -> Result<PartitionFile> {
    let mut part_of: Vec<Option<usize>> = Vec::new();
    let mut iface = Vec::new();
    let mut weights = Vec::new();
    let mut wires = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let mut w = l.split_whitespace();
        let kind = w.next().unwrap_or("");
        let mut int = || -> Result<usize> {
            let t = w.next().ok_or_else(|| FormatError::parse(ln, "missing field"))?;
            t.parse().map_err(|_| FormatError::parse(ln, format!("bad integer '{t}'")))
        };
        match kind {
            "part" => {
                let (v, p) = (int()?, int()?);
                if part_of.len() <= v {
                    part_of.resize(v + 1, None);
                }
                if part_of[v].replace(p).is_some() {
                    return Err(FormatError::parse(ln, format!("node {v} listed twice")));
                }
            }
            "iface" => iface.push(int()?),
            "weight" => {
                let (v, p) = (int()?, int()?);
                let t = w.next().ok_or_else(|| FormatError::parse(ln, "missing weight"))?;
                let x: f64 = t.parse().map_err(|_| FormatError::parse(ln, format!("bad weight '{t}'")))?;
                weights.push((v, p, x));
            }
            "wire" => {
                let id = int()?;
                let a = (int()?, int()?);
                let b = (int()?, int()?);
                wires.push((id, a, b, int()?));
            }
            other => return Err(FormatError::parse(ln, format!("unknown record '{other}'"))),
        }
        if w.next().is_some() {
            return Err(FormatError::parse(ln, "extra fields"));
        }
    }
    let part_of: Vec<usize> = part_of
        .iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| FormatError::parse(0, format!("node {v} has no part"))))
        .collect::<Result<_>>()?;
    let n_parts = part_of.iter().max().map_or(0, |m| m + 1);
    let labels = PartitionLabels::new(n_parts, part_of, &iface)?;
    Ok(PartitionFile { labels, weights: SplitWeights::Custom(weights), wires })
}

/// Tears `sys` as recorded in `file`.
pub fn load_partition(sys: &LinearSystem, file: &PartitionFile) -> Result<Partition> {
    let mut p = wire_tear(sys, &file.labels, &file.weights)?;
    if p.wires.len() != file.wires.len() {
        return Err(FormatError::Core(vtm_core::Error::InconsistentPartition(format!(
            "file lists {} wires, tearing gives {}",
            file.wires.len(),
            p.wires.len()
        ))));
    }
    for (w, &(id, a, b, tau)) in p.wires.iter_mut().zip(&file.wires) {
        if (w.id, w.end_a, w.end_b) != (id, a, b) {
            return Err(FormatError::Core(vtm_core::Error::InconsistentPartition(format!(
                "wire {id} does not match the torn system"
            ))));
        }
        if tau == 0 {
            return Err(FormatError::Core(vtm_core::Error::InvalidArgument(format!("wire {id} has zero delay"))));
        }
        w.tau = tau;
    }
    Ok(p)
}

/// File names of the admittance blocks of bundle `b`.
pub fn admittance_paths(dir: &Path, b: usize, matched: bool) -> Vec<PathBuf> {
    if matched {
        vec![dir.join(format!("w{b}.mtx"))]
    } else {
        vec![dir.join(format!("w{b}_p.mtx")), dir.join(format!("w{b}_q.mtx"))]
    }
}

/// Writes every bundle's admittance block(s) into `dir`.
pub fn write_admittances(dir: &Path, prec: &Preconditioner) -> Result<Vec<PathBuf>> {
    let matched = prec.is_matched();
    let mut out = Vec::new();
    for (b, pair) in prec.blocks.iter().enumerate() {
        for (path, w) in admittance_paths(dir, b, matched).into_iter().zip(pair) {
            write_file(&path, &mm::write_matrix(w, Symmetry::General))?;
            out.push(path);
        }
    }
    Ok(out)
}

/// Reads admittance blocks written by [`write_admittances`].
pub fn read_admittances(dir: &Path, p: &Partition) -> Result<Preconditioner> {
    let mut blocks = Vec::with_capacity(p.bundles.len());
    for (b, bundle) in p.bundles.iter().enumerate() {
        let single = admittance_paths(dir, b, true).remove(0);
        let pair = if single.exists() {
            let w = mm::read_matrix(&read_file(&single)?)?;
            [w.clone(), w]
        } else {
            let paths = admittance_paths(dir, b, false);
            [mm::read_matrix(&read_file(&paths[0])?)?, mm::read_matrix(&read_file(&paths[1])?)?]
        };
        for w in &pair {
            if w.nrows() != bundle.len() || w.ncols() != bundle.len() {
                return Err(FormatError::Core(vtm_core::Error::DimensionMismatch {
                    expected: bundle.len(),
                    found: w.nrows(),
                }));
            }
        }
        blocks.push(pair);
    }
    Ok(Preconditioner { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vtm_core::netgen;
    use vtm_core::tearing::{select_interface, Strategy};
    use vtm_core::vtm::{build_preconditioner_with, Pairing, PreconditionerSpec};

    fn torn() -> Partition {
        let sys = netgen::grid2d(7, 6, 1.0, 0.1, 3).unwrap();
        let l = select_interface(&sys.a, 3, Strategy::Geometric { dims: sys.grid_dims.unwrap() }).unwrap();
        wire_tear(&sys, &l, &SplitWeights::Equal).unwrap()
    }

    #[test]
    fn round_trip() {
        let p = torn();
        let file = parse_partition(&write_partition(&p)).unwrap();
        assert_eq!(file.labels, p.labels);
        assert_eq!(load_partition(&p.system, &file).unwrap(), p);
    }

    #[test]
    fn delays_are_read() {
        let p = torn();
        let text: String = write_partition(&p)
            .lines()
            .map(|l| {
                if l.starts_with("wire ") {
                    format!("{} 2\n", l.strip_suffix(" 1").unwrap())
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        let q = load_partition(&p.system, &parse_partition(&text).unwrap()).unwrap();
        assert!(q.wires.iter().all(|w| w.tau == 2));
    }

    #[test]
    fn mismatched_wires_are_rejected() {
        let p = torn();
        let text: String =
            write_partition(&p).lines().filter(|l| !l.starts_with("wire 0 ")).map(|l| format!("{l}\n")).collect();
        assert!(load_partition(&p.system, &parse_partition(&text).unwrap()).is_err());
        assert!(matches!(parse_partition("part 0 0\npart 0 1\n"), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(parse_partition("frob 1\n"), Err(FormatError::Parse { line: 1, .. })));
    }

    #[test]
    fn admittances_round_trip() {
        let p = torn();
        let dir = tempfile::tempdir().unwrap();
        for pairing in [Pairing::Matched, Pairing::PerEnd] {
            let sub = dir.path().join(pairing.name());
            std::fs::create_dir(&sub).unwrap();
            let w = build_preconditioner_with(&PreconditionerSpec::OverlappedBlock, pairing, &p).unwrap();
            write_admittances(&sub, &w).unwrap();
            assert_eq!(read_admittances(&sub, &p).unwrap(), w);
        }
    }
}
