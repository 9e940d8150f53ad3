//! Fill-reducing ordering by level-structure nested dissection.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;

const LEAF_SIZE: usize = 48;

/// Returns `perm` with `perm[k]` = original node eliminated at step `k`.
///
/// Each connected piece is split at a small BFS level near its middle; the
/// two halves are ordered recursively and the separator goes last.
pub fn nested_dissection(g: &Graph) -> Vec<usize> {
    let n = g.len();
    let mut out = Vec::with_capacity(n);
    let mut member = vec![false; n];
    let mut scratch = vec![usize::MAX; n];
    let all: Vec<usize> = (0..n).collect();
    dissect(g, all, &mut member, &mut scratch, &mut out);
    debug_assert_eq!(out.len(), n);
    out
}

fn dissect(g: &Graph, nodes: Vec<usize>, member: &mut [bool], scratch: &mut [usize], out: &mut Vec<usize>) {
    if nodes.len() <= LEAF_SIZE {
        out.extend_from_slice(&nodes);
        return;
    }
    for &v in &nodes {
        member[v] = true;
    }
    let comps = g.components_within(&nodes, member);
    if comps.len() > 1 {
        for &v in &nodes {
            member[v] = false;
        }
        for c in comps {
            dissect(g, c, member, scratch, out);
        }
        return;
    }
    let root = g.pseudo_peripheral(nodes[0], member, scratch);
    let levels = g.level_structure(root, member, scratch);
    for &v in &nodes {
        member[v] = false;
    }
    if levels.len() < 3 {
        out.extend_from_slice(&nodes);
        return;
    }
    let total = nodes.len();
    let mut before = 0usize;
    let mut best: Option<(usize, usize)> = None;
    let mut median = 1;
    for (m, lvl) in levels.iter().enumerate() {
        if m > 0 && m + 1 < levels.len() {
            let after = total - before - lvl.len();
            if before * 2 < total {
                median = m;
            }
            if before.min(after) * 4 >= total && best.map_or(true, |(_, s)| lvl.len() < s) {
                best = Some((m, lvl.len()));
            }
        }
        before += lvl.len();
    }
    let split = best.map_or(median, |(m, _)| m);

    let mut side_a = Vec::new();
    let mut side_b = Vec::new();
    let mut sep = Vec::new();
    for (m, lvl) in levels.iter().enumerate() {
        match m.cmp(&split) {
            core::cmp::Ordering::Less => side_a.extend_from_slice(lvl),
            core::cmp::Ordering::Greater => side_b.extend_from_slice(lvl),
            core::cmp::Ordering::Equal => sep.extend_from_slice(lvl),
        }
    }
    // separator nodes not touching side B are not needed to separate
    for &v in &side_b {
        member[v] = true;
    }
    let mut kept = Vec::with_capacity(sep.len());
    for &v in &sep {
        if g.neighbors(v).iter().any(|&u| member[u]) {
            kept.push(v);
        } else {
            side_a.push(v);
        }
    }
    for &v in &side_b {
        member[v] = false;
    }
    dissect(g, side_a, member, scratch, out);
    dissect(g, side_b, member, scratch, out);
    out.extend_from_slice(&kept);
}
