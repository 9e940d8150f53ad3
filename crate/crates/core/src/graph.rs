//! Undirected adjacency of a sparse pattern.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::sparse::CsrMatrix;

/// Adjacency of the pattern of `A ∪ Aᵀ` without self loops.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    pub fn from_matrix(a: &CsrMatrix) -> Self {
        let n = a.nrows().max(a.ncols());
        let mut deg = vec![0usize; n + 1];
        for (i, j, _) in a.triplets() {
            if i != j {
                deg[i + 1] += 1;
                deg[j + 1] += 1;
            }
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut next = deg.clone();
        let mut nb = vec![0usize; deg[n]];
        for (i, j, _) in a.triplets() {
            if i != j {
                nb[next[i]] = j;
                next[i] += 1;
                nb[next[j]] = i;
                next[j] += 1;
            }
        }
        // sort + dedup each list
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(nb.len());
        offsets.push(0);
        for i in 0..n {
            let list = &mut nb[deg[i]..deg[i + 1]];
            list.sort_unstable();
            let mut last = usize::MAX;
            for &v in list.iter() {
                if v != last {
                    neighbors.push(v);
                    last = v;
                }
            }
            offsets.push(neighbors.len());
        }
        Self { offsets, neighbors }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Graph distance from any source, limited to `max_depth` layers and to
    /// nodes accepted by `allow`. Unreached nodes get `usize::MAX`.
    pub fn multi_source_distances(
        &self,
        sources: &[usize],
        max_depth: usize,
        allow: impl Fn(usize) -> bool,
    ) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == usize::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            if d >= max_depth {
                continue;
            }
            for &u in self.neighbors(v) {
                if dist[u] == usize::MAX && allow(u) {
                    dist[u] = d + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Connected components restricted to `nodes`, each in BFS order, and
    /// ordered by their smallest member position in `nodes`.
    pub fn components_within(&self, nodes: &[usize], member: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut comps = Vec::new();
        for &s in nodes {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &u in self.neighbors(v) {
                    if member[u] && !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    /// BFS level structure from `root` within `member` nodes.
    pub fn level_structure(&self, root: usize, member: &[bool], level: &mut [usize]) -> Vec<Vec<usize>> {
        let mut levels: Vec<Vec<usize>> = vec![vec![root]];
        level[root] = 0;
        let mut mark = vec![root];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for &u in self.neighbors(v) {
                    if member[u] && level[u] == usize::MAX {
                        level[u] = levels.len();
                        mark.push(u);
                        next.push(u);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        for v in mark {
            level[v] = usize::MAX;
        }
        levels
    }

    /// Pseudo-peripheral node of the component containing `start`
    /// (George–Liu heuristic).
    pub fn pseudo_peripheral(&self, start: usize, member: &[bool], scratch: &mut [usize]) -> usize {
        let mut root = start;
        let mut ecc = self.level_structure(root, member, scratch).len();
        for _ in 0..8 {
            let levels = self.level_structure(root, member, scratch);
            let last = levels.last().unwrap();
            let cand = *last.iter().min_by_key(|&&v| (self.degree(v), v)).unwrap();
            let e = self.level_structure(cand, member, scratch).len();
            if e > ecc {
                ecc = e;
                root = cand;
            } else {
                break;
            }
        }
        root
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn symmetrizes_pattern() {
        let g = Graph::from_matrix(&path(3));
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(2), &[1]);
    }

    #[test]
    fn distances_and_periphery() {
        let g = Graph::from_matrix(&path(5));
        let d = g.multi_source_distances(&[0], 2, |_| true);
        assert_eq!(d, std::vec![0, 1, 2, usize::MAX, usize::MAX]);
        let member = std::vec![true; 5];
        let mut scratch = std::vec![usize::MAX; 5];
        let p = g.pseudo_peripheral(2, &member, &mut scratch);
        assert!(p == 0 || p == 4);
    }
}
