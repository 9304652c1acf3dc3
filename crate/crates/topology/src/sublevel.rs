//! Union-find and open-sublevel components on grid nodes.

use wk_field::{Grid, NodeKind};

#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let g = self.parent[self.parent[x] as usize];
            self.parent[x] = g;
            x = g as usize;
        }
        x
    }

    /// Attaches the root of `child` below the root of `keep`; returns the surviving root.
    pub(crate) fn union_into(&mut self, keep: usize, child: usize) -> usize {
        let (a, b) = (self.find(keep), self.find(child));
        if a != b {
            self.parent[b] = a as u32;
            self.size[a] += self.size[b];
        }
        a
    }
}

pub const NONE: u32 = u32::MAX;

/// Connected components (axis adjacency) of `{node : f < level}` among the
/// nodes accepted by `filter`. Labels are dense, ordered by first node index;
/// excluded nodes get [`NONE`].
pub fn sublevel_components(grid: &Grid, f: &[f64], level: f64, filter: impl Fn(usize) -> bool) -> Vec<u32> {
    let n = grid.node_count();
    let inside: Vec<bool> = (0..n).map(|v| f[v] < level && filter(v)).collect();
    let mut ds = DisjointSet::new(n);
    for v in 0..n {
        if !inside[v] {
            continue;
        }
        for (w, _) in grid.neighbors(v) {
            if w > v && inside[w] {
                ds.union_into(v, w);
            }
        }
    }
    let mut label = vec![NONE; n];
    let mut root_label = vec![NONE; n];
    let mut next = 0u32;
    for v in 0..n {
        if inside[v] {
            let r = ds.find(v);
            if root_label[r] == NONE {
                root_label[r] = next;
                next += 1;
            }
            label[v] = root_label[r];
        }
    }
    label
}

pub fn interior_filter(grid: &Grid) -> impl Fn(usize) -> bool + '_ {
    move |v| grid.kind(v) == NodeKind::Interior
}
