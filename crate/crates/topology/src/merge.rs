//! Sublevel filtration of the grid with union-find merge events.

use serde::{Deserialize, Serialize};
use wk_field::{Grid, NodeKind};

use crate::sublevel::DisjointSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub level: f64,
    pub witness: usize,
    /// Birth ids of the surviving (older) and the absorbed component.
    pub survivor: usize,
    pub absorbed: usize,
    /// Critical point refined from the witness, if Newton stayed close.
    pub refined_saddle: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "via")]
pub enum Contact {
    /// The component absorbed boundary node `witness`.
    BoundaryNode { level: f64, witness: usize },
    /// The component merged (event index) into one that already touched ∂Ω.
    Merge { level: f64, event: usize },
}

impl Contact {
    pub fn level(&self) -> f64 {
        match *self {
            Contact::BoundaryNode { level, .. } | Contact::Merge { level, .. } => level,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Birth {
    pub node: usize,
    pub level: f64,
    pub first_boundary_contact: Option<Contact>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeStructure {
    /// Nodes in filtration order (ascending f, ties by index).
    #[serde(skip)]
    pub order: Vec<usize>,
    pub births: Vec<Birth>,
    pub events: Vec<MergeEvent>,
    /// Birth id of the component each node joined when inserted.
    #[serde(skip)]
    pub node_birth: Vec<u32>,
}

impl MergeStructure {
    pub fn build(grid: &Grid, f: &[f64]) -> Self {
        let n = grid.node_count();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));

        let mut ds = DisjointSet::new(n);
        let mut inserted = vec![false; n];
        // per root: birth id, touching flag, births still without contact
        let mut root_birth = vec![u32::MAX; n];
        let mut touching = vec![false; n];
        let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut births: Vec<Birth> = Vec::new();
        let mut events: Vec<MergeEvent> = Vec::new();
        let mut node_birth = vec![u32::MAX; n];

        for &v in &order {
            inserted[v] = true;
            let mut roots: Vec<usize> = Vec::new();
            for (w, _) in grid.neighbors(v) {
                if inserted[w] {
                    let r = ds.find(w);
                    if !roots.contains(&r) {
                        roots.push(r);
                    }
                }
            }
            let level = f[v];
            if roots.is_empty() {
                let b = births.len();
                births.push(Birth { node: v, level, first_boundary_contact: None });
                root_birth[v] = b as u32;
                pending[v].push(b);
                node_birth[v] = b as u32;
            } else {
                // elder rule: the component born first survives
                roots.sort_by_key(|&r| root_birth[r]);
                let mut root = roots[0];
                node_birth[v] = root_birth[root];
                root = ds.union_into(root, v);
                for &r in &roots[1..] {
                    let event = events.len();
                    events.push(MergeEvent {
                        level,
                        witness: v,
                        survivor: root_birth[root] as usize,
                        absorbed: root_birth[r] as usize,
                        refined_saddle: None,
                    });
                    let (t_root, t_r) = (touching[root], touching[r]);
                    let mut moved = std::mem::take(&mut pending[r]);
                    let mut mine = std::mem::take(&mut pending[root]);
                    if t_root && !t_r {
                        for b in moved.drain(..) {
                            births[b].first_boundary_contact = Some(Contact::Merge { level, event });
                        }
                    } else if t_r && !t_root {
                        for b in mine.drain(..) {
                            births[b].first_boundary_contact = Some(Contact::Merge { level, event });
                        }
                    }
                    mine.append(&mut moved);
                    let keep = root_birth[root];
                    let new_root = ds.union_into(root, r);
                    root_birth[new_root] = keep;
                    touching[new_root] = t_root || t_r;
                    pending[new_root] = mine;
                    root = new_root;
                }
            }
            let root = ds.find(v);
            if root_birth[root] == u32::MAX {
                root_birth[root] = node_birth[v];
            }
            if grid.kind(v) == NodeKind::Boundary && !touching[root] {
                touching[root] = true;
                for b in std::mem::take(&mut pending[root]) {
                    births[b].first_boundary_contact = Some(Contact::BoundaryNode { level, witness: v });
                }
            }
        }
        MergeStructure { order, births, events, node_birth }
    }

    /// First boundary contact of the component that `node` joined on insertion,
    /// provided it happened at or above the node's own level.
    pub fn contact_of_node(&self, node: usize) -> Option<Contact> {
        self.births[self.node_birth[node] as usize].first_boundary_contact
    }
}
