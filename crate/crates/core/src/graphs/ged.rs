//! Exact graph edit distance for small unlabeled graphs.
//!
//! Costs: edge insertion/deletion 1, node insertion/deletion 1, node
//! substitution 0. The smaller graph is padded with isolated vertices, so
//! the distance is `|n1 - n2| + min over bijections π of |E1 Δ π(E2)|`,
//! found by depth-first branch and bound over vertex assignments.

use super::Graph;
use crate::error::{Error, Result};

/// Default search bound on the vertex count of either graph.
pub const MAX_GED_VERTICES: usize = 12;

pub fn graph_edit_distance(g1: &Graph, g2: &Graph) -> Result<usize> {
    graph_edit_distance_with_limit(g1, g2, MAX_GED_VERTICES)
}

pub fn graph_edit_distance_with_limit(g1: &Graph, g2: &Graph, limit: usize) -> Result<usize> {
    let limit = limit.min(32);
    let size = g1.n().max(g2.n());
    if size > limit {
        return Err(Error::Capacity {
            what: "graph edit distance search",
            size,
            limit,
        });
    }
    let mut search = Search::new(g1, g2);
    search.run();
    Ok(g1.n().abs_diff(g2.n()) + search.best)
}

fn padded_masks(g: &Graph, size: usize) -> Vec<u32> {
    let mut adj: Vec<u32> = g.adjacency_masks().into_iter().map(|m| m as u32).collect();
    adj.resize(size, 0);
    adj
}

struct Search {
    size: usize,
    adj1: Vec<u32>,
    adj2: Vec<u32>,
    /// Assignment order over vertices of the first graph.
    order: Vec<usize>,
    /// Vertices of the second graph `>= real2` are padding and interchangeable.
    real2: usize,
    best: usize,
}

impl Search {
    fn new(g1: &Graph, g2: &Graph) -> Self {
        let size = g1.n().max(g2.n());
        let adj1 = padded_masks(g1, size);
        let adj2 = padded_masks(g2, size);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&u| (std::cmp::Reverse(adj1[u].count_ones()), u));
        Search {
            size,
            adj1,
            adj2,
            order,
            real2: g2.n(),
            best: g1.num_edges() + g2.num_edges() + 1,
        }
    }

    fn run(&mut self) {
        let img = vec![0u32; self.size];
        self.descend(0, 0, 0, &img);
    }

    /// `used` holds second-graph vertices already taken, `img[u]` the images
    /// of the assigned neighbours of first-graph vertex `u`.
    fn descend(&mut self, depth: usize, used: u32, cost: usize, img: &[u32]) {
        if depth == self.size {
            self.best = self.best.min(cost);
            return;
        }
        let u = self.order[depth];
        let mut candidates: Vec<(usize, usize)> = Vec::with_capacity(self.size);
        let mut padding_tried = false;
        for v in 0..self.size {
            if used >> v & 1 == 1 {
                continue;
            }
            if v >= self.real2 {
                if padding_tried {
                    continue;
                }
                padding_tried = true;
            }
            let delta = (img[u] ^ (self.adj2[v] & used)).count_ones() as usize;
            candidates.push((delta, v));
        }
        candidates.sort_unstable();

        let assigned: u32 = self.order[..=depth].iter().fold(0, |m, &w| m | 1 << w);
        let mut next = img.to_vec();
        for (delta, v) in candidates {
            let cost = cost + delta;
            if cost >= self.best {
                break;
            }
            let used = used | 1 << v;
            next.copy_from_slice(img);
            let mut nbrs = self.adj1[u];
            while nbrs != 0 {
                let w = nbrs.trailing_zeros() as usize;
                next[w] |= 1 << v;
                nbrs &= nbrs - 1;
            }
            if cost + self.lower_bound(assigned, used, &next) >= self.best {
                continue;
            }
            self.descend(depth + 1, used, cost, &next);
        }
    }

    /// Admissible bound on the mismatches still to be decided.
    ///
    /// Pairs with one assigned endpoint are charged to their unassigned end
    /// and bounded by that vertex's cheapest possible target. Pairs with both
    /// endpoints unassigned are bounded by half the L1 distance between the
    /// sorted residual degree sequences.
    fn lower_bound(&self, assigned: u32, used: u32, img: &[u32]) -> usize {
        let all = if self.size == 32 {
            u32::MAX
        } else {
            (1u32 << self.size) - 1
        };
        let free1 = all & !assigned;
        let free2 = all & !used;
        if free1 == 0 {
            return 0;
        }
        let mut cross = 0usize;
        let mut r1 = Vec::with_capacity(self.size);
        let mut r2 = Vec::with_capacity(self.size);
        let mut f = free1;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            r1.push((self.adj1[u] & free1).count_ones());
            let mut cheapest = u32::MAX;
            let mut g = free2;
            while g != 0 {
                let v = g.trailing_zeros() as usize;
                g &= g - 1;
                cheapest = cheapest.min((img[u] ^ (self.adj2[v] & used)).count_ones());
            }
            cross += cheapest as usize;
        }
        let mut g = free2;
        while g != 0 {
            let v = g.trailing_zeros() as usize;
            g &= g - 1;
            r2.push((self.adj2[v] & free2).count_ones());
        }
        r1.sort_unstable();
        r2.sort_unstable();
        let l1: u32 = r1.iter().zip(&r2).map(|(a, b)| a.abs_diff(*b)).sum();
        cross + l1.div_ceil(2) as usize
    }
}
