//! Problem instances: unweighted simple graphs, Erdős–Rényi generation,
//! cut evaluation, exact Max-Cut and exact graph edit distance.

mod ged;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use ged::{graph_edit_distance, graph_edit_distance_with_limit, MAX_GED_VERTICES};

/// Default enumeration bound for [`maxcut_bruteforce`].
pub const MAX_ENUMERATION_VERTICES: usize = 26;

/// An undirected simple graph on vertices `0..n`.
///
/// Edges are stored canonically: each pair as `(u, v)` with `u < v`, the
/// list sorted, so equal graphs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    id: String,
    n: usize,
    edges: Vec<(usize, usize)>,
    e_p: Option<f64>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    id: String,
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    e_p: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        let mut g = Graph::new(r.id, r.n, r.edges)?;
        if let Some(e_p) = r.e_p {
            check_probability(e_p)?;
        }
        g.e_p = r.e_p;
        g.seed = r.seed;
        Ok(g)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            id: g.id,
            n: g.n,
            edges: g.edges,
            e_p: g.e_p,
            seed: g.seed,
        }
    }
}

fn check_probability(e_p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&e_p) {
        Ok(())
    } else {
        Err(Error::Input(format!("e_p must lie in [0, 1], got {e_p}")))
    }
}

impl Graph {
    /// Builds a graph, canonicalizing edge orientation and order.
    ///
    /// Rejects `n == 0`, self-loops, out-of-range endpoints and duplicate
    /// edges.
    pub fn new(id: impl Into<String>, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("graph must have at least one vertex".into()));
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Input(format!("self-loop on vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Graph {
            id: id.into(),
            n,
            edges: canon,
            e_p: None,
            seed: None,
        })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Graph::new(format!("empty{n}"), n, [])
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(format!("K{n}"), n, edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Input(format!("cycle needs at least 3 vertices, got {n}")));
        }
        Graph::new(format!("C{n}"), n, (0..n).map(|u| (u, (u + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        Graph::new(format!("P{n}"), n, (1..n).map(|v| (v - 1, v)))
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn e_p(&self) -> Option<f64> {
        self.e_p
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Adjacency as one bitmask per vertex. Requires `n <= 64`.
    pub(crate) fn adjacency_masks(&self) -> Vec<u64> {
        debug_assert!(self.n <= 64);
        let mut adj = vec![0u64; self.n];
        for &(u, v) in &self.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }

    /// Returns the graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n
            || perm
                .iter()
                .any(|&t| t >= self.n || std::mem::replace(&mut seen[t], true))
        {
            return Err(Error::Input(format!(
                "relabeling is not a permutation of 0..{}",
                self.n
            )));
        }
        let mut g = Graph::new(
            self.id.clone(),
            self.n,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
        )?;
        g.e_p = self.e_p;
        g.seed = self.seed;
        Ok(g)
    }

    /// Number of edges whose endpoints differ in `assignment`.
    pub fn cut_value(&self, assignment: &[bool]) -> Result<usize> {
        if assignment.len() != self.n {
            return Err(Error::Input(format!(
                "assignment has length {}, graph has {} vertices",
                assignment.len(),
                self.n
            )));
        }
        Ok(self
            .edges
            .iter()
            .filter(|&&(u, v)| assignment[u] != assignment[v])
            .count())
    }

    /// Cut value of the basis index `z` (vertex `i` is bit `i`).
    pub fn cut_value_of_index(&self, z: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| ((z >> u) ^ (z >> v)) & 1 == 1)
            .count()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={}, |E|={})", self.id, self.n, self.edges.len())
    }
}

/// Parses an assignment written as a string of `0`/`1`, character `i` giving
/// the side of vertex `i`.
pub fn parse_assignment(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Input(format!("invalid assignment character {other:?}"))),
        })
        .collect()
}

/// Formats the basis index `z` as an `n`-character assignment string, vertex
/// 0 first.
pub fn format_assignment(z: u64, n: usize) -> String {
    (0..n).map(|i| if (z >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Samples G(n, e_p).
///
/// The stream is `ChaCha8Rng::seed_from_u64(seed)`. Pairs are visited in
/// lexicographic order `(0,1), (0,2), …, (n-2,n-1)`; each draws one uniform
/// `f64` in `[0, 1)` and the edge is kept iff the draw is `< e_p`.
pub fn generate_er(n: usize, e_p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    check_probability(e_p)?;
    let mut rng = rng::stream(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < e_p {
                edges.push((u, v));
            }
        }
    }
    let mut g = Graph::new(format!("er_n{n}_p{e_p}_s{seed}"), n, edges)?;
    g.e_p = Some(e_p);
    g.seed = Some(seed);
    Ok(g)
}

/// Exact Max-Cut value with every maximizing assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutResult {
    pub max_value: usize,
    /// Basis indices (vertex `i` is bit `i`), sorted ascending. Closed under
    /// complement.
    pub maximizers: Vec<u64>,
}

pub fn maxcut_bruteforce(g: &Graph) -> Result<CutResult> {
    maxcut_bruteforce_with_limit(g, MAX_ENUMERATION_VERTICES)
}

/// Exhaustive Max-Cut.
///
/// Vertex `n-1` is pinned to side 0, the remaining `2^(n-1)` assignments are
/// walked in Gray-code order with an O(1) cut update per flip, and every
/// maximizer found is paired with its complement.
pub fn maxcut_bruteforce_with_limit(g: &Graph, limit: usize) -> Result<CutResult> {
    let n = g.n();
    if n > limit.min(63) {
        return Err(Error::Capacity {
            what: "max-cut enumeration",
            size: n,
            limit: limit.min(63),
        });
    }
    let adj = g.adjacency_masks();
    let free = n - 1;
    let mut z: u64 = 0;
    let mut cut: i64 = 0;
    let mut best: i64 = 0;
    let mut found = vec![0u64];
    for k in 1u64..(1u64 << free) {
        let v = k.trailing_zeros() as usize;
        // neighbours on the same side become cut, the others uncut
        let same = if (z >> v) & 1 == 0 {
            (adj[v] & !z).count_ones()
        } else {
            (adj[v] & z).count_ones()
        } as i64;
        let deg = adj[v].count_ones() as i64;
        cut += 2 * same - deg;
        z ^= 1 << v;
        if cut > best {
            best = cut;
            found.clear();
            found.push(z);
        } else if cut == best {
            found.push(z);
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut maximizers: Vec<u64> = found.iter().flat_map(|&z| [z, z ^ all]).collect();
    maximizers.sort_unstable();
    Ok(CutResult {
        max_value: best as usize,
        maximizers,
    })
}
