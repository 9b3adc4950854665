//! Undirected communication graphs.
//!
//! Edges are stored as `(i, j)` with `i < j` and kept in lexicographic order,
//! so an edge index is a stable coordinate for weight vectors. The module also
//! provides the oriented incidence matrix and the partition of edges into
//! automorphism orbits.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest node count handled by the built-in automorphism search.
pub const ORBIT_SEARCH_LIMIT: usize = 16;

/// Connection attempts made by [`erdos_renyi`] before giving up.
pub const ER_MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    name: Option<String>,
    orbits: Option<OrbitPartition>,
}

/// Assignment of every edge to an automorphism orbit.
///
/// Orbit indices are contiguous and numbered in order of first appearance
/// along the canonical edge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPartition {
    orbit_of_edge: Vec<usize>,
    orbit_count: usize,
}

/// Oriented incidence matrix: column `e` of edge `(i, j)` holds `+1` at row
/// `i` and `-1` at row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix(pub DMatrix<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Complete,
    Star,
    Cycle,
    Grid,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "complete" => Ok(Topology::Complete),
            "star" => Ok(Topology::Star),
            "cycle" => Ok(Topology::Cycle),
            "grid" => Ok(Topology::Grid),
            other => Err(Error::InvalidTopology(format!("unknown topology '{other}'"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Topology::Complete => "complete",
            Topology::Star => "star",
            Topology::Cycle => "cycle",
            Topology::Grid => "grid",
        };
        f.write_str(s)
    }
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Pairs are oriented as
    /// `i < j` and sorted; self-loops, duplicates and out-of-range nodes are
    /// rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::with_orbit_labels(n, edges.into_iter().map(|e| (e, 0)).collect(), None, false)
    }

    /// Like [`Graph::new`], but also attaches a user supplied orbit label per
    /// edge (aligned with the given edge order).
    pub fn with_orbits(
        n: usize,
        edges: Vec<(usize, usize)>,
        orbit_labels: Vec<usize>,
    ) -> Result<Self> {
        if orbit_labels.len() != edges.len() {
            return Err(Error::Dimension(format!(
                "{} orbit labels for {} edges",
                orbit_labels.len(),
                edges.len()
            )));
        }
        let labelled = edges.into_iter().zip(orbit_labels).collect();
        Self::with_orbit_labels(n, labelled, None, true)
    }

    fn with_orbit_labels(
        n: usize,
        labelled: Vec<((usize, usize), usize)>,
        name: Option<String>,
        keep_orbits: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology("graph needs at least one node".into()));
        }
        let mut oriented = Vec::with_capacity(labelled.len());
        for ((a, b), label) in labelled {
            if a >= n || b >= n {
                return Err(Error::Schema(format!("edge ({a},{b}) out of range for n={n}")));
            }
            if a == b {
                return Err(Error::Schema(format!("self-loop at node {a}")));
            }
            oriented.push(((a.min(b), a.max(b)), label));
        }
        oriented.sort_by_key(|&(e, _)| e);
        if let Some(w) = oriented.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Schema(format!("duplicate edge {:?}", w[0].0)));
        }
        let edges: Vec<_> = oriented.iter().map(|&(e, _)| e).collect();
        let orbits = keep_orbits
            .then(|| OrbitPartition::from_labels(oriented.iter().map(|&(_, l)| l)));
        Ok(Graph {
            n,
            edges,
            name,
            orbits,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Orbit partition supplied with the graph (from a file or
    /// [`Graph::with_orbits`]), if any.
    pub fn explicit_orbits(&self) -> Option<&OrbitPartition> {
        self.orbits.as_ref()
    }

    pub fn set_explicit_orbits(&mut self, orbits: Option<OrbitPartition>) -> Result<()> {
        if let Some(o) = &orbits {
            if o.edge_count() != self.edge_count() {
                return Err(Error::Dimension(format!(
                    "orbit partition covers {} edges, graph has {}",
                    o.edge_count(),
                    self.edge_count()
                )));
            }
        }
        self.orbits = orbits;
        Ok(())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).ok()
    }

    /// Combinatorial Laplacian `D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            l[(i, i)] += 1.0;
            l[(j, j)] += 1.0;
            l[(i, j)] -= 1.0;
            l[(j, i)] -= 1.0;
        }
        l
    }

    /// Applies a node relabeling `v -> perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::Dimension("permutation length".into()));
        }
        let mut g = Graph::new(self.n, self.edges.iter().map(|&(i, j)| (perm[i], perm[j])))?;
        g.name = self.name.clone();
        Ok(g)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
            name: self.name.clone(),
            orbits: self.orbits.as_ref().map(|o| o.orbit_of_edge.clone()),
        }
    }

    pub fn from_file(file: GraphFile) -> Result<Graph> {
        let edges: Vec<_> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let labelled = match &file.orbits {
            Some(o) => {
                if o.len() != edges.len() {
                    return Err(Error::Schema(format!(
                        "'orbits' has {} entries but there are {} edges",
                        o.len(),
                        edges.len()
                    )));
                }
                edges.into_iter().zip(o.iter().copied()).collect()
            }
            None => edges.into_iter().map(|e| (e, 0)).collect(),
        };
        Self::with_orbit_labels(file.n, labelled, file.name, file.orbits.is_some())
    }
}

/// On-disk graph schema:
/// `{"n": 9, "edges": [[0,1],...], "name": "cycle9", "orbits": [0,0,...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbits: Option<Vec<usize>>,
}

impl OrbitPartition {
    /// Normalizes arbitrary labels into contiguous first-appearance indices.
    pub fn from_labels(labels: impl IntoIterator<Item = usize>) -> Self {
        let mut seen: Vec<usize> = Vec::new();
        let orbit_of_edge = labels
            .into_iter()
            .map(|l| match seen.iter().position(|&s| s == l) {
                Some(p) => p,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            })
            .collect();
        OrbitPartition {
            orbit_of_edge,
            orbit_count: seen.len(),
        }
    }

    /// Every edge in its own orbit.
    pub fn trivial(m: usize) -> Self {
        OrbitPartition {
            orbit_of_edge: (0..m).collect(),
            orbit_count: m,
        }
    }

    pub fn orbit_of_edge(&self) -> &[usize] {
        &self.orbit_of_edge
    }

    pub fn orbit_count(&self) -> usize {
        self.orbit_count
    }

    pub fn edge_count(&self) -> usize {
        self.orbit_of_edge.len()
    }

    /// Edge indices of each orbit.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.orbit_count];
        for (e, &o) in self.orbit_of_edge.iter().enumerate() {
            out[o].push(e);
        }
        out
    }

    /// Sorted orbit sizes; invariant under node relabeling.
    pub fn size_profile(&self) -> Vec<usize> {
        let mut sizes: Vec<_> = self.members().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        sizes
    }

    /// Expands one value per orbit to one value per edge.
    pub fn expand(&self, per_orbit: &[f64]) -> Vec<f64> {
        self.orbit_of_edge.iter().map(|&o| per_orbit[o]).collect()
    }

    /// Averages a per-edge vector over each orbit. Orbits whose entries are
    /// all equal return that entry exactly.
    pub fn reduce_mean(&self, per_edge: &[f64]) -> Vec<f64> {
        let mut sum = vec![0.0; self.orbit_count];
        let mut cnt = vec![0usize; self.orbit_count];
        let mut first: Vec<Option<f64>> = vec![None; self.orbit_count];
        let mut constant = vec![true; self.orbit_count];
        for (&o, &v) in self.orbit_of_edge.iter().zip(per_edge) {
            sum[o] += v;
            cnt[o] += 1;
            match first[o] {
                None => first[o] = Some(v),
                Some(f) => constant[o] &= f == v,
            }
        }
        (0..self.orbit_count)
            .map(|o| match (constant[o], first[o]) {
                (true, Some(f)) => f,
                _ => sum[o] / cnt[o] as f64,
            })
            .collect()
    }
}

/// Builds one of the standard test topologies.
///
/// The star hub is node 0 and the grid is the `r x r` lattice with node
/// `row * r + col`.
pub fn make_topology(kind: Topology, n: usize) -> Result<Graph> {
    let invalid = |why: &str| Err(Error::InvalidTopology(format!("{kind} with n={n}: {why}")));
    let edges: Vec<(usize, usize)> = match kind {
        Topology::Complete => {
            if n < 2 {
                return invalid("need n >= 2");
            }
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
        }
        Topology::Star => {
            if n < 2 {
                return invalid("need n >= 2");
            }
            (1..n).map(|j| (0, j)).collect()
        }
        Topology::Cycle => {
            if n < 3 {
                return invalid("need n >= 3");
            }
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        }
        Topology::Grid => {
            let r = (n as f64).sqrt().round() as usize;
            if n < 4 || r * r != n {
                return invalid("need a perfect square n >= 4");
            }
            let mut e = Vec::new();
            for row in 0..r {
                for col in 0..r {
                    let v = row * r + col;
                    if col + 1 < r {
                        e.push((v, v + 1));
                    }
                    if row + 1 < r {
                        e.push((v, v + r));
                    }
                }
            }
            e
        }
    };
    Ok(Graph::new(n, edges)?.named(format!("{kind}{n}")))
}

/// Samples G(n, p): each pair `i < j` is kept independently with probability
/// `p`, visited in lexicographic order. Disconnected samples are redrawn from
/// the same stream, at most [`ER_MAX_ATTEMPTS`] times.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0,1]")));
    }
    if n == 0 {
        return Err(Error::InvalidTopology("erdos-renyi needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ER_MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::new(n, edges)?;
        if is_connected(&g) {
            return Ok(g.named(format!("er{n}_p{p}_s{seed}")));
        }
    }
    Err(Error::NoConnectedSample {
        n,
        p,
        attempts: ER_MAX_ATTEMPTS,
    })
}

pub fn incidence(g: &Graph) -> IncidenceMatrix {
    let mut b = DMatrix::zeros(g.node_count(), g.edge_count());
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        b[(i, e)] = 1.0;
        b[(j, e)] = -1.0;
    }
    IncidenceMatrix(b)
}

pub fn is_connected(g: &Graph) -> bool {
    let adj = g.neighbors();
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                count += 1;
                queue.push_back(u);
            }
        }
    }
    count == g.node_count()
}

/// Edge orbits of `g`.
///
/// Returns the partition attached to the graph when one was supplied;
/// otherwise runs an exhaustive automorphism search, limited to
/// [`ORBIT_SEARCH_LIMIT`] nodes.
pub fn edge_orbits(g: &Graph) -> Result<OrbitPartition> {
    if let Some(o) = g.explicit_orbits() {
        return Ok(o.clone());
    }
    if g.node_count() > ORBIT_SEARCH_LIMIT {
        return Err(Error::GraphTooLarge {
            n: g.node_count(),
            limit: ORBIT_SEARCH_LIMIT,
        });
    }
    Ok(AutomorphismSearch::new(g).edge_orbits())
}

/// Orbits when available, otherwise every edge on its own.
pub fn orbits_or_trivial(g: &Graph) -> OrbitPartition {
    edge_orbits(g).unwrap_or_else(|_| OrbitPartition::trivial(g.edge_count()))
}

struct AutomorphismSearch<'a> {
    g: &'a Graph,
    adj: Vec<u32>,
    neighbors: Vec<Vec<usize>>,
    color: Vec<usize>,
}

impl<'a> AutomorphismSearch<'a> {
    fn new(g: &'a Graph) -> Self {
        let n = g.node_count();
        let mut adj = vec![0u32; n];
        for &(i, j) in g.edges() {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        let neighbors = g.neighbors();
        let color = refine_colors(&neighbors);
        AutomorphismSearch {
            g,
            adj,
            neighbors,
            color,
        }
    }

    fn edge_orbits(&self) -> OrbitPartition {
        let edges = self.g.edges();
        let m = edges.len();
        let mut dsu = Dsu::new(m);
        for e in 0..m {
            let (a, b) = edges[e];
            let mut roots: Vec<usize> = (0..e).map(|r| dsu.find(r)).collect();
            roots.sort_unstable();
            roots.dedup();
            for r in roots {
                if dsu.find(r) == dsu.find(e) {
                    break;
                }
                let (c, d) = edges[r];
                let mut ce = [self.color[a], self.color[b]];
                let mut cr = [self.color[c], self.color[d]];
                ce.sort_unstable();
                cr.sort_unstable();
                if ce != cr {
                    continue;
                }
                let found = self
                    .find_automorphism(&[(c, a), (d, b)])
                    .or_else(|| self.find_automorphism(&[(c, b), (d, a)]));
                if let Some(phi) = found {
                    for (k, &(i, j)) in edges.iter().enumerate() {
                        if let Some(img) = self.g.edge_index(phi[i], phi[j]) {
                            dsu.union(k, img);
                        }
                    }
                    break;
                }
            }
        }
        OrbitPartition::from_labels((0..m).map(|e| dsu.find(e)))
    }

    /// Searches for an automorphism extending the partial map `fixed`.
    fn find_automorphism(&self, fixed: &[(usize, usize)]) -> Option<Vec<usize>> {
        let n = self.g.node_count();
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for &(v, _) in fixed {
            if !placed[v] {
                placed[v] = true;
                order.push(v);
            }
        }
        // Breadth-first from the fixed vertices so adjacency prunes early.
        let mut head = 0;
        loop {
            while head < order.len() {
                let v = order[head];
                head += 1;
                for &u in &self.neighbors[v] {
                    if !placed[u] {
                        placed[u] = true;
                        order.push(u);
                    }
                }
            }
            match (0..n).find(|&v| !placed[v]) {
                Some(v) => {
                    placed[v] = true;
                    order.push(v);
                }
                None => break,
            }
        }

        let mut map = vec![usize::MAX; n];
        let mut used = 0u32;
        for &(v, u) in fixed {
            if self.color[v] != self.color[u] {
                return None;
            }
        }
        if self.extend(&order, 0, fixed, &mut map, &mut used) {
            Some(map)
        } else {
            None
        }
    }

    fn extend(
        &self,
        order: &[usize],
        depth: usize,
        fixed: &[(usize, usize)],
        map: &mut [usize],
        used: &mut u32,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        let forced = fixed.iter().find(|&&(fv, _)| fv == v).map(|&(_, u)| u);
        let candidates: Vec<usize> = match forced {
            Some(u) => vec![u],
            None => (0..self.g.node_count())
                .filter(|&u| self.color[u] == self.color[v])
                .collect(),
        };
        for u in candidates {
            if *used & (1 << u) != 0 {
                continue;
            }
            let consistent = order[..depth].iter().all(|&w| {
                let vw = self.adj[v] & (1 << w) != 0;
                let uw = self.adj[u] & (1 << map[w]) != 0;
                vw == uw
            });
            if !consistent {
                continue;
            }
            map[v] = u;
            *used |= 1 << u;
            if self.extend(order, depth + 1, fixed, map, used) {
                return true;
            }
            *used &= !(1 << u);
            map[v] = usize::MAX;
        }
        false
    }
}

/// Stable colour refinement starting from degrees. Automorphisms preserve the
/// resulting colours.
fn refine_colors(neighbors: &[Vec<usize>]) -> Vec<usize> {
    let n = neighbors.len();
    let mut color: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let mut classes = color.iter().collect::<BTreeSet<_>>().len();
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nc: Vec<usize> = neighbors[v].iter().map(|&u| color[u]).collect();
                nc.sort_unstable();
                (color[v], nc)
            })
            .collect();
        let distinct: Vec<_> = signatures.iter().collect::<BTreeSet<_>>().into_iter().collect();
        let next: Vec<usize> = signatures
            .iter()
            .map(|s| distinct.binary_search(&s).unwrap())
            .collect();
        let next_classes = distinct.len();
        color = next;
        if next_classes == classes {
            return color;
        }
        classes = next_classes;
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    // Smaller index becomes the root so roots stay the earliest edge.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_edge_counts() {
        assert_eq!(make_topology(Topology::Complete, 9).unwrap().edge_count(), 36);
        assert_eq!(make_topology(Topology::Cycle, 9).unwrap().edge_count(), 9);
        assert_eq!(make_topology(Topology::Grid, 9).unwrap().edge_count(), 12);
        assert_eq!(make_topology(Topology::Star, 9).unwrap().edge_count(), 8);
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(make_topology(Topology::Grid, 8).is_err());
        assert!(make_topology(Topology::Grid, 1).is_err());
        assert!(make_topology(Topology::Cycle, 2).is_err());
        assert!(make_topology(Topology::Complete, 1).is_err());
        assert!(make_topology(Topology::Star, 1).is_err());
    }

    #[test]
    fn edges_are_canonical() {
        let g = Graph::new(4, [(3, 1), (0, 2), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3)]);
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn erdos_renyi_full_probability_is_complete() {
        let g = erdos_renyi(9, 1.0, 17).unwrap();
        assert_eq!(g.edges(), make_topology(Topology::Complete, 9).unwrap().edges());
    }

    #[test]
    fn erdos_renyi_is_deterministic_and_connected() {
        let a = erdos_renyi(9, 0.4, 3).unwrap();
        let b = erdos_renyi(9, 0.4, 3).unwrap();
        assert_eq!(a, b);
        assert!(is_connected(&a));
    }

    #[test]
    fn erdos_renyi_gives_up_when_p_is_zero() {
        assert!(matches!(
            erdos_renyi(5, 0.0, 1),
            Err(Error::NoConnectedSample { .. })
        ));
        assert!(erdos_renyi(5, 1.5, 1).is_err());
    }

    #[test]
    fn single_edge_incidence() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let b = incidence(&g).0;
        assert_eq!(b[(0, 0)], 1.0);
        assert_eq!(b[(1, 0)], -1.0);
    }

    #[test]
    fn incidence_gram_is_laplacian() {
        for kind in [Topology::Complete, Topology::Star, Topology::Cycle, Topology::Grid] {
            let g = make_topology(kind, 9).unwrap();
            let b = incidence(&g).0;
            for e in 0..g.edge_count() {
                assert_eq!(b.column(e).sum(), 0.0);
            }
            assert_eq!(&b * b.transpose(), g.laplacian());
        }
        let c = make_topology(Topology::Cycle, 9).unwrap();
        let b = incidence(&c).0;
        let l = &b * b.transpose();
        assert!((0..9).all(|i| l[(i, i)] == 2.0));
    }

    #[test]
    fn connectivity() {
        assert!(is_connected(&make_topology(Topology::Cycle, 9).unwrap()));
        assert!(!is_connected(&Graph::new(2, []).unwrap()));
        let star = make_topology(Topology::Star, 9).unwrap();
        for drop in 0..star.edge_count() {
            let rest: Vec<_> = star
                .edges()
                .iter()
                .enumerate()
                .filter(|&(e, _)| e != drop)
                .map(|(_, &e)| e)
                .collect();
            assert!(!is_connected(&Graph::new(9, rest).unwrap()));
        }
    }

    #[test]
    fn orbits_of_symmetric_topologies() {
        for kind in [Topology::Complete, Topology::Star, Topology::Cycle] {
            let o = edge_orbits(&make_topology(kind, 9).unwrap()).unwrap();
            assert_eq!(o.orbit_count(), 1, "{kind}");
        }
        let o = edge_orbits(&make_topology(Topology::Grid, 9).unwrap()).unwrap();
        assert_eq!(o.orbit_count(), 2);
        assert_eq!(o.size_profile(), vec![4, 8]);
    }

    #[test]
    fn grid16_has_four_orbits() {
        let o = edge_orbits(&make_topology(Topology::Grid, 16).unwrap()).unwrap();
        assert_eq!(o.orbit_count(), 4);
    }

    #[test]
    fn path_orbits() {
        // 0-1-2-3: the two end edges are swapped by reversal; the middle one is alone.
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let o = edge_orbits(&g).unwrap();
        assert_eq!(o.orbit_of_edge(), &[0, 1, 0]);
    }

    #[test]
    fn large_graph_needs_explicit_partition() {
        let g = make_topology(Topology::Cycle, 17).unwrap();
        assert!(matches!(edge_orbits(&g), Err(Error::GraphTooLarge { .. })));
        let mut g = g;
        g.set_explicit_orbits(Some(OrbitPartition::trivial(17))).unwrap();
        assert_eq!(edge_orbits(&g).unwrap().orbit_count(), 17);
    }

    #[test]
    fn labels_are_normalized() {
        let o = OrbitPartition::from_labels([7, 3, 7, 5]);
        assert_eq!(o.orbit_of_edge(), &[0, 1, 0, 2]);
        assert_eq!(o.orbit_count(), 3);
        assert_eq!(o.expand(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 1.0, 3.0]);
        assert_eq!(o.reduce_mean(&[1.0, 2.0, 3.0, 4.0]), vec![2.0, 2.0, 4.0]);
    }

    #[test]
    fn file_round_trip_keeps_orbits_aligned() {
        let file = GraphFile {
            n: 3,
            edges: vec![[1, 2], [0, 1]],
            name: Some("p3".into()),
            orbits: Some(vec![4, 9]),
        };
        let g = Graph::from_file(file).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.explicit_orbits().unwrap().orbit_of_edge(), &[0, 1]);
        let back = Graph::from_file(g.to_file()).unwrap();
        assert_eq!(back, g);
    }
}
