//! Directed graphs and the topology constants the learner's theory needs.
//!
//! Nodes are dense ids `0..n`. Edge ids are the positions in the edge list
//! and never change once the graph is built, so per-edge data (features,
//! probabilities, learner state) can live in flat vectors indexed by edge id.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: Vec<(NodeId, NodeId)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::Parameter(format!("self-loop on node {u}")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::Parameter(format!("duplicate edge ({u}, {v})")));
            }
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            out_adj[u].push(id);
            in_adj[v].push(id);
        }
        Ok(Graph {
            n,
            edges,
            out_adj,
            in_adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e]
    }

    pub fn tail(&self, e: EdgeId) -> NodeId {
        self.edges[e].0
    }

    pub fn head(&self, e: EdgeId) -> NodeId {
        self.edges[e].1
    }

    /// Out-edge ids of `u`, ascending.
    pub fn out_edges(&self, u: NodeId) -> &[EdgeId] {
        &self.out_adj[u]
    }

    /// In-edge ids of `v`, ascending.
    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_adj[u].len()
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if u >= self.n {
            Err(Error::NodeOutOfRange { node: u, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Nodes reachable from `u` by a directed path of length ≥ 1.
    ///
    /// `u` itself is included only when it lies on a cycle.
    pub fn descendants(&self, u: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(u)?;
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for &e in &self.out_adj[u] {
            let v = self.head(e);
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(w) = queue.pop_front() {
            for &e in &self.out_adj[w] {
                let v = self.head(e);
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        Ok((0..self.n).filter(|&v| seen[v]).collect())
    }

    /// Reachability mask from a set of sources; sources are always marked.
    pub fn reachable_from(&self, sources: &[NodeId]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(w) = queue.pop_front() {
            for &e in &self.out_adj[w] {
                let v = self.head(e);
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Writes the edge list in the plain `u v` text format.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.edges.len() * 8);
        out.push_str(&format!("# nodes {} edges {}\n", self.n, self.edges.len()));
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Directed Erdős–Rényi graph: each ordered pair `(u, v)`, `u != v`, is an
/// edge independently with probability `p_edge`. Edges come out in
/// lexicographic `(u, v)` order.
pub fn gen_erdos_renyi(n: usize, p_edge: f64, rng_seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 nodes, got {n}")));
    }
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(Error::Parameter(format!(
            "edge probability {p_edge} outside [0, 1]"
        )));
    }
    let mut rng = rng::substream(&[rng::tag::GRAPH, rng_seed]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen::<f64>() < p_edge {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}

/// Loads a whitespace-separated edge list (SNAP style).
///
/// Lines starting with `#` and blank lines are skipped. With `node_limit`,
/// only edges whose original endpoints are both `< node_limit` are kept.
/// Surviving nodes are relabeled densely in order of first appearance;
/// self-loops and repeated edges are dropped.
pub fn load_edge_list(path: &Path, node_limit: Option<usize>) -> Result<Graph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut relabel: HashMap<u64, NodeId> = HashMap::new();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg,
        };
        let mut fields = trimmed.split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(format!("expected two node ids, got {trimmed:?}"))),
        };
        let u: u64 = a
            .parse()
            .map_err(|_| parse_err(format!("bad node id {a:?}")))?;
        let v: u64 = b
            .parse()
            .map_err(|_| parse_err(format!("bad node id {b:?}")))?;
        if let Some(limit) = node_limit {
            if u >= limit as u64 || v >= limit as u64 {
                continue;
            }
        }
        if u == v {
            continue;
        }
        let next = relabel.len();
        let u = *relabel.entry(u).or_insert(next);
        let next = relabel.len();
        let v = *relabel.entry(v).or_insert(next);
        if seen.insert((u, v)) {
            edges.push((u, v));
        }
    }

    if edges.is_empty() {
        return Err(Error::EmptyGraph(path.to_path_buf()));
    }
    Graph::new(relabel.len(), edges)
}

/// Topology-derived constants for a given seed budget.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    /// Weakly connected components, largest first; equal sizes are ordered
    /// by their smallest node id. Each component's nodes are ascending.
    pub components: Vec<Vec<NodeId>>,
    /// Edge count of each component, aligned with `components`.
    pub component_edges: Vec<usize>,
    /// Largest descendant-edge count of any node, per component.
    pub component_max_desc_edges: Vec<usize>,
    /// Largest reachable-set size over all nodes, counting the node itself.
    pub n_tilde: usize,
    /// Seed budget the `e_star` / `e_c` fields were evaluated at.
    pub budget: usize,
    pub e_star: usize,
    pub e_c: usize,
}

impl GraphStats {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Total edges in the first `min(l, k)` components.
    pub fn e_star_at(&self, k: usize) -> usize {
        self.component_edges.iter().take(k).sum()
    }

    /// Summed per-component descendant-edge maxima over the first
    /// `min(l, k)` components.
    pub fn e_c_at(&self, k: usize) -> usize {
        self.component_max_desc_edges.iter().take(k).sum()
    }
}

/// Weakly connected components ordered by descending size, ties broken by
/// the smallest contained node id.
pub fn weak_components(g: &Graph) -> Vec<Vec<NodeId>> {
    let mut label = vec![usize::MAX; g.n];
    let mut comps: Vec<Vec<NodeId>> = Vec::new();
    for start in 0..g.n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![start];
        label[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(w) = queue.pop_front() {
            let outs = g.out_adj[w].iter().map(|&e| g.head(e));
            let ins = g.in_adj[w].iter().map(|&e| g.tail(e));
            for v in outs.chain(ins) {
                if label[v] == usize::MAX {
                    label[v] = id;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    // Components were discovered in order of their smallest node, so a
    // stable sort by size keeps the tie-break.
    comps.sort_by(|a, b| b.len().cmp(&a.len()));
    comps
}

/// Computes components, `E*`, `E^c` and `ñ` for seed budget `k`.
///
/// A node's descendant edges are the edges whose tail is reachable from it
/// (the node itself included): exactly the edges lying on some path from
/// the node to one of its descendants.
pub fn analyze(g: &Graph, k: usize) -> Result<GraphStats> {
    if k == 0 {
        return Err(Error::Parameter("seed budget must be at least 1".into()));
    }
    let components = weak_components(g);
    let mut comp_of = vec![0usize; g.n];
    for (i, comp) in components.iter().enumerate() {
        for &u in comp {
            comp_of[u] = i;
        }
    }
    let mut component_edges = vec![0usize; components.len()];
    for &(u, _) in &g.edges {
        component_edges[comp_of[u]] += 1;
    }

    let mut component_max_desc_edges = vec![0usize; components.len()];
    let mut n_tilde = 0;
    for u in 0..g.n {
        let reach = g.reachable_from(&[u]);
        let mut reached = 0;
        let mut desc_edges = 0;
        for (w, &r) in reach.iter().enumerate() {
            if r {
                reached += 1;
                desc_edges += g.out_adj[w].len();
            }
        }
        n_tilde = n_tilde.max(reached);
        let c = comp_of[u];
        component_max_desc_edges[c] = component_max_desc_edges[c].max(desc_edges);
    }

    let mut stats = GraphStats {
        components,
        component_edges,
        component_max_desc_edges,
        n_tilde,
        budget: k,
        e_star: 0,
        e_c: 0,
    };
    stats.e_star = stats.e_star_at(k);
    stats.e_c = stats.e_c_at(k);
    Ok(stats)
}
