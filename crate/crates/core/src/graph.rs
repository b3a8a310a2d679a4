//! Finite directed multigraphs and the structural analysis behind the
//! no-entry criterion: sources, cycle detection, path counting, and the
//! cycles/forest decomposition.
//!
//! Vertices and edges are identified by strings; parallel edges and loops
//! are allowed, and every analysis works with edge ids, never endpoint
//! pairs. All outputs are ordered lexicographically so downstream
//! certificates are byte-reproducible.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, IdKind, Result};

/// A directed edge `src -> rng`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub src: String,
    pub rng: String,
}

impl Edge {
    pub fn new(id: impl Into<String>, src: impl Into<String>, rng: impl Into<String>) -> Self {
        Edge {
            id: id.into(),
            src: src.into(),
            rng: rng.into(),
        }
    }
}

/// A finite directed multigraph with validated, deduplicated ids.
///
/// The vertex list and edge list are kept sorted; `to_json` is canonical
/// (parse → serialize → parse is the identity).
#[derive(Debug, Clone)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for Graph {}

#[derive(Serialize, Deserialize)]
struct GraphDto {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphDto {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dto = GraphDto::deserialize(d)?;
        Graph::new(dto.vertices, dto.edges).map_err(serde::de::Error::custom)
    }
}

impl Graph {
    pub fn new(mut vertices: Vec<String>, mut edges: Vec<Edge>) -> Result<Graph> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        vertices.sort();
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateId {
                    kind: IdKind::Vertex,
                    id: w[0].clone(),
                });
            }
        }
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        for w in edges.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::DuplicateId {
                    kind: IdKind::Edge,
                    id: w[0].id.clone(),
                });
            }
        }
        let vertex_index: HashMap<String, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut incoming = vec![Vec::new(); vertices.len()];
        let mut outgoing = vec![Vec::new(); vertices.len()];
        let mut edge_index = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            let si = *vertex_index
                .get(&e.src)
                .ok_or_else(|| Error::DanglingEndpoint {
                    edge: e.id.clone(),
                    vertex: e.src.clone(),
                })?;
            let ri = *vertex_index
                .get(&e.rng)
                .ok_or_else(|| Error::DanglingEndpoint {
                    edge: e.id.clone(),
                    vertex: e.rng.clone(),
                })?;
            outgoing[si].push(i);
            incoming[ri].push(i);
            edge_index.insert(e.id.clone(), i);
        }
        Ok(Graph {
            vertices,
            edges,
            vertex_index,
            edge_index,
            incoming,
            outgoing,
        })
    }

    /// Parses the `{"vertices": [...], "edges": [{"id","src","rng"}]}` schema.
    pub fn from_json(text: &str) -> Result<Graph> {
        let dto: GraphDto =
            serde_json::from_str(text).map_err(|e| Error::MalformedJson(e.to_string()))?;
        Graph::new(dto.vertices, dto.edges)
    }

    /// Canonical serialization: vertices then edges, each sorted.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    /// SHA-256 of the canonical serialization, as `sha256:<hex>`.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_json().as_bytes());
        format!("sha256:{}", hex::encode(h.finalize()))
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.vertex_index.contains_key(v)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edge_index.get(id).map(|&i| &self.edges[i])
    }

    pub fn in_edges(&self, v: &str) -> impl Iterator<Item = &Edge> {
        self.vertex_index
            .get(v)
            .map(|&i| self.incoming[i].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.edges[i])
    }

    pub fn out_edges(&self, v: &str) -> impl Iterator<Item = &Edge> {
        self.vertex_index
            .get(v)
            .map(|&i| self.outgoing[i].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.edges[i])
    }

    pub fn in_degree(&self, v: &str) -> usize {
        self.vertex_index
            .get(v)
            .map(|&i| self.incoming[i].len())
            .unwrap_or(0)
    }

    fn vindex(&self, v: &str) -> Result<usize> {
        self.vertex_index.get(v).copied().ok_or(Error::UnknownId {
            kind: IdKind::Vertex,
            id: v.to_string(),
        })
    }

    /// Strongly connected components over vertex indices (iterative Tarjan).
    fn sccs(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut next = 0usize;
        let mut comps = Vec::new();
        // (vertex, position into its outgoing edge list)
        let mut frames: Vec<(usize, usize)> = Vec::new();

        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            frames.push((root, 0));
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
                if *pos < self.outgoing[v].len() {
                    let e = self.outgoing[v][*pos];
                    *pos += 1;
                    let w = *self
                        .vertex_index
                        .get(&self.edges[e].rng)
                        .expect("validated endpoint");
                    if index[w] == usize::MAX {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    frames.pop();
                    if let Some(&(parent, _)) = frames.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }
}

/// A path: either the trivial path at a vertex, or a nonempty composable
/// edge sequence in traversal order (`rng` of each edge equals `src` of
/// the next).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Path {
    Trivial(String),
    Edges(Vec<String>),
}

impl Path {
    pub fn trivial(v: impl Into<String>) -> Path {
        Path::Trivial(v.into())
    }

    /// Builds a validated edge path (nonempty and composable in `g`).
    pub fn from_edges(g: &Graph, ids: Vec<String>) -> Result<Path> {
        if ids.is_empty() {
            return Err(Error::MalformedPath("empty edge sequence".into()));
        }
        for id in &ids {
            if g.edge(id).is_none() {
                return Err(Error::UnknownId {
                    kind: IdKind::Edge,
                    id: id.clone(),
                });
            }
        }
        for w in ids.windows(2) {
            let prev = g.edge(&w[0]).expect("checked above");
            let next = g.edge(&w[1]).expect("checked above");
            if prev.rng != next.src {
                return Err(Error::MalformedPath(format!(
                    "edge {:?} ends at {:?} but {:?} starts at {:?}",
                    w[0], prev.rng, w[1], next.src
                )));
            }
        }
        Ok(Path::Edges(ids))
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Path::Trivial(_))
    }

    pub fn len(&self) -> usize {
        match self {
            Path::Trivial(_) => 0,
            Path::Edges(ids) => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_ids(&self) -> &[String] {
        match self {
            Path::Trivial(_) => &[],
            Path::Edges(ids) => ids,
        }
    }

    /// First edge in traversal order (the innermost generator of `s_path`).
    pub fn first_edge(&self) -> Option<&str> {
        self.edge_ids().first().map(|s| s.as_str())
    }

    pub fn source(&self, g: &Graph) -> Result<String> {
        match self {
            Path::Trivial(v) => {
                g.vindex(v)?;
                Ok(v.clone())
            }
            Path::Edges(ids) => {
                let e = g.edge(&ids[0]).ok_or_else(|| Error::UnknownId {
                    kind: IdKind::Edge,
                    id: ids[0].clone(),
                })?;
                Ok(e.src.clone())
            }
        }
    }

    pub fn range(&self, g: &Graph) -> Result<String> {
        match self {
            Path::Trivial(v) => {
                g.vindex(v)?;
                Ok(v.clone())
            }
            Path::Edges(ids) => {
                let last = ids.last().expect("edge paths are nonempty");
                let e = g.edge(last).ok_or_else(|| Error::UnknownId {
                    kind: IdKind::Edge,
                    id: last.clone(),
                })?;
                Ok(e.rng.clone())
            }
        }
    }

    /// Concatenation `self` then `other`; requires `range(self) = source(other)`.
    pub fn concat(&self, other: &Path, g: &Graph) -> Result<Path> {
        let r = self.range(g)?;
        let s = other.source(g)?;
        if r != s {
            return Err(Error::MalformedPath(format!(
                "cannot compose: first path ends at {r:?}, second starts at {s:?}"
            )));
        }
        match (self, other) {
            (Path::Trivial(_), p) => Ok(p.clone()),
            (p, Path::Trivial(_)) => Ok(p.clone()),
            (Path::Edges(a), Path::Edges(b)) => {
                let mut ids = a.clone();
                ids.extend(b.iter().cloned());
                Ok(Path::Edges(ids))
            }
        }
    }
}

// Length-lexicographic order: shorter paths first, trivial paths by vertex
// id, edge paths of equal length by edge-id sequence.
impl Ord for Path {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Path::Trivial(a), Path::Trivial(b)) => a.cmp(b),
            (Path::Trivial(_), Path::Edges(_)) => std::cmp::Ordering::Less,
            (Path::Edges(_), Path::Trivial(_)) => std::cmp::Ordering::Greater,
            (Path::Edges(a), Path::Edges(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
        }
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A simple cycle, reported with a deterministic base vertex (the
/// lexicographically least vertex on it) and edges in traversal order from
/// that base: `edges[i]` runs from `vertices[i]` to `vertices[i+1]`, and
/// the last edge returns to the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    base: String,
    vertices: Vec<String>,
    edges: Vec<String>,
}

impl Cycle {
    /// Builds a cycle from edges in traversal order starting at `s(edges[0])`,
    /// validating closure and vertex-simplicity, then rebases to the
    /// lexicographically least vertex.
    pub fn from_edges(g: &Graph, edge_ids: Vec<String>) -> Result<Cycle> {
        let path = Path::from_edges(g, edge_ids)?;
        let src = path.source(g)?;
        let rng = path.range(g)?;
        if src != rng {
            return Err(Error::MalformedPath(format!(
                "not closed: starts at {src:?}, ends at {rng:?}"
            )));
        }
        let ids = path.edge_ids().to_vec();
        let verts: Vec<String> = ids
            .iter()
            .map(|id| g.edge(id).expect("validated").src.clone())
            .collect();
        let mut seen = BTreeSet::new();
        for v in &verts {
            if !seen.insert(v.clone()) {
                return Err(Error::MalformedPath(format!(
                    "vertex {v:?} visited twice; cycle is not simple"
                )));
            }
        }
        // Rotate so the lexicographically least vertex comes first.
        let base_pos = verts
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i)
            .expect("cycles are nonempty");
        let vertices: Vec<String> = verts[base_pos..]
            .iter()
            .chain(verts[..base_pos].iter())
            .cloned()
            .collect();
        let edges: Vec<String> = ids[base_pos..]
            .iter()
            .chain(ids[..base_pos].iter())
            .cloned()
            .collect();
        Ok(Cycle {
            base: vertices[0].clone(),
            vertices,
            edges,
        })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    /// Vertices in traversal order from the base.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Edges in traversal order from the base.
    pub fn edges(&self) -> &[String] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Cycles have positive length by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains_vertex(&self, v: &str) -> bool {
        self.vertices.iter().any(|w| w == v)
    }

    pub fn contains_edge(&self, e: &str) -> bool {
        self.edges.iter().any(|f| f == e)
    }
}

/// Vertices receiving no edges.
pub fn sources(g: &Graph) -> Vec<String> {
    g.vertices()
        .iter()
        .filter(|v| g.in_degree(v) == 0)
        .cloned()
        .collect()
}

/// All vertices lying on at least one cycle, via strongly connected
/// components: a vertex is on a cycle iff its component has two or more
/// vertices or it carries a loop edge.
pub fn cycle_vertices(g: &Graph) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for comp in g.sccs() {
        if comp.len() >= 2 {
            for i in comp {
                out.insert(g.vertices()[i].clone());
            }
        } else {
            let v = &g.vertices()[comp[0]];
            if g.out_edges(v).any(|e| e.rng == *v) {
                out.insert(v.clone());
            }
        }
    }
    out
}

/// Result of the entry check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryCheck {
    pub holds: bool,
    pub witness: Option<String>,
}

/// Decides whether no cycle has an entry.
///
/// A cycle vertex that receives exactly one edge receives only its cycle
/// edge; any further incoming edge is an entry of some cycle through that
/// vertex. So the criterion holds iff every cycle vertex has in-degree
/// exactly one. The returned witness, when the criterion fails, is an edge
/// whose range lies on a cycle not containing it.
pub fn no_cycle_has_entry(g: &Graph) -> EntryCheck {
    match find_entry_host(g) {
        None => EntryCheck {
            holds: true,
            witness: None,
        },
        Some((witness, _)) => EntryCheck {
            holds: false,
            witness: Some(witness),
        },
    }
}

/// Deterministic entry witness: the offending edge together with a host
/// cycle that it enters. `None` when no cycle has an entry.
pub fn find_entry_host(g: &Graph) -> Option<(String, Cycle)> {
    let cv = cycle_vertices(g);
    let crowded = cv.iter().find(|v| g.in_degree(v) >= 2)?;
    let host = least_cycle_through(g, crowded).expect("vertex lies on a cycle");
    let witness = g
        .in_edges(crowded)
        .map(|e| e.id.clone())
        .filter(|id| !host.contains_edge(id))
        .min()
        .expect("in-degree >= 2, host uses exactly one incoming edge");
    Some((witness, host))
}

/// Lexicographically least simple cycle through `v` (edge-id sequence
/// order, traversal starting at `v`), found by ordered depth-first search.
pub(crate) fn least_cycle_through(g: &Graph, v: &str) -> Option<Cycle> {
    fn dfs(
        g: &Graph,
        start: &str,
        at: &str,
        visited: &mut BTreeSet<String>,
        trail: &mut Vec<String>,
    ) -> bool {
        for e in g.out_edges(at) {
            if e.rng == start {
                trail.push(e.id.clone());
                return true;
            }
            if !visited.contains(&e.rng) {
                visited.insert(e.rng.clone());
                trail.push(e.id.clone());
                if dfs(g, start, &e.rng, visited, trail) {
                    return true;
                }
                trail.pop();
                visited.remove(&e.rng);
            }
        }
        false
    }

    let mut visited = BTreeSet::new();
    visited.insert(v.to_string());
    let mut trail = Vec::new();
    if dfs(g, v, v, &mut visited, &mut trail) {
        Some(Cycle::from_edges(g, trail).expect("search yields a simple closed path"))
    } else {
        None
    }
}

/// Lists all simple cycles, which are pairwise vertex-disjoint when no
/// cycle has an entry. Sorted by base vertex.
pub fn find_cycles(g: &Graph) -> Result<Vec<Cycle>> {
    if let Some((witness, _)) = find_entry_host(g) {
        return Err(Error::EntryPresent { witness });
    }
    let cv = cycle_vertices(g);
    let mut assigned: BTreeSet<String> = BTreeSet::new();
    let mut cycles = Vec::new();
    // Every cycle vertex has in-degree exactly one, so walking unique
    // incoming edges backwards from the least unassigned vertex traces
    // its cycle.
    for base in &cv {
        if assigned.contains(base) {
            continue;
        }
        let mut rev_edges = Vec::new();
        let mut at = base.clone();
        loop {
            let e = g
                .in_edges(&at)
                .next()
                .expect("cycle vertex receives its cycle edge");
            rev_edges.push(e.id.clone());
            at = e.src.clone();
            if at == *base {
                break;
            }
        }
        rev_edges.reverse();
        let cycle = Cycle::from_edges(g, rev_edges)?;
        for v in cycle.vertices() {
            assigned.insert(v.clone());
        }
        cycles.push(cycle);
    }
    cycles.sort_by(|a, b| a.base().cmp(b.base()));
    Ok(cycles)
}

/// Number of paths starting at `t`, counting the trivial path, via the
/// recursion `n(t) = 1 + sum over out-edges of n(range)`.
pub fn count_paths_from(g: &Graph, t: &str) -> Result<u64> {
    g.vindex(t)?;
    let cv = cycle_vertices(g);
    // A reachable cycle makes the count infinite.
    let mut reach = BTreeSet::new();
    let mut stack = vec![t.to_string()];
    while let Some(v) = stack.pop() {
        if !reach.insert(v.clone()) {
            continue;
        }
        if cv.contains(&v) {
            return Err(Error::InfinitePathCount {
                vertex: t.to_string(),
            });
        }
        for e in g.out_edges(&v) {
            stack.push(e.rng.clone());
        }
    }
    fn count(g: &Graph, v: &str, memo: &mut HashMap<String, u64>) -> Result<u64> {
        if let Some(&n) = memo.get(v) {
            return Ok(n);
        }
        let mut n: u64 = 1;
        for e in g.out_edges(v) {
            let sub = count(g, &e.rng, memo)?;
            n = n.checked_add(sub).ok_or(Error::PathCountOverflow {
                vertex: v.to_string(),
            })?;
        }
        memo.insert(v.to_string(), n);
        Ok(n)
    }
    count(g, t, &mut HashMap::new())
}

/// Enumerates paths starting at `t` in length-lexicographic order,
/// including the trivial path. With `max_len = None` the graph reachable
/// from `t` must be acyclic.
pub fn paths_from(g: &Graph, t: &str, max_len: Option<usize>) -> Result<Vec<Path>> {
    g.vindex(t)?;
    if max_len.is_none() {
        // Reuse the cycle-reachability guard.
        count_paths_from(g, t)?;
    }
    let mut out = Vec::new();
    let mut trail: Vec<String> = Vec::new();
    fn walk(
        g: &Graph,
        t: &str,
        at: &str,
        max_len: Option<usize>,
        trail: &mut Vec<String>,
        out: &mut Vec<Path>,
    ) {
        out.push(if trail.is_empty() {
            Path::Trivial(t.to_string())
        } else {
            Path::Edges(trail.clone())
        });
        if let Some(l) = max_len {
            if trail.len() >= l {
                return;
            }
        }
        for e in g.out_edges(at) {
            trail.push(e.id.clone());
            walk(g, t, &e.rng, max_len, trail, out);
            trail.pop();
        }
    }
    walk(g, t, t, max_len, &mut trail, &mut out);
    out.sort();
    Ok(out)
}

/// Length of the longest path in an acyclic graph.
pub fn longest_path_len(g: &Graph) -> Result<usize> {
    if !cycle_vertices(g).is_empty() {
        return Err(Error::CyclePresent);
    }
    fn depth(g: &Graph, v: &str, memo: &mut HashMap<String, usize>) -> usize {
        if let Some(&d) = memo.get(v) {
            return d;
        }
        let d = g
            .out_edges(v)
            .map(|e| 1 + depth(g, &e.rng, memo))
            .max()
            .unwrap_or(0);
        memo.insert(v.to_string(), d);
        d
    }
    let mut memo = HashMap::new();
    Ok(g.vertices()
        .iter()
        .map(|v| depth(g, v, &mut memo))
        .max()
        .unwrap_or(0))
}

/// Which of the two decomposition cases applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseFlag {
    /// The forest part touches every vertex.
    SameVertexSet,
    /// Some cycle vertices lie outside the forest part.
    ProperSubset,
}

/// Split of a no-entry graph into its cycles (`g1`) and the rest (`g2`).
///
/// `g2` keeps every edge not on a cycle together with its endpoints, plus
/// any vertex on no cycle at all, so `g1` and `g2` jointly cover the
/// graph. Shared vertices are exactly the cycle vertices that the forest
/// part touches; by the no-entry hypothesis they receive no `g2` edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub g1: Graph,
    pub g2: Graph,
    pub shared: Vec<String>,
    pub alphas: Vec<String>,
    pub betas: Vec<String>,
    pub case_flag: CaseFlag,
}

/// Computes the cycles/forest decomposition of a no-entry graph with at
/// least one cycle and at least one vertex or edge off the cycles.
pub fn decompose(g: &Graph) -> Result<Decomposition> {
    if let Some((witness, _)) = find_entry_host(g) {
        return Err(Error::EntryPresent { witness });
    }
    let cycles = find_cycles(g)?;
    if cycles.is_empty() {
        return Err(Error::TrivialDecomposition(
            "graph has no cycles".to_string(),
        ));
    }
    let cyc_vs: BTreeSet<String> = cycles
        .iter()
        .flat_map(|c| c.vertices().iter().cloned())
        .collect();
    let cyc_es: BTreeSet<String> = cycles
        .iter()
        .flat_map(|c| c.edges().iter().cloned())
        .collect();

    let g2_edges: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|e| !cyc_es.contains(&e.id))
        .cloned()
        .collect();
    let mut g2_vs: BTreeSet<String> = g
        .vertices()
        .iter()
        .filter(|v| !cyc_vs.contains(*v))
        .cloned()
        .collect();
    for e in &g2_edges {
        g2_vs.insert(e.src.clone());
        g2_vs.insert(e.rng.clone());
    }
    if g2_vs.is_empty() {
        return Err(Error::TrivialDecomposition(
            "every vertex and edge lies on a cycle".to_string(),
        ));
    }

    let g1 = Graph::new(
        cyc_vs.iter().cloned().collect(),
        g.edges()
            .iter()
            .filter(|e| cyc_es.contains(&e.id))
            .cloned()
            .collect(),
    )?;
    let g2 = Graph::new(g2_vs.iter().cloned().collect(), g2_edges)?;

    let shared: Vec<String> = cyc_vs.intersection(&g2_vs).cloned().collect();
    let alphas: Vec<String> = cyc_vs.difference(&g2_vs).cloned().collect();
    let betas: Vec<String> = g2_vs.difference(&cyc_vs).cloned().collect();
    let case_flag = if g2_vs.len() == g.vertex_count() {
        CaseFlag::SameVertexSet
    } else {
        CaseFlag::ProperSubset
    };

    debug_assert!(!betas.is_empty(), "forest part always has its own vertex");
    debug_assert!(shared.iter().all(|p| g2.in_degree(p) == 0));
    debug_assert_eq!(alphas.is_empty(), case_flag == CaseFlag::SameVertexSet);

    Ok(Decomposition {
        g1,
        g2,
        shared,
        alphas,
        betas,
        case_flag,
    })
}

type FullnessKey = (String, Vec<String>);

struct RelationDescriptors {
    proj: BTreeSet<String>,
    orth: BTreeSet<(String, String)>,
    iso: BTreeSet<(String, String)>,
    full: BTreeSet<FullnessKey>,
}

fn descriptors(g: &Graph) -> RelationDescriptors {
    let proj: BTreeSet<String> = g.vertices().iter().cloned().collect();
    let mut orth = BTreeSet::new();
    for (i, v) in g.vertices().iter().enumerate() {
        for w in &g.vertices()[i + 1..] {
            orth.insert((v.clone(), w.clone()));
        }
    }
    let iso: BTreeSet<(String, String)> = g
        .edges()
        .iter()
        .map(|e| (e.id.clone(), e.src.clone()))
        .collect();
    let mut full = BTreeSet::new();
    for v in g.vertices() {
        let mut ins: Vec<String> = g.in_edges(v).map(|e| e.id.clone()).collect();
        if !ins.is_empty() {
            ins.sort();
            full.insert((v.clone(), ins));
        }
    }
    RelationDescriptors {
        proj,
        orth,
        iso,
        full,
    }
}

/// Verifies that the defining relation instances of the whole graph are
/// the union of those of the two parts.
///
/// Relation descriptors: one projection instance per vertex, one
/// orthogonality instance per vertex pair, one isometry instance per edge,
/// and one fullness instance per regular vertex recording its full
/// incoming edge set. Orthogonality of a pair split across the parts is
/// not expressible inside either factor (it follows from unitality of the
/// factor embeddings), so those pairs are compared only against pairs
/// co-resident in a part. Fullness at a shared vertex must be carried
/// entirely by `g1`: every edge entering a shared vertex is a cycle edge.
pub fn relation_partition_check(g: &Graph, d: &Decomposition) -> bool {
    // Edge partition and vertex cover.
    let e1: BTreeSet<&str> = d.g1.edges().iter().map(|e| e.id.as_str()).collect();
    let e2: BTreeSet<&str> = d.g2.edges().iter().map(|e| e.id.as_str()).collect();
    let eg: BTreeSet<&str> = g.edges().iter().map(|e| e.id.as_str()).collect();
    if !e1.is_disjoint(&e2) || e1.union(&e2).cloned().collect::<BTreeSet<_>>() != eg {
        return false;
    }
    let v1: BTreeSet<&str> = d.g1.vertices().iter().map(|s| s.as_str()).collect();
    let v2: BTreeSet<&str> = d.g2.vertices().iter().map(|s| s.as_str()).collect();
    let vg: BTreeSet<&str> = g.vertices().iter().map(|s| s.as_str()).collect();
    if v1.union(&v2).cloned().collect::<BTreeSet<_>>() != vg {
        return false;
    }

    // Every edge entering a shared vertex belongs to g1.
    for p in v1.intersection(&v2) {
        for e in g.in_edges(p) {
            if !e1.contains(e.id.as_str()) {
                return false;
            }
        }
    }

    let dg = descriptors(g);
    let d1 = descriptors(&d.g1);
    let d2 = descriptors(&d.g2);

    let proj_union: BTreeSet<String> = d1.proj.union(&d2.proj).cloned().collect();
    if proj_union != dg.proj {
        return false;
    }
    let iso_union: BTreeSet<(String, String)> = d1.iso.union(&d2.iso).cloned().collect();
    if iso_union != dg.iso {
        return false;
    }
    let full_union: BTreeSet<FullnessKey> = d1.full.union(&d2.full).cloned().collect();
    if full_union != dg.full {
        return false;
    }
    let orth_union: BTreeSet<(String, String)> = d1.orth.union(&d2.orth).cloned().collect();
    let orth_coresident: BTreeSet<(String, String)> = dg
        .orth
        .iter()
        .filter(|(v, w)| {
            (v1.contains(v.as_str()) && v1.contains(w.as_str()))
                || (v2.contains(v.as_str()) && v2.contains(w.as_str()))
        })
        .cloned()
        .collect();
    orth_union == orth_coresident
}

/// Decomposition summary embedded in reports and certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub case: CaseFlag,
    pub shared: Vec<String>,
    pub alphas: Vec<String>,
    pub betas: Vec<String>,
    pub g1_edges: Vec<String>,
    pub g2_edges: Vec<String>,
    pub cycles: Vec<CycleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub base: String,
    pub edges: Vec<String>,
}

impl DecompositionSummary {
    pub fn new(d: &Decomposition) -> Result<DecompositionSummary> {
        let cycles = find_cycles(&d.g1)?
            .into_iter()
            .map(|c| CycleSummary {
                base: c.base().to_string(),
                edges: c.edges().to_vec(),
            })
            .collect();
        Ok(DecompositionSummary {
            case: d.case_flag,
            shared: d.shared.clone(),
            alphas: d.alphas.clone(),
            betas: d.betas.clone(),
            g1_edges: d.g1.edges().iter().map(|e| e.id.clone()).collect(),
            g2_edges: d.g2.edges().iter().map(|e| e.id.clone()).collect(),
            cycles,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loop_graph() -> Graph {
        Graph::from_json(r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","rng":"v"}]}"#).unwrap()
    }

    fn edge_graph() -> Graph {
        Graph::from_json(r#"{"vertices":["v","w"],"edges":[{"id":"e","src":"v","rng":"w"}]}"#)
            .unwrap()
    }

    fn entry_graph() -> Graph {
        // Two-cycle v1 <-> v2 plus an edge f: w -> v1.
        Graph::new(
            vec!["v1".into(), "v2".into(), "w".into()],
            vec![
                Edge::new("e1", "v1", "v2"),
                Edge::new("e2", "v2", "v1"),
                Edge::new("f", "w", "v1"),
            ],
        )
        .unwrap()
    }

    fn loop_with_rays() -> Graph {
        Graph::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                Edge::new("l", "a", "a"),
                Edge::new("t1", "a", "b"),
                Edge::new("t2", "a", "c"),
                Edge::new("t3", "a", "d"),
            ],
        )
        .unwrap()
    }

    fn hexagon_with_tails() -> Graph {
        Graph::new(
            (1..=9).map(|i| format!("P{i}")).collect(),
            vec![
                Edge::new("c1", "P1", "P2"),
                Edge::new("c2", "P2", "P3"),
                Edge::new("c3", "P3", "P4"),
                Edge::new("c4", "P4", "P5"),
                Edge::new("c5", "P5", "P9"),
                Edge::new("c6", "P9", "P1"),
                Edge::new("f1", "P4", "P6"),
                Edge::new("f2", "P3", "P6"),
                Edge::new("f3", "P3", "P7"),
                Edge::new("f4", "P3", "P8"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parse_rejects_bad_inputs() {
        assert!(matches!(
            Graph::from_json("not json"),
            Err(Error::MalformedJson(_))
        ));
        assert!(matches!(
            Graph::from_json(r#"{"vertices":[],"edges":[]}"#),
            Err(Error::EmptyGraph)
        ));
        assert!(matches!(
            Graph::from_json(r#"{"vertices":["v","v"],"edges":[]}"#),
            Err(Error::DuplicateId { .. })
        ));
        let dangling =
            Graph::from_json(r#"{"vertices":["v"],"edges":[{"id":"e","src":"x","rng":"v"}]}"#);
        assert!(matches!(dangling, Err(Error::DanglingEndpoint { .. })));
    }

    #[test]
    fn serializer_is_canonical() {
        let g = Graph::new(
            vec!["b".into(), "a".into()],
            vec![Edge::new("e2", "b", "a"), Edge::new("e1", "a", "b")],
        )
        .unwrap();
        let json = g.to_json();
        assert!(json.find("\"a\"").unwrap() < json.find("\"b\"").unwrap());
        let reparsed = Graph::from_json(&json).unwrap();
        assert_eq!(reparsed, g);
        assert_eq!(reparsed.to_json(), json);
    }

    #[test]
    fn sources_of_named_graphs() {
        assert_eq!(sources(&edge_graph()), vec!["v".to_string()]);
        assert!(sources(&loop_graph()).is_empty());
        assert!(sources(&hexagon_with_tails()).is_empty());
    }

    #[test]
    fn cycle_vertex_detection() {
        assert_eq!(
            cycle_vertices(&loop_graph()),
            BTreeSet::from(["v".to_string()])
        );
        assert!(cycle_vertices(&edge_graph()).is_empty());
        assert_eq!(
            cycle_vertices(&entry_graph()),
            BTreeSet::from(["v1".to_string(), "v2".to_string()])
        );
    }

    #[test]
    fn entry_detection() {
        assert!(no_cycle_has_entry(&loop_with_rays()).holds);
        assert!(no_cycle_has_entry(&edge_graph()).holds);
        let check = no_cycle_has_entry(&entry_graph());
        assert!(!check.holds);
        assert_eq!(check.witness.as_deref(), Some("f"));
    }

    #[test]
    fn find_cycles_on_loop_and_disjoint_pairs() {
        let cycles = find_cycles(&loop_graph()).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 1);
        assert_eq!(cycles[0].base(), "v");

        let two = Graph::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                Edge::new("e1", "a", "b"),
                Edge::new("e2", "b", "a"),
                Edge::new("e3", "c", "d"),
                Edge::new("e4", "d", "c"),
            ],
        )
        .unwrap();
        let cycles = find_cycles(&two).unwrap();
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles[0].base(), "a");
        assert_eq!(cycles[1].base(), "c");
        let vs0: BTreeSet<_> = cycles[0].vertices().iter().collect();
        let vs1: BTreeSet<_> = cycles[1].vertices().iter().collect();
        assert!(vs0.is_disjoint(&vs1));

        assert!(matches!(
            find_cycles(&entry_graph()),
            Err(Error::EntryPresent { .. })
        ));
    }

    #[test]
    fn path_counts() {
        let isolated = Graph::new(vec!["x".into()], vec![]).unwrap();
        assert_eq!(count_paths_from(&isolated, "x").unwrap(), 1);
        assert_eq!(count_paths_from(&edge_graph(), "v").unwrap(), 2);
        assert!(matches!(
            count_paths_from(&loop_graph(), "v"),
            Err(Error::InfinitePathCount { .. })
        ));
        // Forest part of the right-hand example graph, seen from P3.
        let d = decompose(&hexagon_with_tails()).unwrap();
        assert_eq!(count_paths_from(&d.g2, "P3").unwrap(), 4);
        assert_eq!(count_paths_from(&d.g2, "P4").unwrap(), 2);
    }

    #[test]
    fn decompose_loop_with_rays() {
        let d = decompose(&loop_with_rays()).unwrap();
        assert_eq!(d.g1.edge_count(), 1);
        assert_eq!(d.g2.edge_count(), 3);
        assert_eq!(d.shared, vec!["a".to_string()]);
        assert!(d.alphas.is_empty());
        assert_eq!(d.betas.len(), 3);
        assert_eq!(d.case_flag, CaseFlag::SameVertexSet);
        assert!(relation_partition_check(&loop_with_rays(), &d));
    }

    #[test]
    fn decompose_hexagon_with_tails() {
        let g = hexagon_with_tails();
        let d = decompose(&g).unwrap();
        assert_eq!(d.g1.edge_count(), 6);
        assert_eq!(d.g2.edge_count(), 4);
        assert_eq!(d.shared, vec!["P3".to_string(), "P4".to_string()]);
        assert_eq!(d.alphas.len(), 4);
        assert_eq!(d.betas, vec!["P6", "P7", "P8"]);
        assert_eq!(d.case_flag, CaseFlag::ProperSubset);
        assert!(relation_partition_check(&g, &d));
        assert_eq!(sources(&d.g2), vec!["P3".to_string(), "P4".to_string()]);
    }

    #[test]
    fn decompose_guards() {
        assert!(matches!(
            decompose(&loop_graph()),
            Err(Error::TrivialDecomposition(_))
        ));
        assert!(matches!(
            decompose(&edge_graph()),
            Err(Error::TrivialDecomposition(_))
        ));
        assert!(matches!(
            decompose(&entry_graph()),
            Err(Error::EntryPresent { .. })
        ));
    }

    #[test]
    fn wrong_partition_is_rejected() {
        // Move one cycle edge of the two-cycle into g2.
        let g = Graph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                Edge::new("e1", "a", "b"),
                Edge::new("e2", "b", "a"),
                Edge::new("f", "a", "c"),
            ],
        )
        .unwrap();
        let good = decompose(&g).unwrap();
        assert!(relation_partition_check(&g, &good));
        let bad = Decomposition {
            g1: Graph::new(vec!["a".into(), "b".into()], vec![Edge::new("e1", "a", "b")]).unwrap(),
            g2: Graph::new(
                vec!["a".into(), "b".into(), "c".into()],
                vec![Edge::new("e2", "b", "a"), Edge::new("f", "a", "c")],
            )
            .unwrap(),
            shared: vec!["a".into(), "b".into()],
            alphas: vec![],
            betas: vec!["c".into()],
            case_flag: CaseFlag::SameVertexSet,
        };
        assert!(!relation_partition_check(&g, &bad));
    }

    #[test]
    fn paths_enumeration_matches_count() {
        let d = decompose(&hexagon_with_tails()).unwrap();
        let ps = paths_from(&d.g2, "P3", None).unwrap();
        assert_eq!(ps.len(), 4);
        assert_eq!(ps[0], Path::Trivial("P3".into()));
        let all_len1: Vec<_> = ps[1..].iter().map(|p| p.len()).collect();
        assert_eq!(all_len1, vec![1, 1, 1]);
    }

    #[test]
    fn longest_path() {
        assert_eq!(longest_path_len(&edge_graph()).unwrap(), 1);
        assert!(matches!(
            longest_path_len(&loop_graph()),
            Err(Error::CyclePresent)
        ));
    }

    #[test]
    fn isolated_vertex_joins_forest_part() {
        let g = Graph::new(
            vec!["a".into(), "b".into(), "w".into()],
            vec![Edge::new("l", "a", "a"), Edge::new("t", "a", "b")],
        )
        .unwrap();
        let d = decompose(&g).unwrap();
        assert!(d.g2.has_vertex("w"));
        assert!(d.betas.contains(&"w".to_string()));
        assert!(relation_partition_check(&g, &d));
    }
}
