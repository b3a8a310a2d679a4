//! Shared fixtures, brute-force oracles, and random graph generators for
//! the integration suites. The oracles deliberately avoid the library's
//! production code paths: cycle enumeration is a plain depth-first
//! search, path counting is explicit enumeration.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;

use rfdkit::graph::{Edge, Graph};

pub fn loop_graph() -> Graph {
    Graph::new(vec!["v".into()], vec![Edge::new("e", "v", "v")]).unwrap()
}

pub fn edge_graph() -> Graph {
    Graph::new(
        vec!["v".into(), "w".into()],
        vec![Edge::new("e", "v", "w")],
    )
    .unwrap()
}

pub fn entry_graph() -> Graph {
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

pub fn loop_with_rays() -> Graph {
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

pub fn hexagon_with_tails() -> Graph {
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

pub fn two_disjoint_two_cycles() -> Graph {
    Graph::new(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec![
            Edge::new("e1", "a", "b"),
            Edge::new("e2", "b", "a"),
            Edge::new("e3", "c", "d"),
            Edge::new("e4", "d", "c"),
        ],
    )
    .unwrap()
}

pub fn n_cycle(n: usize) -> Graph {
    let vertices: Vec<String> = (0..n).map(|i| format!("x{i:02}")).collect();
    let edges: Vec<Edge> = (0..n)
        .map(|i| {
            Edge::new(
                format!("e{i:02}"),
                vertices[i].clone(),
                vertices[(i + 1) % n].clone(),
            )
        })
        .collect();
    Graph::new(vertices, edges).unwrap()
}

pub fn roots(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64))
        .collect()
}

/// Every vertex-simple cycle, each reported once as the edge sequence
/// starting from its lexicographically least vertex.
pub fn oracle_simple_cycles(g: &Graph) -> Vec<Vec<String>> {
    fn dfs(
        g: &Graph,
        base: &str,
        at: &str,
        visited: &mut BTreeSet<String>,
        trail: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
    ) {
        for e in g.out_edges(at) {
            if e.rng == base {
                let mut cycle = trail.clone();
                cycle.push(e.id.clone());
                out.push(cycle);
            } else if e.rng.as_str() > base && !visited.contains(&e.rng) {
                visited.insert(e.rng.clone());
                trail.push(e.id.clone());
                dfs(g, base, &e.rng, visited, trail, out);
                trail.pop();
                visited.remove(&e.rng);
            }
        }
    }
    let mut out = Vec::new();
    for base in g.vertices() {
        let mut visited = BTreeSet::new();
        let mut trail = Vec::new();
        dfs(g, base, base, &mut visited, &mut trail, &mut out);
    }
    out
}

/// Brute-force verdict: flags any edge outside a cycle whose range lies
/// on it.
pub fn oracle_no_cycle_has_entry(g: &Graph) -> bool {
    for cycle in oracle_simple_cycles(g) {
        let edge_set: BTreeSet<&str> = cycle.iter().map(|s| s.as_str()).collect();
        let vertex_set: BTreeSet<String> = cycle
            .iter()
            .map(|id| g.edge(id).unwrap().src.clone())
            .collect();
        for e in g.edges() {
            if !edge_set.contains(e.id.as_str()) && vertex_set.contains(&e.rng) {
                return false;
            }
        }
    }
    true
}

/// Explicit enumeration of all paths from `t`, including the trivial one.
/// Only meaningful when no cycle is reachable from `t`.
pub fn oracle_count_paths(g: &Graph, t: &str) -> usize {
    fn walk(g: &Graph, at: &str, depth: usize) -> usize {
        assert!(depth <= g.edge_count() + 1, "cycle reachable from start");
        1 + g
            .out_edges(at)
            .map(|e| walk(g, &e.rng, depth + 1))
            .sum::<usize>()
    }
    walk(g, t, 0)
}

/// Arbitrary digraph: loops and parallel edges allowed, entries likely.
pub fn random_digraph(rng: &mut StdRng, max_v: usize, max_e: usize) -> Graph {
    let nv = rng.gen_range(1..=max_v);
    let vertices: Vec<String> = (0..nv).map(|i| format!("v{i:02}")).collect();
    let ne = rng.gen_range(0..=max_e);
    let edges: Vec<Edge> = (0..ne)
        .map(|i| {
            Edge::new(
                format!("e{i:02}"),
                vertices[rng.gen_range(0..nv)].clone(),
                vertices[rng.gen_range(0..nv)].clone(),
            )
        })
        .collect();
    Graph::new(vertices, edges).unwrap()
}

/// No-entry graph built by construction: disjoint cycles plus a forest
/// that edges may leave toward but never enter. Path counts are kept
/// small enough for dense linear algebra.
pub fn random_no_entry_graph(rng: &mut StdRng, max_cycles: usize, max_extra: usize) -> Graph {
    loop {
        let mut vertices: Vec<String> = Vec::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cycle_vertices: Vec<String> = Vec::new();

        let n_cycles = rng.gen_range(0..=max_cycles);
        for c in 0..n_cycles {
            let len = rng.gen_range(1..=4);
            let vs: Vec<String> = (0..len).map(|i| format!("c{c}v{i}")).collect();
            for i in 0..len {
                edges.push(Edge::new(
                    format!("c{c}e{i}"),
                    vs[i].clone(),
                    vs[(i + 1) % len].clone(),
                ));
            }
            cycle_vertices.extend(vs.iter().cloned());
            vertices.extend(vs);
        }

        let n_extra = rng.gen_range(if n_cycles == 0 { 1 } else { 0 }..=max_extra);
        let extras: Vec<String> = (0..n_extra).map(|i| format!("w{i:02}")).collect();
        vertices.extend(extras.iter().cloned());

        // Forest edges go from anywhere into strictly later extra
        // vertices, so no cycle ever gains an incoming edge.
        let mut eid = 0usize;
        for (j, target) in extras.iter().enumerate() {
            let n_in = rng.gen_range(0..=2);
            for _ in 0..n_in {
                let from_pool: Vec<&String> = cycle_vertices
                    .iter()
                    .chain(extras[..j].iter())
                    .collect();
                if from_pool.is_empty() {
                    continue;
                }
                let src = from_pool[rng.gen_range(0..from_pool.len())].clone();
                edges.push(Edge::new(format!("f{eid:02}"), src, target.clone()));
                eid += 1;
            }
        }

        if vertices.is_empty() {
            continue;
        }
        let g = Graph::new(vertices, edges).unwrap();
        // Resample when some forest block would get large.
        let bounded = g.vertices().iter().all(|v| {
            rfdkit::graph::count_paths_from(&g, v)
                .map(|n| n <= 48)
                .unwrap_or(true)
        });
        if bounded {
            return g;
        }
    }
}

/// Random acyclic graph (edges respect the vertex order), parallel edges
/// allowed.
pub fn random_acyclic_graph(rng: &mut StdRng, max_v: usize, max_e: usize) -> Graph {
    loop {
        let nv = rng.gen_range(1..=max_v);
        let vertices: Vec<String> = (0..nv).map(|i| format!("v{i:02}")).collect();
        let ne = if nv == 1 { 0 } else { rng.gen_range(0..=max_e) };
        let edges: Vec<Edge> = (0..ne)
            .map(|i| {
                let a = rng.gen_range(0..nv.saturating_sub(1));
                let b = rng.gen_range(a + 1..nv);
                Edge::new(format!("e{i:02}"), vertices[a].clone(), vertices[b].clone())
            })
            .collect();
        let g = Graph::new(vertices, edges).unwrap();
        let bounded = g
            .vertices()
            .iter()
            .all(|v| rfdkit::graph::count_paths_from(&g, v).map(|n| n <= 64).unwrap_or(false));
        if bounded {
            return g;
        }
    }
}

fn random_walk(rng: &mut StdRng, g: &Graph, from: &str, max_len: usize) -> rfdkit::graph::Path {
    use rfdkit::graph::Path;
    let mut at = from.to_string();
    let mut ids = Vec::new();
    let len = rng.gen_range(0..=max_len);
    for _ in 0..len {
        let outs: Vec<_> = g.out_edges(&at).collect();
        if outs.is_empty() {
            break;
        }
        let e = outs[rng.gen_range(0..outs.len())];
        ids.push(e.id.clone());
        at = e.rng.clone();
    }
    if ids.is_empty() {
        Path::trivial(from)
    } else {
        Path::Edges(ids)
    }
}

/// Random exact element with short paths and small coefficients.
pub fn random_element(rng: &mut StdRng, g: &Graph) -> rfdkit::symbolic::SymElement {
    use rfdkit::symbolic::{monomial_term, GaussRational, SymElement};

    let mut x = SymElement::zero();
    let n_terms = rng.gen_range(1..=4);
    for _ in 0..n_terms {
        let v = g.vertices()[rng.gen_range(0..g.vertex_count())].clone();
        let mu = random_walk(rng, g, &v, 2);
        let nu = random_walk(rng, g, &v, 2);
        let coeff = GaussRational::new(
            num_rational::BigRational::new(
                num_bigint::BigInt::from(rng.gen_range(-3i64..=3)),
                num_bigint::BigInt::from(rng.gen_range(1i64..=3)),
            ),
            num_rational::BigRational::new(
                num_bigint::BigInt::from(rng.gen_range(-3i64..=3)),
                num_bigint::BigInt::from(rng.gen_range(1i64..=3)),
            ),
        );
        x = x.add(&monomial_term(g, mu, nu, coeff).unwrap());
    }
    x
}
