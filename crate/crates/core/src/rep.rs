//! Finite-dimensional matrix representations: the path-basis construction
//! for acyclic graphs, the twisted cycle representation, and the glued
//! construction for no-entry graphs, together with numeric verification
//! (defining-relation residuals, separation rank).
//!
//! Coordinate layout of the glued construction on dimension
//! `D = k + sum(N) - I`: slots `[0, k-I)` carry the forest paths that do
//! not sit at a shared vertex, `[k-I, k)` carry one rank-one slot per
//! shared vertex (grouped by cycle, traversal order), and `[k, D)` carry
//! the non-shared cycle vertices. The forest generators act on the first
//! `k` slots, each cycle acts on its shared and tail slots, and the two
//! actions agree on the shared slots.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IdKind, Result};
use crate::graph::{
    cycle_vertices, decompose, find_cycles, find_entry_host, paths_from, sources, Cycle,
    Decomposition, Graph, Path,
};
use crate::symbolic::{adjoint, basis_monomials, gen_edge, multiply, SymElement};

pub type CMatrix = DMatrix<Complex64>;

/// Construction exactness: synthesized representations satisfy the
/// defining relations within this bound.
pub const TOL_CK: f64 = 1e-12;
/// Agreement between a numeric representation and the symbolic normal
/// form.
pub const TOL_EVAL: f64 = 1e-9;
/// Relative singular-value threshold for numerical rank.
pub const TOL_RANK: f64 = 1e-8;
/// Factor-compatibility residual bound.
pub const TOL_COMPAT: f64 = 1e-15;

const UNIT_MODULUS_TOL: f64 = 1e-12;

/// An assignment of matrices to the generators of a graph algebra on a
/// common finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Rep {
    pub graph: Graph,
    pub dim: usize,
    pub vertex_mats: BTreeMap<String, CMatrix>,
    pub edge_mats: BTreeMap<String, CMatrix>,
    pub z_params: BTreeMap<String, Complex64>,
    pub basis_labels: Vec<String>,
}

pub fn czeros(dim: usize) -> CMatrix {
    DMatrix::zeros(dim, dim)
}

/// Largest singular value; zero matrices short-circuit the decomposition.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

fn check_unit_modulus(z: Complex64) -> Result<()> {
    let n = z.norm();
    if (n - 1.0).abs() > UNIT_MODULUS_TOL {
        return Err(Error::NotUnitModulus(n));
    }
    Ok(())
}

/// Generator images split by factor, produced by the glued construction.
/// `forest_unit` projects onto the non-shared forest slots (`1_{k-I}`),
/// `cycle_tail_unit` onto the non-shared cycle slots.
#[derive(Debug, Clone)]
pub(crate) struct GluedParts {
    pub dim: usize,
    pub cycle_vertex_mats: BTreeMap<String, CMatrix>,
    pub cycle_edge_mats: BTreeMap<String, CMatrix>,
    pub forest_vertex_mats: BTreeMap<String, CMatrix>,
    pub forest_edge_mats: BTreeMap<String, CMatrix>,
    pub forest_unit: CMatrix,
    pub cycle_tail_unit: CMatrix,
    pub labels: Vec<String>,
}

pub(crate) fn build_glued_parts(
    g: &Graph,
    cycles: &[Cycle],
    forest: Option<&Graph>,
    shared: &[String],
    z: &BTreeMap<String, Complex64>,
) -> Result<GluedParts> {
    for c in cycles {
        let zc = z.get(c.base()).ok_or_else(|| {
            Error::LayoutMismatch(format!("no z assigned to cycle based at {:?}", c.base()))
        })?;
        check_unit_modulus(*zc)?;
    }
    let shared_set: BTreeSet<&str> = shared.iter().map(|s| s.as_str()).collect();

    // Forest path basis, grouped by source in lexicographic order.
    let mut forest_paths: Vec<(Path, String)> = Vec::new(); // (path, range)
    if let Some(f) = forest {
        for t in sources(f) {
            for p in paths_from(f, &t, None)? {
                let r = p.range(f)?;
                forest_paths.push((p, r));
            }
        }
    }
    let k = forest_paths.len();
    let total_shared = shared.len();
    if total_shared > k {
        return Err(Error::LayoutMismatch(
            "more shared vertices than forest basis slots".into(),
        ));
    }

    let mut labels = vec![String::new(); k];

    // Shared slots sit at [k - I, k), grouped by cycle in traversal order.
    let mut shared_slot: BTreeMap<String, usize> = BTreeMap::new();
    let mut next = k - total_shared;
    for c in cycles {
        for v in c.vertices() {
            if shared_set.contains(v.as_str()) {
                shared_slot.insert(v.clone(), next);
                labels[next] = format!("shared:{v}");
                next += 1;
            }
        }
    }
    if shared_slot.len() != total_shared {
        return Err(Error::LayoutMismatch(
            "shared vertices must all lie on cycles".into(),
        ));
    }

    // Remaining forest paths fill [0, k - I) in basis order.
    let mut slot_of_path: HashMap<Path, usize> = HashMap::new();
    let mut nonshared_next = 0usize;
    for (p, _) in &forest_paths {
        let slot = match p {
            Path::Trivial(v) if shared_set.contains(v.as_str()) => {
                *shared_slot.get(v).expect("assigned above")
            }
            _ => {
                let s = nonshared_next;
                nonshared_next += 1;
                let t = p.source(forest.expect("paths imply a forest")).expect("valid");
                labels[s] = format!("path:{t}:{}", p.edge_ids().join("."));
                s
            }
        };
        slot_of_path.insert(p.clone(), slot);
    }
    if nonshared_next != k - total_shared {
        return Err(Error::LayoutMismatch(
            "each shared vertex must be a forest source with a trivial-path slot".into(),
        ));
    }

    // Tail slots for cycle vertices off the forest.
    let mut cycle_slots: Vec<BTreeMap<String, usize>> = Vec::new();
    let mut tail_next = k;
    for c in cycles {
        let mut m = BTreeMap::new();
        for v in c.vertices() {
            let slot = match shared_slot.get(v) {
                Some(&s) => s,
                None => {
                    let s = tail_next;
                    tail_next += 1;
                    labels.push(format!("cycle:{}:{v}", c.base()));
                    s
                }
            };
            m.insert(v.clone(), slot);
        }
        cycle_slots.push(m);
    }
    let dim = tail_next;
    debug_assert_eq!(labels.len(), dim);

    // Forest generator images.
    let mut forest_vertex_mats = BTreeMap::new();
    let mut forest_edge_mats = BTreeMap::new();
    if let Some(f) = forest {
        for w in f.vertices() {
            let mut m = czeros(dim);
            for (p, r) in &forest_paths {
                if r == w {
                    let s = slot_of_path[p];
                    m[(s, s)] = Complex64::new(1.0, 0.0);
                }
            }
            forest_vertex_mats.insert(w.clone(), m);
        }
        for e in f.edges() {
            let mut m = czeros(dim);
            let step = Path::from_edges(f, vec![e.id.clone()])?;
            for (p, r) in &forest_paths {
                if *r == e.src {
                    let extended = p.concat(&step, f)?;
                    m[(slot_of_path[&extended], slot_of_path[p])] = Complex64::new(1.0, 0.0);
                }
            }
            forest_edge_mats.insert(e.id.clone(), m);
        }
    }

    // Cycle generator images; the edge returning to the base carries z.
    let mut cycle_vertex_mats = BTreeMap::new();
    let mut cycle_edge_mats = BTreeMap::new();
    for (c, slots) in cycles.iter().zip(&cycle_slots) {
        let zc = z[c.base()];
        for v in c.vertices() {
            let mut m = czeros(dim);
            let s = slots[v];
            m[(s, s)] = Complex64::new(1.0, 0.0);
            cycle_vertex_mats.insert(v.clone(), m);
        }
        for id in c.edges() {
            let e = g.edge(id).ok_or_else(|| Error::UnknownId {
                kind: IdKind::Edge,
                id: id.clone(),
            })?;
            let mut m = czeros(dim);
            let val = if e.rng == c.base() {
                zc
            } else {
                Complex64::new(1.0, 0.0)
            };
            m[(slots[&e.rng], slots[&e.src])] = val;
            cycle_edge_mats.insert(id.clone(), m);
        }
    }

    let mut forest_unit = czeros(dim);
    for i in 0..k - total_shared {
        forest_unit[(i, i)] = Complex64::new(1.0, 0.0);
    }
    let mut cycle_tail_unit = czeros(dim);
    for i in k..dim {
        cycle_tail_unit[(i, i)] = Complex64::new(1.0, 0.0);
    }

    Ok(GluedParts {
        dim,
        cycle_vertex_mats,
        cycle_edge_mats,
        forest_vertex_mats,
        forest_edge_mats,
        forest_unit,
        cycle_tail_unit,
        labels,
    })
}

/// Block-diagonal path-basis representation of an acyclic graph, one block
/// of dimension `n(t)` per source `t`; each source maps to a rank-one
/// projection.
pub fn acyclic_rep(g: &Graph) -> Result<Rep> {
    if !cycle_vertices(g).is_empty() {
        return Err(Error::CyclePresent);
    }
    let parts = build_glued_parts(g, &[], Some(g), &[], &BTreeMap::new())?;
    Ok(Rep {
        graph: g.clone(),
        dim: parts.dim,
        vertex_mats: parts.forest_vertex_mats,
        edge_mats: parts.forest_edge_mats,
        z_params: BTreeMap::new(),
        basis_labels: parts.labels,
    })
}

/// The twisted representation of a single cycle on dimension `N`:
/// vertices map to diagonal matrix units in traversal order from the
/// base, each edge shifts one slot forward, and the edge returning to the
/// base carries the unit-modulus parameter `z`.
pub fn cycle_rep(g: &Graph, c: &Cycle, z: Complex64) -> Result<Rep> {
    check_unit_modulus(z)?;
    let sub_edges = c
        .edges()
        .iter()
        .map(|id| {
            g.edge(id).cloned().ok_or_else(|| Error::UnknownId {
                kind: IdKind::Edge,
                id: id.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sub = Graph::new(c.vertices().to_vec(), sub_edges)?;
    let mut zmap = BTreeMap::new();
    zmap.insert(c.base().to_string(), z);
    let parts = build_glued_parts(&sub, std::slice::from_ref(c), None, &[], &zmap)?;
    Ok(Rep {
        graph: sub,
        dim: parts.dim,
        vertex_mats: parts.cycle_vertex_mats,
        edge_mats: parts.cycle_edge_mats,
        z_params: zmap,
        basis_labels: parts.labels,
    })
}

/// The glued representation of a decomposed no-entry graph on dimension
/// `k + sum(N) - I`, with one unit-modulus parameter per cycle.
pub fn no_entry_rep(
    g: &Graph,
    d: &Decomposition,
    z_assign: &BTreeMap<String, Complex64>,
) -> Result<Rep> {
    if let Some((witness, _)) = find_entry_host(g) {
        return Err(Error::EntryPresent { witness });
    }
    let cycles = find_cycles(&d.g1)?;
    if cycles.is_empty() || d.g2.vertex_count() == 0 {
        return Err(Error::TrivialDecomposition(
            "glued construction needs both a cycle part and a forest part".into(),
        ));
    }
    let parts = build_glued_parts(g, &cycles, Some(&d.g2), &d.shared, z_assign)?;

    let mut vertex_mats = parts.forest_vertex_mats;
    for (v, m) in parts.cycle_vertex_mats {
        if let Some(existing) = vertex_mats.get(&v) {
            debug_assert_eq!(existing, &m, "shared vertex images must agree");
        }
        vertex_mats.insert(v, m);
    }
    let mut edge_mats = parts.forest_edge_mats;
    edge_mats.extend(parts.cycle_edge_mats);

    Ok(Rep {
        graph: g.clone(),
        dim: parts.dim,
        vertex_mats,
        edge_mats,
        z_params: z_assign.clone(),
        basis_labels: parts.labels,
    })
}

/// Block-diagonal sum of representations of the same graph.
pub fn rep_direct_sum(reps: &[Rep]) -> Result<Rep> {
    if reps.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if reps.len() == 1 {
        return Ok(reps[0].clone());
    }
    let g = &reps[0].graph;
    if reps.iter().any(|r| &r.graph != g) {
        return Err(Error::GraphMismatch);
    }
    let dim: usize = reps.iter().map(|r| r.dim).sum();
    let offsets: Vec<usize> = reps
        .iter()
        .scan(0usize, |acc, r| {
            let o = *acc;
            *acc += r.dim;
            Some(o)
        })
        .collect();
    let embed = |key_mats: &dyn Fn(&Rep) -> Option<CMatrix>| -> Option<CMatrix> {
        let mut m = czeros(dim);
        for (r, &off) in reps.iter().zip(&offsets) {
            let block = key_mats(r)?;
            for i in 0..r.dim {
                for j in 0..r.dim {
                    m[(off + i, off + j)] = block[(i, j)];
                }
            }
        }
        Some(m)
    };
    let mut vertex_mats = BTreeMap::new();
    for v in g.vertices() {
        let m = embed(&|r: &Rep| r.vertex_mats.get(v).cloned()).ok_or_else(|| {
            Error::UnknownId {
                kind: IdKind::Vertex,
                id: v.clone(),
            }
        })?;
        vertex_mats.insert(v.clone(), m);
    }
    let mut edge_mats = BTreeMap::new();
    for e in g.edges() {
        let m = embed(&|r: &Rep| r.edge_mats.get(&e.id).cloned()).ok_or_else(|| {
            Error::UnknownId {
                kind: IdKind::Edge,
                id: e.id.clone(),
            }
        })?;
        edge_mats.insert(e.id.clone(), m);
    }
    let mut labels = Vec::with_capacity(dim);
    for (i, r) in reps.iter().enumerate() {
        labels.extend(r.basis_labels.iter().map(|l| format!("m{i}:{l}")));
    }
    Ok(Rep {
        graph: g.clone(),
        dim,
        vertex_mats,
        edge_mats,
        z_params: BTreeMap::new(),
        basis_labels: labels,
    })
}

fn path_matrix(rep: &Rep, p: &Path) -> Result<CMatrix> {
    match p {
        Path::Trivial(v) => rep
            .vertex_mats
            .get(v)
            .cloned()
            .ok_or_else(|| Error::UnknownId {
                kind: IdKind::Vertex,
                id: v.clone(),
            }),
        Path::Edges(ids) => {
            // Operator order: the last edge of the path acts last.
            let mut acc: Option<CMatrix> = None;
            for id in ids.iter().rev() {
                let m = rep.edge_mats.get(id).ok_or_else(|| Error::UnknownId {
                    kind: IdKind::Edge,
                    id: id.clone(),
                })?;
                acc = Some(match acc {
                    None => m.clone(),
                    Some(a) => a * m,
                });
            }
            Ok(acc.expect("edge paths are nonempty"))
        }
    }
}

/// Applies the representation to a symbolic element.
pub fn evaluate(rep: &Rep, x: &SymElement) -> Result<CMatrix> {
    let mut out = czeros(rep.dim);
    for (m, c) in x.terms() {
        let mu = path_matrix(rep, &m.mu)?;
        let nu = path_matrix(rep, &m.nu)?;
        out += (mu * nu.adjoint()).scale_complex(c.to_complex());
    }
    Ok(out)
}

trait ScaleComplex {
    fn scale_complex(self, c: Complex64) -> Self;
}

impl ScaleComplex for CMatrix {
    fn scale_complex(mut self, c: Complex64) -> Self {
        for v in self.iter_mut() {
            *v *= c;
        }
        self
    }
}

/// Residuals of the defining relations for one representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CKReport {
    /// Relation label -> operator-norm deviation.
    pub residuals: BTreeMap<String, f64>,
    pub max_residual: f64,
    pub unitality_residual: f64,
    pub pass: bool,
    pub tolerance: f64,
}

/// Measures every defining relation of `rep.graph` in `rep`:
/// idempotent/self-adjoint vertex projections, pairwise orthogonality,
/// `s_e* s_e = p_{s(e)}`, fullness at every regular vertex, and
/// unitality of the projection sum.
pub fn check_ck(rep: &Rep) -> CKReport {
    check_ck_with_tol(rep, TOL_CK)
}

pub fn check_ck_with_tol(rep: &Rep, tolerance: f64) -> CKReport {
    let g = &rep.graph;
    let mut residuals = BTreeMap::new();
    let zero = czeros(rep.dim);
    let mut total = czeros(rep.dim);

    for v in g.vertices() {
        let p = rep.vertex_mats.get(v).unwrap_or(&zero);
        let idem = op_norm(&(p * p - p));
        let sa = op_norm(&(p.adjoint() - p));
        residuals.insert(format!("projection:{v}"), idem.max(sa));
        total += p;
    }
    for (i, v) in g.vertices().iter().enumerate() {
        for w in &g.vertices()[i + 1..] {
            let pv = rep.vertex_mats.get(v).unwrap_or(&zero);
            let pw = rep.vertex_mats.get(w).unwrap_or(&zero);
            residuals.insert(format!("orthogonality:{v},{w}"), op_norm(&(pv * pw)));
        }
    }
    for e in g.edges() {
        let s = rep.edge_mats.get(&e.id).unwrap_or(&zero);
        let p = rep.vertex_mats.get(&e.src).unwrap_or(&zero);
        residuals.insert(
            format!("isometry:{}", e.id),
            op_norm(&(s.adjoint() * s - p)),
        );
    }
    for v in g.vertices() {
        let ins: Vec<_> = g.in_edges(v).collect();
        if ins.is_empty() {
            continue;
        }
        let mut sum = czeros(rep.dim);
        for e in ins {
            let s = rep.edge_mats.get(&e.id).unwrap_or(&zero);
            sum += s * s.adjoint();
        }
        let p = rep.vertex_mats.get(v).unwrap_or(&zero);
        residuals.insert(format!("fullness:{v}"), op_norm(&(p - sum)));
    }

    let unitality_residual = op_norm(&(total - CMatrix::identity(rep.dim, rep.dim)));
    let max_residual = residuals.values().fold(0.0f64, |a, &b| a.max(b));
    CKReport {
        residuals,
        max_residual,
        unitality_residual,
        pass: max_residual <= tolerance && unitality_residual <= tolerance,
        tolerance,
    }
}

/// Separation rank of a representation family on the truncated monomial
/// span.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationReport {
    pub rank: usize,
    pub expected: usize,
    pub separated: bool,
    pub sigma_max: f64,
    pub threshold: f64,
    pub points: usize,
    pub trunc: usize,
}

/// Builds the standard family for a no-entry graph: a single path-basis
/// representation when the graph is acyclic, otherwise one glued (or pure
/// cycle-sum) member per evaluation point.
pub fn standard_family(g: &Graph, zs: &[Complex64]) -> Result<Vec<Rep>> {
    let cv = cycle_vertices(g);
    if cv.is_empty() {
        return Ok(vec![acyclic_rep(g)?]);
    }
    if let Some((witness, _)) = find_entry_host(g) {
        return Err(Error::EntryPresent { witness });
    }
    if zs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let cycles = find_cycles(g)?;
    let cycle_edge_total: usize = cycles.iter().map(|c| c.len()).sum();
    let all_cycles = cv.len() == g.vertex_count() && cycle_edge_total == g.edge_count();
    let mut family = Vec::with_capacity(zs.len());
    if all_cycles {
        for &z in zs {
            check_unit_modulus(z)?;
            let zmap: BTreeMap<String, Complex64> =
                cycles.iter().map(|c| (c.base().to_string(), z)).collect();
            let parts = build_glued_parts(g, &cycles, None, &[], &zmap)?;
            family.push(Rep {
                graph: g.clone(),
                dim: parts.dim,
                vertex_mats: parts.cycle_vertex_mats,
                edge_mats: parts.cycle_edge_mats,
                z_params: zmap,
                basis_labels: parts.labels,
            });
        }
    } else {
        let d = decompose(g)?;
        let cycles = find_cycles(&d.g1)?;
        for &z in zs {
            let zmap: BTreeMap<String, Complex64> =
                cycles.iter().map(|c| (c.base().to_string(), z)).collect();
            family.push(no_entry_rep(g, &d, &zmap)?);
        }
    }
    Ok(family)
}

/// Evaluates every truncated basis monomial across the family and
/// measures the numerical rank of the flattened images.
pub fn separation_check(
    g: &Graph,
    trunc: usize,
    zs: &[Complex64],
    tol_rank: f64,
) -> Result<SeparationReport> {
    let family = family_for_separation(g, trunc, zs)?;
    separation_check_with_family(g, trunc, &family, zs.len(), tol_rank)
}

fn family_for_separation(g: &Graph, trunc: usize, zs: &[Complex64]) -> Result<Vec<Rep>> {
    let mut distinct: Vec<Complex64> = Vec::new();
    for &z in zs {
        if !distinct.contains(&z) {
            distinct.push(z);
        }
    }
    let has_cycles = !cycle_vertices(g).is_empty();
    let need = if has_cycles { 2 * trunc + 1 } else { 1 };
    if distinct.len() < need {
        return Err(Error::TooFewPoints {
            got: distinct.len(),
            need,
        });
    }
    standard_family(g, &distinct)
}

/// Rank check against an already-built family (members in deterministic
/// order).
pub fn separation_check_with_family(
    g: &Graph,
    trunc: usize,
    family: &[Rep],
    points: usize,
    tol_rank: f64,
) -> Result<SeparationReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let basis = basis_monomials(g, trunc);
    let expected = basis.len();

    // Flatten each monomial's images into one row, keeping only columns
    // that some row touches; the images are sparse sums of matrix units.
    let mut rows: Vec<Vec<(usize, usize, usize, Complex64)>> = Vec::with_capacity(expected);
    let mut used: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for m in &basis {
        let mut x = SymElement::zero();
        x = x.add(
            &crate::symbolic::monomial_term(
                g,
                m.mu.clone(),
                m.nu.clone(),
                crate::symbolic::GaussRational::one(),
            )
            .expect("basis monomials are valid"),
        );
        let mut entries = Vec::new();
        for (fi, rep) in family.iter().enumerate() {
            let img = evaluate(rep, &x)?;
            for i in 0..rep.dim {
                for j in 0..rep.dim {
                    let v = img[(i, j)];
                    if v.re != 0.0 || v.im != 0.0 {
                        entries.push((fi, i, j, v));
                        used.insert((fi, i, j));
                    }
                }
            }
        }
        rows.push(entries);
    }

    let col_index: BTreeMap<(usize, usize, usize), usize> = used
        .iter()
        .enumerate()
        .map(|(idx, key)| (*key, idx))
        .collect();
    let cols = col_index.len().max(1);
    let mut a = DMatrix::<Complex64>::zeros(expected.max(1), cols);
    for (r, entries) in rows.iter().enumerate() {
        for (fi, i, j, v) in entries {
            a[(r, col_index[&(*fi, *i, *j)])] = *v;
        }
    }

    let svd = a.svd(false, false);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let threshold = tol_rank * sigma_max;
    let rank = if sigma_max == 0.0 {
        0
    } else {
        svd.singular_values.iter().filter(|&&s| s >= threshold).count()
    };

    Ok(SeparationReport {
        rank,
        expected,
        separated: rank == expected,
        sigma_max,
        threshold,
        points,
        trunc,
    })
}

/// Entry edges of a graph: edges whose range lies on a cycle avoiding
/// them.
pub fn entry_edges(g: &Graph) -> Vec<String> {
    let cv = cycle_vertices(g);
    let mut out = Vec::new();
    for e in g.edges() {
        if !cv.contains(&e.rng) {
            continue;
        }
        // Entry iff some cycle passes through r(e) without using e.
        let reduced = Graph::new(
            g.vertices().to_vec(),
            g.edges().iter().filter(|f| f.id != e.id).cloned().collect(),
        )
        .expect("removing an edge keeps the graph valid");
        if crate::graph::least_cycle_through(&reduced, &e.rng).is_some() {
            out.push(e.id.clone());
        }
    }
    out
}

/// Traces of `rep(f f*)` over all entry edges `f`; exactly relation-
/// satisfying representations force every value to zero.
pub fn entry_vanishing_audit(rep: &Rep) -> Result<BTreeMap<String, f64>> {
    let g = &rep.graph;
    let entries = entry_edges(g);
    if entries.is_empty() {
        return Err(Error::NoEntries);
    }
    let mut out = BTreeMap::new();
    for f in entries {
        let sf = gen_edge(g, &f)?;
        let ff = multiply(g, &sf, &adjoint(&sf));
        let tr = evaluate(rep, &ff)?.trace();
        out.insert(f, tr.norm());
    }
    Ok(out)
}

/// Serialized matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixDto {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixDto {
    pub fn from_matrix(m: &CMatrix) -> MatrixDto {
        let entries = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        MatrixDto {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows
            || self.entries.iter().any(|row| row.len() != self.cols)
        {
            return Err(Error::MalformedCertificate(
                "matrix entry shape does not match declared dimensions".into(),
            ));
        }
        let mut m = DMatrix::<Complex64>::zeros(self.rows, self.cols);
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::MalformedCertificate(
                        "matrix entries must be finite".into(),
                    ));
                }
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(m)
    }
}

/// Serialized representation (the ambient graph travels separately).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RepDto {
    pub dim: usize,
    pub vertex_mats: BTreeMap<String, MatrixDto>,
    pub edge_mats: BTreeMap<String, MatrixDto>,
    pub z_params: BTreeMap<String, [f64; 2]>,
    pub basis_labels: Vec<String>,
}

impl RepDto {
    pub fn from_rep(rep: &Rep) -> RepDto {
        RepDto {
            dim: rep.dim,
            vertex_mats: rep
                .vertex_mats
                .iter()
                .map(|(k, m)| (k.clone(), MatrixDto::from_matrix(m)))
                .collect(),
            edge_mats: rep
                .edge_mats
                .iter()
                .map(|(k, m)| (k.clone(), MatrixDto::from_matrix(m)))
                .collect(),
            z_params: rep
                .z_params
                .iter()
                .map(|(k, z)| (k.clone(), [z.re, z.im]))
                .collect(),
            basis_labels: rep.basis_labels.clone(),
        }
    }

    pub fn to_rep(&self, g: &Graph) -> Result<Rep> {
        let conv = |mats: &BTreeMap<String, MatrixDto>| -> Result<BTreeMap<String, CMatrix>> {
            mats.iter()
                .map(|(k, dto)| {
                    let m = dto.to_matrix()?;
                    if m.nrows() != self.dim || m.ncols() != self.dim {
                        return Err(Error::MalformedCertificate(format!(
                            "matrix for {k:?} is not {0}x{0}",
                            self.dim
                        )));
                    }
                    Ok((k.clone(), m))
                })
                .collect()
        };
        Ok(Rep {
            graph: g.clone(),
            dim: self.dim,
            vertex_mats: conv(&self.vertex_mats)?,
            edge_mats: conv(&self.edge_mats)?,
            z_params: self
                .z_params
                .iter()
                .map(|(k, &[re, im])| (k.clone(), Complex64::new(re, im)))
                .collect(),
            basis_labels: self.basis_labels.clone(),
        })
    }
}
