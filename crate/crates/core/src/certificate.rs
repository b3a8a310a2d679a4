//! End-to-end decision procedure and certificate handling.
//!
//! `decide_rfd` classifies a graph: when some cycle has an entry it emits
//! an exact symbolic obstruction (a trace identity that forces the entry
//! term to vanish in any finite-dimensional representation), otherwise it
//! synthesizes a separating family of representations over roots of unity
//! and records every numeric check. Certificates are deterministic byte
//! for byte, and `verify_certificate` replays all embedded checks against
//! the graph.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amalgam::{amalgam_data, build_factor_reps, check_compatibility, AmalgamSpec};
use crate::error::{Error, Result};
use crate::graph::{
    count_paths_from, cycle_vertices, decompose, find_cycles, find_entry_host, sources, Cycle,
    CycleSummary, DecompositionSummary, Graph, Path,
};
use crate::rep::{
    check_ck_with_tol, separation_check_with_family, standard_family, Rep, RepDto,
    SeparationReport, TOL_CK, TOL_COMPAT, TOL_EVAL, TOL_RANK,
};
use crate::symbolic::{
    adjoint, element_from_terms, element_to_terms, gen_edge, is_zero, multiply, normal_form,
    SymElement, TermDto,
};

pub use crate::rep::entry_vanishing_audit as audit_entries;

/// The `m` distinct evaluation points `exp(2*pi*i*j/m)`.
pub fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_ck: f64,
    pub tol_rank: f64,
    pub tol_eval: f64,
    pub tol_compat: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_ck: TOL_CK,
            tol_rank: TOL_RANK,
            tol_eval: TOL_EVAL,
            tol_compat: TOL_COMPAT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub trunc: usize,
    pub zcount: usize,
    /// Absent on obstruction certificates, which are exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "RFD")]
    Rfd,
    #[serde(rename = "NotRFD")]
    NotRfd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionKind {
    /// Path-basis representation; no cycles, no twist parameters.
    Acyclic,
    /// Direct sums of twisted cycle representations.
    Cycles,
    /// Glued forest/cycle construction.
    Glued,
}

/// `dim = k + cycle_total - shared` for the glued construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimBreakdown {
    pub k: usize,
    pub cycle_total: usize,
    pub shared: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberResiduals {
    pub max_residual: f64,
    pub unitality_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CkSummary {
    pub per_member: Vec<MemberResiduals>,
    pub max_residual: f64,
    pub max_unitality_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reports {
    pub ck: CkSummary,
    pub separation: SeparationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compatibility: Option<crate::amalgam::CompatibilityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessInfo {
    pub entry_edge: String,
    pub host_cycle: CycleSummary,
    /// Every edge entering the host cycle from outside it.
    pub entries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    /// The telescoped relation sum over the host cycle minus the entry
    /// term; exact coefficients, reduces to zero.
    pub identity: Vec<TermDto>,
    pub identity_is_zero: bool,
    /// The entry term alone; nonzero in normal form.
    pub entry_term: Vec<TermDto>,
    pub entry_term_nonzero: bool,
}

/// Self-describing decision certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub toolkit_version: String,
    pub graph_digest: String,
    pub verdict: Verdict,
    pub params: Params,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<DimBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zs: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amalgam: Option<AmalgamSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<RepDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reports: Option<Reports>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Obstruction>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text).map_err(|e| Error::MalformedCertificate(e.to_string()))
    }
}

/// The synthesized family plus its separation report.
#[derive(Debug, Clone)]
pub struct SeparatingFamily {
    pub construction: ConstructionKind,
    pub zs: Vec<Complex64>,
    pub reps: Vec<Rep>,
    pub separation: SeparationReport,
}

/// Builds the family for a no-entry graph at `m` roots of unity and runs
/// the separation rank check at truncation `trunc`.
pub fn build_separating_family(
    g: &Graph,
    trunc: usize,
    m: usize,
    tol_rank: f64,
) -> Result<SeparatingFamily> {
    if m < 2 * trunc + 1 {
        return Err(Error::TooFewPoints {
            got: m,
            need: 2 * trunc + 1,
        });
    }
    if let Some((witness, _)) = find_entry_host(g) {
        return Err(Error::EntryPresent { witness });
    }
    let has_cycles = !cycle_vertices(g).is_empty();
    let (construction, zs) = if !has_cycles {
        (ConstructionKind::Acyclic, Vec::new())
    } else {
        let cycles = find_cycles(g)?;
        let cycle_edges: usize = cycles.iter().map(|c| c.len()).sum();
        let kind = if cycle_vertices(g).len() == g.vertex_count() && cycle_edges == g.edge_count()
        {
            ConstructionKind::Cycles
        } else {
            ConstructionKind::Glued
        };
        (kind, roots_of_unity(m))
    };
    let reps = standard_family(g, &zs)?;
    let separation =
        separation_check_with_family(g, trunc, &reps, zs.len().max(1), tol_rank)?;
    Ok(SeparatingFamily {
        construction,
        zs,
        reps,
        separation,
    })
}

fn cycle_relation_sum(g: &Graph, host: &Cycle) -> Result<(SymElement, SymElement, Vec<String>)> {
    // Sum over host edges of s_e* s_e - s_e s_e*, minus the entry term.
    let mut acc = SymElement::zero();
    for id in host.edges() {
        let se = gen_edge(g, id)?;
        acc = acc.add(&multiply(g, &adjoint(&se), &se));
        acc = acc.sub(&multiply(g, &se, &adjoint(&se)));
    }
    let mut entries: Vec<String> = g
        .edges()
        .iter()
        .filter(|e| host.contains_vertex(&e.rng) && !host.contains_edge(&e.id))
        .map(|e| e.id.clone())
        .collect();
    entries.sort();
    let mut entry_term = SymElement::zero();
    for f in &entries {
        let sf = gen_edge(g, f)?;
        entry_term = entry_term.add(&multiply(g, &sf, &adjoint(&sf)));
    }
    Ok((acc.sub(&entry_term), entry_term, entries))
}

fn not_rfd_certificate(
    g: &Graph,
    trunc: usize,
    zcount: usize,
    witness: String,
    host: Cycle,
) -> Result<Certificate> {
    let (identity, entry_term, entries) = cycle_relation_sum(g, &host)?;
    let identity_is_zero = is_zero(g, &identity);
    let entry_term_nonzero = !normal_form(g, &entry_term).is_empty();
    Ok(Certificate {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        graph_digest: g.digest(),
        verdict: Verdict::NotRfd,
        params: Params {
            trunc,
            zcount,
            tolerances: None,
        },
        metadata: BTreeMap::new(),
        construction: None,
        dims: None,
        zs: None,
        decomposition: None,
        amalgam: None,
        family: None,
        reports: None,
        witness: Some(WitnessInfo {
            entry_edge: witness,
            host_cycle: CycleSummary {
                base: host.base().to_string(),
                edges: host.edges().to_vec(),
            },
            entries,
        }),
        obstruction: Some(Obstruction {
            identity: element_to_terms(&identity),
            identity_is_zero,
            entry_term: element_to_terms(&entry_term),
            entry_term_nonzero,
        }),
    })
}

/// Decides the no-entry criterion and builds the corresponding
/// certificate with default tolerances.
pub fn decide_rfd(g: &Graph, trunc: usize, zcount: usize) -> Result<Certificate> {
    decide_rfd_with(g, trunc, zcount, Tolerances::default())
}

pub fn decide_rfd_with(
    g: &Graph,
    trunc: usize,
    zcount: usize,
    tol: Tolerances,
) -> Result<Certificate> {
    if zcount < 2 * trunc + 1 {
        return Err(Error::TooFewPoints {
            got: zcount,
            need: 2 * trunc + 1,
        });
    }
    if let Some((witness, host)) = find_entry_host(g) {
        return not_rfd_certificate(g, trunc, zcount, witness, host);
    }

    let fam = build_separating_family(g, trunc, zcount, tol.tol_rank)?;
    let per_member: Vec<MemberResiduals> = fam
        .reps
        .iter()
        .map(|r| {
            let ck = check_ck_with_tol(r, tol.tol_ck);
            MemberResiduals {
                max_residual: ck.max_residual,
                unitality_residual: ck.unitality_residual,
            }
        })
        .collect();
    let max_residual = per_member.iter().fold(0.0f64, |a, m| a.max(m.max_residual));
    let max_unitality = per_member
        .iter()
        .fold(0.0f64, |a, m| a.max(m.unitality_residual));
    let ck = CkSummary {
        per_member,
        max_residual,
        max_unitality_residual: max_unitality,
        pass: max_residual <= tol.tol_ck && max_unitality <= tol.tol_ck,
    };

    let dim = fam.reps[0].dim;
    let mut metadata = BTreeMap::new();
    let (dims, decomposition, amalgam, compatibility) = match fam.construction {
        ConstructionKind::Acyclic => (
            DimBreakdown {
                k: dim,
                cycle_total: 0,
                shared: 0,
                dim,
            },
            None,
            None,
            None,
        ),
        ConstructionKind::Cycles => (
            DimBreakdown {
                k: 0,
                cycle_total: dim,
                shared: 0,
                dim,
            },
            None,
            None,
            None,
        ),
        ConstructionKind::Glued => {
            let d = decompose(g)?;
            let mut k = 0usize;
            for t in sources(&d.g2) {
                k += count_paths_from(&d.g2, &t)? as usize;
            }
            let cycle_total: usize = find_cycles(&d.g1)?.iter().map(|c| c.len()).sum();
            let shared = d.shared.len();
            metadata.insert(
                "path_count_convention".to_string(),
                "k sums n(t) over the sources of the forest part; shared vertices count as \
                 forest sources even though they receive cycle edges in the whole graph"
                    .to_string(),
            );
            let spec = amalgam_data(g, &d)?;
            let factors = fam
                .zs
                .iter()
                .map(|&z| build_factor_reps(g, &d, z))
                .collect::<Result<Vec<_>>>()?;
            let compat = check_compatibility(&spec, &factors)?;
            (
                DimBreakdown {
                    k,
                    cycle_total,
                    shared,
                    dim,
                },
                Some(DecompositionSummary::new(&d)?),
                Some(spec),
                Some(compat),
            )
        }
    };

    Ok(Certificate {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        graph_digest: g.digest(),
        verdict: Verdict::Rfd,
        params: Params {
            trunc,
            zcount,
            tolerances: Some(tol),
        },
        metadata,
        construction: Some(fam.construction),
        dims: Some(dims),
        zs: if fam.zs.is_empty() {
            None
        } else {
            Some(fam.zs.iter().map(|z| [z.re, z.im]).collect())
        },
        decomposition,
        amalgam,
        family: Some(fam.reps.iter().map(RepDto::from_rep).collect()),
        reports: Some(Reports {
            ck,
            separation: fam.separation,
            compatibility,
        }),
        witness: None,
        obstruction: None,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub digest_mismatch: bool,
    pub checks: Vec<CheckResult>,
}

fn push_check(checks: &mut Vec<CheckResult>, name: &str, pass: bool, detail: String) {
    checks.push(CheckResult {
        name: name.to_string(),
        pass,
        detail,
    });
}

/// Replays every check a certificate embeds: the graph digest, byte
/// reproducibility against a fresh run with the same parameters, the
/// exact obstruction identity for negative verdicts, and the relation,
/// separation, and compatibility reports for positive ones.
pub fn verify_certificate(g: &Graph, cert: &Certificate) -> VerifyReport {
    let mut checks = Vec::new();

    let actual = g.digest();
    let digest_ok = actual == cert.graph_digest;
    push_check(
        &mut checks,
        "digest",
        digest_ok,
        if digest_ok {
            "graph digest matches".to_string()
        } else {
            format!("certificate is for {}, graph is {}", cert.graph_digest, actual)
        },
    );
    if !digest_ok {
        return VerifyReport {
            pass: false,
            digest_mismatch: true,
            checks,
        };
    }

    let tol = cert.params.tolerances.unwrap_or_default();
    match decide_rfd_with(g, cert.params.trunc, cert.params.zcount, tol) {
        Ok(fresh) => {
            let same = fresh.to_json() == cert.to_json();
            push_check(
                &mut checks,
                "reproducibility",
                same,
                if same {
                    "certificate reproduces byte for byte".to_string()
                } else {
                    "stored certificate differs from a fresh run".to_string()
                },
            );
        }
        Err(e) => push_check(
            &mut checks,
            "reproducibility",
            false,
            format!("regeneration failed: {e}"),
        ),
    }

    match cert.verdict {
        Verdict::NotRfd => verify_obstruction(g, cert, &mut checks),
        Verdict::Rfd => verify_family(g, cert, tol, &mut checks),
    }

    VerifyReport {
        pass: checks.iter().all(|c| c.pass),
        digest_mismatch: false,
        checks,
    }
}

fn verify_obstruction(g: &Graph, cert: &Certificate, checks: &mut Vec<CheckResult>) {
    let Some(ob) = &cert.obstruction else {
        push_check(checks, "obstruction", false, "section missing".into());
        return;
    };
    match element_from_terms(g, &ob.identity) {
        Ok(identity) => {
            let zero = is_zero(g, &identity);
            push_check(
                checks,
                "obstruction_identity",
                zero,
                format!("normal form has {} terms", normal_form(g, &identity).num_terms()),
            );
        }
        Err(e) => push_check(checks, "obstruction_identity", false, e.to_string()),
    }
    match element_from_terms(g, &ob.entry_term) {
        Ok(term) => {
            let nf = normal_form(g, &term);
            push_check(
                checks,
                "entry_term",
                !nf.is_empty(),
                format!("normal form has {} terms", nf.num_terms()),
            );
        }
        Err(e) => push_check(checks, "entry_term", false, e.to_string()),
    }
    match &cert.witness {
        Some(w) => {
            let ok = match (
                g.edge(&w.entry_edge),
                Path::from_edges(g, w.host_cycle.edges.clone()),
            ) {
                (Some(e), Ok(p)) => {
                    let on_cycle = p
                        .edge_ids()
                        .iter()
                        .any(|id| g.edge(id).map(|c| c.src == e.rng || c.rng == e.rng) == Some(true));
                    !w.host_cycle.edges.contains(&w.entry_edge)
                        && on_cycle
                        && p.source(g).ok() == p.range(g).ok()
                }
                _ => false,
            };
            push_check(checks, "witness", ok, format!("entry edge {:?}", w.entry_edge));
        }
        None => push_check(checks, "witness", false, "section missing".into()),
    }
}

fn verify_family(g: &Graph, cert: &Certificate, tol: Tolerances, checks: &mut Vec<CheckResult>) {
    let Some(family_dto) = &cert.family else {
        push_check(checks, "family", false, "section missing".into());
        return;
    };
    let family: Vec<Rep> = match family_dto.iter().map(|d| d.to_rep(g)).collect() {
        Ok(f) => f,
        Err(e) => {
            push_check(checks, "family", false, e.to_string());
            return;
        }
    };

    let mut max_res = 0.0f64;
    let mut max_unit = 0.0f64;
    for rep in &family {
        let ck = check_ck_with_tol(rep, tol.tol_ck);
        max_res = max_res.max(ck.max_residual);
        max_unit = max_unit.max(ck.unitality_residual);
    }
    let ck_ok = max_res <= tol.tol_ck && max_unit <= tol.tol_ck;
    push_check(
        checks,
        "ck",
        ck_ok,
        format!("max residual {max_res:.3e}, unitality {max_unit:.3e}"),
    );

    let points = cert.zs.as_ref().map(|z| z.len()).unwrap_or(1);
    match separation_check_with_family(g, cert.params.trunc, &family, points, tol.tol_rank) {
        Ok(sep) => {
            let reported = cert.reports.as_ref().map(|r| &r.separation);
            let consistent = reported
                .map(|r| r.rank == sep.rank && r.separated == sep.separated)
                .unwrap_or(false);
            push_check(
                checks,
                "separation",
                sep.separated && consistent,
                format!("rank {} of {}", sep.rank, sep.expected),
            );
        }
        Err(e) => push_check(checks, "separation", false, e.to_string()),
    }

    if let Some(spec) = &cert.amalgam {
        let result = (|| -> Result<f64> {
            let d = decompose(g)?;
            let zs: Vec<Complex64> = cert
                .zs
                .as_ref()
                .map(|v| v.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .unwrap_or_default();
            let factors = zs
                .iter()
                .map(|&z| build_factor_reps(g, &d, z))
                .collect::<Result<Vec<_>>>()?;
            Ok(check_compatibility(spec, &factors)?.max_residual)
        })();
        match result {
            Ok(residual) => push_check(
                checks,
                "compatibility",
                residual <= tol.tol_compat,
                format!("max residual {residual:.3e}"),
            ),
            Err(e) => push_check(checks, "compatibility", false, e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn loop_graph() -> Graph {
        Graph::from_json(r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","rng":"v"}]}"#).unwrap()
    }

    fn edge_graph() -> Graph {
        Graph::from_json(r#"{"vertices":["v","w"],"edges":[{"id":"e","src":"v","rng":"w"}]}"#)
            .unwrap()
    }

    fn entry_graph() -> Graph {
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
    fn entry_graph_gets_exact_obstruction() {
        let cert = decide_rfd(&entry_graph(), 2, 5).unwrap();
        assert_eq!(cert.verdict, Verdict::NotRfd);
        let w = cert.witness.as_ref().unwrap();
        assert_eq!(w.entry_edge, "f");
        assert_eq!(w.entries, vec!["f"]);
        let ob = cert.obstruction.as_ref().unwrap();
        assert!(ob.identity_is_zero);
        assert!(ob.entry_term_nonzero);
        assert!(cert.params.tolerances.is_none());
        // No floating point values appear in the serialization.
        assert!(!cert.to_json().contains("tolerances"));
    }

    #[test]
    fn edge_graph_uses_acyclic_branch() {
        let cert = decide_rfd(&edge_graph(), 2, 5).unwrap();
        assert_eq!(cert.verdict, Verdict::Rfd);
        assert_eq!(cert.construction, Some(ConstructionKind::Acyclic));
        let fam = cert.family.as_ref().unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].dim, 2);
        assert!(cert.zs.is_none());
        assert!(cert.reports.as_ref().unwrap().separation.separated);
    }

    #[test]
    fn loop_graph_uses_cycle_branch() {
        let cert = decide_rfd(&loop_graph(), 1, 3).unwrap();
        assert_eq!(cert.construction, Some(ConstructionKind::Cycles));
        let fam = cert.family.as_ref().unwrap();
        assert_eq!(fam.len(), 3);
        assert!(fam.iter().all(|r| r.dim == 1));
        assert!(cert.reports.as_ref().unwrap().separation.separated);
    }

    #[test]
    fn isolated_vertex_next_to_a_loop_gets_its_slot() {
        // The forest part is a single edgeless vertex; the glued space
        // still covers it so the projection sum stays unital.
        let g = Graph::new(
            vec!["a".into(), "w".into()],
            vec![Edge::new("l", "a", "a")],
        )
        .unwrap();
        let cert = decide_rfd(&g, 1, 3).unwrap();
        assert_eq!(cert.verdict, Verdict::Rfd);
        assert_eq!(cert.construction, Some(ConstructionKind::Glued));
        let dims = cert.dims.as_ref().unwrap();
        assert_eq!((dims.k, dims.cycle_total, dims.shared, dims.dim), (1, 1, 0, 2));
        let reports = cert.reports.as_ref().unwrap();
        assert!(reports.ck.pass);
        assert!(reports.separation.separated);
        assert_eq!(reports.compatibility.as_ref().unwrap().max_residual, 0.0);
        assert!(verify_certificate(&g, &cert).pass);
    }

    #[test]
    fn disjoint_cycles_sum_blockwise() {
        let g = Graph::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                Edge::new("e1", "a", "b"),
                Edge::new("e2", "b", "a"),
                Edge::new("e3", "c", "d"),
                Edge::new("e4", "d", "c"),
            ],
        )
        .unwrap();
        let fam = build_separating_family(&g, 1, 3, TOL_RANK).unwrap();
        assert_eq!(fam.construction, ConstructionKind::Cycles);
        assert_eq!(fam.reps.len(), 3);
        assert!(fam.reps.iter().all(|r| r.dim == 4));
        assert!(fam.separation.separated);
    }

    #[test]
    fn glued_certificates_carry_dimension_law() {
        let cert = decide_rfd(&loop_with_rays(), 2, 5).unwrap();
        let dims = cert.dims.as_ref().unwrap();
        assert_eq!((dims.k, dims.cycle_total, dims.shared, dims.dim), (4, 1, 1, 4));
        assert!(cert.reports.as_ref().unwrap().compatibility.is_some());
        assert!(cert.metadata.contains_key("path_count_convention"));

        let cert = decide_rfd(&hexagon_with_tails(), 2, 5).unwrap();
        let dims = cert.dims.as_ref().unwrap();
        assert_eq!((dims.k, dims.cycle_total, dims.shared, dims.dim), (6, 6, 2, 10));
        assert_eq!(
            cert.reports.as_ref().unwrap().compatibility.as_ref().unwrap().max_residual,
            0.0
        );
        assert!(cert.reports.as_ref().unwrap().separation.separated);
    }

    #[test]
    fn zcount_guard() {
        assert!(matches!(
            decide_rfd(&loop_graph(), 2, 2),
            Err(Error::TooFewPoints { got: 2, need: 5 })
        ));
    }

    #[test]
    fn certificates_are_deterministic() {
        let a = decide_rfd(&hexagon_with_tails(), 2, 5).unwrap().to_json_pretty();
        let b = decide_rfd(&hexagon_with_tails(), 2, 5).unwrap().to_json_pretty();
        assert_eq!(a, b);
    }

    #[test]
    fn verify_round_trip_and_corruption() {
        for g in [loop_graph(), edge_graph(), loop_with_rays(), hexagon_with_tails(), entry_graph()] {
            let cert = decide_rfd(&g, 2, 5).unwrap();
            let parsed = Certificate::from_json(&cert.to_json_pretty()).unwrap();
            let report = verify_certificate(&g, &parsed);
            assert!(report.pass, "verify failed: {:?}", report.checks);
        }

        // Flip the low mantissa bit of one matrix entry.
        let g = loop_with_rays();
        let cert = decide_rfd(&g, 2, 5).unwrap();
        let mut corrupted = cert.clone();
        let fam = corrupted.family.as_mut().unwrap();
        let mat = fam[0].vertex_mats.values_mut().next().unwrap();
        let bits = mat.entries[0][0][0].to_bits() ^ 1;
        mat.entries[0][0][0] = f64::from_bits(bits);
        let report = verify_certificate(&g, &corrupted);
        assert!(!report.pass);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "reproducibility" && !c.pass));

        // Wrong graph: digest mismatch.
        let other = edge_graph();
        let report = verify_certificate(&other, &cert);
        assert!(report.digest_mismatch);
    }
}
