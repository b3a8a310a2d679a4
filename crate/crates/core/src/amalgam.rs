//! Amalgamation data for a decomposed graph: the two unital embeddings of
//! a finite-dimensional diagonal base into the cycle factor (with an
//! adjoined unit) and the forest factor (with an adjoined unit in the
//! proper-subset case), plus the numeric verification that the concrete
//! factor representations agree on the base.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{find_cycles, find_entry_host, CaseFlag, Decomposition, Graph};
use crate::rep::{build_glued_parts, czeros, op_norm, CMatrix};

/// Which amalgam base applies: diagonal of size `n+1` when the forest
/// part touches every vertex, `n+2` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmalgamCase {
    Case1,
    Case2,
}

/// The image of one base coordinate inside a factor: a set of vertex
/// projections plus optionally the factor's adjoined-unit slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CoordImage {
    pub vertices: Vec<String>,
    pub unit: bool,
}

impl CoordImage {
    fn of_vertices(vs: &[String]) -> CoordImage {
        CoordImage {
            vertices: vs.to_vec(),
            unit: false,
        }
    }

    fn of_vertex(v: &str) -> CoordImage {
        CoordImage {
            vertices: vec![v.to_string()],
            unit: false,
        }
    }

    fn of_unit() -> CoordImage {
        CoordImage {
            vertices: Vec::new(),
            unit: true,
        }
    }
}

/// Per-coordinate embedding descriptors of the diagonal base into the two
/// factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamSpec {
    pub n: usize,
    pub case: AmalgamCase,
    pub base_dim: usize,
    pub theta1: Vec<CoordImage>,
    pub theta2: Vec<CoordImage>,
}

/// Builds the embedding descriptors for a decomposition. The first `n`
/// coordinates pair each shared vertex across the factors; the remaining
/// one or two coordinates tie the adjoined units to the complementary
/// vertex classes.
pub fn amalgam_data(g: &Graph, d: &Decomposition) -> Result<AmalgamSpec> {
    if let Some((witness, _)) = find_entry_host(g) {
        return Err(Error::EntryPresent { witness });
    }
    if d.g1.edge_count() == 0 {
        return Err(Error::TrivialDecomposition(
            "cycle part has no edges".into(),
        ));
    }
    if d.betas.is_empty() {
        return Err(Error::InvalidDecomposition(
            "forest part has no vertex of its own".into(),
        ));
    }
    match d.case_flag {
        CaseFlag::SameVertexSet if !d.alphas.is_empty() => {
            return Err(Error::InvalidDecomposition(
                "same-vertex-set case cannot have cycle-only vertices".into(),
            ));
        }
        CaseFlag::ProperSubset if d.alphas.is_empty() => {
            return Err(Error::InvalidDecomposition(
                "proper-subset case requires cycle-only vertices".into(),
            ));
        }
        _ => {}
    }

    let n = d.shared.len();
    let mut theta1: Vec<CoordImage> = d.shared.iter().map(|p| CoordImage::of_vertex(p)).collect();
    let mut theta2 = theta1.clone();
    let (case, base_dim) = match d.case_flag {
        CaseFlag::SameVertexSet => {
            theta1.push(CoordImage::of_unit());
            theta2.push(CoordImage::of_vertices(&d.betas));
            (AmalgamCase::Case1, n + 1)
        }
        CaseFlag::ProperSubset => {
            theta1.push(CoordImage::of_vertices(&d.alphas));
            theta1.push(CoordImage::of_unit());
            theta2.push(CoordImage::of_unit());
            theta2.push(CoordImage::of_vertices(&d.betas));
            (AmalgamCase::Case2, n + 2)
        }
    };
    Ok(AmalgamSpec {
        n,
        case,
        base_dim,
        theta1,
        theta2,
    })
}

/// Generator-image tables of the two factors on the common glued space:
/// the cycle factor together with its adjoined-unit block, and the forest
/// factor (whose adjoined-unit block exists only in the proper-subset
/// case).
#[derive(Debug, Clone)]
pub struct FactorReps {
    pub dim: usize,
    pub z: Complex64,
    pub g1_vertex_mats: BTreeMap<String, CMatrix>,
    pub g1_edge_mats: BTreeMap<String, CMatrix>,
    /// Image of the adjoined unit of the cycle factor: identity on the
    /// non-shared forest slots.
    pub g1_unit: CMatrix,
    pub g2_vertex_mats: BTreeMap<String, CMatrix>,
    pub g2_edge_mats: BTreeMap<String, CMatrix>,
    /// Image of the adjoined unit of the forest factor: identity on the
    /// non-shared cycle slots (proper-subset case only).
    pub g2_unit: Option<CMatrix>,
}

pub fn build_factor_reps(g: &Graph, d: &Decomposition, z: Complex64) -> Result<FactorReps> {
    if let Some((witness, _)) = find_entry_host(g) {
        return Err(Error::EntryPresent { witness });
    }
    let cycles = find_cycles(&d.g1)?;
    let zmap: BTreeMap<String, Complex64> =
        cycles.iter().map(|c| (c.base().to_string(), z)).collect();
    let parts = build_glued_parts(g, &cycles, Some(&d.g2), &d.shared, &zmap)?;
    let g2_unit = match d.case_flag {
        CaseFlag::SameVertexSet => None,
        CaseFlag::ProperSubset => Some(parts.cycle_tail_unit.clone()),
    };
    Ok(FactorReps {
        dim: parts.dim,
        z,
        g1_vertex_mats: parts.cycle_vertex_mats,
        g1_edge_mats: parts.cycle_edge_mats,
        g1_unit: parts.forest_unit,
        g2_vertex_mats: parts.forest_vertex_mats,
        g2_edge_mats: parts.forest_edge_mats,
        g2_unit,
    })
}

impl FactorReps {
    fn theta1_image(&self, coord: &CoordImage) -> Result<CMatrix> {
        let mut m = czeros(self.dim);
        for v in &coord.vertices {
            let p = self
                .g1_vertex_mats
                .get(v)
                .ok_or_else(|| Error::LayoutMismatch(format!("{v:?} is not a cycle vertex")))?;
            m += p;
        }
        if coord.unit {
            m += &self.g1_unit;
        }
        Ok(m)
    }

    fn theta2_image(&self, coord: &CoordImage) -> Result<CMatrix> {
        let mut m = czeros(self.dim);
        for v in &coord.vertices {
            let p = self
                .g2_vertex_mats
                .get(v)
                .ok_or_else(|| Error::LayoutMismatch(format!("{v:?} is not a forest vertex")))?;
            m += p;
        }
        if coord.unit {
            let u = self.g2_unit.as_ref().ok_or_else(|| {
                Error::LayoutMismatch("forest factor has no adjoined unit in this case".into())
            })?;
            m += u;
        }
        Ok(m)
    }
}

/// Outcome of comparing the two embeddings on the concrete factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompatibilityReport {
    /// Max over coordinates and family members of the deviation between
    /// the two factor images.
    pub max_residual: f64,
    pub theta1_unitality_residual: f64,
    pub theta2_unitality_residual: f64,
    /// Smallest coordinate-image norm; positive values certify that both
    /// embeddings are injective on the diagonal base.
    pub min_coordinate_norm: f64,
    pub coordinates: usize,
    pub members: usize,
}

/// Verifies, for every family member, that the two embeddings agree
/// coordinatewise and are unital and injective on the base.
pub fn check_compatibility(spec: &AmalgamSpec, factors: &[FactorReps]) -> Result<CompatibilityReport> {
    if factors.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if spec.theta1.len() != spec.base_dim || spec.theta2.len() != spec.base_dim {
        return Err(Error::LayoutMismatch(
            "coordinate count does not match base dimension".into(),
        ));
    }
    let dim = factors[0].dim;
    if factors.iter().any(|f| f.dim != dim) {
        return Err(Error::LayoutMismatch(
            "factor representations act on different dimensions".into(),
        ));
    }

    let mut max_residual = 0.0f64;
    let mut theta1_unit = 0.0f64;
    let mut theta2_unit = 0.0f64;
    let mut min_coord = f64::INFINITY;
    let identity = CMatrix::identity(dim, dim);
    for f in factors {
        let mut sum1 = czeros(dim);
        let mut sum2 = czeros(dim);
        for (c1, c2) in spec.theta1.iter().zip(&spec.theta2) {
            let a = f.theta1_image(c1)?;
            let b = f.theta2_image(c2)?;
            max_residual = max_residual.max(op_norm(&(&a - &b)));
            min_coord = min_coord.min(op_norm(&a)).min(op_norm(&b));
            sum1 += a;
            sum2 += b;
        }
        theta1_unit = theta1_unit.max(op_norm(&(&sum1 - &identity)));
        theta2_unit = theta2_unit.max(op_norm(&(&sum2 - &identity)));
    }
    Ok(CompatibilityReport {
        max_residual,
        theta1_unitality_residual: theta1_unit,
        theta2_unitality_residual: theta2_unit,
        min_coordinate_norm: min_coord,
        coordinates: spec.base_dim,
        members: factors.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{decompose, Edge};

    fn roots(m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64))
            .collect()
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
    fn embedding_data_for_loop_with_rays() {
        let g = loop_with_rays();
        let d = decompose(&g).unwrap();
        let spec = amalgam_data(&g, &d).unwrap();
        assert_eq!(spec.case, AmalgamCase::Case1);
        assert_eq!(spec.n, 1);
        assert_eq!(spec.base_dim, 2);
        assert!(spec.theta1[1].unit);
        assert_eq!(spec.theta2[1].vertices, vec!["b", "c", "d"]);
    }

    #[test]
    fn embedding_data_for_hexagon_with_tails() {
        let g = hexagon_with_tails();
        let d = decompose(&g).unwrap();
        let spec = amalgam_data(&g, &d).unwrap();
        assert_eq!(spec.case, AmalgamCase::Case2);
        assert_eq!(spec.n, 2);
        assert_eq!(spec.base_dim, 4);
        assert_eq!(spec.theta1[2].vertices.len(), 4);
        assert!(spec.theta1[3].unit);
        assert!(spec.theta2[2].unit);
        assert_eq!(spec.theta2[3].vertices, vec!["P6", "P7", "P8"]);
    }

    #[test]
    fn inconsistent_decomposition_is_rejected() {
        let g = hexagon_with_tails();
        let mut d = decompose(&g).unwrap();
        d.alphas.clear();
        assert!(matches!(
            amalgam_data(&g, &d),
            Err(Error::InvalidDecomposition(_))
        ));
    }

    #[test]
    fn compatibility_is_exact_on_named_graphs() {
        for g in [loop_with_rays(), hexagon_with_tails()] {
            let d = decompose(&g).unwrap();
            let spec = amalgam_data(&g, &d).unwrap();
            let factors: Vec<FactorReps> = roots(4)
                .into_iter()
                .map(|z| build_factor_reps(&g, &d, z).unwrap())
                .collect();
            let report = check_compatibility(&spec, &factors).unwrap();
            assert_eq!(report.max_residual, 0.0);
            assert_eq!(report.theta1_unitality_residual, 0.0);
            assert_eq!(report.theta2_unitality_residual, 0.0);
            assert!(report.min_coordinate_norm > 0.0);
        }
    }

    #[test]
    fn swapped_shared_slots_are_detected() {
        let g = hexagon_with_tails();
        let d = decompose(&g).unwrap();
        let spec = amalgam_data(&g, &d).unwrap();
        let mut f = build_factor_reps(&g, &d, Complex64::new(1.0, 0.0)).unwrap();
        let p3 = f.g2_vertex_mats["P3"].clone();
        let p4 = f.g2_vertex_mats["P4"].clone();
        f.g2_vertex_mats.insert("P3".into(), p4);
        f.g2_vertex_mats.insert("P4".into(), p3);
        let report = check_compatibility(&spec, &[f]).unwrap();
        assert!(report.max_residual >= 1.0);
    }

    #[test]
    fn disjoint_parts_amalgamate_over_two_units() {
        // A loop and a separate edge share no vertex: n = 0, case 2.
        let g = Graph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![Edge::new("l", "a", "a"), Edge::new("t", "b", "c")],
        )
        .unwrap();
        let d = decompose(&g).unwrap();
        assert!(d.shared.is_empty());
        let spec = amalgam_data(&g, &d).unwrap();
        assert_eq!(spec.case, AmalgamCase::Case2);
        assert_eq!(spec.base_dim, 2);
        let factors: Vec<FactorReps> = roots(3)
            .into_iter()
            .map(|z| build_factor_reps(&g, &d, z).unwrap())
            .collect();
        let report = check_compatibility(&spec, &factors).unwrap();
        assert_eq!(report.max_residual, 0.0);
        assert!(report.min_coordinate_norm > 0.0);
    }
}
