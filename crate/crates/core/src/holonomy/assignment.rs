//! Group elements on oriented edges, with `A(y, x) = A(x, y)^{-1}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{RootedSpanningTree, WeightedGraph};
use crate::holonomy::group::FiniteGroupSpec;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AssignmentSpec {
    pub group: String,
    pub assignment: Vec<AssignmentEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AssignmentEntry {
    pub u: String,
    pub v: String,
    pub g: usize,
}

impl AssignmentSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))
    }
}

/// Dense `n × n` table of edge labels; `None` off the edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAssignment {
    n: usize,
    labels: Vec<Option<usize>>,
}

impl EdgeAssignment {
    /// Every edge carries the identity.
    pub fn identity(g: &WeightedGraph, group: &FiniteGroupSpec) -> Self {
        let mut a = EdgeAssignment { n: g.len(), labels: vec![None; g.len() * g.len()] };
        for x in 0..g.len() {
            for &(y, _) in g.neighbors(x) {
                a.labels[x * a.n + y] = Some(group.identity());
            }
        }
        a
    }

    /// Assignment from `(x, y, element)` triples. Reverse orientations are
    /// filled with inverses; edges left unassigned stay `None`.
    pub fn new(
        g: &WeightedGraph,
        group: &FiniteGroupSpec,
        entries: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let n = g.len();
        let mut a = EdgeAssignment { n, labels: vec![None; n * n] };
        for (x, y, e) in entries {
            if x >= n || y >= n || !g.is_edge(x, y) {
                let name = |v: usize| if v < n { g.name(v).to_string() } else { v.to_string() };
                return Err(Error::EdgeNotInGraph(name(x), name(y)));
            }
            if e >= group.order() {
                return Err(Error::InconsistentAssignment(format!(
                    "element index {e} is out of range for {}",
                    group.name()
                )));
            }
            for (i, j, v) in [(x, y, e), (y, x, group.inv(e))] {
                match a.labels[i * n + j] {
                    Some(old) if old != v => {
                        return Err(Error::InconsistentAssignment(format!(
                            "edge {} -> {} is assigned both {} and {}",
                            g.name(i),
                            g.name(j),
                            group.elements()[old],
                            group.elements()[v]
                        )))
                    }
                    _ => a.labels[i * n + j] = Some(v),
                }
            }
        }
        Ok(a)
    }

    /// Like [`EdgeAssignment::new`] but unlisted edges carry the identity.
    pub fn with_identity_default(
        g: &WeightedGraph,
        group: &FiniteGroupSpec,
        entries: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let mut a = Self::new(g, group, entries)?;
        for x in 0..g.len() {
            for &(y, _) in g.neighbors(x) {
                a.labels[x * a.n + y].get_or_insert(group.identity());
            }
        }
        Ok(a)
    }

    /// Resolves vertex names; unlisted edges default to the identity.
    pub fn from_spec(g: &WeightedGraph, group: &FiniteGroupSpec, spec: &AssignmentSpec) -> Result<Self> {
        let entries = spec
            .assignment
            .iter()
            .map(|e| Ok((g.vertex(&e.u)?, g.vertex(&e.v)?, e.g)))
            .collect::<Result<Vec<_>>>()?;
        Self::with_identity_default(g, group, entries)
    }

    pub fn to_spec(&self, g: &WeightedGraph, group: &FiniteGroupSpec) -> AssignmentSpec {
        let mut assignment = Vec::new();
        for x in 0..self.n {
            for y in x + 1..self.n {
                if let Some(e) = self.labels[x * self.n + y] {
                    assignment.push(AssignmentEntry { u: g.name(x).into(), v: g.name(y).into(), g: e });
                }
            }
        }
        AssignmentSpec { group: group.name().into(), assignment }
    }

    pub fn get(&self, x: usize, y: usize) -> Option<usize> {
        self.labels.get(x * self.n + y).copied().flatten()
    }

    /// Label of `x → y`, or `UnassignedEdge`.
    pub fn label(&self, g: &WeightedGraph, x: usize, y: usize) -> Result<usize> {
        self.get(x, y)
            .ok_or_else(|| Error::UnassignedEdge(g.name(x).to_string(), g.name(y).to_string()))
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Ordered product `A(x0,x1) A(x1,x2) ⋯ A(x_{n-1},x0)` around a cyclic word.
    pub fn holonomy(&self, g: &WeightedGraph, group: &FiniteGroupSpec, word: &[usize]) -> Result<usize> {
        let mut acc = group.identity();
        for i in 0..word.len() {
            let (x, y) = (word[i], word[(i + 1) % word.len()]);
            acc = group.mul(acc, self.label(g, x, y)?);
        }
        Ok(acc)
    }

    /// Conjugacy class of the holonomy; independent of the starting point.
    pub fn holonomy_class(&self, g: &WeightedGraph, group: &FiniteGroupSpec, word: &[usize]) -> Result<usize> {
        Ok(group.class_of(self.holonomy(g, group, word)?))
    }
}

/// Vertex function `Q: X → G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeMap {
    pub q: Vec<usize>,
}

/// `A'(x, y) = Q(x) A(x, y) Q(y)^{-1}`. Holonomies are conjugated by `Q(x0)`,
/// so their classes are unchanged.
pub fn gauge_transform(a: &EdgeAssignment, q: &GaugeMap, group: &FiniteGroupSpec) -> Result<EdgeAssignment> {
    if q.q.len() != a.n || q.q.iter().any(|&e| e >= group.order()) {
        return Err(Error::InvalidArgument("gauge map does not match the graph or group".into()));
    }
    let mut out = a.clone();
    for x in 0..a.n {
        for y in 0..a.n {
            if let Some(e) = a.labels[x * a.n + y] {
                out.labels[x * a.n + y] = Some(group.mul(group.mul(q.q[x], e), group.inv(q.q[y])));
            }
        }
    }
    Ok(out)
}

/// Gauge that makes every tree edge carry the identity. Vertices whose
/// parent is the cemetery are roots with `Q = e`.
pub fn tree_gauge(
    g: &WeightedGraph,
    a: &EdgeAssignment,
    tree: &RootedSpanningTree,
    group: &FiniteGroupSpec,
) -> Result<GaugeMap> {
    tree.validate(g)?;
    let n = g.len();
    let mut q: Vec<Option<usize>> = vec![None; n];
    for start in 0..n {
        let mut chain = Vec::new();
        let mut x = start;
        while q[x].is_none() {
            chain.push(x);
            match tree.parent[x] {
                Some(p) => x = p,
                None => break,
            }
        }
        for &v in chain.iter().rev() {
            q[v] = Some(match tree.parent[v] {
                None => group.identity(),
                Some(p) => group.mul(q[p].expect("parent resolved first"), a.label(g, p, v)?),
            });
        }
    }
    Ok(GaugeMap { q: q.into_iter().map(|v| v.expect("all vertices reached")).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_fill_and_conflicts() {
        let g = WeightedGraph::triangle(1.0).unwrap();
        let grp = FiniteGroupSpec::builtin("Z_3").unwrap();
        let a = EdgeAssignment::new(&g, &grp, [(0, 1, 1)]).unwrap();
        assert_eq!(a.get(0, 1), Some(1));
        assert_eq!(a.get(1, 0), Some(2));
        assert_eq!(a.get(1, 2), None);
        assert!(matches!(a.label(&g, 1, 2), Err(Error::UnassignedEdge(..))));
        assert!(matches!(
            EdgeAssignment::new(&g, &grp, [(0, 1, 1), (1, 0, 1)]),
            Err(Error::InconsistentAssignment(_))
        ));
        assert!(EdgeAssignment::new(&g, &grp, [(0, 1, 1), (1, 0, 2)]).is_ok());
        let sq = WeightedGraph::cycle(4, 1.0).unwrap();
        assert!(matches!(EdgeAssignment::new(&sq, &grp, [(0, 2, 1)]), Err(Error::EdgeNotInGraph(..))));
    }

    #[test]
    fn tree_gauge_moves_holonomy_off_the_tree() {
        let g = WeightedGraph::triangle(1.0).unwrap();
        let grp = FiniteGroupSpec::builtin("S_3").unwrap();
        let a = EdgeAssignment::new(&g, &grp, [(0, 1, 1), (1, 2, 3), (2, 0, 4)]).unwrap();
        // tree {ab, bc}: c → b → a → Δ
        let tree = RootedSpanningTree { parent: vec![None, Some(0), Some(1)] };
        let q = tree_gauge(&g, &a, &tree, &grp).unwrap();
        let at = gauge_transform(&a, &q, &grp).unwrap();
        let e = grp.identity();
        assert_eq!((at.get(0, 1), at.get(1, 0), at.get(1, 2), at.get(2, 1)), (Some(e), Some(e), Some(e), Some(e)));
        let word = [0, 1, 2];
        assert_eq!(at.holonomy(&g, &grp, &word).unwrap(), at.get(2, 0).unwrap());
        assert_eq!(at.holonomy_class(&g, &grp, &word).unwrap(), a.holonomy_class(&g, &grp, &word).unwrap());
        // holonomy at base a is unchanged since Q(a) = e
        assert_eq!(at.holonomy(&g, &grp, &word).unwrap(), a.holonomy(&g, &grp, &word).unwrap());
    }

    #[test]
    fn spec_round_trip() {
        let g = WeightedGraph::triangle(1.0).unwrap();
        let grp = FiniteGroupSpec::builtin("Z_2").unwrap();
        let json = r#"{"group":"Z_2","assignment":[{"u":"a","v":"b","g":1}]}"#;
        let spec: AssignmentSpec = serde_json::from_str(json).unwrap();
        let a = EdgeAssignment::from_spec(&g, &grp, &spec).unwrap();
        assert_eq!(a.get(2, 0), Some(0));
        assert_eq!(a.holonomy(&g, &grp, &[0, 1, 2]).unwrap(), 1);
        let back = a.to_spec(&g, &grp);
        assert_eq!(EdgeAssignment::from_spec(&g, &grp, &back).unwrap(), a);
    }
}
