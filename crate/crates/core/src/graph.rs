//! Weighted graphs with killing, their transition kernel, and the global
//! quantities that depend only on the kernel: energy, total loop mass and
//! the spanning-tree measure.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Label used for the cemetery state in files and reports.
pub const CEMETERY: &str = "Δ";

/// On-disk graph description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub kappa: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub c: f64,
}

/// Substochastic, λ-symmetric transition kernel of a [`WeightedGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    /// Duality measure `λ_x = κ_x + Σ_y C_{x,y}`.
    pub lambda: Vec<f64>,
    /// `P[x][y] = C_{x,y} / λ_x`.
    pub p: DMatrix<f64>,
    /// Probability of jumping to the cemetery, `κ_x / λ_x`.
    pub exit: Vec<f64>,
}

impl TransitionKernel {
    fn from_parts(adj: &[Vec<(usize, f64)>], kappa: &[f64]) -> Self {
        let n = kappa.len();
        let lambda: Vec<f64> = (0..n)
            .map(|x| kappa[x] + adj[x].iter().map(|&(_, c)| c).sum::<f64>())
            .collect();
        let mut p = DMatrix::zeros(n, n);
        for (x, nbrs) in adj.iter().enumerate() {
            for &(y, c) in nbrs {
                p[(x, y)] = c / lambda[x];
            }
        }
        let exit = (0..n).map(|x| kappa[x] / lambda[x]).collect();
        TransitionKernel { lambda, p, exit }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// A finite connected graph with positive conductances and killing rates.
///
/// Vertices are addressed by their position in the declared vertex list;
/// that order is also the order used for canonical loop words.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<(usize, f64)>>,
    kappa: Vec<f64>,
    kernel: TransitionKernel,
}

impl WeightedGraph {
    /// Validates a vertex list, weighted edge list and killing map.
    ///
    /// Vertices missing from `kappa` get a killing rate of zero.
    pub fn build<V, E, K>(vertices: V, edges: E, kappa: K) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, f64)>,
        K: IntoIterator<Item = (String, f64)>,
    {
        let names: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(name.clone()));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };

        let n = names.len();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (u, v, c) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let (x, y) = (lookup(&u)?, lookup(&v)?);
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::NonpositiveConductance(u, v, c));
            }
            if adj[x].iter().any(|&(z, _)| z == y) {
                return Err(Error::DuplicateEdge(u, v));
            }
            adj[x].push((y, c));
            adj[y].push((x, c));
        }
        for nbrs in adj.iter_mut() {
            nbrs.sort_by_key(|&(y, _)| y);
        }

        let mut kap = vec![0.0; n];
        for (name, k) in kappa {
            let x = lookup(&name)?;
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::NegativeKilling(name, k));
            }
            kap[x] = k;
        }
        if kap.iter().all(|&k| k == 0.0) {
            return Err(Error::AllKillingZero);
        }

        // connectivity from vertex 0
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::DisconnectedGraph(names[x].clone(), names[0].clone()));
        }

        let kernel = TransitionKernel::from_parts(&adj, &kap);
        Ok(WeightedGraph { names, index, adj, kappa: kap, kernel })
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        Self::build(
            spec.vertices.iter().cloned(),
            spec.edges.iter().map(|e| (e.u.clone(), e.v.clone(), e.c)),
            spec.kappa.iter().map(|(k, v)| (k.clone(), *v)),
        )
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(json)?;
        Self::from_spec(&spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
            .map_err(|e| match e {
                Error::ConfigParse(m) => Error::ConfigParse(format!("{}: {m}", path.display())),
                other => other,
            })
    }

    pub fn to_spec(&self) -> GraphSpec {
        let mut edges = Vec::new();
        for (x, nbrs) in self.adj.iter().enumerate() {
            for &(y, c) in nbrs {
                if x < y {
                    edges.push(EdgeSpec { u: self.names[x].clone(), v: self.names[y].clone(), c });
                }
            }
        }
        GraphSpec {
            vertices: self.names.clone(),
            edges,
            kappa: self.names.iter().cloned().zip(self.kappa.iter().copied()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// Neighbours of `x` with conductances, sorted by vertex index.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    pub fn conductance(&self, x: usize, y: usize) -> Option<f64> {
        self.adj[x]
            .binary_search_by_key(&y, |&(z, _)| z)
            .ok()
            .map(|i| self.adj[x][i].1)
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.conductance(x, y).is_some()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    /// `P^x_y`, zero for non-adjacent pairs.
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.kernel.p[(x, y)]
    }

    /// Energy `½ Σ_{x,y} C_{x,y}(f(x)-f(y))² + Σ_x κ_x f(x)²` of a function
    /// given by vertex index.
    pub fn energy_values(&self, f: &[f64]) -> Result<f64> {
        if f.len() < self.len() {
            return Err(Error::MissingVertexValue(self.names[f.len()].clone()));
        }
        let mut e = 0.0;
        for (x, nbrs) in self.adj.iter().enumerate() {
            for &(y, c) in nbrs {
                // each unordered edge is visited twice, matching the ½ Σ_{x,y}
                let d = f[x] - f[y];
                e += 0.5 * c * d * d;
            }
            e += self.kappa[x] * f[x] * f[x];
        }
        Ok(e)
    }

    /// Energy of a function given by vertex name.
    pub fn energy(&self, f: &HashMap<String, f64>) -> Result<f64> {
        let values = self
            .names
            .iter()
            .map(|n| f.get(n).copied().ok_or_else(|| Error::MissingVertexValue(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        self.energy_values(&values)
    }

    /// `I - P` as a dense matrix.
    pub fn identity_minus_p(&self) -> DMatrix<f64> {
        DMatrix::identity(self.len(), self.len()) - &self.kernel.p
    }

    /// `log det(I - P)`.
    pub fn log_det(&self) -> Result<f64> {
        linalg::log_det_positive(&self.identity_minus_p())
    }

    /// Total mass of the loop measure, `-log det(I - P)`.
    pub fn total_loop_mass(&self) -> Result<f64> {
        Ok(-self.log_det()?)
    }

    /// Spectral radius of `P`, computed from the symmetrized kernel
    /// `C_{x,y} / sqrt(λ_x λ_y)`.
    pub fn spectral_radius(&self) -> f64 {
        let n = self.len();
        let lam = &self.kernel.lambda;
        let s = DMatrix::from_fn(n, n, |x, y| match self.conductance(x, y) {
            Some(c) => c / (lam[x] * lam[y]).sqrt(),
            None => 0.0,
        });
        linalg::symmetric_eigenvalues(&s)
            .into_iter()
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Product of transition probabilities along the tree edges.
    pub fn tree_weight(&self, tree: &RootedSpanningTree) -> Result<f64> {
        tree.validate(self)?;
        Ok(tree
            .parent
            .iter()
            .enumerate()
            .map(|(x, p)| match p {
                Some(y) => self.p(x, *y),
                None => self.kernel.exit[x],
            })
            .product())
    }

    /// ν(T) = Π_{tree edges} P / det(I - P).
    pub fn spanning_tree_probability(&self, tree: &RootedSpanningTree) -> Result<f64> {
        let w = self.tree_weight(tree)?;
        Ok(w * (-self.log_det()?).exp())
    }

    /// Every spanning tree of the cemetery-augmented graph rooted at the
    /// cemetery, in lexicographic order of parent choices.
    ///
    /// Fails with `TooLarge` when the number of candidate parent maps
    /// exceeds `limit`.
    pub fn enumerate_rooted_trees(&self, limit: u64) -> Result<Vec<RootedSpanningTree>> {
        let n = self.len();
        // candidates per vertex: the cemetery (if reachable) then neighbours
        let choices: Vec<Vec<Option<usize>>> = (0..n)
            .map(|x| {
                let mut c = Vec::new();
                if self.kappa[x] > 0.0 {
                    c.push(None);
                }
                c.extend(self.adj[x].iter().map(|&(y, _)| Some(y)));
                c
            })
            .collect();
        let total = choices
            .iter()
            .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
            .unwrap_or(u64::MAX);
        if total > limit {
            return Err(Error::TooLarge(format!("{total} candidate parent maps exceed limit {limit}")));
        }
        let mut out = Vec::new();
        let mut pick = vec![0usize; n];
        loop {
            let parent: Vec<Option<usize>> = (0..n).map(|x| choices[x][pick[x]]).collect();
            let tree = RootedSpanningTree { parent };
            if tree.is_acyclic() {
                out.push(tree);
            }
            // odometer, last vertex fastest
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    break;
                }
                pick[i] = 0;
            }
        }
    }

    // ---- standard graphs used throughout the tests and examples ----

    /// Two vertices `a`, `b`, one unit edge, unit killing on both.
    pub fn two_vertex() -> Self {
        Self::complete(2, 1.0).expect("valid graph")
    }

    /// Triangle `a`, `b`, `c` with unit conductances and constant killing.
    pub fn triangle(kappa: f64) -> Result<Self> {
        Self::complete(3, kappa)
    }

    /// Complete graph on `n` vertices, unit conductances, constant killing.
    pub fn complete(n: usize, kappa: f64) -> Result<Self> {
        let names = letter_names(n);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((names[i].clone(), names[j].clone(), 1.0));
            }
        }
        let k: Vec<_> = names.iter().map(|v| (v.clone(), kappa)).collect();
        Self::build(names, edges, k)
    }

    /// Cycle graph on `n ≥ 3` vertices, unit conductances, constant killing.
    pub fn cycle(n: usize, kappa: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("cycle needs at least 3 vertices, got {n}")));
        }
        let names = letter_names(n);
        let edges: Vec<_> =
            (0..n).map(|i| (names[i].clone(), names[(i + 1) % n].clone(), 1.0)).collect();
        let k: Vec<_> = names.iter().map(|v| (v.clone(), kappa)).collect();
        Self::build(names, edges, k)
    }

    /// Petersen graph (3-regular, 10 vertices), unit conductances.
    pub fn petersen(kappa: f64) -> Result<Self> {
        let names: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((names[i].clone(), names[(i + 1) % 5].clone(), 1.0));
            edges.push((names[i].clone(), names[i + 5].clone(), 1.0));
            edges.push((names[5 + i].clone(), names[5 + (i + 2) % 5].clone(), 1.0));
        }
        let k: Vec<_> = names.iter().map(|v| (v.clone(), kappa)).collect();
        Self::build(names, edges, k)
    }
}

fn letter_names(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        (0..n).map(|i| format!("v{i}")).collect()
    }
}

/// Spanning tree of `X ∪ {Δ}` rooted at the cemetery, edges oriented toward
/// the root. `parent[x] == None` means `x → Δ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedSpanningTree {
    pub parent: Vec<Option<usize>>,
}

impl RootedSpanningTree {
    fn is_acyclic(&self) -> bool {
        let n = self.parent.len();
        // 0 = unknown, 1 = on current chain, 2 = reaches the root
        let mut state = vec![0u8; n];
        for start in 0..n {
            let mut chain = Vec::new();
            let mut x = start;
            loop {
                match state[x] {
                    2 => break,
                    1 => return false,
                    _ => {}
                }
                state[x] = 1;
                chain.push(x);
                match self.parent[x] {
                    Some(y) if y < n => x = y,
                    Some(_) => return false,
                    None => break,
                }
            }
            for v in chain {
                state[v] = 2;
            }
        }
        true
    }

    /// Checks that the tree spans the graph and only uses graph edges or exits.
    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        if self.parent.len() != g.len() {
            return Err(Error::NotASpanningTree(format!(
                "{} parent entries for {} vertices",
                self.parent.len(),
                g.len()
            )));
        }
        for (x, p) in self.parent.iter().enumerate() {
            match p {
                Some(y) if *y >= g.len() => {
                    return Err(Error::NotASpanningTree(format!("parent index {y} out of range")))
                }
                Some(y) if !g.is_edge(x, *y) => {
                    return Err(Error::NotASpanningTree(format!(
                        "{} -> {} is not an edge",
                        g.name(x),
                        g.name(*y)
                    )))
                }
                None if g.kappa()[x] == 0.0 => {
                    return Err(Error::NotASpanningTree(format!(
                        "{} -> {CEMETERY} has zero killing",
                        g.name(x)
                    )))
                }
                _ => {}
            }
        }
        if !self.is_acyclic() {
            return Err(Error::NotASpanningTree("parent pointers contain a cycle".into()));
        }
        Ok(())
    }

    /// Tree in the `{"x": "parent"}` form used by the ensemble dump.
    pub fn to_named(&self, g: &WeightedGraph) -> BTreeMap<String, String> {
        self.parent
            .iter()
            .enumerate()
            .map(|(x, p)| {
                let target = match p {
                    Some(y) => g.name(*y).to_string(),
                    None => CEMETERY.to_string(),
                };
                (g.name(x).to_string(), target)
            })
            .collect()
    }

    pub fn from_named(g: &WeightedGraph, named: &BTreeMap<String, String>) -> Result<Self> {
        let mut parent = vec![None; g.len()];
        let mut seen = vec![false; g.len()];
        for (child, target) in named {
            let x = g.vertex(child)?;
            seen[x] = true;
            parent[x] = if target == CEMETERY { None } else { Some(g.vertex(target)?) };
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::NotASpanningTree(format!("no parent for {}", g.name(x))));
        }
        let t = RootedSpanningTree { parent };
        t.validate(g)?;
        Ok(t)
    }

    /// Compact text key, e.g. `a>Δ b>a`.
    pub fn key(&self, g: &WeightedGraph) -> String {
        self.to_named(g)
            .iter()
            .map(|(c, p)| format!("{c}>{p}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
