//! Python bindings: a `Graph` class plus module-level helpers for holonomy
//! masses, hyperbolic masses and full experiment runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use loopforge::analytics::{contractible_mass, geodesic_class_mass, geodesic_total_mass, hyperbolic_class_mass};
use loopforge::harness::experiment::{run_to_dir, ExperimentConfig};
use loopforge::harness::{for_each_loop, tail_bound};
use loopforge::holonomy::{holonomy_class_masses, AssignmentSpec, EdgeAssignment, FiniteGroupSpec};
use loopforge::wilson::{default_order, wilson_sample, RandomSource};
use loopforge::{GeodesicClass, RootedSpanningTree, WeightedGraph};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: loopforge::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type LoopRow = (Vec<String>, usize, f64);

/// Weighted graph with killing rates.
#[pyclass(name = "Graph", module = "loopforge_py", frozen)]
struct PyGraph {
    inner: WeightedGraph,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        WeightedGraph::load(path).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        WeightedGraph::from_json_str(text).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn two_vertex() -> Self {
        PyGraph { inner: WeightedGraph::two_vertex() }
    }

    #[staticmethod]
    #[pyo3(signature = (kappa = 1.0))]
    fn triangle(kappa: f64) -> PyResult<Self> {
        WeightedGraph::triangle(kappa).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, kappa = 1.0))]
    fn complete(n: usize, kappa: f64) -> PyResult<Self> {
        WeightedGraph::complete(n, kappa).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, kappa = 1.0))]
    fn cycle(n: usize, kappa: f64) -> PyResult<Self> {
        WeightedGraph::cycle(n, kappa).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (kappa = 1.0))]
    fn petersen(kappa: f64) -> PyResult<Self> {
        WeightedGraph::petersen(kappa).map(|inner| PyGraph { inner }).map_err(py_err)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={})", self.inner.len(), self.inner.num_edges())
    }

    /// Transition probability between two named vertices.
    fn p(&self, x: &str, y: &str) -> PyResult<f64> {
        let (x, y) = (self.inner.vertex(x).map_err(py_err)?, self.inner.vertex(y).map_err(py_err)?);
        Ok(self.inner.p(x, y))
    }

    /// Total loop mass, `-log det(I - P)`.
    fn total_loop_mass(&self) -> PyResult<f64> {
        self.inner.total_loop_mass().map_err(py_err)
    }

    fn contractible_mass(&self) -> PyResult<f64> {
        contractible_mass(&self.inner).map_err(py_err)
    }

    fn geodesic_total_mass(&self) -> PyResult<f64> {
        geodesic_total_mass(&self.inner).map_err(py_err)
    }

    /// Exact Poisson mean of the geodesic class of a closed walk.
    fn geodesic_class_mass(&self, word: Vec<String>) -> PyResult<f64> {
        let class = GeodesicClass::from_names(&self.inner, &word).map_err(py_err)?;
        geodesic_class_mass(&self.inner, &class).map_err(py_err)
    }

    fn tail_bound(&self, max_len: usize) -> f64 {
        tail_bound(&self.inner, max_len)
    }

    /// Every unbased loop up to `max_len` as `(word, mult, mass)`.
    fn enumerate(&self, max_len: usize) -> PyResult<Vec<LoopRow>> {
        let mut rows = Vec::new();
        for_each_loop(&self.inner, max_len, |v| {
            let names = v.word.iter().map(|&x| self.inner.name(x).to_string()).collect();
            rows.push((names, v.mult, v.mass));
            true
        })
        .map_err(py_err)?;
        Ok(rows)
    }

    /// One Wilson sample: the tree as a child-to-parent map (roots map to
    /// `"Δ"`) and the loop ensemble as vertex-name words.
    #[pyo3(signature = (seed, stream = 0, order = None))]
    fn sample(
        &self,
        seed: u64,
        stream: u64,
        order: Option<Vec<String>>,
    ) -> PyResult<(BTreeMap<String, String>, Vec<Vec<String>>)> {
        let g = &self.inner;
        let order = match order {
            Some(names) => names.iter().map(|n| g.vertex(n)).collect::<Result<Vec<_>, _>>().map_err(py_err)?,
            None => default_order(g),
        };
        let mut rng = RandomSource::new(seed, stream);
        let (tree, ens) = wilson_sample(g, &order, &mut rng).map_err(py_err)?;
        Ok((tree.to_named(g), ens.loops().iter().map(|l| l.names(g)).collect()))
    }

    /// Exact probability of a rooted spanning tree given as returned by
    /// `sample`.
    fn spanning_tree_probability(&self, tree: BTreeMap<String, String>) -> PyResult<f64> {
        let t = RootedSpanningTree::from_named(&self.inner, &tree).map_err(py_err)?;
        self.inner.spanning_tree_probability(&t).map_err(py_err)
    }
}

/// Exact mass of each holonomy class as `(class label, mass)` pairs. The
/// group defaults to the one named in the assignment file.
#[pyfunction]
#[pyo3(signature = (graph, assignment, group = None))]
fn holonomy_masses(graph: &PyGraph, assignment: PathBuf, group: Option<String>) -> PyResult<Vec<(String, f64)>> {
    let g = &graph.inner;
    let spec = AssignmentSpec::load(assignment).map_err(py_err)?;
    let grp = FiniteGroupSpec::builtin(group.as_deref().unwrap_or(&spec.group)).map_err(py_err)?;
    let a = EdgeAssignment::from_spec(g, &grp, &spec).map_err(py_err)?;
    let masses = holonomy_class_masses(g, &a, &grp).map_err(py_err)?;
    Ok(masses.into_iter().enumerate().map(|(c, m)| (grp.class_label(c), m)).collect())
}

#[pyfunction]
#[pyo3(signature = (length, mult = 1, kappa = 0.0))]
fn hyperbolic_mass(length: f64, mult: u32, kappa: f64) -> PyResult<f64> {
    hyperbolic_class_mass(length, mult, kappa).map_err(py_err)
}

/// Runs an experiment config, writes its outputs to `out` and returns
/// whether every check and test passed.
#[pyfunction]
fn verify(py: Python<'_>, config: PathBuf, out: PathBuf) -> PyResult<bool> {
    let cfg = ExperimentConfig::load(&config).map_err(py_err)?;
    let summary = py.detach(|| run_to_dir(&cfg, &out)).map_err(py_err)?;
    Ok(summary.all_pass)
}

#[pymodule]
fn loopforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(holonomy_masses, m)?)?;
    m.add_function(wrap_pyfunction!(hyperbolic_mass, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
