//! Return factors along geodesics and the exact Poisson means of geodesic
//! classes.
//!
//! For an oriented edge `(x, y)`, `r^{x,y}(s)` is the generating function of
//! first returns to `y` that never step back toward `x` in the universal
//! cover, with `s` marking pairs of steps. It solves
//!
//! ```text
//! r^{x,y}(s) = s Σ_{z ~ y, z ≠ x} P^y_z P^z_y / (1 - r^{y,z}(s))
//! ```
//!
//! and `ρ^{x,y} = 1 / (1 - r^{x,y})`. The least solution is reached by
//! monotone iteration from zero.

use nalgebra::DMatrix;

use crate::analytics::quadrature::integrate;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg;
use crate::loops::GeodesicClass;

pub const RHO_TOLERANCE: f64 = 1e-13;
pub const RHO_MAX_ITERATIONS: usize = 1_000_000;

/// Oriented edges of a graph with a dense index.
#[derive(Debug, Clone)]
pub struct OrientedEdges {
    offset: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl OrientedEdges {
    pub fn new(g: &WeightedGraph) -> Self {
        let mut offset = Vec::with_capacity(g.len() + 1);
        let mut edges = Vec::new();
        for x in 0..g.len() {
            offset.push(edges.len());
            edges.extend(g.neighbors(x).iter().map(|&(y, _)| (x, y)));
        }
        offset.push(edges.len());
        OrientedEdges { offset, edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, i: usize) -> (usize, usize) {
        self.edges[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Edges leaving `x`, as a range of indices.
    pub fn out_of(&self, x: usize) -> std::ops::Range<usize> {
        self.offset[x]..self.offset[x + 1]
    }

    pub fn index(&self, x: usize, y: usize) -> Option<usize> {
        let r = self.out_of(x);
        self.edges[r.clone()].binary_search(&(x, y)).ok().map(|i| r.start + i)
    }
}

/// Solution of the return-factor system at a given `s`.
#[derive(Debug, Clone)]
pub struct RhoTable {
    pub s: f64,
    pub edges: OrientedEdges,
    /// `r^{x,y}(s)` indexed like `edges`.
    pub r: Vec<f64>,
    /// `ρ^{x,y}(s)` indexed like `edges`.
    pub rho: Vec<f64>,
    /// `r^x(s) = s Σ_y P^x_y P^y_x ρ^{x,y}(s)`.
    pub rx: Vec<f64>,
    /// `ρ^x(s) = 1 / (1 - r^x(s))`.
    pub rhox: Vec<f64>,
    pub iterations: usize,
}

impl RhoTable {
    pub fn r_of(&self, x: usize, y: usize) -> Option<f64> {
        self.edges.index(x, y).map(|i| self.r[i])
    }

    pub fn rho_of(&self, x: usize, y: usize) -> Option<f64> {
        self.edges.index(x, y).map(|i| self.rho[i])
    }
}

/// Solves the fixed-point system by monotone (Jacobi) iteration from `r ≡ 0`.
pub fn solve_rho(g: &WeightedGraph, s: f64) -> Result<RhoTable> {
    solve_rho_traced(g, s, |_, _| {})
}

/// As [`solve_rho`], calling `trace(iteration, r)` after every sweep.
pub fn solve_rho_traced<F: FnMut(usize, &[f64])>(g: &WeightedGraph, s: f64, mut trace: F) -> Result<RhoTable> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ParameterOutOfRange(s));
    }
    let edges = OrientedEdges::new(g);
    let m = edges.len();
    // per edge (x,y): list of (index of (y,z), s·P^y_z P^z_y) for z ≠ x
    let terms: Vec<Vec<(usize, f64)>> = edges
        .iter()
        .map(|(x, y)| {
            edges
                .out_of(y)
                .filter(|&j| edges.edge(j).1 != x)
                .map(|j| {
                    let z = edges.edge(j).1;
                    (j, s * g.p(y, z) * g.p(z, y))
                })
                .collect()
        })
        .collect();

    let mut r = vec![0.0; m];
    let mut next = vec![0.0; m];
    let mut iterations = 0;
    loop {
        if iterations >= RHO_MAX_ITERATIONS {
            return Err(Error::NonConvergence(RHO_MAX_ITERATIONS));
        }
        iterations += 1;
        let mut delta: f64 = 0.0;
        for (i, t) in terms.iter().enumerate() {
            let v: f64 = t.iter().map(|&(j, w)| w / (1.0 - r[j])).sum();
            if !(v < 1.0) || !v.is_finite() {
                return Err(Error::NonConvergence(iterations));
            }
            delta = delta.max(v - r[i]);
            next[i] = v;
        }
        std::mem::swap(&mut r, &mut next);
        trace(iterations, &r);
        if delta < RHO_TOLERANCE {
            break;
        }
    }
    let rho: Vec<f64> = r.iter().map(|v| 1.0 / (1.0 - v)).collect();
    let rx: Vec<f64> = (0..g.len())
        .map(|x| s * edges.out_of(x).map(|i| {
            let y = edges.edge(i).1;
            g.p(x, y) * g.p(y, x) * rho[i]
        }).sum::<f64>())
        .collect();
    let rhox = rx.iter().map(|v| 1.0 / (1.0 - v)).collect();
    Ok(RhoTable { s, edges, r, rho, rx, rhox, iterations })
}

/// Weight `P^x_y ρ^{x,y}(1)` of one step of a geodesic.
fn step_weight(g: &WeightedGraph, table: &RhoTable, x: usize, y: usize) -> Result<f64> {
    table
        .rho_of(x, y)
        .map(|rho| g.p(x, y) * rho)
        .ok_or_else(|| Error::EdgeNotInGraph(g.name(x).into(), g.name(y).into()))
}

/// Poisson mean of the number of loops whose geodesic reduction is `class`:
/// `(1/mult) (Π_{primitive steps} P^{e-}_{e+} ρ^{e-,e+})^mult`.
pub fn geodesic_class_mass(g: &WeightedGraph, class: &GeodesicClass) -> Result<f64> {
    let table = solve_rho(g, 1.0)?;
    geodesic_class_mass_with(g, &table, class)
}

/// As [`geodesic_class_mass`] with a precomputed `s = 1` table.
pub fn geodesic_class_mass_with(g: &WeightedGraph, table: &RhoTable, class: &GeodesicClass) -> Result<f64> {
    let GeodesicClass::Loop(l) = class else {
        return Err(Error::TrivialClass);
    };
    let prim = l.primitive();
    let n = prim.len();
    let mut q = 1.0;
    for i in 0..n {
        q *= step_weight(g, table, prim[i], prim[(i + 1) % n])?;
    }
    Ok(q.powi(l.mult() as i32) / l.mult() as f64)
}

/// Summed mass of every primitive geodesic class with all its powers, for a
/// primitive class of weight `q`: `Σ_m q^m / m = -log(1 - q)`.
pub fn class_series_mass(g: &WeightedGraph, table: &RhoTable, primitive: &[usize]) -> Result<f64> {
    let n = primitive.len();
    let mut q = 1.0;
    for i in 0..n {
        q *= step_weight(g, table, primitive[i], primitive[(i + 1) % n])?;
    }
    Ok(-(-q).ln_1p())
}

/// Weighted non-backtracking matrix on oriented edges:
/// `B[(x,y),(y,z)] = P^y_z ρ^{y,z}(1)` for `z ≠ x`.
pub fn weighted_non_backtracking(g: &WeightedGraph, table: &RhoTable) -> DMatrix<f64> {
    let e = &table.edges;
    let mut b = DMatrix::zeros(e.len(), e.len());
    for (i, (x, y)) in e.iter().enumerate() {
        for j in e.out_of(y) {
            let z = e.edge(j).1;
            if z != x {
                b[(i, j)] = g.p(y, z) * table.rho[j];
            }
        }
    }
    b
}

/// Total mass of all non-contractible loops, `-log det(I - B)` with `B` the
/// weighted non-backtracking matrix: every closed non-backtracking cycle of
/// oriented edges is one geodesic class counted with its powers.
pub fn geodesic_total_mass(g: &WeightedGraph) -> Result<f64> {
    let table = solve_rho(g, 1.0)?;
    let b = weighted_non_backtracking(g, &table);
    let n = b.nrows();
    Ok(-linalg::log_det_positive(&(DMatrix::identity(n, n) - b))?)
}

/// Integrand `Σ_x (ρ^x(s) - 1)/s`, with its limit `Σ_x Σ_y P^x_y P^y_x` at 0.
pub fn contractible_integrand(g: &WeightedGraph, s: f64) -> Result<f64> {
    if s == 0.0 {
        let mut v = 0.0;
        for x in 0..g.len() {
            for &(y, _) in g.neighbors(x) {
                v += g.p(x, y) * g.p(y, x);
            }
        }
        return Ok(v);
    }
    let t = solve_rho(g, s)?;
    Ok(t.rhox.iter().map(|r| (r - 1.0) / s).sum())
}

pub const CONTRACTIBLE_ABS_TOL: f64 = 1e-10;

/// Poisson mean of the number of loops homotopic to a point:
/// `½ Σ_x ∫_0^1 (ρ^x(s) - 1)/s ds`.
///
/// `ρ^x(s)` counts returns to `x` with `s` marking pairs of steps, so the
/// integral weighs a contractible based loop of length `2k` by `1/k`; the
/// loop measure weighs it by `1/(2k)`, hence the factor one half.
pub fn contractible_mass(g: &WeightedGraph) -> Result<f64> {
    let mut failure = None;
    let integral = integrate(
        |s| match contractible_integrand(g, s) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        CONTRACTIBLE_ABS_TOL,
        0.0,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(0.5 * integral?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::UnbasedLoop;
    use approx::assert_relative_eq;

    fn triangle_rho() -> f64 {
        // ρ² - 9ρ + 9 = 0, smaller root
        (9.0 - 45f64.sqrt()) / 2.0
    }

    #[test]
    fn two_vertex_at_one() {
        let g = WeightedGraph::two_vertex();
        let t = solve_rho(&g, 1.0).unwrap();
        assert_eq!(t.r, vec![0.0, 0.0]);
        assert_eq!(t.rho, vec![1.0, 1.0]);
        assert_relative_eq!(t.rx[0], 0.25);
        assert_relative_eq!(t.rhox[0], 4.0 / 3.0);
    }

    #[test]
    fn triangle_root() {
        let g = WeightedGraph::triangle(1.0).unwrap();
        let t = solve_rho(&g, 1.0).unwrap();
        for &v in &t.rho {
            assert!((v - triangle_rho()).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn s_zero_and_out_of_range() {
        let g = WeightedGraph::petersen(0.5).unwrap();
        let t = solve_rho(&g, 0.0).unwrap();
        assert!(t.r.iter().all(|&v| v == 0.0));
        assert!(t.rho.iter().all(|&v| v == 1.0));
        assert_eq!(solve_rho(&g, 1.5).unwrap_err(), Error::ParameterOutOfRange(1.5));
    }

    #[test]
    fn iteration_is_monotone_and_increasing_in_s() {
        let g = WeightedGraph::complete(4, 0.2).unwrap();
        let mut prev: Vec<f64> = Vec::new();
        solve_rho_traced(&g, 1.0, |_, r| {
            if !prev.is_empty() {
                assert!(r.iter().zip(&prev).all(|(a, b)| a >= b));
            }
            prev = r.to_vec();
        })
        .unwrap();
        let lo = solve_rho(&g, 0.4).unwrap();
        let hi = solve_rho(&g, 0.8).unwrap();
        assert!(lo.rho.iter().zip(&hi.rho).all(|(a, b)| a <= b));
        assert!(hi.r.iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn triangle_class_masses() {
        let g = WeightedGraph::triangle(1.0).unwrap();
        let q = triangle_rho() / 3.0;
        let abc = GeodesicClass::Loop(UnbasedLoop::from_cyclic_word(&[0, 1, 2]));
        assert_relative_eq!(geodesic_class_mass(&g, &abc).unwrap(), q.powi(3), max_relative = 1e-12);
        let abc2 = GeodesicClass::Loop(UnbasedLoop::from_cyclic_word(&[0, 1, 2, 0, 1, 2]));
        assert_relative_eq!(geodesic_class_mass(&g, &abc2).unwrap(), q.powi(6) / 2.0, max_relative = 1e-12);
        assert!((q.powi(3) - 0.055728).abs() < 1e-6);
        assert!((q.powi(6) / 2.0 - 0.0015528).abs() < 1e-7);
        assert_eq!(geodesic_class_mass(&g, &GeodesicClass::Trivial), Err(Error::TrivialClass));
    }

    #[test]
    fn contractible_examples() {
        let g = WeightedGraph::two_vertex();
        assert!((contractible_mass(&g).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-8);
        let t = WeightedGraph::triangle(1.0).unwrap();
        let q = triangle_rho() / 3.0;
        let want = (27.0f64 / 16.0).ln() + 2.0 * (1.0 - q.powi(3)).ln();
        assert!((contractible_mass(&t).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn geodesic_total_on_triangle() {
        let t = WeightedGraph::triangle(1.0).unwrap();
        let q = triangle_rho() / 3.0;
        let want = -2.0 * (1.0 - q.powi(3)).ln();
        assert!((geodesic_total_mass(&t).unwrap() - want).abs() < 1e-12);
        // a tree has no geodesic loops
        assert!(geodesic_total_mass(&WeightedGraph::two_vertex()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn integrand_is_continuous_at_zero() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let at0 = contractible_integrand(&g, 0.0).unwrap();
        let near = contractible_integrand(&g, 1e-7).unwrap();
        assert!((at0 - near).abs() < 1e-6);
    }
}
