//! Poisson means of loops by holonomy class via twisted determinants.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::holonomy::assignment::EdgeAssignment;
use crate::holonomy::group::FiniteGroupSpec;
use crate::linalg::log_det_complex;

/// Imaginary parts below this are treated as round-off.
pub const IMAG_TOL: f64 = 1e-9;

/// `[P^{A,π}]^{x,i}_{y,j} = P^x_y π(A(x,y))_{ij}` as an `n·dim` square matrix.
pub fn extended_kernel(
    g: &WeightedGraph,
    a: &EdgeAssignment,
    group: &FiniteGroupSpec,
    irrep: usize,
) -> Result<DMatrix<Complex64>> {
    let rep = group
        .irreps()
        .get(irrep)
        .ok_or_else(|| Error::InvalidArgument(format!("no irrep with index {irrep}")))?;
    let d = rep.dim();
    let mut m = DMatrix::zeros(g.len() * d, g.len() * d);
    for x in 0..g.len() {
        for &(y, _) in g.neighbors(x) {
            let block = &rep.matrices[a.label(g, x, y)?] * Complex64::new(g.p(x, y), 0.0);
            m.view_mut((x * d, y * d), (d, d)).copy_from(&block);
        }
    }
    Ok(m)
}

/// Real `log det(I - P^{A,π})`.
pub fn twisted_log_det(g: &WeightedGraph, a: &EdgeAssignment, group: &FiniteGroupSpec, irrep: usize) -> Result<f64> {
    let k = extended_kernel(g, a, group, irrep)?;
    let n = k.nrows();
    let ld = log_det_complex(&(DMatrix::identity(n, n) - k))?;
    if ld.im.abs() >= IMAG_TOL {
        return Err(Error::NonRealDeterminant(ld.im));
    }
    Ok(ld.re)
}

/// `-(1/dim π) log det(I - P^{A,π}) = Σ_loops μ(ℓ) χ_π(hol ℓ)`.
pub fn character_weighted_mass(
    g: &WeightedGraph,
    a: &EdgeAssignment,
    group: &FiniteGroupSpec,
    irrep: usize,
) -> Result<f64> {
    let d = group.irreps().get(irrep).map_or(1, |r| r.dim());
    Ok(-twisted_log_det(g, a, group, irrep)? / d as f64)
}

/// Mass of loops with holonomy in each conjugacy class, in class order.
///
/// `μ(C) = -Σ_π conj(χ_π(C)) (|C|/|G|) dim π · log det(I - P^{A,π})` with
/// normalized characters.
pub fn holonomy_class_masses(g: &WeightedGraph, a: &EdgeAssignment, group: &FiniteGroupSpec) -> Result<Vec<f64>> {
    let log_dets: Vec<f64> = (0..group.irreps().len())
        .into_par_iter()
        .map(|i| twisted_log_det(g, a, group, i))
        .collect::<Result<_>>()?;
    let order = group.order() as f64;
    let mut out = Vec::with_capacity(group.classes().len());
    for (c, members) in group.classes().iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ld) in log_dets.iter().enumerate() {
            let dim = group.irreps()[i].dim() as f64;
            acc -= group.character(i, c).conj() * (members.len() as f64 / order * dim * ld);
        }
        if acc.im.abs() >= IMAG_TOL {
            return Err(Error::NonRealDeterminant(acc.im));
        }
        if acc.re < -IMAG_TOL {
            return Err(Error::NegativeMass(acc.re));
        }
        out.push(acc.re.max(0.0));
    }
    Ok(out)
}

pub fn holonomy_class_mass(
    g: &WeightedGraph,
    a: &EdgeAssignment,
    group: &FiniteGroupSpec,
    class: usize,
) -> Result<f64> {
    if class >= group.classes().len() {
        return Err(Error::InvalidArgument(format!("no conjugacy class with index {class}")));
    }
    Ok(holonomy_class_masses(g, a, group)?[class])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_irrep_recovers_total_mass() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let grp = FiniteGroupSpec::builtin("S_3").unwrap();
        let a = EdgeAssignment::with_identity_default(&g, &grp, [(0, 1, 1), (2, 3, 4)]).unwrap();
        let total = g.total_loop_mass().unwrap();
        assert!((character_weighted_mass(&g, &a, &grp, 0).unwrap() - total).abs() < 1e-13);
        let masses = holonomy_class_masses(&g, &a, &grp).unwrap();
        assert!((masses.iter().sum::<f64>() - total).abs() < 1e-12);
    }

    #[test]
    fn identity_assignment_puts_everything_in_the_identity_class() {
        let g = WeightedGraph::triangle(1.0).unwrap();
        let grp = FiniteGroupSpec::builtin("D_4").unwrap();
        let a = EdgeAssignment::identity(&g, &grp);
        let masses = holonomy_class_masses(&g, &a, &grp).unwrap();
        let e = grp.class_of(grp.identity());
        assert!((masses[e] - g.total_loop_mass().unwrap()).abs() < 1e-12);
        for (c, m) in masses.iter().enumerate() {
            if c != e {
                assert!(m.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z2_triangle_closed_form() {
        // single flipped edge: odd loops wind the triangle an odd number of times
        let g = WeightedGraph::triangle(1.0).unwrap();
        let grp = FiniteGroupSpec::builtin("Z_2").unwrap();
        let a = EdgeAssignment::with_identity_default(&g, &grp, [(0, 1, 1)]).unwrap();
        let masses = holonomy_class_masses(&g, &a, &grp).unwrap();
        // det(I - P^π) for the sign irrep: P = J/3 - I/3 with one sign flip
        let q: f64 = 1.0 / 3.0;
        let det_plus = (1.0 - 2.0 * q) * (1.0 + q) * (1.0 + q);
        let det_minus = (1.0 + 2.0 * q * q * q) - 3.0 * q * q;
        let want_minus = -0.5 * (det_plus.ln() - det_minus.ln());
        assert!((masses[1] - want_minus).abs() < 1e-13, "{} vs {want_minus}", masses[1]);
    }
}
