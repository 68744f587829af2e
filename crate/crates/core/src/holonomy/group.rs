//! Finite groups given by a multiplication table and explicit unitary
//! irreducible representations.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

/// Unitary irreducible representation, one matrix per group element.
#[derive(Debug, Clone)]
pub struct Irrep {
    pub name: String,
    pub matrices: Vec<DMatrix<Complex64>>,
}

impl Irrep {
    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }
}

/// Validated finite group with conjugacy classes and character table.
#[derive(Debug, Clone)]
pub struct FiniteGroupSpec {
    name: String,
    elements: Vec<String>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    irreps: Vec<Irrep>,
    /// Normalized characters `tr π(g) / dim π`, indexed `[irrep][class]`.
    characters: Vec<Vec<Complex64>>,
}

impl FiniteGroupSpec {
    /// Validates a user-supplied group: multiplication table, then irreps.
    pub fn new(name: impl Into<String>, elements: Vec<String>, mul: Vec<Vec<usize>>, irreps: Vec<Irrep>) -> Result<Self> {
        let name = name.into();
        let n = elements.len();
        let bad = |m: String| Error::InvalidGroup(format!("{name}: {m}"));
        if n == 0 {
            return Err(bad("no elements".into()));
        }
        if mul.len() != n || mul.iter().any(|row| row.len() != n) {
            return Err(bad("multiplication table has the wrong shape".into()));
        }
        // Latin square
        for i in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for j in 0..n {
                let (a, b) = (mul[i][j], mul[j][i]);
                if a >= n || b >= n || std::mem::replace(&mut row_seen[a], true) || std::mem::replace(&mut col_seen[b], true) {
                    return Err(bad("table is not a Latin square".into()));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mul[e][g] == g && mul[g][e] == g))
            .ok_or_else(|| bad("no identity element".into()))?;
        let inv: Vec<usize> = (0..n)
            .map(|g| (0..n).find(|&h| mul[g][h] == identity).expect("latin square has inverses"))
            .collect();
        // exhaustive associativity for small groups, strided sample otherwise
        let stride = if n <= 24 { 1 } else { n / 24 + 1 };
        for a in (0..n).step_by(stride) {
            for b in 0..n {
                for c in (0..n).step_by(stride) {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(bad(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }

        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for g in 0..n {
            if class_of[g] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> = (0..n).map(|h| mul[mul[h][g]][inv[h]]).collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                class_of[m] = classes.len();
            }
            classes.push(members);
        }

        let mut group = FiniteGroupSpec {
            name,
            elements,
            mul,
            inv,
            identity,
            classes,
            class_of,
            irreps: Vec::new(),
            characters: Vec::new(),
        };
        group.set_irreps(irreps)?;
        Ok(group)
    }

    fn set_irreps(&mut self, irreps: Vec<Irrep>) -> Result<()> {
        let n = self.order();
        let bad = |m: String| Error::InvalidGroup(format!("{}: {m}", self.name));
        for rep in &irreps {
            let d = rep.dim();
            if rep.matrices.len() != n || d == 0 || rep.matrices.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(bad(format!("irrep {} has inconsistent matrices", rep.name)));
            }
            let eye = DMatrix::<Complex64>::identity(d, d);
            for (g, m) in rep.matrices.iter().enumerate() {
                if max_norm(&(m.adjoint() * m - &eye)) > TOL {
                    return Err(bad(format!("irrep {} is not unitary at {}", rep.name, self.elements[g])));
                }
            }
            for g in 0..n {
                for h in 0..n {
                    let lhs = &rep.matrices[self.mul[g][h]];
                    let rhs = &rep.matrices[g] * &rep.matrices[h];
                    if max_norm(&(lhs - rhs)) > TOL {
                        return Err(bad(format!(
                            "irrep {} is not a homomorphism at ({}, {})",
                            rep.name, self.elements[g], self.elements[h]
                        )));
                    }
                }
            }
        }
        let sum_sq: usize = irreps.iter().map(|r| r.dim() * r.dim()).sum();
        if sum_sq != n || irreps.len() != self.classes.len() {
            return Err(bad(format!(
                "{} irreps with Σ dim² = {sum_sq} for {} classes and order {n}",
                irreps.len(),
                self.classes.len()
            )));
        }
        let traces: Vec<Vec<Complex64>> = irreps
            .iter()
            .map(|r| self.classes.iter().map(|c| r.matrices[c[0]].trace()).collect())
            .collect();
        // row orthogonality: Σ_C |C|/|G| conj(tr_π) tr_π' = δ
        for (i, ti) in traces.iter().enumerate() {
            for (j, tj) in traces.iter().enumerate() {
                let s: Complex64 = self
                    .classes
                    .iter()
                    .enumerate()
                    .map(|(c, members)| ti[c].conj() * tj[c] * (members.len() as f64 / n as f64))
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (s - want).norm() > TOL {
                    return Err(bad(format!("characters {i} and {j} are not orthonormal")));
                }
            }
        }
        // column orthogonality: Σ_π conj(tr_π(C)) tr_π(D) = δ |G|/|C|
        for c in 0..self.classes.len() {
            for d in 0..self.classes.len() {
                let s: Complex64 = traces.iter().map(|t| t[c].conj() * t[d]).sum();
                let want = if c == d { n as f64 / self.classes[c].len() as f64 } else { 0.0 };
                if (s - want).norm() > TOL {
                    return Err(bad(format!("character columns {c} and {d} are not orthogonal")));
                }
            }
        }
        self.characters = traces
            .iter()
            .zip(&irreps)
            .map(|(t, r)| t.iter().map(|v| v / r.dim() as f64).collect())
            .collect();
        self.irreps = irreps;
        Ok(())
    }

    /// One of the built-in groups: `Z_n` (n ≤ 12), `S_3`, `D_4`.
    pub fn builtin(name: &str) -> Result<Self> {
        let key: String = name.chars().filter(|c| *c != '_').collect::<String>().to_ascii_uppercase();
        match key.as_str() {
            "S3" => dihedral(3, "S_3"),
            "D4" => dihedral(4, "D_4"),
            k if k.starts_with('Z') => match k[1..].parse::<usize>() {
                Ok(n) if (1..=12).contains(&n) => cyclic(n),
                _ => Err(Error::UnsupportedGroup(name.to_string())),
            },
            _ => Err(Error::UnsupportedGroup(name.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    /// Normalized character `χ_π(C)`.
    pub fn character(&self, irrep: usize, class: usize) -> Complex64 {
        self.characters[irrep][class]
    }

    /// Human-readable class label such as `{s,rs,r2s}`.
    pub fn class_label(&self, class: usize) -> String {
        let names: Vec<&str> = self.classes[class].iter().map(|&g| self.elements[g].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cyclic(n: usize) -> Result<FiniteGroupSpec> {
    let elements: Vec<String> = if n == 2 {
        vec!["1".into(), "-1".into()]
    } else {
        (0..n).map(|k| k.to_string()).collect()
    };
    let mul = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    let irreps = (0..n)
        .map(|j| Irrep {
            name: format!("chi{j}"),
            matrices: (0..n)
                .map(|k| {
                    let z = if (j * k) % n == 0 {
                        c(1.0)
                    } else if 2 * ((j * k) % n) == n {
                        c(-1.0)
                    } else {
                        Complex64::from_polar(1.0, 2.0 * PI * (j * k) as f64 / n as f64)
                    };
                    DMatrix::from_element(1, 1, z)
                })
                .collect(),
        })
        .collect();
    FiniteGroupSpec::new(format!("Z_{n}"), elements, mul, irreps)
}

/// Dihedral group of order `2n`; element `j·n + k` is `r^k s^j`.
fn dihedral(n: usize, name: &str) -> Result<FiniteGroupSpec> {
    let idx = |k: usize, j: usize| j * n + k;
    let mut elements = Vec::with_capacity(2 * n);
    for j in 0..2 {
        for k in 0..n {
            let r = match k {
                0 => String::new(),
                1 => "r".to_string(),
                _ => format!("r{k}"),
            };
            let s = if j == 1 { "s" } else { "" };
            let label = format!("{r}{s}");
            elements.push(if label.is_empty() { "e".to_string() } else { label });
        }
    }
    // (r^k s^j)(r^l s^m) = r^{k + (-1)^j l} s^{j+m}
    let mut mul = vec![vec![0; 2 * n]; 2 * n];
    for j in 0..2 {
        for k in 0..n {
            for m in 0..2 {
                for l in 0..n {
                    let rk = if j == 0 { (k + l) % n } else { (k + n - l) % n };
                    mul[idx(k, j)][idx(l, m)] = idx(rk, (j + m) % 2);
                }
            }
        }
    }
    let from_gens = |r: DMatrix<Complex64>, s: DMatrix<Complex64>| -> Vec<DMatrix<Complex64>> {
        let mut out = vec![DMatrix::zeros(r.nrows(), r.nrows()); 2 * n];
        let mut rk = DMatrix::identity(r.nrows(), r.nrows());
        for k in 0..n {
            out[idx(k, 0)] = rk.clone();
            out[idx(k, 1)] = &rk * &s;
            rk = &rk * &r;
        }
        out
    };
    let one = |v: f64| DMatrix::from_element(1, 1, c(v));
    let mut irreps = vec![
        Irrep { name: "trivial".into(), matrices: from_gens(one(1.0), one(1.0)) },
        Irrep { name: "sign".into(), matrices: from_gens(one(1.0), one(-1.0)) },
    ];
    if n % 2 == 0 {
        irreps.push(Irrep { name: "r-".into(), matrices: from_gens(one(-1.0), one(1.0)) });
        irreps.push(Irrep { name: "r-s-".into(), matrices: from_gens(one(-1.0), one(-1.0)) });
    }
    for h in 1..=(n - 1) / 2 {
        let theta = 2.0 * PI * h as f64 / n as f64;
        let (sn, cs) = theta.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c(cs), c(-sn), c(sn), c(cs)]);
        let refl = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        // snap round-off so the group relations hold exactly on the table
        let snap = |m: DMatrix<Complex64>| m.map(|z| Complex64::new(snap(z.re), snap(z.im)));
        irreps.push(Irrep {
            name: format!("rho{h}"),
            matrices: from_gens(rot, refl).into_iter().map(snap).collect(),
        });
    }
    FiniteGroupSpec::new(name, elements, mul, irreps)
}

fn snap(v: f64) -> f64 {
    for t in [0.0, 1.0, -1.0, 0.5, -0.5] {
        if (v - t).abs() < 1e-15 {
            return t;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2() {
        let g = FiniteGroupSpec::builtin("Z_2").unwrap();
        assert_eq!(g.elements(), &["1".to_string(), "-1".to_string()]);
        assert_eq!(g.irreps().len(), 2);
        assert_eq!(g.irreps().iter().map(|r| r.dim().pow(2)).sum::<usize>(), 2);
        assert_eq!(g.character(1, g.class_of(1)), c(-1.0));
    }

    #[test]
    fn s3_classes() {
        let g = FiniteGroupSpec::builtin("S_3").unwrap();
        let mut sizes: Vec<usize> = g.classes().iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 3]);
        let dims: Vec<usize> = g.irreps().iter().map(Irrep::dim).collect();
        assert_eq!(dims.iter().map(|d| d * d).sum::<usize>(), 6);
        assert!(dims.contains(&2));
    }

    #[test]
    fn d4_and_cyclic_groups_validate() {
        let g = FiniteGroupSpec::builtin("D_4").unwrap();
        assert_eq!(g.order(), 8);
        assert_eq!(g.classes().len(), 5);
        for n in 1..=12 {
            let z = FiniteGroupSpec::builtin(&format!("Z_{n}")).unwrap();
            assert_eq!(z.classes().len(), n);
        }
        assert!(matches!(FiniteGroupSpec::builtin("Z_13"), Err(Error::UnsupportedGroup(_))));
        assert!(matches!(FiniteGroupSpec::builtin("A_5"), Err(Error::UnsupportedGroup(_))));
    }

    #[test]
    fn broken_irrep_is_rejected() {
        let g = FiniteGroupSpec::builtin("S_3").unwrap();
        let mut irreps = g.irreps().to_vec();
        // swap two matrices of the 2-dimensional irrep
        let two = irreps.iter().position(|r| r.dim() == 2).unwrap();
        irreps[two].matrices.swap(1, 2);
        let r = FiniteGroupSpec::new("bad", g.elements().to_vec(), g.mul.clone(), irreps);
        assert!(matches!(r, Err(Error::InvalidGroup(_))));
        // missing irrep
        let r = FiniteGroupSpec::new("bad", g.elements().to_vec(), g.mul.clone(), g.irreps()[..2].to_vec());
        assert!(matches!(r, Err(Error::InvalidGroup(_))));
    }

    #[test]
    fn non_group_table_is_rejected() {
        // Latin square without associativity (loop of order 5)
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let names = (0..5).map(|i| i.to_string()).collect();
        assert!(matches!(FiniteGroupSpec::new("loop", names, t, Vec::new()), Err(Error::InvalidGroup(_))));
    }
}
