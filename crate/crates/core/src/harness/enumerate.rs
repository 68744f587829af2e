//! Exhaustive enumeration of unbased loops up to a length cutoff.
//!
//! Canonical words are exactly the necklaces over the vertex alphabet, so a
//! prenecklace depth-first search (Fredricksen–Kessler–Maiorana) restricted
//! to graph edges visits every loop once. A prenecklace of length `t` with
//! period `p` is a necklace iff `p | t`.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::loops::{GeodesicClass, UnbasedLoop};

pub const MAX_VERTICES: usize = 8;
/// Geodesic classes grow like the non-backtracking spectral radius, so the
/// class enumeration accepts larger graphs.
pub const MAX_GEODESIC_VERTICES: usize = 64;
pub const MAX_LENGTH: usize = 40;
/// Cap on loops materialized by [`enumerate_loops`].
pub const MAX_MATERIALIZED: usize = 5_000_000;

/// A loop seen by the enumeration visitor.
#[derive(Debug, Clone, Copy)]
pub struct LoopView<'a> {
    /// Canonical word.
    pub word: &'a [usize],
    pub mult: usize,
    /// `μ(l) = Π P / mult`.
    pub mass: f64,
}

impl LoopView<'_> {
    pub fn to_loop(&self) -> UnbasedLoop {
        UnbasedLoop::from_canonical(self.word.to_vec(), self.word.len() / self.mult)
    }
}

fn check_limits(g: &WeightedGraph, max_len: usize, non_backtracking: bool) -> Result<()> {
    let max_vertices = if non_backtracking { MAX_GEODESIC_VERTICES } else { MAX_VERTICES };
    if g.len() > max_vertices {
        return Err(Error::TooLarge(format!(
            "{} vertices (enumeration supports at most {max_vertices})",
            g.len()
        )));
    }
    if max_len > MAX_LENGTH {
        return Err(Error::TooLarge(format!("length cutoff {max_len} exceeds {MAX_LENGTH}")));
    }
    if max_len < 2 {
        return Err(Error::InvalidArgument(format!("length cutoff must be at least 2, got {max_len}")));
    }
    Ok(())
}

struct Search<F> {
    n: usize,
    max_len: usize,
    non_backtracking: bool,
    /// Row-major transition probabilities.
    p: Vec<f64>,
    /// Sorted neighbour lists.
    nbrs: Vec<Vec<usize>>,
    word: Vec<usize>,
    /// `prod[t]` = product of `P` along `word[0..=t]`.
    prod: Vec<f64>,
    visit: F,
}

impl<F: FnMut(LoopView<'_>) -> bool> Search<F> {
    /// Emits `word[..t]` if it is a necklace that closes up.
    #[inline]
    fn emit(&mut self, t: usize, p: usize) -> bool {
        let (first, last) = (self.word[0], self.word[t - 1]);
        let closing = self.p[last * self.n + first];
        if t < 2 || t % p != 0 || closing == 0.0 {
            return true;
        }
        if self.non_backtracking && (t < 3 || self.word[t - 2] == first || self.word[1] == last) {
            return true;
        }
        let mult = t / p;
        let mass = self.prod[t - 1] * closing / mult as f64;
        (self.visit)(LoopView { word: &self.word[..t], mult, mass })
    }

    /// Extends the prenecklace `word[..t]` of period `p`; returns `false`
    /// when the visitor asked to stop.
    fn dfs(&mut self, t: usize, p: usize) -> bool {
        if !self.emit(t, p) {
            return false;
        }
        if t == self.max_len {
            return true;
        }
        let last = self.word[t - 1];
        let lo = self.word[t - p];
        let back = if self.non_backtracking && t >= 2 { self.word[t - 2] } else { usize::MAX };
        let row = last * self.n;
        let leaf = t + 1 == self.max_len;
        for k in 0..self.nbrs[last].len() {
            let y = self.nbrs[last][k];
            if y < lo || y == back {
                continue;
            }
            self.word[t] = y;
            self.prod[t] = self.prod[t - 1] * self.p[row + y];
            let period = if y == lo { p } else { t + 1 };
            let go_on = if leaf { self.emit(t + 1, period) } else { self.dfs(t + 1, period) };
            if !go_on {
                return false;
            }
        }
        true
    }
}

fn search<F: FnMut(LoopView<'_>) -> bool>(
    g: &WeightedGraph,
    max_len: usize,
    non_backtracking: bool,
    visit: F,
) -> Result<bool> {
    check_limits(g, max_len, non_backtracking)?;
    let n = g.len();
    let mut p = vec![0.0; n * n];
    for x in 0..n {
        for &(y, _) in g.neighbors(x) {
            p[x * n + y] = g.p(x, y);
        }
    }
    let mut s = Search {
        n,
        max_len,
        non_backtracking,
        p,
        nbrs: (0..n).map(|x| g.neighbors(x).iter().map(|&(y, _)| y).collect()).collect(),
        word: vec![0; max_len],
        prod: vec![1.0; max_len],
        visit,
    };
    for c in 0..n {
        s.word[0] = c;
        s.prod[0] = 1.0;
        if !s.dfs(1, 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Calls `visit` for every unbased loop of length `2..=max_len`, in
/// lexicographic order of canonical words. The visitor returns `false` to
/// stop early; the result reports whether the walk completed.
pub fn for_each_loop<F: FnMut(LoopView<'_>) -> bool>(g: &WeightedGraph, max_len: usize, visit: F) -> Result<bool> {
    search(g, max_len, false, visit)
}

/// Calls `visit` for every nontrivial geodesic class (cyclically
/// non-backtracking canonical word) of length `3..=max_len`.
pub fn for_each_geodesic_class<F: FnMut(LoopView<'_>) -> bool>(
    g: &WeightedGraph,
    max_len: usize,
    visit: F,
) -> Result<bool> {
    search(g, max_len.max(2), true, visit)
}

pub fn geodesic_classes(g: &WeightedGraph, max_len: usize) -> Result<Vec<GeodesicClass>> {
    let mut out = Vec::new();
    for_each_geodesic_class(g, max_len, |v| {
        out.push(GeodesicClass::Loop(v.to_loop()));
        out.len() < MAX_MATERIALIZED
    })?;
    if out.len() >= MAX_MATERIALIZED {
        return Err(Error::TooLarge(format!("more than {MAX_MATERIALIZED} geodesic classes")));
    }
    Ok(out)
}

/// `|X| r^{L+1} / ((L+1)(1-r))`, an upper bound on the mass of loops longer
/// than `L` since `Σ_x (P^k)_{xx} ≤ |X| r^k` for the symmetrizable kernel.
pub fn tail_bound(g: &WeightedGraph, max_len: usize) -> f64 {
    let r = g.spectral_radius();
    let next = (max_len + 1) as f64;
    g.len() as f64 * r.powf(next) / (next * (1.0 - r))
}

/// All loops up to a cutoff with their masses.
#[derive(Debug, Clone)]
pub struct EnumeratedSpectrum {
    pub max_len: usize,
    pub loops: Vec<(UnbasedLoop, f64)>,
    /// Sum of the listed masses (fixed lexicographic summation order).
    pub total: f64,
    pub tail_bound: f64,
}

pub fn enumerate_loops(g: &WeightedGraph, max_len: usize) -> Result<EnumeratedSpectrum> {
    let mut loops = Vec::new();
    let mut total = 0.0;
    let complete = for_each_loop(g, max_len, |v| {
        total += v.mass;
        loops.push((v.to_loop(), v.mass));
        loops.len() < MAX_MATERIALIZED
    })?;
    if !complete {
        return Err(Error::TooLarge(format!(
            "more than {MAX_MATERIALIZED} loops up to length {max_len}; use for_each_loop instead"
        )));
    }
    Ok(EnumeratedSpectrum { max_len, loops, total, tail_bound: tail_bound(g, max_len) })
}

/// Mass of all loops up to the cutoff without materializing them.
pub fn enumerated_mass(g: &WeightedGraph, max_len: usize) -> Result<f64> {
    let mut total = 0.0;
    for_each_loop(g, max_len, |v| {
        total += v.mass;
        true
    })?;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::least_rotation;

    fn brute_force(g: &WeightedGraph, max_len: usize) -> Vec<UnbasedLoop> {
        let n = g.len();
        let mut out = Vec::new();
        for len in 2..=max_len {
            let mut w = vec![0; len];
            loop {
                let ok = (0..len).all(|i| g.is_edge(w[i], w[(i + 1) % len]));
                if ok && least_rotation(&w) == 0 {
                    out.push(UnbasedLoop::from_cyclic_word(&w));
                }
                let mut i = len;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    w[i] += 1;
                    if w[i] < n {
                        break;
                    }
                    w[i] = 0;
                }
                if w.iter().all(|&v| v == 0) {
                    break;
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn two_vertex_length_two() {
        let g = WeightedGraph::two_vertex();
        let s = enumerate_loops(&g, 2).unwrap();
        assert_eq!(s.loops.len(), 1);
        assert_eq!(s.loops[0].0.word(), &[0, 1]);
        assert!((s.loops[0].1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_vertex_long_cutoff() {
        let g = WeightedGraph::two_vertex();
        let s = enumerate_loops(&g, 40).unwrap();
        // Σ_k (1/4)^k / k over even lengths 2k ≤ 40, i.e. ln(4/3) minus a tiny tail
        assert!((s.total - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((s.total - 0.287682).abs() < 1e-6);
        assert!(s.total + s.tail_bound >= g.total_loop_mass().unwrap());
    }

    #[test]
    fn triangle_length_three() {
        let g = WeightedGraph::triangle(1.0).unwrap();
        let s = enumerate_loops(&g, 3).unwrap();
        let twos: Vec<f64> = s.loops.iter().filter(|(l, _)| l.len() == 2).map(|(_, m)| *m).collect();
        let threes: Vec<f64> = s.loops.iter().filter(|(l, _)| l.len() == 3).map(|(_, m)| *m).collect();
        assert_eq!(twos.len(), 3);
        assert_eq!(threes.len(), 2);
        assert!(twos.iter().all(|m| (m - 1.0 / 9.0).abs() < 1e-15));
        assert!(threes.iter().all(|m| (m - 1.0 / 27.0).abs() < 1e-15));
    }

    #[test]
    fn matches_brute_force() {
        for g in [WeightedGraph::triangle(1.0).unwrap(), WeightedGraph::complete(4, 0.5).unwrap(), WeightedGraph::cycle(5, 1.0).unwrap()] {
            let mut got: Vec<UnbasedLoop> = enumerate_loops(&g, 7).unwrap().loops.into_iter().map(|(l, _)| l).collect();
            got.sort();
            assert_eq!(got, brute_force(&g, 7));
            for l in &got {
                let m = l.mass(&g).unwrap();
                assert!(m > 0.0);
            }
        }
    }

    #[test]
    fn masses_and_multiplicities_agree_with_loop_mass() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        for (l, m) in enumerate_loops(&g, 8).unwrap().loops {
            assert!((l.mass(&g).unwrap() - m).abs() <= 1e-15 * m.max(1e-300));
            assert_eq!(l, UnbasedLoop::from_cyclic_word(l.word()));
        }
    }

    #[test]
    fn geodesic_classes_are_reduced() {
        let g = WeightedGraph::complete(4, 1.0).unwrap();
        let classes = geodesic_classes(&g, 6).unwrap();
        for c in &classes {
            assert_eq!(UnbasedLoop::from_cyclic_word(c.word()).geodesic_reduce(), c.clone());
        }
        // K4 has 4 triangles, each in 2 orientations
        assert_eq!(classes.iter().filter(|c| c.length() == 3).count(), 8);
        let tri = WeightedGraph::triangle(1.0).unwrap();
        let classes = geodesic_classes(&tri, 9).unwrap();
        assert_eq!(classes.len(), 6);
    }

    #[test]
    fn guards() {
        assert!(matches!(enumerate_loops(&WeightedGraph::complete(9, 1.0).unwrap(), 3), Err(Error::TooLarge(_))));
        assert!(matches!(enumerate_loops(&WeightedGraph::two_vertex(), 41), Err(Error::TooLarge(_))));
        assert!(enumerate_loops(&WeightedGraph::two_vertex(), 1).is_err());
        let petersen = WeightedGraph::petersen(1.0).unwrap();
        assert!(for_each_loop(&petersen, 5, |_| true).is_err());
        // 12 pentagons, each in two orientations
        let classes = geodesic_classes(&petersen, 5).unwrap();
        assert_eq!(classes.len(), 24);
    }
}
