//! Based loops, unbased loops (rotation classes) and geodesic classes.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Closed walk `(x_0, …, x_{n-1})` whose last step returns to `x_0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasedLoop {
    path: Vec<usize>,
}

impl BasedLoop {
    pub fn new(path: Vec<usize>) -> Result<Self> {
        if path.len() < 2 {
            return Err(Error::LoopTooShort(path.len()));
        }
        Ok(BasedLoop { path })
    }

    /// Builds the loop and checks that every cyclic step is a graph edge.
    pub fn on_graph(g: &WeightedGraph, path: Vec<usize>) -> Result<Self> {
        let l = Self::new(path)?;
        check_steps(g, &l.path)?;
        Ok(l)
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn base(&self) -> usize {
        self.path[0]
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same loop started `k` steps later.
    pub fn rotate(&self, k: usize) -> BasedLoop {
        let mut path = self.path.clone();
        let n = path.len();
        path.rotate_left(k % n);
        BasedLoop { path }
    }

    pub fn canonicalize(&self) -> UnbasedLoop {
        UnbasedLoop::from_cyclic_word(&self.path)
    }
}

/// Rotation class of a based loop, stored as its lexicographically minimal
/// rotation together with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnbasedLoop {
    word: Vec<usize>,
    mult: usize,
}

impl UnbasedLoop {
    /// Canonical form of the cyclic word `w` (any rotation, length ≥ 1).
    pub fn from_cyclic_word(w: &[usize]) -> Self {
        let k = least_rotation(w);
        let mut word = Vec::with_capacity(w.len());
        word.extend_from_slice(&w[k..]);
        word.extend_from_slice(&w[..k]);
        let mult = word.len() / primitive_period(&word);
        UnbasedLoop { word, mult }
    }

    /// Trusted constructor for words already in canonical form.
    pub(crate) fn from_canonical(word: Vec<usize>, period: usize) -> Self {
        debug_assert_eq!(least_rotation(&word), 0);
        let mult = word.len() / period;
        UnbasedLoop { word, mult }
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn mult(&self) -> usize {
        self.mult
    }

    pub fn primitive(&self) -> &[usize] {
        &self.word[..self.word.len() / self.mult]
    }

    /// Iterator over the traversed oriented steps, including the closing one.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        cyclic_steps(&self.word)
    }

    pub fn names(&self, g: &WeightedGraph) -> Vec<String> {
        self.word.iter().map(|&x| g.name(x).to_string()).collect()
    }

    pub fn from_names(g: &WeightedGraph, names: &[String]) -> Result<Self> {
        let path = names.iter().map(|n| g.vertex(n)).collect::<Result<Vec<_>>>()?;
        Ok(BasedLoop::on_graph(g, path)?.canonicalize())
    }

    /// `μ(l) = (1/mult) Π_{steps} P^{x_i}_{x_{i+1}}`.
    pub fn mass(&self, g: &WeightedGraph) -> Result<f64> {
        let mut prod = 1.0;
        for (x, y) in self.steps() {
            if x >= g.len() || y >= g.len() {
                return Err(Error::InvalidArgument(format!("vertex index out of range in {:?}", self.word)));
            }
            let p = g.p(x, y);
            if p == 0.0 {
                return Err(Error::EdgeNotInGraph(g.name(x).into(), g.name(y).into()));
            }
            prod *= p;
        }
        Ok(prod / self.mult as f64)
    }

    pub fn geodesic_reduce(&self) -> GeodesicClass {
        reduce_closed_walk(&self.word)
    }
}

impl fmt::Display for UnbasedLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.word)
    }
}

/// Free-homotopy class of a loop: either trivial, or a cyclically
/// non-backtracking canonical word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeodesicClass {
    Trivial,
    Loop(UnbasedLoop),
}

impl GeodesicClass {
    pub fn is_trivial(&self) -> bool {
        matches!(self, GeodesicClass::Trivial)
    }

    /// `|γ|`; zero for the trivial class.
    pub fn length(&self) -> usize {
        match self {
            GeodesicClass::Trivial => 0,
            GeodesicClass::Loop(l) => l.len(),
        }
    }

    pub fn mult(&self) -> usize {
        match self {
            GeodesicClass::Trivial => 1,
            GeodesicClass::Loop(l) => l.mult(),
        }
    }

    pub fn word(&self) -> &[usize] {
        match self {
            GeodesicClass::Trivial => &[],
            GeodesicClass::Loop(l) => l.word(),
        }
    }

    /// Class from a cyclic word; rejects words that backtrack cyclically.
    pub fn from_word(g: &WeightedGraph, w: &[usize]) -> Result<Self> {
        if w.is_empty() {
            return Ok(GeodesicClass::Trivial);
        }
        check_steps(g, w)?;
        let n = w.len();
        if n < 3 || (0..n).any(|i| w[(i + n - 1) % n] == w[(i + 1) % n]) {
            return Err(Error::InvalidArgument(format!("word {w:?} backtracks")));
        }
        Ok(GeodesicClass::Loop(UnbasedLoop::from_cyclic_word(w)))
    }

    pub fn from_names(g: &WeightedGraph, names: &[String]) -> Result<Self> {
        let w = names.iter().map(|n| g.vertex(n)).collect::<Result<Vec<_>>>()?;
        Self::from_word(g, &w)
    }

    pub fn names(&self, g: &WeightedGraph) -> Vec<String> {
        self.word().iter().map(|&x| g.name(x).to_string()).collect()
    }
}

/// Reduces a closed walk (given without the repeated final vertex) to its
/// geodesic class by erasing backtracks `x y x → x`, cyclically.
pub fn reduce_closed_walk(w: &[usize]) -> GeodesicClass {
    if w.is_empty() {
        return GeodesicClass::Trivial;
    }
    // free reduction of the closed path x0 … x_{n-1} x0
    let mut stack: Vec<usize> = Vec::with_capacity(w.len() + 1);
    for &v in w.iter().chain(std::iter::once(&w[0])) {
        if stack.len() >= 2 && stack[stack.len() - 2] == v {
            stack.pop();
        } else {
            stack.push(v);
        }
    }
    // cyclic reduction: strip matching first and last steps
    let (mut lo, mut hi) = (0usize, stack.len() - 1);
    while hi - lo >= 2 && stack[lo + 1] == stack[hi - 1] {
        lo += 1;
        hi -= 1;
    }
    if hi - lo < 2 {
        return GeodesicClass::Trivial;
    }
    GeodesicClass::Loop(UnbasedLoop::from_cyclic_word(&stack[lo..hi]))
}

fn cyclic_steps(w: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let n = w.len();
    (0..n).map(move |i| (w[i], w[(i + 1) % n]))
}

fn check_steps(g: &WeightedGraph, w: &[usize]) -> Result<()> {
    for (x, y) in cyclic_steps(w) {
        if x >= g.len() || y >= g.len() {
            return Err(Error::InvalidArgument(format!("vertex index out of range in {w:?}")));
        }
        if !g.is_edge(x, y) {
            return Err(Error::EdgeNotInGraph(g.name(x).into(), g.name(y).into()));
        }
    }
    Ok(())
}

/// Start index of the lexicographically least rotation (Booth's algorithm).
pub fn least_rotation(s: &[usize]) -> usize {
    let n = s.len();
    if n < 2 {
        return 0;
    }
    let at = |i: isize| s[i as usize % n];
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k: isize = 0;
    for j in 1..2 * n as isize {
        let sj = at(j);
        let mut i = f[(j - k - 1) as usize];
        while i != -1 && sj != at(k + i + 1) {
            if sj < at(k + i + 1) {
                k = j - i - 1;
            }
            i = f[i as usize];
        }
        if sj != at(k + i + 1) {
            // only reachable with i == -1
            if sj < at(k) {
                k = j;
            }
            f[(j - k) as usize] = -1;
        } else {
            f[(j - k) as usize] = i + 1;
        }
    }
    k as usize % n
}

/// Smallest `p` dividing `n` such that `w` is the `n/p`-fold repetition of
/// its prefix of length `p`.
pub fn primitive_period(w: &[usize]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    // prefix function
    let mut pi = vec![0usize; n];
    for i in 1..n {
        let mut k = pi[i - 1];
        while k > 0 && w[i] != w[k] {
            k = pi[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        pi[i] = k;
    }
    let p = n - pi[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn naive_least_rotation(s: &[usize]) -> Vec<usize> {
        (0..s.len())
            .map(|k| s[k..].iter().chain(&s[..k]).copied().collect::<Vec<_>>())
            .min()
            .unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let l = BasedLoop::new(vec![A, B]).unwrap().canonicalize();
        assert_eq!((l.word(), l.mult()), (&[A, B][..], 1));
        let l = BasedLoop::new(vec![B, A]).unwrap().canonicalize();
        assert_eq!(l.word(), &[A, B]);
        let l = BasedLoop::new(vec![A, B, A, B]).unwrap().canonicalize();
        assert_eq!((l.word(), l.mult(), l.primitive()), (&[A, B, A, B][..], 2, &[A, B][..]));
        assert_eq!(BasedLoop::new(vec![A]), Err(Error::LoopTooShort(1)));
    }

    #[test]
    fn loop_mass_examples() {
        let g = WeightedGraph::two_vertex();
        let ab = BasedLoop::new(vec![A, B]).unwrap().canonicalize();
        assert_relative_eq!(ab.mass(&g).unwrap(), 0.25);
        let abab = BasedLoop::new(vec![A, B, A, B]).unwrap().canonicalize();
        assert_relative_eq!(abab.mass(&g).unwrap(), 1.0 / 32.0);
        let t = WeightedGraph::triangle(1.0).unwrap();
        let abc = BasedLoop::new(vec![A, B, C]).unwrap().canonicalize();
        assert_relative_eq!(abc.mass(&t).unwrap(), 1.0 / 27.0, epsilon = 1e-16);
        assert!(abc.mass(&g).is_err());
        let sq = WeightedGraph::cycle(4, 1.0).unwrap();
        let diag = UnbasedLoop::from_cyclic_word(&[A, C]);
        assert!(matches!(diag.mass(&sq), Err(Error::EdgeNotInGraph(..))));
    }

    #[test]
    fn mass_of_power_is_power_of_primitive() {
        let t = WeightedGraph::triangle(0.7).unwrap();
        let prim = UnbasedLoop::from_cyclic_word(&[A, B, C, B]);
        let q = prim.mass(&t).unwrap();
        for m in 1..5 {
            let word: Vec<usize> = prim.word().iter().copied().cycle().take(4 * m).collect();
            let l = UnbasedLoop::from_cyclic_word(&word);
            assert_eq!(l.mult(), m);
            assert_relative_eq!(l.mass(&t).unwrap(), q.powi(m as i32) / m as f64, max_relative = 1e-14);
        }
    }

    #[test]
    fn reduction_examples() {
        let ab = UnbasedLoop::from_cyclic_word(&[A, B]);
        assert_eq!(ab.geodesic_reduce(), GeodesicClass::Trivial);
        let abc = UnbasedLoop::from_cyclic_word(&[A, B, C]);
        assert_eq!(abc.geodesic_reduce(), GeodesicClass::Loop(abc.clone()));
        let abcb = UnbasedLoop::from_cyclic_word(&[A, B, C, B]);
        assert_eq!(abcb.geodesic_reduce(), GeodesicClass::Trivial);
        // backtrack across the wrap-around point
        let w = UnbasedLoop::from_cyclic_word(&[B, C, A, B, A]);
        assert_eq!(w.geodesic_reduce(), GeodesicClass::Loop(abc));
    }

    #[test]
    fn class_length_and_mult() {
        let t = WeightedGraph::triangle(1.0).unwrap();
        assert_eq!(GeodesicClass::Trivial.length(), 0);
        let g1 = GeodesicClass::from_word(&t, &[A, B, C]).unwrap();
        assert_eq!((g1.length(), g1.mult()), (3, 1));
        let g2 = GeodesicClass::from_word(&t, &[A, B, C, A, B, C]).unwrap();
        assert_eq!((g2.length(), g2.mult()), (6, 2));
        assert!(GeodesicClass::from_word(&t, &[A, B, A, C]).is_err());
    }

    proptest! {
        #[test]
        fn booth_matches_naive(s in proptest::collection::vec(0usize..3, 1..14)) {
            let k = least_rotation(&s);
            let rot: Vec<usize> = s[k..].iter().chain(&s[..k]).copied().collect();
            prop_assert_eq!(rot, naive_least_rotation(&s));
        }

        #[test]
        fn canonical_form_is_rotation_invariant(s in proptest::collection::vec(0usize..4, 2..16), k in 0usize..16) {
            let l = BasedLoop::new(s).unwrap();
            prop_assert_eq!(l.rotate(k).canonicalize(), l.canonicalize());
        }

        #[test]
        fn multiplicity_divides_length(p in proptest::collection::vec(0usize..3, 1..6), m in 1usize..5) {
            let w: Vec<usize> = p.iter().copied().cycle().take(p.len() * m).collect();
            let l = UnbasedLoop::from_cyclic_word(&w);
            prop_assert_eq!(l.len() % l.mult(), 0);
            prop_assert_eq!(l.mult() % m, 0);
            let rebuilt: Vec<usize> = l.primitive().iter().copied().cycle().take(l.len()).collect();
            prop_assert_eq!(rebuilt, l.word().to_vec());
        }
    }
}
