//! Wilson's algorithm extended to produce a rooted spanning tree together
//! with a Poisson loop ensemble.
//!
//! The walk phase runs loop-erased random walks toward the growing tree and
//! keeps, for each vertex `x` that ends up on the tree, the based loop `l_x`
//! formed by everything erased at `x`. The splitting phase cuts each `l_x`
//! into its excursions from `x` and regroups them along the cycles of a
//! uniform random permutation, which realises the partition law
//! `Π (n_i - 1)! / n_x!`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{RootedSpanningTree, WeightedGraph};
use crate::loops::{BasedLoop, UnbasedLoop};

/// Circuit breaker on the total number of chain steps in one sample.
pub const MAX_STEPS: u64 = 1_000_000_000;

/// Reproducible random stream: stream `i` of a master seed.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `0..n`, drawn through `u64` so that the sequence
    /// does not depend on the platform word size.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n as u64) as usize
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Multiset of unbased loops, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopEnsemble {
    loops: Vec<UnbasedLoop>,
}

impl LoopEnsemble {
    pub fn new(mut loops: Vec<UnbasedLoop>) -> Self {
        loops.sort();
        LoopEnsemble { loops }
    }

    pub fn loops(&self) -> &[UnbasedLoop] {
        &self.loops
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn into_loops(self) -> Vec<UnbasedLoop> {
        self.loops
    }
}

/// Cumulative row distributions `(P^x_·, P^x_Δ)` for inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct StepTable {
    rows: Vec<Vec<(f64, usize)>>,
    killed: Vec<bool>,
}

impl StepTable {
    pub fn new(g: &WeightedGraph) -> Self {
        let rows = (0..g.len())
            .map(|x| {
                let mut acc = 0.0;
                g.neighbors(x)
                    .iter()
                    .map(|&(y, _)| {
                        acc += g.p(x, y);
                        (acc, y)
                    })
                    .collect()
            })
            .collect();
        let killed = g.kappa().iter().map(|&k| k > 0.0).collect();
        StepTable { rows, killed }
    }

    /// Next state given a uniform draw `u`; `None` is the cemetery.
    pub fn step(&self, x: usize, u: f64) -> Option<usize> {
        let row = &self.rows[x];
        let i = row.partition_point(|&(c, _)| c <= u);
        match row.get(i) {
            Some(&(_, y)) => Some(y),
            // without killing the row sums to one up to rounding
            None if !self.killed[x] => row.last().map(|&(_, y)| y),
            None => None,
        }
    }
}

/// Incremental chronological loop erasure.
///
/// Each path entry keeps the excursions erased at it so far; when the walk
/// closes a cycle at path position `i`, everything above `i` (with its own
/// pending excursions) becomes one more excursion of `path[i]`.
#[derive(Debug, Default)]
struct Eraser {
    path: Vec<usize>,
    pending: Vec<Vec<usize>>,
    position: Vec<Option<usize>>,
}

impl Eraser {
    fn new(n: usize) -> Self {
        Eraser { path: Vec::new(), pending: Vec::new(), position: vec![None; n] }
    }

    fn start(&mut self, x: usize) {
        debug_assert!(self.path.is_empty());
        self.push(x);
    }

    fn push(&mut self, x: usize) {
        self.position[x] = Some(self.path.len());
        self.path.push(x);
        self.pending.push(Vec::new());
    }

    fn visit(&mut self, v: usize) {
        match self.position[v] {
            Some(i) => {
                let mut excursion = vec![v];
                for j in i + 1..self.path.len() {
                    excursion.extend_from_slice(&self.pending[j]);
                    excursion.push(self.path[j]);
                    self.position[self.path[j]] = None;
                }
                self.path.truncate(i + 1);
                self.pending.truncate(i + 1);
                self.pending[i].extend_from_slice(&excursion);
            }
            None => self.push(v),
        }
    }

    /// Drains the self-avoiding path and the based loop at each path vertex.
    fn finish(&mut self) -> (Vec<usize>, Vec<(usize, Vec<usize>)>) {
        for &x in &self.path {
            self.position[x] = None;
        }
        let path = std::mem::take(&mut self.path);
        let pending = std::mem::take(&mut self.pending);
        let loops = path
            .iter()
            .zip(pending)
            .filter(|(_, l)| !l.is_empty())
            .map(|(&x, l)| (x, l))
            .collect();
        (path, loops)
    }
}

/// Loop-erasure output: the self-avoiding path (terminal last, `None` for the
/// cemetery) and the based loop erased at each path vertex, in path order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasedTrajectory {
    pub path: Vec<Option<usize>>,
    pub loops: Vec<(usize, BasedLoop)>,
}

impl ErasedTrajectory {
    /// Re-inserts the erased loops into the path.
    pub fn reconstruct(&self) -> Vec<Option<usize>> {
        let mut out = Vec::new();
        for &site in &self.path {
            if let Some(x) = site {
                if let Some((_, l)) = self.loops.iter().find(|(b, _)| *b == x) {
                    out.extend(l.path().iter().map(|&v| Some(v)));
                }
            }
            out.push(site);
        }
        out
    }
}

/// Chronological loop erasure of a trajectory whose last element is the
/// terminal site (a tree vertex, or `None` for the cemetery).
pub fn chronological_loop_erasure(trajectory: &[Option<usize>]) -> Result<ErasedTrajectory> {
    let (terminal, walk) = trajectory
        .split_last()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let walk = walk
        .iter()
        .map(|s| s.ok_or_else(|| Error::InvalidArgument("cemetery before the end of the trajectory".into())))
        .collect::<Result<Vec<_>>>()?;
    let n = walk.iter().copied().chain(*terminal).max().map_or(0, |m| m + 1);
    let mut eraser = Eraser::new(n);
    let mut it = walk.iter();
    if let Some(&x0) = it.next() {
        eraser.start(x0);
        for &v in it {
            eraser.visit(v);
        }
    }
    let (path, loops) = eraser.finish();
    let loops = loops
        .into_iter()
        .map(|(x, l)| Ok((x, BasedLoop::new(l)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut path: Vec<Option<usize>> = path.into_iter().map(Some).collect();
    path.push(*terminal);
    Ok(ErasedTrajectory { path, loops })
}

/// Walk phase of Wilson's algorithm with an arbitrary step source.
///
/// `step(x)` returns the next state of the chain from `x`, `None` for the
/// cemetery. Returns the tree and the based loops `l_x`.
pub fn wilson_walks<F>(
    g: &WeightedGraph,
    order: &[usize],
    mut step: F,
) -> Result<(RootedSpanningTree, Vec<(usize, BasedLoop)>)>
where
    F: FnMut(usize) -> Option<usize>,
{
    check_order(g, order)?;
    let n = g.len();
    let mut in_tree = vec![false; n];
    let mut parent = vec![None; n];
    let mut based = Vec::new();
    let mut eraser = Eraser::new(n);
    let mut steps: u64 = 0;

    for &start in order {
        if in_tree[start] {
            continue;
        }
        eraser.start(start);
        let mut cur = start;
        let terminal = loop {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::NonTermination(MAX_STEPS));
            }
            match step(cur) {
                None => break None,
                Some(v) if in_tree[v] => break Some(v),
                Some(v) => {
                    eraser.visit(v);
                    cur = v;
                }
            }
        };
        let (path, loops) = eraser.finish();
        for (i, &x) in path.iter().enumerate() {
            parent[x] = path.get(i + 1).copied().or(terminal);
            in_tree[x] = true;
        }
        for (x, l) in loops {
            based.push((x, BasedLoop::new(l)?));
        }
    }
    Ok((RootedSpanningTree { parent }, based))
}

/// Cuts a based loop into its excursions from the base vertex.
pub fn excursions(l: &BasedLoop) -> Vec<&[usize]> {
    let path = l.path();
    let base = l.base();
    let mut cuts: Vec<usize> = path.iter().enumerate().filter(|(_, &v)| v == base).map(|(i, _)| i).collect();
    cuts.push(path.len());
    cuts.windows(2).map(|w| &path[w[0]..w[1]]).collect()
}

/// Regroups the excursions of `l` along the cycles of `perm`, each cycle read
/// from its smallest element.
pub fn split_with_permutation(l: &BasedLoop, perm: &[usize]) -> Result<Vec<UnbasedLoop>> {
    let exc = excursions(l);
    if perm.len() != exc.len() {
        return Err(Error::InvalidArgument(format!(
            "permutation of size {} for {} excursions",
            perm.len(),
            exc.len()
        )));
    }
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut word = Vec::new();
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            word.extend_from_slice(exc[j]);
            j = perm[j];
        }
        if j != i {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        out.push(UnbasedLoop::from_cyclic_word(&word));
    }
    Ok(out)
}

/// Uniform permutation of `0..n` by Fisher–Yates.
pub fn random_permutation(n: usize, rng: &mut RandomSource) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        p.swap(i, j);
    }
    p
}

/// Splits a loop based at `base` into unbased loops.
pub fn split_based_loop(l: &BasedLoop, base: usize, rng: &mut RandomSource) -> Result<Vec<UnbasedLoop>> {
    if l.base() != base {
        return Err(Error::NotALoopAtBase);
    }
    let k = excursions(l).len();
    let perm = random_permutation(k, rng);
    split_with_permutation(l, &perm)
}

/// One joint sample (tree, loop ensemble).
pub fn wilson_sample(
    g: &WeightedGraph,
    order: &[usize],
    rng: &mut RandomSource,
) -> Result<(RootedSpanningTree, LoopEnsemble)> {
    let table = StepTable::new(g);
    wilson_sample_with(g, order, &table, rng)
}

/// Same as [`wilson_sample`] with a prebuilt step table.
pub fn wilson_sample_with(
    g: &WeightedGraph,
    order: &[usize],
    table: &StepTable,
    rng: &mut RandomSource,
) -> Result<(RootedSpanningTree, LoopEnsemble)> {
    let (tree, based) = {
        let rng = &mut *rng;
        wilson_walks(g, order, |x| table.step(x, rng.uniform()))?
    };
    let mut loops = Vec::new();
    for (x, l) in &based {
        loops.extend(split_based_loop(l, *x, rng)?);
    }
    Ok((tree, LoopEnsemble::new(loops)))
}

/// Runs `replicas` independent samples, replica `i` on stream `i` of `seed`,
/// and maps each through `f`. Results come back in replica order whatever
/// the thread scheduling.
pub fn sample_replicas<T, F>(
    g: &WeightedGraph,
    order: &[usize],
    seed: u64,
    replicas: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&RootedSpanningTree, &LoopEnsemble) -> T + Sync,
{
    check_order(g, order)?;
    let table = StepTable::new(g);
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomSource::new(seed, i as u64);
            let (tree, ens) = wilson_sample_with(g, order, &table, &mut rng)?;
            Ok(f(&tree, &ens))
        })
        .collect()
}

/// Declared vertex order `0..n`.
pub fn default_order(g: &WeightedGraph) -> Vec<usize> {
    (0..g.len()).collect()
}

fn check_order(g: &WeightedGraph, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; g.len()];
    if order.len() != g.len() {
        return Err(Error::InvalidOrder);
    }
    for &x in order {
        if x >= g.len() || std::mem::replace(&mut seen[x], true) {
            return Err(Error::InvalidOrder);
        }
    }
    Ok(())
}
