//! End-to-end verification run: sample, compare with exact masses, write
//! reports.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::rho::{contractible_mass, geodesic_class_mass_with, geodesic_total_mass, solve_rho};
use crate::error::{Error, Result};
use crate::graph::{RootedSpanningTree, WeightedGraph};
use crate::harness::enumerate::{for_each_loop, geodesic_classes, tail_bound};
use crate::harness::output::{class_json, fmt_f64, write_csv, write_ensemble_line};
use crate::harness::stats::{bonferroni, chi_square, correlation, poisson_fit, TestEntry};
use crate::holonomy::{holonomy_class_masses, AssignmentSpec, EdgeAssignment, FiniteGroupSpec};
use crate::loops::{GeodesicClass, UnbasedLoop};
use crate::wilson::{default_order, sample_replicas};

/// Spanning trees are tested only when there are at most this many.
pub const MAX_TREES: u64 = 100_000;
/// Exact-vs-enumerated comparisons allow this much round-off.
pub const ROUND_OFF: f64 = 1e-12;

fn default_replicas() -> usize {
    10_000
}
fn default_max_len() -> usize {
    12
}
fn default_geodesic_max_len() -> usize {
    6
}
fn default_significance() -> f64 {
    0.01
}
fn default_min_class_mass() -> f64 {
    0.01
}

/// Experiment description; relative paths are resolved against the config
/// file's directory.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<PathBuf>,
    /// Overrides the group named in the assignment file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    /// Loop enumeration cutoff for the exact oracles; 0 disables it.
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    /// Geodesic classes up to this length are listed and tested.
    #[serde(default = "default_geodesic_max_len")]
    pub geodesic_max_len: usize,
    #[serde(default = "default_significance")]
    pub significance: f64,
    /// Classes with smaller Poisson mean are reported but not fitted.
    #[serde(default = "default_min_class_mass")]
    pub min_class_mass: f64,
    /// Wilson vertex order by name; the declared order by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    #[serde(default)]
    pub dump_ensemble: bool,
}

impl ExperimentConfig {
    /// Minimal config around a graph file.
    pub fn for_graph(graph: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            graph: graph.into(),
            assignment: None,
            group: None,
            replicas: default_replicas(),
            seed: 0,
            max_len: default_max_len(),
            geodesic_max_len: default_geodesic_max_len(),
            significance: default_significance(),
            min_class_mass: default_min_class_mass(),
            order: None,
            dump_ensemble: false,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.graph = base.join(&cfg.graph);
        cfg.assignment = cfg.assignment.map(|a| base.join(a));
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::ConfigParse(format!("significance must lie in (0, 1), got {}", self.significance)));
        }
        if !(self.min_class_mass >= 0.0) {
            return Err(Error::ConfigParse(format!("min_class_mass must be non-negative, got {}", self.min_class_mass)));
        }
        Ok(())
    }
}

/// Deterministic pass/fail comparison.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn abs(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (observed - expected).abs() <= tolerance;
        Check { name: name.into(), observed, expected, tolerance, pass }
    }

    /// `0 ≤ expected - observed ≤ tail` up to round-off.
    fn bracket(name: impl Into<String>, observed: f64, expected: f64, tail: f64) -> Self {
        let gap = expected - observed;
        let pass = gap >= -ROUND_OFF * expected.abs().max(1.0) && gap <= tail + ROUND_OFF * expected.abs().max(1.0);
        Check { name: name.into(), observed, expected, tolerance: tail, pass }
    }
}

/// Test entry together with its Bonferroni verdict.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Verdict {
    #[serde(flatten)]
    pub test: TestEntry,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub spectral_radius: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MassSummary {
    pub total: f64,
    pub contractible: f64,
    pub geodesic_total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub seed: u64,
    pub replicas: usize,
    pub max_len: usize,
    pub geodesic_max_len: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub graph: GraphSummary,
    pub masses: MassSummary,
    pub significance: f64,
    pub bonferroni_threshold: f64,
    pub checks: Vec<Check>,
    pub tests: Vec<Verdict>,
    pub all_pass: bool,
}

/// Per-class Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub label: String,
    pub length: usize,
    pub mult: usize,
    pub size: usize,
    pub mass_exact: f64,
    pub mass_enumerated: Option<f64>,
    pub mass_montecarlo: f64,
    pub stderr: f64,
}

/// Everything computed by a run, before it is written out.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub classes: Vec<ClassRow>,
    pub holonomy: Vec<ClassRow>,
    /// `(tree key, exact probability, count)` in enumeration order.
    pub trees: Vec<(String, f64, u64)>,
}

struct Replica {
    tree: RootedSpanningTree,
    loops: Vec<UnbasedLoop>,
}

/// Running first and second moments plus, optionally, the full count series.
struct Tally {
    sum: u64,
    sum_sq: u64,
    series: Option<Vec<u64>>,
}

impl Tally {
    fn new(keep: bool, replicas: usize) -> Self {
        Tally { sum: 0, sum_sq: 0, series: keep.then(|| Vec::with_capacity(replicas)) }
    }

    fn push(&mut self, c: u64) {
        self.sum += c;
        self.sum_sq += c * c;
        if let Some(s) = &mut self.series {
            s.push(c);
        }
    }

    fn mean_and_stderr(&self, n: usize) -> (f64, f64) {
        if n == 0 {
            return (f64::NAN, f64::NAN);
        }
        let nf = n as f64;
        let mean = self.sum as f64 / nf;
        if n < 2 {
            return (mean, f64::NAN);
        }
        let var = (self.sum_sq as f64 - nf * mean * mean) / (nf - 1.0);
        (mean, (var.max(0.0) / nf).sqrt())
    }
}

fn resolve_order(g: &WeightedGraph, order: &Option<Vec<String>>) -> Result<Vec<usize>> {
    match order {
        None => Ok(default_order(g)),
        Some(names) => names.iter().map(|n| g.vertex(n)).collect(),
    }
}

fn load_holonomy(cfg: &ExperimentConfig, g: &WeightedGraph) -> Result<Option<(FiniteGroupSpec, EdgeAssignment)>> {
    let Some(path) = &cfg.assignment else {
        return Ok(None);
    };
    let spec = AssignmentSpec::load(path)?;
    let group = FiniteGroupSpec::builtin(cfg.group.as_deref().unwrap_or(&spec.group))?;
    let a = EdgeAssignment::from_spec(g, &group, &spec)?;
    Ok(Some((group, a)))
}

/// Runs the experiment without touching the filesystem except to read
/// the graph and assignment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(cfg, |_, _| Ok(()))
}

/// As [`run_experiment`], calling `sink` on every replica in order.
pub fn run_experiment_with<S>(cfg: &ExperimentConfig, mut sink: S) -> Result<ExperimentReport>
where
    S: FnMut(&RootedSpanningTree, &[UnbasedLoop]) -> Result<()>,
{
    cfg.validate()?;
    let g = WeightedGraph::load(&cfg.graph)?;
    let holonomy = load_holonomy(cfg, &g)?;
    let order = resolve_order(&g, &cfg.order)?;
    let n = cfg.replicas;

    // exact side
    let total = g.total_loop_mass()?;
    let contractible = contractible_mass(&g)?;
    let geodesic_total = geodesic_total_mass(&g)?;
    let table = solve_rho(&g, 1.0)?;
    let mut class_list = vec![GeodesicClass::Trivial];
    if cfg.geodesic_max_len >= 3 {
        class_list.extend(geodesic_classes(&g, cfg.geodesic_max_len)?);
    }
    let class_mass: Vec<f64> = class_list
        .iter()
        .map(|c| match c {
            GeodesicClass::Trivial => Ok(contractible),
            _ => geodesic_class_mass_with(&g, &table, c),
        })
        .collect::<Result<_>>()?;
    let class_index: HashMap<GeodesicClass, usize> =
        class_list.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let hol_mass = match &holonomy {
        Some((grp, a)) => holonomy_class_masses(&g, a, grp)?,
        None => Vec::new(),
    };

    let mut checks = vec![Check::abs(
        "mass_partition",
        contractible + geodesic_total,
        total,
        1e-8 * total.max(1.0),
    )];
    if !hol_mass.is_empty() {
        checks.push(Check::abs("holonomy_completeness", hol_mass.iter().sum(), total, 1e-10 * total.max(1.0)));
    }

    // enumeration oracle
    let mut enumerated = None;
    let mut tail = None;
    let mut class_enum = vec![0.0; class_list.len()];
    let mut hol_enum = vec![0.0; hol_mass.len()];
    if cfg.max_len >= 2 {
        let mut sum = 0.0;
        let mut failure = None;
        for_each_loop(&g, cfg.max_len, |v| {
            sum += v.mass;
            let reduced = crate::loops::reduce_closed_walk(v.word);
            if let Some(&i) = class_index.get(&reduced) {
                class_enum[i] += v.mass;
            }
            if let Some((grp, a)) = &holonomy {
                match a.holonomy_class(&g, grp, v.word) {
                    Ok(c) => hol_enum[c] += v.mass,
                    Err(e) => {
                        failure = Some(e);
                        return false;
                    }
                }
            }
            true
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        let t = tail_bound(&g, cfg.max_len);
        checks.push(Check::bracket("enumeration_bracket", sum, total, t));
        for (i, c) in class_list.iter().enumerate() {
            if c.length() <= cfg.max_len {
                checks.push(Check::bracket(
                    format!("geodesic_fiber {}", class_json(&g, c)),
                    class_enum[i],
                    class_mass[i],
                    t,
                ));
            }
        }
        if let Some((grp, _)) = &holonomy {
            for (c, m) in hol_mass.iter().enumerate() {
                checks.push(Check::bracket(format!("holonomy_fiber {}", grp.class_label(c)), hol_enum[c], *m, t));
            }
        }
        enumerated = Some(sum);
        tail = Some(t);
    }

    // Monte Carlo side
    let replicas: Vec<Replica> = if n > 0 {
        sample_replicas(&g, &order, cfg.seed, n, |tree, ens| Replica {
            tree: tree.clone(),
            loops: ens.loops().to_vec(),
        })?
    } else {
        Vec::new()
    };
    let fitted: Vec<bool> = class_mass.iter().map(|&m| m >= cfg.min_class_mass).collect();
    let hol_fitted: Vec<bool> = hol_mass.iter().map(|&m| m >= cfg.min_class_mass).collect();
    let mut tallies: Vec<Tally> = fitted.iter().map(|&f| Tally::new(f, n)).collect();
    let mut hol_tallies: Vec<Tally> = hol_fitted.iter().map(|&f| Tally::new(f, n)).collect();
    let mut tree_counts: HashMap<RootedSpanningTree, u64> = HashMap::new();
    let mut counts = vec![0u64; class_list.len()];
    let mut hol_counts = vec![0u64; hol_mass.len()];
    for r in &replicas {
        sink(&r.tree, &r.loops)?;
        *tree_counts.entry(r.tree.clone()).or_default() += 1;
        counts.iter_mut().for_each(|c| *c = 0);
        hol_counts.iter_mut().for_each(|c| *c = 0);
        for l in &r.loops {
            if let Some(&i) = class_index.get(&l.geodesic_reduce()) {
                counts[i] += 1;
            }
            if let Some((grp, a)) = &holonomy {
                hol_counts[a.holonomy_class(&g, grp, l.word())?] += 1;
            }
        }
        for (t, &c) in tallies.iter_mut().zip(&counts) {
            t.push(c);
        }
        for (t, &c) in hol_tallies.iter_mut().zip(&hol_counts) {
            t.push(c);
        }
    }

    let mut tests: Vec<TestEntry> = Vec::new();
    let mut trees = Vec::new();
    if n > 0 {
        if let Ok(all) = g.enumerate_rooted_trees(MAX_TREES) {
            let mut probs = Vec::with_capacity(all.len());
            let mut observed = Vec::with_capacity(all.len());
            for t in &all {
                let p = g.spanning_tree_probability(t)?;
                let c = tree_counts.get(t).copied().unwrap_or(0);
                trees.push((t.key(&g), p, c));
                probs.push(p);
                observed.push(c);
            }
            let unexpected: u64 = tree_counts.iter().filter(|(t, _)| !all.contains(t)).map(|(_, c)| c).sum();
            checks.push(Check::abs("trees_valid", unexpected as f64, 0.0, 0.0));
            let chi = chi_square(&observed, &probs)?;
            tests.push(TestEntry {
                name: "trees.chi_square".into(),
                statistic: chi.statistic,
                observed: chi.statistic,
                expected: chi.dof as f64,
                p_value: chi.p_value,
            });
        }
    }

    let corr_tol = if n > 0 { 0.02f64.max(5.0 / (n as f64).sqrt()) } else { 0.0 };
    let mut fit_family = |labels: &[String], masses: &[f64], tallies: &[Tally], family: &str| -> Result<()> {
        let mut series: Vec<(usize, &Vec<u64>)> = Vec::new();
        for (i, t) in tallies.iter().enumerate() {
            if let Some(s) = &t.series {
                if n >= 2 {
                    let fit = poisson_fit(s, masses[i])?;
                    let name = format!("{family} {}", labels[i]);
                    checks.push(Check {
                        name: format!("{name}.within_4se"),
                        observed: fit.sample_mean,
                        expected: fit.expected_mean,
                        tolerance: 4.0 * fit.stderr,
                        pass: fit.within_standard_errors(4.0),
                    });
                    tests.extend(fit.entries(&name));
                    series.push((i, s));
                }
            }
        }
        for (a, (i, si)) in series.iter().enumerate() {
            for (j, sj) in &series[a + 1..] {
                let rho = correlation(si, sj);
                checks.push(Check::abs(
                    format!("{family} correlation {} {}", labels[*i], labels[*j]),
                    rho,
                    0.0,
                    corr_tol,
                ));
            }
        }
        Ok(())
    };
    let class_labels: Vec<String> = class_list.iter().map(|c| class_json(&g, c)).collect();
    fit_family(&class_labels, &class_mass, &tallies, "geodesic")?;
    let hol_labels: Vec<String> = match &holonomy {
        Some((grp, _)) => (0..hol_mass.len()).map(|c| grp.class_label(c)).collect(),
        None => Vec::new(),
    };
    fit_family(&hol_labels, &hol_mass, &hol_tallies, "holonomy")?;

    let threshold = bonferroni(cfg.significance, tests.len());
    let verdicts: Vec<Verdict> =
        tests.into_iter().map(|t| Verdict { pass: t.p_value >= threshold, test: t }).collect();
    let all_pass = checks.iter().all(|c| c.pass) && verdicts.iter().all(|v| v.pass);

    let classes = class_list
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (mc, se) = tallies[i].mean_and_stderr(n);
            ClassRow {
                label: class_labels[i].clone(),
                length: c.length(),
                mult: c.mult(),
                size: 1,
                mass_exact: class_mass[i],
                mass_enumerated: enumerated.map(|_| class_enum[i]),
                mass_montecarlo: mc,
                stderr: se,
            }
        })
        .collect();
    let holonomy_rows = match &holonomy {
        Some((grp, _)) => hol_mass
            .iter()
            .enumerate()
            .map(|(c, &m)| {
                let (mc, se) = hol_tallies[c].mean_and_stderr(n);
                ClassRow {
                    label: grp.class_label(c),
                    length: 0,
                    mult: 0,
                    size: grp.classes()[c].len(),
                    mass_exact: m,
                    mass_enumerated: enumerated.map(|_| hol_enum[c]),
                    mass_montecarlo: mc,
                    stderr: se,
                }
            })
            .collect(),
        None => Vec::new(),
    };

    let summary = Summary {
        seed: cfg.seed,
        replicas: n,
        max_len: cfg.max_len,
        geodesic_max_len: cfg.geodesic_max_len,
        group: holonomy.as_ref().map(|(grp, _)| grp.name().to_string()),
        graph: GraphSummary { vertices: g.len(), edges: g.num_edges(), spectral_radius: g.spectral_radius() },
        masses: MassSummary { total, contractible, geodesic_total, enumerated, tail_bound: tail },
        significance: cfg.significance,
        bonferroni_threshold: threshold,
        checks,
        tests: verdicts,
        all_pass,
    };
    Ok(ExperimentReport { summary, classes, holonomy: holonomy_rows, trees })
}

pub const CLASS_HEADER: [&str; 6] = ["class_word", "length", "mult", "mass_exact", "mass_montecarlo", "stderr"];
pub const HOLONOMY_HEADER: [&str; 6] = ["class", "size", "mass_exact", "mass_enumerated", "mass_montecarlo", "stderr"];

pub fn class_rows(rows: &[ClassRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.length.to_string(),
                r.mult.to_string(),
                fmt_f64(r.mass_exact),
                fmt_f64(r.mass_montecarlo),
                fmt_f64(r.stderr),
            ]
        })
        .collect()
}

pub fn holonomy_rows(rows: &[ClassRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.size.to_string(),
                fmt_f64(r.mass_exact),
                fmt_f64(r.mass_enumerated.unwrap_or(f64::NAN)),
                fmt_f64(r.mass_montecarlo),
                fmt_f64(r.stderr),
            ]
        })
        .collect()
}

impl ExperimentReport {
    /// Writes `summary.json`, `classes.csv`, `trees.csv`, `fits.csv` and,
    /// with an assignment, `holonomy.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(&self.summary)?;
        json.push('\n');
        std::fs::write(dir.join("summary.json"), json)?;
        write_csv(&dir.join("classes.csv"), &CLASS_HEADER, &class_rows(&self.classes))?;
        let tree_rows: Vec<Vec<String>> = self
            .trees
            .iter()
            .map(|(k, p, c)| {
                let freq = if self.summary.replicas > 0 { *c as f64 / self.summary.replicas as f64 } else { f64::NAN };
                vec![k.clone(), fmt_f64(*p), c.to_string(), fmt_f64(freq)]
            })
            .collect();
        write_csv(&dir.join("trees.csv"), &["tree", "probability_exact", "count", "frequency"], &tree_rows)?;
        let fit_rows: Vec<Vec<String>> = self
            .summary
            .tests
            .iter()
            .map(|v| {
                vec![
                    v.test.name.clone(),
                    fmt_f64(v.test.statistic),
                    fmt_f64(v.test.observed),
                    fmt_f64(v.test.expected),
                    fmt_f64(v.test.p_value),
                    fmt_f64(self.summary.bonferroni_threshold),
                    v.pass.to_string(),
                ]
            })
            .collect();
        write_csv(
            &dir.join("fits.csv"),
            &["test", "statistic", "observed", "expected", "p_value", "threshold", "pass"],
            &fit_rows,
        )?;
        if !self.holonomy.is_empty() {
            write_csv(&dir.join("holonomy.csv"), &HOLONOMY_HEADER, &holonomy_rows(&self.holonomy))?;
        }
        Ok(())
    }
}

/// Runs `cfg` and writes every output into `dir`, including
/// `ensemble.jsonl` when `cfg.dump_ensemble` is set.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<Summary> {
    std::fs::create_dir_all(dir)?;
    let report = if cfg.dump_ensemble {
        let g = WeightedGraph::load(&cfg.graph)?;
        let mut out = BufWriter::new(File::create(dir.join("ensemble.jsonl"))?);
        let r = run_experiment_with(cfg, |t, l| write_ensemble_line(&mut out, &g, t, l))?;
        std::io::Write::flush(&mut out)?;
        r
    } else {
        run_experiment(cfg)?
    };
    report.write(dir)?;
    Ok(report.summary)
}

/// Tree counts keyed by the compact tree text, for callers that only need
/// frequencies.
pub fn tree_frequencies(report: &ExperimentReport) -> BTreeMap<String, u64> {
    report.trees.iter().map(|(k, _, c)| (k.clone(), *c)).collect()
}
