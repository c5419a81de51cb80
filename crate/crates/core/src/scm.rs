//! Discrete structural causal models.
//!
//! A [`DiscreteNetwork`] is a DAG over finite-domain variables with one
//! conditional probability table per variable. Interventions are applied by
//! graph mutilation: an intervened variable loses its incoming edges and is
//! pinned to the forced value.
//!
//! Values are stored 0-based. The human-facing label of value `v` is `v + 1`
//! ([`LABEL_OFFSET`]), which is what reward functions and feature maps see.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Offset between stored value codes and value labels.
pub const LABEL_OFFSET: usize = 1;

/// Tolerance for CPT row normalization.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScmError {
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("variable `{0}` is not intervenable")]
    NotIntervenable(String),
    #[error("value {value} is outside the domain of `{name}` (size {domain_size})")]
    ValueOutOfDomain {
        name: String,
        value: usize,
        domain_size: usize,
    },
}

/// On-disk description of a network. Names are resolved when the network is
/// built.
///
/// Parents of a variable are ordered by variable declaration order, and each
/// CPT is a flat row-major table: one row per joint parent assignment (first
/// parent most significant), one column per value of the child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    pub cpts: BTreeMap<String, Vec<f64>>,
    pub reward_parents: Vec<String>,
    #[serde(default)]
    pub intervenable: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub domain_size: usize,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, domain_size: usize) -> Self {
        Self {
            name: name.into(),
            domain_size,
        }
    }
}

/// One violated invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    DuplicateVariable(String),
    EmptyDomain(String),
    UnknownVariable {
        context: &'static str,
        name: String,
    },
    SelfLoop(String),
    DuplicateEdge(String, String),
    Cycle(Vec<String>),
    MissingCpt(String),
    CptShape {
        variable: String,
        expected: usize,
        found: usize,
    },
    NegativeEntry {
        variable: String,
        row: usize,
    },
    RowNotNormalized {
        variable: String,
        row: usize,
        sum: f64,
    },
    EmptyRewardParents,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::DuplicateVariable(n) => write!(f, "variable `{n}` declared twice"),
            Issue::EmptyDomain(n) => write!(f, "variable `{n}` has an empty domain"),
            Issue::UnknownVariable { context, name } => {
                write!(f, "{context} references unknown variable `{name}`")
            }
            Issue::SelfLoop(n) => write!(f, "self-loop on `{n}`"),
            Issue::DuplicateEdge(a, b) => write!(f, "edge {a} -> {b} listed twice"),
            Issue::Cycle(path) => write!(f, "cycle through {}", path.join(" -> ")),
            Issue::MissingCpt(n) => write!(f, "no CPT for `{n}`"),
            Issue::CptShape {
                variable,
                expected,
                found,
            } => write!(f, "CPT of `{variable}` has {found} entries, expected {expected}"),
            Issue::NegativeEntry { variable, row } => {
                write!(f, "CPT of `{variable}` row {row} has a negative entry")
            }
            Issue::RowNotNormalized { variable, row, sum } => {
                write!(f, "CPT of `{variable}` row {row} sums to {}, not 1", trim_float(*sum))
            }
            Issue::EmptyRewardParents => write!(f, "reward_parents is empty"),
        }
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Result of [`validate`]: empty when the network description is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every structural and numerical invariant of a network spec.
pub fn validate(spec: &NetworkSpec) -> ValidationReport {
    let mut issues = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, v) in spec.variables.iter().enumerate() {
        if index.insert(v.name.as_str(), i).is_some() {
            issues.push(Issue::DuplicateVariable(v.name.clone()));
        }
        if v.domain_size == 0 {
            issues.push(Issue::EmptyDomain(v.name.clone()));
        }
    }

    let n = spec.variables.len();
    let mut parents: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (from, to) in &spec.edges {
        let a = index.get(from.as_str()).copied();
        let b = index.get(to.as_str()).copied();
        for (name, idx) in [(from, a), (to, b)] {
            if idx.is_none() {
                issues.push(Issue::UnknownVariable {
                    context: "edge",
                    name: name.clone(),
                });
            }
        }
        if let (Some(a), Some(b)) = (a, b) {
            if a == b {
                issues.push(Issue::SelfLoop(from.clone()));
            } else if !parents[b].insert(a) {
                issues.push(Issue::DuplicateEdge(from.clone(), to.clone()));
            }
        }
    }

    let parent_lists: Vec<Vec<usize>> = parents.iter().map(|p| p.iter().copied().collect()).collect();
    if let Err(cycle) = topological_order(&parent_lists) {
        issues.push(Issue::Cycle(
            cycle.iter().map(|&i| spec.variables[i].name.clone()).collect(),
        ));
    }

    for name in spec.cpts.keys() {
        if !index.contains_key(name.as_str()) {
            issues.push(Issue::UnknownVariable {
                context: "cpts",
                name: name.clone(),
            });
        }
    }
    for (i, v) in spec.variables.iter().enumerate() {
        if v.domain_size == 0 {
            continue;
        }
        let Some(table) = spec.cpts.get(&v.name) else {
            issues.push(Issue::MissingCpt(v.name.clone()));
            continue;
        };
        let rows: usize = parent_lists[i].iter().map(|&p| spec.variables[p].domain_size).product();
        let expected = rows * v.domain_size;
        if table.len() != expected {
            issues.push(Issue::CptShape {
                variable: v.name.clone(),
                expected,
                found: table.len(),
            });
            continue;
        }
        for (row, probs) in table.chunks(v.domain_size).enumerate() {
            if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                issues.push(Issue::NegativeEntry {
                    variable: v.name.clone(),
                    row,
                });
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                issues.push(Issue::RowNotNormalized {
                    variable: v.name.clone(),
                    row,
                    sum,
                });
            }
        }
    }

    if spec.reward_parents.is_empty() {
        issues.push(Issue::EmptyRewardParents);
    }
    for (context, names) in [
        ("reward_parents", &spec.reward_parents),
        ("intervenable", &spec.intervenable),
    ] {
        for name in names {
            if !index.contains_key(name.as_str()) {
                issues.push(Issue::UnknownVariable {
                    context,
                    name: name.clone(),
                });
            }
        }
    }

    ValidationReport { issues }
}

/// Kahn's algorithm, lowest index first. On failure returns the variables
/// left on a cycle.
fn topological_order(parents: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (child, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(child);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indegree[i] > 0).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Variable {
    name: String,
    domain_size: usize,
    parents: Vec<usize>,
    children: Vec<usize>,
    // row-major: rows = joint parent assignment, cols = own value
    cpt: Vec<f64>,
}

impl Variable {
    fn row_index(&self, values: &[usize], domains: &[usize]) -> usize {
        self.parents.iter().fold(0, |acc, &p| acc * domains[p] + values[p])
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.cpt[row * self.domain_size..(row + 1) * self.domain_size]
    }
}

/// A validated discrete causal model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteNetwork {
    vars: Vec<Variable>,
    domains: Vec<usize>,
    topo: Vec<usize>,
    reward_parents: Vec<usize>,
    intervenable: BTreeSet<usize>,
    indexer: ParentIndexer,
}

impl DiscreteNetwork {
    pub fn from_spec(spec: &NetworkSpec) -> Result<Self, ScmError> {
        let report = validate(spec);
        if !report.is_valid() {
            return Err(ScmError::Invalid(report));
        }
        let index: HashMap<&str, usize> = spec
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let n = spec.variables.len();
        let mut parents = vec![BTreeSet::new(); n];
        for (from, to) in &spec.edges {
            parents[index[to.as_str()]].insert(index[from.as_str()]);
        }
        let parents: Vec<Vec<usize>> = parents.into_iter().map(|p| p.into_iter().collect()).collect();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let topo = topological_order(&parents).expect("validated acyclic");
        let vars = spec
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| Variable {
                name: v.name.clone(),
                domain_size: v.domain_size,
                parents: parents[i].clone(),
                children: children[i].clone(),
                cpt: spec.cpts[&v.name].clone(),
            })
            .collect();
        let domains: Vec<usize> = spec.variables.iter().map(|v| v.domain_size).collect();
        let reward_parents: Vec<usize> = spec.reward_parents.iter().map(|n| index[n.as_str()]).collect();
        let indexer = ParentIndexer::new(reward_parents.iter().map(|&p| domains[p]).collect());
        Ok(Self {
            vars,
            domains,
            topo,
            reward_parents,
            intervenable: spec.intervenable.iter().map(|n| index[n.as_str()]).collect(),
            indexer,
        })
    }

    /// Rebuilds the serializable description of this network.
    pub fn to_spec(&self) -> NetworkSpec {
        let name = |i: usize| self.vars[i].name.clone();
        NetworkSpec {
            variables: self
                .vars
                .iter()
                .map(|v| VariableSpec::new(v.name.clone(), v.domain_size))
                .collect(),
            edges: self
                .vars
                .iter()
                .enumerate()
                .flat_map(|(c, v)| v.parents.iter().map(move |&p| (p, c)))
                .map(|(p, c)| (name(p), name(c)))
                .collect(),
            cpts: self.vars.iter().map(|v| (v.name.clone(), v.cpt.clone())).collect(),
            reward_parents: self.reward_parents.iter().map(|&i| name(i)).collect(),
            intervenable: self.intervenable.iter().map(|&i| name(i)).collect(),
        }
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.vars[var].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn domain_size(&self, var: usize) -> usize {
        self.domains[var]
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.vars[var].parents
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn reward_parents(&self) -> &[usize] {
        &self.reward_parents
    }

    /// Intervenable variables in ascending index order.
    pub fn intervenable(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervenable.iter().copied()
    }

    pub fn is_intervenable(&self, var: usize) -> bool {
        self.intervenable.contains(&var)
    }

    pub fn parent_indexer(&self) -> &ParentIndexer {
        &self.indexer
    }

    /// Number of joint reward-parent assignments.
    pub fn num_parent_assignments(&self) -> usize {
        self.indexer.len()
    }

    /// `P(var = value | parents = values[parents])`.
    pub fn conditional(&self, var: usize, values: &[usize]) -> &[f64] {
        let v = &self.vars[var];
        v.row(v.row_index(values, &self.domains))
    }

    pub fn check_intervention(&self, a: &Intervention) -> Result<(), ScmError> {
        for (&var, &value) in &a.assignments {
            let v = self.vars.get(var).ok_or(ScmError::UnknownVariable(var))?;
            if !self.intervenable.contains(&var) {
                return Err(ScmError::NotIntervenable(v.name.clone()));
            }
            if value >= v.domain_size {
                return Err(ScmError::ValueOutOfDomain {
                    name: v.name.clone(),
                    value,
                    domain_size: v.domain_size,
                });
            }
        }
        Ok(())
    }

    /// Every reward-parent assignment, in index order.
    pub fn enumerate_parent_assignments(&self) -> Vec<ParentAssignment> {
        self.indexer.iter().collect()
    }

    /// Exact `P(Pa_Y = Z_j | do(a))` for every parent assignment `j`.
    ///
    /// Runs on the mutilated graph and only touches non-intervened ancestors
    /// of the reward parents. Those are enumerated in topological order while
    /// a dense table over the still-needed variables is carried forward; a
    /// variable is summed out as soon as all of its relevant children have
    /// been visited.
    pub fn parent_distribution(&self, a: &Intervention) -> Result<Vec<f64>, ScmError> {
        self.check_intervention(a)?;
        let n = self.vars.len();
        let mut fixed: Vec<Option<usize>> = vec![None; n];
        for (&var, &value) in &a.assignments {
            fixed[var] = Some(value);
        }

        // Non-intervened ancestors of Pa_Y in the mutilated graph.
        let mut relevant = vec![false; n];
        let mut stack: Vec<usize> = self
            .reward_parents
            .iter()
            .copied()
            .filter(|&p| fixed[p].is_none())
            .collect();
        while let Some(v) = stack.pop() {
            if relevant[v] {
                continue;
            }
            relevant[v] = true;
            for &p in &self.vars[v].parents {
                if fixed[p].is_none() && !relevant[p] {
                    stack.push(p);
                }
            }
        }
        let is_reward_parent = {
            let mut m = vec![false; n];
            for &p in &self.reward_parents {
                m[p] = true;
            }
            m
        };
        let mut pending_children: Vec<usize> = (0..n)
            .map(|v| self.vars[v].children.iter().filter(|&&c| relevant[c]).count())
            .collect();

        let mut table = Factor::unit();
        // Scratch assignment of all variables; fixed ones pre-filled.
        let mut values: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();

        for &v in self.topo.iter().filter(|&&v| relevant[v]) {
            table = table.extend(v, self.domains[v], |state_vars, state, out| {
                for (&sv, &val) in state_vars.iter().zip(state) {
                    values[sv] = val;
                }
                out.copy_from_slice(self.conditional(v, &values));
            });
            for &p in &self.vars[v].parents {
                if relevant[p] {
                    pending_children[p] -= 1;
                }
            }
            let done: Vec<usize> = table
                .vars
                .iter()
                .copied()
                .filter(|&u| pending_children[u] == 0 && !is_reward_parent[u])
                .collect();
            for u in done {
                table = table.sum_out(u);
            }
        }

        let mut dist = vec![0.0; self.indexer.len()];
        let mut state = vec![0usize; table.vars.len()];
        for (flat, &p) in table.probs.iter().enumerate() {
            table.decode(flat, &mut state);
            for (&sv, &val) in table.vars.iter().zip(&state) {
                values[sv] = val;
            }
            let z = self.indexer.encode_from(&self.reward_parents, &values);
            dist[z] += p;
        }
        Ok(dist)
    }

    /// Ancestral sample of every variable under `do(a)`.
    pub fn sample<R: Rng + ?Sized>(&self, a: &Intervention, rng: &mut R) -> Vec<usize> {
        let mut out = vec![0; self.vars.len()];
        self.sample_into(a, rng, &mut out);
        out
    }

    /// Like [`sample`](Self::sample) but writes into a caller buffer.
    pub fn sample_into<R: Rng + ?Sized>(&self, a: &Intervention, rng: &mut R, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.vars.len());
        for &v in &self.topo {
            out[v] = match a.assignments.get(&v) {
                Some(&forced) => forced,
                None => sample_categorical(self.conditional(v, out), rng),
            };
        }
    }

    /// Index of the reward-parent assignment contained in a full joint sample.
    pub fn parent_index(&self, values: &[usize]) -> usize {
        self.indexer.encode_from(&self.reward_parents, values)
    }
}

fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding: fall back to the last value with positive mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Dense table over a set of variables, mixed-radix with the first variable
/// most significant.
struct Factor {
    vars: Vec<usize>,
    radices: Vec<usize>,
    probs: Vec<f64>,
}

impl Factor {
    fn unit() -> Self {
        Self {
            vars: Vec::new(),
            radices: Vec::new(),
            probs: vec![1.0],
        }
    }

    fn decode(&self, mut flat: usize, state: &mut [usize]) {
        for i in (0..self.radices.len()).rev() {
            state[i] = flat % self.radices[i];
            flat /= self.radices[i];
        }
    }

    /// Appends `var` as the least significant digit, multiplying each entry
    /// by the conditional row supplied by `row`.
    fn extend<F>(self, var: usize, domain: usize, mut row: F) -> Self
    where
        F: FnMut(&[usize], &[usize], &mut [f64]),
    {
        let mut probs = vec![0.0; self.probs.len() * domain];
        let mut state = vec![0usize; self.vars.len()];
        let mut cond = vec![0.0; domain];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.decode(flat, &mut state);
            row(&self.vars, &state, &mut cond);
            for (x, &c) in cond.iter().enumerate() {
                probs[flat * domain + x] = p * c;
            }
        }
        let mut vars = self.vars;
        let mut radices = self.radices;
        vars.push(var);
        radices.push(domain);
        Self { vars, radices, probs }
    }

    fn sum_out(self, var: usize) -> Self {
        let pos = self.vars.iter().position(|&v| v == var).expect("var in factor");
        let inner: usize = self.radices[pos + 1..].iter().product();
        let radix = self.radices[pos];
        let outer = self.probs.len() / (inner * radix);
        let mut probs = vec![0.0; outer * inner];
        for o in 0..outer {
            for x in 0..radix {
                let src = &self.probs[(o * radix + x) * inner..(o * radix + x + 1) * inner];
                for (dst, &s) in probs[o * inner..(o + 1) * inner].iter_mut().zip(src) {
                    *dst += s;
                }
            }
        }
        let mut vars = self.vars;
        let mut radices = self.radices;
        vars.remove(pos);
        radices.remove(pos);
        Self { vars, radices, probs }
    }
}

/// A `do(...)` argument: variable index to forced (0-based) value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Intervention {
    pub assignments: BTreeMap<usize, usize>,
}

impl Intervention {
    /// The empty intervention `do()`.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(assignments: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            assignments: assignments.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.assignments.get(&var).copied()
    }
}

/// One joint assignment of the reward parents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParentAssignment {
    pub index: usize,
    /// 0-based values in reward-parent order.
    pub values: Vec<usize>,
}

/// Mixed-radix codec between parent-value vectors and dense indices. The
/// first parent is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentIndexer {
    radices: Vec<usize>,
    len: usize,
}

impl ParentIndexer {
    pub fn new(radices: Vec<usize>) -> Self {
        let len = radices.iter().product();
        Self { radices, len }
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.radices.len());
        values.iter().zip(&self.radices).fold(0, |acc, (&v, &r)| acc * r + v)
    }

    fn encode_from(&self, vars: &[usize], all_values: &[usize]) -> usize {
        vars.iter()
            .zip(&self.radices)
            .fold(0, |acc, (&var, &r)| acc * r + all_values[var])
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut values = vec![0; self.radices.len()];
        for i in (0..self.radices.len()).rev() {
            values[i] = index % self.radices[i];
            index /= self.radices[i];
        }
        values
    }

    pub fn iter(&self) -> impl Iterator<Item = ParentAssignment> + '_ {
        (0..self.len).map(|index| ParentAssignment {
            index,
            values: self.decode(index),
        })
    }
}
