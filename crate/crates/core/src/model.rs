//! Discrete variables, DAGs, conditional credal tables and networks.
//!
//! Everything is index based: variables are identified by dense ids
//! `0..n`, tables are indexed row-major over their parent configuration
//! with the last parent varying fastest.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use thiserror::Error;

/// Tolerance on `|Σ v - 1|` for a vertex to count as a probability vector.
pub const EPS_NORM: f64 = 1e-9;
/// Max-norm distance under which two vertices are considered equal.
pub const EPS_DUP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state {state} out of range for cardinality {card} at position {position}")]
    StateOutOfRange {
        position: usize,
        state: usize,
        card: usize,
    },
    #[error("index {index} out of range for {size} configurations")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("states and cardinalities have different lengths ({states} vs {cards})")]
    LengthMismatch { states: usize, cards: usize },
    #[error("invalid credal set: {0}")]
    InvalidSet(String),
    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<Violation>),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variable {
    pub id: usize,
    pub cardinality: usize,
}

/// Parent lists, one per variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dag {
    pub parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(parents: Vec<Vec<usize>>) -> Self {
        Dag { parents }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.parents.len()];
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                if p < children.len() {
                    children[p].push(child);
                }
            }
        }
        children
    }

    /// Kahn's algorithm; `None` when the graph has a cycle (or dangling ids).
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.parents.len();
        let mut indegree = vec![0usize; n];
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                if p >= n {
                    return None;
                }
            }
            indegree[child] = ps.len();
        }
        let children = self.children();
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// A finitely generated credal set, stored by its vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalSet {
    dimension: usize,
    vertices: Vec<Vec<f64>>,
}

impl CredalSet {
    /// Builds a set after checking simplex membership; near-duplicate
    /// vertices are dropped.
    pub fn new(dimension: usize, vertices: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let (set, _) = Self::new_dedup(dimension, vertices)?;
        Ok(set)
    }

    /// Like [`CredalSet::new`], also returning how many duplicates were dropped.
    pub fn new_dedup(
        dimension: usize,
        vertices: Vec<Vec<f64>>,
    ) -> Result<(Self, usize), ModelError> {
        let set = CredalSet {
            dimension,
            vertices,
        };
        if let Some(problem) = set.problems().into_iter().next() {
            return Err(ModelError::InvalidSet(problem));
        }
        let before = set.vertices.len();
        let vertices = dedup_points(set.vertices, EPS_DUP);
        let removed = before - vertices.len();
        Ok((
            CredalSet {
                dimension,
                vertices,
            },
            removed,
        ))
    }

    /// No checks at all; used for building deliberately broken inputs.
    pub fn new_unchecked(dimension: usize, vertices: Vec<Vec<f64>>) -> Self {
        CredalSet {
            dimension,
            vertices,
        }
    }

    /// A degenerate set holding a single mass function.
    pub fn precise(pmf: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(pmf.len(), vec![pmf])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn into_vertices(self) -> Vec<Vec<f64>> {
        self.vertices
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.vertices.is_empty() {
            out.push("no vertices".to_string());
        }
        for (k, v) in self.vertices.iter().enumerate() {
            if v.len() != self.dimension {
                out.push(format!(
                    "vertex {k} has length {} but dimension is {}",
                    v.len(),
                    self.dimension
                ));
                continue;
            }
            if let Some(j) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                out.push(format!("vertex {k} has invalid entry {} at state {j}", v[j]));
                continue;
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > EPS_NORM {
                out.push(format!(
                    "vertex {k} is not normalized: |sum - 1| = {:e}",
                    (sum - 1.0).abs()
                ));
            }
        }
        out
    }
}

/// Removes points within `tol` (max-norm) of an earlier point, keeping
/// first occurrences in order.
pub fn dedup_points(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let keep = dedup_indices(&points, tol);
    let mut flags = vec![false; points.len()];
    keep.iter().for_each(|&i| flags[i] = true);
    points
        .into_iter()
        .zip(flags)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Indices of the points surviving [`dedup_points`], ascending.
pub fn dedup_indices(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    if points.len() < 2 {
        return (0..points.len()).collect();
    }
    // Sweep on the first coordinate so only a thin window is compared.
    let key = |i: usize| points[i].first().copied().unwrap_or(0.0);
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let mut dropped = vec![false; points.len()];
    for (pos, &i) in order.iter().enumerate() {
        if dropped[i] {
            continue;
        }
        for &j in &order[pos + 1..] {
            if key(j) - key(i) > tol {
                break;
            }
            if !dropped[j] && max_norm(&points[i], &points[j]) <= tol {
                // keep whichever came first in the input
                if j < i {
                    dropped[i] = true;
                    break;
                }
                dropped[j] = true;
            }
        }
    }
    (0..points.len()).filter(|&i| !dropped[i]).collect()
}

pub(crate) fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `K(child | parents)`: one credal set per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCredalTable {
    pub child: usize,
    pub parents: Vec<usize>,
    pub sets: Vec<CredalSet>,
}

impl ConditionalCredalTable {
    pub fn new(child: usize, parents: Vec<usize>, sets: Vec<CredalSet>) -> Self {
        ConditionalCredalTable {
            child,
            parents,
            sets,
        }
    }

    /// The set for a given assignment of the parents (in declared order).
    pub fn set_for(&self, parent_states: &[usize], cards: &[usize]) -> Result<&CredalSet, ModelError> {
        let parent_cards: Vec<usize> = self.parents.iter().map(|&p| cards[p]).collect();
        let idx = config_index(parent_states, &parent_cards)?;
        Ok(&self.sets[idx])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredalNetwork {
    variables: Vec<Variable>,
    dag: Dag,
    tables: Vec<ConditionalCredalTable>,
}

impl CredalNetwork {
    /// Builds a network from cardinalities and one table per variable,
    /// deriving the DAG from the tables. Fails with every violation found.
    pub fn new(cards: Vec<usize>, tables: Vec<ConditionalCredalTable>) -> Result<Self, ModelError> {
        let net = Self::new_unchecked(cards, tables);
        let violations = validate_network(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(ModelError::InvalidNetwork(violations))
        }
    }

    pub fn new_unchecked(cards: Vec<usize>, mut tables: Vec<ConditionalCredalTable>) -> Self {
        tables.sort_by_key(|t| t.child);
        let variables = cards
            .iter()
            .enumerate()
            .map(|(id, &cardinality)| Variable { id, cardinality })
            .collect();
        let mut parents = vec![Vec::new(); cards.len()];
        for t in &tables {
            if t.child < parents.len() {
                parents[t.child] = t.parents.clone();
            }
        }
        CredalNetwork {
            variables,
            dag: Dag::new(parents),
            tables,
        }
    }

    /// Fully explicit constructor; the DAG is taken as given.
    pub fn from_parts_unchecked(
        variables: Vec<Variable>,
        dag: Dag,
        tables: Vec<ConditionalCredalTable>,
    ) -> Self {
        CredalNetwork {
            variables,
            dag,
            tables,
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn cards(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality).collect()
    }

    pub fn card(&self, var: usize) -> usize {
        self.variables[var].cardinality
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.dag.parents[var]
    }

    pub fn tables(&self) -> &[ConditionalCredalTable] {
        &self.tables
    }

    pub fn table(&self, var: usize) -> &ConditionalCredalTable {
        &self.tables[var]
    }

    /// True when every credal set is a single mass function.
    pub fn is_precise(&self) -> bool {
        self.tables
            .iter()
            .all(|t| t.sets.iter().all(|s| s.len() == 1))
    }

    /// Number of global vertex selections (product of all set sizes),
    /// saturating at `u128::MAX`.
    pub fn selection_count(&self) -> u128 {
        self.tables
            .iter()
            .flat_map(|t| t.sets.iter())
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadCardinality { var: usize, card: usize },
    SelfLoop { var: usize },
    DuplicateParent { var: usize, parent: usize },
    UnknownParent { var: usize, parent: usize },
    Cycle { vars: Vec<usize> },
    TableCount { expected: usize, found: usize },
    TableChild { table: usize, child: usize },
    TableParents { var: usize },
    SetCount { var: usize, expected: usize, found: usize },
    SetDimension { var: usize, config: usize, expected: usize, found: usize },
    EmptySet { var: usize, config: usize },
    VertexLength { var: usize, config: usize, vertex: usize },
    NegativeEntry { var: usize, config: usize, vertex: usize, value: f64 },
    Normalization { var: usize, config: usize, vertex: usize, error: f64 },
    DuplicateVertex { var: usize, config: usize, first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            BadCardinality { var, card } => write!(f, "variable {var} has cardinality {card} < 2"),
            SelfLoop { var } => write!(f, "variable {var} is its own parent"),
            DuplicateParent { var, parent } => {
                write!(f, "variable {var} lists parent {parent} twice")
            }
            UnknownParent { var, parent } => {
                write!(f, "variable {var} has unknown parent {parent}")
            }
            Cycle { vars } => write!(f, "directed cycle through {vars:?}"),
            TableCount { expected, found } => {
                write!(f, "expected {expected} tables, found {found}")
            }
            TableChild { table, child } => write!(f, "table {table} has child {child}"),
            TableParents { var } => {
                write!(f, "table of variable {var} disagrees with the DAG parents")
            }
            SetCount {
                var,
                expected,
                found,
            } => write!(
                f,
                "table of variable {var} has {found} credal sets, expected {expected}"
            ),
            SetDimension {
                var,
                config,
                expected,
                found,
            } => write!(
                f,
                "set {config} of variable {var} has dimension {found}, expected {expected}"
            ),
            EmptySet { var, config } => write!(f, "set {config} of variable {var} is empty"),
            VertexLength {
                var,
                config,
                vertex,
            } => write!(f, "vertex {vertex} of set {config} of variable {var} has wrong length"),
            NegativeEntry {
                var,
                config,
                vertex,
                value,
            } => write!(
                f,
                "vertex {vertex} of set {config} of variable {var} has invalid entry {value}"
            ),
            Normalization {
                var,
                config,
                vertex,
                error,
            } => write!(
                f,
                "vertex {vertex} of set {config} of variable {var}: |sum - 1| = {error:e}"
            ),
            DuplicateVertex {
                var,
                config,
                first,
                second,
            } => write!(
                f,
                "set {config} of variable {var}: vertices {first} and {second} coincide"
            ),
        }
    }
}

/// Collects every structural and numerical problem in `net`.
pub fn validate_network(net: &CredalNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = net.variables.len();
    for (i, v) in net.variables.iter().enumerate() {
        if v.cardinality < 2 || v.id != i {
            out.push(Violation::BadCardinality {
                var: i,
                card: v.cardinality,
            });
        }
    }
    let mut dag_ok = net.dag.parents.len() == n;
    for (var, ps) in net.dag.parents.iter().enumerate() {
        for (k, &p) in ps.iter().enumerate() {
            if p == var {
                out.push(Violation::SelfLoop { var });
                dag_ok = false;
            } else if p >= n {
                out.push(Violation::UnknownParent { var, parent: p });
                dag_ok = false;
            }
            if ps[..k].contains(&p) {
                out.push(Violation::DuplicateParent { var, parent: p });
            }
        }
    }
    if dag_ok && net.dag.topological_order().is_none() {
        out.push(Violation::Cycle {
            vars: cycle_members(&net.dag),
        });
    }
    if net.tables.len() != n {
        out.push(Violation::TableCount {
            expected: n,
            found: net.tables.len(),
        });
    }
    for (idx, table) in net.tables.iter().enumerate() {
        if table.child != idx || table.child >= n {
            out.push(Violation::TableChild {
                table: idx,
                child: table.child,
            });
            continue;
        }
        let var = table.child;
        if net.dag.parents.get(var) != Some(&table.parents) {
            out.push(Violation::TableParents { var });
        }
        if table.parents.iter().any(|&p| p >= n) {
            continue;
        }
        let expected: usize = table.parents.iter().map(|&p| net.variables[p].cardinality).product();
        if table.sets.len() != expected {
            out.push(Violation::SetCount {
                var,
                expected,
                found: table.sets.len(),
            });
        }
        let d = net.variables[var].cardinality;
        for (config, set) in table.sets.iter().enumerate() {
            if set.dimension() != d {
                out.push(Violation::SetDimension {
                    var,
                    config,
                    expected: d,
                    found: set.dimension(),
                });
            }
            if set.is_empty() {
                out.push(Violation::EmptySet { var, config });
            }
            for (vertex, v) in set.vertices().iter().enumerate() {
                if v.len() != set.dimension() {
                    out.push(Violation::VertexLength {
                        var,
                        config,
                        vertex,
                    });
                    continue;
                }
                if let Some(&value) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
                    out.push(Violation::NegativeEntry {
                        var,
                        config,
                        vertex,
                        value,
                    });
                    continue;
                }
                let error = (v.iter().sum::<f64>() - 1.0).abs();
                if error > EPS_NORM {
                    out.push(Violation::Normalization {
                        var,
                        config,
                        vertex,
                        error,
                    });
                }
            }
            let vs = set.vertices();
            for a in 0..vs.len() {
                for b in a + 1..vs.len() {
                    if vs[a].len() == vs[b].len() && max_norm(&vs[a], &vs[b]) <= EPS_DUP {
                        out.push(Violation::DuplicateVertex {
                            var,
                            config,
                            first: a,
                            second: b,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Variables left over after repeatedly peeling sources and sinks; these
/// all lie on or between cycles.
fn cycle_members(dag: &Dag) -> Vec<usize> {
    let n = dag.parents.len();
    let children = dag.children();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            let has_parent = dag.parents[v].iter().any(|&p| p < n && alive[p]);
            let has_child = children[v].iter().any(|&c| alive[c]);
            if !has_parent || !has_child {
                alive[v] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&v| alive[v]).collect()
}

/// Row-major position of a joint configuration; the last variable varies fastest.
pub fn config_index(states: &[usize], cards: &[usize]) -> Result<usize, ModelError> {
    if states.len() != cards.len() {
        return Err(ModelError::LengthMismatch {
            states: states.len(),
            cards: cards.len(),
        });
    }
    let mut idx = 0usize;
    for (position, (&state, &card)) in states.iter().zip(cards).enumerate() {
        if state >= card {
            return Err(ModelError::StateOutOfRange {
                position,
                state,
                card,
            });
        }
        idx = idx * card + state;
    }
    Ok(idx)
}

/// Inverse of [`config_index`].
pub fn config_states(index: usize, cards: &[usize]) -> Result<Vec<usize>, ModelError> {
    let size: usize = cards.iter().product();
    if index >= size {
        return Err(ModelError::IndexOutOfRange { index, size });
    }
    let mut states = vec![0; cards.len()];
    let mut rest = index;
    for (slot, &card) in states.iter_mut().zip(cards).rev() {
        *slot = rest % card;
        rest /= card;
    }
    Ok(states)
}

/// Marginal (no evidence) or conditional query on one target variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Query {
    pub target: usize,
    pub evidence: BTreeMap<usize, usize>,
}

impl Query {
    pub fn marginal(target: usize) -> Self {
        Query {
            target,
            evidence: BTreeMap::new(),
        }
    }

    pub fn conditional(target: usize, evidence: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Query {
            target,
            evidence: evidence.into_iter().collect(),
        }
    }

    pub fn is_marginal(&self) -> bool {
        self.evidence.is_empty()
    }

    pub fn check(&self, net: &CredalNetwork) -> Result<(), ModelError> {
        if self.target >= net.len() {
            return Err(ModelError::InvalidQuery(format!(
                "target {} not in network of {} variables",
                self.target,
                net.len()
            )));
        }
        if self.evidence.contains_key(&self.target) {
            return Err(ModelError::InvalidQuery(format!(
                "target {} is also observed",
                self.target
            )));
        }
        for (&var, &state) in &self.evidence {
            if var >= net.len() {
                return Err(ModelError::InvalidQuery(format!("evidence on unknown variable {var}")));
            }
            if state >= net.card(var) {
                return Err(ModelError::InvalidQuery(format!(
                    "evidence state {state} out of range for variable {var} (cardinality {})",
                    net.card(var)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Interval { lower, upper }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, other: &Interval, slack: f64) -> bool {
        other.lower >= self.lower - slack && other.upper <= self.upper + slack
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lower, self.upper)
    }
}

/// Lower/upper probability per target state, plus run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalResult {
    pub bounds: Vec<Interval>,
    pub method: String,
    pub elapsed: Duration,
    /// Final tables skipped because their evidence mass was ~0.
    pub dropped_tables: usize,
}

impl IntervalResult {
    pub fn lower(&self, state: usize) -> f64 {
        self.bounds[state].lower
    }

    pub fn upper(&self, state: usize) -> f64 {
        self.bounds[state].upper
    }

    /// The max deviation between the two results over all bounds.
    pub fn max_abs_diff(&self, other: &IntervalResult) -> f64 {
        self.bounds
            .iter()
            .zip(&other.bounds)
            .map(|(a, b)| (a.lower - b.lower).abs().max((a.upper - b.upper).abs()))
            .fold(0.0, f64::max)
    }
}
