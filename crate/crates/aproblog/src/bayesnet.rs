//! Binary-variable Bayesian networks: a JSON schema, compilation into
//! programs, and the sampling steps of the sparse-data protocol
//! (ground-truth CPTs and observation-derived opinion labels).
//!
//! # Compilation
//!
//! Each CPT row becomes one algebraic fact `cpt_<node>[_<config>]`, and each
//! node gets one clause per row:
//!
//! ```text
//! b :- a, cpt_b_a.
//! b :- not_a, cpt_b_na.
//! ```
//!
//! Negation in clause bodies is restricted to algebraic facts, so node
//! falsity cannot be written `\+b`. Nodes that appear as parents therefore
//! also get complementary clauses deriving `not_<node>`:
//!
//! ```text
//! not_b :- a, \+cpt_b_a.
//! not_b :- not_a, \+cpt_b_na.
//! ```
//!
//! In every interpretation exactly one of `b`, `not_b` is derived, so the
//! compiled program reproduces the network's joint distribution.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opinion::{ObservationCounts, Opinion, PriorConfig};
use crate::program::{Atom, Clause, LabelExpr, Literal, Program};

/// Whether a node's value is observed as evidence or queried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Observed,
    Queried,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum CptEntry {
    Prob(f64),
    Opinion([f64; 4]),
}

/// A Bayesian network over binary variables.
///
/// CPT rows are indexed by the parent configuration: bit `j` of the row
/// index is set when the `j`-th listed parent is true. Row values are
/// `P(node = true | configuration)`, either a bare probability or an opinion
/// tuple `[b, d, u, a]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BayesNetwork {
    pub name: String,
    pub nodes: Vec<String>,
    #[serde(default)]
    pub parents: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub roles: BTreeMap<String, Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpts: Option<BTreeMap<String, Vec<CptEntry>>>,
}

/// One probability per CPT row: `truth.rows[node][row]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub rows: Vec<Vec<f64>>,
}

impl BayesNetwork {
    pub fn from_json(text: &str) -> Result<Self> {
        let bn: BayesNetwork = serde_json::from_str(text)?;
        bn.validate()?;
        Ok(bn)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn parents_of(&self, node: &str) -> &[String] {
        self.parents.get(node).map(|p| p.as_slice()).unwrap_or(&[])
    }

    pub fn row_count(&self, node: &str) -> usize {
        1usize << self.parents_of(node).len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Network("no nodes".into()));
        }
        let mut seen = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if seen.insert(n.clone(), i).is_some() {
                return Err(Error::Network(format!("duplicate node {n}")));
            }
            let valid = n.chars().next().is_some_and(|c| c.is_ascii_lowercase())
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::Network(format!(
                    "node name {n} is not a lowercase identifier"
                )));
            }
            if n.starts_with("cpt_") || n.starts_with("not_") {
                return Err(Error::Network(format!(
                    "node name {n} collides with compiled atom prefixes"
                )));
            }
        }
        for (node, ps) in &self.parents {
            if !seen.contains_key(node) {
                return Err(Error::Network(format!(
                    "parents given for unknown node {node}"
                )));
            }
            for p in ps {
                if !seen.contains_key(p) {
                    return Err(Error::Network(format!("unknown parent {p} of {node}")));
                }
            }
        }
        for node in self.roles.keys() {
            if !seen.contains_key(node) {
                return Err(Error::Network(format!(
                    "role given for unknown node {node}"
                )));
            }
        }
        self.topo_order()?;
        if let Some(cpts) = &self.cpts {
            for (node, rows) in cpts {
                if !seen.contains_key(node) {
                    return Err(Error::Network(format!("CPT given for unknown node {node}")));
                }
                if rows.len() != self.row_count(node) {
                    return Err(Error::Network(format!(
                        "CPT of {node} has {} rows, expected {}",
                        rows.len(),
                        self.row_count(node)
                    )));
                }
                for entry in rows {
                    match entry {
                        CptEntry::Prob(p) if (0.0..=1.0).contains(p) => {}
                        CptEntry::Prob(p) => {
                            return Err(Error::Network(format!(
                                "CPT probability {p} of {node} outside [0, 1]"
                            )))
                        }
                        CptEntry::Opinion([b, d, u, a]) => {
                            Opinion::new(*b, *d, *u, *a)
                                .map_err(|e| Error::Network(e.to_string()))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Node indices in ancestral order; fails on cycles.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let index: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (node, ps) in &self.parents {
            let c = index[node.as_str()];
            for p in ps {
                indegree[c] += 1;
                children[index[p.as_str()]].push(c);
            }
        }
        let mut queue: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| indegree[i] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = queue.pop() {
            order.push(i);
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if order.len() != self.nodes.len() {
            return Err(Error::Network("cyclic network".into()));
        }
        Ok(order)
    }

    /// The algebraic fact carrying the CPT row `(node, row)`.
    pub fn fact_atom(&self, node: &str, row: usize) -> Atom {
        let parents = self.parents_of(node);
        if parents.is_empty() {
            return Atom::nullary(format!("cpt_{node}"));
        }
        let mut name = format!("cpt_{node}");
        for (j, p) in parents.iter().enumerate() {
            if row >> j & 1 == 1 {
                name.push_str(&format!("_{p}"));
            } else {
                name.push_str(&format!("_n{p}"));
            }
        }
        Atom::nullary(name)
    }

    fn cpt_label(&self, node: &str, row: usize) -> LabelExpr {
        match self
            .cpts
            .as_ref()
            .and_then(|c| c.get(node))
            .map(|rows| &rows[row])
        {
            Some(CptEntry::Prob(p)) => LabelExpr::Prob(*p),
            Some(CptEntry::Opinion([b, d, u, a])) => {
                LabelExpr::Opinion(Opinion::new(*b, *d, *u, *a).expect("validated"))
            }
            // Placeholder for networks shipped without numbers; experiment
            // runs relabel every fact anyway.
            None => LabelExpr::Prob(0.5),
        }
    }

    /// Compiles the network into a program: one fact and one clause per CPT
    /// row, complementary `not_<node>` clauses for nodes used as parents,
    /// queries from the queried roles, and evidence atoms (default true)
    /// from the observed roles.
    pub fn compile(&self) -> Result<Program> {
        self.validate()?;
        let mut program = Program::default();
        let needs_not: Vec<&String> = self
            .nodes
            .iter()
            .filter(|n| self.parents.values().any(|ps| ps.contains(n)))
            .collect();

        for node in &self.nodes {
            let parents = self.parents_of(node);
            for row in 0..self.row_count(node) {
                let fact = self.fact_atom(node, row);
                program
                    .facts
                    .push((fact.clone(), self.cpt_label(node, row)));

                let mut body: Vec<Literal> = parents
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let atom = if row >> j & 1 == 1 {
                            Atom::nullary(p.clone())
                        } else {
                            Atom::nullary(format!("not_{p}"))
                        };
                        Literal {
                            atom,
                            negated: false,
                        }
                    })
                    .collect();
                body.push(Literal {
                    atom: fact.clone(),
                    negated: false,
                });
                program.clauses.push(Clause {
                    head: Atom::nullary(node.clone()),
                    body: body.clone(),
                });

                if needs_not.contains(&node) {
                    let mut body = body;
                    body.last_mut().unwrap().negated = true;
                    program.clauses.push(Clause {
                        head: Atom::nullary(format!("not_{node}")),
                        body,
                    });
                }
            }
        }

        for node in &self.nodes {
            match self.roles.get(node) {
                Some(Role::Queried) => program.queries.push(Atom::nullary(node.clone())),
                Some(Role::Observed) => program.evidence.push((Atom::nullary(node.clone()), true)),
                None => {}
            }
        }
        program.validate()?;
        Ok(program)
    }

    /// Draws an independent uniform probability for every CPT row.
    pub fn sample_ground_truth(&self, rng: &mut impl Rng) -> GroundTruth {
        GroundTruth {
            rows: self
                .nodes
                .iter()
                .map(|n| (0..self.row_count(n)).map(|_| rng.gen::<f64>()).collect())
                .collect(),
        }
    }

    /// One complete instantiation of all variables by ancestral sampling.
    pub fn sample_instantiation(&self, truth: &GroundTruth, rng: &mut impl Rng) -> Vec<bool> {
        let order = self.topo_order().expect("validated");
        let mut values = vec![false; self.nodes.len()];
        for &i in &order {
            let node = &self.nodes[i];
            let row = self.row_index(node, &values);
            values[i] = rng.gen::<f64>() < truth.rows[i][row];
        }
        values
    }

    fn row_index(&self, node: &str, values: &[bool]) -> usize {
        self.parents_of(node)
            .iter()
            .enumerate()
            .map(|(j, p)| (values[self.node_index(p).unwrap()] as usize) << j)
            .sum()
    }

    /// Observes `n_ins` complete instantiations and derives one opinion per
    /// CPT row from the tallies among instantiations matching the row's
    /// parent configuration. Rows whose configuration never occurs keep the
    /// vacuous opinion, which is how data sparsity enters the labels.
    pub fn sample_observations(
        &self,
        truth: &GroundTruth,
        n_ins: u64,
        rng: &mut impl Rng,
        prior: &PriorConfig,
    ) -> Vec<Vec<Opinion>> {
        let mut pos: Vec<Vec<u64>> = self
            .nodes
            .iter()
            .map(|n| vec![0; self.row_count(n)])
            .collect();
        let mut neg = pos.clone();
        for _ in 0..n_ins {
            let values = self.sample_instantiation(truth, rng);
            for (i, node) in self.nodes.iter().enumerate() {
                let row = self.row_index(node, &values);
                if values[i] {
                    pos[i][row] += 1;
                } else {
                    neg[i][row] += 1;
                }
            }
        }
        pos.into_iter()
            .zip(neg)
            .map(|(p_rows, n_rows)| {
                p_rows
                    .into_iter()
                    .zip(n_rows)
                    .map(|(p, n)| Opinion::from_counts(ObservationCounts::new(p, n), prior))
                    .collect()
            })
            .collect()
    }

    /// Fact labels (by atom text) for a full assignment of CPT opinions.
    pub fn opinion_labels(&self, opinions: &[Vec<Opinion>]) -> BTreeMap<String, LabelExpr> {
        self.labelled_rows(|i, row| LabelExpr::Opinion(opinions[i][row]))
    }

    /// Fact labels (by atom text) for exact ground-truth probabilities.
    pub fn truth_labels(&self, truth: &GroundTruth) -> BTreeMap<String, LabelExpr> {
        self.labelled_rows(|i, row| LabelExpr::Prob(truth.rows[i][row]))
    }

    fn labelled_rows(
        &self,
        mut f: impl FnMut(usize, usize) -> LabelExpr,
    ) -> BTreeMap<String, LabelExpr> {
        let mut out = BTreeMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            for row in 0..self.row_count(node) {
                out.insert(self.fact_atom(node, row).to_string(), f(i, row));
            }
        }
        out
    }

    /// Values of the observed nodes in an instantiation, in node order.
    pub fn observed_values(&self, values: &[bool]) -> Vec<bool> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| self.roles.get(*n) == Some(&Role::Observed))
            .map(|(i, _)| values[i])
            .collect()
    }
}
