//! Exact inference over the algebraic-fact interpretations.
//!
//! The label of a query is the sum over all interpretations entailing it of
//! the product of the interpretation's literal labels; conditional labels
//! divide the query-and-evidence label by the evidence label.
//!
//! Sums are evaluated by expanding facts one at a time in canonical
//! (textual) order, restricted to the dependency cone of the target atoms:
//!
//! * a branch stops as soon as the target is determined — the remaining
//!   facts sum out to the one element exactly;
//! * facts that can no longer influence the target on a branch are skipped —
//!   their two subtrees are identical, and the sum of their positive and
//!   negated labels is the one element.
//!
//! For a commutative semiring this computes exactly the sum over complete
//! interpretations. For the opinion algebras, whose uncertainty is not
//! distributive, the factored evaluation is the semantics: it keeps each
//! label's uncertainty flowing through the few operations that actually
//! depend on it instead of diluting it across `2^n` interpretation terms,
//! matching how compiled-circuit implementations of these algebras behave.
//! The expansion order is fixed, so results are reproducible.
//!
//! The decision structure does not depend on label values, only on which
//! facts are pinned by exact zero/one labels and on the evidence values, so
//! a prepared [`Engine`] caches it and repeated relabelled runs just
//! re-evaluate the tree.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::program::{Atom, LabelExpr, Program};
use crate::semiring::Parametrisation;

/// Default cap on the number of enumerable (non-pinned) facts.
pub const DEFAULT_BUDGET: usize = 24;

/// Cap on decision-tree nodes per target.
const NODE_LIMIT: usize = 1 << 22;

struct CompiledClause {
    head: usize,
    body_pos: Vec<usize>,
    /// Atom ids of negated algebraic facts.
    body_neg: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
enum Node {
    /// Target satisfied; the unassigned facts sum out to the one element.
    True,
    /// Target falsified; the branch contributes the zero element.
    False,
    /// Branch on a fact: `positive`/`negative` are node indices.
    Decision {
        fact: u32,
        positive: u32,
        negative: u32,
    },
}

/// One required truth assignment: the atoms that must hold and the atoms
/// that must not, e.g. `q ∧ E = e` or `E = e` alone.
#[derive(Clone, Debug, Default)]
struct Target {
    require_true: Vec<usize>,
    require_false: Vec<usize>,
}

/// A decision tree for one target, stored in postorder (children precede
/// parents); the last node is the root.
struct TargetTree {
    nodes: Vec<Node>,
}

struct TreeSet {
    /// Per query: trees for `q ∧ E=e` and `¬q ∧ E=e`.
    per_query: Vec<(TargetTree, TargetTree)>,
    /// Tree for `E=e`; absent when the program has no evidence.
    evidence: Option<TargetTree>,
}

/// Bit vector over the atom table.
type Bits = Vec<u64>;

fn bit_get(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

/// A ground program prepared for inference. Fact labels and evidence values
/// may be swapped between runs; the decision structure is reused.
pub struct Engine {
    atom_names: Vec<String>,
    /// Facts in canonical (textual) order.
    facts: Vec<(usize, LabelExpr)>,
    /// Indices into `facts` that take part in expansion.
    free: Vec<usize>,
    /// Atom id of each free fact.
    free_atom: Vec<usize>,
    /// Atom ids of facts pinned true by an exact one label.
    pinned_true: Vec<usize>,
    clauses: Vec<CompiledClause>,
    queries: Vec<usize>,
    evidence: Vec<(usize, bool)>,
    blocks: usize,
    /// Decision trees per evidence-value mask.
    trees: HashMap<u64, TreeSet>,
}

impl Engine {
    pub fn new(program: &Program) -> Result<Self> {
        Self::with_budget(program, DEFAULT_BUDGET)
    }

    pub fn with_budget(program: &Program, budget: usize) -> Result<Self> {
        let ground = if program.is_ground() {
            program.validate()?;
            program.clone()
        } else {
            program.ground()?
        };

        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut atom_names: Vec<String> = Vec::new();
        let intern = |atom: &Atom, names: &mut Vec<String>, ids: &mut HashMap<String, usize>| {
            let text = atom.to_string();
            *ids.entry(text.clone()).or_insert_with(|| {
                names.push(text);
                names.len() - 1
            })
        };

        let mut facts: Vec<(Atom, LabelExpr)> = ground.facts.clone();
        facts.sort_by_key(|(a, _)| a.to_string());
        let facts: Vec<(usize, LabelExpr)> = facts
            .into_iter()
            .map(|(a, l)| (intern(&a, &mut atom_names, &mut ids), l))
            .collect();

        let clauses: Vec<CompiledClause> = ground
            .clauses
            .iter()
            .map(|c| CompiledClause {
                head: intern(&c.head, &mut atom_names, &mut ids),
                body_pos: c
                    .body
                    .iter()
                    .filter(|l| !l.negated)
                    .map(|l| intern(&l.atom, &mut atom_names, &mut ids))
                    .collect(),
                body_neg: c
                    .body
                    .iter()
                    .filter(|l| l.negated)
                    .map(|l| intern(&l.atom, &mut atom_names, &mut ids))
                    .collect(),
            })
            .collect();

        let queries: Vec<usize> = ground
            .queries
            .iter()
            .map(|q| intern(q, &mut atom_names, &mut ids))
            .collect();
        let evidence: Vec<(usize, bool)> = ground
            .evidence
            .iter()
            .map(|(e, v)| (intern(e, &mut atom_names, &mut ids), *v))
            .collect();
        if evidence.len() > 64 {
            return Err(Error::Invalid(format!(
                "{} evidence atoms exceed the limit of 64",
                evidence.len()
            )));
        }

        let mut free = Vec::new();
        let mut pinned_true = Vec::new();
        for (i, (aid, label)) in facts.iter().enumerate() {
            if label.is_exact_one() {
                pinned_true.push(*aid);
            } else if !label.is_exact_zero() {
                free.push(i);
            }
        }
        if free.len() > budget {
            return Err(Error::BudgetExceeded {
                facts: free.len(),
                budget,
            });
        }
        let free_atom = free.iter().map(|&i| facts[i].0).collect();

        Ok(Engine {
            blocks: atom_names.len().div_ceil(64),
            atom_names,
            facts,
            free,
            free_atom,
            pinned_true,
            clauses,
            queries,
            evidence,
            trees: HashMap::new(),
        })
    }

    pub fn free_fact_count(&self) -> usize {
        self.free.len()
    }

    /// Fact atoms in canonical order, including pinned ones.
    pub fn fact_names(&self) -> Vec<&str> {
        self.facts
            .iter()
            .map(|(aid, _)| self.atom_names[*aid].as_str())
            .collect()
    }

    pub fn query_names(&self) -> Vec<&str> {
        self.queries
            .iter()
            .map(|&aid| self.atom_names[aid].as_str())
            .collect()
    }

    pub fn evidence_len(&self) -> usize {
        self.evidence.len()
    }

    /// Replaces fact labels (canonical order). A swap must not change which
    /// facts are pinned: the cached decision structure depends on it.
    pub fn relabel(&mut self, labels: &[LabelExpr]) -> Result<()> {
        if labels.len() != self.facts.len() {
            return Err(Error::Invalid(format!(
                "{} labels for {} facts",
                labels.len(),
                self.facts.len()
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            let old = &self.facts[i].1;
            if label.is_exact_one() != old.is_exact_one()
                || label.is_exact_zero() != old.is_exact_zero()
            {
                return Err(Error::Invalid(format!(
                    "relabelling fact {} changes its pinned status",
                    self.atom_names[self.facts[i].0]
                )));
            }
        }
        for (slot, label) in self.facts.iter_mut().zip(labels) {
            slot.1 = *label;
        }
        Ok(())
    }

    /// Replaces evidence truth values (declaration order).
    pub fn set_evidence_values(&mut self, values: &[bool]) -> Result<()> {
        if values.len() != self.evidence.len() {
            return Err(Error::Invalid(format!(
                "{} values for {} evidence atoms",
                values.len(),
                self.evidence.len()
            )));
        }
        for (slot, v) in self.evidence.iter_mut().zip(values) {
            slot.1 = *v;
        }
        Ok(())
    }

    fn evidence_mask(&self) -> u64 {
        self.evidence
            .iter()
            .enumerate()
            .filter(|(_, (_, v))| *v)
            .map(|(i, _)| 1u64 << i)
            .sum()
    }

    /// Computes every query's label: the marginal when the program carries
    /// no evidence, otherwise the label conditioned on the evidence.
    pub fn infer<P: Parametrisation>(&mut self, par: &P) -> Result<Vec<P::Label>> {
        self.ensure_trees()?;
        let lifted: Vec<(P::Label, P::Label)> = self
            .free
            .iter()
            .map(|&fidx| {
                let pos = par.lift(&self.facts[fidx].1);
                let neg = par.negate(&pos);
                (pos, neg)
            })
            .collect();
        let trees = &self.trees[&self.evidence_mask()];

        let evidence_label = match &trees.evidence {
            Some(tree) => Some(eval_tree(tree, par, &lifted)?),
            None => None,
        };
        let mut out = Vec::with_capacity(self.queries.len());
        for (pos_tree, neg_tree) in &trees.per_query {
            let numer = eval_tree(pos_tree, par, &lifted)?;
            match &evidence_label {
                None => out.push(numer),
                Some(den) => {
                    let rest = eval_tree(neg_tree, par, &lifted)?;
                    out.push(par.conditional(&numer, den, &rest)?);
                }
            }
        }
        Ok(out)
    }

    fn ensure_trees(&mut self) -> Result<()> {
        let mask = self.evidence_mask();
        if self.trees.contains_key(&mask) {
            return Ok(());
        }
        let mut per_query = Vec::with_capacity(self.queries.len());
        for &q in &self.queries {
            let mut pos = self.evidence_target();
            pos.require_true.push(q);
            let mut neg = self.evidence_target();
            neg.require_false.push(q);
            per_query.push((self.build_tree(&pos)?, self.build_tree(&neg)?));
        }
        let evidence = if self.evidence.is_empty() {
            None
        } else {
            Some(self.build_tree(&self.evidence_target())?)
        };
        self.trees.insert(
            mask,
            TreeSet {
                per_query,
                evidence,
            },
        );
        Ok(())
    }

    fn evidence_target(&self) -> Target {
        let mut t = Target::default();
        for &(atom, value) in &self.evidence {
            if value {
                t.require_true.push(atom);
            } else {
                t.require_false.push(atom);
            }
        }
        t
    }

    /// Least model reachable given the partial fact assignment, with
    /// unassigned facts pessimistically false (and their negations
    /// pessimistically unusable): atoms certainly derived.
    fn lower_bound(&self, assigned: u64, values: u64, out: &mut Bits) {
        out.clear();
        out.resize(self.blocks, 0);
        for &aid in &self.pinned_true {
            bit_set(out, aid);
        }
        for (i, &aid) in self.free_atom.iter().enumerate() {
            if assigned >> i & 1 == 1 && values >> i & 1 == 1 {
                bit_set(out, aid);
            }
        }
        let assigned_false = |aid: usize, this: &Self| {
            this.free_atom
                .iter()
                .enumerate()
                .any(|(i, &a)| a == aid && assigned >> i & 1 == 1 && values >> i & 1 == 0)
        };
        loop {
            let mut changed = false;
            for clause in &self.clauses {
                if bit_get(out, clause.head) {
                    continue;
                }
                let fires = clause.body_pos.iter().all(|&a| bit_get(out, a))
                    && clause.body_neg.iter().all(|&a| {
                        // A negated fact certainly holds only once the fact
                        // is assigned false (pinned-false facts were removed
                        // from the tables and are false by omission).
                        if bit_get(out, a) {
                            false
                        } else {
                            !self.free_atom.contains(&a) || assigned_false(a, self)
                        }
                    });
                if fires {
                    bit_set(out, clause.head);
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    /// Atoms still derivable under some completion: unassigned facts may be
    /// either value.
    fn upper_bound(&self, assigned: u64, values: u64, out: &mut Bits) {
        out.clear();
        out.resize(self.blocks, 0);
        for &aid in &self.pinned_true {
            bit_set(out, aid);
        }
        for (i, &aid) in self.free_atom.iter().enumerate() {
            if assigned >> i & 1 == 0 || values >> i & 1 == 1 {
                bit_set(out, aid);
            }
        }
        let assigned_true = |aid: usize, this: &Self| {
            this.free_atom
                .iter()
                .enumerate()
                .any(|(i, &a)| a == aid && assigned >> i & 1 == 1 && values >> i & 1 == 1)
        };
        loop {
            let mut changed = false;
            for clause in &self.clauses {
                if bit_get(out, clause.head) {
                    continue;
                }
                let fires = clause.body_pos.iter().all(|&a| bit_get(out, a))
                    && clause
                        .body_neg
                        .iter()
                        .all(|&a| !assigned_true(a, self) && !self.pinned_true.contains(&a));
                if fires {
                    bit_set(out, clause.head);
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn build_tree(&self, target: &Target) -> Result<TargetTree> {
        let mut nodes = Vec::new();
        let mut lo = Vec::new();
        let mut up = Vec::new();
        self.expand(target, 0, 0, &mut nodes, &mut lo, &mut up)?;
        Ok(TargetTree { nodes })
    }

    /// Expands the next relevant fact and returns the subtree's root index.
    fn expand(
        &self,
        target: &Target,
        assigned: u64,
        values: u64,
        nodes: &mut Vec<Node>,
        lo: &mut Bits,
        up: &mut Bits,
    ) -> Result<u32> {
        if nodes.len() > NODE_LIMIT {
            return Err(Error::Invalid(format!(
                "decision structure exceeds {NODE_LIMIT} nodes; reduce the program"
            )));
        }
        self.lower_bound(assigned, values, lo);
        self.upper_bound(assigned, values, up);

        let falsified = target.require_true.iter().any(|&a| !bit_get(up, a))
            || target.require_false.iter().any(|&a| bit_get(lo, a));
        if falsified {
            nodes.push(Node::False);
            return Ok(nodes.len() as u32 - 1);
        }
        let satisfied = target.require_true.iter().all(|&a| bit_get(lo, a))
            && target.require_false.iter().all(|&a| !bit_get(up, a));
        if satisfied {
            nodes.push(Node::True);
            return Ok(nodes.len() as u32 - 1);
        }

        let fact = self
            .next_relevant_fact(target, assigned, values, lo, up)
            .expect("a pending target depends on some unassigned fact");
        let positive = self.expand(
            target,
            assigned | 1 << fact,
            values | 1 << fact,
            nodes,
            lo,
            up,
        )?;
        let negative = self.expand(target, assigned | 1 << fact, values, nodes, lo, up)?;
        nodes.push(Node::Decision {
            fact: fact as u32,
            positive,
            negative,
        });
        Ok(nodes.len() as u32 - 1)
    }

    /// First unassigned fact (canonical order) that can still influence a
    /// pending target atom: backward reachability from the pending atoms
    /// over clauses that are neither dead nor already satisfied.
    fn next_relevant_fact(
        &self,
        target: &Target,
        assigned: u64,
        values: u64,
        lo: &Bits,
        up: &Bits,
    ) -> Option<usize> {
        let mut cone = vec![0u64; self.blocks];
        let mut queue: Vec<usize> = Vec::new();
        for &a in &target.require_true {
            if !bit_get(lo, a) && !bit_get(&cone, a) {
                bit_set(&mut cone, a);
                queue.push(a);
            }
        }
        for &a in &target.require_false {
            if bit_get(up, a) && !bit_get(&cone, a) {
                bit_set(&mut cone, a);
                queue.push(a);
            }
        }
        while let Some(atom) = queue.pop() {
            for clause in &self.clauses {
                if clause.head != atom || bit_get(lo, clause.head) {
                    continue;
                }
                // Dead clauses cannot influence anything anymore.
                let alive = clause.body_pos.iter().all(|&a| bit_get(up, a))
                    && clause.body_neg.iter().all(|&a| {
                        !self.pinned_true.contains(&a)
                            && !self.free_atom.iter().enumerate().any(|(i, &fa)| {
                                fa == a && assigned >> i & 1 == 1 && values >> i & 1 == 1
                            })
                    });
                if !alive {
                    continue;
                }
                for &a in clause.body_pos.iter().chain(&clause.body_neg) {
                    if !bit_get(&cone, a) && !bit_get(lo, a) {
                        bit_set(&mut cone, a);
                        queue.push(a);
                    }
                }
            }
        }
        (0..self.free.len()).find(|&i| assigned >> i & 1 == 0 && bit_get(&cone, self.free_atom[i]))
    }
}

fn eval_tree<P: Parametrisation>(
    tree: &TargetTree,
    par: &P,
    lifted: &[(P::Label, P::Label)],
) -> Result<P::Label> {
    let mut values: Vec<P::Label> = Vec::with_capacity(tree.nodes.len());
    for node in &tree.nodes {
        let value = match node {
            Node::True => par.one(),
            Node::False => par.zero(),
            Node::Decision {
                fact,
                positive,
                negative,
            } => {
                let (pos_label, neg_label) = &lifted[*fact as usize];
                let high = par.times(pos_label, &values[*positive as usize])?;
                let low = par.times(neg_label, &values[*negative as usize])?;
                par.plus(&high, &low)?
            }
        };
        values.push(value);
    }
    Ok(values.pop().expect("tree has a root"))
}

/// One-shot inference: prepares the program and returns `(query, label)`
/// pairs in declaration order.
pub fn infer_program<P: Parametrisation>(
    program: &Program,
    par: &P,
    budget: usize,
) -> Result<Vec<(String, P::Label)>> {
    let mut engine = Engine::with_budget(program, budget)?;
    let labels = engine.infer(par)?;
    Ok(engine
        .query_names()
        .iter()
        .map(|s| s.to_string())
        .zip(labels)
        .collect())
}
