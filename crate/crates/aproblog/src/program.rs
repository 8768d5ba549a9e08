//! Program representation: algebraic facts, background clauses, queries and
//! evidence, plus grounding of non-ground clauses over the program's
//! constant set.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::opinion::Opinion;

/// A term in an atom: a constant or a clause-local variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => write!(f, "{c}"),
            Term::Variable(v) => write!(f, "{v}"),
        }
    }
}

/// A predicate applied to terms; ground when no term is a variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn ground(predicate: impl Into<String>, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args
                .iter()
                .map(|a| Term::Constant((*a).to_string()))
                .collect(),
        }
    }

    pub fn nullary(predicate: impl Into<String>) -> Self {
        Atom {
            predicate: predicate.into(),
            args: Vec::new(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Constant(_)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A fact label as parsed: an exact probability or an opinion tuple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LabelExpr {
    Prob(f64),
    Opinion(Opinion),
}

impl LabelExpr {
    /// Labels that are exactly the one element of every parametrisation.
    pub fn is_exact_one(&self) -> bool {
        match self {
            LabelExpr::Prob(p) => *p == 1.0,
            LabelExpr::Opinion(o) => o.belief == 1.0 && o.uncertainty == 0.0 && o.base_rate == 1.0,
        }
    }

    /// Labels that are exactly the zero element of every parametrisation.
    pub fn is_exact_zero(&self) -> bool {
        match self {
            LabelExpr::Prob(p) => *p == 0.0,
            LabelExpr::Opinion(o) => {
                o.disbelief == 1.0 && o.uncertainty == 0.0 && o.base_rate == 0.0
            }
        }
    }
}

impl fmt::Display for LabelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelExpr::Prob(p) => write!(f, "{p}"),
            LabelExpr::Opinion(o) => {
                write!(
                    f,
                    "{},{},{},{}",
                    o.belief, o.disbelief, o.uncertainty, o.base_rate
                )
            }
        }
    }
}

/// A body literal; negation is only allowed on algebraic facts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "\\+")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A definite clause `head :- body`; an empty body is a deterministic fact.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        write!(f, ".")
    }
}

/// An algebraic program: labelled ground facts, background clauses,
/// queries and evidence.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub facts: Vec<(Atom, LabelExpr)>,
    pub clauses: Vec<Clause>,
    pub queries: Vec<Atom>,
    pub evidence: Vec<(Atom, bool)>,
}

impl Program {
    /// All constants appearing anywhere in the program.
    pub fn constants(&self) -> BTreeSet<String> {
        fn add_atom(atom: &Atom, out: &mut BTreeSet<String>) {
            for t in &atom.args {
                if let Term::Constant(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        let mut out = BTreeSet::new();
        for (a, _) in &self.facts {
            add_atom(a, &mut out);
        }
        for c in &self.clauses {
            add_atom(&c.head, &mut out);
            for l in &c.body {
                add_atom(&l.atom, &mut out);
            }
        }
        for q in &self.queries {
            add_atom(q, &mut out);
        }
        for (e, _) in &self.evidence {
            add_atom(e, &mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.clauses
            .iter()
            .all(|c| c.head.is_ground() && c.body.iter().all(|l| l.atom.is_ground()))
    }

    /// Instantiates every clause variable over the program's constant set.
    /// Facts, queries and evidence are ground by construction; duplicate
    /// ground clauses collapse. Fails when a clause has variables but the
    /// program declares no constants.
    pub fn ground(&self) -> Result<Program> {
        let constants: Vec<String> = self.constants().into_iter().collect();
        let mut clauses = BTreeSet::new();
        for clause in &self.clauses {
            let mut vars: Vec<String> = Vec::new();
            let collect = |t: &Term, vars: &mut Vec<String>| {
                if let Term::Variable(v) = t {
                    if !vars.contains(v) {
                        vars.push(v.clone());
                    }
                }
            };
            for t in &clause.head.args {
                collect(t, &mut vars);
            }
            for l in &clause.body {
                for t in &l.atom.args {
                    collect(t, &mut vars);
                }
            }
            if vars.is_empty() {
                clauses.insert(clause.clone());
                continue;
            }
            if constants.is_empty() {
                return Err(Error::UnboundedVariable {
                    var: vars[0].clone(),
                });
            }
            // Cartesian product over the constant set, one binding per variable.
            let mut choice = vec![0usize; vars.len()];
            loop {
                let bind = |atom: &Atom| Atom {
                    predicate: atom.predicate.clone(),
                    args: atom
                        .args
                        .iter()
                        .map(|t| match t {
                            Term::Constant(c) => Term::Constant(c.clone()),
                            Term::Variable(v) => {
                                let i = vars.iter().position(|x| x == v).unwrap();
                                Term::Constant(constants[choice[i]].clone())
                            }
                        })
                        .collect(),
                };
                clauses.insert(Clause {
                    head: bind(&clause.head),
                    body: clause
                        .body
                        .iter()
                        .map(|l| Literal {
                            atom: bind(&l.atom),
                            negated: l.negated,
                        })
                        .collect(),
                });
                // Odometer increment over the variable bindings.
                let mut i = 0;
                while i < choice.len() {
                    choice[i] += 1;
                    if choice[i] < constants.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == choice.len() {
                    break;
                }
            }
        }
        let grounded = Program {
            facts: self.facts.clone(),
            clauses: clauses.into_iter().collect(),
            queries: self.queries.clone(),
            evidence: self.evidence.clone(),
        };
        grounded.validate()?;
        Ok(grounded)
    }

    /// Structural checks on a ground program: unique facts, clause heads
    /// distinct from facts, negation restricted to algebraic facts.
    pub fn validate(&self) -> Result<()> {
        let mut fact_set = BTreeSet::new();
        for (atom, label) in &self.facts {
            if let LabelExpr::Prob(p) = label {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Invalid(format!(
                        "fact {atom} has label {p} outside [0, 1]"
                    )));
                }
            }
            if !fact_set.insert(atom.clone()) {
                return Err(Error::DuplicateFact(atom.to_string()));
            }
        }
        for clause in &self.clauses {
            if fact_set.contains(&clause.head) {
                return Err(Error::HeadIsFact(clause.head.to_string()));
            }
            for lit in &clause.body {
                if lit.negated && !fact_set.contains(&lit.atom) {
                    return Err(Error::NegationOnNonFact(lit.atom.to_string()));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (atom, label) in &self.facts {
            writeln!(f, "{label}::{atom}.")?;
        }
        for clause in &self.clauses {
            writeln!(f, "{clause}")?;
        }
        for q in &self.queries {
            writeln!(f, "query({q}).")?;
        }
        for (e, v) in &self.evidence {
            writeln!(f, "evidence({e}, {v}).")?;
        }
        Ok(())
    }
}

/// Least model of a definite program with fact truth fixed by `true_facts`:
/// negated fact literals are evaluated against the given assignment and the
/// clauses are iterated to their unique fixpoint.
pub fn minimal_model(true_facts: &BTreeSet<Atom>, clauses: &[Clause]) -> BTreeSet<Atom> {
    let mut model = true_facts.clone();
    loop {
        let mut changed = false;
        for clause in clauses {
            if model.contains(&clause.head) {
                continue;
            }
            let fires = clause.body.iter().all(|lit| {
                if lit.negated {
                    !true_facts.contains(&lit.atom)
                } else {
                    model.contains(&lit.atom)
                }
            });
            if fires {
                model.insert(clause.head.clone());
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}
