//! Hilbert calculi, the line-by-line proof checker and the bundled derivations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{parse_in, Binding, Formula, LanguageMode, ParseError, PrecedesEncoding};
use crate::ge_model::LogicVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// From `A` and `A => B` infer `B`.
    Mp,
    /// From a premise-free `A` infer `[]A`.
    Nec,
    /// From any `A` infer `[]A`.
    NecG,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Mp => "MP",
            Rule::Nec => "Nec",
            Rule::NecG => "Nec_g",
        })
    }
}

/// Schema sources, with `A B C D` as metavariables.
const SCHEMA_SOURCES: &[(&str, &str)] = &[
    ("A1", "A => (B => A)"),
    ("A2", "(A => (B => C)) => ((A => B) => (A => C))"),
    ("A3", "(~A => ~B) => (B => A)"),
    ("A4", "(A -> B) <-> ([](A => B) /\\ (B < A))"),
    ("K", "[](A => B) => ([]A => []B)"),
    ("T", "[]A => A"),
    ("4", "[]A => [][]A"),
    ("O1", "A < A"),
    ("O2", "((A < B) /\\ (B < C)) => (A < C)"),
    ("O3", "(A < B) => ((A \\/ B) < B)"),
    ("O4", "((A < B) <-> (A < ~B)) /\\ ((A < B) <-> (~A < B))"),
    ("O5", "((A < B) <-> (A < []B)) /\\ ((A < B) <-> ([]A < B))"),
    ("C1", "(A < (A \\/ B)) /\\ (B < (A \\/ B))"),
    ("C2", "((A < C) /\\ (B < C)) => ((A \\/ B) < C)"),
    ("C3", "((A < C) /\\ (C < A) /\\ (B < D) /\\ (D < B)) => ((A -> B) < (C -> D))"),
    ("A5", "((A -> B) < (A \\/ B)) /\\ ((A \\/ B) < (A -> B))"),
    ("A6", "A => []A"),
    ("A4D", "(A -> B) <-> ((A => B) /\\ (B < A))"),
    ("A4dD", "(A -> B) <-> ((A => B) /\\ (A < B))"),
    ("A4Eq", "(A -> B) <-> ((A => B) /\\ (A < B) /\\ (B < A))"),
];

fn source(name: &str) -> &'static str {
    SCHEMA_SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .expect("known schema name")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    /// `<` already expanded under the calculus' encoding.
    pub formula: Formula,
}

/// Calculi that are not attached to a logic variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalculusName {
    Variant(LogicVariant),
    S4,
    S4Global,
}

impl fmt::Display for CalculusName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalculusName::Variant(v) => write!(f, "{v}"),
            CalculusName::S4 => f.write_str("S4"),
            CalculusName::S4Global => f.write_str("S4g"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown calculus {0:?}; expected a logic name, S4 or S4g")]
pub struct UnknownCalculus(pub String);

impl FromStr for CalculusName {
    type Err = UnknownCalculus;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S4" => Ok(CalculusName::S4),
            "S4g" => Ok(CalculusName::S4Global),
            _ => s
                .parse::<LogicVariant>()
                .map(CalculusName::Variant)
                .map_err(|_| UnknownCalculus(s.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Calculus {
    pub name: CalculusName,
    pub language: LanguageMode,
    pub encoding: PrecedesEncoding,
    pub schemata: Vec<Schema>,
    pub rules: BTreeSet<Rule>,
}

const PAI0_AXIOMS: &[&str] = &[
    "A1", "A2", "A3", "A4", "K", "T", "4", "O1", "O2", "O3", "O4", "O5", "C1", "C2", "C3",
];
const DAI_AXIOMS: &[&str] = &["A1", "A2", "A3", "A4D", "A5", "O1", "O2", "O3", "O4", "C1", "C2", "C3"];
const S4_AXIOMS: &[&str] = &["A1", "A2", "A3", "K", "T", "4"];

impl Calculus {
    pub fn new(name: CalculusName) -> Calculus {
        use LogicVariant::*;
        let (axioms, rules): (Vec<&str>, &[Rule]) = match name {
            CalculusName::S4 => (S4_AXIOMS.to_vec(), &[Rule::Mp, Rule::Nec]),
            CalculusName::S4Global => (S4_AXIOMS.to_vec(), &[Rule::Mp, Rule::NecG]),
            CalculusName::Variant(v) => match v {
                Pai0 => (PAI0_AXIOMS.to_vec(), &[Rule::Mp, Rule::NecG]),
                Pai => ([PAI0_AXIOMS, &["A5"]].concat(), &[Rule::Mp, Rule::NecG]),
                LPai => ([PAI0_AXIOMS, &["A5"]].concat(), &[Rule::Mp, Rule::Nec]),
                DaiBox => ([PAI0_AXIOMS, &["A5", "A6"]].concat(), &[Rule::Mp, Rule::NecG]),
                Dai | GD => (DAI_AXIOMS.to_vec(), &[Rule::Mp]),
                Dai0 => (DAI_AXIOMS.iter().copied().filter(|&a| a != "A5").collect(), &[Rule::Mp]),
                GdD | GEq => {
                    let a4 = if v == GdD { "A4dD" } else { "A4Eq" };
                    let axioms = DAI_AXIOMS.iter().map(|&a| if a == "A4D" { a4 } else { a }).collect();
                    (axioms, &[Rule::Mp])
                }
            },
        };
        let (language, encoding) = match name {
            CalculusName::Variant(v) => (v.language(), v.precedes_encoding()),
            _ => (LanguageMode::Modal, PrecedesEncoding::default()),
        };
        let schemata = axioms
            .into_iter()
            .map(|n| Schema {
                name: SCHEMA_SOURCES.iter().find(|(m, _)| *m == n).unwrap().0,
                formula: parse_in(source(n), language, encoding).expect("schema sources parse"),
            })
            .collect();
        Calculus {
            name,
            language,
            encoding,
            schemata,
            rules: rules.iter().copied().collect(),
        }
    }

    pub fn for_variant(v: LogicVariant) -> Calculus {
        Calculus::new(CalculusName::Variant(v))
    }

    pub fn by_name(name: &str) -> Result<Calculus, UnknownCalculus> {
        Ok(Calculus::new(name.parse()?))
    }

    pub fn schema(&self, name: &str) -> Option<&Schema> {
        self.schemata.iter().find(|s| s.name == name)
    }

    pub fn has_rule(&self, r: Rule) -> bool {
        self.rules.contains(&r)
    }

    /// Parses a formula in this calculus' language and encoding.
    pub fn parse(&self, src: &str) -> Result<Formula, ParseError> {
        parse_in(src, self.language, self.encoding)
    }

    /// Instantiates a named schema; `binding` maps `A B C D` to formulas.
    pub fn instance(&self, name: &str, binding: &[(&str, Formula)]) -> Option<Formula> {
        let b: Binding = binding.iter().map(|(k, f)| (k.to_string(), f.clone())).collect();
        self.schema(name)?.formula.substitute(&b).ok()
    }
}

/// The schemata of a calculus, by name.
pub fn axioms_of(calc: &Calculus) -> Vec<(&'static str, Formula)> {
    calc.schemata.iter().map(|s| (s.name, s.formula.clone())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    /// Index into the premise list.
    Premise(usize),
    /// A schema instance; with a binding the instance must be exactly that substitution.
    Axiom { name: String, binding: Option<Binding> },
    /// Classical tautology, treating `[]` and `->` subformulas as atoms.
    Taut,
    /// Lines `i` and `j`, where line `j` is `line_i => this`.
    Mp(usize, usize),
    Nec(usize),
    NecG(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub formula: Formula,
    pub just: Justification,
}

/// Lines are numbered from 0 here and from 1 in files and rejections.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reason {
    BadSchemaMatch,
    BadMp,
    BadNec,
    NecOnPremise,
    RuleAbsent,
    ForwardReference,
    NotTautology,
    BadPremise,
    WrongConclusion,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::BadSchemaMatch => "bad-schema-match",
            Reason::BadMp => "bad-mp",
            Reason::BadNec => "bad-nec",
            Reason::NecOnPremise => "nec-on-premise",
            Reason::RuleAbsent => "rule-absent",
            Reason::ForwardReference => "forward-reference",
            Reason::NotTautology => "not-tautology",
            Reason::BadPremise => "bad-premise",
            Reason::WrongConclusion => "wrong-conclusion",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {reason}: {detail}")]
pub struct Rejection {
    /// 1-based; 0 when the proof as a whole is at fault.
    pub line: usize,
    pub reason: Reason,
    pub detail: String,
}

/// Largest number of propositional atoms a `Taut` line may have.
pub const MAX_TAUT_ATOMS: usize = 20;

fn boolean_atoms<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Neg(a) => boolean_atoms(a, out),
        Formula::Or(a, b) => {
            boolean_atoms(a, out);
            boolean_atoms(b, out);
        }
        _ => {
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
}

fn boolean_eval(f: &Formula, atoms: &[&Formula], bits: u32) -> bool {
    match f {
        Formula::Neg(a) => !boolean_eval(a, atoms, bits),
        Formula::Or(a, b) => boolean_eval(a, atoms, bits) || boolean_eval(b, atoms, bits),
        _ => {
            let i = atoms.iter().position(|a| *a == f).unwrap();
            bits & (1 << i) != 0
        }
    }
}

/// Truth-table check over the Boolean skeleton. `None` when the skeleton is too large.
pub fn is_tautology(f: &Formula) -> Option<bool> {
    let mut atoms = Vec::new();
    boolean_atoms(f, &mut atoms);
    if atoms.len() > MAX_TAUT_ATOMS {
        return None;
    }
    Some((0u32..1 << atoms.len()).all(|bits| boolean_eval(f, &atoms, bits)))
}

/// Checks every line and returns the last line's formula.
pub fn check_proof(calc: &Calculus, premises: &[Formula], proof: &Proof) -> Result<Formula, Rejection> {
    let mut dependent: Vec<bool> = Vec::with_capacity(proof.lines.len());
    for (k, line) in proof.lines.iter().enumerate() {
        let reject = |reason: Reason, detail: String| Rejection {
            line: k + 1,
            reason,
            detail,
        };
        let cited = |i: usize| -> Result<&Formula, Rejection> {
            if i >= k {
                Err(reject(Reason::ForwardReference, format!("cites line {}", i + 1)))
            } else {
                Ok(&proof.lines[i].formula)
            }
        };
        let dep = match &line.just {
            Justification::Premise(i) => {
                let p = premises
                    .get(*i)
                    .ok_or_else(|| reject(Reason::BadPremise, format!("there is no premise {}", i + 1)))?;
                if *p != line.formula {
                    return Err(reject(Reason::BadPremise, format!("premise {} is {p}", i + 1)));
                }
                true
            }
            Justification::Axiom { name, binding } => {
                let schema = calc
                    .schema(name)
                    .ok_or_else(|| reject(Reason::RuleAbsent, format!("{} has no axiom {name}", calc.name)))?;
                let ok = match binding {
                    Some(b) => schema.formula.substitute(b).ok().as_ref() == Some(&line.formula),
                    None => line.formula.match_schema(&schema.formula).is_some(),
                };
                if !ok {
                    return Err(reject(Reason::BadSchemaMatch, format!("not an instance of {name}")));
                }
                false
            }
            Justification::Taut => match is_tautology(&line.formula) {
                Some(true) => false,
                Some(false) => return Err(reject(Reason::NotTautology, "has a falsifying row".into())),
                None => return Err(reject(Reason::NotTautology, "too many Boolean atoms".into())),
            },
            Justification::Mp(i, j) => {
                if !calc.has_rule(Rule::Mp) {
                    return Err(reject(Reason::RuleAbsent, "MP".into()));
                }
                let (a, imp) = (cited(*i)?, cited(*j)?);
                match imp.as_implication() {
                    Some((x, y)) if x == a && *y == line.formula => {}
                    _ => {
                        return Err(reject(
                            Reason::BadMp,
                            format!("line {} is not line {} => this line", j + 1, i + 1),
                        ))
                    }
                }
                dependent[*i] || dependent[*j]
            }
            Justification::Nec(i) | Justification::NecG(i) => {
                let global = matches!(line.just, Justification::NecG(_));
                let rule = if global { Rule::NecG } else { Rule::Nec };
                if !calc.has_rule(rule) {
                    return Err(reject(Reason::RuleAbsent, rule.to_string()));
                }
                let a = cited(*i)?;
                if line.formula != Formula::nec(a.clone()) {
                    return Err(reject(Reason::BadNec, format!("expected [] of line {}", i + 1)));
                }
                if !global && dependent[*i] {
                    return Err(reject(Reason::NecOnPremise, format!("line {} depends on a premise", i + 1)));
                }
                dependent[*i]
            }
        };
        dependent.push(dep);
    }
    proof.lines.last().map(|l| l.formula.clone()).ok_or(Rejection {
        line: 0,
        reason: Reason::WrongConclusion,
        detail: "empty proof".into(),
    })
}

/// `check_proof` plus the requirement that the last line is `goal`.
pub fn check_derivation(calc: &Calculus, premises: &[Formula], goal: &Formula, proof: &Proof) -> Result<(), Rejection> {
    let last = check_proof(calc, premises, proof)?;
    if last != *goal {
        return Err(Rejection {
            line: proof.lines.len(),
            reason: Reason::WrongConclusion,
            detail: format!("proves {last}, not {goal}"),
        });
    }
    Ok(())
}

/// Premise dependence of each line, for well-formed proofs.
pub fn premise_dependence(proof: &Proof) -> Vec<bool> {
    let mut dep: Vec<bool> = Vec::new();
    for line in &proof.lines {
        let d = match line.just {
            Justification::Premise(_) => true,
            Justification::Axiom { .. } | Justification::Taut => false,
            Justification::Mp(i, j) => dep.get(i).copied().unwrap_or(false) || dep.get(j).copied().unwrap_or(false),
            Justification::Nec(i) | Justification::NecG(i) => dep.get(i).copied().unwrap_or(false),
        };
        dep.push(d);
    }
    dep
}

/// Appends lines while reusing formulas already proved.
pub struct ProofBuilder<'a> {
    calc: &'a Calculus,
    pub proof: Proof,
    known: HashMap<Formula, usize>,
}

impl<'a> ProofBuilder<'a> {
    pub fn new(calc: &'a Calculus) -> Self {
        ProofBuilder {
            calc,
            proof: Proof::default(),
            known: HashMap::new(),
        }
    }

    pub fn formula(&self, i: usize) -> &Formula {
        &self.proof.lines[i].formula
    }

    fn push(&mut self, formula: Formula, just: Justification) -> usize {
        if let Some(&i) = self.known.get(&formula) {
            // Premise-free copies may stand in for later ones; premise lines are kept distinct.
            if !matches!(just, Justification::Premise(_)) {
                return i;
            }
        }
        self.proof.lines.push(ProofLine {
            formula: formula.clone(),
            just,
        });
        let i = self.proof.lines.len() - 1;
        self.known.entry(formula).or_insert(i);
        i
    }

    pub fn premise(&mut self, index: usize, f: Formula) -> usize {
        self.push(f, Justification::Premise(index))
    }

    /// Panics on an unknown schema or incomplete binding.
    pub fn axiom(&mut self, name: &str, binding: &[(&str, Formula)]) -> usize {
        let f = self
            .calc
            .instance(name, binding)
            .unwrap_or_else(|| panic!("{} cannot instantiate {name}", self.calc.name));
        self.push(
            f,
            Justification::Axiom {
                name: name.to_string(),
                binding: None,
            },
        )
    }

    pub fn taut(&mut self, f: Formula) -> usize {
        self.push(f, Justification::Taut)
    }

    /// `j` must be `line_i => B`; adds `B`.
    pub fn mp(&mut self, i: usize, j: usize) -> usize {
        let (_, b) = self.formula(j).as_implication().expect("mp needs an implication");
        let b = b.clone();
        self.push(b, Justification::Mp(i, j))
    }

    pub fn nec(&mut self, i: usize) -> usize {
        let f = Formula::nec(self.formula(i).clone());
        self.push(f, Justification::Nec(i))
    }

    pub fn nec_g(&mut self, i: usize) -> usize {
        let f = Formula::nec(self.formula(i).clone());
        self.push(f, Justification::NecG(i))
    }

    /// Derives `goal` from the given lines by one tautology and a chain of MP steps.
    pub fn conclude(&mut self, from: &[usize], goal: Formula) -> usize {
        let taut = from
            .iter()
            .rev()
            .fold(goal, |acc, &i| Formula::implies(self.formula(i).clone(), acc));
        let mut cur = self.taut(taut);
        for &i in from {
            cur = self.mp(i, cur);
        }
        cur
    }

    pub fn finish(self) -> Proof {
        self.proof
    }

    /// Ends the proof on `goal`, restating it by MP if it was proved earlier.
    pub fn finish_on(mut self, goal: &Formula) -> Proof {
        let i = *self.known.get(goal).expect("goal was proved");
        if i + 1 != self.proof.lines.len() {
            let t = self.taut(Formula::implies(goal.clone(), goal.clone()));
            self.proof.lines.push(ProofLine {
                formula: goal.clone(),
                just: Justification::Mp(i, t),
            });
        }
        self.proof
    }
}

#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub name: String,
    pub calculus: CalculusName,
    pub premises: Vec<Formula>,
    pub goal: Formula,
    pub proof: Proof,
    /// Whether `check_derivation` is supposed to accept it.
    pub expect_ok: bool,
}

fn prec(a: &Formula, b: &Formula, calc: &Calculus) -> Formula {
    Formula::precedes(a.clone(), b.clone(), calc.encoding)
}

/// The arrow-modus-ponens replay: `p, p -> q |- q`.
fn arrow_mp() -> CorpusItem {
    let calc = Calculus::for_variant(LogicVariant::Pai0);
    let p = |s: &str| calc.parse(s).unwrap();
    let premises = vec![p("p"), p("p -> q")];
    let mut b = ProofBuilder::new(&calc);
    let l1 = b.premise(0, premises[0].clone());
    let l2 = b.premise(1, premises[1].clone());
    let a4 = b.axiom("A4", &[("A", p("p")), ("B", p("q"))]);
    let t = b.axiom("T", &[("A", p("p => q"))]);
    b.conclude(&[l1, l2, a4, t], p("q"));
    CorpusItem {
        name: "arrow-mp".into(),
        calculus: calc.name,
        premises,
        goal: p("q"),
        proof: b.finish_on(&p("q")),
        expect_ok: true,
    }
}

/// `x < y` and `y < z` give `x < z` through O2.
fn trans(b: &mut ProofBuilder, xy: usize, yz: usize) -> usize {
    let calc = b.calc;
    let (x, y) = split_prec(calc, b.formula(xy));
    let (_, z) = split_prec(calc, b.formula(yz));
    let o2 = b.axiom("O2", &[("A", x.clone()), ("B", y), ("C", z.clone())]);
    b.conclude(&[xy, yz, o2], prec(&x, &z, calc))
}

/// Reads `x < y` back from its encoding.
fn split_prec(calc: &Calculus, f: &Formula) -> (Formula, Formula) {
    let meta = prec(&Formula::atom("A"), &Formula::atom("B"), calc);
    let m = f.match_schema(&meta).unwrap_or_else(|| panic!("{f} is not a precedence formula"));
    (m["A"].clone(), m["B"].clone())
}

/// Picks one conjunct of an axiom line.
fn conjunct(b: &mut ProofBuilder, line: usize, k: usize) -> usize {
    let c = b.formula(line).conjuncts()[k].clone();
    b.conclude(&[line], c)
}

/// `x < x`, then `~x < x` and `x < ~x`.
fn self_below(b: &mut ProofBuilder, x: &Formula) -> usize {
    b.axiom("O1", &[("A", x.clone())])
}

fn neg_left(b: &mut ProofBuilder, xy: usize) -> usize {
    let calc = b.calc;
    let (x, y) = split_prec(calc, b.formula(xy));
    let o4 = b.axiom("O4", &[("A", x.clone()), ("B", y.clone())]);
    b.conclude(&[xy, o4], prec(&Formula::neg(x), &y, calc))
}

fn neg_right(b: &mut ProofBuilder, xy: usize) -> usize {
    let calc = b.calc;
    let (x, y) = split_prec(calc, b.formula(xy));
    let o4 = b.axiom("O4", &[("A", x.clone()), ("B", y.clone())]);
    b.conclude(&[xy, o4], prec(&x, &Formula::neg(y), calc))
}

fn box_left(b: &mut ProofBuilder, xy: usize) -> usize {
    let calc = b.calc;
    let (x, y) = split_prec(calc, b.formula(xy));
    let o5 = b.axiom("O5", &[("A", x.clone()), ("B", y.clone())]);
    b.conclude(&[xy, o5], prec(&Formula::nec(x), &y, calc))
}

fn box_right(b: &mut ProofBuilder, xy: usize) -> usize {
    let calc = b.calc;
    let (x, y) = split_prec(calc, b.formula(xy));
    let o5 = b.axiom("O5", &[("A", x.clone()), ("B", y.clone())]);
    b.conclude(&[xy, o5], prec(&x, &Formula::nec(y), calc))
}

/// `x < (l \/ r)` from `x < l` (side 0) or `x < r` (side 1).
fn or_right(b: &mut ProofBuilder, xy: usize, l: &Formula, r: &Formula, side: usize) -> usize {
    let c1 = b.axiom("C1", &[("A", l.clone()), ("B", r.clone())]);
    let part = conjunct(b, c1, side);
    trans(b, xy, part)
}

/// `(l \/ r) < (l -> r)` and its converse, from A5.
fn or_arrow(b: &mut ProofBuilder, l: &Formula, r: &Formula, k: usize) -> usize {
    let a5 = b.axiom("A5", &[("A", l.clone()), ("B", r.clone())]);
    conjunct(b, a5, k)
}

/// The box-transparency replay: `(p < q) <-> (p < (tau(q) -> q))`.
fn box_transparency() -> CorpusItem {
    let calc = Calculus::for_variant(LogicVariant::LPai);
    let p = |s: &str| calc.parse(s).unwrap();
    let (phi, psi) = (p("p"), p("q"));
    let tau = Formula::tau(psi.clone());
    let boxed = Formula::arrow(tau.clone(), psi.clone());
    let tau_or = Formula::or(tau.clone(), psi.clone());
    let mut b = ProofBuilder::new(&calc);
    // psi < (tau \/ psi) < (tau -> psi)
    let c1 = b.axiom("C1", &[("A", tau.clone()), ("B", psi.clone())]);
    let up1 = conjunct(&mut b, c1, 1);
    let up2 = or_arrow(&mut b, &tau, &psi, 1);
    let up = trans(&mut b, up1, up2);
    // (tau -> psi) < (tau \/ psi) < psi
    let down1 = or_arrow(&mut b, &tau, &psi, 0);
    let refl = self_below(&mut b, &psi);
    let neg = neg_left(&mut b, refl);
    let c2a = b.axiom("C2", &[("A", psi.clone()), ("B", Formula::neg(psi.clone())), ("C", psi.clone())]);
    let tau_below = b.conclude(&[refl, neg, c2a], prec(&tau, &psi, &calc));
    let c2b = b.axiom("C2", &[("A", tau.clone()), ("B", psi.clone()), ("C", psi.clone())]);
    let down2 = b.conclude(&[tau_below, refl, c2b], prec(&tau_or, &psi, &calc));
    let down = trans(&mut b, down1, down2);
    let fwd = b.axiom("O2", &[("A", phi.clone()), ("B", psi.clone()), ("C", boxed.clone())]);
    let back = b.axiom("O2", &[("A", phi.clone()), ("B", boxed.clone()), ("C", psi.clone())]);
    let goal = Formula::iff(prec(&phi, &psi, &calc), prec(&phi, &boxed, &calc));
    b.conclude(&[up, down, fwd, back], goal.clone());
    CorpusItem {
        name: "box-transparency".into(),
        calculus: calc.name,
        premises: vec![],
        proof: b.finish_on(&goal),
        goal,
        expect_ok: true,
    }
}

/// Fine's conjunction axiom: `((p < r) /\ (q < r)) => ((p /\ q) < r)`.
fn conjunction_below() -> CorpusItem {
    let calc = Calculus::for_variant(LogicVariant::LPai);
    let p = |s: &str| calc.parse(s).unwrap();
    let (a, c, r) = (p("p"), p("q"), p("r"));
    let (na, nc) = (Formula::neg(a.clone()), Formula::neg(c.clone()));
    let or = Formula::or(a.clone(), c.clone());
    let nor = Formula::or(na.clone(), nc.clone());
    let mut b = ProofBuilder::new(&calc);
    let c2 = b.axiom("C2", &[("A", a.clone()), ("B", c.clone()), ("C", r.clone())]);
    let neg_below = |b: &mut ProofBuilder, x: &Formula, side: usize| {
        let refl = self_below(b, x);
        let n = neg_left(b, refl);
        or_right(b, n, &a, &c, side)
    };
    let na_or = neg_below(&mut b, &a, 0);
    let nc_or = neg_below(&mut b, &c, 1);
    let c2n = b.axiom("C2", &[("A", na), ("B", nc), ("C", or.clone())]);
    let nor_or = b.conclude(&[na_or, nc_or, c2n], prec(&nor, &or, &calc));
    let refl = self_below(&mut b, &nor);
    let and_nor = neg_left(&mut b, refl);
    let and_or = trans(&mut b, and_nor, nor_or);
    let and = Formula::and(a.clone(), c.clone());
    let o2 = b.axiom("O2", &[("A", and.clone()), ("B", or), ("C", r.clone())]);
    let goal = Formula::implies(Formula::and(prec(&a, &r, &calc), prec(&c, &r, &calc)), prec(&and, &r, &calc));
    b.conclude(&[c2, and_or, o2], goal.clone());
    CorpusItem {
        name: "conjunction-below".into(),
        calculus: calc.name,
        premises: vec![],
        proof: b.finish_on(&goal),
        goal,
        expect_ok: true,
    }
}

/// Proves `atom < beta` for a subformula `beta` containing `atom`.
fn atom_below(b: &mut ProofBuilder, atom: &Formula, beta: &Formula) -> usize {
    match beta {
        Formula::Atom(_) => {
            assert_eq!(atom, beta);
            self_below(b, atom)
        }
        Formula::Neg(g) => {
            let l = atom_below(b, atom, g);
            neg_right(b, l)
        }
        Formula::Nec(g) => {
            let l = atom_below(b, atom, g);
            box_right(b, l)
        }
        Formula::Or(g1, g2) | Formula::Arrow(g1, g2) => {
            let name = atom_name(atom);
            let side = if g1.variables().contains(&name) { 0 } else { 1 };
            let l = atom_below(b, atom, if side == 0 { g1 } else { g2 });
            let l = or_right(b, l, g1, g2, side);
            if matches!(beta, Formula::Arrow(..)) {
                let up = or_arrow(b, g1, g2, 1);
                trans(b, l, up)
            } else {
                l
            }
        }
    }
}

fn atom_name(f: &Formula) -> String {
    match f {
        Formula::Atom(n) => n.clone(),
        _ => unreachable!("atom expected"),
    }
}

/// Proves `alpha < psi` when every variable of `alpha` occurs in `psi`.
fn sub_below(b: &mut ProofBuilder, alpha: &Formula, psi: &Formula) -> usize {
    match alpha {
        Formula::Atom(_) => atom_below(b, alpha, psi),
        Formula::Neg(g) => {
            let l = sub_below(b, g, psi);
            neg_left(b, l)
        }
        Formula::Nec(g) => {
            let l = sub_below(b, g, psi);
            box_left(b, l)
        }
        Formula::Or(g1, g2) | Formula::Arrow(g1, g2) => {
            let l1 = sub_below(b, g1, psi);
            let l2 = sub_below(b, g2, psi);
            let c2 = b.axiom("C2", &[("A", (**g1).clone()), ("B", (**g2).clone()), ("C", psi.clone())]);
            let or = Formula::or((**g1).clone(), (**g2).clone());
            let l = b.conclude(&[l1, l2, c2], prec(&or, psi, b.calc));
            if matches!(alpha, Formula::Arrow(..)) {
                let down = or_arrow(b, g1, g2, 0);
                trans(b, down, l)
            } else {
                l
            }
        }
    }
}

/// A replay of `phi < psi` for `Var(phi) ⊆ Var(psi)`. Panics otherwise.
pub fn variable_inclusion_proof(calc: &Calculus, phi: &Formula, psi: &Formula) -> Proof {
    assert!(phi.variables().is_subset(&psi.variables()));
    let mut b = ProofBuilder::new(calc);
    sub_below(&mut b, phi, psi);
    b.finish_on(&prec(phi, psi, calc))
}

/// Formulas used to generate variable-inclusion instances.
pub const INCLUSION_FORMULAS: &[&str] = &[
    "p",
    "q",
    "~p",
    "[]q",
    "p \\/ q",
    "p -> q",
    "[](q -> ~p)",
    "~(p \\/ []q)",
    "(p -> p) \\/ q",
];

fn inclusion_items() -> Vec<CorpusItem> {
    let calc = Calculus::for_variant(LogicVariant::LPai);
    let fs: Vec<Formula> = INCLUSION_FORMULAS.iter().map(|s| calc.parse(s).unwrap()).collect();
    let mut out = Vec::new();
    for phi in &fs {
        for psi in &fs {
            if phi.variables().is_subset(&psi.variables()) {
                out.push(CorpusItem {
                    name: format!("inclusion: {phi} < {psi}"),
                    calculus: calc.name,
                    premises: vec![],
                    goal: prec(phi, psi, &calc),
                    proof: variable_inclusion_proof(&calc, phi, psi),
                    expect_ok: true,
                });
            }
        }
    }
    out
}

/// `p |- []p` by necessitation on a premise; `global` selects the PAI twin.
pub fn nec_on_premise(global: bool) -> CorpusItem {
    let v = if global { LogicVariant::Pai } else { LogicVariant::LPai };
    let calc = Calculus::for_variant(v);
    let p = Formula::atom("p");
    let mut b = ProofBuilder::new(&calc);
    let l = b.premise(0, p.clone());
    if global {
        b.nec_g(l);
    } else {
        b.nec(l);
    }
    CorpusItem {
        name: if global { "nec-g-on-premise" } else { "nec-on-premise" }.into(),
        calculus: calc.name,
        premises: vec![p.clone()],
        goal: Formula::nec(p),
        proof: b.finish(),
        expect_ok: global,
    }
}

/// Every bundled derivation.
pub fn derivation_corpus() -> Vec<CorpusItem> {
    let mut out = vec![arrow_mp(), box_transparency(), conjunction_below()];
    out.extend(inclusion_items());
    out.push(nec_on_premise(false));
    out.push(nec_on_premise(true));
    out
}

/// One line of a proof file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLineFile {
    pub formula: String,
    pub just: JustFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JustFile {
    /// premise | axiom | taut | mp | nec | nec_g
    pub kind: String,
    /// 1-based line or premise numbers.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Error)]
pub enum ProofFileError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: ParseError },
    #[error("line {line}: {msg}")]
    Shape { line: usize, msg: String },
}

fn one_based(line: usize, args: &[usize], n: usize) -> Result<Vec<usize>, ProofFileError> {
    if args.len() != n || args.iter().any(|&a| a == 0) {
        return Err(ProofFileError::Shape {
            line,
            msg: format!("expected {n} positive argument(s)"),
        });
    }
    Ok(args.iter().map(|a| a - 1).collect())
}

impl Proof {
    /// Reads JSON lines; blank lines are skipped.
    pub fn from_json_lines(src: &str, calc: &Calculus) -> Result<Proof, ProofFileError> {
        let mut lines = Vec::new();
        for (k, raw) in src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let line = k + 1;
            let f: ProofLineFile = serde_json::from_str(raw).map_err(|source| ProofFileError::Json { line, source })?;
            let formula = calc.parse(&f.formula).map_err(|source| ProofFileError::Formula { line, source })?;
            let a = &f.just.args;
            let just = match f.just.kind.as_str() {
                "premise" => Justification::Premise(one_based(line, a, 1)?[0]),
                "taut" => Justification::Taut,
                "mp" => {
                    let v = one_based(line, a, 2)?;
                    Justification::Mp(v[0], v[1])
                }
                "nec" => Justification::Nec(one_based(line, a, 1)?[0]),
                "nec_g" => Justification::NecG(one_based(line, a, 1)?[0]),
                "axiom" => {
                    let name = f.just.name.clone().ok_or_else(|| ProofFileError::Shape {
                        line,
                        msg: "axiom needs a name".into(),
                    })?;
                    let binding = match &f.just.binding {
                        None => None,
                        Some(m) => Some(
                            m.iter()
                                .map(|(k, v)| Ok((k.clone(), calc.parse(v).map_err(|source| ProofFileError::Formula { line, source })?)))
                                .collect::<Result<Binding, ProofFileError>>()?,
                        ),
                    };
                    Justification::Axiom { name, binding }
                }
                other => {
                    return Err(ProofFileError::Shape {
                        line,
                        msg: format!("unknown justification kind {other:?}"),
                    })
                }
            };
            lines.push(ProofLine { formula, just });
        }
        Ok(Proof { lines })
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let (kind, args, name, binding) = match &l.just {
                Justification::Premise(i) => ("premise", vec![i + 1], None, None),
                Justification::Taut => ("taut", vec![], None, None),
                Justification::Mp(i, j) => ("mp", vec![i + 1, j + 1], None, None),
                Justification::Nec(i) => ("nec", vec![i + 1], None, None),
                Justification::NecG(i) => ("nec_g", vec![i + 1], None, None),
                Justification::Axiom { name, binding } => (
                    "axiom",
                    vec![],
                    Some(name.clone()),
                    binding.as_ref().map(|b| b.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()),
                ),
            };
            let line = ProofLineFile {
                formula: l.formula.to_string(),
                just: JustFile {
                    kind: kind.into(),
                    args,
                    name,
                    binding,
                },
            };
            out.push_str(&serde_json::to_string(&line).expect("serializable"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lpai() -> Calculus {
        Calculus::for_variant(LogicVariant::LPai)
    }

    #[test]
    fn axiom_counts() {
        let n = |v| Calculus::for_variant(v).schemata.len();
        assert_eq!(n(LogicVariant::Pai0), 15);
        assert_eq!(n(LogicVariant::Pai), 16);
        assert_eq!(n(LogicVariant::Dai), 12);
        assert_eq!(n(LogicVariant::Dai0), 11);
        let pai = Calculus::for_variant(LogicVariant::Pai);
        assert_eq!(axioms_of(&pai), axioms_of(&lpai()));
        assert_eq!(pai.rules, [Rule::Mp, Rule::NecG].into());
        assert_eq!(lpai().rules, [Rule::Mp, Rule::Nec].into());
        assert!(Calculus::for_variant(LogicVariant::GdD).schema("A4dD").is_some());
        assert!(Calculus::for_variant(LogicVariant::GdD).schema("A4D").is_none());
    }

    #[test]
    fn o1_is_stored_expanded() {
        let pai = Calculus::for_variant(LogicVariant::Pai);
        assert_eq!(pai.schema("O1").unwrap().formula.to_string(), "(A -> (A \\/ ~A))");
    }

    #[test]
    fn a1_mp_in_every_calculus() {
        for v in LogicVariant::ALL {
            let calc = Calculus::for_variant(v);
            let p = |s: &str| calc.parse(s).unwrap();
            let proof = Proof {
                lines: vec![
                    ProofLine {
                        formula: p("p"),
                        just: Justification::Premise(0),
                    },
                    ProofLine {
                        formula: p("p => (q => p)"),
                        just: Justification::Axiom {
                            name: "A1".into(),
                            binding: None,
                        },
                    },
                    ProofLine {
                        formula: p("q => p"),
                        just: Justification::Mp(0, 1),
                    },
                ],
            };
            check_derivation(&calc, &[p("p")], &p("q => p"), &proof).unwrap();
        }
    }

    #[test]
    fn rejections() {
        let calc = lpai();
        let p = |s: &str| calc.parse(s).unwrap();
        let line = |f: &str, just| ProofLine { formula: p(f), just };
        let bad_axiom = Proof {
            lines: vec![line(
                "p => (q => q)",
                Justification::Axiom {
                    name: "A1".into(),
                    binding: None,
                },
            )],
        };
        assert_eq!(check_proof(&calc, &[], &bad_axiom).unwrap_err().reason, Reason::BadSchemaMatch);
        let fwd = Proof {
            lines: vec![line("q", Justification::Mp(1, 2))],
        };
        let r = check_proof(&calc, &[], &fwd).unwrap_err();
        assert_eq!((r.line, r.reason), (1, Reason::ForwardReference));
        let bad_mp = Proof {
            lines: vec![
                line("p", Justification::Premise(0)),
                line("q => p", Justification::Premise(1)),
                line("q", Justification::Mp(0, 1)),
            ],
        };
        let r = check_proof(&calc, &[p("p"), p("q => p")], &bad_mp).unwrap_err();
        assert_eq!((r.line, r.reason), (3, Reason::BadMp));
        let dai = Calculus::for_variant(LogicVariant::Dai);
        let nec = Proof {
            lines: vec![
                line("p => p", Justification::Taut),
                ProofLine {
                    formula: Formula::nec(p("p => p")),
                    just: Justification::Nec(0),
                },
            ],
        };
        assert_eq!(check_proof(&dai, &[], &nec).unwrap_err().reason, Reason::RuleAbsent);
        assert!(check_proof(&calc, &[], &nec).is_ok());
        let not_taut = Proof {
            lines: vec![line("p => q", Justification::Taut)],
        };
        assert_eq!(check_proof(&calc, &[], &not_taut).unwrap_err().reason, Reason::NotTautology);
    }

    #[test]
    fn nec_on_premise_fixtures() {
        let local = nec_on_premise(false);
        let r = check_derivation(&lpai(), &local.premises, &local.goal, &local.proof).unwrap_err();
        assert_eq!((r.line, r.reason), (2, Reason::NecOnPremise));
        let global = nec_on_premise(true);
        let pai = Calculus::for_variant(LogicVariant::Pai);
        check_derivation(&pai, &global.premises, &global.goal, &global.proof).unwrap();
    }

    #[test]
    fn tautology_treats_modal_parts_as_atoms() {
        let p = |s: &str| lpai().parse(s).unwrap();
        assert_eq!(is_tautology(&p("[]p \\/ ~[]p")), Some(true));
        assert_eq!(is_tautology(&p("[]p => p")), Some(false));
        assert_eq!(is_tautology(&p("(p -> q) => (p -> q)")), Some(true));
    }

    #[test]
    fn corpus_checks() {
        for item in derivation_corpus() {
            let calc = Calculus::new(item.calculus);
            let res = check_derivation(&calc, &item.premises, &item.goal, &item.proof);
            assert_eq!(res.is_ok(), item.expect_ok, "{}: {res:?}", item.name);
        }
    }

    #[test]
    fn proof_file_round_trip() {
        for item in derivation_corpus().into_iter().take(4) {
            let calc = Calculus::new(item.calculus);
            let text = item.proof.to_json_lines();
            assert_eq!(Proof::from_json_lines(&text, &calc).unwrap(), item.proof);
        }
        let calc = lpai();
        let src = r#"{"formula": "p", "just": {"kind": "premise", "args": [1]}}
{"formula": "[]p", "just": {"kind": "nec", "args": [1]}}"#;
        let proof = Proof::from_json_lines(src, &calc).unwrap();
        assert_eq!(proof.lines[1].just, Justification::Nec(0));
        assert!(Proof::from_json_lines(r#"{"formula": "p", "just": {"kind": "mp", "args": [0, 1]}}"#, &calc).is_err());
    }

    #[test]
    fn explicit_binding_must_match() {
        let calc = lpai();
        let p = |s: &str| calc.parse(s).unwrap();
        let binding: Binding = [("A".to_string(), p("q"))].into();
        let proof = Proof {
            lines: vec![ProofLine {
                formula: p("[]p => p"),
                just: Justification::Axiom {
                    name: "T".into(),
                    binding: Some(binding),
                },
            }],
        };
        assert_eq!(check_proof(&calc, &[], &proof).unwrap_err().reason, Reason::BadSchemaMatch);
    }

    #[test]
    fn dependence_tracks_premises() {
        let item = arrow_mp();
        let dep = premise_dependence(&item.proof);
        assert!(dep[0] && dep[1]);
        assert!(*dep.last().unwrap());
        assert!(!dep[2]);
    }
}
