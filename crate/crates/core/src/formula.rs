//! Formula syntax: primitive AST, parser, printer, content translation,
//! substitution and schema matching.
//!
//! Only `~`, `\/`, `[]` and `->` are primitive. The derived connectives
//! `/\`, `=>`, `<->`, `<` (precedence) and `tau(..)` are expanded while parsing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Neg(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Nec(Box<Formula>),
    Arrow(Box<Formula>, Box<Formula>),
}

/// Which content comparison `phi < psi` abbreviates.
///
/// Every encoding makes `phi < psi` hold exactly when the content of `phi`
/// lies below the content of `psi`, relative to the arrow clause in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrecedesEncoding {
    /// `psi -> tau(phi)`, for arrows whose consequent content sits below the antecedent's.
    #[default]
    ConsequentBelow,
    /// `phi -> tau(psi)`, for arrows whose antecedent content sits below the consequent's.
    AntecedentBelow,
    /// `(phi \/ psi) -> tau(psi)`, for arrows demanding equal content.
    Equal,
}

/// Content terms: the image of a formula under the content translation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ContentTerm {
    Atom(String),
    Join(Box<ContentTerm>, Box<ContentTerm>),
    Gru(Box<ContentTerm>, Box<ContentTerm>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationMode {
    /// `->` gets its own binary content operation.
    Agnostic,
    /// `->` shares the join with `\/`.
    Fused,
}

/// Whether `[]` belongs to the object language.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LanguageMode {
    Modal,
    Demodalized,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("'[]' at offset {pos} is not part of the demodalized language")]
    BoxInDemodalized { pos: usize },
    #[error("unexpected character {ch:?} at offset {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected token {found} at offset {pos}, expected {expected}")]
    UnexpectedToken {
        pos: usize,
        found: String,
        expected: &'static str,
    },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubstError {
    #[error("unbound metavariable {0}")]
    Unbound(String),
}

pub type Binding = BTreeMap<String, Formula>;

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }
    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn nec(a: Formula) -> Formula {
        Formula::Nec(Box::new(a))
    }
    pub fn arrow(a: Formula, b: Formula) -> Formula {
        Formula::Arrow(Box::new(a), Box::new(b))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::neg(Formula::or(Formula::neg(a), Formula::neg(b)))
    }
    /// Material conditional `~a \/ b`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::neg(a), b)
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }
    /// `a \/ ~a`: a tautology carrying the content of `a`.
    pub fn tau(a: Formula) -> Formula {
        Formula::or(a.clone(), Formula::neg(a))
    }
    pub fn precedes(a: Formula, b: Formula, enc: PrecedesEncoding) -> Formula {
        match enc {
            PrecedesEncoding::ConsequentBelow => Formula::arrow(b, Formula::tau(a)),
            PrecedesEncoding::AntecedentBelow => Formula::arrow(a, Formula::tau(b)),
            PrecedesEncoding::Equal => Formula::arrow(Formula::or(a, b.clone()), Formula::tau(b)),
        }
    }

    /// Nesting depth of connectives; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Neg(a) | Formula::Nec(a) => 1 + a.depth(),
            Formula::Or(a, b) | Formula::Arrow(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Neg(a) | Formula::Nec(a) => 1 + a.size(),
            Formula::Or(a, b) | Formula::Arrow(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn has_modality(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Nec(_) => true,
            Formula::Neg(a) => a.has_modality(),
            Formula::Or(a, b) | Formula::Arrow(a, b) => a.has_modality() || b.has_modality(),
        }
    }

    /// Atom names occurring in the formula.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(n) => {
                out.insert(n.clone());
            }
            Formula::Neg(a) | Formula::Nec(a) => a.collect_vars(out),
            Formula::Or(a, b) | Formula::Arrow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn metavariables(&self) -> BTreeSet<String> {
        self.variables()
            .into_iter()
            .filter(|n| is_metavariable(n))
            .collect()
    }

    /// Content translation.
    pub fn translate(&self, mode: TranslationMode) -> ContentTerm {
        match self {
            Formula::Atom(n) => ContentTerm::Atom(n.clone()),
            Formula::Neg(a) | Formula::Nec(a) => a.translate(mode),
            Formula::Or(a, b) => {
                ContentTerm::Join(Box::new(a.translate(mode)), Box::new(b.translate(mode)))
            }
            Formula::Arrow(a, b) => {
                let (x, y) = (Box::new(a.translate(mode)), Box::new(b.translate(mode)));
                match mode {
                    TranslationMode::Agnostic => ContentTerm::Gru(x, y),
                    TranslationMode::Fused => ContentTerm::Join(x, y),
                }
            }
        }
    }

    /// Replaces metavariables by their bound formulas; object atoms are kept.
    pub fn substitute(&self, binding: &Binding) -> Result<Formula, SubstError> {
        Ok(match self {
            Formula::Atom(n) if is_metavariable(n) => binding
                .get(n)
                .cloned()
                .ok_or_else(|| SubstError::Unbound(n.clone()))?,
            Formula::Atom(_) => self.clone(),
            Formula::Neg(a) => Formula::neg(a.substitute(binding)?),
            Formula::Nec(a) => Formula::nec(a.substitute(binding)?),
            Formula::Or(a, b) => Formula::or(a.substitute(binding)?, b.substitute(binding)?),
            Formula::Arrow(a, b) => Formula::arrow(a.substitute(binding)?, b.substitute(binding)?),
        })
    }

    /// Finds the binding under which `schema` becomes `self`, if any.
    pub fn match_schema(&self, schema: &Formula) -> Option<Binding> {
        let mut binding = Binding::new();
        match_into(schema, self, &mut binding).then_some(binding)
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Neg(a) | Formula::Nec(a) => vec![a],
            Formula::Or(a, b) | Formula::Arrow(a, b) => vec![a, b],
        }
    }

    /// Splits `a => b` into its antecedent and consequent.
    pub fn as_implication(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Or(l, r) => match l.as_ref() {
                Formula::Neg(a) => Some((a, r)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Flattens the conjunction encoding `~(~a \/ ~b)` into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.push_conjuncts(&mut out);
        out
    }

    fn push_conjuncts<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        if let Formula::Neg(inner) = self {
            if let Formula::Or(l, r) = inner.as_ref() {
                if let (Formula::Neg(a), Formula::Neg(b)) = (l.as_ref(), r.as_ref()) {
                    a.push_conjuncts(out);
                    b.push_conjuncts(out);
                    return;
                }
            }
        }
        out.push(self);
    }
}

fn match_into(schema: &Formula, f: &Formula, binding: &mut Binding) -> bool {
    match (schema, f) {
        (Formula::Atom(n), _) if is_metavariable(n) => match binding.get(n) {
            Some(bound) => bound == f,
            None => {
                binding.insert(n.clone(), f.clone());
                true
            }
        },
        (Formula::Atom(a), Formula::Atom(b)) => a == b,
        (Formula::Neg(a), Formula::Neg(b)) | (Formula::Nec(a), Formula::Nec(b)) => {
            match_into(a, b, binding)
        }
        (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Arrow(a1, a2), Formula::Arrow(b1, b2)) => {
            match_into(a1, b1, binding) && match_into(a2, b2, binding)
        }
        _ => false,
    }
}

/// Uppercase-initial names are schema metavariables.
pub fn is_metavariable(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// Canonical, fully parenthesized ASCII form; `parse` reads it back unchanged.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(n) => write!(f, "{n}"),
            Formula::Neg(a) => write!(f, "~{a}"),
            Formula::Nec(a) => write!(f, "[]{a}"),
            Formula::Or(a, b) => write!(f, "({a} \\/ {b})"),
            Formula::Arrow(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

impl fmt::Display for ContentTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentTerm::Atom(n) => write!(f, "{n}"),
            ContentTerm::Join(a, b) => write!(f, "({a} + {b})"),
            ContentTerm::Gru(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    Box,
    Tau,
    And,
    Or,
    Arrow,
    Implies,
    Iff,
    Prec,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(n) => return write!(f, "identifier {n:?}"),
            Tok::Not => "'~'",
            Tok::Box => "'[]'",
            Tok::Tau => "'tau'",
            Tok::And => "'/\\'",
            Tok::Or => "'\\/'",
            Tok::Arrow => "'->'",
            Tok::Implies => "'=>'",
            Tok::Iff => "'<->'",
            Tok::Prec => "'<'",
            Tok::LParen => "'('",
            Tok::RParen => "')'",
        };
        f.write_str(s)
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        let rest = &src[pos..];
        let (tok, len) = if c.is_whitespace() {
            it.next();
            continue;
        } else if c.is_alphabetic() || c == '_' {
            let len = rest
                .char_indices()
                .find(|&(_, ch)| !(ch.is_alphanumeric() || ch == '_' || ch == '\''))
                .map_or(rest.len(), |(i, _)| i);
            let word = &rest[..len];
            let tok = if word == "tau" || word == "τ" {
                Tok::Tau
            } else {
                Tok::Ident(word.to_string())
            };
            (tok, len)
        } else if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("=>") {
            (Tok::Implies, 2)
        } else if rest.starts_with("[]") {
            (Tok::Box, 2)
        } else if rest.starts_with("\\/") {
            (Tok::Or, 2)
        } else if rest.starts_with("/\\") {
            (Tok::And, 2)
        } else {
            let tok = match c {
                '~' | '¬' => Tok::Not,
                '□' => Tok::Box,
                '∧' => Tok::And,
                '∨' => Tok::Or,
                '→' => Tok::Arrow,
                '⊃' => Tok::Implies,
                '≡' => Tok::Iff,
                '<' | '≺' => Tok::Prec,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(ParseError::UnexpectedChar { pos, ch: c }),
            };
            (tok, c.len_utf8())
        };
        out.push((pos, tok));
        let end = pos + len;
        while it.peek().is_some_and(|&(p, _)| p < end) {
            it.next();
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    enc: PrecedesEncoding,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.bump() {
            Some((_, t)) if t == want => Ok(()),
            Some((pos, t)) => Err(ParseError::UnexpectedToken {
                pos,
                found: t.to_string(),
                expected,
            }),
            None => Err(ParseError::UnexpectedEnd { expected }),
        }
    }

    // Binary levels, loosest first. Each level is right-associative.
    fn equiv(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.cond()?;
        match self.peek() {
            Some(Tok::Iff) => {
                self.bump();
                Ok(Formula::iff(lhs, self.equiv()?))
            }
            Some(Tok::Prec) => {
                self.bump();
                Ok(Formula::precedes(lhs, self.equiv()?, self.enc))
            }
            _ => Ok(lhs),
        }
    }

    fn cond(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disj()?;
        match self.peek() {
            Some(Tok::Arrow) => {
                self.bump();
                Ok(Formula::arrow(lhs, self.cond()?))
            }
            Some(Tok::Implies) => {
                self.bump();
                Ok(Formula::implies(lhs, self.cond()?))
            }
            _ => Ok(lhs),
        }
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.conj()?;
        if self.peek() == Some(&Tok::Or) {
            self.bump();
            return Ok(Formula::or(lhs, self.disj()?));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::And) {
            self.bump();
            return Ok(Formula::and(lhs, self.conj()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        const EXPECTED: &str = "a formula";
        match self.bump() {
            Some((_, Tok::Not)) => Ok(Formula::neg(self.unary()?)),
            Some((_, Tok::Box)) => Ok(Formula::nec(self.unary()?)),
            Some((_, Tok::Tau)) => Ok(Formula::tau(self.unary()?)),
            Some((_, Tok::Ident(n))) => Ok(Formula::Atom(n)),
            Some((_, Tok::LParen)) => {
                let f = self.equiv()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some((pos, t)) => Err(ParseError::UnexpectedToken {
                pos,
                found: t.to_string(),
                expected: EXPECTED,
            }),
            None => Err(ParseError::UnexpectedEnd { expected: EXPECTED }),
        }
    }
}

/// Parses with the default precedence encoding.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    parse_with(src, PrecedesEncoding::default())
}

/// Parses in a given language mode; `[]` is rejected in the demodalized one.
pub fn parse_in(src: &str, mode: LanguageMode, enc: PrecedesEncoding) -> Result<Formula, ParseError> {
    if mode == LanguageMode::Demodalized {
        if let Some((pos, _)) = lex(src)?.into_iter().find(|(_, t)| *t == Tok::Box) {
            return Err(ParseError::BoxInDemodalized { pos });
        }
    }
    parse_with(src, enc)
}

pub fn parse_with(src: &str, enc: PrecedesEncoding) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, enc };
    let f = p.equiv()?;
    match p.bump() {
        None => Ok(f),
        Some((pos, t)) => Err(ParseError::UnexpectedToken {
            pos,
            found: t.to_string(),
            expected: "end of input",
        }),
    }
}

/// A formula stored as a bottom-up node list; children precede parents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Atom(usize),
    Neg(usize),
    Or(usize, usize),
    Nec(usize),
    Arrow(usize, usize),
}

/// Every formula over a fixed atom list up to a depth bound, as a shared DAG.
///
/// Node `i` of depth `d` only refers to nodes of depth `< d`, so evaluators can
/// fill a value vector in index order.
#[derive(Clone, Debug)]
pub struct FormulaTable {
    pub atoms: Vec<String>,
    pub nodes: Vec<Node>,
    /// `layer_end[d]` is one past the last node of depth `<= d`.
    pub layer_end: Vec<usize>,
}

impl FormulaTable {
    /// All formulas with at most `max_depth` nested connectives.
    /// `modal` controls whether `[]` is used.
    pub fn enumerate(atoms: &[&str], max_depth: usize, modal: bool) -> FormulaTable {
        let mut nodes: Vec<Node> = (0..atoms.len()).map(Node::Atom).collect();
        let mut layer_end = vec![nodes.len()];
        for d in 1..=max_depth {
            let prev = layer_end[d - 1];
            let older = if d >= 2 { layer_end[d - 2] } else { 0 };
            let mut fresh = Vec::new();
            for i in older..prev {
                fresh.push(Node::Neg(i));
                if modal {
                    fresh.push(Node::Nec(i));
                }
            }
            // Binary nodes with at least one child from the newest layer.
            for i in 0..prev {
                for j in 0..prev {
                    if i >= older || j >= older {
                        fresh.push(Node::Or(i, j));
                        fresh.push(Node::Arrow(i, j));
                    }
                }
            }
            nodes.extend(fresh);
            layer_end.push(nodes.len());
        }
        FormulaTable {
            atoms: atoms.iter().map(|s| s.to_string()).collect(),
            nodes,
            layer_end,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn formula(&self, i: usize) -> Formula {
        match self.nodes[i] {
            Node::Atom(a) => Formula::atom(&self.atoms[a]),
            Node::Neg(a) => Formula::neg(self.formula(a)),
            Node::Nec(a) => Formula::nec(self.formula(a)),
            Node::Or(a, b) => Formula::or(self.formula(a), self.formula(b)),
            Node::Arrow(a, b) => Formula::arrow(self.formula(a), self.formula(b)),
        }
    }

    /// Indices of the nodes of depth exactly `d`.
    pub fn layer(&self, d: usize) -> std::ops::Range<usize> {
        let start = if d == 0 { 0 } else { self.layer_end[d - 1] };
        start..self.layer_end[d]
    }
}

/// Compiles a single formula into a node list over its own atoms.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub atoms: Vec<String>,
    pub nodes: Vec<Node>,
    pub root: usize,
}

impl Compiled {
    pub fn new(f: &Formula) -> Compiled {
        Compiled::with_atoms(f, f.variables().into_iter().collect())
    }

    /// Shares one atom list across several formulas. Panics if `f` uses an atom outside it.
    pub fn with_atoms(f: &Formula, atoms: Vec<String>) -> Compiled {
        let mut c = Compiled {
            atoms,
            nodes: Vec::new(),
            root: 0,
        };
        let mut seen = std::collections::HashMap::new();
        c.root = c.push(f, &mut seen);
        c
    }

    fn push(&mut self, f: &Formula, seen: &mut std::collections::HashMap<Formula, usize>) -> usize {
        if let Some(&i) = seen.get(f) {
            return i;
        }
        let node = match f {
            Formula::Atom(n) => Node::Atom(
                self.atoms
                    .iter()
                    .position(|a| a == n)
                    .expect("atom missing from compiled atom list"),
            ),
            Formula::Neg(a) => Node::Neg(self.push(a, seen)),
            Formula::Nec(a) => Node::Nec(self.push(a, seen)),
            Formula::Or(a, b) => {
                let (x, y) = (self.push(a, seen), self.push(b, seen));
                Node::Or(x, y)
            }
            Formula::Arrow(a, b) => {
                let (x, y) = (self.push(a, seen), self.push(b, seen));
                Node::Arrow(x, y)
            }
        };
        self.nodes.push(node);
        seen.insert(f.clone(), self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// Marks nodes whose content value can influence the truth value at the root.
    pub fn content_needed(&self) -> Vec<bool> {
        self.content_needed_from(false)
    }

    /// As `content_needed`, optionally also requiring the root's own content.
    pub fn content_needed_from(&self, root: bool) -> Vec<bool> {
        let mut need = vec![false; self.nodes.len()];
        if root {
            need[self.root] = true;
        }
        for i in (0..self.nodes.len()).rev() {
            match self.nodes[i] {
                Node::Atom(_) => {}
                Node::Neg(a) | Node::Nec(a) => need[a] |= need[i],
                Node::Or(a, b) => {
                    need[a] |= need[i];
                    need[b] |= need[i];
                }
                Node::Arrow(a, b) => {
                    need[a] = true;
                    need[b] = true;
                }
            }
        }
        need
    }
}
