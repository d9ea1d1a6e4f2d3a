//! Generalized Epstein models: a truth algebra and a content algebra linked
//! by the content translation, with the arrow gated by a content condition.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content_algebra::{
    powerset_semilattice, ContentAlgebra, ContentAssignment, ContentError, ContentTables,
};
use crate::formula::{
    parse_in, Compiled, Formula, LanguageMode, Node, ParseError, PrecedesEncoding, TranslationMode,
};
use crate::truth_algebra::{
    complex_algebra, powerset_algebra_bounded, AlgebraError, Elem, FrameFile, PreorderFrame,
    TruthAlgebra, TruthTables,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicVariant {
    Pai0,
    Pai,
    LPai,
    Dai0,
    Dai,
    GD,
    GdD,
    GEq,
    DaiBox,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrowKind {
    /// `[](~a \/ b)` when the content test passes.
    Boxed,
    /// `~a \/ b` when the content test passes.
    Material,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContentCondition {
    ConsequentBelow,
    AntecedentBelow,
    Equal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConsequenceMode {
    /// Preservation of the top element.
    Assertional,
    /// Preservation of lower bounds.
    Order,
}

impl LogicVariant {
    pub const ALL: [LogicVariant; 9] = [
        LogicVariant::Pai0,
        LogicVariant::Pai,
        LogicVariant::LPai,
        LogicVariant::Dai0,
        LogicVariant::Dai,
        LogicVariant::GD,
        LogicVariant::GdD,
        LogicVariant::GEq,
        LogicVariant::DaiBox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LogicVariant::Pai0 => "PAI0",
            LogicVariant::Pai => "PAI",
            LogicVariant::LPai => "lPAI",
            LogicVariant::Dai0 => "DAI0",
            LogicVariant::Dai => "DAI",
            LogicVariant::GD => "gD",
            LogicVariant::GdD => "gdD",
            LogicVariant::GEq => "gEq",
            LogicVariant::DaiBox => "DAIbox",
        }
    }

    pub fn language(self) -> LanguageMode {
        match self {
            LogicVariant::Pai0 | LogicVariant::Pai | LogicVariant::LPai | LogicVariant::DaiBox => {
                LanguageMode::Modal
            }
            _ => LanguageMode::Demodalized,
        }
    }

    pub fn translation(self) -> TranslationMode {
        match self {
            LogicVariant::Pai0 | LogicVariant::Dai0 => TranslationMode::Agnostic,
            _ => TranslationMode::Fused,
        }
    }

    pub fn arrow(self) -> ArrowKind {
        match self.language() {
            LanguageMode::Modal => ArrowKind::Boxed,
            LanguageMode::Demodalized => ArrowKind::Material,
        }
    }

    pub fn condition(self) -> ContentCondition {
        match self {
            LogicVariant::GdD => ContentCondition::AntecedentBelow,
            LogicVariant::GEq => ContentCondition::Equal,
            _ => ContentCondition::ConsequentBelow,
        }
    }

    pub fn consequence(self) -> ConsequenceMode {
        match self {
            LogicVariant::LPai => ConsequenceMode::Order,
            _ => ConsequenceMode::Assertional,
        }
    }

    /// Models of this variant interpret `[]` as the identity.
    pub fn box_is_identity(self) -> bool {
        self == LogicVariant::DaiBox
    }

    pub fn is_agnostic(self) -> bool {
        self.translation() == TranslationMode::Agnostic
    }

    pub fn precedes_encoding(self) -> PrecedesEncoding {
        match self.condition() {
            ContentCondition::ConsequentBelow => PrecedesEncoding::ConsequentBelow,
            ContentCondition::AntecedentBelow => PrecedesEncoding::AntecedentBelow,
            ContentCondition::Equal => PrecedesEncoding::Equal,
        }
    }

    /// Parses a formula in this variant's language and precedence encoding.
    pub fn parse(self, src: &str) -> Result<Formula, ParseError> {
        parse_in(src, self.language(), self.precedes_encoding())
    }
}

impl fmt::Display for LogicVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown logic {0:?}; expected one of PAI0, PAI, lPAI, DAI0, DAI, gD, gdD, gEq, DAIbox")]
pub struct UnknownVariant(pub String);

impl FromStr for LogicVariant {
    type Err = UnknownVariant;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LogicVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| UnknownVariant(s.to_string()))
    }
}

/// Truth value paired with content value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SemValue {
    pub truth: Elem,
    pub content: Elem,
}

/// A gru entry the evaluator needed but the source could not supply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MissingGru {
    pub x: Elem,
    pub y: Elem,
}

pub trait GruLookup {
    fn gru(&self, x: Elem, y: Elem) -> Result<Elem, MissingGru>;
}

/// Full gru table of size `n * n`.
pub struct GruTable<'a> {
    pub n: usize,
    pub table: &'a [Elem],
}

impl GruLookup for GruTable<'_> {
    #[inline]
    fn gru(&self, x: Elem, y: Elem) -> Result<Elem, MissingGru> {
        Ok(self.table[x as usize * self.n + y as usize])
    }
}

/// Partially filled gru table; `None` entries are reported as missing.
pub struct PartialGru<'a> {
    pub n: usize,
    pub table: &'a [Option<Elem>],
}

impl GruLookup for PartialGru<'_> {
    #[inline]
    fn gru(&self, x: Elem, y: Elem) -> Result<Elem, MissingGru> {
        self.table[x as usize * self.n + y as usize].ok_or(MissingGru { x, y })
    }
}

/// For fused variants, where gru is never consulted.
pub struct NoGru;

impl GruLookup for NoGru {
    fn gru(&self, x: Elem, y: Elem) -> Result<Elem, MissingGru> {
        Err(MissingGru { x, y })
    }
}

/// The valuation clauses of one variant over a fixed pair of algebras.
#[derive(Clone, Copy)]
pub struct Semantics<'a> {
    pub variant: LogicVariant,
    pub truth: &'a TruthAlgebra,
    pub content: &'a ContentAlgebra,
}

impl<'a> Semantics<'a> {
    pub fn new(variant: LogicVariant, truth: &'a TruthAlgebra, content: &'a ContentAlgebra) -> Self {
        Semantics {
            variant,
            truth,
            content,
        }
    }

    #[inline]
    pub fn neg(&self, a: SemValue) -> SemValue {
        SemValue {
            truth: self.truth.not(a.truth),
            content: a.content,
        }
    }

    #[inline]
    pub fn or(&self, a: SemValue, b: SemValue) -> SemValue {
        SemValue {
            truth: self.truth.join(a.truth, b.truth),
            content: self.content.join(a.content, b.content),
        }
    }

    #[inline]
    pub fn nec(&self, a: SemValue) -> SemValue {
        SemValue {
            truth: self.truth.nec(a.truth),
            content: a.content,
        }
    }

    #[inline]
    pub fn condition_holds(&self, antecedent: Elem, consequent: Elem) -> bool {
        match self.variant.condition() {
            ContentCondition::ConsequentBelow => self.content.le(consequent, antecedent),
            ContentCondition::AntecedentBelow => self.content.le(antecedent, consequent),
            ContentCondition::Equal => antecedent == consequent,
        }
    }

    /// Arrow clause. With `need_content` false the content slot is left at 0
    /// and gru is not consulted.
    #[inline]
    pub fn arrow<G: GruLookup>(
        &self,
        a: SemValue,
        b: SemValue,
        need_content: bool,
        gru: &G,
    ) -> Result<SemValue, MissingGru> {
        let truth = if self.condition_holds(a.content, b.content) {
            let m = self.truth.join(self.truth.not(a.truth), b.truth);
            match self.variant.arrow() {
                ArrowKind::Boxed => self.truth.nec(m),
                ArrowKind::Material => m,
            }
        } else {
            self.truth.zero()
        };
        let content = if !need_content {
            0
        } else {
            match self.variant.translation() {
                TranslationMode::Fused => self.content.join(a.content, b.content),
                TranslationMode::Agnostic => gru.gru(a.content, b.content)?,
            }
        };
        Ok(SemValue { truth, content })
    }

    /// Evaluates a node list bottom-up into `out`, which is cleared first.
    pub fn eval_nodes<G: GruLookup>(
        &self,
        nodes: &[Node],
        atoms: &[SemValue],
        need: Option<&[bool]>,
        gru: &G,
        out: &mut Vec<SemValue>,
    ) -> Result<(), MissingGru> {
        out.clear();
        for (i, node) in nodes.iter().enumerate() {
            let v = match *node {
                Node::Atom(a) => atoms[a],
                Node::Neg(a) => self.neg(out[a]),
                Node::Nec(a) => self.nec(out[a]),
                Node::Or(a, b) => self.or(out[a], out[b]),
                Node::Arrow(a, b) => {
                    let need_here = need.map_or(true, |n| n[i]);
                    self.arrow(out[a], out[b], need_here, gru)?
                }
            };
            out.push(v);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Variant(String),
    #[error("atom {0} has no truth value")]
    MissingValue(String),
    #[error("atom {0} has no content")]
    MissingContent(String),
    #[error("value {value} of atom {atom} is outside its carrier")]
    OutOfCarrier { atom: String, value: Elem },
    #[error("formula uses [] but {0} is demodalized")]
    ModalInDemodalized(LogicVariant),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Content(#[from] ContentError),
    #[error(transparent)]
    UnknownVariant(#[from] UnknownVariant),
    #[error("model file needs exactly one of \"truth\" and \"frame\"")]
    TruthSource,
    #[error("universe element {0:?} is not declared")]
    UnknownUniverseElement(String),
}

/// A finite gE-model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GEModel {
    variant: LogicVariant,
    truth: TruthAlgebra,
    content: ContentAlgebra,
    values: BTreeMap<String, Elem>,
    contents: ContentAssignment,
}

impl GEModel {
    pub fn new(
        variant: LogicVariant,
        truth: TruthAlgebra,
        content: ContentAlgebra,
        values: BTreeMap<String, Elem>,
        contents: ContentAssignment,
    ) -> Result<GEModel, ModelError> {
        let modal = variant.language() == LanguageMode::Modal;
        if truth.has_box() != modal {
            return Err(ModelError::Variant(format!(
                "{variant} needs a truth algebra {} a box",
                if modal { "with" } else { "without" }
            )));
        }
        if variant.box_is_identity() && truth.elements().any(|x| truth.nec(x) != x) {
            return Err(ModelError::Variant(format!("{variant} needs the identity box")));
        }
        if content.has_gru() != variant.is_agnostic() {
            return Err(ModelError::Variant(format!(
                "{variant} needs a content algebra {} gru",
                if variant.is_agnostic() { "with" } else { "without" }
            )));
        }
        for (atom, &v) in &values {
            if v as usize >= truth.size() {
                return Err(ModelError::OutOfCarrier {
                    atom: atom.clone(),
                    value: v,
                });
            }
            if !contents.contains_key(atom) {
                return Err(ModelError::MissingContent(atom.clone()));
            }
        }
        for (atom, &c) in &contents {
            if c as usize >= content.size() {
                return Err(ModelError::OutOfCarrier {
                    atom: atom.clone(),
                    value: c,
                });
            }
            if !values.contains_key(atom) {
                return Err(ModelError::MissingValue(atom.clone()));
            }
        }
        Ok(GEModel {
            variant,
            truth,
            content,
            values,
            contents,
        })
    }

    pub fn variant(&self) -> LogicVariant {
        self.variant
    }
    pub fn truth(&self) -> &TruthAlgebra {
        &self.truth
    }
    pub fn content(&self) -> &ContentAlgebra {
        &self.content
    }
    pub fn values(&self) -> &BTreeMap<String, Elem> {
        &self.values
    }
    pub fn contents(&self) -> &ContentAssignment {
        &self.contents
    }

    pub fn semantics(&self) -> Semantics<'_> {
        Semantics::new(self.variant, &self.truth, &self.content)
    }

    /// Truth and content value of a formula.
    pub fn sem_value(&self, f: &Formula) -> Result<SemValue, ModelError> {
        if self.variant.language() == LanguageMode::Demodalized && f.has_modality() {
            return Err(ModelError::ModalInDemodalized(self.variant));
        }
        let c = Compiled::new(f);
        let atoms = c
            .atoms
            .iter()
            .map(|a| {
                Ok(SemValue {
                    truth: *self
                        .values
                        .get(a)
                        .ok_or_else(|| ModelError::MissingValue(a.clone()))?,
                    content: self.contents[a],
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let mut out = Vec::with_capacity(c.nodes.len());
        let sem = self.semantics();
        let res = match self.content.gru_table() {
            Some(t) => sem.eval_nodes(
                &c.nodes,
                &atoms,
                None,
                &GruTable {
                    n: self.content.size(),
                    table: t,
                },
                &mut out,
            ),
            None => sem.eval_nodes(&c.nodes, &atoms, None, &NoGru, &mut out),
        };
        res.expect("model invariants guarantee a gru table for agnostic variants");
        Ok(out[c.root])
    }

    pub fn eval(&self, f: &Formula) -> Result<Elem, ModelError> {
        Ok(self.sem_value(f)?.truth)
    }

    /// Meet of the premise values; the top element for no premises.
    pub fn premise_meet(&self, premises: &[Formula]) -> Result<Elem, ModelError> {
        premises.iter().try_fold(self.truth.one(), |acc, g| {
            Ok(self.truth.meet(acc, self.eval(g)?))
        })
    }

    pub fn assertional_consequence(
        &self,
        premises: &[Formula],
        goal: &Formula,
    ) -> Result<bool, ModelError> {
        for g in premises {
            if self.eval(g)? != self.truth.one() {
                return Ok(true);
            }
        }
        Ok(self.eval(goal)? == self.truth.one())
    }

    pub fn order_consequence(&self, premises: &[Formula], goal: &Formula) -> Result<bool, ModelError> {
        let x = self.premise_meet(premises)?;
        Ok(self.truth.leq(x, self.eval(goal)?))
    }

    /// Consequence in the mode fixed by the variant.
    pub fn consequence(&self, premises: &[Formula], goal: &Formula) -> Result<bool, ModelError> {
        match self.variant.consequence() {
            ConsequenceMode::Assertional => self.assertional_consequence(premises, goal),
            ConsequenceMode::Order => self.order_consequence(premises, goal),
        }
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            schema_version: Some(1),
            variant: self.variant.name().to_string(),
            truth: Some(self.truth.tables()),
            frame: None,
            content: self.content.tables(),
            values: self.values.clone(),
            contents: self.contents.clone(),
            witness_x: None,
            index: None,
        }
    }

    pub fn from_file(f: &ModelFile) -> Result<GEModel, ModelError> {
        let variant: LogicVariant = f.variant.parse()?;
        let truth = match (&f.truth, &f.frame) {
            (Some(t), None) => TruthAlgebra::new(t.clone())?,
            (None, Some(fr)) => {
                let alg = complex_algebra(&PreorderFrame::from_file(fr)?)?;
                match variant.language() {
                    LanguageMode::Demodalized => alg.without_box(),
                    LanguageMode::Modal if variant.box_is_identity() => alg.with_identity_box(),
                    LanguageMode::Modal => alg,
                }
            }
            _ => return Err(ModelError::TruthSource),
        };
        let content = ContentAlgebra::new(&f.content)?;
        GEModel::new(variant, truth, content, f.values.clone(), f.contents.clone())
    }

    /// A two-valued model whose contents are the union set-assignment over a universe.
    pub fn from_dependence(variant: LogicVariant, d: &DependenceModel) -> Result<GEModel, ModelError> {
        if variant.language() != LanguageMode::Demodalized || variant.is_agnostic() {
            return Err(ModelError::Variant(format!(
                "dependence models need a fused demodalized variant, not {variant}"
            )));
        }
        let content = d.assignment.content_algebra()?;
        let contents = d.assignment.masks()?;
        let truth = powerset_algebra_bounded(1, 1)?;
        let values = d
            .values
            .iter()
            .map(|(k, &b)| (k.clone(), b as Elem))
            .collect();
        GEModel::new(variant, truth, content, values, contents)
    }
}

/// On-disk model format, also used for reported countermodels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthTables>,
    /// Alternative to `truth`: the complex algebra of this frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameFile>,
    pub content: ContentTables,
    pub values: BTreeMap<String, Elem>,
    pub contents: BTreeMap<String, Elem>,
    /// Order mode: the premise meet that is not below the conclusion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_x: Option<Elem>,
    /// Position of the model in the search enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
}

/// Contents given as subsets of a universe, summed over the atoms of a formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnionSetAssignment {
    pub universe: Vec<String>,
    pub sets: BTreeMap<String, Vec<String>>,
}

impl UnionSetAssignment {
    pub fn content_algebra(&self) -> Result<ContentAlgebra, ModelError> {
        if self.universe.len() > 6 {
            return Err(ContentError::Shape("universe larger than 6 elements".into()).into());
        }
        Ok(powerset_semilattice(self.universe.len()))
    }

    /// Each atom's set as a bitmask over the universe order.
    pub fn masks(&self) -> Result<ContentAssignment, ModelError> {
        self.sets
            .iter()
            .map(|(atom, elems)| {
                let mut m: Elem = 0;
                for e in elems {
                    let i = self
                        .universe
                        .iter()
                        .position(|u| u == e)
                        .ok_or_else(|| ModelError::UnknownUniverseElement(e.clone()))?;
                    m |= 1 << i;
                }
                Ok((atom.clone(), m))
            })
            .collect()
    }
}

/// A two-valued dependence model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceModel {
    #[serde(flatten)]
    pub assignment: UnionSetAssignment,
    pub values: BTreeMap<String, bool>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content_algebra::{chain_semilattice, enumerate_semilattices};
    use crate::formula::parse;
    use crate::truth_algebra::powerset_algebra;

    fn chain3_const_top() -> ContentAlgebra {
        chain_semilattice(3).with_gru(vec![2; 9])
    }

    fn one_world_model(variant: LogicVariant, content: ContentAlgebra, vals: &[(&str, Elem, Elem)]) -> GEModel {
        let mut truth = powerset_algebra(1).unwrap();
        if variant.language() == LanguageMode::Modal {
            truth = truth.with_identity_box();
        }
        GEModel::new(
            variant,
            truth,
            content,
            vals.iter().map(|(a, v, _)| (a.to_string(), *v)).collect(),
            vals.iter().map(|(a, _, c)| (a.to_string(), *c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn variant_switches() {
        use LogicVariant::*;
        let agnostic: Vec<_> = LogicVariant::ALL.into_iter().filter(|v| v.is_agnostic()).collect();
        assert_eq!(agnostic, vec![Pai0, Dai0]);
        assert_eq!(GdD.condition(), ContentCondition::AntecedentBelow);
        assert_eq!(GEq.condition(), ContentCondition::Equal);
        assert_eq!(LPai.consequence(), ConsequenceMode::Order);
        assert_eq!(DaiBox.arrow(), ArrowKind::Boxed);
        assert_eq!(Dai.arrow(), ArrowKind::Material);
        for v in LogicVariant::ALL {
            assert_eq!(v.name().parse::<LogicVariant>(), Ok(v));
        }
        assert!("PAI1".parse::<LogicVariant>().is_err());
    }

    #[test]
    fn content_test_gates_arrow() {
        // Two-chain contents: 0 below 1.
        let chain = chain_semilattice(2);
        let m = one_world_model(LogicVariant::Pai, chain, &[("p", 1, 1), ("q", 1, 0)]);
        assert_eq!(m.eval(&parse("p -> q").unwrap()).unwrap(), 1);
        assert_eq!(m.eval(&parse("q -> p").unwrap()).unwrap(), 0);
        assert_eq!(m.eval(&parse("q < p").unwrap()).unwrap(), 1);
        assert_eq!(m.eval(&parse("p < q").unwrap()).unwrap(), 0);
    }

    #[test]
    fn trivial_contents_make_arrow_strict_implication() {
        let triv = enumerate_semilattices(1, true).unwrap().pop().unwrap();
        let m = one_world_model(LogicVariant::Pai, triv, &[("p", 1, 0), ("q", 1, 0)]);
        assert_eq!(m.eval(&parse("p -> q").unwrap()).unwrap(), 1);
    }

    #[test]
    fn agnostic_arrow_content_escapes_join() {
        let m = one_world_model(LogicVariant::Pai0, chain3_const_top(), &[("p", 1, 1)]);
        let boxed = m.sem_value(&parse("[]p").unwrap()).unwrap();
        let arrow = m.sem_value(&parse("(p \\/ ~p) -> p").unwrap()).unwrap();
        assert_eq!(boxed, SemValue { truth: 1, content: 1 });
        assert_eq!(arrow, SemValue { truth: 1, content: 2 });
    }

    #[test]
    fn consequence_relations() {
        let frame = PreorderFrame::new(vec![0b11, 0b10]).unwrap();
        let truth = complex_algebra(&frame).unwrap();
        let triv = enumerate_semilattices(1, true).unwrap().pop().unwrap();
        let vals = [("p".to_string(), 0b01)].into_iter().collect();
        let conts = [("p".to_string(), 0)].into_iter().collect();
        let m = GEModel::new(LogicVariant::LPai, truth, triv, vals, conts).unwrap();
        let (p, bp) = (parse("p").unwrap(), parse("[]p").unwrap());
        assert!(!m.order_consequence(&[p.clone()], &bp).unwrap());
        assert!(m.assertional_consequence(&[p.clone()], &bp).unwrap());
        assert_eq!(m.premise_meet(&[p.clone()]).unwrap(), 0b01);
        assert!(m.order_consequence(&[p.clone()], &p).unwrap());
        assert!(!m.consequence(&[], &p).unwrap());
    }

    #[test]
    fn invariants_enforced() {
        let triv = enumerate_semilattices(1, true).unwrap().pop().unwrap();
        let boolean = powerset_algebra(1).unwrap();
        let e = GEModel::new(LogicVariant::Pai, boolean.clone(), triv.clone(), BTreeMap::new(), BTreeMap::new());
        assert!(matches!(e, Err(ModelError::Variant(_))));
        let e = GEModel::new(LogicVariant::Dai0, boolean.clone(), triv.clone(), BTreeMap::new(), BTreeMap::new());
        assert!(matches!(e, Err(ModelError::Variant(_))));
        let m = GEModel::new(LogicVariant::Dai, boolean, triv, BTreeMap::new(), BTreeMap::new()).unwrap();
        assert!(matches!(m.eval(&parse("[]p").unwrap()), Err(ModelError::ModalInDemodalized(_))));
        assert!(matches!(m.eval(&parse("p").unwrap()), Err(ModelError::MissingValue(_))));
    }

    #[test]
    fn model_file_round_trip() {
        let m = one_world_model(LogicVariant::Pai0, chain3_const_top(), &[("p", 1, 1)]);
        let json = serde_json::to_string(&m.to_file()).unwrap();
        let back: ModelFile = serde_json::from_str(&json).unwrap();
        assert_eq!(GEModel::from_file(&back).unwrap(), m);
    }

    #[test]
    fn dependence_ingestion() {
        let d: DependenceModel = serde_json::from_str(
            r#"{"universe": ["a", "b"], "sets": {"p": ["a"], "q": ["a", "b"]},
                "values": {"p": true, "q": false}}"#,
        )
        .unwrap();
        let m = GEModel::from_dependence(LogicVariant::GD, &d).unwrap();
        assert_eq!(m.contents()["q"], 0b11);
        assert_eq!(m.eval(&parse("q -> p").unwrap()).unwrap(), 1);
        assert_eq!(m.eval(&parse("p -> q").unwrap()).unwrap(), 0);
    }
}
