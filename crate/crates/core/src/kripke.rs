//! Topic-augmented Kripke models over S4 frames, in two flavors: per-world
//! join-semilattices of topics, and semilattices with an arrow operation tied
//! together along edges by homomorphisms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::content_algebra::{ContentAlgebra, ContentAssignment, ContentError, ContentTables};
use crate::formula::{Compiled, Formula, Node};
use crate::ge_model::{GEModel, LogicVariant, ModelError};
use crate::truth_algebra::{complex_algebra, AlgebraError, Elem, FrameFile, PreorderFrame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Arrow topics are joins; atom-level content inclusion persists along edges.
    Fine,
    /// Arrow topics use a per-world gru; edges carry homomorphisms.
    Ferguson,
}

#[derive(Debug, Error)]
pub enum KripkeError {
    #[error(transparent)]
    Frame(#[from] AlgebraError),
    #[error(transparent)]
    Content(#[from] ContentError),
    #[error("malformed model: {0}")]
    Shape(String),
    #[error("atom {atom} has no topic at world {world}")]
    MissingAtom { world: usize, atom: String },
    #[error("atom {0} has no valuation")]
    MissingValuation(String),
    #[error("topic persistence fails for {p} <= {q} from world {from} to world {to}")]
    Persistence {
        from: usize,
        to: usize,
        p: String,
        q: String,
    },
    #[error("homomorphism {from}->{to}: {reason}")]
    Hom {
        from: usize,
        to: usize,
        reason: String,
    },
    #[error("operation needs the {0:?} flavor")]
    Flavor(Flavor),
    #[error("no root worlds given")]
    EmptyRoots,
    #[error("world {0} does not exist")]
    NoSuchWorld(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A finite topic-augmented Kripke model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopicKripkeModel {
    frame: PreorderFrame,
    algebras: Vec<ContentAlgebra>,
    topics: Vec<ContentAssignment>,
    val: BTreeMap<String, u32>,
    flavor: Flavor,
    homs: BTreeMap<(usize, usize), Vec<Elem>>,
}

/// Extensions of a list of nodes: a world set and per-world topics for each node.
#[derive(Clone, Debug)]
pub struct ExtensionTable {
    pub worlds: usize,
    pub truth: Vec<u32>,
    /// `topics[i * worlds + w]`.
    pub topics: Vec<Elem>,
}

impl ExtensionTable {
    pub fn forced(&self, node: usize, w: usize) -> bool {
        self.truth[node] & (1 << w) != 0
    }
    pub fn topic(&self, node: usize, w: usize) -> Elem {
        self.topics[node * self.worlds + w]
    }
}

impl TopicKripkeModel {
    pub fn new(
        frame: PreorderFrame,
        algebras: Vec<ContentAlgebra>,
        topics: Vec<ContentAssignment>,
        val: BTreeMap<String, u32>,
        flavor: Flavor,
        homs: BTreeMap<(usize, usize), Vec<Elem>>,
    ) -> Result<TopicKripkeModel, KripkeError> {
        let m = TopicKripkeModel {
            frame,
            algebras,
            topics,
            val,
            flavor,
            homs,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), KripkeError> {
        let n = self.frame.worlds();
        if self.algebras.len() != n || self.topics.len() != n {
            return Err(KripkeError::Shape(format!(
                "{n} worlds but {} topic algebras and {} topic maps",
                self.algebras.len(),
                self.topics.len()
            )));
        }
        for (atom, &mask) in &self.val {
            if n < 32 && mask >> n != 0 {
                return Err(KripkeError::Shape(format!("valuation of {atom} names a missing world")));
            }
        }
        for w in 0..n {
            let alg = &self.algebras[w];
            if alg.has_gru() != (self.flavor == Flavor::Ferguson) {
                return Err(KripkeError::Shape(format!(
                    "topic algebra at world {w} does not match the {:?} flavor",
                    self.flavor
                )));
            }
            for atom in self.val.keys() {
                let t = *self.topics[w].get(atom).ok_or_else(|| KripkeError::MissingAtom {
                    world: w,
                    atom: atom.clone(),
                })?;
                if t as usize >= alg.size() {
                    return Err(ContentError::OutOfCarrier(t).into());
                }
            }
            for atom in self.topics[w].keys() {
                if !self.val.contains_key(atom) {
                    return Err(KripkeError::MissingValuation(atom.clone()));
                }
            }
        }
        match self.flavor {
            Flavor::Fine => {
                if !self.homs.is_empty() {
                    return Err(KripkeError::Shape("homomorphisms given for a fine model".into()));
                }
                self.check_persistence()
            }
            Flavor::Ferguson => self.check_homs(),
        }
    }

    fn check_persistence(&self) -> Result<(), KripkeError> {
        let n = self.frame.worlds();
        for w in 0..n {
            for v in (0..n).filter(|&v| v != w && self.frame.sees(w, v)) {
                for p in self.val.keys() {
                    for q in self.val.keys() {
                        let (tw, tv) = (&self.topics[w], &self.topics[v]);
                        if self.algebras[w].le(tw[p], tw[q]) && !self.algebras[v].le(tv[p], tv[q]) {
                            return Err(KripkeError::Persistence {
                                from: w,
                                to: v,
                                p: p.clone(),
                                q: q.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_homs(&self) -> Result<(), KripkeError> {
        let n = self.frame.worlds();
        for (&(w, v), _) in &self.homs {
            if w >= n || v >= n || !self.frame.sees(w, v) {
                return Err(KripkeError::Shape(format!("homomorphism on a non-edge {w}->{v}")));
            }
        }
        for w in 0..n {
            for v in (0..n).filter(|&v| self.frame.sees(w, v)) {
                let err = |reason: String| KripkeError::Hom { from: w, to: v, reason };
                let h = self
                    .homs
                    .get(&(w, v))
                    .ok_or_else(|| err("missing".into()))?;
                let (a, b) = (&self.algebras[w], &self.algebras[v]);
                if h.len() != a.size() || h.iter().any(|&x| x as usize >= b.size()) {
                    return Err(err("wrong domain or codomain".into()));
                }
                for x in 0..a.size() as Elem {
                    for y in 0..a.size() as Elem {
                        let hx = |e: Elem| h[e as usize];
                        if hx(a.join(x, y)) != b.join(hx(x), hx(y)) {
                            return Err(err(format!("does not preserve join at ({x}, {y})")));
                        }
                        if hx(a.gru(x, y).unwrap()) != b.gru(hx(x), hx(y)).unwrap() {
                            return Err(err(format!("does not preserve gru at ({x}, {y})")));
                        }
                    }
                }
                for atom in self.val.keys() {
                    if h[self.topics[w][atom] as usize] != self.topics[v][atom] {
                        return Err(err(format!("does not carry the topic of {atom}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn frame(&self) -> &PreorderFrame {
        &self.frame
    }
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
    pub fn algebra(&self, w: usize) -> &ContentAlgebra {
        &self.algebras[w]
    }
    pub fn topic_map(&self, w: usize) -> &ContentAssignment {
        &self.topics[w]
    }
    pub fn valuation(&self) -> &BTreeMap<String, u32> {
        &self.val
    }
    pub fn worlds(&self) -> usize {
        self.frame.worlds()
    }

    fn check_world(&self, w: usize) -> Result<(), KripkeError> {
        if w >= self.worlds() {
            return Err(KripkeError::NoSuchWorld(w));
        }
        Ok(())
    }

    /// Extensions of every node of a node list over `atoms`.
    pub fn extensions(&self, nodes: &[Node], atoms: &[String]) -> Result<ExtensionTable, KripkeError> {
        let n = self.worlds();
        let mut atom_truth = Vec::with_capacity(atoms.len());
        let mut atom_topics = Vec::with_capacity(atoms.len() * n);
        for a in atoms {
            atom_truth.push(*self.val.get(a).ok_or_else(|| KripkeError::MissingValuation(a.clone()))?);
            for w in 0..n {
                atom_topics.push(*self.topics[w].get(a).ok_or_else(|| KripkeError::MissingAtom {
                    world: w,
                    atom: a.clone(),
                })?);
            }
        }
        let all = self.frame.all_worlds();
        let mut truth = Vec::with_capacity(nodes.len());
        let mut topics = Vec::with_capacity(nodes.len() * n);
        for node in nodes {
            match *node {
                Node::Atom(a) => {
                    truth.push(atom_truth[a]);
                    topics.extend_from_slice(&atom_topics[a * n..(a + 1) * n]);
                }
                Node::Neg(a) => {
                    truth.push(all & !truth[a]);
                    topics.extend_from_within(a * n..(a + 1) * n);
                }
                Node::Nec(a) => {
                    truth.push(self.frame.interior(truth[a]));
                    topics.extend_from_within(a * n..(a + 1) * n);
                }
                Node::Or(a, b) => {
                    truth.push(truth[a] | truth[b]);
                    for w in 0..n {
                        let t = self.algebras[w].join(topics[a * n + w], topics[b * n + w]);
                        topics.push(t);
                    }
                }
                Node::Arrow(a, b) => {
                    let strict = all & !truth[a] | truth[b];
                    let mut forced = 0u32;
                    for w in 0..n {
                        let alg = &self.algebras[w];
                        let (ta, tb) = (topics[a * n + w], topics[b * n + w]);
                        if alg.le(tb, ta) && self.frame.succ(w) & !strict == 0 {
                            forced |= 1 << w;
                        }
                        topics.push(match self.flavor {
                            Flavor::Fine => alg.join(ta, tb),
                            Flavor::Ferguson => alg.gru(ta, tb).unwrap(),
                        });
                    }
                    truth.push(forced);
                }
            }
        }
        Ok(ExtensionTable {
            worlds: n,
            truth,
            topics,
        })
    }

    pub fn topic_at(&self, w: usize, f: &Formula) -> Result<Elem, KripkeError> {
        self.check_world(w)?;
        let c = Compiled::new(f);
        Ok(self.extensions(&c.nodes, &c.atoms)?.topic(c.root, w))
    }

    pub fn forces(&self, w: usize, f: &Formula) -> Result<bool, KripkeError> {
        self.check_world(w)?;
        let c = Compiled::new(f);
        Ok(self.extensions(&c.nodes, &c.atoms)?.forced(c.root, w))
    }

    /// Restriction to the worlds reachable from `roots`. Kept worlds are
    /// renumbered in the order returned alongside the model.
    pub fn generated_submodel(&self, roots: &[usize]) -> Result<(TopicKripkeModel, Vec<usize>), KripkeError> {
        if roots.is_empty() {
            return Err(KripkeError::EmptyRoots);
        }
        let mut kept = Vec::new();
        for &r in roots {
            self.check_world(r)?;
            if !kept.contains(&r) {
                kept.push(r);
            }
        }
        let closure = roots.iter().fold(0u32, |m, &r| m | self.frame.succ(r));
        for w in 0..self.worlds() {
            if closure & (1 << w) != 0 && !kept.contains(&w) {
                kept.push(w);
            }
        }
        Ok((self.restrict_to(&kept), kept))
    }

    /// `kept` must be upward closed; world `kept[i]` becomes world `i`.
    fn restrict_to(&self, kept: &[usize]) -> TopicKripkeModel {
        let remap = |mask: u32| {
            kept.iter()
                .enumerate()
                .filter(|(_, &old)| mask & (1 << old) != 0)
                .fold(0u32, |m, (i, _)| m | (1 << i))
        };
        let succ = kept.iter().map(|&w| remap(self.frame.succ(w))).collect();
        let homs = self
            .homs
            .iter()
            .filter_map(|(&(w, v), h)| {
                let i = kept.iter().position(|&k| k == w)?;
                let j = kept.iter().position(|&k| k == v)?;
                Some(((i, j), h.clone()))
            })
            .collect();
        TopicKripkeModel {
            frame: PreorderFrame::new(succ).expect("restriction of a preorder is a preorder"),
            algebras: kept.iter().map(|&w| self.algebras[w].clone()).collect(),
            topics: kept.iter().map(|&w| self.topics[w].clone()).collect(),
            val: self.val.iter().map(|(k, &m)| (k.clone(), remap(m))).collect(),
            flavor: self.flavor,
            homs,
        }
    }

    /// Shrinks each world's topic algebra to the part generated by atom topics.
    pub fn surjectivize(&self) -> Result<TopicKripkeModel, KripkeError> {
        if self.flavor != Flavor::Fine {
            return Err(KripkeError::Flavor(Flavor::Fine));
        }
        let mut algebras = Vec::new();
        let mut topics = Vec::new();
        for w in 0..self.worlds() {
            let alg = &self.algebras[w];
            let gens: Vec<Elem> = self.topics[w].values().copied().collect();
            let mut elems = alg.generated(&gens);
            if elems.is_empty() {
                elems.push(0);
            }
            let pos = |x: Elem| elems.iter().position(|&e| e == x).unwrap() as Elem;
            topics.push(self.topics[w].iter().map(|(k, &t)| (k.clone(), pos(t))).collect());
            algebras.push(alg.restrict(&elems));
        }
        Ok(TopicKripkeModel {
            frame: self.frame.clone(),
            algebras,
            topics,
            val: self.val.clone(),
            flavor: Flavor::Fine,
            homs: BTreeMap::new(),
        })
    }

    /// The gE-model of the submodel generated by `root`, whose worlds become
    /// truth-algebra points with `root` as point 0.
    pub fn to_ge_model(&self, root: usize) -> Result<GEModel, KripkeError> {
        let (sub, _) = self.generated_submodel(&[root])?;
        let truth = complex_algebra(&sub.frame)?;
        let variant = match self.flavor {
            Flavor::Fine => LogicVariant::Pai,
            Flavor::Ferguson => LogicVariant::Pai0,
        };
        let values = sub.val.iter().map(|(k, &m)| (k.clone(), m as Elem)).collect();
        Ok(GEModel::new(
            variant,
            truth,
            sub.algebras[0].clone(),
            values,
            sub.topics[0].clone(),
        )?)
    }

    pub fn to_file(&self) -> KripkeFile {
        let n = self.worlds();
        KripkeFile {
            frame: self.frame.to_file(),
            algebras: self.algebras.iter().map(|a| a.tables()).collect(),
            topics: (0..n).map(|w| (format!("w{w}"), self.topics[w].clone())).collect(),
            val: self
                .val
                .iter()
                .map(|(k, &m)| (k.clone(), (0..n).filter(|&w| m & (1 << w) != 0).collect()))
                .collect(),
            flavor: self.flavor,
            homs: (self.flavor == Flavor::Ferguson).then(|| {
                self.homs
                    .iter()
                    .map(|(&(w, v), h)| (format!("w{w}->w{v}"), h.clone()))
                    .collect()
            }),
        }
    }

    pub fn from_file(f: &KripkeFile) -> Result<TopicKripkeModel, KripkeError> {
        let frame = PreorderFrame::from_file(&f.frame)?;
        let n = frame.worlds();
        let algebras = f
            .algebras
            .iter()
            .map(ContentAlgebra::new)
            .collect::<Result<Vec<_>, _>>()?;
        let mut topics = vec![ContentAssignment::new(); n];
        for (name, map) in &f.topics {
            topics[parse_world(name, n)?] = map.clone();
        }
        let mut val = BTreeMap::new();
        for (atom, ws) in &f.val {
            let mut m = 0u32;
            for &w in ws {
                if w >= n {
                    return Err(KripkeError::NoSuchWorld(w));
                }
                m |= 1 << w;
            }
            val.insert(atom.clone(), m);
        }
        let mut homs = BTreeMap::new();
        for (edge, h) in f.homs.iter().flatten() {
            let (a, b) = edge
                .split_once("->")
                .ok_or_else(|| KripkeError::Shape(format!("bad edge name {edge:?}")))?;
            homs.insert((parse_world(a.trim(), n)?, parse_world(b.trim(), n)?), h.clone());
        }
        TopicKripkeModel::new(frame, algebras, topics, val, f.flavor, homs)
    }
}

fn parse_world(name: &str, n: usize) -> Result<usize, KripkeError> {
    let w = name
        .strip_prefix('w')
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| KripkeError::Shape(format!("bad world name {name:?}")))?;
    if w >= n {
        return Err(KripkeError::NoSuchWorld(w));
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeFile {
    pub frame: FrameFile,
    pub algebras: Vec<ContentTables>,
    pub topics: BTreeMap<String, BTreeMap<String, Elem>>,
    pub val: BTreeMap<String, Vec<usize>>,
    pub flavor: Flavor,
    #[serde(default)]
    pub homs: Option<BTreeMap<String, Vec<Elem>>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content_algebra::{chain_semilattice, enumerate_semilattices, powerset_semilattice};
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn chain2() -> ContentAlgebra {
        chain_semilattice(2)
    }

    fn single_world(alg: ContentAlgebra, atoms: &[(&str, Elem, bool)]) -> TopicKripkeModel {
        TopicKripkeModel::new(
            PreorderFrame::new(vec![1]).unwrap(),
            vec![alg],
            vec![atoms.iter().map(|(a, t, _)| (a.to_string(), *t)).collect()],
            atoms.iter().map(|(a, _, v)| (a.to_string(), *v as u32)).collect(),
            Flavor::Fine,
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn forcing_basics() {
        let m = single_world(chain2(), &[("p", 0, true), ("q", 1, true)]);
        assert!(m.forces(0, &f("[]p")).unwrap());
        assert!(!m.forces(0, &f("p -> q")).unwrap());
        assert!(m.forces(0, &f("q -> p")).unwrap());
        assert_eq!(m.topic_at(0, &f("~p")).unwrap(), 0);
        assert_eq!(m.topic_at(0, &f("p -> q")).unwrap(), 1);
        let same = single_world(chain2(), &[("p", 1, true), ("q", 1, true)]);
        assert!(same.forces(0, &f("p -> q")).unwrap());
        assert!(matches!(m.forces(3, &f("p")), Err(KripkeError::NoSuchWorld(3))));
    }

    #[test]
    fn persistence_is_validated() {
        // p below q at world 0 but not at world 1.
        let r = TopicKripkeModel::new(
            PreorderFrame::new(vec![0b11, 0b10]).unwrap(),
            vec![chain2(), chain2()],
            vec![
                [("p".to_string(), 0), ("q".to_string(), 1)].into(),
                [("p".to_string(), 1), ("q".to_string(), 0)].into(),
            ],
            [("p".to_string(), 0), ("q".to_string(), 0)].into(),
            Flavor::Fine,
            BTreeMap::new(),
        );
        assert!(matches!(r, Err(KripkeError::Persistence { from: 0, to: 1, .. })));
    }

    fn chain_model() -> TopicKripkeModel {
        // 0 -> 1 -> 2 with one topic everywhere.
        let triv = enumerate_semilattices(1, true).unwrap().pop().unwrap();
        TopicKripkeModel::new(
            PreorderFrame::new(vec![0b111, 0b110, 0b100]).unwrap(),
            vec![triv.clone(), triv.clone(), triv],
            vec![[("p".to_string(), 0)].into(); 3],
            [("p".to_string(), 0b110)].into(),
            Flavor::Fine,
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn generated_submodels() {
        let m = chain_model();
        let (all, order) = m.generated_submodel(&[0]).unwrap();
        assert_eq!(order, vec![0, 1, 2]);
        assert_eq!(all, m);
        let (sub, order) = m.generated_submodel(&[1]).unwrap();
        assert_eq!(order, vec![1, 2]);
        assert!(sub.forces(0, &f("[]p")).unwrap());
        assert!(!m.forces(0, &f("[]p")).unwrap());
        assert!(matches!(m.generated_submodel(&[]), Err(KripkeError::EmptyRoots)));
    }

    #[test]
    fn surjectivization_shrinks_unused_topics() {
        let m = single_world(powerset_semilattice(2), &[("p", 1, true)]);
        let s = m.surjectivize().unwrap();
        assert_eq!(s.algebra(0).size(), 1);
        assert_eq!(s.topic_map(0)["p"], 0);
    }

    #[test]
    fn bridge_on_singleton() {
        let m = single_world(chain2(), &[("p", 0, true)]);
        let g = m.to_ge_model(0).unwrap();
        assert_eq!(g.variant(), LogicVariant::Pai);
        assert_eq!(g.eval(&f("p")).unwrap(), g.truth().one());
    }

    #[test]
    fn ferguson_homs_validated() {
        let alg = chain2().with_gru(vec![1, 1, 1, 1]);
        let frame = PreorderFrame::new(vec![0b11, 0b10]).unwrap();
        let topics = vec![[("p".to_string(), 0)].into(), [("p".to_string(), 0)].into()];
        let val: BTreeMap<String, u32> = [("p".to_string(), 0b11)].into();
        let mut homs = BTreeMap::new();
        homs.insert((0, 0), vec![0, 1]);
        homs.insert((1, 1), vec![0, 1]);
        let missing = TopicKripkeModel::new(
            frame.clone(),
            vec![alg.clone(), alg.clone()],
            topics.clone(),
            val.clone(),
            Flavor::Ferguson,
            homs.clone(),
        );
        assert!(matches!(missing, Err(KripkeError::Hom { from: 0, to: 1, .. })));
        homs.insert((0, 1), vec![0, 1]);
        let m = TopicKripkeModel::new(frame, vec![alg.clone(), alg], topics, val, Flavor::Ferguson, homs)
            .unwrap();
        assert_eq!(m.topic_at(0, &f("p -> p")).unwrap(), 1);
        let g = m.to_ge_model(0).unwrap();
        assert_eq!(g.variant(), LogicVariant::Pai0);
        let back = TopicKripkeModel::from_file(&m.to_file()).unwrap();
        assert_eq!(back, m);
    }
}
