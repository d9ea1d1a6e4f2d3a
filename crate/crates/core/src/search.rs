//! Bounded exhaustive model enumeration and countermodel search.
//!
//! Models are ordered by truth algebra (frames by world count, then reach
//! matrix), then content semilattice (size, then join table), then atom
//! values, then atom contents, then gru table; assignments are lexicographic
//! with the alphabetically first atom most significant.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::content_algebra::{enumerate_semilattices, permutations, ContentAlgebra, ContentError};
use crate::formula::{Compiled, Formula, LanguageMode};
use crate::ge_model::{
    ConsequenceMode, GEModel, GruTable, LogicVariant, MissingGru, ModelFile, NoGru, PartialGru,
    Semantics, SemValue,
};
use crate::par::{self, Execution};
use crate::truth_algebra::{complex_algebra, powerset_algebra_bounded, Elem, PreorderFrame, TruthAlgebra};

pub const MAX_WORLDS: usize = 4;
pub const MAX_TOPICS: usize = 5;
pub const MAX_AGNOSTIC_TOPICS: usize = 3;
pub const DEFAULT_BUDGET: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_worlds: usize,
    pub max_topics: usize,
    pub dedup_iso: bool,
    /// `(i, k)`: only the `i`-th of `k` interleaved slices.
    pub shard: Option<(usize, usize)>,
    /// Largest model (or model prefix) count a search may visit.
    pub budget: u64,
    pub execution: Execution,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_worlds: 3,
            max_topics: 4,
            dedup_iso: true,
            shard: None,
            budget: DEFAULT_BUDGET,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("bounds: {0}")]
    Bounds(String),
    #[error("search space has {count} models, over the budget of {budget}")]
    Budget { count: u128, budget: u64 },
    #[error("formula uses [] but {0} is demodalized")]
    ModalInDemodalized(LogicVariant),
    #[error(transparent)]
    Content(#[from] ContentError),
}

impl SearchBounds {
    pub fn validate(&self) -> Result<(), SearchError> {
        if !(1..=MAX_WORLDS).contains(&self.max_worlds) {
            return Err(SearchError::Bounds(format!("max_worlds must be in 1..={MAX_WORLDS}")));
        }
        if !(1..=MAX_TOPICS).contains(&self.max_topics) {
            return Err(SearchError::Bounds(format!("max_topics must be in 1..={MAX_TOPICS}")));
        }
        if let Some((i, k)) = self.shard {
            if k == 0 || i >= k {
                return Err(SearchError::Bounds(format!("shard {i}/{k} is not of the form i/k with i < k")));
            }
        }
        Ok(())
    }

    /// Topic bound actually used for a variant.
    pub fn topics_for(&self, variant: LogicVariant) -> usize {
        if variant.is_agnostic() {
            self.max_topics.min(MAX_AGNOSTIC_TOPICS)
        } else {
            self.max_topics
        }
    }

    fn in_shard(&self, index: u64) -> bool {
        self.shard.map_or(true, |(i, k)| index % k as u64 == i as u64)
    }
}

fn reach_key(succ: &[u32], perm: &[usize]) -> Vec<bool> {
    // perm maps old world -> new world.
    let n = succ.len();
    let mut inv = vec![0; n];
    for (old, &new) in perm.iter().enumerate() {
        inv[new] = old;
    }
    let mut key = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            key.push(succ[inv[u]] & (1 << inv[v]) != 0);
        }
    }
    key
}

/// Preorders on `n` worlds in lexicographic order of their reach matrices.
/// With `dedup`, the first frame of each isomorphism class is kept.
pub fn enumerate_preorders(n: usize, dedup: bool) -> Result<Vec<PreorderFrame>, SearchError> {
    if !(1..=MAX_WORLDS).contains(&n) {
        return Err(SearchError::Bounds(format!("frames are enumerated for 1..={MAX_WORLDS} worlds")));
    }
    let off: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let m = off.len();
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for bits in 0u32..(1 << m) {
        let mut succ: Vec<u32> = (0..n).map(|w| 1 << w).collect();
        for (k, &(u, v)) in off.iter().enumerate() {
            // The first off-diagonal cell is the most significant.
            if bits & (1 << (m - 1 - k)) != 0 {
                succ[u] |= 1 << v;
            }
        }
        let Ok(frame) = PreorderFrame::new(succ.clone()) else {
            continue;
        };
        if dedup {
            let canon = perms.iter().map(|p| reach_key(&succ, p)).min().unwrap();
            if !seen.insert(canon) {
                continue;
            }
        }
        out.push(frame);
    }
    Ok(out)
}

/// Truth algebras searched for a variant, in enumeration order.
pub fn truth_algebras(variant: LogicVariant, bounds: &SearchBounds) -> Result<Vec<TruthAlgebra>, SearchError> {
    bounds.validate()?;
    let mut out = Vec::new();
    for n in 1..=bounds.max_worlds {
        if variant.language() == LanguageMode::Modal && !variant.box_is_identity() {
            for f in enumerate_preorders(n, bounds.dedup_iso)? {
                out.push(complex_algebra(&f).expect("enumerated frames are small"));
            }
        } else {
            let b = powerset_algebra_bounded(n, MAX_WORLDS).expect("within the world cap");
            out.push(if variant.box_is_identity() { b.with_identity_box() } else { b });
        }
    }
    Ok(out)
}

/// Content semilattices searched for a variant, without gru tables.
pub fn content_algebras(variant: LogicVariant, bounds: &SearchBounds) -> Result<Vec<ContentAlgebra>, SearchError> {
    bounds.validate()?;
    Ok(enumerate_semilattices(bounds.topics_for(variant), bounds.dedup_iso)?)
}

#[derive(Clone, Copy, Debug)]
struct Block {
    truth: usize,
    content: usize,
    values: u64,
    contents: u64,
    grus: u64,
    prefix_offset: u64,
    model_offset: u64,
}

impl Block {
    fn prefixes(&self) -> u64 {
        self.values * self.contents
    }
    fn models(&self) -> u64 {
        self.prefixes() * self.grus
    }
}

/// The finite model space of a variant over a fixed atom list.
pub struct ModelSpace {
    pub variant: LogicVariant,
    pub atoms: Vec<String>,
    pub truths: Vec<TruthAlgebra>,
    pub contents: Vec<ContentAlgebra>,
    blocks: Vec<Block>,
    prefixes: u64,
    models: u128,
}

fn pow(base: usize, exp: usize) -> u128 {
    (base as u128).pow(exp as u32)
}

fn digits(mut idx: u64, base: usize, out: &mut [Elem]) {
    for d in out.iter_mut().rev() {
        *d = (idx % base as u64) as Elem;
        idx /= base as u64;
    }
}

fn bump(ds: &mut [Elem], base: usize) {
    for d in ds.iter_mut().rev() {
        if (*d as usize) + 1 < base {
            *d += 1;
            return;
        }
        *d = 0;
    }
}

impl ModelSpace {
    pub fn new(variant: LogicVariant, atoms: &[String], bounds: &SearchBounds) -> Result<ModelSpace, SearchError> {
        let truths = truth_algebras(variant, bounds)?;
        let contents = content_algebras(variant, bounds)?;
        let k = atoms.len();
        let mut blocks = Vec::new();
        let (mut prefixes, mut models) = (0u128, 0u128);
        for (ti, t) in truths.iter().enumerate() {
            for (ci, c) in contents.iter().enumerate() {
                let s = c.size();
                let values = pow(t.size(), k);
                let conts = pow(s, k);
                let grus = if variant.is_agnostic() { pow(s, s * s) } else { 1 };
                if prefixes + values * conts > u64::MAX as u128 / 2 {
                    return Err(SearchError::Budget {
                        count: prefixes + values * conts,
                        budget: bounds.budget,
                    });
                }
                blocks.push(Block {
                    truth: ti,
                    content: ci,
                    values: values as u64,
                    contents: conts as u64,
                    grus: grus as u64,
                    prefix_offset: prefixes as u64,
                    model_offset: models.min(u64::MAX as u128) as u64,
                });
                prefixes += values * conts;
                models += values * conts * grus;
            }
        }
        Ok(ModelSpace {
            variant,
            atoms: atoms.to_vec(),
            truths,
            contents,
            blocks,
            prefixes: prefixes as u64,
            models,
        })
    }

    /// Number of complete models, gru tables included.
    pub fn model_count(&self) -> u128 {
        self.models
    }

    /// Number of (algebras, values, contents) prefixes; equals `model_count` for fused variants.
    pub fn prefix_count(&self) -> u64 {
        self.prefixes
    }

    /// The model with a given enumeration index.
    pub fn model_at(&self, index: u64) -> Option<GEModel> {
        let b = self
            .blocks
            .iter()
            .rev()
            .find(|b| b.model_offset <= index && b.models() > 0)?;
        let local = index - b.model_offset;
        if local >= b.models() {
            return None;
        }
        let gru = local % b.grus;
        let prefix = local / b.grus;
        Some(self.build(b, prefix / b.contents, prefix % b.contents, self.variant.is_agnostic().then_some(gru)))
    }

    fn build(&self, b: &Block, value_idx: u64, content_idx: u64, gru_idx: Option<u64>) -> GEModel {
        let k = self.atoms.len();
        let (t, c) = (&self.truths[b.truth], &self.contents[b.content]);
        let mut vals = vec![0; k];
        let mut conts = vec![0; k];
        digits(value_idx, t.size(), &mut vals);
        digits(content_idx, c.size(), &mut conts);
        let content = match gru_idx {
            Some(g) => {
                let mut table = vec![0; c.size() * c.size()];
                digits(g, c.size(), &mut table);
                c.with_gru(table)
            }
            None => c.clone(),
        };
        GEModel::new(
            self.variant,
            t.clone(),
            content,
            self.atoms.iter().cloned().zip(vals).collect(),
            self.atoms.iter().cloned().zip(conts).collect(),
        )
        .expect("enumerated models satisfy the model invariants")
    }
}

/// Stream of `(index, model)` pairs, restricted to the shard if one is set.
pub fn enumerate_models(
    variant: LogicVariant,
    atoms: &BTreeSet<String>,
    bounds: &SearchBounds,
) -> Result<impl Iterator<Item = (u64, GEModel)>, SearchError> {
    let atoms: Vec<String> = atoms.iter().cloned().collect();
    let space = ModelSpace::new(variant, &atoms, bounds)?;
    if space.model_count() > bounds.budget as u128 {
        return Err(SearchError::Budget {
            count: space.model_count(),
            budget: bounds.budget,
        });
    }
    let (start, step) = bounds.shard.map_or((0, 1), |(i, k)| (i as u64, k as u64));
    let total = space.model_count() as u64;
    Ok((start..total)
        .step_by(step as usize)
        .map(move |i| (i, space.model_at(i).expect("index in range"))))
}

/// What counts as a hit while scanning models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Judge {
    /// Roots are premises then goal; a hit is a consequence failure.
    Consequence(ConsequenceMode),
    /// Two roots; a hit is a model giving them different truth or content values.
    Separation,
}

impl Judge {
    /// `Some(witness_x)` on a hit.
    fn hit(self, sem: &Semantics, roots: &[SemValue]) -> Option<Option<Elem>> {
        match self {
            Judge::Consequence(mode) => {
                let (goal, premises) = roots.split_last().expect("goal present");
                let one = sem.truth.one();
                match mode {
                    ConsequenceMode::Assertional => {
                        (premises.iter().all(|p| p.truth == one) && goal.truth != one).then_some(None)
                    }
                    ConsequenceMode::Order => {
                        let x = premises.iter().fold(one, |acc, p| sem.truth.meet(acc, p.truth));
                        (!sem.truth.leq(x, goal.truth)).then_some(Some(x))
                    }
                }
            }
            Judge::Separation => (roots[0] != roots[1]).then_some(None),
        }
    }

    fn needs_root_content(self) -> bool {
        self == Judge::Separation
    }
}

struct Query {
    compiled: Vec<Compiled>,
    need: Vec<Vec<bool>>,
}

impl Query {
    fn new(formulas: &[Formula], atoms: &[String], root_content: bool) -> Query {
        let compiled: Vec<Compiled> = formulas
            .iter()
            .map(|f| Compiled::with_atoms(f, atoms.to_vec()))
            .collect();
        let need = compiled
            .iter()
            .map(|c| {
                let mut need = c.content_needed_from(root_content);
                need.truncate(c.nodes.len());
                need
            })
            .collect();
        Query { compiled, need }
    }

    fn eval<G: crate::ge_model::GruLookup>(
        &self,
        sem: &Semantics,
        atoms: &[SemValue],
        gru: &G,
        buf: &mut Vec<SemValue>,
        roots: &mut Vec<SemValue>,
    ) -> Result<(), MissingGru> {
        roots.clear();
        for (c, need) in self.compiled.iter().zip(&self.need) {
            sem.eval_nodes(&c.nodes, atoms, Some(need.as_slice()), gru, buf)?;
            roots.push(buf[c.root]);
        }
        Ok(())
    }
}

/// A model where the searched property fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub index: u64,
    pub model: GEModel,
    /// Order mode: the premise meet not below the goal.
    pub witness_x: Option<Elem>,
}

impl Countermodel {
    pub fn to_file(&self) -> ModelFile {
        let mut f = self.model.to_file();
        f.witness_x = self.witness_x;
        f.index = Some(self.index);
        f
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// No hit in the searched space.
    Exhausted {
        models: u128,
        /// Evaluations performed; partial gru tables count once per leaf.
        explored: u64,
    },
    Found(Box<Countermodel>),
}

impl Outcome {
    pub fn countermodel(&self) -> Option<&Countermodel> {
        match self {
            Outcome::Found(c) => Some(c),
            Outcome::Exhausted { .. } => None,
        }
    }
    pub fn is_exhausted(&self) -> bool {
        matches!(self, Outcome::Exhausted { .. })
    }
}

struct BlockHit {
    prefix: u64,
    gru: Option<Vec<Elem>>,
    witness: Option<Elem>,
}

/// Scans the model space for the first hit of `judge` on `formulas`.
pub fn search_first(
    variant: LogicVariant,
    formulas: &[Formula],
    judge: Judge,
    bounds: &SearchBounds,
) -> Result<Outcome, SearchError> {
    bounds.validate()?;
    if variant.language() == LanguageMode::Demodalized && formulas.iter().any(|f| f.has_modality()) {
        return Err(SearchError::ModalInDemodalized(variant));
    }
    let atoms: Vec<String> = formulas
        .iter()
        .flat_map(|f| f.variables())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let space = ModelSpace::new(variant, &atoms, bounds)?;
    if space.prefix_count() > bounds.budget {
        return Err(SearchError::Budget {
            count: space.prefix_count() as u128,
            budget: bounds.budget,
        });
    }
    let query = Query::new(formulas, &atoms, judge.needs_root_content());
    let explored = std::sync::atomic::AtomicU64::new(0);
    let hit = par::find_map_first(&space.blocks, bounds.execution, |b| {
        let (hit, n) = scan_block(&space, b, &query, judge, bounds);
        explored.fetch_add(n, std::sync::atomic::Ordering::Relaxed);
        hit.map(|h| (*b, h))
    });
    Ok(match hit {
        None => Outcome::Exhausted {
            models: space.model_count(),
            explored: explored.into_inner(),
        },
        Some((b, h)) => {
            let c = &space.contents[b.content];
            let gru_idx = h
                .gru
                .as_ref()
                .map(|t| t.iter().fold(0u64, |acc, &d| acc * c.size() as u64 + d as u64));
            let model = space.build(&b, h.prefix / b.contents, h.prefix % b.contents, gru_idx);
            Outcome::Found(Box::new(Countermodel {
                index: b.model_offset + h.prefix * b.grus + gru_idx.unwrap_or(0),
                model,
                witness_x: h.witness,
            }))
        }
    })
}

fn scan_block(space: &ModelSpace, b: &Block, query: &Query, judge: Judge, bounds: &SearchBounds) -> (Option<BlockHit>, u64) {
    let (t, c) = (&space.truths[b.truth], &space.contents[b.content]);
    let sem = Semantics::new(space.variant, t, c);
    let k = space.atoms.len();
    let mut vals = vec![0; k];
    let mut conts = vec![0; k];
    let mut atoms = vec![SemValue::default(); k];
    let mut buf = Vec::new();
    let mut roots = Vec::new();
    let mut explored = 0u64;
    let agnostic = space.variant.is_agnostic();
    let n = c.size();
    let mut partial = vec![None; n * n];
    for vi in 0..b.values {
        conts.iter_mut().for_each(|d| *d = 0);
        for ci in 0..b.contents {
            let prefix = vi * b.contents + ci;
            if bounds.in_shard(b.prefix_offset + prefix) {
                for j in 0..k {
                    atoms[j] = SemValue {
                        truth: vals[j],
                        content: conts[j],
                    };
                }
                if agnostic {
                    let mut best = None;
                    dfs(&sem, query, judge, &atoms, &mut partial, n, &mut buf, &mut roots, &mut best, &mut explored);
                    if let Some((table, witness)) = best {
                        return (
                            Some(BlockHit {
                                prefix,
                                gru: Some(table),
                                witness,
                            }),
                            explored,
                        );
                    }
                } else {
                    explored += 1;
                    query
                        .eval(&sem, &atoms, &NoGru, &mut buf, &mut roots)
                        .expect("fused variants never consult gru");
                    if let Some(witness) = judge.hit(&sem, &roots) {
                        return (
                            Some(BlockHit {
                                prefix,
                                gru: None,
                                witness,
                            }),
                            explored,
                        );
                    }
                }
            }
            bump(&mut conts, n);
        }
        bump(&mut vals, t.size());
    }
    (None, explored)
}

/// Explores gru entries only as the evaluator asks for them and keeps the
/// lexicographically least completed table among hits.
#[allow(clippy::too_many_arguments)]
fn dfs(
    sem: &Semantics,
    query: &Query,
    judge: Judge,
    atoms: &[SemValue],
    partial: &mut Vec<Option<Elem>>,
    n: usize,
    buf: &mut Vec<SemValue>,
    roots: &mut Vec<SemValue>,
    best: &mut Option<(Vec<Elem>, Option<Elem>)>,
    explored: &mut u64,
) {
    if let Some((b, _)) = best {
        let floor: Vec<Elem> = partial.iter().map(|e| e.unwrap_or(0)).collect();
        if floor >= *b {
            return;
        }
    }
    let res = query.eval(sem, atoms, &PartialGru { n, table: &partial[..] }, buf, roots);
    match res {
        Err(MissingGru { x, y }) => {
            let pos = x as usize * n + y as usize;
            for v in 0..n as Elem {
                partial[pos] = Some(v);
                dfs(sem, query, judge, atoms, partial, n, buf, roots, best, explored);
            }
            partial[pos] = None;
        }
        Ok(()) => {
            *explored += 1;
            if let Some(w) = judge.hit(sem, roots) {
                let table: Vec<Elem> = partial.iter().map(|e| e.unwrap_or(0)).collect();
                if best.as_ref().map_or(true, |(b, _)| table < *b) {
                    *best = Some((table, w));
                }
            }
        }
    }
}

/// Consequence check in the variant's own consequence mode.
pub fn check_validity(
    variant: LogicVariant,
    premises: &[Formula],
    goal: &Formula,
    bounds: &SearchBounds,
) -> Result<Outcome, SearchError> {
    let mut fs = premises.to_vec();
    fs.push(goal.clone());
    search_first(variant, &fs, Judge::Consequence(variant.consequence()), bounds)
}

/// Searches for a model where `a` and `b` get different truth or content values.
pub fn find_separation(
    variant: LogicVariant,
    a: &Formula,
    b: &Formula,
    bounds: &SearchBounds,
) -> Result<Outcome, SearchError> {
    search_first(variant, &[a.clone(), b.clone()], Judge::Separation, bounds)
}

/// Evaluates every node of a node list in one full model, for sweeps.
pub fn eval_all(
    sem: &Semantics,
    nodes: &[crate::formula::Node],
    atoms: &[SemValue],
    out: &mut Vec<SemValue>,
) {
    let res = match sem.content.gru_table() {
        Some(t) => sem.eval_nodes(nodes, atoms, None, &GruTable { n: sem.content.size(), table: t }, out),
        None => sem.eval_nodes(nodes, atoms, None, &NoGru, out),
    };
    res.expect("complete gru table");
}

/// Atom assignments `(values, contents)` over a pair of algebras, lexicographic.
pub fn assignments(truth_size: usize, content_size: usize, atoms: usize) -> Vec<(Vec<Elem>, Vec<Elem>)> {
    let nv = pow(truth_size, atoms) as u64;
    let nc = pow(content_size, atoms) as u64;
    let mut out = Vec::with_capacity((nv * nc) as usize);
    let mut v = vec![0; atoms];
    for vi in 0..nv {
        digits(vi, truth_size, &mut v);
        let mut c = vec![0; atoms];
        for ci in 0..nc {
            digits(ci, content_size, &mut c);
            out.push((v.clone(), c.clone()));
        }
    }
    out
}

/// Iso-deduplicated topic blocks used to build fine Kripke models: a
/// semilattice and a topic for each atom.
fn topic_blocks(max_topics: usize, atoms: usize) -> Vec<(ContentAlgebra, Vec<Elem>)> {
    let mut out = Vec::new();
    for alg in enumerate_semilattices(max_topics, true).expect("topic bound") {
        let n = alg.size();
        let autos: Vec<Vec<usize>> = permutations(n)
            .into_iter()
            .filter(|p| crate::content_algebra::permuted_table(alg.join_table(), n, p) == alg.join_table())
            .collect();
        let mut seen = HashSet::new();
        let mut ts = vec![0; atoms];
        for idx in 0..pow(n, atoms) as u64 {
            digits(idx, n, &mut ts);
            let canon = autos
                .iter()
                .map(|p| ts.iter().map(|&t| p[t as usize] as Elem).collect::<Vec<_>>())
                .min()
                .unwrap();
            if seen.insert(canon) {
                out.push((alg.clone(), ts.clone()));
            }
        }
    }
    out
}

/// Fine Kripke models up to the bounds, one per isomorphism class of
/// (frame, topic blocks, valuation), in a fixed order. Only every
/// `stride`-th class is built; the class count is returned alongside.
pub fn fine_kripke_models(
    max_worlds: usize,
    max_topics: usize,
    atoms: &[&str],
    stride: u64,
) -> Result<(u64, Vec<crate::kripke::TopicKripkeModel>), SearchError> {
    use crate::kripke::{Flavor, TopicKripkeModel};
    if max_topics > MAX_TOPICS {
        return Err(SearchError::Bounds(format!("max_topics must be at most {MAX_TOPICS}")));
    }
    if stride == 0 {
        return Err(SearchError::Bounds("stride must be positive".into()));
    }
    let k = atoms.len();
    let blocks = topic_blocks(max_topics, k);
    let mut out = Vec::new();
    let mut seen = 0u64;
    for n in 1..=max_worlds {
        let perms = permutations(n);
        for frame in enumerate_preorders(n, true)? {
            let succ: Vec<u32> = (0..n).map(|w| frame.succ(w)).collect();
            let own = reach_key(&succ, &(0..n).collect::<Vec<_>>());
            let autos: Vec<&Vec<usize>> = perms.iter().filter(|p| reach_key(&succ, p) == own).collect();
            let mut choice = vec![0usize; n];
            let nb = blocks.len();
            for bidx in 0..pow(nb, n) as u64 {
                let mut rest = bidx;
                for c in choice.iter_mut().rev() {
                    *c = (rest % nb as u64) as usize;
                    rest /= nb as u64;
                }
                let persistent = (0..n).all(|w| {
                    (0..n).filter(|&v| v != w && frame.sees(w, v)).all(|v| {
                        let (aw, tw) = &blocks[choice[w]];
                        let (av, tv) = &blocks[choice[v]];
                        (0..k).all(|p| (0..k).all(|q| !aw.le(tw[p], tw[q]) || av.le(tv[p], tv[q])))
                    })
                });
                if !persistent {
                    continue;
                }
                for vidx in 0..1u64 << (n * k) {
                    let vals: Vec<u32> = (0..k).map(|p| ((vidx >> (p * n)) as u32) & ((1 << n) - 1)).collect();
                    // Keep only the least representative under frame automorphisms.
                    let key = |perm: &Vec<usize>| {
                        let mut blk = vec![0; n];
                        for w in 0..n {
                            blk[perm[w]] = choice[w];
                        }
                        let vs: Vec<u32> = vals
                            .iter()
                            .map(|&m| (0..n).filter(|&w| m & (1 << w) != 0).fold(0, |acc, w| acc | (1 << perm[w])))
                            .collect();
                        (blk, vs)
                    };
                    let mine = key(&(0..n).collect());
                    if autos.iter().any(|p| key(p) < mine) {
                        continue;
                    }
                    seen += 1;
                    if (seen - 1) % stride != 0 {
                        continue;
                    }
                    let model = TopicKripkeModel::new(
                        frame.clone(),
                        (0..n).map(|w| blocks[choice[w]].0.clone()).collect(),
                        (0..n)
                            .map(|w| {
                                atoms
                                    .iter()
                                    .zip(&blocks[choice[w]].1)
                                    .map(|(a, &t)| (a.to_string(), t))
                                    .collect()
                            })
                            .collect(),
                        atoms.iter().zip(&vals).map(|(a, &m)| (a.to_string(), m)).collect::<BTreeMap<_, _>>(),
                        Flavor::Fine,
                        BTreeMap::new(),
                    )
                    .expect("persistence checked above");
                    out.push(model);
                }
            }
        }
    }
    Ok((seen, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn preorder_counts() {
        let iso: Vec<usize> = (1..=4).map(|n| enumerate_preorders(n, true).unwrap().len()).collect();
        assert_eq!(iso, vec![1, 3, 9, 33]);
        let labelled: Vec<usize> = (1..=4).map(|n| enumerate_preorders(n, false).unwrap().len()).collect();
        assert_eq!(labelled, vec![1, 4, 29, 355]);
        assert!(enumerate_preorders(5, true).is_err());
        let two = enumerate_preorders(2, true).unwrap();
        // Lex order puts the edge 1 -> 0 before 0 -> 1.
        assert_eq!(two[1].succ(0), 0b01);
        assert_eq!(two[1].succ(1), 0b11);
    }

    #[test]
    fn tiny_space_count() {
        let bounds = SearchBounds {
            max_worlds: 1,
            max_topics: 1,
            ..SearchBounds::default()
        };
        let atoms: BTreeSet<String> = ["p".to_string()].into();
        let models: Vec<_> = enumerate_models(LogicVariant::Dai, &atoms, &bounds).unwrap().collect();
        assert_eq!(models.len(), 2);
    }

    #[test]
    fn shards_partition_the_stream() {
        let bounds = SearchBounds {
            max_worlds: 2,
            max_topics: 2,
            ..SearchBounds::default()
        };
        let atoms: BTreeSet<String> = ["p".to_string()].into();
        let all: Vec<u64> = enumerate_models(LogicVariant::Pai0, &atoms, &bounds)
            .unwrap()
            .map(|(i, _)| i)
            .collect();
        let mut merged = Vec::new();
        for i in 0..3 {
            let b = SearchBounds {
                shard: Some((i, 3)),
                ..bounds.clone()
            };
            merged.extend(enumerate_models(LogicVariant::Pai0, &atoms, &b).unwrap().map(|(i, _)| i));
        }
        merged.sort();
        assert_eq!(merged, all);
    }

    #[test]
    fn budget_is_enforced() {
        let bounds = SearchBounds {
            budget: 10,
            ..SearchBounds::default()
        };
        let atoms: BTreeSet<String> = ["p".to_string()].into();
        assert!(matches!(
            enumerate_models(LogicVariant::Pai, &atoms, &bounds),
            Err(SearchError::Budget { .. })
        ));
    }

    #[test]
    fn validity_examples() {
        let b = SearchBounds::default();
        assert!(check_validity(LogicVariant::Pai, &[], &f("(p /\\ q) -> p"), &b).unwrap().is_exhausted());
        let out = check_validity(LogicVariant::Pai, &[], &f("p -> (q \\/ ~q)"), &b).unwrap();
        let cm = out.countermodel().unwrap();
        assert!(!cm.model.consequence(&[], &f("p -> (q \\/ ~q)")).unwrap());
        assert!(check_validity(LogicVariant::Pai, &[f("p")], &f("[]p"), &b).unwrap().is_exhausted());
        let local = check_validity(LogicVariant::LPai, &[f("p")], &f("[]p"), &b).unwrap();
        let cm = local.countermodel().unwrap();
        assert_eq!(cm.model.truth().size(), 4);
        // Frame 1 -> 0 with p true only at world 1.
        assert_eq!(cm.witness_x, Some(0b10));
        assert_eq!(cm.model.eval(&f("[]p")).unwrap(), 0);
    }

    #[test]
    fn lazy_gru_matches_explicit_enumeration() {
        let bounds = SearchBounds {
            max_worlds: 2,
            max_topics: 2,
            ..SearchBounds::default()
        };
        for goal in ["(p -> p) -> p", "(p -> q) < (q -> p)", "((p -> q) -> q) < p"] {
            let goal = f(goal);
            let lazy = check_validity(LogicVariant::Pai0, &[], &goal, &bounds).unwrap();
            let explicit = enumerate_models(LogicVariant::Pai0, &goal.variables(), &bounds)
                .unwrap()
                .find(|(_, m)| !m.consequence(&[], &goal).unwrap());
            match (lazy, explicit) {
                (Outcome::Found(c), Some((i, m))) => {
                    assert_eq!(c.index, i);
                    assert_eq!(c.model, m);
                }
                (Outcome::Exhausted { .. }, None) => {}
                (l, e) => panic!("lazy {l:?} vs explicit {e:?}"),
            }
        }
    }

    #[test]
    fn sharded_first_hits_merge_to_the_global_first() {
        let bounds = SearchBounds {
            max_worlds: 2,
            max_topics: 3,
            ..SearchBounds::default()
        };
        let goal = f("p -> (q \\/ ~q)");
        let whole = check_validity(LogicVariant::Pai, &[], &goal, &bounds).unwrap();
        let best = (0..4)
            .filter_map(|i| {
                let b = SearchBounds {
                    shard: Some((i, 4)),
                    ..bounds.clone()
                };
                check_validity(LogicVariant::Pai, &[], &goal, &b).unwrap().countermodel().map(|c| c.index)
            })
            .min();
        assert_eq!(best, whole.countermodel().map(|c| c.index));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let goal = f("(p -> q) -> (q -> p)");
        let mut b = SearchBounds::default();
        let par = check_validity(LogicVariant::Pai, &[], &goal, &b).unwrap();
        b.execution = Execution::Sequential;
        let seq = check_validity(LogicVariant::Pai, &[], &goal, &b).unwrap();
        assert_eq!(par.countermodel(), seq.countermodel());
    }

    #[test]
    fn fine_model_enumeration_is_deduplicated() {
        let (count, one) = fine_kripke_models(1, 2, &["p"], 1).unwrap();
        // One world: topic blocks (trivial: 1, chain: 2) times two valuations.
        assert_eq!((count, one.len()), (6, 6));
        let (_, every_other) = fine_kripke_models(1, 2, &["p"], 2).unwrap();
        assert_eq!(every_other, one.iter().step_by(2).cloned().collect::<Vec<_>>());
        let (_, two) = fine_kripke_models(2, 1, &["p"], 1).unwrap();
        // Frames: 1 world (2 valuations), discrete pair (3 up to swap),
        // chain (4), cluster (3 up to swap).
        assert_eq!(two.len(), 2 + 3 + 4 + 3);
    }
}
