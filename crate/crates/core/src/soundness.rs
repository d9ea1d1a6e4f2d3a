//! Axiom soundness sweeps over bounded model spaces.
//!
//! A schema's value in a model depends only on the algebras and on the
//! (truth, content) pairs of its metavariable instances, so both sweeps work
//! on tuples of such pairs instead of on instance formulas.

use crate::calculus::{Calculus, Schema};
use crate::content_algebra::{enumerate_semilattices, ContentAlgebra, ContentTables};
use crate::formula::{Compiled, FormulaTable, LanguageMode};
use crate::ge_model::{GruLookup, GruTable, LogicVariant, MissingGru, NoGru, PartialGru, Semantics, SemValue};
use crate::par::{self, Execution};
use crate::search::{assignments, content_algebras, truth_algebras, SearchBounds, SearchError};
use crate::truth_algebra::{Elem, TruthAlgebra};

/// A schema falsified by some tuple of metavariable values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaViolation {
    pub schema: &'static str,
    pub truth_size: usize,
    pub content: ContentTables,
    /// Metavariable values in `A B C D` order.
    pub values: Vec<SemValue>,
    pub value: Elem,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepReport {
    /// Algebra pairs (with gru table, for the literal sweep) visited.
    pub structures: u64,
    /// Schema evaluations performed.
    pub evaluations: u64,
    pub violations: Vec<SchemaViolation>,
}

impl SweepReport {
    fn absorb(&mut self, other: SweepReport) {
        self.structures += other.structures;
        self.evaluations += other.evaluations;
        for v in other.violations {
            if !self.violations.iter().any(|w| w.schema == v.schema) {
                self.violations.push(v);
            }
        }
    }
}

struct CompiledSchema {
    name: &'static str,
    compiled: Compiled,
    need: Vec<bool>,
}

fn compile(schemata: &[Schema]) -> Vec<CompiledSchema> {
    schemata
        .iter()
        .map(|s| {
            let compiled = Compiled::new(&s.formula);
            let need = compiled.content_needed();
            CompiledSchema {
                name: s.name,
                compiled,
                need,
            }
        })
        .collect()
}

/// Calls `f` on every tuple of `k` picks from `pool`.
fn tuples(pool: &[SemValue], k: usize, mut f: impl FnMut(&[SemValue]) -> bool) {
    if pool.is_empty() {
        return;
    }
    let mut idx = vec![0usize; k];
    let mut cur: Vec<SemValue> = vec![pool[0]; k];
    loop {
        if !f(&cur) {
            return;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < pool.len() {
                cur[pos] = pool[idx[pos]];
                break;
            }
            idx[pos] = 0;
            cur[pos] = pool[0];
        }
    }
}

/// Finds a gru completion making the schema differ from 1, exploring only
/// entries the evaluator asks for.
fn falsify_any_gru(
    sem: &Semantics,
    s: &CompiledSchema,
    atoms: &[SemValue],
    partial: &mut Vec<Option<Elem>>,
    n: usize,
    buf: &mut Vec<SemValue>,
    evals: &mut u64,
) -> Option<Elem> {
    let res = sem.eval_nodes(&s.compiled.nodes, atoms, Some(&s.need), &PartialGru { n, table: &partial[..] }, buf);
    match res {
        Ok(()) => {
            *evals += 1;
            let v = buf[s.compiled.root].truth;
            (v != sem.truth.one()).then_some(v)
        }
        Err(MissingGru { x, y }) => {
            let pos = x as usize * n + y as usize;
            for g in 0..n as Elem {
                partial[pos] = Some(g);
                if let Some(v) = falsify_any_gru(sem, s, atoms, partial, n, buf, evals) {
                    return Some(v);
                }
            }
            partial[pos] = None;
            None
        }
    }
}

fn check_pool<G: GruLookup>(
    sem: &Semantics,
    schemata: &[CompiledSchema],
    pool: &[SemValue],
    gru: Option<&G>,
    report: &mut SweepReport,
) {
    let n = sem.content.size();
    let mut buf = Vec::new();
    let mut partial = vec![None; n * n];
    for s in schemata {
        let k = s.compiled.atoms.len();
        let mut found = None;
        tuples(pool, k, |vals| {
            let bad = match gru {
                Some(g) => {
                    report.evaluations += 1;
                    sem.eval_nodes(&s.compiled.nodes, vals, Some(&s.need), g, &mut buf)
                        .expect("complete gru table");
                    let v = buf[s.compiled.root].truth;
                    (v != sem.truth.one()).then_some(v)
                }
                None => {
                    partial.iter_mut().for_each(|e| *e = None);
                    falsify_any_gru(sem, s, vals, &mut partial, n, &mut buf, &mut report.evaluations)
                }
            };
            if let Some(v) = bad {
                found = Some((vals.to_vec(), v));
            }
            found.is_none()
        });
        if let Some((values, value)) = found {
            let content = match (gru, sem.variant.is_agnostic()) {
                (None, true) => sem.content.with_gru(partial.iter().map(|e| e.unwrap_or(0)).collect()),
                _ => sem.content.clone(),
            };
            report.violations.push(SchemaViolation {
                schema: s.name,
                truth_size: sem.truth.size(),
                content: content.tables(),
                values,
                value,
            });
        }
    }
}

fn all_pairs(t: &TruthAlgebra, c: &ContentAlgebra) -> Vec<SemValue> {
    t.elements()
        .flat_map(|truth| (0..c.size() as Elem).map(move |content| SemValue { truth, content }))
        .collect()
}

/// Checks every schema against every tuple of (truth, content) pairs in every
/// algebra pair within bounds. For agnostic variants every gru table is
/// covered through the entries the schema actually consults.
pub fn generic_sweep(
    variant: LogicVariant,
    calc: &Calculus,
    bounds: &SearchBounds,
) -> Result<SweepReport, SearchError> {
    let truths = truth_algebras(variant, bounds)?;
    let contents = content_algebras(variant, bounds)?;
    let schemata = compile(&calc.schemata);
    let pairs: Vec<(usize, usize)> = (0..truths.len())
        .flat_map(|t| (0..contents.len()).map(move |c| (t, c)))
        .collect();
    let reports = par::map(&pairs, bounds.execution, |&(ti, ci)| {
        let (t, c) = (&truths[ti], &contents[ci]);
        let sem = Semantics::new(variant, t, c);
        let mut r = SweepReport {
            structures: 1,
            ..SweepReport::default()
        };
        let pool = all_pairs(t, c);
        if variant.is_agnostic() {
            check_pool::<NoGru>(&sem, &schemata, &pool, None, &mut r);
        } else {
            check_pool(&sem, &schemata, &pool, Some(&NoGru), &mut r);
        }
        r
    });
    let mut out = SweepReport::default();
    reports.into_iter().for_each(|r| out.absorb(r));
    Ok(out)
}

/// Every formula over `atoms` to `depth`, evaluated under every assignment in
/// every model of the variant within bounds; each schema is then checked on
/// all tuples of the (truth, content) pairs those formulas realize in a
/// structure. Agnostic variants enumerate gru tables explicitly, so keep
/// their topic bound small.
pub fn literal_sweep(
    variant: LogicVariant,
    calc: &Calculus,
    atoms: &[&str],
    depth: usize,
    bounds: &SearchBounds,
) -> Result<SweepReport, SearchError> {
    let truths = truth_algebras(variant, bounds)?;
    let mut contents = Vec::new();
    for c in enumerate_semilattices(bounds.topics_for(variant), bounds.dedup_iso)? {
        if variant.is_agnostic() {
            let n = c.size();
            let mut table = vec![0; n * n];
            for _ in 0..(n as u64).pow((n * n) as u32) {
                contents.push(c.with_gru(table.clone()));
                bump(&mut table, n);
            }
        } else {
            contents.push(c);
        }
    }
    let table = FormulaTable::enumerate(atoms, depth, variant.language() == LanguageMode::Modal);
    let schemata = compile(&calc.schemata);
    let pairs: Vec<(usize, usize)> = (0..truths.len())
        .flat_map(|t| (0..contents.len()).map(move |c| (t, c)))
        .collect();
    let reports = par::map(&pairs, bounds.execution, |&(ti, ci)| {
        let (t, c) = (&truths[ti], &contents[ci]);
        let sem = Semantics::new(variant, t, c);
        let mut realized = vec![false; t.size() * c.size()];
        let mut buf = Vec::new();
        for (vals, conts) in assignments(t.size(), c.size(), atoms.len()) {
            let sv: Vec<SemValue> = vals
                .iter()
                .zip(&conts)
                .map(|(&truth, &content)| SemValue { truth, content })
                .collect();
            match c.gru_table() {
                Some(g) => sem.eval_nodes(&table.nodes, &sv, None, &GruTable { n: c.size(), table: g }, &mut buf),
                None => sem.eval_nodes(&table.nodes, &sv, None, &NoGru, &mut buf),
            }
            .expect("complete gru table");
            for v in &buf {
                realized[v.truth as usize * c.size() + v.content as usize] = true;
            }
        }
        let pool: Vec<SemValue> = all_pairs(t, c)
            .into_iter()
            .filter(|v| realized[v.truth as usize * c.size() + v.content as usize])
            .collect();
        let mut r = SweepReport {
            structures: 1,
            ..SweepReport::default()
        };
        match c.gru_table() {
            Some(g) => check_pool(&sem, &schemata, &pool, Some(&GruTable { n: c.size(), table: g }), &mut r),
            None => check_pool(&sem, &schemata, &pool, Some(&NoGru), &mut r),
        }
        r
    });
    let mut out = SweepReport::default();
    reports.into_iter().for_each(|r| out.absorb(r));
    Ok(out)
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

/// Runs a sweep in the given execution mode; a thin helper for benches.
pub fn generic_sweep_with(variant: LogicVariant, bounds: &SearchBounds, execution: Execution) -> Result<SweepReport, SearchError> {
    let b = SearchBounds {
        execution,
        ..bounds.clone()
    };
    generic_sweep(variant, &Calculus::for_variant(variant), &b)
}
