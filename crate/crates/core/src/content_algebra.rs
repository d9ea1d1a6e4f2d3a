//! Finite join-semilattices of contents, with an optional second operation
//! (`gru`) interpreting the arrow in agnostic variants.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::ContentTerm;
use crate::truth_algebra::{Elem, MAX_CARRIER};

pub const MAX_ENUMERATED_SIZE: usize = 5;

pub type ContentAssignment = BTreeMap<String, Elem>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentTables {
    pub carrier: usize,
    pub join: Vec<Vec<Elem>>,
    #[serde(default)]
    pub gru: Option<Vec<Vec<Elem>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ContentError {
    #[error("malformed content tables: {0}")]
    Shape(String),
    #[error("join is not {law} at {witness:?}")]
    Law {
        law: &'static str,
        witness: Vec<Elem>,
    },
    #[error("element {0} is outside the content carrier")]
    OutOfCarrier(Elem),
    #[error("atom {0} has no content")]
    MissingAtom(String),
    #[error("term uses gru but the content algebra has none")]
    NoGru,
    #[error("semilattice enumeration is limited to size {MAX_ENUMERATED_SIZE}")]
    TooLarge,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContentAlgebra {
    n: usize,
    join: Vec<Elem>,
    gru: Option<Vec<Elem>>,
}

impl ContentAlgebra {
    pub fn new(t: &ContentTables) -> Result<ContentAlgebra, ContentError> {
        let n = t.carrier;
        if n == 0 || n > MAX_CARRIER {
            return Err(ContentError::Shape(format!("carrier {n} outside 1..={MAX_CARRIER}")));
        }
        let flat = |name: &str, m: &Vec<Vec<Elem>>| -> Result<Vec<Elem>, ContentError> {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(ContentError::Shape(format!("{name} table is not {n}x{n}")));
            }
            let v: Vec<Elem> = m.iter().flatten().copied().collect();
            if let Some(&x) = v.iter().find(|&&x| x as usize >= n) {
                return Err(ContentError::OutOfCarrier(x));
            }
            Ok(v)
        };
        let alg = ContentAlgebra {
            n,
            join: flat("join", &t.join)?,
            gru: t.gru.as_ref().map(|g| flat("gru", g)).transpose()?,
        };
        alg.check_laws()?;
        Ok(alg)
    }

    fn from_join_unchecked(n: usize, join: Vec<Elem>) -> ContentAlgebra {
        ContentAlgebra { n, join, gru: None }
    }

    fn check_laws(&self) -> Result<(), ContentError> {
        let n = self.n as Elem;
        let fail = |law, witness: &[Elem]| {
            Err(ContentError::Law {
                law,
                witness: witness.to_vec(),
            })
        };
        for x in 0..n {
            if self.join(x, x) != x {
                return fail("idempotent", &[x]);
            }
            for y in 0..n {
                if self.join(x, y) != self.join(y, x) {
                    return fail("commutative", &[x, y]);
                }
                for z in 0..n {
                    if self.join(x, self.join(y, z)) != self.join(self.join(x, y), z) {
                        return fail("associative", &[x, y, z]);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn tables(&self) -> ContentTables {
        let rows = |v: &Vec<Elem>| v.chunks(self.n).map(|r| r.to_vec()).collect();
        ContentTables {
            carrier: self.n,
            join: rows(&self.join),
            gru: self.gru.as_ref().map(rows),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }
    pub fn has_gru(&self) -> bool {
        self.gru.is_some()
    }
    pub fn gru_table(&self) -> Option<&[Elem]> {
        self.gru.as_deref()
    }
    pub fn join_table(&self) -> &[Elem] {
        &self.join
    }
    #[inline]
    pub fn join(&self, x: Elem, y: Elem) -> Elem {
        self.join[x as usize * self.n + y as usize]
    }
    /// Unchecked order test; both arguments must lie in the carrier.
    #[inline]
    pub fn le(&self, x: Elem, y: Elem) -> bool {
        self.join(x, y) == y
    }
    pub fn leq(&self, x: Elem, y: Elem) -> Result<bool, ContentError> {
        for v in [x, y] {
            if v as usize >= self.n {
                return Err(ContentError::OutOfCarrier(v));
            }
        }
        Ok(self.le(x, y))
    }
    pub fn gru(&self, x: Elem, y: Elem) -> Option<Elem> {
        self.gru.as_ref().map(|g| g[x as usize * self.n + y as usize])
    }

    pub fn with_gru(&self, gru: Vec<Elem>) -> ContentAlgebra {
        assert_eq!(gru.len(), self.n * self.n);
        ContentAlgebra {
            gru: Some(gru),
            ..self.clone()
        }
    }

    pub fn without_gru(&self) -> ContentAlgebra {
        ContentAlgebra {
            gru: None,
            ..self.clone()
        }
    }

    /// Top element, if the semilattice has one (finite non-empty ones always do).
    pub fn top(&self) -> Elem {
        (0..self.n as Elem).fold(0, |acc, x| self.join(acc, x))
    }

    /// Closure of `gens` under join, in ascending element order.
    pub fn generated(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut inside = vec![false; self.n];
        for &g in gens {
            inside[g as usize] = true;
        }
        loop {
            let mut grew = false;
            for x in 0..self.n {
                for y in 0..self.n {
                    if inside[x] && inside[y] {
                        let z = self.join(x as Elem, y as Elem) as usize;
                        if !inside[z] {
                            inside[z] = true;
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        (0..self.n as Elem).filter(|&x| inside[x as usize]).collect()
    }

    /// Restricts to a join-closed subset, renumbering elements in the given order.
    pub fn restrict(&self, elems: &[Elem]) -> ContentAlgebra {
        let pos = |x: Elem| elems.iter().position(|&e| e == x).expect("subset not join-closed") as Elem;
        let k = elems.len();
        let mut join = Vec::with_capacity(k * k);
        for &a in elems {
            for &b in elems {
                join.push(pos(self.join(a, b)));
            }
        }
        ContentAlgebra::from_join_unchecked(k, join)
    }
}

/// Evaluates a content term under an assignment.
pub fn eval_content(
    alg: &ContentAlgebra,
    s: &ContentAssignment,
    t: &ContentTerm,
) -> Result<Elem, ContentError> {
    match t {
        ContentTerm::Atom(n) => {
            let v = *s.get(n).ok_or_else(|| ContentError::MissingAtom(n.clone()))?;
            if v as usize >= alg.size() {
                return Err(ContentError::OutOfCarrier(v));
            }
            Ok(v)
        }
        ContentTerm::Join(a, b) => Ok(alg.join(eval_content(alg, s, a)?, eval_content(alg, s, b)?)),
        ContentTerm::Gru(a, b) => {
            let (x, y) = (eval_content(alg, s, a)?, eval_content(alg, s, b)?);
            alg.gru(x, y).ok_or(ContentError::NoGru)
        }
    }
}

/// Subsets of `k` points under union. Element ids are the bitmasks.
pub fn powerset_semilattice(k: usize) -> ContentAlgebra {
    assert!(k <= 6, "powerset semilattice too large");
    let n = 1usize << k;
    let mut join = Vec::with_capacity(n * n);
    for x in 0..n as Elem {
        for y in 0..n as Elem {
            join.push(x | y);
        }
    }
    ContentAlgebra::from_join_unchecked(n, join)
}

/// The chain `0 < 1 < .. < n-1`.
pub fn chain_semilattice(n: usize) -> ContentAlgebra {
    assert!((1..=MAX_CARRIER).contains(&n), "chain size out of range");
    let mut join = Vec::with_capacity(n * n);
    for x in 0..n as Elem {
        for y in 0..n as Elem {
            join.push(x.max(y));
        }
    }
    ContentAlgebra::from_join_unchecked(n, join)
}

/// All join-semilattices of sizes `1..=max_size`, by size and then join table.
/// With `dedup`, only the first member of each isomorphism class is kept.
pub fn enumerate_semilattices(
    max_size: usize,
    dedup: bool,
) -> Result<Vec<ContentAlgebra>, ContentError> {
    if max_size > MAX_ENUMERATED_SIZE {
        return Err(ContentError::TooLarge);
    }
    let mut out = Vec::new();
    for n in 1..=max_size {
        let cache = &CACHE[n - 1];
        let (all, reps) = cache.get_or_init(|| labelled_semilattices(n));
        out.extend(if dedup { reps } else { all }.iter().cloned());
    }
    Ok(out)
}

type SizeCache = OnceLock<(Vec<ContentAlgebra>, Vec<ContentAlgebra>)>;
static CACHE: [SizeCache; MAX_ENUMERATED_SIZE] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub(crate) fn permuted_table(table: &[Elem], n: usize, perm: &[usize]) -> Vec<Elem> {
    // perm maps old element -> new element.
    let mut out = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            out[perm[x] * n + perm[y]] = perm[table[x * n + y] as usize] as Elem;
        }
    }
    out
}

/// Labelled semilattices on `n` elements, sorted by table; plus one representative per class.
fn labelled_semilattices(n: usize) -> (Vec<ContentAlgebra>, Vec<ContentAlgebra>) {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut tables = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut le = vec![false; n * n];
        for i in 0..n {
            le[i * n + i] = true;
        }
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask & (1 << b) != 0 {
                le[i * n + j] = true;
            }
        }
        if let Some(join) = join_of_order(&le, n) {
            tables.push(join);
        }
    }
    tables.sort();
    let perms = permutations(n);
    let mut seen = std::collections::HashSet::new();
    let mut reps = Vec::new();
    for t in &tables {
        let canon = perms.iter().map(|p| permuted_table(t, n, p)).min().unwrap();
        if seen.insert(canon) {
            reps.push(ContentAlgebra::from_join_unchecked(n, t.clone()));
        }
    }
    let all = tables
        .into_iter()
        .map(|t| ContentAlgebra::from_join_unchecked(n, t))
        .collect();
    (all, reps)
}

fn join_of_order(le: &[bool], n: usize) -> Option<Vec<Elem>> {
    for i in 0..n {
        for j in 0..n {
            if i != j && le[i * n + j] && le[j * n + i] {
                return None;
            }
            if !le[i * n + j] {
                continue;
            }
            for k in 0..n {
                if le[j * n + k] && !le[i * n + k] {
                    return None;
                }
            }
        }
    }
    let mut join = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            let uppers: Vec<usize> = (0..n).filter(|&k| le[i * n + k] && le[j * n + k]).collect();
            let least = uppers
                .iter()
                .copied()
                .find(|&u| uppers.iter().all(|&v| le[u * n + v]))?;
            join[i * n + j] = least as Elem;
        }
    }
    Some(join)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, TranslationMode};

    #[test]
    fn class_counts() {
        let reps = enumerate_semilattices(5, true).unwrap();
        let count = |k| reps.iter().filter(|a| a.size() == k).count();
        assert_eq!((1..=5).map(count).collect::<Vec<_>>(), vec![1, 1, 2, 5, 15]);
        let all = enumerate_semilattices(3, false).unwrap();
        // 1 + 2 labelled chains + (6 chains + 3 V-shapes) on three points.
        assert_eq!(all.len(), 1 + 2 + 9);
        assert!(enumerate_semilattices(6, true).is_err());
    }

    #[test]
    fn bad_tables_rejected() {
        let t = ContentTables {
            carrier: 2,
            join: vec![vec![0, 1], vec![0, 1]],
            gru: None,
        };
        assert!(matches!(ContentAlgebra::new(&t), Err(ContentError::Law { law: "commutative", .. })));
        let t = ContentTables {
            carrier: 2,
            join: vec![vec![0, 2], vec![2, 1]],
            gru: None,
        };
        assert_eq!(ContentAlgebra::new(&t), Err(ContentError::OutOfCarrier(2)));
    }

    #[test]
    fn evaluation() {
        let c = powerset_semilattice(2).with_gru(vec![3; 16]);
        let mut s = ContentAssignment::new();
        s.insert("p".into(), 1);
        s.insert("q".into(), 2);
        let f = parse("~p \\/ []q").unwrap();
        assert_eq!(eval_content(&c, &s, &f.translate(TranslationMode::Fused)), Ok(3));
        let g = parse("p -> p").unwrap();
        assert_eq!(eval_content(&c, &s, &g.translate(TranslationMode::Agnostic)), Ok(3));
        assert_eq!(eval_content(&c, &s, &g.translate(TranslationMode::Fused)), Ok(1));
        assert_eq!(
            eval_content(&c.without_gru(), &s, &g.translate(TranslationMode::Agnostic)),
            Err(ContentError::NoGru)
        );
        let r = parse("r").unwrap();
        assert_eq!(
            eval_content(&c, &s, &r.translate(TranslationMode::Fused)),
            Err(ContentError::MissingAtom("r".into()))
        );
        assert_eq!(c.leq(1, 3), Ok(true));
        assert_eq!(c.leq(1, 2), Ok(false));
        assert_eq!(c.leq(1, 9), Err(ContentError::OutOfCarrier(9)));
    }

    #[test]
    fn generated_subsemilattice() {
        let c = powerset_semilattice(2);
        assert_eq!(c.generated(&[1, 2]), vec![1, 2, 3]);
        let sub = c.restrict(&[1, 2, 3]);
        assert_eq!(sub.join(0, 1), 2);
        assert_eq!(sub.top(), 2);
    }
}
