//! Finite Boolean algebras, optionally with an interior operator, and S4 frames.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Element of a finite algebra, identified by its dense index.
pub type Elem = u8;

pub const MAX_CARRIER: usize = 64;
pub const DEFAULT_POWERSET_ATOMS: usize = 5;

/// Operation tables as they appear on disk; not yet checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTables {
    pub carrier: usize,
    pub join: Vec<Vec<Elem>>,
    pub meet: Vec<Vec<Elem>>,
    pub not: Vec<Elem>,
    #[serde(rename = "box", default)]
    pub boxop: Option<Vec<Elem>>,
    pub zero: Elem,
    pub one: Elem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Law {
    JoinCommutative,
    MeetCommutative,
    JoinAssociative,
    MeetAssociative,
    Absorption,
    Distributive,
    JoinUnit,
    MeetUnit,
    Complement,
    EqK1,
    EqK2,
    EqT,
    Eq4,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("malformed tables: {0}")]
    Shape(String),
    #[error("law {law:?} fails at {witness:?}")]
    Law { law: Law, witness: Vec<Elem> },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Violation(#[from] Violation),
    #[error("frame is not reflexive at world {0}")]
    NotReflexive(usize),
    #[error("frame is not transitive at worlds {0}, {1}, {2}")]
    NotTransitive(usize, usize, usize),
    #[error("{0} powerset atoms exceed the bound {1}")]
    TooManyAtoms(usize, usize),
    #[error("a powerset algebra needs at least one atom")]
    NoAtoms,
    #[error("frame has {0} worlds; complex algebras are limited to 6")]
    FrameTooLarge(usize),
}

/// A validated finite Boolean algebra, possibly with an interior operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthAlgebra {
    n: usize,
    join: Vec<Elem>,
    meet: Vec<Elem>,
    not: Vec<Elem>,
    boxop: Option<Vec<Elem>>,
    zero: Elem,
    one: Elem,
}

fn check_shape(t: &TruthTables) -> Result<(), Violation> {
    let n = t.carrier;
    if n == 0 || n > MAX_CARRIER {
        return Err(Violation::Shape(format!("carrier {n} outside 1..={MAX_CARRIER}")));
    }
    let square = |name: &str, m: &Vec<Vec<Elem>>| -> Result<(), Violation> {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Violation::Shape(format!("{name} table is not {n}x{n}")));
        }
        if m.iter().flatten().any(|&x| x as usize >= n) {
            return Err(Violation::Shape(format!("{name} table leaves the carrier")));
        }
        Ok(())
    };
    square("join", &t.join)?;
    square("meet", &t.meet)?;
    let unary = |name: &str, v: &Vec<Elem>| -> Result<(), Violation> {
        if v.len() != n || v.iter().any(|&x| x as usize >= n) {
            return Err(Violation::Shape(format!("{name} table is malformed")));
        }
        Ok(())
    };
    unary("not", &t.not)?;
    if let Some(b) = &t.boxop {
        unary("box", b)?;
    }
    if t.zero as usize >= n || t.one as usize >= n {
        return Err(Violation::Shape("zero or one outside the carrier".into()));
    }
    Ok(())
}

/// Exhaustively checks the Boolean and interior-operator laws.
pub fn validate(t: &TruthTables) -> Result<(), Violation> {
    check_shape(t)?;
    let n = t.carrier as Elem;
    let j = |x: Elem, y: Elem| t.join[x as usize][y as usize];
    let m = |x: Elem, y: Elem| t.meet[x as usize][y as usize];
    let c = |x: Elem| t.not[x as usize];
    let fail = |law, witness: &[Elem]| {
        Err(Violation::Law {
            law,
            witness: witness.to_vec(),
        })
    };
    for x in 0..n {
        if j(x, t.zero) != x {
            return fail(Law::JoinUnit, &[x]);
        }
        if m(x, t.one) != x {
            return fail(Law::MeetUnit, &[x]);
        }
        if j(x, c(x)) != t.one || m(x, c(x)) != t.zero {
            return fail(Law::Complement, &[x]);
        }
        for y in 0..n {
            if j(x, y) != j(y, x) {
                return fail(Law::JoinCommutative, &[x, y]);
            }
            if m(x, y) != m(y, x) {
                return fail(Law::MeetCommutative, &[x, y]);
            }
            if j(x, m(x, y)) != x || m(x, j(x, y)) != x {
                return fail(Law::Absorption, &[x, y]);
            }
            for z in 0..n {
                if j(x, j(y, z)) != j(j(x, y), z) {
                    return fail(Law::JoinAssociative, &[x, y, z]);
                }
                if m(x, m(y, z)) != m(m(x, y), z) {
                    return fail(Law::MeetAssociative, &[x, y, z]);
                }
                if m(x, j(y, z)) != j(m(x, y), m(x, z)) {
                    return fail(Law::Distributive, &[x, y, z]);
                }
            }
        }
    }
    if let Some(b) = &t.boxop {
        let bx = |x: Elem| b[x as usize];
        if bx(t.one) != t.one {
            return fail(Law::EqK1, &[t.one]);
        }
        for x in 0..n {
            for y in 0..n {
                if bx(m(x, y)) != m(bx(x), bx(y)) {
                    return fail(Law::EqK2, &[x, y]);
                }
            }
        }
        for x in 0..n {
            if m(bx(x), x) != bx(x) {
                return fail(Law::EqT, &[x]);
            }
        }
        for x in 0..n {
            if m(bx(x), bx(bx(x))) != bx(x) {
                return fail(Law::Eq4, &[x]);
            }
        }
    }
    Ok(())
}

impl TruthAlgebra {
    pub fn new(t: TruthTables) -> Result<TruthAlgebra, AlgebraError> {
        validate(&t)?;
        let flat = |m: &Vec<Vec<Elem>>| m.iter().flatten().copied().collect::<Vec<_>>();
        Ok(TruthAlgebra {
            n: t.carrier,
            join: flat(&t.join),
            meet: flat(&t.meet),
            not: t.not,
            boxop: t.boxop,
            zero: t.zero,
            one: t.one,
        })
    }

    pub fn tables(&self) -> TruthTables {
        let rows = |v: &Vec<Elem>| v.chunks(self.n).map(|r| r.to_vec()).collect();
        TruthTables {
            carrier: self.n,
            join: rows(&self.join),
            meet: rows(&self.meet),
            not: self.not.clone(),
            boxop: self.boxop.clone(),
            zero: self.zero,
            one: self.one,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }
    pub fn zero(&self) -> Elem {
        self.zero
    }
    pub fn one(&self) -> Elem {
        self.one
    }
    pub fn has_box(&self) -> bool {
        self.boxop.is_some()
    }
    #[inline]
    pub fn join(&self, x: Elem, y: Elem) -> Elem {
        self.join[x as usize * self.n + y as usize]
    }
    #[inline]
    pub fn meet(&self, x: Elem, y: Elem) -> Elem {
        self.meet[x as usize * self.n + y as usize]
    }
    #[inline]
    pub fn not(&self, x: Elem) -> Elem {
        self.not[x as usize]
    }
    /// The interior operator; the identity when the algebra has none.
    #[inline]
    pub fn nec(&self, x: Elem) -> Elem {
        match &self.boxop {
            Some(b) => b[x as usize],
            None => x,
        }
    }
    #[inline]
    pub fn leq(&self, x: Elem, y: Elem) -> bool {
        self.join(x, y) == y
    }
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.n as Elem
    }

    /// Same Boolean reduct with the box forced to the identity.
    pub fn with_identity_box(&self) -> TruthAlgebra {
        TruthAlgebra {
            boxop: Some((0..self.n as Elem).collect()),
            ..self.clone()
        }
    }

    /// Same Boolean reduct without a box.
    pub fn without_box(&self) -> TruthAlgebra {
        TruthAlgebra {
            boxop: None,
            ..self.clone()
        }
    }
}

/// Powerset of `atoms` points. Element ids are the subset bitmasks.
pub fn powerset_algebra(atoms: usize) -> Result<TruthAlgebra, AlgebraError> {
    powerset_algebra_bounded(atoms, DEFAULT_POWERSET_ATOMS)
}

pub fn powerset_algebra_bounded(atoms: usize, bound: usize) -> Result<TruthAlgebra, AlgebraError> {
    if atoms == 0 {
        return Err(AlgebraError::NoAtoms);
    }
    if atoms > bound.min(6) {
        return Err(AlgebraError::TooManyAtoms(atoms, bound.min(6)));
    }
    Ok(powerset_unchecked(atoms))
}

fn powerset_unchecked(atoms: usize) -> TruthAlgebra {
    let n = 1usize << atoms;
    let full = (n - 1) as Elem;
    let mut join = Vec::with_capacity(n * n);
    let mut meet = Vec::with_capacity(n * n);
    for x in 0..n as Elem {
        for y in 0..n as Elem {
            join.push(x | y);
            meet.push(x & y);
        }
    }
    TruthAlgebra {
        n,
        join,
        meet,
        not: (0..n as Elem).map(|x| full & !x).collect(),
        boxop: None,
        zero: 0,
        one: full,
    }
}

/// A reflexive transitive frame; `succ[w]` is the bitmask of worlds visible from `w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreorderFrame {
    succ: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameFile {
    pub worlds: usize,
    pub reach: Vec<Vec<bool>>,
}

impl PreorderFrame {
    pub fn new(succ: Vec<u32>) -> Result<PreorderFrame, AlgebraError> {
        let n = succ.len();
        for (w, &s) in succ.iter().enumerate() {
            if s & (1 << w) == 0 {
                return Err(AlgebraError::NotReflexive(w));
            }
        }
        for u in 0..n {
            for v in 0..n {
                if succ[u] & (1 << v) == 0 {
                    continue;
                }
                for x in 0..n {
                    if succ[v] & (1 << x) != 0 && succ[u] & (1 << x) == 0 {
                        return Err(AlgebraError::NotTransitive(u, v, x));
                    }
                }
            }
        }
        Ok(PreorderFrame { succ })
    }

    pub fn from_file(f: &FrameFile) -> Result<PreorderFrame, AlgebraError> {
        if f.reach.len() != f.worlds || f.reach.iter().any(|r| r.len() != f.worlds) {
            return Err(Violation::Shape(format!("reach is not {0}x{0}", f.worlds)).into());
        }
        if f.worlds > 32 {
            return Err(AlgebraError::FrameTooLarge(f.worlds));
        }
        let succ = f
            .reach
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .fold(0u32, |m, (i, _)| m | (1 << i))
            })
            .collect();
        PreorderFrame::new(succ)
    }

    pub fn to_file(&self) -> FrameFile {
        let n = self.worlds();
        FrameFile {
            worlds: n,
            reach: (0..n)
                .map(|u| (0..n).map(|v| self.sees(u, v)).collect())
                .collect(),
        }
    }

    pub fn worlds(&self) -> usize {
        self.succ.len()
    }
    pub fn succ(&self, w: usize) -> u32 {
        self.succ[w]
    }
    pub fn sees(&self, u: usize, v: usize) -> bool {
        self.succ[u] & (1 << v) != 0
    }
    pub fn all_worlds(&self) -> u32 {
        ((1u64 << self.worlds()) - 1) as u32
    }

    /// `[]S`: the worlds of `S` all of whose successors lie in `S`.
    pub fn interior(&self, s: u32) -> u32 {
        (0..self.worlds())
            .filter(|&w| s & (1 << w) != 0 && self.succ[w] & !s == 0)
            .fold(0, |m, w| m | (1 << w))
    }
}

/// The complex algebra of a frame: all world sets, with the frame interior as box.
pub fn complex_algebra(frame: &PreorderFrame) -> Result<TruthAlgebra, AlgebraError> {
    let n = frame.worlds();
    if n == 0 {
        return Err(AlgebraError::NoAtoms);
    }
    if n > 6 {
        return Err(AlgebraError::FrameTooLarge(n));
    }
    let mut alg = powerset_unchecked(n);
    alg.boxop = Some((0..alg.n as u32).map(|s| frame.interior(s) as Elem).collect());
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_element(boxop: Option<Vec<Elem>>) -> TruthTables {
        TruthTables {
            carrier: 2,
            join: vec![vec![0, 1], vec![1, 1]],
            meet: vec![vec![0, 0], vec![0, 1]],
            not: vec![1, 0],
            boxop,
            zero: 0,
            one: 1,
        }
    }

    #[test]
    fn constant_one_box_breaks_t() {
        assert_eq!(
            validate(&two_element(Some(vec![1, 1]))),
            Err(Violation::Law {
                law: Law::EqT,
                witness: vec![0]
            })
        );
        assert_eq!(validate(&two_element(Some(vec![0, 1]))), Ok(()));
    }

    #[test]
    fn broken_complement_is_reported() {
        let mut t = two_element(None);
        t.not = vec![0, 0];
        assert!(matches!(
            validate(&t),
            Err(Violation::Law {
                law: Law::Complement,
                ..
            })
        ));
        t.carrier = 3;
        assert!(matches!(validate(&t), Err(Violation::Shape(_))));
    }

    #[test]
    fn powersets_validate() {
        for k in 1..=5 {
            let a = powerset_algebra(k).unwrap();
            assert_eq!(validate(&a.tables()), Ok(()));
            assert_eq!(a.size(), 1 << k);
        }
        assert_eq!(powerset_algebra(0), Err(AlgebraError::NoAtoms));
        assert_eq!(powerset_algebra(6), Err(AlgebraError::TooManyAtoms(6, 5)));
        assert!(powerset_algebra_bounded(6, 6).is_ok());
    }

    #[test]
    fn chain_frame_interior() {
        // 0 sees 1; 1 sees only itself.
        let f = PreorderFrame::new(vec![0b11, 0b10]).unwrap();
        let a = complex_algebra(&f).unwrap();
        assert_eq!(a.nec(0b01), 0b00);
        assert_eq!(a.nec(0b10), 0b10);
        assert_eq!(a.nec(0b11), 0b11);
        assert_eq!(validate(&a.tables()), Ok(()));
    }

    #[test]
    fn frame_errors() {
        assert_eq!(PreorderFrame::new(vec![0b10, 0b10]), Err(AlgebraError::NotReflexive(0)));
        assert_eq!(
            PreorderFrame::new(vec![0b011, 0b110, 0b100]),
            Err(AlgebraError::NotTransitive(0, 1, 2))
        );
        let f = PreorderFrame::new(vec![0b011, 0b010]).unwrap();
        assert_eq!(PreorderFrame::from_file(&f.to_file()), Ok(f));
    }
}
