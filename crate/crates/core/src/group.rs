//! Finitely generated groups, endomorphisms, and twisted conjugacy.
//!
//! Three computable presentations are supported:
//!
//! * free abelian groups of finite rank — elements are integer vectors and
//!   twisted conjugacy classes are read off exactly from the Smith normal
//!   form of `I - phi`;
//! * finite groups given by a multiplication table — classes come from an
//!   exhaustive orbit partition;
//! * free groups — elements are reduced words and class questions are
//!   semi-decided by a bounded conjugator search. Inconclusive answers are
//!   a first-class outcome, never an exception and never silently wrong.
//!
//! The twisted conjugacy relation identifies `beta` with
//! `alpha * beta * phi(alpha)^-1` for every `alpha`; its quotient indexes
//! fixed point classes and carries the Reidemeister trace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::matrix::{smith_normal_form, IntMatrix, SmithDecomposition};
use crate::{Error, Result};

/// Refusal threshold for exhaustive class enumeration.
const CLASS_ENUM_BOUND: u128 = 1 << 20;

// ---------------------------------------------------------------------------
// Finite group tables
// ---------------------------------------------------------------------------

/// A finite group presented by its full multiplication table. The identity
/// always sits at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    order: usize,
    table: Vec<Vec<usize>>,
    names: Vec<String>,
    inverses: Vec<usize>,
}

impl FiniteGroupTable {
    pub fn new(table: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(Error::InvalidTable(format!("row {i} has length {}", row.len())));
            }
            let mut seen = vec![false; order];
            for &x in row {
                if x >= order {
                    return Err(Error::InvalidTable(format!("entry {x} out of range in row {i}")));
                }
                if seen[x] {
                    return Err(Error::InvalidTable(format!("row {i} is not a permutation")));
                }
                seen[x] = true;
            }
        }
        for j in 0..order {
            let mut seen = vec![false; order];
            for row in &table {
                if seen[row[j]] {
                    return Err(Error::InvalidTable(format!("column {j} is not a permutation")));
                }
                seen[row[j]] = true;
            }
        }
        for (i, row) in table.iter().enumerate() {
            if table[0][i] != i || row[0] != i {
                return Err(Error::InvalidTable("identity must sit at index 0".into()));
            }
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidTable(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inverses = vec![0usize; order];
        for a in 0..order {
            match (0..order).find(|&b| table[a][b] == 0) {
                Some(b) => inverses[a] = b,
                None => return Err(Error::InvalidTable(format!("element {a} has no inverse"))),
            }
        }
        let names = match names {
            Some(ns) => {
                if ns.len() != order {
                    return Err(Error::InvalidTable("name list length differs from order".into()));
                }
                ns
            }
            None => (0..order)
                .map(|i| if i == 0 { "e".to_string() } else { format!("x{i}") })
                .collect(),
        };
        Ok(FiniteGroupTable { order, table, names, inverses })
    }

    /// The cyclic group of order `n`, written additively on indices.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic: order must be positive");
        let table: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        let names = (0..n)
            .map(|i| match i {
                0 => "e".to_string(),
                1 => "g".to_string(),
                _ => format!("g^{i}"),
            })
            .collect();
        FiniteGroupTable::new(table, Some(names)).expect("cyclic table is a group")
    }

    /// The symmetric group on `n` letters (n <= 5), elements in
    /// lexicographic one-line order so the identity comes first.
    pub fn symmetric(n: usize) -> Self {
        assert!((1..=5).contains(&n), "symmetric: supported for 1 <= n <= 5");
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            perms.push(current.clone());
            // next permutation in lex order
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        let index_of: BTreeMap<Vec<usize>, usize> =
            perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let compose = |f: &[usize], g: &[usize]| -> Vec<usize> {
            (0..n).map(|x| f[g[x]]).collect()
        };
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|f| perms.iter().map(|g| index_of[&compose(f, g)]).collect())
            .collect();
        let names = perms
            .iter()
            .map(|p| p.iter().map(|x| x.to_string()).collect::<String>())
            .collect();
        FiniteGroupTable::new(table, Some(names)).expect("symmetric table is a group")
    }

    /// Direct product, elements ordered as (a, b) with b varying fastest.
    pub fn direct_product(&self, other: &FiniteGroupTable) -> Self {
        let n = self.order * other.order;
        let idx = |a: usize, b: usize| a * other.order + b;
        let mut table = vec![vec![0usize; n]; n];
        for a1 in 0..self.order {
            for b1 in 0..other.order {
                for a2 in 0..self.order {
                    for b2 in 0..other.order {
                        table[idx(a1, b1)][idx(a2, b2)] =
                            idx(self.table[a1][a2], other.table[b1][b2]);
                    }
                }
            }
        }
        let names = (0..self.order)
            .flat_map(|a| {
                (0..other.order).map(move |b| format!("({},{})", self.names[a], other.names[b]))
            })
            .collect();
        FiniteGroupTable::new(table, Some(names)).expect("product table is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn element_names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// Checks that `map` (defined on element indices) respects the table.
    pub fn is_endomorphism(&self, map: &[usize]) -> bool {
        map.len() == self.order
            && map.iter().all(|&x| x < self.order)
            && (0..self.order).all(|a| {
                (0..self.order).all(|b| map[self.table[a][b]] == self.table[map[a]][map[b]])
            })
    }
}

// ---------------------------------------------------------------------------
// Models, words, endomorphisms
// ---------------------------------------------------------------------------

/// One of the three computable group presentations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupModel {
    FreeAbelian { rank: usize },
    Finite(FiniteGroupTable),
    Free { rank: usize, search_radius: usize },
}

/// A group element in the payload convention of its model: an integer
/// vector, an element index, or a freely reduced letter sequence
/// (letter `k > 0` is the k-th generator, `-k` its inverse).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupWord {
    Vector(Vec<i64>),
    Element(usize),
    Letters(Vec<i32>),
}

/// An endomorphism in the payload convention of its model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endomorphism {
    /// Free abelian: the rank x rank matrix acting on column vectors.
    Matrix(IntMatrix),
    /// Finite: the image of each element index.
    IndexMap(Vec<usize>),
    /// Free: the image word of each generator.
    GeneratorImages(Vec<Vec<i32>>),
}

impl Endomorphism {
    pub fn identity_for(model: &GroupModel) -> Endomorphism {
        match model {
            GroupModel::FreeAbelian { rank } => Endomorphism::Matrix(IntMatrix::identity(*rank)),
            GroupModel::Finite(t) => Endomorphism::IndexMap((0..t.order()).collect()),
            GroupModel::Free { rank, .. } => Endomorphism::GeneratorImages(
                (1..=*rank as i32).map(|g| vec![g]).collect(),
            ),
        }
    }
}

/// Whether the class set quotients by twisted conjugacy alone, or
/// additionally by the orbit relation `beta ~ rho(beta)`. The map `rho`
/// defaults to `phi` itself; iterate class sets quotient by the base map
/// instead (see [`reidemeister_classes_with_rho`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtraRelations {
    TwistedOnly,
    TwistedAndRhoOrbit,
}

/// Cancels adjacent letter-inverse pairs.
pub fn reduce_letters<I: IntoIterator<Item = i32>>(letters: I) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::new();
    for l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn letters_inverse(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|l| -l).collect()
}

fn letter_sort_key(l: i32) -> (i32, i32) {
    (l.abs(), if l > 0 { 0 } else { 1 })
}

/// Orders words by (length, then letter-wise with a < a^-1 < b < ...).
fn word_sort_key(w: &[i32]) -> (usize, Vec<(i32, i32)>) {
    (w.len(), w.iter().map(|&l| letter_sort_key(l)).collect())
}

/// Renders a reduced word with letters a..z and inverses A..Z; the empty
/// word prints as "1". Ranks above 26 fall back to signed indices.
pub fn format_free_word(w: &[i32]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    if w.iter().all(|l| l.abs() <= 26) {
        w.iter()
            .map(|&l| {
                let c = (b'a' + (l.unsigned_abs() as u8) - 1) as char;
                if l > 0 { c } else { c.to_ascii_uppercase() }
            })
            .collect()
    } else {
        w.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("*")
    }
}

/// Parses the rendering of [`format_free_word`] (letters only).
pub fn parse_free_word(s: &str, rank: usize) -> Result<Vec<i32>> {
    let s = s.trim();
    if s == "1" || s.is_empty() {
        return Ok(Vec::new());
    }
    let mut letters = Vec::with_capacity(s.len());
    for c in s.chars() {
        let l = if c.is_ascii_lowercase() {
            (c as u8 - b'a') as i32 + 1
        } else if c.is_ascii_uppercase() {
            -((c as u8 - b'A') as i32 + 1)
        } else {
            return Err(Error::InvalidWord(format!("unexpected character {c:?} in word {s:?}")));
        };
        if l.unsigned_abs() as usize > rank {
            return Err(Error::InvalidWord(format!(
                "letter {c:?} exceeds the generator rank {rank}"
            )));
        }
        letters.push(l);
    }
    Ok(reduce_letters(letters))
}

impl GroupModel {
    pub fn identity(&self) -> GroupWord {
        match self {
            GroupModel::FreeAbelian { rank } => GroupWord::Vector(vec![0; *rank]),
            GroupModel::Finite(_) => GroupWord::Element(0),
            GroupModel::Free { .. } => GroupWord::Letters(Vec::new()),
        }
    }

    pub fn validate_word(&self, w: &GroupWord) -> Result<()> {
        match (self, w) {
            (GroupModel::FreeAbelian { rank }, GroupWord::Vector(v)) => {
                if v.len() == *rank {
                    Ok(())
                } else {
                    Err(Error::ModelMismatch(format!(
                        "vector of length {} in a free abelian group of rank {rank}",
                        v.len()
                    )))
                }
            }
            (GroupModel::Finite(t), GroupWord::Element(i)) => {
                if *i < t.order() {
                    Ok(())
                } else {
                    Err(Error::ModelMismatch(format!(
                        "element index {i} out of range for a group of order {}",
                        t.order()
                    )))
                }
            }
            (GroupModel::Free { rank, .. }, GroupWord::Letters(w)) => {
                for &l in w {
                    if l == 0 || l.unsigned_abs() as usize > *rank {
                        return Err(Error::InvalidWord(format!(
                            "letter {l} out of range for rank {rank}"
                        )));
                    }
                }
                for pair in w.windows(2) {
                    if pair[0] == -pair[1] {
                        return Err(Error::InvalidWord("word is not freely reduced".into()));
                    }
                }
                Ok(())
            }
            _ => Err(Error::ModelMismatch("word payload does not match the model kind".into())),
        }
    }

    pub fn multiply(&self, a: &GroupWord, b: &GroupWord) -> Result<GroupWord> {
        self.validate_word(a)?;
        self.validate_word(b)?;
        Ok(match (a, b) {
            (GroupWord::Vector(x), GroupWord::Vector(y)) => {
                GroupWord::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (GroupWord::Element(x), GroupWord::Element(y)) => match self {
                GroupModel::Finite(t) => GroupWord::Element(t.mul(*x, *y)),
                _ => unreachable!(),
            },
            (GroupWord::Letters(x), GroupWord::Letters(y)) => {
                GroupWord::Letters(reduce_letters(x.iter().chain(y.iter()).copied()))
            }
            _ => unreachable!(),
        })
    }

    pub fn inverse(&self, a: &GroupWord) -> Result<GroupWord> {
        self.validate_word(a)?;
        Ok(match a {
            GroupWord::Vector(x) => GroupWord::Vector(x.iter().map(|p| -p).collect()),
            GroupWord::Element(x) => match self {
                GroupModel::Finite(t) => GroupWord::Element(t.inverse(*x)),
                _ => unreachable!(),
            },
            GroupWord::Letters(x) => GroupWord::Letters(letters_inverse(x)),
        })
    }

    pub fn validate_endomorphism(&self, phi: &Endomorphism) -> Result<()> {
        match (self, phi) {
            (GroupModel::FreeAbelian { rank }, Endomorphism::Matrix(m)) => {
                if m.rows() == *rank && m.cols() == *rank {
                    Ok(())
                } else {
                    Err(Error::InvalidEndomorphism(format!(
                        "matrix is {}x{}, expected {rank}x{rank}",
                        m.rows(),
                        m.cols()
                    )))
                }
            }
            (GroupModel::Finite(t), Endomorphism::IndexMap(map)) => {
                if t.is_endomorphism(map) {
                    Ok(())
                } else {
                    Err(Error::InvalidEndomorphism(
                        "index map is not a homomorphism for the table".into(),
                    ))
                }
            }
            (GroupModel::Free { rank, .. }, Endomorphism::GeneratorImages(images)) => {
                if images.len() != *rank {
                    return Err(Error::InvalidEndomorphism(format!(
                        "{} generator images for rank {rank}",
                        images.len()
                    )));
                }
                for img in images {
                    self.validate_word(&GroupWord::Letters(img.clone()))?;
                }
                Ok(())
            }
            _ => Err(Error::ModelMismatch(
                "endomorphism payload does not match the model kind".into(),
            )),
        }
    }

    pub fn apply(&self, phi: &Endomorphism, w: &GroupWord) -> Result<GroupWord> {
        self.validate_endomorphism(phi)?;
        self.validate_word(w)?;
        Ok(match (phi, w) {
            (Endomorphism::Matrix(m), GroupWord::Vector(v)) => {
                let v128: Vec<i128> = v.iter().map(|&x| x as i128).collect();
                GroupWord::Vector(m.matvec(&v128).iter().map(|&x| x as i64).collect())
            }
            (Endomorphism::IndexMap(map), GroupWord::Element(i)) => GroupWord::Element(map[*i]),
            (Endomorphism::GeneratorImages(images), GroupWord::Letters(w)) => {
                let mut out: Vec<i32> = Vec::new();
                for &l in w {
                    let img = &images[(l.abs() - 1) as usize];
                    if l > 0 {
                        out.extend(img.iter().copied());
                    } else {
                        out.extend(letters_inverse(img));
                    }
                }
                GroupWord::Letters(reduce_letters(out))
            }
            _ => unreachable!("validated above"),
        })
    }

    /// `alpha * beta * phi(alpha)^-1` in canonical form.
    pub fn twisted_conjugate(
        &self,
        alpha: &GroupWord,
        beta: &GroupWord,
        phi: &Endomorphism,
    ) -> Result<GroupWord> {
        let phi_alpha = self.apply(phi, alpha)?;
        let prefix = self.multiply(alpha, beta)?;
        self.multiply(&prefix, &self.inverse(&phi_alpha)?)
    }

    pub fn display_word(&self, w: &GroupWord) -> String {
        match (self, w) {
            (_, GroupWord::Vector(v)) => {
                format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            }
            (GroupModel::Finite(t), GroupWord::Element(i)) => t.name(*i).to_string(),
            (_, GroupWord::Element(i)) => format!("#{i}"),
            (_, GroupWord::Letters(w)) => format_free_word(w),
        }
    }
}

/// `alpha * beta * phi(alpha)^-1`, the twisted conjugacy move.
pub fn twisted_conjugate(
    model: &GroupModel,
    alpha: &GroupWord,
    beta: &GroupWord,
    phi: &Endomorphism,
) -> Result<GroupWord> {
    model.twisted_conjugate(alpha, beta, phi)
}

// ---------------------------------------------------------------------------
// Reidemeister class sets
// ---------------------------------------------------------------------------

/// Canonical identifier of a twisted conjugacy class. Identifiers are
/// totally ordered, so they can key sparse traces deterministically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassId {
    /// Free abelian: reduced coordinates in the Smith basis of `I - phi`
    /// (torsion coordinates reduced into `[0, d_i)`, free ones raw).
    Coords(Vec<i128>),
    /// Finite model: the least element index of the class.
    Element(usize),
    /// Free model: the least representative word found within the radius.
    Word(Vec<i32>),
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassId::Coords(c) => write!(
                f,
                "({})",
                c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            ClassId::Element(i) => write!(f, "#{i}"),
            ClassId::Word(w) => write!(f, "{}", format_free_word(w)),
        }
    }
}

/// Outcome of resolving a word to its class. `WithinRadius` marks the
/// semi-decided free-model answer: sound merges, but two ids may still
/// name one class beyond the search radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassOutcome {
    Exact(ClassId),
    WithinRadius(ClassId),
}

impl ClassOutcome {
    pub fn id(&self) -> &ClassId {
        match self {
            ClassOutcome::Exact(id) | ClassOutcome::WithinRadius(id) => id,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ClassOutcome::Exact(_))
    }
}

/// Shape of a class set: fully enumerated, infinite with its abelian
/// invariants, or the semi-decided list of representatives found so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassStructure {
    FiniteClasses(Vec<ClassId>),
    InfiniteWithStructure { invariant_factors: Vec<i128>, free_rank: usize },
    SemiDecided(Vec<ClassId>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum SetInternals {
    FreeAbelian {
        snf: Box<SmithDecomposition>,
        diagonal: Vec<i128>,
        finite: bool,
        /// `U * phi * U^-1`, the endomorphism written in Smith coordinates;
        /// present when the rho-orbit relation is switched on.
        rho_on_coords: Option<IntMatrix>,
    },
    Finite {
        class_of_element: Vec<usize>,
        representatives: Vec<usize>,
    },
    Free {
        words: Vec<Vec<i32>>,
        word_class: Vec<ClassId>,
    },
}

/// The set of twisted conjugacy classes of `(model, phi)`, optionally
/// quotiented further by the orbit relation `c ~ rho(c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReidemeisterClassSet {
    model: GroupModel,
    phi: Endomorphism,
    rho: Option<Endomorphism>,
    extra: ExtraRelations,
    structure: ClassStructure,
    internals: SetInternals,
}

/// Classes of `(model, phi)` under twisted conjugacy. Free-model sets
/// start with no known representatives; see
/// [`reidemeister_classes_with_words`] to seed them.
pub fn reidemeister_classes(
    model: &GroupModel,
    phi: &Endomorphism,
    extra: ExtraRelations,
) -> Result<ReidemeisterClassSet> {
    reidemeister_classes_with_words(model, phi, extra, &[])
}

/// Like [`reidemeister_classes`], additionally merging the supplied words
/// (free model only; other models ignore the list).
pub fn reidemeister_classes_with_words(
    model: &GroupModel,
    phi: &Endomorphism,
    extra: ExtraRelations,
    words: &[GroupWord],
) -> Result<ReidemeisterClassSet> {
    let rho = match extra {
        ExtraRelations::TwistedOnly => None,
        ExtraRelations::TwistedAndRhoOrbit => Some(phi.clone()),
    };
    build_class_set(model, phi, rho, extra, words)
}

/// Twisted conjugacy classes of `(model, phi)` quotiented by the orbit
/// relation `beta ~ rho(beta)` for a separately supplied `rho`. This is
/// the class set of an iterate: `phi` is the l-fold power while `rho` is
/// the base endomorphism, which must commute with `phi`.
pub fn reidemeister_classes_with_rho(
    model: &GroupModel,
    phi: &Endomorphism,
    rho: &Endomorphism,
    words: &[GroupWord],
) -> Result<ReidemeisterClassSet> {
    build_class_set(model, phi, Some(rho.clone()), ExtraRelations::TwistedAndRhoOrbit, words)
}

fn build_class_set(
    model: &GroupModel,
    phi: &Endomorphism,
    rho: Option<Endomorphism>,
    extra: ExtraRelations,
    words: &[GroupWord],
) -> Result<ReidemeisterClassSet> {
    model.validate_endomorphism(phi)?;
    if let Some(r) = &rho {
        model.validate_endomorphism(r)?;
    }
    match model {
        GroupModel::FreeAbelian { rank } => build_free_abelian_set(*rank, model, phi, rho, extra),
        GroupModel::Finite(table) => build_finite_set(table, model, phi, rho, extra),
        GroupModel::Free { rank, search_radius } => {
            build_free_set(*rank, *search_radius, model, phi, rho, extra, words)
        }
    }
}

fn build_free_abelian_set(
    rank: usize,
    model: &GroupModel,
    phi: &Endomorphism,
    rho: Option<Endomorphism>,
    extra: ExtraRelations,
) -> Result<ReidemeisterClassSet> {
    let Endomorphism::Matrix(phi_matrix) = phi else { unreachable!() };
    let difference = IntMatrix::identity(rank).sub(phi_matrix);
    let snf = smith_normal_form(&difference);
    let diagonal = snf.diagonal();
    let finite = diagonal.iter().all(|&d| d != 0);
    let rho_on_coords = match &rho {
        None => None,
        Some(Endomorphism::Matrix(rho_matrix)) => {
            // rho must descend to the cokernel
            if rho_matrix.mul(phi_matrix) != phi_matrix.mul(rho_matrix) {
                return Err(Error::InvalidEndomorphism(
                    "rho does not commute with phi, so it does not act on classes".into(),
                ));
            }
            Some(snf.u.mul(rho_matrix).mul(&snf.u_inv))
        }
        Some(_) => return Err(Error::ModelMismatch("rho payload does not match the model".into())),
    };
    let internals =
        SetInternals::FreeAbelian { snf: Box::new(snf), diagonal: diagonal.clone(), finite, rho_on_coords };

    let structure = if finite {
        let count: u128 = diagonal.iter().map(|&d| d as u128).product();
        if count > CLASS_ENUM_BOUND {
            return Err(Error::ClassSetTooLarge { count, bound: CLASS_ENUM_BOUND });
        }
        let mut ids: Vec<ClassId> = Vec::with_capacity(count as usize);
        let mut coords = vec![0i128; rank];
        'enumerate: loop {
            ids.push(ClassId::Coords(coords.clone()));
            // odometer over the fundamental box
            for i in (0..rank).rev() {
                coords[i] += 1;
                if coords[i] < diagonal[i] {
                    continue 'enumerate;
                }
                coords[i] = 0;
            }
            break;
        }
        let ids = match &internals {
            SetInternals::FreeAbelian { rho_on_coords: Some(rho), diagonal, .. } => {
                let mut reps: BTreeSet<ClassId> = BTreeSet::new();
                for id in &ids {
                    let ClassId::Coords(c) = id else { unreachable!() };
                    reps.insert(rho_orbit_minimum(c, rho, diagonal));
                }
                reps.into_iter().collect()
            }
            _ => ids,
        };
        ClassStructure::FiniteClasses(ids)
    } else {
        ClassStructure::InfiniteWithStructure {
            invariant_factors: diagonal.iter().copied().filter(|&d| d != 0).collect(),
            free_rank: diagonal.iter().filter(|&&d| d == 0).count(),
        }
    };

    Ok(ReidemeisterClassSet {
        model: model.clone(),
        phi: phi.clone(),
        rho,
        extra,
        structure,
        internals,
    })
}

fn reduce_coords(c: &[i128], diagonal: &[i128]) -> Vec<i128> {
    c.iter()
        .zip(diagonal)
        .map(|(&x, &d)| if d == 0 { x } else { x.rem_euclid(d) })
        .collect()
}

/// Minimum of the orbit of `c` under the induced endomorphism on
/// coordinates; the orbit is finite because the class set is.
fn rho_orbit_minimum(c: &[i128], rho: &IntMatrix, diagonal: &[i128]) -> ClassId {
    let mut seen: BTreeSet<Vec<i128>> = BTreeSet::new();
    let mut current = reduce_coords(c, diagonal);
    while seen.insert(current.clone()) {
        current = reduce_coords(&rho.matvec(&current), diagonal);
    }
    ClassId::Coords(seen.into_iter().next().expect("orbit is nonempty"))
}

fn build_finite_set(
    table: &FiniteGroupTable,
    model: &GroupModel,
    phi: &Endomorphism,
    rho: Option<Endomorphism>,
    extra: ExtraRelations,
) -> Result<ReidemeisterClassSet> {
    let Endomorphism::IndexMap(map) = phi else { unreachable!() };
    let rho_map: Option<&Vec<usize>> = match &rho {
        None => None,
        Some(Endomorphism::IndexMap(m)) => Some(m),
        Some(_) => return Err(Error::ModelMismatch("rho payload does not match the model".into())),
    };
    let n = table.order();
    let mut uf = UnionFind::new(n);
    for beta in 0..n {
        for (alpha, &phi_alpha) in map.iter().enumerate() {
            let image = table.mul(table.mul(alpha, beta), table.inverse(phi_alpha));
            uf.union(beta, image);
        }
        if let Some(r) = rho_map {
            uf.union(beta, r[beta]);
        }
    }
    // union-find roots are component minima, so they serve as class ids
    let mut class_of_element = vec![0usize; n];
    for (x, slot) in class_of_element.iter_mut().enumerate() {
        *slot = uf.find(x);
    }
    let mut representatives: Vec<usize> = class_of_element.clone();
    representatives.sort_unstable();
    representatives.dedup();
    let ids = representatives.iter().map(|&r| ClassId::Element(r)).collect();
    Ok(ReidemeisterClassSet {
        model: model.clone(),
        phi: phi.clone(),
        rho,
        extra,
        structure: ClassStructure::FiniteClasses(ids),
        internals: SetInternals::Finite { class_of_element, representatives },
    })
}

fn build_free_set(
    rank: usize,
    radius: usize,
    model: &GroupModel,
    phi: &Endomorphism,
    rho: Option<Endomorphism>,
    extra: ExtraRelations,
    words: &[GroupWord],
) -> Result<ReidemeisterClassSet> {
    let mut reduced: Vec<Vec<i32>> = Vec::with_capacity(words.len());
    for w in words {
        model.validate_word(w)?;
        let GroupWord::Letters(ls) = w else { unreachable!() };
        reduced.push(ls.clone());
    }

    let ball = bounded_ball(rank, radius)?;
    let mut position: BTreeMap<Vec<i32>, usize> = BTreeMap::new();
    for (i, w) in reduced.iter().enumerate() {
        position.entry(w.clone()).or_insert(i);
    }

    let mut uf = UnionFind::new(reduced.len());
    for (i, w) in reduced.iter().enumerate() {
        if let Some(&j) = position.get(w) {
            uf.union(i, j);
        }
        let mut candidates: Vec<Vec<i32>> = vec![w.clone()];
        if let Some(r) = &rho {
            let image = model.apply(r, &GroupWord::Letters(w.clone()))?;
            let GroupWord::Letters(img) = image else { unreachable!() };
            candidates.push(img);
        }
        for base in candidates {
            for alpha in &ball {
                let conj = twisted_conjugate_letters(model, phi, alpha, &base)?;
                if let Some(&j) = position.get(&conj) {
                    uf.union(i, j);
                }
            }
        }
    }

    // canonical form per word: minimum over its conjugator ball
    let mut canonical: Vec<Vec<i32>> = Vec::with_capacity(reduced.len());
    for w in &reduced {
        canonical.push(ball_minimum(model, phi, &ball, w)?);
    }
    let mut class_min: BTreeMap<usize, Vec<i32>> = BTreeMap::new();
    for (i, form) in canonical.iter().enumerate() {
        let root = uf.find(i);
        let entry = class_min.entry(root).or_insert_with(|| form.clone());
        if word_sort_key(form) < word_sort_key(entry) {
            *entry = form.clone();
        }
    }
    let word_class: Vec<ClassId> =
        (0..reduced.len()).map(|i| ClassId::Word(class_min[&uf.find(i)].clone())).collect();
    let mut ids: Vec<ClassId> = class_min.values().map(|w| ClassId::Word(w.clone())).collect();
    ids.sort();
    ids.dedup();

    Ok(ReidemeisterClassSet {
        model: model.clone(),
        phi: phi.clone(),
        rho,
        extra,
        structure: ClassStructure::SemiDecided(ids),
        internals: SetInternals::Free { words: reduced, word_class },
    })
}

fn twisted_conjugate_letters(
    model: &GroupModel,
    phi: &Endomorphism,
    alpha: &[i32],
    beta: &[i32],
) -> Result<Vec<i32>> {
    let out = model.twisted_conjugate(
        &GroupWord::Letters(alpha.to_vec()),
        &GroupWord::Letters(beta.to_vec()),
        phi,
    )?;
    let GroupWord::Letters(ls) = out else { unreachable!() };
    Ok(ls)
}

fn ball_minimum(
    model: &GroupModel,
    phi: &Endomorphism,
    ball: &[Vec<i32>],
    w: &[i32],
) -> Result<Vec<i32>> {
    let mut best = w.to_vec();
    for alpha in ball {
        let conj = twisted_conjugate_letters(model, phi, alpha, w)?;
        if word_sort_key(&conj) < word_sort_key(&best) {
            best = conj;
        }
    }
    Ok(best)
}

/// Number of freely reduced words of length at most `radius`, saturating.
fn conjugator_ball_size(rank: usize, radius: usize) -> u128 {
    if rank == 0 {
        return 1;
    }
    let letters = 2 * rank as u128;
    let mut total: u128 = 1;
    let mut layer: u128 = 1;
    for step in 0..radius {
        let branching = if step == 0 { letters } else { letters - 1 };
        layer = layer.saturating_mul(branching);
        total = total.saturating_add(layer);
        if total > CLASS_ENUM_BOUND {
            return total;
        }
    }
    total
}

fn bounded_ball(rank: usize, radius: usize) -> Result<Vec<Vec<i32>>> {
    let size = conjugator_ball_size(rank, radius);
    if size > CLASS_ENUM_BOUND {
        return Err(Error::ClassSetTooLarge { count: size, bound: CLASS_ENUM_BOUND });
    }
    Ok(reduced_words_up_to(rank, radius))
}

/// All freely reduced words of length at most `radius`.
fn reduced_words_up_to(rank: usize, radius: usize) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<i32>> = vec![Vec::new()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for g in 1..=rank as i32 {
                for s in [g, -g] {
                    if w.last() != Some(&-s) {
                        let mut w2 = w.clone();
                        w2.push(s);
                        next.push(w2);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl ReidemeisterClassSet {
    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn phi(&self) -> &Endomorphism {
        &self.phi
    }

    /// The map generating the orbit relation, when one is switched on.
    pub fn rho(&self) -> Option<&Endomorphism> {
        self.rho.as_ref()
    }

    pub fn extra(&self) -> ExtraRelations {
        self.extra
    }

    pub fn structure(&self) -> &ClassStructure {
        &self.structure
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.structure, ClassStructure::FiniteClasses(_))
    }

    /// Number of classes when fully enumerated.
    pub fn class_count(&self) -> Option<usize> {
        match &self.structure {
            ClassStructure::FiniteClasses(ids) => Some(ids.len()),
            _ => None,
        }
    }

    /// Enumerated (finite) or currently known (semi-decided) class ids.
    pub fn known_ids(&self) -> &[ClassId] {
        match &self.structure {
            ClassStructure::FiniteClasses(ids) | ClassStructure::SemiDecided(ids) => ids,
            ClassStructure::InfiniteWithStructure { .. } => &[],
        }
    }

    /// Resolves a word to its class identifier.
    pub fn class_of(&self, beta: &GroupWord) -> Result<ClassOutcome> {
        self.model.validate_word(beta)?;
        match (&self.internals, beta) {
            (SetInternals::FreeAbelian { snf, diagonal, finite, rho_on_coords }, GroupWord::Vector(v)) => {
                let v128: Vec<i128> = v.iter().map(|&x| x as i128).collect();
                let coords = reduce_coords(&snf.u.matvec(&v128), diagonal);
                match rho_on_coords {
                    None => Ok(ClassOutcome::Exact(ClassId::Coords(coords))),
                    Some(rho) => {
                        if !finite {
                            return Err(Error::Unsupported(
                                "rho-orbit canonicalization over an infinite class set".into(),
                            ));
                        }
                        Ok(ClassOutcome::Exact(rho_orbit_minimum(&coords, rho, diagonal)))
                    }
                }
            }
            (SetInternals::Finite { class_of_element, .. }, GroupWord::Element(i)) => {
                Ok(ClassOutcome::Exact(ClassId::Element(class_of_element[*i])))
            }
            (SetInternals::Free { words, word_class }, GroupWord::Letters(w)) => {
                let GroupModel::Free { rank, search_radius } = &self.model else { unreachable!() };
                if *rank == 0 {
                    return Ok(ClassOutcome::Exact(ClassId::Word(Vec::new())));
                }
                let ball = bounded_ball(*rank, *search_radius)?;
                let position: BTreeMap<&[i32], usize> =
                    words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
                let mut candidates: Vec<Vec<i32>> = vec![w.clone()];
                if let Some(r) = &self.rho {
                    let image = self.model.apply(r, beta)?;
                    let GroupWord::Letters(img) = image else { unreachable!() };
                    candidates.push(img);
                }
                let mut best = w.clone();
                for base in &candidates {
                    for alpha in &ball {
                        let conj = twisted_conjugate_letters(&self.model, &self.phi, alpha, base)?;
                        if let Some(&j) = position.get(conj.as_slice()) {
                            return Ok(ClassOutcome::WithinRadius(word_class[j].clone()));
                        }
                        if word_sort_key(&conj) < word_sort_key(&best) {
                            best = conj;
                        }
                    }
                }
                Ok(ClassOutcome::WithinRadius(ClassId::Word(best)))
            }
            _ => Err(Error::ModelMismatch("word payload does not match the model kind".into())),
        }
    }

    /// Whether an identifier is one this set could have produced.
    pub fn contains_id(&self, id: &ClassId) -> bool {
        match (&self.internals, id) {
            (SetInternals::FreeAbelian { diagonal, rho_on_coords, .. }, ClassId::Coords(c)) => {
                if c.len() != diagonal.len() || reduce_coords(c, diagonal) != *c {
                    return false;
                }
                match rho_on_coords {
                    Some(rho) => rho_orbit_minimum(c, rho, diagonal) == *id,
                    None => true,
                }
            }
            (SetInternals::Finite { representatives, .. }, ClassId::Element(i)) => {
                representatives.binary_search(i).is_ok()
            }
            (SetInternals::Free { .. }, ClassId::Word(_)) => true,
            _ => false,
        }
    }

    /// A concrete group word representing the class.
    pub fn representative_word(&self, id: &ClassId) -> Result<GroupWord> {
        if !self.contains_id(id) {
            return Err(Error::Invalid(format!("class id {id} does not belong to this set")));
        }
        match (&self.internals, id) {
            (SetInternals::FreeAbelian { snf, .. }, ClassId::Coords(c)) => {
                let word = snf.u_inv.matvec(c);
                Ok(GroupWord::Vector(word.iter().map(|&x| x as i64).collect()))
            }
            (SetInternals::Finite { .. }, ClassId::Element(i)) => Ok(GroupWord::Element(*i)),
            (SetInternals::Free { .. }, ClassId::Word(w)) => Ok(GroupWord::Letters(w.clone())),
            _ => unreachable!("contains_id checked the pairing"),
        }
    }

    pub fn display_class(&self, id: &ClassId) -> String {
        match (&self.model, id) {
            (GroupModel::Finite(t), ClassId::Element(i)) => format!("[{}]", t.name(*i)),
            _ => format!("[{id}]"),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rotation_model() -> (GroupModel, Endomorphism) {
        let model = GroupModel::FreeAbelian { rank: 2 };
        let phi = Endomorphism::Matrix(
            IntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap(),
        );
        (model, phi)
    }

    #[test]
    fn twisted_conjugate_free_abelian() {
        let (model, phi) = rotation_model();
        let alpha = GroupWord::Vector(vec![1, 0]);
        let beta = GroupWord::Vector(vec![0, 0]);
        let out = twisted_conjugate(&model, &alpha, &beta, &phi).unwrap();
        assert_eq!(out, GroupWord::Vector(vec![1, -1]));
    }

    #[test]
    fn twisted_conjugate_identity_fixes_beta() {
        let (model, phi) = rotation_model();
        let beta = GroupWord::Vector(vec![3, -2]);
        let out = twisted_conjugate(&model, &model.identity(), &beta, &phi).unwrap();
        assert_eq!(out, beta);

        let table = GroupModel::Finite(FiniteGroupTable::cyclic(5));
        let id_endo = Endomorphism::identity_for(&table);
        let beta = GroupWord::Element(3);
        assert_eq!(
            twisted_conjugate(&table, &table.identity(), &beta, &id_endo).unwrap(),
            beta
        );

        let free = GroupModel::Free { rank: 2, search_radius: 3 };
        let id_endo = Endomorphism::identity_for(&free);
        let beta = GroupWord::Letters(vec![1, 2]);
        assert_eq!(
            twisted_conjugate(&free, &free.identity(), &beta, &id_endo).unwrap(),
            beta
        );
    }

    #[test]
    fn twisted_conjugate_abelian_finite_collapses() {
        let model = GroupModel::Finite(FiniteGroupTable::cyclic(3));
        let phi = Endomorphism::identity_for(&model);
        let out =
            twisted_conjugate(&model, &GroupWord::Element(1), &GroupWord::Element(0), &phi)
                .unwrap();
        assert_eq!(out, GroupWord::Element(0));
    }

    #[test]
    fn twisted_conjugate_rejects_model_mismatch() {
        let (model, phi) = rotation_model();
        let err = twisted_conjugate(&model, &GroupWord::Element(1), &model.identity(), &phi);
        assert!(err.is_err());
    }

    #[test]
    fn rotation_has_two_classes() {
        let (model, phi) = rotation_model();
        let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
        assert_eq!(set.class_count(), Some(2));
    }

    /// Brute-force orbit merge over a box of vectors must agree with the
    /// cokernel computation.
    #[test]
    fn rotation_classes_match_brute_force_orbits() {
        let (model, phi) = rotation_model();
        let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
        let mut ids = BTreeSet::new();
        for x in -4..=4i64 {
            for y in -4..=4i64 {
                let beta = GroupWord::Vector(vec![x, y]);
                // every conjugate must resolve to the same id
                let id = set.class_of(&beta).unwrap().id().clone();
                for ax in -4..=4i64 {
                    for ay in -4..=4i64 {
                        let alpha = GroupWord::Vector(vec![ax, ay]);
                        let conj = twisted_conjugate(&model, &alpha, &beta, &phi).unwrap();
                        assert_eq!(set.class_of(&conj).unwrap().id(), &id);
                    }
                }
                ids.insert(id);
            }
        }
        assert_eq!(ids.len(), 2);
    }

    #[test]
    fn identity_endomorphism_gives_infinite_class_set() {
        for rank in 0..4 {
            let model = GroupModel::FreeAbelian { rank };
            let phi = Endomorphism::identity_for(&model);
            let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
            if rank == 0 {
                assert_eq!(set.class_count(), Some(1));
            } else {
                match set.structure() {
                    ClassStructure::InfiniteWithStructure { free_rank, .. } => {
                        assert_eq!(*free_rank, rank)
                    }
                    other => panic!("expected infinite structure, got {other:?}"),
                }
            }
        }
    }

    #[test]
    fn cyclic_four_identity_has_four_classes() {
        let model = GroupModel::Finite(FiniteGroupTable::cyclic(4));
        let phi = Endomorphism::identity_for(&model);
        let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
        assert_eq!(set.class_count(), Some(4));
    }

    #[test]
    fn class_of_detects_twisted_relation() {
        let (model, phi) = rotation_model();
        let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
        let zero = set.class_of(&GroupWord::Vector(vec![0, 0])).unwrap();
        let related = set.class_of(&GroupWord::Vector(vec![1, -1])).unwrap();
        assert_eq!(zero.id(), related.id());
        let other = set.class_of(&GroupWord::Vector(vec![1, 0])).unwrap();
        assert_ne!(zero.id(), other.id());
        // identity word resolves to the trivial class
        let trivial = set.class_of(&model.identity()).unwrap();
        assert_eq!(trivial.id(), zero.id());
        assert!(trivial.is_exact());
    }

    #[test]
    fn class_count_equals_det_when_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = 0;
        while seen < 60 {
            let rank = rng.gen_range(1..=3);
            let rows: Vec<Vec<i64>> = (0..rank)
                .map(|_| (0..rank).map(|_| rng.gen_range(-3..=3)).collect())
                .collect();
            let phi_matrix = IntMatrix::from_rows(&rows).unwrap();
            let det = IntMatrix::identity(rank).sub(&phi_matrix).det();
            if det == 0 {
                continue;
            }
            seen += 1;
            let model = GroupModel::FreeAbelian { rank };
            let phi = Endomorphism::Matrix(phi_matrix);
            let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
            assert_eq!(set.class_count(), Some(det.unsigned_abs() as usize));
        }
    }

    /// The twisted conjugation move is a left group action on words.
    #[test]
    fn twisted_conjugation_action_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (model, phi) = rotation_model();
        for _ in 0..250 {
            let rand_word = |rng: &mut ChaCha8Rng| {
                GroupWord::Vector(vec![rng.gen_range(-5..=5), rng.gen_range(-5..=5)])
            };
            let a1 = rand_word(&mut rng);
            let a2 = rand_word(&mut rng);
            let beta = rand_word(&mut rng);
            let step = twisted_conjugate(&model, &a1, &beta, &phi).unwrap();
            let two_steps = twisted_conjugate(&model, &a2, &step, &phi).unwrap();
            let combined =
                twisted_conjugate(&model, &model.multiply(&a2, &a1).unwrap(), &beta, &phi)
                    .unwrap();
            assert_eq!(two_steps, combined);
        }

        let table = GroupModel::Finite(FiniteGroupTable::symmetric(3));
        // conjugation by a fixed inner automorphism is an endomorphism
        let phi = Endomorphism::identity_for(&table);
        for _ in 0..250 {
            let r = |rng: &mut ChaCha8Rng| GroupWord::Element(rng.gen_range(0..6));
            let (a1, a2, beta) = (r(&mut rng), r(&mut rng), r(&mut rng));
            let step = twisted_conjugate(&table, &a1, &beta, &phi).unwrap();
            let two_steps = twisted_conjugate(&table, &a2, &step, &phi).unwrap();
            let combined =
                twisted_conjugate(&table, &table.multiply(&a2, &a1).unwrap(), &beta, &phi)
                    .unwrap();
            assert_eq!(two_steps, combined);
        }
    }

    /// class_of is constant on twisted conjugacy orbits.
    #[test]
    fn class_of_constant_on_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (model, phi) = rotation_model();
        let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
        for _ in 0..500 {
            let alpha = GroupWord::Vector(vec![rng.gen_range(-6..=6), rng.gen_range(-6..=6)]);
            let beta = GroupWord::Vector(vec![rng.gen_range(-6..=6), rng.gen_range(-6..=6)]);
            let conj = twisted_conjugate(&model, &alpha, &beta, &phi).unwrap();
            assert_eq!(
                set.class_of(&beta).unwrap().id(),
                set.class_of(&conj).unwrap().id()
            );
        }

        let table_model = GroupModel::Finite(FiniteGroupTable::symmetric(3));
        let phi = Endomorphism::identity_for(&table_model);
        let set = reidemeister_classes(&table_model, &phi, ExtraRelations::TwistedOnly).unwrap();
        for _ in 0..500 {
            let alpha = GroupWord::Element(rng.gen_range(0..6));
            let beta = GroupWord::Element(rng.gen_range(0..6));
            let conj = twisted_conjugate(&table_model, &alpha, &beta, &phi).unwrap();
            assert_eq!(
                set.class_of(&beta).unwrap().id(),
                set.class_of(&conj).unwrap().id()
            );
        }
    }

    #[test]
    fn rho_orbit_quotient_on_cokernel() {
        // second iterate of doubling: twisted classes of [4] form Z/3 and
        // the base map acts by v -> 2v, orbits {0} and {1, 2}
        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![4]]).unwrap());
        let twisted = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
        assert_eq!(twisted.class_count(), Some(3));

        let rho = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![2]]).unwrap());
        let quotiented = reidemeister_classes_with_rho(&model, &phi, &rho, &[]).unwrap();
        assert_eq!(quotiented.class_count(), Some(2));

        // rho defaulting to phi acts trivially here (4 = 1 mod 3)
        let trivial_rho =
            reidemeister_classes(&model, &phi, ExtraRelations::TwistedAndRhoOrbit).unwrap();
        assert_eq!(trivial_rho.class_count(), Some(3));
    }

    #[test]
    fn rho_must_commute_with_phi() {
        let model = GroupModel::FreeAbelian { rank: 2 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap());
        let rho = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap());
        assert!(reidemeister_classes_with_rho(&model, &phi, &rho, &[]).is_err());
    }

    #[test]
    fn free_model_keeps_nonconjugate_words_apart() {
        let model = GroupModel::Free { rank: 2, search_radius: 3 };
        let phi = Endomorphism::identity_for(&model);
        let words = vec![
            GroupWord::Letters(vec![]),
            GroupWord::Letters(vec![1]),
            GroupWord::Letters(vec![2]),
            GroupWord::Letters(vec![1, 2]),
        ];
        let set =
            reidemeister_classes_with_words(&model, &phi, ExtraRelations::TwistedOnly, &words)
                .unwrap();
        assert_eq!(set.known_ids().len(), 4);
        // conjugating a listed word lands back in its class
        let conj = twisted_conjugate(
            &model,
            &GroupWord::Letters(vec![2, 1]),
            &GroupWord::Letters(vec![1, 2]),
            &phi,
        )
        .unwrap();
        let out = set.class_of(&conj).unwrap();
        assert!(!out.is_exact());
        assert_eq!(out.id(), set.class_of(&GroupWord::Letters(vec![1, 2])).unwrap().id());
    }

    #[test]
    fn free_model_merges_conjugate_words() {
        let model = GroupModel::Free { rank: 2, search_radius: 3 };
        let phi = Endomorphism::identity_for(&model);
        // b a b^-1 and a are conjugate by a length-1 witness
        let words = vec![
            GroupWord::Letters(vec![1]),
            GroupWord::Letters(vec![2, 1, -2]),
        ];
        let set =
            reidemeister_classes_with_words(&model, &phi, ExtraRelations::TwistedOnly, &words)
                .unwrap();
        assert_eq!(set.known_ids().len(), 1);
        assert_eq!(set.known_ids()[0], ClassId::Word(vec![1]));
    }

    #[test]
    fn free_model_rho_merge() {
        // phi swaps the generators; a and b fall into one rho-orbit class
        let model = GroupModel::Free { rank: 2, search_radius: 2 };
        let phi = Endomorphism::GeneratorImages(vec![vec![2], vec![1]]);
        let words = vec![GroupWord::Letters(vec![1]), GroupWord::Letters(vec![2])];
        let set = reidemeister_classes_with_words(
            &model,
            &phi,
            ExtraRelations::TwistedAndRhoOrbit,
            &words,
        )
        .unwrap();
        assert_eq!(set.known_ids().len(), 1);
    }

    #[test]
    fn representative_words_resolve_to_their_class() {
        let (model, phi) = rotation_model();
        let set = reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap();
        for id in set.known_ids() {
            let word = set.representative_word(id).unwrap();
            assert_eq!(set.class_of(&word).unwrap().id(), id);
        }
    }

    #[test]
    fn finite_table_validation_rejects_bad_tables() {
        // constant row
        let err = FiniteGroupTable::new(vec![vec![0, 0], vec![1, 1]], None);
        assert!(err.is_err());
        // identity not at index 0
        let err = FiniteGroupTable::new(vec![vec![1, 0], vec![0, 1]], None);
        assert!(err.is_err());
    }

    #[test]
    fn symmetric_three_has_expected_structure() {
        let s3 = FiniteGroupTable::symmetric(3);
        assert_eq!(s3.order(), 6);
        // non-abelian: some pair fails to commute
        let noncommuting = (0..6).any(|a| (0..6).any(|b| s3.mul(a, b) != s3.mul(b, a)));
        assert!(noncommuting);
    }

    #[test]
    fn oversized_search_radius_is_rejected() {
        let model = GroupModel::Free { rank: 3, search_radius: 30 };
        let phi = Endomorphism::identity_for(&model);
        let words = vec![GroupWord::Letters(vec![1])];
        let err =
            reidemeister_classes_with_words(&model, &phi, ExtraRelations::TwistedOnly, &words)
                .unwrap_err();
        assert!(matches!(err, Error::ClassSetTooLarge { .. }));
    }

    #[test]
    fn free_word_parse_format_roundtrip() {
        let w = vec![1, 2, -1];
        let s = format_free_word(&w);
        assert_eq!(s, "abA");
        assert_eq!(parse_free_word(&s, 2).unwrap(), w);
        assert_eq!(parse_free_word("1", 2).unwrap(), Vec::<i32>::new());
        assert!(parse_free_word("abc", 2).is_err());
    }
}
