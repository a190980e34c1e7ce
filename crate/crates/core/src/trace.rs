//! Formal Reidemeister traces and their reductions under finite group
//! actions.
//!
//! A trace is a sparse integer combination of twisted conjugacy classes;
//! the Nielsen number is its number of nonzero terms. A finite group
//! acting on the class set reduces the trace to coinvariants: the orbit
//! of a class `[x]` collects coefficient `|orbit| * i(f, [x])` when the
//! index is constant along the orbit, so a trace vanishes exactly when
//! its reduction does.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::group::{ClassId, ClassOutcome, FiniteGroupTable, GroupWord, ReidemeisterClassSet};
use crate::{Error, Result};

/// One fixed point: a label, its integer index, and the group word that
/// locates its class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointRecord {
    pub id: String,
    pub index: i64,
    pub class_word: GroupWord,
}

impl FixedPointRecord {
    pub fn new(id: impl Into<String>, index: i64, class_word: GroupWord) -> Self {
        FixedPointRecord { id: id.into(), index, class_word }
    }
}

/// Whether every class resolution behind a value was exact, or only
/// sound within a free-model search radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exactness {
    Exact,
    WithinRadius,
}

impl Exactness {
    pub fn combine(self, other: Exactness) -> Exactness {
        self.max(other)
    }

    pub fn of(outcome: &ClassOutcome) -> Exactness {
        if outcome.is_exact() {
            Exactness::Exact
        } else {
            Exactness::WithinRadius
        }
    }
}

/// A sparse formal sum of classes with nonzero integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    class_set: Arc<ReidemeisterClassSet>,
    coefficients: BTreeMap<ClassId, i64>,
    exactness: Exactness,
}

impl Trace {
    pub fn zero(class_set: Arc<ReidemeisterClassSet>) -> Trace {
        Trace { class_set, coefficients: BTreeMap::new(), exactness: Exactness::Exact }
    }

    /// Builds a trace from explicit coefficients; zero entries are
    /// dropped and every id must belong to the class set.
    pub fn from_coefficients(
        class_set: Arc<ReidemeisterClassSet>,
        coefficients: BTreeMap<ClassId, i64>,
    ) -> Result<Trace> {
        for id in coefficients.keys() {
            if !class_set.contains_id(id) {
                return Err(Error::Invalid(format!("class id {id} does not belong to the set")));
            }
        }
        let coefficients = coefficients.into_iter().filter(|(_, v)| *v != 0).collect();
        Ok(Trace { class_set, coefficients, exactness: Exactness::Exact })
    }

    pub fn class_set(&self) -> &Arc<ReidemeisterClassSet> {
        &self.class_set
    }

    pub fn coefficients(&self) -> &BTreeMap<ClassId, i64> {
        &self.coefficients
    }

    pub fn coefficient(&self, id: &ClassId) -> i64 {
        self.coefficients.get(id).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Number of nonzero terms.
    pub fn nielsen_number(&self) -> usize {
        self.coefficients.len()
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn add(&self, other: &Trace) -> Result<Trace> {
        if self.class_set != other.class_set {
            return Err(Error::ClassSetMismatch);
        }
        let mut coefficients = self.coefficients.clone();
        for (id, v) in &other.coefficients {
            let entry = coefficients.entry(id.clone()).or_insert(0);
            *entry += v;
            if *entry == 0 {
                coefficients.remove(id);
            }
        }
        Ok(Trace {
            class_set: self.class_set.clone(),
            coefficients,
            exactness: self.exactness.combine(other.exactness),
        })
    }
}

/// The sum of `i(f, [x]) * [x]` over the supplied fixed points, with
/// class words resolved through the class set. Cancelling records drop
/// out; free-model resolutions mark the trace `WithinRadius`.
pub fn reidemeister_trace(
    records: &[FixedPointRecord],
    class_set: &Arc<ReidemeisterClassSet>,
) -> Result<Trace> {
    let mut coefficients: BTreeMap<ClassId, i64> = BTreeMap::new();
    let mut exactness = Exactness::Exact;
    for record in records {
        let outcome = class_set.class_of(&record.class_word)?;
        exactness = exactness.combine(Exactness::of(&outcome));
        let entry = coefficients.entry(outcome.id().clone()).or_insert(0);
        *entry += record.index;
        if *entry == 0 {
            coefficients.remove(outcome.id());
        }
    }
    Ok(Trace { class_set: class_set.clone(), coefficients, exactness })
}

/// Number of nonzero terms of the trace.
pub fn nielsen_number(trace: &Trace) -> usize {
    trace.nielsen_number()
}

/// A finite group acting on a finite set of class identifiers. Laws are
/// checked at construction: the identity acts trivially and the action
/// respects the multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassAction {
    group: FiniteGroupTable,
    domain: Vec<ClassId>,
    maps: Vec<BTreeMap<ClassId, ClassId>>,
}

impl ClassAction {
    pub fn new(group: FiniteGroupTable, maps: Vec<BTreeMap<ClassId, ClassId>>) -> Result<Self> {
        if maps.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} maps supplied for a group of order {}",
                maps.len(),
                group.order()
            )));
        }
        let domain: BTreeSet<ClassId> = maps
            .first()
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default();
        for (g, map) in maps.iter().enumerate() {
            let keys: BTreeSet<ClassId> = map.keys().cloned().collect();
            if keys != domain {
                return Err(Error::InvalidAction(format!(
                    "element {g} acts on a different domain"
                )));
            }
            for image in map.values() {
                if !domain.contains(image) {
                    return Err(Error::InvalidAction(format!(
                        "element {g} maps a class outside the domain"
                    )));
                }
            }
        }
        for c in &domain {
            if maps[group.identity()][c] != *c {
                return Err(Error::InvalidAction("identity must act trivially".into()));
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let gh = group.mul(g, h);
                for c in &domain {
                    if maps[gh][c] != maps[g][&maps[h][c]] {
                        return Err(Error::InvalidAction(format!(
                            "composition law fails at ({g}, {h})"
                        )));
                    }
                }
            }
        }
        Ok(ClassAction { group, domain: domain.into_iter().collect(), maps })
    }

    /// Every element fixes every class.
    pub fn trivial(group: FiniteGroupTable, domain: &[ClassId]) -> Self {
        let id_map: BTreeMap<ClassId, ClassId> =
            domain.iter().map(|c| (c.clone(), c.clone())).collect();
        let maps = vec![id_map; group.order()];
        ClassAction::new(group, maps).expect("trivial action satisfies the laws")
    }

    /// Cyclic action generated by a single permutation of the classes;
    /// the permutation's order must divide `order`.
    pub fn cyclic(order: usize, generator: &BTreeMap<ClassId, ClassId>) -> Result<Self> {
        let group = FiniteGroupTable::cyclic(order);
        let identity: BTreeMap<ClassId, ClassId> =
            generator.keys().map(|c| (c.clone(), c.clone())).collect();
        let mut maps = Vec::with_capacity(order);
        maps.push(identity.clone());
        let mut current = identity;
        for _ in 1..order {
            let next: Result<BTreeMap<ClassId, ClassId>> = current
                .iter()
                .map(|(c, img)| {
                    let further = generator.get(img).ok_or_else(|| {
                        Error::InvalidAction(format!("generator image {img} is not in the domain"))
                    })?;
                    Ok((c.clone(), further.clone()))
                })
                .collect();
            current = next?;
            maps.push(current.clone());
        }
        // closing the cycle: generator applied `order` times is the identity
        for (c, img) in &maps[order - 1] {
            let closed = generator.get(img).ok_or_else(|| {
                Error::InvalidAction(format!("generator image {img} is not in the domain"))
            })?;
            if closed != c {
                return Err(Error::InvalidAction(format!(
                    "generator order does not divide {order} (class {c} fails to close)"
                )));
            }
        }
        ClassAction::new(group, maps)
    }

    pub fn group(&self) -> &FiniteGroupTable {
        &self.group
    }

    pub fn domain(&self) -> &[ClassId] {
        &self.domain
    }

    pub fn act(&self, g: usize, c: &ClassId) -> Result<&ClassId> {
        self.maps
            .get(g)
            .and_then(|m| m.get(c))
            .ok_or_else(|| Error::ActionDomainMismatch(c.to_string()))
    }

    /// Orbits of the domain, each sorted, listed by their least member.
    pub fn orbits(&self) -> Vec<Vec<ClassId>> {
        let mut seen: BTreeSet<ClassId> = BTreeSet::new();
        let mut out = Vec::new();
        for c in &self.domain {
            if seen.contains(c) {
                continue;
            }
            let mut orbit: BTreeSet<ClassId> = BTreeSet::new();
            for g in 0..self.group.order() {
                orbit.insert(self.maps[g][c].clone());
            }
            for member in &orbit {
                seen.insert(member.clone());
            }
            out.push(orbit.into_iter().collect());
        }
        out
    }
}

/// A trace pushed down to orbits: coefficients indexed by the least class
/// of each orbit, with the orbit sizes kept alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedTrace {
    orbit_coefficients: BTreeMap<ClassId, i64>,
    orbit_sizes: BTreeMap<ClassId, usize>,
    exactness: Exactness,
}

impl ReducedTrace {
    pub fn orbit_coefficients(&self) -> &BTreeMap<ClassId, i64> {
        &self.orbit_coefficients
    }

    pub fn orbit_sizes(&self) -> &BTreeMap<ClassId, usize> {
        &self.orbit_sizes
    }

    pub fn is_zero(&self) -> bool {
        self.orbit_coefficients.is_empty()
    }

    /// Number of nonzero orbit terms.
    pub fn nonzero_terms(&self) -> usize {
        self.orbit_coefficients.len()
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }
}

fn require_support_in_domain(trace: &Trace, action: &ClassAction) -> Result<()> {
    for id in trace.coefficients().keys() {
        if !action.maps[0].contains_key(id) {
            return Err(Error::ActionDomainMismatch(id.to_string()));
        }
    }
    Ok(())
}

/// Coinvariant reduction: each orbit collects the sum of its members'
/// coefficients; zero sums are dropped.
pub fn reduce_trace(trace: &Trace, action: &ClassAction) -> Result<ReducedTrace> {
    require_support_in_domain(trace, action)?;
    let mut orbit_coefficients = BTreeMap::new();
    let mut orbit_sizes = BTreeMap::new();
    for orbit in action.orbits() {
        let total: i64 = orbit.iter().map(|c| trace.coefficient(c)).sum();
        if total != 0 {
            let representative = orbit[0].clone();
            orbit_sizes.insert(representative.clone(), orbit.len());
            orbit_coefficients.insert(representative, total);
        }
    }
    Ok(ReducedTrace { orbit_coefficients, orbit_sizes, exactness: trace.exactness() })
}

/// True when, inside every orbit of the action, all class coefficients of
/// the trace of `records` agree (classes without records count as zero).
pub fn check_orbit_index_constancy(
    records: &[FixedPointRecord],
    class_set: &Arc<ReidemeisterClassSet>,
    action: &ClassAction,
) -> Result<bool> {
    let trace = reidemeister_trace(records, class_set)?;
    trace_orbit_constancy(&trace, action)
}

/// Orbit constancy of an already assembled trace.
pub fn trace_orbit_constancy(trace: &Trace, action: &ClassAction) -> Result<bool> {
    require_support_in_domain(trace, action)?;
    for orbit in action.orbits() {
        let first = trace.coefficient(&orbit[0]);
        if orbit.iter().any(|c| trace.coefficient(c) != first) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The biconditional "trace vanishes iff its reduction vanishes". For
/// traces with orbit-constant coefficients this always holds.
pub fn vanishing_equivalence(trace: &Trace, action: &ClassAction) -> Result<bool> {
    let reduced = reduce_trace(trace, action)?;
    Ok(trace.is_zero() == reduced.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{
        reidemeister_classes, reidemeister_classes_with_words, Endomorphism, ExtraRelations,
        GroupModel,
    };
    use crate::matrix::IntMatrix;

    fn free_model_fixture() -> (Arc<ReidemeisterClassSet>, Vec<FixedPointRecord>) {
        let model = GroupModel::Free { rank: 2, search_radius: 4 };
        let phi = Endomorphism::identity_for(&model);
        let words = vec![
            GroupWord::Letters(vec![]),
            GroupWord::Letters(vec![1]),
            GroupWord::Letters(vec![2]),
            GroupWord::Letters(vec![1, 2]),
        ];
        let set = reidemeister_classes_with_words(
            &model,
            &phi,
            ExtraRelations::TwistedOnly,
            &words,
        )
        .unwrap();
        let records = vec![
            FixedPointRecord::new("x", 1, words[0].clone()),
            FixedPointRecord::new("f(x)", 1, words[1].clone()),
            FixedPointRecord::new("x'", 1, words[2].clone()),
            FixedPointRecord::new("f(x')", 1, words[3].clone()),
        ];
        (Arc::new(set), records)
    }

    fn swap_action(set: &Arc<ReidemeisterClassSet>) -> ClassAction {
        let ids = set.known_ids();
        assert_eq!(ids.len(), 4);
        let word_id = |w: &[i32]| {
            set.class_of(&GroupWord::Letters(w.to_vec())).unwrap().id().clone()
        };
        let (c_e, c_a, c_b, c_ab) = (word_id(&[]), word_id(&[1]), word_id(&[2]), word_id(&[1, 2]));
        let mut generator = BTreeMap::new();
        generator.insert(c_e.clone(), c_a.clone());
        generator.insert(c_a, c_e);
        generator.insert(c_b.clone(), c_ab.clone());
        generator.insert(c_ab, c_b);
        ClassAction::cyclic(2, &generator).unwrap()
    }

    #[test]
    fn four_records_four_classes() {
        let (set, records) = free_model_fixture();
        let trace = reidemeister_trace(&records, &set).unwrap();
        assert_eq!(trace.nielsen_number(), 4);
        assert!(trace.coefficients().values().all(|&v| v == 1));
        assert_eq!(trace.exactness(), Exactness::WithinRadius);
    }

    #[test]
    fn empty_record_list_gives_zero_trace() {
        let (set, _) = free_model_fixture();
        let trace = reidemeister_trace(&[], &set).unwrap();
        assert!(trace.is_zero());
        assert_eq!(nielsen_number(&trace), 0);
    }

    #[test]
    fn opposite_indices_cancel_within_a_class() {
        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![2]]).unwrap());
        let set =
            Arc::new(reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap());
        let records = vec![
            FixedPointRecord::new("p", 1, GroupWord::Vector(vec![0])),
            FixedPointRecord::new("q", -1, GroupWord::Vector(vec![1])),
        ];
        // |det(I - 2)| = 1, so every word lands in the single class and
        // the opposite indices cancel
        let trace = reidemeister_trace(&records, &set).unwrap();
        assert!(trace.is_zero());
    }

    #[test]
    fn nielsen_number_counts_terms() {
        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![4]]).unwrap());
        let set =
            Arc::new(reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap());
        let mut coefficients = BTreeMap::new();
        coefficients.insert(ClassId::Coords(vec![0]), -1);
        coefficients.insert(ClassId::Coords(vec![1]), 3);
        let trace = Trace::from_coefficients(set, coefficients).unwrap();
        assert_eq!(trace.nielsen_number(), 2);
    }

    #[test]
    fn swap_action_reduces_to_two_orbits() {
        let (set, records) = free_model_fixture();
        let trace = reidemeister_trace(&records, &set).unwrap();
        let action = swap_action(&set);
        assert!(check_orbit_index_constancy(&records, &set, &action).unwrap());
        let reduced = reduce_trace(&trace, &action).unwrap();
        assert_eq!(reduced.nonzero_terms(), 2);
        // coinvariant convention: each orbit of size two carries 2 * 1
        assert!(reduced.orbit_coefficients().values().all(|&v| v == 2));
        assert!(reduced.orbit_sizes().values().all(|&s| s == 2));
        assert!(vanishing_equivalence(&trace, &action).unwrap());
    }

    #[test]
    fn trivial_action_reduces_to_the_same_coefficients() {
        let (set, records) = free_model_fixture();
        let trace = reidemeister_trace(&records, &set).unwrap();
        let action = ClassAction::trivial(FiniteGroupTable::cyclic(1), set.known_ids());
        let reduced = reduce_trace(&trace, &action).unwrap();
        assert_eq!(
            reduced.orbit_coefficients().clone(),
            trace.coefficients().clone()
        );
    }

    #[test]
    fn zero_trace_reduces_to_zero() {
        let (set, _) = free_model_fixture();
        let trace = Trace::zero(set.clone());
        let action = swap_action(&set);
        let reduced = reduce_trace(&trace, &action).unwrap();
        assert!(reduced.is_zero());
        assert!(vanishing_equivalence(&trace, &action).unwrap());
    }

    #[test]
    fn constancy_detects_adversarial_data() {
        let (set, mut records) = free_model_fixture();
        records[1].index = -1; // breaks constancy on the first orbit
        let action = swap_action(&set);
        assert!(!check_orbit_index_constancy(&records, &set, &action).unwrap());
    }

    #[test]
    fn constancy_is_vacuous_for_the_trivial_action() {
        let (set, records) = free_model_fixture();
        let action = ClassAction::trivial(FiniteGroupTable::cyclic(2), set.known_ids());
        assert!(check_orbit_index_constancy(&records, &set, &action).unwrap());
    }

    #[test]
    fn reduction_is_additive() {
        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![-4]]).unwrap());
        let set =
            Arc::new(reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap());
        assert_eq!(set.class_count(), Some(5));
        let ids = set.known_ids().to_vec();
        // rotate the five classes
        let mut generator = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            generator.insert(id.clone(), ids[(i + 1) % ids.len()].clone());
        }
        let action = ClassAction::cyclic(5, &generator).unwrap();

        let mut c1 = BTreeMap::new();
        c1.insert(ids[0].clone(), 2);
        c1.insert(ids[3].clone(), -1);
        let t1 = Trace::from_coefficients(set.clone(), c1).unwrap();
        let mut c2 = BTreeMap::new();
        c2.insert(ids[1].clone(), 7);
        c2.insert(ids[3].clone(), 1);
        let t2 = Trace::from_coefficients(set.clone(), c2).unwrap();

        let lhs = reduce_trace(&t1.add(&t2).unwrap(), &action).unwrap();
        let r1 = reduce_trace(&t1, &action).unwrap();
        let r2 = reduce_trace(&t2, &action).unwrap();
        let mut summed: BTreeMap<ClassId, i64> = r1.orbit_coefficients().clone();
        for (k, v) in r2.orbit_coefficients() {
            *summed.entry(k.clone()).or_insert(0) += v;
        }
        summed.retain(|_, v| *v != 0);
        assert_eq!(lhs.orbit_coefficients().clone(), summed);
    }

    #[test]
    fn action_law_validation() {
        let ids = [ClassId::Element(0), ClassId::Element(1)];
        // a transposition closes at order 2 but not order 3
        let mut swap = BTreeMap::new();
        swap.insert(ids[0].clone(), ids[1].clone());
        swap.insert(ids[1].clone(), ids[0].clone());
        assert!(ClassAction::cyclic(2, &swap).is_ok());
        assert!(ClassAction::cyclic(3, &swap).is_err());
        assert!(ClassAction::cyclic(4, &swap).is_ok());
    }

    #[test]
    fn reduce_rejects_foreign_support() {
        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![3]]).unwrap());
        let set =
            Arc::new(reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly).unwrap());
        let ids = set.known_ids().to_vec();
        let mut coefficients = BTreeMap::new();
        coefficients.insert(ids[1].clone(), 1);
        let trace = Trace::from_coefficients(set, coefficients).unwrap();
        let action = ClassAction::trivial(FiniteGroupTable::cyclic(1), &ids[..1]);
        assert!(reduce_trace(&trace, &action).is_err());
    }
}
