//! Periodic point obstructions through the Fuller transform.
//!
//! The n-periodic points of `f` correspond to fixed points of the cyclic
//! shift map on the n-fold product, and the obstruction splits into one
//! component per divisor `k` of `n`. The component for `k` lives on the
//! iterate `f^l`, `l = n/k`: its unreduced trace is the trace of `f^l`,
//! the residual cyclic group of order `l` acts on classes through the
//! base map, and the reduced trace counts the surviving orbit terms. The
//! count of nonzero reduced terms for the `l`-component vanishes exactly
//! when the Nielsen number of `f^l` does, even though the two numbers can
//! differ.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::group::{ClassId, GroupWord, ReidemeisterClassSet};
use crate::torus::{fixed_point_records, torus_class_set, torus_iterate, TorusMap};
use crate::trace::{
    reduce_trace, reidemeister_trace, trace_orbit_constancy, ClassAction, FixedPointRecord,
    ReducedTrace, Trace,
};
use crate::{Error, Result};

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors: n must be positive");
    let mut out: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    out.sort_unstable();
    out
}

/// One divisor component of the periodic obstruction: the class data of
/// `f^l` together with the residual cyclic action and its reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullerComponent {
    /// The indexing divisor of `n` (the subgroup order).
    pub k: u64,
    /// The iterate this component measures; `k * l = n`.
    pub l: u64,
    pub class_set: Arc<ReidemeisterClassSet>,
    pub action: ClassAction,
    pub trace: Trace,
    pub reduced: ReducedTrace,
    /// Number of nonzero reduced terms.
    pub count: usize,
}

impl FullerComponent {
    /// Nielsen number of the unreduced trace.
    pub fn nielsen(&self) -> usize {
        self.trace.nielsen_number()
    }
}

/// The divisor-indexed obstruction for period `n`, components sorted by
/// the iterate `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicObstruction {
    pub n: u64,
    pub components: Vec<FullerComponent>,
}

impl PeriodicObstruction {
    pub fn vanishes(&self) -> bool {
        self.components.iter().all(|c| c.reduced.is_zero())
    }

    pub fn component_for(&self, l: u64) -> Option<&FullerComponent> {
        self.components.iter().find(|c| c.l == l)
    }
}

/// Relabels fixed point records of `f^l` as records of the shift map on
/// the product: the record for `x` becomes the record for the tuple
/// `(x, f(x), ..., f^{l-1}(x))`, with the same index and class word. The
/// `successor` permutation supplies `f` on record labels.
pub fn fuller_class_correspondence(
    records: &[FixedPointRecord],
    successor: &BTreeMap<String, String>,
    l: u64,
) -> Result<Vec<FixedPointRecord>> {
    assert!(l >= 1, "fuller_class_correspondence: l must be positive");
    records
        .iter()
        .map(|record| {
            let mut tuple = Vec::with_capacity(l as usize);
            let mut current = record.id.clone();
            for step in 0..l {
                if step > 0 {
                    current = successor
                        .get(&current)
                        .ok_or_else(|| {
                            Error::Invalid(format!("successor of record {current:?} is unknown"))
                        })?
                        .clone();
                }
                tuple.push(current.clone());
            }
            Ok(FixedPointRecord::new(
                format!("({})", tuple.join(",")),
                record.index,
                record.class_word.clone(),
            ))
        })
        .collect()
}

/// The obstruction of a generic torus map for period `n`. Every iterate
/// `A^l` over `l | n` must be generic; the first failure is reported with
/// its iterate.
pub fn periodic_obstruction_torus(map: &TorusMap, n: u64) -> Result<PeriodicObstruction> {
    assert!(n >= 1, "periodic_obstruction_torus: n must be positive");
    let mut components = Vec::new();
    for l in divisors(n) {
        let iterate = torus_iterate(map, l);
        if !iterate.is_generic() {
            return Err(Error::DegenerateIterate { iterate: l });
        }
        let class_set = torus_class_set(&iterate)?;
        let records = fixed_point_records(&iterate)?;
        let trace = reidemeister_trace(&records, &class_set)?;
        let action = residual_action_on_torus_classes(map, &class_set, l)?;
        debug_assert!(trace_orbit_constancy(&trace, &action)?);
        let reduced = reduce_trace(&trace, &action)?;
        let count = reduced.nonzero_terms();
        components.push(FullerComponent {
            k: n / l,
            l,
            class_set,
            action,
            trace,
            reduced,
            count,
        });
    }
    Ok(PeriodicObstruction { n, components })
}

/// The residual cyclic action of order `l` on the classes of `A^l`,
/// generated by `v -> A v` on the cokernel.
fn residual_action_on_torus_classes(
    map: &TorusMap,
    class_set: &Arc<ReidemeisterClassSet>,
    l: u64,
) -> Result<ClassAction> {
    let mut generator: BTreeMap<ClassId, ClassId> = BTreeMap::new();
    for id in class_set.known_ids() {
        let word = class_set.representative_word(id)?;
        let GroupWord::Vector(v) = &word else { unreachable!("torus classes are vectors") };
        let v128: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let image_vector: Vec<i64> =
            map.matrix().matvec(&v128).iter().map(|&x| x as i64).collect();
        let image = class_set.class_of(&GroupWord::Vector(image_vector))?;
        generator.insert(id.clone(), image.id().clone());
    }
    ClassAction::cyclic(l as usize, &generator)
}

/// Scenario-supplied data for one divisor component.
#[derive(Clone, Debug)]
pub struct ComponentInput {
    pub class_set: Arc<ReidemeisterClassSet>,
    pub records: Vec<FixedPointRecord>,
    pub action: ClassAction,
}

/// Assembles the obstruction from per-divisor presentation data. The map
/// must carry exactly the divisors of `n`.
pub fn periodic_obstruction_presentation(
    n: u64,
    inputs: &BTreeMap<u64, ComponentInput>,
) -> Result<PeriodicObstruction> {
    assert!(n >= 1, "periodic_obstruction_presentation: n must be positive");
    let expected = divisors(n);
    for l in &expected {
        if !inputs.contains_key(l) {
            return Err(Error::MissingDivisor(*l));
        }
    }
    for l in inputs.keys() {
        if !expected.contains(l) {
            return Err(Error::DivisorMismatch(format!("{l} does not divide {n}")));
        }
    }
    let mut components = Vec::new();
    for l in expected {
        let input = &inputs[&l];
        let trace = reidemeister_trace(&input.records, &input.class_set)?;
        let reduced = reduce_trace(&trace, &input.action)?;
        let count = reduced.nonzero_terms();
        components.push(FullerComponent {
            k: n / l,
            l,
            class_set: input.class_set.clone(),
            action: input.action.clone(),
            trace,
            reduced,
            count,
        });
    }
    Ok(PeriodicObstruction { n, components })
}

/// One row of the divisor table comparing the reduced term count with an
/// independently computed Nielsen number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureRow {
    pub l: u64,
    /// Nonzero reduced terms of the l-component.
    pub reduced_count: usize,
    /// Independently supplied N(f^l).
    pub nielsen: usize,
    pub counts_equal: bool,
    pub biconditional_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureComparison {
    pub rows: Vec<ConjectureRow>,
    pub all_biconditionals_hold: bool,
}

/// Compares each component's reduced term count against an independently
/// computed Nielsen number of the matching iterate. The two counts may
/// differ; the vanishing biconditional must hold for every divisor.
pub fn conjecture_comparison(
    obstruction: &PeriodicObstruction,
    nielsen_numbers: &BTreeMap<u64, usize>,
) -> Result<ConjectureComparison> {
    let component_divisors: Vec<u64> = obstruction.components.iter().map(|c| c.l).collect();
    let supplied: Vec<u64> = nielsen_numbers.keys().copied().collect();
    if component_divisors != supplied {
        return Err(Error::DivisorMismatch(format!(
            "components cover {component_divisors:?}, Nielsen numbers cover {supplied:?}"
        )));
    }
    let rows: Vec<ConjectureRow> = obstruction
        .components
        .iter()
        .map(|component| {
            let nielsen = nielsen_numbers[&component.l];
            ConjectureRow {
                l: component.l,
                reduced_count: component.count,
                nielsen,
                counts_equal: component.count == nielsen,
                biconditional_holds: (component.count == 0) == (nielsen == 0),
            }
        })
        .collect();
    let all_biconditionals_hold = rows.iter().all(|r| r.biconditional_holds);
    Ok(ConjectureComparison { rows, all_biconditionals_hold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{
        reidemeister_classes_with_rho, reidemeister_classes_with_words, Endomorphism,
        ExtraRelations, GroupModel,
    };
    use crate::matrix::IntMatrix;

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(6), vec![1, 2, 3, 6]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn doubling_map_period_two() {
        let map = TorusMap::from_rows(&[vec![2]]).unwrap();
        let obstruction = periodic_obstruction_torus(&map, 2).unwrap();
        assert_eq!(obstruction.components.len(), 2);

        let c1 = obstruction.component_for(1).unwrap();
        assert_eq!(c1.k, 2);
        assert_eq!(c1.nielsen(), 1);
        assert_eq!(c1.count, 1);

        // f^2 = [4]: three classes Z/3, all with index sign(1 - 4) = -1;
        // the residual action doubles, orbits {0} and {1, 2}
        let c2 = obstruction.component_for(2).unwrap();
        assert_eq!(c2.k, 1);
        assert_eq!(c2.nielsen(), 3);
        assert_eq!(c2.count, 2);
        let coefficients: Vec<i64> =
            c2.reduced.orbit_coefficients().values().copied().collect();
        assert_eq!(coefficients, vec![-1, -2]);
        assert!(!obstruction.vanishes());
    }

    /// The residual-orbit count agrees with the class count of the
    /// rho-quotiented set: the same quotient computed two ways.
    #[test]
    fn orbit_count_matches_rho_quotient() {
        let map = TorusMap::from_rows(&[vec![2]]).unwrap();
        let obstruction = periodic_obstruction_torus(&map, 2).unwrap();
        let c2 = obstruction.component_for(2).unwrap();

        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi_l = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![4]]).unwrap());
        let rho = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![2]]).unwrap());
        let quotiented = reidemeister_classes_with_rho(&model, &phi_l, &rho, &[]).unwrap();
        assert_eq!(quotiented.class_count(), Some(c2.action.orbits().len()));
    }

    #[test]
    fn period_one_is_the_plain_trace() {
        let map = TorusMap::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
        let obstruction = periodic_obstruction_torus(&map, 1).unwrap();
        assert_eq!(obstruction.components.len(), 1);
        let c = &obstruction.components[0];
        assert_eq!((c.k, c.l), (1, 1));
        assert_eq!(c.nielsen(), 2);
        assert_eq!(c.count, 2);
    }

    #[test]
    fn rotation_degenerates_at_period_four() {
        let map = TorusMap::from_rows(&[vec![0, -1], vec![1, 0]]).unwrap();
        let err = periodic_obstruction_torus(&map, 4).unwrap_err();
        assert_eq!(err, Error::DegenerateIterate { iterate: 4 });
    }

    #[test]
    fn correspondence_relabels_records() {
        let records = vec![
            FixedPointRecord::new("x", 1, GroupWord::Letters(vec![])),
            FixedPointRecord::new("f(x)", 1, GroupWord::Letters(vec![1])),
        ];
        let mut successor = BTreeMap::new();
        successor.insert("x".to_string(), "f(x)".to_string());
        successor.insert("f(x)".to_string(), "x".to_string());

        let relabeled = fuller_class_correspondence(&records, &successor, 2).unwrap();
        assert_eq!(relabeled[0].id, "(x,f(x))");
        assert_eq!(relabeled[1].id, "(f(x),x)");
        assert_eq!(relabeled[0].index, 1);
        assert_eq!(relabeled[0].class_word, records[0].class_word);

        // l = 1 keeps the labels (modulo the tuple wrapper)
        let single = fuller_class_correspondence(&records, &successor, 1).unwrap();
        assert_eq!(single[0].id, "(x)");

        // empty record list stays empty
        assert!(fuller_class_correspondence(&[], &successor, 3).unwrap().is_empty());
    }

    #[test]
    fn correspondence_preserves_nielsen_numbers() {
        let model = GroupModel::Free { rank: 2, search_radius: 3 };
        let phi = Endomorphism::identity_for(&model);
        let words = vec![GroupWord::Letters(vec![]), GroupWord::Letters(vec![1])];
        let set = Arc::new(
            reidemeister_classes_with_words(&model, &phi, ExtraRelations::TwistedOnly, &words)
                .unwrap(),
        );
        let records = vec![
            FixedPointRecord::new("x", 1, words[0].clone()),
            FixedPointRecord::new("f(x)", 1, words[1].clone()),
        ];
        let mut successor = BTreeMap::new();
        successor.insert("x".to_string(), "f(x)".to_string());
        successor.insert("f(x)".to_string(), "x".to_string());
        let relabeled = fuller_class_correspondence(&records, &successor, 2).unwrap();
        let before = reidemeister_trace(&records, &set).unwrap();
        let after = reidemeister_trace(&relabeled, &set).unwrap();
        assert_eq!(before.nielsen_number(), after.nielsen_number());
        assert_eq!(before.coefficients(), after.coefficients());
    }

    #[test]
    fn presentation_requires_every_divisor() {
        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![2]]).unwrap());
        let set = Arc::new(
            crate::group::reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly)
                .unwrap(),
        );
        let action =
            ClassAction::trivial(crate::group::FiniteGroupTable::cyclic(1), set.known_ids());
        let mut inputs = BTreeMap::new();
        inputs.insert(
            1,
            ComponentInput { class_set: set, records: Vec::new(), action },
        );
        let err = periodic_obstruction_presentation(2, &inputs).unwrap_err();
        assert_eq!(err, Error::MissingDivisor(2));
    }

    #[test]
    fn empty_presentation_vanishes() {
        let model = GroupModel::FreeAbelian { rank: 1 };
        let phi = Endomorphism::Matrix(IntMatrix::from_rows(&[vec![2]]).unwrap());
        let set = Arc::new(
            crate::group::reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly)
                .unwrap(),
        );
        let action =
            ClassAction::trivial(crate::group::FiniteGroupTable::cyclic(1), set.known_ids());
        let mut inputs = BTreeMap::new();
        inputs.insert(
            1,
            ComponentInput { class_set: set.clone(), records: Vec::new(), action },
        );
        let obstruction = periodic_obstruction_presentation(1, &inputs).unwrap();
        assert!(obstruction.vanishes());

        let single = FixedPointRecord::new("p", 1, GroupWord::Vector(vec![0]));
        let action =
            ClassAction::trivial(crate::group::FiniteGroupTable::cyclic(1), set.known_ids());
        let mut inputs = BTreeMap::new();
        inputs.insert(
            1,
            ComponentInput { class_set: set, records: vec![single], action },
        );
        let obstruction = periodic_obstruction_presentation(1, &inputs).unwrap();
        assert_eq!(obstruction.components[0].count, 1);
        assert!(!obstruction.vanishes());
    }

    #[test]
    fn comparison_rows_and_biconditional() {
        let map = TorusMap::from_rows(&[vec![2]]).unwrap();
        let obstruction = periodic_obstruction_torus(&map, 2).unwrap();
        // independent Nielsen numbers from determinants
        let mut nielsen = BTreeMap::new();
        for l in divisors(2) {
            let det = torus_iterate(&map, l).fixed_point_determinant();
            nielsen.insert(l, det.unsigned_abs() as usize);
        }
        let comparison = conjecture_comparison(&obstruction, &nielsen).unwrap();
        assert!(comparison.all_biconditionals_hold);
        // the l = 2 row exhibits a strict inequality: 2 reduced terms vs 3
        let row = &comparison.rows[1];
        assert_eq!((row.l, row.reduced_count, row.nielsen), (2, 2, 3));
        assert!(!row.counts_equal);
        assert!(row.biconditional_holds);
    }

    #[test]
    fn comparison_rejects_mismatched_divisors() {
        let map = TorusMap::from_rows(&[vec![2]]).unwrap();
        let obstruction = periodic_obstruction_torus(&map, 2).unwrap();
        let mut nielsen = BTreeMap::new();
        nielsen.insert(1, 1);
        assert!(conjecture_comparison(&obstruction, &nielsen).is_err());
    }

    /// Reduced counts never exceed the unreduced Nielsen numbers, and the
    /// obstruction vanishes exactly when every iterate's Nielsen number
    /// is zero.
    #[test]
    fn count_bounds_and_vanishing() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let mut checked = 0;
        'outer: while checked < 25 {
            let m = rng.gen_range(1..=2);
            let rows: Vec<Vec<i64>> =
                (0..m).map(|_| (0..m).map(|_| rng.gen_range(-2..=2)).collect()).collect();
            let map = TorusMap::from_rows(&rows).unwrap();
            let n = rng.gen_range(1..=4u64);
            let mut total_classes = 0u128;
            for l in divisors(n) {
                let det = torus_iterate(&map, l).fixed_point_determinant();
                if det == 0 {
                    continue 'outer;
                }
                total_classes += det.unsigned_abs();
            }
            if total_classes > 4000 {
                continue;
            }
            checked += 1;
            let obstruction = periodic_obstruction_torus(&map, n).unwrap();
            let mut all_zero = true;
            for component in &obstruction.components {
                assert!(component.count <= component.nielsen());
                if component.nielsen() != 0 {
                    all_zero = false;
                }
            }
            assert_eq!(obstruction.vanishes(), all_zero);
        }
    }
}
