//! Finite-group subgroup combinatorics and the assembled equivariant
//! invariant.
//!
//! The invariant of an equivariant map decomposes into one summand per
//! conjugacy class of subgroups `(H)`: the reduced trace of the induced
//! map on the `H`-fixed stratum, reduced under the Weyl group
//! `WH = N_G(H) / H`. Stratum data (components, records, class sets,
//! actions, dimensions) is always supplied by the caller; this module
//! contributes the subgroup lattice, the per-class assembly, and the
//! dimension gap checks under which a vanishing invariant is conclusive.

use std::collections::{BTreeMap, BTreeSet};

use crate::group::FiniteGroupTable;
use crate::trace::{
    reduce_trace, reidemeister_trace, trace_orbit_constancy, ClassAction, FixedPointRecord,
    ReducedTrace, Trace,
};
use crate::{Error, Result};

/// Default ceiling for exhaustive subgroup enumeration.
pub const DEFAULT_SUBGROUP_ORDER_BOUND: usize = 64;

/// A conjugacy class of subgroups: representative, all conjugates, the
/// normalizer of the representative, and the Weyl quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupClass {
    pub representative: Vec<usize>,
    pub conjugates: Vec<Vec<usize>>,
    pub normalizer: Vec<usize>,
    pub weyl: FiniteGroupTable,
}

impl SubgroupClass {
    pub fn order(&self) -> usize {
        self.representative.len()
    }

    /// Human-readable label built from the representative's elements.
    pub fn label(&self, group: &FiniteGroupTable) -> String {
        let members: Vec<&str> = self.representative.iter().map(|&x| group.name(x)).collect();
        format!("{{{}}}", members.join(","))
    }
}

fn close_subgroup(group: &FiniteGroupTable, generators: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut elements: BTreeSet<usize> = BTreeSet::new();
    elements.insert(group.identity());
    let mut frontier: Vec<usize> = Vec::new();
    for &g in generators {
        if elements.insert(g) {
            frontier.push(g);
        }
    }
    while let Some(x) = frontier.pop() {
        let members: Vec<usize> = elements.iter().copied().collect();
        for &a in &members {
            for product in [group.mul(a, x), group.mul(x, a)] {
                if elements.insert(product) {
                    frontier.push(product);
                }
            }
        }
    }
    elements
}

fn conjugate_subgroup(group: &FiniteGroupTable, h: &BTreeSet<usize>, g: usize) -> BTreeSet<usize> {
    let g_inv = group.inverse(g);
    h.iter().map(|&x| group.mul(group.mul(g, x), g_inv)).collect()
}

/// Every subgroup of `group`, found by closing generator sets.
fn all_subgroups(group: &FiniteGroupTable) -> Vec<BTreeSet<usize>> {
    let trivial: BTreeSet<usize> = [group.identity()].into_iter().collect();
    let mut found: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    found.insert(trivial.clone());
    let mut queue = vec![trivial];
    while let Some(h) = queue.pop() {
        for x in 0..group.order() {
            if h.contains(&x) {
                continue;
            }
            let mut generators = h.clone();
            generators.insert(x);
            let closed = close_subgroup(group, &generators);
            if found.insert(closed.clone()) {
                queue.push(closed);
            }
        }
    }
    found.into_iter().collect()
}

fn weyl_table(
    group: &FiniteGroupTable,
    subgroup: &BTreeSet<usize>,
    normalizer: &BTreeSet<usize>,
) -> Result<FiniteGroupTable> {
    // cosets of H in N, with H itself first so the identity has index 0
    let mut cosets: Vec<BTreeSet<usize>> = vec![subgroup.clone()];
    let mut coset_of: BTreeMap<usize, usize> = BTreeMap::new();
    for &x in subgroup {
        coset_of.insert(x, 0);
    }
    for &n in normalizer {
        if coset_of.contains_key(&n) {
            continue;
        }
        let elements: BTreeSet<usize> = subgroup.iter().map(|&h| group.mul(n, h)).collect();
        let idx = cosets.len();
        cosets.push(elements.clone());
        for &x in &elements {
            coset_of.insert(x, idx);
        }
    }
    let representatives: Vec<usize> =
        cosets.iter().map(|c| *c.iter().next().expect("coset is nonempty")).collect();
    let table: Vec<Vec<usize>> = representatives
        .iter()
        .map(|&a| representatives.iter().map(|&b| coset_of[&group.mul(a, b)]).collect())
        .collect();
    let names = representatives
        .iter()
        .enumerate()
        .map(|(i, &r)| if i == 0 { "H".to_string() } else { format!("{}H", group.name(r)) })
        .collect();
    FiniteGroupTable::new(table, Some(names))
}

/// All conjugacy classes of subgroups, sorted by subgroup order and then
/// by the representative's element set. Fails above the order bound.
pub fn subgroup_conjugacy_classes(group: &FiniteGroupTable) -> Result<Vec<SubgroupClass>> {
    subgroup_conjugacy_classes_bounded(group, DEFAULT_SUBGROUP_ORDER_BOUND)
}

pub fn subgroup_conjugacy_classes_bounded(
    group: &FiniteGroupTable,
    order_bound: usize,
) -> Result<Vec<SubgroupClass>> {
    if group.order() > order_bound {
        return Err(Error::OrderBoundExceeded { order: group.order(), bound: order_bound });
    }
    let subgroups = all_subgroups(group);
    let mut assigned: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut classes = Vec::new();
    for h in &subgroups {
        if assigned.contains(h) {
            continue;
        }
        let mut conjugates: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        let mut normalizer: BTreeSet<usize> = BTreeSet::new();
        for g in 0..group.order() {
            let image = conjugate_subgroup(group, h, g);
            if &image == h {
                normalizer.insert(g);
            }
            conjugates.insert(image);
        }
        for c in &conjugates {
            assigned.insert(c.clone());
        }
        let representative = conjugates.iter().next().expect("class is nonempty").clone();
        // recompute the normalizer for the chosen representative
        let normalizer: BTreeSet<usize> = (0..group.order())
            .filter(|&g| conjugate_subgroup(group, &representative, g) == representative)
            .collect();
        let weyl = weyl_table(group, &representative, &normalizer)?;
        classes.push(SubgroupClass {
            representative: representative.iter().copied().collect(),
            conjugates: conjugates.into_iter().map(|c| c.into_iter().collect()).collect(),
            normalizer: normalizer.into_iter().collect(),
            weyl,
        });
    }
    classes.sort_by(|a, b| {
        (a.order(), &a.representative).cmp(&(b.order(), &b.representative))
    });
    Ok(classes)
}

/// Scenario-supplied data for one connected component of a fixed stratum.
#[derive(Clone, Debug)]
pub struct ComponentData {
    pub records: Vec<FixedPointRecord>,
    pub class_set: std::sync::Arc<crate::group::ReidemeisterClassSet>,
    pub action: ClassAction,
}

/// Trace, action, and reduction of one stratum component.
#[derive(Clone, Debug)]
pub struct ComponentInvariant {
    pub trace: Trace,
    pub action: ClassAction,
    pub reduced: ReducedTrace,
}

/// One subgroup-class summand of the assembled invariant.
#[derive(Clone, Debug)]
pub struct ClassInvariant {
    pub class_index: usize,
    pub label: String,
    pub components: Vec<ComponentInvariant>,
}

/// The assembled invariant: one summand per subgroup class, one entry per
/// stratum component.
#[derive(Clone, Debug)]
pub struct EquivariantInvariant {
    pub classes: Vec<ClassInvariant>,
}

/// Assembles the invariant from per-class component data (keyed by index
/// into `classes`). Indices must be orbit-constant within every component;
/// classes without data contribute empty summands.
pub fn assemble_equivariant_invariant(
    group: &FiniteGroupTable,
    classes: &[SubgroupClass],
    data: &BTreeMap<usize, Vec<ComponentData>>,
) -> Result<EquivariantInvariant> {
    for index in data.keys() {
        if *index >= classes.len() {
            return Err(Error::Invalid(format!(
                "subgroup class index {index} out of range ({} classes)",
                classes.len()
            )));
        }
    }
    let mut out = Vec::new();
    for (class_index, class) in classes.iter().enumerate() {
        let label = class.label(group);
        let mut components = Vec::new();
        if let Some(component_data) = data.get(&class_index) {
            for (component_index, component) in component_data.iter().enumerate() {
                let trace = reidemeister_trace(&component.records, &component.class_set)?;
                if !trace_orbit_constancy(&trace, &component.action)? {
                    return Err(Error::OrbitIndexInconsistency(format!(
                        "class {label}, component {component_index}: indices differ inside an orbit"
                    )));
                }
                let reduced = reduce_trace(&trace, &component.action)?;
                components.push(ComponentInvariant {
                    trace,
                    action: component.action.clone(),
                    reduced,
                });
            }
        }
        out.push(ClassInvariant { class_index, label, components });
    }
    Ok(EquivariantInvariant { classes: out })
}

/// Whether every reduced trace vanishes, along with the per-class list of
/// unreduced Nielsen numbers (one entry per stratum component).
pub fn invariant_vanishes(
    invariant: &EquivariantInvariant,
) -> (bool, BTreeMap<String, Vec<usize>>) {
    let mut vanishes = true;
    let mut per_class = BTreeMap::new();
    for class in &invariant.classes {
        let mut nielsen_numbers = Vec::new();
        for component in &class.components {
            nielsen_numbers.push(component.trace.nielsen_number());
            if !component.reduced.is_zero() {
                vanishes = false;
            }
        }
        per_class.insert(class.label.clone(), nielsen_numbers);
    }
    // orbit-constant data makes "reduced zero" and "trace zero" agree
    debug_assert_eq!(
        vanishes,
        invariant
            .classes
            .iter()
            .all(|c| c.components.iter().all(|comp| comp.trace.is_zero()))
    );
    (vanishes, per_class)
}

/// Dimension bookkeeping for one fixed stratum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapStratum {
    pub label: String,
    pub dim: i64,
    /// dim >= 3
    pub min_dim_ok: bool,
}

/// One proper inclusion `K < H` of isotropy classes: the H-stratum must
/// sit at codimension at least two inside the K-stratum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapCodim {
    pub sub: String,
    pub sup: String,
    pub dim_sub: i64,
    pub dim_sup: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    pub strata: Vec<GapStratum>,
    pub codim: Vec<GapCodim>,
    pub pass: bool,
}

/// Evaluates the dimension gap conditions from supplied stratum
/// dimensions and proper inclusions `(K, H)` with `K` a proper subgroup
/// of `H`.
pub fn gap_condition_report(
    dims: &BTreeMap<String, i64>,
    inclusions: &[(String, String)],
) -> Result<GapReport> {
    let strata: Vec<GapStratum> = dims
        .iter()
        .map(|(label, &dim)| GapStratum { label: label.clone(), dim, min_dim_ok: dim >= 3 })
        .collect();
    let mut codim = Vec::new();
    for (sub, sup) in inclusions {
        let dim_sub = *dims
            .get(sub)
            .ok_or_else(|| Error::Invalid(format!("unknown stratum {sub:?} in inclusion")))?;
        let dim_sup = *dims
            .get(sup)
            .ok_or_else(|| Error::Invalid(format!("unknown stratum {sup:?} in inclusion")))?;
        codim.push(GapCodim {
            sub: sub.clone(),
            sup: sup.clone(),
            dim_sub,
            dim_sup,
            ok: dim_sup <= dim_sub - 2,
        });
    }
    let pass = strata.iter().all(|s| s.min_dim_ok) && codim.iter().all(|c| c.ok);
    Ok(GapReport { strata, codim, pass })
}

/// The gap report for the period-`n` product construction over a base of
/// dimension `dim_m`: the stratum of the order-`k` subgroup has dimension
/// `(n/k) * dim_m`, and subgroups are nested by divisibility.
pub fn fuller_gap_report(dim_m: i64, n: u64) -> GapReport {
    let divisors = crate::fuller::divisors(n);
    let mut dims = BTreeMap::new();
    for &k in &divisors {
        dims.insert(format!("Z{k}"), (n / k) as i64 * dim_m);
    }
    let mut inclusions = Vec::new();
    for &l in &divisors {
        for &k in &divisors {
            if l != k && k % l == 0 {
                inclusions.push((format!("Z{l}"), format!("Z{k}")));
            }
        }
    }
    gap_condition_report(&dims, &inclusions).expect("labels are consistent by construction")
}
