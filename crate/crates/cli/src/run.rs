//! Scenario execution: dispatches parsed scenarios to the library and
//! assembles deterministic reports with inline oracle checks.

use std::collections::BTreeMap;

use nielsen_core::equivariant::{
    assemble_equivariant_invariant, fuller_gap_report, gap_condition_report, invariant_vanishes,
    subgroup_conjugacy_classes_bounded, ComponentData, DEFAULT_SUBGROUP_ORDER_BOUND,
};
use nielsen_core::fuller::{
    conjecture_comparison, divisors, periodic_obstruction_presentation, periodic_obstruction_torus,
    ComponentInput, ConjectureComparison, PeriodicObstruction,
};
use nielsen_core::group::FiniteGroupTable;
use nielsen_core::torus::{format_point, torus_class_bijection_check, torus_fixed_points, TorusMap};
use nielsen_core::trace::{
    reduce_trace, reidemeister_trace, trace_orbit_constancy, vanishing_equivalence, ClassAction,
    Exactness,
};
use nielsen_core::IntMatrix;

use crate::error::{CliError, Result};
use crate::report::*;
use crate::scenario::{build_class_data, build_finite_group, Scenario};

const COINVARIANT_NOTE: &str = "reduced orbit coefficients carry the orbit-size factor \
(coefficient = |orbit| x common index); a convention printing one unit per orbit would list \
the same nonzero-term counts";

const RADIUS_NOTE: &str = "free-model class resolutions are sound within the search radius; \
classes reported as distinct could merge under longer conjugators";

/// Runs a validated scenario to a deterministic report.
pub fn run(scenario: &Scenario) -> Result<Report> {
    let inputs = scenario.canonical_value();
    let mut annotations: Vec<String> = Vec::new();
    let mut checks: Vec<OracleCheck> = Vec::new();
    let body = match scenario {
        Scenario::Torus { matrix, n } => {
            ReportBody::Torus(run_torus(matrix, *n, &mut annotations, &mut checks)?)
        }
        Scenario::Presentation { data } => {
            ReportBody::Trace(run_presentation(data, &mut annotations, &mut checks)?)
        }
        Scenario::Periodic { n, components } => ReportBody::Periodic(run_periodic(
            *n,
            components,
            &mut annotations,
            &mut checks,
        )?),
        Scenario::Equivariant { group, order_bound, data } => ReportBody::Equivariant(
            run_equivariant(group, *order_bound, data, &mut annotations, &mut checks)?,
        ),
        Scenario::Gap { strata, inclusions, fuller } => {
            ReportBody::Gap(run_gap(strata.as_ref(), inclusions.as_deref(), fuller.as_ref())?)
        }
    };
    Ok(Report { kind: scenario.kind().to_string(), inputs, body, annotations, oracle_checks: checks })
}

fn note_exactness(annotations: &mut Vec<String>, exactness: Exactness) {
    if exactness == Exactness::WithinRadius && !annotations.iter().any(|a| a == RADIUS_NOTE) {
        annotations.push(RADIUS_NOTE.to_string());
    }
}

fn note_coinvariants(annotations: &mut Vec<String>, reduced: &nielsen_core::trace::ReducedTrace) {
    if reduced.orbit_sizes().values().any(|&s| s > 1)
        && !annotations.iter().any(|a| a == COINVARIANT_NOTE)
    {
        annotations.push(COINVARIANT_NOTE.to_string());
    }
}

fn run_torus(
    matrix: &[Vec<i64>],
    n: Option<u64>,
    annotations: &mut Vec<String>,
    checks: &mut Vec<OracleCheck>,
) -> Result<TorusReport> {
    let map = TorusMap::new(IntMatrix::from_rows(matrix)?)?;
    let determinant = narrow(map.fixed_point_determinant(), "det(I - A)")?;
    let generic = map.is_generic();
    let fixed = torus_fixed_points(&map);
    let fixed_points: Vec<String> = fixed.points.iter().map(|p| format_point(p)).collect();

    let trace = if generic {
        let (trace, nielsen) = nielsen_core::torus::torus_trace(&map)?;
        let bijective = torus_class_bijection_check(&map)?;
        let counts_agree = fixed.points.len() == nielsen
            && nielsen == determinant.unsigned_abs() as usize;
        checks.push(OracleCheck {
            name: "point-class-bijection".into(),
            pass: bijective,
            detail: format!("{} fixed points onto {} classes", fixed.points.len(), nielsen),
        });
        checks.push(OracleCheck {
            name: "counts-match-determinant".into(),
            pass: counts_agree,
            detail: format!(
                "|Fix| = {}, N = {nielsen}, |det(I - A)| = {}",
                fixed.points.len(),
                determinant.unsigned_abs()
            ),
        });
        Some(trace_report(&trace, None, None)?)
    } else {
        None
    };

    let periodic = match n {
        None => None,
        Some(n) => {
            let obstruction = periodic_obstruction_torus(&map, n)?;
            // independent Nielsen numbers straight from determinants
            let mut nielsen_numbers = BTreeMap::new();
            for l in divisors(n) {
                let det = nielsen_core::torus::torus_iterate(&map, l).fixed_point_determinant();
                nielsen_numbers.insert(l, det.unsigned_abs() as usize);
            }
            let comparison = conjecture_comparison(&obstruction, &nielsen_numbers)?;
            checks.push(OracleCheck {
                name: "vanish-iff-biconditional".into(),
                pass: comparison.all_biconditionals_hold,
                detail: "reduced term count vanishes iff |det(I - A^l)| does, per divisor".into(),
            });
            Some(periodic_report(&obstruction, &comparison, annotations)?)
        }
    };

    Ok(TorusReport { dim: map.dim(), determinant, generic, fixed_points, trace, periodic })
}

fn run_presentation(
    data: &crate::scenario::ClassDataJson,
    annotations: &mut Vec<String>,
    checks: &mut Vec<OracleCheck>,
) -> Result<TraceReport> {
    let core = build_class_data(data)?;
    let trace = reidemeister_trace(&core.records, &core.class_set)?;
    note_exactness(annotations, trace.exactness());
    let (reduced, constancy) = match &core.action {
        None => (None, None),
        Some(action) => {
            let constancy = trace_orbit_constancy(&trace, action)?;
            let reduced = reduce_trace(&trace, action)?;
            note_coinvariants(annotations, &reduced);
            checks.push(OracleCheck {
                name: "vanishing-equivalence".into(),
                pass: vanishing_equivalence(&trace, action)?,
                detail: format!(
                    "trace {} zero, reduction {} zero",
                    if trace.is_zero() { "is" } else { "is not" },
                    if reduced.is_zero() { "is" } else { "is not" }
                ),
            });
            (Some(reduced), Some(constancy))
        }
    };
    trace_report(&trace, reduced.as_ref(), constancy)
}

fn run_periodic(
    n: u64,
    components: &[crate::scenario::PeriodicComponentJson],
    annotations: &mut Vec<String>,
    checks: &mut Vec<OracleCheck>,
) -> Result<PeriodicReport> {
    let mut inputs: BTreeMap<u64, ComponentInput> = BTreeMap::new();
    for component in components {
        let core = build_class_data(&component.data)?;
        let action = match core.action {
            Some(action) => action,
            None if component.l == 1 => {
                let ids = core.class_set.known_ids().to_vec();
                ClassAction::trivial(FiniteGroupTable::cyclic(1), &ids)
            }
            None => {
                return Err(CliError::Input(format!(
                    "component l={} needs an action (the residual cyclic group of order {} \
                     acts on its classes)",
                    component.l, component.l
                )))
            }
        };
        inputs.insert(
            component.l,
            ComponentInput { class_set: core.class_set, records: core.records, action },
        );
    }
    let obstruction = periodic_obstruction_presentation(n, &inputs)?;

    // Nielsen numbers of the iterates, read from the unreduced traces.
    let nielsen_numbers: BTreeMap<u64, usize> =
        obstruction.components.iter().map(|c| (c.l, c.nielsen())).collect();
    let comparison = conjecture_comparison(&obstruction, &nielsen_numbers)?;

    for component in &obstruction.components {
        let constant = trace_orbit_constancy(&component.trace, &component.action)?;
        checks.push(OracleCheck {
            name: format!("orbit-constancy-l{}", component.l),
            pass: constant,
            detail: "indices agree along every class orbit".into(),
        });
        checks.push(OracleCheck {
            name: format!("vanishing-equivalence-l{}", component.l),
            pass: vanishing_equivalence(&component.trace, &component.action)?,
            detail: "trace vanishes iff its reduction does".into(),
        });
    }
    checks.push(OracleCheck {
        name: "vanish-iff-biconditional".into(),
        pass: comparison.all_biconditionals_hold,
        detail: "reduced term count vanishes iff the iterate's Nielsen number does".into(),
    });
    periodic_report(&obstruction, &comparison, annotations)
}

fn periodic_report(
    obstruction: &PeriodicObstruction,
    comparison: &ConjectureComparison,
    annotations: &mut Vec<String>,
) -> Result<PeriodicReport> {
    let mut components = Vec::new();
    for component in &obstruction.components {
        note_exactness(annotations, component.trace.exactness());
        note_coinvariants(annotations, &component.reduced);
        components.push(ComponentReport {
            l: component.l,
            k: component.k,
            trace: trace_report(&component.trace, Some(&component.reduced), None)?,
            reduced_count: component.count,
        });
    }
    let rows = comparison
        .rows
        .iter()
        .map(|r| ComparisonRowJson {
            l: r.l,
            reduced_count: r.reduced_count,
            nielsen: r.nielsen,
            counts_equal: r.counts_equal,
            biconditional_holds: r.biconditional_holds,
        })
        .collect();
    Ok(PeriodicReport {
        n: obstruction.n,
        components,
        comparison: ComparisonJson {
            rows,
            all_biconditionals_hold: comparison.all_biconditionals_hold,
        },
        vanishes: obstruction.vanishes(),
    })
}

fn run_equivariant(
    group_json: &crate::scenario::FiniteGroupJson,
    order_bound: Option<usize>,
    data: &[crate::scenario::EquivariantClassJson],
    annotations: &mut Vec<String>,
    checks: &mut Vec<OracleCheck>,
) -> Result<EquivariantReport> {
    let group = build_finite_group(group_json)?;
    let bound = order_bound.unwrap_or(DEFAULT_SUBGROUP_ORDER_BOUND);
    let classes = subgroup_conjugacy_classes_bounded(&group, bound)?;

    let mut class_data: BTreeMap<usize, Vec<ComponentData>> = BTreeMap::new();
    for entry in data {
        if entry.class >= classes.len() {
            return Err(CliError::Input(format!(
                "subgroup class index {} out of range (the lattice has {} classes)",
                entry.class,
                classes.len()
            )));
        }
        let mut components = Vec::new();
        for component in &entry.components {
            let core = build_class_data(component)?;
            let action = match core.action {
                Some(action) => action,
                None => {
                    let ids = core.class_set.known_ids().to_vec();
                    ClassAction::trivial(FiniteGroupTable::cyclic(1), &ids)
                }
            };
            components.push(ComponentData {
                records: core.records,
                class_set: core.class_set,
                action,
            });
        }
        class_data.insert(entry.class, components);
    }

    let invariant = assemble_equivariant_invariant(&group, &classes, &class_data)?;
    let (vanishes, per_class_nielsen) = invariant_vanishes(&invariant);

    let mut class_reports = Vec::new();
    for (class, assembled) in classes.iter().zip(&invariant.classes) {
        let mut component_reports = Vec::new();
        for component in &assembled.components {
            note_exactness(annotations, component.trace.exactness());
            note_coinvariants(annotations, &component.reduced);
            checks.push(OracleCheck {
                name: format!("vanishing-equivalence-{}", assembled.label),
                pass: component.trace.is_zero() == component.reduced.is_zero(),
                detail: "summand trace vanishes iff its reduction does".into(),
            });
            component_reports.push(trace_report(
                &component.trace,
                Some(&component.reduced),
                Some(true),
            )?);
        }
        class_reports.push(EquivariantClassReport {
            index: assembled.class_index,
            label: assembled.label.clone(),
            subgroup_order: class.order(),
            conjugate_count: class.conjugates.len(),
            weyl_order: class.weyl.order(),
            components: component_reports,
        });
    }

    Ok(EquivariantReport {
        group_order: group.order(),
        classes: class_reports,
        vanishes,
        per_class_nielsen,
    })
}

fn run_gap(
    strata: Option<&BTreeMap<String, i64>>,
    inclusions: Option<&[(String, String)]>,
    fuller: Option<&crate::scenario::FullerGapJson>,
) -> Result<GapReportJson> {
    let report = match fuller {
        Some(f) => fuller_gap_report(f.dim_m, f.n),
        None => {
            let dims = strata.expect("validated: strata present without fuller");
            gap_condition_report(dims, inclusions.unwrap_or(&[]))?
        }
    };
    Ok(GapReportJson {
        strata: report
            .strata
            .iter()
            .map(|s| GapStratumJson { label: s.label.clone(), dim: s.dim, min_dim_ok: s.min_dim_ok })
            .collect(),
        codim: report
            .codim
            .iter()
            .map(|c| GapCodimJson {
                sub: c.sub.clone(),
                sup: c.sup.clone(),
                dim_sub: c.dim_sub,
                dim_sup: c.dim_sup,
                ok: c.ok,
            })
            .collect(),
        pass: report.pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn torus_run_with_period() {
        let scenario =
            parse_scenario(r#"{"kind":"torus","matrix":[[2]],"n":2}"#).unwrap();
        let report = run(&scenario).unwrap();
        let ReportBody::Torus(torus) = &report.body else { panic!("wrong body") };
        assert_eq!(torus.determinant, -1);
        let periodic = torus.periodic.as_ref().unwrap();
        let counts: Vec<(u64, usize, usize)> = periodic
            .comparison
            .rows
            .iter()
            .map(|r| (r.l, r.reduced_count, r.nielsen))
            .collect();
        assert_eq!(counts, vec![(1, 1, 1), (2, 2, 3)]);
        assert!(periodic.comparison.all_biconditionals_hold);
        assert!(report.oracle_checks.iter().all(|c| c.pass));
    }

    #[test]
    fn degenerate_iterate_is_an_input_error() {
        let scenario =
            parse_scenario(r#"{"kind":"torus","matrix":[[0,-1],[1,0]],"n":4}"#).unwrap();
        let err = run(&scenario).unwrap_err();
        assert!(err.to_string().contains("A^4"), "got: {err}");
    }

    #[test]
    fn nongeneric_torus_is_reported_not_an_error() {
        let scenario = parse_scenario(r#"{"kind":"torus","matrix":[[1,0],[0,1]]}"#).unwrap();
        let report = run(&scenario).unwrap();
        let ReportBody::Torus(torus) = &report.body else { panic!("wrong body") };
        assert!(!torus.generic);
        assert!(torus.trace.is_none());
    }

    #[test]
    fn gap_run() {
        let scenario = parse_scenario(r#"{"kind":"gap","fuller":{"dim_m":2,"n":2}}"#).unwrap();
        let report = run(&scenario).unwrap();
        let ReportBody::Gap(gap) = &report.body else { panic!("wrong body") };
        assert!(!gap.pass);
    }

    #[test]
    fn determinism_byte_for_byte() {
        let text = r#"{"kind":"torus","matrix":[[0,-1],[1,0]],"n":2}"#;
        let a = run(&parse_scenario(text).unwrap()).unwrap().to_json();
        let b = run(&parse_scenario(text).unwrap()).unwrap().to_json();
        assert_eq!(a, b);
    }

    /// The echoed inputs are themselves a runnable scenario yielding the
    /// same report.
    #[test]
    fn reports_reproducible_from_their_echo() {
        for fixture in crate::fixtures::FIXTURES {
            let scenario = parse_scenario(fixture.text).unwrap();
            let report = run(&scenario).unwrap();
            let echoed = serde_json::to_string(&report.inputs).unwrap();
            let rerun = run(&parse_scenario(&echoed).unwrap()).unwrap();
            assert_eq!(report.to_json(), rerun.to_json(), "fixture {}", fixture.name);
        }
    }
}
