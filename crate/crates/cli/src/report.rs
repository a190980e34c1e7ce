//! Deterministic reports: canonical JSON or a human table.
//!
//! Every number in a report is reproducible by re-running the named
//! operation on the echoed inputs. Maps are ordered, fields have a fixed
//! order, and nothing depends on wall-clock time, so identical inputs
//! produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use nielsen_core::group::{ClassStructure, ReidemeisterClassSet};
use nielsen_core::trace::{Exactness, ReducedTrace, Trace};

use crate::error::{CliError, Result};

#[derive(Serialize, Clone, Debug)]
pub struct Report {
    pub kind: String,
    pub inputs: Value,
    pub body: ReportBody,
    pub annotations: Vec<String>,
    pub oracle_checks: Vec<OracleCheck>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(untagged)]
pub enum ReportBody {
    Torus(TorusReport),
    Trace(TraceReport),
    Periodic(PeriodicReport),
    Equivariant(EquivariantReport),
    Gap(GapReportJson),
}

#[derive(Serialize, Clone, Debug)]
pub struct OracleCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct ClassSetSummary {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_factors: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_rank: Option<usize>,
}

#[derive(Serialize, Clone, Debug)]
pub struct TraceTerm {
    pub class: String,
    pub coefficient: i64,
}

#[derive(Serialize, Clone, Debug)]
pub struct OrbitTerm {
    pub representative: String,
    pub size: usize,
    pub coefficient: i64,
}

#[derive(Serialize, Clone, Debug)]
pub struct ReducedReport {
    pub orbits: Vec<OrbitTerm>,
    pub nonzero_terms: usize,
}

#[derive(Serialize, Clone, Debug)]
pub struct TraceReport {
    pub class_set: ClassSetSummary,
    pub terms: Vec<TraceTerm>,
    pub nielsen: usize,
    pub exactness: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_constancy: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedReport>,
}

#[derive(Serialize, Clone, Debug)]
pub struct TorusReport {
    pub dim: usize,
    pub determinant: i64,
    pub generic: bool,
    pub fixed_points: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic: Option<PeriodicReport>,
}

#[derive(Serialize, Clone, Debug)]
pub struct ComponentReport {
    pub l: u64,
    pub k: u64,
    pub trace: TraceReport,
    /// Number of nonzero reduced terms of this component.
    pub reduced_count: usize,
}

#[derive(Serialize, Clone, Debug)]
pub struct ComparisonRowJson {
    pub l: u64,
    pub reduced_count: usize,
    pub nielsen: usize,
    pub counts_equal: bool,
    pub biconditional_holds: bool,
}

#[derive(Serialize, Clone, Debug)]
pub struct ComparisonJson {
    pub rows: Vec<ComparisonRowJson>,
    pub all_biconditionals_hold: bool,
}

#[derive(Serialize, Clone, Debug)]
pub struct PeriodicReport {
    pub n: u64,
    pub components: Vec<ComponentReport>,
    pub comparison: ComparisonJson,
    pub vanishes: bool,
}

#[derive(Serialize, Clone, Debug)]
pub struct EquivariantClassReport {
    pub index: usize,
    pub label: String,
    pub subgroup_order: usize,
    pub conjugate_count: usize,
    pub weyl_order: usize,
    pub components: Vec<TraceReport>,
}

#[derive(Serialize, Clone, Debug)]
pub struct EquivariantReport {
    pub group_order: usize,
    pub classes: Vec<EquivariantClassReport>,
    pub vanishes: bool,
    pub per_class_nielsen: BTreeMap<String, Vec<usize>>,
}

#[derive(Serialize, Clone, Debug)]
pub struct GapStratumJson {
    pub label: String,
    pub dim: i64,
    pub min_dim_ok: bool,
}

#[derive(Serialize, Clone, Debug)]
pub struct GapCodimJson {
    pub sub: String,
    pub sup: String,
    pub dim_sub: i64,
    pub dim_sup: i64,
    pub ok: bool,
}

#[derive(Serialize, Clone, Debug)]
pub struct GapReportJson {
    pub strata: Vec<GapStratumJson>,
    pub codim: Vec<GapCodimJson>,
    pub pass: bool,
}

pub fn narrow(value: i128, what: &str) -> Result<i64> {
    i64::try_from(value)
        .map_err(|_| CliError::Input(format!("{what} = {value} exceeds the report range")))
}

pub fn exactness_label(e: Exactness) -> String {
    match e {
        Exactness::Exact => "exact".to_string(),
        Exactness::WithinRadius => "within-radius".to_string(),
    }
}

pub fn summarize_class_set(set: &ReidemeisterClassSet) -> Result<ClassSetSummary> {
    Ok(match set.structure() {
        ClassStructure::FiniteClasses(ids) => ClassSetSummary {
            kind: "finite".into(),
            class_count: Some(ids.len()),
            invariant_factors: None,
            free_rank: None,
        },
        ClassStructure::InfiniteWithStructure { invariant_factors, free_rank } => {
            let factors = invariant_factors
                .iter()
                .map(|&f| narrow(f, "invariant factor"))
                .collect::<Result<Vec<_>>>()?;
            ClassSetSummary {
                kind: "infinite".into(),
                class_count: None,
                invariant_factors: Some(factors),
                free_rank: Some(*free_rank),
            }
        }
        ClassStructure::SemiDecided(ids) => ClassSetSummary {
            kind: "semi-decided".into(),
            class_count: Some(ids.len()),
            invariant_factors: None,
            free_rank: None,
        },
    })
}

pub fn trace_report(
    trace: &Trace,
    reduced: Option<&ReducedTrace>,
    orbit_constancy: Option<bool>,
) -> Result<TraceReport> {
    let set = trace.class_set();
    let terms = trace
        .coefficients()
        .iter()
        .map(|(id, &coefficient)| TraceTerm { class: set.display_class(id), coefficient })
        .collect();
    let reduced = match reduced {
        None => None,
        Some(r) => {
            let orbits = r
                .orbit_coefficients()
                .iter()
                .map(|(id, &coefficient)| OrbitTerm {
                    representative: set.display_class(id),
                    size: r.orbit_sizes()[id],
                    coefficient,
                })
                .collect();
            Some(ReducedReport { orbits, nonzero_terms: r.nonzero_terms() })
        }
    };
    Ok(TraceReport {
        class_set: summarize_class_set(set)?,
        terms,
        nielsen: trace.nielsen_number(),
        exactness: exactness_label(trace.exactness()),
        orbit_constancy,
        reduced,
    })
}

impl Report {
    /// Canonical JSON: object keys sorted, struct fields in declaration
    /// order, one trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("reports serialize");
        out.push('\n');
        out
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.kind);
        match &self.body {
            ReportBody::Torus(t) => render_torus(&mut out, t),
            ReportBody::Trace(t) => render_trace(&mut out, t, 0),
            ReportBody::Periodic(p) => render_periodic(&mut out, p),
            ReportBody::Equivariant(e) => render_equivariant(&mut out, e),
            ReportBody::Gap(g) => render_gap(&mut out, g),
        }
        if !self.oracle_checks.is_empty() {
            let _ = writeln!(out, "oracle checks:");
            for check in &self.oracle_checks {
                let verdict = if check.pass { "pass" } else { "FAIL" };
                let _ = writeln!(out, "  [{verdict}] {}: {}", check.name, check.detail);
            }
        }
        for note in &self.annotations {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render_trace(out: &mut String, t: &TraceReport, depth: usize) {
    indent(out, depth);
    let set = &t.class_set;
    let mut set_desc = set.kind.clone();
    if let Some(count) = set.class_count {
        let _ = write!(set_desc, " ({count} classes)");
    }
    if let Some(rank) = set.free_rank {
        let factors = set
            .invariant_factors
            .as_ref()
            .map(|f| format!("{f:?}"))
            .unwrap_or_else(|| "[]".into());
        let _ = write!(set_desc, " (free rank {rank}, torsion {factors})");
    }
    let _ = writeln!(out, "class set: {set_desc}");
    indent(out, depth);
    if t.terms.is_empty() {
        let _ = writeln!(out, "R = 0");
    } else {
        let terms: Vec<String> = t
            .terms
            .iter()
            .map(|term| match term.coefficient {
                1 => term.class.clone(),
                -1 => format!("-{}", term.class),
                c => format!("{c}*{}", term.class),
            })
            .collect();
        let _ = writeln!(out, "R = {}", terms.join(" + "));
    }
    indent(out, depth);
    let _ = writeln!(out, "N = {}  ({})", t.nielsen, t.exactness);
    if let Some(constant) = t.orbit_constancy {
        indent(out, depth);
        let _ = writeln!(out, "orbit-constant indices: {constant}");
    }
    if let Some(reduced) = &t.reduced {
        indent(out, depth);
        if reduced.orbits.is_empty() {
            let _ = writeln!(out, "reduced: 0  (0 orbit terms)");
        } else {
            let orbits: Vec<String> = reduced
                .orbits
                .iter()
                .map(|o| format!("{}*{}(size {})", o.coefficient, o.representative, o.size))
                .collect();
            let _ = writeln!(
                out,
                "reduced: {}  ({} orbit terms)",
                orbits.join(" + "),
                reduced.nonzero_terms
            );
        }
    }
}

fn render_torus(out: &mut String, t: &TorusReport) {
    let _ = writeln!(out, "dimension: {}", t.dim);
    let _ = writeln!(out, "det(I - A) = {}", t.determinant);
    let _ = writeln!(out, "generic: {}", t.generic);
    if t.generic {
        let _ = writeln!(out, "fixed points ({}): {}", t.fixed_points.len(), t.fixed_points.join(" "));
    }
    if let Some(trace) = &t.trace {
        render_trace(out, trace, 1);
    }
    if let Some(periodic) = &t.periodic {
        render_periodic(out, periodic);
    }
}

fn render_periodic(out: &mut String, p: &PeriodicReport) {
    let _ = writeln!(out, "period n = {}", p.n);
    for component in &p.components {
        let _ = writeln!(out, "component l={} (k={}):", component.l, component.k);
        render_trace(out, &component.trace, 1);
    }
    let _ = writeln!(out, "divisor table:");
    let _ = writeln!(out, "  l    N(f^l)   reduced terms   equal   vanish-iff");
    for row in &p.comparison.rows {
        let _ = writeln!(
            out,
            "  {:<4} {:<8} {:<15} {:<7} {}",
            row.l, row.nielsen, row.reduced_count, row.counts_equal, row.biconditional_holds
        );
    }
    let _ = writeln!(out, "all vanish-iff rows hold: {}", p.comparison.all_biconditionals_hold);
    let _ = writeln!(out, "obstruction vanishes: {}", p.vanishes);
}

fn render_equivariant(out: &mut String, e: &EquivariantReport) {
    let _ = writeln!(out, "group order: {}", e.group_order);
    for class in &e.classes {
        let _ = writeln!(
            out,
            "class {} {} (order {}, {} conjugates, Weyl order {}):",
            class.index, class.label, class.subgroup_order, class.conjugate_count, class.weyl_order
        );
        if class.components.is_empty() {
            let _ = writeln!(out, "  (no stratum data)");
        }
        for component in &class.components {
            render_trace(out, component, 1);
        }
    }
    let _ = writeln!(out, "invariant vanishes: {}", e.vanishes);
}

fn render_gap(out: &mut String, g: &GapReportJson) {
    let _ = writeln!(out, "strata:");
    for s in &g.strata {
        let verdict = if s.min_dim_ok { "ok" } else { "FAIL" };
        let _ = writeln!(out, "  {:<8} dim {:<4} min-dim {}", s.label, s.dim, verdict);
    }
    if !g.codim.is_empty() {
        let _ = writeln!(out, "codimension checks (K < H needs dim H <= dim K - 2):");
        for c in &g.codim {
            let verdict = if c.ok { "ok" } else { "FAIL" };
            let _ = writeln!(
                out,
                "  {} < {}: dim {} vs {}  {}",
                c.sub, c.sup, c.dim_sup, c.dim_sub, verdict
            );
        }
    }
    let _ = writeln!(out, "gap conditions pass: {}", g.pass);
}
