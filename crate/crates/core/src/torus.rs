//! Integer-matrix self-maps of the torus: the fully computable model.
//!
//! A square integer matrix `A` induces `x -> A x mod 1` on the m-torus.
//! When `det(I - A)` is nonzero the map is generic: its fixed points are
//! the rational points `(I - A)^{-1} v mod 1` over coset representatives
//! `v` of `(I - A) Z^m`, each carrying index `sign det(I - A)`, and they
//! biject with the twisted conjugacy classes of `(Z^m, A)`. Everything
//! downstream can therefore be cross-checked here by brute force.

use std::sync::Arc;

use num::rational::Ratio;

use crate::group::{reidemeister_classes, Endomorphism, ExtraRelations, GroupModel, GroupWord};
use crate::matrix::{smith_normal_form, IntMatrix};
use crate::trace::{reidemeister_trace, FixedPointRecord, Trace};
use crate::{Error, Result};

pub type RationalCoord = Ratio<i128>;

/// The self-map `x -> A x mod 1` of the m-torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusMap {
    dim: usize,
    matrix: IntMatrix,
}

impl TorusMap {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::Shape("a torus map needs a nonempty square matrix".into()));
        }
        Ok(TorusMap { dim: matrix.rows(), matrix })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        TorusMap::new(IntMatrix::from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// `det(I - A)`, the genericity certificate.
    pub fn fixed_point_determinant(&self) -> i128 {
        IntMatrix::identity(self.dim).sub(&self.matrix).det()
    }

    pub fn is_generic(&self) -> bool {
        self.fixed_point_determinant() != 0
    }

    /// Applies the map to an exact point of `[0,1)^m`.
    pub fn apply(&self, point: &[RationalCoord]) -> Vec<RationalCoord> {
        assert_eq!(point.len(), self.dim, "apply: dimension mismatch");
        (0..self.dim)
            .map(|r| {
                let total: RationalCoord = (0..self.dim)
                    .map(|c| Ratio::from_integer(self.matrix.get(r, c)) * point[c])
                    .sum();
                fract(total)
            })
            .collect()
    }
}

fn fract(x: RationalCoord) -> RationalCoord {
    x - x.floor()
}

/// The complete fixed point set, or the non-generic marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusFixedPoints {
    pub genericity: bool,
    pub points: Vec<Vec<RationalCoord>>,
}

/// All fixed points of a generic torus map, sorted; non-generic maps get
/// `genericity: false` and no points.
pub fn torus_fixed_points(map: &TorusMap) -> TorusFixedPoints {
    let m = map.dim();
    let difference = IntMatrix::identity(m).sub(map.matrix());
    let snf = smith_normal_form(&difference);
    let diagonal = snf.diagonal();
    if diagonal.contains(&0) {
        return TorusFixedPoints { genericity: false, points: Vec::new() };
    }
    let mut points = Vec::new();
    let mut coords = vec![0i128; m];
    'enumerate: loop {
        // Smith coordinates c of the coset give the point p = V D^-1 c
        // mod 1; distinct cosets yield distinct points.
        let y: Vec<RationalCoord> =
            coords.iter().zip(&diagonal).map(|(&num, &den)| Ratio::new(num, den)).collect();
        let point: Vec<RationalCoord> = (0..m)
            .map(|r| {
                let total: RationalCoord =
                    (0..m).map(|c| Ratio::from_integer(snf.v.get(r, c)) * y[c]).sum();
                fract(total)
            })
            .collect();
        points.push(point);
        for i in (0..m).rev() {
            coords[i] += 1;
            if coords[i] < diagonal[i] {
                continue 'enumerate;
            }
            coords[i] = 0;
        }
        break;
    }
    points.sort();
    TorusFixedPoints { genericity: true, points }
}

/// The class coordinate of a fixed point: the integer vector `(I - A) p`.
pub fn point_class_word(map: &TorusMap, point: &[RationalCoord]) -> Result<GroupWord> {
    let m = map.dim();
    let difference = IntMatrix::identity(m).sub(map.matrix());
    let mut out = Vec::with_capacity(m);
    for r in 0..m {
        let total: RationalCoord =
            (0..m).map(|c| Ratio::from_integer(difference.get(r, c)) * point[c]).sum();
        if !total.is_integer() {
            return Err(Error::Invalid(format!(
                "point coordinate {total} is not fixed by the map"
            )));
        }
        out.push(total.to_integer() as i64);
    }
    Ok(GroupWord::Vector(out))
}

pub fn format_point(point: &[RationalCoord]) -> String {
    let coords: Vec<String> = point.iter().map(|x| x.to_string()).collect();
    format!("({})", coords.join(","))
}

/// Fixed point records of a generic torus map: one per point, all with
/// index `sign det(I - A)` and the coset coordinate as class word.
pub fn fixed_point_records(map: &TorusMap) -> Result<Vec<FixedPointRecord>> {
    let det = map.fixed_point_determinant();
    if det == 0 {
        return Err(Error::Degenerate);
    }
    let sign = det.signum() as i64;
    let fixed = torus_fixed_points(map);
    fixed
        .points
        .iter()
        .map(|p| Ok(FixedPointRecord::new(format_point(p), sign, point_class_word(map, p)?)))
        .collect()
}

/// The trace of a generic torus map over `coker(I - A)` together with its
/// Nielsen number `|det(I - A)|`.
pub fn torus_trace(map: &TorusMap) -> Result<(Trace, usize)> {
    let class_set = torus_class_set(map)?;
    let records = fixed_point_records(map)?;
    let trace = reidemeister_trace(&records, &class_set)?;
    let nielsen = trace.nielsen_number();
    Ok((trace, nielsen))
}

/// The twisted conjugacy class set of `(Z^m, A)`.
pub fn torus_class_set(map: &TorusMap) -> Result<Arc<crate::group::ReidemeisterClassSet>> {
    let model = GroupModel::FreeAbelian { rank: map.dim() };
    let phi = Endomorphism::Matrix(map.matrix().clone());
    Ok(Arc::new(reidemeister_classes(&model, &phi, ExtraRelations::TwistedOnly)?))
}

/// The l-fold iterate `x -> A^l x mod 1`.
pub fn torus_iterate(map: &TorusMap, l: u64) -> TorusMap {
    assert!(l >= 1, "torus_iterate: l must be positive");
    TorusMap { dim: map.dim(), matrix: map.matrix().pow(l) }
}

/// Checks that fixed points inject onto the full class set through their
/// class words: the oracle behind "points biject with classes".
pub fn torus_class_bijection_check(map: &TorusMap) -> Result<bool> {
    if !map.is_generic() {
        return Err(Error::Degenerate);
    }
    let class_set = torus_class_set(map)?;
    let records = fixed_point_records(map)?;
    let mut seen = std::collections::BTreeSet::new();
    for record in &records {
        let outcome = class_set.class_of(&record.class_word)?;
        if !seen.insert(outcome.id().clone()) {
            return Ok(false); // two points in one class
        }
    }
    Ok(class_set.class_count() == Some(seen.len()))
}
