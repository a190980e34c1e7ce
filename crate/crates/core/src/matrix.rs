//! Dense integer matrices with exact arithmetic.
//!
//! Determinants use fraction-free (Bareiss) elimination and the Smith
//! normal form comes with all four unimodular transforms, so cokernels of
//! integer matrices can be read off exactly. Entries are `i128`; inputs at
//! the scales this crate targets stay far away from overflow.

use std::fmt;

use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must have equal length;
    /// an empty slice yields the 0x0 matrix.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape(format!(
                    "ragged rows: expected {} columns, found {}",
                    c,
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&x| x as i128));
        }
        Ok(IntMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: i128) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row_entries(&self, r: usize) -> &[i128] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn add(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> IntMatrix {
        let data = self.data.iter().map(|a| -a).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "mul: inner dimensions disagree");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = out.get(r, c) + a * rhs.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[i128]) -> Vec<i128> {
        assert_eq!(self.cols, v.len(), "matvec: dimension mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    pub fn pow(&self, e: u64) -> IntMatrix {
        assert!(self.is_square(), "pow: matrix must be square");
        let mut out = IntMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Exact determinant by fraction-free elimination. The 0x0 matrix has
    /// determinant 1.
    pub fn det(&self) -> i128 {
        assert!(self.is_square(), "det: matrix must be square");
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a = self.data.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                let pivot = (k + 1..n).find(|&i| a[i * n + k] != 0);
                match pivot {
                    Some(p) => {
                        for j in 0..n {
                            a.swap(k * n + j, p * n + j);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    // Bareiss update: the division is exact.
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
                a[i * n + k] = 0;
            }
            prev = a[k * n + k];
        }
        sign * a[(n - 1) * n + (n - 1)]
    }

    /// Solves `self * x = b` over the integers, if a solution exists.
    pub fn solve_integer(&self, b: &[i128]) -> Option<Vec<i128>> {
        assert_eq!(self.rows, b.len(), "solve_integer: dimension mismatch");
        let snf = smith_normal_form(self);
        let ub = snf.u.matvec(b);
        let mut y = vec![0i128; self.cols];
        let k = self.rows.min(self.cols);
        for i in 0..self.rows {
            let d = if i < k { snf.d.get(i, i) } else { 0 };
            if d == 0 {
                if ub[i] != 0 {
                    return None;
                }
            } else {
                if ub[i] % d != 0 {
                    return None;
                }
                y[i] = ub[i] / d;
            }
        }
        Some(snf.v.matvec(&y))
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}", self)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}

/// Smith normal form `u * m * v = d` together with the inverses of the
/// unimodular transforms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithDecomposition {
    /// Nonzero diagonal entries d1 | d2 | ...
    pub fn invariant_factors(&self) -> Vec<i128> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d.get(i, i)).filter(|&x| x != 0).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }

    /// Diagonal of `d` padded with zeros to the full column count.
    pub fn diagonal(&self) -> Vec<i128> {
        (0..self.d.cols())
            .map(|i| if i < self.d.rows() { self.d.get(i, i) } else { 0 })
            .collect()
    }
}

struct SnfWork {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl SnfWork {
    fn row_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.a.cols {
            self.a.data.swap(i * self.a.cols + c, j * self.a.cols + c);
        }
        for c in 0..self.u.cols {
            self.u.data.swap(i * self.u.cols + c, j * self.u.cols + c);
        }
        for r in 0..self.u_inv.rows {
            self.u_inv.data.swap(r * self.u_inv.cols + i, r * self.u_inv.cols + j);
        }
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.a.rows {
            self.a.data.swap(r * self.a.cols + i, r * self.a.cols + j);
        }
        for r in 0..self.v.rows {
            self.v.data.swap(r * self.v.cols + i, r * self.v.cols + j);
        }
        for c in 0..self.v_inv.cols {
            self.v_inv.data.swap(i * self.v_inv.cols + c, j * self.v_inv.cols + c);
        }
    }

    /// row_dst += q * row_src
    fn row_addmul(&mut self, dst: usize, src: usize, q: i128) {
        if q == 0 {
            return;
        }
        for c in 0..self.a.cols {
            let v = self.a.get(dst, c) + q * self.a.get(src, c);
            self.a.set(dst, c, v);
        }
        for c in 0..self.u.cols {
            let v = self.u.get(dst, c) + q * self.u.get(src, c);
            self.u.set(dst, c, v);
        }
        // inverse picks up the opposite column operation
        for r in 0..self.u_inv.rows {
            let v = self.u_inv.get(r, src) - q * self.u_inv.get(r, dst);
            self.u_inv.set(r, src, v);
        }
    }

    /// col_dst += q * col_src
    fn col_addmul(&mut self, dst: usize, src: usize, q: i128) {
        if q == 0 {
            return;
        }
        for r in 0..self.a.rows {
            let v = self.a.get(r, dst) + q * self.a.get(r, src);
            self.a.set(r, dst, v);
        }
        for r in 0..self.v.rows {
            let v = self.v.get(r, dst) + q * self.v.get(r, src);
            self.v.set(r, dst, v);
        }
        for c in 0..self.v_inv.cols {
            let v = self.v_inv.get(src, c) - q * self.v_inv.get(dst, c);
            self.v_inv.set(src, c, v);
        }
    }

    fn row_negate(&mut self, i: usize) {
        for c in 0..self.a.cols {
            let v = -self.a.get(i, c);
            self.a.set(i, c, v);
        }
        for c in 0..self.u.cols {
            let v = -self.u.get(i, c);
            self.u.set(i, c, v);
        }
        for r in 0..self.u_inv.rows {
            let v = -self.u_inv.get(r, i);
            self.u_inv.set(r, i, v);
        }
    }
}

/// Smith normal form of an arbitrary integer matrix: returns unimodular
/// `u`, `v` with `u * m * v = d`, `d` diagonal, nonnegative, and each
/// diagonal entry dividing the next.
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let rows = m.rows();
    let cols = m.cols();
    let mut w = SnfWork {
        a: m.clone(),
        u: IntMatrix::identity(rows),
        u_inv: IntMatrix::identity(rows),
        v: IntMatrix::identity(cols),
        v_inv: IntMatrix::identity(cols),
    };

    let steps = rows.min(cols);
    for t in 0..steps {
        'pivot: loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = w.a.get(i, j);
                    if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < w.a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break 'pivot };
            w.row_swap(t, pi);
            w.col_swap(t, pj);
            if w.a.get(t, t) < 0 {
                w.row_negate(t);
            }
            let pivot = w.a.get(t, t);

            let mut reduced = true;
            for i in t + 1..rows {
                let x = w.a.get(i, t);
                if x != 0 {
                    let q = x.div_euclid(pivot);
                    w.row_addmul(i, t, -q);
                    if w.a.get(i, t) != 0 {
                        reduced = false;
                    }
                }
            }
            for j in t + 1..cols {
                let x = w.a.get(t, j);
                if x != 0 {
                    let q = x.div_euclid(pivot);
                    w.col_addmul(j, t, -q);
                    if w.a.get(t, j) != 0 {
                        reduced = false;
                    }
                }
            }
            if !reduced {
                continue 'pivot;
            }

            // pivot must divide every remaining entry for the chain d1 | d2 | ...
            let mut offender = None;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if w.a.get(i, j) % pivot != 0 {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    w.row_addmul(t, i, 1);
                    continue 'pivot;
                }
                None => break 'pivot,
            }
        }
    }

    SmithDecomposition { u: w.u, u_inv: w.u_inv, d: w.a, v: w.v, v_inv: w.v_inv }
}
