//! Fixed point indices of generic fixed points.
//!
//! For a generic fixed point (det(I - J) nonzero, J the Jacobian) the
//! index is sign det(I - J), equivalently (-1)^t with t the number of
//! real eigenvalues exceeding 1. Chains of Jacobians along an orbit feed
//! both the iterate index and the block Jacobian of the associated
//! cyclic-shift map on the product space; their determinants agree.

use crate::matrix::IntMatrix;
use crate::{Error, Result};

/// Jacobians `D_{f^i(x)} f` for `i = 0 .. l-1` along an orbit segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobianChain {
    dim: usize,
    blocks: Vec<IntMatrix>,
}

impl JacobianChain {
    pub fn new(blocks: Vec<IntMatrix>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::Shape("a Jacobian chain needs at least one block".into()));
        };
        if !first.is_square() || first.rows() == 0 {
            return Err(Error::Shape("chain blocks must be square and nonempty".into()));
        }
        let dim = first.rows();
        for b in &blocks {
            if b.rows() != dim || b.cols() != dim {
                return Err(Error::Shape("chain blocks must share one dimension".into()));
            }
        }
        Ok(JacobianChain { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one block
    }

    pub fn blocks(&self) -> &[IntMatrix] {
        &self.blocks
    }

    /// The chain based at the s-th point of the orbit.
    pub fn cyclic_shift(&self, s: usize) -> JacobianChain {
        let l = self.blocks.len();
        let shifted: Vec<IntMatrix> =
            (0..l).map(|i| self.blocks[(i + s) % l].clone()).collect();
        JacobianChain { dim: self.dim, blocks: shifted }
    }
}

/// A generic fixed point index: always +1 or -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexValue(i8);

impl IndexValue {
    pub fn value(&self) -> i64 {
        self.0 as i64
    }
}

/// sign det(I - J), exactly; `Degenerate` when the determinant vanishes.
pub fn generic_index(jacobian: &IntMatrix) -> Result<IndexValue> {
    assert!(jacobian.is_square(), "generic_index: Jacobian must be square");
    let d = IntMatrix::identity(jacobian.rows()).sub(jacobian).det();
    match d.signum() {
        0 => Err(Error::Degenerate),
        s => Ok(IndexValue(s as i8)),
    }
}

/// The chain-rule product `D_{f^{l-1}(x)} f * ... * D_x f`.
pub fn chain_jacobian(chain: &JacobianChain) -> IntMatrix {
    let mut product = chain.blocks()[0].clone();
    for block in &chain.blocks()[1..] {
        product = block.mul(&product);
    }
    product
}

/// The `ml x ml` Jacobian of the cyclic-shift map on the l-fold product:
/// the last block sits in the top-right corner and the remaining blocks
/// fill the subdiagonal in orbit order.
pub fn fuller_block_jacobian(chain: &JacobianChain) -> IntMatrix {
    let m = chain.dim();
    let l = chain.len();
    let mut out = IntMatrix::zeros(m * l, m * l);
    let mut place = |block_row: usize, block_col: usize, block: &IntMatrix| {
        for r in 0..m {
            for c in 0..m {
                out.set(block_row * m + r, block_col * m + c, block.get(r, c));
            }
        }
    };
    place(0, l - 1, &chain.blocks()[l - 1]);
    for i in 0..l.saturating_sub(1) {
        place(i + 1, i, &chain.blocks()[i]);
    }
    out
}

/// Both sides of the block-determinant identity
/// `det(I - D Phi_l) = det(I - D f^l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeterminantIdentity {
    pub lhs: i128,
    pub rhs: i128,
    pub equal: bool,
}

pub fn fuller_determinant_identity(chain: &JacobianChain) -> DeterminantIdentity {
    let block = fuller_block_jacobian(chain);
    let lhs = IntMatrix::identity(block.rows()).sub(&block).det();
    let product = chain_jacobian(chain);
    let rhs = IntMatrix::identity(product.rows()).sub(&product).det();
    DeterminantIdentity { lhs, rhs, equal: lhs == rhs }
}

/// True when the generic index of the orbit product agrees at every point
/// of the orbit (cyclic shifts of the chain).
pub fn iterate_index_invariance(chain: &JacobianChain) -> Result<bool> {
    let base = generic_index(&chain_jacobian(chain))?;
    for s in 1..chain.len() {
        let shifted = generic_index(&chain_jacobian(&chain.cyclic_shift(s)))?;
        if shifted != base {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn antipodal_plane_has_index_one() {
        // J = -I in dimension 2: det(I - J) = 4
        let j = mat(&[vec![-1, 0], vec![0, -1]]);
        assert_eq!(generic_index(&j).unwrap().value(), 1);
    }

    #[test]
    fn zero_jacobian_has_index_one() {
        for n in 1..=4 {
            assert_eq!(generic_index(&IntMatrix::zeros(n, n)).unwrap().value(), 1);
        }
    }

    #[test]
    fn expanding_direction_flips_the_sign() {
        assert_eq!(generic_index(&mat(&[vec![2]])).unwrap().value(), -1);
    }

    #[test]
    fn identity_jacobian_is_degenerate() {
        assert_eq!(generic_index(&IntMatrix::identity(2)), Err(Error::Degenerate));
    }

    #[test]
    fn chain_product_of_scalars() {
        let chain = JacobianChain::new(vec![mat(&[vec![2]]), mat(&[vec![3]])]).unwrap();
        assert_eq!(chain_jacobian(&chain).get(0, 0), 6);
        let single = JacobianChain::new(vec![mat(&[vec![5]])]).unwrap();
        assert_eq!(chain_jacobian(&single), mat(&[vec![5]]));
    }

    #[test]
    fn block_jacobian_layout() {
        let chain = JacobianChain::new(vec![mat(&[vec![2]]), mat(&[vec![3]])]).unwrap();
        assert_eq!(fuller_block_jacobian(&chain), mat(&[vec![0, 3], vec![2, 0]]));

        let single = JacobianChain::new(vec![mat(&[vec![7]])]).unwrap();
        assert_eq!(fuller_block_jacobian(&single), mat(&[vec![7]]));

        // l = 3 with 2x2 blocks: only top-right and subdiagonal blocks live
        let b = mat(&[vec![1, 2], vec![3, 4]]);
        let chain3 = JacobianChain::new(vec![b.clone(), b.clone(), b.clone()]).unwrap();
        let big = fuller_block_jacobian(&chain3);
        assert_eq!(big.rows(), 6);
        for br in 0..3 {
            for bc in 0..3 {
                let expected_zero = !(br == 0 && bc == 2 || br == bc + 1);
                for r in 0..2 {
                    for c in 0..2 {
                        let v = big.get(br * 2 + r, bc * 2 + c);
                        if expected_zero {
                            assert_eq!(v, 0);
                        } else {
                            assert_eq!(v, b.get(r, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn determinant_identity_scalar_example() {
        let chain = JacobianChain::new(vec![mat(&[vec![2]]), mat(&[vec![3]])]).unwrap();
        let id = fuller_determinant_identity(&chain);
        assert_eq!(id.lhs, -5);
        assert_eq!(id.rhs, -5);
        assert!(id.equal);
    }

    #[test]
    fn determinant_identity_trivial_for_single_block() {
        let chain = JacobianChain::new(vec![mat(&[vec![4, 1], vec![2, 0]])]).unwrap();
        let id = fuller_determinant_identity(&chain);
        assert!(id.equal);
    }

    fn random_chain(rng: &mut ChaCha8Rng) -> JacobianChain {
        let m = rng.gen_range(1..=3);
        let l = rng.gen_range(1..=5);
        let blocks = (0..l)
            .map(|_| {
                let rows: Vec<Vec<i64>> = (0..m)
                    .map(|_| (0..m).map(|_| rng.gen_range(-3..=3)).collect())
                    .collect();
                IntMatrix::from_rows(&rows).unwrap()
            })
            .collect();
        JacobianChain::new(blocks).unwrap()
    }

    #[test]
    fn determinant_identity_random_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let chain = random_chain(&mut rng);
            assert!(fuller_determinant_identity(&chain).equal);
        }
    }

    #[test]
    fn cyclic_shifts_preserve_the_index() {
        let chain = JacobianChain::new(vec![mat(&[vec![2]]), mat(&[vec![3]])]).unwrap();
        assert!(iterate_index_invariance(&chain).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut checked = 0;
        while checked < 100 {
            let chain = random_chain(&mut rng);
            match iterate_index_invariance(&chain) {
                Ok(ok) => {
                    assert!(ok);
                    checked += 1;
                }
                Err(Error::Degenerate) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
    }

    /// Cyclic shifts of a chain even share det(I - product).
    #[test]
    fn cyclic_shifts_share_the_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let chain = random_chain(&mut rng);
            let base = chain_jacobian(&chain);
            let d = IntMatrix::identity(base.rows()).sub(&base).det();
            for s in 1..chain.len() {
                let shifted = chain_jacobian(&chain.cyclic_shift(s));
                assert_eq!(IntMatrix::identity(shifted.rows()).sub(&shifted).det(), d);
            }
        }
    }
}
