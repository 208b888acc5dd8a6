//! Concrete problem instances: tensor-product systems, parallel-beam
//! tomography, snapshot compressive imaging, phantoms, synthetic videos,
//! and the Gaussian noise model.

mod cacti;
mod noise;
mod phantom;
mod radon;
mod video;

pub use cacti::{make_cacti, operator_from_stack, MaskStack, MASK_SHIFT_POLICY};
pub use noise::{add_noise, NoisyData};
pub use phantom::{intensity_at, shepp_logan};
pub use radon::{make_parallel_radon, RadonGeometry};
pub use video::{default_rect, frame, synthetic_video, MovingRect, BACKGROUND, FOREGROUND};

use crate::operators::{BlockOperator, DenseMatrix, TensorProduct};

/// Builds the tensor-product operator A_i z = (v_{li} K z)_l from a d x b
/// coupling matrix V and kernel K. Records max column norm and whether V has
/// full column rank.
pub fn make_tensor_product(v: DenseMatrix, k: DenseMatrix) -> BlockOperator {
    assert!(v.rows > 0 && v.cols > 0 && k.rows > 0 && k.cols > 0);
    BlockOperator::from_tensor_product(TensorProduct::new(v, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockVector;
    use crate::operators::OperatorKind;

    #[test]
    fn scalar_tensor_product_is_scalar_multiplication() {
        let op = make_tensor_product(
            DenseMatrix::new(1, 1, vec![1.0]),
            DenseMatrix::new(1, 1, vec![2.0]),
        );
        let y = op.apply(&BlockVector::new(vec![vec![3.0]])).unwrap();
        assert_eq!(y.values(), &[6.0]);
    }

    #[test]
    fn identity_coupling_dims_and_norm() {
        let op = make_tensor_product(DenseMatrix::identity(3), DenseMatrix::identity(2));
        assert_eq!(op.block_count(), 3);
        assert_eq!(op.data_dim(), 6);
        assert!((op.norm() - 1.0).abs() < 1e-6);
        match op.kind() {
            OperatorKind::TensorProduct(tp) => {
                assert!(tp.v_full_column_rank);
                assert_eq!(tp.v_star, 1.0);
            }
            _ => unreachable!(),
        }
    }
}
