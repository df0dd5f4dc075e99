//! Finite groups as dense multiplication tables, and groups `Γ` marked by two
//! subgroups `A`, `B` whose commutators normally generate `Γ'` with
//! `Γ / Γ' ≅ A × B`.

use thiserror::Error;

mod marked;
mod table;
pub mod text;

pub use marked::{
    a5_fiber, alternating5, derived_log_ratio_band, fiber_product_gamma, s3_fiber, symmetric3,
    MarkedGamma,
};
pub use table::{permutation_group, Elem, FiniteGroup, EXHAUSTIVE_ASSOC_LIMIT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid group table: {0}")]
    Table(String),
    #[error("invalid marking: {0}")]
    Marking(String),
    #[error("generators do not reach element {0}")]
    NotGenerating(Elem),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GroupError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_closure_examples() {
        let (s3, _, y) = symmetric3();
        assert_eq!(s3.normal_closure(&[s3.identity()]), vec![s3.identity()]);
        assert_eq!(s3.normal_closure(&[y]).len(), 3);
        let (a5, x, _) = alternating5();
        assert_eq!(a5.order(), 60);
        for g in 0..60 {
            if g != a5.identity() {
                assert_eq!(a5.normal_closure(&[g]).len(), 60);
            }
        }
        assert_eq!(a5.normal_closure(&[x]).len(), 60);
    }

    #[test]
    fn diameters() {
        assert_eq!(FiniteGroup::trivial().diameter(&[]).unwrap(), 0);
        let base = MarkedGamma::abelian_base(2, 3).unwrap();
        // Z/2 x Z/3 with a, b and their inverses: (1,2) = a·b⁻¹ has length 2.
        assert_eq!(base.diameter(), 2);
    }

    #[test]
    fn not_generating_is_an_error() {
        let z6 = FiniteGroup::cyclic(6);
        assert_eq!(z6.diameter(&[2]), Err(GroupError::NotGenerating(1)));
    }

    #[test]
    fn trivial_h_is_rejected() {
        let h = FiniteGroup::trivial();
        assert!(matches!(
            fiber_product_gamma(&h, 0, 0),
            Err(GroupError::Marking(_))
        ));
    }

    #[test]
    fn derived_part_of_generators() {
        let g = s3_fiber();
        assert_eq!(g.derived_part(g.gamma().identity()), g.gamma().identity());
        assert_eq!(g.derived_part(g.a_elem(1)), g.gamma().identity());
        assert_eq!(g.derived_part(g.b_elem(2)), g.gamma().identity());
    }

    #[test]
    fn corrupted_table_is_rejected() {
        let mut t = FiniteGroup::cyclic(4).table().to_vec();
        t.swap(5, 6);
        assert!(FiniteGroup::from_table(4, t).is_err());
    }
}
