//! Exact integer and rational linear algebra: Smith normal form, lattices,
//! finitely generated abelian groups and change of coefficients.

mod group;
mod lattice;
mod matrix;
mod snf;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub use group::{
    base_change, cokernel_group, prime_to_part, quotient_size, roots_of_unity_size, BaseChangeMode, CoeffGroup,
    FGAbelianGroup, GroupSize,
};
pub use lattice::{hermite_rows, integral_vector, kernel_lattice, primitive_direction, primitive_part, Sublattice};
pub use matrix::IntMatrix;
pub use snf::{det_bareiss, is_prime, rank_over_field, rank_over_rationals, smith_normal_form, Snf};

pub type Int = BigInt;
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("lattices have different ranks, index is infinite")]
    IndexInfinite,
    #[error("lattice is not contained in the larger lattice")]
    NotASublattice,
    #[error("ambient dimensions do not match")]
    DimensionMismatch,
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
}

/// Parses `"p/q"` or an integer literal into a rational.
pub fn parse_rational(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(n.into(), d.into())
}

pub fn int_rat(n: i64) -> Rat {
    BigRational::from_integer(n.into())
}

impl LinAlgError {
    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        match self {
            LinAlgError::IndexInfinite => "IndexInfinite",
            LinAlgError::NotASublattice => "NotASublattice",
            LinAlgError::DimensionMismatch => "DimensionMismatch",
            LinAlgError::NotPrime(_) => "NotPrime",
        }
        .into()
    }
}
