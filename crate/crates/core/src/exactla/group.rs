use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::matrix::IntMatrix;
use super::snf::{is_prime, smith_normal_form};
use super::LinAlgError;

/// Finitely generated abelian group `Z^rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k`
/// with `1 < d_1 | d_2 | ... | d_k`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FGAbelianGroup {
    pub rank: usize,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub torsion: Vec<BigInt>,
}

impl FGAbelianGroup {
    pub fn free(rank: usize) -> Self {
        FGAbelianGroup { rank, torsion: Vec::new() }
    }

    /// Canonical form of `Z^rank ⊕ ⊕ Z/c_i` for arbitrary positive `c_i`.
    pub fn from_cyclic_orders(rank: usize, orders: &[BigInt]) -> Self {
        let n = orders.len();
        let mut diag = IntMatrix::zeros(n, n);
        for (i, c) in orders.iter().enumerate() {
            diag.set(i, i, c.clone());
        }
        let snf = smith_normal_form(&diag);
        let torsion = snf.divisors.into_iter().filter(|d| !d.is_one()).collect();
        FGAbelianGroup { rank, torsion }
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().fold(BigInt::one(), |acc, d| acc * d)
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        (self.rank == 0).then(|| self.torsion_order())
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.rank > 0 {
            parts.push(if self.rank == 1 { "Z".to_string() } else { format!("Z^{}", self.rank) });
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Cokernel `Z^rows / A Z^cols` in canonical form.
pub fn cokernel_group(a: &IntMatrix) -> FGAbelianGroup {
    let snf = smith_normal_form(a);
    let rank = a.rows() - snf.rank();
    let torsion = snf.divisors.into_iter().filter(|d| !d.is_one()).collect();
    FGAbelianGroup { rank, torsion }
}

/// Coefficient groups in which complexes are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffGroup {
    Integers,
    Rationals,
    /// Prime field, or an algebraically closed field, of the given characteristic.
    FieldOfChar(u64),
    /// Multiplicative group of an algebraically closed field of the given characteristic.
    UnitsAlgClosed(u64),
}

impl CoeffGroup {
    pub fn check(&self) -> Result<(), LinAlgError> {
        match *self {
            CoeffGroup::FieldOfChar(p) | CoeffGroup::UnitsAlgClosed(p) if p != 0 && !is_prime(p) => {
                Err(LinAlgError::NotPrime(p))
            }
            _ => Ok(()),
        }
    }

    /// Characteristic if this is a field.
    pub fn field_char(&self) -> Option<u64> {
        match *self {
            CoeffGroup::Rationals => Some(0),
            CoeffGroup::FieldOfChar(p) => Some(p),
            _ => None,
        }
    }
}

impl fmt::Display for CoeffGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffGroup::Integers => write!(f, "Z"),
            CoeffGroup::Rationals => write!(f, "Q"),
            CoeffGroup::FieldOfChar(p) => write!(f, "F(char {p})"),
            CoeffGroup::UnitsAlgClosed(p) => write!(f, "k*(char {p})"),
        }
    }
}

/// Size of a group `G^free_rank × (finite group) × k^kdim`.
///
/// Only one of `free_rank` and `kdim` is used for any given coefficient group:
/// vector spaces report `kdim`, while `Z` and `k*` report copies of themselves in `free_rank`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSize {
    pub free_rank: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub torsion_order: BigInt,
    pub kdim: usize,
}

impl GroupSize {
    pub fn trivial() -> Self {
        GroupSize { free_rank: 0, torsion_order: BigInt::one(), kdim: 0 }
    }

    pub fn finite_order(&self) -> Option<BigInt> {
        (self.free_rank == 0 && self.kdim == 0).then(|| self.torsion_order.clone())
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.kdim == 0 && self.torsion_order.is_one()
    }

    /// Size of an extension of `other` by `self`.
    pub fn extend(&self, other: &GroupSize) -> GroupSize {
        GroupSize {
            free_rank: self.free_rank + other.free_rank,
            torsion_order: &self.torsion_order * &other.torsion_order,
            kdim: self.kdim + other.kdim,
        }
    }
}

impl fmt::Display for GroupSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "free_rank={} torsion_order={} kdim={}", self.free_rank, self.torsion_order, self.kdim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseChangeMode {
    Tensor,
    Tor,
}

/// Largest divisor of `d` prime to `p` (all of `d` when `p = 0`).
pub fn prime_to_part(d: &BigInt, p: u64) -> BigInt {
    if p == 0 {
        return d.clone();
    }
    let pb = BigInt::from(p);
    let mut d = d.clone();
    while !d.is_zero() && d.is_multiple_of(&pb) {
        d /= &pb;
    }
    d
}

/// `A ⊗ G` or `Tor(A, G)`.
pub fn base_change(a: &FGAbelianGroup, g: CoeffGroup, mode: BaseChangeMode) -> Result<GroupSize, LinAlgError> {
    g.check()?;
    let divisible_by = |p: u64| {
        let pb = BigInt::from(p);
        a.torsion.iter().filter(|d| d.is_multiple_of(&pb)).count()
    };
    let size = match (mode, g) {
        (BaseChangeMode::Tensor, CoeffGroup::Integers) => {
            GroupSize { free_rank: a.rank, torsion_order: a.torsion_order(), kdim: 0 }
        }
        (BaseChangeMode::Tensor, CoeffGroup::Rationals) | (BaseChangeMode::Tensor, CoeffGroup::FieldOfChar(0)) => {
            GroupSize { kdim: a.rank, ..GroupSize::trivial() }
        }
        (BaseChangeMode::Tensor, CoeffGroup::FieldOfChar(p)) => {
            GroupSize { kdim: a.rank + divisible_by(p), ..GroupSize::trivial() }
        }
        // Z/d ⊗ k* = k*/(k*)^d vanishes because k* is divisible.
        (BaseChangeMode::Tensor, CoeffGroup::UnitsAlgClosed(_)) => {
            GroupSize { free_rank: a.rank, ..GroupSize::trivial() }
        }
        (BaseChangeMode::Tor, CoeffGroup::Integers)
        | (BaseChangeMode::Tor, CoeffGroup::Rationals)
        | (BaseChangeMode::Tor, CoeffGroup::FieldOfChar(0)) => GroupSize::trivial(),
        (BaseChangeMode::Tor, CoeffGroup::FieldOfChar(p)) => GroupSize { kdim: divisible_by(p), ..GroupSize::trivial() },
        // Tor(Z/d, k*) = d-th roots of unity in k.
        (BaseChangeMode::Tor, CoeffGroup::UnitsAlgClosed(p)) => GroupSize {
            torsion_order: a.torsion.iter().fold(BigInt::one(), |acc, d| acc * prime_to_part(d, p)),
            ..GroupSize::trivial()
        },
    };
    Ok(size)
}

/// Number of elements of the `l`-torsion of `G` (as a dimension for fields).
pub fn roots_of_unity_size(l: &BigInt, g: CoeffGroup) -> GroupSize {
    base_change(&FGAbelianGroup::from_cyclic_orders(0, std::slice::from_ref(l)), g, BaseChangeMode::Tor)
        .expect("coefficient group already checked")
}

/// Size of `G / l G`.
pub fn quotient_size(l: &BigInt, g: CoeffGroup) -> GroupSize {
    base_change(&FGAbelianGroup::from_cyclic_orders(0, std::slice::from_ref(l)), g, BaseChangeMode::Tensor)
        .expect("coefficient group already checked")
}
