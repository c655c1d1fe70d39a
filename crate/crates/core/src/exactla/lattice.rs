use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::snf::smith_normal_form;
use super::LinAlgError;

/// Row Hermite normal form of the lattice spanned by the rows of `a`.
/// Zero rows are dropped, so the result is a basis in echelon form with
/// positive pivots and entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_rows(a: &IntMatrix) -> IntMatrix {
    let mut rows = a.to_rows();
    let cols = a.cols();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        // Euclid on column c among rows r..
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                if best.is_none_or(|b| rows[i][c].abs() < rows[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let (head, tail) = rows.split_at_mut(i);
                for j in c..cols {
                    let t = &q * &head[r][j];
                    tail[0][j] -= t;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < rows.len() && !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for x in rows[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            pivots.push((r, c));
            r += 1;
        }
    }
    rows.truncate(r);
    for &(pr, pc) in &pivots {
        for i in 0..pr {
            let q = rows[i][pc].div_floor(&rows[pr][pc]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = rows.split_at_mut(pr);
            for j in pc..cols {
                let t = &q * &tail[0][j];
                head[i][j] -= t;
            }
        }
    }
    IntMatrix::from_rows(cols, &rows)
}

/// A sublattice of `Z^n`, stored by a basis in row Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sublattice {
    ambient_rank: usize,
    basis: IntMatrix,
}

impl Sublattice {
    /// Lattice generated by the rows of `generators` (which may be dependent).
    pub fn generated_by(generators: &IntMatrix) -> Self {
        Sublattice { ambient_rank: generators.cols(), basis: hermite_rows(generators) }
    }

    pub fn from_vectors(ambient_rank: usize, vectors: &[Vec<BigInt>]) -> Self {
        Self::generated_by(&IntMatrix::from_rows(ambient_rank, vectors))
    }

    pub fn zero(n: usize) -> Self {
        Sublattice { ambient_rank: n, basis: IntMatrix::zeros(0, n) }
    }

    pub fn full(n: usize) -> Self {
        Sublattice { ambient_rank: n, basis: IntMatrix::identity(n) }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn corank(&self) -> usize {
        self.ambient_rank - self.rank()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// Integer coordinates of `v` in the Hermite basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.ambient_rank);
        let mut rest = v.to_vec();
        let mut coords = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let row = self.basis.row(i);
            let pc = row.iter().position(|x| !x.is_zero()).expect("basis rows are nonzero");
            // Entries before the pivot column must already be cleared.
            if rest[..pc].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let (q, r) = rest[pc].div_rem(&row[pc]);
            if !r.is_zero() {
                return None;
            }
            for (x, b) in rest.iter_mut().zip(row) {
                *x -= &q * b;
            }
            coords.push(q);
        }
        if rest.iter().all(Zero::is_zero) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Sublattice) -> bool {
        (0..other.rank()).all(|i| self.contains(other.basis.row(i)))
    }

    /// Whether `v` lies in the rational span of the lattice.
    pub fn span_contains(&self, v: &[BigRational]) -> bool {
        let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
        self.saturation().contains(&scaled)
    }

    pub fn span_contains_int(&self, v: &[BigInt]) -> bool {
        self.saturation().contains(v)
    }

    /// The lattice `span_Q(L) ∩ Z^n`.
    pub fn saturation(&self) -> Sublattice {
        if self.rank() == 0 {
            return self.clone();
        }
        let annihilator = kernel_lattice(&self.basis);
        kernel_lattice(annihilator.basis())
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation() == *self
    }

    pub fn sum(&self, other: &Sublattice) -> Sublattice {
        assert_eq!(self.ambient_rank, other.ambient_rank);
        Sublattice::generated_by(&self.basis.vstack(&other.basis))
    }

    pub fn intersect(&self, other: &Sublattice) -> Sublattice {
        assert_eq!(self.ambient_rank, other.ambient_rank);
        let (k1, k2) = (self.rank(), other.rank());
        if k1 == 0 || k2 == 0 {
            return Sublattice::zero(self.ambient_rank);
        }
        // (a, b) with a*B1 = b*B2
        let mut neg = other.basis.clone();
        for i in 0..k2 {
            neg.negate_row(i);
        }
        let stacked = self.basis.vstack(&neg).transpose();
        let ker = kernel_lattice(&stacked);
        let gens: Vec<Vec<BigInt>> = (0..ker.rank())
            .map(|i| {
                let a = &ker.basis.row(i)[..k1];
                (0..self.ambient_rank)
                    .map(|j| (0..k1).map(|t| &a[t] * self.basis.get(t, j)).sum())
                    .collect()
            })
            .collect();
        Sublattice::from_vectors(self.ambient_rank, &gens)
    }

    /// Index `[self : sub]` for a sublattice of equal rank.
    pub fn index_of(&self, sub: &Sublattice) -> Result<BigInt, LinAlgError> {
        if self.ambient_rank != sub.ambient_rank {
            return Err(LinAlgError::DimensionMismatch);
        }
        if self.rank() != sub.rank() {
            return Err(LinAlgError::IndexInfinite);
        }
        let mut coords = Vec::with_capacity(sub.rank());
        for i in 0..sub.rank() {
            coords.push(self.coordinates(sub.basis.row(i)).ok_or(LinAlgError::NotASublattice)?);
        }
        let c = IntMatrix::from_rows(self.rank(), &coords);
        let snf = smith_normal_form(&c);
        Ok(snf.divisors.iter().fold(BigInt::one(), |acc, d| acc * d))
    }

    /// Matrix `P` whose kernel is the saturation of this lattice and which maps
    /// `Z^n` onto `Z^corank`. Rows are in Hermite normal form.
    pub fn quotient_projection(&self) -> IntMatrix {
        if self.rank() == 0 {
            return IntMatrix::identity(self.ambient_rank);
        }
        kernel_lattice(&self.basis).basis.clone()
    }
}

/// The kernel `{x in Z^n : A x = 0}` as a saturated sublattice of `Z^n`.
pub fn kernel_lattice(a: &IntMatrix) -> Sublattice {
    let n = a.cols();
    let snf = smith_normal_form(a);
    let r = snf.rank();
    let gens: Vec<Vec<BigInt>> = (r..n).map(|j| snf.v.column(j)).collect();
    Sublattice::from_vectors(n, &gens)
}

/// Primitive direction and integral length of an integer vector. `None` for zero.
pub fn primitive_part(v: &[BigInt]) -> Option<(Vec<BigInt>, BigInt)> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    Some((v.iter().map(|x| x / &g).collect(), g))
}

/// Primitive integer direction of a nonzero rational vector.
pub fn primitive_direction(v: &[BigRational]) -> Option<Vec<BigInt>> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    primitive_part(&scaled).map(|(p, _)| p)
}

/// Integer vector from a rational one, if all entries are integral.
pub fn integral_vector(v: &[BigRational]) -> Option<Vec<BigInt>> {
    v.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect()
}
