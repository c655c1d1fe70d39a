use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

/// Smith normal form `U * A * V = D` with unimodular `U`, `V` and
/// `D` diagonal with non-negative entries `d_1 | d_2 | ... | d_r`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
    /// Nonzero diagonal entries of `D`, in order.
    pub divisors: Vec<BigInt>,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }
}

struct Work {
    d: IntMatrix,
    u: IntMatrix,
    v: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap_rows(a, b);
        self.u.swap_rows(a, b);
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        self.d.swap_cols(a, b);
        self.v.swap_cols(a, b);
    }
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.d.add_row_multiple(dst, src, k);
        self.u.add_row_multiple(dst, src, k);
    }
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.d.add_col_multiple(dst, src, k);
        self.v.add_col_multiple(dst, src, k);
    }
}

/// Position of the nonzero entry of smallest absolute value in the
/// lower-right block starting at `(t, t)`; ties go to the first in row-major order.
fn min_pivot(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = d.get(i, j);
            if x.is_zero() {
                continue;
            }
            let a = x.abs();
            if best.as_ref().is_none_or(|(_, _, b)| a < *b) {
                best = Some((i, j, a));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

pub fn smith_normal_form(a: &IntMatrix) -> Snf {
    let (m, n) = (a.rows(), a.cols());
    let mut w = Work { d: a.clone(), u: IntMatrix::identity(m), v: IntMatrix::identity(n) };
    let mut t = 0;
    while t < m.min(n) {
        let Some((pi, pj)) = min_pivot(&w.d, t) else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            let p = w.d.get(t, t).clone();
            let mut residue = false;
            for i in t + 1..m {
                let x = w.d.get(i, t);
                if x.is_zero() {
                    continue;
                }
                let q = -(x / &p);
                w.add_row(i, t, &q);
                if !w.d.get(i, t).is_zero() {
                    residue = true;
                }
            }
            for j in t + 1..n {
                let x = w.d.get(t, j);
                if x.is_zero() {
                    continue;
                }
                let q = -(x / &p);
                w.add_col(j, t, &q);
                if !w.d.get(t, j).is_zero() {
                    residue = true;
                }
            }
            if residue {
                // Bring the smallest remaining entry of row/column t to the pivot.
                let mut best = (t, t, w.d.get(t, t).abs());
                for i in t + 1..m {
                    let x = w.d.get(i, t);
                    if !x.is_zero() && x.abs() < best.2 {
                        best = (i, t, x.abs());
                    }
                }
                for j in t + 1..n {
                    let x = w.d.get(t, j);
                    if !x.is_zero() && x.abs() < best.2 {
                        best = (t, j, x.abs());
                    }
                }
                w.swap_rows(t, best.0);
                w.swap_cols(t, best.1);
                continue;
            }
            let mut bad_row = None;
            'scan: for i in t + 1..m {
                for j in t + 1..n {
                    if !w.d.get(i, j).is_multiple_of(&p) {
                        bad_row = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad_row {
                Some(i) => w.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if w.d.get(t, t).is_negative() {
            w.d.negate_row(t);
            w.u.negate_row(t);
        }
        t += 1;
    }
    let divisors = (0..m.min(n))
        .map(|i| w.d.get(i, i).clone())
        .take_while(|x| !x.is_zero())
        .collect();
    Snf { u: w.u, v: w.v, d: w.d, divisors }
}

/// Determinant by fraction-free (Bareiss) elimination. Independent of the SNF code path.
pub fn det_bareiss(a: &IntMatrix) -> BigInt {
    assert_eq!(a.rows(), a.cols(), "determinant of non-square matrix");
    let n = a.rows();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.to_rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Rank over the rationals by fraction-free elimination.
pub fn rank_over_rationals(a: &IntMatrix) -> usize {
    let mut m = a.to_rows();
    let (rows, cols) = (a.rows(), a.cols());
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(p, r);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&m[i][j] * &m[r][c] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Rank over the prime field of characteristic `p`; `p = 0` means the rationals.
pub fn rank_over_field(a: &IntMatrix, p: u64) -> usize {
    if p == 0 {
        return rank_over_rationals(a);
    }
    let pb = BigInt::from(p);
    let mut m: Vec<Vec<u64>> = a
        .to_rows()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    let r = x.mod_floor(&pb);
                    u64::try_from(&r).expect("residue fits in u64")
                })
                .collect()
        })
        .collect();
    let (rows, cols) = (a.rows(), a.cols());
    let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(piv, r);
        let inv = pow_mod(m[r][c], p - 2, p);
        for i in 0..rows {
            if i == r || m[i][c] == 0 {
                continue;
            }
            let f = mulmod(m[i][c], inv);
            let pivot = m[r].clone();
            for (x, y) in m[i].iter_mut().zip(&pivot).skip(c) {
                *x = (*x + p - mulmod(f, *y)) % p;
            }
        }
        r += 1;
    }
    r
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u64 = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
