//! Small dense linear algebra over exact and floating fields.
//!
//! Everything here is Gaussian elimination; float eigenproblems go through
//! `nalgebra` in [`crate::bridge`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::scalar::{CRational, Rational};

/// A field with a pivoting heuristic.
pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Larger is a better pivot.
    fn pivot_score(&self) -> f64;
    /// Treated as zero during elimination.
    fn negligible(&self) -> bool;
}

impl Field for Rational {
    fn pivot_score(&self) -> f64 {
        // any nonzero pivot is exact; prefer small sizes to limit growth
        if self.is_zero() {
            0.0
        } else {
            1.0 / (1.0 + self.numer().bits() as f64 + self.denom().bits() as f64)
        }
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Field for CRational {
    fn pivot_score(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            let bits = self.re.numer().bits() + self.re.denom().bits() + self.im.numer().bits() + self.im.denom().bits();
            1.0 / (1.0 + bits as f64)
        }
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Field for f64 {
    fn pivot_score(&self) -> f64 {
        self.abs()
    }
    fn negligible(&self) -> bool {
        self.abs() < 1e-11
    }
}

impl Field for Complex64 {
    fn pivot_score(&self) -> f64 {
        self.norm()
    }
    fn negligible(&self) -> bool {
        self.norm() < 1e-11
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Field> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let v = out[(i, j)].clone() + a.clone() * b.clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let mut best = None;
            let mut best_score = 0.0;
            for r in row..m.rows {
                let s = if m[(r, col)].negligible() { 0.0 } else { m[(r, col)].pivot_score() };
                if s > best_score {
                    best_score = s;
                    best = Some(r);
                }
            }
            let Some(p) = best else { continue };
            m.swap_rows(row, p);
            let inv = T::one() / m[(row, col)].clone();
            for j in col..m.cols {
                let v = m[(row, j)].clone() * inv.clone();
                m[(row, j)] = v;
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m[(r, col)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in col..m.cols {
                    let v = m[(r, j)].clone() - f.clone() * m[(row, j)].clone();
                    m[(r, j)] = v;
                }
                m[(r, col)] = T::zero();
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Solves `A x = b`; `None` when inconsistent. Free variables are set to
    /// zero.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        let aug = Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![T::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Outcome of an exact semidefiniteness test.
#[derive(Clone, Debug, PartialEq)]
pub enum Definiteness {
    /// `xᵀ A x ≥ 0` for all `x`; `strict` when the form is also nondegenerate.
    Semidefinite { strict: bool },
    /// A vector with `xᵀ A x < 0`.
    Indefinite(Vec<Rational>),
}

/// Decides positive semidefiniteness of a symmetric rational matrix by
/// symmetric elimination, producing an exact witness when it fails.
pub fn psd_with_witness(a: &Mat<Rational>) -> Definiteness {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    // columns of t are the transformed basis: m = tᵀ a t
    let mut t = Mat::<Rational>::identity(n);
    let mut done = vec![false; n];
    let mut rank = 0;
    loop {
        let remaining: Vec<usize> = (0..n).filter(|&i| !done[i]).collect();
        if remaining.is_empty() {
            break;
        }
        if let Some(&i) = remaining.iter().find(|&&i| m[(i, i)].is_negative()) {
            return Definiteness::Indefinite(t.column(i));
        }
        let pivot = remaining.iter().copied().find(|&i| m[(i, i)].is_positive());
        let Some(j) = pivot else {
            // zero diagonal on the remaining block: any off-diagonal entry
            // gives a negative direction
            for &i in &remaining {
                for &k in &remaining {
                    if i != k && !m[(i, k)].is_zero() {
                        let s = if m[(i, k)].is_positive() { -Rational::one() } else { Rational::one() };
                        let x: Vec<Rational> =
                            (0..n).map(|r| t[(r, i)].clone() + s.clone() * t[(r, k)].clone()).collect();
                        return Definiteness::Indefinite(x);
                    }
                }
            }
            break;
        };
        let d = m[(j, j)].clone();
        for &i in &remaining {
            if i == j || m[(i, j)].is_zero() {
                continue;
            }
            let f = m[(i, j)].clone() / d.clone();
            // column/row operation: e_i ← e_i − f e_j
            for r in 0..n {
                let v = t[(r, i)].clone() - f.clone() * t[(r, j)].clone();
                t[(r, i)] = v;
            }
            for c in 0..n {
                let v = m[(i, c)].clone() - f.clone() * m[(j, c)].clone();
                m[(i, c)] = v;
            }
            for r in 0..n {
                let v = m[(r, i)].clone() - f.clone() * m[(r, j)].clone();
                m[(r, i)] = v;
            }
        }
        done[j] = true;
        rank += 1;
    }
    Definiteness::Semidefinite { strict: rank == n }
}

/// `xᵀ A x`.
pub fn quadratic_form<T: Field>(a: &Mat<T>, x: &[T]) -> T {
    let ax = a.mul_vec(x);
    x.iter().zip(ax).fold(T::zero(), |acc, (u, v)| acc + u.clone() * v)
}

/// Finds `x ≥ 0` with `A x = b` by an exact phase-one simplex with Bland's
/// rule, or `None` if no such `x` exists.
pub fn nonneg_solution(a: &Mat<Rational>, b: &[Rational]) -> Option<Vec<Rational>> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    let w = n + m + 1;
    // tableau [A | I | b], rows flipped so that b ≥ 0
    let mut t = Mat::<Rational>::zeros(m, w);
    for i in 0..m {
        let flip = b[i].is_negative();
        for j in 0..n {
            t[(i, j)] = if flip { -a[(i, j)].clone() } else { a[(i, j)].clone() };
        }
        t[(i, n + i)] = Rational::one();
        t[(i, w - 1)] = if flip { -b[i].clone() } else { b[i].clone() };
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // reduced costs of the phase-one objective Σ artificials
    let mut cost = vec![Rational::zero(); w];
    for i in 0..m {
        for j in 0..n {
            cost[j] = cost[j].clone() - t[(i, j)].clone();
        }
        cost[w - 1] = cost[w - 1].clone() - t[(i, w - 1)].clone();
    }
    loop {
        let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) else { break };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[(i, enter)].is_positive() {
                let r = t[(i, w - 1)].clone() / t[(i, enter)].clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => r < *best || (r == *best && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, r));
                }
            }
        }
        let (row, _) = leave?;
        let piv = t[(row, enter)].clone();
        for j in 0..w {
            let v = t[(row, j)].clone() / piv.clone();
            t[(row, j)] = v;
        }
        for i in 0..m {
            if i == row || t[(i, enter)].is_zero() {
                continue;
            }
            let f = t[(i, enter)].clone();
            for j in 0..w {
                if !t[(row, j)].is_zero() {
                    let v = t[(i, j)].clone() - f.clone() * t[(row, j)].clone();
                    t[(i, j)] = v;
                }
            }
        }
        let f = cost[enter].clone();
        for j in 0..w {
            if !t[(row, j)].is_zero() {
                cost[j] = cost[j].clone() - f.clone() * t[(row, j)].clone();
            }
        }
        basis[row] = enter;
    }
    if !cost[w - 1].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[(i, w - 1)].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn m(rows: &[&[i64]]) -> Mat<Rational> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    #[test]
    fn simplex_feasibility() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let x = nonneg_solution(&a, &[int(2), int(3)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![int(2), int(3)]);
        assert!(x.iter().all(|v| !v.is_negative()));
        assert!(nonneg_solution(&a, &[int(-1), int(3)]).is_none());
        // redundant rows
        let a = m(&[&[1, 2], &[2, 4]]);
        assert!(nonneg_solution(&a, &[int(3), int(6)]).is_some());
        assert!(nonneg_solution(&a, &[int(3), int(5)]).is_none());
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn solve_and_inverse() {
        let a = m(&[&[2, 1], &[1, 3]]);
        let x = a.solve(&[int(3), int(5)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![int(3), int(5)]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(2));
        assert!(m(&[&[1, 1], &[1, 1]]).solve(&[int(1), int(2)]).is_none());
    }

    #[test]
    fn psd_test_with_witnesses() {
        assert_eq!(psd_with_witness(&m(&[&[2, 1], &[1, 2]])), Definiteness::Semidefinite { strict: true });
        assert_eq!(psd_with_witness(&m(&[&[1, 1], &[1, 1]])), Definiteness::Semidefinite { strict: false });
        for a in [m(&[&[1, 2], &[2, 1]]), m(&[&[0, 1], &[1, 0]]), m(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, -1]])] {
            match psd_with_witness(&a) {
                Definiteness::Indefinite(x) => assert!(quadratic_form(&a, &x).is_negative()),
                other => panic!("expected witness, got {other:?}"),
            }
        }
    }
}
