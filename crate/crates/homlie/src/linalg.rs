//! Dense exact linear algebra over the rationals.
//!
//! Everything downstream that talks about kernels, images, orthogonal
//! decompositions or solvability reduces to these routines. All of them are
//! fraction-free in spirit: plain Gauss-Jordan over `Rat`, no pivoting
//! heuristics beyond "first nonzero", so results are deterministic.

use num::{One, Zero};

use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Columns assembled from vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<Rat>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for i in 0..rows {
                m.set(i, j, c[i].clone());
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        QMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut s = Rat::zero();
            for k in 0..self.cols {
                if !self.get(i, k).is_zero() && !other.get(k, j).is_zero() {
                    s += self.get(i, k) * other.get(k, j);
                }
            }
            s
        })
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut s = Rat::zero();
                for k in 0..self.cols {
                    if !self.get(i, k).is_zero() && !v[k].is_zero() {
                        s += self.get(i, k) * &v[k];
                    }
                }
                s
            })
            .collect()
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        QMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..self.cols {
                    let a = self.get(row, j).clone();
                    let b = self.get(p, j).clone();
                    self.set(row, j, b);
                    self.set(p, j, a);
                }
            }
            let inv = Rat::one() / self.get(row, col).clone();
            for j in 0..self.cols {
                let v = self.get(row, j) * &inv;
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r != row && !self.get(r, col).is_zero() {
                    let f = self.get(r, col).clone();
                    for j in 0..self.cols {
                        let v = self.get(r, j) - &(self.get(row, j) * &f);
                        self.set(r, j, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace, in the canonical order induced by free
    /// columns.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); self.cols];
            v[free] = Rat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.get(r, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// One exact solution of `self * x = b`, if the system is consistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, b.len(), "solve: rhs length mismatch");
        let mut aug = QMatrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column: inconsistent
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn vec_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Rat], c: &Rat) -> Vec<Rat> {
    a.iter().map(|x| x * c).collect()
}

pub fn vec_is_zero(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Exact orthogonal projection of `v` onto the span of `basis` with respect
/// to the standard dot product. The basis need not be orthogonal.
pub fn project_onto_span(basis: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    if basis.is_empty() {
        return vec![Rat::zero(); v.len()];
    }
    let k = basis.len();
    let gram = QMatrix::from_fn(k, k, |i, j| dot(&basis[i], &basis[j]));
    let rhs: Vec<Rat> = basis.iter().map(|b| dot(b, v)).collect();
    let coeffs = gram
        .solve(&rhs)
        .expect("projection onto a span is always solvable");
    let mut out = vec![Rat::zero(); v.len()];
    for (c, b) in coeffs.iter().zip(basis) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

/// Basis (in `a`-coordinates, returned as full vectors) of the intersection
/// of the spans of `a` and `b`.
pub fn span_intersection(a: &[Vec<Rat>], b: &[Vec<Rat>], dim: usize) -> Vec<Vec<Rat>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let ma = QMatrix::from_columns(dim, a);
    let mb = QMatrix::from_columns(dim, b);
    let neg_mb = QMatrix::from_fn(dim, b.len(), |i, j| -mb.get(i, j).clone());
    let combined = ma.hstack(&neg_mb);
    combined
        .nullspace()
        .into_iter()
        .map(|ns| {
            let coeffs = &ns[..a.len()];
            let mut v = vec![Rat::zero(); dim];
            for (c, col) in coeffs.iter().zip(a) {
                for (o, x) in v.iter_mut().zip(col) {
                    *o += c * x;
                }
            }
            v
        })
        .filter(|v| !vec_is_zero(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;

    #[test]
    fn rref_and_rank() {
        let m = QMatrix::from_fn(3, 3, |i, j| q((i + j) as i64));
        assert_eq!(m.rank(), 2);
        assert_eq!(QMatrix::identity(4).rank(), 4);
    }

    #[test]
    fn nullspace_matches_kernel() {
        // x + y + z = 0 has a 2-dimensional kernel
        let m = QMatrix::from_fn(1, 3, |_, _| q(1));
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(vec_is_zero(&m.mul_vec(v)));
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = QMatrix::from_fn(2, 2, |i, j| q([[1, 2], [3, 4]][i][j]));
        let x = m.solve(&[q(5), q(11)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![q(5), q(11)]);
        let sing = QMatrix::from_fn(2, 2, |i, _| q(if i == 0 { 1 } else { 2 }));
        assert!(sing.solve(&[q(1), q(3)]).is_none());
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let b1 = vec![q(1), q(1), q(0)];
        let b2 = vec![q(0), q(1), q(1)];
        let v = vec![q(3), q(0), q(-1)];
        let p = project_onto_span(&[b1.clone(), b2.clone()], &v);
        let r = vec_sub(&v, &p);
        assert!(dot(&r, &b1).is_zero());
        assert!(dot(&r, &b2).is_zero());
        let pp = project_onto_span(&[b1, b2], &p);
        assert_eq!(p, pp);
    }

    #[test]
    fn intersection_of_spans() {
        let a = vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]];
        let b = vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]];
        let inter = span_intersection(&a, &b, 3);
        assert_eq!(inter.len(), 1);
        assert!(inter[0][0].is_zero() && inter[0][2].is_zero());
    }
}
