//! Dense matrices over the truncated polynomial ring, and the semilinear
//! map calculus built on them.
//!
//! The truncated ring is local: a square matrix over it is invertible
//! exactly when its constant-term matrix is invertible over the rationals.
//! Inversion is Gauss-Jordan with unit pivots; every step stays inside the
//! ring.
//!
//! `SemiLin` packages the maps that appear in every twisted formula:
//! `s -> M * (phi*)^k(s)` for a matrix `M` and a twist power `k`. Products
//! of pullback-twisted morphisms, their inverses, and the gauge group
//! operations all reduce to compositions of these.

use crate::error::Error;
use crate::jet::{Base, JetPoly, JetShape};
use crate::rat::Rat;
use num::Zero;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    pub rows: usize,
    pub cols: usize,
    pub shape: JetShape,
    data: Vec<JetPoly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize, shape: JetShape) -> Self {
        PolyMatrix {
            rows,
            cols,
            shape,
            data: vec![JetPoly::zero(shape); rows * cols],
        }
    }

    pub fn identity(n: usize, shape: JetShape) -> Self {
        let mut m = Self::zeros(n, n, shape);
        for i in 0..n {
            m.set(i, i, JetPoly::one(shape));
        }
        m
    }

    pub fn from_rows(shape: JetShape, rows: Vec<Vec<JetPoly>>) -> Result<Self, Error> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        for row in &rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch("ragged matrix rows".into()));
            }
            for p in row {
                if p.shape() != shape {
                    return Err(Error::ShapeMismatch(
                        "matrix entry has wrong jet shape".into(),
                    ));
                }
            }
        }
        Ok(PolyMatrix {
            rows: r,
            cols: c,
            shape,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        shape: JetShape,
        mut f: impl FnMut(usize, usize) -> JetPoly,
    ) -> Self {
        let mut m = Self::zeros(rows, cols, shape);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &JetPoly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: JetPoly) {
        assert_eq!(v.shape(), self.shape, "matrix entry shape mismatch");
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<JetPoly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn add(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        PolyMatrix::from_fn(self.rows, self.cols, self.shape, |i, j| {
            self.get(i, j).add(other.get(i, j))
        })
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        PolyMatrix::from_fn(self.rows, self.cols, self.shape, |i, j| {
            self.get(i, j).sub(other.get(i, j))
        })
    }

    pub fn neg(&self) -> PolyMatrix {
        self.map(|p| p.neg())
    }

    pub fn scale_poly(&self, f: &JetPoly) -> PolyMatrix {
        self.map(|p| p.mul(f))
    }

    pub fn scale_rat(&self, c: &Rat) -> PolyMatrix {
        self.map(|p| p.scale(c))
    }

    pub fn map(&self, f: impl Fn(&JetPoly) -> JetPoly) -> PolyMatrix {
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            shape: self.shape,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn matmul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, other.rows, "poly matrix product shape mismatch");
        PolyMatrix::from_fn(self.rows, other.cols, self.shape, |i, j| {
            let mut s = JetPoly::zero(self.shape);
            for k in 0..self.cols {
                s = s.add(&self.get(i, k).mul(other.get(k, j)));
            }
            s
        })
    }

    pub fn apply_vec(&self, v: &[JetPoly]) -> Vec<JetPoly> {
        assert_eq!(self.cols, v.len(), "poly matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut s = JetPoly::zero(self.shape);
                for k in 0..self.cols {
                    s = s.add(&self.get(i, k).mul(&v[k]));
                }
                s
            })
            .collect()
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(self.cols, self.rows, self.shape, |i, j| {
            self.get(j, i).clone()
        })
    }

    /// Entrywise pullback power (phi*)^k.
    pub fn subst_pow(&self, base: &Base, k: i32) -> PolyMatrix {
        self.map(|p| base.subst_pow(k, p))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|p| p.is_zero())
    }

    pub fn is_zero_up_to(&self, order: i64) -> bool {
        self.data.iter().all(|p| p.is_zero_up_to(order))
    }

    pub fn min_valid_order(&self) -> i64 {
        self.data
            .iter()
            .map(|p| p.valid_order())
            .min()
            .unwrap_or(self.shape.order)
    }

    pub fn budget_eq(&self, other: &PolyMatrix, loss: i64) -> bool {
        let cmp = self
            .min_valid_order()
            .min(other.min_valid_order())
            .min(self.shape.order - loss);
        self.sub(other).is_zero_up_to(cmp)
    }

    pub fn constant_matrix(&self) -> crate::linalg::QMatrix {
        crate::linalg::QMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).constant_term()
        })
    }

    pub fn is_constant(&self) -> bool {
        self.data
            .iter()
            .all(|p| p.terms().all(|(mi, _)| mi.degree() == 0))
    }

    /// Inverse over the truncated ring. The ring is local, so invertibility
    /// is decided by the constant-term matrix; pivots are always units.
    pub fn invert(&self) -> Result<PolyMatrix, Error> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        let mut work = self.clone();
        let mut inv = PolyMatrix::identity(n, self.shape);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !work.get(r, col).constant_term().is_zero())
                .ok_or_else(|| {
                    Error::NotInvertible(
                        "matrix over the jet ring: determinant has zero constant term".into(),
                    )
                })?;
            if pivot != col {
                for j in 0..n {
                    let a = work.get(col, j).clone();
                    let b = work.get(pivot, j).clone();
                    work.set(col, j, b);
                    work.set(pivot, j, a);
                    let a = inv.get(col, j).clone();
                    let b = inv.get(pivot, j).clone();
                    inv.set(col, j, b);
                    inv.set(pivot, j, a);
                }
            }
            let p_inv = work.get(col, col).invert_unit()?;
            for j in 0..n {
                work.set(col, j, work.get(col, j).mul(&p_inv));
                inv.set(col, j, inv.get(col, j).mul(&p_inv));
            }
            for r in 0..n {
                if r == col || work.get(r, col).is_zero() {
                    continue;
                }
                let f = work.get(r, col).clone();
                for j in 0..n {
                    let w = work.get(r, j).sub(&work.get(col, j).mul(&f));
                    work.set(r, j, w);
                    let v = inv.get(r, j).sub(&inv.get(col, j).mul(&f));
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    /// Row-major text form, used in residual reports.
    pub fn render(&self) -> String {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let entries: Vec<String> =
                    (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", entries.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

/// A pullback-twisted matrix map `s -> mat * (phi*)^twist(s)`.
///
/// Composition: (M1, k1) o (M2, k2) = (M1 * (phi*)^{k1}(M2), k1 + k2).
#[derive(Clone, Debug, PartialEq)]
pub struct SemiLin {
    pub mat: PolyMatrix,
    pub twist: i32,
}

impl SemiLin {
    pub fn new(mat: PolyMatrix, twist: i32) -> Self {
        SemiLin { mat, twist }
    }

    pub fn untwisted(mat: PolyMatrix) -> Self {
        SemiLin { mat, twist: 0 }
    }

    pub fn compose(&self, base: &Base, other: &SemiLin) -> SemiLin {
        SemiLin {
            mat: self.mat.matmul(&other.mat.subst_pow(base, self.twist)),
            twist: self.twist + other.twist,
        }
    }

    pub fn apply(&self, base: &Base, v: &[JetPoly]) -> Vec<JetPoly> {
        let twisted: Vec<JetPoly> = v.iter().map(|p| {
            let mut out = p.clone();
            if self.twist >= 0 {
                for _ in 0..self.twist {
                    out = out.substitute(&base.phi);
                }
            } else {
                for _ in 0..(-self.twist) {
                    out = out.substitute(&base.phi_inv);
                }
            }
            out
        }).collect();
        self.mat.apply_vec(&twisted)
    }
}
