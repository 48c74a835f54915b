//! Finite-dimensional slice theory: exact matrixization of the covariant
//! operators, the coefficient Laplacian, the orthogonal decomposition of
//! endomorphism-valued 1-forms, the slice tangent space, and the local
//! product-chart differential.
//!
//! Adjoints are taken with respect to the plain coefficient inner product
//! (frame slots and monomials orthonormal). Kernels, images and orthogonal
//! complements are basis-independent statements over the rationals, so
//! nothing is lost against a metric pairing while everything stays exact.
//! On subspaces given by non-orthonormal bases the Gram form `B^T M B` is
//! used; its kernel is exactly the pullback of the operator kernel.

use num::Zero;

use serde_json::json;

use crate::algebroid::HomAlgebroid;
use crate::bundle::{HomBundle, TwistedMor};
use crate::coeff::{
    assemble_matrix, dim_end_form, end_form_to_vec, end_subspace_basis, twist_end_form,
    vec_to_end_form, vec_to_mor,
};
use crate::connection::{d_nabla_end, Connection};
use crate::error::Error;
use crate::forms::LForm;
use crate::gauge::{end_operator_matrix, phi_e_vector};
use crate::linalg::{dot, project_onto_span, vec_is_zero, vec_sub, QMatrix};
use crate::polymat::PolyMatrix;
use crate::rat::{q, rat_to_string, Rat};
use crate::report::{CheckEntry, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subspace {
    Full,
    PhiE,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpName {
    DNabla,
    EndConnection,
    AdAlpha,
    PhiTwists,
}

impl OpName {
    pub fn parse(s: &str) -> Result<OpName, Error> {
        match s {
            "d_nabla" => Ok(OpName::DNabla),
            "end_connection" => Ok(OpName::EndConnection),
            "ad_alpha" => Ok(OpName::AdAlpha),
            "phi_twists" => Ok(OpName::PhiTwists),
            other => Err(Error::UnknownOperator(other.into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpaceSpec {
    pub degree: usize,
    pub subspace: Subspace,
    /// Coordinate dimension: full coordinates, or the number of subspace
    /// basis vectors when restricted.
    pub dim: usize,
}

/// Exact rational matrix between coefficient spaces, with its declared
/// order loss. Composition adds losses.
#[derive(Clone, Debug)]
pub struct LinOperator {
    pub domain: SpaceSpec,
    pub codomain: SpaceSpec,
    pub matrix: QMatrix,
    pub loss: i64,
}

impl LinOperator {
    /// Composition of exact operators; losses add.
    pub fn compose(&self, inner: &LinOperator) -> Result<LinOperator, Error> {
        if self.domain.dim != inner.codomain.dim {
            return Err(Error::ShapeMismatch(
                "operator composition: domain/codomain dimensions differ".into(),
            ));
        }
        Ok(LinOperator {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.mul(&inner.matrix),
            loss: self.loss + inner.loss,
        })
    }

    /// Dense export: JSON arrays of `p/q` strings.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> = (0..self.matrix.rows)
            .map(|i| {
                (0..self.matrix.cols)
                    .map(|j| rat_to_string(self.matrix.get(i, j)))
                    .collect()
            })
            .collect();
        json!({
            "domain": { "degree": self.domain.degree, "subspace": subspace_name(self.domain.subspace), "dim": self.domain.dim },
            "codomain": { "degree": self.codomain.degree, "subspace": subspace_name(self.codomain.subspace), "dim": self.codomain.dim },
            "loss": self.loss,
            "matrix": rows,
        })
    }
}

fn subspace_name(s: Subspace) -> &'static str {
    match s {
        Subspace::Full => "full",
        Subspace::PhiE => "phiE",
    }
}

fn subspace_cols(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    degree: usize,
    subspace: Subspace,
) -> Option<QMatrix> {
    match subspace {
        Subspace::Full => None,
        Subspace::PhiE => {
            let basis = end_subspace_basis(bundle, algebroid, degree);
            let dim = dim_end_form(bundle, algebroid, degree);
            Some(QMatrix::from_columns(dim, &basis))
        }
    }
}

/// Exact matrix of a named operator on endomorphism-valued forms at a
/// degree. With the restricted tag the domain runs over the compatible
/// subspace basis; the codomain always carries full coordinates.
pub fn operator_matrix(
    op: OpName,
    conn: &Connection,
    degree: usize,
    subspace: Subspace,
) -> Result<LinOperator, Error> {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let (full_matrix, out_degree, loss): (QMatrix, usize, i64) = match op {
        OpName::DNabla | OpName::EndConnection => {
            if degree == 0 {
                (end_operator_matrix(conn), 1, 1)
            } else {
                let dom = dim_end_form(bundle, algebroid, degree);
                let cod = dim_end_form(bundle, algebroid, degree + 1);
                let m = assemble_matrix(dom, cod, |k| {
                    let mut v = vec![Rat::zero(); dom];
                    v[k] = q(1);
                    let form = vec_to_end_form(&v, bundle, algebroid, degree);
                    end_form_to_vec(&d_nabla_end(conn, &form), bundle)
                });
                (m, degree + 1, 1)
            }
        }
        OpName::AdAlpha => {
            let alpha = conn.alpha_form();
            let dom = dim_end_form(bundle, algebroid, 0);
            let cod = dim_end_form(bundle, algebroid, 1);
            let m = assemble_matrix(dom, cod, |k| {
                let mut v = vec![Rat::zero(); dom];
                v[k] = q(1);
                let t = vec_to_end_form(&v, bundle, algebroid, 0);
                let br = crate::cedram::form_bracket(bundle, algebroid, &alpha, &t);
                end_form_to_vec(&br, bundle)
            });
            (m, 1, 0)
        }
        OpName::PhiTwists => {
            let dom = dim_end_form(bundle, algebroid, degree);
            let m = assemble_matrix(dom, dom, |k| {
                let mut v = vec![Rat::zero(); dom];
                v[k] = q(1);
                let form = vec_to_end_form(&v, bundle, algebroid, degree);
                end_form_to_vec(&twist_end_form(bundle, algebroid, &form), bundle)
            });
            (m, degree, 0)
        }
    };
    let matrix = match subspace_cols(bundle, algebroid, degree, subspace) {
        None => full_matrix,
        Some(b) => full_matrix.mul(&b),
    };
    let dom_dim = matrix.cols;
    Ok(LinOperator {
        domain: SpaceSpec {
            degree,
            subspace,
            dim: dom_dim,
        },
        codomain: SpaceSpec {
            degree: out_degree,
            subspace: Subspace::Full,
            dim: matrix.rows,
        },
        matrix,
        loss,
    })
}

/// The coefficient Laplacian of the degree-0 covariant operator: the Gram
/// form `D^T D` on full coordinates, or `B^T D^T D B` on the compatible
/// subspace. Symmetric positive-semidefinite; its kernel is exactly the
/// kernel of the operator. Loss 2.
pub fn laplacian(conn: &Connection, subspace: Subspace) -> LinOperator {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let d = end_operator_matrix(conn);
    let gram = match subspace_cols(bundle, algebroid, 0, subspace) {
        None => d.transpose().mul(&d),
        Some(b) => {
            let db = d.mul(&b);
            db.transpose().mul(&db)
        }
    };
    let dim = gram.rows;
    LinOperator {
        domain: SpaceSpec {
            degree: 0,
            subspace,
            dim,
        },
        codomain: SpaceSpec {
            degree: 0,
            subspace,
            dim,
        },
        matrix: gram,
        loss: 2,
    }
}

/// Orthogonal decomposition of an endomorphism-valued 1-form into an exact
/// part and a coadjoint-kernel part: `alpha = d beta + gamma` with
/// `D^T gamma = 0`, beta the minimum-norm solution of the normal equations.
/// The reconstruction is identically zero-residual and the parts are
/// orthogonal, both exactly.
pub fn coulomb_decompose(
    conn: &Connection,
    alpha: &LForm<PolyMatrix>,
) -> (TwistedMor, LForm<PolyMatrix>) {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let d = end_operator_matrix(conn);
    let a = end_form_to_vec(alpha, bundle);
    let rhs = d.transpose().mul_vec(&a);
    let delta = d.transpose().mul(&d);
    let beta_particular = delta
        .solve(&rhs)
        .expect("normal equations are always consistent");
    let kernel = delta.nullspace();
    let beta = if kernel.is_empty() {
        beta_particular
    } else {
        vec_sub(&beta_particular, &project_onto_span(&kernel, &beta_particular))
    };
    let gamma_vec = vec_sub(&a, &d.mul_vec(&beta));
    let beta_mor = TwistedMor::new(vec_to_mor(&beta, bundle));
    let gamma = vec_to_end_form(&gamma_vec, bundle, algebroid, 1);
    (beta_mor, gamma)
}

/// Tangent dimension of the slice: the kernel of the coadjoint inside the
/// compatible subspace of 1-forms.
pub fn slice_dimension(conn: &Connection) -> usize {
    slice_tangent_basis(conn).len()
}

/// Basis (full degree-1 coordinates) of `ker(D^T)` intersected with the
/// compatible subspace.
pub fn slice_tangent_basis(conn: &Connection) -> Vec<Vec<Rat>> {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let sub = end_subspace_basis(bundle, algebroid, 1);
    if sub.is_empty() {
        return Vec::new();
    }
    let d = end_operator_matrix(conn);
    let dim1 = dim_end_form(bundle, algebroid, 1);
    let b1 = QMatrix::from_columns(dim1, &sub);
    let constrained = d.transpose().mul(&b1);
    constrained
        .nullspace()
        .into_iter()
        .map(|c| b1.mul_vec(&c))
        .collect()
}

/// Basis (full degree-0 coordinates) of the reduced direction space: the
/// compatible subalgebra orthogonal to the identity-twist line.
pub fn gau0_basis(bundle: &HomBundle, algebroid: &HomAlgebroid) -> Vec<Vec<Rat>> {
    let sub = end_subspace_basis(bundle, algebroid, 0);
    if sub.is_empty() {
        return Vec::new();
    }
    let phie = phi_e_vector(bundle);
    let row = QMatrix::from_fn(1, sub.len(), |_, j| dot(&sub[j], &phie));
    row.nullspace()
        .into_iter()
        .map(|c| {
            let mut v = vec![Rat::zero(); phie.len()];
            for (ci, b) in c.iter().zip(&sub) {
                for (o, x) in v.iter_mut().zip(b) {
                    *o += ci * x;
                }
            }
            v
        })
        .collect()
}

/// The local product-chart differential `(A, B) -> d(A) + B` from the
/// reduced directions plus the slice tangent into compatible 1-forms.
/// Reports closure of the covariant operator on the subspace, injectivity,
/// and surjectivity; for an irreducible connection both must hold.
pub fn local_slice_check(conn: &Connection) -> ValidationReport {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let mut rep = ValidationReport::new();
    let order = conn.shape().order;
    let d = end_operator_matrix(conn);
    let dim1 = dim_end_form(bundle, algebroid, 1);
    let sub1 = end_subspace_basis(bundle, algebroid, 1);
    let b1 = QMatrix::from_columns(dim1, &sub1);
    let gau0 = gau0_basis(bundle, algebroid);
    let tangent = slice_tangent_basis(conn);

    // block matrix [D g | t] in full degree-1 coordinates
    let mut cols: Vec<Vec<Rat>> = Vec::new();
    for g in &gau0 {
        cols.push(d.mul_vec(g));
    }
    for t in &tangent {
        cols.push(t.clone());
    }
    let block = QMatrix::from_columns(dim1, &cols);

    // closure: image of the reduced directions stays inside the subspace
    let closure_ok = if gau0.is_empty() {
        true
    } else {
        let dg = QMatrix::from_columns(dim1, &cols[..gau0.len()]);
        let combined = b1.hstack(&dg);
        combined.rank() == b1.rank()
    };
    rep.push(CheckEntry::of(
        "slice/closure-on-subspace",
        closure_ok,
        "image leaves the compatible subspace".into(),
        order,
    ));

    let injective = block.nullspace().is_empty();
    rep.push(CheckEntry::of(
        "slice/differential-injective",
        injective,
        "nontrivial kernel of the chart differential".into(),
        order,
    ));

    let target_rank = b1.rank();
    let contained = b1.hstack(&block).rank() == target_rank;
    let surjective = contained && block.rank() == target_rank;
    rep.push(CheckEntry::of(
        "slice/differential-surjective",
        surjective,
        "chart differential does not cover the compatible 1-forms".into(),
        order,
    ));

    rep
}

/// Fiber metric candidate: symmetric with positive-definite constant term.
#[derive(Clone, Debug)]
pub struct MetricH {
    pub mat: PolyMatrix,
}

impl MetricH {
    pub fn new(mat: PolyMatrix) -> Result<MetricH, Error> {
        if mat.rows != mat.cols {
            return Err(Error::ShapeMismatch("metric matrix not square".into()));
        }
        if mat != mat.transpose() {
            return Err(Error::ShapeMismatch("metric matrix not symmetric".into()));
        }
        let c = mat.constant_matrix();
        if !is_positive_definite(&c) {
            return Err(Error::NotInvertible(
                "metric constant term is not positive definite".into(),
            ));
        }
        Ok(MetricH { mat })
    }
}

/// Leading-principal-minor test, exact.
fn is_positive_definite(m: &QMatrix) -> bool {
    for k in 1..=m.rows {
        let minor = QMatrix::from_fn(k, k, |i, j| m.get(i, j).clone());
        if det(&minor) <= q(0) {
            return false;
        }
    }
    true
}

fn det(m: &QMatrix) -> Rat {
    let n = m.rows;
    let mut work = m.clone();
    let mut result = q(1);
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !work.get(r, col).is_zero()) else {
            return q(0);
        };
        if p != col {
            for j in 0..n {
                let a = work.get(col, j).clone();
                let b = work.get(p, j).clone();
                work.set(col, j, b);
                work.set(p, j, a);
            }
            result = -result;
        }
        let pivot = work.get(col, col).clone();
        result *= pivot.clone();
        for r in col + 1..n {
            if work.get(r, col).is_zero() {
                continue;
            }
            let f = work.get(r, col) / &pivot;
            for j in col..n {
                let v = work.get(r, j) - &(work.get(col, j) * &f);
                work.set(r, j, v);
            }
        }
    }
    result
}

/// Compatibility of a metric with the bundle twist:
/// `Phi_E^T H Phi_E = phi*(H)` as an exact matrix identity.
pub fn validate_hom_metric(bundle: &HomBundle, h: &MetricH) -> bool {
    hom_metric_residual(bundle, h).is_zero()
}

pub fn hom_metric_residual(bundle: &HomBundle, h: &MetricH) -> PolyMatrix {
    let lhs = bundle
        .phi_e
        .transpose()
        .matmul(&h.mat)
        .matmul(&bundle.phi_e);
    let rhs = h.mat.subst_pow(&bundle.base, 1);
    lhs.sub(&rhs)
}

/// `ker(Delta) = ker(D)` as exact subspace equality: both nullspaces
/// mutually contained.
pub fn kernel_equality_holds(conn: &Connection) -> bool {
    let d = end_operator_matrix(conn);
    let delta = d.transpose().mul(&d);
    let kd = d.nullspace();
    let kdelta = delta.nullspace();
    if kd.len() != kdelta.len() {
        return false;
    }
    kd.iter().all(|v| vec_is_zero(&delta.mul_vec(v)))
        && kdelta.iter().all(|v| vec_is_zero(&d.mul_vec(v)))
}
