//! Coefficient-space plumbing: deterministic bases for the
//! finite-dimensional spaces of ring elements, endomorphism-valued forms,
//! and their twisted subspaces, plus the vectorization maps that turn
//! geometric operators into exact rational matrices.
//!
//! Coordinate order is fixed everywhere: form tuples in combinatorial
//! order, then matrix entries row-major, then monomials graded-lex. That
//! order is what makes reports and matrices byte-deterministic.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num::Zero;

use crate::algebroid::HomAlgebroid;
use crate::bundle::HomBundle;
use crate::forms::{index_tuples, LForm};
use crate::jet::{JetPoly, JetShape, MultiIndex};
use crate::linalg::QMatrix;
use crate::polymat::PolyMatrix;
use crate::rat::Rat;

/// Monomial indices of the ring in graded-lex order.
pub fn monomial_indices(shape: JetShape) -> Vec<MultiIndex> {
    fn rec(vars: usize, budget: i64, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if cur.len() == vars {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for e in 0..=budget {
            cur.push(e as u32);
            rec(vars, budget - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(shape.vars, shape.order.max(0), &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Dimension of the ring as a rational vector space.
pub fn dim_ring(shape: JetShape) -> usize {
    monomial_indices(shape).len()
}

pub fn poly_to_vec(p: &JetPoly, mons: &[MultiIndex]) -> Vec<Rat> {
    mons.iter().map(|mi| p.coeff(mi)).collect()
}

pub fn vec_to_poly(v: &[Rat], mons: &[MultiIndex], shape: JetShape) -> JetPoly {
    let mut p = JetPoly::zero(shape);
    for (mi, c) in mons.iter().zip(v) {
        if !c.is_zero() {
            p = p.add(&JetPoly::monomial(shape, mi.clone(), c.clone()));
        }
    }
    p
}

/// Coordinate dimension of endomorphism-valued p-forms.
pub fn dim_end_form(bundle: &HomBundle, algebroid: &HomAlgebroid, degree: usize) -> usize {
    let r = bundle.rank;
    index_tuples(algebroid.rank, degree).len() * r * r * dim_ring(bundle.shape())
}

/// Flatten an endomorphism-valued form: tuple-major, then matrix entries
/// row-major, then monomials.
pub fn end_form_to_vec(
    form: &LForm<PolyMatrix>,
    bundle: &HomBundle,
) -> Vec<Rat> {
    let mons = monomial_indices(bundle.shape());
    let r = bundle.rank;
    let mut out = Vec::with_capacity(form.vals.len() * r * r * mons.len());
    for m in &form.vals {
        for i in 0..r {
            for j in 0..r {
                out.extend(poly_to_vec(m.get(i, j), &mons));
            }
        }
    }
    out
}

pub fn vec_to_end_form(
    v: &[Rat],
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    degree: usize,
) -> LForm<PolyMatrix> {
    let shape = bundle.shape();
    let mons = monomial_indices(shape);
    let r = bundle.rank;
    let k = mons.len();
    let tuples = index_tuples(algebroid.rank, degree);
    let mut vals = Vec::with_capacity(tuples.len());
    let mut off = 0;
    for _ in &tuples {
        let mut m = PolyMatrix::zeros(r, r, shape);
        for i in 0..r {
            for j in 0..r {
                m.set(i, j, vec_to_poly(&v[off..off + k], &mons, shape));
                off += k;
            }
        }
        vals.push(m);
    }
    LForm::new(algebroid.rank, degree, vals)
}

/// A degree-0 endomorphism-valued form is a single twisted-morphism matrix.
pub fn mor_to_vec(m: &PolyMatrix, bundle: &HomBundle) -> Vec<Rat> {
    let mons = monomial_indices(bundle.shape());
    let r = bundle.rank;
    let mut out = Vec::with_capacity(r * r * mons.len());
    for i in 0..r {
        for j in 0..r {
            out.extend(poly_to_vec(m.get(i, j), &mons));
        }
    }
    out
}

pub fn vec_to_mor(v: &[Rat], bundle: &HomBundle) -> PolyMatrix {
    let shape = bundle.shape();
    let mons = monomial_indices(shape);
    let r = bundle.rank;
    let k = mons.len();
    let mut m = PolyMatrix::zeros(r, r, shape);
    let mut off = 0;
    for i in 0..r {
        for j in 0..r {
            m.set(i, j, vec_to_poly(&v[off..off + k], &mons, shape));
            off += k;
        }
    }
    m
}

/// Unit coordinate vectors realized as endomorphism-valued forms, in the
/// canonical order. Assembling an operator column by column over these is
/// how every exact matrix in the crate is produced.
pub fn end_form_basis(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    degree: usize,
) -> Vec<LForm<PolyMatrix>> {
    let dim = dim_end_form(bundle, algebroid, degree);
    (0..dim)
        .map(|k| {
            let mut v = vec![Rat::zero(); dim];
            v[k] = crate::rat::q(1);
            vec_to_end_form(&v, bundle, algebroid, degree)
        })
        .collect()
}

/// The twisted-commutation constraint cutting out the compatible subspace of
/// endomorphism-valued p-forms.
///
/// Degree 0: `M phi*(Phi_E) - Phi_E phi*(M) = 0`.
/// Degree p: per sorted tuple T the slot family must satisfy
/// `sum_J Phi_L^{-1}[.,T] Phi_E phi*(M_J) = M_T phi*(Phi_E)` expanded over
/// the frame; concretely we impose the residual of
/// `(dagger (x) twist) o D = D o twist` evaluated on basis tuples.
fn subspace_constraint_matrix(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    degree: usize,
) -> QMatrix {
    let dim = dim_end_form(bundle, algebroid, degree);
    let basis = end_form_basis(bundle, algebroid, degree);
    let mut cols: Vec<Vec<Rat>> = Vec::with_capacity(dim);
    for b in &basis {
        let resid = end_subspace_residual(bundle, algebroid, b);
        cols.push(end_form_to_vec(&resid, bundle));
    }
    let rows = if cols.is_empty() { 0 } else { cols[0].len() };
    QMatrix::from_columns(rows, &cols)
}

/// Residual of the compatibility condition for an endomorphism-valued form,
/// linear in the form. A form is compatible exactly when the induced twist
/// fixes it, so the residual is `twist(form) - form`. Exact (no derivatives).
pub fn end_subspace_residual(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    form: &LForm<PolyMatrix>,
) -> LForm<PolyMatrix> {
    twist_end_form(bundle, algebroid, form).sub(form)
}

/// The induced twist on endomorphism-valued forms:
/// slotwise conjugation by the bundle twist and argument twisting by the
/// inverse algebroid twist.
pub fn twist_end_form(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    form: &LForm<PolyMatrix>,
) -> LForm<PolyMatrix> {
    let base = &bundle.base;
    let n = algebroid.rank;
    let shape = bundle.shape();
    let inv_cols: Vec<Vec<JetPoly>> = (0..n)
        .map(|i| {
            algebroid
                .apply_phi_l_inv(&crate::bundle::Section::basis(n, shape, i))
                .comps
        })
        .collect();
    LForm::from_fn(n, form.degree, |tuple| {
        // multilinear evaluation of the form at the inverse-twisted frame
        let args: Vec<crate::bundle::Section> = tuple
            .iter()
            .map(|&i| crate::bundle::Section::new(inv_cols[i].clone()))
            .collect();
        let inner = form.eval(&args);
        // conjugate: Phi_E phi*(inner) phi*(Phi_E^{-1})
        bundle
            .phi_e
            .matmul(&inner.subst_pow(base, 1))
            .matmul(&bundle.phi_e_inv.subst_pow(base, 1))
    })
}

type SubspaceKey = (u64, u64, usize);
static SUBSPACE_CACHE: OnceLock<Mutex<HashMap<SubspaceKey, Vec<Vec<Rat>>>>> = OnceLock::new();

/// Basis (full coordinates) of the compatible subspace of
/// endomorphism-valued p-forms. Write-once cached per (bundle, algebroid,
/// degree).
pub fn end_subspace_basis(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    degree: usize,
) -> Vec<Vec<Rat>> {
    let key = (bundle.id, algebroid.id, degree);
    let cache = SUBSPACE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let m = subspace_constraint_matrix(bundle, algebroid, degree);
    let basis = m.nullspace();
    cache.lock().unwrap().insert(key, basis.clone());
    basis
}

/// Assemble the exact matrix of a linear operator given by its action on
/// the canonical basis of the domain.
pub fn assemble_matrix(
    domain_dim: usize,
    codomain_dim: usize,
    mut apply: impl FnMut(usize) -> Vec<Rat>,
) -> QMatrix {
    let cols: Vec<Vec<Rat>> = (0..domain_dim)
        .map(|k| {
            let v = apply(k);
            assert_eq!(v.len(), codomain_dim, "operator column length mismatch");
            v
        })
        .collect();
    QMatrix::from_columns(codomain_dim, &cols)
}
