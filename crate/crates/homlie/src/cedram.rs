//! The twisted Chevalley-Eilenberg-de Rham complex on scalar forms, together
//! with the wedge product and bracket on endomorphism-valued forms.
//!
//! The scalar differential is the shared exterior operator instantiated
//! with the anchor action as covariant derivative and the dual twist as
//! form twist. Squaring it must vanish below the truncation ceiling on
//! every valid structure; the residual is returned verbatim so corrupted
//! structures show their defect.
//!
//! Forms of degree beyond the rank have no coefficient slots at all, so
//! wedge and differential outputs past the top degree are the empty form.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::algebroid::HomAlgebroid;
use crate::bundle::{HomBundle, Section};
use crate::coeff::{monomial_indices, poly_to_vec, vec_to_poly};
use crate::forms::{exterior_d, index_tuples, permutations_with_sign, DiffCtx, FormValue, LForm};
use crate::jet::{JetPoly, JetShape};
use crate::linalg::QMatrix;
use crate::polymat::PolyMatrix;
use crate::rat::{q, qr, Rat};

struct ScalarCtx<'a> {
    algebroid: &'a HomAlgebroid,
}

impl<'a> DiffCtx<JetPoly> for ScalarCtx<'a> {
    fn rank(&self) -> usize {
        self.algebroid.rank
    }
    fn shape(&self) -> JetShape {
        self.algebroid.shape()
    }
    fn cov_deriv(&self, xi: &Section, v: &JetPoly) -> JetPoly {
        self.algebroid.anchor_act(xi, v)
    }
    fn twist_form(&self, omega: &LForm<JetPoly>) -> LForm<JetPoly> {
        self.algebroid.phi_dagger(omega)
    }
    fn bracket(&self, xi: &Section, eta: &Section) -> Section {
        self.algebroid.bracket(xi, eta)
    }
    fn phi_l_inv(&self, xi: &Section) -> Section {
        self.algebroid.apply_phi_l_inv(xi)
    }
}

/// Twisted Chevalley-Eilenberg differential on scalar forms. Loss 1.
pub fn d_l(algebroid: &HomAlgebroid, omega: &LForm<JetPoly>) -> LForm<JetPoly> {
    exterior_d(&ScalarCtx { algebroid }, omega)
}

/// Degree-0 differential of a function.
pub fn d_l_fn(algebroid: &HomAlgebroid, f: &JetPoly) -> LForm<JetPoly> {
    d_l(algebroid, &LForm::new(algebroid.rank, 0, vec![f.clone()]))
}

/// d_L applied twice; zero below the ceiling on valid structures. Loss 2.
pub fn d_squared_residual(algebroid: &HomAlgebroid, omega: &LForm<JetPoly>) -> LForm<JetPoly> {
    d_l(algebroid, &d_l(algebroid, omega))
}

type DlKey = (u64, usize);
static DL_CACHE: OnceLock<Mutex<HashMap<DlKey, QMatrix>>> = OnceLock::new();

/// Exact coefficient-space matrix of d_L at the given degree, write-once
/// cached per (algebroid, degree). Coordinates follow the canonical basis
/// order: form tuples, then monomials.
pub fn d_l_matrix(algebroid: &HomAlgebroid, degree: usize) -> QMatrix {
    let key = (algebroid.id, degree);
    let cache = DL_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let shape = algebroid.shape();
    let n = algebroid.rank;
    let mons = monomial_indices(shape);
    let k = mons.len();
    let in_tuples = index_tuples(n, degree);
    let out_tuples = index_tuples(n, degree + 1).len();
    let dom = in_tuples.len() * k;
    let cod = out_tuples * k;
    let cols: Vec<Vec<Rat>> = (0..dom)
        .map(|col| {
            let tuple_idx = col / k;
            let mon_idx = col % k;
            let basis_form = LForm::from_fn(n, degree, |t| {
                if in_tuples[tuple_idx] == t {
                    JetPoly::monomial(shape, mons[mon_idx].clone(), q(1))
                } else {
                    JetPoly::zero(shape)
                }
            });
            let image = d_l(algebroid, &basis_form);
            let mut v = Vec::with_capacity(cod);
            for val in &image.vals {
                v.extend(poly_to_vec(val, &mons));
            }
            v
        })
        .collect();
    let m = QMatrix::from_columns(cod, &cols);
    cache.lock().unwrap().insert(key, m.clone());
    m
}

/// First nonzero residual entry of d_L o d_L over the full coefficient
/// basis at a degree, looking only below the ceiling (loss 2). `None` when
/// the composite vanishes there.
pub fn d_squared_matrix_residual(
    algebroid: &HomAlgebroid,
    degree: usize,
) -> Option<JetPoly> {
    let shape = algebroid.shape();
    let n = algebroid.rank;
    if degree + 2 > n {
        return None;
    }
    let m = d_l_matrix(algebroid, degree + 1).mul(&d_l_matrix(algebroid, degree));
    let mons = monomial_indices(shape);
    let k = mons.len();
    for col in 0..m.cols {
        let v = m.column(col);
        for chunk in v.chunks(k) {
            let p = vec_to_poly(chunk, &mons, shape);
            if !p.is_zero_up_to(shape.order - 2) {
                return Some(p);
            }
        }
    }
    None
}

fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}

/// Twisted wedge of endomorphism-valued forms: the printed shuffle formula
/// with coefficient 1/(p!q!) over the full symmetric group, values composed
/// through the inverse bundle twist. Loss 0.
pub fn wedge_end(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    omega: &LForm<PolyMatrix>,
    tau: &LForm<PolyMatrix>,
) -> LForm<PolyMatrix> {
    let n = algebroid.rank;
    let shape = bundle.shape();
    let p = omega.degree;
    let qd = tau.degree;
    let r = bundle.rank;
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    let norm = qr(1, (factorial(p) * factorial(qd)) as i64);
    let phi_e_inv_tw = bundle.phi_e_inv.subst_pow(&bundle.base, 1);
    LForm::from_fn(n, p + qd, |tuple| {
        let mut acc = PolyMatrix::zeros(r, r, shape);
        for (perm, sign) in permutations_with_sign(p + qd) {
            let first: Vec<Section> = perm[..p]
                .iter()
                .map(|&a| basis[tuple[a]].clone())
                .collect();
            let second: Vec<Section> = perm[p..]
                .iter()
                .map(|&a| basis[tuple[a]].clone())
                .collect();
            let w = omega.eval(&first);
            let t = tau.eval(&second);
            if w.is_zero() || t.is_zero() {
                continue;
            }
            // (W,1) o phi_E^{-1} o (T,1) has matrix W * phi*-twisted(Phi_E^{-1}) ... = W Phi_E^{-1}|_{phi*} T
            let prod = w.matmul(&phi_e_inv_tw).matmul(&t);
            let signed = if sign >= 0 { prod } else { prod.neg() };
            acc = acc.add(&signed);
        }
        acc.scale_rat(&norm)
    })
}

/// Untwisted wedge of a scalar form with a V-valued form (the graded module
/// structure), coefficient 1/(l!q!) over the full symmetric group.
pub fn wedge_scalar<V: FormValue>(
    shape: JetShape,
    alpha: &LForm<JetPoly>,
    beta: &LForm<V>,
) -> LForm<V> {
    let n = alpha.algebroid_rank;
    let l = alpha.degree;
    let qd = beta.degree;
    let template: Option<V> = beta.vals.first().map(|v| v.zero_like());
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    let norm = qr(1, (factorial(l) * factorial(qd)) as i64);
    LForm::from_fn(n, l + qd, |tuple| {
        let mut acc: Option<V> = None;
        for (perm, sign) in permutations_with_sign(l + qd) {
            let first: Vec<Section> = perm[..l]
                .iter()
                .map(|&a| basis[tuple[a]].clone())
                .collect();
            let second: Vec<Section> = perm[l..]
                .iter()
                .map(|&a| basis[tuple[a]].clone())
                .collect();
            let a = alpha.eval(&first);
            if a.is_zero() {
                continue;
            }
            let b = beta.eval(&second);
            let term = b.scale(&a);
            let term = if sign >= 0 { term } else { term.neg() };
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        acc.map(|v| v.scale_rat(&norm))
            .unwrap_or_else(|| template.clone().expect("wedge output needs a template"))
    })
}

/// Twisted commutator of two twisted morphisms (degree-0 bracket):
/// `Phi_E phi*(M Phi_E^{-1} N Phi_E^{-1} - N Phi_E^{-1} M Phi_E^{-1})`.
pub fn mor_commutator(bundle: &HomBundle, m: &PolyMatrix, n_mat: &PolyMatrix) -> PolyMatrix {
    let base = &bundle.base;
    let a = m.matmul(&bundle.phi_e_inv).matmul(n_mat).matmul(&bundle.phi_e_inv);
    let b = n_mat.matmul(&bundle.phi_e_inv).matmul(m).matmul(&bundle.phi_e_inv);
    bundle.phi_e.matmul(&a.sub(&b).subst_pow(base, 1))
}

/// Graded twisted bracket on endomorphism-valued forms. Degree-0 pairs use
/// the twisted commutator; in positive degrees the arguments are twisted by
/// the inverse algebroid twist (the printed display names the bundle twist
/// there, which does not typecheck on algebroid arguments). Loss 0.
pub fn form_bracket(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    omega: &LForm<PolyMatrix>,
    tau: &LForm<PolyMatrix>,
) -> LForm<PolyMatrix> {
    let n = algebroid.rank;
    let shape = bundle.shape();
    let r = bundle.rank;
    let p = omega.degree;
    let qd = tau.degree;
    if p == 0 && qd == 0 {
        return LForm::new(
            n,
            0,
            vec![mor_commutator(bundle, &omega.vals[0], &tau.vals[0])],
        );
    }
    let inv_basis: Vec<Section> = (0..n)
        .map(|i| algebroid.apply_phi_l_inv(&Section::basis(n, shape, i)))
        .collect();
    let norm = qr(1, (factorial(p) * factorial(qd)) as i64);
    LForm::from_fn(n, p + qd, |tuple| {
        let mut acc = PolyMatrix::zeros(r, r, shape);
        for (perm, sign) in permutations_with_sign(p + qd) {
            let first: Vec<Section> = perm[..p]
                .iter()
                .map(|&a| inv_basis[tuple[a]].clone())
                .collect();
            let second: Vec<Section> = perm[p..]
                .iter()
                .map(|&a| inv_basis[tuple[a]].clone())
                .collect();
            let w = omega.eval(&first);
            let t = tau.eval(&second);
            if w.is_zero() && t.is_zero() {
                continue;
            }
            let br = mor_commutator(bundle, &w, &t);
            let signed = if sign >= 0 { br } else { br.neg() };
            acc = acc.add(&signed);
        }
        acc.scale_rat(&norm)
    })
}
