//! The twisted gauge group and its action on connections.
//!
//! Group elements are invertible twisted morphisms commuting with the
//! bundle twist; the product composes through the inverse twist, the
//! identity is the twist itself, and the inverse conjugates the matrix
//! inverse by the twist. The action on a connection is computed in closed
//! form relative to the trivial connection; the definitional route is also
//! provided so the two can be compared at the budget.
//!
//! Irreducibility is decided by the exact kernel of the induced
//! endomorphism connection over the full endomorphism space; the
//! intersection with the compatible subalgebra is reported alongside.

use num::Zero;

use crate::bundle::{in_end_phi_e, HomBundle, Section, TwistedMor};
use crate::coeff::{
    dim_end_form, end_form_to_vec, end_subspace_basis, mor_to_vec, vec_to_mor,
};
use crate::connection::{end_connection_apply, Connection};
use crate::error::Error;
use crate::forms::LForm;
use crate::linalg::{span_intersection, vec_add, vec_is_zero, vec_scale, vec_sub, QMatrix};
use crate::polymat::{PolyMatrix, SemiLin};
use crate::rat::{q, Rat};

/// Invertible twisted morphism commuting with the bundle twist.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeElement {
    pub mor: TwistedMor,
}

impl GaugeElement {
    pub fn new(bundle: &HomBundle, mor: TwistedMor) -> Result<GaugeElement, Error> {
        if mor.mat.rows != bundle.rank || mor.mat.cols != bundle.rank {
            return Err(Error::ShapeMismatch("gauge element rank mismatch".into()));
        }
        mor.mat
            .invert()
            .map_err(|_| Error::NotInvertible("gauge element matrix".into()))?;
        if !in_end_phi_e(bundle, &mor) {
            return Err(Error::ShapeMismatch(
                "gauge element does not commute with the bundle twist".into(),
            ));
        }
        Ok(GaugeElement { mor })
    }

    /// The group identity: the bundle twist itself.
    pub fn identity(bundle: &HomBundle) -> GaugeElement {
        GaugeElement {
            mor: bundle.phi_e_mor(),
        }
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.mor.mat
    }

    /// Scalar multiples of the identity form the central line.
    pub fn is_scalar_multiple_of_identity(&self, bundle: &HomBundle) -> bool {
        scalar_ratio_to(&self.mor.mat, &bundle.phi_e).is_some()
    }
}

/// If `m = c * reference` for a rational c, return c.
pub fn scalar_ratio_to(m: &PolyMatrix, reference: &PolyMatrix) -> Option<Rat> {
    let mut ratio: Option<Rat> = None;
    for i in 0..m.rows {
        for j in 0..m.cols {
            let a = m.get(i, j);
            let b = reference.get(i, j);
            if b.is_zero() {
                if !a.is_zero() {
                    return None;
                }
                continue;
            }
            // compare term by term against c * b
            let c = match &ratio {
                Some(c) => c.clone(),
                None => {
                    let (mi, cb) = b.terms().next().unwrap();
                    let ca = a.coeff(mi);
                    let c = ca / cb.clone();
                    ratio = Some(c.clone());
                    c
                }
            };
            if a != &b.scale(&c) {
                return None;
            }
        }
    }
    ratio.or(Some(q(0)))
}

/// Group product: compose through the inverse bundle twist.
pub fn gauge_mul(bundle: &HomBundle, a: &GaugeElement, b: &GaugeElement) -> GaugeElement {
    let base = &bundle.base;
    let composed = a
        .mor
        .semilin()
        .compose(base, &bundle.twist_inv())
        .compose(base, &b.mor.semilin());
    debug_assert_eq!(composed.twist, 1);
    GaugeElement {
        mor: TwistedMor::new(composed.mat),
    }
}

/// Group inverse: `Phi_E * M^{-1}|no-twist * Phi_E` through the twist
/// calculus; the product with the original is the identity exactly.
pub fn gauge_inv(bundle: &HomBundle, a: &GaugeElement) -> Result<GaugeElement, Error> {
    let base = &bundle.base;
    let m_inv = a.mor.mat.invert()?;
    // psi^{-1} as a map is ((phi*)^{-1}(M^{-1}), -1)
    let inv_map = SemiLin::new(m_inv.subst_pow(base, -1), -1);
    let composed = bundle
        .twist()
        .compose(base, &inv_map)
        .compose(base, &bundle.twist());
    debug_assert_eq!(composed.twist, 1);
    Ok(GaugeElement {
        mor: TwistedMor::new(composed.mat),
    })
}

/// Transformed connection, in closed form relative to the trivial
/// connection: the inverse-conjugated flat derivative of the element plus
/// the conjugated slot matrices. The result is again a valid connection.
/// Loss 1.
pub fn gauge_act(psi: &GaugeElement, conn: &Connection) -> Result<Connection, Error> {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let base = &bundle.base;
    let n = algebroid.rank;
    let tinv = bundle.twist_inv();
    let triv = Connection::trivial(bundle.clone(), algebroid.clone());
    let flat_deriv = end_connection_apply(&triv, &psi.mor);
    let w = gauge_inv(bundle, psi)?;
    let w_semi = w.mor.semilin();
    let mut slots: Vec<PolyMatrix> = Vec::with_capacity(n);
    for i in 0..n {
        // omega(phi_L e_i): weight the slot matrices by the twist column
        let mut inner = PolyMatrix::zeros(bundle.rank, bundle.rank, bundle.shape());
        for j in 0..n {
            inner = inner.add(&flat_deriv.vals[j].scale_poly(algebroid.phi_l.get(j, i)));
        }
        // post-compose with phi_E, then pull back through phi_E^{-1}
        let step = SemiLin::new(inner, 1).compose(base, &bundle.twist());
        let v = tinv.compose(base, &step);
        debug_assert_eq!(v.twist, 1);
        let term1 = w_semi.compose(base, &tinv).compose(base, &v);
        // conjugated alpha slot
        let a_slot = SemiLin::new(conn.alpha[i].clone(), conn.alpha_twist);
        let term2 = w_semi
            .compose(base, &tinv)
            .compose(base, &a_slot)
            .compose(base, &tinv)
            .compose(base, &psi.mor.semilin());
        debug_assert_eq!(term1.twist, 1);
        debug_assert_eq!(term2.twist, conn.alpha_twist);
        slots.push(term1.mat.add(&term2.mat));
    }
    Connection::new(bundle.clone(), algebroid.clone(), slots)
}

/// The definitional route: conjugate the full covariant differential by the
/// element, evaluated on the constant frame. Returned as the list of
/// E-valued 1-forms on the frame, for comparison against the closed form.
pub fn gauge_act_on_frame(psi: &GaugeElement, conn: &Connection) -> Vec<LForm<Section>> {
    let bundle = &conn.bundle;
    let base = &bundle.base;
    let r = bundle.rank;
    let shape = bundle.shape();
    let tinv = bundle.twist_inv();
    let w = gauge_inv(bundle, psi).expect("gauge element is invertible");
    let post = w.mor.semilin().compose(base, &tinv);
    let pre = tinv.compose(base, &psi.mor.semilin());
    debug_assert_eq!(post.twist, 0);
    debug_assert_eq!(pre.twist, 0);
    (0..r)
        .map(|k| {
            let b_k = Section::basis(r, shape, k);
            let u = Section::new(pre.apply(base, &b_k.comps));
            let omega = conn.apply(&u);
            LForm::new(
                conn.algebroid.rank,
                1,
                omega
                    .vals
                    .iter()
                    .map(|sec| Section::new(post.apply(base, &sec.comps)))
                    .collect(),
            )
        })
        .collect()
}

/// Exact kernel of the induced endomorphism connection over the full
/// endomorphism coefficient space. The identity twist always lies in it.
pub fn end_kernel(conn: &Connection) -> Vec<TwistedMor> {
    end_kernel_vectors(conn)
        .into_iter()
        .map(|v| TwistedMor::new(vec_to_mor(&v, &conn.bundle)))
        .collect()
}

pub fn end_kernel_vectors(conn: &Connection) -> Vec<Vec<Rat>> {
    end_operator_matrix(conn).nullspace()
}

/// Exact matrix of `T -> [nabla, T]` from degree-0 to degree-1 coordinates.
pub fn end_operator_matrix(conn: &Connection) -> QMatrix {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let dom = dim_end_form(bundle, algebroid, 0);
    let cod = dim_end_form(bundle, algebroid, 1);
    crate::coeff::assemble_matrix(dom, cod, |k| {
        let mut v = vec![Rat::zero(); dom];
        v[k] = q(1);
        let t = TwistedMor::new(vec_to_mor(&v, bundle));
        end_form_to_vec(&end_connection_apply(conn, &t), bundle)
    })
}

/// Kernel dimension of the operator with output rows restricted below the
/// truncation ceiling (the operator loses one order). Unlike the
/// full-precision kernel, this dimension is transported by the gauge
/// action: the transport identities of the induced connection hold below
/// the ceiling, and conjugation by unit-constant-term matrices preserves
/// the lowest nonzero degree.
pub fn end_kernel_budget_dim(conn: &Connection) -> usize {
    let m = end_operator_matrix(conn);
    let shape = conn.bundle.shape();
    let mons = crate::coeff::monomial_indices(shape);
    let keep: Vec<usize> = (0..m.rows)
        .filter(|&row| mons[row % mons.len()].degree() < shape.order)
        .collect();
    let restricted = QMatrix::from_fn(keep.len(), m.cols, |i, j| m.get(keep[i], j).clone());
    restricted.nullspace().len()
}

/// Kernel dimensions: over the full endomorphism space, and intersected
/// with the twist-compatible subalgebra.
pub fn end_kernel_dims(conn: &Connection) -> (usize, usize) {
    let kernel = end_kernel_vectors(conn);
    let sub = end_subspace_basis(&conn.bundle, &conn.algebroid, 0);
    let dim = dim_end_form(&conn.bundle, &conn.algebroid, 0);
    let inter = span_intersection(&kernel, &sub, dim);
    (kernel.len(), inter.len())
}

/// Irreducibility criterion: the kernel is exactly the line through the
/// identity twist.
pub fn is_irreducible(conn: &Connection) -> bool {
    end_kernel_vectors(conn).len() == 1
}

/// Exhaustive isotropy search over small rational combinations of the
/// kernel basis. Every fixing element arises as the group inverse of an
/// invertible, twist-compatible kernel element; the search enumerates a
/// grid, verifies the fixed-point property by acting, and reports whether
/// every fixer found is a scalar multiple of the identity.
pub struct IsotropySearch {
    pub fixers_found: usize,
    pub all_scalar: bool,
    pub non_scalar_witness: Option<PolyMatrix>,
}

pub fn isotropy_brute_force(conn: &Connection, grid: &[i64]) -> IsotropySearch {
    let bundle = &conn.bundle;
    let kernel = end_kernel_vectors(conn);
    let k = kernel.len();
    let mut found = 0usize;
    let mut all_scalar = true;
    let mut witness = None;
    if k == 0 {
        return IsotropySearch {
            fixers_found: 0,
            all_scalar: true,
            non_scalar_witness: None,
        };
    }
    let mut combo = vec![0usize; k];
    let total = grid.len().pow(k as u32);
    for idx in 0..total {
        let mut rem = idx;
        for c in combo.iter_mut() {
            *c = rem % grid.len();
            rem /= grid.len();
        }
        let mut vecsum = vec![Rat::zero(); kernel[0].len()];
        for (ci, v) in combo.iter().zip(&kernel) {
            let w = vec_scale(v, &q(grid[*ci]));
            for (o, x) in vecsum.iter_mut().zip(&w) {
                *o += x;
            }
        }
        if vecsum.iter().all(|x| x.is_zero()) {
            continue;
        }
        let kappa_mat = vec_to_mor(&vecsum, bundle);
        let kappa = TwistedMor::new(kappa_mat);
        if kappa.mat.invert().is_err() || !in_end_phi_e(bundle, &kappa) {
            continue;
        }
        let kappa_el = GaugeElement { mor: kappa };
        let Ok(psi) = gauge_inv(bundle, &kappa_el) else {
            continue;
        };
        let Ok(acted) = gauge_act(&psi, conn) else {
            continue;
        };
        if connections_equal(&acted, conn, 1) {
            found += 1;
            if !psi.is_scalar_multiple_of_identity(bundle) {
                all_scalar = false;
                if witness.is_none() {
                    witness = Some(psi.mor.mat.clone());
                }
            }
        }
    }
    IsotropySearch {
        fixers_found: found,
        all_scalar,
        non_scalar_witness: witness,
    }
}

/// Connections agree when their slot matrices agree at the budget.
pub fn connections_equal(a: &Connection, b: &Connection, loss: i64) -> bool {
    if a.alpha_twist != b.alpha_twist {
        return false;
    }
    a.alpha
        .iter()
        .zip(&b.alpha)
        .all(|(x, y)| x.budget_eq(y, loss))
}

/// Solve the orbit equation `act(psi, from) = to` for a gauge element.
///
/// Multiplying the closed form through by the unknown turns the orbit
/// equation into an exact homogeneous linear system over the compatible
/// subalgebra:
/// `psi . alpha_to = V(psi) + alpha_from . psi`
/// with `V` the twisted flat derivative term, linear in `psi`. The solution
/// space is searched for an invertible element over the basis vectors and
/// deterministic rational combinations; every candidate is verified by
/// acting before it is returned.
pub fn find_gauge_transform(
    from: &Connection,
    to: &Connection,
) -> Option<GaugeElement> {
    let bundle = &from.bundle;
    let algebroid = &from.algebroid;
    let base = &bundle.base;
    let n = algebroid.rank;
    let tinv = bundle.twist_inv();
    let triv = Connection::trivial(bundle.clone(), algebroid.clone());
    let sub_basis = end_subspace_basis(bundle, algebroid, 0);
    if sub_basis.is_empty() {
        return None;
    }
    let residual_of = |psi_mat: &PolyMatrix| -> LForm<PolyMatrix> {
        let psi_semi = SemiLin::new(psi_mat.clone(), 1);
        let flat = end_connection_apply(&triv, &TwistedMor::new(psi_mat.clone()));
        LForm::new(
            n,
            1,
            (0..n)
                .map(|i| {
                    // psi . alpha_to[i]
                    let lhs = psi_semi
                        .compose(base, &tinv)
                        .compose(base, &SemiLin::new(to.alpha[i].clone(), to.alpha_twist));
                    // V(psi)[i]
                    let mut inner =
                        PolyMatrix::zeros(bundle.rank, bundle.rank, bundle.shape());
                    for j in 0..n {
                        inner = inner.add(&flat.vals[j].scale_poly(algebroid.phi_l.get(j, i)));
                    }
                    let v = tinv.compose(base, &SemiLin::new(inner, 1).compose(base, &bundle.twist()));
                    // alpha_from[i] . psi
                    let rhs2 = SemiLin::new(from.alpha[i].clone(), from.alpha_twist)
                        .compose(base, &tinv)
                        .compose(base, &psi_semi);
                    lhs.mat.sub(&v.mat).sub(&rhs2.mat)
                })
                .collect(),
        )
    };
    // assemble the linear system over the subalgebra coordinates
    let cols: Vec<Vec<Rat>> = sub_basis
        .iter()
        .map(|v| {
            let m = vec_to_mor(v, bundle);
            end_form_to_vec(&residual_of(&m), bundle)
        })
        .collect();
    let rows = cols.first().map(|c| c.len()).unwrap_or(0);
    let system = QMatrix::from_columns(rows, &cols);
    let solutions = system.nullspace();
    if solutions.is_empty() {
        return None;
    }
    // Candidate combinations, all deterministic: each basis solution; the
    // identity twist when it solves the system; pairwise sums and
    // differences; moment-curve mixes; and seeded small-integer mixes.
    // (The moment curve alone is not enough: for a rank-2 constant
    // subalgebra its combinations have identically zero determinant.)
    let dim_a = crate::coeff::dim_ring(bundle.shape());
    let mut candidates: Vec<Vec<Rat>> = solutions.clone();
    {
        let b1 = QMatrix::from_columns(phi_e_vector(bundle).len(), &sub_basis);
        if let Some(c) = b1.solve(&phi_e_vector(bundle)) {
            if vec_is_zero(&system.mul_vec(&c)) {
                candidates.push(c);
            }
        }
    }
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            candidates.push(vec_add(&solutions[i], &solutions[j]));
            candidates.push(vec_sub(&solutions[i], &solutions[j]));
        }
    }
    let max_t = (bundle.rank * dim_a + 1) as i64;
    for t in 1..=max_t {
        let mut mix = vec![Rat::zero(); solutions[0].len()];
        let mut weight = q(1);
        for s in &solutions {
            for (o, x) in mix.iter_mut().zip(s) {
                *o += &weight * x;
            }
            weight *= q(t);
        }
        candidates.push(mix);
    }
    {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0b17);
        for _ in 0..32 {
            let mix: Vec<Rat> = (0..solutions[0].len()).map(|_| Rat::zero()).collect();
            let mut mix = mix;
            for s in &solutions {
                let w = q(rng.gen_range(-3i64..=3));
                for (o, x) in mix.iter_mut().zip(s) {
                    *o += &w * x;
                }
            }
            candidates.push(mix);
        }
    }
    for cand in candidates {
        // expand into full endomorphism coordinates
        let mut full = vec![Rat::zero(); sub_basis[0].len()];
        for (c, b) in cand.iter().zip(&sub_basis) {
            for (o, x) in full.iter_mut().zip(b) {
                *o += c * x;
            }
        }
        if full.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mat = vec_to_mor(&full, bundle);
        let Ok(psi) = GaugeElement::new(bundle, TwistedMor::new(mat)) else {
            continue;
        };
        let Ok(acted) = gauge_act(&psi, from) else {
            continue;
        };
        if connections_equal(&acted, to, 1) {
            return Some(psi);
        }
    }
    None
}

/// Coordinates of the identity twist in the full endomorphism space.
pub fn phi_e_vector(bundle: &HomBundle) -> Vec<Rat> {
    mor_to_vec(&bundle.phi_e, bundle)
}

/// Helper for tests and checks: a gauge element from a constant matrix.
pub fn gauge_from_mat(bundle: &HomBundle, mat: PolyMatrix) -> Result<GaugeElement, Error> {
    GaugeElement::new(bundle, TwistedMor::new(mat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{JetPoly, JetShape};
    use crate::scenario::fixtures;

    fn sym(shape: JetShape, p: JetPoly) -> PolyMatrix {
        PolyMatrix::from_rows(shape, vec![vec![p]]).unwrap()
    }

    #[test]
    fn gauge_mul_examples() {
        let m = fixtures::s1();
        let shape = m.bundle.shape();
        // rank-1 with unit twist: symbols multiply
        let a = GaugeElement::new(&m.bundle, TwistedMor::new(sym(shape, JetPoly::constant(shape, q(2))))).unwrap();
        let b = GaugeElement::new(&m.bundle, TwistedMor::new(sym(shape, JetPoly::constant(shape, q(3))))).unwrap();
        let ab = gauge_mul(&m.bundle, &a, &b);
        assert_eq!(ab.matrix().get(0, 0), &JetPoly::constant(shape, q(6)));
        // identity law
        let id = GaugeElement::identity(&m.bundle);
        assert_eq!(gauge_mul(&m.bundle, &a, &id), a);
        assert_eq!(gauge_mul(&m.bundle, &id, &a), a);
        // S3 constants multiply as matrices
        let m3 = fixtures::s3();
        let shape3 = m3.bundle.shape();
        let c1 = PolyMatrix::from_fn(2, 2, shape3, |i, j| {
            JetPoly::constant(shape3, q([[1, 1], [0, 1]][i][j]))
        });
        let c2 = PolyMatrix::from_fn(2, 2, shape3, |i, j| {
            JetPoly::constant(shape3, q([[2, 0], [0, 1]][i][j]))
        });
        let g1 = gauge_from_mat(&m3.bundle, c1.clone()).unwrap();
        let g2 = gauge_from_mat(&m3.bundle, c2.clone()).unwrap();
        let g12 = gauge_mul(&m3.bundle, &g1, &g2);
        assert_eq!(g12.matrix(), &c1.matmul(&c2));
    }

    #[test]
    fn gauge_inv_examples() {
        // S4 has the identity base map, so polynomial symbols are allowed
        let m = fixtures::s4_classical();
        let shape = m.bundle.shape();
        let x = JetPoly::var(shape, 0).unwrap();
        let one_plus_x = JetPoly::one(shape).add(&x);
        let diag = PolyMatrix::from_fn(2, 2, shape, |i, j| {
            if i != j {
                JetPoly::zero(shape)
            } else if i == 0 {
                one_plus_x.clone()
            } else {
                JetPoly::one(shape)
            }
        });
        let g = gauge_from_mat(&m.bundle, diag).unwrap();
        let gi = gauge_inv(&m.bundle, &g).unwrap();
        // geometric series in the corner
        let x2 = x.mul(&x);
        let x3 = x2.mul(&x);
        assert_eq!(
            gi.matrix().get(0, 0),
            &JetPoly::one(shape).sub(&x).add(&x2).sub(&x3)
        );
        // product with the inverse is the identity element
        let prod = gauge_mul(&m.bundle, &g, &gi);
        assert_eq!(prod, GaugeElement::identity(&m.bundle));
        // identity is self-inverse, double inverse returns
        let id = GaugeElement::identity(&m.bundle);
        assert_eq!(gauge_inv(&m.bundle, &id).unwrap(), id);
        assert_eq!(gauge_inv(&m.bundle, &gi).unwrap(), g);
    }

    #[test]
    fn gauge_act_identity_fixes() {
        let m = fixtures::s3();
        let conn = m.connections.get("upper").unwrap();
        let id = GaugeElement::identity(&m.bundle);
        let acted = gauge_act(&id, conn).unwrap();
        assert!(connections_equal(&acted, conn, 1));
    }

    #[test]
    fn gauge_act_constant_conjugation() {
        let m = fixtures::s3();
        let shape = m.bundle.shape();
        let conn = m.connections.get("upper").unwrap();
        let diag = PolyMatrix::from_fn(2, 2, shape, |i, j| {
            if i != j {
                JetPoly::zero(shape)
            } else {
                JetPoly::constant(shape, q(if i == 0 { 1 } else { 2 }))
            }
        });
        let g = gauge_from_mat(&m.bundle, diag).unwrap();
        let acted = gauge_act(&g, conn).unwrap();
        // expected: M^{-1} A M with A = e_{01}
        assert_eq!(acted.alpha[0].get(0, 1), &JetPoly::constant(shape, q(2)));
        assert!(acted.alpha[0].get(0, 0).is_zero());
        assert!(acted.alpha[0].get(1, 0).is_zero());
        assert!(acted.alpha[0].get(1, 1).is_zero());
    }

    #[test]
    fn s1_gauge_elements_fix_everything() {
        let m = fixtures::s1();
        let shape = m.bundle.shape();
        let conn = m.connections.get("unit").unwrap();
        let g = gauge_from_mat(&m.bundle, sym(shape, JetPoly::constant(shape, q(5)))).unwrap();
        let acted = gauge_act(&g, conn).unwrap();
        assert!(connections_equal(&acted, conn, 1));
    }

    #[test]
    fn gauge_act_well_defined() {
        let m = fixtures::s3();
        let conn = m.connections.get("upper").unwrap();
        let g = gauge_from_mat(
            &m.bundle,
            PolyMatrix::from_fn(2, 2, m.bundle.shape(), |i, j| {
                JetPoly::constant(m.bundle.shape(), q([[2, 1], [1, 1]][i][j]))
            }),
        )
        .unwrap();
        let acted = gauge_act(&g, conn).unwrap();
        assert!(acted.validate().all_pass());
    }

    #[test]
    fn closed_form_matches_definition() {
        let m = fixtures::s4_classical();
        let shape = m.bundle.shape();
        let x = JetPoly::var(shape, 0).unwrap();
        let conn = m.connections.get("shear").unwrap();
        let g = gauge_from_mat(
            &m.bundle,
            PolyMatrix::from_fn(2, 2, shape, |i, j| {
                if i == j {
                    JetPoly::one(shape)
                } else if (i, j) == (0, 1) {
                    x.clone()
                } else {
                    JetPoly::zero(shape)
                }
            }),
        )
        .unwrap();
        let acted = gauge_act(&g, conn).unwrap();
        let frame_def = gauge_act_on_frame(&g, conn);
        for (k, omega_def) in frame_def.iter().enumerate() {
            let b_k = Section::basis(2, shape, k);
            let omega_closed = acted.apply(&b_k);
            assert!(omega_closed.budget_eq(omega_def, shape, 1));
        }
    }

    #[test]
    fn kernel_dimensions() {
        let m1 = fixtures::s1();
        let triv1 = Connection::trivial(m1.bundle.clone(), m1.algebroid.clone());
        assert_eq!(end_kernel_dims(&triv1), (1, 1));
        assert!(is_irreducible(&triv1));
        let m3 = fixtures::s3();
        let triv3 = Connection::trivial(m3.bundle.clone(), m3.algebroid.clone());
        let (full, sub) = end_kernel_dims(&triv3);
        assert!(full >= 2);
        assert_eq!(full, 4);
        assert_eq!(sub, 4);
        assert!(!is_irreducible(&triv3));
        let m2 = fixtures::s2();
        let triv2 = Connection::trivial(m2.bundle.clone(), m2.algebroid.clone());
        assert_eq!(end_kernel_dims(&triv2), (1, 1));
        assert!(is_irreducible(&triv2));
        // kernel always contains the identity twist
        let kv = end_kernel_vectors(&triv3);
        let phie = phi_e_vector(&m3.bundle);
        let dim = kv[0].len();
        let inter = span_intersection(&kv, &[phie], dim);
        assert_eq!(inter.len(), 1);
    }

    #[test]
    fn s3_upper_kernel_is_commutant() {
        let m = fixtures::s3();
        let conn = m.connections.get("upper").unwrap();
        let (full, sub) = end_kernel_dims(conn);
        assert_eq!(full, 2);
        assert_eq!(sub, 2);
        assert!(!is_irreducible(conn));
    }

    #[test]
    fn isotropy_matches_kernel_criterion() {
        let m1 = fixtures::s1();
        let triv1 = Connection::trivial(m1.bundle.clone(), m1.algebroid.clone());
        let res = isotropy_brute_force(&triv1, &[-1, 0, 1, 2]);
        assert!(res.fixers_found > 0);
        assert!(res.all_scalar);
        let m3 = fixtures::s3();
        let triv3 = Connection::trivial(m3.bundle.clone(), m3.algebroid.clone());
        let res3 = isotropy_brute_force(&triv3, &[0, 1, 2]);
        assert!(!res3.all_scalar);
    }

    #[test]
    fn orbit_solver_roundtrip() {
        let m = fixtures::s3();
        let conn = m.connections.get("upper").unwrap();
        let g = gauge_from_mat(
            &m.bundle,
            PolyMatrix::from_fn(2, 2, m.bundle.shape(), |i, j| {
                JetPoly::constant(m.bundle.shape(), q([[1, 2], [1, 3]][i][j]))
            }),
        )
        .unwrap();
        let to = gauge_act(&g, conn).unwrap();
        let found = find_gauge_transform(conn, &to).expect("orbit solver must recover");
        let acted = gauge_act(&found, conn).unwrap();
        assert!(connections_equal(&acted, &to, 1));
    }

    #[test]
    fn orbit_solver_distinguishes_kernel_dims() {
        let m = fixtures::s3();
        let triv = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let upper = m.connections.get("upper").unwrap();
        assert_ne!(end_kernel_dims(&triv).0, end_kernel_dims(upper).0);
        assert!(find_gauge_transform(&triv, upper).is_none());
    }

    #[test]
    fn isotropy_conjugation_transport() {
        let m = fixtures::s3();
        let conn = m.connections.get("upper").unwrap();
        let shape = m.bundle.shape();
        // chi = I + N fixes the upper connection
        let chi = gauge_from_mat(
            &m.bundle,
            PolyMatrix::from_fn(2, 2, shape, |i, j| {
                JetPoly::constant(shape, q([[1, 1], [0, 1]][i][j]))
            }),
        )
        .unwrap();
        assert!(connections_equal(&gauge_act(&chi, conn).unwrap(), conn, 1));
        let psi = gauge_from_mat(
            &m.bundle,
            PolyMatrix::from_fn(2, 2, shape, |i, j| {
                JetPoly::constant(shape, q([[2, 1], [1, 1]][i][j]))
            }),
        )
        .unwrap();
        let transported = gauge_mul(
            &m.bundle,
            &gauge_inv(&m.bundle, &psi).unwrap(),
            &gauge_mul(&m.bundle, &chi, &psi),
        );
        let acted = gauge_act(&psi, conn).unwrap();
        let acted_t = gauge_act(&transported, &acted).unwrap();
        assert!(connections_equal(&acted_t, &acted, 1));
    }
}
