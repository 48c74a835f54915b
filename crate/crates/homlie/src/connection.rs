//! Twisted algebroid connections.
//!
//! A connection is stored relative to the trivial one: `nabla = nabla_0 +
//! alpha`, with one twisted-morphism matrix per dual-frame slot. Equality of
//! connections is equality of `alpha` at the budget. The trivial part sends
//! a section to the differential of its coefficients paired with the twisted
//! frame; `alpha` acts slotwise by `s -> A_j * phi*(s)`.
//!
//! The slot maps of shipped connections are pullback-twisted; `alpha_twist`
//! exists so that deliberately broken fixtures (untwisted slot maps) can be
//! expressed and caught by the validator rather than being unrepresentable.

use std::sync::Arc;

use crate::algebroid::HomAlgebroid;
use crate::bundle::{HomBundle, Section, TwistedMor};
use crate::cedram::d_l_fn;
use crate::coeff::twist_end_form;
use crate::error::Error;
use crate::forms::{exterior_d, DiffCtx, LForm};
use crate::jet::{JetPoly, JetShape};
use crate::polymat::{PolyMatrix, SemiLin};
use crate::report::{CheckEntry, ValidationReport};

#[derive(Clone, Debug)]
pub struct Connection {
    pub bundle: Arc<HomBundle>,
    pub algebroid: Arc<HomAlgebroid>,
    /// One r x r matrix per dual-frame slot.
    pub alpha: Vec<PolyMatrix>,
    /// Pullback power of the slot maps; 1 for every genuine connection.
    pub alpha_twist: i32,
}

impl Connection {
    pub fn new(
        bundle: Arc<HomBundle>,
        algebroid: Arc<HomAlgebroid>,
        alpha: Vec<PolyMatrix>,
    ) -> Result<Connection, Error> {
        Self::with_twist(bundle, algebroid, alpha, 1)
    }

    pub fn with_twist(
        bundle: Arc<HomBundle>,
        algebroid: Arc<HomAlgebroid>,
        alpha: Vec<PolyMatrix>,
        alpha_twist: i32,
    ) -> Result<Connection, Error> {
        if alpha.len() != algebroid.rank {
            return Err(Error::ShapeMismatch(format!(
                "connection needs {} slot matrices, got {}",
                algebroid.rank,
                alpha.len()
            )));
        }
        for a in &alpha {
            if a.rows != bundle.rank || a.cols != bundle.rank || a.shape != bundle.shape() {
                return Err(Error::ShapeMismatch(
                    "connection slot matrix has wrong shape".into(),
                ));
            }
        }
        Ok(Connection {
            bundle,
            algebroid,
            alpha,
            alpha_twist,
        })
    }

    pub fn shape(&self) -> JetShape {
        self.bundle.shape()
    }

    /// The trivial connection: alpha = 0, so a section maps to the
    /// differential of its coefficients against the twisted frame.
    pub fn trivial(bundle: Arc<HomBundle>, algebroid: Arc<HomAlgebroid>) -> Connection {
        let shape = bundle.shape();
        let r = bundle.rank;
        let alpha = vec![PolyMatrix::zeros(r, r, shape); algebroid.rank];
        Connection {
            bundle,
            algebroid,
            alpha,
            alpha_twist: 1,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.alpha.iter().all(|a| a.is_zero())
    }

    /// alpha as an endomorphism-valued 1-form (only meaningful for twist 1).
    pub fn alpha_form(&self) -> LForm<PolyMatrix> {
        LForm::new(self.algebroid.rank, 1, self.alpha.clone())
    }

    /// The full covariant differential of a section: an E-valued 1-form.
    /// Slot j carries `Phi_E * [a(e_j)(s_k)]_k + A_j * (phi*)^t(s)`. Loss 1.
    pub fn apply(&self, s: &Section) -> LForm<Section> {
        let n = self.algebroid.rank;
        let shape = self.shape();
        let r = self.bundle.rank;
        assert_eq!(s.rank(), r, "connection applied to wrong-rank section");
        LForm::from_fn(n, 1, |tuple| {
            let j = tuple[0];
            let e_j = Section::basis(n, shape, j);
            let deriv: Vec<JetPoly> = (0..r)
                .map(|k| self.algebroid.anchor_act(&e_j, &s.comps[k]))
                .collect();
            let trivial_part = Section::new(self.bundle.phi_e.apply_vec(&deriv));
            let slot = SemiLin::new(self.alpha[j].clone(), self.alpha_twist);
            let alpha_part = Section::new(slot.apply(&self.bundle.base, &s.comps));
            trivial_part.add(&alpha_part)
        })
    }

    /// Covariant derivative in a direction: evaluation of the differential
    /// at the twisted direction. Loss 1.
    pub fn covariant_derivative(&self, xi: &Section, s: &Section) -> Section {
        let omega = self.apply(s);
        omega.eval(&[self.algebroid.apply_phi_l(xi)])
    }

    /// The two defining laws plus the affine-difference law, checked over
    /// the monomial basis of functions and frame sections at loss 1.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let n = self.algebroid.rank;
        let r = self.bundle.rank;
        let shape = self.shape();
        let d = shape.order;
        let base = &self.bundle.base;
        let basis: Vec<Section> = (0..r).map(|k| Section::basis(r, shape, k)).collect();
        let monomials = self.algebroid.monomials_up_to(d);

        // (1) nabla(f s) = d_L(f) (x) phi_E(s) + phi*(f) nabla(s)
        {
            let mut entry = CheckEntry::pass("connection/leibniz-law", d - 1);
            'out1: for f in &monomials {
                for s in &basis {
                    let lhs = self.apply(&s.scale(f));
                    let df = d_l_fn(&self.algebroid, f);
                    let phi_e_s = self.bundle.apply_twist(s);
                    let first = LForm::from_fn(n, 1, |t| phi_e_s.scale(&df.vals[t[0]]));
                    let rhs = first.add(&self.apply(s).map_sections(|sec| {
                        sec.scale(&base.pullback(f))
                    }));
                    if !lhs.budget_eq(&rhs, shape, 1) {
                        entry = CheckEntry::fail(
                            "connection/leibniz-law",
                            lhs.sub(&rhs).render(),
                            lhs.min_valid_order(shape)
                                .min(rhs.min_valid_order(shape))
                                .min(d - 1),
                        );
                        break 'out1;
                    }
                }
            }
            rep.push(entry);
        }

        // (2) twist o nabla = nabla o phi_E on monomial-weighted frames
        {
            let mut entry = CheckEntry::pass("connection/twist-commutation", d - 1);
            'out2: for f in &monomials {
                for s in &basis {
                    let ws = s.scale(f);
                    let lhs = twist_e_form(&self.bundle, &self.algebroid, &self.apply(&ws));
                    let rhs = self.apply(&self.bundle.apply_twist(&ws));
                    if !lhs.budget_eq(&rhs, shape, 1) {
                        entry = CheckEntry::fail(
                            "connection/twist-commutation",
                            lhs.sub(&rhs).render(),
                            lhs.min_valid_order(shape)
                                .min(rhs.min_valid_order(shape))
                                .min(d - 1),
                        );
                        break 'out2;
                    }
                }
            }
            rep.push(entry);
        }

        // difference from the trivial connection is pullback-linear
        {
            let mut entry = CheckEntry::pass("connection/difference-twisted-linear", d - 1);
            let triv = Connection::trivial(self.bundle.clone(), self.algebroid.clone());
            'out3: for f in &monomials {
                for s in &basis {
                    let diff_fs = self
                        .apply(&s.scale(f))
                        .sub(&triv.apply(&s.scale(f)));
                    let diff_s = self.apply(s).sub(&triv.apply(s));
                    let rhs = diff_s.map_sections(|sec| sec.scale(&base.pullback(f)));
                    if !diff_fs.budget_eq(&rhs, shape, 1) {
                        entry = CheckEntry::fail(
                            "connection/difference-twisted-linear",
                            diff_fs.sub(&rhs).render(),
                            diff_fs
                                .min_valid_order(shape)
                                .min(rhs.min_valid_order(shape))
                                .min(d - 1),
                        );
                        break 'out3;
                    }
                }
            }
            rep.push(entry);
        }

        rep
    }
}

impl LForm<Section> {
    fn map_sections(&self, f: impl Fn(&Section) -> Section) -> LForm<Section> {
        LForm::new(
            self.algebroid_rank,
            self.degree,
            self.vals.iter().map(f).collect(),
        )
    }
}

/// The induced twist on E-valued forms: values through the bundle twist,
/// arguments through the inverse algebroid twist.
pub fn twist_e_form(
    bundle: &HomBundle,
    algebroid: &HomAlgebroid,
    omega: &LForm<Section>,
) -> LForm<Section> {
    let n = algebroid.rank;
    let shape = bundle.shape();
    let inv_basis: Vec<Section> = (0..n)
        .map(|i| algebroid.apply_phi_l_inv(&Section::basis(n, shape, i)))
        .collect();
    LForm::from_fn(n, omega.degree, |tuple| {
        let args: Vec<Section> = tuple.iter().map(|&i| inv_basis[i].clone()).collect();
        bundle.apply_twist(&omega.eval(&args))
    })
}

struct EValCtx<'a> {
    conn: &'a Connection,
}

impl<'a> DiffCtx<Section> for EValCtx<'a> {
    fn rank(&self) -> usize {
        self.conn.algebroid.rank
    }
    fn shape(&self) -> JetShape {
        self.conn.shape()
    }
    fn cov_deriv(&self, xi: &Section, v: &Section) -> Section {
        // evaluation of the differential at the untwisted direction:
        // (d s)(xi) = nabla_{phi_L^{-1} xi}(s)
        self.conn.apply(v).eval(std::slice::from_ref(xi))
    }
    fn twist_form(&self, omega: &LForm<Section>) -> LForm<Section> {
        twist_e_form(&self.conn.bundle, &self.conn.algebroid, omega)
    }
    fn bracket(&self, xi: &Section, eta: &Section) -> Section {
        self.conn.algebroid.bracket(xi, eta)
    }
    fn phi_l_inv(&self, xi: &Section) -> Section {
        self.conn.algebroid.apply_phi_l_inv(xi)
    }
}

/// Degree-1 extension of the connection to E-valued forms. Restricted to
/// degree 0 this is exactly `Connection::apply`. Loss 1.
pub fn d_nabla(conn: &Connection, omega: &LForm<Section>) -> LForm<Section> {
    exterior_d(&EValCtx { conn }, omega)
}

/// The induced connection on endomorphisms, as an endomorphism-valued
/// 1-form: `[nabla, T] = twist(nabla o inv o T o inv) - twist((id (x) T o inv) o nabla o inv)`.
/// Slot matrices are recovered columnwise on the constant frame. Loss 1.
pub fn end_connection_apply(conn: &Connection, t: &TwistedMor) -> LForm<PolyMatrix> {
    let bundle = &conn.bundle;
    let algebroid = &conn.algebroid;
    let base = &bundle.base;
    let n = algebroid.rank;
    let r = bundle.rank;
    let shape = conn.shape();
    let tinv = bundle.twist_inv();
    // phi_E^{-1} o T o phi_E^{-1}, applied to the constant frame
    let p_semi = tinv.compose(base, &t.semilin()).compose(base, &tinv);
    // T o phi_E^{-1} (untwisted)
    let s_semi = t.semilin().compose(base, &tinv);
    let mut slot_cols: Vec<Vec<Vec<JetPoly>>> = vec![Vec::with_capacity(r); n];
    for k in 0..r {
        let b_k = Section::basis(r, shape, k);
        let u_k = Section::new(p_semi.apply(base, &b_k.comps));
        let tw1 = twist_e_form(bundle, algebroid, &conn.apply(&u_k));
        let v_k = Section::new(tinv.apply(base, &b_k.comps));
        let omega2 = conn.apply(&v_k);
        let composed = LForm::new(
            n,
            1,
            omega2
                .vals
                .iter()
                .map(|sec| Section::new(s_semi.apply(base, &sec.comps)))
                .collect(),
        );
        let tw2 = twist_e_form(bundle, algebroid, &composed);
        let diff = tw1.sub(&tw2);
        for j in 0..n {
            slot_cols[j].push(diff.vals[j].comps.clone());
        }
    }
    LForm::new(
        n,
        1,
        (0..n)
            .map(|j| {
                PolyMatrix::from_fn(r, r, shape, |row, col| slot_cols[j][col][row].clone())
            })
            .collect(),
    )
}

struct EndCtx<'a> {
    conn: &'a Connection,
}

impl<'a> DiffCtx<PolyMatrix> for EndCtx<'a> {
    fn rank(&self) -> usize {
        self.conn.algebroid.rank
    }
    fn shape(&self) -> JetShape {
        self.conn.shape()
    }
    fn cov_deriv(&self, xi: &Section, v: &PolyMatrix) -> PolyMatrix {
        end_connection_apply(self.conn, &TwistedMor::new(v.clone())).eval(std::slice::from_ref(xi))
    }
    fn twist_form(&self, omega: &LForm<PolyMatrix>) -> LForm<PolyMatrix> {
        twist_end_form(&self.conn.bundle, &self.conn.algebroid, omega)
    }
    fn bracket(&self, xi: &Section, eta: &Section) -> Section {
        self.conn.algebroid.bracket(xi, eta)
    }
    fn phi_l_inv(&self, xi: &Section) -> Section {
        self.conn.algebroid.apply_phi_l_inv(xi)
    }
}

/// Exterior extension of the induced endomorphism connection. Degree 0
/// agrees with `end_connection_apply`. Loss 1.
pub fn d_nabla_end(conn: &Connection, omega: &LForm<PolyMatrix>) -> LForm<PolyMatrix> {
    if omega.degree == 0 {
        return end_connection_apply(conn, &TwistedMor::new(omega.vals[0].clone()));
    }
    exterior_d(&EndCtx { conn }, omega)
}

/// Residual of the displayed decomposition `[nabla_0 + alpha, T] =
/// [nabla_0, T] + [alpha, T]`; used as a cross-check between the two routes.
pub fn end_connection_split_residual(conn: &Connection, t: &TwistedMor) -> LForm<PolyMatrix> {
    let triv = Connection::trivial(conn.bundle.clone(), conn.algebroid.clone());
    let whole = end_connection_apply(conn, t);
    let flat = end_connection_apply(&triv, t);
    let ad = crate::cedram::form_bracket(
        &conn.bundle,
        &conn.algebroid,
        &conn.alpha_form(),
        &LForm::new(conn.algebroid.rank, 0, vec![t.mat.clone()]),
    );
    whole.sub(&flat.add(&ad))
}

/// Product law of the induced endomorphism connection:
/// `[nabla, T1 o inv o T2] = [nabla, T1] o inv o T2 + (T1 o inv) o [nabla, T2]`,
/// returned as a residual. Loss 1.
pub fn end_product_residual(
    conn: &Connection,
    t1: &TwistedMor,
    t2: &TwistedMor,
) -> LForm<PolyMatrix> {
    let bundle = &conn.bundle;
    let base = &bundle.base;
    let tinv = bundle.twist_inv();
    let prod = TwistedMor::new(
        t1.semilin()
            .compose(base, &tinv)
            .compose(base, &t2.semilin())
            .mat,
    );
    let lhs = end_connection_apply(conn, &prod);
    let d1 = end_connection_apply(conn, t1);
    let d2 = end_connection_apply(conn, t2);
    // [nabla, T1] o phi_E^{-1} o T2 slotwise
    let term1 = LForm::new(
        conn.algebroid.rank,
        1,
        d1.vals
            .iter()
            .map(|c| {
                SemiLin::new(c.clone(), 1)
                    .compose(base, &tinv)
                    .compose(base, &t2.semilin())
                    .mat
            })
            .collect(),
    );
    // (T1 o phi_E^{-1}) o [nabla, T2] slotwise
    let pre = t1.semilin().compose(base, &tinv);
    let term2 = LForm::new(
        conn.algebroid.rank,
        1,
        d2.vals
            .iter()
            .map(|c| pre.compose(base, &SemiLin::new(c.clone(), 1)).mat)
            .collect(),
    );
    lhs.sub(&term1.add(&term2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;
    use crate::scenario::fixtures;

    #[test]
    fn trivial_connection_examples() {
        let m = fixtures::s1();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        let x = JetPoly::var(shape, 0).unwrap();
        let b = Section::basis(1, shape, 0);
        assert!(conn.apply(&b).is_zero());
        // nabla0(x b) = x eps (x) b
        let out = conn.apply(&b.scale(&x));
        assert_eq!(out.vals[0].comps[0], x);
        // S2: anchor 0 makes the trivial connection vanish identically
        let m2 = fixtures::s2();
        let conn2 = Connection::trivial(m2.bundle.clone(), m2.algebroid.clone());
        let shape2 = conn2.shape();
        let s = Section::basis(1, shape2, 0).scale(&JetPoly::constant(shape2, q(7)));
        assert!(conn2.apply(&s).is_zero());
    }

    #[test]
    fn conn_apply_with_alpha() {
        let m = fixtures::s1();
        let shape = m.bundle.shape();
        let x = JetPoly::var(shape, 0).unwrap();
        let alpha = vec![PolyMatrix::identity(1, shape)];
        let conn = Connection::new(m.bundle.clone(), m.algebroid.clone(), alpha).unwrap();
        let b = Section::basis(1, shape, 0);
        // nabla(b) = eps (x) b
        assert_eq!(conn.apply(&b).vals[0].comps[0], JetPoly::one(shape));
        // nabla(x b) = x eps b + 2x eps b = 3x eps b
        let out = conn.apply(&b.scale(&x));
        assert_eq!(out.vals[0].comps[0], x.scale(&q(3)));
    }

    #[test]
    fn covariant_derivative_examples() {
        let m = fixtures::s1();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        let x = JetPoly::var(shape, 0).unwrap();
        let b = Section::basis(1, shape, 0);
        let e = Section::basis(1, shape, 0);
        let out = conn.covariant_derivative(&e, &b.scale(&x));
        assert_eq!(out.comps[0], x);
        // direction-twisted linearity: nabla_{f xi}(s) = phi*(f) nabla_xi(s)
        let lhs = conn.covariant_derivative(&e.scale(&x), &b.scale(&x));
        let rhs = conn
            .covariant_derivative(&e, &b.scale(&x))
            .scale(&m.base.pullback(&x));
        assert_eq!(lhs, rhs);
        assert!(conn.covariant_derivative(&e, &b).is_zero());
    }

    #[test]
    fn validate_trivial_and_twisted_alpha() {
        let m = fixtures::s1();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        assert!(conn.validate().all_pass());
        let shape = m.bundle.shape();
        let alpha = vec![PolyMatrix::identity(1, shape)];
        let with_alpha = Connection::new(m.bundle.clone(), m.algebroid.clone(), alpha).unwrap();
        assert!(with_alpha.validate().all_pass());
    }

    #[test]
    fn validate_catches_untwisted_alpha() {
        let m = fixtures::s1_untwisted_alpha();
        let conn = m.connections.get("broken").unwrap();
        let rep = conn.validate();
        assert!(!rep.all_pass());
    }

    #[test]
    fn d_nabla_degree0_is_apply() {
        let m = fixtures::s1();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        let x = JetPoly::var(shape, 0).unwrap();
        let s = Section::basis(1, shape, 0).scale(&x.add(&JetPoly::one(shape)));
        let omega = LForm::new(1, 0, vec![s.clone()]);
        assert_eq!(d_nabla(&conn, &omega), conn.apply(&s));
    }

    #[test]
    fn d_nabla_s2_classical() {
        let m = fixtures::s2();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        // omega = eps^1 (x) b -> -eps^2 ^ eps^3 (x) b
        let omega = LForm::from_fn(3, 1, |t| {
            if t == [0] {
                Section::basis(1, shape, 0)
            } else {
                Section::zero(1, shape)
            }
        });
        let out = d_nabla(&conn, &omega);
        assert!(out.coeff(&[0, 1]).is_zero());
        assert!(out.coeff(&[0, 2]).is_zero());
        assert_eq!(
            out.coeff(&[1, 2]).comps[0],
            JetPoly::one(shape).neg()
        );
    }

    #[test]
    fn d_nabla_top_degree_is_empty() {
        let m = fixtures::s1();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        let omega = LForm::new(1, 1, vec![Section::basis(1, shape, 0)]);
        let out = d_nabla(&conn, &omega);
        assert_eq!(out.degree, 2);
        assert!(out.vals.is_empty());
    }

    #[test]
    fn end_connection_examples() {
        let m = fixtures::s1();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        // T = phi_E is parallel
        let out = end_connection_apply(&conn, &m.bundle.phi_e_mor());
        assert!(out.is_zero());
        // symbol a = x: slot value 2x (phi*)^2(d (phi*)^{-1} a) at h=1 -> coefficient 2x
        let x = JetPoly::var(shape, 0).unwrap();
        let t = TwistedMor::new(PolyMatrix::from_rows(shape, vec![vec![x.clone()]]).unwrap());
        let out2 = end_connection_apply(&conn, &t);
        // 2x * (phi*)^2(d/dx (x/2)) = 2x * 1/2 * ... : compute expected directly
        // (phi*)^{-1}(x) = x/2, derivative 1/2, (phi*)^2 fixes constants, times 2x -> x
        assert_eq!(out2.vals[0].get(0, 0), &x);
        // S3 with constant matrices: kernel iff constant
        let m3 = fixtures::s3();
        let conn3 = Connection::trivial(m3.bundle.clone(), m3.algebroid.clone());
        let shape3 = conn3.shape();
        let c = TwistedMor::new(PolyMatrix::from_fn(2, 2, shape3, |i, j| {
            JetPoly::constant(shape3, q((i + 2 * j + 1) as i64))
        }));
        assert!(end_connection_apply(&conn3, &c).is_zero());
        let x3 = JetPoly::var(shape3, 0).unwrap();
        let nc = TwistedMor::new(PolyMatrix::from_fn(2, 2, shape3, |i, j| {
            if i == 0 && j == 0 {
                x3.clone()
            } else {
                JetPoly::zero(shape3)
            }
        }));
        assert!(!end_connection_apply(&conn3, &nc).is_zero());
    }

    #[test]
    fn end_connection_splits_into_flat_plus_bracket() {
        let m = fixtures::s3();
        let shape = m.bundle.shape();
        let upper = PolyMatrix::from_fn(2, 2, shape, |i, j| {
            if (i, j) == (0, 1) {
                JetPoly::one(shape)
            } else {
                JetPoly::zero(shape)
            }
        });
        let conn = Connection::new(
            m.bundle.clone(),
            m.algebroid.clone(),
            vec![upper],
        )
        .unwrap();
        let x = JetPoly::var(shape, 0).unwrap();
        let t = TwistedMor::new(PolyMatrix::from_fn(2, 2, shape, |i, j| {
            if i == j {
                x.clone()
            } else {
                JetPoly::constant(shape, q((i + j) as i64))
            }
        }));
        let resid = end_connection_split_residual(&conn, &t);
        assert!(resid.budget_eq(
            &LForm::from_fn(1, 1, |_| PolyMatrix::zeros(2, 2, shape)),
            shape,
            1
        ));
    }

    #[test]
    fn end_product_rule() {
        let m = fixtures::s3();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        // members of the compatible subalgebra: constants for this fixture
        let t1 = TwistedMor::new(PolyMatrix::from_fn(2, 2, shape, |i, j| {
            JetPoly::constant(shape, q([[1, 2], [0, 1]][i][j]))
        }));
        let t2 = TwistedMor::new(PolyMatrix::from_fn(2, 2, shape, |i, j| {
            JetPoly::constant(shape, q([[3, 0], [1, 2]][i][j]))
        }));
        let resid = end_product_residual(&conn, &t1, &t2);
        assert!(resid.budget_eq(
            &LForm::from_fn(1, 1, |_| PolyMatrix::zeros(2, 2, shape)),
            shape,
            1
        ));
    }

    #[test]
    fn twist_laws_for_d_nabla() {
        // law (2): twist o d = d o twist at loss 1, on an S2 form
        let m = fixtures::s2();
        let conn = Connection::trivial(m.bundle.clone(), m.algebroid.clone());
        let shape = conn.shape();
        let omega = LForm::from_fn(3, 1, |t| {
            Section::basis(1, shape, 0).scale(&JetPoly::constant(shape, q(t[0] as i64 + 1)))
        });
        let lhs = twist_e_form(&m.bundle, &m.algebroid, &d_nabla(&conn, &omega));
        let rhs = d_nabla(&conn, &twist_e_form(&m.bundle, &m.algebroid, &omega));
        assert!(lhs.budget_eq(&rhs, shape, 1));
    }
}
