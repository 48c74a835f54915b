//! Hom-Lie algebroid structure data and its validators.
//!
//! The structure is a rank-n free module over the jet ring carrying an
//! invertible twist matrix, an anchor into pullback-twisted derivations,
//! and skew structure functions on the frame. Brackets of general sections
//! are produced by the twisted Leibniz extension; the validators confirm on
//! the full monomial basis (the ring is finite-dimensional, so these checks
//! are exhaustive) that the extension satisfies the defining axioms rather
//! than assuming it.

use std::sync::Arc;

use crate::bundle::{fresh_id, Section};
use crate::error::Error;
use crate::forms::LForm;
use crate::jet::{Base, JetPoly, JetShape};
use crate::polymat::PolyMatrix;
use crate::report::{CheckEntry, ValidationReport};

/// Quintuple data: rank, base, twist matrix, anchor matrix, structure
/// functions.
///
/// The anchor matrix is vars x rank: the j-th frame section acts on a
/// function f by `sum_i anchor[i][j] * phi*(d_i f)`. Structure functions
/// `c^k_{ij}` are stored fully, with skewness in (i, j) enforced at
/// construction.
#[derive(Clone, Debug)]
pub struct HomAlgebroid {
    pub id: u64,
    pub rank: usize,
    pub base: Arc<Base>,
    pub phi_l: PolyMatrix,
    pub phi_l_inv: PolyMatrix,
    pub anchor: PolyMatrix,
    structure: Vec<JetPoly>, // [k][i][j] flattened, skew in (i,j)
}

impl HomAlgebroid {
    /// Build from structure entries given on pairs i < j; the skew
    /// completion is implied.
    pub fn new(
        base: Arc<Base>,
        phi_l: PolyMatrix,
        anchor: PolyMatrix,
        structure_upper: &[((usize, usize, usize), JetPoly)],
    ) -> Result<Arc<HomAlgebroid>, Error> {
        let n = phi_l.rows;
        let shape = base.shape;
        if phi_l.cols != n || phi_l.shape != shape {
            return Err(Error::ShapeMismatch("algebroid twist matrix".into()));
        }
        if anchor.rows != shape.vars || anchor.cols != n || anchor.shape != shape {
            return Err(Error::ShapeMismatch(format!(
                "anchor matrix must be {} x {}",
                shape.vars, n
            )));
        }
        let phi_l_inv = phi_l
            .invert()
            .map_err(|_| Error::NotInvertible("algebroid twist matrix".into()))?;
        let mut structure = vec![JetPoly::zero(shape); n * n * n];
        for ((k, i, j), c) in structure_upper {
            if *k >= n || *i >= n || *j >= n {
                return Err(Error::IndexOutOfRange {
                    index: (*k).max(*i).max(*j),
                    bound: n,
                });
            }
            if i >= j {
                return Err(Error::ShapeMismatch(format!(
                    "structure entry c[{k}][{i}][{j}] must have i < j"
                )));
            }
            if c.shape() != shape {
                return Err(Error::ShapeMismatch("structure function jet shape".into()));
            }
            structure[(k * n + i) * n + j] = c.clone();
            structure[(k * n + j) * n + i] = c.neg();
        }
        Ok(Arc::new(HomAlgebroid {
            id: fresh_id(),
            rank: n,
            base,
            phi_l,
            phi_l_inv,
            anchor,
            structure,
        }))
    }

    pub fn shape(&self) -> JetShape {
        self.base.shape
    }

    pub fn structure_fn(&self, k: usize, i: usize, j: usize) -> &JetPoly {
        &self.structure[(k * self.rank + i) * self.rank + j]
    }

    /// Frame bracket [e_i, e_j] = sum_k c^k_{ij} e_k.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Section {
        Section::new(
            (0..self.rank)
                .map(|k| self.structure_fn(k, i, j).clone())
                .collect(),
        )
    }

    /// Anchor action of a section on a function: the pullback-twisted
    /// derivation `sum_{i,j} xi_j anchor[i][j] phi*(d_i f)`. Loses one order.
    pub fn anchor_act(&self, xi: &Section, f: &JetPoly) -> JetPoly {
        let shape = self.shape();
        let mut out = JetPoly::zero(shape).with_valid_order(f.valid_order() - 1);
        for i in 0..shape.vars {
            let df = self.base.pullback(&f.partial(i).expect("anchor var index"));
            for j in 0..self.rank {
                let w = xi.comps[j].mul(self.anchor.get(i, j));
                out = out.add(&w.mul(&df));
            }
        }
        out
    }

    /// Twist applied to a section: Phi_L * phi*(xi).
    pub fn apply_phi_l(&self, xi: &Section) -> Section {
        Section::new(self.phi_l.apply_vec(
            &xi.comps
                .iter()
                .map(|p| self.base.pullback(p))
                .collect::<Vec<_>>(),
        ))
    }

    /// Inverse twist: (phi*)^{-1}(Phi_L^{-1} xi).
    pub fn apply_phi_l_inv(&self, xi: &Section) -> Section {
        let v = self.phi_l_inv.apply_vec(&xi.comps);
        Section::new(v.iter().map(|p| self.base.subst_pow(-1, p)).collect())
    }

    /// Bracket of general sections via the twisted Leibniz extension of the
    /// frame bracket:
    /// [f x, g y] = phi*(f)phi*(g)[x,y]
    ///            + phi*(f) a(phi_L x)(g) phi_L(y)
    ///            - phi*(g) a(phi_L y)(f) phi_L(x).
    pub fn bracket(&self, xi: &Section, eta: &Section) -> Section {
        let n = self.rank;
        let shape = self.shape();
        let mut out = Section::zero(n, shape);
        let phi_l_basis: Vec<Section> = (0..n)
            .map(|j| self.apply_phi_l(&Section::basis(n, shape, j)))
            .collect();
        for j in 0..n {
            let fj = &xi.comps[j];
            if fj.is_zero() {
                continue;
            }
            let pf = self.base.pullback(fj);
            for k in 0..n {
                let gk = &eta.comps[k];
                if !gk.is_zero() {
                    let pg = self.base.pullback(gk);
                    out = out.add(&self.basis_bracket(j, k).scale(&pf.mul(&pg)));
                    let a_jg = self.anchor_act(&phi_l_basis[j], gk);
                    out = out.add(&phi_l_basis[k].scale(&pf.mul(&a_jg)));
                }
                let a_kf = self.anchor_act(&phi_l_basis[k], fj);
                if !a_kf.is_zero() && !gk.is_zero() {
                    let pg = self.base.pullback(gk);
                    out = out.sub(&phi_l_basis[j].scale(&pg.mul(&a_kf)));
                }
            }
        }
        out
    }

    /// Dual twist on scalar forms: `(phi-dagger omega)(X) = phi*(omega(phi_L^{-1} X))`.
    pub fn phi_dagger(&self, omega: &LForm<JetPoly>) -> LForm<JetPoly> {
        let n = self.rank;
        let shape = self.shape();
        let inv_basis: Vec<Section> = (0..n)
            .map(|i| self.apply_phi_l_inv(&Section::basis(n, shape, i)))
            .collect();
        LForm::from_fn(n, omega.degree, |tuple| {
            let args: Vec<Section> = tuple.iter().map(|&i| inv_basis[i].clone()).collect();
            self.base.pullback(&omega.eval(&args))
        })
    }

    /// Twisted Lie derivative along a section. Degree 0 is the anchor
    /// action of the twisted direction; higher degrees follow the displayed
    /// operator. Loses one order.
    pub fn lie_derivative(&self, xi: &Section, omega: &LForm<JetPoly>) -> LForm<JetPoly> {
        let n = self.rank;
        let shape = self.shape();
        let p = omega.degree;
        let phi_xi = self.apply_phi_l(xi);
        if p == 0 {
            let v = self.anchor_act(&phi_xi, &omega.vals[0]);
            return LForm::new(n, 0, vec![v]);
        }
        let dag = self.phi_dagger(omega);
        let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
        let inv_basis: Vec<Section> = basis.iter().map(|b| self.apply_phi_l_inv(b)).collect();
        LForm::from_fn(n, p, |tuple| {
            let args: Vec<Section> = tuple.iter().map(|&i| inv_basis[i].clone()).collect();
            let mut acc = self.anchor_act(&phi_xi, &omega.eval(&args));
            for a in 0..p {
                let mut args2: Vec<Section> =
                    tuple.iter().map(|&i| basis[i].clone()).collect();
                args2[a] = self.bracket(xi, &inv_basis[tuple[a]]);
                acc = acc.sub(&dag.eval(&args2));
            }
            acc
        })
    }

    /// Twisted insertion: `(i_xi omega)(...) = (phi-dagger omega)(phi_L xi, ...)`.
    /// Degree drops by one; no order is lost.
    pub fn insertion(&self, xi: &Section, omega: &LForm<JetPoly>) -> Result<LForm<JetPoly>, Error> {
        let n = self.rank;
        let shape = self.shape();
        let p = omega.degree;
        if p == 0 {
            return Err(Error::DegreeError(
                "insertion into a degree-0 form".into(),
            ));
        }
        let dag = self.phi_dagger(omega);
        let phi_xi = self.apply_phi_l(xi);
        Ok(LForm::from_fn(n, p - 1, |tuple| {
            let mut args = vec![phi_xi.clone()];
            for &i in tuple {
                args.push(Section::basis(n, shape, i));
            }
            dag.eval(&args)
        }))
    }

    /// Enumerate the monomials of the ring up to the given total degree.
    pub fn monomials_up_to(&self, max_degree: i64) -> Vec<JetPoly> {
        let shape = self.shape();
        crate::coeff::monomial_indices(shape)
            .into_iter()
            .filter(|mi| mi.degree() <= max_degree)
            .map(|mi| JetPoly::monomial(shape, mi, crate::rat::q(1)))
            .collect()
    }

    /// Run the structure validators. Failures are report entries, never
    /// errors. Checks are exhaustive over the monomial basis.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let n = self.rank;
        let shape = self.shape();
        let d = shape.order;

        // (a) skewness of the structure functions (structural, but verified)
        {
            let mut worst: Option<JetPoly> = None;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let r = self.structure_fn(k, i, j).add(self.structure_fn(k, j, i));
                        if !r.is_zero() {
                            worst = Some(r);
                        }
                    }
                }
            }
            rep.push(match worst {
                None => CheckEntry::pass("algebroid/structure-skew", d),
                Some(r) => CheckEntry::fail("algebroid/structure-skew", r.to_string(), d),
            });
        }

        let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();

        // (b) twist is a bracket morphism on frame pairs, loss 1
        {
            let mut entry = CheckEntry::pass("algebroid/twist-bracket-morphism", d - 1);
            'outer_b: for i in 0..n {
                for j in 0..n {
                    let lhs = self.apply_phi_l(&self.basis_bracket(i, j));
                    let rhs = self.bracket(
                        &self.apply_phi_l(&basis[i]),
                        &self.apply_phi_l(&basis[j]),
                    );
                    if !lhs.budget_eq(&rhs, shape, 1) {
                        entry = CheckEntry::fail(
                            "algebroid/twist-bracket-morphism",
                            lhs.sub(&rhs).render(),
                            lhs.min_valid_order(shape)
                                .min(rhs.min_valid_order(shape))
                                .min(d - 1),
                        );
                        break 'outer_b;
                    }
                }
            }
            rep.push(entry);
        }

        // (c) twisted Jacobi on frame triples, loss 2
        {
            let mut entry = CheckEntry::pass("algebroid/hom-jacobi", d - 2);
            'outer_c: for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let r = self.jacobi_residual(&basis[i], &basis[j], &basis[k]);
                        if !r.budget_eq(&Section::zero(n, shape), shape, 2) {
                            entry = CheckEntry::fail(
                                "algebroid/hom-jacobi",
                                r.render(),
                                r.min_valid_order(shape).min(d - 2),
                            );
                            break 'outer_c;
                        }
                    }
                }
            }
            rep.push(entry);
        }

        // (d) Leibniz axiom on frame pairs against the monomial basis, loss 1
        {
            let mut entry = CheckEntry::pass("algebroid/leibniz-axiom", d - 1);
            'outer_d: for i in 0..n {
                for j in 0..n {
                    for f in self.monomials_up_to(d) {
                        let lhs = self.bracket(&basis[i], &basis[j].scale(&f));
                        let rhs = self
                            .bracket(&basis[i], &basis[j])
                            .scale(&self.base.pullback(&f))
                            .add(
                                &self
                                    .apply_phi_l(&basis[j])
                                    .scale(&self.anchor_act(&self.apply_phi_l(&basis[i]), &f)),
                            );
                        if !lhs.budget_eq(&rhs, shape, 1) {
                            entry = CheckEntry::fail(
                                "algebroid/leibniz-axiom",
                                lhs.sub(&rhs).render(),
                                lhs.min_valid_order(shape)
                                    .min(rhs.min_valid_order(shape))
                                    .min(d - 1),
                            );
                            break 'outer_d;
                        }
                    }
                }
            }
            rep.push(entry);
        }

        // (e) representation conditions on every monomial, loss 2
        {
            let mut first = CheckEntry::pass("algebroid/representation-twist", d - 2);
            let mut second = CheckEntry::pass("algebroid/representation-bracket", d - 2);
            'outer_e1: for i in 0..n {
                for f in self.monomials_up_to(d) {
                    let lhs = self.anchor_act(&self.apply_phi_l(&basis[i]), &self.base.pullback(&f));
                    let rhs = self.base.pullback(&self.anchor_act(&basis[i], &f));
                    if !lhs.budget_eq(&rhs, 2) {
                        first = CheckEntry::fail(
                            "algebroid/representation-twist",
                            lhs.sub(&rhs).to_string(),
                            lhs.comparison_order(&rhs, 2),
                        );
                        break 'outer_e1;
                    }
                }
            }
            'outer_e2: for i in 0..n {
                for j in 0..n {
                    for f in self.monomials_up_to(d) {
                        let lhs = self
                            .anchor_act(&self.basis_bracket(i, j), &self.base.pullback(&f));
                        let rhs = self
                            .anchor_act(
                                &self.apply_phi_l(&basis[i]),
                                &self.anchor_act(&basis[j], &f),
                            )
                            .sub(&self.anchor_act(
                                &self.apply_phi_l(&basis[j]),
                                &self.anchor_act(&basis[i], &f),
                            ));
                        if !lhs.budget_eq(&rhs, 2) {
                            second = CheckEntry::fail(
                                "algebroid/representation-bracket",
                                lhs.sub(&rhs).to_string(),
                                lhs.comparison_order(&rhs, 2),
                            );
                            break 'outer_e2;
                        }
                    }
                }
            }
            rep.push(first);
            rep.push(second);
        }

        rep
    }

    /// [phi_L x, [y, z]] + cyclic.
    pub fn jacobi_residual(&self, x: &Section, y: &Section, z: &Section) -> Section {
        let t1 = self.bracket(&self.apply_phi_l(x), &self.bracket(y, z));
        let t2 = self.bracket(&self.apply_phi_l(y), &self.bracket(z, x));
        let t3 = self.bracket(&self.apply_phi_l(z), &self.bracket(x, y));
        t1.add(&t2).add(&t3)
    }

    /// Whether the constant part of the anchor is surjective onto the
    /// derivation directions. Transitivity is recorded, never enforced.
    pub fn anchor_transitive(&self) -> bool {
        let m = self.shape().vars;
        if m == 0 {
            return true;
        }
        self.anchor.constant_matrix().rank() == m
    }
}

/// Inverse twist applied to an algebroid section (free-function spelling).
pub fn phi_l_inv_apply(algebroid: &HomAlgebroid, xi: &Section) -> Result<Section, Error> {
    if xi.rank() != algebroid.rank {
        return Err(Error::ShapeMismatch("section rank mismatch".into()));
    }
    Ok(algebroid.apply_phi_l_inv(xi))
}
