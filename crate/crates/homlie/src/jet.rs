//! Truncated multivariate polynomial algebra over exact rationals.
//!
//! `JetPoly` models a germ of a smooth function at the origin: a polynomial
//! in `vars` variables with every monomial of total degree above `order`
//! discarded. Arithmetic is exact; truncation is the only loss of
//! information, and that loss is tracked through the `valid_order` field so
//! identities involving derivatives are only ever asserted below the degree
//! where truncation can forge or hide terms.
//!
//! `BaseEndo` is a substitution endomorphism with zero constant term (the
//! origin is fixed), so substitution commutes with truncation and pullback
//! is exactly multiplicative. Endomorphisms with invertible linear part have
//! an exact compositional inverse, solved degree by degree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::error::Error;
use crate::rat::{rat_to_string, Rat};

/// Shape of the ambient truncated ring: number of variables and truncation order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct JetShape {
    pub vars: usize,
    pub order: i64,
}

impl JetShape {
    pub fn new(vars: usize, order: i64) -> Self {
        JetShape { vars, order }
    }
}

/// Exponent vector. Ordered graded-lexicographically: lower total degree
/// first; within a degree, higher power of the earliest variable first
/// (x0^2 before x0*x1 before x1^2). This is the canonical serialization
/// order.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(vars: usize) -> Self {
        MultiIndex(vec![0; vars])
    }

    pub fn unit(vars: usize, i: usize) -> Self {
        let mut v = vec![0; vars];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match self.degree().cmp(&other.degree()) {
            std::cmp::Ordering::Equal => {
                for (a, b) in self.0.iter().zip(&other.0) {
                    if a != b {
                        return b.cmp(a);
                    }
                }
                std::cmp::Ordering::Equal
            }
            ord => ord,
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Element of the truncated polynomial ring.
///
/// Invariants: no stored coefficient is zero; every stored index has total
/// degree at most `shape.order`. `valid_order` records up to which total
/// degree the coefficients are trustworthy as jet data of a smooth function;
/// derivative-like operations decrement it. It may go negative after deep
/// compositions, at which point budget comparisons become vacuous.
#[derive(Clone, Debug)]
pub struct JetPoly {
    shape: JetShape,
    valid_order: i64,
    terms: BTreeMap<MultiIndex, Rat>,
}

impl PartialEq for JetPoly {
    /// Structural equality of coefficients; `valid_order` is bookkeeping and
    /// does not participate.
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.terms == other.terms
    }
}

impl Eq for JetPoly {}

impl JetPoly {
    pub fn zero(shape: JetShape) -> Self {
        JetPoly {
            shape,
            valid_order: shape.order,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(shape: JetShape) -> Self {
        Self::constant(shape, Rat::one())
    }

    pub fn constant(shape: JetShape, c: Rat) -> Self {
        let mut p = Self::zero(shape);
        if !c.is_zero() {
            p.terms.insert(MultiIndex::zero(shape.vars), c);
        }
        p
    }

    /// The coordinate variable x_i.
    pub fn var(shape: JetShape, i: usize) -> Result<Self, Error> {
        if i >= shape.vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                bound: shape.vars,
            });
        }
        if shape.order < 1 {
            return Ok(Self::zero(shape));
        }
        let mut p = Self::zero(shape);
        p.terms.insert(MultiIndex::unit(shape.vars, i), Rat::one());
        Ok(p)
    }

    pub fn monomial(shape: JetShape, mi: MultiIndex, c: Rat) -> Self {
        let mut p = Self::zero(shape);
        if !c.is_zero() && mi.degree() <= shape.order {
            p.terms.insert(mi, c);
        }
        p
    }

    pub fn shape(&self) -> JetShape {
        self.shape
    }

    pub fn valid_order(&self) -> i64 {
        self.valid_order
    }

    pub fn with_valid_order(mut self, v: i64) -> Self {
        self.valid_order = v.min(self.shape.order);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mi: &MultiIndex) -> Rat {
        self.terms.get(mi).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&MultiIndex::zero(self.shape.vars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every coefficient of total degree <= `order` vanishes.
    pub fn is_zero_up_to(&self, order: i64) -> bool {
        self.terms.keys().all(|mi| mi.degree() > order)
    }

    fn check_shape(&self, other: &JetPoly) -> Result<(), Error> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "jet shapes differ: ({},{}) vs ({},{})",
                self.shape.vars, self.shape.order, other.shape.vars, other.shape.order
            )));
        }
        Ok(())
    }

    fn insert_add(&mut self, mi: MultiIndex, c: Rat) {
        if c.is_zero() || mi.degree() > self.shape.order {
            return;
        }
        let entry = self.terms.entry(mi);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &JetPoly) -> JetPoly {
        self.check_shape(other).expect("jet add: shape mismatch");
        let mut out = self.clone();
        out.valid_order = self.valid_order.min(other.valid_order);
        for (mi, c) in &other.terms {
            out.insert_add(mi.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &JetPoly) -> JetPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> JetPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> JetPoly {
        if c.is_zero() {
            return JetPoly::zero(self.shape).with_valid_order(self.valid_order);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.clone() * c;
        }
        out
    }

    /// Product, truncated past the ambient order. Propagates the weaker
    /// validity of the two factors.
    pub fn checked_mul(&self, other: &JetPoly) -> Result<JetPoly, Error> {
        self.check_shape(other)?;
        let mut out = JetPoly::zero(self.shape);
        out.valid_order = self.valid_order.min(other.valid_order);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.degree() + mb.degree() > self.shape.order {
                    continue;
                }
                out.insert_add(ma.add(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &JetPoly) -> JetPoly {
        self.checked_mul(other).expect("jet mul: shape mismatch")
    }

    /// Formal partial derivative with respect to x_i. Top-degree information
    /// is lost under truncation, so the validity order drops by one.
    pub fn partial(&self, i: usize) -> Result<JetPoly, Error> {
        if i >= self.shape.vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                bound: self.shape.vars,
            });
        }
        let mut out = JetPoly::zero(self.shape);
        out.valid_order = self.valid_order - 1;
        for (mi, c) in &self.terms {
            if mi.0[i] == 0 {
                continue;
            }
            let mut v = mi.0.clone();
            let e = v[i];
            v[i] -= 1;
            out.insert_add(MultiIndex(v), c * Rat::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Substitute the endomorphism's components for the variables:
    /// f(phi_1, ..., phi_m), truncated. Exactly multiplicative because the
    /// components have zero constant term.
    pub fn substitute(&self, endo: &BaseEndo) -> JetPoly {
        assert_eq!(self.shape, endo.shape, "substitute: shape mismatch");
        let mut max_exp = vec![0u32; self.shape.vars];
        for mi in self.terms.keys() {
            for (i, &e) in mi.0.iter().enumerate() {
                max_exp[i] = max_exp[i].max(e);
            }
        }
        // power tables per variable
        let mut powers: Vec<Vec<JetPoly>> = Vec::with_capacity(self.shape.vars);
        for (i, &me) in max_exp.iter().enumerate() {
            let mut tab = vec![JetPoly::one(self.shape)];
            for k in 1..=me as usize {
                let next = tab[k - 1].mul(&endo.comps[i]);
                tab.push(next);
            }
            powers.push(tab);
        }
        let mut out = JetPoly::zero(self.shape);
        for (mi, c) in &self.terms {
            let mut term = JetPoly::constant(self.shape, c.clone());
            for (i, &e) in mi.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&powers[i][e as usize]);
                }
            }
            for (m, v) in term.terms {
                out.insert_add(m, v);
            }
        }
        out.valid_order = self.valid_order;
        out
    }

    /// Inverse of a unit: requires a nonzero constant term. Computed through
    /// the geometric series of the nilpotent part, exact.
    pub fn invert_unit(&self) -> Result<JetPoly, Error> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotInvertible(
                "polynomial unit inverse: zero constant term".into(),
            ));
        }
        let c0_inv = Rat::one() / c0;
        // n = f/c0 - 1 is nilpotent
        let n = self.scale(&c0_inv).sub(&JetPoly::one(self.shape));
        let mut acc = JetPoly::one(self.shape);
        let mut pow = JetPoly::one(self.shape);
        for _ in 0..self.shape.order {
            pow = pow.mul(&n).neg();
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        let out = acc.scale(&c0_inv).with_valid_order(self.valid_order);
        Ok(out)
    }

    /// Budget equality: agreement on all coefficients of total degree
    /// <= min(valid orders, order - loss). A negative comparison order is
    /// vacuously true — nothing below the floor is trustworthy.
    pub fn budget_eq(&self, other: &JetPoly, loss: i64) -> bool {
        let cmp = self.comparison_order(other, loss);
        self.sub(other).is_zero_up_to(cmp)
    }

    pub fn comparison_order(&self, other: &JetPoly, loss: i64) -> i64 {
        self.valid_order
            .min(other.valid_order)
            .min(self.shape.order - loss)
    }
}

impl fmt::Display for JetPoly {
    /// Canonical text form in the polynomial grammar: graded-lex term
    /// order, `p/q` coefficients, `x{i}` variables, `^` powers, `*` products.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mi, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || mi.degree() == 0 {
                factors.push(rat_to_string(&abs));
            }
            for (i, &e) in mi.0.iter().enumerate() {
                if e == 1 {
                    factors.push(format!("x{i}"));
                } else if e > 1 {
                    factors.push(format!("x{i}^{e}"));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Substitution endomorphism of the truncated ring: one component per
/// variable, each with zero constant term so that truncation and
/// substitution commute.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseEndo {
    pub shape: JetShape,
    pub comps: Vec<JetPoly>,
}

impl BaseEndo {
    pub fn new(shape: JetShape, comps: Vec<JetPoly>) -> Result<Self, Error> {
        if comps.len() != shape.vars {
            return Err(Error::ShapeMismatch(format!(
                "endomorphism needs {} components, got {}",
                shape.vars,
                comps.len()
            )));
        }
        for (i, c) in comps.iter().enumerate() {
            if c.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "endomorphism component {i} has wrong shape"
                )));
            }
            if !c.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm(i));
            }
        }
        Ok(BaseEndo { shape, comps })
    }

    pub fn identity(shape: JetShape) -> Self {
        let comps = (0..shape.vars)
            .map(|i| JetPoly::var(shape, i).unwrap())
            .collect();
        BaseEndo { shape, comps }
    }

    /// Degree-1 coefficients as a vars x vars rational matrix.
    pub fn linear_part(&self) -> Vec<Vec<Rat>> {
        let m = self.shape.vars;
        let mut lp = vec![vec![Rat::zero(); m]; m];
        for (i, c) in self.comps.iter().enumerate() {
            for j in 0..m {
                lp[i][j] = c.coeff(&MultiIndex::unit(m, j));
            }
        }
        lp
    }

    /// Composition (self after other): components self_i(other).
    pub fn compose(&self, other: &BaseEndo) -> BaseEndo {
        assert_eq!(self.shape, other.shape, "endo compose: shape mismatch");
        BaseEndo {
            shape: self.shape,
            comps: self.comps.iter().map(|c| c.substitute(other)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self == &BaseEndo::identity(self.shape)
    }

    /// Compositional inverse, solved degree by degree. Requires an
    /// invertible linear part; exact.
    pub fn invert(&self) -> Result<BaseEndo, Error> {
        let m = self.shape.vars;
        if m == 0 {
            return Ok(BaseEndo::identity(self.shape));
        }
        let lp = self.linear_part();
        let lp_inv = invert_rat_matrix(&lp).ok_or_else(|| {
            Error::NotInvertible("base endomorphism: singular linear part".into())
        })?;
        // start from the linear inverse
        let mut psi_comps: Vec<JetPoly> = (0..m)
            .map(|i| {
                let mut p = JetPoly::zero(self.shape);
                for j in 0..m {
                    if !lp_inv[i][j].is_zero() {
                        p = p.add(&JetPoly::monomial(
                            self.shape,
                            MultiIndex::unit(m, j),
                            lp_inv[i][j].clone(),
                        ));
                    }
                }
                p
            })
            .collect();
        for _deg in 2..=self.shape.order.max(1) {
            let psi = BaseEndo {
                shape: self.shape,
                comps: psi_comps.clone(),
            };
            let r = self.compose(&psi); // want identity
            let mut corrections: Vec<JetPoly> = Vec::with_capacity(m);
            for i in 0..m {
                let resid = r.comps[i].sub(&JetPoly::var(self.shape, i).unwrap());
                corrections.push(resid);
            }
            if corrections.iter().all(|c| c.is_zero()) {
                break;
            }
            // delta = -L^{-1} residual, applied componentwise
            for i in 0..m {
                let mut delta = JetPoly::zero(self.shape);
                for j in 0..m {
                    if !lp_inv[i][j].is_zero() {
                        delta = delta.add(&corrections[j].scale(&lp_inv[i][j]));
                    }
                }
                psi_comps[i] = psi_comps[i].sub(&delta);
            }
        }
        let psi = BaseEndo::new(self.shape, psi_comps)?;
        debug_assert!(self.compose(&psi).is_identity());
        debug_assert!(psi.compose(self).is_identity());
        Ok(psi)
    }
}

fn invert_rat_matrix(a: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j { Rat::one() } else { Rat::zero() });
            }
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v = v.clone() / &p;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in 0..2 * n {
                    let sub = &f * &aug[col][c];
                    aug[r][c] = &aug[r][c] - sub;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// The base of every geometric object in the crate: the truncated ring shape
/// together with the substitution endomorphism modeling the pullback and its
/// exact compositional inverse.
#[derive(Clone, Debug)]
pub struct Base {
    pub shape: JetShape,
    pub phi: BaseEndo,
    pub phi_inv: BaseEndo,
}

impl Base {
    pub fn new(phi: BaseEndo) -> Result<Arc<Base>, Error> {
        let phi_inv = phi.invert()?;
        Ok(Arc::new(Base {
            shape: phi.shape,
            phi,
            phi_inv,
        }))
    }

    pub fn identity(shape: JetShape) -> Arc<Base> {
        Base::new(BaseEndo::identity(shape)).unwrap()
    }

    /// Pullback applied k times; negative k uses the inverse.
    pub fn subst_pow(&self, k: i32, f: &JetPoly) -> JetPoly {
        let mut out = f.clone();
        if k >= 0 {
            for _ in 0..k {
                out = out.substitute(&self.phi);
            }
        } else {
            for _ in 0..(-k) {
                out = out.substitute(&self.phi_inv);
            }
        }
        out
    }

    pub fn pullback(&self, f: &JetPoly) -> JetPoly {
        f.substitute(&self.phi)
    }
}
