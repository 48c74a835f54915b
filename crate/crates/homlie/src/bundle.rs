//! Trivialized Hom-bundles: free modules over the jet ring together with an
//! invertible pullback-twisted module morphism.
//!
//! Sections are coefficient vectors over the ring. A `TwistedMor` is a map
//! `s -> M * phi*(s)`; the defining semilinearity `psi(f s) = phi*(f) psi(s)`
//! holds by construction. The bundle twist itself is such a map, and the
//! subalgebra of morphisms commuting with it is the home of gauge elements.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::Error;
use crate::jet::{Base, JetPoly, JetShape};
use crate::polymat::{PolyMatrix, SemiLin};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Section of a trivialized rank-r bundle: r ring elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub comps: Vec<JetPoly>,
}

impl Section {
    pub fn new(comps: Vec<JetPoly>) -> Self {
        Section { comps }
    }

    pub fn zero(rank: usize, shape: JetShape) -> Self {
        Section {
            comps: vec![JetPoly::zero(shape); rank],
        }
    }

    /// Constant frame section b_k.
    pub fn basis(rank: usize, shape: JetShape, k: usize) -> Self {
        let mut s = Self::zero(rank, shape);
        s.comps[k] = JetPoly::one(shape);
        s
    }

    pub fn rank(&self) -> usize {
        self.comps.len()
    }

    pub fn add(&self, other: &Section) -> Section {
        Section {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Section) -> Section {
        Section {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Section {
        Section {
            comps: self.comps.iter().map(|a| a.neg()).collect(),
        }
    }

    pub fn scale(&self, f: &JetPoly) -> Section {
        Section {
            comps: self.comps.iter().map(|a| a.mul(f)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn is_zero_up_to(&self, order: i64) -> bool {
        self.comps.iter().all(|c| c.is_zero_up_to(order))
    }

    pub fn min_valid_order(&self, shape: JetShape) -> i64 {
        self.comps
            .iter()
            .map(|c| c.valid_order())
            .min()
            .unwrap_or(shape.order)
    }

    pub fn budget_eq(&self, other: &Section, shape: JetShape, loss: i64) -> bool {
        let cmp = self
            .min_valid_order(shape)
            .min(other.min_valid_order(shape))
            .min(shape.order - loss);
        self.sub(other).is_zero_up_to(cmp)
    }

    pub fn render(&self) -> String {
        let entries: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        format!("[{}]", entries.join(", "))
    }
}

/// Trivialized Hom-bundle: rank, base, and the invertible twist matrix.
/// The twist acts by `phi_E(s) = Phi_E * phi*(s)`; invertibility (over the
/// jet ring) is checked at construction.
#[derive(Clone, Debug)]
pub struct HomBundle {
    pub id: u64,
    pub rank: usize,
    pub base: Arc<Base>,
    pub phi_e: PolyMatrix,
    pub phi_e_inv: PolyMatrix,
}

impl HomBundle {
    pub fn new(base: Arc<Base>, phi_e: PolyMatrix) -> Result<Arc<HomBundle>, Error> {
        if phi_e.rows != phi_e.cols {
            return Err(Error::ShapeMismatch("bundle twist matrix not square".into()));
        }
        if phi_e.shape != base.shape {
            return Err(Error::ShapeMismatch(
                "bundle twist matrix has wrong jet shape".into(),
            ));
        }
        let phi_e_inv = phi_e
            .invert()
            .map_err(|_| Error::NotInvertible("bundle twist matrix".into()))?;
        Ok(Arc::new(HomBundle {
            id: fresh_id(),
            rank: phi_e.rows,
            base,
            phi_e,
            phi_e_inv,
        }))
    }

    pub fn trivial(base: Arc<Base>, rank: usize) -> Arc<HomBundle> {
        let m = PolyMatrix::identity(rank, base.shape);
        HomBundle::new(base, m).unwrap()
    }

    pub fn shape(&self) -> JetShape {
        self.base.shape
    }

    /// phi_E as a semilinear map.
    pub fn twist(&self) -> SemiLin {
        SemiLin::new(self.phi_e.clone(), 1)
    }

    /// phi_E^{-1} as a semilinear map: s -> (phi*)^{-1}(Phi_E^{-1} s).
    pub fn twist_inv(&self) -> SemiLin {
        SemiLin::new(self.phi_e_inv.subst_pow(&self.base, -1), -1)
    }

    pub fn apply_twist(&self, s: &Section) -> Section {
        Section::new(self.twist().apply(&self.base, &s.comps))
    }

    pub fn apply_twist_inv(&self, s: &Section) -> Section {
        Section::new(self.twist_inv().apply(&self.base, &s.comps))
    }

    /// The twisted-morphism image of phi_E itself (the gauge identity).
    pub fn phi_e_mor(&self) -> TwistedMor {
        TwistedMor::new(self.phi_e.clone())
    }
}

/// Global pullback-twisted endomorphism: acts by `s -> mat * phi*(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedMor {
    pub mat: PolyMatrix,
}

impl TwistedMor {
    pub fn new(mat: PolyMatrix) -> Self {
        TwistedMor { mat }
    }

    pub fn semilin(&self) -> SemiLin {
        SemiLin::new(self.mat.clone(), 1)
    }

    pub fn apply(&self, base: &Base, s: &Section) -> Section {
        Section::new(self.semilin().apply(base, &s.comps))
    }

    pub fn add(&self, other: &TwistedMor) -> TwistedMor {
        TwistedMor::new(self.mat.add(&other.mat))
    }

    pub fn sub(&self, other: &TwistedMor) -> TwistedMor {
        TwistedMor::new(self.mat.sub(&other.mat))
    }

    pub fn scale(&self, f: &JetPoly) -> TwistedMor {
        TwistedMor::new(self.mat.scale_poly(f))
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }
}

/// Apply a twisted morphism to a section.
pub fn twisted_apply(bundle: &HomBundle, psi: &TwistedMor, s: &Section) -> Result<Section, Error> {
    if s.rank() != bundle.rank || psi.mat.rows != bundle.rank || psi.mat.cols != bundle.rank {
        return Err(Error::ShapeMismatch(
            "twisted morphism application: rank mismatch".into(),
        ));
    }
    Ok(psi.apply(&bundle.base, s))
}

/// Conjugation by the bundle twist: phi_E o psi o phi_E^{-1}.
/// In matrix form: Phi_E * phi*(M) * phi*(Phi_E^{-1}).
pub fn ad_phi_e(bundle: &HomBundle, psi: &TwistedMor) -> TwistedMor {
    let base = &bundle.base;
    let m = bundle
        .phi_e
        .matmul(&psi.mat.subst_pow(base, 1))
        .matmul(&bundle.phi_e_inv.subst_pow(base, 1));
    TwistedMor::new(m)
}

/// Inverse conjugation: phi_E^{-1} o psi o phi_E.
pub fn ad_phi_e_inv(bundle: &HomBundle, psi: &TwistedMor) -> TwistedMor {
    let base = &bundle.base;
    let inner = bundle
        .phi_e_inv
        .matmul(&psi.mat)
        .matmul(&bundle.phi_e.subst_pow(base, 1));
    TwistedMor::new(inner.subst_pow(base, -1))
}

/// Residual of the commutation `psi o phi_E = phi_E o psi`, i.e.
/// `M * phi*(Phi_E) - Phi_E * phi*(M)`.
pub fn end_phi_e_residual(bundle: &HomBundle, psi: &TwistedMor) -> PolyMatrix {
    let base = &bundle.base;
    let lhs = psi.mat.matmul(&bundle.phi_e.subst_pow(base, 1));
    let rhs = bundle.phi_e.matmul(&psi.mat.subst_pow(base, 1));
    lhs.sub(&rhs)
}

/// Membership in the commuting subalgebra, checked exactly (no derivatives
/// are involved, so the budget loss is zero).
pub fn in_end_phi_e(bundle: &HomBundle, psi: &TwistedMor) -> bool {
    end_phi_e_residual(bundle, psi).is_zero_up_to(bundle.shape().order)
}
