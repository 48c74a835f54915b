//! Graded alternating forms on an algebroid, generic over the coefficient
//! value (ring elements, bundle sections, or twisted endomorphism matrices).
//!
//! Forms are stored densely on strictly increasing index tuples, so
//! antisymmetry is structural. Evaluation at arbitrary sections expands
//! multilinearly with permutation signs; the pairing with the dual frame is
//! untwisted — every twist appears explicitly in the operators that act on
//! forms, never in the pairing itself.
//!
//! `exterior_d` implements the one displayed differential shared by the
//! scalar, bundle-valued, and endomorphism-valued cases; the three cases
//! plug in their own covariant derivative and twist through `DiffCtx`.

use crate::bundle::Section;
use crate::jet::{JetPoly, JetShape};
use crate::polymat::PolyMatrix;
use crate::rat::Rat;

/// Strictly increasing index tuples of length `p` drawn from `0..n`.
pub fn index_tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    if p > n {
        return Vec::new();
    }
    if p == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..p).collect();
    loop {
        out.push(cur.clone());
        // advance the combination
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - p {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..p {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Sign and sorted position of an arbitrary tuple: `None` when an index
/// repeats, otherwise the permutation sign taking it to sorted order.
pub fn sort_sign(tuple: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut idx: Vec<usize> = tuple.to_vec();
    let mut sign = 1i64;
    for i in 0..idx.len() {
        for j in (i + 1..idx.len()).rev() {
            if idx[j - 1] > idx[j] {
                idx.swap(j - 1, j);
                sign = -sign;
            }
        }
    }
    for w in idx.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((idx, sign))
}

/// Coefficient values a form can carry.
pub trait FormValue: Clone + PartialEq {
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, f: &JetPoly) -> Self;
    fn scale_rat(&self, c: &Rat) -> Self;
    fn is_zero(&self) -> bool;
    fn is_zero_up_to(&self, order: i64) -> bool;
    fn min_valid_order(&self, shape: JetShape) -> i64;
    fn zero_like(&self) -> Self;
    fn render(&self) -> String;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl FormValue for JetPoly {
    fn add(&self, other: &Self) -> Self {
        JetPoly::add(self, other)
    }
    fn neg(&self) -> Self {
        JetPoly::neg(self)
    }
    fn scale(&self, f: &JetPoly) -> Self {
        self.mul(f)
    }
    fn scale_rat(&self, c: &Rat) -> Self {
        JetPoly::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        JetPoly::is_zero(self)
    }
    fn is_zero_up_to(&self, order: i64) -> bool {
        JetPoly::is_zero_up_to(self, order)
    }
    fn min_valid_order(&self, _shape: JetShape) -> i64 {
        self.valid_order()
    }
    fn zero_like(&self) -> Self {
        JetPoly::zero(self.shape())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FormValue for Section {
    fn add(&self, other: &Self) -> Self {
        Section::add(self, other)
    }
    fn neg(&self) -> Self {
        Section::neg(self)
    }
    fn scale(&self, f: &JetPoly) -> Self {
        Section::scale(self, f)
    }
    fn scale_rat(&self, c: &Rat) -> Self {
        Section::new(self.comps.iter().map(|p| p.scale(c)).collect())
    }
    fn is_zero(&self) -> bool {
        Section::is_zero(self)
    }
    fn is_zero_up_to(&self, order: i64) -> bool {
        Section::is_zero_up_to(self, order)
    }
    fn min_valid_order(&self, shape: JetShape) -> i64 {
        Section::min_valid_order(self, shape)
    }
    fn zero_like(&self) -> Self {
        Section::new(self.comps.iter().map(|p| JetPoly::zero(p.shape())).collect())
    }
    fn render(&self) -> String {
        Section::render(self)
    }
}

impl FormValue for PolyMatrix {
    fn add(&self, other: &Self) -> Self {
        PolyMatrix::add(self, other)
    }
    fn neg(&self) -> Self {
        PolyMatrix::neg(self)
    }
    fn scale(&self, f: &JetPoly) -> Self {
        self.scale_poly(f)
    }
    fn scale_rat(&self, c: &Rat) -> Self {
        PolyMatrix::scale_rat(self, c)
    }
    fn is_zero(&self) -> bool {
        PolyMatrix::is_zero(self)
    }
    fn is_zero_up_to(&self, order: i64) -> bool {
        PolyMatrix::is_zero_up_to(self, order)
    }
    fn min_valid_order(&self, _shape: JetShape) -> i64 {
        PolyMatrix::min_valid_order(self)
    }
    fn zero_like(&self) -> Self {
        PolyMatrix::zeros(self.rows, self.cols, self.shape)
    }
    fn render(&self) -> String {
        PolyMatrix::render(self)
    }
}

/// Alternating p-form with values in `V`, over an algebroid of the given
/// rank. Coefficients are stored for every sorted tuple, in the order
/// produced by `index_tuples`.
#[derive(Clone, Debug, PartialEq)]
pub struct LForm<V: FormValue> {
    pub algebroid_rank: usize,
    pub degree: usize,
    pub vals: Vec<V>,
}

impl<V: FormValue> LForm<V> {
    pub fn new(algebroid_rank: usize, degree: usize, vals: Vec<V>) -> Self {
        assert_eq!(
            vals.len(),
            index_tuples(algebroid_rank, degree).len(),
            "form coefficient count mismatch"
        );
        LForm {
            algebroid_rank,
            degree,
            vals,
        }
    }

    pub fn from_fn(
        algebroid_rank: usize,
        degree: usize,
        mut f: impl FnMut(&[usize]) -> V,
    ) -> Self {
        let tuples = index_tuples(algebroid_rank, degree);
        LForm {
            algebroid_rank,
            degree,
            vals: tuples.iter().map(|t| f(t)).collect(),
        }
    }

    pub fn zero_like_value(algebroid_rank: usize, degree: usize, template: &V) -> Self {
        Self::from_fn(algebroid_rank, degree, |_| template.zero_like())
    }

    pub fn tuples(&self) -> Vec<Vec<usize>> {
        index_tuples(self.algebroid_rank, self.degree)
    }

    /// Coefficient at a sorted tuple.
    pub fn coeff(&self, tuple: &[usize]) -> &V {
        let tuples = self.tuples();
        let pos = tuples
            .iter()
            .position(|t| t == tuple)
            .expect("coeff: tuple not sorted or out of range");
        &self.vals[pos]
    }

    /// Value at an arbitrary basis tuple, honoring antisymmetry.
    pub fn at(&self, tuple: &[usize]) -> V {
        match sort_sign(tuple) {
            None => self.vals[0].zero_like(),
            Some((sorted, sign)) => {
                let v = self.coeff(&sorted);
                if sign >= 0 {
                    v.clone()
                } else {
                    v.neg()
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "form degree mismatch");
        LForm {
            algebroid_rank: self.algebroid_rank,
            degree: self.degree,
            vals: self
                .vals
                .iter()
                .zip(&other.vals)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LForm {
            algebroid_rank: self.algebroid_rank,
            degree: self.degree,
            vals: self.vals.iter().map(|v| v.neg()).collect(),
        }
    }

    pub fn scale(&self, f: &JetPoly) -> Self {
        LForm {
            algebroid_rank: self.algebroid_rank,
            degree: self.degree,
            vals: self.vals.iter().map(|v| v.scale(f)).collect(),
        }
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        LForm {
            algebroid_rank: self.algebroid_rank,
            degree: self.degree,
            vals: self.vals.iter().map(|v| v.scale_rat(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| v.is_zero())
    }

    pub fn is_zero_up_to(&self, order: i64) -> bool {
        self.vals.iter().all(|v| v.is_zero_up_to(order))
    }

    pub fn min_valid_order(&self, shape: JetShape) -> i64 {
        self.vals
            .iter()
            .map(|v| v.min_valid_order(shape))
            .min()
            .unwrap_or(shape.order)
    }

    pub fn budget_eq(&self, other: &Self, shape: JetShape, loss: i64) -> bool {
        let cmp = self
            .min_valid_order(shape)
            .min(other.min_valid_order(shape))
            .min(shape.order - loss);
        self.sub(other).is_zero_up_to(cmp)
    }

    /// Multilinear evaluation at `degree` many algebroid sections. The
    /// pairing of the dual frame against the frame is the Kronecker delta,
    /// extended by a determinant over the argument coefficients.
    pub fn eval(&self, args: &[Section]) -> V {
        assert_eq!(args.len(), self.degree, "form evaluation arity mismatch");
        let tuples = self.tuples();
        let p = self.degree;
        let mut acc = self.vals[0].zero_like();
        for (pos, tuple) in tuples.iter().enumerate() {
            if self.vals[pos].is_zero() {
                continue;
            }
            // det over permutations of the argument coefficients at `tuple`
            let mut det = None::<JetPoly>;
            for (perm, sign) in permutations_with_sign(p) {
                let mut prod: Option<JetPoly> = None;
                for (a, &slot) in perm.iter().enumerate() {
                    let c = &args[slot].comps[tuple[a]];
                    prod = Some(match prod {
                        None => c.clone(),
                        Some(p0) => p0.mul(c),
                    });
                }
                if let Some(pr) = prod {
                    let signed = if sign >= 0 { pr } else { pr.neg() };
                    det = Some(match det {
                        None => signed,
                        Some(d) => d.add(&signed),
                    });
                }
            }
            match det {
                None => {
                    // degree 0: the empty product is 1
                    acc = acc.add(&self.vals[pos]);
                }
                Some(d) => {
                    acc = acc.add(&self.vals[pos].scale(&d));
                }
            }
        }
        acc
    }

    pub fn render(&self) -> String {
        let tuples = self.tuples();
        let parts: Vec<String> = tuples
            .iter()
            .zip(&self.vals)
            .map(|(t, v)| {
                let idx: Vec<String> = t.iter().map(|i| i.to_string()).collect();
                format!("e[{}]: {}", idx.join(","), v.render())
            })
            .collect();
        format!("{{{}}}", parts.join("; "))
    }
}

/// All permutations of 0..p with signs. p stays tiny here, so signs are
/// read off the inversion count.
pub fn permutations_with_sign(p: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(remaining: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            prefix.push(v);
            rec(remaining, prefix, out);
            prefix.pop();
            remaining.insert(i, v);
        }
    }
    let mut perms = Vec::new();
    rec(&mut (0..p).collect(), &mut Vec::new(), &mut perms);
    perms
        .into_iter()
        .map(|perm| {
            let mut inversions = 0;
            for i in 0..perm.len() {
                for j in i + 1..perm.len() {
                    if perm[i] > perm[j] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            (perm, sign)
        })
        .collect()
}

/// Context for the shared exterior differential: the covariant derivative in
/// the direction of a section, the internal twist of a form, the bracket of
/// sections, and the inverse algebroid twist applied to a section.
pub trait DiffCtx<V: FormValue> {
    fn rank(&self) -> usize;
    fn shape(&self) -> JetShape;
    fn cov_deriv(&self, xi: &Section, v: &V) -> V;
    fn twist_form(&self, omega: &LForm<V>) -> LForm<V>;
    fn bracket(&self, xi: &Section, eta: &Section) -> Section;
    fn phi_l_inv(&self, xi: &Section) -> Section;
}

/// The displayed degree-1 differential shared by the scalar
/// Chevalley-Eilenberg operator and the covariant extensions: first sum
/// differentiates with the omitted argument, second sum inserts the bracket
/// of twisted arguments into the twisted form. Budget loss 1.
pub fn exterior_d<V: FormValue, C: DiffCtx<V>>(ctx: &C, omega: &LForm<V>) -> LForm<V> {
    let n = ctx.rank();
    let shape = ctx.shape();
    let p = omega.degree;
    let twisted = ctx.twist_form(omega);
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    let inv_basis: Vec<Section> = basis.iter().map(|b| ctx.phi_l_inv(b)).collect();
    LForm::from_fn(n, p + 1, |tuple| {
        let mut acc: Option<V> = None;
        // sum_i (-1)^i cov(xi_i, omega(phi_L^{-1} of the others))
        for (a, &i) in tuple.iter().enumerate() {
            let args: Vec<Section> = tuple
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, &j)| inv_basis[j].clone())
                .collect();
            let inner = omega.eval(&args);
            let term = ctx.cov_deriv(&basis[i], &inner);
            let term = if a % 2 == 0 { term } else { term.neg() };
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        // sum_{a<b} (-1)^{a+b} twisted(omega)([phi^{-1} xi_a, phi^{-1} xi_b], rest)
        for a in 0..tuple.len() {
            for b in a + 1..tuple.len() {
                let br = ctx.bracket(&inv_basis[tuple[a]], &inv_basis[tuple[b]]);
                let mut args = vec![br];
                for (c, &j) in tuple.iter().enumerate() {
                    if c != a && c != b {
                        args.push(basis[j].clone());
                    }
                }
                let term = twisted.eval(&args);
                let term = if (a + b) % 2 == 0 { term } else { term.neg() };
                acc = Some(match acc {
                    None => term,
                    Some(s) => s.add(&term),
                });
            }
        }
        acc.unwrap_or_else(|| omega.vals[0].zero_like())
    })
}
