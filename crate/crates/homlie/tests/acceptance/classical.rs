//! Independent classical Lie-algebroid oracle.
//!
//! These operators are written directly from the untwisted textbook
//! formulas — no pullbacks, no twist matrices anywhere — and read only the
//! raw structure data (anchor entries, structure functions). On fixtures
//! whose twists are all trivial, the crate's operators must agree with
//! these exactly, coefficient by coefficient.
#![allow(clippy::needless_range_loop)]

use homlie::algebroid::HomAlgebroid;
use homlie::bundle::Section;
use homlie::forms::LForm;
use homlie::jet::JetPoly;
use homlie::polymat::PolyMatrix;

/// Classical anchor action: `sum_{i,j} xi_j rho[i][j] d_i f`, no pullback.
pub fn anchor_act(alg: &HomAlgebroid, xi: &Section, f: &JetPoly) -> JetPoly {
    let shape = alg.shape();
    let mut out = JetPoly::zero(shape);
    for i in 0..shape.vars {
        let df = f.partial(i).unwrap();
        for j in 0..alg.rank {
            out = out.add(&xi.comps[j].mul(alg.anchor.get(i, j)).mul(&df));
        }
    }
    out
}

/// Classical bracket extension:
/// [f x, g y] = fg [x,y] + f a(x)(g) y - g a(y)(f) x.
pub fn bracket(alg: &HomAlgebroid, xi: &Section, eta: &Section) -> Section {
    let n = alg.rank;
    let shape = alg.shape();
    let mut out = Section::zero(n, shape);
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    for j in 0..n {
        for k in 0..n {
            let f = &xi.comps[j];
            let g = &eta.comps[k];
            out = out.add(&alg.basis_bracket(j, k).scale(&f.mul(g)));
            out = out.add(&basis[k].scale(&f.mul(&anchor_act(alg, &basis[j], g))));
            out = out.sub(&basis[j].scale(&g.mul(&anchor_act(alg, &basis[k], f))));
        }
    }
    out
}

/// Classical Cartan differential on scalar forms.
pub fn d_form(alg: &HomAlgebroid, omega: &LForm<JetPoly>) -> LForm<JetPoly> {
    let n = alg.rank;
    let shape = alg.shape();
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    LForm::from_fn(n, omega.degree + 1, |tuple| {
        let mut acc = JetPoly::zero(shape);
        for (a, &i) in tuple.iter().enumerate() {
            let args: Vec<Section> = tuple
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, &j)| basis[j].clone())
                .collect();
            let term = anchor_act(alg, &basis[i], &omega.eval(&args));
            acc = if a % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        for a in 0..tuple.len() {
            for b in a + 1..tuple.len() {
                let br = bracket(alg, &basis[tuple[a]], &basis[tuple[b]]);
                let mut args = vec![br];
                for (c, &j) in tuple.iter().enumerate() {
                    if c != a && c != b {
                        args.push(basis[j].clone());
                    }
                }
                let term = omega.eval(&args);
                acc = if (a + b) % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
        }
        acc
    })
}

/// Classical covariant derivative of a section: componentwise anchor
/// derivative plus the slot matrix action.
pub fn cov_deriv(
    alg: &HomAlgebroid,
    alpha: &[PolyMatrix],
    xi: &Section,
    s: &Section,
) -> Section {
    let r = s.rank();
    let deriv: Vec<JetPoly> = (0..r)
        .map(|k| anchor_act(alg, xi, &s.comps[k]))
        .collect();
    let mut out = Section::new(deriv);
    for j in 0..alg.rank {
        if xi.comps[j].is_zero() {
            continue;
        }
        let acted = alpha[j].apply_vec(&s.comps);
        out = out.add(&Section::new(acted).scale(&xi.comps[j]));
    }
    out
}

/// Classical exterior covariant derivative on bundle-valued forms.
pub fn d_nabla(
    alg: &HomAlgebroid,
    alpha: &[PolyMatrix],
    omega: &LForm<Section>,
) -> LForm<Section> {
    let n = alg.rank;
    let shape = alg.shape();
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    let template = omega.vals[0].clone();
    LForm::from_fn(n, omega.degree + 1, |tuple| {
        let mut acc = Section::zero(template.rank(), shape);
        for (a, &i) in tuple.iter().enumerate() {
            let args: Vec<Section> = tuple
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, &j)| basis[j].clone())
                .collect();
            let term = cov_deriv(alg, alpha, &basis[i], &omega.eval(&args));
            acc = if a % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        for a in 0..tuple.len() {
            for b in a + 1..tuple.len() {
                let br = bracket(alg, &basis[tuple[a]], &basis[tuple[b]]);
                let mut args = vec![br];
                for (c, &j) in tuple.iter().enumerate() {
                    if c != a && c != b {
                        args.push(basis[j].clone());
                    }
                }
                let term = omega.eval(&args);
                acc = if (a + b) % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
        }
        acc
    })
}

/// Classical gauge transformation of the slot matrices:
/// `alpha^psi = psi^{-1} d(psi) + psi^{-1} alpha psi`.
pub fn gauge_alpha(
    alg: &HomAlgebroid,
    psi: &PolyMatrix,
    alpha: &[PolyMatrix],
) -> Vec<PolyMatrix> {
    let n = alg.rank;
    let shape = alg.shape();
    let psi_inv = psi.invert().unwrap();
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    (0..n)
        .map(|j| {
            let dpsi = psi.map(|p| anchor_act(alg, &basis[j], p));
            psi_inv.matmul(&dpsi).add(&psi_inv.matmul(&alpha[j]).matmul(psi))
        })
        .collect()
}

/// Classical Lie derivative along a section.
pub fn lie_derivative(
    alg: &HomAlgebroid,
    xi: &Section,
    omega: &LForm<JetPoly>,
) -> LForm<JetPoly> {
    let n = alg.rank;
    let shape = alg.shape();
    let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
    LForm::from_fn(n, omega.degree, |tuple| {
        let args: Vec<Section> = tuple.iter().map(|&i| basis[i].clone()).collect();
        let mut acc = anchor_act(alg, xi, &omega.eval(&args));
        for a in 0..tuple.len() {
            let mut args2 = args.clone();
            args2[a] = bracket(alg, xi, &basis[tuple[a]]);
            acc = acc.sub(&omega.eval(&args2));
        }
        acc
    })
}

/// Classical insertion of a section into a form.
pub fn insertion(alg: &HomAlgebroid, xi: &Section, omega: &LForm<JetPoly>) -> LForm<JetPoly> {
    let n = alg.rank;
    let shape = alg.shape();
    LForm::from_fn(n, omega.degree - 1, |tuple| {
        let mut args = vec![xi.clone()];
        for &i in tuple {
            args.push(Section::basis(n, shape, i));
        }
        omega.eval(&args)
    })
}
