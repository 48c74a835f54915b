//! Scenario files, the fixture library, the check registry, and report
//! emission.
//!
//! A scenario is a JSON description of the base endomorphism, the bundle
//! and algebroid twists, structure functions, and named connections, gauge
//! elements and metrics. Polynomials travel as text in a fixed grammar;
//! rationals as `p/q` strings; nothing in any interface is floating point.
//!
//! `run_checks` executes the full validator battery in a canonical order.
//! Every check carries a distinct anchor string identifying the claim it
//! exercises; reports are deterministic up to the timing fields.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebroid::HomAlgebroid;
use crate::bundle::{ad_phi_e, in_end_phi_e, HomBundle, Section, TwistedMor};
use crate::cedram;
use crate::coeff;
use crate::connection::{
    d_nabla, end_connection_apply, end_connection_split_residual, end_product_residual,
    twist_e_form, Connection,
};
use crate::error::Error;
use crate::forms::LForm;
use crate::gauge::{
    self, connections_equal, end_kernel_dims, end_kernel_vectors, end_operator_matrix,
    find_gauge_transform, gauge_act, gauge_act_on_frame, gauge_inv, gauge_mul, is_irreducible,
    GaugeElement,
};
use crate::jet::{Base, BaseEndo, JetPoly, JetShape, MultiIndex};
use crate::linalg::{dot, vec_is_zero};
use crate::polymat::PolyMatrix;
use crate::rat::{q, rat_from_str, Rat};
use crate::slice::{
    self, coulomb_decompose, gau0_basis, laplacian, local_slice_check, slice_dimension,
    slice_tangent_basis, MetricH, OpName, Subspace,
};

// ---------------------------------------------------------------------------
// polynomial text grammar
// ---------------------------------------------------------------------------

/// Parse the polynomial grammar: terms joined by `+`/`-`, integer or `p/q`
/// coefficients, variables `x0..x{m-1}`, powers with `^`, products with `*`.
pub fn parse_poly(text: &str, shape: JetShape) -> Result<JetPoly, Error> {
    let mut tokens = tokenize(text)?;
    tokens.reverse(); // pop from the back
    let mut result = JetPoly::zero(shape);
    let mut sign = 1i64;
    let mut saw_sign = false;
    // leading sign
    if let Some(Tok::Minus) = tokens.last() {
        tokens.pop();
        sign = -1;
        saw_sign = true;
    } else if let Some(Tok::Plus) = tokens.last() {
        tokens.pop();
        saw_sign = true;
    }
    loop {
        if tokens.is_empty() {
            if saw_sign {
                return Err(parse_err(text, "dangling sign"));
            }
            // empty input means zero
            return Ok(result);
        }
        let term = parse_term(&mut tokens, text, shape)?;
        result = if sign >= 0 {
            result.add(&term)
        } else {
            result.sub(&term)
        };
        match tokens.pop() {
            None => return Ok(result),
            Some(Tok::Plus) => {
                sign = 1;
                saw_sign = true;
            }
            Some(Tok::Minus) => {
                sign = -1;
                saw_sign = true;
            }
            Some(_) => return Err(parse_err(text, "expected + or - between terms")),
        }
    }
}

fn parse_term(tokens: &mut Vec<Tok>, text: &str, shape: JetShape) -> Result<JetPoly, Error> {
    let mut acc = JetPoly::one(shape);
    loop {
        let factor = parse_factor(tokens, text, shape)?;
        acc = acc.mul(&factor);
        if let Some(Tok::Star) = tokens.last() {
            tokens.pop();
            continue;
        }
        return Ok(acc);
    }
}

fn parse_factor(tokens: &mut Vec<Tok>, text: &str, shape: JetShape) -> Result<JetPoly, Error> {
    match tokens.pop() {
        Some(Tok::Int(n)) => {
            // optional /q
            if let Some(Tok::Slash) = tokens.last() {
                tokens.pop();
                match tokens.pop() {
                    Some(Tok::Int(d)) => {
                        let r = rat_from_str(&format!("{n}/{d}"))
                            .ok_or_else(|| parse_err(text, "bad rational"))?;
                        Ok(JetPoly::constant(shape, r))
                    }
                    _ => Err(parse_err(text, "expected denominator")),
                }
            } else {
                let r = rat_from_str(&n).ok_or_else(|| parse_err(text, "bad integer"))?;
                Ok(JetPoly::constant(shape, r))
            }
        }
        Some(Tok::Var(i)) => {
            if i >= shape.vars {
                return Err(Error::UnknownVariable(format!("x{i}")));
            }
            let mut exp = 1u32;
            if let Some(Tok::Caret) = tokens.last() {
                tokens.pop();
                match tokens.pop() {
                    Some(Tok::Int(e)) => {
                        exp = e
                            .parse()
                            .map_err(|_| parse_err(text, "bad exponent"))?;
                    }
                    _ => return Err(parse_err(text, "expected exponent")),
                }
            }
            let mut idx = vec![0u32; shape.vars];
            idx[i] = exp;
            Ok(JetPoly::monomial(shape, MultiIndex(idx), q(1)))
        }
        _ => Err(parse_err(text, "expected a coefficient or a variable")),
    }
}

fn parse_err(text: &str, msg: &str) -> Error {
    Error::Parse {
        path: format!("polynomial '{text}'"),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(String),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, Error> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Tok::Int(chars[start..i].iter().collect()));
            }
            'x' => {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(parse_err(text, "variable needs an index"));
                }
                let idx: usize = chars[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| parse_err(text, "bad variable index"))?;
                out.push(Tok::Var(idx));
            }
            other => {
                return Err(parse_err(text, &format!("unexpected character '{other}'")));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// scenario schema
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BaseSpec {
    pub vars: usize,
    pub order: i64,
    pub phi: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BundleSpec {
    pub rank: usize,
    #[serde(rename = "phiE")]
    pub phi_e: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlgebroidSpec {
    pub rank: usize,
    #[serde(rename = "phiL")]
    pub phi_l: Vec<Vec<String>>,
    pub anchor: Vec<Vec<String>>,
    pub c: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ConnSpec {
    Plain(Vec<Vec<Vec<String>>>),
    WithTwist {
        alpha: Vec<Vec<Vec<String>>>,
        twist: i32,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub base: BaseSpec,
    pub bundle: BundleSpec,
    pub algebroid: AlgebroidSpec,
    #[serde(default)]
    pub connections: BTreeMap<String, ConnSpec>,
    #[serde(default)]
    pub gauges: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub metrics: BTreeMap<String, Vec<Vec<String>>>,
}

fn default_name() -> String {
    "scenario".into()
}

pub fn parse_scenario(text: &str) -> Result<Scenario, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: "scenario".into(),
        msg: e.to_string(),
    })
}

pub fn emit_scenario(s: &Scenario) -> String {
    let mut out = serde_json::to_string_pretty(s).expect("scenario serializes");
    out.push('\n');
    out
}

/// Everything a scenario describes, constructed and invertibility-checked.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub base: Arc<Base>,
    pub bundle: Arc<HomBundle>,
    pub algebroid: Arc<HomAlgebroid>,
    pub connections: BTreeMap<String, Connection>,
    pub gauges: BTreeMap<String, TwistedMor>,
    pub metrics: BTreeMap<String, MetricH>,
}

fn parse_matrix(
    rows: &[Vec<String>],
    shape: JetShape,
    expect: (usize, usize),
) -> Result<PolyMatrix, Error> {
    if rows.len() != expect.0 || rows.iter().any(|r| r.len() != expect.1) {
        return Err(Error::ShapeMismatch(format!(
            "matrix must be {} x {}",
            expect.0, expect.1
        )));
    }
    let mut parsed = Vec::with_capacity(rows.len());
    for r in rows {
        let mut pr = Vec::with_capacity(r.len());
        for cell in r {
            pr.push(parse_poly(cell, shape)?);
        }
        parsed.push(pr);
    }
    if parsed.is_empty() || parsed[0].is_empty() {
        return Ok(PolyMatrix::zeros(expect.0, expect.1, shape));
    }
    PolyMatrix::from_rows(shape, parsed)
}

fn parse_c_key(key: &str) -> Result<(usize, usize, usize), Error> {
    let inner: Vec<&str> = key
        .trim_start_matches('c')
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split("][")
        .collect();
    if inner.len() != 3 {
        return Err(Error::Parse {
            path: format!("structure key '{key}'"),
            msg: "expected c[k][i][j]".into(),
        });
    }
    let parse_idx = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            path: format!("structure key '{key}'"),
            msg: "bad index".into(),
        })
    };
    Ok((
        parse_idx(inner[0])?,
        parse_idx(inner[1])?,
        parse_idx(inner[2])?,
    ))
}

impl Scenario {
    pub fn build(&self) -> Result<Model, Error> {
        let shape = JetShape::new(self.base.vars, self.base.order);
        if self.base.phi.len() != self.base.vars {
            return Err(Error::ShapeMismatch(format!(
                "base needs {} endomorphism components",
                self.base.vars
            )));
        }
        let comps = self
            .base
            .phi
            .iter()
            .map(|s| parse_poly(s, shape))
            .collect::<Result<Vec<_>, _>>()?;
        let base = Base::new(BaseEndo::new(shape, comps)?)?;

        let phi_e = parse_matrix(&self.bundle.phi_e, shape, (self.bundle.rank, self.bundle.rank))?;
        let bundle = HomBundle::new(base.clone(), phi_e)?;

        let n = self.algebroid.rank;
        let phi_l = parse_matrix(&self.algebroid.phi_l, shape, (n, n))?;
        let anchor = parse_matrix(&self.algebroid.anchor, shape, (shape.vars, n))?;
        let mut structure = Vec::new();
        for (key, val) in &self.algebroid.c {
            let (k, i, j) = parse_c_key(key)?;
            structure.push(((k, i, j), parse_poly(val, shape)?));
        }
        let algebroid = HomAlgebroid::new(base.clone(), phi_l, anchor, &structure)?;

        let mut connections = BTreeMap::new();
        for (name, spec) in &self.connections {
            let (alpha_rows, twist) = match spec {
                ConnSpec::Plain(a) => (a, 1),
                ConnSpec::WithTwist { alpha, twist } => (alpha, *twist),
            };
            if alpha_rows.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "connection '{name}' needs {n} slot matrices"
                )));
            }
            let mut slots = Vec::with_capacity(n);
            for m in alpha_rows {
                slots.push(parse_matrix(m, shape, (bundle.rank, bundle.rank))?);
            }
            connections.insert(
                name.clone(),
                Connection::with_twist(bundle.clone(), algebroid.clone(), slots, twist)?,
            );
        }

        let mut gauges = BTreeMap::new();
        for (name, rows) in &self.gauges {
            let m = parse_matrix(rows, shape, (bundle.rank, bundle.rank))?;
            gauges.insert(name.clone(), TwistedMor::new(m));
        }

        let mut metrics = BTreeMap::new();
        for (name, rows) in &self.metrics {
            let m = parse_matrix(rows, shape, (bundle.rank, bundle.rank))?;
            metrics.insert(name.clone(), MetricH::new(m)?);
        }

        Ok(Model {
            name: self.name.clone(),
            base,
            bundle,
            algebroid,
            connections,
            gauges,
            metrics,
        })
    }
}

impl Model {
    /// Gauge element by name, validated on use.
    pub fn gauge(&self, name: &str) -> Result<GaugeElement, Error> {
        let mor = self
            .gauges
            .get(name)
            .ok_or_else(|| Error::Parse {
                path: format!("gauge '{name}'"),
                msg: "not defined in the scenario".into(),
            })?
            .clone();
        GaugeElement::new(&self.bundle, mor)
    }

    pub fn connection(&self, name: &str) -> Result<&Connection, Error> {
        self.connections.get(name).ok_or_else(|| Error::Parse {
            path: format!("connection '{name}'"),
            msg: "not defined in the scenario".into(),
        })
    }

    /// The trivial connection of this model.
    pub fn trivial_connection(&self) -> Connection {
        Connection::trivial(self.bundle.clone(), self.algebroid.clone())
    }

    /// Render back into the schema with canonical polynomial text.
    pub fn to_scenario(&self) -> Scenario {
        let shape = self.bundle.shape();
        let render_matrix = |m: &PolyMatrix| -> Vec<Vec<String>> {
            (0..m.rows)
                .map(|i| (0..m.cols).map(|j| m.get(i, j).to_string()).collect())
                .collect()
        };
        let mut c = BTreeMap::new();
        let n = self.algebroid.rank;
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = self.algebroid.structure_fn(k, i, j);
                    if !v.is_zero() {
                        c.insert(format!("c[{k}][{i}][{j}]"), v.to_string());
                    }
                }
            }
        }
        Scenario {
            name: self.name.clone(),
            base: BaseSpec {
                vars: shape.vars,
                order: shape.order,
                phi: self.base.phi.comps.iter().map(|p| p.to_string()).collect(),
            },
            bundle: BundleSpec {
                rank: self.bundle.rank,
                phi_e: render_matrix(&self.bundle.phi_e),
            },
            algebroid: AlgebroidSpec {
                rank: n,
                phi_l: render_matrix(&self.algebroid.phi_l),
                anchor: render_matrix(&self.algebroid.anchor),
                c,
            },
            connections: self
                .connections
                .iter()
                .map(|(name, conn)| {
                    let alpha: Vec<Vec<Vec<String>>> =
                        conn.alpha.iter().map(&render_matrix).collect();
                    let spec = if conn.alpha_twist == 1 {
                        ConnSpec::Plain(alpha)
                    } else {
                        ConnSpec::WithTwist {
                            alpha,
                            twist: conn.alpha_twist,
                        }
                    };
                    (name.clone(), spec)
                })
                .collect(),
            gauges: self
                .gauges
                .iter()
                .map(|(name, g)| (name.clone(), render_matrix(&g.mat)))
                .collect(),
            metrics: self
                .metrics
                .iter()
                .map(|(name, h)| (name.clone(), render_matrix(&h.mat)))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

pub mod fixtures {
    use super::*;

    fn build(s: Scenario) -> Model {
        s.build().expect("fixture scenario builds")
    }

    fn mat1(entries: &[&str]) -> Vec<Vec<String>> {
        vec![entries.iter().map(|s| s.to_string()).collect()]
    }

    fn mat(rows: &[&[&str]]) -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    /// One variable at order 3 with a doubling base map; rank-1 bundle and
    /// algebroid, anchor coefficient x0.
    pub fn s1() -> Model {
        build(Scenario {
            name: "s1".into(),
            base: BaseSpec {
                vars: 1,
                order: 3,
                phi: vec!["2*x0".into()],
            },
            bundle: BundleSpec {
                rank: 1,
                phi_e: mat1(&["1"]),
            },
            algebroid: AlgebroidSpec {
                rank: 1,
                phi_l: mat1(&["1"]),
                anchor: mat1(&["x0"]),
                c: BTreeMap::new(),
            },
            connections: [
                ("triv".to_string(), ConnSpec::Plain(vec![vec![vec!["0".into()]]])),
                ("unit".to_string(), ConnSpec::Plain(vec![vec![vec!["1".into()]]])),
            ]
            .into_iter()
            .collect(),
            gauges: [("scale2".to_string(), mat1(&["2"]))].into_iter().collect(),
            metrics: [("flat".to_string(), mat1(&["1"]))].into_iter().collect(),
        })
    }

    /// Scalar base (no variables), so(3) structure constants, zero anchor.
    pub fn s2() -> Model {
        build(Scenario {
            name: "s2".into(),
            base: BaseSpec {
                vars: 0,
                order: 3,
                phi: vec![],
            },
            bundle: BundleSpec {
                rank: 1,
                phi_e: mat1(&["1"]),
            },
            algebroid: AlgebroidSpec {
                rank: 3,
                phi_l: mat(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]),
                anchor: vec![],
                c: [
                    ("c[2][0][1]".to_string(), "1".to_string()),
                    ("c[0][1][2]".to_string(), "1".to_string()),
                    ("c[1][0][2]".to_string(), "-1".to_string()),
                ]
                .into_iter()
                .collect(),
            },
            connections: [(
                "triv".to_string(),
                ConnSpec::Plain(vec![
                    vec![vec!["0".into()]],
                    vec![vec!["0".into()]],
                    vec![vec!["0".into()]],
                ]),
            )]
            .into_iter()
            .collect(),
            gauges: [("scale2".to_string(), mat1(&["2"]))].into_iter().collect(),
            metrics: [("flat".to_string(), mat1(&["1"]))].into_iter().collect(),
        })
    }

    /// The s1 base and algebroid with a rank-2 bundle.
    pub fn s3() -> Model {
        build(Scenario {
            name: "s3".into(),
            base: BaseSpec {
                vars: 1,
                order: 3,
                phi: vec!["2*x0".into()],
            },
            bundle: BundleSpec {
                rank: 2,
                phi_e: mat(&[&["1", "0"], &["0", "1"]]),
            },
            algebroid: AlgebroidSpec {
                rank: 1,
                phi_l: mat1(&["1"]),
                anchor: mat1(&["x0"]),
                c: BTreeMap::new(),
            },
            connections: [
                (
                    "triv".to_string(),
                    ConnSpec::Plain(vec![vec![
                        vec!["0".into(), "0".into()],
                        vec!["0".into(), "0".into()],
                    ]]),
                ),
                (
                    "upper".to_string(),
                    ConnSpec::Plain(vec![vec![
                        vec!["0".into(), "1".into()],
                        vec!["0".into(), "0".into()],
                    ]]),
                ),
            ]
            .into_iter()
            .collect(),
            gauges: [
                ("diag12".to_string(), mat(&[&["1", "0"], &["0", "2"]])),
                ("mix".to_string(), mat(&[&["1", "1"], &["0", "1"]])),
            ]
            .into_iter()
            .collect(),
            metrics: [("flat".to_string(), mat(&[&["1", "0"], &["0", "1"]]))]
                .into_iter()
                .collect(),
        })
    }

    /// Untwisted rank-2 fixture: identity base map, unit anchor. Every
    /// operator degenerates to its classical counterpart here.
    pub fn s4_classical() -> Model {
        build(Scenario {
            name: "s4".into(),
            base: BaseSpec {
                vars: 1,
                order: 3,
                phi: vec!["x0".into()],
            },
            bundle: BundleSpec {
                rank: 2,
                phi_e: mat(&[&["1", "0"], &["0", "1"]]),
            },
            algebroid: AlgebroidSpec {
                rank: 1,
                phi_l: mat1(&["1"]),
                anchor: mat1(&["1"]),
                c: BTreeMap::new(),
            },
            connections: [
                (
                    "triv".to_string(),
                    ConnSpec::Plain(vec![vec![
                        vec!["0".into(), "0".into()],
                        vec!["0".into(), "0".into()],
                    ]]),
                ),
                (
                    "shear".to_string(),
                    ConnSpec::Plain(vec![vec![
                        vec!["0".into(), "x0".into()],
                        vec!["0".into(), "0".into()],
                    ]]),
                ),
                (
                    "irr".to_string(),
                    ConnSpec::Plain(vec![vec![
                        vec!["0".into(), "1".into()],
                        vec!["x0".into(), "0".into()],
                    ]]),
                ),
            ]
            .into_iter()
            .collect(),
            gauges: [
                ("shearx".to_string(), mat(&[&["1", "x0"], &["0", "1"]])),
                ("diag12".to_string(), mat(&[&["1", "0"], &["0", "2"]])),
            ]
            .into_iter()
            .collect(),
            metrics: [("flat".to_string(), mat(&[&["1", "0"], &["0", "1"]]))]
                .into_iter()
                .collect(),
        })
    }

    /// so(3) twisted by the cyclic frame automorphism: bracket composed
    /// with the rotation, twist matrix the rotation itself. A genuinely
    /// twisted structure whose differential still squares to zero.
    pub fn s2_twisted() -> Model {
        build(Scenario {
            name: "s2t".into(),
            base: BaseSpec {
                vars: 0,
                order: 3,
                phi: vec![],
            },
            bundle: BundleSpec {
                rank: 1,
                phi_e: mat1(&["1"]),
            },
            algebroid: AlgebroidSpec {
                rank: 3,
                phi_l: mat(&[&["0", "0", "1"], &["1", "0", "0"], &["0", "1", "0"]]),
                anchor: vec![],
                c: [
                    ("c[0][0][1]".to_string(), "1".to_string()),
                    ("c[1][1][2]".to_string(), "1".to_string()),
                    ("c[2][0][2]".to_string(), "-1".to_string()),
                ]
                .into_iter()
                .collect(),
            },
            connections: [(
                "triv".to_string(),
                ConnSpec::Plain(vec![
                    vec![vec!["0".into()]],
                    vec![vec!["0".into()]],
                    vec![vec!["0".into()]],
                ]),
            )]
            .into_iter()
            .collect(),
            gauges: [("scale2".to_string(), mat1(&["2"]))].into_iter().collect(),
            metrics: [("flat".to_string(), mat1(&["1"]))].into_iter().collect(),
        })
    }

    /// Negative fixture: one so(3) constant corrupted, breaking the twisted
    /// Jacobi identity and the square-zero property.
    pub fn s2_corrupted() -> Model {
        let mut s = s2().to_scenario();
        s.name = "s2-corrupted".into();
        // scaling the diagonal constant alone leaves the bracket a Lie
        // bracket (every double bracket still lands in the omitted line);
        // the off-diagonal entry is what breaks the Jacobi identity.
        s.algebroid
            .c
            .insert("c[2][0][1]".to_string(), "2".to_string());
        s.algebroid
            .c
            .insert("c[0][0][1]".to_string(), "1".to_string());
        build(s)
    }

    /// Negative fixture: a slot map missing its pullback twist.
    pub fn s1_untwisted_alpha() -> Model {
        let mut s = s1().to_scenario();
        s.name = "s1-untwisted-alpha".into();
        s.connections.insert(
            "broken".to_string(),
            ConnSpec::WithTwist {
                alpha: vec![vec![vec!["x0".into()]]],
                twist: 0,
            },
        );
        build(s)
    }

    /// Negative fixture: constant anchor coefficient, violating the
    /// representation condition of the doubling base map.
    pub fn s1_constant_anchor() -> Model {
        let mut s = s1().to_scenario();
        s.name = "s1-constant-anchor".into();
        s.algebroid.anchor = vec![vec!["1".into()]];
        s.connections.clear();
        build(s)
    }

    /// Rank-zero bundle over the s1 base.
    pub fn rank_zero() -> Model {
        let mut s = s1().to_scenario();
        s.name = "rank0".into();
        s.bundle = BundleSpec {
            rank: 0,
            phi_e: vec![],
        };
        s.connections.clear();
        s.gauges.clear();
        s.metrics.clear();
        build(s)
    }

    /// The empty scenario: no variables, no frame, no fiber.
    pub fn empty() -> Model {
        build(Scenario {
            name: "empty".into(),
            base: BaseSpec {
                vars: 0,
                order: 0,
                phi: vec![],
            },
            bundle: BundleSpec {
                rank: 0,
                phi_e: vec![],
            },
            algebroid: AlgebroidSpec {
                rank: 0,
                phi_l: vec![],
                anchor: vec![],
                c: BTreeMap::new(),
            },
            connections: BTreeMap::new(),
            gauges: BTreeMap::new(),
            metrics: BTreeMap::new(),
        })
    }
}

// ---------------------------------------------------------------------------
// report and check registry
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub anchor: String,
    pub status: String,
    pub residual: String,
    pub order: i64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub transitive_anchor: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == "pass")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Copy with timing fields zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.wall_ms = 0;
        }
        r
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub loss_override: Option<i64>,
    pub subspace: Subspace,
    pub filter: Option<String>,
    pub draws: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            loss_override: None,
            subspace: Subspace::Full,
            filter: None,
            draws: 5,
            seed: 0x484f4d,
        }
    }
}

/// The canonical check list: name and anchor, in execution order. The
/// anchor set is the coverage contract: each appears exactly once.
pub const CHECK_ANCHORS: &[(&str, &str)] = &[
    ("base/pullback-multiplicative", "there is a canonical morphism (pullback)"),
    ("base/twisted-derivation", "can be considered as a $(\\phi^\\star,\\phi^\\star)$-derivation"),
    ("bundle/twisted-linearity", "said to have a Hom-bundle structure"),
    ("bundle/invertible-twist", "said to be an invertible Hom-bundle"),
    ("bundle/conjugation-stability", "with a canonical morphism $\\text{Ad}_{\\phi_E}$"),
    ("bundle/commutant-membership", "respecting the Hom-bundle structure"),
    ("algebroid/structure-skew", "a skew-symmetric bilinear map"),
    ("algebroid/twist-bracket-morphism", "consists of a Hom-Lie algebra structure"),
    ("algebroid/hom-jacobi", "is called a {\\bf Hom-Lie algebra}"),
    ("algebroid/leibniz-axiom", "acts on $f$ as in Remark"),
    ("algebroid/representation-twist", "A representation of a Hom-Lie algebra"),
    ("algebroid/representation-bracket", "is a representation of the Hom-Lie algebra"),
    ("algebroid/anchor-linearity", "called the anchor map"),
    ("cedram/lie-derivative-linear", "the Hom-Lie derivative operator $\\mathcal{L}_\\xi^\\la{L}$"),
    ("cedram/insertion-squares-zero", "the Hom-Insertion operator $i_\\xi^\\la{L}$"),
    ("cedram/dual-twist-multiplicative", "there is a canonical map"),
    ("cedram/d-squared", "it is easy to observe that"),
    ("cedram/differential-leibniz", "can be extended to higher exterior powers"),
    ("cedram/wedge-associative", "wedge product as multiplication operation"),
    ("cedram/form-bracket-jacobi", "Hom-Lie algebra structure with the Hom-Lie bracket"),
    ("connection/trivial-valid", "be the trivial $\\la{L}$-connection"),
    ("connection/leibniz-law", "called a Hom-Lie algebroid connection"),
    ("connection/twist-commutation", "Because trivial $\\la{L}$-connection $\\widehat{\\nabla}$ satisfies"),
    ("connection/difference-twisted-linear", "is an affine space modeled on"),
    ("connection/covariant-direction", "co-variant $\\la{L}$-differential operator in the direction"),
    ("connection/extension-law-leibniz", "uniquely determined such that"),
    ("connection/extension-law-twist", "The operator $d^\\nabla$ is given by"),
    ("connection/extension-degree-zero", "The uniqueness of the operator $d^\\nabla$"),
    ("connection/end-induced", "induces an $\\la{L}$-connection"),
    ("connection/end-product-rule", "and a Hom-Lie algebroid connection $\\nabla^E$"),
    ("gauge/group-axioms", "which we will call the Hom-Gauge group"),
    ("gauge/unique-inverse", "there is a unique element"),
    ("gauge/action-well-defined", "implies the map $\\odot$ is well defined"),
    ("gauge/action-compatible", "the map $\\odot$ is a left action of"),
    ("gauge/closed-form-agrees", "the transformed connection $\\nabla^\\psi$"),
    ("gauge/isotropy-transport", "closed under the action of"),
    ("gauge/scalar-line-central", "define the reduced H-Gauge group"),
    ("gauge/irreducibility-kernel", "The following statements are equivalent"),
    ("gauge/orbit-solver", "then we need to show"),
    ("slice/adjoint-pairing", "gives a ses-quilinear map"),
    ("slice/operator-split", "order 0, degree 1 differential operator"),
    ("slice/laplacian-gram", "is a Fredholm operator"),
    ("slice/kernel-equality", "$\\text{ker}(\\Delta)=\\text{ker}(d^\\nabla)$ implies"),
    ("slice/decomposition", "following $L^2$-orthogonal decomposition"),
    ("slice/tangent-space", "has the tangent space"),
    ("slice/local-chart", "is smooth and a local diffeomorphism"),
    ("slice/reduced-directions", "where $\\phi_E^\\star$ is adjoint operator"),
    ("metric/hom-compatibility", "said to have Hom-Hermitian"),
];

pub fn anchor_for(name: &str) -> &'static str {
    CHECK_ANCHORS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
        .unwrap_or("")
}

/// Deterministic pseudo-random inputs for the sampled checks.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rat(&mut self) -> Rat {
        let n = self.rng.gen_range(-2i64..=2);
        let d = self.rng.gen_range(1i64..=2);
        crate::rat::qr(n, d)
    }

    pub fn poly(&mut self, shape: JetShape) -> JetPoly {
        let mut p = JetPoly::zero(shape);
        for mi in coeff::monomial_indices(shape) {
            if self.rng.gen_bool(0.5) {
                let c = self.rat();
                if !c.is_zero() {
                    p = p.add(&JetPoly::monomial(shape, mi.clone(), c));
                }
            }
        }
        p
    }

    pub fn section(&mut self, rank: usize, shape: JetShape) -> Section {
        Section::new((0..rank).map(|_| self.poly(shape)).collect())
    }

    pub fn scalar_form(&mut self, n: usize, degree: usize, shape: JetShape) -> LForm<JetPoly> {
        LForm::from_fn(n, degree, |_| self.poly(shape))
    }

    pub fn e_form(
        &mut self,
        n: usize,
        rank: usize,
        degree: usize,
        shape: JetShape,
    ) -> LForm<Section> {
        LForm::from_fn(n, degree, |_| self.section(rank, shape))
    }

    /// Random vector in the span of a basis, in full coordinates.
    pub fn in_span(&mut self, basis: &[Vec<Rat>], dim: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); dim];
        for b in basis {
            let c = self.rat();
            if c.is_zero() {
                continue;
            }
            for (o, x) in v.iter_mut().zip(b) {
                *o += &c * x;
            }
        }
        v
    }

    /// Random valid connection: slot matrices drawn from the compatible
    /// subspace of 1-forms.
    pub fn connection(&mut self, bundle: &Arc<HomBundle>, algebroid: &Arc<HomAlgebroid>) -> Connection {
        let basis = coeff::end_subspace_basis(bundle, algebroid, 1);
        let dim = coeff::dim_end_form(bundle, algebroid, 1);
        let v = self.in_span(&basis, dim);
        let form = coeff::vec_to_end_form(&v, bundle, algebroid, 1);
        Connection::new(bundle.clone(), algebroid.clone(), form.vals).unwrap()
    }

    /// Random gauge element: invertible combination over the compatible
    /// subalgebra, falling back to the identity element.
    pub fn gauge(&mut self, bundle: &Arc<HomBundle>, algebroid: &Arc<HomAlgebroid>) -> GaugeElement {
        let basis = coeff::end_subspace_basis(bundle, algebroid, 0);
        let dim = coeff::dim_end_form(bundle, algebroid, 0);
        for _ in 0..12 {
            let v = self.in_span(&basis, dim);
            if v.iter().all(|x| x.is_zero()) {
                continue;
            }
            let m = coeff::vec_to_mor(&v, bundle);
            if let Ok(g) = GaugeElement::new(bundle, TwistedMor::new(m)) {
                return g;
            }
        }
        GaugeElement::identity(bundle)
    }
}

fn seed_for(base: u64, name: &str) -> u64 {
    let mut h = base ^ 0x9e3779b97f4a7c15;
    for b in name.bytes() {
        h = h.wrapping_mul(0x100000001b3).wrapping_add(b as u64);
    }
    h
}

struct Runner<'a> {
    model: &'a Model,
    config: &'a Config,
    results: Vec<CheckResult>,
}

impl<'a> Runner<'a> {
    fn run(&mut self, name: &str, f: impl FnOnce(&Model, &Config, &mut Sampler) -> (bool, String, i64)) {
        if let Some(filter) = &self.config.filter {
            if !name.contains(filter.as_str()) {
                return;
            }
        }
        let t0 = Instant::now();
        let mut sampler = Sampler::new(seed_for(self.config.seed, name));
        let (pass, residual, order) = f(self.model, self.config, &mut sampler);
        self.results.push(CheckResult {
            name: name.into(),
            anchor: anchor_for(name).into(),
            status: if pass { "pass" } else { "fail" }.into(),
            residual: if pass { "0".into() } else { residual },
            order,
            wall_ms: t0.elapsed().as_millis() as u64,
        });
    }
}

/// Connections the deeper checks may act on: the trivial one plus every
/// named connection that passes its own validator.
fn usable_connections(model: &Model) -> Vec<(String, Connection)> {
    let mut out = vec![("(trivial)".to_string(), model.trivial_connection())];
    for (name, conn) in &model.connections {
        if conn.alpha_twist == 1 && conn.validate().all_pass() && !conn.is_trivial() {
            out.push((name.clone(), conn.clone()));
        }
    }
    out
}

pub fn run_checks(model: &Model, config: &Config) -> Report {
    let mut runner = Runner {
        model,
        config,
        results: Vec::new(),
    };
    let shape = model.bundle.shape();
    let d = shape.order;
    let n = model.algebroid.rank;
    let r = model.bundle.rank;
    let lo = |l: i64| config.loss_override.unwrap_or(l);

    // ---- base ----
    runner.run("base/pullback-multiplicative", |m, cfg, s| {
        let mut worst = None;
        for _ in 0..cfg.draws {
            let f = s.poly(shape);
            let g = s.poly(shape);
            let lhs = m.base.pullback(&f.mul(&g));
            let rhs = m.base.pullback(&f).mul(&m.base.pullback(&g));
            if !lhs.budget_eq(&rhs, lo(0)) {
                worst = Some(lhs.sub(&rhs));
            }
        }
        match worst {
            None => (true, String::new(), d - lo(0)),
            Some(w) => (false, w.to_string(), d - lo(0)),
        }
    });

    runner.run("base/twisted-derivation", |m, cfg, s| {
        let mut worst = None;
        let basis: Vec<Section> = (0..n).map(|i| Section::basis(n, shape, i)).collect();
        for _ in 0..cfg.draws {
            let f = s.poly(shape);
            let g = s.poly(shape);
            for xi in &basis {
                let lhs = m.algebroid.anchor_act(xi, &f.mul(&g));
                let rhs = m
                    .base
                    .pullback(&f)
                    .mul(&m.algebroid.anchor_act(xi, &g))
                    .add(&m.base.pullback(&g).mul(&m.algebroid.anchor_act(xi, &f)));
                if !lhs.budget_eq(&rhs, lo(1)) {
                    worst = Some(lhs.sub(&rhs));
                }
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.to_string(), d - lo(1)),
        }
    });

    // ---- bundle ----
    runner.run("bundle/twisted-linearity", |m, cfg, s| {
        let mut worst = None;
        for _ in 0..cfg.draws {
            let f = s.poly(shape);
            let sec = s.section(r, shape);
            let lhs = m.bundle.apply_twist(&sec.scale(&f));
            let rhs = m.bundle.apply_twist(&sec).scale(&m.base.pullback(&f));
            if !lhs.budget_eq(&rhs, shape, lo(0)) {
                worst = Some(lhs.sub(&rhs));
            }
        }
        match worst {
            None => (true, String::new(), d - lo(0)),
            Some(w) => (false, w.render(), d - lo(0)),
        }
    });

    runner.run("bundle/invertible-twist", |m, _cfg, _s| {
        let round = m
            .bundle
            .twist()
            .compose(&m.base, &m.bundle.twist_inv());
        let ok = round.twist == 0 && round.mat == PolyMatrix::identity(r, shape);
        (ok, round.mat.render(), d)
    });

    runner.run("bundle/conjugation-stability", |m, cfg, s| {
        let mut ok = true;
        let mut residual = String::new();
        for _ in 0..cfg.draws {
            let mor = TwistedMor::new(PolyMatrix::from_fn(r, r, shape, |_, _| s.poly(shape)));
            let back = ad_phi_e(&m.bundle, &mor);
            let fwd = crate::bundle::ad_phi_e_inv(&m.bundle, &back);
            if fwd != mor {
                ok = false;
                residual = fwd.mat.sub(&mor.mat).render();
            }
        }
        (ok, residual, d)
    });

    runner.run("bundle/commutant-membership", |m, _cfg, _s| {
        // the compatible subspace is closed under conjugation
        let basis = coeff::end_subspace_basis(&m.bundle, &m.algebroid, 0);
        for v in &basis {
            let mor = TwistedMor::new(coeff::vec_to_mor(v, &m.bundle));
            let conj = ad_phi_e(&m.bundle, &mor);
            if !in_end_phi_e(&m.bundle, &conj) {
                return (false, conj.mat.render(), d);
            }
        }
        (true, String::new(), d)
    });

    // ---- algebroid ----
    {
        let rep = model.algebroid.validate();
        for entry in rep.entries {
            let name: &'static str = match entry.name.as_str() {
                "algebroid/structure-skew" => "algebroid/structure-skew",
                "algebroid/twist-bracket-morphism" => "algebroid/twist-bracket-morphism",
                "algebroid/hom-jacobi" => "algebroid/hom-jacobi",
                "algebroid/leibniz-axiom" => "algebroid/leibniz-axiom",
                "algebroid/representation-twist" => "algebroid/representation-twist",
                "algebroid/representation-bracket" => "algebroid/representation-bracket",
                _ => continue,
            };
            runner.run(name, |_m, _cfg, _s| (entry.pass, entry.residual.clone(), entry.order));
        }
    }

    runner.run("algebroid/anchor-linearity", |m, cfg, s| {
        let mut worst = None;
        for _ in 0..cfg.draws {
            let f = s.poly(shape);
            let g = s.poly(shape);
            let xi = s.section(n, shape);
            let lhs = m.algebroid.anchor_act(&xi.scale(&f), &g);
            let rhs = f.mul(&m.algebroid.anchor_act(&xi, &g));
            if !lhs.budget_eq(&rhs, lo(1)) {
                worst = Some(lhs.sub(&rhs));
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.to_string(), d - lo(1)),
        }
    });

    // ---- graded operators ----
    runner.run("cedram/lie-derivative-linear", |m, cfg, s| {
        if n == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for _ in 0..cfg.draws {
            let xi = s.section(n, shape);
            let eta = s.section(n, shape);
            let p = 1.min(n);
            let omega = s.scalar_form(n, p, shape);
            let lhs = m.algebroid.lie_derivative(&xi.add(&eta), &omega);
            let rhs = m
                .algebroid
                .lie_derivative(&xi, &omega)
                .add(&m.algebroid.lie_derivative(&eta, &omega));
            if !lhs.budget_eq(&rhs, shape, lo(1)) {
                worst = Some(lhs.sub(&rhs));
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.render(), d - lo(1)),
        }
    });

    runner.run("cedram/insertion-squares-zero", |m, cfg, s| {
        if n < 2 {
            return (true, String::new(), d);
        }
        // the twisted square-zero statement inserts the twisted direction
        // the second time; both slots then collide exactly
        let mut worst = None;
        for _ in 0..cfg.draws {
            let xi = s.section(n, shape);
            let omega = s.scalar_form(n, 2, shape);
            let once = m.algebroid.insertion(&xi, &omega).unwrap();
            let twice = m
                .algebroid
                .insertion(&m.algebroid.apply_phi_l(&xi), &once)
                .unwrap();
            if !twice.is_zero_up_to(d - lo(0)) {
                worst = Some(twice);
            }
        }
        match worst {
            None => (true, String::new(), d - lo(0)),
            Some(w) => (false, w.render(), d - lo(0)),
        }
    });

    runner.run("cedram/dual-twist-multiplicative", |m, cfg, s| {
        if n < 2 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for _ in 0..cfg.draws {
            let a = s.scalar_form(n, 1, shape);
            let b = s.scalar_form(n, 1, shape);
            let lhs = m.algebroid.phi_dagger(&cedram::wedge_scalar(shape, &a, &b));
            let rhs = cedram::wedge_scalar(
                shape,
                &m.algebroid.phi_dagger(&a),
                &m.algebroid.phi_dagger(&b),
            );
            if !lhs.budget_eq(&rhs, shape, lo(0)) {
                worst = Some(lhs.sub(&rhs));
            }
        }
        match worst {
            None => (true, String::new(), d - lo(0)),
            Some(w) => (false, w.render(), d - lo(0)),
        }
    });

    runner.run("cedram/d-squared", |m, _cfg, _s| {
        for degree in 0..n {
            if let Some(p) = cedram::d_squared_matrix_residual(&m.algebroid, degree) {
                return (false, p.to_string(), d - lo(2));
            }
        }
        (true, String::new(), d - lo(2))
    });

    runner.run("cedram/differential-leibniz", |m, cfg, s| {
        if n == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for _ in 0..cfg.draws {
            let f = s.poly(shape);
            let omega = s.scalar_form(n, 1.min(n), shape);
            let lhs = cedram::d_l(&m.algebroid, &omega.scale(&f));
            let df = cedram::d_l_fn(&m.algebroid, &f);
            let rhs = cedram::wedge_scalar(shape, &df, &m.algebroid.phi_dagger(&omega)).add(
                &cedram::d_l(&m.algebroid, &omega).scale(&m.base.pullback(&f)),
            );
            if !lhs.budget_eq(&rhs, shape, lo(1)) {
                worst = Some(lhs.sub(&rhs));
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.render(), d - lo(1)),
        }
    });

    runner.run("cedram/wedge-associative", |m, cfg, s| {
        if n < 3 || r == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for _ in 0..cfg.draws {
            let mk = |s: &mut Sampler| {
                LForm::from_fn(n, 1, |_| {
                    PolyMatrix::from_fn(r, r, shape, |_, _| s.poly(shape))
                })
            };
            let a = mk(s);
            let b = mk(s);
            let c = mk(s);
            let lhs = cedram::wedge_end(
                &m.bundle,
                &m.algebroid,
                &cedram::wedge_end(&m.bundle, &m.algebroid, &a, &b),
                &c,
            );
            let rhs = cedram::wedge_end(
                &m.bundle,
                &m.algebroid,
                &a,
                &cedram::wedge_end(&m.bundle, &m.algebroid, &b, &c),
            );
            if !lhs.budget_eq(&rhs, shape, lo(0)) {
                worst = Some(lhs.sub(&rhs));
            }
        }
        match worst {
            None => (true, String::new(), d - lo(0)),
            Some(w) => (false, w.render(), d - lo(0)),
        }
    });

    runner.run("cedram/form-bracket-jacobi", |m, cfg, s| {
        if r == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for _ in 0..cfg.draws {
            let mk = |s: &mut Sampler| PolyMatrix::from_fn(r, r, shape, |_, _| s.poly(shape));
            let a = mk(s);
            let b = mk(s);
            let c = mk(s);
            let ad = |mm: &PolyMatrix| ad_phi_e(&m.bundle, &TwistedMor::new(mm.clone())).mat;
            let term = |x: &PolyMatrix, y: &PolyMatrix, z: &PolyMatrix| {
                cedram::mor_commutator(&m.bundle, &ad(x), &cedram::mor_commutator(&m.bundle, y, z))
            };
            let total = term(&a, &b, &c)
                .add(&term(&b, &c, &a))
                .add(&term(&c, &a, &b));
            if !total.is_zero_up_to(d - lo(0)) {
                worst = Some(total);
            }
        }
        match worst {
            None => (true, String::new(), d - lo(0)),
            Some(w) => (false, w.render(), d - lo(0)),
        }
    });

    // ---- connections ----
    let conns = usable_connections(model);

    runner.run("connection/trivial-valid", |m, _cfg, _s| {
        let rep = m.trivial_connection().validate();
        match rep.first_failure() {
            None => (true, String::new(), d - lo(1)),
            Some(f) => (false, f.residual.clone(), f.order),
        }
    });

    {
        // validator entries for every named connection, aggregated per law
        let mut leibniz: (bool, String, i64) = (true, String::new(), d - lo(1));
        let mut twist: (bool, String, i64) = (true, String::new(), d - lo(1));
        let mut diff: (bool, String, i64) = (true, String::new(), d - lo(1));
        for conn in model.connections.values() {
            for e in conn.validate().entries {
                let target = match e.name.as_str() {
                    "connection/leibniz-law" => &mut leibniz,
                    "connection/twist-commutation" => &mut twist,
                    "connection/difference-twisted-linear" => &mut diff,
                    _ => continue,
                };
                if !e.pass && target.0 {
                    *target = (false, e.residual, e.order);
                }
            }
        }
        runner.run("connection/leibniz-law", |_m, _c, _s| leibniz.clone());
        runner.run("connection/twist-commutation", |_m, _c, _s| twist.clone());
        runner.run("connection/difference-twisted-linear", |_m, _c, _s| diff.clone());
    }

    runner.run("connection/covariant-direction", |m, cfg, s| {
        if n == 0 || r == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for (_, conn) in &conns {
            for _ in 0..cfg.draws {
                let f = s.poly(shape);
                let xi = s.section(n, shape);
                let sec = s.section(r, shape);
                let lhs = conn.covariant_derivative(&xi.scale(&f), &sec);
                let rhs = conn
                    .covariant_derivative(&xi, &sec)
                    .scale(&m.base.pullback(&f));
                if !lhs.budget_eq(&rhs, shape, lo(1)) {
                    worst = Some(lhs.sub(&rhs));
                }
                // direction-wise Leibniz through the Lie derivative
                let g = s.poly(shape);
                let lhs2 = conn.covariant_derivative(&xi, &sec.scale(&g));
                let lder = m
                    .algebroid
                    .lie_derivative(&xi, &LForm::new(n, 0, vec![g.clone()]));
                let rhs2 = m
                    .bundle
                    .apply_twist(&sec)
                    .scale(&lder.vals[0])
                    .add(&conn.covariant_derivative(&xi, &sec).scale(&m.base.pullback(&g)));
                if !lhs2.budget_eq(&rhs2, shape, lo(1)) {
                    worst = Some(lhs2.sub(&rhs2));
                }
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.render(), d - lo(1)),
        }
    });

    runner.run("connection/extension-law-leibniz", |m, cfg, s| {
        if n == 0 || r == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for (_, conn) in &conns {
            for _ in 0..cfg.draws {
                for l in 0..=n.min(2) {
                    let qd = if n > l { (n - l).min(1) } else { 0 };
                    let alpha = s.scalar_form(n, l, shape);
                    let beta = s.e_form(n, r, qd, shape);
                    let lhs = d_nabla(conn, &cedram::wedge_scalar(shape, &alpha, &beta));
                    let t1 = cedram::wedge_scalar(
                        shape,
                        &cedram::d_l(&m.algebroid, &alpha),
                        &twist_e_form(&m.bundle, &m.algebroid, &beta),
                    );
                    let db = d_nabla(conn, &beta);
                    let t2 = cedram::wedge_scalar(shape, &m.algebroid.phi_dagger(&alpha), &db);
                    let t2 = if l % 2 == 0 { t2 } else { t2.neg() };
                    let rhs = t1.add(&t2);
                    if !lhs.budget_eq(&rhs, shape, lo(1)) {
                        worst = Some(lhs.sub(&rhs));
                    }
                }
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.render(), d - lo(1)),
        }
    });

    runner.run("connection/extension-law-twist", |m, cfg, s| {
        if n == 0 || r == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for (_, conn) in &conns {
            for _ in 0..cfg.draws {
                for p in 0..n.min(2) {
                    let omega = s.e_form(n, r, p, shape);
                    let lhs = twist_e_form(&m.bundle, &m.algebroid, &d_nabla(conn, &omega));
                    let rhs = d_nabla(conn, &twist_e_form(&m.bundle, &m.algebroid, &omega));
                    if !lhs.budget_eq(&rhs, shape, lo(1)) {
                        worst = Some(lhs.sub(&rhs));
                    }
                }
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.render(), d - lo(1)),
        }
    });

    runner.run("connection/extension-degree-zero", |m, cfg, s| {
        if n == 0 || r == 0 {
            return (true, String::new(), d);
        }
        let mut worst = None;
        for (_, conn) in &conns {
            for _ in 0..cfg.draws {
                let sec = s.section(r, shape);
                let xi = s.section(n, shape);
                let omega = LForm::new(n, 0, vec![sec.clone()]);
                let lhs = d_nabla(conn, &omega).eval(std::slice::from_ref(&xi));
                let rhs =
                    conn.covariant_derivative(&m.algebroid.apply_phi_l_inv(&xi), &sec);
                if !lhs.budget_eq(&rhs, shape, lo(1)) {
                    worst = Some(lhs.sub(&rhs));
                }
            }
        }
        match worst {
            None => (true, String::new(), d - lo(1)),
            Some(w) => (false, w.render(), d - lo(1)),
        }
    });

    runner.run("connection/end-induced", |m, cfg, s| {
        if r == 0 {
            return (true, String::new(), d);
        }
        // the identity twist is parallel, and the operator splits into the
        // flat part plus the bracket with the slot form
        for (_, conn) in &conns {
            let par = end_connection_apply(conn, &m.bundle.phi_e_mor());
            if !par.is_zero_up_to(d - lo(1)) {
                return (false, par.render(), d - lo(1));
            }
            for _ in 0..cfg.draws {
                let t = TwistedMor::new(PolyMatrix::from_fn(r, r, shape, |_, _| s.poly(shape)));
                let resid = end_connection_split_residual(conn, &t);
                if !resid.is_zero_up_to(d - lo(1)) {
                    return (false, resid.render(), d - lo(1));
                }
            }
        }
        (true, String::new(), d - lo(1))
    });

    runner.run("connection/end-product-rule", |m, cfg, s| {
        if r == 0 {
            return (true, String::new(), d);
        }
        let sub = coeff::end_subspace_basis(&m.bundle, &m.algebroid, 0);
        let dim0 = coeff::dim_end_form(&m.bundle, &m.algebroid, 0);
        for (_, conn) in &conns {
            for _ in 0..cfg.draws {
                let t1 = TwistedMor::new(coeff::vec_to_mor(&s.in_span(&sub, dim0), &m.bundle));
                let t2 = TwistedMor::new(coeff::vec_to_mor(&s.in_span(&sub, dim0), &m.bundle));
                let resid = end_product_residual(conn, &t1, &t2);
                if !resid.is_zero_up_to(d - lo(1)) {
                    return (false, resid.render(), d - lo(1));
                }
            }
        }
        (true, String::new(), d - lo(1))
    });

    // ---- gauge ----
    runner.run("gauge/group-axioms", |m, cfg, s| {
        if r == 0 {
            return (true, String::new(), d);
        }
        for _ in 0..cfg.draws {
            let a = s.gauge(&m.bundle, &m.algebroid);
            let b = s.gauge(&m.bundle, &m.algebroid);
            let c = s.gauge(&m.bundle, &m.algebroid);
            let lhs = gauge_mul(&m.bundle, &gauge_mul(&m.bundle, &a, &b), &c);
            let rhs = gauge_mul(&m.bundle, &a, &gauge_mul(&m.bundle, &b, &c));
            if lhs != rhs {
                return (false, lhs.matrix().sub(rhs.matrix()).render(), d);
            }
            let id = GaugeElement::identity(&m.bundle);
            if gauge_mul(&m.bundle, &a, &id) != a || gauge_mul(&m.bundle, &id, &a) != a {
                return (false, "identity law".into(), d);
            }
        }
        (true, String::new(), d)
    });

    runner.run("gauge/unique-inverse", |m, cfg, s| {
        if r == 0 {
            return (true, String::new(), d);
        }
        let id = GaugeElement::identity(&m.bundle);
        for _ in 0..cfg.draws {
            let a = s.gauge(&m.bundle, &m.algebroid);
            let ai = gauge_inv(&m.bundle, &a).unwrap();
            if gauge_mul(&m.bundle, &a, &ai) != id || gauge_mul(&m.bundle, &ai, &a) != id {
                return (false, "inverse law".into(), d);
            }
            if gauge_inv(&m.bundle, &ai).unwrap() != a {
                return (false, "double inverse".into(), d);
            }
        }
        (true, String::new(), d)
    });

    runner.run("gauge/action-well-defined", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for _ in 0..cfg.draws {
            let g = s.gauge(&m.bundle, &m.algebroid);
            let conn = s.connection(&m.bundle, &m.algebroid);
            let acted = match gauge_act(&g, &conn) {
                Ok(a) => a,
                Err(e) => return (false, e.to_string(), d - lo(1)),
            };
            if let Some(f) = acted.validate().first_failure() {
                return (false, f.residual.clone(), f.order);
            }
        }
        (true, String::new(), d - lo(1))
    });

    runner.run("gauge/action-compatible", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for _ in 0..cfg.draws {
            let g1 = s.gauge(&m.bundle, &m.algebroid);
            let g2 = s.gauge(&m.bundle, &m.algebroid);
            let conn = s.connection(&m.bundle, &m.algebroid);
            let seq = gauge_act(&g1, &gauge_act(&g2, &conn).unwrap()).unwrap();
            let combined = gauge_act(&gauge_mul(&m.bundle, &g2, &g1), &conn).unwrap();
            if !connections_equal(&seq, &combined, lo(1)) {
                return (false, "action composition".into(), d - lo(1));
            }
        }
        (true, String::new(), d - lo(1))
    });

    runner.run("gauge/closed-form-agrees", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for _ in 0..cfg.draws {
            let g = s.gauge(&m.bundle, &m.algebroid);
            let conn = s.connection(&m.bundle, &m.algebroid);
            let closed = gauge_act(&g, &conn).unwrap();
            let frames = gauge_act_on_frame(&g, &conn);
            for (k, omega_def) in frames.iter().enumerate() {
                let b_k = Section::basis(r, shape, k);
                let omega_closed = closed.apply(&b_k);
                if !omega_closed.budget_eq(omega_def, shape, lo(1)) {
                    return (false, omega_closed.sub(omega_def).render(), d - lo(1));
                }
            }
        }
        (true, String::new(), d - lo(1))
    });

    runner.run("gauge/isotropy-transport", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in &conns {
            let kernel = end_kernel_vectors(conn);
            if kernel.len() > 4 {
                continue;
            }
            let psi = s.gauge(&m.bundle, &m.algebroid);
            for v in &kernel {
                let kappa = TwistedMor::new(coeff::vec_to_mor(v, &m.bundle));
                if kappa.mat.invert().is_err() || !in_end_phi_e(&m.bundle, &kappa) {
                    continue;
                }
                let Ok(chi) = gauge_inv(&m.bundle, &GaugeElement { mor: kappa }) else {
                    continue;
                };
                let fixes = connections_equal(&gauge_act(&chi, conn).unwrap(), conn, lo(1));
                let transported = gauge_mul(
                    &m.bundle,
                    &gauge_inv(&m.bundle, &psi).unwrap(),
                    &gauge_mul(&m.bundle, &chi, &psi),
                );
                let acted = gauge_act(&psi, conn).unwrap();
                let fixes_t =
                    connections_equal(&gauge_act(&transported, &acted).unwrap(), &acted, lo(1));
                if fixes != fixes_t {
                    return (false, "isotropy transport mismatch".into(), d - lo(1));
                }
            }
            let _ = cfg;
        }
        (true, String::new(), d - lo(1))
    });

    runner.run("gauge/scalar-line-central", |m, _cfg, _s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in &conns {
            for c in [q(2), crate::rat::qr(-3, 2)] {
                let g = GaugeElement {
                    mor: TwistedMor::new(m.bundle.phi_e.scale_rat(&c)),
                };
                let acted = gauge_act(&g, conn).unwrap();
                if !connections_equal(&acted, conn, lo(1)) {
                    return (false, "scalar line must act trivially".into(), d - lo(1));
                }
            }
        }
        (true, String::new(), d - lo(1))
    });

    runner.run("gauge/irreducibility-kernel", |m, _cfg, _s| {
        if r == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in &conns {
            let kernel = end_kernel_vectors(conn);
            // the identity twist always lies in the kernel
            let phie = gauge::phi_e_vector(&m.bundle);
            let dim = phie.len();
            if crate::linalg::span_intersection(&kernel, &[phie], dim).len() != 1 {
                return (false, "identity twist missing from kernel".into(), d);
            }
            if kernel.len() <= 4 {
                let search = gauge::isotropy_brute_force(conn, &[-1, 0, 1, 2]);
                let irr = is_irreducible(conn);
                if irr != (search.all_scalar && search.fixers_found > 0) {
                    return (
                        false,
                        format!(
                            "kernel dimension {} disagrees with isotropy search",
                            kernel.len()
                        ),
                        d,
                    );
                }
            }
        }
        (true, String::new(), d)
    });

    runner.run("gauge/orbit-solver", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in conns.iter().take(2) {
            // self-orbit always solvable
            if find_gauge_transform(conn, conn).is_none() {
                return (false, "self orbit unsolved".into(), d - lo(1));
            }
            for _ in 0..cfg.draws.min(3) {
                let g = s.gauge(&m.bundle, &m.algebroid);
                let to = gauge_act(&g, conn).unwrap();
                let Some(found) = find_gauge_transform(conn, &to) else {
                    return (false, "orbit roundtrip unsolved".into(), d - lo(1));
                };
                let acted = gauge_act(&found, conn).unwrap();
                if !connections_equal(&acted, &to, lo(1)) {
                    return (false, "orbit verification".into(), d - lo(1));
                }
            }
        }
        (true, String::new(), d - lo(1))
    });

    // ---- slice ----
    runner.run("slice/adjoint-pairing", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in conns.iter().take(1) {
            let dmat = end_operator_matrix(conn);
            let dt = dmat.transpose();
            for _ in 0..cfg.draws {
                let a: Vec<Rat> = (0..dmat.cols).map(|_| s.rat()).collect();
                let b: Vec<Rat> = (0..dmat.rows).map(|_| s.rat()).collect();
                if dot(&dmat.mul_vec(&a), &b) != dot(&a, &dt.mul_vec(&b)) {
                    return (false, "adjoint pairing".into(), d);
                }
            }
        }
        let _ = m;
        (true, String::new(), d)
    });

    runner.run("slice/operator-split", |m, _cfg, _s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        // matrix of the full operator minus the flat part equals the
        // bracket operator with the slot form, exactly
        for (_, conn) in &conns {
            let whole = end_operator_matrix(conn);
            let flat = end_operator_matrix(&m.trivial_connection());
            let ad = slice::operator_matrix(OpName::AdAlpha, conn, 0, Subspace::Full)
                .unwrap()
                .matrix;
            if !whole.sub(&flat).sub(&ad).is_zero() {
                return (false, "operator split".into(), d);
            }
        }
        (true, String::new(), d)
    });

    runner.run("slice/laplacian-gram", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in conns.iter().take(1) {
            let lap = laplacian(conn, cfg.subspace);
            if !lap.matrix.is_symmetric() {
                return (false, "laplacian asymmetric".into(), d - lo(2));
            }
            let dmat = end_operator_matrix(conn);
            for _ in 0..cfg.draws {
                let a: Vec<Rat> = (0..dmat.cols).map(|_| s.rat()).collect();
                let full_lap = dmat.transpose().mul(&dmat);
                let quad = dot(&full_lap.mul_vec(&a), &a);
                let img = dmat.mul_vec(&a);
                if quad != dot(&img, &img) {
                    return (false, "laplacian quadratic form".into(), d - lo(2));
                }
            }
        }
        let _ = m;
        (true, String::new(), d - lo(2))
    });

    runner.run("slice/kernel-equality", |m, _cfg, _s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in &conns {
            if !slice::kernel_equality_holds(conn) {
                return (false, "kernel mismatch".into(), d);
            }
        }
        let _ = m;
        (true, String::new(), d)
    });

    runner.run("slice/decomposition", |m, cfg, s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in conns.iter().take(2) {
            let dmat = end_operator_matrix(conn);
            for _ in 0..cfg.draws {
                let alpha_form = LForm::from_fn(n, 1, |_| {
                    PolyMatrix::from_fn(r, r, shape, |_, _| s.poly(shape))
                });
                let (beta, gamma) = coulomb_decompose(conn, &alpha_form);
                let alpha_vec = coeff::end_form_to_vec(&alpha_form, &m.bundle);
                let beta_vec = coeff::mor_to_vec(&beta.mat, &m.bundle);
                let gamma_vec = coeff::end_form_to_vec(&gamma, &m.bundle);
                let recon = crate::linalg::vec_add(&dmat.mul_vec(&beta_vec), &gamma_vec);
                if recon != alpha_vec {
                    return (false, "decomposition residual".into(), d);
                }
                if !vec_is_zero(&dmat.transpose().mul_vec(&gamma_vec)) {
                    return (false, "coadjoint part not in kernel".into(), d);
                }
                if !dot(&dmat.mul_vec(&beta_vec), &gamma_vec).is_zero() {
                    return (false, "parts not orthogonal".into(), d);
                }
            }
        }
        (true, String::new(), d)
    });

    runner.run("slice/tangent-space", |m, _cfg, _s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (_, conn) in &conns {
            let dmat = end_operator_matrix(conn);
            let tangent = slice_tangent_basis(conn);
            for t in &tangent {
                if !vec_is_zero(&dmat.transpose().mul_vec(t)) {
                    return (false, "tangent not in coadjoint kernel".into(), d);
                }
            }
            if slice_dimension(conn) != tangent.len() {
                return (false, "tangent dimension mismatch".into(), d);
            }
        }
        let _ = m;
        (true, String::new(), d)
    });

    runner.run("slice/local-chart", |m, _cfg, _s| {
        if r == 0 || n == 0 {
            return (true, String::new(), d);
        }
        for (name, conn) in &conns {
            let rep = local_slice_check(conn);
            let get = |nm: &str| rep.entries.iter().find(|e| e.name == nm).unwrap().pass;
            let inj = get("slice/differential-injective");
            let sur = get("slice/differential-surjective");
            let closure = get("slice/closure-on-subspace");
            if is_irreducible(conn) {
                if !(inj && sur && closure) {
                    return (
                        false,
                        format!("irreducible '{name}' chart not bijective"),
                        d,
                    );
                }
            } else if inj {
                return (
                    false,
                    format!("reducible '{name}' chart unexpectedly injective"),
                    d,
                );
            }
        }
        let _ = m;
        (true, String::new(), d)
    });

    runner.run("slice/reduced-directions", |m, _cfg, _s| {
        if r == 0 {
            return (true, String::new(), d);
        }
        let g0 = gau0_basis(&m.bundle, &m.algebroid);
        let phie = gauge::phi_e_vector(&m.bundle);
        for v in &g0 {
            if !dot(v, &phie).is_zero() {
                return (false, "reduced direction not orthogonal".into(), d);
            }
        }
        let sub = coeff::end_subspace_basis(&m.bundle, &m.algebroid, 0);
        if !sub.is_empty() && g0.len() + 1 != sub.len() {
            return (false, "reduced direction dimension".into(), d);
        }
        // on irreducible connections the kernel meets the subalgebra in the
        // scalar line alone
        for (_, conn) in &conns {
            if is_irreducible(conn) {
                let (_, sub_dim) = end_kernel_dims(conn);
                if g0.len() + 1 != sub.len() || sub_dim != 1 {
                    return (false, "kernel/reduced-direction consistency".into(), d);
                }
            }
        }
        (true, String::new(), d)
    });

    runner.run("metric/hom-compatibility", |m, _cfg, _s| {
        for (name, h) in &m.metrics {
            let resid = slice::hom_metric_residual(&m.bundle, h);
            if !resid.is_zero() {
                return (false, format!("metric '{name}': {}", resid.render()), d);
            }
        }
        (true, String::new(), d)
    });

    Report {
        scenario: model.name.clone(),
        transitive_anchor: model.algebroid.anchor_transitive(),
        checks: runner.results,
    }
}
