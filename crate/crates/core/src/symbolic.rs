//! Exact arithmetic on the dense *-subalgebra spanned by monomials
//! `s_mu s_nu*`.
//!
//! Scalars are Gaussian rationals, so equality of elements is decidable
//! exactly: `normal_form` rewrites every monomial whose two paths start
//! with the same special edge (the lexicographically least edge entering
//! its range) using the fullness relation, and `is_zero` tests the result
//! for emptiness. This is the equality oracle behind trace-obstruction
//! certificates and behind validation of the numeric representations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IdKind, Result};
use crate::graph::{Graph, Path};

/// An exact complex scalar with rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussRational {
    re: BigRational,
    im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRational {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRational {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRational {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn to_complex(&self) -> num_complex::Complex<f64> {
        num_complex::Complex::new(
            self.re.to_f64().expect("coefficient exceeds f64 range"),
            self.im.to_f64().expect("coefficient exceeds f64 range"),
        )
    }

    /// `[re_num, re_den, im_num, im_den]` as decimal strings.
    pub fn to_decimal_strings(&self) -> [String; 4] {
        [
            self.re.numer().to_string(),
            self.re.denom().to_string(),
            self.im.numer().to_string(),
            self.im.denom().to_string(),
        ]
    }

    pub fn from_decimal_strings(parts: &[String; 4]) -> Result<Self> {
        let parse = |s: &String| -> Result<BigInt> {
            BigInt::from_str(s)
                .map_err(|e| Error::MalformedCertificate(format!("bad integer {s:?}: {e}")))
        };
        let re_den = parse(&parts[1])?;
        let im_den = parse(&parts[3])?;
        if re_den.is_zero() || im_den.is_zero() {
            return Err(Error::MalformedCertificate(
                "zero denominator in coefficient".into(),
            ));
        }
        Ok(GaussRational {
            re: BigRational::new(parse(&parts[0])?, re_den),
            im: BigRational::new(parse(&parts[2])?, im_den),
        })
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for &GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

/// The monomial `s_mu s_nu*`; both paths start at the same vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub mu: Path,
    pub nu: Path,
}

impl Monomial {
    pub fn new(mu: Path, nu: Path) -> Self {
        Monomial { mu, nu }
    }
}

/// An exact linear combination of monomials; zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymElement {
    terms: BTreeMap<Monomial, GaussRational>,
}

impl SymElement {
    pub fn zero() -> Self {
        SymElement::default()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, GaussRational> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, m: Monomial, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &SymElement) -> SymElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SymElement) -> SymElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, k: &GaussRational) -> SymElement {
        let mut out = SymElement::zero();
        for (m, c) in &self.terms {
            out.insert(m.clone(), c * k);
        }
        out
    }

    pub fn neg(&self) -> SymElement {
        self.scale(&GaussRational::from_int(-1))
    }
}

/// The vertex projection `p_v` as a one-term element.
pub fn gen_vertex(g: &Graph, v: &str) -> Result<SymElement> {
    if !g.has_vertex(v) {
        return Err(Error::UnknownId {
            kind: IdKind::Vertex,
            id: v.to_string(),
        });
    }
    let mut x = SymElement::zero();
    x.insert(
        Monomial::new(Path::trivial(v), Path::trivial(v)),
        GaussRational::one(),
    );
    Ok(x)
}

/// The edge partial isometry `s_e` as a one-term element
/// (`mu = (e)`, `nu = trivial at s(e)`).
pub fn gen_edge(g: &Graph, e: &str) -> Result<SymElement> {
    let edge = g.edge(e).ok_or_else(|| Error::UnknownId {
        kind: IdKind::Edge,
        id: e.to_string(),
    })?;
    let mut x = SymElement::zero();
    x.insert(
        Monomial::new(
            Path::from_edges(g, vec![e.to_string()])?,
            Path::trivial(edge.src.clone()),
        ),
        GaussRational::one(),
    );
    Ok(x)
}

/// A single-monomial element with an explicit coefficient. A pair of
/// paths with mismatched sources denotes the zero element and collapses
/// at construction.
pub fn monomial_term(g: &Graph, mu: Path, nu: Path, coeff: GaussRational) -> Result<SymElement> {
    let smu = mu.source(g)?;
    let snu = nu.source(g)?;
    let mut x = SymElement::zero();
    if smu == snu {
        x.insert(Monomial::new(mu, nu), coeff);
    }
    Ok(x)
}

/// The involution: `s_mu s_nu*` goes to `s_nu s_mu*` with conjugated
/// coefficient.
pub fn adjoint(x: &SymElement) -> SymElement {
    let mut out = SymElement::zero();
    for (m, c) in &x.terms {
        out.insert(Monomial::new(m.nu.clone(), m.mu.clone()), c.conj());
    }
    out
}

enum InnerProduct {
    Zero,
    /// `s_nu* s_sigma = s_p` (nu cancelled into sigma's tail).
    OnSigma(Path),
    /// `s_nu* s_sigma = s_p*` (sigma cancelled into nu's tail).
    OnNu(Path),
}

/// Resolves `s_nu* s_sigma` by cancelling matching tail edges with
/// `s_e* s_f = delta_{ef} p_{s(e)}`; nonzero only when the shorter path
/// is a tail of the longer one and the outer ranges agree.
fn resolve_inner(g: &Graph, nu: &Path, sigma: &Path) -> InnerProduct {
    let rn = nu.range(g).expect("paths valid over g");
    let rs = sigma.range(g).expect("paths valid over g");
    if rn != rs {
        return InnerProduct::Zero;
    }
    let a = nu.edge_ids();
    let b = sigma.edge_ids();
    let k = a.len().min(b.len());
    for i in 1..=k {
        if a[a.len() - i] != b[b.len() - i] {
            return InnerProduct::Zero;
        }
    }
    if a.len() <= b.len() {
        let rest = &b[..b.len() - a.len()];
        InnerProduct::OnSigma(if rest.is_empty() {
            Path::Trivial(sigma.source(g).expect("valid path"))
        } else {
            Path::Edges(rest.to_vec())
        })
    } else {
        let rest = &a[..a.len() - b.len()];
        InnerProduct::OnNu(Path::Edges(rest.to_vec()))
    }
}

/// Bilinear product; each monomial pair resolves to zero or to a single
/// monomial.
pub fn multiply(g: &Graph, x: &SymElement, y: &SymElement) -> SymElement {
    let mut out = SymElement::zero();
    for (mx, cx) in &x.terms {
        for (my, cy) in &y.terms {
            let m = match resolve_inner(g, &mx.nu, &my.mu) {
                InnerProduct::Zero => continue,
                InnerProduct::OnSigma(p) => Monomial::new(
                    p.concat(&mx.mu, g).expect("interface vertices agree"),
                    my.nu.clone(),
                ),
                InnerProduct::OnNu(p) => Monomial::new(
                    mx.mu.clone(),
                    p.concat(&my.nu, g).expect("interface vertices agree"),
                ),
            };
            out.insert(m, cx * cy);
        }
    }
    out
}

/// Lexicographically least edge entering `v`, if any.
pub fn special_edge(g: &Graph, v: &str) -> Option<String> {
    g.in_edges(v).map(|e| e.id.clone()).min()
}

fn is_special(g: &Graph, edge_id: &str) -> bool {
    let e = g.edge(edge_id).expect("edge valid over g");
    special_edge(g, &e.rng).as_deref() == Some(edge_id)
}

/// A monomial rewrites iff both paths start with the same special edge.
fn reducible(g: &Graph, m: &Monomial) -> bool {
    match (m.mu.first_edge(), m.nu.first_edge()) {
        (Some(a), Some(b)) => a == b && is_special(g, a),
        _ => false,
    }
}

fn strip_first(g: &Graph, p: &Path) -> Path {
    let ids = p.edge_ids();
    if ids.len() == 1 {
        Path::Trivial(g.edge(&ids[0]).expect("edge valid").rng.clone())
    } else {
        Path::Edges(ids[1..].to_vec())
    }
}

fn prepend_edge(g: &Graph, edge_id: &str, p: &Path) -> Path {
    Path::from_edges(g, vec![edge_id.to_string()])
        .expect("edge valid")
        .concat(p, g)
        .expect("edge range meets path source")
}

// Deterministic generator for shuffled rewriting (splitmix64).
struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

fn normal_form_impl(g: &Graph, x: &SymElement, mut shuffle: Option<SplitMix>) -> SymElement {
    let mut work: Vec<(Monomial, GaussRational)> =
        x.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
    let mut out = SymElement::zero();
    while !work.is_empty() {
        let idx = match &mut shuffle {
            None => work.len() - 1,
            Some(rng) => (rng.next() % work.len() as u64) as usize,
        };
        let (m, c) = work.swap_remove(idx);
        if !reducible(g, &m) {
            out.insert(m, c);
            continue;
        }
        // Replace s_{mu'f} s_{nu'f}* by s_{mu'} s_{nu'}* minus the sum of
        // s_{mu'e} s_{nu'e}* over the other edges entering r(f). Each
        // rewrite shortens one monomial by two and emits only monomials
        // whose first edges are non-special, so the loop terminates.
        let f = m.mu.first_edge().expect("reducible").to_string();
        let v = g.edge(&f).expect("edge valid").rng.clone();
        let mu_rest = strip_first(g, &m.mu);
        let nu_rest = strip_first(g, &m.nu);
        work.push((Monomial::new(mu_rest.clone(), nu_rest.clone()), c.clone()));
        let neg = -&c;
        for e in g.in_edges(&v) {
            if e.id == f {
                continue;
            }
            work.push((
                Monomial::new(
                    prepend_edge(g, &e.id, &mu_rest),
                    prepend_edge(g, &e.id, &nu_rest),
                ),
                neg.clone(),
            ));
        }
    }
    out
}

/// Canonical form under special-edge rewriting.
pub fn normal_form(g: &Graph, x: &SymElement) -> SymElement {
    normal_form_impl(g, x, None)
}

/// Same fixpoint, but processing eligible rewrites in a seed-dependent
/// order; used to exercise confluence.
pub fn normal_form_shuffled(g: &Graph, x: &SymElement, seed: u64) -> SymElement {
    normal_form_impl(g, x, Some(SplitMix(seed)))
}

/// Exact equality-with-zero oracle.
pub fn is_zero(g: &Graph, x: &SymElement) -> bool {
    normal_form(g, x).is_empty()
}

/// All normal-form monomials with both path lengths bounded by `len_bound`,
/// in deterministic order.
pub fn basis_monomials(g: &Graph, len_bound: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for v in g.vertices() {
        let ps = crate::graph::paths_from(g, v, Some(len_bound)).expect("bounded enumeration");
        for mu in &ps {
            for nu in &ps {
                let m = Monomial::new(mu.clone(), nu.clone());
                if !reducible(g, &m) {
                    out.push(m);
                }
            }
        }
    }
    out.sort();
    out
}

/// One serialized term of a `SymElement`: an edge-id list for a proper
/// path or a base vertex for a trivial one, plus the exact coefficient.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_base: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_base: Option<String>,
    pub coeff: [String; 4],
}

fn path_to_dto(p: &Path) -> (Option<Vec<String>>, Option<String>) {
    match p {
        Path::Trivial(v) => (None, Some(v.clone())),
        Path::Edges(ids) => (Some(ids.clone()), None),
    }
}

fn path_from_dto(g: &Graph, ids: &Option<Vec<String>>, base: &Option<String>) -> Result<Path> {
    match (ids, base) {
        (Some(ids), None) => Path::from_edges(g, ids.clone()),
        (None, Some(v)) => {
            if !g.has_vertex(v) {
                return Err(Error::UnknownId {
                    kind: IdKind::Vertex,
                    id: v.clone(),
                });
            }
            Ok(Path::trivial(v.clone()))
        }
        _ => Err(Error::MalformedCertificate(
            "term must carry exactly one of an edge list or a base vertex per side".into(),
        )),
    }
}

pub fn element_to_terms(x: &SymElement) -> Vec<TermDto> {
    x.terms
        .iter()
        .map(|(m, c)| {
            let (mu, mu_base) = path_to_dto(&m.mu);
            let (nu, nu_base) = path_to_dto(&m.nu);
            TermDto {
                mu,
                mu_base,
                nu,
                nu_base,
                coeff: c.to_decimal_strings(),
            }
        })
        .collect()
}

pub fn element_from_terms(g: &Graph, terms: &[TermDto]) -> Result<SymElement> {
    let mut x = SymElement::zero();
    for t in terms {
        let mu = path_from_dto(g, &t.mu, &t.mu_base)?;
        let nu = path_from_dto(g, &t.nu, &t.nu_base)?;
        if mu.source(g)? != nu.source(g)? {
            return Err(Error::MalformedCertificate(
                "monomial paths start at different vertices".into(),
            ));
        }
        x.insert(
            Monomial::new(mu, nu),
            GaussRational::from_decimal_strings(&t.coeff)?,
        );
    }
    Ok(x)
}
