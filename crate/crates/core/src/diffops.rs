//! Differential operators between contact density modules.
//!
//! A [`DiffOp`] is stored in the normal form `Σ A_{cK} ∂x^c D̄^K`: coefficients
//! on the left, `D̄` factors in increasing index order, `D̄ᵢ²` rewritten as
//! `−∂x`. Every constructor and every operation returns normal forms, so
//! operator equality is map equality.
//!
//! The same machinery, with `∂θᵢ` in place of `D̄ᵢ` and `∂θᵢ² = 0`, gives the
//! canonical-basis form [`CanonicalOp`] used by the affine quantization.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::contactfields::hamiltonian_field;
use crate::error::{Error, Result};
use crate::finesymbols::{FSym, SymFlavor, SymMono};
use crate::rational::Rational;
use crate::superring::{check_index, OddSet, Parity, SuperPoly};

/// A non-negative half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(u32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub fn from_halves(h: u32) -> Self {
        HalfInt(h)
    }

    pub fn from_int(k: u32) -> Self {
        HalfInt(2 * k)
    }

    pub fn halves(self) -> u32 {
        self.0
    }

    pub fn ceil(self) -> u32 {
        self.0.div_ceil(2)
    }

    pub fn floor(self) -> u32 {
        self.0 / 2
    }

    pub fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(self.0 as i64, 2)
    }

    /// `self − ½`, saturating at zero.
    pub fn minus_half(self) -> HalfInt {
        HalfInt(self.0.saturating_sub(1))
    }

    /// All half-integers `0, ½, 1, …, self`.
    pub fn up_to(self) -> impl Iterator<Item = HalfInt> {
        (0..=self.0).map(HalfInt)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r: Rational = s.parse()?;
        let twice = &r * Rational::from_int(2);
        match twice.to_i64() {
            Some(h) if h >= 0 => Ok(HalfInt(h as u32)),
            _ => Err(Error::Parse {
                offset: 0,
                message: format!("`{s}` is not a non-negative half-integer"),
            }),
        }
    }
}

/// Order `k` and Heisenberg order `d` of a fine-symbol stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bigrade {
    pub k: u32,
    pub d: HalfInt,
}

impl Bigrade {
    /// Checks `⌈d⌉ ≤ k ≤ 2d`.
    pub fn new(k: u32, d: HalfInt) -> Result<Self> {
        if d.ceil() <= k && k <= d.halves() {
            Ok(Bigrade { k, d })
        } else {
            Err(Error::Order(format!("no stratum with k = {k}, d = {d}")))
        }
    }

    /// Bigrade of the operator word `∂x^c D̄^K` with `|K| = odd`.
    pub fn of_word(c: u32, odd: u32) -> Self {
        Bigrade {
            k: c + odd,
            d: HalfInt(2 * c + odd),
        }
    }

    /// ζ-degree `2d − k`.
    pub fn zeta_degree(self) -> u32 {
        self.d.halves() - self.k
    }

    /// Moment degree `2(k − d)`.
    pub fn moment_degree(self) -> u32 {
        2 * self.k - self.d.halves()
    }

    /// Every stratum with `d ≤ d_max`, ordered by `(d, k)`.
    pub fn all_up_to(d_max: HalfInt) -> Vec<Bigrade> {
        let mut out = Vec::new();
        for d in d_max.up_to() {
            for k in d.ceil()..=d.halves() {
                out.push(Bigrade { k, d });
            }
        }
        out
    }
}

impl fmt::Display for Bigrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, d={})", self.k, self.d)
    }
}

// ---------------------------------------------------------------------------
// normal-form algebra shared by both bases

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Frame {
    /// odd generators D̄ᵢ, with D̄ᵢ² = −∂x
    Contact,
    /// odd generators ∂θᵢ, with ∂θᵢ² = 0
    Canonical,
}

pub(crate) type OpKey = (u32, OddSet);
pub(crate) type OpTerms = BTreeMap<OpKey, SuperPoly>;

pub(crate) fn add_op(terms: &mut OpTerms, key: OpKey, coef: SuperPoly) {
    if coef.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match terms.entry(key) {
        Entry::Vacant(v) => {
            v.insert(coef);
        }
        Entry::Occupied(mut o) => {
            let sum = std::mem::replace(o.get_mut(), SuperPoly::zero(0)) + coef;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

fn odd_act(frame: Frame, i: usize, b: &SuperPoly) -> SuperPoly {
    match frame {
        Frame::Contact => b.dbar_at(i),
        Frame::Canonical => b.d_theta_at(i),
    }
}

/// `gᵢ ∘ Σ B ∂x^c G^L` for the odd generator `gᵢ` of `frame`.
fn lmul_odd(frame: Frame, i: usize, t: &OpTerms) -> OpTerms {
    let mut out = OpTerms::new();
    let bit = 1u64 << (i - 1);
    for (&(c, l), b) in t {
        add_op(&mut out, (c, l), odd_act(frame, i, b));
        let below = (l.bits() & (bit - 1)).count_ones();
        let (key, sign_neg) = if l.bits() & bit != 0 {
            match frame {
                Frame::Contact => (
                    (c + 1, OddSet::from_bits(l.bits() & !bit)),
                    below.is_multiple_of(2),
                ),
                Frame::Canonical => continue,
            }
        } else {
            ((c, OddSet::from_bits(l.bits() | bit)), below % 2 == 1)
        };
        let (even, odd) = b.split_parity();
        let even = if sign_neg { -even } else { even };
        let odd = if sign_neg { odd } else { -odd };
        add_op(&mut out, key, even + odd);
    }
    out
}

fn lmul_dx(t: &OpTerms) -> OpTerms {
    let mut out = OpTerms::new();
    for (&(c, l), b) in t {
        add_op(&mut out, (c, l), b.d_x());
        add_op(&mut out, (c + 1, l), b.clone());
    }
    out
}

fn lmul_coef(a: &SuperPoly, t: &OpTerms) -> OpTerms {
    let mut out = OpTerms::new();
    for (&key, b) in t {
        add_op(&mut out, key, a * b);
    }
    out
}

pub(crate) fn compose_terms(frame: Frame, a: &OpTerms, b: &OpTerms) -> OpTerms {
    let mut out = OpTerms::new();
    // group A's terms by word so each word acts on `b` once
    for (&(c, k), coef) in a {
        let mut cur = b.clone();
        let idx: Vec<usize> = k.iter().collect();
        for &i in idx.iter().rev() {
            cur = lmul_odd(frame, i, &cur);
        }
        for _ in 0..c {
            cur = lmul_dx(&cur);
        }
        for (key, v) in lmul_coef(coef, &cur) {
            add_op(&mut out, key, v);
        }
    }
    out
}

fn apply_terms(frame: Frame, t: &OpTerms, g: &SuperPoly) -> SuperPoly {
    let mut out = SuperPoly::zero(g.n());
    for (&(c, k), coef) in t {
        let mut h = g.clone();
        let idx: Vec<usize> = k.iter().collect();
        for &i in idx.iter().rev() {
            h = odd_act(frame, i, &h);
        }
        for _ in 0..c {
            h = h.d_x();
        }
        out = out + coef * &h;
    }
    out
}

fn terms_parity(t: &OpTerms) -> Option<Parity> {
    let mut found: Option<Parity> = None;
    for (&(_, k), coef) in t {
        let p = coef.parity()?.plus(k.parity());
        match found {
            None => found = Some(p),
            Some(q) if q != p => return None,
            _ => {}
        }
    }
    Some(found.unwrap_or(Parity::Even))
}

fn split_terms(t: &OpTerms) -> (OpTerms, OpTerms) {
    let mut even = OpTerms::new();
    let mut odd = OpTerms::new();
    for (&(c, k), coef) in t {
        let (ce, co) = coef.split_parity();
        let (to_even, to_odd) = if k.parity().is_odd() {
            (co, ce)
        } else {
            (ce, co)
        };
        add_op(&mut even, (c, k), to_even);
        add_op(&mut odd, (c, k), to_odd);
    }
    (even, odd)
}

fn write_terms(f: &mut fmt::Formatter<'_>, t: &OpTerms, odd_name: &str) -> fmt::Result {
    if t.is_empty() {
        return f.write_str("0");
    }
    let mut out = String::new();
    for (idx, (&(c, k), coef)) in t.iter().rev().enumerate() {
        let mut word: Vec<String> = Vec::new();
        match c {
            0 => {}
            1 => word.push("dx".into()),
            _ => word.push(format!("dx^{c}")),
        }
        word.extend(k.iter().map(|i| format!("{odd_name}{i}")));
        let word = word.join("*");
        let coef_s = coef.to_string();
        let piece = if word.is_empty() {
            if coef.len() > 1 {
                format!("({coef_s})")
            } else {
                coef_s
            }
        } else if coef.len() > 1 {
            format!("({coef_s})*{word}")
        } else if coef_s == "1" {
            word
        } else if coef_s == "-1" {
            format!("-{word}")
        } else {
            format!("{coef_s}*{word}")
        };
        match (idx, piece.strip_prefix('-')) {
            (0, _) => out.push_str(&piece),
            (_, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (_, None) => {
                out.push_str(" + ");
                out.push_str(&piece);
            }
        }
    }
    f.write_str(&out)
}

// ---------------------------------------------------------------------------

/// A differential operator `F_λ → F_μ` in `D̄` normal form.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffOp {
    n: usize,
    lambda: Rational,
    mu: Rational,
    terms: OpTerms,
}

impl DiffOp {
    pub fn zero(n: usize, lambda: Rational, mu: Rational) -> Self {
        DiffOp {
            n,
            lambda,
            mu,
            terms: OpTerms::new(),
        }
    }

    /// `A ∂x^c D̄^K`, with `K` given as an increasing set.
    pub fn term(n: usize, lambda: Rational, mu: Rational, c: u32, k: OddSet, a: SuperPoly) -> Self {
        assert_eq!(a.n(), n);
        let mut op = DiffOp::zero(n, lambda, mu);
        add_op(&mut op.terms, (c, k), a);
        op
    }

    /// Multiplication by `g`.
    pub fn multiplication(g: SuperPoly, lambda: Rational, mu: Rational) -> Self {
        let n = g.n();
        DiffOp::term(n, lambda, mu, 0, OddSet::EMPTY, g)
    }

    pub fn identity(n: usize, lambda: Rational, mu: Rational) -> Self {
        DiffOp::multiplication(SuperPoly::one(n), lambda, mu)
    }

    pub fn d_x(n: usize, lambda: Rational, mu: Rational) -> Self {
        DiffOp::term(n, lambda, mu, 1, OddSet::EMPTY, SuperPoly::one(n))
    }

    pub fn dbar(n: usize, i: usize, lambda: Rational, mu: Rational) -> Result<Self> {
        check_index(i, n)?;
        Ok(DiffOp::term(
            n,
            lambda,
            mu,
            0,
            OddSet::single(i),
            SuperPoly::one(n),
        ))
    }

    pub(crate) fn from_raw(n: usize, lambda: Rational, mu: Rational, terms: OpTerms) -> Self {
        DiffOp {
            n,
            lambda,
            mu,
            terms,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    /// `δ = μ − λ`.
    pub fn delta(&self) -> Rational {
        &self.mu - &self.lambda
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, OddSet, &SuperPoly)> {
        self.terms.iter().map(|(&(c, k), a)| (c, k, a))
    }

    pub fn coefficient(&self, c: u32, k: OddSet) -> SuperPoly {
        self.terms
            .get(&(c, k))
            .cloned()
            .unwrap_or_else(|| SuperPoly::zero(self.n))
    }

    /// Same terms, relabelled weights.
    pub fn with_weights(&self, lambda: Rational, mu: Rational) -> DiffOp {
        DiffOp {
            n: self.n,
            lambda,
            mu,
            terms: self.terms.clone(),
        }
    }

    pub fn parity(&self) -> Option<Parity> {
        terms_parity(&self.terms)
    }

    pub fn split_parity(&self) -> (DiffOp, DiffOp) {
        let (e, o) = split_terms(&self.terms);
        (
            DiffOp::from_raw(self.n, self.lambda.clone(), self.mu.clone(), e),
            DiffOp::from_raw(self.n, self.lambda.clone(), self.mu.clone(), o),
        )
    }

    fn check_like(&self, other: &DiffOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        if self.lambda != other.lambda || self.mu != other.mu {
            return Err(Error::WeightMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.lambda, self.mu, other.lambda, other.mu
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DiffOp) -> Result<DiffOp> {
        self.check_like(other)?;
        let mut out = self.clone();
        for (&key, a) in &other.terms {
            add_op(&mut out.terms, key, a.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> DiffOp {
        let mut out = DiffOp::zero(self.n, self.lambda.clone(), self.mu.clone());
        for (&key, a) in &self.terms {
            add_op(&mut out.terms, key, a.scale(c));
        }
        out
    }

    /// Left multiplication by a superfunction.
    pub fn left_mul(&self, g: &SuperPoly) -> DiffOp {
        DiffOp::from_raw(
            self.n,
            self.lambda.clone(),
            self.mu.clone(),
            lmul_coef(g, &self.terms),
        )
    }

    /// Evaluates the operator on a superfunction.
    pub fn apply(&self, g: &SuperPoly) -> Result<SuperPoly> {
        if g.n() != self.n {
            return Err(Error::Dimension {
                left: self.n,
                right: g.n(),
            });
        }
        Ok(apply_terms(Frame::Contact, &self.terms, g))
    }

    /// `self ∘ other`; requires `other.μ = self.λ`.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        if self.n != other.n {
            return Err(Error::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        if other.mu != self.lambda {
            return Err(Error::WeightMismatch(format!(
                "cannot compose F_{} → F_{} after F_{} → F_{}",
                self.lambda, self.mu, other.lambda, other.mu
            )));
        }
        Ok(DiffOp::from_raw(
            self.n,
            other.lambda.clone(),
            self.mu.clone(),
            compose_terms(Frame::Contact, &self.terms, &other.terms),
        ))
    }

    /// `(k, d)`: the order and the Heisenberg order.
    pub fn orders(&self) -> Result<(u32, HalfInt)> {
        if self.is_zero() {
            return Err(Error::ZeroOperator);
        }
        let k = self
            .terms
            .keys()
            .map(|(c, l)| c + l.len())
            .max()
            .unwrap_or(0);
        let d = self
            .terms
            .keys()
            .map(|(c, l)| 2 * c + l.len())
            .max()
            .unwrap_or(0);
        Ok((k, HalfInt(d)))
    }

    /// Whether every term lies in `D^{k,d}`.
    pub fn within(&self, at: Bigrade) -> bool {
        self.terms
            .keys()
            .all(|&(c, l)| c + l.len() <= at.k && 2 * c + l.len() <= at.d.halves())
    }

    /// Projection `D^{k,d} → Σ^{k,d}_δ`.
    pub fn fine_symbol(&self, at: Bigrade) -> Result<FSym> {
        if !self.within(at) {
            return Err(Error::Order(format!(
                "operator is not in the filtration piece {at}"
            )));
        }
        Ok(self.stratum(at))
    }

    /// The terms of exactly bigrade `at`, as a symbol, without the
    /// filtration check.
    pub(crate) fn stratum(&self, at: Bigrade) -> FSym {
        let mut s = FSym::zero(self.n, self.delta(), SymFlavor::Contact);
        for (&(c, l), a) in &self.terms {
            if Bigrade::of_word(c, l.len()) == at {
                for (m, v) in a.terms() {
                    s.add_term(SymMono::new(self.n, m.x, c, m.odd, l), v.clone());
                }
            }
        }
        s
    }

    /// Projection `H^d → P^d_δ`: all terms of Heisenberg order exactly `d`.
    pub fn h_symbol(&self, d: HalfInt) -> Result<FSym> {
        if self
            .terms
            .keys()
            .any(|&(c, l)| 2 * c + l.len() > d.halves())
        {
            return Err(Error::Order(format!("Heisenberg order exceeds {d}")));
        }
        let mut s = FSym::zero(self.n, self.delta(), SymFlavor::Contact);
        for (&(c, l), a) in &self.terms {
            if 2 * c + l.len() == d.halves() {
                for (m, v) in a.terms() {
                    s.add_term(SymMono::new(self.n, m.x, c, m.odd, l), v.clone());
                }
            }
        }
        Ok(s)
    }

    /// Principal symbol of order `k` (all terms with `c + |K| = k`) in contact
    /// moments.
    pub fn order_symbol(&self, k: u32) -> Result<FSym> {
        if self.terms.keys().any(|&(c, l)| c + l.len() > k) {
            return Err(Error::Order(format!("order exceeds {k}")));
        }
        let mut s = FSym::zero(self.n, self.delta(), SymFlavor::Contact);
        for (&(c, l), a) in &self.terms {
            if c + l.len() == k {
                for (m, v) in a.terms() {
                    s.add_term(SymMono::new(self.n, m.x, c, m.odd, l), v.clone());
                }
            }
        }
        Ok(s)
    }

    /// Canonical section `Σ A ζ^c γ^K ↦ Σ A ∂x^c D̄^K` from contact symbols,
    /// acting `F_λ → F_{λ+δ}`.
    pub fn lift(s: &FSym, lambda: &Rational) -> Result<DiffOp> {
        s.expect_flavor(SymFlavor::Contact)?;
        let n = s.n();
        let mut op = DiffOp::zero(n, lambda.clone(), lambda + s.delta());
        for (m, v) in s.terms() {
            let coef = SuperPoly::monomial(n, m.x, m.theta(n), v.clone());
            add_op(&mut op.terms, (m.z, m.moments(n)), coef);
        }
        Ok(op)
    }

    /// Rewrites `D̄ᵢ = ∂θᵢ − θᵢ∂x`.
    pub fn to_canonical_basis(&self) -> CanonicalOp {
        let n = self.n;
        let mut out = OpTerms::new();
        for (&(c, k), a) in &self.terms {
            let mut cur = OpTerms::new();
            cur.insert((0, OddSet::EMPTY), SuperPoly::one(n));
            let idx: Vec<usize> = k.iter().collect();
            for &i in idx.iter().rev() {
                let mut gen = OpTerms::new();
                add_op(&mut gen, (0, OddSet::single(i)), SuperPoly::one(n));
                add_op(
                    &mut gen,
                    (1, OddSet::EMPTY),
                    -SuperPoly::theta(n, i).expect("index"),
                );
                cur = compose_terms(Frame::Canonical, &gen, &cur);
            }
            for _ in 0..c {
                cur = lmul_dx(&cur);
            }
            for (key, v) in lmul_coef(a, &cur) {
                add_op(&mut out, key, v);
            }
        }
        CanonicalOp {
            n,
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
            terms: out,
        }
    }

    /// `L^w_{X_f}` as an operator `F_w → F_w`.
    pub fn density_action_op(f: &SuperPoly, w: &Rational) -> Result<DiffOp> {
        let n = f.n();
        let xf = hamiltonian_field(f)?;
        // X_f = F ∂x + Σ gⁱ ∂θᵢ with ∂θᵢ = D̄ᵢ + θᵢ∂x
        let mut terms = OpTerms::new();
        let mut dx_coef = xf.f.clone();
        for (i, gi) in xf.g.iter().enumerate() {
            add_op(&mut terms, (0, OddSet::single(i + 1)), gi.clone());
            dx_coef = dx_coef + gi * &SuperPoly::theta(n, i + 1)?;
        }
        add_op(&mut terms, (1, OddSet::EMPTY), dx_coef);
        add_op(&mut terms, (0, OddSet::EMPTY), f.d_x().scale(w));
        Ok(DiffOp::from_raw(n, w.clone(), w.clone(), terms))
    }
}

/// `𝓛_{X_f} D = L^μ_{X_f} ∘ D − (−1)^{p(f)p(D)} D ∘ L^λ_{X_f}`.
pub fn lie_derivative(f: &SuperPoly, d: &DiffOp) -> Result<DiffOp> {
    let pf = f.homogeneous_parity("contact Hamiltonian")?;
    let pd = d
        .parity()
        .ok_or(Error::MixedParity("differential operator"))?;
    let l_mu = DiffOp::density_action_op(f, d.mu())?;
    let l_lambda = DiffOp::density_action_op(f, d.lambda())?;
    let left = l_mu.compose(d)?;
    let right = d.compose(&l_lambda)?;
    let right = if pf.koszul(pd) {
        right
    } else {
        right.scale(&-Rational::one())
    };
    left.try_add(&right)
}

/// Lie derivative extended linearly to operators of mixed parity.
pub fn lie_derivative_any(f: &SuperPoly, d: &DiffOp) -> Result<DiffOp> {
    if d.parity().is_some() {
        return lie_derivative(f, d);
    }
    let (e, o) = d.split_parity();
    lie_derivative(f, &e)?.try_add(&lie_derivative(f, &o)?)
}

impl std::ops::Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        self.try_add(rhs)
            .expect("adding operators with different weights")
    }
}

impl std::ops::Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        self.try_add(&rhs.scale(&-Rational::one()))
            .expect("subtracting operators with different weights")
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.terms, "D")
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOp[n={}, {} -> {}](", self.n, self.lambda, self.mu)?;
        write_terms(f, &self.terms, "D")?;
        f.write_str(")")
    }
}

/// An operator written as `Σ A_I ∂x^{i₀} ∂θ^{I}` (canonical coordinate basis).
#[derive(Clone, PartialEq, Eq)]
pub struct CanonicalOp {
    n: usize,
    lambda: Rational,
    mu: Rational,
    terms: OpTerms,
}

impl CanonicalOp {
    pub fn zero(n: usize, lambda: Rational, mu: Rational) -> Self {
        CanonicalOp {
            n,
            lambda,
            mu,
            terms: OpTerms::new(),
        }
    }

    /// `A ∂x^c ∂θ^J`.
    pub fn term(n: usize, lambda: Rational, mu: Rational, c: u32, j: OddSet, a: SuperPoly) -> Self {
        let mut op = CanonicalOp::zero(n, lambda, mu);
        add_op(&mut op.terms, (c, j), a);
        op
    }

    pub(crate) fn add_term(&mut self, c: u32, j: OddSet, a: SuperPoly) {
        add_op(&mut self.terms, (c, j), a);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, OddSet, &SuperPoly)> {
        self.terms.iter().map(|(&(c, k), a)| (c, k, a))
    }

    pub fn apply(&self, g: &SuperPoly) -> SuperPoly {
        apply_terms(Frame::Canonical, &self.terms, g)
    }

    pub fn compose(&self, other: &CanonicalOp) -> CanonicalOp {
        CanonicalOp {
            n: self.n,
            lambda: other.lambda.clone(),
            mu: self.mu.clone(),
            terms: compose_terms(Frame::Canonical, &self.terms, &other.terms),
        }
    }

    /// Rewrites `∂θᵢ = D̄ᵢ + θᵢ∂x`.
    pub fn to_contact_basis(&self) -> DiffOp {
        let n = self.n;
        let mut out = OpTerms::new();
        for (&(c, k), a) in &self.terms {
            let mut cur = OpTerms::new();
            cur.insert((0, OddSet::EMPTY), SuperPoly::one(n));
            let idx: Vec<usize> = k.iter().collect();
            for &i in idx.iter().rev() {
                let mut gen = OpTerms::new();
                add_op(&mut gen, (0, OddSet::single(i)), SuperPoly::one(n));
                add_op(
                    &mut gen,
                    (1, OddSet::EMPTY),
                    SuperPoly::theta(n, i).expect("index"),
                );
                cur = compose_terms(Frame::Contact, &gen, &cur);
            }
            for _ in 0..c {
                cur = lmul_dx(&cur);
            }
            for (key, v) in lmul_coef(a, &cur) {
                add_op(&mut out, key, v);
            }
        }
        DiffOp::from_raw(n, self.lambda.clone(), self.mu.clone(), out)
    }
}

impl fmt::Display for CanonicalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.terms, "dt")
    }
}

impl fmt::Debug for CanonicalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalOp[n={}](", self.n)?;
        write_terms(f, &self.terms, "dt")?;
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn th(n: usize, i: usize) -> SuperPoly {
        SuperPoly::theta(n, i).unwrap()
    }

    fn w0() -> (Rational, Rational) {
        (q(1, 3), q(1, 3))
    }

    fn dbar(n: usize, i: usize) -> DiffOp {
        let (l, m) = w0();
        DiffOp::dbar(n, i, l, m).unwrap()
    }

    #[test]
    fn half_int_formatting_and_parsing() {
        assert_eq!(HalfInt::from_halves(5).to_string(), "5/2");
        assert_eq!(HalfInt::from_int(2).to_string(), "2");
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), HalfInt::from_halves(3));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("-1".parse::<HalfInt>().is_err());
        assert_eq!(HalfInt::from_halves(3).ceil(), 2);
    }

    #[test]
    fn bigrade_bounds() {
        assert!(Bigrade::new(1, HalfInt::from_halves(1)).is_ok());
        assert!(Bigrade::new(2, HalfInt::from_halves(1)).is_err());
        assert!(Bigrade::new(0, HalfInt::from_int(1)).is_err());
        assert_eq!(Bigrade::all_up_to(HalfInt::from_int(1)).len(), 1 + 1 + 2);
    }

    #[test]
    fn apply_examples() {
        let n = 2;
        let (l, m) = w0();
        let dx = DiffOp::d_x(n, l.clone(), m.clone());
        assert_eq!(
            dx.apply(&SuperPoly::x_pow(n, 2)).unwrap(),
            SuperPoly::x(n).scale(&q(2, 1))
        );

        let d12 = dbar(n, 1).compose(&dbar(n, 2)).unwrap();
        let g = &th(n, 2) * &th(n, 1);
        let by_hand = g.dbar(2).unwrap().dbar(1).unwrap();
        assert_eq!(d12.apply(&g).unwrap(), by_hand);

        let t1d1 = DiffOp::term(n, l, m, 0, OddSet::single(1), th(n, 1));
        assert!(t1d1.apply(&SuperPoly::x(n)).unwrap().is_zero());
    }

    #[test]
    fn dbar_square_is_minus_dx() {
        let n = 3;
        let (l, m) = w0();
        let sq = dbar(n, 1).compose(&dbar(n, 1)).unwrap();
        assert_eq!(sq, DiffOp::d_x(n, l, m).scale(&q(-1, 1)));
        let anti =
            &dbar(n, 1).compose(&dbar(n, 2)).unwrap() + &dbar(n, 2).compose(&dbar(n, 1)).unwrap();
        assert!(anti.is_zero());
    }

    #[test]
    fn push_coefficient_through_dbar() {
        // D̄₁ ∘ θ₁ = 1 − θ₁D̄₁
        let n = 2;
        let (l, m) = w0();
        let t1 = DiffOp::multiplication(th(n, 1), l.clone(), m.clone());
        let lhs = dbar(n, 1).compose(&t1).unwrap();
        let rhs = &DiffOp::identity(n, l.clone(), m.clone())
            - &DiffOp::term(n, l, m, 0, OddSet::single(1), th(n, 1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn composition_checks_weights() {
        let n = 1;
        let a = DiffOp::identity(n, q(0, 1), q(1, 1));
        let b = DiffOp::identity(n, q(0, 1), q(1, 1));
        assert!(matches!(a.compose(&b), Err(Error::WeightMismatch(_))));
        let c = DiffOp::identity(n, q(1, 1), q(2, 1));
        let ca = c.compose(&a).unwrap();
        assert_eq!((ca.lambda(), ca.mu()), (&q(0, 1), &q(2, 1)));
    }

    #[test]
    fn orders_examples() {
        let n = 2;
        let (l, m) = w0();
        assert_eq!(
            DiffOp::d_x(n, l.clone(), m.clone()).orders().unwrap(),
            (1, HalfInt::from_int(1))
        );
        assert_eq!(dbar(n, 1).orders().unwrap(), (1, HalfInt::from_halves(1)));
        let w = DiffOp::term(
            n,
            l.clone(),
            m.clone(),
            1,
            OddSet::from_indices([1, 2]),
            SuperPoly::one(n),
        );
        assert_eq!(w.orders().unwrap(), (3, HalfInt::from_int(2)));
        assert_eq!(
            DiffOp::zero(n, l, m).orders().unwrap_err(),
            Error::ZeroOperator
        );
    }

    #[test]
    fn lie_derivative_simple_cases() {
        let n = 2;
        let (l, m) = w0();
        let dx = DiffOp::d_x(n, l.clone(), m.clone());
        assert!(lie_derivative(&SuperPoly::one(n), &dx).unwrap().is_zero());
        let id = DiffOp::identity(n, l.clone(), l.clone());
        assert!(lie_derivative(&SuperPoly::x(n), &id).unwrap().is_zero());
        let mixed = &dx + &DiffOp::multiplication(th(n, 1), l.clone(), m.clone());
        assert!(lie_derivative(&SuperPoly::x(n), &mixed).is_err());
    }

    #[test]
    fn lie_derivative_matches_definition_pointwise() {
        // f = θ₁, D = D̄₂; compare against explicit density actions on monomials
        let n = 2;
        let (l, m) = (q(1, 3), q(5, 7));
        let d = DiffOp::dbar(n, 2, l.clone(), m.clone()).unwrap();
        let f = th(n, 1);
        let ld = lie_derivative(&f, &d).unwrap();
        use crate::contactfields::{density_action, Weight};
        for x in 0..=3 {
            for bits in 0..4u64 {
                let g = SuperPoly::monomial(n, x, OddSet::from_bits(bits), q(1, 1));
                let left =
                    density_action(&f, &Weight::contact(m.clone()), &d.apply(&g).unwrap()).unwrap();
                // (−1)^{p(f)p(D)} = −1, so the second term enters with +
                let right = d
                    .apply(&density_action(&f, &Weight::contact(l.clone()), &g).unwrap())
                    .unwrap();
                assert_eq!(ld.apply(&g).unwrap(), &left + &right);
            }
        }
    }

    #[test]
    fn symbol_projections() {
        let n = 2;
        let (l, m) = w0();
        let op = &DiffOp::d_x(n, l.clone(), m.clone()) + &dbar(n, 1);
        let s = op
            .fine_symbol(Bigrade::new(1, HalfInt::from_int(1)).unwrap())
            .unwrap();
        assert_eq!(s.to_string(), "z");
        let d12 = DiffOp::term(
            n,
            l.clone(),
            m.clone(),
            0,
            OddSet::from_indices([1, 2]),
            SuperPoly::one(n),
        );
        let s = d12
            .fine_symbol(Bigrade::new(2, HalfInt::from_int(1)).unwrap())
            .unwrap();
        assert_eq!(s.to_string(), "g1*g2");
        let xid = DiffOp::multiplication(SuperPoly::x(n), l.clone(), m.clone());
        assert_eq!(
            xid.fine_symbol(Bigrade::new(0, HalfInt::ZERO).unwrap())
                .unwrap()
                .to_string(),
            "x"
        );
        assert!(d12
            .fine_symbol(Bigrade::new(1, HalfInt::from_int(1)).unwrap())
            .is_err());

        let h = (&DiffOp::d_x(n, l.clone(), m.clone()) + &d12)
            .h_symbol(HalfInt::from_int(1))
            .unwrap();
        assert_eq!(h.to_string(), "z + g1*g2");
        assert!(dbar(n, 1).h_symbol(HalfInt::from_int(1)).unwrap().is_zero());
        assert!(d12.h_symbol(HalfInt::from_halves(1)).is_err());
    }

    #[test]
    fn canonical_basis_rewrite() {
        let n = 2;
        let c = dbar(n, 1).to_canonical_basis();
        let (l, m) = w0();
        let mut expected = CanonicalOp::term(
            n,
            l.clone(),
            m.clone(),
            0,
            OddSet::single(1),
            SuperPoly::one(n),
        );
        expected.add_term(1, OddSet::EMPTY, -th(n, 1));
        assert_eq!(c, expected);
        let dx = DiffOp::d_x(n, l.clone(), m.clone());
        assert_eq!(dx.to_canonical_basis().to_contact_basis(), dx);
        let d12 = dbar(n, 1).compose(&dbar(n, 2)).unwrap();
        let c12 = d12.to_canonical_basis();
        for x in 0..3 {
            for bits in 0..4u64 {
                let g = SuperPoly::monomial(n, x, OddSet::from_bits(bits), q(1, 1));
                assert_eq!(c12.apply(&g), d12.apply(&g).unwrap());
            }
        }
        assert_eq!(c12.to_contact_basis(), d12);
    }
}
