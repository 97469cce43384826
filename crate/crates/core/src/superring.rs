//! The superfunction ring ℚ[x] ⊗ Λ(θ₁…θₙ) and its derivations.
//!
//! A [`SuperPoly`] is a sparse map from monomials `x^a θ_I` to rational
//! coefficients. Odd monomials are stored as bitmasks with strictly
//! increasing index order; the sign produced by reordering is folded into the
//! coefficient, so two equal superfunctions always have equal maps.
//!
//! All odd derivatives are *left* derivatives: `∂θᵢ(θᵢ f) = f` when `f` does
//! not contain `θᵢ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest supported number of odd coordinates. Symbols store θ's and
/// moments in one 64-bit mask, hence 2n ≤ 64.
pub const MAX_ODD: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(d: u32) -> Self {
        if d.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Parity of a product.
    pub fn plus(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// `(-1)^(self * other)` as a boolean "negate".
    pub fn koszul(self, other: Parity) -> bool {
        self.is_odd() && other.is_odd()
    }
}

/// A set of odd generator indices, stored as a bitmask (bit `i - 1` ↔ index `i`).
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OddSet(u64);

impl OddSet {
    pub const EMPTY: OddSet = OddSet(0);

    pub fn from_bits(bits: u64) -> Self {
        OddSet(bits)
    }

    /// `{i}` for a 1-based index.
    pub fn single(i: usize) -> Self {
        debug_assert!((1..=64).contains(&i));
        OddSet(1 << (i - 1))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        OddSet(indices.into_iter().fold(0, |m, i| m | (1 << (i - 1))))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << (i - 1)) != 0
    }

    pub fn parity(self) -> Parity {
        Parity::of_degree(self.len())
    }

    /// 1-based indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i + 1)
            }
        })
    }
}

impl fmt::Debug for OddSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Product of two ordered odd monomials: the merged mask and whether the
/// reordering flips the sign. `None` when they share a generator.
#[inline]
pub(crate) fn wedge(a: u64, b: u64) -> Option<(u64, bool)> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        // generators of `a` sitting to the right of position j must be passed
        swaps += (a >> j).count_ones();
    }
    Some((a | b, swaps % 2 == 1))
}

/// Left derivative of an ordered odd monomial with respect to the generator
/// at `bit`: the remaining mask and the sign from passing lower generators.
#[inline]
pub(crate) fn strip(mask: u64, bit: u32) -> Option<(u64, bool)> {
    let b = 1u64 << bit;
    if mask & b == 0 {
        return None;
    }
    let passed = (mask & (b - 1)).count_ones();
    Some((mask & !b, passed % 2 == 1))
}

#[inline]
pub(crate) fn add_into<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, c: Rational) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// A monomial `x^x θ_odd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub x: u32,
    pub odd: OddSet,
}

impl Mono {
    pub fn new(x: u32, odd: OddSet) -> Self {
        Mono { x, odd }
    }

    pub fn parity(self) -> Parity {
        self.odd.parity()
    }
}

/// Element of ℚ[x] ⊗ Λ(θ₁…θₙ).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SuperPoly {
    n: usize,
    terms: BTreeMap<Mono, Rational>,
}

impl SuperPoly {
    pub fn zero(n: usize) -> Self {
        assert!(
            n <= MAX_ODD,
            "at most {MAX_ODD} odd coordinates are supported"
        );
        SuperPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = SuperPoly::zero(n);
        add_into(&mut p.terms, Mono::new(0, OddSet::EMPTY), c);
        p
    }

    pub fn one(n: usize) -> Self {
        SuperPoly::constant(n, Rational::one())
    }

    pub fn x(n: usize) -> Self {
        SuperPoly::monomial(n, 1, OddSet::EMPTY, Rational::one())
    }

    pub fn x_pow(n: usize, e: u32) -> Self {
        SuperPoly::monomial(n, e, OddSet::EMPTY, Rational::one())
    }

    /// The odd coordinate θᵢ.
    pub fn theta(n: usize, i: usize) -> Result<Self> {
        check_index(i, n)?;
        Ok(SuperPoly::monomial(
            n,
            0,
            OddSet::single(i),
            Rational::one(),
        ))
    }

    /// `c · x^x θ_odd` with `odd` already in increasing order.
    pub fn monomial(n: usize, x: u32, odd: OddSet, c: Rational) -> Self {
        debug_assert!(odd.bits() >> n == 0, "odd index exceeds n");
        let mut p = SuperPoly::zero(n);
        add_into(&mut p.terms, Mono::new(x, odd), c);
        p
    }

    /// `x^x θ_{i1} θ_{i2} …` in the given (not necessarily sorted) order;
    /// repeated indices give zero.
    pub fn ordered_product(n: usize, x: u32, indices: &[usize]) -> Result<Self> {
        let mut acc = SuperPoly::x_pow(n, x);
        for &i in indices {
            acc = acc.try_mul(&SuperPoly::theta(n, i)?)?;
        }
        Ok(acc)
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Rational)>>(n: usize, terms: I) -> Self {
        let mut p = SuperPoly::zero(n);
        for (m, c) in terms {
            add_into(&mut p.terms, m, c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: Mono) -> Rational {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    /// Constant term (coefficient of `1`).
    pub fn constant_term(&self) -> Rational {
        self.coeff(Mono::new(0, OddSet::EMPTY))
    }

    /// Homogeneous parity, or `None` when even and odd terms are mixed.
    /// The zero superfunction counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = it.next().unwrap_or(Parity::Even);
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn homogeneous_parity(&self, what: &'static str) -> Result<Parity> {
        self.parity().ok_or(Error::MixedParity(what))
    }

    /// `(even part, odd part)`.
    pub fn split_parity(&self) -> (SuperPoly, SuperPoly) {
        let mut even = SuperPoly::zero(self.n);
        let mut odd = SuperPoly::zero(self.n);
        for (m, c) in &self.terms {
            let target = if m.parity().is_odd() {
                &mut odd
            } else {
                &mut even
            };
            target.terms.insert(*m, c.clone());
        }
        (even, odd)
    }

    pub fn x_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.x).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero(self.n);
        }
        SuperPoly {
            n: self.n,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    fn check_same(&self, other: &SuperPoly) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            add_into(&mut out.terms, *m, c.clone());
        }
        Ok(out)
    }

    /// Supercommutative product.
    pub fn try_mul(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.check_same(other)?;
        let mut out = SuperPoly::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((odd, neg)) = wedge(ma.odd.bits(), mb.odd.bits()) {
                    let c = ca * cb;
                    let c = if neg { -c } else { c };
                    add_into(&mut out.terms, Mono::new(ma.x + mb.x, OddSet(odd)), c);
                }
            }
        }
        Ok(out)
    }

    /// ∂/∂x.
    pub fn d_x(&self) -> SuperPoly {
        let mut out = SuperPoly::zero(self.n);
        for (m, c) in &self.terms {
            if m.x > 0 {
                add_into(
                    &mut out.terms,
                    Mono::new(m.x - 1, m.odd),
                    c * Rational::from(m.x),
                );
            }
        }
        out
    }

    /// Left derivative ∂/∂θᵢ.
    pub fn d_theta(&self, i: usize) -> Result<SuperPoly> {
        check_index(i, self.n)?;
        Ok(self.d_theta_at(i))
    }

    pub(crate) fn d_theta_at(&self, i: usize) -> SuperPoly {
        let mut out = SuperPoly::zero(self.n);
        for (m, c) in &self.terms {
            if let Some((odd, neg)) = strip(m.odd.bits(), (i - 1) as u32) {
                add_into(
                    &mut out.terms,
                    Mono::new(m.x, OddSet(odd)),
                    if neg { -c } else { c.clone() },
                );
            }
        }
        out
    }

    /// D̄ᵢ = ∂θᵢ − θᵢ∂x.
    pub fn dbar(&self, i: usize) -> Result<SuperPoly> {
        check_index(i, self.n)?;
        Ok(self.dbar_at(i))
    }

    pub(crate) fn dbar_at(&self, i: usize) -> SuperPoly {
        let mut out = self.d_theta_at(i);
        let bit = 1u64 << (i - 1);
        for (m, c) in &self.terms {
            if m.x == 0 {
                continue;
            }
            // θᵢ · (m.x c x^{x-1} θ_odd)
            if let Some((odd, neg)) = wedge(bit, m.odd.bits()) {
                let v = c * Rational::from(m.x);
                add_into(
                    &mut out.terms,
                    Mono::new(m.x - 1, OddSet(odd)),
                    if neg { v } else { -v },
                );
            }
        }
        out
    }
}

pub(crate) fn check_index(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

impl Add for &SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: &SuperPoly) -> SuperPoly {
        self.try_add(rhs)
            .expect("SuperPoly addition across different n")
    }
}

impl Add for SuperPoly {
    type Output = SuperPoly;
    fn add(mut self, rhs: SuperPoly) -> SuperPoly {
        assert_eq!(self.n, rhs.n, "SuperPoly addition across different n");
        for (m, c) in rhs.terms {
            add_into(&mut self.terms, m, c);
        }
        self
    }
}

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        SuperPoly {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        -&self
    }
}

impl Sub for &SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: &SuperPoly) -> SuperPoly {
        self + &(-rhs)
    }
}

impl Sub for SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: SuperPoly) -> SuperPoly {
        self + (-rhs)
    }
}

impl Mul for &SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &SuperPoly) -> SuperPoly {
        self.try_mul(rhs)
            .expect("SuperPoly product across different n")
    }
}

impl Mul for SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: SuperPoly) -> SuperPoly {
        &self * &rhs
    }
}

/// Writes one `c * factors` term, with the sign handled by the caller.
pub(crate) fn write_term(out: &mut String, first: bool, c: &Rational, factors: &[String]) {
    let neg = c.is_negative();
    if first {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let a = c.abs();
    let mut parts: Vec<String> = Vec::with_capacity(factors.len() + 1);
    if !a.is_one() || factors.is_empty() {
        parts.push(a.to_string());
    }
    parts.extend(factors.iter().cloned());
    out.push_str(&parts.join("*"));
}

pub(crate) fn power_factor(name: &str, e: u32) -> Option<String> {
    match e {
        0 => None,
        1 => Some(name.to_string()),
        _ => Some(format!("{name}^{e}")),
    }
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut factors: Vec<String> = power_factor("x", m.x).into_iter().collect();
            factors.extend(m.odd.iter().map(|i| format!("t{i}")));
            write_term(&mut out, idx == 0, c, &factors);
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SuperPoly[n={}]({})", self.n, self)
    }
}
