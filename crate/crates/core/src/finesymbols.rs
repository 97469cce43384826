//! Symbol calculus on `ℚ[x, ζ] ⊗ Λ(θ₁…θₙ, γ₁…γₙ)`.
//!
//! Contact symbols use the moments `ζ` (for `∂x`) and `γᵢ` (for `D̄ᵢ`);
//! canonical symbols use `ζ` and `ηᵢ` (for `∂θᵢ`), related by
//! `γᵢ = ηᵢ − θᵢζ`. Moments are extra Grassmann generators stored after the
//! θ's in one bitmask, so every odd derivative here is a left derivative.

use std::collections::BTreeMap;
use std::fmt;

use crate::diffops::{lie_derivative_any, Bigrade, CanonicalOp, DiffOp, HalfInt};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::superring::{
    add_into, check_index, power_factor, strip, wedge, write_term, OddSet, Parity, SuperPoly,
};

/// Which moments a symbol is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymFlavor {
    /// `ζ, γ₁…γₙ`
    Contact,
    /// `ζ, η₁…ηₙ`
    Canonical,
}

impl SymFlavor {
    fn name(self) -> &'static str {
        match self {
            SymFlavor::Contact => "contact symbol",
            SymFlavor::Canonical => "canonical symbol",
        }
    }

    fn moment_letter(self) -> char {
        match self {
            SymFlavor::Contact => 'g',
            SymFlavor::Canonical => 'e',
        }
    }
}

/// `x^x ζ^z θ^I m^K`, with `I` in bits `0..n` and `K` in bits `n..2n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymMono {
    pub x: u32,
    pub z: u32,
    pub odd: u64,
}

impl SymMono {
    pub fn new(n: usize, x: u32, z: u32, theta: OddSet, moments: OddSet) -> Self {
        SymMono {
            x,
            z,
            odd: theta.bits() | (moments.bits() << n),
        }
    }

    pub fn theta(&self, n: usize) -> OddSet {
        OddSet::from_bits(self.odd & low_mask(n))
    }

    pub fn moments(&self, n: usize) -> OddSet {
        OddSet::from_bits(self.odd >> n)
    }

    pub fn parity(&self) -> Parity {
        Parity::of_degree(self.odd.count_ones())
    }

    /// `(k, 2d)` of this monomial's moment part.
    pub fn bigrade(&self, n: usize) -> Bigrade {
        let j = self.moments(n).len();
        Bigrade::of_word(self.z, j)
    }

    /// Total moment degree.
    pub fn degree(&self, n: usize) -> u32 {
        self.z + self.moments(n).len()
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A symbol of weight `δ`.
#[derive(Clone, PartialEq, Eq)]
pub struct FSym {
    n: usize,
    delta: Rational,
    flavor: SymFlavor,
    terms: BTreeMap<SymMono, Rational>,
}

impl FSym {
    pub fn zero(n: usize, delta: Rational, flavor: SymFlavor) -> Self {
        FSym {
            n,
            delta,
            flavor,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(n: usize, delta: Rational, flavor: SymFlavor, m: SymMono, c: Rational) -> Self {
        let mut s = FSym::zero(n, delta, flavor);
        s.add_term(m, c);
        s
    }

    /// A superfunction viewed as a moment-free symbol.
    pub fn from_poly(g: &SuperPoly, delta: Rational, flavor: SymFlavor) -> Self {
        let n = g.n();
        let mut s = FSym::zero(n, delta, flavor);
        for (m, c) in g.terms() {
            s.add_term(SymMono::new(n, m.x, 0, m.odd, OddSet::EMPTY), c.clone());
        }
        s
    }

    /// `ζ`.
    pub fn zeta(n: usize, delta: Rational, flavor: SymFlavor) -> Self {
        FSym::monomial(
            n,
            delta,
            flavor,
            SymMono::new(n, 0, 1, OddSet::EMPTY, OddSet::EMPTY),
            Rational::one(),
        )
    }

    /// The `i`-th moment: `γᵢ` or `ηᵢ` depending on the flavor.
    pub fn moment(n: usize, i: usize, delta: Rational, flavor: SymFlavor) -> Result<Self> {
        check_index(i, n)?;
        Ok(FSym::monomial(
            n,
            delta,
            flavor,
            SymMono::new(n, 0, 0, OddSet::EMPTY, OddSet::single(i)),
            Rational::one(),
        ))
    }

    pub(crate) fn add_term(&mut self, m: SymMono, c: Rational) {
        add_into(&mut self.terms, m, c);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn flavor(&self) -> SymFlavor {
        self.flavor
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

    pub fn terms(&self) -> impl Iterator<Item = (&SymMono, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &SymMono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub(crate) fn expect_flavor(&self, f: SymFlavor) -> Result<()> {
        if self.flavor == f {
            Ok(())
        } else {
            Err(Error::Flavor { expected: f.name() })
        }
    }

    pub fn with_delta(&self, delta: Rational) -> FSym {
        FSym {
            delta,
            ..self.clone()
        }
    }

    fn empty_like(&self) -> FSym {
        FSym::zero(self.n, self.delta.clone(), self.flavor)
    }

    fn map_terms(&self, mut f: impl FnMut(&SymMono, &Rational, &mut FSym)) -> FSym {
        let mut out = self.empty_like();
        for (m, c) in &self.terms {
            f(m, c, &mut out);
        }
        out
    }

    fn check_like(&self, other: &FSym) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        if self.flavor != other.flavor {
            return Err(Error::Flavor {
                expected: self.flavor.name(),
            });
        }
        if self.delta != other.delta {
            return Err(Error::WeightMismatch(format!(
                "δ = {} vs δ = {}",
                self.delta, other.delta
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &FSym) -> Result<FSym> {
        self.check_like(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> FSym {
        self.map_terms(|m, v, out| out.add_term(*m, v * c))
    }

    /// Product in the symbol superalgebra; the weight of `self` is kept.
    pub fn try_mul(&self, other: &FSym) -> Result<FSym> {
        if self.n != other.n {
            return Err(Error::Dimension {
                left: self.n,
                right: other.n,
            });
        }
        if self.flavor != other.flavor {
            return Err(Error::Flavor {
                expected: self.flavor.name(),
            });
        }
        let mut out = self.empty_like();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((odd, neg)) = wedge(a.odd, b.odd) {
                    let c = ca * cb;
                    let m = SymMono {
                        x: a.x + b.x,
                        z: a.z + b.z,
                        odd,
                    };
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Left multiplication by a superfunction.
    pub fn mul_poly(&self, g: &SuperPoly) -> FSym {
        FSym::from_poly(g, self.delta.clone(), self.flavor)
            .try_mul(self)
            .expect("same dimension")
    }

    pub fn parity(&self) -> Option<Parity> {
        let mut found = None;
        for m in self.terms.keys() {
            let p = m.parity();
            match found {
                None => found = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(found.unwrap_or(Parity::Even))
    }

    /// Splits by stratum `(k, d)` of the moment part.
    pub fn by_bigrade(&self) -> BTreeMap<Bigrade, FSym> {
        let mut out: BTreeMap<Bigrade, FSym> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.bigrade(self.n))
                .or_insert_with(|| self.empty_like())
                .add_term(*m, c.clone());
        }
        out
    }

    /// Splits by total moment degree.
    pub fn by_degree(&self) -> BTreeMap<u32, FSym> {
        let mut out: BTreeMap<u32, FSym> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree(self.n))
                .or_insert_with(|| self.empty_like())
                .add_term(*m, c.clone());
        }
        out
    }

    /// Splits by Heisenberg order `d`.
    pub fn by_heisenberg(&self) -> BTreeMap<HalfInt, FSym> {
        let mut out: BTreeMap<HalfInt, FSym> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.bigrade(self.n).d)
                .or_insert_with(|| self.empty_like())
                .add_term(*m, c.clone());
        }
        out
    }

    /// The single stratum of a nonzero homogeneous symbol.
    pub fn bigrade(&self) -> Result<Bigrade> {
        let strata = self.by_bigrade();
        let mut keys = strata.keys();
        match (keys.next(), keys.next()) {
            (Some(&b), None) => Ok(b),
            (None, _) => Err(Error::ZeroOperator),
            _ => Err(Error::NonHomogeneous),
        }
    }

    /// The single moment degree of a nonzero homogeneous symbol.
    pub fn degree(&self) -> Result<u32> {
        let parts = self.by_degree();
        let mut keys = parts.keys();
        match (keys.next(), keys.next()) {
            (Some(&k), None) => Ok(k),
            (None, _) => Err(Error::ZeroOperator),
            _ => Err(Error::NonHomogeneous),
        }
    }

    // -----------------------------------------------------------------------
    // derivations

    /// `∂x` on coefficients.
    pub fn d_x(&self) -> FSym {
        self.map_terms(|m, c, out| {
            if m.x > 0 {
                out.add_term(SymMono { x: m.x - 1, ..*m }, c * Rational::from(m.x));
            }
        })
    }

    /// `∂ζ`.
    pub fn d_zeta(&self) -> FSym {
        self.map_terms(|m, c, out| {
            if m.z > 0 {
                out.add_term(SymMono { z: m.z - 1, ..*m }, c * Rational::from(m.z));
            }
        })
    }

    /// `ζ∂ζ`.
    pub fn zeta_euler(&self) -> FSym {
        self.map_terms(|m, c, out| out.add_term(*m, c * Rational::from(m.z)))
    }

    fn d_bit(&self, bit: usize) -> FSym {
        self.map_terms(|m, c, out| {
            if let Some((odd, neg)) = strip(m.odd, bit as u32) {
                out.add_term(SymMono { odd, ..*m }, if neg { -c } else { c.clone() });
            }
        })
    }

    /// `∂θᵢ` (left derivative).
    pub fn d_theta(&self, i: usize) -> Result<FSym> {
        check_index(i, self.n)?;
        Ok(self.d_bit(i - 1))
    }

    /// `∂γᵢ` or `∂ηᵢ` (left derivative).
    pub fn d_moment(&self, i: usize) -> Result<FSym> {
        check_index(i, self.n)?;
        Ok(self.d_bit(self.n + i - 1))
    }

    /// `D̄ᵢ = ∂θᵢ − θᵢ∂x` acting on coefficients.
    pub fn dbar(&self, i: usize) -> Result<FSym> {
        let t = self.theta_mul(i)?;
        self.d_theta(i)?.try_add(&t.d_x().scale(&-Rational::one()))
    }

    /// `θᵢ · S`.
    pub fn theta_mul(&self, i: usize) -> Result<FSym> {
        check_index(i, self.n)?;
        let th = FSym::from_poly(
            &SuperPoly::theta(self.n, i)?,
            self.delta.clone(),
            self.flavor,
        );
        th.try_mul(self)
    }

    /// `mᵢ · S` for the `i`-th moment.
    pub fn moment_mul(&self, i: usize) -> Result<FSym> {
        FSym::moment(self.n, i, self.delta.clone(), self.flavor)?.try_mul(self)
    }

    /// `Σᵢ γᵢ D̄ᵢ ∂ζ S`; lowers `d` by ½ at fixed `k`.
    pub fn delta_op(&self) -> Result<FSym> {
        self.expect_flavor(SymFlavor::Contact)?;
        let dz = self.d_zeta();
        let mut out = self.empty_like();
        for i in 1..=self.n {
            out = out.try_add(&dz.dbar(i)?.moment_mul(i)?)?;
        }
        Ok(out)
    }

    /// Contact divergence `∂x∂ζ`.
    pub fn div_c(&self) -> Result<FSym> {
        self.expect_flavor(SymFlavor::Contact)?;
        Ok(self.d_zeta().d_x())
    }

    /// Tangential divergence `Σ D̄ᵣ∂γᵣ`.
    pub fn div_t(&self) -> Result<FSym> {
        self.expect_flavor(SymFlavor::Contact)?;
        let mut out = self.empty_like();
        for r in 1..=self.n {
            out = out.try_add(&self.d_moment(r)?.dbar(r)?)?;
        }
        Ok(out)
    }

    /// Interior product: `j = 1` gives `∂ζ − Σ θₖ∂γₖ`, `j = k+1` gives
    /// `−½∂γₖ`.
    pub fn interior(&self, j: usize) -> Result<FSym> {
        self.expect_flavor(SymFlavor::Contact)?;
        if j == 0 || j > self.n + 1 {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: self.n + 1,
            });
        }
        if j == 1 {
            let mut out = self.d_zeta();
            for k in 1..=self.n {
                out = out.try_add(&self.d_moment(k)?.theta_mul(k)?.scale(&-Rational::one()))?;
            }
            Ok(out)
        } else {
            Ok(self.d_moment(j - 1)?.scale(&-Rational::half()))
        }
    }

    fn substitute_moments(&self, target: SymFlavor, sign: &Rational) -> FSym {
        let n = self.n;
        let mut out = FSym::zero(n, self.delta.clone(), target);
        for (m, c) in &self.terms {
            let base = SymMono::new(n, m.x, m.z, m.theta(n), OddSet::EMPTY);
            let mut acc = FSym::monomial(n, self.delta.clone(), target, base, c.clone());
            for k in m.moments(n).iter() {
                let mut factor = FSym::moment(n, k, self.delta.clone(), target).expect("index");
                let tz = SymMono::new(n, 0, 1, OddSet::single(k), OddSet::EMPTY);
                factor.add_term(tz, sign.clone());
                acc = acc.try_mul(&factor).expect("same shape");
            }
            out = out.try_add(&acc).expect("same shape");
        }
        out
    }

    /// `γᵢ = ηᵢ − θᵢζ`.
    pub fn to_canonical(&self) -> Result<FSym> {
        self.expect_flavor(SymFlavor::Contact)?;
        Ok(self.substitute_moments(SymFlavor::Canonical, &-Rational::one()))
    }

    /// `ηᵢ = γᵢ + θᵢζ`.
    pub fn to_contact(&self) -> Result<FSym> {
        self.expect_flavor(SymFlavor::Canonical)?;
        Ok(self.substitute_moments(SymFlavor::Contact, &Rational::one()))
    }

    /// `div = ∂x∂ζ + Σₖ ∂θₖ∂ηₖ` on canonical symbols.
    pub fn div_symbol(&self) -> Result<FSym> {
        self.expect_flavor(SymFlavor::Canonical)?;
        let mut out = self.d_zeta().d_x();
        for k in 1..=self.n {
            out = out.try_add(&self.d_moment(k)?.d_theta(k)?)?;
        }
        Ok(out)
    }
}

impl std::ops::Add for &FSym {
    type Output = FSym;
    fn add(self, rhs: &FSym) -> FSym {
        self.try_add(rhs).expect("adding incompatible symbols")
    }
}

impl std::ops::Sub for &FSym {
    type Output = FSym;
    fn sub(self, rhs: &FSym) -> FSym {
        self.try_add(&rhs.scale(&-Rational::one()))
            .expect("subtracting incompatible symbols")
    }
}

impl std::ops::Neg for &FSym {
    type Output = FSym;
    fn neg(self) -> FSym {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for FSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let letter = self.flavor.moment_letter();
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            if let Some(p) = power_factor("x", m.x) {
                factors.push(p);
            }
            factors.extend(m.theta(self.n).iter().map(|i| format!("t{i}")));
            if let Some(p) = power_factor("z", m.z) {
                factors.push(p);
            }
            factors.extend(m.moments(self.n).iter().map(|i| format!("{letter}{i}")));
            write_term(&mut out, idx == 0, c, &factors);
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for FSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FSym[n={}, δ={}, {:?}]({})",
            self.n, self.delta, self.flavor, self
        )
    }
}

// ---------------------------------------------------------------------------
// actions

fn hamiltonian_parts(f: &SuperPoly) -> [SuperPoly; 2] {
    let (e, o) = f.split_parity();
    [e, o]
}

/// Closed-form fine action
/// `f∂x + f′(δ − ζ∂ζ) − ½(−1)^{p(f)} Σ D̄ᵢ(f)D̄ᵢ + ½ Σ D̄ⱼD̄ₖ(f) γₖ∂γⱼ`.
pub fn act_fine(f: &SuperPoly, s: &FSym) -> Result<FSym> {
    s.expect_flavor(SymFlavor::Contact)?;
    let mut out = s.empty_like();
    for part in hamiltonian_parts(f) {
        if part.is_zero() {
            continue;
        }
        out = out.try_add(&act_fine_homogeneous(&part, s)?)?;
    }
    Ok(out)
}

fn act_fine_homogeneous(f: &SuperPoly, s: &FSym) -> Result<FSym> {
    let n = s.n();
    let p = f.homogeneous_parity("contact Hamiltonian")?;
    let fp = f.d_x();
    let mut out = s.d_x().mul_poly(f);
    let euler = s
        .scale(s.delta())
        .try_add(&s.zeta_euler().scale(&-Rational::one()))?;
    out = out.try_add(&euler.mul_poly(&fp))?;
    let half = if p.is_odd() {
        Rational::half()
    } else {
        -Rational::half()
    };
    for i in 1..=n {
        out = out.try_add(&s.dbar(i)?.mul_poly(&f.dbar(i)?).scale(&half))?;
    }
    for j in 1..=n {
        let dj = s.d_moment(j)?;
        for k in 1..=n {
            let djk = f.dbar(k)?.dbar(j)?;
            if djk.is_zero() {
                continue;
            }
            out = out.try_add(&dj.moment_mul(k)?.mul_poly(&djk).scale(&Rational::half()))?;
        }
    }
    Ok(out)
}

/// Closed-form classical action: the fine action plus
/// `½(−1)^{p(f)} Σ D̄ᵢ(f′)γᵢ∂ζ`.
pub fn act_classical(f: &SuperPoly, s: &FSym) -> Result<FSym> {
    let mut out = act_fine(f, s)?;
    for part in hamiltonian_parts(f) {
        if part.is_zero() {
            continue;
        }
        let p = part.homogeneous_parity("contact Hamiltonian")?;
        let half = if p.is_odd() {
            -Rational::half()
        } else {
            Rational::half()
        };
        let dz = s.d_zeta();
        let fp = part.d_x();
        for i in 1..=s.n() {
            let c = fp.dbar(i)?;
            if c.is_zero() {
                continue;
            }
            out = out.try_add(&dz.moment_mul(i)?.mul_poly(&c).scale(&half))?;
        }
    }
    Ok(out)
}

fn lift_act(f: &SuperPoly, s: &FSym, lambda: &Rational) -> Result<DiffOp> {
    let d = DiffOp::lift(s, lambda)?;
    let mut out = DiffOp::zero(s.n(), lambda.clone(), lambda + s.delta());
    for part in hamiltonian_parts(f) {
        if part.is_zero() || d.is_zero() {
            continue;
        }
        out = out.try_add(&lie_derivative_any(&part, &d)?)?;
    }
    Ok(out)
}

/// Fine action computed through operators: lift at weight `λ`, take the Lie
/// derivative, project back to each stratum of `s`.
pub fn act_fine_definitional(f: &SuperPoly, s: &FSym, lambda: &Rational) -> Result<FSym> {
    s.expect_flavor(SymFlavor::Contact)?;
    let mut out = s.empty_like();
    for (at, part) in s.by_bigrade() {
        let l = lift_act(f, &part, lambda)?;
        out = out.try_add(&l.fine_symbol(at)?)?;
    }
    Ok(out)
}

/// Action on Heisenberg symbols, defined through operators at each level
/// `d` present in `s`.
pub fn act_heisenberg(f: &SuperPoly, s: &FSym, lambda: &Rational) -> Result<FSym> {
    s.expect_flavor(SymFlavor::Contact)?;
    let mut out = s.empty_like();
    for (d, part) in s.by_heisenberg() {
        let l = lift_act(f, &part, lambda)?;
        out = out.try_add(&l.h_symbol(d)?)?;
    }
    Ok(out)
}

/// Action on principal symbols, defined through operators at each order `k`
/// present in `s`.
pub fn act_classical_definitional(f: &SuperPoly, s: &FSym, lambda: &Rational) -> Result<FSym> {
    s.expect_flavor(SymFlavor::Contact)?;
    let mut out = s.empty_like();
    for (k, part) in s.by_degree() {
        let l = lift_act(f, &part, lambda)?;
        out = out.try_add(&l.order_symbol(k)?)?;
    }
    Ok(out)
}

/// `ζ^c η^J ↦ ∂x^c ∂θ^J` with left coefficients, returned in `D̄` normal form.
pub fn q_aff(s: &FSym, lambda: &Rational) -> Result<DiffOp> {
    s.expect_flavor(SymFlavor::Canonical)?;
    let n = s.n();
    let mut op = CanonicalOp::zero(n, lambda.clone(), lambda + s.delta());
    for (m, c) in s.terms() {
        op.add_term(
            m.z,
            m.moments(n),
            SuperPoly::monomial(n, m.x, m.theta(n), c.clone()),
        );
    }
    Ok(op.to_contact_basis())
}

/// Total symbol in canonical moments; inverse of [`q_aff`].
pub fn sigma_aff(d: &DiffOp) -> FSym {
    let n = d.n();
    let c = d.to_canonical_basis();
    let mut s = FSym::zero(n, d.delta(), SymFlavor::Canonical);
    for (z, j, a) in c.terms() {
        for (m, v) in a.terms() {
            s.add_term(SymMono::new(n, m.x, z, m.odd, j), v.clone());
        }
    }
    s
}

/// `σ_Aff ∘ 𝓛_{X_f} ∘ Q_Aff` on canonical symbols.
pub fn act_conjugated(f: &SuperPoly, s: &FSym, lambda: &Rational) -> Result<FSym> {
    s.expect_flavor(SymFlavor::Canonical)?;
    let d = q_aff(s, lambda)?;
    let mut out = DiffOp::zero(s.n(), lambda.clone(), lambda + s.delta());
    for part in hamiltonian_parts(f) {
        if part.is_zero() || d.is_zero() {
            continue;
        }
        out = out.try_add(&lie_derivative_any(&part, &d)?)?;
    }
    Ok(sigma_aff(&out))
}

/// The part of the conjugated action of strictly lower degree than the input
/// in each degree component.
pub fn gamma_map(f: &SuperPoly, lambda: &Rational, s: &FSym) -> Result<FSym> {
    s.expect_flavor(SymFlavor::Canonical)?;
    let mut out = s.empty_like();
    for (k, part) in s.by_degree() {
        let full = act_conjugated(f, &part, lambda)?;
        for (k2, piece) in full.by_degree() {
            if k2 < k {
                out = out.try_add(&piece)?;
            }
        }
    }
    Ok(out)
}

/// Symbol action in canonical moments: the degree-preserving part of the
/// conjugated action.
pub fn act_symbol_canonical(f: &SuperPoly, lambda: &Rational, s: &FSym) -> Result<FSym> {
    s.expect_flavor(SymFlavor::Canonical)?;
    let mut out = s.empty_like();
    for (k, part) in s.by_degree() {
        let full = act_conjugated(f, &part, lambda)?;
        if let Some(top) = full.by_degree().remove(&k) {
            out = out.try_add(&top)?;
        }
    }
    Ok(out)
}

/// Every monomial `x^a θ^I ζ^c m^K` of stratum `at` with `a ≤ x_max`.
pub fn basis_symbols(n: usize, delta: &Rational, at: Bigrade, x_max: u32) -> Vec<FSym> {
    let z = at.zeta_degree();
    let j = at.moment_degree();
    let mut out = Vec::new();
    for a in 0..=x_max {
        for theta in 0..(1u64 << n) {
            for moments in 0..(1u64 << n) {
                if moments.count_ones() != j {
                    continue;
                }
                let m = SymMono::new(
                    n,
                    a,
                    z,
                    OddSet::from_bits(theta),
                    OddSet::from_bits(moments),
                );
                out.push(FSym::monomial(
                    n,
                    delta.clone(),
                    SymFlavor::Contact,
                    m,
                    Rational::one(),
                ));
            }
        }
    }
    out
}
