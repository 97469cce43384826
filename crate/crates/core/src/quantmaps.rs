//! The SQ map, the projectively equivariant quantization `Q^sl`, their
//! composite, Casimir operators and critical weights.

use std::collections::BTreeSet;
use std::fmt;

use crate::contactfields::{spo_basis, superdimension, SpoBasis};
use crate::diffops::{lie_derivative_any, Bigrade, DiffOp, HalfInt};
use crate::error::{Error, Result};
use crate::finesymbols::{
    act_classical_definitional, act_fine_definitional, q_aff, FSym, SymFlavor,
};
use crate::rational::Rational;
use crate::superring::SuperPoly;

/// The three families of critical weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CriticalSet {
    /// denominators of the SQ map
    Sq,
    /// denominators of `C_{k,r}`
    Projective,
    /// collisions of Casimir eigenvalues
    Casimir,
}

impl CriticalSet {
    pub fn name(self) -> &'static str {
        match self {
            CriticalSet::Sq => "I_δ",
            CriticalSet::Projective => "C'",
            CriticalSet::Casimir => "C_crit",
        }
    }
}

/// Parameters that make one defining formula vanish at a given `δ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CriticalWitness {
    /// `δ = c − j/2`
    Sq { c: u32, j: u32 },
    /// `δ = (2k − i + m)/2`
    Projective { k: u32, i: u32 },
    /// `α_{k,d} = α_{k′,d′}`
    Casimir {
        k: u32,
        d: HalfInt,
        k2: u32,
        d2: HalfInt,
    },
}

impl CriticalWitness {
    pub fn set(&self) -> CriticalSet {
        match self {
            CriticalWitness::Sq { .. } => CriticalSet::Sq,
            CriticalWitness::Projective { .. } => CriticalSet::Projective,
            CriticalWitness::Casimir { .. } => CriticalSet::Casimir,
        }
    }

    /// The critical weight this witness produces.
    pub fn value(&self, m: i64) -> Rational {
        match *self {
            CriticalWitness::Sq { c, j } => Rational::new(2 * c as i64 - j as i64, 2),
            CriticalWitness::Projective { k, i } => Rational::new(2 * k as i64 - i as i64 + m, 2),
            CriticalWitness::Casimir { k, d, k2, d2 } => casimir_critical_value(k, d, k2, d2, m),
        }
    }
}

impl fmt::Display for CriticalWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalWitness::Sq { c, j } => write!(f, "I_δ witness c={c} j={j}"),
            CriticalWitness::Projective { k, i } => write!(f, "C' witness k={k} i={i}"),
            CriticalWitness::Casimir { k, d, k2, d2 } => {
                write!(f, "C_crit witness k={k} d={d} k'={k2} d'={d2}")
            }
        }
    }
}

/// Every family a weight belongs to, within enumeration bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalReport {
    pub delta: Rational,
    pub hits: Vec<CriticalWitness>,
}

impl CriticalReport {
    pub fn is_critical(&self) -> bool {
        !self.hits.is_empty()
    }
}

// ---------------------------------------------------------------------------
// SQ

/// `Σ_a Δ^a S / (2^a a! ∏_{j<a} (c − δ − j/2))` per stratum, `c = 2d − k`.
pub fn sq_map(s: &FSym) -> Result<FSym> {
    s.expect_contact()?;
    let delta = s.delta().clone();
    let mut out = FSym::zero(s.n(), delta.clone(), SymFlavor::Contact);
    for (at, part) in s.by_bigrade() {
        let c = at.zeta_degree();
        let mut coef = Rational::one();
        let mut power = part.clone();
        let mut a = 0u32;
        while !power.is_zero() {
            out = out.try_add(&power.scale(&coef))?;
            a += 1;
            power = power.delta_op()?;
            if power.is_zero() {
                break;
            }
            let j = a - 1;
            let den = Rational::from(c) - &delta - Rational::new(j as i64, 2);
            if den.is_zero() {
                return Err(Error::Critical(CriticalWitness::Sq { c, j }));
            }
            coef = coef / (Rational::from(2 * a) * den);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Q^sl

/// `∏_{j≤r}(2λ + k − j) / (r! ∏_{j≤r}(m + 2k − j − 2δ))`.
pub fn c_kr(k: u32, r: u32, lambda: &Rational, delta: &Rational, m: i64) -> Result<Rational> {
    let mut out = Rational::one();
    for j in 1..=r {
        let den = Rational::from(m + 2 * k as i64 - j as i64) - delta * Rational::from(2);
        if den.is_zero() {
            return Err(Error::Critical(CriticalWitness::Projective { k, i: j }));
        }
        let num = lambda * Rational::from(2) + Rational::from(k as i64 - j as i64);
        out = out * num / (den * Rational::from(j));
    }
    Ok(out)
}

/// `Σ_r C_{k,r} Q_Aff(div^r S)` on each degree component; contact input is
/// converted to canonical moments first.
pub fn q_sl(s: &FSym, lambda: &Rational) -> Result<DiffOp> {
    let s = match s.flavor() {
        SymFlavor::Contact => s.to_canonical()?,
        SymFlavor::Canonical => s.clone(),
    };
    let n = s.n();
    let m = superdimension(n);
    let delta = s.delta().clone();
    let mut out = DiffOp::zero(n, lambda.clone(), lambda + &delta);
    for (k, part) in s.by_degree() {
        let mut cur = part;
        let mut r = 0u32;
        while !cur.is_zero() {
            let c = c_kr(k, r, lambda, &delta, m)?;
            if !c.is_zero() {
                out = out.try_add(&q_aff(&cur.scale(&c), lambda)?)?;
            }
            r += 1;
            cur = cur.div_symbol()?;
        }
    }
    Ok(out)
}

/// `Q^sl ∘ SQ`, from contact Heisenberg symbols to operators `F_λ → F_{λ+δ}`.
pub fn quantize(s: &FSym, lambda: &Rational) -> Result<DiffOp> {
    s.expect_contact()?;
    q_sl(&sq_map(s)?, lambda)
}

// ---------------------------------------------------------------------------
// Casimir operators

/// Representation used by [`casimir_symbol`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolRep {
    /// fine symbols `Σ^{k,d}`
    Fine,
    /// principal symbols of order `k`
    Classical,
}

fn act_symbol(rep: SymbolRep, f: &SuperPoly, s: &FSym) -> Result<FSym> {
    // the symbol actions do not depend on the lift weight
    let lambda = Rational::zero();
    match rep {
        SymbolRep::Fine => act_fine_definitional(f, s, &lambda),
        SymbolRep::Classical => act_classical_definitional(f, s, &lambda),
    }
}

/// `Σ c ρ(u*)ρ(u)` over the dual pairs of the basis, on symbols.
pub fn casimir_symbol(rep: SymbolRep, basis: &SpoBasis, s: &FSym) -> Result<FSym> {
    let mut out = FSym::zero(s.n(), s.delta().clone(), SymFlavor::Contact);
    for e in &basis.elements {
        let inner = act_symbol(rep, &e.hamiltonian, s)?;
        let outer = act_symbol(rep, &e.dual, &inner)?;
        out = out.try_add(&outer.scale(&e.scalar))?;
    }
    Ok(out)
}

/// `Σ c 𝓛_{u*}𝓛_u` on operators.
pub fn casimir_operator(basis: &SpoBasis, d: &DiffOp) -> Result<DiffOp> {
    let mut out = DiffOp::zero(d.n(), d.lambda().clone(), d.mu().clone());
    for e in &basis.elements {
        let inner = lie_derivative_any(&e.hamiltonian, d)?;
        let outer = lie_derivative_any(&e.dual, &inner)?;
        out = out.try_add(&outer.scale(&e.scalar))?;
    }
    Ok(out)
}

/// Eigenvalue of the fine-symbol Casimir on `Σ^{k,d}_δ`.
pub fn alpha(k: u32, d: HalfInt, m: i64, delta: &Rational) -> Rational {
    let k = Rational::from(k);
    let d = d.to_rational();
    let m = Rational::from(m);
    let two = Rational::from(2);
    let half = Rational::half();
    &k * &k
        + &two * (&d * &d - &k * &d)
        + (&k - &d) * (&m - &two * delta)
        + &half * (&two * &d - &k) * (&m + Rational::one() - Rational::from(4) * delta)
        + &half * delta * (&two * delta - &m - Rational::one())
}

/// `((2λ + k − 1)/2)(2 Div_C + Div_T)` on a symbol of degree `k`.
pub fn n_sd(s: &FSym, lambda: &Rational) -> Result<FSym> {
    s.expect_contact()?;
    let mut out = FSym::zero(s.n(), s.delta().clone(), SymFlavor::Contact);
    for (k, part) in s.by_degree() {
        let factor = (lambda * Rational::from(2) + Rational::from(k as i64 - 1)) * Rational::half();
        let div = part
            .div_c()?
            .scale(&Rational::from(2))
            .try_add(&part.div_t()?)?;
        out = out.try_add(&div.scale(&factor))?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// critical weights

/// `P(k,k′,d,d′)/(4(d − d′))`.
pub fn casimir_critical_value(k: u32, d: HalfInt, k2: u32, d2: HalfInt, m: i64) -> Rational {
    let (k, k2) = (Rational::from(k), Rational::from(k2));
    let (d, d2) = (d.to_rational(), d2.to_rational());
    let m = Rational::from(m);
    let four = Rational::from(4);
    let p = (&k - &k2) * (Rational::from(2) * (&k + &k2) + &m - Rational::one())
        - &four * (&k * &d - &k2 * &d2)
        + Rational::from(2) * (&d - &d2) * (Rational::from(2) * (&d + &d2) + Rational::one());
    p / (four * (d - d2))
}

/// Every admissible `(c, j)` of the SQ family up to Heisenberg order `d_max`:
/// `0 ≤ c ≤ d`, `0 ≤ j ≤ 2d − 1`.
pub fn sq_witnesses(d_max: HalfInt) -> Vec<CriticalWitness> {
    let mut seen = BTreeSet::new();
    for d in d_max.up_to() {
        for c in 0..=d.floor() {
            for j in 0..d.halves() {
                seen.insert(CriticalWitness::Sq { c, j });
            }
        }
    }
    seen.into_iter().collect()
}

/// Every `(k, i)` with `1 ≤ i ≤ k ≤ k_max`.
pub fn projective_witnesses(k_max: u32) -> Vec<CriticalWitness> {
    (1..=k_max)
        .flat_map(|k| (1..=k).map(move |i| CriticalWitness::Projective { k, i }))
        .collect()
}

/// Every stratum pair `d′ < d` within the bounds.
pub fn casimir_witnesses(k_max: u32, d_max: HalfInt) -> Vec<CriticalWitness> {
    let strata: Vec<Bigrade> = Bigrade::all_up_to(d_max)
        .into_iter()
        .filter(|b| b.k <= k_max)
        .collect();
    let mut out = Vec::new();
    for hi in &strata {
        for lo in &strata {
            if lo.d < hi.d {
                out.push(CriticalWitness::Casimir {
                    k: hi.k,
                    d: hi.d,
                    k2: lo.k,
                    d2: lo.d,
                });
            }
        }
    }
    out
}

/// All witnesses within the bounds that produce `δ`.
pub fn critical_report(delta: &Rational, n: usize, k_max: u32, d_max: HalfInt) -> CriticalReport {
    let m = superdimension(n);
    let hits = sq_witnesses(d_max)
        .into_iter()
        .chain(projective_witnesses(k_max))
        .chain(casimir_witnesses(k_max, d_max))
        .filter(|w| &w.value(m) == delta)
        .collect();
    CriticalReport {
        delta: delta.clone(),
        hits,
    }
}

// ---------------------------------------------------------------------------
// uniqueness construction

/// Builds the Casimir eigenvector with Heisenberg symbol `s` by correcting the
/// lift stratum by stratum, highest `k + d` first.
pub fn quantize_via_casimir(s: &FSym, lambda: &Rational) -> Result<DiffOp> {
    s.expect_contact()?;
    let n = s.n();
    let m = superdimension(n);
    let basis = spo_basis(n)?;
    let delta = s.delta().clone();
    let mut total = DiffOp::zero(n, lambda.clone(), lambda + &delta);
    for (top, part) in s.by_bigrade() {
        let a = alpha(top.k, top.d, m, &delta);
        let mut d = DiffOp::lift(&part, lambda)?;
        loop {
            let r = casimir_operator(&basis, &d)?.try_add(&d.scale(&-a.clone()))?;
            if r.is_zero() {
                break;
            }
            let (at, piece) = highest_stratum(&r);
            let gap = &a - alpha(at.k, at.d, m, &delta);
            let inv = gap
                .recip()
                .ok_or(Error::Critical(CriticalWitness::Casimir {
                    k: top.k,
                    d: top.d,
                    k2: at.k,
                    d2: at.d,
                }))?;
            d = d.try_add(&DiffOp::lift(&piece, lambda)?.scale(&inv))?;
        }
        total = total.try_add(&d)?;
    }
    Ok(total)
}

fn highest_stratum(d: &DiffOp) -> (Bigrade, FSym) {
    let at = d
        .terms()
        .map(|(c, k, _)| Bigrade::of_word(c, k.len()))
        .max_by_key(|b| (b.k * 2 + b.d.halves(), b.d))
        .expect("nonzero operator");
    (at, d.stratum(at))
}

impl FSym {
    pub(crate) fn expect_contact(&self) -> Result<()> {
        if self.flavor() == SymFlavor::Contact {
            Ok(())
        } else {
            Err(Error::Flavor {
                expected: "contact symbol",
            })
        }
    }
}
