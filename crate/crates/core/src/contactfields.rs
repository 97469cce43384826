//! Contact vector fields on S^{1|n}.
//!
//! A superfunction `f` generates the contact field
//! `X_f = f∂x − (−1)^{p(f)} ½ Σ D̄ᵢ(f) D̄ᵢ`, and the Lagrange bracket on
//! Hamiltonians mirrors the commutator of fields. Two density module
//! structures live here: contact densities `g α^λ` (acted on by
//! [`density_action`]) and Berezinian densities `g |Dx|^λ` (acted on by
//! [`ber_action`]), related by [`phi_iso`] whenever n ≠ 2.

use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::superring::{OddSet, Parity, SuperPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightFlavor {
    Contact,
    Berezinian,
}

/// An exact density weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weight {
    pub value: Rational,
    pub flavor: WeightFlavor,
}

impl Weight {
    pub fn contact(value: Rational) -> Self {
        Weight {
            value,
            flavor: WeightFlavor::Contact,
        }
    }

    pub fn berezinian(value: Rational) -> Self {
        Weight {
            value,
            flavor: WeightFlavor::Berezinian,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flavor {
            WeightFlavor::Contact => write!(f, "{} (contact)", self.value),
            WeightFlavor::Berezinian => write!(f, "{} (berezinian)", self.value),
        }
    }
}

/// Superdimension `m = 1 − n` of S^{1|n}.
pub fn superdimension(n: usize) -> i64 {
    1 - n as i64
}

/// A vector field `f∂x + Σ gⁱ∂θᵢ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VField {
    pub f: SuperPoly,
    pub g: Vec<SuperPoly>,
}

impl VField {
    pub fn new(f: SuperPoly, g: Vec<SuperPoly>) -> Result<Self> {
        if g.len() != f.n() {
            return Err(Error::Dimension {
                left: f.n(),
                right: g.len(),
            });
        }
        for gi in &g {
            if gi.n() != f.n() {
                return Err(Error::Dimension {
                    left: f.n(),
                    right: gi.n(),
                });
            }
        }
        Ok(VField { f, g })
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    /// `∂x`.
    pub fn d_x(n: usize) -> Self {
        VField {
            f: SuperPoly::one(n),
            g: vec![SuperPoly::zero(n); n],
        }
    }

    /// Parity of the field: `p(f)`, which must agree with `p(gⁱ) + 1`.
    pub fn parity(&self) -> Option<Parity> {
        let mut found: Option<Parity> = None;
        let mut merge = |p: Parity, is_zero: bool| -> bool {
            if is_zero {
                return true;
            }
            match found {
                None => {
                    found = Some(p);
                    true
                }
                Some(q) => q == p,
            }
        };
        let ok_f = match self.f.parity() {
            Some(p) => merge(p, self.f.is_zero()),
            None => false,
        };
        if !ok_f {
            return None;
        }
        for gi in &self.g {
            {
                let p = gi.parity()?;
                if !merge(p.plus(Parity::Odd), gi.is_zero()) {
                    return None;
                }
            }
        }
        Some(found.unwrap_or(Parity::Even))
    }

    /// `X(h) = f ∂x h + Σ gⁱ ∂θᵢ h`.
    pub fn apply(&self, h: &SuperPoly) -> Result<SuperPoly> {
        let mut out = self.f.try_mul(&h.d_x())?;
        for (i, gi) in self.g.iter().enumerate() {
            if gi.is_zero() {
                continue;
            }
            out = out + gi * &h.d_theta_at(i + 1);
        }
        Ok(out)
    }

    /// `div X = f′ + Σ (−1)^{p(gⁱ)} ∂θᵢ gⁱ`.
    pub fn div(&self) -> Result<SuperPoly> {
        self.parity().ok_or(Error::MixedParity("vector field"))?;
        let mut out = self.f.d_x();
        for (i, gi) in self.g.iter().enumerate() {
            let d = gi.d_theta_at(i + 1);
            out = match gi.parity() {
                Some(Parity::Odd) => out - d,
                _ => out + d,
            };
        }
        Ok(out)
    }
}

/// The contact field `X_f` of a parity-homogeneous Hamiltonian.
pub fn hamiltonian_field(f: &SuperPoly) -> Result<VField> {
    let p = f.homogeneous_parity("contact Hamiltonian")?;
    let n = f.n();
    // −(−1)^p ½
    let s = if p.is_odd() {
        Rational::half()
    } else {
        -Rational::half()
    };
    let mut fx = f.clone();
    let mut g = Vec::with_capacity(n);
    for i in 1..=n {
        let di = f.dbar_at(i).scale(&s);
        // s·D̄ᵢ(f)·(∂θᵢ − θᵢ∂x)
        fx = fx - &di * &SuperPoly::theta(n, i)?;
        g.push(di);
    }
    Ok(VField { f: fx, g })
}

/// Lagrange bracket `{f, g} = fg′ − f′g − (−1)^{p(f)} ½ Σ D̄ᵢ(f) D̄ᵢ(g)`.
pub fn lagrange(f: &SuperPoly, g: &SuperPoly) -> Result<SuperPoly> {
    let p = f.homogeneous_parity("bracket argument")?;
    let mut out = f.try_mul(&g.d_x())? - &f.d_x() * g;
    let s = if p.is_odd() {
        Rational::half()
    } else {
        -Rational::half()
    };
    for i in 1..=f.n() {
        out = out + (&f.dbar_at(i) * &g.dbar_at(i)).scale(&s);
    }
    Ok(out)
}

fn expect_flavor(w: &Weight, flavor: WeightFlavor) -> Result<()> {
    if w.flavor != flavor {
        return Err(Error::Flavor {
            expected: match flavor {
                WeightFlavor::Contact => "contact weight",
                WeightFlavor::Berezinian => "berezinian weight",
            },
        });
    }
    Ok(())
}

/// `L^λ_{X_f}(g) = X_f(g) + λ f′ g` on contact λ-densities.
pub fn density_action(f: &SuperPoly, lambda: &Weight, g: &SuperPoly) -> Result<SuperPoly> {
    expect_flavor(lambda, WeightFlavor::Contact)?;
    let x = hamiltonian_field(f)?;
    Ok(x.apply(g)? + (&f.d_x() * g).scale(&lambda.value))
}

/// `𝕃^λ_X(g) = X(g) + λ div(X) g` on Berezinian λ-densities.
pub fn ber_action(x: &VField, lambda: &Weight, g: &SuperPoly) -> Result<SuperPoly> {
    expect_flavor(lambda, WeightFlavor::Berezinian)?;
    let div = x.div()?;
    Ok(x.apply(g)? + (&div * g).scale(&lambda.value))
}

/// `g α^λ ↦ g |Dx|^{2λ/(m+1)}`, an isomorphism of contact modules for n ≠ 2.
pub fn phi_iso(g: &SuperPoly, lambda: &Weight) -> Result<(SuperPoly, Weight)> {
    expect_flavor(lambda, WeightFlavor::Contact)?;
    let m1 = superdimension(g.n()) + 1;
    if m1 == 0 {
        return Err(Error::SuperDimension);
    }
    let w = &lambda.value * Rational::from_int(2) / Rational::from_int(m1);
    Ok((g.clone(), Weight::berezinian(w)))
}

/// One element of the spo(2|n) basis together with its K-dual: the Casimir
/// picks up `scalar · ρ(X_dual) ρ(X_hamiltonian)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpoElement {
    pub name: String,
    pub hamiltonian: SuperPoly,
    pub dual: SuperPoly,
    pub scalar: Rational,
}

/// Contact projective Hamiltonians `1, x, x², θᵢ, xθᵢ, θᵢθⱼ (i<j)` with the
/// dual pairing used by the Casimir operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpoBasis {
    pub n: usize,
    pub elements: Vec<SpoElement>,
}

impl SpoBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn hamiltonians(&self) -> impl Iterator<Item = &SuperPoly> {
        self.elements.iter().map(|e| &e.hamiltonian)
    }

    /// Affine part: `1, x, θᵢ, θᵢθⱼ`.
    pub fn affine(&self) -> impl Iterator<Item = &SpoElement> {
        self.elements
            .iter()
            .filter(|e| is_affine_hamiltonian(&e.hamiltonian))
    }
}

pub fn spo_basis(n: usize) -> Result<SpoBasis> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let one = SuperPoly::one(n);
    let x = SuperPoly::x(n);
    let x2 = SuperPoly::x_pow(n, 2);
    let h = Rational::half();
    let mut elements = vec![
        SpoElement {
            name: "1".into(),
            hamiltonian: one.clone(),
            dual: x2.clone(),
            scalar: -h.clone(),
        },
        SpoElement {
            name: "x".into(),
            hamiltonian: x.clone(),
            dual: x.clone(),
            scalar: Rational::one(),
        },
        SpoElement {
            name: "x^2".into(),
            hamiltonian: x2,
            dual: one,
            scalar: -h,
        },
    ];
    for i in 1..=n {
        elements.push(SpoElement {
            name: format!("t{i}"),
            hamiltonian: SuperPoly::theta(n, i)?,
            dual: &x * &SuperPoly::theta(n, i)?,
            scalar: -Rational::one(),
        });
    }
    for i in 1..=n {
        elements.push(SpoElement {
            name: format!("x*t{i}"),
            hamiltonian: &x * &SuperPoly::theta(n, i)?,
            dual: SuperPoly::theta(n, i)?,
            scalar: Rational::one(),
        });
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            let tt = SuperPoly::monomial(n, 0, OddSet::from_indices([i, j]), Rational::one());
            elements.push(SpoElement {
                name: format!("t{i}*t{j}"),
                hamiltonian: tt.clone(),
                dual: tt,
                scalar: Rational::one(),
            });
        }
    }
    Ok(SpoBasis { n, elements })
}

/// Whether `f` lies in the affine subalgebra spanned by `1, x, θᵢ, θᵢθⱼ`.
pub fn is_affine_hamiltonian(f: &SuperPoly) -> bool {
    f.terms().all(|(m, _)| 2 * m.x + m.odd.len() <= 2)
}
