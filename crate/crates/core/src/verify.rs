//! Executable identity checks.
//!
//! Each check sweeps a finite family of cases and stops at the first
//! counterexample, rendering both sides. Checks run in parallel; results come
//! back in a fixed order.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::contactfields::{
    ber_action, density_action, hamiltonian_field, lagrange, phi_iso, spo_basis, superdimension,
    SpoBasis, Weight,
};
use crate::diffops::{lie_derivative_any, Bigrade, DiffOp, HalfInt};
use crate::error::{Error, Result};
use crate::finesymbols::{
    act_classical, act_classical_definitional, act_fine, act_fine_definitional, act_heisenberg,
    act_symbol_canonical, basis_symbols, gamma_map, q_aff, sigma_aff, FSym, SymFlavor,
};
use crate::quantmaps::{
    alpha, casimir_operator, casimir_symbol, critical_report, n_sd, quantize, quantize_via_casimir,
    sq_map, SymbolRep,
};
use crate::rational::Rational;
use crate::superring::{OddSet, SuperPoly};

/// Groups of checks selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Actions,
    Lemmas,
    Casimir,
    Quantization,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// Parameters shared by every check.
#[derive(Clone, Debug)]
pub struct Config {
    pub n: usize,
    pub lambda: Rational,
    pub mu: Rational,
    /// largest Heisenberg order swept
    pub d_max: HalfInt,
    /// largest power of `x` in swept coefficients
    pub x_max: u32,
}

impl Config {
    pub fn delta(&self) -> Rational {
        &self.mu - &self.lambda
    }

    pub fn m(&self) -> i64 {
        superdimension(self.n)
    }
}

/// Outcome of one identity.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    /// `None` when every case held; otherwise the first counterexample.
    pub failure: Option<String>,
    /// Informational checks never fail a run.
    pub informational: bool,
    /// Time spent sweeping the cases.
    pub elapsed: Duration,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (&self.failure, self.informational) {
            (None, _) => "PASS",
            (Some(_), true) => "NOTE",
            (Some(_), false) => "FAIL",
        };
        write!(f, "{tag} {} ({} cases)", self.name, self.cases)?;
        if let Some(why) = &self.failure {
            write!(f, "\n     {why}")?;
        }
        Ok(())
    }
}

type CaseFn<'a, T> = dyn Fn(&T) -> Result<Option<String>> + Sync + 'a;

fn sweep<T: Sync>(name: &str, cases: &[T], f: &CaseFn<'_, T>) -> Check {
    let start = Instant::now();
    let mut failure = None;
    for case in cases {
        match f(case) {
            Ok(None) => {}
            Ok(Some(msg)) => {
                failure = Some(msg);
                break;
            }
            Err(e) => {
                failure = Some(format!("error: {e}"));
                break;
            }
        }
    }
    Check {
        name: name.to_string(),
        cases: cases.len(),
        failure,
        informational: false,
        elapsed: start.elapsed(),
    }
}

fn differ<T: PartialEq + fmt::Display>(
    label: impl FnOnce() -> String,
    lhs: &T,
    rhs: &T,
) -> Option<String> {
    if lhs == rhs {
        None
    } else {
        Some(format!("{}: lhs = {lhs}; rhs = {rhs}", label()))
    }
}

/// All contact basis monomials `x^a θ^I ζ^c γ^K` with `d ≤ d_max`, `a ≤ x_max`.
pub fn symbol_sweep(n: usize, delta: &Rational, d_max: HalfInt, x_max: u32) -> Vec<FSym> {
    Bigrade::all_up_to(d_max)
        .into_iter()
        .flat_map(|b| basis_symbols(n, delta, b, x_max))
        .collect()
}

/// Superfunction monomials with `x`-degree at most `x_max`.
pub fn poly_sweep(n: usize, x_max: u32) -> Vec<SuperPoly> {
    let mut out = Vec::new();
    for a in 0..=x_max {
        for bits in 0..(1u64 << n) {
            out.push(SuperPoly::monomial(
                n,
                a,
                OddSet::from_bits(bits),
                Rational::one(),
            ));
        }
    }
    out
}

fn pairs(basis: &SpoBasis) -> Vec<(SuperPoly, SuperPoly)> {
    let hs: Vec<SuperPoly> = basis.hamiltonians().cloned().collect();
    let mut out = Vec::new();
    for f in &hs {
        for g in &hs {
            out.push((f.clone(), g.clone()));
        }
    }
    out
}

/// Supercommutator `A∘B − (−1)^{p(A)p(B)} B∘A` of homogeneous operators.
fn supercommutator(a: &DiffOp, b: &DiffOp) -> Result<DiffOp> {
    let pa = a.parity().ok_or(Error::MixedParity("operator"))?;
    let pb = b.parity().ok_or(Error::MixedParity("operator"))?;
    let ab = a.compose(b)?;
    let ba = b.compose(a)?;
    let ba = if pa.koszul(pb) {
        ba
    } else {
        ba.scale(&-Rational::one())
    };
    ab.try_add(&ba)
}

/// `(−1)^{p(f)p(g)}`.
fn koszul(f: &SuperPoly, g: &SuperPoly) -> Rational {
    let odd = f.parity().is_some_and(|p| p.is_odd()) && g.parity().is_some_and(|p| p.is_odd());
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

// ---------------------------------------------------------------------------

/// Runs every check of `suite`.
pub fn run(suite: Suite, cfg: &Config) -> Result<Vec<Check>> {
    if cfg.n == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut jobs: Vec<Box<dyn Fn() -> Check + Sync + '_>> = Vec::new();
    if suite.includes(Suite::Actions) {
        action_checks(cfg, &mut jobs)?;
    }
    if suite.includes(Suite::Lemmas) {
        lemma_checks(cfg, &mut jobs)?;
    }
    if suite.includes(Suite::Casimir) {
        casimir_checks(cfg, &mut jobs)?;
    }
    if suite.includes(Suite::Quantization) {
        let report = critical_report(&cfg.delta(), cfg.n, 2 * cfg.d_max.ceil(), cfg.d_max);
        if let Some(w) = report.hits.first() {
            return Err(Error::Critical(w.clone()));
        }
        quantization_checks(cfg, &mut jobs)?;
    }
    Ok(jobs.par_iter().map(|job| job()).collect())
}

type Jobs<'a> = Vec<Box<dyn Fn() -> Check + Sync + 'a>>;

fn action_checks<'a>(cfg: &'a Config, jobs: &mut Jobs<'a>) -> Result<()> {
    let n = cfg.n;
    let basis = spo_basis(n)?;
    let delta = cfg.delta();
    let syms = symbol_sweep(n, &delta, cfg.d_max, cfg.x_max);
    let polys = poly_sweep(n, 2);
    let fs: Vec<SuperPoly> = basis.hamiltonians().cloned().collect();
    let pairs = pairs(&basis);

    let hs = fs.clone();
    jobs.push(Box::new(move || {
        let len = hs.len();
        let triples: Vec<(usize, usize, usize)> = (0..len)
            .flat_map(|i| (0..len).flat_map(move |j| (0..len).map(move |k| (i, j, k))))
            .collect();
        sweep(
            "lagrange bracket: super Jacobi identity",
            &triples,
            &|&(i, j, k)| {
                let (f, g, h) = (&hs[i], &hs[j], &hs[k]);
                let lhs = lagrange(f, &lagrange(g, h)?)?;
                let fg = lagrange(&lagrange(f, g)?, h)?;
                let gfh = lagrange(g, &lagrange(f, h)?)?;
                let rhs = &fg + &gfh.scale(&koszul(f, g));
                Ok(differ(|| format!("f = {f}, g = {g}, h = {h}"), &lhs, &rhs))
            },
        )
    }));

    let p = pairs.clone();
    let lam = cfg.lambda.clone();
    jobs.push(Box::new(move || {
        sweep("density action is a homomorphism", &p, &|(f, g)| {
            let lf = DiffOp::density_action_op(f, &lam)?;
            let lg = DiffOp::density_action_op(g, &lam)?;
            let lhs = supercommutator(&lf, &lg)?;
            let rhs = DiffOp::density_action_op(&lagrange(f, g)?, &lam)?;
            Ok(differ(|| format!("f = {f}, g = {g}"), &lhs, &rhs))
        })
    }));

    let cases: Vec<(SuperPoly, usize)> = fs
        .iter()
        .flat_map(|f| (1..=n).map(move |m| (f.clone(), m)))
        .collect();
    jobs.push(Box::new(move || {
        sweep(
            "contact condition [X_f, Dm] = 1/2 sum DmDi(f) Di",
            &cases,
            &|(f, m)| {
                let zero = Rational::zero();
                let xf = DiffOp::density_action_op(f, &zero)?;
                let dm = DiffOp::dbar(n, *m, zero.clone(), zero.clone())?;
                let lhs = supercommutator(&xf, &dm)?;
                let mut rhs = DiffOp::zero(n, zero.clone(), zero.clone());
                for i in 1..=n {
                    let c = f.dbar(i)?.dbar(*m)?.scale(&Rational::half());
                    rhs = rhs.try_add(&DiffOp::term(
                        n,
                        zero.clone(),
                        zero.clone(),
                        0,
                        OddSet::single(i),
                        c,
                    ))?;
                }
                Ok(differ(|| format!("f = {f}, m = {m}"), &lhs, &rhs))
            },
        )
    }));

    if n != 2 {
        let cases: Vec<(SuperPoly, SuperPoly)> = fs
            .iter()
            .flat_map(|f| polys.iter().map(move |g| (f.clone(), g.clone())))
            .collect();
        let lam = cfg.lambda.clone();
        jobs.push(Box::new(move || {
            sweep(
                "density isomorphism intertwines the actions",
                &cases,
                &|(f, g)| {
                    let w = Weight::contact(lam.clone());
                    let (g2, wb) = phi_iso(g, &w)?;
                    let lhs = density_action(f, &w, g)?;
                    let rhs = ber_action(&hamiltonian_field(f)?, &wb, &g2)?;
                    Ok(differ(|| format!("f = {f}, g = {g}"), &lhs, &rhs))
                },
            )
        }));
    }

    let cases: Vec<(SuperPoly, FSym)> = fs
        .iter()
        .flat_map(|f| syms.iter().map(move |s| (f.clone(), s.clone())))
        .collect();
    let c1 = cases.clone();
    jobs.push(Box::new(move || {
        sweep(
            "fine action: closed form = operator definition",
            &c1,
            &|(f, s)| {
                let lhs = act_fine(f, s)?;
                let rhs = act_fine_definitional(f, s, &Rational::zero())?;
                Ok(differ(|| format!("f = {f}, S = {s}"), &lhs, &rhs))
            },
        )
    }));
    let c2 = cases.clone();
    let lam = cfg.lambda.clone();
    jobs.push(Box::new(move || {
        sweep(
            "fine action does not depend on the lift weight",
            &c2,
            &|(f, s)| {
                let lhs = act_fine_definitional(f, s, &Rational::zero())?;
                let rhs = act_fine_definitional(f, s, &lam)?;
                Ok(differ(|| format!("f = {f}, S = {s}"), &lhs, &rhs))
            },
        )
    }));
    let c3 = cases;
    jobs.push(Box::new(move || {
        sweep(
            "classical action: closed form = operator definition",
            &c3,
            &|(f, s)| {
                let lhs = act_classical(f, s)?;
                let rhs = act_classical_definitional(f, s, &Rational::zero())?;
                Ok(differ(|| format!("f = {f}, S = {s}"), &lhs, &rhs))
            },
        )
    }));

    let ops: Vec<DiffOp> = symbol_sweep(n, &delta, HalfInt::from_int(1), 1)
        .iter()
        .map(|s| DiffOp::lift(s, &cfg.lambda))
        .collect::<Result<_>>()?;
    let cases: Vec<(SuperPoly, SuperPoly, DiffOp)> = pairs
        .iter()
        .flat_map(|(f, g)| ops.iter().map(move |d| (f.clone(), g.clone(), d.clone())))
        .collect();
    jobs.push(Box::new(move || {
        sweep(
            "Lie derivative of operators is an action",
            &cases,
            &|(f, g, d)| {
                let fg = lie_derivative_any(f, &lie_derivative_any(g, d)?)?;
                let gf = lie_derivative_any(g, &lie_derivative_any(f, d)?)?;
                let lhs = fg.try_add(&gf.scale(&-koszul(f, g)))?;
                let rhs = lie_derivative_any(&lagrange(f, g)?, d)?;
                Ok(differ(|| format!("f = {f}, g = {g}, D = {d}"), &lhs, &rhs))
            },
        )
    }));
    Ok(())
}

fn lemma_checks<'a>(cfg: &'a Config, jobs: &mut Jobs<'a>) -> Result<()> {
    let n = cfg.n;
    let delta = cfg.delta();
    let syms = symbol_sweep(n, &delta, cfg.d_max, cfg.x_max);
    let basis = spo_basis(n)?;
    let x = SuperPoly::x(n);
    let x2 = SuperPoly::x_pow(n, 2);
    let th = |i: usize| SuperPoly::theta(n, i).expect("index");

    let thetas_gammas = {
        let mut t = FSym::zero(n, delta.clone(), SymFlavor::Contact);
        for l in 1..=n {
            t = &t + &FSym::moment(n, l, delta.clone(), SymFlavor::Contact)?.mul_poly(&th(l));
        }
        t
    };

    type SymOp = Box<dyn Fn(&FSym) -> Result<FSym> + Sync + Send>;
    let comm = |a: SymOp, b: SymOp| -> SymOp {
        Box::new(move |s: &FSym| {
            let ab = a(&b(s)?)?;
            let ba = b(&a(s)?)?;
            Ok(&ab - &ba)
        })
    };
    let delta_op: fn(&FSym) -> Result<FSym> = |s| s.delta_op();

    let mut identities: Vec<(String, SymOp, SymOp)> = Vec::new();
    identities.push((
        "[Delta, z dz] = Delta".into(),
        comm(Box::new(delta_op), Box::new(|s| Ok(s.zeta_euler()))),
        Box::new(delta_op),
    ));
    {
        let x1 = x.clone();
        let tg = thetas_gammas.clone();
        identities.push((
            "[Delta, x] = ti gi dz".into(),
            comm(Box::new(delta_op), Box::new(move |s| Ok(s.mul_poly(&x1)))),
            Box::new(move |s| tg.try_mul(&s.d_zeta())),
        ));
    }
    for e in basis.affine() {
        let f = e.hamiltonian.clone();
        identities.push((
            format!("[Delta, L_X({})] = 0", e.name),
            comm(Box::new(delta_op), Box::new(move |s| act_fine(&f, s))),
            Box::new(|s| Ok(s.scale(&Rational::zero()))),
        ));
    }
    for i in 1..=n {
        identities.push((
            format!("[Delta, g{i}] = 0"),
            comm(Box::new(delta_op), Box::new(move |s| s.moment_mul(i))),
            Box::new(|s| Ok(s.scale(&Rational::zero()))),
        ));
    }
    {
        let x2a = x2.clone();
        let x1 = x.clone();
        let tg = thetas_gammas.clone();
        identities.push((
            "[Delta, x^2] = 2x ti gi dz".into(),
            comm(Box::new(delta_op), Box::new(move |s| Ok(s.mul_poly(&x2a)))),
            Box::new(move |s| {
                Ok(tg
                    .try_mul(&s.d_zeta())?
                    .mul_poly(&x1)
                    .scale(&Rational::from(2)))
            }),
        ));
    }
    {
        let tg = thetas_gammas.clone();
        identities.push((
            "[Delta, tl gl] = 0".into(),
            comm(Box::new(delta_op), Box::new(move |s| tg.try_mul(s))),
            Box::new(|s| Ok(s.scale(&Rational::zero()))),
        ));
    }
    {
        let theta_dgamma = move |s: &FSym| -> Result<FSym> {
            let mut out = s.scale(&Rational::zero());
            for j in 1..=n {
                out = &out + &s.d_moment(j)?.theta_mul(j)?;
            }
            Ok(out)
        };
        identities.push((
            "[Delta, tj dgj] = gj dgj dz - ti Di dz".into(),
            comm(Box::new(delta_op), Box::new(theta_dgamma)),
            Box::new(move |s: &FSym| {
                let dz = s.d_zeta();
                let mut out = s.scale(&Rational::zero());
                for j in 1..=n {
                    out = &out + &dz.d_moment(j)?.moment_mul(j)?;
                    out = &out - &dz.dbar(j)?.theta_mul(j)?;
                }
                Ok(out)
            }),
        ));
    }
    for a in 1..=3u32 {
        let x2a = x2.clone();
        let lhs: SymOp = Box::new(move |s: &FSym| {
            let da = delta_power(s, a)?;
            let l1 = act_fine(&x2a, &da)?;
            let l2 = delta_power(&act_fine(&x2a, s)?, a)?;
            Ok(&l1 - &l2)
        });
        let tg = thetas_gammas.clone();
        let rhs: SymOp = Box::new(move |s: &FSym| {
            let shift = s.delta() + Rational::new(a as i64 - 1, 2);
            let inner = &s.zeta_euler() - &s.scale(&shift);
            let t = tg.try_mul(&inner.d_zeta())?;
            Ok(delta_power(&t, a - 1)?.scale(&Rational::from(2 * a)))
        });
        identities.push((format!("[L_X(x^2), Delta^{a}] formula"), lhs, rhs));
    }

    for (name, lhs, rhs) in identities {
        let syms = syms.clone();
        jobs.push(Box::new(move || {
            sweep(&name, &syms, &|s| {
                let l = lhs(s)?;
                let r = rhs(s)?;
                Ok(differ(|| format!("S = {s}"), &l, &r))
            })
        }));
    }

    let idx: Vec<usize> = (1..=n).collect();
    jobs.push(Box::new(move || {
        sweep("[X_(x^2), X_ti] = -X_(x ti)", &idx, &|&i| {
            let zero = Rational::zero();
            let a = DiffOp::density_action_op(&SuperPoly::x_pow(n, 2), &zero)?;
            let t = SuperPoly::theta(n, i)?;
            let b = DiffOp::density_action_op(&t, &zero)?;
            let lhs = supercommutator(&a, &b)?;
            let rhs = DiffOp::density_action_op(&-(&SuperPoly::x(n) * &t), &zero)?;
            Ok(differ(|| format!("i = {i}"), &lhs, &rhs))
        })
    }));

    let syms2 = syms.clone();
    jobs.push(Box::new(move || {
        let mut c = sweep(
            "x^2 action without the tj tk gk dgj term matches the operator definition",
            &syms2,
            &|s| {
                let lhs = truncated_x2_action(s)?;
                let rhs = act_fine_definitional(&SuperPoly::x_pow(n, 2), s, &Rational::zero())?;
                Ok(differ(|| format!("S = {s}"), &lhs, &rhs))
            },
        );
        c.informational = true;
        c
    }));
    Ok(())
}

fn delta_power(s: &FSym, a: u32) -> Result<FSym> {
    let mut out = s.clone();
    for _ in 0..a {
        out = out.delta_op()?;
    }
    Ok(out)
}

/// `x²∂x + 2x(δ − ζ∂ζ) + xθᵢD̄ᵢ − xγᵢ∂γᵢ`.
pub fn truncated_x2_action(s: &FSym) -> Result<FSym> {
    let n = s.n();
    let x = SuperPoly::x(n);
    let mut out = s.d_x().mul_poly(&SuperPoly::x_pow(n, 2));
    let euler = &s.scale(s.delta()) - &s.zeta_euler();
    out = &out + &euler.mul_poly(&x).scale(&Rational::from(2));
    for i in 1..=n {
        out = &out + &s.dbar(i)?.theta_mul(i)?.mul_poly(&x);
        out = &out - &s.d_moment(i)?.moment_mul(i)?.mul_poly(&x);
    }
    Ok(out)
}

fn casimir_checks<'a>(cfg: &'a Config, jobs: &mut Jobs<'a>) -> Result<()> {
    let n = cfg.n;
    let m = cfg.m();
    let delta = cfg.delta();
    let syms = symbol_sweep(n, &delta, cfg.d_max, cfg.x_max);
    let basis = spo_basis(n)?;
    let fs: Vec<SuperPoly> = basis.hamiltonians().cloned().collect();

    {
        let (b, syms, delta) = (basis.clone(), syms.clone(), delta.clone());
        jobs.push(Box::new(move || {
            sweep(
                "fine Casimir acts on each stratum by alpha(k, d)",
                &syms,
                &|s| {
                    let at = s.bigrade()?;
                    let lhs = casimir_symbol(SymbolRep::Fine, &b, s)?;
                    let rhs = s.scale(&alpha(at.k, at.d, m, &delta));
                    Ok(differ(|| format!("S = {s} in {at}"), &lhs, &rhs))
                },
            )
        }));
    }
    let cases: Vec<(SuperPoly, FSym)> = fs
        .iter()
        .flat_map(|f| syms.iter().map(move |s| (f.clone(), s.clone())))
        .collect();
    for rep in [SymbolRep::Fine, SymbolRep::Classical] {
        let (b, cases) = (basis.clone(), cases.clone());
        let name = match rep {
            SymbolRep::Fine => "fine Casimir commutes with the action",
            SymbolRep::Classical => "classical Casimir commutes with the action",
        };
        jobs.push(Box::new(move || {
            sweep(name, &cases, &|(f, s)| {
                let act = |t: &FSym| match rep {
                    SymbolRep::Fine => act_fine_definitional(f, t, &Rational::zero()),
                    SymbolRep::Classical => act_classical_definitional(f, t, &Rational::zero()),
                };
                let lhs = casimir_symbol(rep, &b, &act(s)?)?;
                let rhs = act(&casimir_symbol(rep, &b, s)?)?;
                Ok(differ(|| format!("f = {f}, S = {s}"), &lhs, &rhs))
            })
        }));
    }
    {
        let ops: Vec<DiffOp> = symbol_sweep(n, &delta, HalfInt::from_int(1), 1)
            .iter()
            .map(|s| DiffOp::lift(s, &cfg.lambda))
            .collect::<Result<_>>()?;
        let cases: Vec<(SuperPoly, DiffOp)> = fs
            .iter()
            .flat_map(|f| ops.iter().map(move |d| (f.clone(), d.clone())))
            .collect();
        let b = basis.clone();
        jobs.push(Box::new(move || {
            sweep(
                "operator Casimir commutes with the action",
                &cases,
                &|(f, d)| {
                    let lhs = casimir_operator(&b, &lie_derivative_any(f, d)?)?;
                    let rhs = lie_derivative_any(f, &casimir_operator(&b, d)?)?;
                    Ok(differ(|| format!("f = {f}, D = {d}"), &lhs, &rhs))
                },
            )
        }));
    }
    {
        let (b, syms) = (basis.clone(), syms.clone());
        jobs.push(Box::new(move || {
            sweep("classical Casimir = fine Casimir + Delta/2", &syms, &|s| {
                let lhs = casimir_symbol(SymbolRep::Classical, &b, s)?;
                let rhs = &casimir_symbol(SymbolRep::Fine, &b, s)?
                    + &s.delta_op()?.scale(&Rational::half());
                Ok(differ(|| format!("S = {s}"), &lhs, &rhs))
            })
        }));
    }
    {
        let (b, syms, lam) = (basis, syms, cfg.lambda.clone());
        jobs.push(Box::new(move || {
            sweep(
                "operator Casimir through Q_Aff = classical Casimir + N_SD",
                &syms,
                &|s| {
                    let op = q_aff(&s.to_canonical()?, &lam)?;
                    let lhs = sigma_aff(&casimir_operator(&b, &op)?).to_contact()?;
                    let rhs = &casimir_symbol(SymbolRep::Classical, &b, s)? + &n_sd(s, &lam)?;
                    Ok(differ(|| format!("S = {s}"), &lhs, &rhs))
                },
            )
        }));
    }
    Ok(())
}

fn quantization_checks<'a>(cfg: &'a Config, jobs: &mut Jobs<'a>) -> Result<()> {
    let n = cfg.n;
    let m = cfg.m();
    let delta = cfg.delta();
    let lam = cfg.lambda.clone();
    let syms = symbol_sweep(n, &delta, cfg.d_max, cfg.x_max);
    let basis = spo_basis(n)?;
    let fs: Vec<SuperPoly> = basis.hamiltonians().cloned().collect();
    let cases: Vec<(SuperPoly, FSym)> = fs
        .iter()
        .flat_map(|f| syms.iter().map(move |s| (f.clone(), s.clone())))
        .collect();

    {
        let (cases, lam) = (cases.clone(), lam.clone());
        jobs.push(Box::new(move || {
            sweep(
                "SQ intertwines the Heisenberg and classical actions",
                &cases,
                &|(f, s)| {
                    let lhs = act_classical_definitional(f, &sq_map(s)?, &lam)?;
                    let rhs = sq_map(&act_heisenberg(f, s, &lam)?)?;
                    Ok(differ(|| format!("f = {f}, S = {s}"), &lhs, &rhs))
                },
            )
        }));
    }
    {
        let (cases, lam) = (cases.clone(), lam.clone());
        jobs.push(Box::new(move || {
            sweep("quantization is equivariant", &cases, &|(f, s)| {
                let lhs = lie_derivative_any(f, &quantize(s, &lam)?)?;
                let rhs = quantize(&act_heisenberg(f, s, &lam)?, &lam)?;
                Ok(differ(|| format!("f = {f}, S = {s}"), &lhs, &rhs))
            })
        }));
    }
    {
        let (syms, lam) = (syms.clone(), lam.clone());
        jobs.push(Box::new(move || {
            sweep(
                "Heisenberg symbol of the quantization is the identity",
                &syms,
                &|s| {
                    let d = s.bigrade()?.d;
                    let lhs = quantize(s, &lam)?.h_symbol(d)?;
                    Ok(differ(|| format!("S = {s}"), &lhs, s))
                },
            )
        }));
    }
    {
        let (syms, lam, b, delta) = (syms.clone(), lam.clone(), basis.clone(), delta.clone());
        jobs.push(Box::new(move || {
            sweep(
                "Casimir eigenvector construction = quantization",
                &syms,
                &|s| {
                    let q = quantize(s, &lam)?;
                    let at = s.bigrade()?;
                    let eig = casimir_operator(&b, &q)?;
                    if let Some(msg) = differ(
                        || format!("eigenvalue of Q({s})"),
                        &eig,
                        &q.scale(&alpha(at.k, at.d, m, &delta)),
                    ) {
                        return Ok(Some(msg));
                    }
                    let lhs = quantize_via_casimir(s, &lam)?;
                    Ok(differ(|| format!("S = {s}"), &lhs, &q))
                },
            )
        }));
    }

    let affine: Vec<SuperPoly> = basis.affine().map(|e| e.hamiltonian.clone()).collect();
    {
        let cases: Vec<(SuperPoly, FSym)> = affine
            .iter()
            .flat_map(|f| syms.iter().map(move |s| (f.clone(), s.clone())))
            .collect();
        let lam = lam.clone();
        jobs.push(Box::new(move || {
            sweep("gamma map vanishes on affine fields", &cases, &|(f, s)| {
                let g = gamma_map(f, &lam, &s.to_canonical()?)?;
                Ok(differ(
                    || format!("f = {f}, S = {s}"),
                    &g,
                    &g.scale(&Rational::zero()),
                ))
            })
        }));
    }
    {
        let (syms, lam) = (syms.clone(), lam.clone());
        jobs.push(Box::new(move || {
            sweep("gamma map of x^2 = -(2 lambda + k - 1) i(1)", &syms, &|s| {
                let k = s.degree()?;
                let lhs =
                    gamma_map(&SuperPoly::x_pow(n, 2), &lam, &s.to_canonical()?)?.to_contact()?;
                let c = -(&lam * Rational::from(2) + Rational::from(k as i64 - 1));
                let rhs = s.interior(1)?.scale(&c);
                Ok(differ(|| format!("S = {s}"), &lhs, &rhs))
            })
        }));
    }
    {
        let cases: Vec<(SuperPoly, FSym)> = affine
            .iter()
            .flat_map(|f| syms.iter().map(move |s| (f.clone(), s.clone())))
            .collect();
        jobs.push(Box::new(move || {
            sweep("div commutes with the affine action", &cases, &|(f, s)| {
                let c = s.to_canonical()?;
                let lhs = act_symbol_canonical(f, &lam, &c.div_symbol()?)?;
                let rhs = act_symbol_canonical(f, &lam, &c)?.div_symbol()?;
                Ok(differ(|| format!("f = {f}, S = {s}"), &lhs, &rhs))
            })
        }));
    }
    Ok(())
}
