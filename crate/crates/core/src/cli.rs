//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 critical weight.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::contactfields::{spo_basis, superdimension};
use crate::diffops::{Bigrade, DiffOp, HalfInt};
use crate::error::Error;
use crate::expr::parse_symbol;
use crate::finesymbols::{basis_symbols, FSym, SymFlavor};
use crate::quantmaps::{
    alpha, casimir_operator, casimir_symbol, casimir_witnesses, projective_witnesses, quantize,
    sq_witnesses, CriticalWitness, SymbolRep,
};
use crate::rational::Rational;
use crate::verify::{self, Check, Config, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CRITICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "spoquant",
    version,
    about = "Fine spo(2|n)-equivariant quantization on S^{1|n}"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quantize a contact symbol into a differential operator F_lambda -> F_mu.
    Quantize {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Rational,
        #[arg(long, allow_hyphen_values = true)]
        mu: Rational,
        /// Symbol in x, t1..tn, z, g1..gn.
        #[arg(long, allow_hyphen_values = true)]
        symbol: String,
        #[arg(long)]
        json: bool,
    },
    /// Check every identity of a suite and report the first counterexample.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Rational,
        #[arg(long, allow_hyphen_values = true)]
        mu: Rational,
        #[arg(long)]
        dmax: HalfInt,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Largest power of x in swept coefficients.
        #[arg(long, default_value_t = 1)]
        xmax: u32,
        /// Count informational notes as failures.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
    },
    /// Apply a Casimir operator to every basis symbol of one stratum.
    Casimir {
        #[arg(long, value_enum)]
        rep: RepArg,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        delta: Rational,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: HalfInt,
        /// Source weight for the operator representation.
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        lambda: Rational,
        #[arg(long, default_value_t = 1)]
        xmax: u32,
        #[arg(long)]
        json: bool,
    },
    /// List critical weights within bounds, or test one weight.
    Critical {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: u32,
        #[arg(long)]
        dmax: HalfInt,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<Rational>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Actions,
    Lemmas,
    Casimir,
    Quantization,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Actions => Suite::Actions,
            SuiteArg::Lemmas => Suite::Lemmas,
            SuiteArg::Casimir => Suite::Casimir,
            SuiteArg::Quantization => Suite::Quantization,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RepArg {
    Fine,
    Classical,
    Operators,
}

impl RepArg {
    fn name(self) -> &'static str {
        match self {
            RepArg::Fine => "fine",
            RepArg::Classical => "classical",
            RepArg::Operators => "operators",
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Critical(_) => EXIT_CRITICAL,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> crate::Result<i32> {
    match cmd {
        Command::Quantize {
            n,
            lambda,
            mu,
            symbol,
            json,
        } => cmd_quantize(out, n, lambda, mu, &symbol, json),
        Command::Verify {
            n,
            lambda,
            mu,
            dmax,
            suite,
            xmax,
            strict,
            json,
        } => {
            let cfg = Config {
                n,
                lambda,
                mu,
                d_max: dmax,
                x_max: xmax,
            };
            cmd_verify(out, cfg, suite, strict, json)
        }
        Command::Casimir {
            rep,
            n,
            delta,
            k,
            d,
            lambda,
            xmax,
            json,
        } => cmd_casimir(out, rep, n, delta, Bigrade::new(k, d)?, lambda, xmax, json),
        Command::Critical {
            n,
            kmax,
            dmax,
            delta,
            json,
        } => cmd_critical(out, n, kmax, dmax, delta, json),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> crate::Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Order(format!("cannot write output: {e}")))
}

/// `"num/den"`, always with an explicit denominator.
pub fn json_rational(r: &Rational) -> Value {
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

fn json_halfint(h: HalfInt) -> Value {
    json_rational(&h.to_rational())
}

fn json_operator(d: &DiffOp) -> Value {
    let terms: Vec<Value> = d
        .terms()
        .map(|(c, k, a)| {
            let coefficient: Vec<Value> = a
                .terms()
                .map(|(m, v)| json!({"x": m.x, "theta": m.odd.iter().collect::<Vec<_>>(), "value": json_rational(v)}))
                .collect();
            json!({"dx": c, "dbar": k.iter().collect::<Vec<_>>(), "coefficient": coefficient})
        })
        .collect();
    Value::Array(terms)
}

fn json_witness(w: &CriticalWitness, m: i64) -> Value {
    let params = match *w {
        CriticalWitness::Sq { c, j } => json!({"c": c, "j": j}),
        CriticalWitness::Projective { k, i } => json!({"k": k, "i": i}),
        CriticalWitness::Casimir { k, d, k2, d2 } => {
            json!({"k": k, "d": json_halfint(d), "k2": k2, "d2": json_halfint(d2)})
        }
    };
    json!({"set": w.set().name(), "params": params, "value": json_rational(&w.value(m)), "text": w.to_string()})
}

fn to_json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn cmd_quantize(
    out: &mut dyn Write,
    n: usize,
    lambda: Rational,
    mu: Rational,
    src: &str,
    json: bool,
) -> crate::Result<i32> {
    spo_basis(n)?;
    let delta = &mu - &lambda;
    let s = parse_symbol(src, n, SymFlavor::Contact, delta.clone())?;
    let m = superdimension(n);
    if !s.is_zero() {
        let d_max = s.by_heisenberg().keys().copied().max().unwrap_or_default();
        let k_max = s.by_degree().keys().copied().max().unwrap_or(0);
        let hit = sq_witnesses(d_max)
            .into_iter()
            .chain(projective_witnesses(k_max))
            .find(|w| w.value(m) == delta);
        if let Some(w) = hit {
            return Err(Error::Critical(w));
        }
    }
    let op = quantize(&s, &lambda)?;
    if json {
        let v = json!({
            "command": "quantize",
            "n": n,
            "lambda": json_rational(&lambda),
            "mu": json_rational(&mu),
            "delta": json_rational(&delta),
            "symbol": s.to_string(),
            "operator": op.to_string(),
            "terms": json_operator(&op),
        });
        emit(out, &to_json_line(&v))?;
    } else {
        emit(out, &format!("{op}\n"))?;
    }
    Ok(EXIT_OK)
}

fn check_json(c: &Check) -> Value {
    json!({
        "name": c.name,
        "cases": c.cases,
        "passed": c.passed(),
        "informational": c.informational,
        "counterexample": c.failure,
    })
}

fn cmd_verify(
    out: &mut dyn Write,
    cfg: Config,
    suite: SuiteArg,
    strict: bool,
    json: bool,
) -> crate::Result<i32> {
    let checks = verify::run(suite.into(), &cfg)?;
    let ok = checks
        .iter()
        .all(|c| c.passed() || (c.informational && !strict));
    if json {
        let v = json!({
            "command": "verify",
            "n": cfg.n,
            "lambda": json_rational(&cfg.lambda),
            "mu": json_rational(&cfg.mu),
            "delta": json_rational(&cfg.delta()),
            "dmax": json_halfint(cfg.d_max),
            "suite": format!("{suite:?}").to_lowercase(),
            "strict": strict,
            "passed": ok,
            "checks": checks.iter().map(check_json).collect::<Vec<_>>(),
        });
        emit(out, &to_json_line(&v))?;
    } else {
        let mut text = String::new();
        for c in &checks {
            text.push_str(&format!("{c}\n"));
        }
        let failed = checks
            .iter()
            .filter(|c| !c.passed() && !c.informational)
            .count();
        let notes = checks
            .iter()
            .filter(|c| !c.passed() && c.informational)
            .count();
        text.push_str(&format!(
            "{} checks: {} passed, {failed} failed, {notes} notes\n",
            checks.len(),
            checks.len() - failed - notes
        ));
        emit(out, &text)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

#[allow(clippy::too_many_arguments)]
fn cmd_casimir(
    out: &mut dyn Write,
    rep: RepArg,
    n: usize,
    delta: Rational,
    at: Bigrade,
    lambda: Rational,
    x_max: u32,
    json: bool,
) -> crate::Result<i32> {
    let basis = spo_basis(n)?;
    let m = superdimension(n);
    let a = alpha(at.k, at.d, m, &delta);
    let syms = basis_symbols(n, &delta, at, x_max);
    let mut residual: Option<String> = None;
    for s in &syms {
        let r = match rep {
            RepArg::Fine => {
                let c = casimir_symbol(SymbolRep::Fine, &basis, s)?;
                (&c - &s.scale(&a)).to_string()
            }
            RepArg::Classical => {
                let c = casimir_symbol(SymbolRep::Classical, &basis, s)?;
                let expected = &s.scale(&a) + &s.delta_op()?.scale(&Rational::half());
                (&c - &expected).to_string()
            }
            RepArg::Operators => {
                let q = quantize(s, &lambda)?;
                let c = casimir_operator(&basis, &q)?;
                (&c - &q.scale(&a)).to_string()
            }
        };
        if r != "0" {
            residual = Some(format!("S = {s}: {r}"));
            break;
        }
    }
    let zero = residual.is_none();
    let residual = residual.unwrap_or_else(|| "0".to_string());
    if json {
        let v = json!({
            "command": "casimir",
            "rep": rep.name(),
            "n": n,
            "delta": json_rational(&delta),
            "k": at.k,
            "d": json_halfint(at.d),
            "eigenvalue": json_rational(&a),
            "symbols": syms.len(),
            "residual": residual,
            "residual_zero": zero,
        });
        emit(out, &to_json_line(&v))?;
    } else {
        emit(
            out,
            &format!(
                "eigenvalue alpha(k={}, d={}) = {a}\nresidual {residual} ({} symbols, {} representation)\n",
                at.k,
                at.d,
                syms.len(),
                rep.name()
            ),
        )?;
    }
    Ok(if zero { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_critical(
    out: &mut dyn Write,
    n: usize,
    k_max: u32,
    d_max: HalfInt,
    delta: Option<Rational>,
    json: bool,
) -> crate::Result<i32> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let m = superdimension(n);
    let mut by_value: BTreeMap<Rational, Vec<CriticalWitness>> = BTreeMap::new();
    for w in sq_witnesses(d_max)
        .into_iter()
        .chain(projective_witnesses(k_max))
        .chain(casimir_witnesses(k_max, d_max))
    {
        let v = w.value(m);
        if delta.as_ref().is_none_or(|d| d == &v) {
            by_value.entry(v).or_default().push(w);
        }
    }
    let critical = !by_value.is_empty();
    if json {
        let values: Vec<Value> = by_value
            .iter()
            .map(|(v, ws)| {
                json!({
                    "value": json_rational(v),
                    "witnesses": ws.iter().map(|w| json_witness(w, m)).collect::<Vec<_>>(),
                })
            })
            .collect();
        let v = json!({
            "command": "critical",
            "n": n,
            "kmax": k_max,
            "dmax": json_halfint(d_max),
            "delta": delta.as_ref().map(json_rational),
            "critical": critical,
            "values": values,
        });
        emit(out, &to_json_line(&v))?;
    } else if let Some(d) = &delta {
        let text = match by_value.get(d) {
            Some(ws) => {
                let list: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
                format!("critical ({})\n", list.join("; "))
            }
            None => format!("not critical: {d} is in none of I_δ, C', C_crit within the bounds\n"),
        };
        emit(out, &text)?;
    } else {
        let mut text = String::new();
        for (v, ws) in &by_value {
            let list: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
            text.push_str(&format!("{v}: {}\n", list.join("; ")));
        }
        text.push_str(&format!("{} critical values\n", by_value.len()));
        emit(out, &text)?;
    }
    Ok(if delta.is_some() && critical {
        EXIT_CRITICAL
    } else {
        EXIT_OK
    })
}

/// A helper for callers that want a symbol's quantization as text.
pub fn quantize_text(
    n: usize,
    lambda: &Rational,
    mu: &Rational,
    src: &str,
) -> crate::Result<String> {
    let s: FSym = parse_symbol(src, n, SymFlavor::Contact, mu - lambda)?;
    Ok(quantize(&s, lambda)?.to_string())
}
