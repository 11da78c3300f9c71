use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use conerisk::consistency::{decompose, epsilon, theorem_main_report};
use conerisk::corpus::{self, NumeraireChoice};
use conerisk::risk::RepresentingSet;
use conerisk::scenario::Scenario;
use conerisk::space::{cap_from_env, Measure, RandomVec, StoppingTime};
use conerisk::stability::{crucial_claim_check, paste, predictable_preimage, vstability_witness_search};
use conerisk::{cone, market, Error, Scalar};

#[derive(Parser)]
#[command(name = "conerisk", version, about = "Exact checks for dynamic coherent risk measures on finite trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Built-in scenario (see `corpus list`)
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    corpus: Option<String>,
    /// Numéraire vector for a bare corpus family name
    #[arg(long, default_value = "paper", value_parser = ["unit", "paper"])]
    numeraire: String,
    /// Scenario JSON file
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Emit JSON instead of text
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit text (the default)
    #[arg(long)]
    text: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide time-consistency, representability and dual stability
    Check {
        #[command(flatten)]
        src: Source,
        /// Expected verdicts, e.g. `true,true,true`; a single value is the
        /// expected presence of a pasting witness
        #[arg(long)]
        expect: Option<String>,
        /// Stopping-time enumeration cap
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Evaluate ρ_t(X) and ε_t(X)
    Eval {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        t: usize,
        /// JSON array of scalars, inline or as a file path
        #[arg(long)]
        claim: String,
    },
    /// Split X − ρ_0(X) into one-period acceptable portfolios
    Decompose {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        claim: String,
    },
    /// Paste two measures at a stopping time
    Paste {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        q: String,
        #[arg(long = "q-prime")]
        q_prime: String,
        /// JSON array of integer times, one per atom
        #[arg(long)]
        tau: String,
    },
    /// Generators of A_t*, K_t and conv M_t, and the K_t = (M_t)* check
    Duals {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        t: usize,
    },
    /// Search member pairs and stopping times for a pasting that leaves the set
    Witness {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Built-in scenarios
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List scenario names
    List,
    /// Print a scenario as JSON
    Emit {
        name: String,
        #[arg(long, default_value = "paper", value_parser = ["unit", "paper"])]
        numeraire: String,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures mapped to exit codes.
enum Failure {
    Mismatch(String),
    Refused(String),
    Input(Error),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TheoremViolation(m) => Failure::Internal(m),
            Error::NotRepresentable(m) => Failure::Refused(format!("claim is not predictably representable: {m}")),
            other => Failure::Input(other),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load(src: &Source) -> Result<Scenario, Error> {
    match (&src.corpus, &src.scenario) {
        (Some(name), None) => {
            let choice: NumeraireChoice = src.numeraire.parse()?;
            corpus::build(name, choice)
        }
        (None, Some(path)) => Scenario::from_json(&read_file(path)?),
        _ => Err(Error::Invalid("give exactly one of --corpus or --scenario".into())),
    }
}

fn read_file(path: impl AsRef<std::path::Path>) -> Result<String, Error> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

/// Inline JSON, or a path to a file holding it.
fn read_json(arg: &str) -> Result<Value, Error> {
    let text = if arg.trim_start().starts_with('[') || arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read_file(arg)?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{arg}: {e}")))
}

fn read_scalars(arg: &str, len: usize) -> Result<Vec<Scalar>, Error> {
    let v: Vec<Scalar> = serde_json::from_value(read_json(arg)?).map_err(|e| Error::Parse(e.to_string()))?;
    if v.len() != len {
        return Err(Error::DimensionMismatch { expected: len, found: v.len() });
    }
    Ok(v)
}

fn fmt_vec(v: &[Scalar]) -> String {
    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn emit(json: bool, value: Value, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        print!("{}", text());
    }
}

fn parse_expect(s: &str) -> Result<Vec<bool>, Error> {
    s.split(',')
        .map(|p| match p.trim() {
            "true" | "t" | "1" => Ok(true),
            "false" | "f" | "0" => Ok(false),
            other => Err(Error::Parse(format!("--expect takes true/false values, got {other:?}"))),
        })
        .collect()
}

fn cmd_check(src: &Source, expect: Option<&str>, cap: u64) -> Outcome {
    let s = load(src)?;
    let expect = expect.map(parse_expect).transpose()?;
    if let RepresentingSet::QuadBall(_) = s.rm.set() {
        let w = vstability_witness_search(&s.rm, &s.v, cap)?;
        let found = w.is_some();
        emit(src.json, json!({"scenario": s.name, "pasting_witness": w}), || {
            let mut out = format!("scenario {}\nrepresenting set: quadratic ball (witness search only)\n", s.name);
            match &w {
                Some(w) => out.push_str(&format!(
                    "pasting witness: members {} and {}, tau {:?}\n  pasted {}\n  {}\n",
                    w.first, w.second, w.tau, fmt_vec(&w.pasted), w.violated
                )),
                None => out.push_str("pasting witness: none\n"),
            }
            out
        });
        let wanted = match &expect {
            Some(e) if e.len() == 1 => Some(e[0]),
            Some(_) => return Err(Failure::Input(Error::Invalid("a quadratic-ball scenario takes one --expect value".into()))),
            None => s.expected.pasting_witness,
        };
        return match wanted {
            Some(w) if w != found => Err(Failure::Mismatch(format!("expected pasting witness {w}, found {found}"))),
            _ => Ok(()),
        };
    }
    let report = theorem_main_report(&s.rm, &s.v, cap)?;
    emit(src.json, serde_json::to_value(&report).expect("json"), || {
        let c = &report.certificates;
        let mut out = format!(
            "scenario {}\ntime-consistent {}\nrepresentable {}\ndual-stable {}\nagreement {}\n",
            s.name, report.time_consistent, report.representable, report.dual_stable, report.agreement
        );
        if let Some(f) = &c.time_consistency.failure {
            out.push_str(&format!(
                "  time {}: claim {} has rho {} but epsilon {}\n",
                f.t,
                fmt_vec(&f.claim),
                fmt_vec(&f.rho),
                fmt_vec(&f.epsilon)
            ));
        }
        if let Some(p) = &c.representability.portfolio {
            out.push_str(&format!("  portfolio outside the sum of K_t: {}\n", fmt_vec(p)));
        }
        if let Some(p) = &c.stability.hull_point {
            out.push_str(&format!("  stable-hull point outside the dual cone: {}\n", fmt_vec(p)));
        }
        match &c.pasting_witness {
            Some(w) => out.push_str(&format!(
                "pasting witness: members {} and {}, tau {:?}, pasted {}\n  {}\n",
                w.first, w.second, w.tau, fmt_vec(&w.pasted), w.violated
            )),
            None => out.push_str(&format!("pasting search: {}\n", c.pasting_search)),
        }
        out
    });
    let got = [report.time_consistent, report.representable, report.dual_stable];
    let wanted: Vec<Option<bool>> = match &expect {
        Some(e) if e.len() == 3 => e.iter().map(|&b| Some(b)).collect(),
        Some(_) => return Err(Failure::Input(Error::Invalid("--expect takes three values".into()))),
        None => vec![s.expected.time_consistent, s.expected.representable, s.expected.dual_stable],
    };
    let names = ["time-consistent", "representable", "dual-stable"];
    for ((name, w), g) in names.iter().zip(&wanted).zip(got) {
        if let Some(w) = w {
            if *w != g {
                return Err(Failure::Mismatch(format!("expected {name} {w}, got {g}")));
            }
        }
    }
    Ok(())
}

fn cmd_eval(src: &Source, t: usize, claim: &str) -> Outcome {
    let s = load(src)?;
    let n = s.rm.space().atoms();
    let x = RandomVec::scalar(read_scalars(claim, n)?);
    let rho = s.rm.rho(t, &x)?;
    let eps = if t < s.rm.space().horizon() { Some(epsilon(&s.rm, &s.v, t, &x)?) } else { None };
    emit(src.json, json!({"t": t, "rho": rho.as_slice(), "epsilon": eps.as_ref().map(|e| e.as_slice())}), || {
        let mut out = format!("rho_{t} {}\n", fmt_vec(rho.as_slice()));
        match &eps {
            Some(e) => out.push_str(&format!("epsilon_{t} {}\n", fmt_vec(e.as_slice()))),
            None => out.push_str(&format!("epsilon_{t} undefined at the horizon\n")),
        }
        out
    });
    Ok(())
}

fn cmd_decompose(src: &Source, claim: &str) -> Outcome {
    let s = load(src)?;
    let x = RandomVec::scalar(read_scalars(claim, s.rm.space().atoms())?);
    let d = decompose(&s.rm, &s.v, &x)?;
    emit(src.json, json!({"rho0": d.rho0, "portfolios": d.portfolios, "validated": true}), || {
        let w = s.v.width();
        let mut out = format!("rho_0 {}\n", fmt_vec(&d.rho0));
        for (t, pi) in d.portfolios.iter().enumerate() {
            out.push_str(&format!("pi_{t}\n"));
            for (a, row) in pi.chunks(w).enumerate() {
                out.push_str(&format!("  atom {a} {}\n", fmt_vec(row)));
            }
        }
        out.push_str("validated: each pi_t in K_t, sum of values equals X - rho_0(X)\n");
        out
    });
    Ok(())
}

fn cmd_paste(src: &Source, q: &str, q_prime: &str, tau: &str) -> Outcome {
    let s = load(src)?;
    let space = s.rm.space();
    let n = space.atoms();
    let q = Measure::new(read_scalars(q, n)?);
    let qp = Measure::new(read_scalars(q_prime, n)?);
    let tau: Vec<usize> = serde_json::from_value(read_json(tau)?).map_err(|e| Error::Parse(e.to_string()))?;
    if tau.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: tau.len() }.into());
    }
    let tau = StoppingTime { tau };
    tau.check_adapted(space)?;
    let out = paste(space, &q, &qp, &tau)?;
    let reason = s.rm.set().explain_exclusion(&out.weights);
    emit(src.json, json!({"pasted": out.weights, "member": reason.is_none(), "violated": reason}), || {
        let mut text = format!("pasted {}\n", fmt_vec(&out.weights));
        match &reason {
            None => text.push_str("member of the representing set\n"),
            Some(r) => text.push_str(&format!("not a member: {r}\n")),
        }
        text
    });
    Ok(())
}

fn cmd_duals(src: &Source, t: usize) -> Outcome {
    let s = load(src)?;
    let space = s.rm.space();
    if t >= space.horizon() {
        return Err(Error::Invalid(format!("--t must be below the horizon {}", space.horizon())).into());
    }
    let at_star = cone::dual_cone(&s.rm.acceptance_cone(t)?, space.probs())?;
    let k = market::k_cone(&s.rm, &s.v, t)?;
    let d = market::lifted_dual(&s.rm, &s.v)?;
    let mt = predictable_preimage(space, &d, s.v.width(), t)?;
    let (holds, sep) = crucial_claim_check(&s.rm, &s.v, t)?;
    let list = |c: &cone::PolyCone| -> Vec<Vec<Scalar>> {
        let mut g = c.gens().to_vec();
        g.sort();
        g
    };
    let (a, kg, mg) = (list(&at_star), list(&k), list(&mt));
    emit(
        src.json,
        json!({"t": t, "acceptance_dual": a, "k_cone": kg, "preimage": mg, "crucial_claim": holds,
               "separation": sep.as_ref().map(|s| json!({"point": s.point, "violated": s.violated}))}),
        || {
            let mut out = String::new();
            for (title, gens) in [(format!("A_{t}* generators"), &a), (format!("K_{t} generators"), &kg), (format!("conv M_{t} generators"), &mg)] {
                out.push_str(&format!("{title} {}\n", gens.len()));
                for g in gens {
                    out.push_str(&format!("  {}\n", fmt_vec(g)));
                }
            }
            out.push_str(&format!("K_{t} equals the polar of conv M_{t}: {holds}\n"));
            out
        },
    );
    if !holds {
        return Err(Failure::Internal(format!("K_{t} differs from the polar of conv M_{t}")));
    }
    Ok(())
}

fn cmd_witness(src: &Source, cap: u64) -> Outcome {
    let s = load(src)?;
    let w = vstability_witness_search(&s.rm, &s.v, cap)?;
    emit(src.json, json!({"witness": w}), || match &w {
        Some(w) => format!(
            "tau {:?}\nQ {}\nQprime {}\npasted {}\nviolated: {}\n",
            w.tau,
            fmt_vec(&w.q),
            fmt_vec(&w.q_prime),
            fmt_vec(&w.pasted),
            w.violated
        ),
        None => "no admissible pasting of members leaves the set\n".into(),
    });
    Ok(())
}

fn cmd_corpus(action: &CorpusAction) -> Outcome {
    match action {
        CorpusAction::List => {
            for name in corpus::NAMES {
                println!("{name}");
            }
            println!("random-<seed>");
            Ok(())
        }
        CorpusAction::Emit { name, numeraire, out } => {
            let s = corpus::build(name, numeraire.parse()?)?;
            let text = s.to_json();
            match out {
                Some(path) => std::fs::write(path, text).map_err(Error::from)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cap = |c: &Option<u64>| c.unwrap_or_else(cap_from_env);
    let result = match &cli.command {
        Command::Check { src, expect, cap: c } => cmd_check(src, expect.as_deref(), cap(c)),
        Command::Eval { src, t, claim } => cmd_eval(src, *t, claim),
        Command::Decompose { src, claim } => cmd_decompose(src, claim),
        Command::Paste { src, q, q_prime, tau } => cmd_paste(src, q, q_prime, tau),
        Command::Duals { src, t } => cmd_duals(src, *t),
        Command::Witness { src, cap: c } => cmd_witness(src, cap(c)),
        Command::Corpus { action } => cmd_corpus(action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(m)) | Err(Failure::Refused(m)) => {
            eprintln!("conerisk: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("conerisk: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("conerisk: internal theorem violation: {m}");
            ExitCode::from(3)
        }
    }
}
