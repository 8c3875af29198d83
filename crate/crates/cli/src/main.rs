use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use lenuniv::formulas::{divisibility_program, eval_formula, parse_formula, store_formula};
use lenuniv::gadgetlang::{compile_program, parse_program};
use lenuniv::reductions::{
    alg3_nfa, binarize, crt_encode_table, ntm_to_formula, parse_dimacs, prime_cycle_dfa, sat_to_dfa,
    simulate_ntm, Ntm, DEFAULT_SIMULATION_BUDGET,
};
use lenuniv::regex::regex_to_nfa;
use lenuniv::solvers::{minimal_universality_length, universal_at_length};
use lenuniv::{Automaton, Error, DEFAULT_DET_CAP};

#[derive(Parser)]
#[command(name = "lenuniv", version, about = "Length universality for finite automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide given-length or existential length universality.
    Decide {
        #[command(subcommand)]
        question: Question,
    },
    /// Generate a witness or reduction automaton.
    Gen {
        #[command(subcommand)]
        what: Generator,
    },
    /// Compile a gadget program into an NFA with a statement map.
    Compile {
        #[arg(long)]
        program: String,
        #[arg(long)]
        width: u32,
    },
    /// Transform an automaton.
    Transform {
        #[command(subcommand)]
        how: Transform,
    },
    /// Evaluate a formula at a given ℓ'.
    Eval {
        #[arg(long)]
        formula: String,
        #[arg(long = "ell-prime")]
        ell_prime: String,
        #[arg(long)]
        json: bool,
    },
    /// Reduce a problem instance to a formula.
    Reduce {
        #[command(subcommand)]
        what: Reduction,
    },
}

#[derive(Args)]
struct Input {
    /// Automaton JSON file, or `-` for standard input.
    #[arg(long, group = "source")]
    automaton: Option<String>,
    /// Regular expression over single characters.
    #[arg(long, group = "source")]
    regex: Option<String>,
    /// Gadget program file, or `-` for standard input; needs --width.
    #[arg(long, group = "source", requires = "width")]
    program: Option<String>,
    #[arg(long)]
    width: Option<u32>,
    /// Cap on determinization states (default from LENUNIV_DETCAP, else 1000000).
    #[arg(long)]
    cap: Option<usize>,
    /// Print a JSON result document instead of a bare answer.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Question {
    /// Is every word of the given length accepted?
    Given {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        length: String,
    },
    /// Is some length universal, and which is the least?
    Existential {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// DFA whose least universal length is the product of the first t primes.
    PrimeCycle {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        binarize: bool,
    },
    /// DFA that is universal at some length exactly when the CNF is satisfiable.
    Sat {
        #[arg(long)]
        cnf: String,
    },
    /// The counter NFA of width m.
    Alg3 {
        #[arg(long)]
        m: u32,
    },
    /// The divisibility NFA for a formula, with its timing constants.
    Divisibility {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<u32>,
    },
}

#[derive(Subcommand)]
enum Transform {
    /// Re-encode the alphabet in binary.
    Binarize {
        #[arg(long)]
        automaton: String,
    },
}

#[derive(Subcommand)]
enum Reduction {
    /// Formula that holds exactly when ℓ' is not an accepting table of the machine.
    Ntm {
        #[arg(long)]
        machine: String,
        /// Print an accepting table and its encoding instead of the formula.
        #[arg(long)]
        accepting_table: bool,
    },
}

/// A failed command: the module that raised the error, and the error.
struct Failure {
    module: &'static str,
    error: Error,
}

fn tag(module: &'static str) -> impl Fn(Error) -> Failure {
    move |error| Failure { module, error }
}

type Outcome = Result<Output, Failure>;

/// Text for standard output and the exit code.
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

fn read_source(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Input(format!("standard input: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{path}: {e}")))
    }
}

/// Accepts a bare automaton document or any document with an `automaton` field.
fn automaton_from_text(text: &str) -> Result<Automaton, Error> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse { location: format!("{}:{}", e.line(), e.column()), message: e.to_string() })?;
    let doc = v.get("automaton").unwrap_or(&v);
    Automaton::from_json(&doc.to_string())
}

fn det_cap(flag: Option<usize>) -> Result<usize, Error> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var("LENUNIV_DETCAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("LENUNIV_DETCAP must be a number, got `{v}`"))),
        Err(_) => Ok(DEFAULT_DET_CAP),
    }
}

fn load_input(input: &Input) -> Result<Automaton, Failure> {
    if let Some(path) = &input.automaton {
        let text = read_source(path).map_err(tag("automata"))?;
        automaton_from_text(&text).map_err(tag("automata"))
    } else if let Some(r) = &input.regex {
        regex_to_nfa(r).map_err(tag("regex"))
    } else if let Some(path) = &input.program {
        let text = read_source(path).map_err(tag("gadgetlang"))?;
        let width = input.width.expect("clap enforces --width");
        let program = parse_program(&text, width).map_err(tag("gadgetlang"))?;
        Ok(compile_program(&program).map_err(tag("gadgetlang"))?.automaton)
    } else {
        Err(Failure {
            module: "cli",
            error: Error::Input("give one of --automaton, --regex, --program".into()),
        })
    }
}

fn result_document(payload: Value, diagnostics: Vec<String>) -> String {
    let mut s = json!({ "status": "ok", "payload": payload, "diagnostics": diagnostics }).to_string();
    s.push('\n');
    s
}

fn decide(q: Question) -> Outcome {
    match q {
        Question::Given { input, length } => {
            let a = load_input(&input)?;
            let cap = det_cap(input.cap).map_err(tag("cli"))?;
            let len: BigUint = length
                .parse()
                .map_err(|_| Failure { module: "cli", error: Error::Parse { location: "--length".into(), message: format!("`{length}` is not a decimal number") } })?;
            let yes = universal_at_length(&a, &len, cap).map_err(tag("solvers"))?;
            let text = if input.json {
                result_document(json!({ "decision": yes, "length": len.to_string() }), vec![])
            } else {
                format!("{}\n", if yes { "yes" } else { "no" })
            };
            Ok(Output { text, code: if yes { 0 } else { 1 } })
        }
        Question::Existential { input } => {
            let a = load_input(&input)?;
            let cap = det_cap(input.cap).map_err(tag("cli"))?;
            let r = minimal_universality_length(&a, cap).map_err(tag("solvers"))?;
            let answer = r.minimal_length.as_ref().map(|l| l.to_string());
            if let Some(note) = &r.cap_hit {
                eprintln!("note: {note}");
            }
            let text = if input.json {
                result_document(
                    json!({
                        "exists": r.exists,
                        "minimal_length": answer,
                        "preperiod": r.preperiod,
                        "period": r.period,
                    }),
                    r.cap_hit.iter().cloned().collect(),
                )
            } else {
                format!("{}\n", answer.as_deref().unwrap_or("none"))
            };
            Ok(Output { text, code: if r.exists { 0 } else { 1 } })
        }
    }
}

fn gen(g: Generator) -> Outcome {
    match g {
        Generator::PrimeCycle { t, binarize } => {
            let a = prime_cycle_dfa(t, binarize).map_err(tag("reductions"))?;
            Ok(Output::ok(a.to_json()))
        }
        Generator::Sat { cnf } => {
            let text = read_source(&cnf).map_err(tag("reductions"))?;
            let cnf = parse_dimacs(&text).map_err(tag("reductions"))?;
            Ok(Output::ok(sat_to_dfa(&cnf).map_err(tag("reductions"))?.to_json()))
        }
        Generator::Alg3 { m } => {
            let c = alg3_nfa(m).map_err(tag("gadgetlang"))?;
            Ok(Output::ok(c.automaton.to_json()))
        }
        Generator::Divisibility { formula, k, m } => {
            let text = read_source(&formula).map_err(tag("formulas"))?;
            let f = parse_formula(&text).map_err(tag("formulas"))?;
            if k.is_some_and(|k| k != f.vars.len()) || m.is_some_and(|m| m != f.width) {
                return Err(Failure {
                    module: "formulas",
                    error: Error::Input(format!(
                        "formula has k = {} and m = {}, which disagrees with --k/--m",
                        f.vars.len(),
                        f.width
                    )),
                });
            }
            let d = divisibility_program(&f).map_err(tag("formulas"))?;
            let c = compile_program(&d.program).map_err(tag("gadgetlang"))?;
            let doc = json!({
                "automaton": c.automaton.to_document(),
                "r1": d.r1,
                "r2": d.r2,
                "D": d.delay,
                "verify_bound": d.verify_bound,
            });
            Ok(Output::ok(format!("{doc}\n")))
        }
    }
}

fn compile(path: &str, width: u32) -> Outcome {
    let text = read_source(path).map_err(tag("gadgetlang"))?;
    let program = parse_program(&text, width).map_err(tag("gadgetlang"))?;
    let c = compile_program(&program).map_err(tag("gadgetlang"))?;
    let doc = json!({ "automaton": c.automaton.to_document(), "metadata": c.metadata_json() });
    Ok(Output::ok(format!("{doc}\n")))
}

fn transform(t: Transform) -> Outcome {
    match t {
        Transform::Binarize { automaton } => {
            let text = read_source(&automaton).map_err(tag("automata"))?;
            let a = automaton_from_text(&text).map_err(tag("automata"))?;
            Ok(Output::ok(binarize(&a).map_err(tag("reductions"))?.to_json()))
        }
    }
}

fn eval(formula: &str, ell: &str, as_json: bool) -> Outcome {
    let text = read_source(formula).map_err(tag("formulas"))?;
    let f = parse_formula(&text).map_err(tag("formulas"))?;
    let ell: BigUint = ell.parse().map_err(|_| Failure {
        module: "cli",
        error: Error::Parse { location: "--ell-prime".into(), message: format!("`{ell}` is not a decimal number") },
    })?;
    let v = eval_formula(&f, &ell).map_err(tag("formulas"))?;
    let text = if as_json {
        result_document(json!({ "value": v, "ell_prime": ell.to_string() }), vec![])
    } else {
        format!("{v}\n")
    };
    Ok(Output { text, code: if v { 0 } else { 1 } })
}

fn reduce(r: Reduction) -> Outcome {
    match r {
        Reduction::Ntm { machine, accepting_table } => {
            let text = read_source(&machine).map_err(tag("reductions"))?;
            let ntm = Ntm::from_json(&text).map_err(tag("reductions"))?;
            if accepting_table {
                let t = simulate_ntm(&ntm, DEFAULT_SIMULATION_BUDGET).map_err(tag("reductions"))?;
                let Some(t) = t else {
                    return Ok(Output { text: "none\n".into(), code: 1 });
                };
                let ell = crt_encode_table(&ntm, &t).map_err(tag("reductions"))?;
                let doc = json!({ "table": t, "ell_prime": ell.to_string() });
                return Ok(Output::ok(format!("{doc}\n")));
            }
            let f = ntm_to_formula(&ntm).map_err(tag("reductions"))?;
            Ok(Output::ok(format!("{}\n", store_formula(&f))))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_resource() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Decide { question } => decide(question),
        Command::Gen { what } => gen(what),
        Command::Compile { program, width } => compile(&program, width),
        Command::Transform { how } => transform(how),
        Command::Eval { formula, ell_prime, json } => eval(&formula, &ell_prime, json),
        Command::Reduce { what } => reduce(what),
    };
    match outcome {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(Failure { module, error }) => {
            eprintln!("error[{module}]: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
