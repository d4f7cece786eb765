//! Four semantics for the call-by-value λ-calculus with the `shift_i` /
//! `reset_i` operators of the CPS hierarchy, at any level `n`:
//!
//! * [`eval_cps`]: an evaluator with `n + 1` layers of continuations,
//! * [`machine::env`]: an environment-based abstract machine,
//! * [`machine::subst`]: a substitution-based abstract machine,
//! * [`redsem`]: a reduction semantics with decompose / contract / plug,
//!
//! plus the dynamic (context-concatenating) variant in [`dynamic`],
//! normalization by evaluation for hierarchical monoids in [`nbe`], and the
//! arithmetic warm-up in [`arith`].
//!
//! Programs are written as S-expressions:
//!
//! ```
//! use cps_hierarchy::{parse_term, machine::env, Observable};
//!
//! let t = parse_term("(reset 1 (succ (shift 1 (k) (k (k 0)))))").unwrap();
//! let run = env::run(&t, 1, 1000, false);
//! assert_eq!(run.outcome.value().map(env::observe), Some(Observable::Int(2)));
//! ```

pub mod arith;
pub mod compare;
pub mod corpus;
pub mod dynamic;
pub mod eval_cps;
pub mod gen;
pub mod machine;
pub mod nbe;
pub mod outcome;
pub mod redsem;
pub mod sexpr;
pub mod syntax;

pub use arith::AExp;
pub use outcome::{with_stack, Observable, Outcome, OutcomeClass, Run, Stuck, StuckKind};
pub use sexpr::SyntaxError;
pub use syntax::{
    alpha_eq, free_vars, parse_term, print_term, substitute, validate_program, Name, Term, ValidationError,
};

/// Default step budget for a run.
pub const DEFAULT_FUEL: u64 = 100_000;

/// The backends that evaluate object-language programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Cps,
    Env,
    Subst,
    Redsem,
}

impl Backend {
    pub const ALL: [Backend; 4] = [Backend::Cps, Backend::Env, Backend::Subst, Backend::Redsem];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Cps => "cps",
            Backend::Env => "env",
            Backend::Subst => "subst",
            Backend::Redsem => "redsem",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown backend `{s}` (expected cps, env, subst or redsem)"))
    }
}

/// Runs `program` at level `n` on `backend` and reports the observable
/// result. The program must already be validated.
pub fn run_observable(backend: Backend, program: &Term, n: usize, fuel: u64) -> Run<Observable> {
    match backend {
        Backend::Cps => {
            let r = eval_cps::run(program, n, fuel);
            Run {
                outcome: r.outcome.map(|v| v.observe()),
                steps: r.steps,
                trace: None,
            }
        }
        Backend::Env => {
            let r = machine::env::run(program, n, fuel, false);
            Run {
                outcome: r.outcome.map(|v| machine::env::observe(&v)),
                steps: r.steps,
                trace: r.trace,
            }
        }
        Backend::Subst => {
            let r = machine::subst::run(program, n, fuel, false);
            Run {
                outcome: r.outcome.map(|v| machine::subst::observe(&v)),
                steps: r.steps,
                trace: r.trace,
            }
        }
        Backend::Redsem => {
            let r = redsem::evaluate(program, n, fuel);
            Run {
                outcome: r.outcome.map(|v| machine::subst::observe(&v)),
                steps: r.steps,
                trace: None,
            }
        }
    }
}
