//! Differential checks between the backends.
//!
//! [`lockstep`] runs the environment and substitution machines side by side
//! and compares the realized environment configuration with the
//! substitution configuration after every transition. [`compare`] runs all
//! four backends and also checks the refocus equation on the reduction run.

use std::fmt;

use crate::machine::env::{self, EnvConfig};
use crate::machine::{is_unloading, realize, subst, trace_line, Config, SConfig};
use crate::outcome::{Observable, Outcome, Run, Stuck};
use crate::redsem::{self, RefocusCheck};
use crate::syntax::{Frame, Term};
use crate::{run_observable, Backend};

/// A deliberately broken environment machine, for testing the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// `succ` adds two instead of one.
    SuccAddsTwo,
}

fn env_step(c: EnvConfig, fault: Fault) -> Result<EnvConfig, Stuck> {
    let bump = fault == Fault::SuccAddsTwo
        && matches!(&c, Config::Cont { level: 1, tower, .. } if matches!(tower.frames.last(), Some(Frame::Succ)));
    let next = env::step(c)?;
    Ok(match next {
        Config::Cont {
            level,
            value: env::MValue::Int(m),
            tower,
        } if bump => Config::Cont {
            level,
            value: env::MValue::Int(m + 1),
            tower,
        },
        other => other,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    /// Index of the first configuration that differs.
    pub step: u64,
    pub env: String,
    pub subst: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "first divergence at configuration {}", self.step)?;
        writeln!(f, "  env (realized): {}", self.env)?;
        write!(f, "  subst:          {}", self.subst)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LockStep {
    /// Transitions taken, as counted by both machines.
    pub steps: u64,
    pub outcome: Outcome<Term>,
    pub divergence: Option<Divergence>,
}

fn show_env(k: u64, c: &EnvConfig) -> String {
    match realize::config(c) {
        Ok(sc) => trace_line(k, &sc),
        Err(e) => format!("{k}: <unrealizable: {e}>"),
    }
}

fn show_outcome<V>(k: u64, r: &Result<V, Stuck>) -> String {
    match r {
        Ok(_) => format!("{k}: <running>"),
        Err(s) => format!("{k}: {s}"),
    }
}

/// Runs both machines in lock step, checking after every transition that
/// the substitution configuration is the realization of the environment
/// configuration.
pub fn lockstep(program: &Term, n: usize, fuel: u64) -> LockStep {
    lockstep_with(program, n, fuel, Fault::None)
}

pub fn lockstep_with(program: &Term, n: usize, fuel: u64, fault: Fault) -> LockStep {
    let mut ec = env::initial(program, n);
    let mut sc = subst::initial(program, n);
    let mut steps = 0;
    let mut index = 0;
    let diverge = |index: u64, env: String, subst: String, steps: u64| LockStep {
        steps,
        outcome: Outcome::Timeout,
        divergence: Some(Divergence {
            step: index,
            env,
            subst,
        }),
    };
    loop {
        let realized = realize::config(&ec);
        if realized.as_ref().ok() != Some(&sc) {
            return diverge(index, show_env(index, &ec), trace_line(index, &sc), steps);
        }
        if let Config::Final(v) = sc {
            return LockStep {
                steps,
                outcome: Outcome::Value(v),
                divergence: None,
            };
        }
        let unloading = is_unloading(&sc);
        if !unloading && steps >= fuel {
            return LockStep {
                steps,
                outcome: Outcome::Timeout,
                divergence: None,
            };
        }
        let en = env_step(ec, fault);
        let sn = subst::step(sc, subst::Control::Static);
        index += 1;
        match (en, sn) {
            (Ok(e2), Ok(s2)) => {
                ec = e2;
                sc = s2;
            }
            (Err(a), Err(b)) if a.kind == b.kind => {
                return LockStep {
                    steps,
                    outcome: Outcome::Stuck(b),
                    divergence: None,
                }
            }
            (en, sn) => {
                let e = match &en {
                    Ok(c) => show_env(index, c),
                    Err(_) => show_outcome(index, &en),
                };
                let s = match &sn {
                    Ok(c) => trace_line(index, c),
                    Err(_) => show_outcome(index, &sn),
                };
                return diverge(index, e, s, steps);
            }
        }
        if !unloading {
            steps += 1;
        }
    }
}

/// The terms obtained by plugging every configuration of a substitution
/// machine run, with consecutive repetitions removed. Ends with the final
/// value when there is one.
pub fn plugged_machine_sequence(program: &Term, n: usize, fuel: u64) -> (Outcome<Term>, Vec<Term>) {
    let mut seq: Vec<Term> = Vec::new();
    let run = subst::run_with(program, n, fuel, false, subst::Control::Static, |_, c: &SConfig| {
        let t = match c {
            Config::Eval { term, tower, .. } => redsem::plug(tower, term),
            Config::Cont { value, tower, .. } => redsem::plug(tower, value),
            Config::Final(v) => v.clone(),
        };
        if seq.last() != Some(&t) {
            seq.push(t);
        }
    });
    (run.outcome, seq)
}

/// The reduction sequence of `program`, ending with the value when there is
/// one.
pub fn reduction_terms(program: &Term, n: usize, fuel: u64) -> (Outcome<Term>, Vec<Term>) {
    let (run, mut seq) = redsem::reduction_sequence(program, n, fuel, true);
    if let Outcome::Value(v) = &run.outcome {
        seq.push(v.clone());
    }
    (run.outcome, seq)
}

#[derive(Clone, Debug)]
pub struct Report {
    pub runs: Vec<(Backend, Run<Observable>)>,
    pub lockstep: LockStep,
    pub refocus: RefocusCheck,
    pub mismatches: Vec<String>,
}

impl Report {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn describe(o: &Outcome<Observable>) -> String {
    match o {
        Outcome::Value(v) => v.to_string(),
        Outcome::Stuck(s) => s.to_string(),
        Outcome::Timeout => "timeout".to_string(),
    }
}

/// Runs all four backends on a validated program and checks that they
/// agree: same outcome class and observable, lock step between the
/// machines with equal step counts, and no refocus violation.
pub fn compare(program: &Term, n: usize, fuel: u64) -> Report {
    compare_with(program, n, fuel, Fault::None)
}

pub fn compare_with(program: &Term, n: usize, fuel: u64, fault: Fault) -> Report {
    let runs: Vec<(Backend, Run<Observable>)> = Backend::ALL
        .iter()
        .map(|&b| (b, run_observable(b, program, n, fuel)))
        .collect();
    let lockstep = lockstep_with(program, n, fuel, fault);
    let (refocus_run, refocus) = redsem::evaluate_refocusing(program, n, fuel);
    let mut mismatches = Vec::new();
    let (b0, r0) = &runs[0];
    for (b, r) in &runs[1..] {
        if r.outcome.class() != r0.outcome.class() || r.outcome.value() != r0.outcome.value() {
            mismatches.push(format!(
                "{} gives {} but {} gives {}",
                b0.name(),
                describe(&r0.outcome),
                b.name(),
                describe(&r.outcome)
            ));
        }
    }
    let steps = |b: Backend| runs.iter().find(|(x, _)| *x == b).map(|(_, r)| r.steps);
    if steps(Backend::Env) != steps(Backend::Subst) {
        mismatches.push(format!(
            "env takes {:?} transitions but subst takes {:?}",
            steps(Backend::Env),
            steps(Backend::Subst)
        ));
    }
    if let Some(d) = &lockstep.divergence {
        mismatches.push(d.to_string());
    }
    if refocus.violations > 0 {
        mismatches.push(format!("{} refocus violations", refocus.violations));
    }
    let reduced = refocus_run.outcome.map(|v| subst::observe(&v));
    if reduced.class() != r0.outcome.class() || reduced.value() != r0.outcome.value() {
        mismatches.push(format!(
            "refocusing gives {} but {} gives {}",
            describe(&reduced),
            b0.name(),
            describe(&r0.outcome)
        ));
    }
    Report {
        runs,
        lockstep,
        refocus,
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    #[test]
    fn agreement_on_small_programs() {
        for src in [
            "(succ (succ 0))",
            "(reset 1 (succ (shift 1 (k) (k (k 0)))))",
            "(add 1 (reset 2 (add 10 (reset 1 (add 100 (shift 2 (k) (k (k 0))))))))",
            "(1 2)",
        ] {
            let r = compare(&parse_term(src).unwrap(), 2, 10_000);
            assert!(r.agrees(), "{src}: {:?}", r.mismatches);
        }
    }

    #[test]
    fn broken_succ_is_caught() {
        let t = parse_term("(add 1 (succ 0))").unwrap();
        let r = lockstep_with(&t, 1, 1000, Fault::SuccAddsTwo);
        let d = r.divergence.expect("divergence");
        assert!(d.env.contains("[ 2 ]"), "{d}");
        assert!(d.subst.contains("[ 1 ]"), "{d}");
    }

    #[test]
    fn plugged_sequences_match() {
        let t = parse_term("(reset 1 (cons 1 (shift 1 (k) (k (k nil)))))").unwrap();
        let (o1, a) = plugged_machine_sequence(&t, 1, 1000);
        let (o2, b) = reduction_terms(&t, 1, 1000);
        assert_eq!(o1, o2);
        assert_eq!(a, b);
    }
}
