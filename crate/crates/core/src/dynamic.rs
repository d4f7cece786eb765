//! Dynamic delimited control at level 1. The machine is the substitution
//! machine with one transition changed: applying a captured context
//! concatenates it onto the current one instead of saving the current one
//! on the meta-context, which turns `shift`/`reset` into `F`/`#`.

use crate::machine::subst::{self, Control};
use crate::machine::{Config, SConfig};
use crate::outcome::Run;
use crate::syntax::{Frame, Frames, Term};

/// `inner ★ outer` on level-1 contexts: `inner`'s outermost frame is
/// plugged into `outer`'s hole. Frame lists are stored innermost-last.
pub fn concat_ctx<V: Clone, E: Clone>(inner: &Frames<V, E>, outer: &Frames<V, E>) -> Frames<V, E> {
    crate::syntax::concat(inner, outer)
}

/// Runs `program` at level 1 with `F`/`#` semantics.
pub fn run(program: &Term, fuel: u64, trace: bool) -> Run<Term> {
    subst::run_with(program, 1, fuel, trace, Control::Dynamic, |_, _| {})
}

/// True when the next transition from `c` applies a captured context.
pub fn resumes(c: &SConfig) -> bool {
    match c {
        Config::Cont { level: 1, tower, .. } => matches!(tower.frames.last(), Some(Frame::Fun(Term::Captured(_)))),
        _ => false,
    }
}

/// Number of captured-context applications in a static level-1 run.
pub fn count_resumes(program: &Term, fuel: u64) -> u64 {
    let mut count = 0;
    subst::run_with(program, 1, fuel, false, Control::Static, |_, c| count += resumes(c) as u64);
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::Outcome;
    use crate::syntax::parse_term;

    #[test]
    fn concat_clauses() {
        let empty: Frames<Term, ()> = Vec::new();
        let c2: Frames<Term, ()> = vec![Frame::Succ, Frame::Fun(Term::lit(1))];
        assert_eq!(concat_ctx(&empty, &c2), c2);
        let one: Frames<Term, ()> = vec![Frame::Succ];
        let got = concat_ctx(&one, &c2);
        // SUCC becomes the innermost frame
        assert_eq!(got.last(), Some(&Frame::Succ));
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn static_and_dynamic_differ_on_reinstated_contexts() {
        // with shift, the second capture only sees the resumed context
        let t = parse_term("(reset 1 (add 1 (add (shift 1 (k) (add 10 (k 0))) (shift 1 (k2) 100))))").unwrap();
        assert_eq!(subst::run(&t, 1, 1000, false).outcome, Outcome::Value(Term::lit(110)));
        // with F, the second capture also removes `add 10`
        assert_eq!(run(&t, 1000, false).outcome, Outcome::Value(Term::lit(100)));
        assert_eq!(count_resumes(&t, 1000), 1);
    }
}
