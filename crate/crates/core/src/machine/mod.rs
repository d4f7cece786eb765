//! The abstract machines. Both work on configurations
//! `⟨t, e, C_1, …, C_{n+1}⟩_eval`, `⟨C_i, v, C_{i+1}, …⟩_cont_i` and final
//! values; the tower in a `Cont` configuration keeps all `n + 1` levels,
//! with levels below `i` empty.

pub mod env;
pub mod realize;
pub mod subst;

use crate::outcome::{Outcome, Stuck};
use crate::syntax::{print_term, print_tower_levels, TermRef, Tower};

#[derive(Clone, Debug, PartialEq)]
pub enum Config<V, E> {
    Eval { term: TermRef, env: E, tower: Tower<V, E> },
    Cont { level: usize, value: V, tower: Tower<V, E> },
    Final(V),
}

impl<V, E> Config<V, E> {
    pub fn tower(&self) -> Option<&Tower<V, E>> {
        match self {
            Config::Eval { tower, .. } | Config::Cont { tower, .. } => Some(tower),
            Config::Final(_) => None,
        }
    }

    pub fn is_final(&self) -> bool {
        matches!(self, Config::Final(_))
    }
}

/// Configurations of the substitution machine.
pub type SConfig = Config<crate::syntax::Term, ()>;

/// One trace line: `k: tag | C_{n+1} | … | C_1 [ focus ]`.
pub fn trace_line(k: u64, c: &SConfig) -> String {
    match c {
        Config::Eval { term, tower, .. } => {
            format!("{k}: eval | {} [ {} ]", print_tower_levels(tower), print_term(term))
        }
        Config::Cont { level, value, tower } => {
            format!("{k}: cont{level} | {} [ {} ]", print_tower_levels(tower), print_term(value))
        }
        Config::Final(v) => format!("{k}: final [ {} ]", print_term(v)),
    }
}

/// The part of a trace line between the tag and the focus, split into
/// levels `C_{n+1}, …, C_1`.
pub fn parse_trace_levels(line: &str) -> Option<Vec<&str>> {
    let open = line.find(" [ ")?;
    let mut parts: Vec<&str> = line[..open].split(" | ").collect();
    if parts.len() < 2 {
        return None;
    }
    parts.remove(0);
    Some(parts)
}

/// Number of entries in a printed level (`len:[…]` or `len:{…}`).
pub fn level_len(level: &str) -> Option<usize> {
    level.split(':').next()?.parse().ok()
}

/// Shape of a reachable tower at machine level `n`.
pub fn tower_ok<V, E>(t: &Tower<V, E>, n: usize) -> bool {
    t.height() == n + 1 && t.check_shape()
}

/// The shared run loop. Counts every transition except the final
/// unloading `⟨•, v⟩_cont_{n+1} → v`; times out when more than `fuel`
/// transitions would be needed.
pub(crate) fn drive<V, E>(
    init: Config<V, E>,
    fuel: u64,
    mut step: impl FnMut(Config<V, E>) -> Result<Config<V, E>, Stuck>,
    mut observe: impl FnMut(u64, &Config<V, E>),
) -> (Outcome<V>, u64) {
    let mut cfg = init;
    let mut steps = 0;
    let mut index = 0;
    observe(index, &cfg);
    loop {
        if let Config::Final(v) = cfg {
            return (Outcome::Value(v), steps);
        }
        let unloading = is_unloading(&cfg);
        if !unloading && steps >= fuel {
            return (Outcome::Timeout, steps);
        }
        cfg = match step(cfg) {
            Ok(next) => next,
            Err(s) => return (Outcome::Stuck(s), steps),
        };
        if !unloading {
            steps += 1;
        }
        index += 1;
        observe(index, &cfg);
    }
}

pub(crate) fn is_unloading<V, E>(c: &Config<V, E>) -> bool {
    match c {
        Config::Cont { level, tower, .. } => *level == tower.height() && tower.level_is_empty(*level),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_levels_parse() {
        let line = "3: cont1 | 1:{<0:[]>} | 2:[SUCC, ARG(1)] [ 5 ]";
        let levels = parse_trace_levels(line).unwrap();
        assert_eq!(levels, vec!["1:{<0:[]>}", "2:[SUCC, ARG(1)]"]);
        assert_eq!(level_len(levels[0]), Some(1));
        assert_eq!(level_len(levels[1]), Some(2));
        assert_eq!(parse_trace_levels("9: final [ 1 ]"), None);
    }
}
