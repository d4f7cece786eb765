//! Evaluation contexts and context towers.
//!
//! A tower of height `h` holds the levels `C_1 .. C_h`. Level 1 is a list of
//! frames; level `j >= 2` is a stack whose entries are towers of height
//! `j - 1`. This is the flattened form of the nested composites
//! `C_j · (… (C_2 · C_1) …)` that `reset_i` pushes and `shift_i` captures.
//! A machine at hierarchy level `n` works on a tower of height `n + 1`.

use std::collections::BTreeSet;

use super::{collect_free, Name, Term, TermRef};

/// One evaluation-context frame. `V` is the backend's value type and `E` its
/// environment type (`()` for the substitution-based backends).
#[derive(Clone, Debug, PartialEq)]
pub enum Frame<V, E> {
    /// Evaluating the operator; the operand is pending.
    Arg(TermRef, E),
    /// Evaluating the operand of an application of `V`.
    Fun(V),
    Succ,
    ConsHead(TermRef, E),
    ConsTail(V),
    AddLeft(TermRef, E),
    AddRight(V),
    GtLeft(TermRef, E),
    GtRight(V),
    If0 {
        then: TermRef,
        other: TermRef,
        env: E,
    },
    LCase {
        nil: TermRef,
        head: Name,
        tail: Name,
        cons: TermRef,
        env: E,
    },
    Let {
        var: Name,
        body: TermRef,
        env: E,
    },
}

impl<V, E> Frame<V, E> {
    pub fn tag(&self) -> &'static str {
        match self {
            Frame::Arg(..) => "ARG",
            Frame::Fun(_) => "FUN",
            Frame::Succ => "SUCC",
            Frame::ConsHead(..) => "CONS1",
            Frame::ConsTail(_) => "CONS",
            Frame::AddLeft(..) => "ADD1",
            Frame::AddRight(_) => "ADD2",
            Frame::GtLeft(..) => "GT1",
            Frame::GtRight(_) => "GT2",
            Frame::If0 { .. } => "IF0",
            Frame::LCase { .. } => "LCASE",
            Frame::Let { .. } => "LET",
        }
    }
}

/// A level-1 context: a frame list stored innermost-last so that pushing
/// and popping the innermost frame is cheap.
pub type Frames<V, E> = Vec<Frame<V, E>>;

/// Concatenates two level-1 contexts: `inner ★ outer`, where the result's
/// hole is `inner`'s hole and `outer` surrounds `inner`'s outermost frame.
pub fn concat<V: Clone, E: Clone>(inner: &Frames<V, E>, outer: &Frames<V, E>) -> Frames<V, E> {
    let mut out = outer.clone();
    out.extend(inner.iter().cloned());
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tower<V, E> {
    /// `C_1`, innermost frame last.
    pub frames: Frames<V, E>,
    /// `stacks[j - 2]` is `C_j`; the top of each stack is its last element.
    pub stacks: Vec<Vec<Tower<V, E>>>,
}

pub type SubstFrame = Frame<Term, ()>;
pub type SubstTower = Tower<Term, ()>;

impl<V, E> Tower<V, E> {
    /// The tower of height `h` whose levels are all empty.
    pub fn empty(h: usize) -> Self {
        assert!(h >= 1, "towers have at least one level");
        Tower {
            frames: Vec::new(),
            stacks: (1..h).map(|_| Vec::new()).collect(),
        }
    }

    pub fn height(&self) -> usize {
        self.stacks.len() + 1
    }

    /// Stack `C_j` for `j >= 2`.
    pub fn stack(&self, j: usize) -> &Vec<Tower<V, E>> {
        &self.stacks[j - 2]
    }

    pub fn stack_mut(&mut self, j: usize) -> &mut Vec<Tower<V, E>> {
        &mut self.stacks[j - 2]
    }

    /// True when level `j` is empty.
    pub fn level_is_empty(&self, j: usize) -> bool {
        if j == 1 {
            self.frames.is_empty()
        } else {
            self.stack(j).is_empty()
        }
    }

    pub fn is_empty(&self) -> bool {
        (1..=self.height()).all(|j| self.level_is_empty(j))
    }

    /// Removes levels `1..=i` and returns them as a tower of height `i`,
    /// leaving those levels empty.
    pub fn take_lower(&mut self, i: usize) -> Tower<V, E> {
        debug_assert!(i >= 1 && i <= self.height());
        Tower {
            frames: std::mem::take(&mut self.frames),
            stacks: self.stacks[..i - 1].iter_mut().map(std::mem::take).collect(),
        }
    }

    /// Replaces levels `1..=lower.height()` with `lower`'s levels.
    pub fn install_lower(&mut self, lower: Tower<V, E>) {
        debug_assert!(lower.height() <= self.height());
        self.frames = lower.frames;
        for (slot, s) in self.stacks.iter_mut().zip(lower.stacks) {
            *slot = s;
        }
    }

    /// The `reset_i` transition on contexts: the composite of levels
    /// `1..=i` is pushed onto `C_{i+1}` and those levels become empty.
    pub fn reset(&mut self, i: usize) {
        let lower = self.take_lower(i);
        self.stack_mut(i + 1).push(lower);
    }

    /// The `shift_i` transition on contexts: levels `1..=i` are removed and
    /// returned as the captured context.
    pub fn capture(&mut self, i: usize) -> Tower<V, E> {
        self.take_lower(i)
    }

    /// Applying a captured context of height `i`: the current composite of
    /// levels `1..=i` is pushed onto `C_{i+1}` and the captured levels are
    /// installed in its place.
    pub fn resume(&mut self, captured: Tower<V, E>) {
        let i = captured.height();
        self.reset(i);
        self.install_lower(captured);
    }

    /// Pops the top of `C_j` (`j >= 2`) into levels `1..j`, which must be
    /// empty. Returns false when `C_j` is empty.
    pub fn pop_level(&mut self, j: usize) -> bool {
        match self.stack_mut(j).pop() {
            Some(top) => {
                debug_assert!((1..j).all(|l| self.level_is_empty(l)));
                self.install_lower(top);
                true
            }
            None => false,
        }
    }

    /// Checks the reachable-shape invariant: every entry of `C_j` is a tower
    /// of height `j - 1`, recursively.
    pub fn check_shape(&self) -> bool {
        self.stacks.iter().enumerate().all(|(idx, stack)| {
            let want = idx + 1;
            stack.iter().all(|t| t.height() == want && t.check_shape())
        })
    }

    /// Total number of frames, counting nested towers.
    pub fn frame_count(&self) -> usize {
        self.frames.len()
            + self
                .stacks
                .iter()
                .flat_map(|s| s.iter())
                .map(Tower::frame_count)
                .sum::<usize>()
    }

    /// Translates every frame, preserving the tower's shape.
    pub fn try_map<V2, E2, X>(
        &self,
        f: &mut impl FnMut(&Frame<V, E>) -> Result<Frame<V2, E2>, X>,
    ) -> Result<Tower<V2, E2>, X> {
        let frames = self.frames.iter().map(&mut *f).collect::<Result<_, _>>()?;
        let stacks = self
            .stacks
            .iter()
            .map(|s| s.iter().map(|t| t.try_map(f)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        Ok(Tower { frames, stacks })
    }
}

impl SubstTower {
    pub(crate) fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        for f in &self.frames {
            frame_free(f, bound, out);
        }
        for t in self.stacks.iter().flat_map(|s| s.iter()) {
            t.collect_free(bound, out);
        }
    }
}

fn frame_free(f: &SubstFrame, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match f {
        Frame::Succ => {}
        Frame::Arg(t, ()) | Frame::ConsHead(t, ()) | Frame::AddLeft(t, ()) | Frame::GtLeft(t, ()) => {
            collect_free(t, bound, out)
        }
        Frame::Fun(v) | Frame::ConsTail(v) | Frame::AddRight(v) | Frame::GtRight(v) => collect_free(v, bound, out),
        Frame::If0 { then, other, .. } => {
            collect_free(then, bound, out);
            collect_free(other, bound, out);
        }
        Frame::LCase {
            nil, head, tail, cons, ..
        } => {
            collect_free(nil, bound, out);
            let mark = bound.len();
            bound.push(head.clone());
            bound.push(tail.clone());
            collect_free(cons, bound, out);
            bound.truncate(mark);
        }
        Frame::Let { var, body, .. } => {
            let mark = bound.len();
            bound.push(var.clone());
            collect_free(body, bound, out);
            bound.truncate(mark);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type T = Tower<i64, ()>;

    fn with_frames(h: usize, fs: &[i64]) -> T {
        let mut t = T::empty(h);
        t.frames = fs.iter().map(|&v| Frame::Fun(v)).collect();
        t
    }

    #[test]
    fn reset_pushes_composite_and_clears_lower_levels() {
        let mut t = with_frames(3, &[1, 2]);
        t.reset(2);
        assert!(t.frames.is_empty());
        assert!(t.stack(2).is_empty());
        assert_eq!(t.stack(3).len(), 1);
        assert_eq!(t.stack(3)[0].height(), 2);
        assert_eq!(t.stack(3)[0].frames.len(), 2);
        assert!(t.check_shape());
    }

    #[test]
    fn resume_then_unwind_restores_the_outer_context() {
        let mut t = with_frames(2, &[7]);
        let captured = with_frames(1, &[8, 9]);
        t.resume(captured.clone());
        assert_eq!(t.frames, captured.frames);
        t.frames.clear();
        assert!(t.pop_level(2));
        assert_eq!(t.frames, vec![Frame::Fun(7)]);
        assert!(!t.pop_level(2));
    }

    #[test]
    fn concat_places_inner_frames_innermost() {
        let inner: Frames<i64, ()> = vec![Frame::Fun(1)];
        let outer: Frames<i64, ()> = vec![Frame::Fun(2), Frame::Fun(3)];
        assert_eq!(concat(&inner, &outer), vec![Frame::Fun(2), Frame::Fun(3), Frame::Fun(1)]);
        assert_eq!(concat(&Vec::new(), &outer), outer);
    }
}
