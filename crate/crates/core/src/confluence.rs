//! Local confluence of a sending and a receiving step.

use std::collections::BTreeSet;

use crate::canon::canonical;
use crate::error::CheckError;
use crate::label::Label;
use crate::name::Name;
use crate::semantics::{transitions, transitions_with, StepOptions, Transition};
use crate::syntax::{classify, Process};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfluenceVerdict {
    Holds,
    /// The two steps whose square does not close, and the states they reach.
    Counterexample {
        output: Label,
        input: Label,
        after_output: Process,
        after_input: Process,
    },
}

impl ConfluenceVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ConfluenceVerdict::Holds)
    }
}

/// For every output step and every input step of `p`, checks that each can
/// still be taken after the other and that both orders meet up to congruence.
pub fn check_local_confluence(p: &Process, universe: &BTreeSet<Name>) -> Result<ConfluenceVerdict, CheckError> {
    if !classify(p).is_separate() {
        return Err(CheckError::NotSeparate);
    }
    check_local_confluence_unchecked(p, universe)
}

/// [`check_local_confluence`] without the separate-choice precondition.
pub fn check_local_confluence_unchecked(
    p: &Process,
    universe: &BTreeSet<Name>,
) -> Result<ConfluenceVerdict, CheckError> {
    let ts = transitions(p, universe)?;
    let outs: Vec<&Transition> = ts.iter().filter(|t| t.label.is_output()).collect();
    let ins: Vec<&Transition> = ts.iter().filter(|t| t.label.is_input()).collect();
    for o in &outs {
        for i in &ins {
            if !square_closes(o, i)? {
                return Ok(ConfluenceVerdict::Counterexample {
                    output: o.label.clone(),
                    input: i.label.clone(),
                    after_output: o.target.clone(),
                    after_input: i.target.clone(),
                });
            }
        }
    }
    Ok(ConfluenceVerdict::Holds)
}

/// Steps from `q` with the same label as `like`; bound outputs match on their
/// subject, the object being chosen afresh.
fn matching(q: &Process, like: &Label) -> Result<Vec<Transition>, CheckError> {
    let opts = match like {
        Label::FreeInput { object, .. } => StepOptions::objects([object.clone()].into_iter().collect()),
        _ => StepOptions::default(),
    };
    Ok(transitions_with(q, &opts)?
        .into_iter()
        .filter(|t| match (like, &t.label) {
            (Label::BoundOutput { subject, .. }, Label::BoundOutput { subject: s2, .. }) => subject == s2,
            _ => &t.label == like,
        })
        .collect())
}

/// Closes the extruded name so targets compare up to its choice.
fn closed(t: &Transition, extruded: Option<&Name>) -> Process {
    match (extruded, &t.label) {
        (Some(_), Label::BoundOutput { object, .. }) => Process::res(object.clone(), t.target.clone()),
        _ => t.target.clone(),
    }
}

fn square_closes(o: &Transition, i: &Transition) -> Result<bool, CheckError> {
    // output then input
    let via_out = matching(&o.target, &i.label)?;
    // input then output
    let via_in = matching(&i.target, &o.label)?;
    let bound = match &o.label {
        Label::BoundOutput { object, .. } => Some(object),
        _ => None,
    };
    let lhs: BTreeSet<_> = via_out
        .iter()
        .map(|t| {
            let s = match bound {
                Some(y) => Process::res(y.clone(), t.target.clone()),
                None => t.target.clone(),
            };
            canonical(&s)
        })
        .collect();
    Ok(via_in.iter().any(|t| lhs.contains(&canonical(&closed(t, bound)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::syntax::free_names;

    fn check(src: &str) -> Result<ConfluenceVerdict, CheckError> {
        let p = parse(src).unwrap();
        check_local_confluence(&p, &free_names(&p))
    }

    #[test]
    fn examples() {
        assert!(check("x!a . 0 | y?(z) . 0").unwrap().holds());
        assert!(check("0").unwrap().holds());
        assert!(check("(new q . x!q . q! . 0) | x?(z) . z?() . 0").unwrap().holds());
        let p = parse("a?() . 0 + a! . 0").unwrap();
        assert_eq!(check("a?() . 0 + a! . 0"), Err(CheckError::NotSeparate));
        let v = check_local_confluence_unchecked(&p, &free_names(&p)).unwrap();
        assert!(matches!(v, ConfluenceVerdict::Counterexample { .. }));
    }
}
