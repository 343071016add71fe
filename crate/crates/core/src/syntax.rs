//! Abstract syntax of processes, binding structure and fragment classification.

use std::collections::BTreeSet;

use crate::error::WellFormedError;
use crate::name::Name;

/// An action prefix of a guarded sum branch.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prefix {
    Output { channel: Name, datum: Name },
    Input { channel: Name, binder: Name },
    Tau,
}

impl Prefix {
    pub fn is_input(&self) -> bool {
        matches!(self, Prefix::Input { .. })
    }

    pub fn is_output(&self) -> bool {
        matches!(self, Prefix::Output { .. })
    }

    /// The prefix if it binds a name; `x?()` binds nothing.
    pub fn binding(self) -> Option<Prefix> {
        match &self {
            Prefix::Input { binder, .. } if !binder.is_unit() => Some(self),
            _ => None,
        }
    }
}

/// One `prefix . body` alternative of a sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub prefix: Prefix,
    pub body: Process,
}

/// A process term. The empty sum is the inert process `0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Sum(Vec<Branch>),
    /// Parallel composition of at least two components.
    Par(Vec<Process>),
    Res(Name, Box<Process>),
    Rep(Box<Process>),
    /// The success marker.
    Success,
}

/// The tightest calculus fragment a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Fragment {
    ChoiceFree,
    SeparateChoice,
    Mixed,
}

impl Fragment {
    /// True for terms without mixed choice.
    pub fn is_separate(self) -> bool {
        !matches!(self, Fragment::Mixed)
    }
}

impl Process {
    pub fn nil() -> Self {
        Process::Sum(Vec::new())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Sum(b) if b.is_empty())
    }

    pub fn prefixed(prefix: Prefix, body: Process) -> Self {
        Process::Sum(vec![Branch { prefix, body }])
    }

    pub fn output(channel: impl Into<Name>, datum: impl Into<Name>, body: Process) -> Self {
        Process::prefixed(
            Prefix::Output {
                channel: channel.into(),
                datum: datum.into(),
            },
            body,
        )
    }

    pub fn input(channel: impl Into<Name>, binder: impl Into<Name>, body: Process) -> Self {
        Process::prefixed(
            Prefix::Input {
                channel: channel.into(),
                binder: binder.into(),
            },
            body,
        )
    }

    pub fn tau(body: Process) -> Self {
        Process::prefixed(Prefix::Tau, body)
    }

    /// Parallel composition; a single component is returned as is, none gives `0`.
    pub fn par(mut components: Vec<Process>) -> Self {
        match components.len() {
            0 => Process::nil(),
            1 => components.pop().unwrap(),
            _ => Process::Par(components),
        }
    }

    pub fn res(binder: impl Into<Name>, body: Process) -> Self {
        Process::Res(binder.into(), Box::new(body))
    }

    /// `(ν x₁)…(ν xₖ) body`, outermost first.
    pub fn res_all(binders: &[Name], body: Process) -> Self {
        binders
            .iter()
            .rev()
            .fold(body, |acc, x| Process::Res(x.clone(), Box::new(acc)))
    }

    pub fn rep(body: Process) -> Self {
        Process::Rep(Box::new(body))
    }

    /// Number of AST nodes (prefixes count as nodes).
    pub fn size(&self) -> usize {
        match self {
            Process::Sum(bs) if bs.is_empty() => 1,
            Process::Sum(bs) => bs.iter().map(|b| 1 + b.body.size()).sum::<usize>(),
            Process::Par(ps) => 1 + ps.iter().map(Process::size).sum::<usize>(),
            Process::Res(_, p) | Process::Rep(p) => 1 + p.size(),
            Process::Success => 1,
        }
    }

    /// Splits off the outermost restrictions.
    pub fn strip_restrictions(&self) -> (Vec<Name>, &Process) {
        let mut names = Vec::new();
        let mut cur = self;
        while let Process::Res(x, body) = cur {
            names.push(x.clone());
            cur = body;
        }
        (names, cur)
    }

    /// Top-level parallel components (a non-parallel term is its own single component).
    pub fn components(&self) -> &[Process] {
        match self {
            Process::Par(ps) => ps,
            other => std::slice::from_ref(other),
        }
    }
}

/// Free names of `p`.
pub fn free_names(p: &Process) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut Vec::new(), &mut out);
    out
}

fn collect_free(p: &Process, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let note = |n: &Name, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
        if !bound.contains(n) {
            out.insert(n.clone());
        }
    };
    match p {
        Process::Sum(bs) => {
            for b in bs {
                match &b.prefix {
                    Prefix::Output { channel, datum } => {
                        note(channel, bound, out);
                        if !datum.is_unit() {
                            note(datum, bound, out);
                        }
                        collect_free(&b.body, bound, out);
                    }
                    Prefix::Input { channel, binder } if binder.is_unit() => {
                        note(channel, bound, out);
                        collect_free(&b.body, bound, out);
                    }
                    Prefix::Input { channel, binder } => {
                        note(channel, bound, out);
                        bound.push(binder.clone());
                        collect_free(&b.body, bound, out);
                        bound.pop();
                    }
                    Prefix::Tau => collect_free(&b.body, bound, out),
                }
            }
        }
        Process::Par(ps) => ps.iter().for_each(|q| collect_free(q, bound, out)),
        Process::Res(x, q) => {
            bound.push(x.clone());
            collect_free(q, bound, out);
            bound.pop();
        }
        Process::Rep(q) => collect_free(q, bound, out),
        Process::Success => {}
    }
}

/// Every binder occurring in `p`, in pre-order, duplicates included.
pub fn binders(p: &Process) -> Vec<Name> {
    let mut out = Vec::new();
    collect_binders(p, &mut out);
    out
}

fn collect_binders(p: &Process, out: &mut Vec<Name>) {
    match p {
        Process::Sum(bs) => {
            for b in bs {
                match &b.prefix {
                    Prefix::Input { binder, .. } if !binder.is_unit() => out.push(binder.clone()),
                    _ => {}
                }
                collect_binders(&b.body, out);
            }
        }
        Process::Par(ps) => ps.iter().for_each(|q| collect_binders(q, out)),
        Process::Res(x, q) => {
            out.push(x.clone());
            collect_binders(q, out);
        }
        Process::Rep(q) => collect_binders(q, out),
        Process::Success => {}
    }
}

/// Bound names of `p`: every input and restriction binder.
pub fn bound_names(p: &Process) -> BTreeSet<Name> {
    binders(p).into_iter().collect()
}

/// All names occurring in `p`, free or bound.
pub fn all_names(p: &Process) -> BTreeSet<Name> {
    let mut out = free_names(p);
    out.extend(binders(p));
    out
}

/// Strict well-formedness: binders pairwise distinct and disjoint from the free names.
pub fn well_formed(p: &Process) -> Result<(), WellFormedError> {
    let fns = free_names(p);
    let mut seen = BTreeSet::new();
    for b in binders(p) {
        if fns.contains(&b) {
            return Err(WellFormedError::BoundAndFree(b));
        }
        if !seen.insert(b.clone()) {
            return Err(WellFormedError::DuplicateBinder(b));
        }
    }
    Ok(())
}

/// The binding discipline the transition system relies on: no name is both free
/// and bound, and no binder shadows an enclosing one. Binders may repeat in
/// disjoint scopes, which symmetric networks need.
pub fn check_hygiene(p: &Process) -> Result<(), WellFormedError> {
    let fns = free_names(p);
    hygiene_walk(p, &fns, &mut Vec::new())
}

fn hygiene_walk(
    p: &Process,
    fns: &BTreeSet<Name>,
    scope: &mut Vec<Name>,
) -> Result<(), WellFormedError> {
    let enter = |b: &Name, scope: &Vec<Name>| -> Result<(), WellFormedError> {
        if fns.contains(b) {
            Err(WellFormedError::BoundAndFree(b.clone()))
        } else if scope.contains(b) {
            Err(WellFormedError::Shadowed(b.clone()))
        } else {
            Ok(())
        }
    };
    match p {
        Process::Sum(bs) => {
            for b in bs {
                if let Some(Prefix::Input { binder, .. }) = b.prefix.clone().binding() {
                    enter(&binder, scope)?;
                    scope.push(binder.clone());
                    hygiene_walk(&b.body, fns, scope)?;
                    scope.pop();
                } else {
                    hygiene_walk(&b.body, fns, scope)?;
                }
            }
            Ok(())
        }
        Process::Par(ps) => ps.iter().try_for_each(|q| hygiene_walk(q, fns, scope)),
        Process::Res(x, q) => {
            enter(x, scope)?;
            scope.push(x.clone());
            let r = hygiene_walk(q, fns, scope);
            scope.pop();
            r
        }
        Process::Rep(q) => hygiene_walk(q, fns, scope),
        Process::Success => Ok(()),
    }
}

/// The tightest fragment containing `p`.
pub fn classify(p: &Process) -> Fragment {
    let mut frag = Fragment::ChoiceFree;
    classify_walk(p, &mut frag);
    frag
}

fn classify_walk(p: &Process, frag: &mut Fragment) {
    match p {
        Process::Sum(bs) => {
            let has_in = bs.iter().any(|b| b.prefix.is_input());
            let has_out = bs.iter().any(|b| b.prefix.is_output());
            let here = if has_in && has_out {
                Fragment::Mixed
            } else if bs.len() > 1 {
                Fragment::SeparateChoice
            } else {
                Fragment::ChoiceFree
            };
            *frag = (*frag).max(here);
            bs.iter().for_each(|b| classify_walk(&b.body, frag));
        }
        Process::Par(ps) => ps.iter().for_each(|q| classify_walk(q, frag)),
        Process::Res(_, q) | Process::Rep(q) => classify_walk(q, frag),
        Process::Success => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn names(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(Name::new).collect()
    }

    #[test]
    fn free_names_examples() {
        assert_eq!(free_names(&parse("x!y . 0").unwrap()), names(&["x", "y"]));
        assert_eq!(free_names(&parse("new z . x!z . 0").unwrap()), names(&["x"]));
        let p = parse("x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0").unwrap();
        assert_eq!(
            free_names(&p),
            names(&["x", "y", "out", "1", "2"])
        );
    }

    #[test]
    fn bound_names_examples() {
        assert!(bound_names(&parse("x!y . 0").unwrap()).is_empty());
        assert_eq!(bound_names(&parse("x?(z) . z!y . 0").unwrap()), names(&["z"]));
        assert_eq!(
            bound_names(&parse("new x . a!x . x!u . 0").unwrap()),
            names(&["x"])
        );
    }

    #[test]
    fn well_formed_examples() {
        assert_eq!(
            well_formed(&parse("x?(z) . 0 | y?(z) . 0").unwrap()),
            Err(WellFormedError::DuplicateBinder(Name::new("z")))
        );
        // z is free on the right, so parse it without the hygiene check
        let p = Process::par(vec![
            Process::input("x", "z", Process::nil()),
            Process::output("z", "a", Process::nil()),
        ]);
        assert_eq!(well_formed(&p), Err(WellFormedError::BoundAndFree(Name::new("z"))));
        let ok = parse("(new x . a!x . x!u . 0) | (new x' . a!x' . x'!u . 0)").unwrap();
        assert_eq!(well_formed(&ok), Ok(()));
    }

    #[test]
    fn hygiene_allows_disjoint_duplicates_only() {
        let dup = parse("(new x . a!x . 0) | (new x . a!x . 0)").unwrap();
        assert!(well_formed(&dup).is_err());
        assert!(check_hygiene(&dup).is_ok());
        let shadow = Process::res("x", Process::res("x", Process::nil()));
        assert_eq!(check_hygiene(&shadow), Err(WellFormedError::Shadowed(Name::new("x"))));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&parse("a?() . 0 + a! . 0").unwrap()), Fragment::Mixed);
        assert_eq!(
            classify(&parse("a?() . 0 + b?() . 0").unwrap()),
            Fragment::SeparateChoice
        );
        assert_eq!(classify(&Process::nil()), Fragment::ChoiceFree);
        assert_eq!(
            classify(&parse("tau . 0 + a! . 0 + b!c . 0").unwrap()),
            Fragment::SeparateChoice
        );
    }
}
