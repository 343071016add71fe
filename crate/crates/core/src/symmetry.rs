//! Symmetric networks `(νx̃)(P | σP | … | σⁿ⁻¹P)` and their recognition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::canon::canonical;
use crate::error::NetworkError;
use crate::label::Label;
use crate::name::Name;
use crate::subst::{validate_symmetry, Substitution, SymmetryRelation};
use crate::syntax::{bound_names, check_hygiene, free_names, Prefix, Process};

/// The labels of one symmetric round; entry `k` belongs to component `k`
/// positions after the generator.
pub type LabelRound = Vec<Label>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricNetwork {
    restriction: Vec<Name>,
    base: Process,
    relation: SymmetryRelation,
}

impl SymmetricNetwork {
    /// Checks every network invariant; see [`build`].
    pub fn new(
        base: Process,
        relation: SymmetryRelation,
        restriction: Vec<Name>,
    ) -> Result<Self, NetworkError> {
        check_hygiene(&base)?;
        let fns = free_names(&base);
        let mut seen = BTreeSet::new();
        for x in &restriction {
            if !fns.contains(x) {
                return Err(NetworkError::RestrictionNotFree(x.clone()));
            }
            if !seen.insert(x.clone()) {
                return Err(NetworkError::DuplicateRestriction(x.clone()));
            }
        }
        for x in &restriction {
            if !seen.contains(&relation.image(x)) {
                return Err(NetworkError::RestrictionNotClosed(x.clone()));
            }
        }
        validate_symmetry(relation.perm(), relation.degree(), &bound_names(&base))?;
        let net = SymmetricNetwork { restriction, base, relation };
        check_hygiene(&net.denote())?;
        Ok(net)
    }

    /// A network whose invariants are known to hold by construction.
    pub(crate) fn trusted(base: Process, relation: SymmetryRelation, restriction: Vec<Name>) -> Self {
        SymmetricNetwork { restriction, base, relation }
    }

    pub fn restriction(&self) -> &[Name] {
        &self.restriction
    }

    pub fn base(&self) -> &Process {
        &self.base
    }

    pub fn relation(&self) -> &SymmetryRelation {
        &self.relation
    }

    pub fn degree(&self) -> usize {
        self.relation.degree()
    }

    /// `σⁱ(P)`.
    pub fn component(&self, i: usize) -> Process {
        self.relation.act(i % self.degree(), &self.base)
    }

    pub fn components(&self) -> Vec<Process> {
        (0..self.degree()).map(|i| self.component(i)).collect()
    }

    /// The denoted term. With degree 1 the body is the base itself.
    pub fn denote(&self) -> Process {
        Process::res_all(&self.restriction, Process::par(self.components()))
    }

    /// The same base and restriction over another degree; `σ` must still be a
    /// symmetry relation of that degree.
    pub fn with_degree(&self, degree: usize) -> Result<SymmetricNetwork, NetworkError> {
        let relation = self.relation.with_degree(degree)?;
        let fns: BTreeSet<Name> = (0..degree)
            .flat_map(|i| free_names(&relation.act(i, &self.base)))
            .collect();
        let restriction = self
            .restriction
            .iter()
            .filter(|x| fns.contains(*x))
            .cloned()
            .collect();
        SymmetricNetwork::new(self.base.clone(), relation, restriction)
    }
}

impl fmt::Display for SymmetricNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.denote().fmt(f)
    }
}

/// Builds a network and returns it with its denoted term.
pub fn build(
    base: Process,
    sigma: SymmetryRelation,
    restriction: Vec<Name>,
) -> Result<(SymmetricNetwork, Process), NetworkError> {
    let net = SymmetricNetwork::new(base, sigma, restriction)?;
    let term = net.denote();
    Ok((net, term))
}

/// The denoted term with the listed components exchanged.
pub fn indexed_substitute(
    net: &SymmetricNetwork,
    replacements: &[(usize, Process)],
) -> Result<Process, NetworkError> {
    let mut comps = net.components();
    let mut seen = BTreeSet::new();
    for (i, q) in replacements {
        if *i >= comps.len() {
            return Err(NetworkError::IndexOutOfRange(*i));
        }
        if !seen.insert(*i) {
            return Err(NetworkError::DuplicateIndex(*i));
        }
        comps[*i] = q.clone();
    }
    Ok(Process::res_all(&net.restriction, Process::par(comps)))
}

/// `μ, σ(μ), …, σⁿ⁻¹(μ)` with input objects kept and bound outputs turned
/// free once their object has left `restriction`.
pub fn symmetric_action_sequence(
    mu: &Label,
    sigma: &SymmetryRelation,
    restriction: &[Name],
) -> LabelRound {
    let n = sigma.degree();
    let mut out = vec![mu.clone()];
    let mut extruded: BTreeSet<Name> = BTreeSet::new();
    if let Label::BoundOutput { object, .. } = mu {
        extruded.insert(object.clone());
    }
    for k in 1..n {
        let s = sigma.power(k);
        let l = match mu {
            Label::Tau => Label::Tau,
            Label::FreeInput { subject, object } => Label::FreeInput {
                subject: s.get(subject),
                object: object.clone(),
            },
            Label::FreeOutput { subject, object } => Label::FreeOutput {
                subject: s.get(subject),
                object: s.get(object),
            },
            Label::BoundOutput { subject, object } => {
                let img = s.get(object);
                let still = restriction.contains(&img) && !extruded.contains(&img);
                extruded.insert(img.clone());
                if still {
                    Label::BoundOutput { subject: s.get(subject), object: img }
                } else {
                    Label::FreeOutput { subject: s.get(subject), object: img }
                }
            }
        };
        out.push(l);
    }
    out
}

/// Splits `term` as `(ν restriction) body` with exactly those names, then into
/// `n` components.
fn split<'a>(term: &'a Process, restriction: &[Name], n: usize) -> Option<Vec<&'a Process>> {
    let mut cur = term;
    for x in restriction {
        match cur {
            Process::Res(y, body) if y == x => cur = body,
            _ => return None,
        }
    }
    if n == 1 {
        return Some(vec![cur]);
    }
    match cur {
        Process::Par(ps) if ps.len() == n => Some(ps.iter().collect()),
        _ => None,
    }
}

/// Syntactic recognition: components are successive images under `σ`, no
/// alpha-renaming allowed.
pub fn is_symmetric(term: &Process, sigma: &SymmetryRelation, restriction: &[Name]) -> bool {
    let n = sigma.degree();
    let Some(comps) = split(term, restriction, n) else {
        return false;
    };
    (0..n).all(|k| *comps[(k + 1) % n] == sigma.perm().permute(comps[k]))
}

/// Recognition up to structural congruence of components. For diagnostics.
pub fn is_symmetric_lenient(term: &Process, sigma: &SymmetryRelation, restriction: &[Name]) -> bool {
    let n = sigma.degree();
    let Some(comps) = split(term, restriction, n) else {
        return false;
    };
    (0..n).all(|k| canonical(comps[(k + 1) % n]) == canonical(&sigma.perm().permute(comps[k])))
}

/// Every name occurrence in pre-order, binders included.
pub fn name_positions(p: &Process) -> Vec<Name> {
    fn walk(p: &Process, out: &mut Vec<Name>) {
        match p {
            Process::Sum(bs) => {
                for b in bs {
                    match &b.prefix {
                        Prefix::Output { channel, datum } => {
                            out.push(channel.clone());
                            out.push(datum.clone());
                        }
                        Prefix::Input { channel, binder } => {
                            out.push(channel.clone());
                            out.push(binder.clone());
                        }
                        Prefix::Tau => {}
                    }
                    walk(&b.body, out);
                }
            }
            Process::Par(ps) => ps.iter().for_each(|q| walk(q, out)),
            Process::Res(x, q) => {
                out.push(x.clone());
                walk(q, out);
            }
            Process::Rep(q) => walk(q, out),
            Process::Success => {}
        }
    }
    let mut out = Vec::new();
    walk(p, &mut out);
    out
}

/// Adds `a ↦ b` to `map`, failing on a conflict with an earlier entry.
pub(crate) fn align_into(map: &mut BTreeMap<Name, Name>, a: &Name, b: &Name) -> bool {
    match map.get(a) {
        Some(prev) => prev == b,
        None => {
            map.insert(a.clone(), b.clone());
            true
        }
    }
}

/// Aligns name positions of consecutive components (cyclically).
pub(crate) fn align_components(comps: &[&Process], map: &mut BTreeMap<Name, Name>) -> bool {
    let n = comps.len();
    let positions: Vec<Vec<Name>> = comps.iter().map(|c| name_positions(c)).collect();
    for k in 0..n {
        let (a, b) = (&positions[k], &positions[(k + 1) % n]);
        if a.len() != b.len() {
            return false;
        }
        for (x, y) in a.iter().zip(b) {
            if !align_into(map, x, y) {
                return false;
            }
        }
    }
    true
}

/// Finds `σ` and `x̃` making `term` a symmetric network of the given degree.
///
/// Aligning name positions of consecutive components determines `σ` on every
/// occurring name, so there is at most one candidate.
pub fn discover_symmetry(term: &Process, degree: usize) -> Option<(SymmetryRelation, Vec<Name>)> {
    if degree == 0 {
        return None;
    }
    let (restriction, body) = term.strip_restrictions();
    let comps: Vec<&Process> = if degree == 1 {
        vec![body]
    } else {
        match body {
            Process::Par(ps) if ps.len() == degree => ps.iter().collect(),
            _ => return None,
        }
    };
    let mut map = BTreeMap::new();
    if !align_components(&comps, &mut map) {
        return None;
    }
    let relation = SymmetryRelation::new(Substitution::from_pairs(map), degree).ok()?;
    is_symmetric(term, &relation, &restriction).then_some((relation, restriction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn rel(lit: &str, d: usize) -> SymmetryRelation {
        SymmetryRelation::new(lit.parse().unwrap(), d).unwrap()
    }

    const NET1: &str = "x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0";

    #[test]
    fn build_examples() {
        let p = parse(NET1).unwrap();
        let (_, term) = build(p.clone(), rel("x>y,y>x", 2), vec![]).unwrap();
        let sp = parse("y! . 0 | y?() . out!1 . 0 + x?() . out!2 . 0").unwrap();
        assert_eq!(term, Process::Par(vec![p, sp]));

        let p = parse("x! . 1! . 0 + y?() . 2! . 0").unwrap();
        let (_, term) = build(p, rel("x>y,y>x,1>2,2>1", 2), vec![n("x"), n("y")]).unwrap();
        assert_eq!(
            term,
            parse("new x,y . (x! . 1! . 0 + y?() . 2! . 0 | y! . 2! . 0 + x?() . 1! . 0)").unwrap()
        );

        let q = parse("a!b . 0").unwrap();
        let (_, term) = build(q.clone(), SymmetryRelation::identity(2), vec![]).unwrap();
        assert_eq!(term, Process::Par(vec![q.clone(), q]));
    }

    #[test]
    fn build_errors() {
        let p = parse("x! . 0").unwrap();
        assert_eq!(
            build(p.clone(), SymmetryRelation::identity(2), vec![n("z")]).unwrap_err(),
            NetworkError::RestrictionNotFree(n("z"))
        );
        assert_eq!(
            build(p.clone(), SymmetryRelation::identity(2), vec![n("x"), n("x")]).unwrap_err(),
            NetworkError::DuplicateRestriction(n("x"))
        );
        let p = parse("x! . y! . 0").unwrap();
        assert_eq!(
            build(p.clone(), rel("x>y,y>x", 2), vec![n("x")]).unwrap_err(),
            NetworkError::RestrictionNotClosed(n("x"))
        );
        let p = parse("new z . z! . 0").unwrap();
        assert!(matches!(
            build(p, rel("z>w,w>z", 2), vec![]),
            Err(NetworkError::Symmetry(_))
        ));
    }

    #[test]
    fn indexed_substitution() {
        let p = parse("a!b . 0").unwrap();
        let (net, term) = build(p.clone(), SymmetryRelation::identity(2), vec![]).unwrap();
        assert_eq!(indexed_substitute(&net, &[]).unwrap(), term);
        let h = parse("check").unwrap();
        assert_eq!(
            indexed_substitute(&net, &[(0, h.clone())]).unwrap(),
            Process::Par(vec![h.clone(), p])
        );
        assert_eq!(
            indexed_substitute(&net, &[(2, h.clone())]).unwrap_err(),
            NetworkError::IndexOutOfRange(2)
        );
        assert_eq!(
            indexed_substitute(&net, &[(1, h.clone()), (1, h)]).unwrap_err(),
            NetworkError::DuplicateIndex(1)
        );
    }

    #[test]
    fn action_sequences() {
        let id3 = SymmetryRelation::identity(3);
        assert_eq!(symmetric_action_sequence(&Label::Tau, &id3, &[]), vec![Label::Tau; 3]);
        let l: Label = "a?w".parse().unwrap();
        assert_eq!(
            symmetric_action_sequence(&l, &rel("a>c,c>a", 2), &[]),
            vec![l.clone(), "c?w".parse().unwrap()]
        );
        let l: Label = "u!(z)".parse().unwrap();
        assert_eq!(
            symmetric_action_sequence(&l, &rel("z>z',z'>z", 2), &[n("z"), n("z'")]),
            vec![l.clone(), "u!(z')".parse().unwrap()]
        );
        assert_eq!(
            symmetric_action_sequence(&l, &SymmetryRelation::identity(3), &[n("z")]),
            vec![l.clone(), "u!z".parse().unwrap(), "u!z".parse().unwrap()]
        );
    }

    #[test]
    fn recognition() {
        let p = parse("out!1 . 0 | out!1 . 0").unwrap();
        assert!(is_symmetric(&p, &SymmetryRelation::identity(2), &[]));
        let p = parse("out!1 . 0 | out!2 . 0").unwrap();
        assert!(!is_symmetric(&p, &SymmetryRelation::identity(2), &[]));
        let (_, term) = build(parse(NET1).unwrap(), rel("x>y,y>x", 2), vec![]).unwrap();
        assert!(is_symmetric(&term, &rel("x>y,y>x", 2), &[]));
        assert!(!is_symmetric(&term, &SymmetryRelation::identity(2), &[]));
    }

    #[test]
    fn alpha_is_not_symmetry_but_lenient_accepts() {
        let p = parse("(new x . a!x . 0) | (new w . a!w . 0)").unwrap();
        assert!(!is_symmetric(&p, &SymmetryRelation::identity(2), &[]));
        assert!(is_symmetric_lenient(&p, &SymmetryRelation::identity(2), &[]));
    }

    #[test]
    fn discovery() {
        let p = parse("a! . 0 | a! . 0").unwrap();
        let (r, x) = discover_symmetry(&p, 2).unwrap();
        assert!(r.perm().is_identity());
        assert!(x.is_empty());
        let (_, term) = build(parse(NET1).unwrap(), rel("x>y,y>x", 2), vec![]).unwrap();
        let (r, _) = discover_symmetry(&term, 2).unwrap();
        assert_eq!(r, rel("x>y,y>x", 2));
        let p = parse("x!a . 0 | y!b . 0 | 0").unwrap();
        assert!(discover_symmetry(&p, 3).is_none());
    }
}
