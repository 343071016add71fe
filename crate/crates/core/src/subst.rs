//! Name substitutions, symmetry relations and capture-avoiding renaming.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SymmetryError;
use crate::label::Label;
use crate::name::{FreshSupply, Name};
use crate::syntax::{all_names, free_names, Branch, Prefix, Process};

/// A finite simultaneous renaming; identity outside its support.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Name, Name>,
}

impl Substitution {
    pub fn identity() -> Self {
        Substitution::default()
    }

    /// Builds from `(from, to)` pairs, dropping identity entries.
    pub fn from_pairs<I: IntoIterator<Item = (Name, Name)>>(pairs: I) -> Self {
        let map = pairs.into_iter().filter(|(a, b)| a != b).collect();
        Substitution { map }
    }

    /// `{to/from}` in the usual notation.
    pub fn single(from: impl Into<Name>, to: impl Into<Name>) -> Self {
        Substitution::from_pairs([(from.into(), to.into())])
    }

    pub fn get(&self, n: &Name) -> Name {
        self.map.get(n).cloned().unwrap_or_else(|| n.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn support(&self) -> BTreeSet<Name> {
        self.map.keys().cloned().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Name, &Name)> {
        self.map.iter()
    }

    pub fn range(&self) -> BTreeSet<Name> {
        self.map.values().cloned().collect()
    }

    pub fn is_bijection(&self) -> bool {
        self.first_non_bijective().is_none()
    }

    fn first_non_bijective(&self) -> Option<Name> {
        let mut seen = BTreeSet::new();
        for (k, v) in &self.map {
            if !seen.insert(v.clone()) {
                return Some(k.clone());
            }
            if !self.map.contains_key(v) {
                return Some(v.clone());
            }
        }
        None
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let keys: BTreeSet<Name> = self.map.keys().chain(other.map.keys()).cloned().collect();
        Substitution::from_pairs(keys.into_iter().map(|k| {
            let v = self.get(&other.get(&k));
            (k, v)
        }))
    }

    pub fn inverse(&self) -> Substitution {
        Substitution::from_pairs(self.map.iter().map(|(k, v)| (v.clone(), k.clone())))
    }

    /// Capture-avoiding simultaneous substitution on free names.
    pub fn apply(&self, p: &Process) -> Process {
        if self.is_identity() {
            return p.clone();
        }
        let mut avoid = all_names(p);
        avoid.extend(self.map.keys().cloned());
        avoid.extend(self.map.values().cloned());
        let mut supply = FreshSupply::new(avoid);
        self.apply_with(p, &mut supply)
    }

    /// As [`Substitution::apply`], drawing alpha-renamed binders from `supply`.
    pub fn apply_with(&self, p: &Process, supply: &mut FreshSupply) -> Process {
        for n in self.map.keys().chain(self.map.values()) {
            supply.avoid(n.clone());
        }
        subst(p, &self.map, supply)
    }

    pub fn apply_label(&self, l: &Label) -> Label {
        l.rename(|n| self.get(n))
    }

    /// Renames every occurrence, binders included. Only meaningful for bijections.
    pub fn permute(&self, p: &Process) -> Process {
        rename_all(p, &|n| self.get(n))
    }
}

fn subst(p: &Process, map: &BTreeMap<Name, Name>, supply: &mut FreshSupply) -> Process {
    if map.is_empty() {
        return p.clone();
    }
    let get = |n: &Name| map.get(n).cloned().unwrap_or_else(|| n.clone());
    match p {
        Process::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Output { channel, datum } => Branch {
                        prefix: Prefix::Output {
                            channel: get(channel),
                            datum: get(datum),
                        },
                        body: subst(&b.body, map, supply),
                    },
                    Prefix::Tau => Branch {
                        prefix: Prefix::Tau,
                        body: subst(&b.body, map, supply),
                    },
                    Prefix::Input { channel, binder } => {
                        let (binder, body) = under_binder(binder, &b.body, map, supply);
                        Branch {
                            prefix: Prefix::Input {
                                channel: get(channel),
                                binder,
                            },
                            body,
                        }
                    }
                })
                .collect(),
        ),
        Process::Par(ps) => Process::Par(ps.iter().map(|q| subst(q, map, supply)).collect()),
        Process::Res(x, q) => {
            let (x, body) = under_binder(x, q, map, supply);
            Process::Res(x, Box::new(body))
        }
        Process::Rep(q) => Process::Rep(Box::new(subst(q, map, supply))),
        Process::Success => Process::Success,
    }
}

fn under_binder(
    binder: &Name,
    body: &Process,
    map: &BTreeMap<Name, Name>,
    supply: &mut FreshSupply,
) -> (Name, Process) {
    if binder.is_unit() {
        return (binder.clone(), subst(body, map, supply));
    }
    let mut inner: BTreeMap<Name, Name> = map
        .iter()
        .filter(|(k, _)| *k != binder)
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if inner.is_empty() {
        return (binder.clone(), body.clone());
    }
    let fns = free_names(body);
    let captures = inner
        .iter()
        .any(|(k, v)| v == binder && fns.contains(k));
    if captures {
        let fresh = supply.fresh(binder);
        inner.insert(binder.clone(), fresh.clone());
        (fresh, subst(body, &inner, supply))
    } else {
        (binder.clone(), subst(body, &inner, supply))
    }
}

/// Renames every name occurrence of `p` with `f`, binders included.
pub(crate) fn rename_all(p: &Process, f: &dyn Fn(&Name) -> Name) -> Process {
    match p {
        Process::Sum(bs) => Process::Sum(
            bs.iter()
                .map(|b| Branch {
                    prefix: match &b.prefix {
                        Prefix::Output { channel, datum } => Prefix::Output {
                            channel: f(channel),
                            datum: f(datum),
                        },
                        Prefix::Input { channel, binder } => Prefix::Input {
                            channel: f(channel),
                            binder: f(binder),
                        },
                        Prefix::Tau => Prefix::Tau,
                    },
                    body: rename_all(&b.body, f),
                })
                .collect(),
        ),
        Process::Par(ps) => Process::Par(ps.iter().map(|q| rename_all(q, f)).collect()),
        Process::Res(x, q) => Process::Res(f(x), Box::new(rename_all(q, f))),
        Process::Rep(q) => Process::Rep(Box::new(rename_all(q, f))),
        Process::Success => Process::Success,
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.map.iter().map(|(k, v)| format!("{k}>{v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses a permutation literal such as `x>y,y>x`. The empty string is the identity.
impl FromStr for Substitution {
    type Err = SymmetryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut map = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = part
                .split_once('>')
                .ok_or_else(|| SymmetryError::Literal(format!("`{part}` lacks `>`")))?;
            let (a, b) = (a.trim(), b.trim());
            if !Name::is_valid_token(a) || !Name::is_valid_token(b) {
                return Err(SymmetryError::Literal(format!("bad name in `{part}`")));
            }
            if map.insert(Name::new(a), Name::new(b)).is_some() {
                return Err(SymmetryError::Literal(format!("`{a}` mapped twice")));
            }
        }
        let sub = Substitution::from_pairs(map);
        if let Some(bad) = sub.first_non_bijective() {
            return Err(SymmetryError::NotBijective(bad));
        }
        Ok(sub)
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Substitution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A name permutation with a declared degree `n` such that `σⁿ = id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryRelation {
    perm: Substitution,
    degree: usize,
}

impl SymmetryRelation {
    pub fn new(perm: Substitution, degree: usize) -> Result<Self, SymmetryError> {
        validate_symmetry(&perm, degree, &BTreeSet::new())?;
        Ok(SymmetryRelation { perm, degree })
    }

    pub fn identity(degree: usize) -> Self {
        SymmetryRelation {
            perm: Substitution::identity(),
            degree: degree.max(1),
        }
    }

    pub fn perm(&self) -> &Substitution {
        &self.perm
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn support(&self) -> BTreeSet<Name> {
        self.perm.support()
    }

    pub fn image(&self, n: &Name) -> Name {
        self.perm.get(n)
    }

    /// The `i`-fold composition; `power(0)` is the identity.
    pub fn power(&self, i: usize) -> Substitution {
        power(&self.perm, i)
    }

    /// `σⁱ(p)` as a permutation action on all names.
    pub fn act(&self, i: usize, p: &Process) -> Process {
        self.power(i).permute(p)
    }

    pub fn act_label(&self, i: usize, l: &Label) -> Label {
        self.power(i).apply_label(l)
    }

    /// The orbit of `n`: `n, σ(n), σ²(n), …` until it repeats.
    pub fn orbit(&self, n: &Name) -> Vec<Name> {
        let mut out = vec![n.clone()];
        let mut cur = self.image(n);
        while &cur != n {
            out.push(cur.clone());
            cur = self.image(&cur);
        }
        out
    }

    /// True if `self` agrees with `smaller` on the support of `smaller`.
    pub fn extends(&self, smaller: &SymmetryRelation) -> bool {
        smaller
            .perm
            .pairs()
            .all(|(k, v)| &self.perm.get(k) == v)
    }

    /// Adds the cycle `cycle[0] → cycle[1] → … → cycle[0]`, keeping the degree.
    pub fn extend(&self, cycle: &[Name]) -> Result<SymmetryRelation, SymmetryError> {
        let support = self.support();
        let mut seen = BTreeSet::new();
        for n in cycle {
            if support.contains(n) || !seen.insert(n.clone()) {
                return Err(SymmetryError::CycleOverlap(n.clone()));
            }
        }
        if cycle.is_empty() || !self.degree.is_multiple_of(cycle.len()) {
            return Err(SymmetryError::CycleLength {
                len: cycle.len(),
                degree: self.degree,
            });
        }
        let mut pairs: Vec<(Name, Name)> =
            self.perm.pairs().map(|(k, v)| (k.clone(), v.clone())).collect();
        for (i, n) in cycle.iter().enumerate() {
            pairs.push((n.clone(), cycle[(i + 1) % cycle.len()].clone()));
        }
        Ok(SymmetryRelation {
            perm: Substitution::from_pairs(pairs),
            degree: self.degree,
        })
    }

    /// The same permutation with another declared degree.
    pub fn with_degree(&self, degree: usize) -> Result<SymmetryRelation, SymmetryError> {
        SymmetryRelation::new(self.perm.clone(), degree)
    }
}

impl fmt::Display for SymmetryRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.perm.is_identity() {
            write!(f, "id (degree {})", self.degree)
        } else {
            write!(f, "{{{}}} (degree {})", self.perm, self.degree)
        }
    }
}

pub fn power(s: &Substitution, i: usize) -> Substitution {
    let mut acc = Substitution::identity();
    for _ in 0..i {
        acc = s.compose(&acc);
    }
    acc
}

/// Checks that `perm` is a symmetry relation of degree `n` avoiding `forbidden`.
pub fn validate_symmetry(
    perm: &Substitution,
    n: usize,
    forbidden: &BTreeSet<Name>,
) -> Result<(), SymmetryError> {
    if n == 0 {
        return Err(SymmetryError::ZeroDegree);
    }
    if let Some(bad) = perm.first_non_bijective() {
        return Err(SymmetryError::NotBijective(bad));
    }
    if let Some(bad) = perm.support().intersection(forbidden).next() {
        return Err(SymmetryError::TouchesForbiddenName(bad.clone()));
    }
    if !power(perm, n).is_identity() {
        return Err(SymmetryError::WrongDegree { degree: n });
    }
    Ok(())
}

/// Extends `s` by a cycle of names; see [`SymmetryRelation::extend`].
pub fn extend_symmetry(
    s: &SymmetryRelation,
    cycle: &[Name],
) -> Result<SymmetryRelation, SymmetryError> {
    s.extend(cycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn swap(a: &str, b: &str) -> Substitution {
        Substitution::from_pairs([(n(a), n(b)), (n(b), n(a))])
    }

    #[test]
    fn apply_simple() {
        let s = Substitution::single("y", "x");
        assert_eq!(s.apply(&parse("y!a . 0").unwrap()), parse("x!a . 0").unwrap());
    }

    #[test]
    fn apply_swap_is_simultaneous() {
        let p = parse("x! . 0 | x?() . out!1 . 0 + y?() . out!2 . 0").unwrap();
        let q = parse("y! . 0 | y?() . out!1 . 0 + x?() . out!2 . 0").unwrap();
        assert_eq!(swap("x", "y").apply(&p), q);
    }

    #[test]
    fn apply_avoids_capture() {
        // {z/w} on x?(z).w!a.0
        let p = parse("x?(z) . w!a . 0").unwrap();
        let r = Substitution::single("w", "z").apply(&p);
        let fns = free_names(&r);
        assert_eq!(fns, [n("x"), n("z"), n("a")].into_iter().collect());
        match &r {
            Process::Sum(bs) => match &bs[0].prefix {
                Prefix::Input { binder, .. } => assert_eq!(binder, &n("z'1")),
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn apply_label_examples() {
        let s = swap("a", "c");
        assert_eq!(s.apply_label(&"a?b".parse().unwrap()), "c?b".parse().unwrap());
        assert_eq!(s.apply_label(&Label::Tau), Label::Tau);
        let s = swap("x", "y");
        assert_eq!(s.apply_label(&"x!y".parse().unwrap()), "y!x".parse().unwrap());
    }

    #[test]
    fn power_examples() {
        let s = swap("x", "y");
        assert!(power(&s, 0).is_identity());
        assert!(power(&s, 2).is_identity());
        let c = Substitution::from_pairs([(n("a"), n("b")), (n("b"), n("c")), (n("c"), n("a"))]);
        let expect =
            Substitution::from_pairs([(n("a"), n("c")), (n("b"), n("a")), (n("c"), n("b"))]);
        assert_eq!(power(&c, 2), expect);
    }

    #[test]
    fn validate_examples() {
        let none = BTreeSet::new();
        assert_eq!(validate_symmetry(&swap("x", "y"), 2, &none), Ok(()));
        assert_eq!(
            validate_symmetry(&swap("x", "y"), 3, &none),
            Err(SymmetryError::WrongDegree { degree: 3 })
        );
        let forb = [n("x")].into_iter().collect();
        assert_eq!(
            validate_symmetry(&swap("x", "y"), 2, &forb),
            Err(SymmetryError::TouchesForbiddenName(n("x")))
        );
        let not_bij = Substitution::single("a", "b");
        assert!(matches!(
            validate_symmetry(&not_bij, 2, &none),
            Err(SymmetryError::NotBijective(_))
        ));
    }

    #[test]
    fn extend_examples() {
        let id2 = SymmetryRelation::identity(2);
        let e = id2.extend(&[n("x"), n("x'")]).unwrap();
        assert_eq!(e.perm(), &swap("x", "x'"));
        let ab = SymmetryRelation::new(swap("a", "b"), 2).unwrap();
        let e = ab.extend(&[n("z"), n("z'")]).unwrap();
        assert!(power(e.perm(), 2).is_identity());
        assert!(e.extends(&ab));
        let id1 = SymmetryRelation::identity(1);
        assert!(id1.extend(&[n("x")]).unwrap().perm().is_identity());
        assert!(matches!(
            ab.extend(&[n("a"), n("q")]),
            Err(SymmetryError::CycleOverlap(_))
        ));
        assert!(matches!(
            ab.extend(&[n("p"), n("q"), n("r")]),
            Err(SymmetryError::CycleLength { .. })
        ));
    }

    #[test]
    fn literal_round_trip() {
        let s: Substitution = "x>y,y>x,1>2,2>1".parse().unwrap();
        assert_eq!(s.to_string(), "1>2,2>1,x>y,y>x");
        assert!("x>y".parse::<Substitution>().is_err());
        assert!("".parse::<Substitution>().unwrap().is_identity());
    }

    #[test]
    fn permute_renames_binders_too() {
        let p = parse("new a . a!b . 0").unwrap();
        assert_eq!(swap("a", "c").permute(&p), parse("new c . c!b . 0").unwrap());
    }
}
