//! Persistent name → binding environment. Extending returns a new scope and
//! leaves the old one untouched, so branches and nested bodies never leak
//! bindings into each other.

use std::rc::Rc;

use crate::ast::Ident;

#[derive(Debug)]
struct Node<T> {
    name: Ident,
    value: T,
    next: Option<Rc<Node<T>>>,
}

#[derive(Debug)]
pub struct Scope<T> {
    head: Option<Rc<Node<T>>>,
}

impl<T> Clone for Scope<T> {
    fn clone(&self) -> Self {
        Scope {
            head: self.head.clone(),
        }
    }
}

impl<T> Default for Scope<T> {
    fn default() -> Self {
        Scope { head: None }
    }
}

impl<T> Scope<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// `self ⊎ {name : value}`: the new binding shadows any older one.
    pub fn extend(&self, name: impl Into<Ident>, value: T) -> Self {
        Scope {
            head: Some(Rc::new(Node {
                name: name.into(),
                value,
                next: self.head.clone(),
            })),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&T> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    /// Most recent binding first, shadowed bindings included.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        let mut cur = self.head.as_deref();
        std::iter::from_fn(move || {
            let node = cur?;
            cur = node.next.as_deref();
            Some((node.name.as_str(), &node.value))
        })
    }

    /// Visible bindings only, most recent first.
    pub fn visible(&self) -> Vec<(&str, &T)> {
        let mut seen = std::collections::BTreeSet::new();
        self.iter().filter(|(n, _)| seen.insert(*n)).collect()
    }

    pub fn map<U>(&self, mut f: impl FnMut(&str, &T) -> U) -> Scope<U> {
        let mut entries: Vec<_> = self.iter().collect();
        entries.reverse();
        entries
            .into_iter()
            .fold(Scope::new(), |acc, (n, v)| acc.extend(n, f(n, v)))
    }
}

impl<T> FromIterator<(Ident, T)> for Scope<T> {
    fn from_iter<I: IntoIterator<Item = (Ident, T)>>(iter: I) -> Self {
        iter.into_iter()
            .fold(Scope::new(), |acc, (n, v)| acc.extend(n, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_recent_binding_wins_and_old_scopes_survive() {
        let outer = Scope::new().extend("x", 1).extend("y", 2);
        let inner = outer.extend("x", 3);
        assert_eq!(inner.lookup("x"), Some(&3));
        assert_eq!(outer.lookup("x"), Some(&1));
        assert_eq!(inner.lookup("z"), None);
        assert_eq!(inner.iter().count(), 3);
        assert_eq!(inner.visible().len(), 2);
    }

    #[test]
    fn map_preserves_shadowing() {
        let s: Scope<i32> = [("x".to_string(), 1), ("x".to_string(), 2)]
            .into_iter()
            .collect();
        let m = s.map(|_, v| v * 10);
        assert_eq!(m.lookup("x"), Some(&20));
        assert_eq!(m.iter().map(|(_, v)| *v).collect::<Vec<_>>(), [20, 10]);
    }
}
