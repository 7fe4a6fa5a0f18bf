//! Structure of stand-alone grammars: equality up to renaming, and the set
//! of sentences a grammar generates.

use std::collections::{BTreeSet, HashMap};

use super::{CleanGrammar, GrammarSymbol};
use crate::bits::Bits;
use crate::model::{Role, SymbolKind};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Tok {
    Class(usize, Role),
    Disc,
    Plain(String, Role),
}

fn class_names<S>(g: &CleanGrammar<S>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in g.patterns.iter().flatten() {
        if s.kind == SymbolKind::Class && !out.contains(&s.name) {
            out.push(s.name.clone());
        }
    }
    out
}

fn shape<S>(g: &CleanGrammar<S>, index: &HashMap<&str, usize>) -> Vec<Vec<Tok>> {
    let mut pats: Vec<Vec<Tok>> = g
        .patterns
        .iter()
        .map(|p| {
            p.iter()
                .map(|s| match s.kind {
                    SymbolKind::Class => Tok::Class(index[s.name.as_str()], s.role),
                    SymbolKind::Discrimination => Tok::Disc,
                    _ => Tok::Plain(s.name.clone(), s.role),
                })
                .collect()
        })
        .collect();
    pats.sort();
    pats
}

/// Usage profile of a class: how often it occurs as ID and as Contents.
fn profile<S>(g: &CleanGrammar<S>, name: &str) -> (usize, usize) {
    let mut id = 0;
    let mut refs = 0;
    for s in g.patterns.iter().flatten().filter(|s| s.name == name) {
        match s.role {
            Role::Id => id += 1,
            Role::Contents => refs += 1,
        }
    }
    (id, refs)
}

impl<S: Bits> CleanGrammar<S> {
    /// Same patterns up to a renaming of class symbols and with
    /// discrimination symbols disregarded; pattern order is irrelevant.
    pub fn isomorphic<T: Bits>(&self, other: &CleanGrammar<T>) -> bool {
        if self.patterns.len() != other.patterns.len() {
            return false;
        }
        let a = class_names(self);
        let b = class_names(other);
        if a.len() != b.len() {
            return false;
        }
        let b_index: HashMap<&str, usize> = b.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let target = shape(other, &b_index);
        let pa: Vec<(usize, usize)> = a.iter().map(|n| profile(self, n)).collect();
        let pb: Vec<(usize, usize)> = b.iter().map(|n| profile(other, n)).collect();
        let mut assign = vec![usize::MAX; a.len()];
        let mut used = vec![false; b.len()];
        search(0, &mut assign, &mut used, &pa, &pb, &mut |assign| {
            let index: HashMap<&str, usize> = a.iter().zip(assign).map(|(n, &j)| (n.as_str(), j)).collect();
            shape(self, &index) == target
        })
    }

    /// Every data sequence the grammar generates from its top patterns
    /// (those whose classes nothing refers to), or `None` when some
    /// derivation grows past `max_len` data symbols or the expansion does
    /// not settle.
    pub fn language(&self, max_len: usize) -> Option<BTreeSet<Vec<String>>> {
        let referenced: BTreeSet<&str> = self
            .patterns
            .iter()
            .flatten()
            .filter(|s| s.role == Role::Contents && s.kind == SymbolKind::Class)
            .map(|s| s.name.as_str())
            .collect();
        let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, p) in self.patterns.iter().enumerate() {
            for s in p.iter().filter(|s| s.role == Role::Id && s.kind == SymbolKind::Class) {
                members.entry(s.name.as_str()).or_default().push(i);
            }
        }
        let tops: Vec<usize> = (0..self.patterns.len())
            .filter(|&i| {
                !self.patterns[i]
                    .iter()
                    .any(|s| s.role == Role::Id && s.kind == SymbolKind::Class && referenced.contains(s.name.as_str()))
            })
            .collect();
        let mut out = BTreeSet::new();
        let mut stack: Vec<Vec<Item>> = tops.iter().map(|&i| items(&self.patterns[i])).collect();
        // bounds reference cycles that add no data
        let mut steps = 0usize;
        while let Some(form) = stack.pop() {
            steps += 1;
            if steps > 1 << 20 {
                return None;
            }
            let data = form.iter().filter(|it| matches!(it, Item::Word(_))).count();
            if data > max_len {
                return None;
            }
            let Some(at) = form.iter().position(|it| matches!(it, Item::Ref(_))) else {
                out.insert(form.into_iter().map(|it| it.word()).collect());
                continue;
            };
            let Item::Ref(class) = &form[at] else { unreachable!() };
            for &m in members.get(class.as_str()).map(Vec::as_slice).unwrap_or(&[]) {
                let mut next = form[..at].to_vec();
                next.extend(items(&self.patterns[m]));
                next.extend_from_slice(&form[at + 1..]);
                stack.push(next);
            }
        }
        Some(out)
    }
}

fn search(
    i: usize,
    assign: &mut Vec<usize>,
    used: &mut Vec<bool>,
    pa: &[(usize, usize)],
    pb: &[(usize, usize)],
    check: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if i == assign.len() {
        return check(assign);
    }
    for j in 0..pb.len() {
        if used[j] || pa[i] != pb[j] {
            continue;
        }
        used[j] = true;
        assign[i] = j;
        if search(i + 1, assign, used, pa, pb, check) {
            return true;
        }
        used[j] = false;
    }
    false
}

#[derive(Clone, Debug)]
enum Item {
    Word(String),
    Ref(String),
}

impl Item {
    fn word(self) -> String {
        match self {
            Item::Word(w) | Item::Ref(w) => w,
        }
    }
}

/// Contents of a pattern as words and `< %c >` references.
fn items<S>(p: &[GrammarSymbol<S>]) -> Vec<Item> {
    let c: Vec<&GrammarSymbol<S>> = p.iter().filter(|s| s.role == Role::Contents).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < c.len() {
        if i + 2 < c.len()
            && c[i].kind == SymbolKind::LeftBracket
            && c[i + 1].kind == SymbolKind::Class
            && c[i + 2].kind == SymbolKind::RightBracket
        {
            out.push(Item::Ref(c[i + 1].name.clone()));
            i += 3;
        } else {
            out.push(Item::Word(c[i].name.clone()));
            i += 1;
        }
    }
    out
}
