//! Full alignments found by dynamic programming over spans of New.
//!
//! A full alignment in which every Old row is matched as a whole is a tree:
//! each reference `< %c >` in the contents of one row is matched against the
//! brackets and a class symbol of a row below it. Such trees are enumerated
//! here bottom-up over spans of New, keeping the `k` cheapest per span and
//! class, ranked by the bits of the symbols left for the code.
//!
//! Two directions are supported. When parsing, New holds data symbols and
//! the rows' data contents are matched against it. When producing, New is a
//! code: the rows' unmatched ID symbols are matched against it and the data
//! contents are read back.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::bits::Bits;
use crate::coding::CostTable;
use crate::model::{PatternId, Role, Store, SymbolId, SymbolKind};

use super::{Cell, MultipleAlignment};

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// New holds data; the code is what is left over.
    Parse,
    /// New is a code.
    Produce,
}

#[derive(Clone, Copy)]
enum Item {
    /// An ID symbol with no partner among the Old rows.
    Free(usize, SymbolId),
    Data(usize, SymbolId),
    Ref { lb: usize, cls: usize, rb: usize, class: SymbolId },
}

/// One way an Old pattern can be used: as the top row, or below a
/// reference through the class symbol at `via`.
struct Node {
    pattern: PatternId,
    via: Option<usize>,
    items: Vec<Item>,
    /// Fewest New symbols the node can cover.
    min_span: usize,
    /// Exactly one consuming item and it is a reference, so the node can
    /// cover the same span as its child.
    unary: bool,
}

struct Deriv<S> {
    pattern: PatternId,
    via: Option<usize>,
    start: usize,
    end: usize,
    cost: S,
    size: usize,
    eaten: Vec<(usize, usize)>,
    kids: Vec<(usize, usize, usize, Rc<Deriv<S>>)>,
}

#[derive(Clone)]
struct Partial<S> {
    cost: S,
    size: usize,
    eaten: Vec<(usize, usize)>,
    kids: Vec<(usize, usize, usize, Rc<Deriv<S>>)>,
}

fn by_cost<S: Bits>(a: &S, asz: usize, b: &S, bsz: usize) -> std::cmp::Ordering {
    a.cmp_total(b).then(asz.cmp(&bsz))
}

fn keep_best<S: Bits>(list: &mut Vec<Partial<S>>, k: usize) {
    list.sort_by(|a, b| by_cost(&a.cost, a.size, &b.cost, b.size));
    list.truncate(k);
}

fn items_of(store: &Store, id: PatternId, via: Option<usize>) -> Option<Vec<Item>> {
    let pat = store.pattern(id);
    let ab = &store.alphabet;
    let n = pat.symbols.len();
    let mut items = Vec::new();
    let mut p = 0;
    while p < n {
        let s = pat.symbols[p];
        let kind = ab.kind(s.ty);
        if s.role == Role::Id {
            let matched_above = via.is_some() && (p == 0 || p + 1 == n || Some(p) == via);
            if !matched_above {
                items.push(Item::Free(p, s.ty));
            }
            p += 1;
            continue;
        }
        if kind == SymbolKind::Data {
            items.push(Item::Data(p, s.ty));
            p += 1;
            continue;
        }
        let triple = p + 2 < n
            && kind == SymbolKind::LeftBracket
            && pat.symbols[p + 1].role == Role::Contents
            && ab.kind(pat.symbols[p + 1].ty) == SymbolKind::Class
            && pat.symbols[p + 2].role == Role::Contents
            && ab.kind(pat.symbols[p + 2].ty) == SymbolKind::RightBracket;
        if !triple {
            return None;
        }
        items.push(Item::Ref { lb: p, cls: p + 1, rb: p + 2, class: pat.symbols[p + 1].ty });
        p += 3;
    }
    Some(items)
}

fn node(store: &Store, id: PatternId, via: Option<usize>, mode: Mode) -> Option<Node> {
    let items = items_of(store, id, via)?;
    let consumes = |it: &Item| {
        matches!((it, mode), (Item::Ref { .. }, _) | (Item::Data(..), Mode::Parse) | (Item::Free(..), Mode::Produce))
    };
    let min_span = items.iter().filter(|it| consumes(it)).count();
    let unary = min_span == 1 && items.iter().any(|it| matches!(it, Item::Ref { .. }));
    Some(Node { pattern: id, via, items, min_span, unary })
}

fn child_nodes(store: &Store, mode: Mode) -> Vec<Node> {
    let ab = &store.alphabet;
    let mut out = Vec::new();
    for &id in store.old_ids() {
        let pat = store.pattern(id);
        let n = pat.symbols.len();
        let bracketed = n >= 3
            && pat.symbols[0].role == Role::Id
            && ab.kind(pat.symbols[0].ty) == SymbolKind::LeftBracket
            && pat.symbols[n - 1].role == Role::Id
            && ab.kind(pat.symbols[n - 1].ty) == SymbolKind::RightBracket;
        if !bracketed {
            continue;
        }
        for v in 1..n - 1 {
            let s = pat.symbols[v];
            if s.role == Role::Id && ab.kind(s.ty) == SymbolKind::Class {
                out.extend(node(store, id, Some(v), mode));
            }
        }
    }
    out
}

/// Whether `d` reaches `p` through rows that all cover `[i, j)`.
fn on_chain<S>(d: &Deriv<S>, p: PatternId, i: usize, j: usize) -> bool {
    d.start == i && d.end == j && (d.pattern == p || d.kids.iter().any(|k| on_chain(&k.3, p, i, j)))
}

struct Chart<'a, S> {
    store: &'a Store,
    table: &'a CostTable<S>,
    new: Vec<SymbolId>,
    mode: Mode,
    k: usize,
    /// `classes[i][j - i]`: the best subtrees under each class symbol.
    classes: Vec<Vec<HashMap<SymbolId, Vec<Rc<Deriv<S>>>>>>,
}

impl<'a, S: Bits> Chart<'a, S> {
    fn derive(&self, nd: &Node, i: usize, j: usize, same_span: bool) -> Vec<Rc<Deriv<S>>> {
        let w = j - i;
        let mut states: Vec<Vec<Partial<S>>> = vec![Vec::new(); w + 1];
        states[0].push(Partial { cost: S::zero(), size: 1, eaten: Vec::new(), kids: Vec::new() });
        for item in &nd.items {
            let mut next: Vec<Vec<Partial<S>>> = vec![Vec::new(); w + 1];
            for (off, list) in states.iter().enumerate() {
                if list.is_empty() {
                    continue;
                }
                let p = i + off;
                match *item {
                    Item::Free(pos, ty) => match self.mode {
                        Mode::Parse => {
                            let b = self.table.bits(ty);
                            next[off].extend(list.iter().map(|pa| Partial { cost: pa.cost + b, ..pa.clone() }));
                        }
                        Mode::Produce => {
                            if p < j && self.new[p] == ty {
                                next[off + 1].extend(list.iter().map(|pa| {
                                    let mut pa = pa.clone();
                                    pa.eaten.push((pos, p));
                                    pa
                                }));
                            }
                        }
                    },
                    Item::Data(pos, ty) => match self.mode {
                        Mode::Parse => {
                            if p < j && self.new[p] == ty {
                                next[off + 1].extend(list.iter().map(|pa| {
                                    let mut pa = pa.clone();
                                    pa.eaten.push((pos, p));
                                    pa
                                }));
                            }
                        }
                        Mode::Produce => next[off].extend(list.iter().cloned()),
                    },
                    Item::Ref { lb, cls, rb, class } => {
                        for q in p + 1..=j {
                            let whole = p == i && q == j;
                            if whole && !same_span {
                                continue;
                            }
                            let Some(subs) = self.classes[p][q - p].get(&class) else { continue };
                            for sub in subs {
                                if whole && on_chain(sub, nd.pattern, i, j) {
                                    continue;
                                }
                                for pa in list {
                                    let mut pa = pa.clone();
                                    pa.cost = pa.cost + sub.cost;
                                    pa.size += sub.size;
                                    pa.kids.push((lb, cls, rb, Rc::clone(sub)));
                                    next[q - i].push(pa);
                                }
                            }
                        }
                    }
                }
            }
            for list in &mut next {
                keep_best(list, self.k);
            }
            states = next;
        }
        states.pop().unwrap_or_default()
            .into_iter()
            .map(|pa| {
                Rc::new(Deriv {
                    pattern: nd.pattern,
                    via: nd.via,
                    start: i,
                    end: j,
                    cost: pa.cost,
                    size: pa.size,
                    eaten: pa.eaten,
                    kids: pa.kids,
                })
            })
            .collect()
    }

    fn fill_span(&mut self, nodes: &[Node], i: usize, j: usize) {
        let store = self.store;
        let class_of = |nd: &Node| store.pattern(nd.pattern).symbols[nd.via.unwrap()].ty;
        let mut found: HashMap<SymbolId, Vec<Rc<Deriv<S>>>> = HashMap::new();
        for nd in nodes.iter().filter(|nd| nd.min_span <= j - i) {
            let ds = self.derive(nd, i, j, false);
            if !ds.is_empty() {
                found.entry(class_of(nd)).or_default().extend(ds);
            }
        }
        let settle = |m: &mut HashMap<SymbolId, Vec<Rc<Deriv<S>>>>, k: usize| {
            for v in m.values_mut() {
                v.sort_by(|a, b| by_cost(&a.cost, a.size, &b.cost, b.size));
                v.truncate(k);
            }
        };
        settle(&mut found, self.k);
        self.classes[i][j - i] = found;
        let unary: Vec<&Node> = nodes.iter().filter(|nd| nd.unary).collect();
        if unary.is_empty() {
            return;
        }
        let sig = |m: &HashMap<SymbolId, Vec<Rc<Deriv<S>>>>| -> Vec<(SymbolId, Vec<(String, usize)>)> {
            let mut v: Vec<_> = m
                .iter()
                .map(|(c, ds)| (*c, ds.iter().map(|d| (d.cost.to_string(), d.size)).collect()))
                .collect();
            v.sort_by_key(|e| e.0);
            v
        };
        for _ in 0..=unary.len() {
            let before = sig(&self.classes[i][j - i]);
            let mut extra: HashMap<SymbolId, Vec<Rc<Deriv<S>>>> = HashMap::new();
            for nd in &unary {
                let ds = self.derive(nd, i, j, true);
                if !ds.is_empty() {
                    extra.entry(class_of(nd)).or_default().extend(ds);
                }
            }
            let cur = &mut self.classes[i][j - i];
            for (c, ds) in extra {
                let slot = cur.entry(c).or_default();
                for d in ds {
                    let dup = slot.iter().any(|e| same_tree(e, &d));
                    if !dup {
                        slot.push(d);
                    }
                }
            }
            settle(cur, self.k);
            if sig(cur) == before {
                break;
            }
        }
    }
}

fn same_tree<S>(a: &Deriv<S>, b: &Deriv<S>) -> bool {
    a.pattern == b.pattern
        && a.via == b.via
        && a.start == b.start
        && a.end == b.end
        && a.eaten == b.eaten
        && a.kids.len() == b.kids.len()
        && a.kids.iter().zip(&b.kids).all(|(x, y)| x.0 == y.0 && same_tree(&x.3, &y.3))
}

fn lay_out<S>(d: &Deriv<S>, row: usize, rows: &mut Vec<PatternId>, cols: &mut Vec<Vec<Cell>>, store: &Store) {
    for &(pp, np) in &d.eaten {
        cols.push(vec![Cell::new(0, np), Cell::new(row, pp)]);
    }
    for (lb, cls, rb, kid) in &d.kids {
        let s = rows.len();
        rows.push(kid.pattern);
        let last = store.pattern(kid.pattern).len() - 1;
        cols.push(vec![Cell::new(row, *lb), Cell::new(s, 0)]);
        cols.push(vec![Cell::new(row, *cls), Cell::new(s, kid.via.expect("child row"))]);
        cols.push(vec![Cell::new(row, *rb), Cell::new(s, last)]);
        lay_out(kid, s, rows, cols, store);
    }
}

/// Up to `k` tree-shaped alignments of `new` accounting for all of it,
/// cheapest code first.
pub(crate) fn tree_alignments<S: Bits>(
    store: &Store,
    new: PatternId,
    table: &CostTable<S>,
    k: usize,
    mode: Mode,
) -> Vec<MultipleAlignment<S>> {
    let seq: Vec<SymbolId> = store.pattern(new).symbols.iter().map(|s| s.ty).collect();
    let n = seq.len();
    if n == 0 || k == 0 {
        return Vec::new();
    }
    let nodes = child_nodes(store, mode);
    let mut chart = Chart {
        store,
        table,
        new: seq,
        mode,
        k,
        classes: (0..=n).map(|i| (0..=n - i).map(|_| HashMap::new()).collect()).collect(),
    };
    for w in 1..=n {
        for i in 0..=n - w {
            chart.fill_span(&nodes, i, i + w);
        }
    }
    let mut tops: Vec<Rc<Deriv<S>>> = Vec::new();
    for &id in store.old_ids() {
        if let Some(nd) = node(store, id, None, mode) {
            if nd.min_span <= n {
                tops.extend(chart.derive(&nd, 0, n, true));
            }
        }
    }
    tops.sort_by(|a, b| by_cost(&a.cost, a.size, &b.cost, b.size));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for d in tops {
        let mut rows = vec![new, d.pattern];
        let mut cols = Vec::new();
        lay_out(&d, 1, &mut rows, &mut cols, store);
        let Ok(al) = MultipleAlignment::new(rows, cols, store, table) else { continue };
        if seen.insert(al.canonical_key()) {
            out.push(al);
            if out.len() == k {
                break;
            }
        }
    }
    out
}
