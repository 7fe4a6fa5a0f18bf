//! Growing multiple alignments one Old pattern at a time.

use std::cmp::Ordering;
use std::collections::HashSet;

use super::chart::{tree_alignments, Mode};
use super::{linearize, Cell, MultipleAlignment};
use crate::bits::Bits;
use crate::coding::CostTable;
use crate::error::{Error, Result};
use crate::matcher::{match_order, DrivingOrder, Elem, Gap};
use crate::model::{Config, PatternId, Role, Store, Symbol, SymbolId, SymbolKind};

/// Alignments found for one pattern from New.
#[derive(Clone, Debug)]
pub struct BuildOutcome<S = f64> {
    /// Alignments kept over all cycles, best first.
    pub selected: Vec<MultipleAlignment<S>>,
    /// Every alignment met in which all New symbols are matched, best first.
    pub covering: Vec<MultipleAlignment<S>>,
}

struct Keyed<S> {
    key: Vec<Vec<(u32, u32)>>,
    gaps: usize,
    ids: Vec<PatternId>,
    al: MultipleAlignment<S>,
}

impl<S: Bits> Keyed<S> {
    fn new(al: MultipleAlignment<S>) -> Self {
        let mut ids = al.rows[1..].to_vec();
        ids.sort();
        Keyed { key: al.canonical_key(), gaps: al.gaps(), ids, al }
    }
}

fn rank<S: Bits>(a: &Keyed<S>, b: &Keyed<S>) -> Ordering {
    b.al.score
        .cmp_total(&a.al.score)
        .then(a.gaps.cmp(&b.gaps))
        .then(a.al.rows.len().cmp(&b.al.rows.len()))
        .then_with(|| a.ids.cmp(&b.ids))
        .then_with(|| a.key.cmp(&b.key))
}

/// Builds alignments of `cpfn` against Old in cycles. The first cycle
/// matches the pattern against each Old pattern; later cycles extend the
/// best few alignments of the previous cycle by one more Old pattern.
///
/// `copy` names the Old copy of `cpfn` made before matching: position `i`
/// of `cpfn` may only be matched with Contents symbols of the copy that
/// come before position `i`.
pub fn build_alignments<S: Bits>(
    store: &Store,
    cpfn: PatternId,
    copy: Option<PatternId>,
    table: &CostTable<S>,
    config: &Config<S>,
) -> BuildOutcome<S> {
    build(store, cpfn, copy, table, config)
}

fn build<S: Bits>(
    store: &Store,
    cpfn: PatternId,
    copy: Option<PatternId>,
    table: &CostTable<S>,
    config: &Config<S>,
) -> BuildOutcome<S> {
    let seed = {
        let lens = [store.pattern(cpfn).len()];
        let columns = linearize(&lens, Vec::new()).expect("a single row always lays out");
        MultipleAlignment::from_columns(vec![cpfn], columns, &lens, store, table)
    };
    let copy = copy.map(|id| {
        let offset = store.pattern(id).symbols.iter().position(|s| s.role == Role::Contents).unwrap_or(0);
        (id, offset)
    });
    let mut seen: HashSet<Vec<Vec<(u32, u32)>>> = HashSet::new();
    let mut selected: Vec<Keyed<S>> = Vec::new();
    let mut covering: Vec<Keyed<S>> = Vec::new();
    let mut drivers = vec![seed];
    let mut best: Option<S> = None;
    let mut stale = 0;
    for _ in 0..config.max_cycles {
        let mut fresh: Vec<Keyed<S>> = Vec::new();
        for d in &drivers {
            for &p in store.old_ids() {
                for al in extend(store, table, config, d, p, copy) {
                    let k = Keyed::new(al);
                    if !seen.insert(k.key.clone()) {
                        continue;
                    }
                    if k.al.covers_new() {
                        covering.push(Keyed { key: k.key.clone(), gaps: k.gaps, ids: k.ids.clone(), al: k.al.clone() });
                    }
                    fresh.push(k);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        fresh.sort_by(rank);
        // one alignment per combination of patterns
        let mut combos: HashSet<Vec<PatternId>> = HashSet::new();
        fresh.retain(|k| combos.insert(k.ids.clone()));
        fresh.truncate(config.select_per_cycle);
        let top = fresh[0].al.score;
        match best {
            Some(b) if top.cmp_total(&b) != Ordering::Greater => stale += 1,
            _ => {
                best = Some(top);
                stale = 0;
            }
        }
        // a full alignment has nothing left to match
        drivers = fresh.iter().filter(|k| !k.al.is_full(store)).take(config.driving_count).map(|k| k.al.clone()).collect();
        selected.extend(fresh);
        if stale >= config.halt_window {
            break;
        }
    }
    selected.sort_by(rank);
    covering.sort_by(rank);
    BuildOutcome {
        selected: selected.into_iter().map(|k| k.al).collect(),
        covering: covering.into_iter().map(|k| k.al).collect(),
    }
}

/// All legal alignments made by adding one appearance of `p` to `d`.
fn extend<S: Bits>(
    store: &Store,
    table: &CostTable<S>,
    config: &Config<S>,
    d: &MultipleAlignment<S>,
    p: PatternId,
    copy: Option<(PatternId, usize)>,
) -> Vec<MultipleAlignment<S>> {
    // driving order: the chain of Old columns plus free New symbols
    let mut a_cols = Vec::new();
    let mut a_index = vec![usize::MAX; d.columns.len()];
    for c in 0..d.columns.len() {
        if d.is_old_column(c) {
            a_index[c] = a_cols.len();
            a_cols.push(c);
        }
    }
    let n0 = d.row_len(0);
    let mut b_pos = Vec::new();
    let mut gaps = Vec::new();
    let mut after = 0;
    for q in 0..n0 {
        let col = d.column_of(Cell::new(0, q));
        if a_index[col] != usize::MAX {
            after = a_index[col] + 1;
        } else {
            b_pos.push(q);
            gaps.push(Gap { after, before: a_cols.len() });
        }
    }
    // tighten `before` with the next matched New symbol
    let mut next = a_cols.len();
    let mut j = b_pos.len();
    for q in (0..n0).rev() {
        let col = d.column_of(Cell::new(0, q));
        if a_index[col] != usize::MAX {
            next = a_index[col];
        } else {
            j -= 1;
            gaps[j].before = next;
        }
    }
    let order = DrivingOrder { a_len: a_cols.len(), gaps };

    let target = &store.pattern(p).symbols;
    let copy_ok = |q: usize, t: usize| match copy {
        Some((id, offset)) if id == p => target[t].role == Role::Contents && t >= offset && t - offset < q,
        _ => true,
    };
    let compat = |e: Elem, t: usize| -> Option<S> {
        let Symbol { ty, role } = target[t];
        match e {
            Elem::A(i) => {
                let col = &d.columns[a_cols[i]];
                if d.symbol(store, col[0]).0 != ty {
                    return None;
                }
                for &cell in col {
                    if cell.row == 0 {
                        if !copy_ok(cell.pos, t) {
                            return None;
                        }
                        continue;
                    }
                    // one ID and one Contents occurrence per column among Old rows
                    if d.symbol(store, cell).1 == role {
                        return None;
                    }
                    if d.rows[cell.row] == p && cell.pos == t {
                        return None;
                    }
                }
            }
            Elem::B(j) => {
                let q = b_pos[j];
                if d.symbol(store, Cell::new(0, q)).0 != ty || !copy_ok(q, t) {
                    return None;
                }
            }
        }
        Some(table.bits(ty))
    };
    let matchings = match_order(&order, target.len(), config.pairwise_beam, compat);

    let new_row = d.rows.len();
    let mut rows = d.rows.clone();
    rows.push(p);
    let mut lens: Vec<usize> = (0..d.rows.len()).map(|r| d.row_len(r)).collect();
    lens.push(target.len());
    let mut out = Vec::new();
    for m in matchings {
        if m.hits.is_empty() {
            continue;
        }
        let mut extra: Vec<Option<usize>> = vec![None; d.columns.len()];
        let mut matched: Vec<Vec<Cell>> = Vec::new();
        for &(e, t) in &m.hits {
            match e {
                Elem::A(i) => extra[a_cols[i]] = Some(t),
                Elem::B(j) => matched.push(vec![Cell::new(0, b_pos[j]), Cell::new(new_row, t)]),
            }
        }
        for (c, col) in d.columns.iter().enumerate() {
            match extra[c] {
                Some(t) => {
                    let mut v = col.clone();
                    v.push(Cell::new(new_row, t));
                    matched.push(v);
                }
                None if col.len() > 1 => matched.push(col.clone()),
                None => {}
            }
        }
        let Some(columns) = linearize(&lens, matched) else { continue };
        let al = MultipleAlignment::from_columns(rows.clone(), columns, &lens, store, table);
        if al.is_projectable() {
            out.push(al);
        }
    }
    out
}

/// The best full alignment of `sentence` against the Old patterns of
/// `store`. The sentence is added to New.
pub fn parse<S: Bits>(
    store: &mut Store,
    sentence: &[&str],
    table: &CostTable<S>,
    config: &Config<S>,
) -> Result<(PatternId, MultipleAlignment<S>)> {
    let text = sentence.join(" ");
    if sentence.is_empty() {
        return Err(Error::NoParse(text));
    }
    let mut symbols = Vec::with_capacity(sentence.len());
    for tok in sentence {
        match store.alphabet.lookup(tok) {
            Some(ty) if table.get(ty).is_some() => symbols.push(Symbol::contents(ty)),
            _ => return Err(Error::NoParse(text)),
        }
    }
    let id = store.add_new(symbols);
    tree_alignments(store, id, table, config.select_per_cycle, Mode::Parse)
        .into_iter()
        .next()
        .map(|al| (id, al))
        .ok_or(Error::NoParse(text))
}

/// Result of decoding a code pattern.
#[derive(Clone, Debug)]
pub struct Produced<S = f64> {
    pub new: PatternId,
    pub alignment: MultipleAlignment<S>,
    /// The data symbols spelled by the Old rows, in order.
    pub output: Vec<SymbolId>,
}

/// Runs a code pattern as the New pattern and reads back the data symbols
/// of the best alignment that accounts for the whole code.
pub fn produce<S: Bits>(
    store: &mut Store,
    code: &[&str],
    table: &CostTable<S>,
    config: &Config<S>,
) -> Result<Produced<S>> {
    if code.is_empty() {
        return Err(Error::EmptyCode);
    }
    let text = code.join(" ");
    let mut symbols = Vec::with_capacity(code.len());
    for tok in code {
        match store.alphabet.lookup(tok) {
            Some(ty) if table.get(ty).is_some() && store.alphabet.kind(ty) != SymbolKind::Data => {
                symbols.push(Symbol::contents(ty))
            }
            _ => return Err(Error::NoParse(text)),
        }
    }
    let id = store.add_new(symbols);
    let found = tree_alignments(store, id, table, config.select_per_cycle, Mode::Produce).into_iter().next();
    let alignment = found.ok_or(Error::NoParse(text))?;
    let output = alignment.old_data_output(store);
    Ok(Produced { new: id, alignment, output })
}
