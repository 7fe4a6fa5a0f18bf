//! Sifting and sorting: full alignments, re-costing, and the search for
//! grammars that minimise T = G + E.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::alignment::{tree_alignments, Cell, Mode, MultipleAlignment};
use crate::bits::Bits;
use crate::coding::{costs_from_frequencies, CostTable};
use crate::error::{Error, Result};
use crate::model::{Config, PatternId, Role, Store, SymbolId, SymbolKind};

/// A set of Old patterns with the full alignments that encode New with
/// them.
#[derive(Clone, Debug, PartialEq)]
pub struct Grammar<S = f64> {
    /// Patterns in the order they were added to Old.
    pub patterns: Vec<PatternId>,
    /// One full alignment for each New pattern covered so far.
    pub alignments: Vec<MultipleAlignment<S>>,
    pub g: S,
    pub e: S,
    pub t: S,
}

impl<S: Bits> Grammar<S> {
    fn empty() -> Self {
        Grammar { patterns: Vec::new(), alignments: Vec::new(), g: S::zero(), e: S::zero(), t: S::zero() }
    }

    /// The grammar extended with the patterns and code of `al`.
    fn extend(&self, al: &MultipleAlignment<S>, store: &Store, table: &CostTable<S>) -> Self {
        let mut set: BTreeSet<PatternId> = self.patterns.iter().copied().collect();
        set.extend(al.rows[1..].iter().copied());
        let patterns: Vec<PatternId> = set.into_iter().collect();
        let g = patterns.iter().map(|&p| pattern_cost(store, p, table)).sum();
        let e = self.e + al.code.bits;
        let mut alignments = self.alignments.clone();
        alignments.push(al.clone());
        Grammar { patterns, alignments, g, e, t: g + e }
    }

    pub fn render(&self, store: &Store) -> String {
        self.patterns.iter().map(|&p| store.render(p) + "\n").collect()
    }
}

fn pattern_cost<S: Bits>(store: &Store, p: PatternId, table: &CostTable<S>) -> S {
    store.pattern(p).symbols.iter().map(|s| table.bits(s.ty)).sum()
}

fn rank_grammars<S: Bits>(a: &Grammar<S>, b: &Grammar<S>) -> Ordering {
    a.t.cmp_total(&b.t)
        .then(a.patterns.len().cmp(&b.patterns.len()))
        .then_with(|| a.patterns.cmp(&b.patterns))
}

/// G, E and T of the best grammar after each stage, with T of the naive
/// grammar over the same New patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow<S = f64> {
    pub stage: usize,
    pub g: S,
    pub e: S,
    pub t: S,
    pub t_naive: S,
}

pub fn trace_csv<S: Bits>(rows: &[TraceRow<S>]) -> String {
    let mut out = String::from("stage,G,E,T,T_naive\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.stage, r.g, r.e, r.t, r.t_naive));
    }
    out
}

/// f_i: for each group, the most appearances of a pattern in any one of
/// its alignments, summed over groups.
pub fn pattern_frequencies<S: Bits>(sets: &[Vec<MultipleAlignment<S>>]) -> BTreeMap<PatternId, u64> {
    sum_of_maxima(sets, |al| al.pattern_counts())
}

/// F_i: as [`pattern_frequencies`] for symbol types in the Old rows.
pub fn symbol_frequencies<S: Bits>(sets: &[Vec<MultipleAlignment<S>>], store: &Store) -> BTreeMap<SymbolId, u64> {
    sum_of_maxima(sets, |al| al.symbol_counts(store))
}

fn sum_of_maxima<S, K: Ord + Copy>(
    sets: &[Vec<MultipleAlignment<S>>],
    count: impl Fn(&MultipleAlignment<S>) -> BTreeMap<K, u64>,
) -> BTreeMap<K, u64> {
    let mut total = BTreeMap::new();
    for set in sets {
        let mut best: BTreeMap<K, u64> = BTreeMap::new();
        for al in set {
            for (k, c) in count(al) {
                let e = best.entry(k).or_insert(0);
                *e = (*e).max(c);
            }
        }
        for (k, c) in best {
            *total.entry(k).or_insert(0) += c;
        }
    }
    total
}

/// Stage-wise search over combinations of one full alignment per New
/// pattern. After each stage only the `grammar_tree_width` grammars with
/// the lowest T survive.
pub fn compile_grammars<S: Bits>(
    sets: &[Vec<MultipleAlignment<S>>],
    store: &Store,
    table: &CostTable<S>,
    config: &Config<S>,
    naive: &[MultipleAlignment<S>],
) -> (Vec<Grammar<S>>, Vec<TraceRow<S>>) {
    let mut beam = vec![Grammar::empty()];
    let mut trace = Vec::new();
    let mut naive_g = Grammar::empty();
    for (stage, set) in sets.iter().enumerate() {
        let mut next: Vec<Grammar<S>> = Vec::new();
        for g in &beam {
            for al in set {
                next.push(g.extend(al, store, table));
            }
        }
        next.sort_by(rank_grammars);
        let mut seen: HashSet<Vec<PatternId>> = HashSet::new();
        next.retain(|g| seen.insert(g.patterns.clone()));
        next.truncate(config.grammar_tree_width);
        beam = next;
        if let Some(n) = naive.get(stage) {
            naive_g = naive_g.extend(n, store, table);
        }
        if let Some(best) = beam.first() {
            trace.push(TraceRow { stage: stage + 1, g: best.g, e: best.e, t: best.t, t_naive: naive_g.t });
        }
    }
    (beam, trace)
}

/// The full alignment of each New pattern with its own ID-wrapped copy.
pub fn naive_alignments<S: Bits>(store: &Store, table: &CostTable<S>) -> Result<Vec<MultipleAlignment<S>>> {
    store
        .new_ids()
        .iter()
        .map(|&n| {
            let contents = store.pattern(n).contents();
            let copy = store.find_old_by_contents(&contents).ok_or(Error::NoFullAlignment(n))?;
            let offset = store.pattern(copy).symbols.iter().position(|s| s.role == Role::Contents).unwrap_or(0);
            let matched = (0..contents.len()).map(|i| vec![Cell::new(0, i), Cell::new(1, offset + i)]).collect();
            MultipleAlignment::new(vec![n, copy], matched, store, table)
        })
        .collect()
}

/// The grammar made of the copies of the New patterns alone.
pub fn naive_grammar<S: Bits>(store: &Store, table: &CostTable<S>) -> Result<Grammar<S>> {
    let mut g = Grammar::empty();
    for al in naive_alignments(store, table)? {
        g = g.extend(&al, store, table);
    }
    Ok(g)
}

/// Everything the sifting phase produces.
#[derive(Clone, Debug)]
pub struct Sifted<S = f64> {
    pub table: CostTable<S>,
    /// Full alignments of each New pattern, best first.
    pub full: Vec<Vec<MultipleAlignment<S>>>,
    /// Grammars by increasing T.
    pub grammars: Vec<Grammar<S>>,
    pub naive: Grammar<S>,
    pub trace: Vec<TraceRow<S>>,
}

/// Rebuilds the alignments of every New pattern against the whole of Old,
/// keeps the full ones, recounts frequencies from them, re-costs every
/// symbol type and compiles alternative grammars.
pub fn sift_and_sort<S: Bits>(store: &mut Store, learn_table: &CostTable<S>, config: &Config<S>) -> Result<Sifted<S>> {
    for id in store.old_ids().to_vec() {
        store.set_pattern_frequency(id, 0);
    }
    store.reset_type_frequencies();
    let naive_first = naive_alignments(store, learn_table)?;
    let mut sets = Vec::with_capacity(store.new_ids().len());
    for (i, &n) in store.new_ids().iter().enumerate() {
        let found = tree_alignments(store, n, learn_table, config.full_alternatives, Mode::Parse);
        let mut keys: HashSet<Vec<Vec<(u32, u32)>>> = HashSet::new();
        let mut set: Vec<MultipleAlignment<S>> = Vec::new();
        for al in found.into_iter().chain(std::iter::once(naive_first[i].clone())) {
            if al.is_full(store) && keys.insert(al.canonical_key()) {
                set.push(al);
            }
        }
        if set.is_empty() {
            return Err(Error::NoFullAlignment(n));
        }
        sets.push(set);
    }
    let f = pattern_frequencies(&sets);
    for (&p, &c) in &f {
        store.set_pattern_frequency(p, c);
    }
    let ff = symbol_frequencies(&sets, store);
    store.set_type_frequencies(&ff);
    let table = costs_from_frequencies(&ff, &store.alphabet, config);
    for set in &mut sets {
        for al in set.iter_mut() {
            al.rescore(store, &table);
        }
        set.sort_by(|a, b| b.score.cmp_total(&a.score).then(a.rows.len().cmp(&b.rows.len())));
    }
    let naive_als = naive_alignments(store, &table)?;
    let (grammars, trace) = compile_grammars(&sets, store, &table, config, &naive_als);
    let naive = naive_grammar(store, &table)?;
    Ok(Sifted { table, full: sets, grammars, naive, trace })
}

/// A symbol of a stand-alone grammar.
#[derive(Clone, Debug, PartialEq)]
pub struct GrammarSymbol<S = f64> {
    pub name: String,
    pub kind: SymbolKind,
    pub role: Role,
    pub bits: S,
}

/// A grammar detached from the store, as presented to the user.
#[derive(Clone, Debug, PartialEq)]
pub struct CleanGrammar<S = f64> {
    pub patterns: Vec<Vec<GrammarSymbol<S>>>,
    /// For each encoded New pattern, the (pattern index, position) of every
    /// code symbol.
    codes: Vec<Vec<(usize, usize)>>,
    pub g: S,
    pub e: S,
    pub t: S,
}

impl<S: Bits> Grammar<S> {
    /// The grammar as stand-alone patterns with unchanged costs.
    pub fn detach(&self, store: &Store, table: &CostTable<S>) -> CleanGrammar<S> {
        let index: HashMap<PatternId, usize> = self.patterns.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let patterns = self
            .patterns
            .iter()
            .map(|&p| {
                store
                    .pattern(p)
                    .symbols
                    .iter()
                    .map(|s| GrammarSymbol {
                        name: store.alphabet.name(s.ty).to_string(),
                        kind: store.alphabet.kind(s.ty),
                        role: s.role,
                        bits: table.bits(s.ty),
                    })
                    .collect()
            })
            .collect();
        let codes = self
            .alignments
            .iter()
            .map(|al| al.code_cells(store).map(|c| (index[&al.rows[c.row]], c.pos)).collect())
            .collect();
        CleanGrammar::from_parts(patterns, codes)
    }
}

/// Drops class symbols that no pattern of the grammar refers to and
/// renumbers class and discrimination symbols from 1.
pub fn clean_grammar<S: Bits>(g: &Grammar<S>, store: &Store, table: &CostTable<S>) -> CleanGrammar<S> {
    g.detach(store, table).clean()
}

impl<S: Bits> CleanGrammar<S> {
    fn from_parts(patterns: Vec<Vec<GrammarSymbol<S>>>, codes: Vec<Vec<(usize, usize)>>) -> Self {
        let g: S = patterns.iter().flatten().map(|s| s.bits).sum();
        let e: S = codes.iter().flatten().map(|&(p, i)| patterns[p][i].bits).sum();
        CleanGrammar { patterns, codes, g, e, t: g + e }
    }

    pub fn clean(&self) -> Self {
        let referenced: HashSet<&str> = self
            .patterns
            .iter()
            .flatten()
            .filter(|s| s.role == Role::Contents && s.kind == SymbolKind::Class)
            .map(|s| s.name.as_str())
            .collect();
        let keep = |s: &GrammarSymbol<S>| {
            !(s.role == Role::Id && s.kind == SymbolKind::Class && !referenced.contains(s.name.as_str()))
        };
        let mut moved: Vec<Vec<Option<usize>>> = Vec::new();
        let mut patterns: Vec<Vec<GrammarSymbol<S>>> = Vec::new();
        for p in &self.patterns {
            let mut map = Vec::with_capacity(p.len());
            let mut kept = Vec::with_capacity(p.len());
            for s in p {
                if keep(s) {
                    map.push(Some(kept.len()));
                    kept.push(s.clone());
                } else {
                    map.push(None);
                }
            }
            moved.push(map);
            patterns.push(kept);
        }
        let mut classes: HashMap<String, String> = HashMap::new();
        let mut discs: HashMap<String, String> = HashMap::new();
        for s in patterns.iter_mut().flatten() {
            let (table, prefix) = match s.kind {
                SymbolKind::Class => (&mut classes, "%"),
                SymbolKind::Discrimination => (&mut discs, ""),
                _ => continue,
            };
            let next = table.len() + 1;
            let name = table.entry(s.name.clone()).or_insert_with(|| format!("{prefix}{next}"));
            s.name = name.clone();
        }
        let codes = self
            .codes
            .iter()
            .map(|code| code.iter().filter_map(|&(p, i)| moved[p][i].map(|j| (p, j))).collect())
            .collect();
        CleanGrammar::from_parts(patterns, codes)
    }

    pub fn render(&self) -> String {
        self.patterns
            .iter()
            .map(|p| p.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(" ") + "\n")
            .collect()
    }
}

mod file;
mod shape;

pub use file::{load_grammar, LoadedGrammar};

#[cfg(test)]
mod tests;
