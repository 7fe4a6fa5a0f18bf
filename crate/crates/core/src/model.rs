//! Symbols, patterns and the New/Old store shared by every other module.

use std::collections::HashMap;
use std::fmt;

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Index of an interned symbol type in an [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Unique identity of a pattern within a [`Store`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternId(pub u32);

impl PatternId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolOrigin {
    /// First seen in a New pattern.
    Data,
    /// Created by the system while learning (brackets, class and
    /// discrimination symbols).
    System,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Data,
    LeftBracket,
    RightBracket,
    Class,
    Discrimination,
}

impl SymbolKind {
    pub fn origin(self) -> SymbolOrigin {
        match self {
            SymbolKind::Data => SymbolOrigin::Data,
            _ => SymbolOrigin::System,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Id,
    Contents,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolType {
    pub name: String,
    pub kind: SymbolKind,
    pub frequency: u64,
}

impl SymbolType {
    pub fn origin(&self) -> SymbolOrigin {
        self.kind.origin()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub ty: SymbolId,
    pub role: Role,
}

impl Symbol {
    pub fn id(ty: SymbolId) -> Self {
        Symbol { ty, role: Role::Id }
    }

    pub fn contents(ty: SymbolId) -> Self {
        Symbol { ty, role: Role::Contents }
    }
}

pub const LEFT_BRACKET: &str = "<";
pub const RIGHT_BRACKET: &str = ">";

/// Interned symbol types. Each distinct token has exactly one entry.
#[derive(Clone, Debug)]
pub struct Alphabet {
    types: Vec<SymbolType>,
    index: HashMap<String, SymbolId>,
    left: SymbolId,
    right: SymbolId,
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new()
    }
}

impl Alphabet {
    pub fn new() -> Self {
        let mut alphabet = Alphabet {
            types: Vec::new(),
            index: HashMap::new(),
            left: SymbolId(0),
            right: SymbolId(0),
        };
        alphabet.left = alphabet.intern(LEFT_BRACKET, SymbolKind::LeftBracket);
        alphabet.right = alphabet.intern(RIGHT_BRACKET, SymbolKind::RightBracket);
        alphabet
    }

    /// Returns the existing type for `name`, or registers it with `kind`.
    pub fn intern(&mut self, name: &str, kind: SymbolKind) -> SymbolId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = SymbolId(self.types.len() as u32);
        self.types.push(SymbolType { name: name.to_string(), kind, frequency: 0 });
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied()
    }

    pub fn get(&self, id: SymbolId) -> &SymbolType {
        &self.types[id.index()]
    }

    pub(crate) fn get_mut(&mut self, id: SymbolId) -> &mut SymbolType {
        &mut self.types[id.index()]
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.types[id.index()].name
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.types[id.index()].kind
    }

    pub fn left_bracket(&self) -> SymbolId {
        self.left
    }

    pub fn right_bracket(&self) -> SymbolId {
        self.right
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &SymbolType)> {
        self.types.iter().enumerate().map(|(i, t)| (SymbolId(i as u32), t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatternOrigin {
    New,
    Old,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub id: PatternId,
    pub symbols: Vec<Symbol>,
    pub origin: PatternOrigin,
    pub frequency: u64,
}

impl Pattern {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Types of the Contents symbols, in order.
    pub fn contents(&self) -> Vec<SymbolId> {
        self.symbols.iter().filter(|s| s.role == Role::Contents).map(|s| s.ty).collect()
    }

    /// Class symbols carried as ID symbols.
    pub fn classes<'a>(&'a self, alphabet: &'a Alphabet) -> impl Iterator<Item = SymbolId> + 'a {
        self.symbols
            .iter()
            .filter(move |s| s.role == Role::Id && alphabet.kind(s.ty) == SymbolKind::Class)
            .map(|s| s.ty)
    }
}

/// Search and scoring parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Config<S = f64> {
    /// Multiplier applied to the code lengths of data symbols.
    pub cost_factor: S,
    /// Provisional cost of system symbols before sifting.
    pub system_symbol_cost: S,
    /// Alternative alignments kept for each pairwise match.
    pub pairwise_beam: usize,
    /// Alignments used as driving patterns on each cycle after the first.
    pub driving_count: usize,
    /// Alignments retained on each cycle.
    pub select_per_cycle: usize,
    /// Cycles without a new best score before building stops.
    pub halt_window: usize,
    /// Grammars retained at each stage of grammar compilation.
    pub grammar_tree_width: usize,
    /// Grammars reported at the end of a run.
    pub max_output_grammars: usize,
    /// Selected alignments turned into new patterns for each CPFN.
    pub derive_limit: usize,
    /// Hard cap on building cycles per pattern.
    pub max_cycles: usize,
    /// Full alignments kept for each New pattern when sifting.
    pub full_alternatives: usize,
}

impl<S: Bits> Default for Config<S> {
    fn default() -> Self {
        Config {
            cost_factor: S::from_u32(10).unwrap(),
            system_symbol_cost: S::from_u32(8).unwrap(),
            pairwise_beam: 6,
            driving_count: 3,
            select_per_cycle: 6,
            halt_window: 3,
            grammar_tree_width: 10,
            max_output_grammars: 2,
            derive_limit: 4,
            max_cycles: 24,
            full_alternatives: 10,
        }
    }
}

impl<S: Bits> Config<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.cost_factor > S::zero()) {
            return Err(Error::InvalidConfig("cost factor must be positive"));
        }
        if !(self.system_symbol_cost > S::zero()) {
            return Err(Error::InvalidConfig("system symbol cost must be positive"));
        }
        let counts = [
            self.pairwise_beam,
            self.driving_count,
            self.select_per_cycle,
            self.halt_window,
            self.grammar_tree_width,
            self.max_output_grammars,
            self.derive_limit,
            self.max_cycles,
            self.full_alternatives,
        ];
        if counts.contains(&0) {
            return Err(Error::InvalidConfig("counts must be positive"));
        }
        Ok(())
    }
}

/// Splits a corpus into token lines: one pattern per non-blank line,
/// whitespace-separated tokens.
pub fn parse_corpus(text: &str) -> Result<Vec<Vec<&str>>> {
    let lines: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .filter(|toks| !toks.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(lines)
}

/// New patterns, Old patterns and their shared alphabet.
#[derive(Clone, Debug)]
pub struct Store {
    patterns: Vec<Pattern>,
    new: Vec<PatternId>,
    old: Vec<PatternId>,
    pub alphabet: Alphabet,
    next_class: u64,
    next_discrimination: u64,
}

impl Default for Store {
    fn default() -> Self {
        Self::new()
    }
}

impl Store {
    pub fn new() -> Self {
        Store {
            patterns: Vec::new(),
            new: Vec::new(),
            old: Vec::new(),
            alphabet: Alphabet::new(),
            next_class: 1,
            next_discrimination: 1,
        }
    }

    /// Reads a corpus into New. Tokens become Data symbols with role Contents.
    pub fn from_corpus(text: &str) -> Result<Self> {
        let mut store = Store::new();
        for line in parse_corpus(text)? {
            let symbols = line
                .iter()
                .map(|tok| Symbol::contents(store.alphabet.intern(tok, SymbolKind::Data)))
                .collect();
            store.push(symbols, PatternOrigin::New);
        }
        Ok(store)
    }

    fn push(&mut self, symbols: Vec<Symbol>, origin: PatternOrigin) -> PatternId {
        assert!(!symbols.is_empty(), "patterns are never empty");
        let id = PatternId(self.patterns.len() as u32);
        self.patterns.push(Pattern { id, symbols, origin, frequency: 0 });
        match origin {
            PatternOrigin::New => self.new.push(id),
            PatternOrigin::Old => self.old.push(id),
        }
        id
    }

    pub fn add_new(&mut self, symbols: Vec<Symbol>) -> PatternId {
        self.push(symbols, PatternOrigin::New)
    }

    pub fn add_old(&mut self, symbols: Vec<Symbol>) -> PatternId {
        self.push(symbols, PatternOrigin::Old)
    }

    pub fn pattern(&self, id: PatternId) -> &Pattern {
        &self.patterns[id.index()]
    }

    pub fn new_ids(&self) -> &[PatternId] {
        &self.new
    }

    pub fn old_ids(&self) -> &[PatternId] {
        &self.old
    }

    pub fn new_patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.new.iter().map(move |&id| self.pattern(id))
    }

    pub fn old_patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.old.iter().map(move |&id| self.pattern(id))
    }

    /// A class symbol never used before, rendered `%N`.
    pub fn fresh_class_symbol(&mut self) -> Symbol {
        loop {
            let name = format!("%{}", self.next_class);
            self.next_class += 1;
            if self.alphabet.lookup(&name).is_none() {
                return Symbol::id(self.alphabet.intern(&name, SymbolKind::Class));
            }
        }
    }

    /// A discrimination symbol never used before, rendered as a bare integer.
    pub fn fresh_discrimination_symbol(&mut self) -> Symbol {
        loop {
            let name = self.next_discrimination.to_string();
            self.next_discrimination += 1;
            if self.alphabet.lookup(&name).is_none() {
                return Symbol::id(self.alphabet.intern(&name, SymbolKind::Discrimination));
            }
        }
    }

    /// Wraps `contents` as `< class disc ... >`.
    pub fn wrap(&mut self, class: Symbol, contents: &[SymbolId]) -> Vec<Symbol> {
        let disc = self.fresh_discrimination_symbol();
        let mut symbols = Vec::with_capacity(contents.len() + 4);
        symbols.push(Symbol::id(self.alphabet.left_bracket()));
        symbols.push(class);
        symbols.push(disc);
        symbols.extend(contents.iter().map(|&t| Symbol::contents(t)));
        symbols.push(Symbol::id(self.alphabet.right_bracket()));
        symbols
    }

    /// An Old pattern whose Contents sequence equals `contents`.
    pub fn find_old_by_contents(&self, contents: &[SymbolId]) -> Option<PatternId> {
        self.old
            .iter()
            .copied()
            .find(|&id| self.pattern(id).contents() == contents)
    }

    /// Adds `class` after the existing class symbols of an Old pattern,
    /// unless already present. Returns whether the pattern changed.
    pub fn append_class(&mut self, id: PatternId, class: SymbolId) -> bool {
        let alphabet = &self.alphabet;
        let pattern = &self.patterns[id.index()];
        if pattern.classes(alphabet).any(|c| c == class) {
            return false;
        }
        let at = pattern
            .symbols
            .iter()
            .rposition(|s| {
                s.role == Role::Id && alphabet.kind(s.ty) == SymbolKind::Class
            })
            .map(|i| i + 1)
            .unwrap_or(1);
        self.patterns[id.index()].symbols.insert(at, Symbol::id(class));
        true
    }

    /// Reads a pattern written as `< %3 %5 2 j o h n >`. A leading `<`, the
    /// class symbols after it, one integer and a final `>` are ID symbols;
    /// everything else is Contents. Without the enclosing brackets every
    /// token is Contents.
    pub fn read_pattern(&mut self, text: &str) -> std::result::Result<Vec<Symbol>, String> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.is_empty() {
            return Err("empty pattern".into());
        }
        let is_class = |t: &str| t.len() > 1 && t.starts_with('%') && t[1..].bytes().all(|b| b.is_ascii_digit());
        let is_disc = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        let kind_of = |t: &str| match t {
            "<" => SymbolKind::LeftBracket,
            ">" => SymbolKind::RightBracket,
            _ if is_class(t) => SymbolKind::Class,
            _ => SymbolKind::Data,
        };
        let wrapped = toks.len() >= 2 && toks[0] == "<" && toks[toks.len() - 1] == ">";
        let mut id_until = 0;
        if wrapped {
            id_until = 1;
            while id_until < toks.len() - 1 && is_class(toks[id_until]) {
                id_until += 1;
            }
            if id_until < toks.len() - 1 && is_disc(toks[id_until]) {
                id_until += 1;
            }
        }
        let mut out = Vec::with_capacity(toks.len());
        for (i, t) in toks.iter().enumerate() {
            let is_id = wrapped && (i < id_until || i == toks.len() - 1);
            let kind = if is_id && i > 0 && i < toks.len() - 1 && !is_class(t) {
                SymbolKind::Discrimination
            } else {
                kind_of(t)
            };
            let ty = self.alphabet.intern(t, kind);
            out.push(if is_id { Symbol::id(ty) } else { Symbol::contents(ty) });
        }
        Ok(out)
    }

    /// Adds a pattern written in the text form of [`read_pattern`](Self::read_pattern) to Old.
    pub fn add_old_text(&mut self, text: &str) -> std::result::Result<PatternId, String> {
        let symbols = self.read_pattern(text)?;
        Ok(self.add_old(symbols))
    }

    pub fn render(&self, id: PatternId) -> String {
        self.render_symbols(&self.pattern(id).symbols)
    }

    pub fn render_symbols(&self, symbols: &[Symbol]) -> String {
        symbols.iter().map(|s| self.alphabet.name(s.ty)).collect::<Vec<_>>().join(" ")
    }

    pub fn render_types(&self, types: &[SymbolId]) -> String {
        types.iter().map(|&t| self.alphabet.name(t)).collect::<Vec<_>>().join(" ")
    }

    /// Recounts type frequencies over New.
    pub fn count_new_frequencies(&mut self) {
        let mut counts = vec![0u64; self.alphabet.len()];
        for &id in &self.new {
            for s in &self.patterns[id.index()].symbols {
                counts[s.ty.index()] += 1;
            }
        }
        for (i, c) in counts.into_iter().enumerate() {
            self.alphabet.get_mut(SymbolId(i as u32)).frequency = c;
        }
    }

    pub(crate) fn reset_type_frequencies(&mut self) {
        for i in 0..self.alphabet.len() {
            self.alphabet.get_mut(SymbolId(i as u32)).frequency = 0;
        }
    }

    pub(crate) fn set_type_frequencies(&mut self, counts: &std::collections::BTreeMap<SymbolId, u64>) {
        for (&ty, &c) in counts {
            self.alphabet.get_mut(ty).frequency = c;
        }
    }

    pub(crate) fn set_pattern_frequency(&mut self, id: PatternId, f: u64) {
        self.patterns[id.index()].frequency = f;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn corpus_one_pattern_per_line() {
        let store = Store::from_corpus("j o h n r u n s\n").unwrap();
        assert_eq!(store.new_ids().len(), 1);
        let p = store.new_patterns().next().unwrap();
        assert_eq!(p.len(), 8);
        assert!(p.symbols.iter().all(|s| s.role == Role::Contents));
        assert_eq!(store.alphabet.kind(p.symbols[0].ty), SymbolKind::Data);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(Store::from_corpus(""), Err(Error::EmptyCorpus)));
        assert!(matches!(Store::from_corpus("  \n\t\n"), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn blank_lines_skipped() {
        let store = Store::from_corpus("a a\n   \nb\n").unwrap();
        let lens: Vec<_> = store.new_patterns().map(|p| p.len()).collect();
        assert_eq!(lens, vec![2, 1]);
    }

    #[test]
    fn fresh_symbols() {
        let mut store = Store::new();
        let a = store.fresh_class_symbol();
        let b = store.fresh_class_symbol();
        assert_eq!(store.alphabet.name(a.ty), "%1");
        assert_eq!(store.alphabet.name(b.ty), "%2");
        assert_eq!(a.role, Role::Id);
        let d = store.fresh_discrimination_symbol();
        assert_eq!(store.alphabet.name(d.ty), "1");
        assert_eq!(store.alphabet.get(d.ty).origin(), SymbolOrigin::System);
    }

    #[test]
    fn fresh_symbols_never_repeat() {
        let mut store = Store::from_corpus("3 %2 x").unwrap();
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            let c = store.fresh_class_symbol();
            let d = store.fresh_discrimination_symbol();
            assert!(seen.insert(store.alphabet.name(c.ty).to_string()));
            assert!(seen.insert(store.alphabet.name(d.ty).to_string()));
        }
        // data tokens are never reused as system symbols
        assert!(!seen.contains("3"));
        assert!(!seen.contains("%2"));
    }

    #[test]
    fn append_class_goes_after_existing_classes() {
        let mut store = Store::from_corpus("m a r y").unwrap();
        let contents = store.new_patterns().next().unwrap().contents();
        let class = store.fresh_class_symbol();
        let symbols = store.wrap(class, &contents);
        let id = store.add_old(symbols);
        let extra = store.fresh_class_symbol();
        assert!(store.append_class(id, extra.ty));
        assert!(!store.append_class(id, extra.ty));
        assert_eq!(store.render(id), "< %1 %2 1 m a r y >");
        assert_eq!(store.find_old_by_contents(&contents), Some(id));
    }
}
