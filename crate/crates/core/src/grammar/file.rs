//! Grammar files: one pattern per line in the rendered form, `#` lines
//! ignored.

use super::{CleanGrammar, GrammarSymbol};
use crate::bits::Bits;
use crate::coding::{compile_alphabet, costs_from_frequencies, CostTable};
use crate::error::{Error, Result};
use crate::model::{Config, PatternId, Role, Store, Symbol, SymbolKind};

/// A grammar file read into Old.
#[derive(Clone, Debug)]
pub struct LoadedGrammar<S = f64> {
    pub store: Store,
    /// Costs from the symbol counts of the grammar itself.
    pub table: CostTable<S>,
}

pub fn load_grammar<S: Bits>(text: &str, config: &Config<S>) -> Result<LoadedGrammar<S>> {
    config.validate()?;
    let mut store = Store::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let symbols = store.read_pattern(line).map_err(|reason| Error::MalformedGrammar { line: i + 1, reason })?;
        if !references_well_formed(&store, &symbols) {
            return Err(Error::MalformedGrammar { line: i + 1, reason: "bracket outside a `< %c >` reference".into() });
        }
        store.add_old(symbols);
    }
    if store.old_ids().is_empty() {
        return Err(Error::EmptyGrammar);
    }
    let counts = compile_alphabet(store.old_patterns());
    let table = costs_from_frequencies(&counts, &store.alphabet, config);
    Ok(LoadedGrammar { store, table })
}

fn references_well_formed(store: &Store, symbols: &[Symbol]) -> bool {
    let kinds: Vec<SymbolKind> =
        symbols.iter().filter(|s| s.role == Role::Contents).map(|s| store.alphabet.kind(s.ty)).collect();
    let mut i = 0;
    while i < kinds.len() {
        match kinds[i] {
            SymbolKind::LeftBracket => {
                if kinds.get(i + 1) != Some(&SymbolKind::Class) || kinds.get(i + 2) != Some(&SymbolKind::RightBracket) {
                    return false;
                }
                i += 3;
            }
            SymbolKind::RightBracket => return false,
            _ => i += 1,
        }
    }
    true
}

impl<S: Bits> LoadedGrammar<S> {
    /// The loaded patterns as a stand-alone grammar with no encoded corpus.
    pub fn grammar(&self) -> CleanGrammar<S> {
        let patterns = self
            .store
            .old_ids()
            .iter()
            .map(|&p: &PatternId| {
                self.store
                    .pattern(p)
                    .symbols
                    .iter()
                    .map(|s| GrammarSymbol {
                        name: self.store.alphabet.name(s.ty).to_string(),
                        kind: self.store.alphabet.kind(s.ty),
                        role: s.role,
                        bits: self.table.bits(s.ty),
                    })
                    .collect()
            })
            .collect();
        CleanGrammar::from_parts(patterns, Vec::new())
    }
}

impl<S: Bits> CleanGrammar<S> {
    /// Reads a grammar in rendered form, costed by its own symbol counts.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(load_grammar(text, &Config::default())?.grammar())
    }
}
