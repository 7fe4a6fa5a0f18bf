//! The whole learning run: generation of patterns, then sifting.

use crate::bits::Bits;
use crate::coding::{compile_alphabet, CostTable};
use crate::error::Result;
use crate::grammar::{clean_grammar, sift_and_sort, CleanGrammar, Grammar, Sifted};
use crate::learner::learn_pattern;
use crate::model::{Config, Store};

/// Result of learning from a corpus.
#[derive(Clone, Debug)]
pub struct Learned<S = f64> {
    pub store: Store,
    /// Costs used while patterns were generated.
    pub learn_table: CostTable<S>,
    pub sifted: Sifted<S>,
}

impl<S: Bits> Learned<S> {
    /// The best `max_output_grammars` grammars, as compiled and cleaned.
    pub fn best(&self, n: usize) -> Vec<(&Grammar<S>, CleanGrammar<S>)> {
        self.sifted
            .grammars
            .iter()
            .take(n)
            .map(|g| (g, clean_grammar(g, &self.store, &self.sifted.table)))
            .collect()
    }
}

pub fn learn<S: Bits>(corpus: &str, config: &Config<S>) -> Result<Learned<S>> {
    config.validate()?;
    let mut store = Store::from_corpus(corpus)?;
    store.count_new_frequencies();
    let freqs = compile_alphabet(store.new_patterns());
    let learn_table = CostTable::provisional(&store.alphabet, &freqs, config)?;
    for n in store.new_ids().to_vec() {
        learn_pattern(&mut store, n, &learn_table, config);
    }
    let sifted = sift_and_sort(&mut store, &learn_table, config)?;
    Ok(Learned { store, learn_table, sifted })
}
