//! Symbol frequencies, Shannon-Fano-Elias code lengths and bit sizes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::model::{Alphabet, Config, Pattern, Symbol, SymbolId, SymbolOrigin};

/// Occurrence count of every symbol type in `patterns`.
pub fn compile_alphabet<'a, I>(patterns: I) -> BTreeMap<SymbolId, u64>
where
    I: IntoIterator<Item = &'a Pattern>,
{
    let mut counts = BTreeMap::new();
    for p in patterns {
        for s in &p.symbols {
            *counts.entry(s.ty).or_insert(0) += 1;
        }
    }
    counts
}

/// `ceil(log2(total / count)) + 1`, computed exactly in integers.
pub fn sfe_length(count: u64, total: u64) -> u32 {
    debug_assert!(count > 0 && count <= total);
    let mut len = 0u32;
    // smallest len with count * 2^len >= total
    while (count as u128) << len < total as u128 {
        len += 1;
    }
    len + 1
}

/// Shannon-Fano-Elias codeword length for every key.
pub fn sfe_lengths<K: Ord + Clone + std::fmt::Debug>(frequencies: &BTreeMap<K, u64>) -> Result<BTreeMap<K, u32>> {
    if let Some((k, _)) = frequencies.iter().find(|(_, &c)| c == 0) {
        return Err(Error::ZeroFrequency(format!("{k:?}")));
    }
    let total: u64 = frequencies.values().sum();
    Ok(frequencies.iter().map(|(k, &c)| (k.clone(), sfe_length(c, total))).collect())
}

/// Per-type encoding costs in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTable<S = f64> {
    costs: Vec<Option<S>>,
    /// Cost of system types without an entry of their own.
    system_fallback: Option<S>,
    pub total_frequency: u64,
}

impl<S: Bits> CostTable<S> {
    pub fn get(&self, ty: SymbolId) -> Option<S> {
        self.costs.get(ty.index()).copied().flatten().or(self.system_fallback)
    }

    pub fn cost(&self, ty: SymbolId, alphabet: &Alphabet) -> Result<S> {
        self.get(ty).ok_or_else(|| Error::MissingCost(alphabet.name(ty).to_string()))
    }

    pub fn set(&mut self, ty: SymbolId, bits: S) {
        if self.costs.len() <= ty.index() {
            self.costs.resize(ty.index() + 1, None);
        }
        self.costs[ty.index()] = Some(bits);
    }

    /// Cost of a symbol; panics if absent. Used on hot paths after tables
    /// have been validated to cover every type in play.
    pub(crate) fn bits(&self, ty: SymbolId) -> S {
        self.get(ty).expect("cost table covers every symbol type")
    }

    /// Table for the learning phase: data types from their SFE lengths over
    /// New times the cost factor, every system type at the provisional cost.
    pub fn provisional(
        alphabet: &Alphabet,
        data_frequencies: &BTreeMap<SymbolId, u64>,
        config: &Config<S>,
    ) -> Result<Self> {
        let data: BTreeMap<SymbolId, u64> = data_frequencies
            .iter()
            .filter(|(&t, _)| alphabet.get(t).origin() == SymbolOrigin::Data)
            .map(|(&t, &c)| (t, c))
            .collect();
        let lengths = sfe_lengths(&data)?;
        let mut table = weighted_costs(&lengths, alphabet, config);
        table.system_fallback = Some(config.system_symbol_cost);
        Ok(table)
    }

    pub fn to_csv(&self, alphabet: &Alphabet) -> String {
        let mut out = String::from("token,origin,frequency,bits\n");
        for (id, ty) in alphabet.iter() {
            if let Some(bits) = self.costs.get(id.index()).copied().flatten() {
                let origin = match ty.origin() {
                    SymbolOrigin::Data => "data",
                    SymbolOrigin::System => "system",
                };
                let _ = writeln!(out, "{},{},{},{}", ty.name, origin, ty.frequency, bits);
            }
        }
        out
    }
}

/// Data types scaled by the cost factor; system types take their raw length.
pub fn weighted_costs<S: Bits>(
    lengths: &BTreeMap<SymbolId, u32>,
    alphabet: &Alphabet,
    config: &Config<S>,
) -> CostTable<S> {
    let mut table = CostTable { costs: Vec::new(), system_fallback: None, total_frequency: 0 };
    for (&ty, &len) in lengths {
        let raw = S::from_len(len);
        let bits = match alphabet.get(ty).origin() {
            SymbolOrigin::Data => raw * config.cost_factor,
            SymbolOrigin::System => raw,
        };
        table.set(ty, bits);
    }
    table
}

/// Costs from frequencies gathered over alignments. Types with zero count
/// are costed as if seen once so that every symbol stays priced.
pub fn costs_from_frequencies<S: Bits>(
    frequencies: &BTreeMap<SymbolId, u64>,
    alphabet: &Alphabet,
    config: &Config<S>,
) -> CostTable<S> {
    let seen: BTreeMap<SymbolId, u64> =
        frequencies.iter().filter(|(_, &c)| c > 0).map(|(&t, &c)| (t, c)).collect();
    let total: u64 = seen.values().sum::<u64>().max(1);
    let mut lengths = sfe_lengths(&seen).expect("zero counts filtered");
    for (id, _) in alphabet.iter() {
        lengths.entry(id).or_insert_with(|| sfe_length(1, total));
    }
    let mut table = weighted_costs(&lengths, alphabet, config);
    table.total_frequency = total;
    table
}

/// Sum of per-symbol costs.
pub fn pattern_bits<S: Bits>(symbols: &[Symbol], table: &CostTable<S>, alphabet: &Alphabet) -> Result<S> {
    symbols.iter().try_fold(S::zero(), |acc, s| Ok(acc + table.cost(s.ty, alphabet)?))
}
