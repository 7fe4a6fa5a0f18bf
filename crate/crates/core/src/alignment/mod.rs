//! Multiple alignments: rows of pattern appearances matched in columns.
//!
//! Row 0 is the pattern from New; rows 1.. are appearances of Old patterns
//! (one pattern may appear in several rows). Every symbol occurrence sits in
//! exactly one column, unmatched occurrences in a column of their own, and
//! the columns are stored in a left-to-right order consistent with every row.

mod build;
mod chart;
mod display;

pub use build::{build_alignments, parse, produce, BuildOutcome, Produced};
pub(crate) use chart::{tree_alignments, Mode};
pub use display::render;

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Reverse;

use crate::bits::Bits;
use crate::coding::CostTable;
use crate::error::{Error, Result};
use crate::model::{PatternId, Role, Store, SymbolId, SymbolOrigin};

/// One symbol occurrence: `pos` within the pattern shown in row `row`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub pos: usize,
}

impl Cell {
    pub fn new(row: usize, pos: usize) -> Self {
        Cell { row, pos }
    }
}

/// The lone unmatched ID symbols of an alignment, in column order.
#[derive(Clone, Debug, PartialEq)]
pub struct CodePattern<S = f64> {
    pub symbols: Vec<SymbolId>,
    pub bits: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipleAlignment<S = f64> {
    pub rows: Vec<PatternId>,
    /// Columns in display order; cells sorted by row.
    pub columns: Vec<Vec<Cell>>,
    /// Compression score C = N_r - N_e.
    pub score: S,
    pub code: CodePattern<S>,
    /// `at[row][pos]` is the column holding that occurrence.
    at: Vec<Vec<usize>>,
}

/// A symbol of the sequence an alignment stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projected {
    pub ty: SymbolId,
    pub column: usize,
}

impl<S: Bits> MultipleAlignment<S> {
    /// Lays out `rows` with the given matched columns and scores the result.
    /// Fails when the columns cross (no left-to-right order exists) or a
    /// column is malformed. Layouts with illegal mismatches are allowed here;
    /// see [`is_projectable`](Self::is_projectable).
    pub fn new(rows: Vec<PatternId>, matched: Vec<Vec<Cell>>, store: &Store, table: &CostTable<S>) -> Result<Self> {
        let lens: Vec<usize> = rows.iter().map(|&p| store.pattern(p).len()).collect();
        let columns = linearize(&lens, matched).ok_or(Error::NotProjectable)?;
        Ok(Self::from_columns(rows, columns, &lens, store, table))
    }

    pub(crate) fn from_columns(
        rows: Vec<PatternId>,
        columns: Vec<Vec<Cell>>,
        lens: &[usize],
        store: &Store,
        table: &CostTable<S>,
    ) -> Self {
        let mut at: Vec<Vec<usize>> = lens.iter().map(|&n| vec![usize::MAX; n]).collect();
        for (c, col) in columns.iter().enumerate() {
            for cell in col {
                at[cell.row][cell.pos] = c;
            }
        }
        let mut al = MultipleAlignment {
            rows,
            columns,
            score: S::zero(),
            code: CodePattern { symbols: Vec::new(), bits: S::zero() },
            at,
        };
        al.rescore(store, table);
        al
    }

    /// Recomputes code and score under another cost table.
    pub fn rescore(&mut self, store: &Store, table: &CostTable<S>) {
        self.code = self.derive_code(store, table);
        let n_r: S = self
            .row_cells(0)
            .filter(|&c| self.is_matched(c))
            .map(|c| table.bits(self.symbol(store, c).0))
            .sum();
        self.score = n_r - self.code.bits;
    }

    /// The occurrences making up the code, in order.
    pub fn code_cells<'a>(&'a self, store: &'a Store) -> impl Iterator<Item = Cell> + 'a {
        self.columns.iter().filter_map(move |col| match col.as_slice() {
            [cell] if cell.row > 0 && self.symbol(store, *cell).1 == Role::Id => Some(*cell),
            _ => None,
        })
    }

    pub fn column_of(&self, cell: Cell) -> usize {
        self.at[cell.row][cell.pos]
    }

    pub fn is_matched(&self, cell: Cell) -> bool {
        self.columns[self.column_of(cell)].len() > 1
    }

    pub fn row_len(&self, row: usize) -> usize {
        self.at[row].len()
    }

    pub fn row_cells(&self, row: usize) -> impl Iterator<Item = Cell> + '_ {
        (0..self.row_len(row)).map(move |pos| Cell { row, pos })
    }

    /// Type and role of the symbol at `cell`.
    pub fn symbol(&self, store: &Store, cell: Cell) -> (SymbolId, Role) {
        let s = store.pattern(self.rows[cell.row]).symbols[cell.pos];
        (s.ty, s.role)
    }

    pub fn column_type(&self, store: &Store, column: usize) -> SymbolId {
        self.symbol(store, self.columns[column][0]).0
    }

    /// Whether a column holds at least one Old occurrence.
    pub fn is_old_column(&self, column: usize) -> bool {
        self.columns[column].iter().any(|c| c.row > 0)
    }

    /// True when the left-to-right position of every pair of columns holding
    /// Old symbols is fixed, so the alignment reads as one sequence.
    /// Mismatches against row 0 never make an alignment illegal.
    pub fn is_projectable(&self) -> bool {
        let old: Vec<usize> = (0..self.columns.len()).filter(|&c| self.is_old_column(c)).collect();
        old.windows(2).all(|w| ordered(&self.columns[w[0]], &self.columns[w[1]]))
    }

    /// The sequence the alignment stands for: one symbol per Old column.
    /// Unmatched symbols of row 0 are left out.
    pub fn project(&self, store: &Store) -> Result<Vec<Projected>> {
        if !self.is_projectable() {
            return Err(Error::NotProjectable);
        }
        Ok((0..self.columns.len())
            .filter(|&c| self.is_old_column(c))
            .map(|c| Projected { ty: self.column_type(store, c), column: c })
            .collect())
    }

    /// Reads off every ID symbol that is alone in its column.
    pub fn derive_code(&self, store: &Store, table: &CostTable<S>) -> CodePattern<S> {
        let symbols: Vec<SymbolId> = self.code_cells(store).map(|c| self.symbol(store, c).0).collect();
        let bits = symbols.iter().map(|&t| table.bits(t)).sum();
        CodePattern { symbols, bits }
    }

    /// Every symbol of row 0 is matched.
    pub fn covers_new(&self) -> bool {
        self.row_cells(0).all(|c| self.is_matched(c))
    }

    /// Every symbol of row 0 and every Contents symbol of the Old rows is
    /// matched.
    pub fn is_full(&self, store: &Store) -> bool {
        self.covers_new()
            && (1..self.rows.len()).all(|r| {
                self.row_cells(r)
                    .all(|c| self.is_matched(c) || self.symbol(store, c).1 == Role::Id)
            })
    }

    /// Breaks between matched symbols, summed over rows.
    pub fn gaps(&self) -> usize {
        (0..self.rows.len())
            .map(|r| {
                let m: Vec<usize> = self.row_cells(r).filter(|&c| self.is_matched(c)).map(|c| c.pos).collect();
                m.windows(2).filter(|w| w[1] > w[0] + 1).count()
            })
            .sum()
    }

    /// Unmatched Contents symbols of row `row`.
    pub fn unmatched_contents(&self, store: &Store, row: usize) -> usize {
        self.row_cells(row)
            .filter(|&c| !self.is_matched(c) && self.symbol(store, c).1 == Role::Contents)
            .count()
    }

    /// The Old row whose first symbol lies furthest left; ties go to the row
    /// reaching furthest right, then to the lower index.
    pub fn most_abstract_row(&self) -> usize {
        assert!(self.rows.len() >= 2, "no Old rows");
        (1..self.rows.len())
            .min_by_key(|&r| {
                let first = self.column_of(Cell::new(r, 0));
                let last = self.column_of(Cell::new(r, self.row_len(r) - 1));
                (first, Reverse(last), r)
            })
            .unwrap()
    }

    /// Occurrence counts of each Old pattern among the rows.
    pub fn pattern_counts(&self) -> BTreeMap<PatternId, u64> {
        let mut m = BTreeMap::new();
        for &p in &self.rows[1..] {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    /// Occurrence counts of each symbol type over the Old rows.
    pub fn symbol_counts(&self, store: &Store) -> BTreeMap<SymbolId, u64> {
        let mut m = BTreeMap::new();
        for &p in &self.rows[1..] {
            for s in &store.pattern(p).symbols {
                *m.entry(s.ty).or_insert(0) += 1;
            }
        }
        m
    }

    /// Matched columns only, rows relabelled into a canonical order. Equal
    /// keys mean the same alignment reached through different row orders.
    pub fn canonical_key(&self) -> Vec<Vec<(u32, u32)>> {
        let sig = |r: usize| -> (PatternId, Vec<(usize, PatternId, usize)>) {
            let mut partners = Vec::new();
            for c in self.row_cells(r) {
                for other in &self.columns[self.column_of(c)] {
                    if other.row != r {
                        partners.push((c.pos, self.rows[other.row], other.pos));
                    }
                }
            }
            partners.sort();
            (self.rows[r], partners)
        };
        let mut order: Vec<usize> = (1..self.rows.len()).collect();
        let sigs: Vec<_> = (0..self.rows.len()).map(sig).collect();
        order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]).then(a.cmp(&b)));
        let mut relabel = vec![0u32; self.rows.len()];
        for (i, &r) in order.iter().enumerate() {
            relabel[r] = i as u32 + 1;
        }
        let mut key: Vec<Vec<(u32, u32)>> = self
            .columns
            .iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let mut v: Vec<(u32, u32)> = c
                    .iter()
                    .map(|cell| (self.rows[cell.row].0, cell.pos as u32))
                    .collect();
                v.sort();
                v
            })
            .collect();
        key.sort();
        // row identity matters when one pattern appears twice
        key.push(order.iter().map(|&r| (self.rows[r].0, relabel[r])).collect());
        key
    }

    /// Data symbols of the Old rows in column order, read as output when
    /// producing from a code. Each column contributes at most once.
    pub fn old_data_output(&self, store: &Store) -> Vec<SymbolId> {
        let mut out = Vec::new();
        for col in &self.columns {
            if let Some(&cell) = col.iter().find(|c| c.row > 0) {
                let (ty, role) = self.symbol(store, cell);
                if role == Role::Contents && store.alphabet.get(ty).origin() == SymbolOrigin::Data {
                    out.push(ty);
                }
            }
        }
        out
    }
}

/// Some row has an occurrence in `x` before one in `y`.
fn ordered(x: &[Cell], y: &[Cell]) -> bool {
    x.iter().any(|a| y.iter().any(|b| a.row == b.row && a.pos < b.pos))
}

/// Merges matched columns with singleton columns for every other
/// occurrence and orders them left to right. Returns `None` if the order
/// is cyclic or a column repeats a row position.
pub(crate) fn linearize(lens: &[usize], matched: Vec<Vec<Cell>>) -> Option<Vec<Vec<Cell>>> {
    let mut at: Vec<Vec<usize>> = lens.iter().map(|&n| vec![usize::MAX; n]).collect();
    let mut columns: Vec<Vec<Cell>> = Vec::new();
    for mut col in matched {
        col.sort();
        col.dedup();
        for cell in &col {
            let slot = at.get_mut(cell.row)?.get_mut(cell.pos)?;
            if *slot != usize::MAX {
                return None;
            }
            *slot = columns.len();
        }
        columns.push(col);
    }
    for (row, slots) in at.iter_mut().enumerate() {
        for (pos, slot) in slots.iter_mut().enumerate() {
            if *slot == usize::MAX {
                *slot = columns.len();
                columns.push(vec![Cell { row, pos }]);
            }
        }
    }
    let n = columns.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for slots in &at {
        for w in slots.windows(2) {
            if w[0] == w[1] {
                return None;
            }
            succ[w[0]].push(w[1]);
            indeg[w[1]] += 1;
        }
    }
    // ready columns leave in order of their first cell, so New symbols are
    // placed as early as their own row allows
    let mut heap: BinaryHeap<Reverse<(Cell, usize)>> = (0..n)
        .filter(|&c| indeg[c] == 0)
        .map(|c| Reverse((columns[c][0], c)))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, c))) = heap.pop() {
        order.push(c);
        for &s in &succ[c] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                heap.push(Reverse((columns[s][0], s)));
            }
        }
    }
    if order.len() != n {
        return None;
    }
    let mut slots: Vec<Option<Vec<Cell>>> = columns.into_iter().map(Some).collect();
    Some(order.into_iter().map(|c| slots[c].take().unwrap()).collect())
}
