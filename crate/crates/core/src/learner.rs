//! Adding patterns to Old: copies of each New pattern, and patterns
//! derived from the matched and unmatched stretches of good alignments.

use crate::alignment::{build_alignments, Cell, MultipleAlignment};
use crate::bits::Bits;
use crate::coding::CostTable;
use crate::model::{Config, PatternId, Role, Store, Symbol, SymbolId, SymbolKind};

/// Patterns added or reused by one derivation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivationOutcome {
    pub new_patterns: Vec<PatternId>,
    /// Existing patterns that stood in for a derived one, with the class
    /// symbol they were given (or already had).
    pub reused_patterns: Vec<(PatternId, SymbolId)>,
    pub abstract_pattern: Option<PatternId>,
    /// Whether Old gained a pattern or a class symbol.
    pub changed: bool,
}

/// Puts an ID-wrapped copy of `cpfn` into Old and returns it. No copy is
/// made when Old already holds a pattern with the same contents.
pub fn ingest_cpfn(store: &mut Store, cpfn: PatternId) -> Option<PatternId> {
    let contents = store.pattern(cpfn).contents();
    if store.find_old_by_contents(&contents).is_some() {
        return None;
    }
    let class = store.fresh_class_symbol();
    let symbols = store.wrap(class, &contents);
    Some(store.add_old(symbols))
}

/// Only the most abstract row may leave Contents symbols unmatched, and
/// something must be left unmatched in it or in the New row.
pub fn select_for_derivation<S: Bits>(al: &MultipleAlignment<S>, store: &Store) -> bool {
    if al.rows.len() < 2 {
        return false;
    }
    let r = al.most_abstract_row();
    let others_full = (1..al.rows.len()).filter(|&x| x != r).all(|x| al.unmatched_contents(store, x) == 0);
    others_full && (al.unmatched_contents(store, 0) > 0 || al.unmatched_contents(store, r) > 0)
}

/// What one stretch of the most abstract row turns into.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Piece {
    /// A class reference carried over as it is.
    Keep(SymbolId),
    /// A matched stretch made into a pattern of its own.
    Segment(Vec<SymbolId>),
    /// New symbols joining an existing class.
    Join { class: SymbolId, member: Vec<SymbolId> },
    /// Alternatives sharing a new class (or a class of their own).
    Group(Vec<Vec<SymbolId>>),
}

/// A derivation worked out from an alignment before any pattern is added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pieces: Vec<Piece>,
}

#[derive(Clone, Debug)]
struct Unit {
    positions: Vec<usize>,
    class_ref: Option<SymbolId>,
    matched: bool,
}

/// Splits the Contents of row `r` into class references `< %k >` and single
/// symbols. A reference only counts when it is wholly matched or wholly
/// unmatched.
fn units<S: Bits>(al: &MultipleAlignment<S>, store: &Store, r: usize) -> Vec<Unit> {
    let syms = &store.pattern(al.rows[r]).symbols;
    let kind = |p: usize| store.alphabet.kind(syms[p].ty);
    let is_c = |p: usize| p < syms.len() && syms[p].role == Role::Contents;
    let matched = |p: usize| al.is_matched(Cell::new(r, p));
    let mut out = Vec::new();
    let mut p = 0;
    while p < syms.len() {
        if !is_c(p) {
            p += 1;
            continue;
        }
        let triple = is_c(p + 1)
            && is_c(p + 2)
            && kind(p) == SymbolKind::LeftBracket
            && kind(p + 1) == SymbolKind::Class
            && kind(p + 2) == SymbolKind::RightBracket;
        if triple {
            let m: Vec<bool> = (p..p + 3).map(matched).collect();
            if m.iter().all(|&x| x == m[0]) {
                out.push(Unit { positions: vec![p, p + 1, p + 2], class_ref: Some(syms[p + 1].ty), matched: m[0] });
                p += 3;
                continue;
            }
        }
        out.push(Unit { positions: vec![p], class_ref: None, matched: matched(p) });
        p += 1;
    }
    out
}

enum Elem {
    Unit(usize),
    Run(Vec<SymbolId>),
}

/// Works out the patterns an alignment gives rise to.
pub fn plan_derivation<S: Bits>(al: &MultipleAlignment<S>, store: &Store) -> Plan {
    let r = al.most_abstract_row();
    let us = units(al, store, r);
    let col = |c: Cell| al.column_of(c) as isize;
    let first = |u: &Unit| col(Cell::new(r, u.positions[0]));
    let last = |u: &Unit| col(Cell::new(r, *u.positions.last().unwrap()));

    let n0 = al.row_len(0);
    // free New columns may sit anywhere among unrelated Old columns, so a
    // matched unit is placed by the first New symbol matched inside it
    let new_cols: Vec<(isize, usize)> =
        (0..n0).filter(|&q| al.is_matched(Cell::new(0, q))).map(|q| (col(Cell::new(0, q)), q)).collect();
    let anchor = |u: &Unit| -> Option<usize> {
        if !u.matched {
            return None;
        }
        let (a, b) = (first(u), last(u));
        new_cols.iter().find(|&&(c, _)| c >= a && c <= b).map(|&(_, q)| q)
    };

    // runs of unmatched New symbols, placed against the units opposite them
    let mut attached: Vec<Vec<Vec<SymbolId>>> = vec![Vec::new(); us.len()];
    let mut inserted: Vec<Vec<Vec<SymbolId>>> = vec![Vec::new(); us.len() + 1];
    let mut q = 0;
    while q < n0 {
        if al.is_matched(Cell::new(0, q)) {
            q += 1;
            continue;
        }
        let start = q;
        while q < n0 && !al.is_matched(Cell::new(0, q)) {
            q += 1;
        }
        let lo = if start > 0 { col(Cell::new(0, start - 1)) } else { -1 };
        let hi = if q < n0 { col(Cell::new(0, q)) } else { al.columns.len() as isize };
        let run: Vec<SymbolId> = (start..q).map(|p| al.symbol(store, Cell::new(0, p)).0).collect();
        let opposite = us.iter().position(|u| !u.matched && first(u) > lo && last(u) < hi);
        match opposite {
            Some(u) => attached[u].push(run),
            None => {
                let k = us.iter().filter(|u| anchor(u).map_or(first(u) < hi, |a| a < q)).count();
                inserted[k].push(run);
            }
        }
    }
    let mut seq = Vec::new();
    for (u, runs) in attached.into_iter().enumerate() {
        seq.extend(inserted[u].drain(..).map(Elem::Run));
        seq.push(Elem::Unit(u));
        seq.extend(runs.into_iter().map(Elem::Run));
    }
    seq.extend(inserted[us.len()].drain(..).map(Elem::Run));

    let row_syms = &store.pattern(al.rows[r]).symbols;
    let content = |u: &Unit| u.positions.iter().map(|&p| row_syms[p].ty).collect::<Vec<_>>();
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        let matched_unit = |e: &Elem| matches!(e, Elem::Unit(u) if us[*u].matched);
        if matched_unit(&seq[i]) {
            let mut seg: Vec<&Unit> = Vec::new();
            while i < seq.len() && matched_unit(&seq[i]) {
                if let Elem::Unit(u) = seq[i] {
                    seg.push(&us[u]);
                }
                i += 1;
            }
            match seg.as_slice() {
                [only] if only.class_ref.is_some() => pieces.push(Piece::Keep(only.class_ref.unwrap())),
                _ => pieces.push(Piece::Segment(seg.iter().flat_map(|u| content(u)).collect())),
            }
        } else {
            let mut new_side: Vec<SymbolId> = Vec::new();
            let mut old_side: Vec<&Unit> = Vec::new();
            while i < seq.len() && !matched_unit(&seq[i]) {
                match &seq[i] {
                    Elem::Run(run) => new_side.extend(run),
                    Elem::Unit(u) => old_side.push(&us[*u]),
                }
                i += 1;
            }
            match old_side.as_slice() {
                [only] if only.class_ref.is_some() && !new_side.is_empty() => {
                    pieces.push(Piece::Join { class: only.class_ref.unwrap(), member: new_side })
                }
                _ => {
                    let old: Vec<SymbolId> = old_side.iter().flat_map(|u| content(u)).collect();
                    let alts: Vec<Vec<SymbolId>> = [new_side, old].into_iter().filter(|a| !a.is_empty()).collect();
                    pieces.push(Piece::Group(alts));
                }
            }
        }
    }
    Plan { pieces }
}

impl Piece {
    /// The one pattern a piece stands for when it has no alternatives.
    fn single(&self) -> Option<&[SymbolId]> {
        match self {
            Piece::Segment(m) => Some(m),
            Piece::Group(alts) if alts.len() == 1 => Some(&alts[0]),
            _ => None,
        }
    }
}

/// Adds the patterns of `plan` to Old, reusing patterns whose contents are
/// already there.
pub fn apply_plan(store: &mut Store, plan: &Plan) -> DerivationOutcome {
    let mut out = DerivationOutcome::default();
    let add = |store: &mut Store, class: Symbol, member: &[SymbolId], out: &mut DerivationOutcome| {
        let symbols = store.wrap(class, member);
        out.new_patterns.push(store.add_old(symbols));
        out.changed = true;
    };
    // matched stretches get their classes before the unmatched ones
    let mut refs: Vec<Option<SymbolId>> = vec![None; plan.pieces.len()];
    for pass in 0..2 {
        for (i, piece) in plan.pieces.iter().enumerate() {
            if (pass == 0) != matches!(piece, Piece::Segment(_)) {
                continue;
            }
            let class = if let Some(member) = piece.single() {
                // a pattern in a context of its own keeps any class it has
                let existing = store
                    .find_old_by_contents(member)
                    .and_then(|id| store.pattern(id).classes(&store.alphabet).next().map(|c| (id, c)));
                match existing {
                    Some((id, c)) => {
                        out.reused_patterns.push((id, c));
                        c
                    }
                    None => {
                        let class = store.fresh_class_symbol();
                        add(store, class, member, &mut out);
                        class.ty
                    }
                }
            } else {
                match piece {
                    Piece::Keep(k) => *k,
                    Piece::Join { class, member } => {
                        match store.find_old_by_contents(member) {
                            Some(existing) => {
                                out.changed |= store.append_class(existing, *class);
                                out.reused_patterns.push((existing, *class));
                            }
                            None => add(store, Symbol::id(*class), member, &mut out),
                        }
                        *class
                    }
                    Piece::Group(alts) => {
                        let class = store.fresh_class_symbol();
                        for alt in alts {
                            match store.find_old_by_contents(alt) {
                                Some(existing) => {
                                    out.changed |= store.append_class(existing, class.ty);
                                    out.reused_patterns.push((existing, class.ty));
                                }
                                None => add(store, class, alt, &mut out),
                            }
                        }
                        class.ty
                    }
                    Piece::Segment(_) => unreachable!(),
                }
            };
            refs[i] = Some(class);
        }
    }
    if refs.len() >= 2 {
        let lb = store.alphabet.left_bracket();
        let rb = store.alphabet.right_bracket();
        let body: Vec<SymbolId> = refs.iter().flat_map(|k| [lb, k.unwrap(), rb]).collect();
        out.abstract_pattern = Some(match store.find_old_by_contents(&body) {
            Some(existing) => existing,
            None => {
                let class = store.fresh_class_symbol();
                let symbols = store.wrap(class, &body);
                let id = store.add_old(symbols);
                out.new_patterns.push(id);
                out.changed = true;
                id
            }
        });
    }
    out
}

/// Derives patterns from one selected alignment.
pub fn derive_patterns<S: Bits>(al: &MultipleAlignment<S>, store: &mut Store) -> DerivationOutcome {
    let plan = plan_derivation(al, store);
    apply_plan(store, &plan)
}

/// Everything learned from one pattern from New.
#[derive(Clone, Debug)]
pub struct LearnStep<S = f64> {
    pub copy: Option<PatternId>,
    pub alignments: Vec<MultipleAlignment<S>>,
    pub derived: Vec<DerivationOutcome>,
}

/// Copies `cpfn` into Old, builds its alignments and derives patterns from
/// the best few that qualify.
pub fn learn_pattern<S: Bits>(
    store: &mut Store,
    cpfn: PatternId,
    table: &CostTable<S>,
    config: &Config<S>,
) -> LearnStep<S> {
    let copy = ingest_cpfn(store, cpfn);
    let outcome = build_alignments(store, cpfn, copy, table, config);
    // plans name symbols, not positions, so they stay valid while earlier
    // ones are applied
    let plans: Vec<Plan> = outcome
        .selected
        .iter()
        // nothing is learned from alignments worse than a full parse
        .take_while(|al| !al.is_full(store))
        .filter(|al| select_for_derivation(al, store))
        .map(|al| plan_derivation(al, store))
        .collect();
    let mut derived = Vec::new();
    for plan in &plans {
        if derived.iter().filter(|d: &&DerivationOutcome| d.changed).count() == config.derive_limit {
            break;
        }
        derived.push(apply_plan(store, plan));
    }
    LearnStep { copy, alignments: outcome.selected, derived }
}
