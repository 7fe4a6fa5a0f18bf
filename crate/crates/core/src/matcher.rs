//! Pairwise matching by dynamic programming.
//!
//! The driving side is either a plain sequence or the two-thread order of a
//! multiple alignment: a totally ordered chain of Old columns (`A`) and a
//! chain of still-unmatched New symbols (`B`), where each `B` element is
//! only ordered against the `A` elements outside its gap. The target is a
//! plain sequence. The DP finds order-preserving matchings maximising the
//! summed weight of matched pairs and keeps the best `beam` per cell, so
//! several alternative alignments come back for each pair.

use std::collections::HashSet;

use crate::bits::Bits;

/// An element of the driving order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    A(usize),
    B(usize),
}

/// Position of a `B` element relative to the `A` chain: `A[..after]`
/// precede it and `A[before..]` follow it (`after <= before`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gap {
    pub after: usize,
    pub before: usize,
}

/// A driving order: `a_len` totally ordered elements plus `gaps.len()`
/// totally ordered floating elements. `gaps` must be monotone in both fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DrivingOrder {
    pub a_len: usize,
    pub gaps: Vec<Gap>,
}

impl DrivingOrder {
    pub fn sequence(len: usize) -> Self {
        DrivingOrder { a_len: len, gaps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.a_len + self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Strict precedence in the driving order.
    pub fn precedes(&self, x: Elem, y: Elem) -> bool {
        match (x, y) {
            (Elem::A(i), Elem::A(j)) => i < j,
            (Elem::B(i), Elem::B(j)) => i < j,
            (Elem::A(i), Elem::B(j)) => i < self.gaps[j].after,
            (Elem::B(i), Elem::A(j)) => j >= self.gaps[i].before,
        }
    }
}

/// A matching between a driving order and a target sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseAlignment<S = f64> {
    /// (driving element, target index), ascending in both.
    pub hits: Vec<(Elem, usize)>,
    pub raw_gain: S,
}

impl<S: Bits> PairwiseAlignment<S> {
    /// Breaks in the target side of the matching.
    pub fn gaps(&self) -> usize {
        self.hits.windows(2).filter(|w| w[1].1 > w[0].1 + 1).count()
    }
}

#[derive(Clone, Copy)]
struct Entry<S> {
    score: S,
    elem: u32,
    target: u32,
    prev: u32,
}

const NONE: u32 = u32::MAX;

fn merge_top<S: Bits>(arena: &[Entry<S>], a: &[u32], b: &[u32], k: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(k.min(a.len() + b.len()));
    let (mut i, mut j) = (0, 0);
    while out.len() < k && (i < a.len() || j < b.len()) {
        let take_a = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => better(arena, x, y),
            (Some(_), None) => true,
            _ => false,
        };
        if take_a {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out
}

fn better<S: Bits>(arena: &[Entry<S>], x: u32, y: u32) -> bool {
    match arena[x as usize].score.cmp_total(&arena[y as usize].score) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => x <= y,
    }
}

/// k-best order-preserving matchings. `compat(e, t)` gives the weight of
/// pairing driving element `e` with target position `t`, or `None` when
/// the pair may not be matched.
///
/// A matching is admissible when no later hit strictly precedes an earlier
/// one in the driving order. Because the `A` and `B` chains are each
/// totally ordered and the gap bounds are monotone, it suffices to track the
/// last `A` and last `B` element matched; those pairs are the DP states.
pub fn match_order<S, F>(order: &DrivingOrder, target_len: usize, beam: usize, compat: F) -> Vec<PairwiseAlignment<S>>
where
    S: Bits,
    F: Fn(Elem, usize) -> Option<S>,
{
    assert!(beam >= 1, "beam must be positive");
    let na = order.a_len;
    let nb = order.gaps.len();
    if na + nb == 0 || target_len == 0 {
        return Vec::new();
    }
    // states are (last A + 1, last B + 1), 0 meaning "none yet"
    let sa = na + 1;
    let sb = nb + 1;
    let state = |a: usize, b: usize| a * sb + b;
    // number of B elements whose gap lies entirely before A(i)
    let b_limit: Vec<usize> = (0..na)
        .map(|i| order.gaps.iter().take_while(|g| g.after <= i).count())
        .collect();

    let mut arena: Vec<Entry<S>> = Vec::new();
    let mut acc: Vec<Vec<u32>> = vec![Vec::new(); sa * sb];
    let mut fresh: Vec<Vec<u32>> = vec![Vec::new(); sa * sb];

    let mut hits_a: Vec<Option<S>> = vec![None; na];
    let mut hits_b: Vec<Option<S>> = vec![None; nb];
    for t in 0..target_len {
        for (i, h) in hits_a.iter_mut().enumerate() {
            *h = compat(Elem::A(i), t);
        }
        for (j, h) in hits_b.iter_mut().enumerate() {
            *h = compat(Elem::B(j), t);
        }
        if hits_a.iter().all(Option::is_none) && hits_b.iter().all(Option::is_none) {
            continue;
        }
        // pa[b][i]: best over a_enc <= i with last B fixed
        let mut pa: Vec<Vec<Vec<u32>>> = vec![Vec::with_capacity(sa); sb];
        for (b, col) in pa.iter_mut().enumerate() {
            let mut run: Vec<u32> = Vec::new();
            for a in 0..sa {
                run = merge_top(&arena, &run, &acc[state(a, b)], beam);
                col.push(run.clone());
            }
        }
        // pb[a][j]: best over b_enc <= j with last A fixed
        let mut pb: Vec<Vec<Vec<u32>>> = vec![Vec::with_capacity(sb); sa];
        for (a, col) in pb.iter_mut().enumerate() {
            let mut run: Vec<u32> = Vec::new();
            for b in 0..sb {
                run = merge_top(&arena, &run, &acc[state(a, b)], beam);
                col.push(run.clone());
            }
        }
        let mut touched: Vec<usize> = Vec::new();
        let mut extend = |arena: &mut Vec<Entry<S>>, preds: &[u32], w: S, elem: u32, st: usize, start: bool| {
            let mut out: Vec<u32> = Vec::new();
            for &p in preds.iter().take(beam) {
                let score = arena[p as usize].score + w;
                arena.push(Entry { score, elem, target: t as u32, prev: p });
                out.push(arena.len() as u32 - 1);
            }
            if start {
                arena.push(Entry { score: w, elem, target: t as u32, prev: NONE });
                out.push(arena.len() as u32 - 1);
            }
            if out.is_empty() {
                return;
            }
            let cur = std::mem::take(&mut fresh[st]);
            if cur.is_empty() {
                touched.push(st);
            }
            // `out` is sorted: preds descend and the fresh start is lowest
            out.sort_by(|&x, &y| arena[y as usize].score.cmp_total(&arena[x as usize].score).then(x.cmp(&y)));
            fresh[st] = merge_top(arena, &cur, &out, beam);
        };
        for i in 0..na {
            let Some(w) = hits_a[i] else { continue };
            for b in 0..=b_limit[i] {
                let preds = &pa[b][i];
                extend(&mut arena, preds, w, i as u32, state(i + 1, b), b == 0);
            }
        }
        for j in 0..nb {
            let Some(w) = hits_b[j] else { continue };
            let a_max = order.gaps[j].before;
            for a in 0..=a_max {
                let preds = &pb[a][j];
                extend(&mut arena, preds, w, (na + j) as u32, state(a, j + 1), a == 0);
            }
        }
        for st in touched {
            let new = std::mem::take(&mut fresh[st]);
            acc[st] = merge_top(&arena, &acc[st], &new, beam);
        }
    }

    let elem_of = |idx: usize| if idx < na { Elem::A(idx) } else { Elem::B(idx - na) };
    let mut all: Vec<u32> = (0..arena.len() as u32).collect();
    all.sort_by(|&x, &y| {
        arena[y as usize].score.cmp_total(&arena[x as usize].score).then(x.cmp(&y))
    });
    let mut accepted: Vec<PairwiseAlignment<S>> = Vec::new();
    let mut accepted_sets: Vec<HashSet<(Elem, usize)>> = Vec::new();
    for &leaf in &all {
        if accepted.len() >= beam {
            break;
        }
        let mut hits = Vec::new();
        let mut cur = leaf;
        while cur != NONE {
            let en = arena[cur as usize];
            hits.push((elem_of(en.elem as usize), en.target as usize));
            cur = en.prev;
        }
        hits.reverse();
        let set: HashSet<(Elem, usize)> = hits.iter().copied().collect();
        if accepted_sets.iter().any(|s| set.is_subset(s)) {
            continue;
        }
        accepted.push(PairwiseAlignment { hits, raw_gain: arena[leaf as usize].score });
        accepted_sets.push(set);
    }
    accepted.sort_by(|x, y| {
        y.raw_gain
            .cmp_total(&x.raw_gain)
            .then(x.gaps().cmp(&y.gaps()))
            .then_with(|| x.hits.cmp(&y.hits))
    });
    accepted
}

/// Matches two plain sequences with equality on type and role.
/// `forbidden` holds (driving, target) index pairs that may not be matched.
pub fn match_sequences<T, S, W>(
    driving: &[T],
    target: &[T],
    forbidden: &HashSet<(usize, usize)>,
    beam: usize,
    weight: W,
) -> Vec<PairwiseAlignment<S>>
where
    T: PartialEq,
    S: Bits,
    W: Fn(&T) -> S,
{
    let order = DrivingOrder::sequence(driving.len());
    match_order(&order, target.len(), beam, |e, t| {
        let Elem::A(d) = e else { return None };
        if driving[d] == target[t] && !forbidden.contains(&(d, t)) {
            Some(weight(&driving[d]))
        } else {
            None
        }
    })
}

/// Sum of the weights of the matched driving symbols.
pub fn score_hits<T, S: Bits, W: Fn(&T) -> S>(hits: &[(Elem, usize)], driving: &[T], weight: W) -> S {
    hits.iter()
        .map(|&(e, _)| match e {
            Elem::A(i) => weight(&driving[i]),
            Elem::B(_) => S::zero(),
        })
        .sum()
}
