use super::*;
use crate::pipeline::learn;
use proptest::prelude::*;

const EXAMPLE_1: &str = include_str!("../../tests/data/example1.txt");

fn read(text: &str) -> CleanGrammar<f64> {
    CleanGrammar::parse(text).unwrap()
}

/// Every full alignment of each corpus sentence against a fixed grammar.
fn sets_for(grammar: &str, sentences: &[&str]) -> (Store, Vec<Vec<MultipleAlignment<f64>>>) {
    let loaded = load_grammar::<f64>(grammar, &Config::default()).unwrap();
    let mut store = loaded.store;
    let mut sets = Vec::new();
    for s in sentences {
        let syms = s
            .split_whitespace()
            .map(|t| crate::model::Symbol::contents(store.alphabet.lookup(t).unwrap()))
            .collect();
        let id = store.add_new(syms);
        sets.push(tree_alignments(&store, id, &loaded.table, 50, Mode::Parse));
    }
    (store, sets)
}

const FREQ_GRAMMAR: &str = "\
< %1 1 a b >
< %1 %2 2 c >
< %2 3 a >
< 4 < %1 > < %1 > >
< 5 < %2 > b < %1 > >
< %3 6 a b c >
< 7 < %3 > >
";

const FREQ_SENTENCES: [&str; 5] = ["a b c", "c c", "a b a b", "c b a b", "c b c"];

proptest! {
    #[test]
    fn frequencies_match_a_recount(picks in proptest::collection::vec(0usize..5, 1..6)) {
        let chosen: Vec<&str> = picks.iter().map(|&i| FREQ_SENTENCES[i]).collect();
        let (store, sets) = sets_for(FREQ_GRAMMAR, &chosen);
        // recount straight from the rows
        let mut f: BTreeMap<PatternId, u64> = BTreeMap::new();
        let mut ff: BTreeMap<SymbolId, u64> = BTreeMap::new();
        for set in &sets {
            let mut best_p: BTreeMap<PatternId, u64> = BTreeMap::new();
            let mut best_s: BTreeMap<SymbolId, u64> = BTreeMap::new();
            for al in set {
                let mut p: BTreeMap<PatternId, u64> = BTreeMap::new();
                let mut s: BTreeMap<SymbolId, u64> = BTreeMap::new();
                for &row in &al.rows[1..] {
                    *p.entry(row).or_default() += 1;
                    for sym in &store.pattern(row).symbols {
                        *s.entry(sym.ty).or_default() += 1;
                    }
                }
                for (k, v) in p { let e = best_p.entry(k).or_default(); *e = (*e).max(v); }
                for (k, v) in s { let e = best_s.entry(k).or_default(); *e = (*e).max(v); }
            }
            for (k, v) in best_p { *f.entry(k).or_default() += v; }
            for (k, v) in best_s { *ff.entry(k).or_default() += v; }
        }
        prop_assert!(sets.iter().all(|s| !s.is_empty()));
        prop_assert_eq!(pattern_frequencies(&sets), f);
        prop_assert_eq!(symbol_frequencies(&sets, &store), ff);
    }
}

#[test]
fn sum_of_maxima_takes_the_largest_alternative() {
    let (store, sets) = sets_for(FREQ_GRAMMAR, &["a b a b"]);
    // `< 4 >` with `a b` twice, or `< 5 >` with `a` and `a b`
    assert!(sets[0].len() >= 2);
    let f = pattern_frequencies(&sets);
    let ab = store.old_ids()[0];
    assert_eq!(f[&ab], 2);
}

#[test]
fn compile_respects_the_tree_width() {
    let (store, sets) = sets_for(FREQ_GRAMMAR, &FREQ_SENTENCES);
    let table = load_grammar::<f64>(FREQ_GRAMMAR, &Config::default()).unwrap().table;
    for width in [1, 2, 3, 10] {
        let config = Config { grammar_tree_width: width, ..Config::default() };
        let (gs, trace) = compile_grammars(&sets, &store, &table, &config, &[]);
        assert!(gs.len() <= width);
        assert_eq!(trace.len(), sets.len());
        for g in &gs {
            assert_eq!(g.alignments.len(), sets.len());
            for (al, set) in g.alignments.iter().zip(&sets) {
                assert!(set.contains(al));
                assert!(al.rows[1..].iter().all(|p| g.patterns.contains(p)));
            }
            assert_eq!(g.t, g.g + g.e);
        }
        assert!(gs.windows(2).all(|w| w[0].t <= w[1].t));
    }
    // a wider tree never finds a worse best grammar
    let best = |w| {
        let config = Config { grammar_tree_width: w, ..Config::default() };
        compile_grammars(&sets, &store, &table, &config, &[]).0[0].t
    };
    assert!(best(10) <= best(1));
}

#[test]
fn cleaning_drops_unreferenced_classes() {
    let dirty = read(
        "< %4 5 s >\n\
         < %7 %9 %12 9 m a r y >\n\
         < %7 %12 10 j o h n >\n\
         < %16 %18 18 w a l k >\n\
         < %16 19 r u n >\n\
         < %17 20 < %7 > < %16 > < %4 > >\n",
    );
    let clean = dirty.clean();
    assert_eq!(
        clean.render(),
        "< %1 1 s >\n< %2 2 m a r y >\n< %2 3 j o h n >\n< %3 4 w a l k >\n< %3 5 r u n >\n< 6 < %2 > < %3 > < %1 > >\n"
    );
    assert!(clean.t < dirty.t);
    assert!(clean.isomorphic(&dirty.clean().clean()));
    assert_eq!(clean.clean(), clean);
}

#[test]
fn clean_grammar_only_renumbers() {
    let g = read("< %5 7 a >\n< 9 < %5 > b >\n");
    let c = g.clean();
    assert_eq!(c.render(), "< %1 1 a >\n< 2 < %1 > b >\n");
    assert_eq!(c.t, g.t);
}

#[test]
fn isomorphism_ignores_names_and_order() {
    let a = read("< %1 1 x >\n< %2 2 y >\n< 3 < %1 > < %2 > >\n");
    let b = read("< 9 < %7 > < %3 > >\n< %3 4 y >\n< %7 8 x >\n");
    let c = read("< %1 1 x >\n< %2 2 y >\n< 3 < %2 > < %1 > >\n");
    assert!(a.isomorphic(&b));
    assert!(!a.isomorphic(&c));
    assert!(!a.isomorphic(&read("< %1 1 x >\n< %2 2 y >\n")));
}

#[test]
fn language_of_a_small_grammar() {
    let g = read("< %1 1 a >\n< %1 2 b >\n< 3 < %1 > c < %1 > >\n");
    let lang = g.language(10).unwrap();
    let words: Vec<String> = lang.iter().map(|s| s.concat()).collect();
    assert_eq!(words, ["aca", "acb", "bca", "bcb"]);
    // recursion has no bound
    let r = read("< %1 1 a >\n< %1 2 < %1 > a >\n< 3 < %1 > >\n");
    assert!(r.language(6).is_none());
}

#[test]
fn malformed_and_empty_grammar_files() {
    assert!(matches!(load_grammar::<f64>("# nothing\n\n", &Config::default()), Err(Error::EmptyGrammar)));
    let loaded = load_grammar::<f64>("# comment\n< %1 1 a b >\n", &Config::default()).unwrap();
    assert_eq!(loaded.store.old_ids().len(), 1);
    assert_eq!(loaded.store.render(loaded.store.old_ids()[0]), "< %1 1 a b >");
    for bad in ["< 1 < %1 a >", "< %1 2 a > b >", "< 3 < a > >"] {
        let text = format!("< %1 1 a >\n{bad}\n");
        assert!(matches!(load_grammar::<f64>(&text, &Config::default()), Err(Error::MalformedGrammar { line: 2, .. })), "{bad}");
    }
}

#[test]
fn naive_grammar_of_example_1() {
    let l = learn::<f64>(EXAMPLE_1, &Config::default()).unwrap();
    assert_eq!(l.sifted.naive.patterns.len(), 4);
    assert_eq!(l.sifted.naive.alignments.len(), 4);
    assert!(l.sifted.grammars[0].t < l.sifted.naive.t);
}

#[test]
fn single_sentence_has_nothing_to_compress() {
    let l = learn::<f64>("a b c d\n", &Config::default()).unwrap();
    assert_eq!(l.sifted.grammars[0].t, l.sifted.naive.t);
}

#[test]
fn coverage_grows_stage_by_stage() {
    let l = learn::<f64>(EXAMPLE_1, &Config::default()).unwrap();
    let t = &l.sifted.trace;
    assert_eq!(t.len(), 4);
    assert!(t.windows(2).all(|w| w[0].t <= w[1].t && w[0].t_naive < w[1].t_naive));
    assert_eq!(t.last().unwrap().t_naive, l.sifted.naive.t);
}
