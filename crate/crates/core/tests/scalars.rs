use sp70::bits::{Bits, Config32, ConfigExact, Exact, Learned32, LearnedExact};
use sp70::model::Config;
use sp70::pipeline::learn;

const EXAMPLE_1: &str = include_str!("data/example1.txt");

#[test]
fn every_scalar_learns_the_same_grammars() {
    let f = learn::<f64>(EXAMPLE_1, &Config::default()).unwrap();
    let s: Learned32 = learn(EXAMPLE_1, &Config32::default()).unwrap();
    let r: LearnedExact = learn(EXAMPLE_1, &ConfigExact::default()).unwrap();
    let fb = f.best(2);
    let sb = s.best(2);
    let rb = r.best(2);
    for i in 0..2 {
        assert_eq!(fb[i].1.render(), sb[i].1.render());
        assert_eq!(fb[i].1.render(), rb[i].1.render());
        assert_eq!(fb[i].1.t, f64::from(sb[i].1.t));
        assert_eq!(fb[i].1.t, rb[i].1.t.to_f64_lossy());
    }
    assert_eq!(r.sifted.naive.t, Exact::from_integer(f.sifted.naive.t as i64));
}
