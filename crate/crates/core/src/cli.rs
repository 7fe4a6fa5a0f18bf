//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, ValueEnum};

use crate::alignment::{parse, produce, render};
use crate::error::{Error, Result};
use crate::grammar::{load_grammar, trace_csv, CleanGrammar, TraceRow};
use crate::model::Config;
use crate::pipeline::learn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Learn,
    Parse,
    Produce,
}

#[derive(Debug, Parser)]
#[command(name = "sp70", version, about = "Learn grammars from a corpus by compression, then parse and produce with them")]
pub struct Args {
    /// Corpus file when learning; the sentence or code otherwise (one quoted
    /// argument or one token per argument)
    #[arg(required = true)]
    pub input: Vec<String>,
    #[arg(long, value_enum, default_value_t = Mode::Learn)]
    pub mode: Mode,
    /// Grammar file for parse and produce
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// Write the best cleaned grammar here after learning
    #[arg(long)]
    pub save: Option<PathBuf>,
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
    #[arg(long)]
    pub cost_factor: Option<f64>,
    #[arg(long)]
    pub system_cost: Option<f64>,
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub driving: Option<usize>,
    #[arg(long)]
    pub select: Option<usize>,
    #[arg(long)]
    pub halt_window: Option<usize>,
    #[arg(long)]
    pub tree_width: Option<usize>,
    #[arg(long)]
    pub grammars: Option<usize>,
    #[arg(long)]
    pub derive_limit: Option<usize>,
    #[arg(long)]
    pub max_cycles: Option<usize>,
    /// Full alignments kept per sentence when sifting
    #[arg(long)]
    pub alternatives: Option<usize>,
}

impl Args {
    pub fn config(&self) -> Config<f64> {
        let d = Config::default();
        Config {
            cost_factor: self.cost_factor.unwrap_or(d.cost_factor),
            system_symbol_cost: self.system_cost.unwrap_or(d.system_symbol_cost),
            pairwise_beam: self.beam.unwrap_or(d.pairwise_beam),
            driving_count: self.driving.unwrap_or(d.driving_count),
            select_per_cycle: self.select.unwrap_or(d.select_per_cycle),
            halt_window: self.halt_window.unwrap_or(d.halt_window),
            grammar_tree_width: self.tree_width.unwrap_or(d.grammar_tree_width),
            max_output_grammars: self.grammars.unwrap_or(d.max_output_grammars),
            derive_limit: self.derive_limit.unwrap_or(d.derive_limit),
            max_cycles: self.max_cycles.unwrap_or(d.max_cycles),
            full_alternatives: self.alternatives.unwrap_or(d.full_alternatives),
        }
    }

    fn tokens(&self) -> Vec<&str> {
        self.input.iter().flat_map(|s| s.split_whitespace()).collect()
    }
}

/// What a learning run reports.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// Best grammars, each cleaned and as compiled.
    pub grammars: Vec<(CleanGrammar<f64>, CleanGrammar<f64>)>,
    pub naive: CleanGrammar<f64>,
    pub trace: Vec<TraceRow<f64>>,
    pub wall_time: Duration,
    pub config: Config<f64>,
}

impl RunReport {
    /// The report without the wall time, so that reruns print the same bytes.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# config cost_factor={} system_cost={} beam={} driving={} select={} halt_window={} tree_width={} grammars={} derive_limit={} max_cycles={} alternatives={}",
            c.cost_factor,
            c.system_symbol_cost,
            c.pairwise_beam,
            c.driving_count,
            c.select_per_cycle,
            c.halt_window,
            c.grammar_tree_width,
            c.max_output_grammars,
            c.derive_limit,
            c.max_cycles,
            c.full_alternatives
        );
        for (i, (clean, raw)) in self.grammars.iter().enumerate() {
            let _ = writeln!(out, "\n# grammar {} cleaned G={} E={} T={}", i + 1, clean.g, clean.e, clean.t);
            out.push_str(&clean.render());
            let _ = writeln!(out, "\n# grammar {} compiled G={} E={} T={}", i + 1, raw.g, raw.e, raw.t);
            out.push_str(&raw.render());
        }
        let n = &self.naive;
        let _ = writeln!(out, "\n# naive G={} E={} T={}", n.g, n.e, n.t);
        out.push_str(&n.render());
        out
    }
}

pub fn learn_report(corpus: &str, config: &Config<f64>) -> Result<RunReport> {
    let start = Instant::now();
    let learned = learn(corpus, config)?;
    let table = &learned.sifted.table;
    let grammars = learned
        .best(config.max_output_grammars)
        .into_iter()
        .map(|(g, clean)| (clean, g.detach(&learned.store, table)))
        .collect();
    Ok(RunReport {
        grammars,
        naive: learned.sifted.naive.detach(&learned.store, table),
        trace: learned.sifted.trace.clone(),
        wall_time: start.elapsed(),
        config: config.clone(),
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn run_args(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let config = args.config();
    config.validate()?;
    let io = |e: std::io::Error| Error::Io { path: PathBuf::from("<stdout>"), source: e };
    match args.mode {
        Mode::Learn => {
            let path = PathBuf::from(&args.input.join(" "));
            let corpus = read_file(&path)?;
            let report = learn_report(&corpus, &config)?;
            out.write_all(report.render().as_bytes()).map_err(io)?;
            let _ = writeln!(err, "learned in {:.3} s", report.wall_time.as_secs_f64());
            if let Some(p) = &args.trace_csv {
                write_file(p, &trace_csv(&report.trace))?;
            }
            if let (Some(p), Some((best, _))) = (&args.save, report.grammars.first()) {
                write_file(p, &best.render())?;
            }
        }
        Mode::Parse | Mode::Produce => {
            let Some(path) = &args.grammar else {
                return Err(Error::InvalidConfig("--grammar is required for parse and produce"));
            };
            let mut loaded = load_grammar(&read_file(path)?, &config)?;
            let tokens = args.tokens();
            if args.mode == Mode::Parse {
                let (_, al) = parse(&mut loaded.store, &tokens, &loaded.table, &config)?;
                let store = &loaded.store;
                let code: Vec<&str> = al.code.symbols.iter().map(|&t| store.alphabet.name(t)).collect();
                let text = format!("{}\ncode: {}\nbits: {}\n", render(&al, store), code.join(" "), al.code.bits);
                out.write_all(text.as_bytes()).map_err(io)?;
            } else {
                let produced = produce(&mut loaded.store, &tokens, &loaded.table, &config)?;
                let line = loaded.store.render_types(&produced.output) + "\n";
                out.write_all(line.as_bytes()).map_err(io)?;
            }
        }
    }
    Ok(())
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoParse(_) => 3,
        _ => 2,
    }
}

/// Runs the program on `argv` (program name first) and returns its exit
/// status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let msg = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(msg.as_bytes());
            } else {
                let _ = err.write_all(msg.as_bytes());
            }
            return code;
        }
    };
    match run_args(&args, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
