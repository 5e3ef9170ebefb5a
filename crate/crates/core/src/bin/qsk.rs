use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsk::fredholm::{index_pairing, FredholmSpec, UnitaryKind};
use qsk::suite::{default_report_path, reports_match, run_suite, Report, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "qsk", version, about = "Truncated-operator checks for quantum SU(n) and Stiefel algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    Relations(RunArgs),
    Factorize(RunArgs),
    Killing(RunArgs),
    Kwitness(RunArgs),
    Bott(RunArgs),
    Corollary(RunArgs),
    Coxeter(RunArgs),
    /// Every suite, or those picked with --suite.
    All(RunArgs),
    /// One index pairing, printed as JSON.
    PairIndex(PairArgs),
    /// Compare a report against a golden report.
    Compare {
        report: PathBuf,
        golden: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long)]
    fock_dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    cyclic: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<i64>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<Suite>>,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long = "L", default_value_t = 24)]
    l: usize,
    #[arg(long = "D", default_value_t = 24)]
    d: usize,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    k: i64,
    #[arg(long, value_parser = parse_kind, default_value = "su2-limit")]
    unitary: UnitaryKind,
    #[arg(long, default_value_t = 1e-6)]
    rank_tol: f64,
}

fn parse_kind(s: &str) -> Result<UnitaryKind, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown unitary {s:?}"))
}

impl RunArgs {
    fn config(self, fixed: Option<Suite>) -> Result<RunConfig, qsk::Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { cfg.$g = v; })* };
        }
        set!(n => n, m => m, q => q, fock_dim => fock_dim, window => window, cyclic => cyclic, k => k, seed => seed);
        if self.tol.is_some() {
            cfg.tol = self.tol;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        match fixed {
            Some(s) => cfg.suites = vec![s],
            None => {
                if let Some(s) = self.suite {
                    cfg.suites = s;
                }
            }
        }
        Ok(cfg)
    }
}

fn run(args: RunArgs, fixed: Option<Suite>, label: &str) -> Result<bool, qsk::Error> {
    let cfg = args.config(fixed)?;
    let report = run_suite(&cfg)?;
    let path = cfg.out.clone().unwrap_or_else(|| default_report_path(label));
    report.write(&path)?;
    for c in &report.checks {
        let status = if c.report.pass { "ok  " } else { "FAIL" };
        println!("{status} {:<14} {} {} ({:.1} ms)", c.suite.name(), c.report.check, c.report.params, c.wall_ms);
        if let Some(e) = &c.report.error {
            println!("       {e}");
        }
    }
    println!("{} checks, pass={}, report at {}", report.checks.len(), report.pass, path.display());
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Relations(a) => run(a, Some(Suite::Relations), "relations"),
        Cmd::Factorize(a) => run(a, Some(Suite::Factorization), "factorization"),
        Cmd::Killing(a) => run(a, Some(Suite::Killing), "killing"),
        Cmd::Kwitness(a) => run(a, Some(Suite::Kwitness), "kwitness"),
        Cmd::Bott(a) => run(a, Some(Suite::Bott), "bott"),
        Cmd::Corollary(a) => run(a, Some(Suite::Corollary), "corollary"),
        Cmd::Coxeter(a) => run(a, Some(Suite::Coxeter), "coxeter"),
        Cmd::All(a) => run(a, None, "all"),
        Cmd::PairIndex(a) => {
            let spec = FredholmSpec::new(a.l, a.d, a.k);
            index_pairing(a.unitary, a.q, &spec, a.rank_tol).and_then(|r| {
                println!("{}", serde_json::to_string_pretty(&r)?);
                Ok(r.stable)
            })
        }
        Cmd::Compare { report, golden } => Report::read(&report).and_then(|r| {
            let g = Report::read(&golden)?;
            let same = reports_match(&r, &g);
            println!("match={same}");
            Ok(same)
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
