//! Command-line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::cfg::{build_cfg, dump_cfg, dump_cfg_dot};
use crate::checks;
use crate::domains::DomainKind;
use crate::engine::{analyze_function, EngineConfig};
use crate::frontend::{self, pretty};
use crate::normalizer::normalize;
use crate::report::{emit_report, Format};

#[derive(Parser, Debug)]
#[command(name = "canalyzer", version, about = "Abstract-interpretation analyzer for a C subset")]
pub struct Args {
    /// C source file.
    pub file: PathBuf,
    #[arg(long, default_value = "interval")]
    pub domain: DomainKind,
    /// Back-edge visits before widening.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub unroll: u32,
    /// Narrowing sweeps; 0 disables narrowing.
    #[arg(long, default_value_t = 2)]
    pub narrow: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print each control-flow graph before analyzing.
    #[arg(long)]
    pub dump_cfg: bool,
    /// Print each control-flow graph in Graphviz format.
    #[arg(long)]
    pub dump_dot: bool,
    /// Print the normalized program.
    #[arg(long)]
    pub dump_normalized: bool,
    /// Log every visit in the listing format.
    #[arg(long)]
    pub trace: bool,
    /// Back-edge visits allowed per loop before giving up.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_sweeps: u32,
}

/// Runs the analyzer; returns the process exit code. 0: clean, 1: a
/// violated assertion or a definite diagnostic, 2: usage or input error.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match run_args(&args, stdout) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(stderr, "canalyzer: {msg}");
            2
        }
    }
}

fn run_args(args: &Args, stdout: &mut dyn Write) -> Result<i32, String> {
    let source =
        std::fs::read_to_string(&args.file).map_err(|e| format!("cannot read {}: {e}", args.file.display()))?;
    let file = args.file.display().to_string();
    let program = frontend::compile(&source, &file).map_err(|e| e.to_string())?;
    let config = EngineConfig {
        domain: args.domain,
        num_unrollings: args.unroll,
        narrowing_iterations: args.narrow,
        max_fixpoint_sweeps: args.max_sweeps,
    };
    let mut results = Vec::new();
    let mut dumps = String::new();
    for f in program.functions {
        let nf = normalize(f).map_err(|e| e.to_string())?;
        if args.dump_normalized {
            dumps.push_str(&pretty::function(&nf, Default::default()));
            dumps.push('\n');
        }
        if args.dump_cfg || args.dump_dot {
            let cfg = build_cfg(&nf).map_err(|e| e.to_string())?;
            if args.dump_cfg {
                dumps.push_str(&dump_cfg(&cfg));
                dumps.push('\n');
            }
            if args.dump_dot {
                dumps.push_str(&dump_cfg_dot(&cfg));
                dumps.push('\n');
            }
        }
        results.push(analyze_function(&nf, &config).map_err(|e| format!("{}: {e}", nf.name))?);
    }
    let report = emit_report(&results, args.format, args.trace);
    write!(stdout, "{dumps}{report}").map_err(|e| e.to_string())?;
    if let Some(path) = &args.out {
        std::fs::write(path, &report).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let diagnostics: Vec<_> = results.iter().flat_map(|r| r.diagnostics.iter().cloned()).collect();
    let verdicts: Vec<_> = results.iter().flat_map(|r| r.verdicts.iter().cloned()).collect();
    Ok(checks::exit_code(&diagnostics, &verdicts))
}
