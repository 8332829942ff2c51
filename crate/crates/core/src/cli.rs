//! Command-line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::csvio::{csv_emit, csv_ingest};
use crate::extsources::Registry;
use crate::learning::MinimizeOptions;
use crate::pipeline::{run_program, Error, Options};
use crate::safety::SafetyMode;
use crate::solver::SolveOptions;
use crate::syntax::{parse_program, Program, Rule};

fn pred_file(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once(',') {
        Some((p, f)) if !p.is_empty() && !f.is_empty() => Ok((p.to_string(), PathBuf::from(f))),
        _ => Err(format!("expected PRED,FILE, got '{s}'")),
    }
}

#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "hexsolve",
    version,
    about = "Answer set solver for programs with external atoms"
)]
pub struct RunOptions {
    /// Program files.
    pub programs: Vec<PathBuf>,

    /// Read facts PRED(line, field, ...) from a CSV file.
    #[arg(long = "csvinput", value_name = "PRED,FILE", value_parser = pred_file)]
    pub csv_inputs: Vec<(String, PathBuf)>,

    /// Write the extension of PRED in the first answer set as CSV.
    #[arg(long = "csvoutput", value_name = "PRED,FILE", value_parser = pred_file)]
    pub csv_outputs: Vec<(String, PathBuf)>,

    /// Require strong instead of liberal safety.
    #[arg(long, conflicts_with = "nosafetycheck")]
    pub strongsafety: bool,

    /// Skip the safety check.
    #[arg(long)]
    pub nosafetycheck: bool,

    /// Do not learn nogoods from external evaluations.
    #[arg(long = "no-io-learning")]
    pub no_io_learning: bool,

    /// Learn io-nogoods without minimizing them.
    #[arg(long = "no-minimize")]
    pub no_minimize: bool,

    /// Stop after N answer sets.
    #[arg(short = 'n', value_name = "N")]
    pub max_answer_sets: Option<usize>,

    /// Load external atoms from a plugin script.
    #[arg(long = "plugin", value_name = "FILE")]
    pub plugins: Vec<PathBuf>,

    /// Print search statistics after the answer sets.
    #[arg(long)]
    pub stats: bool,
}

impl RunOptions {
    pub fn safety_mode(&self) -> SafetyMode {
        if self.nosafetycheck {
            SafetyMode::Disabled
        } else if self.strongsafety {
            SafetyMode::Strong
        } else {
            SafetyMode::Liberal
        }
    }

    pub fn pipeline_options(&self) -> Options {
        Options {
            safety: self.safety_mode(),
            solve: SolveOptions {
                io_learning: !self.no_io_learning,
                minimize: if self.no_minimize {
                    MinimizeOptions::NONE
                } else {
                    MinimizeOptions::ALL
                },
                max_answer_sets: self.max_answer_sets,
                ..SolveOptions::default()
            },
            ..Options::default()
        }
    }
}

fn load(opts: &RunOptions) -> Result<Program, Error> {
    if opts.programs.is_empty() && opts.csv_inputs.is_empty() {
        return Err(Error::Input("no program file or CSV input given".into()));
    }
    let mut program = Program::default();
    for path in &opts.programs {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let parsed = parse_program(&text).map_err(|error| Error::ParseFile {
            path: path.display().to_string(),
            error,
        })?;
        program.extend(parsed);
    }
    for (pred, path) in &opts.csv_inputs {
        for fact in csv_ingest(pred, path)? {
            program.rules.push(Rule::fact(fact));
        }
    }
    Ok(program)
}

/// Runs the driver; returns the exit code (0: answer sets found, 1: none,
/// 2: error).
pub fn run(opts: &RunOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(opts, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(opts: &RunOptions, out: &mut dyn Write) -> Result<i32, Error> {
    if let Some(p) = opts.plugins.first() {
        return Err(Error::Plugin(format!(
            "{}: plugin support is not available in this build",
            p.display()
        )));
    }
    let program = load(opts)?;
    let outcome = run_program(&program, &Registry::with_builtins(), &opts.pipeline_options(), &[])?;
    let io = |e: std::io::Error| Error::Input(format!("writing output: {e}"));
    for a in &outcome.answer_sets {
        writeln!(out, "{a}").map_err(io)?;
    }
    if opts.stats {
        writeln!(out, "{}", outcome.stats).map_err(io)?;
    }
    if let Some(first) = outcome.answer_sets.first() {
        for (pred, path) in &opts.csv_outputs {
            csv_emit(pred, first, path)?;
        }
    }
    Ok(if outcome.answer_sets.is_empty() { 1 } else { 0 })
}

/// Parses `args` and runs; clap usage errors exit with code 2.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let opts = match RunOptions::try_parse_from(args) {
        Ok(o) => o,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    run(&opts, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
