//! The `lrp` command line: `check`, `transform` and `run` over `.lrp` files.
//!
//! Exit codes: 0 on success, 1 on a language error, 2 on I/O or usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::ir;
use crate::pipeline;
use crate::pretty::delta_lines;
use crate::runtime::DEFAULT_MAX_STEPS;

pub const EXIT_OK: i32 = 0;
pub const EXIT_LANGUAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lrp", version, about = "Check, transform and run propertied-type programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Type-check a program and print its type.
    Check { file: PathBuf },
    /// Print the transformed program and its functional context.
    Transform {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Evaluate a program and print its value.
    Run {
        file: PathBuf,
        /// Print every transition to standard error.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Treat the file as an IR document produced by `transform --emit json`.
        #[arg(long)]
        from_ir: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Json,
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_IO;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let file = match &cli.command {
        Command::Check { file } | Command::Transform { file, .. } | Command::Run { file, .. } => {
            file.clone()
        }
    };
    let text = match read(&file) {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(err, "{msg}");
            return EXIT_IO;
        }
    };
    let result = match cli.command {
        Command::Check { .. } => pipeline::check(&text).map(|t| vec![format!("OK: {t}")]),
        Command::Transform { emit, .. } => transform(&text, emit),
        Command::Run {
            trace,
            max_steps,
            from_ir,
            ..
        } => {
            let tr = if from_ir {
                ir::from_json(&text)
                    .and_then(|doc| ir::decode(&doc))
                    .map_err(Error::from)
            } else {
                pipeline::compile(&text).map(|c| c.transformed)
            };
            tr.and_then(|tr| {
                pipeline::execute(&tr, max_steps, |t| {
                    if trace {
                        let _ = writeln!(err, "{t}");
                    }
                })
            })
            .map(|o| vec![o.value.to_string()])
        }
    };
    match result {
        Ok(lines) => {
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            EXIT_LANGUAGE
        }
    }
}

fn transform(text: &str, emit: Emit) -> Result<Vec<String>, Error> {
    let tr = pipeline::compile(text)?.transformed;
    Ok(match emit {
        Emit::Text => {
            let mut lines = vec![tr.expr.to_string()];
            lines.extend(delta_lines(&tr.delta));
            lines
        }
        Emit::Json => vec![ir::to_json(&ir::encode(&tr)?)],
    })
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("error: cannot read {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("lrp").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&[]).0, EXIT_IO);
        assert_eq!(call(&["frobnicate", "x"]).0, EXIT_IO);
        assert_eq!(call(&["transform", "x.lrp", "--emit", "xml"]).0, EXIT_IO);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("transform"));
    }

    #[test]
    fn missing_file() {
        let (code, _, err) = call(&["check", "/nonexistent/prog.lrp"]);
        assert_eq!(code, EXIT_IO);
        assert!(err.contains("cannot read"));
    }
}
