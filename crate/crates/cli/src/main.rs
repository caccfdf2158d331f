mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Format};
use bht_core::Error;

/// Exit status for library errors: 2 for bad inputs, 3 for exhausted limits.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity(_) | Error::Budget(_) | Error::Construction(_) => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let threads = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }

    let started = Instant::now();
    let result = commands::run(&cli);
    let out = match result {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };

    let mut config = json!({
        "run": serde_json::to_value(&cli.command).expect("arguments serialize"),
        "seed": cli.seed,
        "threads": threads,
        "format": cli.format,
        "reproducible": cli.reproducible,
    });
    if !cli.reproducible {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        config["timestamp"] = Value::from(now);
        config["elapsed_seconds"] = Value::from(started.elapsed().as_secs_f64());
    }

    let text = match cli.format {
        Format::Json => {
            let doc = json!({ "config": config, "result": out.json });
            serde_json::to_string_pretty(&doc).expect("output serializes") + "\n"
        }
        Format::Csv => format!("# config: {config}\n{}", out.csv),
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
