use std::process::ExitCode;

use clap::Parser;
use wvsim::cli::{execute, Cli};
use wvsim::{threads_from_env, ConfigError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().map_err(anyhow::Error::from).and_then(|threads| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder.build()?;
        pool.install(|| execute(&cli))
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wvsim: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
