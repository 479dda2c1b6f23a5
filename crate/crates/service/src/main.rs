use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cpg_service::{serve, ServiceConfig};

/// Streams a live CPG session over WebSocket. Set CPG_LOG=info or debug for
/// logs.
#[derive(Parser)]
#[command(name = "cpg-serve", version)]
struct Args {
    scenario: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: String,
    /// Emit a state message every this many steps.
    #[arg(long, default_value_t = cpg_service::DEFAULT_DECIMATION)]
    decimation: NonZeroUsize,
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CPG_LOG", "info")).init();
    let args = Args::parse();
    let config = ServiceConfig {
        decimation: args.decimation,
        ..ServiceConfig::default()
    };
    match serve(&args.scenario, &args.bind, config).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
