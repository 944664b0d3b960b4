use std::process::ExitCode;

use clap::Parser;
use commitbench_server::cli::{cmd_generate, cmd_score, cmd_serve, Cli, Command};
use commitbench_server::config::Env;

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    eprintln!("shutting down");
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = Env::from_process();
    let result = match &cli.command {
        Command::Serve(args) => cmd_serve(args, &env, shutdown_signal()).await.map(|_| 0),
        Command::Generate(args) => {
            let mut stdout = std::io::stdout().lock();
            let mut stderr = std::io::stderr();
            cmd_generate(args, &env, &mut stdout, &mut stderr)
                .await
                .map(|r| r.exit_code())
        }
        Command::Score { original, generated } => {
            print!("{}", cmd_score(original, generated));
            Ok(0)
        }
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
