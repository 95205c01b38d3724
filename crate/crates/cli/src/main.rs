use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use simplipy::commands::{self, exit, AnalyzeFlags, CfgFormat, Output, TraceFormat, DEFAULT_MAX_STEPS};
use simplipy::service::{self, Config};

#[derive(Parser)]
#[command(name = "simplipy", version, about = "SimpliPy notional machine tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and print its AST as JSON.
    Parse { file: PathBuf },
    /// Print static artifacts. With no flag, all of them.
    Analyze(AnalyzeArgs),
    /// Run a program and print its trace.
    Trace {
        file: PathBuf,
        #[arg(long, env = "SIMPLIPY_MAX_STEPS", default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Rewrite ordinary Python into SimpliPy.
    Simplify { file: PathBuf },
    /// Serve the debugger API and UI assets.
    Serve(ServeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long)]
    scopes: bool,
    #[arg(long, value_enum, num_args = 0..=1, default_missing_value = "json", require_equals = true)]
    cfg: Option<CfgArg>,
    /// Control transfer tables.
    #[arg(long)]
    ctf: bool,
    /// Structural abstraction.
    #[arg(long = "abstract")]
    abstraction: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "SIMPLIPY_PORT", default_value_t = 8000)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "SIMPLIPY_STATIC_DIR")]
    static_dir: Option<PathBuf>,
    #[arg(long, env = "SIMPLIPY_MAX_STEPS", default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Enable permissive CORS for a UI served from another origin.
    #[arg(long)]
    dev: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CfgArg {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn with_source(path: &Path, f: impl FnOnce(&str) -> Output) -> i32 {
    match commands::read_source(path) {
        Ok(src) => {
            let out = f(&src);
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("simplipy: {e}");
            exit::IO
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Parse { file } => with_source(&file, commands::parse),
        Command::Analyze(a) => {
            let flags = AnalyzeFlags {
                scopes: a.scopes,
                cfg: a.cfg.map(|c| match c {
                    CfgArg::Dot => CfgFormat::Dot,
                    CfgArg::Json => CfgFormat::Json,
                }),
                ctf: a.ctf,
                abstraction: a.abstraction,
            };
            with_source(&a.file, |s| commands::analyze(s, flags))
        }
        Command::Trace {
            file,
            max_steps,
            format,
        } => {
            let format = match format {
                Format::Json => TraceFormat::Json,
                Format::Text => TraceFormat::Text,
            };
            with_source(&file, |s| commands::trace(s, max_steps, format))
        }
        Command::Simplify { file } => with_source(&file, commands::simplify_source),
        Command::Serve(args) => serve(args),
    };
    ExitCode::from(code as u8)
}

fn serve(args: ServeArgs) -> i32 {
    let config = Config {
        max_steps: args.max_steps,
        static_dir: args.static_dir,
        dev: args.dev,
        ..Config::default()
    };
    let addr: SocketAddr = match format!("{}:{}", args.host, args.port).parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("simplipy: bad address: {e}");
            return exit::INVALID;
        }
    };
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    rt.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("simplipy: cannot bind {addr}: {e}");
                return exit::IO;
            }
        };
        eprintln!("simplipy: listening on http://{addr}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        match axum::serve(listener, service::router(config))
            .with_graceful_shutdown(shutdown)
            .await
        {
            Ok(()) => exit::OK,
            Err(e) => {
                eprintln!("simplipy: {e}");
                exit::IO
            }
        }
    })
}
