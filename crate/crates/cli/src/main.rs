mod config;
mod report;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::CommandConfig;

fn main() -> ExitCode {
    let cfg = match CommandConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let report = match run::run_command(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = report::emit_report(&report, cfg.format, cfg.output_path.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if report.passes(cfg.tol) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
