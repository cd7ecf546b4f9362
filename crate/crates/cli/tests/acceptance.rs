//! Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Also checks the out-of-hypothesis gate through the built binary.

use std::process::{Command, ExitCode};

use varilab_cli::suite::{run_suite, SuiteOptions};
use varilab_core::mesh::io::save;
use varilab_core::zoo::{generate, ZooSpec};

fn binary_gate() -> Result<i32, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mesh = dir.path().join("bubble.off");
    let bubble = generate(&ZooSpec::double_bubble(16)).map_err(|e| e.to_string())?;
    save(&bubble, &mesh).map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_varilab"))
        .args(["rigidity", "--input"])
        .arg(&mesh)
        .output()
        .map_err(|e| e.to_string())?;
    status.status.code().ok_or_else(|| "terminated by signal".into())
}

fn main() -> ExitCode {
    let report = run_suite(&SuiteOptions::default());
    for r in &report.results {
        println!("{}", r.line());
    }
    let gate = binary_gate();
    let gate_ok = gate == Ok(4);
    println!(
        "{} C8  binary exit code on double bubble  {:?} (== 4)",
        if gate_ok { "PASS" } else { "FAIL" },
        gate
    );
    let passed = report.passed && gate_ok;
    println!("{} of {} criteria passed", report.results.iter().filter(|r| r.passed).count(), report.results.len());
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
