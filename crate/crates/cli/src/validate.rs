use std::path::PathBuf;

use anyhow::Result;
use synthkit_core::frame::{validate_dump, Issue, ValidationReport};

use crate::io::pretty;
use crate::Failure;

#[derive(clap::Args)]
pub struct Args {
    pub dump_root: PathBuf,
}

fn line(kind: &str, i: &Issue) -> String {
    let frame = i.frame_id.map_or(String::new(), |f| format!("frame {f} "));
    format!("{kind} {frame}{}: {:?}: {}\n", i.file.display(), i.kind, i.message)
}

fn render(r: &ValidationReport) -> String {
    let mut s = format!("frames: {} ({} valid)\n", r.frame_count, r.valid_frames);
    for i in &r.errors {
        s.push_str(&line("error", i));
    }
    for i in &r.warnings {
        s.push_str(&line("warning", i));
    }
    s
}

pub fn run(args: Args, json: bool) -> Result<()> {
    let report = validate_dump(&args.dump_root);
    print!("{}", if json { pretty(&report) } else { render(&report) });
    if report.is_ok() {
        return Ok(());
    }
    let code = if report.has_invariant_violation() { 2 } else { 1 };
    Err(Failure { code, message: format!("{} problem(s) in {}", report.errors.len(), args.dump_root.display()) }.into())
}
