mod ber_curve;
mod k_surface;
mod link_sim;
mod optimal_n;
mod sigma0;

use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Common};
use crate::error::{CliError, CliResult};
use crate::output::{append_manifest, timestamp, CheckItem, Outputs, RunManifest};

/// State of one command run: where it writes, what it found.
pub struct Run {
    pub out: Outputs,
    pub checks: Vec<CheckItem>,
    pub summary: serde_json::Map<String, Value>,
    started_at: String,
}

impl Run {
    fn start(common: &Common) -> CliResult<Self> {
        Ok(Self {
            out: Outputs::create(&common.out)?,
            checks: Vec::new(),
            summary: serde_json::Map::new(),
            started_at: timestamp(),
        })
    }

    pub fn note<T: Serialize>(&mut self, key: &str, value: T) -> CliResult<()> {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!(
            "check {} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        self.checks.push(CheckItem::new(name, pass, detail));
    }

    fn finish<A: Serialize>(self, command: &str, common: &Common, args: &A) -> CliResult<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            config: serde_json::to_value(args)?,
            master_seed: common.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            finished_at: timestamp(),
            outputs: self.out.written().to_vec(),
            summary: Value::Object(self.summary),
            checks: self.checks.clone(),
        };
        append_manifest(self.out.dir(), &manifest)?;
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Check(failed))
        }
    }
}

pub fn dispatch(cmd: &Command) -> CliResult<()> {
    let name = cmd.name();
    match cmd {
        Command::BerCurve(a) => {
            let mut run = Run::start(&a.common)?;
            ber_curve::run(a, &mut run)?;
            run.finish(name, &a.common, a)
        }
        Command::KSurface(a) => {
            let mut run = Run::start(&a.common)?;
            k_surface::run(a, &mut run)?;
            run.finish(name, &a.common, a)
        }
        Command::Sigma0(a) => {
            let mut run = Run::start(&a.common)?;
            sigma0::run(a, &mut run)?;
            run.finish(name, &a.common, a)
        }
        Command::OptimalN(a) => {
            optimal_n::validate(a)?;
            let mut run = Run::start(&a.common)?;
            optimal_n::run(a, &mut run)?;
            run.finish(name, &a.common, a)
        }
        Command::LinkSim(a) => {
            link_sim::validate(a)?;
            let mut run = Run::start(&a.common)?;
            link_sim::run(a, &mut run)?;
            run.finish(name, &a.common, a)
        }
    }
}
