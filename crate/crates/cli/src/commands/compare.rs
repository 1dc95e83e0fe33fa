use clap::Args;
use finsurr::harness::{compare_variants, write_comparison_csv, HarnessConfig};
use finsurr::kinematics::{Architecture, Variant};
use serde::{Deserialize, Serialize};

use super::gen_test::TestChoice;
use super::{DataArgs, DataSource, HarnessArgs};
use crate::context::{io_error, CliResult, Run};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub data: DataSource,
    pub specs: Vec<TestChoice>,
    pub variants: Vec<Variant>,
    pub architectures: Vec<Architecture>,
    pub harness: HarnessConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            data: DataSource::default(),
            specs: (1..=6)
                .map(|i| TestChoice::Named(format!("GT{i}")))
                .collect(),
            variants: Variant::ALL.to_vec(),
            architectures: Architecture::ALL.to_vec(),
            harness: HarnessConfig::default(),
        }
    }
}

/// Run every generalizability test for every variant and architecture.
#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated test names.
    #[arg(long, value_delimiter = ',')]
    pub specs: Option<Vec<String>>,
    /// Comma-separated variants (default: all four).
    #[arg(long, value_delimiter = ',')]
    pub variants: Option<Vec<Variant>>,
    /// Comma-separated architectures (default: both).
    #[arg(long, value_delimiter = ',')]
    pub archs: Option<Vec<Architecture>>,
    #[command(flatten)]
    pub harness: HarnessArgs,
}

impl CompareArgs {
    pub fn apply(self, c: &mut CompareConfig) {
        self.data.apply(&mut c.data);
        if let Some(s) = self.specs {
            c.specs = s.into_iter().map(TestChoice::Named).collect();
        }
        if let Some(v) = self.variants {
            c.variants = v;
        }
        if let Some(a) = self.archs {
            c.architectures = a;
        }
        self.harness.apply(&mut c.harness);
    }
}

pub fn run(config: &CompareConfig, run: &mut Run) -> CliResult<()> {
    let specs = config
        .specs
        .iter()
        .map(TestChoice::resolve)
        .collect::<CliResult<Vec<_>>>()?;
    let (dataset, rig) = config.data.load(run)?;
    let table = compare_variants(
        &dataset,
        &rig,
        &specs,
        &config.variants,
        &config.architectures,
        &config.harness,
        run.seed,
    )?;
    for a in &table.averages {
        log::info!(
            "{}-{} {}: {:.5} (reference {:.5})",
            a.architecture.label(),
            a.variant,
            a.label,
            a.mse,
            a.reference_mse
        );
    }
    run.write_json("comparison.json", &table)?;
    let path = run.path("comparison.csv");
    let mut buf = Vec::new();
    write_comparison_csv(&table, &mut buf).map_err(|e| io_error(&path, e))?;
    run.write("comparison.csv", buf)
}
