use std::fmt::Write as _;

use clap::Args;
use finsurr::harness::{assemble_reduced, prepare};
use finsurr::kinematics::{Architecture, Variant};
use finsurr::nn::{self, random_search, NetConfig, SearchSpace, SurrogateModel, Trial};
use finsurr::reduction::{PcaMode, DEFAULT_COMPONENTS};
use finsurr::seed::derive_seed;
use serde::{Deserialize, Serialize};

use super::{csv_row, DataArgs, DataSource};
use crate::context::{config_error, CliResult, Failure, Run};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub trials: usize,
    /// Ranges to sample; the original tuning ranges when unset.
    pub space: Option<SearchSpace>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            trials: 8,
            space: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub data: DataSource,
    pub variant: Variant,
    pub architecture: Architecture,
    /// Network hyperparameters; the desk-scale defaults when unset. The
    /// input dimension and seed are filled in by the run.
    pub network: Option<NetConfig>,
    pub epochs: Option<usize>,
    pub pca_mode: PcaMode,
    pub pca_components: usize,
    pub search: Option<SearchConfig>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            data: DataSource::default(),
            variant: Variant::Fp,
            architecture: Architecture::Dense,
            network: None,
            epochs: None,
            pca_mode: PcaMode::Weighted,
            pca_components: DEFAULT_COMPONENTS,
            search: None,
        }
    }
}

/// Train one surrogate on the reduced protocol (one cycle per run, 80/20
/// split), optionally after a random hyperparameter search.
#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// BASELINE, FP, RFP or WFP.
    #[arg(long)]
    pub variant: Option<Variant>,
    /// dense or recurrent.
    #[arg(long)]
    pub arch: Option<Architecture>,
    /// Training epochs; overrides the network config.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Run a random search with this many trials and keep the best.
    #[arg(long, value_name = "TRIALS")]
    pub search: Option<usize>,
}

impl TrainArgs {
    pub fn apply(self, c: &mut TrainConfig) {
        self.data.apply(&mut c.data);
        if let Some(v) = self.variant {
            c.variant = v;
        }
        if let Some(a) = self.arch {
            c.architecture = a;
        }
        if let Some(e) = self.epochs {
            c.epochs = Some(e);
        }
        if let Some(n) = self.search {
            c.search.get_or_insert_with(SearchConfig::default).trials = n;
        }
    }
}

fn with_epochs(space: SearchSpace, e: usize) -> SearchSpace {
    match space {
        SearchSpace::Dense {
            layers,
            nodes,
            dropout,
            batch_size,
            learning_rate,
            ..
        } => SearchSpace::Dense {
            layers,
            nodes,
            dropout,
            batch_size,
            learning_rate,
            epochs: e,
        },
        SearchSpace::Recurrent {
            hidden_units,
            dropout,
            batch_size,
            learning_rate,
            ..
        } => SearchSpace::Recurrent {
            hidden_units,
            dropout,
            batch_size,
            learning_rate,
            epochs: e,
        },
    }
}

fn history_csv(model: &SurrogateModel) -> String {
    let mut text = String::from("epoch,train_mse,val_mse\n");
    let h = &model.history;
    for (i, t) in h.train_mse.iter().enumerate() {
        let v = h.val_mse.get(i).copied().unwrap_or(f64::NAN);
        writeln!(text, "{},{}", i + 1, csv_row(&[*t, v])).expect("string write");
    }
    text
}

pub fn run(config: &TrainConfig, run: &mut Run) -> CliResult<()> {
    let (dataset, rig) = config.data.load(run)?;
    let reduced = assemble_reduced(&dataset, run.seed)?;
    let p = prepare(
        config.variant,
        config.architecture,
        &reduced.train_cycles(),
        &reduced.val_cycles(),
        &rig,
        config.pca_mode,
        config.pca_components,
    )?;
    log::info!(
        "{} {}: {} inputs, {} training / {} validation cycles",
        config.variant,
        config.architecture.label(),
        p.schema.len(),
        p.train.len(),
        p.val.len()
    );

    let mut net = match &config.search {
        Some(search) => {
            let space = search
                .space
                .clone()
                .unwrap_or_else(|| SearchSpace::paper(config.architecture));
            let space = match config.epochs {
                Some(e) => with_epochs(space, e),
                None => space,
            };
            let seed = derive_seed(run.seed, "cli/search");
            let trials = random_search(
                &space,
                search.trials,
                p.schema.len(),
                &p.train,
                &p.val,
                seed,
            )?;
            for t in &trials {
                log::info!("trial {}: val MSE {:.5}", t.index, t.val_mse);
            }
            run.write_json("search.json", &trials)?;
            let best: &Trial = trials
                .first()
                .filter(|t| t.failure.is_none())
                .ok_or_else(|| {
                    Failure::Core(finsurr::Error::Internal(
                        "every search trial diverged".into(),
                    ))
                })?;
            best.config.clone()
        }
        None => {
            let mut net = config
                .network
                .clone()
                .unwrap_or_else(|| NetConfig::desk(config.architecture, 0));
            if let Some(e) = config.epochs {
                net.set_epochs(e);
            }
            net
        }
    };
    if net.architecture() != config.architecture {
        return Err(config_error(format!(
            "network config is {} but the run asks for {}",
            net.architecture(),
            config.architecture
        )));
    }
    net.set_input_dim(p.schema.len());
    net.set_seed(derive_seed(run.seed, "cli/train"));
    let trained = nn::train(&net, &p.train, &p.val)?;
    let model = SurrogateModel::new(
        p.schema,
        net,
        trained.network,
        p.norm,
        p.reducer,
        trained.history,
    )?;
    log::info!(
        "final train MSE {:.5}, validation MSE {:.5}",
        model.history.final_train().unwrap_or(f64::NAN),
        model.history.final_val().unwrap_or(f64::NAN)
    );
    let text = model.to_json()?;
    run.write("model.json", text)?;
    run.write("history.csv", history_csv(&model))
}
