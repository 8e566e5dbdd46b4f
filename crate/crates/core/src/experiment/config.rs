use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::layers::{Architecture, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Nonsmooth2d,
    Multiscale1d,
    Ntk,
    Heat,
    Helmholtz,
    Deeponet,
    Mnist,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Nonsmooth2d,
        Experiment::Multiscale1d,
        Experiment::Ntk,
        Experiment::Heat,
        Experiment::Helmholtz,
        Experiment::Deeponet,
        Experiment::Mnist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Nonsmooth2d => "nonsmooth2d",
            Experiment::Multiscale1d => "multiscale1d",
            Experiment::Ntk => "ntk",
            Experiment::Heat => "heat",
            Experiment::Helmholtz => "helmholtz",
            Experiment::Deeponet => "deeponet",
            Experiment::Mnist => "mnist",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Lbfgs,
}

/// Everything that determines a run. Serialized next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: Architecture,
    pub widths: Vec<usize>,
    pub grid_size: usize,
    pub kernel: KernelKind,
    /// First-layer grid range.
    pub domain: (f64, f64),
    pub input_tanh: bool,
    pub residual: bool,
    /// Multiplier on the initial basis-weight spread of KAN layers.
    pub init_scale: f64,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    /// Learning rate factor applied every `decay_every` epochs.
    pub gamma: f64,
    pub decay_every: usize,
    /// Zero means full batch.
    pub batch_size: usize,
    /// L-BFGS iterations on each batch.
    pub inner_iters: usize,
    /// Regression samples, or forcing functions for the operator task.
    pub n_samples: usize,
    /// Collocation points, or observations per forcing function.
    pub n_interior: usize,
    pub n_boundary: usize,
    /// Heat problem frequency.
    pub k_freq: f64,
    /// Steps at which the tangent kernel spectrum is recorded.
    pub checkpoints: Vec<usize>,
    /// Held-out forcing functions for the operator task.
    pub test_seeds: usize,
    /// Directory holding the four MNIST IDX files.
    pub data_dir: Option<PathBuf>,
    /// Cap on MNIST training rows.
    pub sample_limit: Option<usize>,
    pub fast: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Published settings for `experiment` and `model`; `fast` selects the
    /// desk-scale variant where one exists.
    pub fn preset(experiment: Experiment, model: Architecture, fast: bool) -> Self {
        use Architecture::*;
        let kan = model.is_kan();
        let mut c = ExperimentConfig {
            experiment,
            model,
            widths: vec![],
            grid_size: 5,
            kernel: KernelKind::Gaussian,
            domain: (0.0, 1.0),
            input_tanh: false,
            residual: true,
            init_scale: 1.0,
            epochs: 1,
            optimizer: OptimizerKind::Adam,
            lr: 1e-3,
            gamma: 1.0,
            decay_every: 1,
            batch_size: 0,
            inner_iters: 1,
            n_samples: 0,
            n_interior: 0,
            n_boundary: 0,
            k_freq: 0.0,
            checkpoints: vec![],
            test_seeds: 0,
            data_dir: None,
            sample_limit: None,
            fast,
            seed: 0,
            out_dir: PathBuf::from("runs"),
        };
        match experiment {
            Experiment::Nonsmooth2d => {
                c.widths = if kan { vec![2, 5, 1] } else { vec![2, 10, 10, 10, 1] };
                c.grid_size = 6;
                c.optimizer = OptimizerKind::Lbfgs;
                c.lr = 1.0;
                c.epochs = 300;
                c.n_samples = 16384;
                c.batch_size = 1024;
                c.inner_iters = 5;
            }
            Experiment::Multiscale1d | Experiment::Ntk => {
                c.widths = if kan { vec![1, 5, 5, 5, 1] } else { vec![1, 100, 100, 100, 100, 1] };
                c.grid_size = 20;
                c.input_tanh = kan;
                c.epochs = 9000;
                c.n_samples = 100;
                if experiment == Experiment::Ntk {
                    c.checkpoints = vec![0, 1000, 3000, 9000];
                }
            }
            Experiment::Heat => {
                c.widths = if kan { vec![2, 5, 5, 1] } else { vec![2, 40, 40, 40, 1] };
                c.grid_size = 30;
                c.gamma = 0.999;
                c.init_scale = 0.1;
                if fast {
                    c.k_freq = 10.0;
                    c.epochs = 3000;
                    c.n_interior = 1000;
                    c.n_boundary = 100;
                } else {
                    c.k_freq = 50.0;
                    c.epochs = 15000;
                    c.n_interior = 4000;
                    c.n_boundary = 200;
                }
            }
            Experiment::Helmholtz => {
                c.widths = if kan { vec![2, 5, 5, 1] } else { vec![2, 128, 128, 128, 1] };
                c.grid_size = 10;
                c.domain = (-3.0, 3.0);
                c.init_scale = 0.1;
                c.epochs = 5000;
                c.n_interior = if fast { 1000 } else { 4000 };
                c.n_boundary = 100;
            }
            Experiment::Deeponet => {
                c.widths = if kan { vec![2, 4, 4, 4, 100] } else { vec![2, 40, 40, 40, 40, 100] };
                c.grid_size = 20;
                c.gamma = 0.95;
                c.decay_every = 250;
                c.epochs = if fast { 2000 } else { 10000 };
                c.n_samples = 50;
                c.n_interior = 10;
                c.test_seeds = 30;
            }
            Experiment::Mnist => {
                c.widths = vec![784, 64, 10];
                c.grid_size = 10;
                c.residual = false;
                c.batch_size = 64;
                c.epochs = if fast { 3 } else { 20 };
                c.sample_limit = fast.then_some(2000);
            }
        }
        if model == Mlp {
            c.grid_size = 0;
        }
        c
    }

    pub fn model_spec(&self) -> ModelSpec {
        let mut s = ModelSpec::new(self.model, &self.widths)
            .kernel(self.kernel)
            .domain(self.domain.0, self.domain.1)
            .input_tanh(self.input_tanh)
            .residual(self.residual)
            .init_scale(self.init_scale);
        if self.model.is_kan() {
            s = s.grid(self.grid_size);
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if !(self.lr > 0.0) || !(self.gamma > 0.0) || self.decay_every == 0 || self.inner_iters == 0 {
            return Err(Error::Config(
                "learning rate, gamma, decay interval and inner iterations must be positive".into(),
            ));
        }
        if self.model.is_kan() && self.grid_size == 0 {
            return Err(Error::Config("KAN models need a positive grid size".into()));
        }
        let pinn = matches!(self.experiment, Experiment::Heat | Experiment::Helmholtz);
        if pinn && (self.n_interior == 0 || self.n_boundary == 0) {
            return Err(Error::Config("collocation counts must be positive".into()));
        }
        if self.experiment == Experiment::Heat && !(self.k_freq >= 1.0) {
            return Err(Error::Config(format!("heat frequency must be >= 1, got {}", self.k_freq)));
        }
        self.model_spec().validate()
    }

    /// Hex SHA-256 of the canonical JSON form; changes with any field.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `[2,5,1]`.
    pub fn layers_label(&self) -> String {
        let w: Vec<String> = self.widths.iter().map(usize::to_string).collect();
        format!("[{}]", w.join(","))
    }

    pub fn basis_label(&self) -> &'static str {
        match self.model {
            Architecture::Mlp => "Tanh",
            Architecture::Kan => "B-spline",
            _ => match self.kernel {
                KernelKind::Gaussian => "Gaussian",
                KernelKind::Matern52 => "Matern-5/2",
            },
        }
    }
}
