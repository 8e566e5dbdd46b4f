//! Synthetic regression sets, IDX (MNIST) ingestion and batching.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub seed: Option<u64>,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        let d = Dataset {
            name: name.into(),
            seed: None,
            inputs,
            targets,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.targets.len() {
            return Err(Error::Shape(format!(
                "{} input rows but {} target rows",
                self.inputs.len(),
                self.targets.len()
            )));
        }
        let (di, dt) = (self.input_dim(), self.target_dim());
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            if x.len() != di || y.len() != dt {
                return Err(Error::Shape("ragged dataset rows".into()));
            }
            if x.iter().chain(y).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("dataset '{}'", self.name)));
            }
        }
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            seed: self.seed,
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
}

/// `cos(4 pi x) + sin(pi y) + sin(2 pi y) + |sin(3 pi y^2)|`.
pub fn nonsmooth2d(x: f64, y: f64) -> f64 {
    (4.0 * PI * x).cos() + (PI * y).sin() + (2.0 * PI * y).sin() + (3.0 * PI * y * y).sin().abs()
}

/// `0.1 sin(50 pi x) + sin(2 pi x)`.
pub fn multiscale1d(x: f64) -> f64 {
    0.1 * (50.0 * PI * x).sin() + (2.0 * PI * x).sin()
}

/// `n` uniform samples on the unit square, split 80/20 into train/test.
pub fn gen_nonsmooth2d(n: usize, seed: u64) -> Split {
    let seeds = Seeds::new(seed);
    let mut rng = seeds.stream("nonsmooth2d");
    let inputs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let targets = inputs.iter().map(|p| vec![nonsmooth2d(p[0], p[1])]).collect();
    let all = Dataset {
        name: "nonsmooth2d".into(),
        seed: Some(seed),
        inputs,
        targets,
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeds.stream("split"));
    let n_train = n * 4 / 5;
    Split {
        train: all.subset(&order[..n_train]),
        test: all.subset(&order[n_train..]),
    }
}

/// `n` uniform grid points on `[0, 1]`, endpoints included.
pub fn gen_multiscale1d(n: usize) -> Dataset {
    let inputs: Vec<Vec<f64>> = (0..n)
        .map(|i| vec![if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 }])
        .collect();
    let targets = inputs.iter().map(|x| vec![multiscale1d(x[0])]).collect();
    Dataset {
        name: "multiscale1d".into(),
        seed: None,
        inputs,
        targets,
    }
}

pub const IDX_IMAGES: u32 = 0x0000_0803;
pub const IDX_LABELS: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxFile {
    pub magic: u32,
    pub dims: Vec<usize>,
    pub payload: Vec<u8>,
}

impl IdxFile {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let word = |k: usize| -> Result<u32> {
            bytes
                .get(4 * k..4 * k + 4)
                .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
                .ok_or_else(|| Error::Format("IDX header is truncated".into()))
        };
        let magic = word(0)?;
        let ndims = match magic {
            IDX_IMAGES => 3,
            IDX_LABELS => 1,
            m => return Err(Error::Format(format!("bad IDX magic {m:#010x}"))),
        };
        let dims = (1..=ndims).map(|k| word(k).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let header = 4 * (ndims + 1);
        let len: usize = dims.iter().product();
        let payload = bytes
            .get(header..header + len)
            .ok_or_else(|| Error::Format(format!("IDX payload needs {len} bytes, found {}", bytes.len() - header)))?
            .to_vec();
        Ok(IdxFile { magic, dims, payload })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.magic.to_be_bytes().to_vec();
        for &d in &self.dims {
            out.extend((d as u32).to_be_bytes());
        }
        out.extend(&self.payload);
        out
    }

    /// Rows of pixel values scaled to `[0, 1]`.
    pub fn images(&self) -> Result<Vec<Vec<f64>>> {
        if self.magic != IDX_IMAGES {
            return Err(Error::Format("not an IDX image file".into()));
        }
        let row = self.dims[1] * self.dims[2];
        Ok(self
            .payload
            .chunks(row.max(1))
            .take(self.dims[0])
            .map(|c| c.iter().map(|&b| b as f64 / 255.0).collect())
            .collect())
    }

    /// One-hot rows over 10 classes.
    pub fn one_hot(&self) -> Result<Vec<Vec<f64>>> {
        if self.magic != IDX_LABELS {
            return Err(Error::Format("not an IDX label file".into()));
        }
        self.payload
            .iter()
            .map(|&l| {
                if l > 9 {
                    return Err(Error::Format(format!("label {l} outside 0..=9")));
                }
                let mut v = vec![0.0; 10];
                v[l as usize] = 1.0;
                Ok(v)
            })
            .collect()
    }
}

pub fn load_idx(path: &Path) -> Result<IdxFile> {
    if !path.exists() {
        return Err(Error::MissingData(format!("{} not found", path.display())));
    }
    IdxFile::parse(&std::fs::read(path)?)
}

pub fn write_idx(path: &Path, file: &IdxFile) -> Result<()> {
    std::fs::write(path, file.to_bytes())?;
    Ok(())
}

/// Images and one-hot labels as a regression set, optionally truncated.
pub fn load_mnist(images: &Path, labels: &Path, limit: Option<usize>) -> Result<Dataset> {
    let x = load_idx(images)?.images()?;
    let y = load_idx(labels)?.one_hot()?;
    if x.len() != y.len() {
        return Err(Error::Format(format!("{} images but {} labels", x.len(), y.len())));
    }
    let n = limit.map_or(x.len(), |l| l.min(x.len()));
    let mut d = Dataset::new("mnist", x, y)?;
    d.inputs.truncate(n);
    d.targets.truncate(n);
    Ok(d)
}

/// Index batches covering `0..n` once. Shuffled order is a function of
/// `(seed, epoch)`.
pub fn batches(n: usize, batch_size: usize, seed: u64, epoch: u64, shuffle: bool) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::Contract("cannot batch an empty dataset".into()));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        order.shuffle(&mut Seeds::new(seed).batching(epoch));
    }
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}
