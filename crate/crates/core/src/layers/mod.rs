//! Network architectures over a shared flat parameter vector.

pub mod bspline;
pub mod mlp;
pub mod rbf;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::autodiff::{Context, ParamSlice, ParamStore, Plain};
use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::rng::Seeds;

pub use bspline::{bspline_basis, refit_spline, BSplineLayer, SplineGrid};
pub use mlp::DenseLayer;
pub use rbf::{map_centroid, map_smoothness, unmap_centroid, RbfLayer, RbfPrepared};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Mlp,
    /// B-spline KAN.
    Kan,
    /// RBF-KAN with fixed centroids and widths.
    RbfKan,
    /// RBF-KAN with trainable centroids and widths.
    FreeRbfKan,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::Mlp,
        Architecture::Kan,
        Architecture::RbfKan,
        Architecture::FreeRbfKan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Mlp => "mlp",
            Architecture::Kan => "kan",
            Architecture::RbfKan => "rbf-kan",
            Architecture::FreeRbfKan => "free-rbf-kan",
        }
    }

    /// Display label used in tables.
    pub fn label(self) -> &'static str {
        match self {
            Architecture::Mlp => "MLP",
            Architecture::Kan => "KAN",
            Architecture::RbfKan => "RBF-KAN",
            Architecture::FreeRbfKan => "Free-RBF-KAN",
        }
    }

    pub fn is_kan(self) -> bool {
        self != Architecture::Mlp
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown model '{s}' (expected mlp, kan, rbf-kan or free-rbf-kan)"))
    }
}

/// Everything needed to build a model besides the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub arch: Architecture,
    /// Node counts `[n_0, ..., n_L]`.
    pub widths: Vec<usize>,
    /// Basis functions per edge (RBF) or grid intervals (B-spline).
    pub grid_size: usize,
    pub kernel: KernelKind,
    /// Grid range of the first layer.
    pub domain: (f64, f64),
    /// Grid range of every later layer.
    pub hidden_domain: (f64, f64),
    /// Elementwise tanh on the inputs of every KAN layer.
    pub input_tanh: bool,
    /// `W * silu(x)` path in KAN layers.
    pub residual: bool,
    /// Bias vectors in MLP layers.
    pub bias: bool,
    /// Multiplier on the standard deviation of the initial basis weights
    /// (`omega`, spline coefficients).
    #[serde(default = "unit")]
    pub init_scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn new(arch: Architecture, widths: &[usize]) -> Self {
        ModelSpec {
            arch,
            widths: widths.to_vec(),
            grid_size: 5,
            kernel: KernelKind::Gaussian,
            domain: (0.0, 1.0),
            hidden_domain: (0.0, 1.0),
            input_tanh: false,
            residual: true,
            bias: true,
            init_scale: 1.0,
        }
    }

    pub fn grid(mut self, g: usize) -> Self {
        self.grid_size = g;
        self
    }

    pub fn kernel(mut self, k: KernelKind) -> Self {
        self.kernel = k;
        self
    }

    pub fn domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }

    pub fn input_tanh(mut self, on: bool) -> Self {
        self.input_tanh = on;
        self
    }

    pub fn residual(mut self, on: bool) -> Self {
        self.residual = on;
        self
    }

    pub fn bias(mut self, on: bool) -> Self {
        self.bias = on;
        self
    }

    pub fn init_scale(mut self, s: f64) -> Self {
        self.init_scale = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 || self.widths.iter().any(|&w| w == 0) {
            return Err(Error::Config(format!(
                "layer widths must have at least two positive entries, got {:?}",
                self.widths
            )));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config(format!("init scale must be positive, got {}", self.init_scale)));
        }
        if self.arch.is_kan() {
            if self.grid_size == 0 {
                return Err(Error::Config("grid size must be positive".into()));
            }
            for (lo, hi) in [self.domain, self.hidden_domain] {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Config(format!("grid range needs lo < hi, got ({lo}, {hi})")));
                }
            }
        }
        Ok(())
    }

    /// Closed-form parameter count for this spec.
    pub fn expected_param_count(&self) -> usize {
        let g = self.grid_size;
        self.widths
            .windows(2)
            .map(|w| {
                let e = w[0] * w[1];
                let base = if self.residual { e } else { 0 };
                match self.arch {
                    Architecture::Mlp => e + if self.bias { w[1] } else { 0 },
                    Architecture::Kan => (g + bspline::ORDER) * e + e + base,
                    Architecture::RbfKan => g * e + e + base,
                    Architecture::FreeRbfKan => 3 * g * e + e + base,
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    Spline(BSplineLayer),
    Rbf(RbfLayer),
}

impl Layer {
    pub fn n_in(&self) -> usize {
        match self {
            Layer::Dense(l) => l.n_in,
            Layer::Spline(l) => l.n_in,
            Layer::Rbf(l) => l.n_in,
        }
    }

    pub fn n_out(&self) -> usize {
        match self {
            Layer::Dense(l) => l.n_out,
            Layer::Spline(l) => l.n_out,
            Layer::Rbf(l) => l.n_out,
        }
    }
}

/// Anything that maps an input vector to an output vector through the
/// evaluation [`Context`] abstraction.
///
/// Parameters are passed explicitly so the same network can be evaluated
/// with plain values or with tape variables.
pub trait Network {
    /// Parameter-only quantities computed once per pass.
    type Prepared<P: Copy>;

    fn n_inputs(&self) -> usize;
    fn n_outputs(&self) -> usize;
    fn n_params(&self) -> usize;

    /// Highest input-derivative order for which outputs are continuous.
    fn continuity(&self) -> u32 {
        u32::MAX
    }

    fn prepare<C: Context>(&self, ctx: &mut C, params: &[C::P]) -> Self::Prepared<C::P>;

    fn forward<C: Context>(
        &self,
        ctx: &mut C,
        params: &[C::P],
        prep: &Self::Prepared<C::P>,
        x: &[C::S],
    ) -> Vec<C::S>;

    /// Plain evaluation at `params`.
    fn eval(&self, params: &[f64], x: &[f64]) -> Vec<f64> {
        let prep = self.prepare(&mut Plain, params);
        self.forward(&mut Plain, params, &prep, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub seed: u64,
    pub layers: Vec<Layer>,
    pub params: ParamStore,
}

impl Network for Model {
    type Prepared<P: Copy> = Vec<Option<RbfPrepared<P>>>;

    fn n_inputs(&self) -> usize {
        self.spec.widths[0]
    }

    fn n_outputs(&self) -> usize {
        *self.spec.widths.last().unwrap()
    }

    fn n_params(&self) -> usize {
        self.params.len()
    }

    fn continuity(&self) -> u32 {
        match self.spec.arch {
            Architecture::Mlp => u32::MAX,
            // cubic splines are C2 across knots
            Architecture::Kan => 2,
            Architecture::RbfKan | Architecture::FreeRbfKan => self.spec.kernel.continuity(),
        }
    }

    fn prepare<C: Context>(&self, ctx: &mut C, params: &[C::P]) -> Self::Prepared<C::P> {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Rbf(r) => Some(r.prepare(ctx, params)),
                _ => None,
            })
            .collect()
    }

    fn forward<C: Context>(
        &self,
        ctx: &mut C,
        params: &[C::P],
        prep: &Self::Prepared<C::P>,
        x: &[C::S],
    ) -> Vec<C::S> {
        let mut h = x.to_vec();
        for (layer, p) in self.layers.iter().zip(prep) {
            h = match layer {
                Layer::Dense(l) => l.forward(ctx, params, &h),
                Layer::Spline(l) => l.forward(ctx, params, &h),
                Layer::Rbf(l) => l.forward(ctx, params, p.as_ref().unwrap(), &h),
            };
        }
        h
    }
}

impl Model {
    /// Plain evaluation at the model's own parameters.
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.eval(self.params.values(), x)
    }

    /// Checked variant of [`Model::predict`].
    pub fn try_predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_inputs() {
            return Err(Error::Shape(format!(
                "model expects {} inputs, got {}",
                self.n_inputs(),
                x.len()
            )));
        }
        Ok(self.predict(x))
    }

    /// Inputs seen by every layer, one row per sample.
    pub fn layer_inputs(&self, samples: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
        let params = self.params.values();
        let prep = self.prepare(&mut Plain, params);
        let mut per_layer = vec![Vec::with_capacity(samples.len()); self.layers.len()];
        for s in samples {
            let mut h = s.clone();
            for (k, (layer, p)) in self.layers.iter().zip(&prep).enumerate() {
                per_layer[k].push(h.clone());
                h = match layer {
                    Layer::Dense(l) => l.forward(&mut Plain, params, &h),
                    Layer::Spline(l) => l.forward(&mut Plain, params, &h),
                    Layer::Rbf(l) => l.forward(&mut Plain, params, p.as_ref().unwrap(), &h),
                };
            }
        }
        per_layer
    }

    /// Rescales every B-spline grid to the range of its observed inputs.
    /// A no-op for other architectures.
    pub fn update_grids(&mut self, samples: &[Vec<f64>]) -> Result<()> {
        if !matches!(self.spec.arch, Architecture::Kan) {
            return Ok(());
        }
        if samples.is_empty() {
            return Err(Error::Contract("grid update needs at least one sample".into()));
        }
        // Layer by layer, so later layers see inputs produced by the
        // already refitted earlier layers.
        for k in 0..self.layers.len() {
            let inputs = self.layer_inputs(samples).swap_remove(k);
            if let Layer::Spline(l) = &mut self.layers[k] {
                l.update_grid(self.params.values_mut(), &inputs)?;
            }
        }
        Ok(())
    }

    pub fn rbf_layers(&self) -> impl Iterator<Item = &RbfLayer> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Rbf(r) => Some(r),
            _ => None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        Model::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checkpoint document with parameters at 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        let mut values = Vec::with_capacity(self.params.len());
        for (k, &v) in self.params.values().iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("parameter {k} is {v}")));
            }
            values.push(RawValue::from_string(format!("{v:.16e}"))?);
        }
        let doc = CheckpointOut {
            spec: &self.spec,
            seed: self.seed,
            param_names: self.params.slices(),
            param_values: values,
            grids: self.spline_grids(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let doc: CheckpointIn = serde_json::from_str(text)?;
        let mut model = init_model(&doc.spec, doc.seed)?;
        if model.params.slices() != doc.param_names.as_slice() {
            return Err(Error::Format("checkpoint parameter layout does not match its spec".into()));
        }
        let store = ParamStore::from_parts(doc.param_names, doc.param_values)?;
        model.params = store;
        let mut grids = doc.grids.into_iter();
        for layer in &mut model.layers {
            if let Layer::Spline(l) = layer {
                let g = grids
                    .next()
                    .ok_or_else(|| Error::Format("checkpoint is missing spline grids".into()))?;
                if g.len() != l.grids.len() {
                    return Err(Error::Format("spline grid count mismatch".into()));
                }
                for s in &g {
                    SplineGrid::new(s.lo, s.hi, s.intervals)?;
                }
                l.grids = g;
            }
        }
        Ok(model)
    }

    fn spline_grids(&self) -> Vec<Vec<SplineGrid>> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Spline(s) => Some(s.grids.clone()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Serialize)]
struct CheckpointOut<'a> {
    spec: &'a ModelSpec,
    seed: u64,
    param_names: &'a [ParamSlice],
    param_values: Vec<Box<RawValue>>,
    grids: Vec<Vec<SplineGrid>>,
}

#[derive(Deserialize)]
struct CheckpointIn {
    spec: ModelSpec,
    seed: u64,
    param_names: Vec<ParamSlice>,
    param_values: Vec<f64>,
    #[serde(default)]
    grids: Vec<Vec<SplineGrid>>,
}

pub fn count_parameters(model: &Model) -> usize {
    model.params.slices().iter().map(|s| s.len).sum()
}

/// Builds a model with deterministic initial parameters.
///
/// KAN layers: `omega ~ N(0, s^2/(G n_in))` with `s = spec.init_scale`,
/// `W_rbf = 1`, `W = 1/n_in`, centroids at cell midpoints of the layer's
/// grid range and `sigma = span / G`. Spline coefficients use the same normal law as
/// `omega`. MLP layers use Glorot-normal weights and zero biases.
pub fn init_model(spec: &ModelSpec, seed: u64) -> Result<Model> {
    spec.validate()?;
    let mut rng = Seeds::new(seed).init();
    let mut params = ParamStore::new();
    let mut layers = Vec::with_capacity(spec.widths.len() - 1);
    let n_layers = spec.widths.len() - 1;
    let g = spec.grid_size;

    for (l, w) in spec.widths.windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        let e = n_in * n_out;
        let hidden = l + 1 < n_layers;
        let (lo, hi) = if l == 0 { spec.domain } else { spec.hidden_domain };
        let name = |s: &str| format!("layer{l}.{s}");

        let layer = match spec.arch {
            Architecture::Mlp => {
                let std = (2.0 / (n_in + n_out) as f64).sqrt();
                let weight = params.push(name("weight"), &normal_vec(&mut rng, e, std));
                let bias = spec.bias.then(|| params.push(name("bias"), &vec![0.0; n_out]));
                Layer::Dense(DenseLayer { n_in, n_out, hidden, weight, bias })
            }
            Architecture::Kan => {
                let grid = SplineGrid::new(lo, hi, g)?;
                let nb = grid.n_basis();
                let std = spec.init_scale * (1.0 / (g * n_in) as f64).sqrt();
                let coef = params.push(name("coef"), &normal_vec(&mut rng, e * nb, std));
                let w_spline = params.push(name("w_spline"), &vec![1.0; e]);
                let w_base = spec
                    .residual
                    .then(|| params.push(name("w"), &vec![1.0 / n_in as f64; e]));
                Layer::Spline(BSplineLayer {
                    n_in,
                    n_out,
                    grids: vec![grid; n_in],
                    hidden,
                    residual: spec.residual,
                    input_tanh: spec.input_tanh,
                    coef,
                    w_spline,
                    w_base,
                })
            }
            Architecture::RbfKan | Architecture::FreeRbfKan => {
                let free = spec.arch == Architecture::FreeRbfKan;
                let std = spec.init_scale * (1.0 / (g * n_in) as f64).sqrt();
                let centers = rbf::uniform_centroids(lo, hi, g);
                let sigma = (hi - lo) / g as f64;
                let omega = params.push(name("omega"), &normal_vec(&mut rng, e * g, std));
                let (raw_c, raw_sigma) = if free {
                    let rc: Vec<f64> = centers.iter().map(|&c| unmap_centroid(c, lo, hi)).collect();
                    let rc: Vec<f64> = (0..e).flat_map(|_| rc.iter().copied()).collect();
                    (
                        Some(params.push(name("raw_c"), &rc)),
                        Some(params.push(name("raw_sigma"), &vec![sigma.ln(); e * g])),
                    )
                } else {
                    (None, None)
                };
                let w_rbf = params.push(name("w_rbf"), &vec![1.0; e]);
                let w_base = spec
                    .residual
                    .then(|| params.push(name("w"), &vec![1.0 / n_in as f64; e]));
                Layer::Rbf(RbfLayer {
                    n_in,
                    n_out,
                    grid_size: g,
                    kernel: spec.kernel,
                    lo,
                    hi,
                    free_centroids: free,
                    free_smoothness: free,
                    hidden,
                    residual: spec.residual,
                    input_tanh: spec.input_tanh,
                    omega,
                    raw_c,
                    raw_sigma,
                    w_rbf,
                    w_base,
                    fixed_c: centers,
                    fixed_sigma: sigma,
                })
            }
        };
        layers.push(layer);
    }

    Ok(Model {
        spec: spec.clone(),
        seed,
        layers,
        params,
    })
}

fn normal_vec(rng: &mut impl Rng, n: usize, std: f64) -> Vec<f64> {
    let d = Normal::new(0.0, std).expect("finite positive std");
    (0..n).map(|_| d.sample(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{Rev, Tape};
    use crate::kernels::kernel_eval;
    use crate::layers::bspline::bspline_basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    fn silu(x: f64) -> f64 {
        x * sigmoid(x)
    }

    fn perturb(model: &mut Model, seed: u64, scale: f64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for v in model.params.values_mut() {
            *v += scale * (r.random::<f64>() - 0.5);
        }
    }

    #[test]
    fn rbf_layer_matches_naive_loops() {
        let spec = ModelSpec::new(Architecture::FreeRbfKan, &[2, 3]).grid(4).domain(-1.0, 2.0);
        let mut m = init_model(&spec, 0).unwrap();
        perturb(&mut m, 11, 0.8);
        let Layer::Rbf(l) = &m.layers[0] else { panic!() };
        let p = m.params.values();
        let omega = m.params.get("layer0.omega").unwrap();
        let raw_c = m.params.get("layer0.raw_c").unwrap();
        let raw_s = m.params.get("layer0.raw_sigma").unwrap();
        let w_rbf = m.params.get("layer0.w_rbf").unwrap();
        let w = m.params.get("layer0.w").unwrap();
        let x = [0.3, 1.4];
        let got = m.eval(p, &x);
        for i in 0..3 {
            let mut acc = 0.0;
            for j in 0..2 {
                for k in 0..4 {
                    let idx = (i * 2 + j) * 4 + k;
                    let c = -1.0 + 1.5 * (raw_c[idx].tanh() + 1.0);
                    let s = raw_s[idx].exp();
                    acc += w_rbf[i * 2 + j] * omega[idx] * (-((x[j] - c) / s).powi(2)).exp();
                }
                acc += w[i * 2 + j] * silu(x[j]);
            }
            assert!((got[i] - acc).abs() < 1e-12, "{} vs {acc}", got[i]);
        }
        assert!(!l.hidden);
    }

    #[test]
    fn spline_layer_matches_naive_loops() {
        let spec = ModelSpec::new(Architecture::Kan, &[2, 3, 1]).grid(5);
        let mut m = init_model(&spec, 4).unwrap();
        perturb(&mut m, 5, 0.6);
        let Layer::Spline(l) = &m.layers[0] else { panic!() };
        let knots = l.grids[0].knots();
        let nb = l.n_basis();
        let coef = m.params.get("layer0.coef").unwrap();
        let ws = m.params.get("layer0.w_spline").unwrap();
        let w = m.params.get("layer0.w").unwrap();
        let x = [0.21, 0.77];
        let mut expect = [0.0; 3];
        for i in 0..3 {
            let mut acc = 0.0;
            for j in 0..2 {
                let b = bspline_basis(&knots, 3, x[j]);
                let e = i * 2 + j;
                let s: f64 = (0..nb).map(|k| coef[e * nb + k] * b[k]).sum();
                acc += ws[e] * s + w[e] * silu(x[j]);
            }
            expect[i] = sigmoid(acc);
        }
        let Layer::Spline(first) = &m.layers[0] else { panic!() };
        let got = first.forward(&mut Plain, m.params.values(), &x);
        for i in 0..3 {
            assert!((got[i] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weights_give_half_on_hidden_layers() {
        for arch in [Architecture::Kan, Architecture::RbfKan, Architecture::FreeRbfKan] {
            let spec = ModelSpec::new(arch, &[2, 4, 1]);
            let mut m = init_model(&spec, 1).unwrap();
            for name in ["layer0.omega", "layer0.coef", "layer0.w"] {
                if let Some(s) = m.params.slice(name).cloned() {
                    m.params.values_mut()[s.range()].fill(0.0);
                }
            }
            let p = m.params.values().to_vec();
            let out = match &m.layers[0] {
                Layer::Rbf(l) => {
                    let prep = l.prepare(&mut Plain, &p);
                    l.forward(&mut Plain, &p, &prep, &[0.3, 0.6])
                }
                Layer::Spline(l) => l.forward(&mut Plain, &p, &[0.3, 0.6]),
                Layer::Dense(_) => unreachable!(),
            };
            assert!(out.iter().all(|&v| v == 0.5), "{arch}: {out:?}");
        }
    }

    #[test]
    fn single_edge_at_center_is_one() {
        let spec = ModelSpec::new(Architecture::RbfKan, &[1, 1]).grid(1).residual(false);
        let mut m = init_model(&spec, 0).unwrap();
        m.params.set_values(&[1.0, 1.0]).unwrap();
        let Layer::Rbf(l) = &m.layers[0] else { panic!() };
        let c = l.centroids(m.params.values())[0];
        assert_eq!(m.predict(&[c]), vec![kernel_eval(KernelKind::Gaussian, 0.0)]);
    }

    #[test]
    fn parameter_counts() {
        let rbf = ModelSpec::new(Architecture::RbfKan, &[2, 5, 1]).grid(6);
        assert_eq!(count_parameters(&init_model(&rbf, 0).unwrap()), 120);
        let free = ModelSpec::new(Architecture::FreeRbfKan, &[2, 5, 1]).grid(6);
        assert_eq!(count_parameters(&init_model(&free, 0).unwrap()), 300);
        let mlp = ModelSpec::new(Architecture::Mlp, &[1, 1]).bias(false);
        assert_eq!(count_parameters(&init_model(&mlp, 0).unwrap()), 1);
        for arch in Architecture::ALL {
            let s = ModelSpec::new(arch, &[3, 4, 2]).grid(7);
            let m = init_model(&s, 2).unwrap();
            assert_eq!(count_parameters(&m), s.expected_param_count());
            assert_eq!(m.params.len(), s.expected_param_count());
        }
    }

    #[test]
    fn fixed_variant_has_no_centroid_slices() {
        let m = init_model(&ModelSpec::new(Architecture::RbfKan, &[2, 3, 1]), 0).unwrap();
        assert!(m.params.slices().iter().all(|s| !s.name.contains("raw_")));
        let f = init_model(&ModelSpec::new(Architecture::FreeRbfKan, &[2, 3, 1]), 0).unwrap();
        assert!(f.params.slice("layer1.raw_sigma").is_some());
    }

    #[test]
    fn init_is_deterministic_and_uniform() {
        let spec = ModelSpec::new(Architecture::FreeRbfKan, &[2, 3, 1]).grid(5);
        let a = init_model(&spec, 9).unwrap();
        let b = init_model(&spec, 9).unwrap();
        assert_eq!(a.params, b.params);
        let first = a.rbf_layers().next().unwrap();
        let c = first.centroids(a.params.values());
        for (k, v) in c.iter().enumerate() {
            let expect = [0.1, 0.3, 0.5, 0.7, 0.9][k % 5];
            assert!((v - expect).abs() < 1e-12);
        }
        assert!(first.widths(a.params.values()).iter().all(|&s| (s - 0.2).abs() < 1e-15));
        assert_ne!(a.params, init_model(&spec, 10).unwrap().params);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(init_model(&ModelSpec::new(Architecture::Mlp, &[2]), 0).is_err());
        assert!(init_model(&ModelSpec::new(Architecture::Kan, &[2, 0, 1]), 0).is_err());
        assert!(init_model(&ModelSpec::new(Architecture::RbfKan, &[1, 1]).domain(1.0, 1.0), 0).is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        for arch in Architecture::ALL {
            let spec = ModelSpec::new(arch, &[2, 3, 1]);
            let mut m = init_model(&spec, 3).unwrap();
            perturb(&mut m, 8, 1.0);
            if arch == Architecture::Kan {
                m.update_grids(&[vec![0.1, 0.2], vec![0.4, 0.9]]).unwrap();
            }
            let back = Model::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn grid_update_rescales_first_layer() {
        let spec = ModelSpec::new(Architecture::Kan, &[1, 2, 1]).domain(-1.0, 1.0);
        let mut m = init_model(&spec, 0).unwrap();
        let samples: Vec<Vec<f64>> = (0..20).map(|k| vec![k as f64 / 19.0]).collect();
        let hidden_before = m.layer_inputs(&samples).swap_remove(1);
        let before: Vec<f64> = samples.iter().map(|s| m.predict(s)[0]).collect();
        m.update_grids(&samples).unwrap();
        let Layer::Spline(l) = &m.layers[0] else { panic!() };
        assert_eq!((l.grids[0].lo, l.grids[0].hi), (0.0, 1.0));
        // The new first-layer knots are a subset of the old ones, so the
        // refit reproduces that layer; the second layer's grid is not nested.
        let hidden_after = m.layer_inputs(&samples).swap_remove(1);
        for (a, b) in hidden_after.iter().flatten().zip(hidden_before.iter().flatten()) {
            assert!((a - b).abs() < 1e-10);
        }
        for (s, b) in samples.iter().zip(before) {
            assert!((m.predict(s)[0] - b).abs() < 1e-2 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn reverse_gradients_match_fd_for_every_architecture() {
        for arch in Architecture::ALL {
            let spec = ModelSpec::new(arch, &[2, 3, 1]).grid(4);
            let mut m = init_model(&spec, 6).unwrap();
            perturb(&mut m, 2, 0.5);
            let x = [0.35, 0.62];
            let f = |p: &[f64]| m.eval(p, &x)[0];
            let g = |p: &[f64]| {
                let mut tape = Tape::new();
                let vars = tape.vars(p);
                let mut ctx = Rev::new(&mut tape);
                let prep = m.prepare(&mut ctx, &vars);
                let xs = [crate::autodiff::Var::constant(x[0]), crate::autodiff::Var::constant(x[1])];
                let y = m.forward(&mut ctx, &vars, &prep, &xs)[0];
                tape.backward(y)[..p.len()].to_vec()
            };
            // Central differences at h = 1e-6 carry up to ~1e-9 absolute
            // roundoff, so components below ~1e-3 are compared against that floor.
            let err = crate::autodiff::grad_check(f, g, m.params.values(), 1e-3);
            assert!(err < 1e-6, "{arch}: {err}");
        }
    }
}
