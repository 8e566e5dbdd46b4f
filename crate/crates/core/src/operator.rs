//! Operator learning for a 1-D reaction-diffusion equation: random forcing
//! fields, a reference solver, and a DeepONet with a swappable trunk.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Plain, Rev, Var};
use crate::error::{Error, Result};
use crate::layers::{init_model, Architecture, Model, ModelSpec, Network};
use crate::linalg::{cholesky, solve_tridiagonal};
use crate::rng::Seeds;
use crate::train::Workspace;

const JITTERS: [f64; 3] = [1e-10, 1e-8, 1e-6];

/// Zero-mean Gaussian field with squared-exponential covariance observed
/// at equispaced sensors on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GrfSampler {
    pub length_scale: f64,
    pub sensors: Vec<f64>,
    /// Jitter that made the covariance factorizable.
    pub jitter: f64,
    chol: Vec<f64>,
}

impl GrfSampler {
    pub fn new(length_scale: f64, n_sensors: usize) -> Result<Self> {
        if !(length_scale > 0.0) || n_sensors < 2 {
            return Err(Error::Config(format!(
                "GRF needs a positive length scale and >= 2 sensors, got {length_scale} and {n_sensors}"
            )));
        }
        let n = n_sensors;
        let sensors: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = sensors[i] - sensors[j];
                cov[i * n + j] = (-d * d / (2.0 * length_scale * length_scale)).exp();
            }
        }
        for jitter in JITTERS {
            let mut c = cov.clone();
            for i in 0..n {
                c[i * n + i] += jitter;
            }
            if let Some(chol) = cholesky(&c, n) {
                return Ok(GrfSampler {
                    length_scale,
                    sensors,
                    jitter,
                    chol,
                });
            }
        }
        Err(Error::Numerical(format!(
            "GRF covariance with length scale {length_scale} is not factorizable at jitter {}",
            JITTERS[JITTERS.len() - 1]
        )))
    }

    /// Length scale 0.2 on 100 sensors.
    pub fn standard() -> Self {
        GrfSampler::new(0.2, 100).expect("standard GRF factorizes")
    }

    pub fn n_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn sample_with(&self, rng: &mut impl Rng) -> Vec<f64> {
        let n = self.n_sensors();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        (0..n)
            .map(|i| (0..=i).map(|j| self.chol[i * n + j] * z[j]).sum())
            .collect()
    }

    /// Function `index` of the family drawn from `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Vec<f64> {
        self.sample_with(&mut Seeds::new(seed).grf(index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdConfig {
    pub diffusion: f64,
    pub reaction: f64,
    /// Spatial nodes on `[0, 1]` including both Dirichlet ends.
    pub nx: usize,
    /// Time steps on `(0, 1]`.
    pub nt: usize,
}

impl Default for RdConfig {
    fn default() -> Self {
        RdConfig {
            diffusion: 0.01,
            reaction: 0.01,
            nx: 100,
            nt: 100,
        }
    }
}

impl RdConfig {
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / (self.nx - 1) as f64
    }

    /// Time of output row `n`.
    pub fn t(&self, n: usize) -> f64 {
        (n + 1) as f64 / self.nt as f64
    }

    /// Same domain with halved spacing in space and time; coarse nodes are
    /// refined nodes `2i`.
    pub fn refined(&self) -> Self {
        RdConfig {
            nx: 2 * self.nx - 1,
            nt: 2 * self.nt,
            ..*self
        }
    }
}

/// Solution field, row `n` holding `u(., t_n)` at every spatial node.
#[derive(Debug, Clone, PartialEq)]
pub struct RdField {
    pub config: RdConfig,
    pub values: Vec<Vec<f64>>,
}

impl RdField {
    pub fn at(&self, n: usize, i: usize) -> f64 {
        self.values[n][i]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.values.concat()
    }
}

/// `u_t = D u_xx + k u^2 + f(x)` with zero initial and boundary values.
/// Diffusion is implicit, reaction and forcing explicit.
pub fn solve_reaction_diffusion(config: &RdConfig, forcing: &[f64]) -> Result<RdField> {
    let RdConfig { diffusion, reaction, nx, nt } = *config;
    if nx < 3 || nt < 1 {
        return Err(Error::Config(format!("grid {nx}x{nt} is too small")));
    }
    if forcing.len() != nx {
        return Err(Error::Shape(format!("forcing has {} values for {nx} nodes", forcing.len())));
    }
    let dx = 1.0 / (nx - 1) as f64;
    let dt = 1.0 / nt as f64;
    let r = diffusion * dt / (dx * dx);
    let m = nx - 2;
    let lower = vec![-r; m];
    let diag = vec![1.0 + 2.0 * r; m];
    let upper = vec![-r; m];
    let mut u = vec![0.0; nx];
    let mut values = Vec::with_capacity(nt);
    let mut rhs = vec![0.0; m];
    for n in 0..nt {
        for i in 0..m {
            let v = u[i + 1];
            rhs[i] = v + dt * (reaction * v * v + forcing[i + 1]);
        }
        let inner = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        u[1..nx - 1].copy_from_slice(&inner);
        if let Some(bad) = inner.iter().find(|v| !(v.abs() <= 1e6)) {
            return Err(Error::Numerical(format!("solution blew up to {bad} at step {}", n + 1)));
        }
        values.push(u.clone());
    }
    Ok(RdField {
        config: *config,
        values,
    })
}

/// Linear interpolation of node values on `[0, 1]` to `m` equispaced nodes.
pub fn resample(values: &[f64], m: usize) -> Vec<f64> {
    let n = values.len();
    (0..m)
        .map(|j| {
            let s = j as f64 / (m - 1) as f64 * (n - 1) as f64;
            let i = (s.floor() as usize).min(n - 2);
            let w = s - i as f64;
            (1.0 - w) * values[i] + w * values[i + 1]
        })
        .collect()
}

/// `||pred - truth|| / ||truth||`.
pub fn rel_l2(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!("{} predictions for {} values", pred.len(), truth.len())));
    }
    let den: f64 = truth.iter().map(|v| v * v).sum();
    if den == 0.0 {
        return Err(Error::Unsupported("relative error of an all-zero field".into()));
    }
    let num: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSample {
    pub f_values: Vec<f64>,
    /// `(x, t)` pairs.
    pub query_points: Vec<[f64; 2]>,
    pub u_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDataset {
    pub config: RdConfig,
    pub length_scale: f64,
    pub seeds: Vec<u64>,
    pub sensors: Vec<f64>,
    pub functions: Vec<FunctionSample>,
}

impl OperatorDataset {
    pub fn len(&self) -> usize {
        self.functions.iter().map(|f| f.u_values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingData(format!("{} not found", path.display())));
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// `n_functions` forcing fields from `seed`, each solved and observed at
/// `queries` interior nodes drawn uniformly with replacement.
pub fn build_dataset(
    sampler: &GrfSampler,
    config: &RdConfig,
    n_functions: usize,
    queries: usize,
    seed: u64,
) -> Result<OperatorDataset> {
    if sampler.n_sensors() != config.nx {
        return Err(Error::Shape(format!(
            "{} sensors for {} solver nodes",
            sampler.n_sensors(),
            config.nx
        )));
    }
    let seeds = Seeds::new(seed);
    let mut functions = Vec::with_capacity(n_functions);
    for k in 0..n_functions {
        let f = sampler.sample(seed, k as u64);
        let field = solve_reaction_diffusion(config, &f)?;
        let mut rng = seeds.indexed("queries", k as u64);
        let mut query_points = Vec::with_capacity(queries);
        let mut u_values = Vec::with_capacity(queries);
        for _ in 0..queries {
            let i = rng.random_range(1..config.nx - 1);
            let n = rng.random_range(0..config.nt);
            query_points.push([config.x(i), config.t(n)]);
            u_values.push(field.at(n, i));
        }
        functions.push(FunctionSample {
            f_values: f,
            query_points,
            u_values,
        });
    }
    Ok(OperatorDataset {
        config: *config,
        length_scale: sampler.length_scale,
        seeds: vec![seed],
        sensors: sampler.sensors.clone(),
        functions,
    })
}

/// `u(f; x, t) = sum_k branch_k(f) trunk_k(x, t) + bias`.
#[derive(Debug, Clone)]
pub struct DeepONet {
    pub branch: Model,
    pub trunk: Model,
    /// `[branch | trunk | bias]`.
    pub params: Vec<f64>,
}

impl DeepONet {
    pub fn new(branch: Model, trunk: Model) -> Result<Self> {
        if branch.n_outputs() != trunk.n_outputs() {
            return Err(Error::Shape(format!(
                "branch width {} differs from trunk width {}",
                branch.n_outputs(),
                trunk.n_outputs()
            )));
        }
        if trunk.n_inputs() != 2 {
            return Err(Error::Shape(format!("trunk takes (x, t), not {} inputs", trunk.n_inputs())));
        }
        let mut params = branch.params.values().to_vec();
        params.extend_from_slice(trunk.params.values());
        params.push(0.0);
        Ok(DeepONet { branch, trunk, params })
    }

    /// Tanh branch `[sensors, 40 x 4, width]` with the given trunk.
    pub fn with_trunk(trunk_spec: &ModelSpec, n_sensors: usize, seed: u64) -> Result<Self> {
        let width = *trunk_spec.widths.last().unwrap_or(&0);
        let branch = init_model(&ModelSpec::new(Architecture::Mlp, &[n_sensors, 40, 40, 40, 40, width]), seed)?;
        let trunk = init_model(trunk_spec, seed ^ 0x7472_756e_6b)?;
        DeepONet::new(branch, trunk)
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn trunk_params(&self) -> usize {
        self.trunk.n_params()
    }

    fn split<'a, T>(&self, p: &'a [T]) -> (&'a [T], &'a [T], &'a T) {
        let nb = self.branch.n_params();
        let nt = self.trunk.n_params();
        (&p[..nb], &p[nb..nb + nt], &p[nb + nt])
    }

    pub fn branch_out(&self, f: &[f64]) -> Vec<f64> {
        let (pb, _, _) = self.split(&self.params);
        self.branch.eval(pb, f)
    }

    pub fn trunk_out(&self, q: [f64; 2]) -> Vec<f64> {
        let (_, pt, _) = self.split(&self.params);
        self.trunk.eval(pt, &q)
    }

    pub fn bias(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    pub fn forward(&self, f: &[f64], q: [f64; 2]) -> Result<f64> {
        if f.len() != self.branch.n_inputs() {
            return Err(Error::Shape(format!("{} sensor values for a {}-input branch", f.len(), self.branch.n_inputs())));
        }
        let b = self.branch_out(f);
        let t = self.trunk_out(q);
        Ok(b.iter().zip(&t).map(|(a, c)| a * c).sum::<f64>() + self.bias())
    }

    /// Predictions on every node of `config`'s grid, row-major in time.
    pub fn predict_field(&self, f: &[f64], config: &RdConfig) -> Result<Vec<f64>> {
        let basis = self.trunk_grid(config);
        self.predict_with_basis(f, &basis)
    }

    /// Trunk outputs on every grid node; reusable across forcing functions.
    pub fn trunk_grid(&self, config: &RdConfig) -> Vec<Vec<f64>> {
        let (_, pt, _) = self.split(&self.params);
        let prep = self.trunk.prepare(&mut Plain, pt);
        let mut out = Vec::with_capacity(config.nx * config.nt);
        for n in 0..config.nt {
            for i in 0..config.nx {
                out.push(self.trunk.forward(&mut Plain, pt, &prep, &[config.x(i), config.t(n)]));
            }
        }
        out
    }

    pub fn predict_with_basis(&self, f: &[f64], basis: &[Vec<f64>]) -> Result<Vec<f64>> {
        if f.len() != self.branch.n_inputs() {
            return Err(Error::Shape(format!("{} sensor values for a {}-input branch", f.len(), self.branch.n_inputs())));
        }
        let b = self.branch_out(f);
        let bias = self.bias();
        Ok(basis
            .iter()
            .map(|t| b.iter().zip(t).map(|(a, c)| a * c).sum::<f64>() + bias)
            .collect())
    }

    /// Mean squared error over every observation and its gradient.
    pub fn loss_grad(&self, params: &[f64], data: &OperatorDataset, ws: &mut Workspace) -> Result<(f64, Vec<f64>)> {
        let total_obs = data.len();
        if total_obs == 0 {
            return Err(Error::Contract("empty operator dataset".into()));
        }
        let scale = 1.0 / total_obs as f64;
        let mut grad = vec![0.0; params.len()];
        let mut loss = 0.0;
        for func in &data.functions {
            ws.tape.clear();
            let p = ws.tape.vars(params);
            let (pb, pt, bias) = self.split(&p);
            let mut ctx = Rev::new(&mut ws.tape);
            let bprep = self.branch.prepare(&mut ctx, pb);
            let fs: Vec<Var> = func.f_values.iter().map(|&v| Var::constant(v)).collect();
            let b = self.branch.forward(&mut ctx, pb, &bprep, &fs);
            let tprep = self.trunk.prepare(&mut ctx, pt);
            let mut preds = Vec::with_capacity(func.query_points.len());
            for q in &func.query_points {
                let qs = [Var::constant(q[0]), Var::constant(q[1])];
                let t = self.trunk.forward(&mut ctx, pt, &tprep, &qs);
                let dot = ctx.tape.dot(&b, &t);
                preds.push(ctx.tape.add(dot, *bias));
            }
            let total = ws.tape.sum_sq_diff(&preds, &func.u_values);
            loss += scale * total.value();
            ws.accumulate(total, scale, &mut grad);
        }
        if !loss.is_finite() {
            return Err(Error::NonFinite("operator loss".into()));
        }
        Ok((loss, grad))
    }
}

/// Held-out forcing function for `seed`, from a stream disjoint from the
/// training family.
pub fn test_function(sampler: &GrfSampler, seed: u64) -> Vec<f64> {
    sampler.sample_with(&mut Seeds::new(seed).indexed("grf-test", 0))
}

/// Relative L2 error on fresh forcing functions, one per test seed.
pub fn evaluate(net: &DeepONet, sampler: &GrfSampler, config: &RdConfig, test_seeds: &[u64]) -> Result<Vec<(u64, f64)>> {
    let basis = net.trunk_grid(config);
    test_seeds
        .iter()
        .map(|&s| {
            let f = test_function(sampler, s);
            let truth = solve_reaction_diffusion(config, &f)?.flatten();
            let pred = net.predict_with_basis(&f, &basis)?;
            Ok((s, rel_l2(&pred, &truth)?))
        })
        .collect()
}

/// Columns `seed,rel_l2`.
pub fn write_eval_csv(path: &Path, rows: &[(u64, f64)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "seed,rel_l2")?;
    for (s, e) in rows {
        writeln!(f, "{s},{e:e}")?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::grad_check;
    use std::f64::consts::PI;

    #[test]
    fn grf_moments() {
        let g = GrfSampler::standard();
        let n = 10_000;
        let mut rng = Seeds::new(3).stream("moments");
        let (i, j) = (30, 50);
        assert!((g.sensors[j] - g.sensors[i] - 20.0 / 99.0).abs() < 1e-12);
        // Sensors 0.2 apart do not sit on the 1/99 lattice; compare with the
        // covariance at the actual separation.
        let expect = (-(g.sensors[j] - g.sensors[i]).powi(2) / (2.0 * 0.04)).exp();
        let (mut sii, mut sjj, mut sij) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let f = g.sample_with(&mut rng);
            sii += f[i] * f[i];
            sjj += f[j] * f[j];
            sij += f[i] * f[j];
        }
        let (vi, vj) = (sii / n as f64, sjj / n as f64);
        assert!((vi - 1.0).abs() < 0.05, "{vi}");
        assert!((vj - 1.0).abs() < 0.05, "{vj}");
        let corr = sij / (sii * sjj).sqrt();
        assert!((corr - expect).abs() < 0.05, "{corr} vs {expect}");
        assert!((expect - (-0.5f64).exp()).abs() < 0.02);
        assert_eq!(g.sample(4, 2), g.sample(4, 2));
        assert_ne!(g.sample(4, 2), g.sample(4, 3));
        assert_eq!(g.jitter, 1e-10);
    }

    #[test]
    fn grf_rejects_bad_config() {
        assert!(matches!(GrfSampler::new(0.0, 100), Err(Error::Config(_))));
        assert!(matches!(GrfSampler::new(0.2, 1), Err(Error::Config(_))));
    }

    #[test]
    fn zero_forcing_gives_zero_field() {
        let c = RdConfig::default();
        let u = solve_reaction_diffusion(&c, &vec![0.0; 100]).unwrap();
        assert!(u.flatten().iter().all(|&v| v == 0.0));
        assert_eq!(u.values.len(), 100);
    }

    #[test]
    fn linear_case_matches_closed_form() {
        let c = RdConfig {
            reaction: 0.0,
            ..RdConfig::default()
        };
        let f: Vec<f64> = (0..c.nx).map(|i| (PI * c.x(i)).sin()).collect();
        let u = solve_reaction_diffusion(&c, &f).unwrap();
        let lam = c.diffusion * PI * PI;
        let exact: Vec<f64> = f.iter().map(|v| v / lam * (1.0 - (-lam).exp())).collect();
        let err = rel_l2(&u.values[c.nt - 1], &exact).unwrap();
        assert!(err < 2e-2, "{err}");
    }

    #[test]
    fn linear_in_forcing_without_reaction() {
        let c = RdConfig {
            reaction: 0.0,
            ..RdConfig::default()
        };
        let f = GrfSampler::standard().sample(1, 0);
        let a = solve_reaction_diffusion(&c, &f).unwrap().flatten();
        let f3: Vec<f64> = f.iter().map(|v| 3.0 * v).collect();
        let b = solve_reaction_diffusion(&c, &f3).unwrap().flatten();
        for (x, y) in a.iter().zip(&b) {
            assert!((3.0 * x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn refined_grid_agrees() {
        let c = RdConfig::default();
        let f = GrfSampler::standard().sample(2, 0);
        let coarse = solve_reaction_diffusion(&c, &f).unwrap();
        let rc = c.refined();
        let fine = solve_reaction_diffusion(&rc, &resample(&f, rc.nx)).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for n in 0..c.nt {
            for i in 0..c.nx {
                a.push(coarse.at(n, i));
                b.push(fine.at(2 * n + 1, 2 * i));
            }
        }
        let err = rel_l2(&a, &b).unwrap();
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn blow_up_is_reported() {
        let c = RdConfig {
            reaction: 50.0,
            ..RdConfig::default()
        };
        let r = solve_reaction_diffusion(&c, &vec![50.0; 100]);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn dataset_shape_and_values() {
        let g = GrfSampler::standard();
        let c = RdConfig::default();
        let d = build_dataset(&g, &c, 50, 10, 0).unwrap();
        assert_eq!(d.len(), 500);
        for func in d.functions.iter().take(3) {
            let field = solve_reaction_diffusion(&c, &func.f_values).unwrap();
            for (q, u) in func.query_points.iter().zip(&func.u_values) {
                let i = (q[0] * 99.0).round() as usize;
                let n = (q[1] * 100.0).round() as usize - 1;
                assert!(i >= 1 && i <= 98);
                assert_eq!(field.at(n, i), *u);
            }
        }
        let other = build_dataset(&g, &c, 2, 10, 1).unwrap();
        assert_ne!(other.functions[0].query_points, d.functions[0].query_points);
        let again = build_dataset(&g, &c, 2, 10, 1).unwrap();
        assert_eq!(serde_json::to_string(&other).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn rel_l2_examples() {
        let t = [1.0, -2.0, 3.0];
        assert_eq!(rel_l2(&t, &t).unwrap(), 0.0);
        assert_eq!(rel_l2(&[2.0, -4.0, 6.0], &t).unwrap(), 1.0);
        let eps = 1e-3;
        let noisy: Vec<f64> = t.iter().map(|v| v + eps).collect();
        let expect = eps * 3f64.sqrt() / 14f64.sqrt();
        assert!((rel_l2(&noisy, &t).unwrap() - expect).abs() < 1e-15);
        assert!(matches!(rel_l2(&[0.0], &[0.0]), Err(Error::Unsupported(_))));
        assert!(matches!(rel_l2(&[0.0], &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    fn small_net(arch: Architecture) -> DeepONet {
        let trunk = ModelSpec::new(arch, &[2, 3, 4]).grid(4);
        DeepONet::with_trunk(&trunk, 6, 1).unwrap()
    }

    #[test]
    fn forward_matches_naive_dot_product() {
        let mut net = small_net(Architecture::FreeRbfKan);
        let k = net.n_params();
        net.params[k - 1] = 0.3;
        let f = [0.1, -0.2, 0.4, 0.0, 1.0, -1.0];
        let q = [0.25, 0.75];
        let b = net.branch.predict(&f);
        let t = net.trunk.predict(&q);
        let mut acc = 0.3;
        for i in 0..4 {
            acc += b[i] * t[i];
        }
        assert!((net.forward(&f, q).unwrap() - acc).abs() < 1e-12);
        assert!(matches!(net.forward(&f[..5], q), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_branch_gives_bias() {
        let mut net = small_net(Architecture::Mlp);
        let nb = net.branch.n_params();
        net.params[..nb].iter_mut().for_each(|v| *v = 0.0);
        let k = net.n_params();
        net.params[k - 1] = -0.7;
        assert_eq!(net.forward(&[1.0; 6], [0.5, 0.5]).unwrap(), -0.7);
    }

    #[test]
    fn one_hot_trunk_selects_first_branch_output() {
        // Zero weights with a unit bias on output 0 make the MLP trunk e_1.
        let mut net = small_net(Architecture::Mlp);
        let nb = net.branch.n_params();
        let bias_range = net.trunk.params.slice("layer1.bias").unwrap().range();
        let nt = net.trunk.n_params();
        for v in &mut net.params[nb..nb + nt] {
            *v = 0.0;
        }
        net.params[nb + bias_range.start] = 1.0;
        let k = net.n_params();
        net.params[k - 1] = 0.25;
        let f = [0.3; 6];
        let b = net.branch_out(&f);
        assert_eq!(net.forward(&f, [0.2, 0.9]).unwrap(), b[0] + 0.25);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let b = init_model(&ModelSpec::new(Architecture::Mlp, &[6, 3]), 0).unwrap();
        let t = init_model(&ModelSpec::new(Architecture::Mlp, &[2, 4]), 0).unwrap();
        assert!(matches!(DeepONet::new(b, t), Err(Error::Shape(_))));
    }

    #[test]
    fn loss_gradient_and_batch_independence() {
        let net = small_net(Architecture::FreeRbfKan);
        let g = GrfSampler::new(0.2, 6).unwrap();
        let c = RdConfig { nx: 6, nt: 5, ..RdConfig::default() };
        let data = build_dataset(&g, &c, 3, 4, 0).unwrap();
        let mut ws = Workspace::new();
        let (loss, grad) = net.loss_grad(&net.params, &data, &mut ws).unwrap();
        let mut direct = 0.0;
        for func in &data.functions {
            for (q, u) in func.query_points.iter().zip(&func.u_values) {
                direct += (net.forward(&func.f_values, *q).unwrap() - u).powi(2);
            }
        }
        assert!((loss - direct / 12.0).abs() < 1e-14);
        let err = grad_check(
            |p| {
                let mut n = net.clone();
                n.params = p.to_vec();
                n.loss_grad(p, &data, &mut Workspace::new()).unwrap().0
            },
            |_| grad.clone(),
            &net.params,
            1e-3,
        );
        assert!(err < 1e-6, "{err}");
        let field = net.predict_field(&data.functions[0].f_values, &c).unwrap();
        let q = [c.x(2), c.t(3)];
        assert_eq!(field[3 * c.nx + 2], net.forward(&data.functions[0].f_values, q).unwrap());
    }

    #[test]
    fn dataset_and_eval_files() {
        let dir = tempfile::tempdir().unwrap();
        let g = GrfSampler::standard();
        let d = build_dataset(&g, &RdConfig::default(), 2, 3, 5).unwrap();
        let p = dir.path().join("d.json");
        d.save(&p).unwrap();
        assert_eq!(OperatorDataset::load(&p).unwrap(), d);
        assert!(matches!(OperatorDataset::load(&dir.path().join("none.json")), Err(Error::MissingData(_))));
        let e = dir.path().join("e.csv");
        write_eval_csv(&e, &[(1, 0.5), (2, 0.25)]).unwrap();
        assert_eq!(std::fs::read_to_string(e).unwrap(), "seed,rel_l2\n1,5e-1\n2,2.5e-1\n");
    }
}
