use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use super::{Curve, ExperimentConfig, Experiment, OptimizerKind, Outcome, Timing};
use crate::data::{batches, gen_multiscale1d, gen_nonsmooth2d, load_mnist, Dataset};
use crate::error::{Error, Result};
use crate::layers::{count_parameters, init_model, Model, Network};
use crate::ntk::{spectrum_track, write_spectrum_csv};
use crate::operator::{build_dataset, evaluate, write_eval_csv, DeepONet, GrfSampler, RdConfig};
use crate::optim::{Adam, ExpSchedule, Lbfgs};
use crate::pinn::{
    eval_field, field_errors, heat_problem, helmholtz_problem, pinn_loss, sample_collocation_with, write_field_csv,
};
use crate::rng::Seeds;
use crate::train::{mse, mse_grad, Workspace};

fn schedule(c: &ExperimentConfig) -> impl Fn(usize) -> f64 {
    let s = ExpSchedule::new(c.lr, c.gamma);
    let every = c.decay_every;
    move |epoch| s.lr((epoch / every) as u32)
}

fn check_loss(loss: f64, epoch: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("training loss is {loss} at epoch {epoch}")))
    }
}

/// One pass over `train` in batches of `c.batch_size`, or one full-batch
/// step when it is zero. Returns the mean loss before each update.
fn supervised_epoch(
    c: &ExperimentConfig,
    model: &Model,
    params: &mut [f64],
    train: &Dataset,
    epoch: usize,
    adam: &mut Adam,
    lbfgs: &mut Lbfgs,
    ws: &mut Workspace,
) -> Result<f64> {
    let all: Vec<usize>;
    let groups = if c.batch_size == 0 {
        all = (0..train.len()).collect();
        vec![all]
    } else {
        batches(train.len(), c.batch_size, c.seed, epoch as u64, true)?
    };
    let mut acc = 0.0;
    let mut seen = 0;
    match c.optimizer {
        OptimizerKind::Adam => {
            for idx in &groups {
                let (loss, grad) = mse_grad(model, params, train, idx, ws);
                check_loss(loss, epoch)?;
                adam.step(params, &grad)?;
                acc += loss * idx.len() as f64;
                seen += idx.len();
            }
        }
        OptimizerKind::Lbfgs => {
            lbfgs.reset();
            for idx in &groups {
                for k in 0..c.inner_iters {
                    let step = lbfgs.step(params, |p| Ok(mse_grad(model, p, train, idx, ws)))?;
                    if k == 0 {
                        acc += step.loss_before * idx.len() as f64;
                        seen += idx.len();
                    }
                    if step.step_size == 0.0 {
                        break;
                    }
                }
            }
        }
    }
    let loss = acc / seen as f64;
    check_loss(loss, epoch)?;
    Ok(loss)
}

fn optimizers(c: &ExperimentConfig, n: usize) -> (Adam, Lbfgs) {
    (Adam::new(n, c.lr), Lbfgs::new(c.lr))
}

pub(super) fn nonsmooth2d(c: &ExperimentConfig) -> Result<Outcome> {
    let split = gen_nonsmooth2d(c.n_samples, c.seed);
    let mut model = init_model(&c.model_spec(), c.seed)?;
    let mut params = model.params.values().to_vec();
    let (mut adam, mut lbfgs) = optimizers(c, params.len());
    let lr = schedule(c);
    let mut ws = Workspace::new();
    let mut curve = Curve::new(&["epoch", "loss", "lr"]);
    let mut timing = Timing::default();
    for epoch in 0..c.epochs {
        let t0 = Instant::now();
        adam.lr = lr(epoch);
        let loss = supervised_epoch(c, &model, &mut params, &split.train, epoch, &mut adam, &mut lbfgs, &mut ws)?;
        timing.epoch_seconds.push(t0.elapsed().as_secs_f64());
        curve.rows.push(vec![epoch as f64, loss, adam.lr]);
    }
    model.params.set_values(&params)?;
    let test_mse = mse(&model, &params, &split.test);
    let train_mse = mse(&model, &params, &split.train);
    write_grid_field(&c.out_dir.join("field.csv"), &model, 100)?;
    Ok(Outcome {
        n_params: count_parameters(&model),
        error_metric: "test_mse",
        error: test_mse,
        final_loss: train_mse,
        metrics: BTreeMap::from([("test_mse".into(), test_mse), ("train_mse".into(), train_mse)]),
        curve,
        fields: vec!["field.csv".into()],
        timing,
    })
}

fn write_grid_field(path: &Path, model: &Model, n: usize) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,y,u_pred,u_exact,abs_err")?;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            let u = model.predict(&[x, y])[0];
            let e = crate::data::nonsmooth2d(x, y);
            writeln!(f, "{x},{y},{u:e},{e:e},{:e}", (u - e).abs())?;
        }
    }
    f.flush()?;
    Ok(())
}

/// Full-batch regression of the multiscale target; with `Experiment::Ntk`
/// the tangent kernel spectrum is also tracked.
pub(super) fn multiscale(c: &ExperimentConfig) -> Result<Outcome> {
    let data = gen_multiscale1d(c.n_samples);
    let mut model = init_model(&c.model_spec(), c.seed)?;
    let mut params = model.params.values().to_vec();
    let (mut adam, mut lbfgs) = optimizers(c, params.len());
    let lr = schedule(c);
    let mut ws = Workspace::new();
    let mut curve = Curve::new(&["epoch", "loss", "lr"]);
    let mut timing = Timing::default();

    let mut step = |p: &mut [f64], epoch: usize| -> Result<()> {
        let t0 = Instant::now();
        adam.lr = lr(epoch);
        let loss = supervised_epoch(c, &model, p, &data, epoch, &mut adam, &mut lbfgs, &mut ws)?;
        timing.epoch_seconds.push(t0.elapsed().as_secs_f64());
        curve.rows.push(vec![epoch as f64, loss, adam.lr]);
        Ok(())
    };
    let mut metrics = BTreeMap::new();
    let mut fields = vec!["prediction.csv".to_string()];
    if c.experiment == Experiment::Ntk {
        let mut checkpoints = c.checkpoints.clone();
        checkpoints.retain(|&s| s <= c.epochs);
        if !checkpoints.contains(&c.epochs) {
            checkpoints.push(c.epochs);
        }
        let snaps = spectrum_track(&model, &mut params, &data.inputs, &checkpoints, &mut step)?;
        write_spectrum_csv(&c.out_dir.join("ntk_spectrum.csv"), &snaps)?;
        fields.push("ntk_spectrum.csv".into());
        for s in &snaps {
            let norm = s.normalized();
            if let Some(v) = norm.get(49) {
                metrics.insert(format!("lambda50_ratio_step{}", s.step), *v);
            }
        }
        let last = snaps.last().expect("final checkpoint");
        metrics.insert("lambda_max".into(), last.eigenvalues[0]);
        if let Some(v) = last.normalized().get(49) {
            metrics.insert("lambda50_ratio".into(), *v);
        }
    } else {
        for epoch in 0..c.epochs {
            step(&mut params, epoch)?;
        }
    }
    model.params.set_values(&params)?;
    let train_mse = mse(&model, &params, &data);
    metrics.insert("train_mse".into(), train_mse);
    let mut f = std::io::BufWriter::new(std::fs::File::create(c.out_dir.join("prediction.csv"))?);
    writeln!(f, "x,u_pred,u_exact,abs_err")?;
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        let u = model.predict(x)[0];
        writeln!(f, "{},{u:e},{:e},{:e}", x[0], t[0], (u - t[0]).abs())?;
    }
    f.flush()?;
    Ok(Outcome {
        n_params: count_parameters(&model),
        error_metric: "train_mse",
        error: train_mse,
        final_loss: train_mse,
        metrics,
        curve,
        fields,
        timing,
    })
}

pub(super) fn pinn(c: &ExperimentConfig) -> Result<Outcome> {
    let (problem, headline) = match c.experiment {
        Experiment::Heat => (heat_problem(c.k_freq), "rel_linf"),
        _ => (helmholtz_problem(1.0, 1.0, 1.0), "rel_l2"),
    };
    let mut model = init_model(&c.model_spec(), c.seed)?;
    let mut params = model.params.values().to_vec();
    let mut adam = Adam::new(params.len(), c.lr);
    let lr = schedule(c);
    let seeds = Seeds::new(c.seed);
    let mut ws = Workspace::new();
    let mut curve = Curve::new(&["epoch", "interior_loss", "boundary_loss", "lr"]);
    let mut timing = Timing::default();
    for epoch in 0..c.epochs {
        let t0 = Instant::now();
        let colloc = sample_collocation_with(&problem, c.n_interior, c.n_boundary, &mut seeds.collocation(epoch as u64));
        let l = pinn_loss(&model, &params, &problem, &colloc, 1.0, 1.0, &mut ws)?;
        check_loss(l.loss, epoch)?;
        adam.lr = lr(epoch);
        adam.step(&mut params, &l.grad)?;
        timing.epoch_seconds.push(t0.elapsed().as_secs_f64());
        curve.rows.push(vec![epoch as f64, l.interior, l.boundary, adam.lr]);
    }
    model.params.set_values(&params)?;
    let rows = eval_field(&model, &params, &problem, 256)?;
    let m = field_errors(&rows);
    write_field_csv(&c.out_dir.join("field.csv"), &problem, &rows)?;
    let last = curve.rows.last().map_or(f64::NAN, |r| r[1] + r[2]);
    let error = if headline == "rel_linf" { m.rel_linf } else { m.rel_l2 };
    Ok(Outcome {
        n_params: count_parameters(&model),
        error_metric: headline,
        error,
        final_loss: last,
        metrics: BTreeMap::from([("rel_l2".into(), m.rel_l2), ("rel_linf".into(), m.rel_linf)]),
        curve,
        fields: vec!["field.csv".into()],
        timing,
    })
}

pub(super) fn deeponet(c: &ExperimentConfig) -> Result<Outcome> {
    let sampler = GrfSampler::standard();
    let rd = RdConfig::default();
    let data = build_dataset(&sampler, &rd, c.n_samples, c.n_interior, c.seed)?;
    data.save(&c.out_dir.join("dataset.json"))?;
    let mut net = DeepONet::with_trunk(&c.model_spec(), sampler.n_sensors(), c.seed)?;
    let mut params = net.params.clone();
    let mut adam = Adam::new(params.len(), c.lr);
    let lr = schedule(c);
    let mut ws = Workspace::new();
    let mut curve = Curve::new(&["epoch", "loss", "lr"]);
    let mut timing = Timing::default();
    for epoch in 0..c.epochs {
        let t0 = Instant::now();
        let (loss, grad) = net.loss_grad(&params, &data, &mut ws)?;
        check_loss(loss, epoch)?;
        adam.lr = lr(epoch);
        adam.step(&mut params, &grad)?;
        timing.epoch_seconds.push(t0.elapsed().as_secs_f64());
        curve.rows.push(vec![epoch as f64, loss, adam.lr]);
    }
    net.params = params;
    let final_loss = net.loss_grad(&net.params, &data, &mut ws)?.0;
    let test_seeds: Vec<u64> = (0..c.test_seeds as u64).collect();
    let rows = evaluate(&net, &sampler, &rd, &test_seeds)?;
    write_eval_csv(&c.out_dir.join("evaluation.csv"), &rows)?;
    let mean = rows.iter().map(|r| r.1).sum::<f64>() / rows.len().max(1) as f64;
    Ok(Outcome {
        n_params: net.n_params(),
        error_metric: "mean_rel_l2",
        error: mean,
        final_loss,
        metrics: BTreeMap::from([
            ("mean_rel_l2".into(), mean),
            ("trunk_params".into(), net.trunk_params() as f64),
            ("branch_params".into(), net.branch.n_params() as f64),
        ]),
        curve,
        fields: vec!["dataset.json".into(), "evaluation.csv".into()],
        timing,
    })
}

pub const MNIST_FILES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

pub(super) fn mnist(c: &ExperimentConfig) -> Result<Outcome> {
    let dir = c
        .data_dir
        .as_ref()
        .ok_or_else(|| Error::MissingData("no MNIST directory given".into()))?;
    let [tri, trl, tei, tel] = MNIST_FILES.map(|f| dir.join(f));
    let train = load_mnist(&tri, &trl, c.sample_limit)?;
    let test = load_mnist(&tei, &tel, c.sample_limit.map(|n| n / 5))?;
    let mut model = init_model(&c.model_spec(), c.seed)?;
    let mut params = model.params.values().to_vec();
    let (mut adam, mut lbfgs) = optimizers(c, params.len());
    let lr = schedule(c);
    let mut ws = Workspace::new();
    let mut curve = Curve::new(&["epoch", "loss", "train_mse", "lr"]);
    let mut timing = Timing::default();
    for epoch in 0..c.epochs {
        let t0 = Instant::now();
        adam.lr = lr(epoch);
        let loss = supervised_epoch(c, &model, &mut params, &train, epoch, &mut adam, &mut lbfgs, &mut ws)?;
        timing.epoch_seconds.push(t0.elapsed().as_secs_f64());
        let train_mse = mse(&model, &params, &train);
        curve.rows.push(vec![epoch as f64, loss, train_mse, adam.lr]);
    }
    model.params.set_values(&params)?;
    let test_mse = mse(&model, &params, &test);
    let prep = model.prepare(&mut crate::autodiff::Plain, &params);
    let correct = test
        .inputs
        .iter()
        .zip(&test.targets)
        .filter(|(x, t)| {
            let y = model.forward(&mut crate::autodiff::Plain, &params, &prep, x);
            argmax(&y) == argmax(t)
        })
        .count();
    let final_loss = curve.rows.last().map_or(f64::NAN, |r| r[2]);
    Ok(Outcome {
        n_params: count_parameters(&model),
        error_metric: "test_mse",
        error: test_mse,
        final_loss,
        metrics: BTreeMap::from([
            ("test_mse".into(), test_mse),
            ("test_accuracy".into(), correct as f64 / test.len() as f64),
        ]),
        curve,
        fields: vec![],
        timing,
    })
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}
