use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fracspde::kernel::{
    cstar, green_fourier, green_subordination, l2_norm, write_kernel_table, GreenBounds,
    GreenProfile, ModelParams,
};
use fracspde::specialfn::{
    inverse_subordinator_density, mittag_leffler, ml_uniform_bounds, stable_density,
    subordinator_density, StableParams,
};
use serde::Serialize;

use crate::output::{hash, num, opt, write_record, Table};
use crate::Failure;

#[derive(Args, Debug, Clone, Default)]
pub struct Sink {
    /// CSV destination (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// also write a TOML run record here
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct Model {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
}

impl Model {
    fn params(&self) -> Result<ModelParams, Failure> {
        Ok(ModelParams::new(self.alpha, self.beta, self.nu, self.d)?)
    }
}

fn point(r: f64, d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[0] = r;
    x
}

fn finish<T: Serialize>(name: &str, cfg: &T, sink: &Sink, table: Table) -> Result<(), Failure> {
    let h = hash(cfg)?;
    table.emit(sink.out.as_deref(), &h)?;
    write_record(sink.record.as_deref(), name, cfg, None::<&()>)
}

#[derive(Args, Debug, Serialize)]
pub struct MlArgs {
    #[arg(long)]
    pub beta: f64,
    /// arguments of E_β (comma separated)
    #[arg(
        long,
        required = true,
        allow_negative_numbers = true,
        value_delimiter = ','
    )]
    pub x: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub sink: Sink,
}

/// `E_β(x)`, with the uniform two-sided bounds for negative arguments.
pub fn ml(a: &MlArgs) -> Result<(), Failure> {
    let mut t = Table::new(&["beta", "x", "value", "lower", "upper"]);
    for &x in &a.x {
        let v = mittag_leffler(a.beta, x)?;
        let (lo, hi) = if x < 0.0 && a.beta < 1.0 {
            let (lo, hi) = ml_uniform_bounds(a.beta, -x)?;
            (Some(lo), Some(hi))
        } else {
            (None, None)
        };
        t.push(vec![num(a.beta), num(x), num(v), opt(lo), opt(hi)]);
    }
    finish("ml", a, &a.sink, t)
}

#[derive(Args, Debug, Serialize)]
pub struct GbetaArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long, required = true, value_delimiter = ',')]
    pub u: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub sink: Sink,
}

pub fn gbeta(a: &GbetaArgs) -> Result<(), Failure> {
    let mut t = Table::new(&["beta", "u", "g"]);
    for &u in &a.u {
        t.push(vec![
            num(a.beta),
            num(u),
            num(subordinator_density(a.beta, u)?),
        ]);
    }
    finish("gbeta", a, &a.sink, t)
}

#[derive(Args, Debug, Serialize)]
pub struct FetArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, required = true, value_delimiter = ',')]
    pub x: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub sink: Sink,
}

pub fn fet(a: &FetArgs) -> Result<(), Failure> {
    let mut t = Table::new(&["beta", "t", "x", "f"]);
    for &x in &a.x {
        let f = inverse_subordinator_density(a.beta, a.t, x)?;
        t.push(vec![num(a.beta), num(a.t), num(x), num(f)]);
    }
    finish("fet", a, &a.sink, t)
}

#[derive(Args, Debug, Serialize)]
pub struct StableArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// distances from the origin
    #[arg(long, required = true, value_delimiter = ',')]
    pub r: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub sink: Sink,
}

pub fn stable(a: &StableArgs) -> Result<(), Failure> {
    let sp = StableParams::new(a.alpha, a.nu, a.d)?;
    let mut t = Table::new(&["t", "r", "p"]);
    for &r in &a.r {
        let p = stable_density(sp, a.t, &point(r, a.d))?;
        t.push(vec![num(a.t), num(r), num(p)]);
    }
    finish("stable", a, &a.sink, t)
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fourier,
    Subordination,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct GreenArgs {
    #[command(flatten)]
    pub model: Model,
    #[arg(long, default_value = "1", value_delimiter = ',')]
    pub t: Vec<f64>,
    /// distances from the source
    #[arg(long, required = true, value_delimiter = ',')]
    pub x: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::Fourier)]
    pub method: Method,
    #[command(flatten)]
    #[serde(skip)]
    pub sink: Sink,
}

pub fn green(a: &GreenArgs) -> Result<(), Failure> {
    let p = a.model.params()?;
    let mut table = Table::new(&["t", "x", "fourier", "subordination", "abs_diff"]);
    for &t in &a.t {
        for &r in &a.x {
            let x = point(r, p.d);
            let f = match a.method {
                Method::Subordination => None,
                _ => Some(green_fourier(&p, t, &x)?),
            };
            let s = match a.method {
                Method::Fourier => None,
                _ => Some(green_subordination(&p, t, &x)?),
            };
            let diff = f.zip(s).map(|(f, s)| (f - s).abs());
            table.push(vec![num(t), num(r), opt(f), opt(s), opt(diff)]);
        }
    }
    finish("green", a, &a.sink, table)
}

#[derive(Args, Debug, Serialize)]
pub struct L2Args {
    #[command(flatten)]
    pub model: Model,
    /// times at which to report ‖G_t‖² (C* alone when omitted)
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub sink: Sink,
}

pub fn l2norm(a: &L2Args) -> Result<(), Failure> {
    let p = a.model.params()?;
    let c = cstar(&p)?;
    let mut table = Table::new(&["cstar", "t", "l2_norm_sq"]);
    if a.t.is_empty() {
        table.push(vec![num(c), String::new(), String::new()]);
    }
    for &t in &a.t {
        table.push(vec![num(c), num(t), num(l2_norm(&p, t)?)]);
    }
    finish("l2norm", a, &a.sink, table)
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub model: Model,
    #[arg(long, default_value = "0.1,1,10", value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long, default_value = "0,0.5,1,2,5,10", value_delimiter = ',')]
    pub x: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub sink: Sink,
}

/// Kernel values beside the calibrated two-sided bounds; the constants go
/// to standard error.
pub fn bounds(a: &BoundsArgs) -> Result<(), Failure> {
    let profile = GreenProfile::new(a.model.params()?)?;
    let b = GreenBounds::calibrate(profile.clone())?;
    eprintln!("c1 = {}, c2 = {}", b.c1, b.c2);
    let mut buf = vec![];
    write_kernel_table(&mut buf, &profile, Some(&b), &a.t, &a.x)?;
    finish("bounds", a, &a.sink, Table::parse(&buf)?)
}
