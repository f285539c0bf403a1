use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fracspde::renewal::{
    blowup_time_bounded, blowup_time_drift, blowup_time_unbounded, blowup_time_unbounded_reduced,
    dirichlet_blowup_time, laplace_renewal_check, volterra_solve, write_trajectory,
    DirichletOutcome, DirichletRenewal, RenewalProblem, UnboundedVariant, VolterraSolution,
};
use serde::Serialize;

use crate::output::{hash, write_record, Table};
use crate::Failure;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// kernel bounded below by T^{-θ} on [0, T]
    Bounded,
    /// unbounded horizon, initial term C
    Constant,
    /// unbounded horizon, initial term C t^{-θ}
    Decaying,
    /// constant variant after lowering γ when (1+γ)θ ≥ 1
    Reduced,
    /// v' = v^{1+η}, v(0) = κ
    Drift,
    /// the power-weighted inequality on t ≥ 1
    Dirichlet,
    /// growing kernel (t-s)^θ
    Laplace,
}

#[derive(Args, Debug, Serialize)]
pub struct RenewalArgs {
    #[arg(long, value_enum, default_value_t = Variant::Bounded)]
    pub variant: Variant,
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long = "D")]
    pub d: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// horizon T; the bounded variant defaults to the self-consistent T = t₀
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub c3: Option<f64>,
    #[arg(long)]
    pub c4: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// solver step (defaults to a thousandth of the search window)
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value = "renewal-trajectory.csv")]
    #[serde(skip)]
    pub trajectory: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub record: Option<PathBuf>,
}

fn need(v: Option<f64>, flag: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this variant")))
}

impl RenewalArgs {
    fn problem(&self) -> Result<RenewalProblem, Failure> {
        Ok(RenewalProblem::new(
            need(self.c, "C")?,
            need(self.d, "D")?,
            need(self.gamma, "gamma")?,
            need(self.theta, "theta")?,
        )?)
    }
}

#[derive(Serialize)]
struct Report<'a> {
    variant: Variant,
    formula_time: Option<f64>,
    numerical_time: Option<f64>,
    ordering: &'a str,
}

pub fn renewal(a: &RenewalArgs) -> Result<(), Failure> {
    match a.variant {
        Variant::Dirichlet => return dirichlet(a),
        Variant::Laplace => return laplace(a),
        _ => {}
    }
    let (rp, formula, ordered) = match a.variant {
        Variant::Drift => {
            let (kappa, eta) = (need(a.kappa, "kappa")?, need(a.eta, "eta")?);
            // the drift ODE is the θ = 0 case with C = κ, D = 1, γ = η
            let rp = RenewalProblem::new(kappa, 1.0, eta, 0.0)?;
            (rp, blowup_time_drift(kappa, eta)?, true)
        }
        Variant::Bounded => {
            let rp = a.problem()?;
            let t = match a.horizon {
                Some(t) => t,
                None if rp.theta < 1.0 => {
                    (rp.c.powf(rp.gamma) * rp.d * rp.gamma).powf(-1.0 / (1.0 - rp.theta))
                }
                None => return Err(Failure::Usage("θ ≥ 1 needs an explicit --T".into())),
            };
            let t0 = blowup_time_bounded(&rp.with_horizon(t)?)?;
            // the bound speaks only about blow-up inside [0, T]
            (rp, t0, t0 <= t * (1.0 + 1e-12))
        }
        Variant::Constant => {
            let rp = a.problem()?;
            (
                rp,
                blowup_time_unbounded(&rp, UnboundedVariant::Constant)?,
                true,
            )
        }
        Variant::Reduced => {
            let rp = a.problem()?;
            (
                rp,
                blowup_time_unbounded_reduced(&rp, UnboundedVariant::Constant)?,
                true,
            )
        }
        _ => {
            // the solver handles a constant initial term only
            let rp = a.problem()?;
            (
                rp,
                blowup_time_unbounded(&rp, UnboundedVariant::Decaying)?,
                false,
            )
        }
    };
    let window = 1.5 * formula;
    let sol: VolterraSolution = volterra_solve(&rp, a.step.unwrap_or(window / 1000.0), window)?;
    let numerical = sol.blowup.as_ref().map(|b| b.time);
    let ordering = match (ordered, numerical) {
        (false, _) => "not applicable",
        (true, Some(t)) if t <= formula * (1.0 + 1e-3) => "holds",
        (true, _) => "violated",
    };
    println!("formula_time = {formula}");
    match numerical {
        Some(t) => println!("numerical_time = {t}"),
        None => println!("numerical_time = none before {window}"),
    }
    println!("ordering = {ordering}");
    let h = hash(a)?;
    let mut buf = vec![];
    write_trajectory(&mut buf, &sol.trajectory)?;
    Table::parse(&buf)?.emit(Some(&a.trajectory), &h)?;
    let report = Report {
        variant: a.variant,
        formula_time: Some(formula),
        numerical_time: numerical,
        ordering,
    };
    write_record(a.record.as_deref(), "renewal", a, Some(&report))
}

fn dirichlet(a: &RenewalArgs) -> Result<(), Failure> {
    let dr = DirichletRenewal::new(
        need(a.c3, "c3")?,
        need(a.c4, "c4")?,
        need(a.eta, "eta")?,
        need(a.beta, "beta")?,
    )?;
    let out = dirichlet_blowup_time(&dr);
    let (formula, numerical) = match out {
        DirichletOutcome::ClosedForm(t) => (Some(t), None),
        DirichletOutcome::Numerical(t) => (None, Some(t)),
        DirichletOutcome::NoBlowup { horizon } => {
            println!("no blow-up up to t = {horizon}");
            (None, None)
        }
    };
    if let Some(t) = formula {
        println!("formula_time = {t}");
    }
    if let Some(t) = numerical {
        println!("numerical_time = {t}");
    }
    let report = Report {
        variant: a.variant,
        formula_time: formula,
        numerical_time: numerical,
        ordering: "not applicable",
    };
    write_record(a.record.as_deref(), "renewal", a, Some(&report))
}

fn laplace(a: &RenewalArgs) -> Result<(), Failure> {
    let rp = a.problem()?;
    let horizon = need(a.horizon, "T")?;
    let v = laplace_renewal_check(&rp, a.step.unwrap_or(horizon / 1000.0), horizon)?;
    println!("numerical_time = {}", v.time);
    println!("coarse_time = {}", v.coarse);
    let report = Report {
        variant: a.variant,
        formula_time: None,
        numerical_time: Some(v.time),
        ordering: "not applicable",
    };
    write_record(a.record.as_deref(), "renewal", a, Some(&report))
}
