use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fracspde::config::{RunRecord, SimConfig};
use fracspde::simulator::{
    estimate_pair_moment, run_deterministic, simulate, write_moments, write_snapshots,
};
use fracspde::verify::{run, Faults, VerifyOptions};

use crate::output::{num, Table};
use crate::Failure;

#[derive(Args, Debug)]
pub struct SimArgs {
    /// configuration file, or a run record to re-execute
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// worker threads (further capped by FRACSPDE_THREADS)
    #[arg(long)]
    pub threads: Option<usize>,
}

fn load(path: &Path) -> Result<SimConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(SimConfig::from_toml(&text)?)
}

fn restamp(dir: &Path, name: &str, bytes: &[u8], hash: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    Table::parse(bytes)?.emit(Some(&path), hash)?;
    Ok(path)
}

pub fn simulate_cmd(a: &SimArgs) -> Result<(), Failure> {
    let cfg = load(&a.config)?;
    let mut sim = cfg.simulation()?;
    sim.options.threads = a.threads;
    let out = simulate(&sim)?;
    let record = RunRecord::from_simulation(&cfg, &out)?;
    let hash = &record.config_hash;
    fs::create_dir_all(&a.out_dir)?;
    let mut buf = vec![];
    write_moments(&mut buf, &out.moments)?;
    let moments = restamp(&a.out_dir, "moments.csv", &buf, hash)?;
    if !out.snapshots.is_empty() {
        let mut buf = vec![];
        write_snapshots(&mut buf, &out.snapshots)?;
        restamp(&a.out_dir, "snapshots.csv", &buf, hash)?;
    }
    let points = &sim.options.record_points;
    if !points.is_empty() && out.samples.values.len() >= 2 {
        let coord = |x: &[f64]| x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ");
        let mut t = Table::new(&["t", "x", "y", "moment", "stderr"]);
        for r in 0..out.samples.times.len() {
            for (i, x) in points.iter().enumerate() {
                for y in &points[i..] {
                    let (m, se) = estimate_pair_moment(&out.samples, r, x, y)?;
                    let time = num(out.samples.times[r]);
                    t.push(vec![time, coord(x), coord(y), num(m), num(se)]);
                }
            }
        }
        t.emit(Some(&a.out_dir.join("pairs.csv")), hash)?;
    }
    let rec = a.out_dir.join("record.toml");
    fs::write(&rec, record.to_toml()?)?;
    println!("{}", record.results.verdict);
    println!("moments: {}", moments.display());
    println!("record: {}", rec.display());
    Ok(())
}

pub fn simulate_det_cmd(a: &SimArgs) -> Result<(), Failure> {
    let cfg = load(&a.config)?;
    let run = run_deterministic(&cfg.simulation()?)?;
    let record = RunRecord::from_deterministic(&cfg, &run)?;
    let hash = &record.config_hash;
    fs::create_dir_all(&a.out_dir)?;
    let mut t = Table::new(&["t", "sup_norm", "probe"]);
    for i in 0..run.times.len() {
        t.push(vec![
            num(run.times[i]),
            num(run.sup_norm[i]),
            num(run.probe[i]),
        ]);
    }
    let series = a.out_dir.join("deterministic.csv");
    t.emit(Some(&series), hash)?;
    if cfg.output.snapshot_every.is_some() && !run.states.is_empty() {
        let mut buf = vec![];
        write_snapshots(&mut buf, &run.states)?;
        restamp(&a.out_dir, "snapshots.csv", &buf, hash)?;
    }
    let rec = a.out_dir.join("record.toml");
    fs::write(&rec, record.to_toml()?)?;
    println!("{}", record.results.verdict);
    println!("series: {}", series.display());
    println!("record: {}", rec.display());
    Ok(())
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// scale C* by 1.1 wherever the suite uses it
    CorruptCstar,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// criterion ids, groups or title fragments, comma separated
    #[arg(long)]
    pub filter: Option<String>,
    /// inject a deliberate fault (negative control)
    #[arg(long, value_enum)]
    pub fault: Vec<Fault>,
}

pub fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let opts = VerifyOptions {
        filter: a.filter.clone(),
        faults: Faults {
            corrupt_cstar: a.fault.contains(&Fault::CorruptCstar),
        },
    };
    let outcomes = run(&opts);
    if outcomes.is_empty() {
        return Err(Failure::Usage(format!(
            "no criterion matches {:?}",
            a.filter.as_deref().unwrap_or("")
        )));
    }
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if passed == outcomes.len() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}
