use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::moments::{MomentSeries, PathSamples};
use super::noise::NoiseSampler;
use super::weights::{kernel_weights, transform, Convolution, Workspace};
use super::{
    Diagnostics, Drift, FieldState, Grid, LagRule, NoiseSpec, ReactionSpec, Scheme, Sigma,
    SimOptions, Simulation, SimulationOutput,
};
use crate::error::{Error, Result};
use crate::fftgrid::{GridFft, C64};
use crate::kernel::{initial_smoothing, GreenProfile, InitialData, ModelParams};

/// Worker count from `FRACSPDE_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("FRACSPDE_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

fn thread_pool(requested: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    let n = match (requested.filter(|&n| n > 0), threads_from_env()) {
        (Some(a), Some(cap)) => Some(a.min(cap)),
        (a, cap) => a.or(cap),
    };
    if let Some(n) = n {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

enum Free {
    Constant(f64),
    /// `table[step][site]`
    Table(Vec<Vec<f64>>),
}

impl Free {
    #[inline]
    fn at(&self, step: usize, site: usize) -> f64 {
        match self {
            Free::Constant(k) => *k,
            Free::Table(t) => t[step][site],
        }
    }
}

fn free_term(
    sim: &Simulation,
    profile: &GreenProfile,
    fft: &GridFft,
    pool: &rayon::ThreadPool,
) -> Result<Free> {
    if let InitialData::Constant(k) = sim.initial {
        return Ok(Free::Constant(k));
    }
    let grid = sim.grid;
    let sites = grid.sites();
    let coords: Vec<Vec<f64>> = (0..sites).map(|k| grid.coord(k)).collect();
    let start: Vec<f64> = coords.iter().map(|x| sim.initial.eval(x)).collect();
    let start_hat = transform(&start, fft);
    let row = |step: usize| -> Result<Vec<f64>> {
        if step == 0 {
            return Ok(start.clone());
        }
        let t = step as f64 * sim.dt;
        if grid.dim == 1 {
            coords
                .iter()
                .map(|x| initial_smoothing(profile, &sim.initial, t, x))
                .collect()
        } else {
            // no pointwise smoothing off the origin in 2D: lattice convolution
            let mut w = transform(&kernel_weights(profile, &grid, t)?, fft);
            for (a, b) in w.iter_mut().zip(&start_hat) {
                *a *= *b;
            }
            fft.inverse(&mut w, &mut vec![]);
            Ok(w.iter().map(|c| c.re).collect())
        }
    };
    let table = pool.install(|| {
        (0..=sim.n_steps)
            .into_par_iter()
            .map(row)
            .collect::<Result<_>>()
    })?;
    Ok(Free::Table(table))
}

/// Real fields have Hermitian spectra; only one index of each mirror pair
/// is convolved.
struct HalfSpectrum {
    keep: Vec<usize>,
    mirror: Vec<usize>,
}

impl HalfSpectrum {
    fn new(grid: &Grid) -> Self {
        let n = grid.cells;
        let mirror: Vec<usize> = (0..grid.sites())
            .map(|k| match grid.dim {
                1 => (n - k) % n,
                _ => ((n - k / n) % n) * n + (n - k % n) % n,
            })
            .collect();
        let keep = (0..grid.sites()).filter(|&k| k <= mirror[k]).collect();
        HalfSpectrum { keep, mirror }
    }

    fn compress(&self, full: &[C64]) -> Vec<C64> {
        self.keep.iter().map(|&k| full[k]).collect()
    }

    fn expand(&self, half: &[C64], full: &mut [C64]) {
        for (&k, &v) in self.keep.iter().zip(half) {
            full[k] = v;
            full[self.mirror[k]] = v.conj();
        }
    }
}

enum Marcher {
    Restart(Convolution),
    /// `hats[l - 1]` is the half spectrum of the weights at lag index `l`
    Memory {
        hats: Vec<Vec<C64>>,
        half: HalfSpectrum,
    },
}

struct Plan<'a> {
    sim: &'a Simulation,
    fft: GridFft,
    marcher: Marcher,
    free: Free,
    sampler: Option<NoiseSampler>,
    watch: Vec<usize>,
    records: Vec<usize>,
    snapshots: Vec<usize>,
}

struct PathOut {
    /// `values[record][point]`
    values: Vec<Vec<f64>>,
    sup: Vec<f64>,
    exploded: Option<usize>,
    snapshots: Vec<FieldState>,
}

fn lag(sim: &Simulation, l: usize) -> f64 {
    match sim.options.lag {
        LagRule::Right => l as f64 * sim.dt,
        LagRule::Midpoint => (l as f64 - 0.5) * sim.dt,
    }
}

fn marked_steps(n_steps: usize, every: Option<usize>) -> Vec<usize> {
    let mut v: Vec<usize> = match every {
        Some(e) => (0..=n_steps).step_by(e).collect(),
        None => vec![0],
    };
    if *v.last().unwrap() != n_steps {
        v.push(n_steps);
    }
    v
}

fn run_path(plan: &Plan, path: usize) -> PathOut {
    let sim = plan.sim;
    let (sigma, drift) = (sim.reaction.sigma, sim.reaction.drift);
    let grid = sim.grid;
    let n = grid.sites();
    let dt = sim.dt;
    let hd = grid.cell_volume();
    let threshold = sim.options.threshold;
    let forced = sigma != Sigma::Zero || drift != Drift::None;

    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    rng.set_stream(path as u64);
    let mut u: Vec<f64> = (0..n).map(|k| plan.free.at(0, k)).collect();
    let mut v = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut zeta = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut work = Workspace::default();
    let mut history: Vec<Vec<C64>> = vec![];
    let mut acc: Vec<C64> = vec![];
    let mut full = vec![C64::new(0.0, 0.0); n];

    let mut out = PathOut {
        values: Vec::with_capacity(plan.records.len()),
        sup: Vec::with_capacity(plan.records.len()),
        exploded: None,
        snapshots: vec![],
    };
    let (mut next_record, mut next_snap) = (0, 0);
    let mut exploded = false;
    for step in 0..=sim.n_steps {
        if step > 0 {
            if forced {
                if let Some(s) = &plan.sampler {
                    s.sample(&mut rng, &mut z, &mut zeta);
                }
                for j in 0..n {
                    let noise = if plan.sampler.is_some() {
                        sigma.eval(u[j]) * zeta[j] / hd
                    } else {
                        0.0
                    };
                    g[j] = drift.eval(u[j]) * dt + noise;
                }
                match &plan.marcher {
                    Marcher::Restart(conv) => {
                        v.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
                        conv.apply(&mut v, &mut work, &plan.fft);
                    }
                    Marcher::Memory { hats, half } => {
                        let mut gh: Vec<C64> = g.iter().map(|&x| C64::new(x, 0.0)).collect();
                        plan.fft.forward(&mut gh, &mut work.scratch);
                        history.push(half.compress(&gh));
                        acc.clear();
                        acc.resize(half.keep.len(), C64::new(0.0, 0.0));
                        // forcing of step m (0-based) sits at lag index step - m
                        for (m, gm) in history.iter().enumerate() {
                            let k = &hats[step - m - 1];
                            for ((a, kk), gg) in acc.iter_mut().zip(k).zip(gm) {
                                *a += kk * gg;
                            }
                        }
                        half.expand(&acc, &mut full);
                        plan.fft.inverse(&mut full, &mut work.scratch);
                        v.iter_mut().zip(&full).for_each(|(a, c)| *a = c.re);
                    }
                }
            }
            for (k, uk) in u.iter_mut().enumerate() {
                *uk = plan.free.at(step, k) + v[k];
            }
            exploded = u.iter().any(|x| !(x.abs() <= threshold));
        }
        if exploded {
            out.exploded = Some(step);
        }
        if exploded {
            // every remaining record sees the explosion
            for _ in next_record..plan.records.len() {
                out.values.push(vec![f64::INFINITY; plan.watch.len()]);
                out.sup.push(f64::INFINITY);
            }
            next_record = plan.records.len();
        } else if plan.records.get(next_record) == Some(&step) {
            out.values.push(plan.watch.iter().map(|&s| u[s]).collect());
            out.sup.push(u.iter().fold(0.0, |m: f64, x| m.max(x.abs())));
            next_record += 1;
        }
        if path == 0 {
            let due = next_snap < plan.snapshots.len() && plan.snapshots[next_snap] == step;
            if due || exploded {
                out.snapshots.push(FieldState {
                    grid,
                    time: step as f64 * dt,
                    values: u.clone(),
                    exploded,
                });
                next_snap += 1;
            }
        }
        if exploded {
            break;
        }
    }
    out
}

fn plan<'a>(sim: &'a Simulation, pool: &rayon::ThreadPool) -> Result<(Plan<'a>, GreenProfile)> {
    sim.validate()?;
    let profile = GreenProfile::new(sim.params)?;
    let grid = sim.grid;
    let fft = GridFft::new(grid.cells, grid.dim);
    let forced = sim.reaction.sigma != Sigma::Zero || sim.reaction.drift != Drift::None;
    let marcher = match sim.resolved_scheme()? {
        Scheme::Restart => {
            let w = kernel_weights(&profile, &grid, sim.dt)?;
            Marcher::Restart(Convolution::new(&w, &grid, &fft))
        }
        _ => {
            let half = HalfSpectrum::new(&grid);
            let steps = if forced { sim.n_steps } else { 0 };
            let hats = pool.install(|| {
                (1..=steps)
                    .into_par_iter()
                    .map(|l| {
                        let w = kernel_weights(&profile, &grid, lag(sim, l))?;
                        Ok(half.compress(&transform(&w, &fft)))
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            Marcher::Memory { hats, half }
        }
    };
    let sampler = if sim.reaction.sigma == Sigma::Zero {
        None
    } else {
        Some(NoiseSampler::new(&grid, &sim.noise, sim.dt)?)
    };
    let free = free_term(sim, &profile, &fft, pool)?;
    let o = &sim.options;
    let mut watch = vec![grid.site_of(&o.probe)?];
    for x in &o.record_points {
        watch.push(grid.site_of(x)?);
    }
    Ok((
        Plan {
            sim,
            fft,
            marcher,
            free,
            sampler,
            watch,
            records: marked_steps(sim.n_steps, Some(o.record_every)),
            snapshots: marked_steps(sim.n_steps, o.snapshot_every),
        },
        profile,
    ))
}

fn execute(sim: &Simulation) -> Result<(Vec<PathOut>, Plan<'_>, GreenProfile)> {
    let pool = thread_pool(sim.options.threads)?;
    let (plan, profile) = plan(sim, &pool)?;
    let paths = pool.install(|| {
        (0..sim.n_paths)
            .into_par_iter()
            .map(|k| run_path(&plan, k))
            .collect::<Vec<_>>()
    });
    Ok((paths, plan, profile))
}

/// Runs `n_paths` independent paths and reduces them in path order.
pub fn simulate(sim: &Simulation) -> Result<SimulationOutput> {
    let (mut paths, plan, profile) = execute(sim)?;
    let times: Vec<f64> = plan.records.iter().map(|&s| s as f64 * sim.dt).collect();
    let exploded_at = paths
        .iter()
        .filter_map(|p| p.exploded)
        .min()
        .map(|s| s as f64 * sim.dt);
    let probe_values: Vec<Vec<f64>> = paths
        .iter()
        .map(|p| p.values.iter().map(|r| r[0]).collect())
        .collect();
    let probe_site = sim.grid.coord(plan.watch[0]);
    let moments = MomentSeries::from_paths(
        probe_site.clone(),
        sim.options.order,
        times.clone(),
        &probe_values,
        exploded_at,
    );
    let snapshots = std::mem::take(&mut paths[0].snapshots);
    let samples = PathSamples {
        grid: sim.grid,
        times,
        sites: plan.watch.clone(),
        values: paths.into_iter().map(|p| p.values).collect(),
    };
    let diagnostics = Diagnostics {
        scheme: sim.resolved_scheme()?,
        truncation_error: (1.0 - profile.ball_mass(sim.horizon(), sim.grid.half_width)).max(0.0),
        diagonal_regularization: plan
            .sampler
            .as_ref()
            .and_then(|s| s.diagonal_regularization()),
        probe_site,
    };
    Ok(SimulationOutput {
        moments,
        snapshots,
        samples,
        diagnostics,
    })
}

/// Noiseless run with drift `|u|^{1+η}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicRun {
    pub times: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub probe: Vec<f64>,
    pub states: Vec<FieldState>,
    pub exploded_at: Option<f64>,
    pub horizon: f64,
}

impl DeterministicRun {
    pub fn explosion_time(&self) -> Result<f64> {
        self.exploded_at.ok_or(Error::HorizonExhausted {
            horizon: self.horizon,
        })
    }

    pub fn final_state(&self) -> &FieldState {
        self.states
            .last()
            .expect("at least the initial state is kept")
    }
}

pub fn simulate_deterministic(
    p: ModelParams,
    eta: f64,
    u0: InitialData,
    grid: Grid,
    dt: f64,
    n_steps: usize,
) -> Result<DeterministicRun> {
    let sim = Simulation {
        params: p,
        reaction: ReactionSpec::new(Sigma::Zero, Drift::PowerLaw { eta })?,
        noise: NoiseSpec::White,
        initial: u0,
        grid,
        dt,
        n_steps,
        n_paths: 1,
        seed: 0,
        options: SimOptions::for_dim(p.d),
    };
    run_deterministic(&sim)
}

/// [`simulate_deterministic`] with the scheme, lag and threshold of `sim`;
/// noise and path count are ignored.
pub fn run_deterministic(sim: &Simulation) -> Result<DeterministicRun> {
    if sim.reaction.sigma != Sigma::Zero {
        return Err(Error::Config(
            "the deterministic mode needs sigma = zero".into(),
        ));
    }
    let mut sim = sim.clone();
    sim.n_paths = 1;
    let (mut paths, plan, _) = execute(&sim)?;
    let p = paths.remove(0);
    let times: Vec<f64> = plan.records.iter().map(|&s| s as f64 * sim.dt).collect();
    Ok(DeterministicRun {
        probe: p.values.iter().map(|r| r[0]).collect(),
        times,
        sup_norm: p.sup,
        states: p.snapshots,
        exploded_at: p.exploded.map(|s| s as f64 * sim.dt),
        horizon: sim.horizon(),
    })
}
