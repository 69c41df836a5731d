use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use serde::Serialize;
use sepmap::chaos::{diophantine_constant, lyapunov_grid, GridSpec, LyapunovScan, TangentMap};
use sepmap::integrate::IntegratorOptions;
use sepmap::mapbuild::{
    build_duffing_global_map, build_duffing_melnikov, build_hbr_global_map, build_hbr_melnikov, compare_duffing_maps,
    compare_hbr_maps, section_radius_error_duffing, section_radius_error_hbr,
};
use sepmap::oracle::{run_duffing_noise, run_hbr_noise, NoiseConfig};
use sepmap::sepmap::{DuffingSepMap, DuffingState, HbrSepMap, HbrState, OrbitRecord};
use sepmap::stats::{fit, histogram, overlay, overlay_fits, BinRule, Family};
use sepmap::trig::{Forcing, FrequencyPreset};
use sepmap::{Error, Result};

use crate::config::{ExperimentConfig, ModelKind, Overrides};
use crate::output::{config_hash, fmt_f64, orbit_table, read_column, write_json, CoefficientFile, CoefficientSet, RunSummary, Table};
use crate::{
    BuildMapArgs, CalibrateArgs, Command, CompareArgs, DiophantineArgs, FamilyArg, FitArgs, HbrForm, IterateArgs,
    MegnoArgs, Route, SdeArgs,
};

#[derive(Serialize)]
struct HashInput<'a, A: Serialize> {
    command: &'a str,
    config: ExperimentConfig,
    args: &'a A,
    /// Hash of the coefficient file a command consumes.
    input_hash: Option<&'a str>,
}

fn hash_of<A: Serialize>(command: &str, cfg: &ExperimentConfig, args: &A, input_hash: Option<&str>) -> Result<String> {
    // the output location does not change results
    let config = ExperimentConfig { out: None, ..cfg.clone() };
    config_hash(&HashInput { command, config, args, input_hash })
}

fn opts() -> IntegratorOptions {
    IntegratorOptions::default()
}

pub fn run(o: &Overrides, cmd: &Command) -> Result<()> {
    let cfg = ExperimentConfig::resolve(o)?;
    match cmd {
        Command::BuildMap(a) => build_map(&cfg, a),
        Command::Iterate(a) => iterate(&cfg, a),
        Command::MegnoScan(a) => megno_scan(&cfg, a),
        Command::Fit(a) => fit_cmd(&cfg, a),
        Command::SdeRun(a) => sde_run(&cfg, a),
        Command::CalibrateR(a) => calibrate(&cfg, a),
        Command::CompareMaps(a) => compare(&cfg, a),
        Command::Diophantine(a) => diophantine(&cfg, a),
    }
}

fn summary<T: Serialize>(dir: &Path, name: &str, command: &str, hash: &str, outputs: &[&str], result: T) -> Result<()> {
    let s = RunSummary {
        command,
        config_hash: hash,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        result,
    };
    write_json(&dir.join(name), &s)
}

fn build_map(cfg: &ExperimentConfig, a: &BuildMapArgs) -> Result<()> {
    let f = cfg.forcing()?;
    let hash = hash_of("build-map", cfg, a, None)?;
    let set = match (cfg.model, a.route) {
        (ModelKind::Duffing, Route::Variational) => CoefficientSet::DuffingVariational(build_duffing_global_map(
            cfg.gamma,
            cfg.r,
            &f.omega,
            cfg.beta.into(),
            opts(),
        )?),
        (ModelKind::Duffing, Route::Melnikov) => {
            let p = cfg.duffing_params()?;
            CoefficientSet::DuffingMelnikov(build_duffing_melnikov(p.gamma, p.beta, cfg.r, &f.omega)?)
        }
        (ModelKind::Hbr, Route::Variational) => {
            CoefficientSet::HbrVariational(build_hbr_global_map(cfg.hbr_params()?, cfg.r, &f.omega, opts())?)
        }
        (ModelKind::Hbr, Route::Melnikov) => CoefficientSet::HbrMelnikov(build_hbr_melnikov(cfg.r, &f.omega, opts())?),
    };
    let path = cfg.out_dir().join(&a.file);
    write_json(&path, &CoefficientFile::new(set.clone(), hash))?;
    match &set {
        CoefficientSet::DuffingVariational(c) => println!("alpha = {:e}  T* = {:e}", c.alpha, c.t_star),
        CoefficientSet::DuffingMelnikov(c) => println!("constant = {:e}  s0 + s1 = {:e}", c.constant, c.s0 + c.s1),
        CoefficientSet::HbrVariational(c) => println!("alpha_x = {:e}  T* = {:e}", c.alpha_x, c.t_star),
        CoefficientSet::HbrMelnikov(c) => println!("Xi_I = {:e}  B_h = {:e}  A_x = {:e}", c.xi_i, c.b_h, c.a_x),
    }
    println!("wrote {}", path.display());
    Ok(())
}

enum AnyMap {
    Duffing(DuffingSepMap),
    Hbr(HbrSepMap),
}

fn load_map(cfg: &ExperimentConfig, coeffs: &Path, hbr_form: HbrForm) -> Result<(AnyMap, Forcing, String)> {
    let file = CoefficientFile::load(coeffs)?;
    let f = cfg.forcing()?;
    let map = match &file.map {
        CoefficientSet::DuffingVariational(c) => AnyMap::Duffing(DuffingSepMap::variational(c, &f)?),
        CoefficientSet::DuffingMelnikov(c) => AnyMap::Duffing(DuffingSepMap::melnikov(c, &f)?),
        CoefficientSet::HbrVariational(c) => AnyMap::Hbr(match hbr_form {
            HbrForm::Reduced => HbrSepMap::reduced(c, &f)?,
            HbrForm::Full => HbrSepMap::full(c, &f)?,
        }),
        CoefficientSet::HbrMelnikov(c) => AnyMap::Hbr(HbrSepMap::from_melnikov(c, cfg.ix, cfg.iy, &f)?),
    };
    let input_hash = config_hash(&file)?;
    Ok((map, f, input_hash))
}

#[derive(Serialize)]
struct OrbitSummary {
    rows: usize,
    terminal: Option<&'static str>,
    mean_t_dom: f64,
}

fn orbit_summary(rec: &OrbitRecord) -> OrbitSummary {
    let td = rec.dominance_times();
    let mean = if td.is_empty() { f64::NAN } else { td.iter().sum::<f64>() / td.len() as f64 };
    OrbitSummary { rows: rec.len(), terminal: rec.terminal.map(|t| t.code()), mean_t_dom: mean }
}

fn iterate(cfg: &ExperimentConfig, a: &IterateArgs) -> Result<()> {
    let (map, f, input_hash) = load_map(cfg, &a.coeffs, a.hbr_form)?;
    let hash = hash_of("iterate", cfg, a, Some(&input_hash))?;
    let n = cfg.iterates.unwrap_or(100_000);
    let theta = vec![a.theta0; f.len()];
    let rec = match map {
        AnyMap::Duffing(m) => {
            let m = if a.scaled { m.scaled() } else { m };
            m.iterate(&DuffingState { w: a.w0.unwrap_or(0.0), theta, sigma: a.sigma0 }, n)?
        }
        AnyMap::Hbr(m) => m.iterate(&HbrState { q: a.q0, w: a.w0.unwrap_or(-0.1), theta }, n)?,
    };
    let dir = cfg.out_dir();
    orbit_table(&rec).write(&dir.join("orbit.csv"), &hash)?;
    let s = orbit_summary(&rec);
    println!("{} rows, mean dominance time {}", s.rows, s.mean_t_dom);
    if let Some(t) = s.terminal {
        println!("orbit stopped early: {t}");
    }
    summary(&dir, "orbit.json", "iterate", &hash, &["orbit.csv"], s)
}

fn scan_table(scan: &LyapunovScan) -> Table {
    let mut t = Table::new(&["theta", "w", "lambda", "lambda_benettin", "megno_mean", "iterates", "terminal"]);
    let nw = scan.w.len();
    for (k, c) in scan.cells.iter().enumerate() {
        t.push(vec![
            fmt_f64(scan.theta[k / nw]),
            fmt_f64(scan.w[k % nw]),
            fmt_f64(c.lambda),
            fmt_f64(c.lambda_benettin),
            fmt_f64(c.megno_mean),
            c.iterates.to_string(),
            c.terminal.map(|t| t.code()).unwrap_or("").to_string(),
        ]);
    }
    t
}

fn grid<M, F>(map: &M, spec: &GridSpec, make: F) -> Result<LyapunovScan>
where
    M: TangentMap,
    F: Fn(f64, f64) -> M::State + Sync,
{
    lyapunov_grid(map, spec, make)
}

fn megno_scan(cfg: &ExperimentConfig, a: &MegnoArgs) -> Result<()> {
    let (map, f, input_hash) = load_map(cfg, &a.coeffs, a.hbr_form)?;
    let hash = hash_of("megno-scan", cfg, a, Some(&input_hash))?;
    let n = f.len();
    let r = match &map {
        AnyMap::Duffing(m) => m.r,
        AnyMap::Hbr(m) => m.r,
    };
    let spec = GridSpec {
        w_min: -r,
        w_max: r,
        n_w: a.n_w,
        n_theta: a.n_theta,
        iterates: cfg.iterates.unwrap_or(10_000),
        transient: a.transient,
        threshold: a.threshold,
    };
    let scan = match &map {
        AnyMap::Duffing(m) => grid(m, &spec, |w, th| DuffingState { w, theta: vec![th; n], sigma: 1.0 })?,
        AnyMap::Hbr(m) => grid(m, &spec, |w, th| HbrState { q: 0.0, w, theta: vec![th; n] })?,
    };
    let dir = cfg.out_dir();
    scan_table(&scan).write(&dir.join("megno.csv"), &hash)?;
    let s = &scan.summary;
    println!("fraction positive = {}", s.fraction_positive);
    println!("fraction negative = {}", s.fraction_negative);
    if s.fraction_flagged > 0.0 {
        println!("fraction flagged = {}", s.fraction_flagged);
    }
    summary(&dir, "megno.json", "megno-scan", &hash, &["megno.csv"], s)
}

#[derive(Serialize)]
struct FitSummary {
    samples: usize,
    fits: Vec<sepmap::stats::FitResult>,
}

fn fit_cmd(cfg: &ExperimentConfig, a: &FitArgs) -> Result<()> {
    let data = read_column(&a.input, &a.column)?;
    let input = std::fs::read(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
    let input_hash = config_hash(&input)?;
    let hash = hash_of("fit", cfg, a, Some(&input_hash))?;
    if a.skip >= data.len() {
        return Err(Error::Config(format!("cannot skip {} of {} samples", a.skip, data.len())));
    }
    let samples = &data[a.skip..];
    let ov = match a.family {
        FamilyArg::All => overlay_fits(samples, a.points)?,
        single => {
            let family = match single {
                FamilyArg::Gamma => Family::Gamma,
                FamilyArg::Lognormal => Family::Lognormal,
                _ => Family::Normal,
            };
            overlay(vec![fit(family, samples)?], samples, a.points)?
        }
    };
    let rule = a.bins.map(BinRule::Count).unwrap_or(BinRule::FreedmanDiaconis);
    let h = histogram(samples, rule)?;
    let dir = cfg.out_dir();
    let mut ht = Table::new(&["left", "right", "count", "density"]);
    for (k, e) in h.edges.windows(2).enumerate() {
        ht.push(vec![fmt_f64(e[0]), fmt_f64(e[1]), h.counts[k].to_string(), fmt_f64(h.density[k])]);
    }
    ht.write(&dir.join("histogram.csv"), &hash)?;
    let mut header = vec!["x".to_string()];
    header.extend(ov.fits.iter().map(|f| f.family.name().to_string()));
    let mut ot = Table::new(&header);
    for (x, d) in ov.x.iter().zip(&ov.densities) {
        let mut row = vec![fmt_f64(*x)];
        row.extend(d.iter().map(|v| fmt_f64(*v)));
        ot.push(row);
    }
    ot.write(&dir.join("overlay.csv"), &hash)?;
    for f in &ov.fits {
        let note = if f.degenerate { " (degenerate)" } else { "" };
        println!("{}: {:e} {:e}{note}", f.family.name(), f.p1, f.p2);
    }
    let s = FitSummary { samples: samples.len(), fits: ov.fits.clone() };
    summary(&dir, "fit.json", "fit", &hash, &["histogram.csv", "overlay.csv"], s)
}

#[derive(Serialize)]
struct SdeSummary {
    noise: NoiseConfig,
    orbit: OrbitSummary,
}

fn sde_run(cfg: &ExperimentConfig, a: &SdeArgs) -> Result<()> {
    let hash = hash_of("sde-run", cfg, a, None)?;
    let mut nc = match cfg.model {
        ModelKind::Duffing => NoiseConfig::duffing_default(cfg.gamma, cfg.seed),
        ModelKind::Hbr => NoiseConfig::hbr_default(cfg.seed),
    };
    if let Some(v) = a.crossings {
        nc.crossings = v;
    }
    if let Some(v) = a.noise {
        nc.eps = v;
    }
    if let Some(v) = a.dt {
        nc.sde.dt = v;
    }
    nc.path = a.path;
    let run = match cfg.model {
        ModelKind::Duffing => run_duffing_noise(cfg.duffing_params()?, cfg.r, &nc)?,
        ModelKind::Hbr => {
            let s = match &a.start {
                Some(v) => [v[0], v[1], v[2]],
                None => [0.0, 0.0, FRAC_1_SQRT_2],
            };
            run_hbr_noise(cfg.hbr_params()?, s, &nc)?
        }
    };
    let dir = cfg.out_dir();
    orbit_table(&run.record).write(&dir.join("crossings.csv"), &hash)?;
    let s = SdeSummary { noise: nc, orbit: orbit_summary(&run.record) };
    println!("{} crossings, mean dominance time {}", s.orbit.rows, s.orbit.mean_t_dom);
    if let Some(t) = s.orbit.terminal {
        println!("run stopped early: {t}");
    }
    summary(&dir, "crossings.json", "sde-run", &hash, &["crossings.csv"], s)
}

fn calibrate(cfg: &ExperimentConfig, a: &CalibrateArgs) -> Result<()> {
    if a.r_steps < 2 || !(a.r0 < a.r_min && a.r_min < a.r_max && a.r_max < 1.0) {
        return Err(Error::Config("need r0 < r_min < r_max < 1 and at least 2 steps".into()));
    }
    let hash = hash_of("calibrate-r", cfg, a, None)?;
    let mut radii = vec![a.r0];
    radii.extend((0..a.r_steps).map(|k| a.r_min + (a.r_max - a.r_min) * k as f64 / (a.r_steps - 1) as f64));
    let rows = match cfg.model {
        ModelKind::Duffing => section_radius_error_duffing(cfg.duffing_params()?, &radii, a.r0, opts())?,
        ModelKind::Hbr => section_radius_error_hbr(cfg.hbr_params()?, &radii, a.r0, opts())?,
    };
    let mut t = Table::new(&["r", "global_time", "error"]);
    for row in &rows {
        t.push(vec![fmt_f64(row.r), fmt_f64(row.global_time), fmt_f64(row.error)]);
    }
    let dir = cfg.out_dir();
    t.write(&dir.join("calibrate.csv"), &hash)?;
    println!("wrote {} radii to {}", rows.len(), dir.join("calibrate.csv").display());
    summary(&dir, "calibrate.json", "calibrate-r", &hash, &["calibrate.csv"], rows)
}

fn compare(cfg: &ExperimentConfig, a: &CompareArgs) -> Result<()> {
    let hash = hash_of("compare-maps", cfg, a, None)?;
    let omega = cfg.forcing()?.omega;
    let dir = cfg.out_dir();
    let mut t;
    match cfg.model {
        ModelKind::Duffing => {
            let rows = compare_duffing_maps(&a.gammas, &a.radii, &omega, a.grid, opts())?;
            t = Table::new(&["gamma", "r", "alpha", "alpha_scaled", "t_star", "s0_plus_s1", "gap"]);
            for r in &rows {
                t.push(
                    [r.gamma, r.r, r.alpha, r.alpha_scaled, r.t_star, r.s0_plus_s1, r.gap]
                        .iter()
                        .map(|v| fmt_f64(*v))
                        .collect(),
                );
                println!("gamma = {}  r = {}  alpha = {:e}  gap = {:e}", r.gamma, r.r, r.alpha, r.gap);
            }
        }
        ModelKind::Hbr => {
            let rows = compare_hbr_maps(&a.i_values, cfg.r, &omega, a.grid, opts())?;
            t = Table::new(&["i", "alpha_x", "a_x", "t_star", "gap", "gap_aligned"]);
            for r in &rows {
                t.push([r.i, r.alpha_x, r.a_x, r.t_star, r.gap, r.gap_aligned].iter().map(|v| fmt_f64(*v)).collect());
                println!(
                    "I = {}  alpha_x = {:e}  A_x = {:e}  gap = {:e}  aligned gap = {:e}",
                    r.i, r.alpha_x, r.a_x, r.gap, r.gap_aligned
                );
            }
        }
    }
    t.write(&dir.join("compare.csv"), &hash)?;
    summary(&dir, "compare.json", "compare-maps", &hash, &["compare.csv"], t.rows.len())
}

#[derive(Serialize)]
struct DiophantineSummary {
    k: u64,
    c: f64,
}

fn diophantine(cfg: &ExperimentConfig, a: &DiophantineArgs) -> Result<()> {
    let hash = hash_of("diophantine", cfg, a, None)?;
    let w = FrequencyPreset::from(cfg.preset).frequencies();
    let mut ks = vec![];
    let mut k = 1;
    while k < a.k {
        ks.push(k);
        k *= 2;
    }
    ks.push(a.k);
    let mut t = Table::new(&["K", "C"]);
    let mut last = f64::NAN;
    for &k in &ks {
        last = diophantine_constant(w[1], w[2], k)?;
        t.push(vec![k.to_string(), fmt_f64(last)]);
    }
    let dir = cfg.out_dir();
    t.write(&dir.join("diophantine.csv"), &hash)?;
    println!("C({}) = {}", a.k, last);
    summary(&dir, "diophantine.json", "diophantine", &hash, &["diophantine.csv"], DiophantineSummary { k: a.k, c: last })
}
