use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use twophase::config::TauRule;
use twophase::diagnostics::{eoc, hausdorff_distance, identity_suite, theorem_errors, Comparison, ErrorRecord};
use twophase::mesh::{export_mesh, import_mesh, shape_metrics, CurvedMesh};
use twophase::scheme::{initial_mesh, run_from, write_interface_vtk, write_vtk, CsvWriter, StateSnapshot};
use twophase::{Error, RunConfig, Shape};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_ACCEPTANCE: u8 = 4;

pub struct Options {
    pub config: Option<PathBuf>,
    pub set: Vec<String>,
    pub out: Option<PathBuf>,
    pub levels: usize,
    pub quiet: bool,
}

/// Pipeline stage attached to errors as context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Config,
    Mesh,
    Solve,
    Reference,
    Errors,
    Output,
    Check,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "configuration",
            Stage::Mesh => "mesh",
            Stage::Solve => "time stepping",
            Stage::Reference => "reference run",
            Stage::Errors => "error evaluation",
            Stage::Output => "writing output",
            Stage::Check => "check",
        })
    }
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            match e {
                Error::JacobianFlip { .. } | Error::SingularSystem(_) => return EXIT_SOLVER,
                Error::Parse { .. } | Error::Validation(_) => return EXIT_CONFIG,
                _ => {}
            }
        }
    }
    if err.downcast_ref::<Stage>() == Some(&Stage::Config) {
        EXIT_CONFIG
    } else {
        EXIT_FAILURE
    }
}

impl Options {
    fn load_config(&self) -> Result<RunConfig> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display())),
            None => Ok(String::new()),
        }
        .context(Stage::Config)?;
        RunConfig::parse_with_overrides(&text, &self.set).map_err(anyhow::Error::from).context(Stage::Config)
    }

    fn out_dir(&self, config: Option<&RunConfig>) -> Result<PathBuf> {
        let dir = match (&self.out, config) {
            (Some(dir), _) => dir.clone(),
            (None, Some(c)) => c.output_dir.clone(),
            (None, None) => PathBuf::from("output"),
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())).context(Stage::Output)?;
        Ok(dir)
    }

    fn progress(&self, msg: impl FnOnce() -> String) {
        if !self.quiet {
            eprintln!("{}", msg());
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).context(Stage::Output)
}

pub fn run(opts: &Options) -> Result<ExitCode> {
    let config = opts.load_config()?;
    let dir = opts.out_dir(Some(&config))?;
    write(&dir.join("config.txt"), &config.serialize())?;
    let mesh = initial_mesh(&config).context(Stage::Mesh)?;
    write(&dir.join("mesh.txt"), &export_mesh(&mesh))?;

    let mut csv = CsvWriter::create(&dir.join("diagnostics.csv")).context(Stage::Output)?;
    let (tau, n_steps, every) = (config.tau(), config.n_steps(), config.snapshot_every.max(1));
    opts.progress(|| format!("run: {} steps of tau = {tau:e} on {} elements", n_steps, mesh.n_elements()));
    let outcome = run_from(StateSnapshot::initial(mesh), &config.physics(), tau, n_steps, &mut |state, rec| {
        csv.write(rec)?;
        if rec.step % every == 0 || rec.step == n_steps {
            write_vtk(&dir.join(format!("bulk_{:06}.vtk", rec.step)), state)?;
            write_interface_vtk(&dir.join(format!("interface_{:06}.vtk", rec.step)), state)?;
        }
        opts.progress(|| {
            format!(
                "step {:>6}  t = {:.6}  perimeter = {:.10}  area = {:.10}  energy residual = {:+.3e}",
                rec.step, rec.t, rec.perimeter, rec.area_minus, rec.energy_residual
            )
        });
        Ok(())
    })
    .context(Stage::Solve)?;
    let last = outcome.records.last().expect("at least one step is solved");
    opts.progress(|| format!("done: t = {:.6}, perimeter = {:.10}, output in {}", last.t, last.perimeter, dir.display()));
    Ok(ExitCode::SUCCESS)
}

/// Configuration of one refinement level.
fn with_h(config: &RunConfig, h: f64) -> RunConfig {
    RunConfig { h, ..config.clone() }
}

fn final_state(opts: &Options, config: &RunConfig, label: &str) -> Result<StateSnapshot> {
    let mesh = initial_mesh(config).context(Stage::Mesh)?;
    opts.progress(|| {
        format!("{label}: h = {}, tau = {:e}, {} steps, {} elements", config.h, config.tau(), config.n_steps(), mesh.n_elements())
    });
    let outcome = run_from(StateSnapshot::initial(mesh), &config.physics(), config.tau(), config.n_steps(), &mut |_, _| Ok(()))?;
    Ok(outcome.final_state)
}

pub fn converge(opts: &Options) -> Result<ExitCode> {
    let config = opts.load_config()?;
    if opts.levels < 2 {
        return Err(anyhow::anyhow!("--levels must be at least 2, got {}", opts.levels).context(Stage::Config));
    }
    let dir = opts.out_dir(Some(&config))?;
    let hs: Vec<f64> = (0..opts.levels).map(|i| config.h / f64::from(1u32 << i)).collect();
    let exact = matches!(config.interface.shape, Shape::Circle { .. });

    let reference = if exact {
        None
    } else {
        let h_ref = config.h / f64::from(1u32 << opts.levels);
        let tau_ref = config.tau_rule.tau(h_ref, config.k) / 4.0;
        let ref_config = RunConfig { tau_rule: TauRule::Fixed(tau_ref), ..with_h(&config, h_ref) };
        Some(final_state(opts, &ref_config, "reference").context(Stage::Reference)?)
    };

    let mut records: Vec<ErrorRecord> = Vec::with_capacity(hs.len());
    for (i, &h) in hs.iter().enumerate() {
        let level = with_h(&config, h);
        let state = final_state(opts, &level, &format!("level {i}")).context(Stage::Solve)?;
        let cmp = match &reference {
            Some(r) => Comparison::Reference(r),
            None => Comparison::ExactCircle(&config.interface),
        };
        records.push(theorem_errors(&state, h, level.tau(), cmp).context(Stage::Errors)?);
    }
    let table = eoc(records).context(Stage::Errors)?;
    write(&dir.join("eoc.csv"), &table.to_csv())?;
    let text = table.to_text();
    write(&dir.join("eoc.txt"), &text)?;
    if !opts.quiet {
        print!("{text}");
    }

    let checks: Vec<(String, bool)> = if exact {
        let floor = config.k as f64 - 1.0;
        let rates = table.column_rates(0);
        let jumps: Vec<f64> = table.records.iter().map(|r| r.pressure_jump_err).collect();
        vec![
            (format!("velocity H1 rate >= {floor}"), rates.iter().all(|&r| r >= floor)),
            ("pressure jump error decreases".into(), jumps.windows(2).all(|w| w[1] < w[0])),
        ]
    } else {
        twophase::diagnostics::ERROR_COLUMNS
            .iter()
            .enumerate()
            .map(|(c, name)| {
                let e: Vec<f64> = table.records.iter().map(|r| r.values()[c]).collect();
                (format!("{name} decreases"), e.windows(2).all(|w| w[1] < w[0]))
            })
            .collect()
    };
    for (name, ok) in &checks {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    Ok(if checks.iter().all(|(_, ok)| *ok) { ExitCode::SUCCESS } else { ExitCode::from(EXIT_ACCEPTANCE) })
}

fn mesh_report(mesh: &CurvedMesh) -> String {
    let m = shape_metrics(mesh);
    let (minus, plus) = mesh.phase_areas();
    format!(
        "order                {}\nnodes                {}\nelements             {}\ninterface edges      {}\n\
         area minus           {:.12}\narea plus            {:.12}\ninterface length     {:.12}\n\
         kappa                {:.6}\nkappa star           {:.6}\nmin scaled jacobian  {:.6}\n",
        mesh.order(),
        mesh.n_nodes(),
        mesh.n_elements(),
        mesh.interface_edges().len(),
        minus,
        plus,
        mesh.interface_length(),
        m.kappa,
        m.kappa_star,
        m.min_scaled_jacobian,
    )
}

pub fn check_mesh(opts: &Options, file: Option<&Path>) -> Result<ExitCode> {
    let configured = file.is_none() || opts.config.is_some() || !opts.set.is_empty();
    let config = if configured { Some(opts.load_config()?) } else { None };
    let text = match (file, &config) {
        (Some(path), _) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(c)) => export_mesh(&initial_mesh(c).context(Stage::Mesh)?),
        (None, None) => unreachable!("a configuration is loaded when no mesh file is given"),
    };
    let mesh = import_mesh(&text).context(Stage::Mesh)?;

    let mut report = mesh_report(&mesh);
    let jacobians = mesh.check_jacobians();
    report += &format!("jacobians            {}\n", jacobians.as_ref().map_or_else(|e| e.to_string(), |_| "positive".into()));
    if let Some(c) = &config {
        report += &format!("hausdorff distance   {:.6e}\n", hausdorff_distance(&mesh, &c.interface, 16));
    }
    let identical = export_mesh(&mesh) == text;
    report += &format!("re-export            {}\n", if identical { "identical" } else { "differs" });
    print!("{report}");
    if opts.out.is_some() {
        let dir = opts.out_dir(None)?;
        write(&dir.join("mesh_report.txt"), &report)?;
    }
    jacobians.context(Stage::Check)?;
    if !identical {
        return Err(anyhow::anyhow!("re-exported mesh differs from its input").context(Stage::Check));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn identities(opts: &Options) -> Result<ExitCode> {
    let config = opts.load_config()?;
    let dir = opts.out_dir(Some(&config))?;
    let mesh = initial_mesh(&config).context(Stage::Mesh)?;
    let report = identity_suite(&mesh, &config.interface);
    let text = report.to_text();
    write(&dir.join("identities.txt"), &text)?;
    print!("{text}");
    if !report.passed() {
        bail!("identity suite reported failures");
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let flip = anyhow::Error::from(Error::JacobianFlip { element: 3, det: -1.0 }).context(Stage::Solve);
        assert_eq!(exit_code(&flip), EXIT_SOLVER);
        let singular = anyhow::Error::from(Error::SingularSystem("x".into()));
        assert_eq!(exit_code(&singular), EXIT_SOLVER);
        let invalid = anyhow::Error::from(Error::Validation(vec!["k".into()])).context(Stage::Config);
        assert_eq!(exit_code(&invalid), EXIT_CONFIG);
        let io = anyhow::anyhow!("missing file").context(Stage::Config);
        assert_eq!(exit_code(&io), EXIT_CONFIG);
        let other = anyhow::Error::from(Error::InvalidMesh("x".into())).context(Stage::Mesh);
        assert_eq!(exit_code(&other), EXIT_FAILURE);
    }
}
