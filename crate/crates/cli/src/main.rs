use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use impedukt_core::geometry::{
    generate_duct_mesh, generate_radiation_domain, generate_tract_mesh, make_elliptical_section,
    read_area_function, read_mesh, write_mesh, BoxDims,
};
use impedukt_core::oracles::{
    closed_duct_modes, flanged_piston_impedance, quadrature_elliptic_integral,
};
use impedukt_core::solver::{run, ProbeRecord, SimulationConfig};
use impedukt_core::tmtf::{extract_impedance, ProbeGeometry};
use impedukt_core::wavenumbers::{circular_cutoffs, elliptic_i, spacing_advice, LossyDuctModel};
use impedukt_core::{DuctSpec, EllipseSection, Error, Termination, C0};

#[derive(Parser)]
#[command(
    name = "impedukt",
    version,
    about = "Time-domain FEM impedance ducts and two-microphone analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tagged tetrahedral mesh.
    #[command(subcommand)]
    Mesh(MeshKind),
    /// Run the time-domain solver and write probe CSVs plus a manifest.
    Simulate(SimulateArgs),
    /// Turn two probe CSVs into reflection and impedance spectra.
    Impedance(ImpedanceArgs),
    /// Recommend a microphone spacing.
    Advise(AdviseArgs),
    /// List the first cutoff frequencies of a circular duct.
    Modes(ModesArgs),
    /// Evaluate an analytic reference.
    #[command(subcommand)]
    Oracle(OracleKind),
}

/// Cross-section given either as a radius or as semi-axes, optionally reshaped.
#[derive(Args, Clone)]
struct SectionArgs {
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long = "a-major")]
    a_major: Option<f64>,
    #[arg(long = "b-minor")]
    b_minor: Option<f64>,
    /// Reshape the section to this eccentricity at constant area.
    #[arg(long)]
    ecc: Option<f64>,
}

impl SectionArgs {
    fn section(&self) -> Result<EllipseSection, Error> {
        let base = match (self.radius, self.a_major, self.b_minor) {
            (Some(r), None, None) => EllipseSection::circular(r)?,
            (None, Some(a), Some(b)) => EllipseSection::new(a, b)?,
            _ => {
                return Err(Error::Config(
                    "give either --radius or both --a-major and --b-minor".into(),
                ))
            }
        };
        match self.ecc {
            Some(e) => make_elliptical_section(base.area(), e),
            None => Ok(base),
        }
    }
}

#[derive(Subcommand)]
enum MeshKind {
    /// Straight impedance duct.
    Duct {
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long)]
        length: f64,
        #[arg(long)]
        h: f64,
        /// closed_rigid, open_flanged or coupled.
        #[arg(long, default_value = "closed_rigid")]
        termination: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Duct ending in the flange of a PML-lined free-field box.
    RadiationDomain {
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long)]
        length: f64,
        #[arg(long)]
        h: f64,
        #[arg(long = "box", num_args = 3, value_names = ["X", "Y", "Z"])]
        box_dims: Vec<f64>,
        #[arg(long = "pml-width")]
        pml_width: f64,
        #[arg(long = "h-box")]
        h_box: f64,
        #[arg(long = "h-pml")]
        h_pml: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lofted duct following an area-function CSV.
    Tract {
        #[arg(long = "area-function")]
        area_function: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "mu-z")]
    mu_z: Option<f64>,
    #[arg(long = "mu-w")]
    mu_w: Option<f64>,
    #[arg(long)]
    rinf: Option<f64>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct ImpedanceArgs {
    #[arg(long)]
    probe1: PathBuf,
    #[arg(long)]
    probe2: PathBuf,
    /// Distance of probe 1 from the reference surface (m).
    #[arg(long)]
    x1: f64,
    #[arg(long)]
    x2: f64,
    #[command(flatten)]
    section: SectionArgs,
    #[arg(long = "mu-z", default_value_t = 0.0)]
    mu_z: f64,
    #[arg(long)]
    fmax: f64,
    #[arg(long, default_value_t = C0)]
    c0: f64,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdviseArgs {
    #[arg(long)]
    fmax: f64,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = C0)]
    c0: f64,
    /// Major semi-axis of the duct, for the minimum distance to the reference.
    #[arg(long = "a-major")]
    a_major: Option<f64>,
}

#[derive(Args)]
struct ModesArgs {
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = C0)]
    c0: f64,
}

#[derive(Subcommand)]
enum OracleKind {
    /// Flanged circular piston radiation impedance.
    Piston {
        #[arg(long)]
        ka: Vec<f64>,
    },
    /// Closed-closed duct resonances.
    ClosedDuct {
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = C0)]
        c0: f64,
    },
    /// The wall-loss elliptic integral, by series and by quadrature.
    Elliptic {
        #[arg(long)]
        ecc: Vec<f64>,
    },
}

fn write_out(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn mesh_cmd(kind: MeshKind) -> Result<(), Error> {
    let (mesh, out, warnings) = match kind {
        MeshKind::Duct {
            section,
            length,
            h,
            termination,
            out,
        } => {
            let spec = DuctSpec {
                section: section.section()?,
                length,
                h,
                termination: termination.parse::<Termination>()?,
            };
            (generate_duct_mesh(&spec)?, out, spec.warnings())
        }
        MeshKind::RadiationDomain {
            section,
            length,
            h,
            box_dims,
            pml_width,
            h_box,
            h_pml,
            out,
        } => {
            let spec = DuctSpec {
                section: section.section()?,
                length,
                h,
                termination: Termination::OpenFlanged,
            };
            let dims = BoxDims {
                x: box_dims[0],
                y: box_dims[1],
                z: box_dims[2],
            };
            let mesh = generate_radiation_domain(&spec, dims, pml_width, h_box, h_pml)?;
            (mesh, out, spec.warnings())
        }
        MeshKind::Tract {
            area_function,
            h,
            out,
        } => {
            let af = read_area_function(&area_function)?;
            (generate_tract_mesh(&af, h)?, out, Vec::new())
        }
    };
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_mesh(&mesh, &out)?;
    eprintln!(
        "wrote {} ({} nodes, {} tets, {} facets)",
        out.display(),
        mesh.n_nodes(),
        mesh.n_tets(),
        mesh.facets.len()
    );
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> Result<(), Error> {
    let mut cfg = SimulationConfig::read(&args.config)?;
    if let Some(v) = args.mu_z {
        cfg.mu_z = v;
    }
    if let Some(v) = args.mu_w {
        cfg.mu_w = v;
    }
    if let Some(v) = args.rinf {
        cfg.r_inf = v;
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{kv}' is not key=value")))?;
        cfg.set(k.trim(), v.trim(), 0)?;
    }
    let mesh = read_mesh(&args.mesh)?;
    let started = Instant::now();
    let out = run(&mesh, &cfg)?;
    fs::create_dir_all(&args.out)?;
    for (k, rec) in out.records.iter().enumerate() {
        rec.write_csv(args.out.join(format!("probe{k}.csv")))?;
    }
    fs::write(args.out.join("manifest.txt"), out.manifest.to_text())?;
    for w in &out.manifest.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} steps of {:.3e} s in {:.1} s wall time",
        out.manifest.steps,
        out.manifest.dt,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn impedance_cmd(args: ImpedanceArgs) -> Result<(), Error> {
    let rec1 = ProbeRecord::read_csv(&args.probe1)?;
    let rec2 = ProbeRecord::read_csv(&args.probe2)?;
    let geom = ProbeGeometry::new(args.x1, args.x2)?;
    let duct = LossyDuctModel::new(args.section.section()?, args.mu_z, args.c0)?;
    let spectrum = extract_impedance(&rec1, &rec2, &geom, &duct, args.fmax)?;
    for w in &spectrum.warnings {
        eprintln!("warning: {w}");
    }
    match args.out {
        Some(path) => write_out(&path, &spectrum.to_csv()),
        None => {
            print!("{}", spectrum.to_csv());
            Ok(())
        }
    }
}

fn advise_cmd(args: AdviseArgs) -> Result<(), Error> {
    let adv = spacing_advice(args.fmax, args.c0, args.h, args.a_major)?;
    println!("lambda_min_m = {:.6}", adv.lambda_min);
    println!("s_min_m = {:.6}", adv.s_min);
    println!("s_max_m = {:.6}", adv.s_max);
    println!("s_opt_m = {:.6}", adv.s_opt);
    if let Some(x) = adv.x1_min {
        println!("x1_min_m = {x:.6}");
    }
    Ok(())
}

fn modes_cmd(args: ModesArgs) -> Result<(), Error> {
    println!("mode,f_hz,centerline_limiting");
    for c in circular_cutoffs(args.radius, args.c0)? {
        println!("{},{:.3},{}", c.label, c.f_hz, c.centerline_limiting);
    }
    Ok(())
}

fn oracle_cmd(kind: OracleKind) -> Result<(), Error> {
    match kind {
        OracleKind::Piston { ka } => {
            println!("ka,resistance,reactance");
            for x in ka {
                let z = flanged_piston_impedance(x)?;
                println!("{x},{:.10},{:.10}", z.re, z.im);
            }
        }
        OracleKind::ClosedDuct { length, n, c0 } => {
            println!("n,f_hz");
            for (i, f) in closed_duct_modes(length, c0, n)?.iter().enumerate() {
                println!("{},{f:.6}", i + 1);
            }
        }
        OracleKind::Elliptic { ecc } => {
            println!("e,series,quadrature");
            for e in ecc {
                println!(
                    "{e},{:.15},{:.15}",
                    elliptic_i(e)?,
                    quadrature_elliptic_integral(e)?
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Mesh(kind) => mesh_cmd(kind),
        Command::Simulate(args) => simulate_cmd(args),
        Command::Impedance(args) => impedance_cmd(args),
        Command::Advise(args) => advise_cmd(args),
        Command::Modes(args) => modes_cmd(args),
        Command::Oracle(kind) => oracle_cmd(kind),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
