//! Explicit time integration of the PML-modified wave equation.
//!
//! Each step advances `Psi` by half a step, solves the diagonal system for the
//! new pressure and then updates the auxiliary fields `Phi_i` on the PML
//! support. All matrices come from [`crate::assembly`].

mod source;

use std::fmt::Write as _;
use std::path::Path;

pub use source::{
    cfl_timestep, filtered_pulse, gaussian_pulse, pulse_delay, zero_phase_lowpass, DEFAULT_CFL,
};

use crate::assembly::AssembledSystem;
use crate::geometry::Mesh;
use crate::pml::PmlSpec;
use crate::tmtf::{tail_ratio, DECAY_WARN};
use crate::{Error, Result, C0, RHO0};

/// Absolute distance within which a probe position must match a mesh node.
pub const PROBE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub c0: f64,
    pub rho0: f64,
    /// Explicit time step; when absent it follows from `cfl`.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_total: f64,
    /// Nominal source bandwidth; the pulse delay defaults to `0.646 / f0`.
    pub f0: f64,
    pub t_gp: Option<f64>,
    /// Low-pass cutoff of the source; defaults to `f0`, `0` disables filtering.
    pub lowpass_hz: Option<f64>,
    /// Peak volume velocity of the pulse (m³/s).
    pub source_amplitude: f64,
    pub mu_w: f64,
    pub mu_z: f64,
    /// Target PML reflection; `1` disables the layer.
    pub r_inf: f64,
    pub probes: Vec<[f64; 3]>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            c0: C0,
            rho0: RHO0,
            dt: None,
            cfl: DEFAULT_CFL,
            t_total: 0.0,
            f0: 1e4,
            t_gp: None,
            lowpass_hz: None,
            source_amplitude: 1.0,
            mu_w: 0.0,
            mu_z: 0.0,
            r_inf: 1.0,
            probes: Vec::new(),
        }
    }
}

fn parse_f64(v: &str, line: usize, key: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("{key}: not a number: {v:?}")))
}

impl SimulationConfig {
    /// Parses `key = value` lines; `#` starts a comment and `probe` may repeat.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected key = value, got {body:?}")))?;
            cfg.set(key.trim(), value.trim(), line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one setting; `line` is only used for error messages.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let num = || parse_f64(value, line, key);
        match key {
            "c0" => self.c0 = num()?,
            "rho0" => self.rho0 = num()?,
            "dt" => self.dt = Some(num()?),
            "cfl" => self.cfl = num()?,
            "t_total" => self.t_total = num()?,
            "f0" => self.f0 = num()?,
            "t_gp" => self.t_gp = Some(num()?),
            "lowpass_hz" => self.lowpass_hz = Some(num()?),
            "source_amplitude" => self.source_amplitude = num()?,
            "mu_w" => self.mu_w = num()?,
            "mu_z" => self.mu_z = num()?,
            "r_inf" => self.r_inf = num()?,
            "probe" => {
                let parts: Vec<&str> = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .collect();
                if parts.len() != 3 {
                    return Err(Error::parse(line, "probe needs three coordinates"));
                }
                let mut p = [0.0; 3];
                for (k, s) in parts.iter().enumerate() {
                    p[k] = parse_f64(s, line, key)?;
                }
                self.probes.push(p);
            }
            _ => return Err(Error::parse(line, format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("c0", self.c0)?;
        positive("rho0", self.rho0)?;
        positive("f0", self.f0)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
            if self.t_total != 0.0 && self.t_total < dt {
                return Err(Error::Config(
                    "t_total must be at least one time step".into(),
                ));
            }
        }
        if let Some(t) = self.t_gp {
            positive("t_gp", t)?;
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.t_total >= 0.0) {
            return Err(Error::Config("t_total must be non-negative".into()));
        }
        if !(self.mu_w >= 0.0 && self.mu_z >= 0.0) {
            return Err(Error::Config(
                "wall admittances must be non-negative".into(),
            ));
        }
        if !(self.r_inf > 0.0 && self.r_inf <= 1.0) {
            return Err(Error::Config(format!(
                "r_inf must lie in (0, 1], got {}",
                self.r_inf
            )));
        }
        if !self.source_amplitude.is_finite() {
            return Err(Error::Config("source_amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn t_gp(&self) -> f64 {
        self.t_gp.unwrap_or_else(|| pulse_delay(self.f0))
    }

    pub fn lowpass(&self) -> Option<f64> {
        match self.lowpass_hz {
            Some(f) if f <= 0.0 => None,
            Some(f) => Some(f),
            None => Some(self.f0),
        }
    }

    /// Serializes the configuration in the same key = value format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "c0 = {:?}", self.c0);
        let _ = writeln!(s, "rho0 = {:?}", self.rho0);
        if let Some(dt) = self.dt {
            let _ = writeln!(s, "dt = {dt:?}");
        }
        let _ = writeln!(s, "cfl = {:?}", self.cfl);
        let _ = writeln!(s, "t_total = {:?}", self.t_total);
        let _ = writeln!(s, "f0 = {:?}", self.f0);
        if let Some(t) = self.t_gp {
            let _ = writeln!(s, "t_gp = {t:?}");
        }
        if let Some(f) = self.lowpass_hz {
            let _ = writeln!(s, "lowpass_hz = {f:?}");
        }
        let _ = writeln!(s, "source_amplitude = {:?}", self.source_amplitude);
        let _ = writeln!(s, "mu_w = {:?}", self.mu_w);
        let _ = writeln!(s, "mu_z = {:?}", self.mu_z);
        let _ = writeln!(s, "r_inf = {:?}", self.r_inf);
        for p in &self.probes {
            let _ = writeln!(s, "probe = {:?} {:?} {:?}", p[0], p[1], p[2]);
        }
        s
    }
}

/// Pressure history at one mesh node, sampled every `dt` from t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub position: [f64; 3],
    pub node: usize,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl ProbeRecord {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|n| n as f64 * self.dt)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(32 * self.samples.len() + 16);
        s.push_str("t_s,p_pa\n");
        for (t, p) in self.times().zip(&self.samples) {
            let _ = writeln!(s, "{t:?},{p:?}");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Reads a `t_s,p_pa` file; position and node are not stored in it.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "t_s,p_pa" => {}
            _ => return Err(Error::parse(1, "expected header t_s,p_pa")),
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (i, raw) in lines {
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            let (t, p) = l
                .split_once(',')
                .ok_or_else(|| Error::parse(i + 1, "expected two columns"))?;
            times.push(parse_f64(t.trim(), i + 1, "t_s")?);
            samples.push(parse_f64(p.trim(), i + 1, "p_pa")?);
        }
        let dt = if times.len() > 1 {
            times[1] - times[0]
        } else {
            0.0
        };
        // rebuild dt from the span to avoid rounding in the text
        let dt = if times.len() > 2 {
            (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
        } else {
            dt
        };
        Ok(Self {
            position: [f64::NAN; 3],
            node: usize::MAX,
            dt,
            samples,
        })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }
}

/// Nodal unknowns of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// Step index `n` of `p`.
    pub n: usize,
    pub p_prev: Vec<f64>,
    pub p: Vec<f64>,
    pub phi: [Vec<f64>; 3],
    /// `Psi` at the half step `n - 1/2`.
    pub psi: Vec<f64>,
}

impl FieldState {
    pub fn zeros(n_nodes: usize) -> Self {
        let z = || vec![0.0; n_nodes];
        Self {
            n: 0,
            p_prev: z(),
            p: z(),
            phi: [z(), z(), z()],
            psi: z(),
        }
    }
}

/// Precomputed per-node factors of the explicit update.
#[derive(Debug, Clone)]
struct Coefficients {
    inv_lhs: Vec<f64>,
    mass_dt2: Vec<f64>,
    damp: Vec<f64>,
    phi_keep: [Vec<f64>; 3],
    phi_inv: [Vec<f64>; 3],
}

/// A ready-to-run simulation: assembled system, source samples and probes.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub cfg: SimulationConfig,
    pub sys: AssembledSystem,
    pub pml: PmlSpec,
    pub dt: f64,
    pub steps: usize,
    pub probe_nodes: Vec<usize>,
    pub mesh_digest: String,
    /// Per-step boundary flux `g^n = -rho0/S dQ/dt`.
    load: Vec<f64>,
    coef: Coefficients,
    state: FieldState,
    scratch: Vec<f64>,
    psi_new: Vec<f64>,
    records: Vec<Vec<f64>>,
}

impl Simulation {
    pub fn new(mesh: &Mesh, cfg: &SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let pml = PmlSpec::from_mesh(mesh, cfg.r_inf, cfg.c0)?;
        let sys = AssembledSystem::assemble(mesh, cfg.mu_z, cfg.mu_w, &pml)?;
        let dt = match cfg.dt {
            Some(dt) => dt,
            None => cfl_timestep(mesh, cfg.c0, cfg.cfl)?,
        };
        let steps = (cfg.t_total / dt * (1.0 + 1e-12)).floor() as usize;
        let probe_nodes = cfg
            .probes
            .iter()
            .map(|&p| {
                mesh.node_at(p, PROBE_TOL).ok_or_else(|| {
                    Error::Config(format!("probe {p:?} does not coincide with a mesh node"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_system(sys, pml, cfg, dt, steps, probe_nodes, mesh.digest())
    }

    /// Builds a simulation around an already assembled system.
    pub fn with_system(
        sys: AssembledSystem,
        pml: PmlSpec,
        cfg: &SimulationConfig,
        dt: f64,
        steps: usize,
        probe_nodes: Vec<usize>,
        mesh_digest: String,
    ) -> Result<Self> {
        let q = filtered_pulse(
            steps + 1,
            dt,
            cfg.t_gp(),
            cfg.lowpass(),
            cfg.source_amplitude,
        )?;
        // g = -rho0/S dQ/dt, with q[i] = Q((i - 1) dt)
        let scale = -cfg.rho0 / sys.source_area / (2.0 * dt);
        let load = (0..=steps).map(|n| scale * (q[n + 2] - q[n])).collect();
        let n = sys.n_nodes();
        let c0 = cfg.c0;
        let mut coef = Coefficients {
            inv_lhs: vec![0.0; n],
            mass_dt2: vec![0.0; n],
            damp: vec![0.0; n],
            phi_keep: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            phi_inv: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        };
        for a in 0..n {
            let m = sys.mass[a];
            if !(m > 0.0) {
                return Err(Error::Assembly(format!(
                    "node {a} is not attached to any tet"
                )));
            }
            let d = (c0 * sys.damping[a] + sys.pml.m_alpha[a]) / (2.0 * dt);
            coef.mass_dt2[a] = m / (dt * dt);
            coef.damp[a] = d;
            coef.inv_lhs[a] = 1.0 / (coef.mass_dt2[a] + d);
        }
        for i in 0..3 {
            for &a in &sys.pml.support {
                let m = sys.mass[a] / dt;
                let x = 0.5 * sys.pml.m_xi[i][a];
                coef.phi_inv[i][a] = 1.0 / (m + x);
                coef.phi_keep[i][a] = (m - x) / (m + x);
            }
        }
        let mut records: Vec<Vec<f64>> = probe_nodes
            .iter()
            .map(|_| Vec::with_capacity(steps + 1))
            .collect();
        for r in &mut records {
            r.push(0.0);
        }
        Ok(Self {
            cfg: cfg.clone(),
            pml,
            dt,
            steps,
            probe_nodes,
            mesh_digest,
            load,
            coef,
            state: FieldState::zeros(n),
            scratch: vec![0.0; n],
            psi_new: vec![0.0; n],
            records,
            sys,
        })
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.n >= self.steps
    }

    /// Advances one step, from `P^n` to `P^{n+1}`.
    pub fn step(&mut self) -> Result<()> {
        let n = self.state.n;
        let c2 = self.cfg.c0 * self.cfg.c0;
        let dt = self.dt;
        let g = self.load.get(n).copied().unwrap_or(0.0);
        let sys = &self.sys;
        let pml = &sys.pml;
        let st = &mut self.state;
        let has_pml = !pml.is_empty();

        if has_pml {
            for &a in &pml.support {
                self.psi_new[a] = st.psi[a] + dt * st.p[a];
            }
        }

        // rhs = -c0^2 K P^n + sum_i B_i Phi_i
        let rhs = &mut self.scratch;
        sys.stiffness.mul_vec_into(&st.p, rhs);
        for v in rhs.iter_mut() {
            *v *= -c2;
        }
        if has_pml {
            for i in 0..3 {
                pml.grad[i].mul_vec_add(&st.phi[i], rhs);
            }
        }

        let co = &self.coef;
        let mut finite = true;
        for a in 0..rhs.len() {
            let mut r = rhs[a]
                + co.mass_dt2[a] * (2.0 * st.p[a] - st.p_prev[a])
                + co.damp[a] * st.p_prev[a]
                + c2 * sys.source[a] * g;
            if has_pml {
                r -= pml.m_beta[a] * st.p[a] + pml.m_gamma[a] * 0.5 * (self.psi_new[a] + st.psi[a]);
            }
            let next = r * co.inv_lhs[a];
            finite &= next.is_finite();
            // p_prev now holds P^{n+1}
            st.p_prev[a] = next;
        }
        if !finite {
            return Err(Error::Unstable { step: n + 1 });
        }
        std::mem::swap(&mut st.p_prev, &mut st.p);
        // now st.p = P^{n+1}, st.p_prev = P^n

        if has_pml {
            for i in 0..3 {
                let sum = &mut self.scratch;
                for &a in &pml.support {
                    sum[a] = 0.0;
                }
                // B_{i,a} (P^{n+1} + P^n)/2 + B_{i,b} Psi^{n+1/2}
                for &a in &pml.support {
                    let mut acc = 0.0;
                    for (c, v) in pml.grad_a[i].row(a) {
                        acc += v * 0.5 * (st.p[c] + st.p_prev[c]);
                    }
                    for (c, v) in pml.grad_b[i].row(a) {
                        acc += v * self.psi_new[c];
                    }
                    sum[a] = acc;
                }
                for &a in &pml.support {
                    st.phi[i][a] =
                        co.phi_keep[i][a] * st.phi[i][a] + co.phi_inv[i][a] * c2 * sum[a];
                }
            }
            std::mem::swap(&mut st.psi, &mut self.psi_new);
        }
        st.n = n + 1;
        for (rec, &node) in self.records.iter_mut().zip(&self.probe_nodes) {
            rec.push(st.p[node]);
        }
        Ok(())
    }

    /// Discrete energy `1/2 v' M v + 1/2 c0^2 P^n' K P^{n-1}` with the staggered
    /// velocity `v = (P^n - P^{n-1}) / dt`.
    ///
    /// This is the central-difference energy evaluated on the half step, the
    /// form the lossless scheme conserves exactly.
    pub fn energy(&self) -> f64 {
        let st = &self.state;
        let sys = &self.sys;
        let c2 = self.cfg.c0 * self.cfg.c0;
        let mut kinetic = 0.0;
        for a in 0..st.p.len() {
            let v = (st.p[a] - st.p_prev[a]) / self.dt;
            kinetic += sys.mass[a] * v * v;
        }
        let kp = sys.stiffness.mul_vec(&st.p);
        let potential: f64 = st.p_prev.iter().zip(&kp).map(|(a, b)| a * b).sum();
        0.5 * kinetic + 0.5 * c2 * potential
    }

    /// Runs the remaining steps.
    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<ProbeRecord> {
        self.records
            .iter()
            .zip(&self.probe_nodes)
            .enumerate()
            .map(|(k, (samples, &node))| ProbeRecord {
                position: self.cfg.probes.get(k).copied().unwrap_or([f64::NAN; 3]),
                node,
                dt: self.dt,
                samples: samples.clone(),
            })
            .collect()
    }

    pub fn manifest(&self) -> RunManifest {
        let mut warnings = Vec::new();
        for (k, rec) in self.records.iter().enumerate() {
            let r = tail_ratio(rec);
            if r >= DECAY_WARN {
                warnings.push(format!("probe {k} has not decayed (tail/peak = {r:.3e})"));
            }
        }
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.cfg.clone(),
            dt: self.dt,
            steps: self.state.n,
            simulated_time: self.state.n as f64 * self.dt,
            mesh_digest: self.mesh_digest.clone(),
            n_nodes: self.sys.n_nodes(),
            probe_nodes: self.probe_nodes.clone(),
            warnings,
        }
    }
}

/// Description of a finished run, stored next to the probe files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub version: String,
    pub config: SimulationConfig,
    pub dt: f64,
    pub steps: usize,
    pub simulated_time: f64,
    pub mesh_digest: String,
    pub n_nodes: usize,
    pub probe_nodes: Vec<usize>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "c0 = {:?}", c.c0);
        let _ = writeln!(s, "rho0 = {:?}", c.rho0);
        let _ = writeln!(s, "dt = {:?}", self.dt);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "simulated_time = {:?}", self.simulated_time);
        let _ = writeln!(s, "mu_w = {:?}", c.mu_w);
        let _ = writeln!(s, "mu_z = {:?}", c.mu_z);
        let _ = writeln!(s, "r_inf = {:?}", c.r_inf);
        let _ = writeln!(s, "f0 = {:?}", c.f0);
        let _ = writeln!(s, "t_gp = {:?}", c.t_gp());
        let lp = c.lowpass().map_or("none".to_string(), |f| format!("{f:?}"));
        let _ = writeln!(s, "lowpass_hz = {lp}");
        let _ = writeln!(s, "source_amplitude = {:?}", c.source_amplitude);
        let _ = writeln!(s, "mesh_digest = {}", self.mesh_digest);
        let _ = writeln!(s, "n_nodes = {}", self.n_nodes);
        for (k, (p, node)) in c.probes.iter().zip(&self.probe_nodes).enumerate() {
            let _ = writeln!(s, "probe{k} = {:?} {:?} {:?} node {node}", p[0], p[1], p[2]);
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        s
    }
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ProbeRecord>,
    pub manifest: RunManifest,
}

pub fn run(mesh: &Mesh, cfg: &SimulationConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(mesh, cfg)?;
    sim.run_to_end()?;
    Ok(RunOutput {
        records: sim.records(),
        manifest: sim.manifest(),
    })
}
