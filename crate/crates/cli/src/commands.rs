use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use serde_json::json;

use vmw::correlations::{
    cos_phi12, mstate_correlation_closed, mstate_correlation_vm, CorrelationInput, MIN_QUADRATURE,
};
use vmw::exact::{cg_exact, pairwise_xx_expectation, wigner_d_exact, CGKey};
use vmw::precession::{evolve, track_rotation, PrecessionConfig};
use vmw::semiclassical_cg::{
    cg_allowed, cg_forbidden, cg_sq_avg, cg_wkb, classify_region, coupling_geometry, AvgVariant,
};
use vmw::semiclassical_wigd::{r_classifier, wigd_asymptotic, wigd_wkb, WigdQuery};
use vmw::wavepacket::{
    build_j_wavepacket, direction, particle_density, particle_density_amps, q_distribution, uncertainty_report,
    AngularDensity, SphereGrid, WavepacketSpec,
};
use vmw::{HalfInt, JM};

use crate::args::*;
use crate::output::{cell, emit, sig12, RunManifest, Table};
use crate::suites;
use crate::{usage, CliError};

pub const GRID_THETA_VAR: &str = "VMW_GRID_THETA";
pub const GRID_PHI_VAR: &str = "VMW_GRID_PHI";

fn name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("named variant").get_name().to_string()
}

fn names<T: ValueEnum>(vs: &[T]) -> String {
    vs.iter().map(name).collect::<Vec<_>>().join(",")
}

fn angle(x: f64, degrees: bool) -> f64 {
    if degrees {
        x.to_radians()
    } else {
        x
    }
}

fn stamp(mut m: RunManifest, t0: Instant) -> RunManifest {
    m.wall_time_s = t0.elapsed().as_secs_f64();
    m
}

/// Grid from the environment overrides, falling back to the library default.
pub fn grid_from_env() -> Result<(SphereGrid, BTreeMap<String, String>), CliError> {
    let mut env = BTreeMap::new();
    let mut read = |var: &str, default: usize| -> Result<usize, CliError> {
        match std::env::var(var) {
            Ok(s) => {
                let n = s.trim().parse().map_err(|_| CliError::Usage(format!("{var}={s:?} is not a node count")))?;
                env.insert(var.to_string(), s);
                Ok(n)
            }
            Err(_) => Ok(default),
        }
    };
    let nt = read(GRID_THETA_VAR, SphereGrid::DEFAULT_THETA)?;
    let np = read(GRID_PHI_VAR, SphereGrid::DEFAULT_PHI)?;
    Ok((SphereGrid::new(nt, np).map_err(usage)?, env))
}

fn density_table(d: &AngularDensity) -> Table {
    let mut t = Table::new(&["theta", "phi", "value"]);
    let grid = &d.grid;
    for (i, &th) in grid.theta().iter().enumerate() {
        for (k, &ph) in grid.phi().iter().enumerate() {
            t.push(vec![sig12(th), sig12(ph), sig12(d.value(i, k))]);
        }
    }
    t
}

impl CgArgs {
    pub fn parameters(&self) -> Vec<(&'static str, String)> {
        let mut p = vec![
            ("j1", self.j1.to_string()),
            ("m1", self.m1.to_string()),
            ("j2", self.j2.to_string()),
            ("m2", self.m2.to_string()),
            ("sweep", name(&self.sweep)),
            ("methods", names(&self.methods)),
            ("avg-prefactor", name(&self.avg_prefactor)),
        ];
        if let Some(m3) = self.m3 {
            p.push(("m3", m3.to_string()));
        }
        if let Some(o) = &self.out {
            p.push(("out", o.display().to_string()));
        }
        p
    }
}

pub fn cmd_cg(a: &CgArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    JM::new(a.j1, a.m1).map_err(usage)?;
    JM::new(a.j2, a.m2).map_err(usage)?;
    let m3 = a.m1 + a.m2;
    if let Some(given) = a.m3 {
        if given != m3 {
            return Err(CliError::Usage(format!("--m3 {given} differs from m1 + m2 = {m3}")));
        }
    }
    let variant = match a.avg_prefactor {
        AvgPrefactor::JPlusOne => AvgVariant::JPlusOne,
        AvgPrefactor::TwoJPlusOne => AvgVariant::TwoJPlusOne,
    };
    let mut header = vec!["j3", "region"];
    header.extend(a.methods.iter().map(|m| match m {
        CgMethod::Exact => "exact",
        CgMethod::Avg => "avg_sq",
        CgMethod::Allowed => "allowed",
        CgMethod::Forbidden => "forbidden",
        CgMethod::Wkb => "wkb",
    }));
    let mut table = Table::new(&header);
    let (j1, m1, j2, m2) = (a.j1, a.m1, a.j2, a.m2);
    let mut j3 = (j1 - j2).abs().max(m3.abs());
    while j3 <= j1 + j2 {
        let geom = coupling_geometry(j1, m1, j2, m2, j3, m3);
        let region = geom.as_ref().map(|g| classify_region(g).as_str()).unwrap_or("");
        let mut row = vec![sig12(j3.value()), region.to_string()];
        for m in &a.methods {
            row.push(match m {
                CgMethod::Exact => cell(cg_exact(&CGKey::coupled(j1, m1, j2, m2, j3))),
                CgMethod::Avg => cell(cg_sq_avg(j1, m1, j2, m2, j3, variant)),
                CgMethod::Allowed => cell(geom.clone().and_then(|g| cg_allowed(&g, j3))),
                CgMethod::Forbidden => cell(geom.clone().and_then(|g| cg_forbidden(&g, j3))),
                CgMethod::Wkb => cell(cg_wkb(j1, m1, j2, m2, j3, m3)),
            });
        }
        table.push(row);
        j3 = j3 + HalfInt::ONE;
    }
    emit(&table, a.out.as_deref(), &stamp(RunManifest::new("cg", a.parameters()), t0))
}

impl WigdArgs {
    pub fn parameters(&self) -> Vec<(&'static str, String)> {
        let mut p = vec![
            ("j", self.j.to_string()),
            ("m", self.m.to_string()),
            ("sweep", name(&self.sweep)),
            ("steps", self.steps.to_string()),
            ("methods", names(&self.methods)),
        ];
        if let Some(mp) = self.mp {
            p.push(("mp", mp.to_string()));
        }
        if let Some(t) = self.theta {
            p.push(("theta", t.to_string()));
        }
        if self.degrees {
            p.push(("degrees", "true".into()));
        }
        if let Some(o) = &self.out {
            p.push(("out", o.display().to_string()));
        }
        p
    }
}

pub fn cmd_wigd(a: &WigdArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    JM::new(a.j, a.m).map_err(usage)?;
    let points: Vec<(HalfInt, f64)> = match a.sweep {
        WigdSweep::Theta => {
            let mp = a.mp.ok_or_else(|| CliError::Usage("--sweep theta needs --mp".into()))?;
            match a.theta {
                Some(t) => vec![(mp, angle(t, a.degrees))],
                None => {
                    if a.steps == 0 {
                        return Err(CliError::Usage("--steps must be at least 1".into()));
                    }
                    (1..=a.steps).map(|k| (mp, PI * k as f64 / (a.steps + 1) as f64)).collect()
                }
            }
        }
        WigdSweep::Mp => {
            if a.mp.is_some() {
                return Err(CliError::Usage("--mp conflicts with --sweep mp".into()));
            }
            let t = a.theta.ok_or_else(|| CliError::Usage("--sweep mp needs --theta".into()))?;
            a.j.projections().map(|mp| (mp, angle(t, a.degrees))).collect()
        }
    };
    let queries = points
        .into_iter()
        .map(|(mp, t)| WigdQuery::new(a.j, mp, a.m, t).map_err(usage))
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["theta", "mp", "region"];
    header.extend(a.methods.iter().map(|m| match m {
        WigdMethod::Exact => "exact",
        WigdMethod::Wkb => "wkb",
        WigdMethod::Asymptotic => "asymptotic",
    }));
    let mut table = Table::new(&header);
    for q in &queries {
        let region = if r_classifier(q) > 0.0 { "allowed" } else { "forbidden" };
        let mut row = vec![sig12(q.theta), sig12(q.mp.value()), region.to_string()];
        for m in &a.methods {
            row.push(match m {
                WigdMethod::Exact => cell(wigner_d_exact(q.j, q.mp, q.m, q.theta)),
                WigdMethod::Wkb => cell(wigd_wkb(q)),
                WigdMethod::Asymptotic => cell(wigd_asymptotic(q)),
            });
        }
        table.push(row);
    }
    emit(&table, a.out.as_deref(), &stamp(RunManifest::new("wigd", a.parameters()), t0))
}

impl PacketArgs {
    fn parameters(&self) -> Vec<(&'static str, String)> {
        let mut p = vec![
            ("j", self.j.to_string()),
            ("m", self.m.to_string()),
            ("dj", self.dj.to_string()),
            ("dm", self.dm.to_string()),
        ];
        if let Some(c) = self.j_cut {
            p.push(("j-cut", c.to_string()));
        }
        p
    }

    fn spec(&self) -> Result<WavepacketSpec, CliError> {
        let s = WavepacketSpec::new(self.j, self.m, self.dj, self.dm).map_err(usage)?;
        match self.j_cut {
            Some(c) => s.with_cut(c).map_err(usage),
            None => Ok(s),
        }
    }
}

impl WavepacketArgs {
    pub fn parameters(&self) -> Vec<(&'static str, String)> {
        let mut p = self.packet.parameters();
        p.push(("distribution", name(&self.distribution)));
        if let Some(r) = &self.report {
            p.push(("report", name(r)));
        }
        if let Some(o) = &self.out {
            p.push(("out", o.display().to_string()));
        }
        p
    }
}

pub fn cmd_wavepacket(a: &WavepacketArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let spec = a.packet.spec()?;
    let needs_particle = a.distribution == Distribution::Particle || a.report.is_some();
    if needs_particle && !spec.j_center.is_integer() {
        return Err(CliError::Usage("particle density needs integer --j".into()));
    }
    let (grid, env) = grid_from_env()?;
    let packet = build_j_wavepacket(&spec)?;
    let particle = if needs_particle { Some(particle_density(&packet, &grid)?) } else { None };
    let shown = match a.distribution {
        Distribution::Particle => particle.clone().expect("computed above"),
        Distribution::Q => q_distribution(&packet, &grid)?,
    };
    let mut manifest = RunManifest::new("wavepacket", a.parameters());
    manifest.environment = env;
    if let Some(Report::Widths) = a.report {
        let r = uncertainty_report(&spec, &packet, particle.as_ref().expect("computed above"))?;
        println!("{}", serde_json::to_string_pretty(&r)?);
        if a.out.is_none() {
            return Ok(());
        }
    }
    emit(&density_table(&shown), a.out.as_deref(), &stamp(manifest, t0))
}

impl PrecessArgs {
    pub fn parameters(&self) -> Vec<(&'static str, String)> {
        let mut p = self.packet.parameters();
        p.push(("omega", self.omega.to_string()));
        p.push(("samples", self.samples.to_string()));
        if let Some(t) = self.t_max {
            p.push(("t-max", t.to_string()));
        }
        if let (Some(t), Some(f)) = (self.field_theta, self.field_phi) {
            p.push(("field-theta", t.to_string()));
            p.push(("field-phi", f.to_string()));
        }
        if self.degrees {
            p.push(("degrees", "true".into()));
        }
        if let Some(o) = &self.out {
            p.push(("out", o.display().to_string()));
        }
        if let Some(d) = &self.frames_dir {
            p.push(("frames-dir", d.display().to_string()));
        }
        p
    }
}

pub fn cmd_precess(a: &PrecessArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let spec = a.packet.spec()?;
    if !spec.j_center.is_integer() {
        return Err(CliError::Usage("precess tracks the particle density and needs integer --j".into()));
    }
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let t_max = match a.t_max {
        Some(t) => t,
        None if a.omega > 0.0 => TAU / a.omega,
        None => return Err(CliError::Usage("--t-max is required when --omega is 0".into())),
    };
    let times: Vec<f64> = if a.samples == 1 {
        vec![0.0]
    } else {
        (0..a.samples).map(|k| t_max * k as f64 / (a.samples - 1) as f64).collect()
    };
    let config = match (a.field_theta, a.field_phi) {
        (Some(t), Some(f)) => {
            let axis = direction(angle(t, a.degrees), angle(f, a.degrees));
            PrecessionConfig::with_axis(spec, a.omega, times, axis)
        }
        _ => PrecessionConfig::new(spec, a.omega, times),
    }
    .map_err(usage)?;
    let (grid, env) = if a.frames_dir.is_some() { grid_from_env()? } else { (SphereGrid::default(), BTreeMap::new()) };
    let trace = track_rotation(&config)?;
    let mut table = Table::new(&["t", "j_azimuth", "particle_azimuth"]);
    for ((t, j), p) in trace.times.iter().zip(&trace.j_azimuth).zip(&trace.particle_azimuth) {
        table.push(vec![sig12(*t), sig12(*j), sig12(*p)]);
    }
    let mut manifest = RunManifest::new("precess", a.parameters());
    manifest.environment = env;
    if let Some(dir) = &a.frames_dir {
        fs::create_dir_all(dir)?;
        for (k, f) in evolve(&config)?.iter().enumerate() {
            let d = particle_density_amps(&f.to_lab()?, &grid)?;
            let path = dir.join(format!("frame_{k:04}.csv"));
            emit(&density_table(&d), Some(Path::new(&path)), &stamp(manifest.clone(), t0))?;
        }
    }
    emit(&table, a.out.as_deref(), &stamp(manifest, t0))
}

pub fn cmd_correlate(a: &CorrelateArgs) -> Result<(), CliError> {
    let input = CorrelationInput::new(a.j1, a.j2, a.j3, a.m3).map_err(usage)?;
    if a.quadrature < MIN_QUADRATURE {
        return Err(CliError::Usage(format!("--quadrature must be at least {MIN_QUADRATURE}")));
    }
    let vm = mstate_correlation_vm(&input, a.quadrature)?;
    let closed = mstate_correlation_closed(&input)?;
    let exact = pairwise_xx_expectation(a.j1, a.j2, a.j3, a.m3)?;
    let mut terms = Vec::new();
    for m1 in input.m1_range() {
        let c = cos_phi12(&input, m1).ok();
        terms.push(json!({
            "m1": m1.to_string(),
            "m2": (a.m3 - m1).to_string(),
            "weight": input.weight(m1)?,
            "cos_phi12": c.map(|c| c.value),
            "out_of_range": c.map(|c| c.out_of_range),
        }));
    }
    let out = json!({
        "j1": a.j1.to_string(),
        "j2": a.j2.to_string(),
        "j3": a.j3.to_string(),
        "m3": a.m3.to_string(),
        "quadrature": a.quadrature,
        "vm": vm,
        "closed": closed,
        "exact": exact,
        "terms": terms,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let criteria = suites::lookup(&a.suite).ok_or_else(|| {
        CliError::Usage(format!("unknown suite {:?}; choose from {}", a.suite, suites::suite_names().join(", ")))
    })?;
    let mut failed = 0;
    for c in criteria {
        for k in (c.run)() {
            if !k.pass {
                failed += 1;
            }
            println!("{:<4} {:<24} {} {}", c.id, k.name, if k.pass { "PASS" } else { "FAIL" }, k.detail);
        }
    }
    if failed > 0 {
        return Err(CliError::Check(format!("{failed} checks failed")));
    }
    Ok(())
}
