//! CSV and snapshot files. Floats carry 17 significant digits, lines end in LF,
//! and every file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qhd_core::solver::{EnergyHistory, FieldState};
use qhd_core::spectral::Grid1D;
use qhd_core::EquilibriumState;

use crate::error::{CliError, CliResult};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    columns: usize,
    body: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut body = header.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(",");
        body.push('\n');
        Self {
            columns: header.len(),
            body,
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width must match the header");
        let line = values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",");
        self.body.push_str(&line);
        self.body.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.body
    }

    pub fn into_string(self) -> String {
        self.body
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub const HISTORY_HEADER: [&str; 9] = [
    "t",
    "sobolev_rho_sp1",
    "sobolev_m_s",
    "E_s",
    "F_s",
    "Q_s",
    "G_s",
    "mass_defect",
    "momentum_defect",
];

pub fn history_csv(h: &EnergyHistory) -> String {
    let mut csv = Csv::new(&HISTORY_HEADER);
    for i in 0..h.len() {
        csv.row(&[
            h.times[i],
            h.sobolev_rho[i],
            h.sobolev_m[i],
            h.e_s[i],
            h.f_s[i],
            h.q_s[i],
            h.g_s[i],
            h.mass_defect[i],
            h.momentum_defect[i],
        ]);
    }
    csv.into_string()
}

/// Plain-text header `key value` lines followed by `x rho_pert m_pert` rows.
pub fn snapshot_text(eq: &EquilibriumState, state: &FieldState, s: u32) -> String {
    let g = &state.grid;
    let mut out = String::new();
    let header = [
        ("L", g.length()),
        ("N", g.len() as f64),
        ("t", state.t),
        ("gamma", eq.gamma()),
        ("mu", eq.mu()),
        ("k", eq.k()),
        ("rho_star", eq.rho_star),
        ("m_star", eq.m_star),
        ("s", s as f64),
    ];
    for (key, value) in header {
        if key == "N" || key == "s" {
            writeln!(out, "# {key} {}", value as u64).unwrap();
        } else {
            writeln!(out, "# {key} {}", fmt_f64(value)).unwrap();
        }
    }
    for j in 0..g.len() {
        writeln!(
            out,
            "{} {} {}",
            fmt_f64(g.x(j)),
            fmt_f64(state.rho[j]),
            fmt_f64(state.m[j])
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub length: f64,
    pub n: usize,
    pub t: f64,
    pub gamma: f64,
    pub mu: f64,
    pub k: f64,
    pub rho_star: f64,
    pub m_star: f64,
    pub s: u32,
    pub state: FieldState,
}

pub fn parse_snapshot(text: &str) -> CliResult<Snapshot> {
    let mut header = std::collections::HashMap::new();
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let bad = |what: &str| CliError::input(format!("snapshot line {}: {what}", lineno + 1));
        if let Some(rest) = line.strip_prefix("# ") {
            let mut it = rest.split_whitespace();
            let (Some(k), Some(v)) = (it.next(), it.next()) else {
                return Err(bad("malformed header"));
            };
            let v: f64 = v.parse().map_err(|_| bad("header value is not a number"))?;
            header.insert(k.to_string(), v);
        } else if !line.trim().is_empty() {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("row value is not a number"))?;
            if vals.len() != 3 {
                return Err(bad("expected three columns"));
            }
            rows.push((vals[1], vals[2]));
        }
    }
    let get = |k: &str| {
        header
            .get(k)
            .copied()
            .ok_or_else(|| CliError::input(format!("snapshot header misses {k}")))
    };
    let n = get("N")? as usize;
    if rows.len() != n {
        return Err(CliError::input(format!(
            "snapshot has {} rows, header says {n}",
            rows.len()
        )));
    }
    let grid = Grid1D::new(get("L")?, n)?;
    let (rho, m) = rows.into_iter().unzip();
    let t = get("t")?;
    Ok(Snapshot {
        length: get("L")?,
        n,
        t,
        gamma: get("gamma")?,
        mu: get("mu")?,
        k: get("k")?,
        rho_star: get("rho_star")?,
        m_star: get("m_star")?,
        s: get("s")? as u32,
        state: FieldState::new(grid, rho, m, t)?,
    })
}
