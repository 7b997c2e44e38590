//! classify, smile, skew and surface subcommands.

use atslab_core::model::{SigmaLimit, SkewLimit, Violation};
use atslab_core::vol_surface::{
    atm_vol, default_fd_step, skew_surface, skew_term_given_atm, skew_term_fd, smile_point, SurfaceRow,
};
use atslab_core::{AtsParams, RegimeCase};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{emit, render_csv, render_json, Cell};

/// Slack for the monotonicity flags of the surface.
pub const MONOTONE_TOLERANCE: f64 = 1e-6;

/// Rejects inadmissible parameters, except for δ lying exactly on its lower
/// boundary, where prices and skews are still well defined; that case only
/// warns.
pub fn require_admissible(params: &AtsParams) -> Result<(), CliError> {
    let mut report = params.validate();
    let before = report.violations.len();
    report
        .violations
        .retain(|v| !matches!(v, Violation::DeltaTooNegative { delta, lower } if delta == lower));
    if !report.is_ok() {
        return Err(CliError::Inadmissible(report));
    }
    if report.violations.len() < before {
        eprintln!("atslab: warning: delta = {} lies on the boundary of the admissible region", params.delta);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ClassifyReport<'a> {
    params: &'a AtsParams,
    admissible: bool,
    case: &'static str,
    description: String,
    sigma0: SigmaLimit,
    xi0: SkewLimit,
    violations: &'a [Violation],
}

pub fn classify(cfg: &RunConfig) -> Result<(), CliError> {
    let report = cfg.params.validate();
    let case = cfg.params.classify();
    let text = match cfg.format {
        Format::Json => render_json(&ClassifyReport {
            params: &cfg.params,
            admissible: report.is_ok(),
            case: case.tag(),
            description: case.to_string(),
            sigma0: case.predicted_sigma0(),
            xi0: case.predicted_xi0(),
            violations: &report.violations,
        })?,
        Format::Csv => format!("{case}\n"),
    };
    emit(&text, cfg.out.as_deref())?;
    if case == RegimeCase::Inadmissible {
        return Err(CliError::Inadmissible(report));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SmileRow {
    t: f64,
    y: f64,
    price: Option<f64>,
    implied_vol: Option<f64>,
    achieved_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn num(x: Option<f64>) -> Cell {
    x.map_or(Cell::Empty, Cell::Num)
}

pub fn smile(cfg: &RunConfig) -> Result<(), CliError> {
    require_admissible(&cfg.params)?;
    let grid: Vec<(f64, f64)> = cfg.t.iter().flat_map(|&t| cfg.y.iter().map(move |&y| (t, y))).collect();
    let rows: Vec<SmileRow> = grid
        .par_iter()
        .map(|&(t, y)| match smile_point(t, y, &cfg.params) {
            Ok(p) => SmileRow {
                t,
                y,
                price: Some(p.price),
                implied_vol: Some(p.implied_vol),
                achieved_tol: Some(p.achieved_tol),
                error: None,
            },
            Err(e) => SmileRow {
                t,
                y,
                price: None,
                implied_vol: None,
                achieved_tol: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let text = match cfg.format {
        Format::Json => render_json(&rows)?,
        Format::Csv => {
            let failed = rows.iter().any(|r| r.error.is_some());
            let mut header = vec!["t", "y", "price", "implied_vol", "achieved_tol"];
            if failed {
                header.push("error");
            }
            let cells: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| {
                    let mut row = vec![
                        Cell::Num(r.t),
                        Cell::Num(r.y),
                        num(r.price),
                        num(r.implied_vol),
                        num(r.achieved_tol),
                    ];
                    if failed {
                        row.push(r.error.clone().map_or(Cell::Empty, Cell::Text));
                    }
                    row
                })
                .collect();
            render_csv(&header, &cells)
        }
    };
    emit(&text, cfg.out.as_deref())
}

#[derive(Debug, Serialize)]
struct SkewRow {
    t: f64,
    atm_vol: Option<f64>,
    skew_closed: Option<f64>,
    skew_fd: Option<f64>,
    skew_x_units: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn skew_row(t: f64, cfg: &RunConfig) -> SkewRow {
    let h = cfg.fd_step.unwrap_or_else(|| default_fd_step(t));
    let run = || -> atslab_core::Result<(f64, f64, f64)> {
        let atm = atm_vol(t, &cfg.params)?;
        let closed = skew_term_given_atm(t, atm, &cfg.params)?;
        let fd = skew_term_fd(t, &cfg.params, h)?;
        Ok((atm, closed, fd))
    };
    match run() {
        Ok((atm, closed, fd)) => SkewRow {
            t,
            atm_vol: Some(atm),
            skew_closed: Some(closed),
            skew_fd: Some(fd),
            skew_x_units: Some(closed / t.sqrt()),
            error: None,
        },
        Err(e) => SkewRow {
            t,
            atm_vol: None,
            skew_closed: None,
            skew_fd: None,
            skew_x_units: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn skew(cfg: &RunConfig) -> Result<(), CliError> {
    require_admissible(&cfg.params)?;
    let rows: Vec<SkewRow> = cfg.t.par_iter().map(|&t| skew_row(t, cfg)).collect();
    let text = match cfg.format {
        Format::Json => render_json(&rows)?,
        Format::Csv => {
            let failed = rows.iter().any(|r| r.error.is_some());
            let mut header = vec!["t", "atm_vol", "skew_closed", "skew_fd", "skew_x_units"];
            if failed {
                header.push("error");
            }
            let cells: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| {
                    let mut row = vec![
                        Cell::Num(r.t),
                        num(r.atm_vol),
                        num(r.skew_closed),
                        num(r.skew_fd),
                        num(r.skew_x_units),
                    ];
                    if failed {
                        row.push(r.error.clone().map_or(Cell::Empty, Cell::Text));
                    }
                    row
                })
                .collect();
            render_csv(&header, &cells)
        }
    };
    emit(&text, cfg.out.as_deref())
}

/// A surface row with its local monotonicity flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlaggedRow {
    #[serde(flatten)]
    pub row: SurfaceRow,
    /// ξ̂₀ does not rise at the next k̄ on the grid.
    pub monotone_k: bool,
    /// ξ̂₀ does not rise at the next σ̄η̄ on the grid.
    pub monotone_se: bool,
}

/// Rows come in α, k̄, σ̄η̄ nesting order.
pub fn flag_surface(rows: &[SurfaceRow], n_k: usize, n_se: usize) -> Vec<FlaggedRow> {
    let block = n_k * n_se;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let within = i % block;
            let (ik, ise) = (within / n_se, within % n_se);
            let monotone_k = ik + 1 == n_k || rows[i + n_se].xi0 <= r.xi0 + MONOTONE_TOLERANCE;
            let monotone_se = ise + 1 == n_se || rows[i + 1].xi0 <= r.xi0 + MONOTONE_TOLERANCE;
            FlaggedRow {
                row: *r,
                monotone_k,
                monotone_se,
            }
        })
        .collect()
}

pub fn surface(cfg: &RunConfig) -> Result<(), CliError> {
    let rows = skew_surface(&cfg.alphas, &cfg.k_grid, &cfg.se_grid)?;
    let flagged = flag_surface(&rows, cfg.k_grid.len(), cfg.se_grid.len());
    let text = match cfg.format {
        Format::Json => render_json(&flagged)?,
        Format::Csv => {
            let cells: Vec<Vec<Cell>> = flagged
                .iter()
                .map(|f| {
                    vec![
                        Cell::Num(f.row.alpha),
                        Cell::Num(f.row.k_bar),
                        Cell::Num(f.row.sigma_eta),
                        Cell::Num(f.row.xi0),
                        Cell::Bool(f.monotone_k),
                        Cell::Bool(f.monotone_se),
                    ]
                })
                .collect();
            render_csv(
                &["alpha", "k_bar", "sigma_eta", "xi0", "monotone_k", "monotone_se"],
                &cells,
            )
        }
    };
    emit(&text, cfg.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: f64, se: f64, xi0: f64) -> SurfaceRow {
        SurfaceRow {
            alpha: 0.0,
            k_bar: k,
            sigma_eta: se,
            xi0,
        }
    }

    #[test]
    fn flags_follow_grid_neighbours() {
        // 2 × 2 grid; the (k=1, se=2) point rises along k.
        let rows = vec![row(1.0, 1.0, -0.1), row(1.0, 2.0, -0.3), row(2.0, 1.0, -0.2), row(2.0, 2.0, -0.25)];
        let f = flag_surface(&rows, 2, 2);
        assert!(f[0].monotone_k && f[0].monotone_se);
        assert!(!f[1].monotone_k && f[1].monotone_se);
        assert!(f[2].monotone_k && f[2].monotone_se);
        assert!(f[3].monotone_k && f[3].monotone_se);
    }
}
