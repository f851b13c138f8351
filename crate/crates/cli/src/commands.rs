//! Command dispatch: each run produces its artifact files (written atomically
//! by the main thread) plus a short summary on stdout.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use steklov_core::bounds::{
    bound_basic, bound_const_chain, bound_interval, bound_lp, const_asymptotics,
    stability_report, BoundReport, StabilityReport,
};
use steklov_core::error::{Error, Result};
use steklov_core::families::{blowup_sweep, conformal_check, make_hdelta, saturation_sweep};
use steklov_core::geometry::BaseDomain;
use steklov_core::report::fmt_g12;
use steklov_core::spectrum::{check_kcompk0, steklov_spectrum};

use crate::config::{Command, RunConfig};

pub struct RunOutcome {
    /// False when an asserted (non-observational) verdict failed.
    pub all_passed: bool,
}

/// Write through a temp file and rename, so partial files never appear.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "tmp.{}",
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn apply_tol_override(mut rep: BoundReport, tol: Option<f64>) -> BoundReport {
    if let Some(t) = tol {
        rep.tol = t;
        rep.pass = if rep.strict {
            rep.lhs < rep.rhs + t
        } else {
            rep.lhs <= rep.rhs + t
        };
    }
    rep
}

pub fn run(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir)?;
    let say = |line: String| {
        if !quiet {
            println!("{line}");
        }
    };
    match cfg.command {
        Command::Spectrum => {
            let fiber = cfg.fiber.as_ref().expect("validated");
            let h = cfg.warping.as_ref().expect("validated");
            let spec = steklov_spectrum(&cfg.base, h, fiber, cfg.count, cfg.mesh_n)?;
            let mut buf = Vec::new();
            spec.write_csv(&mut buf)?;
            let path = out_dir.join("spectrum.csv");
            write_atomic(&path, &buf)?;
            let shown: Vec<String> = (0..=cfg.count.min(5))
                .map(|k| fmt_g12(spec.sigma_k(k).unwrap()))
                .collect();
            say(format!(
                "spectrum: sigma_0..{} = [{} ...] (mesh {} elements, tol {:.1e})",
                cfg.count,
                shown.join(", "),
                spec.mesh_n(),
                spec.mesh_tol()
            ));
            say(format!("wrote {}", path.display()));
            Ok(RunOutcome { all_passed: true })
        }

        Command::Bounds => {
            let fiber = cfg.fiber.as_ref().expect("validated");
            let h = cfg.warping.as_ref().expect("validated");
            let mut reports = Vec::new();
            reports.push(apply_tol_override(
                bound_basic(&cfg.base, h, fiber, cfg.k, cfg.mesh_n)?,
                cfg.tolerance,
            ));
            let spec = steklov_spectrum(&cfg.base, h, fiber, cfg.k, cfg.mesh_n)?;
            reports.push(apply_tol_override(
                check_kcompk0(&spec, &cfg.base, h, fiber, cfg.k)?,
                cfg.tolerance,
            ));
            if let Some(c) = cfg.c {
                let chain = bound_const_chain(&cfg.base, h, fiber, cfg.k, c, cfg.mesh_n)?;
                if let Some(note) = &chain.note {
                    say(format!("note: {note}"));
                }
                reports.push(apply_tol_override(chain.first, cfg.tolerance));
                reports.push(apply_tol_override(chain.second, cfg.tolerance));
            }
            if let Some(p) = cfg.p {
                reports.push(apply_tol_override(
                    bound_lp(&cfg.base, h, fiber, cfg.k, p, cfg.mesh_n)?,
                    cfg.tolerance,
                ));
                if let BaseDomain::Interval { length } = cfg.base {
                    let iv = bound_interval(h, fiber, cfg.k, p, length, cfg.mesh_n)?;
                    reports.push(iv.general);
                    if let Some(first) = iv.first {
                        reports.push(first);
                    }
                }
            }
            let all_passed = reports.iter().all(|r| r.pass || r.observational);
            for r in &reports {
                say(format!(
                    "{:<18} k={} lhs={} rhs={} margin={} [{}{}]",
                    r.name,
                    r.k,
                    fmt_g12(r.lhs),
                    fmt_g12(r.rhs),
                    fmt_g12(r.margin),
                    if r.pass { "pass" } else { "fail" },
                    if r.observational { ", observational" } else { "" },
                ));
            }
            let json = serde_json::to_string_pretty(&reports).expect("serializable reports");
            let path = out_dir.join("bounds.json");
            write_atomic(&path, format!("{json}\n").as_bytes())?;
            say(format!("wrote {}", path.display()));
            Ok(RunOutcome { all_passed })
        }

        Command::Asymptotics => {
            let fiber = cfg.fiber.as_ref().expect("validated");
            let rows = const_asymptotics(&cfg.base, fiber, cfg.k, &cfg.c_list, cfg.mesh_n)?;
            let mut buf = String::from("c,c2_sigma,limit,deviation\n");
            for r in &rows {
                buf.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_g12(r.c),
                    fmt_g12(r.c2_sigma),
                    fmt_g12(r.limit),
                    fmt_g12(r.deviation)
                ));
            }
            let path = out_dir.join("sweep.csv");
            write_atomic(&path, buf.as_bytes())?;
            let decreasing = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
            say(format!(
                "asymptotics: C^2 sigma_k -> {} ; final deviation {} ({})",
                fmt_g12(rows[0].limit),
                fmt_g12(rows.last().unwrap().deviation),
                if decreasing { "decreasing" } else { "NOT decreasing" }
            ));
            say(format!("wrote {}", path.display()));
            Ok(RunOutcome { all_passed: decreasing })
        }

        Command::Saturate => {
            let fiber = cfg.fiber.as_ref().expect("validated");
            let table = saturation_sweep(
                &cfg.base,
                fiber,
                cfg.k,
                &cfg.c_list,
                &cfg.delta_list,
                cfg.mesh_n,
            )?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            let path = out_dir.join("sweep.csv");
            write_atomic(&path, &buf)?;
            let tol = cfg.tolerance.unwrap_or(10.0 * table.mesh_tol.max(1e-9));
            let monotone = table.monotone_in_delta(tol);
            let below = table.all_below_ceiling();
            say(format!(
                "saturate: {} cells, peak sigma_{} = {} of ceiling {} ({}, {})",
                table.rows.len(),
                cfg.k,
                fmt_g12(table.rows.iter().map(|r| r.sigma_k).fold(0.0, f64::max)),
                fmt_g12(table.rows[0].ceiling),
                if monotone { "monotone in delta" } else { "NOT monotone" },
                if below { "all below ceiling" } else { "ceiling VIOLATED" },
            ));
            say(format!("wrote {}", path.display()));
            Ok(RunOutcome { all_passed: monotone && below })
        }

        Command::Blowup => {
            let fiber = cfg.fiber.as_ref().expect("validated");
            let p = cfg.p.expect("validated");
            let table = blowup_sweep(&cfg.base, fiber, p, cfg.budget, &cfg.eps_list, cfg.floor, cfg.mesh_n)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            let path = out_dir.join("sweep.csv");
            write_atomic(&path, &buf)?;
            let within = table.within_budget();
            let growth = table.growth_factors();
            say(format!(
                "blowup: sigma_1 {} -> {} over {} members; growth factors {:?} ({})",
                fmt_g12(table.rows.first().unwrap().sigma_1),
                fmt_g12(table.rows.last().unwrap().sigma_1),
                table.rows.len(),
                growth.iter().map(|g| (g * 100.0).round() / 100.0).collect::<Vec<_>>(),
                if within { "p-budget certified" } else { "p-budget EXCEEDED" },
            ));
            say(format!("wrote {}", path.display()));
            Ok(RunOutcome { all_passed: within })
        }

        Command::Stability => {
            let fiber = cfg.fiber.as_ref().expect("validated");
            let (q, r) = (cfg.q.expect("validated"), cfg.r.expect("validated"));
            let mut rows: Vec<(Option<f64>, StabilityReport)> = Vec::new();
            if cfg.delta_list.is_empty() {
                let h = cfg.warping.as_ref().expect("validated");
                rows.push((None, stability_report(&cfg.base, h, fiber, cfg.k, q, r, cfg.mesh_n)?));
            } else {
                let c = cfg.c.expect("validated");
                for &delta in &cfg.delta_list {
                    let h = make_hdelta(&cfg.base, c, delta)?;
                    rows.push((
                        Some(delta),
                        stability_report(&cfg.base, &h, fiber, cfg.k, q, r, cfg.mesh_n)?,
                    ));
                }
            }
            let mut buf = String::from("delta,q,r,sigma_k,ceiling,deficit,lhs,rhs,verdict\n");
            for (delta, rep) in &rows {
                buf.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    delta.map(fmt_g12).unwrap_or_default(),
                    fmt_g12(rep.q),
                    fmt_g12(rep.r),
                    fmt_g12(rep.sigma_k),
                    fmt_g12(rep.ceiling),
                    fmt_g12(rep.delta),
                    fmt_g12(rep.lhs),
                    fmt_g12(rep.rhs),
                    if rep.pass { "pass" } else { "fail" }
                ));
            }
            let path = out_dir.join("sweep.csv");
            write_atomic(&path, buf.as_bytes())?;
            let all_passed = rows.iter().all(|(_, r)| r.pass);
            say(format!(
                "stability: {} member(s), deficits {} -> {}, {}",
                rows.len(),
                fmt_g12(rows.first().unwrap().1.delta),
                fmt_g12(rows.last().unwrap().1.delta),
                if all_passed { "all pass" } else { "FAILURES present" }
            ));
            say(format!("wrote {}", path.display()));
            Ok(RunOutcome { all_passed })
        }

        Command::Conformal => {
            let h = cfg.warping.as_ref().expect("validated");
            let BaseDomain::Interval { length } = cfg.base else {
                return Err(Error::HypothesisViolated("conformal check needs an interval".into()));
            };
            let rep = conformal_check(length, h, cfg.count, cfg.mesh_n)?;
            let mut buf = Vec::new();
            rep.write_csv(&mut buf)?;
            let path = out_dir.join("sweep.csv");
            write_atomic(&path, &buf)?;
            let tol = cfg.tolerance.unwrap_or(1e-4);
            let pass = rep.max_rel_diff <= tol;
            say(format!(
                "conformal: t(L) = {}, spectra agree to {} (tol {:.0e}) -> {}",
                fmt_g12(rep.t_length),
                fmt_g12(rep.max_rel_diff),
                tol,
                if pass { "pass" } else { "fail" }
            ));
            say(format!("wrote {}", path.display()));
            Ok(RunOutcome { all_passed: pass })
        }
    }
}
