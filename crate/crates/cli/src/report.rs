//! Markdown summary of whatever stage outputs exist.

use crate::error::PipelineError;
use crate::pipeline::*;
use std::fmt::Write;

fn opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.digits$}"),
        _ => "-".into(),
    }
}

pub fn render(ws: &Workspace) -> Result<String, PipelineError> {
    let r = &ws.resolved;
    let c = &r.config;
    let mut s = String::new();
    let w = |s: &mut String, line: String| {
        s.push_str(&line);
        s.push('\n');
    };
    w(&mut s, format!("# {}", c.name));
    w(&mut s, String::new());
    w(&mut s, "| Parameter | Value |".into());
    w(&mut s, "|---|---|".into());
    w(&mut s, format!("| Mode | {} |", r.plan.geom.mode));
    w(&mut s, format!("| Incidence | {:.2} deg |", r.plan.geom.center_incidence));
    w(&mut s, format!("| Range bandwidth | {:.1} MHz |", r.plan.chirp.bandwidth / 1e6));
    w(&mut s, format!("| PRF | {:.1} Hz |", r.plan.prf));
    w(&mut s, format!("| Processed Doppler bandwidth | {:.1} Hz |", r.focus.processed_doppler_bandwidth));
    w(&mut s, format!("| Duration | {:.3} s |", r.plan.stop - r.plan.start));
    w(&mut s, format!("| Targets | {} |", c.target_count()));
    w(&mut s, format!("| Seed | {} |", c.seed));

    if let Some(q) = ws.read_optional::<QualityFile>(QUALITY)? {
        w(&mut s, String::new());
        w(&mut s, "## Impulse response".into());
        w(&mut s, String::new());
        if let Some(st) = &q.statistics {
            w(&mut s, "```".into());
            s.push_str(&st.to_table());
            w(&mut s, "```".into());
            w(&mut s, String::new());
        }
        w(&mut s, "| # | Rg PSLR | Az PSLR | Rg ISLR | Az ISLR | Rg res [m] | Az res [m] | Note |".into());
        w(&mut s, "|---|---|---|---|---|---|---|---|".into());
        for t in &q.targets {
            let rp = t.report;
            w(
                &mut s,
                format!(
                    "| {} | {} | {} | {} | {} | {} | {} | {} |",
                    t.index,
                    opt(rp.map(|x| x.pslr_range), 2),
                    opt(rp.map(|x| x.pslr_azimuth), 2),
                    opt(rp.map(|x| x.islr_range), 2),
                    opt(rp.map(|x| x.islr_azimuth), 2),
                    opt(rp.map(|x| x.resolution_range), 3),
                    opt(rp.map(|x| x.resolution_azimuth), 3),
                    t.error.as_deref().unwrap_or(""),
                ),
            );
        }
    }

    if let Some(cal) = ws.read_optional::<CalibrationFile>(CALIBRATION)? {
        w(&mut s, String::new());
        w(&mut s, "## Calibration".into());
        w(&mut s, String::new());
        let _ = writeln!(s, "- design constant {:.6e}", cal.design_constant);
        let _ = writeln!(s, "- estimated constant {:.6e} ({:+.3} dB)", cal.estimated_constant, cal.error_db);
        let _ = writeln!(s, "- reflector spread {:.3} dB, relative accuracy {:.3} dB", cal.residual_std_db, cal.relative_accuracy_db);
    }

    if let Some(n) = ws.read_optional::<NeszFile>(NESZ)? {
        w(&mut s, String::new());
        w(&mut s, "## Noise".into());
        w(&mut s, String::new());
        let _ = writeln!(
            s,
            "- NESZ {:.2} dB at {:.2} deg over rows {}..{}, columns {}..{} (limit {SPEC_LIMIT_DB} dB)",
            n.nesz_db, n.incidence_deg, n.region[0], n.region[1], n.region[2], n.region[3]
        );
    }

    if let Some(a) = ws.read_optional::<AmbiguityFile>(AMBIGUITY)? {
        w(&mut s, String::new());
        w(&mut s, "## Ambiguities".into());
        w(&mut s, String::new());
        let _ = writeln!(s, "- AASR {:.2} dB (simulated {:.2} dB)", a.aasr_db, a.aasr_simulated_db);
        let _ = writeln!(s, "- RASR {:.2} dB", a.rasr_db);
    }
    Ok(s)
}
