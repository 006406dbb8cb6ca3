//! CSV artifacts: per-step episode traces and the training iteration log.
//!
//! Floats are rendered with Rust's shortest round-trip formatting, so parsing
//! a written value back yields the identical bits. Every artifact starts with
//! comment lines embedding the seed and the configuration hash.

use std::io::{self, Write};

use crate::search::{IterationEvent, RolloutRecord};

/// Render a float so that parsing it back is exact.
pub fn render_f64(value: f64) -> String {
    format!("{value}")
}

/// Fixed column contract of an episode trace:
/// `t,x,x_dot,phi,phi_dot,<one column per neuron in declaration order>,action,reward`.
/// Row 0 is the initial condition; row `i` is the state after step `i`.
pub fn write_trace_csv(
    w: &mut impl Write,
    seed: u64,
    config_hash: &str,
    neuron_names: &[&str],
    env_dt: f64,
    records: &[RolloutRecord],
) -> io::Result<()> {
    writeln!(w, "# seed = {seed}")?;
    writeln!(w, "# config_sha256 = {config_hash}")?;
    write!(w, "t,x,x_dot,phi,phi_dot")?;
    for name in neuron_names {
        write!(w, ",{name}")?;
    }
    writeln!(w, ",action,reward")?;
    for (i, r) in records.iter().enumerate() {
        let t = i as f64 * env_dt;
        write!(
            w,
            "{},{},{},{},{}",
            render_f64(t),
            render_f64(r.env.x),
            render_f64(r.env.x_dot),
            render_f64(r.env.phi),
            render_f64(r.env.phi_dot)
        )?;
        for &v in &r.potentials {
            write!(w, ",{}", render_f64(v))?;
        }
        writeln!(w, ",{},{}", render_f64(r.action), render_f64(r.reward))?;
    }
    Ok(())
}

/// Append-only training log. One row per iteration; `wall_clock_s` is the
/// only non-deterministic column (elapsed time is not reproducible), so
/// byte-level comparisons of two runs should strip it.
pub struct IterationLogWriter<W: Write> {
    w: W,
}

impl<W: Write> IterationLogWriter<W> {
    pub fn new(
        mut w: W,
        seed: u64,
        config_hash: &str,
        episodes_per_estimate: usize,
        k_worst: usize,
        reuse_limit: u32,
        perturbation_scale: f64,
    ) -> io::Result<Self> {
        writeln!(w, "# seed = {seed}")?;
        writeln!(w, "# config_sha256 = {config_hash}")?;
        writeln!(
            w,
            "# episodes_per_estimate = {episodes_per_estimate}, k_worst = {k_worst}, \
             reuse_limit = {reuse_limit}, perturbation_scale = {}",
            render_f64(perturbation_scale)
        )?;
        writeln!(w, "iteration,candidate_f,incumbent_f,accepted,reevaluated,wall_clock_s")?;
        Ok(Self { w })
    }

    /// Continue an existing log without rewriting headers.
    pub fn append(w: W) -> Self {
        Self { w }
    }

    pub fn write(&mut self, event: &IterationEvent, wall_clock_s: f64) -> io::Result<()> {
        writeln!(
            self.w,
            "{},{},{},{},{},{:.3}",
            event.iteration,
            render_f64(event.candidate_f),
            render_f64(event.incumbent_f),
            event.accepted,
            event.reevaluated,
            wall_clock_s
        )
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.w.flush()
    }

    pub fn into_inner(self) -> W {
        self.w
    }
}

/// Render one iteration-log row without the wall-clock column; the
/// deterministic projection used by reproducibility checks.
pub fn render_event_deterministic(event: &IterationEvent) -> String {
    format!(
        "{},{},{},{},{}",
        event.iteration,
        render_f64(event.candidate_f),
        render_f64(event.incumbent_f),
        event.accepted,
        event.reevaluated
    )
}

/// Strip comment headers and the trailing wall-clock column from a log text,
/// leaving only its deterministic content.
pub fn deterministic_log_view(text: &str) -> Vec<String> {
    text.lines()
        .filter(|line| !line.starts_with('#') && !line.is_empty())
        .map(|line| match line.rsplit_once(',') {
            Some((rest, _wall)) => rest.to_string(),
            None => line.to_string(),
        })
        .collect()
}
