//! CSV and binary exporters. Floats are written with 17 significant digits
//! so that values round-trip exactly.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fd::SimulationResult;
use crate::modal::{ControlSignal, ModalState, ModalTrajectory};
use crate::nonlinear::IterationRecord;
use crate::observability::ObservabilityReport;
use crate::scalar::Real;
use crate::spectral::{Spectrum, TransformData};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn f<T: Real>(x: T) -> String {
    fmt_f64(x.to_f64_lossy())
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

/// `n, lambda, omega, dphi_l, tflux_l, sign_product`.
pub fn write_spectrum<T: Real, W: Write>(w: W, spec: &Spectrum<T>) -> Result<()> {
    let mut out = writer(w, &["n", "lambda", "omega", "dphi_l", "tflux_l", "sign_product"])?;
    for p in spec.pairs() {
        out.write_record([
            p.index.to_string(),
            f(p.lambda),
            f(p.omega),
            f(p.dphi_l),
            f(p.tflux_l),
            f(p.sign_product()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `x, phi` for mode `n` (1-based) on the full grid.
pub fn write_eigenfunction<T: Real, W: Write>(w: W, spec: &Spectrum<T>, n: usize) -> Result<()> {
    if n == 0 || n > spec.len() {
        return Err(Error::InvalidArgument(format!(
            "mode {n} outside 1..={}",
            spec.len()
        )));
    }
    let grid = spec.grid();
    let mut out = writer(w, &["x", "phi"])?;
    for (j, v) in spec.mode(n).phi.iter().enumerate() {
        out.write_record([f(grid.node(j)), f(*v)])?;
    }
    out.flush()?;
    Ok(())
}

/// `n, a_n, b_n`.
pub fn write_state<T: Real, W: Write>(w: W, state: &ModalState<T>) -> Result<()> {
    let mut out = writer(w, &["n", "a_n", "b_n"])?;
    for (i, (a, b)) in state.a.iter().zip(&state.b).enumerate() {
        out.write_record([(i + 1).to_string(), f(*a), f(*b)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the format of [`write_state`]; rows must list `n = 1, 2, ...` in order.
pub fn read_state<T: Real, R: Read>(r: R) -> Result<ModalState<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "a_n", "b_n"] {
        return Err(Error::Parse(format!(
            "state CSV header must be n,a_n,b_n, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))
        };
        let n: usize = rec[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
        if n != row + 1 {
            return Err(Error::Parse(format!("row {} has n = {n}", row + 1)));
        }
        a.push(T::lit(field(1)?));
        b.push(T::lit(field(2)?));
    }
    ModalState::new(a, b)
}

/// `t, yx_l` of a modal trajectory.
pub fn write_modal_trace<T: Real, W: Write>(w: W, traj: &ModalTrajectory<T>) -> Result<()> {
    let mut out = writer(w, &["t", "yx_l"])?;
    for (t, y) in traj.t.iter().zip(&traj.trace) {
        out.write_record([f(*t), f(*y)])?;
    }
    out.flush()?;
    Ok(())
}

/// Long format `t, x, y`, one row per snapshot and node.
pub fn write_snapshots<T: Real, W: Write>(w: W, sim: &SimulationResult<T>) -> Result<()> {
    let mut out = writer(w, &["t", "x", "y"])?;
    let h = sim.spacing();
    for (t, row) in sim.t.iter().zip(&sim.y) {
        for (j, y) in row.iter().enumerate() {
            out.write_record([f(*t), f(T::from_usize(j).expect("index fits") * h), f(*y)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Binary snapshot dump, little endian: `u64 m`, `f64 dt`, `f64 T`, then one
/// row of `m + 2` `f64` values `[t, y_0, ..., y_m]` per snapshot.
pub fn write_snapshots_binary<T: Real, W: Write>(mut w: W, sim: &SimulationResult<T>) -> Result<()> {
    let m = sim.y.first().map_or(0, |r| r.len().saturating_sub(1)) as u64;
    let horizon = sim.step_t.last().copied().unwrap_or_else(T::zero);
    w.write_all(&m.to_le_bytes())?;
    w.write_all(&sim.dt.to_f64_lossy().to_le_bytes())?;
    w.write_all(&horizon.to_f64_lossy().to_le_bytes())?;
    for (t, row) in sim.t.iter().zip(&sim.y) {
        w.write_all(&t.to_f64_lossy().to_le_bytes())?;
        for y in row {
            w.write_all(&y.to_f64_lossy().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t, yx_l, u` for every FD step.
pub fn write_fd_trace<T: Real, W: Write>(w: W, sim: &SimulationResult<T>) -> Result<()> {
    let mut out = writer(w, &["t", "yx_l", "u"])?;
    for ((t, y), u) in sim.step_t.iter().zip(&sim.trace).zip(&sim.u) {
        out.write_record([f(*t), f(*y), f(*u)])?;
    }
    out.flush()?;
    Ok(())
}

/// `x, h, dh, s` of a Leighton-Nehari transform.
pub fn write_transform<T: Real, W: Write>(w: W, t: &TransformData<T>) -> Result<()> {
    let mut out = writer(w, &["x", "h", "dh", "s"])?;
    for j in 0..t.x.len() {
        out.write_record([f(t.x[j]), f(t.h[j]), f(t.dh[j]), f(t.s[j])])?;
    }
    out.flush()?;
    Ok(())
}

/// `trial, norm, observed, ratio`.
pub fn write_observability<T: Real, W: Write>(w: W, report: &ObservabilityReport<T>) -> Result<()> {
    let mut out = writer(w, &["trial", "norm", "observed", "ratio"])?;
    for t in &report.trials {
        out.write_record([t.trial.to_string(), f(t.norm), f(t.observed), f(t.ratio)])?;
    }
    out.flush()?;
    Ok(())
}

/// `t, u`.
pub fn write_control<T: Real, W: Write>(w: W, u: &ControlSignal<T>) -> Result<()> {
    let mut out = writer(w, &["t", "u"])?;
    for (k, v) in u.samples().iter().enumerate() {
        out.write_record([f(u.time(k)), f(*v)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the format of [`write_control`]. Samples must start at `t = 0` and
/// be uniformly spaced.
pub fn read_control<T: Real, R: Read>(r: R) -> Result<ControlSignal<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["t", "u"] {
        return Err(Error::Parse("control CSV header must be t,u".into()));
    }
    let (mut t, mut u) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))
        };
        t.push(parse(0)?);
        u.push(T::lit(parse(1)?));
    }
    let (first, last) = match (t.first(), t.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Parse("control CSV has no rows".into())),
    };
    let dt = (last - first) / (t.len().max(2) - 1) as f64;
    let uniform = first == 0.0
        && t.iter()
            .enumerate()
            .all(|(k, tk)| (tk - k as f64 * dt).abs() <= 1e-9 * last.abs().max(1.0));
    if !uniform {
        return Err(Error::Parse(
            "control samples must be uniform and start at t = 0".into(),
        ));
    }
    ControlSignal::new(T::lit(last), u)
}

/// `k, distance, ratio, u_l2, u_h1`; the ratio of the first iterate is empty.
pub fn write_iteration_log<T: Real, W: Write>(w: W, log: &[IterationRecord<T>]) -> Result<()> {
    let mut out = writer(w, &["k", "distance", "ratio", "u_l2", "u_h1"])?;
    for r in log {
        out.write_record([
            r.k.to_string(),
            f(r.distance),
            r.ratio.map(f).unwrap_or_default(),
            f(r.u_l2),
            f(r.u_h1),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_round_trip_is_exact() {
        let s = ModalState::new(vec![0.1f64, -1.0 / 3.0, 1e-300], vec![2.0, std::f64::consts::PI, -0.0]).unwrap();
        let mut buf = Vec::new();
        write_state(&mut buf, &s).unwrap();
        let back: ModalState<f64> = read_state(buf.as_slice()).unwrap();
        assert_eq!(back.a, s.a);
        assert_eq!(back.b, s.b);
    }

    #[test]
    fn state_reader_rejects_bad_input() {
        assert!(read_state::<f64, _>("n,a,b\n1,0,0\n".as_bytes()).is_err());
        assert!(read_state::<f64, _>("n,a_n,b_n\n2,0,0\n".as_bytes()).is_err());
        assert!(read_state::<f64, _>("n,a_n,b_n\n1,x,0\n".as_bytes()).is_err());
    }

    #[test]
    fn control_csv_layout() {
        let u = ControlSignal::from_fn(1.0, 65, |t: f64| t).unwrap();
        let mut buf = Vec::new();
        write_control(&mut buf, &u).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,u"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,0.0000000000000000e0"));
        assert_eq!(text.lines().count(), 66);
        let back: ControlSignal<f64> = read_control(text.as_bytes()).unwrap();
        assert_eq!(back.samples(), u.samples());
        assert!(read_control::<f64, _>("t,u\n0,1\n0.5,1\n2,1\n".as_bytes()).is_err());
    }
}
