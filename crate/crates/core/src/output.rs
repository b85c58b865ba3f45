//! Plain-text output: fixed-precision numbers and trajectory CSV.

use std::io::{self, Write};

use crate::dynamics::{Amplitudes, Trajectory};

/// Twelve significant digits in scientific notation; `nan`/`inf` spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn trajectory_header(traj: &Trajectory) -> &'static str {
    match traj.states {
        Amplitudes::Cavity(_) => "t,re_psi_s,im_psi_s,re_psi_e,im_psi_e,re_psi_f,im_psi_f,abs_f_in",
        Amplitudes::Waveguide(_) => "t,re_psi_e,im_psi_e,abs_f_in",
    }
}

/// Writes `t`, real and imaginary part of each amplitude and `|f_in(t)|`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "{}", trajectory_header(traj))?;
    for (k, &t) in traj.times.iter().enumerate() {
        write!(w, "{}", fmt_num(t))?;
        match &traj.states {
            Amplitudes::Cavity(v) => {
                for z in [v[k].psi_s, v[k].psi_e, v[k].psi_f] {
                    write!(w, ",{},{}", fmt_num(z.re), fmt_num(z.im))?;
                }
            }
            Amplitudes::Waveguide(v) => write!(w, ",{},{}", fmt_num(v[k].re), fmt_num(v[k].im))?,
        }
        writeln!(w, ",{}", fmt_num(traj.input_values[k].norm()))?;
    }
    Ok(())
}
