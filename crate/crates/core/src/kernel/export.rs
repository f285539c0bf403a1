use std::io::Write;

use super::{GreenBounds, GreenProfile};
use crate::error::Result;

/// Writes `t,x,G,lower,upper` rows for every `(t, x)` pair; bound columns
/// stay empty when `bounds` is `None`. `x` is a distance from the source.
pub fn write_kernel_table<W: Write>(
    out: W,
    profile: &GreenProfile,
    bounds: Option<&GreenBounds>,
    times: &[f64],
    xs: &[f64],
) -> Result<()> {
    let d = profile.params().d;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "G", "lower", "upper"])?;
    for &t in times {
        for &x in xs {
            let g = profile.density(t, x.abs());
            let (lo, hi) = match bounds {
                Some(b) => {
                    let mut pt = vec![0.0; d];
                    pt[0] = x;
                    let (lo, hi) = b.bounds(t, &pt);
                    (format!("{lo:e}"), format!("{hi:e}"))
                }
                None => (String::new(), String::new()),
            };
            w.write_record([format!("{t}"), format!("{x}"), format!("{g:e}"), lo, hi])?;
        }
    }
    w.flush()?;
    Ok(())
}
