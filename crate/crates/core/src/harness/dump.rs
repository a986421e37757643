//! Channel fixtures as CSV: one row per (trial, device) with `h_d` and
//! every entry of `q` split into real and imaginary parts.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};

fn header(n: usize) -> Vec<String> {
    let mut h = vec!["trial".to_string(), "device".into(), "h_d_re".into(), "h_d_im".into()];
    for i in 0..n {
        h.push(format!("q{i}_re"));
        h.push(format!("q{i}_im"));
    }
    h
}

/// Writes `(trial index, channels)` pairs. All sets must share one element
/// count.
pub fn write_channel_dump<W: Write>(trials: &[(usize, ChannelSet)], out: W) -> Result<()> {
    let n = trials.first().map_or(0, |(_, c)| c.n_elements());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n))?;
    for (trial, set) in trials {
        set.validate(n)?;
        for (k, (h, q)) in set.h_d.iter().zip(&set.q).enumerate() {
            let mut row = vec![trial.to_string(), k.to_string(), h.re.to_string(), h.im.to_string()];
            for c in q {
                row.push(c.re.to_string());
                row.push(c.im.to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_channel_dump<R: Read>(input: R) -> Result<Vec<(usize, ChannelSet)>> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    if width < 4 || width % 2 != 0 {
        return Err(Error::Io(format!("bad channel dump header width {width}")));
    }
    let mut out: Vec<(usize, ChannelSet)> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Io(format!("row {}: bad number `{}`", line + 2, &rec[i])))
        };
        let trial: usize = rec[0].parse().map_err(|_| Error::Io(format!("row {}: bad trial", line + 2)))?;
        let device: usize = rec[1].parse().map_err(|_| Error::Io(format!("row {}: bad device", line + 2)))?;
        let h = Complex64::new(num(2)?, num(3)?);
        let q = (4..width)
            .step_by(2)
            .map(|i| Ok(Complex64::new(num(i)?, num(i + 1)?)))
            .collect::<Result<Vec<_>>>()?;
        if out.last().is_none_or(|(t, _)| *t != trial) {
            out.push((trial, ChannelSet { h_d: Vec::new(), q: Vec::new() }));
        }
        let set = &mut out.last_mut().expect("pushed above").1;
        if device != set.len() {
            return Err(Error::Io(format!("row {}: device {device} out of order", line + 2)));
        }
        set.h_d.push(h);
        set.q.push(q);
    }
    Ok(out)
}
