//! Axis value lists: `0,5,10` or inclusive `start:stop:step`.

use crnoma_core::Error;

pub fn parse(text: &str) -> Result<Vec<f64>, Error> {
    let bad = |msg: String| Error::InvalidSweep(msg);
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("axis value `{}`: {e}", s.trim())))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad(format!("range `{text}` must be start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(bad(format!("range `{text}` needs finite bounds and a positive step")));
        }
        if stop < start {
            return Err(bad(format!("range `{text}` is empty")));
        }
        // tolerate rounding in (stop - start) / step
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    if text.trim().is_empty() {
        return Err(bad("axis value list is empty".into()));
    }
    text.split(',').map(num).collect()
}
