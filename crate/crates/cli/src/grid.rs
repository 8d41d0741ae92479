use std::fmt;
use std::str::FromStr;

/// Sorted, non-empty list of scan points, written `start:stop:step`, a
/// single value, or a comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub values: Vec<f64>,
    spec: String,
}

impl Grid {
    pub fn spec(&self) -> &str {
        &self.spec
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("grid value `{s}` must be finite"));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err(format!("grid `{s}` must be start:stop:step"));
            };
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0) {
                return Err(format!("grid step must be positive, got {step}"));
            }
            if stop < start {
                return Err(format!("grid stop {stop} is below start {start}"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(format!("grid `{s}` has more than 100000 points"));
            }
            // k·step from the start, then rounded to 12 digits so that 0.1:0.9:0.1
            // yields 0.3 rather than 0.30000000000000004
            (0..=n)
                .map(|k| {
                    let v = start + k as f64 * step;
                    format!("{v:.11e}").parse::<f64>().unwrap_or(v)
                })
                .collect()
        } else {
            s.split(',').map(number).collect::<Result<Vec<f64>, String>>()?
        };
        if values.is_empty() {
            return Err("grid is empty".into());
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("grid `{s}` must be strictly increasing"));
        }
        Ok(Self { values, spec: s.to_string() })
    }
}

/// `min:max` pair.
pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("window `{s}` must be min:max"))?;
    let (a, b) = (number(a)?, number(b)?);
    if !(a > 0.0 && b > a) {
        return Err(format!("window `{s}` needs 0 < min < max"));
    }
    Ok((a, b))
}
