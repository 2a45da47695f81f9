//! Flag resolution shared by the subcommands.

use crate::error::CliError;

/// `MIN:MAX:N`, `N` equally spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == last {
                    self.max
                } else {
                    self.min + span * i as f64 / last as f64
                }
            })
            .collect()
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected MIN:MAX:N, got {s:?}"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("{:?}: {e}", parts[2]))?;
        if count == 0 {
            return Err("grid count must be >= 1".into());
        }
        if !(min.is_finite() && max.is_finite()) || (count > 1 && max < min) {
            return Err(format!("bad grid range {min}:{max}"));
        }
        Ok(Self { min, max, count })
    }
}

/// Strong convexity and smoothness moduli: either `(m, L)` or `κ` with `m = 1`.
pub fn resolve_moduli(
    m: Option<f64>,
    l: Option<f64>,
    kappa: Option<f64>,
    default: (f64, f64),
) -> Result<(f64, f64), CliError> {
    let (m, l) = match (m, l, kappa) {
        (None, None, None) => default,
        (None, None, Some(k)) => (1.0, k),
        (Some(m), Some(l), None) => (m, l),
        (_, _, Some(_)) => {
            return Err(CliError::Config(
                "give either --m and --L or --kappa, not both".into(),
            ))
        }
        _ => {
            return Err(CliError::Config(
                "--m and --L must be given together".into(),
            ))
        }
    };
    if !(m.is_finite() && l.is_finite() && m > 0.0 && l >= m) {
        return Err(CliError::Config(format!(
            "need 0 < m <= L, got m={m}, L={l}"
        )));
    }
    Ok((m, l))
}

/// `δ` from `--delta` or `--alpha` (`δ = √(mα)`), else the largest admissible
/// `δ = 1/√κ`.
pub fn resolve_delta(
    delta: Option<f64>,
    alpha: Option<f64>,
    m: f64,
    l: f64,
) -> Result<f64, CliError> {
    let d = match (delta, alpha) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("give either --delta or --alpha".into()))
        }
        (Some(d), None) => d,
        (None, Some(a)) => (m * a).sqrt(),
        (None, None) => (m / l).sqrt(),
    };
    if !(d.is_finite() && d > 0.0) {
        return Err(CliError::Config(format!("δ must be positive, got {d}")));
    }
    Ok(d)
}
