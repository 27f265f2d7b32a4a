use crate::error::{Error, Result};

/// A hyper-parameter that is either derived from the problem size or pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting {
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Setting::Auto);
        }
        s.parse::<f64>()
            .map(Setting::Fixed)
            .map_err(|_| Error::Config(format!("expected `auto` or a number, got {s:?}")))
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Setting::Auto => f.write_str("auto"),
            Setting::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Problem constants the confidence radius depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSize {
    pub dim: usize,
    pub nodes: usize,
    pub horizon: usize,
    pub e_star: usize,
    pub e_c: usize,
    /// Θ, the known bound on ‖θ‖₂.
    pub theta_bound: f64,
}

/// Hyper-parameters of the linear UCB learners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwParams {
    pub sigma: f64,
    pub lambda: Setting,
    pub beta: Setting,
    /// Assumed corruption budget C̄.
    pub c_bar: f64,
}

impl Default for CwParams {
    fn default() -> Self {
        CwParams {
            sigma: 1.0,
            lambda: Setting::Auto,
            beta: Setting::Auto,
            c_bar: 0.0,
        }
    }
}

/// Parameters after `auto` settings have been evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub sigma: f64,
    /// Weight threshold λ; `None` means every sample has weight 1.
    pub lambda: Option<f64>,
    pub beta: f64,
}

impl CwParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!(
                "sigma {} must be positive",
                self.sigma
            )));
        }
        if !(self.c_bar >= 0.0) {
            return Err(Error::Config(format!("c_bar {} must be ≥ 0", self.c_bar)));
        }
        if let Setting::Fixed(l) = self.lambda {
            if !(l > 0.0) {
                return Err(Error::Config(format!("lambda {l} must be positive")));
            }
        }
        if let Setting::Fixed(b) = self.beta {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::Config(format!("beta {b} must be finite and ≥ 0")));
            }
        }
        Ok(())
    }

    /// `λ = √d / (C̄ E^c)`, or `+∞` (all weights 1) when `C̄ E^c = 0`.
    pub fn lambda_value(&self, size: &ProblemSize) -> f64 {
        match self.lambda {
            Setting::Fixed(l) => l,
            Setting::Auto => {
                let denom = self.c_bar * size.e_c as f64;
                if denom > 0.0 {
                    (size.dim as f64).sqrt() / denom
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Confidence radius for the corruption-weighted learner:
    /// the stochastic radius plus `σ⁻² λ E^c C̄`.
    pub fn resolve_weighted(&self, size: &ProblemSize) -> ResolvedParams {
        let lambda = self.lambda_value(size);
        let beta = match self.beta {
            Setting::Fixed(b) => b,
            Setting::Auto => {
                let corruption_mass = size.e_c as f64 * self.c_bar;
                let corruption = if corruption_mass > 0.0 && lambda.is_finite() {
                    lambda * corruption_mass / (self.sigma * self.sigma)
                } else {
                    0.0
                };
                stochastic_radius(self.sigma, size) + corruption + size.theta_bound
            }
        };
        ResolvedParams {
            sigma: self.sigma,
            lambda: Some(lambda),
            beta,
        }
    }

    /// Confidence radius for plain IMLinUCB (no corruption term, unit weights).
    pub fn resolve_unweighted(&self, size: &ProblemSize) -> ResolvedParams {
        let beta = match self.beta {
            Setting::Fixed(b) => b,
            Setting::Auto => stochastic_radius(self.sigma, size) + size.theta_bound,
        };
        ResolvedParams {
            sigma: self.sigma,
            lambda: None,
            beta,
        }
    }
}

/// `σ⁻² √(d log(1 + E* T / d) + 2 log(n T))`.
pub fn stochastic_radius(sigma: f64, size: &ProblemSize) -> f64 {
    let d = size.dim as f64;
    let t = size.horizon as f64;
    let inner = d * (1.0 + size.e_star as f64 * t / d).ln() + 2.0 * (size.nodes as f64 * t).ln();
    inner.max(0.0).sqrt() / (sigma * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size() -> ProblemSize {
        ProblemSize {
            dim: 25,
            nodes: 10,
            horizon: 2000,
            e_star: 27,
            e_c: 20,
            theta_bound: 0.3,
        }
    }

    #[test]
    fn auto_lambda_infinite_without_corruption() {
        let p = CwParams::default();
        assert_eq!(p.lambda_value(&size()), f64::INFINITY);
        let r = p.resolve_weighted(&size());
        let u = p.resolve_unweighted(&size());
        assert_eq!(r.beta.to_bits(), u.beta.to_bits());
    }

    #[test]
    fn auto_beta_matches_formula() {
        let p = CwParams {
            sigma: 2.0,
            c_bar: 25.0,
            ..CwParams::default()
        };
        let s = size();
        let lambda = 5.0 / (25.0 * 20.0);
        assert!((p.lambda_value(&s) - lambda).abs() < 1e-15);
        let radius =
            (25.0 * (1.0f64 + 27.0 * 2000.0 / 25.0).ln() + 2.0 * (20_000.0f64).ln()).sqrt() / 4.0;
        let want = radius + lambda * 20.0 * 25.0 / 4.0 + 0.3;
        let got = p.resolve_weighted(&s).beta;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        // With auto λ the corruption term collapses to √d σ⁻².
        let without = p.resolve_unweighted(&s).beta;
        assert!((got - without - 5.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn settings_parse() {
        assert_eq!("auto".parse::<Setting>().unwrap(), Setting::Auto);
        assert_eq!("0.5".parse::<Setting>().unwrap(), Setting::Fixed(0.5));
        assert!("x".parse::<Setting>().is_err());
        let bad = CwParams {
            sigma: 0.0,
            ..CwParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
