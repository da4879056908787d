use serde::Serialize;

/// One measured residual against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// NaN residuals fail.
    pub fn new(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn push(&mut self, name: impl Into<String>, residual: f64, threshold: f64) {
        self.checks.push(Check::new(name, residual, threshold));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn residual(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |c| c.residual)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
