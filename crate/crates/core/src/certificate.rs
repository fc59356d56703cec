use serde::Serialize;

/// One residual-backed verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// A list of named checks; passes when every check passes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Certificate {
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn new() -> Self {
        Certificate::default()
    }

    /// Records `value <= bound`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        });
        self
    }

    /// Records `value >= bound`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            pass: value >= bound,
        });
        self
    }

    pub fn merge(&mut self, prefix: &str, other: Certificate) -> &mut Self {
        for mut check in other.checks {
            check.name = format!("{prefix}.{}", check.name);
            self.checks.push(check);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Value of the named check. Panics if absent.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("no check named {name}"))
            .value
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}
