use alloc::string::String;
use alloc::vec::Vec;

/// A log-determinant with the terms it was assembled from.
#[derive(Clone, Debug, PartialEq)]
pub struct DetResult {
    pub log_det: f64,
    pub breakdown: Vec<(String, f64)>,
    pub error_estimate: f64,
    pub notes: Vec<String>,
}

impl DetResult {
    pub fn new(log_det: f64) -> Self {
        Self { log_det, breakdown: Vec::new(), error_estimate: 0.0, notes: Vec::new() }
    }

    pub fn with_term(mut self, name: &str, value: f64) -> Self {
        self.breakdown.push((String::from(name), value));
        self
    }

    pub fn with_error(mut self, err: f64) -> Self {
        self.error_estimate = err;
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.notes.push(String::from(note));
        self
    }

    pub fn det(&self) -> f64 {
        crate::fm::exp(self.log_det)
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.breakdown.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}
