use nalgebra::DVector;

use crate::error::{IlcError, Result};

/// A sampled multichannel signal over `k = 0..N-1`.
///
/// Samples are stored contiguously, so the backing slice is exactly the
/// stacked (lifted) vector `[s(0); s(1); ...; s(N-1)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    width: usize,
    data: Vec<f64>,
}

impl Signal {
    pub fn zeros(len: usize, width: usize) -> Self {
        Signal {
            width,
            data: vec![0.0; len * width],
        }
    }

    pub fn from_stacked(width: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 && !data.is_empty() {
            return Err(IlcError::Invalid("zero-width signal with data".into()));
        }
        if width > 0 && !data.len().is_multiple_of(width) {
            return Err(IlcError::dim(
                "stacked signal",
                None,
                format!("a multiple of {width}"),
                data.len(),
            ));
        }
        Ok(Signal { width, data })
    }

    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let width = samples.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(samples.len() * width);
        for (k, s) in samples.iter().enumerate() {
            if s.len() != width {
                return Err(IlcError::dim("signal sample", Some(k), width, s.len()));
            }
            data.extend_from_slice(s);
        }
        Ok(Signal { width, data })
    }

    pub fn from_lifted(width: usize, v: &DVector<f64>) -> Result<Self> {
        Self::from_stacked(width, v.as_slice().to_vec())
    }

    /// Unit impulse on `channel` at sample `at`.
    pub fn impulse(len: usize, width: usize, at: usize, channel: usize) -> Self {
        let mut s = Signal::zeros(len, width);
        s.data[at * width + channel] = 1.0;
        s
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.data[k * self.width..(k + 1) * self.width]
    }

    pub fn sample_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.width..(k + 1) * self.width]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_lifted(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.data)
    }

    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.samples().map(|s| s[i]).collect()
    }

    pub fn check_shape(&self, what: &str, len: usize, width: usize) -> Result<()> {
        if self.width != width {
            return Err(IlcError::dim(
                format!("{what} width"),
                None,
                width,
                self.width,
            ));
        }
        if self.len() != len {
            return Err(IlcError::dim(
                format!("{what} length"),
                None,
                len,
                self.len(),
            ));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Signal, f: impl Fn(f64, f64) -> f64) -> Result<Signal> {
        other.check_shape("signal operand", self.len(), self.width)?;
        Ok(Signal {
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Signal {
        Signal {
            width: self.width,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Euclidean norm of the stacked vector.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean norm of one channel over all samples.
    pub fn channel_norm(&self, i: usize) -> f64 {
        self.samples().map(|s| s[i] * s[i]).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
