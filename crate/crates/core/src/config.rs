//! Mixed-radix encoding of joint configurations.
//!
//! A configuration over an ordered list of variables is packed into a single
//! integer with the first coordinate most significant. Parent configurations,
//! label configurations and full joint states all use this encoding.

/// Radices of an ordered list of categorical variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MixedRadix {
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        let mut strides = vec![1; radices.len()];
        let mut size = 1usize;
        for (pos, &r) in radices.iter().enumerate().rev() {
            strides[pos] = size;
            size = size
                .checked_mul(r)
                .expect("configuration space does not fit in usize");
        }
        Self {
            radices,
            strides,
            size,
        }
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        self.radices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radices.is_empty()
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    /// Number of distinct configurations (1 for the empty list).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    /// Packs a configuration. Panics in debug builds on arity or range errors.
    pub fn encode(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.radices.len());
        values
            .iter()
            .zip(&self.strides)
            .zip(&self.radices)
            .map(|((&v, &s), &r)| {
                debug_assert!(v < r);
                v * s
            })
            .sum()
    }

    /// Packs a configuration, checking arity and ranges.
    pub fn try_encode(&self, values: &[usize]) -> Option<usize> {
        if values.len() != self.radices.len() {
            return None;
        }
        if values.iter().zip(&self.radices).any(|(&v, &r)| v >= r) {
            return None;
        }
        Some(self.encode(values))
    }

    pub fn decode(&self, code: usize) -> Vec<usize> {
        (0..self.radices.len()).map(|p| self.digit(code, p)).collect()
    }

    pub fn digit(&self, code: usize, pos: usize) -> usize {
        (code / self.strides[pos]) % self.radices[pos]
    }

    /// Code with coordinate `pos` replaced by `value`.
    pub fn with_digit(&self, code: usize, pos: usize, value: usize) -> usize {
        code - self.digit(code, pos) * self.strides[pos] + value * self.strides[pos]
    }

    /// Radix system with coordinate `pos` dropped.
    pub fn without(&self, pos: usize) -> MixedRadix {
        let mut radices = self.radices.clone();
        radices.remove(pos);
        MixedRadix::new(radices)
    }

    /// Code in [`Self::without`]`(pos)` obtained by deleting coordinate `pos`.
    pub fn project_out(&self, code: usize, pos: usize) -> usize {
        let high = code / (self.strides[pos] * self.radices[pos]);
        let low = code % self.strides[pos];
        high * self.strides[pos] + low
    }

    /// Inverse of [`Self::project_out`]: re-inserts `value` at coordinate `pos`.
    pub fn insert_digit(&self, reduced: usize, pos: usize, value: usize) -> usize {
        let stride = self.strides[pos];
        let high = reduced / stride;
        let low = reduced % stride;
        (high * self.radices[pos] + value) * stride + low
    }
}
