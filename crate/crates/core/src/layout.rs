//! Register layouts and mixed-radix index arithmetic.
//!
//! Flat indices treat the first register as the most significant digit, so
//! for registers of dimensions `(d0, d1, .., dk)` the stride of register `i`
//! is the product of the dimensions after it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result, DEFAULT_DIMENSION_CAP};

/// What a register stands for in the measurement chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    ParticlePath,
    Detector,
    Photon,
    Observer,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::ParticlePath => "particle-path",
            Role::Detector => "detector",
            Role::Photon => "photon",
            Role::Observer => "observer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub dimension: usize,
    pub role: Role,
}

impl Register {
    pub fn new(name: impl Into<String>, dimension: usize, role: Role) -> Self {
        Register { name: name.into(), dimension, role }
    }
}

/// Ordered registers of a composite space together with their strides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    registers: Vec<Register>,
    strides: Vec<usize>,
    total_dimension: usize,
}

impl SubsystemLayout {
    /// Builds a layout capped at [`DEFAULT_DIMENSION_CAP`].
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        Self::with_cap(registers, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(registers: Vec<Register>, cap: usize) -> Result<Self> {
        if registers.is_empty() {
            return Err(Error::EmptyLayout);
        }
        for (i, reg) in registers.iter().enumerate() {
            if reg.dimension < 2 {
                return Err(Error::DimensionTooSmall {
                    register: reg.name.clone(),
                    dimension: reg.dimension,
                });
            }
            if registers[..i].iter().any(|r| r.name == reg.name) {
                return Err(Error::DuplicateRegister(reg.name.clone()));
            }
        }

        let mut total: usize = 1;
        for reg in &registers {
            total = total
                .checked_mul(reg.dimension)
                .ok_or(Error::Capacity { requested: None, cap })?;
        }
        if total > cap {
            return Err(Error::Capacity { requested: Some(total), cap });
        }

        let mut strides = alloc::vec![0; registers.len()];
        let mut stride = 1;
        for (i, reg) in registers.iter().enumerate().rev() {
            strides[i] = stride;
            stride *= reg.dimension;
        }

        Ok(SubsystemLayout { registers, strides, total_dimension: total })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn total_dimension(&self) -> usize {
        self.total_dimension
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn stride(&self, register: usize) -> usize {
        self.strides[register]
    }

    pub fn dimension(&self, register: usize) -> usize {
        self.registers[register].dimension
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Positions of all registers with `role`, in layout order.
    pub fn positions_with_role(&self, role: Role) -> Vec<usize> {
        self.registers
            .iter()
            .enumerate()
            .filter(|(_, r)| r.role == role)
            .map(|(i, _)| i)
            .collect()
    }

    /// Flat index of a full label tuple.
    pub fn encode(&self, labels: &[usize]) -> Result<usize> {
        if labels.len() != self.registers.len() {
            return Err(Error::LabelCount { expected: self.registers.len(), found: labels.len() });
        }
        let mut index = 0;
        for ((reg, stride), &label) in self.registers.iter().zip(&self.strides).zip(labels) {
            if label >= reg.dimension {
                return Err(Error::LabelOutOfRange {
                    register: reg.name.clone(),
                    label,
                    dimension: reg.dimension,
                });
            }
            index += label * stride;
        }
        Ok(index)
    }

    /// Label tuple of a flat index.
    ///
    /// Panics if `index >= total_dimension`.
    pub fn decode(&self, index: usize) -> Vec<usize> {
        assert!(index < self.total_dimension, "index {index} out of range");
        self.registers
            .iter()
            .zip(&self.strides)
            .map(|(reg, stride)| (index / stride) % reg.dimension)
            .collect()
    }

    /// Label of a single register at a flat index.
    #[inline]
    pub fn digit(&self, index: usize, register: usize) -> usize {
        (index / self.strides[register]) % self.registers[register].dimension
    }

    /// Flat index with the digit of `register` replaced by `label`.
    #[inline]
    pub fn with_digit(&self, index: usize, register: usize, label: usize) -> usize {
        let stride = self.strides[register];
        let old = (index / stride) % self.registers[register].dimension;
        index - old * stride + label * stride
    }

    /// Layout made of the registers not listed in `removed`, in original
    /// order.
    pub fn without(&self, removed: &[usize]) -> Result<SubsystemLayout> {
        let kept: Vec<Register> = self
            .registers
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, r)| r.clone())
            .collect();
        SubsystemLayout::with_cap(kept, usize::MAX)
    }

    /// Product of the dimensions of the given registers.
    pub fn subsystem_dimension(&self, positions: &[usize]) -> usize {
        positions.iter().map(|&p| self.registers[p].dimension).product()
    }

    /// Mixed-radix index of the digits of `positions` (first listed is most
    /// significant) within the flat index `index`.
    pub fn sub_index(&self, index: usize, positions: &[usize]) -> usize {
        positions
            .iter()
            .fold(0, |acc, &p| acc * self.registers[p].dimension + self.digit(index, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn chain() -> SubsystemLayout {
        SubsystemLayout::new(vec![
            Register::new("P", 2, Role::ParticlePath),
            Register::new("DH", 2, Role::Detector),
            Register::new("DV", 2, Role::Detector),
            Register::new("Obs", 4, Role::Observer),
        ])
        .unwrap()
    }

    #[test]
    fn total_dimension_is_product() {
        assert_eq!(chain().total_dimension(), 32);
        let single = SubsystemLayout::new(vec![Register::new("P", 2, Role::ParticlePath)]).unwrap();
        assert_eq!(single.total_dimension(), 2);
    }

    #[test]
    fn first_register_most_significant() {
        let l = chain();
        assert_eq!(l.strides(), &[16, 8, 4, 1]);
        assert_eq!(l.encode(&[1, 1, 0, 0]).unwrap(), 24);
        assert_eq!(l.decode(24), vec![1, 1, 0, 0]);
    }

    #[test]
    fn rejects_bad_registers() {
        let dup = SubsystemLayout::new(vec![
            Register::new("P", 2, Role::ParticlePath),
            Register::new("P", 2, Role::ParticlePath),
        ]);
        assert_eq!(dup, Err(Error::DuplicateRegister("P".into())));

        let small = SubsystemLayout::new(vec![Register::new("P", 1, Role::ParticlePath)]);
        assert!(matches!(small, Err(Error::DimensionTooSmall { .. })));

        assert_eq!(SubsystemLayout::new(vec![]), Err(Error::EmptyLayout));
    }

    #[test]
    fn capacity_is_enforced() {
        let regs: Vec<Register> =
            (0..25).map(|i| Register::new(alloc::format!("q{i}"), 2, Role::Detector)).collect();
        assert_eq!(
            SubsystemLayout::new(regs),
            Err(Error::Capacity { requested: Some(1 << 25), cap: 1 << 24 })
        );
        let huge: Vec<Register> =
            (0..70).map(|i| Register::new(alloc::format!("q{i}"), 2, Role::Detector)).collect();
        assert!(matches!(
            SubsystemLayout::with_cap(huge, usize::MAX),
            Err(Error::Capacity { requested: None, .. })
        ));
    }

    #[test]
    fn digit_helpers_agree_with_decode() {
        let l = chain();
        for i in 0..l.total_dimension() {
            let digits = l.decode(i);
            for (r, &d) in digits.iter().enumerate() {
                assert_eq!(l.digit(i, r), d);
                let j = l.with_digit(i, r, (d + 1) % l.dimension(r));
                let mut expected = digits.clone();
                expected[r] = (d + 1) % l.dimension(r);
                assert_eq!(l.decode(j), expected);
            }
            assert_eq!(l.sub_index(i, &[3, 0]), digits[3] * 2 + digits[0]);
        }
    }

    #[test]
    fn encode_checks_labels() {
        let l = chain();
        assert!(matches!(l.encode(&[0, 0, 0, 4]), Err(Error::LabelOutOfRange { .. })));
        assert!(matches!(l.encode(&[0, 0]), Err(Error::LabelCount { .. })));
    }
}
