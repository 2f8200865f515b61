//! The model space H^n ≅ C^{2n} and its covector generators.

use std::fmt;

use crate::error::FormError;

/// Largest supported quaternionic dimension (4n generators fit in a `u64`).
pub const MAX_N: usize = 16;

/// Flat quaternionic space of quaternionic dimension `n`.
///
/// Its complexified cotangent space has 4n generators: `dz_1..dz_{2n}` of
/// type (1,0) followed by `dz̄_1..dz̄_{2n}`. Generator `g` has index `g` in
/// that order, and every sign in the crate is normalized to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelSpace {
    n: usize,
}

/// A covector generator, identified by its index in the canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(pub u8);

impl ModelSpace {
    pub fn new(n: usize) -> Result<Self, FormError> {
        if n == 0 || n > MAX_N {
            return Err(FormError::BadDimension(n));
        }
        Ok(Self { n })
    }

    /// Quaternionic dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Complex dimension `2n`.
    pub fn complex_dim(&self) -> usize {
        2 * self.n
    }

    /// Number of covector generators, `4n`.
    pub fn generator_count(&self) -> usize {
        4 * self.n
    }

    /// `dz_k`, with `k` 1-based.
    pub fn dz(&self, k: usize) -> Generator {
        assert!(k >= 1 && k <= 2 * self.n, "dz_{k} out of range");
        Generator((k - 1) as u8)
    }

    /// `dz̄_k`, with `k` 1-based.
    pub fn dzb(&self, k: usize) -> Generator {
        assert!(k >= 1 && k <= 2 * self.n, "dzb_{k} out of range");
        Generator((2 * self.n + k - 1) as u8)
    }

    pub fn is_holomorphic(&self, g: Generator) -> bool {
        (g.0 as usize) < 2 * self.n
    }

    /// 0-based coordinate index of a generator (`dz_k` and `dz̄_k` share it).
    pub fn coordinate(&self, g: Generator) -> usize {
        (g.0 as usize) % (2 * self.n)
    }

    /// The conjugate generator.
    pub fn conjugate(&self, g: Generator) -> Generator {
        let m = 2 * self.n as u8;
        if g.0 < m {
            Generator(g.0 + m)
        } else {
            Generator(g.0 - m)
        }
    }

    /// Bit mask of the holomorphic generators.
    pub fn holomorphic_mask(&self) -> u64 {
        (1u64 << (2 * self.n)) - 1
    }

    /// Bit mask of all generators.
    pub fn full_mask(&self) -> u64 {
        if 4 * self.n == 64 {
            u64::MAX
        } else {
            (1u64 << (4 * self.n)) - 1
        }
    }

    /// Name such as `"z3"` or `"zb1"`.
    pub fn name(&self, g: Generator) -> String {
        let k = self.coordinate(g) + 1;
        if self.is_holomorphic(g) {
            format!("z{k}")
        } else {
            format!("zb{k}")
        }
    }

    /// Parses a generator name such as `"z3"` or `"zb1"`.
    pub fn parse_name(&self, s: &str) -> Result<Generator, FormError> {
        let bad = || FormError::BadGenerator(s.to_string());
        let (bar, digits) = if let Some(d) = s.strip_prefix("zb") {
            (true, d)
        } else if let Some(d) = s.strip_prefix('z') {
            (false, d)
        } else {
            return Err(bad());
        };
        let k: usize = digits.parse().map_err(|_| bad())?;
        if k == 0 || k > 2 * self.n {
            return Err(bad());
        }
        Ok(if bar { self.dzb(k) } else { self.dz(k) })
    }
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H^{}", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_layout() {
        let s = ModelSpace::new(2).unwrap();
        assert_eq!(s.generator_count(), 8);
        let hol = (0..8).filter(|&g| s.is_holomorphic(Generator(g))).count();
        assert_eq!(hol, 4);
        assert!(s.dz(4) < s.dzb(1));
        assert_eq!(s.conjugate(s.dz(3)), s.dzb(3));
        assert_eq!(s.parse_name("zb2").unwrap(), s.dzb(2));
        assert_eq!(s.name(s.dzb(4)), "zb4");
        assert!(s.parse_name("z5").is_err());
        assert!(s.parse_name("w1").is_err());
        assert!(ModelSpace::new(0).is_err());
    }
}
