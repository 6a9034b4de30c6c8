use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, unavailable, Result};

/// One-sample derivative-moment keys `T(1^i 1^j ...)`.
///
/// The first six drive `C_1..C_3` and `T_1..T_3`; the remaining five are
/// needed only for `C_4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    A2,
    A3,
    A4,
    A22,
    A23,
    A222,
    A5,
    A24,
    A33,
    A223,
    A2222,
}

impl Pattern {
    pub const CORE: [Pattern; 6] = [
        Pattern::A2,
        Pattern::A3,
        Pattern::A4,
        Pattern::A22,
        Pattern::A23,
        Pattern::A222,
    ];
    pub const EXTENDED: [Pattern; 5] = [Pattern::A5, Pattern::A24, Pattern::A33, Pattern::A223, Pattern::A2222];
    pub const ALL: [Pattern; 11] = [
        Pattern::A2,
        Pattern::A3,
        Pattern::A4,
        Pattern::A22,
        Pattern::A23,
        Pattern::A222,
        Pattern::A5,
        Pattern::A24,
        Pattern::A33,
        Pattern::A223,
        Pattern::A2222,
    ];

    /// Repetition counts of the arguments, e.g. `[2, 3]` for `T(1^2 1^3)`.
    pub fn parts(self) -> &'static [usize] {
        match self {
            Pattern::A2 => &[2],
            Pattern::A3 => &[3],
            Pattern::A4 => &[4],
            Pattern::A22 => &[2, 2],
            Pattern::A23 => &[2, 3],
            Pattern::A222 => &[2, 2, 2],
            Pattern::A5 => &[5],
            Pattern::A24 => &[2, 4],
            Pattern::A33 => &[3, 3],
            Pattern::A223 => &[2, 2, 3],
            Pattern::A2222 => &[2, 2, 2, 2],
        }
    }

    /// Total number of derivative arguments.
    pub fn order(self) -> usize {
        self.parts().iter().sum()
    }

    pub fn label(self) -> &'static str {
        match self {
            Pattern::A2 => "1^2",
            Pattern::A3 => "1^3",
            Pattern::A4 => "1^4",
            Pattern::A22 => "1^2 1^2",
            Pattern::A23 => "1^2 1^3",
            Pattern::A222 => "1^2 1^2 1^2",
            Pattern::A5 => "1^5",
            Pattern::A24 => "1^2 1^4",
            Pattern::A33 => "1^3 1^3",
            Pattern::A223 => "1^2 1^2 1^3",
            Pattern::A2222 => "1^2 1^2 1^2 1^2",
        }
    }

    pub fn from_parts(parts: &[usize]) -> Option<Pattern> {
        let mut sorted = parts.to_vec();
        sorted.sort_unstable();
        Pattern::ALL.into_iter().find(|p| p.parts() == sorted.as_slice())
    }
}

/// Value of a functional together with its one-sample derivative moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBundle {
    value: f64,
    entries: BTreeMap<Pattern, f64>,
}

impl DerivativeBundle {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            entries: BTreeMap::new(),
        }
    }

    /// Bundle of a functional whose derivative moments all vanish.
    pub fn linear(value: f64) -> Self {
        let mut b = Self::new(value);
        for p in Pattern::ALL {
            b.set(p, 0.0);
        }
        b
    }

    pub fn with(mut self, p: Pattern, v: f64) -> Self {
        self.set(p, v);
        self
    }

    pub fn set(&mut self, p: Pattern, v: f64) {
        self.entries.insert(p, v);
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn get(&self, p: Pattern) -> Result<f64> {
        match self.entries.get(&p) {
            Some(v) => Ok(*v),
            None => unavailable(format!("bundle entry T({}) not supplied", p.label())),
        }
    }

    pub fn has(&self, p: Pattern) -> bool {
        self.entries.contains_key(&p)
    }

    /// Fills every listed pattern from `f`.
    pub fn from_fn(value: f64, patterns: &[Pattern], mut f: impl FnMut(Pattern) -> Result<f64>) -> Result<Self> {
        let mut b = Self::new(value);
        for &p in patterns {
            b.set(p, f(p)?);
        }
        Ok(b)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Pattern, f64)> + '_ {
        self.entries.iter().map(|(p, v)| (*p, *v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            value: self.value * c,
            entries: self.entries.iter().map(|(p, v)| (*p, v * c)).collect(),
        }
    }
}

/// Tagged multisample pattern over sample indices (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaggedPattern {
    /// `T(a^2)`
    A2(usize),
    /// `T(a^3)`
    A3(usize),
    /// `T(a^4)`
    A4(usize),
    /// `T(a^2 b^2)`, including the coincident case `a = b`.
    A2B2(usize, usize),
    /// `T(a^2 b^3)`: first tag carries the square.
    A2B3(usize, usize),
    /// `T(a^2 b^2 c^2)`
    A2B2C2(usize, usize, usize),
}

impl TaggedPattern {
    /// Sorts tags that carry equal powers.
    pub fn canonical(self) -> Self {
        match self {
            TaggedPattern::A2B2(a, b) => TaggedPattern::A2B2(a.min(b), a.max(b)),
            TaggedPattern::A2B2C2(a, b, c) => {
                let mut t = [a, b, c];
                t.sort_unstable();
                TaggedPattern::A2B2C2(t[0], t[1], t[2])
            }
            other => other,
        }
    }

    fn tags(self) -> Vec<usize> {
        match self {
            TaggedPattern::A2(a) | TaggedPattern::A3(a) | TaggedPattern::A4(a) => vec![a],
            TaggedPattern::A2B2(a, b) | TaggedPattern::A2B3(a, b) => vec![a, b],
            TaggedPattern::A2B2C2(a, b, c) => vec![a, b, c],
        }
    }
}

/// Multisample derivative moments with the size weights `lambda_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiBundle {
    value: f64,
    lambdas: Vec<f64>,
    entries: BTreeMap<TaggedPattern, f64>,
}

impl MultiBundle {
    pub fn new(value: f64, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return invalid("lambdas must be non-empty and positive");
        }
        Ok(Self {
            value,
            lambdas,
            entries: BTreeMap::new(),
        })
    }

    /// Weights from sample sizes: `lambda_a = min(n) / n_a`.
    pub fn from_sizes(value: f64, sizes: &[usize]) -> Result<Self> {
        let n = *sizes
            .iter()
            .min()
            .ok_or_else(|| crate::Error::InvalidArgument("no sizes".into()))?;
        if n == 0 {
            return invalid("sample sizes must be positive");
        }
        Self::new(value, sizes.iter().map(|&m| n as f64 / m as f64).collect())
    }

    /// The `k = 1` multisample view of a one-sample bundle.
    pub fn from_one_sample(b: &DerivativeBundle) -> Self {
        let mut m = Self {
            value: b.value(),
            lambdas: vec![1.0],
            entries: BTreeMap::new(),
        };
        let pairs = [
            (Pattern::A2, TaggedPattern::A2(0)),
            (Pattern::A3, TaggedPattern::A3(0)),
            (Pattern::A4, TaggedPattern::A4(0)),
            (Pattern::A22, TaggedPattern::A2B2(0, 0)),
            (Pattern::A23, TaggedPattern::A2B3(0, 0)),
            (Pattern::A222, TaggedPattern::A2B2C2(0, 0, 0)),
        ];
        for (p, t) in pairs {
            if let Ok(v) = b.get(p) {
                m.entries.insert(t, v);
            }
        }
        m
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn set(&mut self, p: TaggedPattern, v: f64) -> Result<()> {
        if let Some(t) = p.tags().into_iter().find(|&t| t >= self.k()) {
            return invalid(format!("sample tag {t} out of range for k = {}", self.k()));
        }
        self.entries.insert(p.canonical(), v);
        Ok(())
    }

    pub fn with(mut self, p: TaggedPattern, v: f64) -> Result<Self> {
        self.set(p, v)?;
        Ok(self)
    }

    pub fn get(&self, p: TaggedPattern) -> Result<f64> {
        match self.entries.get(&p.canonical()) {
            Some(v) => Ok(*v),
            None => unavailable(format!("multisample bundle entry {p:?} not supplied")),
        }
    }
}
