//! Smooth compactly supported cutoff profiles.
//!
//! Everything here is built from the same `exp(-1/t)` glue, so every profile
//! is C^∞, takes values in [0,1], and is *exactly* 0 / 1 outside its
//! transition layers. Exactness off the layers is what the spectral-cutoff
//! and partition-of-unity identities rely on.

/// `exp(-1/t)` for `t > 0`, extended by 0. Flat to all orders at 0.
#[inline]
fn glue(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: exactly 0 for `t <= 0`, exactly 1 for `t >= 1`.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = glue(t);
        let b = glue(1.0 - t);
        a / (a + b)
    }
}

/// The standard even bump: 1 on [-1/2, 1/2], supported in (-1, 1).
#[inline]
pub fn standard_bump(x: f64) -> f64 {
    let r = x.abs();
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        smooth_step(2.0 * (1.0 - r))
    }
}

/// A plateau profile in one variable: 1 on `[plateau.0, plateau.1]`,
/// supported in `(support.0, support.1)`, smooth steps in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauBump {
    pub support: (f64, f64),
    pub plateau: (f64, f64),
}

impl PlateauBump {
    /// Requires `support.0 < plateau.0 <= plateau.1 < support.1`.
    pub fn new(support: (f64, f64), plateau: (f64, f64)) -> Self {
        assert!(
            support.0 < plateau.0 && plateau.0 <= plateau.1 && plateau.1 < support.1,
            "plateau {:?} must sit strictly inside support {:?}",
            plateau,
            support
        );
        Self { support, plateau }
    }

    /// Symmetric profile around 0: 1 on `[-inner, inner]`, supported in
    /// `(-outer, outer)`.
    pub fn symmetric(inner: f64, outer: f64) -> Self {
        Self::new((-outer, outer), (-inner, inner))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.support.0 || x >= self.support.1 {
            0.0
        } else if x < self.plateau.0 {
            smooth_step((x - self.support.0) / (self.plateau.0 - self.support.0))
        } else if x <= self.plateau.1 {
            1.0
        } else {
            smooth_step((self.support.1 - x) / (self.support.1 - self.plateau.1))
        }
    }

    /// A wider profile that is exactly 1 on this one's support.
    pub fn widened(&self, margin: f64) -> Self {
        assert!(margin > 0.0);
        Self::new(
            (self.support.0 - 2.0 * margin, self.support.1 + 2.0 * margin),
            (self.support.0 - margin, self.support.1 + margin),
        )
    }

    /// Evaluate on |x| (even extension), useful for shells in |η| or |ζ|.
    pub fn eval_abs(&self, x: f64) -> f64 {
        self.eval(x.abs())
    }
}

/// Decreasing dyadic envelope: exactly 1 for `r <= 1`, exactly 0 for
/// `r >= ratio`. Differences of rescalings telescope into an exact
/// partition of unity of squares.
#[derive(Debug, Clone, Copy)]
pub struct DyadicEnvelope {
    pub ratio: f64,
}

impl DyadicEnvelope {
    pub fn new(ratio: f64) -> Self {
        assert!(ratio > 1.0, "dyadic ratio must exceed 1");
        Self { ratio }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        1.0 - smooth_step((r - 1.0) / (self.ratio - 1.0))
    }

    /// φ_j(r)² for j >= 1 equals `G(r/R^j) - G(r/R^(j-1))`; φ_0² = `G(r)`.
    /// The square root of the telescoping difference, self-similar in j.
    pub fn piece(&self, j: usize, r: f64) -> f64 {
        let r = r.abs();
        if j == 0 {
            self.eval(r).sqrt()
        } else {
            let scale = self.ratio.powi(j as i32);
            let diff = self.eval(r / scale) - self.eval(r * self.ratio / scale);
            diff.max(0.0).sqrt()
        }
    }
}
