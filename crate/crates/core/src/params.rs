//! Model parameters `(N, b, q)` and the exponents derived from them.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A real exponent that may be infinite (the energy-critical power for `N <= 4`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }

    /// `Some(x)` for a finite exponent.
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(x) => Some(x),
            Exponent::Infinite => None,
        }
    }

    /// `x < self`, with every real below infinity.
    pub fn exceeds(self, x: f64) -> bool {
        match self {
            Exponent::Finite(e) => x < e,
            Exponent::Infinite => true,
        }
    }

    /// `x <= self`.
    pub fn bounds(self, x: f64) -> bool {
        match self {
            Exponent::Finite(e) => x <= e,
            Exponent::Infinite => true,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(x) => write!(f, "{x}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

/// Dimension, weight exponent and nonlinearity power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub b: f64,
    pub q: f64,
}

/// Exponents fixed by `(N, b, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    /// Power of `‖Δv‖` in the Gagliardo–Nirenberg inequality.
    pub d: f64,
    /// Power of `‖v‖` in the Gagliardo–Nirenberg inequality.
    pub e: f64,
    /// Critical Sobolev index.
    pub s_c: f64,
    /// Mass-critical power.
    pub q_m: f64,
    /// Energy-critical power.
    pub q_e: Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Sharp Gagliardo–Nirenberg inequality and ground states.
    Gn,
    DichotomyGlobal,
    DichotomyBlowup,
}

/// One checked constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub bound: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub theorem: Theorem,
    pub constraints: Vec<Constraint>,
    /// Notes that do not affect `passed`, e.g. homogeneous comparison mode.
    pub advisories: Vec<String>,
}

impl RegimeReport {
    pub fn passed(&self) -> bool {
        self.constraints.iter().all(|c| c.passed)
    }

    /// Names of the violated constraints.
    pub fn violations(&self) -> Vec<&str> {
        self.constraints
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

impl ModelParams {
    pub fn new(n: usize, b: f64, q: f64) -> Self {
        Self { n, b, q }
    }

    pub fn exponents(&self) -> DerivedExponents {
        derived_exponents(self)
    }

    /// `1 + 2b/(N-1)`, the lower admissible power; infinite for `N = 1`.
    pub fn lower_power(&self) -> f64 {
        if self.n > 1 {
            1.0 + 2.0 * self.b / (self.n as f64 - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

/// `D = (Nq-N-2b)/4`, `E = 1+q-D`, `s_c = N/2-(4+b)/(q-1)`, `q_m = 1+(8+2b)/N`,
/// `q_e = 1+(8+2b)/(N-4)` or infinity when `N <= 4`.
pub fn derived_exponents(p: &ModelParams) -> DerivedExponents {
    let n = p.n as f64;
    let d = (n * p.q - n - 2.0 * p.b) / 4.0;
    let q_m = 1.0 + (8.0 + 2.0 * p.b) / n;
    let q_e = if p.n <= 4 {
        Exponent::Infinite
    } else {
        Exponent::Finite(1.0 + (8.0 + 2.0 * p.b) / (n - 4.0))
    };
    // Exact zeros at the critical powers, so that comparisons there are not
    // spoiled by rounding in the closed forms.
    let (d, s_c) = if p.q == q_m {
        (2.0, 0.0)
    } else {
        (d, n / 2.0 - (4.0 + p.b) / (p.q - 1.0))
    };
    let (e, s_c) = if q_e == Exponent::Finite(p.q) {
        (0.0, 2.0)
    } else {
        (1.0 + p.q - d, s_c)
    };
    DerivedExponents { d, e, s_c, q_m, q_e }
}

fn constraint(name: &str, bound: String, passed: bool) -> Constraint {
    Constraint {
        name: name.to_string(),
        bound,
        passed,
    }
}

/// Checks the hypotheses of the requested theorem; failures are reported, not raised.
pub fn validate_regime(p: &ModelParams, theorem: Theorem) -> RegimeReport {
    let ex = p.exponents();
    let lower = p.lower_power();
    let mut cs = Vec::new();
    let mut advisories = Vec::new();

    cs.push(constraint("q > 1", format!("q = {} > 1", p.q), p.q > 1.0));
    cs.push(constraint(
        "b >= 0",
        format!("b = {} >= 0", p.b),
        p.b >= 0.0 && p.b.is_finite(),
    ));
    if p.b == 0.0 {
        advisories.push("b = 0: homogeneous comparison mode".to_string());
    }

    match theorem {
        Theorem::Gn => {
            cs.push(constraint("N >= 2", format!("N = {} >= 2", p.n), p.n >= 2));
            cs.push(constraint(
                "q > 1 + 2b/(N-1)",
                format!("q = {} > {}", p.q, lower),
                p.q > lower,
            ));
            cs.push(constraint(
                "q < q_e",
                format!("q = {} < {}", p.q, ex.q_e),
                ex.q_e.exceeds(p.q),
            ));
        }
        Theorem::DichotomyGlobal | Theorem::DichotomyBlowup => {
            cs.push(constraint("N >= 2", format!("N = {} >= 2", p.n), p.n >= 2));
            cs.push(constraint(
                "q >= q_m",
                format!("q = {} >= {}", p.q, ex.q_m),
                p.q >= ex.q_m,
            ));
            cs.push(constraint(
                "q > 1 + 2b/(N-1)",
                format!("q = {} > {}", p.q, lower),
                p.q > lower,
            ));
            cs.push(constraint(
                "q <= q_e",
                format!("q = {} <= {}", p.q, ex.q_e),
                ex.q_e.bounds(p.q),
            ));
            if theorem == Theorem::DichotomyBlowup {
                cs.push(constraint("q <= 9", format!("q = {} <= 9", p.q), p.q <= 9.0));
                if p.q == ex.q_m {
                    advisories.push("q = q_m: infinite-time blow-up branch".to_string());
                }
                if p.b <= 4.0 * (p.n as f64 - 5.0) {
                    advisories
                        .push("b <= 4(N-5): q_e <= 9, the bound q <= 9 may be relaxed (not certified)".to_string());
                }
            }
        }
    }
    RegimeReport {
        theorem,
        constraints: cs,
        advisories,
    }
}
