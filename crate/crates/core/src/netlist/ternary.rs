use std::fmt;
use std::ops::Not;

use super::GateKind;

/// Three-valued logic level. `X` is unknown (either 0 or 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Ternary {
    Zero,
    One,
    #[default]
    X,
}

impl Ternary {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Ternary::One
        } else {
            Ternary::Zero
        }
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            Ternary::Zero => Some(false),
            Ternary::One => Some(true),
            Ternary::X => None,
        }
    }

    pub fn is_x(self) -> bool {
        self == Ternary::X
    }

    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Ternary::Zero, _) | (_, Ternary::Zero) => Ternary::Zero,
            (Ternary::One, Ternary::One) => Ternary::One,
            _ => Ternary::X,
        }
    }

    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (Ternary::One, _) | (_, Ternary::One) => Ternary::One,
            (Ternary::Zero, Ternary::Zero) => Ternary::Zero,
            _ => Ternary::X,
        }
    }

    pub fn xor(self, other: Self) -> Self {
        match (self.to_bool(), other.to_bool()) {
            (Some(a), Some(b)) => Ternary::from_bool(a ^ b),
            _ => Ternary::X,
        }
    }

    /// `sel ? one : zero`. An unknown select still yields a known value when
    /// both data inputs agree.
    pub fn mux(sel: Self, zero: Self, one: Self) -> Self {
        match sel {
            Ternary::Zero => zero,
            Ternary::One => one,
            Ternary::X if zero == one => zero,
            Ternary::X => Ternary::X,
        }
    }

    pub fn eval_gate(kind: GateKind, mut inputs: impl Iterator<Item = Ternary>) -> Ternary {
        match kind {
            GateKind::And => and_all(inputs),
            GateKind::Nand => !and_all(inputs),
            GateKind::Or => or_all(inputs),
            GateKind::Nor => !or_all(inputs),
            GateKind::Xor => inputs.fold(Ternary::Zero, Ternary::xor),
            GateKind::Xnor => !inputs.fold(Ternary::Zero, Ternary::xor),
            GateKind::Not => !inputs.next().unwrap_or(Ternary::X),
            GateKind::Buff => inputs.next().unwrap_or(Ternary::X),
            GateKind::Mux => {
                let s = inputs.next().unwrap_or(Ternary::X);
                let a = inputs.next().unwrap_or(Ternary::X);
                let b = inputs.next().unwrap_or(Ternary::X);
                Ternary::mux(s, a, b)
            }
            GateKind::Const0 => Ternary::Zero,
            GateKind::Const1 => Ternary::One,
        }
    }
}

// Both reductions stop at the first controlling value.
fn and_all(inputs: impl Iterator<Item = Ternary>) -> Ternary {
    let mut acc = Ternary::One;
    for v in inputs {
        match v {
            Ternary::Zero => return Ternary::Zero,
            Ternary::X => acc = Ternary::X,
            Ternary::One => {}
        }
    }
    acc
}

fn or_all(inputs: impl Iterator<Item = Ternary>) -> Ternary {
    let mut acc = Ternary::Zero;
    for v in inputs {
        match v {
            Ternary::One => return Ternary::One,
            Ternary::X => acc = Ternary::X,
            Ternary::Zero => {}
        }
    }
    acc
}

impl Not for Ternary {
    type Output = Ternary;

    fn not(self) -> Ternary {
        match self {
            Ternary::Zero => Ternary::One,
            Ternary::One => Ternary::Zero,
            Ternary::X => Ternary::X,
        }
    }
}

impl From<bool> for Ternary {
    fn from(b: bool) -> Self {
        Ternary::from_bool(b)
    }
}

impl fmt::Display for Ternary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ternary::Zero => "0",
            Ternary::One => "1",
            Ternary::X => "X",
        })
    }
}
