//! Elementary operator kinds, their values, and their closed-form partials.
//!
//! Every operator is treated as a binary function `phi(u1, u2)`. Unary
//! operators are stored with both operand slots pointing at the same node and
//! ignore one of their arguments. Operators written with the constant on the
//! left (`c - u`, `c / u`, `c ^ u`) read the variable from the right slot;
//! everything else reads the left slot.

use std::fmt;

/// Operator kind of a non-independent node.
///
/// `*Const*` variants carry their constant; constants never appear as graph
/// nodes in their own right. `Const` is the one exception: a nullary node
/// that depends on nothing, needed when a recorded output is a constant
/// (for example the gradient graph of a linear function).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    /// `u + c`
    AddConst(f64),
    /// `c - u`
    SubConstL(f64),
    /// `u - c`
    SubConstR(f64),
    /// `c * u`
    MulConst(f64),
    /// `c / u`
    DivConstL(f64),
    /// `u / c`
    DivConstR(f64),
    /// `u ^ c`
    PowConstExp(f64),
    /// `c ^ u`
    PowConstBase(f64),
    Copy,
    /// The constant `c`; operands are ignored.
    Const(f64),
}

/// Which second partials of an operator are possibly non-zero somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Linearity {
    /// `d11 phi` possibly non-zero.
    pub left: bool,
    /// `d22 phi` possibly non-zero.
    pub right: bool,
    /// `d12 phi` possibly non-zero.
    pub joint: bool,
}

impl Linearity {
    const fn new(left: bool, right: bool, joint: bool) -> Self {
        Linearity { left, right, joint }
    }

    pub fn is_linear(self) -> bool {
        !(self.left || self.right || self.joint)
    }
}

/// First and second partials of `phi` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Partials {
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

impl Partials {
    fn first(d1: f64, d2: f64) -> Self {
        Partials {
            d1,
            d2,
            ..Default::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d1.is_finite()
            && self.d2.is_finite()
            && self.d11.is_finite()
            && self.d12.is_finite()
            && self.d22.is_finite()
    }
}

/// Number of variable operands an operator reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Nullary,
    Unary,
    Binary,
}

impl OpKind {
    /// Every tag, with a representative constant where one is needed.
    pub const ALL: [OpKind; 21] = [
        OpKind::Add,
        OpKind::Sub,
        OpKind::Mul,
        OpKind::Div,
        OpKind::Pow,
        OpKind::Neg,
        OpKind::Sin,
        OpKind::Cos,
        OpKind::Exp,
        OpKind::Log,
        OpKind::Sqrt,
        OpKind::AddConst(1.5),
        OpKind::SubConstL(1.5),
        OpKind::SubConstR(1.5),
        OpKind::MulConst(1.5),
        OpKind::DivConstL(1.5),
        OpKind::DivConstR(1.5),
        OpKind::PowConstExp(1.5),
        OpKind::PowConstBase(1.5),
        OpKind::Copy,
        OpKind::Const(1.5),
    ];

    pub fn arity(self) -> Arity {
        use OpKind::*;
        match self {
            Add | Sub | Mul | Div | Pow => Arity::Binary,
            Const(_) => Arity::Nullary,
            _ => Arity::Unary,
        }
    }

    /// Lower-case tag used by the text graph format.
    pub fn tag(self) -> &'static str {
        use OpKind::*;
        match self {
            Add => "add",
            Sub => "sub",
            Mul => "mul",
            Div => "div",
            Pow => "pow",
            Neg => "neg",
            Sin => "sin",
            Cos => "cos",
            Exp => "exp",
            Log => "log",
            Sqrt => "sqrt",
            AddConst(_) => "addconst",
            SubConstL(_) => "subconstl",
            SubConstR(_) => "subconstr",
            MulConst(_) => "mulconst",
            DivConstL(_) => "divconstl",
            DivConstR(_) => "divconstr",
            PowConstExp(_) => "powconstexp",
            PowConstBase(_) => "powconstbase",
            Copy => "copy",
            Const(_) => "const",
        }
    }

    /// Inverse of [`OpKind::tag`]. `value` is required exactly for the
    /// constant-carrying tags.
    pub fn from_tag(tag: &str, value: Option<f64>) -> Option<OpKind> {
        use OpKind::*;
        let plain = match tag {
            "add" => Some(Add),
            "sub" => Some(Sub),
            "mul" => Some(Mul),
            "div" => Some(Div),
            "pow" => Some(Pow),
            "neg" => Some(Neg),
            "sin" => Some(Sin),
            "cos" => Some(Cos),
            "exp" => Some(Exp),
            "log" => Some(Log),
            "sqrt" => Some(Sqrt),
            "copy" => Some(Copy),
            _ => None,
        };
        if let Some(op) = plain {
            return value.is_none().then_some(op);
        }
        let c = value?;
        Some(match tag {
            "addconst" => AddConst(c),
            "subconstl" => SubConstL(c),
            "subconstr" => SubConstR(c),
            "mulconst" => MulConst(c),
            "divconstl" => DivConstL(c),
            "divconstr" => DivConstR(c),
            "powconstexp" => PowConstExp(c),
            "powconstbase" => PowConstBase(c),
            "const" => Const(c),
            _ => return None,
        })
    }

    pub fn constant(self) -> Option<f64> {
        use OpKind::*;
        match self {
            AddConst(c) | SubConstL(c) | SubConstR(c) | MulConst(c) | DivConstL(c)
            | DivConstR(c) | PowConstExp(c) | PowConstBase(c) | Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn linearity(self) -> Linearity {
        use OpKind::*;
        match self {
            Add | Sub | Neg | Copy | AddConst(_) | SubConstL(_) | SubConstR(_) | MulConst(_)
            | DivConstR(_) | Const(_) => Linearity::new(false, false, false),
            Mul => Linearity::new(false, false, true),
            Div => Linearity::new(false, true, true),
            DivConstL(_) => Linearity::new(false, true, false),
            Pow => Linearity::new(true, true, true),
            PowConstExp(_) => Linearity::new(true, false, false),
            PowConstBase(_) => Linearity::new(false, true, false),
            Sin | Cos | Exp | Log | Sqrt => Linearity::new(true, false, false),
        }
    }

    /// `phi(u1, u2)`. May be non-finite outside the operator's domain.
    #[inline]
    pub fn apply(self, u1: f64, u2: f64) -> f64 {
        use OpKind::*;
        match self {
            Add => u1 + u2,
            Sub => u1 - u2,
            Mul => u1 * u2,
            Div => u1 / u2,
            Pow => u1.powf(u2),
            Neg => -u1,
            Sin => u1.sin(),
            Cos => u1.cos(),
            Exp => u1.exp(),
            Log => u1.ln(),
            Sqrt => u1.sqrt(),
            AddConst(c) => u1 + c,
            SubConstL(c) => c - u2,
            SubConstR(c) => u1 - c,
            MulConst(c) => c * u1,
            DivConstL(c) => c / u2,
            DivConstR(c) => u1 / c,
            PowConstExp(c) => u1.powf(c),
            PowConstBase(c) => c.powf(u2),
            Copy => u1,
            Const(c) => c,
        }
    }

    /// First partials only; `value` is `phi(u1, u2)`.
    #[inline]
    pub fn first_partials(self, u1: f64, u2: f64, value: f64) -> (f64, f64) {
        use OpKind::*;
        match self {
            Add => (1.0, 1.0),
            Sub => (1.0, -1.0),
            Mul => (u2, u1),
            Div => (1.0 / u2, -value / u2),
            Pow => (u2 * u1.powf(u2 - 1.0), value * u1.ln()),
            Neg => (-1.0, 0.0),
            Sin => (u1.cos(), 0.0),
            Cos => (-u1.sin(), 0.0),
            Exp => (value, 0.0),
            Log => (1.0 / u1, 0.0),
            Sqrt => (0.5 / value, 0.0),
            AddConst(_) | SubConstR(_) | Copy => (1.0, 0.0),
            SubConstL(_) => (0.0, -1.0),
            MulConst(c) => (c, 0.0),
            DivConstL(c) => (0.0, -c / (u2 * u2)),
            DivConstR(c) => (1.0 / c, 0.0),
            PowConstExp(c) => (c * u1.powf(c - 1.0), 0.0),
            PowConstBase(c) => (0.0, value * c.ln()),
            Const(_) => (0.0, 0.0),
        }
    }

    /// First and second partials; `value` is `phi(u1, u2)`.
    pub fn partials(self, u1: f64, u2: f64, value: f64) -> Partials {
        use OpKind::*;
        let (d1, d2) = self.first_partials(u1, u2, value);
        let mut p = Partials::first(d1, d2);
        match self {
            Mul => p.d12 = 1.0,
            Div => {
                p.d12 = -1.0 / (u2 * u2);
                p.d22 = 2.0 * value / (u2 * u2);
            }
            Pow => {
                let ln = u1.ln();
                p.d11 = u2 * (u2 - 1.0) * u1.powf(u2 - 2.0);
                p.d12 = u1.powf(u2 - 1.0) * (1.0 + u2 * ln);
                p.d22 = value * ln * ln;
            }
            Sin => p.d11 = -u1.sin(),
            Cos => p.d11 = -u1.cos(),
            Exp => p.d11 = value,
            Log => p.d11 = -1.0 / (u1 * u1),
            Sqrt => p.d11 = -0.25 / (value * u1),
            DivConstL(c) => p.d22 = 2.0 * c / (u2 * u2 * u2),
            PowConstExp(c) => p.d11 = c * (c - 1.0) * u1.powf(c - 2.0),
            PowConstBase(c) => {
                let ln = c.ln();
                p.d22 = value * ln * ln;
            }
            _ => {}
        }
        p
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constant() {
            Some(c) => write!(f, "{}({c:?})", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}
