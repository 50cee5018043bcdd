//! Operator-overloading tape recorder.

use std::cell::{Cell, RefCell};
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{Graph, Node, OpKind};
use crate::error::{Error, Result};

/// Records operations on [`Var`] handles into a node table.
///
/// A recorder is single-threaded. Mixing handles from two recorders does not
/// panic; the first such use is remembered and reported by [`Recorder::finish`].
pub struct Recorder {
    n: usize,
    nodes: RefCell<Vec<Node>>,
    failure: Cell<Option<&'static str>>,
}

/// Handle to a recorded node.
#[derive(Clone, Copy)]
pub struct Var<'r> {
    index: u32,
    tape: &'r Recorder,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var({})", self.index as usize + 1)
    }
}

impl Recorder {
    pub fn new(n: usize) -> Self {
        Recorder {
            n,
            nodes: RefCell::new(Vec::new()),
            failure: Cell::new(None),
        }
    }

    /// Handles for the `n` independent variables.
    pub fn independents(&self) -> Vec<Var<'_>> {
        (0..self.n)
            .map(|j| Var {
                index: j as u32,
                tape: self,
            })
            .collect()
    }

    /// Records the constant `c` as a node that depends on nothing.
    pub fn constant(&self, c: f64) -> Var<'_> {
        self.push(Node::new(OpKind::Const(c), 0, 0))
    }

    /// Records `c ^ u`.
    pub fn const_pow<'r>(&'r self, c: f64, u: Var<'r>) -> Var<'r> {
        self.check(u);
        self.unary(OpKind::PowConstBase(c), u)
    }

    /// Current node count, independents included.
    pub fn len(&self) -> usize {
        self.n + self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends one `Copy` node per dependent so dependents occupy the tail,
    /// and returns the finished graph. The recorder is left empty.
    pub fn finish(&self, dependents: &[Var<'_>]) -> Result<Graph> {
        if let Some(why) = self.failure.get() {
            return Err(Error::Record(why.into()));
        }
        if dependents.is_empty() {
            return Err(Error::Record("no dependent variables".into()));
        }
        if dependents.iter().any(|y| !std::ptr::eq(y.tape, self)) {
            return Err(Error::Record("dependent belongs to a different recorder".into()));
        }
        let mut nodes = self.nodes.take();
        nodes.extend(dependents.iter().map(|y| Node {
            op: OpKind::Copy,
            a: y.index,
            b: y.index,
        }));
        Graph::new(self.n, dependents.len(), nodes)
    }

    fn push(&self, node: Node) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(node);
        Var {
            index: (self.n + nodes.len() - 1) as u32,
            tape: self,
        }
    }

    fn check(&self, u: Var<'_>) {
        if !std::ptr::eq(u.tape, self) && self.failure.get().is_none() {
            self.failure
                .set(Some("operand handle from a different recorder"));
        }
    }

    fn unary<'r>(&'r self, op: OpKind, u: Var<'r>) -> Var<'r> {
        self.push(Node {
            op,
            a: u.index,
            b: u.index,
        })
    }

    fn binary<'r>(&'r self, op: OpKind, u: Var<'r>, w: Var<'r>) -> Var<'r> {
        self.check(u);
        self.check(w);
        self.push(Node {
            op,
            a: u.index,
            b: w.index,
        })
    }
}

/// Records a program with `n` independents and returns its graph.
///
/// ```
/// use sparsead::graph::record;
/// let g = record(3, |x| {
///     let s = x[0] + x[1];
///     vec![s, x[2] * s]
/// })
/// .unwrap();
/// assert_eq!(g.ell(), 7);
/// ```
pub fn record<F>(n: usize, program: F) -> Result<Graph>
where
    F: for<'r> FnOnce(&[Var<'r>]) -> Vec<Var<'r>>,
{
    let rec = Recorder::new(n);
    let x = rec.independents();
    let y = program(&x);
    rec.finish(&y)
}

impl<'r> Var<'r> {
    /// 0-based node index.
    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn recorder(self) -> &'r Recorder {
        self.tape
    }

    fn un(self, op: OpKind) -> Var<'r> {
        self.tape.unary(op, self)
    }

    pub fn sin(self) -> Var<'r> {
        self.un(OpKind::Sin)
    }

    pub fn cos(self) -> Var<'r> {
        self.un(OpKind::Cos)
    }

    pub fn exp(self) -> Var<'r> {
        self.un(OpKind::Exp)
    }

    /// Natural logarithm.
    pub fn ln(self) -> Var<'r> {
        self.un(OpKind::Log)
    }

    pub fn sqrt(self) -> Var<'r> {
        self.un(OpKind::Sqrt)
    }

    pub fn powf(self, c: f64) -> Var<'r> {
        self.un(OpKind::PowConstExp(c))
    }

    pub fn pow(self, e: Var<'r>) -> Var<'r> {
        self.tape.binary(OpKind::Pow, self, e)
    }

    pub fn copy(self) -> Var<'r> {
        self.un(OpKind::Copy)
    }

    /// Records `self` under an explicit operator kind; `Const` ignores `self`.
    pub fn apply_unary(self, op: OpKind) -> Var<'r> {
        self.un(op)
    }

    /// Records a binary operator kind on `(self, rhs)`.
    pub fn apply_binary(self, op: OpKind, rhs: Var<'r>) -> Var<'r> {
        self.tape.binary(op, self, rhs)
    }
}

macro_rules! binary_ops {
    ($tr:ident, $method:ident, $op:expr, $const_rhs:expr, $const_lhs:expr) => {
        impl<'r> $tr<Var<'r>> for Var<'r> {
            type Output = Var<'r>;
            fn $method(self, rhs: Var<'r>) -> Var<'r> {
                self.tape.binary($op, self, rhs)
            }
        }
        impl<'r> $tr<f64> for Var<'r> {
            type Output = Var<'r>;
            fn $method(self, c: f64) -> Var<'r> {
                self.un($const_rhs(c))
            }
        }
        impl<'r> $tr<Var<'r>> for f64 {
            type Output = Var<'r>;
            fn $method(self, u: Var<'r>) -> Var<'r> {
                u.un($const_lhs(self))
            }
        }
    };
}

binary_ops!(Add, add, OpKind::Add, OpKind::AddConst, OpKind::AddConst);
binary_ops!(Sub, sub, OpKind::Sub, OpKind::SubConstR, OpKind::SubConstL);
binary_ops!(Mul, mul, OpKind::Mul, OpKind::MulConst, OpKind::MulConst);
binary_ops!(Div, div, OpKind::Div, OpKind::DivConstR, OpKind::DivConstL);

impl<'r> Neg for Var<'r> {
    type Output = Var<'r>;
    fn neg(self) -> Var<'r> {
        self.un(OpKind::Neg)
    }
}
