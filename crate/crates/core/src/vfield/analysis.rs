use super::{BinOp, Expr, Func};

/// Structural facts about `f(t, x)` read off the expression tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Structure {
    /// `f(t, x) = a(t) + b(t)·x`.
    pub affine_in_x: bool,
    /// Affine with a slope `b(t)` bounded over all `t`, hence globally
    /// Lipschitz in `x` uniformly in `t`.
    pub globally_lipschitz: bool,
    pub depends_on_t: bool,
    pub depends_on_x: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    /// Free of `x`; `bounded` tells whether it stays bounded in `t`.
    Free {
        bounded: bool,
        constant: bool,
    },
    /// Affine in `x`; `slope_bounded` tells whether the slope stays bounded.
    Affine {
        slope_bounded: bool,
    },
    Other,
}

pub(super) fn structure(e: &Expr) -> Structure {
    let class = classify(e);
    Structure {
        affine_in_x: matches!(class, Class::Affine { .. } | Class::Free { .. }),
        globally_lipschitz: matches!(class, Class::Affine { slope_bounded: true } | Class::Free { .. }),
        depends_on_t: mentions(e, &Expr::T),
        depends_on_x: mentions(e, &Expr::X),
    }
}

fn mentions(e: &Expr, var: &Expr) -> bool {
    match e {
        Expr::Num(_) => false,
        Expr::T | Expr::X => e == var,
        Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => mentions(a, var),
        Expr::Bin(_, a, b) => mentions(a, var) || mentions(b, var),
    }
}

fn classify(e: &Expr) -> Class {
    use Class::*;
    match e {
        Expr::Num(_) => Free { bounded: true, constant: true },
        Expr::T => Free { bounded: false, constant: false },
        Expr::X => Affine { slope_bounded: true },
        Expr::Neg(a) => classify(a),
        Expr::Func(g, a) => match classify(a) {
            Free { bounded, constant } => {
                let bounded = bounded || matches!(g, Func::Sin | Func::Cos | Func::Tanh);
                Free { bounded, constant }
            }
            _ => Other,
        },
        Expr::Pow(a, k) => match (classify(a), *k) {
            (_, 0) => Free { bounded: true, constant: true },
            (c, 1) => c,
            (Free { bounded, constant }, k) => Free { bounded: constant || (bounded && k > 0), constant },
            _ => Other,
        },
        Expr::Bin(op, a, b) => {
            let (ca, cb) = (classify(a), classify(b));
            match op {
                BinOp::Add | BinOp::Sub => match (ca, cb) {
                    (Free { bounded: b1, constant: c1 }, Free { bounded: b2, constant: c2 }) => {
                        Free { bounded: b1 && b2, constant: c1 && c2 }
                    }
                    (Affine { slope_bounded }, Free { .. }) | (Free { .. }, Affine { slope_bounded }) => {
                        Affine { slope_bounded }
                    }
                    (Affine { slope_bounded: s1 }, Affine { slope_bounded: s2 }) => Affine { slope_bounded: s1 && s2 },
                    _ => Other,
                },
                BinOp::Mul => match (ca, cb) {
                    (Free { bounded: b1, constant: c1 }, Free { bounded: b2, constant: c2 }) => {
                        Free { bounded: b1 && b2, constant: c1 && c2 }
                    }
                    (Affine { slope_bounded }, Free { bounded, .. })
                    | (Free { bounded, .. }, Affine { slope_bounded }) => {
                        Affine { slope_bounded: slope_bounded && bounded }
                    }
                    _ => Other,
                },
                BinOp::Div => {
                    let nonzero_constant = matches!(cb, Free { constant: true, .. })
                        && matches!(super::eval(b, 0.0, 0.0), Ok(v) if v != 0.0);
                    match ca {
                        Free { bounded, constant } => match cb {
                            Free { constant: c2, .. } => {
                                Free { bounded: bounded && nonzero_constant, constant: constant && c2 }
                            }
                            _ => Other,
                        },
                        Affine { slope_bounded } if nonzero_constant => Affine { slope_bounded },
                        _ => Other,
                    }
                }
            }
        }
    }
}
