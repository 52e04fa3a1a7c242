//! Signal temporal logic requirements and their quantitative (robustness)
//! semantics.
//!
//! Formulas are written in a small textual grammar:
//!
//! ```text
//! phi := G[a,b] phi | F[a,b] phi | phi U[a,b] phi
//!      | !phi | phi & phi | phi | phi | phi -> phi | (phi) | true
//!      | expr REL expr
//! expr := c1*ch1 + c2*ch2 + ... + c0
//! REL  := < | <= | > | >=
//! ```
//!
//! Interval bounds are in seconds. Robustness is evaluated on the sample grid
//! of the trace; a negative value means the requirement is violated.

mod parser;
mod robustness;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::parse_stl;
pub use robustness::{robustness, robustness_signal, test_objective, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    /// True for `<` and `<=`: the expression must stay below the bound.
    pub fn is_upper(self) -> bool {
        matches!(self, Relation::Lt | Relation::Le)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        })
    }
}

/// `sum(coeff_i * channel_i) + offset REL 0`, normalized so that the right
/// hand side is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub terms: Vec<(f64, String)>,
    pub offset: f64,
    pub relation: Relation,
}

impl Predicate {
    /// `channel REL bound`
    pub fn simple(channel: &str, relation: Relation, bound: f64) -> Self {
        Predicate {
            terms: vec![(1.0, channel.to_string())],
            offset: -bound,
            relation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StlFormula {
    True,
    Atom(Predicate),
    Not(Box<StlFormula>),
    And(Box<StlFormula>, Box<StlFormula>),
    Or(Box<StlFormula>, Box<StlFormula>),
    Implies(Box<StlFormula>, Box<StlFormula>),
    Globally(Interval, Box<StlFormula>),
    Eventually(Interval, Box<StlFormula>),
    Until(Interval, Box<StlFormula>, Box<StlFormula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi).then_some(Interval { lo, hi })
    }
}

impl StlFormula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: StlFormula) -> Self {
        StlFormula::Not(Box::new(f))
    }

    pub fn and(a: StlFormula, b: StlFormula) -> Self {
        StlFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StlFormula, b: StlFormula) -> Self {
        StlFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: StlFormula, b: StlFormula) -> Self {
        StlFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn globally(lo: f64, hi: f64, f: StlFormula) -> Self {
        StlFormula::Globally(Interval { lo, hi }, Box::new(f))
    }

    pub fn eventually(lo: f64, hi: f64, f: StlFormula) -> Self {
        StlFormula::Eventually(Interval { lo, hi }, Box::new(f))
    }

    pub fn until(lo: f64, hi: f64, a: StlFormula, b: StlFormula) -> Self {
        StlFormula::Until(Interval { lo, hi }, Box::new(a), Box::new(b))
    }

    /// Time span past the evaluation instant that the formula looks at.
    pub fn horizon(&self) -> f64 {
        use StlFormula::*;
        match self {
            True | Atom(_) => 0.0,
            Not(f) => f.horizon(),
            And(a, b) | Or(a, b) | Implies(a, b) => a.horizon().max(b.horizon()),
            Globally(i, f) | Eventually(i, f) => i.hi + f.horizon(),
            Until(i, a, b) => i.hi + a.horizon().max(b.horizon()),
        }
    }

    /// Every channel name referenced by an atomic predicate.
    pub fn channels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let StlFormula::Atom(p) = f {
                for (_, ch) in &p.terms {
                    if !out.contains(&ch.as_str()) {
                        out.push(ch.as_str());
                    }
                }
            }
        });
        out
    }

    fn visit<'a>(&'a self, g: &mut impl FnMut(&'a StlFormula)) {
        use StlFormula::*;
        g(self);
        match self {
            True | Atom(_) => {}
            Not(f) | Globally(_, f) | Eventually(_, f) => f.visit(g),
            And(a, b) | Or(a, b) | Implies(a, b) | Until(_, a, b) => {
                a.visit(g);
                b.visit(g);
            }
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, (c, ch)) in self.terms.iter().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            match (i, sign) {
                (0, "+") => {}
                (0, _) => f.write_str("-")?,
                _ => write!(f, " {sign} ")?,
            }
            if mag == 1.0 {
                write!(f, "{ch}")?;
            } else {
                write!(f, "{mag:?}*{ch}")?;
            }
        }
        // keep the constant on the right so `x < 2` prints as written
        write!(f, " {} {:?}", self.relation, -self.offset)
    }
}

impl fmt::Display for StlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StlFormula::*;
        match self {
            True => f.write_str("true"),
            Atom(p) => write!(f, "({p})"),
            Not(a) => write!(f, "!{a}"),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Implies(a, b) => write!(f, "({a} -> {b})"),
            Globally(i, a) => write!(f, "G[{:?},{:?}] {a}", i.lo, i.hi),
            Eventually(i, a) => write!(f, "F[{:?},{:?}] {a}", i.lo, i.hi),
            Until(i, a, b) => write!(f, "({a} U[{:?},{:?}] {b})", i.lo, i.hi),
        }
    }
}
