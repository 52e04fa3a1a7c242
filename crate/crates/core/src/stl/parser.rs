use super::{Interval, Predicate, Relation, StlFormula};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Globally,
    Eventually,
    Until,
    True,
    LBracket,
    RBracket,
    Comma,
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Rel(Relation),
    Plus,
    Minus,
    Star,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |pos: usize, msg: &str| Error::Syntax {
        pos,
        msg: msg.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '!' => Tok::Not,
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    i += 1;
                }
                Tok::And
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    i += 1;
                }
                Tok::Or
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Implies
            }
            '-' => Tok::Minus,
            '<' | '>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                if eq {
                    i += 1;
                }
                Tok::Rel(match (c, eq) {
                    ('<', false) => Relation::Lt,
                    ('<', true) => Relation::Le,
                    ('>', false) => Relation::Gt,
                    _ => Relation::Ge,
                })
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let v: f64 = text[i..j]
                    .parse()
                    .map_err(|_| syntax(i, "malformed number"))?;
                i = j - 1;
                Tok::Num(v)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &text[i..j];
                let mut k = j;
                while k < bytes.len() && (bytes[k] as char).is_whitespace() {
                    k += 1;
                }
                let bracket = bytes.get(k) == Some(&b'[');
                i = j - 1;
                match word {
                    "G" if bracket => Tok::Globally,
                    "F" if bracket => Tok::Eventually,
                    "U" if bracket => Tok::Until,
                    "true" => Tok::True,
                    _ => Tok::Ident(word.to_string()),
                }
            }
            _ => return Err(syntax(i, &format!("unexpected character `{c}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    channels: &'a [&'a str],
}

/// Linear expression under construction.
#[derive(Default)]
struct Linear {
    terms: Vec<(f64, String)>,
    constant: f64,
}

impl Linear {
    fn add_term(&mut self, c: f64, name: &str) {
        match self.terms.iter_mut().find(|(_, n)| n == name) {
            Some((k, _)) => *k += c,
            None => self.terms.push((c, name.to_string())),
        }
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn formula(&mut self) -> Result<StlFormula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.formula()?;
            return Ok(StlFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<StlFormula> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = StlFormula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<StlFormula> {
        let mut f = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = StlFormula::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<StlFormula> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let i = self.interval()?;
            let rhs = self.unary()?;
            return Ok(StlFormula::Until(i, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<StlFormula> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(StlFormula::not(self.unary()?))
            }
            Tok::Globally => {
                self.bump();
                let i = self.interval()?;
                Ok(StlFormula::Globally(i, Box::new(self.unary()?)))
            }
            Tok::Eventually => {
                self.bump();
                let i = self.interval()?;
                Ok(StlFormula::Eventually(i, Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::True => {
                self.bump();
                Ok(StlFormula::True)
            }
            _ => self.atom(),
        }
    }

    fn interval(&mut self) -> Result<Interval> {
        let pos = self.pos();
        self.expect(Tok::LBracket, "`[`")?;
        let lo = self.number()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.number()?;
        self.expect(Tok::RBracket, "`]`")?;
        Interval::new(lo, hi).ok_or(Error::Interval { lo, hi, pos })
    }

    fn number(&mut self) -> Result<f64> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match self.bump() {
            Tok::Num(v) => Ok(if neg { -v } else { v }),
            t => {
                self.at -= 1;
                self.err(format!("expected number, found {t:?}"))
            }
        }
    }

    fn atom(&mut self) -> Result<StlFormula> {
        let lhs = self.expr()?;
        let relation = match self.bump() {
            Tok::Rel(r) => r,
            t => {
                if t != Tok::End {
                    self.at -= 1;
                }
                return self.err("expected a comparison (<, <=, >, >=)");
            }
        };
        let rhs = self.expr()?;
        let mut lin = lhs;
        for (c, n) in rhs.terms {
            lin.add_term(-c, &n);
        }
        lin.constant -= rhs.constant;
        Ok(StlFormula::Atom(Predicate {
            terms: lin.terms,
            offset: lin.constant,
            relation,
        }))
    }

    fn expr(&mut self) -> Result<Linear> {
        let mut lin = Linear::default();
        let mut sign = 1.0;
        if *self.peek() == Tok::Minus {
            self.bump();
            sign = -1.0;
        }
        loop {
            self.term(sign, &mut lin)?;
            match self.peek() {
                Tok::Plus => sign = 1.0,
                Tok::Minus => sign = -1.0,
                _ => return Ok(lin),
            }
            self.bump();
        }
    }

    fn term(&mut self, sign: f64, lin: &mut Linear) -> Result<()> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => {
                if *self.peek() == Tok::Star {
                    self.bump();
                    let pos = self.pos();
                    match self.bump() {
                        Tok::Ident(name) => {
                            self.resolve(&name, pos)?;
                            lin.add_term(sign * v, &name);
                        }
                        _ => {
                            self.at -= 1;
                            return self.err("expected a channel name after `*`");
                        }
                    }
                } else {
                    lin.constant += sign * v;
                }
                Ok(())
            }
            Tok::Ident(name) => {
                self.resolve(&name, pos)?;
                lin.add_term(sign, &name);
                Ok(())
            }
            t => {
                if t != Tok::End {
                    self.at -= 1;
                }
                self.err(format!("expected a number or channel, found {t:?}"))
            }
        }
    }

    fn resolve(&self, name: &str, pos: usize) -> Result<()> {
        if self.channels.contains(&name) {
            Ok(())
        } else {
            Err(Error::UnknownChannel {
                name: name.to_string(),
                pos,
            })
        }
    }
}

/// Parses `text` against the declared output channel names.
pub fn parse_stl<S: AsRef<str>>(text: &str, output_channels: &[S]) -> Result<StlFormula> {
    let names: Vec<&str> = output_channels.iter().map(AsRef::as_ref).collect();
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        channels: &names,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected trailing input {:?}", p.peek()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn globally_error_requirement() {
        let f = parse_stl("G[0,86400] (error < 2)", &["error"]).unwrap();
        assert_eq!(
            f,
            StlFormula::globally(
                0.0,
                86400.0,
                StlFormula::Atom(Predicate::simple("error", Relation::Lt, 2.0))
            )
        );
    }

    #[test]
    fn eventually_maps_directly() {
        let f = parse_stl("F[0,10] (x > 7)", &["x"]).unwrap();
        assert!(matches!(
            f,
            StlFormula::Eventually(Interval { lo: 0.0, hi: 10.0 }, _)
        ));
    }

    #[test]
    fn reversed_interval_is_rejected() {
        let e = parse_stl("G[5,3] (x<1)", &["x"]).unwrap_err();
        assert!(
            matches!(e, Error::Interval { lo, hi, pos: 1 } if lo == 5.0 && hi == 3.0),
            "{e:?}"
        );
    }

    #[test]
    fn unknown_channel_reports_position() {
        let e = parse_stl("G[0,1] (y < 1)", &["x"]).unwrap_err();
        assert!(
            matches!(e, Error::UnknownChannel { ref name, pos: 8 } if name == "y"),
            "{e:?}"
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(
            parse_stl("G[0,1] (x 1)", &["x"]),
            Err(Error::Syntax { pos: 10, .. })
        ));
        assert!(matches!(
            parse_stl("x < 1 &", &["x"]),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_stl("x < 1 $", &["x"]),
            Err(Error::Syntax { pos: 6, .. })
        ));
    }

    #[test]
    fn affine_predicates_and_precedence() {
        let f = parse_stl(
            "!a > 1 & 2*a - 0.5*b + 3 <= 1 | a < b -> G[0,2] F[1,2] b >= -1e-3",
            &["a", "b"],
        )
        .unwrap();
        let StlFormula::Implies(lhs, rhs) = f else {
            panic!("implies should bind loosest")
        };
        assert!(matches!(*lhs, StlFormula::Or(..)));
        assert!(matches!(*rhs, StlFormula::Globally(..)));
        let g = parse_stl("2*a - 0.5*b + 3 <= 1", &["a", "b"]).unwrap();
        let StlFormula::Atom(p) = g else { panic!() };
        assert_eq!(p.terms, vec![(2.0, "a".into()), (-0.5, "b".into())]);
        assert_eq!(p.offset, 2.0);
        assert_eq!(p.relation, Relation::Le);
    }

    #[test]
    fn until_and_true() {
        let f = parse_stl("true U[0,5] (x > 1)", &["x"]).unwrap();
        assert!(matches!(f, StlFormula::Until(_, ref a, _) if **a == StlFormula::True));
    }

    #[test]
    fn display_reparses() {
        let src = "G[0,10] ((x - 2*y < 3) -> F[1,2.5] !(y >= -1)) | ((x > 0) U[0,1] (y > 0))";
        let f = parse_stl(src, &["x", "y"]).unwrap();
        let again = parse_stl(&f.to_string(), &["x", "y"]).unwrap();
        assert_eq!(f, again);
    }
}
