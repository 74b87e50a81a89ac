//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula     := implication
//! implication := disjunction ("→" implication)?
//! disjunction := conjunction ("∨" conjunction)*
//! conjunction := negation ("∧" negation)*
//! negation    := "¬" negation | quantified | atom | "(" formula ")" | "⊥"
//! quantified  := ("∀"|"∃") var formula
//! atom        := NAME ("(" term ("," term)* ")")?
//! ```
//!
//! ASCII aliases `~ & | -> Ax. Ex.` are accepted on input. A name in argument
//! position is a variable when an enclosing quantifier binds it, otherwise a
//! constant, so every parsed formula is closed.

use thiserror::Error;

use super::formula::{collect_arities, Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("predicate `{predicate}` used with arity {first} and {second}")]
    Arity {
        predicate: String,
        first: usize,
        second: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    And,
    Or,
    Implies,
    ForAll,
    Exists,
    Bottom,
    LParen,
    RParen,
    Comma,
    Name(String),
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '¬' | '~' => Tok::Not,
            '∧' | '&' => Tok::And,
            '∨' | '|' => Tok::Or,
            '→' => Tok::Implies,
            '∀' => Tok::ForAll,
            '∃' => Tok::Exists,
            '⊥' => Tok::Bottom,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '-' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '>')) => {}
                    _ => {
                        return Err(ParseError::Syntax {
                            offset: i,
                            message: "expected `->`".into(),
                        })
                    }
                }
                Tok::Implies
            }
            c if is_name_start(c) => {
                let start = i;
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if is_name_char(d) {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &text[start..end];
                // `Ax.` / `Ex.` ASCII quantifier aliases.
                if matches!(chars.peek(), Some(&(_, '.')))
                    && word.len() >= 2
                    && (word.starts_with('A') || word.starts_with('E'))
                    && word[1..].starts_with(|ch: char| ch.is_ascii_lowercase())
                {
                    chars.next();
                    let q = if word.starts_with('A') { Tok::ForAll } else { Tok::Exists };
                    out.push((start, q));
                    out.push((start + 1, Tok::Name(word[1..].to_string())));
                } else {
                    out.push((start, Tok::Name(word.to_string())));
                }
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        out.push((i, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    bound: Vec<String>,
    _src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat(&Tok::And) {
            let rhs = self.negation()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::Not(Box::new(self.negation()?)))
            }
            Some(Tok::Bottom) => {
                self.pos += 1;
                Ok(Formula::Falsum)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                Ok(f)
            }
            Some(q @ (Tok::ForAll | Tok::Exists)) => {
                self.pos += 1;
                let var = match self.peek().cloned() {
                    Some(Tok::Name(v)) => v,
                    _ => return self.err("expected variable after quantifier"),
                };
                self.pos += 1;
                self.bound.push(var.clone());
                let body = self.formula();
                self.bound.pop();
                let body = Box::new(body?);
                Ok(if q == Tok::ForAll {
                    Formula::ForAll(var, body)
                } else {
                    Formula::Exists(var, body)
                })
            }
            Some(Tok::Name(pred)) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        match self.peek().cloned() {
                            Some(Tok::Name(n)) => {
                                self.pos += 1;
                                args.push(if self.bound.contains(&n) {
                                    Term::Var(n)
                                } else {
                                    Term::Const(n)
                                });
                            }
                            _ => return self.err("expected term"),
                        }
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        return self.err("expected `,` or `)`");
                    }
                }
                Ok(Formula::Atom { pred, args })
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses one formula; predicate arities must be consistent within it.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        bound: Vec::new(),
        _src: text,
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    check_arities(std::slice::from_ref(&f))?;
    Ok(f)
}

/// Parses several formulas as one batch, enforcing arity consistency across
/// all of them.
pub fn parse_batch<S: AsRef<str>>(texts: &[S]) -> Result<Vec<Formula>, ParseError> {
    let fs = texts
        .iter()
        .map(|t| parse_formula(t.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    check_arities(&fs)?;
    Ok(fs)
}

fn check_arities(fs: &[Formula]) -> Result<(), ParseError> {
    collect_arities(fs.iter())
        .map(|_| ())
        .map_err(|(predicate, first, second)| ParseError::Arity {
            predicate,
            first,
            second,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::*;

    #[test]
    fn parses_propositional_example() {
        let f = parse_formula("¬C → ¬(F ∧ ¬E)").unwrap();
        assert_eq!(f, implies(not(prop("C")), not(and(prop("F"), not(prop("E"))))));
    }

    #[test]
    fn parses_ground_atom() {
        assert_eq!(parse_formula("A(a)").unwrap(), atom("A", &["a"]));
    }

    #[test]
    fn parses_quantified_implication() {
        let f = parse_formula("∀x (A(x) → B(x))").unwrap();
        assert_eq!(f, forall("x", implies(var_atom("A", "x"), var_atom("B", "x"))));
    }

    #[test]
    fn ascii_aliases() {
        let f = parse_formula("Ax.(A(x) -> ~B(x) | C & D)").unwrap();
        let g = parse_formula("∀x (A(x) → ¬B(x) ∨ C ∧ D)").unwrap();
        assert_eq!(f, g);
        let e = parse_formula("Ey.A(y)").unwrap();
        assert_eq!(e, exists("y", var_atom("A", "y")));
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("A ∧ B ∨ C → D → E").unwrap();
        let expected = implies(
            or(and(prop("A"), prop("B")), prop("C")),
            implies(prop("D"), prop("E")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let f = parse_formula("∀x A(x) ∧ B").unwrap();
        assert_eq!(f, forall("x", and(var_atom("A", "x"), prop("B"))));
    }

    #[test]
    fn syntax_error_reports_offset() {
        match parse_formula("A(a) ∧") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, "A(a) ∧".len()),
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("A(a) $ B") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_error() {
        assert!(matches!(
            parse_formula("A(a) ∧ A(a,b)"),
            Err(ParseError::Arity { .. })
        ));
        assert!(matches!(
            parse_batch(&["A(a)", "A"]),
            Err(ParseError::Arity { .. })
        ));
    }
}
