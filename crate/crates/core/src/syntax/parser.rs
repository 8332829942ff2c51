use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Pos, Spanned, Token};
use super::ParseError;

/// Parses program text into a [`Program`].
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text)?;
    let end = tokens.last().map(|t| t.pos).unwrap_or(Pos { line: 1, column: 1 });
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end,
        arities: HashMap::new(),
    };
    let mut rules = Vec::new();
    while !parser.at_end() {
        rules.push(parser.rule()?);
    }
    Ok(Program { rules })
}

struct Parser {
    tokens: Vec<Spanned>,
    cursor: usize,
    end: Pos,
    arities: HashMap<String, usize>,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.cursor >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|t| &t.token)
    }

    fn pos(&self) -> Pos {
        self.tokens.get(self.cursor).map(|t| t.pos).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).map(|t| t.token.clone());
        self.cursor += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let pos = self.pos();
        ParseError::Syntax {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {}", t.describe())),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&token) {
            self.cursor += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.cursor += 1;
            true
        } else {
            false
        }
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let mut rule = Rule::default();
        if self.peek() != Some(&Token::If) {
            rule.head.push(self.ordinary_atom()?);
            loop {
                match self.peek() {
                    Some(Token::Bar) => {
                        self.cursor += 1;
                    }
                    Some(Token::Ident(v)) if v == "v" => {
                        self.cursor += 1;
                    }
                    _ => break,
                }
                rule.head.push(self.ordinary_atom()?);
            }
        }
        if self.eat(&Token::If) {
            loop {
                let negated = matches!(self.peek(), Some(Token::Ident(k)) if k == "not" || k == "naf");
                if negated {
                    self.cursor += 1;
                }
                let lit = self.body_atom()?;
                if negated {
                    rule.body_neg.push(lit);
                } else {
                    rule.body_pos.push(lit);
                }
                if !self.eat(&Token::Comma) {
                    break;
                }
            }
        }
        if rule.head.is_empty() && rule.body_pos.is_empty() && rule.body_neg.is_empty() {
            return Err(self.error("empty rule"));
        }
        self.expect(Token::Dot, "'.'")?;
        Ok(rule)
    }

    fn body_atom(&mut self) -> Result<BodyAtom, ParseError> {
        if self.peek() == Some(&Token::Amp) {
            Ok(BodyAtom::External(self.external_atom()?))
        } else {
            Ok(BodyAtom::Ordinary(self.ordinary_atom()?))
        }
    }

    fn ordinary_atom(&mut self) -> Result<Atom, ParseError> {
        let pos = self.pos();
        let predicate = match self.peek() {
            Some(Token::Ident(name)) => name.clone(),
            _ => return Err(self.unexpected("atom")),
        };
        self.cursor += 1;
        let args = if self.eat(&Token::LParen) {
            self.term_list(Token::RParen)?
        } else {
            Vec::new()
        };
        let atom = Atom { predicate, args };
        self.check_arity(&atom, pos)?;
        Ok(atom)
    }

    fn check_arity(&mut self, atom: &Atom, pos: Pos) -> Result<(), ParseError> {
        match self.arities.get(&atom.predicate) {
            Some(&known) if known != atom.arity() => Err(ParseError::ArityClash {
                predicate: atom.predicate.clone(),
                expected: known,
                found: atom.arity(),
                line: pos.line,
                column: pos.column,
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(atom.predicate.clone(), atom.arity());
                Ok(())
            }
        }
    }

    /// Comma-separated terms up to (and consuming) `close`; may be empty.
    fn term_list(&mut self, close: Token) -> Result<Vec<Term>, ParseError> {
        let mut terms = Vec::new();
        if self.eat(&close) {
            return Ok(terms);
        }
        loop {
            terms.push(self.term()?);
            if self.eat(&Token::Comma) {
                continue;
            }
            self.expect(close.clone(), &close.describe())?;
            return Ok(terms);
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.next() {
            Some(Token::Int(i)) => Ok(Term::Int(i)),
            Some(Token::Str(s)) => Ok(Term::Str(s)),
            Some(Token::Variable(v)) => Ok(Term::Variable(v)),
            Some(Token::Ident(name)) => {
                if self.eat(&Token::LParen) {
                    let args = self.term_list(Token::RParen)?;
                    if args.is_empty() {
                        self.cursor -= 1;
                        return Err(self.error(format!("function term {name}() needs arguments")));
                    }
                    Ok(Term::Function(name, args))
                } else {
                    Ok(Term::Symbol(name))
                }
            }
            _ => {
                self.cursor -= 1;
                Err(self.unexpected("term"))
            }
        }
    }

    fn external_atom(&mut self) -> Result<ExternalAtom, ParseError> {
        self.expect(Token::Amp, "'&'")?;
        let name = match self.next() {
            Some(Token::Ident(name)) => name,
            _ => {
                self.cursor -= 1;
                return Err(self.unexpected("external predicate name"));
            }
        };
        let inputs = if self.eat(&Token::LBracket) {
            self.term_list(Token::RBracket)?
        } else {
            Vec::new()
        };
        let outputs = if self.eat(&Token::LParen) {
            self.term_list(Token::RParen)?
        } else {
            Vec::new()
        };
        let mut ext = ExternalAtom::new(name, inputs, outputs);
        if self.eat(&Token::Lt) {
            ext.tag_properties = self.property_tag(&ext)?;
        }
        Ok(ext)
    }

    fn property_tag(&mut self, ext: &ExternalAtom) -> Result<Vec<PropertySpec>, ParseError> {
        let mut props = Vec::new();
        if self.eat(&Token::Gt) {
            return Ok(props);
        }
        loop {
            let pos = self.pos();
            let malformed = |token: String, reason: String| ParseError::MalformedPropertyTag {
                token,
                reason,
                line: pos.line,
                column: pos.column,
            };
            let word = match self.next() {
                Some(Token::Ident(w)) => w,
                Some(other) => return Err(malformed(other.describe(), "expected a property type".into())),
                None => return Err(self.unexpected("property type")),
            };
            let ptype = PropertyType::from_keyword(&word)
                .ok_or_else(|| malformed(word.clone(), "unknown property type".into()))?;
            let mut params = Vec::new();
            loop {
                match self.peek() {
                    Some(Token::Ident(s)) => params.push(PropertyParam::Symbol(s.clone())),
                    Some(Token::Int(i)) if *i >= 0 => params.push(PropertyParam::Index(*i as usize)),
                    Some(Token::Int(i)) => return Err(malformed(i.to_string(), "negative property parameter".into())),
                    Some(Token::Comma) | Some(Token::Gt) => break,
                    Some(other) => return Err(malformed(other.describe(), format!("invalid parameter for {word}"))),
                    None => return Err(self.unexpected("'>'")),
                }
                self.cursor += 1;
            }
            let spec = PropertySpec::new(ptype, params);
            validate_property(&spec, ext).map_err(|reason| malformed(word.clone(), reason))?;
            props.push(spec);
            if self.eat(&Token::Gt) {
                return Ok(props);
            }
            self.expect(Token::Comma, "',' or '>'")?;
        }
    }
}

/// Checks parameter count and index ranges of a property against the
/// external atom it is attached to.
pub fn validate_property(spec: &PropertySpec, ext: &ExternalAtom) -> Result<(), String> {
    let (lo, hi) = spec.ptype.param_range();
    let n = spec.params.len();
    if n < lo || n > hi {
        return Err(if lo == hi {
            format!("{} takes {lo} parameter(s), got {n}", spec.ptype)
        } else {
            format!("{} takes {lo} to {hi} parameter(s), got {n}", spec.ptype)
        });
    }
    let input_index = |pos: usize| -> Result<(), String> {
        match spec.index(pos) {
            Some(i) if i < ext.inputs.len() => Ok(()),
            Some(i) => Err(format!("input index {i} out of range (arity {})", ext.inputs.len())),
            None => Err(format!("{} expects an input index", spec.ptype)),
        }
    };
    let output_index = |pos: usize| -> Result<(), String> {
        match spec.index(pos) {
            Some(j) if j < ext.outputs.len() => Ok(()),
            Some(j) => Err(format!("output index {j} out of range (arity {})", ext.outputs.len())),
            None => Err(format!("{} expects an output index", spec.ptype)),
        }
    };
    match spec.ptype {
        PropertyType::Monotonic | PropertyType::Antimonotonic => match spec.params.first() {
            None => Ok(()),
            Some(PropertyParam::Symbol(p)) => {
                if ext.inputs.iter().any(|t| t.as_symbol() == Some(p.as_str())) {
                    Ok(())
                } else {
                    Err(format!("'{p}' is not an input of &{}", ext.name))
                }
            }
            Some(PropertyParam::Index(_)) => input_index(0),
        },
        PropertyType::FiniteDomain => output_index(0),
        PropertyType::RelativeFiniteDomain | PropertyType::WellOrdering | PropertyType::WellOrderingStrlen => {
            input_index(0)?;
            output_index(1)
        }
        _ => Ok(()),
    }
}
