use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Variable(String),
    Int(i64),
    Str(String),
    If,
    Dot,
    Comma,
    Bar,
    Amp,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
}

impl Token {
    pub fn describe(&self) -> String {
        match self {
            Token::Ident(s) | Token::Variable(s) => format!("'{s}'"),
            Token::Int(i) => format!("'{i}'"),
            Token::Str(s) => format!("string \"{s}\""),
            Token::If => "':-'".into(),
            Token::Dot => "'.'".into(),
            Token::Comma => "','".into(),
            Token::Bar => "'|'".into(),
            Token::Amp => "'&'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::LBracket => "'['".into(),
            Token::RBracket => "']'".into(),
            Token::Lt => "'<'".into(),
            Token::Gt => "'>'".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub token: Token,
    pub pos: Pos,
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        let syntax = |msg: String| ParseError::Syntax {
            line: pos.line,
            column: pos.column,
            message: msg,
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let token = match c {
            '.' => {
                bump!();
                Token::Dot
            }
            ',' => {
                bump!();
                Token::Comma
            }
            '|' => {
                bump!();
                Token::Bar
            }
            '&' => {
                bump!();
                Token::Amp
            }
            '(' => {
                bump!();
                Token::LParen
            }
            ')' => {
                bump!();
                Token::RParen
            }
            '[' => {
                bump!();
                Token::LBracket
            }
            ']' => {
                bump!();
                Token::RBracket
            }
            '<' => {
                bump!();
                Token::Lt
            }
            '>' => {
                bump!();
                Token::Gt
            }
            ':' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    bump!();
                    Token::If
                } else {
                    return Err(syntax("expected ':-'".into()));
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(syntax("unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('n') => s.push('\n'),
                            Some(c @ ('"' | '\\')) => s.push(c),
                            Some(c) => return Err(syntax(format!("invalid escape '\\{c}'"))),
                            None => return Err(syntax("unterminated string".into())),
                        },
                        Some(c) => s.push(c),
                    }
                }
                Token::Str(s)
            }
            c if c == '-' || c.is_ascii_digit() => {
                let mut s = String::new();
                if c == '-' {
                    s.push('-');
                    bump!();
                }
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        bump!();
                    } else {
                        break;
                    }
                }
                if s == "-" {
                    return Err(syntax("expected digits after '-'".into()));
                }
                let value = s
                    .parse::<i64>()
                    .map_err(|_| syntax(format!("integer out of range: {s}")))?;
                Token::Int(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        bump!();
                    } else {
                        break;
                    }
                }
                if s.starts_with('_') {
                    return Err(syntax(format!("anonymous variables are not supported: {s}")));
                }
                if s.starts_with(|c: char| c.is_ascii_uppercase()) {
                    Token::Variable(s)
                } else {
                    Token::Ident(s)
                }
            }
            other => return Err(syntax(format!("unexpected character '{other}'"))),
        };
        out.push(Spanned { token, pos });
    }
    Ok(out)
}
