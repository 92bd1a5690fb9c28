use crate::error::{Error, Pos, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SExpr {
    pub pos: Pos,
    pub kind: SExprKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExprKind {
    Token(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn token(&self) -> Option<&str> {
        match &self.kind {
            SExprKind::Token(t) => Some(t),
            SExprKind::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match &self.kind {
            SExprKind::List(items) => Some(items),
            SExprKind::Token(_) => None,
        }
    }

    /// Reads exactly one expression; trailing non-whitespace is an error.
    pub fn parse(text: &str) -> Result<SExpr> {
        let mut reader = Reader::new(text);
        let e = reader.expr()?;
        reader.skip_ws();
        if let Some(pos) = reader.peek_pos() {
            return Err(syntax(pos, "trailing input after expression"));
        }
        Ok(e)
    }

    /// Reads a whitespace-separated sequence of expressions.
    pub fn parse_many(text: &str) -> Result<Vec<SExpr>> {
        let mut reader = Reader::new(text);
        let mut out = Vec::new();
        loop {
            reader.skip_ws();
            if reader.peek_pos().is_none() {
                return Ok(out);
            }
            out.push(reader.expr()?);
        }
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn peek_pos(&mut self) -> Option<Pos> {
        let pos = self.pos();
        self.chars.peek().map(|_| pos)
    }

    fn expr(&mut self) -> Result<SExpr> {
        self.skip_ws();
        let pos = self.pos();
        match self.chars.peek().copied() {
            None => Err(syntax(pos, "unexpected end of input")),
            Some(')') => Err(syntax(pos, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(syntax(pos, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
                Ok(SExpr {
                    pos,
                    kind: SExprKind::List(items),
                })
            }
            Some(_) => {
                let mut tok = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.push(c);
                    self.bump();
                }
                Ok(SExpr {
                    pos,
                    kind: SExprKind::Token(tok),
                })
            }
        }
    }
}
