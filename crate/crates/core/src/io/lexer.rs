use super::IoError;

#[derive(Debug, Clone, Copy)]
pub(super) struct Token<'a> {
    pub text: &'a str,
    pub line: usize,
    pub column: usize,
}

pub(super) struct Lexer<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Lexer<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut end = (1, 1);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let mut start = None;
            for (j, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
                match (c.is_whitespace(), start) {
                    (false, None) => start = Some(j),
                    (true, Some(s)) => {
                        tokens.push(Token {
                            text: &line[s..j],
                            line: i + 1,
                            column: line[..s].chars().count() + 1,
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
            end = (i + 1, raw.chars().count() + 1);
        }
        Lexer { tokens, pos: 0, end }
    }

    pub fn line(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end.0, |t| t.line)
    }

    /// Line of the most recently consumed token.
    pub fn last_line(&self) -> usize {
        self.pos.checked_sub(1).map_or(1, |p| self.tokens[p].line)
    }

    pub fn error(&self, expected: &str) -> IoError {
        match self.tokens.get(self.pos) {
            Some(t) => IoError::Parse {
                line: t.line,
                column: t.column,
                expected: expected.into(),
                found: format!("`{}`", t.text),
            },
            None => IoError::Parse {
                line: self.end.0,
                column: self.end.1,
                expected: expected.into(),
                found: "end of input".into(),
            },
        }
    }

    fn next_with<T>(&mut self, expected: &str, f: impl Fn(&str) -> Option<T>) -> Result<T, IoError> {
        match self.tokens.get(self.pos).and_then(|t| f(t.text)) {
            Some(v) => {
                self.pos += 1;
                Ok(v)
            }
            None => Err(self.error(expected)),
        }
    }

    pub fn keyword(&mut self, word: &str) -> Result<(), IoError> {
        self.next_with(&format!("`{word}`"), |t| (t == word).then_some(()))
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.text)
    }

    pub fn count(&mut self, what: &str) -> Result<usize, IoError> {
        self.next_with(what, |t| t.parse::<usize>().ok())
    }

    /// A count bounded by `max`, to keep corrupted files from allocating.
    pub fn bounded(&mut self, what: &str, max: usize) -> Result<usize, IoError> {
        let expected = format!("{what} (at most {max})");
        self.next_with(&expected, |t| t.parse::<usize>().ok().filter(|&n| n <= max))
    }

    pub fn float(&mut self, what: &str) -> Result<f64, IoError> {
        self.next_with(what, |t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    pub fn finish(&self) -> Result<(), IoError> {
        if self.pos < self.tokens.len() {
            Err(self.error("end of input"))
        } else {
            Ok(())
        }
    }
}
