//! Recursive-descent parser producing an [`ast::Program`](super::ast::Program).

use super::ast::*;
use super::lexer::{Keyword, Token, TokenKind};
use super::{Diagnostic, Pos};

pub fn parse(tokens: &[Token]) -> Result<Program, Vec<Diagnostic>> {
    let mut p = Parser {
        tokens,
        idx: 0,
        next_id: 0,
    };
    p.program().map_err(|d| vec![d])
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    tokens: &'a [Token],
    idx: usize,
    next_id: u32,
}

impl<'a> Parser<'a> {
    fn fresh_id(&mut self) -> NodeId {
        self.next_id += 1;
        NodeId(self.next_id)
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.idx)
    }

    fn peek_kind(&self, off: usize) -> Option<&'a TokenKind> {
        self.tokens.get(self.idx + off).map(|t| &t.kind)
    }

    fn pos(&self) -> Pos {
        match self.peek() {
            Some(t) => t.pos,
            None => self
                .tokens
                .last()
                .map(|t| Pos::new(t.pos.line, t.pos.col + t.lexeme.chars().count() as u32))
                .unwrap_or(Pos::new(1, 1)),
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => t.kind.to_string(),
            None => "end of input".to_string(),
        }
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            format!("expected {expected}, found {}", self.found()),
            self.pos(),
        ))
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek_kind(0), Some(TokenKind::Punct(p)) if *p == c)
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek_kind(0), Some(TokenKind::Op(o)) if *o == op)
    }

    fn is_keyword(&self, k: Keyword) -> bool {
        matches!(self.peek_kind(0), Some(TokenKind::Keyword(kw)) if *kw == k)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            self.unexpected(&format!("`{c}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(s),
                pos,
                ..
            }) => {
                self.idx += 1;
                Ok((s.clone(), *pos))
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn base_type(&mut self) -> PResult<BaseType> {
        let ty = match self.peek_kind(0) {
            Some(TokenKind::Keyword(Keyword::Bit)) => BaseType::Bit,
            Some(TokenKind::Keyword(Keyword::Int)) => BaseType::Int,
            Some(TokenKind::Keyword(Keyword::Void)) => BaseType::Void,
            _ => return self.unexpected("type (`bit`, `int` or `void`)"),
        };
        self.idx += 1;
        Ok(ty)
    }

    fn at_type(&self) -> bool {
        matches!(
            self.peek_kind(0),
            Some(TokenKind::Keyword(Keyword::Bit | Keyword::Int | Keyword::Void))
        )
    }

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        while self.peek().is_some() {
            items.push(self.item()?);
        }
        Ok(Program { items })
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.pos();
        let attr = match self.peek_kind(0) {
            Some(TokenKind::Attribute(a)) => {
                self.idx += 1;
                Some(*a)
            }
            _ => None,
        };
        let ty = self.base_type()?;
        if attr.is_none() && self.is_punct('[') {
            // `bit[8] name(...)` - a function returning a bit array.
            self.idx += 1;
            let len = self.expr()?;
            self.expect_punct(']')?;
            let (name, _) = self.ident()?;
            return self.function_rest(start, ty, Some(len), name).map(Item::Function);
        }
        let (name, _) = self.ident()?;
        if attr.is_none() && self.is_punct('(') {
            return self.function_rest(start, ty, None, name).map(Item::Function);
        }
        self.decl_rest(start, attr, ty, name).map(Item::Global)
    }

    fn function_rest(
        &mut self,
        start: Pos,
        ret: BaseType,
        ret_len: Option<Expr>,
        name: String,
    ) -> PResult<FunctionDecl> {
        let id = self.fresh_id();
        self.expect_punct('(')?;
        let mut params = Vec::new();
        if !self.is_punct(')') {
            loop {
                let ppos = self.pos();
                let ty = self.base_type()?;
                let (pname, _) = self.ident()?;
                let len = if self.eat_punct('[') {
                    let e = self.expr()?;
                    self.expect_punct(']')?;
                    Some(e)
                } else {
                    None
                };
                params.push(Param {
                    id: self.fresh_id(),
                    ty,
                    name: pname,
                    len,
                    loc: Loc(ppos),
                });
                if !self.eat_punct(',') {
                    break;
                }
            }
        }
        self.expect_punct(')')?;
        let body = self.block()?;
        Ok(FunctionDecl {
            id,
            ret,
            ret_len,
            name,
            params,
            body,
            loc: Loc(start),
        })
    }

    /// Parses `[len] [= init]` after the name; does not consume the `;`.
    fn decl_tail(
        &mut self,
        start: Pos,
        attr: Option<super::lexer::Attribute>,
        ty: BaseType,
        name: String,
    ) -> PResult<VarDecl> {
        let id = self.fresh_id();
        let len = if self.eat_punct('[') {
            let e = self.expr()?;
            self.expect_punct(']')?;
            Some(e)
        } else {
            None
        };
        let init = if self.is_op("=") {
            self.idx += 1;
            Some(self.expr()?)
        } else {
            None
        };
        Ok(VarDecl {
            id,
            attr,
            ty,
            name,
            len,
            init,
            loc: Loc(start),
        })
    }

    fn decl_rest(
        &mut self,
        start: Pos,
        attr: Option<super::lexer::Attribute>,
        ty: BaseType,
        name: String,
    ) -> PResult<VarDecl> {
        let d = self.decl_tail(start, attr, ty, name)?;
        self.expect_punct(';')?;
        Ok(d)
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.pos();
        self.expect_punct('{')?;
        let mut stmts = Vec::new();
        while !self.is_punct('}') {
            if self.peek().is_none() {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        self.idx += 1;
        Ok(Block {
            stmts,
            loc: Loc(start),
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.pos();
        let kind = match self.peek_kind(0) {
            Some(TokenKind::Punct('{')) => StmtKind::Block(self.block()?),
            Some(TokenKind::Attribute(_)) | Some(TokenKind::Keyword(Keyword::Bit | Keyword::Int | Keyword::Void)) => {
                let s = self.local_decl()?;
                self.expect_punct(';')?;
                s.kind
            }
            Some(TokenKind::Keyword(Keyword::If)) => self.if_stmt()?,
            Some(TokenKind::Keyword(Keyword::For)) => {
                self.idx += 1;
                self.expect_punct('(')?;
                let init = if self.at_type() {
                    self.local_decl()?
                } else {
                    self.simple_stmt()?
                };
                self.expect_punct(';')?;
                let cond = self.expr()?;
                self.expect_punct(';')?;
                let step = self.simple_stmt()?;
                self.expect_punct(')')?;
                let body = self.block()?;
                StmtKind::For {
                    init: Box::new(init),
                    cond,
                    step: Box::new(step),
                    body,
                }
            }
            Some(TokenKind::Keyword(Keyword::Return)) => {
                self.idx += 1;
                let e = if self.is_punct(';') {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(';')?;
                StmtKind::Return(e)
            }
            Some(TokenKind::Keyword(Keyword::Assert)) => {
                self.idx += 1;
                self.expect_punct('(')?;
                let e = self.expr()?;
                self.expect_punct(')')?;
                self.expect_punct(';')?;
                StmtKind::Assert(e)
            }
            Some(TokenKind::Keyword(Keyword::CoreVars)) => {
                self.idx += 1;
                self.expect_punct('(')?;
                let p = self.place()?;
                self.expect_punct(')')?;
                self.expect_punct(';')?;
                StmtKind::CoreVars(p)
            }
            Some(TokenKind::Ident(_)) if matches!(self.peek_kind(1), Some(TokenKind::Punct('('))) => {
                let c = self.call()?;
                self.expect_punct(';')?;
                StmtKind::Call(c)
            }
            Some(TokenKind::Ident(_)) => {
                let s = self.simple_stmt()?;
                self.expect_punct(';')?;
                s.kind
            }
            _ => return self.unexpected("statement"),
        };
        Ok(Stmt {
            kind,
            loc: Loc(start),
        })
    }

    fn local_decl(&mut self) -> PResult<Stmt> {
        let start = self.pos();
        let attr = match self.peek_kind(0) {
            Some(TokenKind::Attribute(a)) => {
                self.idx += 1;
                Some(*a)
            }
            _ => None,
        };
        let ty = self.base_type()?;
        let (name, _) = self.ident()?;
        let d = self.decl_tail(start, attr, ty, name)?;
        Ok(Stmt {
            kind: StmtKind::Decl(d),
            loc: Loc(start),
        })
    }

    /// Assignment or `x++` / `x--`, without the terminating `;`.
    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let start = self.pos();
        let place = self.place()?;
        let kind = match self.peek_kind(0) {
            Some(TokenKind::Op("++")) => {
                self.idx += 1;
                StmtKind::Step {
                    place,
                    increment: true,
                }
            }
            Some(TokenKind::Op("--")) => {
                self.idx += 1;
                StmtKind::Step {
                    place,
                    increment: false,
                }
            }
            Some(TokenKind::Op(o)) if AssignOp::from_str(o).is_some() => {
                let op = AssignOp::from_str(o).unwrap();
                self.idx += 1;
                let value = self.expr()?;
                StmtKind::Assign { place, op, value }
            }
            _ => return self.unexpected("assignment operator"),
        };
        Ok(Stmt {
            kind,
            loc: Loc(start),
        })
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        self.idx += 1;
        self.expect_punct('(')?;
        let cond = self.expr()?;
        self.expect_punct(')')?;
        let then_block = self.block()?;
        let else_branch = if self.is_keyword(Keyword::Else) {
            self.idx += 1;
            if self.is_keyword(Keyword::If) {
                let start = self.pos();
                let kind = self.if_stmt()?;
                Some(ElseBranch::If(Box::new(Stmt {
                    kind,
                    loc: Loc(start),
                })))
            } else {
                Some(ElseBranch::Block(self.block()?))
            }
        } else {
            None
        };
        Ok(StmtKind::If {
            cond,
            then_block,
            else_branch,
        })
    }

    fn place(&mut self) -> PResult<Place> {
        let (name, pos) = self.ident()?;
        let id = self.fresh_id();
        let sel = if self.eat_punct('[') {
            let first = self.expr()?;
            let sel = if self.eat_punct(':') {
                let hi = self.expr()?;
                Selector::Slice(Box::new(first), Box::new(hi))
            } else {
                Selector::Index(Box::new(first))
            };
            self.expect_punct(']')?;
            sel
        } else {
            Selector::Whole
        };
        Ok(Place {
            id,
            name,
            sel,
            loc: Loc(pos),
        })
    }

    fn call(&mut self) -> PResult<Call> {
        let (name, pos) = self.ident()?;
        let id = self.fresh_id();
        self.expect_punct('(')?;
        let mut args = Vec::new();
        if !self.is_punct(')') {
            loop {
                args.push(self.expr()?);
                if !self.eat_punct(',') {
                    break;
                }
            }
        }
        self.expect_punct(')')?;
        Ok(Call {
            id,
            name,
            args,
            loc: Loc(pos),
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind(0) {
                Some(TokenKind::Op(o)) => match BinOp::from_str(o) {
                    Some(op) if op.precedence() >= min_prec => op,
                    _ => break,
                },
                _ => break,
            };
            let pos = self.pos();
            self.idx += 1;
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                loc: Loc(pos),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let op = match self.peek_kind(0) {
            Some(TokenKind::Op("!")) => Some(UnOp::Not),
            Some(TokenKind::Op("~")) => Some(UnOp::BitNot),
            Some(TokenKind::Op("-")) => Some(UnOp::Neg),
            _ => None,
        };
        if let Some(op) = op {
            self.idx += 1;
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Unary(op, Box::new(inner)),
                loc: Loc(pos),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek_kind(0) {
            Some(TokenKind::Int(v)) => {
                let v = *v;
                self.idx += 1;
                Ok(Expr {
                    kind: ExprKind::Int(v),
                    loc: Loc(pos),
                })
            }
            Some(TokenKind::Punct('(')) => {
                self.idx += 1;
                let e = self.expr()?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Some(TokenKind::Ident(_)) => {
                if matches!(self.peek_kind(1), Some(TokenKind::Punct('('))) {
                    let c = self.call()?;
                    Ok(Expr {
                        kind: ExprKind::Call(c),
                        loc: Loc(pos),
                    })
                } else {
                    let p = self.place()?;
                    Ok(Expr {
                        kind: ExprKind::Place(p),
                        loc: Loc(pos),
                    })
                }
            }
            _ => self.unexpected("expression"),
        }
    }
}
