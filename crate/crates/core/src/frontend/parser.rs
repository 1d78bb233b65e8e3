//! Recursive-descent parser producing an untyped AST.

use crate::frontend::ast::*;
use crate::frontend::lexer::{Token, TokenKind};
use crate::frontend::types::{CType, SourceLoc, TypeKind};
use crate::frontend::FrontendError;

/// Name of the assertion intrinsic recognised as a statement.
pub const ASSERT_INTRINSIC: &str = "MYASSERT";

pub fn parse(tokens: &[Token]) -> Result<Program, FrontendError> {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        loop_depth: 0,
        switch_depth: 0,
    };
    let mut functions = Vec::new();
    while !p.at_eof() {
        functions.push(p.function()?);
    }
    Ok(Program { functions })
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    loop_depth: usize,
    switch_depth: usize,
}

const TYPE_WORDS: &[&str] = &[
    "int", "char", "short", "long", "signed", "unsigned", "float", "double", "const", "void",
];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, off: usize) -> &Token {
        &self.toks[(self.pos + off).min(self.toks.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Eof)
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if !self.at_eof() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Punct(q) if *q == p)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Keyword(q) if *q == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> FrontendError {
        let t = self.peek();
        FrontendError::Parse {
            loc: t.loc.clone(),
            expected: expected.to_string(),
            found: t.describe(),
        }
    }

    fn unsupported(&self, loc: &SourceLoc, name: &str) -> FrontendError {
        FrontendError::UnsupportedFeature {
            loc: loc.clone(),
            name: name.to_string(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<SourceLoc, FrontendError> {
        if self.is_punct(p) {
            Ok(self.next().loc)
        } else {
            Err(self.error(&format!("`{p}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, SourceLoc), FrontendError> {
        match &self.peek().kind {
            TokenKind::Ident(s) => {
                let s = s.clone();
                Ok((s, self.next().loc))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn starts_type(&self) -> bool {
        self.starts_type_at(0)
    }

    fn starts_type_at(&self, off: usize) -> bool {
        match &self.peek_at(off).kind {
            TokenKind::Keyword(k) => {
                TYPE_WORDS.contains(k)
                    || matches!(
                        *k,
                        "struct" | "union" | "enum" | "typedef" | "static" | "extern" | "volatile" | "register" | "auto"
                    )
            }
            _ => false,
        }
    }

    /// Parses a declaration specifier list. `None` means `void`.
    fn type_spec(&mut self) -> Result<Option<CType>, FrontendError> {
        let loc = self.peek().loc.clone();
        let (mut signed, mut unsigned, mut is_const) = (false, false, false);
        let (mut shorts, mut longs) = (0, 0);
        let mut base: Option<&'static str> = None;
        let mut any = false;
        while let TokenKind::Keyword(k) = self.peek().kind {
            match k {
                "const" => is_const = true,
                "signed" => signed = true,
                "unsigned" => unsigned = true,
                "short" => shorts += 1,
                "long" => longs += 1,
                "int" | "char" | "float" | "double" | "void" => {
                    if base.is_some() {
                        return Err(self.error("a single base type"));
                    }
                    base = Some(k);
                }
                "struct" | "union" => return Err(self.unsupported(&loc, "structures and unions")),
                "enum" => return Err(self.unsupported(&loc, "enumerations")),
                "typedef" => return Err(self.unsupported(&loc, "typedef")),
                "static" | "extern" | "volatile" | "register" | "auto" => {
                    return Err(self.unsupported(&loc, &format!("storage class `{k}`")))
                }
                _ => break,
            }
            any = true;
            self.pos += 1;
        }
        if !any {
            return Err(self.error("type specifier"));
        }
        if signed && unsigned || shorts > 0 && longs > 0 || shorts > 1 || longs > 2 {
            return Err(FrontendError::Parse {
                loc,
                expected: "valid type specifier combination".into(),
                found: "conflicting specifiers".into(),
            });
        }
        let kind = match (base, shorts, longs) {
            (Some("void"), 0, 0) if !signed && !unsigned => return Ok(None),
            (Some("char"), 0, 0) => TypeKind::Char,
            (Some("int") | None, 1, 0) => TypeKind::Short,
            (Some("int") | None, 0, 0) => TypeKind::Int,
            (Some("int") | None, 0, 1) => TypeKind::Long,
            (Some("int") | None, 0, 2) => TypeKind::LongLong,
            (Some("float"), 0, 0) if !signed && !unsigned => TypeKind::Float,
            (Some("double"), 0, 0) if !signed && !unsigned => TypeKind::Double,
            (Some("double"), 0, 1) if !signed && !unsigned => TypeKind::LongDouble,
            _ => {
                return Err(FrontendError::Parse {
                    loc,
                    expected: "valid type specifier combination".into(),
                    found: "invalid combination".into(),
                })
            }
        };
        Ok(Some(CType {
            kind,
            signed: !unsigned,
            is_const,
        }))
    }

    fn function(&mut self) -> Result<Function, FrontendError> {
        let loc = self.peek().loc.clone();
        let return_type = self.type_spec()?;
        if self.is_punct("*") {
            return Err(self.unsupported(&self.peek().loc.clone(), "pointers"));
        }
        let (name, _) = self.expect_ident()?;
        if !self.is_punct("(") {
            return Err(self.unsupported(&loc, "global variables"));
        }
        self.next();
        if self.is_keyword("void") && matches!(self.peek_at(1).kind, TokenKind::Punct(")")) {
            self.next();
        }
        if !self.is_punct(")") {
            let l = self.peek().loc.clone();
            return Err(self.unsupported(&l, "function parameters"));
        }
        self.next();
        if self.is_punct(";") {
            return Err(self.unsupported(&loc, "function declarations without a body"));
        }
        self.expect_punct("{")?;
        let body = self.block_items()?;
        Ok(Function {
            name,
            return_type,
            body,
            variables: Vec::new(),
            loc,
        })
    }

    /// Statements up to and including the closing `}`.
    fn block_items(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if self.at_eof() {
                return Err(self.error("`}`"));
            }
            out.extend(self.statement()?);
        }
        self.next();
        Ok(out)
    }

    /// A statement used as the body of a branch or loop; braces are unwrapped.
    fn sub_statement(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let mut stmts = self.statement()?;
        if stmts.len() == 1 {
            if let StmtKind::Block(_) = stmts[0].kind {
                let StmtKind::Block(inner) = stmts.remove(0).kind else { unreachable!() };
                return Ok(inner);
            }
        }
        Ok(stmts)
    }

    fn loop_body(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        self.loop_depth += 1;
        let body = self.sub_statement();
        self.loop_depth -= 1;
        body
    }

    fn paren_expr(&mut self) -> Result<Expr, FrontendError> {
        self.expect_punct("(")?;
        let e = self.expression()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    fn statement(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let tok = self.peek().clone();
        let loc = tok.loc.clone();
        let one = |kind| Ok(vec![Stmt::new(kind, loc.clone())]);
        match &tok.kind {
            TokenKind::Punct("{") => {
                self.next();
                let body = self.block_items()?;
                one(StmtKind::Block(body))
            }
            TokenKind::Punct(";") => {
                self.next();
                one(StmtKind::Empty)
            }
            TokenKind::Keyword("if") => {
                self.next();
                let cond = self.paren_expr()?;
                let then_branch = self.sub_statement()?;
                let else_branch = if self.is_keyword("else") {
                    self.next();
                    Some(self.sub_statement()?)
                } else {
                    None
                };
                one(StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                })
            }
            TokenKind::Keyword("while") => {
                self.next();
                let cond = self.paren_expr()?;
                let body = self.loop_body()?;
                one(StmtKind::While { cond, body })
            }
            TokenKind::Keyword("do") => {
                self.next();
                let body = self.loop_body()?;
                if !self.is_keyword("while") {
                    return Err(self.error("`while`"));
                }
                self.next();
                let cond = self.paren_expr()?;
                self.expect_punct(";")?;
                one(StmtKind::DoWhile { body, cond })
            }
            TokenKind::Keyword("for") => {
                self.next();
                self.expect_punct("(")?;
                let init = if self.starts_type() {
                    self.declaration()?
                } else if self.eat_punct(";") {
                    vec![]
                } else {
                    let l = self.peek().loc.clone();
                    let e = self.expression()?;
                    self.expect_punct(";")?;
                    vec![Stmt::new(StmtKind::Expr(e), l)]
                };
                let cond = if self.is_punct(";") { None } else { Some(self.expression()?) };
                self.expect_punct(";")?;
                let step = if self.is_punct(")") { None } else { Some(self.expression()?) };
                self.expect_punct(")")?;
                let body = self.loop_body()?;
                one(StmtKind::For {
                    init,
                    cond,
                    step,
                    body,
                })
            }
            TokenKind::Keyword("switch") => {
                self.next();
                let scrutinee = self.paren_expr()?;
                if !self.is_punct("{") {
                    return Err(self.error("`{` after switch"));
                }
                self.switch_depth += 1;
                let body = self.sub_statement();
                self.switch_depth -= 1;
                one(StmtKind::Switch {
                    scrutinee,
                    body: body?,
                })
            }
            TokenKind::Keyword("case") => {
                self.next();
                if self.switch_depth == 0 {
                    return Err(FrontendError::Parse {
                        loc,
                        expected: "statement".into(),
                        found: "`case` outside switch".into(),
                    });
                }
                let value = self.case_constant()?;
                self.expect_punct(":")?;
                one(StmtKind::Case(value))
            }
            TokenKind::Keyword("default") => {
                self.next();
                if self.switch_depth == 0 {
                    return Err(FrontendError::Parse {
                        loc,
                        expected: "statement".into(),
                        found: "`default` outside switch".into(),
                    });
                }
                self.expect_punct(":")?;
                one(StmtKind::Default)
            }
            TokenKind::Keyword("break") => {
                self.next();
                if self.loop_depth == 0 && self.switch_depth == 0 {
                    return Err(FrontendError::Parse {
                        loc,
                        expected: "statement".into(),
                        found: "`break` outside loop or switch".into(),
                    });
                }
                self.expect_punct(";")?;
                one(StmtKind::Break)
            }
            TokenKind::Keyword("continue") => Err(self.unsupported(&loc, "continue statements")),
            TokenKind::Keyword("goto") => {
                self.next();
                let (label, _) = self.expect_ident()?;
                self.expect_punct(";")?;
                one(StmtKind::Goto(label))
            }
            TokenKind::Keyword("return") => {
                self.next();
                let value = if self.is_punct(";") { None } else { Some(self.expression()?) };
                self.expect_punct(";")?;
                one(StmtKind::Return(value))
            }
            TokenKind::Ident(name) if name == ASSERT_INTRINSIC => {
                self.next();
                let cond = self.paren_expr()?;
                self.expect_punct(";")?;
                one(StmtKind::Assert(cond))
            }
            TokenKind::Ident(name) if matches!(self.peek_at(1).kind, TokenKind::Punct(":")) => {
                let name = name.clone();
                self.next();
                self.next();
                let mut out = vec![Stmt::new(StmtKind::Label(name), loc.clone())];
                if !self.is_punct("}") {
                    out.extend(self.statement()?);
                }
                Ok(out)
            }
            _ if self.starts_type() => self.declaration(),
            _ => {
                let e = self.expression()?;
                self.expect_punct(";")?;
                one(StmtKind::Expr(e))
            }
        }
    }

    fn case_constant(&mut self) -> Result<i128, FrontendError> {
        let negative = self.eat_punct("-");
        match self.peek().kind {
            TokenKind::IntLit(v, _) => {
                self.next();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error("integer constant")),
        }
    }

    fn declaration(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let loc = self.peek().loc.clone();
        let Some(ty) = self.type_spec()? else {
            return Err(FrontendError::Parse {
                loc,
                expected: "object type".into(),
                found: "`void`".into(),
            });
        };
        let mut out = Vec::new();
        loop {
            if self.is_punct("*") {
                let l = self.peek().loc.clone();
                return Err(self.unsupported(&l, "pointers"));
            }
            let (name, nloc) = self.expect_ident()?;
            if self.is_punct("[") {
                return Err(self.unsupported(&nloc, "arrays"));
            }
            if self.is_punct("(") {
                return Err(self.unsupported(&nloc, "function declarations"));
            }
            let init = if self.eat_punct("=") {
                Some(self.assignment()?)
            } else {
                None
            };
            out.push(Stmt::new(StmtKind::Decl { name, ty, init }, nloc));
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        Ok(out)
    }

    pub fn expression(&mut self) -> Result<Expr, FrontendError> {
        let e = self.assignment()?;
        if self.is_punct(",") {
            let l = self.peek().loc.clone();
            return Err(self.unsupported(&l, "comma operator"));
        }
        Ok(e)
    }

    fn assignment(&mut self) -> Result<Expr, FrontendError> {
        let lhs = self.conditional()?;
        let op = match &self.peek().kind {
            TokenKind::Punct("=") => None,
            TokenKind::Punct(p) => match *p {
                "+=" => Some(BinaryOp::Add),
                "-=" => Some(BinaryOp::Sub),
                "*=" => Some(BinaryOp::Mul),
                "/=" => Some(BinaryOp::Div),
                "%=" => Some(BinaryOp::Rem),
                "<<=" => Some(BinaryOp::Shl),
                ">>=" => Some(BinaryOp::Shr),
                "&=" | "|=" | "^=" => {
                    let l = self.peek().loc.clone();
                    return Err(self.unsupported(&l, "bitwise logical operators"));
                }
                _ => return Ok(lhs),
            },
            _ => return Ok(lhs),
        };
        self.next();
        let Some(target) = lhs.as_var().map(str::to_string) else {
            return Err(FrontendError::Parse {
                loc: lhs.loc,
                expected: "variable on the left of assignment".into(),
                found: "expression".into(),
            });
        };
        let value = Box::new(self.assignment()?);
        let kind = match op {
            None => ExprKind::Assign(target, value),
            Some(op) => ExprKind::CompoundAssign(op, target, value),
        };
        Ok(Expr::new(kind, lhs.loc))
    }

    fn conditional(&mut self) -> Result<Expr, FrontendError> {
        let cond = self.logical_or()?;
        if !self.eat_punct("?") {
            return Ok(cond);
        }
        let then = self.expression()?;
        self.expect_punct(":")?;
        let other = self.conditional()?;
        let loc = cond.loc.clone();
        Ok(Expr::new(
            ExprKind::Conditional(Box::new(cond), Box::new(then), Box::new(other)),
            loc,
        ))
    }

    fn logical_or(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.logical_and()?;
        while self.eat_punct("||") {
            let rhs = self.logical_and()?;
            let loc = lhs.loc.clone();
            lhs = Expr::new(ExprKind::Logical(LogicalOp::Or, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    fn logical_and(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.bitwise()?;
        while self.eat_punct("&&") {
            let rhs = self.bitwise()?;
            let loc = lhs.loc.clone();
            lhs = Expr::new(ExprKind::Logical(LogicalOp::And, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    fn bitwise(&mut self) -> Result<Expr, FrontendError> {
        let e = self.binary_level(0)?;
        if self.is_punct("|") || self.is_punct("^") || self.is_punct("&") {
            let l = self.peek().loc.clone();
            return Err(self.unsupported(&l, "bitwise logical operators"));
        }
        Ok(e)
    }

    /// Left-associative binary levels: equality, relational, shift, additive, multiplicative.
    fn binary_level(&mut self, level: usize) -> Result<Expr, FrontendError> {
        const LEVELS: &[&[(&str, BinaryOp)]] = &[
            &[("==", BinaryOp::Eq), ("!=", BinaryOp::Ne)],
            &[
                ("<", BinaryOp::Lt),
                ("<=", BinaryOp::Le),
                (">", BinaryOp::Gt),
                (">=", BinaryOp::Ge),
            ],
            &[("<<", BinaryOp::Shl), (">>", BinaryOp::Shr)],
            &[("+", BinaryOp::Add), ("-", BinaryOp::Sub)],
            &[("*", BinaryOp::Mul), ("/", BinaryOp::Div), ("%", BinaryOp::Rem)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        'outer: loop {
            for (sym, op) in LEVELS[level] {
                if self.eat_punct(sym) {
                    let rhs = self.binary_level(level + 1)?;
                    let loc = lhs.loc.clone();
                    lhs = Expr::new(ExprKind::Binary(*op, Box::new(lhs), Box::new(rhs)), loc);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let tok = self.peek().clone();
        let loc = tok.loc.clone();
        let op = match &tok.kind {
            TokenKind::Punct("+") => Some(UnaryOp::Plus),
            TokenKind::Punct("-") => Some(UnaryOp::Minus),
            TokenKind::Punct("!") => Some(UnaryOp::Not),
            TokenKind::Punct("++") => Some(UnaryOp::PreInc),
            TokenKind::Punct("--") => Some(UnaryOp::PreDec),
            TokenKind::Punct("~") => return Err(self.unsupported(&loc, "bitwise logical operators")),
            TokenKind::Punct("&") | TokenKind::Punct("*") => return Err(self.unsupported(&loc, "pointers")),
            TokenKind::Keyword("sizeof") => return Err(self.unsupported(&loc, "sizeof")),
            TokenKind::Punct("(") if self.starts_type_at(1) => {
                self.next();
                let Some(to) = self.type_spec()? else {
                    return Err(self.unsupported(&loc, "casts to void"));
                };
                if self.is_punct("*") {
                    let l = self.peek().loc.clone();
                    return Err(self.unsupported(&l, "pointers"));
                }
                self.expect_punct(")")?;
                let operand = self.unary()?;
                return Ok(Expr::new(
                    ExprKind::Cast {
                        to,
                        // Refined by the type checker once the operand type is known.
                        kind: CastKind::IntegralCast,
                        explicit: true,
                        operand: Box::new(operand),
                    },
                    loc,
                ));
            }
            _ => None,
        };
        let Some(op) = op else {
            return self.postfix();
        };
        self.next();
        let operand = self.unary()?;
        if matches!(op, UnaryOp::PreInc | UnaryOp::PreDec) && operand.as_var().is_none() {
            return Err(FrontendError::Parse {
                loc: operand.loc,
                expected: "variable operand of increment/decrement".into(),
                found: "expression".into(),
            });
        }
        Ok(Expr::new(ExprKind::Unary(op, Box::new(operand)), loc))
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        loop {
            let loc = self.peek().loc.clone();
            if self.is_punct("++") || self.is_punct("--") {
                let op = if self.is_punct("++") { UnaryOp::PostInc } else { UnaryOp::PostDec };
                if e.as_var().is_none() {
                    return Err(self.error("variable operand of increment/decrement"));
                }
                self.next();
                let l = e.loc.clone();
                e = Expr::new(ExprKind::Unary(op, Box::new(e)), l);
            } else if self.is_punct("[") {
                return Err(self.unsupported(&loc, "arrays"));
            } else if self.is_punct("(") {
                return Err(self.unsupported(&loc, "function calls"));
            } else if self.is_punct(".") || self.is_punct("->") {
                return Err(self.unsupported(&loc, "structures and unions"));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Ident(name) => {
                self.next();
                Ok(Expr::new(ExprKind::Var(name), tok.loc))
            }
            TokenKind::IntLit(v, ty) => {
                self.next();
                Ok(Expr::typed(ExprKind::IntLit(v), ty, tok.loc))
            }
            TokenKind::RealLit(v, text, ty) => {
                self.next();
                Ok(Expr::typed(ExprKind::RealLit(v, text), ty, tok.loc))
            }
            TokenKind::Punct("(") => {
                self.next();
                let e = self.expression()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.error("expression")),
        }
    }
}
