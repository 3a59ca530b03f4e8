//! Recursive-descent parser for SELECT statements.

use super::ast::*;
use super::lexer::{is_reserved, tokenize, Token, TokenKind};
use super::SqlParseError;

pub fn parse_sql(text: &str) -> Result<Query, SqlParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, end: text.len() };
    let q = p.query()?;
    while p.eat_op(";") {}
    if let Some(t) = p.peek() {
        return Err(SqlParseError::new(t.offset, "unexpected input after end of query"));
    }
    Ok(q)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

type PResult<T> = Result<T, SqlParseError>;

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Token> {
        self.tokens.get(self.pos + k)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(SqlParseError::new(self.offset(), message))
    }

    fn at_word(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_word(kw))
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_some_and(|t| t.is_op(op))
    }

    fn eat_word(&mut self, kw: &str) -> bool {
        if self.at_word(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, kw: &str) -> PResult<()> {
        if self.eat_word(kw) {
            Ok(())
        } else {
            self.err(format!("expected {}", kw.to_uppercase()))
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.err(format!("expected '{op}'"))
        }
    }

    /// An identifier: a non-reserved word or any quoted identifier.
    fn ident(&mut self) -> PResult<String> {
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Word(w)) if !is_reserved(&w) => {
                self.pos += 1;
                Ok(w)
            }
            Some(TokenKind::QuotedIdent(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn at_ident(&self) -> bool {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Word(w)) => !is_reserved(w),
            Some(TokenKind::QuotedIdent(_)) => true,
            _ => false,
        }
    }

    fn alias(&mut self) -> PResult<Option<String>> {
        if self.eat_word("as") {
            return match self.peek().map(|t| t.kind.clone()) {
                Some(TokenKind::Str(s)) => {
                    self.pos += 1;
                    Ok(Some(s))
                }
                _ => self.ident().map(Some),
            };
        }
        if self.at_ident() {
            return self.ident().map(Some);
        }
        Ok(None)
    }

    fn query(&mut self) -> PResult<Query> {
        let body = self.set_expr()?;
        let mut order_by = Vec::new();
        if self.eat_word("order") {
            self.expect_word("by")?;
            order_by = self.order_items()?;
        }
        let (mut limit, mut offset) = (None, None);
        if self.eat_word("limit") {
            let first = self.expr()?;
            if self.eat_word("offset") {
                limit = Some(first);
                offset = Some(self.expr()?);
            } else if self.eat_op(",") {
                offset = Some(first);
                limit = Some(self.expr()?);
            } else {
                limit = Some(first);
            }
        }
        Ok(Query { body, order_by, limit, offset })
    }

    fn order_items(&mut self) -> PResult<Vec<OrderItem>> {
        let mut items = Vec::new();
        loop {
            let expr = self.expr()?;
            let desc = if self.eat_word("desc") {
                true
            } else {
                self.eat_word("asc");
                false
            };
            items.push(OrderItem { expr, desc });
            if !self.eat_op(",") {
                return Ok(items);
            }
        }
    }

    fn set_expr(&mut self) -> PResult<SetExpr> {
        let mut left = SetExpr::Select(Box::new(self.select()?));
        loop {
            let op = if self.eat_word("union") {
                if self.eat_word("all") {
                    SetOperator::UnionAll
                } else {
                    SetOperator::Union
                }
            } else if self.eat_word("intersect") {
                SetOperator::Intersect
            } else if self.eat_word("except") {
                SetOperator::Except
            } else {
                return Ok(left);
            };
            let right = SetExpr::Select(Box::new(self.select()?));
            left = SetExpr::SetOp { op, left: Box::new(left), right: Box::new(right) };
        }
    }

    fn select(&mut self) -> PResult<Select> {
        self.expect_word("select")?;
        let distinct = if self.eat_word("distinct") {
            true
        } else {
            self.eat_word("all");
            false
        };
        let mut projections = Vec::new();
        loop {
            projections.push(self.select_item()?);
            if !self.eat_op(",") {
                break;
            }
        }
        let from = if self.eat_word("from") { Some(self.from_clause()?) } else { None };
        let selection = if self.eat_word("where") { Some(self.expr()?) } else { None };
        let mut group_by = Vec::new();
        if self.eat_word("group") {
            self.expect_word("by")?;
            loop {
                group_by.push(self.expr()?);
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        let having = if self.eat_word("having") { Some(self.expr()?) } else { None };
        Ok(Select { distinct, projections, from, selection, group_by, having })
    }

    fn select_item(&mut self) -> PResult<SelectItem> {
        if self.eat_op("*") {
            return Ok(SelectItem::Wildcard);
        }
        if self.at_ident()
            && self.peek_at(1).is_some_and(|t| t.is_op("."))
            && self.peek_at(2).is_some_and(|t| t.is_op("*"))
        {
            let q = self.ident()?;
            self.pos += 2;
            return Ok(SelectItem::QualifiedWildcard(q));
        }
        let expr = self.expr()?;
        let alias = self.alias()?;
        Ok(SelectItem::Expr { expr, alias })
    }

    fn from_clause(&mut self) -> PResult<FromClause> {
        let base = self.table_factor()?;
        let mut joins = Vec::new();
        loop {
            let kind = if self.eat_op(",") {
                JoinKind::Comma
            } else if self.eat_word("join") {
                JoinKind::Inner
            } else if self.eat_word("inner") {
                self.expect_word("join")?;
                JoinKind::Inner
            } else if self.eat_word("left") {
                self.eat_word("outer");
                self.expect_word("join")?;
                JoinKind::Left
            } else if self.eat_word("cross") {
                self.expect_word("join")?;
                JoinKind::Cross
            } else if self.at_word("natural") || self.at_word("right") || self.at_word("full") {
                return self.err("unsupported join type");
            } else {
                break;
            };
            let factor = self.table_factor()?;
            let on = if self.eat_word("on") {
                Some(self.expr()?)
            } else if self.at_word("using") {
                return self.err("USING joins are not supported");
            } else {
                None
            };
            joins.push(Join { kind, factor, on });
        }
        Ok(FromClause { base, joins })
    }

    fn table_factor(&mut self) -> PResult<TableFactor> {
        if self.eat_op("(") {
            if !self.at_word("select") {
                return self.err("expected a subquery");
            }
            let query = self.query()?;
            self.expect_op(")")?;
            let alias = self.alias()?;
            return Ok(TableFactor::Derived { query: Box::new(query), alias });
        }
        let name = self.ident()?;
        if self.at_op(".") {
            return self.err("qualified table names are not supported");
        }
        let alias = self.alias()?;
        Ok(TableFactor::Table { name, alias })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut left = self.and_expr()?;
        while self.eat_word("or") {
            let right = self.and_expr()?;
            left = Expr::binary(BinaryOp::Or, left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut left = self.not_expr()?;
        while self.eat_word("and") {
            let right = self.not_expr()?;
            left = Expr::binary(BinaryOp::And, left, right);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_word("not") {
            let inner = self.not_expr()?;
            return Ok(Expr::Unary { op: UnaryOp::Not, expr: Box::new(inner) });
        }
        self.equality()
    }

    fn equality(&mut self) -> PResult<Expr> {
        let mut left = self.relational()?;
        loop {
            let op = if self.eat_op("=") || self.eat_op("==") {
                Some(BinaryOp::Eq)
            } else if self.eat_op("!=") || self.eat_op("<>") {
                Some(BinaryOp::NotEq)
            } else if self.eat_word("is") {
                Some(if self.eat_word("not") { BinaryOp::IsNot } else { BinaryOp::Is })
            } else {
                None
            };
            if let Some(op) = op {
                let right = self.relational()?;
                left = match (op, &right) {
                    (BinaryOp::Is, Expr::Literal { kind: LiteralKind::Null, .. }) => {
                        Expr::IsNull { expr: Box::new(left), negated: false }
                    }
                    (BinaryOp::IsNot, Expr::Literal { kind: LiteralKind::Null, .. }) => {
                        Expr::IsNull { expr: Box::new(left), negated: true }
                    }
                    _ => Expr::binary(op, left, right),
                };
                continue;
            }
            if self.eat_word("isnull") {
                left = Expr::IsNull { expr: Box::new(left), negated: false };
                continue;
            }
            if self.eat_word("notnull") {
                left = Expr::IsNull { expr: Box::new(left), negated: true };
                continue;
            }
            let negated = if self.at_word("not")
                && self.peek_at(1).is_some_and(|t| {
                    t.is_word("in")
                        || t.is_word("like")
                        || t.is_word("glob")
                        || t.is_word("between")
                        || t.is_word("null")
                }) {
                self.pos += 1;
                true
            } else {
                false
            };
            if negated && self.eat_word("null") {
                left = Expr::IsNull { expr: Box::new(left), negated: true };
            } else if self.eat_word("in") {
                self.expect_op("(")?;
                if self.at_word("select") {
                    let query = self.query()?;
                    self.expect_op(")")?;
                    left = Expr::InSubquery { expr: Box::new(left), query: Box::new(query), negated };
                } else {
                    let mut list = Vec::new();
                    if !self.at_op(")") {
                        loop {
                            list.push(self.expr()?);
                            if !self.eat_op(",") {
                                break;
                            }
                        }
                    }
                    self.expect_op(")")?;
                    left = Expr::InList { expr: Box::new(left), list, negated };
                }
            } else if self.at_word("like") || self.at_word("glob") {
                let glob = self.at_word("glob");
                self.pos += 1;
                let pattern = self.relational()?;
                if self.at_word("escape") {
                    return self.err("ESCAPE clauses are not supported");
                }
                left = Expr::Like { expr: Box::new(left), pattern: Box::new(pattern), negated, glob };
            } else if self.eat_word("between") {
                let low = self.relational()?;
                self.expect_word("and")?;
                let high = self.relational()?;
                left = Expr::Between { expr: Box::new(left), low: Box::new(low), high: Box::new(high), negated };
            } else {
                return Ok(left);
            }
        }
    }

    fn relational(&mut self) -> PResult<Expr> {
        let mut left = self.additive()?;
        loop {
            let op = if self.eat_op("<") {
                BinaryOp::Lt
            } else if self.eat_op("<=") {
                BinaryOp::LtEq
            } else if self.eat_op(">") {
                BinaryOp::Gt
            } else if self.eat_op(">=") {
                BinaryOp::GtEq
            } else {
                return Ok(left);
            };
            let right = self.additive()?;
            left = Expr::binary(op, left, right);
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut left = self.multiplicative()?;
        loop {
            let op = if self.eat_op("+") {
                BinaryOp::Plus
            } else if self.eat_op("-") {
                BinaryOp::Minus
            } else {
                return Ok(left);
            };
            let right = self.multiplicative()?;
            left = Expr::binary(op, left, right);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut left = self.concat()?;
        loop {
            let op = if self.eat_op("*") {
                BinaryOp::Mul
            } else if self.eat_op("/") {
                BinaryOp::Div
            } else if self.eat_op("%") {
                BinaryOp::Mod
            } else {
                return Ok(left);
            };
            let right = self.concat()?;
            left = Expr::binary(op, left, right);
        }
    }

    fn concat(&mut self) -> PResult<Expr> {
        let mut left = self.unary()?;
        while self.eat_op("||") {
            let right = self.unary()?;
            left = Expr::binary(BinaryOp::Concat, left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = if self.eat_op("-") {
            UnaryOp::Neg
        } else if self.eat_op("+") {
            UnaryOp::Plus
        } else if self.eat_op("~") {
            UnaryOp::BitNot
        } else {
            return self.primary();
        };
        let inner = self.unary()?;
        Ok(Expr::Unary { op, expr: Box::new(inner) })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        match tok.kind {
            TokenKind::Str(s) => {
                self.pos += 1;
                Ok(Expr::Literal { kind: LiteralKind::String, text: s })
            }
            TokenKind::Number(n) => {
                self.pos += 1;
                Ok(Expr::Literal { kind: LiteralKind::Number, text: n })
            }
            TokenKind::Op("(") => {
                self.pos += 1;
                if self.at_word("select") {
                    let q = self.query()?;
                    self.expect_op(")")?;
                    return Ok(Expr::Subquery(Box::new(q)));
                }
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("null") => {
                self.pos += 1;
                Ok(Expr::Literal { kind: LiteralKind::Null, text: "null".into() })
            }
            TokenKind::Word(w)
                if ["true", "false", "current_date", "current_time", "current_timestamp"]
                    .iter()
                    .any(|k| w.eq_ignore_ascii_case(k)) =>
            {
                self.pos += 1;
                Ok(Expr::Literal { kind: LiteralKind::Keyword, text: w })
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("exists") => {
                self.pos += 1;
                self.expect_op("(")?;
                let q = self.query()?;
                self.expect_op(")")?;
                Ok(Expr::Exists(Box::new(q)))
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("case") => {
                self.pos += 1;
                self.case_expr()
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("cast") => {
                self.pos += 1;
                self.expect_op("(")?;
                let e = self.expr()?;
                self.expect_word("as")?;
                let mut words = Vec::new();
                while !self.at_op(")") {
                    match self.peek().map(|t| t.kind.clone()) {
                        Some(TokenKind::Word(w)) | Some(TokenKind::Number(w)) => words.push(w),
                        Some(TokenKind::Op(o)) if o == "(" || o == "," => words.push(o.to_string()),
                        Some(TokenKind::Op(")")) => break,
                        _ => return self.err("malformed type name"),
                    }
                    self.pos += 1;
                    if words.last().is_some_and(|w| w == "(") {
                        while !self.at_op(")") {
                            match self.peek().map(|t| t.kind.clone()) {
                                Some(TokenKind::Number(n)) => words.push(n),
                                Some(TokenKind::Op(",")) => words.push(",".into()),
                                _ => return self.err("malformed type name"),
                            }
                            self.pos += 1;
                        }
                        self.pos += 1;
                        words.push(")".into());
                    }
                }
                self.expect_op(")")?;
                if words.is_empty() {
                    return self.err("missing type name");
                }
                let type_name = words.join(" ").replace(" ( ", "(").replace(" )", ")").replace(" , ", ",");
                Ok(Expr::Cast { expr: Box::new(e), type_name })
            }
            TokenKind::Word(_) | TokenKind::QuotedIdent(_) => {
                let is_call = matches!(tok.kind, TokenKind::Word(_)) && self.peek_at(1).is_some_and(|t| t.is_op("("));
                if is_call {
                    let TokenKind::Word(name) = tok.kind else { unreachable!() };
                    self.pos += 2;
                    return self.call(name);
                }
                let first = self.ident()?;
                if self.eat_op(".") {
                    let name = self.ident()?;
                    if self.at_op(".") {
                        return self.err("three-part column names are not supported");
                    }
                    Ok(Expr::Column { qualifier: Some(first), name })
                } else {
                    Ok(Expr::Column { qualifier: None, name: first })
                }
            }
            _ => self.err("expected an expression"),
        }
    }

    fn call(&mut self, name: String) -> PResult<Expr> {
        if self.eat_op("*") {
            self.expect_op(")")?;
            return Ok(Expr::Function { name, distinct: false, args: Vec::new(), star: true });
        }
        let distinct = self.eat_word("distinct");
        let mut args = Vec::new();
        if !self.at_op(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        Ok(Expr::Function { name, distinct, args, star: false })
    }

    fn case_expr(&mut self) -> PResult<Expr> {
        let operand = if self.at_word("when") { None } else { Some(Box::new(self.expr()?)) };
        let mut whens = Vec::new();
        while self.eat_word("when") {
            let w = self.expr()?;
            self.expect_word("then")?;
            let t = self.expr()?;
            whens.push((w, t));
        }
        if whens.is_empty() {
            return self.err("CASE without WHEN");
        }
        let else_result = if self.eat_word("else") { Some(Box::new(self.expr()?)) } else { None };
        self.expect_word("end")?;
        Ok(Expr::Case { operand, whens, else_result })
    }
}
