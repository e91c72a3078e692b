//===- parser.cpp - Textual affine dialect parser -------------------------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "loft/parser.hpp"

#include <cctype>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

using namespace loft;

std::string ParseError::to_string() const {
  return std::to_string(span.line) + ":" + std::to_string(span.column) +
         ": error: expected " + expected + ", found " + found;
}

namespace {

//===----------------------------------------------------------------------===//
// Lexer
//===----------------------------------------------------------------------===//

enum class Tok {
  Bare,   // keyword-like identifier, dots allowed: func.func, xi32, step
  Value,  // %id (text stored without the sigil)
  Symbol, // @id
  Int,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Less,
  Greater,
  Equal,
  Comma,
  Colon,
  Plus,
  Star,
  Arrow,
  End,
};

struct Token {
  Tok kind;
  std::string text; // identifier body or integer spelling
  int64_t value = 0;
  SourceSpan span;
};

/// Thrown internally; parse() converts it to a ParseResult error.
struct ParseFail {
  ParseError error;
};

[[noreturn]] void fail(SourceSpan span, std::string expected,
                       std::string found) {
  throw ParseFail{ParseError{span, std::move(expected), std::move(found)}};
}

bool isIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
public:
  explicit Lexer(const std::string &text) : text_(text) {}

  std::vector<Token> lexAll() {
    std::vector<Token> tokens;
    for (;;) {
      Token tok = next();
      tokens.push_back(tok);
      if (tok.kind == Tok::End)
        return tokens;
    }
  }

private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char peekAt(size_t off) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  void advance() {
    if (pos_ >= text_.size())
      return;
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skipTrivia() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
        continue;
      }
      if (c == '/' && peekAt(1) == '/') {
        while (peek() != '\n' && peek() != '\0')
          advance();
        continue;
      }
      return;
    }
  }

  Token make(Tok kind, SourceSpan span, std::string text = "") {
    return Token{kind, std::move(text), 0, span};
  }

  Token lexNumber(SourceSpan span, bool negative) {
    std::string digits;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      digits.push_back(peek());
      advance();
    }
    // Reject digits glued onto a sign with nothing after, handled by caller.
    int64_t value = 0;
    for (char c : digits) {
      int digit = c - '0';
      if (value > (INT64_MAX - digit) / 10)
        fail(span, "an integer that fits in 64 bits",
             std::string(negative ? "-" : "") + digits);
      value = value * 10 + digit;
    }
    if (negative)
      value = -value;
    span.length = static_cast<int>(digits.size()) + (negative ? 1 : 0);
    Token tok = make(Tok::Int, span, (negative ? "-" : "") + digits);
    tok.value = value;
    return tok;
  }

  Token next() {
    skipTrivia();
    SourceSpan span{line_, col_, 1};
    char c = peek();
    switch (c) {
    case '\0':
      span.length = 0;
      return make(Tok::End, span);
    case '(':
      advance();
      return make(Tok::LParen, span);
    case ')':
      advance();
      return make(Tok::RParen, span);
    case '{':
      advance();
      return make(Tok::LBrace, span);
    case '}':
      advance();
      return make(Tok::RBrace, span);
    case '[':
      advance();
      return make(Tok::LBracket, span);
    case ']':
      advance();
      return make(Tok::RBracket, span);
    case '<':
      advance();
      return make(Tok::Less, span);
    case '>':
      advance();
      return make(Tok::Greater, span);
    case '=':
      advance();
      return make(Tok::Equal, span);
    case ',':
      advance();
      return make(Tok::Comma, span);
    case ':':
      advance();
      return make(Tok::Colon, span);
    case '+':
      advance();
      return make(Tok::Plus, span);
    case '*':
      advance();
      return make(Tok::Star, span);
    default:
      break;
    }
    if (c == '-') {
      advance();
      if (peek() == '>') {
        advance();
        span.length = 2;
        return make(Tok::Arrow, span);
      }
      if (std::isdigit(static_cast<unsigned char>(peek())))
        return lexNumber(span, /*negative=*/true);
      fail(span, "'->' or a number after '-'", "'-'");
    }
    if (std::isdigit(static_cast<unsigned char>(c)))
      return lexNumber(span, /*negative=*/false);
    if (c == '%' || c == '@') {
      char sigil = c;
      advance();
      std::string id;
      while (isIdentChar(peek())) {
        id.push_back(peek());
        advance();
      }
      if (id.empty())
        fail(span, "an identifier after the sigil", std::string(1, sigil));
      span.length = static_cast<int>(id.size()) + 1;
      return make(sigil == '%' ? Tok::Value : Tok::Symbol, span,
                  std::move(id));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string id;
      while (isIdentChar(peek())) {
        id.push_back(peek());
        advance();
      }
      span.length = static_cast<int>(id.size());
      return make(Tok::Bare, span, std::move(id));
    }
    fail(span, "a token", "character '" + std::string(1, c) + "'");
  }

  const std::string &text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

//===----------------------------------------------------------------------===//
// Parser
//===----------------------------------------------------------------------===//

enum class ValKind { Memref, Index, I32 };

const char *kindName(ValKind kind) {
  switch (kind) {
  case ValKind::Memref:
    return "a memref";
  case ValKind::Index:
    return "an index";
  case ValKind::I32:
    return "an i32 value";
  }
  return "";
}

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  AffineModule parseModule() {
    AffineModule module;
    while (peek().kind != Tok::End) {
      module.funcs.push_back(parseFunc());
      for (size_t i = 0; i + 1 < module.funcs.size(); ++i)
        if (module.funcs[i].name == module.funcs.back().name)
          fail(lastSymbolSpan_, "a distinct function name",
               "duplicate @" + module.funcs.back().name);
    }
    return module;
  }

private:
  const Token &peek(size_t off = 0) const {
    size_t i = pos_ + off;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  Token consume() {
    Token tok = peek();
    if (pos_ + 1 < tokens_.size())
      ++pos_;
    return tok;
  }

  std::string describe(const Token &tok) const {
    switch (tok.kind) {
    case Tok::Bare:
      return "'" + tok.text + "'";
    case Tok::Value:
      return "%" + tok.text;
    case Tok::Symbol:
      return "@" + tok.text;
    case Tok::Int:
      return "integer " + tok.text;
    case Tok::End:
      return "end of input";
    case Tok::Arrow:
      return "'->'";
    default: {
      static const std::unordered_map<int, const char *> punct = {
          {int(Tok::LParen), "("},   {int(Tok::RParen), ")"},
          {int(Tok::LBrace), "{"},   {int(Tok::RBrace), "}"},
          {int(Tok::LBracket), "["}, {int(Tok::RBracket), "]"},
          {int(Tok::Less), "<"},     {int(Tok::Greater), ">"},
          {int(Tok::Equal), "="},    {int(Tok::Comma), ","},
          {int(Tok::Colon), ":"},    {int(Tok::Plus), "+"},
          {int(Tok::Star), "*"}};
      return "'" + std::string(punct.at(int(tok.kind))) + "'";
    }
    }
  }

  [[noreturn]] void failHere(std::string expected) {
    fail(peek().span, std::move(expected), describe(peek()));
  }

  Token expect(Tok kind, const char *what) {
    if (peek().kind != kind)
      failHere(what);
    return consume();
  }

  Token expectBare(const char *keyword) {
    if (peek().kind != Tok::Bare || peek().text != keyword)
      failHere("'" + std::string(keyword) + "'");
    return consume();
  }

  bool atBare(const char *keyword) const {
    return peek().kind == Tok::Bare && peek().text == keyword;
  }

  //===--------------------------------------------------------------------===//
  // Scope tracking
  //===--------------------------------------------------------------------===//

  struct Binding {
    ValKind kind;
    MemRefType type; // meaningful only for memrefs
  };

  const Binding *lookup(const std::string &id) const {
    for (auto scope = scopes_.rbegin(); scope != scopes_.rend(); ++scope) {
      auto it = scope->find(id);
      if (it != scope->end())
        return &it->second;
    }
    return nullptr;
  }

  void define(const Token &tok, ValKind kind, MemRefType type = {}) {
    if (lookup(tok.text))
      fail(tok.span, "a fresh value name (redefinition is not allowed)",
           "%" + tok.text);
    scopes_.back().emplace(tok.text, Binding{kind, type});
  }

  Token expectUse(ValKind kind, const char *role) {
    if (peek().kind != Tok::Value)
      failHere(std::string(role));
    Token tok = consume();
    const Binding *binding = lookup(tok.text);
    if (!binding)
      fail(tok.span, std::string(role), "undefined %" + tok.text);
    if (binding->kind != kind)
      fail(tok.span, std::string(role),
           "%" + tok.text + " (" + kindName(binding->kind) + ")");
    return tok;
  }

  //===--------------------------------------------------------------------===//
  // Types and expressions
  //===--------------------------------------------------------------------===//

  MemRefType parseMemRefType() {
    expectBare("memref");
    expect(Tok::Less, "'<'");
    Token len = expect(Tok::Int, "a memref length");
    if (len.value < 1)
      fail(len.span, "a memref length of at least 1", len.text);
    expectBare("xi32");
    MemRefType type;
    type.length = len.value;
    type.space = 0;
    if (peek().kind == Tok::Comma) {
      consume();
      Token space = expect(Tok::Int, "a memory space");
      if (space.value < 0)
        fail(space.span, "a non-negative memory space", space.text);
      type.space = static_cast<int>(space.value);
    }
    expect(Tok::Greater, "'>'");
    return type;
  }

  AffineExpr parseAffineExpr() {
    AffineExpr expr;
    for (;;) {
      if (peek().kind == Tok::Int) {
        Token lhs = consume();
        if (peek().kind == Tok::Star) {
          consume();
          Token var = expectUse(ValKind::Index,
                                "an index variable defined by an "
                                "enclosing loop");
          expr.terms.push_back({var.text, lhs.value});
        } else {
          expr.constant += lhs.value;
        }
      } else if (peek().kind == Tok::Value) {
        Token var = expectUse(ValKind::Index,
                              "an index variable defined by an "
                              "enclosing loop");
        int64_t coeff = 1;
        if (peek().kind == Tok::Star) {
          consume();
          Token rhs = expect(Tok::Int, "a constant coefficient");
          coeff = rhs.value;
        }
        expr.terms.push_back({var.text, coeff});
      } else {
        failHere("an index expression term (%var, %var * C, or C)");
      }
      if (peek().kind != Tok::Plus)
        return expr;
      consume();
    }
  }

  /// Parses `%mem[expr] : memref<...>` shared by load and store, checking the
  /// annotation against the operand's declared type.
  std::pair<Token, AffineExpr> parseMemAccess() {
    Token mem = expectUse(ValKind::Memref, "a memref argument");
    expect(Tok::LBracket, "'['");
    AffineExpr expr = parseAffineExpr();
    expect(Tok::RBracket, "']'");
    expect(Tok::Colon, "':'");
    SourceSpan typeSpan = peek().span;
    MemRefType annotated = parseMemRefType();
    const MemRefType declared = lookup(mem.text)->type;
    if (!(annotated == declared))
      fail(typeSpan,
           "the declared type memref<" + std::to_string(declared.length) +
               "xi32" +
               (declared.space != 0 ? ", " + std::to_string(declared.space)
                                    : "") +
               ">",
           "memref<" + std::to_string(annotated.length) + "xi32" +
               (annotated.space != 0 ? ", " + std::to_string(annotated.space)
                                     : "") +
               ">");
    return {mem, expr};
  }

  //===--------------------------------------------------------------------===//
  // Operations
  //===--------------------------------------------------------------------===//

  enum class Region { FuncBody, LoopPlain, LoopIterArgs };

  std::vector<AffineOp> parseRegion(Region region) {
    std::vector<AffineOp> ops;
    bool terminated = false;
    while (peek().kind != Tok::RBrace) {
      if (terminated)
        failHere("'}' (the terminator must be the last operation)");
      ops.push_back(parseOp(region, terminated));
    }
    if (!terminated) {
      if (region == Region::FuncBody)
        failHere("'return' to terminate the function body");
      if (region == Region::LoopIterArgs)
        failHere("'affine.yield' to terminate a loop that carries iter_args");
    }
    return ops;
  }

  AffineOp parseOp(Region region, bool &terminated) {
    if (peek().kind == Tok::Value) {
      Token result = consume();
      expect(Tok::Equal, "'='");
      if (atBare("arith.constant"))
        return parseConstant(result);
      if (atBare("affine.load"))
        return parseLoad(result);
      if (atBare("arith.muli"))
        return parseMulAdd(result, /*isMul=*/true);
      if (atBare("arith.addi"))
        return parseMulAdd(result, /*isMul=*/false);
      if (atBare("affine.for"))
        return parseFor(&result);
      failHere("'arith.constant', 'affine.load', 'arith.muli', 'arith.addi', "
               "or 'affine.for'");
    }
    if (atBare("affine.store"))
      return parseStore();
    if (atBare("affine.for"))
      return parseFor(nullptr);
    if (atBare("affine.yield")) {
      if (region != Region::LoopIterArgs)
        failHere("an operation (affine.yield only terminates a loop that "
                 "carries iter_args)");
      terminated = true;
      return parseYield();
    }
    if (atBare("return")) {
      if (region != Region::FuncBody)
        failHere("an operation (return only terminates a function body)");
      terminated = true;
      consume();
      return AffineOp{ReturnOp{}};
    }
    failHere("an operation (a %result definition, affine.store, affine.for, "
             "affine.yield, or return)");
  }

  AffineOp parseConstant(const Token &result) {
    expectBare("arith.constant");
    Token value = expect(Tok::Int, "an integer constant");
    if (value.value < INT32_MIN || value.value > INT32_MAX)
      fail(value.span, "a 32-bit integer constant", value.text);
    expect(Tok::Colon, "':'");
    expectBare("i32");
    define(result, ValKind::I32);
    return AffineOp{ConstantOp{result.text, static_cast<int32_t>(value.value)}};
  }

  AffineOp parseLoad(const Token &result) {
    expectBare("affine.load");
    auto [mem, expr] = parseMemAccess();
    define(result, ValKind::I32);
    return AffineOp{LoadOp{result.text, mem.text, std::move(expr)}};
  }

  AffineOp parseStore() {
    expectBare("affine.store");
    Token value = expectUse(ValKind::I32, "an i32 value to store");
    expect(Tok::Comma, "','");
    auto [mem, expr] = parseMemAccess();
    return AffineOp{StoreOp{value.text, mem.text, std::move(expr)}};
  }

  AffineOp parseMulAdd(const Token &result, bool isMul) {
    consume(); // arith.muli / arith.addi
    Token lhs = expectUse(ValKind::I32, "an i32 operand");
    expect(Tok::Comma, "','");
    Token rhs = expectUse(ValKind::I32, "an i32 operand");
    expect(Tok::Colon, "':'");
    expectBare("i32");
    define(result, ValKind::I32);
    if (isMul)
      return AffineOp{MulOp{result.text, lhs.text, rhs.text}};
    return AffineOp{AddOp{result.text, lhs.text, rhs.text}};
  }

  AffineOp parseYield() {
    expectBare("affine.yield");
    Token value = expectUse(ValKind::I32, "an i32 value to yield");
    if (peek().kind == Tok::Comma)
      failHere("':' (a single yielded value is the supported subset)");
    expect(Tok::Colon, "':'");
    expectBare("i32");
    return AffineOp{YieldOp{{value.text}}};
  }

  AffineOp parseFor(const Token *result) {
    Token kw = expectBare("affine.for");
    Token iv = expect(Tok::Value, "an induction variable");
    expect(Tok::Equal, "'='");
    Token lower = expect(Tok::Int, "a constant lower bound");
    expectBare("to");
    Token upper = expect(Tok::Int, "a constant upper bound");
    if (upper.value < lower.value)
      fail(upper.span, "an upper bound no smaller than the lower bound",
           upper.text);

    int64_t step = 1;
    if (atBare("step")) {
      consume();
      Token stepTok = expect(Tok::Int, "a constant step");
      if (stepTok.value < 1)
        fail(stepTok.span, "a step of at least 1", stepTok.text);
      step = stepTok.value;
      if ((upper.value - lower.value) % step != 0)
        fail(stepTok.span, "a step that evenly divides the iteration range",
             stepTok.text);
    }

    ForOp op;
    op.induction_var = iv.text;
    op.lower = lower.value;
    op.upper = upper.value;
    op.step = step;

    Token iterName{Tok::End, "", 0, {}};
    if (atBare("iter_args")) {
      consume();
      expect(Tok::LParen, "'('");
      iterName = expect(Tok::Value, "an iter_args binding");
      expect(Tok::Equal, "'='");
      Token init = expectUse(ValKind::I32, "an i32 initial value");
      if (peek().kind == Tok::Comma)
        failHere("')' (a single iter_args binding is the supported subset)");
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      expect(Tok::LParen, "'('");
      expectBare("i32");
      expect(Tok::RParen, "')'");
      op.iter_args.push_back({iterName.text, init.text});
    }

    if (result && op.iter_args.empty())
      fail(kw.span, "iter_args (a loop with a result must carry one)",
           "'affine.for'");
    if (!result && !op.iter_args.empty())
      fail(kw.span,
           "a %result binding (a loop with iter_args produces a value)",
           "'affine.for'");

    expect(Tok::LBrace, "'{'");
    scopes_.emplace_back();
    define(iv, ValKind::Index);
    if (!op.iter_args.empty())
      define(iterName, ValKind::I32);
    op.body = parseRegion(op.iter_args.empty() ? Region::LoopPlain
                                               : Region::LoopIterArgs);
    scopes_.pop_back();
    expect(Tok::RBrace, "'}'");

    if (result) {
      op.results.push_back(result->text);
      define(*result, ValKind::I32);
    }
    return AffineOp{std::move(op)};
  }

  AffineFunc parseFunc() {
    expectBare("func.func");
    Token name = expect(Tok::Symbol, "a function name (@name)");
    lastSymbolSpan_ = name.span;
    expect(Tok::LParen, "'('");

    AffineFunc func;
    func.name = name.text;
    scopes_.clear();
    scopes_.emplace_back();

    if (peek().kind != Tok::RParen) {
      for (;;) {
        Token arg = expect(Tok::Value, "an argument (%name: memref<...>)");
        expect(Tok::Colon, "':'");
        MemRefType type = parseMemRefType();
        define(arg, ValKind::Memref, type);
        func.args.push_back({arg.text, type});
        if (peek().kind != Tok::Comma)
          break;
        consume();
      }
    }
    expect(Tok::RParen, "')'");
    expect(Tok::LBrace, "'{'");
    func.body = parseRegion(Region::FuncBody);
    expect(Tok::RBrace, "'}'");
    return func;
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  std::vector<std::unordered_map<std::string, Binding>> scopes_;
  SourceSpan lastSymbolSpan_;
};

} // namespace

ParseResult loft::parse(const std::string &text) {
  ParseResult result;
  try {
    std::vector<Token> tokens = Lexer(text).lexAll();
    result.module = Parser(std::move(tokens)).parseModule();
  } catch (const ParseFail &caught) {
    result.error = caught.error;
  }
  return result;
}
