//===- netlist_check.cpp - Structural checks over emitted Verilog ---------===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Parses the Verilog subset the backend emits — declarations, continuous
// assigns, clocked always blocks with if/case — and re-derives the facts a
// lint pass would: one driver per wire, no undeclared identifiers, widths
// equal across every connection, handshake ports present, and the cell
// inventory of the source component realized wire-for-wire. It deliberately
// re-parses the text instead of trusting the emitter, so hand-edited or
// corrupted output is caught.
//
//===----------------------------------------------------------------------===//

#include "loft/rtl_backend.hpp"

#include <cctype>
#include <map>
#include <string>
#include <vector>

namespace loft {

namespace {

//===----------------------------------------------------------------------===//
// Tokens
//===----------------------------------------------------------------------===//

struct Token {
  enum Kind { Id, Sized, Number, Punct, End } kind = End;
  std::string text;   // identifier or punctuation spelling
  int width = 0;      // sized literals
  uint64_t value = 0; // sized literals and plain numbers
  int line = 1;
};

class Lexer {
public:
  Lexer(const std::string &text, Diagnostics &diags)
      : text_(text), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() &&
                 text_[pos_ + 1] == '/') {
        skipLine();
      } else if (c == '`') {
        skipLine(); // compiler directives carry no structure we check
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        tokens.push_back(identifier());
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        tokens.push_back(number());
      } else {
        tokens.push_back(punct());
      }
    }
    tokens.push_back({Token::End, "", 0, 0, line_});
    return tokens;
  }

private:
  void skipLine() {
    while (pos_ < text_.size() && text_[pos_] != '\n')
      ++pos_;
  }

  Token identifier() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_' || text_[pos_] == '$'))
      ++pos_;
    return {Token::Id, text_.substr(start, pos_ - start), 0, 0, line_};
  }

  Token number() {
    uint64_t first = 0;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      first = first * 10 + static_cast<uint64_t>(text_[pos_++] - '0');
    if (pos_ + 1 < text_.size() && text_[pos_] == '\'' &&
        text_[pos_ + 1] == 'd') {
      pos_ += 2;
      uint64_t value = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        value = value * 10 + static_cast<uint64_t>(text_[pos_++] - '0');
      Token token{Token::Sized, "", static_cast<int>(first), value, line_};
      if (first < 1 || first > 64)
        report("literal width " + std::to_string(first) + " out of range");
      else if (first < 64 && (value >> first) != 0)
        report("literal value " + std::to_string(value) + " does not fit in " +
               std::to_string(first) + " bits");
      return token;
    }
    return {Token::Number, "", 0, first, line_};
  }

  Token punct() {
    static const char *two[] = {"==", "!=", "&&", "||", "<="};
    for (const char *op : two)
      if (text_.compare(pos_, 2, op) == 0) {
        pos_ += 2;
        return {Token::Punct, op, 0, 0, line_};
      }
    Token token{Token::Punct, text_.substr(pos_, 1), 0, 0, line_};
    ++pos_;
    return token;
  }

  void report(const std::string &message) {
    diags_.push_back({"sv:" + std::to_string(line_), message});
  }

  const std::string &text_;
  Diagnostics &diags_;
  size_t pos_ = 0;
  int line_ = 1;
};

//===----------------------------------------------------------------------===//
// Parser and checks
//===----------------------------------------------------------------------===//

struct Symbol {
  enum Cls { Input, Output, Wire, Reg, Localparam } cls = Wire;
  int width = 1;
  int64_t array = 0; // element count when declared as an array
  int assigns = 0;   // continuous-assign drivers
  int writes = 0;    // nonblocking writes
};

class Checker {
public:
  Checker(const HwComponent &comp, const std::string &text) : comp_(comp) {
    tokens_ = Lexer(text, diags_).run();
  }

  Diagnostics run() {
    if (!parseModule())
      return diags_; // parse diagnostics already explain the failure
    checkDrivers();
    checkComponent();
    return diags_;
  }

private:
  const Token &peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  bool acceptPunct(const std::string &text) {
    if (peek().kind == Token::Punct && peek().text == text) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool acceptId(const std::string &text) {
    if (peek().kind == Token::Id && peek().text == text) {
      ++pos_;
      return true;
    }
    return false;
  }

  void report(const std::string &message) {
    diags_.push_back(
        {"sv:" + std::to_string(peek().line), message});
  }

  bool fail(const std::string &expected) {
    std::string got = peek().kind == Token::End ? "end of text"
                      : peek().kind == Token::Id
                          ? "'" + peek().text + "'"
                          : peek().kind == Token::Punct
                                ? "'" + peek().text + "'"
                                : "a number";
    report("expected " + expected + ", found " + got);
    return false;
  }

  bool expectPunct(const std::string &text) {
    return acceptPunct(text) || fail("'" + text + "'");
  }

  bool expectId(std::string &out) {
    if (peek().kind != Token::Id)
      return fail("an identifier");
    out = take().text;
    return true;
  }

  //===--------------------------------------------------------------------===//
  // Declarations
  //===--------------------------------------------------------------------===//

  /// Parses `[msb:0]` if present; returns msb + 1, or 1 when absent.
  bool parseRange(int &width) {
    width = 1;
    if (!acceptPunct("["))
      return true;
    if (peek().kind != Token::Number)
      return fail("a bit index");
    uint64_t msb = take().value;
    if (!expectPunct(":"))
      return false;
    if (peek().kind != Token::Number || take().value != 0)
      return fail("a [msb:0] range");
    if (!expectPunct("]"))
      return false;
    width = static_cast<int>(msb) + 1;
    return true;
  }

  bool declare(const std::string &name, Symbol symbol) {
    if (!symbols_.emplace(name, symbol).second) {
      report("'" + name + "' is declared twice");
      return false;
    }
    return true;
  }

  bool parseModule() {
    if (!acceptId("module"))
      return fail("'module'");
    std::string name;
    if (!expectId(name))
      return false;
    if (name != comp_.name)
      report("module name '" + name + "' does not match component '" +
             comp_.name + "'");
    if (!expectPunct("("))
      return false;
    std::vector<std::pair<std::string, bool>> ports; // name, is_input
    do {
      bool is_input = acceptId("input");
      if (!is_input && !acceptId("output"))
        return fail("'input' or 'output'");
      if (!acceptId("wire"))
        return fail("'wire'");
      std::string port;
      if (!expectId(port))
        return false;
      ports.emplace_back(port, is_input);
      declare(port, {is_input ? Symbol::Input : Symbol::Output, 1, 0, 0, 0});
    } while (acceptPunct(","));
    if (!expectPunct(")") || !expectPunct(";"))
      return false;

    const std::vector<std::pair<std::string, bool>> expected = {
        {"clk", true}, {"reset", true}, {"go", true}, {"done", false}};
    if (ports != expected)
      report("handshake ports must be exactly clk, reset, go in and done out");

    while (!acceptId("endmodule")) {
      if (peek().kind == Token::End)
        return fail("'endmodule'");
      if (!parseItem())
        return false;
    }
    if (peek().kind != Token::End)
      return fail("end of text after 'endmodule'");
    return true;
  }

  bool parseItem() {
    if (acceptId("localparam")) {
      int width;
      std::string name;
      if (!parseRange(width) || !expectId(name) || !expectPunct("="))
        return false;
      if (peek().kind != Token::Sized)
        return fail("a sized literal");
      Token literal = take();
      if (literal.width != width)
        report("localparam '" + name + "' is " + std::to_string(width) +
               " bits but its value is " + std::to_string(literal.width) +
               " bits");
      declare(name, {Symbol::Localparam, width, 0, 0, 0});
      return expectPunct(";");
    }
    if (acceptId("wire")) {
      int width;
      std::string name;
      if (!parseRange(width) || !expectId(name))
        return false;
      declare(name, {Symbol::Wire, width, 0, 0, 0});
      return expectPunct(";");
    }
    if (acceptId("reg")) {
      int width;
      std::string name;
      if (!parseRange(width) || !expectId(name))
        return false;
      Symbol symbol{Symbol::Reg, width, 0, 0, 0};
      if (acceptPunct("[")) { // array declaration: [0:len-1]
        if (peek().kind != Token::Number || take().value != 0)
          return fail("a [0:len-1] array range");
        if (!expectPunct(":"))
          return false;
        if (peek().kind != Token::Number)
          return fail("an array bound");
        symbol.array = static_cast<int64_t>(take().value) + 1;
        if (!expectPunct("]"))
          return false;
      }
      declare(name, symbol);
      return expectPunct(";");
    }
    if (acceptId("assign")) {
      std::string name;
      if (!expectId(name))
        return false;
      auto it = symbols_.find(name);
      if (it == symbols_.end()) {
        report("assign drives undeclared '" + name + "'");
      } else if (it->second.cls == Symbol::Wire ||
                 it->second.cls == Symbol::Output) {
        it->second.assigns += 1;
      } else {
        report("assign drives '" + name + "', which is not a wire");
      }
      if (!expectPunct("="))
        return false;
      bool lone_literal = peek().kind == Token::Sized &&
                          tokens_[pos_ + 1].kind == Token::Punct &&
                          tokens_[pos_ + 1].text == ";";
      if (lone_literal)
        constants_[name] = peek().value;
      int width = parseExpr();
      if (it != symbols_.end() && width > 0 && it->second.width != width)
        report("'" + name + "' is " + std::to_string(it->second.width) +
               " bits but is assigned a " + std::to_string(width) +
               "-bit expression");
      return expectPunct(";");
    }
    if (acceptId("always")) {
      if (!expectPunct("@") || !expectPunct("("))
        return false;
      if (!acceptId("posedge"))
        return fail("'posedge'");
      std::string clock;
      if (!expectId(clock))
        return false;
      if (clock != "clk")
        report("always block is clocked by '" + clock + "', not clk");
      if (!expectPunct(")"))
        return false;
      return parseStmt();
    }
    return fail("a declaration, assign, or always block");
  }

  //===--------------------------------------------------------------------===//
  // Statements
  //===--------------------------------------------------------------------===//

  bool parseStmt() {
    if (acceptId("begin")) {
      while (!acceptId("end"))
        if (peek().kind == Token::End || !parseStmt())
          return fail("'end'");
      return true;
    }
    if (acceptId("if")) {
      if (!expectPunct("("))
        return false;
      int width = parseExpr();
      if (width > 1)
        report("if condition is " + std::to_string(width) + " bits wide");
      if (!expectPunct(")") || !parseStmt())
        return false;
      if (acceptId("else"))
        return parseStmt();
      return true;
    }
    if (acceptId("case")) {
      if (!expectPunct("("))
        return false;
      int subject = parseExpr();
      if (!expectPunct(")"))
        return false;
      while (!acceptId("endcase")) {
        if (peek().kind == Token::End)
          return fail("'endcase'");
        if (acceptId("default")) {
          if (!expectPunct(":") || !parseStmt())
            return false;
          continue;
        }
        std::string label;
        if (!expectId(label))
          return false;
        auto it = symbols_.find(label);
        if (it == symbols_.end() || it->second.cls != Symbol::Localparam)
          report("case label '" + label + "' is not a localparam");
        else if (subject > 0 && it->second.width != subject)
          report("case label '" + label + "' width does not match subject");
        if (!expectPunct(":") || !parseStmt())
          return false;
      }
      return true;
    }
    // Nonblocking assignment: `name <= expr;` or `name[expr] <= expr;`.
    std::string name;
    if (!expectId(name))
      return false;
    auto it = symbols_.find(name);
    int target_width = -1;
    if (it == symbols_.end()) {
      report("assignment to undeclared '" + name + "'");
    } else if (it->second.cls != Symbol::Reg) {
      report("nonblocking assignment to '" + name + "', which is not a reg");
    } else {
      target_width = it->second.width;
      it->second.writes += 1;
    }
    if (acceptPunct("[")) {
      if (it != symbols_.end() && it->second.array == 0)
        report("'" + name + "' is indexed but is not an array");
      int index = parseExpr();
      if (index > 0 && index != 32)
        report("memory index into '" + name + "' is " +
               std::to_string(index) + " bits, addresses are 32");
      if (!expectPunct("]"))
        return false;
    } else if (it != symbols_.end() && it->second.array > 0) {
      report("array '" + name + "' written without an index");
    }
    if (!expectPunct("<="))
      return false;
    int width = parseExpr();
    if (width > 0 && target_width > 0 && width != target_width)
      report("'" + name + "' is " + std::to_string(target_width) +
             " bits but is written with a " + std::to_string(width) +
             "-bit expression");
    return expectPunct(";");
  }

  //===--------------------------------------------------------------------===//
  // Expressions (width-checked; -1 poisons enclosing checks)
  //===--------------------------------------------------------------------===//

  int parseExpr() { return parseTernary(); }

  int parseTernary() {
    int cond = parseOr();
    if (!acceptPunct("?"))
      return cond;
    if (cond > 1)
      report("ternary condition is " + std::to_string(cond) + " bits wide");
    int then_width = parseTernary();
    if (!expectPunct(":"))
      return -1;
    int else_width = parseTernary();
    if (then_width > 0 && else_width > 0 && then_width != else_width) {
      report("ternary arms differ: " + std::to_string(then_width) + " vs " +
             std::to_string(else_width) + " bits");
      return -1;
    }
    return then_width > 0 ? then_width : else_width;
  }

  int parseOr() {
    int width = parseAnd();
    while (acceptPunct("||")) {
      int rhs = parseAnd();
      if (width > 1 || rhs > 1)
        report("'||' operands must be single bits");
      width = 1;
    }
    return width;
  }

  int parseAnd() {
    int width = parseEquality();
    while (acceptPunct("&&")) {
      int rhs = parseEquality();
      if (width > 1 || rhs > 1)
        report("'&&' operands must be single bits");
      width = 1;
    }
    return width;
  }

  int parseEquality() {
    int width = parseRelational();
    while (peek().kind == Token::Punct &&
           (peek().text == "==" || peek().text == "!=")) {
      std::string op = take().text;
      int rhs = parseRelational();
      if (width > 0 && rhs > 0 && width != rhs)
        report("'" + op + "' compares " + std::to_string(width) + " and " +
               std::to_string(rhs) + " bit operands");
      width = 1;
    }
    return width;
  }

  int parseRelational() {
    int width = parseAdd();
    while (acceptPunct("<")) {
      int rhs = parseAdd();
      if (width > 0 && rhs > 0 && width != rhs)
        report("'<' compares " + std::to_string(width) + " and " +
               std::to_string(rhs) + " bit operands");
      width = 1;
    }
    return width;
  }

  int parseAdd() {
    int width = parseMul();
    while (acceptPunct("+")) {
      int rhs = parseMul();
      if (width > 0 && rhs > 0 && width != rhs) {
        report("'+' mixes " + std::to_string(width) + " and " +
               std::to_string(rhs) + " bit operands");
        width = -1;
      }
      if (rhs <= 0)
        width = -1;
    }
    return width;
  }

  int parseMul() {
    int width = parsePrimary();
    while (acceptPunct("*")) {
      int rhs = parsePrimary();
      if (width > 0 && rhs > 0 && width != rhs) {
        report("'*' mixes " + std::to_string(width) + " and " +
               std::to_string(rhs) + " bit operands");
        width = -1;
      }
      if (rhs <= 0)
        width = -1;
    }
    return width;
  }

  int parsePrimary() {
    if (acceptPunct("(")) {
      int width = parseExpr();
      if (!expectPunct(")"))
        return -1;
      return width;
    }
    if (peek().kind == Token::Sized)
      return take().width;
    if (peek().kind == Token::Number) {
      report("unsized constant in expression");
      take();
      return -1;
    }
    std::string name;
    if (!expectId(name))
      return -1;
    auto it = symbols_.find(name);
    if (it == symbols_.end()) {
      report("identifier '" + name + "' is not declared");
      if (acceptPunct("[")) { // still consume the index
        parseExpr();
        expectPunct("]");
      }
      return -1;
    }
    if (acceptPunct("[")) {
      if (it->second.array == 0)
        report("'" + name + "' is indexed but is not an array");
      int index = parseExpr();
      if (index > 0 && index != 32)
        report("memory index into '" + name + "' is " +
               std::to_string(index) + " bits, addresses are 32");
      if (!expectPunct("]"))
        return -1;
      return it->second.width;
    }
    if (it->second.array > 0) {
      report("array '" + name + "' used without an index");
      return -1;
    }
    return it->second.width;
  }

  //===--------------------------------------------------------------------===//
  // Whole-module checks
  //===--------------------------------------------------------------------===//

  void post(const std::string &message) { diags_.push_back({"sv", message}); }

  void checkDrivers() {
    for (const auto &[name, symbol] : symbols_) {
      switch (symbol.cls) {
      case Symbol::Input:
        if (symbol.assigns > 0)
          post("input port '" + name + "' must not be driven");
        break;
      case Symbol::Output:
      case Symbol::Wire:
        if (symbol.assigns == 0)
          post("wire '" + name + "' is never driven");
        else if (symbol.assigns > 1)
          post("wire '" + name + "' is driven " +
               std::to_string(symbol.assigns) + " times");
        break;
      case Symbol::Reg:
        if (symbol.writes == 0)
          post("reg '" + name + "' is never written");
        break;
      case Symbol::Localparam:
        break;
      }
    }
  }

  const Symbol *lookup(const std::string &name, Symbol::Cls cls) {
    auto it = symbols_.find(name);
    if (it == symbols_.end() || it->second.cls != cls)
      return nullptr;
    return &it->second;
  }

  void checkComponent() {
    for (const Cell &cell : comp_.cells) {
      if (cell.kind == CellKind::Memory) {
        const Symbol *array = lookup(cell.name, Symbol::Reg);
        if (!array || array->array != cell.length ||
            array->width != static_cast<int>(cell.width))
          post("memory '" + cell.name + "' is not realized as a " +
               std::to_string(cell.width) + "-bit array of " +
               std::to_string(cell.length) + " words");
      }
      for (const std::string &port : cell_ports(cell.kind)) {
        PortInfo info = *cell_port(cell, port);
        std::string wire = cell.name + "_" + port;
        bool is_reg = cell.kind == CellKind::Register && port == "out";
        const Symbol *symbol =
            lookup(wire, is_reg ? Symbol::Reg : Symbol::Wire);
        if (!symbol)
          post("cell port " + cell.name + "." + port + " has no " +
               (is_reg ? std::string("reg '") : std::string("wire '")) + wire +
               "'");
        else if (symbol->width != info.width)
          post("'" + wire + "' is " + std::to_string(symbol->width) +
               " bits, port is " + std::to_string(info.width));
      }
      if (cell.kind == CellKind::Constant) {
        auto it = constants_.find(cell.name + "_out");
        if (it == constants_.end())
          post("constant '" + cell.name + "' is not assigned a literal");
        else if (it->second != cell.value)
          post("constant '" + cell.name + "' emits " +
               std::to_string(it->second) + ", cell holds " +
               std::to_string(cell.value));
      }
    }
    if (!lookup("state", Symbol::Reg))
      post("no FSM state register");
    if (!lookup("fsm_idle", Symbol::Localparam) ||
        !lookup("fsm_done", Symbol::Localparam))
      post("FSM idle/done states are missing");
  }

  const HwComponent &comp_;
  std::vector<Token> tokens_;
  size_t pos_ = 0;
  Diagnostics diags_;
  std::map<std::string, Symbol> symbols_;
  std::map<std::string, uint64_t> constants_;
};

} // namespace

Diagnostics netlist_check(const HwComponent &component,
                          const std::string &verilog) {
  return Checker(component, verilog).run();
}

} // namespace loft
