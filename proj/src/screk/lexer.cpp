#include "grouptrack/screk/parser.hpp"

#include <cctype>

namespace grouptrack::screk {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = peek();
      if (ident_start(c)) {
        t.kind = TokenKind::Ident;
        while (pos_ < text_.size() && ident_char(peek())) t.text += take();
      } else if (digit(c) || (c == '-' && digit(peek(1)))) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_symbol(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  char take() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t line, std::size_t col) const {
    throw ParseError(msg, line, col);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && peek() != '\n') take();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    t.kind = TokenKind::Int;
    if (peek() == '-') t.text += take();
    while (digit(peek())) t.text += take();
    if (peek() == '.' && digit(peek(1))) {
      t.kind = TokenKind::Real;
      t.text += take();
      while (digit(peek())) t.text += take();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
      t.kind = TokenKind::Real;
      t.text += take();
      if (peek() == '+' || peek() == '-') t.text += take();
      while (digit(peek())) t.text += take();
    }
    if (ident_char(peek())) fail("malformed number", t.line, t.column);
  }

  void lex_string(Token& t) {
    t.kind = TokenKind::String;
    take();
    while (true) {
      if (pos_ >= text_.size() || peek() == '\n') fail("unterminated string", t.line, t.column);
      const char c = take();
      if (c == '"') return;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated string", t.line, t.column);
        t.text += take();
      } else {
        t.text += c;
      }
    }
  }

  void lex_symbol(Token& t) {
    const char c = peek();
    auto single = [&](TokenKind k) {
      t.kind = k;
      t.text = std::string(1, take());
    };
    auto pair = [&](TokenKind k) {
      t.kind = k;
      t.text = std::string(1, take());
      t.text += take();
    };
    switch (c) {
      case '(': return single(TokenKind::LParen);
      case ')': return single(TokenKind::RParen);
      case '{': return single(TokenKind::LBrace);
      case '}': return single(TokenKind::RBrace);
      case '[': return single(TokenKind::LBracket);
      case ']': return single(TokenKind::RBracket);
      case ',': return single(TokenKind::Comma);
      case ';': return single(TokenKind::Semicolon);
      case ':': return single(TokenKind::Colon);
      case '@': return single(TokenKind::At);
      case '=': return single(TokenKind::Eq);
      case '<': return peek(1) == '=' ? pair(TokenKind::Le) : single(TokenKind::Lt);
      case '>': return peek(1) == '=' ? pair(TokenKind::Ge) : single(TokenKind::Gt);
      case '!':
        if (peek(1) == '=') return pair(TokenKind::Ne);
        break;
      case '-':
        if (peek(1) == '>') return pair(TokenKind::Arrow);
        break;
      default: break;
    }
    fail(std::string("unexpected character '") + c + "'", t.line, t.column);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace grouptrack::screk
