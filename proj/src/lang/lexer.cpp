#include "qbc/lang/lexer.hpp"

#include <cctype>

namespace qbc {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Imag: return "imaginary number";
    case Tok::Ket: return "ket";
    case Tok::Bra: return "bra";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Assign: return "':='";
    case Tok::MulAssign: return "'*='";
    case Tok::Arrow: return "'=>'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::At: return "'@'";
    case Tok::Amp: return "'&'";
    case Tok::Dot: return "'.'";
    case Tok::Equals: return "'='";
  }
  return "?";
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool label_char(char c) { return ident_char(c) || c == '+' || c == '-'; }

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      t.begin = i_;
      if (i_ >= s_.size()) {
        t.kind = Tok::End;
        t.end = i_;
        out.push_back(t);
        return out;
      }
      lex_one(t);
      t.end = i_;
      out.push_back(std::move(t));
    }
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;

  char peek(std::size_t k = 0) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }
  void adv() {
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }
  [[noreturn]] void fail(const std::string& m) const { throw ParseError(m, line_, col_); }

  void skip_space() {
    for (;;) {
      while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) adv();
      if (peek() == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') adv();
        continue;
      }
      return;
    }
  }

  void lex_one(Token& t) {
    const char c = peek();
    if (ident_start(c)) {
      while (ident_char(peek())) t.text += s_[i_], adv();
      t.kind = Tok::Ident;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      lex_number(t);
      return;
    }
    if (c == '|') {
      std::size_t k = 1;
      while (label_char(peek(k))) ++k;
      if (peek(k) != '>' || k == 1) fail("malformed ket, expected |label>");
      adv();
      while (peek() != '>') t.text += s_[i_], adv();
      adv();
      t.kind = Tok::Ket;
      return;
    }
    if (c == '<') {
      std::size_t k = 1;
      while (label_char(peek(k))) ++k;
      if (peek(k) != '|' || k == 1) fail("malformed bra, expected <label|");
      adv();
      while (peek() != '|') t.text += s_[i_], adv();
      adv();
      t.kind = Tok::Bra;
      return;
    }
    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    if (two(':', '=')) return op2(t, Tok::Assign);
    if (two('*', '=')) return op2(t, Tok::MulAssign);
    if (two('=', '>')) return op2(t, Tok::Arrow);
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case ',': k = Tok::Comma; break;
      case ';': k = Tok::Semi; break;
      case ':': k = Tok::Colon; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '@': k = Tok::At; break;
      case '&': k = Tok::Amp; break;
      case '.': k = Tok::Dot; break;
      case '=': k = Tok::Equals; break;
      default: fail(std::string("unexpected character '") + c + "'");
    }
    t.kind = k;
    t.text = std::string(1, c);
    adv();
  }

  void op2(Token& t, Tok k) {
    t.kind = k;
    t.text = std::string(s_.substr(i_, 2));
    adv();
    adv();
  }

  void lex_number(Token& t) {
    auto digits = [&] {
      while (std::isdigit(static_cast<unsigned char>(peek()))) t.text += s_[i_], adv();
    };
    digits();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      t.text += '.', adv();
      digits();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      t.text += s_[i_], adv();
      if (peek() == '+' || peek() == '-') t.text += s_[i_], adv();
      digits();
    }
    t.kind = Tok::Number;
    if (peek() == 'i' && !ident_char(peek(1))) {
      adv();
      t.kind = Tok::Imag;
    }
  }
};

}  // namespace

std::vector<Token> tokenize(std::string_view src) { return Lexer(src).run(); }

}  // namespace qbc
