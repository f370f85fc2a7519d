#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qbc/linalg/errors.hpp"

namespace qbc {

/// Syntax error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

enum class Tok {
  End,
  Ident,
  Number,  // lexeme kept verbatim so labels like 00 survive
  Imag,    // 2i
  Ket,     // |01>, text is the inside
  Bra,     // <01|
  LParen,
  RParen,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Colon,
  Assign,    // :=
  MulAssign, // *=
  Arrow,     // =>
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  At,
  Amp,
  Dot,
  Equals,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1, col = 1;
  std::size_t begin = 0, end = 0;  // byte offsets into the source
};

std::vector<Token> tokenize(std::string_view src);
const char* tok_name(Tok t);

}  // namespace qbc
