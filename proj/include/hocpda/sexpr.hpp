#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hocpda {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

// Minimal s-expression: either an atom or a parenthesised list.
struct Sexp {
  bool is_atom = false;
  std::string atom;
  std::vector<Sexp> items;
  std::size_t line = 0;

  bool is_list() const { return !is_atom; }
  bool is(std::string_view a) const { return is_atom && atom == a; }
  std::size_t size() const { return items.size(); }
  const Sexp& operator[](std::size_t i) const { return items.at(i); }

  // Head keyword of a list, or "" when the list is empty or starts with a list.
  std::string head() const {
    if (is_atom || items.empty() || !items[0].is_atom) return "";
    return items[0].atom;
  }

  std::string to_string() const {
    if (is_atom) return atom;
    std::string out = "(";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ' ';
      out += items[i].to_string();
    }
    return out + ")";
  }

  static Sexp make_atom(std::string a, std::size_t line = 0) {
    Sexp s;
    s.is_atom = true;
    s.atom = std::move(a);
    s.line = line;
    return s;
  }
};

namespace detail {

class SexpReader {
 public:
  explicit SexpReader(std::string_view text) : text_(text) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_);
    char c = text_[pos_];
    if (c == ')') throw ParseError("unbalanced ')'", line_);
    if (c == '(') {
      Sexp list;
      list.line = line_;
      ++pos_;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw ParseError("missing ')'", list.line);
        if (text_[pos_] == ')') {
          ++pos_;
          return list;
        }
        list.items.push_back(read());
      }
    }
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' ||
          std::isspace(static_cast<unsigned char>(d)))
        break;
      ++pos_;
    }
    return Sexp::make_atom(std::string(text_.substr(start, pos_ - start)), line_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace detail

inline std::vector<Sexp> read_sexps(std::string_view text) {
  return detail::SexpReader(text).read_all();
}

inline Sexp read_sexp(std::string_view text) {
  auto all = read_sexps(text);
  if (all.size() != 1)
    throw ParseError("expected exactly one expression, got " +
                         std::to_string(all.size()),
                     1);
  return all.front();
}

inline long parse_int(const Sexp& s, const char* what) {
  if (!s.is_atom) throw ParseError(std::string("expected ") + what, s.line);
  try {
    std::size_t used = 0;
    long v = std::stol(s.atom, &used);
    if (used != s.atom.size()) throw std::invalid_argument(s.atom);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(std::string("expected ") + what + ", got '" + s.atom + "'",
                     s.line);
  }
}

inline const std::string& expect_atom(const Sexp& s, const char* what) {
  if (!s.is_atom) throw ParseError(std::string("expected ") + what, s.line);
  return s.atom;
}

}  // namespace hocpda
