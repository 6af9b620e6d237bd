#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hypertest/kernel.hpp"
#include "hypertest/rational.hpp"

// Kernel text format
//
//   r t k [iota]
//   w_1 ... w_t                     class weights, rationals or decimals
//   t^r values for colour 1         lexicographic cell order, any line breaks
//   ...
//   t^r values for colour k
//
// k = 1 describes a plain (possibly signed) kernel. The optional word `iota`
// marks the last colour as the loop colour. '#' starts a comment line.

namespace hypertest {

/// Whitespace tokenizer that remembers the line of every token.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    while (!(line_stream_ >> tok)) {
      std::string line;
      if (!std::getline(in_, line)) return false;
      ++line_;
      auto p = line.find_first_not_of(" \t\r");
      if (p != std::string::npos && line[p] == '#') line.clear();
      line_stream_.clear();
      line_stream_.str(line);
    }
    return true;
  }

  std::string expect(const std::string& what) {
    std::string tok;
    if (!next(tok)) throw ParseError("unexpected end of input, expected " + what, line_);
    return tok;
  }

  long long expect_int(const std::string& what) {
    const auto tok = expect(what);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected integer " + what + ", got '" + tok + "'", line_);
    }
  }

  Rational expect_rational(const std::string& what) {
    const auto tok = expect(what);
    try {
      return parse_rational(tok);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_);
    }
  }

  /// Reads the rest of the current line as tokens (used for optional flags).
  std::vector<std::string> rest_of_line() {
    std::vector<std::string> out;
    std::string tok;
    while (line_stream_ >> tok) out.push_back(tok);
    return out;
  }

  void expect_end() {
    std::string tok;
    if (next(tok)) throw ParseError("trailing content '" + tok + "'", line_);
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::istringstream line_stream_;
  std::size_t line_ = 0;
};

struct KernelFile {
  bool colored = false;
  StepKernel<Rational> plain;           // k = 1
  ColoredStepKernel<Rational> kernel;   // k >= 2
};

inline KernelFile read_kernel(std::istream& in) {
  TokenReader rd(in);
  const long long r = rd.expect_int("r");
  const long long t = rd.expect_int("t");
  const long long k = rd.expect_int("k");
  const std::size_t header_line = rd.line();
  bool loop = false;
  for (const auto& flag : rd.rest_of_line()) {
    if (flag == "iota") loop = true;
    else throw ParseError("unknown header flag '" + flag + "'", header_line);
  }
  if (r < 1 || r > 8) throw ParseError("r out of range", header_line);
  if (t < 1 || k < 1) throw ParseError("t and k must be positive", header_line);
  if (static_cast<double>(t) * std::pow(static_cast<double>(t), static_cast<double>(r - 1)) > 1e8)
    throw ParseError("kernel too large", header_line);
  std::vector<Rational> w;
  for (long long i = 0; i < t; ++i) w.push_back(rd.expect_rational("class weight"));
  const std::size_t cells = ipow(static_cast<std::size_t>(t), static_cast<std::size_t>(r));
  std::vector<std::vector<Rational>> vals(static_cast<std::size_t>(k));
  for (auto& arr : vals)
    for (std::size_t c = 0; c < cells; ++c) arr.push_back(rd.expect_rational("kernel value"));
  const std::size_t last = rd.line();
  rd.expect_end();
  KernelFile out;
  try {
    if (k == 1) {
      if (loop) throw InvalidArgument("a plain kernel cannot have a loop colour");
      out.plain = StepKernel<Rational>(static_cast<std::size_t>(r), std::move(w), std::move(vals[0]));
    } else {
      out.colored = true;
      out.kernel = ColoredStepKernel<Rational>(static_cast<std::size_t>(r), std::move(w),
                                               std::move(vals), loop);
    }
  } catch (const Error& e) {
    throw ParseError(e.what(), last);
  }
  return out;
}

namespace detail {

template <class T>
void write_values(std::ostream& out, const std::vector<T>& vals, std::size_t t) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out << scalar_text(vals[i]);
    out << (((i + 1) % t == 0) ? '\n' : ' ');
  }
}

}  // namespace detail

template <class T>
void write_kernel(std::ostream& out, const StepKernel<T>& w) {
  out << w.r << ' ' << w.t << " 1\n";
  for (std::size_t i = 0; i < w.t; ++i) out << scalar_text(w.weights[i]) << (i + 1 == w.t ? '\n' : ' ');
  detail::write_values(out, w.values, w.t);
}

template <class T>
void write_kernel(std::ostream& out, const ColoredStepKernel<T>& w) {
  out << w.r << ' ' << w.t << ' ' << w.k << (w.has_loop_color ? " iota" : "") << '\n';
  for (std::size_t i = 0; i < w.t; ++i) out << scalar_text(w.weights[i]) << (i + 1 == w.t ? '\n' : ' ');
  for (const auto& arr : w.values) detail::write_values(out, arr, w.t);
}

inline KernelFile load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_kernel(in);
}

template <class K>
std::string kernel_text(const K& w) {
  std::ostringstream ss;
  write_kernel(ss, w);
  return ss.str();
}

}  // namespace hypertest
