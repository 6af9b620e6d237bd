#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hypertest/hypergraph.hpp"

// Hypergraph text format
//
//   r n m k
//   v_1 ... v_r c        (m lines, 1-based sorted vertex ids, colour in 1..k)
//
// Slots that are not listed carry the background colour k. A simple
// hypergraph is the k = 2 case with edges listed in colour 1. Blank lines and
// lines starting with '#' are ignored. The writer lists every non-background
// slot in lexicographic order, so output is byte-stable.

namespace hypertest {

namespace detail {

inline bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '#') continue;
    return true;
  }
  return false;
}

inline std::vector<long long> parse_ints(const std::string& line, std::size_t lineno) {
  std::istringstream ss(line);
  std::vector<long long> out;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("expected integer, got '" + tok + "'", lineno);
    }
  }
  return out;
}

}  // namespace detail

inline ColoredHypergraph read_colored_hypergraph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!detail::next_content_line(in, line, lineno)) throw ParseError("missing header", lineno);
  auto header = detail::parse_ints(line, lineno);
  if (header.size() != 4) throw ParseError("header must be 'r n m k'", lineno);
  const auto [r, n, m, k] = std::tuple{header[0], header[1], header[2], header[3]};
  if (r < 1 || n < 0 || m < 0 || k < 1) throw ParseError("header values out of range", lineno);
  if (k > 65535) throw ParseError("too many colours", lineno);
  ColoredHypergraph g(static_cast<std::size_t>(r), static_cast<std::size_t>(n),
                      static_cast<std::size_t>(k), static_cast<Color>(k - 1));
  std::vector<char> seen(g.slot_count(), 0);
  std::vector<std::size_t> edge(static_cast<std::size_t>(r));
  for (long long i = 0; i < m; ++i) {
    if (!detail::next_content_line(in, line, lineno))
      throw ParseError("expected " + std::to_string(m) + " slot lines, got " + std::to_string(i),
                       lineno);
    auto vals = detail::parse_ints(line, lineno);
    if (vals.size() != static_cast<std::size_t>(r + 1))
      throw ParseError("slot line needs r vertex ids and a colour", lineno);
    for (long long j = 0; j < r; ++j) {
      if (vals[j] < 1 || vals[j] > n) throw ParseError("vertex id out of range", lineno);
      if (j > 0 && vals[j] == vals[j - 1])
        throw ParseError("loop edge (repeated vertex) is not allowed", lineno);
      if (j > 0 && vals[j] < vals[j - 1]) throw ParseError("vertex ids must be sorted", lineno);
      edge[j] = static_cast<std::size_t>(vals[j] - 1);
    }
    const long long c = vals[r];
    if (c < 1 || c > k) throw ParseError("colour out of range", lineno);
    const std::size_t rank = colex_rank(edge);
    if (seen[rank]) throw ParseError("duplicate slot", lineno);
    seen[rank] = 1;
    g.set_color_at(rank, static_cast<Color>(c - 1));
  }
  if (detail::next_content_line(in, line, lineno)) throw ParseError("trailing content", lineno);
  return g;
}

inline void write_colored_hypergraph(std::ostream& out, const ColoredHypergraph& g) {
  const Color background = static_cast<Color>(g.k() - 1);
  std::vector<std::pair<Edge, Color>> rows;
  for_each_subset(g.n(), g.r(), [&](std::span<const std::size_t> s) {
    const Color c = g.color(s);
    if (c != background) rows.emplace_back(Edge(s.begin(), s.end()), c);
  });
  std::sort(rows.begin(), rows.end());
  out << g.r() << ' ' << g.n() << ' ' << rows.size() << ' ' << g.k() << '\n';
  for (const auto& [e, c] : rows) {
    for (std::size_t v : e) out << v + 1 << ' ';
    out << c + 1 << '\n';
  }
}

inline Hypergraph read_hypergraph(std::istream& in) {
  auto g = read_colored_hypergraph(in);
  if (g.k() != 2) throw ParseError("simple hypergraph files must have k = 2", 1);
  return Hypergraph::from_colored(g);
}

inline void write_hypergraph(std::ostream& out, const Hypergraph& h) {
  write_colored_hypergraph(out, h.colored());
}

inline ColoredHypergraph load_colored_hypergraph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_colored_hypergraph(in);
}

inline Hypergraph load_hypergraph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_hypergraph(in);
}

inline std::string to_text(const ColoredHypergraph& g) {
  std::ostringstream ss;
  write_colored_hypergraph(ss, g);
  return ss.str();
}

}  // namespace hypertest
