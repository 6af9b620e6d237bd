#pragma once

#include <hypertest/common.hpp>
#include <hypertest/rational.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace hypertest::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "hypertest";
inline constexpr const char* kVersion = "0.1.0";

/// Bad flags, bad configuration or unreadable input: exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

/// FNV-1a, used to give every suite its own seed stream by name.
inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct ParamSpec {
  std::string key;
  std::string fallback;
  std::string help;
};

/// Resolved key/value settings of one section, with typed accessors that
/// turn malformed values into usage errors.
class Params {
 public:
  Params() = default;
  Params(std::string section, std::map<std::string, std::string> values)
      : section_(std::move(section)), values_(std::move(values)) {}

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError(section_ + "." + key + ": unknown setting");
    return it->second;
  }
  bool has(const std::string& key) const { return !str(key).empty(); }
  std::size_t size(const std::string& key) const {
    const auto& v = str(key);
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size() || x < 0) throw std::invalid_argument(v);
      return static_cast<std::size_t>(x);
    } catch (const std::exception&) {
      throw UsageError(section_ + "." + key + ": expected a non-negative integer, got '" + v + "'");
    }
  }
  std::uint64_t u64(const std::string& key) const {
    const auto& v = str(key);
    try {
      std::size_t used = 0;
      const auto x = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw UsageError(section_ + "." + key + ": expected an unsigned integer, got '" + v + "'");
    }
  }
  Rational rational(const std::string& key) const {
    try {
      return parse_rational(str(key));
    } catch (const std::exception&) {
      throw UsageError(section_ + "." + key + ": expected a number, got '" + str(key) + "'");
    }
  }
  double real(const std::string& key) const { return rational(key).get_d(); }
  bool flag(const std::string& key) const {
    const auto& v = str(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw UsageError(section_ + "." + key + ": expected true or false, got '" + v + "'");
  }
  std::string choice(const std::string& key, const std::vector<std::string>& allowed) const {
    const auto& v = str(key);
    for (const auto& a : allowed)
      if (a == v) return v;
    std::string all;
    for (const auto& a : allowed) all += (all.empty() ? "" : "|") + a;
    throw UsageError(section_ + "." + key + ": expected " + all + ", got '" + v + "'");
  }
  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::string cur;
    for (char c : str(key) + ",") {
      if (c == ',') {
        const auto b = cur.find_first_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
        cur.clear();
      } else {
        cur += c;
      }
    }
    return out;
  }
  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& section() const { return section_; }

 private:
  std::string section_;
  std::map<std::string, std::string> values_;
};

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Everything one suite produces. Suites only touch their own SuiteRun, so
/// several can run at once.
struct SuiteRun {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  Guards guards;
  Json results = Json::object();
  std::vector<Check> checks;
  Table table;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::map<std::string, std::string> artifacts;             // file name, contents

  const std::string& input(const std::string& path) {
    for (const auto& [p, h] : inputs)
      if (p == path) return path;
    inputs.emplace_back(path, sha256_file(path));
    return path;
  }
  void check(std::string check_name, bool ok, std::string detail = {}) {
    checks.push_back({std::move(check_name), ok, std::move(detail)});
  }
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

using SuiteFn = std::function<void(const Params&, SuiteRun&)>;

struct Suite {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  SuiteFn run;
};

inline Json suite_json(const SuiteRun& s) {
  Json j;
  j["suite"] = s.name;
  j["seed"] = s.seed;
  j["passed"] = s.passed();
  Json checks = Json::array();
  for (const auto& c : s.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = std::move(checks);
  j["results"] = s.results;
  return j;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string table_csv(const Table& t) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

/// Sections of an INI file as nested string maps; parse errors keep the
/// line number.
inline std::map<std::string, std::map<std::string, std::string>> read_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    if (e.line() == 0) throw UsageError("cannot read config '" + path + "': " + e.message());
    throw UsageError(path + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  std::map<std::string, std::map<std::string, std::string>> out;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw UsageError(path + ": setting '" + section + "' outside a section");
    auto& sec = out[section];
    for (const auto& [key, value] : body) sec[key] = value.get_value<std::string>();
  }
  return out;
}

}  // namespace hypertest::cli
