#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "vlx/cli.hpp"
#include "vlx/error.hpp"

namespace vlx::cli {

namespace pt = boost::property_tree;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string shortest(double x) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += shortest(v[i]);
  }
  return s;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno == 0 && std::isfinite(out);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

Section::Section(const pt::ptree& raw, pt::ptree& resolved, std::string name)
    : resolved_(resolved), name_(std::move(name)) {
  if (auto child = raw.get_child_optional(pt::ptree::path_type(name_, '/'))) raw_ = &*child;
}

bool Section::has(const std::string& key) const {
  return raw_ && raw_->get_child_optional(pt::ptree::path_type(key, '/'));
}

std::string Section::raw_value(const std::string& key) const {
  return trim(raw_->get_child(pt::ptree::path_type(key, '/')).data());
}

void Section::bad(const std::string& key, const std::string& what, const std::string& got) const {
  throw ConfigError("[" + name_ + "] " + key + ": expected " + what + ", got '" + got + "'");
}

double Section::num(const std::string& key, double fallback) {
  used_.insert(key);
  double v = fallback;
  if (has(key) && !parse_double(raw_value(key), v)) bad(key, "a finite number", raw_value(key));
  resolved_.put(pt::ptree::path_type(name_ + '/' + key, '/'), shortest(v));
  return v;
}

std::size_t Section::count(const std::string& key, std::size_t fallback) {
  used_.insert(key);
  std::size_t v = fallback;
  if (has(key)) {
    const std::string s = raw_value(key);
    char* end = nullptr;
    const long long n = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || n <= 0) bad(key, "a positive integer", s);
    v = static_cast<std::size_t>(n);
  }
  resolved_.put(pt::ptree::path_type(name_ + '/' + key, '/'), std::to_string(v));
  return v;
}

std::uint64_t Section::u64(const std::string& key, std::uint64_t fallback) {
  used_.insert(key);
  std::uint64_t v = fallback;
  if (has(key)) {
    const std::string s = raw_value(key);
    char* end = nullptr;
    errno = 0;
    v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno != 0) bad(key, "a non-negative integer", s);
  }
  resolved_.put(pt::ptree::path_type(name_ + '/' + key, '/'), std::to_string(v));
  return v;
}

std::vector<double> Section::list(const std::string& key, const std::vector<double>& fallback) {
  used_.insert(key);
  std::vector<double> v = fallback;
  if (has(key)) {
    v.clear();
    const std::string s = raw_value(key);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double x = 0.0;
      if (!parse_double(trim(item), x)) bad(key, "a comma-separated list of numbers", s);
      v.push_back(x);
    }
  }
  resolved_.put(pt::ptree::path_type(name_ + '/' + key, '/'), join(v));
  return v;
}

std::string Section::choice(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed) {
  used_.insert(key);
  std::string v = has(key) ? raw_value(key) : fallback;
  if (!allowed.count(v)) {
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
    bad(key, "one of " + opts, v);
  }
  resolved_.put(pt::ptree::path_type(name_ + '/' + key, '/'), v);
  return v;
}

void Section::finish() const {
  if (!raw_) return;
  for (const auto& kv : *raw_)
    if (!used_.count(kv.first)) throw ConfigError("[" + name_ + "] " + kv.first + ": unknown key");
}

}  // namespace vlx::cli
