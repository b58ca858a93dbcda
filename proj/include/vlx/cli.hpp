#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace vlx::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;

std::string fmt17(double x);
// Shortest text that reads back to the same double.
std::string shortest(double x);
std::string join(const std::vector<double>& v);

// Typed access to one INI section. Every value read (or defaulted) is copied
// into `resolved`, so the echo of `resolved` reproduces the run.
class Section {
 public:
  Section(const boost::property_tree::ptree& raw, boost::property_tree::ptree& resolved, std::string name);

  double num(const std::string& key, double fallback);
  std::size_t count(const std::string& key, std::size_t fallback);
  std::uint64_t u64(const std::string& key, std::uint64_t fallback);
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback);
  std::string choice(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed);
  // Rejects keys that were never asked for.
  void finish() const;
  const std::string& name() const { return name_; }

 private:
  std::string raw_value(const std::string& key) const;
  bool has(const std::string& key) const;
  [[noreturn]] void bad(const std::string& key, const std::string& what, const std::string& got) const;

  const boost::property_tree::ptree* raw_ = nullptr;
  boost::property_tree::ptree& resolved_;
  std::string name_;
  std::set<std::string> used_;
};

// Entry point shared by the vlx binary and the tests.
int run(const std::vector<std::string>& args);

}  // namespace vlx::cli
