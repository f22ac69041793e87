#include "ksym/var_table.hpp"

#include <cctype>
#include <charconv>

#include "ksym/errors.hpp"

namespace ksym {

namespace {

// Parses a positive decimal integer occupying all of `s`.
std::optional<int> parse_index(std::string_view s) {
  if (s.empty() || s.front() == '0') return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool valid_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_')) {
    return false;
  }
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

}  // namespace

VarTable::VarTable(int n, int k, std::map<std::string, double> constants)
    : n_(n), k_(k), constants_(std::move(constants)) {
  if (n < 1 || k < 1) throw DimensionMismatch("VarTable requires n >= 1 and k >= 1");
  for (const auto& [name, value] : constants_) {
    if (!valid_identifier(name)) throw Error("invalid constant name '" + name + "'");
    if (role(name)) throw Error("constant '" + name + "' shadows a coordinate name");
  }
}

std::string VarTable::q(int i) const { return "q" + std::to_string(i + 1); }
std::string VarTable::v(int i, int a) const {
  return "v" + std::to_string(i + 1) + "_" + std::to_string(a + 1);
}
std::string VarTable::p(int a, int i) const {
  return "p" + std::to_string(a + 1) + "_" + std::to_string(i + 1);
}
std::string VarTable::t(int a) const { return "t" + std::to_string(a + 1); }

std::optional<Role> VarTable::role(std::string_view name) const {
  if (name.size() < 2) return std::nullopt;
  const char head = name.front();
  const std::string_view rest = name.substr(1);
  if (head == 'q' || head == 't') {
    auto idx = parse_index(rest);
    if (!idx) return std::nullopt;
    if (head == 'q' && *idx <= n_) return Role::Base;
    if (head == 't' && *idx <= k_) return Role::Parameter;
    return std::nullopt;
  }
  if (head == 'v' || head == 'p') {
    const auto sep = rest.find('_');
    if (sep == std::string_view::npos) return std::nullopt;
    auto first = parse_index(rest.substr(0, sep));
    auto second = parse_index(rest.substr(sep + 1));
    if (!first || !second) return std::nullopt;
    if (head == 'v' && *first <= n_ && *second <= k_) return Role::Velocity;
    if (head == 'p' && *first <= k_ && *second <= n_) return Role::Momentum;
  }
  return std::nullopt;
}

std::optional<double> VarTable::constant(std::string_view name) const {
  auto it = constants_.find(std::string(name));
  if (it == constants_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> VarTable::base_chart() const {
  std::vector<std::string> out;
  for (int i = 0; i < n_; ++i) out.push_back(q(i));
  return out;
}

std::vector<std::string> VarTable::velocity_chart() const {
  auto out = base_chart();
  for (int i = 0; i < n_; ++i)
    for (int a = 0; a < k_; ++a) out.push_back(v(i, a));
  return out;
}

std::vector<std::string> VarTable::momentum_chart() const {
  auto out = base_chart();
  for (int a = 0; a < k_; ++a)
    for (int i = 0; i < n_; ++i) out.push_back(p(a, i));
  return out;
}

std::vector<std::string> VarTable::parameter_chart() const {
  std::vector<std::string> out;
  for (int a = 0; a < k_; ++a) out.push_back(t(a));
  return out;
}

}  // namespace ksym
