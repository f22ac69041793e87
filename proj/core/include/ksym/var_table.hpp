#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ksym {

enum class Role { Base, Velocity, Momentum, Parameter };

/// Coordinate names for a model with n field components over k parameters.
///
/// Names follow a fixed 1-based convention: base coordinates `q<i>`,
/// velocities `v<i>_<A>`, momenta `p<A>_<i>` and parameters `t<A>`.
/// All accessors take 0-based indices.  Named constants (e.g. a mass `m`)
/// are substituted as literals by the parser.
class VarTable {
 public:
  VarTable(int n, int k, std::map<std::string, double> constants = {});

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }

  std::string q(int i) const;
  std::string v(int i, int a) const;
  std::string p(int a, int i) const;
  std::string t(int a) const;

  std::optional<Role> role(std::string_view name) const;
  bool declares(std::string_view name) const { return role(name).has_value(); }
  std::optional<double> constant(std::string_view name) const;
  const std::map<std::string, double>& constants() const noexcept { return constants_; }

  /// Ordered coordinates of T^1_k Q: q^1..q^n then v^i_A with i outer, A inner.
  std::vector<std::string> velocity_chart() const;
  /// Ordered coordinates of (T^1_k)^*Q: q^1..q^n then p^A_i with A outer, i inner.
  std::vector<std::string> momentum_chart() const;
  std::vector<std::string> base_chart() const;
  std::vector<std::string> parameter_chart() const;

  /// Index of v^i_A within velocity_chart().
  int velocity_index(int i, int a) const noexcept { return n_ + i * k_ + a; }
  /// Index of p^A_i within momentum_chart().
  int momentum_index(int a, int i) const noexcept { return n_ + a * n_ + i; }
  int total_dim() const noexcept { return n_ + n_ * k_; }

  /// Same n and k; constants are already inlined, so they may differ.
  bool same_shape(const VarTable& other) const noexcept { return n_ == other.n_ && k_ == other.k_; }

  bool operator==(const VarTable& other) const {
    return n_ == other.n_ && k_ == other.k_ && constants_ == other.constants_;
  }

 private:
  int n_;
  int k_;
  std::map<std::string, double> constants_;
};

}  // namespace ksym
