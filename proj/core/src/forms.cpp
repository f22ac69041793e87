#include "ksym/forms.hpp"

#include "ksym/errors.hpp"

namespace ksym {

namespace {

void require_same_chart(const Chart& a, const Chart& b, const char* what) {
  if (a != b) throw DimensionMismatch(std::string(what) + ": objects live on different charts");
}

}  // namespace

Bindings chart_bindings(const Chart& chart, const Eigen::VectorXd& x) {
  if (static_cast<Eigen::Index>(chart.size()) != x.size()) {
    throw DimensionMismatch("point dimension does not match chart");
  }
  Bindings b;
  b.reserve(chart.size());
  for (std::size_t i = 0; i < chart.size(); ++i) b.emplace(chart[i], x[static_cast<Eigen::Index>(i)]);
  return b;
}

CompiledExprs::CompiledExprs(std::span<const Expr> exprs, const Chart& chart) {
  compiled_.reserve(exprs.size());
  for (const auto& e : exprs) compiled_.emplace_back(e, chart);
}

Eigen::VectorXd CompiledExprs::operator()(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(compiled_.size()));
  const std::span<const double> values(x.data(), static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < compiled_.size(); ++i) out[static_cast<Eigen::Index>(i)] = compiled_[i](values);
  return out;
}

double CompiledExprs::operator()(std::size_t i, const Eigen::VectorXd& x) const {
  return compiled_[i](std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Expr VectorField::apply(const Expr& f) const {
  Expr out;
  for (std::size_t a = 0; a < chart.size(); ++a) {
    if (components[a].is_zero()) continue;
    out += components[a] * diff(f, chart[a]);
  }
  return out;
}

Eigen::VectorXd VectorField::at(const Eigen::VectorXd& x) const {
  return CompiledExprs(components, chart)(x);
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_chart(x.chart, y.chart, "lie_bracket");
  VectorField out{x.chart, {}};
  out.components.reserve(x.chart.size());
  for (std::size_t c = 0; c < x.chart.size(); ++c) {
    out.components.push_back(x.apply(y.components[c]) - y.apply(x.components[c]));
  }
  return out;
}

VectorField linear_combination(double a, const VectorField& x, double b, const VectorField& y) {
  require_same_chart(x.chart, y.chart, "linear_combination");
  VectorField out{x.chart, {}};
  for (std::size_t c = 0; c < x.chart.size(); ++c) {
    out.components.push_back(Expr(a) * x.components[c] + Expr(b) * y.components[c]);
  }
  return out;
}

Eigen::VectorXd OneForm::at(const Eigen::VectorXd& x) const {
  return CompiledExprs(coefficients, chart)(x);
}

Eigen::MatrixXd TwoForm::at(const Eigen::VectorXd& x) const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::VectorXd flat = CompiledExprs(entries, chart)(x);
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) out(a, b) = flat[a * d + b];
  return out;
}

TwoForm zero_two_form(const Chart& chart) {
  return TwoForm{chart, std::vector<Expr>(chart.size() * chart.size())};
}

OneForm exterior_derivative(const Expr& f, const Chart& chart) {
  OneForm out{chart, {}};
  out.coefficients.reserve(chart.size());
  for (const auto& c : chart) out.coefficients.push_back(diff(f, c));
  return out;
}

TwoForm exterior_derivative(const OneForm& alpha) {
  const std::size_t d = alpha.chart.size();
  TwoForm out = zero_two_form(alpha.chart);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      Expr e = diff(alpha.coefficients[b], alpha.chart[a]) - diff(alpha.coefficients[a], alpha.chart[b]);
      out.entries[a * d + b] = e;
      out.entries[b * d + a] = -e;
    }
  }
  return out;
}

TwoForm wedge(const OneForm& x, const OneForm& y) {
  require_same_chart(x.chart, y.chart, "wedge");
  const std::size_t d = x.chart.size();
  TwoForm out = zero_two_form(x.chart);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      Expr e = x.coefficients[a] * y.coefficients[b] - x.coefficients[b] * y.coefficients[a];
      out.entries[a * d + b] = e;
      out.entries[b * d + a] = -e;
    }
  }
  return out;
}

Expr interior(const VectorField& y, const OneForm& alpha) {
  require_same_chart(y.chart, alpha.chart, "interior");
  Expr out;
  for (std::size_t a = 0; a < y.chart.size(); ++a) out += y.components[a] * alpha.coefficients[a];
  return out;
}

OneForm interior(const VectorField& y, const TwoForm& w) {
  require_same_chart(y.chart, w.chart, "interior");
  const std::size_t d = w.dim();
  OneForm out{w.chart, std::vector<Expr>(d)};
  for (std::size_t b = 0; b < d; ++b) {
    Expr acc;
    for (std::size_t a = 0; a < d; ++a) acc += y.components[a] * w.entry(a, b);
    out.coefficients[b] = acc;
  }
  return out;
}

TwoForm interior_of_derivative(const VectorField& y, const TwoForm& w) {
  require_same_chart(y.chart, w.chart, "interior_of_derivative");
  const std::size_t d = w.dim();
  const Chart& x = w.chart;
  TwoForm out = zero_two_form(x);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      // (dw)_{cab} = d_c w_ab + d_a w_bc + d_b w_ca
      Expr acc;
      for (std::size_t c = 0; c < d; ++c) {
        if (y.components[c].is_zero()) continue;
        Expr dw = diff(w.entry(a, b), x[c]) + diff(w.entry(b, c), x[a]) + diff(w.entry(c, a), x[b]);
        acc += y.components[c] * dw;
      }
      out.entries[a * d + b] = acc;
      out.entries[b * d + a] = -acc;
    }
  }
  return out;
}

OneForm lie_derivative(const VectorField& y, const OneForm& alpha) {
  OneForm first = exterior_derivative(interior(y, alpha), alpha.chart);
  OneForm second = interior(y, exterior_derivative(alpha));
  for (std::size_t a = 0; a < first.coefficients.size(); ++a) {
    first.coefficients[a] += second.coefficients[a];
  }
  return first;
}

TwoForm lie_derivative(const VectorField& y, const TwoForm& w) {
  TwoForm first = exterior_derivative(interior(y, w));
  TwoForm second = interior_of_derivative(y, w);
  for (std::size_t a = 0; a < first.entries.size(); ++a) first.entries[a] += second.entries[a];
  return first;
}

}  // namespace ksym
