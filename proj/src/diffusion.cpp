#include "hfw/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hfw/error.hpp"
#include "hfw/io.hpp"

namespace hfw {

GridFunction::GridFunction(std::vector<double> n, std::vector<double> v)
    : nodes(std::move(n)), values(std::move(v)) {
  require(nodes.size() >= 2 && nodes.size() == values.size(), "grid needs matching nodes and values");
  require(nodes.front() == 0.0 && nodes.back() == 1.0, "grid must include 0 and 1");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    require(nodes[i] > nodes[i - 1], "grid nodes must be strictly increasing");
  for (double x : values) require(std::isfinite(x) && x >= 0.0, "grid values must be finite and >= 0");
  require(values.front() == 0.0 && values.back() == 0.0, "grid values must vanish at 0 and 1");
}

double GridFunction::operator()(double x) const {
  if (x <= 0.0) return values.front();
  if (x >= 1.0) return values.back();
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t i = std::size_t(it - nodes.begin());
  const double x0 = nodes[i - 1], x1 = nodes[i];
  const double w = (x - x0) / (x1 - x0);
  return values[i - 1] + w * (values[i] - values[i - 1]);
}

double GridFunction::max_slope() const {
  double m = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i)
    m = std::max(m, std::abs(values[i] - values[i - 1]) / (nodes[i] - nodes[i - 1]));
  return m;
}

std::vector<double> GridFunction::chebyshev_nodes(int interior) {
  require(interior >= 1, "grid needs at least one interior node");
  const int n = interior + 1;
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * i / n));
  x.front() = 0.0;
  x.back() = 1.0;
  // symmetric pairs are computed independently; force exact symmetry
  for (int i = 0; i <= n / 2; ++i) x[n - i] = 1.0 - x[i];
  if (n % 2 == 0) x[n / 2] = 0.5;
  return x;
}

std::vector<double> GridFunction::uniform_nodes(int interior) {
  require(interior >= 1, "grid needs at least one interior node");
  std::vector<double> x(interior + 2);
  for (int i = 0; i <= interior + 1; ++i) x[i] = double(i) / (interior + 1);
  return x;
}

void write_grid_csv(std::ostream& os, const GridFunction& g, int level, double A_n) {
  os << "# level=" << level << "\n# A_n=" << num(A_n) << "\ntheta,value\n";
  for (std::size_t i = 0; i < g.size(); ++i) csv_row(os, g.nodes[i], g.values[i]);
}

GridFunction read_grid_csv(std::istream& is) {
  std::vector<double> n, v;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      require(line == "theta,value", "grid CSV header must be theta,value");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string a, b;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    n.push_back(std::stod(a));
    v.push_back(std::stod(b));
  }
  return GridFunction(std::move(n), std::move(v));
}

DiffusionFn DiffusionFn::fisher_wright(double d) {
  require(std::isfinite(d) && d >= 0.0, "Fisher-Wright rate d must be >= 0");
  DiffusionFn g;
  g.kind_ = Kind::fisher_wright;
  g.d_ = d;
  g.p_ = 1.0;
  g.lip_ = d;
  return g;
}

DiffusionFn DiffusionFn::power(double d, double p) {
  require(std::isfinite(d) && d >= 0.0, "power diffusion amplitude must be >= 0");
  require(std::isfinite(p) && p >= 1.0, "power diffusion exponent must be >= 1");
  if (p == 1.0) return fisher_wright(d);
  DiffusionFn g;
  g.kind_ = Kind::power;
  g.d_ = d;
  g.p_ = p;
  g.lip_ = d * p * std::pow(0.25, p - 1.0);
  return g;
}

DiffusionFn DiffusionFn::tabulated(GridFunction grid, double lipschitz_bound) {
  require(lipschitz_bound >= 0.0, "Lipschitz bound must be >= 0");
  DiffusionFn g;
  g.kind_ = Kind::grid;
  g.grid_ = std::move(grid);
  g.lip_ = lipschitz_bound;
  g.d_ = 0.0;
  return g;
}

double DiffusionFn::eval_power(double x) const {
  const double q = x * (1.0 - x);
  if (p_ == 2.0) return d_ * q * q;
  return d_ * std::pow(q, p_);
}

bool DiffusionFn::is_zero() const {
  if (kind_ != Kind::grid) return d_ == 0.0;
  return std::all_of(grid_.values.begin(), grid_.values.end(), [](double v) { return v == 0.0; });
}

double DiffusionFn::sup_norm() const {
  switch (kind_) {
    case Kind::fisher_wright:
      return 0.25 * d_;
    case Kind::power:
      return d_ * std::pow(0.25, p_);
    case Kind::grid:
      return *std::max_element(grid_.values.begin(), grid_.values.end());
  }
  return 0.0;
}

std::string DiffusionFn::describe() const {
  switch (kind_) {
    case Kind::fisher_wright:
      return "fisher_wright(d=" + num(d_) + ")";
    case Kind::power:
      return "power(d=" + num(d_) + ",p=" + num(p_) + ")";
    case Kind::grid:
      return "grid(" + std::to_string(grid_.size()) + " nodes)";
  }
  return "";
}

DiffusionFn DiffusionFn::tabulate(const std::vector<double>& nodes) const {
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = (*this)(nodes[i]);
  return tabulated(GridFunction(nodes, std::move(v)), lip_);
}

}  // namespace hfw
