#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hfw {

// Piecewise-linear function on a grid of [0,1] with both endpoints included.
struct GridFunction {
  std::vector<double> nodes;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(std::vector<double> nodes, std::vector<double> values);

  double operator()(double x) const;
  double max_slope() const;
  std::size_t size() const { return nodes.size(); }

  // (1 - cos(pi i / (n+1))) / 2 for i = 0..n+1: n interior nodes plus 0 and 1.
  static std::vector<double> chebyshev_nodes(int interior = 41);
  static std::vector<double> uniform_nodes(int interior);
};

// CSV `theta,value`, preceded by `# level=` and `# A_n=` comment lines.
void write_grid_csv(std::ostream& os, const GridFunction& g, int level, double A_n);
GridFunction read_grid_csv(std::istream& is);

// Member of the diffusion class: g(0) = g(1) = 0, g > 0 inside, Lipschitz.
class DiffusionFn {
 public:
  enum class Kind { fisher_wright, power, grid };

  DiffusionFn() = default;  // d = 1 Fisher-Wright
  static DiffusionFn fisher_wright(double d);
  // d * (x(1-x))^p, p >= 1.
  static DiffusionFn power(double d, double p);
  static DiffusionFn tabulated(GridFunction g, double lipschitz_bound);

  double operator()(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    switch (kind_) {
      case Kind::fisher_wright:
        return d_ * x * (1.0 - x);
      case Kind::power:
        return eval_power(x);
      case Kind::grid:
        return grid_(x);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  bool is_fisher_wright() const { return kind_ == Kind::fisher_wright; }
  bool is_zero() const;
  double d() const { return d_; }
  double p() const { return p_; }
  const GridFunction& grid() const { return grid_; }
  double lipschitz_bound() const { return lip_; }
  double sup_norm() const;
  std::string describe() const;

  // Values at `nodes`, as a grid function with the same Lipschitz bound.
  DiffusionFn tabulate(const std::vector<double>& nodes) const;

 private:
  double eval_power(double x) const;

  Kind kind_ = Kind::fisher_wright;
  double d_ = 1.0;
  double p_ = 1.0;
  double lip_ = 1.0;
  GridFunction grid_;
};

}  // namespace hfw
