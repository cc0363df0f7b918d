#include "hfw/params.hpp"

#include <Eigen/Dense>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "hfw/error.hpp"
#include "hfw/io.hpp"

namespace hfw {

namespace {

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

Family Family::polynomial(double alpha, double beta, double phi, double A, double B, double F,
                          double shift) {
  require(A > 0 && B > 0 && F > 0, "polynomial family amplitudes must be positive");
  require(shift > 0, "polynomial family shift must be positive");
  Family f;
  f.kind = FamilyKind::polynomial;
  f.alpha = alpha;
  f.beta = beta;
  f.phi = phi;
  f.A = A;
  f.B = B;
  f.F = F;
  f.shift = shift;
  return f;
}

Family Family::exponential(double K, double e, double c) {
  require(K > 0 && e > 0 && c > 0, "exponential family bases must be positive");
  Family f;
  f.kind = FamilyKind::exponential;
  f.K = K;
  f.e = e;
  f.c = c;
  return f;
}

std::string Family::name() const {
  switch (kind) {
    case FamilyKind::polynomial:
      return "polynomial(alpha=" + num(alpha) + ",beta=" + num(beta) + ",phi=" + num(phi) +
             ",A=" + num(A) + ",B=" + num(B) + ",F=" + num(F) + ")";
    case FamilyKind::exponential:
      return "exponential(K=" + num(K) + ",e=" + num(e) + ",c=" + num(c) + ")";
    case FamilyKind::generic:
      break;
  }
  return "generic";
}

double InitSpec::theta_y_at(int m) const {
  if (theta_y.empty()) return theta_x;
  return theta_y[std::min<std::size_t>(std::size_t(m), theta_y.size() - 1)];
}

const char* InitSpec::law_name(Law l) {
  switch (l) {
    case Law::constant:
      return "constant";
    case Law::beta:
      return "beta";
    case Law::two_point:
      return "two_point";
  }
  return "";
}

ModelParams ModelParams::from_family(const Family& f, int N, int levels, DiffusionFn g,
                                     InitSpec init) {
  require(f.kind != FamilyKind::generic, "from_family needs a declared family");
  require(levels >= 0, "levels must be >= 0");
  ModelParams p;
  p.N = N;
  p.levels = levels;
  p.family = f;
  p.g = g;
  if (g.is_fisher_wright()) p.d = g.d();
  p.init = std::move(init);
  for (int k = 0; k <= levels; ++k) {
    if (f.kind == FamilyKind::polynomial) {
      const double s = k + f.shift;
      p.K.push_back(f.A * std::pow(s, -f.alpha));
      p.e.push_back(f.B * std::pow(s, -f.beta));
      p.c.push_back(f.F * std::pow(s, -f.phi));
    } else {
      p.K.push_back(std::pow(f.K, k));
      p.e.push_back(std::pow(f.e, k));
      p.c.push_back(std::pow(f.c, k));
    }
  }
  p.validate();
  return p;
}

ModelParams ModelParams::from_sequences(int N, std::vector<double> c, std::vector<double> e,
                                        std::vector<double> K, DiffusionFn g, InitSpec init) {
  ModelParams p;
  p.N = N;
  p.levels = int(c.size()) - 1;
  p.c = std::move(c);
  p.e = std::move(e);
  p.K = std::move(K);
  p.g = g;
  if (g.is_fisher_wright()) p.d = g.d();
  p.init = std::move(init);
  p.validate();
  return p;
}

void ModelParams::validate() const {
  require(N >= 2, "group order N must be >= 2");
  require(levels >= 0, "levels must be >= 0");
  const std::size_t n = std::size_t(levels) + 1;
  require(c.size() == n && e.size() == n && K.size() == n,
          "c, e, K must each have levels+1 entries");
  for (std::size_t m = 0; m < n; ++m) {
    require(std::isfinite(e[m]) && e[m] > 0, "e_" + std::to_string(m) + " must be positive");
    require(std::isfinite(K[m]) && K[m] > 0, "K_" + std::to_string(m) + " must be positive");
  }
  (void)kernel();  // migration positivity and growth
  // exchange growth: K_m e_m may grow at most like N^m
  const double lb = std::log(1e6);
  for (std::size_t m = 0; m < n; ++m)
    require(std::log(K[m] * e[m]) <= lb + double(m) * std::log(double(N)),
            "seed-bank coefficient K_" + std::to_string(m) + " e_" + std::to_string(m) +
                " violates the growth bound");
  if (family.kind == FamilyKind::exponential) {
    require(family.c < N, "exponential family needs c < N");
    require(family.K * family.e < N, "exponential family needs K e < N");
    require(family.e < N, "exponential family needs e < N");
  }
  require(init.theta_x >= 0 && init.theta_x <= 1, "theta_x must lie in [0,1]");
  for (double t : init.theta_y) require(t >= 0 && t <= 1, "theta_y entries must lie in [0,1]");
  if (init.law == InitSpec::Law::beta) require(init.concentration > 0, "beta concentration must be > 0");
}

double ModelParams::wake_rate(int m) const { return e[m] * std::pow(double(N), -m); }

KernelSpec ModelParams::kernel() const { return KernelSpec(N, c); }

std::vector<double> slowing_constants(const std::vector<double>& K) {
  std::vector<double> E(K.size() + 1);
  double s = 0.0;
  for (std::size_t k = 0; k <= K.size(); ++k) {
    E[k] = 1.0 / (1.0 + s);
    if (k < K.size()) s += K[k];
  }
  return E;
}

static std::optional<double> family_rho(const Family& f) {
  if (f.kind == FamilyKind::polynomial && f.alpha > 1) {
    gsl_sf_result r;
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    const int st = gsl_sf_hzeta_e(f.alpha, f.shift, &r);
    gsl_set_error_handler(old);
    if (st == GSL_SUCCESS) return f.A * r.val;
  }
  if (f.kind == FamilyKind::exponential && f.K < 1) return 1.0 / (1.0 - f.K);
  return std::nullopt;
}

static std::optional<bool> family_rho_infinite(const Family& f) {
  if (f.kind == FamilyKind::polynomial) return f.alpha <= 1;
  if (f.kind == FamilyKind::exponential) return f.K >= 1;
  return std::nullopt;
}

DerivedParams derive(const ModelParams& p) {
  p.validate();
  DerivedParams d;
  d.E = slowing_constants(p.K);
  double sK = 0.0, num_ = p.init.theta_x;
  for (int m = 0; m <= p.levels; ++m) {
    sK += p.K[m];
    d.chi += p.K[m] * p.wake_rate(m);
    num_ += p.K[m] * p.init.theta_y_at(m);
    d.theta_seq.push_back(num_ / (1.0 + sK));
  }
  d.rho_prefix = sK;
  d.rho_infinite = family_rho_infinite(p.family);
  d.rho = family_rho(p.family);
  d.mean_wakeup = d.rho_prefix / d.chi;
  return d;
}

double wakeup_tail(double t, const ModelParams& p, const DerivedParams& d) {
  require(t >= 0, "time must be non-negative");
  double s = 0.0;
  for (int m = 0; m <= p.levels; ++m) {
    const double r = p.wake_rate(m);
    s += p.K[m] * r * std::exp(-r * t);
  }
  return s / d.chi;
}

double wakeup_density(double t, const ModelParams& p, const DerivedParams& d) {
  require(t >= 0, "time must be non-negative");
  double s = 0.0;
  for (int m = 0; m <= p.levels; ++m) {
    const double r = p.wake_rate(m);
    s += p.K[m] * r * r * std::exp(-r * t);
  }
  return s / d.chi;
}

double wakeup_truncated_mean(double t, const ModelParams& p, const DerivedParams& d) {
  require(t >= 0, "time must be non-negative");
  double s = 0.0;
  for (int m = 0; m <= p.levels; ++m) s += p.K[m] * -std::expm1(-p.wake_rate(m) * t);
  return s / d.chi;
}

WakeupSampler::WakeupSampler(const ModelParams& p) {
  for (int m = 0; m <= p.levels; ++m) {
    const double r = p.wake_rate(m);
    rate_.push_back(r);
    chi_ += p.K[m] * r;
    cum_.push_back(chi_);
  }
}

double WakeupSampler::sample(Stream& rng, int* colour) const {
  const double u = rng.uniform() * chi_;
  std::size_t m = std::size_t(std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  if (m >= cum_.size()) m = cum_.size() - 1;
  if (colour) *colour = int(m);
  return rng.exponential(rate_[m]);
}

double WakeupSampler::operator()(Stream& rng) const { return sample(rng, nullptr); }

// ---- regimes ----

const char* verdict_name(Verdict v) { return v == Verdict::clusters ? "clusters" : "coexists"; }

std::string RegimeReport::to_kv() const {
  std::ostringstream os;
  auto opt = [](const std::optional<double>& x) { return x ? num(*x) : std::string("unavailable"); };
  os << "family=" << family_name << '\n';
  os << "rho_infinite="
     << (rho_infinite ? (*rho_infinite ? "true" : "false") : "unavailable") << '\n';
  os << "gamma=" << opt(gamma) << '\n';
  os << "phi_hat_class=" << phi_hat_class << '\n';
  os << "delta=" << opt(delta) << '\n';
  os << "delta_class=" << delta_class << '\n';
  os << "clustering=" << (clustering ? verdict_name(*clustering) : "unavailable") << '\n';
  os << "criterion_used=" << criterion_used << '\n';
  return os.str();
}

nlohmann::json RegimeReport::to_json() const {
  nlohmann::json j;
  j["family"] = family_name;
  j["rho_infinite"] = rho_infinite ? nlohmann::json(*rho_infinite) : nlohmann::json(nullptr);
  j["gamma"] = gamma ? nlohmann::json(*gamma) : nlohmann::json(nullptr);
  j["phi_hat_class"] = phi_hat_class;
  j["delta"] = delta ? nlohmann::json(*delta) : nlohmann::json(nullptr);
  j["delta_class"] = delta_class;
  j["clustering"] = clustering ? nlohmann::json(verdict_name(*clustering)) : nlohmann::json(nullptr);
  j["criterion_used"] = criterion_used;
  return j;
}

RegimeReport classify_regime(const ModelParams& p) {
  RegimeReport r;
  const Family& f = p.family;
  r.family = f.kind;
  r.family_name = f.name();
  r.rho_infinite = family_rho_infinite(f);
  if (f.kind == FamilyKind::generic) return r;
  const double N = p.N;
  if (f.kind == FamilyKind::polynomial) {
    r.gamma = 1.0;
    if (f.alpha < 1)
      r.phi_hat_class = "(log t)^(1-alpha)";
    else if (f.alpha == 1)
      r.phi_hat_class = "log log t";
    else
      r.phi_hat_class = "1";
    // c_k polynomial: the walk degree tends to 0 from the side set by the sign of phi
    r.delta_class = f.phi < 0 ? "0+" : (f.phi > 0 ? "0-" : "0");
  } else {
    // K < 1: finite mean wake-up time, linear scaling
    r.gamma = f.K < 1 ? 1.0 : std::log(N / (f.K * f.e)) / std::log(N / f.e);
    if (f.K == 1)
      r.phi_hat_class = "log t";
    else
      r.phi_hat_class = "1";
    r.delta = std::log(f.c) / std::log(N / f.c);
    r.delta_class = "numeric";
  }
  r.clustering = clustering_verdict(p, r);
  if (r.rho_infinite && !*r.rho_infinite)
    r.criterion_used = "rho_finite:sum_inverse_c";
  else
    r.criterion_used = f.kind == FamilyKind::polynomial ? "rho_infinite:-phi<=alpha<=1"
                                                        : "rho_infinite:Kc<=1<=K";
  return r;
}

Verdict clustering_verdict(const ModelParams& p, const RegimeReport& r) {
  const Family& f = p.family;
  if (f.kind == FamilyKind::generic || !r.rho_infinite)
    throw UnsupportedError("clustering verdict needs a declared family");
  if (!*r.rho_infinite) {
    // sum of 1/c_k diverges
    const bool div = f.kind == FamilyKind::polynomial ? f.phi >= -1.0 : f.c <= 1.0;
    return div ? Verdict::clusters : Verdict::coexists;
  }
  if (f.kind == FamilyKind::polynomial)
    return (-f.phi <= f.alpha && f.alpha <= 1.0) ? Verdict::clusters : Verdict::coexists;
  return (f.K * f.c <= 1.0 && 1.0 <= f.K) ? Verdict::clusters : Verdict::coexists;
}

// ---- clustering coefficients ----

double ClusteringCoefficients::A(int n) const {
  require(n >= 0 && n < int(prefix.size()), "A_n index out of range");
  return prefix[n];
}

double ClusteringCoefficients::block(int m, int n) const {
  require(m >= 0 && m <= n && n < n_max(), "A_m^n index out of range");
  return prefix[n + 1] - prefix[m];
}

ClusteringCoefficients compute_A(const std::vector<double>& c, const std::vector<double>& e,
                                 const std::vector<double>& K, int n_max) {
  require(n_max >= 0 && std::size_t(n_max) <= c.size() && c.size() == e.size() &&
              c.size() == K.size(),
          "n_max exceeds the stored coefficients");
  const auto E = slowing_constants(K);
  ClusteringCoefficients cc;
  cc.prefix.push_back(0.0);
  for (int k = 0; k < n_max; ++k) {
    require(c[k] > 0, "c_k must be positive");
    require(e[k] >= 0 && K[k] >= 0, "e_k and K_k must be non-negative");
    const double Ek = E[k];
    const double a = Ek * c[k] + e[k];
    const double den = a + Ek * K[k] * e[k];
    cc.term.push_back(0.5 * (Ek / c[k]) * a / den);
    cc.B.push_back(0.5 * Ek * Ek / den);
    cc.prefix.push_back(cc.prefix.back() + cc.term.back());
  }
  return cc;
}

ClusteringCoefficients compute_A(const ModelParams& p, const DerivedParams& d, int n_max) {
  auto cc = compute_A(p.c, p.e, p.K, n_max);
  cc.asym = asymptotic_class(p.family, d.rho);
  return cc;
}

AsymptoticClass asymptotic_class(const Family& f, std::optional<double> rho) {
  AsymptoticClass a;
  a.family = f;
  a.rho = rho;
  auto set = [&](const char* id, const char* formula, double C, double C_re) {
    a.id = id;
    a.formula = formula;
    a.constant = C;
    a.rederived_constant = C_re;
    a.available = true;
  };
  if (f.kind == FamilyKind::generic) return a;
  const auto inf = family_rho_infinite(f);
  if (inf && !*inf) {
    if (rho) set("finite_rho", "sum_{k<n} 1/c_k / (2(1+rho))", 1.0 / (2.0 * (1.0 + *rho)),
                 1.0 / (2.0 * (1.0 + *rho)));
    return a;
  }
  if (f.kind == FamilyKind::polynomial) {
    const double al = f.alpha, ph = f.phi, s = 1.0 / (2.0 * f.A * f.F);
    if (!(-ph <= al && al <= 1.0)) {
      a.id = "bounded";
      a.formula = "A_n bounded";
      return a;
    }
    const bool eq = near(-ph, al), one = near(al, 1.0);
    if (!eq && !one) set("poly:C1", "C1 n^(alpha+phi)", s * (1 - al) / (al + ph), s * (1 - al) / (al + ph));
    else if (eq && !one) set("poly:C2", "C2 log n", s * (1 - al), s * (1 - al));
    else if (!eq && one) set("poly:C3", "C3 n^(1+phi)/log n", s / (1 + ph), s / (1 + ph));
    else set("poly:C4", "C4 log log n", s, s);
    return a;
  }
  const double K = f.K, c = f.c, e = f.e, Kc = K * c;
  if (!(Kc <= 1.0 + 1e-12 && K >= 1.0 - 1e-12)) {
    a.id = "bounded";
    a.formula = "A_n bounded";
    return a;
  }
  if (near(K, 1.0)) {
    if (near(c, 1.0)) set("exp:tildeC2", "C2~ log n", 0.5, 0.5);
    else set("exp:tildeC1", "C1~ n^-1 c^-(n-1)", 1.0 / (2.0 * (1.0 - c)), 1.0 / (2.0 * (1.0 - c)));
    return a;
  }
  const bool crit = near(Kc, 1.0);
  if (near(c, K * e)) {
    const double tab = (K - 1) * (K - 1) / (2.0 * (2.0 * K - 1.0));
    const double re = K * (K - 1) / (2.0 * (2.0 * K - 1.0));
    if (crit) set("exp:barC2", "C2- n", tab, re);
    else set("exp:hatC2", "C2^ (Kc)^-(n-1)", tab / (1 - Kc), re / (1 - Kc));
  } else if (c < K * e) {
    if (crit) set("exp:barC1", "C1- n", (K - 1) / (2 * K), (K - 1) / (2 * K));
    else set("exp:hatC1", "C1^ (Kc)^-(n-1)", (K - 1) / (2 * K * (1 - Kc)), (K - 1) / (2 * K * (1 - Kc)));
  } else {
    if (crit) set("exp:barC3", "C3- n", (K - 1) / 2, (K - 1) / 2);
    else set("exp:hatC3", "C3^ (Kc)^-(n-1)", (K - 1) / (2 * (1 - Kc)), (K - 1) / (2 * (1 - Kc)));
  }
  return a;
}

static double shape(const AsymptoticClass& a, int n) {
  const Family& f = a.family;
  const double x = n;
  if (a.id == "finite_rho") {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      s += f.kind == FamilyKind::polynomial ? std::pow(k + f.shift, f.phi) / f.F : std::pow(f.c, -k);
    return s;
  }
  if (a.id == "poly:C1") return std::pow(x, f.alpha + f.phi);
  if (a.id == "poly:C2") return std::log(x);
  if (a.id == "poly:C3") return std::pow(x, 1 + f.phi) / std::log(x);
  if (a.id == "poly:C4") return std::log(std::log(x));
  if (a.id == "exp:hatC1" || a.id == "exp:hatC2" || a.id == "exp:hatC3")
    return std::pow(f.K * f.c, -(x - 1));
  if (a.id == "exp:barC1" || a.id == "exp:barC2" || a.id == "exp:barC3") return x;
  if (a.id == "exp:tildeC1") return std::pow(f.c, -(x - 1)) / x;
  if (a.id == "exp:tildeC2") return std::log(x);
  return std::nan("");
}

double AsymptoticClass::predict(int n) const {
  return available ? constant * shape(*this, n) : std::nan("");
}

double AsymptoticClass::predict_rederived(int n) const {
  return available ? rederived_constant * shape(*this, n) : std::nan("");
}

void write_A_csv(std::ostream& os, const ClusteringCoefficients& cc) {
  os << "n,A_n,predicted_asymptote\n";
  for (int n = 0; n < int(cc.prefix.size()); ++n)
    csv_row(os, n, cc.prefix[n], n >= 2 ? cc.asym.predict(n) : std::nan(""));
}

// ---- hazard integral ----

const char* hazard_name(HazardVerdict v) {
  switch (v) {
    case HazardVerdict::divergent:
      return "divergent";
    case HazardVerdict::convergent:
      return "convergent";
    case HazardVerdict::inconclusive:
      return "inconclusive";
  }
  return "";
}

namespace {

struct Fit {
  double slope = 0, se = 0, rms = 0;
};

// Least squares y ~ X beta; reports coefficient `which` with its standard error.
Fit lsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int which) {
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r = y - X * beta;
  const double n = double(X.rows()), k = double(X.cols());
  Fit f;
  f.slope = beta(which);
  f.rms = std::sqrt(r.squaredNorm() / n);
  const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * (r.squaredNorm() / std::max(1.0, n - k));
  f.se = std::sqrt(std::max(0.0, cov(which, which)));
  return f;
}

// log of integral of exp(lf(u)) du over [u0,u1], composite Simpson on u = log t
double log_window(const std::function<double(double)>& lf, double u0, double u1, int n) {
  if (n % 2) ++n;
  const double h = (u1 - u0) / n;
  std::vector<double> v(n + 1);
  double mx = -INFINITY;
  for (int i = 0; i <= n; ++i) {
    v[i] = lf(u0 + i * h);
    mx = std::max(mx, v[i]);
  }
  double s = 0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(v[i] - mx);
  }
  return mx + std::log(s * h / 3.0);
}

}  // namespace

HazardResult hazard_diagnostic(const ModelParams& p, const RegimeReport& r, double T_max,
                               const HazardOptions& opt) {
  HazardResult res;
  if (!r.rho_infinite || !*r.rho_infinite || !r.gamma)
    throw UnsupportedError("hazard diagnostic needs a declared family with infinite seed-bank");
  const double gamma = *r.gamma;
  if (gamma < 0.5) {
    res.verdict = HazardVerdict::convergent;
    res.note = "gamma < 1/2";
    return res;
  }
  const DerivedParams d = derive(p);
  const KernelSpec spec = p.kernel();
  const KernelExpansion ex = KernelExpansion::build(spec);
  const int L = ex.L;

  double logT = std::min({std::log(T_max), opt.max_log_T,
                          std::log(1e-3) - std::log(p.wake_rate(p.levels)),
                          std::log(1e-3) - std::log(ex.D * ex.h[L])});
  res.log_T_hi = logT;
  require(logT > 1.0, "hazard range too short: increase levels or T_max");

  // slowly varying factors of phi_hat are divided out: the exponential family
  // (constant or log t) and the polynomial family at alpha = 1 (log log t)
  const Family& f = p.family;
  const bool keep_phi = f.kind == FamilyKind::polynomial && f.alpha < 1;
  const double pw = (1.0 - gamma) / gamma;
  auto log_a = [&](double t) { return std::log(return_probability(t, ex)); };
  std::function<double(double)> lf = [&](double u) {
    const double t = std::exp(u);
    double v = u - pw * u + log_a(t);
    if (keep_phi) v -= std::log(wakeup_truncated_mean(t, p, d)) / gamma;
    return v;
  };

  std::vector<double> xs, ys;
  if (f.kind == FamilyKind::exponential) {
    res.scale = "t";
    // windows between consecutive kernel relaxation times
    std::vector<double> edges;
    for (int j = 1; j <= L; ++j) {
      const double le = -std::log(ex.D * ex.h[j]);
      if (le <= logT) edges.push_back(le);
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      if (edges[i] < opt.fit_from * logT || edges[i] <= 0) continue;
      xs.push_back(edges[i]);
      ys.push_back(log_window(lf, edges[i], edges[i + 1], opt.nodes_per_window));
    }
  } else {
    res.scale = "log t";
    const double ratio = std::pow(2.0, 0.25);
    for (double s0 = logT / 8.0; s0 * ratio <= logT * (1 + 1e-12); s0 *= ratio) {
      xs.push_back(std::log(s0));
      ys.push_back(log_window(lf, s0, s0 * ratio, opt.nodes_per_window));
    }
  }
  res.windows = int(xs.size());
  if (res.windows < 5) {
    res.note = "fewer than 5 windows: increase levels or T_max";
    return res;
  }
  // Polynomial family: local slopes drift like s^{-1/2} (prefix sums of K_m
  // and c_k), so the power is extrapolated from log W = c0 + a log s + b s^{-1/2}.
  const bool poly = f.kind == FamilyKind::polynomial;
  Eigen::MatrixXd X(res.windows, poly ? 3 : 2);
  Eigen::VectorXd Y(res.windows);
  for (int i = 0; i < res.windows; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = xs[std::size_t(i)];
    if (poly) X(i, 2) = std::exp(-0.5 * xs[std::size_t(i)]);
    Y(i) = ys[std::size_t(i)];
  }
  const Fit fit = lsq(X, Y, 1);
  res.slope = fit.slope;
  res.slope_se = fit.se;
  res.resid_rms = fit.rms;
  const double a = fit.slope, se = fit.se, thr = opt.threshold;
  if (fit.rms > opt.max_resid) {
    res.note = "residual too large";
  } else if (a > thr + 2 * se) {
    res.verdict = HazardVerdict::divergent;
    res.note = "power growth";
  } else if (a < -thr - 2 * se) {
    res.verdict = HazardVerdict::convergent;
    res.note = "power decay";
  } else if (std::abs(a) < thr - 2 * se) {
    res.verdict = HazardVerdict::divergent;
    res.note = "log-like growth";
  } else {
    res.note = "slope within two standard errors of the threshold";
  }
  return res;
}

}  // namespace hfw
