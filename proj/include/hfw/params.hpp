#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfw/diffusion.hpp"
#include "hfw/hiergeo.hpp"
#include "hfw/rng.hpp"
#include "json.hpp"

namespace hfw {

enum class FamilyKind { generic, polynomial, exponential };

// Declared coefficient family. Polynomial sequences are shifted so that
// k = 0 is defined: K_k = A (k+shift)^-alpha, e_k = B (k+shift)^-beta,
// c_k = F (k+shift)^-phi. Exponential: K_k = K^k, e_k = e^k, c_k = c^k.
struct Family {
  FamilyKind kind = FamilyKind::generic;
  double alpha = 0, beta = 0, phi = 0, A = 1, B = 1, F = 1, shift = 1;
  double K = 1, e = 1, c = 1;

  static Family generic() { return {}; }
  static Family polynomial(double alpha, double beta, double phi, double A = 1,
                           double B = 1, double F = 1, double shift = 1);
  static Family exponential(double K, double e, double c);
  std::string name() const;
};

struct InitSpec {
  enum class Law { constant, beta, two_point };
  Law law = Law::constant;
  double theta_x = 0.5;
  std::vector<double> theta_y{0.5};  // last entry repeats for higher colours
  double concentration = 2.0;        // beta law: a = theta*conc, b = (1-theta)*conc

  double theta_y_at(int m) const;
  static const char* law_name(Law l);
};

struct ModelParams {
  int N = 2;
  int levels = 0;  // colonies N^{levels+1}; colours 0..levels; c_0..c_levels
  std::vector<double> c, e, K;
  Family family;
  DiffusionFn g = DiffusionFn::fisher_wright(1.0);
  std::optional<double> d;  // set when g = d g_FW
  InitSpec init;

  static ModelParams from_family(const Family& f, int N, int levels,
                                 DiffusionFn g = DiffusionFn::fisher_wright(1.0),
                                 InitSpec init = {});
  static ModelParams from_sequences(int N, std::vector<double> c, std::vector<double> e,
                                    std::vector<double> K,
                                    DiffusionFn g = DiffusionFn::fisher_wright(1.0),
                                    InitSpec init = {});
  void validate() const;

  int colours() const { return levels + 1; }
  double wake_rate(int m) const;  // e_m / N^m
  KernelSpec kernel() const;
};

struct DerivedParams {
  double rho_prefix = 0;            // sum of stored K_m
  std::optional<bool> rho_infinite; // from the declared family; empty if generic
  std::optional<double> rho;        // full series when declared finite
  double chi = 0;                   // sum K_m e_m / N^m over the stored range
  std::vector<double> E;            // E_0..E_{levels+1}
  std::vector<double> theta_seq;    // vartheta_0..vartheta_levels
  double mean_wakeup = 0;           // rho_prefix / chi (mean of the stored-range sampler)
};

DerivedParams derive(const ModelParams& p);
// E_k = 1/(1 + sum_{m<k} K_m) for k = 0..K.size().
std::vector<double> slowing_constants(const std::vector<double>& K);

// ---- wake-up law ----
double wakeup_tail(double t, const ModelParams& p, const DerivedParams& d);
double wakeup_density(double t, const ModelParams& p, const DerivedParams& d);
double wakeup_truncated_mean(double t, const ModelParams& p, const DerivedParams& d);

class WakeupSampler {
 public:
  explicit WakeupSampler(const ModelParams& p);
  double operator()(Stream& rng) const;
  double sample(Stream& rng, int* colour) const;
  double chi() const { return chi_; }

 private:
  std::vector<double> cum_;
  std::vector<double> rate_;
  double chi_ = 0;
};

// ---- regimes and verdicts ----
enum class Verdict { clusters, coexists };
const char* verdict_name(Verdict v);

struct RegimeReport {
  FamilyKind family = FamilyKind::generic;
  std::string family_name;
  std::optional<bool> rho_infinite;
  std::optional<double> gamma;
  std::string phi_hat_class = "unavailable";
  std::optional<double> delta;
  std::string delta_class = "unavailable";
  std::optional<Verdict> clustering;
  std::string criterion_used = "unavailable";

  std::string to_kv() const;
  nlohmann::json to_json() const;
};

RegimeReport classify_regime(const ModelParams& p);
// Throws UnsupportedError for the generic family.
Verdict clustering_verdict(const ModelParams& p, const RegimeReport& r);

// ---- clustering coefficients ----
struct AsymptoticClass {
  std::string id = "generic";  // e.g. "poly:C1", "exp:hatC2", "finite_rho", "bounded"
  std::string formula;
  double constant = 0;
  // Constant re-derived from the A_n expression. Equals `constant` except for
  // the c = Ke rows, where the tabulated value is off by (K-1)/K.
  double rederived_constant = 0;
  bool available = false;
  Family family;
  std::optional<double> rho;

  double predict(int n) const;
  double predict_rederived(int n) const;
};

struct ClusteringCoefficients {
  std::vector<double> term;    // A_k^k, k = 0..n_max-1
  std::vector<double> prefix;  // prefix[n] = A_n = sum_{k<n} A_k^k, n = 0..n_max
  std::vector<double> B;       // B_m, m = 0..n_max-1
  AsymptoticClass asym;

  int n_max() const { return int(term.size()); }
  double A(int n) const;             // A_n
  double block(int m, int n) const;  // A_m^n = sum_{k=m}^{n} A_k^k
};

ClusteringCoefficients compute_A(const ModelParams& p, const DerivedParams& d, int n_max);
// Raw form; K and e may be zero (system without seed-bank).
ClusteringCoefficients compute_A(const std::vector<double>& c, const std::vector<double>& e,
                                 const std::vector<double>& K, int n_max);
AsymptoticClass asymptotic_class(const Family& f, std::optional<double> rho);
void write_A_csv(std::ostream& os, const ClusteringCoefficients& cc);

// ---- hazard integral ----
enum class HazardVerdict { divergent, convergent, inconclusive };
const char* hazard_name(HazardVerdict v);

struct HazardResult {
  HazardVerdict verdict = HazardVerdict::inconclusive;
  double slope = 0;
  double slope_se = 0;
  double resid_rms = 0;
  int windows = 0;
  double log_T_hi = 0;
  std::string scale;  // "t" or "log t"
  std::string note;
};

struct HazardOptions {
  double threshold = 0.05;
  double max_log_T = 250.0;
  double fit_from = 0.3;  // fit windows with log(edge) >= fit_from * log(T_hi)
  int nodes_per_window = 64;
  double max_resid = 0.5;
};

HazardResult hazard_diagnostic(const ModelParams& p, const RegimeReport& r, double T_max,
                               const HazardOptions& opt = {});

}  // namespace hfw
