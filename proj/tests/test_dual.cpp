#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "hfw/dual.hpp"
#include "hfw/error.hpp"

using namespace hfw;

namespace {

ModelParams two_colonies(double d = 1.0) {
  return ModelParams::from_sequences(2, {1}, {1}, {1}, DiffusionFn::fisher_wright(d));
}

SystemState example_state() {
  SystemState z(2, 0);
  z.x = {0.9, 0.1};
  z.y = {0.5, 0.5};
  return z;
}

double sum_rates(const std::vector<RateEntry>& t) {
  double s = 0;
  for (const auto& r : t) s += r.rate;
  return s;
}

}  // namespace

TEST_SUITE("dual") {

TEST_CASE("rate table") {
  const auto p = two_colonies();
  DualConfig l(2, 0);
  CHECK(dual_event_rates(l, p).empty());
  l.active(0) = 2;
  bool found = false;
  for (const auto& r : dual_event_rates(l, p))
    if (r.kind == DualEvent::coalescence) {
      CHECK(r.rate == 1.0);
      found = true;
    }
  CHECK(found);

  const auto q = ModelParams::from_sequences(2, {1, 0.5}, {1, 3}, {1, 2});
  DualConfig one(2, 1);
  one.dormant(3, 1) = 1;
  const auto t = dual_event_rates(one, q);
  REQUIRE(t.size() == 1);
  CHECK(t[0].kind == DualEvent::activation);
  CHECK(t[0].rate == doctest::Approx(3.0 / 2.0));

  // total rate of an active lineage: outflow plus chi
  DualConfig a(2, 1);
  a.active(1) = 3;
  CHECK(sum_rates(dual_event_rates(a, q)) ==
        doctest::Approx(3 * outflow_rate(q.kernel()) + 3 * (1 * 1 + 2 * 3 / 2.0) + 3.0));
}

TEST_CASE("non Fisher-Wright g is refused") {
  auto p = two_colonies();
  p.g = DiffusionFn::power(1, 2);
  p.d.reset();
  DualConfig l(2, 0);
  l.active(0) = 1;
  CHECK_THROWS_AS(dual_event_rates(l, p), UnsupportedError);
  CHECK_THROWS_AS(duality_estimate(p, example_state(), l, 1.0, 10, 1), UnsupportedError);
}

TEST_CASE("first event of a dormant lineage is exponential (KS at 1%)") {
  const auto q = ModelParams::from_sequences(2, {1, 0.5}, {1, 3}, {1, 2});
  DualConfig one(2, 1);
  one.dormant(0, 1) = 1;
  const double rate = q.wake_rate(1);
  const int n = 5000;
  std::vector<double> ts;
  for (int i = 0; i < n; ++i) {
    Stream rng = make_stream(1, "ks", std::uint64_t(i));
    const auto run = simulate_dual(one, q, 40.0 / rate, rng);
    REQUIRE(!run.log.empty());
    CHECK(run.log.front().kind == DualEvent::activation);
    ts.push_back(run.log.front().t);
  }
  std::sort(ts.begin(), ts.end());
  double D = 0;
  for (int i = 0; i < n; ++i) {
    const double F = 1 - std::exp(-rate * ts[std::size_t(i)]);
    D = std::max({D, F - double(i) / n, double(i + 1) / n - F});
  }
  CHECK(D < 1.63 / std::sqrt(double(n)));
}

TEST_CASE("lineage count never increases and drops only at coalescence") {
  const auto p = ModelParams::from_sequences(2, {1, 1}, {1, 1}, {1, 1});
  DualConfig l(2, 1);
  l.active(0) = 3;
  l.active(2) = 2;
  l.dormant(1, 1) = 1;
  for (int r = 0; r < 50; ++r) {
    Stream rng = make_stream(2, "monotone", std::uint64_t(r));
    const auto run = simulate_dual(l, p, 20, rng);
    DualConfig c = l;
    int n = c.total();
    for (std::size_t i = 1; i < run.log.size(); ++i) CHECK(run.log[i].t >= run.log[i - 1].t);
    int coal = 0;
    for (const auto& e : run.log) coal += e.kind == DualEvent::coalescence;
    CHECK(run.terminal.total() == n - coal);
    CHECK(run.terminal.total() >= 1);
  }
}

TEST_CASE("without resampling two lineages never coalesce") {
  const auto p = ModelParams::from_sequences(2, {1}, {50}, {1}, DiffusionFn::fisher_wright(0));
  DualConfig l(2, 0);
  l.active(0) = 2;
  Stream rng = make_stream(3, "no-coalescence");
  const auto run = simulate_dual(l, p, 50, rng);
  CHECK(run.terminal.total() == 2);
}

TEST_CASE("single-lineage law equals the 4-state kernel") {
  // states (site 0 active, site 1 active, site 0 dormant, site 1 dormant)
  const double c = 1.0, K = 1.0, e = 1.0;
  const auto p = two_colonies();
  Eigen::Matrix4d Q;
  Q << -c / 2 - K * e, c / 2, K * e, 0,
       c / 2, -c / 2 - K * e, 0, K * e,
       e, 0, -e, 0,
       0, e, 0, -e;
  DualConfig l(2, 0);
  l.active(0) = 1;
  const auto gen = build_dual_generator(l, p);
  REQUIRE(gen.states.size() == 4);
  const double t = 0.7;
  const Eigen::Vector4d ref = (Q * t).exp().row(0).transpose();
  const Eigen::VectorXd pr = dual_distribution(gen, t);
  auto slot = [](const DualConfig& s) {
    for (std::size_t i = 0; i < 2; ++i) {
      if (s.active(i)) return int(i);
      if (s.dormant(i, 0)) return 2 + int(i);
    }
    return -1;
  };
  for (std::size_t i = 0; i < 4; ++i) CHECK(pr(Eigen::Index(i)) == doctest::Approx(ref(slot(gen.states[i]))).epsilon(1e-12));

  const int n = 100000;
  Eigen::Vector4d emp = Eigen::Vector4d::Zero();
  for (int r = 0; r < n; ++r) {
    Stream rng = make_stream(4, "marginal", std::uint64_t(r));
    emp(slot(simulate_dual(l, p, t, rng, false).terminal)) += 1.0 / n;
  }
  CHECK(0.5 * (emp - ref).cwiseAbs().sum() < 0.02);
}

TEST_CASE("duality at t = 0 and for a constant state") {
  const auto p = two_colonies();
  const auto z = example_state();
  DualConfig l(2, 0);
  l.active(0) = 2;
  l.dormant(1, 0) = 1;
  const auto r0 = duality_estimate(p, z, l, 0.0, 20, 5);
  CHECK(r0.lhs.mean == doctest::Approx(duality_H(z, l)));
  CHECK(r0.rhs.mean == doctest::Approx(duality_H(z, l)));
  CHECK(duality_H(z, l) == doctest::Approx(0.81 * 0.5));
  CHECK(r0.pass);

  SystemState c(2, 0);
  c.x = {0.3, 0.3};
  c.y = {0.3, 0.3};
  DualConfig one(2, 0);
  one.active(1) = 1;
  const auto r1 = duality_estimate(p, c, one, 1.5, 200, 6);
  CHECK(r1.lhs.mean == doctest::Approx(0.3).epsilon(0.05));
  CHECK(r1.rhs.mean == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(*r1.exact == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("two-lineage duality on the 2-colony example") {
  const auto p = two_colonies();
  DualConfig l(2, 0);
  l.active(0) = 2;
  const auto r = duality_estimate(p, example_state(), l, 1.0, 20000, 7);
  CHECK(r.pass);
  CHECK(std::abs(r.rhs.mean - *r.exact) < 3 * r.rhs.se);
  CHECK(std::abs(r.lhs.mean - *r.exact) < 3 * r.lhs.se);
  const auto kv = r.to_kv();
  CHECK(kv.find("pass=true") != std::string::npos);
  CHECK(r.to_json()["pass"] == true);
}

TEST_CASE("renewal sample") {
  const auto one = ModelParams::from_sequences(2, {1}, {2}, {0.5});
  Stream rng = make_stream(8, "renewal-single");
  const auto s = renewal_sample(one, 200000, rng);
  double ms = 0, mt = 0;
  for (double v : s.sigma) ms += v;
  for (double v : s.tau) mt += v;
  ms /= double(s.sigma.size());
  mt /= double(s.tau.size());
  // chi = K e = 1, wake rate e = 2
  CHECK(ms == doctest::Approx(1.0).epsilon(0.01));
  CHECK(mt == doctest::Approx(0.5).epsilon(0.01));
  CHECK(!tail_fit(s.tau).power_law);
  CHECK_THROWS_AS(tail_fit(std::vector<double>(100, 1.0)), ParameterError);
}

TEST_CASE("mean wake-up time for finite rho") {
  const auto p = ModelParams::from_family(Family::exponential(0.5, 1, 1), 4, 6);
  const auto d = derive(p);
  Stream rng = make_stream(9, "renewal-mean");
  const auto s = renewal_sample(p, 1000000, rng);
  double m = 0, m2 = 0;
  for (double v : s.tau) {
    m += v;
    m2 += v * v;
  }
  const double n = double(s.tau.size());
  m /= n;
  const double se = std::sqrt((m2 / n - m * m) / n);
  CHECK(std::abs(m - d.rho_prefix / d.chi) < 3 * se);
}

TEST_CASE("wake-up tail exponent of the exponential family") {
  // weights (K/N)^m, rates (e/N)^m: P(tau > t) ~ t^-gamma, gamma = log(N/(Ke))/log(N/e)
  const auto p = ModelParams::from_family(Family::exponential(2, 1, 0.25), 8, 20);
  Stream rng = make_stream(10, "tail");
  const auto s = renewal_sample(p, 1000000, rng);
  const auto f = tail_fit(s.tau);
  CHECK(std::abs(f.gamma - std::log(4.0) / std::log(8.0)) < 0.05);
  CHECK(f.power_law);
}

TEST_CASE("event log csv") {
  const auto p = two_colonies();
  DualConfig l(2, 0);
  l.active(0) = 2;
  Stream rng = make_stream(11, "log");
  const auto run = simulate_dual(l, p, 5, rng);
  std::ostringstream os;
  write_event_log(os, run.log, 2, 0);
  CHECK(os.str().rfind("t,event,site,colour\n", 0) == 0);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    const bool coloured = line.find("activation") != std::string::npos;
    CHECK((line.back() == ',') != coloured);
  }
}

}
