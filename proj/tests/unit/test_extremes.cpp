#include <doctest.h>

#include "conjlab/core/error.hpp"
#include "conjlab/core/ks.hpp"
#include "conjlab/core/special.hpp"
#include "conjlab/extremes/asymptotics.hpp"
#include "conjlab/extremes/conditional.hpp"
#include "conjlab/extremes/tail.hpp"
#include "conjlab/gauss/samplers.hpp"
#include "conjlab/limit/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace conjlab;
using namespace conjlab::extremes;
using gauss::CorrelationModel;
using limit::EnsembleSpec;
using limit::LimitVariant;
using limit::ProcessSpec;
using limit::TimeChangeLaw;

namespace {

const auto kOU = CorrelationModel::powered_exponential(1.0, 1.0);

const Estimate& finest(const TailResult& r) { return r.gate.levels.back().estimate; }

TailResult tail(std::size_t n, double u, double T, std::uint64_t replicas, std::uint64_t base,
                LimitVariant variant = LimitVariant::standard(), int halvings = 3) {
    TailQuery q{EnsembleSpec::homogeneous(n, kOU)};
    q.variant = variant;
    q.u = u;
    q.T = T;
    q.replicas = replicas;
    q.halvings = halvings;
    return mc_sup_tail(q, StreamBlock{2024, base << 44});
}

double exact_conditional_survival(double y, double u, std::size_t n) {
    return std::pow(normal_survival(u + y / (n * u)) / normal_survival(u), static_cast<double>(n));
}

} // namespace

TEST_CASE("sup tail of one process agrees with a brute-force run at a quarter pitch") {
    const auto r = tail(1, 2.0, 1.0, 60000, 1, LimitVariant::standard(), 2);
    const auto& quarter = r.gate.levels.back();
    REQUIRE(quarter.a == doctest::Approx(0.0625));

    // independent path: stationary sampler on the a/4 grid, plain maximum
    const std::size_t steps = quarter.points - 1;
    gauss::StationarySampler sampler(kOU, gauss::GridSpec::with_step(1.0 / steps, steps + 1),
                                     gauss::StationaryMethod::Circulant);
    gauss::SamplerWorkspace ws;
    std::vector<double> path(steps + 1);
    const std::uint64_t n = 60000;
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        RandomStream stream(99, k);
        sampler.sample(stream, path, ws);
        hits += *std::max_element(path.begin(), path.end()) > 2.0;
    }
    const auto brute = Estimate::binomial(hits, n);
    CHECK(std::abs(quarter.estimate.mean - brute.mean) <= 3.0 * combined_stderr(quarter.estimate, brute));
}

TEST_CASE("sup tail is monotone in u on coupled replicas") {
    // a = h u^2 keeps the grid step h fixed across levels when alpha = 1
    const double h = 1.0 / 64.0;
    double previous = 1.0;
    for (double u : {1.0, 1.5, 2.0, 2.5, 3.0}) {
        TailQuery q{EnsembleSpec::homogeneous(2, kOU)};
        q.u = u;
        q.a = h * u * u;
        q.replicas = 20000;
        q.halvings = 1;
        const auto r = mc_sup_tail(q, StreamBlock{5, 0});
        CHECK(r.gate.levels.back().step == doctest::Approx(h / 2));
        CHECK(finest(r).mean <= previous);
        previous = finest(r).mean;
    }
    CHECK(previous < 0.01);
}

TEST_CASE("refining the grid never lowers the estimate") {
    const auto r = tail(2, 2.0, 1.0, 20000, 2, LimitVariant::standard(), 5);
    REQUIRE(r.gate.levels.size() == 6);
    for (std::size_t l = 1; l < r.gate.levels.size(); ++l)
        CHECK(r.gate.levels[l].estimate.mean >= r.gate.levels[l - 1].estimate.mean);
    CHECK(r.gate.levels.back().points == 16 * 32 + 1);
    CHECK(r.q == doctest::Approx(0.25));
}

TEST_CASE("maximum of independent processes matches the product identity") {
    const auto joint = tail(3, 2.0, 1.0, 40000, 3, LimitVariant::order_stat(1));
    std::vector<Estimate> single;
    for (std::uint64_t i = 0; i < 3; ++i) single.push_back(finest(tail(1, 2.0, 1.0, 40000, 10 + i)));
    double none = 1.0;
    for (const auto& e : single) none *= 1.0 - e.mean;
    double var = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        double others = 1.0;
        for (std::size_t k = 0; k < 3; ++k)
            if (k != i) others *= 1.0 - single[k].mean;
        var += std::pow(others * single[i].std_error, 2);
    }
    const double identity = 1.0 - none;
    const double se = std::hypot(finest(joint).std_error, std::sqrt(var));
    CHECK(std::abs(finest(joint).mean - identity) <= 3.0 * se);
}

TEST_CASE("second largest of three is sandwiched by the union bounds") {
    const double u = 2.0;
    const std::uint64_t R = 40000;
    const auto mid = finest(tail(3, u, 1.0, R, 20, LimitVariant::order_stat(2)));
    const auto all = finest(tail(3, u, 1.0, R, 21));
    std::vector<Estimate> pair, single;
    for (std::uint64_t i = 0; i < 3; ++i) {
        pair.push_back(finest(tail(2, u, 1.0, R, 30 + i)));
        single.push_back(finest(tail(1, u, 1.0, R, 40 + i)));
    }
    double upper = all.mean, upper_var = all.std_error * all.std_error;
    double lower = 0.0, lower_var = 0.0, prod = 1.0;
    for (std::size_t i = 0; i < 3; ++i) {
        upper += pair[i].mean;
        upper_var += pair[i].std_error * pair[i].std_error;
        lower += pair[i].mean * (1.0 - single[i].mean);
        lower_var += std::pow((1.0 - single[i].mean) * pair[i].std_error, 2) +
                     std::pow(pair[i].mean * single[i].std_error, 2);
        prod *= single[i].mean;
    }
    lower -= 9.0 * prod;
    CHECK(mid.mean <= upper + 3.0 * std::hypot(mid.std_error, std::sqrt(upper_var)));
    CHECK(mid.mean >= lower - 3.0 * std::hypot(mid.std_error, std::sqrt(lower_var)));
}

TEST_CASE("cross terms of the order-statistic bounds are small at high level") {
    const double u = 3.0, T = 0.5;
    const auto p = finest(tail(1, u, T, 400000, 50, LimitVariant::standard(), 2)).mean;
    const auto pair = finest(tail(2, u, T, 4000000, 51, LimitVariant::standard(), 2)).mean;
    REQUIRE(p > 0.0);
    REQUIRE(pair > 0.0);
    const double sigma1 = 3.0 * p * p;
    CHECK(10.0 * sigma1 <= 3.0 * p);
    const double sigma2_bound = 9.0 * p * p * p;
    CHECK(10.0 * sigma2_bound <= 3.0 * pair * (1.0 - p));
}

TEST_CASE("sup tail is deterministic and independent of worker count") {
    TailQuery q{EnsembleSpec::homogeneous(2, kOU)};
    q.replicas = 9000;
    q.halvings = 2;
    const auto a = mc_sup_tail(q, StreamBlock{8, 0}, 1);
    const auto b = mc_sup_tail(q, StreamBlock{8, 0}, 3);
    for (std::size_t l = 0; l < a.gate.levels.size(); ++l)
        CHECK(a.gate.levels[l].estimate.mean == b.gate.levels[l].estimate.mean);
    CHECK(a.gate.selected == b.gate.selected);
}

TEST_CASE("sup tail rejects malformed queries") {
    TailQuery q{EnsembleSpec::homogeneous(2, kOU)};
    q.u = -1.0;
    CHECK_THROWS_AS(mc_sup_tail(q, StreamBlock{}), DomainError);
    q.u = 2.0;
    q.variant = LimitVariant::order_stat(3);
    CHECK_THROWS_AS(mc_sup_tail(q, StreamBlock{}), ConfigError);
}

TEST_CASE("asymptotic conjunction value") {
    const auto one = EnsembleSpec::homogeneous(1, kOU);
    const auto v = asymptotic_conjunction(one, 1.0, 3.0, {1.0, 0.0});
    CHECK(v.value == doctest::Approx(3.0 * std::exp(-4.5) / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(v.value == doctest::Approx(0.013298).epsilon(2e-4));
    CHECK(v.tag == FormulaTag::Conjunction);
    CHECK(asymptotic_conjunction(one, 0.0, 3.0, {1.0, 0.1}).value == 0.0);
    CHECK(asymptotic_conjunction(one, 2.0, 3.0, {1.0, 0.0}).value == doctest::Approx(2.0 * v.value));

    // Mills ratio closes the gap to the classical form
    const auto model = CorrelationModel::powered_exponential(2.0, 1.5);
    const auto spec = EnsembleSpec::homogeneous(1, model);
    const double H = 0.8;
    double previous = 1.0;
    for (double u : {3.0, 10.0, 30.0}) {
        const double mixed = asymptotic_conjunction(spec, 1.0, u, {std::pow(2.0, 1.0 / 1.5) * H, 0.0}).value;
        const double classical = asymptotic_classical(model, 1.0, u, {H, 0.0}).value;
        const double gap = std::abs(mixed / classical - 1.0);
        CHECK(gap < previous);
        previous = gap;
    }
    CHECK(previous < 2e-3);
}

TEST_CASE("asymptotic order statistics value") {
    CHECK_THROWS_AS(asymptotic_order_stat(3, 0, 1.0, 1.0, 2.0, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(asymptotic_order_stat(3, 4, 1.0, 1.0, 2.0, {1.0, 0.0}), DomainError);
    const double u = 2.0, H = 0.9;
    CHECK(asymptotic_order_stat(3, 1, 1.0, 1.0, u, {H, 0.0}).value ==
          doctest::Approx(3.0 * H * u * u * normal_survival(u)).epsilon(1e-12));
    CHECK(asymptotic_order_stat(3, 2, 1.0, 1.0, u, {H, 0.0}).value ==
          doctest::Approx(3.0 * asymptotic_order_stat(2, 2, 1.0, 1.0, u, {H, 0.0}).value).epsilon(1e-12));
    const auto spec = EnsembleSpec::homogeneous(3, kOU);
    double previous = 1.0;
    for (double v : {3.0, 10.0, 20.0}) {
        const double ratio = asymptotic_order_stat(3, 3, 1.0, 1.0, v, {H, 0.0}).value /
                             asymptotic_conjunction(spec, 1.0, v, {H, 0.0}).value;
        CHECK(std::abs(ratio - 1.0) < previous);
        previous = std::abs(ratio - 1.0);
    }
    CHECK(previous < 1e-2);
}

TEST_CASE("asymptotic non-standard value") {
    const EnsembleSpec spec({ProcessSpec(kOU, 1.0), ProcessSpec(kOU, 2.0)});
    const auto v = asymptotic_nonstandard(spec, 1.0, 2.0, {1.0, 0.0});
    CHECK(v.value == doctest::Approx(4.0 * normal_survival(2.0) * normal_survival(4.0)).epsilon(1e-12));
    CHECK(v.value == doctest::Approx(2.882e-6).epsilon(2e-3));
    const auto plain = EnsembleSpec::homogeneous(2, kOU);
    CHECK(asymptotic_nonstandard(plain, 1.0, 2.0, {1.0, 0.0}).value ==
          doctest::Approx(4.0 * std::pow(normal_survival(2.0), 2)).epsilon(1e-12));
    const EnsembleSpec far({ProcessSpec(kOU, 1.0), ProcessSpec(kOU, 40.0)});
    CHECK(asymptotic_nonstandard(far, 1.0, 2.0, {1.0, 0.0}).value < 1e-300);
}

TEST_CASE("asymptotic time-changed value") {
    CHECK_THROWS_AS(asymptotic_timechanged(EnsembleSpec::homogeneous(2, kOU), 1.0, 2.0, {1.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(TimeChangeLaw::discrete({{1.0, 1.0}}), ConfigError);
    const auto law = TimeChangeLaw::discrete({{0.5, 0.5}, {1.0, 0.5}});
    const EnsembleSpec spec({ProcessSpec(kOU, 1.0, law), ProcessSpec(kOU, 1.0, law)});
    const auto v = asymptotic_timechanged(spec, 1.0, 2.0, {1.0, 0.0});
    CHECK(v.value == doctest::Approx(4.0 * std::pow(normal_survival(2.0), 2)).epsilon(1e-12));
    CHECK(v.value == doctest::Approx(2.070e-3).epsilon(1e-3));
    CHECK(asymptotic_timechanged(spec, 2.0, 2.0, {1.0, 0.0}).value == doctest::Approx(2.0 * v.value));
}

TEST_CASE("ratio diagnostic") {
    const auto spec = EnsembleSpec::homogeneous(2, kOU);
    const auto asym = asymptotic_conjunction(spec, 1.0, 2.5, {1.2, 0.0});
    const auto r = ratio_diagnostic(Estimate{asym.value, 0.0, 100}, asym);
    CHECK(r.ratio == doctest::Approx(1.0));
    CHECK(r.ci_hi - r.ci_lo == 0.0);

    const auto noisy = asymptotic_conjunction(spec, 1.0, 2.5, {1.2, 0.06});
    const Estimate emp{1.5 * noisy.value, 0.1 * noisy.value, 1000};
    const auto s = ratio_diagnostic(emp, noisy);
    CHECK(s.ratio == doctest::Approx(1.5));
    CHECK(s.std_error == doctest::Approx(std::hypot(0.1, 1.5 * 0.05)));
    CHECK(s.ci_lo == doctest::Approx(1.5 - two_sided_z(0.95) * s.std_error));

    CHECK_THROWS_AS(ratio_diagnostic(emp, asymptotic_conjunction(spec, 0.0, 2.5, {1.0, 0.0})), DomainError);
}

TEST_CASE("conditional excursions at time zero follow the exact truncated law") {
    const auto spec = EnsembleSpec::homogeneous(2, kOU);
    const std::vector<double> times{0.0, 0.5};
    const double u = 1.5;
    const auto s = conditional_excursion_sample(spec, u, times, 600000, StreamBlock{11, 0});
    REQUIRE(s.accepted > 2000);
    CHECK(s.rows() == s.accepted);
    const auto c0 = s.column(0);
    CHECK(*std::min_element(c0.begin(), c0.end()) > 0.0);
    const double d = ks_statistic(c0, [&](double y) { return y <= 0.0 ? 0.0 : 1.0 - exact_conditional_survival(y, u, 2); });
    CHECK(d < ks_critical_value(c0.size(), 0.01));
    const double rate = static_cast<double>(s.accepted) / static_cast<double>(s.attempted);
    const double p = std::pow(normal_survival(u), 2);
    CHECK(std::abs(rate - p) < 4.0 * std::sqrt(p * (1 - p) / s.attempted));
}

TEST_CASE("conditional conditioning matches one-process kriging moments") {
    // n = 1, time t > 0: given X(0) = x, X(s) ~ N(r x, 1 - r^2)
    const auto spec = EnsembleSpec::homogeneous(1, kOU);
    const double u = 1.0, t = 0.8;
    const std::vector<double> times{0.0, t};
    const auto s = conditional_excursion_sample(spec, u, times, 200000, StreamBlock{12, 0});
    const auto c0 = s.column(0), c1 = s.column(1);
    const double r = std::exp(-t);  // q(1) = 1
    Moments resid;
    for (std::size_t k = 0; k < c0.size(); ++k) resid.add((c1[k] / u + u) - r * (c0[k] / u + u));
    const auto e = resid.estimate();
    CHECK(std::abs(e.mean) < 4.0 * e.std_error);
    CHECK(resid.variance() == doctest::Approx(1.0 - r * r).epsilon(0.03));
}

TEST_CASE("conditional sampler guards feasibility") {
    const auto spec = EnsembleSpec::homogeneous(2, kOU);
    const std::vector<double> times{0.0};
    try {
        conditional_excursion_sample(spec, 4.0, times, 100000, StreamBlock{});
        FAIL("expected a refusal");
    } catch (const FeasibilityError& e) {
        CHECK(std::string(e.advice()).find("lower u") != std::string::npos);
    }
    const double umax = max_feasible_level(2, 100000);
    CHECK(100000 * std::pow(normal_survival(umax), 2) == doctest::Approx(1000.0).epsilon(1e-6));
    CHECK_THROWS_AS(conditional_excursion_sample(spec, 1.0, std::vector<double>{}, 100000, StreamBlock{}), DomainError);
}

TEST_CASE("conditional sampler is reproducible across worker counts") {
    const auto spec = EnsembleSpec::homogeneous(2, kOU);
    const std::vector<double> times{0.0, 1.0, 2.0};
    const auto a = conditional_excursion_sample(spec, 1.5, times, 300000, StreamBlock{13, 0}, 1);
    const auto b = conditional_excursion_sample(spec, 1.5, times, 300000, StreamBlock{13, 0}, 4);
    CHECK(a.values == b.values);
    const auto la = limit_excursion_sample(spec, times, 20000, StreamBlock{13, 1}, 1);
    const auto lb = limit_excursion_sample(spec, times, 20000, StreamBlock{13, 1}, 3);
    CHECK(la.values == lb.values);
}

TEST_CASE("limit excursion sample has the exponential start and the drifted marginal") {
    const auto spec = EnsembleSpec::homogeneous(2, kOU);
    const std::vector<double> times{0.0, 1.0};
    const auto s = limit_excursion_sample(spec, times, 50000, StreamBlock{14, 0});
    const auto z0 = s.column(0);
    CHECK(ks_statistic_exp1(z0) < ks_critical_value(z0.size(), 0.01));

    // one process: P(Z(t) > 0) = 2 Psi(sqrt(t/2)) and E Z(t) = 1 - t
    const auto one = EnsembleSpec::homogeneous(1, kOU);
    const auto l = limit_excursion_sample(one, times, 50000, StreamBlock{14, 1});
    const auto z1 = l.column(1);
    std::uint64_t pos = 0;
    for (double z : z1) pos += z > 0.0;
    const auto frac = Estimate::binomial(pos, z1.size());
    CHECK(std::abs(frac.mean - limit::single_time_exceedance(ProcessSpec(kOU), 1.0)) < 4.0 * frac.std_error);
    const auto m = Estimate::from_samples(z1);
    CHECK(std::abs(m.mean - 0.0) < 4.0 * m.std_error);

}
