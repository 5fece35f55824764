#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "specgap/chain.hpp"
#include "specgap/graph.hpp"
#include "specgap/montecarlo.hpp"
#include "specgap/rng.hpp"
#include "specgap/stats.hpp"

#include "fixtures.hpp"
#include "oracle.hpp"

using namespace specgap;

TEST_CASE("counter rng: pure function of (seed, stream, t)") {
    CHECK(draw_u64(42, 3, 17) == draw_u64(42, 3, 17));
    CHECK(draw_u64(42, 3, 17) != draw_u64(42, 4, 17));
    CHECK(draw_u64(42, 3, 17) != draw_u64(42, 3, 18));
    CHECK(draw_u64(42, 3, 17) != draw_u64(43, 3, 17));

    // spelled-out composition
    const std::uint64_t g = 0x9E3779B97F4A7C15ULL;
    const std::uint64_t want = mix64(mix64(7 + g * (2 + 1)) + g * (5 + 1));
    CHECK(draw_u64(7, 2, 5) == want);

    for (std::uint64_t t = 0; t < 100; ++t) {
        const double u = draw_unit(1, 2, t);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == static_cast<double>(draw_u64(1, 2, t) >> 11) * 0x1.0p-53);
    }
}

TEST_CASE("incomplete beta: closed forms") {
    // I_x(2,3) = x^2 (6 - 8x + 3x^2)
    for (double x : {0.1, 0.25, 0.4, 0.7, 0.95}) {
        const double want = x * x * (6.0 - 8.0 * x + 3.0 * x * x);
        CHECK(incomplete_beta(2.0, 3.0, x) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(incomplete_beta(2.0, 3.0, 0.4) == doctest::Approx(0.5248).epsilon(1e-12));

    // arcsine law: I_x(1/2, 1/2) = (2/pi) asin(sqrt(x))
    for (double x : {0.1, 0.3, 0.5, 0.8}) {
        const double want = 2.0 / M_PI * std::asin(std::sqrt(x));
        CHECK(incomplete_beta(0.5, 0.5, x) == doctest::Approx(want).epsilon(1e-10));
    }

    CHECK(incomplete_beta(10.0, 2.0, 0.9) == doctest::Approx(0.6973568802).epsilon(1e-10));

    CHECK(incomplete_beta(3.0, 4.0, 0.0) == 0.0);
    CHECK(incomplete_beta(3.0, 4.0, 1.0) == 1.0);
    for (double x : {0.2, 0.5, 0.7}) // reflection
        CHECK(incomplete_beta(2.5, 4.5, x) + incomplete_beta(4.5, 2.5, 1.0 - x) ==
              doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(incomplete_beta(0.0, 1.0, 0.5), validation_error);
    CHECK_THROWS_AS(incomplete_beta(1.0, 1.0, 1.5), validation_error);
}

TEST_CASE("incomplete beta equals the binomial tail sum") {
    // I_p(k, n-k+1) = P(Bin(n, p) >= k)
    for (long long n : {5LL, 20LL, 100LL}) {
        for (long long k = 1; k <= n; k += (n > 20 ? 17 : 3)) {
            for (double p : {0.1, 0.5, 0.9}) {
                const double lhs = incomplete_beta(static_cast<double>(k),
                                                   static_cast<double>(n - k + 1), p);
                const double rhs = oracle::binomial_upper_tail(n, k, p);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("incomplete beta inversion round-trips") {
    for (double a : {1.0, 2.5, 40.0}) {
        for (double b : {1.0, 7.0, 160.0}) {
            for (double p : {0.005, 0.25, 0.5, 0.975}) {
                const double x = incomplete_beta_inv(a, b, p);
                CHECK(incomplete_beta(a, b, x) == doctest::Approx(p).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("Clopper-Pearson interval") {
    Interval degenerate_low = clopper_pearson(0, 100, 0.99);
    CHECK(degenerate_low.low == 0.0);
    CHECK(degenerate_low.high > 0.0);
    Interval degenerate_high = clopper_pearson(100, 100, 0.99);
    CHECK(degenerate_high.high == 1.0);
    CHECK(degenerate_high.low < 1.0);

    // defining property: at the endpoints the binomial tails equal alpha/2
    for (long long n : {50LL, 1000LL}) {
        for (long long h : {1LL, n / 4, n / 2, n - 1}) {
            Interval ci = clopper_pearson(h, n, 0.99);
            CHECK(ci.low < static_cast<double>(h) / static_cast<double>(n));
            CHECK(ci.high > static_cast<double>(h) / static_cast<double>(n));
            // P(Bin(n, low) >= h) = alpha/2, P(Bin(n, high) >= h+1) = 1 - alpha/2
            CHECK(oracle::binomial_upper_tail(n, h, ci.low) ==
                  doctest::Approx(0.005).epsilon(1e-6));
            CHECK(oracle::binomial_upper_tail(n, h + 1, ci.high) ==
                  doctest::Approx(0.995).epsilon(1e-6));
        }
    }

    // monotone in hits
    double prev_low = -1.0, prev_high = -1.0;
    for (long long h = 0; h <= 20; ++h) {
        Interval ci = clopper_pearson(h, 20, 0.99);
        CHECK(ci.low >= prev_low);
        CHECK(ci.high >= prev_high);
        prev_low = ci.low;
        prev_high = ci.high;
    }

    CHECK_THROWS_AS(clopper_pearson(-1, 10, 0.99), validation_error);
    CHECK_THROWS_AS(clopper_pearson(11, 10, 0.99), validation_error);
    CHECK_THROWS_AS(clopper_pearson(5, 0, 0.99), validation_error);
    CHECK_THROWS_AS(clopper_pearson(5, 10, 1.0), validation_error);
}

TEST_CASE("sample_path: starts, orbits, reproducibility") {
    Chaind c = fixtures::fix_2state();
    SimConfig cfg;
    cfg.seed = 42;

    cfg.start = 1;
    for (std::uint64_t idx = 0; idx < 20; ++idx)
        CHECK(sample_path(c, cfg, 10, idx)[0] == 1);

    cfg.start.reset();
    auto p1 = sample_path(c, cfg, 50, 7);
    auto p2 = sample_path(c, cfg, 50, 7);
    CHECK(p1 == p2);
    auto p3 = sample_path(c, cfg, 50, 8);
    CHECK(p1 != p3);

    // deterministic rotation: the path is forced regardless of the draws
    Chaind rot;
    rot.labels = {"r0", "r1", "r2"};
    rot.P = Matd::Zero(3, 3);
    rot.P(0, 1) = rot.P(1, 2) = rot.P(2, 0) = 1.0;
    rot.m = Vecd::Constant(3, 1.0 / 3.0);
    SimConfig rcfg;
    rcfg.seed = 9;
    rcfg.start = 0;
    auto orbit = sample_path(rot, rcfg, 7, 0);
    const std::vector<Eigen::Index> want = {0, 1, 2, 0, 1, 2, 0};
    CHECK(orbit == want);

    CHECK_THROWS_AS(sample_path(c, cfg, 0, 0), validation_error);
    SimConfig bad;
    bad.start = 5;
    CHECK_THROWS_AS(sample_path(c, bad, 3, 0), validation_error);
}

TEST_CASE("sample_path: stationary marginal at a fixed seed") {
    Vecd m(2);
    m << 0.75, 0.25;
    Chaind iid = fixtures::iid_chain(m);
    SimConfig cfg;
    cfg.seed = 3;
    long long ones = 0;
    const long long trials = 100000;
    for (long long idx = 0; idx < trials; ++idx)
        ones += sample_path(iid, cfg, 1, static_cast<std::uint64_t>(idx))[0];
    // Bin(1e5, 0.25): three sigma is about 411
    CHECK(std::llabs(ones - 25000) < 412);
}

TEST_CASE("empirical_tail: certain events and tie counting") {
    Chaind c = fixtures::fix_2state();
    Projection pi = identity_projection(c.labels);
    Vecd phi = fixtures::fix_2state_phi();

    SimConfig cfg;
    cfg.n = 5;
    cfg.eta = 0.0;
    cfg.samples = 500;
    cfg.seed = 1;
    TailEstimate all = empirical_tail(c, pi, phi, cfg);
    CHECK(all.p_hat == 1.0);
    CHECK(all.hits == 500);
    CHECK(all.ci_high == 1.0);

    // n=2, eta=0.5: the boundary sum 1 must count as a hit, so the estimate
    // tracks P(sum >= 1), not P(sum = 2)
    cfg.n = 2;
    cfg.eta = 0.5;
    cfg.samples = 100000;
    cfg.seed = 11;
    TailEstimate est = empirical_tail(c, pi, phi, cfg);
    const double p_ge_1 = *exact_tail_dp(c, pi, phi, 0.5, 2);
    const double p_eq_2 = *exact_tail_dp(c, pi, phi, 1.0, 2);
    CHECK(p_ge_1 > p_eq_2 + 0.1); // the two targets are far apart
    CHECK(est.ci_low <= p_ge_1);
    CHECK(est.ci_high >= p_ge_1);
    CHECK(est.p_hat == static_cast<double>(est.hits) / static_cast<double>(est.samples));

    cfg.samples = 0;
    CHECK_THROWS_AS(empirical_tail(c, pi, phi, cfg), validation_error);
    cfg.samples = 10;
    cfg.n = 0;
    CHECK_THROWS_AS(empirical_tail(c, pi, phi, cfg), validation_error);
    cfg.n = 2;
    Vecd short_phi(1);
    short_phi << 0.5;
    CHECK_THROWS_AS(empirical_tail(c, pi, short_phi, cfg), validation_error);
}

TEST_CASE("exact tail DP agrees with path enumeration") {
    Chaind c = fixtures::fix_2state();
    Projection pi = identity_projection(c.labels);
    Vecd phi = fixtures::fix_2state_phi();
    for (long n = 1; n <= 8; ++n) {
        for (double eta : {0.3, 0.5, 0.75}) {
            auto dp = exact_tail_dp(c, pi, phi, eta, n);
            REQUIRE(dp.has_value());
            CHECK(*dp == doctest::Approx(oracle::brute_tail(c, pi, phi, eta, n)).epsilon(1e-12));
        }
    }

    // quarter-step observable exercises the lattice scaling
    Chaind r = fixtures::random_chain(3, 21);
    Projection rpi = identity_projection(r.labels);
    Vecd qphi = fixtures::random_quarter_phi(3, 22);
    for (long n = 1; n <= 6; ++n) {
        for (double eta : {0.2, 0.45, 0.7}) {
            auto dp = exact_tail_dp(r, rpi, qphi, eta, n);
            REQUIRE(dp.has_value());
            CHECK(*dp == doctest::Approx(oracle::brute_tail(r, rpi, qphi, eta, n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("exact tail DP: domain boundaries") {
    Chaind c = fixtures::fix_2state();
    Projection pi = identity_projection(c.labels);
    Vecd phi = fixtures::fix_2state_phi();

    CHECK(*exact_tail_dp(c, pi, phi, 0.0, 5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*exact_tail_dp(c, pi, phi, 1.01, 5) == 0.0);

    double prev = 1.0;
    for (int i = 0; i <= 10; ++i) {
        const double eta = i / 10.0;
        const double v = *exact_tail_dp(c, pi, phi, eta, 6);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }

    // irrational observable has no small lattice
    Vecd irr(2);
    irr << 0.0, 1.0 / M_PI;
    CHECK(!exact_tail_dp(c, pi, irr, 0.2, 5).has_value());
    // size cap
    CHECK(!exact_tail_dp(c, pi, phi, 0.5, 6000000).has_value());
}

TEST_CASE("exact tail sits inside the confidence interval across fixtures") {
    int covered = 0;
    const int runs = 200;
    for (int run = 0; run < runs; ++run) {
        const std::uint64_t s = static_cast<std::uint64_t>(run);
        Chaind c = fixtures::random_chain(2 + static_cast<Eigen::Index>(run % 3), 900 + s);
        Projection pi = identity_projection(c.labels);
        Vecd phi = fixtures::random_quarter_phi(c.size(), 950 + s);
        SimConfig cfg;
        cfg.n = 5 + run % 6;
        cfg.eta = 0.2 + 0.6 * draw_unit(1234, s, 0);
        cfg.samples = 2000;
        cfg.seed = 5000 + s;
        TailEstimate est = empirical_tail(c, pi, phi, cfg);
        auto dp = exact_tail_dp(c, pi, phi, cfg.eta, cfg.n);
        REQUIRE(dp.has_value());
        if (est.ci_low <= *dp && *dp <= est.ci_high) ++covered;
    }
    // 99% interval, 200 independent runs: at least 98% coverage expected
    CHECK(covered >= 196);
}

TEST_CASE("comparison harness: dominance, csv shape, determinism") {
    Chaind c = fixtures::fix_2state();
    Projection pi = identity_projection(c.labels);
    Vecd phi = fixtures::fix_2state_phi();
    std::vector<long> n_list = {10, 20};

    CompareReport rep = bound_vs_empirical(c, pi, phi, 0.8, n_list, 20000, 7);
    CHECK(rep.lambda == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(rep.m_phi == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    REQUIRE(rep.rows.size() == 2);
    for (const CompareRow& row : rep.rows) {
        REQUIRE(row.bound.has_value());
        REQUIRE(row.exact_dp.has_value());
        CHECK(row.est.ci_low <= row.bound->bound);
        CHECK(*row.exact_dp <= row.bound->bound);
        CHECK(row.chernoff_rate == doctest::Approx(kl_div(0.8, rep.m_phi)).epsilon(1e-12));
        CHECK(row.bound->rate <= row.chernoff_rate + 1e-12);
    }

    const std::string csv = compare_csv(rep);
    CHECK(csv.rfind("n,p_hat,ci_low,ci_high,exact_dp,bound,k_used,rate,chernoff_rate\n", 0) == 0);
    CHECK(csv == compare_csv(bound_vs_empirical(c, pi, phi, 0.8, n_list, 20000, 7)));
    // 9 columns = 8 commas per data line
    std::size_t lines = 0;
    for (std::size_t pos = 0; (pos = csv.find('\n', pos)) != std::string::npos; ++pos) ++lines;
    CHECK(lines == 3);

    CHECK_THROWS_AS(bound_vs_empirical(c, pi, phi, 0.8, {}, 100, 1), validation_error);
    CHECK_THROWS_AS(bound_vs_empirical(c, pi, phi, 0.1, n_list, 100, 1), validation_error);
}

TEST_CASE("comparison harness: iid chain reduces to the Chernoff bound") {
    Vecd m(2);
    m << 2.0 / 3.0, 1.0 / 3.0;
    Chaind iid = fixtures::iid_chain(m);
    Projection pi = identity_projection(iid.labels);
    Vecd phi = fixtures::fix_2state_phi();
    CompareReport rep = bound_vs_empirical(iid, pi, phi, 0.8, {5, 10, 20}, 5000, 13);
    CHECK(rep.lambda <= 1e-9);
    const double d = kl_div(0.8, rep.m_phi);
    for (const CompareRow& row : rep.rows) {
        REQUIRE(row.bound.has_value());
        CHECK(row.bound->k_used == 1);
        CHECK(row.bound->bound ==
              doctest::Approx(std::exp(-static_cast<double>(row.n - 1) * d)).epsilon(1e-10));
    }
}

TEST_CASE("comparison harness: no feasible level leaves bound cells empty") {
    GraphSpec p = petersen_graph();
    auto nb = nonbacktracking_chain<double>(p);
    Projection pi = identity_projection(nb.chain.labels);
    Vecd phi = Vecd::Zero(30);
    for (Eigen::Index a = 20; a < 30; ++a) phi(a) = 1.0; // spoke darts
    AveragingOp<double> op = averaging_operator(nb.chain, pi);
    CHECK(observable_mean(op, phi) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CompareReport rep = bound_vs_empirical(nb.chain, pi, phi, 2.0 / 3.0, {25, 50, 100}, 2000, 5);
    CHECK(rep.lambda == doctest::Approx(1.0).epsilon(1e-9));
    for (const CompareRow& row : rep.rows) {
        CHECK(!row.bound.has_value());
        REQUIRE(row.exact_dp.has_value()); // the DP still runs
        CHECK(row.est.samples == 2000);
    }
    const std::string csv = compare_csv(rep);
    // empty bound, k_used and rate columns between exact_dp and chernoff_rate
    CHECK(csv.find(",,,,") != std::string::npos);
}

TEST_CASE("comparison harness: DP decay is at least the certified rate") {
    Chaind c = fixtures::fix_2state();
    Projection pi = identity_projection(c.labels);
    Vecd phi = fixtures::fix_2state_phi();
    const std::vector<long> ns = {100, 200, 300, 400};
    std::vector<double> neglog;
    for (long n : ns) {
        auto dp = exact_tail_dp(c, pi, phi, 0.8, n);
        REQUIRE(dp.has_value());
        REQUIRE(*dp > 0.0);
        neglog.push_back(-std::log(*dp));
    }
    LDReport b = ld_tail_optimize(LDQuery{0.8, 1.0 / 3.0, 0.7, 400, Tail::upper, std::nullopt}, 40);
    // least-squares slope of -log DP against n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double x = static_cast<double>(ns[i]);
        sx += x;
        sy += neglog[i];
        sxx += x * x;
        sxy += x * neglog[i];
    }
    const double k = static_cast<double>(ns.size());
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    CHECK(slope >= b.rate - 0.01);
}

TEST_CASE("certificate failures abort the harness") {
    auto nb = nonbacktracking_chain<double>(complete_graph(4));
    Vecd phi = Vecd::Zero(4);
    phi(0) = 1.0;
    CHECK_THROWS_AS(
        bound_vs_empirical(nb.chain, nb.terminal, phi, 0.9, {5}, 100, 1),
        certificate_error);
}

TEST_CASE("format_double round-trips and stays shortest") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0, 2.0 / 3.0}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1e300)) == 1e300);
}
