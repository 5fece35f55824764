#pragma once

// Shared test fixtures: the reference 2-state chain, i.i.d. chains, seeded
// random chains, and lumped lifts (block-structured chains whose compression
// onto blocks is exact at every order, so the semigroup certificate holds by
// construction).

#include <cstdint>
#include <vector>

#include "specgap/chain.hpp"
#include "specgap/rng.hpp"

namespace fixtures {

using specgap::Chaind;
using specgap::ChainQ;
using specgap::Matd;
using specgap::Projection;
using specgap::Rat;
using specgap::Vecd;

inline Chaind fix_2state() {
    Chaind c;
    c.P = Matd(2, 2);
    c.P << 0.9, 0.1, 0.2, 0.8;
    c.labels = {"a", "b"};
    c.m = Vecd(2);
    c.m << 2.0 / 3.0, 1.0 / 3.0;
    return c;
}

inline ChainQ fix_2state_q() {
    ChainQ c;
    c.P = specgap::MatQ(2, 2);
    c.P(0, 0) = Rat(9, 10);
    c.P(0, 1) = Rat(1, 10);
    c.P(1, 0) = Rat(1, 5);
    c.P(1, 1) = Rat(4, 5);
    c.labels = {"a", "b"};
    c.m = specgap::VecQ(2);
    c.m(0) = Rat(2, 3);
    c.m(1) = Rat(1, 3);
    return c;
}

// Indicator of the second state, the observable used throughout.
inline Vecd fix_2state_phi() {
    Vecd phi(2);
    phi << 0.0, 1.0;
    return phi;
}

inline Chaind iid_chain(const Vecd& m) {
    Chaind c;
    const Eigen::Index q = m.size();
    c.P = Matd(q, q);
    for (Eigen::Index i = 0; i < q; ++i) c.P.row(i) = m.transpose();
    c.labels = specgap::default_labels(q);
    c.m = m;
    return c;
}

inline Chaind uniform_iid(Eigen::Index q) {
    return iid_chain(Vecd::Constant(q, 1.0 / static_cast<double>(q)));
}

// Strictly positive rows, so the chain is irreducible and aperiodic.
inline Chaind random_chain(Eigen::Index states, std::uint64_t seed) {
    Chaind c;
    c.P = Matd(states, states);
    for (Eigen::Index i = 0; i < states; ++i) {
        double total = 0.0;
        for (Eigen::Index j = 0; j < states; ++j) {
            const double v =
                0.05 + specgap::draw_unit(seed, static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(j));
            c.P(i, j) = v;
            total += v;
        }
        c.P.row(i) /= total;
    }
    c.labels = specgap::default_labels(states);
    c.m = specgap::stationary_measure(c);
    return c;
}

inline Vecd random_phi(Eigen::Index atoms, std::uint64_t seed) {
    Vecd phi(atoms);
    for (Eigen::Index x = 0; x < atoms; ++x)
        phi(x) = specgap::draw_unit(seed, 1000, static_cast<std::uint64_t>(x));
    return phi;
}

// {0,1}-valued with both values present; quarter-grid variant keeps the
// occupation lattice exact for the dynamic-programming oracle.
inline Vecd random_indicator_phi(Eigen::Index atoms, std::uint64_t seed) {
    Vecd phi(atoms);
    for (Eigen::Index x = 0; x < atoms; ++x)
        phi(x) = specgap::draw_unit(seed, 2000, static_cast<std::uint64_t>(x)) < 0.5 ? 0.0 : 1.0;
    phi(0) = 0.0;
    phi(atoms - 1) = 1.0;
    return phi;
}

inline Vecd random_quarter_phi(Eigen::Index atoms, std::uint64_t seed) {
    Vecd phi(atoms);
    for (Eigen::Index x = 0; x < atoms; ++x) {
        const double u = specgap::draw_unit(seed, 3000, static_cast<std::uint64_t>(x));
        phi(x) = std::floor(u * 5.0) / 4.0; // {0, 1/4, 1/2, 3/4, 1}
    }
    return phi;
}

struct LiftFixture {
    Chaind chain;
    Projection pi;
};

// Strong lumping: lift each block-level transition T(x,x') by a fixed
// within-block arrival distribution w_{x'}. The compression of every power of
// the lift is the corresponding power of T, so property (M) holds exactly,
// and the lift's stationary measure is mX(x) w_x(y) in closed form.
inline LiftFixture lumped_lift(const Chaind& base, Eigen::Index copies, std::uint64_t seed) {
    const Eigen::Index atoms = base.size();
    const Eigen::Index states = atoms * copies;

    Matd w(atoms, copies);
    for (Eigen::Index x = 0; x < atoms; ++x) {
        double total = 0.0;
        for (Eigen::Index r = 0; r < copies; ++r) {
            w(x, r) = 0.1 + specgap::draw_unit(seed, 4000 + static_cast<std::uint64_t>(x),
                                               static_cast<std::uint64_t>(r));
            total += w(x, r);
        }
        w.row(x) /= total;
    }

    LiftFixture f;
    f.chain.P = Matd(states, states);
    f.chain.m = Vecd(states);
    f.pi.x_labels = base.labels;
    for (Eigen::Index y = 0; y < states; ++y) {
        const Eigen::Index x = y / copies;
        f.pi.map.push_back(x);
        f.chain.labels.push_back(base.labels[static_cast<std::size_t>(x)] + "." +
                                 std::to_string(y % copies));
        f.chain.m(y) = base.m(x) * w(x, y % copies);
        for (Eigen::Index y2 = 0; y2 < states; ++y2)
            f.chain.P(y, y2) = base.P(x, y2 / copies) * w(y2 / copies, y2 % copies);
    }
    return f;
}

// Seeded fixture family for the dominance suites: alternates identity
// projections on random chains with lumped lifts, all satisfying the
// semigroup certificate by construction.
struct DominanceFixture {
    Chaind chain;
    Projection pi;
    Vecd phi;
};

inline DominanceFixture dominance_fixture(std::uint64_t index) {
    DominanceFixture f;
    if (index % 2 == 0) {
        const Eigen::Index states = 2 + static_cast<Eigen::Index>(index % 7); // 2..8
        f.chain = random_chain(states, 100 + index);
        f.pi = specgap::identity_projection(f.chain.labels);
        f.phi = random_phi(states, 500 + index);
    } else {
        const Eigen::Index atoms = 2 + static_cast<Eigen::Index>(index % 3);   // 2..4
        const Eigen::Index copies = 2 + static_cast<Eigen::Index>(index % 2); // 2..3
        Chaind base = random_chain(atoms, 200 + index);
        LiftFixture lift = lumped_lift(base, copies, 300 + index);
        f.chain = lift.chain;
        f.pi = lift.pi;
        f.phi = random_phi(atoms, 600 + index);
    }
    return f;
}

} // namespace fixtures
