#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "specgap/chain.hpp"
#include "specgap/common.hpp"
#include "specgap/equidistribution.hpp"
#include "specgap/graph.hpp"
#include "specgap/ld.hpp"
#include "specgap/montecarlo.hpp"
#include "specgap/sln.hpp"
#include "specgap/spectral.hpp"

namespace specgap {

using json = nlohmann::json;

struct ChainFile {
    Chaind chain; // stationary measure set (validated input or computed)
    std::optional<Projection> projection;
    std::optional<Vecd> phi;
    bool measure_given = false;
};

namespace detail {

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw validation_error(where + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw validation_error(where + ": unknown key '" + it.key() + "'");
    }
}

inline double number_at(const json& j, const std::string& where) {
    if (!j.is_number()) throw validation_error(where + ": expected a number");
    return j.get<double>();
}

} // namespace detail

// Schema: {"labels":[...], "transition":[[...]], "measure":[...]?,
//          "projection":{"map":[...], "x_labels":[...]}?, "phi":[...]?}
// Unknown keys are rejected. A supplied measure must be stationary to 1e-12;
// a missing one is computed.
inline ChainFile parse_chain_file(const json& j) {
    detail::check_keys(j, {"labels", "transition", "measure", "projection", "phi"}, "chain");
    if (!j.contains("transition")) throw validation_error("chain: missing 'transition'");
    const json& jt = j["transition"];
    if (!jt.is_array() || jt.empty()) throw validation_error("chain: 'transition' must be a nonempty array");
    const Eigen::Index n = static_cast<Eigen::Index>(jt.size());

    ChainFile f;
    f.chain.P = Matd(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = jt[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw validation_error("chain: 'transition' row " + std::to_string(i) +
                                   " is not an array of length " + std::to_string(n));
        for (Eigen::Index k = 0; k < n; ++k)
            f.chain.P(i, k) = detail::number_at(row[static_cast<std::size_t>(k)], "chain transition");
    }

    if (j.contains("labels")) {
        const json& jl = j["labels"];
        if (!jl.is_array() || static_cast<Eigen::Index>(jl.size()) != n)
            throw validation_error("chain: 'labels' must be an array of length " + std::to_string(n));
        for (const auto& v : jl) {
            if (!v.is_string()) throw validation_error("chain: labels must be strings");
            f.chain.labels.push_back(v.get<std::string>());
        }
    } else {
        f.chain.labels = default_labels(n);
    }
    validate_chain(f.chain);

    if (j.contains("measure")) {
        const json& jm = j["measure"];
        if (!jm.is_array() || static_cast<Eigen::Index>(jm.size()) != n)
            throw validation_error("chain: 'measure' must be an array of length " + std::to_string(n));
        Vecd m(n);
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i) = detail::number_at(jm[static_cast<std::size_t>(i)], "chain measure");
            if (!(m(i) >= 0.0)) throw validation_error("chain: measure entries must be >= 0");
            total += m(i);
        }
        if (std::fabs(total - 1.0) > 1e-12)
            throw validation_error("chain: measure does not sum to 1 (got " + std::to_string(total) + ")");
        Vecd residual = f.chain.P.transpose() * m - m;
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::fabs(residual(i)) > 1e-12)
                throw validation_error("chain: supplied measure is not stationary at state '" +
                                       f.chain.labels[static_cast<std::size_t>(i)] + "'");
        f.chain.m = m;
        f.measure_given = true;
    } else {
        f.chain.m = stationary_measure(f.chain);
    }

    if (j.contains("projection")) {
        const json& jp = j["projection"];
        detail::check_keys(jp, {"map", "x_labels"}, "projection");
        if (!jp.contains("map")) throw validation_error("projection: missing 'map'");
        const json& jmap = jp["map"];
        if (!jmap.is_array() || static_cast<Eigen::Index>(jmap.size()) != n)
            throw validation_error("projection: 'map' must be an array of length " + std::to_string(n));
        Projection pi;
        Eigen::Index k_atoms = 0;
        for (const auto& v : jmap) {
            if (!v.is_number_integer()) throw validation_error("projection: map entries must be integers");
            const Eigen::Index x = v.get<Eigen::Index>();
            if (x < 0) throw validation_error("projection: map entries must be >= 0");
            pi.map.push_back(x);
            k_atoms = std::max(k_atoms, x + 1);
        }
        if (jp.contains("x_labels")) {
            const json& jx = jp["x_labels"];
            if (!jx.is_array() || static_cast<Eigen::Index>(jx.size()) < k_atoms)
                throw validation_error("projection: 'x_labels' shorter than the atom count");
            for (const auto& v : jx) {
                if (!v.is_string()) throw validation_error("projection: x_labels must be strings");
                pi.x_labels.push_back(v.get<std::string>());
            }
        } else {
            pi.x_labels = default_labels(k_atoms);
        }
        validate_projection(f.chain, pi);
        f.projection = std::move(pi);
    }

    if (j.contains("phi")) {
        const json& jphi = j["phi"];
        const Eigen::Index atoms = f.projection ? f.projection->atoms() : n;
        if (!jphi.is_array() || static_cast<Eigen::Index>(jphi.size()) != atoms)
            throw validation_error("chain: 'phi' must be an array of length " + std::to_string(atoms) +
                                   " (one value per state-space point)");
        Vecd phi(atoms);
        for (Eigen::Index x = 0; x < atoms; ++x) {
            phi(x) = detail::number_at(jphi[static_cast<std::size_t>(x)], "chain phi");
            if (std::isnan(phi(x)) || phi(x) < 0.0 || phi(x) > 1.0)
                throw validation_error("chain: phi values must lie in [0, 1]");
        }
        f.phi = std::move(phi);
    }
    return f;
}

inline Projection effective_projection(const ChainFile& f) {
    return f.projection ? *f.projection : identity_projection(f.chain.labels);
}

// Exact-arithmetic view of the same chain, entries converted exactly from
// their double representation. A supplied measure is kept when its exact
// conversion is exactly stationary (compressions are scale-invariant, so
// exact normalization is not needed); otherwise the measure is recomputed
// exactly, which requires a unique closed class.
inline ChainQ rational_chain(const ChainFile& f) {
    ChainQ q;
    q.labels = f.chain.labels;
    const Eigen::Index n = f.chain.size();
    q.P = MatQ(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Rat row_sum(0);
        for (Eigen::Index j2 = 0; j2 < n; ++j2) {
            q.P(i, j2) = rat_from_double(f.chain.P(i, j2));
            row_sum += q.P(i, j2);
        }
        if (row_sum != Rat(1))
            throw validation_error("rational: row '" + q.labels[static_cast<std::size_t>(i)] +
                                   "' is stochastic only after rounding; exact arithmetic needs "
                                   "exactly stochastic rows");
    }
    if (f.measure_given) {
        VecQ m(n);
        for (Eigen::Index i = 0; i < n; ++i) m(i) = rat_from_double(f.chain.m(i));
        VecQ image = q.P.transpose() * m;
        bool stationary = true;
        for (Eigen::Index i = 0; i < n; ++i)
            if (image(i) != m(i)) {
                stationary = false;
                break;
            }
        if (stationary) {
            q.m = std::move(m);
            return q;
        }
    }
    q.m = stationary_measure(q);
    return q;
}

inline json chain_file_to_json(const ChainFile& f) {
    json j;
    j["labels"] = f.chain.labels;
    json rows = json::array();
    for (Eigen::Index i = 0; i < f.chain.size(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < f.chain.size(); ++k) row.push_back(f.chain.P(i, k));
        rows.push_back(std::move(row));
    }
    j["transition"] = std::move(rows);
    json m = json::array();
    for (Eigen::Index i = 0; i < f.chain.m.size(); ++i) m.push_back(f.chain.m(i));
    j["measure"] = std::move(m);
    if (f.projection) {
        json jp;
        jp["map"] = f.projection->map;
        jp["x_labels"] = f.projection->x_labels;
        j["projection"] = std::move(jp);
    }
    if (f.phi) {
        json jphi = json::array();
        for (Eigen::Index x = 0; x < f.phi->size(); ++x) jphi.push_back((*f.phi)(x));
        j["phi"] = std::move(jphi);
    }
    return j;
}

// Graph input: JSON {"n":…, "edges":[[u,v],…]} or whitespace edge-list text.
inline GraphSpec parse_graph_json(const json& j) {
    detail::check_keys(j, {"n", "edges"}, "graph");
    if (!j.contains("n") || !j["n"].is_number_integer())
        throw validation_error("graph: missing integer 'n'");
    if (!j.contains("edges") || !j["edges"].is_array())
        throw validation_error("graph: missing array 'edges'");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw validation_error("graph: each edge must be a pair of integers");
        edges.emplace_back(e[0].get<Eigen::Index>(), e[1].get<Eigen::Index>());
    }
    return load_graph(j["n"].get<Eigen::Index>(), std::move(edges));
}

inline GraphSpec parse_graph_text(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    Eigen::Index max_v = -1;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u)) continue; // blank line
        if (!(ls >> v)) throw validation_error("graph: malformed edge line '" + line + "'");
        std::string rest;
        if (ls >> rest) throw validation_error("graph: trailing tokens on edge line '" + line + "'");
        if (u < 0 || v < 0) throw validation_error("graph: negative vertex index");
        edges.emplace_back(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
        max_v = std::max({max_v, static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)});
    }
    if (edges.empty()) throw validation_error("graph: no edges in input");
    return load_graph(max_v + 1, std::move(edges));
}

inline json to_json(const SpectralReport& r) {
    json j;
    j["lambda"] = r.lambda;
    j["method"] = r.method;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    if (r.spectral_radius_l20) j["spectral_radius_l20"] = *r.spectral_radius_l20;
    return j;
}

inline json to_json(const MCertificate& c) {
    json j;
    j["holds_up_to"] = c.holds_up_to;
    if (c.first_violation) {
        json v;
        v["n"] = c.first_violation->n;
        v["gap"] = c.first_violation->gap;
        j["first_violation"] = std::move(v);
    }
    return j;
}

inline json to_json(const LDQuery& q) {
    json j;
    j["eta"] = q.eta;
    j["m_phi"] = q.m_phi;
    j["lambda"] = q.lambda;
    j["n"] = q.n;
    j["tail"] = (q.tail == Tail::upper) ? "upper" : "lower";
    if (q.k) j["k"] = *q.k;
    return j;
}

inline json to_json(const LDReport& r) {
    json j;
    j["bound"] = r.bound;
    j["rate"] = r.rate;
    j["k_used"] = r.k_used;
    j["theta"] = r.theta;
    j["prefactor"] = r.prefactor;
    j["clause"] = r.clause;
    j["vacuous"] = r.vacuous;
    j["prefactor_loose"] = r.prefactor_loose;
    return j;
}

inline json to_json(const TailEstimate& e) {
    json j;
    j["p_hat"] = e.p_hat;
    j["ci_low"] = e.ci_low;
    j["ci_high"] = e.ci_high;
    j["hits"] = e.hits;
    j["samples"] = e.samples;
    return j;
}

inline json to_json(const RigidityReport& r) {
    json j;
    j["bound"] = r.bound;
    j["theta_used"] = r.theta_used;
    j["branch"] = r.branch;
    j["grid_bound"] = r.grid_bound;
    j["grid_k"] = r.grid_k;
    if (r.corollary_bound) j["corollary_bound"] = *r.corollary_bound;
    if (r.corollary_theta) j["corollary_theta"] = *r.corollary_theta;
    if (r.c_epsilon) j["c_epsilon"] = *r.c_epsilon;
    return j;
}

inline json to_json(const DeviationReport& r) {
    json j;
    if (r.lhs_defined) j["lhs"] = r.lhs;
    j["lhs_defined"] = r.lhs_defined;
    j["rhs"] = r.rhs;
    j["consistent"] = r.consistent;
    j["clause"] = r.clause;
    return j;
}

inline json to_json(const InequalityReport& r) {
    json j;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["satisfied"] = r.satisfied;
    return j;
}

inline json to_json(const NonescapeReport& r) {
    json j;
    j["bound"] = r.bound;
    j["bound_epsilon"] = r.bound_epsilon;
    j["r"] = r.r;
    j["epsilon"] = r.epsilon;
    j["entropy_defect"] = r.entropy_defect;
    j["eta_log"] = r.eta_log_value;
    return j;
}

inline json to_json(const SlnElement& a) {
    json j;
    j["n"] = a.n;
    j["p"] = a.p;
    j["exponents"] = a.exponents;
    j["regular"] = a.regular;
    j["eta_exponent_sum"] = eta_exponent_sum(a);
    j["eta_log"] = eta_log(a);
    j["entropy_exponent_sum"] = entropy_exponent_sum(a);
    j["entropy"] = entropy_sln(a);
    return j;
}

} // namespace specgap
