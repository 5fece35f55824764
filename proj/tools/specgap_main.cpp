// specgap: certificates, spectral-gap reports, tail bounds, and simulations
// for finite Markov shifts over state-space projections.
//
// Exit codes: 0 success, 2 input/validation error, 3 certificate failure.
// Errors go to stderr as JSON; no output file is written on failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "specgap/chain_io.hpp"

namespace {

using specgap::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw specgap::validation_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

specgap::ChainFile load_chain(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw specgap::validation_error("invalid JSON in " + path + ": " + e.what());
    }
    return specgap::parse_chain_file(j);
}

// Output is composed fully before anything is written, so a failure can
// never leave a partial file behind.
void emit(const std::string& body, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw specgap::validation_error("cannot open output file: " + out_path);
    out << body;
    if (!out) throw specgap::validation_error("write failed: " + out_path);
}

std::vector<double> parse_csv_doubles(const std::string& s, const std::string& what) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw specgap::validation_error(what + ": bad number '" + tok + "'");
        }
    }
    if (vals.empty()) throw specgap::validation_error(what + ": empty list");
    return vals;
}

std::vector<long long> parse_csv_ints(const std::string& s, const std::string& what) {
    std::vector<long long> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stoll(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw specgap::validation_error(what + ": bad integer '" + tok + "'");
        }
    }
    if (vals.empty()) throw specgap::validation_error(what + ": empty list");
    return vals;
}

specgap::Vecd phi_for(const specgap::ChainFile& f, const std::string& phi_flag) {
    const Eigen::Index atoms = f.projection ? f.projection->atoms() : f.chain.size();
    if (!phi_flag.empty()) {
        auto vals = parse_csv_doubles(phi_flag, "--phi");
        if (static_cast<Eigen::Index>(vals.size()) != atoms)
            throw specgap::validation_error("--phi: expected " + std::to_string(atoms) + " values");
        specgap::Vecd phi(atoms);
        for (Eigen::Index i = 0; i < atoms; ++i) {
            phi(i) = vals[static_cast<std::size_t>(i)];
            if (!(phi(i) >= 0.0 && phi(i) <= 1.0))
                throw specgap::validation_error("--phi: values must lie in [0, 1]");
        }
        return phi;
    }
    if (f.phi) return *f.phi;
    throw specgap::validation_error("no observable: chain file has no 'phi' and --phi not given");
}

struct Args {
    std::string chain_path, out_path, phi_flag;
    std::string tail = "upper";
    std::string kind = "nb", projection = "none", graph_path, random_spec;
    std::string nlist, sln_spec, start_flag, rank_one = "false";
    double eta = 0.0, mphi = 0.0, lambda = 0.0, gap = 0.0, epsilon = 0.0;
    double hm = 0.0, h = 0.0, entropy_defect = 0.0;
    long n = 0, nmax = 0, complete_n = 0, cycle_n = 0;
    long long samples = 0, p = 0;
    std::uint64_t seed = 0;
    int k = 0, kmax = 40;
    bool rational = false, simple = false, petersen = false;
    bool have_k = false, have_defect = false, have_h = false, have_eps = false;
};

int run(int argc, char** argv) {
    CLI::App app{"spectral-gap certificates and tail bounds for Markov shifts"};
    app.require_subcommand(1);
    Args a;

    auto* spectrum = app.add_subcommand("spectrum", "operator norm on mean-zero functions");
    spectrum->add_option("--chain", a.chain_path, "chain spec JSON")->required();
    spectrum->add_option("--out", a.out_path, "output path (default stdout)");

    auto* checkm = app.add_subcommand("check-m", "semigroup compatibility certificate");
    checkm->add_option("--chain", a.chain_path, "chain spec JSON")->required();
    checkm->add_option("--nmax", a.nmax, "largest step count checked")->required();
    checkm->add_flag("--rational", a.rational, "exact arithmetic");
    checkm->add_option("--out", a.out_path, "output path (default stdout)");

    auto* bound = app.add_subcommand("bound", "large-deviation tail bound");
    bound->add_option("--eta", a.eta, "tail threshold")->required();
    bound->add_option("--mphi", a.mphi, "stationary mean of the observable")->required();
    bound->add_option("--lambda", a.lambda, "operator norm on mean-zero functions")->required();
    bound->add_option("--n", a.n, "trajectory length")->required();
    bound->add_option("--k", a.k, "fixed block parameter")->check(CLI::PositiveNumber);
    bound->add_option("--kmax", a.kmax, "largest block parameter scanned (default 40)");
    bound->add_flag("--simple", a.simple, "single-block bound instead of the block scan");
    bound->add_option("--tail", a.tail, "upper or lower (default upper)")
        ->check(CLI::IsMember({"upper", "lower"}));
    bound->add_option("--out", a.out_path, "output path (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo tail estimate");
    simulate->add_option("--chain", a.chain_path, "chain spec JSON")->required();
    simulate->add_option("--eta", a.eta, "tail threshold")->required();
    simulate->add_option("--n", a.n, "trajectory length")->required();
    simulate->add_option("--samples", a.samples, "sample count")->required();
    simulate->add_option("--seed", a.seed, "RNG seed")->required();
    simulate->add_option("--start", a.start_flag, "start state index (default: stationary)");
    simulate->add_option("--phi", a.phi_flag, "observable values, comma separated");
    simulate->add_option("--out", a.out_path, "output path (default stdout)");

    auto* compare = app.add_subcommand("compare", "bound vs simulation vs exact tail, CSV");
    compare->add_option("--chain", a.chain_path, "chain spec JSON")->required();
    compare->add_option("--eta", a.eta, "tail threshold")->required();
    compare->add_option("--nlist", a.nlist, "trajectory lengths, comma separated")->required();
    compare->add_option("--samples", a.samples, "sample count per length")->required();
    compare->add_option("--seed", a.seed, "RNG seed")->required();
    compare->add_option("--kmax", a.kmax, "largest block parameter scanned (default 40)");
    compare->add_option("--phi", a.phi_flag, "observable values, comma separated");
    compare->add_option("--out", a.out_path, "output path (default stdout)");

    auto* nbgraph = app.add_subcommand("nb-graph", "emit a walk chain from a regular graph");
    nbgraph->add_flag("--petersen", a.petersen, "Petersen graph");
    nbgraph->add_option("--complete", a.complete_n, "complete graph K_n");
    nbgraph->add_option("--cycle", a.cycle_n, "cycle graph C_n");
    nbgraph->add_option("--random", a.random_spec, "random regular graph 'n,d,seed'");
    nbgraph->add_option("--graph", a.graph_path, "edge list file (text or JSON)");
    nbgraph->add_option("--kind", a.kind, "nb or hecke (default nb)")
        ->check(CLI::IsMember({"nb", "hecke"}));
    nbgraph->add_option("--projection", a.projection, "none, source, or terminal (default none)")
        ->check(CLI::IsMember({"none", "source", "terminal"}));
    nbgraph->add_option("--out", a.out_path, "output path (default stdout)");

    auto* rigidity = app.add_subcommand("rigidity", "deviation bound from an entropy gap");
    rigidity->add_option("--lambda", a.lambda, "operator norm on mean-zero functions")->required();
    rigidity->add_option("--gap", a.gap, "entropy gap, nats")->required();
    rigidity->add_option("--kmax", a.kmax, "grid depth (default 40)");
    auto* eps_opt = rigidity->add_option("--epsilon", a.epsilon, "Hoelder exponent for the constant");
    rigidity->add_option("--out", a.out_path, "output path (default stdout)");

    auto* nonescape = app.add_subcommand("nonescape", "mass retention from an entropy gap");
    nonescape->add_option("--hm", a.hm, "maximal entropy")->required();
    nonescape->add_option("--hmu", a.h, "measure entropy")->required();
    nonescape->add_option("--lambda", a.lambda, "operator norm on mean-zero functions")->required();
    nonescape->add_option("--out", a.out_path, "output path (default stdout)");

    auto* sln = app.add_subcommand("sln", "diagonal-element exponent sums and mass bound");
    sln->add_option("--sln", a.sln_spec, "exponents, comma separated, nonincreasing, sum 0")
        ->required();
    sln->add_option("--p", a.p, "prime")->required();
    auto* defect_opt = sln->add_option("--entropy-defect", a.entropy_defect, "h_m - h, nats");
    auto* h_opt = sln->add_option("--hmu", a.h, "measure entropy, nats");
    sln->add_option("--rank-one", a.rank_one, "true or false (default false)")
        ->check(CLI::IsMember({"true", "false", "1", "0"}));
    auto* sln_eps = sln->add_option("--epsilon", a.epsilon, "rate exponent margin (default 0)");
    sln->add_option("--out", a.out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    }
    a.have_k = bound->count("--k") > 0;
    a.have_defect = defect_opt->count() > 0;
    a.have_h = h_opt->count() > 0;
    a.have_eps = eps_opt->count() > 0;
    const bool have_kmax_bound = bound->count("--kmax") > 0;
    (void)sln_eps;

    using namespace specgap;

    if (spectrum->parsed()) {
        ChainFile f = load_chain(a.chain_path);
        auto op = averaging_operator(f.chain, effective_projection(f));
        emit(to_json(l20_norm(op)).dump(2) + "\n", a.out_path);
        return 0;
    }

    if (checkm->parsed()) {
        ChainFile f = load_chain(a.chain_path);
        MCertificate cert;
        if (a.rational) {
            ChainQ q = rational_chain(f);
            cert = check_property_m(q, effective_projection(f), a.nmax);
        } else {
            cert = check_property_m(f.chain, effective_projection(f), a.nmax);
        }
        emit(to_json(cert).dump(2) + "\n", a.out_path);
        return 0;
    }

    if (bound->parsed()) {
        const Tail tail = (a.tail == "upper") ? Tail::upper : Tail::lower;
        LDReport rep;
        if (a.simple) {
            if (a.have_k || have_kmax_bound)
                throw validation_error("bound: --simple excludes --k and --kmax");
            rep = ld_simple_bound(LDQuery{a.eta, a.mphi, a.lambda, a.n, tail, std::nullopt});
        } else if (a.have_k) {
            if (have_kmax_bound) throw validation_error("bound: --k excludes --kmax");
            rep = ld_tail_bound(LDQuery{a.eta, a.mphi, a.lambda, a.n, tail, a.k});
        } else {
            rep = ld_tail_optimize(LDQuery{a.eta, a.mphi, a.lambda, a.n, tail, std::nullopt},
                                   a.kmax);
        }
        emit(to_json(rep).dump(2) + "\n", a.out_path);
        return 0;
    }

    if (simulate->parsed()) {
        ChainFile f = load_chain(a.chain_path);
        Vecd phi = phi_for(f, a.phi_flag);
        SimConfig cfg{a.n, a.eta, a.samples, a.seed, std::nullopt};
        if (!a.start_flag.empty() && a.start_flag != "stationary") {
            try {
                std::size_t pos = 0;
                long idx = std::stol(a.start_flag, &pos);
                if (pos != a.start_flag.size()) throw std::invalid_argument(a.start_flag);
                cfg.start = static_cast<Eigen::Index>(idx);
            } catch (const std::exception&) {
                throw validation_error("--start: expected 'stationary' or a state index");
            }
        }
        auto est = empirical_tail(f.chain, effective_projection(f), phi, cfg);
        emit(to_json(est).dump(2) + "\n", a.out_path);
        return 0;
    }

    if (compare->parsed()) {
        ChainFile f = load_chain(a.chain_path);
        Vecd phi = phi_for(f, a.phi_flag);
        std::vector<long> n_list;
        for (long long v : parse_csv_ints(a.nlist, "--nlist")) n_list.push_back(static_cast<long>(v));
        auto rep = bound_vs_empirical(f.chain, effective_projection(f), phi, a.eta, n_list,
                                      a.samples, a.seed, a.kmax);
        emit(compare_csv(rep), a.out_path);
        return 0;
    }

    if (nbgraph->parsed()) {
        int sources = (a.petersen ? 1 : 0) + (a.complete_n > 0 ? 1 : 0) + (a.cycle_n > 0 ? 1 : 0) +
                      (!a.random_spec.empty() ? 1 : 0) + (!a.graph_path.empty() ? 1 : 0);
        if (sources != 1)
            throw validation_error(
                "nb-graph: give exactly one of --petersen, --complete, --cycle, --random, --graph");
        GraphSpec g;
        if (a.petersen) {
            g = petersen_graph();
        } else if (a.complete_n > 0) {
            g = complete_graph(a.complete_n);
        } else if (a.cycle_n > 0) {
            g = cycle_graph(a.cycle_n);
        } else if (!a.random_spec.empty()) {
            auto vals = parse_csv_ints(a.random_spec, "--random");
            if (vals.size() != 3) throw validation_error("--random: expected 'n,d,seed'");
            if (vals[2] < 0) throw validation_error("--random: seed must be nonnegative");
            g = random_regular(static_cast<Eigen::Index>(vals[0]),
                               static_cast<Eigen::Index>(vals[1]),
                               static_cast<std::uint64_t>(vals[2]));
        } else {
            std::string text = read_file(a.graph_path);
            std::size_t first = text.find_first_not_of(" \t\r\n");
            if (first != std::string::npos && text[first] == '{') {
                try {
                    g = parse_graph_json(json::parse(text));
                } catch (const json::parse_error& e) {
                    throw validation_error("invalid JSON in " + a.graph_path + ": " + e.what());
                }
            } else {
                g = parse_graph_text(text);
            }
        }

        // Generators set the uniform measure in closed form; recomputing it
        // would reject deterministic walks (d = 2) and periodic ones.
        ChainFile f;
        if (a.kind == "hecke") {
            if (a.projection != "none")
                throw validation_error("nb-graph: vertex projections apply to --kind nb only");
            f.chain = hecke_chain<double>(g);
        } else {
            auto nb = nonbacktracking_chain<double>(g);
            f.chain = nb.chain;
            if (a.projection == "source") f.projection = nb.source;
            if (a.projection == "terminal") f.projection = nb.terminal;
        }
        f.measure_given = true;
        emit(chain_file_to_json(f).dump(2) + "\n", a.out_path);
        return 0;
    }

    if (rigidity->parsed()) {
        RigidityQuery q{a.lambda, a.gap, a.kmax,
                        a.have_eps ? std::optional<double>(a.epsilon) : std::nullopt};
        emit(to_json(rigidity_bound(q)).dump(2) + "\n", a.out_path);
        return 0;
    }

    if (nonescape->parsed()) {
        json j;
        j["bound"] = nonescape_from_lambda(a.hm, a.h, a.lambda);
        j["h_m"] = a.hm;
        j["h"] = a.h;
        j["lambda"] = a.lambda;
        emit(j.dump(2) + "\n", a.out_path);
        return 0;
    }

    if (sln->parsed()) {
        if (a.have_defect && a.have_h)
            throw validation_error("sln: give --entropy-defect or --hmu, not both");
        auto elem = make_sln_element(a.p, parse_csv_ints(a.sln_spec, "--sln"));
        const bool rank_one = (a.rank_one == "true" || a.rank_one == "1");
        json j = to_json(elem);
        if (a.have_defect)
            j["nonescape"] = to_json(nonescape_sln_defect(elem, a.entropy_defect, rank_one, a.epsilon));
        else if (a.have_h)
            j["nonescape"] = to_json(nonescape_sln(elem, a.h, rank_one, a.epsilon));
        emit(j.dump(2) + "\n", a.out_path);
        return 0;
    }

    throw validation_error("no subcommand");
}

json error_json(const std::string& kind, const std::string& what, int code) {
    json j;
    j["error"] = kind;
    j["message"] = what;
    j["code"] = code;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::cerr << error_json("usage", e.what(), 2).dump() << "\n";
        return 2;
    } catch (const specgap::certificate_error& e) {
        std::cerr << error_json("certificate", e.what(), 3).dump() << "\n";
        return 3;
    } catch (const specgap::validation_error& e) {
        std::cerr << error_json("validation", e.what(), 2).dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << error_json("validation", e.what(), 2).dump() << "\n";
        return 2;
    }
}
