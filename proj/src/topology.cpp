#include "qlat/topology.hpp"

#include "qlat/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace qlat::topology {

PairKey make_pair_key(int a, int b) {
    return a < b ? PairKey{a, b} : PairKey{b, a};
}

CouplingExtraction extract_couplings(const hamiltonian::EffectiveHamiltonian& h) {
    CouplingExtraction out;
    const Matrix& g = h.coupling();
    const Matrix& d = h.directed_coupling();
    const std::size_t n = h.mode_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (j > i && g(i, j) != 0.0) {
                out.magnitudes[{static_cast<int>(i), static_cast<int>(j)}] = std::abs(g(i, j));
            }
            if (d(i, j) != 0.0) {
                out.directed[{static_cast<int>(i), static_cast<int>(j)}] = std::abs(d(i, j));
            }
        }
    }
    return out;
}

double max_magnitude(const PairMap& g) {
    double best = 0.0;
    for (const auto& [key, value] : g) best = std::max(best, std::abs(value));
    return best;
}

PairMap normalize_couplings(const PairMap& g) {
    const double anchor = max_magnitude(g);
    if (anchor == 0.0) {
        throw NumericError("normalize_couplings: all couplings are zero, no scale");
    }
    PairMap out;
    for (const auto& [key, value] : g) out[key] = std::abs(value) / anchor;
    return out;
}

DirectedMap scale_directed(const DirectedMap& directed, double anchor) {
    if (anchor <= 0.0) {
        throw NumericError("scale_directed: anchor must be positive");
    }
    DirectedMap out;
    for (const auto& [key, value] : directed) out[key] = std::abs(value) / anchor;
    return out;
}

InteractionGraph::InteractionGraph(int node_count, PairMap edges)
    : node_count_(node_count), edges_(std::move(edges)) {
    if (node_count_ < 0) throw ValidationError("graph node_count must be >= 0");
    double max_w = 0.0;
    for (const auto& [key, w] : edges_) {
        if (key.first == key.second) {
            throw ValidationError("graph edge (" + std::to_string(key.first) + "," +
                                  std::to_string(key.second) + ") is a self-loop");
        }
        if (key.first < 0 || key.second >= node_count_) {
            throw ValidationError("graph edge (" + std::to_string(key.first) + "," +
                                  std::to_string(key.second) + ") outside node range");
        }
        if (w < 0.0 || w > 1.0) {
            throw ValidationError("graph edge weight " + std::to_string(w) +
                                  " outside [0, 1]");
        }
        max_w = std::max(max_w, w);
    }
    if (!edges_.empty() && max_w != 1.0) {
        throw ValidationError("graph weights must be anchored at max = 1");
    }
}

InteractionGraph InteractionGraph::nominal(int node_count, const std::vector<PairKey>& edges) {
    PairMap m;
    for (const PairKey& e : edges) m[make_pair_key(e.first, e.second)] = 1.0;
    return InteractionGraph(node_count, std::move(m));
}

std::set<PairKey> InteractionGraph::edge_set() const {
    std::set<PairKey> out;
    for (const auto& [key, w] : edges_) out.insert(key);
    return out;
}

InteractionGraph InteractionGraph::from_json(const nlohmann::json& j) {
    int node_count = 0;
    std::vector<PairKey> edges;
    try {
        node_count = j.at("node_count").get<int>();
        for (const auto& ej : j.at("edges")) {
            if (!ej.is_array() || ej.size() != 2) {
                throw ValidationError("topology file: edges entries must be [i, j]");
            }
            edges.push_back(make_pair_key(ej[0].get<int>(), ej[1].get<int>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("topology file: ") + e.what());
    }
    return InteractionGraph::nominal(node_count, edges);
}

InteractionGraph InteractionGraph::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open topology file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

InteractionGraph reconstruct_physical_graph(const PairMap& normalized, double tau_min,
                                            int node_count) {
    if (!(tau_min > 0.0 && tau_min < 1.0)) {
        throw ValidationError("tau_min must lie in (0, 1), got " + std::to_string(tau_min));
    }
    PairMap kept;
    for (const auto& [key, w] : normalized) {
        if (w >= tau_min) kept[key] = w;
    }
    return InteractionGraph(node_count, std::move(kept));
}

LTDReport ltd_report(const InteractionGraph& nominal, const InteractionGraph& physical,
                     const DirectedMap& directed_normalized) {
    if (nominal.node_count() != physical.node_count()) {
        throw ValidationError("ltd_report: graphs disagree on node_count");
    }
    const std::set<PairKey> nom = nominal.edge_set();
    const std::set<PairKey> phys = physical.edge_set();
    if (nom.empty()) {
        throw ValidationError("ltd_report: nominal graph has no edges, LTD undefined");
    }

    LTDReport report{physical, {}, {}, {}, {}, 0.0, 0.0};
    for (const PairKey& e : phys) {
        if (!nom.count(e)) report.parasitic_edges.insert(e);
    }
    for (const PairKey& e : nom) {
        if (!phys.count(e)) report.missing_edges.insert(e);
    }

    // Asymmetry over every interacting pair seen in the directed map.
    for (const auto& [ordered, value] : directed_normalized) {
        const PairKey key = make_pair_key(ordered.first, ordered.second);
        if (report.asymmetry.count(key)) continue;
        const auto fwd = directed_normalized.find({key.first, key.second});
        const auto rev = directed_normalized.find({key.second, key.first});
        const double gij = fwd == directed_normalized.end() ? 0.0 : fwd->second;
        const double gji = rev == directed_normalized.end() ? 0.0 : rev->second;
        report.asymmetry[key] = std::abs(gij - gji);
    }
    double sum = 0.0;
    for (const auto& [key, a] : report.asymmetry) {
        sum += a;
        if (a > report.asymmetry_summary.max) {
            report.asymmetry_summary.max = a;
            report.asymmetry_summary.argmax = key;
        }
    }
    if (!report.asymmetry.empty()) {
        report.asymmetry_summary.mean = sum / static_cast<double>(report.asymmetry.size());
    }

    const double nom_size = static_cast<double>(nom.size());
    report.ltd = static_cast<double>(report.parasitic_edges.size() + report.missing_edges.size()) /
                 nom_size;
    double weighted = static_cast<double>(report.missing_edges.size());
    for (const PairKey& e : report.parasitic_edges) {
        weighted += physical.edges().at(e);
    }
    report.ltd_weighted = weighted / nom_size;
    return report;
}

namespace {

nlohmann::json edge_set_json(const std::set<PairKey>& edges) {
    nlohmann::json out = nlohmann::json::array();
    for (const PairKey& e : edges) out.push_back({e.first, e.second});
    return out;
}

} // namespace

nlohmann::json to_json(const LTDReport& report) {
    nlohmann::json phys = nlohmann::json::array();
    for (const auto& [key, w] : report.physical_graph.edges()) {
        phys.push_back({{"edge", {key.first, key.second}}, {"weight", w}});
    }
    nlohmann::json asym = nlohmann::json::array();
    for (const auto& [key, a] : report.asymmetry) {
        asym.push_back({{"edge", {key.first, key.second}}, {"value", a}});
    }
    nlohmann::json summary{{"max", report.asymmetry_summary.max},
                           {"mean", report.asymmetry_summary.mean}};
    if (report.asymmetry_summary.argmax.first >= 0) {
        summary["argmax"] = {report.asymmetry_summary.argmax.first,
                             report.asymmetry_summary.argmax.second};
    }
    return nlohmann::json{{"node_count", report.physical_graph.node_count()},
                          {"physical_edges", phys},
                          {"parasitic_edges", edge_set_json(report.parasitic_edges)},
                          {"missing_edges", edge_set_json(report.missing_edges)},
                          {"asymmetry", asym},
                          {"asymmetry_summary", summary},
                          {"ltd", report.ltd},
                          {"ltd_weighted", report.ltd_weighted}};
}

} // namespace qlat::topology
