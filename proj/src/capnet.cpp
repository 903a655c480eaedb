#include "qlat/capnet.hpp"

#include "qlat/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qlat::capnet {

namespace {

// Exact SI values; the 1e6 folds fF^-1 -> F^-1 and Hz -> GHz together.
constexpr double kElementaryCharge = 1.602176634e-19;   // C
constexpr double kPlanckConstant = 6.62607015e-34;      // J s

std::pair<int, int> canonical(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

} // namespace

double charging_scale_ghz_ff() {
    return kElementaryCharge * kElementaryCharge / (2.0 * kPlanckConstant) * 1e6;
}

std::string to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::Qubit: return "qubit";
    case NodeKind::Coupler: return "coupler";
    case NodeKind::Spectator: return "spectator";
    }
    return "unknown";
}

NodeKind node_kind_from_string(const std::string& s) {
    if (s == "qubit") return NodeKind::Qubit;
    if (s == "coupler") return NodeKind::Coupler;
    if (s == "spectator") return NodeKind::Spectator;
    throw ValidationError("unknown node kind '" + s + "' (expected qubit|coupler|spectator)");
}

CapacitanceNetwork::CapacitanceNetwork(std::vector<ConductorNode> nodes,
                                       std::map<std::pair<int, int>, double> mutual_ff)
    : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) {
        throw ValidationError("network needs at least 2 nodes, got " +
                              std::to_string(nodes_.size()));
    }
    std::sort(nodes_.begin(), nodes_.end(),
              [](const ConductorNode& a, const ConductorNode& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const ConductorNode& n = nodes_[i];
        if (index_.count(n.id)) {
            throw ValidationError("duplicate node id " + std::to_string(n.id));
        }
        if (n.ground_cap_ff < 0.0) {
            throw ValidationError("nodes[id=" + std::to_string(n.id) +
                                  "].ground_cap_fF is negative");
        }
        if (n.ej_ghz && *n.ej_ghz <= 0.0) {
            throw ValidationError("nodes[id=" + std::to_string(n.id) +
                                  "].ej_ghz must be > 0 when present");
        }
        if ((n.kind == NodeKind::Qubit || n.kind == NodeKind::Coupler) && !n.ej_ghz) {
            throw ValidationError("nodes[id=" + std::to_string(n.id) + "] of kind " +
                                  to_string(n.kind) + " requires ej_ghz");
        }
        index_[n.id] = i;
    }
    for (const auto& [pair, value] : mutual_ff) {
        const auto [a, b] = pair;
        if (a == b) {
            throw ValidationError("mutual_fF pair (" + std::to_string(a) + "," +
                                  std::to_string(b) + ") is a self-pair");
        }
        if (!index_.count(a) || !index_.count(b)) {
            throw ValidationError("mutual_fF pair (" + std::to_string(a) + "," +
                                  std::to_string(b) + ") references an unknown node id");
        }
        if (value < 0.0) {
            throw ValidationError("mutual_fF[(" + std::to_string(a) + "," +
                                  std::to_string(b) + ")] is negative");
        }
        mutual_ff_[canonical(a, b)] = value;
    }
}

std::size_t CapacitanceNetwork::index_of(int id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        throw ValidationError("unknown node id " + std::to_string(id));
    }
    return it->second;
}

double CapacitanceNetwork::mutual(int a, int b) const {
    const auto it = mutual_ff_.find(canonical(a, b));
    return it == mutual_ff_.end() ? 0.0 : it->second;
}

CapacitanceNetwork CapacitanceNetwork::from_json(const nlohmann::json& j) {
    std::vector<ConductorNode> nodes;
    if (!j.contains("nodes") || !j["nodes"].is_array()) {
        throw ValidationError("network file: missing 'nodes' array");
    }
    std::size_t pos = 0;
    for (const auto& nj : j["nodes"]) {
        const std::string where = "nodes[" + std::to_string(pos) + "]";
        ConductorNode n;
        try {
            n.id = nj.at("id").get<int>();
            n.kind = node_kind_from_string(nj.at("kind").get<std::string>());
            n.ground_cap_ff = nj.at("ground_cap_fF").get<double>();
            if (nj.contains("ej_ghz")) n.ej_ghz = nj["ej_ghz"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }
        nodes.push_back(n);
        ++pos;
    }
    std::map<std::pair<int, int>, double> mutual;
    if (j.contains("mutual_fF")) {
        pos = 0;
        for (const auto& mj : j["mutual_fF"]) {
            const std::string where = "mutual_fF[" + std::to_string(pos) + "]";
            if (!mj.is_array() || mj.size() != 3) {
                throw ValidationError(where + ": expected [i, j, value_fF]");
            }
            int a = 0;
            int b = 0;
            double v = 0.0;
            try {
                a = mj[0].get<int>();
                b = mj[1].get<int>();
                v = mj[2].get<double>();
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(where + ": " + e.what());
            }
            if (mutual.count(canonical(a, b))) {
                throw ValidationError(where + ": duplicate pair (" + std::to_string(a) + "," +
                                      std::to_string(b) + ")");
            }
            if (v < 0.0) {
                throw ValidationError(where + ": negative capacitance");
            }
            mutual[canonical(a, b)] = v;
            ++pos;
        }
    }
    return CapacitanceNetwork(std::move(nodes), std::move(mutual));
}

CapacitanceNetwork CapacitanceNetwork::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open network file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json CapacitanceNetwork::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const ConductorNode& n : nodes_) {
        nlohmann::json nj{{"id", n.id},
                          {"kind", to_string(n.kind)},
                          {"ground_cap_fF", n.ground_cap_ff}};
        if (n.ej_ghz) nj["ej_ghz"] = *n.ej_ghz;
        nodes.push_back(nj);
    }
    nlohmann::json mutual = nlohmann::json::array();
    for (const auto& [pair, value] : mutual_ff_) {
        mutual.push_back({pair.first, pair.second, value});
    }
    return nlohmann::json{{"nodes", nodes}, {"mutual_fF", mutual}};
}

MaxwellMatrix to_maxwell_matrix(const CapacitanceNetwork& net) {
    const std::size_t n = net.size();
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i) c(i, i) = net.node_at(i).ground_cap_ff;
    for (const auto& [pair, value] : net.mutual_caps()) {
        const std::size_t i = net.index_of(pair.first);
        const std::size_t j = net.index_of(pair.second);
        c(i, j) = -value;
        c(j, i) = -value;
        c(i, i) += value;
        c(j, j) += value;
    }
    return MaxwellMatrix{std::move(c)};
}

ChargingEnergyMatrix charging_energy_matrix(const MaxwellMatrix& c, double unit_scale) {
    if (unit_scale <= 0.0) throw ValidationError("unit_scale must be positive");
    Matrix inv;
    try {
        inv = invert(c.entries);
    } catch (const NumericError&) {
        throw NumericError("charging_energy_matrix: Maxwell matrix is singular");
    }
    const double cond = condition_1norm(c.entries, inv);
    if (!(cond < 1e12)) {
        std::ostringstream msg;
        msg << "charging_energy_matrix: Maxwell matrix ill-conditioned (kappa_1 ~ " << cond
            << ")";
        throw NumericError(msg.str());
    }
    const double k = charging_scale_ghz_ff() * unit_scale;
    const std::size_t n = inv.rows();
    Matrix ec(n, n);
    // Symmetrize: the exact inverse is symmetric, LU round-off is not.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = 0.5 * k * (inv(i, j) + inv(j, i));
            ec(i, j) = v;
            ec(j, i) = v;
        }
    }
    return ChargingEnergyMatrix{std::move(ec), k};
}

} // namespace qlat::capnet
