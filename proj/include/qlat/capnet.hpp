#pragma once

#include "qlat/linalg.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qlat::capnet {

enum class NodeKind { Qubit, Coupler, Spectator };

std::string to_string(NodeKind kind);
NodeKind node_kind_from_string(const std::string& s);

/// One conducting island of the layout. Qubit and coupler nodes carry a
/// Josephson junction; spectator nodes are purely electrostatic.
struct ConductorNode {
    int id = 0;
    NodeKind kind = NodeKind::Qubit;
    double ground_cap_ff = 0.0;          // capacitance to ground, fF
    std::optional<double> ej_ghz;        // junction energy, GHz
};

/// Layout-derived capacitance graph: nodes plus mutual capacitances over
/// unordered node pairs. Immutable after construction; construction
/// validates the structural invariants and throws ValidationError with a
/// positional message on the first violation.
class CapacitanceNetwork {
public:
    CapacitanceNetwork(std::vector<ConductorNode> nodes,
                       std::map<std::pair<int, int>, double> mutual_ff);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<ConductorNode>& nodes() const { return nodes_; }
    const std::map<std::pair<int, int>, double>& mutual_caps() const { return mutual_ff_; }

    /// Dense matrix index of a node id (nodes are ordered by ascending id).
    std::size_t index_of(int id) const;
    const ConductorNode& node_at(std::size_t index) const { return nodes_[index]; }

    /// Mutual capacitance between two ids; 0 when the pair is absent.
    double mutual(int a, int b) const;

    static CapacitanceNetwork from_json(const nlohmann::json& j);
    static CapacitanceNetwork load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

private:
    std::vector<ConductorNode> nodes_;                  // sorted by id
    std::map<std::pair<int, int>, double> mutual_ff_;   // keys canonical (lo, hi)
    std::map<int, std::size_t> index_;
};

/// Maxwell capacitance matrix in fF: positive diagonal (ground + sum of
/// mutuals), non-positive off-diagonal (-mutual), weakly diagonally dominant.
struct MaxwellMatrix {
    Matrix entries;
};

/// Charging-energy matrix in GHz, proportional to the inverse Maxwell matrix.
struct ChargingEnergyMatrix {
    Matrix entries;
    double scale_ghz_ff = 0.0;   // the constant k with E_C * C = k * I
};

/// Conversion constant k such that E_C = k * C^-1 maps fF to GHz.
/// k = e^2/(2h) in GHz*fF, i.e. a single 100 fF island has E_C ~ 0.194 GHz.
double charging_scale_ghz_ff();

MaxwellMatrix to_maxwell_matrix(const CapacitanceNetwork& net);

/// E_C = charging_scale * unit_scale * C^-1. Throws NumericError when the
/// 1-norm condition number exceeds 1e12.
ChargingEnergyMatrix charging_energy_matrix(const MaxwellMatrix& c, double unit_scale = 1.0);

} // namespace qlat::capnet
