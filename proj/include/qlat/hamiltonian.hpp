#pragma once

#include "qlat/capnet.hpp"
#include "qlat/linalg.hpp"

#include <json.hpp>

#include <vector>

namespace qlat::hamiltonian {

/// Transmon-expansion parameters of one junction-hosting node.
struct ModeParams {
    int node_id = 0;
    capnet::NodeKind kind = capnet::NodeKind::Qubit;
    double frequency_ghz = 0.0;         // omega = sqrt(8 Ec Ej) - Ec
    double anharmonicity_ghz = 0.0;     // alpha = -Ec (negative)
    double charging_energy_ghz = 0.0;   // Ec,ii
    double josephson_energy_ghz = 0.0;  // Ej
};

struct HamiltonianOptions {
    double regime_floor = 20.0;          // minimum Ej/Ec per junction node
    double resonance_floor_ghz = 1e-3;   // minimum |omega_i - omega_k| in mediated paths
};

/// Multi-mode effective Hamiltonian: one bosonic mode per junction node,
/// exchange couplings from the charging-energy off-diagonals, and the
/// detuning-weighted directed coupling variant used for asymmetry analysis.
/// Mode index = position of the junction node in ascending node-id order.
class EffectiveHamiltonian {
public:
    EffectiveHamiltonian(std::vector<ModeParams> modes, Matrix coupling, Matrix directed);

    std::size_t mode_count() const { return modes_.size(); }
    const std::vector<ModeParams>& modes() const { return modes_; }
    const ModeParams& mode(std::size_t i) const { return modes_[i]; }

    /// Symmetric exchange coupling g_ij in GHz, zero diagonal.
    const Matrix& coupling() const { return coupling_; }
    /// Directed coupling g_{i->j} including coupler-mediated paths.
    const Matrix& directed_coupling() const { return directed_; }

    std::vector<std::size_t> coupler_modes() const;

private:
    std::vector<ModeParams> modes_;
    Matrix coupling_;
    Matrix directed_;
};

/// Build mode parameters and couplings via the standard transmon expansion:
/// omega_i = sqrt(8 Ec,ii Ej,i) - Ec,ii, alpha_i = -Ec,ii, and
/// g_ij = 8 Ec,ij nzpf_i nzpf_j with nzpf = (Ej / 32 Ec)^(1/4).
/// Throws ValidationError when a junction node violates Ej/Ec >= regime_floor.
EffectiveHamiltonian build_effective_hamiltonian(const capnet::ChargingEnergyMatrix& ec,
                                                 const capnet::CapacitanceNetwork& net,
                                                 const HamiltonianOptions& opts = {});

/// Coupler-mediated interaction g1*g2/delta + g12; delta = 0 is a domain error.
double mediated_coupling(double g1, double g2, double g12, double delta);

/// g_{i->j} = g_ij + sum over coupler modes k of g_ik g_kj / (omega_i - omega_k).
/// Source-mode detuning makes the result generally asymmetric. Throws
/// NumericError when a used path has |omega_i - omega_k| below the floor.
Matrix directed_coupling_matrix(const EffectiveHamiltonian& h,
                                double resonance_floor_ghz = 1e-3);

nlohmann::json to_json(const EffectiveHamiltonian& h);

} // namespace qlat::hamiltonian
