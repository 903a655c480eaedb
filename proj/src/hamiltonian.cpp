#include "qlat/hamiltonian.hpp"

#include "qlat/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace qlat::hamiltonian {

EffectiveHamiltonian::EffectiveHamiltonian(std::vector<ModeParams> modes, Matrix coupling,
                                           Matrix directed)
    : modes_(std::move(modes)), coupling_(std::move(coupling)), directed_(std::move(directed)) {}

std::vector<std::size_t> EffectiveHamiltonian::coupler_modes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (modes_[i].kind == capnet::NodeKind::Coupler) out.push_back(i);
    }
    return out;
}

EffectiveHamiltonian build_effective_hamiltonian(const capnet::ChargingEnergyMatrix& ec,
                                                 const capnet::CapacitanceNetwork& net,
                                                 const HamiltonianOptions& opts) {
    if (ec.entries.rows() != net.size()) {
        throw ValidationError("charging-energy matrix dimension does not match the network");
    }

    std::vector<ModeParams> modes;
    std::vector<std::size_t> node_index;   // network index of each mode
    std::vector<double> nzpf;
    for (std::size_t i = 0; i < net.size(); ++i) {
        const capnet::ConductorNode& node = net.node_at(i);
        if (!node.ej_ghz) continue;
        const double ec_ii = ec.entries(i, i);
        const double ej = *node.ej_ghz;
        if (ej / ec_ii < opts.regime_floor) {
            std::ostringstream msg;
            msg << "node " << node.id << " outside the transmon regime: Ej/Ec = " << ej / ec_ii
                << " < " << opts.regime_floor;
            throw ValidationError(msg.str());
        }
        ModeParams m;
        m.node_id = node.id;
        m.kind = node.kind;
        m.charging_energy_ghz = ec_ii;
        m.josephson_energy_ghz = ej;
        m.frequency_ghz = std::sqrt(8.0 * ec_ii * ej) - ec_ii;
        m.anharmonicity_ghz = -ec_ii;
        modes.push_back(m);
        node_index.push_back(i);
        nzpf.push_back(std::pow(ej / (32.0 * ec_ii), 0.25));
    }

    const std::size_t n = modes.size();
    Matrix g(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double ec_ab = ec.entries(node_index[a], node_index[b]);
            const double gab = 8.0 * ec_ab * nzpf[a] * nzpf[b];
            g(a, b) = gab;
            g(b, a) = gab;
        }
    }

    EffectiveHamiltonian partial(modes, g, Matrix(n, n));
    Matrix directed = directed_coupling_matrix(partial, opts.resonance_floor_ghz);
    return EffectiveHamiltonian(std::move(modes), std::move(g), std::move(directed));
}

double mediated_coupling(double g1, double g2, double g12, double delta) {
    if (delta == 0.0) throw ValidationError("mediated_coupling: delta must be nonzero");
    return g1 * g2 / delta + g12;
}

Matrix directed_coupling_matrix(const EffectiveHamiltonian& h, double resonance_floor_ghz) {
    const std::size_t n = h.mode_count();
    const std::vector<std::size_t> couplers = h.coupler_modes();
    const Matrix& g = h.coupling();
    Matrix directed = g;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            for (const std::size_t k : couplers) {
                if (k == i || k == j) continue;
                const double path = g(i, k) * g(k, j);
                if (path == 0.0) continue;
                const double detuning = h.mode(i).frequency_ghz - h.mode(k).frequency_ghz;
                if (std::abs(detuning) < resonance_floor_ghz) {
                    std::ostringstream msg;
                    msg << "near-resonant mediated path: modes (" << h.mode(i).node_id << ","
                        << h.mode(k).node_id << ") detuned by " << detuning << " GHz (floor "
                        << resonance_floor_ghz << ")";
                    throw NumericError(msg.str());
                }
                directed(i, j) += path / detuning;
            }
        }
    }
    return directed;
}

nlohmann::json to_json(const EffectiveHamiltonian& h) {
    nlohmann::json modes = nlohmann::json::array();
    for (const ModeParams& m : h.modes()) {
        modes.push_back({{"node_id", m.node_id},
                         {"kind", capnet::to_string(m.kind)},
                         {"frequency_ghz", m.frequency_ghz},
                         {"anharmonicity_ghz", m.anharmonicity_ghz},
                         {"charging_energy_ghz", m.charging_energy_ghz},
                         {"josephson_energy_ghz", m.josephson_energy_ghz}});
    }
    const auto dump = [](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    return nlohmann::json{{"modes", modes},
                          {"coupling_ghz", dump(h.coupling())},
                          {"directed_coupling_ghz", dump(h.directed_coupling())}};
}

} // namespace qlat::hamiltonian
