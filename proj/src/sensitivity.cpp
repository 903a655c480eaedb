#include "qlat/sensitivity.hpp"

#include "qlat/errors.hpp"
#include "qlat/hamiltonian.hpp"
#include "qlat/parallel.hpp"

#include <json.hpp>

#include <cmath>

namespace qlat::sensitivity {

std::string to_string(PerturbationChannel c) {
    return c == PerturbationChannel::GroundCapacitance ? "ground_capacitance"
                                                       : "josephson_energy";
}

PerturbationChannel channel_from_string(const std::string& s) {
    if (s == "ground_capacitance") return PerturbationChannel::GroundCapacitance;
    if (s == "josephson_energy") return PerturbationChannel::JosephsonEnergy;
    throw ValidationError("unknown perturbation channel '" + s + "'");
}

capnet::CapacitanceNetwork perturb_network(const capnet::CapacitanceNetwork& net,
                                           const PerturbationSpec& spec) {
    if (!(spec.delta > 0.0 && spec.delta < 0.1)) {
        throw ValidationError("perturbation delta must lie in (0, 0.1), got " +
                              std::to_string(spec.delta));
    }
    const std::size_t idx = net.index_of(spec.node_id);
    std::vector<capnet::ConductorNode> nodes = net.nodes();
    capnet::ConductorNode& target = nodes[idx];
    switch (spec.channel) {
    case PerturbationChannel::GroundCapacitance:
        target.ground_cap_ff *= 1.0 + spec.delta;
        break;
    case PerturbationChannel::JosephsonEnergy:
        if (!target.ej_ghz) {
            throw ValidationError("node " + std::to_string(spec.node_id) +
                                  " has no junction, cannot perturb josephson_energy");
        }
        target.ej_ghz = *target.ej_ghz * (1.0 + spec.delta);
        break;
    }
    return capnet::CapacitanceNetwork(std::move(nodes), net.mutual_caps());
}

SIReport si_from_maps(const topology::PairMap& baseline_normalized,
                      const std::vector<topology::PairMap>& perturbed_normalized,
                      const std::set<topology::PairKey>& parasitic_edges, double delta) {
    if (delta <= 0.0) throw ValidationError("si_from_maps: delta must be positive");
    const std::size_t n = perturbed_normalized.size();
    SIReport report;
    report.si.assign(n, 0.0);
    report.si_max.assign(n, 0.0);
    report.deviations.resize(n);
    report.edge_sensitivities.resize(n);

    for (std::size_t k = 0; k < n; ++k) {
        const topology::PairMap& perturbed = perturbed_normalized[k];
        topology::PairMap& dev = report.deviations[k];
        for (const auto& [key, value] : baseline_normalized) dev[key] = -value;
        for (const auto& [key, value] : perturbed) dev[key] += value;
        for (auto& [key, value] : dev) {
            report.si_max[k] = std::max(report.si_max[k], std::abs(value) / delta);
        }
        for (const topology::PairKey& edge : parasitic_edges) {
            const auto it = dev.find(edge);
            const double s = it == dev.end() ? 0.0 : std::abs(it->second);
            report.edge_sensitivities[k][edge] = s;
            report.si[k] += s;
        }
    }
    return report;
}

SIReport si_report(const capnet::CapacitanceNetwork& net,
                   const topology::InteractionGraph& nominal, const SIOptions& opts) {
    const capnet::MaxwellMatrix c = capnet::to_maxwell_matrix(net);
    const capnet::ChargingEnergyMatrix ec = capnet::charging_energy_matrix(c);
    const hamiltonian::EffectiveHamiltonian base = hamiltonian::build_effective_hamiltonian(ec, net);
    const topology::CouplingExtraction extraction = topology::extract_couplings(base);

    const double anchor = topology::max_magnitude(extraction.magnitudes);
    if (anchor == 0.0) {
        throw NumericError("si_report: baseline couplings are all zero, no scale");
    }
    topology::PairMap baseline_norm;
    for (const auto& [key, value] : extraction.magnitudes) baseline_norm[key] = value / anchor;

    const topology::InteractionGraph physical =
        topology::reconstruct_physical_graph(baseline_norm, opts.tau_min,
                                             static_cast<int>(base.mode_count()));
    std::set<topology::PairKey> parasitic;
    for (const auto& [key, w] : physical.edges()) {
        if (!nominal.has_edge(key)) parasitic.insert(key);
    }

    const std::size_t n = net.size();
    std::vector<topology::PairMap> perturbed_norm(n);
    parallel_for(n, opts.jobs, [&](std::size_t k) {
        const capnet::ConductorNode& node = net.node_at(k);
        if (opts.channel == PerturbationChannel::JosephsonEnergy && !node.ej_ghz) {
            perturbed_norm[k] = baseline_norm;   // no such parameter: zero deviations
            return;
        }
        const PerturbationSpec spec{node.id, opts.delta, opts.channel};
        const capnet::CapacitanceNetwork pnet = perturb_network(net, spec);
        const capnet::MaxwellMatrix pc = capnet::to_maxwell_matrix(pnet);
        const capnet::ChargingEnergyMatrix pec = capnet::charging_energy_matrix(pc);
        const hamiltonian::EffectiveHamiltonian ph =
            hamiltonian::build_effective_hamiltonian(pec, pnet);
        // Same scale as the baseline, never the perturbed map's own max.
        for (const auto& [key, value] : topology::extract_couplings(ph).magnitudes) {
            perturbed_norm[k][key] = value / anchor;
        }
    });

    return si_from_maps(baseline_norm, perturbed_norm, parasitic, opts.delta);
}

nlohmann::json to_json(const SIReport& report) {
    nlohmann::json deviations = nlohmann::json::array();
    for (std::size_t k = 0; k < report.deviations.size(); ++k) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [key, value] : report.deviations[k]) {
            if (std::abs(value) <= 1e-12) continue;   // sparse dump
            entries.push_back({{"edge", {key.first, key.second}}, {"delta", value}});
        }
        deviations.push_back(entries);
    }
    nlohmann::json sens = nlohmann::json::array();
    for (std::size_t k = 0; k < report.edge_sensitivities.size(); ++k) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [key, value] : report.edge_sensitivities[k]) {
            entries.push_back({{"edge", {key.first, key.second}}, {"s", value}});
        }
        sens.push_back(entries);
    }
    return nlohmann::json{{"si", report.si},
                          {"si_max", report.si_max},
                          {"deviations", deviations},
                          {"edge_sensitivities", sens}};
}

} // namespace qlat::sensitivity
