#pragma once

#include "qlat/capnet.hpp"
#include "qlat/topology.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <vector>

namespace qlat::sensitivity {

enum class PerturbationChannel { GroundCapacitance, JosephsonEnergy };

std::string to_string(PerturbationChannel c);
PerturbationChannel channel_from_string(const std::string& s);

/// One-node relative perturbation of a physical source parameter.
struct PerturbationSpec {
    int node_id = 0;
    double delta = 1e-3;   // relative magnitude, guarded to (0, 0.1)
    PerturbationChannel channel = PerturbationChannel::GroundCapacitance;
};

/// Copy of the network with one parameter scaled by (1 + delta); everything
/// else is bit-identical. Throws ValidationError when delta is outside the
/// perturbative guard or the channel parameter is absent on that node.
capnet::CapacitanceNetwork perturb_network(const capnet::CapacitanceNetwork& net,
                                           const PerturbationSpec& spec);

/// Per-node sensitivity aggregates. `si` is the sum of per-edge sensitivities
/// over parasitic edges; `si_max` is the max-ratio variant over all pairs,
/// max_ij |dg~_ij| / delta, reported alongside. Index order = network node
/// order.
struct SIReport {
    std::vector<double> si;
    std::vector<double> si_max;
    std::vector<topology::PairMap> deviations;                        // per node: all pairs
    std::vector<std::map<topology::PairKey, double>> edge_sensitivities;  // per node: parasitic
};

/// Assemble the report from already-normalized coupling maps: deviations
/// dg~_ij(k) = g~_ij(k) - g~_ij over the union of pairs, per-edge
/// sensitivities |dg~| restricted to the parasitic set, and both SI variants.
/// Both map families must share the baseline normalization anchor.
SIReport si_from_maps(const topology::PairMap& baseline_normalized,
                      const std::vector<topology::PairMap>& perturbed_normalized,
                      const std::set<topology::PairKey>& parasitic_edges, double delta);

struct SIOptions {
    double tau_min = 0.02;
    double delta = 1e-3;
    PerturbationChannel channel = PerturbationChannel::GroundCapacitance;
    int jobs = 1;
};

/// Full pipeline: baseline couplings and parasitic set from the network and
/// the nominal graph, then one perturbed rebuild per node. Perturbed
/// couplings are normalized with the baseline anchor, not their own max.
/// Nodes that lack the chosen channel parameter contribute zero rows.
/// An empty parasitic set yields an all-zero SI vector (not an error).
SIReport si_report(const capnet::CapacitanceNetwork& net,
                   const topology::InteractionGraph& nominal, const SIOptions& opts = {});

nlohmann::json to_json(const SIReport& report);

} // namespace qlat::sensitivity
