#pragma once

#include "qlat/hamiltonian.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace qlat::topology {

/// Unordered pair key, canonicalized lo < hi.
using PairKey = std::pair<int, int>;
/// Map over unordered mode pairs.
using PairMap = std::map<PairKey, double>;
/// Map over ordered (source, target) mode pairs.
using DirectedMap = std::map<std::pair<int, int>, double>;

PairKey make_pair_key(int a, int b);

/// Pairwise coupling magnitudes pulled out of an effective Hamiltonian.
/// `magnitudes` holds |g_ij| per unordered pair; `directed` keeps the
/// directed magnitudes |g_{i->j}| per orientation for asymmetry analysis.
/// Zero entries are dropped (they are not interaction candidates).
struct CouplingExtraction {
    PairMap magnitudes;
    DirectedMap directed;
};

CouplingExtraction extract_couplings(const hamiltonian::EffectiveHamiltonian& h);

/// Largest magnitude in the map (0 for empty).
double max_magnitude(const PairMap& g);

/// g~_ij = g_ij / max |g_ij|; throws NumericError when all entries are zero.
PairMap normalize_couplings(const PairMap& g);

/// Scale a directed map by a fixed anchor (shared with the pairwise map).
DirectedMap scale_directed(const DirectedMap& directed, double anchor);

/// Undirected weighted graph over mode indices. Nominal graphs carry
/// weight 1.0 on every edge; reconstructed graphs carry normalized couplings.
class InteractionGraph {
public:
    InteractionGraph(int node_count, PairMap edges);

    static InteractionGraph nominal(int node_count, const std::vector<PairKey>& edges);

    int node_count() const { return node_count_; }
    const PairMap& edges() const { return edges_; }
    std::set<PairKey> edge_set() const;
    bool has_edge(PairKey key) const { return edges_.count(key) > 0; }

    static InteractionGraph from_json(const nlohmann::json& j);
    static InteractionGraph load(const std::filesystem::path& path);

private:
    int node_count_ = 0;
    PairMap edges_;
};

/// Keep edges with normalized weight >= tau_min (ties kept).
/// tau_min must lie in (0, 1).
InteractionGraph reconstruct_physical_graph(const PairMap& normalized, double tau_min,
                                            int node_count);

struct AsymmetrySummary {
    double max = 0.0;
    double mean = 0.0;
    PairKey argmax{-1, -1};
};

struct LTDReport {
    InteractionGraph physical_graph;
    std::set<PairKey> parasitic_edges;   // E+ = E_phys \ E_nom
    std::set<PairKey> missing_edges;     // E- = E_nom \ E_phys
    PairMap asymmetry;                   // A_ij = |g~_ij - g~_ji|
    AsymmetrySummary asymmetry_summary;
    double ltd = 0.0;
    double ltd_weighted = 0.0;
};

/// Compare the reconstructed graph against the nominal design graph:
/// edge-set differences, the directional asymmetry profile, and the
/// distortion scalars ltd = (|E+| + |E-|) / |E_nom| and
/// ltd_weighted = (sum of parasitic weights + |E-|) / |E_nom|.
/// The directed map must be pre-normalized with the same anchor as the
/// physical graph weights. Throws ValidationError when |E_nom| = 0.
LTDReport ltd_report(const InteractionGraph& nominal, const InteractionGraph& physical,
                     const DirectedMap& directed_normalized);

nlohmann::json to_json(const LTDReport& report);

} // namespace qlat::topology
