#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qlat::advisor {

enum class Decision {
    StructuralHotSpot,
    GeometrySensitive,
    Marginal,
    HighlyGeometrySensitive,
    Robust,
};

std::string to_string(Decision d);
/// Short routing/scheduling guidance attached to each label.
std::string decision_note(Decision d);

/// Configurable codification of the decision column; all values in percent
/// except the distortion threshold.
struct DecisionThresholds {
    double hotspot_ltd = 2.0;             // structural hot spot: ltd above this...
    double hotspot_instability = 1.0;     // ...and instability below this
    double high_instability = 20.0;       // highly geometry-sensitive above this
    double band_instability = 10.0;       // geometry-sensitive band lower edge
    double marginal_ltd = 0.8;            // inside the band: marginal needs both...
    double marginal_worst = 14.0;         // ...ltd and worst-case above these
    double alignment_tie_rel = 0.05;      // relative tie width for rank agreement
};

/// Label from (avg LTD, instability %, worst-case %). Total on all
/// nonnegative inputs and deterministic.
Decision decision_rules(double avg_ltd, double instability_pct, double worst_case_pct,
                        const DecisionThresholds& thresholds = {});

/// Compiler-facing record for one logical edge.
struct EdgeAssessment {
    std::string edge_id;
    double avg_ltd = 0.0;
    double avg_eps2q_pct = 0.0;
    double worst_case_infidelity_pct = 0.0;
    double instability_pct = 0.0;
    std::optional<bool> aligned;   // set by apply_alignment; needs >= 2 edges
    Decision decision = Decision::Robust;
};

/// Two-qubit error proxy: mean infidelity over the knob variants of the
/// standard medium smooth pulse, in percent. Throws ValidationError on an
/// empty input.
double eps2q_proxy(const std::vector<double>& variant_infidelities);

/// Infidelity grid: pulse id -> one value per knob variant.
using PulseGrid = std::map<std::string, std::vector<double>>;

/// Aggregate per-variant distortion and per-variant-per-pulse infidelity
/// into one edge record. `eps2q_pulse_id` names the grid column used for the
/// two-qubit error proxy. Throws ValidationError when the grid is ragged or
/// a needed column is missing.
EdgeAssessment assess_edge(const std::string& edge_id, const std::vector<double>& variant_ltds,
                           const PulseGrid& infidelities, const std::string& eps2q_pulse_id,
                           const DecisionThresholds& thresholds = {});

/// Tie-aware rank agreement between the error proxy and the worst-case
/// infidelity: an edge is aligned when no other edge orders strictly
/// opposite in the two metrics (values within `tie_rel` relative count as
/// tied). Fewer than 2 edges leaves `aligned` unset.
void apply_alignment(std::vector<EdgeAssessment>& assessments, double tie_rel = 0.05);

/// Aligned-column table mirroring the assessment report.
std::string assessments_to_csv(const std::vector<EdgeAssessment>& assessments);
nlohmann::json to_json(const std::vector<EdgeAssessment>& assessments);

} // namespace qlat::advisor
