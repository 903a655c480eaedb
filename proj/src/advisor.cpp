#include "qlat/advisor.hpp"

#include "qlat/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace qlat::advisor {

std::string to_string(Decision d) {
    switch (d) {
    case Decision::StructuralHotSpot: return "structural_hot_spot";
    case Decision::GeometrySensitive: return "geometry_sensitive";
    case Decision::Marginal: return "marginal";
    case Decision::HighlyGeometrySensitive: return "highly_geometry_sensitive";
    case Decision::Robust: return "robust";
    }
    return "unknown";
}

std::string decision_note(Decision d) {
    switch (d) {
    case Decision::StructuralHotSpot: return "avoid entangling use";
    case Decision::GeometrySensitive: return "avoid long-lived logical paths";
    case Decision::Marginal: return "use only under routing pressure";
    case Decision::HighlyGeometrySensitive: return "restrict parallel schedules";
    case Decision::Robust: return "unrestricted use";
    }
    return "";
}

Decision decision_rules(double avg_ltd, double instability_pct, double worst_case_pct,
                        const DecisionThresholds& t) {
    if (avg_ltd < 0.0 || instability_pct < 0.0 || worst_case_pct < 0.0) {
        throw ValidationError("decision_rules: inputs must be nonnegative");
    }
    if (avg_ltd > t.hotspot_ltd && instability_pct < t.hotspot_instability) {
        return Decision::StructuralHotSpot;
    }
    if (instability_pct > t.high_instability) {
        return Decision::HighlyGeometrySensitive;
    }
    if (instability_pct > t.band_instability) {
        if (avg_ltd > t.marginal_ltd && worst_case_pct > t.marginal_worst) {
            return Decision::Marginal;
        }
        return Decision::GeometrySensitive;
    }
    return Decision::Robust;
}

double eps2q_proxy(const std::vector<double>& variant_infidelities) {
    if (variant_infidelities.empty()) {
        throw ValidationError("eps2q_proxy: no variant results to aggregate");
    }
    double sum = 0.0;
    for (const double v : variant_infidelities) sum += v;
    return 100.0 * sum / static_cast<double>(variant_infidelities.size());
}

EdgeAssessment assess_edge(const std::string& edge_id, const std::vector<double>& variant_ltds,
                           const PulseGrid& infidelities, const std::string& eps2q_pulse_id,
                           const DecisionThresholds& thresholds) {
    if (variant_ltds.empty()) {
        throw ValidationError("assess_edge(" + edge_id + "): no knob variants");
    }
    if (infidelities.empty()) {
        throw ValidationError("assess_edge(" + edge_id + "): no pulse results");
    }
    std::string gaps;
    for (const auto& [pulse, values] : infidelities) {
        if (values.size() != variant_ltds.size()) {
            gaps += (gaps.empty() ? "" : ", ") + pulse + " has " +
                    std::to_string(values.size()) + "/" + std::to_string(variant_ltds.size()) +
                    " variants";
        }
    }
    if (!gaps.empty()) {
        throw ValidationError("assess_edge(" + edge_id + "): incomplete variant/pulse grid: " +
                              gaps);
    }
    const auto eps_col = infidelities.find(eps2q_pulse_id);
    if (eps_col == infidelities.end()) {
        throw ValidationError("assess_edge(" + edge_id + "): missing error-proxy pulse column '" +
                              eps2q_pulse_id + "'");
    }

    EdgeAssessment out;
    out.edge_id = edge_id;
    double ltd_sum = 0.0;
    for (const double v : variant_ltds) ltd_sum += v;
    out.avg_ltd = ltd_sum / static_cast<double>(variant_ltds.size());
    out.avg_eps2q_pct = eps2q_proxy(eps_col->second);

    double worst = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [pulse, values] : infidelities) {
        for (const double v : values) {
            worst = std::max(worst, v);
            best = std::min(best, v);
        }
    }
    out.worst_case_infidelity_pct = 100.0 * worst;
    out.instability_pct = 100.0 * (worst - best);
    out.decision = decision_rules(out.avg_ltd, out.instability_pct,
                                  out.worst_case_infidelity_pct, thresholds);
    return out;
}

namespace {

bool tied(double a, double b, double tie_rel) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tie_rel * scale;
}

} // namespace

void apply_alignment(std::vector<EdgeAssessment>& assessments, double tie_rel) {
    if (assessments.size() < 2) {
        for (EdgeAssessment& a : assessments) a.aligned.reset();
        return;
    }
    for (std::size_t i = 0; i < assessments.size(); ++i) {
        bool aligned = true;
        for (std::size_t j = 0; j < assessments.size() && aligned; ++j) {
            if (i == j) continue;
            const EdgeAssessment& a = assessments[i];
            const EdgeAssessment& b = assessments[j];
            if (tied(a.avg_eps2q_pct, b.avg_eps2q_pct, tie_rel) ||
                tied(a.worst_case_infidelity_pct, b.worst_case_infidelity_pct, tie_rel)) {
                continue;   // a tie in either metric excuses the pair
            }
            const bool eps_less = a.avg_eps2q_pct < b.avg_eps2q_pct;
            const bool worst_less = a.worst_case_infidelity_pct < b.worst_case_infidelity_pct;
            if (eps_less != worst_less) aligned = false;
        }
        assessments[i].aligned = aligned;
    }
}

std::string assessments_to_csv(const std::vector<EdgeAssessment>& assessments) {
    std::string out =
        "edge,avg_ltd,avg_eps2q_pct,worst_case_infidelity_pct,instability_pct,aligned,decision\n";
    char buf[64];
    for (const EdgeAssessment& a : assessments) {
        out += a.edge_id;
        std::snprintf(buf, sizeof(buf), ",%.3f,%.2f,%.2f,%.2f", a.avg_ltd, a.avg_eps2q_pct,
                      a.worst_case_infidelity_pct, a.instability_pct);
        out += buf;
        out += ",";
        out += a.aligned ? (*a.aligned ? "yes" : "no") : "";
        out += "," + to_string(a.decision) + "\n";
    }
    return out;
}

nlohmann::json to_json(const std::vector<EdgeAssessment>& assessments) {
    nlohmann::json out = nlohmann::json::array();
    for (const EdgeAssessment& a : assessments) {
        nlohmann::json aj{{"edge_id", a.edge_id},
                          {"avg_ltd", a.avg_ltd},
                          {"avg_eps2q_pct", a.avg_eps2q_pct},
                          {"worst_case_infidelity_pct", a.worst_case_infidelity_pct},
                          {"instability_pct", a.instability_pct},
                          {"decision", to_string(a.decision)},
                          {"note", decision_note(a.decision)}};
        if (a.aligned) {
            aj["aligned"] = *a.aligned;
        } else {
            aj["aligned"] = nullptr;
        }
        out.push_back(aj);
    }
    return out;
}

} // namespace qlat::advisor
