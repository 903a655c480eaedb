#pragma once

#include "qlat/capnet.hpp"
#include "qlat/dynamics.hpp"
#include "qlat/sensitivity.hpp"
#include "qlat/topology.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace qlat::geomsweep {

/// Version tag of the frozen synthetic-capacitance calibration.
extern const char* const kCalibrationVersion;

/// Design-level geometric knobs of the two-qubit coupler module, with the
/// documented validity boxes. Defaults are the box midpoints.
struct GeometryKnobs {
    double coupler_width_nm = 525.0;      // [400, 650]
    double island_height_um = 180.0;      // [60, 300]
    double coupler_qubit_gap_um = 35.0;   // [10, 60]
    double coupler_arm_length_um = 120.0; // [40, 200]

    static GeometryKnobs baseline() { return {}; }

    static GeometryKnobs from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Closed-form stand-in for field-solver extraction of a Q0-C-Q1 module
/// (node ids 0, 1, 2). Deterministic in the knobs. The direct qubit-qubit
/// parasitic carries resonance-like peaks along both sweep axes so the
/// sweeps traverse the low/mid/high distortion regimes.
/// Throws ValidationError when a knob leaves its validity box.
capnet::CapacitanceNetwork synthetic_capacitance(const GeometryKnobs& knobs);

/// Intended interaction pattern of the module: qubit-coupler edges only.
topology::InteractionGraph qcq_nominal_graph();

enum class SweepAxis { CouplerWidth, IslandHeight };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepOptions {
    SweepAxis axis = SweepAxis::CouplerWidth;
    int steps = 9;
    /// Explicit axis range; keep from == to == 0 for the documented default
    /// (width 650 -> 400 nm, height 60 -> 300 um).
    double from = 0.0;
    double to = 0.0;
    double tau_min = 0.02;
    double delta = 1e-3;
    int mode_dims = 3;
    int jobs = 1;
    /// Bench pulses; empty selects the full 12-pulse library.
    std::vector<dynamics::PulseSpec> pulses;
};

struct SweepRecord {
    GeometryKnobs knobs;
    double axis_value = 0.0;
    double ltd = 0.0;
    double ltd_weighted = 0.0;
    double si_total = 0.0;
    double si_qubit = 0.0;   // mean SI over qubit nodes
    double si_coupler = 0.0; // mean SI over coupler nodes
    std::map<std::string, double> infidelity;   // pulse id -> 1 - F_rel
    std::string error;   // nonempty when the pipeline failed at this step
};

/// Evaluate the full pipeline at each axis step against the baseline-knob
/// reference layout. Pulses are resolved once against the reference so every
/// record sees the identical drive. A failing step is recorded and skipped,
/// not fatal. Records are ordered along the axis.
std::vector<SweepRecord> run_sweep(const SweepOptions& opts);

/// Plot-ready table: axis_value, ltd, ltd_w, si_total, si_qubit, si_coupler,
/// then one inf_<pulse_id> column per bench pulse.
std::string sweep_to_csv(const std::vector<SweepRecord>& records);
nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records);

/// Mean infidelity of one record over a regime's bench pulses.
double regime_mean_infidelity(const SweepRecord& record, dynamics::PulseRegime regime);

struct BucketBand {
    std::size_t count = 0;
    double si_low = 0.0;    // smallest total SI in the band
    double si_high = 0.0;   // largest total SI in the band
    double mean_infidelity = 0.0;
    double stddev_infidelity = 0.0;
};

struct BucketStats {
    dynamics::PulseRegime regime = dynamics::PulseRegime::Short;
    BucketBand low, mid, high;
};

/// Split records into low/mid/high total-SI terciles (sizes differ by at
/// most one; ties keep input order) and report mean and population stddev of
/// the regime-mean infidelity per band. Throws ValidationError for fewer
/// than 3 records.
BucketStats si_buckets(const std::vector<SweepRecord>& records, dynamics::PulseRegime regime);

struct RegressionResult {
    dynamics::PulseRegime regime = dynamics::PulseRegime::Short;
    double beta_qubit = 0.0;
    double beta_coupler = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares of regime-mean infidelity on
/// [1, si_qubit, si_coupler]. Needs >= 4 records and a full-rank design;
/// throws ValidationError otherwise (collinearity included).
RegressionResult sensitivity_regression(const std::vector<SweepRecord>& records,
                                        dynamics::PulseRegime regime);

nlohmann::json to_json(const BucketStats& stats);
nlohmann::json to_json(const RegressionResult& r);

/// Shortest-round-trip decimal text for a double; keeps CSV output
/// byte-stable across runs and job counts.
std::string format_double(double v);

} // namespace qlat::geomsweep
