#include "qlat/geomsweep.hpp"

#include "qlat/errors.hpp"
#include "qlat/hamiltonian.hpp"
#include "qlat/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qlat::geomsweep {

const char* const kCalibrationVersion = "qcq-cal-1";

namespace {

// ---------------------------------------------------------------------------
// Frozen calibration "qcq-cal-1" of the synthetic Q0-C-Q1 module.
//
// Fixed electrodes: qubit ground caps and junction energies below. The
// coupler island grows with island_height and (weakly) with coupler_width.
// Qubit-coupler mutuals scale with arm_length/gap, the right side carrying a
// small fabrication asymmetry. The direct qubit-qubit parasitic is a tiny
// baseline capacitance multiplied by resonance-like peaks along both sweep
// axes; sweeping through a peak drives the module from the intended topology
// (no parasitic edge) through threshold crossing (parasitic edge appears)
// into full collapse (the parasitic channel dominates and the intended
// couplings fall below threshold).
// ---------------------------------------------------------------------------
constexpr double kQubit0GroundFf = 100.0;
constexpr double kQubit1GroundFf = 106.0;
constexpr double kQubit0EjGhz = 13.0;
constexpr double kQubit1EjGhz = 14.2;
constexpr double kCouplerEjGhz = 30.0;

constexpr double kCouplerGroundBaseFf = 40.0;
constexpr double kCouplerGroundPerUm = 0.08;
constexpr double kCouplerGroundPerNm = 0.004;

constexpr double kQubitCouplerScaleFf = 0.13;   // times arm/gap
constexpr double kRightSideFactor = 0.92;

constexpr double kQubitQubitBaseFf = 0.007;
constexpr double kWidthPeakNm = 430.0;
constexpr double kWidthPeakSigmaNm = 11.0;
constexpr double kWidthPeakGain = 3.0e5;
constexpr double kHeightPeakUm = 150.0;
constexpr double kHeightPeakSigmaUm = 6.0;
constexpr double kHeightPeakGain = 3.0e6;
constexpr double kHeightShoulderUm = 250.0;
constexpr double kHeightShoulderSigmaUm = 25.0;
constexpr double kHeightShoulderGain = 400.0;

constexpr double kWidthBoxNm[2] = {400.0, 650.0};
constexpr double kHeightBoxUm[2] = {60.0, 300.0};
constexpr double kGapBoxUm[2] = {10.0, 60.0};
constexpr double kArmBoxUm[2] = {40.0, 200.0};

double gauss(double x, double center, double sigma) {
    const double d = (x - center) / sigma;
    return std::exp(-0.5 * d * d);
}

double width_shape(double width_nm) {
    return 1.0 + kWidthPeakGain * gauss(width_nm, kWidthPeakNm, kWidthPeakSigmaNm);
}

double height_shape(double height_um) {
    return 1.0 + kHeightPeakGain * gauss(height_um, kHeightPeakUm, kHeightPeakSigmaUm) +
           kHeightShoulderGain * gauss(height_um, kHeightShoulderUm, kHeightShoulderSigmaUm);
}

void check_box(const char* name, double v, const double box[2]) {
    if (v < box[0] || v > box[1]) {
        std::ostringstream msg;
        msg << name << " = " << v << " outside the model validity box [" << box[0] << ", "
            << box[1] << "]";
        throw ValidationError(msg.str());
    }
}

} // namespace

GeometryKnobs GeometryKnobs::from_json(const nlohmann::json& j) {
    GeometryKnobs k;
    try {
        if (j.contains("coupler_width_nm")) k.coupler_width_nm = j["coupler_width_nm"].get<double>();
        if (j.contains("island_height_um")) k.island_height_um = j["island_height_um"].get<double>();
        if (j.contains("coupler_qubit_gap_um")) {
            k.coupler_qubit_gap_um = j["coupler_qubit_gap_um"].get<double>();
        }
        if (j.contains("coupler_arm_length_um")) {
            k.coupler_arm_length_um = j["coupler_arm_length_um"].get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("knobs: ") + e.what());
    }
    return k;
}

nlohmann::json GeometryKnobs::to_json() const {
    return nlohmann::json{{"coupler_width_nm", coupler_width_nm},
                          {"island_height_um", island_height_um},
                          {"coupler_qubit_gap_um", coupler_qubit_gap_um},
                          {"coupler_arm_length_um", coupler_arm_length_um}};
}

capnet::CapacitanceNetwork synthetic_capacitance(const GeometryKnobs& knobs) {
    check_box("coupler_width_nm", knobs.coupler_width_nm, kWidthBoxNm);
    check_box("island_height_um", knobs.island_height_um, kHeightBoxUm);
    check_box("coupler_qubit_gap_um", knobs.coupler_qubit_gap_um, kGapBoxUm);
    check_box("coupler_arm_length_um", knobs.coupler_arm_length_um, kArmBoxUm);

    const GeometryKnobs base = GeometryKnobs::baseline();
    const double coupler_ground = kCouplerGroundBaseFf +
                                  kCouplerGroundPerUm * knobs.island_height_um +
                                  kCouplerGroundPerNm * (knobs.coupler_width_nm - base.coupler_width_nm);

    const double arm_over_gap = knobs.coupler_arm_length_um / knobs.coupler_qubit_gap_um;
    const double m01 = kQubitCouplerScaleFf * arm_over_gap;
    const double m12 = kRightSideFactor * m01;

    const double shape = (width_shape(knobs.coupler_width_nm) / width_shape(base.coupler_width_nm)) *
                         (height_shape(knobs.island_height_um) / height_shape(base.island_height_um));
    const double m02 = kQubitQubitBaseFf * shape;

    std::vector<capnet::ConductorNode> nodes{
        {0, capnet::NodeKind::Qubit, kQubit0GroundFf, kQubit0EjGhz},
        {1, capnet::NodeKind::Coupler, coupler_ground, kCouplerEjGhz},
        {2, capnet::NodeKind::Qubit, kQubit1GroundFf, kQubit1EjGhz},
    };
    std::map<std::pair<int, int>, double> mutual{
        {{0, 1}, m01},
        {{1, 2}, m12},
        {{0, 2}, m02},
    };
    return capnet::CapacitanceNetwork(std::move(nodes), std::move(mutual));
}

topology::InteractionGraph qcq_nominal_graph() {
    return topology::InteractionGraph::nominal(3, {{0, 1}, {1, 2}});
}

std::string to_string(SweepAxis axis) {
    return axis == SweepAxis::CouplerWidth ? "A_coupler_width" : "B_island_height";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "A" || s == "A_coupler_width" || s == "coupler_width") {
        return SweepAxis::CouplerWidth;
    }
    if (s == "B" || s == "B_island_height" || s == "island_height") {
        return SweepAxis::IslandHeight;
    }
    throw ValidationError("unknown sweep axis '" + s + "' (expected A or B)");
}

namespace {

struct PipelineResult {
    hamiltonian::EffectiveHamiltonian ham;
    topology::LTDReport ltd;
};

PipelineResult run_pipeline(const capnet::CapacitanceNetwork& net,
                            const topology::InteractionGraph& nominal, double tau_min) {
    const capnet::MaxwellMatrix c = capnet::to_maxwell_matrix(net);
    const capnet::ChargingEnergyMatrix ec = capnet::charging_energy_matrix(c);
    hamiltonian::EffectiveHamiltonian ham = hamiltonian::build_effective_hamiltonian(ec, net);
    const topology::CouplingExtraction ext = topology::extract_couplings(ham);
    const topology::PairMap normalized = topology::normalize_couplings(ext.magnitudes);
    const double anchor = topology::max_magnitude(ext.magnitudes);
    const topology::InteractionGraph physical = topology::reconstruct_physical_graph(
        normalized, tau_min, static_cast<int>(ham.mode_count()));
    topology::LTDReport report =
        topology::ltd_report(nominal, physical, topology::scale_directed(ext.directed, anchor));
    return PipelineResult{std::move(ham), std::move(report)};
}

} // namespace

std::vector<SweepRecord> run_sweep(const SweepOptions& opts) {
    double from = opts.from;
    double to = opts.to;
    const bool explicit_range = !(from == 0.0 && to == 0.0);
    if (!explicit_range) {
        if (opts.axis == SweepAxis::CouplerWidth) {
            from = 650.0;
            to = 400.0;
        } else {
            from = 60.0;
            to = 300.0;
        }
    }
    // Collapsed explicit ranges (from == to) are the self-reference case and
    // may run with 2 steps; a real sweep needs at least 3.
    const int min_steps = explicit_range && from == to ? 2 : 3;
    if (opts.steps < min_steps) {
        throw ValidationError("sweep needs at least " + std::to_string(min_steps) + " steps");
    }

    const topology::InteractionGraph nominal = qcq_nominal_graph();
    const capnet::CapacitanceNetwork ref_net = synthetic_capacitance(GeometryKnobs::baseline());
    const PipelineResult ref = run_pipeline(ref_net, nominal, opts.tau_min);
    const dynamics::DuffingModel ref_model = dynamics::build_duffing(ref.ham, opts.mode_dims);

    // Bench convention for the module: cross-resonance drives Q0 toward Q1,
    // coupler modulation drives the coupler at the qubit difference
    // frequency. Resolving against the reference freezes the drive for every
    // record in the sweep.
    std::vector<dynamics::PulseSpec> pulses =
        opts.pulses.empty() ? dynamics::full_pulse_library() : opts.pulses;
    for (dynamics::PulseSpec& p : pulses) {
        if (p.family == dynamics::PulseFamily::CouplerMod) {
            p.drive_node = 1;
            p.target_node = 2;
        } else {
            p.drive_node = 0;
            p.target_node = 2;
        }
        p = dynamics::resolve_pulse(p, ref_model);
    }
    const dynamics::State psi0 = dynamics::plus_state(ref_model, 0);

    std::vector<SweepRecord> records(static_cast<std::size_t>(opts.steps));
    parallel_for(records.size(), opts.jobs, [&](std::size_t i) {
        SweepRecord& rec = records[i];
        const double frac = opts.steps == 1
                                ? 0.0
                                : static_cast<double>(i) / static_cast<double>(opts.steps - 1);
        const double value = from + (to - from) * frac;
        rec.axis_value = value;
        rec.knobs = GeometryKnobs::baseline();
        if (opts.axis == SweepAxis::CouplerWidth) {
            rec.knobs.coupler_width_nm = value;
        } else {
            rec.knobs.island_height_um = value;
        }
        try {
            const capnet::CapacitanceNetwork net = synthetic_capacitance(rec.knobs);
            const PipelineResult step = run_pipeline(net, nominal, opts.tau_min);
            rec.ltd = step.ltd.ltd;
            rec.ltd_weighted = step.ltd.ltd_weighted;

            sensitivity::SIOptions si_opts;
            si_opts.tau_min = opts.tau_min;
            si_opts.delta = opts.delta;
            const sensitivity::SIReport si = sensitivity::si_report(net, nominal, si_opts);
            double q_sum = 0.0;
            double c_sum = 0.0;
            int q_count = 0;
            int c_count = 0;
            for (std::size_t k = 0; k < net.size(); ++k) {
                rec.si_total += si.si[k];
                if (net.node_at(k).kind == capnet::NodeKind::Coupler) {
                    c_sum += si.si[k];
                    ++c_count;
                } else if (net.node_at(k).kind == capnet::NodeKind::Qubit) {
                    q_sum += si.si[k];
                    ++q_count;
                }
            }
            rec.si_qubit = q_count ? q_sum / q_count : 0.0;
            rec.si_coupler = c_count ? c_sum / c_count : 0.0;

            for (const dynamics::PulseSpec& pulse : pulses) {
                const dynamics::FidelityResult fid = dynamics::relative_infidelity(
                    step.ham, ref.ham, pulse, psi0, opts.mode_dims);
                rec.infidelity[pulse.id()] = fid.relative_infidelity;
            }
        } catch (const Error& e) {
            rec.error = e.what();
        }
    });
    return records;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string sweep_to_csv(const std::vector<SweepRecord>& records) {
    std::vector<std::string> pulse_ids;
    for (const SweepRecord& rec : records) {
        for (const auto& [id, value] : rec.infidelity) {
            if (std::find(pulse_ids.begin(), pulse_ids.end(), id) == pulse_ids.end()) {
                pulse_ids.push_back(id);
            }
        }
    }
    std::sort(pulse_ids.begin(), pulse_ids.end());

    std::string out = "axis_value,ltd,ltd_w,si_total,si_qubit,si_coupler";
    for (const std::string& id : pulse_ids) out += ",inf_" + id;
    out += ",error\n";
    for (const SweepRecord& rec : records) {
        out += format_double(rec.axis_value);
        out += "," + format_double(rec.ltd);
        out += "," + format_double(rec.ltd_weighted);
        out += "," + format_double(rec.si_total);
        out += "," + format_double(rec.si_qubit);
        out += "," + format_double(rec.si_coupler);
        for (const std::string& id : pulse_ids) {
            const auto it = rec.infidelity.find(id);
            out += ",";
            if (it != rec.infidelity.end()) out += format_double(it->second);
        }
        std::string err = rec.error;
        std::replace(err.begin(), err.end(), ',', ';');   // keep the row parseable
        out += "," + err + "\n";
    }
    return out;
}

nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records) {
    nlohmann::json out = nlohmann::json::array();
    for (const SweepRecord& rec : records) {
        nlohmann::json rj{{"axis_value", rec.axis_value},
                          {"knobs", rec.knobs.to_json()},
                          {"ltd", rec.ltd},
                          {"ltd_weighted", rec.ltd_weighted},
                          {"si_total", rec.si_total},
                          {"si_qubit", rec.si_qubit},
                          {"si_coupler", rec.si_coupler},
                          {"infidelity", rec.infidelity}};
        if (!rec.error.empty()) rj["error"] = rec.error;
        out.push_back(rj);
    }
    return out;
}

double regime_mean_infidelity(const SweepRecord& record, dynamics::PulseRegime regime) {
    double sum = 0.0;
    int count = 0;
    for (const dynamics::PulseSpec& p : dynamics::pulse_library(regime)) {
        const auto it = record.infidelity.find(p.id());
        if (it == record.infidelity.end()) continue;
        sum += it->second;
        ++count;
    }
    if (count == 0) {
        throw ValidationError("record carries no infidelity for regime " +
                              dynamics::to_string(regime));
    }
    return sum / count;
}

namespace {

BucketBand make_band(const std::vector<std::pair<double, double>>& si_and_inf) {
    BucketBand band;
    band.count = si_and_inf.size();
    if (si_and_inf.empty()) return band;
    band.si_low = si_and_inf.front().first;
    band.si_high = si_and_inf.front().first;
    double sum = 0.0;
    for (const auto& [si, inf] : si_and_inf) {
        band.si_low = std::min(band.si_low, si);
        band.si_high = std::max(band.si_high, si);
        sum += inf;
    }
    band.mean_infidelity = sum / static_cast<double>(si_and_inf.size());
    double var = 0.0;
    for (const auto& [si, inf] : si_and_inf) {
        const double d = inf - band.mean_infidelity;
        var += d * d;
    }
    band.stddev_infidelity = std::sqrt(var / static_cast<double>(si_and_inf.size()));
    return band;
}

} // namespace

BucketStats si_buckets(const std::vector<SweepRecord>& records, dynamics::PulseRegime regime) {
    if (records.size() < 3) {
        throw ValidationError("si_buckets needs at least 3 records, got " +
                              std::to_string(records.size()));
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].si_total < records[b].si_total;
    });

    const std::size_t n = order.size();
    const std::size_t base = n / 3;
    const std::size_t extra = n % 3;
    // Sizes differ by at most one; remainders go to the lower bands first.
    const std::size_t n_low = base + (extra > 0 ? 1 : 0);
    const std::size_t n_mid = base + (extra > 1 ? 1 : 0);

    std::vector<std::pair<double, double>> low, mid, high;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const SweepRecord& rec = records[order[pos]];
        const std::pair<double, double> item{rec.si_total, regime_mean_infidelity(rec, regime)};
        if (pos < n_low) {
            low.push_back(item);
        } else if (pos < n_low + n_mid) {
            mid.push_back(item);
        } else {
            high.push_back(item);
        }
    }
    BucketStats stats;
    stats.regime = regime;
    stats.low = make_band(low);
    stats.mid = make_band(mid);
    stats.high = make_band(high);
    return stats;
}

RegressionResult sensitivity_regression(const std::vector<SweepRecord>& records,
                                        dynamics::PulseRegime regime) {
    if (records.size() < 4) {
        throw ValidationError("sensitivity_regression needs at least 4 records");
    }
    const std::size_t n = records.size();
    Matrix xtx(3, 3);
    std::vector<double> xty(3, 0.0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = regime_mean_infidelity(records[i], regime);
        const double row[3] = {1.0, records[i].si_qubit, records[i].si_coupler};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) xtx(a, b) += row[a] * row[b];
            xty[a] += row[a] * y[i];
        }
    }

    // Equilibrate to unit column norms so the rank check sees genuine
    // collinearity, not scale disparity between the features.
    double scale[3];
    for (int a = 0; a < 3; ++a) {
        scale[a] = std::sqrt(xtx(a, a));
        if (scale[a] == 0.0) {
            throw ValidationError("sensitivity_regression: design matrix is rank-deficient");
        }
    }
    Matrix gram(3, 3);
    std::vector<double> rhs(3);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) gram(a, b) = xtx(a, b) / (scale[a] * scale[b]);
        rhs[a] = xty[a] / scale[a];
    }
    LuDecomposition lu;
    try {
        lu = lu_factor(gram);
    } catch (const NumericError&) {
        throw ValidationError("sensitivity_regression: design matrix is rank-deficient");
    }
    double min_pivot = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) min_pivot = std::min(min_pivot, std::abs(lu.lu(a, a)));
    if (min_pivot < 1e-10) {
        throw ValidationError("sensitivity_regression: design matrix is rank-deficient");
    }

    std::vector<double> beta = lu.solve(rhs);
    for (int a = 0; a < 3; ++a) beta[a] /= scale[a];

    double mean_y = 0.0;
    for (const double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = beta[0] + beta[1] * records[i].si_qubit + beta[2] * records[i].si_coupler;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    RegressionResult result;
    result.regime = regime;
    result.intercept = beta[0];
    result.beta_qubit = beta[1];
    result.beta_coupler = beta[2];
    // A constant response fits exactly; report a perfect score rather than
    // the 0/0 ratio (ss_tot carries only summation dust there).
    double y_scale = 0.0;
    for (const double v : y) y_scale += v * v;
    if (ss_tot <= 1e-20 * std::max(y_scale, 1.0)) {
        result.r_squared = ss_res <= 1e-20 * std::max(y_scale, 1.0) ? 1.0 : 0.0;
    } else {
        result.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    }
    return result;
}

nlohmann::json to_json(const BucketStats& stats) {
    const auto band = [](const BucketBand& b) {
        return nlohmann::json{{"count", b.count},
                              {"si_low", b.si_low},
                              {"si_high", b.si_high},
                              {"mean_infidelity", b.mean_infidelity},
                              {"stddev_infidelity", b.stddev_infidelity}};
    };
    return nlohmann::json{{"regime", dynamics::to_string(stats.regime)},
                          {"low", band(stats.low)},
                          {"mid", band(stats.mid)},
                          {"high", band(stats.high)}};
}

nlohmann::json to_json(const RegressionResult& r) {
    return nlohmann::json{{"regime", dynamics::to_string(r.regime)},
                          {"beta_qubit", r.beta_qubit},
                          {"beta_coupler", r.beta_coupler},
                          {"intercept", r.intercept},
                          {"r_squared", r.r_squared}};
}

} // namespace qlat::geomsweep
