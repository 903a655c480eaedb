#include "qlat/dynamics.hpp"

#include "qlat/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace qlat::dynamics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Bench amplitudes (GHz) and the flattop ramp fraction of the duration.
constexpr double kCrAmplitudeGhz = 0.04;
constexpr double kCouplerModAmplitudeGhz = 0.06;
constexpr double kFlattopRiseFraction = 0.15;

std::string format_ns(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace

std::string to_string(PulseFamily f) {
    switch (f) {
    case PulseFamily::CrSquare: return "cr_square";
    case PulseFamily::CrGaussianFlattop: return "cr_gaussian_flattop";
    case PulseFamily::CouplerMod: return "coupler_mod";
    }
    return "unknown";
}

std::string to_string(PulseRegime r) {
    switch (r) {
    case PulseRegime::Short: return "short";
    case PulseRegime::Medium: return "medium";
    case PulseRegime::Long: return "long";
    case PulseRegime::Overdrive: return "overdrive";
    }
    return "unknown";
}

PulseFamily pulse_family_from_string(const std::string& s) {
    if (s == "cr_square") return PulseFamily::CrSquare;
    if (s == "cr_gaussian_flattop") return PulseFamily::CrGaussianFlattop;
    if (s == "coupler_mod") return PulseFamily::CouplerMod;
    throw ValidationError("unknown pulse family '" + s + "'");
}

PulseRegime pulse_regime_from_string(const std::string& s) {
    if (s == "short") return PulseRegime::Short;
    if (s == "medium") return PulseRegime::Medium;
    if (s == "long") return PulseRegime::Long;
    if (s == "overdrive") return PulseRegime::Overdrive;
    throw ValidationError("unknown pulse regime '" + s + "'");
}

std::pair<double, double> regime_band_ns(PulseRegime r) {
    switch (r) {
    case PulseRegime::Short: return {20.0, 30.0};
    case PulseRegime::Medium: return {40.0, 60.0};
    case PulseRegime::Long: return {80.0, 120.0};
    case PulseRegime::Overdrive: return {150.0, 220.0};
    }
    return {0.0, 0.0};
}

std::string PulseSpec::id() const {
    return to_string(family) + "@" + format_ns(duration_ns) + "ns";
}

void PulseSpec::validate() const {
    const auto [lo, hi] = regime_band_ns(regime);
    if (duration_ns < lo || duration_ns > hi) {
        throw ValidationError("pulse duration " + format_ns(duration_ns) + " ns outside the " +
                              to_string(regime) + " band [" + format_ns(lo) + ", " +
                              format_ns(hi) + "]");
    }
    // Amplitude 0 is the idle pulse used by drift-only runs.
    if (amplitude_ghz < 0.0) throw ValidationError("pulse amplitude must be >= 0");
    if (rise_time_ns < 0.0 || 2.0 * rise_time_ns > duration_ns) {
        throw ValidationError("pulse ramps overlap: 2 * rise_time > duration");
    }
    if (carrier_ghz < 0.0) throw ValidationError("carrier frequency must be >= 0");
}

PulseSpec PulseSpec::from_json(const nlohmann::json& j) {
    PulseSpec p;
    try {
        p.family = pulse_family_from_string(j.at("family").get<std::string>());
        p.regime = pulse_regime_from_string(j.at("regime").get<std::string>());
        p.duration_ns = j.at("duration_ns").get<double>();
        p.amplitude_ghz = j.at("amplitude_ghz").get<double>();
        if (j.contains("drive_node")) p.drive_node = j["drive_node"].get<int>();
        if (j.contains("target_node")) p.target_node = j["target_node"].get<int>();
        if (j.contains("carrier_ghz")) p.carrier_ghz = j["carrier_ghz"].get<double>();
        if (j.contains("rise_time_ns")) p.rise_time_ns = j["rise_time_ns"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("pulse file: ") + e.what());
    }
    p.validate();
    return p;
}

PulseSpec PulseSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open pulse file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json PulseSpec::to_json() const {
    return nlohmann::json{{"family", to_string(family)},
                          {"regime", to_string(regime)},
                          {"duration_ns", duration_ns},
                          {"amplitude_ghz", amplitude_ghz},
                          {"drive_node", drive_node},
                          {"target_node", target_node},
                          {"carrier_ghz", carrier_ghz},
                          {"rise_time_ns", rise_time_ns}};
}

std::size_t DuffingModel::dimension() const {
    std::size_t dim = 1;
    for (std::size_t i = 0; i < mode_count(); ++i) dim *= static_cast<std::size_t>(mode_dims);
    return dim;
}

int DuffingModel::occupation(std::size_t state, std::size_t mode) const {
    std::size_t stride = 1;
    for (std::size_t i = mode + 1; i < mode_count(); ++i) {
        stride *= static_cast<std::size_t>(mode_dims);
    }
    return static_cast<int>((state / stride) % static_cast<std::size_t>(mode_dims));
}

std::vector<double> DuffingModel::drift_diagonal_ghz() const {
    const std::size_t dim = dimension();
    std::vector<double> diag(dim, 0.0);
    for (std::size_t a = 0; a < dim; ++a) {
        double e = 0.0;
        for (std::size_t m = 0; m < mode_count(); ++m) {
            const double n = occupation(a, m);
            e += frequency_ghz[m] * n + 0.5 * anharmonicity_ghz[m] * n * (n - 1.0);
        }
        diag[a] = e;
    }
    return diag;
}

namespace {

struct SparseTerm {
    std::uint32_t row;
    std::uint32_t col;
    double value;
};

std::size_t mode_stride(const DuffingModel& model, std::size_t mode) {
    std::size_t stride = 1;
    for (std::size_t i = mode + 1; i < model.mode_count(); ++i) {
        stride *= static_cast<std::size_t>(model.mode_dims);
    }
    return stride;
}

// a_i^dag a_j terms for every coupled pair, both orientations, amplitude in
// angular units (rad/ns).
std::vector<SparseTerm> hopping_terms(const DuffingModel& model) {
    std::vector<SparseTerm> terms;
    const std::size_t dim = model.dimension();
    const int d = model.mode_dims;
    for (std::size_t i = 0; i < model.mode_count(); ++i) {
        for (std::size_t j = i + 1; j < model.mode_count(); ++j) {
            const double g = model.coupling_ghz.empty() ? 0.0 : model.coupling_ghz(i, j);
            if (g == 0.0) continue;
            const double w = kTwoPi * g;
            const std::size_t si = mode_stride(model, i);
            const std::size_t sj = mode_stride(model, j);
            for (std::size_t a = 0; a < dim; ++a) {
                const int ni = model.occupation(a, i);
                const int nj = model.occupation(a, j);
                if (ni + 1 >= d || nj < 1) continue;
                const std::size_t b = a + si - sj;   // (ni+1, nj-1)
                const double elem = w * std::sqrt(static_cast<double>(ni + 1) *
                                                  static_cast<double>(nj));
                terms.push_back({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(a),
                                 elem});
                terms.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                                 elem});
            }
        }
    }
    return terms;
}

// (a_m + a_m^dag) with unit amplitude; the angular drive strength multiplies
// at evaluation time.
std::vector<SparseTerm> drive_terms(const DuffingModel& model, std::size_t mode) {
    std::vector<SparseTerm> terms;
    const std::size_t dim = model.dimension();
    const std::size_t s = mode_stride(model, mode);
    for (std::size_t a = 0; a < dim; ++a) {
        const int n = model.occupation(a, mode);
        if (n < 1) continue;
        const std::size_t b = a - s;   // annihilation target
        const double elem = std::sqrt(static_cast<double>(n));
        terms.push_back({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(a), elem});
        terms.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), elem});
    }
    return terms;
}

double envelope(const PulseSpec& pulse, double t) {
    if (t < 0.0 || t > pulse.duration_ns) return 0.0;
    if (pulse.family != PulseFamily::CrGaussianFlattop || pulse.rise_time_ns <= 0.0) return 1.0;
    const double r = pulse.rise_time_ns;
    const double sigma = r / 2.5;
    if (t < r) {
        const double x = t - r;
        return std::exp(-x * x / (2.0 * sigma * sigma));
    }
    if (t > pulse.duration_ns - r) {
        const double x = t - (pulse.duration_ns - r);
        return std::exp(-x * x / (2.0 * sigma * sigma));
    }
    return 1.0;
}

} // namespace

Matrix DuffingModel::drift_dense_ghz() const {
    const std::size_t dim = dimension();
    Matrix h(dim, dim);
    const std::vector<double> diag = drift_diagonal_ghz();
    for (std::size_t a = 0; a < dim; ++a) h(a, a) = diag[a];
    for (const SparseTerm& t : hopping_terms(*this)) {
        h(t.row, t.col) += t.value / kTwoPi;
    }
    return h;
}

DuffingModel build_duffing(const hamiltonian::EffectiveHamiltonian& h, int mode_dims) {
    if (mode_dims < 2) throw ValidationError("mode_dims must be >= 2");
    DuffingModel model;
    model.mode_dims = mode_dims;
    for (const hamiltonian::ModeParams& m : h.modes()) {
        model.frequency_ghz.push_back(m.frequency_ghz);
        model.anharmonicity_ghz.push_back(m.anharmonicity_ghz);
    }
    model.coupling_ghz = h.coupling();

    double dim = 1.0;
    for (std::size_t i = 0; i < model.mode_count(); ++i) dim *= mode_dims;
    if (dim > 4096.0) {
        throw CapacityError("Hilbert dimension " + std::to_string(dim) +
                            " exceeds the 4096 capacity guard");
    }
    return model;
}

State ground_state(const DuffingModel& model) {
    State psi(model.dimension(), {0.0, 0.0});
    psi[0] = {1.0, 0.0};
    return psi;
}

State plus_state(const DuffingModel& model, int mode) {
    if (mode < 0 || static_cast<std::size_t>(mode) >= model.mode_count()) {
        throw ValidationError("plus_state: mode index out of range");
    }
    State psi(model.dimension(), {0.0, 0.0});
    const double amp = 1.0 / std::numbers::sqrt2;
    psi[0] = {amp, 0.0};
    psi[mode_stride(model, static_cast<std::size_t>(mode))] = {amp, 0.0};
    return psi;
}

double state_norm(const State& psi) {
    double s = 0.0;
    for (const std::complex<double>& a : psi) s += std::norm(a);
    return std::sqrt(s);
}

double leakage(const DuffingModel& model, const State& psi) {
    double outside = 0.0;
    for (std::size_t a = 0; a < psi.size(); ++a) {
        for (std::size_t m = 0; m < model.mode_count(); ++m) {
            if (model.occupation(a, m) > 1) {
                outside += std::norm(psi[a]);
                break;
            }
        }
    }
    return outside;
}

PulseSpec resolve_pulse(PulseSpec pulse, const DuffingModel& model) {
    const std::size_t n = model.mode_count();
    if (pulse.drive_node < 0 || static_cast<std::size_t>(pulse.drive_node) >= n ||
        pulse.target_node < 0 || static_cast<std::size_t>(pulse.target_node) >= n) {
        throw ValidationError("pulse drive/target mode index out of range");
    }
    if (pulse.carrier_ghz > 0.0) return pulse;
    if (pulse.family == PulseFamily::CouplerMod) {
        // Parametric modulation at the difference frequency of the modes the
        // coupler joins: the target and the lowest other non-drive mode.
        int partner = -1;
        for (std::size_t m = 0; m < n; ++m) {
            const int mi = static_cast<int>(m);
            if (mi != pulse.drive_node && mi != pulse.target_node) {
                partner = mi;
                break;
            }
        }
        if (partner < 0) partner = pulse.drive_node;
        pulse.carrier_ghz = std::abs(model.frequency_ghz[pulse.target_node] -
                                     model.frequency_ghz[partner]);
    } else {
        pulse.carrier_ghz = model.frequency_ghz[pulse.target_node];
    }
    return pulse;
}

State evolve(const DuffingModel& model, const PulseSpec& pulse, const State& psi0,
             const EvolveOptions& opts) {
    pulse.validate();
    const std::size_t dim = model.dimension();
    if (psi0.size() != dim) {
        throw ValidationError("initial state dimension does not match the model");
    }
    if (std::abs(state_norm(psi0) - 1.0) > 1e-9) {
        throw ValidationError("initial state is not normalized");
    }
    PulseSpec drive = resolve_pulse(pulse, model);
    if (drive.amplitude_ghz > 0.0 && drive.carrier_ghz == 0.0) {
        throw ValidationError("driven pulse needs a carrier frequency");
    }

    const std::vector<double> diag_ghz = model.drift_diagonal_ghz();
    std::vector<double> energy(dim);   // angular, rad/ns
    for (std::size_t a = 0; a < dim; ++a) energy[a] = kTwoPi * diag_ghz[a];

    const std::vector<SparseTerm> hop = hopping_terms(model);
    const std::vector<SparseTerm> drv =
        drive_terms(model, static_cast<std::size_t>(drive.drive_node));

    // Fastest phase the integrator has to resolve: carrier plus the largest
    // transition frequency across coupled matrix elements.
    double max_gap_ghz = 0.0;
    for (const SparseTerm& t : hop) {
        max_gap_ghz = std::max(max_gap_ghz, std::abs(diag_ghz[t.row] - diag_ghz[t.col]));
    }
    if (drive.amplitude_ghz > 0.0) {
        for (const SparseTerm& t : drv) {
            max_gap_ghz = std::max(max_gap_ghz, std::abs(diag_ghz[t.row] - diag_ghz[t.col]));
        }
    }
    const double f_max = std::max(1.0, max_gap_ghz + drive.carrier_ghz);
    const double dt = opts.dt_ns > 0.0 ? opts.dt_ns : 1.0 / (50.0 * f_max);

    const double duration = drive.duration_ns;
    const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                           std::ceil(duration / dt)));
    if (steps > 200'000'000) {
        throw NumericError("evolve: step count explodes; increase dt");
    }
    const double h = duration / static_cast<double>(steps);

    const double drive_angular = kTwoPi * drive.amplitude_ghz;
    const auto drive_value = [&](double t) {
        if (drive.amplitude_ghz == 0.0) return 0.0;
        return drive_angular * envelope(drive, t) * std::cos(kTwoPi * drive.carrier_ghz * t);
    };

    // Interaction picture of the diagonal drift: psi = P(t) phi with
    // P_a = exp(-i E_a t), dphi/dt = -i conj(P) V P phi.
    State phi = psi0;
    State phase(dim), rot(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        phase[a] = {1.0, 0.0};
        rot[a] = std::polar(1.0, -energy[a] * h * 0.5);
    }

    State u(dim), v(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    State phase_half(dim), phase_full(dim);

    const auto rhs = [&](const State& x, const State& ph, double s, State& out) {
        for (std::size_t a = 0; a < dim; ++a) u[a] = ph[a] * x[a];
        std::fill(v.begin(), v.end(), std::complex<double>{0.0, 0.0});
        for (const SparseTerm& t : hop) v[t.row] += t.value * u[t.col];
        if (s != 0.0) {
            for (const SparseTerm& t : drv) v[t.row] += s * t.value * u[t.col];
        }
        for (std::size_t a = 0; a < dim; ++a) {
            const std::complex<double> w = std::conj(ph[a]) * v[a];
            out[a] = {w.imag(), -w.real()};   // multiply by -i
        }
    };

    for (std::size_t step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * h;
        const double s0 = drive_value(t);
        const double s1 = drive_value(t + 0.5 * h);
        const double s2 = drive_value(t + h);

        for (std::size_t a = 0; a < dim; ++a) phase_half[a] = phase[a] * rot[a];
        for (std::size_t a = 0; a < dim; ++a) phase_full[a] = phase_half[a] * rot[a];

        rhs(phi, phase, s0, k1);
        for (std::size_t a = 0; a < dim; ++a) tmp[a] = phi[a] + 0.5 * h * k1[a];
        rhs(tmp, phase_half, s1, k2);
        for (std::size_t a = 0; a < dim; ++a) tmp[a] = phi[a] + 0.5 * h * k2[a];
        rhs(tmp, phase_half, s1, k3);
        for (std::size_t a = 0; a < dim; ++a) tmp[a] = phi[a] + h * k3[a];
        rhs(tmp, phase_full, s2, k4);

        const double w = h / 6.0;
        for (std::size_t a = 0; a < dim; ++a) {
            phi[a] += w * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
        phase.swap(phase_full);

        if ((step & 0xfff) == 0xfff) {
            for (std::size_t a = 0; a < dim; ++a) phase[a] /= std::abs(phase[a]);
        }
    }

    // Exact final drift phase, free of the incremental rotator round-off.
    State psi(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        psi[a] = std::polar(1.0, -energy[a] * duration) * phi[a];
    }

    const double norm_err = std::abs(state_norm(psi) - 1.0);
    if (norm_err > 1e-6) {
        throw NumericError("evolve: norm drifted by " + std::to_string(norm_err) +
                           "; use a smaller dt");
    }
    return psi;
}

FidelityResult relative_infidelity(const hamiltonian::EffectiveHamiltonian& layout,
                                   const hamiltonian::EffectiveHamiltonian& reference,
                                   const PulseSpec& pulse, const State& psi0, int mode_dims,
                                   const EvolveOptions& opts) {
    if (layout.mode_count() != reference.mode_count()) {
        throw ValidationError("relative_infidelity: mode counts differ, layouts not comparable");
    }
    const DuffingModel layout_model = build_duffing(layout, mode_dims);
    const DuffingModel ref_model = build_duffing(reference, mode_dims);
    const PulseSpec shared = resolve_pulse(pulse, ref_model);

    const State psi_layout = evolve(layout_model, shared, psi0, opts);
    const State psi_ref = evolve(ref_model, shared, psi0, opts);

    std::complex<double> overlap{0.0, 0.0};
    double nl = 0.0;
    double nr = 0.0;
    for (std::size_t a = 0; a < psi_layout.size(); ++a) {
        overlap += std::conj(psi_ref[a]) * psi_layout[a];
        nl += std::norm(psi_layout[a]);
        nr += std::norm(psi_ref[a]);
    }
    const double fidelity = std::norm(overlap) / (nl * nr);

    FidelityResult result;
    result.relative_infidelity = std::clamp(1.0 - fidelity, 0.0, 1.0);
    result.leakage = std::clamp(leakage(layout_model, psi_layout), 0.0, 1.0);
    result.norm_error = std::abs(state_norm(psi_layout) - 1.0);
    return result;
}

std::vector<PulseSpec> pulse_library(PulseRegime regime) {
    const auto [lo, hi] = regime_band_ns(regime);
    const double mid = 0.5 * (lo + hi);
    PulseSpec square;
    square.family = PulseFamily::CrSquare;
    square.regime = regime;
    square.duration_ns = mid;
    square.amplitude_ghz = kCrAmplitudeGhz;
    PulseSpec flattop = square;
    flattop.family = PulseFamily::CrGaussianFlattop;
    flattop.rise_time_ns = kFlattopRiseFraction * mid;
    PulseSpec coupler = square;
    coupler.family = PulseFamily::CouplerMod;
    coupler.amplitude_ghz = kCouplerModAmplitudeGhz;
    return {square, flattop, coupler};
}

std::vector<PulseSpec> full_pulse_library() {
    std::vector<PulseSpec> all;
    for (const PulseRegime r :
         {PulseRegime::Short, PulseRegime::Medium, PulseRegime::Long, PulseRegime::Overdrive}) {
        for (const PulseSpec& p : pulse_library(r)) all.push_back(p);
    }
    return all;
}

nlohmann::json to_json(const FidelityResult& r) {
    return nlohmann::json{{"relative_infidelity", r.relative_infidelity},
                          {"leakage", r.leakage},
                          {"norm_error", r.norm_error}};
}

} // namespace qlat::dynamics
