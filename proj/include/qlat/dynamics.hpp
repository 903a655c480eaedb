#pragma once

#include "qlat/hamiltonian.hpp"
#include "qlat/linalg.hpp"

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qlat::dynamics {

enum class PulseFamily { CrSquare, CrGaussianFlattop, CouplerMod };
enum class PulseRegime { Short, Medium, Long, Overdrive };

std::string to_string(PulseFamily f);
std::string to_string(PulseRegime r);
PulseFamily pulse_family_from_string(const std::string& s);
PulseRegime pulse_regime_from_string(const std::string& s);

/// Allowed duration band of a regime, in ns.
std::pair<double, double> regime_band_ns(PulseRegime r);

/// One control pulse: a charge drive on `drive_node`, envelope shaped by the
/// family, modulated at `carrier_ghz`. carrier_ghz = 0 means "resolve against
/// the model" (cross-resonance: target-mode frequency; coupler modulation:
/// difference frequency of the flanking modes).
struct PulseSpec {
    PulseFamily family = PulseFamily::CrSquare;
    PulseRegime regime = PulseRegime::Short;
    double duration_ns = 25.0;
    double amplitude_ghz = 0.04;
    int drive_node = 0;
    int target_node = 1;
    double carrier_ghz = 0.0;
    double rise_time_ns = 0.0;

    /// Stable identifier used as a column key in sweep tables.
    std::string id() const;

    /// Throws ValidationError when the duration leaves the regime band,
    /// amplitude is negative, or the ramps overlap (2 * rise > duration).
    void validate() const;

    static PulseSpec from_json(const nlohmann::json& j);
    static PulseSpec load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// Truncated-oscillator (Duffing) model: per-mode frequency and
/// anharmonicity plus static exchange couplings, each mode cut at
/// `mode_dims` levels.
struct DuffingModel {
    int mode_dims = 3;
    std::vector<double> frequency_ghz;
    std::vector<double> anharmonicity_ghz;
    Matrix coupling_ghz;

    std::size_t mode_count() const { return frequency_ghz.size(); }
    std::size_t dimension() const;

    /// Occupation of one mode in a basis state index.
    int occupation(std::size_t state, std::size_t mode) const;

    /// Fock-state energies sum_i [w_i n_i + a_i/2 n_i (n_i - 1)], GHz.
    std::vector<double> drift_diagonal_ghz() const;

    /// Dense drift including hopping terms; for inspection and tests.
    Matrix drift_dense_ghz() const;
};

/// Build the model from an effective Hamiltonian. Throws ValidationError for
/// mode_dims < 2 and CapacityError when mode_dims^N exceeds 4096.
DuffingModel build_duffing(const hamiltonian::EffectiveHamiltonian& h, int mode_dims = 3);

using State = std::vector<std::complex<double>>;

State ground_state(const DuffingModel& model);
/// |+> on one mode, ground elsewhere; phase-sensitive benchmarks start here.
State plus_state(const DuffingModel& model, int mode);

double state_norm(const State& psi);
/// Population outside the all-levels-<=1 computational subspace.
double leakage(const DuffingModel& model, const State& psi);

/// Fill carrier_ghz (when 0) from the model's mode frequencies.
PulseSpec resolve_pulse(PulseSpec pulse, const DuffingModel& model);

struct EvolveOptions {
    /// Integrator step; 0 selects 1 / (50 * f_max) with f_max the sum of the
    /// carrier frequency and the largest coupled transition frequency.
    double dt_ns = 0.0;
};

/// Propagate the Schroedinger equation i dpsi/dt = (H0 + s(t) D) psi through
/// the pulse, integrating in the interaction picture of the diagonal drift
/// (exact fast phases, RK4 on the residual generator). The returned state is
/// in the lab frame. Throws NumericError when the final norm drifts beyond
/// 1e-6.
State evolve(const DuffingModel& model, const PulseSpec& pulse, const State& psi0,
             const EvolveOptions& opts = {});

struct FidelityResult {
    double relative_infidelity = 0.0;   // 1 - |<psi_ref|psi_layout>|^2, in [0, 1]
    double leakage = 0.0;               // layout run, at final time
    double norm_error = 0.0;            // layout run
};

/// Evolve a layout and a reference under the identical pulse and initial
/// state and compare the final states. Pulses with carrier 0 are resolved
/// against the reference so both runs share the exact same drive.
FidelityResult relative_infidelity(const hamiltonian::EffectiveHamiltonian& layout,
                                   const hamiltonian::EffectiveHamiltonian& reference,
                                   const PulseSpec& pulse, const State& psi0,
                                   int mode_dims = 3, const EvolveOptions& opts = {});

/// Fixed bench pulses of one regime: cr_square, cr_gaussian_flattop and
/// coupler_mod at the band-midpoint duration.
std::vector<PulseSpec> pulse_library(PulseRegime regime);
/// All four regimes, 12 pulses.
std::vector<PulseSpec> full_pulse_library();

nlohmann::json to_json(const FidelityResult& r);

} // namespace qlat::dynamics
